//! Discrete probability measures on R^d and aligned joint samples.
//!
//! A [`DiscreteMeasure`] is the common currency of the crate: reference
//! measures, prospects and allocations are all represented as finitely many
//! distinct atoms carrying strictly positive weights. Atoms are kept in
//! lexicographic order so that every downstream solver sees the same input
//! regardless of how the rows were supplied.

use std::cmp::Ordering;
use std::fmt;

use crate::error::{Error, Result};

/// Tolerance on the total weight below which no renormalization happens.
pub const WEIGHT_SUM_TOL: f64 = 1e-12;

/// Dimension of the ambient space.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Dimension(usize);

impl Dimension {
    pub fn new(d: usize) -> Result<Self> {
        if d == 0 {
            return Err(Error::EmptyInput);
        }
        Ok(Self(d))
    }

    pub fn get(self) -> usize {
        self.0
    }
}

impl fmt::Display for Dimension {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

/// Sequential dot product. The summation order is fixed (left to right).
#[inline]
pub fn dot(a: &[f64], b: &[f64]) -> f64 {
    debug_assert_eq!(a.len(), b.len());
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

fn lex_cmp(a: &[f64], b: &[f64]) -> Ordering {
    for (x, y) in a.iter().zip(b) {
        match x.total_cmp(y) {
            Ordering::Equal => continue,
            other => return other,
        }
    }
    Ordering::Equal
}

/// Empirical probability measure: distinct atoms in R^d with positive weights.
#[derive(Debug, Clone)]
pub struct DiscreteMeasure {
    dim: Dimension,
    coords: Vec<f64>,
    weights: Vec<f64>,
    renormalized: bool,
}

impl PartialEq for DiscreteMeasure {
    fn eq(&self, other: &Self) -> bool {
        self.dim == other.dim && self.coords == other.coords && self.weights == other.weights
    }
}

impl DiscreteMeasure {
    /// Builds a measure from sample rows and optional nonnegative weights.
    ///
    /// Without weights every row gets mass `1/n`. Duplicate rows (exact
    /// coordinate equality) are merged by summing their weights, zero-weight
    /// atoms are dropped, and the weights are renormalized when their total is
    /// further than [`WEIGHT_SUM_TOL`] from one; [`Self::is_renormalized`]
    /// reports the latter.
    pub fn from_samples<R: AsRef<[f64]>>(rows: &[R], weights: Option<&[f64]>) -> Result<Self> {
        let first = rows.first().ok_or(Error::EmptyInput)?;
        let d = first.as_ref().len();
        let dim = Dimension::new(d).map_err(|_| Error::DimensionMismatch {
            expected: 1,
            found: 0,
        })?;
        let mut coords = Vec::with_capacity(rows.len() * d);
        for (r, row) in rows.iter().enumerate() {
            let row = row.as_ref();
            if row.len() != d {
                return Err(Error::DimensionMismatch {
                    expected: d,
                    found: row.len(),
                });
            }
            for (c, &v) in row.iter().enumerate() {
                if !v.is_finite() {
                    return Err(Error::NonFiniteValue {
                        row: r,
                        column: c,
                        value: v,
                    });
                }
                // normalizes -0.0 so that equal atoms compare bitwise equal
                coords.push(v + 0.0);
            }
        }
        let n = rows.len();
        let raw_weights = match weights {
            None => vec![1.0 / n as f64; n],
            Some(w) => {
                if w.len() != n {
                    return Err(Error::Misaligned {
                        left: n,
                        right: w.len(),
                    });
                }
                for (r, &v) in w.iter().enumerate() {
                    if !v.is_finite() {
                        return Err(Error::NonFiniteValue {
                            row: r,
                            column: d,
                            value: v,
                        });
                    }
                    if v < 0.0 {
                        return Err(Error::NegativeWeight { row: r, value: v });
                    }
                }
                w.to_vec()
            }
        };
        Self::canonicalize(dim, coords, raw_weights)
    }

    /// Builds a measure from row-major coordinates.
    pub fn from_flat(dim: usize, coords: Vec<f64>, weights: Option<&[f64]>) -> Result<Self> {
        if dim == 0 || coords.is_empty() {
            return Err(Error::EmptyInput);
        }
        if coords.len() % dim != 0 {
            return Err(Error::DimensionMismatch {
                expected: dim,
                found: coords.len() % dim,
            });
        }
        let rows: Vec<&[f64]> = coords.chunks(dim).collect();
        Self::from_samples(&rows, weights)
    }

    /// Dirac mass at `c`.
    pub fn point_mass(c: &[f64]) -> Result<Self> {
        Self::from_samples(&[c], None)
    }

    /// Equal-weight product grid with `k` points per axis at `(i - 0.5) / k`.
    pub fn uniform_grid(dim: usize, k: usize) -> Result<Self> {
        if dim == 0 || k == 0 {
            return Err(Error::EmptyInput);
        }
        let total = k
            .checked_pow(dim as u32)
            .ok_or_else(|| Error::InvalidParameter(format!("grid {k}^{dim} is too large")))?;
        let mut coords = Vec::with_capacity(total * dim);
        let mut idx = vec![0usize; dim];
        for _ in 0..total {
            coords.extend(idx.iter().map(|&i| (i as f64 + 0.5) / k as f64));
            for axis in (0..dim).rev() {
                idx[axis] += 1;
                if idx[axis] < k {
                    break;
                }
                idx[axis] = 0;
            }
        }
        Self::from_flat(dim, coords, None)
    }

    fn canonicalize(dim: Dimension, coords: Vec<f64>, weights: Vec<f64>) -> Result<Self> {
        let d = dim.get();
        let n = weights.len();
        let mut order: Vec<usize> = (0..n).collect();
        order.sort_by(|&a, &b| {
            lex_cmp(&coords[a * d..(a + 1) * d], &coords[b * d..(b + 1) * d])
                .then_with(|| weights[a].total_cmp(&weights[b]))
        });

        let mut out_coords: Vec<f64> = Vec::with_capacity(coords.len());
        let mut out_weights: Vec<f64> = Vec::with_capacity(n);
        for &i in &order {
            let atom = &coords[i * d..(i + 1) * d];
            let same = out_weights
                .last()
                .is_some_and(|_| &out_coords[out_coords.len() - d..] == atom);
            if same {
                *out_weights.last_mut().unwrap() += weights[i];
            } else {
                out_coords.extend_from_slice(atom);
                out_weights.push(weights[i]);
            }
        }

        // drop atoms that carry no mass
        let mut coords = Vec::with_capacity(out_coords.len());
        let mut kept = Vec::with_capacity(out_weights.len());
        for (k, &w) in out_weights.iter().enumerate() {
            if w > 0.0 {
                coords.extend_from_slice(&out_coords[k * d..(k + 1) * d]);
                kept.push(w);
            }
        }
        if kept.is_empty() {
            return Err(Error::ZeroTotalWeight);
        }

        let total: f64 = kept.iter().sum();
        let renormalized = (total - 1.0).abs() > WEIGHT_SUM_TOL;
        if renormalized {
            for w in &mut kept {
                *w /= total;
            }
        }
        Ok(Self {
            dim,
            coords,
            weights: kept,
            renormalized,
        })
    }

    pub fn dim(&self) -> usize {
        self.dim.get()
    }

    pub fn dimension(&self) -> Dimension {
        self.dim
    }

    /// Number of distinct atoms.
    pub fn len(&self) -> usize {
        self.weights.len()
    }

    pub fn is_empty(&self) -> bool {
        self.weights.is_empty()
    }

    pub fn atom(&self, k: usize) -> &[f64] {
        let d = self.dim.get();
        &self.coords[k * d..(k + 1) * d]
    }

    pub fn atoms(&self) -> impl ExactSizeIterator<Item = &[f64]> + '_ {
        self.coords.chunks(self.dim.get())
    }

    /// Row-major atom coordinates.
    pub fn coords(&self) -> &[f64] {
        &self.coords
    }

    pub fn weight(&self, k: usize) -> f64 {
        self.weights[k]
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    /// True when the input weights had to be rescaled to sum to one.
    pub fn is_renormalized(&self) -> bool {
        self.renormalized
    }

    /// True when all atoms carry the same mass.
    pub fn is_equal_weight(&self) -> bool {
        let w0 = self.weights[0];
        self.weights.iter().all(|&w| (w - w0).abs() <= 1e-15)
    }

    /// Weighted average of the atoms.
    pub fn mean(&self) -> Vec<f64> {
        let d = self.dim.get();
        let mut m = vec![0.0; d];
        for (atom, &w) in self.atoms().zip(&self.weights) {
            for (acc, &v) in m.iter_mut().zip(atom) {
                *acc += w * v;
            }
        }
        m
    }

    /// Image under `x -> a x + b`.
    pub fn affine(&self, a: f64, b: &[f64]) -> Result<Self> {
        if b.len() != self.dim() {
            return Err(Error::DimensionMismatch {
                expected: self.dim(),
                found: b.len(),
            });
        }
        let d = self.dim();
        let coords = self
            .coords
            .iter()
            .enumerate()
            .map(|(i, &v)| a * v + b[i % d])
            .collect();
        Self::from_flat(d, coords, Some(&self.weights))
    }

    /// Image under `x -> -x`.
    pub fn negated(&self) -> Self {
        let coords = self.coords.iter().map(|v| -v).collect();
        Self::from_flat(self.dim(), coords, Some(&self.weights))
            .expect("negation preserves validity")
    }

    /// Smallest `N <= max_count` such that every weight is a multiple of `1/N`
    /// within `1e-9`.
    pub fn lattice_count(&self, max_count: usize) -> Option<usize> {
        (1..=max_count).find(|&n| {
            self.weights.iter().all(|&w| {
                let scaled = w * n as f64;
                scaled.round() >= 1.0 && (scaled - scaled.round()).abs() <= 1e-9
            })
        })
    }

    /// Expands the measure into `count` equal-weight rows (atoms repeated in
    /// canonical order). Fails unless every weight is a multiple of `1/count`.
    pub fn expand_equal_weight(&self, count: usize) -> Result<AlignedSample> {
        let d = self.dim();
        let mut coords = Vec::with_capacity(count * d);
        for (atom, &w) in self.atoms().zip(&self.weights) {
            let scaled = w * count as f64;
            let reps = scaled.round();
            if reps < 1.0 || (scaled - reps).abs() > 1e-9 {
                return Err(Error::CountMismatch(format!(
                    "weight {w} is not a multiple of 1/{count}"
                )));
            }
            for _ in 0..reps as usize {
                coords.extend_from_slice(atom);
            }
        }
        if coords.len() != count * d {
            return Err(Error::CountMismatch(format!(
                "expanded {} rows instead of {count}",
                coords.len() / d
            )));
        }
        AlignedSample::from_flat(d, coords)
    }
}

/// Joint realizations of a prospect on a common, equally likely state index.
///
/// Pointwise operations (sums, mixtures) are only meaningful between samples
/// that share the same index, which is why comonotonicity checks work on
/// this type rather than on distributions.
#[derive(Debug, Clone, PartialEq)]
pub struct AlignedSample {
    dim: Dimension,
    coords: Vec<f64>,
}

impl AlignedSample {
    pub fn from_rows<R: AsRef<[f64]>>(rows: &[R]) -> Result<Self> {
        let first = rows.first().ok_or(Error::EmptyInput)?;
        let d = first.as_ref().len();
        let mut coords = Vec::with_capacity(rows.len() * d);
        for row in rows {
            let row = row.as_ref();
            if row.len() != d {
                return Err(Error::DimensionMismatch {
                    expected: d,
                    found: row.len(),
                });
            }
            coords.extend_from_slice(row);
        }
        Self::from_flat(d, coords)
    }

    /// Univariate sample from scalar values.
    pub fn from_values(values: &[f64]) -> Result<Self> {
        Self::from_flat(1, values.to_vec())
    }

    pub fn from_flat(dim: usize, coords: Vec<f64>) -> Result<Self> {
        let dim = Dimension::new(dim)?;
        if coords.is_empty() {
            return Err(Error::EmptyInput);
        }
        let d = dim.get();
        if coords.len() % d != 0 {
            return Err(Error::DimensionMismatch {
                expected: d,
                found: coords.len() % d,
            });
        }
        if let Some(i) = coords.iter().position(|v| !v.is_finite()) {
            return Err(Error::NonFiniteValue {
                row: i / d,
                column: i % d,
                value: coords[i],
            });
        }
        Ok(Self { dim, coords })
    }

    pub fn dim(&self) -> usize {
        self.dim.get()
    }

    /// Number of states.
    pub fn len(&self) -> usize {
        self.coords.len() / self.dim.get()
    }

    pub fn is_empty(&self) -> bool {
        self.coords.is_empty()
    }

    pub fn row(&self, k: usize) -> &[f64] {
        let d = self.dim.get();
        &self.coords[k * d..(k + 1) * d]
    }

    pub fn rows(&self) -> impl ExactSizeIterator<Item = &[f64]> + '_ {
        self.coords.chunks(self.dim.get())
    }

    pub fn coords(&self) -> &[f64] {
        &self.coords
    }

    /// Equal-weight empirical distribution (duplicates merged).
    pub fn empirical(&self) -> DiscreteMeasure {
        DiscreteMeasure::from_flat(self.dim(), self.coords.clone(), None)
            .expect("aligned samples hold finite, rectangular data")
    }

    pub fn check_aligned(&self, other: &Self) -> Result<()> {
        if self.len() != other.len() {
            return Err(Error::Misaligned {
                left: self.len(),
                right: other.len(),
            });
        }
        if self.dim() != other.dim() {
            return Err(Error::DimensionMismatch {
                expected: self.dim(),
                found: other.dim(),
            });
        }
        Ok(())
    }

    /// `a * self + b * other`, state by state.
    pub fn combine(&self, a: f64, other: &Self, b: f64) -> Result<Self> {
        self.check_aligned(other)?;
        let coords = self
            .coords
            .iter()
            .zip(&other.coords)
            .map(|(x, y)| a * x + b * y)
            .collect();
        Self::from_flat(self.dim(), coords)
    }

    /// Pointwise sum.
    pub fn add(&self, other: &Self) -> Result<Self> {
        self.check_aligned(other)?;
        let coords = self
            .coords
            .iter()
            .zip(&other.coords)
            .map(|(x, y)| x + y)
            .collect();
        Self::from_flat(self.dim(), coords)
    }

    /// Pointwise sum of a nonempty family.
    pub fn sum(family: &[Self]) -> Result<Self> {
        let (first, rest) = family.split_first().ok_or(Error::EmptyInput)?;
        rest.iter().try_fold(first.clone(), |acc, x| acc.add(x))
    }

    /// True when no two states share the same realization.
    pub fn has_distinct_rows(&self) -> bool {
        let mut rows: Vec<&[f64]> = self.rows().collect();
        rows.sort_by(|a, b| lex_cmp(a, b));
        rows.windows(2).all(|w| w[0] != w[1])
    }

    /// Reorders states by `perm` (new row k is old row `perm[k]`).
    pub fn permuted(&self, perm: &[usize]) -> Self {
        let coords = perm
            .iter()
            .flat_map(|&k| self.row(k).iter().copied())
            .collect();
        Self {
            dim: self.dim,
            coords,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn equal_weights_by_default() {
        let m = DiscreteMeasure::from_samples(&[[1.0], [2.0], [3.0]], None).unwrap();
        assert_eq!(m.len(), 3);
        assert_eq!(m.coords(), &[1.0, 2.0, 3.0]);
        for &w in m.weights() {
            assert_eq!(w, 1.0 / 3.0);
        }
        assert!(!m.is_renormalized());
    }

    #[test]
    fn duplicates_are_merged() {
        let m = DiscreteMeasure::from_samples(&[[1.0, 0.0], [1.0, 0.0], [0.0, 1.0]], None).unwrap();
        assert_eq!(m.len(), 2);
        assert_eq!(m.atom(0), &[0.0, 1.0]);
        assert_eq!(m.atom(1), &[1.0, 0.0]);
        assert!((m.weight(0) - 1.0 / 3.0).abs() < 1e-15);
        assert!((m.weight(1) - 2.0 / 3.0).abs() < 1e-15);
    }

    #[test]
    fn weights_are_renormalized() {
        let m = DiscreteMeasure::from_samples(&[[1.0], [2.0]], Some(&[2.0, 6.0])).unwrap();
        assert_eq!(m.weights(), &[0.25, 0.75]);
        assert!(m.is_renormalized());
    }

    #[test]
    fn rejects_bad_input() {
        let empty: [[f64; 1]; 0] = [];
        assert_eq!(
            DiscreteMeasure::from_samples(&empty, None),
            Err(Error::EmptyInput)
        );
        let ragged: Vec<Vec<f64>> = vec![vec![1.0, 2.0], vec![1.0]];
        assert!(matches!(
            DiscreteMeasure::from_samples(&ragged, None),
            Err(Error::DimensionMismatch {
                expected: 2,
                found: 1
            })
        ));
        assert!(matches!(
            DiscreteMeasure::from_samples(&[[f64::NAN]], None),
            Err(Error::NonFiniteValue {
                row: 0,
                column: 0,
                ..
            })
        ));
        assert!(matches!(
            DiscreteMeasure::from_samples(&[[1.0], [2.0]], Some(&[1.0, -1.0])),
            Err(Error::NegativeWeight { row: 1, .. })
        ));
        assert_eq!(
            DiscreteMeasure::from_samples(&[[1.0]], Some(&[0.0])),
            Err(Error::ZeroTotalWeight)
        );
    }

    #[test]
    fn zero_weight_atoms_are_dropped() {
        let m =
            DiscreteMeasure::from_samples(&[[1.0], [2.0], [3.0]], Some(&[0.5, 0.0, 0.5])).unwrap();
        assert_eq!(m.coords(), &[1.0, 3.0]);
    }

    #[test]
    fn mean_examples() {
        let m = DiscreteMeasure::from_samples(&[[1.0], [3.0]], None).unwrap();
        assert_eq!(m.mean(), vec![2.0]);
        let m = DiscreteMeasure::from_samples(&[[2.0, 0.0], [0.0, 2.0]], None).unwrap();
        assert_eq!(m.mean(), vec![1.0, 1.0]);
        let m = DiscreteMeasure::from_samples(&[[1.0], [2.0], [3.0]], None).unwrap();
        assert!((m.mean()[0] - 2.0).abs() < 1e-15);
    }

    #[test]
    fn negative_zero_merges_with_zero() {
        let a = DiscreteMeasure::from_samples(&[[0.0], [-0.0]], None).unwrap();
        assert_eq!(a.len(), 1);
    }

    #[test]
    fn uniform_grid_layout() {
        let g = DiscreteMeasure::uniform_grid(2, 2).unwrap();
        assert_eq!(g.len(), 4);
        assert_eq!(g.atom(0), &[0.25, 0.25]);
        assert_eq!(g.atom(3), &[0.75, 0.75]);
        assert!(g.is_equal_weight());
    }

    #[test]
    fn lattice_expansion() {
        let m = DiscreteMeasure::from_samples(&[[1.0], [1.0], [2.0]], None).unwrap();
        assert_eq!(m.lattice_count(100), Some(3));
        let e = m.expand_equal_weight(6).unwrap();
        assert_eq!(e.coords(), &[1.0, 1.0, 1.0, 1.0, 2.0, 2.0]);
        assert!(m.expand_equal_weight(4).is_err());
    }

    #[test]
    fn negation_reverses_lexicographic_order() {
        let m = DiscreteMeasure::from_samples(&[[0.1, 2.0], [0.1, 1.0], [0.5, 0.0]], None).unwrap();
        let neg = m.negated();
        for k in 0..m.len() {
            let back: Vec<f64> = neg.atom(m.len() - 1 - k).iter().map(|v| -v).collect();
            assert_eq!(back, m.atom(k));
        }
    }

    #[test]
    fn aligned_sample_arithmetic() {
        let x = AlignedSample::from_values(&[1.0, 2.0]).unwrap();
        let y = AlignedSample::from_values(&[20.0, 10.0]).unwrap();
        assert_eq!(x.add(&y).unwrap().coords(), &[21.0, 12.0]);
        assert_eq!(x.combine(0.5, &y, 0.5).unwrap().coords(), &[10.5, 6.0]);
        let z = AlignedSample::from_values(&[1.0, 2.0, 3.0]).unwrap();
        assert_eq!(x.add(&z), Err(Error::Misaligned { left: 2, right: 3 }));
        assert!(AlignedSample::from_values(&[5.0, 5.0, 6.0])
            .map(|s| !s.has_distinct_rows())
            .unwrap());
    }
}
