//! Multi-attribute allocations and their generalized Gini evaluation.

use crate::error::{Error, Result};
use crate::evaluate::{gamma, WeightScheme};
use crate::measure::{AlignedSample, DiscreteMeasure};

/// Relative gap below which two evaluations are reported as tied.
pub const TIE_TOL: f64 = 1e-12;
/// Allowed spread between the per-component fractions of a transfer.
const FRACTION_TOL: f64 = 1e-9;

/// `n` equally weighted individuals, each holding `d` nonnegative attributes.
#[derive(Debug, Clone, PartialEq)]
pub struct Allocation {
    rows: AlignedSample,
    labels: Option<Vec<String>>,
}

impl Allocation {
    pub fn new(rows: AlignedSample, labels: Option<Vec<String>>) -> Result<Self> {
        if let Some(i) = rows.coords().iter().position(|&v| v < 0.0) {
            let d = rows.dim();
            return Err(Error::InvalidParameter(format!(
                "attribute {} of individual {} is negative ({})",
                i % d,
                i / d,
                rows.coords()[i]
            )));
        }
        if let Some(l) = &labels {
            if l.len() != rows.dim() {
                return Err(Error::DimensionMismatch {
                    expected: rows.dim(),
                    found: l.len(),
                });
            }
        }
        Ok(Self { rows, labels })
    }

    pub fn from_rows<R: AsRef<[f64]>>(rows: &[R]) -> Result<Self> {
        Self::new(AlignedSample::from_rows(rows)?, None)
    }

    pub fn rows(&self) -> &AlignedSample {
        &self.rows
    }

    pub fn labels(&self) -> Option<&[String]> {
        self.labels.as_deref()
    }

    pub fn dim(&self) -> usize {
        self.rows.dim()
    }

    /// Number of individuals.
    pub fn len(&self) -> usize {
        self.rows.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rows.is_empty()
    }

    pub fn empirical(&self) -> DiscreteMeasure {
        self.rows.empirical()
    }
}

/// Social evaluation `gamma` of the allocation's empirical distribution.
pub fn gini_evaluate(a: &Allocation, ws: &WeightScheme) -> Result<f64> {
    if a.dim() != ws.dim() {
        return Err(Error::DimensionMismatch {
            expected: ws.dim(),
            found: a.dim(),
        });
    }
    Ok(gamma(ws, &a.empirical())?.value)
}

/// Moves `delta` from individual `i` to individual `j`.
///
/// `delta` must be `t (a_i - a_j)` for one fraction `t` in `[0, 1/2]`, so
/// the pair moves toward its midpoint along the segment joining them and the
/// result is a doubly stochastic average of the original allocation.
pub fn pigou_dalton_transfer(
    a: &Allocation,
    i: usize,
    j: usize,
    delta: &[f64],
) -> Result<Allocation> {
    let n = a.len();
    if i >= n || j >= n {
        return Err(Error::InvalidTransfer(format!(
            "individual index out of range (n = {n})"
        )));
    }
    if i == j {
        return Err(Error::InvalidTransfer(
            "donor and recipient coincide".into(),
        ));
    }
    if delta.len() != a.dim() {
        return Err(Error::DimensionMismatch {
            expected: a.dim(),
            found: delta.len(),
        });
    }
    let (ri, rj) = (a.rows.row(i), a.rows.row(j));
    let mut fraction: Option<f64> = None;
    for (c, &dc) in delta.iter().enumerate() {
        let gap = ri[c] - rj[c];
        if !dc.is_finite() {
            return Err(Error::InvalidTransfer(format!(
                "component {c} is not finite"
            )));
        }
        if dc != 0.0 && dc.signum() != gap.signum() {
            return Err(Error::InvalidTransfer(format!(
                "component {c} moves toward the richer individual"
            )));
        }
        if dc.abs() > gap.abs() / 2.0 {
            return Err(Error::InvalidTransfer(format!(
                "component {c} overshoots the midpoint"
            )));
        }
        if gap != 0.0 {
            let t = dc / gap;
            match fraction {
                None => fraction = Some(t),
                Some(f) if (f - t).abs() > FRACTION_TOL => {
                    return Err(Error::InvalidTransfer(format!(
                        "component {c} moves a fraction {t} of the gap, others move {f}"
                    )));
                }
                Some(_) => {}
            }
        }
    }
    let d = a.dim();
    let mut coords = a.rows.coords().to_vec();
    for c in 0..d {
        coords[i * d + c] -= delta[c];
        coords[j * d + c] += delta[c];
    }
    Allocation::new(AlignedSample::from_flat(d, coords)?, a.labels.clone())
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RankedAllocation {
    /// Position in the input list.
    pub index: usize,
    pub value: f64,
    /// Evaluates equal to the allocation ranked just above.
    pub tied_with_previous: bool,
}

/// Sorts allocations by evaluation, best first. Ties keep input order.
pub fn rank_allocations(allocs: &[Allocation], ws: &WeightScheme) -> Result<Vec<RankedAllocation>> {
    let mut ranked = allocs
        .iter()
        .enumerate()
        .map(|(index, a)| {
            Ok(RankedAllocation {
                index,
                value: gini_evaluate(a, ws)?,
                tied_with_previous: false,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    ranked.sort_by(|a, b| b.value.total_cmp(&a.value));
    for k in 1..ranked.len() {
        let (prev, cur) = (ranked[k - 1].value, ranked[k].value);
        ranked[k].tied_with_previous =
            (prev - cur).abs() <= TIE_TOL * (1.0 + prev.abs().max(cur.abs()));
    }
    Ok(ranked)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn t_squared() -> WeightScheme {
        WeightScheme::univariate(&[1.0 / 3.0, 1.0, 5.0 / 3.0]).unwrap()
    }

    #[test]
    fn univariate_gini_fixture() {
        let a = Allocation::from_rows(&[[3.0], [1.0], [2.0]]).unwrap();
        assert!((gini_evaluate(&a, &t_squared()).unwrap() - 14.0 / 9.0).abs() < 1e-12);
    }

    #[test]
    fn equal_allocation_is_a_point_mass() {
        let ws = t_squared();
        let a = Allocation::from_rows(&[[2.5], [2.5], [2.5]]).unwrap();
        let point = gamma(&ws, &DiscreteMeasure::point_mass(&[2.5]).unwrap())
            .unwrap()
            .value;
        assert_eq!(gini_evaluate(&a, &ws).unwrap(), point);
    }

    #[test]
    fn transfers() {
        let a = Allocation::from_rows(&[[1.0], [3.0]]).unwrap();
        let full = pigou_dalton_transfer(&a, 1, 0, &[1.0]).unwrap();
        assert_eq!(full.rows().coords(), &[2.0, 2.0]);
        assert_eq!(pigou_dalton_transfer(&a, 1, 0, &[0.0]).unwrap(), a);
        assert!(matches!(
            pigou_dalton_transfer(&a, 1, 0, &[1.5]),
            Err(Error::InvalidTransfer(_))
        ));
        assert!(matches!(
            pigou_dalton_transfer(&a, 0, 1, &[0.5]),
            Err(Error::InvalidTransfer(_))
        ));
        assert!(matches!(
            pigou_dalton_transfer(&a, 0, 0, &[0.0]),
            Err(Error::InvalidTransfer(_))
        ));

        // moving one attribute but not the other is not an averaging
        let b = Allocation::from_rows(&[[0.0, 0.0], [2.0, 2.0]]).unwrap();
        assert!(matches!(
            pigou_dalton_transfer(&b, 1, 0, &[1.0, 0.0]),
            Err(Error::InvalidTransfer(_))
        ));
        assert!(pigou_dalton_transfer(&b, 1, 0, &[0.5, 0.5]).is_ok());
    }

    #[test]
    fn two_attribute_transfer_raises_state_price_evaluation() {
        let nu = DiscreteMeasure::from_samples(&[[0.2, 0.3], [0.9, 0.7]], None).unwrap();
        let ws = WeightScheme::state_price(&nu, 1.0, &[0.0, 0.0]).unwrap();
        let a = Allocation::from_rows(&[[0.0, 0.0], [2.0, 2.0]]).unwrap();
        let b = pigou_dalton_transfer(&a, 1, 0, &[1.0, 1.0]).unwrap();
        assert_eq!(b.rows().coords(), &[1.0, 1.0, 1.0, 1.0]);
        // minimal correlation with the prices: 0.5 before, 1.05 after
        assert!((gini_evaluate(&a, &ws).unwrap() - 0.5).abs() < 1e-12);
        assert!((gini_evaluate(&b, &ws).unwrap() - 1.05).abs() < 1e-12);
    }

    #[test]
    fn ranking() {
        let mu = DiscreteMeasure::from_samples(&[[0.1], [0.9]], None).unwrap();
        let ws = WeightScheme::risk_averse(mu, 1.0, &[0.0]).unwrap();
        let spread = Allocation::from_rows(&[[1.0], [3.0]]).unwrap();
        let flat = Allocation::from_rows(&[[2.0], [2.0]]).unwrap();
        let r = rank_allocations(&[spread.clone(), flat.clone()], &ws).unwrap();
        assert_eq!(r.iter().map(|x| x.index).collect::<Vec<_>>(), vec![1, 0]);
        assert!(!r[1].tied_with_previous);

        let r = rank_allocations(&[spread.clone(), spread.clone()], &ws).unwrap();
        assert_eq!((r[0].index, r[1].index), (0, 1));
        assert!(r[1].tied_with_previous);

        assert_eq!(rank_allocations(&[flat], &ws).unwrap().len(), 1);
    }

    #[test]
    fn negative_attributes_are_rejected() {
        assert!(Allocation::from_rows(&[[1.0], [-0.5]]).is_err());
    }
}
