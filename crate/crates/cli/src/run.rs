//! Command execution.

use std::path::{Path, PathBuf};

use serde_json::{json, Map, Value};
use sha2::{Digest, Sha256};

use dualrisk::comonotone::{is_mu_comonotonic, COMONOTONE_TOL};
use dualrisk::evaluate::{
    concave_order_check, fosd_check, ConcaveOrderCertificate, ConcaveOrderMethod, FosdVerdict,
    Orientation, SchemeForm, MEAN_TOL,
};
use dualrisk::inequality::{gini_evaluate, rank_allocations, TIE_TOL};
use dualrisk::local_utility::{univariate_local_utility_closed_form, Anchor, LocalUtility};
use dualrisk::quantile::{univariate_quantile, QuantileKind};
use dualrisk::transport::EXACT_TOL;
use dualrisk::{gamma, max_correlation, mu_quantile, AlignedSample, DiscreteMeasure, WeightScheme};

use crate::config::{parse_list, Command, Common, Method, Order, RunConfig, SchemeKind};
use crate::dataset::{parse_bytes, Dataset};
use crate::error::CliError;
use crate::report::{num, nums, rows, Report};

pub const EXIT_OK: i32 = 0;
pub const EXIT_CHECK_FAILED: i32 = 1;
pub const EXIT_INPUT_ERROR: i32 = 2;

/// Result of a command that ran to completion.
#[derive(Debug, Clone, PartialEq)]
pub struct Outcome {
    pub report: String,
    pub exit_code: i32,
}

struct Session {
    report: Report,
}

impl Session {
    fn load(&mut self, path: &Path) -> Result<Dataset, CliError> {
        let bytes = std::fs::read(path).map_err(|e| match e.kind() {
            std::io::ErrorKind::NotFound => CliError::FileNotFound(path.to_path_buf()),
            _ => CliError::Io {
                path: path.to_path_buf(),
                message: e.to_string(),
            },
        })?;
        let digest = Sha256::digest(&bytes);
        let hex: String = digest.iter().map(|b| format!("{b:02x}")).collect();
        self.report
            .inputs
            .push(json!({ "path": path.display().to_string(), "sha256": hex }));
        parse_bytes(path, &bytes)
    }
}

/// Reference measure plus the rows as they were supplied.
struct Reference {
    measure: DiscreteMeasure,
    raw_rows: Vec<Vec<f64>>,
    source: String,
}

fn load_reference(s: &mut Session, common: &Common) -> Result<Reference, CliError> {
    let mu_arg = common
        .mu
        .as_deref()
        .ok_or_else(|| CliError::Usage("this command needs a reference measure (--mu)".into()))?;
    let words: Vec<&str> = mu_arg.split_whitespace().collect();
    if words.first() == Some(&"uniform-grid") {
        let bad = || CliError::Usage(format!("--mu `{mu_arg}`: expected \"uniform-grid D K\""));
        let [_, d, k] = words[..] else {
            return Err(bad());
        };
        let d: usize = d.parse().map_err(|_| bad())?;
        let k: usize = k.parse().map_err(|_| bad())?;
        let measure = DiscreteMeasure::uniform_grid(d, k)?;
        let raw_rows = measure.atoms().map(<[f64]>::to_vec).collect();
        return Ok(Reference {
            measure,
            raw_rows,
            source: format!("uniform-grid {d} {k}"),
        });
    }
    let ds = s.load(Path::new(mu_arg))?;
    Ok(Reference {
        measure: ds.to_measure()?,
        raw_rows: ds.rows,
        source: mu_arg.to_string(),
    })
}

fn measure_json(m: &DiscreteMeasure) -> Value {
    json!({ "atoms": rows(m.coords(), m.dim()), "weights": nums(m.weights()) })
}

fn reject_scheme(common: &Common, command: &str) -> Result<(), CliError> {
    let given = common.scheme.is_some()
        || common.alpha.is_some()
        || common.u0.is_some()
        || common.phi.is_some()
        || common.f_prime.is_some();
    if given {
        return Err(CliError::Usage(format!(
            "`{command}` does not take a weight scheme"
        )));
    }
    Ok(())
}

fn affine_parameters(common: &Common, dim: usize) -> Result<(f64, Vec<f64>), CliError> {
    let alpha = common
        .alpha
        .ok_or_else(|| CliError::Usage("this scheme needs --alpha".into()))?;
    let u0 = match &common.u0 {
        Some(text) => parse_list(text, "--u0")?,
        None => vec![0.0; dim],
    };
    Ok((alpha, u0))
}

fn build_scheme(s: &mut Session, common: &Common) -> Result<WeightScheme, CliError> {
    let kind = common
        .scheme
        .ok_or_else(|| CliError::Usage("this command needs --scheme".into()))?;
    let stray = |flag: &str| CliError::Usage(format!("{flag} does not apply to this scheme"));
    if !matches!(kind, SchemeKind::RiskAverse | SchemeKind::StatePrice) {
        if common.alpha.is_some() {
            return Err(stray("--alpha"));
        }
        if common.u0.is_some() {
            return Err(stray("--u0"));
        }
    }
    if kind != SchemeKind::General && common.phi.is_some() {
        return Err(stray("--phi"));
    }
    if kind != SchemeKind::Univariate && common.f_prime.is_some() {
        return Err(stray("--f-prime"));
    }

    let (ws, source) = match kind {
        SchemeKind::RiskAverse | SchemeKind::StatePrice => {
            let r = load_reference(s, common)?;
            let (alpha, u0) = affine_parameters(common, r.measure.dim())?;
            let ws = if kind == SchemeKind::RiskAverse {
                WeightScheme::risk_averse(r.measure, alpha, &u0)?
            } else {
                WeightScheme::state_price(&r.measure, alpha, &u0)?
            };
            (ws, Value::String(r.source))
        }
        SchemeKind::General => {
            let r = load_reference(s, common)?;
            let path = common
                .phi
                .as_deref()
                .ok_or_else(|| CliError::Usage("--scheme general needs --phi".into()))?;
            let table = s.load(path)?;
            let phi = general_phi(&r, &table)?;
            (
                WeightScheme::general(r.measure, phi)?,
                Value::String(r.source),
            )
        }
        SchemeKind::Univariate => {
            if common.mu.is_some() {
                return Err(CliError::Usage(
                    "--scheme univariate fixes its own midpoint grid; drop --mu".into(),
                ));
            }
            let path = common
                .f_prime
                .as_deref()
                .ok_or_else(|| CliError::Usage("--scheme univariate needs --f-prime".into()))?;
            let table = s.load(path)?;
            if table.dim() != 1 || table.weights.is_some() {
                return Err(CliError::Usage(format!(
                    "{}: expected a single column of f' values",
                    path.display()
                )));
            }
            let f: Vec<f64> = table.rows.iter().map(|r| r[0]).collect();
            let ws = WeightScheme::univariate(&f)?;
            let source = format!("uniform-grid 1 {}", f.len());
            (ws, Value::String(source))
        }
    };

    let mut scheme = Map::new();
    let name = match kind {
        SchemeKind::RiskAverse => "risk-averse",
        SchemeKind::General => "general",
        SchemeKind::Univariate => "univariate",
        SchemeKind::StatePrice => "state-price",
    };
    scheme.insert("kind".into(), json!(name));
    if let SchemeForm::RiskAverse { alpha, u0 } = ws.form() {
        scheme.insert("alpha".into(), num(*alpha));
        scheme.insert("u0".into(), nums(u0));
    }
    if let SchemeForm::Univariate { risk_averse } = ws.form() {
        scheme.insert("risk_averse".into(), json!(risk_averse));
    }
    let orientation = match ws.orientation() {
        Orientation::NonPositive => "nonpositive",
        Orientation::Economic => "economic",
    };
    scheme.insert("orientation".into(), json!(orientation));
    scheme.insert("mu_source".into(), source);
    scheme.insert("mu".into(), measure_json(ws.mu()));
    scheme.insert("phi".into(), rows(ws.phi_flat(), ws.dim()));
    s.report.scheme = Value::Object(scheme);
    Ok(ws)
}

/// Reorders a φ table given per supplied reference row into canonical atom order.
fn general_phi(r: &Reference, table: &Dataset) -> Result<Vec<f64>, CliError> {
    let d = r.measure.dim();
    if table.weights.is_some() || table.dim() != d || table.rows.len() != r.raw_rows.len() {
        return Err(CliError::Usage(format!(
            "{}: expected {} rows of {} weights, one per reference row",
            table.path.display(),
            r.raw_rows.len(),
            d
        )));
    }
    let mut phi = Vec::with_capacity(r.measure.len() * d);
    for atom in r.measure.atoms() {
        let mut found: Option<&Vec<f64>> = None;
        for (raw, value) in r.raw_rows.iter().zip(&table.rows) {
            if raw.as_slice() != atom {
                continue;
            }
            match found {
                None => found = Some(value),
                Some(prev) if prev != value => {
                    return Err(CliError::Usage(format!(
                        "{}: repeated reference atom {atom:?} has conflicting weights",
                        table.path.display()
                    )));
                }
                Some(_) => {}
            }
        }
        // every atom comes from some supplied row
        phi.extend_from_slice(found.expect("atom without a source row"));
    }
    Ok(phi)
}

fn positive_tol(common: &Common, default: f64) -> Result<f64, CliError> {
    let tol = common.tol.unwrap_or(default);
    if !(tol > 0.0 && tol.is_finite()) {
        return Err(CliError::Usage(format!(
            "--tol must be positive, got {tol}"
        )));
    }
    Ok(tol)
}

fn kind_name(kind: QuantileKind) -> &'static str {
    match kind {
        QuantileKind::Assignment => "assignment",
        QuantileKind::Barycentric => "barycentric",
    }
}

fn path_list(paths: &[PathBuf]) -> Vec<String> {
    paths.iter().map(|p| p.display().to_string()).collect()
}

/// Runs one command and renders its report.
pub fn run(config: &RunConfig) -> Result<Outcome, CliError> {
    let command = &config.command;
    let common = command.common();
    let mut s = Session {
        report: Report::new(command.name()),
    };
    s.report.seed = Some(common.seed);
    let mut exit_code = EXIT_OK;

    match command {
        Command::Eval { data, .. } => {
            let x = s.load(data)?.to_measure()?;
            let ws = build_scheme(&mut s, common)?;
            let g = gamma(&ws, &x)?;
            let q = &g.quantile_map;
            let v = &mut s.report.values;
            v.insert("gamma".into(), num(g.value));
            if let Some(dec) = g.decomposition {
                v.insert("rho".into(), num(dec.rho));
                v.insert("mean_term".into(), num(dec.mean_term));
            }
            v.insert("quantile_kind".into(), json!(kind_name(q.kind())));
            v.insert("quantile".into(), rows(q.flat_values(), q.dim()));
            let c = &mut s.report.certificates;
            c.insert("plan_residual".into(), num(q.plan().residuals().max()));
            c.insert(
                "degenerate_reference".into(),
                json!(q.has_degenerate_reference()),
            );
            s.report.tolerances.insert("exact".into(), num(EXACT_TOL));
        }
        Command::Rank { data, .. } => {
            let prospects = data
                .iter()
                .map(|p| s.load(p)?.to_measure())
                .collect::<Result<Vec<_>, CliError>>()?;
            let ws = build_scheme(&mut s, common)?;
            let values = prospects
                .iter()
                .map(|x| Ok(gamma(&ws, x)?.value))
                .collect::<Result<Vec<_>, CliError>>()?;
            let mut order: Vec<usize> = (0..values.len()).collect();
            order.sort_by(|&a, &b| values[b].total_cmp(&values[a]));
            let names = path_list(data);
            let mut ranking = Vec::new();
            for (pos, &i) in order.iter().enumerate() {
                let tied = pos > 0 && {
                    let prev = values[order[pos - 1]];
                    (prev - values[i]).abs() <= TIE_TOL * (1.0 + prev.abs().max(values[i].abs()))
                };
                ranking.push(json!({ "input": names[i], "gamma": num(values[i]), "tied_with_previous": tied }));
            }
            s.report
                .values
                .insert("ranking".into(), Value::Array(ranking));
            s.report.tolerances.insert("tie".into(), num(TIE_TOL));
        }
        Command::Dominance {
            x,
            y,
            order,
            method,
            clouds,
            ..
        } => {
            reject_scheme(common, "dominance")?;
            let xm = s.load(x)?.to_measure()?;
            let ym = s.load(y)?.to_measure()?;
            match order {
                Order::Fosd => {
                    let tol = positive_tol(common, EXACT_TOL)?;
                    let r = load_reference(&mut s, common)?;
                    let check = fosd_check(&r.measure, &xm, &ym, tol)?;
                    let verdict = match check.verdict {
                        FosdVerdict::StrictlyDominates => "strictly dominates",
                        FosdVerdict::Dominates => "dominates (weak)",
                        FosdVerdict::Incomparable => {
                            exit_code = EXIT_CHECK_FAILED;
                            "incomparable"
                        }
                    };
                    s.report.values.insert("order".into(), json!("fosd"));
                    s.report.values.insert("verdict".into(), json!(verdict));
                    s.report.values.insert("mu_source".into(), json!(r.source));
                    let c = &mut s.report.certificates;
                    c.insert("worst_shortfall".into(), num(check.worst_shortfall));
                    c.insert("largest_excess".into(), num(check.largest_excess));
                    s.report.tolerances.insert("dominance".into(), num(tol));
                }
                Order::Concave => {
                    if common.mu.is_some() {
                        return Err(CliError::Usage(
                            "the concave order does not use --mu".into(),
                        ));
                    }
                    let chosen = match method {
                        Method::DoublyStochastic => ConcaveOrderMethod::DoublyStochastic,
                        Method::RhoBattery => ConcaveOrderMethod::RhoBattery {
                            clouds: *clouds,
                            seed: common.seed,
                            tol: positive_tol(common, 1e-9)?,
                        },
                    };
                    let check = match concave_order_check(&xm, &ym, chosen) {
                        Err(dualrisk::Error::MeanMismatch { gap }) => {
                            // unequal means rule out the concave order outright
                            s.report.values.insert("order".into(), json!("concave"));
                            s.report
                                .values
                                .insert("verdict".into(), json!("not dominated (means differ)"));
                            s.report
                                .certificates
                                .insert("kind".into(), json!("mean-gap"));
                            s.report.certificates.insert("mean_gap".into(), num(gap));
                            s.report.tolerances.insert("mean".into(), num(MEAN_TOL));
                            return Ok(Outcome {
                                report: s.report.to_json(),
                                exit_code: EXIT_CHECK_FAILED,
                            });
                        }
                        other => other?,
                    };
                    if !check.holds {
                        exit_code = EXIT_CHECK_FAILED;
                    }
                    let verdict = match (&check.certificate, check.holds) {
                        (_, true) => "dominates (concave)",
                        (ConcaveOrderCertificate::Refuted { .. }, false) => "refuted",
                        _ => "not dominated",
                    };
                    s.report.values.insert("order".into(), json!("concave"));
                    s.report.values.insert("verdict".into(), json!(verdict));
                    s.report.certificates = concave_certificate(&check.certificate);
                    s.report.tolerances.insert("mean".into(), num(MEAN_TOL));
                    if let ConcaveOrderMethod::RhoBattery { tol, .. } = chosen {
                        s.report.tolerances.insert("battery".into(), num(tol));
                    }
                }
            }
        }
        Command::Comonotone { data, .. } => {
            reject_scheme(common, "comonotone")?;
            let samples = data
                .iter()
                .map(|p| s.load(p)?.to_sample())
                .collect::<Result<Vec<AlignedSample>, _>>()?;
            let tol = positive_tol(common, COMONOTONE_TOL)?;
            let r = load_reference(&mut s, common)?;
            let cert = is_mu_comonotonic(&r.measure, &samples, tol)?;
            if !cert.comonotonic {
                exit_code = EXIT_CHECK_FAILED;
            }
            let v = &mut s.report.values;
            v.insert("mu_source".into(), json!(r.source));
            v.insert("comonotonic".into(), json!(cert.comonotonic));
            let c = &mut s.report.certificates;
            c.insert("rho_of_sum".into(), num(cert.rho_of_sum));
            c.insert("sum_of_rhos".into(), num(cert.sum_of_rhos));
            c.insert("gap".into(), num(cert.gap));
            s.report.tolerances.insert("comonotone".into(), num(tol));
        }
        Command::Quantile { data, at, .. } => {
            reject_scheme(common, "quantile")?;
            let x = s.load(data)?.to_measure()?;
            let r = load_reference(&mut s, common)?;
            let q = mu_quantile(&r.measure, &x)?;
            let v = &mut s.report.values;
            v.insert("mu_source".into(), json!(r.source));
            v.insert("mu".into(), measure_json(&r.measure));
            v.insert("kind".into(), json!(kind_name(q.kind())));
            v.insert("quantile".into(), rows(q.flat_values(), q.dim()));
            if let Some(levels) = at {
                let levels = parse_list(levels, "--at")?;
                let qs = levels
                    .iter()
                    .map(|&t| univariate_quantile(&x, t))
                    .collect::<Result<Vec<_>, _>>()?;
                v.insert("levels".into(), nums(&levels));
                v.insert("univariate_quantile".into(), nums(&qs));
            }
            let c = &mut s.report.certificates;
            c.insert("plan_residual".into(), num(q.plan().residuals().max()));
            c.insert(
                "monotonicity_violation".into(),
                num(q.monotonicity_violation()),
            );
            c.insert(
                "degenerate_reference".into(),
                json!(q.has_degenerate_reference()),
            );
            s.report.tolerances.insert("exact".into(), num(EXACT_TOL));
        }
        Command::LocalUtility {
            data,
            points,
            anchor,
            ..
        } => {
            reject_scheme(common, "local-utility")?;
            let p = s.load(data)?.to_measure()?;
            let r = load_reference(&mut s, common)?;
            let anchor_point = match anchor {
                Some(text) => parse_list(text, "--anchor")?,
                None => p.atom(0).to_vec(),
            };
            let at: Vec<Vec<f64>> = match points {
                Some(path) => s.load(path)?.rows,
                None => p.atoms().map(<[f64]>::to_vec).collect(),
            };
            let lu = LocalUtility::from_distribution(&r.measure, &p)?.anchored_at(&anchor_point)?;
            let utility = at
                .iter()
                .map(|z| lu.eval(z))
                .collect::<Result<Vec<_>, _>>()?;
            let residual = max_correlation(&r.measure, &p)?.residuals().max();
            let flat: Vec<f64> = at.concat();
            let v = &mut s.report.values;
            v.insert("mu_source".into(), json!(r.source));
            if let Anchor::Point(a) = lu.anchor() {
                v.insert("anchor".into(), nums(a));
            }
            v.insert("points".into(), rows(&flat, p.dim()));
            v.insert("utility".into(), nums(&utility));
            if p.dim() == 1 {
                let shift = univariate_local_utility_closed_form(&p, anchor_point[0])?;
                let closed = at
                    .iter()
                    .map(|z| Ok(univariate_local_utility_closed_form(&p, z[0])? - shift))
                    .collect::<Result<Vec<_>, CliError>>()?;
                v.insert("closed_form".into(), nums(&closed));
            }
            let c = &mut s.report.certificates;
            c.insert("potential".into(), nums(lu.psi()));
            c.insert("plan_residual".into(), num(residual));
            s.report.tolerances.insert("exact".into(), num(EXACT_TOL));
        }
        Command::Inequality { data, .. } => {
            let allocations = data
                .iter()
                .map(|p| s.load(p)?.to_allocation())
                .collect::<Result<Vec<_>, CliError>>()?;
            let ws = build_scheme(&mut s, common)?;
            let names = path_list(data);
            let evaluations = allocations
                .iter()
                .zip(&names)
                .map(|(a, name)| Ok(json!({ "input": name, "gini": num(gini_evaluate(a, &ws)?) })))
                .collect::<Result<Vec<_>, CliError>>()?;
            let ranking: Vec<Value> = rank_allocations(&allocations, &ws)?
                .iter()
                .map(|r| json!({ "input": names[r.index], "gini": num(r.value), "tied_with_previous": r.tied_with_previous }))
                .collect();
            s.report
                .values
                .insert("evaluations".into(), Value::Array(evaluations));
            s.report
                .values
                .insert("ranking".into(), Value::Array(ranking));
            s.report.tolerances.insert("tie".into(), num(TIE_TOL));
        }
    }
    Ok(Outcome {
        report: s.report.to_json(),
        exit_code,
    })
}

fn concave_certificate(cert: &ConcaveOrderCertificate) -> Map<String, Value> {
    let mut c = Map::new();
    match cert {
        ConcaveOrderCertificate::Matrix {
            size,
            entries,
            x_rows,
            y_rows,
            residual,
        } => {
            c.insert("kind".into(), json!("doubly-stochastic"));
            c.insert("size".into(), json!(size));
            c.insert("matrix".into(), rows(entries, *size));
            c.insert("x_rows".into(), rows(x_rows.coords(), x_rows.dim()));
            c.insert("y_rows".into(), rows(y_rows.coords(), y_rows.dim()));
            c.insert("residual".into(), num(*residual));
        }
        ConcaveOrderCertificate::Infeasible { size, residual } => {
            c.insert("kind".into(), json!("infeasible"));
            c.insert("size".into(), json!(size));
            c.insert("residual".into(), num(*residual));
        }
        ConcaveOrderCertificate::Refuted {
            reference,
            rho_x,
            rho_y,
        } => {
            c.insert("kind".into(), json!("refuted"));
            c.insert("reference".into(), measure_json(reference));
            c.insert("rho_x".into(), num(*rho_x));
            c.insert("rho_y".into(), num(*rho_y));
        }
        ConcaveOrderCertificate::NotRefuted {
            clouds,
            worst_margin,
        } => {
            c.insert("kind".into(), json!("not-refuted"));
            c.insert("clouds".into(), json!(clouds));
            c.insert("worst_margin".into(), num(*worst_margin));
        }
    }
    c
}

/// Runs a command, writes its report, and returns the process exit status.
/// Errors go to stderr; nothing here panics on bad input.
pub fn execute(config: &RunConfig) -> i32 {
    let outcome = match run(config) {
        Ok(o) => o,
        Err(e) => {
            eprintln!("error: {e}");
            return e.exit_code();
        }
    };
    match &config.command.common().out {
        Some(path) => {
            if let Err(e) = std::fs::write(path, &outcome.report) {
                eprintln!("error: cannot write {}: {e}", path.display());
                return EXIT_INPUT_ERROR;
            }
        }
        None => print!("{}", outcome.report),
    }
    outcome.exit_code
}
