//! The `verify` cross-check battery and its report.

use std::collections::BTreeMap;

use num_complex::Complex64;
use serde::Serialize;

use qwalk::coin::{unitarity_deviation, validate_coin_constraints};
use qwalk::oracle::path_sum_all;
use qwalk::scattering::{transmission_series_converged, Direction, ScatteringSystem, FLUX_TOLERANCE};
use qwalk::spectral::{
    bound_state_orthogonality, check_time_reversal, find_bound_states, internal_block_eigenvalues,
    BOUND_RESIDUAL_TOLERANCE, TIME_REVERSAL_TOLERANCE, UNIT_MODULUS_TOLERANCE,
};
use qwalk::{
    build_step_operator, run_measured_walk, run_walk, CoinSpec, CoinViolation, EdgeState, Graph, Result, TailConfig,
    VertexId,
};

use crate::output::sci;

pub const COIN_TOLERANCE: f64 = 1e-12;
pub const UNITARITY_TOLERANCE: f64 = 1e-12;
pub const NORM_TOLERANCE: f64 = 1e-12;
pub const BOOKKEEPING_TOLERANCE: f64 = 1e-10;
pub const SERIES_Q_TOLERANCE: f64 = 1e-8;
pub const P_OUT_TOLERANCE: f64 = 1e-6;
pub const SCATTERING_RESIDUAL_TOLERANCE: f64 = 1e-10;
pub const LEFT_RIGHT_TOLERANCE: f64 = 1e-10;
pub const ORACLE_TOLERANCE: f64 = 1e-10;
pub const ORTHOGONALITY_TOLERANCE: f64 = 1e-10;

/// Aliasing target for series that feed comparisons.
pub const SERIES_ALIASING_TOLERANCE: f64 = 1e-12;
/// A series counts as converged when its upper-half `|c_n|^2` are below this.
pub const SERIES_TAIL_TOLERANCE: f64 = 1e-12;
pub const DEFAULT_SPECTRAL_SAMPLES: usize = 4096;
pub const DEFAULT_P_OUT_N_MAX: usize = 1000;
pub const MAX_P_OUT_N_MAX: usize = 16000;
pub const DEFAULT_N_MAX: usize = 40;
pub const DEFAULT_SWEEP_SAMPLES: usize = 64;
const WALK_STEPS: usize = 50;
const ORACLE_MAX_STEPS: usize = 6;
const ORACLE_PATH_BUDGET: f64 = 2e6;
/// First-arrival probabilities below this are left out of the report.
const REPORT_Q_CUTOFF: f64 = 1e-15;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Status {
    Pass,
    Fail,
    /// Recorded for information; does not affect the exit code.
    Info,
}

#[derive(Debug, Clone, Serialize)]
pub struct Check {
    pub name: &'static str,
    pub status: Status,
    /// `null` when the computation itself failed.
    pub residual: f64,
    pub tolerance: f64,
    pub detail: String,
}

impl Check {
    fn bounded(name: &'static str, residual: f64, tolerance: f64, detail: String) -> Check {
        let status = if residual.abs() <= tolerance {
            Status::Pass
        } else {
            Status::Fail
        };
        Check {
            name,
            status,
            residual,
            tolerance,
            detail,
        }
    }

    fn attempt(name: &'static str, tolerance: f64, f: impl FnOnce() -> Outcome) -> Check {
        match f() {
            Ok((residual, detail)) => Check::bounded(name, residual, tolerance, detail),
            Err(e) => Check {
                name,
                status: Status::Fail,
                residual: f64::NAN,
                tolerance,
                detail: e,
            },
        }
    }
}

type Outcome = std::result::Result<(f64, String), String>;

fn msg(e: qwalk::Error) -> String {
    e.to_string()
}

#[derive(Debug, Clone, Serialize)]
pub struct Arrival {
    pub n: usize,
    pub q: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct Quantities {
    pub p_out_spectral: f64,
    pub p_out_series: f64,
    pub first_arrival: Vec<Arrival>,
    pub bound_states: usize,
    pub time_reversal_residual: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct RunReport {
    pub command: Vec<String>,
    pub graph_sha256: String,
    pub passed: bool,
    pub checks: Vec<Check>,
    pub quantities: Option<Quantities>,
    pub output_table: Option<String>,
}

impl RunReport {
    pub fn new(command: Vec<String>, graph_sha256: String, checks: Vec<Check>, quantities: Option<Quantities>) -> Self {
        let passed = checks.iter().all(|c| c.status != Status::Fail);
        RunReport {
            command,
            graph_sha256,
            passed,
            checks,
            quantities,
            output_table: None,
        }
    }

    /// `name,status,residual,tolerance` per check.
    pub fn residual_table(&self) -> String {
        let mut out = String::from("name,status,residual,tolerance\n");
        for c in &self.checks {
            let status = match c.status {
                Status::Pass => "pass",
                Status::Fail => "fail",
                Status::Info => "info",
            };
            out.push_str(&format!(
                "{},{},{},{}\n",
                c.name,
                status,
                sci(c.residual),
                sci(c.tolerance)
            ));
        }
        out
    }
}

#[derive(Debug, Clone, Copy)]
pub struct VerifyOptions {
    pub sweep_samples: usize,
    pub n_max: usize,
}

impl Default for VerifyOptions {
    fn default() -> Self {
        VerifyOptions {
            sweep_samples: DEFAULT_SWEEP_SAMPLES,
            n_max: DEFAULT_N_MAX,
        }
    }
}

/// The single check reported when a coin is rejected while building the graph.
pub fn coin_failure(vertex: VertexId, violation: &CoinViolation) -> Check {
    let residual = match violation {
        CoinViolation::Constraints { residual1, .. } => *residual1,
        CoinViolation::NotUnitary { deviation } => *deviation,
        _ => f64::NAN,
    };
    Check {
        name: "coin_constraints",
        status: Status::Fail,
        residual,
        tolerance: COIN_TOLERANCE,
        detail: format!("vertex {vertex}: {violation}"),
    }
}

/// Tails long enough to run `steps` steps from `initial`.
pub fn tails_for(initial: &EdgeState, steps: usize) -> TailConfig {
    TailConfig::new(steps + initial.tail_depth() + 1).expect("positive truncation")
}

#[derive(Debug, Clone, Serialize)]
pub struct PoutEstimate {
    pub p_out_spectral: f64,
    pub p_out_series: f64,
    pub discrepancy: f64,
    /// Largest `|c_n|^2` over the upper half of the series.
    pub tail_bound: f64,
    pub aliasing_estimate: f64,
    pub converged: bool,
    pub spectral_samples: usize,
    pub series_samples: usize,
    pub n_max: usize,
}

/// Both P_out routes. With `adaptive`, `n_max` doubles up to [`MAX_P_OUT_N_MAX`]
/// until the series converges.
pub fn p_out_estimate(
    system: &ScatteringSystem,
    spectral_samples: usize,
    n_max: usize,
    adaptive: bool,
) -> Result<PoutEstimate> {
    let spectral = qwalk::scattering::p_out_spectral(system, spectral_samples)?;
    let mut n_max = n_max;
    loop {
        let series = transmission_series_converged(system, n_max, 1.0, SERIES_ALIASING_TOLERANCE)?;
        let q = series.q();
        let total: f64 = q.iter().sum();
        let tail_bound = q[n_max / 2..].iter().fold(0.0f64, |m, x| m.max(*x));
        let converged = tail_bound <= SERIES_TAIL_TOLERANCE && series.aliasing_estimate <= SERIES_ALIASING_TOLERANCE;
        if converged || !adaptive || n_max >= MAX_P_OUT_N_MAX {
            return Ok(PoutEstimate {
                p_out_spectral: spectral,
                p_out_series: total,
                discrepancy: (spectral - total).abs(),
                tail_bound,
                aliasing_estimate: series.aliasing_estimate,
                converged,
                spectral_samples,
                series_samples: series.sample_count,
                n_max,
            });
        }
        n_max = (2 * n_max).min(MAX_P_OUT_N_MAX);
    }
}

fn coin_check(graph: &Graph) -> Check {
    let mut worst = 0.0f64;
    let mut at = None;
    for v in graph.vertices() {
        let (Some(coin), Some(spec)) = (graph.coin(v), graph.coin_spec(v)) else {
            continue;
        };
        let n = coin.nrows();
        let mut r = unitarity_deviation(coin);
        let params = match spec {
            CoinSpec::EqualTransmission { r, t } => Some((*r, *t)),
            CoinSpec::Grover => Some((
                Complex64::new(2.0 / n as f64 - 1.0, 0.0),
                Complex64::new(2.0 / n as f64, 0.0),
            )),
            CoinSpec::Free => Some((Complex64::new(0.0, 0.0), Complex64::new(1.0, 0.0))),
            CoinSpec::CustomMatrix(_) => None,
        };
        if let Some((rr, tt)) = params {
            let (a, b) = validate_coin_constraints(rr, tt, n);
            r = r.max(a.abs()).max(b.abs());
        }
        if r > worst || at.is_none() {
            worst = worst.max(r);
            at = Some(v);
        }
    }
    let detail = match at {
        Some(v) => format!("largest constraint or unitarity residual at vertex {v}"),
        None => "no coins".into(),
    };
    Check::bounded("coin_constraints", worst, COIN_TOLERANCE, detail)
}

fn oracle_steps(graph: &Graph) -> usize {
    let branching = graph.vertices().map(|v| graph.degree(v)).max().unwrap_or(1).max(1) as f64;
    (0..=ORACLE_MAX_STEPS)
        .rev()
        .find(|&n| branching.powi(n as i32) <= ORACLE_PATH_BUDGET)
        .unwrap_or(0)
}

fn oracle_check(graph: &Graph) -> Outcome {
    let initial = graph.entry_incoming();
    let steps = oracle_steps(graph);
    let mut worst = 0.0f64;
    for n in 0..=steps {
        let op = build_step_operator(graph, tails_for(&initial, n));
        let state = run_walk(&op, &initial, n).map_err(msg)?;
        let paths: BTreeMap<EdgeState, Complex64> = path_sum_all(graph, &initial, n)
            .map_err(msg)?
            .into_iter()
            .map(|p| (p.target, p.amplitude))
            .collect();
        for target in paths.keys() {
            if op.basis().index_of(target).is_none() {
                worst = f64::INFINITY;
            }
        }
        for (i, s) in op.basis().states().iter().enumerate() {
            let expected = paths.get(s).copied().unwrap_or_default();
            worst = worst.max((state.amplitudes[i] - expected).norm());
        }
    }
    Ok((worst, format!("all amplitudes from the entry tail, n <= {steps}")))
}

/// Runs every cross-check. Failed computations become failed checks rather than errors.
pub fn run_checks(graph: &Graph, opts: VerifyOptions) -> (Vec<Check>, Quantities) {
    let mut checks = vec![coin_check(graph)];
    let initial = graph.entry_incoming();
    let exit = graph.exit_outgoing();
    let n_max = opts.n_max;
    let steps = WALK_STEPS.max(n_max);
    let op = build_step_operator(graph, tails_for(&initial, steps));

    checks.push(Check::bounded(
        "step_unitarity",
        op.unitarity_deviation(),
        UNITARITY_TOLERANCE,
        format!("max |U^H U - I| on {} edge states", op.dim()),
    ));

    checks.push(Check::attempt("norm_conservation", NORM_TOLERANCE, || {
        let mut worst = 0.0f64;
        for n in 0..=steps {
            worst = worst.max((run_walk(&op, &initial, n).map_err(msg)?.norm_sqr() - 1.0).abs());
        }
        Ok((worst, format!("unmonitored walk, {steps} steps")))
    }));

    let measured = run_measured_walk(&op, &initial, &exit, steps).map_err(msg);
    checks.push(Check::attempt("measured_bookkeeping", BOOKKEEPING_TOLERANCE, || {
        let record = measured.clone()?;
        let worst = record
            .cumulative()
            .iter()
            .zip(&record.remaining)
            .fold(0.0f64, |m, (c, r)| m.max((c + r - 1.0).abs()));
        Ok((worst, "detected plus remaining probability".into()))
    }));

    let system = ScatteringSystem::new(graph);
    checks.push(Check::attempt("first_arrival_vs_series", SERIES_Q_TOLERANCE, || {
        let record = measured.clone()?;
        let series = transmission_series_converged(&system, n_max, 1.0, SERIES_ALIASING_TOLERANCE).map_err(msg)?;
        let worst = series
            .q()
            .iter()
            .zip(&record.q)
            .fold(0.0f64, |m, (a, b)| m.max((a - b).abs()));
        Ok((
            worst,
            format!(
                "|c_n|^2 vs measured walk, n <= {n_max}, {} samples",
                series.sample_count
            ),
        ))
    }));

    let pout = p_out_estimate(&system, DEFAULT_SPECTRAL_SAMPLES, DEFAULT_P_OUT_N_MAX, true);
    checks.push(match &pout {
        Ok(p) if !p.converged => Check {
            name: "p_out_routes",
            status: Status::Info,
            residual: p.discrepancy,
            tolerance: P_OUT_TOLERANCE,
            detail: format!(
                "series not converged at n_max {} (tail {:e}, aliasing {:e})",
                p.n_max, p.tail_bound, p.aliasing_estimate
            ),
        },
        Ok(p) => Check::bounded(
            "p_out_routes",
            p.discrepancy,
            P_OUT_TOLERANCE,
            format!("spectral {} vs series {}", p.p_out_spectral, p.p_out_series),
        ),
        Err(e) => Check {
            name: "p_out_routes",
            status: Status::Fail,
            residual: f64::NAN,
            tolerance: P_OUT_TOLERANCE,
            detail: e.to_string(),
        },
    });

    let left = system.sweep(opts.sweep_samples, 1.0, Direction::Left).map_err(msg);
    let right = system.sweep(opts.sweep_samples, 1.0, Direction::Right).map_err(msg);
    let sweep_detail = format!("{} phases on the unit circle", opts.sweep_samples);
    checks.push(Check::attempt("flux_conservation", FLUX_TOLERANCE, || {
        let worst = left
            .clone()?
            .iter()
            .chain(right.clone()?.iter())
            .fold(0.0f64, |m, s| m.max(s.flux_defect().abs()));
        Ok((worst, sweep_detail.clone()))
    }));
    checks.push(Check::attempt(
        "scattering_residual",
        SCATTERING_RESIDUAL_TOLERANCE,
        || {
            let worst = left
                .clone()?
                .iter()
                .chain(right.clone()?.iter())
                .fold(0.0f64, |m, s| m.max(s.residual));
            Ok((worst, sweep_detail.clone()))
        },
    ));

    let bound = find_bound_states(graph);
    checks.push(Check::bounded(
        "bound_state_residuals",
        bound.iter().fold(0.0f64, |m, b| m.max(b.residual).max(b.leakage)),
        BOUND_RESIDUAL_TOLERANCE,
        format!("{} bound states", bound.len()),
    ));
    checks.push(match internal_block_eigenvalues(graph) {
        Some(values) => {
            let unit = values
                .iter()
                .filter(|z| (z.norm() - 1.0).abs() <= UNIT_MODULUS_TOLERANCE)
                .count();
            Check::bounded(
                "bound_state_count",
                (unit as f64 - bound.len() as f64).abs(),
                0.0,
                format!("{unit} unit-modulus Schur eigenvalues"),
            )
        }
        None => Check {
            name: "bound_state_count",
            status: Status::Info,
            residual: f64::NAN,
            tolerance: 0.0,
            detail: "Schur iteration did not converge; count not cross-checked".into(),
        },
    });
    checks.push(Check::attempt(
        "bound_state_orthogonality",
        ORTHOGONALITY_TOLERANCE,
        || {
            Ok((
                bound_state_orthogonality(graph, WALK_STEPS).map_err(msg)?,
                format!("tail-started walk, {WALK_STEPS} steps"),
            ))
        },
    ));

    let tr = check_time_reversal(graph);
    checks.push(Check {
        name: "time_reversal",
        status: if tr.holds { Status::Pass } else { Status::Info },
        residual: tr.max_residual,
        tolerance: TIME_REVERSAL_TOLERANCE,
        detail: if tr.holds {
            "symmetric".into()
        } else {
            "graph is not time-reversal invariant".into()
        },
    });
    let mut lr = Check::attempt("left_right_transmission", LEFT_RIGHT_TOLERANCE, || {
        let worst = left
            .clone()?
            .iter()
            .zip(right.clone()?.iter())
            .fold(0.0f64, |m, (l, r)| m.max((l.t - r.t).norm()));
        Ok((worst, sweep_detail.clone()))
    });
    if !tr.holds && lr.status == Status::Fail && lr.residual.is_finite() {
        lr.status = Status::Info;
        lr.detail = format!("{}; not required without time reversal", lr.detail);
    }
    checks.push(lr);

    checks.push(Check::attempt("oracle_vs_engine", ORACLE_TOLERANCE, || {
        oracle_check(graph)
    }));

    let first_arrival = measured
        .map(|r| {
            r.q.iter()
                .enumerate()
                .take(n_max + 1)
                .filter(|(_, q)| **q > REPORT_Q_CUTOFF)
                .map(|(n, q)| Arrival { n, q: *q })
                .collect()
        })
        .unwrap_or_default();
    let (p_out_spectral, p_out_series) = pout.map_or((f64::NAN, f64::NAN), |p| (p.p_out_spectral, p.p_out_series));
    let quantities = Quantities {
        p_out_spectral,
        p_out_series,
        first_arrival,
        bound_states: bound.len(),
        time_reversal_residual: tr.max_residual,
    };
    (checks, quantities)
}

#[cfg(test)]
mod tests {
    use super::*;
    use qwalk::fixtures;

    #[test]
    fn diamond_passes_everything() {
        let (checks, q) = run_checks(&fixtures::diamond(), VerifyOptions::default());
        for c in &checks {
            assert_eq!(c.status, Status::Pass, "{c:?}");
        }
        assert!((q.first_arrival[0].q - 64.0 / 81.0).abs() < 1e-12);
        assert_eq!(q.first_arrival[0].n, 3);
        assert!((q.p_out_spectral - 0.8).abs() < 1e-10);
        assert_eq!(q.bound_states, 4);
    }

    #[test]
    fn twisted_line_reports_information_only() {
        let (checks, _) = run_checks(&fixtures::twisted_line(), VerifyOptions::default());
        let tr = checks.iter().find(|c| c.name == "time_reversal").unwrap();
        assert_eq!(tr.status, Status::Info);
        assert!(checks.iter().all(|c| c.status != Status::Fail), "{checks:?}");
    }

    #[test]
    fn coin_failure_reports_signed_residual() {
        let c = coin_failure(
            0,
            &CoinViolation::Constraints {
                residual1: -0.25,
                residual2: 0.75,
            },
        );
        assert_eq!(c.residual, -0.25);
        assert_eq!(c.status, Status::Fail);
    }

    #[test]
    fn oracle_budget_limits_depth() {
        assert_eq!(oracle_steps(&fixtures::diamond()), ORACLE_MAX_STEPS);
    }
}
