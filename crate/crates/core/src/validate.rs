//! Self-checks run along actual trajectories: trace, positivity, activity
//! bound, conservation order, quadrature convergence and the initial KUR bound.

use serde::Serialize;

use crate::error::Result;
use crate::kur::{kur_asym, kur_left, ActivityMode, CURRENT_FLOOR};
use crate::liouville::BasisTag;
use crate::model::{initial_state, Bath, EngineParams, InitialKind};
use crate::observables::{conservation_residual, NoiseKernel, TimeGrid};

/// Steps (units 1/Γ) of the conservation-order fit.
pub const CONSERVATION_STEPS: [f64; 3] = [1e-2, 5e-3, 2.5e-3];

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct InvariantCheck {
    pub name: &'static str,
    pub passed: bool,
    pub detail: String,
}

impl InvariantCheck {
    fn new(name: &'static str, passed: bool, detail: String) -> Self {
        Self { name, passed, detail }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SuiteSettings {
    /// Quadrature step in units of 1/Γ.
    pub step_gamma: f64,
    /// Trajectory length in units of 1/Γ.
    pub t_max_gamma: f64,
}

impl Default for SuiteSettings {
    fn default() -> Self {
        Self {
            step_gamma: 0.01,
            t_max_gamma: 20.0,
        }
    }
}

fn kernel(p: &EngineParams, kind: InitialKind, step_gamma: f64, t_max_gamma: f64) -> Result<NoiseKernel> {
    let grid = TimeGrid::in_inverse_gamma(p, step_gamma, t_max_gamma)?;
    NoiseKernel::new(p, &initial_state(kind, p), BasisTag::ReducedX, grid)
}

/// Least-squares slope of `log y` against `log x`.
pub fn log_log_slope(x: &[f64], y: &[f64]) -> f64 {
    let lx: Vec<f64> = x.iter().map(|v| v.ln()).collect();
    let ly: Vec<f64> = y.iter().map(|v| v.ln()).collect();
    let n = lx.len() as f64;
    let (mx, my) = (lx.iter().sum::<f64>() / n, ly.iter().sum::<f64>() / n);
    let cov: f64 = lx.iter().zip(&ly).map(|(a, b)| (a - mx) * (b - my)).sum();
    let var: f64 = lx.iter().map(|a| (a - mx).powi(2)).sum();
    cov / var
}

/// Fitted convergence orders of the two conservation residuals at `Γt = 1`
/// for the ground-state trajectory.
pub fn conservation_orders(p: &EngineParams) -> Result<(f64, f64)> {
    let mut left = Vec::new();
    let mut right = Vec::new();
    for h in CONSERVATION_STEPS {
        let k = kernel(p, InitialKind::Ground, h, 2.0)?;
        let (rl, rr) = conservation_residual(&k, 1.0 / p.total_rate())?;
        left.push(rl.abs());
        right.push(rr.abs());
    }
    Ok((log_log_slope(&CONSERVATION_STEPS, &left), log_log_slope(&CONSERVATION_STEPS, &right)))
}

/// Largest relative change of `S_LL`, `S_LR` at the end of the grid when the
/// quadrature step is halved.
pub fn quadrature_change(p: &EngineParams, kind: InitialKind, settings: SuiteSettings) -> Result<f64> {
    let coarse = kernel(p, kind, settings.step_gamma, settings.t_max_gamma)?;
    let fine = kernel(p, kind, 0.5 * settings.step_gamma, settings.t_max_gamma)?;
    let (nc, nf) = (coarse.grid().steps, fine.grid().steps);
    let mut worst: f64 = 0.0;
    for (j, jp) in [(Bath::Left, Bath::Left), (Bath::Left, Bath::Right)] {
        let a = coarse.noise_at(j, jp, nc);
        let b = fine.noise_at(j, jp, nf);
        worst = worst.max((a - b).abs() / b.abs());
    }
    Ok(worst)
}

/// Runs every check over every parameter set and initial state.
pub fn run_suite(sets: &[EngineParams], settings: SuiteSettings) -> Result<Vec<InvariantCheck>> {
    let mut trace_err: f64 = 0.0;
    let mut positivity_failures = Vec::new();
    let mut bound_slack = f64::INFINITY;
    let mut kur_min = f64::INFINITY;
    let mut slopes = Vec::new();
    let mut quad_worst: f64 = 0.0;

    for p in sets {
        for kind in InitialKind::ALL {
            let k = kernel(p, kind, settings.step_gamma, settings.t_max_gamma)?;
            for n in 0..k.grid().len() {
                trace_err = trace_err.max((k.state(n).trace() - 1.0).norm());
                if let Err(e) = k.xstate(n).validate() {
                    positivity_failures.push(format!("T_L={} mu_L={} {} t_k={n}: {e}", p.t_l, p.mu_l, kind.label()));
                }
                for b in Bath::BOTH {
                    bound_slack = bound_slack.min(k.activity(b, n) - k.current(b, n).abs());
                }
            }
            if k.current(Bath::Left, 0).abs() > CURRENT_FLOOR {
                for mode in [ActivityMode::BathsOnly, ActivityMode::WithInternal] {
                    kur_min = kur_min.min(kur_left(&k, 0.0, mode)?).min(kur_asym(&k, 0.0, mode)?);
                }
            }
        }
        let (sl, sr) = conservation_orders(p)?;
        slopes.push(sl);
        slopes.push(sr);
        quad_worst = quad_worst.max(quadrature_change(p, InitialKind::Ground, settings)?);
    }

    let slope_ok = slopes.iter().all(|s| (s - 2.0).abs() <= 0.1);
    Ok(vec![
        InvariantCheck::new("trace_preservation", trace_err < 1e-10, format!("max |Tr ρ - 1| = {trace_err:.3e}")),
        InvariantCheck::new(
            "positivity",
            positivity_failures.is_empty(),
            match positivity_failures.first() {
                None => "all states physical".into(),
                Some(first) => format!("{} failures, first: {first}", positivity_failures.len()),
            },
        ),
        InvariantCheck::new(
            "activity_bound",
            bound_slack >= -1e-15,
            format!("min (A_j - |I_j|) = {bound_slack:.3e}"),
        ),
        InvariantCheck::new(
            "conservation_order",
            slope_ok,
            format!("fitted slopes {:?}", slopes.iter().map(|s| format!("{s:.4}")).collect::<Vec<_>>()),
        ),
        InvariantCheck::new(
            "quadrature_convergence",
            quad_worst < 1e-6,
            format!("max relative change on halving the step = {quad_worst:.3e}"),
        ),
        InvariantCheck::new("initial_kur_bound", kur_min >= 1.0, format!("min ratio at t=0 = {kur_min:.6}")),
    ])
}

/// The parameter sets the suite is run on by default: the three left
/// temperatures of the unbiased reference configuration.
pub fn default_sets() -> Vec<EngineParams> {
    [0.15, 0.6, 2.0].map(EngineParams::fig2).to_vec()
}
