//! Finite-time kinetic uncertainty ratios `S·A/I²` and their violation windows.

use serde::{Deserialize, Serialize};

use crate::error::{EngineError, Result};
use crate::model::Bath;
use crate::observables::NoiseKernel;

/// Currents with magnitude at or below this give no ratio.
pub const CURRENT_FLOOR: f64 = 1e-14;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ActivityMode {
    /// Only jumps to and from the baths are counted.
    BathsOnly,
    /// Adds the internal activity `(4g²/Γ)(r2 + r3)`.
    WithInternal,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum KurKind {
    Left,
    Asym,
}

fn activity(kernel: &NoiseKernel, k: usize, mode: ActivityMode) -> f64 {
    let baths = kernel.total_activity(k);
    match mode {
        ActivityMode::BathsOnly => baths,
        ActivityMode::WithInternal => baths + kernel.internal_activity(k),
    }
}

fn left_at(kernel: &NoiseKernel, k: usize, mode: ActivityMode) -> Result<f64> {
    let i = kernel.current(Bath::Left, k);
    if i.abs() <= CURRENT_FLOOR {
        return Err(EngineError::ZeroCurrent(i));
    }
    Ok(kernel.noise_at(Bath::Left, Bath::Left, k) * activity(kernel, k, mode) / (i * i))
}

fn asym_at(kernel: &NoiseKernel, k: usize, mode: ActivityMode) -> Result<f64> {
    let i = kernel.current(Bath::Left, k) - kernel.current(Bath::Right, k);
    if i.abs() <= CURRENT_FLOOR {
        return Err(EngineError::ZeroCurrent(i));
    }
    let s = kernel.noise_at(Bath::Left, Bath::Left, k) + kernel.noise_at(Bath::Right, Bath::Right, k)
        - kernel.noise_at(Bath::Left, Bath::Right, k)
        - kernel.noise_at(Bath::Right, Bath::Left, k);
    Ok(s * activity(kernel, k, mode) / (i * i))
}

/// `R_L(t) = S_LL(t) A(t) / I_L(t)²`.
pub fn kur_left(kernel: &NoiseKernel, t: f64, mode: ActivityMode) -> Result<f64> {
    left_at(kernel, kernel.grid().index_of(t)?, mode)
}

/// `R_asym(t) = (S_LL + S_RR − S_LR − S_RL) A(t) / (I_L − I_R)²`.
pub fn kur_asym(kernel: &NoiseKernel, t: f64, mode: ActivityMode) -> Result<f64> {
    asym_at(kernel, kernel.grid().index_of(t)?, mode)
}

/// Both ratios over the whole kernel grid. Points without a usable current
/// are `None`.
#[derive(Debug, Clone, PartialEq)]
pub struct KurSeries {
    /// Grid times in units of 1/Γ.
    pub t_gamma: Vec<f64>,
    pub r_left: Vec<Option<f64>>,
    pub r_asym: Vec<Option<f64>>,
    pub activity_mode: ActivityMode,
}

impl KurSeries {
    pub fn compute(kernel: &NoiseKernel, mode: ActivityMode) -> Self {
        let grid = kernel.grid();
        let total = kernel.params().total_rate();
        let (l, r) = (Bath::Left, Bath::Right);
        let (ll, rr) = (kernel.noise_series(l, l), kernel.noise_series(r, r));
        let (lr, rl) = (kernel.noise_series(l, r), kernel.noise_series(r, l));
        let ratio = |s: f64, a: f64, i: f64| (i.abs() > CURRENT_FLOOR).then(|| s * a / (i * i));
        let mut r_left = Vec::with_capacity(grid.len());
        let mut r_asym = Vec::with_capacity(grid.len());
        for k in 0..grid.len() {
            let a = activity(kernel, k, mode);
            let (il, ir) = (kernel.current(l, k), kernel.current(r, k));
            r_left.push(ratio(ll[k], a, il));
            r_asym.push(ratio(ll[k] + rr[k] - lr[k] - rl[k], a, il - ir));
        }
        Self {
            t_gamma: grid.times().map(|t| t * total).collect(),
            r_left,
            r_asym,
            activity_mode: mode,
        }
    }

    pub fn ratios(&self, which: KurKind) -> &[Option<f64>] {
        match which {
            KurKind::Left => &self.r_left,
            KurKind::Asym => &self.r_asym,
        }
    }
}

/// Maximal runs of grid points where the ratio is below one, as
/// `(first, last)` times in units of 1/Γ. Missing points end a run.
pub fn violation_windows(series: &KurSeries, which: KurKind) -> Vec<(f64, f64)> {
    let mut windows = Vec::new();
    let mut start: Option<usize> = None;
    let ratios = series.ratios(which);
    for (k, r) in ratios.iter().enumerate() {
        let violated = matches!(r, Some(v) if *v < 1.0);
        match (violated, start) {
            (true, None) => start = Some(k),
            (false, Some(s)) => {
                windows.push((series.t_gamma[s], series.t_gamma[k - 1]));
                start = None;
            }
            _ => {}
        }
    }
    if let Some(s) = start {
        windows.push((series.t_gamma[s], series.t_gamma[ratios.len() - 1]));
    }
    windows
}
