//! Concurrence, the current/coherence witness and steady-state sweeps.

use rayon::prelude::*;

use crate::error::{EngineError, Result};
use crate::liouville::steady_state;
use crate::model::{reduced_liouvillian, Bath, EngineParams, XState};
use crate::observables::{current, NoiseKernel};

/// Coherences at or below this are treated as zero in ratios.
pub const COHERENCE_FLOOR: f64 = 1e-14;

/// Bisection stops once the temperature bracket is narrower than this.
const BISECTION_TOL: f64 = 1e-8;

/// Concurrence of an X-state, `max{0, 2(|c| − √(r1 r4))}`.
pub fn concurrence(s: &XState) -> f64 {
    concurrence_margin(s).max(0.0)
}

/// `2(|c| − √(r1 r4))` before clamping.
pub fn concurrence_margin(s: &XState) -> f64 {
    2.0 * (s.c.norm() - (s.r1.max(0.0) * s.r4.max(0.0)).sqrt())
}

/// `I_L(t) / (2g|c(t)|)` at a kernel grid index.
pub fn current_coherence_ratio_at(kernel: &NoiseKernel, k: usize) -> Result<f64> {
    let c = kernel.xstate(k).c.norm();
    if c <= COHERENCE_FLOOR {
        return Err(EngineError::ZeroCoherence(c));
    }
    Ok(kernel.current(Bath::Left, k) / (2.0 * kernel.params().g * c))
}

pub fn current_coherence_ratio(kernel: &NoiseKernel, t: f64) -> Result<f64> {
    current_coherence_ratio_at(kernel, kernel.grid().index_of(t)?)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SweepPoint {
    pub t_l: f64,
    pub steady_current: f64,
    pub steady_concurrence: f64,
    pub steady_coherence: f64,
    pub state: XState,
}

impl SweepPoint {
    pub fn at(p: &EngineParams) -> Result<Self> {
        let state = steady_state(&reduced_liouvillian(p))?.to_xstate_unchecked();
        Ok(Self {
            t_l: p.t_l,
            steady_current: current(Bath::Left, &state, p),
            steady_concurrence: concurrence(&state),
            steady_coherence: state.c.re,
            state,
        })
    }
}

/// Steady states along a grid of left temperatures, evaluated in parallel.
pub fn steady_sweep(p_base: &EngineParams, t_l_grid: &[f64]) -> Result<Vec<SweepPoint>> {
    if t_l_grid.is_empty() {
        return Err(EngineError::InvalidParams {
            field: "t_l_grid",
            reason: "empty".into(),
        });
    }
    if t_l_grid.windows(2).any(|w| !(w[0] < w[1])) {
        return Err(EngineError::InvalidParams {
            field: "t_l_grid",
            reason: "must be strictly ascending".into(),
        });
    }
    t_l_grid
        .par_iter()
        .map(|&t_l| {
            let p = p_base.with_t_l(t_l);
            p.validate()?;
            SweepPoint::at(&p)
        })
        .collect()
}

/// Onset of steady-state entanglement along `T_L`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CriticalPoint {
    pub t_l: f64,
    pub current: f64,
}

/// Bisects `T_L` in `bracket` for the zero of the concurrence margin. The
/// margin must be non-positive at the low end and positive at the high end.
pub fn critical_current(p_base: &EngineParams, bracket: (f64, f64)) -> Result<CriticalPoint> {
    let (mut lo, mut hi) = bracket;
    let margin = |t_l: f64| -> Result<f64> {
        let p = p_base.with_t_l(t_l);
        p.validate()?;
        Ok(concurrence_margin(&SweepPoint::at(&p)?.state))
    };
    if !(lo < hi) || margin(lo)? > 0.0 || margin(hi)? <= 0.0 {
        return Err(EngineError::NoSignChange { lo, hi });
    }
    while hi - lo >= BISECTION_TOL {
        let mid = 0.5 * (lo + hi);
        if margin(mid)? > 0.0 {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    let t_l = 0.5 * (lo + hi);
    let point = SweepPoint::at(&p_base.with_t_l(t_l))?;
    Ok(CriticalPoint {
        t_l,
        current: point.steady_current,
    })
}
