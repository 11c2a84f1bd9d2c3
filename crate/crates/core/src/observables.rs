//! Currents, activities, two-time correlations and zero-frequency noise.
//!
//! Sign conventions: `I_j > 0` means particles entering the system from bath
//! `j`; the internal current `I_S = −2g Re c` is positive from left to right,
//! so that `ṅ_L = I_L − I_S` and `ṅ_R = I_R + I_S`.

use crate::error::{EngineError, Result};
use crate::liouville::{
    iterate_propagator, steady_state, trace_row, traceless_pseudoinverse, vectorize, BasisTag, CMatrix, CVector,
    LiouvilleOperator, VectorizedState,
};
use crate::model::{full_liouvillian, jump_superoperators, rates, reduced_liouvillian, Bath, EngineParams, XState};

/// Times below this (in units of 1/Γ) are flagged: the Markovian description
/// is only meaningful after a few bath correlation times.
pub const EARLY_TIME_GAMMA: f64 = 0.1;

/// Relative slack when matching a time to a grid point.
const GRID_SLACK: f64 = 1e-9;

pub fn current(bath: Bath, s: &XState, p: &EngineParams) -> f64 {
    let r = rates(p);
    match bath {
        Bath::Left => r.plus(bath) * (s.r1 + s.r2) - r.minus(bath) * (s.r3 + s.r4),
        Bath::Right => r.plus(bath) * (s.r1 + s.r3) - r.minus(bath) * (s.r2 + s.r4),
    }
}

pub fn activity(bath: Bath, s: &XState, p: &EngineParams) -> f64 {
    let r = rates(p);
    match bath {
        Bath::Left => r.plus(bath) * (s.r1 + s.r2) + r.minus(bath) * (s.r3 + s.r4),
        Bath::Right => r.plus(bath) * (s.r1 + s.r3) + r.minus(bath) * (s.r2 + s.r4),
    }
}

pub fn total_activity(s: &XState, p: &EngineParams) -> f64 {
    activity(Bath::Left, s, p) + activity(Bath::Right, s, p)
}

pub fn internal_current(s: &XState, p: &EngineParams) -> f64 {
    -2.0 * p.g * s.c.re
}

pub fn internal_activity(s: &XState, p: &EngineParams) -> f64 {
    4.0 * p.g * p.g / p.total_rate() * (s.r2 + s.r3)
}

/// True when `t` (units 1/ε_S) is too early for the results to be meaningful.
pub fn early_time(p: &EngineParams, t: f64) -> bool {
    p.total_rate() * t < EARLY_TIME_GAMMA
}

/// Uniform grid `t_k = k·step`, `k = 0..=steps`, in units of 1/ε_S.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TimeGrid {
    pub step: f64,
    pub steps: usize,
}

impl TimeGrid {
    pub fn new(step: f64, steps: usize) -> Result<Self> {
        if !(step > 0.0 && step.is_finite()) {
            return Err(EngineError::InvalidParams {
                field: "step",
                reason: format!("must be positive and finite, got {step}"),
            });
        }
        Ok(Self { step, steps })
    }

    /// Grid with step and end given in units of 1/Γ. The end is rounded to
    /// the nearest whole number of steps.
    pub fn in_inverse_gamma(p: &EngineParams, step_gamma: f64, t_max_gamma: f64) -> Result<Self> {
        if !(t_max_gamma >= 0.0) {
            return Err(EngineError::InvalidParams {
                field: "t_max",
                reason: format!("must be non-negative, got {t_max_gamma}"),
            });
        }
        let steps = (t_max_gamma / step_gamma).round() as usize;
        Self::new(step_gamma / p.total_rate(), steps)
    }

    pub fn len(&self) -> usize {
        self.steps + 1
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn time(&self, k: usize) -> f64 {
        k as f64 * self.step
    }

    pub fn end(&self) -> f64 {
        self.time(self.steps)
    }

    pub fn times(&self) -> impl Iterator<Item = f64> + '_ {
        (0..=self.steps).map(|k| self.time(k))
    }

    /// Index of the grid point at `t`, or `OffGrid`.
    pub fn index_of(&self, t: f64) -> Result<usize> {
        let off = || EngineError::OffGrid {
            t,
            step: self.step,
            end: self.end(),
        };
        if !(t >= 0.0) {
            return Err(off());
        }
        let k = (t / self.step).round();
        if (t - k * self.step).abs() > GRID_SLACK * self.step.max(t) || k as usize > self.steps {
            return Err(off());
        }
        Ok(k as usize)
    }
}

/// Equal-time singular part of a correlation function is carried separately.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CorrelationValue {
    pub connected: f64,
    pub has_delta: bool,
    pub delta_weight: f64,
}

/// Trajectory of one initial state on a uniform grid, with the precomputed
/// pieces needed for lag integrals of current correlations.
///
/// States are stored up to twice the grid end, since the noise at `t` looks
/// ahead to `2t`.
#[derive(Debug, Clone)]
pub struct NoiseKernel {
    params: EngineParams,
    basis: BasisTag,
    grid: TimeGrid,
    step_propagator: CMatrix,
    history: Vec<VectorizedState>,
    /// `current_ops[b]` for `b` in `Bath::BOTH` order.
    current_ops: [LiouvilleOperator; 2],
    activity_ops: [LiouvilleOperator; 2],
    /// `lag_rows[b][k] = (tr · I_b · P^k)ᵀ`.
    lag_rows: [Vec<CVector>; 2],
    /// `kicked[b][n] = I_b ρ_n`.
    kicked: [Vec<CVector>; 2],
    currents: [Vec<f64>; 2],
}

fn slot(bath: Bath) -> usize {
    match bath {
        Bath::Left => 0,
        Bath::Right => 1,
    }
}

impl NoiseKernel {
    pub fn new(p: &EngineParams, initial: &XState, basis: BasisTag, grid: TimeGrid) -> Result<Self> {
        p.validate()?;
        initial.validate()?;
        let generator = match basis {
            BasisTag::ReducedX => reduced_liouvillian(p),
            BasisTag::FullCanonical => full_liouvillian(p),
        };
        let step_propagator = generator.propagator().matrix(grid.step);
        let history = iterate_propagator(&step_propagator, &vectorize(initial, basis), 2 * grid.steps);

        let jumps = jump_superoperators(p, basis);
        let current_ops = Bath::BOTH.map(|b| jumps.current(b));
        let activity_ops = Bath::BOTH.map(|b| jumps.activity(b));
        let tr = trace_row(basis);
        let lag_rows = std::array::from_fn(|b| {
            let mut rows = Vec::with_capacity(grid.len());
            let mut row = &tr * &current_ops[b].matrix;
            for _ in 0..=grid.steps {
                let next = &row * &step_propagator;
                rows.push(row.transpose());
                row = next;
            }
            rows
        });
        let kicked: [Vec<CVector>; 2] =
            std::array::from_fn(|b| history.iter().map(|v| &current_ops[b].matrix * &v.data).collect());
        let currents = std::array::from_fn(|b| kicked[b].iter().map(|w| (&tr * w)[0].re).collect());

        Ok(Self {
            params: *p,
            basis,
            grid,
            step_propagator,
            history,
            current_ops,
            activity_ops,
            lag_rows,
            kicked,
            currents,
        })
    }

    pub fn params(&self) -> &EngineParams {
        &self.params
    }

    pub fn basis(&self) -> BasisTag {
        self.basis
    }

    pub fn grid(&self) -> &TimeGrid {
        &self.grid
    }

    pub fn step_propagator(&self) -> &CMatrix {
        &self.step_propagator
    }

    /// Vectorized state at grid index `k` (valid up to `2·steps`).
    pub fn state(&self, k: usize) -> &VectorizedState {
        &self.history[k]
    }

    /// X-form state at grid index `k`, without physicality checks.
    pub fn xstate(&self, k: usize) -> XState {
        self.history[k].to_xstate_unchecked()
    }

    pub fn current(&self, bath: Bath, k: usize) -> f64 {
        self.currents[slot(bath)][k]
    }

    pub fn activity(&self, bath: Bath, k: usize) -> f64 {
        self.history[k].expect(&self.activity_ops[slot(bath)])
    }

    pub fn total_activity(&self, k: usize) -> f64 {
        self.activity(Bath::Left, k) + self.activity(Bath::Right, k)
    }

    pub fn internal_current(&self, k: usize) -> f64 {
        internal_current(&self.xstate(k), &self.params)
    }

    pub fn internal_activity(&self, k: usize) -> f64 {
        internal_activity(&self.xstate(k), &self.params)
    }

    pub fn current_operator(&self, bath: Bath) -> &LiouvilleOperator {
        &self.current_ops[slot(bath)]
    }

    /// `Tr{I_later e^{L·lag} I_earlier ρ_at}` with `lag` in steps.
    fn lagged(&self, later: Bath, lag: usize, earlier: Bath, at: usize) -> f64 {
        self.lag_rows[slot(later)][lag].dot(&self.kicked[slot(earlier)][at]).re
    }

    /// Connected correlation between grid indices `n` and `m`.
    fn connected(&self, j: Bath, jp: Bath, n: usize, m: usize) -> f64 {
        let product = self.current(j, n) * self.current(jp, m);
        if m >= n {
            self.lagged(jp, m - n, j, n) - product
        } else {
            self.lagged(j, n - m, jp, m) - product
        }
    }

    /// Zero-frequency noise at grid index `n`.
    pub fn noise_at(&self, j: Bath, jp: Bath, n: usize) -> f64 {
        let delta = if j == jp { self.activity(j, n) } else { 0.0 };
        if n == 0 {
            return delta;
        }
        let mut sum = 0.5 * (self.connected(j, jp, n, 0) + self.connected(j, jp, n, 2 * n));
        for m in 1..2 * n {
            sum += self.connected(j, jp, n, m);
        }
        delta + self.grid.step * sum
    }

    /// `noise_at` for every grid point, in linear time.
    ///
    /// For `τ ≥ 0` the lag rows are summed once per point as a running sum.
    /// For `τ < 0` the weighted sum `Y_n = Σ_{m<n} w_m P^{n−m} I_{j′} ρ_m`
    /// obeys `Y_{n+1} = P (Y_n + I_{j′} ρ_n)` with `w_0 = 1/2`. The product of
    /// mean currents is handled with a running sum of `I_{j′}`.
    pub fn noise_series(&self, j: Bath, jp: Bath) -> Vec<f64> {
        let h = self.grid.step;
        let lag_j = &self.lag_rows[slot(j)];
        let lag_jp = &self.lag_rows[slot(jp)];
        let kicked_j = &self.kicked[slot(j)];
        let kicked_jp = &self.kicked[slot(jp)];
        let tr_ij = lag_j[0].transpose();
        // prefix[m] = Σ_{i<m} I_{j′}(i)
        let mut prefix = Vec::with_capacity(self.currents[slot(jp)].len() + 1);
        prefix.push(0.0);
        for &i in &self.currents[slot(jp)] {
            prefix.push(prefix.last().unwrap() + i);
        }

        let mut out = Vec::with_capacity(self.grid.len());
        let mut ahead = lag_jp[0].clone();
        let mut behind = (&self.step_propagator * &kicked_jp[0]).map(|x| 0.5 * x);
        for n in 0..=self.grid.steps {
            let delta = if j == jp { self.activity(j, n) } else { 0.0 };
            if n == 0 {
                out.push(delta);
                continue;
            }
            ahead += &lag_jp[n];
            let forward = ahead.dot(&kicked_j[n]).re - 0.5 * lag_jp[n].dot(&kicked_j[n]).re;
            let backward = (&tr_ij * &behind)[0].re;
            let (first, last) = (self.currents[slot(jp)][0], self.currents[slot(jp)][2 * n]);
            let mean = prefix[2 * n + 1] - 0.5 * (first + last);
            out.push(delta + h * (forward + backward - self.current(j, n) * mean));
            behind = &self.step_propagator * (behind + &kicked_jp[n]);
        }
        out
    }
}

pub fn two_time_correlation(j: Bath, jp: Bath, t: f64, t_prime: f64, kernel: &NoiseKernel) -> Result<CorrelationValue> {
    let n = kernel.grid.index_of(t)?;
    let m = kernel.grid.index_of(t_prime)?;
    let has_delta = j == jp && n == m;
    Ok(CorrelationValue {
        connected: kernel.connected(j, jp, n, m),
        has_delta,
        delta_weight: if has_delta { kernel.activity(j, n) } else { 0.0 },
    })
}

/// `∫_{−t}^{t} S_{jj′}(t, t+τ) dτ` by the trapezoid rule on the kernel grid,
/// plus the equal-time activity term for auto-correlations.
pub fn finite_time_zero_freq_noise(j: Bath, jp: Bath, t: f64, kernel: &NoiseKernel) -> Result<f64> {
    let n = kernel.grid.index_of(t)?;
    Ok(kernel.noise_at(j, jp, n))
}

/// Zero-frequency noise in the steady state, from the pseudoinverse of the
/// generator.
pub fn steady_state_noise(j: Bath, jp: Bath, p: &EngineParams) -> Result<f64> {
    steady_state_noise_in(BasisTag::ReducedX, j, jp, p)
}

pub fn steady_state_noise_in(basis: BasisTag, j: Bath, jp: Bath, p: &EngineParams) -> Result<f64> {
    let generator = match basis {
        BasisTag::ReducedX => reduced_liouvillian(p),
        BasisTag::FullCanonical => full_liouvillian(p),
    };
    let ss = steady_state(&generator)?;
    let r = traceless_pseudoinverse(&generator, &ss)?;
    let jumps = jump_superoperators(p, basis);
    let (ij, ijp) = (jumps.current(j).matrix, jumps.current(jp).matrix);
    let tr = trace_row(basis);
    let lag = |a: &CMatrix, b: &CMatrix| -(&tr * a * &r.matrix * b * &ss.data)[0].re;
    let delta = if j == jp { ss.expect(&jumps.activity(j)) } else { 0.0 };
    Ok(delta + lag(&ijp, &ij) + lag(&ij, &ijp))
}

/// `(ṅ_L − (I_L − I_S), ṅ_R − (I_R + I_S))` at an interior grid point, with
/// centered differences for the occupations.
pub fn conservation_residual(kernel: &NoiseKernel, t: f64) -> Result<(f64, f64)> {
    let k = kernel.grid.index_of(t)?;
    if k == 0 || k >= kernel.grid.steps {
        return Err(EngineError::OffGrid {
            t,
            step: kernel.grid.step,
            end: kernel.grid.end(),
        });
    }
    let (before, after) = (kernel.xstate(k - 1), kernel.xstate(k + 1));
    let h2 = 2.0 * kernel.grid.step;
    let dn_l = (after.n_left() - before.n_left()) / h2;
    let dn_r = (after.n_right() - before.n_right()) / h2;
    let i_s = kernel.internal_current(k);
    Ok((
        dn_l - (kernel.current(Bath::Left, k) - i_s),
        dn_r - (kernel.current(Bath::Right, k) + i_s),
    ))
}
