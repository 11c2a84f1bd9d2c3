//! Closed-form current and coherence transients for the three canonical
//! initial states, and steady-state current, noise, activity and KUR ratio.
//!
//! These expressions are evaluated independently of the Liouville-space
//! pipeline and serve as its oracle.
//!
//! The transients contain `η = sqrt((γ_L − γ_R)² − 16 g²)` only through
//! `η²`, `cosh(η t/2)` and `η sinh(η t/2)`, all even in `η`. Evaluating with a
//! complex square root therefore covers the underdamped regime by analytic
//! continuation.

use num_complex::Complex64;

use crate::error::{EngineError, Result};
use crate::model::{Bath, EngineParams, InitialKind};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Quantity {
    CurrentLeft,
    Coherence,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct AnalyticSelector {
    pub initial: InitialKind,
    pub quantity: Quantity,
}

impl AnalyticSelector {
    pub fn new(initial: InitialKind, quantity: Quantity) -> Self {
        Self { initial, quantity }
    }
}

/// Below this |η²| (relative to Γ²) the removable singularity at the critical
/// point is bridged by averaging the two sides.
const CRITICAL_GUARD: f64 = 1e-6;

/// Shared sub-expressions of the transient formulas.
struct Terms {
    gl: f64,
    gr: f64,
    g: f64,
    fl: f64,
    fr: f64,
    total: f64,
    /// 4g² + γ_L γ_R
    k: f64,
    eta2: Complex64,
    eta: Complex64,
    decay: f64,
    cosh: Complex64,
    sinh: Complex64,
}

impl Terms {
    fn new(p: &EngineParams, eta2: f64, t: f64) -> Self {
        let eta = Complex64::from(eta2).sqrt();
        let half = eta * (0.5 * t);
        let total = p.total_rate();
        Self {
            gl: p.gamma_l,
            gr: p.gamma_r,
            g: p.g,
            fl: p.occupation(Bath::Left),
            fr: p.occupation(Bath::Right),
            total,
            k: 4.0 * p.g * p.g + p.gamma_l * p.gamma_r,
            eta2: eta2.into(),
            eta,
            decay: (-0.5 * total * t).exp(),
            cosh: half.cosh(),
            sinh: half.sinh(),
        }
    }

    fn steady_current(&self) -> f64 {
        4.0 * self.g * self.g * self.gl * self.gr * (self.fl - self.fr) / (self.total * self.k)
    }

    fn steady_coherence(&self) -> f64 {
        -2.0 * self.g * self.gl * self.gr * (self.fl - self.fr) / (self.total * self.k)
    }

    fn current_ground(&self) -> Complex64 {
        let Terms { gl, gr, g, fl, fr, total, k, eta2, eta, decay, cosh, sinh } = *self;
        let g2 = g * g;
        let weighted = gl * fl + gr * fr;
        let bracket = -16.0 * g2 / total * k * weighted
            + cosh * (4.0 * g2 * total * weighted + gl * gr * eta2 * fl)
            + eta * sinh * (4.0 * g2 * (-gl * fl + gr * fr) + gl * gr * (gr - gl) * fl);
        self.steady_current() + gl / (eta2 * k) * decay * bracket
    }

    fn coherence_ground(&self) -> Complex64 {
        let Terms { gl, gr, g, fl, fr, total, k, eta2, eta, decay, cosh, sinh } = *self;
        let weighted = gl * fl + gr * fr;
        let bracket = 4.0 * (gl - gr) / total * weighted
            + total / k * cosh * ((gr - gl) * weighted + eta2 / total * (gl * fl - gr * fr))
            + 2.0 * gl * gr * eta / k * sinh * (fl - fr);
        self.steady_coherence() + g / eta2 * decay * bracket
    }

    fn current_thermal(&self) -> Complex64 {
        let Terms { gl, gr, g, fl, fr, total, k, eta2, eta, decay, cosh, sinh } = *self;
        let g2 = g * g;
        let bracket = 2.0 * (gr - gl) / total + (8.0 * g2 - gr * (gr - gl)) / k * cosh - gr / k * eta * sinh;
        self.steady_current() + 4.0 * g2 * gl / eta2 * (fl - fr) * decay * bracket
    }

    fn coherence_thermal(&self) -> Complex64 {
        let Terms { gl, gr, g, fl, fr, total, k, eta2, eta, decay, cosh, sinh } = *self;
        let g2 = g * g;
        let bracket = (gl - gr).powi(2) / (total * total) - 4.0 * g2 / (total * k) * (total * cosh + eta * sinh);
        self.steady_coherence() + 2.0 * g * total / eta2 * (fl - fr) * decay * bracket
    }

    fn current_singlet(&self) -> Complex64 {
        let Terms { gl, gr, g, fl, fr, total, k, eta2, eta, decay, cosh, sinh } = *self;
        let g2 = g * g;
        let (dl, dr) = (1.0 - 2.0 * fl, 1.0 - 2.0 * fr);
        let bracket = 32.0 * g2 / total * k * (gl * dl + gr * dr)
            + 2.0 * gl * (gr - gl) * dl * ((gr * (gl - gr) + 4.0 * g2) * cosh - gr * eta * sinh)
            + 16.0 * g2 * gl * gr * (fr - fl) * cosh
            + 8.0 * g2 * (gl * dl - gr * dr) * (gr * cosh + eta * sinh);
        self.steady_current() + gl / (4.0 * k * eta2) * decay * bracket
    }

    fn coherence_singlet(&self) -> Complex64 {
        let Terms { gl, gr, g, fl, fr, total, k, eta2, eta, decay, cosh, sinh } = *self;
        let g2 = g * g;
        let (dl, dr) = (1.0 - 2.0 * fl, 1.0 - 2.0 * fr);
        let bracket = 2.0 * (gr - gl) / total * k * (dl * gl + dr * gr)
            - 2.0 * cosh * (4.0 * g2 * (-dl * gl + dr * gr) + gl * gr * (gr - gl) * (1.0 - fl - fr))
            + 2.0 * sinh * gl * gr * eta * (fl - fr);
        self.steady_coherence() - Complex64::new(0.0, 0.5) * decay + g / (k * eta2) * decay * bracket
    }

    fn evaluate(&self, sel: AnalyticSelector) -> Complex64 {
        match (sel.initial, sel.quantity) {
            (InitialKind::Ground, Quantity::CurrentLeft) => self.current_ground(),
            (InitialKind::Ground, Quantity::Coherence) => self.coherence_ground(),
            (InitialKind::Thermal, Quantity::CurrentLeft) => self.current_thermal(),
            (InitialKind::Thermal, Quantity::Coherence) => self.coherence_thermal(),
            (InitialKind::Singlet, Quantity::CurrentLeft) => self.current_singlet(),
            (InitialKind::Singlet, Quantity::Coherence) => self.coherence_singlet(),
        }
    }
}

/// Closed-form `I_L(t)` or `c(t)` at time `t` (units of 1/ε_S). For currents
/// the real part is the physical value.
pub fn analytic_transient(sel: AnalyticSelector, p: &EngineParams, t: f64) -> Result<Complex64> {
    if !(t >= 0.0) {
        return Err(EngineError::UncoveredSelector(format!("negative time {t}")));
    }
    let eta2 = p.eta_squared();
    let guard = CRITICAL_GUARD * p.total_rate().powi(2);
    if eta2.abs() < guard {
        // Step off the exceptional point along g on both sides and average.
        let d2 = (p.gamma_l - p.gamma_r).powi(2);
        let side = |eta2: f64| {
            let g = ((d2 - eta2) / 16.0).max(0.0).sqrt();
            Terms::new(&EngineParams { g, ..*p }, eta2, t).evaluate(sel)
        };
        return Ok(0.5 * (side(guard) + side(-guard)));
    }
    Ok(Terms::new(p, eta2, t).evaluate(sel))
}

fn weighted_mean(p: &EngineParams, left: f64, right: f64) -> f64 {
    (p.gamma_l * left + p.gamma_r * right) / p.total_rate()
}

fn coupling_sum(p: &EngineParams) -> f64 {
    4.0 * p.g * p.g + p.gamma_l * p.gamma_r
}

/// Steady-state particle current from the left bath.
pub fn steady_current(p: &EngineParams) -> f64 {
    let (fl, fr) = (p.occupation(Bath::Left), p.occupation(Bath::Right));
    4.0 * p.g * p.g * p.gamma_l * p.gamma_r * (fl - fr) / (p.total_rate() * coupling_sum(p))
}

/// Steady-state coherence (real for degenerate qubits).
pub fn steady_coherence(p: &EngineParams) -> f64 {
    let (fl, fr) = (p.occupation(Bath::Left), p.occupation(Bath::Right));
    -2.0 * p.g * p.gamma_l * p.gamma_r * (fl - fr) / (p.total_rate() * coupling_sum(p))
}

/// Zero-frequency auto-correlation of the left current in the steady state.
///
/// The first term `I·(f_L(1−f_R) + f_R(1−f_L))/(f_L − f_R)` is evaluated with
/// the bias factor of `I` cancelled, so zero bias is not special.
pub fn steady_noise(p: &EngineParams) -> f64 {
    let (fl, fr) = (p.occupation(Bath::Left), p.occupation(Bath::Right));
    let total = p.total_rate();
    let k = coupling_sum(p);
    let current = steady_current(p);
    let prefactor = 4.0 * p.g * p.g * p.gamma_l * p.gamma_r / (total * k);
    prefactor * (fl * (1.0 - fr) + fr * (1.0 - fl)) - 2.0 * current * current * (1.0 / total + total / k)
}

/// Steady-state activity `A_L + A_R`.
pub fn steady_activity(p: &EngineParams) -> f64 {
    let (fl, fr) = (p.occupation(Bath::Left), p.occupation(Bath::Right));
    let total = p.total_rate();
    let k = coupling_sum(p);
    let spread = weighted_mean(p, fl * (1.0 - fl), fr * (1.0 - fr));
    2.0 * total / k
        * (k * spread + 4.0 * p.g * p.g * p.gamma_l * p.gamma_r / (total * total) * (fl - fr).powi(2))
}

/// Steady-state internal activity `(4g²/Γ)(r2 + r3)`.
pub fn steady_internal_activity(p: &EngineParams) -> f64 {
    let (fl, fr) = (p.occupation(Bath::Left), p.occupation(Bath::Right));
    let total = p.total_rate();
    let k = coupling_sum(p);
    let mean = weighted_mean(p, fl, fr);
    4.0 * p.g * p.g / (total * k)
        * (8.0 * p.g * p.g * mean * (1.0 - mean) + p.gamma_l * p.gamma_r * (fl * (1.0 - fr) + fr * (1.0 - fl)))
}

/// Steady-state KUR ratio `S·A/I²`, evaluated from its factorized closed form.
pub fn steady_kur(p: &EngineParams) -> Result<f64> {
    let (fl, fr) = (p.occupation(Bath::Left), p.occupation(Bath::Right));
    let bias = fl - fr;
    if bias.abs() < 1e-12 {
        return Err(EngineError::ZeroBias(bias.abs()));
    }
    let (gl, gr, g2) = (p.gamma_l, p.gamma_r, p.g * p.g);
    let total = p.total_rate();
    let k = coupling_sum(p);
    let spread = weighted_mean(p, fl * (1.0 - fl), fr * (1.0 - fr));
    let first = 4.0 * (k * spread + 4.0 * g2 * gl * gr / (total * total) * bias * bias);
    let second = total * total / (8.0 * g2 * gl * gr)
        * ((fl * (1.0 - fl) + fr * (1.0 - fr)) / (bias * bias) + 1.0)
        - (k + total * total) / (k * k);
    Ok(first * second)
}
