//! Physical model of the engine: two degenerate qubits with a flip-flop
//! coupling, each attached to its own fermionic reservoir.
//!
//! Energies, rates, temperatures and chemical potentials are all measured in
//! units of the qubit energy, which is fixed to one.
//!
//! Product basis ordering is `|q_L q_R⟩` with index `2 q_L + q_R`, so `|01⟩`
//! has the right qubit excited and `|10⟩` the left one.

use nalgebra::DMatrix;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{EngineError, Result};
use crate::liouville::{BasisTag, CMatrix, LiouvilleOperator, FULL_X_INDICES};

/// One of the two reservoirs (and the qubit attached to it).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Bath {
    #[serde(alias = "l")]
    Left,
    #[serde(alias = "r")]
    Right,
}

impl Bath {
    pub const BOTH: [Bath; 2] = [Bath::Left, Bath::Right];

    pub fn label(self) -> &'static str {
        match self {
            Bath::Left => "L",
            Bath::Right => "R",
        }
    }
}

/// Transient regime set by the sign of `η² = (γ_L − γ_R)² − 16 g²`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Regime {
    Overdamped,
    Underdamped,
    Critical,
}

/// Conditions under which the local master equation stops being a good
/// description. These never make a parameter set invalid.
#[derive(Debug, Clone, PartialEq)]
pub enum ValidityWarning {
    /// `γ_j` is not small compared with the qubit energy.
    StrongBathCoupling { bath: Bath, gamma: f64 },
    /// `g` exceeds both bath rates.
    StrongQubitCoupling { g: f64 },
}

/// Bath rates below this fraction of the qubit energy count as weak coupling.
const WEAK_COUPLING_LIMIT: f64 = 0.1;

/// Relative width (in units of Γ²) of the band of `η²` treated as critical.
const CRITICAL_BAND: f64 = 1e-12;

impl std::fmt::Display for ValidityWarning {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            ValidityWarning::StrongBathCoupling { bath, gamma } => {
                write!(f, "gamma_{} = {gamma} is not small against the qubit energy", bath.label())
            }
            ValidityWarning::StrongQubitCoupling { g } => write!(f, "g = {g} exceeds both bath rates"),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EngineParams {
    /// Qubit energy. It is the unit of everything else and stays at 1.
    #[serde(default = "unit_energy")]
    pub eps_s: f64,
    pub g: f64,
    pub gamma_l: f64,
    pub gamma_r: f64,
    pub t_l: f64,
    pub t_r: f64,
    #[serde(default)]
    pub mu_l: f64,
    #[serde(default)]
    pub mu_r: f64,
}

fn unit_energy() -> f64 {
    1.0
}

impl EngineParams {
    pub fn new(
        g: f64,
        gamma_l: f64,
        gamma_r: f64,
        t_l: f64,
        t_r: f64,
        mu_l: f64,
        mu_r: f64,
    ) -> Result<Self> {
        let p = Self {
            eps_s: 1.0,
            g,
            gamma_l,
            gamma_r,
            t_l,
            t_r,
            mu_l,
            mu_r,
        };
        p.validate()?;
        Ok(p)
    }

    /// Rates and coupling used throughout the figures: `γ_L = 10⁻³`,
    /// `γ_R = 9·10⁻³`, `g = 1.8·10⁻³`, `T_R = 0.1`, no potential bias.
    pub fn fig2(t_l: f64) -> Self {
        Self {
            eps_s: 1.0,
            g: 1.8e-3,
            gamma_l: 1e-3,
            gamma_r: 9e-3,
            t_l,
            t_r: 0.1,
            mu_l: 0.0,
            mu_r: 0.0,
        }
    }

    /// Same rates as [`EngineParams::fig2`] with a left chemical potential.
    pub fn fig4(t_l: f64, mu_l: f64) -> Self {
        Self {
            mu_l,
            ..Self::fig2(t_l)
        }
    }

    pub fn validate(&self) -> Result<()> {
        fn check(ok: bool, field: &'static str, reason: &str) -> Result<()> {
            if ok {
                Ok(())
            } else {
                Err(EngineError::InvalidParams {
                    field,
                    reason: reason.to_string(),
                })
            }
        }
        let all = [
            self.eps_s, self.g, self.gamma_l, self.gamma_r, self.t_l, self.t_r, self.mu_l,
            self.mu_r,
        ];
        check(all.iter().all(|x| x.is_finite()), "params", "all parameters must be finite")?;
        check(self.eps_s == 1.0, "eps_s", "the qubit energy is the unit and must be 1")?;
        check(self.g >= 0.0, "g", "must be >= 0")?;
        check(self.gamma_l > 0.0, "gamma_l", "must be > 0")?;
        check(self.gamma_r > 0.0, "gamma_r", "must be > 0")?;
        check(self.t_l > 0.0, "t_l", "must be > 0")?;
        check(self.t_r > 0.0, "t_r", "must be > 0")?;
        Ok(())
    }

    pub fn with_t_l(self, t_l: f64) -> Self {
        Self { t_l, ..self }
    }

    pub fn with_mu_l(self, mu_l: f64) -> Self {
        Self { mu_l, ..self }
    }

    /// Γ = γ_L + γ_R.
    pub fn total_rate(&self) -> f64 {
        self.gamma_l + self.gamma_r
    }

    pub fn eta_squared(&self) -> f64 {
        let d = self.gamma_l - self.gamma_r;
        d * d - 16.0 * self.g * self.g
    }

    pub fn regime(&self) -> Regime {
        let eta2 = self.eta_squared();
        let band = CRITICAL_BAND * self.total_rate().powi(2);
        if eta2.abs() <= band {
            Regime::Critical
        } else if eta2 > 0.0 {
            Regime::Overdamped
        } else {
            Regime::Underdamped
        }
    }

    pub fn gamma(&self, bath: Bath) -> f64 {
        match bath {
            Bath::Left => self.gamma_l,
            Bath::Right => self.gamma_r,
        }
    }

    /// Mean occupation `f_j(ε_S)` of bath `j` at the qubit energy.
    pub fn occupation(&self, bath: Bath) -> f64 {
        match bath {
            Bath::Left => fermi(self.eps_s, self.t_l, self.mu_l),
            Bath::Right => fermi(self.eps_s, self.t_r, self.mu_r),
        }
    }

    pub fn warnings(&self) -> Vec<ValidityWarning> {
        let mut out = Vec::new();
        for bath in Bath::BOTH {
            let gamma = self.gamma(bath);
            if gamma >= WEAK_COUPLING_LIMIT * self.eps_s {
                out.push(ValidityWarning::StrongBathCoupling { bath, gamma });
            }
        }
        if self.g > self.gamma_l.max(self.gamma_r) {
            out.push(ValidityWarning::StrongQubitCoupling { g: self.g });
        }
        out
    }
}

/// Fermi–Dirac occupation `1 / (1 + exp((eps − mu) / T))`.
pub fn fermi(eps: f64, temperature: f64, mu: f64) -> f64 {
    let x = (eps - mu) / temperature;
    // exp overflows above ~709; the occupation is zero to double precision well before.
    if x > 0.0 {
        let e = (-x).exp();
        e / (1.0 + e)
    } else {
        1.0 / (1.0 + x.exp())
    }
}

/// Excitation (`+`) and de-excitation (`−`) rates of each qubit.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RateSet {
    pub gamma_l_plus: f64,
    pub gamma_l_minus: f64,
    pub gamma_r_plus: f64,
    pub gamma_r_minus: f64,
}

impl RateSet {
    pub fn plus(&self, bath: Bath) -> f64 {
        match bath {
            Bath::Left => self.gamma_l_plus,
            Bath::Right => self.gamma_r_plus,
        }
    }

    pub fn minus(&self, bath: Bath) -> f64 {
        match bath {
            Bath::Left => self.gamma_l_minus,
            Bath::Right => self.gamma_r_minus,
        }
    }
}

pub fn rates(p: &EngineParams) -> RateSet {
    let split = |gamma: f64, f: f64| {
        let plus = gamma * f;
        // γ⁻ is formed as the remainder so that γ⁺ + γ⁻ = γ holds exactly.
        (plus, gamma - plus)
    };
    let (gamma_l_plus, gamma_l_minus) = split(p.gamma_l, p.occupation(Bath::Left));
    let (gamma_r_plus, gamma_r_minus) = split(p.gamma_r, p.occupation(Bath::Right));
    RateSet {
        gamma_l_plus,
        gamma_l_minus,
        gamma_r_plus,
        gamma_r_minus,
    }
}

/// A two-qubit state of X form: four populations of the product basis and the
/// coherence `c` between `|01⟩` and `|10⟩`.
///
/// The density-matrix element `⟨01|ρ|10⟩` equals `i·c` and `⟨10|ρ|01⟩` equals
/// `−i·c*`; `c` itself is what is stored.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct XState {
    pub r1: f64,
    pub r2: f64,
    pub r3: f64,
    pub r4: f64,
    pub c: Complex64,
}

impl XState {
    pub fn populations(&self) -> [f64; 4] {
        [self.r1, self.r2, self.r3, self.r4]
    }

    pub fn trace(&self) -> f64 {
        self.r1 + self.r2 + self.r3 + self.r4
    }

    /// Occupation of the left qubit, `r3 + r4`.
    pub fn n_left(&self) -> f64 {
        self.r3 + self.r4
    }

    /// Occupation of the right qubit, `r2 + r4`.
    pub fn n_right(&self) -> f64 {
        self.r2 + self.r4
    }

    pub fn validate(&self) -> Result<()> {
        if (self.trace() - 1.0).abs() > 1e-10 {
            return Err(EngineError::NonPhysicalState(format!(
                "trace {} differs from 1",
                self.trace()
            )));
        }
        for (i, r) in self.populations().into_iter().enumerate() {
            if !(-1e-9..=1.0 + 1e-9).contains(&r) {
                return Err(EngineError::NonPhysicalState(format!(
                    "population r{} = {r} outside [0, 1]",
                    i + 1
                )));
            }
        }
        if self.r2 * self.r3 < self.c.norm_sqr() - 1e-9 {
            return Err(EngineError::NonPhysicalState(format!(
                "|c|² = {} exceeds r2·r3 = {}",
                self.c.norm_sqr(),
                self.r2 * self.r3
            )));
        }
        Ok(())
    }

    /// The 4×4 density matrix in the product basis.
    pub fn density_matrix(&self) -> CMatrix {
        let i = Complex64::i();
        let mut m = CMatrix::zeros(4, 4);
        m[(0, 0)] = self.r1.into();
        m[(1, 1)] = self.r2.into();
        m[(2, 2)] = self.r3.into();
        m[(3, 3)] = self.r4.into();
        m[(1, 2)] = i * self.c;
        m[(2, 1)] = -i * self.c.conj();
        m
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum InitialKind {
    /// Both qubits in their ground state.
    Ground,
    /// Each qubit populated with the mean occupation of its own bath.
    Thermal,
    /// `(|01⟩ + |10⟩)/√2`.
    Singlet,
}

impl InitialKind {
    pub const ALL: [InitialKind; 3] = [InitialKind::Ground, InitialKind::Thermal, InitialKind::Singlet];

    pub fn label(self) -> &'static str {
        match self {
            InitialKind::Ground => "ground",
            InitialKind::Thermal => "thermal",
            InitialKind::Singlet => "singlet",
        }
    }
}

pub fn initial_state(kind: InitialKind, p: &EngineParams) -> XState {
    match kind {
        InitialKind::Ground => XState {
            r1: 1.0,
            r2: 0.0,
            r3: 0.0,
            r4: 0.0,
            c: Complex64::new(0.0, 0.0),
        },
        InitialKind::Thermal => {
            let fl = p.occupation(Bath::Left);
            let fr = p.occupation(Bath::Right);
            XState {
                r1: (1.0 - fl) * (1.0 - fr),
                r2: (1.0 - fl) * fr,
                r3: fl * (1.0 - fr),
                r4: fl * fr,
                c: Complex64::new(0.0, 0.0),
            }
        }
        InitialKind::Singlet => XState {
            r1: 0.0,
            r2: 0.5,
            r3: 0.5,
            r4: 0.0,
            c: Complex64::new(0.0, -0.5),
        },
    }
}

/// The generator restricted to the X-form subspace, in the order
/// `|00⟩⟨00|, |01⟩⟨01|, |10⟩⟨10|, |11⟩⟨11|, |01⟩⟨10|, |10⟩⟨01|`.
pub fn reduced_liouvillian(p: &EngineParams) -> LiouvilleOperator {
    let k = rates(p);
    let (lp, lm, rp, rm) = (k.gamma_l_plus, k.gamma_l_minus, k.gamma_r_plus, k.gamma_r_minus);
    let ig = Complex64::new(0.0, p.g);
    let half = -0.5 * p.total_rate();
    let r = |x: f64| Complex64::new(x, 0.0);
    let z = Complex64::new(0.0, 0.0);
    #[rustfmt::skip]
    let entries = [
        r(-(lp + rp)), r(rm),          r(lm),          z,             z,       z,
        r(rp),         r(-(lp + rm)),  z,              r(lm),         ig,      -ig,
        r(lp),         z,              r(-(lm + rp)),  r(rm),         -ig,     ig,
        z,             r(lp),          r(rp),          r(-(lm + rm)), z,       z,
        z,             ig,             -ig,            z,             r(half), z,
        z,             -ig,            ig,             z,             z,       r(half),
    ];
    LiouvilleOperator::new(BasisTag::ReducedX, DMatrix::from_row_slice(6, 6, &entries))
}

/// Jump parts of the generator, one per bath and direction.
#[derive(Debug, Clone)]
pub struct JumpSet {
    pub l_plus: LiouvilleOperator,
    pub l_minus: LiouvilleOperator,
    pub r_plus: LiouvilleOperator,
    pub r_minus: LiouvilleOperator,
}

impl JumpSet {
    pub fn plus(&self, bath: Bath) -> &LiouvilleOperator {
        match bath {
            Bath::Left => &self.l_plus,
            Bath::Right => &self.r_plus,
        }
    }

    pub fn minus(&self, bath: Bath) -> &LiouvilleOperator {
        match bath {
            Bath::Left => &self.l_minus,
            Bath::Right => &self.r_minus,
        }
    }

    /// Current superoperator `L_j⁺ − L_j⁻`.
    pub fn current(&self, bath: Bath) -> LiouvilleOperator {
        self.plus(bath).combine(self.minus(bath), -1.0)
    }

    /// Activity superoperator `L_j⁺ + L_j⁻`.
    pub fn activity(&self, bath: Bath) -> LiouvilleOperator {
        self.plus(bath).combine(self.minus(bath), 1.0)
    }

    pub fn sum(&self) -> CMatrix {
        &self.l_plus.matrix + &self.l_minus.matrix + &self.r_plus.matrix + &self.r_minus.matrix
    }
}

pub fn jump_superoperators(p: &EngineParams, basis: BasisTag) -> JumpSet {
    let k = rates(p);
    match basis {
        BasisTag::ReducedX => {
            let single = |rate: f64, pairs: [(usize, usize); 2]| {
                let mut m = CMatrix::zeros(6, 6);
                for (to, from) in pairs {
                    m[(to, from)] = rate.into();
                }
                LiouvilleOperator::new(BasisTag::ReducedX, m)
            };
            JumpSet {
                l_plus: single(k.gamma_l_plus, [(2, 0), (3, 1)]),
                l_minus: single(k.gamma_l_minus, [(0, 2), (1, 3)]),
                r_plus: single(k.gamma_r_plus, [(1, 0), (3, 2)]),
                r_minus: single(k.gamma_r_minus, [(0, 1), (2, 3)]),
            }
        }
        BasisTag::FullCanonical => {
            let jump = |rate: f64, x: &CMatrix| {
                LiouvilleOperator::new(
                    BasisTag::FullCanonical,
                    sandwich(x, &x.adjoint()) * Complex64::from(rate),
                )
            };
            let (spl, spr) = (sigma_plus(Bath::Left), sigma_plus(Bath::Right));
            JumpSet {
                l_plus: jump(k.gamma_l_plus, &spl),
                l_minus: jump(k.gamma_l_minus, &spl.adjoint()),
                r_plus: jump(k.gamma_r_plus, &spr),
                r_minus: jump(k.gamma_r_minus, &spr.adjoint()),
            }
        }
    }
}

/// The jump-free part `L₀` of the generator: coherent evolution plus the
/// anticommutator (loss) terms of the dissipators.
pub fn no_jump_generator(p: &EngineParams, basis: BasisTag) -> LiouvilleOperator {
    let k = rates(p);
    match basis {
        BasisTag::ReducedX => {
            let ig = Complex64::new(0.0, p.g);
            let mut m = CMatrix::zeros(6, 6);
            m[(0, 0)] = (-(k.gamma_l_plus + k.gamma_r_plus)).into();
            m[(1, 1)] = (-(k.gamma_l_plus + k.gamma_r_minus)).into();
            m[(2, 2)] = (-(k.gamma_l_minus + k.gamma_r_plus)).into();
            m[(3, 3)] = (-(k.gamma_l_minus + k.gamma_r_minus)).into();
            m[(4, 4)] = (-0.5 * p.total_rate()).into();
            m[(5, 5)] = (-0.5 * p.total_rate()).into();
            m[(1, 4)] = ig;
            m[(1, 5)] = -ig;
            m[(2, 4)] = -ig;
            m[(2, 5)] = ig;
            m[(4, 1)] = ig;
            m[(4, 2)] = -ig;
            m[(5, 1)] = -ig;
            m[(5, 2)] = ig;
            LiouvilleOperator::new(BasisTag::ReducedX, m)
        }
        BasisTag::FullCanonical => {
            let mut m = hamiltonian_part(p);
            for bath in Bath::BOTH {
                let sp = sigma_plus(bath);
                let sm = sp.adjoint();
                let empty = &sm * &sp;
                let filled = &sp * &sm;
                m -= anticommutator(&empty) * Complex64::from(0.5 * k.plus(bath));
                m -= anticommutator(&filled) * Complex64::from(0.5 * k.minus(bath));
            }
            LiouvilleOperator::new(BasisTag::FullCanonical, m)
        }
    }
}

/// The 16×16 generator built directly from the Hamiltonian and the four
/// dissipators, acting on row-major vectorized 4×4 matrices.
pub fn full_liouvillian(p: &EngineParams) -> LiouvilleOperator {
    let k = rates(p);
    let mut m = hamiltonian_part(p);
    for bath in Bath::BOTH {
        let sp = sigma_plus(bath);
        let sm = sp.adjoint();
        m += dissipator(&sp) * Complex64::from(k.plus(bath));
        m += dissipator(&sm) * Complex64::from(k.minus(bath));
    }
    LiouvilleOperator::new(BasisTag::FullCanonical, m)
}

/// Two-qubit Hamiltonian `ε_S (n_L + n_R) + g (σ₊ᴸσ₋ᴿ + σ₊ᴿσ₋ᴸ)`.
pub fn system_hamiltonian(p: &EngineParams) -> CMatrix {
    let spl = sigma_plus(Bath::Left);
    let spr = sigma_plus(Bath::Right);
    let number = &spl * spl.adjoint() + &spr * spr.adjoint();
    let hop = &spl * spr.adjoint() + &spr * spl.adjoint();
    number * Complex64::from(p.eps_s) + hop * Complex64::from(p.g)
}

/// Restricts a full-basis operator to the X-form subspace.
pub fn restrict_to_x(op: &LiouvilleOperator) -> LiouvilleOperator {
    assert_eq!(op.basis, BasisTag::FullCanonical);
    let m = op.matrix.select_rows(FULL_X_INDICES.iter()).select_columns(FULL_X_INDICES.iter());
    LiouvilleOperator::new(BasisTag::ReducedX, m)
}

fn sigma_plus(bath: Bath) -> CMatrix {
    let one = Complex64::new(1.0, 0.0);
    let mut single = CMatrix::zeros(2, 2);
    single[(1, 0)] = one;
    let id = CMatrix::identity(2, 2);
    match bath {
        Bath::Left => single.kronecker(&id),
        Bath::Right => id.kronecker(&single),
    }
}

/// Superoperator of `ρ ↦ A ρ B` for row-major vectorization.
fn sandwich(a: &CMatrix, b: &CMatrix) -> CMatrix {
    a.kronecker(&b.transpose())
}

fn anticommutator(x: &CMatrix) -> CMatrix {
    let id = CMatrix::identity(x.nrows(), x.ncols());
    sandwich(x, &id) + sandwich(&id, x)
}

fn dissipator(x: &CMatrix) -> CMatrix {
    let xdx = x.adjoint() * x;
    sandwich(x, &x.adjoint()) - anticommutator(&xdx) * Complex64::from(0.5)
}

fn hamiltonian_part(p: &EngineParams) -> CMatrix {
    let h = system_hamiltonian(p);
    let id = CMatrix::identity(4, 4);
    (sandwich(&h, &id) - sandwich(&id, &h)) * Complex64::new(0.0, -1.0)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::liouville::trace_row;
    use approx::assert_relative_eq;

    #[test]
    fn fermi_values() {
        assert_eq!(fermi(0.3, 0.7, 0.3), 0.5);
        assert_relative_eq!(fermi(1.0, 0.1, 0.0), 4.5397868702434395e-5, max_relative = 1e-12);
        assert_relative_eq!(fermi(1.0, 2.0, 0.0), 0.3775406687981454, max_relative = 1e-12);
        assert_eq!(fermi(1.0, 1e-6, 0.0), 0.0);
        assert_eq!(fermi(-1.0, 1e-6, 0.0), 1.0);
    }

    #[test]
    fn fermi_is_decreasing_in_energy() {
        let mut prev = 1.0;
        for i in 0..200 {
            let f = fermi(-5.0 + 0.05 * i as f64, 0.4, 0.2);
            assert!(f <= prev);
            prev = f;
        }
    }

    #[test]
    fn rates_split_bare_rate() {
        let p = EngineParams::fig2(2.0);
        let k = rates(&p);
        assert_eq!(k.gamma_l_plus + k.gamma_l_minus, p.gamma_l);
        assert_eq!(k.gamma_r_plus + k.gamma_r_minus, p.gamma_r);
        assert_relative_eq!(k.gamma_r_plus, 9e-3 * 4.5397868702434395e-5, max_relative = 1e-12);

        let hot = EngineParams::fig2(1e6);
        let k = rates(&EngineParams { t_r: 1e6, ..hot });
        assert_relative_eq!(k.gamma_l_plus, 0.5e-3, max_relative = 1e-6);
        assert_relative_eq!(k.gamma_r_minus, 4.5e-3, max_relative = 1e-6);
    }

    #[test]
    fn derived_quantities() {
        let p = EngineParams::fig2(2.0);
        assert_relative_eq!(p.total_rate(), 1e-2);
        assert_relative_eq!(p.eta_squared().sqrt(), 3.4871191548325e-3, max_relative = 1e-10);
        assert_eq!(p.regime(), Regime::Overdamped);
        assert_eq!(EngineParams { g: 3e-3, ..p }.regime(), Regime::Underdamped);
        assert_eq!(EngineParams { g: 2e-3, ..p }.regime(), Regime::Critical);
        assert!(p.warnings().is_empty());
        assert_eq!(EngineParams { gamma_l: 0.5, ..p }.warnings().len(), 1);
    }

    #[test]
    fn invalid_params_name_the_field() {
        let err = EngineParams::new(1e-3, 1e-3, 1e-3, -1.0, 0.1, 0.0, 0.0).unwrap_err();
        assert!(matches!(err, EngineError::InvalidParams { field: "t_l", .. }));
        let err = EngineParams::new(1e-3, 0.0, 1e-3, 1.0, 0.1, 0.0, 0.0).unwrap_err();
        assert!(matches!(err, EngineError::InvalidParams { field: "gamma_l", .. }));
        let err = EngineParams::new(-1e-3, 1e-3, 1e-3, 1.0, 0.1, 0.0, 0.0).unwrap_err();
        assert!(matches!(err, EngineError::InvalidParams { field: "g", .. }));
    }

    #[test]
    fn initial_states() {
        let p = EngineParams {
            t_l: 0.1,
            ..EngineParams::fig2(0.1)
        };
        for kind in InitialKind::ALL {
            initial_state(kind, &p).validate().unwrap();
        }
        let th = initial_state(InitialKind::Thermal, &p);
        assert_relative_eq!(th.r4, 4.5397868702434395e-5f64.powi(2), max_relative = 1e-10);
        let sg = initial_state(InitialKind::Singlet, &p);
        let m = sg.density_matrix();
        assert_eq!(m[(1, 2)], Complex64::new(0.5, 0.0));
        assert_eq!(m[(2, 1)], Complex64::new(0.5, 0.0));
    }

    #[test]
    fn reduced_generator_structure() {
        let p = EngineParams::fig2(0.6);
        let l = reduced_liouvillian(&p);
        // Population columns conserve probability.
        let tr = trace_row(BasisTag::ReducedX);
        let left = &tr * &l.matrix;
        assert!(left.iter().all(|x| x.norm() < 1e-15));

        let decoupled = reduced_liouvillian(&EngineParams { g: 0.0, ..p });
        for i in 0..4 {
            for j in 4..6 {
                assert_eq!(decoupled.matrix[(i, j)].norm(), 0.0);
                assert_eq!(decoupled.matrix[(j, i)].norm(), 0.0);
            }
        }
    }

    #[test]
    fn reduced_generator_is_jump_decomposition() {
        for p in [EngineParams::fig2(2.0), EngineParams::fig4(0.15, 2.0)] {
            let l = reduced_liouvillian(&p);
            let jumps = jump_superoperators(&p, BasisTag::ReducedX);
            let l0 = no_jump_generator(&p, BasisTag::ReducedX);
            assert_eq!(&l0.matrix + jumps.sum(), l.matrix);
            // L₀ never feeds one population from another.
            for i in 0..4 {
                for j in 0..4 {
                    if i != j {
                        assert_eq!(l0.matrix[(i, j)].norm(), 0.0);
                    }
                }
            }
        }
    }

    #[test]
    fn full_generator_restricts_to_reduced() {
        for p in [EngineParams::fig2(0.15), EngineParams::fig4(2.0, 2.0)] {
            let full = full_liouvillian(&p);
            let restricted = restrict_to_x(&full);
            let reduced = reduced_liouvillian(&p);
            let diff = (&restricted.matrix - &reduced.matrix).camax();
            assert!(diff < 1e-14, "diff {diff}");

            let tr = trace_row(BasisTag::FullCanonical);
            assert!((&tr * &full.matrix).camax() < 1e-15);

            let jumps = jump_superoperators(&p, BasisTag::FullCanonical);
            let l0 = no_jump_generator(&p, BasisTag::FullCanonical);
            assert!((&l0.matrix + jumps.sum() - &full.matrix).camax() < 1e-15);

            let red_jumps = jump_superoperators(&p, BasisTag::ReducedX);
            for bath in Bath::BOTH {
                let a = restrict_to_x(jumps.plus(bath));
                assert!((&a.matrix - &red_jumps.plus(bath).matrix).camax() < 1e-18);
                let a = restrict_to_x(jumps.minus(bath));
                assert!((&a.matrix - &red_jumps.minus(bath).matrix).camax() < 1e-18);
            }
        }
    }

    #[test]
    fn left_absorption_moves_ground_weight() {
        let p = EngineParams::fig2(2.0);
        let jumps = jump_superoperators(&p, BasisTag::ReducedX);
        let ground = crate::liouville::vectorize(
            &initial_state(InitialKind::Ground, &p),
            BasisTag::ReducedX,
        );
        let out = &jumps.l_plus.matrix * &ground.data;
        assert_eq!(out[2].re, rates(&p).gamma_l_plus);
        assert_eq!(out.iter().filter(|x| x.norm() > 0.0).count(), 1);
    }
}
