//! Liouville-space linear algebra: vectorized states, propagation by matrix
//! exponential, steady states and the pseudoinverse on the trace-zero
//! subspace.

use nalgebra::{DMatrix, DVector, RowDVector, Schur, SVD};
use num_complex::Complex64;

use crate::error::{EngineError, Result};
use crate::model::XState;

pub type CMatrix = DMatrix<Complex64>;
pub type CVector = DVector<Complex64>;

/// Positions of the X-form entries inside a row-major vectorized 4×4 matrix,
/// in the order of the reduced basis.
pub const FULL_X_INDICES: [usize; 6] = [0, 5, 10, 15, 6, 9];

/// Eigenvector matrices worse conditioned than this are not trusted for
/// exponentiation.
const EIGEN_CONDITION_LIMIT: f64 = 1e8;

/// Renormalize the trace after this many repeated step-propagator products.
pub const RENORMALIZE_EVERY: usize = 1000;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum BasisTag {
    /// Six X-form entries `|00⟩⟨00|, |01⟩⟨01|, |10⟩⟨10|, |11⟩⟨11|, |01⟩⟨10|, |10⟩⟨01|`.
    ReducedX,
    /// All sixteen entries of the 4×4 density matrix, row-major.
    FullCanonical,
}

impl BasisTag {
    pub fn dim(self) -> usize {
        match self {
            BasisTag::ReducedX => 6,
            BasisTag::FullCanonical => 16,
        }
    }
}

/// The linear functional `v ↦ Tr ρ` as a row vector.
pub fn trace_row(basis: BasisTag) -> RowDVector<Complex64> {
    let mut row = RowDVector::zeros(basis.dim());
    let diag: &[usize] = match basis {
        BasisTag::ReducedX => &[0, 1, 2, 3],
        BasisTag::FullCanonical => &[0, 5, 10, 15],
    };
    for &i in diag {
        row[i] = Complex64::new(1.0, 0.0);
    }
    row
}

#[derive(Debug, Clone, PartialEq)]
pub struct LiouvilleOperator {
    pub basis: BasisTag,
    pub matrix: CMatrix,
}

impl LiouvilleOperator {
    pub fn new(basis: BasisTag, matrix: CMatrix) -> Self {
        assert_eq!(matrix.shape(), (basis.dim(), basis.dim()), "operator shape does not match basis");
        Self { basis, matrix }
    }

    pub fn dim(&self) -> usize {
        self.basis.dim()
    }

    /// `self + factor·other`.
    pub fn combine(&self, other: &LiouvilleOperator, factor: f64) -> LiouvilleOperator {
        assert_eq!(self.basis, other.basis);
        LiouvilleOperator::new(self.basis, &self.matrix + &other.matrix * Complex64::from(factor))
    }

    pub fn apply(&self, v: &VectorizedState) -> Result<VectorizedState> {
        check_basis(self, v)?;
        Ok(VectorizedState {
            basis: self.basis,
            data: &self.matrix * &v.data,
        })
    }

    /// Largest absolute entry of `trace_row · L`; zero for a trace-preserving generator.
    pub fn trace_defect(&self) -> f64 {
        (trace_row(self.basis) * &self.matrix).camax()
    }

    pub fn spectrum(&self) -> Vec<Complex64> {
        let schur = Schur::new(self.matrix.clone());
        let (_, t) = schur.unpack();
        (0..self.dim()).map(|i| t[(i, i)]).collect()
    }

    pub fn propagator(&self) -> Propagator {
        Propagator::new(self)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct VectorizedState {
    pub basis: BasisTag,
    pub data: CVector,
}

impl VectorizedState {
    pub fn new(basis: BasisTag, data: CVector) -> Self {
        assert_eq!(data.len(), basis.dim(), "vector length does not match basis");
        Self { basis, data }
    }

    pub fn trace(&self) -> Complex64 {
        (trace_row(self.basis) * &self.data)[0]
    }

    /// Expectation `Tr{S ρ}` of a superoperator applied to this state.
    pub fn expect(&self, op: &LiouvilleOperator) -> f64 {
        debug_assert_eq!(op.basis, self.basis);
        (trace_row(self.basis) * (&op.matrix * &self.data))[0].re
    }

    /// The six X-form entries, reading them out of a full vector if needed.
    pub fn x_entries(&self) -> [Complex64; 6] {
        match self.basis {
            BasisTag::ReducedX => std::array::from_fn(|i| self.data[i]),
            BasisTag::FullCanonical => FULL_X_INDICES.map(|i| self.data[i]),
        }
    }

    /// Reads the X-form part without physicality checks.
    pub fn to_xstate_unchecked(&self) -> XState {
        let e = self.x_entries();
        XState {
            r1: e[0].re,
            r2: e[1].re,
            r3: e[2].re,
            r4: e[3].re,
            c: e[4] * Complex64::new(0.0, -1.0),
        }
    }
}

pub fn vectorize(state: &XState, basis: BasisTag) -> VectorizedState {
    let i = Complex64::i();
    let entries = [
        state.r1.into(),
        state.r2.into(),
        state.r3.into(),
        state.r4.into(),
        i * state.c,
        -i * state.c.conj(),
    ];
    let data = match basis {
        BasisTag::ReducedX => CVector::from_column_slice(&entries),
        BasisTag::FullCanonical => {
            let mut v = CVector::zeros(16);
            for (slot, value) in FULL_X_INDICES.iter().zip(entries) {
                v[*slot] = value;
            }
            v
        }
    };
    VectorizedState { basis, data }
}

pub fn devectorize(v: &VectorizedState) -> Result<XState> {
    if v.basis != BasisTag::ReducedX {
        return Err(EngineError::DimensionMismatch {
            operator: BasisTag::ReducedX,
            operator_dim: 6,
            state: v.basis,
            state_dim: v.data.len(),
        });
    }
    for i in 0..4 {
        if v.data[i].im.abs() > 1e-10 {
            return Err(EngineError::NonPhysicalState(format!(
                "population entry {i} has imaginary part {}",
                v.data[i].im
            )));
        }
    }
    let s = v.to_xstate_unchecked();
    if let Some((i, r)) = s.populations().into_iter().enumerate().find(|(_, r)| *r < -1e-9) {
        return Err(EngineError::NonPhysicalState(format!("population r{} = {r}", i + 1)));
    }
    if (s.trace() - 1.0).abs() > 1e-8 {
        return Err(EngineError::NonPhysicalState(format!("trace {}", s.trace())));
    }
    Ok(s)
}

fn check_basis(op: &LiouvilleOperator, v: &VectorizedState) -> Result<()> {
    if op.basis != v.basis {
        return Err(EngineError::DimensionMismatch {
            operator: op.basis,
            operator_dim: op.dim(),
            state: v.basis,
            state_dim: v.data.len(),
        });
    }
    Ok(())
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ExpMethod {
    Eigen,
    ScalingSquaring,
}

/// `t ↦ exp(L t)` for a fixed generator.
///
/// Diagonalizable generators with a well-conditioned eigenbasis are
/// exponentiated through their eigendecomposition; otherwise (near an
/// exceptional point, for instance) each call falls back to Padé scaling and
/// squaring.
#[derive(Debug, Clone)]
pub struct Propagator {
    generator: CMatrix,
    eigen: Option<Eigen>,
}

#[derive(Debug, Clone)]
struct Eigen {
    values: Vec<Complex64>,
    vectors: CMatrix,
    inverse: CMatrix,
}

impl Propagator {
    pub fn new(op: &LiouvilleOperator) -> Self {
        Self {
            generator: op.matrix.clone(),
            eigen: eigen_decompose(&op.matrix),
        }
    }

    pub fn method(&self) -> ExpMethod {
        if self.eigen.is_some() {
            ExpMethod::Eigen
        } else {
            ExpMethod::ScalingSquaring
        }
    }

    pub fn matrix(&self, t: f64) -> CMatrix {
        match &self.eigen {
            Some(e) => {
                let mut scaled = e.vectors.clone();
                for (j, lambda) in e.values.iter().enumerate() {
                    let f = (lambda * t).exp();
                    scaled.column_mut(j).iter_mut().for_each(|x| *x *= f);
                }
                scaled * &e.inverse
            }
            None => (&self.generator * Complex64::from(t)).exp(),
        }
    }
}

/// Eigendecomposition from the complex Schur form `L = Q T Q†`, with the
/// eigenvectors of the triangular factor obtained by back substitution.
fn eigen_decompose(m: &CMatrix) -> Option<Eigen> {
    let n = m.nrows();
    let schur = Schur::try_new(m.clone(), f64::EPSILON, 10_000)?;
    let (q, t) = schur.unpack();
    let values: Vec<Complex64> = (0..n).map(|i| t[(i, i)]).collect();
    let smin = (f64::EPSILON * t.norm()).max(f64::MIN_POSITIVE);

    let mut y = CMatrix::zeros(n, n);
    for k in 0..n {
        y[(k, k)] = Complex64::new(1.0, 0.0);
        for i in (0..k).rev() {
            let mut acc = Complex64::new(0.0, 0.0);
            for l in i + 1..=k {
                acc += t[(i, l)] * y[(l, k)];
            }
            let mut d = t[(i, i)] - values[k];
            if d.norm() < smin {
                d = Complex64::new(smin, 0.0);
            }
            y[(i, k)] = -acc / d;
        }
    }
    let mut vectors = q * y;
    for mut col in vectors.column_iter_mut() {
        let norm = col.norm();
        col.unscale_mut(norm);
    }
    let sv = vectors.singular_values();
    let cond = sv.max() / sv.min();
    if !cond.is_finite() || cond > EIGEN_CONDITION_LIMIT {
        return None;
    }
    let inverse = vectors.clone().try_inverse()?;
    Some(Eigen {
        values,
        vectors,
        inverse,
    })
}

/// `exp(L t) v0`.
pub fn propagate(op: &LiouvilleOperator, v0: &VectorizedState, t: f64) -> Result<VectorizedState> {
    check_basis(op, v0)?;
    assert!(t >= 0.0, "propagation time must be non-negative");
    if t == 0.0 {
        return Ok(v0.clone());
    }
    Ok(VectorizedState {
        basis: v0.basis,
        data: op.propagator().matrix(t) * &v0.data,
    })
}

/// States on a uniform grid `v_k = exp(L h)^k v0`, `k = 0..=steps`, built by
/// repeated application of the one-step propagator.
pub fn propagate_grid(
    op: &LiouvilleOperator,
    v0: &VectorizedState,
    step: f64,
    steps: usize,
) -> Result<Vec<VectorizedState>> {
    check_basis(op, v0)?;
    let p = op.propagator().matrix(step);
    Ok(iterate_propagator(&p, v0, steps))
}

pub(crate) fn iterate_propagator(p: &CMatrix, v0: &VectorizedState, steps: usize) -> Vec<VectorizedState> {
    let tr = trace_row(v0.basis);
    let mut out = Vec::with_capacity(steps + 1);
    out.push(v0.clone());
    let mut v = v0.data.clone();
    for k in 1..=steps {
        v = p * v;
        if k % RENORMALIZE_EVERY == 0 {
            let norm = (&tr * &v)[0];
            if norm.norm() > 0.0 {
                v /= norm;
            }
        }
        out.push(VectorizedState {
            basis: v0.basis,
            data: v.clone(),
        });
    }
    out
}

/// Unique unit-trace right null vector of the generator.
pub fn steady_state(op: &LiouvilleOperator) -> Result<VectorizedState> {
    let n = op.dim();
    let svd = SVD::new(op.matrix.clone(), false, true);
    let v_t = svd.v_t.as_ref().expect("right singular vectors requested");
    // Singular values are sorted in decreasing order.
    let sigma = &svd.singular_values;
    let threshold = 1e-10 * sigma[0];
    if sigma[n - 2] <= threshold {
        return Err(EngineError::DegenerateSteadyState {
            sigma: sigma[n - 2],
            threshold,
        });
    }
    let null: CVector = v_t.row(n - 1).adjoint();
    let norm = (trace_row(op.basis) * &null)[0];
    Ok(VectorizedState {
        basis: op.basis,
        data: null / norm,
    })
}

/// Inverse of the generator on the trace-zero subspace.
///
/// With `P₀ = |ss⟩⟨tr|` this is `R = (L − P₀)⁻¹ + P₀`, which satisfies
/// `R L = L R = 1 − P₀`, `R |ss⟩ = 0` and
/// `∫₀^∞ (exp(L τ) − P₀) dτ = −R`.
pub fn traceless_pseudoinverse(op: &LiouvilleOperator, ss: &VectorizedState) -> Result<LiouvilleOperator> {
    check_basis(op, ss)?;
    let p0 = &ss.data * trace_row(op.basis);
    let shifted = &op.matrix - &p0;
    let inverse = shifted.try_inverse().ok_or(EngineError::DegenerateSteadyState {
        sigma: 0.0,
        threshold: 0.0,
    })?;
    Ok(LiouvilleOperator::new(op.basis, inverse + p0))
}
