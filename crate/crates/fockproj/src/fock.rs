//! States and operators on a truncated number-state basis.
//!
//! Everything lives in the span of |0>, ..., |d-1> with hbar = m = omega = 1.
//! Quadratures are q = (a + a^dag)/sqrt(2), p = (a - a^dag)/(i sqrt(2)), and a
//! phase-space point (p, q) carries the coherent label z = (q + ip)/sqrt(2).
//!
//! Unitaries are built by diagonalizing the Hermitian generator and
//! exponentiating its spectrum, so they are unitary to machine precision in
//! the truncated space itself; truncation error appears only when an operator
//! moves weight toward the top of the basis.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use std::ops::{Add, Mul, Sub};

use crate::error::{Error, Result};
use crate::special::poisson_tail;
use crate::{ComplexMatrix, ComplexVector};

/// Hermiticity gate for operators supplied from outside the crate.
pub const HERMITIAN_TOL: f64 = 1e-10;
/// Idempotency gate for operators claimed to be projectors.
pub const PROJECTOR_TOL: f64 = 1e-9;
/// Trace gate for density matrices.
pub const DENSITY_TRACE_TOL: f64 = 1e-10;
/// Density eigenvalues may undershoot zero by this much.
pub const DENSITY_EIGEN_TOL: f64 = 1e-10;

/// Dimension of the truncated basis. Always at least 1.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(try_from = "usize", into = "usize")]
pub struct FockDim(usize);

impl FockDim {
    pub fn new(d: usize) -> Result<Self> {
        if d == 0 {
            return Err(Error::ZeroDimension);
        }
        Ok(FockDim(d))
    }

    pub fn get(self) -> usize {
        self.0
    }
}

impl TryFrom<usize> for FockDim {
    type Error = Error;
    fn try_from(d: usize) -> Result<Self> {
        FockDim::new(d)
    }
}

impl From<FockDim> for usize {
    fn from(d: FockDim) -> usize {
        d.0
    }
}

/// Point (p, q) of the oscillator phase plane.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(into = "[f64; 2]", try_from = "[f64; 2]")]
pub struct PhasePoint {
    pub p: f64,
    pub q: f64,
}

impl PhasePoint {
    pub fn new(p: f64, q: f64) -> Self {
        PhasePoint { p, q }
    }

    /// Oscillator energy (p^2 + q^2)/2; equal to |z|^2 of the label.
    pub fn energy(self) -> f64 {
        0.5 * (self.p * self.p + self.q * self.q)
    }

    pub fn label(self) -> ComplexLabel {
        ComplexLabel(Complex64::new(self.q, self.p) / 2.0_f64.sqrt())
    }
}

impl From<PhasePoint> for [f64; 2] {
    fn from(x: PhasePoint) -> [f64; 2] {
        [x.p, x.q]
    }
}

impl TryFrom<[f64; 2]> for PhasePoint {
    type Error = Error;
    fn try_from(v: [f64; 2]) -> Result<Self> {
        if !v[0].is_finite() || !v[1].is_finite() {
            return Err(Error::InvalidArgument("phase point must be finite".into()));
        }
        Ok(PhasePoint::new(v[0], v[1]))
    }
}

/// Coherent-state label z = (q + ip)/sqrt(2).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(into = "[f64; 2]", try_from = "[f64; 2]")]
pub struct ComplexLabel(pub Complex64);

impl ComplexLabel {
    pub fn new(z: Complex64) -> Self {
        ComplexLabel(z)
    }

    pub fn phase_point(self) -> PhasePoint {
        let s = 2.0_f64.sqrt();
        PhasePoint::new(s * self.0.im, s * self.0.re)
    }

    pub fn norm_sqr(self) -> f64 {
        self.0.norm_sqr()
    }
}

impl From<ComplexLabel> for [f64; 2] {
    fn from(z: ComplexLabel) -> [f64; 2] {
        [z.0.re, z.0.im]
    }
}

impl TryFrom<[f64; 2]> for ComplexLabel {
    type Error = Error;
    fn try_from(v: [f64; 2]) -> Result<Self> {
        if !v[0].is_finite() || !v[1].is_finite() {
            return Err(Error::InvalidArgument("complex label must be finite".into()));
        }
        Ok(ComplexLabel(Complex64::new(v[0], v[1])))
    }
}

#[derive(Serialize, Deserialize)]
struct StateRepr {
    dim: usize,
    amp: Vec<[f64; 2]>,
}

/// Pure state: amplitude vector over the number basis.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(into = "StateRepr", try_from = "StateRepr")]
pub struct FockState {
    dim: FockDim,
    amp: ComplexVector,
}

impl FockState {
    pub fn new(dim: FockDim, amp: ComplexVector) -> Result<Self> {
        if amp.len() != dim.get() {
            return Err(Error::DimensionMismatch { left: dim.get(), right: amp.len() });
        }
        if amp.iter().any(|c| !c.re.is_finite() || !c.im.is_finite()) {
            return Err(Error::NonFinite { context: "state amplitudes".into() });
        }
        Ok(FockState { dim, amp })
    }

    pub fn dim(&self) -> FockDim {
        self.dim
    }

    pub fn amplitudes(&self) -> &ComplexVector {
        &self.amp
    }

    pub fn norm_sqr(&self) -> f64 {
        self.amp.norm_squared()
    }

    /// <self|other>.
    pub fn inner(&self, other: &FockState) -> Result<Complex64> {
        if self.dim != other.dim {
            return Err(Error::DimensionMismatch { left: self.dim.get(), right: other.dim.get() });
        }
        Ok(self.amp.dotc(&other.amp))
    }

    /// Rank-1 operator |self><self|.
    pub fn outer(&self) -> FockOperator {
        let d = self.dim.get();
        let mat = ComplexMatrix::from_fn(d, d, |i, j| self.amp[i] * self.amp[j].conj());
        FockOperator { dim: self.dim, mat }
    }
}

impl From<FockState> for StateRepr {
    fn from(s: FockState) -> StateRepr {
        StateRepr { dim: s.dim.get(), amp: s.amp.iter().map(|c| [c.re, c.im]).collect() }
    }
}

impl TryFrom<StateRepr> for FockState {
    type Error = Error;
    fn try_from(r: StateRepr) -> Result<Self> {
        let dim = FockDim::new(r.dim)?;
        let amp = ComplexVector::from_iterator(
            r.amp.len(),
            r.amp.iter().map(|c| Complex64::new(c[0], c[1])),
        );
        FockState::new(dim, amp)
    }
}

#[derive(Serialize, Deserialize)]
struct OperatorRepr {
    dim: usize,
    /// Row-major [re, im] pairs.
    mat: Vec<[f64; 2]>,
}

/// Dense operator on the truncated basis.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(into = "OperatorRepr", try_from = "OperatorRepr")]
pub struct FockOperator {
    dim: FockDim,
    mat: ComplexMatrix,
}

impl FockOperator {
    pub fn from_matrix(dim: FockDim, mat: ComplexMatrix) -> Result<Self> {
        if mat.nrows() != dim.get() || mat.ncols() != dim.get() {
            return Err(Error::DimensionMismatch {
                left: dim.get(),
                right: mat.nrows().max(mat.ncols()),
            });
        }
        if mat.iter().any(|c| !c.re.is_finite() || !c.im.is_finite()) {
            return Err(Error::NonFinite { context: "operator entries".into() });
        }
        Ok(FockOperator { dim, mat })
    }

    /// Construction path for matrices built inside the crate, where the shape
    /// is correct by construction.
    pub(crate) fn from_matrix_unchecked(dim: FockDim, mat: ComplexMatrix) -> Self {
        debug_assert_eq!(mat.nrows(), dim.get());
        debug_assert_eq!(mat.ncols(), dim.get());
        FockOperator { dim, mat }
    }

    pub fn identity(dim: FockDim) -> Self {
        FockOperator { dim, mat: ComplexMatrix::identity(dim.get(), dim.get()) }
    }

    pub fn zeros(dim: FockDim) -> Self {
        FockOperator { dim, mat: ComplexMatrix::zeros(dim.get(), dim.get()) }
    }

    pub fn from_real_diagonal(dim: FockDim, diag: &[f64]) -> Result<Self> {
        if diag.len() != dim.get() {
            return Err(Error::DimensionMismatch { left: dim.get(), right: diag.len() });
        }
        if diag.iter().any(|x| !x.is_finite()) {
            return Err(Error::NonFinite { context: "diagonal entries".into() });
        }
        let mut mat = ComplexMatrix::zeros(dim.get(), dim.get());
        for (i, &x) in diag.iter().enumerate() {
            mat[(i, i)] = Complex64::new(x, 0.0);
        }
        Ok(FockOperator { dim, mat })
    }

    pub fn dim(&self) -> FockDim {
        self.dim
    }

    pub fn matrix(&self) -> &ComplexMatrix {
        &self.mat
    }

    pub fn into_matrix(self) -> ComplexMatrix {
        self.mat
    }

    pub fn adjoint(&self) -> FockOperator {
        FockOperator { dim: self.dim, mat: self.mat.adjoint() }
    }

    pub fn trace(&self) -> Complex64 {
        self.mat.diagonal().sum()
    }

    pub fn scaled(&self, c: Complex64) -> FockOperator {
        FockOperator { dim: self.dim, mat: self.mat.map(|x| x * c) }
    }

    /// I - self.
    pub fn complement(&self) -> FockOperator {
        let mut mat = self.mat.map(|x| -x);
        for i in 0..self.dim.get() {
            mat[(i, i)] += Complex64::ONE;
        }
        FockOperator { dim: self.dim, mat }
    }

    /// u self u^dag.
    pub fn conjugated_by(&self, u: &FockOperator) -> FockOperator {
        assert_eq!(self.dim, u.dim, "dimension mismatch in conjugation");
        FockOperator { dim: self.dim, mat: &u.mat * &self.mat * u.mat.adjoint() }
    }

    pub fn apply(&self, s: &FockState) -> Result<FockState> {
        if self.dim != s.dim {
            return Err(Error::DimensionMismatch { left: self.dim.get(), right: s.dim.get() });
        }
        Ok(FockState { dim: s.dim, amp: &self.mat * &s.amp })
    }

    /// <s|self|s>.
    pub fn expectation(&self, s: &FockState) -> Result<Complex64> {
        let applied = self.apply(s)?;
        s.inner(&applied)
    }

    pub fn max_abs(&self) -> f64 {
        self.mat.iter().map(|c| c.norm()).fold(0.0, f64::max)
    }

    pub fn max_abs_diff(&self, other: &FockOperator) -> f64 {
        assert_eq!(self.dim, other.dim, "dimension mismatch in comparison");
        self.mat
            .iter()
            .zip(other.mat.iter())
            .map(|(a, b)| (a - b).norm())
            .fold(0.0, f64::max)
    }

    /// max |A - A^dag|.
    pub fn hermiticity_defect(&self) -> f64 {
        let d = self.dim.get();
        let mut worst = 0.0f64;
        for i in 0..d {
            for j in i..d {
                worst = worst.max((self.mat[(i, j)] - self.mat[(j, i)].conj()).norm());
            }
        }
        worst
    }

    /// max |A A^dag - I|.
    pub fn unitarity_defect(&self) -> f64 {
        let prod = &self.mat * self.mat.adjoint();
        let d = self.dim.get();
        let mut worst = 0.0f64;
        for i in 0..d {
            for j in 0..d {
                let expect = if i == j { Complex64::ONE } else { Complex64::ZERO };
                worst = worst.max((prod[(i, j)] - expect).norm());
            }
        }
        worst
    }

    /// max |A^2 - A|.
    pub fn idempotency_defect(&self) -> f64 {
        let sq = &self.mat * &self.mat;
        sq.iter()
            .zip(self.mat.iter())
            .map(|(s, a)| (s - a).norm())
            .fold(0.0, f64::max)
    }
}

impl From<FockOperator> for OperatorRepr {
    fn from(a: FockOperator) -> OperatorRepr {
        let d = a.dim.get();
        let mut mat = Vec::with_capacity(d * d);
        for i in 0..d {
            for j in 0..d {
                let c = a.mat[(i, j)];
                mat.push([c.re, c.im]);
            }
        }
        OperatorRepr { dim: d, mat }
    }
}

impl TryFrom<OperatorRepr> for FockOperator {
    type Error = Error;
    fn try_from(r: OperatorRepr) -> Result<Self> {
        let dim = FockDim::new(r.dim)?;
        let d = dim.get();
        if r.mat.len() != d * d {
            return Err(Error::DimensionMismatch { left: d * d, right: r.mat.len() });
        }
        let mat = ComplexMatrix::from_fn(d, d, |i, j| {
            let c = r.mat[i * d + j];
            Complex64::new(c[0], c[1])
        });
        FockOperator::from_matrix(dim, mat)
    }
}

impl Add for &FockOperator {
    type Output = FockOperator;
    fn add(self, rhs: &FockOperator) -> FockOperator {
        assert_eq!(self.dim, rhs.dim, "dimension mismatch in operator sum");
        FockOperator { dim: self.dim, mat: &self.mat + &rhs.mat }
    }
}

impl Sub for &FockOperator {
    type Output = FockOperator;
    fn sub(self, rhs: &FockOperator) -> FockOperator {
        assert_eq!(self.dim, rhs.dim, "dimension mismatch in operator difference");
        FockOperator { dim: self.dim, mat: &self.mat - &rhs.mat }
    }
}

impl Mul for &FockOperator {
    type Output = FockOperator;
    fn mul(self, rhs: &FockOperator) -> FockOperator {
        assert_eq!(self.dim, rhs.dim, "dimension mismatch in operator product");
        FockOperator { dim: self.dim, mat: &self.mat * &rhs.mat }
    }
}

/// Fail unless `e` is Hermitian and idempotent within `tol`.
pub fn validate_projector(e: &FockOperator, tol: f64) -> Result<()> {
    let herm = e.hermiticity_defect();
    if herm > tol {
        return Err(Error::NotHermitian { defect: herm });
    }
    let idem = e.idempotency_defect();
    if idem > tol {
        return Err(Error::NotProjector { defect: idem });
    }
    Ok(())
}

/// Fail unless `rho` is Hermitian, unit trace, and positive semidefinite
/// within the density gates.
pub fn validate_density(rho: &FockOperator) -> Result<()> {
    let herm = rho.hermiticity_defect();
    if herm > HERMITIAN_TOL {
        return Err(Error::NotHermitian { defect: herm });
    }
    let tr = rho.trace();
    if (tr.re - 1.0).abs() > DENSITY_TRACE_TOL || tr.im.abs() > DENSITY_TRACE_TOL {
        return Err(Error::NotDensity { reason: format!("trace {:.6e}+{:.2e}i, expected 1", tr.re, tr.im) });
    }
    let (evals, _) = eigh(rho)?;
    if let Some(&lo) = evals.first() {
        if lo < -DENSITY_EIGEN_TOL {
            return Err(Error::NotDensity { reason: format!("eigenvalue {lo:.3e} below zero") });
        }
    }
    Ok(())
}

/// Lowering operator a with a|n> = sqrt(n)|n-1>.
pub fn annihilation(dim: FockDim) -> FockOperator {
    let d = dim.get();
    let mat = ComplexMatrix::from_fn(d, d, |i, j| {
        if j == i + 1 {
            Complex64::new((j as f64).sqrt(), 0.0)
        } else {
            Complex64::ZERO
        }
    });
    FockOperator { dim, mat }
}

/// (a, a^dag).
pub fn ladder_ops(dim: FockDim) -> (FockOperator, FockOperator) {
    let a = annihilation(dim);
    let adag = a.adjoint();
    (a, adag)
}

/// Number operator a^dag a = diag(0, 1, ..., d-1).
pub fn number_operator(dim: FockDim) -> FockOperator {
    let diag: Vec<f64> = (0..dim.get()).map(|n| n as f64).collect();
    FockOperator::from_real_diagonal(dim, &diag).expect("diagonal length matches dim")
}

/// Quadratures (q, p) with [q, p] = i away from the truncation corner.
pub fn quadratures(dim: FockDim) -> (FockOperator, FockOperator) {
    let (a, adag) = ladder_ops(dim);
    let inv_sqrt2 = Complex64::new(1.0 / 2.0_f64.sqrt(), 0.0);
    let q = (&a + &adag).scaled(inv_sqrt2);
    let p = (&a - &adag).scaled(Complex64::new(0.0, -1.0 / 2.0_f64.sqrt()));
    (q, p)
}

/// Basis state |n>.
pub fn number_state(n: usize, dim: FockDim) -> Result<FockState> {
    let d = dim.get();
    if n >= d {
        return Err(Error::IndexOutOfRange { index: n, dim: d });
    }
    let mut amp = ComplexVector::zeros(d);
    amp[n] = Complex64::ONE;
    Ok(FockState { dim, amp })
}

/// Truncated coherent state with amplitudes <n|z> = z^n e^(-|z|^2/2)/sqrt(n!).
///
/// The truncated vector is left unnormalized; its norm deficit is exactly
/// [`coherent_norm_deficit`], which is negligible once d exceeds |z|^2 by a
/// few standard deviations sqrt(|z|^2).
pub fn coherent_state(z: ComplexLabel, dim: FockDim) -> FockState {
    let d = dim.get();
    let mut amp = ComplexVector::zeros(d);
    amp[0] = Complex64::new((-0.5 * z.norm_sqr()).exp(), 0.0);
    for n in 1..d {
        amp[n] = amp[n - 1] * z.0 / Complex64::new((n as f64).sqrt(), 0.0);
    }
    FockState { dim, amp }
}

/// 1 - <z|z> of the truncated coherent state: the Poisson tail beyond d - 1.
pub fn coherent_norm_deficit(z: ComplexLabel, dim: FockDim) -> f64 {
    poisson_tail(dim.get() - 1, z.norm_sqr())
}

/// Eigendecomposition of a Hermitian operator: ascending eigenvalues and the
/// unitary whose columns are the matching eigenvectors.
pub fn eigh(a: &FockOperator) -> Result<(Vec<f64>, FockOperator)> {
    let defect = a.hermiticity_defect();
    if defect > HERMITIAN_TOL {
        return Err(Error::NotHermitian { defect });
    }
    let (evals, evecs) = eigh_matrix(&a.mat);
    Ok((evals, FockOperator { dim: a.dim, mat: evecs }))
}

/// Hermitian eigendecomposition on a raw matrix, eigenvalues ascending.
pub(crate) fn eigh_matrix(h: &ComplexMatrix) -> (Vec<f64>, ComplexMatrix) {
    let d = h.nrows();
    let se = h.clone().symmetric_eigen();
    let mut order: Vec<usize> = (0..d).collect();
    order.sort_by(|&i, &j| se.eigenvalues[i].total_cmp(&se.eigenvalues[j]));
    let evals: Vec<f64> = order.iter().map(|&k| se.eigenvalues[k]).collect();
    let mut evecs = ComplexMatrix::zeros(d, d);
    for (col, &k) in order.iter().enumerate() {
        evecs.set_column(col, &se.eigenvectors.column(k));
    }
    (evals, evecs)
}

/// exp(G) for anti-Hermitian G, via the spectrum of the Hermitian -iG. The
/// result is exactly unitary up to eigensolver roundoff.
pub(crate) fn exp_antihermitian(g: &ComplexMatrix) -> ComplexMatrix {
    let d = g.nrows();
    let h = g.map(|c| c * Complex64::new(0.0, -1.0));
    let (evals, v) = eigh_matrix(&h);
    // G = iH, so exp(G) = V diag(e^{i lambda}) V^dag.
    let mut scaled = v.clone();
    for (col, &lam) in evals.iter().enumerate() {
        let phase = Complex64::new(0.0, lam).exp();
        for row in 0..d {
            scaled[(row, col)] *= phase;
        }
    }
    scaled * v.adjoint()
}

/// Displacement U(p, q) = exp(i p q_op - i q p_op), taking the vacuum to the
/// coherent state at (p, q).
pub fn displacement(center: PhasePoint, dim: FockDim) -> FockOperator {
    let d = dim.get();
    let alpha = center.label().0;
    // i p q_op - i q p_op = alpha a^dag - conj(alpha) a.
    let mut g = ComplexMatrix::zeros(d, d);
    for n in 1..d {
        let s = Complex64::new((n as f64).sqrt(), 0.0);
        g[(n, n - 1)] = alpha * s;
        g[(n - 1, n)] = -alpha.conj() * s;
    }
    FockOperator { dim, mat: exp_antihermitian(&g) }
}

/// Squeeze exp((conj(xi) a^2 - xi a^dag^2)/2). For real xi = r > 0 this
/// shrinks the q variance by e^(-2r) and stretches p by e^(2r).
pub fn squeeze(xi: Complex64, dim: FockDim) -> FockOperator {
    let (a, adag) = ladder_ops(dim);
    let a2 = &a.mat * &a.mat;
    let adag2 = &adag.mat * &adag.mat;
    let half = Complex64::new(0.5, 0.0);
    let g = (a2.map(|c| c * xi.conj()) - adag2.map(|c| c * xi)).map(|c| c * half);
    FockOperator { dim, mat: exp_antihermitian(&g) }
}

/// Phase-plane rotation exp(-i theta a^dag a), diagonal in the number basis.
pub fn rotate(theta: f64, dim: FockDim) -> FockOperator {
    let d = dim.get();
    let mut mat = ComplexMatrix::zeros(d, d);
    for n in 0..d {
        mat[(n, n)] = Complex64::new(0.0, -theta * n as f64).exp();
    }
    FockOperator { dim, mat }
}
