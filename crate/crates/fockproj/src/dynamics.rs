//! Oscillator time evolution and classical reference flow.
//!
//! With H = a^dag a (zero-point phase dropped; it is a global phase), the
//! evolution operator is diagonal in the number basis, so Heisenberg
//! transport of any operator is an exact elementwise phase twist. The
//! classical flow is rigid rotation of the (q, p) plane, and the central
//! identity e^{iHt} E_x e^{-iHt} = E at flow(x, -t) holds to machine
//! precision for displaced projectors.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::fock::{
    quadratures, validate_projector, FockDim, FockOperator, PhasePoint, PROJECTOR_TOL,
};
use crate::projector::PotentialSpec;
use crate::ComplexMatrix;

/// exp(-iHt) with H = diag(0, 1, ..., d-1); exactly unitary.
pub fn evolution_operator(t: f64, dim: FockDim) -> FockOperator {
    crate::fock::rotate(t, dim)
}

/// Heisenberg-picture quadratures (q(t), p(t)) = (q cos t + p sin t,
/// -q sin t + p cos t). Equal to e^{iHt} q e^{-iHt} exactly, including in
/// the truncated space.
pub fn heisenberg_quadratures(t: f64, dim: FockDim) -> (FockOperator, FockOperator) {
    let (q, p) = quadratures(dim);
    let (c, s) = (Complex64::new(t.cos(), 0.0), Complex64::new(t.sin(), 0.0));
    let qt = &q.scaled(c) + &p.scaled(s);
    let pt = &q.scaled(-s) + &p.scaled(c);
    (qt, pt)
}

/// Classical oscillator flow by time t: rotation of the phase plane,
/// q(t) = q cos t + p sin t, p(t) = -q sin t + p cos t.
pub fn classical_flow(x0: PhasePoint, t: f64) -> PhasePoint {
    let (c, s) = (t.cos(), t.sin());
    PhasePoint::new(-x0.q * s + x0.p * c, x0.q * c + x0.p * s)
}

/// Sampled classical trajectory.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Trajectory {
    pub initial: PhasePoint,
    pub times: Vec<f64>,
    pub points: Vec<PhasePoint>,
}

pub fn classical_trajectory(x0: PhasePoint, times: &[f64]) -> Result<Trajectory> {
    if times.iter().any(|t| !t.is_finite()) {
        return Err(Error::NonFinite { context: "trajectory times".into() });
    }
    let points = times.iter().map(|&t| classical_flow(x0, t)).collect();
    Ok(Trajectory { initial: x0, times: times.to_vec(), points })
}

/// Heisenberg transport e^{iHt} A e^{-iHt} as the exact elementwise twist
/// A_{mn} -> e^{i(m-n)t} A_{mn}.
pub(crate) fn heisenberg_transform(mat: &ComplexMatrix, t: f64) -> ComplexMatrix {
    let d = mat.nrows();
    ComplexMatrix::from_fn(d, d, |m, n| {
        mat[(m, n)] * Complex64::new(0.0, (m as f64 - n as f64) * t).exp()
    })
}

/// Heisenberg-evolve a projector: e^{iHt} E e^{-iHt}. The result is an exact
/// projector, and for E centred at phase point x it equals the freshly built
/// projector at classical_flow(x, -t).
pub fn evolve_projector(e: &FockOperator, t: f64) -> Result<FockOperator> {
    validate_projector(e, PROJECTOR_TOL)?;
    Ok(FockOperator::from_matrix_unchecked(e.dim(), heisenberg_transform(e.matrix(), t)))
}

/// K = p^2/2 + U(q), with U(q) evaluated through the spectral decomposition
/// of the truncated position operator (its eigenvalues form a Gauss-Hermite
/// style grid).
pub fn build_hamiltonian(potential: &PotentialSpec, dim: FockDim) -> Result<FockOperator> {
    potential.validate()?;
    let d = dim.get();
    let (q, p) = quadratures(dim);
    let (nodes, vq) = crate::fock::eigh(&q)?;
    let mut u_vals = Vec::with_capacity(d);
    for &x in &nodes {
        u_vals.push(potential.eval(x)?);
    }
    let vqm = vq.matrix();
    let mut scaled = vqm.clone();
    for (col, &u) in u_vals.iter().enumerate() {
        for row in 0..d {
            scaled[(row, col)] *= Complex64::new(u, 0.0);
        }
    }
    let u_op = &scaled * vqm.adjoint();
    let kinetic = (p.matrix() * p.matrix()).map(|c| c * Complex64::new(0.5, 0.0));
    let k = &kinetic + &u_op;
    // Symmetrize away the eigensolver/product roundoff so eigh accepts it.
    let herm = (&k + &k.adjoint()).map(|c| c * Complex64::new(0.5, 0.0));
    FockOperator::from_matrix(dim, herm)
}
