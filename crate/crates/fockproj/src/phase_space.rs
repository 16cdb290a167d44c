//! Wigner and Husimi representations, region probabilities, and point-mass
//! P-function mixtures.
//!
//! The Wigner function of an operator A is the displaced-parity expectation
//! W_A(p, q) = (1/pi) Tr[A U(p,q) Pi U(p,q)^dag] with Pi = diag((-1)^n).
//! Normalization: integral of W_A over the plane is Tr A, and
//! Tr(AB) = 2 pi * integral of W_A W_B. For the circular projector E_N the
//! same function collapses to the alternating Laguerre series in
//! r^2 = 2(p^2 + q^2), which provides an independent evaluation route.
//!
//! Husimi values are coherent-state diagonals <z|A|z>; for E_N they equal
//! the Poisson(|z|^2) CDF at N.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::fock::{
    coherent_state, eigh, eigh_matrix, validate_density, validate_projector, ComplexLabel,
    FockDim, FockOperator, PhasePoint, HERMITIAN_TOL, PROJECTOR_TOL,
};
use crate::special::alternating_laguerre_sum;
use crate::ComplexMatrix;

/// Spectral components below this fraction of the largest one are dropped
/// when an operator is expanded for pointwise evaluation.
const SPECTRAL_CUTOFF: f64 = 1e-14;

fn map_cells<F>(n: usize, f: F) -> Vec<f64>
where
    F: Fn(usize) -> f64 + Sync + Send,
{
    #[cfg(feature = "parallel")]
    {
        use rayon::prelude::*;
        (0..n).into_par_iter().map(f).collect()
    }
    #[cfg(not(feature = "parallel"))]
    {
        (0..n).map(f).collect()
    }
}

/// Uniformly spaced axis with `n >= 2` points from `lo` to `hi` inclusive.
pub fn linspace(lo: f64, hi: f64, n: usize) -> Result<Vec<f64>> {
    if !(lo.is_finite() && hi.is_finite() && hi > lo) {
        return Err(Error::InvalidArgument(format!("axis bounds [{lo}, {hi}] invalid")));
    }
    if n < 2 {
        return Err(Error::InvalidArgument("axis needs at least 2 points".into()));
    }
    let step = (hi - lo) / (n - 1) as f64;
    Ok((0..n).map(|i| if i == n - 1 { hi } else { lo + step * i as f64 }).collect())
}

fn check_axis(axis: &[f64]) -> Result<()> {
    if axis.is_empty() {
        return Err(Error::InvalidArgument("axis must be non-empty".into()));
    }
    if axis.iter().any(|x| !x.is_finite()) {
        return Err(Error::NonFinite { context: "grid axis".into() });
    }
    if axis.windows(2).any(|w| w[1] <= w[0]) {
        return Err(Error::InvalidArgument("axis must be strictly increasing".into()));
    }
    Ok(())
}

/// Trapezoid weights for a strictly increasing axis; zero for a single point.
fn trapezoid_weights(axis: &[f64]) -> Vec<f64> {
    let n = axis.len();
    if n == 1 {
        return vec![0.0];
    }
    (0..n)
        .map(|i| {
            let left = if i == 0 { axis[0] } else { axis[i - 1] };
            let right = if i == n - 1 { axis[n - 1] } else { axis[i + 1] };
            0.5 * (right - left)
        })
        .collect()
}

#[derive(Serialize, Deserialize)]
struct GridRepr {
    p_axis: Vec<f64>,
    q_axis: Vec<f64>,
    values: Vec<Vec<f64>>,
}

/// Real-valued field sampled on a rectangular (p, q) grid. Rows follow the
/// p axis, columns the q axis.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(into = "GridRepr", try_from = "GridRepr")]
pub struct PhaseGrid {
    p_axis: Vec<f64>,
    q_axis: Vec<f64>,
    values: nalgebra::DMatrix<f64>,
}

impl PhaseGrid {
    pub fn new(p_axis: Vec<f64>, q_axis: Vec<f64>, values: nalgebra::DMatrix<f64>) -> Result<Self> {
        check_axis(&p_axis)?;
        check_axis(&q_axis)?;
        if values.nrows() != p_axis.len() || values.ncols() != q_axis.len() {
            return Err(Error::DimensionMismatch {
                left: p_axis.len() * q_axis.len(),
                right: values.nrows() * values.ncols(),
            });
        }
        if values.iter().any(|v| !v.is_finite()) {
            return Err(Error::NonFinite { context: "grid values".into() });
        }
        Ok(PhaseGrid { p_axis, q_axis, values })
    }

    pub fn p_axis(&self) -> &[f64] {
        &self.p_axis
    }

    pub fn q_axis(&self) -> &[f64] {
        &self.q_axis
    }

    pub fn values(&self) -> &nalgebra::DMatrix<f64> {
        &self.values
    }

    pub fn value(&self, i: usize, j: usize) -> f64 {
        self.values[(i, j)]
    }

    pub fn min_value(&self) -> f64 {
        self.values.iter().copied().fold(f64::INFINITY, f64::min)
    }

    pub fn max_value(&self) -> f64 {
        self.values.iter().copied().fold(f64::NEG_INFINITY, f64::max)
    }

    /// Trapezoid-rule integral over the grid span.
    pub fn integral(&self) -> f64 {
        self.masked_integral(|_| true)
    }

    /// Trapezoid-rule integral restricted to points where `keep` holds.
    pub fn masked_integral(&self, keep: impl Fn(PhasePoint) -> bool) -> f64 {
        let wp = trapezoid_weights(&self.p_axis);
        let wq = trapezoid_weights(&self.q_axis);
        let mut sum = 0.0;
        for (i, &pwi) in wp.iter().enumerate() {
            for (j, &qwj) in wq.iter().enumerate() {
                if keep(PhasePoint::new(self.p_axis[i], self.q_axis[j])) {
                    sum += pwi * qwj * self.values[(i, j)];
                }
            }
        }
        sum
    }

    /// Trapezoid integral of the pointwise product with `other`, which must
    /// share both axes. 2 pi times this approximates Tr(AB) when the grids
    /// hold W_A and W_B.
    pub fn overlap_integral(&self, other: &PhaseGrid) -> Result<f64> {
        if self.p_axis != other.p_axis || self.q_axis != other.q_axis {
            return Err(Error::InvalidArgument("overlap requires identical axes".into()));
        }
        let wp = trapezoid_weights(&self.p_axis);
        let wq = trapezoid_weights(&self.q_axis);
        let mut sum = 0.0;
        for (i, &pwi) in wp.iter().enumerate() {
            for (j, &qwj) in wq.iter().enumerate() {
                sum += pwi * qwj * self.values[(i, j)] * other.values[(i, j)];
            }
        }
        Ok(sum)
    }

    /// CSV export: header row carries the q axis, first column the p axis.
    pub fn to_csv<W: std::io::Write>(&self, out: &mut W) -> std::io::Result<()> {
        write!(out, "p/q")?;
        for q in &self.q_axis {
            write!(out, ",{q:.16e}")?;
        }
        writeln!(out)?;
        for (i, p) in self.p_axis.iter().enumerate() {
            write!(out, "{p:.16e}")?;
            for j in 0..self.q_axis.len() {
                write!(out, ",{:.16e}", self.values[(i, j)])?;
            }
            writeln!(out)?;
        }
        Ok(())
    }
}

impl From<PhaseGrid> for GridRepr {
    fn from(g: PhaseGrid) -> GridRepr {
        let values = (0..g.p_axis.len())
            .map(|i| (0..g.q_axis.len()).map(|j| g.values[(i, j)]).collect())
            .collect();
        GridRepr { p_axis: g.p_axis, q_axis: g.q_axis, values }
    }
}

impl TryFrom<GridRepr> for PhaseGrid {
    type Error = Error;
    fn try_from(r: GridRepr) -> Result<Self> {
        let rows = r.values.len();
        let cols = r.values.first().map_or(0, Vec::len);
        if r.values.iter().any(|row| row.len() != cols) {
            return Err(Error::InvalidArgument("ragged grid rows".into()));
        }
        let values = nalgebra::DMatrix::from_fn(rows, cols, |i, j| r.values[i][j]);
        PhaseGrid::new(r.p_axis, r.q_axis, values)
    }
}

/// Reusable Wigner-function evaluator for one Hermitian operator.
///
/// Construction performs two Hermitian eigendecompositions: one of the
/// operator (so low-rank operators cost proportionally less per point) and
/// one of the fixed generator Y = i(a - a^dag). Each point then needs two
/// dense matrix-vector products per retained spectral component, using the
/// exact factorization U(p,q) = Phi exp(i s Y) Phi^dag with
/// alpha = s e^{i phi} and Phi = diag(e^{i n phi}).
pub struct WignerEvaluator {
    dim: usize,
    weights: Vec<f64>,
    components: ComplexMatrix,
    y_vectors: ComplexMatrix,
    y_values: Vec<f64>,
}

impl WignerEvaluator {
    pub fn new(a: &FockOperator) -> Result<Self> {
        let (evals, evecs) = eigh(a)?;
        let d = a.dim().get();
        let scale = evals.iter().fold(0.0f64, |m, &w| m.max(w.abs()));
        let keep: Vec<usize> =
            (0..d).filter(|&k| evals[k].abs() > SPECTRAL_CUTOFF * scale).collect();
        let mut weights = Vec::with_capacity(keep.len());
        let mut components = ComplexMatrix::zeros(d, keep.len());
        for (col, &k) in keep.iter().enumerate() {
            weights.push(evals[k]);
            components.set_column(col, &evecs.matrix().column(k));
        }
        // Y = i(a - a^dag): tridiagonal Hermitian, fixed per dimension.
        let y = ComplexMatrix::from_fn(d, d, |m, n| {
            if n == m + 1 {
                Complex64::new(0.0, (n as f64).sqrt())
            } else if m == n + 1 {
                Complex64::new(0.0, -(m as f64).sqrt())
            } else {
                Complex64::ZERO
            }
        });
        let (y_values, y_vectors) = eigh_matrix(&y);
        Ok(WignerEvaluator { dim: d, weights, components, y_vectors, y_values })
    }

    /// W(p, q) of the underlying operator.
    pub fn eval(&self, x: PhasePoint) -> f64 {
        let alpha = x.label().0;
        let s = alpha.norm();
        let phi = alpha.im.atan2(alpha.re);
        let d = self.dim;
        let mut total = 0.0;
        let mut work = nalgebra::DVector::<Complex64>::zeros(d);
        for (col, &w) in self.weights.iter().enumerate() {
            // y = exp(-i s Y) Phi^dag u; the outer Phi drops out of |y_n|.
            for n in 0..d {
                work[n] =
                    self.components[(n, col)] * Complex64::new(0.0, -(n as f64) * phi).exp();
            }
            let mut in_y = self.y_vectors.ad_mul(&work);
            for (k, &mu) in self.y_values.iter().enumerate() {
                in_y[k] *= Complex64::new(0.0, -s * mu).exp();
            }
            let back = &self.y_vectors * in_y;
            let mut parity = 0.0;
            for n in 0..d {
                let m = back[n].norm_sqr();
                parity += if n % 2 == 0 { m } else { -m };
            }
            total += w * parity;
        }
        total / std::f64::consts::PI
    }
}

/// Wigner function of a Hermitian operator at one phase point.
pub fn wigner_point(a: &FockOperator, x: PhasePoint) -> Result<f64> {
    Ok(WignerEvaluator::new(a)?.eval(x))
}

/// Closed-form Wigner function of the circular projector E_N, as a function
/// of r^2 = 2(p^2 + q^2):
/// W(r^2) = (1/pi) sum_{n=0}^{N} (-1)^n L_n(r^2) e^{-r^2/2}.
pub fn wigner_series_circular(n_max: usize, r2: f64) -> f64 {
    alternating_laguerre_sum(n_max, r2) / std::f64::consts::PI
}

/// Wigner function sampled on the product grid of the two axes.
pub fn wigner_grid(a: &FockOperator, p_axis: &[f64], q_axis: &[f64]) -> Result<PhaseGrid> {
    check_axis(p_axis)?;
    check_axis(q_axis)?;
    let evaluator = WignerEvaluator::new(a)?;
    let (np, nq) = (p_axis.len(), q_axis.len());
    let cells = map_cells(np * nq, |k| {
        evaluator.eval(PhasePoint::new(p_axis[k / nq], q_axis[k % nq]))
    });
    let values = nalgebra::DMatrix::from_fn(np, nq, |i, j| cells[i * nq + j]);
    PhaseGrid::new(p_axis.to_vec(), q_axis.to_vec(), values)
}

/// Husimi value <z|A|z> of a Hermitian operator.
///
/// The coherent state is truncated at the working dimension, so keep
/// |z|^2 well below d (tail = coherent_norm_deficit).
pub fn husimi(a: &FockOperator, z: ComplexLabel) -> Result<f64> {
    let defect = a.hermiticity_defect();
    if defect > HERMITIAN_TOL {
        return Err(Error::NotHermitian { defect });
    }
    let s = coherent_state(z, a.dim());
    Ok(a.expectation(&s).expect("dimensions match by construction").re)
}

/// Husimi function sampled on the product grid of the two axes.
///
/// Uses the spectral expansion of A, so projector-like operators cost
/// rank * d per point after the one-off decomposition.
pub fn husimi_grid(a: &FockOperator, p_axis: &[f64], q_axis: &[f64]) -> Result<PhaseGrid> {
    check_axis(p_axis)?;
    check_axis(q_axis)?;
    let (evals, evecs) = eigh(a)?;
    let d = a.dim().get();
    let scale = evals.iter().fold(0.0f64, |m, &w| m.max(w.abs()));
    let keep: Vec<usize> = (0..d).filter(|&k| evals[k].abs() > SPECTRAL_CUTOFF * scale).collect();
    let weights: Vec<f64> = keep.iter().map(|&k| evals[k]).collect();
    let mut components = ComplexMatrix::zeros(d, keep.len());
    for (col, &k) in keep.iter().enumerate() {
        components.set_column(col, &evecs.matrix().column(k));
    }
    let (np, nq) = (p_axis.len(), q_axis.len());
    let dim = a.dim();
    let cells = map_cells(np * nq, |cell| {
        let x = PhasePoint::new(p_axis[cell / nq], q_axis[cell % nq]);
        let s = coherent_state(x.label(), dim);
        let overlaps = components.ad_mul(s.amplitudes());
        weights.iter().zip(overlaps.iter()).map(|(&w, o)| w * o.norm_sqr()).sum()
    });
    let values = nalgebra::DMatrix::from_fn(np, nq, |i, j| cells[i * nq + j]);
    PhaseGrid::new(p_axis.to_vec(), q_axis.to_vec(), values)
}

/// Tr(E rho) clamped to [0, 1], after validating that `rho` is a density
/// operator and `e` a projector.
pub fn region_probability(rho: &FockOperator, e: &FockOperator) -> Result<f64> {
    Ok(region_probability_with_raw(rho, e)?.0)
}

/// Clamped probability together with the raw trace value for diagnostics.
pub fn region_probability_with_raw(rho: &FockOperator, e: &FockOperator) -> Result<(f64, f64)> {
    validate_density(rho)?;
    validate_projector(e, PROJECTOR_TOL)?;
    if rho.dim() != e.dim() {
        return Err(Error::DimensionMismatch { left: rho.dim().get(), right: e.dim().get() });
    }
    let d = rho.dim().get();
    let mut tr = Complex64::ZERO;
    for i in 0..d {
        for j in 0..d {
            tr += e.matrix()[(i, j)] * rho.matrix()[(j, i)];
        }
    }
    let raw = tr.re;
    Ok((raw.clamp(0.0, 1.0), raw))
}

/// Point-mass positive P-function: a finite mixture of coherent states.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "Vec<(f64, ComplexLabel)>", into = "Vec<(f64, ComplexLabel)>")]
pub struct CoherentMixture {
    terms: Vec<(f64, ComplexLabel)>,
}

impl CoherentMixture {
    pub fn new(terms: Vec<(f64, ComplexLabel)>) -> Result<Self> {
        if terms.is_empty() {
            return Err(Error::InvalidArgument("mixture needs at least one term".into()));
        }
        if terms.iter().any(|(w, z)| !w.is_finite() || *w <= 0.0 || !z.0.re.is_finite() || !z.0.im.is_finite()) {
            return Err(Error::InvalidArgument("mixture weights must be positive and finite".into()));
        }
        let total: f64 = terms.iter().map(|(w, _)| w).sum();
        if (total - 1.0).abs() > 1e-12 {
            return Err(Error::InvalidArgument(format!("mixture weights sum to {total}, expected 1")));
        }
        Ok(CoherentMixture { terms })
    }

    pub fn terms(&self) -> &[(f64, ComplexLabel)] {
        &self.terms
    }

    /// Density operator of the mixture in the given basis, renormalized to
    /// unit trace (the truncated coherent states carry Poisson tails).
    pub fn density(&self, dim: FockDim) -> FockOperator {
        let d = dim.get();
        let mut mat = ComplexMatrix::zeros(d, d);
        for (w, z) in &self.terms {
            let s = coherent_state(*z, dim);
            let wc = Complex64::new(*w, 0.0);
            for i in 0..d {
                for j in 0..d {
                    mat[(i, j)] += wc * s.amplitudes()[i] * s.amplitudes()[j].conj();
                }
            }
        }
        let tr: f64 = (0..d).map(|i| mat[(i, i)].re).sum();
        FockOperator::from_matrix_unchecked(dim, mat.map(|c| c / tr))
    }
}

impl From<CoherentMixture> for Vec<(f64, ComplexLabel)> {
    fn from(m: CoherentMixture) -> Self {
        m.terms
    }
}

impl TryFrom<Vec<(f64, ComplexLabel)>> for CoherentMixture {
    type Error = Error;
    fn try_from(terms: Vec<(f64, ComplexLabel)>) -> Result<Self> {
        CoherentMixture::new(terms)
    }
}

/// Probability that the mixture lies in the disc of the rank-(N+1) circular
/// projector, both exactly and in the sharp-support approximation.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PFunctionProbability {
    /// sum_i w_i <z_i|E_N|z_i> = sum_i w_i PoissonCDF(N; |z_i|^2).
    pub exact: f64,
    /// sum of weights of terms with |z_i|^2 < N: the sharp-cutoff reading of
    /// the region as {|z|^2 < N}.
    pub cutoff: f64,
}

/// Exact and sharp-cutoff probability of the disc region for a point-mass
/// P-function. The exact value uses the closed Poisson form of <z|E_N|z>,
/// so it carries no truncation error.
pub fn pfunction_probability(mix: &CoherentMixture, n_max: usize) -> PFunctionProbability {
    let mut exact = 0.0;
    let mut cutoff = 0.0;
    for (w, z) in mix.terms() {
        exact += w * crate::special::poisson_cdf(n_max, z.norm_sqr());
        if z.norm_sqr() < n_max as f64 {
            cutoff += w;
        }
    }
    PFunctionProbability { exact, cutoff }
}
