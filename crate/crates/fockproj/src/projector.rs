//! Projectors onto phase-space regions.
//!
//! The quasi-projector onto a disc of radius R, built by integrating coherent
//! projectors over the disc, is diagonal in the number basis with eigenvalues
//! lambda_n = P(n+1, R^2). Rounding those eigenvalues to 0/1 gives the exact
//! projector onto the lowest number states; displacement, rotation, and
//! squeezing transport it to circles and ellipses anywhere in the plane.
//! Level sets of K = p^2/2 + U(q) for a confining potential U supply exact
//! projectors onto more general regions.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::dynamics::build_hamiltonian;
use crate::error::{Error, Result};
use crate::fock::{
    displacement, eigh, rotate, squeeze, FockDim, FockOperator, PhasePoint,
};
use crate::special::lower_gamma_p;
use crate::ComplexMatrix;

/// Default eigenvalue cut when rounding a quasi-projector to a projector.
pub const DEFAULT_ROUND_THRESHOLD: f64 = 0.5;

/// Slack allowed on quasi-projector eigenvalues before rounding refuses.
pub const ROUND_EIGEN_SLACK: f64 = 1e-10;

/// Eigenvalue profile of a circular quasi-projector, indexed by n.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EigenProfile {
    lambdas: Vec<f64>,
}

impl EigenProfile {
    pub fn values(&self) -> &[f64] {
        &self.lambdas
    }

    pub fn len(&self) -> usize {
        self.lambdas.len()
    }

    pub fn is_empty(&self) -> bool {
        self.lambdas.is_empty()
    }

    pub fn into_vec(self) -> Vec<f64> {
        self.lambdas
    }
}

/// Confining potential U(q) defining K = p^2/2 + U(q).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PotentialSpec {
    /// U(q) = q^2 / 2.
    Harmonic,
    /// U(q) = sum_k c_k q^k with the listed coefficients, constant term first.
    Polynomial(Vec<f64>),
    /// Piecewise-linear interpolation of samples on a strictly increasing
    /// grid. The grid must cover the position spectrum of the working basis
    /// (roughly [-sqrt(2d), sqrt(2d)]).
    Tabulated { grid: Vec<f64>, values: Vec<f64> },
}

impl PotentialSpec {
    pub fn validate(&self) -> Result<()> {
        match self {
            PotentialSpec::Harmonic => Ok(()),
            PotentialSpec::Polynomial(coeffs) => {
                if coeffs.is_empty() {
                    return Err(Error::InvalidArgument("polynomial needs coefficients".into()));
                }
                if coeffs.iter().any(|c| !c.is_finite()) {
                    return Err(Error::NonFinite { context: "polynomial coefficients".into() });
                }
                Ok(())
            }
            PotentialSpec::Tabulated { grid, values } => {
                if grid.len() < 2 {
                    return Err(Error::InvalidArgument("tabulated potential needs at least 2 points".into()));
                }
                if grid.len() != values.len() {
                    return Err(Error::DimensionMismatch { left: grid.len(), right: values.len() });
                }
                if grid.iter().any(|x| !x.is_finite()) || values.iter().any(|x| !x.is_finite()) {
                    return Err(Error::NonFinite { context: "tabulated potential".into() });
                }
                if grid.windows(2).any(|w| w[1] <= w[0]) {
                    return Err(Error::InvalidArgument("tabulated grid must be strictly increasing".into()));
                }
                Ok(())
            }
        }
    }

    /// U(q). Tabulated potentials are defined only on their grid span.
    pub fn eval(&self, q: f64) -> Result<f64> {
        match self {
            PotentialSpec::Harmonic => Ok(0.5 * q * q),
            PotentialSpec::Polynomial(coeffs) => {
                Ok(coeffs.iter().rev().fold(0.0, |acc, &c| acc * q + c))
            }
            PotentialSpec::Tabulated { grid, values } => {
                let (first, last) = (grid[0], grid[grid.len() - 1]);
                if q < first || q > last {
                    return Err(Error::InvalidArgument(format!(
                        "tabulated potential spans [{first:.3}, {last:.3}] but position node {q:.3} falls outside; widen the table or lower the dimension"
                    )));
                }
                let hi = grid.partition_point(|&x| x < q).max(1).min(grid.len() - 1);
                let lo = hi - 1;
                let w = (q - grid[lo]) / (grid[hi] - grid[lo]);
                Ok(values[lo] * (1.0 - w) + values[hi] * w)
            }
        }
    }
}

/// Phase-space region selectable from configuration files.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum RegionSpec {
    /// Disc of coherent-label radius R around `center`.
    Circle {
        #[serde(rename = "R")]
        radius: f64,
        center: PhasePoint,
    },
    /// Squeezed and rotated disc of the given rank around `center`.
    Ellipse {
        center: PhasePoint,
        #[serde(with = "complex_pair")]
        squeeze: Complex64,
        rotation: f64,
        rank: usize,
    },
    /// Sublevel set of K = p^2/2 + U(q) holding the lowest `levels` states.
    General { potential: PotentialSpec, levels: usize },
}

impl RegionSpec {
    pub fn validate(&self) -> Result<()> {
        match self {
            RegionSpec::Circle { radius, .. } => {
                if !radius.is_finite() || *radius <= 0.0 {
                    return Err(Error::InvalidArgument(format!("circle radius must be positive, got {radius}")));
                }
                Ok(())
            }
            RegionSpec::Ellipse { squeeze, rotation, rank, .. } => {
                if !squeeze.re.is_finite() || !squeeze.im.is_finite() || !rotation.is_finite() {
                    return Err(Error::NonFinite { context: "ellipse parameters".into() });
                }
                if *rank == 0 {
                    return Err(Error::InvalidArgument("ellipse rank must be at least 1".into()));
                }
                Ok(())
            }
            RegionSpec::General { potential, levels } => {
                if *levels == 0 {
                    return Err(Error::InvalidArgument("general region needs at least 1 level".into()));
                }
                potential.validate()
            }
        }
    }
}

mod complex_pair {
    use num_complex::Complex64;
    use serde::{Deserialize, Deserializer, Serialize, Serializer};

    pub fn serialize<S: Serializer>(c: &Complex64, s: S) -> std::result::Result<S::Ok, S::Error> {
        [c.re, c.im].serialize(s)
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> std::result::Result<Complex64, D::Error> {
        let [re, im] = <[f64; 2]>::deserialize(d)?;
        Ok(Complex64::new(re, im))
    }
}

fn check_radius(radius: f64) -> Result<()> {
    if !radius.is_finite() || radius < 0.0 {
        return Err(Error::InvalidArgument(format!("radius must be a finite non-negative real, got {radius}")));
    }
    Ok(())
}

/// Quasi-projector eigenvalues lambda_n = P(n+1, R^2) for n = 0..count-1.
///
/// lambda_n is the probability weight the disc of radius R assigns to |n>:
/// near 1 for n well below R^2, near 0 well above, crossing 1/2 over a band
/// of width O(R) around n = R^2.
pub fn lambda_profile(radius: f64, count: usize) -> Result<EigenProfile> {
    check_radius(radius)?;
    if count == 0 {
        return Err(Error::InvalidArgument("profile needs at least one entry".into()));
    }
    let x = radius * radius;
    let lambdas = (0..count).map(|n| lower_gamma_p(n + 1, x)).collect();
    Ok(EigenProfile { lambdas })
}

/// Diagonal quasi-projector diag(lambda_0, ..., lambda_{d-1}) for the disc of
/// radius R centred at the origin.
pub fn quasi_projector(radius: f64, dim: FockDim) -> Result<FockOperator> {
    check_radius(radius)?;
    let d = dim.get();
    if radius * radius > d as f64 {
        return Err(Error::DimensionTooSmall {
            dim: d,
            needed: format!("R^2 = {:.2} exceeds the basis; need d >= R^2", radius * radius),
        });
    }
    let profile = lambda_profile(radius, d)?;
    FockOperator::from_real_diagonal(dim, profile.values())
}

/// Exact rank-(N+1) projector onto span{|0>, ..., |N>}.
pub fn exact_projector(n_max: usize, dim: FockDim) -> Result<FockOperator> {
    let d = dim.get();
    if n_max >= d {
        return Err(Error::DimensionTooSmall {
            dim: d,
            needed: format!("rank {} projector needs d >= {}", n_max + 1, n_max + 1),
        });
    }
    let diag: Vec<f64> = (0..d).map(|n| if n <= n_max { 1.0 } else { 0.0 }).collect();
    FockOperator::from_real_diagonal(dim, &diag)
}

/// Exact projector onto the disc of rank N+1 centred at `center`:
/// U(center) E U(center)^dag. Unitary conjugation keeps it exactly
/// idempotent; choose d large enough that the displaced region is far from
/// the truncation edge (d >= N + 4|z|^2 + 25 is comfortable).
pub fn displaced_projector(n_max: usize, center: PhasePoint, dim: FockDim) -> Result<FockOperator> {
    let e = exact_projector(n_max, dim)?;
    let u = displacement(center, dim);
    Ok(e.conjugated_by(&u))
}

/// Exact projector onto an elliptical region: the base rank-`rank` disc is
/// squeezed by `xi`, rotated by `rotation`, then displaced to `center`.
pub fn elliptical_projector(
    center: PhasePoint,
    xi: Complex64,
    rotation: f64,
    rank: usize,
    dim: FockDim,
) -> Result<FockOperator> {
    if rank == 0 {
        return Err(Error::InvalidArgument("ellipse rank must be at least 1".into()));
    }
    let e = exact_projector(rank - 1, dim)?;
    let u = &(&displacement(center, dim) * &rotate(rotation, dim)) * &squeeze(xi, dim);
    Ok(e.conjugated_by(&u))
}

/// Result of the level-set construction: the projector and the boundary
/// energy K separating included from excluded levels.
#[derive(Debug, Clone)]
pub struct GeneralRegion {
    pub projector: FockOperator,
    pub boundary_energy: f64,
}

/// Exact projector onto the lowest `levels` eigenstates of
/// K = p^2/2 + U(q), together with the boundary energy (midpoint of the
/// last included and first excluded eigenvalue). The classical region is the
/// sublevel set {(p, q) : p^2/2 + U(q) <= boundary}.
///
/// `levels <= d/2` keeps the working band in the half of the spectrum that
/// the truncated basis resolves faithfully.
pub fn general_region_projector(
    potential: &PotentialSpec,
    levels: usize,
    dim: FockDim,
) -> Result<GeneralRegion> {
    let d = dim.get();
    if levels == 0 {
        return Err(Error::InvalidArgument("general region needs at least 1 level".into()));
    }
    if levels > d / 2 {
        return Err(Error::DimensionTooSmall {
            dim: d,
            needed: format!("levels = {levels} must not exceed d/2 = {}", d / 2),
        });
    }
    let k = build_hamiltonian(potential, dim)?;
    let (evals, vecs) = eigh(&k)?;

    // Confinement heuristic: a confining 1D well has a simple spectrum, so
    // consecutive gaps in the working band stay comparable to the mean gap.
    // Non-confining potentials (e.g. U = 0) produce left/right-mover
    // degeneracies that collapse the minimum gap to roundoff.
    let band = &evals[0..(2 * levels).min(d)];
    let spread = band[band.len() - 1] - band[0];
    if spread <= 0.0 {
        return Err(Error::NotConfining { reason: "working band of K is degenerate".into() });
    }
    let mean_gap = spread / (band.len() - 1) as f64;
    let min_gap = band.windows(2).map(|w| w[1] - w[0]).fold(f64::INFINITY, f64::min);
    if min_gap < 1e-6 * mean_gap {
        return Err(Error::NotConfining {
            reason: format!(
                "eigenvalue spacing collapses in the working band (min gap {min_gap:.3e} vs mean {mean_gap:.3e})"
            ),
        });
    }

    let projector = span_projector(vecs.matrix(), &(0..levels).collect::<Vec<_>>(), dim);
    let boundary_energy = 0.5 * (evals[levels - 1] + evals[levels]);
    Ok(GeneralRegion { projector, boundary_energy })
}

/// Round a Hermitian operator with eigenvalues in [0, 1] (within
/// [`ROUND_EIGEN_SLACK`]) to the exact projector onto the eigenspaces whose
/// eigenvalues reach `threshold`.
pub fn round_to_projector(p: &FockOperator, threshold: f64) -> Result<FockOperator> {
    if !threshold.is_finite() || threshold <= 0.0 || threshold >= 1.0 {
        return Err(Error::InvalidArgument(format!("threshold must lie in (0,1), got {threshold}")));
    }
    let (evals, vecs) = eigh(p)?;
    for &lam in &evals {
        if !(-ROUND_EIGEN_SLACK..=1.0 + ROUND_EIGEN_SLACK).contains(&lam) {
            return Err(Error::EigenvalueOutOfRange {
                value: lam,
                lo: -ROUND_EIGEN_SLACK,
                hi: 1.0 + ROUND_EIGEN_SLACK,
            });
        }
    }
    let keep: Vec<usize> = (0..evals.len()).filter(|&i| evals[i] >= threshold).collect();
    Ok(span_projector(vecs.matrix(), &keep, p.dim()))
}

/// Projector onto the span of the selected columns. The columns come from an
/// eigensolver and are orthonormal to solver precision; a thin QR pass
/// tightens them to machine precision so the product is idempotent to 1e-12
/// regardless of dimension.
fn span_projector(basis: &ComplexMatrix, columns: &[usize], dim: FockDim) -> FockOperator {
    let d = dim.get();
    if columns.is_empty() {
        return FockOperator::zeros(dim);
    }
    let mut block = ComplexMatrix::zeros(d, columns.len());
    for (out_col, &src_col) in columns.iter().enumerate() {
        block.set_column(out_col, &basis.column(src_col));
    }
    let q = block.qr().q();
    let mat = &q * q.adjoint();
    FockOperator::from_matrix_unchecked(dim, mat)
}

/// Number of quasi-projector eigenvalues at or above 1/2 for a disc of
/// radius R: the rank of the matching exact projector. The largest kept
/// index N satisfies lambda_N >= 1/2 > lambda_{N+1} and sits within the
/// transition band of n = R^2. Discs smaller than the half-weight of the
/// vacuum (R^2 < ln 2) fall back to rank 1.
pub fn rank_for_radius(radius: f64) -> usize {
    let x = radius * radius;
    let lam = |n: usize| lower_gamma_p(n + 1, x);
    if lam(0) < 0.5 {
        return 1;
    }
    let mut n = (x.round() as usize).saturating_sub(1);
    while n > 0 && lam(n) < 0.5 {
        n -= 1;
    }
    while lam(n + 1) >= 0.5 {
        n += 1;
    }
    n + 1
}

/// A region projector together with its rank and, for level-set regions, the
/// boundary energy.
#[derive(Debug, Clone)]
pub struct RegionProjector {
    pub operator: FockOperator,
    pub rank: usize,
    pub boundary_energy: Option<f64>,
}

/// Build the exact projector described by a [`RegionSpec`].
pub fn region_projector(spec: &RegionSpec, dim: FockDim) -> Result<RegionProjector> {
    spec.validate()?;
    match spec {
        RegionSpec::Circle { radius, center } => {
            let rank = rank_for_radius(*radius);
            let operator = displaced_projector(rank - 1, *center, dim)?;
            Ok(RegionProjector { operator, rank, boundary_energy: None })
        }
        RegionSpec::Ellipse { center, squeeze, rotation, rank } => {
            let operator = elliptical_projector(*center, *squeeze, *rotation, *rank, dim)?;
            Ok(RegionProjector { operator, rank: *rank, boundary_energy: None })
        }
        RegionSpec::General { potential, levels } => {
            let region = general_region_projector(potential, *levels, dim)?;
            Ok(RegionProjector {
                operator: region.projector,
                rank: *levels,
                boundary_energy: Some(region.boundary_energy),
            })
        }
    }
}
