//! Class operators and the decoherence functional for phase-space histories.
//!
//! A history pins the system inside or outside a phase-space region at each
//! of several times. Branches multiply Heisenberg-picture projectors into
//! class operators C_b, and D(b, b') = Tr(C_b rho0 C_b'^dag) collects their
//! interference. When the regions at successive times are images of one
//! region under the classical flow, every Heisenberg projector in a chain is
//! the same operator, the chain collapses to a single projector, and the
//! off-diagonals of D vanish to machine precision: decoherence is exact, and
//! a state prepared inside the region follows the classical trajectory with
//! probability 1.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::dynamics::{classical_flow, heisenberg_transform};
use crate::error::{Error, Result};
use crate::fock::{
    coherent_norm_deficit, coherent_state, number_state, validate_density, validate_projector,
    FockDim, FockOperator, PhasePoint, PROJECTOR_TOL,
};
use crate::projector::{displaced_projector, region_projector, RegionSpec};
use crate::ComplexMatrix;

/// Hard cap on materialized branches (2^12: twelve binary steps).
pub const MAX_BRANCHES: usize = 4096;

/// Default relative tolerance (times the largest diagonal) for declaring a
/// functional decoherent.
pub const DEFAULT_DECOHERENCE_TOL: f64 = 1e-9;

/// Completeness gate: alternatives at one time must sum to the identity
/// within this.
pub const COMPLETENESS_TOL: f64 = 1e-10;

/// Label used by the helpers for the in-region alternative.
pub const IN_LABEL: &str = "in";
/// Label used by the helpers for the out-of-region alternative.
pub const OUT_LABEL: &str = "out";

/// One alternative at one time: a labeled exact projector.
#[derive(Debug, Clone)]
pub struct BranchAlternative {
    pub label: String,
    pub projector: FockOperator,
}

/// All alternatives offered at one time.
#[derive(Debug, Clone)]
pub struct HistoryStep {
    pub time: f64,
    pub alternatives: Vec<BranchAlternative>,
}

/// Validated history: initial state plus a time-ordered sequence of complete,
/// mutually orthogonal projector sets.
#[derive(Debug, Clone)]
pub struct HistorySpec {
    rho0: FockOperator,
    steps: Vec<HistoryStep>,
}

impl HistorySpec {
    pub fn new(rho0: FockOperator, steps: Vec<HistoryStep>) -> Result<Self> {
        validate_density(&rho0)?;
        if steps.is_empty() {
            return Err(Error::InvalidHistory { reason: "no steps".into() });
        }
        let mut branches: usize = 1;
        for step in &steps {
            branches = branches.saturating_mul(step.alternatives.len().max(1));
        }
        if branches > MAX_BRANCHES {
            return Err(Error::TooManyBranches { count: branches, limit: MAX_BRANCHES });
        }
        for w in steps.windows(2) {
            if w[1].time <= w[0].time {
                return Err(Error::InvalidHistory {
                    reason: format!("times must increase strictly ({} then {})", w[0].time, w[1].time),
                });
            }
        }
        let dim = rho0.dim();
        for (idx, step) in steps.iter().enumerate() {
            if !step.time.is_finite() {
                return Err(Error::InvalidHistory { reason: format!("step {idx} time not finite") });
            }
            if step.alternatives.is_empty() {
                return Err(Error::InvalidHistory { reason: format!("step {idx} has no alternatives") });
            }
            let mut sum = FockOperator::zeros(dim);
            for alt in &step.alternatives {
                if alt.projector.dim() != dim {
                    return Err(Error::DimensionMismatch {
                        left: dim.get(),
                        right: alt.projector.dim().get(),
                    });
                }
                validate_projector(&alt.projector, PROJECTOR_TOL)?;
                sum = &sum + &alt.projector;
            }
            let completeness = sum.max_abs_diff(&FockOperator::identity(dim));
            if completeness > COMPLETENESS_TOL {
                return Err(Error::InvalidHistory {
                    reason: format!("step {idx} alternatives sum to identity only within {completeness:.3e}"),
                });
            }
            for (i, a) in step.alternatives.iter().enumerate() {
                for b in &step.alternatives[i + 1..] {
                    if a.label == b.label {
                        return Err(Error::InvalidHistory {
                            reason: format!("step {idx} repeats label {:?}", a.label),
                        });
                    }
                    let cross = (&a.projector * &b.projector).max_abs();
                    if cross > PROJECTOR_TOL {
                        return Err(Error::InvalidHistory {
                            reason: format!(
                                "step {idx} alternatives {:?} and {:?} overlap ({cross:.3e})",
                                a.label, b.label
                            ),
                        });
                    }
                }
            }
        }
        Ok(HistorySpec { rho0, steps })
    }

    pub fn rho0(&self) -> &FockOperator {
        &self.rho0
    }

    pub fn steps(&self) -> &[HistoryStep] {
        &self.steps
    }

    pub fn dim(&self) -> FockDim {
        self.rho0.dim()
    }

    pub fn branch_count(&self) -> usize {
        self.steps.iter().map(|s| s.alternatives.len()).product()
    }

    /// Branch label chains in enumeration order (first step varies slowest).
    pub fn branch_labels(&self) -> Vec<Vec<String>> {
        let mut all = vec![Vec::new()];
        for step in &self.steps {
            let mut next = Vec::with_capacity(all.len() * step.alternatives.len());
            for prefix in &all {
                for alt in &step.alternatives {
                    let mut chain = prefix.clone();
                    chain.push(alt.label.clone());
                    next.push(chain);
                }
            }
            all = next;
        }
        all
    }
}

/// Heisenberg projector at one step.
fn heisenberg_projector(e: &FockOperator, t: f64) -> ComplexMatrix {
    heisenberg_transform(e.matrix(), t)
}

/// Class operator C = P_n(t_n) ... P_1(t_1) for one branch, as Heisenberg
/// projectors multiplied latest-first.
pub fn class_operator(spec: &HistorySpec, branch: &[impl AsRef<str>]) -> Result<FockOperator> {
    if branch.len() != spec.steps.len() {
        return Err(Error::InvalidHistory {
            reason: format!("branch has {} labels for {} steps", branch.len(), spec.steps.len()),
        });
    }
    let dim = spec.dim();
    let mut chain = ComplexMatrix::identity(dim.get(), dim.get());
    for (step, label) in spec.steps.iter().zip(branch) {
        let alt = step
            .alternatives
            .iter()
            .find(|a| a.label == label.as_ref())
            .ok_or_else(|| Error::InvalidHistory {
                reason: format!("unknown label {:?} at time {}", label.as_ref(), step.time),
            })?;
        chain = heisenberg_projector(&alt.projector, step.time) * chain;
    }
    Ok(FockOperator::from_matrix_unchecked(dim, chain))
}

/// Decoherence functional over all branch pairs, with summary statistics.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct DecoherenceReport {
    /// Branch label chains in row/column order of `functional`.
    pub branch_labels: Vec<Vec<String>>,
    /// D(b, b') entries as [re, im].
    pub functional: Vec<Vec<[f64; 2]>>,
    /// Diagonal D(b, b), clamped to real (imaginary parts are roundoff).
    pub probabilities: Vec<f64>,
    pub max_offdiag: f64,
    pub max_diag: f64,
    /// Sum over all entries as [re, im]; equals 1 for a complete spec.
    pub sum: [f64; 2],
    pub tolerance: f64,
    pub decoherent: bool,
}

impl DecoherenceReport {
    pub fn entry(&self, b: usize, b2: usize) -> Complex64 {
        let [re, im] = self.functional[b][b2];
        Complex64::new(re, im)
    }

    pub fn branch_index(&self, labels: &[impl AsRef<str>]) -> Option<usize> {
        self.branch_labels.iter().position(|chain| {
            chain.len() == labels.len()
                && chain.iter().zip(labels).all(|(a, b)| a == b.as_ref())
        })
    }
}

/// D(b, b') = Tr(C_b rho0 C_b'^dag) over every branch pair, judged at the
/// default tolerance.
pub fn decoherence_functional(spec: &HistorySpec) -> Result<DecoherenceReport> {
    decoherence_functional_with_tolerance(spec, DEFAULT_DECOHERENCE_TOL)
}

/// As [`decoherence_functional`], with the off-diagonal tolerance (relative
/// to the largest diagonal) chosen by the caller.
pub fn decoherence_functional_with_tolerance(
    spec: &HistorySpec,
    tolerance: f64,
) -> Result<DecoherenceReport> {
    if !(tolerance.is_finite() && tolerance > 0.0) {
        return Err(Error::InvalidArgument(format!("tolerance must be positive, got {tolerance}")));
    }
    let d = spec.dim().get();
    let labels = spec.branch_labels();
    let count = labels.len();

    // Chains share prefixes; build them by extending prefix products one
    // step at a time. Memory: one d x d matrix per branch.
    let mut chains: Vec<ComplexMatrix> = vec![ComplexMatrix::identity(d, d)];
    for step in spec.steps() {
        let heis: Vec<ComplexMatrix> = step
            .alternatives
            .iter()
            .map(|alt| heisenberg_projector(&alt.projector, step.time))
            .collect();
        let mut next = Vec::with_capacity(chains.len() * heis.len());
        for prefix in &chains {
            for h in &heis {
                next.push(h * prefix);
            }
        }
        chains = next;
    }

    let weighted: Vec<ComplexMatrix> = chains.iter().map(|c| c * spec.rho0().matrix()).collect();

    let functional: Vec<Vec<[f64; 2]>> = weighted
        .iter()
        .map(|y| {
            chains
                .iter()
                .map(|c| {
                    // Tr(C_b rho C_b2^dag) = sum_ij (C_b rho)_ij conj(C_b2)_ij.
                    let tr: Complex64 = y.iter().zip(c.iter()).map(|(yv, cv)| yv * cv.conj()).sum();
                    [tr.re, tr.im]
                })
                .collect()
        })
        .collect();

    let mut max_offdiag = 0.0f64;
    let mut max_diag = f64::NEG_INFINITY;
    let mut probabilities = Vec::with_capacity(count);
    let mut sum = Complex64::ZERO;
    for (b, row) in functional.iter().enumerate() {
        for (b2, &[re, im]) in row.iter().enumerate() {
            let v = Complex64::new(re, im);
            sum += v;
            if b == b2 {
                probabilities.push(v.re);
                max_diag = max_diag.max(v.re);
            } else {
                max_offdiag = max_offdiag.max(v.norm());
            }
        }
    }
    let decoherent = max_offdiag <= tolerance * max_diag.max(0.0);
    Ok(DecoherenceReport {
        branch_labels: labels,
        functional,
        probabilities,
        max_offdiag,
        max_diag,
        sum: [sum.re, sum.im],
        tolerance,
        decoherent,
    })
}

/// Two-alternative step {E, 1 - E} at the given time.
fn binary_step(time: f64, e: FockOperator) -> HistoryStep {
    let complement = e.complement();
    HistoryStep {
        time,
        alternatives: vec![
            BranchAlternative { label: IN_LABEL.into(), projector: e },
            BranchAlternative { label: OUT_LABEL.into(), projector: complement },
        ],
    }
}

/// History whose regions are one disc transported along the classical flow:
/// at each time t_i the in-region projector sits at classical_flow(center,
/// t_i). Such specs decohere exactly for any initial state.
pub fn classical_history_spec(
    n_max: usize,
    center: PhasePoint,
    times: &[f64],
    rho0: FockOperator,
    dim: FockDim,
) -> Result<HistorySpec> {
    let mut steps = Vec::with_capacity(times.len());
    for &t in times {
        let e = displaced_projector(n_max, classical_flow(center, t), dim)?;
        steps.push(binary_step(t, e));
    }
    HistorySpec::new(rho0, steps)
}

/// Negative control: as [`classical_history_spec`], but the second step's
/// region center is displaced by `offset` off the flow. Later steps (if any)
/// stay aligned, isolating a single broken link in the chain.
///
/// Interference needs branches that differ at the broken step and an initial
/// state with weight on both sides of its partition. Branches differing only
/// at the final time never interfere (trace cyclicity against orthogonal
/// projectors), so with exactly two times the misalignment is visible only
/// to states straddling the first region; three times expose it for any
/// state held inside the region.
pub fn misaligned_history_spec(
    n_max: usize,
    center: PhasePoint,
    times: &[f64],
    offset: PhasePoint,
    rho0: FockOperator,
    dim: FockDim,
) -> Result<HistorySpec> {
    if offset.p == 0.0 && offset.q == 0.0 {
        return Err(Error::InvalidArgument("misalignment offset must be nonzero".into()));
    }
    if times.len() < 2 {
        return Err(Error::InvalidHistory {
            reason: "misaligned spec needs at least two times".into(),
        });
    }
    let mut steps = Vec::with_capacity(times.len());
    for (i, &t) in times.iter().enumerate() {
        let mut at = classical_flow(center, t);
        if i == 1 {
            at = PhasePoint::new(at.p + offset.p, at.q + offset.q);
        }
        let e = displaced_projector(n_max, at, dim)?;
        steps.push(binary_step(t, e));
    }
    HistorySpec::new(rho0, steps)
}

/// Initial-state descriptor for history configuration files.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum InitialState {
    /// Coherent state at the phase point [p, q], truncated and renormalized.
    Coherent(PhasePoint),
    /// Number state |n>.
    Number(usize),
    /// Region projector normalized to unit trace.
    ProjectorMixed(RegionSpec),
    /// Explicit density matrix.
    Matrix(FockOperator),
}

impl InitialState {
    pub fn build(&self, dim: FockDim) -> Result<FockOperator> {
        match self {
            InitialState::Coherent(x) => {
                let z = x.label();
                let deficit = coherent_norm_deficit(z, dim);
                if deficit > 1e-6 {
                    return Err(Error::DimensionTooSmall {
                        dim: dim.get(),
                        needed: format!(
                            "coherent state at |z|^2 = {:.1} keeps {deficit:.1e} of its weight above the basis",
                            z.norm_sqr()
                        ),
                    });
                }
                let s = coherent_state(z, dim);
                let norm = s.norm_sqr();
                Ok(s.outer().scaled(Complex64::new(1.0 / norm, 0.0)))
            }
            InitialState::Number(n) => Ok(number_state(*n, dim)?.outer()),
            InitialState::ProjectorMixed(region) => {
                let built = region_projector(region, dim)?;
                let tr = built.operator.trace().re;
                Ok(built.operator.scaled(Complex64::new(1.0 / tr, 0.0)))
            }
            InitialState::Matrix(rho) => {
                if rho.dim() != dim {
                    return Err(Error::DimensionMismatch { left: dim.get(), right: rho.dim().get() });
                }
                validate_density(rho)?;
                Ok(rho.clone())
            }
        }
    }
}

/// One step of a history configuration file: a time and the in-region spec.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StepDescriptor {
    pub time: f64,
    pub region: RegionSpec,
}

/// JSON-facing history description: builds a binary {in, out} step per
/// region and the initial state from its descriptor.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HistoryDescriptor {
    pub dim: usize,
    pub rho0: InitialState,
    pub steps: Vec<StepDescriptor>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub tolerance: Option<f64>,
}

impl HistoryDescriptor {
    pub fn build(&self) -> Result<HistorySpec> {
        let dim = FockDim::new(self.dim)?;
        let rho0 = self.rho0.build(dim)?;
        let mut steps = Vec::with_capacity(self.steps.len());
        for step in &self.steps {
            let built = region_projector(&step.region, dim)?;
            steps.push(binary_step(step.time, built.operator));
        }
        HistorySpec::new(rho0, steps)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dynamics::evolve_projector;
    use crate::phase_space::region_probability;
    use crate::projector::exact_projector;
    use approx::assert_abs_diff_eq;
    use std::f64::consts::{FRAC_PI_2, PI};

    fn dim(d: usize) -> FockDim {
        FockDim::new(d).unwrap()
    }

    fn coherent_density(x: PhasePoint, d: FockDim) -> FockOperator {
        InitialState::Coherent(x).build(d).unwrap()
    }

    #[test]
    fn single_step_class_operator_is_heisenberg_projector() {
        let d = dim(64);
        let center = PhasePoint::new(0.0, 1.0);
        let rho = coherent_density(center, d);
        let spec = classical_history_spec(3, center, &[0.7], rho, d).unwrap();
        let c = class_operator(&spec, &["in"]).unwrap();
        let e = displaced_projector(3, classical_flow(center, 0.7), d).unwrap();
        let expect = evolve_projector(&e, 0.7).unwrap();
        assert!(c.max_abs_diff(&expect) < 1e-13);
    }

    #[test]
    fn aligned_chain_collapses_to_single_projector() {
        let d = dim(96);
        let center = PhasePoint::new(0.0, 2.0f64.sqrt());
        let rho = coherent_density(center, d);
        let spec =
            classical_history_spec(5, center, &[0.0, FRAC_PI_2, PI], rho, d).unwrap();
        let chain = class_operator(&spec, &["in", "in", "in"]).unwrap();
        let single = displaced_projector(5, center, d).unwrap();
        assert!(chain.max_abs_diff(&single) < 1e-9, "collapse defect {:.2e}",
            chain.max_abs_diff(&single));
        // Mixing in one orthogonal complement annihilates the chain.
        let mixed = class_operator(&spec, &["in", "out", "in"]).unwrap();
        assert!(mixed.max_abs() < 1e-9);
    }

    #[test]
    fn aligned_spec_decoheres_exactly() {
        let d = dim(72);
        let center = PhasePoint::new(0.8, -0.4);
        let rho = coherent_density(center, d);
        let spec = classical_history_spec(4, center, &[0.2, 1.1], rho, d).unwrap();
        let report = decoherence_functional(&spec).unwrap();
        assert!(report.decoherent, "max offdiag {:.2e}", report.max_offdiag);
        assert!(report.max_offdiag <= 1e-9 * report.max_diag);
        assert_abs_diff_eq!(report.sum[0], 1.0, epsilon = 1e-10);
        assert_abs_diff_eq!(report.sum[1], 0.0, epsilon = 1e-10);
        // All-in probability is Tr(E rho).
        let e = displaced_projector(4, classical_flow(center, 0.2), d).unwrap();
        let expect = region_probability(spec.rho0(), &e).unwrap();
        let idx = report.branch_index(&["in", "in"]).unwrap();
        assert_abs_diff_eq!(report.probabilities[idx], expect, epsilon = 1e-10);
    }

    #[test]
    fn functional_is_hermitian_with_nonnegative_diagonal() {
        let d = dim(64);
        let rho = InitialState::Number(2).build(d).unwrap();
        let spec =
            classical_history_spec(3, PhasePoint::new(0.0, 1.0), &[0.0, 0.9], rho, d).unwrap();
        let report = decoherence_functional(&spec).unwrap();
        let n = report.branch_labels.len();
        assert_eq!(n, 4);
        for b in 0..n {
            assert!(report.entry(b, b).re >= -1e-12);
            for b2 in 0..n {
                let diff = (report.entry(b, b2) - report.entry(b2, b).conj()).norm();
                assert!(diff < 1e-14);
            }
        }
    }

    #[test]
    fn prepared_inside_state_follows_flow_deterministically() {
        let d = dim(72);
        let center = PhasePoint::new(0.0, 1.2);
        let n_max = 4;
        let e0 = displaced_projector(n_max, center, d).unwrap();
        let rho = e0.scaled(Complex64::new(1.0 / (n_max as f64 + 1.0), 0.0));
        let times = [0.0, 0.8, 1.9];
        let spec = classical_history_spec(n_max, center, &times, rho, d).unwrap();
        let report = decoherence_functional(&spec).unwrap();
        let all_in = report.branch_index(&["in", "in", "in"]).unwrap();
        assert_abs_diff_eq!(report.probabilities[all_in], 1.0, epsilon = 1e-9);
        for (b, &p) in report.probabilities.iter().enumerate() {
            if b != all_in {
                assert!(p.abs() <= 1e-9, "branch {b} leaked probability {p:.2e}");
            }
        }
    }

    #[test]
    fn misaligned_spec_fails_to_decohere() {
        let d = dim(80);
        let n_max = 3;
        let center = PhasePoint::new(0.0, 1.5);
        // Thermal-like diagonal mixture, normalized.
        let weights: Vec<f64> = (0..d.get()).map(|n| 0.7f64.powi(n as i32)).collect();
        let total: f64 = weights.iter().sum();
        let diag: Vec<f64> = weights.iter().map(|w| w / total).collect();
        let rho = FockOperator::from_real_diagonal(d, &diag).unwrap();
        let radius = (2.0 * n_max as f64).sqrt();
        let spec = misaligned_history_spec(
            n_max,
            center,
            &[0.0, 1.3],
            PhasePoint::new(radius, 0.0),
            rho,
            d,
        )
        .unwrap();
        let report = decoherence_functional(&spec).unwrap();
        assert!(!report.decoherent);
        assert!(report.max_offdiag > 1e-3 * report.max_diag,
            "offdiag {:.3e} vs diag {:.3e}", report.max_offdiag, report.max_diag);
        // Probabilities still sum to 1: the sum rule is alignment-independent.
        assert_abs_diff_eq!(report.sum[0], 1.0, epsilon = 1e-10);
    }

    #[test]
    fn misaligned_spec_guards() {
        let d = dim(32);
        let rho = InitialState::Number(0).build(d).unwrap();
        assert!(misaligned_history_spec(
            2,
            PhasePoint::new(0.0, 1.0),
            &[0.0, 1.0],
            PhasePoint::new(0.0, 0.0),
            rho.clone(),
            d
        )
        .is_err());
        assert!(misaligned_history_spec(
            2,
            PhasePoint::new(0.0, 1.0),
            &[0.0],
            PhasePoint::new(1.0, 0.0),
            rho,
            d
        )
        .is_err());
    }

    #[test]
    fn spec_validation_rejects_malformed_histories() {
        let d = dim(24);
        let rho = InitialState::Number(0).build(d).unwrap();
        let e = exact_projector(2, d).unwrap();

        // Times must increase.
        let steps = vec![binary_step(1.0, e.clone()), binary_step(0.5, e.clone())];
        assert!(matches!(
            HistorySpec::new(rho.clone(), steps),
            Err(Error::InvalidHistory { .. })
        ));

        // Alternatives must be complete.
        let incomplete = vec![HistoryStep {
            time: 0.0,
            alternatives: vec![BranchAlternative { label: "in".into(), projector: e.clone() }],
        }];
        assert!(HistorySpec::new(rho.clone(), incomplete).is_err());

        // Alternatives must be orthogonal (two copies of E overlap).
        let overlapping = vec![HistoryStep {
            time: 0.0,
            alternatives: vec![
                BranchAlternative { label: "a".into(), projector: e.clone() },
                BranchAlternative { label: "b".into(), projector: e.clone() },
            ],
        }];
        assert!(HistorySpec::new(rho.clone(), overlapping).is_err());

        // Initial state must be a density operator.
        let not_density = e.clone();
        assert!(HistorySpec::new(not_density, vec![binary_step(0.0, e.clone())]).is_err());

        // Branch blowup is refused.
        let many: Vec<HistoryStep> =
            (0..13).map(|i| binary_step(i as f64, e.clone())).collect();
        assert!(matches!(
            HistorySpec::new(rho, many),
            Err(Error::TooManyBranches { .. })
        ));
    }

    #[test]
    fn class_operator_label_errors() {
        let d = dim(32);
        let rho = InitialState::Number(0).build(d).unwrap();
        let spec =
            classical_history_spec(2, PhasePoint::new(0.0, 0.5), &[0.0, 1.0], rho, d).unwrap();
        assert!(class_operator(&spec, &["in"]).is_err());
        assert!(class_operator(&spec, &["in", "sideways"]).is_err());
    }

    #[test]
    fn descriptor_round_trip_and_build() {
        let text = r#"{
            "dim": 72,
            "rho0": {"coherent": [0.0, 1.4142135623730951]},
            "steps": [
                {"time": 0.0, "region": {"circle": {"R": 2.449489742783178, "center": [0.0, 1.4142135623730951]}}},
                {"time": 1.5707963267948966, "region": {"circle": {"R": 2.449489742783178, "center": [-1.4142135623730951, 0.0]}}}
            ],
            "tolerance": 1e-9
        }"#;
        let desc: HistoryDescriptor = serde_json::from_str(text).unwrap();
        assert_eq!(desc.tolerance, Some(1e-9));
        let spec = desc.build().unwrap();
        assert_eq!(spec.branch_count(), 4);
        let report = decoherence_functional(&spec).unwrap();
        assert!(report.decoherent, "aligned circle steps should decohere, offdiag {:.2e}",
            report.max_offdiag);
        let back = serde_json::to_string(&desc).unwrap();
        let again: HistoryDescriptor = serde_json::from_str(&back).unwrap();
        assert_eq!(again, desc);
    }

    #[test]
    fn initial_state_variants_build_valid_densities() {
        let d = dim(64);
        let coh = InitialState::Coherent(PhasePoint::new(1.0, -1.0)).build(d).unwrap();
        assert!(validate_density(&coh).is_ok());
        let num = InitialState::Number(3).build(d).unwrap();
        assert!(validate_density(&num).is_ok());
        let mixed = InitialState::ProjectorMixed(RegionSpec::Circle {
            radius: 2.0,
            center: PhasePoint::new(0.0, 0.0),
        })
        .build(d)
        .unwrap();
        assert!(validate_density(&mixed).is_ok());
        let via_matrix = InitialState::Matrix(mixed.clone()).build(d).unwrap();
        assert!(via_matrix.max_abs_diff(&mixed) == 0.0);
        // A coherent state far outside the basis is refused, not silently truncated.
        let too_far = InitialState::Coherent(PhasePoint::new(0.0, 14.0));
        assert!(too_far.build(d).is_err());
    }

    #[test]
    fn report_serializes_with_pair_entries() {
        let d = dim(48);
        let rho = InitialState::Number(1).build(d).unwrap();
        let spec = classical_history_spec(2, PhasePoint::new(0.0, 1.0), &[0.0], rho, d).unwrap();
        let report = decoherence_functional(&spec).unwrap();
        let text = serde_json::to_string(&report).unwrap();
        assert!(text.contains("\"functional\":[["));
        let back: DecoherenceReport = serde_json::from_str(&text).unwrap();
        assert_eq!(back.branch_labels, report.branch_labels);
        assert_eq!(back.probabilities, report.probabilities);
    }
}
