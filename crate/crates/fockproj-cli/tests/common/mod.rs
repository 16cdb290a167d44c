//! Independent oracles for the acceptance suite: routes that share no code
//! with the implementations they check.

use nalgebra::DMatrix;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use fockproj::fock::coherent_state;
use fockproj::special::ln_factorial;
use fockproj::{Complex64, ComplexLabel, FockDim, FockOperator};

/// Random density operator from a seeded complex Ginibre square.
pub fn random_density(seed: u64, d: usize) -> FockOperator {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut normal = move || {
        // Box-Muller; the lower bound keeps ln away from zero.
        let u1: f64 = rng.gen_range(1e-12..1.0);
        let u2: f64 = rng.gen_range(0.0..1.0);
        (-2.0 * u1.ln()).sqrt() * (std::f64::consts::TAU * u2).cos()
    };
    let g = DMatrix::from_fn(d, d, |_, _| Complex64::new(normal(), normal()));
    let rho = &g * g.adjoint();
    let trace: f64 = (0..d).map(|i| rho[(i, i)].re).sum();
    let rho = rho.map(|v| v / Complex64::new(trace, 0.0));
    FockOperator::from_matrix(FockDim::new(d).unwrap(), rho)
        .expect("Ginibre square is a density operator")
}

/// Gamma-density integrand u^n e^{-u} / n!, evaluated in log space so large
/// n cannot overflow the power.
fn gamma_density(n: usize, u: f64) -> f64 {
    if u <= 0.0 {
        return if n == 0 { (-u).exp() } else { 0.0 };
    }
    (n as f64 * u.ln() - u - ln_factorial(n)).exp()
}

fn simpson(a: f64, b: f64, fa: f64, fm: f64, fb: f64) -> f64 {
    (b - a) / 6.0 * (fa + 4.0 * fm + fb)
}

#[allow(clippy::too_many_arguments)]
fn adaptive(
    f: &impl Fn(f64) -> f64,
    a: f64,
    b: f64,
    fa: f64,
    fm: f64,
    fb: f64,
    whole: f64,
    eps: f64,
    depth: u32,
) -> f64 {
    let m = 0.5 * (a + b);
    let lm = 0.5 * (a + m);
    let rm = 0.5 * (m + b);
    let flm = f(lm);
    let frm = f(rm);
    let left = simpson(a, m, fa, flm, fm);
    let right = simpson(m, b, fm, frm, fb);
    let delta = left + right - whole;
    if depth == 0 || delta.abs() <= 15.0 * eps {
        return left + right + delta / 15.0;
    }
    adaptive(f, a, m, fa, flm, fm, left, 0.5 * eps, depth - 1)
        + adaptive(f, m, b, fm, frm, fb, right, 0.5 * eps, depth - 1)
}

/// Projection weight of number state n on a disc of radius R, by adaptive
/// Simpson quadrature of the radial integral.
pub fn lambda_by_quadrature(n: usize, radius: f64) -> f64 {
    let hi = radius * radius;
    if hi == 0.0 {
        return 0.0;
    }
    let f = |u: f64| gamma_density(n, u);
    let (fa, fm, fb) = (f(0.0), f(0.5 * hi), f(hi));
    let whole = simpson(0.0, hi, fa, fm, fb);
    adaptive(&f, 0.0, hi, fa, fm, fb, whole, 1e-13, 48)
}

pub struct McEstimate {
    pub mean: DMatrix<Complex64>,
    pub se: DMatrix<f64>,
}

/// Monte-Carlo estimate of the coherent-state average over a disc of radius
/// R, entrywise in the number basis, with per-entry standard errors
/// (Welford). The exact value is diagonal with the lambda weights on the
/// diagonal.
pub fn monte_carlo_disc_average(radius: f64, d: usize, samples: usize, seed: u64) -> McEstimate {
    let dim = FockDim::new(d).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut mean = DMatrix::<Complex64>::zeros(d, d);
    let mut m2 = DMatrix::<f64>::zeros(d, d);
    let area_over_pi = radius * radius;
    for k in 1..=samples {
        let u: f64 = rng.gen();
        let theta: f64 = rng.gen_range(0.0..std::f64::consts::TAU);
        let z = Complex64::from_polar(radius * u.sqrt(), theta);
        let amps = coherent_state(ComplexLabel(z), dim);
        let v = amps.amplitudes();
        let count = k as f64;
        for i in 0..d {
            for j in 0..d {
                let x = v[i] * v[j].conj() * area_over_pi;
                let delta = x - mean[(i, j)];
                mean[(i, j)] += delta / count;
                m2[(i, j)] += (delta.conj() * (x - mean[(i, j)])).re;
            }
        }
    }
    let n = samples as f64;
    let se = m2.map(|v| (v.max(0.0) / (n * (n - 1.0))).sqrt());
    McEstimate { mean, se }
}

/// Smallest eigenvalue of -(1/2) d^2/dq^2 + U(q) discretized by central
/// differences on [-half, half] with `points` interior nodes, located by
/// Sturm-count bisection on the tridiagonal matrix.
pub fn fd_ground_energy(potential: impl Fn(f64) -> f64, half: f64, points: usize) -> f64 {
    assert!(points > 2);
    let h = 2.0 * half / (points + 1) as f64;
    let diag: Vec<f64> = (1..=points)
        .map(|i| {
            let q = -half + i as f64 * h;
            1.0 / (h * h) + potential(q)
        })
        .collect();
    let off = -1.0 / (2.0 * h * h);
    // Sturm sequence: eigenvalues below lambda = negative pivots of the
    // LDL^T recurrence.
    let count_below = |lambda: f64| -> usize {
        let mut count = 0usize;
        let mut d_prev = f64::INFINITY;
        for &a in &diag {
            let mut d = a - lambda - off * off / d_prev;
            if d == 0.0 {
                d = -1e-300;
            }
            if d < 0.0 {
                count += 1;
            }
            d_prev = d;
        }
        count
    };
    // Gershgorin interval: diag entries are 1/h^2 + U while eigenvalues sit
    // near min U, so the lower bound must subtract both off-diagonals.
    let mut lo = diag.iter().cloned().fold(f64::INFINITY, f64::min) - 2.0 * off.abs() - 1.0;
    let mut hi = diag.iter().cloned().fold(f64::NEG_INFINITY, f64::max) + 2.0 * off.abs();
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if count_below(mid) >= 1 {
            hi = mid;
        } else {
            lo = mid;
        }
        if hi - lo <= 1e-12 * hi.abs().max(1.0) {
            break;
        }
    }
    0.5 * (lo + hi)
}
