//! Scalar special functions backing the projector spectra.
//!
//! The eigenvalues of a phase-space quasi-projector onto a disc of radius R
//! are regularized lower incomplete gamma values P(n+1, R^2), coherent-state
//! truncation tails are the complementary P(d, |z|^2), and circular Wigner
//! functions are alternating Laguerre sums. All three are evaluated here in
//! forms that neither overflow nor lose precision at the dimensions the rest
//! of the crate uses (arguments up to a few thousand).

/// ln(n!) by compensated summation. Exact at n = 0, 1.
pub fn ln_factorial(n: usize) -> f64 {
    let mut sum = 0.0f64;
    let mut c = 0.0f64;
    for k in 2..=n {
        let y = (k as f64).ln() - c;
        let t = sum + y;
        c = (t - sum) - y;
        sum = t;
    }
    sum
}

const GAMMA_MAX_ITER: usize = 600;
const GAMMA_EPS: f64 = 1e-16;

/// Regularized lower incomplete gamma P(a, x) for integer a >= 1, x >= 0.
///
/// P(a, x) = gamma(a, x) / Gamma(a) = (1/Gamma(a)) int_0^x t^(a-1) e^-t dt.
/// Series expansion for x < a + 1, Lentz continued fraction for the upper
/// tail otherwise; both use a log-space prefactor so large a and x are safe.
pub fn lower_gamma_p(a: usize, x: f64) -> f64 {
    assert!(a >= 1, "lower_gamma_p requires a >= 1");
    assert!(x >= 0.0 && x.is_finite(), "lower_gamma_p requires finite x >= 0");
    if x == 0.0 {
        return 0.0;
    }
    let af = a as f64;
    // exp(-x + a ln x - ln Gamma(a)) = x^a e^-x / (a-1)!
    let ln_prefactor = -x + af * x.ln() - ln_factorial(a - 1);
    if x < af + 1.0 {
        // P(a,x) = prefactor * sum_{k>=0} x^k / (a (a+1) ... (a+k))
        let mut term = 1.0 / af;
        let mut sum = term;
        for k in 1..GAMMA_MAX_ITER {
            term *= x / (af + k as f64);
            sum += term;
            if term < sum * GAMMA_EPS {
                break;
            }
        }
        (sum * ln_prefactor.exp()).clamp(0.0, 1.0)
    } else {
        // Q(a,x) = prefactor / (x+1-a - 1(1-a)/(x+3-a - 2(2-a)/(x+5-a - ...)))
        let tiny = 1e-300;
        let mut b = x + 1.0 - af;
        let mut c = 1.0 / tiny;
        let mut d = 1.0 / b;
        let mut h = d;
        for i in 1..GAMMA_MAX_ITER {
            let an = -(i as f64) * (i as f64 - af);
            b += 2.0;
            d = an * d + b;
            if d.abs() < tiny {
                d = tiny;
            }
            c = b + an / c;
            if c.abs() < tiny {
                c = tiny;
            }
            d = 1.0 / d;
            let delta = d * c;
            h *= delta;
            if (delta - 1.0).abs() < GAMMA_EPS {
                break;
            }
        }
        let q = (ln_prefactor.exp() * h).clamp(0.0, 1.0);
        1.0 - q
    }
}

/// Upper tail of a Poisson(mean) distribution: sum over k > k_max of
/// e^-mean mean^k / k!. Equals P(k_max + 1, mean).
pub fn poisson_tail(k_max: usize, mean: f64) -> f64 {
    lower_gamma_p(k_max + 1, mean)
}

/// Cumulative Poisson(mean) probability: sum over k <= k_max.
pub fn poisson_cdf(k_max: usize, mean: f64) -> f64 {
    1.0 - poisson_tail(k_max, mean)
}

/// sum_{n=0}^{n_max} (-1)^n L_n(x) e^(-x/2) for x >= 0, where L_n is the
/// Laguerre polynomial.
///
/// The recurrence runs on the weighted values l_n = L_n(x) e^(-x/2), which
/// satisfy |l_n| <= 1, so the sum is overflow-free at any x where e^(-x/2)
/// itself is representable.
pub fn alternating_laguerre_sum(n_max: usize, x: f64) -> f64 {
    assert!(x >= 0.0 && x.is_finite(), "alternating_laguerre_sum requires finite x >= 0");
    let w = (-0.5 * x).exp();
    let mut prev = w; // l_0
    if n_max == 0 {
        return prev;
    }
    let mut curr = (1.0 - x) * w; // l_1
    let mut sum = prev - curr;
    let mut sign = 1.0;
    for n in 1..n_max {
        let nf = n as f64;
        // (n+1) l_{n+1} = (2n+1-x) l_n - n l_{n-1}
        let next = ((2.0 * nf + 1.0 - x) * curr - nf * prev) / (nf + 1.0);
        sum += sign * next;
        prev = curr;
        curr = next;
        sign = -sign;
    }
    sum
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    #[test]
    fn ln_factorial_small_values() {
        assert_eq!(ln_factorial(0), 0.0);
        assert_eq!(ln_factorial(1), 0.0);
        assert_abs_diff_eq!(ln_factorial(2), 2.0f64.ln(), epsilon = 1e-15);
        assert_abs_diff_eq!(ln_factorial(5), 120.0f64.ln(), epsilon = 1e-14);
        assert_abs_diff_eq!(ln_factorial(10), 3628800.0f64.ln(), epsilon = 1e-13);
    }

    #[test]
    fn ln_factorial_large_against_stirling() {
        // ln n! = n ln n - n + 0.5 ln(2 pi n) + 1/(12n) - 1/(360 n^3) + ...
        for &n in &[100usize, 400, 1000] {
            let z = n as f64;
            let stirling = z * z.ln() - z
                + 0.5 * (2.0 * std::f64::consts::PI * z).ln()
                + 1.0 / (12.0 * z)
                - 1.0 / (360.0 * z.powi(3));
            assert_abs_diff_eq!(ln_factorial(n), stirling, epsilon = 1e-10 * stirling.abs());
        }
    }

    #[test]
    fn gamma_p_closed_forms() {
        // P(1, x) = 1 - e^-x and P(2, x) = 1 - e^-x (1 + x).
        for &x in &[1e-6, 0.3, 1.0, 2.5, 10.0, 50.0] {
            assert_abs_diff_eq!(lower_gamma_p(1, x), 1.0 - (-x).exp(), epsilon = 1e-14);
            assert_abs_diff_eq!(lower_gamma_p(2, x), 1.0 - (-x).exp() * (1.0 + x), epsilon = 1e-14);
        }
    }

    #[test]
    fn gamma_p_edge_cases() {
        assert_eq!(lower_gamma_p(1, 0.0), 0.0);
        assert_eq!(lower_gamma_p(40, 0.0), 0.0);
        // Deep tails must saturate without overflow or NaN.
        assert!(lower_gamma_p(1, 800.0) == 1.0);
        assert!(lower_gamma_p(900, 1e-3) < 1e-300 * 1e10 + 1e-300 || lower_gamma_p(900, 1e-3) == 0.0);
        assert!((0.0..=1.0).contains(&lower_gamma_p(500, 500.0)));
    }

    #[test]
    fn gamma_p_matches_poisson_partial_sum() {
        // Q(a, x) = sum_{k=0}^{a-1} e^-x x^k / k!, summed directly.
        let cases: &[(usize, f64)] = &[(3, 2.0), (7, 10.0), (12, 4.5), (30, 28.0)];
        for &(a, x) in cases {
            let mut term = (-x).exp();
            let mut q = term;
            for k in 1..a {
                term *= x / k as f64;
                q += term;
            }
            assert_abs_diff_eq!(lower_gamma_p(a, x), 1.0 - q, epsilon = 1e-13);
        }
    }

    #[test]
    fn gamma_p_continuous_across_branch_switch() {
        // Series is used for x < a+1, continued fraction above; the two must
        // agree where they meet.
        // The probe points straddle the switch as tightly as f64 spacing
        // allows, so the true slope (a Poisson density, at most ~0.4)
        // contributes under 1e-12.
        for &a in &[2usize, 9, 33, 120] {
            let xc = a as f64 + 1.0;
            let below = lower_gamma_p(a, xc - 1e-12);
            let above = lower_gamma_p(a, xc + 1e-12);
            assert_abs_diff_eq!(below, above, epsilon = 1e-11);
        }
    }

    #[test]
    fn gamma_p_monotone_in_x_and_a() {
        let xs: Vec<f64> = (0..60).map(|i| 0.25 * i as f64).collect();
        for &a in &[1usize, 4, 16, 64] {
            for w in xs.windows(2) {
                assert!(lower_gamma_p(a, w[1]) >= lower_gamma_p(a, w[0]) - 1e-13);
            }
        }
        for a in 1usize..40 {
            assert!(lower_gamma_p(a + 1, 9.0) <= lower_gamma_p(a, 9.0) + 1e-13);
        }
    }

    #[test]
    fn poisson_tail_small_mean_direct_sum() {
        let mean = 1.7f64;
        for k_max in 0usize..8 {
            let mut term = (-mean).exp();
            let mut cdf = term;
            for k in 1..=k_max {
                term *= mean / k as f64;
                cdf += term;
            }
            assert_abs_diff_eq!(poisson_tail(k_max, mean), 1.0 - cdf, epsilon = 1e-14);
            assert_abs_diff_eq!(poisson_cdf(k_max, mean), cdf, epsilon = 1e-14);
        }
    }

    #[test]
    fn laguerre_sum_explicit_low_orders() {
        // L_0 = 1, L_1 = 1-x, L_2 = 1-2x+x^2/2, L_3 = 1-3x+3x^2/2-x^3/6.
        for &x in &[0.0f64, 0.3, 1.0, 2.7, 6.0] {
            let w = (-0.5 * x).exp();
            let l = [
                1.0,
                1.0 - x,
                1.0 - 2.0 * x + 0.5 * x * x,
                1.0 - 3.0 * x + 1.5 * x * x - x * x * x / 6.0,
            ];
            let mut expect = 0.0;
            for (n, ln) in l.iter().enumerate() {
                let sign = if n % 2 == 0 { 1.0 } else { -1.0 };
                expect += sign * ln * w;
                assert_abs_diff_eq!(alternating_laguerre_sum(n, x), expect, epsilon = 1e-13);
            }
        }
    }

    #[test]
    fn laguerre_sum_at_origin_counts_parity() {
        // L_n(0) = 1, so the sum telescopes to 1 (even n_max) or 0 (odd).
        for n_max in 0usize..30 {
            let expect = if n_max % 2 == 0 { 1.0 } else { 0.0 };
            assert_abs_diff_eq!(alternating_laguerre_sum(n_max, 0.0), expect, epsilon = 1e-12);
        }
    }

    #[test]
    fn laguerre_sum_stays_bounded_at_large_argument() {
        // |L_n(x)| e^(-x/2) <= 1, so the sum of n_max+1 terms is bounded by
        // n_max + 1 and must stay finite far out in the tail.
        for &x in &[100.0, 400.0, 1000.0] {
            let s = alternating_laguerre_sum(200, x);
            assert!(s.is_finite());
            assert!(s.abs() <= 201.0);
        }
    }
}
