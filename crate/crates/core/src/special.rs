//! Small special-function helpers shared by the density families and the
//! closed-form kernels.

use num_complex::Complex64;

/// Cap on the number of terms in the Beta moment-generating series.
pub const BETA_SERIES_MAX_TERMS: usize = 200;

/// `(e^z - 1) / z`, accurate near `z = 0`.
pub fn exprel(z: f64) -> f64 {
    if z == 0.0 {
        1.0
    } else if z.abs() < 1e-5 {
        1.0 + z / 2.0 + z * z / 6.0
    } else {
        z.exp_m1() / z
    }
}

/// Complex `(e^z - 1) / z`.
pub fn exprel_c(z: Complex64) -> Complex64 {
    if z.norm() < 0.5 {
        // Σ z^k / (k+1)!
        let mut term = Complex64::new(1.0, 0.0);
        let mut sum = term;
        for k in 1..40 {
            term = term * z / (k as f64 + 1.0);
            sum += term;
            if term.norm() < 1e-17 * sum.norm() {
                break;
            }
        }
        sum
    } else {
        (z.exp() - 1.0) / z
    }
}

/// `∫_0^1 x e^{t x} dx`.
pub fn int_x_exp_c(t: Complex64) -> Complex64 {
    if t.norm() < 1.0 {
        // Σ t^k / (k! (k+2))
        let mut fact = Complex64::new(1.0, 0.0);
        let mut sum = Complex64::new(0.5, 0.0);
        for k in 1..60 {
            fact = fact * t / k as f64;
            let term = fact / (k as f64 + 2.0);
            sum += term;
            if term.norm() < 1e-17 * sum.norm() {
                break;
            }
        }
        sum
    } else {
        (t.exp() * (t - 1.0) + 1.0) / (t * t)
    }
}

/// Kummer series `1F1(a; c; t) = Σ (a)_k / (c)_k · t^k / k!`, truncated when a term
/// drops below `1e-16` of the partial sum. Returns `None` when the term cap is hit.
fn kummer_series(a: f64, c: f64, t: Complex64) -> Option<Complex64> {
    let mut term = Complex64::new(1.0, 0.0);
    let mut sum = term;
    for k in 1..BETA_SERIES_MAX_TERMS {
        let kf = k as f64;
        term = term * t * ((a + kf - 1.0) / ((c + kf - 1.0) * kf));
        sum += term;
        if term.norm() <= 1e-16 * sum.norm() {
            return Some(sum);
        }
    }
    None
}

/// Moment generating function of Beta(α, β) on (0,1):
/// `E[e^{tη}] = Σ_k t^k/k! · B(α+k, β)/B(α, β)`.
///
/// For `Re t < 0` the Kummer transformation `e^t · 1F1(β; α+β; -t)` is used so the
/// series has no alternating cancellation on the real axis.
pub fn beta_mgf(alpha: f64, beta: f64, t: Complex64) -> Option<Complex64> {
    if t.re < 0.0 {
        kummer_series(beta, alpha + beta, -t).map(|s| t.exp() * s)
    } else {
        kummer_series(alpha, alpha + beta, t)
    }
}

/// `ln(e^a + e^b)` without overflow.
pub fn log_add_exp(a: f64, b: f64) -> f64 {
    if a == f64::NEG_INFINITY {
        return b;
    }
    if b == f64::NEG_INFINITY {
        return a;
    }
    let m = a.max(b);
    m + ((a - m).exp() + (b - m).exp()).ln()
}

/// `ln(1 - e^{y})` for `y < 0`.
pub fn ln_one_minus_exp(y: f64) -> f64 {
    if y > -std::f64::consts::LN_2 {
        (-y.exp_m1()).ln()
    } else {
        (-y.exp()).ln_1p()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use statrs::function::beta::beta as beta_fn;

    #[test]
    fn exprel_small_and_large() {
        assert!((exprel(1e-9) - 1.0000000005).abs() < 1e-15);
        assert!((exprel(2.0) - (2f64.exp() - 1.0) / 2.0).abs() < 1e-15);
        let z = Complex64::new(0.1, 0.2);
        assert!((exprel_c(z) - (z.exp() - 1.0) / z).norm() < 1e-15);
    }

    #[test]
    fn beta_mgf_matches_term_by_term_series() {
        // direct Σ t^k/k! B(α+k,β)/B(α,β) with explicit Beta functions
        let (a, b) = (2.0, 3.0);
        for &t in &[-3.0f64, -0.5, 0.7, 4.0] {
            let mut s = 0.0;
            let mut fact = 1.0;
            for k in 0..80 {
                if k > 0 {
                    fact *= k as f64;
                }
                s += t.powi(k) / fact * beta_fn(a + k as f64, b) / beta_fn(a, b);
            }
            let v = beta_mgf(a, b, Complex64::new(t, 0.0)).unwrap().re;
            assert!((v - s).abs() < 1e-12 * s.abs(), "t={t}: {v} vs {s}");
        }
    }

    #[test]
    fn beta_mgf_uniform_case() {
        // α=β=1: (e^t - 1)/t
        let t = Complex64::new(-2.5, 0.0);
        let v = beta_mgf(1.0, 1.0, t).unwrap();
        assert!((v.re - exprel(-2.5)).abs() < 1e-15);
    }

    #[test]
    fn int_x_exp_branches_agree() {
        for &t in &[0.999f64, 1.001, -0.999, -1.001] {
            let c = int_x_exp_c(Complex64::new(t, 0.0)).re;
            let exact = (t.exp() * (t - 1.0) + 1.0) / (t * t);
            assert!((c - exact).abs() < 1e-14);
        }
    }

    #[test]
    fn log_helpers() {
        assert!((ln_one_minus_exp(-1e-10) - (1e-10f64).ln()).abs() < 1e-9);
        assert!((log_add_exp(1000.0, 1000.0) - (1000.0 + 2f64.ln())).abs() < 1e-12);
    }
}
