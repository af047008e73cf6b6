//! Special functions: log-gamma, regularized incomplete gamma and beta, their
//! inverses, and the error function. These back the chi-square quantile and
//! the F/chi-square p-values of the diagnostic tests.

// published coefficient tables are kept at full printed precision
#![allow(clippy::excessive_precision)]

const EPS: f64 = 1e-15;
const MAX_ITER: usize = 500;
const TINY: f64 = 1e-300;

/// Natural log of the gamma function (Lanczos, g = 7).
pub(crate) fn ln_gamma(x: f64) -> f64 {
    const COEFFS: [f64; 9] = [
        0.999_999_999_999_809_93,
        676.520_368_121_885_1,
        -1_259.139_216_722_402_8,
        771.323_428_777_653_13,
        -176.615_029_162_140_59,
        12.507_343_278_686_905,
        -0.138_571_095_265_720_12,
        9.984_369_578_019_571_6e-6,
        1.505_632_735_149_311_6e-7,
    ];
    if x < 0.5 {
        // reflection formula
        let pi = std::f64::consts::PI;
        return (pi / (pi * x).sin()).ln() - ln_gamma(1.0 - x);
    }
    let x = x - 1.0;
    let mut acc = COEFFS[0];
    for (i, &c) in COEFFS.iter().enumerate().skip(1) {
        acc += c / (x + i as f64);
    }
    let t = x + 7.5;
    0.5 * (2.0 * std::f64::consts::PI).ln() + (x + 0.5) * t.ln() - t + acc.ln()
}

/// Regularized lower incomplete gamma P(a, x).
pub(crate) fn gamma_p(a: f64, x: f64) -> f64 {
    if x <= 0.0 {
        return 0.0;
    }
    if x < a + 1.0 {
        gamma_p_series(a, x)
    } else {
        1.0 - gamma_q_cf(a, x)
    }
}

fn gamma_p_series(a: f64, x: f64) -> f64 {
    let mut ap = a;
    let mut sum = 1.0 / a;
    let mut del = sum;
    for _ in 0..MAX_ITER {
        ap += 1.0;
        del *= x / ap;
        sum += del;
        if del.abs() < sum.abs() * EPS {
            break;
        }
    }
    sum * (-x + a * x.ln() - ln_gamma(a)).exp()
}

// Upper tail Q(a, x) by Lentz continued fraction.
fn gamma_q_cf(a: f64, x: f64) -> f64 {
    let mut b = x + 1.0 - a;
    let mut c = 1.0 / TINY;
    let mut d = 1.0 / b;
    let mut h = d;
    for i in 1..=MAX_ITER {
        let an = -(i as f64) * (i as f64 - a);
        b += 2.0;
        d = an * d + b;
        if d.abs() < TINY {
            d = TINY;
        }
        c = b + an / c;
        if c.abs() < TINY {
            c = TINY;
        }
        d = 1.0 / d;
        let del = d * c;
        h *= del;
        if (del - 1.0).abs() < EPS {
            break;
        }
    }
    (-x + a * x.ln() - ln_gamma(a)).exp() * h
}

/// Inverse of P(a, .): returns x with P(a, x) = p.
///
/// Initial guess from the Wilson-Hilferty normal approximation, refined by
/// Halley steps on P.
pub(crate) fn gamma_p_inv(a: f64, p: f64) -> f64 {
    assert!(a > 0.0 && p > 0.0 && p < 1.0);
    let gln = ln_gamma(a);
    let mut x = if a > 1.0 {
        // normal approximation to the equivalent deviate
        let pp = if p < 0.5 { p } else { 1.0 - p };
        let t = (-2.0 * pp.ln()).sqrt();
        let mut z = t - (2.30753 + t * 0.27061) / (1.0 + t * (0.99229 + t * 0.04481));
        if p < 0.5 {
            z = -z;
        }
        let u = 1.0 - 1.0 / (9.0 * a) + z / (3.0 * a.sqrt());
        (a * u * u * u).max(1e-8)
    } else {
        let t = 1.0 - a * (0.253 + a * 0.12);
        if p < t {
            (p / t).powf(1.0 / a)
        } else {
            1.0 - (1.0 - (p - t) / (1.0 - t)).ln()
        }
    };
    for _ in 0..64 {
        if x <= 0.0 {
            x = 0.5 * (x + 1e-12);
            continue;
        }
        let err = gamma_p(a, x) - p;
        let lnf = (a - 1.0) * x.ln() - x - gln;
        if lnf < -700.0 {
            break;
        }
        let f = lnf.exp();
        if f < TINY {
            break;
        }
        let u = err / f;
        // Halley correction with the log-derivative of the density.
        let dx = u / (1.0 - 0.5 * (u * ((a - 1.0) / x - 1.0)).clamp(-0.9, 0.9));
        x -= dx;
        if x <= 0.0 {
            x = 0.5 * (x + dx);
        }
        if dx.abs() < 1e-14 * x.max(1.0) {
            break;
        }
    }
    x
}

/// Regularized incomplete beta I_x(a, b).
pub(crate) fn beta_i(a: f64, b: f64, x: f64) -> f64 {
    if x <= 0.0 {
        return 0.0;
    }
    if x >= 1.0 {
        return 1.0;
    }
    let ln_front = ln_gamma(a + b) - ln_gamma(a) - ln_gamma(b) + a * x.ln() + b * (1.0 - x).ln();
    let front = ln_front.exp();
    if x < (a + 1.0) / (a + b + 2.0) {
        front * beta_cf(a, b, x) / a
    } else {
        1.0 - front * beta_cf(b, a, 1.0 - x) / b
    }
}

fn beta_cf(a: f64, b: f64, x: f64) -> f64 {
    let qab = a + b;
    let qap = a + 1.0;
    let qam = a - 1.0;
    let mut c = 1.0;
    let mut d = 1.0 - qab * x / qap;
    if d.abs() < TINY {
        d = TINY;
    }
    d = 1.0 / d;
    let mut h = d;
    for m in 1..=MAX_ITER {
        let m = m as f64;
        let m2 = 2.0 * m;
        let aa = m * (b - m) * x / ((qam + m2) * (a + m2));
        d = 1.0 + aa * d;
        if d.abs() < TINY {
            d = TINY;
        }
        c = 1.0 + aa / c;
        if c.abs() < TINY {
            c = TINY;
        }
        d = 1.0 / d;
        h *= d * c;
        let aa = -(a + m) * (qab + m) * x / ((a + m2) * (qap + m2));
        d = 1.0 + aa * d;
        if d.abs() < TINY {
            d = TINY;
        }
        c = 1.0 + aa / c;
        if c.abs() < TINY {
            c = TINY;
        }
        d = 1.0 / d;
        let del = d * c;
        h *= del;
        if (del - 1.0).abs() < EPS {
            break;
        }
    }
    h
}

#[cfg_attr(not(test), allow(dead_code))]
pub(crate) fn erf(x: f64) -> f64 {
    if x == 0.0 {
        return 0.0;
    }
    let v = gamma_p(0.5, x * x);
    if x > 0.0 {
        v
    } else {
        -v
    }
}

/// Standard normal CDF.
#[cfg_attr(not(test), allow(dead_code))]
pub(crate) fn normal_cdf(x: f64) -> f64 {
    0.5 * (1.0 + erf(x / std::f64::consts::SQRT_2))
}

/// Upper-tail probability of the F distribution with (d1, d2) degrees of
/// freedom.
pub(crate) fn f_sf(f: f64, d1: f64, d2: f64) -> f64 {
    if f <= 0.0 {
        return 1.0;
    }
    beta_i(d2 / 2.0, d1 / 2.0, d2 / (d2 + d1 * f))
}

/// Upper-tail probability of the chi-square distribution with `df` degrees of
/// freedom.
pub(crate) fn chi2_sf(x: f64, df: f64) -> f64 {
    if x <= 0.0 {
        return 1.0;
    }
    1.0 - gamma_p(df / 2.0, x / 2.0)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn ln_gamma_integers() {
        // ln((n-1)!)
        let facts = [1.0f64, 1.0, 2.0, 6.0, 24.0, 120.0, 720.0];
        for (i, &f) in facts.iter().enumerate() {
            let x = (i + 1) as f64;
            assert!((ln_gamma(x) - f.ln()).abs() < 1e-12, "x = {x}");
        }
    }

    #[test]
    fn ln_gamma_half() {
        assert!((ln_gamma(0.5) - std::f64::consts::PI.sqrt().ln()).abs() < 1e-12);
    }

    #[test]
    fn gamma_p_exponential_special_case() {
        // P(1, x) = 1 - exp(-x)
        for &x in &[0.1, 0.5, 1.0, 3.0, 10.0] {
            assert!((gamma_p(1.0, x) - (1.0 - (-x).exp())).abs() < 1e-13);
        }
    }

    #[test]
    fn gamma_p_inv_roundtrip() {
        for &a in &[0.5, 1.0, 2.5, 10.0, 24.5] {
            for &p in &[0.01, 0.1, 0.5, 0.9, 0.99, 0.999] {
                let x = gamma_p_inv(a, p);
                assert!((gamma_p(a, x) - p).abs() < 1e-11, "a={a} p={p}");
            }
        }
    }

    #[test]
    fn beta_i_symmetry_and_midpoint() {
        assert!((beta_i(2.0, 2.0, 0.5) - 0.5).abs() < 1e-12);
        for &(a, b, x) in &[(2.0, 3.0, 0.3), (0.5, 0.5, 0.7), (5.0, 1.5, 0.2)] {
            let direct = beta_i(a, b, x);
            let reflected = 1.0 - beta_i(b, a, 1.0 - x);
            assert!((direct - reflected).abs() < 1e-12);
        }
    }

    #[test]
    fn erf_known_values() {
        assert!((erf(1.0) - 0.842_700_792_949_714_9).abs() < 1e-12);
        assert!((erf(-1.0) + 0.842_700_792_949_714_9).abs() < 1e-12);
        assert!((normal_cdf(1.959_963_984_540_054) - 0.975).abs() < 1e-9);
    }

    #[test]
    fn f_sf_against_beta_identity() {
        // F(1, d2) is the square of a t(d2) variate; spot-check a known point:
        // P(F(1, 10) > 4.964603) = 0.05.
        assert!((f_sf(4.964_603, 1.0, 10.0) - 0.05).abs() < 1e-5);
    }
}
