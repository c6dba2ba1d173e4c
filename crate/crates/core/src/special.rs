//! Modified Bessel function of the second kind, order zero.

const EULER_GAMMA: f64 = 0.577_215_664_901_532_9;
const CROSSOVER: f64 = 2.0;
const EPS: f64 = 1e-16;
const MAX_TERMS: usize = 500;

/// K₀(x) for x > 0. Returns +∞ at 0 and NaN for negative or NaN input.
///
/// Ascending series below x = 2; above it Steed's continued fraction for
/// the ratio K₁/K₀ and the companion sum of Temme's method.
pub fn bessel_k0(x: f64) -> f64 {
    if x.is_nan() || x < 0.0 {
        return f64::NAN;
    }
    if x == 0.0 {
        return f64::INFINITY;
    }
    if x.is_infinite() {
        return 0.0;
    }
    if x <= CROSSOVER {
        k0_series(x)
    } else {
        k0_continued_fraction(x)
    }
}

/// K₀(x) = −(ln(x/2) + γ) I₀(x) + Σ_{k≥1} (x²/4)^k / (k!)² · H_k
fn k0_series(x: f64) -> f64 {
    let y = 0.25 * x * x;
    let mut term = 1.0;
    let mut i0 = 1.0;
    let mut harmonic_sum = 0.0;
    let mut harmonic = 0.0;
    for k in 1..MAX_TERMS {
        let kf = k as f64;
        term *= y / (kf * kf);
        harmonic += 1.0 / kf;
        i0 += term;
        harmonic_sum += term * harmonic;
        if term * harmonic < EPS * harmonic_sum.abs().max(i0) {
            break;
        }
    }
    -((0.5 * x).ln() + EULER_GAMMA) * i0 + harmonic_sum
}

fn k0_continued_fraction(x: f64) -> f64 {
    // Order ν = 0, so a1 = 1/4 − ν² = 1/4.
    let a1 = 0.25;
    let mut b = 2.0 * (1.0 + x);
    let mut d = 1.0 / b;
    let mut delh = d;
    let mut q1 = 0.0;
    let mut q2 = 1.0;
    let mut q = a1;
    let mut c = a1;
    let mut a = -a1;
    let mut s = 1.0 + q * delh;
    for i in 2..MAX_TERMS {
        let fi = i as f64;
        a -= 2.0 * (fi - 1.0);
        c = -a * c / fi;
        let qnew = (q1 - b * q2) / a;
        q1 = q2;
        q2 = qnew;
        q += c * qnew;
        b += 2.0;
        d = 1.0 / (b + a * d);
        delh *= b * d - 1.0;
        let dels = q * delh;
        s += dels;
        if (dels / s).abs() < EPS {
            break;
        }
    }
    (std::f64::consts::PI / (2.0 * x)).sqrt() * (-x).exp() / s
}

/// Leading large-argument form √(π/2x)·e^{−x}.
pub fn bessel_k0_asymptotic(x: f64) -> f64 {
    (std::f64::consts::PI / (2.0 * x)).sqrt() * (-x).exp()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn known_values() {
        // Reference values of K0 to 15 significant digits.
        let cases = [
            (0.1, 2.427_069_024_702_017),
            (1.0, 0.421_024_438_240_708_3),
            (2.0, 0.113_893_872_749_533_4),
            (5.0, 0.003_691_098_334_042_594),
        ];
        for (x, want) in cases {
            let got = bessel_k0(x);
            assert!(((got - want) / want).abs() < 1e-12, "K0({x}) = {got}, want {want}");
        }
    }

    #[test]
    fn continuous_at_crossover() {
        let lo = k0_series(2.0);
        let hi = k0_continued_fraction(2.0);
        assert!(((lo - hi) / lo).abs() < 1e-13);
    }

    #[test]
    fn edge_inputs() {
        assert!(bessel_k0(0.0).is_infinite());
        assert!(bessel_k0(-1.0).is_nan());
        assert_eq!(bessel_k0(f64::INFINITY), 0.0);
        assert!(bessel_k0(1e-300) > 600.0);
    }

    #[test]
    fn asymptotic_ratio_tends_to_one() {
        let r = |x: f64| bessel_k0(x) / bessel_k0_asymptotic(x);
        assert!((r(50.0) - 1.0).abs() < 3e-3);
        assert!((r(200.0) - 1.0).abs() < (r(50.0) - 1.0).abs());
    }
}
