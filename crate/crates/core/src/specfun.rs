//! Scalar special functions: the Gaussian tail `Q`, the exponential integral
//! on the negative real axis and the scaled form `T(z) = e^z Ei(-z)`.
//!
//! `Ei(-z)` uses two regimes split at `z = 5`. Below the split the
//! convergent power series around the origin is summed; above it the
//! continued fraction for `E1(z) e^z` is evaluated with the modified Lentz
//! algorithm. The continued fraction yields `T` directly, so `T(z)` never
//! forms the product of a huge `e^z` and a tiny `Ei(-z)`.

use std::f64::consts::SQRT_2;

use crate::error::{Error, Result};

/// Euler–Mascheroni constant.
pub const EULER_GAMMA: f64 = 0.577_215_664_901_532_9;

/// Series/continued-fraction crossover for `Ei(-z)`.
const SERIES_LIMIT: f64 = 5.0;
const MAX_TERMS: usize = 500;

/// Upper tail of the standard normal distribution, `Pr{N(0,1) > x}`.
pub fn q_function(x: f64) -> f64 {
    0.5 * libm::erfc(x / SQRT_2)
}

/// `Ei(-z)` for `z > 0`.
pub fn exp_int_ei_neg(z: f64) -> Result<f64> {
    check_positive("exp_int_ei_neg", z)?;
    if z < SERIES_LIMIT {
        Ok(ei_neg_series(z))
    } else {
        Ok(scaled_e1_continued_fraction(z) * -(-z).exp())
    }
}

/// `T(z) = e^z Ei(-z)` for `z > 0`.
///
/// Always in `(-1/z, 0)` and increasing towards zero.
pub fn t_func(z: f64) -> Result<f64> {
    check_positive("t_func", z)?;
    Ok(t_unchecked(z))
}

/// `T(z)` without the domain check, for hot loops whose callers have
/// already established `z > 0`.
#[inline]
pub(crate) fn t_unchecked(z: f64) -> f64 {
    if z < SERIES_LIMIT {
        z.exp() * ei_neg_series(z)
    } else {
        -scaled_e1_continued_fraction(z)
    }
}

fn check_positive(function: &'static str, z: f64) -> Result<()> {
    // NaN fails the comparison; +inf is accepted and maps to the limit 0.
    if z > 0.0 {
        Ok(())
    } else {
        Err(Error::Domain {
            function,
            value: z,
            requirement: "z > 0",
        })
    }
}

/// `Ei(-z) = gamma + ln z + sum_{k>=1} (-z)^k / (k k!)`.
fn ei_neg_series(z: f64) -> f64 {
    let mut term = 1.0;
    let mut sum = 0.0;
    for k in 1..MAX_TERMS {
        let k = k as f64;
        term *= -z / k;
        let contribution = term / k;
        sum += contribution;
        if contribution.abs() <= f64::EPSILON * 0.25 * sum.abs() {
            break;
        }
    }
    EULER_GAMMA + z.ln() + sum
}

/// `e^z E1(z)` by the continued fraction
/// `1/(z+1- 1/(z+3- 4/(z+5- ...)))`, valid and fast for `z >= 1`.
fn scaled_e1_continued_fraction(z: f64) -> f64 {
    if z.is_infinite() {
        return 0.0;
    }
    const TINY: f64 = 1e-300;
    let mut b = z + 1.0;
    let mut c = 1.0 / TINY;
    let mut d = 1.0 / b;
    let mut h = d;
    for i in 1..MAX_TERMS {
        let an = -((i * i) as f64);
        b += 2.0;
        d = 1.0 / (an * d + b);
        c = b + an / c;
        let delta = c * d;
        h *= delta;
        if (delta - 1.0).abs() <= f64::EPSILON {
            break;
        }
    }
    h
}

#[cfg(test)]
mod tests {
    use super::*;

    // Ei(-z) and T(z) frozen from a 40-digit evaluation (mpmath).
    const EI_TABLE: &[(f64, f64, f64)] = &[
        (1e-6, -13.238_295_893_062_491, -13.238_309_131_365_003),
        (1e-3, -6.331_539_364_136_149, -6.337_874_070_325_488),
        (0.1, -1.822_923_958_419_390_7, -2.014_642_544_708_451_7),
        (0.5, -0.559_773_594_776_160_8, -0.922_910_632_483_730_5),
        (1.0, -0.219_383_934_395_520_27, -0.596_347_362_323_194_1),
        (2.0, -0.048_900_510_708_061_12, -0.361_328_616_888_222_6),
        (4.9, -0.001_291_483_362_705_985_2, -0.173_433_016_244_546_37),
        (5.0, -0.001_148_295_591_275_325_8, -0.170_422_176_284_732_2),
        (5.1, -0.001_021_300_107_861_737_7, -0.167_515_591_617_077_6),
        (10.0, -4.156_968_929_685_324e-6, -0.091_563_333_939_788_08),
        (30.0, -3.021_552_010_688_812_5e-15, -0.032_289_738_758_980_125),
        (100.0, -3.683_597_761_682_032e-46, -0.009_901_942_286_733_018),
    ];

    #[test]
    fn ei_matches_high_precision_table() {
        for &(z, ei, _) in EI_TABLE {
            let got = exp_int_ei_neg(z).unwrap();
            assert!(((got - ei) / ei).abs() <= 1e-11, "z={z}: {got} vs {ei}");
        }
    }

    #[test]
    fn t_matches_high_precision_table() {
        for &(z, _, t) in EI_TABLE {
            let got = t_func(z).unwrap();
            assert!(((got - t) / t).abs() <= 1e-11, "z={z}: {got} vs {t}");
        }
        let t700 = t_func(700.0).unwrap();
        assert!((t700 + 0.001_426_536_418_300_886_7).abs() < 1e-15);
        let t1e4 = t_func(1e4).unwrap();
        assert!((t1e4 + 9.999_000_199_940_024e-5).abs() < 1e-17);
    }

    #[test]
    fn regimes_agree_at_the_crossover() {
        for z in [3.0, 4.0, 5.0, 6.0] {
            let series = ei_neg_series(z);
            let cf = -scaled_e1_continued_fraction(z) * (-z).exp();
            assert!(((series - cf) / cf).abs() < 1e-11, "z={z}");
        }
    }

    #[test]
    fn ei_near_origin_approaches_log() {
        for z in [1e-8_f64, 1e-10, 1e-12] {
            let diff = exp_int_ei_neg(z).unwrap() - (EULER_GAMMA + z.ln());
            assert!(diff.abs() < 2.0 * z, "z={z}: {diff}");
        }
    }

    #[test]
    fn ei_asymptotic_bound() {
        let z = 30.0_f64;
        let v = exp_int_ei_neg(z).unwrap();
        assert!(v < 0.0);
        assert!(v.abs() < (-z).exp() / z * 1.05);
    }

    #[test]
    fn domain_errors() {
        for bad in [0.0, -1.0, f64::NAN] {
            assert!(matches!(exp_int_ei_neg(bad), Err(Error::Domain { .. })));
            assert!(matches!(t_func(bad), Err(Error::Domain { .. })));
        }
        assert_eq!(exp_int_ei_neg(f64::INFINITY).unwrap(), 0.0);
        assert_eq!(t_func(f64::INFINITY).unwrap(), 0.0);
    }

    #[test]
    fn q_reference_points() {
        assert_eq!(q_function(0.0), 0.5);
        assert!(q_function(8.0) < 1e-15);
        assert!((q_function(8.0) - 6.220_960_574_271_784e-16).abs() < 1e-28);
        assert!((q_function(1.0) - 0.158_655_253_931_457_05).abs() < 1e-16);
        assert!((q_function(-3.0) - 0.998_650_101_968_369_9).abs() < 1e-16);
        assert!((q_function(5.0) - 2.866_515_718_791_939e-7).abs() < 1e-21);
        assert_eq!(q_function(f64::INFINITY), 0.0);
    }

    /// Composite Simpson integration of the standard normal density on [x, 12].
    fn q_by_quadrature(x: f64) -> f64 {
        let upper = 12.0;
        let n = 20_000;
        let h = (upper - x) / n as f64;
        let pdf = |t: f64| (-0.5 * t * t).exp() / (2.0 * std::f64::consts::PI).sqrt();
        let mut acc = pdf(x) + pdf(upper);
        for i in 1..n {
            let w = if i % 2 == 1 { 4.0 } else { 2.0 };
            acc += w * pdf(x + i as f64 * h);
        }
        acc * h / 3.0
    }

    #[test]
    fn q_agrees_with_density_quadrature() {
        let q = q_by_quadrature(1.6449);
        assert!((q - 0.05).abs() < 1e-4);
        assert!((q_function(1.6449) - q).abs() < 1e-12);
        for x in [-2.0, -0.3, 0.7, 2.5, 4.0] {
            assert!((q_function(x) - q_by_quadrature(x)).abs() < 1e-12, "x={x}");
        }
    }

    #[test]
    fn t_is_increasing_on_log_grid() {
        let n = 4000;
        let (lo, hi) = (1e-4_f64.ln(), 1e4_f64.ln());
        let mut prev = f64::NEG_INFINITY;
        for i in 0..=n {
            let z = (lo + (hi - lo) * i as f64 / n as f64).exp();
            let t = t_func(z).unwrap();
            assert!(t > prev, "z={z}");
            assert!(t < 0.0 && t > -1.0 / z, "envelope at z={z}");
            prev = t;
        }
    }

    #[test]
    fn t_derivative_identity_by_finite_differences() {
        // d/dz T(z) = T(z) + 1/z
        let mut z = 0.1;
        while z <= 50.0 {
            let h = 1e-5 * z;
            let fd = (t_func(z + h).unwrap() - t_func(z - h).unwrap()) / (2.0 * h);
            let exact = t_func(z).unwrap() + 1.0 / z;
            assert!(((fd - exact) / exact).abs() < 1e-6, "z={z}: {fd} vs {exact}");
            z *= 1.17;
        }
    }

    proptest::proptest! {
        #[test]
        fn q_symmetry(x in -10.0_f64..10.0) {
            proptest::prop_assert!((q_function(x) + q_function(-x) - 1.0).abs() <= 1e-12);
        }

        #[test]
        fn q_is_decreasing(x in -5.0_f64..9.0, dx in 1e-3_f64..1.0) {
            proptest::prop_assert!(q_function(x + dx) < q_function(x));
        }
    }
}
