use libm::erfc;

use crate::error::{Error, Result};

const FRAC_1_SQRT_2PI: f64 = 0.398_942_280_401_432_7;

/// Standard normal density.
pub fn normal_pdf(z: f64) -> f64 {
    FRAC_1_SQRT_2PI * (-0.5 * z * z).exp()
}

/// Standard normal distribution function.
///
/// Evaluated through the complementary error function so that both tails keep
/// full relative precision.
pub fn normal_cdf(z: f64) -> f64 {
    0.5 * erfc(-z * std::f64::consts::FRAC_1_SQRT_2)
}

/// Inverse of the standard normal distribution function (Wichura's AS 241,
/// PPND16, relative accuracy about 1e-16).
pub fn normal_quantile(p: f64) -> Result<f64> {
    if !(p > 0.0 && p < 1.0) {
        return Err(Error::Domain(format!(
            "normal quantile requires 0 < p < 1, got {p}"
        )));
    }
    let q = p - 0.5;
    if q.abs() <= 0.425 {
        let r = 0.180625 - q * q;
        let num = (((((((2509.080_928_730_122_7 * r + 33_430.575_583_588_128) * r
            + 67_265.770_927_008_7)
            * r
            + 45_921.953_931_549_87)
            * r
            + 13_731.693_765_509_461)
            * r
            + 1_971.590_950_306_551_4)
            * r
            + 133.141_667_891_784_38)
            * r
            + 3.387_132_872_796_366_5)
            * q;
        let den = ((((((5_226.495_278_852_545 * r + 28_729.085_735_721_943) * r
            + 39_307.895_800_092_71)
            * r
            + 21_213.794_301_586_597)
            * r
            + 5_394.196_021_424_751)
            * r
            + 687.187_007_492_057_9)
            * r
            + 42.313_330_701_600_91)
            * r
            + 1.0;
        return Ok(num / den);
    }

    let tail = if q < 0.0 { p } else { 1.0 - p };
    let mut r = (-tail.ln()).sqrt();
    let value = if r <= 5.0 {
        r -= 1.6;
        let num = ((((((7.745_450_142_783_414e-4 * r + 0.022_723_844_989_269_184) * r
            + 0.241_780_725_177_450_6)
            * r
            + 1.270_458_252_452_368_4)
            * r
            + 3.647_848_324_763_204_5)
            * r
            + 5.769_497_221_460_691)
            * r
            + 4.630_337_846_156_545)
            * r
            + 1.423_437_110_749_683_5;
        let den = ((((((1.050_750_071_644_416_9e-9 * r + 5.475_938_084_995_345e-4) * r
            + 0.015_198_666_563_616_457)
            * r
            + 0.148_103_976_427_480_08)
            * r
            + 0.689_767_334_985_1)
            * r
            + 1.676_384_830_183_803_8)
            * r
            + 2.053_191_626_637_759)
            * r
            + 1.0;
        num / den
    } else {
        r -= 5.0;
        let num = ((((((2.010_334_399_292_288_1e-7 * r + 2.711_555_568_743_487_6e-5) * r
            + 1.242_660_947_388_078_4e-3)
            * r
            + 0.026_532_189_526_576_124)
            * r
            + 0.296_560_571_828_504_9)
            * r
            + 1.784_826_539_917_291_3)
            * r
            + 5.463_784_911_164_114)
            * r
            + 6.657_904_643_501_103_8;
        let den = ((((((2.044_263_103_389_939_8e-15 * r + 1.421_511_758_316_446e-7) * r
            + 1.846_318_317_510_054_8e-5)
            * r
            + 7.868_691_311_456_133e-4)
            * r
            + 0.014_875_361_290_850_615)
            * r
            + 0.136_929_880_922_735_8)
            * r
            + 0.599_832_206_555_887_9)
            * r
            + 1.0;
        num / den
    };
    Ok(if q < 0.0 { -value } else { value })
}

#[cfg(test)]
mod tests {
    use super::*;

    /// Composite Simpson rule for the density on [0, z]; independent of erfc.
    fn cdf_by_quadrature(z: f64) -> f64 {
        let steps = 20_000;
        let h = z / steps as f64;
        let mut acc = normal_pdf(0.0) + normal_pdf(z);
        for k in 1..steps {
            let w = if k % 2 == 1 { 4.0 } else { 2.0 };
            acc += w * normal_pdf(k as f64 * h);
        }
        0.5 + acc * h / 3.0
    }

    /// Quantile by bisection on the quadrature oracle.
    fn quantile_by_bisection(p: f64) -> f64 {
        let (mut lo, mut hi) = (-9.0, 9.0);
        for _ in 0..200 {
            let mid = 0.5 * (lo + hi);
            let c = if mid >= 0.0 {
                cdf_by_quadrature(mid)
            } else {
                1.0 - cdf_by_quadrature(-mid)
            };
            if c < p {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        0.5 * (lo + hi)
    }

    #[test]
    fn cdf_symmetry_and_center() {
        assert_eq!(normal_cdf(0.0), 0.5);
        for &z in &[0.1, 0.7, 1.5, 3.0, 6.0, 12.0] {
            assert!((normal_cdf(z) - (1.0 - normal_cdf(-z))).abs() <= 1e-14);
        }
    }

    #[test]
    fn cdf_matches_quadrature() {
        assert!((cdf_by_quadrature(1.959963985) - 0.975).abs() < 1e-9);
        assert!((normal_cdf(1.959963985) - 0.975).abs() < 1e-9);
        for &z in &[0.25, 1.0, 2.5, 4.0, 6.0] {
            let (a, b) = (normal_cdf(z), cdf_by_quadrature(z));
            assert!((a - b).abs() < 1e-12, "z = {z}: {a} vs {b}");
        }
    }

    #[test]
    fn quantile_reference_points() {
        assert_eq!(normal_quantile(0.5).unwrap(), 0.0);
        let q975 = quantile_by_bisection(0.975);
        assert!((q975 - 1.959964).abs() < 1e-5);
        assert!((normal_quantile(0.975).unwrap() - q975).abs() < 1e-9);
        let q = quantile_by_bisection(0.999875);
        assert!((q - 3.66234).abs() < 1e-4);
        assert!((normal_quantile(0.999875).unwrap() - q).abs() < 1e-9);
    }

    #[test]
    fn quantile_rejects_boundary() {
        for p in [0.0, 1.0, -0.1, 1.5, f64::NAN] {
            assert!(matches!(normal_quantile(p), Err(Error::Domain(_))));
        }
    }

    #[test]
    fn quantile_cdf_round_trip_grid() {
        let mut p = 1e-6;
        while p < 1.0 - 1e-6 {
            let z = normal_quantile(p).unwrap();
            assert!((normal_cdf(z) - p).abs() <= 1e-9, "p = {p}");
            p += 1.3e-3;
        }
        for &p in &[1e-6, 1e-5, 1e-4, 1.0 - 1e-4, 1.0 - 1e-6, 1e-12, 1e-20] {
            let z = normal_quantile(p).unwrap();
            assert!(((normal_cdf(z) - p) / p.min(1.0 - p)).abs() < 1e-9);
        }
    }
}
