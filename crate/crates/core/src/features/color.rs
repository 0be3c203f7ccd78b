//! Per-channel color moments: mean, population standard deviation and the
//! signed cube root of the third central moment.

use super::image::RgbImage;

/// `(mean, standard deviation, skewness)` of one channel.
///
/// The standard deviation uses `1/N` normalisation. The skewness term is
/// `sign(m3) * |m3|^(1/3)` for the third central moment `m3`.
pub fn channel_moments(values: &[f64]) -> (f64, f64, f64) {
    if values.is_empty() {
        return (0.0, 0.0, 0.0);
    }
    let n = values.len() as f64;
    let mean = values.iter().sum::<f64>() / n;
    let (mut m2, mut m3) = (0.0, 0.0);
    for &v in values {
        let d = v - mean;
        m2 += d * d;
        m3 += d * d * d;
    }
    (mean, (m2 / n).sqrt(), (m3 / n).cbrt())
}

/// `[E_R, E_G, E_B, σ_R, σ_G, σ_B, s_R, s_G, s_B]` with intensities taken as
/// reals in `[0, 255]`.
pub fn color_moments(image: &RgbImage) -> [f64; 9] {
    let mut out = [0.0; 9];
    for u in 0..3 {
        let (e, sigma, s) = channel_moments(&image.channel(u));
        out[u] = e;
        out[3 + u] = sigma;
        out[6 + u] = s;
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn constant_image() {
        let img = RgbImage::from_fn(4, 3, |_, _| [10, 20, 30]).unwrap();
        assert_eq!(
            color_moments(&img),
            [10.0, 20.0, 30.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0]
        );
    }

    #[test]
    fn symmetric_pair_has_zero_skew() {
        assert_eq!(channel_moments(&[0.0, 2.0]), (1.0, 1.0, 0.0));
    }

    #[test]
    fn right_skewed_triplet() {
        let (e, sigma, s) = channel_moments(&[0.0, 0.0, 3.0]);
        assert_eq!(e, 1.0);
        assert!((sigma - 2f64.sqrt()).abs() < 1e-15);
        assert!((s - 2f64.cbrt()).abs() < 1e-15);
        assert!((s - 1.259_921_049_894_873).abs() < 1e-12);
    }

    #[test]
    fn negative_third_moment_keeps_its_sign() {
        let (_, _, s) = channel_moments(&[0.0, 3.0, 3.0]);
        assert!((s + 2f64.cbrt()).abs() < 1e-15);
    }

    proptest! {
        #[test]
        fn negation_flips_mean_and_skew(values in prop::collection::vec(-255.0f64..255.0, 1..64)) {
            let neg: Vec<f64> = values.iter().map(|v| -v).collect();
            let (e, sigma, s) = channel_moments(&values);
            let (en, sigman, sn) = channel_moments(&neg);
            prop_assert!((e + en).abs() <= 1e-9 * (1.0 + e.abs()));
            prop_assert!((sigma - sigman).abs() <= 1e-9 * (1.0 + sigma));
            prop_assert!((s + sn).abs() <= 1e-9 * (1.0 + s.abs()));
        }
    }
}
