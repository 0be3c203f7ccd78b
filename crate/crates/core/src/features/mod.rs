//! Texture and color features: region-wise LBP histograms reduced by PCA,
//! concatenated with per-channel color moments.

mod color;
mod image;
mod lbp;
mod pca;

pub use self::image::{load_rgb, save_rgb, GrayImage, ImageFormat, RgbImage};
pub use color::{channel_moments, color_moments};
pub use lbp::{lbp_code, lbp_region_histograms, LbpParams};
pub use pca::{fit_pca, pca_transform, PcaModel};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Texture block first, then the color block.
pub fn combine_features(lbp_reduced: &[f64], color: &[f64]) -> Vec<f64> {
    let mut out = Vec::with_capacity(lbp_reduced.len() + color.len());
    out.extend_from_slice(lbp_reduced);
    out.extend_from_slice(color);
    out
}

/// Fitted LBP + PCA + color-moment extractor.
///
/// If the corpus is too small to support `texture_dim` components
/// (`N - 1 < texture_dim`), PCA keeps `N - 1` components and the texture
/// block is zero-padded to `texture_dim`, so the output width is always
/// `texture_dim + 9`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FeaturePipeline {
    pub lbp: LbpParams,
    pub texture_dim: usize,
    pub pca: PcaModel,
}

impl FeaturePipeline {
    /// Fits PCA on the corpus' LBP histograms and returns the pipeline with
    /// the feature vector of every input image.
    pub fn fit(
        images: &[RgbImage],
        lbp: LbpParams,
        texture_dim: usize,
    ) -> Result<(Self, Vec<Vec<f64>>)> {
        lbp.validate()?;
        if images.len() < 2 {
            return Err(Error::arg(format!(
                "feature extraction needs at least 2 images, got {}",
                images.len()
            )));
        }
        let hists = images
            .iter()
            .map(|img| lbp_region_histograms(&img.to_gray(), &lbp))
            .collect::<Result<Vec<_>>>()?;
        let kept = texture_dim.min(images.len() - 1).min(lbp.histogram_len());
        if kept < texture_dim {
            log::warn!(
                "{} images support only {kept} principal components; padding texture block to {texture_dim}",
                images.len()
            );
        }
        let pca = fit_pca(&hists, kept)?;
        let pipeline = FeaturePipeline {
            lbp,
            texture_dim,
            pca,
        };
        let features = images
            .iter()
            .zip(&hists)
            .map(|(img, h)| pipeline.assemble(img, h))
            .collect::<Result<Vec<_>>>()?;
        Ok((pipeline, features))
    }

    pub fn output_dim(&self) -> usize {
        self.texture_dim + 9
    }

    pub fn transform(&self, image: &RgbImage) -> Result<Vec<f64>> {
        let hist = lbp_region_histograms(&image.to_gray(), &self.lbp)?;
        self.assemble(image, &hist)
    }

    fn assemble(&self, image: &RgbImage, hist: &[f64]) -> Result<Vec<f64>> {
        let mut texture = self.pca.transform(hist)?;
        texture.resize(self.texture_dim, 0.0);
        Ok(combine_features(&texture, &color_moments(image)))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn combine_orders_blocks() {
        let lbp: Vec<f64> = (0..50).map(f64::from).collect();
        let color = [1.0; 9];
        let x = combine_features(&lbp, &color);
        assert_eq!(x.len(), 59);
        assert_eq!(&x[..50], &lbp[..]);
        assert_eq!(combine_features(&[], &color), color.to_vec());
    }

    fn corpus(n: usize) -> Vec<RgbImage> {
        (0..n)
            .map(|i| {
                RgbImage::from_fn(24, 24, |x, y| {
                    let v = ((x * (i + 3) + y * (2 * i + 1)) % 251) as u8;
                    [v, v.wrapping_mul(3), 255 - v]
                })
                .unwrap()
            })
            .collect()
    }

    #[test]
    fn pipeline_pads_small_corpora() {
        let images = corpus(10);
        let (pipe, feats) = FeaturePipeline::fit(&images, LbpParams::default(), 50).unwrap();
        assert_eq!(pipe.pca.target_dim(), 9);
        assert!(feats.iter().all(|f| f.len() == 59));
        assert!(feats.iter().all(|f| f[9..50].iter().all(|v| *v == 0.0)));
    }

    #[test]
    fn pipeline_is_deterministic() {
        let images = corpus(6);
        let lbp = LbpParams::new(8, 1.0, 2).unwrap();
        let (pipe, a) = FeaturePipeline::fit(&images, lbp, 3).unwrap();
        let (_, b) = FeaturePipeline::fit(&images, lbp, 3).unwrap();
        assert_eq!(a, b);
        assert_eq!(pipe.transform(&images[2]).unwrap(), a[2]);
    }
}
