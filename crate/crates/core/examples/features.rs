//! LBP codes, region histograms, colour moments and the PCA-reduced feature
//! vector for a handful of generated images.

use complexity_perception::features::{
    color_moments, lbp_code, lbp_region_histograms, FeaturePipeline, GrayImage, LbpParams, RgbImage,
};

fn main() -> complexity_perception::Result<()> {
    // The classic 3x3 example: centre 5, code 225.
    let patch = GrayImage::new(3, 3, vec![1, 2, 3, 4, 5, 6, 7, 8, 9])?;
    let p8 = LbpParams::new(8, 1.0, 1)?;
    println!(
        "lbp code of the 3x3 patch: {}",
        lbp_code(&patch, 1, 1, &p8)?
    );

    let images: Vec<RgbImage> = (0..6)
        .map(|i| {
            RgbImage::from_fn(40, 40, |x, y| {
                let ripple = ((x * (i + 1) + y * 3) % 32) as u8 * 8;
                [ripple, 120 + (i as u8) * 10, (x + y) as u8 * 3]
            })
        })
        .collect::<Result<_, _>>()?;

    let params = LbpParams::new(8, 1.0, 4)?;
    let hist = lbp_region_histograms(&images[0].to_gray(), &params)?;
    println!(
        "region histograms: {} values for a 4x4 grid of 256 bins",
        hist.len()
    );

    let m = color_moments(&images[0]);
    println!("colour moments (E, sigma, s per channel): {m:.3?}");

    let (pipeline, vectors) = FeaturePipeline::fit(&images, params, 4)?;
    println!(
        "combined vector: {} values = 4 PCA components + 9 moments",
        vectors[0].len()
    );
    // A fitted pipeline maps unseen images the same way.
    let again = pipeline.transform(&images[1])?;
    println!("refit-free transform matches: {}", again == vectors[1]);
    Ok(())
}
