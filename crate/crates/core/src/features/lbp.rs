//! Local binary patterns and region-wise LBP histograms.
//!
//! Neighbour `p` sits at angle `2πp/P`, starting due east and turning
//! counterclockwise as seen on screen (image `y` grows downwards). For the
//! classic `P = 8, R = 1` operator the eight integer neighbours are used
//! directly; any other geometry samples with bilinear interpolation.

use serde::{Deserialize, Serialize};

use super::image::GrayImage;
use crate::error::{Error, Result};

/// Integer offsets of the classic 3x3 operator, in bit order.
const RING8: [(isize, isize); 8] = [
    (1, 0),
    (1, -1),
    (0, -1),
    (-1, -1),
    (-1, 0),
    (-1, 1),
    (0, 1),
    (1, 1),
];

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LbpParams {
    /// Sampling points on the circle.
    pub points: usize,
    pub radius: f64,
    /// Regions per axis of the histogram grid.
    pub grid: usize,
}

impl Default for LbpParams {
    fn default() -> Self {
        LbpParams {
            points: 8,
            radius: 1.0,
            grid: 10,
        }
    }
}

impl LbpParams {
    pub fn new(points: usize, radius: f64, grid: usize) -> Result<Self> {
        let p = LbpParams {
            points,
            radius,
            grid,
        };
        p.validate()?;
        Ok(p)
    }

    pub fn validate(&self) -> Result<()> {
        if self.points == 0 || self.points > 31 {
            return Err(Error::arg(format!(
                "LBP sampling points {} must lie in [1, 31]",
                self.points
            )));
        }
        if !(self.radius > 0.0 && self.radius.is_finite()) {
            return Err(Error::arg(format!(
                "LBP radius {} must be positive",
                self.radius
            )));
        }
        if self.grid == 0 {
            return Err(Error::arg("LBP grid side must be at least 1"));
        }
        Ok(())
    }

    pub fn bins(&self) -> usize {
        1 << self.points
    }

    /// Pixels excluded at each image edge.
    pub fn border(&self) -> usize {
        self.radius.ceil() as usize
    }

    pub fn histogram_len(&self) -> usize {
        self.grid * self.grid * self.bins()
    }

    fn is_classic(&self) -> bool {
        self.points == 8 && self.radius == 1.0
    }
}

/// Precomputed neighbour geometry for one parameter set.
enum Sampler {
    Classic,
    Circle(Vec<(f64, f64)>),
}

impl Sampler {
    fn new(params: &LbpParams) -> Self {
        if params.is_classic() {
            return Sampler::Classic;
        }
        let p = params.points as f64;
        let offsets = (0..params.points)
            .map(|i| {
                let angle = std::f64::consts::TAU * i as f64 / p;
                (
                    snap(params.radius * angle.cos()),
                    snap(-params.radius * angle.sin()),
                )
            })
            .collect();
        Sampler::Circle(offsets)
    }

    /// Code at a centre already known to be valid.
    fn code(&self, img: &GrayImage, cx: usize, cy: usize) -> u32 {
        let center = img.get(cx, cy);
        let mut code = 0u32;
        match self {
            Sampler::Classic => {
                for (bit, &(dx, dy)) in RING8.iter().enumerate() {
                    let g = img.get((cx as isize + dx) as usize, (cy as isize + dy) as usize);
                    if g >= center {
                        code |= 1 << bit;
                    }
                }
            }
            Sampler::Circle(offsets) => {
                let c = f64::from(center);
                for (bit, &(dx, dy)) in offsets.iter().enumerate() {
                    if bilinear(img, cx as f64 + dx, cy as f64 + dy) >= c {
                        code |= 1 << bit;
                    }
                }
            }
        }
        code
    }
}

/// Removes trigonometric round-off so that on-grid samples stay on-grid.
fn snap(v: f64) -> f64 {
    let r = v.round();
    if (v - r).abs() < 1e-9 {
        r
    } else {
        v
    }
}

/// Bilinear sample. Written as nested lerps so a constant patch yields its
/// value exactly.
fn bilinear(img: &GrayImage, x: f64, y: f64) -> f64 {
    let (x0, y0) = (x.floor(), y.floor());
    let (fx, fy) = (x - x0, y - y0);
    let (x0, y0) = (x0 as usize, y0 as usize);
    let x1 = if fx > 0.0 { x0 + 1 } else { x0 };
    let y1 = if fy > 0.0 { y0 + 1 } else { y0 };
    let px = |x, y| f64::from(img.get(x, y));
    let top = px(x0, y0) + fx * (px(x1, y0) - px(x0, y0));
    let bottom = px(x0, y1) + fx * (px(x1, y1) - px(x0, y1));
    top + fy * (bottom - top)
}

fn is_valid_center(img: &GrayImage, cx: usize, cy: usize, border: usize) -> bool {
    cx >= border && cy >= border && cx + border < img.width() && cy + border < img.height()
}

/// LBP code of the pixel at `(cx, cy)`; `s(0) = 1`.
pub fn lbp_code(image: &GrayImage, cx: usize, cy: usize, params: &LbpParams) -> Result<u32> {
    params.validate()?;
    let border = params.border();
    if !is_valid_center(image, cx, cy, border) {
        return Err(Error::OutOfBounds {
            x: cx,
            y: cy,
            border,
        });
    }
    Ok(Sampler::new(params).code(image, cx, cy))
}

/// Splits `len` into `parts` contiguous spans whose lengths differ by at
/// most one, longer spans first.
fn spans(len: usize, parts: usize) -> Vec<(usize, usize)> {
    let (base, extra) = (len / parts, len % parts);
    let mut out = Vec::with_capacity(parts);
    let mut start = 0;
    for i in 0..parts {
        let size = base + usize::from(i < extra);
        out.push((start, size));
        start += size;
    }
    out
}

/// Concatenated, per-region normalised LBP histograms over an `L x L`
/// tiling of the valid-centre area, regions in row-major order.
pub fn lbp_region_histograms(image: &GrayImage, params: &LbpParams) -> Result<Vec<f64>> {
    params.validate()?;
    let border = params.border();
    let valid_w = image.width().saturating_sub(2 * border);
    let valid_h = image.height().saturating_sub(2 * border);
    let cols = spans(valid_w, params.grid);
    let rows = spans(valid_h, params.grid);
    let sampler = Sampler::new(params);
    let bins = params.bins();
    let mut out = vec![0.0; params.histogram_len()];
    for (r, &(y0, h)) in rows.iter().enumerate() {
        for (c, &(x0, w)) in cols.iter().enumerate() {
            let region = r * params.grid + c;
            if w == 0 || h == 0 {
                return Err(Error::DegenerateRegion {
                    region,
                    row: r,
                    col: c,
                });
            }
            let hist = &mut out[region * bins..(region + 1) * bins];
            let mut counts = vec![0u64; bins];
            for y in y0..y0 + h {
                for x in x0..x0 + w {
                    counts[sampler.code(image, x + border, y + border) as usize] += 1;
                }
            }
            let total = (w * h) as f64;
            for (dst, &n) in hist.iter_mut().zip(&counts) {
                *dst = n as f64 / total;
            }
        }
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn classic(grid: usize) -> LbpParams {
        LbpParams::new(8, 1.0, grid).unwrap()
    }

    #[test]
    fn constant_image_gives_all_ones() {
        let img = GrayImage::from_fn(5, 5, |_, _| 77).unwrap();
        assert_eq!(lbp_code(&img, 2, 2, &classic(1)).unwrap(), 255);
        // interpolated geometry keeps constants exact
        let p = LbpParams::new(12, 1.5, 1).unwrap();
        assert_eq!(lbp_code(&img, 2, 2, &p).unwrap(), (1 << 12) - 1);
    }

    #[test]
    fn strict_maximum_gives_zero() {
        let img = GrayImage::from_fn(3, 3, |x, y| if (x, y) == (1, 1) { 200 } else { 10 }).unwrap();
        assert_eq!(lbp_code(&img, 1, 1, &classic(1)).unwrap(), 0);
    }

    #[test]
    fn worked_three_by_three_patch() {
        let img = GrayImage::new(3, 3, vec![1, 2, 3, 4, 5, 6, 7, 8, 9]).unwrap();
        assert_eq!(lbp_code(&img, 1, 1, &classic(1)).unwrap(), 225);
    }

    #[test]
    fn four_point_radius_one_uses_axis_neighbours() {
        // east, north, west, south
        let img = GrayImage::new(3, 3, vec![0, 9, 0, 1, 5, 5, 0, 2, 0]).unwrap();
        let p = LbpParams::new(4, 1.0, 1).unwrap();
        assert_eq!(lbp_code(&img, 1, 1, &p).unwrap(), 0b0011);
    }

    #[test]
    fn border_centres_are_rejected() {
        let img = GrayImage::from_fn(4, 4, |_, _| 0).unwrap();
        assert!(matches!(
            lbp_code(&img, 0, 1, &classic(1)),
            Err(Error::OutOfBounds { border: 1, .. })
        ));
        assert!(lbp_code(&img, 2, 3, &classic(1)).is_err());
        assert!(lbp_code(&img, 2, 2, &classic(1)).is_ok());
    }

    #[test]
    fn constant_histogram() {
        let img = GrayImage::from_fn(9, 9, |_, _| 3).unwrap();
        let h = lbp_region_histograms(&img, &classic(1)).unwrap();
        assert_eq!(h.len(), 256);
        assert_eq!(h[255], 1.0);
        assert_eq!(h.iter().sum::<f64>(), 1.0);
    }

    #[test]
    fn default_settings_length() {
        let img = GrayImage::from_fn(42, 42, |x, y| (x * 7 + y * 13) as u8).unwrap();
        assert_eq!(
            lbp_region_histograms(&img, &classic(10)).unwrap().len(),
            25_600
        );
    }

    #[test]
    fn too_small_regions_are_named() {
        let img = GrayImage::from_fn(4, 12, |_, _| 0).unwrap();
        match lbp_region_histograms(&img, &classic(3)) {
            Err(Error::DegenerateRegion { region, row, col }) => {
                assert_eq!((region, row, col), (2, 0, 2));
            }
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn two_tone_regions_differ() {
        let img = GrayImage::from_fn(12, 12, |x, y| {
            let base = if x < 6 { 40 } else { 180 };
            base + ((x * 5 + y * 3) % 7) as u8
        })
        .unwrap();
        let p = classic(2);
        let h = lbp_region_histograms(&img, &p).unwrap();
        // brute force: count codes over the left-top region directly
        let mut left = vec![0.0; 256];
        for y in 1..6 {
            for x in 1..6 {
                left[lbp_code(&img, x, y, &p).unwrap() as usize] += 1.0 / 25.0;
            }
        }
        for (a, b) in h[..256].iter().zip(&left) {
            assert!((a - b).abs() < 1e-12);
        }
        assert_ne!(&h[..256], &h[256..512]);
    }

    proptest! {
        #[test]
        fn codes_are_shift_invariant_and_in_range(
            pixels in prop::collection::vec(0u8..200, 36),
            shift in 0u8..55,
            points in prop::sample::select(vec![4usize, 8, 16]),
        ) {
            let img = GrayImage::new(6, 6, pixels.clone()).unwrap();
            let shifted = GrayImage::new(6, 6, pixels.iter().map(|p| p + shift).collect()).unwrap();
            let params = LbpParams::new(points, 1.0, 1).unwrap();
            for y in 1..5 {
                for x in 1..5 {
                    let a = lbp_code(&img, x, y, &params).unwrap();
                    prop_assert!((a as usize) < params.bins());
                    if points != 16 {
                        prop_assert_eq!(a, lbp_code(&shifted, x, y, &params).unwrap());
                    }
                }
            }
        }

        #[test]
        fn histograms_are_normalised(
            pixels in prop::collection::vec(any::<u8>(), 100),
            grid in 1usize..4,
        ) {
            let img = GrayImage::new(10, 10, pixels).unwrap();
            let p = classic(grid);
            let h = lbp_region_histograms(&img, &p).unwrap();
            for region in h.chunks(256) {
                prop_assert!((region.iter().sum::<f64>() - 1.0).abs() < 1e-12);
            }
            prop_assert!((h.iter().sum::<f64>() - (grid * grid) as f64).abs() < 1e-9);
        }
    }
}
