//! Detection-window calibration: one of 45 offset patterns shifts and
//! rescales a window `(x, y, w, h)` to
//! `(x - x_n w / s_n, y - y_n h / s_n, w / s_n, h / s_n)`.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub const X_OFFSETS: [f64; 3] = [-0.17, 0.0, 0.17];
pub const Y_OFFSETS: [f64; 3] = [-0.17, 0.0, 0.17];
pub const SCALES: [f64; 5] = [0.83, 0.91, 1.0, 1.10, 1.21];

/// Index of `(0, 0, 1.0)` in [`offset_pattern_table`].
pub const IDENTITY_PATTERN: usize = 22;

/// Window with top-left corner `(x, y)`, in real pixel coordinates.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Window {
    pub x: f64,
    pub y: f64,
    pub w: f64,
    pub h: f64,
}

impl Window {
    pub fn new(x: f64, y: f64, w: f64, h: f64) -> Result<Self> {
        let win = Window { x, y, w, h };
        win.validate()?;
        Ok(win)
    }

    pub fn validate(&self) -> Result<()> {
        if ![self.x, self.y, self.w, self.h]
            .iter()
            .all(|v| v.is_finite())
        {
            return Err(Error::arg("window coordinates must be finite"));
        }
        if self.w <= 0.0 || self.h <= 0.0 {
            return Err(Error::arg(format!(
                "window size must be positive, got {} x {}",
                self.w, self.h
            )));
        }
        Ok(())
    }

    pub fn center(&self) -> (f64, f64) {
        (self.x + self.w / 2.0, self.y + self.h / 2.0)
    }

    /// Integer pixel window, each coordinate rounded half up.
    pub fn rasterize(&self) -> PixelWindow {
        let r = |v: f64| (v + 0.5).floor() as i64;
        PixelWindow {
            x: r(self.x),
            y: r(self.y),
            w: r(self.w),
            h: r(self.h),
        }
    }

    /// Intersection with the image rectangle `[0, width] x [0, height]`;
    /// `None` when nothing of the window remains inside.
    pub fn clamp_to(&self, width: f64, height: f64) -> Option<Window> {
        let x0 = self.x.max(0.0);
        let y0 = self.y.max(0.0);
        let x1 = (self.x + self.w).min(width);
        let y1 = (self.y + self.h).min(height);
        (x1 > x0 && y1 > y0).then_some(Window {
            x: x0,
            y: y0,
            w: x1 - x0,
            h: y1 - y0,
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct PixelWindow {
    pub x: i64,
    pub y: i64,
    pub w: i64,
    pub h: i64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct OffsetPattern {
    pub x_n: f64,
    pub y_n: f64,
    pub s_n: f64,
}

impl OffsetPattern {
    pub fn identity() -> Self {
        OffsetPattern {
            x_n: 0.0,
            y_n: 0.0,
            s_n: 1.0,
        }
    }
}

/// All 45 patterns in lexicographic `(x_n, y_n, s_n)` order.
pub fn offset_pattern_table() -> Vec<OffsetPattern> {
    let mut table = Vec::with_capacity(45);
    for &x_n in &X_OFFSETS {
        for &y_n in &Y_OFFSETS {
            for &s_n in &SCALES {
                table.push(OffsetPattern { x_n, y_n, s_n });
            }
        }
    }
    table
}

/// Looks up a table entry by index in `0..45`.
pub fn pattern(index: usize) -> Result<OffsetPattern> {
    offset_pattern_table()
        .get(index)
        .copied()
        .ok_or_else(|| Error::arg(format!("pattern index {index} is outside 0..45")))
}

pub fn apply_calibration(win: &Window, pat: &OffsetPattern) -> Result<Window> {
    if !pat.s_n.is_finite() || pat.s_n <= 0.0 {
        return Err(Error::arg(format!(
            "pattern scale must be positive, got {}",
            pat.s_n
        )));
    }
    win.validate()?;
    Ok(Window {
        x: win.x - pat.x_n * win.w / pat.s_n,
        y: win.y - pat.y_n * win.h / pat.s_n,
        w: win.w / pat.s_n,
        h: win.h / pat.s_n,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    #[test]
    fn table_shape() {
        let t = offset_pattern_table();
        assert_eq!(t.len(), 45);
        assert_eq!(t[IDENTITY_PATTERN], OffsetPattern::identity());
        for i in 0..t.len() {
            for j in i + 1..t.len() {
                assert_ne!(t[i], t[j]);
            }
        }
        assert_eq!(
            t[0],
            OffsetPattern {
                x_n: -0.17,
                y_n: -0.17,
                s_n: 0.83
            }
        );
        assert!(pattern(45).is_err());
    }

    #[test]
    fn identity_is_exact() {
        let w = Window::new(12.3, -4.5, 7.25, 99.0).unwrap();
        assert_eq!(
            apply_calibration(&w, &OffsetPattern::identity()).unwrap(),
            w
        );
    }

    #[test]
    fn hand_case() {
        let w = Window::new(100.0, 100.0, 50.0, 60.0).unwrap();
        let p = OffsetPattern {
            x_n: 0.17,
            y_n: -0.17,
            s_n: 0.83,
        };
        let out = apply_calibration(&w, &p).unwrap();
        assert_abs_diff_eq!(out.x, 100.0 - 0.17 * 50.0 / 0.83, epsilon = 1e-12);
        assert_abs_diff_eq!(out.x, 89.759, epsilon = 1e-3);
        assert_abs_diff_eq!(out.y, 112.289, epsilon = 1e-3);
        assert_abs_diff_eq!(out.w, 60.241, epsilon = 1e-3);
        assert_abs_diff_eq!(out.h, 72.289, epsilon = 1e-3);
    }

    #[test]
    fn pure_scaling() {
        let w = Window::new(0.0, 0.0, 10.0, 20.0).unwrap();
        let half = OffsetPattern {
            x_n: 0.0,
            y_n: 0.0,
            s_n: 2.0,
        };
        let out = apply_calibration(&w, &half).unwrap();
        assert_eq!((out.w, out.h), (5.0, 10.0));
        let a = OffsetPattern { s_n: 0.91, ..half };
        let b = OffsetPattern { s_n: 1.21, ..half };
        let ab = OffsetPattern {
            s_n: 0.91 * 1.21,
            ..half
        };
        let two = apply_calibration(&apply_calibration(&w, &a).unwrap(), &b).unwrap();
        let one = apply_calibration(&w, &ab).unwrap();
        assert_abs_diff_eq!(two.w, one.w, epsilon = 1e-12);
        assert_abs_diff_eq!(two.h, one.h, epsilon = 1e-12);
    }

    #[test]
    fn center_shift_matches_formula() {
        let w = Window::new(30.0, 40.0, 50.0, 60.0).unwrap();
        for p in offset_pattern_table() {
            let out = apply_calibration(&w, &p).unwrap();
            let (cx, cy) = w.center();
            let (ox, oy) = out.center();
            let dx = -p.x_n * w.w / p.s_n + (1.0 / p.s_n - 1.0) * w.w / 2.0;
            let dy = -p.y_n * w.h / p.s_n + (1.0 / p.s_n - 1.0) * w.h / 2.0;
            assert_abs_diff_eq!(ox - cx, dx, epsilon = 1e-9);
            assert_abs_diff_eq!(oy - cy, dy, epsilon = 1e-9);
        }
    }

    #[test]
    fn bad_inputs() {
        let w = Window::new(0.0, 0.0, 1.0, 1.0).unwrap();
        assert!(apply_calibration(
            &w,
            &OffsetPattern {
                s_n: 0.0,
                ..OffsetPattern::identity()
            }
        )
        .is_err());
        assert!(apply_calibration(
            &w,
            &OffsetPattern {
                s_n: -1.0,
                ..OffsetPattern::identity()
            }
        )
        .is_err());
        assert!(Window::new(0.0, 0.0, 0.0, 1.0).is_err());
    }

    #[test]
    fn rasterize_and_clamp() {
        let w = Window {
            x: 2.5,
            y: -0.5,
            w: 3.49,
            h: 10.0,
        };
        assert_eq!(
            w.rasterize(),
            PixelWindow {
                x: 3,
                y: 0,
                w: 3,
                h: 10
            }
        );
        let c = w.clamp_to(4.0, 5.0).unwrap();
        assert_eq!(
            c,
            Window {
                x: 2.5,
                y: 0.0,
                w: 1.5,
                h: 5.0
            }
        );
        assert!(w.clamp_to(1.0, 1.0).is_none());
    }
}
