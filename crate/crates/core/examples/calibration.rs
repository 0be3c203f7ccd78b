//! Window arithmetic for the 45 calibration offset patterns.

use complexity_perception::calibration::{
    apply_calibration, offset_pattern_table, pattern, Window, IDENTITY_PATTERN,
};

fn main() -> complexity_perception::Result<()> {
    let win = Window::new(100.0, 100.0, 50.0, 60.0)?;
    println!(
        "identity pattern {IDENTITY_PATTERN}: {:?}",
        apply_calibration(&win, &pattern(IDENTITY_PATTERN)?)?
    );

    for (i, p) in offset_pattern_table().iter().enumerate().step_by(11) {
        let out = apply_calibration(&win, p)?;
        println!(
            "pattern {i:>2} ({:+.2}, {:+.2}, {:.2}) -> ({:.3}, {:.3}, {:.3}, {:.3})",
            p.x_n, p.y_n, p.s_n, out.x, out.y, out.w, out.h
        );
    }

    // A window near the image corner, clamped and snapped to pixels.
    let moved = apply_calibration(&Window::new(5.0, 5.0, 40.0, 40.0)?, &pattern(0)?)?;
    match moved.clamp_to(64.0, 64.0) {
        Some(c) => println!("clamped {c:?}, pixels {:?}", c.rasterize()),
        None => println!("window left the image"),
    }
    Ok(())
}
