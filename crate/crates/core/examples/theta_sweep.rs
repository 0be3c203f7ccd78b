//! CP accuracy over the default θ grid. The baseline column stays constant
//! and the training easy sets shrink as θ grows.

use complexity_perception::classifiers::ClassifierSpec;
use complexity_perception::complexity::CpParams;
use complexity_perception::eval::{default_grid, generate_synthetic, sweep_theta, SyntheticSpec};

fn main() -> complexity_perception::Result<()> {
    let data = generate_synthetic(&SyntheticSpec {
        class_count: 2,
        dim: 5,
        samples: 300,
        priors: None,
        cluster_separation: 1.5,
        contamination_fraction: 0.3,
        contamination_noise_scale: 4.5,
        seed: 2,
    })?;
    let params = CpParams {
        e: 4,
        n: 25,
        ..CpParams::traditional(ClassifierSpec::softmax(), 0.5, 9)
    };
    let sweep = sweep_theta(&data, &params, &default_grid(), 5, 9)?;
    println!(
        "{:>6} {:>8} {:>8} {:>6} {:>6}  train easy per fold",
        "theta", "basic", "cp", "easy", "diff"
    );
    for r in &sweep.rows {
        println!(
            "{:>6.2} {:>8.2} {:>8.2} {:>6} {:>6}  {:?}",
            r.theta, r.basic, r.cp, r.easy_count, r.diff_count, r.train_easy_counts
        );
    }
    Ok(())
}
