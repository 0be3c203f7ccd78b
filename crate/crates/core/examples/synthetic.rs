//! The contaminated-cluster generator: class sizes, the contamination truth
//! and the density contrast between clean and contaminated samples.

use complexity_perception::eval::{
    generate_synthetic_with_truth, mean_pairwise_distance, SyntheticSpec, CONSTITUTION_PRIORS,
};

fn main() -> complexity_perception::Result<()> {
    let spec = SyntheticSpec {
        class_count: 3,
        dim: 20,
        samples: 600,
        priors: None,
        cluster_separation: 1.0,
        contamination_fraction: 0.3,
        contamination_noise_scale: 3.0,
        seed: 0,
    };
    let data = generate_synthetic_with_truth(&spec)?;
    let (mut clean, mut dirty) = (Vec::new(), Vec::new());
    for (s, &c) in data.dataset.samples().iter().zip(&data.contaminated) {
        if c {
            dirty.push(s.features.as_slice());
        } else {
            clean.push(s.features.as_slice());
        }
    }
    println!("{} clean, {} contaminated", clean.len(), dirty.len());
    println!(
        "mean pairwise distance: clean {:.2}, contaminated {:.2}",
        mean_pairwise_distance(&clean).unwrap_or(f64::NAN),
        mean_pairwise_distance(&dirty).unwrap_or(f64::NAN)
    );

    let priors = SyntheticSpec {
        class_count: 9,
        samples: 1000,
        priors: Some(CONSTITUTION_PRIORS.to_vec()),
        ..spec
    };
    println!(
        "constitution-shaped class sizes: {:?}",
        priors.class_sizes()
    );
    Ok(())
}
