//! The whole method end to end: per-instance accuracy, the easy/difficult split,
//! the two side classifiers and routed prediction through the local
//! discriminator.

use complexity_perception::classifiers::ClassifierSpec;
use complexity_perception::complexity::{
    estimate_instance_accuracy, partition_by_threshold, train_cp, ComplexityTag, CpParams,
};
use complexity_perception::data::holdout_split;
use complexity_perception::eval::{generate_synthetic, SyntheticSpec};

fn main() -> complexity_perception::Result<()> {
    let data = generate_synthetic(&SyntheticSpec {
        class_count: 3,
        dim: 6,
        samples: 600,
        priors: None,
        cluster_separation: 1.5,
        contamination_fraction: 0.3,
        contamination_noise_scale: 4.5,
        seed: 7,
    })?;
    let (train, test) = holdout_split(&data, 0.2, 1)?;
    let base = ClassifierSpec::softmax();

    // N(x_i): how often each training sample is classified correctly by
    // k * e fold-trained classifiers.
    let acc = estimate_instance_accuracy(&train, 5, 8, &base, 3)?;
    let mut histogram = vec![0; acc.total() as usize + 1];
    for (_, c) in acc.iter() {
        histogram[c as usize] += 1;
    }
    println!("N(x_i) histogram over 0..={}: {histogram:?}", acc.total());
    for theta in [0.3, 0.5, 0.7, 0.9] {
        let p = partition_by_threshold(&acc, theta)?;
        println!(
            "theta {theta}: easy {}, difficult {}",
            p.easy_ids.len(),
            p.difficult_ids.len()
        );
    }

    let params = CpParams {
        e: 8,
        ..CpParams::traditional(base, 0.7, 3)
    };
    let model = train_cp(&train, &params)?;
    let mut routed = [0usize; 2];
    let mut correct = 0;
    for s in test.samples() {
        let (label, tag) = model.predict_with_tag(&s.features)?;
        routed[usize::from(tag == ComplexityTag::Difficult)] += 1;
        correct += usize::from(label == s.label);
    }
    println!(
        "test: {} routed easy, {} difficult, CP accuracy {:.1}%",
        routed[0],
        routed[1],
        100.0 * correct as f64 / test.len() as f64
    );
    println!(
        "fallbacks: easy {}, difficult {}",
        model.easy_fell_back(),
        model.difficult_fell_back()
    );
    Ok(())
}
