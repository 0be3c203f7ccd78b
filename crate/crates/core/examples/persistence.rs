//! A trained CP model saved to JSON, reloaded, and a feature CSV round trip.

use complexity_perception::classifiers::ClassifierSpec;
use complexity_perception::complexity::{train_cp, CpModel, CpParams};
use complexity_perception::data::{read_feature_csv, write_feature_csv};
use complexity_perception::eval::{generate_synthetic, SyntheticSpec};

fn main() -> complexity_perception::Result<()> {
    let data = generate_synthetic(&SyntheticSpec {
        class_count: 2,
        dim: 3,
        samples: 120,
        priors: None,
        cluster_separation: 2.0,
        contamination_fraction: 0.2,
        contamination_noise_scale: 6.0,
        seed: 4,
    })?;

    let mut buf = Vec::new();
    write_feature_csv(&mut buf, &data, &["seed: 4".to_string()])?;
    let back = read_feature_csv(buf.as_slice(), "memory", None)?;
    println!(
        "csv round trip preserved {} samples exactly: {}",
        back.len(),
        back == data
    );

    let params = CpParams {
        k: 4,
        e: 5,
        n: 20,
        ..CpParams::traditional(ClassifierSpec::linear_svm(), 0.6, 1)
    };
    let model = train_cp(&data, &params)?;
    let path = std::env::temp_dir().join("cperc-example-cp.json");
    model.save(&path)?;
    let loaded = CpModel::load(&path)?;
    let same = data.samples().iter().all(|s| {
        loaded.predict_with_tag(&s.features).ok() == model.predict_with_tag(&s.features).ok()
    });
    println!(
        "saved to {}, reloaded predictions identical: {same}",
        path.display()
    );
    Ok(())
}
