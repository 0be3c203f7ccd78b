//! The three base classifiers on the same two-moon-ish data, plus a save and
//! reload round trip.

use complexity_perception::classifiers::{self, ClassifierSpec, TrainedClassifier};
use complexity_perception::data::{holdout_split, Dataset};

fn moons() -> Dataset {
    let mut rows = Vec::new();
    let mut labels = Vec::new();
    for i in 0..200 {
        let t = std::f64::consts::PI * (i % 100) as f64 / 100.0;
        let wobble = ((i * 37) % 11) as f64 / 40.0;
        if i < 100 {
            rows.push(vec![t.cos() + wobble, t.sin() - wobble]);
            labels.push(0);
        } else {
            rows.push(vec![1.0 - t.cos() - wobble, 0.5 - t.sin() + wobble]);
            labels.push(1);
        }
    }
    Dataset::from_rows(rows, labels, vec!["upper".into(), "lower".into()]).unwrap()
}

fn main() -> complexity_perception::Result<()> {
    let (train, test) = holdout_split(&moons(), 0.3, 42)?;
    for spec in [
        ClassifierSpec::softmax(),
        ClassifierSpec::linear_svm(),
        ClassifierSpec::decision_tree(),
    ] {
        let clf = classifiers::train(&spec, &train)?;
        println!(
            "{:<14} test accuracy {:.1}%",
            spec.kind.name(),
            100.0 * clf.accuracy(&test)?
        );
    }

    let clf = classifiers::train(&ClassifierSpec::softmax(), &train)?;
    let path = std::env::temp_dir().join("cperc-example-softmax.json");
    clf.save(&path)?;
    let back = TrainedClassifier::load(&path)?;
    println!("reloaded model agrees on every test sample: {}", {
        test.samples()
            .iter()
            .all(|s| back.predict(&s.features).ok() == clf.predict(&s.features).ok())
    });
    if let Some(p) = back.predict_proba(&test.samples()[0].features)? {
        println!("class probabilities of the first test sample: {p:.3?}");
    }
    Ok(())
}
