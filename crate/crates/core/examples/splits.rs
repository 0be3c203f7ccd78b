//! Seeded holdout, random and stratified k-fold splits.

use complexity_perception::data::{holdout_split, random_kfold, stratified_kfold, Dataset};

fn main() -> complexity_perception::Result<()> {
    let labels: Vec<usize> = (0..23).map(|i| usize::from(i % 4 == 0)).collect();
    let rows = (0..23).map(|i| vec![i as f64]).collect();
    let ds = Dataset::from_rows(rows, labels, vec!["common".into(), "rare".into()])?;
    println!("class counts {:?}", ds.class_counts());

    let (train, val) = holdout_split(&ds, 0.15, 3)?;
    println!(
        "15% holdout: train {:?}, validation {:?}",
        train.class_counts(),
        val.class_counts()
    );

    let plain = random_kfold(&ds, 5, 3)?;
    let strat = stratified_kfold(&ds, 5, 3)?;
    for f in 0..5 {
        let (_, test) = strat.split(&ds, f)?;
        println!(
            "fold {f}: random size {}, stratified size {} with classes {:?}",
            plain.fold_sizes()[f],
            strat.fold_sizes()[f],
            test.class_counts()
        );
    }
    // Same seed, same folds.
    assert_eq!(
        stratified_kfold(&ds, 5, 3)?.fold_sizes(),
        strat.fold_sizes()
    );
    Ok(())
}
