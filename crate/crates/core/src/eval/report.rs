//! Per-fold accuracy accounting and its CSV / text renderings.

use std::fmt::Write as _;
use std::io::Write;

use serde::{Deserialize, Serialize};

use crate::error::Result;

/// Integer outcome counts for one outer fold. Percentages are derived, so
/// `basic` and `cp` are exact mixtures of the easy and difficult figures.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FoldMetrics {
    pub fold: usize,
    pub theta: f64,
    /// Test samples routed easy / difficult by the local discriminator.
    pub easy_count: usize,
    pub diff_count: usize,
    pub easy_b_correct: usize,
    pub easy_cp_correct: usize,
    pub diff_b_correct: usize,
    pub diff_cp_correct: usize,
}

fn percent(correct: usize, total: usize) -> Option<f64> {
    (total > 0).then(|| 100.0 * correct as f64 / total as f64)
}

impl FoldMetrics {
    pub fn test_count(&self) -> usize {
        self.easy_count + self.diff_count
    }

    pub fn easy_b(&self) -> Option<f64> {
        percent(self.easy_b_correct, self.easy_count)
    }

    pub fn easy_cp(&self) -> Option<f64> {
        percent(self.easy_cp_correct, self.easy_count)
    }

    pub fn diff_b(&self) -> Option<f64> {
        percent(self.diff_b_correct, self.diff_count)
    }

    pub fn diff_cp(&self) -> Option<f64> {
        percent(self.diff_cp_correct, self.diff_count)
    }

    pub fn basic(&self) -> f64 {
        percent(self.easy_b_correct + self.diff_b_correct, self.test_count()).unwrap_or(0.0)
    }

    pub fn cp(&self) -> f64 {
        percent(
            self.easy_cp_correct + self.diff_cp_correct,
            self.test_count(),
        )
        .unwrap_or(0.0)
    }

    /// `[easy_b, easy_cp, diff_b, diff_cp, basic, cp]`.
    pub fn metrics(&self) -> [Option<f64>; 6] {
        [
            self.easy_b(),
            self.easy_cp(),
            self.diff_b(),
            self.diff_cp(),
            Some(self.basic()),
            Some(self.cp()),
        ]
    }
}

pub const METRIC_NAMES: [&str; 6] = ["Easy_B", "Easy_CP", "Diff_B", "Diff_CP", "Basic", "CP"];

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EvalReport {
    pub folds: Vec<FoldMetrics>,
}

fn mean(values: impl Iterator<Item = Option<f64>>) -> Option<f64> {
    let present: Vec<f64> = values.flatten().collect();
    (!present.is_empty()).then(|| present.iter().sum::<f64>() / present.len() as f64)
}

impl EvalReport {
    /// Fold means of the six metrics; an easy or difficult figure averages
    /// only the folds where that side received test samples.
    pub fn means(&self) -> [Option<f64>; 6] {
        let mut out = [None; 6];
        for (m, slot) in out.iter_mut().enumerate() {
            *slot = mean(self.folds.iter().map(|f| f.metrics()[m]));
        }
        out
    }

    pub fn mean_basic(&self) -> f64 {
        self.means()[4].unwrap_or(0.0)
    }

    pub fn mean_cp(&self) -> f64 {
        self.means()[5].unwrap_or(0.0)
    }

    pub fn write_csv<W: Write>(&self, mut out: W, comments: &[String]) -> Result<()> {
        for c in comments {
            writeln!(out, "# {c}")?;
        }
        let mut w = csv::Writer::from_writer(out);
        let mut header = vec!["fold", "theta", "test_count", "easy_count", "diff_count"];
        header.extend(["easy_b", "easy_cp", "diff_b", "diff_cp", "basic", "cp"]);
        w.write_record(&header).map_err(csv_err)?;
        let cell = |v: Option<f64>| v.map_or_else(String::new, |x| format!("{x}"));
        for f in &self.folds {
            let mut rec = vec![
                f.fold.to_string(),
                format!("{}", f.theta),
                f.test_count().to_string(),
                f.easy_count.to_string(),
                f.diff_count.to_string(),
            ];
            rec.extend(f.metrics().into_iter().map(cell));
            w.write_record(&rec).map_err(csv_err)?;
        }
        let n = self.folds.len().max(1) as f64;
        let avg = |g: fn(&FoldMetrics) -> usize| {
            format!("{}", self.folds.iter().map(g).sum::<usize>() as f64 / n)
        };
        let mut rec = vec![
            "mean".to_string(),
            cell(mean(self.folds.iter().map(|f| Some(f.theta)))),
            avg(FoldMetrics::test_count),
            avg(|f| f.easy_count),
            avg(|f| f.diff_count),
        ];
        rec.extend(self.means().into_iter().map(cell));
        w.write_record(&rec).map_err(csv_err)?;
        w.flush()?;
        Ok(())
    }

    /// Aligned table with two-decimal percentages and `-` for absent sides.
    pub fn to_table(&self) -> String {
        let fmt = |v: Option<f64>| v.map_or_else(|| "-".to_string(), |x| format!("{x:.2}"));
        let mut s = String::new();
        let _ = write!(s, "{:<6}{:>7}{:>7}{:>7}", "fold", "theta", "easy", "diff");
        for name in METRIC_NAMES {
            let _ = write!(s, "{name:>9}");
        }
        s.push('\n');
        for f in &self.folds {
            let _ = write!(
                s,
                "{:<6}{:>7.2}{:>7}{:>7}",
                f.fold, f.theta, f.easy_count, f.diff_count
            );
            for m in f.metrics() {
                let _ = write!(s, "{:>9}", fmt(m));
            }
            s.push('\n');
        }
        let _ = write!(s, "{:<6}{:>7}{:>7}{:>7}", "mean", "", "", "");
        for m in self.means() {
            let _ = write!(s, "{:>9}", fmt(m));
        }
        s.push('\n');
        s
    }
}

pub(crate) fn csv_err(e: csv::Error) -> crate::Error {
    crate::Error::Format(e.to_string())
}

/// One θ of a sweep: fold-mean accuracies and routed test counts summed
/// over folds.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepRow {
    pub theta: f64,
    pub basic: f64,
    pub cp: f64,
    pub easy_count: usize,
    pub diff_count: usize,
    /// Training-partition easy sizes per fold (not routed counts).
    pub train_easy_counts: Vec<usize>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepResult {
    pub rows: Vec<SweepRow>,
}

impl SweepResult {
    pub fn grid(&self) -> Vec<f64> {
        self.rows.iter().map(|r| r.theta).collect()
    }

    pub fn write_csv<W: Write>(&self, mut out: W, comments: &[String]) -> Result<()> {
        for c in comments {
            writeln!(out, "# {c}")?;
        }
        let mut w = csv::Writer::from_writer(out);
        w.write_record(["theta", "basic", "cp", "easy_count", "diff_count"])
            .map_err(csv_err)?;
        for r in &self.rows {
            w.write_record([
                format!("{}", r.theta),
                format!("{}", r.basic),
                format!("{}", r.cp),
                r.easy_count.to_string(),
                r.diff_count.to_string(),
            ])
            .map_err(csv_err)?;
        }
        w.flush()?;
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn fold(easy: usize, diff: usize, eb: usize, ecp: usize, db: usize, dcp: usize) -> FoldMetrics {
        FoldMetrics {
            fold: 0,
            theta: 0.5,
            easy_count: easy,
            diff_count: diff,
            easy_b_correct: eb,
            easy_cp_correct: ecp,
            diff_b_correct: db,
            diff_cp_correct: dcp,
        }
    }

    #[test]
    fn mixture_identity() {
        let f = fold(30, 10, 27, 28, 3, 5);
        let mix = (30.0 * f.easy_b().unwrap() + 10.0 * f.diff_b().unwrap()) / 40.0;
        assert!((mix - f.basic()).abs() < 1e-12);
        assert_eq!(f.basic(), 75.0);
        assert_eq!(f.cp(), 82.5);
    }

    #[test]
    fn absent_side_is_not_zero() {
        let f = fold(5, 0, 4, 4, 0, 0);
        assert_eq!(f.diff_b(), None);
        let r = EvalReport {
            folds: vec![f, fold(5, 5, 5, 5, 1, 2)],
        };
        assert_eq!(r.means()[2], Some(20.0));
        let mut buf = Vec::new();
        r.write_csv(&mut buf, &["seed: 1".into()]).unwrap();
        let text = String::from_utf8(buf).unwrap();
        assert!(text.starts_with("# seed: 1\nfold,theta"));
        assert!(text.lines().nth(2).unwrap().ends_with(",80,80,,,80,80"));
        assert!(r.to_table().contains("Diff_CP"));
    }
}
