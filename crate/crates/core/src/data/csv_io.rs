use std::collections::HashMap;
use std::fs::File;
use std::io::{BufRead, BufReader, Read, Write};
use std::path::Path;

use super::{Dataset, Sample};
use crate::error::{Error, Result};

/// Loads a feature CSV: header `id,label,f0,...,f{d-1}` where the `id`
/// column is optional and every column other than `id`/`label` is a feature.
/// Lines starting with `#` are provenance comments and are skipped.
///
/// Class indices follow `class_order` when given, otherwise the order in
/// which label names first appear.
pub fn load_feature_csv(path: &Path, class_order: Option<&[String]>) -> Result<Dataset> {
    let file = File::open(path)?;
    read_feature_csv(file, &path.display().to_string(), class_order)
}

/// Class-order sidecar: one class name per non-empty line.
pub fn read_class_order(path: &Path) -> Result<Vec<String>> {
    let reader = BufReader::new(File::open(path)?);
    let mut names = Vec::new();
    for line in reader.lines() {
        let line = line?;
        let name = line.trim();
        if !name.is_empty() && !name.starts_with('#') {
            names.push(name.to_string());
        }
    }
    if names.is_empty() {
        return Err(Error::Schema(format!(
            "{}: class order file is empty",
            path.display()
        )));
    }
    Ok(names)
}

pub fn read_feature_csv<R: Read>(
    reader: R,
    source: &str,
    class_order: Option<&[String]>,
) -> Result<Dataset> {
    let mut rdr = csv::ReaderBuilder::new()
        .has_headers(true)
        .flexible(true)
        .comment(Some(b'#'))
        .from_reader(reader);

    let parse_err = |line: u64, message: String| Error::Parse {
        path: source.to_string(),
        line,
        message,
    };

    let headers = rdr
        .headers()
        .map_err(|e| Error::Schema(format!("{source}: unreadable header: {e}")))?
        .clone();
    let mut label_col = None;
    let mut id_col = None;
    let mut feature_cols = Vec::new();
    for (i, name) in headers.iter().enumerate() {
        match name.trim() {
            "label" if label_col.is_none() => label_col = Some(i),
            "id" if id_col.is_none() => id_col = Some(i),
            "label" | "id" => {
                return Err(Error::Schema(format!(
                    "{source}: duplicate column {name:?}"
                )))
            }
            _ => feature_cols.push(i),
        }
    }
    let label_col =
        label_col.ok_or_else(|| Error::Schema(format!("{source}: header has no label column")))?;
    if feature_cols.is_empty() {
        return Err(Error::Schema(format!(
            "{source}: header declares no feature columns"
        )));
    }
    let arity = headers.len();

    let mut class_names: Vec<String> = class_order.map(<[String]>::to_vec).unwrap_or_default();
    let mut class_index: HashMap<String, usize> = class_names
        .iter()
        .enumerate()
        .map(|(i, n)| (n.clone(), i))
        .collect();
    if class_index.len() != class_names.len() {
        return Err(Error::Schema(format!(
            "{source}: class order lists a name twice"
        )));
    }

    let mut samples = Vec::new();
    let mut seen_ids = HashMap::new();
    for (row, record) in rdr.records().enumerate() {
        let record = record.map_err(|e| {
            let line = e.position().map(|p| p.line()).unwrap_or(0);
            parse_err(line, e.to_string())
        })?;
        let line = record.position().map(|p| p.line()).unwrap_or(0);
        if record.len() != arity {
            return Err(parse_err(
                line,
                format!("expected {arity} fields, found {}", record.len()),
            ));
        }
        let label_name = record[label_col].trim();
        let label = match class_index.get(label_name) {
            Some(&i) => i,
            None if class_order.is_some() => {
                return Err(parse_err(line, format!("unknown label {label_name:?}")))
            }
            None => {
                let i = class_names.len();
                class_names.push(label_name.to_string());
                class_index.insert(label_name.to_string(), i);
                i
            }
        };
        let id = match id_col {
            Some(c) => record[c]
                .trim()
                .parse::<u64>()
                .map_err(|_| parse_err(line, format!("invalid id {:?}", &record[c])))?,
            None => row as u64,
        };
        if let Some(prev) = seen_ids.insert(id, line) {
            return Err(parse_err(
                line,
                format!("id {id} already used on line {prev}"),
            ));
        }
        let mut features = Vec::with_capacity(feature_cols.len());
        for &c in &feature_cols {
            let v: f64 = record[c].trim().parse().map_err(|_| {
                parse_err(
                    line,
                    format!("column {:?}: {:?} is not a number", &headers[c], &record[c]),
                )
            })?;
            if !v.is_finite() {
                return Err(parse_err(
                    line,
                    format!("column {:?} is not finite", &headers[c]),
                ));
            }
            features.push(v);
        }
        samples.push(Sample {
            id,
            label,
            features,
        });
    }
    if samples.is_empty() {
        return Err(Error::Schema(format!("{source}: no data rows")));
    }
    Dataset::new(samples, class_names)
}

/// Writes `dataset` in the feature CSV format. `comments` become leading
/// `# ` lines (provenance: tool version, resolved config, seed).
pub fn write_feature_csv<W: Write>(
    mut out: W,
    dataset: &Dataset,
    comments: &[String],
) -> Result<()> {
    for c in comments {
        for line in c.lines() {
            writeln!(out, "# {line}")?;
        }
    }
    let mut header = String::from("id,label");
    for j in 0..dataset.dim() {
        header.push_str(&format!(",f{j}"));
    }
    writeln!(out, "{header}")?;
    let mut wtr = csv::WriterBuilder::new()
        .has_headers(false)
        .from_writer(out);
    let mut record = Vec::with_capacity(dataset.dim() + 2);
    for s in dataset.samples() {
        record.clear();
        record.push(s.id.to_string());
        record.push(dataset.class_names()[s.label].clone());
        record.extend(s.features.iter().map(|v| v.to_string()));
        wtr.write_record(&record)
            .map_err(|e| Error::Io(std::io::Error::other(e)))?;
    }
    wtr.flush()?;
    Ok(())
}
