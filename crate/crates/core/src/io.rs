//! Reading tables and (predicted, actual) pair lists.
//!
//! Table files: K rows of K integers, optionally with a header row of labels
//! and/or a leading label column. Pair files: two columns, tab or comma
//! separated, optional `predicted,actual` header.

use crate::contingency::ContingencyTable;
use crate::error::{Error, Result};

/// Anything that reads as a number is data, even if it is not a valid count.
fn is_numeric(s: &str) -> bool {
    !s.is_empty() && s.parse::<f64>().is_ok()
}

fn records(text: &str, delimiter: u8) -> Result<Vec<(u64, Vec<String>)>> {
    let mut rdr = csv::ReaderBuilder::new()
        .has_headers(false)
        .flexible(true)
        .trim(csv::Trim::All)
        .delimiter(delimiter)
        .from_reader(text.as_bytes());
    let mut out = Vec::new();
    for rec in rdr.records() {
        let rec = rec.map_err(|e| Error::Data(format!("malformed input: {e}")))?;
        let line = rec.position().map_or(0, |p| p.line());
        let fields: Vec<String> = rec.iter().map(str::to_string).collect();
        if fields.iter().all(String::is_empty) || fields[0].starts_with('#') {
            continue;
        }
        out.push((line, fields));
    }
    Ok(out)
}

/// Parses a K×K table file.
pub fn parse_table(text: &str) -> Result<ContingencyTable> {
    let mut recs = records(text, b',')?;
    if recs.is_empty() {
        return Err(Error::Data("table file is empty".into()));
    }
    let header = if recs[0].1.iter().skip(1).any(|c| !is_numeric(c))
        || (recs[0].1.len() == 1 && !is_numeric(&recs[0].1[0]))
    {
        Some(recs.remove(0))
    } else {
        None
    };
    if recs.is_empty() {
        return Err(Error::Data("table file has a header but no rows".into()));
    }
    let label_col = !is_numeric(&recs[0].1[0]);
    let k = recs.len();
    let mut rows = Vec::with_capacity(k);
    let mut row_labels = Vec::new();
    for (line, fields) in &recs {
        let cells = if label_col {
            row_labels.push(fields[0].clone());
            &fields[1..]
        } else {
            &fields[..]
        };
        if cells.len() != k {
            return Err(Error::Data(format!(
                "line {line}: expected {k} counts (table must be square), found {}",
                cells.len()
            )));
        }
        let row = cells
            .iter()
            .enumerate()
            .map(|(j, c)| {
                c.parse::<u64>().map_err(|_| {
                    Error::Data(format!(
                        "line {line}, column {}: `{c}` is not a non-negative integer count",
                        j + 1 + usize::from(label_col)
                    ))
                })
            })
            .collect::<Result<Vec<u64>>>()?;
        rows.push(row);
    }
    let col_labels = header.map(|(line, h)| {
        let skip = usize::from(label_col || h.len() == k + 1);
        (line, h[skip..].to_vec())
    });
    let labels = match (col_labels, label_col) {
        (Some((line, c)), true) => {
            if c != row_labels {
                return Err(Error::Data(format!(
                    "line {line}: header labels {c:?} do not match row labels {row_labels:?}"
                )));
            }
            Some(c)
        }
        (Some((line, c)), false) => {
            if c.len() != k {
                return Err(Error::Data(format!(
                    "line {line}: header has {} labels for a {k}x{k} table",
                    c.len()
                )));
            }
            Some(c)
        }
        (None, true) => Some(row_labels),
        (None, false) => None,
    };
    ContingencyTable::new(rows, labels)
}

const PRED_NAMES: [&str; 4] = ["predicted", "prediction", "pred", "system"];
const ACTUAL_NAMES: [&str; 6] = ["actual", "real", "gold", "truth", "class", "reference"];

/// Parses a two-column pairs file into (predicted, actual) tuples.
pub fn parse_pairs(text: &str) -> Result<Vec<(String, String)>> {
    let delimiter = if text.contains('\t') { b'\t' } else { b',' };
    let mut recs = records(text, delimiter)?;
    if let Some((_, first)) = recs.first() {
        let is_header = first.len() == 2
            && PRED_NAMES.contains(&first[0].to_lowercase().as_str())
            && ACTUAL_NAMES.contains(&first[1].to_lowercase().as_str());
        if is_header {
            recs.remove(0);
        }
    }
    if recs.is_empty() {
        return Err(Error::Data(
            "pairs file contains no (predicted, actual) pairs".into(),
        ));
    }
    recs.into_iter()
        .map(|(line, f)| {
            if f.len() != 2 || f[0].is_empty() || f[1].is_empty() {
                Err(Error::Data(format!(
                    "line {line}: expected two fields (predicted, actual), found {}",
                    f.len()
                )))
            } else {
                Ok((f[0].clone(), f[1].clone()))
            }
        })
        .collect()
}

/// Writes a table as CSV with a header row and label column.
pub fn format_table(t: &ContingencyTable) -> String {
    let mut s = String::new();
    s.push_str("predicted\\actual");
    for l in t.labels() {
        s.push(',');
        s.push_str(l);
    }
    s.push('\n');
    for (i, row) in t.rows().iter().enumerate() {
        s.push_str(&t.labels()[i]);
        for c in row {
            s.push(',');
            s.push_str(&c.to_string());
        }
        s.push('\n');
    }
    s
}
