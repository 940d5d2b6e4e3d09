//! Text and CSV views of a report, read back from its JSON value.

use serde_json::Value;

use crate::report::ReportDocument;

/// Fields that are not proportions and never take a percent sign.
const NOT_RATES: [&str; 5] = [
    "lr",
    "nlr",
    "skew",
    "mutual_information",
    "conditional_entropy",
];

pub fn fmt_f64(x: f64, rate: bool, percent: bool) -> String {
    if rate && percent {
        return format!("{:.2}%", x * 100.0);
    }
    let a = x.abs();
    if x == 0.0 {
        "0".to_string()
    } else if (1e-4..1e7).contains(&a) {
        format!("{x:.4}")
    } else {
        format!("{x:.4e}")
    }
}

fn fmt_value(v: &Value, rate: bool, percent: bool) -> String {
    match v {
        Value::Null => "undefined".to_string(),
        Value::Bool(b) => if *b { "yes" } else { "no" }.to_string(),
        Value::Number(n) if n.is_u64() || n.is_i64() => n.to_string(),
        Value::Number(n) => fmt_f64(n.as_f64().unwrap_or(f64::NAN), rate, percent),
        Value::String(s) => s.clone(),
        other => other.to_string(),
    }
}

/// Flattens nested objects and arrays into `(path, leaf)` pairs.
/// Arrays of length `labels.len()` are indexed by label.
fn leaves(prefix: &str, v: &Value, labels: &[String], out: &mut Vec<(String, Value)>) {
    let join = |k: &str| {
        if prefix.is_empty() {
            k.to_string()
        } else {
            format!("{prefix}.{k}")
        }
    };
    match v {
        Value::Object(m) => {
            for (k, x) in m {
                leaves(&join(k), x, labels, out);
            }
        }
        Value::Array(a) => {
            for (i, x) in a.iter().enumerate() {
                let idx = if a.len() == labels.len() {
                    labels[i].clone()
                } else {
                    i.to_string()
                };
                leaves(&format!("{prefix}[{idx}]"), x, labels, out);
            }
        }
        leaf => out.push((prefix.to_string(), leaf.clone())),
    }
}

fn is_rate(path: &str) -> bool {
    let last = path.rsplit('.').next().unwrap_or(path);
    let last = last.split('[').next().unwrap_or(last);
    !NOT_RATES.contains(&last)
}

fn labels_of(doc: &Value) -> Vec<String> {
    doc["inputs"][0]["labels"]
        .as_array()
        .map(|a| {
            a.iter()
                .filter_map(|s| s.as_str().map(str::to_string))
                .collect()
        })
        .unwrap_or_default()
}

fn metric_sections(doc: &Value) -> Vec<(&'static str, &Value)> {
    let m = &doc["metrics"];
    let mut out = Vec::new();
    if !m["binary"].is_null() {
        out.push(("binary", &m["binary"]));
    }
    if !m["multiclass"].is_null() {
        out.push(("multiclass", &m["multiclass"]));
    }
    out
}

fn table_text(input: &Value) -> String {
    let labels: Vec<String> = input["labels"]
        .as_array()
        .map(|a| {
            a.iter()
                .map(|s| s.as_str().unwrap_or("").to_string())
                .collect()
        })
        .unwrap_or_default();
    let Some(rows) = input["counts"].as_array() else {
        return String::new();
    };
    let cells: Vec<Vec<String>> = rows
        .iter()
        .map(|r| {
            r.as_array()
                .map(|c| c.iter().map(|x| x.to_string()).collect())
                .unwrap_or_default()
        })
        .collect();
    let w = cells
        .iter()
        .flatten()
        .chain(labels.iter())
        .map(|s| s.chars().count())
        .max()
        .unwrap_or(1)
        .max(4);
    let head_w = w.max("pred\\real".len());
    let mut s = format!("  {:>head_w$}", "pred\\real");
    for l in &labels {
        s.push_str(&format!(" {l:>w$}"));
    }
    s.push('\n');
    for (i, r) in cells.iter().enumerate() {
        s.push_str(&format!(
            "  {:>head_w$}",
            labels.get(i).map_or("", String::as_str)
        ));
        for c in r {
            s.push_str(&format!(" {c:>w$}"));
        }
        s.push('\n');
    }
    s
}

pub fn text(doc: &ReportDocument, percent: bool) -> String {
    let v = serde_json::to_value(doc).expect("report serializes");
    let labels = labels_of(&v);
    let mut s = format!("bookmaker {} {}\n", doc.tool_version, doc.command);
    if let Some(seed) = v.get("seed") {
        s.push_str(&format!("seed: {seed}\n"));
    }
    for input in v["inputs"].as_array().into_iter().flatten() {
        let file = input["file"].as_str().unwrap_or("command line");
        s.push_str(&format!(
            "input {}: {} ({}), n = {}",
            input["name"].as_str().unwrap_or(""),
            file,
            input["format"].as_str().unwrap_or(""),
            input["n"]
        ));
        if input["margins_repaired"].as_bool() == Some(true) {
            s.push_str(", empty margins repaired");
        }
        s.push('\n');
        s.push_str(&table_text(input));
    }

    let sections = metric_sections(&v);
    if let Some((_, head)) = sections.first() {
        s.push('\n');
        for (short, key) in [
            ("B", "informedness"),
            ("M", "markedness"),
            ("C", "correlation"),
        ] {
            s.push_str(&format!(
                "{short}  {}\n",
                fmt_value(&head[key], true, percent)
            ));
        }
        s.push_str(&format!(
            "information unit: {}\n",
            v["metrics"]["information_unit"].as_str().unwrap_or("")
        ));
    }
    for (name, sec) in sections {
        s.push_str(&format!("\n{name}\n"));
        let mut out = Vec::new();
        leaves("", sec, &labels, &mut out);
        let w = out.iter().map(|(p, _)| p.len()).max().unwrap_or(0);
        for (path, leaf) in out {
            let shown = if leaf.is_null() && matches!(path.as_str(), "lr" | "nlr") {
                "inf".to_string()
            } else {
                fmt_value(&leaf, is_rate(&path), percent)
            };
            s.push_str(&format!("  {path:<w$}  {shown}\n"));
        }
    }

    if let Some(sig) = v["significance"].as_array().filter(|a| !a.is_empty()) {
        s.push_str(&format!(
            "\n{:<18} {:>12} {:>4} {:>12} {:>6}  result\n",
            "statistic", "value", "df", "p", "alpha"
        ));
        for e in sig {
            let corr: Vec<&str> = e["corrections"]
                .as_array()
                .into_iter()
                .flatten()
                .filter_map(Value::as_str)
                .collect();
            let mut name = e["kind"].as_str().unwrap_or("").to_string();
            if !corr.is_empty() {
                name = format!("{name}+{}", corr.join("+"));
            }
            s.push_str(&format!(
                "{:<18} {:>12} {:>4} {:>12} {:>6}  {}\n",
                name,
                fmt_value(&e["value"], false, false),
                fmt_value(&e["df"], false, false),
                fmt_value(&e["p_value"], false, false),
                fmt_value(&e["alpha"], false, false),
                if e["significant"].as_bool() == Some(true) {
                    "significant"
                } else {
                    "not significant"
                }
            ));
        }
    }

    if let Some(ci) = v["confidence"].as_array().filter(|a| !a.is_empty()) {
        s.push_str(&format!(
            "\n{:<7} {:<10} {:<20} {:>9} {:>9} {:>9} {:>9} {:>9}  observed inside\n",
            "system", "variant", "rule", "observed", "center", "half", "lo", "hi"
        ));
        for e in ci {
            let iv = &e["interval"];
            let f = |x: &Value| fmt_value(x, true, percent);
            s.push_str(&format!(
                "{:<7} {:<10} {:<20} {:>9} {:>9} {:>9} {:>9} {:>9}  {}\n",
                e["system"].as_str().unwrap_or(""),
                iv["variant"].as_str().unwrap_or(""),
                iv["sse_rule"].as_str().unwrap_or(""),
                f(&e["observed"]),
                f(&iv["center"]),
                f(&iv["half_width"]),
                f(&e["lo"]),
                f(&e["hi"]),
                fmt_value(&e["contains_observed"], false, false)
            ));
        }
        if let Some(first) = ci.first() {
            s.push_str(&format!(
                "X = {}\n",
                fmt_value(&first["interval"]["x"], false, false)
            ));
        }
    }

    let cmp = &v["comparison"];
    if !cmp.is_null() {
        s.push('\n');
        s.push_str(&format!(
            "A observed inside interval of B: {}\n",
            fmt_value(&cmp["a_in_b"], false, false)
        ));
        s.push_str(&format!(
            "B observed inside interval of A: {}\n",
            fmt_value(&cmp["b_in_a"], false, false)
        ));
        s.push_str(&format!(
            "mutually exclusive: {}\n",
            fmt_value(&cmp["mutually_exclusive"], false, false)
        ));
    }

    for n in v["notes"].as_array().into_iter().flatten() {
        s.push_str(&format!("note: {}\n", n.as_str().unwrap_or("")));
    }
    s
}

fn json_cell(v: &Value) -> String {
    match v {
        Value::Null => String::new(),
        Value::String(s) => s.clone(),
        other => other.to_string(),
    }
}

/// Long-format CSV: one `section,name,value` row per leaf.
pub fn csv(doc: &ReportDocument) -> String {
    let v = serde_json::to_value(doc).expect("report serializes");
    let labels = labels_of(&v);
    let mut w = ::csv::Writer::from_writer(Vec::new());
    {
        let mut row = |a: &str, b: &str, c: String| {
            w.write_record([a, b, c.as_str()]).expect("in-memory write");
        };
        row("section", "name", "value".to_string());
        for (name, sec) in metric_sections(&v) {
            let mut out = Vec::new();
            leaves("", sec, &labels, &mut out);
            for (path, leaf) in out {
                row(name, &path, json_cell(&leaf));
            }
        }
        for e in v["significance"].as_array().into_iter().flatten() {
            let mut kind = e["kind"].as_str().unwrap_or("").to_string();
            for c in e["corrections"].as_array().into_iter().flatten() {
                kind = format!("{kind}+{}", c.as_str().unwrap_or(""));
            }
            for key in [
                "value",
                "df",
                "alt_df",
                "p_value",
                "p_value_alt",
                "alpha",
                "significant",
            ] {
                row("significance", &format!("{kind}.{key}"), json_cell(&e[key]));
            }
        }
        for e in v["confidence"].as_array().into_iter().flatten() {
            let sys = e["system"].as_str().unwrap_or("");
            let var = e["interval"]["variant"].as_str().unwrap_or("");
            let mut out = Vec::new();
            leaves("", e, &[], &mut out);
            for (path, leaf) in out {
                if path != "system" {
                    row(
                        "confidence",
                        &format!("{sys}.{var}.{path}"),
                        json_cell(&leaf),
                    );
                }
            }
        }
        if !v["comparison"].is_null() {
            for key in ["a_in_b", "b_in_a", "mutually_exclusive"] {
                row("comparison", key, json_cell(&v["comparison"][key]));
            }
        }
        if let Some(seed) = v.get("seed") {
            row("run", "seed", json_cell(seed));
        }
    }
    String::from_utf8(w.into_inner().expect("in-memory flush")).expect("utf-8 csv")
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn number_formats() {
        assert_eq!(fmt_f64(0.19852941, true, true), "19.85%");
        assert_eq!(fmt_f64(0.19852941, true, false), "0.1985");
        assert_eq!(fmt_f64(0.0, false, false), "0");
        assert_eq!(fmt_f64(1.5e-9, false, false), "1.5000e-9");
    }

    #[test]
    fn leaves_use_labels() {
        let v = serde_json::json!({"a": [1.0, 2.0], "b": {"c": 3}});
        let mut out = Vec::new();
        leaves("", &v, &["x".into(), "y".into()], &mut out);
        let names: Vec<&str> = out.iter().map(|(p, _)| p.as_str()).collect();
        assert_eq!(names, ["a[x]", "a[y]", "b.c"]);
    }

    #[test]
    fn rate_classification() {
        assert!(is_rate("recall"));
        assert!(is_rate("prevalence[a]"));
        assert!(!is_rate("mutual_information"));
        assert!(!is_rate("lr"));
    }
}
