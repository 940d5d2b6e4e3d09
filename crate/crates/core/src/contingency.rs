//! Contingency tables: construction, normalization, margins and transforms.
//!
//! Orientation is fixed: rows are predicted labels, columns are real classes.
//! Index 0 is the "positive" label for dichotomous work.

use std::borrow::Cow;
use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::error::{Axis, Error, Result};

/// K×K table of counts.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ContingencyTable {
    k: usize,
    counts: Vec<u64>,
    labels: Vec<String>,
}

impl ContingencyTable {
    /// Builds a table from rows of counts. Labels default to `0..K`.
    pub fn new(rows: Vec<Vec<u64>>, labels: Option<Vec<String>>) -> Result<Self> {
        let k = rows.len();
        if k < 2 {
            return Err(Error::Data(format!(
                "a contingency table needs at least 2 classes, got {k}"
            )));
        }
        let mut counts = Vec::with_capacity(k * k);
        for (i, row) in rows.into_iter().enumerate() {
            if row.len() != k {
                return Err(Error::Data(format!(
                    "row {i} has {} cells, expected {k} (table must be square)",
                    row.len()
                )));
            }
            counts.extend(row);
        }
        Self::from_flat(k, counts, labels)
    }

    pub fn from_flat(k: usize, counts: Vec<u64>, labels: Option<Vec<String>>) -> Result<Self> {
        if k < 2 {
            return Err(Error::Data(format!(
                "a contingency table needs at least 2 classes, got {k}"
            )));
        }
        if counts.len() != k * k {
            return Err(Error::Data(format!(
                "expected {} cells for a {k}x{k} table, got {}",
                k * k,
                counts.len()
            )));
        }
        let labels = match labels {
            Some(l) => l,
            None => (0..k).map(|i| i.to_string()).collect(),
        };
        check_labels(&labels, k)?;
        Ok(Self { k, counts, labels })
    }

    /// Tallies (predicted, actual) pairs. Labels are the sorted union of both columns.
    pub fn from_pairs<I, P, A>(pairs: I) -> Result<Self>
    where
        I: IntoIterator<Item = (P, A)>,
        P: AsRef<str>,
        A: AsRef<str>,
    {
        let pairs: Vec<(String, String)> = pairs
            .into_iter()
            .map(|(p, a)| (p.as_ref().to_string(), a.as_ref().to_string()))
            .collect();
        if pairs.is_empty() {
            return Err(Error::Data("no (predicted, actual) pairs supplied".into()));
        }
        let mut set = BTreeMap::new();
        for (p, a) in &pairs {
            set.insert(p.clone(), ());
            set.insert(a.clone(), ());
        }
        let labels: Vec<String> = set.into_keys().collect();
        Self::tally(&pairs, labels)
    }

    /// Tallies pairs against a fixed label order.
    pub fn from_pairs_with_labels<I, P, A>(pairs: I, labels: Vec<String>) -> Result<Self>
    where
        I: IntoIterator<Item = (P, A)>,
        P: AsRef<str>,
        A: AsRef<str>,
    {
        let pairs: Vec<(String, String)> = pairs
            .into_iter()
            .map(|(p, a)| (p.as_ref().to_string(), a.as_ref().to_string()))
            .collect();
        if pairs.is_empty() {
            return Err(Error::Data("no (predicted, actual) pairs supplied".into()));
        }
        Self::tally(&pairs, labels)
    }

    fn tally(pairs: &[(String, String)], labels: Vec<String>) -> Result<Self> {
        let k = labels.len();
        check_labels(&labels, k)?;
        let index: BTreeMap<&str, usize> = labels
            .iter()
            .enumerate()
            .map(|(i, l)| (l.as_str(), i))
            .collect();
        let lookup = |s: &str| {
            index
                .get(s)
                .copied()
                .ok_or_else(|| Error::Data(format!("label `{s}` is not in the label list")))
        };
        let mut counts = vec![0u64; k * k];
        for (p, a) in pairs {
            let i = lookup(p)?;
            let j = lookup(a)?;
            counts[i * k + j] += 1;
        }
        Ok(Self { k, counts, labels })
    }

    pub fn k(&self) -> usize {
        self.k
    }

    pub fn labels(&self) -> &[String] {
        &self.labels
    }

    /// Count at (predicted row `i`, real column `j`).
    pub fn get(&self, i: usize, j: usize) -> u64 {
        self.counts[i * self.k + j]
    }

    pub fn counts(&self) -> &[u64] {
        &self.counts
    }

    pub fn rows(&self) -> Vec<Vec<u64>> {
        self.counts.chunks(self.k).map(|r| r.to_vec()).collect()
    }

    pub fn n(&self) -> u64 {
        self.counts.iter().sum()
    }

    pub fn row_sums(&self) -> Vec<u64> {
        self.counts.chunks(self.k).map(|r| r.iter().sum()).collect()
    }

    pub fn col_sums(&self) -> Vec<u64> {
        let mut s = vec![0u64; self.k];
        for row in self.counts.chunks(self.k) {
            for (j, c) in row.iter().enumerate() {
                s[j] += c;
            }
        }
        s
    }

    /// Returns a copy with new labels.
    pub fn with_labels(&self, labels: Vec<String>) -> Result<Self> {
        check_labels(&labels, self.k)?;
        Ok(Self {
            labels,
            ..self.clone()
        })
    }

    /// Multiplies every cell by `m`.
    pub fn scaled(&self, m: u64) -> Self {
        Self {
            counts: self.counts.iter().map(|c| c * m).collect(),
            ..self.clone()
        }
    }

    /// Fails on the first zero margin, reporting its axis and label.
    pub fn require_nonzero_margins(&self) -> Result<()> {
        let zero = |axis, sums: Vec<u64>| {
            sums.iter()
                .position(|&s| s == 0)
                .map(|index| Error::ZeroMargin {
                    axis,
                    index,
                    label: self.labels[index].clone(),
                })
        };
        if let Some(e) = zero(Axis::Row, self.row_sums()) {
            return Err(e);
        }
        if let Some(e) = zero(Axis::Column, self.col_sums()) {
            return Err(e);
        }
        Ok(())
    }

    pub fn has_zero_margin(&self) -> bool {
        self.row_sums().contains(&0) || self.col_sums().contains(&0)
    }
}

fn check_labels(labels: &[String], k: usize) -> Result<()> {
    if labels.len() != k {
        return Err(Error::Data(format!(
            "expected {k} labels, got {}",
            labels.len()
        )));
    }
    if k < 2 {
        return Err(Error::Data(format!(
            "a contingency table needs at least 2 classes, got {k}"
        )));
    }
    let mut seen = BTreeMap::new();
    for l in labels {
        if seen.insert(l.as_str(), ()).is_some() {
            return Err(Error::Data(format!("duplicate label `{l}`")));
        }
    }
    Ok(())
}

/// What to do with tables that have an empty row or column.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum MarginPolicy {
    #[default]
    Reject,
    Repair,
}

/// Applies the margin policy: rejects zero margins or repairs them.
pub fn prepare(t: &ContingencyTable, policy: MarginPolicy) -> Result<Cow<'_, ContingencyTable>> {
    match policy {
        MarginPolicy::Reject => {
            t.require_nonzero_margins()?;
            Ok(Cow::Borrowed(t))
        }
        MarginPolicy::Repair => {
            if t.has_zero_margin() {
                Ok(Cow::Owned(repair_zero_margins(t)))
            } else {
                Ok(Cow::Borrowed(t))
            }
        }
    }
}

/// Cell probabilities, row-major.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NormalizedTable {
    pub k: usize,
    pub probs: Vec<f64>,
}

impl NormalizedTable {
    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.probs[i * self.k + j]
    }

    pub fn margins(&self) -> Margins {
        let k = self.k;
        let mut bias = vec![0.0; k];
        let mut prevalence = vec![0.0; k];
        for (i, row) in self.probs.chunks(k).enumerate() {
            for (j, &p) in row.iter().enumerate() {
                bias[i] += p;
                prevalence[j] += p;
            }
        }
        Margins { prevalence, bias }
    }
}

pub fn normalize(t: &ContingencyTable) -> Result<NormalizedTable> {
    let n = t.n();
    if n == 0 {
        return Err(Error::Data("table is empty (n = 0)".into()));
    }
    let nf = n as f64;
    Ok(NormalizedTable {
        k: t.k,
        probs: t.counts.iter().map(|&c| c as f64 / nf).collect(),
    })
}

/// Prevalence (real-class, column) and bias (predicted-label, row) probabilities.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Margins {
    pub prevalence: Vec<f64>,
    pub bias: Vec<f64>,
}

impl Margins {
    pub fn prevalence_geometric(&self) -> f64 {
        geometric_mean(&self.prevalence)
    }

    pub fn bias_geometric(&self) -> f64 {
        geometric_mean(&self.bias)
    }

    pub fn prevalence_harmonic(&self) -> f64 {
        harmonic_mean(&self.prevalence)
    }

    pub fn bias_harmonic(&self) -> f64 {
        harmonic_mean(&self.bias)
    }
}

pub(crate) fn geometric_mean(v: &[f64]) -> f64 {
    (v.iter().map(|x| x.ln()).sum::<f64>() / v.len() as f64).exp()
}

pub(crate) fn harmonic_mean(v: &[f64]) -> f64 {
    v.len() as f64 / v.iter().map(|x| 1.0 / x).sum::<f64>()
}

pub fn margins(t: &ContingencyTable) -> Result<Margins> {
    let n = t.n();
    if n == 0 {
        return Err(Error::Data("table is empty (n = 0)".into()));
    }
    let nf = n as f64;
    Ok(Margins {
        prevalence: t.col_sums().iter().map(|&c| c as f64 / nf).collect(),
        bias: t.row_sums().iter().map(|&r| r as f64 / nf).collect(),
    })
}

/// Skew and cost ratio.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CostModel {
    /// cs = rn / rp
    pub skew: f64,
    /// cv = cn / cp
    pub cost_ratio: f64,
}

impl CostModel {
    pub fn new(skew: f64, cost_ratio: f64) -> Result<Self> {
        if !(skew > 0.0 && skew.is_finite()) || !(cost_ratio > 0.0 && cost_ratio.is_finite()) {
            return Err(Error::Usage(format!(
                "skew and cost ratio must be positive, got {skew} and {cost_ratio}"
            )));
        }
        Ok(Self { skew, cost_ratio })
    }

    /// Skew taken from a 2×2 table's margins (positive = index 0).
    pub fn from_table(t: &ContingencyTable, cost_ratio: f64) -> Result<Self> {
        let c = t.col_sums();
        if c.len() != 2 {
            return Err(Error::Usage("skew is defined for 2x2 tables only".into()));
        }
        t.require_nonzero_margins()?;
        Self::new(c[1] as f64 / c[0] as f64, cost_ratio)
    }

    pub fn combined(&self) -> f64 {
        self.cost_ratio * self.skew
    }
}

/// One-vs-rest collapse around `label`.
pub fn dichotomize(t: &ContingencyTable, label: usize) -> Result<ContingencyTable> {
    let k = t.k;
    if label >= k {
        return Err(Error::Usage(format!(
            "label index {label} out of range for K = {k}"
        )));
    }
    let mut c = [0u64; 4];
    for i in 0..k {
        for j in 0..k {
            let r = usize::from(i != label);
            let s = usize::from(j != label);
            c[r * 2 + s] += t.get(i, j);
        }
    }
    let labels = if k == 2 && label == 0 {
        t.labels.clone()
    } else {
        vec![t.labels[label].clone(), format!("not {}", t.labels[label])]
    };
    ContingencyTable::from_flat(2, c.to_vec(), Some(labels))
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Transform {
    /// Reverse both label orders.
    Inverse,
    /// Transpose: predictions and real classes swap roles.
    Dual,
    /// Reverse the order of prediction rows.
    PerverseRows,
    /// Reverse the order of real-class columns.
    PerverseCols,
    /// Row `i` of the result is row `perm[i]` of the input.
    PermuteRows(Vec<usize>),
    /// Column `j` of the result is column `perm[j]` of the input.
    PermuteCols(Vec<usize>),
}

pub fn transform(t: &ContingencyTable, kind: &Transform) -> Result<ContingencyTable> {
    let k = t.k;
    let rev: Vec<usize> = (0..k).rev().collect();
    let id: Vec<usize> = (0..k).collect();
    let (rows, cols, transpose) = match kind {
        Transform::Inverse => (rev.clone(), rev.clone(), false),
        Transform::Dual => (id.clone(), id.clone(), true),
        Transform::PerverseRows => (rev.clone(), id.clone(), false),
        Transform::PerverseCols => (id.clone(), rev.clone(), false),
        Transform::PermuteRows(p) => (check_perm(p, k)?, id.clone(), false),
        Transform::PermuteCols(p) => (id.clone(), check_perm(p, k)?, false),
    };
    let mut counts = vec![0u64; k * k];
    for i in 0..k {
        for j in 0..k {
            let v = t.get(rows[i], cols[j]);
            if transpose {
                counts[j * k + i] = v;
            } else {
                counts[i * k + j] = v;
            }
        }
    }
    let labels = match kind {
        Transform::Inverse => t.labels.iter().rev().cloned().collect(),
        _ => t.labels.clone(),
    };
    ContingencyTable::from_flat(k, counts, Some(labels))
}

fn check_perm(p: &[usize], k: usize) -> Result<Vec<usize>> {
    let mut seen = vec![false; k];
    if p.len() != k {
        return Err(Error::Usage(format!(
            "permutation has {} entries, expected {k}",
            p.len()
        )));
    }
    for &x in p {
        if x >= k || seen[x] {
            return Err(Error::Usage(format!(
                "{p:?} is not a permutation of 0..{k}"
            )));
        }
        seen[x] = true;
    }
    Ok(p.to_vec())
}

/// Expected probabilities under independence, deviations from them, and the determinant.
#[derive(Debug, Clone, PartialEq)]
pub struct ExpectationDelta {
    pub expected: Vec<f64>,
    pub delta: Vec<f64>,
    pub det: f64,
}

pub fn expectation_delta(nt: &NormalizedTable) -> ExpectationDelta {
    let k = nt.k;
    let m = nt.margins();
    let mut expected = vec![0.0; k * k];
    let mut delta = vec![0.0; k * k];
    for i in 0..k {
        for j in 0..k {
            let e = m.bias[i] * m.prevalence[j];
            expected[i * k + j] = e;
            delta[i * k + j] = nt.get(i, j) - e;
        }
    }
    ExpectationDelta {
        expected,
        delta,
        det: determinant(k, &nt.probs),
    }
}

/// Determinant by LU with partial pivoting; 2×2 uses the closed form.
pub fn determinant(k: usize, m: &[f64]) -> f64 {
    if k == 2 {
        return m[0] * m[3] - m[1] * m[2];
    }
    let mut a = m.to_vec();
    let mut det = 1.0;
    for c in 0..k {
        let mut piv = c;
        for r in c + 1..k {
            if a[r * k + c].abs() > a[piv * k + c].abs() {
                piv = r;
            }
        }
        if a[piv * k + c] == 0.0 {
            return 0.0;
        }
        if piv != c {
            for j in 0..k {
                a.swap(c * k + j, piv * k + j);
            }
            det = -det;
        }
        let d = a[c * k + c];
        det *= d;
        for r in c + 1..k {
            let f = a[r * k + c] / d;
            if f != 0.0 {
                for j in c..k {
                    a[r * k + j] -= f * a[c * k + j];
                }
            }
        }
    }
    det
}

/// Puts 1s where rows or columns are empty so every margin is positive.
pub fn repair_zero_margins(t: &ContingencyTable) -> ContingencyTable {
    let k = t.k;
    let rs = t.row_sums();
    let cs = t.col_sums();
    let mut out = t.clone();
    let first_nonzero = |s: &[u64]| s.iter().position(|&x| x > 0).unwrap_or(0);
    for i in 0..k {
        if rs[i] == 0 && cs[i] == 0 {
            out.counts[i * k + i] = 1;
        }
    }
    for i in 0..k {
        if rs[i] == 0 && cs[i] != 0 {
            let j = first_nonzero(&cs);
            out.counts[i * k + j] += 1;
        }
        if cs[i] == 0 && rs[i] != 0 {
            let r = first_nonzero(&rs);
            out.counts[r * k + i] += 1;
        }
    }
    out
}
