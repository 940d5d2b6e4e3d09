//! K-class informedness, markedness, correlation and friends.

use serde::{Deserialize, Serialize};

use crate::contingency::{
    dichotomize, expectation_delta, margins, normalize, ContingencyTable, Margins,
};
use crate::dichotomous::{binary_stats, BinaryStats};
use crate::error::{Error, Result};

/// Which margin weights the per-label dichotomous values.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Weighting {
    Prevalence,
    Bias,
}

fn one_vs_rest(t: &ContingencyTable) -> Result<Vec<BinaryStats>> {
    t.require_nonzero_margins()?;
    (0..t.k())
        .map(|l| binary_stats(&dichotomize(t, l)?))
        .collect()
}

fn weights(m: &Margins, w: Weighting) -> &[f64] {
    match w {
        Weighting::Prevalence => &m.prevalence,
        Weighting::Bias => &m.bias,
    }
}

fn weighted(vals: impl Iterator<Item = f64>, w: &[f64]) -> f64 {
    vals.zip(w).map(|(v, w)| v * w).sum()
}

pub fn bookmaker_informedness(t: &ContingencyTable) -> Result<f64> {
    bookmaker_informedness_weighted(t, Weighting::Prevalence)
}

pub fn bookmaker_informedness_weighted(t: &ContingencyTable, w: Weighting) -> Result<f64> {
    let per = one_vs_rest(t)?;
    let m = margins(t)?;
    Ok(weighted(per.iter().map(|s| s.informedness), weights(&m, w)))
}

pub fn multiclass_markedness(t: &ContingencyTable) -> Result<f64> {
    multiclass_markedness_weighted(t, Weighting::Bias)
}

pub fn multiclass_markedness_weighted(t: &ContingencyTable, w: Weighting) -> Result<f64> {
    let per = one_vs_rest(t)?;
    let m = margins(t)?;
    Ok(weighted(per.iter().map(|s| s.markedness), weights(&m, w)))
}

/// Signed geometric mean of informedness and markedness.
pub fn bmg(informedness: f64, markedness: f64) -> Result<f64> {
    let p = informedness * markedness;
    if p < 0.0 {
        return Err(Error::UndefinedCorrelation {
            informedness,
            markedness,
        });
    }
    Ok(informedness.signum() * p.sqrt())
}

pub fn correlation_bmg(t: &ContingencyTable) -> Result<f64> {
    bmg(bookmaker_informedness(t)?, multiclass_markedness(t)?)
}

/// Mutual information of predictions and real classes, in nats.
pub fn mutual_information(t: &ContingencyTable) -> Result<f64> {
    t.require_nonzero_margins()?;
    let nt = normalize(t)?;
    let m = nt.margins();
    let k = t.k();
    let mut mi = 0.0;
    for i in 0..k {
        for j in 0..k {
            let p = nt.get(i, j);
            if p > 0.0 {
                mi += p * (p / (m.bias[i] * m.prevalence[j])).ln();
            }
        }
    }
    Ok(mi.max(0.0))
}

/// Entropy of the real class given the prediction, in nats.
pub fn conditional_entropy(t: &ContingencyTable) -> Result<f64> {
    t.require_nonzero_margins()?;
    let nt = normalize(t)?;
    let m = nt.margins();
    let k = t.k();
    let mut h = 0.0;
    for i in 0..k {
        for j in 0..k {
            let p = nt.get(i, j);
            if p > 0.0 {
                h -= p * (p / m.bias[i]).ln();
            }
        }
    }
    Ok(h.max(0.0))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ExponentRule {
    /// e = 2/K
    TwoOverK,
    /// e = 4/(3K-2); also 1 at K=2 but decays faster for large K.
    Inverse3kMinus2,
}

impl ExponentRule {
    pub fn exponent(self, k: usize) -> f64 {
        let k = k as f64;
        match self {
            ExponentRule::TwoOverK => 2.0 / k,
            ExponentRule::Inverse3kMinus2 => 4.0 / (3.0 * k - 2.0),
        }
    }
}

/// Determinant-based approximations of M, B and BMG.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DetEstimates {
    pub markedness: f64,
    pub informedness: f64,
    pub correlation: f64,
}

fn signed_pow(x: f64, e: f64) -> f64 {
    if e == 1.0 {
        x
    } else {
        x.signum() * x.abs().powf(e)
    }
}

/// Exact determinant of the normalized 2×2 table from integer counts.
fn table_det(t: &ContingencyTable) -> Result<f64> {
    if t.k() == 2 {
        let n = t.n() as f64;
        let d =
            t.get(0, 0) as i128 * t.get(1, 1) as i128 - t.get(0, 1) as i128 * t.get(1, 0) as i128;
        return Ok(d as f64 / (n * n));
    }
    Ok(expectation_delta(&normalize(t)?).det)
}

pub fn det_estimates(t: &ContingencyTable, rule: ExponentRule) -> Result<DetEstimates> {
    t.require_nonzero_margins()?;
    let m = margins(t)?;
    let det = table_det(t)?;
    let e = rule.exponent(t.k());
    let pr: f64 = m.prevalence.iter().product();
    let pb: f64 = m.bias.iter().product();
    Ok(DetEstimates {
        markedness: signed_pow(det / pb, e),
        informedness: signed_pow(det / pr, e),
        correlation: signed_pow(det / (pr * pb).sqrt(), e),
    })
}

/// The nine Evenness forms.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Evenness {
    pub r_plus: f64,
    pub p_plus: f64,
    pub g_plus: f64,
    pub r_minus: f64,
    pub p_minus: f64,
    pub g_minus: f64,
    pub r_hash: f64,
    pub p_hash: f64,
    pub g_hash: f64,
}

fn mean(v: &[f64]) -> f64 {
    v.iter().sum::<f64>() / v.len() as f64
}

fn hmean(v: &[f64]) -> f64 {
    v.len() as f64 / v.iter().map(|x| 1.0 / x).sum::<f64>()
}

pub fn evenness_variants(t: &ContingencyTable) -> Result<Evenness> {
    t.require_nonzero_margins()?;
    let m = margins(t)?;
    let k = t.k() as f64;
    let r_plus = m.prevalence.iter().product::<f64>().powf(2.0 / k);
    let p_plus = m.bias.iter().product::<f64>().powf(2.0 / k);
    let er: Vec<f64> = m.prevalence.iter().map(|p| p * (1.0 - p)).collect();
    let ep: Vec<f64> = m.bias.iter().map(|p| p * (1.0 - p)).collect();
    let eg: Vec<f64> = er.iter().zip(&ep).map(|(r, p)| (r * p).sqrt()).collect();
    Ok(Evenness {
        r_plus,
        p_plus,
        g_plus: (r_plus * p_plus).sqrt(),
        r_minus: mean(&er),
        p_minus: mean(&ep),
        g_minus: mean(&eg),
        r_hash: hmean(&er),
        p_hash: hmean(&ep),
        g_hash: hmean(&eg),
    })
}

/// Cohen's kappa for K classes.
pub fn multiclass_kappa(t: &ContingencyTable) -> Result<f64> {
    let m = margins(t)?;
    let n = t.n() as f64;
    let po = (0..t.k()).map(|i| t.get(i, i)).sum::<u64>() as f64 / n;
    let pe: f64 = m.prevalence.iter().zip(&m.bias).map(|(a, b)| a * b).sum();
    if pe >= 1.0 {
        return Err(Error::Data(
            "expected agreement is 1 (single-class table); kappa undefined".into(),
        ));
    }
    Ok((po - pe) / (1.0 - pe))
}

/// Prevalence-weighted one-vs-rest Recall, G-measure and F1.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MacroAverages {
    pub wav: f64,
    pub gav: f64,
    pub fav: f64,
}

pub fn macro_averages(t: &ContingencyTable) -> Result<MacroAverages> {
    let per = one_vs_rest(t)?;
    let m = margins(t)?;
    let w = &m.prevalence;
    Ok(MacroAverages {
        wav: weighted(per.iter().map(|s| s.recall), w),
        gav: weighted(per.iter().map(|s| s.g_measure), w),
        fav: weighted(per.iter().map(|s| s.f1), w),
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MulticlassStats {
    pub k: usize,
    pub n: u64,
    pub prevalence: Vec<f64>,
    pub bias: Vec<f64>,
    pub informedness: f64,
    pub markedness: f64,
    /// `None` when informedness and markedness have opposite signs.
    pub correlation: Option<f64>,
    pub mutual_information: f64,
    pub conditional_entropy: f64,
    pub det: f64,
    pub evenness: Evenness,
    pub kappa: f64,
    pub accuracy: f64,
    pub per_label_informedness: Vec<f64>,
    pub per_label_markedness: Vec<f64>,
    pub macro_averages: MacroAverages,
    pub det_estimates: DetEstimates,
    pub det_estimates_alt: DetEstimates,
}

pub fn multiclass_stats(t: &ContingencyTable) -> Result<MulticlassStats> {
    let per = one_vs_rest(t)?;
    let m = margins(t)?;
    let informedness = weighted(per.iter().map(|s| s.informedness), &m.prevalence);
    let markedness = weighted(per.iter().map(|s| s.markedness), &m.bias);
    let n = t.n();
    Ok(MulticlassStats {
        k: t.k(),
        n,
        informedness,
        markedness,
        correlation: bmg(informedness, markedness).ok(),
        mutual_information: mutual_information(t)?,
        conditional_entropy: conditional_entropy(t)?,
        det: table_det(t)?,
        evenness: evenness_variants(t)?,
        kappa: multiclass_kappa(t)?,
        accuracy: (0..t.k()).map(|i| t.get(i, i)).sum::<u64>() as f64 / n as f64,
        per_label_informedness: per.iter().map(|s| s.informedness).collect(),
        per_label_markedness: per.iter().map(|s| s.markedness).collect(),
        macro_averages: macro_averages(t)?,
        det_estimates: det_estimates(t, ExponentRule::TwoOverK)?,
        det_estimates_alt: det_estimates(t, ExponentRule::Inverse3kMinus2)?,
        prevalence: m.prevalence,
        bias: m.bias,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::contingency::{transform, Transform};

    fn table(rows: Vec<Vec<u64>>) -> ContingencyTable {
        ContingencyTable::new(rows, None).unwrap()
    }

    fn diag(k: usize, v: u64) -> ContingencyTable {
        let mut r = vec![vec![0; k]; k];
        for (i, row) in r.iter_mut().enumerate() {
            row[i] = v;
        }
        table(r)
    }

    #[test]
    fn reference_reduction() {
        let t = table(vec![vec![56, 20], vec![12, 12]]);
        assert!((bookmaker_informedness(&t).unwrap() - 0.1985).abs() < 5e-5);
        assert!((multiclass_markedness(&t).unwrap() - 0.2368).abs() < 5e-5);
        assert!((correlation_bmg(&t).unwrap() - 0.2168).abs() < 5e-5);
        assert!((multiclass_kappa(&t).unwrap() - 0.2126).abs() < 5e-5);
        let mi = mutual_information(&t).unwrap();
        assert!((mi - 0.022500197142909635).abs() < 1e-14);
        assert!((conditional_entropy(&t).unwrap() - 0.6043692604295167).abs() < 1e-14);
        let ma = macro_averages(&t).unwrap();
        assert!((ma.wav - 0.68).abs() < 1e-12);
    }

    #[test]
    fn perfect_and_uniform() {
        let d = diag(3, 7);
        assert_eq!(bookmaker_informedness(&d).unwrap(), 1.0);
        assert_eq!(multiclass_markedness(&d).unwrap(), 1.0);
        assert_eq!(correlation_bmg(&d).unwrap(), 1.0);
        assert!((multiclass_kappa(&d).unwrap() - 1.0).abs() < 1e-15);
        let ma = macro_averages(&d).unwrap();
        assert!(
            (ma.wav - 1.0).abs() < 1e-15
                && (ma.gav - 1.0).abs() < 1e-15
                && (ma.fav - 1.0).abs() < 1e-15
        );
        let u = table(vec![vec![4; 3]; 3]);
        assert!(bookmaker_informedness(&u).unwrap().abs() < 1e-15);
        assert!(mutual_information(&u).unwrap().abs() < 1e-15);
        assert!(multiclass_kappa(&u).unwrap().abs() < 1e-15);
        assert!((macro_averages(&u).unwrap().wav - 1.0 / 3.0).abs() < 1e-15);
        let two = diag(2, 50);
        assert!((mutual_information(&two).unwrap() - 2f64.ln()).abs() < 1e-15);
        assert_eq!(conditional_entropy(&two).unwrap(), 0.0);
    }

    #[test]
    fn det_estimate_examples() {
        let t = table(vec![vec![56, 20], vec![12, 12]]);
        for rule in [ExponentRule::TwoOverK, ExponentRule::Inverse3kMinus2] {
            let d = det_estimates(&t, rule).unwrap();
            assert!((d.markedness - 0.23684210526315785).abs() < 1e-12);
            assert!((d.informedness - 0.19852941176470584).abs() < 1e-12);
            assert!((d.correlation - 0.21684124109359196).abs() < 1e-12);
        }
        for rule in [ExponentRule::TwoOverK, ExponentRule::Inverse3kMinus2] {
            let d = det_estimates(&diag(4, 25), rule).unwrap();
            assert!((d.informedness - 1.0).abs() < 1e-12, "{d:?}");
            assert!((d.markedness - 1.0).abs() < 1e-12);
            assert!((d.correlation - 1.0).abs() < 1e-12);
        }
        let ind = table(vec![vec![2, 4, 6], vec![1, 2, 3], vec![3, 6, 9]]);
        let d = det_estimates(&ind, ExponentRule::TwoOverK).unwrap();
        assert!(d.informedness.abs() < 1e-6);
    }

    #[test]
    fn evenness_examples() {
        let even = table(vec![vec![30, 20], vec![20, 30]]);
        let e = evenness_variants(&even).unwrap();
        for v in [e.r_plus, e.r_minus, e.r_hash, e.p_plus, e.g_plus, e.g_minus] {
            assert!((v - 0.25).abs() < 1e-15);
        }
        let t = table(vec![vec![56, 20], vec![12, 12]]);
        let e = evenness_variants(&t).unwrap();
        assert!((e.r_minus - 0.2176).abs() < 1e-12);
        assert!((e.p_minus - 0.1824).abs() < 1e-12);
        assert!((e.r_plus - 0.2176).abs() < 1e-12);
        let u = table(vec![vec![1; 4]; 4]);
        let e = evenness_variants(&u).unwrap();
        assert!((e.r_plus - 0.0625).abs() < 1e-15);
        assert!((e.r_minus - 0.1875).abs() < 1e-15);
    }

    #[test]
    fn opposite_signs_signal_undefined() {
        assert!(matches!(
            bmg(0.2, -0.1),
            Err(Error::UndefinedCorrelation { .. })
        ));
        assert_eq!(bmg(0.0, -0.3).unwrap(), 0.0);
    }

    #[test]
    fn markedness_is_dual_informedness() {
        let t = table(vec![
            vec![9, 2, 1, 0],
            vec![3, 7, 2, 1],
            vec![0, 4, 11, 2],
            vec![1, 1, 3, 8],
        ]);
        let d = transform(&t, &Transform::Dual).unwrap();
        assert!(
            (multiclass_markedness(&t).unwrap() - bookmaker_informedness(&d).unwrap()).abs()
                < 1e-14
        );
        let s = multiclass_stats(&t).unwrap();
        let rebuilt: f64 = s
            .per_label_informedness
            .iter()
            .zip(&s.prevalence)
            .map(|(b, p)| b * p)
            .sum();
        assert!((rebuilt - s.informedness).abs() < 1e-12);
    }

    #[test]
    fn zero_margin_rejected() {
        let t = table(vec![vec![5, 0, 1], vec![0, 0, 0], vec![1, 0, 4]]);
        assert!(matches!(
            multiclass_stats(&t),
            Err(Error::ZeroMargin { .. })
        ));
    }
}
