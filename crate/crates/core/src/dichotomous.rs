//! Two-class measures.
//!
//! Cells follow the usual layout `[[A, B], [C, D]]` = `[[TP, FP], [FN, TN]]`.
//! Informedness, markedness, correlation and kappa are computed from the
//! integer determinant `AD - BC` so their signs agree exactly.

use serde::{Deserialize, Serialize};

use crate::contingency::{transform, ContingencyTable, CostModel, Transform};
use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BinaryStats {
    pub recall: f64,
    pub inverse_recall: f64,
    pub precision: f64,
    pub inverse_precision: f64,
    pub fallout: f64,
    pub miss_rate: f64,
    pub f1: f64,
    pub g_measure: f64,
    pub jaccard: f64,
    pub rand_accuracy: f64,
    /// `None` when fallout is zero (ratio is infinite).
    pub lr: Option<f64>,
    /// `None` when inverse recall is zero (ratio is infinite).
    pub nlr: Option<f64>,
    pub wracc: f64,
    pub auc: f64,
    pub informedness: f64,
    pub markedness: f64,
    pub correlation: f64,
    pub kappa: f64,
    /// Specific agreement on negatives (F1 of the inverse problem).
    pub ps_negative: f64,
    /// fpr² + fnr², squared distance from the ROC point to (0, 1).
    pub roc_distance_sq: f64,

    pub tp: f64,
    pub fp: f64,
    #[serde(rename = "fn")]
    pub fn_: f64,
    pub tn: f64,
    pub rp: f64,
    pub rn: f64,
    pub pp: f64,
    pub pn: f64,
    pub etp: f64,
    pub etn: f64,
    pub dtp: f64,
    pub deltap: f64,
    pub rh: f64,
    pub ph: f64,
    pub prev_g: f64,
    pub bias_g: f64,
    pub evenness_r: f64,
    pub evenness_p: f64,
    pub evenness_g: f64,
    pub skew: f64,
}

fn cells(t: &ContingencyTable) -> Result<[u64; 4]> {
    if t.k() != 2 {
        return Err(Error::Usage(format!(
            "dichotomous measures need a 2x2 table, got {0}x{0}",
            t.k()
        )));
    }
    t.require_nonzero_margins()?;
    Ok([t.get(0, 0), t.get(0, 1), t.get(1, 0), t.get(1, 1)])
}

/// `AD - BC` as an exact integer.
fn det_counts(c: &[u64; 4]) -> i128 {
    c[0] as i128 * c[3] as i128 - c[1] as i128 * c[2] as i128
}

pub fn binary_stats(t: &ContingencyTable) -> Result<BinaryStats> {
    let c = cells(t)?;
    let [a, b, cc, d] = c.map(|x| x as f64);
    let n = a + b + cc + d;
    let det = det_counts(&c) as f64;

    let pos = a + cc;
    let neg = b + d;
    let ppos = a + b;
    let pneg = cc + d;

    let recall = a / pos;
    let inverse_recall = d / neg;
    let precision = a / ppos;
    let inverse_precision = d / pneg;
    let fallout = b / neg;
    let miss_rate = cc / pos;

    let informedness = det / (pos * neg);
    let markedness = det / (ppos * pneg);
    let correlation = if det == 0.0 {
        0.0
    } else {
        det / (pos * neg * ppos * pneg).sqrt()
    };
    let kappa = 2.0 * det / (ppos * neg + pos * pneg);

    let (tp, fp, fn_, tn) = (a / n, b / n, cc / n, d / n);
    let (rp, rn, pp, pn) = (pos / n, neg / n, ppos / n, pneg / n);
    let dtp = det / (n * n);
    let skew = rn / rp;

    Ok(BinaryStats {
        recall,
        inverse_recall,
        precision,
        inverse_precision,
        fallout,
        miss_rate,
        f1: 2.0 * a / (2.0 * a + b + cc),
        g_measure: (recall * precision).sqrt(),
        jaccard: a / (a + b + cc),
        rand_accuracy: (a + d) / n,
        lr: (b > 0.0).then(|| recall / fallout),
        nlr: (d > 0.0).then(|| miss_rate / inverse_recall),
        wracc: 4.0 * skew * informedness / ((1.0 + skew) * (1.0 + skew)),
        auc: (informedness + 1.0) / 2.0,
        informedness,
        markedness,
        correlation,
        kappa,
        ps_negative: 2.0 * d / (2.0 * d + b + cc),
        roc_distance_sq: fallout * fallout + miss_rate * miss_rate,
        tp,
        fp,
        fn_,
        tn,
        rp,
        rn,
        pp,
        pn,
        etp: rp * pp,
        etn: rn * pn,
        dtp,
        deltap: 2.0 * dtp,
        rh: 2.0 * rp * rn / (rp + rn),
        ph: 2.0 * pp * pn / (pp + pn),
        prev_g: (rp * rn).sqrt(),
        bias_g: (pp * pn).sqrt(),
        evenness_r: rp * rn,
        evenness_p: pp * pn,
        evenness_g: (rp * rn).sqrt() * (pp * pn).sqrt(),
        skew,
    })
}

/// Area under the single-point ROC curve.
pub fn auc_single_point(s: &BinaryStats) -> f64 {
    (s.informedness + 1.0) / 2.0
}

/// Weighted relative accuracy. `None` uses the table's own skew.
pub fn wracc(s: &BinaryStats, cost: Option<&CostModel>) -> Result<f64> {
    let c = match cost {
        Some(m) => m.combined(),
        None => s.skew,
    };
    if !(c > 0.0 && c.is_finite()) {
        return Err(Error::Usage(format!(
            "combined cost ratio must be positive, got {c}"
        )));
    }
    Ok(4.0 * c * s.informedness / ((1.0 + c) * (1.0 + c)))
}

/// Regression slopes of the 2×2 table.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RegressionCoefficients {
    /// Predicting the real class from the prediction (markedness).
    pub r_p: f64,
    /// Predicting the prediction from the real class (informedness).
    pub r_r: f64,
    /// Geometric mean (Matthews correlation).
    pub r_g: f64,
}

pub fn regression_coefficients(t: &ContingencyTable) -> Result<RegressionCoefficients> {
    let c = cells(t)?;
    let det = det_counts(&c) as f64;
    let [a, b, cc, d] = c.map(|x| x as f64);
    let r_p = det / ((a + b) * (cc + d));
    let r_r = det / ((a + cc) * (b + d));
    let r_g = if det == 0.0 {
        0.0
    } else {
        det.signum() * (r_p * r_r).sqrt()
    };
    Ok(RegressionCoefficients { r_p, r_r, r_g })
}

/// Specific agreement on negatives, via the inverse table.
pub fn ps_negative(t: &ContingencyTable) -> Result<f64> {
    Ok(binary_stats(&transform(t, &Transform::Inverse)?)?.f1)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn t2(a: u64, b: u64, c: u64, d: u64) -> ContingencyTable {
        ContingencyTable::new(vec![vec![a, b], vec![c, d]], None).unwrap()
    }

    fn close(a: f64, b: f64, tol: f64) -> bool {
        (a - b).abs() <= tol
    }

    #[test]
    fn reference_first() {
        let s = binary_stats(&t2(56, 20, 12, 12)).unwrap();
        assert!(close(s.recall, 0.8235, 5e-5));
        assert!(close(s.precision, 0.7368, 5e-5));
        assert!(close(s.f1, 0.7778, 5e-5));
        assert!(close(s.g_measure, 0.7790, 5e-5));
        assert!(close(s.rand_accuracy, 0.68, 1e-12));
        assert!(close(s.informedness, 0.1985, 5e-5));
        assert!(close(s.markedness, 0.2368, 5e-5));
        assert!(close(s.correlation, 0.2168, 5e-5));
        assert!(close(s.kappa, 0.2126, 5e-5));
        assert!(close(s.auc, 0.5993, 5e-5));
    }

    #[test]
    fn reference_second() {
        let s = binary_stats(&t2(30, 12, 30, 28)).unwrap();
        assert!(close(s.recall, 0.5, 1e-12));
        assert!(close(s.precision, 0.7143, 5e-5));
        assert!(close(s.f1, 0.5882, 5e-5));
        assert!(close(s.g_measure, 0.5976, 5e-5));
        assert!(close(s.rand_accuracy, 0.58, 1e-12));
        assert!(close(s.informedness, 0.2, 1e-12));
        assert!(close(s.markedness, 0.1970, 5e-5));
        assert!(close(s.correlation, 0.1985, 5e-5));
        assert!(close(s.kappa, 0.1860, 5e-5));
    }

    #[test]
    fn perfect_and_chance() {
        let s = binary_stats(&t2(50, 0, 0, 50)).unwrap();
        for v in [
            s.recall,
            s.precision,
            s.informedness,
            s.markedness,
            s.correlation,
            s.kappa,
            s.auc,
        ] {
            assert_eq!(v, 1.0);
        }
        assert_eq!(s.lr, None);
        let z = binary_stats(&t2(38, 12, 38, 12)).unwrap();
        for v in [z.informedness, z.markedness, z.correlation, z.kappa] {
            assert_eq!(v, 0.0);
        }
        assert_eq!(z.auc, 0.5);
    }

    #[test]
    fn zero_margin_and_shape_errors() {
        assert!(matches!(
            binary_stats(&t2(5, 0, 0, 0)),
            Err(Error::ZeroMargin { .. })
        ));
        let t3 = ContingencyTable::new(vec![vec![1; 3]; 3], None).unwrap();
        assert!(matches!(binary_stats(&t3), Err(Error::Usage(_))));
    }

    #[test]
    fn wracc_forms() {
        let s = binary_stats(&t2(56, 20, 12, 12)).unwrap();
        let unit = CostModel::new(1.0, 1.0).unwrap();
        assert_eq!(wracc(&s, Some(&unit)).unwrap(), s.informedness);
        let direct = 4.0 * (56.0 / 68.0 - 0.76) * 0.68;
        assert!(close(wracc(&s, None).unwrap(), direct, 1e-12));
        assert!(close(wracc(&s, None).unwrap(), 0.1728, 1e-4));
        let p = binary_stats(&t2(50, 0, 0, 50)).unwrap();
        assert_eq!(wracc(&p, Some(&unit)).unwrap(), 1.0);
    }

    #[test]
    fn regression_examples() {
        let r = regression_coefficients(&t2(56, 20, 12, 12)).unwrap();
        assert!(
            close(r.r_p, 0.2368, 5e-5) && close(r.r_r, 0.1985, 5e-5) && close(r.r_g, 0.2168, 5e-5)
        );
        let p = regression_coefficients(&t2(7, 0, 0, 3)).unwrap();
        assert_eq!((p.r_p, p.r_r, p.r_g), (1.0, 1.0, 1.0));
        let z = regression_coefficients(&t2(6, 4, 12, 8)).unwrap();
        assert_eq!((z.r_p, z.r_r, z.r_g), (0.0, 0.0, 0.0));
    }

    #[test]
    fn ps_negative_is_inverse_f1() {
        let t = t2(56, 20, 12, 12);
        assert!(close(ps_negative(&t).unwrap(), 24.0 / 56.0, 1e-15));
        assert_eq!(
            ps_negative(&t).unwrap(),
            binary_stats(&t).unwrap().ps_negative
        );
    }
}
