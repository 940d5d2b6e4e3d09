//! Significance tests: chi-squared and G² variants, Fisher exact,
//! Yates and Williams corrections, Cramér's V and Sellke calibration.

use serde::{Deserialize, Serialize};

use crate::contingency::{margins, ContingencyTable};
use crate::error::{Error, Result};
use crate::multiclass::{
    bookmaker_informedness, evenness_variants, multiclass_markedness, mutual_information,
};
use crate::rng::Stream;
use crate::special::{chi2_sf, ln_factorial};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum StatisticKind {
    #[serde(rename = "plusP_chi2")]
    PlusPChi2,
    #[serde(rename = "plusR_chi2")]
    PlusRChi2,
    #[serde(rename = "plusP_g2")]
    PlusPG2,
    #[serde(rename = "plusR_g2")]
    PlusRG2,
    KB,
    KM,
    KBM,
    XB,
    XM,
    XBM,
    #[serde(rename = "convB")]
    ConvB,
    #[serde(rename = "convM")]
    ConvM,
    #[serde(rename = "convBM")]
    ConvBM,
    #[serde(rename = "full_chi2")]
    FullChi2,
    #[serde(rename = "full_g2")]
    FullG2,
    #[serde(rename = "fisher")]
    Fisher,
}

impl StatisticKind {
    pub fn name(self) -> &'static str {
        match self {
            StatisticKind::PlusPChi2 => "plusP_chi2",
            StatisticKind::PlusRChi2 => "plusR_chi2",
            StatisticKind::PlusPG2 => "plusP_g2",
            StatisticKind::PlusRG2 => "plusR_g2",
            StatisticKind::KB => "KB",
            StatisticKind::KM => "KM",
            StatisticKind::KBM => "KBM",
            StatisticKind::XB => "XB",
            StatisticKind::XM => "XM",
            StatisticKind::XBM => "XBM",
            StatisticKind::ConvB => "convB",
            StatisticKind::ConvM => "convM",
            StatisticKind::ConvBM => "convBM",
            StatisticKind::FullChi2 => "full_chi2",
            StatisticKind::FullG2 => "full_g2",
            StatisticKind::Fisher => "fisher",
        }
    }

    pub fn is_g2(self) -> bool {
        matches!(
            self,
            StatisticKind::PlusPG2 | StatisticKind::PlusRG2 | StatisticKind::FullG2
        )
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Correction {
    Yates,
    Williams,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SignificanceReport {
    pub kind: StatisticKind,
    /// Test statistic; for Fisher this is the p-value itself.
    pub value: f64,
    /// Degrees of freedom used for `p_value`.
    pub df: u32,
    /// The other df convention, (K-1) vs (K-1)²; equal to `df` at K=2.
    pub alt_df: u32,
    pub p_value: f64,
    pub corrections: Vec<Correction>,
    pub n: u64,
}

impl SignificanceReport {
    fn chi2(kind: StatisticKind, value: f64, df: u32, alt_df: u32, n: u64) -> Result<Self> {
        if !value.is_finite() {
            return Err(Error::Numeric(format!(
                "{} evaluated to {value}",
                kind.name()
            )));
        }
        let value = value.max(0.0);
        Ok(Self {
            kind,
            value,
            df,
            alt_df,
            p_value: chi2_sf(value, df),
            corrections: Vec::new(),
            n,
        })
    }

    /// p-value under the alternative df convention.
    pub fn p_value_alt(&self) -> f64 {
        if self.kind == StatisticKind::Fisher {
            self.p_value
        } else {
            chi2_sf(self.value, self.alt_df)
        }
    }

    pub fn significant(&self, alpha: f64) -> bool {
        self.p_value < alpha
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Target {
    /// Row 0: the predicted-positive cells.
    PredictedPositive,
    /// Column 0: the real-positive cells.
    RealPositive,
}

/// Observed and expected counts along the target row or column.
fn target_cells(t: &ContingencyTable, target: Target) -> Result<[(f64, f64); 2]> {
    if t.k() != 2 {
        return Err(Error::Usage(
            "single-prediction tests need a 2x2 table".into(),
        ));
    }
    t.require_nonzero_margins()?;
    let n = t.n() as f64;
    let rs = t.row_sums();
    let cs = t.col_sums();
    let e = |i: usize, j: usize| rs[i] as f64 * cs[j] as f64 / n;
    let cell = |i, j| (t.get(i, j) as f64, e(i, j));
    Ok(match target {
        Target::PredictedPositive => [cell(0, 0), cell(0, 1)],
        Target::RealPositive => [cell(0, 0), cell(1, 0)],
    })
}

/// Pearson χ² over the positive row or column, with optional per-cell Yates.
pub fn chi2_positive(
    t: &ContingencyTable,
    target: Target,
    yates: bool,
) -> Result<SignificanceReport> {
    let mut applied = false;
    let mut v = 0.0;
    for (o, e) in target_cells(t, target)? {
        let mut d = (o - e).abs();
        if yates && e < 5.0 {
            d = (d - 0.5).max(0.0);
            applied = true;
        }
        v += d * d / e;
    }
    let kind = match target {
        Target::PredictedPositive => StatisticKind::PlusPChi2,
        Target::RealPositive => StatisticKind::PlusRChi2,
    };
    let mut r = SignificanceReport::chi2(kind, v, 1, 1, t.n())?;
    if applied {
        r.corrections.push(Correction::Yates);
    }
    Ok(r)
}

fn g_term(o: f64, e: f64) -> f64 {
    if o > 0.0 {
        o * (o / e).ln()
    } else {
        0.0
    }
}

/// Likelihood-ratio G² over the positive row or column.
pub fn g2_positive(t: &ContingencyTable, target: Target) -> Result<SignificanceReport> {
    let v: f64 = 2.0
        * target_cells(t, target)?
            .iter()
            .map(|&(o, e)| g_term(o, e))
            .sum::<f64>();
    let kind = match target {
        Target::PredictedPositive => StatisticKind::PlusPG2,
        Target::RealPositive => StatisticKind::PlusRG2,
    };
    SignificanceReport::chi2(kind, v, 1, 1, t.n())
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum BookmakerFamily {
    KB,
    KM,
    KBM,
    XB,
    XM,
    XBM,
    ConvB,
    ConvM,
    ConvBM,
}

impl BookmakerFamily {
    pub const ALL: [BookmakerFamily; 9] = [
        BookmakerFamily::KB,
        BookmakerFamily::KM,
        BookmakerFamily::KBM,
        BookmakerFamily::XB,
        BookmakerFamily::XM,
        BookmakerFamily::XBM,
        BookmakerFamily::ConvB,
        BookmakerFamily::ConvM,
        BookmakerFamily::ConvBM,
    ];

    fn kind(self) -> StatisticKind {
        match self {
            BookmakerFamily::KB => StatisticKind::KB,
            BookmakerFamily::KM => StatisticKind::KM,
            BookmakerFamily::KBM => StatisticKind::KBM,
            BookmakerFamily::XB => StatisticKind::XB,
            BookmakerFamily::XM => StatisticKind::XM,
            BookmakerFamily::XBM => StatisticKind::XBM,
            BookmakerFamily::ConvB => StatisticKind::ConvB,
            BookmakerFamily::ConvM => StatisticKind::ConvM,
            BookmakerFamily::ConvBM => StatisticKind::ConvBM,
        }
    }
}

/// Chi-squared statistics built from informedness and markedness.
pub fn chi2_bookmaker_family(
    t: &ContingencyTable,
    family: BookmakerFamily,
) -> Result<SignificanceReport> {
    let b = bookmaker_informedness(t)?;
    let m = multiclass_markedness(t)?;
    let ev = evenness_variants(t)?;
    let k = t.k() as f64;
    let n = t.n() as f64;
    let small = (t.k() - 1) as u32;
    let big = small * small;
    let bm = || {
        if b * m < 0.0 {
            Err(Error::UndefinedCorrelation {
                informedness: b,
                markedness: m,
            })
        } else {
            Ok(b * m)
        }
    };
    use BookmakerFamily::*;
    let k_family = |f: BookmakerFamily| -> Result<f64> {
        Ok(match f {
            KB | XB => k * n * b * b * ev.r_minus,
            KM | XM => k * n * m * m * ev.p_minus,
            _ => k * n * bm()? * ev.g_minus,
        })
    };
    let (value, df, alt) = match family {
        KB | KM | KBM => (k_family(family)?, small, big),
        XB | XM | XBM => ((k - 1.0) * k_family(family)?, big, small),
        ConvB => ((k - 1.0) * n * b * b, small, big),
        ConvM => ((k - 1.0) * n * m * m, small, big),
        ConvBM => ((k - 1.0) * n * bm()?, small, big),
    };
    SignificanceReport::chi2(family.kind(), value, df, alt, t.n())
}

/// Whole-table Pearson χ² and G² (= 2N·MI).
pub fn full_table_tests(t: &ContingencyTable) -> Result<(SignificanceReport, SignificanceReport)> {
    t.require_nonzero_margins()?;
    let k = t.k();
    let n = t.n();
    let nf = n as f64;
    let rs = t.row_sums();
    let cs = t.col_sums();
    let mut chi = 0.0;
    for (i, &r) in rs.iter().enumerate() {
        for (j, &c) in cs.iter().enumerate() {
            let e = r as f64 * c as f64 / nf;
            let d = t.get(i, j) as f64 - e;
            chi += d * d / e;
        }
    }
    let df = ((k - 1) * (k - 1)) as u32;
    let alt = (k - 1) as u32;
    let g2 = 2.0 * nf * mutual_information(t)?;
    Ok((
        SignificanceReport::chi2(StatisticKind::FullChi2, chi, df, alt, n)?,
        SignificanceReport::chi2(StatisticKind::FullG2, g2, df, alt, n)?,
    ))
}

pub fn cramers_v(chi2_value: f64, n: u64, k: usize) -> f64 {
    (chi2_value / (n as f64 * (k as f64 - 1.0))).sqrt()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Sidedness {
    One,
    Two,
}

fn binom_u128(n: u64, k: u64) -> Option<u128> {
    if k > n {
        return Some(0);
    }
    let k = k.min(n - k);
    let mut r: u128 = 1;
    for i in 0..k {
        r = r.checked_mul(u128::from(n - i))? / u128::from(i + 1);
    }
    Some(r)
}

fn ln_binom(n: u64, k: u64) -> f64 {
    ln_factorial(n) - ln_factorial(k) - ln_factorial(n - k)
}

/// Fisher's exact test on a 2×2 table.
///
/// One-sided follows the sign of `AD - BC`; two-sided sums every table
/// no more probable than the observed one.
pub fn fisher_exact_2x2(t: &ContingencyTable, sidedness: Sidedness) -> Result<f64> {
    if t.k() != 2 {
        return Err(Error::Usage("fisher_exact_2x2 needs a 2x2 table".into()));
    }
    let (a, b, c, d) = (t.get(0, 0), t.get(0, 1), t.get(1, 0), t.get(1, 1));
    let n = a + b + c + d;
    let r1 = a + b;
    let c1 = a + c;
    let lo = (r1 + c1).saturating_sub(n);
    let hi = r1.min(c1);
    let upper = u128::from(a) * u128::from(d) >= u128::from(b) * u128::from(c);
    let in_tail = |x: u64| if upper { x >= a } else { x <= a };

    let exact: Option<(Vec<u128>, u128)> = (|| {
        let total = binom_u128(n, c1)?;
        let w = (lo..=hi)
            .map(|x| binom_u128(r1, x)?.checked_mul(binom_u128(n - r1, c1 - x)?))
            .collect::<Option<Vec<_>>>()?;
        Some((w, total))
    })();

    let p = match exact {
        Some((w, total)) => {
            let obs = w[(a - lo) as usize];
            let sum: u128 = (lo..=hi)
                .zip(&w)
                .filter(|&(x, &wx)| match sidedness {
                    Sidedness::One => in_tail(x),
                    Sidedness::Two => wx <= obs,
                })
                .map(|(_, &wx)| wx)
                .sum();
            sum as f64 / total as f64
        }
        None => {
            let lt = ln_binom(n, c1);
            let lw = |x: u64| ln_binom(r1, x) + ln_binom(n - r1, c1 - x) - lt;
            let obs = lw(a);
            (lo..=hi)
                .filter(|&x| match sidedness {
                    Sidedness::One => in_tail(x),
                    Sidedness::Two => lw(x) <= obs + 1e-7,
                })
                .map(|x| lw(x).exp())
                .sum::<f64>()
        }
    };
    Ok(p.min(1.0))
}

/// Fisher p-value for any K by sampling tables with the observed margins.
pub fn fisher_montecarlo_kxk(t: &ContingencyTable, samples: u64, seed: u64) -> Result<f64> {
    if samples == 0 {
        return Err(Error::Usage(
            "at least one Monte Carlo sample is required".into(),
        ));
    }
    let k = t.k();
    let n = t.n() as usize;
    if n == 0 {
        return Err(Error::Data("table is empty (n = 0)".into()));
    }
    let lf: Vec<f64> = (0..=n as u64).map(ln_factorial).collect();
    let stat = |cells: &[u64]| -> f64 { cells.iter().map(|&c| lf[c as usize]).sum() };
    let observed = stat(t.counts());

    let mut rows = Vec::with_capacity(n);
    for (i, &r) in t.row_sums().iter().enumerate() {
        rows.extend(std::iter::repeat_n(i, r as usize));
    }
    let mut cols = Vec::with_capacity(n);
    for (j, &c) in t.col_sums().iter().enumerate() {
        cols.extend(std::iter::repeat_n(j, c as usize));
    }

    let mut rng = Stream::new(seed);
    let mut cells = vec![0u64; k * k];
    let mut hits = 0u64;
    for _ in 0..samples {
        rng.shuffle(&mut cols);
        cells.iter_mut().for_each(|c| *c = 0);
        for (&i, &j) in rows.iter().zip(&cols) {
            cells[i * k + j] += 1;
        }
        // lower probability <=> larger sum of ln(n_ij!)
        if stat(&cells) >= observed - 1e-7 {
            hits += 1;
        }
    }
    Ok(hits as f64 / samples as f64)
}

/// Fisher report: exact for 2×2, sampled otherwise.
pub fn fisher_report(t: &ContingencyTable, samples: u64, seed: u64) -> Result<SignificanceReport> {
    let p = if t.k() == 2 {
        fisher_exact_2x2(t, Sidedness::Two)?
    } else {
        fisher_montecarlo_kxk(t, samples, seed)?
    };
    let small = (t.k() - 1) as u32;
    Ok(SignificanceReport {
        kind: StatisticKind::Fisher,
        value: p,
        df: small * small,
        alt_df: small,
        p_value: p,
        corrections: Vec::new(),
        n: t.n(),
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum WilliamsMode {
    GoodnessOfFit,
    Independence,
}

/// Williams' q for a G² statistic.
pub fn williams_q(t: &ContingencyTable, mode: WilliamsMode) -> Result<f64> {
    t.require_nonzero_margins()?;
    let k = t.k() as f64;
    let n = t.n() as f64;
    Ok(match mode {
        WilliamsMode::GoodnessOfFit => 1.0 + (k * k - 1.0) / (6.0 * n * (k - 1.0)),
        WilliamsMode::Independence => {
            let m = margins(t)?;
            let sp: f64 = m.prevalence.iter().map(|p| 1.0 / p).sum();
            let sb: f64 = m.bias.iter().map(|p| 1.0 / p).sum();
            1.0 + (sp - 1.0) * (sb - 1.0) / (6.0 * n * (k - 1.0) * (k - 1.0))
        }
    })
}

/// Divides a G² statistic by Williams' q and recomputes its p-value.
pub fn williams_correction(
    report: &SignificanceReport,
    t: &ContingencyTable,
    mode: WilliamsMode,
) -> Result<SignificanceReport> {
    if !report.kind.is_g2() {
        return Err(Error::Usage(format!(
            "Williams correction applies to G² statistics, not {}",
            report.kind.name()
        )));
    }
    if report.corrections.contains(&Correction::Williams) {
        return Err(Error::Usage("Williams correction already applied".into()));
    }
    let q = williams_q(t, mode)?;
    let mut r = SignificanceReport::chi2(
        report.kind,
        report.value / q,
        report.df,
        report.alt_df,
        report.n,
    )?;
    r.corrections = report.corrections.clone();
    r.corrections.push(Correction::Williams);
    Ok(r)
}

/// Bound on the posterior odds implied by a p-value.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PosthocCalibration {
    pub p: f64,
    pub l: f64,
    pub alpha_post: f64,
    pub beta_post: f64,
}

pub fn posthoc_calibration(p: f64) -> Result<PosthocCalibration> {
    if !(p > 0.0 && p < (-1.0f64).exp()) {
        return Err(Error::OutOfCalibrationRange(p));
    }
    let l = -std::f64::consts::E * p * p.ln();
    Ok(PosthocCalibration {
        p,
        l,
        alpha_post: 1.0 / (1.0 + 1.0 / l),
        beta_post: 1.0 / (1.0 + l),
    })
}
