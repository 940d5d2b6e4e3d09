//! Confidence intervals for informedness-like measures.

use serde::{Deserialize, Serialize};

use crate::contingency::{margins, ContingencyTable};
use crate::error::{Error, Result};
use crate::special::normal_quantile;

/// Shape of √sse as a function of the hypothesised value b.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SseRule {
    ConstantOne,
    #[serde(rename = "one_minus_absB")]
    OneMinusAbsB,
    WeightedArithmetic,
    Geometric,
    Harmonic,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Hypothesis {
    /// Around B = 0.
    Null,
    /// Around the observed B.
    Empirical,
    /// Around B = 1.
    Full,
}

impl Hypothesis {
    pub fn default_rule(self) -> SseRule {
        match self {
            Hypothesis::Null => SseRule::ConstantOne,
            Hypothesis::Empirical => SseRule::WeightedArithmetic,
            Hypothesis::Full => SseRule::OneMinusAbsB,
        }
    }
}

pub fn sse_profile(b: f64, rule: SseRule) -> f64 {
    let a = b.abs();
    match rule {
        SseRule::ConstantOne => 1.0,
        SseRule::OneMinusAbsB => 1.0 - a,
        SseRule::WeightedArithmetic => 1.0 - 2.0 * a + 2.0 * b * b,
        SseRule::Geometric => (a - b * b).max(0.0).sqrt(),
        SseRule::Harmonic => a - b * b,
    }
}

/// PrevG · BiasG · K².
pub fn evenness_factor(t: &ContingencyTable) -> Result<f64> {
    t.require_nonzero_margins()?;
    let m = margins(t)?;
    let k = t.k() as f64;
    Ok(m.prevalence_geometric() * m.bias_geometric() * k * k)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Tails {
    One,
    Two,
}

/// Normal multiplier X for significance level `alpha`.
pub fn normal_multiplier(alpha: f64, tails: Tails) -> Result<f64> {
    if !(alpha > 0.0 && alpha < 1.0) {
        return Err(Error::Usage(format!(
            "alpha must lie in (0, 1), got {alpha}"
        )));
    }
    Ok(match tails {
        Tails::One => normal_quantile(1.0 - alpha),
        Tails::Two => normal_quantile(1.0 - alpha / 2.0),
    })
}

pub const X_TWO_TAILED: f64 = 1.96;
pub const X_ONE_TAILED: f64 = 1.65;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ConfidenceInterval {
    pub center: f64,
    pub half_width: f64,
    pub variant: Hypothesis,
    pub sse_rule: SseRule,
    pub x: f64,
    pub n: u64,
    pub e: f64,
}

impl ConfidenceInterval {
    pub fn lo(&self) -> f64 {
        self.center - self.half_width
    }

    pub fn hi(&self) -> f64 {
        self.center + self.half_width
    }

    pub fn contains(&self, v: f64) -> bool {
        (v - self.center).abs() <= self.half_width
    }
}

/// Interval around the hypothesis implied by `variant`, using its default sse rule.
///
/// `b` is the observed value; it is the center only for the empirical variant.
pub fn confidence_interval(
    b: f64,
    n: u64,
    e: f64,
    x: f64,
    variant: Hypothesis,
) -> Result<ConfidenceInterval> {
    confidence_interval_with_rule(b, n, e, x, variant, variant.default_rule())
}

pub fn confidence_interval_with_rule(
    b: f64,
    n: u64,
    e: f64,
    x: f64,
    variant: Hypothesis,
    rule: SseRule,
) -> Result<ConfidenceInterval> {
    if n < 2 {
        return Err(Error::Data(format!(
            "a confidence interval needs n >= 2, got {n}"
        )));
    }
    if !(e > 0.0 && e.is_finite()) {
        return Err(Error::Data(format!(
            "evenness factor must be positive, got {e}"
        )));
    }
    if !(x > 0.0 && x.is_finite()) {
        return Err(Error::Usage(format!(
            "multiplier X must be positive, got {x}"
        )));
    }
    if !(-1.0..=1.0).contains(&b) {
        return Err(Error::Usage(format!("b must lie in [-1, 1], got {b}")));
    }
    let center = match variant {
        Hypothesis::Null => 0.0,
        Hypothesis::Empirical => b,
        Hypothesis::Full if b < 0.0 => -1.0,
        Hypothesis::Full => 1.0,
    };
    let half_width = x * sse_profile(center, rule) / (2.0 * e * (n as f64 - 1.0)).sqrt();
    Ok(ConfidenceInterval {
        center,
        half_width,
        variant,
        sse_rule: rule,
        x,
        n,
        e,
    })
}

/// Two-class half width, X·√sse/√(n−1).
pub fn dichotomous_half_width(b: f64, n: u64, x: f64, rule: SseRule) -> Result<f64> {
    if n < 2 {
        return Err(Error::Data(format!(
            "a confidence interval needs n >= 2, got {n}"
        )));
    }
    Ok(x * sse_profile(b, rule) / (n as f64 - 1.0).sqrt())
}

/// Observed value, sample size and evenness factor of one system.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SystemSummary {
    pub b: f64,
    pub n: u64,
    pub e: f64,
}

impl SystemSummary {
    pub fn from_table(t: &ContingencyTable) -> Result<Self> {
        Ok(Self {
            b: crate::multiclass::bookmaker_informedness(t)?,
            n: t.n(),
            e: evenness_factor(t)?,
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Comparison {
    pub a: ConfidenceInterval,
    pub b: ConfidenceInterval,
    pub a_in_b: bool,
    pub b_in_a: bool,
    pub mutually_exclusive: bool,
}

pub fn compare_systems(a: SystemSummary, b: SystemSummary, x: f64) -> Result<Comparison> {
    let ca = confidence_interval(a.b, a.n, a.e, x, Hypothesis::Empirical)?;
    let cb = confidence_interval(b.b, b.n, b.e, x, Hypothesis::Empirical)?;
    let a_in_b = cb.contains(a.b);
    let b_in_a = ca.contains(b.b);
    Ok(Comparison {
        a: ca,
        b: cb,
        a_in_b,
        b_in_a,
        mutually_exclusive: !a_in_b && !b_in_a,
    })
}
