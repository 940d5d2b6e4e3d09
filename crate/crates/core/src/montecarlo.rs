//! Monte Carlo harness: tables at stepped informedness levels, every statistic
//! evaluated per run, coverage and rejection summaries.
//!
//! Each run mixes a perfect (diagonal) table with weight `l` and a chance
//! table with weight `1 - l`, then nudges cells until the total is `n`.

use std::io::Write;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use statrs::distribution::{Binomial, DiscreteCDF};

use crate::confidence::{confidence_interval, evenness_factor, ConfidenceInterval, Hypothesis};
use crate::contingency::{repair_zero_margins, ContingencyTable};
use crate::error::{Error, Result};
use crate::multiclass::{multiclass_stats, MulticlassStats};
use crate::rng::{label, Stream};
use crate::significance::{
    chi2_bookmaker_family, cramers_v, fisher_report, full_table_tests, BookmakerFamily,
    SignificanceReport,
};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum MarginDistribution {
    Uniform,
    Binomial,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CellDistribution {
    /// Uniform on [0, 2e].
    Uniform,
    /// Binomial(n, q) drawn by inverse CDF.
    BinomialCopula,
    /// |e + sd·Z| with the binomial standard deviation.
    AbsoluteShiftedNormal,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SimConfig {
    pub k: usize,
    pub n: u64,
    pub steps: usize,
    pub runs_per_step: usize,
    pub margin_distribution: MarginDistribution,
    pub cell_distribution: CellDistribution,
    pub enforce_integer: bool,
    pub seed: u64,
    pub x: f64,
    pub alpha: f64,
    /// Fixed-margin samples for the Fisher p-value; 0 skips Fisher.
    pub fisher_samples: u64,
}

impl Default for SimConfig {
    fn default() -> Self {
        Self {
            k: 4,
            n: 128,
            steps: 11,
            runs_per_step: 10,
            margin_distribution: MarginDistribution::Binomial,
            cell_distribution: CellDistribution::AbsoluteShiftedNormal,
            enforce_integer: true,
            seed: 42,
            x: 1.96,
            alpha: 0.05,
            fisher_samples: 2000,
        }
    }
}

impl SimConfig {
    pub fn validate(&self) -> Result<()> {
        if self.k < 2 {
            return Err(Error::Usage(format!(
                "k must be at least 2, got {}",
                self.k
            )));
        }
        if self.steps < 2 {
            return Err(Error::Usage(format!(
                "steps must be at least 2, got {}",
                self.steps
            )));
        }
        if self.runs_per_step < 1 {
            return Err(Error::Usage("runs per step must be at least 1".into()));
        }
        if self.n < self.k as u64 {
            return Err(Error::Usage(format!(
                "n = {} is smaller than k = {}",
                self.n, self.k
            )));
        }
        if !(self.x > 0.0 && self.x.is_finite()) {
            return Err(Error::Usage(format!("X must be positive, got {}", self.x)));
        }
        if !(self.alpha > 0.0 && self.alpha < 1.0) {
            return Err(Error::Usage(format!(
                "alpha must lie in (0, 1), got {}",
                self.alpha
            )));
        }
        Ok(())
    }

    pub fn level(&self, step: usize) -> f64 {
        step as f64 / (self.steps - 1) as f64
    }

    /// Design expectation of the smallest cell falls below 5.
    pub fn small_n(&self) -> bool {
        (self.n as f64) / ((self.k * self.k) as f64) < 5.0
    }
}

fn round_cells(v: &[f64]) -> Vec<u64> {
    v.iter().map(|x| x.max(0.0).round() as u64).collect()
}

fn to_table(k: usize, v: &[f64]) -> ContingencyTable {
    ContingencyTable::from_flat(k, round_cells(v), None).expect("k >= 2 and k*k cells")
}

fn binomial_draw(n: u64, p: f64, rng: &mut Stream) -> u64 {
    let u = rng.next_open01();
    if p <= 0.0 {
        return 0;
    }
    if p >= 1.0 {
        return n;
    }
    Binomial::new(p, n).expect("p in (0, 1)").inverse_cdf(u)
}

fn perfect_cells(k: usize, n: u64, rng: &mut Stream) -> Vec<f64> {
    let u: Vec<f64> = (0..k).map(|_| rng.next_open01()).collect();
    let s: f64 = u.iter().sum();
    let mut cells = vec![0.0; k * k];
    for i in 0..k {
        cells[i * k + i] = n as f64 * u[i] / s;
    }
    cells
}

fn sample_margin(k: usize, n: u64, rng: &mut Stream, dist: MarginDistribution) -> Vec<f64> {
    let raw: Vec<f64> = match dist {
        MarginDistribution::Uniform => (0..k).map(|_| rng.next_open01()).collect(),
        MarginDistribution::Binomial => (0..k)
            .map(|_| binomial_draw(n, 1.0 / k as f64, rng) as f64)
            .collect(),
    };
    let s: f64 = raw.iter().sum();
    if s <= 0.0 {
        return vec![1.0 / k as f64; k];
    }
    raw.iter().map(|x| x / s).collect()
}

fn chance_cells(
    k: usize,
    n: u64,
    rng: &mut Stream,
    margin: MarginDistribution,
    cell: CellDistribution,
) -> Vec<f64> {
    let prevalence = sample_margin(k, n, rng, margin);
    let bias = sample_margin(k, n, rng, margin);
    let nf = n as f64;
    let mut cells = vec![0.0; k * k];
    for i in 0..k {
        for j in 0..k {
            let q = bias[i] * prevalence[j];
            let e = nf * q;
            cells[i * k + j] = match cell {
                CellDistribution::Uniform => 2.0 * e * rng.next_f64(),
                CellDistribution::BinomialCopula => binomial_draw(n, q, rng) as f64,
                CellDistribution::AbsoluteShiftedNormal => {
                    let sd = (nf * q * (1.0 - q)).sqrt();
                    (e + sd * rng.next_normal()).abs()
                }
            };
        }
    }
    cells
}

/// Diagonal table with uniform random weights scaled to total about `n`.
pub fn gen_perfect(k: usize, n: u64, rng: &mut Stream) -> ContingencyTable {
    to_table(k, &perfect_cells(k, n, rng))
}

/// Table with independently drawn margins and cells scattered around their expectations.
pub fn gen_chance(
    k: usize,
    n: u64,
    rng: &mut Stream,
    margin: MarginDistribution,
    cell: CellDistribution,
) -> ContingencyTable {
    to_table(k, &chance_cells(k, n, rng, margin, cell))
}

fn constrain(k: usize, mut cells: Vec<u64>, n: u64, rng: &mut Stream) -> ContingencyTable {
    let mut t =
        repair_zero_margins(&ContingencyTable::from_flat(k, cells.clone(), None).expect("square"));
    cells.copy_from_slice(t.counts());
    let mut total: u64 = cells.iter().sum();
    let mut rows = t.row_sums();
    let mut cols = t.col_sums();
    let kk = (k * k) as u64;
    while total < n {
        let c = rng.below(kk) as usize;
        cells[c] += 1;
        rows[c / k] += 1;
        cols[c % k] += 1;
        total += 1;
    }
    while total > n {
        let ok = |c: usize, cells: &[u64], rows: &[u64], cols: &[u64]| {
            cells[c] > 0 && rows[c / k] > 1 && cols[c % k] > 1
        };
        if !(0..k * k).any(|c| ok(c, &cells, &rows, &cols)) {
            // No cell can shrink without emptying a margin; restart from a unit diagonal.
            cells.iter_mut().for_each(|c| *c = 0);
            for i in 0..k {
                cells[i * k + i] = 1;
            }
            let mut rest = n.saturating_sub(k as u64);
            while rest > 0 {
                cells[rng.below(kk) as usize] += 1;
                rest -= 1;
            }
            break;
        }
        let c = rng.below(kk) as usize;
        if ok(c, &cells, &rows, &cols) {
            cells[c] -= 1;
            rows[c / k] -= 1;
            cols[c % k] -= 1;
            total -= 1;
        }
    }
    t = ContingencyTable::from_flat(k, cells, None).expect("square");
    t
}

fn mix_cells(perfect: &[f64], chance: &[f64], l: f64) -> Vec<u64> {
    let mixed: Vec<f64> = perfect
        .iter()
        .zip(chance)
        .map(|(p, c)| l * p + (1.0 - l) * c)
        .collect();
    round_cells(&mixed)
}

/// Weighted mix of two tables, repaired and adjusted to total exactly `n`.
pub fn mix_and_constrain(
    perfect: &ContingencyTable,
    chance: &ContingencyTable,
    l: f64,
    n: u64,
    rng: &mut Stream,
) -> Result<ContingencyTable> {
    if perfect.k() != chance.k() {
        return Err(Error::Usage(
            "perfect and chance tables differ in size".into(),
        ));
    }
    if !(0.0..=1.0).contains(&l) {
        return Err(Error::Usage(format!(
            "mixing level must lie in [0, 1], got {l}"
        )));
    }
    let as_f = |t: &ContingencyTable| t.counts().iter().map(|&c| c as f64).collect::<Vec<_>>();
    let cells = mix_cells(&as_f(perfect), &as_f(chance), l);
    Ok(constrain(perfect.k(), cells, n, rng))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SimRun {
    pub step: usize,
    pub run: usize,
    pub level: f64,
    pub seed_stream: u64,
    pub table: ContingencyTable,
    pub stats: Option<MulticlassStats>,
    pub error: Option<String>,
    pub full_chi2: Option<SignificanceReport>,
    pub full_g2: Option<SignificanceReport>,
    pub fisher: Option<SignificanceReport>,
    pub kb: Option<SignificanceReport>,
    pub km: Option<SignificanceReport>,
    pub kbm: Option<SignificanceReport>,
    pub ci_null: Option<ConfidenceInterval>,
    pub ci_empirical: Option<ConfidenceInterval>,
    pub ci_full: Option<ConfidenceInterval>,
    pub cramers_v_chi2: Option<f64>,
    pub cramers_v_g2: Option<f64>,
    pub within_band: bool,
}

impl SimRun {
    /// B̂ inside the empirical interval around the step level.
    pub fn recompute_within_band(&self) -> bool {
        match (&self.stats, &self.ci_empirical) {
            (Some(s), Some(ci)) => ci.contains(s.informedness),
            _ => false,
        }
    }
}

/// Generates the table for one (step, run) cell of the grid.
pub fn generate_table(config: &SimConfig, step: usize, run: usize) -> (ContingencyTable, u64) {
    let base = Stream::substream(config.seed, step as u64, run as u64);
    let id = base.id();
    let mut rng = base;
    let (k, n) = (config.k, config.n);
    let l = config.level(step);
    let p = perfect_cells(k, n, &mut rng);
    let c = chance_cells(
        k,
        n,
        &mut rng,
        config.margin_distribution,
        config.cell_distribution,
    );
    let cells = if config.enforce_integer {
        mix_cells(
            &round_cells(&p)
                .iter()
                .map(|&x| x as f64)
                .collect::<Vec<_>>(),
            &round_cells(&c)
                .iter()
                .map(|&x| x as f64)
                .collect::<Vec<_>>(),
            l,
        )
    } else {
        mix_cells(&p, &c, l)
    };
    (constrain(k, cells, n, &mut rng), id)
}

/// Generates and evaluates one run.
pub fn run_one(config: &SimConfig, step: usize, run: usize) -> SimRun {
    let (table, seed_stream) = generate_table(config, step, run);
    let level = config.level(step);
    let mut out = SimRun {
        step,
        run,
        level,
        seed_stream,
        table,
        stats: None,
        error: None,
        full_chi2: None,
        full_g2: None,
        fisher: None,
        kb: None,
        km: None,
        kbm: None,
        ci_null: None,
        ci_empirical: None,
        ci_full: None,
        cramers_v_chi2: None,
        cramers_v_g2: None,
        within_band: false,
    };
    let t = &out.table;
    let mut errors = Vec::new();
    let mut note = |e: Error| errors.push(e.to_string());

    let stats = multiclass_stats(t).map_err(&mut note).ok();
    if let Ok((c, g)) = full_table_tests(t).map_err(&mut note) {
        out.cramers_v_chi2 = Some(cramers_v(c.value, t.n(), t.k()));
        out.cramers_v_g2 = Some(cramers_v(g.value, t.n(), t.k()));
        out.full_chi2 = Some(c);
        out.full_g2 = Some(g);
    }
    if config.fisher_samples > 0 {
        let seed = Stream::new(seed_stream).derive(label("fisher")).id();
        out.fisher = fisher_report(t, config.fisher_samples, seed)
            .map_err(&mut note)
            .ok();
    }
    out.kb = chi2_bookmaker_family(t, BookmakerFamily::KB)
        .map_err(&mut note)
        .ok();
    out.km = chi2_bookmaker_family(t, BookmakerFamily::KM)
        .map_err(&mut note)
        .ok();
    out.kbm = chi2_bookmaker_family(t, BookmakerFamily::KBM)
        .map_err(&mut note)
        .ok();
    if let (Some(s), Ok(e)) = (&stats, evenness_factor(t).map_err(&mut note)) {
        let n = t.n();
        let ci = |b, v| confidence_interval(b, n, e, config.x, v).ok();
        out.ci_null = ci(s.informedness, Hypothesis::Null);
        out.ci_empirical = ci(level, Hypothesis::Empirical);
        out.ci_full = ci(s.informedness, Hypothesis::Full);
    }
    out.stats = stats;
    out.within_band = out.recompute_within_band();
    if !errors.is_empty() {
        out.error = Some(errors.join("; "));
    }
    out
}

/// All runs of one step, in run order.
pub fn run_step(config: &SimConfig, step: usize) -> Result<Vec<SimRun>> {
    config.validate()?;
    Ok((0..config.runs_per_step)
        .into_par_iter()
        .map(|r| run_one(config, step, r))
        .collect())
}

/// The whole grid in (step, run) order.
pub fn run_grid(config: &SimConfig) -> Result<Vec<SimRun>> {
    config.validate()?;
    let per = config.runs_per_step;
    Ok((0..config.steps * per)
        .into_par_iter()
        .map(|i| run_one(config, i / per, i % per))
        .collect())
}

#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct MeanSd {
    pub mean: f64,
    pub sd: f64,
    pub count: usize,
}

fn mean_sd(v: impl Iterator<Item = f64>) -> MeanSd {
    let xs: Vec<f64> = v.collect();
    let count = xs.len();
    if count == 0 {
        return MeanSd {
            mean: f64::NAN,
            sd: f64::NAN,
            count,
        };
    }
    let mean = xs.iter().sum::<f64>() / count as f64;
    let sd = if count > 1 {
        (xs.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (count - 1) as f64).sqrt()
    } else {
        0.0
    };
    MeanSd { mean, sd, count }
}

#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct RejectionRates {
    pub chi2: Option<f64>,
    pub g2: Option<f64>,
    pub fisher: Option<f64>,
    pub kb: Option<f64>,
    pub km: Option<f64>,
    pub kbm: Option<f64>,
}

fn rate<'a>(
    reports: impl Iterator<Item = &'a Option<SignificanceReport>>,
    alpha: f64,
) -> Option<f64> {
    let (mut hit, mut tot) = (0usize, 0usize);
    for r in reports.flatten() {
        tot += 1;
        hit += usize::from(r.significant(alpha));
    }
    (tot > 0).then(|| hit as f64 / tot as f64)
}

fn rejection(runs: &[&SimRun], alpha: f64) -> RejectionRates {
    RejectionRates {
        chi2: rate(runs.iter().map(|r| &r.full_chi2), alpha),
        g2: rate(runs.iter().map(|r| &r.full_g2), alpha),
        fisher: rate(runs.iter().map(|r| &r.fisher), alpha),
        kb: rate(runs.iter().map(|r| &r.kb), alpha),
        km: rate(runs.iter().map(|r| &r.km), alpha),
        kbm: rate(runs.iter().map(|r| &r.kbm), alpha),
    }
}

fn coverage(runs: &[&SimRun]) -> f64 {
    runs.iter().filter(|r| r.within_band).count() as f64 / runs.len() as f64
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StepSummary {
    pub step: usize,
    pub level: f64,
    pub runs: usize,
    pub coverage: f64,
    pub rejection: RejectionRates,
    pub informedness: MeanSd,
    pub markedness: MeanSd,
    pub correlation: MeanSd,
    pub kappa: MeanSd,
    pub cramers_v: MeanSd,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CoverageReport {
    pub steps: Vec<StepSummary>,
    pub runs: usize,
    pub coverage: f64,
    pub rejection: RejectionRates,
    /// Some run has a design expected cell count n/k² below 5.
    pub small_n_warning: bool,
}

pub fn coverage_report(runs: &[SimRun], alpha: f64) -> Result<CoverageReport> {
    if runs.is_empty() {
        return Err(Error::Usage(
            "coverage report needs at least one run".into(),
        ));
    }
    let mut steps: Vec<usize> = runs.iter().map(|r| r.step).collect();
    steps.dedup();
    steps.sort_unstable();
    steps.dedup();
    let summaries = steps
        .iter()
        .map(|&s| {
            let rs: Vec<&SimRun> = runs.iter().filter(|r| r.step == s).collect();
            let stat = |f: fn(&MulticlassStats) -> Option<f64>| {
                mean_sd(rs.iter().filter_map(|r| r.stats.as_ref().and_then(f)))
            };
            StepSummary {
                step: s,
                level: rs[0].level,
                runs: rs.len(),
                coverage: coverage(&rs),
                rejection: rejection(&rs, alpha),
                informedness: stat(|m| Some(m.informedness)),
                markedness: stat(|m| Some(m.markedness)),
                correlation: stat(|m| m.correlation),
                kappa: stat(|m| Some(m.kappa)),
                cramers_v: mean_sd(rs.iter().filter_map(|r| r.cramers_v_chi2)),
            }
        })
        .collect();
    let all: Vec<&SimRun> = runs.iter().collect();
    let small_n_warning = runs
        .iter()
        .any(|r| (r.table.n() as f64) / ((r.table.k() * r.table.k()) as f64) < 5.0);
    Ok(CoverageReport {
        steps: summaries,
        runs: runs.len(),
        coverage: coverage(&all),
        rejection: rejection(&all, alpha),
        small_n_warning,
    })
}

fn fmt_opt(v: Option<f64>) -> String {
    v.map(|x| x.to_string()).unwrap_or_default()
}

fn csv_err(e: csv::Error) -> Error {
    Error::Data(format!("cannot write CSV: {e}"))
}

pub const RUNS_HEADER: [&str; 17] = [
    "step",
    "run",
    "l",
    "n_realized",
    "B",
    "M",
    "BMG",
    "kappa",
    "cramers_v_chi2",
    "cramers_v_g2",
    "p_chi2",
    "p_g2",
    "p_fisher",
    "ci_lo",
    "ci_hi",
    "within_band",
    "seed_stream",
];

pub fn write_runs_csv<W: Write>(runs: &[SimRun], w: W) -> Result<()> {
    let mut out = csv::Writer::from_writer(w);
    out.write_record(RUNS_HEADER).map_err(csv_err)?;
    for r in runs {
        let s = r.stats.as_ref();
        let p = |x: &Option<SignificanceReport>| fmt_opt(x.as_ref().map(|r| r.p_value));
        out.write_record([
            r.step.to_string(),
            r.run.to_string(),
            r.level.to_string(),
            r.table.n().to_string(),
            fmt_opt(s.map(|s| s.informedness)),
            fmt_opt(s.map(|s| s.markedness)),
            fmt_opt(s.and_then(|s| s.correlation)),
            fmt_opt(s.map(|s| s.kappa)),
            fmt_opt(r.cramers_v_chi2),
            fmt_opt(r.cramers_v_g2),
            p(&r.full_chi2),
            p(&r.full_g2),
            p(&r.fisher),
            fmt_opt(r.ci_empirical.map(|c| c.lo())),
            fmt_opt(r.ci_empirical.map(|c| c.hi())),
            r.within_band.to_string(),
            r.seed_stream.to_string(),
        ])
        .map_err(csv_err)?;
    }
    out.flush()
        .map_err(|e| Error::Data(format!("cannot write CSV: {e}")))
}

pub const SUMMARY_HEADER: [&str; 21] = [
    "step",
    "l",
    "runs",
    "coverage",
    "reject_chi2",
    "reject_g2",
    "reject_fisher",
    "reject_kb",
    "reject_km",
    "reject_kbm",
    "mean_B",
    "sd_B",
    "mean_M",
    "sd_M",
    "mean_BMG",
    "sd_BMG",
    "mean_kappa",
    "sd_kappa",
    "mean_cramers_v",
    "sd_cramers_v",
    "small_n_warning",
];

pub fn write_summary_csv<W: Write>(report: &CoverageReport, w: W) -> Result<()> {
    let mut out = csv::Writer::from_writer(w);
    out.write_record(SUMMARY_HEADER).map_err(csv_err)?;
    for s in &report.steps {
        let ms = |m: &MeanSd| {
            if m.count == 0 {
                [String::new(), String::new()]
            } else {
                [m.mean.to_string(), m.sd.to_string()]
            }
        };
        let mut rec = vec![
            s.step.to_string(),
            s.level.to_string(),
            s.runs.to_string(),
            s.coverage.to_string(),
            fmt_opt(s.rejection.chi2),
            fmt_opt(s.rejection.g2),
            fmt_opt(s.rejection.fisher),
            fmt_opt(s.rejection.kb),
            fmt_opt(s.rejection.km),
            fmt_opt(s.rejection.kbm),
        ];
        for m in [
            &s.informedness,
            &s.markedness,
            &s.correlation,
            &s.kappa,
            &s.cramers_v,
        ] {
            rec.extend(ms(m));
        }
        rec.push(report.small_n_warning.to_string());
        out.write_record(&rec).map_err(csv_err)?;
    }
    out.flush()
        .map_err(|e| Error::Data(format!("cannot write CSV: {e}")))
}
