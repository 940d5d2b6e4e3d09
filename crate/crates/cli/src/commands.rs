use std::fs;
use std::io::Write;
use std::path::Path;

use bookmaker::confidence::{
    compare_systems, confidence_interval, confidence_interval_with_rule, normal_multiplier,
    SystemSummary, Tails, X_TWO_TAILED,
};
use bookmaker::contingency::{prepare, MarginPolicy};
use bookmaker::dichotomous::binary_stats;
use bookmaker::io::{parse_pairs, parse_table};
use bookmaker::montecarlo::{
    coverage_report, run_grid, write_runs_csv, write_summary_csv, SimConfig,
};
use bookmaker::multiclass::multiclass_stats;
use bookmaker::rng::Stream;
use bookmaker::significance::{
    chi2_bookmaker_family, chi2_positive, fisher_report, full_table_tests, g2_positive,
    posthoc_calibration, williams_correction, BookmakerFamily, SignificanceReport, Target,
    WilliamsMode,
};
use bookmaker::ContingencyTable;

use crate::args::{
    CompareArgs, ConfidenceArgs, EvaluateArgs, Family, Format, InputArgs, MultiplierArgs,
    OutputArgs, SignificanceArgs, SimulateArgs,
};
use crate::render;
use crate::report::{
    ConfidenceEntry, InformationUnit, InputDescriptor, InputFormat, Metrics, ReportDocument,
    SignificanceEntry,
};
use crate::CliError;

fn read(path: &Path) -> Result<String, CliError> {
    fs::read_to_string(path)
        .map_err(|e| CliError::data(format!("cannot read {}: {e}", path.display())))
}

/// Reorders a labelled table, or names an unlabelled one.
fn apply_labels(t: ContingencyTable, labels: &[String]) -> Result<ContingencyTable, CliError> {
    let k = t.k();
    if labels.len() != k {
        return Err(CliError::usage(format!(
            "--labels lists {} labels for a {k}x{k} table",
            labels.len()
        )));
    }
    let pos: Option<Vec<usize>> = labels
        .iter()
        .map(|l| t.labels().iter().position(|x| x == l))
        .collect();
    if let Some(perm) = pos {
        let rows = perm
            .iter()
            .map(|&i| perm.iter().map(|&j| t.get(i, j)).collect())
            .collect();
        return Ok(ContingencyTable::new(rows, Some(labels.to_vec()))?);
    }
    let default: Vec<String> = (0..k).map(|i| i.to_string()).collect();
    if t.labels() == default.as_slice() {
        return Ok(t.with_labels(labels.to_vec())?);
    }
    Err(CliError::usage(format!(
        "--labels {labels:?} do not match the table labels {:?}",
        t.labels()
    )))
}

fn load_table(
    name: &str,
    path: &Path,
    format: InputFormat,
    labels: Option<&[String]>,
    repair: bool,
) -> Result<(ContingencyTable, InputDescriptor), CliError> {
    let text = read(path)?;
    let t = match format {
        InputFormat::Pairs => {
            let pairs = parse_pairs(&text)?;
            match labels {
                Some(l) => ContingencyTable::from_pairs_with_labels(pairs, l.to_vec())?,
                None => ContingencyTable::from_pairs(pairs)?,
            }
        }
        _ => {
            let t = parse_table(&text)?;
            match labels {
                Some(l) => apply_labels(t, l)?,
                None => t,
            }
        }
    };
    let policy = if repair {
        MarginPolicy::Repair
    } else {
        MarginPolicy::Reject
    };
    let repaired = repair && t.has_zero_margin();
    let t = prepare(&t, policy)?.into_owned();
    let desc = InputDescriptor {
        name: name.to_string(),
        file: Some(path.display().to_string()),
        format,
        labels: t.labels().to_vec(),
        n: t.n(),
        counts: Some(t.rows()),
        margins_repaired: repaired,
    };
    Ok((t, desc))
}

fn load_input(input: &InputArgs) -> Result<(ContingencyTable, InputDescriptor), CliError> {
    let labels = input.labels.as_deref();
    match (&input.pairs, &input.table) {
        (Some(p), None) => load_table(
            "system",
            p,
            InputFormat::Pairs,
            labels,
            input.repair_margins,
        ),
        (None, Some(t)) => load_table(
            "system",
            t,
            InputFormat::Table,
            labels,
            input.repair_margins,
        ),
        _ => Err(CliError::usage("give exactly one of --pairs or --table")),
    }
}

fn emit(doc: &ReportDocument, output: &OutputArgs, out: &mut dyn Write) -> Result<(), CliError> {
    let body = match output.format {
        Format::Json => {
            let mut s = serde_json::to_string_pretty(doc)
                .map_err(|e| CliError::numeric(format!("cannot encode report: {e}")))?;
            s.push('\n');
            s
        }
        Format::Csv => render::csv(doc),
        Format::Text => render::text(doc, output.percent),
    };
    out.write_all(body.as_bytes()).map_err(CliError::write)
}

fn fresh_seed() -> u64 {
    let nanos = std::time::SystemTime::now()
        .duration_since(std::time::UNIX_EPOCH)
        .map(|d| d.as_nanos() as u64)
        .unwrap_or(0);
    Stream::new(nanos ^ (u64::from(std::process::id()) << 32)).next_u64()
}

pub fn evaluate(args: &EvaluateArgs, out: &mut dyn Write) -> Result<(), CliError> {
    let (t, desc) = load_input(&args.input)?;
    let mut multiclass = multiclass_stats(&t)?;
    let unit = if args.bits {
        let ln2 = std::f64::consts::LN_2;
        multiclass.mutual_information /= ln2;
        multiclass.conditional_entropy /= ln2;
        InformationUnit::Bits
    } else {
        InformationUnit::Nats
    };
    let binary = if t.k() == 2 {
        Some(binary_stats(&t)?)
    } else {
        None
    };
    let mut doc = ReportDocument::new("evaluate", vec![desc]);
    doc.metrics = Some(Metrics {
        information_unit: unit,
        binary,
        multiclass,
    });
    emit(&doc, &args.output, out)
}

fn entry(report: SignificanceReport, alpha: f64) -> SignificanceEntry {
    SignificanceEntry {
        p_value_alt: report.p_value_alt(),
        alpha,
        significant: report.significant(alpha),
        calibration: posthoc_calibration(report.p_value).ok(),
        report,
    }
}

pub fn significance(args: &SignificanceArgs, out: &mut dyn Write) -> Result<(), CliError> {
    if !(args.alpha > 0.0 && args.alpha < 1.0) {
        return Err(CliError::usage(format!(
            "--alpha must lie in (0, 1), got {}",
            args.alpha
        )));
    }
    let (t, desc) = load_input(&args.input)?;
    let mut doc = ReportDocument::new("significance", vec![desc]);
    let all = args.family == Family::All;
    let mut reports: Vec<SignificanceReport> = Vec::new();
    let mut notes = Vec::new();

    // Under `all` an undefined statistic is skipped with a note; asked for alone it is an error.
    let mut skipped = Vec::new();
    let mut keep = |r: bookmaker::Result<SignificanceReport>,
                    reports: &mut Vec<SignificanceReport>| match r {
        Ok(r) => {
            reports.push(r);
            Ok(())
        }
        Err(e) if all => {
            skipped.push(format!("skipped: {e}"));
            Ok(())
        }
        Err(e) => Err(CliError::from(e)),
    };

    let williams = |r: SignificanceReport, mode| {
        if args.williams && r.kind.is_g2() {
            williams_correction(&r, &t, mode)
        } else {
            Ok(r)
        }
    };

    let mut used_plus = false;
    if all && t.k() == 2 {
        used_plus = true;
        for target in [Target::PredictedPositive, Target::RealPositive] {
            keep(chi2_positive(&t, target, args.yates), &mut reports)?;
        }
        for target in [Target::PredictedPositive, Target::RealPositive] {
            keep(
                g2_positive(&t, target).and_then(|r| williams(r, WilliamsMode::GoodnessOfFit)),
                &mut reports,
            )?;
        }
    }
    let families: &[BookmakerFamily] = match args.family {
        Family::All => &BookmakerFamily::ALL,
        Family::Kb => &[BookmakerFamily::KB],
        Family::Km => &[BookmakerFamily::KM],
        Family::Kbm => &[BookmakerFamily::KBM],
        Family::X => &[
            BookmakerFamily::XB,
            BookmakerFamily::XM,
            BookmakerFamily::XBM,
        ],
        Family::Conv => &[
            BookmakerFamily::ConvB,
            BookmakerFamily::ConvM,
            BookmakerFamily::ConvBM,
        ],
        Family::Full | Family::Fisher => &[],
    };
    for &f in families {
        keep(chi2_bookmaker_family(&t, f), &mut reports)?;
    }
    if matches!(args.family, Family::All | Family::Full) {
        match full_table_tests(&t) {
            Ok((c, g)) => {
                reports.push(c);
                keep(williams(g, WilliamsMode::Independence), &mut reports)?;
            }
            Err(e) => keep(Err(e), &mut reports)?,
        }
    }
    if matches!(args.family, Family::All | Family::Fisher) {
        let seed = if t.k() > 2 {
            let s = args.seed.unwrap_or_else(fresh_seed);
            notes.push(format!(
                "Fisher p-value estimated from {} fixed-margin samples",
                args.fisher_samples
            ));
            Some(s)
        } else {
            args.seed
        };
        doc.seed = seed;
        keep(
            fisher_report(&t, args.fisher_samples, seed.unwrap_or(0)),
            &mut reports,
        )?;
    }
    if args.yates && !used_plus {
        notes.push("the Yates correction applies only to the 2x2 positive-class tests".into());
    }
    if args.williams && !reports.iter().any(|r| r.kind.is_g2()) {
        notes.push("the Williams correction applies only to G² statistics".into());
    }
    doc.significance = reports.into_iter().map(|r| entry(r, args.alpha)).collect();
    skipped.extend(notes);
    doc.notes = skipped;
    emit(&doc, &args.output, out)
}

fn multiplier(m: &MultiplierArgs) -> Result<f64, CliError> {
    match (m.x, m.alpha) {
        (Some(x), _) => {
            if x > 0.0 && x.is_finite() {
                Ok(x)
            } else {
                Err(CliError::usage(format!("--x must be positive, got {x}")))
            }
        }
        (None, Some(a)) => {
            let tails = if m.one_tailed { Tails::One } else { Tails::Two };
            Ok(normal_multiplier(a, tails)?)
        }
        (None, None) => Ok(X_TWO_TAILED),
    }
}

pub fn confidence(args: &ConfidenceArgs, out: &mut dyn Write) -> Result<(), CliError> {
    let x = multiplier(&args.multiplier)?;
    let (summary, desc) = match args.b {
        Some(b) => {
            let n = args.n.ok_or_else(|| CliError::usage("--b needs --n"))?;
            let desc = InputDescriptor {
                name: "system".into(),
                file: None,
                format: InputFormat::Values,
                labels: Vec::new(),
                n,
                counts: None,
                margins_repaired: false,
            };
            (SystemSummary { b, n, e: args.e }, desc)
        }
        None => {
            let (t, desc) = load_input(&args.input)?;
            (SystemSummary::from_table(&t)?, desc)
        }
    };
    let mut doc = ReportDocument::new("confidence", vec![desc]);
    for v in args.variant.hypotheses() {
        let ci = match args.rule {
            Some(r) => {
                confidence_interval_with_rule(summary.b, summary.n, summary.e, x, v, r.into())?
            }
            None => confidence_interval(summary.b, summary.n, summary.e, x, v)?,
        };
        doc.confidence
            .push(ConfidenceEntry::new("system", summary.b, ci));
    }
    emit(&doc, &args.output, out)
}

fn parse_triple(name: &str, s: &str) -> Result<SystemSummary, CliError> {
    let parts: Vec<&str> = s.split(',').map(str::trim).collect();
    let bad = || CliError::usage(format!("--{name} expects B,N,E, got `{s}`"));
    if parts.len() != 3 {
        return Err(bad());
    }
    Ok(SystemSummary {
        b: parts[0].parse().map_err(|_| bad())?,
        n: parts[1].parse().map_err(|_| bad())?,
        e: parts[2].parse().map_err(|_| bad())?,
    })
}

fn system(
    name: &str,
    table: Option<&Path>,
    triple: Option<&str>,
    repair: bool,
) -> Result<(SystemSummary, InputDescriptor), CliError> {
    match (table, triple) {
        (Some(p), None) => {
            let (t, desc) = load_table(name, p, InputFormat::Table, None, repair)?;
            Ok((SystemSummary::from_table(&t)?, desc))
        }
        (None, Some(s)) => {
            let sys = parse_triple(name, s)?;
            let desc = InputDescriptor {
                name: name.to_string(),
                file: None,
                format: InputFormat::Values,
                labels: Vec::new(),
                n: sys.n,
                counts: None,
                margins_repaired: false,
            };
            Ok((sys, desc))
        }
        _ => Err(CliError::usage(format!(
            "give exactly one of --{name}-table or --{name}"
        ))),
    }
}

pub fn compare(args: &CompareArgs, out: &mut dyn Write) -> Result<(), CliError> {
    let x = multiplier(&args.multiplier)?;
    let (a, da) = system(
        "a",
        args.a_table.as_deref(),
        args.a.as_deref(),
        args.repair_margins,
    )?;
    let (b, db) = system(
        "b",
        args.b_table.as_deref(),
        args.b.as_deref(),
        args.repair_margins,
    )?;
    let cmp = compare_systems(a, b, x)?;
    let mut doc = ReportDocument::new("compare", vec![da, db]);
    doc.confidence = vec![
        ConfidenceEntry::new("a", a.b, cmp.a),
        ConfidenceEntry::new("b", b.b, cmp.b),
    ];
    doc.comparison = Some(cmp);
    emit(&doc, &args.output, out)
}

pub fn simulate(args: &SimulateArgs, out: &mut dyn Write) -> Result<(), CliError> {
    let seed = args.seed.unwrap_or_else(fresh_seed);
    let cfg = SimConfig {
        k: args.k,
        n: args.n,
        steps: args.steps,
        runs_per_step: args.runs,
        margin_distribution: args.margin_dist.into(),
        cell_distribution: args.dist.into(),
        enforce_integer: !args.no_integer,
        seed,
        x: args.x,
        alpha: args.alpha,
        fisher_samples: args.fisher_samples,
    };
    cfg.validate()?;
    let unwritable =
        |e: std::io::Error| CliError::data(format!("cannot write to {}: {e}", args.out.display()));
    fs::create_dir_all(&args.out).map_err(unwritable)?;
    let runs_path = args.out.join("runs.csv");
    let summary_path = args.out.join("summary.csv");
    let runs_file = fs::File::create(&runs_path).map_err(unwritable)?;
    let summary_file = fs::File::create(&summary_path).map_err(unwritable)?;

    let runs = run_grid(&cfg)?;
    let report = coverage_report(&runs, cfg.alpha)?;
    write_runs_csv(&runs, std::io::BufWriter::new(runs_file))?;
    write_summary_csv(&report, std::io::BufWriter::new(summary_file))?;

    let rate = |r: Option<f64>| r.map_or("n/a".to_string(), |x| format!("{x:.4}"));
    let mut s = format!("seed: {seed}\n");
    s.push_str(&format!(
        "grid: k = {}, n = {}, {} steps x {} runs = {} runs\n",
        cfg.k, cfg.n, cfg.steps, cfg.runs_per_step, report.runs
    ));
    s.push_str(&format!("runs: {}\n", runs_path.display()));
    s.push_str(&format!("summary: {}\n", summary_path.display()));
    s.push_str(&format!("coverage: {:.4}\n", report.coverage));
    s.push_str(&format!(
        "rejection at alpha {}: chi2 {}, g2 {}, fisher {}, KB {}\n",
        cfg.alpha,
        rate(report.rejection.chi2),
        rate(report.rejection.g2),
        rate(report.rejection.fisher),
        rate(report.rejection.kb)
    ));
    let failed = runs.iter().filter(|r| r.error.is_some()).count();
    if failed > 0 {
        s.push_str(&format!(
            "note: {failed} runs had undefined statistics (left blank in runs.csv)\n"
        ));
    }
    if report.small_n_warning {
        s.push_str(&format!(
            "warning: small N, expected cell count n/k^2 = {:.2} is below 5; chi-squared approximations are unreliable\n",
            cfg.n as f64 / (cfg.k * cfg.k) as f64
        ));
    }
    out.write_all(s.as_bytes()).map_err(CliError::write)
}
