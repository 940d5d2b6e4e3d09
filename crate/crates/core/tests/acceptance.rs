//! Acceptance criteria, one PASS/FAIL line each.
//!
//! Runs without the libtest harness so every line is printed; the process
//! exits non-zero if any criterion fails.

use bookmaker::contingency::{transform, ContingencyTable, Transform};
use bookmaker::dichotomous::{auc_single_point, binary_stats, regression_coefficients};
use bookmaker::montecarlo::{
    coverage_report, run_grid, run_step, write_runs_csv, write_summary_csv, SimConfig, SimRun,
};
use bookmaker::multiclass::{
    bookmaker_informedness, correlation_bmg, det_estimates, evenness_variants, macro_averages,
    multiclass_kappa, multiclass_markedness, ExponentRule,
};
use bookmaker::rng::Stream;
use bookmaker::significance::{
    chi2_bookmaker_family, chi2_positive, fisher_exact_2x2, BookmakerFamily, Sidedness, Target,
};
use bookmaker::special::chi2_sf;
use num_bigint::BigUint;
use num_traits::{One, ToPrimitive, Zero};

struct Outcome {
    ok: bool,
    detail: String,
}

fn pass_if(ok: bool, detail: impl Into<String>) -> Outcome {
    Outcome {
        ok,
        detail: detail.into(),
    }
}

fn t2(a: u64, b: u64, c: u64, d: u64) -> ContingencyTable {
    ContingencyTable::new(vec![vec![a, b], vec![c, d]], None).unwrap()
}

fn random_2x2(rng: &mut Stream, max: u64) -> ContingencyTable {
    loop {
        let c: Vec<u64> = (0..4).map(|_| rng.below(max + 1)).collect();
        let t = t2(c[0], c[1], c[2], c[3]);
        if !t.has_zero_margin() {
            return t;
        }
    }
}

// 1 ------------------------------------------------------------------------

fn reference_golden() -> Outcome {
    struct Row {
        cells: [u64; 4],
        expect: [f64; 13],
        plus_r: f64,
    }
    // B, M, C, recall, precision, F, G, accuracy, kappa, chi2+P, KB, KM, KBM
    let rows = [
        Row {
            cells: [56, 20, 12, 12],
            expect: [
                0.1985, 0.2368, 0.2168, 0.8235, 0.7368, 0.7778, 0.7790, 0.68, 0.2126, 1.13, 1.72,
                2.05, 1.87,
            ],
            plus_r: 1.504643962848296,
        },
        Row {
            cells: [30, 12, 30, 28],
            expect: [
                0.2000, 0.1970, 0.1985, 0.5000, 0.7143, 0.5882, 0.5976, 0.58, 0.1860, 2.29, 1.92,
                1.89, 1.91,
            ],
            plus_r: 1.576354679802957,
        },
    ];
    let mut worst = Vec::new();
    let mut ok = true;
    for r in &rows {
        let [a, b, c, d] = r.cells;
        let t = t2(a, b, c, d);
        let s = binary_stats(&t).unwrap();
        let fam = |f| chi2_bookmaker_family(&t, f).unwrap().value;
        let got = [
            s.informedness,
            s.markedness,
            s.correlation,
            s.recall,
            s.precision,
            s.f1,
            s.g_measure,
            s.rand_accuracy,
            s.kappa,
            chi2_positive(&t, Target::PredictedPositive, false)
                .unwrap()
                .value,
            fam(BookmakerFamily::KB),
            fam(BookmakerFamily::KM),
            fam(BookmakerFamily::KBM),
        ];
        let mut max_rate: f64 = 0.0;
        let mut max_chi: f64 = 0.0;
        for (i, (g, e)) in got.iter().zip(&r.expect).enumerate() {
            let err = (g - e).abs();
            if i < 9 {
                max_rate = max_rate.max(err);
                ok &= err <= 0.005;
            } else {
                max_chi = max_chi.max(err);
                ok &= err <= 0.01;
            }
        }
        let pr = chi2_positive(&t, Target::RealPositive, false)
            .unwrap()
            .value;
        ok &= (pr - r.plus_r).abs() < 1e-9;
        worst.push(format!(
            "{:?}: max|err| rates {max_rate:.5}, chi2 {max_chi:.4}, chi2+R {pr:.4}",
            r.cells
        ));
    }
    pass_if(ok, worst.join("; "))
}

// 2 ------------------------------------------------------------------------

fn identity_suite() -> Outcome {
    let mut rng = Stream::new(20240601);
    let tol = 1e-10;
    let mut fails: Vec<String> = Vec::new();
    let mut check = |name: &str, v: f64, t: &ContingencyTable| {
        if (v.abs() > tol || v.is_nan()) && fails.len() < 5 {
            fails.push(format!("{name} off by {v:e} on {:?}", t.rows()));
        }
    };
    for _ in 0..10_000 {
        let t = random_2x2(&mut rng, 300);
        let s = binary_stats(&t).unwrap();
        check("B = tpr - fpr", s.informedness - (s.recall - s.fallout), &t);
        check("B = deltap/rh", s.informedness - s.deltap / s.rh, &t);
        check("M = deltap/ph", s.markedness - s.deltap / s.ph, &t);
        check(
            "C^2 = BM",
            s.correlation * s.correlation - s.informedness * s.markedness,
            &t,
        );
        let sign_ok = s.correlation.signum() == s.dtp.signum() || s.dtp == 0.0;
        check("sign C = sign dtp", f64::from(u8::from(!sign_ok)), &t);
        check(
            "C = dtp/(PrevG BiasG)",
            s.correlation - s.dtp / (s.prev_g * s.bias_g),
            &t,
        );
        check("Jaccard = F1/(2-F1)", s.jaccard - s.f1 / (2.0 - s.f1), &t);
        check(
            "accuracy identity",
            s.rand_accuracy - (2.0 * s.recall * s.rp + 1.0 - s.pp - s.rp),
            &t,
        );
        check(
            "precision = recall prev/bias",
            s.precision - s.recall * s.rp / s.pp,
            &t,
        );
        check(
            "F1 = 2 recall prev/(bias+prev)",
            s.f1 - 2.0 * s.recall * s.rp / (s.pp + s.rp),
            &t,
        );
        check(
            "recall = B(1-prev)+bias",
            s.recall - (s.informedness * (1.0 - s.rp) + s.pp),
            &t,
        );
        check(
            "precision = M(1-bias)+prev",
            s.precision - (s.markedness * (1.0 - s.pp) + s.rp),
            &t,
        );
        let cohen =
            (s.rand_accuracy - (s.rp * s.pp + s.rn * s.pn)) / (1.0 - (s.rp * s.pp + s.rn * s.pn));
        check("kappa Cohen", s.kappa - cohen, &t);
        check(
            "kappa dual form",
            s.kappa - s.dtp / (s.dtp + (s.fp + s.fn_) / 2.0),
            &t,
        );
        check(
            "AUC = (B+1)/2",
            auc_single_point(&s) - (s.informedness + 1.0) / 2.0,
            &t,
        );
        check(
            "AUC = (tpr-fpr+1)/2",
            auc_single_point(&s) - (s.recall - s.fallout + 1.0) / 2.0,
            &t,
        );
        check(
            "fallout = 1 - tnr",
            s.fallout - (1.0 - s.inverse_recall),
            &t,
        );
        check("miss = 1 - recall", s.miss_rate - (1.0 - s.recall), &t);
        check(
            "evenness_r = prevG^2",
            s.evenness_r - s.prev_g * s.prev_g,
            &t,
        );
        if let Some(lr) = s.lr {
            check(
                "B = (LR-1)fpr",
                s.informedness - (lr - 1.0) * (1.0 - s.inverse_recall),
                &t,
            );
        }
        let r = regression_coefficients(&t).unwrap();
        check("r_P = M", r.r_p - s.markedness, &t);
        check("r_R = B", r.r_r - s.informedness, &t);
        check("r_G = C", r.r_g - s.correlation, &t);

        let inv = binary_stats(&transform(&t, &Transform::Inverse).unwrap()).unwrap();
        check("inverse B", inv.informedness - s.informedness, &t);
        check("inverse M", inv.markedness - s.markedness, &t);
        check("inverse C", inv.correlation - s.correlation, &t);
        check("inverse kappa", inv.kappa - s.kappa, &t);
        let dual = binary_stats(&transform(&t, &Transform::Dual).unwrap()).unwrap();
        check("dual B = M", dual.informedness - s.markedness, &t);
        check("dual M = B", dual.markedness - s.informedness, &t);
        let pv = binary_stats(&transform(&t, &Transform::PerverseRows).unwrap()).unwrap();
        check("perverse B", pv.informedness + s.informedness, &t);
        check("perverse M", pv.markedness + s.markedness, &t);
        check("perverse C", pv.correlation + s.correlation, &t);

        let m = rng.below(6) + 2;
        let scaled = binary_stats(&t.scaled(m)).unwrap();
        let same = serde_json_like(&scaled) == serde_json_like(&s);
        check("count scaling", f64::from(u8::from(!same)), &t);
    }
    let ok = fails.is_empty();
    pass_if(
        ok,
        if ok {
            "10^4 random tables, 34 identities each, tol 1e-10".to_string()
        } else {
            fails.join("; ")
        },
    )
}

/// Field-by-field comparison key that tolerates 1e-10 (scaling changes no field beyond rounding).
fn serde_json_like(s: &bookmaker::dichotomous::BinaryStats) -> Vec<i64> {
    [
        s.recall,
        s.inverse_recall,
        s.precision,
        s.inverse_precision,
        s.f1,
        s.g_measure,
        s.jaccard,
        s.rand_accuracy,
        s.informedness,
        s.markedness,
        s.correlation,
        s.kappa,
        s.wracc,
        s.auc,
        s.dtp,
        s.evenness_g,
        s.lr.unwrap_or(-1.0),
        s.nlr.unwrap_or(-1.0),
    ]
    .iter()
    .map(|v| (v * 1e10).round() as i64)
    .collect()
}

// 3 ------------------------------------------------------------------------

fn multiclass_reduction() -> Outcome {
    let mut rng = Stream::new(77);
    let tol = 1e-12;
    let mut worst: f64 = 0.0;
    let mut what = String::new();
    for _ in 0..1000 {
        let t = random_2x2(&mut rng, 200);
        let s = binary_stats(&t).unwrap();
        let ev = evenness_variants(&t).unwrap();
        let mut pairs = vec![
            ("B", bookmaker_informedness(&t).unwrap(), s.informedness),
            ("M", multiclass_markedness(&t).unwrap(), s.markedness),
            ("kappa", multiclass_kappa(&t).unwrap(), s.kappa),
            (
                "wav = accuracy",
                macro_averages(&t).unwrap().wav,
                s.rand_accuracy,
            ),
            ("Ev_R-", ev.r_minus, s.evenness_r),
            ("Ev_P-", ev.p_minus, s.evenness_p),
            ("Ev_G-", ev.g_minus, s.evenness_g),
            ("Ev_R+", ev.r_plus, s.evenness_r),
            ("Ev_R#", ev.r_hash, s.evenness_r),
            (
                "KB",
                chi2_bookmaker_family(&t, BookmakerFamily::KB)
                    .unwrap()
                    .value
                    / t.n() as f64,
                2.0 * s.informedness * s.informedness * s.evenness_r,
            ),
        ];
        if let Ok(c) = correlation_bmg(&t) {
            pairs.push(("BMG", c, s.correlation));
        } else {
            pairs.push(("BMG undefined", 1.0, 0.0));
        }
        for rule in [ExponentRule::TwoOverK, ExponentRule::Inverse3kMinus2] {
            let d = det_estimates(&t, rule).unwrap();
            pairs.push(("det B", d.informedness, s.informedness));
            pairs.push(("det M", d.markedness, s.markedness));
            pairs.push(("det BMG", d.correlation, s.correlation));
        }
        for (name, a, b) in pairs {
            let e = (a - b).abs();
            if e > worst {
                worst = e;
                what = format!("{name} on {:?}", t.rows());
            }
        }
    }
    pass_if(
        worst <= tol,
        format!("max |multiclass - dichotomous| = {worst:e} ({what})"),
    )
}

// 4 ------------------------------------------------------------------------

fn factorials(n: usize) -> Vec<BigUint> {
    let mut f = vec![BigUint::one()];
    for i in 1..=n {
        let next = &f[i - 1] * BigUint::from(i);
        f.push(next);
    }
    f
}

fn ratio_to_f64(num: &BigUint, den: &BigUint) -> f64 {
    let g = gcd(num.clone(), den.clone());
    let (n, d) = (num / &g, den / &g);
    let limit = BigUint::from(1u64 << 53);
    assert!(
        n < limit && d < limit,
        "oracle fraction does not fit exactly in f64"
    );
    n.to_f64().unwrap() / d.to_f64().unwrap()
}

fn gcd(mut a: BigUint, mut b: BigUint) -> BigUint {
    while !b.is_zero() {
        let r = &a % &b;
        a = b;
        b = r;
    }
    a
}

fn fisher_oracle() -> Outcome {
    let f = factorials(40);
    let mut checked = 0usize;
    let mut mismatches = Vec::new();
    for n in 1..=40usize {
        let stride = if n <= 16 { 1 } else { 3 };
        let mut grid: Vec<usize> = (0..=n).step_by(stride).collect();
        if *grid.last().unwrap() != n {
            grid.push(n);
        }
        for &r1 in &grid {
            for &c1 in &grid {
                let lo = (r1 + c1).saturating_sub(n);
                let hi = r1.min(c1);
                // probability numerators over the common denominator N! (as multinomial weights)
                let w: Vec<BigUint> = (lo..=hi)
                    .map(|a| {
                        let (b, c) = (r1 - a, c1 - a);
                        let d = n + a - r1 - c1;
                        &f[r1] * &f[n - r1] * &f[c1] * &f[n - c1] / (&f[a] * &f[b] * &f[c] * &f[d])
                    })
                    .collect();
                let total: BigUint = w.iter().sum();
                for a in lo..=hi {
                    let (b, c) = (r1 - a, c1 - a);
                    let d = n + a - r1 - c1;
                    let t = t2(a as u64, b as u64, c as u64, d as u64);
                    let obs = &w[a - lo];
                    let two: BigUint = w.iter().filter(|x| *x <= obs).sum();
                    let upper = a * d >= b * c;
                    let one: BigUint = (lo..=hi)
                        .filter(|&x| if upper { x >= a } else { x <= a })
                        .map(|x| w[x - lo].clone())
                        .sum();
                    let e2 = ratio_to_f64(&two, &total);
                    let e1 = ratio_to_f64(&one, &total);
                    let g2 = fisher_exact_2x2(&t, Sidedness::Two).unwrap();
                    let g1 = fisher_exact_2x2(&t, Sidedness::One).unwrap();
                    checked += 1;
                    if (g2 != e2 || g1 != e1) && mismatches.len() < 5 {
                        mismatches.push(format!(
                            "{:?}: two {g2} vs {e2}, one {g1} vs {e1}",
                            t.rows()
                        ));
                    }
                }
            }
        }
    }
    pass_if(
        mismatches.is_empty(),
        if mismatches.is_empty() {
            format!("{checked} tables with N <= 40, bit-exact one- and two-sided")
        } else {
            mismatches.join("; ")
        },
    )
}

// 5 ------------------------------------------------------------------------

/// Γ(r/2) from factorials, independent of the library's Lanczos code.
fn gamma_half(r: u32) -> f64 {
    let fact = |m: u32| (1..=m).map(f64::from).product::<f64>();
    if r.is_multiple_of(2) {
        fact(r / 2 - 1)
    } else {
        let m = (r - 1) / 2;
        fact(2 * m) * std::f64::consts::PI.sqrt() / (4f64.powi(m as i32) * fact(m))
    }
}

fn gauss_legendre_20() -> ([f64; 20], [f64; 20]) {
    // nodes by Newton iteration on P_20
    let n = 20;
    let mut x = [0.0; 20];
    let mut w = [0.0; 20];
    for i in 0..n {
        let mut z = (std::f64::consts::PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
        let mut dp = 0.0;
        for _ in 0..100 {
            let (mut p0, mut p1) = (1.0, z);
            for k in 2..=n {
                let p2 = ((2 * k - 1) as f64 * z * p1 - (k - 1) as f64 * p0) / k as f64;
                p0 = p1;
                p1 = p2;
            }
            dp = n as f64 * (z * p1 - p0) / (z * z - 1.0);
            let dz = p1 / dp;
            z -= dz;
            if dz.abs() < 1e-16 {
                break;
            }
        }
        x[i] = z;
        w[i] = 2.0 / ((1.0 - z * z) * dp * dp);
    }
    (x, w)
}

fn quad_sf(x: f64, r: u32) -> f64 {
    let (nodes, weights) = gauss_legendre_20();
    let g = gamma_half(r);
    let h = f64::from(r) / 2.0;
    let pdf = |t: f64| t.powf(h - 1.0) * (-t / 2.0).exp() / (2f64.powf(h) * g);
    let mut sum = 0.0;
    let mut a = x;
    loop {
        let width = a.clamp(0.05, 1.0);
        let b = a + width;
        let (m, hw) = ((a + b) / 2.0, width / 2.0);
        let part: f64 = nodes
            .iter()
            .zip(&weights)
            .map(|(u, w)| w * pdf(m + hw * u))
            .sum::<f64>()
            * hw;
        sum += part;
        a = b;
        if a > x + 20.0 && part < sum * 1e-18 {
            break;
        }
    }
    sum
}

fn chi2_sf_oracle() -> Outcome {
    let xs = [
        0.05, 0.1, 0.5, 1.0, 2.0, 3.841, 5.0, 7.5, 10.0, 15.0, 20.0, 30.0, 40.0,
    ];
    let mut worst: f64 = 0.0;
    let mut at = (0.0, 0);
    for r in 1..=10u32 {
        for &x in &xs {
            let got = chi2_sf(x, r);
            let want = quad_sf(x, r);
            let rel = ((got - want) / want).abs();
            if rel > worst {
                worst = rel;
                at = (x, r);
            }
        }
    }
    let p = chi2_sf(3.841, 1);
    pass_if(
        worst < 1e-8 && (p - 0.05).abs() <= 5e-4,
        format!(
            "max rel err {worst:.2e} at (x={}, r={}); chi2_sf(3.841, 1) = {p:.5}",
            at.0, at.1
        ),
    )
}

// 6 ------------------------------------------------------------------------

fn null_calibration() -> Outcome {
    let cfg = SimConfig {
        k: 2,
        n: 128,
        runs_per_step: 1000,
        fisher_samples: 0,
        seed: 42,
        ..SimConfig::default()
    };
    let runs = run_step(&cfg, 0).unwrap();
    let bs: Vec<f64> = runs
        .iter()
        .filter_map(|r| r.stats.as_ref())
        .map(|s| s.informedness)
        .collect();
    let mean = bs.iter().sum::<f64>() / bs.len() as f64;
    let kb: Vec<bool> = runs
        .iter()
        .filter_map(|r| r.kb.as_ref())
        .map(|r| r.significant(0.05))
        .collect();
    let rej = kb.iter().filter(|&&x| x).count() as f64 / kb.len() as f64;
    let ok_mean = mean.abs() < 0.03;
    let ok_rej = (0.01..=0.10).contains(&rej);
    pass_if(
        ok_mean && ok_rej,
        format!(
            "mean B-hat {mean:+.4} ({}), KB rejection at 0.05 = {rej:.4} ({}, required [0.01, 0.10])",
            if ok_mean { "ok" } else { "FAIL" },
            if ok_rej { "ok" } else { "FAIL" }
        ),
    )
}

// 7 ------------------------------------------------------------------------

fn grid(k: usize, n: u64, fisher_samples: u64) -> Vec<SimRun> {
    let cfg = SimConfig {
        k,
        n,
        x: 1.96,
        fisher_samples,
        seed: 42,
        ..SimConfig::default()
    };
    run_grid(&cfg).unwrap()
}

fn coverage() -> Outcome {
    let mut parts = Vec::new();
    let mut ok = true;
    let mut pooled = (0usize, 0usize);
    for k in [2usize, 4] {
        let runs = grid(k, 128, 0);
        let rep = coverage_report(&runs, 0.05).unwrap();
        ok &= rep.coverage >= 0.90;
        pooled.0 += runs.iter().filter(|r| r.within_band).count();
        pooled.1 += runs.len();
        parts.push(format!("k={k}: {:.3}", rep.coverage));
    }
    parts.push(format!("pooled {:.3}", pooled.0 as f64 / pooled.1 as f64));
    pass_if(ok, format!("{} (required >= 0.90 per k)", parts.join(", ")))
}

// 8 ------------------------------------------------------------------------

fn significance_ordering() -> Outcome {
    let runs = grid(4, 16, 2000);
    let rep = coverage_report(&runs, 0.05).unwrap();
    let r = rep.rejection;
    let (f, g, c) = (r.fisher.unwrap(), r.g2.unwrap(), r.chi2.unwrap());
    pass_if(
        f >= g && g >= c,
        format!("fraction significant: Fisher {f:.3}, G2 {g:.3}, chi2 {c:.3} (required Fisher >= G2 >= chi2)"),
    )
}

// 9 ------------------------------------------------------------------------

fn cramers_v_bias() -> Outcome {
    let runs = grid(4, 128, 0);
    let high: Vec<&SimRun> = runs.iter().filter(|r| r.level >= 0.8 - 1e-12).collect();
    let v: Vec<f64> = high.iter().filter_map(|r| r.cramers_v_chi2).collect();
    let b: Vec<f64> = high
        .iter()
        .filter_map(|r| r.stats.as_ref())
        .map(|s| s.informedness)
        .collect();
    let mv = v.iter().sum::<f64>() / v.len() as f64;
    let mb = b.iter().sum::<f64>() / b.len() as f64;
    pass_if(
        mv < mb,
        format!(
            "l >= 0.8 ({} runs): mean V {mv:.4} < mean B-hat {mb:.4}",
            high.len()
        ),
    )
}

// 10 -----------------------------------------------------------------------

fn determinism() -> Outcome {
    let cfg = SimConfig {
        k: 4,
        n: 128,
        fisher_samples: 1000,
        seed: 7,
        ..SimConfig::default()
    };
    let csv = || {
        let runs = run_grid(&cfg).unwrap();
        let mut a = Vec::new();
        write_runs_csv(&runs, &mut a).unwrap();
        let mut b = Vec::new();
        write_summary_csv(&coverage_report(&runs, cfg.alpha).unwrap(), &mut b).unwrap();
        (a, b)
    };
    let (r1, s1) = csv();
    let (r2, s2) = csv();
    pass_if(
        r1 == r2 && s1 == s2,
        format!(
            "runs.csv {} bytes, summary.csv {} bytes, identical across two invocations",
            r1.len(),
            s1.len()
        ),
    )
}

type Criterion = (&'static str, fn() -> Outcome);

fn main() {
    let criteria: [Criterion; 10] = [
        ("reference table golden values", reference_golden),
        ("dichotomous identity suite", identity_suite),
        ("multiclass reduction at K=2", multiclass_reduction),
        ("Fisher exact vs enumeration", fisher_oracle),
        ("chi2_sf vs quadrature", chi2_sf_oracle),
        ("null calibration", null_calibration),
        ("coverage of empirical band", coverage),
        ("significance ordering k=4 n=16", significance_ordering),
        ("Cramer's V bias at high l", cramers_v_bias),
        ("simulation determinism", determinism),
    ];
    let mut failed = 0;
    for (i, (name, f)) in criteria.iter().enumerate() {
        let start = std::time::Instant::now();
        let o = f();
        let tag = if o.ok { "PASS" } else { "FAIL" };
        failed += usize::from(!o.ok);
        println!(
            "[{tag}] criterion {:>2}: {name}: {} ({:.1}s)",
            i + 1,
            o.detail,
            start.elapsed().as_secs_f64()
        );
    }
    println!(
        "acceptance: {} passed, {failed} failed",
        criteria.len() - failed
    );
    if failed > 0 {
        std::process::exit(1);
    }
}
