//! Acceptance checks, one printed verdict per criterion.
//!
//! Runs without the libtest harness so every verdict line is visible in
//! `cargo test` output. Exits non-zero if any required criterion fails; the
//! tic-tac-toe reproduction is reported but never fails the run.

use std::cmp::Ordering;
use std::path::{Path, PathBuf};
use std::process::Command;
use std::time::Instant;

use igsd::measures::agreement::{ac1, icc, read_ratings};
use igsd::measures::{Confusion, chi2_p, entropy, odds_ratio, orr, wracc};
use igsd::refine::{CutMode, PrefixProfile, optimal_cut};
use igsd::search::ig_threshold;
use igsd_cli::document::{PatternDocument, SetStatsDoc};
use igsd_cli::{Cli, Command as Sub, oracle_report};
use rand::rngs::StdRng;
use rand::{RngExt, SeedableRng};

fn data(file: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../../data").join(file)
}

#[derive(Default)]
struct Verdicts {
    failed: Vec<u32>,
}

impl Verdicts {
    fn record(&mut self, id: u32, name: &str, started: Instant, problems: Vec<String>, detail: String) {
        let secs = started.elapsed().as_secs_f64();
        if problems.is_empty() {
            println!("criterion {id} [{name}]: PASS ({secs:.1}s) {detail}");
        } else {
            println!("criterion {id} [{name}]: FAIL ({secs:.1}s) {detail}");
            for p in &problems {
                println!("    - {p}");
            }
            self.failed.push(id);
        }
    }
}

fn check(problems: &mut Vec<String>, ok: bool, what: impl Into<String>) {
    if !ok {
        problems.push(what.into());
    }
}

fn discover(args: &[&str]) -> String {
    let out = Command::new(env!("CARGO_BIN_EXE_igsd"))
        .arg("discover")
        .args(args)
        .output()
        .expect("igsd runs");
    assert!(out.status.success(), "discover {args:?} failed: {}", String::from_utf8_lossy(&out.stderr));
    String::from_utf8(out.stdout).expect("UTF-8 document")
}

fn overall(doc: &PatternDocument) -> SetStatsDoc {
    doc.set_stats.as_ref().expect("engine documents carry set stats").overall.clone()
}

fn criterion_1(v: &mut Verdicts) {
    let t = Instant::now();
    let mut p = Vec::new();
    check(&mut p, entropy(0.5) == 1.0, "entropy(0.5) != 1");
    let all = Confusion::new(30, 70, 0, 0);
    check(&mut p, wracc(&all).unwrap().abs() <= 1e-12, "cover-all wracc not 0");
    check(&mut p, odds_ratio(&Confusion::new(5, 5, 5, 5)) == 1.0, "odds_ratio(5,5,5,5) != 1");
    for (odds, band) in [(1.0, 1), (2.0, 2), (5.0, 3), (7.0, 4), (6.71, 4)] {
        check(&mut p, orr(odds) == band, format!("orr({odds}) != {band}"));
    }
    // erfc(sqrt(10)) for chi-square 20 on one degree of freedom.
    let pv = chi2_p(&Confusion::new(10, 0, 0, 10));
    check(&mut p, (pv - 7.744_216_431_044_074e-6).abs() <= 1e-8, format!("chi2_p = {pv:e}"));
    v.record(1, "metric unit suite", t, p, String::new());
}

fn sample_std(xs: &[f64]) -> f64 {
    let n = xs.len() as f64;
    let mean = xs.iter().sum::<f64>() / n;
    (xs.iter().map(|x| (x - mean) * (x - mean)).sum::<f64>() / (n - 1.0)).sqrt()
}

fn criterion_2(v: &mut Verdicts) {
    let t = Instant::now();
    let mut p = Vec::new();
    let base = ig_threshold(&[0.1, 0.2, 0.3]);
    check(&mut p, (base - 0.1).abs() <= 1e-12, format!("threshold {{0.1,0.2,0.3}} = {base}"));
    let mut rng = StdRng::seed_from_u64(0x1651);
    let mut worst: f64 = 0.0;
    for _ in 0..1000 {
        let n = rng.random_range(2..60);
        let xs: Vec<f64> = (0..n).map(|_| rng.random::<f64>()).collect();
        worst = worst.max((ig_threshold(&xs) - sample_std(&xs)).abs());
    }
    check(&mut p, worst < 1e-10, format!("max delta {worst:e}"));
    v.record(2, "threshold formula", t, p, format!("max delta over 1000 sequences {worst:.1e}"));
}

fn criterion_3(v: &mut Verdicts) {
    let t = Instant::now();
    let mut p = Vec::new();
    let mut detail = Vec::new();
    let fixture = data("fixture8.csv");
    let ttt = data("tic-tac-toe.csv");
    let runs: [(&Path, &str, &[&str]); 3] = [
        (&fixture, "T", &[]),
        (&ttt, "class", &["--dmax", "2"]),
        (&ttt, "class", &["--dmax", "3"]),
    ];
    for (path, target, extra) in runs {
        for mode in ["maximum", "dynamic"] {
            let mut argv = vec!["igsd", "oracle", "--data", path.to_str().unwrap(), "--target", target, "--t-mode", mode];
            argv.extend_from_slice(extra);
            let cli = <Cli as clap::Parser>::try_parse_from(&argv).unwrap();
            let Sub::Oracle(args) = cli.command else { unreachable!() };
            let name = format!("{} {mode} {}", path.file_name().unwrap().to_string_lossy(), extra.join(" "));
            match oracle_report(&args) {
                Ok(r) => {
                    let delta = r.per_pattern_stat_deltas.max();
                    check(&mut p, r.frontier_match, format!("{name}: frontier mismatch"));
                    check(&mut p, delta < 1e-9, format!("{name}: delta {delta:e}"));
                    check(&mut p, r.passed(), format!("{name}: {:?}", r.mismatches));
                    detail.push(format!("{name}: {} combos, delta {delta:.0e}", r.enumerated_count));
                }
                Err(e) => p.push(format!("{name}: {e}")),
            }
        }
    }
    v.record(3, "oracle equivalence", t, p, detail.join("; "));
}

/// Cut position transcribed step by step from the algorithm's pseudocode,
/// independent of the engine's implementation.
fn transcribed_cut(ig: &[f64], orr: &[u8], pv: &[f64]) -> usize {
    let t = sample_std_or_zero(ig);
    let cut_candidates: Vec<usize> = (0..ig.len()).filter(|&i| ig[i] >= t).filter(|&i| pv[i] <= 0.05).collect();
    match cut_candidates.len() {
        0 => 0,
        1 => cut_candidates[0] + 1,
        _ => {
            let mut optimal = 0;
            for k in 1..cut_candidates.len() {
                let (now, before) = (orr[cut_candidates[k]], orr[cut_candidates[k - 1]]);
                if now > before {
                    optimal = k;
                } else if now < before || k - optimal > 1 {
                    break;
                }
            }
            cut_candidates[optimal] + 1
        }
    }
}

fn sample_std_or_zero(xs: &[f64]) -> f64 {
    if xs.len() < 2 { 0.0 } else { sample_std(xs) }
}

/// Label, IG, ORR band and p-value per prefix, expected kept length.
type TraceCase = (&'static str, Vec<f64>, Vec<u8>, Vec<f64>, usize);

fn criterion_4(v: &mut Verdicts) {
    let t = Instant::now();
    let mut p = Vec::new();
    const S: f64 = 1e-6;
    let cases: Vec<TraceCase> = vec![
        (
            "peak at 3 then decline",
            vec![0.05, 0.09, 0.14, 0.12, 0.10, 0.08],
            vec![2, 3, 4, 3, 3, 2],
            vec![S; 6],
            3,
        ),
        ("single significant", vec![0.3], vec![3], vec![S], 1),
        ("single insignificant", vec![0.3], vec![4], vec![0.2], 0),
        ("p exactly at level", vec![0.3], vec![2], vec![0.05], 1),
        ("ig filter drops the head", vec![0.01, 0.3, 0.31], vec![1, 2, 3], vec![S; 3], 3),
        ("plateau after advance", vec![0.2; 4], vec![2, 3, 3, 3], vec![S; 4], 2),
        ("flat plateau from start", vec![0.2; 3], vec![3, 3, 3], vec![S; 3], 1),
        ("monotone decline", vec![0.2; 3], vec![4, 3, 2], vec![S; 3], 1),
        ("p filter skips the peak", vec![0.2; 3], vec![2, 4, 3], vec![S, 0.2, S], 3),
        ("only the tail clears the threshold", vec![0.0, 0.0, 0.5], vec![4, 4, 4], vec![S; 3], 3),
        ("zero gains all survive", vec![0.0, 0.0], vec![1, 1], vec![S; 2], 1),
        ("plateau then rise", vec![0.2; 3], vec![2, 2, 4], vec![S; 3], 3),
        ("rise, dip, rise", vec![0.2; 4], vec![2, 3, 2, 4], vec![S; 4], 2),
        ("nothing significant", vec![0.1, 0.2], vec![4, 4], vec![0.3, 0.06], 0),
    ];
    for (label, ig, bands, pv, expected) in &cases {
        let transcribed = transcribed_cut(ig, bands, pv);
        let engine = optimal_cut(
            &PrefixProfile::from_parts(ig.clone(), bands.clone(), pv.clone()),
            CutMode::Inclusive,
        );
        check(&mut p, transcribed == *expected, format!("{label}: transcription gives {transcribed}, expected {expected}"));
        check(&mut p, engine == *expected, format!("{label}: engine keeps {engine}, expected {expected}"));
    }
    let (_, ig, bands, pv, _) = cases[0].clone();
    let peak = optimal_cut(&PrefixProfile::from_parts(ig, bands, pv), CutMode::Inclusive);
    check(&mut p, peak == 3, format!("peak profile keeps {peak}"));
    v.record(4, "cut trace suite", t, p, format!("{} profiles, peak-profile kept_length {peak}", cases.len()));
}

fn criterion_5(v: &mut Verdicts, docs: &[(String, PatternDocument)]) {
    let t = Instant::now();
    let mut p = Vec::new();
    let mut total = 0;
    for (name, doc) in docs {
        for pat in &doc.patterns {
            total += 1;
            let stats = pat.stats.as_ref().expect("engine patterns carry stats");
            check(&mut p, stats.p_value <= 0.05, format!("{name}: pattern with p = {:e}", stats.p_value));
            if let Some(profile) = &pat.profile {
                let last = *profile.p_value.last().unwrap();
                check(&mut p, last == stats.p_value, format!("{name}: cut p differs from pattern p"));
            }
        }
    }
    check(&mut p, total > 0, "no patterns emitted");
    v.record(5, "significance invariant", t, p, format!("{total} patterns over {} runs", docs.len()));
}

fn criterion_6(ttt: &[(&str, &PatternDocument)]) {
    // Reference row: size 4, length 3, confidence 1, ORR 4, coverage 0.073, IG 0.072.
    for (mode, doc) in ttt {
        let s = overall(doc);
        let f = |x: Option<f64>| x.unwrap_or(f64::NAN);
        let checks = [
            ("size", s.size as f64, 4.0, 0.0),
            ("length", f(s.length), 3.0, 1e-9),
            ("confidence", f(s.confidence), 1.0, 0.005),
            ("odd-range", f(s.odd_range), 4.0, 1e-9),
            ("coverage", f(s.coverage), 0.073, 0.02),
            ("info_gained", f(s.info_gained), 0.072, 0.02),
        ];
        let misses: Vec<String> = checks
            .iter()
            .filter(|(_, got, want, tol)| !matches!((got - want).abs().partial_cmp(tol), Some(Ordering::Less | Ordering::Equal)))
            .map(|(name, got, want, _)| format!("{name} {got:.4} vs {want} (delta {:+.4})", got - want))
            .collect();
        let summary = checks.iter().map(|(n, g, _, _)| format!("{n} {g:.3}")).collect::<Vec<_>>().join(", ");
        if misses.is_empty() {
            println!("criterion 6 [tic-tac-toe reproduction, {mode}]: PASS {summary}");
        } else {
            println!("criterion 6 [tic-tac-toe reproduction, {mode}]: BEST-EFFORT MISS {summary}");
            for m in misses {
                println!("    - {m}");
            }
        }
    }
}

fn criterion_7(v: &mut Verdicts, iris: &[(&str, &PatternDocument, f64)]) {
    let t = Instant::now();
    let mut p = Vec::new();
    let mut detail = Vec::new();
    for (mode, doc, secs) in iris {
        let s = overall(doc);
        let (cnf, band) = (s.confidence.unwrap_or(0.0), s.odd_range.unwrap_or(0.0));
        check(&mut p, !doc.truncated, format!("{mode}: truncated"));
        check(&mut p, s.size > 0, format!("{mode}: empty set"));
        check(&mut p, cnf >= 0.9, format!("{mode}: mean confidence {cnf:.3}"));
        check(&mut p, band >= 3.5, format!("{mode}: mean ORR {band:.3}"));
        detail.push(format!("{mode}: size {}, confidence {cnf:.3}, ORR {band:.2}, {secs:.1}s", s.size));
    }
    v.record(7, "IRIS smoke", t, p, detail.join("; "));
}

fn criterion_8(v: &mut Verdicts) {
    let t = Instant::now();
    let mut p = Vec::new();
    let load = |f: &str| read_ratings(std::fs::File::open(data(f)).unwrap()).unwrap();
    let perfect = load("ratings/perfect.csv");
    let two = load("ratings/two-raters.csv");
    let a_perfect = ac1(&perfect).unwrap();
    let a_two = ac1(&two).unwrap();
    let i_perfect = icc(&perfect).unwrap();
    check(&mut p, a_perfect == 1.0, format!("perfect AC1 {a_perfect}"));
    check(&mut p, (a_two - 0.6).abs() <= 1e-12, format!("100-item AC1 {a_two}"));
    check(&mut p, (i_perfect - 1.0).abs() <= 1e-9, format!("identical ICC {i_perfect}"));
    v.record(8, "agreement suite", t, p, format!("AC1 {a_perfect} / {a_two:.12}, ICC {i_perfect}"));
}

fn main() {
    let mut v = Verdicts::default();
    criterion_1(&mut v);
    criterion_2(&mut v);
    criterion_3(&mut v);
    criterion_4(&mut v);
    criterion_8(&mut v);

    let path = |f: &str| data(f).to_string_lossy().into_owned();
    let run = |args: &[&str]| {
        let t = Instant::now();
        let text = discover(args);
        (text, t.elapsed().as_secs_f64())
    };

    let t9 = Instant::now();
    let ttt = path("tic-tac-toe.csv");
    let (first, _) = run(&["--data", &ttt, "--target", "class"]);
    let (second, _) = run(&["--data", &ttt, "--target", "class"]);
    let mut p9 = Vec::new();
    check(&mut p9, first == second, "documents differ between runs");
    v.record(9, "determinism", t9, p9, format!("{} bytes", first.len()));

    let (ttt_max, _) = run(&["--data", &ttt, "--target", "class", "--t-mode", "maximum"]);
    let iris = path("iris.csv");
    let (iris_dyn, s_dyn) = run(&["--data", &iris, "--target", "class"]);
    let (iris_max, s_max) = run(&["--data", &iris, "--target", "class", "--t-mode", "maximum"]);
    let fixture = path("fixture8.csv");
    let lucat = path("lucat-like.csv");
    let extra = [
        run(&["--data", &fixture, "--target", "T"]).0,
        run(&["--data", &fixture, "--target", "T", "--t-mode", "maximum"]).0,
        run(&["--data", &lucat, "--target", "progression", "--target", "toxicity", "--cond", "stage,first_treatment"]).0,
        run(&["--data", &lucat, "--target", "progression", "--t-mode", "maximum"]).0,
    ];

    let parse = |text: &str| PatternDocument::from_json(text).expect("valid document");
    let mut docs = vec![
        ("tic-tac-toe dynamic".to_string(), parse(&first)),
        ("tic-tac-toe maximum".to_string(), parse(&ttt_max)),
        ("iris dynamic".to_string(), parse(&iris_dyn)),
        ("iris maximum".to_string(), parse(&iris_max)),
    ];
    docs.extend(extra.iter().enumerate().map(|(i, t)| (format!("fixture run {i}"), parse(t))));

    criterion_5(&mut v, &docs);
    criterion_6(&[("dynamic", &docs[0].1), ("maximum", &docs[1].1)]);
    criterion_7(&mut v, &[("dynamic", &docs[2].1, s_dyn), ("maximum", &docs[3].1, s_max)]);

    if v.failed.is_empty() {
        println!("acceptance: all required criteria passed");
    } else {
        println!("acceptance: failed criteria {:?}", v.failed);
        std::process::exit(1);
    }
}
