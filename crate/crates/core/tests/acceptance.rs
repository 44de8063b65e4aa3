//! Acceptance run: one pass/fail line per criterion, non-zero exit if any
//! criterion fails.

mod common;

use std::fs;
use std::path::{Path, PathBuf};
use std::process::Command;
use std::time::Instant;

use cmlid::classify::logreg::SoftmaxParams;
use cmlid::classify::nb::train_nb;
use cmlid::classify::tree::best_split;
use cmlid::corpus::{build_labeled_corpus, parse_annotated_tsv, LabelPolicy};
use cmlid::eval::report::parse_results_csv;
use cmlid::select::chi2::chi_square_scores;
use cmlid::select::{forward_select, recursive_eliminate, recursive_eliminate_cv, wrapper_objective};
use cmlid::{ClassifierSpec, SelectorConfig, SelectorMethod, Tag};
use common::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

struct Outcome {
    pass: bool,
    detail: String,
}

fn outcome(pass: bool, detail: String) -> Outcome {
    Outcome { pass, detail }
}

fn data(name: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("data").join(name)
}

fn chi_square_equivalence() -> Outcome {
    let started = Instant::now();
    let mut worst: f64 = 0.0;
    for seed in 0..100 {
        let (dense, labels) = random_dense(1000 + seed, 50, 20);
        let got = chi_square_scores(&matrix(&dense, &labels)).unwrap();
        let want = chi_square_oracle(&dense, &labels);
        for (g, w) in got.iter().zip(&want) {
            worst = worst.max((g - w).abs());
        }
    }
    let secs = started.elapsed().as_secs_f64();
    outcome(
        worst <= 1e-9 && secs < 5.0,
        format!("100 corpora, max abs error {worst:.3e} (tol 1e-9), {secs:.2}s (limit 5s)"),
    )
}

fn forward_greedy_correctness() -> Outcome {
    let started = Instant::now();
    let mut steps = 0;
    let mut mismatches = 0;
    for seed in 0..20u64 {
        let (dense, labels) = random_dense(2000 + seed, 30, 30);
        let x = matrix(&dense, &labels);
        let spec = if seed % 2 == 0 {
            ClassifierSpec::naive_bayes()
        } else {
            ClassifierSpec::decision_tree()
        };
        let k = x.n_cols();
        let mut cfg = SelectorConfig::new(SelectorMethod::ForwardSelection, k);
        cfg.candidate_pool = None;
        cfg.seed = seed;
        let result = forward_select(&x, &spec, &cfg).unwrap();
        let mut prefix: Vec<usize> = Vec::new();
        for &chosen in &result.selected {
            // exhaustive argmax with retraining on the same folds
            let mut best: Option<(usize, f64)> = None;
            for f in (0..x.n_cols()).filter(|f| !prefix.contains(f)) {
                let mut subset = prefix.clone();
                subset.push(f);
                let v = wrapper_objective(&x, &subset, &spec, cfg.objective_folds, cfg.seed).unwrap();
                if best.map_or(true, |(_, b)| v > b) {
                    best = Some((f, v));
                }
            }
            steps += 1;
            if best.map(|b| b.0) != Some(chosen) {
                mismatches += 1;
            }
            prefix.push(chosen);
        }
    }
    let secs = started.elapsed().as_secs_f64();
    outcome(
        mismatches == 0 && secs < 60.0,
        format!("20 corpora, {steps} steps, {mismatches} mismatches, {secs:.2}s (limit 60s)"),
    )
}

fn rfe_planted_recovery() -> Outcome {
    let mut recovered = 0;
    let mut cv_two = 0;
    for seed in 0..20u64 {
        let x = planted_pair(3000 + seed, 200);
        let mut cfg = SelectorConfig::new(SelectorMethod::RecursiveElimination, 2);
        cfg.seed = seed;
        let r = recursive_eliminate(&x, &cfg).unwrap();
        let mut got = r.selected.clone();
        got.sort_unstable();
        if got == [0, 1] {
            recovered += 1;
        }
        let (best_k, _) = recursive_eliminate_cv(&x, &cfg, &[1, 2, 5]).unwrap();
        if best_k == 2 {
            cv_two += 1;
        }
    }
    outcome(
        recovered >= 18 && cv_two >= 16,
        format!("pair recovered {recovered}/20 (need 18), cross-validated k=2 {cv_two}/20 (need 16)"),
    )
}

fn classifier_oracles() -> Outcome {
    let mut nb_err: f64 = 0.0;
    for seed in 0..40 {
        let (dense, labels) = random_dense(4000 + seed, 5, 10);
        let x = matrix(&dense, &labels);
        let model = train_nb(&x, &ClassifierSpec::naive_bayes()).unwrap();
        for r in 0..x.n_rows() {
            let want = nb_posterior_oracle(&dense, &labels, 1.0, &dense[r]);
            for (g, (_, w)) in model.posterior(&x, r).iter().zip(&want) {
                nb_err = nb_err.max((g - w).abs());
            }
        }
    }
    let mut lr_err: f64 = 0.0;
    for seed in 0..10u64 {
        let (dense, labels) = random_dense(5000 + seed, 12, 6);
        let x = matrix(&dense, &labels);
        let targets: Vec<usize> = labels.iter().map(|t| t.index()).collect();
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut params = SoftmaxParams::zeros(3, x.n_cols());
        params.weights.iter_mut().for_each(|w| *w = rng.gen_range(-0.5..0.5));
        params.bias.iter_mut().for_each(|b| *b = rng.gen_range(-0.5..0.5));
        lr_err = lr_err.max(max_fd_relative_error(&x, &targets, &params, 0.01));
    }
    use Tag::*;
    let hand: Vec<(Vec<Vec<u32>>, Vec<Tag>)> = vec![
        (vec![vec![1, 0], vec![2, 0], vec![1, 3], vec![2, 4]], vec![En, En, Hi, Hi]),
        (vec![vec![0], vec![0], vec![2], vec![2], vec![5], vec![5]], vec![En, En, Hi, Hi, Ne, Ne]),
        (vec![vec![0, 0], vec![1, 1], vec![0, 1], vec![1, 0]], vec![En, En, Hi, Hi]),
        (
            vec![vec![1, 2, 0], vec![0, 1, 0], vec![2, 0, 1], vec![1, 1, 3], vec![0, 2, 3], vec![2, 2, 4]],
            vec![En, En, En, Hi, Hi, Ne],
        ),
    ];
    let mut tree_bad = 0;
    for (dense, labels) in &hand {
        let x = matrix(dense, labels);
        let rows: Vec<usize> = (0..x.n_rows()).collect();
        let got = best_split(&x, &rows, 1).map(|s| (s.feature, s.threshold));
        if got != best_root_split(dense, labels, 1) {
            tree_bad += 1;
        }
    }
    outcome(
        nb_err <= 1e-12 && lr_err < 1e-5 && tree_bad == 0,
        format!(
            "NB max error {nb_err:.2e} (tol 1e-12), LR max relative error {lr_err:.2e} (tol 1e-5), tree roots {}/{} match",
            hand.len() - tree_bad,
            hand.len()
        ),
    )
}

fn run_experiment(dir: &Path, name: &str, extra: &[&str]) -> (Vec<u8>, Vec<u8>, f64) {
    let csv = dir.join(format!("{name}.csv"));
    let svg = dir.join(format!("{name}.svg"));
    let started = Instant::now();
    let status = Command::new(env!("CARGO_BIN_EXE_cmlid"))
        .args(["experiment", "--corpus"])
        .arg(data("synthetic_corpus.tsv"))
        .args(["--profiles", "2,3", "--k", "50,150,250,350,450,550", "--csv"])
        .arg(&csv)
        .arg("--svg")
        .arg(&svg)
        .args(extra)
        .status()
        .expect("binary runs");
    assert!(status.success(), "experiment failed");
    (fs::read(csv).unwrap(), fs::read(svg).unwrap(), started.elapsed().as_secs_f64())
}

fn trend(csv: &[u8], secs: f64) -> Outcome {
    let records = parse_results_csv(std::str::from_utf8(csv).unwrap()).unwrap();
    let mut curves: Vec<(String, Vec<f64>)> = Vec::new();
    let mut errors = 0;
    for r in &records {
        let key = format!("{}/{}/{}", r.ngram_profile.label(), r.selector.method, r.classifier.kind);
        let Some(acc) = r.accuracy else {
            errors += 1;
            continue;
        };
        match curves.iter_mut().find(|c| c.0 == key) {
            Some(c) => c.1.push(acc),
            None => curves.push((key, vec![acc])),
        }
    }
    let mut failing = Vec::new();
    for (key, acc) in &curves {
        let inversions = acc.windows(2).filter(|w| w[1] < w[0]).count();
        if acc.len() != 6 || acc[5] < acc[0] || inversions > 1 {
            let shown: Vec<String> = acc.iter().map(|a| format!("{a:.4}")).collect();
            failing.push(format!("{key} [{}]", shown.join(" ")));
        }
    }
    let pass = records.len() == 108 && errors == 0 && curves.len() == 18 && failing.is_empty() && secs < 600.0;
    let mut detail = format!(
        "{} cells, {} curves, {errors} failed cells, {} curves off-trend, grid {secs:.1}s (limit 600s)",
        records.len(),
        curves.len(),
        failing.len()
    );
    for f in failing {
        detail.push_str(&format!("\n      off-trend: {f}"));
    }
    outcome(pass, detail)
}

fn stats_identity() -> Outcome {
    let mut identity_ok = true;
    for seed in 0..50u64 {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let words: Vec<(String, Tag)> = (0..rng.gen_range(1..80))
            .map(|_| {
                let w: String = (0..rng.gen_range(1..4)).map(|_| rng.gen_range(b'a'..=b'd') as char).collect();
                (w, Tag::ALL[rng.gen_range(0..3)])
            })
            .collect();
        let (_, stats) = build_labeled_corpus(&words, LabelPolicy::Majority).unwrap();
        let per_tag: usize = Tag::ALL.iter().map(|&t| stats.tag_count(t)).sum();
        identity_ok &= stats.total_tokens == stats.unique_words + stats.removed_redundant && per_tag == stats.unique_words;
    }
    let out = Command::new(env!("CARGO_BIN_EXE_cmlid"))
        .args(["stats", "--corpus"])
        .arg(data("synthetic_corpus.tsv"))
        .output()
        .expect("binary runs");
    let manifest = fs::read_to_string(data("synthetic_corpus.manifest")).unwrap();
    let expected: String = manifest.lines().filter(|l| !l.starts_with('#')).map(|l| format!("{l}\n")).collect();
    let matches = out.status.success() && String::from_utf8_lossy(&out.stdout) == expected;
    let text = fs::read_to_string(data("synthetic_corpus.tsv")).unwrap();
    let (_, bundled) = build_labeled_corpus(&parse_annotated_tsv(&text).unwrap(), LabelPolicy::Strict).unwrap();
    identity_ok &= bundled.total_tokens == bundled.unique_words + bundled.removed_redundant;
    outcome(
        identity_ok && matches,
        format!(
            "total = unique + redundant on 51 corpora: {identity_ok}; bundled corpus stats equal manifest: {matches} ({} / {} / EN {} / HI {} / NE {})",
            bundled.total_tokens,
            bundled.unique_words,
            bundled.tag_count(Tag::En),
            bundled.tag_count(Tag::Hi),
            bundled.tag_count(Tag::Ne)
        ),
    )
}

fn main() {
    let dir = tempfile::tempdir().unwrap();
    let mut results: Vec<(usize, &str, Outcome)> = vec![
        (1, "chi-square oracle equivalence", chi_square_equivalence()),
        (2, "forward selection greedy correctness", forward_greedy_correctness()),
        (3, "RFE planted-feature recovery", rfe_planted_recovery()),
        (4, "classifier oracles", classifier_oracles()),
    ];
    let (csv_a, svg_a, secs) = run_experiment(dir.path(), "first", &[]);
    results.push((5, "accuracy trend over the 108-cell grid", trend(&csv_a, secs)));
    results.push((6, "corpus stats identity", stats_identity()));
    let (csv_b, svg_b, _) = run_experiment(dir.path(), "repeat", &[]);
    let (csv_c, svg_c, _) = run_experiment(dir.path(), "serial", &["--threads", "1"]);
    let repeat = csv_a == csv_b && svg_a == svg_b;
    let serial = csv_a == csv_c && svg_a == svg_c;
    results.push((
        7,
        "determinism",
        outcome(
            repeat && serial,
            format!("repeated run byte-identical: {repeat}; serial equals parallel: {serial}"),
        ),
    ));
    results.sort_by_key(|r| r.0);
    let mut all = true;
    for (n, name, o) in &results {
        all &= o.pass;
        println!("criterion {n} {}: {name}: {}", if o.pass { "PASS" } else { "FAIL" }, o.detail);
    }
    if !all {
        std::process::exit(1);
    }
}
