use cmlid::corpus::{build_labeled_corpus, parse_annotated_tsv, LabelPolicy};
use cmlid::eval::grid::{run_grid, run_grid_with_split, GridConfig};
use cmlid::eval::report::{emit_curves_svg, emit_results_csv, parse_results_csv};
use cmlid::eval::split::stratified_holdout;
use cmlid::synth::{generate, SynthConfig};
use cmlid::{LabeledWord, NGramSpec, SelectorMethod, Tag};

fn small_corpus() -> Vec<LabeledWord> {
    let synth = generate(&SynthConfig {
        seed: 5,
        english: 90,
        hindi: 60,
        named_entities: 40,
        ..SynthConfig::default()
    });
    let words = parse_annotated_tsv(&synth.to_tsv()).unwrap();
    build_labeled_corpus(&words, LabelPolicy::Strict).unwrap().0
}

fn small_grid() -> GridConfig {
    GridConfig {
        k_values: vec![5, 20, 40],
        rfe_step: 10,
        ..GridConfig::new()
    }
}

#[test]
fn full_cardinality_and_sorted_order() {
    let out = run_grid(&small_corpus(), &small_grid()).unwrap();
    assert_eq!(out.records.len(), 3 * 3 * 2 * 3);
    assert!(out.records.iter().all(|r| r.error.is_none()));
    let keys: Vec<(String, SelectorMethod, String, usize)> = out
        .records
        .iter()
        .map(|r| (r.ngram_profile.label(), r.selector.method, r.classifier.describe(), r.k))
        .collect();
    assert_eq!(keys[0].0, "bigram");
    assert_eq!(keys.last().unwrap().0, "trigram");
    for w in keys.chunks(3) {
        assert_eq!(w.iter().map(|k| k.3).collect::<Vec<_>>(), vec![5, 20, 40]);
    }
}

#[test]
fn serial_and_parallel_runs_are_byte_identical() {
    let corpus = small_corpus();
    let mut serial = small_grid();
    serial.threads = Some(1);
    let mut parallel = small_grid();
    parallel.threads = Some(4);
    let a = run_grid(&corpus, &serial).unwrap();
    let b = run_grid(&corpus, &parallel).unwrap();
    let c = run_grid(&corpus, &parallel).unwrap();
    let csv = |o: &cmlid::eval::GridOutput| emit_results_csv(&o.records, &[]).unwrap();
    let svg = |o: &cmlid::eval::GridOutput| emit_curves_svg(&o.records, &[]).unwrap();
    assert_eq!(csv(&a), csv(&b));
    assert_eq!(csv(&b), csv(&c));
    assert_eq!(svg(&a), svg(&b));
}

#[test]
fn csv_of_a_real_grid_round_trips() {
    let out = run_grid(&small_corpus(), &small_grid()).unwrap();
    let text = emit_results_csv(&out.records, &["grid".into()]).unwrap();
    assert_eq!(parse_results_csv(&text).unwrap(), out.records);
}

#[test]
fn top_k_sets_are_nested_across_k() {
    let out = run_grid(&small_corpus(), &small_grid()).unwrap();
    let topk = out.selections.iter().filter(|s| s.method == SelectorMethod::TopK);
    for sel in topk {
        let results = sel.results.as_ref().unwrap();
        let small = &results[0].selected;
        let large = &results[results.len() - 1].selected;
        assert!(small.iter().all(|f| large.contains(f)));
    }
}

#[test]
fn test_labels_never_reach_selection() {
    let corpus = small_corpus();
    let labels: Vec<Tag> = corpus.iter().map(|w| w.tag).collect();
    let split = stratified_holdout(&labels, 0.8, true, 42).unwrap();
    let mut corrupted = corpus.clone();
    for &i in &split.test {
        corrupted[i].tag = Tag::ALL[(corrupted[i].tag.index() + 1) % 3];
    }
    let cfg = GridConfig {
        profiles: vec![NGramSpec::single(2).unwrap()],
        ..small_grid()
    };
    let clean = run_grid_with_split(&corpus, &split, &cfg).unwrap();
    let dirty = run_grid_with_split(&corrupted, &split, &cfg).unwrap();
    for (a, b) in clean.selections.iter().zip(&dirty.selections) {
        assert_eq!(a.vocabulary, b.vocabulary);
        assert_eq!(a.results, b.results);
    }
    // the corruption is visible to scoring, so the canary is live
    assert_ne!(
        clean.records.iter().map(|r| r.accuracy).collect::<Vec<_>>(),
        dirty.records.iter().map(|r| r.accuracy).collect::<Vec<_>>()
    );
}
