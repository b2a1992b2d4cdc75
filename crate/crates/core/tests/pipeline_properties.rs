use std::sync::Arc;

use syllogic_core::classify::{Classifier, SimulatedBiasParams, SimulatedClassifier};
use syllogic_core::dataset::DatasetInstance;
use syllogic_core::extraction::ExtractionChain;
use syllogic_core::fusion::FusionStrategy;
use syllogic_core::harness::{generate_synthetic, run_pipeline, Lexicon, RunReport, RunSettings};
use syllogic_core::logic::SemanticsMode;
use syllogic_core::par::Parallelism;

fn corpus(seed: u64) -> Vec<DatasetInstance> {
    generate_synthetic(&Lexicon::builtin(), SemanticsMode::SubjectImport, seed, Some(256))
        .unwrap()
        .into_iter()
        .map(|i| i.instance)
        .collect()
}

fn ensemble(accuracy: f64, pull: f64, seed: u64) -> Vec<Arc<dyn Classifier>> {
    (0..5)
        .map(|i| {
            Arc::new(SimulatedClassifier { id: format!("c{i}"), params: SimulatedBiasParams::new(accuracy, pull, seed * 10 + i) })
                as Arc<dyn Classifier>
        })
        .collect()
}

fn run(data: &[DatasetInstance], cls: &[Arc<dyn Classifier>], par: Parallelism) -> RunReport {
    let settings = RunSettings { parallelism: par, ..Default::default() };
    let refs: Vec<&DatasetInstance> = data.iter().collect();
    run_pipeline(&refs, cls, &ExtractionChain::rule_based(), &settings).unwrap()
}

// Errors lean toward believability at every margin, and a 3-2 split is
// wrong far more often than a unanimous vote. Unanimous errors are almost
// all biased here, since the believability pull is the only thing that
// correlates the simulated classifiers.
#[test]
fn margin_buckets() {
    let (mut m1, mut m5) = ((0, 0, 0), (0, 0, 0));
    for seed in 0..10 {
        let r = run(&corpus(seed), &ensemble(0.85, 0.3, seed), Parallelism::Sequential);
        let b1 = r.margins.get(&1).copied().unwrap_or_default();
        let b5 = r.margins.get(&5).copied().unwrap_or_default();
        m1 = (m1.0 + b1.biased_errors, m1.1 + b1.errors, m1.2 + b1.instances);
        m5 = (m5.0 + b5.biased_errors, m5.1 + b5.errors, m5.2 + b5.instances);
    }
    assert!(m1.1 > 0 && m5.1 > 0);
    let biased = |m: (usize, usize, usize)| m.0 as f64 / m.1 as f64;
    let rate = |m: (usize, usize, usize)| m.1 as f64 / m.2 as f64;
    assert!(biased(m1) > 0.5 && biased(m5) > 0.5, "{} {}", biased(m1), biased(m5));
    assert!(rate(m1) > 2.0 * rate(m5), "error rate {} vs {}", rate(m1), rate(m5));
}

#[test]
fn content_effect_grows_with_pull() {
    let data = corpus(3);
    let ce = |pull| run(&data, &ensemble(0.9, pull, 3), Parallelism::Sequential).strategy(FusionStrategy::EnsembleOnly).unwrap().content_effect;
    let (lo, mid, hi) = (ce(0.0), ce(0.3), ce(0.6));
    assert!(lo < mid && mid < hi, "{lo} {mid} {hi}");
}

#[test]
fn solver_only_has_no_content_effect_on_clean_text() {
    let data = corpus(5);
    let r = run(&data, &ensemble(0.9, 0.3, 5), Parallelism::Sequential);
    let m = r.strategy(FusionStrategy::SolverOnly).unwrap();
    assert_eq!(m.accuracy, 100.0);
    assert_eq!(m.content_effect, 0.0);
}

#[test]
fn parallel_matches_sequential() {
    let data = corpus(1);
    let cls = ensemble(0.8, 0.4, 1);
    assert_eq!(run(&data, &cls, Parallelism::Sequential), run(&data, &cls, Parallelism::Rayon { threads: Some(4) }));
}
