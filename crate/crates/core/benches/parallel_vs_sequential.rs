use std::sync::Arc;

use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use syllogic_core::classify::{Classifier, SimulatedBiasParams, SimulatedClassifier};
use syllogic_core::dataset::DatasetInstance;
use syllogic_core::extraction::ExtractionChain;
use syllogic_core::harness::{generate_synthetic, run_pipeline, Lexicon, RunSettings};
use syllogic_core::logic::SemanticsMode;
use syllogic_core::par::Parallelism;

fn pipeline(c: &mut Criterion) {
    let data: Vec<DatasetInstance> = generate_synthetic(&Lexicon::builtin(), SemanticsMode::SubjectImport, 0, None)
        .unwrap()
        .into_iter()
        .map(|i| i.instance)
        .collect();
    let refs: Vec<&DatasetInstance> = data.iter().collect();
    let cls: Vec<Arc<dyn Classifier>> = (0..5)
        .map(|i| Arc::new(SimulatedClassifier { id: format!("c{i}"), params: SimulatedBiasParams::new(0.9, 0.3, i) }) as Arc<dyn Classifier>)
        .collect();
    let chain = ExtractionChain::rule_based();
    let mut group = c.benchmark_group("run_pipeline");
    for (name, par) in [("sequential", Parallelism::Sequential), ("rayon", Parallelism::Rayon { threads: None })] {
        let settings = RunSettings { parallelism: par, ..Default::default() };
        group.bench_with_input(BenchmarkId::new(name, data.len()), &settings, |b, s| {
            b.iter(|| run_pipeline(&refs, &cls, &chain, s).unwrap())
        });
    }
    group.finish();
}

criterion_group!(benches, pipeline);
criterion_main!(benches);
