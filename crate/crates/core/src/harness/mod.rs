//! Nested cross-validation: per-fold configuration selection on an inner
//! subset, then ensemble + solver fusion on the held-out fold.

mod folds;
pub mod report;
mod scan;
pub mod synth;

pub use folds::{plan_folds, Fold, FoldError, FoldPlan};
pub use scan::{scan_import_forms, ImportMatch, ImportScanReport, IMPORT_FORMS};
pub use synth::{generate_synthetic, Lexicon, SynthError, SyntheticItem};

use crate::classify::Classifier;
use crate::dataset::DatasetInstance;
use crate::extraction::ExtractionChain;
use crate::fusion::{aggregate, fuse, FusionStrategy};
use crate::logic::{decide_validity, Form, SemanticsMode, Verdict};
use crate::metrics::{aggregate_folds, evaluate, AggregateReport, CeMetricKind, MetricsError, MetricsReport, Subgroup};
use crate::par::{self, Parallelism};
use serde::{Deserialize, Serialize};
use std::collections::BTreeMap;
use std::sync::Arc;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum HarnessError {
    #[error(transparent)]
    Folds(#[from] FoldError),
    #[error(transparent)]
    Metrics(#[from] MetricsError),
    #[error("fold {fold}: only {usable} usable classifiers, ensemble needs {needed}")]
    TooFewClassifiers { fold: usize, usable: usize, needed: usize },
    #[error("ensemble size must be at least 1")]
    EmptyEnsemble,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunSettings {
    pub mode: SemanticsMode,
    pub strategies: Vec<FusionStrategy>,
    /// Threshold of the tiebreaker whose behavior is tabulated.
    pub tau: usize,
    pub ce_metric: CeMetricKind,
    pub ensemble_size: usize,
    pub folds: usize,
    pub inner: usize,
    pub seed: u64,
    pub stratified: bool,
    pub parallelism: Parallelism,
}

impl Default for RunSettings {
    fn default() -> Self {
        RunSettings {
            mode: SemanticsMode::SubjectImport,
            strategies: FusionStrategy::standard_set(),
            tau: 1,
            ce_metric: CeMetricKind::CongruenceGap,
            ensemble_size: 5,
            folds: 5,
            inner: 200,
            seed: 0,
            stratified: false,
            parallelism: Parallelism::default(),
        }
    }
}

impl RunSettings {
    fn tiebreaker(&self) -> FusionStrategy {
        FusionStrategy::Tiebreaker { tau: self.tau }
    }

    /// Requested strategies plus the two the behavior table always needs.
    fn all_strategies(&self) -> Vec<FusionStrategy> {
        let mut out = self.strategies.clone();
        for s in [FusionStrategy::EnsembleOnly, self.tiebreaker()] {
            if !out.contains(&s) {
                out.push(s);
            }
        }
        out
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RankedConfig {
    pub id: String,
    pub metrics: Option<MetricsReport>,
    pub errors: usize,
    /// Every call failed; the configuration cannot be selected.
    pub excluded: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SelectionResult {
    /// Best first.
    pub ranking: Vec<RankedConfig>,
    pub chosen: Vec<String>,
}

fn instances_at<'a>(dataset: &'a [DatasetInstance], idx: &[usize]) -> Vec<&'a DatasetInstance> {
    idx.iter().map(|&i| &dataset[i]).collect()
}

/// Scores each candidate on the inner subset and keeps the top `top` by
/// combined score, ties broken by id.
pub fn select_configs(
    candidates: &[Arc<dyn Classifier>],
    inner: &[&DatasetInstance],
    ce_metric: CeMetricKind,
    top: usize,
    par: Parallelism,
) -> Result<SelectionResult, MetricsError> {
    let owned: Vec<DatasetInstance> = inner.iter().map(|i| (*i).clone()).collect();
    let mut ranking = Vec::with_capacity(candidates.len());
    for c in candidates {
        let votes = par::map(inner, par, |inst| c.classify(inst));
        let errors = votes.iter().filter(|v| v.error).count();
        let excluded = !votes.is_empty() && errors == votes.len();
        let metrics = if excluded || votes.is_empty() {
            None
        } else {
            let preds: Vec<u8> = votes.iter().map(|v| v.value).collect();
            Some(evaluate(&preds, &owned, ce_metric)?)
        };
        ranking.push(RankedConfig { id: c.id().to_string(), metrics, errors, excluded });
    }
    ranking.sort_by(|a, b| {
        let score = |r: &RankedConfig| r.metrics.as_ref().map(|m| m.combined_score).unwrap_or(f64::NEG_INFINITY);
        score(b).total_cmp(&score(a)).then_with(|| a.id.cmp(&b.id))
    });
    let chosen = ranking.iter().filter(|r| !r.excluded).take(top).map(|r| r.id.clone()).collect();
    Ok(SelectionResult { ranking, chosen })
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct InstanceRecord {
    pub id: String,
    pub subgroup: Subgroup,
    pub gold: u8,
    pub votes: Vec<u8>,
    pub vote_errors: usize,
    pub margin: usize,
    pub majority: u8,
    pub extractor: Option<String>,
    pub extraction_attempts: u32,
    pub extraction_failure: Option<String>,
    pub form: Option<String>,
    pub verdict: Verdict,
    /// Premises extracted but jointly unsatisfiable.
    pub degenerate: bool,
    /// Strategy label → prediction.
    pub predictions: BTreeMap<String, u8>,
}

/// Table-4-style counts for the tiebreaker at the run's threshold.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct TiebreakerStats {
    pub tau: usize,
    pub total: usize,
    pub splits: usize,
    pub non_splits: usize,
    pub solver_available: usize,
    pub degenerate_premises: usize,
    pub overrides: usize,
    pub correct_flips: usize,
    pub wrong_flips: usize,
    pub ensemble_correct: usize,
    pub tiebreaker_correct: usize,
}

impl TiebreakerStats {
    pub fn add(&mut self, o: &TiebreakerStats) {
        self.total += o.total;
        self.splits += o.splits;
        self.non_splits += o.non_splits;
        self.solver_available += o.solver_available;
        self.degenerate_premises += o.degenerate_premises;
        self.overrides += o.overrides;
        self.correct_flips += o.correct_flips;
        self.wrong_flips += o.wrong_flips;
        self.ensemble_correct += o.ensemble_correct;
        self.tiebreaker_correct += o.tiebreaker_correct;
    }

    /// The accounting identities every run must satisfy.
    pub fn identities_hold(&self) -> bool {
        self.correct_flips + self.wrong_flips == self.overrides
            && self.splits + self.non_splits == self.total
            && self.correct_flips as i64 - self.wrong_flips as i64 == self.tiebreaker_correct as i64 - self.ensemble_correct as i64
            && self.solver_available <= self.splits
    }
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct CoalitionStats {
    pub margin1_instances: usize,
    /// Classifier id → number of margin-1 instances where it voted with the
    /// minority.
    pub minority_counts: BTreeMap<String, usize>,
    /// Percent of the minority seats a classifier would fill at random.
    pub chance_percent: f64,
}

impl CoalitionStats {
    pub fn frequency(&self, id: &str) -> Option<f64> {
        let c = *self.minority_counts.get(id)?;
        (self.margin1_instances > 0).then(|| 100.0 * c as f64 / self.margin1_instances as f64)
    }
}

/// Ensemble errors by vote margin; "biased" errors are wrong majorities on
/// incongruent instances, where the wrong answer is the believable one.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct MarginBucket {
    pub instances: usize,
    pub errors: usize,
    pub biased_errors: usize,
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct FailureCount {
    pub instances: usize,
    pub failures: usize,
}

impl FailureCount {
    pub fn rate(&self) -> Option<f64> {
        (self.instances > 0).then(|| 100.0 * self.failures as f64 / self.instances as f64)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StrategyResult {
    pub label: String,
    pub strategy: FusionStrategy,
    pub metrics: MetricsReport,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunReport {
    pub classifiers: Vec<String>,
    pub mode: SemanticsMode,
    pub strategies: Vec<StrategyResult>,
    pub tiebreaker: TiebreakerStats,
    pub coalition: CoalitionStats,
    pub margins: BTreeMap<usize, MarginBucket>,
    pub extraction_failures: BTreeMap<Subgroup, FailureCount>,
    pub verdicts: BTreeMap<String, usize>,
    pub vote_errors: usize,
    pub instances: Vec<InstanceRecord>,
}

impl RunReport {
    pub fn strategy(&self, s: FusionStrategy) -> Option<&MetricsReport> {
        self.strategies.iter().find(|r| r.strategy == s).map(|r| &r.metrics)
    }
}

/// Votes, extraction, solver and fusion over one evaluation set.
pub fn run_pipeline(
    eval: &[&DatasetInstance],
    classifiers: &[Arc<dyn Classifier>],
    chain: &ExtractionChain,
    settings: &RunSettings,
) -> Result<RunReport, HarnessError> {
    if classifiers.is_empty() {
        return Err(HarnessError::EmptyEnsemble);
    }
    let strategies = settings.all_strategies();
    let records: Vec<InstanceRecord> = par::map(eval, settings.parallelism, |inst| {
        let votes: Vec<_> = classifiers.iter().map(|c| c.classify(inst)).collect();
        let record = aggregate(&votes.iter().map(|v| v.value).collect::<Vec<_>>());
        let outcome = chain.extract(&inst.text, Some(inst.plausibility));
        let (verdict, form, failure) = match &outcome.result {
            Ok(s) => (
                decide_validity(s, settings.mode).unwrap_or(Verdict::Indeterminate),
                Form::of(s).map(Form::code),
                None,
            ),
            Err(e) => (Verdict::Indeterminate, None, Some(e.code().to_string())),
        };
        let predictions = strategies.iter().map(|s| (s.label(), fuse(&record, verdict, *s).prediction)).collect();
        InstanceRecord {
            id: inst.id.clone(),
            subgroup: inst.subgroup(),
            gold: inst.gold(),
            vote_errors: votes.iter().filter(|v| v.error).count(),
            votes: record.votes.clone(),
            margin: record.margin,
            majority: record.majority,
            extractor: outcome.extractor_used.clone(),
            extraction_attempts: outcome.attempts,
            degenerate: outcome.result.is_ok() && verdict == Verdict::Indeterminate,
            extraction_failure: failure,
            form,
            verdict,
            predictions,
        }
    });

    let owned: Vec<DatasetInstance> = eval.iter().map(|i| (*i).clone()).collect();
    let mut results = Vec::with_capacity(strategies.len());
    for s in &strategies {
        let preds: Vec<u8> = records.iter().map(|r| r.predictions[&s.label()]).collect();
        results.push(StrategyResult { label: s.label(), strategy: *s, metrics: evaluate(&preds, &owned, settings.ce_metric)? });
    }

    let tb_label = settings.tiebreaker().label();
    let ens_label = FusionStrategy::EnsembleOnly.label();
    let mut tb = TiebreakerStats { tau: settings.tau, total: records.len(), ..Default::default() };
    let n = classifiers.len();
    let ids: Vec<String> = classifiers.iter().map(|c| c.id().to_string()).collect();
    let mut coalition = CoalitionStats {
        minority_counts: ids.iter().map(|id| (id.clone(), 0)).collect(),
        chance_percent: if n % 2 == 1 { 100.0 * ((n - 1) / 2) as f64 / n as f64 } else { 0.0 },
        ..Default::default()
    };
    let mut margins: BTreeMap<usize, MarginBucket> = BTreeMap::new();
    let mut failures: BTreeMap<Subgroup, FailureCount> = Subgroup::ALL.into_iter().map(|g| (g, FailureCount::default())).collect();
    let mut verdicts: BTreeMap<String, usize> = BTreeMap::new();
    for r in &records {
        let ens = r.predictions[&ens_label];
        let fused = r.predictions[&tb_label];
        if r.margin <= settings.tau {
            tb.splits += 1;
            if r.verdict.is_determinate() {
                tb.solver_available += 1;
            }
        } else {
            tb.non_splits += 1;
        }
        tb.degenerate_premises += r.degenerate as usize;
        if fused != ens {
            tb.overrides += 1;
            if fused == r.gold {
                tb.correct_flips += 1;
            } else {
                tb.wrong_flips += 1;
            }
        }
        tb.ensemble_correct += (ens == r.gold) as usize;
        tb.tiebreaker_correct += (fused == r.gold) as usize;

        if r.margin == 1 {
            coalition.margin1_instances += 1;
            for (i, v) in r.votes.iter().enumerate() {
                if *v != r.majority {
                    *coalition.minority_counts.get_mut(&ids[i]).unwrap() += 1;
                }
            }
        }
        let bucket = margins.entry(r.margin).or_default();
        bucket.instances += 1;
        if r.majority != r.gold {
            bucket.errors += 1;
            if !r.subgroup.is_congruent() {
                bucket.biased_errors += 1;
            }
        }
        let f = failures.get_mut(&r.subgroup).unwrap();
        f.instances += 1;
        f.failures += r.extraction_failure.is_some() as usize;
        *verdicts.entry(r.verdict.to_string()).or_default() += 1;
    }

    Ok(RunReport {
        classifiers: ids,
        mode: settings.mode,
        strategies: results,
        tiebreaker: tb,
        coalition,
        margins,
        extraction_failures: failures,
        verdicts,
        vote_errors: records.iter().map(|r| r.vote_errors).sum(),
        instances: records,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FoldReport {
    pub index: usize,
    pub evaluation_size: usize,
    pub inner_size: usize,
    pub selection: SelectionResult,
    pub run: RunReport,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StrategyAggregate {
    pub label: String,
    pub strategy: FusionStrategy,
    pub aggregate: AggregateReport,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CvReport {
    pub settings: RunSettings,
    pub dataset_size: usize,
    pub folds: Vec<FoldReport>,
    pub strategies: Vec<StrategyAggregate>,
    /// Summed over folds.
    pub tiebreaker: TiebreakerStats,
    pub coalition: CoalitionStats,
    pub extraction_failures: BTreeMap<Subgroup, FailureCount>,
}

/// Selection on the fold's inner subset, then the pipeline on its
/// evaluation set.
pub fn run_fold(
    dataset: &[DatasetInstance],
    fold: &Fold,
    candidates: &[Arc<dyn Classifier>],
    chain: &ExtractionChain,
    settings: &RunSettings,
) -> Result<FoldReport, HarnessError> {
    if settings.ensemble_size == 0 {
        return Err(HarnessError::EmptyEnsemble);
    }
    let inner = instances_at(dataset, &fold.inner);
    let selection = select_configs(candidates, &inner, settings.ce_metric, settings.ensemble_size, settings.parallelism)?;
    if selection.chosen.len() < settings.ensemble_size {
        return Err(HarnessError::TooFewClassifiers {
            fold: fold.index,
            usable: selection.chosen.len(),
            needed: settings.ensemble_size,
        });
    }
    let ensemble: Vec<Arc<dyn Classifier>> = selection
        .chosen
        .iter()
        .map(|id| candidates.iter().find(|c| c.id() == id).expect("chosen from candidates").clone())
        .collect();
    let eval = instances_at(dataset, &fold.evaluation);
    let run = run_pipeline(&eval, &ensemble, chain, settings)?;
    Ok(FoldReport { index: fold.index, evaluation_size: eval.len(), inner_size: inner.len(), selection, run })
}

pub fn summarize(settings: &RunSettings, dataset_size: usize, folds: Vec<FoldReport>) -> Result<CvReport, HarnessError> {
    let mut strategies = Vec::new();
    if let Some(first) = folds.first() {
        for s in &first.run.strategies {
            let per_fold: Vec<MetricsReport> =
                folds.iter().filter_map(|f| f.run.strategy(s.strategy).cloned()).collect();
            strategies.push(StrategyAggregate { label: s.label.clone(), strategy: s.strategy, aggregate: aggregate_folds(&per_fold)? });
        }
    }
    let mut tiebreaker = TiebreakerStats { tau: settings.tau, ..Default::default() };
    let mut coalition = CoalitionStats::default();
    let mut extraction_failures: BTreeMap<Subgroup, FailureCount> = BTreeMap::new();
    for f in &folds {
        tiebreaker.add(&f.run.tiebreaker);
        coalition.margin1_instances += f.run.coalition.margin1_instances;
        coalition.chance_percent = f.run.coalition.chance_percent;
        for (id, c) in &f.run.coalition.minority_counts {
            *coalition.minority_counts.entry(id.clone()).or_default() += c;
        }
        for (g, c) in &f.run.extraction_failures {
            let e = extraction_failures.entry(*g).or_default();
            e.instances += c.instances;
            e.failures += c.failures;
        }
    }
    Ok(CvReport { settings: settings.clone(), dataset_size, folds, strategies, tiebreaker, coalition, extraction_failures })
}

/// Full nested cross-validation.
pub fn run_cv(
    dataset: &[DatasetInstance],
    candidates: &[Arc<dyn Classifier>],
    chain: &ExtractionChain,
    settings: &RunSettings,
) -> Result<(FoldPlan, CvReport), HarnessError> {
    let plan = plan_folds(dataset, settings.folds, settings.inner, settings.seed, settings.stratified)?;
    let folds = plan
        .folds
        .iter()
        .map(|f| run_fold(dataset, f, candidates, chain, settings))
        .collect::<Result<Vec<_>, _>>()?;
    let report = summarize(settings, dataset.len(), folds)?;
    Ok((plan, report))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::classify::{simulated_grid, SimulatedBiasParams, SimulatedClassifier};
    use crate::logic::SemanticsMode;

    fn corpus(pairs: usize, seed: u64) -> Vec<DatasetInstance> {
        generate_synthetic(&Lexicon::builtin(), SemanticsMode::SubjectImport, seed, Some(pairs))
            .unwrap()
            .into_iter()
            .map(|i| i.instance)
            .collect()
    }

    fn sims(acc: f64, pull: f64, n: u64) -> Vec<Arc<dyn Classifier>> {
        (0..n)
            .map(|i| Arc::new(SimulatedClassifier { id: format!("sim{i}"), params: SimulatedBiasParams::new(acc, pull, 100 + i) }) as Arc<dyn Classifier>)
            .collect()
    }

    #[test]
    fn selection_ranks_by_score_then_id() {
        let data = corpus(40, 1);
        let refs: Vec<&DatasetInstance> = data.iter().collect();
        let mut c = sims(0.8, 0.3, 3);
        c.push(Arc::new(SimulatedClassifier { id: "perfect-b".into(), params: SimulatedBiasParams::new(1.0, 0.0, 1) }));
        c.push(Arc::new(SimulatedClassifier { id: "perfect-a".into(), params: SimulatedBiasParams::new(1.0, 0.0, 2) }));
        let sel = select_configs(&c, &refs, CeMetricKind::CongruenceGap, 3, Parallelism::Sequential).unwrap();
        assert_eq!(sel.chosen[..2], ["perfect-a".to_string(), "perfect-b".to_string()]);
        assert_eq!(sel.chosen.len(), 3);
        let again = select_configs(&c, &refs, CeMetricKind::CongruenceGap, 3, Parallelism::Rayon { threads: None }).unwrap();
        assert_eq!(sel, again);
    }

    #[test]
    fn pipeline_accounting() {
        let data = corpus(100, 2);
        let refs: Vec<&DatasetInstance> = data.iter().collect();
        let settings = RunSettings::default();
        let r = run_pipeline(&refs, &sims(0.85, 0.3, 5), &ExtractionChain::rule_based(), &settings).unwrap();
        assert!(r.tiebreaker.identities_hold(), "{:?}", r.tiebreaker);
        assert_eq!(r.tiebreaker.total, 200);
        assert_eq!(r.tiebreaker.solver_available, r.tiebreaker.splits);
        assert!(r.extraction_failures.values().all(|f| f.failures == 0));
        assert_eq!(r.coalition.chance_percent, 40.0);
        let seats: usize = r.coalition.minority_counts.values().sum();
        assert_eq!(seats, 2 * r.coalition.margin1_instances);
        assert_eq!(r.strategy(FusionStrategy::Weighted), r.strategy(FusionStrategy::EnsembleOnly));
    }

    #[test]
    fn cv_is_deterministic_across_schedules() {
        let data = corpus(60, 3);
        let grid: Vec<Arc<dyn Classifier>> = simulated_grid(4).iter().map(|c| c.build(None).unwrap()).collect();
        let mut s = RunSettings { inner: 40, ..Default::default() };
        let (_, a) = run_cv(&data, &grid, &ExtractionChain::rule_based(), &s).unwrap();
        s.parallelism = Parallelism::Sequential;
        let (_, b) = run_cv(&data, &grid, &ExtractionChain::rule_based(), &s).unwrap();
        assert_eq!(serde_json::to_string(&a.folds).unwrap(), serde_json::to_string(&b.folds).unwrap());
        assert_eq!(a.folds.len(), 5);
        assert!(a.tiebreaker.identities_hold());
    }

    #[test]
    fn too_few_classifiers() {
        let data = corpus(20, 3);
        let s = RunSettings { inner: 10, ..Default::default() };
        let err = run_cv(&data, &sims(0.9, 0.1, 3), &ExtractionChain::rule_based(), &s).unwrap_err();
        assert!(matches!(err, HarnessError::TooFewClassifiers { needed: 5, usable: 3, .. }));
    }
}
