//! Accuracy, subgroup accuracy, content effect and the combined score.
//!
//! The combined score is `accuracy / (1 + ln(1 + CE))`. How CE itself is
//! measured is pluggable ([`CeMetricKind`]); externally computed values can
//! be injected unchanged.

use crate::dataset::{DatasetInstance, Plausibility};
use serde::{Deserialize, Serialize};
use std::collections::BTreeMap;
use std::fmt;
use thiserror::Error;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Subgroup {
    VB,
    VU,
    IB,
    IU,
}

impl Subgroup {
    pub const ALL: [Subgroup; 4] = [Subgroup::VB, Subgroup::VU, Subgroup::IB, Subgroup::IU];

    pub fn of(valid: bool, plausibility: Plausibility) -> Subgroup {
        match (valid, plausibility) {
            (true, Plausibility::Believable) => Subgroup::VB,
            (true, Plausibility::Unbelievable) => Subgroup::VU,
            (false, Plausibility::Believable) => Subgroup::IB,
            (false, Plausibility::Unbelievable) => Subgroup::IU,
        }
    }

    /// Validity and believability agree (VB, IU).
    pub fn is_congruent(self) -> bool {
        matches!(self, Subgroup::VB | Subgroup::IU)
    }
}

impl fmt::Display for Subgroup {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Debug::fmt(self, f)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
#[derive(Default)]
pub enum CeMetricKind {
    /// |acc(VB ∪ IU) − acc(VU ∪ IB)| in percentage points.
    #[default]
    CongruenceGap,
    /// Percentage of believable/unbelievable pairs whose two predictions differ.
    PairFlipRate,
    /// A value computed elsewhere, e.g. by official task scoring.
    External { value: f64 },
}


impl CeMetricKind {
    pub fn id(&self) -> &'static str {
        match self {
            CeMetricKind::CongruenceGap => "congruence-gap",
            CeMetricKind::PairFlipRate => "pair-flip-rate",
            CeMetricKind::External { .. } => "external",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum MetricsError {
    #[error("no predictions to score")]
    Empty,
    #[error("{0} predictions but {1} labels")]
    LengthMismatch(usize, usize),
    #[error("content effect must be a nonnegative number, got {0}")]
    NegativeCe(f64),
    #[error("pair-flip content effect needs instances with pair ids forming believable/unbelievable pairs")]
    MissingPairs,
}

fn check_lengths(preds: usize, golds: usize) -> Result<(), MetricsError> {
    if preds != golds {
        return Err(MetricsError::LengthMismatch(preds, golds));
    }
    if preds == 0 {
        return Err(MetricsError::Empty);
    }
    Ok(())
}

/// Percent of predictions equal to the gold label.
pub fn accuracy(preds: &[u8], golds: &[u8]) -> Result<f64, MetricsError> {
    check_lengths(preds.len(), golds.len())?;
    let correct = preds.iter().zip(golds).filter(|(p, g)| p == g).count();
    Ok(100.0 * correct as f64 / preds.len() as f64)
}

/// Per-subgroup accuracy. A subgroup with no instances is `None`.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct SubgroupAccuracy {
    pub vb: Option<f64>,
    pub vu: Option<f64>,
    pub ib: Option<f64>,
    pub iu: Option<f64>,
}

impl SubgroupAccuracy {
    pub fn get(&self, g: Subgroup) -> Option<f64> {
        match g {
            Subgroup::VB => self.vb,
            Subgroup::VU => self.vu,
            Subgroup::IB => self.ib,
            Subgroup::IU => self.iu,
        }
    }

    fn slot(&mut self, g: Subgroup) -> &mut Option<f64> {
        match g {
            Subgroup::VB => &mut self.vb,
            Subgroup::VU => &mut self.vu,
            Subgroup::IB => &mut self.ib,
            Subgroup::IU => &mut self.iu,
        }
    }
}

pub fn subgroup_accuracy(preds: &[u8], golds: &[u8], plausibility: &[Plausibility]) -> Result<SubgroupAccuracy, MetricsError> {
    check_lengths(preds.len(), golds.len())?;
    check_lengths(preds.len(), plausibility.len())?;
    let mut counts: BTreeMap<Subgroup, (usize, usize)> = BTreeMap::new();
    for ((p, g), pl) in preds.iter().zip(golds).zip(plausibility) {
        let e = counts.entry(Subgroup::of(*g == 1, *pl)).or_default();
        e.0 += (p == g) as usize;
        e.1 += 1;
    }
    let mut out = SubgroupAccuracy::default();
    for (g, (correct, total)) in counts {
        *out.slot(g) = Some(100.0 * correct as f64 / total as f64);
    }
    Ok(out)
}

fn congruence_gap(preds: &[u8], instances: &[DatasetInstance]) -> f64 {
    let (mut cong, mut incong) = ((0usize, 0usize), (0usize, 0usize));
    for (p, inst) in preds.iter().zip(instances) {
        let side = if inst.subgroup().is_congruent() { &mut cong } else { &mut incong };
        side.0 += (*p == inst.gold()) as usize;
        side.1 += 1;
    }
    // one side absent: nothing to compare
    if cong.1 == 0 || incong.1 == 0 {
        return 0.0;
    }
    let acc = |(c, n): (usize, usize)| 100.0 * c as f64 / n as f64;
    (acc(cong) - acc(incong)).abs()
}

fn pair_flip_rate(preds: &[u8], instances: &[DatasetInstance]) -> Result<f64, MetricsError> {
    let mut pairs: BTreeMap<&str, (Option<u8>, Option<u8>)> = BTreeMap::new();
    for (p, inst) in preds.iter().zip(instances) {
        if let Some(id) = inst.pair_id.as_deref() {
            let e = pairs.entry(id).or_default();
            match inst.plausibility {
                Plausibility::Believable => e.0 = Some(*p),
                Plausibility::Unbelievable => e.1 = Some(*p),
            }
        }
    }
    let complete: Vec<(u8, u8)> = pairs.values().filter_map(|(b, u)| Some(((*b)?, (*u)?))).collect();
    if complete.is_empty() {
        return Err(MetricsError::MissingPairs);
    }
    let flips = complete.iter().filter(|(b, u)| b != u).count();
    Ok(100.0 * flips as f64 / complete.len() as f64)
}

pub fn content_effect(preds: &[u8], instances: &[DatasetInstance], kind: CeMetricKind) -> Result<f64, MetricsError> {
    check_lengths(preds.len(), instances.len())?;
    match kind {
        CeMetricKind::CongruenceGap => Ok(congruence_gap(preds, instances)),
        CeMetricKind::PairFlipRate => pair_flip_rate(preds, instances),
        CeMetricKind::External { value } => {
            if value.is_nan() || value < 0.0 {
                Err(MetricsError::NegativeCe(value))
            } else {
                Ok(value)
            }
        }
    }
}

/// `accuracy / (1 + ln(1 + ce))`, natural logarithm.
pub fn combined_score(accuracy: f64, ce: f64) -> Result<f64, MetricsError> {
    if ce.is_nan() || ce < 0.0 {
        return Err(MetricsError::NegativeCe(ce));
    }
    Ok(accuracy / (1.0 + ce.ln_1p()))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MetricsReport {
    pub n: usize,
    pub accuracy: f64,
    pub subgroup_accuracy: SubgroupAccuracy,
    pub content_effect: f64,
    pub combined_score: f64,
    pub ce_metric: CeMetricKind,
}

/// Scores predictions against instances with every metric at once.
pub fn evaluate(preds: &[u8], instances: &[DatasetInstance], kind: CeMetricKind) -> Result<MetricsReport, MetricsError> {
    let golds: Vec<u8> = instances.iter().map(DatasetInstance::gold).collect();
    let plaus: Vec<Plausibility> = instances.iter().map(|i| i.plausibility).collect();
    let accuracy = accuracy(preds, &golds)?;
    let content_effect = content_effect(preds, instances, kind)?;
    Ok(MetricsReport {
        n: preds.len(),
        accuracy,
        subgroup_accuracy: subgroup_accuracy(preds, &golds, &plaus)?,
        content_effect,
        combined_score: combined_score(accuracy, content_effect)?,
        ce_metric: kind,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MeanStd {
    pub mean: f64,
    /// Sample standard deviation; 0 for a single value.
    pub std: f64,
}

impl MeanStd {
    pub fn of(values: &[f64]) -> Option<MeanStd> {
        if values.is_empty() {
            return None;
        }
        let n = values.len() as f64;
        let mean = values.iter().sum::<f64>() / n;
        let std = if values.len() < 2 {
            0.0
        } else {
            (values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (n - 1.0)).sqrt()
        };
        Some(MeanStd { mean, std })
    }
}

impl fmt::Display for MeanStd {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let p = f.precision().unwrap_or(2);
        write!(f, "{:.p$}±{:.p$}", self.mean, self.std)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AggregateReport {
    pub folds: usize,
    pub accuracy: MeanStd,
    pub content_effect: MeanStd,
    /// Mean of per-fold scores, not the score of the mean accuracy and CE.
    pub combined_score: MeanStd,
    pub subgroup_accuracy: BTreeMap<Subgroup, MeanStd>,
}

pub fn aggregate_folds(folds: &[MetricsReport]) -> Result<AggregateReport, MetricsError> {
    if folds.is_empty() {
        return Err(MetricsError::Empty);
    }
    let field = |f: fn(&MetricsReport) -> f64| MeanStd::of(&folds.iter().map(f).collect::<Vec<_>>()).expect("nonempty");
    let mut subgroup_accuracy = BTreeMap::new();
    for g in Subgroup::ALL {
        let vals: Vec<f64> = folds.iter().filter_map(|r| r.subgroup_accuracy.get(g)).collect();
        if let Some(ms) = MeanStd::of(&vals) {
            subgroup_accuracy.insert(g, ms);
        }
    }
    Ok(AggregateReport {
        folds: folds.len(),
        accuracy: field(|r| r.accuracy),
        content_effect: field(|r| r.content_effect),
        combined_score: field(|r| r.combined_score),
        subgroup_accuracy,
    })
}
