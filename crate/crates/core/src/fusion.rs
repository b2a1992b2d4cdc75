//! Vote aggregation and the fusion strategies that combine an ensemble's
//! majority with the solver's verdict.

use crate::logic::Verdict;
use serde::{Deserialize, Serialize};
use std::fmt;

/// Binary votes (1 = valid) of n classifiers, ordered by classifier rank.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct VoteRecord {
    pub votes: Vec<u8>,
    pub sum: usize,
    /// `|2·sum − n|`
    pub margin: usize,
    pub majority: u8,
}

impl VoteRecord {
    pub fn n(&self) -> usize {
        self.votes.len()
    }

    /// Indices of classifiers voting against the majority.
    pub fn minority(&self) -> impl Iterator<Item = usize> + '_ {
        self.votes.iter().enumerate().filter(move |(_, v)| **v != self.majority).map(|(i, _)| i)
    }
}

/// Majority is strict; an exact tie on even n goes to invalid.
pub fn aggregate(votes: &[u8]) -> VoteRecord {
    assert!(!votes.is_empty(), "cannot aggregate an empty vote list");
    let n = votes.len();
    let sum = votes.iter().filter(|v| **v != 0).count();
    VoteRecord {
        votes: votes.iter().map(|v| (*v != 0) as u8).collect(),
        sum,
        margin: (2 * sum).abs_diff(n),
        majority: (2 * sum > n) as u8,
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(tag = "strategy", rename_all = "kebab-case")]
pub enum FusionStrategy {
    EnsembleOnly,
    /// Solver verdict when the margin is at most `tau` and the verdict is
    /// determinate, otherwise the majority.
    Tiebreaker { tau: usize },
    /// The solver adds one vote; a resulting tie keeps the ensemble majority.
    Weighted,
    /// Solver verdict whenever it is determinate.
    Veto,
    /// Tiebreaker with a wider threshold (default 3).
    ConfidenceThreshold { tau: usize },
    /// Tiebreaker(1) over the `k` best-ranked classifiers only.
    TopKSolver { k: usize },
    /// Solver verdict, majority when the solver abstains.
    SolverOnly,
}

impl FusionStrategy {
    pub const TIEBREAKER: FusionStrategy = FusionStrategy::Tiebreaker { tau: 1 };

    /// The strategies compared in the standard strategy table.
    pub fn standard_set() -> Vec<FusionStrategy> {
        vec![
            FusionStrategy::EnsembleOnly,
            FusionStrategy::Tiebreaker { tau: 1 },
            FusionStrategy::Weighted,
            FusionStrategy::Veto,
            FusionStrategy::ConfidenceThreshold { tau: 3 },
            FusionStrategy::TopKSolver { k: 3 },
            FusionStrategy::SolverOnly,
        ]
    }

    pub fn label(&self) -> String {
        match self {
            FusionStrategy::EnsembleOnly => "ensemble".into(),
            FusionStrategy::Tiebreaker { tau } => format!("tiebreaker(tau={tau})"),
            FusionStrategy::Weighted => "weighted".into(),
            FusionStrategy::Veto => "veto".into(),
            FusionStrategy::ConfidenceThreshold { tau } => format!("confidence(tau={tau})"),
            FusionStrategy::TopKSolver { k } => format!("top{k}+solver"),
            FusionStrategy::SolverOnly => "solver-only".into(),
        }
    }
}

impl fmt::Display for FusionStrategy {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.label())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum PredictionSource {
    Ensemble,
    Solver,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct FusedPrediction {
    pub prediction: u8,
    pub source: PredictionSource,
    /// Margin of the vote record the strategy actually used.
    pub margin: usize,
    /// Whether the strategy's rule asked for the solver on this instance.
    pub consulted: bool,
    pub solver: Verdict,
}

fn tiebreak(record: &VoteRecord, solver: Verdict, tau: usize) -> FusedPrediction {
    let consulted = record.margin <= tau;
    match (consulted, solver.as_vote()) {
        (true, Some(z)) => FusedPrediction { prediction: z, source: PredictionSource::Solver, margin: record.margin, consulted, solver },
        _ => FusedPrediction { prediction: record.majority, source: PredictionSource::Ensemble, margin: record.margin, consulted, solver },
    }
}

fn solver_first(record: &VoteRecord, solver: Verdict) -> FusedPrediction {
    match solver.as_vote() {
        Some(z) => FusedPrediction { prediction: z, source: PredictionSource::Solver, margin: record.margin, consulted: true, solver },
        None => FusedPrediction { prediction: record.majority, source: PredictionSource::Ensemble, margin: record.margin, consulted: true, solver },
    }
}

pub fn fuse(record: &VoteRecord, solver: Verdict, strategy: FusionStrategy) -> FusedPrediction {
    match strategy {
        FusionStrategy::EnsembleOnly => FusedPrediction {
            prediction: record.majority,
            source: PredictionSource::Ensemble,
            margin: record.margin,
            consulted: false,
            solver,
        },
        FusionStrategy::Tiebreaker { tau } | FusionStrategy::ConfidenceThreshold { tau } => tiebreak(record, solver, tau),
        FusionStrategy::Weighted => {
            let (sum, n) = match solver.as_vote() {
                Some(z) => (record.sum + z as usize, record.n() + 1),
                None => (record.sum, record.n()),
            };
            let prediction = match (2 * sum).cmp(&n) {
                std::cmp::Ordering::Greater => 1,
                std::cmp::Ordering::Less => 0,
                std::cmp::Ordering::Equal => record.majority,
            };
            let source = if prediction == record.majority { PredictionSource::Ensemble } else { PredictionSource::Solver };
            FusedPrediction { prediction, source, margin: record.margin, consulted: solver.is_determinate(), solver }
        }
        FusionStrategy::Veto | FusionStrategy::SolverOnly => solver_first(record, solver),
        FusionStrategy::TopKSolver { k } => {
            let k = k.clamp(1, record.n());
            tiebreak(&aggregate(&record.votes[..k]), solver, 1)
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const VERDICTS: [Verdict; 3] = [Verdict::Valid, Verdict::Invalid, Verdict::Indeterminate];

    fn all_vote_vectors(n: usize) -> impl Iterator<Item = Vec<u8>> {
        (0..1u32 << n).map(move |bits| (0..n).map(|i| (bits >> i & 1) as u8).collect())
    }

    #[test]
    fn aggregate_examples() {
        let r = aggregate(&[1, 1, 1, 1, 1]);
        assert_eq!((r.sum, r.margin, r.majority), (5, 5, 1));
        assert_eq!(aggregate(&[1, 1, 1, 1, 0]).margin, 3);
        let r = aggregate(&[1, 1, 0, 0, 1]);
        assert_eq!((r.sum, r.margin, r.majority), (3, 1, 1));
        let tie = aggregate(&[1, 0, 1, 0]);
        assert_eq!((tie.margin, tie.majority), (0, 0));
        assert_eq!(aggregate(&[1, 1, 0, 0, 1]).minority().collect::<Vec<_>>(), vec![2, 3]);
    }

    #[test]
    fn tiebreaker_examples() {
        let split = aggregate(&[1, 1, 1, 0, 0]);
        let f = fuse(&split, Verdict::Invalid, FusionStrategy::TIEBREAKER);
        assert_eq!((f.prediction, f.source), (0, PredictionSource::Solver));
        let four_one = aggregate(&[1, 1, 1, 1, 0]);
        assert_eq!(fuse(&four_one, Verdict::Invalid, FusionStrategy::TIEBREAKER).prediction, 1);
        let f = fuse(&split, Verdict::Indeterminate, FusionStrategy::TIEBREAKER);
        assert_eq!((f.prediction, f.source), (1, PredictionSource::Ensemble));
        assert!(f.consulted);
    }

    #[test]
    fn weighted_keeps_majority_on_tie() {
        let split = aggregate(&[1, 1, 1, 0, 0]);
        let f = fuse(&split, Verdict::Invalid, FusionStrategy::Weighted);
        assert_eq!((f.prediction, f.source), (1, PredictionSource::Ensemble));
    }

    #[test]
    fn weighted_can_move_even_ties() {
        let tie = aggregate(&[1, 0, 1, 0]);
        assert_eq!(fuse(&tie, Verdict::Valid, FusionStrategy::Weighted).prediction, 1);
    }

    #[test]
    fn top_k_uses_leading_votes() {
        // full ensemble 3-2 valid; top three unanimous invalid
        let r = aggregate(&[0, 0, 0, 1, 1]);
        let f = fuse(&r, Verdict::Valid, FusionStrategy::TopKSolver { k: 3 });
        assert_eq!((f.prediction, f.margin), (0, 3));
        let r = aggregate(&[1, 0, 0, 1, 1]);
        let f = fuse(&r, Verdict::Valid, FusionStrategy::TopKSolver { k: 3 });
        assert_eq!((f.prediction, f.margin, f.source), (1, 1, PredictionSource::Solver));
    }

    #[test]
    fn exhaustive_fusion_algebra_n5() {
        for votes in all_vote_vectors(5) {
            let r = aggregate(&votes);
            assert!([1, 3, 5].contains(&r.margin));
            for z in VERDICTS {
                let ens = fuse(&r, z, FusionStrategy::EnsembleOnly);
                let tb = fuse(&r, z, FusionStrategy::TIEBREAKER);
                let expected = if r.margin <= 1 && z.is_determinate() { z.as_vote().unwrap() } else { r.majority };
                assert_eq!(tb.prediction, expected);
                if tb.prediction != ens.prediction {
                    assert!(r.margin <= 1 && z.is_determinate());
                }
                assert_eq!(fuse(&r, z, FusionStrategy::Weighted).prediction, ens.prediction);
                let conf = fuse(&r, z, FusionStrategy::ConfidenceThreshold { tau: 3 });
                assert!(!tb.consulted || conf.consulted);
                let veto = fuse(&r, z, FusionStrategy::Veto);
                assert_eq!(veto.prediction, z.as_vote().unwrap_or(r.majority));
                assert_eq!(fuse(&r, z, FusionStrategy::SolverOnly), veto);
                for f in [tb, conf, veto] {
                    if f.source == PredictionSource::Solver {
                        assert!(f.consulted && z.is_determinate());
                    }
                }
            }
        }
    }
}
