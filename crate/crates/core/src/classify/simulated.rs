use super::{BackendSpec, Classifier, ClassifierConfig, ParseStage, PromptKind, Vote};
use crate::dataset::{DatasetInstance, Plausibility};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

/// Stand-in for an LLM with content effects. Every draw is a pure function
/// of the seed and the instance id.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SimulatedBiasParams {
    /// Probability of starting from the correct answer.
    pub structural_accuracy: f64,
    /// Probability of then switching to the believability-congruent answer.
    pub believability_pull: f64,
    pub seed: u64,
    /// When set, the pull draw uses this seed instead, so classifiers that
    /// share it are swayed on the same instances.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub shared_bias_seed: Option<u64>,
}

impl SimulatedBiasParams {
    pub fn new(structural_accuracy: f64, believability_pull: f64, seed: u64) -> Self {
        SimulatedBiasParams { structural_accuracy, believability_pull, seed, shared_bias_seed: None }
    }

    pub fn validate(&self) -> Result<(), String> {
        for (name, v) in [("structural_accuracy", self.structural_accuracy), ("believability_pull", self.believability_pull)] {
            if !(0.0..=1.0).contains(&v) {
                return Err(format!("{name} must be within [0, 1], got {v}"));
            }
        }
        Ok(())
    }
}

// FNV-1a; stable across platforms and toolchains, unlike std's hasher.
fn fnv1a(bytes: &[u8]) -> u64 {
    let mut h: u64 = 0xcbf2_9ce4_8422_2325;
    for b in bytes {
        h ^= *b as u64;
        h = h.wrapping_mul(0x0100_0000_01b3);
    }
    h
}

fn instance_rng(seed: u64, id: &str) -> ChaCha8Rng {
    let mut key = [0u8; 32];
    key[..8].copy_from_slice(&seed.to_le_bytes());
    key[8..16].copy_from_slice(&fnv1a(id.as_bytes()).to_le_bytes());
    ChaCha8Rng::from_seed(key)
}

/// Starts from gold with probability `structural_accuracy` (else the flip),
/// then with probability `believability_pull` answers believable → valid,
/// unbelievable → invalid.
pub fn classify_simulated(params: &SimulatedBiasParams, instance: &DatasetInstance) -> Vote {
    let mut rng = instance_rng(params.seed, &instance.id);
    let structural: f64 = rng.gen();
    let mut value = if structural < params.structural_accuracy { instance.gold() } else { 1 - instance.gold() };
    let pull: f64 = match params.shared_bias_seed {
        Some(s) => instance_rng(s, &instance.id).gen(),
        None => rng.gen(),
    };
    if pull < params.believability_pull {
        value = (instance.plausibility == Plausibility::Believable) as u8;
    }
    Vote {
        value,
        raw_response: format!("ANSWER: {}", if value == 1 { "true" } else { "false" }),
        stage: ParseStage::ExplicitAnswer,
        error: false,
        telemetry: None,
    }
}

pub struct SimulatedClassifier {
    pub id: String,
    pub params: SimulatedBiasParams,
}

impl Classifier for SimulatedClassifier {
    fn id(&self) -> &str {
        &self.id
    }

    fn classify(&self, instance: &DatasetInstance) -> Vote {
        classify_simulated(&self.params, instance)
    }
}

/// Twelve simulated (model, prompt) candidates: three model profiles times
/// four prompt kinds, each with its own seed and bias level.
pub fn simulated_grid(seed: u64) -> Vec<ClassifierConfig> {
    // (model, base accuracy, base pull)
    const MODELS: [(&str, f64, f64); 3] = [("model-a", 0.90, 0.10), ("model-b", 0.86, 0.20), ("model-c", 0.84, 0.15)];
    // per-prompt adjustments to accuracy and pull
    const PROMPTS: [(PromptKind, f64, f64); 4] = [
        (PromptKind::ZeroShot, -0.02, 0.04),
        (PromptKind::FewShot, 0.01, 0.02),
        (PromptKind::FewShotCot, 0.03, 0.08),
        (PromptKind::SimpleCot, 0.00, -0.05),
    ];
    let mut out = Vec::with_capacity(12);
    for (mi, (model, acc, pull)) in MODELS.iter().enumerate() {
        for (pi, (prompt, dacc, dpull)) in PROMPTS.iter().enumerate() {
            let slot = (mi * 4 + pi) as u64;
            out.push(ClassifierConfig {
                id: format!("{model}/{}", prompt.id()),
                model: model.to_string(),
                prompt: *prompt,
                temperature: 0.0,
                backend: BackendSpec::Simulated(SimulatedBiasParams::new(
                    (acc + dacc).clamp(0.0, 1.0),
                    (pull + dpull).clamp(0.0, 1.0),
                    seed.wrapping_mul(1000).wrapping_add(slot),
                )),
            });
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    fn corpus() -> Vec<DatasetInstance> {
        (0..200)
            .map(|i| DatasetInstance {
                id: format!("s{i}"),
                text: String::new(),
                valid: i % 2 == 0,
                plausibility: if i % 4 < 2 { Plausibility::Believable } else { Plausibility::Unbelievable },
                pair_id: None,
            })
            .collect()
    }

    #[test]
    fn bias_free_limit_returns_gold() {
        let p = SimulatedBiasParams::new(1.0, 0.0, 3);
        assert!(corpus().iter().all(|i| classify_simulated(&p, i).value == i.gold()));
    }

    #[test]
    fn pure_bias_limit_follows_believability() {
        let p = SimulatedBiasParams::new(1.0, 1.0, 3);
        assert!(corpus()
            .iter()
            .all(|i| classify_simulated(&p, i).value == (i.plausibility == Plausibility::Believable) as u8));
    }

    #[test]
    fn deterministic_per_seed() {
        let p = SimulatedBiasParams::new(0.7, 0.3, 42);
        let a: Vec<u8> = corpus().iter().map(|i| classify_simulated(&p, i).value).collect();
        let b: Vec<u8> = corpus().iter().map(|i| classify_simulated(&p, i).value).collect();
        assert_eq!(a, b);
        let q = SimulatedBiasParams::new(0.7, 0.3, 43);
        let c: Vec<u8> = corpus().iter().map(|i| classify_simulated(&q, i).value).collect();
        assert_ne!(a, c);
    }

    #[test]
    fn accuracy_tracks_parameter() {
        let p = SimulatedBiasParams::new(0.8, 0.0, 9);
        let data = corpus();
        let correct = data.iter().filter(|i| classify_simulated(&p, i).value == i.gold()).count();
        assert!((140..=180).contains(&correct), "{correct}");
    }

    #[test]
    fn shared_bias_seed_correlates_pulls() {
        let mut a = SimulatedBiasParams::new(1.0, 0.5, 1);
        let mut b = SimulatedBiasParams::new(1.0, 0.5, 2);
        a.shared_bias_seed = Some(77);
        b.shared_bias_seed = Some(77);
        for i in corpus() {
            assert_eq!(classify_simulated(&a, &i).value, classify_simulated(&b, &i).value);
        }
    }

    #[test]
    fn grid_has_twelve_valid_configs() {
        let g = simulated_grid(5);
        assert_eq!(g.len(), 12);
        for c in &g {
            c.validate().unwrap();
        }
        let mut ids: Vec<_> = g.iter().map(|c| c.id.clone()).collect();
        ids.dedup();
        assert_eq!(ids.len(), 12);
        assert!(SimulatedBiasParams::new(1.2, 0.0, 0).validate().is_err());
    }
}
