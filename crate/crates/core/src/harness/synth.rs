//! Synthetic corpus: every determinate form rendered as English twice, once
//! with a believable and once with an unbelievable conclusion.

use crate::dataset::{DatasetInstance, Plausibility};
use crate::logic::{Form, Proposition, PropositionType, SemanticsMode, SyllogismStructure, TermId, Verdict};
use crate::parser::term_key;
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

const BUILTIN_LEXICON: &str = include_str!("../../data/lexicon.json");

/// Real-world relation between a subject and a predicate class.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Relation {
    Subset,
    Superset,
    Overlap,
    Disjoint,
}

impl Relation {
    fn reversed(self) -> Relation {
        match self {
            Relation::Subset => Relation::Superset,
            Relation::Superset => Relation::Subset,
            r => r,
        }
    }

    /// Whether a proposition of this type about (subject, predicate) is true
    /// in the world.
    pub fn makes_true(self, t: PropositionType) -> bool {
        use PropositionType::*;
        match (self, t) {
            (Relation::Subset, A | I) => true,
            (Relation::Subset, E | O) => false,
            (Relation::Superset | Relation::Overlap, I | O) => true,
            (Relation::Superset | Relation::Overlap, A | E) => false,
            (Relation::Disjoint, E | O) => true,
            (Relation::Disjoint, A | I) => false,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct LexiconPair {
    pub subject: String,
    pub predicate: String,
    pub relation: Relation,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Lexicon {
    pub middles: Vec<String>,
    pub pairs: Vec<LexiconPair>,
}

impl Lexicon {
    pub fn builtin() -> Lexicon {
        serde_json::from_str(BUILTIN_LEXICON).expect("bundled lexicon parses")
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum SynthError {
    #[error("lexicon has no pair giving a {believable} {ptype} conclusion", believable = if *.1 { "believable" } else { "unbelievable" }, ptype = .0)]
    NoCandidate(PropositionType, bool),
    #[error("lexicon needs at least one middle term distinct from `{0}` and `{1}`")]
    NoMiddle(String, String),
    #[error("mode {0} has no valid forms to sample")]
    NoValidForms(SemanticsMode),
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SyntheticItem {
    pub instance: DatasetInstance,
    pub structure: SyllogismStructure,
    pub form: Form,
}

#[derive(Debug, Clone)]
struct Oriented<'a> {
    subject: &'a str,
    predicate: &'a str,
    relation: Relation,
}

fn capitalize(s: &str) -> String {
    let mut c = s.chars();
    match c.next() {
        Some(f) => f.to_uppercase().chain(c).collect(),
        None => String::new(),
    }
}

/// Renders one proposition with a randomly chosen surface frame, all of
/// which the rule-based parser reads back to the same proposition.
pub fn render_proposition(p: &Proposition, rng: &mut impl Rng) -> String {
    let (s, q) = (p.subject.as_str(), p.predicate.as_str());
    let frames: &[&str] = match p.ptype {
        PropositionType::A => &["all {s} are {p}", "every one of the {s} are {p}", "there are no {s} that are not {p}"],
        PropositionType::E => &["no {s} are {p}", "none of the {s} are {p}", "there are no {s} that are {p}"],
        PropositionType::I => &["some {s} are {p}", "there are some {s} that are {p}"],
        PropositionType::O => &["some {s} are not {p}", "not all {s} are {p}", "there are some {s} that are not {p}"],
    };
    frames.choose(rng).unwrap().replace("{s}", s).replace("{p}", q)
}

const MARKERS: [&str; 5] = ["Therefore,", "Hence,", "Thus,", "Consequently,", "So"];

pub fn render_text(s: &SyllogismStructure, rng: &mut impl Rng) -> String {
    let p1 = capitalize(&render_proposition(&s.premise1, rng));
    let p2 = capitalize(&render_proposition(&s.premise2, rng));
    let c = render_proposition(&s.conclusion, rng);
    format!("{p1}. {p2}. {} {c}.", MARKERS.choose(rng).unwrap())
}

/// Generates the synthetic corpus.
///
/// With `target_pairs = None` every determinate form appears once, and valid
/// forms are cycled until valid and invalid pairs balance. With `Some(n)`,
/// `n / 2` pairs come from valid forms and the rest from invalid ones. Each
/// pair yields a believable and an unbelievable twin with the same form and
/// gold label.
pub fn generate_synthetic(
    lexicon: &Lexicon,
    mode: SemanticsMode,
    seed: u64,
    target_pairs: Option<usize>,
) -> Result<Vec<SyntheticItem>, SynthError> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let oriented: Vec<Oriented> = lexicon
        .pairs
        .iter()
        .flat_map(|p| {
            [
                Oriented { subject: &p.subject, predicate: &p.predicate, relation: p.relation },
                Oriented { subject: &p.predicate, predicate: &p.subject, relation: p.relation.reversed() },
            ]
        })
        .collect();
    for t in PropositionType::ALL {
        for b in [true, false] {
            if !oriented.iter().any(|o| o.relation.makes_true(t) == b) {
                return Err(SynthError::NoCandidate(t, b));
            }
        }
    }

    let mut valid: Vec<Form> = Vec::new();
    let mut invalid: Vec<Form> = Vec::new();
    for f in Form::all() {
        match f.decide(mode) {
            Verdict::Valid => valid.push(f),
            Verdict::Invalid => invalid.push(f),
            Verdict::Indeterminate => {}
        }
    }
    if valid.is_empty() {
        return Err(SynthError::NoValidForms(mode));
    }
    let cycle = |forms: &[Form], n: usize, rng: &mut ChaCha8Rng| -> Vec<Form> {
        let mut out = Vec::with_capacity(n);
        while out.len() < n && !forms.is_empty() {
            let mut round = forms.to_vec();
            round.shuffle(rng);
            out.extend(round.into_iter().take(n - out.len()));
        }
        out
    };
    let mut forms = match target_pairs {
        None => {
            let mut v = cycle(&valid, invalid.len(), &mut rng);
            v.extend(invalid.iter().copied());
            v
        }
        Some(n) => {
            let mut v = cycle(&valid, n / 2, &mut rng);
            v.extend(cycle(&invalid, n - n / 2, &mut rng));
            v
        }
    };
    forms.shuffle(&mut rng);

    let mut items = Vec::with_capacity(forms.len() * 2);
    for (i, form) in forms.into_iter().enumerate() {
        let gold = form.decide(mode) == Verdict::Valid;
        let minor_first = rng.gen_bool(0.5);
        let pair_id = format!("pair-{i:04}");
        for believable in [true, false] {
            let ctype = form.mood.0[2];
            let candidates: Vec<&Oriented> = oriented.iter().filter(|o| o.relation.makes_true(ctype) == believable).collect();
            let o = candidates.choose(&mut rng).unwrap();
            let (ks, kp) = (term_key(o.subject), term_key(o.predicate));
            let middles: Vec<&String> = lexicon.middles.iter().filter(|m| term_key(m) != ks && term_key(m) != kp).collect();
            let middle = middles
                .choose(&mut rng)
                .ok_or_else(|| SynthError::NoMiddle(o.subject.to_string(), o.predicate.to_string()))?;
            let structure =
                form.instantiate(&TermId::new(o.subject), &TermId::new(middle.as_str()), &TermId::new(o.predicate), minor_first);
            let plausibility = if believable { Plausibility::Believable } else { Plausibility::Unbelievable };
            let instance = DatasetInstance {
                id: format!("syn-{i:04}-{}", if believable { 'b' } else { 'u' }),
                text: render_text(&structure, &mut rng),
                valid: gold,
                plausibility,
                pair_id: Some(pair_id.clone()),
            };
            items.push(SyntheticItem { instance, structure, form });
        }
    }
    Ok(items)
}
