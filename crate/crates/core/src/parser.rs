//! Template-driven parser from syllogism text to [`SyllogismStructure`].
//!
//! The parser knows a closed set of quantifier frames and copulas. Anything
//! outside them fails with a typed reason instead of a guess.

use crate::logic::{Proposition, PropositionType, StructureError, SyllogismStructure, TermId};
use once_cell::sync::Lazy;
use regex::Regex;
use serde::{Deserialize, Serialize};
use std::fmt;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ParseFailure {
    NoConclusionMarker,
    UnrecognizedQuantifier,
    TermMismatch,
    SentenceCount,
}

impl ParseFailure {
    pub fn code(self) -> &'static str {
        match self {
            Self::NoConclusionMarker => "no-conclusion-marker",
            Self::UnrecognizedQuantifier => "unrecognized-quantifier",
            Self::TermMismatch => "term-mismatch",
            Self::SentenceCount => "sentence-count",
        }
    }
}

impl fmt::Display for ParseFailure {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.code())
    }
}

impl std::error::Error for ParseFailure {}

impl From<StructureError> for ParseFailure {
    fn from(_: StructureError) -> Self {
        ParseFailure::TermMismatch
    }
}

pub type ParseResult = Result<SyllogismStructure, ParseFailure>;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SplitText {
    pub premises: [String; 2],
    pub conclusion: String,
}

static MARKER: Lazy<Regex> = Lazy::new(|| {
    Regex::new(r"(?i)(?:^|[.!?;,]\s*)(?:(?:therefore|hence|thus|consequently|so)\b|∴)\s*[,:]?\s*").unwrap()
});
static SENTENCE_END: Lazy<Regex> = Lazy::new(|| Regex::new(r"[.!?;]+").unwrap());

fn trim_clause(s: &str) -> &str {
    s.trim().trim_end_matches(['.', '!', '?', ';', ',']).trim()
}

/// Splits text into two premises and the clause after the first conclusion
/// marker (therefore, hence, thus, consequently, so, ∴).
pub fn split_and_find_conclusion(text: &str) -> Result<SplitText, ParseFailure> {
    let m = MARKER.find(text).ok_or(ParseFailure::NoConclusionMarker)?;
    let before = &text[..m.start()];
    let after = &text[m.end()..];

    let conclusion_parts: Vec<&str> = SENTENCE_END.split(after).map(str::trim).filter(|s| !s.is_empty()).collect();
    if conclusion_parts.len() != 1 {
        return Err(ParseFailure::SentenceCount);
    }
    let mut premises: Vec<&str> = SENTENCE_END.split(before).map(trim_clause).filter(|s| !s.is_empty()).collect();
    if premises.len() == 1 {
        if let Some((a, b)) = premises[0].split_once(", and ") {
            premises = vec![a.trim(), b.trim()];
        }
    }
    match premises[..] {
        [a, b] => Ok(SplitText { premises: [a.to_string(), b.to_string()], conclusion: trim_clause(conclusion_parts[0]).to_string() }),
        _ => Err(ParseFailure::SentenceCount),
    }
}

static LEADING_ARTICLE: Lazy<Regex> = Lazy::new(|| Regex::new(r"^(?:(?:a|an|the)\s+)+").unwrap());
static FILLER_PREFIX: Lazy<Regex> = Lazy::new(|| {
    Regex::new(r"^(?:single\s+|one\s+of\s+the\s+|things?\s+(?:that|which)\s+(?:is|are)\s+(?:(?:a|an|the)\s+)?|things?\s+)").unwrap()
});
static FILLER_SUFFIX: Lazy<Regex> = Lazy::new(|| Regex::new(r"\s+(?:things?|ones?|objects? of any kind)$").unwrap());

/// Lowercases, collapses whitespace, strips punctuation at the edges,
/// leading articles and generic nouns like "single thing".
pub fn normalize_term(raw: &str) -> String {
    let lowered = raw.to_lowercase();
    let mut s: String = lowered
        .trim_matches(|c: char| !c.is_alphanumeric())
        .split_whitespace()
        .collect::<Vec<_>>()
        .join(" ");
    loop {
        let before = s.clone();
        s = LEADING_ARTICLE.replace(&s, "").into_owned();
        if let Some(m) = FILLER_PREFIX.find(&s) {
            if m.end() < s.len() {
                s = s[m.end()..].to_string();
            }
        }
        if let Some(m) = FILLER_SUFFIX.find(&s) {
            if m.start() > 0 {
                s.truncate(m.start());
            }
        }
        if s == before {
            return s;
        }
    }
}

const IRREGULAR: &[(&str, &str)] = &[
    ("men", "man"),
    ("women", "woman"),
    ("people", "person"),
    ("children", "child"),
    ("mice", "mouse"),
    ("geese", "goose"),
    ("teeth", "tooth"),
    ("feet", "foot"),
    ("oxen", "ox"),
    ("cacti", "cactus"),
    ("fungi", "fungus"),
    ("wolves", "wolf"),
    ("knives", "knife"),
    ("leaves", "leaf"),
    ("lives", "life"),
    ("wives", "wife"),
    ("halves", "half"),
    ("shelves", "shelf"),
    ("calves", "calf"),
    ("thieves", "thief"),
    ("elves", "elf"),
];

const INVARIANT: &[&str] = &["species", "series", "news", "physics", "mathematics", "always", "is", "was", "has", "its"];

fn singular(word: &str) -> String {
    if let Some((_, s)) = IRREGULAR.iter().find(|(p, _)| *p == word) {
        return s.to_string();
    }
    if INVARIANT.contains(&word) || word.len() <= 3 {
        return word.to_string();
    }
    if let Some(stem) = word.strip_suffix("ies") {
        return format!("{stem}y");
    }
    for suffix in ["sses", "xes", "ches", "shes", "zes"] {
        if word.ends_with(suffix) {
            return word[..word.len() - 2].to_string();
        }
    }
    if word.ends_with("ss") || word.ends_with("us") || word.ends_with("is") {
        return word.to_string();
    }
    word.strip_suffix('s').unwrap_or(word).to_string()
}

/// Unification key: the normalized term with its head (last) word singular.
pub fn term_key(normalized: &str) -> String {
    match normalized.rsplit_once(' ') {
        Some((head, last)) => format!("{head} {}", singular(last)),
        None => singular(normalized),
    }
}

/// A proposition as read from one clause, before term unification.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RawProposition {
    pub ptype: PropositionType,
    pub subject: String,
    pub predicate: String,
}

impl RawProposition {
    pub fn into_proposition(self) -> Proposition {
        Proposition::new(self.ptype, self.subject, self.predicate)
    }
}

enum Body {
    /// "S <copula> P"; the copula's polarity picks between the two types.
    Copula { positive: PropositionType, negative: Option<PropositionType> },
    /// "S P" where both terms carry an article, as in "is a flower a tree".
    ArticlePair(PropositionType),
    /// Both terms are captured by the frame itself.
    Captured(PropositionType),
}

struct Frame {
    re: Regex,
    body: Body,
}

fn frame(pattern: &str, body: Body) -> Frame {
    Frame { re: Regex::new(pattern).unwrap(), body }
}

// Ordered: the first matching frame wins.
static FRAMES: Lazy<Vec<Frame>> = Lazy::new(|| {
    use PropositionType::*;
    vec![
        frame(
            r"^there (?:are|is|exist|exists) no (.+?) (?:that|which|who) (?:are|is) not (.+)$",
            Body::Captured(A),
        ),
        frame(r"^there (?:are|is|exist|exists) no (.+?) (?:that|which|who) (?:are|is) (.+)$", Body::Captured(E)),
        frame(r"^no (.+?) (?:is|are) not (.+)$", Body::Captured(A)),
        frame(r"^under no circumstances (?:is|are) (.+)$", Body::ArticlePair(E)),
        frame(r"^nothing (?:that|which) (?:is|are) (.+)$", Body::Copula { positive: E, negative: None }),
        frame(r"^(?:no|none of the|not a single|not one|not any) (.+)$", Body::Copula { positive: E, negative: None }),
        frame(
            r"^(?:anything|everything|whatever|each thing|any thing) (?:that|which) (?:is|are) (.+)$",
            Body::Copula { positive: A, negative: None },
        ),
        frame(r"^not (?:all|every|each) (.+)$", Body::Copula { positive: O, negative: None }),
        frame(r"^(?:all|every|each|any) (.+)$", Body::Copula { positive: A, negative: None }),
        frame(
            r"^there (?:are|is|exist|exists) (?:some |an? )?(.+?) (?:that|which|who) (?:are|is) not (.+)$",
            Body::Captured(O),
        ),
        frame(r"^there (?:are|is|exist|exists) (?:some |an? )?(.+?) (?:that|which|who) (?:are|is) (.+)$", Body::Captured(I)),
        frame(
            r"^(?:some|at least one|at least some|a few|certain) (.+)$",
            Body::Copula { positive: I, negative: Some(O) },
        ),
    ]
});

static COPULA: Lazy<Regex> = Lazy::new(|| {
    Regex::new(
        r"\s(?:(?:is|are)(\s+not)?(?:\s+(?:members?|part|a kind|a type|a subset) of(?:\s+the\s+(?:class|category|group|set) of)?)?|(?:belongs?|do(?:es)?\s+not\s+belong) to (?:the )?(?:class|category|group|set) of)\s",
    )
    .unwrap()
});
static RELATIVE: Lazy<Regex> = Lazy::new(|| Regex::new(r"(?:that|which|who)$").unwrap());
static ARTICLE_PAIR: Lazy<Regex> = Lazy::new(|| Regex::new(r"^(?:an?|the) (.+?) (?:an?|the) (.+)$").unwrap());

/// Finds the main copula, skipping ones inside a relative clause such as
/// "things that are red are ...". Returns (subject, negated, predicate).
fn split_copula(body: &str) -> Option<(&str, bool, &str)> {
    for caps in COPULA.captures_iter(body) {
        let m = caps.get(0).unwrap();
        let subject = body[..m.start()].trim();
        if subject.is_empty() || RELATIVE.is_match(subject) {
            continue;
        }
        let negated = caps.get(1).is_some() || m.as_str().contains("not");
        let predicate = body[m.end()..].trim();
        if predicate.is_empty() {
            return None;
        }
        return Some((subject, negated, predicate));
    }
    None
}

fn raw(ptype: PropositionType, subject: &str, predicate: &str) -> Result<RawProposition, ParseFailure> {
    let subject = normalize_term(subject);
    let predicate = normalize_term(predicate);
    if subject.is_empty() || predicate.is_empty() {
        return Err(ParseFailure::UnrecognizedQuantifier);
    }
    Ok(RawProposition { ptype, subject, predicate })
}

/// Maps one clause to a typed proposition over normalized terms.
pub fn classify_proposition(sentence: &str) -> Result<RawProposition, ParseFailure> {
    let lowered = sentence.to_lowercase();
    let clause = trim_clause(&lowered).split_whitespace().collect::<Vec<_>>().join(" ");
    for f in FRAMES.iter() {
        let Some(caps) = f.re.captures(&clause) else { continue };
        return match &f.body {
            Body::Captured(t) => raw(*t, &caps[1], &caps[2]),
            Body::ArticlePair(t) => {
                let pair = ARTICLE_PAIR.captures(&caps[1]).ok_or(ParseFailure::UnrecognizedQuantifier)?;
                raw(*t, &pair[1], &pair[2])
            }
            Body::Copula { positive, negative } => {
                let (s, negated, p) = split_copula(&caps[1]).ok_or(ParseFailure::UnrecognizedQuantifier)?;
                let t = match (negated, negative) {
                    (false, _) => *positive,
                    (true, Some(n)) => *n,
                    (true, None) => return Err(ParseFailure::UnrecognizedQuantifier),
                };
                raw(t, s, p)
            }
        };
    }
    Err(ParseFailure::UnrecognizedQuantifier)
}

/// Merges surface variants (plural/singular, generic nouns) into exactly
/// three terms. Each term keeps the spelling of its first appearance.
pub fn unify_terms(props: [RawProposition; 3]) -> ParseResult {
    let mut keys: Vec<(String, String)> = Vec::with_capacity(3);
    let mut canonical = |t: &str| -> String {
        let key = term_key(t);
        match keys.iter().find(|(k, _)| *k == key) {
            Some((_, c)) => c.clone(),
            None => {
                keys.push((key, t.to_string()));
                t.to_string()
            }
        }
    };
    let [a, b, c] = props.map(|p| Proposition {
        ptype: p.ptype,
        subject: TermId::new(canonical(&p.subject)),
        predicate: TermId::new(canonical(&p.predicate)),
    });
    if keys.len() != 3 {
        return Err(ParseFailure::TermMismatch);
    }
    Ok(SyllogismStructure::new(a, b, c)?)
}

pub fn parse_syllogism(text: &str) -> ParseResult {
    let split = split_and_find_conclusion(text)?;
    let p1 = classify_proposition(&split.premises[0])?;
    let p2 = classify_proposition(&split.premises[1])?;
    let c = classify_proposition(&split.conclusion)?;
    unify_terms([p1, p2, c])
}

#[cfg(test)]
mod tests {
    use super::*;
    use PropositionType::*;

    fn prop(t: PropositionType, s: &str, p: &str) -> RawProposition {
        RawProposition { ptype: t, subject: s.into(), predicate: p.into() }
    }

    #[test]
    fn split_canonical_template() {
        let s = split_and_find_conclusion("All A are B. All B are C. Therefore, all A are C.").unwrap();
        assert_eq!(s.premises, ["All A are B".to_string(), "All B are C".to_string()]);
        assert_eq!(s.conclusion, "all A are C");
    }

    #[test]
    fn split_figure_1b() {
        let s = split_and_find_conclusion(
            "Some fish are penguins. All penguins belong to the class of birds. Therefore, some birds are fish.",
        )
        .unwrap();
        assert_eq!(s.conclusion, "some birds are fish");
    }

    #[test]
    fn split_errors() {
        assert_eq!(split_and_find_conclusion("All A are B. All B are C."), Err(ParseFailure::NoConclusionMarker));
        assert_eq!(
            split_and_find_conclusion("All A are B. Therefore, all A are C."),
            Err(ParseFailure::SentenceCount)
        );
        assert_eq!(
            split_and_find_conclusion("All A are B. All B are C. Thus all A are C. All C are D."),
            Err(ParseFailure::SentenceCount)
        );
        // "so" inside a clause is not a marker
        assert_eq!(split_and_find_conclusion("All A are so B. All B are C."), Err(ParseFailure::NoConclusionMarker));
    }

    #[test]
    fn split_other_markers() {
        for m in ["Hence", "Thus", "Consequently", "So", "∴"] {
            let s = split_and_find_conclusion(&format!("All a are b. All b are c. {m} all a are c.")).unwrap();
            assert_eq!(s.conclusion, "all a are c", "{m}");
        }
        let s = split_and_find_conclusion("All a are b, and all b are c; hence, all a are c").unwrap();
        assert_eq!(s.premises[1], "all b are c");
    }

    #[test]
    fn example_frames() {
        assert_eq!(
            classify_proposition("There are no humans that are not made of glass").unwrap(),
            prop(A, "humans", "made of glass")
        );
        assert_eq!(classify_proposition("Under no circumstances is a flower a tree").unwrap(), prop(E, "flower", "tree"));
        assert_eq!(classify_proposition("All penguins belong to the class of birds").unwrap(), prop(A, "penguins", "birds"));
        assert_eq!(classify_proposition("Some politicians are corrupt").unwrap(), prop(I, "politicians", "corrupt"));
        assert_eq!(classify_proposition("Anything that is a rose is a flower").unwrap(), prop(A, "rose", "flower"));
        assert_eq!(
            classify_proposition("Every single thing made of glass is indestructible").unwrap(),
            prop(A, "made of glass", "indestructible")
        );
        assert_eq!(classify_proposition("some trees are not roses").unwrap(), prop(O, "trees", "roses"));
    }

    #[test]
    fn other_frames() {
        assert_eq!(classify_proposition("No fish are mammals.").unwrap(), prop(E, "fish", "mammals"));
        assert_eq!(classify_proposition("Every dog is a mammal").unwrap(), prop(A, "dog", "mammal"));
        assert_eq!(classify_proposition("None of the cats are dogs").unwrap(), prop(E, "cats", "dogs"));
        assert_eq!(classify_proposition("There are no cats that are dogs").unwrap(), prop(E, "cats", "dogs"));
        assert_eq!(classify_proposition("Not all cats are pets").unwrap(), prop(O, "cats", "pets"));
        assert_eq!(classify_proposition("At least one cat is a pet").unwrap(), prop(I, "cat", "pet"));
        assert_eq!(classify_proposition("There are cats that are not pets").unwrap(), prop(O, "cats", "pets"));
        assert_eq!(classify_proposition("Nothing that is a cat is a dog").unwrap(), prop(E, "cat", "dog"));
        assert_eq!(classify_proposition("No cats are not animals").unwrap(), prop(A, "cats", "animals"));
        assert_eq!(
            classify_proposition("All things that are red are colorful").unwrap(),
            prop(A, "red", "colorful")
        );
        assert_eq!(classify_proposition("Some cats do not belong to the class of pets").unwrap(), prop(O, "cats", "pets"));
    }

    #[test]
    fn unknown_frames_fail() {
        assert_eq!(classify_proposition("Most cats are pets"), Err(ParseFailure::UnrecognizedQuantifier));
        assert_eq!(classify_proposition("All cats purr"), Err(ParseFailure::UnrecognizedQuantifier));
        assert_eq!(classify_proposition("All cats are not dogs"), Err(ParseFailure::UnrecognizedQuantifier));
        assert_eq!(classify_proposition("Under no circumstances are cats dogs"), Err(ParseFailure::UnrecognizedQuantifier));
    }

    #[test]
    fn term_normalization() {
        assert_eq!(normalize_term("  The Roses. "), "roses");
        assert_eq!(normalize_term("single thing made of glass"), "made of glass");
        assert_eq!(normalize_term("indestructible things"), "indestructible");
        assert_eq!(normalize_term("things"), "things");
        assert_eq!(term_key("roses"), "rose");
        assert_eq!(term_key("boxes"), "box");
        assert_eq!(term_key("made of glass"), "made of glass");
        assert_eq!(term_key("flies"), "fly");
        assert_eq!(term_key("women"), "woman");
        assert_eq!(term_key("fish"), "fish");
    }

    #[test]
    fn figure_1_texts() {
        let a = parse_syllogism(
            "There are no humans that are not made of glass. Every single thing made of glass is indestructible. Therefore, some indestructible things are humans.",
        )
        .unwrap();
        assert_eq!(a.premise1.ptype, A);
        assert_eq!(a.premise2, Proposition::new(A, "made of glass", "indestructible"));
        assert_eq!(a.conclusion, Proposition::new(I, "indestructible", "humans"));

        let b = parse_syllogism(
            "Some fish are penguins. All penguins belong to the class of birds. Therefore, some birds are fish.",
        )
        .unwrap();
        assert_eq!(b.premise1, Proposition::new(I, "fish", "penguins"));
        assert_eq!(b.premise2, Proposition::new(A, "penguins", "birds"));
        assert_eq!(b.conclusion, Proposition::new(I, "birds", "fish"));

        let c = parse_syllogism(
            "Anything that is a rose is a flower. Under no circumstances is a flower a tree. Therefore, some trees are not roses.",
        )
        .unwrap();
        assert_eq!(c.premise2, Proposition::new(E, "flower", "tree"));
        assert_eq!(c.conclusion, Proposition::new(O, "tree", "rose"));
    }

    #[test]
    fn four_terms_is_a_mismatch() {
        assert_eq!(
            parse_syllogism("All cats are mammals. All dogs are animals. Therefore, all cats are animals."),
            Err(ParseFailure::TermMismatch)
        );
        assert_eq!(
            parse_syllogism("All cats are mammals. All mammals are cats. Therefore, all cats are cats."),
            Err(ParseFailure::TermMismatch)
        );
    }
}
