//! Exact validity decisions for categorical syllogisms.
//!
//! Three unary predicates split any domain into eight intersection cells, and
//! a monadic sentence over them only cares about which cells are inhabited.
//! Enumerating the 256 inhabited-cell patterns therefore decides satisfiability
//! and entailment exactly, with no external solver involved.

mod form;
mod smt;

pub use form::{enumerate_forms, Figure, Form, FormTable, Mood};
pub use smt::{emit_smtlib, ExternalSolver, SmtCheck, SmtOutcome};

use serde::{Deserialize, Serialize};
use std::fmt;
use thiserror::Error;

/// Number of inhabited-cell patterns over three terms.
pub const MODEL_COUNT: usize = 256;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum PropositionType {
    /// All S are P.
    A,
    /// No S are P.
    E,
    /// Some S are P.
    I,
    /// Some S are not P.
    O,
}

impl PropositionType {
    pub const ALL: [PropositionType; 4] = [Self::A, Self::E, Self::I, Self::O];

    pub fn is_universal(self) -> bool {
        matches!(self, Self::A | Self::E)
    }

    pub fn letter(self) -> char {
        match self {
            Self::A => 'A',
            Self::E => 'E',
            Self::I => 'I',
            Self::O => 'O',
        }
    }

    pub fn from_letter(c: char) -> Option<Self> {
        match c.to_ascii_uppercase() {
            'A' => Some(Self::A),
            'E' => Some(Self::E),
            'I' => Some(Self::I),
            'O' => Some(Self::O),
            _ => None,
        }
    }
}

impl fmt::Display for PropositionType {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.letter())
    }
}

/// A normalized term string. Construction does not normalize; see
/// [`crate::parser::normalize_term`].
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(transparent)]
pub struct TermId(pub String);

impl TermId {
    pub fn new(s: impl Into<String>) -> Self {
        TermId(s.into())
    }

    pub fn as_str(&self) -> &str {
        &self.0
    }
}

impl fmt::Display for TermId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

impl From<&str> for TermId {
    fn from(s: &str) -> Self {
        TermId(s.to_string())
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Proposition {
    #[serde(rename = "type")]
    pub ptype: PropositionType,
    pub subject: TermId,
    pub predicate: TermId,
}

impl Proposition {
    pub fn new(ptype: PropositionType, subject: impl Into<TermId>, predicate: impl Into<TermId>) -> Self {
        Proposition { ptype, subject: subject.into(), predicate: predicate.into() }
    }
}

impl From<String> for TermId {
    fn from(s: String) -> Self {
        TermId(s)
    }
}

impl fmt::Display for Proposition {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}({}, {})", self.ptype, self.subject, self.predicate)
    }
}

/// Two premises and a conclusion over exactly three distinct terms.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct SyllogismStructure {
    pub terms: [TermId; 3],
    pub premise1: Proposition,
    pub premise2: Proposition,
    pub conclusion: Proposition,
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum StructureError {
    #[error("terms are not pairwise distinct")]
    DuplicateTerms,
    #[error("term `{0}` is not one of the structure's terms")]
    UnknownTerm(String),
    #[error("proposition {0} has the same subject and predicate")]
    ReflexiveProposition(String),
    #[error("only {0} of the three terms are used by the propositions")]
    UnusedTerm(usize),
    #[error("propositions mention more than three terms")]
    TooManyTerms,
}

impl SyllogismStructure {
    /// Builds a structure whose term list is the order of first appearance
    /// across premise 1, premise 2 and the conclusion.
    pub fn new(premise1: Proposition, premise2: Proposition, conclusion: Proposition) -> Result<Self, StructureError> {
        let mut seen: Vec<TermId> = Vec::with_capacity(3);
        for p in [&premise1, &premise2, &conclusion] {
            for t in [&p.subject, &p.predicate] {
                if !seen.contains(t) {
                    seen.push(t.clone());
                }
            }
        }
        if seen.len() > 3 {
            return Err(StructureError::TooManyTerms);
        }
        if seen.len() < 3 {
            return Err(StructureError::UnusedTerm(seen.len()));
        }
        let terms = [seen[0].clone(), seen[1].clone(), seen[2].clone()];
        let s = SyllogismStructure { terms, premise1, premise2, conclusion };
        s.validate()?;
        Ok(s)
    }

    pub fn validate(&self) -> Result<(), StructureError> {
        let [a, b, c] = &self.terms;
        if a == b || a == c || b == c {
            return Err(StructureError::DuplicateTerms);
        }
        let mut used = [false; 3];
        for p in self.propositions() {
            if p.subject == p.predicate {
                return Err(StructureError::ReflexiveProposition(p.to_string()));
            }
            for t in [&p.subject, &p.predicate] {
                match self.terms.iter().position(|x| x == t) {
                    Some(i) => used[i] = true,
                    None => return Err(StructureError::UnknownTerm(t.0.clone())),
                }
            }
        }
        let n = used.iter().filter(|u| **u).count();
        if n != 3 {
            return Err(StructureError::UnusedTerm(n));
        }
        Ok(())
    }

    pub fn propositions(&self) -> [&Proposition; 3] {
        [&self.premise1, &self.premise2, &self.conclusion]
    }

    /// Term-index view used by the solver. Assumes a validated structure.
    pub fn indexed(&self) -> Result<IndexedSyllogism, StructureError> {
        self.validate()?;
        let idx = |t: &TermId| self.terms.iter().position(|x| x == t).expect("validated") as u8;
        let conv = |p: &Proposition| IndexedProposition { ptype: p.ptype, subject: idx(&p.subject), predicate: idx(&p.predicate) };
        Ok(IndexedSyllogism {
            premise1: conv(&self.premise1),
            premise2: conv(&self.premise2),
            conclusion: conv(&self.conclusion),
        })
    }
}

impl fmt::Display for SyllogismStructure {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}, {} ⊢ {}", self.premise1, self.premise2, self.conclusion)
    }
}

/// A proposition over term slots 0..3.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct IndexedProposition {
    pub ptype: PropositionType,
    pub subject: u8,
    pub predicate: u8,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct IndexedSyllogism {
    pub premise1: IndexedProposition,
    pub premise2: IndexedProposition,
    pub conclusion: IndexedProposition,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize, Default)]
#[serde(rename_all = "kebab-case")]
pub enum SemanticsMode {
    /// Modern reading: universals carry no existential commitment.
    Boolean,
    /// Existence axioms for the subject of every universal proposition,
    /// premises and conclusion alike.
    #[default]
    SubjectImport,
    /// Every one of the three terms is nonempty.
    AllTermsNonempty,
}

impl SemanticsMode {
    pub const ALL: [SemanticsMode; 3] = [Self::Boolean, Self::SubjectImport, Self::AllTermsNonempty];

    pub fn name(self) -> &'static str {
        match self {
            Self::Boolean => "boolean",
            Self::SubjectImport => "subject-import",
            Self::AllTermsNonempty => "all-terms-nonempty",
        }
    }
}

impl fmt::Display for SemanticsMode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl std::str::FromStr for SemanticsMode {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.to_ascii_lowercase().replace('_', "-").as_str() {
            "boolean" => Ok(Self::Boolean),
            "subject-import" => Ok(Self::SubjectImport),
            "all-terms-nonempty" => Ok(Self::AllTermsNonempty),
            other => Err(format!("unknown semantics mode `{other}` (expected boolean, subject-import or all-terms-nonempty)")),
        }
    }
}

/// Set of inhabited cells. Cell `c` contains the elements belonging exactly
/// to the terms whose slot bit is set in `c`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct CellModel(pub u8);

impl CellModel {
    pub fn all() -> impl Iterator<Item = CellModel> {
        (0..=255u8).map(CellModel)
    }

    pub fn inhabited(self, cell: u8) -> bool {
        self.0 >> cell & 1 == 1
    }

    /// Bitmask of the cells making up a term's extension.
    fn extension(term: u8) -> u8 {
        let mut mask = 0u8;
        for cell in 0..8u8 {
            if cell >> term & 1 == 1 {
                mask |= 1 << cell;
            }
        }
        mask
    }

    pub fn term_nonempty(self, term: u8) -> bool {
        self.0 & Self::extension(term) != 0
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Verdict {
    Valid,
    Invalid,
    /// Abstention: extraction failed, the premises are inconsistent, or an
    /// external solver gave up.
    Indeterminate,
}

impl Verdict {
    /// 1 = valid, 0 = invalid, `None` when indeterminate.
    pub fn as_vote(self) -> Option<u8> {
        match self {
            Verdict::Valid => Some(1),
            Verdict::Invalid => Some(0),
            Verdict::Indeterminate => None,
        }
    }

    pub fn is_determinate(self) -> bool {
        self != Verdict::Indeterminate
    }
}

impl fmt::Display for Verdict {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Verdict::Valid => "Valid",
            Verdict::Invalid => "Invalid",
            Verdict::Indeterminate => "Indeterminate",
        })
    }
}

/// Truth of the bare proposition, ignoring any existence axioms.
fn holds_bare(p: IndexedProposition, m: CellModel) -> bool {
    let s = CellModel::extension(p.subject);
    let q = CellModel::extension(p.predicate);
    let m = m.0;
    match p.ptype {
        PropositionType::A => m & s & !q == 0,
        PropositionType::E => m & s & q == 0,
        PropositionType::I => m & s & q != 0,
        PropositionType::O => m & s & !q != 0,
    }
}

/// Truth of a proposition in a model, including the subject's existence
/// axiom when the mode attaches one to universal propositions.
pub fn holds_indexed(p: IndexedProposition, m: CellModel, mode: SemanticsMode) -> bool {
    if !holds_bare(p, m) {
        return false;
    }
    match mode {
        SemanticsMode::SubjectImport if p.ptype.is_universal() => m.term_nonempty(p.subject),
        _ => true,
    }
}

/// Global axioms the mode imposes on every admissible model.
fn admissible(m: CellModel, mode: SemanticsMode) -> bool {
    match mode {
        SemanticsMode::AllTermsNonempty => (0..3).all(|t| m.term_nonempty(t)),
        _ => true,
    }
}

fn resolve_terms(props: &[Proposition]) -> Result<Vec<&TermId>, StructureError> {
    let mut terms: Vec<&TermId> = Vec::with_capacity(3);
    for p in props {
        if p.subject == p.predicate {
            return Err(StructureError::ReflexiveProposition(p.to_string()));
        }
        for t in [&p.subject, &p.predicate] {
            if !terms.contains(&t) {
                terms.push(t);
            }
        }
    }
    if terms.len() > 3 {
        return Err(StructureError::TooManyTerms);
    }
    Ok(terms)
}

fn index_props(props: &[Proposition]) -> Result<Vec<IndexedProposition>, StructureError> {
    let terms = resolve_terms(props)?;
    let idx = |t: &TermId| terms.iter().position(|x| *x == t).expect("resolved") as u8;
    Ok(props
        .iter()
        .map(|p| IndexedProposition { ptype: p.ptype, subject: idx(&p.subject), predicate: idx(&p.predicate) })
        .collect())
}

/// Evaluates one proposition in a model whose cells are indexed by the
/// given term order.
pub fn holds_in_model(p: &Proposition, terms: &[TermId; 3], m: CellModel, mode: SemanticsMode) -> Result<bool, StructureError> {
    let idx = |t: &TermId| {
        terms
            .iter()
            .position(|x| x == t)
            .map(|i| i as u8)
            .ok_or_else(|| StructureError::UnknownTerm(t.0.clone()))
    };
    let ip = IndexedProposition { ptype: p.ptype, subject: idx(&p.subject)?, predicate: idx(&p.predicate)? };
    Ok(admissible(m, mode) && holds_indexed(ip, m, mode))
}

pub fn check_sat_indexed(props: &[IndexedProposition], mode: SemanticsMode) -> bool {
    CellModel::all().any(|m| admissible(m, mode) && props.iter().all(|p| holds_indexed(*p, m, mode)))
}

/// Whether some model satisfies every proposition. Terms are assigned to
/// cell slots in order of first appearance; at most three are allowed.
pub fn check_sat(props: &[Proposition], mode: SemanticsMode) -> Result<bool, StructureError> {
    Ok(check_sat_indexed(&index_props(props)?, mode))
}

pub fn decide_indexed(s: IndexedSyllogism, mode: SemanticsMode) -> Verdict {
    let c = s.conclusion;
    // Existence axioms in subject-import mode also cover the conclusion's
    // subject. They sit on the premise side, so the negated conclusion is
    // only the negation of the bare proposition.
    let axioms_hold = |m: CellModel| {
        admissible(m, mode)
            && (mode != SemanticsMode::SubjectImport || !c.ptype.is_universal() || m.term_nonempty(c.subject))
    };
    let mut consistent = false;
    for m in CellModel::all() {
        if !axioms_hold(m) || !holds_indexed(s.premise1, m, mode) || !holds_indexed(s.premise2, m, mode) {
            continue;
        }
        consistent = true;
        if !holds_bare(c, m) {
            return Verdict::Invalid;
        }
    }
    if consistent {
        Verdict::Valid
    } else {
        Verdict::Indeterminate
    }
}

/// Decides validity: Indeterminate when the premises (with the mode's
/// axioms) are unsatisfiable, otherwise Valid iff no admissible model of the
/// premises falsifies the conclusion.
pub fn decide_validity(s: &SyllogismStructure, mode: SemanticsMode) -> Result<Verdict, StructureError> {
    Ok(decide_indexed(s.indexed()?, mode))
}

/// Modes under which the solver's verdict agrees with a gold label.
pub fn modes_matching(s: &SyllogismStructure, gold_valid: bool) -> Result<Vec<SemanticsMode>, StructureError> {
    let ix = s.indexed()?;
    let want = if gold_valid { Verdict::Valid } else { Verdict::Invalid };
    Ok(SemanticsMode::ALL.into_iter().filter(|m| decide_indexed(ix, *m) == want).collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use PropositionType::*;

    fn p(t: PropositionType, s: &str, q: &str) -> Proposition {
        Proposition::new(t, s, q)
    }

    fn st(p1: Proposition, p2: Proposition, c: Proposition) -> SyllogismStructure {
        SyllogismStructure::new(p1, p2, c).unwrap()
    }

    #[test]
    fn vacuous_universal_depends_on_mode() {
        let terms = [TermId::from("s"), TermId::from("p"), TermId::from("m")];
        // only the cell outside every term is inhabited
        let m = CellModel(1);
        let a = p(A, "s", "p");
        assert!(holds_in_model(&a, &terms, m, SemanticsMode::Boolean).unwrap());
        assert!(!holds_in_model(&a, &terms, m, SemanticsMode::SubjectImport).unwrap());
        // cell 0b011 is inside s and p
        let i = p(I, "s", "p");
        assert!(holds_in_model(&i, &terms, CellModel(1 << 0b011), SemanticsMode::Boolean).unwrap());
    }

    #[test]
    fn check_sat_examples() {
        assert!(check_sat(&[p(A, "s", "p")], SemanticsMode::SubjectImport).unwrap());
        assert!(!check_sat(&[p(I, "s", "p"), p(E, "s", "p")], SemanticsMode::Boolean).unwrap());
        assert!(!check_sat(&[p(A, "s", "p"), p(O, "s", "p")], SemanticsMode::Boolean).unwrap());
        assert!(check_sat(&[p(A, "s", "p"), p(E, "s", "p")], SemanticsMode::Boolean).unwrap());
        assert!(!check_sat(&[p(A, "s", "p"), p(E, "s", "p")], SemanticsMode::SubjectImport).unwrap());
        assert_eq!(
            check_sat(&[p(A, "a", "b"), p(A, "c", "d")], SemanticsMode::Boolean),
            Err(StructureError::TooManyTerms)
        );
    }

    #[test]
    fn barbara_and_undistributed_middle() {
        let barbara = st(p(A, "m", "p"), p(A, "s", "m"), p(A, "s", "p"));
        let undistributed = st(p(A, "p", "m"), p(A, "s", "m"), p(A, "s", "p"));
        for mode in SemanticsMode::ALL {
            assert_eq!(decide_validity(&barbara, mode).unwrap(), Verdict::Valid);
            assert_eq!(decide_validity(&undistributed, mode).unwrap(), Verdict::Invalid);
        }
    }

    #[test]
    fn felapton_needs_import() {
        let felapton = st(p(E, "m", "p"), p(A, "m", "s"), p(O, "s", "p"));
        assert_eq!(decide_validity(&felapton, SemanticsMode::Boolean).unwrap(), Verdict::Invalid);
        assert_eq!(decide_validity(&felapton, SemanticsMode::SubjectImport).unwrap(), Verdict::Valid);
        assert_eq!(decide_validity(&felapton, SemanticsMode::AllTermsNonempty).unwrap(), Verdict::Valid);
    }

    #[test]
    fn calemes_survives_subject_import() {
        let calemes = st(p(A, "p", "m"), p(E, "m", "s"), p(E, "s", "p"));
        for mode in SemanticsMode::ALL {
            assert_eq!(decide_validity(&calemes, mode).unwrap(), Verdict::Valid, "{mode}");
        }
    }

    #[test]
    fn inconsistent_premises_are_indeterminate() {
        // premises over the same two terms; the conclusion brings the third
        let s = SyllogismStructure {
            terms: ["s".into(), "p".into(), "m".into()],
            premise1: p(I, "s", "p"),
            premise2: p(E, "s", "p"),
            conclusion: p(A, "s", "m"),
        };
        for mode in SemanticsMode::ALL {
            assert_eq!(decide_validity(&s, mode).unwrap(), Verdict::Indeterminate);
        }
    }

    #[test]
    fn malformed_structures_rejected() {
        let s = SyllogismStructure {
            terms: ["a".into(), "a".into(), "c".into()],
            premise1: p(A, "a", "c"),
            premise2: p(A, "a", "c"),
            conclusion: p(A, "a", "c"),
        };
        assert_eq!(decide_validity(&s, SemanticsMode::Boolean), Err(StructureError::DuplicateTerms));
        let s = SyllogismStructure {
            terms: ["a".into(), "b".into(), "c".into()],
            premise1: p(A, "a", "x"),
            premise2: p(A, "b", "c"),
            conclusion: p(A, "a", "c"),
        };
        assert!(matches!(decide_validity(&s, SemanticsMode::Boolean), Err(StructureError::UnknownTerm(_))));
        assert!(matches!(
            SyllogismStructure::new(p(A, "a", "b"), p(A, "c", "d"), p(A, "a", "d")),
            Err(StructureError::TooManyTerms)
        ));
    }

    #[test]
    fn figure_1c_only_valid_when_all_terms_nonempty() {
        let s = st(p(A, "rose", "flower"), p(E, "flower", "tree"), p(O, "tree", "rose"));
        assert_eq!(decide_validity(&s, SemanticsMode::SubjectImport).unwrap(), Verdict::Invalid);
        assert_eq!(decide_validity(&s, SemanticsMode::AllTermsNonempty).unwrap(), Verdict::Valid);
        assert_eq!(modes_matching(&s, true).unwrap(), vec![SemanticsMode::AllTermsNonempty]);
    }
}
