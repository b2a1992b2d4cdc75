use super::{decide_indexed, IndexedProposition, IndexedSyllogism, Proposition, PropositionType, SemanticsMode, SyllogismStructure, TermId, Verdict};
use serde::{Deserialize, Serialize};
use std::fmt;

/// Proposition types of (major premise, minor premise, conclusion).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct Mood(pub [PropositionType; 3]);

impl Mood {
    pub fn all() -> impl Iterator<Item = Mood> {
        PropositionType::ALL.into_iter().flat_map(|a| {
            PropositionType::ALL
                .into_iter()
                .flat_map(move |b| PropositionType::ALL.into_iter().map(move |c| Mood([a, b, c])))
        })
    }
}

impl fmt::Display for Mood {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for t in self.0 {
            write!(f, "{t}")?;
        }
        Ok(())
    }
}

/// Placement of the middle term.
///
/// | figure | major | minor |
/// |--------|-------|-------|
/// | 1      | M-P   | S-M   |
/// | 2      | P-M   | S-M   |
/// | 3      | M-P   | M-S   |
/// | 4      | P-M   | M-S   |
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct Figure(u8);

impl Figure {
    pub const ALL: [Figure; 4] = [Figure(1), Figure(2), Figure(3), Figure(4)];

    pub fn new(n: u8) -> Option<Figure> {
        (1..=4).contains(&n).then_some(Figure(n))
    }

    pub fn number(self) -> u8 {
        self.0
    }

    fn middle_is_major_subject(self) -> bool {
        matches!(self.0, 1 | 3)
    }

    fn middle_is_minor_subject(self) -> bool {
        matches!(self.0, 3 | 4)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct Form {
    pub mood: Mood,
    pub figure: Figure,
}

// slots used by `Form::indexed`
const S: u8 = 0;
const M: u8 = 1;
const P: u8 = 2;

impl Form {
    pub fn all() -> impl Iterator<Item = Form> {
        Mood::all().flat_map(|mood| Figure::ALL.into_iter().map(move |figure| Form { mood, figure }))
    }

    pub fn parse(code: &str) -> Option<Form> {
        let (mood, fig) = code.trim().split_once('-')?;
        let letters: Vec<PropositionType> = mood.chars().map(PropositionType::from_letter).collect::<Option<_>>()?;
        let figure = Figure::new(fig.parse().ok()?)?;
        match letters[..] {
            [a, b, c] => Some(Form { mood: Mood([a, b, c]), figure }),
            _ => None,
        }
    }

    fn major(self) -> IndexedProposition {
        let (s, p) = if self.figure.middle_is_major_subject() { (M, P) } else { (P, M) };
        IndexedProposition { ptype: self.mood.0[0], subject: s, predicate: p }
    }

    fn minor(self) -> IndexedProposition {
        let (s, p) = if self.figure.middle_is_minor_subject() { (M, S) } else { (S, M) };
        IndexedProposition { ptype: self.mood.0[1], subject: s, predicate: p }
    }

    /// Slots: 0 = minor term S, 1 = middle M, 2 = major term P.
    pub fn indexed(self) -> IndexedSyllogism {
        IndexedSyllogism {
            premise1: self.major(),
            premise2: self.minor(),
            conclusion: IndexedProposition { ptype: self.mood.0[2], subject: S, predicate: P },
        }
    }

    /// Instantiates the form with concrete terms. The major premise comes
    /// first unless `minor_first` is set.
    pub fn instantiate(self, minor: &TermId, middle: &TermId, major: &TermId, minor_first: bool) -> SyllogismStructure {
        let name = |slot: u8| match slot {
            S => minor.clone(),
            M => middle.clone(),
            _ => major.clone(),
        };
        let prop = |ip: IndexedProposition| Proposition { ptype: ip.ptype, subject: name(ip.subject), predicate: name(ip.predicate) };
        let (a, b) = if minor_first { (self.minor(), self.major()) } else { (self.major(), self.minor()) };
        SyllogismStructure::new(prop(a), prop(b), prop(self.indexed().conclusion))
            .expect("forms always instantiate to three distinct terms when the inputs are distinct")
    }

    /// Recovers mood and figure from a structure, in either premise order.
    /// Returns `None` when the premises do not each pair the middle term with
    /// one conclusion term.
    pub fn of(s: &SyllogismStructure) -> Option<Form> {
        let minor = &s.conclusion.subject;
        let major = &s.conclusion.predicate;
        let middle = s.terms.iter().find(|t| *t != minor && *t != major)?;
        let involves = |p: &Proposition, x: &TermId| {
            (&p.subject == x && &p.predicate == middle) || (&p.subject == middle && &p.predicate == x)
        };
        let (maj, min) = if involves(&s.premise1, major) && involves(&s.premise2, minor) {
            (&s.premise1, &s.premise2)
        } else if involves(&s.premise2, major) && involves(&s.premise1, minor) {
            (&s.premise2, &s.premise1)
        } else {
            return None;
        };
        let figure = match (&maj.subject == middle, &min.subject == middle) {
            (true, false) => 1,
            (false, false) => 2,
            (true, true) => 3,
            (false, true) => 4,
        };
        Some(Form { mood: Mood([maj.ptype, min.ptype, s.conclusion.ptype]), figure: Figure(figure) })
    }

    pub fn code(self) -> String {
        format!("{}-{}", self.mood, self.figure.0)
    }

    /// Traditional mnemonic, for the forms that have one.
    pub fn traditional_name(self) -> Option<&'static str> {
        NAMES.iter().find(|(c, _)| *c == self.code()).map(|(_, n)| *n)
    }

    pub fn decide(self, mode: SemanticsMode) -> Verdict {
        decide_indexed(self.indexed(), mode)
    }
}

impl fmt::Display for Form {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}-{}", self.mood, self.figure.0)
    }
}

const NAMES: &[(&str, &str)] = &[
    ("AAA-1", "Barbara"),
    ("EAE-1", "Celarent"),
    ("AII-1", "Darii"),
    ("EIO-1", "Ferio"),
    ("AAI-1", "Barbari"),
    ("EAO-1", "Celaront"),
    ("EAE-2", "Cesare"),
    ("AEE-2", "Camestres"),
    ("EIO-2", "Festino"),
    ("AOO-2", "Baroco"),
    ("EAO-2", "Cesaro"),
    ("AEO-2", "Camestros"),
    ("AAI-3", "Darapti"),
    ("IAI-3", "Disamis"),
    ("AII-3", "Datisi"),
    ("EAO-3", "Felapton"),
    ("OAO-3", "Bocardo"),
    ("EIO-3", "Ferison"),
    ("AAI-4", "Bramantip"),
    ("AEE-4", "Camenes"),
    ("IAI-4", "Dimaris"),
    ("EAO-4", "Fesapo"),
    ("EIO-4", "Fresison"),
    ("AEO-4", "Camenop"),
];

/// One verdict per mood × figure, in mood-major order.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FormTable {
    pub mode: SemanticsMode,
    pub entries: Vec<(Form, Verdict)>,
}

impl FormTable {
    pub fn get(&self, form: Form) -> Verdict {
        self.entries.iter().find(|(f, _)| *f == form).map(|(_, v)| *v).expect("table covers every form")
    }

    pub fn with_verdict(&self, v: Verdict) -> impl Iterator<Item = Form> + '_ {
        self.entries.iter().filter(move |(_, x)| *x == v).map(|(f, _)| *f)
    }

    pub fn count(&self, v: Verdict) -> usize {
        self.with_verdict(v).count()
    }
}

pub fn enumerate_forms(mode: SemanticsMode) -> FormTable {
    FormTable { mode, entries: Form::all().map(|f| (f, f.decide(mode))).collect() }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::logic::check_sat_indexed;

    #[test]
    fn table_has_256_entries_in_fixed_order() {
        let t = enumerate_forms(SemanticsMode::Boolean);
        assert_eq!(t.entries.len(), 256);
        assert_eq!(t.entries[0].0.code(), "AAA-1");
        assert_eq!(t.entries[255].0.code(), "OOO-4");
        assert_eq!(t, enumerate_forms(SemanticsMode::Boolean));
    }

    #[test]
    fn boolean_valid_forms_are_the_fifteen_unconditional_ones() {
        let t = enumerate_forms(SemanticsMode::Boolean);
        let mut names: Vec<_> = t.with_verdict(Verdict::Valid).map(|f| f.traditional_name().unwrap()).collect();
        names.sort();
        let mut expected = [
                "Baroco", "Barbara", "Bocardo", "Camenes", "Camestres", "Celarent", "Cesare", "Darii", "Datisi", "Dimaris",
                "Disamis", "Ferio", "Ferison", "Festino", "Fresison",
        ];
        expected.sort();
        assert_eq!(names, expected);
    }

    #[test]
    fn aaa1_valid_in_every_mode() {
        let f = Form::parse("AAA-1").unwrap();
        for mode in SemanticsMode::ALL {
            assert_eq!(f.decide(mode), Verdict::Valid);
        }
    }

    #[test]
    fn indeterminate_entries_have_unsat_premises() {
        for mode in SemanticsMode::ALL {
            for f in enumerate_forms(mode).with_verdict(Verdict::Indeterminate) {
                let ix = f.indexed();
                assert!(!check_sat_indexed(&[ix.premise1, ix.premise2], mode));
            }
        }
    }

    #[test]
    fn form_recovered_from_instantiation_in_both_orders() {
        let (s, m, p) = (TermId::from("s"), TermId::from("m"), TermId::from("p"));
        for f in Form::all() {
            for swap in [false, true] {
                let st = f.instantiate(&s, &m, &p, swap);
                assert_eq!(Form::of(&st), Some(f));
            }
        }
    }

    #[test]
    fn parse_codes() {
        assert_eq!(Form::parse("EAO-3").unwrap().traditional_name(), Some("Felapton"));
        assert!(Form::parse("EAO-5").is_none());
        assert!(Form::parse("EA-3").is_none());
        assert!(Form::parse("XAO-1").is_none());
    }
}
