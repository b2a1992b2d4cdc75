//! SMT-LIB v2 emission and an external-solver runner for cross-checks.
//!
//! Script layout, one item per line:
//!
//! ```text
//! ; syllogism <check> check, semantics <mode>
//! ; t0 = <term 0>            (one comment per term, in structure order)
//! (set-logic UF)
//! (declare-sort Thing 0)
//! (declare-fun t0 (Thing) Bool)   (t1, t2 likewise)
//! (assert <premise 1>)
//! (assert <premise 2>)
//! (assert (exists ((x Thing)) (tK x)))   (existence axioms, by slot order)
//! (assert (not <conclusion>))             (entailment checks only)
//! (check-sat)
//! ```
//!
//! Predicates are named by slot so the script never depends on term text.

use super::{IndexedProposition, PropositionType, SemanticsMode, StructureError, SyllogismStructure, Verdict};
use std::io::{Read, Write};
use std::path::PathBuf;
use std::process::{Command, Stdio};
use std::time::{Duration, Instant};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SmtCheck {
    /// Premises and axioms only.
    PremiseConsistency,
    /// Premises, axioms and the negated conclusion.
    Entailment,
}

fn formula(p: IndexedProposition) -> String {
    let (s, q) = (p.subject, p.predicate);
    match p.ptype {
        PropositionType::A => format!("(forall ((x Thing)) (=> (t{s} x) (t{q} x)))"),
        PropositionType::E => format!("(forall ((x Thing)) (=> (t{s} x) (not (t{q} x))))"),
        PropositionType::I => format!("(exists ((x Thing)) (and (t{s} x) (t{q} x)))"),
        PropositionType::O => format!("(exists ((x Thing)) (and (t{s} x) (not (t{q} x))))"),
    }
}

/// Term slots that the mode declares nonempty, ascending.
fn existence_axioms(props: [IndexedProposition; 3], mode: SemanticsMode) -> Vec<u8> {
    let mut slots: Vec<u8> = match mode {
        SemanticsMode::Boolean => vec![],
        SemanticsMode::SubjectImport => props.iter().filter(|p| p.ptype.is_universal()).map(|p| p.subject).collect(),
        SemanticsMode::AllTermsNonempty => vec![0, 1, 2],
    };
    slots.sort_unstable();
    slots.dedup();
    slots
}

fn comment_safe(s: &str) -> String {
    s.chars().map(|c| if c.is_control() { ' ' } else { c }).collect()
}

pub fn emit_smtlib(s: &SyllogismStructure, mode: SemanticsMode, check: SmtCheck) -> Result<String, StructureError> {
    let ix = s.indexed()?;
    let check_name = match check {
        SmtCheck::PremiseConsistency => "premise-consistency",
        SmtCheck::Entailment => "entailment",
    };
    let mut out = format!("; syllogism {check_name} check, semantics {mode}\n");
    for (i, t) in s.terms.iter().enumerate() {
        out.push_str(&format!("; t{i} = {}\n", comment_safe(t.as_str())));
    }
    out.push_str("(set-logic UF)\n(declare-sort Thing 0)\n");
    for i in 0..3 {
        out.push_str(&format!("(declare-fun t{i} (Thing) Bool)\n"));
    }
    out.push_str(&format!("(assert {})\n", formula(ix.premise1)));
    out.push_str(&format!("(assert {})\n", formula(ix.premise2)));
    for slot in existence_axioms([ix.premise1, ix.premise2, ix.conclusion], mode) {
        out.push_str(&format!("(assert (exists ((x Thing)) (t{slot} x)))\n"));
    }
    if check == SmtCheck::Entailment {
        out.push_str(&format!("(assert (not {}))\n", formula(ix.conclusion)));
    }
    out.push_str("(check-sat)\n");
    Ok(out)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SmtOutcome {
    Sat,
    Unsat,
    /// Solver answered `unknown`, timed out, or produced no answer.
    Unknown,
}

/// A solver binary that reads SMT-LIB v2 from stdin.
#[derive(Debug, Clone)]
pub struct ExternalSolver {
    pub program: PathBuf,
    pub args: Vec<String>,
    pub timeout: Duration,
}

#[derive(Debug, thiserror::Error)]
pub enum SolverError {
    #[error("failed to run solver")]
    Io(#[from] std::io::Error),
    #[error(transparent)]
    Structure(#[from] StructureError),
}

impl ExternalSolver {
    pub const DEFAULT_TIMEOUT: Duration = Duration::from_millis(5000);

    pub fn z3() -> Self {
        ExternalSolver { program: "z3".into(), args: vec!["-in".into()], timeout: Self::DEFAULT_TIMEOUT }
    }

    /// `z3` if it is on the PATH.
    pub fn find_z3() -> Option<Self> {
        let ok = Command::new("z3").arg("--version").stdout(Stdio::null()).stderr(Stdio::null()).status().ok()?.success();
        ok.then(Self::z3)
    }

    /// Runs several scripts in one process, separated by `(reset)`. The
    /// timeout applies per script.
    pub fn run_batch(&self, scripts: &[String]) -> Result<Vec<SmtOutcome>, SolverError> {
        let mut input = String::new();
        for (i, s) in scripts.iter().enumerate() {
            if i > 0 {
                input.push_str("(reset)\n");
            }
            input.push_str(s);
        }
        let mut child = Command::new(&self.program)
            .args(&self.args)
            .stdin(Stdio::piped())
            .stdout(Stdio::piped())
            .stderr(Stdio::null())
            .spawn()?;
        {
            let mut stdin = child.stdin.take().expect("piped");
            stdin.write_all(input.as_bytes())?;
        }
        let mut stdout = child.stdout.take().expect("piped");
        let reader = std::thread::spawn(move || {
            let mut buf = String::new();
            let _ = stdout.read_to_string(&mut buf);
            buf
        });
        let deadline = Instant::now() + self.timeout * scripts.len().max(1) as u32;
        let timed_out = loop {
            if child.try_wait()?.is_some() {
                break false;
            }
            if Instant::now() >= deadline {
                let _ = child.kill();
                let _ = child.wait();
                break true;
            }
            std::thread::sleep(Duration::from_millis(2));
        };
        let text = reader.join().unwrap_or_default();
        let mut answers: Vec<SmtOutcome> = text
            .lines()
            .filter_map(|l| match l.trim() {
                "sat" => Some(SmtOutcome::Sat),
                "unsat" => Some(SmtOutcome::Unsat),
                "unknown" | "timeout" => Some(SmtOutcome::Unknown),
                _ => None,
            })
            .collect();
        if timed_out || answers.len() < scripts.len() {
            answers.resize(scripts.len(), SmtOutcome::Unknown);
        }
        answers.truncate(scripts.len());
        Ok(answers)
    }

    pub fn run(&self, script: &str) -> Result<SmtOutcome, SolverError> {
        Ok(self.run_batch(&[script.to_string()])?[0])
    }

    /// Same two-step decision as the native solver, delegated to the binary.
    pub fn decide(&self, s: &SyllogismStructure, mode: SemanticsMode) -> Result<Verdict, SolverError> {
        let consistency = emit_smtlib(s, mode, SmtCheck::PremiseConsistency)?;
        let entailment = emit_smtlib(s, mode, SmtCheck::Entailment)?;
        let r = self.run_batch(&[consistency, entailment])?;
        Ok(match (r[0], r[1]) {
            (SmtOutcome::Sat, SmtOutcome::Unsat) => Verdict::Valid,
            (SmtOutcome::Sat, SmtOutcome::Sat) => Verdict::Invalid,
            _ => Verdict::Indeterminate,
        })
    }
}
