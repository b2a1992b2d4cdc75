use serde::{Deserialize, Serialize};
use std::fmt;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum PromptKind {
    ZeroShot,
    FewShot,
    FewShotCot,
    SimpleCot,
}

impl PromptKind {
    pub const ALL: [PromptKind; 4] = [PromptKind::ZeroShot, PromptKind::FewShot, PromptKind::FewShotCot, PromptKind::SimpleCot];

    pub fn id(self) -> &'static str {
        match self {
            PromptKind::ZeroShot => "zero-shot",
            PromptKind::FewShot => "few-shot",
            PromptKind::FewShotCot => "few-shot-cot",
            PromptKind::SimpleCot => "simple-cot",
        }
    }

    pub fn template(self) -> &'static str {
        match self {
            PromptKind::ZeroShot => ZERO_SHOT,
            PromptKind::FewShot => FEW_SHOT,
            PromptKind::FewShotCot => FEW_SHOT_COT,
            PromptKind::SimpleCot => SIMPLE_COT,
        }
    }
}

impl fmt::Display for PromptKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.id())
    }
}

impl std::str::FromStr for PromptKind {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        PromptKind::ALL.into_iter().find(|k| k.id() == s).ok_or_else(|| format!("unknown prompt kind `{s}`"))
    }
}

pub const PLACEHOLDER: &str = "{syllogism}";

/// Substitutes the syllogism text into the template, byte for byte.
pub fn render_prompt(kind: PromptKind, syllogism: &str) -> String {
    kind.template().replacen(PLACEHOLDER, syllogism, 1)
}

const ZERO_SHOT: &str = "\
Determine if this syllogism is VALID.

VALID means: IF the premises were true, the conclusion MUST be true. Ignore whether premises are actually true in the real world.

Syllogism: {syllogism}

Answer with exactly one word: true or false";

const FEW_SHOT: &str = "\
Determine if this syllogism is VALID (conclusion necessarily follows from premises).

VALIDITY RULES:
- \"All A are B\" + \"All B are C\" -> \"All A are C\" (valid)
- \"No A are B\" + \"All C are A\" -> \"No C are B\" (valid)
- \"All A are B\" + \"Some C are A\" -> \"Some C are B\" (valid)
- \"All A are B\" + \"All C are B\" -> \"All A are C\" (invalid, undistributed middle)
- \"Some A are B\" does NOT guarantee \"All A are B\"

EXAMPLES:
\"All dogs are mammals. All mammals are animals. Therefore, all dogs are animals.\" -> true
\"All birds are dinosaurs. All sparrows are birds. Therefore, all sparrows are dinosaurs.\" -> true
\"No fish are mammals. All sharks are fish. Therefore, no sharks are mammals.\" -> true
\"All reptiles are cold-blooded. Some lizards are reptiles. Therefore, some lizards are cold-blooded.\" -> true
\"All lawyers are professionals. All doctors are professionals. Therefore, all lawyers are doctors.\" -> false
\"Some politicians are corrupt. All senators are politicians. Therefore, some senators are corrupt.\" -> false
\"All rocks are edible. Some clouds are rocks. Therefore, all clouds are edible.\" -> false

Syllogism: {syllogism}

Answer with exactly one word: true or false";

const FEW_SHOT_COT: &str = "\
Analyze this syllogism's logical VALIDITY.

IMPORTANT: VALID = conclusion MUST follow IF premises are assumed true. Ignore real-world facts.

RULES:
- \"All A are B\" + \"All B are C\" -> \"All A are C\" (valid chain)
- \"No A are B\" + \"All C are A\" -> \"No C are B\" (valid exclusion)
- \"All A are B\" + \"Some C are A\" -> \"Some C are B\" (Darii)
- \"All A are B\" + \"All C are B\" -> \"All A are C\" (invalid, undistributed middle)
- \"Some A are B\" means ONLY SOME, not all

WORKED EXAMPLES:

Example 1: \"All cats are mammals. All mammals are animals. Therefore, all cats are animals.\"
- Structure: cats ⊆ mammals ⊆ animals
- Chain is complete. ANSWER: true

Example 2: \"All unicorns fly. All pegasi are unicorns. Therefore, all pegasi fly.\"
- Premises are fantasy but structure is: pegasi ⊆ unicorns ⊆ fly
- Valid chain regardless of real-world truth. ANSWER: true

Example 3: \"All athletes are healthy. All healthy people exercise. Therefore, all athletes exercise.\"
- Chain: athletes -> healthy -> exercise
- Chain is complete. ANSWER: true

Example 4: \"All doctors are professionals. All lawyers are professionals. Therefore, all doctors are lawyers.\"
- \"Professionals\" appears as PREDICATE in both premises.
- Middle term is undistributed: we only know both are subsets of professionals, not that they overlap.
- Despite the believable surface, the structure is invalid. ANSWER: false

Example 5: \"All cats are pets. All dogs are pets. Therefore, all cats are dogs.\"
- Both subsets of pets, but could be separate
- Undistributed middle. ANSWER: false

Example 6: \"Some birds can fly. All penguins are birds. Therefore, some penguins can fly.\"
- \"Some birds\" doesn't tell us WHICH birds
- Cannot guarantee any penguin is in the flying subset. ANSWER: false

Syllogism: {syllogism}

Think through the structure briefly, then write your final answer as: ANSWER: true or ANSWER: false";

const SIMPLE_COT: &str = "\
Is this syllogism logically VALID? (If premises were true, must conclusion be true?)

Syllogism: {syllogism}

First, identify the logical structure. Then determine if the conclusion necessarily follows.

End your response with exactly: ANSWER: true or ANSWER: false";

/// Structure-extraction prompt; the reply is a JSON record.
pub const EXTRACTION: &str = "\
Extract the logical structure of this syllogism.

SYLLOGISM: {syllogism}

Proposition types:
- A: \"All S are P\" / \"Every S is P\"
- E: \"No S are P\"
- I: \"Some S are P\" / \"At least one S is P\"
- O: \"Some S are not P\"

The CONCLUSION follows \"therefore/hence/thus/consequently/so\".

Output ONLY this JSON (replace t1/t2/t3 with the exact term WORDS from the syllogism text):
{\"terms\": [\"t1\", \"t2\", \"t3\"],
\"premise1\": {\"type\": \"A/E/I/O\",
  \"subject\": \"term <- exact word(s) from text\",
  \"predicate\": \"term <- exact word(s) from text\"},
\"premise2\": {\"type\": \"A/E/I/O\",
  \"subject\": \"term <- exact word(s) from text\",
  \"predicate\": \"term <- exact word(s) from text\"},
\"conclusion\": {\"type\": \"A/E/I/O\",
  \"subject\": \"term <- exact word(s) from text\",
  \"predicate\": \"term <- exact word(s) from text\"}}";

pub fn render_extraction_prompt(syllogism: &str) -> String {
    EXTRACTION.replacen(PLACEHOLDER, syllogism, 1)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn zero_shot_substitution() {
        let p = render_prompt(PromptKind::ZeroShot, "X");
        assert!(p.contains("\n\nSyllogism: X\n\n"));
        assert!(p.ends_with("Answer with exactly one word: true or false"));
        assert!(!p.contains(PLACEHOLDER));
    }

    #[test]
    fn few_shot_has_seven_examples() {
        let p = render_prompt(PromptKind::FewShot, "X");
        let examples = p.lines().filter(|l| l.starts_with('"') && (l.ends_with("-> true") || l.ends_with("-> false"))).count();
        assert_eq!(examples, 7);
    }

    #[test]
    fn few_shot_cot_has_six_worked_examples() {
        let p = render_prompt(PromptKind::FewShotCot, "X");
        assert_eq!(p.matches("\nExample ").count(), 6);
        assert!(p.ends_with("write your final answer as: ANSWER: true or ANSWER: false"));
    }

    #[test]
    fn simple_cot_ends_with_answer_instruction() {
        assert!(render_prompt(PromptKind::SimpleCot, "X").ends_with("End your response with exactly: ANSWER: true or ANSWER: false"));
    }

    #[test]
    fn placeholder_in_text_is_not_reexpanded() {
        let p = render_prompt(PromptKind::ZeroShot, "{syllogism}");
        assert_eq!(p.matches(PLACEHOLDER).count(), 1);
    }

    #[test]
    fn extraction_prompt() {
        let p = render_extraction_prompt("All a are b. All b are c. Therefore, all a are c.");
        assert!(p.starts_with("Extract the logical structure of this syllogism."));
        assert!(p.contains("SYLLOGISM: All a are b."));
    }
}
