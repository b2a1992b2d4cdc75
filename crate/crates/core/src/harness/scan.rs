use crate::dataset::DatasetInstance;
use crate::extraction::ExtractionChain;
use crate::logic::{modes_matching, Form, SemanticsMode};
use serde::{Deserialize, Serialize};

/// Forms whose validity depends on existential import.
pub const IMPORT_FORMS: [(&str, &str); 2] = [("Darapti", "AAI-3"), ("Felapton", "EAO-3")];

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ImportMatch {
    pub id: String,
    pub form: String,
    pub name: String,
    pub gold_valid: bool,
    /// Semantics modes under which the solver agrees with the gold label.
    pub modes_agreeing: Vec<SemanticsMode>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ImportScanReport {
    pub scanned: usize,
    pub darapti: usize,
    pub felapton: usize,
    pub matches: Vec<ImportMatch>,
    /// Modes consistent with every matched gold label, in declaration
    /// order; empty when no single mode fits.
    pub consistent_modes: Vec<SemanticsMode>,
    pub unextractable: Vec<String>,
}

impl ImportScanReport {
    /// Weakest mode that explains all matches, or `None` without matches.
    pub fn suggested_mode(&self) -> Option<SemanticsMode> {
        if self.matches.is_empty() {
            return None;
        }
        self.consistent_modes.first().copied()
    }
}

pub fn scan_import_forms(dataset: &[DatasetInstance], chain: &ExtractionChain) -> ImportScanReport {
    let targets: Vec<(Form, &str)> = IMPORT_FORMS.iter().map(|(n, c)| (Form::parse(c).unwrap(), *n)).collect();
    let mut report = ImportScanReport {
        scanned: dataset.len(),
        darapti: 0,
        felapton: 0,
        matches: Vec::new(),
        consistent_modes: SemanticsMode::ALL.to_vec(),
        unextractable: Vec::new(),
    };
    for inst in dataset {
        let structure = match chain.extract(&inst.text, Some(inst.plausibility)).result {
            Ok(s) => s,
            Err(_) => {
                report.unextractable.push(inst.id.clone());
                continue;
            }
        };
        let Some(form) = Form::of(&structure) else { continue };
        let Some((_, name)) = targets.iter().find(|(f, _)| *f == form) else { continue };
        match *name {
            "Darapti" => report.darapti += 1,
            _ => report.felapton += 1,
        }
        let modes = modes_matching(&structure, inst.valid).unwrap_or_default();
        report.consistent_modes.retain(|m| modes.contains(m));
        report.matches.push(ImportMatch {
            id: inst.id.clone(),
            form: form.code(),
            name: name.to_string(),
            gold_valid: inst.valid,
            modes_agreeing: modes,
        });
    }
    report
}
