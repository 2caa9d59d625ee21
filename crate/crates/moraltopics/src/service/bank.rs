//! Question banks as served: JSON files tagged by kind.

use std::path::Path;

use moraltopics_core::naming::NamingQuestion;
use moraltopics_core::survey::{Screening, ValidationQuestion};
use serde::{Deserialize, Serialize};

use crate::formats::{read_json, FormatError};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum BankFile {
    Naming {
        bank_id: String,
        questions: Vec<NamingQuestion>,
    },
    Validation {
        bank_id: String,
        #[serde(default)]
        screening: Option<Screening>,
        questions: Vec<ValidationQuestion>,
    },
}

impl BankFile {
    pub fn bank_id(&self) -> &str {
        match self {
            BankFile::Naming { bank_id, .. } | BankFile::Validation { bank_id, .. } => bank_id,
        }
    }

    pub fn kind(&self) -> &'static str {
        match self {
            BankFile::Naming { .. } => "naming",
            BankFile::Validation { .. } => "validation",
        }
    }

    pub fn question_ids(&self) -> Vec<String> {
        match self {
            BankFile::Naming { questions, .. } => questions.iter().map(|q| q.cluster_id.to_string()).collect(),
            BankFile::Validation { questions, .. } => questions.iter().map(|q| q.question_id.clone()).collect(),
        }
    }

    pub fn screening(&self) -> Option<&Screening> {
        match self {
            BankFile::Validation { screening, .. } => screening.as_ref(),
            BankFile::Naming { .. } => None,
        }
    }

    pub fn validation_questions(&self) -> &[ValidationQuestion] {
        match self {
            BankFile::Validation { questions, .. } => questions,
            BankFile::Naming { .. } => &[],
        }
    }
}

#[derive(Debug, thiserror::Error)]
pub enum BankError {
    #[error(transparent)]
    Format(#[from] FormatError),
    #[error("cannot list bank directory {0}: {1}")]
    Dir(String, std::io::Error),
    #[error("bank id {0:?} appears in more than one file")]
    DuplicateBank(String),
    #[error("bank {bank:?} repeats question id {question:?}")]
    DuplicateQuestion { bank: String, question: String },
    #[error("bank {0:?} uses its screening post as a regular question")]
    ScreeningInBank(String),
}

/// Loads every `*.json` file in `dir`, sorted by file name.
pub fn load_banks(dir: &Path) -> Result<Vec<BankFile>, BankError> {
    let mut paths: Vec<_> = std::fs::read_dir(dir)
        .map_err(|e| BankError::Dir(dir.display().to_string(), e))?
        .filter_map(|e| e.ok().map(|e| e.path()))
        .filter(|p| p.extension().is_some_and(|x| x == "json"))
        .collect();
    paths.sort();
    let mut banks: Vec<BankFile> = Vec::new();
    for p in paths {
        let bank: BankFile = read_json(&p)?;
        check_bank(&bank)?;
        if banks.iter().any(|b| b.bank_id() == bank.bank_id()) {
            return Err(BankError::DuplicateBank(bank.bank_id().to_string()));
        }
        banks.push(bank);
    }
    Ok(banks)
}

pub fn check_bank(bank: &BankFile) -> Result<(), BankError> {
    let ids = bank.question_ids();
    let mut seen = std::collections::BTreeSet::new();
    for id in &ids {
        if !seen.insert(id.as_str()) {
            return Err(BankError::DuplicateQuestion {
                bank: bank.bank_id().to_string(),
                question: id.clone(),
            });
        }
    }
    if let Some(s) = bank.screening() {
        if seen.contains(s.question.question_id.as_str()) {
            return Err(BankError::ScreeningInBank(bank.bank_id().to_string()));
        }
    }
    Ok(())
}
