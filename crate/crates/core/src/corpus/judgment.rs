use core::fmt;
use core::str::FromStr;

use serde::{Deserialize, Serialize};

/// One of the five community judgment tags.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "UPPERCASE")]
pub enum Judgment {
    /// The poster is at fault.
    Yta,
    /// The poster is not at fault.
    Nta,
    /// Everyone involved is at fault.
    Esh,
    /// No one is at fault.
    Nah,
    /// Not enough information to judge.
    Info,
}

impl Judgment {
    pub const ALL: [Judgment; 5] = [
        Judgment::Yta,
        Judgment::Nta,
        Judgment::Esh,
        Judgment::Nah,
        Judgment::Info,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            Judgment::Yta => "YTA",
            Judgment::Nta => "NTA",
            Judgment::Esh => "ESH",
            Judgment::Nah => "NAH",
            Judgment::Info => "INFO",
        }
    }

    /// Case-insensitive match of a whole token against the five tags.
    pub fn from_tag(token: &str) -> Option<Judgment> {
        Judgment::ALL
            .into_iter()
            .find(|j| token.eq_ignore_ascii_case(j.as_str()))
    }

    pub fn valence(self) -> Valence {
        match self {
            Judgment::Yta | Judgment::Esh => Valence::Ya,
            Judgment::Nta | Judgment::Nah => Valence::Na,
            Judgment::Info => Valence::Neither,
        }
    }
}

impl fmt::Display for Judgment {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
#[error("unknown judgment label {0:?}")]
pub struct ParseJudgmentError(pub alloc::string::String);

impl FromStr for Judgment {
    type Err = ParseJudgmentError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Judgment::from_tag(s.trim()).ok_or_else(|| ParseJudgmentError(s.into()))
    }
}

/// Binary grouping of judgments: `Ya` is negative toward the poster, `Na`
/// positive. `INFO` and missing verdicts have no valence.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum Valence {
    #[serde(rename = "YA")]
    Ya,
    #[serde(rename = "NA")]
    Na,
    #[serde(rename = "NONE")]
    Neither,
}

impl Valence {
    pub fn of(judgment: Option<Judgment>) -> Valence {
        judgment.map_or(Valence::Neither, Judgment::valence)
    }

    pub fn as_str(self) -> &'static str {
        match self {
            Valence::Ya => "YA",
            Valence::Na => "NA",
            Valence::Neither => "NONE",
        }
    }
}

impl fmt::Display for Valence {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

/// First standalone judgment tag in `text`, scanning left to right.
///
/// A tag is standalone when it is a maximal run of alphanumeric characters,
/// so `"NTA,"` matches while `"nothing"` does not.
pub fn extract_judgment(text: &str) -> Option<Judgment> {
    text.split(|c: char| !c.is_alphanumeric())
        .find_map(Judgment::from_tag)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn single_tag() {
        assert_eq!(extract_judgment("NTA, she was rude first"), Some(Judgment::Nta));
    }

    #[test]
    fn first_occurrence_wins() {
        assert_eq!(
            extract_judgment("I'd say ESH but leaning YTA"),
            Some(Judgment::Esh)
        );
    }

    #[test]
    fn embedded_tags_are_not_standalone() {
        assert_eq!(extract_judgment("nothing to add here"), None);
        assert_eq!(extract_judgment("YTAH"), None);
        assert_eq!(extract_judgment("infohazard"), None);
    }

    #[test]
    fn case_and_punctuation() {
        assert_eq!(extract_judgment("definitely yta."), Some(Judgment::Yta));
        assert_eq!(extract_judgment("(Info) how old is he?"), Some(Judgment::Info));
        assert_eq!(extract_judgment("nah_bro"), Some(Judgment::Nah));
        assert_eq!(extract_judgment(""), None);
    }

    #[test]
    fn valence_is_exhaustive() {
        assert_eq!(Judgment::Yta.valence(), Valence::Ya);
        assert_eq!(Judgment::Esh.valence(), Valence::Ya);
        assert_eq!(Judgment::Nta.valence(), Valence::Na);
        assert_eq!(Judgment::Nah.valence(), Valence::Na);
        assert_eq!(Judgment::Info.valence(), Valence::Neither);
        assert_eq!(Valence::of(None), Valence::Neither);
    }

    #[test]
    fn parse_labels() {
        assert_eq!("esh".parse::<Judgment>(), Ok(Judgment::Esh));
        assert!("maybe".parse::<Judgment>().is_err());
    }
}
