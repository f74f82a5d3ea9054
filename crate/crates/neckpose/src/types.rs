//! Shared row and label types used across the pipeline.

use std::fmt;
use std::str::FromStr;

use crate::error::Error;

/// Number of posture classes.
pub const CLASS_COUNT: usize = 9;

/// The nine canonical neck postures.
///
/// Naming follows the neck-direction shorthand: U(p), D(own), R(ight),
/// L(eft), and the four diagonal combinations, plus M(iddle) for the
/// neutral reference posture. The declaration order is the canonical class
/// order used by confusion matrices, reports, and serialized forests.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum PostureLabel {
    /// Neck up (extension).
    Nu,
    /// Neck down (flexion).
    Nd,
    /// Neck rotated right.
    Nr,
    /// Neck rotated left.
    Nl,
    /// Neck rotated right + up.
    Nru,
    /// Neck rotated right + down.
    Nrd,
    /// Neck rotated left + up.
    Nlu,
    /// Neck rotated left + down.
    Nld,
    /// Neck middle (neutral).
    Nm,
}

impl PostureLabel {
    /// All classes in canonical order.
    pub const ALL: [PostureLabel; CLASS_COUNT] = [
        PostureLabel::Nu,
        PostureLabel::Nd,
        PostureLabel::Nr,
        PostureLabel::Nl,
        PostureLabel::Nru,
        PostureLabel::Nrd,
        PostureLabel::Nlu,
        PostureLabel::Nld,
        PostureLabel::Nm,
    ];

    /// Canonical index of this class (0..9).
    pub fn index(self) -> usize {
        self as usize
    }

    /// Inverse of [`PostureLabel::index`].
    pub fn from_index(index: usize) -> Option<PostureLabel> {
        Self::ALL.get(index).copied()
    }

    /// Upper-case tag used in schedules, reports, and CSV files.
    pub fn as_str(self) -> &'static str {
        match self {
            PostureLabel::Nu => "NU",
            PostureLabel::Nd => "ND",
            PostureLabel::Nr => "NR",
            PostureLabel::Nl => "NL",
            PostureLabel::Nru => "NRU",
            PostureLabel::Nrd => "NRD",
            PostureLabel::Nlu => "NLU",
            PostureLabel::Nld => "NLD",
            PostureLabel::Nm => "NM",
        }
    }
}

impl fmt::Display for PostureLabel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for PostureLabel {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self, Error> {
        let tag = s.trim().to_ascii_uppercase();
        Self::ALL
            .into_iter()
            .find(|label| label.as_str() == tag)
            .ok_or_else(|| Error::Parse {
                line: 0,
                message: format!("unknown posture label `{s}`"),
            })
    }
}

/// One unlabelled feature vector with its timestamp.
#[derive(Debug, Clone, PartialEq)]
pub struct FeatureRow {
    /// Seconds from session start.
    pub t: f64,
    pub features: Vec<f64>,
}

/// One labelled feature vector.
#[derive(Debug, Clone, PartialEq)]
pub struct LabeledFeatureRow {
    /// Seconds from session start.
    pub t: f64,
    pub features: Vec<f64>,
    pub label: PostureLabel,
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn label_order_and_roundtrip() {
        assert_eq!(PostureLabel::ALL.len(), CLASS_COUNT);
        for (i, label) in PostureLabel::ALL.into_iter().enumerate() {
            assert_eq!(label.index(), i);
            assert_eq!(PostureLabel::from_index(i), Some(label));
            assert_eq!(label.as_str().parse::<PostureLabel>().unwrap(), label);
        }
        assert_eq!(PostureLabel::from_index(9), None);
    }

    #[test]
    fn label_parse_is_case_insensitive_and_trims() {
        assert_eq!(" nru ".parse::<PostureLabel>().unwrap(), PostureLabel::Nru);
        assert!("NX".parse::<PostureLabel>().is_err());
    }

    #[test]
    fn canonical_order_matches_posture_shorthand() {
        let tags: Vec<_> = PostureLabel::ALL.iter().map(|l| l.as_str()).collect();
        assert_eq!(
            tags,
            ["NU", "ND", "NR", "NL", "NRU", "NRD", "NLU", "NLD", "NM"]
        );
    }
}
