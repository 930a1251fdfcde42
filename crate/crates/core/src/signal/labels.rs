use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::Error;

/// Annotated activity, as labelled from video.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FineLabel {
    Walking,
    Standing,
    Sitting,
    Supine,
    LeftLateral,
    RightLateral,
    SitToStand,
    StandToSit,
    SitToLie,
    LieToSit,
}

/// The five classes the classifier is trained on.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CoarseLabel {
    Walk,
    Stand,
    Sit,
    LieDown,
    Transfer,
}

impl FineLabel {
    pub const ALL: [FineLabel; 10] = [
        FineLabel::Walking,
        FineLabel::Standing,
        FineLabel::Sitting,
        FineLabel::Supine,
        FineLabel::LeftLateral,
        FineLabel::RightLateral,
        FineLabel::SitToStand,
        FineLabel::StandToSit,
        FineLabel::SitToLie,
        FineLabel::LieToSit,
    ];

    pub fn coarse(self) -> CoarseLabel {
        match self {
            FineLabel::Walking => CoarseLabel::Walk,
            FineLabel::Standing => CoarseLabel::Stand,
            FineLabel::Sitting => CoarseLabel::Sit,
            FineLabel::Supine | FineLabel::LeftLateral | FineLabel::RightLateral => CoarseLabel::LieDown,
            FineLabel::SitToStand | FineLabel::StandToSit | FineLabel::SitToLie | FineLabel::LieToSit => {
                CoarseLabel::Transfer
            }
        }
    }

    pub fn index(self) -> usize {
        FineLabel::ALL.iter().position(|&l| l == self).unwrap()
    }

    pub fn is_transfer(self) -> bool {
        self.coarse() == CoarseLabel::Transfer
    }

    pub fn as_str(self) -> &'static str {
        match self {
            FineLabel::Walking => "walking",
            FineLabel::Standing => "standing",
            FineLabel::Sitting => "sitting",
            FineLabel::Supine => "supine",
            FineLabel::LeftLateral => "left_lateral",
            FineLabel::RightLateral => "right_lateral",
            FineLabel::SitToStand => "sit_to_stand",
            FineLabel::StandToSit => "stand_to_sit",
            FineLabel::SitToLie => "sit_to_lie",
            FineLabel::LieToSit => "lie_to_sit",
        }
    }
}

impl CoarseLabel {
    pub const ALL: [CoarseLabel; 5] = [
        CoarseLabel::Walk,
        CoarseLabel::Stand,
        CoarseLabel::Sit,
        CoarseLabel::LieDown,
        CoarseLabel::Transfer,
    ];

    /// Coarse labels map to themselves.
    pub fn coarse(self) -> CoarseLabel {
        self
    }

    pub fn index(self) -> usize {
        self as usize
    }

    pub fn as_str(self) -> &'static str {
        match self {
            CoarseLabel::Walk => "walk",
            CoarseLabel::Stand => "stand",
            CoarseLabel::Sit => "sit",
            CoarseLabel::LieDown => "lie_down",
            CoarseLabel::Transfer => "transfer",
        }
    }
}

impl fmt::Display for FineLabel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl fmt::Display for CoarseLabel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for FineLabel {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        FineLabel::ALL
            .iter()
            .copied()
            .find(|l| l.as_str() == s.trim())
            .ok_or_else(|| Error::Format(format!("unknown activity label `{s}`")))
    }
}

impl FromStr for CoarseLabel {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        CoarseLabel::ALL
            .iter()
            .copied()
            .find(|l| l.as_str() == s.trim())
            .ok_or_else(|| Error::Format(format!("unknown class label `{s}`")))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn coarse_mapping_is_total_and_idempotent() {
        for fine in FineLabel::ALL {
            let c = fine.coarse();
            assert_eq!(c.coarse(), c);
        }
        assert_eq!(FineLabel::Supine.coarse(), CoarseLabel::LieDown);
        assert_eq!(FineLabel::RightLateral.coarse(), CoarseLabel::LieDown);
        assert_eq!(FineLabel::LieToSit.coarse(), CoarseLabel::Transfer);
        assert_eq!(FineLabel::Walking.coarse(), CoarseLabel::Walk);
    }

    #[test]
    fn labels_round_trip_through_strings() {
        for fine in FineLabel::ALL {
            assert_eq!(fine.as_str().parse::<FineLabel>().unwrap(), fine);
            let json = serde_json::to_string(&fine).unwrap();
            assert_eq!(json, format!("\"{}\"", fine.as_str()));
        }
        assert!("jogging".parse::<FineLabel>().is_err());
    }
}
