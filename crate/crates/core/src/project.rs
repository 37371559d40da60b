use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::Error;

/// Project categories used both to label reference-class observations and to
/// key the uplift schedules.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ProjectType {
    Rail,
    Road,
    FixedLink,
    Building,
    It,
    StandardCivil,
    NonstandardCivil,
    Other,
}

impl ProjectType {
    pub const ALL: [ProjectType; 8] = [
        ProjectType::Rail,
        ProjectType::Road,
        ProjectType::FixedLink,
        ProjectType::Building,
        ProjectType::It,
        ProjectType::StandardCivil,
        ProjectType::NonstandardCivil,
        ProjectType::Other,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            ProjectType::Rail => "rail",
            ProjectType::Road => "road",
            ProjectType::FixedLink => "fixed_link",
            ProjectType::Building => "building",
            ProjectType::It => "it",
            ProjectType::StandardCivil => "standard_civil",
            ProjectType::NonstandardCivil => "nonstandard_civil",
            ProjectType::Other => "other",
        }
    }
}

impl fmt::Display for ProjectType {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for ProjectType {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let s = s.trim();
        ProjectType::ALL
            .into_iter()
            .find(|t| t.as_str().eq_ignore_ascii_case(s))
            .ok_or_else(|| Error::UnknownProjectType(s.to_string()))
    }
}
