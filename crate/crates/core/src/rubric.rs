use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

/// The four evaluation criteria, in report column order.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Criterion {
    Compilation,
    Adherence,
    BestPractices,
    Modularity,
}

impl Criterion {
    pub const ALL: [Criterion; 4] = [
        Criterion::Compilation,
        Criterion::Adherence,
        Criterion::BestPractices,
        Criterion::Modularity,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            Criterion::Compilation => "compilation",
            Criterion::Adherence => "adherence",
            Criterion::BestPractices => "best_practices",
            Criterion::Modularity => "modularity",
        }
    }

    /// Column heading used in text tables.
    pub fn short_label(self) -> &'static str {
        match self {
            Criterion::Compilation => "Comp.",
            Criterion::Adherence => "Adher.",
            Criterion::BestPractices => "BestPrac.",
            Criterion::Modularity => "Modular.",
        }
    }
}

impl fmt::Display for Criterion {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Criterion {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Criterion::ALL
            .into_iter()
            .find(|c| c.as_str() == s.trim())
            .ok_or_else(|| format!("unknown criterion `{s}`"))
    }
}
