use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

/// Category of a catalogued attack.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "UPPERCASE")]
pub enum AttackCategory {
    Dos,
    U2r,
}

/// The ten DoS/U2R attack labels the detection layers are built around,
/// mapped to their category.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct AttackCatalog {
    entries: BTreeMap<String, AttackCategory>,
}

impl AttackCatalog {
    /// The standard ten-attack catalog: six DoS, four U2R.
    pub fn standard() -> Self {
        use AttackCategory::{Dos, U2r};
        let entries = [
            ("back", Dos),
            ("buffer_overflow", U2r),
            ("land", Dos),
            ("loadmodule", U2r),
            ("neptune", Dos),
            ("perl", U2r),
            ("pod", Dos),
            ("rootkit", U2r),
            ("smurf", Dos),
            ("teardrop", Dos),
        ];
        AttackCatalog {
            entries: entries.iter().map(|(n, c)| (n.to_string(), *c)).collect(),
        }
    }

    pub fn contains(&self, name: &str) -> bool {
        self.entries.contains_key(name)
    }

    pub fn category(&self, name: &str) -> Option<AttackCategory> {
        self.entries.get(name).copied()
    }

    /// Attack names in stable (lexicographic) order.
    pub fn names(&self) -> impl Iterator<Item = &str> {
        self.entries.keys().map(String::as_str)
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }
}

impl Default for AttackCatalog {
    fn default() -> Self {
        Self::standard()
    }
}
