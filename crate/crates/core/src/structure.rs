use std::fmt;
use std::str::FromStr;

use crate::cost_model::{CostMeter, Key};
use crate::error::{Error, Result};
use crate::multisplay::MultiSplayTree;
use crate::reference::Partition;
use crate::splay::SplayTree;
use crate::tango::TangoTree;

/// A binary search tree over `1..=n` that serves accesses on the metered
/// substrate.
pub trait Structure: Send {
    fn n(&self) -> usize;

    /// Serves one access and returns its cost.
    fn access(&mut self, key: Key) -> Result<u64>;

    fn meter(&self) -> CostMeter;

    /// Unmetered check of every structural invariant.
    fn validate(&self) -> Result<()>;

    /// Keys grouped by auxiliary tree, for trees that have them.
    fn aux_partition(&self) -> Option<Partition> {
        None
    }
}

#[derive(
    Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, serde::Serialize, serde::Deserialize,
)]
#[serde(rename_all = "lowercase")]
pub enum StructureKind {
    Splay,
    Tango,
    Multisplay,
}

impl StructureKind {
    pub const ALL: [StructureKind; 3] = [
        StructureKind::Splay,
        StructureKind::Tango,
        StructureKind::Multisplay,
    ];

    pub fn build(self, n: usize) -> Result<Box<dyn Structure>> {
        Ok(match self {
            StructureKind::Splay => Box::new(SplayTree::new(n)?),
            StructureKind::Tango => Box::new(TangoTree::new(n)?),
            StructureKind::Multisplay => Box::new(MultiSplayTree::new(n)?),
        })
    }

    pub fn as_str(self) -> &'static str {
        match self {
            StructureKind::Splay => "splay",
            StructureKind::Tango => "tango",
            StructureKind::Multisplay => "multisplay",
        }
    }
}

impl fmt::Display for StructureKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for StructureKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "splay" => Ok(StructureKind::Splay),
            "tango" => Ok(StructureKind::Tango),
            "multisplay" | "multi-splay" => Ok(StructureKind::Multisplay),
            _ => Err(Error::Parse(format!("unknown structure {s:?}"))),
        }
    }
}
