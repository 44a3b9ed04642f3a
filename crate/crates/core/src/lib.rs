//! Splay, tango, and multi-splay trees on a unit-cost pointer machine,
//! with the interleave lower bound as an oracle and a harness for running
//! access-sequence experiments.

pub mod cost_model;
pub mod error;
pub mod fit;
pub mod harness;
pub mod multisplay;
pub mod reference;
pub mod skeleton;
pub mod splay;
pub mod structure;
pub mod tango;
pub mod workloads;

pub use cost_model::{CostMeter, Key, Side, Tree};
pub use error::{Error, Result};
pub use fit::{fit, FitModel, FitResult};
pub use harness::{
    fit_records, lglg_grid, parse_sizes, ratio_table, read_csv, run_experiment, run_matrix,
    validate_records, write_csv, ExperimentRecord, ExperimentSpec, Ordering, RunOptions,
    ValidationReport, CSV_HEADER,
};
pub use multisplay::MultiSplayTree;
pub use reference::{
    direct_interleave_bound, exact_common_path_probability, interleave_bound, opt_lower_bound, rho,
    unified_bound, AccessReport, CompleteTree, InterleaveTrace, Partition, ReferenceModel,
};
pub use splay::SplayTree;
pub use structure::{Structure, StructureKind};
pub use tango::TangoTree;
pub use workloads::{generate, AccessSequence, Rng, WorkloadKind, WorkloadParams};
