//! Fixtures shared by the benchmarks.

use bstlab::{
    generate, AccessSequence, Result, Structure, StructureKind, WorkloadKind, WorkloadParams,
};

/// A sequence of about `m` accesses from the given family.
pub fn sequence(workload: WorkloadKind, n: usize, k: usize, m: usize) -> Result<AccessSequence> {
    let mut params = WorkloadParams::new(workload, n, k, 0x5eed);
    let per_pass = match workload {
        WorkloadKind::WorkingSet => (n / k.max(1)) * k.max(1),
        _ => n,
    };
    params.passes = (m / per_pass.max(1)).max(1);
    generate(workload, params)
}

/// Replays `seq` on a fresh structure and returns the total cost.
pub fn replay(structure: StructureKind, seq: &AccessSequence) -> Result<u64> {
    let mut tree: Box<dyn Structure> = structure.build(seq.n)?;
    for &x in &seq.keys {
        tree.access(x)?;
    }
    Ok(tree.meter().total())
}
