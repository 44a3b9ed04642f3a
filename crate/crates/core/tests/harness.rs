//! Experiment plumbing: matrices, CSV round trips, validation, and fits over
//! real records.

use bstlab::{
    fit_records, parse_sizes, ratio_table, read_csv, run_experiment, run_matrix, validate_records,
    write_csv, ExperimentSpec, FitModel, Ordering, RunOptions, StructureKind, WorkloadKind,
};

use StructureKind::{Multisplay, Splay, Tango};

fn matrix(workload: WorkloadKind, sizes: &[usize], k: usize) -> Vec<ExperimentSpec> {
    let mut specs = Vec::new();
    for &n in sizes {
        for s in StructureKind::ALL {
            specs.push(ExperimentSpec::new(s, workload, n, k, 3));
        }
    }
    specs
}

#[test]
fn matrix_matches_single_runs_in_order() {
    let specs = matrix(WorkloadKind::Random, &[64, 100], 0);
    let records = run_matrix(&specs, RunOptions::default()).unwrap();
    assert_eq!(records.len(), specs.len());
    for (spec, rec) in specs.iter().zip(&records) {
        assert_eq!(rec, &run_experiment(*spec, RunOptions::default()).unwrap());
    }
    // structures sharing a sequence share its length and bound
    for group in records.chunks(3) {
        assert!(group
            .iter()
            .all(|r| r.m == group[0].m && r.ib == group[0].ib));
    }
}

#[test]
fn matrix_is_deterministic() {
    let specs = matrix(WorkloadKind::WorkingSet, &[128], 4);
    let a = run_matrix(&specs, RunOptions::default()).unwrap();
    let b = run_matrix(
        &specs,
        RunOptions {
            validate_structures: true,
        },
    )
    .unwrap();
    assert_eq!(a, b);
}

#[test]
fn csv_round_trip() {
    let records = run_matrix(
        &matrix(WorkloadKind::Unified, &[64, 256], 4),
        RunOptions::default(),
    )
    .unwrap();
    let mut buf = Vec::new();
    write_csv(&mut buf, &records).unwrap();
    let text = String::from_utf8(buf.clone()).unwrap();
    assert!(text.starts_with(bstlab::harness::CSV_HEADER));
    assert_eq!(read_csv(buf.as_slice()).unwrap(), records);
}

#[test]
fn empty_csv_still_has_a_header() {
    let mut buf = Vec::new();
    write_csv(&mut buf, &[]).unwrap();
    assert_eq!(
        String::from_utf8(buf).unwrap().trim(),
        bstlab::harness::CSV_HEADER
    );
}

#[test]
fn foreign_csv_is_rejected() {
    assert!(read_csv("a,b\n1,2\n".as_bytes()).is_err());
}

#[test]
fn records_satisfy_bound_and_ordering() {
    let records = run_matrix(
        &matrix(WorkloadKind::WorkingSet, &[1024], 16),
        RunOptions::default(),
    )
    .unwrap();
    let order: Ordering = "splay<multisplay<tango".parse().unwrap();
    let report = validate_records(&records, Some(&order));
    assert!(report.ok(), "{:?}", report.violations);
    assert_eq!(report.checked, 3);
}

#[test]
fn tampered_records_are_flagged() {
    let mut records = run_matrix(
        &matrix(WorkloadKind::Sequential, &[256], 0),
        RunOptions::default(),
    )
    .unwrap();
    let reversed: Ordering = "tango<splay".parse().unwrap();
    assert_eq!(
        validate_records(&records, Some(&reversed)).violations.len(),
        1
    );
    records[0].total_cost = records[0].m as u64 - 1;
    let report = validate_records(&records, None);
    assert_eq!(report.violations.len(), 1);
    assert!(report.violations[0].contains("below lower bound"));
}

#[test]
fn non_strict_ordering_allows_ties() {
    let records = run_matrix(
        &[ExperimentSpec::new(Splay, WorkloadKind::Random, 50, 0, 1)],
        RunOptions::default(),
    )
    .unwrap();
    let mut twin = records[0].clone();
    twin.structure = Multisplay;
    let both = vec![records[0].clone(), twin];
    assert!(validate_records(&both, Some(&"splay<=multisplay".parse().unwrap())).ok());
    assert!(!validate_records(&both, Some(&"splay<multisplay".parse().unwrap())).ok());
}

#[test]
fn splay_random_cost_fits_lg_n() {
    let sizes = parse_sizes("2^6..2^12").unwrap();
    let specs: Vec<_> = sizes
        .iter()
        .map(|&n| ExperimentSpec::new(Splay, WorkloadKind::Random, n, 0, 1))
        .collect();
    let records = run_matrix(&specs, RunOptions::default()).unwrap();
    let f = fit_records(&records, FitModel::LinearInLgn, "n", "avg_cost").unwrap();
    assert!(f.slope() > 1.0 && f.r_squared > 0.98, "{f:?}");
}

#[test]
fn ratio_table_pairs_sizes() {
    let sizes = [64usize, 128, 256];
    let run = |s| {
        let specs: Vec<_> = sizes
            .iter()
            .map(|&n| ExperimentSpec::new(s, WorkloadKind::Random, n, 0, 1))
            .collect();
        run_matrix(&specs, RunOptions::default()).unwrap()
    };
    let (t, s) = (run(Tango), run(Splay));
    let table = ratio_table(&t, &s).unwrap();
    assert_eq!(table.iter().map(|p| p.0).collect::<Vec<_>>(), sizes);
    assert!(table.iter().all(|&(_, r)| r > 1.0));
    assert!(ratio_table(&t[..2], &s).is_err());
}
