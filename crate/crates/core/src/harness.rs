//! Experiment matrices, CSV records, ratio tables, and record validation.

use std::collections::{BTreeMap, HashMap};
use std::io::{Read, Write};
use std::str::FromStr;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::fit::{fit, FitModel, FitResult};
use crate::reference::{interleave_bound, lower_bound_from};
use crate::structure::StructureKind;
use crate::workloads::{generate, AccessSequence, WorkloadKind, WorkloadParams};

pub const CSV_HEADER: &str = "structure,workload,n,k,m,seed,total_cost,access_inits,link_follows,rotations,avg_cost,ib,opt_lb";

/// One CSV row.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExperimentRecord {
    pub structure: StructureKind,
    pub workload: WorkloadKind,
    pub n: usize,
    pub k: usize,
    pub m: usize,
    pub seed: u64,
    pub total_cost: u64,
    pub access_inits: u64,
    pub link_follows: u64,
    pub rotations: u64,
    pub avg_cost: f64,
    pub ib: u64,
    pub opt_lb: f64,
}

impl ExperimentRecord {
    /// Numeric column by header name.
    pub fn column(&self, name: &str) -> Result<f64> {
        Ok(match name {
            "n" => self.n as f64,
            "k" => self.k as f64,
            "m" => self.m as f64,
            "seed" => self.seed as f64,
            "total_cost" => self.total_cost as f64,
            "access_inits" => self.access_inits as f64,
            "link_follows" => self.link_follows as f64,
            "rotations" => self.rotations as f64,
            "avg_cost" => self.avg_cost,
            "ib" => self.ib as f64,
            "opt_lb" => self.opt_lb,
            _ => return Err(Error::Parse(format!("unknown column {name:?}"))),
        })
    }

    fn label(&self) -> String {
        format!(
            "{} {} n={} k={} seed={}",
            self.structure, self.workload, self.n, self.k, self.seed
        )
    }
}

/// One cell of an experiment matrix.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct ExperimentSpec {
    pub structure: StructureKind,
    pub workload: WorkloadKind,
    pub params: WorkloadParams,
}

impl ExperimentSpec {
    pub fn new(
        structure: StructureKind,
        workload: WorkloadKind,
        n: usize,
        k: usize,
        seed: u64,
    ) -> Self {
        ExperimentSpec {
            structure,
            workload,
            params: WorkloadParams::new(workload, n, k, seed),
        }
    }
}

#[derive(Debug, Clone, Copy, Default)]
pub struct RunOptions {
    /// Check every structural invariant after every access.
    pub validate_structures: bool,
}

/// Replays `seq` on a fresh structure. `ib` is the sequence's interleave
/// bound.
pub fn run_on(
    structure: StructureKind,
    seq: &AccessSequence,
    ib: u64,
    opts: RunOptions,
) -> Result<ExperimentRecord> {
    let mut tree = structure.build(seq.n)?;
    if opts.validate_structures {
        tree.validate()?;
    }
    for (i, &x) in seq.keys.iter().enumerate() {
        tree.access(x)?;
        if opts.validate_structures {
            tree.validate().map_err(|e| {
                Error::Invariant(format!("{structure} after access #{i} (key {x}): {e}"))
            })?;
        }
    }
    let meter = tree.meter();
    let m = seq.m();
    let total = meter.total();
    Ok(ExperimentRecord {
        structure,
        workload: seq.kind,
        n: seq.n,
        k: seq.k,
        m,
        seed: seq.seed,
        total_cost: total,
        access_inits: meter.access_inits,
        link_follows: meter.link_follows,
        rotations: meter.rotations,
        avg_cost: if m == 0 { 0.0 } else { total as f64 / m as f64 },
        ib,
        opt_lb: lower_bound_from(ib, m, seq.n),
    })
}

pub fn run_experiment(spec: ExperimentSpec, opts: RunOptions) -> Result<ExperimentRecord> {
    let seq = generate(spec.workload, spec.params)?;
    let ib = interleave_bound(&seq.keys, seq.n)?.total;
    run_on(spec.structure, &seq, ib, opts)
}

/// Runs every spec, sharing each distinct sequence (and its interleave
/// bound) across the structures that replay it. Output follows input order.
pub fn run_matrix(specs: &[ExperimentSpec], opts: RunOptions) -> Result<Vec<ExperimentRecord>> {
    let mut groups: Vec<(WorkloadKind, WorkloadParams, Vec<usize>)> = Vec::new();
    let mut index: HashMap<(WorkloadKind, WorkloadParams), usize> = HashMap::new();
    for (i, s) in specs.iter().enumerate() {
        let g = *index.entry((s.workload, s.params)).or_insert_with(|| {
            groups.push((s.workload, s.params, Vec::new()));
            groups.len() - 1
        });
        groups[g].2.push(i);
    }
    let done: Vec<Vec<(usize, ExperimentRecord)>> = groups
        .par_iter()
        .map(|(kind, params, members)| {
            let seq = generate(*kind, *params)?;
            let ib = interleave_bound(&seq.keys, seq.n)?.total;
            members
                .par_iter()
                .map(|&i| Ok((i, run_on(specs[i].structure, &seq, ib, opts)?)))
                .collect::<Result<Vec<_>>>()
        })
        .collect::<Result<_>>()?;
    let mut out: Vec<Option<ExperimentRecord>> = vec![None; specs.len()];
    for (i, r) in done.into_iter().flatten() {
        out[i] = Some(r);
    }
    Ok(out
        .into_iter()
        .map(|r| r.expect("every spec ran"))
        .collect())
}

pub fn write_csv<W: Write>(w: W, records: &[ExperimentRecord]) -> Result<()> {
    let mut wtr = csv::Writer::from_writer(w);
    for r in records {
        wtr.serialize(r)?;
    }
    if records.is_empty() {
        wtr.write_record(CSV_HEADER.split(','))?;
    }
    wtr.flush()?;
    Ok(())
}

pub fn read_csv<R: Read>(r: R) -> Result<Vec<ExperimentRecord>> {
    let mut rdr = csv::Reader::from_reader(r);
    let header: Vec<String> = rdr.headers()?.iter().map(str::to_owned).collect();
    if header.join(",") != CSV_HEADER {
        return Err(Error::Parse(format!(
            "unexpected CSV header {:?}",
            header.join(",")
        )));
    }
    rdr.deserialize().map(|r| r.map_err(Error::from)).collect()
}

/// Per-`n` ratio of average costs, `a / b`.
pub fn ratio_table(a: &[ExperimentRecord], b: &[ExperimentRecord]) -> Result<Vec<(usize, f64)>> {
    let index = |rs: &[ExperimentRecord], side: &str| -> Result<BTreeMap<usize, f64>> {
        let mut map = BTreeMap::new();
        for r in rs {
            if map.insert(r.n, r.avg_cost).is_some() {
                return Err(Error::Mismatch(format!(
                    "n={} appears twice in {side}",
                    r.n
                )));
            }
        }
        Ok(map)
    };
    let (ma, mb) = (index(a, "the first set")?, index(b, "the second set")?);
    if !ma.keys().eq(mb.keys()) {
        let ka: Vec<_> = ma.keys().collect();
        let kb: Vec<_> = mb.keys().collect();
        return Err(Error::Mismatch(format!("n values {ka:?} vs {kb:?}")));
    }
    Ok(ma
        .into_iter()
        .zip(mb.values())
        .map(|((n, x), y)| (n, x / y))
        .collect())
}

/// Fits column `y` against column `x` (`n` or `k`).
pub fn fit_records(
    records: &[ExperimentRecord],
    model: FitModel,
    x: &str,
    y: &str,
) -> Result<FitResult> {
    let pts = records
        .iter()
        .map(|r| Ok((r.column(x)?, r.column(y)?)))
        .collect::<Result<Vec<_>>>()?;
    fit(&pts, model)
}

/// A chain such as `splay<multisplay<=tango`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Ordering {
    pub first: StructureKind,
    /// Each following structure, and whether its cost must be strictly
    /// larger than the one before.
    pub rest: Vec<(StructureKind, bool)>,
}

impl FromStr for Ordering {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let mut rest = Vec::new();
        let mut cur = s.trim();
        let end = cur.find('<').unwrap_or(cur.len());
        let first: StructureKind = cur[..end].trim().parse()?;
        cur = &cur[end..];
        while !cur.is_empty() {
            let (strict, tail) = match cur.strip_prefix("<=") {
                Some(t) => (false, t),
                None => (true, &cur[1..]),
            };
            let end = tail.find('<').unwrap_or(tail.len());
            rest.push((tail[..end].trim().parse()?, strict));
            cur = &tail[end..];
        }
        if rest.is_empty() {
            return Err(Error::Parse(format!(
                "ordering {s:?} names a single structure"
            )));
        }
        Ok(Ordering { first, rest })
    }
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct ValidationReport {
    pub checked: usize,
    pub violations: Vec<String>,
}

impl ValidationReport {
    pub fn ok(&self) -> bool {
        self.violations.is_empty()
    }
}

/// Workload, n, k, seed, and m: records sharing these share a sequence.
type GroupKey = (WorkloadKind, usize, usize, u64, usize);

/// Checks the lower bound on every record, and optionally a cost ordering
/// among records that replayed the same sequence.
pub fn validate_records(
    records: &[ExperimentRecord],
    order: Option<&Ordering>,
) -> ValidationReport {
    let mut report = ValidationReport {
        checked: records.len(),
        violations: Vec::new(),
    };
    for r in records {
        let lb = lower_bound_from(r.ib, r.m, r.n);
        if (r.total_cost as f64) < r.opt_lb || (r.total_cost as f64) < lb {
            report.violations.push(format!(
                "{}: total_cost {} below lower bound {}",
                r.label(),
                r.total_cost,
                r.opt_lb.max(lb)
            ));
        }
    }
    if let Some(order) = order {
        let mut groups: BTreeMap<GroupKey, HashMap<StructureKind, u64>> = BTreeMap::new();
        for r in records {
            groups
                .entry((r.workload, r.n, r.k, r.seed, r.m))
                .or_default()
                .insert(r.structure, r.total_cost);
        }
        for ((w, n, k, seed, _), costs) in groups {
            let mut prev = order.first;
            for &(next, strict) in &order.rest {
                if let (Some(&a), Some(&b)) = (costs.get(&prev), costs.get(&next)) {
                    let holds = if strict { a < b } else { a <= b };
                    if !holds {
                        let rel = if strict { "<" } else { "<=" };
                        report.violations.push(format!(
                            "{w} n={n} k={k} seed={seed}: {prev} total {a} {rel} {next} total {b} fails"
                        ));
                    }
                }
                prev = next;
            }
        }
    }
    report
}

/// Parses sizes: comma-separated integers, `2^a`, power ranges `2^a..2^b`,
/// plain ranges `a..b`, and `lglg:<min>:<max>:<points>` for sizes spaced
/// evenly in `lg lg n`.
pub fn parse_sizes(spec: &str) -> Result<Vec<usize>> {
    let mut out = Vec::new();
    for item in spec.split(',').map(str::trim).filter(|s| !s.is_empty()) {
        if let Some(rest) = item.strip_prefix("lglg:") {
            let parts: Vec<&str> = rest.split(':').collect();
            if parts.len() != 3 {
                return Err(Error::Parse(format!(
                    "expected lglg:<min>:<max>:<points>, got {item:?}"
                )));
            }
            let lo = parse_size(parts[0])?;
            let hi = parse_size(parts[1])?;
            let points: usize = parts[2]
                .parse()
                .map_err(|_| Error::Parse(format!("bad point count in {item:?}")))?;
            out.extend(lglg_grid(lo, hi, points)?);
        } else if let Some((a, b)) = item.split_once("..") {
            let (a, b) = (a.trim(), b.trim());
            match (a.strip_prefix("2^"), b.strip_prefix("2^")) {
                (Some(x), Some(y)) => {
                    let (x, y) = (parse_exp(x)?, parse_exp(y)?);
                    out.extend((x..=y).map(|e| 1usize << e));
                }
                _ => out.extend(parse_size(a)?..=parse_size(b)?),
            }
        } else {
            out.push(parse_size(item)?);
        }
    }
    if out.is_empty() {
        return Err(Error::Parse(format!("no sizes in {spec:?}")));
    }
    Ok(out)
}

fn parse_exp(s: &str) -> Result<u32> {
    let e: u32 = s
        .trim()
        .parse()
        .map_err(|_| Error::Parse(format!("bad exponent {s:?}")))?;
    if e > 31 {
        return Err(Error::Parse(format!("exponent {e} too large")));
    }
    Ok(e)
}

fn parse_size(s: &str) -> Result<usize> {
    let s = s.trim();
    if let Some(e) = s.strip_prefix("2^") {
        return Ok(1usize << parse_exp(e)?);
    }
    s.parse()
        .map_err(|_| Error::Parse(format!("bad size {s:?}")))
}

/// `points` sizes between `lo` and `hi` spaced evenly in `lg lg n`,
/// rounded and deduplicated.
pub fn lglg_grid(lo: usize, hi: usize, points: usize) -> Result<Vec<usize>> {
    if lo < 4 || hi < lo || points < 2 {
        return Err(Error::Parse(format!(
            "lglg grid needs 4 <= min <= max and at least 2 points, got {lo}, {hi}, {points}"
        )));
    }
    let (a, b) = ((lo as f64).log2().log2(), (hi as f64).log2().log2());
    let mut out: Vec<usize> = (0..points)
        .map(|i| {
            let t = a + (b - a) * i as f64 / (points - 1) as f64;
            (2f64.powf(2f64.powf(t)).round() as usize).clamp(lo, hi)
        })
        .collect();
    out.dedup();
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn rec(structure: StructureKind, n: usize, avg: f64) -> ExperimentRecord {
        ExperimentRecord {
            structure,
            workload: WorkloadKind::Random,
            n,
            k: 0,
            m: 10,
            seed: 1,
            total_cost: (avg * 10.0) as u64,
            access_inits: 10,
            link_follows: 0,
            rotations: 0,
            avg_cost: avg,
            ib: 0,
            opt_lb: 10.0,
        }
    }

    #[test]
    fn splay_sequential_single_key() {
        let mut spec = ExperimentSpec::new(StructureKind::Splay, WorkloadKind::Sequential, 1, 0, 0);
        spec.params.passes = 1;
        let r = run_experiment(spec, RunOptions::default()).unwrap();
        assert_eq!((r.total_cost, r.avg_cost, r.m), (1, 1.0, 1));
    }

    #[test]
    fn csv_header_and_round_trip() {
        let specs: Vec<ExperimentSpec> = StructureKind::ALL
            .iter()
            .map(|&s| ExperimentSpec::new(s, WorkloadKind::WorkingSet, 64, 4, 3))
            .collect();
        let recs = run_matrix(
            &specs,
            RunOptions {
                validate_structures: true,
            },
        )
        .unwrap();
        let mut buf = Vec::new();
        write_csv(&mut buf, &recs).unwrap();
        let text = String::from_utf8(buf.clone()).unwrap();
        assert_eq!(text.lines().next().unwrap(), CSV_HEADER);
        assert_eq!(read_csv(&buf[..]).unwrap(), recs);
        let mut again = Vec::new();
        write_csv(
            &mut again,
            &run_matrix(&specs, RunOptions::default()).unwrap(),
        )
        .unwrap();
        assert_eq!(buf, again);
        for (r, s) in recs.iter().zip(&specs) {
            assert_eq!(r.structure, s.structure);
            assert!(r.total_cost as f64 >= r.opt_lb);
            assert_eq!(r.avg_cost, r.total_cost as f64 / r.m as f64);
        }
    }

    #[test]
    fn ratios() {
        let a = vec![
            rec(StructureKind::Tango, 8, 4.0),
            rec(StructureKind::Tango, 16, 6.0),
        ];
        let b = vec![
            rec(StructureKind::Splay, 16, 3.0),
            rec(StructureKind::Splay, 8, 2.0),
        ];
        assert_eq!(ratio_table(&a, &b).unwrap(), vec![(8, 2.0), (16, 2.0)]);
        assert_eq!(ratio_table(&a, &a).unwrap(), vec![(8, 1.0), (16, 1.0)]);
        assert!(matches!(ratio_table(&a, &b[..1]), Err(Error::Mismatch(_))));
    }

    #[test]
    fn validation() {
        let good = vec![
            rec(StructureKind::Splay, 8, 2.0),
            rec(StructureKind::Tango, 8, 5.0),
            rec(StructureKind::Multisplay, 8, 3.0),
        ];
        let order: Ordering = "splay<multisplay<tango".parse().unwrap();
        assert!(validate_records(&good, Some(&order)).ok());
        let mut bad = good.clone();
        bad[0].total_cost = 0;
        let report = validate_records(&bad, None);
        assert_eq!(report.violations.len(), 1);
        assert!(report.violations[0].contains("splay random n=8"));
        let swapped: Ordering = "tango<splay".parse().unwrap();
        assert!(!validate_records(&good, Some(&swapped)).ok());
        let weak: Ordering = "splay<=splay".parse().unwrap();
        assert!(validate_records(&good, Some(&weak)).ok());
        assert!("splay".parse::<Ordering>().is_err());
        assert!("splay<heap".parse::<Ordering>().is_err());
    }

    #[test]
    fn size_specs() {
        assert_eq!(parse_sizes("3,7, 15").unwrap(), vec![3, 7, 15]);
        assert_eq!(parse_sizes("2^8..2^10").unwrap(), vec![256, 512, 1024]);
        assert_eq!(parse_sizes("2^4,5..7").unwrap(), vec![16, 5, 6, 7]);
        let g = parse_sizes("lglg:2^8:2^16:5").unwrap();
        assert_eq!(g, vec![256, 731, 2545, 11224, 65536]);
        assert!(parse_sizes("").is_err());
        assert!(parse_sizes("x").is_err());
        assert!(parse_sizes("lglg:2:8").is_err());
    }
}
