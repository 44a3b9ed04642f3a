//! Seeded generators for the four access-sequence families and their text
//! serialization.

use std::fmt;
use std::str::FromStr;

use crate::cost_model::Key;
use crate::error::{Error, Result};

/// SplitMix64.
#[derive(Debug, Clone)]
pub struct Rng {
    state: u64,
}

impl Rng {
    pub fn new(seed: u64) -> Self {
        Rng { state: seed }
    }

    pub fn next_u64(&mut self) -> u64 {
        self.state = self.state.wrapping_add(0x9E37_79B9_7F4A_7C15);
        let mut z = self.state;
        z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
        z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
        z ^ (z >> 31)
    }
}

#[derive(
    Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, serde::Serialize, serde::Deserialize,
)]
#[serde(rename_all = "lowercase")]
pub enum WorkloadKind {
    Sequential,
    Random,
    #[serde(rename = "workingset")]
    WorkingSet,
    Unified,
}

impl WorkloadKind {
    pub const ALL: [WorkloadKind; 4] = [
        WorkloadKind::Sequential,
        WorkloadKind::Random,
        WorkloadKind::WorkingSet,
        WorkloadKind::Unified,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            WorkloadKind::Sequential => "sequential",
            WorkloadKind::Random => "random",
            WorkloadKind::WorkingSet => "workingset",
            WorkloadKind::Unified => "unified",
        }
    }

    /// Passes used when none are requested: 25 over the keys for the
    /// sequential and random families, 100 accesses per element for working
    /// sets, and a single sweep for the unified family.
    pub fn default_passes(self) -> usize {
        match self {
            WorkloadKind::Sequential | WorkloadKind::Random => 25,
            WorkloadKind::WorkingSet => 100,
            WorkloadKind::Unified => 1,
        }
    }

    pub fn uses_k(self) -> bool {
        matches!(self, WorkloadKind::WorkingSet | WorkloadKind::Unified)
    }
}

impl fmt::Display for WorkloadKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for WorkloadKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "sequential" => Ok(WorkloadKind::Sequential),
            "random" => Ok(WorkloadKind::Random),
            "workingset" | "working_set" | "working-set" => Ok(WorkloadKind::WorkingSet),
            "unified" => Ok(WorkloadKind::Unified),
            _ => Err(Error::Parse(format!("unknown workload {s:?}"))),
        }
    }
}

/// Generator inputs. `k` is ignored by families without a set size.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct WorkloadParams {
    pub n: usize,
    pub k: usize,
    pub passes: usize,
    pub seed: u64,
}

impl WorkloadParams {
    pub fn new(kind: WorkloadKind, n: usize, k: usize, seed: u64) -> Self {
        WorkloadParams {
            n,
            k,
            passes: kind.default_passes(),
            seed,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct AccessSequence {
    pub kind: WorkloadKind,
    pub n: usize,
    pub k: usize,
    pub passes: usize,
    pub seed: u64,
    /// Keys left out because they did not fill a whole set or chunk group.
    pub dropped: usize,
    pub keys: Vec<Key>,
}

impl AccessSequence {
    pub fn m(&self) -> usize {
        self.keys.len()
    }

    pub fn to_text(&self) -> String {
        let mut s = format!(
            "# gen={} n={} k={} seed={} m={}\n",
            self.kind,
            self.n,
            self.k,
            self.seed,
            self.m()
        );
        for k in &self.keys {
            s.push_str(&k.to_string());
            s.push('\n');
        }
        s
    }

    /// Reads the format written by [`AccessSequence::to_text`]. A missing
    /// header is accepted when `n` can be taken from the largest key.
    pub fn parse(text: &str) -> Result<Self> {
        let mut seq = AccessSequence {
            kind: WorkloadKind::Sequential,
            n: 0,
            k: 0,
            passes: 1,
            seed: 0,
            dropped: 0,
            keys: Vec::new(),
        };
        let mut declared_m = None;
        for (no, line) in text.lines().enumerate() {
            let line = line.trim();
            if line.is_empty() {
                continue;
            }
            if let Some(header) = line.strip_prefix('#') {
                for field in header.split_whitespace() {
                    let Some((name, value)) = field.split_once('=') else {
                        continue;
                    };
                    let bad =
                        |_| Error::Parse(format!("line {}: bad {name} value {value:?}", no + 1));
                    match name {
                        "gen" => seq.kind = value.parse()?,
                        "n" => seq.n = value.parse().map_err(bad)?,
                        "k" => seq.k = value.parse().map_err(bad)?,
                        "seed" => seq.seed = value.parse().map_err(bad)?,
                        "m" => declared_m = Some(value.parse::<usize>().map_err(bad)?),
                        _ => {}
                    }
                }
                continue;
            }
            let key: Key = line
                .parse()
                .map_err(|_| Error::Parse(format!("line {}: not a key: {line:?}", no + 1)))?;
            seq.keys.push(key);
        }
        if seq.n == 0 {
            seq.n = seq.keys.iter().copied().max().unwrap_or(0) as usize;
        }
        if let Some(&bad) = seq.keys.iter().find(|&&k| k == 0 || k as usize > seq.n) {
            return Err(Error::KeyOutOfRange { key: bad, n: seq.n });
        }
        if let Some(m) = declared_m {
            if m != seq.keys.len() {
                return Err(Error::Parse(format!(
                    "header says m={m}, found {} keys",
                    seq.keys.len()
                )));
            }
        }
        Ok(seq)
    }
}

pub fn generate(kind: WorkloadKind, p: WorkloadParams) -> Result<AccessSequence> {
    match kind {
        WorkloadKind::Sequential => gen_sequential(p.n, p.passes),
        WorkloadKind::Random => gen_random(p.n, p.passes, p.seed),
        WorkloadKind::WorkingSet => gen_working_set(p.n, p.k, p.seed, p.passes),
        WorkloadKind::Unified => gen_unified(p.n, p.k, p.passes),
    }
}

fn check_n(n: usize) -> Result<()> {
    if n == 0 || n > Key::MAX as usize {
        return Err(Error::TooSmall { n, min: 1 });
    }
    Ok(())
}

/// `1..=n`, `passes` times.
pub fn gen_sequential(n: usize, passes: usize) -> Result<AccessSequence> {
    check_n(n)?;
    let keys = (0..passes).flat_map(|_| 1..=n as Key).collect();
    Ok(AccessSequence {
        kind: WorkloadKind::Sequential,
        n,
        k: 0,
        passes,
        seed: 0,
        dropped: 0,
        keys,
    })
}

/// `passes · n` uniform keys.
pub fn gen_random(n: usize, passes: usize, seed: u64) -> Result<AccessSequence> {
    check_n(n)?;
    let mut rng = Rng::new(seed);
    let keys = (0..passes * n)
        .map(|_| (rng.next_u64() % n as u64) as Key + 1)
        .collect();
    Ok(AccessSequence {
        kind: WorkloadKind::Random,
        n,
        k: 0,
        passes,
        seed,
        dropped: 0,
        keys,
    })
}

/// Shuffles the keys, cuts them into sets of `k`, and visits each set
/// round-robin `passes` times before moving on. A final partial set is
/// dropped.
pub fn gen_working_set(n: usize, k: usize, seed: u64, passes: usize) -> Result<AccessSequence> {
    check_n(n)?;
    if k == 0 {
        return Err(Error::Parse("working-set size must be positive".into()));
    }
    if k > n {
        return Err(Error::SetLargerThanUniverse { k, n });
    }
    let mut rng = Rng::new(seed);
    let mut perm: Vec<Key> = (1..=n as Key).collect();
    for i in (1..n).rev() {
        let j = (rng.next_u64() % (i as u64 + 1)) as usize;
        perm.swap(i, j);
    }
    let sets = n / k;
    let mut keys = Vec::with_capacity(sets * k * passes);
    for block in perm.chunks_exact(k) {
        for _ in 0..passes {
            keys.extend_from_slice(block);
        }
    }
    Ok(AccessSequence {
        kind: WorkloadKind::WorkingSet,
        n,
        k,
        passes,
        seed,
        dropped: n - sets * k,
        keys,
    })
}

/// Chunks of `2k` consecutive keys, grouped `k` at a time with a uniform
/// stride. Within a group, sweep `2i` takes offset `i` of every chunk and
/// sweep `2i + 1` takes offset `k + i`. Chunks that do not fill a whole
/// group are dropped.
pub fn gen_unified(n: usize, k: usize, passes: usize) -> Result<AccessSequence> {
    check_n(n)?;
    if k == 0 {
        return Err(Error::Parse("unified spacing must be positive".into()));
    }
    if 2 * k * k > n {
        return Err(Error::KTooLarge);
    }
    let width = 2 * k;
    let chunks = n / width;
    let stride = chunks / k;
    let mut once = Vec::with_capacity(stride * k * width);
    for s in 0..stride {
        for i in 0..k {
            for offset in [i, k + i] {
                for c in 0..k {
                    let chunk = s + c * stride;
                    once.push((chunk * width + offset) as Key + 1);
                }
            }
        }
    }
    let dropped = n - once.len();
    let keys = (0..passes).flat_map(|_| once.iter().copied()).collect();
    Ok(AccessSequence {
        kind: WorkloadKind::Unified,
        n,
        k,
        passes,
        seed: 0,
        dropped,
        keys,
    })
}
