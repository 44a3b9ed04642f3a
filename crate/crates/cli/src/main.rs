use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::PathBuf;
use std::process::ExitCode;

use bstlab::{
    fit_records, generate, interleave_bound, parse_sizes, ratio_table, read_csv, run_matrix,
    validate_records, write_csv, AccessSequence, ExperimentRecord, ExperimentSpec, FitModel,
    Ordering, RunOptions, StructureKind, WorkloadKind, WorkloadParams,
};
use clap::{Args, Parser, Subcommand};

/// Experiments on self-adjusting binary search trees under a unit-cost
/// pointer-machine model.
#[derive(Parser)]
#[command(name = "bstlab", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run a structure x workload x size matrix and write CSV records.
    Run(RunArgs),
    /// Fit a cost model to CSV records and print it as JSON.
    Fit(FitArgs),
    /// Check lower bounds and cost orderings in CSV records.
    Validate(ValidateArgs),
    /// Interleave bound of an access trace.
    Ib(IbArgs),
    /// Write a generated access sequence as a trace file.
    Gen(GenArgs),
    /// Per-size ratio of average costs between two structures.
    Ratio(RatioArgs),
}

#[derive(Args)]
struct RunArgs {
    /// Comma-separated structures, or `all`.
    #[arg(long, default_value = "all")]
    structure: String,
    /// Comma-separated workloads.
    #[arg(long)]
    workload: String,
    /// Sizes: `256,1024`, `2^8..2^17`, or `lglg:<min>:<max>:<points>`.
    #[arg(long, default_value = "2^8..2^17")]
    n: String,
    /// Comma-separated set sizes for workingset and unified.
    #[arg(long, default_value = "4")]
    k: String,
    /// Passes over the keys (accesses per element for workingset).
    #[arg(long)]
    passes: Option<usize>,
    #[arg(long, default_value_t = 1)]
    seed: u64,
    /// Output CSV; standard output when absent or `-`.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Check every structural invariant after every access.
    #[arg(long)]
    validate_structures: bool,
}

#[derive(Args)]
struct Filters {
    /// Keep rows where `column=value`; repeatable.
    #[arg(long = "where", value_name = "COL=VAL")]
    filters: Vec<String>,
}

#[derive(Args)]
struct FitArgs {
    /// lgn, lglgn, lgk, rho-linear, or rho-cubic.
    #[arg(long)]
    model: FitModel,
    #[arg(long = "in")]
    input: PathBuf,
    #[arg(long, default_value = "n")]
    x: String,
    #[arg(long, default_value = "avg_cost")]
    y: String,
    #[command(flatten)]
    filters: Filters,
}

#[derive(Args)]
struct ValidateArgs {
    #[arg(long = "in")]
    input: PathBuf,
    /// Required cost ordering, for example `splay<multisplay<tango`.
    #[arg(long)]
    order: Option<Ordering>,
}

#[derive(Args)]
struct IbArgs {
    #[arg(long)]
    trace: PathBuf,
    /// Universe size, if the trace has no header.
    #[arg(long)]
    n: Option<usize>,
    /// Also print the increment of every access.
    #[arg(long)]
    per_access: bool,
}

#[derive(Args)]
struct GenArgs {
    #[arg(long)]
    workload: WorkloadKind,
    #[arg(long)]
    n: usize,
    #[arg(long, default_value_t = 4)]
    k: usize,
    #[arg(long)]
    passes: Option<usize>,
    #[arg(long, default_value_t = 1)]
    seed: u64,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct RatioArgs {
    #[arg(long = "in")]
    input: PathBuf,
    /// Numerator structure.
    #[arg(long)]
    num: StructureKind,
    /// Denominator structure.
    #[arg(long)]
    den: StructureKind,
    #[command(flatten)]
    filters: Filters,
}

enum Failure {
    Usage(String),
    Invalid,
}

impl From<bstlab::Error> for Failure {
    fn from(e: bstlab::Error) -> Self {
        Failure::Usage(e.to_string())
    }
}

impl From<io::Error> for Failure {
    fn from(e: io::Error) -> Self {
        Failure::Usage(e.to_string())
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Run(a) => run(a),
        Command::Fit(a) => fit(a),
        Command::Validate(a) => validate(a),
        Command::Ib(a) => ib(a),
        Command::Gen(a) => gen(a),
        Command::Ratio(a) => ratio(a),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure::Invalid) => ExitCode::from(1),
        Err(Failure::Usage(msg)) => {
            eprintln!("bstlab: {msg}");
            ExitCode::from(2)
        }
    }
}

fn output(path: &Option<PathBuf>) -> Result<Box<dyn Write>, Failure> {
    match path {
        Some(p) if p.as_os_str() != "-" => {
            let f = File::create(p).map_err(|e| Failure::Usage(format!("{}: {e}", p.display())))?;
            Ok(Box::new(BufWriter::new(f)))
        }
        _ => Ok(Box::new(BufWriter::new(io::stdout().lock()))),
    }
}

fn list<T: std::str::FromStr<Err = bstlab::Error>>(s: &str) -> Result<Vec<T>, Failure> {
    s.split(',')
        .map(|t| t.trim().parse::<T>().map_err(Failure::from))
        .collect()
}

fn run(a: RunArgs) -> Result<(), Failure> {
    let structures: Vec<StructureKind> = if a.structure == "all" {
        StructureKind::ALL.to_vec()
    } else {
        list(&a.structure)?
    };
    let workloads: Vec<WorkloadKind> = list(&a.workload)?;
    let sizes = parse_sizes(&a.n)?;
    let ks: Vec<usize> =
        a.k.split(',')
            .map(|t| {
                t.trim()
                    .parse()
                    .map_err(|_| Failure::Usage(format!("bad k {t:?}")))
            })
            .collect::<Result<_, _>>()?;
    let mut specs = Vec::new();
    for &w in &workloads {
        let wk: &[usize] = if w.uses_k() { &ks } else { &[0] };
        for &n in &sizes {
            for &k in wk {
                for &s in &structures {
                    let mut params = WorkloadParams::new(w, n, k, a.seed);
                    if let Some(p) = a.passes {
                        params.passes = p;
                    }
                    specs.push(ExperimentSpec {
                        structure: s,
                        workload: w,
                        params,
                    });
                }
            }
        }
    }
    let records = run_matrix(
        &specs,
        RunOptions {
            validate_structures: a.validate_structures,
        },
    )?;
    let mut out = output(&a.out)?;
    write_csv(&mut out, &records)?;
    out.flush()?;
    let report = validate_records(&records, None);
    if !report.ok() {
        for v in &report.violations {
            eprintln!("violation: {v}");
        }
        return Err(Failure::Invalid);
    }
    Ok(())
}

fn load(path: &PathBuf, filters: &[String]) -> Result<Vec<ExperimentRecord>, Failure> {
    let f = File::open(path).map_err(|e| Failure::Usage(format!("{}: {e}", path.display())))?;
    let mut records = read_csv(f)?;
    for filter in filters {
        let (col, val) = filter
            .split_once('=')
            .ok_or_else(|| Failure::Usage(format!("filter {filter:?} is not COL=VAL")))?;
        let (col, val) = (col.trim(), val.trim());
        match col {
            "structure" => {
                let s: StructureKind = val.parse()?;
                records.retain(|r| r.structure == s);
            }
            "workload" => {
                let w: WorkloadKind = val.parse()?;
                records.retain(|r| r.workload == w);
            }
            _ => {
                let v: f64 = val
                    .parse()
                    .map_err(|_| Failure::Usage(format!("bad value in {filter:?}")))?;
                let mut err = None;
                records.retain(|r| match r.column(col) {
                    Ok(x) => x == v,
                    Err(e) => {
                        err = Some(e);
                        false
                    }
                });
                if let Some(e) = err {
                    return Err(e.into());
                }
            }
        }
    }
    Ok(records)
}

fn fit(a: FitArgs) -> Result<(), Failure> {
    let records = load(&a.input, &a.filters.filters)?;
    let result = fit_records(&records, a.model, &a.x, &a.y)?;
    let json = serde_json::to_string_pretty(&result).map_err(|e| Failure::Usage(e.to_string()))?;
    println!("{json}");
    Ok(())
}

fn validate(a: ValidateArgs) -> Result<(), Failure> {
    let records = load(&a.input, &[])?;
    let report = validate_records(&records, a.order.as_ref());
    if report.ok() {
        println!("ok: {} records", report.checked);
        Ok(())
    } else {
        for v in &report.violations {
            println!("violation: {v}");
        }
        Err(Failure::Invalid)
    }
}

fn ib(a: IbArgs) -> Result<(), Failure> {
    let text = std::fs::read_to_string(&a.trace)
        .map_err(|e| Failure::Usage(format!("{}: {e}", a.trace.display())))?;
    let mut seq = AccessSequence::parse(&text)?;
    if let Some(n) = a.n {
        if seq.keys.iter().any(|&k| k as usize > n) {
            return Err(Failure::Usage(format!("trace has keys above n={n}")));
        }
        seq.n = n;
    }
    if seq.n == 0 {
        return Err(Failure::Usage("empty trace and no --n".into()));
    }
    let trace = interleave_bound(&seq.keys, seq.n)?;
    let lb = bstlab::reference::lower_bound_from(trace.total, seq.m(), seq.n);
    let mut out = io::stdout().lock();
    writeln!(
        out,
        "n={} m={} ib={} opt_lb={}",
        seq.n,
        seq.m(),
        trace.total,
        lb
    )?;
    if a.per_access {
        for inc in trace.per_access_increment {
            writeln!(out, "{inc}")?;
        }
    }
    Ok(())
}

fn gen(a: GenArgs) -> Result<(), Failure> {
    let mut params = WorkloadParams::new(a.workload, a.n, a.k, a.seed);
    if let Some(p) = a.passes {
        params.passes = p;
    }
    let seq = generate(a.workload, params)?;
    let mut out = output(&a.out)?;
    out.write_all(seq.to_text().as_bytes())?;
    out.flush()?;
    Ok(())
}

fn ratio(a: RatioArgs) -> Result<(), Failure> {
    let records = load(&a.input, &a.filters.filters)?;
    let pick = |s: StructureKind| {
        records
            .iter()
            .filter(|r| r.structure == s)
            .cloned()
            .collect::<Vec<_>>()
    };
    let table = ratio_table(&pick(a.num), &pick(a.den))?;
    let mut out = io::stdout().lock();
    writeln!(out, "n,ratio")?;
    for (n, r) in table {
        writeln!(out, "{n},{r}")?;
    }
    Ok(())
}
