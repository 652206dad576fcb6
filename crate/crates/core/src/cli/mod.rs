//! The `lshtool` command line.
//!
//! Exit codes: 0 on success, 2 for usage and input errors, 3 for runtime
//! failures (I/O).

pub mod bench;
pub mod dataset;

use std::ffi::OsString;
use std::fs::File;
use std::io::{self, BufReader, BufWriter, Write};
use std::path::{Path, PathBuf};
use std::time::Instant;

use clap::{Args, Parser, Subcommand};

use crate::calc::exact::parse_epsilon;
use crate::calc::{corner_counts, figure_table, parse_grid, scheme_counts, write_csv, CollisionProbs, CountScheme, Prob};
use crate::error::{Error, Result};
use crate::families::{bit_sampling_family, minhash_family, BitSampling, HashFamily, MinHash};
use crate::index::{build_index, NnIndex, Persist, INDEX_MAGIC};
use crate::par::Execution;
use crate::schemes::{derive_params, HashSource, Overrides, SchemeKind};
use crate::sketch::{derive_sketch_params, write_sketches, SketchParams, Sketcher};

pub use bench::{run_bench, run_sketch_bench, BenchConfig, BenchReport, SketchBenchReport};
pub use dataset::{planted_hamming, Dataset, Points};

#[derive(Parser, Debug)]
#[command(name = "lshtool", version, about = "Locality-sensitive hashing for near neighbor search")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Print hash-function counts as CSV.
    Params(ParamsArgs),
    /// Build an index over a dataset and write it to --out.
    Build(BuildArgs),
    /// Query a built index.
    Query(QueryArgs),
    /// Repeatedly build and query, reporting success rate and work.
    Bench(BenchArgs),
    /// Measure one-bit sketch error rates.
    SketchBench(SketchBenchArgs),
    /// Write a planted Hamming instance (data and query files).
    Planted(PlantedArgs),
}

#[derive(Args, Debug)]
struct ParamsArgs {
    /// Number of points; accepts `2^30` style powers.
    #[arg(long, value_parser = parse_count)]
    n: u64,
    #[arg(long)]
    p1: String,
    #[arg(long, conflicts_with = "p2_grid", required_unless_present = "p2_grid")]
    p2: Option<String>,
    /// Inclusive grid `start:end:step`.
    #[arg(long)]
    p2_grid: Option<String>,
    /// Emit one scheme (im, ai, dkt, hybrid, corner-dkt) instead of the comparison table.
    #[arg(long)]
    scheme: Option<String>,
    #[command(flatten)]
    tuning: Tuning,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args, Debug, Clone)]
struct Tuning {
    /// Tensoring width for ai.
    #[arg(long)]
    t: Option<u64>,
    /// DKT margin as a fraction, e.g. 1/6.
    #[arg(long)]
    eps: Option<String>,
}

impl Tuning {
    fn overrides(&self, sketching: bool) -> Result<Overrides> {
        Ok(Overrides {
            t: self.t,
            eps: self.eps.as_deref().map(parse_epsilon).transpose()?,
            sketching,
        })
    }
}

#[derive(Args, Debug)]
struct Radii {
    #[arg(long)]
    r1: f64,
    #[arg(long)]
    r2: f64,
}

#[derive(Args, Debug)]
struct BuildArgs {
    #[arg(long)]
    data: PathBuf,
    #[command(flatten)]
    radii: Radii,
    #[arg(long, default_value = "dkt")]
    scheme: SchemeKind,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[command(flatten)]
    tuning: Tuning,
    #[arg(long)]
    out: PathBuf,
}

#[derive(Args, Debug)]
struct QueryArgs {
    #[arg(long)]
    index: PathBuf,
    #[arg(long)]
    queries: PathBuf,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args, Debug)]
struct BenchArgs {
    #[arg(long)]
    data: PathBuf,
    #[arg(long)]
    queries: PathBuf,
    #[command(flatten)]
    radii: Radii,
    #[arg(long, default_value = "dkt")]
    scheme: SchemeKind,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long, default_value_t = 1)]
    trials: u64,
    /// Filter candidates with one-bit sketches instead of true distances.
    #[arg(long)]
    sketch: bool,
    /// Run trials on all cores; results are identical to a sequential run.
    #[arg(long)]
    parallel: bool,
    /// Append wall time to the report.
    #[arg(long)]
    timing: bool,
    /// Emit a one-row CSV instead of text.
    #[arg(long)]
    csv: bool,
    #[command(flatten)]
    tuning: Tuning,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args, Debug)]
struct SketchBenchArgs {
    #[arg(long)]
    data: PathBuf,
    #[arg(long)]
    queries: PathBuf,
    #[command(flatten)]
    radii: Radii,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long, default_value_t = 1)]
    trials: u64,
    /// Sketch length; derived from the dataset size when absent.
    #[arg(long)]
    bits: Option<usize>,
    #[arg(long)]
    parallel: bool,
    /// Write the data sketches of the first trial as an SKB1 file.
    #[arg(long)]
    sketches: Option<PathBuf>,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args, Debug)]
struct PlantedArgs {
    #[arg(long, default_value_t = 128)]
    d: usize,
    /// Number of far points.
    #[arg(long, default_value_t = 1024)]
    far: usize,
    /// Distance of the planted point from the query.
    #[arg(long, default_value_t = 16)]
    near: usize,
    /// Minimum distance of far points from the query.
    #[arg(long, default_value_t = 48)]
    far_min: u32,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long)]
    data: PathBuf,
    #[arg(long)]
    queries: PathBuf,
}

fn parse_count(s: &str) -> std::result::Result<u64, String> {
    let bad = || format!("{s:?} is not a positive integer or b^e power");
    let v = match s.split_once('^') {
        Some((b, e)) => {
            let b: u64 = b.trim().parse().map_err(|_| bad())?;
            let e: u32 = e.trim().parse().map_err(|_| bad())?;
            b.checked_pow(e).ok_or_else(bad)?
        }
        None => s.trim().parse().map_err(|_| bad())?,
    };
    if v == 0 {
        return Err(bad());
    }
    Ok(v)
}

/// Runs the tool on `args` (program name first) and returns the exit code.
pub fn run<I, T>(args: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            use clap::error::ErrorKind;
            if matches!(e.kind(), ErrorKind::DisplayHelp | ErrorKind::DisplayVersion) {
                let _ = write!(out, "{}", e.render());
                return 0;
            }
            let _ = writeln!(err, "lshtool: {}", one_line(&e.render().to_string()));
            return 2;
        }
    };
    match dispatch(cli.command, out, err) {
        Ok(()) => 0,
        Err(e) => {
            let _ = writeln!(err, "lshtool: error: {e}");
            exit_code(&e)
        }
    }
}

fn exit_code(e: &Error) -> i32 {
    match e {
        Error::Io(_) => 3,
        _ => 2,
    }
}

/// Collapses clap's multi-line diagnostic, dropping usage and help hints.
fn one_line(msg: &str) -> String {
    msg.lines()
        .map(str::trim)
        .take_while(|l| !l.starts_with("Usage:"))
        .filter(|l| !l.is_empty() && !l.starts_with("For more information"))
        .collect::<Vec<_>>()
        .join(" ")
}

fn open_out<'a>(path: &Option<PathBuf>, out: &'a mut dyn Write) -> Result<Box<dyn Write + 'a>> {
    Ok(match path {
        Some(p) => Box::new(BufWriter::new(File::create(p)?)),
        None => Box::new(out),
    })
}

fn read_dataset(path: &Path) -> Result<Dataset> {
    let file = File::open(path).map_err(|e| Error::Io(io::Error::new(e.kind(), format!("{}: {e}", path.display()))))?;
    Dataset::read(BufReader::new(file)).map_err(|e| match e {
        Error::Parse { line, msg } => Error::Parse {
            line,
            msg: format!("{}: {msg}", path.display()),
        },
        other => other,
    })
}

fn dispatch(cmd: Command, out: &mut dyn Write, err: &mut dyn Write) -> Result<()> {
    match cmd {
        Command::Params(a) => cmd_params(&a, out),
        Command::Build(a) => cmd_build(&a, err),
        Command::Query(a) => cmd_query(&a, out),
        Command::Bench(a) => cmd_bench(&a, out, err),
        Command::SketchBench(a) => cmd_sketch_bench(&a, out),
        Command::Planted(a) => cmd_planted(&a),
    }
}

fn cmd_params(a: &ParamsArgs, out: &mut dyn Write) -> Result<()> {
    let p1 = Prob::parse(&a.p1)?;
    let grid = match (&a.p2, &a.p2_grid) {
        (Some(p2), _) => vec![Prob::parse(p2)?],
        (None, Some(g)) => parse_grid(g)?,
        (None, None) => unreachable!("clap requires one of --p2, --p2-grid"),
    };
    if a.n < 2 {
        return Err(Error::invalid("--n must be at least 2"));
    }
    let rows = match &a.scheme {
        None => {
            if a.tuning.t.is_some() || a.tuning.eps.is_some() {
                return Err(Error::invalid("--t and --eps need --scheme"));
            }
            figure_table(a.n, &p1, &grid)?
        }
        Some(name) => {
            let overrides = a.tuning.overrides(false)?;
            grid.iter()
                .map(|p2| {
                    let probs = CollisionProbs::new(p1.clone(), p2.clone())?;
                    if name == CountScheme::CornerDkt.as_str() {
                        corner_counts(a.n, &probs)
                    } else {
                        scheme_counts(name.parse()?, a.n, &probs, &overrides)
                    }
                })
                .collect::<Result<Vec<_>>>()?
        }
    };
    let mut w = open_out(&a.out, out)?;
    write_csv(&mut w, &rows)?;
    w.flush()?;
    Ok(())
}

fn build_with<F: Persist>(family: F, points: Vec<F::Point>, a: &BuildArgs, err: &mut dyn Write) -> Result<()> {
    let s = family.sensitivity(a.radii.r1, a.radii.r2)?;
    let probs = CollisionProbs::from_f64(s.p1(), s.p2())?;
    let params = derive_params(a.scheme, points.len().max(2) as u64, &probs, &a.tuning.overrides(false)?)?;
    let source = HashSource::build(family, params, a.seed)?;
    let index = build_index(points.into_iter().enumerate().map(|(i, x)| (i as u64, x)), source, s)?;
    let mut w = BufWriter::new(File::create(&a.out)?);
    index.write_to(&mut w)?;
    w.flush()?;
    writeln!(
        err,
        "built {} index over {} points: {}",
        a.scheme,
        index.len(),
        bench::describe_params(&params)
    )?;
    Ok(())
}

fn cmd_build(a: &BuildArgs, err: &mut dyn Write) -> Result<()> {
    let data = read_dataset(&a.data)?;
    match (data.space, data.points) {
        (crate::families::Space::Hamming { d }, Points::Hamming(p)) => build_with(bit_sampling_family(d)?, p, a, err),
        (crate::families::Space::Jaccard { universe }, Points::Jaccard(p)) => {
            build_with(minhash_family(universe)?, p, a, err)
        }
        _ => unreachable!("dataset space matches its points"),
    }
}

fn query_with<F: Persist>(bytes: &[u8], queries: Vec<F::Point>, w: &mut dyn Write) -> Result<()> {
    let index = NnIndex::<F>::read_from(bytes)?;
    let family = index.source().family().clone();
    let mut csv = csv::Writer::from_writer(w);
    let csv_err = |e: csv::Error| Error::Io(io::Error::other(e));
    csv.write_record(["query", "returned", "distance", "lookups", "distance_computations", "base_hash_evaluations"])
        .map_err(csv_err)?;
    for (i, q) in queries.iter().enumerate() {
        let (hit, stats) = index.query(q)?;
        let (id, dist) = match hit {
            Some(id) => (id.to_string(), family.distance(q, index.point(id).expect("returned id is stored")).to_string()),
            None => (String::new(), String::new()),
        };
        csv.write_record([
            i.to_string(),
            id,
            dist,
            stats.lookups.to_string(),
            stats.distance_computations.to_string(),
            stats.base_hash_evaluations.to_string(),
        ])
        .map_err(csv_err)?;
    }
    csv.flush()?;
    Ok(())
}

fn cmd_query(a: &QueryArgs, out: &mut dyn Write) -> Result<()> {
    let bytes = std::fs::read(&a.index)?;
    if bytes.len() < 11 || &bytes[..6] != INDEX_MAGIC {
        return Err(Error::Format(format!("{} is not an LSHX1 index", a.index.display())));
    }
    let queries = read_dataset(&a.queries)?;
    let mut w = open_out(&a.out, out)?;
    match (bytes[10], queries.points) {
        (0, Points::Hamming(q)) => query_with::<BitSampling>(&bytes, q, &mut w)?,
        (1, Points::Jaccard(q)) => query_with::<MinHash>(&bytes, q, &mut w)?,
        _ => {
            return Err(Error::SpaceMismatch {
                expected: "the index space".into(),
                reason: format!("query file declares {}", queries.space),
            })
        }
    }
    w.flush()?;
    Ok(())
}

fn execution(parallel: bool) -> Execution {
    if parallel {
        Execution::best_available()
    } else {
        Execution::Sequential
    }
}

fn load_pair(data: &Path, queries: &Path) -> Result<(Dataset, Dataset)> {
    let d = read_dataset(data)?;
    let q = read_dataset(queries)?;
    if d.space != q.space {
        return Err(Error::SpaceMismatch {
            expected: d.space.to_string(),
            reason: format!("query file declares {}", q.space),
        });
    }
    Ok((d, q))
}

fn bench_with<F: HashFamily>(family: F, p: &[F::Point], q: &[F::Point], a: &BenchArgs) -> Result<BenchReport> {
    let s = family.sensitivity(a.radii.r1, a.radii.r2)?;
    let cfg = BenchConfig {
        kind: a.scheme,
        overrides: a.tuning.overrides(a.sketch)?,
        seed: a.seed,
        trials: a.trials,
        sketch: a.sketch,
        exec: execution(a.parallel),
    };
    run_bench(&family, p, q, &s, &cfg)
}

fn cmd_bench(a: &BenchArgs, out: &mut dyn Write, err: &mut dyn Write) -> Result<()> {
    if a.trials == 0 {
        return Err(Error::invalid("--trials must be at least 1"));
    }
    let (data, queries) = load_pair(&a.data, &a.queries)?;
    let start = Instant::now();
    let report = match (data.space, data.points, queries.points) {
        (crate::families::Space::Hamming { d }, Points::Hamming(p), Points::Hamming(q)) => {
            bench_with(bit_sampling_family(d)?, &p, &q, a)?
        }
        (crate::families::Space::Jaccard { universe }, Points::Jaccard(p), Points::Jaccard(q)) => {
            bench_with(minhash_family(universe)?, &p, &q, a)?
        }
        _ => unreachable!("spaces were checked to match"),
    };
    let elapsed = start.elapsed();
    if report.eligible_queries == 0 {
        writeln!(err, "lshtool: note: no query has a point within r1; success rate is undefined")?;
    }
    writeln!(err, "lshtool: bench finished in {:.3}s", elapsed.as_secs_f64())?;
    let mut w = open_out(&a.out, out)?;
    if a.csv {
        write_bench_csv(&mut w, &report, a.timing.then_some(elapsed.as_secs_f64()))?;
    } else {
        writeln!(w, "{report}")?;
        if a.timing {
            writeln!(w, "wall time: {:.3}s", elapsed.as_secs_f64())?;
        }
    }
    w.flush()?;
    Ok(())
}

fn write_bench_csv(w: &mut dyn Write, r: &BenchReport, seconds: Option<f64>) -> Result<()> {
    let mut csv = csv::Writer::from_writer(w);
    let csv_err = |e: csv::Error| Error::Io(io::Error::other(e));
    let mut header = vec![
        "scheme",
        "params",
        "points",
        "queries",
        "eligible_queries",
        "trials",
        "success",
        "stderr",
        "false_returns",
        "mean_lookups",
        "mean_distance_computations",
        "mean_base_hash_evaluations",
    ];
    let success = r.success();
    let mut row = vec![
        r.kind.to_string(),
        bench::describe_params(&r.params),
        r.n.to_string(),
        r.queries.to_string(),
        r.eligible_queries.to_string(),
        r.trials.to_string(),
        success.map_or(String::new(), |e| format!("{:?}", e.frequency)),
        success.map_or(String::new(), |e| format!("{:?}", e.stderr)),
        r.false_returns.to_string(),
        format!("{:?}", r.mean_lookups()),
        format!("{:?}", r.mean_distance_computations()),
        format!("{:?}", r.mean_base_evaluations()),
    ];
    if let Some(s) = seconds {
        header.push("wall_seconds");
        row.push(format!("{s:.3}"));
    }
    csv.write_record(&header).map_err(csv_err)?;
    csv.write_record(&row).map_err(csv_err)?;
    csv.flush()?;
    Ok(())
}

fn sketch_bench_with<F: HashFamily>(
    family: F,
    p: &[F::Point],
    q: &[F::Point],
    a: &SketchBenchArgs,
) -> Result<SketchBenchReport> {
    let s = family.sensitivity(a.radii.r1, a.radii.r2)?;
    let probs = CollisionProbs::from_f64(s.p1(), s.p2())?;
    let params = match a.bits {
        Some(b) => SketchParams::with_bits(b, &probs)?,
        None => derive_sketch_params(p.len().max(1) as u64, &probs)?,
    };
    if let Some(path) = &a.sketches {
        let sk = Sketcher::new(family.clone(), params.b, bench::bench_sketch_seed(a.seed, 0))?;
        let rows = p.iter().map(|x| sk.sketch(x)).collect::<Result<Vec<_>>>()?;
        let mut w = BufWriter::new(File::create(path)?);
        write_sketches(&mut w, &rows)?;
    }
    run_sketch_bench(&family, p, q, &s, params, a.seed, a.trials, execution(a.parallel))
}

fn cmd_sketch_bench(a: &SketchBenchArgs, out: &mut dyn Write) -> Result<()> {
    if a.trials == 0 {
        return Err(Error::invalid("--trials must be at least 1"));
    }
    let (data, queries) = load_pair(&a.data, &a.queries)?;
    let report = match (data.space, data.points, queries.points) {
        (crate::families::Space::Hamming { d }, Points::Hamming(p), Points::Hamming(q)) => {
            sketch_bench_with(bit_sampling_family(d)?, &p, &q, a)?
        }
        (crate::families::Space::Jaccard { universe }, Points::Jaccard(p), Points::Jaccard(q)) => {
            sketch_bench_with(minhash_family(universe)?, &p, &q, a)?
        }
        _ => unreachable!("spaces were checked to match"),
    };
    let mut w = open_out(&a.out, out)?;
    writeln!(w, "{report}")?;
    w.flush()?;
    Ok(())
}

fn cmd_planted(a: &PlantedArgs) -> Result<()> {
    let (data, q) = planted_hamming(a.d, a.far, a.near, a.far_min, a.seed)?;
    data.write(BufWriter::new(File::create(&a.data)?))?;
    Dataset::hamming(a.d, vec![q]).write(BufWriter::new(File::create(&a.queries)?))?;
    Ok(())
}
