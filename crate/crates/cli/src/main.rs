use std::io::{self, Write};
use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::{anyhow, bail, Context};
use clap::{Args, Parser, Subcommand, ValueEnum};
use serde_json::json;

use trisquare::arith::{is_sum_three_squares, three_squares_witness};
use trisquare::genus::GenusSeries;
use trisquare::nonunit::{nonunit_witness, NonunitSieve};
use trisquare::polygonal::{
    decompose_polygonal, polygonal_value, PolygonalProblem, PolygonalSieve,
};
use trisquare::sieve::{Checkpoint, ChunkResult, ChunkedSieve, DEFAULT_CHUNK};
use trisquare::ternary::{isometries, orbits, theta_coeffs, FormId, GenusSieve, TernaryLattice};
use trisquare::verify::{run_check, CheckReport, RunConfig, REGISTRY};
use trisquare::{Error, Execution, SieveReport};

#[derive(Parser, Debug)]
#[command(
    name = "trisquare",
    version,
    about = "Sums of three nonunit squares, ternary forms and polygonal numbers"
)]
struct Cli {
    /// Worker threads (default: all cores).
    #[arg(long, global = true)]
    threads: Option<usize>,
    #[arg(long, global = true, value_enum, default_value_t = Format::Text)]
    format: Format,
    /// Seed for sampled checks.
    #[arg(long, global = true, default_value_t = 0)]
    seed: u64,
    /// Include wall-clock timings (output is then not byte-reproducible).
    #[arg(long, global = true)]
    timing: bool,
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
enum Format {
    Json,
    Csv,
    Text,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Decide whether n has a decomposition and print a witness.
    Decide {
        #[arg(value_enum)]
        problem: DecideKind,
        n: u64,
        #[command(flatten)]
        poly: PolyArgs,
    },
    /// Run a named check against its published value.
    Verify {
        id: String,
        #[arg(long = "max")]
        max: Option<u64>,
        /// Single prime for prop-2.3.
        #[arg(long)]
        p: Option<u64>,
        /// Single number of terms for the k-term checks.
        #[arg(long)]
        k: Option<u32>,
    },
    /// List check ids and default bounds.
    List,
    /// Sieve a range for exceptions, streaming per-chunk results.
    Sieve {
        #[arg(value_enum)]
        target: SieveTarget,
        /// Inclusive range `lo..hi`.
        range: String,
        /// Residues mod 5 for the nonunit target, e.g. `0,1,4`.
        #[arg(long)]
        filter: Option<String>,
        #[command(flatten)]
        poly: PolyArgs,
        #[arg(long, default_value_t = DEFAULT_CHUNK)]
        chunk: u64,
        /// Write progress here after every batch of chunks.
        #[arg(long)]
        checkpoint: Option<PathBuf>,
        /// Resume from a checkpoint written by an earlier run.
        #[arg(long)]
        from_checkpoint: Option<PathBuf>,
    },
    /// Generalized polygonal numbers.
    Polygonal {
        #[command(subcommand)]
        command: PolygonalCommand,
    },
    /// Tabular reports.
    Report {
        #[command(subcommand)]
        command: ReportCommand,
    },
    /// Ternary lattices given by nine comma-separated Gram entries.
    Lattice {
        #[command(subcommand)]
        command: LatticeCommand,
    },
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
enum DecideKind {
    Squares3,
    Nonunit3,
    Polygonal,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
enum SieveTarget {
    Nonunit,
    FormF,
    FormG,
    Polygonal,
}

#[derive(Args, Debug, Clone, Copy)]
struct PolyArgs {
    #[arg(long, default_value_t = 3)]
    m: u64,
    #[arg(long, default_value_t = 3)]
    k: u32,
    /// Exclude zero terms (implied for k ≥ 4).
    #[arg(long)]
    nonzero: bool,
}

impl PolyArgs {
    /// Sums of four or more terms are always taken with nonzero terms; with
    /// zero allowed every n is representable.
    fn problem(&self) -> trisquare::Result<PolygonalProblem> {
        PolygonalProblem::new(self.m, self.k, self.nonzero || self.k >= 4)
    }
}

#[derive(Subcommand, Debug)]
enum PolygonalCommand {
    Decompose {
        n: u64,
        #[command(flatten)]
        poly: PolyArgs,
    },
    Sieve {
        #[command(flatten)]
        poly: PolyArgs,
        #[arg(long = "max")]
        max: u64,
    },
}

#[derive(Subcommand, Debug)]
enum ReportCommand {
    /// r(n,f), r(n,g), the genus average both ways, and φ coefficients.
    Genus {
        #[arg(long = "max")]
        max: u64,
    },
}

#[derive(Subcommand, Debug)]
enum LatticeCommand {
    /// θ-series coefficients r(0..=max).
    Theta {
        #[arg(long)]
        gram: String,
        #[arg(long = "max")]
        max: u64,
    },
    /// Vectors of norm n.
    Count {
        #[arg(long)]
        gram: String,
        n: u64,
    },
    /// Isometric embeddings of source into target and their orbits.
    Isometries {
        #[arg(long)]
        source: String,
        #[arg(long)]
        target: String,
    },
}

/// Failure classes mapped onto exit codes.
#[derive(Debug)]
enum Failure {
    Usage(anyhow::Error),
    Environment(anyhow::Error),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        match e {
            Error::InvalidArgument(_) | Error::ResourceLimit(_) => Failure::Usage(e.into()),
            Error::Io(_) | Error::Json(_) => Failure::Environment(e.into()),
        }
    }
}

impl From<io::Error> for Failure {
    fn from(e: io::Error) -> Self {
        Failure::Environment(e.into())
    }
}

type CmdResult = Result<bool, Failure>;

fn main() -> ExitCode {
    let cli = Cli::parse();
    if let Some(t) = cli.threads {
        if t == 0 {
            eprintln!("error: --threads must be at least 1");
            return ExitCode::from(2);
        }
        #[cfg(feature = "parallel")]
        if let Err(e) = rayon::ThreadPoolBuilder::new()
            .num_threads(t)
            .build_global()
        {
            eprintln!("error: {e}");
            return ExitCode::from(3);
        }
    }
    match run(&cli) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(Failure::Usage(e)) => {
            eprintln!("error: {e:#}");
            ExitCode::from(2)
        }
        Err(Failure::Environment(e)) => {
            eprintln!("error: {e:#}");
            ExitCode::from(3)
        }
    }
}

fn execution(cli: &Cli) -> Execution {
    if cfg!(feature = "parallel") && cli.threads != Some(1) {
        Execution::Parallel
    } else {
        Execution::Sequential
    }
}

fn run(cli: &Cli) -> CmdResult {
    let out = &mut io::stdout().lock();
    match &cli.command {
        Command::Decide { problem, n, poly } => decide(cli, out, *problem, *n, poly),
        Command::Verify { id, max, p, k } => {
            let cfg = RunConfig {
                max_bound: *max,
                p: *p,
                k: *k,
                seed: cli.seed,
                exec: execution(cli),
            };
            let report = run_check(id, &cfg)?;
            let report = if cli.timing {
                report
            } else {
                report.without_timing()
            };
            write_check(cli, out, &report)?;
            Ok(report.pass)
        }
        Command::List => {
            for (id, bound) in REGISTRY {
                writeln!(out, "{id}\t{bound}")?;
            }
            Ok(true)
        }
        Command::Sieve {
            target,
            range,
            filter,
            poly,
            chunk,
            checkpoint,
            from_checkpoint,
        } => {
            let (lo, hi) = parse_range(range).map_err(Failure::Usage)?;
            let job = SieveJob {
                target: *target,
                lo,
                hi,
                filter: filter.as_deref(),
                poly,
                chunk: *chunk,
            };
            sieve(
                cli,
                out,
                job,
                checkpoint.as_ref().or(from_checkpoint.as_ref()),
                from_checkpoint.as_ref(),
            )
        }
        Command::Polygonal { command } => match command {
            PolygonalCommand::Decompose { n, poly } => {
                decide(cli, out, DecideKind::Polygonal, *n, poly)
            }
            PolygonalCommand::Sieve { poly, max } => {
                let job = SieveJob {
                    target: SieveTarget::Polygonal,
                    lo: 1,
                    hi: *max,
                    filter: None,
                    poly,
                    chunk: DEFAULT_CHUNK,
                };
                sieve(cli, out, job, None, None)
            }
        },
        Command::Report {
            command: ReportCommand::Genus { max },
        } => genus_report(cli, out, *max),
        Command::Lattice { command } => lattice(cli, out, command),
    }
}

fn decide(cli: &Cli, out: &mut impl Write, kind: DecideKind, n: u64, poly: &PolyArgs) -> CmdResult {
    let (label, witness): (String, Option<Vec<i64>>) = match kind {
        DecideKind::Squares3 => (
            "squares3".into(),
            three_squares_witness(n).map(|w| w.iter().map(|&x| x as i64).collect()),
        ),
        DecideKind::Nonunit3 => (
            "nonunit3".into(),
            nonunit_witness(n).map(|t| t.coords().to_vec()),
        ),
        DecideKind::Polygonal => {
            let p = poly.problem()?;
            (p.label(), decompose_polygonal(n, p))
        }
    };
    let terms: Option<Vec<i64>> = match kind {
        DecideKind::Polygonal => witness.as_ref().map(|w| {
            w.iter()
                .map(|&x| polygonal_value(poly.m as i64, x).unwrap())
                .collect()
        }),
        _ => witness.as_ref().map(|w| w.iter().map(|x| x * x).collect()),
    };
    let join = |v: &[i64], sep: &str| v.iter().map(i64::to_string).collect::<Vec<_>>().join(sep);
    match cli.format {
        Format::Json => {
            let mut obj = json!({
                "problem": label,
                "n": n,
                "decomposable": witness.is_some(),
                "witness": witness,
                "terms": terms,
            });
            if kind == DecideKind::Nonunit3 {
                obj["in_s3"] = json!(is_sum_three_squares(n));
            }
            writeln!(out, "{obj}")?;
        }
        Format::Csv => {
            writeln!(out, "problem,n,decomposable,witness")?;
            let w = witness.as_deref().map(|w| join(w, " ")).unwrap_or_default();
            writeln!(out, "{label},{n},{},{w}", witness.is_some())?;
        }
        Format::Text => match (&witness, &terms) {
            (Some(w), Some(t)) => writeln!(out, "{n} = {}  ({})", join(t, " + "), join(w, ", "))?,
            _ => writeln!(out, "none")?,
        },
    }
    Ok(witness.is_some())
}

fn write_check(cli: &Cli, out: &mut impl Write, r: &CheckReport) -> Result<(), Failure> {
    match cli.format {
        Format::Json => writeln!(out, "{}", serde_json::to_string(r).map_err(Error::from)?)?,
        Format::Csv => writeln!(out, "{}\n{}", CheckReport::CSV_HEADER, r.to_csv_row())?,
        Format::Text => write!(out, "{}", r.to_text())?,
    }
    Ok(())
}

fn parse_range(s: &str) -> anyhow::Result<(u64, u64)> {
    let (a, b) = s
        .split_once("..")
        .ok_or_else(|| anyhow!("range must look like lo..hi, got {s:?}"))?;
    let lo = a
        .trim()
        .parse()
        .with_context(|| format!("bad lower bound {a:?}"))?;
    let hi = b
        .trim()
        .trim_start_matches('=')
        .parse()
        .with_context(|| format!("bad upper bound {b:?}"))?;
    if lo > hi {
        bail!("empty range {lo}..{hi}");
    }
    Ok((lo, hi))
}

fn parse_residues(s: &str) -> anyhow::Result<Vec<u8>> {
    s.split(',')
        .map(|t| {
            let r: u8 = t
                .trim()
                .parse()
                .with_context(|| format!("bad residue {t:?}"))?;
            if r >= 5 {
                bail!("residue {r} is not in 0..5");
            }
            Ok(r)
        })
        .collect()
}

struct SieveJob<'a> {
    target: SieveTarget,
    lo: u64,
    hi: u64,
    filter: Option<&'a str>,
    poly: &'a PolyArgs,
    chunk: u64,
}

type Predicate = Box<dyn Fn(u64) -> bool + Sync + Send>;

fn sieve(
    cli: &Cli,
    out: &mut impl Write,
    job: SieveJob,
    save_to: Option<&PathBuf>,
    resume_from: Option<&PathBuf>,
) -> CmdResult {
    let exec = execution(cli);
    if job.filter.is_some() && job.target != SieveTarget::Nonunit {
        return Err(Failure::Usage(anyhow!(
            "--filter applies to the nonunit target only"
        )));
    }
    let (name, filter, grh, pred): (String, Option<String>, bool, Predicate) = match job.target {
        SieveTarget::Nonunit => {
            let residues = job
                .filter
                .map(parse_residues)
                .transpose()
                .map_err(Failure::Usage)?;
            let s = NonunitSieve::new(job.hi, residues.as_deref());
            (
                "nonunit".into(),
                s.filter_label(),
                true,
                Box::new(move |n| s.is_exception(n)),
            )
        }
        SieveTarget::FormF | SieveTarget::FormG => {
            let form = if job.target == SieveTarget::FormF {
                FormId::F
            } else {
                FormId::G
            };
            let s = GenusSieve::new(form, job.hi);
            (
                form.name().into(),
                Some(s.filter_label()),
                true,
                Box::new(move |n| s.is_exception(n)),
            )
        }
        SieveTarget::Polygonal => {
            let s = PolygonalSieve::new(job.poly.problem()?, job.hi, exec);
            let grh = s.grh_conditional();
            (
                s.problem.label(),
                s.filter_label(),
                grh,
                Box::new(move |n| s.is_exception(n)),
            )
        }
    };
    let resume = resume_from.map(|p| Checkpoint::load(p)).transpose()?;
    let driver = ChunkedSieve::new(name, job.lo, job.hi)
        .filter(filter)
        .chunk_size(job.chunk)
        .exec(exec);
    let timing = cli.timing;
    let stream = cli.format == Format::Json;
    let mut report = driver.run_resumable(pred, resume, |batch: &[ChunkResult], cp: &Checkpoint| {
        if stream {
            for c in batch {
                let mut line = json!({"chunk": c.index, "lo": c.lo, "hi": c.hi, "exceptions": c.exceptions});
                if timing {
                    line["elapsed_ms"] = json!(c.elapsed_ms);
                }
                writeln!(out, "{line}")?;
            }
        }
        if let Some(path) = save_to {
            cp.save(path)?;
        }
        Ok(())
    })?;
    report.grh_conditional = grh;
    let report = if cli.timing {
        report
    } else {
        report.without_timing()
    };
    write_sieve_summary(cli, out, &report)?;
    Ok(true)
}

fn write_sieve_summary(cli: &Cli, out: &mut impl Write, r: &SieveReport) -> Result<(), Failure> {
    match cli.format {
        Format::Json => writeln!(out, "{}", json!({ "summary": r }))?,
        Format::Csv => write!(out, "{}", r.to_csv())?,
        Format::Text => {
            let ex: Vec<String> = r.exceptions.iter().map(u64::to_string).collect();
            writeln!(
                out,
                "{} {}..{}: {} exceptions",
                r.target,
                r.range.0,
                r.range.1,
                r.exceptions.len()
            )?;
            if let Some(f) = &r.filter {
                writeln!(out, "filter: {f}")?;
            }
            writeln!(out, "{}", ex.join(" "))?;
            if r.grh_conditional {
                writeln!(out, "completeness beyond the range is GRH-conditional")?;
            }
            if cli.timing {
                writeln!(out, "{} chunks in {} ms", r.chunk_count, r.elapsed_ms)?;
            }
        }
    }
    Ok(())
}

fn genus_report(cli: &Cli, out: &mut impl Write, max: u64) -> CmdResult {
    let rows = GenusSeries::new(max, execution(cli))?.rows()?;
    match cli.format {
        Format::Json => writeln!(
            out,
            "{}",
            serde_json::to_string(&rows).map_err(Error::from)?
        )?,
        Format::Csv | Format::Text => {
            writeln!(out, "n,r_f,r_g,genus_avg_exact,genus_avg_analytic,phi")?;
            for r in &rows {
                writeln!(
                    out,
                    "{},{},{},{},{},{}",
                    r.n,
                    r.r_f,
                    r.r_g,
                    r.genus_avg_exact,
                    r.genus_avg_analytic.as_deref().unwrap_or(""),
                    r.phi
                )?;
            }
        }
    }
    Ok(true)
}

fn parse_gram(s: &str) -> Result<TernaryLattice, Failure> {
    Ok(s.parse::<TernaryLattice>()?)
}

fn lattice(cli: &Cli, out: &mut impl Write, cmd: &LatticeCommand) -> CmdResult {
    let exec = execution(cli);
    match cmd {
        LatticeCommand::Theta { gram, max } => {
            let l = parse_gram(gram)?;
            let q = theta_coeffs(&l, *max, exec)?;
            match cli.format {
                Format::Json => writeln!(
                    out,
                    "{}",
                    json!({"gram": l.gram(), "coefficients": q.coeffs})
                )?,
                Format::Csv | Format::Text => {
                    writeln!(out, "n,r")?;
                    for (n, c) in q.coeffs.iter().enumerate() {
                        writeln!(out, "{n},{c}")?;
                    }
                }
            }
            Ok(true)
        }
        LatticeCommand::Count { gram, n } => {
            let l = parse_gram(gram)?;
            let vs = l.vectors_of_norm(*n);
            match cli.format {
                Format::Json => writeln!(
                    out,
                    "{}",
                    json!({"gram": l.gram(), "n": n, "count": vs.len(), "vectors": vs})
                )?,
                Format::Csv => {
                    writeln!(out, "x,y,z")?;
                    for v in &vs {
                        writeln!(out, "{},{},{}", v[0], v[1], v[2])?;
                    }
                }
                Format::Text => writeln!(out, "r({n}) = {}", vs.len())?,
            }
            Ok(!vs.is_empty())
        }
        LatticeCommand::Isometries { source, target } => {
            let (s, t) = (parse_gram(source)?, parse_gram(target)?);
            let all = isometries(&s, &t, exec);
            let orbs = orbits(&s, &t);
            match cli.format {
                Format::Json => {
                    let reps: Vec<_> = orbs
                        .iter()
                        .map(|(m, size)| json!({"matrix": m.matrix, "orbit_size": size}))
                        .collect();
                    writeln!(out, "{}", json!({"count": all.len(), "orbits": reps}))?;
                }
                Format::Csv => {
                    writeln!(out, "orbit,orbit_size,matrix")?;
                    for (i, (m, size)) in orbs.iter().enumerate() {
                        writeln!(out, "{i},{size},\"{:?}\"", m.matrix)?;
                    }
                }
                Format::Text => {
                    writeln!(
                        out,
                        "r(source, target) = {} in {} orbits",
                        all.len(),
                        orbs.len()
                    )?;
                    for (m, size) in &orbs {
                        writeln!(out, "{:?} (orbit size {size})", m.matrix)?;
                    }
                }
            }
            Ok(!all.is_empty())
        }
    }
}
