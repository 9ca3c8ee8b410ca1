use std::collections::BTreeMap;
use std::fs;
use std::io::{self, Read, Write};
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};
use serde_json::json;

use cyclic_runpoly::conjecture::{conjecture_check, Verdict};
use cyclic_runpoly::disjunctive::{build_phat_with, BlockRows};
use cyclic_runpoly::expanded::{build_qprime, expanded_dot, size_report};
use cyclic_runpoly::instance::{bitstring, enumerate_z_with_limit};
use cyclic_runpoly::netflow::{build_q, network_dot};
use cyclic_runpoly::ratpoly::{lpfile, HPolytope, DEFAULT_DD_DIMENSION_LIMIT};
use cyclic_runpoly::suites::{
    parse_grid, run_suite, Suite, SuiteOptions, DEFAULT_HULL_OBJECTIVES, DEFAULT_LIMIT_N, DEFAULT_SEED,
    DEFAULT_SWEEP_OBJECTIVES,
};
use cyclic_runpoly::yzform::{build_p, yz_variables};
use cyclic_runpoly::{Error, Instance};

const SEED_ENV: &str = "CYCLIC_RUNPOLY_SEED";

#[derive(Parser)]
#[command(name = "cyclic-runpoly", version, about = "Exact polyhedral checks for cyclic run-length-bounded on/off sequences")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// List the feasible (y, z) points with a start-up count histogram.
    Enumerate {
        /// Instance JSON file, or `-` for stdin.
        instance: String,
        #[arg(long, value_enum, default_value_t = TextOrJson::Text)]
        format: TextOrJson,
        #[arg(long, default_value_t = 20)]
        limit_n: usize,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Export a formulation as an LP file, a JSON row dump, or a DOT graph.
    Formulate {
        instance: String,
        #[arg(long, value_enum)]
        model: Model,
        #[arg(long, value_enum, default_value_t = Format::Lp)]
        format: Format,
        #[arg(long, value_enum, default_value_t = RowChoice::Stated)]
        block_rows: RowChoice,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Run a check suite on one instance or on a grid of constant instances.
    Check {
        /// Instance JSON file; omit when `--grid` is given.
        instance: Option<String>,
        #[arg(long)]
        suite: Suite,
        /// For example `n=4..8; const=(1,2,1,2)` or `n=3..6; const=all<=3`.
        #[arg(long)]
        grid: Option<String>,
        /// Overridden by the CYCLIC_RUNPOLY_SEED environment variable.
        #[arg(long)]
        seed: Option<String>,
        #[arg(long, default_value_t = DEFAULT_LIMIT_N)]
        limit_n: usize,
        /// Seeded objectives per hull check.
        #[arg(long, default_value_t = DEFAULT_HULL_OBJECTIVES)]
        objectives: usize,
        /// Seeded objectives per integrality sweep.
        #[arg(long, default_value_t = DEFAULT_SWEEP_OBJECTIVES)]
        sweep_objectives: usize,
        #[arg(long, value_enum, default_value_t = RowChoice::Stated)]
        block_rows: RowChoice,
        #[arg(long, value_enum, default_value_t = TextOrJson::Text)]
        format: TextOrJson,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Compare the projection of the flow polytope with P.
    Conjecture {
        instance: Option<String>,
        #[arg(long)]
        grid: Option<String>,
        /// Largest dimension for vertex enumeration of P.
        #[arg(long, default_value_t = DEFAULT_DD_DIMENSION_LIMIT)]
        limit_dim: usize,
        #[arg(long, value_enum, default_value_t = TextOrJson::Text)]
        format: TextOrJson,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Sizes of the unpruned expanded network.
    Sizes {
        #[arg(long)]
        grid: String,
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

#[derive(Clone, Copy, ValueEnum)]
enum Model {
    #[value(name = "P")]
    P,
    #[value(name = "Q")]
    Q,
    #[value(name = "Qprime")]
    QPrime,
    #[value(name = "Phat")]
    PHat,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Format {
    Lp,
    Json,
    Dot,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum TextOrJson {
    Text,
    Json,
}

#[derive(Clone, Copy, ValueEnum)]
enum RowChoice {
    Stated,
    Completed,
}

impl From<RowChoice> for BlockRows {
    fn from(c: RowChoice) -> Self {
        match c {
            RowChoice::Stated => BlockRows::AsStated,
            RowChoice::Completed => BlockRows::WithInitialOffRun,
        }
    }
}

enum Failure {
    Usage(String),
    Check,
    Limit(String),
    Other(String),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        match e {
            Error::InvalidArgument(_) | Error::Parse(_) => Failure::Usage(e.to_string()),
            Error::ResourceLimit(_) => Failure::Limit(e.to_string()),
            other => Failure::Other(other.to_string()),
        }
    }
}

impl From<io::Error> for Failure {
    fn from(e: io::Error) -> Self {
        Failure::Usage(e.to_string())
    }
}

fn read_instance(path: &str) -> Result<Instance, Failure> {
    let text = if path == "-" {
        let mut s = String::new();
        io::stdin().read_to_string(&mut s)?;
        s
    } else {
        fs::read_to_string(path).map_err(|e| Failure::Usage(format!("{path}: {e}")))?
    };
    Ok(Instance::from_json(&text)?)
}

fn instances(instance: Option<&str>, grid: Option<&str>) -> Result<Vec<Instance>, Failure> {
    match (instance, grid) {
        (Some(p), None) => Ok(vec![read_instance(p)?]),
        (None, Some(g)) => Ok(parse_grid(g)?),
        _ => Err(Failure::Usage("give exactly one of an instance file or --grid".into())),
    }
}

fn parse_seed(s: &str) -> Result<u64, Failure> {
    let s = s.trim();
    let parsed = match s.strip_prefix("0x").or_else(|| s.strip_prefix("0X")) {
        Some(hex) => u64::from_str_radix(hex, 16),
        None => s.parse(),
    };
    parsed.map_err(|_| Failure::Usage(format!("invalid seed {s:?}")))
}

fn resolve_seed(flag: Option<&str>) -> Result<u64, Failure> {
    if let Ok(v) = std::env::var(SEED_ENV) {
        return parse_seed(&v);
    }
    flag.map_or(Ok(DEFAULT_SEED), parse_seed)
}

fn emit(out: Option<&PathBuf>, text: &str) -> Result<(), Failure> {
    match out {
        Some(p) => fs::write(p, text)?,
        None => io::stdout().write_all(text.as_bytes())?,
    }
    Ok(())
}

fn cmd_enumerate(path: &str, format: TextOrJson, limit_n: usize, out: Option<&PathBuf>) -> Result<(), Failure> {
    let inst = read_instance(path)?;
    let z = enumerate_z_with_limit(&inst, limit_n)?;
    let mut hist: BTreeMap<usize, usize> = BTreeMap::new();
    let rows: Vec<(String, String, usize)> = z
        .iter()
        .map(|p| {
            let y = p.states().expect("binary");
            let s = p.startups().expect("binary");
            let k = s.iter().map(|&v| v as usize).sum();
            *hist.entry(k).or_default() += 1;
            (bitstring(&y), bitstring(&s), k)
        })
        .collect();
    let text = match format {
        TextOrJson::Json => {
            let points: Vec<_> = rows.iter().map(|(y, z, k)| json!({ "y": y, "z": z, "startups": k })).collect();
            let doc = json!({ "instance": inst.descriptor(), "count": z.len(), "points": points, "histogram": hist });
            format!("{}\n", serde_json::to_string_pretty(&doc).expect("serializes"))
        }
        TextOrJson::Text => {
            let mut s = format!("{}\n", inst.descriptor());
            if z.is_empty() {
                s.push_str("empty: no feasible sequences\n");
            } else {
                for (y, zz, k) in &rows {
                    s.push_str(&format!("y={y} z={zz} startups={k}\n"));
                }
                s.push_str(&format!("{} points\nstart-up histogram:\n", z.len()));
                for (k, c) in &hist {
                    s.push_str(&format!("  {k}: {c}\n"));
                }
            }
            s
        }
    };
    emit(out, &text)
}

fn export(poly: &HPolytope, format: Format, title: &str, n: usize) -> Result<String, Failure> {
    match format {
        Format::Lp => Ok(lpfile::write_lp(poly, None, &yz_variables(n), title)),
        Format::Json => Ok(format!("{}\n", lpfile::rows_json(poly))),
        Format::Dot => Err(Failure::Usage("dot output exists only for the network models Q and Qprime".into())),
    }
}

fn cmd_formulate(
    path: &str,
    model: Model,
    format: Format,
    rows: RowChoice,
    out: Option<&PathBuf>,
) -> Result<(), Failure> {
    let inst = read_instance(path)?;
    let n = inst.n;
    let text = match model {
        Model::P => {
            let pf = build_p(&inst)?;
            export(&pf.poly, format, &format!("P for {}", inst.descriptor()), n)?
        }
        Model::Q => {
            let q = build_q(&inst);
            if format == Format::Dot {
                network_dot(&q.network, &[])
            } else {
                export(&q.poly, format, &format!("Q for {}", inst.descriptor()), n)?
            }
        }
        Model::QPrime => {
            if format == Format::Dot {
                expanded_dot(&inst, &[])
            } else {
                let m = build_qprime(&inst);
                export(&m.poly, format, &format!("Qprime for {}", inst.descriptor()), n)?
            }
        }
        Model::PHat => {
            let phat = build_phat_with(&inst, rows.into())?;
            export(&phat, format, &format!("Phat for {}", inst.descriptor()), n)?
        }
    };
    emit(out, &text)
}

fn cmd_check(
    instance: Option<&str>,
    suite: Suite,
    grid: Option<&str>,
    opts: SuiteOptions,
    format: TextOrJson,
    out: Option<&PathBuf>,
) -> Result<(), Failure> {
    let list = instances(instance, grid)?;
    let mut text = String::new();
    let mut failed = 0;
    let (mut passed_total, mut failed_total) = (0, 0);
    for inst in &list {
        let r = run_suite(suite, inst, &opts)?;
        eprintln!("{} ({:.3}s)", r.summary_line(), r.wall_time.as_secs_f64());
        passed_total += r.passed;
        failed_total += r.failed;
        if !r.ok() {
            failed += 1;
        }
        match format {
            TextOrJson::Json => {
                text.push_str(&serde_json::to_string(&r).expect("report serializes"));
                text.push('\n');
            }
            TextOrJson::Text => {
                text.push_str(&r.summary_line());
                text.push('\n');
                for n in &r.notes {
                    text.push_str(&format!("  note: {n}\n"));
                }
                for w in &r.witnesses {
                    text.push_str(&format!("  witness {}: {}\n", w.check, w.detail));
                }
                for rec in &r.records {
                    text.push_str(&format!("{rec}\n"));
                }
            }
        }
    }
    if format == TextOrJson::Text {
        text.push_str(&format!(
            "{suite}: {} instances, {} failing; {passed_total} checks passed, {failed_total} failed\n",
            list.len(),
            failed
        ));
    }
    emit(out, &text)?;
    if failed > 0 {
        Err(Failure::Check)
    } else {
        Ok(())
    }
}

fn cmd_conjecture(
    instance: Option<&str>,
    grid: Option<&str>,
    limit_dim: usize,
    format: TextOrJson,
    out: Option<&PathBuf>,
) -> Result<(), Failure> {
    let list = instances(instance, grid)?;
    let mut text = String::new();
    let mut inconclusive = None;
    for inst in &list {
        let r = conjecture_check(inst, limit_dim)?;
        match format {
            TextOrJson::Json => {
                text.push_str(&serde_json::to_string(&r).expect("report serializes"));
                text.push('\n');
            }
            TextOrJson::Text => {
                text.push_str(&format!("{}: {}\n", r.instance, r.verdict.as_str()));
                if let Some(w) = &r.outside_p {
                    text.push_str(&format!("  row {} reaches {} on Q at {}\n", w.row, w.max_over_q, w.point));
                }
                if let Some(p) = &r.outside_proj {
                    text.push_str(&format!("  vertex of P outside proj(Q): {p}\n"));
                }
                if let Some(why) = &r.reason {
                    text.push_str(&format!("  reason: {why}\n"));
                }
            }
        }
        if r.verdict == Verdict::Inconclusive && inconclusive.is_none() {
            inconclusive = r.reason.clone();
        }
    }
    emit(out, &text)?;
    match inconclusive {
        Some(why) => Err(Failure::Limit(format!("inconclusive: {why}; lower n or raise --limit-dim"))),
        None => Ok(()),
    }
}

fn cmd_sizes(grid: &str, out: Option<&PathBuf>) -> Result<(), Failure> {
    let mut text = String::from("instance,nodes,arcs,variables,equalities\n");
    for inst in parse_grid(grid)? {
        let s = size_report(&inst);
        text.push_str(&format!("{},{},{},{},{}\n", inst.descriptor(), s.nodes, s.arcs, s.variables, s.equalities));
    }
    emit(out, &text)
}

fn run(cli: Cli) -> Result<(), Failure> {
    match cli.command {
        Command::Enumerate { instance, format, limit_n, out } => cmd_enumerate(&instance, format, limit_n, out.as_ref()),
        Command::Formulate { instance, model, format, block_rows, out } => {
            cmd_formulate(&instance, model, format, block_rows, out.as_ref())
        }
        Command::Check {
            instance,
            suite,
            grid,
            seed,
            limit_n,
            objectives,
            sweep_objectives,
            block_rows,
            format,
            out,
        } => {
            let opts = SuiteOptions {
                seed: resolve_seed(seed.as_deref())?,
                hull_objectives: objectives,
                sweep_objectives,
                limit_n,
                block_rows: block_rows.into(),
            };
            cmd_check(instance.as_deref(), suite, grid.as_deref(), opts, format, out.as_ref())
        }
        Command::Conjecture { instance, grid, limit_dim, format, out } => {
            cmd_conjecture(instance.as_deref(), grid.as_deref(), limit_dim, format, out.as_ref())
        }
        Command::Sizes { grid, out } => cmd_sizes(&grid, out.as_ref()),
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { 2 } else { 0 });
        }
    };
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure::Check) => ExitCode::from(1),
        Err(Failure::Usage(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(2)
        }
        Err(Failure::Limit(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(3)
        }
        Err(Failure::Other(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(1)
        }
    }
}
