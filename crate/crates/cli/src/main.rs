//! `asos`: build, solve, sweep and benchmark SOS relaxations of POPs.

use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::PathBuf;

use anyhow::{anyhow, bail, Context, Result};
use clap::{Args, Parser, Subcommand};
use serde_json::json;

use asos::bench::{builtin_pop, run_bench, write_csv, BenchConfig, Family, MethodSummary};
use asos::pop::{parse_pop, Pop};
use asos::relaxation::{assemble_sdp, build, BuildOptions, Method};
use asos::sdp::{certify_metrics, export_sdpa, IpmOptions};
use asos::{solve_pop, Outcome};

#[derive(Parser)]
#[command(name = "asos", version, about = "Sums-of-squares relaxations for polynomial optimization")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Build a relaxation and write it in SDPA sparse format.
    Build {
        #[command(flatten)]
        relax: RelaxArgs,
        #[arg(long)]
        out: PathBuf,
    },
    /// Build, solve and certify one relaxation.
    Solve {
        #[command(flatten)]
        relax: RelaxArgs,
        #[command(flatten)]
        ipm: IpmArgs,
        #[arg(long)]
        json: bool,
    },
    /// Solve a range of orders with one method.
    Sweep {
        #[command(flatten)]
        problem: ProblemArgs,
        #[arg(long, default_value = "lasserre")]
        method: Method,
        /// Inclusive range `R1..R2`.
        #[arg(long)]
        orders: String,
        #[command(flatten)]
        opts: OptionArgs,
        #[command(flatten)]
        ipm: IpmArgs,
        #[arg(long)]
        json: bool,
    },
    /// Run a seeded batch and write one CSV row per instance and method.
    Bench(BenchArgs),
    /// Evaluate the objective and feasibility errors of a point.
    Certify {
        #[command(flatten)]
        problem: ProblemArgs,
        /// Comma-separated `name=value` pairs.
        #[arg(long)]
        point: String,
        #[arg(long)]
        sdpobj: f64,
        #[arg(long)]
        json: bool,
    },
}

#[derive(Args)]
struct ProblemArgs {
    /// POP file, or `builtin:NAME` (st_e08, prestel_delzell).
    #[arg(long)]
    pop: String,
    /// Radius `b` of the box assumed to hold a minimizer.
    #[arg(long)]
    radius: Option<f64>,
}

#[derive(Args)]
struct OptionArgs {
    #[arg(long, default_value_t = 0.0)]
    eps: f64,
    #[arg(long)]
    rtilde: Option<u32>,
    #[arg(long)]
    sparse: bool,
    #[arg(long)]
    bound_products: bool,
    /// Keep every σ_0 basis monomial.
    #[arg(long)]
    no_reduce: bool,
}

#[derive(Args)]
struct RelaxArgs {
    #[command(flatten)]
    problem: ProblemArgs,
    #[arg(long, default_value = "lasserre")]
    method: Method,
    #[arg(long)]
    order: u32,
    #[command(flatten)]
    opts: OptionArgs,
}

#[derive(Args)]
struct IpmArgs {
    #[arg(long, default_value_t = 1e-8)]
    tol: f64,
    #[arg(long, default_value_t = 100)]
    max_iter: usize,
    /// Per-iteration log on stderr.
    #[arg(long)]
    verbose: bool,
}

#[derive(Args)]
struct BenchArgs {
    #[arg(long)]
    family: Family,
    #[arg(long, default_value_t = 5)]
    n: usize,
    #[arg(long, default_value_t = 1.0)]
    density: f64,
    #[arg(long, default_value_t = 1)]
    count: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long, value_delimiter = ',', default_value = "lasserre,adaptive")]
    methods: Vec<Method>,
    #[arg(long)]
    order: u32,
    #[arg(long, default_value_t = 0.0)]
    eps: f64,
    /// Problem name for `--family builtin`.
    #[arg(long)]
    builtin: Option<String>,
    #[arg(long)]
    csv: Option<PathBuf>,
    /// Leave the seconds column empty so reruns compare byte for byte.
    #[arg(long)]
    no_time: bool,
    /// Run instances one after another.
    #[arg(long)]
    sequential: bool,
    #[command(flatten)]
    ipm: IpmArgs,
}

impl ProblemArgs {
    fn load(&self) -> Result<Pop> {
        let pop = match self.pop.strip_prefix("builtin:") {
            Some(name) => builtin_pop(name)?.pop,
            None => {
                let text = std::fs::read_to_string(&self.pop)
                    .with_context(|| format!("reading {}", self.pop))?;
                parse_pop(&text).with_context(|| format!("parsing {}", self.pop))?
            }
        };
        Ok(match self.radius {
            Some(b) => pop.with_radius(b)?,
            None => pop,
        })
    }
}

impl OptionArgs {
    fn build_options(&self, r: u32) -> BuildOptions {
        BuildOptions {
            eps: self.eps,
            rtilde: self.rtilde,
            sparse: self.sparse,
            bound_products: self.bound_products,
            reduce: !self.no_reduce,
            ..BuildOptions::new(r)
        }
    }
}

impl IpmArgs {
    fn options(&self) -> IpmOptions {
        IpmOptions {
            tol: self.tol,
            max_iter: self.max_iter,
            verbose: self.verbose,
            ..IpmOptions::default()
        }
    }
}

fn parse_orders(s: &str) -> Result<std::ops::RangeInclusive<u32>> {
    let (a, b) = s
        .split_once("..")
        .ok_or_else(|| anyhow!("orders must look like R1..R2, got `{s}`"))?;
    let a: u32 = a.trim().parse().with_context(|| format!("bad order `{a}`"))?;
    let b: u32 = b.trim().parse().with_context(|| format!("bad order `{b}`"))?;
    if a == 0 || a > b {
        bail!("empty or invalid order range {a}..{b}");
    }
    Ok(a..=b)
}

fn parse_point(s: &str, pop: &Pop) -> Result<Vec<f64>> {
    let mut x = vec![None; pop.nvars()];
    for part in s.split(',').map(str::trim).filter(|p| !p.is_empty()) {
        let (name, value) = part
            .split_once('=')
            .ok_or_else(|| anyhow!("expected name=value, got `{part}`"))?;
        let i = pop
            .var_names
            .iter()
            .position(|v| v == name.trim())
            .ok_or_else(|| anyhow!("unknown variable `{}`", name.trim()))?;
        x[i] = Some(value.trim().parse::<f64>().with_context(|| format!("bad value in `{part}`"))?);
    }
    x.into_iter()
        .zip(&pop.var_names)
        .map(|(v, n)| v.ok_or_else(|| anyhow!("no value for `{n}`")))
        .collect()
}

fn opt(v: Option<f64>) -> serde_json::Value {
    v.filter(|x| x.is_finite()).map_or(serde_json::Value::Null, |x| json!(x))
}

fn outcome_json(r: u32, method: Method, out: &Outcome) -> serde_json::Value {
    let s = &out.solution;
    json!({
        "method": method.as_str(),
        "r": r,
        "status": s.status.as_str(),
        "objective": opt(out.objective()),
        "primal_obj": opt(Some(s.primal_obj)),
        "dual_obj": opt(Some(s.dual_obj)),
        "gap": opt(Some(s.gap)),
        "primal_residual": opt(Some(s.primal_residual)),
        "dual_residual": opt(Some(s.dual_residual)),
        "iterations": s.iterations,
        "rows": out.sdp.m,
        "max_block": out.sdp.max_block(),
        "nnz": out.sdp.nnz(),
        "candidate": out.candidate,
        "pop_obj": opt(out.metrics.map(|m| m.pop_obj)),
        "eps_obj": opt(out.metrics.map(|m| m.eps_obj)),
        "eps_feas": opt(out.metrics.map(|m| m.eps_feas)),
        "solved": out.solved(),
        "seconds": out.seconds,
    })
}

fn fmt_opt(v: Option<f64>) -> String {
    v.map_or_else(|| "-".into(), |x| format!("{x:.9e}"))
}

fn print_outcome(out: &Outcome, w: &mut impl Write) -> io::Result<()> {
    let s = &out.solution;
    writeln!(w, "status      {}", s.status)?;
    writeln!(w, "objective   {}", fmt_opt(out.objective()))?;
    writeln!(w, "primal/dual {:.9e} / {:.9e}", s.primal_obj, s.dual_obj)?;
    writeln!(
        w,
        "residuals   gap {:.2e}, primal {:.2e}, dual {:.2e}",
        s.gap, s.primal_residual, s.dual_residual
    )?;
    writeln!(w, "iterations  {}", s.iterations)?;
    writeln!(w, "sdp         rows {}, max block {}, nnz {}", out.sdp.m, out.sdp.max_block(), out.sdp.nnz())?;
    if let Some(x) = &out.candidate {
        let x: Vec<String> = x.iter().map(|v| format!("{v:.9}")).collect();
        writeln!(w, "candidate   ({})", x.join(", "))?;
    }
    if let Some(m) = out.metrics {
        writeln!(
            w,
            "metrics     f(x) {:.9e}, eps_obj {:.2e}, eps_feas {:.2e}, solved {}",
            m.pop_obj, m.eps_obj, m.eps_feas, m.solved
        )?;
    }
    writeln!(w, "seconds     {:.3}", out.seconds)
}

fn print_summary(summary: &[MethodSummary], w: &mut impl Write) -> io::Result<()> {
    writeln!(w, "{:<16} {:>9} {:>7}  {:<38} seconds (min, ave, max)", "method", "instances", "solved", "ratio (min, ave, max)")?;
    for s in summary {
        let stats = |v: Option<asos::bench::Stats>, p: usize| {
            v.map_or_else(|| "-".into(), |s| format!("({:.p$}, {:.p$}, {:.p$})", s.min, s.ave, s.max))
        };
        writeln!(
            w,
            "{:<16} {:>9} {:>7}  {:<38} {}",
            s.method.as_str(),
            s.instances,
            s.solved,
            stats(s.ratio, 6),
            stats(s.seconds, 3)
        )?;
    }
    Ok(())
}

fn run(cli: Cli) -> Result<()> {
    let stdout = io::stdout();
    let mut w = stdout.lock();
    match cli.command {
        Command::Build { relax, out } => {
            let pop = relax.problem.load()?;
            let prog = build(&pop, relax.method, &relax.opts.build_options(relax.order))?;
            let sdp = assemble_sdp(&prog);
            export_sdpa(&sdp, &out).with_context(|| format!("writing {}", out.display()))?;
            writeln!(
                w,
                "wrote {}: {} rows, {} blocks, max block {}, nnz {}",
                out.display(),
                sdp.m,
                sdp.blocks.len(),
                sdp.max_block(),
                sdp.nnz()
            )?;
        }
        Command::Solve { relax, ipm, json } => {
            let pop = relax.problem.load()?;
            let out = solve_pop(&pop, relax.method, &relax.opts.build_options(relax.order), &ipm.options())?;
            if json {
                writeln!(w, "{}", serde_json::to_string_pretty(&outcome_json(relax.order, relax.method, &out))?)?;
            } else {
                print_outcome(&out, &mut w)?;
            }
        }
        Command::Sweep { problem, method, orders, opts, ipm, json } => {
            let pop = problem.load()?;
            let mut rows = Vec::new();
            if !json {
                writeln!(w, "{:>3} {:<18} {:>18} {:>9} {:>6} {:>9}", "r", "status", "objective", "gap", "iters", "seconds")?;
            }
            for r in parse_orders(&orders)? {
                match solve_pop(&pop, method, &opts.build_options(r), &ipm.options()) {
                    Ok(out) if json => rows.push(outcome_json(r, method, &out)),
                    Ok(out) => writeln!(
                        w,
                        "{r:>3} {:<18} {:>18} {:>9.2e} {:>6} {:>9.3}",
                        out.solution.status.as_str(),
                        fmt_opt(out.objective()),
                        out.solution.gap,
                        out.solution.iterations,
                        out.seconds
                    )?,
                    Err(e) if json => rows.push(json!({ "method": method.as_str(), "r": r, "error": e.to_string() })),
                    Err(e) => writeln!(w, "{r:>3} error: {e}")?,
                }
            }
            if json {
                writeln!(w, "{}", serde_json::to_string_pretty(&rows)?)?;
            }
        }
        Command::Bench(args) => {
            let cfg = BenchConfig {
                density: args.density,
                count: args.count,
                seed: args.seed,
                eps: args.eps,
                ipm: args.ipm.options(),
                builtin: args.builtin.clone(),
                parallel: !args.sequential,
                ..BenchConfig::new(args.family, args.n, args.methods.clone(), args.order)
            };
            let (records, summary) = run_bench(&cfg)?;
            if let Some(path) = &args.csv {
                let file = File::create(path).with_context(|| format!("creating {}", path.display()))?;
                write_csv(&records, BufWriter::new(file), !args.no_time)?;
            } else {
                write_csv(&records, &mut w, !args.no_time)?;
                writeln!(w)?;
            }
            print_summary(&summary, &mut w)?;
        }
        Command::Certify { problem, point, sdpobj, json } => {
            let pop = problem.load()?;
            let x = parse_point(&point, &pop)?;
            let m = certify_metrics(&pop, &x, sdpobj)?;
            if json {
                let v = json!({
                    "pop_obj": m.pop_obj,
                    "eps_obj": m.eps_obj,
                    "eps_feas": m.eps_feas,
                    "solved": m.solved,
                });
                writeln!(w, "{}", serde_json::to_string_pretty(&v)?)?;
            } else {
                writeln!(w, "f(x)      {:.16e}", m.pop_obj)?;
                writeln!(w, "eps_obj   {:.3e}", m.eps_obj)?;
                writeln!(w, "eps_feas  {:.3e}", m.eps_feas)?;
                writeln!(w, "solved    {}", m.solved)?;
            }
        }
    }
    Ok(())
}

fn main() {
    if let Err(e) = run(Cli::parse()) {
        eprintln!("error: {e:#}");
        std::process::exit(1);
    }
}
