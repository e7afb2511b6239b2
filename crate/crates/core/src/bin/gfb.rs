//! Command-line driver for the graph-Fourier-basis experiments.
//!
//! Subcommands: `solve` (one instance, per-iteration trace + summary),
//! `bench` (instances × algorithms grid, CSV + text table), `check`
//! (oracle self-tests), `gen` (write a generated graph as an edge list).

use std::path::PathBuf;
use std::process::ExitCode;
use std::str::FromStr;

use clap::{Args, Parser, Subcommand};

use stiefel_smoothing::experiment::{
    bench_csv, bench_table, build_instance, exit_code_for, run_bench, run_check, run_solve,
    ExperimentConfig, InstanceSpec, SolverOverrides,
};
use stiefel_smoothing::gfb::{generate_graph, write_edge_list, GraphFamily};
use stiefel_smoothing::solver::Algorithm;

#[derive(Parser)]
#[command(
    name = "gfb",
    about = "Smoothing algorithms on the Stiefel manifold: graph Fourier basis experiments",
    version
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Solve one instance and write trace CSV, summary JSON and the
    /// recovered basis.
    Solve(SolveArgs),
    /// Run an instances × algorithms benchmark grid.
    Bench(BenchArgs),
    /// Run the oracle self-checks and report residuals.
    Check,
    /// Generate a graph and write it as an edge-list file.
    Gen(GenArgs),
}

#[derive(Args, Clone)]
struct InstanceArgs {
    /// Graph family (path, tree4, comet, ring, geometric, community) or a
    /// path to an edge-list file.
    #[arg(long)]
    graph: Option<String>,
    /// Vertex count for generated graphs (family default when omitted).
    #[arg(long)]
    n: Option<usize>,
    /// Seed for generated graphs.
    #[arg(long, default_value_t = 0)]
    seed: u64,
}

impl InstanceArgs {
    fn to_spec(&self) -> Option<InstanceSpec> {
        let graph = self.graph.as_ref()?;
        if let Ok(family) = GraphFamily::from_str(graph) {
            Some(InstanceSpec::Family {
                family,
                n: self.n,
                seed: self.seed,
            })
        } else {
            Some(InstanceSpec::EdgeList {
                path: PathBuf::from(graph),
            })
        }
    }
}

#[derive(Args, Clone)]
struct OverrideArgs {
    #[arg(long)]
    max_iter: Option<usize>,
    #[arg(long)]
    mu0: Option<f64>,
    #[arg(long)]
    sigma: Option<f64>,
    #[arg(long)]
    alpha: Option<f64>,
    #[arg(long)]
    gamma: Option<f64>,
    #[arg(long)]
    tol1: Option<f64>,
    #[arg(long)]
    tol2: Option<f64>,
}

impl OverrideArgs {
    fn merge_into(&self, overrides: &mut SolverOverrides) {
        if self.max_iter.is_some() {
            overrides.max_iter = self.max_iter;
        }
        if self.mu0.is_some() {
            overrides.mu0 = self.mu0;
        }
        if self.sigma.is_some() {
            overrides.sigma = self.sigma;
        }
        if self.alpha.is_some() {
            overrides.alpha = self.alpha;
        }
        if self.gamma.is_some() {
            overrides.gamma = self.gamma;
        }
        if self.tol1.is_some() {
            overrides.tol1 = self.tol1;
        }
        if self.tol2.is_some() {
            overrides.tol2 = self.tol2;
        }
    }
}

#[derive(Args)]
struct SolveArgs {
    #[command(flatten)]
    instance: InstanceArgs,
    /// Algorithms to run (comma separated: sgpc, sgrc, srgd).
    #[arg(long, value_delimiter = ',')]
    algo: Vec<Algorithm>,
    /// Output directory for trace/summary/basis files.
    #[arg(long, default_value = "results")]
    out: PathBuf,
    /// TOML experiment config; flags override file values.
    #[arg(long)]
    config: Option<PathBuf>,
    #[command(flatten)]
    overrides: OverrideArgs,
}

#[derive(Args)]
struct BenchArgs {
    #[command(flatten)]
    instance: InstanceArgs,
    #[arg(long, value_delimiter = ',')]
    algo: Vec<Algorithm>,
    #[arg(long, default_value = "results")]
    out: PathBuf,
    #[arg(long)]
    config: Option<PathBuf>,
    /// Dispatch independent cells to a worker pool.
    #[arg(long)]
    parallel: bool,
    #[command(flatten)]
    overrides: OverrideArgs,
}

#[derive(Args)]
struct GenArgs {
    /// Graph family to generate.
    #[arg(long)]
    graph: String,
    #[arg(long)]
    n: Option<usize>,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Destination edge-list file.
    #[arg(long)]
    out: PathBuf,
}

fn load_config(path: &Option<PathBuf>) -> Result<ExperimentConfig, stiefel_smoothing::Error> {
    match path {
        Some(p) => ExperimentConfig::from_toml_path(p),
        None => Ok(ExperimentConfig::default()),
    }
}

fn cmd_solve(args: SolveArgs) -> Result<ExitCode, stiefel_smoothing::Error> {
    let mut config = load_config(&args.config)?;
    if let Some(spec) = args.instance.to_spec() {
        config.instances = vec![spec];
    }
    if !args.algo.is_empty() {
        config.algorithms = args.algo.clone();
    }
    args.overrides.merge_into(&mut config.solver);
    config.validate()?;

    let out_dir = config.output.clone().unwrap_or_else(|| args.out.clone());
    let mut worst = ExitCode::SUCCESS;
    for spec in &config.instances {
        let built = build_instance(spec)?;
        for &algorithm in &config.algorithms {
            let artifacts = run_solve(&built, algorithm, &config.solver, &out_dir)?;
            let s = &artifacts.summary;
            println!(
                "{} {}: fval={:.6} orth={:.2e} iter={} time={:.3}s termination={}",
                s.instance, s.algorithm, s.fval, s.orth, s.iter, s.time_sec, s.termination
            );
            println!("  trace:   {}", artifacts.trace_path.display());
            println!("  summary: {}", artifacts.summary_path.display());
            if let Some(b) = &artifacts.basis_path {
                println!("  basis:   {}", b.display());
            }
            let code = exit_code_for(artifacts.report.termination);
            if code != 0 {
                worst = ExitCode::from(code as u8);
            }
        }
    }
    Ok(worst)
}

fn cmd_bench(args: BenchArgs) -> Result<ExitCode, stiefel_smoothing::Error> {
    let mut config = load_config(&args.config)?;
    if let Some(spec) = args.instance.to_spec() {
        config.instances = vec![spec];
    }
    if !args.algo.is_empty() {
        config.algorithms = args.algo.clone();
    }
    args.overrides.merge_into(&mut config.solver);
    config.validate()?;

    let cells = run_bench(&config, args.parallel)?;
    let out_dir = config.output.clone().unwrap_or_else(|| args.out.clone());
    std::fs::create_dir_all(&out_dir)?;
    let csv_path = out_dir.join("bench.csv");
    std::fs::write(&csv_path, bench_csv(&cells))?;
    print!("{}", bench_table(&cells));
    println!("wrote {}", csv_path.display());
    let all_ok = cells.iter().all(|c| c.status == "ok");
    Ok(if all_ok {
        ExitCode::SUCCESS
    } else {
        ExitCode::from(2)
    })
}

fn cmd_check() -> ExitCode {
    let outcomes = run_check();
    let mut all_pass = true;
    for o in &outcomes {
        println!(
            "{:<28} {}  max residual {:.3e} (threshold {:.1e}, {} cases)",
            o.family,
            if o.passed { "PASS" } else { "FAIL" },
            o.max_residual,
            o.threshold,
            o.cases
        );
        all_pass &= o.passed;
    }
    if all_pass {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}

fn cmd_gen(args: GenArgs) -> Result<ExitCode, stiefel_smoothing::Error> {
    let family = GraphFamily::from_str(&args.graph)?;
    let n = args.n.unwrap_or_else(|| family.default_n());
    let graph = generate_graph(family, n, args.seed)?;
    write_edge_list(&graph, &args.out)?;
    println!(
        "wrote {} ({} vertices, {} directed edges, digest {})",
        args.out.display(),
        graph.vertex_count(),
        graph.edge_count(),
        graph.digest()
    );
    Ok(ExitCode::SUCCESS)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Solve(args) => cmd_solve(args),
        Command::Bench(args) => cmd_bench(args),
        Command::Check => Ok(cmd_check()),
        Command::Gen(args) => cmd_gen(args),
    };
    match result {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::FAILURE
        }
    }
}
