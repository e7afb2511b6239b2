//! Experiment driver behind the command-line interface: instance
//! construction from a declarative spec, single solves with trace and
//! summary artifacts, benchmark suites with optional parallel dispatch,
//! and the self-check report.

use std::fs;
use std::path::{Path, PathBuf};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::diagnostics::{run_all_checks, CheckOutcome};
use crate::error::{Error, Result};
use crate::gfb::{
    generate_graph, read_basis_csv, read_edge_list, write_basis_csv, GfbProblem, GraphFamily,
};
use crate::objective::{CompositeObjective, LinearMap};
use crate::smoothing::{L1Norm, NegativeVariance};
use crate::solver::{solve, Algorithm, RunReport, SolverConfig, TerminationReason};
use crate::stiefel::{random_stiefel, StiefelPoint};

/// Declarative instance selector, the `[[instances]]` entries of a config
/// file.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum InstanceSpec {
    /// A generated graph.
    Family {
        family: GraphFamily,
        #[serde(default)]
        n: Option<usize>,
        #[serde(default)]
        seed: u64,
    },
    /// A graph read from an edge-list file.
    EdgeList { path: PathBuf },
    /// Sparse PCA: f = λ‖·‖₁ on X itself, h the negative explained
    /// variance of a data matrix read from CSV.
    SparsePca {
        data: PathBuf,
        lambda: f64,
        components: usize,
        #[serde(default)]
        seed: u64,
    },
}

impl InstanceSpec {
    /// Re-seeds the random content for benchmark repetitions.
    pub fn with_seed_offset(&self, offset: u64) -> Self {
        let mut spec = self.clone();
        match &mut spec {
            InstanceSpec::Family { seed, .. } => *seed += offset,
            InstanceSpec::SparsePca { seed, .. } => *seed += offset,
            InstanceSpec::EdgeList { .. } => {}
        }
        spec
    }

    pub fn seed(&self) -> u64 {
        match self {
            InstanceSpec::Family { seed, .. } => *seed,
            InstanceSpec::SparsePca { seed, .. } => *seed,
            InstanceSpec::EdgeList { .. } => 0,
        }
    }
}

/// A fully built instance ready to solve.
pub struct BuiltInstance {
    pub label: String,
    /// Content digest identifying the concrete random draw.
    pub digest: String,
    pub seed: u64,
    kind: BuiltKind,
}

enum BuiltKind {
    Gfb(GfbProblem),
    Plain {
        objective: CompositeObjective,
        x0: StiefelPoint,
        alpha: f64,
    },
}

impl BuiltInstance {
    pub fn objective(&self) -> &CompositeObjective {
        match &self.kind {
            BuiltKind::Gfb(p) => &p.objective,
            BuiltKind::Plain { objective, .. } => objective,
        }
    }

    pub fn x0(&self) -> &StiefelPoint {
        match &self.kind {
            BuiltKind::Gfb(p) => &p.x0,
            BuiltKind::Plain { x0, .. } => x0,
        }
    }

    pub fn gfb(&self) -> Option<&GfbProblem> {
        match &self.kind {
            BuiltKind::Gfb(p) => Some(p),
            BuiltKind::Plain { .. } => None,
        }
    }

    /// Protocol defaults sized for this instance.
    pub fn default_config(&self, algorithm: Algorithm) -> SolverConfig {
        let (_, p) = self.objective().dims();
        let (q, _) = self.objective().f().shape();
        let mut cfg = SolverConfig::table_defaults(algorithm, p, q);
        cfg.seed = self.seed;
        match &self.kind {
            BuiltKind::Gfb(problem) => cfg.alpha = problem.default_alpha(),
            BuiltKind::Plain { alpha, .. } => cfg.alpha = *alpha,
        }
        cfg
    }
}

/// Builds the concrete problem an [`InstanceSpec`] describes.
pub fn build_instance(spec: &InstanceSpec) -> Result<BuiltInstance> {
    match spec {
        InstanceSpec::Family { family, n, seed } => {
            let n = n.unwrap_or_else(|| family.default_n());
            let graph = generate_graph(*family, n, *seed)?;
            let digest = graph.digest();
            let problem = GfbProblem::assemble(graph)?;
            Ok(BuiltInstance {
                label: format!("{}-n{}-s{}", family.name(), n, seed),
                digest,
                seed: *seed,
                kind: BuiltKind::Gfb(problem),
            })
        }
        InstanceSpec::EdgeList { path } => {
            let graph = read_edge_list(path)?;
            let digest = graph.digest();
            let problem = GfbProblem::assemble(graph)?;
            let label = path
                .file_stem()
                .map(|s| s.to_string_lossy().into_owned())
                .unwrap_or_else(|| "edge-list".into());
            Ok(BuiltInstance {
                label,
                digest,
                seed: 0,
                kind: BuiltKind::Gfb(problem),
            })
        }
        InstanceSpec::SparsePca {
            data,
            lambda,
            components,
            seed,
        } => {
            if *lambda <= 0.0 {
                return Err(Error::InvalidConfig {
                    field: "lambda",
                    message: "must be positive".into(),
                });
            }
            let a = read_basis_csv(data)?;
            let n = a.ncols();
            let p = *components;
            if p < 1 || p > n {
                return Err(Error::InvalidConfig {
                    field: "components",
                    message: format!("must lie in 1..={n}"),
                });
            }
            let objective = CompositeObjective::new(
                Box::new(L1Norm::new(*lambda, n, p)),
                LinearMap::Identity(n),
                Box::new(NegativeVariance::from_data(&a, p)),
            );
            let x0 = random_stiefel(n, p, *seed);
            Ok(BuiltInstance {
                label: format!("sparse-pca-n{n}-p{p}-s{seed}"),
                digest: format!("{n}x{p}"),
                seed: *seed,
                kind: BuiltKind::Plain {
                    objective,
                    x0,
                    alpha: 1e-5 * n as f64,
                },
            })
        }
    }
}

/// Optional per-field solver overrides, applied over the protocol
/// defaults.
#[derive(Debug, Clone, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SolverOverrides {
    pub mu0: Option<f64>,
    pub sigma: Option<f64>,
    pub alpha: Option<f64>,
    pub kappa: Option<f64>,
    pub epsilon: Option<f64>,
    pub c: Option<f64>,
    pub eta: Option<f64>,
    pub gamma: Option<f64>,
    pub tol1: Option<f64>,
    pub tol2: Option<f64>,
    pub max_iter: Option<usize>,
    pub max_linesearch: Option<usize>,
    pub adaptive_init_step: Option<bool>,
}

impl SolverOverrides {
    pub fn apply(&self, cfg: &mut SolverConfig) {
        if let Some(v) = self.mu0 {
            cfg.mu0 = v;
        }
        if let Some(v) = self.sigma {
            cfg.sigma = v;
        }
        if let Some(v) = self.alpha {
            cfg.alpha = v;
        }
        if let Some(v) = self.kappa {
            cfg.kappa_override = Some(v);
        }
        if let Some(v) = self.epsilon {
            cfg.epsilon = v;
        }
        if let Some(v) = self.c {
            cfg.c = v;
        }
        if let Some(v) = self.eta {
            cfg.eta = v;
        }
        if let Some(v) = self.gamma {
            cfg.gamma = v;
        }
        if let Some(v) = self.tol1 {
            cfg.tol1 = v;
        }
        if let Some(v) = self.tol2 {
            cfg.tol2 = v;
        }
        if let Some(v) = self.max_iter {
            cfg.max_iter = v;
        }
        if let Some(v) = self.max_linesearch {
            cfg.max_linesearch = v;
        }
        if let Some(v) = self.adaptive_init_step {
            cfg.adaptive_init_step = v;
        }
    }
}

/// One experiment: instances × algorithms × repetitions, solver
/// overrides, output directory. Mirrors the TOML config file; command
/// line flags override file values.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ExperimentConfig {
    #[serde(default)]
    pub instances: Vec<InstanceSpec>,
    #[serde(default = "default_algorithms")]
    pub algorithms: Vec<Algorithm>,
    #[serde(default = "default_repetitions")]
    pub repetitions: usize,
    #[serde(default)]
    pub solver: SolverOverrides,
    #[serde(default)]
    pub output: Option<PathBuf>,
}

fn default_algorithms() -> Vec<Algorithm> {
    vec![Algorithm::Sgpc]
}

fn default_repetitions() -> usize {
    1
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        Self {
            instances: Vec::new(),
            algorithms: default_algorithms(),
            repetitions: default_repetitions(),
            solver: SolverOverrides::default(),
            output: None,
        }
    }
}

impl ExperimentConfig {
    pub fn from_toml_path(path: impl AsRef<Path>) -> Result<Self> {
        let text = fs::read_to_string(path.as_ref())?;
        toml::from_str(&text).map_err(|e| Error::InvalidConfig {
            field: "config",
            message: e.to_string(),
        })
    }

    pub fn validate(&self) -> Result<()> {
        if self.instances.is_empty() {
            return Err(Error::InvalidConfig {
                field: "instances",
                message: "at least one instance is required".into(),
            });
        }
        if self.algorithms.is_empty() {
            return Err(Error::InvalidConfig {
                field: "algorithms",
                message: "at least one algorithm is required".into(),
            });
        }
        if self.repetitions < 1 {
            return Err(Error::InvalidConfig {
                field: "repetitions",
                message: "must be at least 1".into(),
            });
        }
        Ok(())
    }
}

/// The summary JSON written next to each trace. Keys are part of the
/// output contract.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct Summary {
    pub time_sec: f64,
    pub fval: f64,
    pub orth: f64,
    pub iter: usize,
    pub algorithm: String,
    pub instance: String,
    pub seed: u64,
    pub termination: String,
}

impl Summary {
    pub fn new(instance: &BuiltInstance, algorithm: Algorithm, report: &RunReport) -> Self {
        Self {
            time_sec: report.wall_time.as_secs_f64(),
            fval: report.fval,
            orth: report.orth,
            iter: report.iterations,
            algorithm: algorithm.name().to_string(),
            instance: instance.label.clone(),
            seed: instance.seed,
            termination: report.termination.name().to_string(),
        }
    }
}

/// Per-iteration trace CSV: one row per outer iteration.
pub fn write_trace_csv(report: &RunReport, path: impl AsRef<Path>) -> Result<()> {
    let mut out = String::from("k,mu,tau,f_smooth,f_true,orth,stat_normal,stat_skew,ls_count\n");
    for r in &report.trace {
        out.push_str(&format!(
            "{},{},{},{},{},{},{},{},{}\n",
            r.k,
            r.mu,
            r.tau,
            r.smoothed_value,
            r.true_value,
            r.orth_residual,
            r.normal_residual,
            r.skew_residual,
            r.linesearch_count
        ));
    }
    fs::write(path, out)?;
    Ok(())
}

/// Artifacts of one solve.
pub struct SolveArtifacts {
    pub summary: Summary,
    pub report: RunReport,
    pub trace_path: PathBuf,
    pub summary_path: PathBuf,
    pub basis_path: Option<PathBuf>,
}

/// Runs one algorithm on one instance and writes the trace CSV, the
/// summary JSON, and (for graph instances) the recovered basis CSV.
pub fn run_solve(
    instance: &BuiltInstance,
    algorithm: Algorithm,
    overrides: &SolverOverrides,
    out_dir: impl AsRef<Path>,
) -> Result<SolveArtifacts> {
    let out_dir = out_dir.as_ref();
    fs::create_dir_all(out_dir)?;
    let mut cfg = instance.default_config(algorithm);
    overrides.apply(&mut cfg);
    cfg.validate()?;

    let report = solve(instance.objective(), instance.x0(), &cfg)?;
    let summary = Summary::new(instance, algorithm, &report);

    let stem = format!("{}_{}", instance.label, algorithm.name());
    let trace_path = out_dir.join(format!("{stem}_trace.csv"));
    write_trace_csv(&report, &trace_path)?;
    let summary_path = out_dir.join(format!("{stem}_summary.json"));
    fs::write(
        &summary_path,
        serde_json::to_string_pretty(&summary).expect("summary serializes") + "\n",
    )?;
    let basis_path = if let Some(problem) = instance.gfb() {
        let z = problem.recover_basis(&report.final_point);
        let p = out_dir.join(format!("{stem}_basis.csv"));
        write_basis_csv(&z, &p)?;
        Some(p)
    } else {
        None
    };

    Ok(SolveArtifacts {
        summary,
        report,
        trace_path,
        summary_path,
        basis_path,
    })
}

/// One cell of a benchmark table: an (instance, repetition, algorithm)
/// triple. Failures are recorded in `status`; the suite keeps going.
#[derive(Debug, Clone, Serialize)]
pub struct BenchCell {
    pub instance: String,
    pub algorithm: String,
    pub seed: u64,
    pub rep: usize,
    pub digest: String,
    pub status: String,
    pub time_sec: f64,
    pub fval: f64,
    pub orth: f64,
    pub iter: usize,
    pub termination: String,
}

fn bench_one(
    spec: &InstanceSpec,
    rep: usize,
    algorithm: Algorithm,
    overrides: &SolverOverrides,
) -> BenchCell {
    let spec = spec.with_seed_offset(rep as u64);
    let built = match build_instance(&spec) {
        Ok(b) => b,
        Err(e) => {
            return BenchCell {
                instance: format!("{spec:?}"),
                algorithm: algorithm.name().into(),
                seed: spec.seed(),
                rep,
                digest: String::new(),
                status: format!("build error: {e}"),
                time_sec: 0.0,
                fval: f64::NAN,
                orth: f64::NAN,
                iter: 0,
                termination: "error".into(),
            }
        }
    };
    let mut cfg = built.default_config(algorithm);
    overrides.apply(&mut cfg);
    if let Err(e) = cfg.validate() {
        return BenchCell {
            instance: built.label,
            algorithm: algorithm.name().into(),
            seed: built.seed,
            rep,
            digest: built.digest,
            status: format!("config error: {e}"),
            time_sec: 0.0,
            fval: f64::NAN,
            orth: f64::NAN,
            iter: 0,
            termination: "error".into(),
        };
    }
    match solve(built.objective(), built.x0(), &cfg) {
        Ok(report) => BenchCell {
            instance: built.label,
            algorithm: algorithm.name().into(),
            seed: built.seed,
            rep,
            digest: built.digest,
            status: "ok".into(),
            time_sec: report.wall_time.as_secs_f64(),
            fval: report.fval,
            orth: report.orth,
            iter: report.iterations,
            termination: report.termination.name().into(),
        },
        Err(e) => BenchCell {
            instance: built.label,
            algorithm: algorithm.name().into(),
            seed: built.seed,
            rep,
            digest: built.digest,
            status: format!("solve error: {e}"),
            time_sec: 0.0,
            fval: f64::NAN,
            orth: f64::NAN,
            iter: 0,
            termination: "error".into(),
        },
    }
}

/// Runs the full instances × repetitions × algorithms grid. Cells are
/// independent; with `parallel` they are dispatched to a worker pool, and
/// the result order (and content) is identical either way.
pub fn run_bench(config: &ExperimentConfig, parallel: bool) -> Result<Vec<BenchCell>> {
    config.validate()?;
    let tasks: Vec<(usize, usize, Algorithm)> = config
        .instances
        .iter()
        .enumerate()
        .flat_map(|(i, _)| {
            let algorithms = &config.algorithms;
            (0..config.repetitions).flat_map(move |rep| {
                algorithms.iter().map(move |&algo| (i, rep, algo))
            })
        })
        .collect();
    let run = |&(i, rep, algo): &(usize, usize, Algorithm)| {
        bench_one(&config.instances[i], rep, algo, &config.solver)
    };
    let cells: Vec<BenchCell> = if parallel {
        tasks.par_iter().map(run).collect()
    } else {
        tasks.iter().map(run).collect()
    };
    Ok(cells)
}

/// Benchmark CSV, one row per cell.
pub fn bench_csv(cells: &[BenchCell]) -> String {
    let mut out =
        String::from("instance,algorithm,seed,rep,digest,status,time_sec,fval,orth,iter,termination\n");
    for c in cells {
        out.push_str(&format!(
            "{},{},{},{},{},{},{},{},{},{},{}\n",
            c.instance,
            c.algorithm,
            c.seed,
            c.rep,
            c.digest,
            c.status.replace(',', ";"),
            c.time_sec,
            c.fval,
            c.orth,
            c.iter,
            c.termination
        ));
    }
    out
}

/// Aligned text table with the report columns Time / Fval / Orth / Iter.
pub fn bench_table(cells: &[BenchCell]) -> String {
    let mut rows: Vec<[String; 6]> = vec![[
        "Instance".into(),
        "Algorithm".into(),
        "Time".into(),
        "Fval".into(),
        "Orth".into(),
        "Iter".into(),
    ]];
    for c in cells {
        if c.status == "ok" {
            rows.push([
                c.instance.clone(),
                c.algorithm.clone(),
                format!("{:.3}", c.time_sec),
                format!("{:.3}", c.fval),
                format!("{:.2e}", c.orth),
                format!("{}", c.iter),
            ]);
        } else {
            rows.push([
                c.instance.clone(),
                c.algorithm.clone(),
                "-".into(),
                "-".into(),
                "-".into(),
                c.status.clone(),
            ]);
        }
    }
    let mut widths = [0usize; 6];
    for row in &rows {
        for (i, cell) in row.iter().enumerate() {
            widths[i] = widths[i].max(cell.len());
        }
    }
    let mut out = String::new();
    for row in &rows {
        let line: Vec<String> = row
            .iter()
            .enumerate()
            .map(|(i, cell)| format!("{:<width$}", cell, width = widths[i]))
            .collect();
        out.push_str(line.join("  ").trim_end());
        out.push('\n');
    }
    out
}

/// Runs every oracle family and returns the outcomes; the binary turns
/// this into its exit code.
pub fn run_check() -> Vec<CheckOutcome> {
    run_all_checks()
}

/// Exit code contract of the `solve` subcommand.
pub fn exit_code_for(termination: TerminationReason) -> i32 {
    match termination {
        TerminationReason::Tolerance => 0,
        TerminationReason::MaxIterations => 2,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn config_roundtrip_through_toml() {
        let text = r#"
            algorithms = ["sgpc", "srgd"]
            repetitions = 2

            [[instances]]
            kind = "family"
            family = "path"
            n = 8
            seed = 1

            [solver]
            max_iter = 50
        "#;
        let cfg: ExperimentConfig = toml::from_str(text).unwrap();
        assert_eq!(cfg.instances.len(), 1);
        assert_eq!(cfg.algorithms, vec![Algorithm::Sgpc, Algorithm::Srgd]);
        assert_eq!(cfg.repetitions, 2);
        assert_eq!(cfg.solver.max_iter, Some(50));
        cfg.validate().unwrap();
    }

    #[test]
    fn sigma_out_of_range_is_named_in_the_error() {
        let spec = InstanceSpec::Family {
            family: GraphFamily::Tree4,
            n: Some(4),
            seed: 0,
        };
        let built = build_instance(&spec).unwrap();
        let mut cfg = built.default_config(Algorithm::Sgpc);
        cfg.sigma = 1.5;
        let err = cfg.validate().unwrap_err();
        assert!(err.to_string().contains("sigma"), "got: {err}");
    }

    #[test]
    fn bench_grid_is_a_cross_product() {
        let cfg = ExperimentConfig {
            instances: vec![
                InstanceSpec::Family {
                    family: GraphFamily::Path,
                    n: Some(4),
                    seed: 0,
                },
                InstanceSpec::Family {
                    family: GraphFamily::Tree4,
                    n: Some(4),
                    seed: 0,
                },
            ],
            algorithms: vec![Algorithm::Sgpc, Algorithm::Sgrc, Algorithm::Srgd],
            repetitions: 1,
            solver: SolverOverrides {
                max_iter: Some(60),
                ..Default::default()
            },
            output: None,
        };
        let cells = run_bench(&cfg, false).unwrap();
        assert_eq!(cells.len(), 6);
    }

    #[test]
    fn repetitions_draw_distinct_instances() {
        let cfg = ExperimentConfig {
            instances: vec![InstanceSpec::Family {
                family: GraphFamily::RingRandomWeights,
                n: Some(8),
                seed: 10,
            }],
            algorithms: vec![Algorithm::Sgpc],
            repetitions: 3,
            solver: SolverOverrides {
                max_iter: Some(30),
                ..Default::default()
            },
            output: None,
        };
        let cells = run_bench(&cfg, false).unwrap();
        assert_eq!(cells.len(), 3);
        assert_ne!(cells[0].digest, cells[1].digest);
        assert_ne!(cells[1].digest, cells[2].digest);
        assert_eq!(cells[0].seed, 10);
        assert_eq!(cells[1].seed, 11);
    }

    #[test]
    fn summary_has_the_exact_key_set() {
        let spec = InstanceSpec::Family {
            family: GraphFamily::Tree4,
            n: None,
            seed: 0,
        };
        let built = build_instance(&spec).unwrap();
        let mut cfg = built.default_config(Algorithm::Sgpc);
        cfg.max_iter = 40;
        let report = solve(built.objective(), built.x0(), &cfg).unwrap();
        let summary = Summary::new(&built, Algorithm::Sgpc, &report);
        let json = serde_json::to_value(&summary).unwrap();
        let obj = json.as_object().unwrap();
        let mut keys: Vec<_> = obj.keys().map(|s| s.as_str()).collect();
        keys.sort_unstable();
        assert_eq!(
            keys,
            vec![
                "algorithm",
                "fval",
                "instance",
                "iter",
                "orth",
                "seed",
                "termination",
                "time_sec"
            ]
        );
    }
}
