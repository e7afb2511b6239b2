//! Graph-Fourier-basis instances.
//!
//! A graph signal basis with the constant vector fixed as its first
//! element is recovered from the solution of a hinge-penalized problem
//! over the Stiefel manifold: with B̃ the signed incidence matrix and Ṽ an
//! orthonormal basis of the complement of the all-ones direction, minimize
//! Ψ(B̃ṼX) over (N−1)×(N−1) orthogonal X and read the basis off as
//! Z̃ = ṼX. This module builds those instances: incidence and complement
//! basis construction, Laplacian-eigenvector initialization, seeded graph
//! generators, and the edge-list / basis file formats.

use std::collections::HashMap;
use std::fmt;
use std::fs;
use std::path::Path;
use std::str::FromStr;

use nalgebra::SymmetricEigen;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::RealMatrix;
use crate::objective::{CompositeObjective, IncidenceMatrix, LinearMap};
use crate::smoothing::{WeightedHinge, ZeroSmooth};
use crate::solver::{Algorithm, SolverConfig};
use crate::stiefel::{random_stiefel, StiefelPoint};

/// One directed edge with a positive weight. Vertices are 0-based
/// internally; the edge-list file format is 1-based.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Edge {
    pub tail: usize,
    pub head: usize,
    pub weight: f64,
}

/// A weighted directed graph. Undirected graphs store every edge in both
/// orientations and are detected as such on construction.
#[derive(Debug, Clone)]
pub struct Graph {
    n: usize,
    edges: Vec<Edge>,
    undirected: bool,
}

impl Graph {
    pub fn from_directed_edges(n: usize, edges: Vec<Edge>) -> Result<Self> {
        if n < 2 {
            return Err(Error::InvalidGraph(format!(
                "need at least two vertices, got {n}"
            )));
        }
        if edges.is_empty() {
            return Err(Error::InvalidGraph("graph has no edges".into()));
        }
        let mut seen: HashMap<(usize, usize), f64> = HashMap::new();
        for e in &edges {
            if e.tail >= n || e.head >= n {
                return Err(Error::InvalidGraph(format!(
                    "edge ({}, {}) references a vertex outside 0..{n}",
                    e.tail, e.head
                )));
            }
            if e.tail == e.head {
                return Err(Error::InvalidGraph(format!(
                    "self-loop at vertex {}",
                    e.tail
                )));
            }
            if !(e.weight > 0.0 && e.weight.is_finite()) {
                return Err(Error::InvalidGraph(format!(
                    "edge ({}, {}) has nonpositive weight {}",
                    e.tail, e.head, e.weight
                )));
            }
            if seen.insert((e.tail, e.head), e.weight).is_some() {
                return Err(Error::InvalidGraph(format!(
                    "duplicate directed edge ({}, {})",
                    e.tail, e.head
                )));
            }
        }
        let undirected = edges.iter().all(|e| {
            seen.get(&(e.head, e.tail))
                .is_some_and(|w| w.to_bits() == e.weight.to_bits())
        });
        Ok(Self {
            n,
            edges,
            undirected,
        })
    }

    /// Builds an undirected graph: every pair (i, j, w) is stored as the
    /// two directed edges i→j and j→i.
    pub fn from_undirected_pairs(n: usize, pairs: &[(usize, usize, f64)]) -> Result<Self> {
        let mut edges = Vec::with_capacity(2 * pairs.len());
        for &(i, j, w) in pairs {
            edges.push(Edge {
                tail: i,
                head: j,
                weight: w,
            });
            edges.push(Edge {
                tail: j,
                head: i,
                weight: w,
            });
        }
        Self::from_directed_edges(n, edges)
    }

    pub fn vertex_count(&self) -> usize {
        self.n
    }

    /// Number of directed edge rows |E|.
    pub fn edge_count(&self) -> usize {
        self.edges.len()
    }

    pub fn edges(&self) -> &[Edge] {
        &self.edges
    }

    pub fn is_undirected(&self) -> bool {
        self.undirected
    }

    /// True iff the undirected support of the graph is connected.
    pub fn connected(&self) -> bool {
        let mut adjacency = vec![Vec::new(); self.n];
        for e in &self.edges {
            adjacency[e.tail].push(e.head);
            adjacency[e.head].push(e.tail);
        }
        let mut seen = vec![false; self.n];
        let mut stack = vec![0usize];
        seen[0] = true;
        let mut count = 1;
        while let Some(v) = stack.pop() {
            for &w in &adjacency[v] {
                if !seen[w] {
                    seen[w] = true;
                    count += 1;
                    stack.push(w);
                }
            }
        }
        count == self.n
    }

    /// Graph Laplacian D − W with D the diagonal of row sums of the
    /// adjacency matrix W.
    pub fn laplacian(&self) -> RealMatrix {
        let mut l = RealMatrix::zeros(self.n, self.n);
        for e in &self.edges {
            l[(e.tail, e.head)] -= e.weight;
            l[(e.tail, e.tail)] += e.weight;
        }
        l
    }

    /// Stable content digest used to identify generated instances in
    /// benchmark reports.
    pub fn digest(&self) -> String {
        use sha2::{Digest, Sha256};
        let mut hasher = Sha256::new();
        hasher.update(self.n.to_le_bytes());
        for e in &self.edges {
            hasher.update(e.tail.to_le_bytes());
            hasher.update(e.head.to_le_bytes());
            hasher.update(e.weight.to_bits().to_le_bytes());
        }
        let digest = hasher.finalize();
        digest[..8].iter().map(|b| format!("{b:02x}")).collect()
    }
}

/// Incidence matrix and per-row weights of a graph: row k of B̃ carries
/// +1 at the head and −1 at the tail of edge k; the weight stays with the
/// hinge, not with B̃.
pub fn build_incidence(g: &Graph) -> (IncidenceMatrix, Vec<f64>) {
    let rows = g.edges.iter().map(|e| (e.tail, e.head)).collect();
    let weights = g.edges.iter().map(|e| e.weight).collect();
    (IncidenceMatrix::new(g.n, rows), weights)
}

/// Orthonormal basis Ṽ (N×(N−1)) of the subspace orthogonal to the
/// all-ones direction: columns 2..N of the Householder reflector that
/// swaps e₁ with 𝟙/√N, each column sign-fixed so its first entry is
/// positive.
pub fn complement_basis(n: usize) -> RealMatrix {
    assert!(n >= 2, "complement basis needs at least two vertices");
    let nf = n as f64;
    let u = 1.0 / nf.sqrt();
    // v = 𝟙/√N − e₁, β = 2/‖v‖²
    let mut v = vec![u; n];
    v[0] -= 1.0;
    let norm_sq: f64 = v.iter().map(|x| x * x).sum();
    let beta = 2.0 / norm_sq;
    let mut basis = RealMatrix::zeros(n, n - 1);
    for col in 0..n - 1 {
        let j = col + 1; // column j of H = I − βvvᵀ, i.e. e_j − βv_j·v
        for i in 0..n {
            basis[(i, col)] = -beta * v[j] * v[i];
        }
        basis[(j, col)] += 1.0;
        if basis[(0, col)] < 0.0 {
            for i in 0..n {
                basis[(i, col)] = -basis[(i, col)];
            }
        }
    }
    basis
}

/// Second-smallest-eigenvalue threshold deciding connectivity.
const FIEDLER_TOL: f64 = 1e-10;

/// Initial point from the Laplacian eigenbasis: the orthonormal
/// eigenvectors of D − W other than the constant one, sorted by ascending
/// eigenvalue, sign-fixed (largest-magnitude entry positive, lowest index
/// on ties), re-orthogonalized against 𝟙 and among themselves, and pulled
/// back through Ṽ: X₀ = ṼᵀZ̃₀.
pub fn laplacian_init(g: &Graph, basis: &RealMatrix) -> Result<StiefelPoint> {
    if !g.is_undirected() {
        return Err(Error::DirectedGraph);
    }
    let n = g.vertex_count();
    assert_eq!(basis.nrows(), n, "basis does not match the graph");
    let eig = SymmetricEigen::new(g.laplacian());
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| eig.eigenvalues[a].total_cmp(&eig.eigenvalues[b]));
    if eig.eigenvalues[order[1]] < FIEDLER_TOL {
        return Err(Error::DisconnectedGraph {
            fiedler: eig.eigenvalues[order[1]],
        });
    }
    let mut z0 = RealMatrix::zeros(n, n - 1);
    for (col, &idx) in order[1..].iter().enumerate() {
        let v = eig.eigenvectors.column(idx);
        // sign convention: largest-magnitude entry positive, first wins ties
        let mut best = 0;
        for i in 1..n {
            if v[i].abs() > v[best].abs() {
                best = i;
            }
        }
        let sign = if v[best] < 0.0 { -1.0 } else { 1.0 };
        for i in 0..n {
            z0[(i, col)] = sign * v[i];
        }
        // kill the residual component along 𝟙
        let mean = z0.column(col).sum() / n as f64;
        for i in 0..n {
            z0[(i, col)] -= mean;
        }
    }
    // QR re-orthogonalization, with the Q column signs pinned by the
    // diagonal of R for determinism.
    let qr = z0.qr();
    let mut q = qr.q();
    let r = qr.r();
    for j in 0..n - 1 {
        if r[(j, j)] < 0.0 {
            for i in 0..n {
                q[(i, j)] = -q[(i, j)];
            }
        }
    }
    StiefelPoint::new(basis.transpose() * q)
}

/// How the starting point of an assembled problem is chosen.
#[derive(Debug, Clone, Copy)]
pub enum InitStrategy {
    /// Laplacian eigenbasis (undirected connected graphs only).
    LaplacianEigenbasis,
    /// Seeded random feasible point.
    Random { seed: u64 },
}

/// A fully wired GFB optimization instance.
pub struct GfbProblem {
    pub graph: Graph,
    pub weights: Vec<f64>,
    /// The complement basis Ṽ.
    pub basis: RealMatrix,
    pub x0: StiefelPoint,
    pub objective: CompositeObjective,
}

impl GfbProblem {
    /// Assembles the instance with the default initializer: the Laplacian
    /// eigenbasis for undirected graphs, a seed-0 random feasible point
    /// for directed ones.
    pub fn assemble(graph: Graph) -> Result<Self> {
        let init = if graph.is_undirected() {
            InitStrategy::LaplacianEigenbasis
        } else {
            InitStrategy::Random { seed: 0 }
        };
        Self::assemble_with_init(graph, init)
    }

    pub fn assemble_with_init(graph: Graph, init: InitStrategy) -> Result<Self> {
        let n = graph.vertex_count();
        let (incidence, weights) = build_incidence(&graph);
        let basis = complement_basis(n);
        let x0 = match init {
            InitStrategy::LaplacianEigenbasis => laplacian_init(&graph, &basis)?,
            InitStrategy::Random { seed } => random_stiefel(n - 1, n - 1, seed),
        };
        let hinge = WeightedHinge::new(weights.clone(), n - 1);
        let objective = CompositeObjective::new(
            Box::new(hinge),
            LinearMap::IncidenceComposed {
                incidence,
                basis: basis.clone(),
            },
            Box::new(ZeroSmooth::new(n - 1, n - 1)),
        );
        Ok(Self {
            graph,
            weights,
            basis,
            x0,
            objective,
        })
    }

    /// α = 10⁻⁵·|E|, the protocol default for the μ-update coefficient.
    pub fn default_alpha(&self) -> f64 {
        1e-5 * self.graph.edge_count() as f64
    }

    /// Protocol solver configuration for this instance.
    pub fn solver_config(&self, algorithm: Algorithm) -> SolverConfig {
        let p = self.graph.vertex_count() - 1;
        SolverConfig::table_defaults(algorithm, p, self.graph.edge_count())
    }

    /// Recovers the Fourier basis Z̃ = ṼX from a solution X.
    pub fn recover_basis(&self, x: &StiefelPoint) -> RealMatrix {
        &self.basis * x.matrix()
    }
}

/// Built-in seeded graph generators. The deterministic families carry
/// unit weights; the random families draw weights or positions from the
/// seed. Topologies are lookalikes of the usual test graphs, not
/// replications of any particular toolbox output.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum GraphFamily {
    Path,
    Tree4,
    Comet,
    RingRandomWeights,
    RandomGeometric,
    Community,
}

impl GraphFamily {
    pub const ALL: [GraphFamily; 6] = [
        GraphFamily::Path,
        GraphFamily::Tree4,
        GraphFamily::Comet,
        GraphFamily::RingRandomWeights,
        GraphFamily::RandomGeometric,
        GraphFamily::Community,
    ];

    pub fn name(&self) -> &'static str {
        match self {
            GraphFamily::Path => "path",
            GraphFamily::Tree4 => "tree4",
            GraphFamily::Comet => "comet",
            GraphFamily::RingRandomWeights => "ring",
            GraphFamily::RandomGeometric => "geometric",
            GraphFamily::Community => "community",
        }
    }

    /// Vertex count used when none is requested.
    pub fn default_n(&self) -> usize {
        match self {
            GraphFamily::Path => 8,
            GraphFamily::Tree4 => 4,
            GraphFamily::Comet => 12,
            GraphFamily::RingRandomWeights => 16,
            GraphFamily::RandomGeometric => 30,
            GraphFamily::Community => 22,
        }
    }
}

impl fmt::Display for GraphFamily {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for GraphFamily {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "path" => Ok(GraphFamily::Path),
            "tree4" | "low_stretch_tree" => Ok(GraphFamily::Tree4),
            "comet" => Ok(GraphFamily::Comet),
            "ring" | "ring_random_weights" | "random_ring" => Ok(GraphFamily::RingRandomWeights),
            "geometric" | "random_geometric" => Ok(GraphFamily::RandomGeometric),
            "community" => Ok(GraphFamily::Community),
            other => Err(Error::InvalidInstance(format!(
                "unknown graph family `{other}`"
            ))),
        }
    }
}

const GENERATION_ATTEMPTS: usize = 20;

/// Deterministic per (family, n, seed). Random families resample up to 20
/// times when a draw comes out disconnected.
pub fn generate_graph(family: GraphFamily, n: usize, seed: u64) -> Result<Graph> {
    match family {
        GraphFamily::Path => {
            require(n >= 2, "path needs n >= 2")?;
            let pairs: Vec<_> = (0..n - 1).map(|v| (v, v + 1, 1.0)).collect();
            Graph::from_undirected_pairs(n, &pairs)
        }
        GraphFamily::Tree4 => {
            require(n == 4, "tree4 is the path on exactly 4 vertices")?;
            generate_graph(GraphFamily::Path, 4, seed)
        }
        GraphFamily::Comet => {
            require(n >= 4, "comet needs n >= 4")?;
            let spokes = n / 2;
            let mut pairs: Vec<_> = (1..=spokes).map(|v| (0, v, 1.0)).collect();
            let mut prev = 0;
            for v in spokes + 1..n {
                pairs.push((prev, v, 1.0));
                prev = v;
            }
            Graph::from_undirected_pairs(n, &pairs)
        }
        GraphFamily::RingRandomWeights => {
            require(n >= 3, "ring needs n >= 3")?;
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let pairs: Vec<_> = (0..n)
                .map(|v| (v, (v + 1) % n, rng.random_range(0.5..1.5)))
                .collect();
            Graph::from_undirected_pairs(n, &pairs)
        }
        GraphFamily::RandomGeometric => {
            require(n >= 2, "geometric needs n >= 2")?;
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let radius = (2.0 * (n as f64).ln().max(1.0) / n as f64).sqrt();
            let kernel_width = radius / 2.0;
            for _ in 0..GENERATION_ATTEMPTS {
                let points: Vec<(f64, f64)> = (0..n)
                    .map(|_| (rng.random::<f64>(), rng.random::<f64>()))
                    .collect();
                let mut pairs = Vec::new();
                for i in 0..n {
                    for j in i + 1..n {
                        let dx = points[i].0 - points[j].0;
                        let dy = points[i].1 - points[j].1;
                        let d2 = dx * dx + dy * dy;
                        if d2.sqrt() <= radius {
                            let w = (-d2 / (2.0 * kernel_width * kernel_width)).exp();
                            pairs.push((i, j, w));
                        }
                    }
                }
                if pairs.is_empty() {
                    continue;
                }
                let g = Graph::from_undirected_pairs(n, &pairs)?;
                if g.connected() {
                    return Ok(g);
                }
            }
            Err(Error::GenerationFailed {
                attempts: GENERATION_ATTEMPTS,
            })
        }
        GraphFamily::Community => {
            require(n >= 6, "community needs n >= 6")?;
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let block = |v: usize| 3 * v / n; // three near-equal communities
            for _ in 0..GENERATION_ATTEMPTS {
                let mut pairs = Vec::new();
                for i in 0..n {
                    for j in i + 1..n {
                        let p = if block(i) == block(j) { 0.9 } else { 0.1 };
                        if rng.random::<f64>() < p {
                            pairs.push((i, j, 1.0));
                        }
                    }
                }
                if pairs.is_empty() {
                    continue;
                }
                let g = Graph::from_undirected_pairs(n, &pairs)?;
                if g.connected() {
                    return Ok(g);
                }
            }
            Err(Error::GenerationFailed {
                attempts: GENERATION_ATTEMPTS,
            })
        }
    }
}

fn require(ok: bool, message: &str) -> Result<()> {
    if ok {
        Ok(())
    } else {
        Err(Error::InvalidInstance(message.into()))
    }
}

/// Reads the edge-list format: first meaningful line is the vertex count
/// N, every following line one directed edge `i j w` with 1-based vertex
/// ids; `#` starts a comment; undirected graphs list both orientations.
pub fn read_edge_list(path: impl AsRef<Path>) -> Result<Graph> {
    let path = path.as_ref();
    let text = fs::read_to_string(path)?;
    let name = path.display().to_string();
    let fail = |line: usize, message: String| Error::EdgeListFormat {
        path: name.clone(),
        line,
        message,
    };

    let mut n: Option<usize> = None;
    let mut edges: Vec<Edge> = Vec::new();
    for (idx, raw) in text.lines().enumerate() {
        let line_no = idx + 1;
        let content = raw.split('#').next().unwrap_or("").trim();
        if content.is_empty() {
            continue;
        }
        match n {
            None => {
                let count: usize = content
                    .parse()
                    .map_err(|_| fail(line_no, format!("expected vertex count, got `{content}`")))?;
                if count < 2 {
                    return Err(fail(line_no, format!("need at least 2 vertices, got {count}")));
                }
                n = Some(count);
            }
            Some(count) => {
                let fields: Vec<&str> = content.split_whitespace().collect();
                if fields.len() != 3 {
                    return Err(fail(
                        line_no,
                        format!("expected `i j w`, got {} fields", fields.len()),
                    ));
                }
                let i: usize = fields[0]
                    .parse()
                    .map_err(|_| fail(line_no, format!("bad vertex id `{}`", fields[0])))?;
                let j: usize = fields[1]
                    .parse()
                    .map_err(|_| fail(line_no, format!("bad vertex id `{}`", fields[1])))?;
                let w: f64 = fields[2]
                    .parse()
                    .map_err(|_| fail(line_no, format!("bad weight `{}`", fields[2])))?;
                if i < 1 || i > count || j < 1 || j > count {
                    return Err(fail(
                        line_no,
                        format!("vertex ids must lie in 1..={count}"),
                    ));
                }
                if i == j {
                    return Err(fail(line_no, format!("self-loop at vertex {i}")));
                }
                if !(w > 0.0 && w.is_finite()) {
                    return Err(fail(line_no, format!("nonpositive weight {w}")));
                }
                if edges.iter().any(|e| e.tail == i - 1 && e.head == j - 1) {
                    return Err(fail(line_no, format!("duplicate directed edge {i} {j}")));
                }
                edges.push(Edge {
                    tail: i - 1,
                    head: j - 1,
                    weight: w,
                });
            }
        }
    }
    let n = n.ok_or_else(|| fail(1, "file contains no vertex count".into()))?;
    if edges.is_empty() {
        return Err(fail(1, "file contains no edges".into()));
    }
    Graph::from_directed_edges(n, edges)
}

/// Writes a graph in the edge-list format read by [`read_edge_list`].
pub fn write_edge_list(g: &Graph, path: impl AsRef<Path>) -> Result<()> {
    let mut out = String::new();
    out.push_str(&format!("{}\n", g.vertex_count()));
    for e in g.edges() {
        out.push_str(&format!("{} {} {}\n", e.tail + 1, e.head + 1, e.weight));
    }
    fs::write(path, out)?;
    Ok(())
}

/// Writes a recovered basis as CSV, N rows × (N−1) columns, 17
/// significant digits per entry.
pub fn write_basis_csv(z: &RealMatrix, path: impl AsRef<Path>) -> Result<()> {
    let mut out = String::new();
    for i in 0..z.nrows() {
        let row: Vec<String> = (0..z.ncols()).map(|j| format!("{:.16e}", z[(i, j)])).collect();
        out.push_str(&row.join(","));
        out.push('\n');
    }
    fs::write(path, out)?;
    Ok(())
}

/// Reads a matrix written by [`write_basis_csv`].
pub fn read_basis_csv(path: impl AsRef<Path>) -> Result<RealMatrix> {
    let text = fs::read_to_string(path.as_ref())?;
    let name = path.as_ref().display().to_string();
    let mut rows: Vec<Vec<f64>> = Vec::new();
    for (idx, line) in text.lines().enumerate() {
        if line.trim().is_empty() {
            continue;
        }
        let row: std::result::Result<Vec<f64>, _> =
            line.split(',').map(|f| f.trim().parse::<f64>()).collect();
        let row = row.map_err(|_| Error::EdgeListFormat {
            path: name.clone(),
            line: idx + 1,
            message: "bad numeric field".into(),
        })?;
        if let Some(first) = rows.first() {
            if row.len() != first.len() {
                return Err(Error::EdgeListFormat {
                    path: name.clone(),
                    line: idx + 1,
                    message: "ragged row".into(),
                });
            }
        }
        rows.push(row);
    }
    if rows.is_empty() {
        return Err(Error::EdgeListFormat {
            path: name,
            line: 1,
            message: "empty file".into(),
        });
    }
    let ncols = rows[0].len();
    Ok(RealMatrix::from_fn(rows.len(), ncols, |i, j| rows[i][j]))
}
