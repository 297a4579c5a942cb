//! Areal adjacency graphs, the CAR structure matrix and its spectral basis.
//!
//! Eigenpairs are ordered by descending eigenvalue, so index 0 is the most
//! local scale and the last index (eigenvalue 0 on a connected graph) is the
//! most global one.

use std::collections::BTreeSet;
use std::f64::consts::PI;
use std::path::{Path, PathBuf};

use nalgebra::{DMatrix, DVector, SymmetricEigen};
use serde::{Deserialize, Serialize};

use crate::error::{MsmError, Result};

/// How to construct a graph.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum GraphSpec {
    /// Rook (4-neighbour) adjacency on a `rows x cols` lattice, row-major.
    Grid { rows: usize, cols: usize },
    /// Cycle on `n` nodes.
    Ring { n: usize },
    /// Comma-separated 0-based pairs, one per line, `#` comments allowed.
    EdgeList { path: PathBuf, n_nodes: Option<usize> },
}

/// Undirected graph without self-loops. Edges are stored as `(min, max)`.
#[derive(Debug, Clone, PartialEq)]
pub struct AdjacencyGraph {
    n_nodes: usize,
    edges: BTreeSet<(usize, usize)>,
}

impl AdjacencyGraph {
    pub fn new(n_nodes: usize, edges: impl IntoIterator<Item = (usize, usize)>) -> Result<Self> {
        if n_nodes == 0 {
            return Err(MsmError::Graph("graph must have at least one node".into()));
        }
        let mut set = BTreeSet::new();
        for (a, b) in edges {
            if a == b {
                return Err(MsmError::Graph(format!("self-loop on node {a}")));
            }
            if a >= n_nodes || b >= n_nodes {
                return Err(MsmError::Graph(format!(
                    "edge ({a},{b}) references a node outside 0..{n_nodes}"
                )));
            }
            set.insert((a.min(b), a.max(b)));
        }
        Ok(Self {
            n_nodes,
            edges: set,
        })
    }

    pub fn grid(rows: usize, cols: usize) -> Result<Self> {
        if rows == 0 || cols == 0 || rows * cols < 2 {
            return Err(MsmError::Graph(format!(
                "grid {rows}x{cols} needs at least two cells"
            )));
        }
        let idx = |r: usize, c: usize| r * cols + c;
        let mut edges = Vec::with_capacity(2 * rows * cols);
        for r in 0..rows {
            for c in 0..cols {
                if c + 1 < cols {
                    edges.push((idx(r, c), idx(r, c + 1)));
                }
                if r + 1 < rows {
                    edges.push((idx(r, c), idx(r + 1, c)));
                }
            }
        }
        Self::new(rows * cols, edges)
    }

    pub fn ring(n: usize) -> Result<Self> {
        if n < 3 {
            return Err(MsmError::Graph(format!("ring needs at least 3 nodes, got {n}")));
        }
        Self::new(n, (0..n).map(|i| (i, (i + 1) % n)))
    }

    /// Parses the edge-list text format. `n_nodes` defaults to the largest
    /// index seen plus one.
    pub fn parse_edge_list(text: &str, source: &str, n_nodes: Option<usize>) -> Result<Self> {
        let mut edges = Vec::new();
        let mut max_idx = 0usize;
        for (lineno, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let parse_err = |message: String| MsmError::Parse {
                path: source.to_string(),
                line: lineno + 1,
                message,
            };
            let fields: Vec<&str> = line.split(',').map(str::trim).collect();
            if fields.len() != 2 {
                return Err(parse_err(format!(
                    "expected two comma-separated indices, found {} field(s)",
                    fields.len()
                )));
            }
            let a: usize = fields[0]
                .parse()
                .map_err(|_| parse_err(format!("invalid node index '{}'", fields[0])))?;
            let b: usize = fields[1]
                .parse()
                .map_err(|_| parse_err(format!("invalid node index '{}'", fields[1])))?;
            if a == b {
                return Err(parse_err(format!("self-loop on node {a}")));
            }
            max_idx = max_idx.max(a).max(b);
            edges.push((a, b));
        }
        let n = match n_nodes {
            Some(n) => n,
            None if edges.is_empty() => {
                return Err(MsmError::Graph(format!("{source}: edge list is empty")))
            }
            None => max_idx + 1,
        };
        Self::new(n, edges)
    }

    pub fn from_edge_file(path: &Path, n_nodes: Option<usize>) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| MsmError::io(path, e))?;
        Self::parse_edge_list(&text, &path.display().to_string(), n_nodes)
    }

    pub fn n_nodes(&self) -> usize {
        self.n_nodes
    }

    pub fn edges(&self) -> impl Iterator<Item = (usize, usize)> + '_ {
        self.edges.iter().copied()
    }

    pub fn n_edges(&self) -> usize {
        self.edges.len()
    }

    pub fn degrees(&self) -> Vec<usize> {
        let mut deg = vec![0; self.n_nodes];
        for &(a, b) in &self.edges {
            deg[a] += 1;
            deg[b] += 1;
        }
        deg
    }

    /// Number of connected components.
    pub fn n_components(&self) -> usize {
        let mut parent: Vec<usize> = (0..self.n_nodes).collect();
        fn find(parent: &mut [usize], mut x: usize) -> usize {
            while parent[x] != x {
                parent[x] = parent[parent[x]];
                x = parent[x];
            }
            x
        }
        for &(a, b) in &self.edges {
            let (ra, rb) = (find(&mut parent, a), find(&mut parent, b));
            if ra != rb {
                parent[ra] = rb;
            }
        }
        (0..self.n_nodes).filter(|&i| find(&mut parent, i) == i).count()
    }
}

pub fn build_graph(spec: &GraphSpec) -> Result<AdjacencyGraph> {
    match spec {
        GraphSpec::Grid { rows, cols } => AdjacencyGraph::grid(*rows, *cols),
        GraphSpec::Ring { n } => AdjacencyGraph::ring(*n),
        GraphSpec::EdgeList { path, n_nodes } => AdjacencyGraph::from_edge_file(path, *n_nodes),
    }
}

/// `Q` with node degrees on the diagonal and `-1` for each neighbour pair.
#[derive(Debug, Clone, PartialEq)]
pub struct StructureMatrix(DMatrix<f64>);

impl StructureMatrix {
    pub fn as_matrix(&self) -> &DMatrix<f64> {
        &self.0
    }

    /// Wraps an arbitrary matrix. Symmetry is checked by [`eigendecompose`].
    pub fn from_matrix(q: DMatrix<f64>) -> Self {
        Self(q)
    }
}

pub fn structure_matrix(g: &AdjacencyGraph) -> StructureMatrix {
    let n = g.n_nodes();
    let mut q = DMatrix::zeros(n, n);
    for (a, b) in g.edges() {
        q[(a, b)] = -1.0;
        q[(b, a)] = -1.0;
        q[(a, a)] += 1.0;
        q[(b, b)] += 1.0;
    }
    StructureMatrix(q)
}

/// Eigenvectors (columns) and eigenvalues of `Q`, eigenvalues descending.
#[derive(Debug, Clone, PartialEq)]
pub struct SpectralBasis {
    vectors: DMatrix<f64>,
    values: DVector<f64>,
}

impl SpectralBasis {
    pub fn vectors(&self) -> &DMatrix<f64> {
        &self.vectors
    }

    pub fn eigenvalues(&self) -> &DVector<f64> {
        &self.values
    }

    pub fn n(&self) -> usize {
        self.values.len()
    }

    /// Number of eigenvalues within `tol` of zero.
    pub fn n_zero_eigenvalues(&self, tol: f64) -> usize {
        self.values.iter().filter(|w| w.abs() < tol).count()
    }

    /// `Γᵀ M`: spatial rows to spectral rows.
    pub fn project(&self, m: &DMatrix<f64>) -> Result<DMatrix<f64>> {
        if m.nrows() != self.n() {
            return Err(MsmError::dimension("project", self.n(), m.nrows()));
        }
        Ok(self.vectors.tr_mul(m))
    }

    /// `Γ M*`: spectral rows back to spatial rows.
    pub fn back_project(&self, m: &DMatrix<f64>) -> Result<DMatrix<f64>> {
        if m.nrows() != self.n() {
            return Err(MsmError::dimension("back_project", self.n(), m.nrows()));
        }
        Ok(&self.vectors * m)
    }

    pub fn project_vector(&self, v: &DVector<f64>) -> Result<DVector<f64>> {
        if v.len() != self.n() {
            return Err(MsmError::dimension("project", self.n(), v.len()));
        }
        Ok(self.vectors.tr_mul(v))
    }
}

const SYMMETRY_TOL: f64 = 1e-10;

pub fn eigendecompose(q: &StructureMatrix) -> Result<SpectralBasis> {
    let m = q.as_matrix();
    if !m.is_square() {
        return Err(MsmError::Contract(format!(
            "structure matrix must be square, got {}x{}",
            m.nrows(),
            m.ncols()
        )));
    }
    let n = m.nrows();
    let scale = m.amax().max(1.0);
    for i in 0..n {
        for j in (i + 1)..n {
            if (m[(i, j)] - m[(j, i)]).abs() > SYMMETRY_TOL * scale {
                return Err(MsmError::Contract(format!(
                    "structure matrix is not symmetric at ({i},{j})"
                )));
            }
        }
    }

    let eig = SymmetricEigen::new(m.clone());
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| eig.eigenvalues[b].total_cmp(&eig.eigenvalues[a]));

    let mut vectors = DMatrix::zeros(n, n);
    let mut values = DVector::zeros(n);
    for (dst, &src) in order.iter().enumerate() {
        let mut col = eig.eigenvectors.column(src).into_owned();
        // largest-magnitude entry positive; first index wins ties
        let mut best = 0;
        for i in 1..n {
            if col[i].abs() > col[best].abs() + 1e-12 {
                best = i;
            }
        }
        if col[best] < 0.0 {
            col.neg_mut();
        }
        vectors.set_column(dst, &col);
        values[dst] = eig.eigenvalues[src];
    }
    Ok(SpectralBasis { vectors, values })
}

/// Convenience: graph → `Q` → ordered eigenbasis.
pub fn spectral_basis(g: &AdjacencyGraph) -> Result<SpectralBasis> {
    eigendecompose(&structure_matrix(g))
}

/// Analytic eigenpair of a ring graph at frequency `k`.
#[derive(Debug, Clone)]
pub struct RingEigenpair {
    pub frequency: usize,
    pub eigenvalue: f64,
    /// Unit-norm cosine (and, for `0 < k < n/2`, sine) eigenvectors.
    pub vectors: Vec<DVector<f64>>,
}

/// Closed-form eigenpairs of the ring structure matrix for even `n`.
///
/// Frequency `k` has eigenvalue `2 - 2 cos(2πk/n)`; every `0 < k < n/2` is a
/// two-dimensional cosine/sine eigenspace.
pub fn ring_eigenpairs(n: usize) -> Result<Vec<RingEigenpair>> {
    if n < 4 || n % 2 != 0 {
        return Err(MsmError::config(
            "n",
            format!("analytic ring eigenpairs need an even n >= 4, got {n}"),
        ));
    }
    let nf = n as f64;
    let unit = |v: DVector<f64>| {
        let norm = v.norm();
        v / norm
    };
    let mut out = Vec::with_capacity(n / 2 + 1);
    for k in 0..=n / 2 {
        let angle = 2.0 * PI * k as f64 / nf;
        let cos_v = DVector::from_fn(n, |s, _| (angle * s as f64).cos());
        let mut vectors = vec![unit(cos_v)];
        if k > 0 && k < n / 2 {
            let sin_v = DVector::from_fn(n, |s, _| (angle * s as f64).sin());
            vectors.push(unit(sin_v));
        }
        out.push(RingEigenpair {
            frequency: k,
            eigenvalue: 2.0 - 2.0 * angle.cos(),
            vectors,
        });
    }
    Ok(out)
}

/// Integer lattice coordinates `(row, col)` of a row-major grid.
pub fn grid_coordinates(rows: usize, cols: usize) -> Vec<(f64, f64)> {
    (0..rows * cols)
        .map(|i| ((i / cols) as f64, (i % cols) as f64))
        .collect()
}
