//! Finite graphs: cycles, periodic tori and explicit edge lists.

mod steiner;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub use steiner::{steiner_width, SteinerWidth, EXACT_TERMINAL_LIMIT};

/// Undirected simple graph stored as sorted adjacency lists.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Graph {
    adjacency: Vec<Vec<usize>>,
    degree: Option<usize>,
    family: GraphSpec,
}

impl Graph {
    /// Cycle on `n ≥ 3` vertices.
    pub fn cycle(n: usize) -> Result<Self> {
        if n < 3 {
            return Err(Error::InvalidGraph(format!(
                "cycle needs at least 3 vertices, got {n}"
            )));
        }
        let adjacency = (0..n)
            .map(|i| {
                let mut nb = vec![(i + n - 1) % n, (i + 1) % n];
                nb.sort_unstable();
                nb
            })
            .collect();
        Ok(Self::from_parts(adjacency, GraphSpec::Cycle { n }))
    }

    /// Periodic torus `(Z_side)^dim`. Vertex coordinates are little-endian
    /// digits base `side`.
    pub fn torus(side: usize, dim: usize) -> Result<Self> {
        if side < 3 {
            return Err(Error::InvalidGraph(format!(
                "torus side must be at least 3, got {side}"
            )));
        }
        if dim == 0 {
            return Err(Error::InvalidGraph("torus dimension must be positive".into()));
        }
        let n = u32::try_from(dim)
            .ok()
            .and_then(|d| side.checked_pow(d))
            .filter(|&n| n <= u32::MAX as usize)
            .ok_or_else(|| Error::Capacity(format!("torus {side}^{dim} has too many vertices")))?;
        let mut strides = Vec::with_capacity(dim);
        let mut s = 1usize;
        for _ in 0..dim {
            strides.push(s);
            s *= side;
        }
        let adjacency = (0..n)
            .map(|v| {
                let mut nb = Vec::with_capacity(2 * dim);
                for &stride in &strides {
                    let coord = (v / stride) % side;
                    let base = v - coord * stride;
                    nb.push(base + ((coord + 1) % side) * stride);
                    nb.push(base + ((coord + side - 1) % side) * stride);
                }
                nb.sort_unstable();
                nb
            })
            .collect();
        Ok(Self::from_parts(adjacency, GraphSpec::Torus { side, dim }))
    }

    /// Graph from an explicit undirected edge list.
    pub fn from_edges(n: usize, edges: &[(usize, usize)]) -> Result<Self> {
        if n == 0 {
            return Err(Error::InvalidGraph("graph needs at least one vertex".into()));
        }
        if n > u32::MAX as usize {
            return Err(Error::Capacity(format!("{n} vertices")));
        }
        let mut adjacency = vec![Vec::new(); n];
        for &(u, v) in edges {
            if u >= n || v >= n {
                return Err(Error::InvalidGraph(format!(
                    "edge ({u}, {v}) references a vertex outside 0..{n}"
                )));
            }
            if u == v {
                return Err(Error::InvalidGraph(format!("self-loop at {u}")));
            }
            adjacency[u].push(v);
            adjacency[v].push(u);
        }
        for (v, nb) in adjacency.iter_mut().enumerate() {
            nb.sort_unstable();
            let before = nb.len();
            nb.dedup();
            if nb.len() != before {
                return Err(Error::InvalidGraph(format!("parallel edge at vertex {v}")));
            }
        }
        Ok(Self::from_parts(
            adjacency,
            GraphSpec::Explicit {
                n,
                edges: edges.to_vec(),
            },
        ))
    }

    fn from_parts(adjacency: Vec<Vec<usize>>, family: GraphSpec) -> Self {
        let d0 = adjacency.first().map_or(0, Vec::len);
        let degree = adjacency.iter().all(|nb| nb.len() == d0).then_some(d0);
        Self {
            adjacency,
            degree,
            family,
        }
    }

    pub fn n(&self) -> usize {
        self.adjacency.len()
    }

    pub fn neighbors(&self, v: usize) -> &[usize] {
        &self.adjacency[v]
    }

    pub fn deg(&self, v: usize) -> usize {
        self.adjacency[v].len()
    }

    /// Common degree when the graph is regular.
    pub fn degree(&self) -> Option<usize> {
        self.degree
    }

    pub fn max_degree(&self) -> usize {
        self.adjacency.iter().map(Vec::len).max().unwrap_or(0)
    }

    pub fn is_regular(&self) -> bool {
        self.degree.is_some()
    }

    /// True for the built-in vertex-transitive families. Explicit graphs are
    /// never certified, whatever their degrees.
    pub fn is_trusted_transitive(&self) -> bool {
        matches!(self.family, GraphSpec::Cycle { .. } | GraphSpec::Torus { .. })
    }

    pub fn spec(&self) -> &GraphSpec {
        &self.family
    }

    pub fn edges(&self) -> impl Iterator<Item = (usize, usize)> + '_ {
        self.adjacency
            .iter()
            .enumerate()
            .flat_map(|(u, nb)| nb.iter().filter(move |&&v| u < v).map(move |&v| (u, v)))
    }

    pub fn edge_count(&self) -> usize {
        self.adjacency.iter().map(Vec::len).sum::<usize>() / 2
    }

    /// Breadth-first distances from `source`; `usize::MAX` marks unreachable vertices.
    pub fn bfs_distances(&self, source: usize) -> Vec<usize> {
        let mut dist = vec![usize::MAX; self.n()];
        let mut queue = std::collections::VecDeque::new();
        dist[source] = 0;
        queue.push_back(source);
        while let Some(u) = queue.pop_front() {
            for &w in self.neighbors(u) {
                if dist[w] == usize::MAX {
                    dist[w] = dist[u] + 1;
                    queue.push_back(w);
                }
            }
        }
        dist
    }
}

/// Config-file description of a graph.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "family", rename_all = "lowercase", deny_unknown_fields)]
pub enum GraphSpec {
    Cycle { n: usize },
    Torus { side: usize, dim: usize },
    Explicit { n: usize, edges: Vec<(usize, usize)> },
}

impl GraphSpec {
    pub fn build(&self) -> Result<Graph> {
        match self {
            GraphSpec::Cycle { n } => Graph::cycle(*n),
            GraphSpec::Torus { side, dim } => Graph::torus(*side, *dim),
            GraphSpec::Explicit { n, edges } => Graph::from_edges(*n, edges),
        }
    }

    /// Same family with its size parameter replaced: `n` for cycles,
    /// `side` for tori. Explicit graphs cannot be resized.
    pub fn with_size(&self, size: usize) -> Result<GraphSpec> {
        match self {
            GraphSpec::Cycle { .. } => Ok(GraphSpec::Cycle { n: size }),
            GraphSpec::Torus { dim, .. } => Ok(GraphSpec::Torus {
                side: size,
                dim: *dim,
            }),
            GraphSpec::Explicit { .. } => Err(Error::InvalidArgument(
                "explicit graphs have no size parameter".into(),
            )),
        }
    }
}

/// Sorted set of distinct vertex ids.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct VertexSet(Vec<usize>);

impl VertexSet {
    pub fn new(mut ids: Vec<usize>, n: usize) -> Result<Self> {
        ids.sort_unstable();
        ids.dedup();
        if let Some(&v) = ids.last() {
            if v >= n {
                return Err(Error::InvalidArgument(format!(
                    "vertex {v} outside 0..{n}"
                )));
            }
        }
        Ok(Self(ids))
    }

    pub fn singleton(v: usize) -> Self {
        Self(vec![v])
    }

    pub fn all(n: usize) -> Self {
        Self((0..n).collect())
    }

    pub fn as_slice(&self) -> &[usize] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn contains(&self, v: usize) -> bool {
        self.0.binary_search(&v).is_ok()
    }

    pub fn is_subset(&self, other: &VertexSet) -> bool {
        self.0.iter().all(|&v| other.contains(v))
    }

    pub fn iter(&self) -> impl Iterator<Item = usize> + '_ {
        self.0.iter().copied()
    }
}

impl From<VertexSet> for Vec<usize> {
    fn from(s: VertexSet) -> Self {
        s.0
    }
}
