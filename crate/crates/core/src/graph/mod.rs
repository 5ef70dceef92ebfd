//! Simple undirected graphs, degree-law samplers, the erased configuration
//! model and CSV ingestion.

mod configuration;
mod degree;
mod io;

pub use configuration::{build_graph_configuration, build_graph_configuration_with, ConfigurationGraph};
pub use degree::{sample_degree_sequence, ztp_poisson_rate, DegreeDistribution};
pub use io::{
    build_true_graph_from_rounds, load_edge_list, load_edge_lists, load_rounds, write_edge_list,
    LabelIndex, RoundedContactData,
};

use crate::error::{Error, Result};

/// A simple undirected graph over vertices `0..n_vertices`.
///
/// Adjacency lists are kept sorted, so neighbour queries are binary searches
/// and edge iteration is in canonical `(i < j)` lexicographic order. Graphs
/// are immutable once built.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Graph {
    adjacency: Vec<Vec<usize>>,
    n_edges: usize,
}

impl Graph {
    /// Edgeless graph on `n` vertices.
    pub fn empty(n: usize) -> Self {
        Graph {
            adjacency: vec![Vec::new(); n],
            n_edges: 0,
        }
    }

    pub fn complete(n: usize) -> Self {
        let adjacency: Vec<Vec<usize>> = (0..n)
            .map(|i| (0..n).filter(|&j| j != i).collect())
            .collect();
        Graph {
            adjacency,
            n_edges: n * n.saturating_sub(1) / 2,
        }
    }

    /// Builds a graph from unordered pairs. Duplicates and reversed pairs
    /// collapse to one edge; self-pairs and out-of-range endpoints are errors.
    pub fn from_edges<I>(n: usize, edges: I) -> Result<Self>
    where
        I: IntoIterator<Item = (usize, usize)>,
    {
        let mut adjacency = vec![Vec::new(); n];
        for (a, b) in edges {
            for v in [a, b] {
                if v >= n {
                    return Err(Error::Index {
                        index: v,
                        n_vertices: n,
                    });
                }
            }
            if a == b {
                return Err(Error::Validation(format!("self-edge at vertex {a}")));
            }
            adjacency[a].push(b);
            adjacency[b].push(a);
        }
        Ok(Self::from_raw_adjacency(adjacency))
    }

    /// Sorts and deduplicates raw (symmetric, loop-free) neighbour lists.
    pub(crate) fn from_raw_adjacency(mut adjacency: Vec<Vec<usize>>) -> Self {
        let mut twice = 0;
        for list in adjacency.iter_mut() {
            list.sort_unstable();
            list.dedup();
            twice += list.len();
        }
        Graph {
            adjacency,
            n_edges: twice / 2,
        }
    }

    /// Builds from canonical `(i < j)` pairs already known to be distinct.
    pub(crate) fn from_canonical_pairs(n: usize, pairs: &[(usize, usize)]) -> Self {
        let mut adjacency = vec![Vec::new(); n];
        for &(i, j) in pairs {
            adjacency[i].push(j);
            adjacency[j].push(i);
        }
        for list in adjacency.iter_mut() {
            list.sort_unstable();
        }
        Graph {
            adjacency,
            n_edges: pairs.len(),
        }
    }

    pub fn n_vertices(&self) -> usize {
        self.adjacency.len()
    }

    pub fn n_edges(&self) -> usize {
        self.n_edges
    }

    /// Number of unordered vertex pairs, `n (n - 1) / 2`.
    pub fn n_pairs(&self) -> usize {
        let n = self.n_vertices();
        n * n.saturating_sub(1) / 2
    }

    /// Edge density over all unordered pairs; zero for fewer than two vertices.
    pub fn density(&self) -> f64 {
        match self.n_pairs() {
            0 => 0.0,
            pairs => self.n_edges as f64 / pairs as f64,
        }
    }

    pub fn degree(&self, i: usize) -> usize {
        self.adjacency[i].len()
    }

    pub fn degrees(&self) -> Vec<usize> {
        self.adjacency.iter().map(Vec::len).collect()
    }

    pub fn neighbors(&self, i: usize) -> &[usize] {
        &self.adjacency[i]
    }

    pub fn has_edge(&self, i: usize, j: usize) -> bool {
        self.adjacency[i].binary_search(&j).is_ok()
    }

    /// Edges as `(i, j)` with `i < j`, in lexicographic order.
    pub fn edges(&self) -> impl Iterator<Item = (usize, usize)> + '_ {
        self.adjacency
            .iter()
            .enumerate()
            .flat_map(|(i, list)| list.iter().filter(move |&&j| j > i).map(move |&j| (i, j)))
    }

    fn check_vertex(&self, i: usize) -> Result<()> {
        if i < self.n_vertices() {
            Ok(())
        } else {
            Err(Error::Index {
                index: i,
                n_vertices: self.n_vertices(),
            })
        }
    }

    /// `|{k : A_ki = A_kj = 1}|`.
    pub fn common_neighbors(&self, i: usize, j: usize) -> Result<usize> {
        self.check_vertex(i)?;
        self.check_vertex(j)?;
        if i == j {
            return Err(Error::param("common_neighbors requires distinct vertices"));
        }
        let (a, b) = (&self.adjacency[i], &self.adjacency[j]);
        let (mut x, mut y, mut count) = (0, 0, 0);
        while x < a.len() && y < b.len() {
            match a[x].cmp(&b[y]) {
                std::cmp::Ordering::Less => x += 1,
                std::cmp::Ordering::Greater => y += 1,
                std::cmp::Ordering::Equal => {
                    count += 1;
                    x += 1;
                    y += 1;
                }
            }
        }
        Ok(count)
    }

    /// Applies a vertex permutation: vertex `v` becomes `perm[v]`.
    pub fn relabel(&self, perm: &[usize]) -> Result<Graph> {
        if perm.len() != self.n_vertices() {
            return Err(Error::Dimension {
                expected: self.n_vertices(),
                found: perm.len(),
            });
        }
        Graph::from_edges(
            self.n_vertices(),
            self.edges().map(|(i, j)| (perm[i], perm[j])),
        )
    }
}
