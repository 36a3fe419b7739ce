//! Graph container, symmetric normalized adjacency and structural diagnostics.

use std::sync::Arc;

use crate::error::{Error, Result};
use crate::tensor::{SparsePattern, Tensor};

/// Train/validation/test node masks of one split.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Split {
    pub train: Vec<bool>,
    pub val: Vec<bool>,
    pub test: Vec<bool>,
}

impl Split {
    pub fn from_indices(n: usize, train: &[usize], val: &[usize], test: &[usize]) -> Result<Self> {
        let mask = |idx: &[usize]| -> Result<Vec<bool>> {
            let mut m = vec![false; n];
            for &i in idx {
                if i >= n {
                    return Err(Error::Argument(format!("split index {i} out of range for {n} nodes")));
                }
                m[i] = true;
            }
            Ok(m)
        };
        let split = Split {
            train: mask(train)?,
            val: mask(val)?,
            test: mask(test)?,
        };
        split.validate(n)?;
        Ok(split)
    }

    /// Checks mask lengths and pairwise disjointness.
    pub fn validate(&self, n: usize) -> Result<()> {
        if self.train.len() != n || self.val.len() != n || self.test.len() != n {
            return Err(Error::Integrity(format!("split masks must have length {n}")));
        }
        for v in 0..n {
            let count = self.train[v] as u8 + self.val[v] as u8 + self.test[v] as u8;
            if count > 1 {
                return Err(Error::Integrity(format!("node {v} appears in more than one split mask")));
            }
        }
        Ok(())
    }

    pub fn train_indices(&self) -> Vec<usize> {
        indices(&self.train)
    }

    pub fn val_indices(&self) -> Vec<usize> {
        indices(&self.val)
    }

    pub fn test_indices(&self) -> Vec<usize> {
        indices(&self.test)
    }
}

pub(crate) fn indices(mask: &[bool]) -> Vec<usize> {
    mask.iter()
        .enumerate()
        .filter_map(|(i, &m)| m.then_some(i))
        .collect()
}

/// Edge bookkeeping from graph construction, kept so that published edge
/// counts can be compared under each counting convention.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub struct EdgeCounts {
    /// Pairs as given, before any cleaning.
    pub raw: usize,
    pub self_loops: usize,
    /// Distinct unordered pairs `{u, v}` with `u != v`.
    pub undirected: usize,
    /// Directed entries after symmetrization, i.e. `2 · undirected`.
    pub symmetrized: usize,
}

/// `D̃^{-1/2} (A + I) D̃^{-1/2}` in CSR form, with `d̃` counting the self-loop.
#[derive(Clone, Debug)]
pub struct NormalizedAdjacency {
    pub pattern: Arc<SparsePattern>,
    pub values: Vec<f64>,
    /// Self-looped degrees `d̃_v`.
    pub degrees: Vec<usize>,
}

impl NormalizedAdjacency {
    pub fn to_dense(&self) -> Tensor {
        self.pattern.to_dense(&self.values)
    }
}

/// Undirected attributed graph. Immutable once built.
#[derive(Clone, Debug)]
pub struct Graph {
    features: Tensor,
    labels: Option<Vec<usize>>,
    num_classes: usize,
    /// Sorted neighbor lists, no self-loops.
    neighbors: Vec<Vec<usize>>,
    num_edges: usize,
    adjacency: NormalizedAdjacency,
    pub splits: Vec<Split>,
}

impl Graph {
    /// Builds a graph from possibly directed, duplicated or self-looped pairs.
    /// Pairs are symmetrized and deduplicated; self-loops are dropped.
    pub fn new(features: Tensor, labels: Option<Vec<usize>>, edges: &[(usize, usize)]) -> Result<Self> {
        Self::build(features, labels, edges).map(|(g, _)| g)
    }

    pub fn build(
        features: Tensor,
        labels: Option<Vec<usize>>,
        edges: &[(usize, usize)],
    ) -> Result<(Self, EdgeCounts)> {
        let n = features.rows();
        if n == 0 {
            return Err(Error::Argument("graph needs at least one node".into()));
        }
        if let Some(l) = &labels {
            if l.len() != n {
                return Err(Error::dim("graph labels", format!("{} labels for {n} nodes", l.len())));
            }
        }
        let mut counts = EdgeCounts {
            raw: edges.len(),
            ..EdgeCounts::default()
        };
        let mut neighbors = vec![Vec::new(); n];
        for &(u, v) in edges {
            if u >= n || v >= n {
                return Err(Error::Argument(format!("edge ({u}, {v}) out of range for {n} nodes")));
            }
            if u == v {
                counts.self_loops += 1;
                continue;
            }
            neighbors[u].push(v);
            neighbors[v].push(u);
        }
        for list in &mut neighbors {
            list.sort_unstable();
            list.dedup();
        }
        let directed: usize = neighbors.iter().map(Vec::len).sum();
        counts.symmetrized = directed;
        counts.undirected = directed / 2;
        let num_classes = labels
            .as_ref()
            .map_or(0, |l| l.iter().max().map_or(0, |m| m + 1));
        let adjacency = normalize(&neighbors)?;
        Ok((
            Graph {
                features,
                labels,
                num_classes,
                neighbors,
                num_edges: counts.undirected,
                adjacency,
                splits: Vec::new(),
            },
            counts,
        ))
    }

    pub fn with_splits(mut self, splits: Vec<Split>) -> Result<Self> {
        for s in &splits {
            s.validate(self.num_nodes())?;
        }
        self.splits = splits;
        Ok(self)
    }

    /// Same topology and labels, different node features.
    pub fn with_features(&self, features: Tensor) -> Result<Self> {
        if features.rows() != self.num_nodes() {
            return Err(Error::dim(
                "graph features",
                format!("{} rows for {} nodes", features.rows(), self.num_nodes()),
            ));
        }
        let mut g = self.clone();
        g.features = features;
        Ok(g)
    }

    /// Scales each feature row to unit L1 norm; all-zero rows stay zero.
    pub fn row_normalized(&self) -> Self {
        let mut f = self.features.clone();
        for r in 0..f.rows() {
            let row = f.row_mut(r);
            let s: f64 = row.iter().map(|x| x.abs()).sum();
            if s > 0.0 {
                row.iter_mut().for_each(|x| *x /= s);
            }
        }
        self.with_features(f).expect("same node count")
    }

    pub fn num_nodes(&self) -> usize {
        self.features.rows()
    }

    /// Distinct undirected edges.
    pub fn num_edges(&self) -> usize {
        self.num_edges
    }

    pub fn feature_dim(&self) -> usize {
        self.features.cols()
    }

    pub fn features(&self) -> &Tensor {
        &self.features
    }

    pub fn labels(&self) -> Option<&[usize]> {
        self.labels.as_deref()
    }

    pub fn num_classes(&self) -> usize {
        self.num_classes
    }

    pub fn neighbors(&self, v: usize) -> &[usize] {
        &self.neighbors[v]
    }

    /// Degree without the self-loop.
    pub fn degree(&self, v: usize) -> usize {
        self.neighbors[v].len()
    }

    /// Each undirected edge once, as `(u, v)` with `u < v`, in sorted order.
    pub fn edges(&self) -> impl Iterator<Item = (usize, usize)> + '_ {
        self.neighbors.iter().enumerate().flat_map(|(u, list)| {
            list.iter().filter(move |&&v| v > u).map(move |&v| (u, v))
        })
    }

    pub fn adjacency(&self) -> &NormalizedAdjacency {
        &self.adjacency
    }

    /// Fraction of undirected edges whose endpoints share a label.
    pub fn homophily_ratio(&self) -> Result<f64> {
        let labels = self
            .labels
            .as_ref()
            .ok_or_else(|| Error::State("homophily needs node labels".into()))?;
        if self.num_edges == 0 {
            return Err(Error::State("homophily is undefined on a graph without edges".into()));
        }
        let same = self.edges().filter(|&(u, v)| labels[u] == labels[v]).count();
        Ok(same as f64 / self.num_edges as f64)
    }

    /// `fᵀ (I − D^{-1/2} A D^{-1/2}) f` with plain degrees, evaluated as the
    /// edge sum `Σ_{(u,v)} (f_u/√d_u − f_v/√d_v)²` plus `f_v²` for every
    /// isolated node. The sum form is non-negative by construction.
    pub fn laplacian_quadratic(&self, f: &[f64]) -> Result<f64> {
        let n = self.num_nodes();
        if f.len() != n {
            return Err(Error::dim("laplacian_quadratic", format!("signal of length {} for {n} nodes", f.len())));
        }
        let scaled: Vec<f64> = (0..n)
            .map(|v| match self.degree(v) {
                0 => 0.0,
                d => f[v] / (d as f64).sqrt(),
            })
            .collect();
        let mut total = 0.0;
        for (u, v) in self.edges() {
            let d = scaled[u] - scaled[v];
            total += d * d;
        }
        for v in 0..n {
            if self.degree(v) == 0 {
                total += f[v] * f[v];
            }
        }
        Ok(total)
    }
}

fn normalize(neighbors: &[Vec<usize>]) -> Result<NormalizedAdjacency> {
    let degrees: Vec<usize> = neighbors.iter().map(|l| l.len() + 1).collect();
    let rows: Vec<Vec<usize>> = neighbors
        .iter()
        .enumerate()
        .map(|(v, l)| {
            let mut r = l.clone();
            r.push(v);
            r
        })
        .collect();
    let pattern = SparsePattern::from_rows(rows)?;
    let mut values = vec![0.0; pattern.nnz()];
    for i in 0..pattern.n() {
        for p in pattern.row_range(i) {
            // The integer product is symmetric, so Ã_ij and Ã_ji are bitwise equal.
            let dd = (degrees[i] * degrees[pattern.col(p)]) as f64;
            values[p] = 1.0 / dd.sqrt();
        }
    }
    Ok(NormalizedAdjacency {
        pattern: Arc::new(pattern),
        values,
        degrees,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn graph(n: usize, edges: &[(usize, usize)], labels: Option<Vec<usize>>) -> Graph {
        Graph::new(Tensor::zeros(n, 1), labels, edges).unwrap()
    }

    #[test]
    fn isolated_node_normalizes_to_one() {
        let g = graph(1, &[], None);
        assert_eq!(g.adjacency().to_dense(), Tensor::from_rows(&[[1.0]]));
    }

    #[test]
    fn path_of_two() {
        let g = graph(2, &[(0, 1)], None);
        assert_eq!(
            g.adjacency().to_dense(),
            Tensor::from_rows(&[[0.5, 0.5], [0.5, 0.5]])
        );
        // L_sym = [[1, -1], [-1, 1]], so fᵀ L f = 2 + 2.
        let q = g.laplacian_quadratic(&[1.0, -1.0]).unwrap();
        assert!((q - 4.0).abs() < 1e-15);
    }

    #[test]
    fn edges_are_cleaned_and_counted() {
        let (g, c) = Graph::build(
            Tensor::zeros(4, 1),
            None,
            &[(0, 1), (1, 0), (2, 2), (1, 2), (0, 1)],
        )
        .unwrap();
        assert_eq!(
            c,
            EdgeCounts {
                raw: 5,
                self_loops: 1,
                undirected: 2,
                symmetrized: 4
            }
        );
        assert_eq!(g.edges().collect::<Vec<_>>(), vec![(0, 1), (1, 2)]);
        assert_eq!(g.degree(3), 0);
    }

    #[test]
    fn out_of_range_edge_rejected() {
        assert!(Graph::new(Tensor::zeros(2, 1), None, &[(0, 2)]).is_err());
    }

    #[test]
    fn homophily_cases() {
        let g = graph(3, &[(0, 1), (1, 2), (0, 2)], Some(vec![4, 4, 4]));
        assert_eq!(g.homophily_ratio().unwrap(), 1.0);
        let g = graph(3, &[(0, 1), (1, 2), (0, 2)], Some(vec![0, 1, 2]));
        assert_eq!(g.homophily_ratio().unwrap(), 0.0);
        let g = graph(3, &[(0, 1)], None);
        assert!(matches!(g.homophily_ratio(), Err(Error::State(_))));
    }

    #[test]
    fn degree_scaled_constant_is_in_kernel() {
        let g = graph(5, &[(0, 1), (1, 2), (2, 0), (2, 3), (3, 4)], None);
        let f: Vec<f64> = (0..5).map(|v| (g.degree(v) as f64).sqrt()).collect();
        assert!(g.laplacian_quadratic(&f).unwrap().abs() < 1e-12);
    }

    #[test]
    fn split_overlap_is_rejected() {
        assert!(Split::from_indices(4, &[0, 1], &[1], &[3]).is_err());
        let s = Split::from_indices(4, &[0], &[1], &[2, 3]).unwrap();
        assert_eq!(s.test_indices(), vec![2, 3]);
    }
}
