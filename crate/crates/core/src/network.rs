//! Directed tail-causality networks and their topology metrics.

use std::collections::BTreeSet;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::causality::{bh_fdr, decimate_vdar1, hong_test, lr_tail_test, GcTestResult, TestMethod};
use crate::error::{Error, Result};
use crate::series::BinaryPanel;

/// Directed graph over labelled nodes; edge `(s, t)` means `s` causes `t`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CausalityNetwork {
    pub nodes: Vec<String>,
    /// Sorted, without duplicates or self-loops.
    pub edges: Vec<(usize, usize)>,
    /// How the edges were validated, e.g. `lr` or `decimation`.
    pub method: String,
    /// Pairs whose test failed, as `source -> target: reason`.
    pub diagnostics: Vec<String>,
}

impl CausalityNetwork {
    pub fn new(
        nodes: Vec<String>,
        edges: impl IntoIterator<Item = (usize, usize)>,
        method: impl Into<String>,
    ) -> Result<Self> {
        let n = nodes.len();
        let set: BTreeSet<(usize, usize)> = edges.into_iter().collect();
        if let Some(&(s, t)) = set.iter().find(|&&(s, t)| s == t || s >= n || t >= n) {
            return Err(Error::InvalidValue(format!(
                "invalid edge ({s}, {t}) on {n} nodes"
            )));
        }
        Ok(Self {
            nodes,
            edges: set.into_iter().collect(),
            method: method.into(),
            diagnostics: Vec::new(),
        })
    }

    pub fn n_nodes(&self) -> usize {
        self.nodes.len()
    }

    pub fn has_edge(&self, s: usize, t: usize) -> bool {
        self.edges.binary_search(&(s, t)).is_ok()
    }

    /// Edges as `(source label, target label)`.
    pub fn labelled_edges(&self) -> Vec<(&str, &str)> {
        self.edges
            .iter()
            .map(|&(s, t)| (self.nodes[s].as_str(), self.nodes[t].as_str()))
            .collect()
    }

    /// Same graph with edge `(s, t)` removed.
    pub fn without_edge(&self, s: usize, t: usize) -> Self {
        let mut g = self.clone();
        g.edges.retain(|&e| e != (s, t));
        g
    }
}

fn check_panel(panel: &BinaryPanel) -> Result<()> {
    if panel.n_series() < 2 {
        return Err(Error::InvalidParameters(
            "a network needs at least two series".into(),
        ));
    }
    Ok(())
}

/// Runs `method` on every ordered pair `(source, target)` of distinct series.
/// `param` is `p_max` for lr and the bandwidth `M` for hong.
pub fn pairwise_tests(
    panel: &BinaryPanel,
    method: TestMethod,
    param: usize,
) -> Vec<((usize, usize), Result<GcTestResult>)> {
    let n = panel.n_series();
    let pairs: Vec<(usize, usize)> = (0..n)
        .flat_map(|s| (0..n).filter(move |&t| t != s).map(move |t| (s, t)))
        .collect();
    pairs
        .into_par_iter()
        .map(|(s, t)| {
            let (x, y) = (panel.get(t), panel.get(s));
            let r = match method {
                TestMethod::Lr => lr_tail_test(x, y, param),
                TestMethod::Hong => hong_test(x, y, param),
            };
            ((s, t), r)
        })
        .collect()
}

/// Pairwise network: every ordered pair is tested and Benjamini–Hochberg is
/// applied jointly to all `N(N-1)` p-values at `level`. Failed tests become
/// missing edges listed in `diagnostics`.
pub fn build_pairwise_network(
    panel: &BinaryPanel,
    method: TestMethod,
    level: f64,
    param: usize,
) -> Result<CausalityNetwork> {
    check_panel(panel)?;
    if !(level > 0.0 && level < 1.0) {
        return Err(Error::InvalidValue(format!("level {level} outside (0, 1)")));
    }
    let labels = panel.labels();
    let results = pairwise_tests(panel, method, param);
    let mut tested = Vec::new();
    let mut p_values = Vec::new();
    let mut diagnostics = Vec::new();
    for ((s, t), r) in results {
        match r {
            Ok(r) => {
                tested.push((s, t));
                p_values.push(r.p_value);
            }
            Err(e) => diagnostics.push(format!("{} -> {}: {e}", labels[s], labels[t])),
        }
    }
    let rejected = bh_fdr(&p_values, level)?;
    let method_name = match method {
        TestMethod::Lr => "lr",
        TestMethod::Hong => "hong",
    };
    let mut g =
        CausalityNetwork::new(labels, rejected.into_iter().map(|k| tested[k]), method_name)?;
    g.diagnostics = diagnostics;
    Ok(g)
}

/// Network of the couplings that survive decimation of a VDAR(1) fit:
/// an edge `j -> i` for every nonzero off-diagonal `lambda[i][j]`.
pub fn build_multivariate_network(panel: &BinaryPanel) -> Result<CausalityNetwork> {
    check_panel(panel)?;
    let d = decimate_vdar1(panel)?;
    let n = panel.n_series();
    let edges = (0..n)
        .flat_map(|i| (0..n).map(move |j| (j, i)))
        .filter(|&(j, i)| i != j && d.lambda_validated[i][j] > 0.0);
    CausalityNetwork::new(panel.labels(), edges.collect::<Vec<_>>(), "decimation")
}

/// `|E| / (N(N-1))`.
pub fn link_density(g: &CausalityNetwork) -> f64 {
    let n = g.n_nodes();
    if n < 2 {
        return 0.0;
    }
    g.edges.len() as f64 / (n * (n - 1)) as f64
}

/// Fraction of links whose reverse link is also present; 0 for an empty graph.
pub fn reciprocity(g: &CausalityNetwork) -> f64 {
    if g.edges.is_empty() {
        return 0.0;
    }
    let mutual = g.edges.iter().filter(|&&(s, t)| g.has_edge(t, s)).count();
    mutual as f64 / g.edges.len() as f64
}

/// Fraction of node triplets that are closed in the undirected skeleton.
pub fn triangle_density(g: &CausalityNetwork) -> f64 {
    let n = g.n_nodes();
    if n < 3 {
        return 0.0;
    }
    let mut adj = vec![vec![false; n]; n];
    for &(s, t) in &g.edges {
        adj[s][t] = true;
        adj[t][s] = true;
    }
    let mut closed = 0usize;
    for a in 0..n {
        for b in a + 1..n {
            if !adj[a][b] {
                continue;
            }
            closed += (b + 1..n).filter(|&c| adj[a][c] && adj[b][c]).count();
        }
    }
    let triplets = n * (n - 1) * (n - 2) / 6;
    closed as f64 / triplets as f64
}

/// Jaccard similarity of directed edge sets; 0 when both are empty.
pub fn jaccard(g1: &CausalityNetwork, g2: &CausalityNetwork) -> Result<f64> {
    if g1.nodes != g2.nodes {
        return Err(Error::InvalidValue(
            "networks have different node sets".into(),
        ));
    }
    let a: BTreeSet<_> = g1.edges.iter().collect();
    let b: BTreeSet<_> = g2.edges.iter().collect();
    let union = a.union(&b).count();
    if union == 0 {
        return Ok(0.0);
    }
    Ok(a.intersection(&b).count() as f64 / union as f64)
}

/// Summary metrics of a network.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct NetworkMetrics {
    pub density: f64,
    pub reciprocity: f64,
    pub triangle_density: f64,
}

pub fn metrics(g: &CausalityNetwork) -> NetworkMetrics {
    NetworkMetrics {
        density: link_density(g),
        reciprocity: reciprocity(g),
        triangle_density: triangle_density(g),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn labels(n: usize) -> Vec<String> {
        (0..n).map(|i| format!("N{i}")).collect()
    }

    fn complete(n: usize) -> CausalityNetwork {
        let e: Vec<_> = (0..n)
            .flat_map(|s| (0..n).filter(move |&t| t != s).map(move |t| (s, t)))
            .collect();
        CausalityNetwork::new(labels(n), e, "test").unwrap()
    }

    #[test]
    fn complete_graph_metrics() {
        let g = complete(5);
        assert_eq!(
            (link_density(&g), reciprocity(&g), triangle_density(&g)),
            (1.0, 1.0, 1.0)
        );
    }

    #[test]
    fn reciprocity_hand_count() {
        let g = CausalityNetwork::new(labels(3), [(0, 1), (1, 0), (0, 2)], "test").unwrap();
        assert!((reciprocity(&g) - 2.0 / 3.0).abs() < 1e-15);
        assert_eq!(triangle_density(&g), 0.0);
    }

    #[test]
    fn empty_graph_conventions() {
        let g = CausalityNetwork::new(labels(4), [], "test").unwrap();
        assert_eq!(
            (link_density(&g), reciprocity(&g), triangle_density(&g)),
            (0.0, 0.0, 0.0)
        );
        assert_eq!(jaccard(&g, &g).unwrap(), 0.0);
    }

    #[test]
    fn jaccard_cases() {
        let a = CausalityNetwork::new(labels(3), [(0, 1), (1, 2)], "a").unwrap();
        let b = CausalityNetwork::new(labels(3), [(1, 0)], "b").unwrap();
        assert_eq!(jaccard(&a, &a).unwrap(), 1.0);
        assert_eq!(jaccard(&a, &b).unwrap(), 0.0);
        let c = CausalityNetwork::new(labels(3), [(0, 1)], "c").unwrap();
        assert!((jaccard(&a, &c).unwrap() - 0.5).abs() < 1e-15);
        assert!(jaccard(&a, &CausalityNetwork::new(labels(4), [], "d").unwrap()).is_err());
    }

    #[test]
    fn rejects_self_loops_and_dedups() {
        assert!(CausalityNetwork::new(labels(2), [(0, 0)], "x").is_err());
        assert!(CausalityNetwork::new(labels(2), [(0, 2)], "x").is_err());
        assert_eq!(
            CausalityNetwork::new(labels(2), [(0, 1), (0, 1)], "x")
                .unwrap()
                .edges,
            vec![(0, 1)]
        );
    }

    fn graph_strategy() -> impl Strategy<Value = CausalityNetwork> {
        (3usize..8).prop_flat_map(|n| {
            proptest::collection::vec(proptest::bool::weighted(0.4), n * n).prop_map(move |mask| {
                let e: Vec<_> = (0..n * n)
                    .filter(|&k| mask[k] && k / n != k % n)
                    .map(|k| (k / n, k % n))
                    .collect();
                CausalityNetwork::new(labels(n), e, "rand").unwrap()
            })
        })
    }

    proptest! {
        #[test]
        fn metrics_in_unit_interval(g in graph_strategy()) {
            for v in [link_density(&g), reciprocity(&g), triangle_density(&g)] {
                prop_assert!((0.0..=1.0).contains(&v));
            }
        }

        #[test]
        fn symmetric_graph_is_fully_reciprocal(g in graph_strategy()) {
            let sym: Vec<_> = g.edges.iter().flat_map(|&(s, t)| [(s, t), (t, s)]).collect();
            let h = CausalityNetwork::new(g.nodes.clone(), sym, "sym").unwrap();
            prop_assume!(!h.edges.is_empty());
            prop_assert_eq!(reciprocity(&h), 1.0);
            prop_assert_eq!(jaccard(&h, &h).unwrap(), 1.0);
        }

        #[test]
        fn edge_removal_never_raises_triangle_density(g in graph_strategy(), k in 0usize..64) {
            prop_assume!(!g.edges.is_empty());
            let (s, t) = g.edges[k % g.edges.len()];
            prop_assert!(triangle_density(&g.without_edge(s, t)) <= triangle_density(&g));
        }
    }
}
