//! Graph-cut baseline for length-regularized segmentation: the binary
//! problem without curvature terms is solved exactly by a minimum s-t cut
//! on the face-adjacency graph.

use crate::complex::CellComplex;
use crate::energy::DataCost;
use crate::error::{Error, Result};
use crate::scalar::{fl, Scalar};

struct FlowEdge<F: Scalar> {
    to: usize,
    cap: F,
}

/// A directed flow network solved with Edmonds-Karp (BFS augmenting paths).
pub struct FlowNetwork<F: Scalar = f64> {
    edges: Vec<FlowEdge<F>>,
    adj: Vec<Vec<usize>>,
}

impl<F: Scalar> FlowNetwork<F> {
    pub fn new(nodes: usize) -> Self {
        FlowNetwork { edges: Vec::new(), adj: vec![Vec::new(); nodes] }
    }

    pub fn num_nodes(&self) -> usize {
        self.adj.len()
    }

    /// Adds a directed arc and its zero-capacity residual twin.
    pub fn add_edge(&mut self, from: usize, to: usize, cap: F) {
        assert!(cap >= F::zero());
        self.adj[from].push(self.edges.len());
        self.edges.push(FlowEdge { to, cap });
        self.adj[to].push(self.edges.len());
        self.edges.push(FlowEdge { to: from, cap: F::zero() });
    }

    /// Adds a symmetric pair of arcs with equal capacity.
    pub fn add_undirected(&mut self, a: usize, b: usize, cap: F) {
        assert!(cap >= F::zero());
        self.adj[a].push(self.edges.len());
        self.edges.push(FlowEdge { to: b, cap });
        self.adj[b].push(self.edges.len());
        self.edges.push(FlowEdge { to: a, cap });
    }

    /// Maximum flow from `s` to `t`; afterwards the residual graph encodes a
    /// minimum cut.
    pub fn max_flow(&mut self, s: usize, t: usize) -> F {
        let mut total = F::zero();
        let mut prev = vec![usize::MAX; self.num_nodes()];
        loop {
            // BFS for a shortest augmenting path.
            prev.iter_mut().for_each(|p| *p = usize::MAX);
            let mut queue = std::collections::VecDeque::new();
            queue.push_back(s);
            prev[s] = usize::MAX - 1;
            while let Some(u) = queue.pop_front() {
                if u == t {
                    break;
                }
                for &ei in &self.adj[u] {
                    let e = &self.edges[ei];
                    if e.cap > F::zero() && prev[e.to] == usize::MAX {
                        prev[e.to] = ei;
                        queue.push_back(e.to);
                    }
                }
            }
            if prev[t] == usize::MAX {
                return total;
            }
            let mut bottleneck = F::infinity();
            let mut v = t;
            while v != s {
                let ei = prev[v];
                bottleneck = bottleneck.min(self.edges[ei].cap);
                v = self.edges[ei ^ 1].to;
            }
            let mut v = t;
            while v != s {
                let ei = prev[v];
                self.edges[ei].cap = self.edges[ei].cap - bottleneck;
                self.edges[ei ^ 1].cap = self.edges[ei ^ 1].cap + bottleneck;
                v = self.edges[ei ^ 1].to;
            }
            total = total + bottleneck;
        }
    }

    /// Nodes reachable from `s` in the residual graph (the source side of a
    /// minimum cut). Call after [`max_flow`].
    pub fn source_side(&self, s: usize) -> Vec<bool> {
        let mut seen = vec![false; self.num_nodes()];
        let mut queue = std::collections::VecDeque::new();
        seen[s] = true;
        queue.push_back(s);
        while let Some(u) = queue.pop_front() {
            for &ei in &self.adj[u] {
                let e = &self.edges[ei];
                if e.cap > F::feas_tol() && !seen[e.to] {
                    seen[e.to] = true;
                    queue.push_back(e.to);
                }
            }
        }
        seen
    }
}

/// Builds the cut network for the length model: one node per face plus
/// source and sink. Source-side faces are foreground; a foreground face
/// pays its positive data cost and the domain-border length it touches,
/// a background face pays the negated negative data cost, and differing
/// neighbors pay the shared edge length times `nu`.
pub fn build_network<F: Scalar>(
    complex: &CellComplex,
    data_cost: &DataCost<F>,
    nu: F,
) -> (FlowNetwork<F>, usize, usize) {
    let n = complex.faces.len();
    let (s, t) = (n, n + 1);
    let mut net = FlowNetwork::new(n + 2);
    let mut to_sink = vec![F::zero(); n];
    let mut to_source = vec![F::zero(); n];
    for (f, &c) in data_cost.per_face.iter().enumerate() {
        to_sink[f] = c.max(F::zero());
        to_source[f] = (-c).max(F::zero());
    }
    for e in 0..complex.edges.len() {
        let cap = nu * fl::<F>(complex.edges[e].length);
        match (complex.edges[e].faces[0], complex.edges[e].faces[1]) {
            (Some(a), Some(b)) => net.add_undirected(a, b, cap),
            (Some(f), None) | (None, Some(f)) => to_sink[f] = to_sink[f] + cap,
            (None, None) => unreachable!("edge without faces"),
        }
    }
    for f in 0..n {
        if to_source[f] > F::zero() {
            net.add_edge(s, f, to_source[f]);
        }
        if to_sink[f] > F::zero() {
            net.add_edge(f, t, to_sink[f]);
        }
    }
    (net, s, t)
}

/// Exact minimizer of the length-regularized energy. Returns per-face
/// labels and the objective `sum c_f y_f + nu * boundary length`, matching
/// the LP objective of the length model (the constant data offset excluded).
pub fn segment_length_mincut<F: Scalar>(
    complex: &CellComplex,
    data_cost: &DataCost<F>,
    nu: F,
) -> Result<(Vec<u8>, F)> {
    if data_cost.per_face.len() != complex.faces.len() {
        return Err(Error::Model("data cost does not match complex".into()));
    }
    if nu < F::zero() {
        return Err(Error::Model("negative length weight".into()));
    }
    let (mut net, s, t) = build_network(complex, data_cost, nu);
    let flow = net.max_flow(s, t);
    let side = net.source_side(s);
    let labels: Vec<u8> = (0..complex.faces.len()).map(|f| side[f] as u8).collect();
    let paid_for_negative: F = data_cost
        .per_face
        .iter()
        .map(|&c| (-c).max(F::zero()))
        .sum();
    Ok((labels, flow - paid_for_negative))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::complex::{build_complex, Connectivity};
    use crate::energy::face_area_f;
    use crate::model::build_length_model;
    use crate::simplex::{solve_model, SolveStatus};
    use rand::{Rng, SeedableRng};

    #[test]
    fn textbook_max_flow() {
        // Classic 4-node diamond: s->a (3), s->b (2), a->b (1), a->t (2),
        // b->t (3); max flow 5.
        let mut net: FlowNetwork = FlowNetwork::new(4);
        let (s, a, b, t) = (0, 1, 2, 3);
        net.add_edge(s, a, 3.0);
        net.add_edge(s, b, 2.0);
        net.add_edge(a, b, 1.0);
        net.add_edge(a, t, 2.0);
        net.add_edge(b, t, 3.0);
        assert_eq!(net.max_flow(s, t), 5.0);
    }

    /// Brute-force minimum cut: try every source-side subset.
    fn brute_cut(n: usize, arcs: &[(usize, usize, f64)], s: usize, t: usize) -> f64 {
        let free: Vec<usize> = (0..n).filter(|&v| v != s && v != t).collect();
        let mut best = f64::INFINITY;
        for mask in 0..(1u32 << free.len()) {
            let mut side = vec![false; n];
            side[s] = true;
            for (b, &v) in free.iter().enumerate() {
                side[v] = mask >> b & 1 == 1;
            }
            let cut: f64 = arcs
                .iter()
                .filter(|&&(u, v, _)| side[u] && !side[v])
                .map(|&(_, _, c)| c)
                .sum();
            best = best.min(cut);
        }
        best
    }

    #[test]
    fn random_graphs_match_brute_force_cut() {
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(21);
        for _ in 0..25 {
            let n = rng.gen_range(4..=9);
            let (s, t) = (0, 1);
            let mut arcs = Vec::new();
            for u in 0..n {
                for v in 0..n {
                    if u != v && rng.gen_bool(0.4) {
                        arcs.push((u, v, rng.gen_range(0..=5) as f64));
                    }
                }
            }
            let mut net: FlowNetwork = FlowNetwork::new(n);
            for &(u, v, c) in &arcs {
                net.add_edge(u, v, c);
            }
            let flow = net.max_flow(s, t);
            let want = brute_cut(n, &arcs, s, t);
            assert!((flow - want).abs() < 1e-9, "flow {flow} vs cut {want}");
            // The residual source side must realize the same cut value.
            let side = net.source_side(s);
            let realized: f64 = arcs
                .iter()
                .filter(|&&(u, v, _)| side[u] && !side[v])
                .map(|&(_, _, c)| c)
                .sum();
            assert!((realized - want).abs() < 1e-9);
        }
    }

    fn random_data_cost(
        complex: &CellComplex,
        rng: &mut impl Rng,
    ) -> DataCost {
        let per_face = (0..complex.faces.len())
            .map(|f| rng.gen_range(-40..=40) as f64 * face_area_f::<f64>(complex, f))
            .collect();
        DataCost { per_face, constant_offset: 0.0 }
    }

    #[test]
    fn cut_objective_equals_length_lp_optimum() {
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(3);
        for conn in [Connectivity::Conn8, Connectivity::Conn16] {
            let c = build_complex(3, 2, conn).unwrap();
            for _ in 0..4 {
                let dc = random_data_cost(&c, &mut rng);
                let nu = rng.gen_range(1..=4) as f64 * 0.25;
                let (labels, cut_obj) = segment_length_mincut(&c, &dc, nu).unwrap();
                let (model, vm) = build_length_model(&c, &dc, nu);
                let lp = solve_model(&model).unwrap();
                assert_eq!(lp.status, SolveStatus::Optimal);
                assert!(
                    (lp.objective - cut_obj).abs() < 1e-6,
                    "LP {} vs cut {cut_obj}",
                    lp.objective
                );
                // The cut labeling evaluated through the LP objective must
                // reproduce the cut value (boundary vars from the jumps).
                let mut x = vec![0.0; model.num_vars()];
                for f in 0..c.faces.len() {
                    x[vm.region_var(f)] = labels[f] as f64;
                }
                for e in 0..c.edges.len() {
                    let jump: f64 = c.edges[e]
                        .faces
                        .iter()
                        .flatten()
                        .map(|&f| c.incidence_region(e, f) as f64 * labels[f] as f64)
                        .sum();
                    if jump > 0.5 {
                        x[vm.boundary_var(2 * e)] = 1.0;
                    } else if jump < -0.5 {
                        x[vm.boundary_var(2 * e + 1)] = 1.0;
                    }
                }
                assert!(model.max_row_violation(&x) < 1e-9);
                assert!((model.objective_value(&x) - cut_obj).abs() < 1e-6);
            }
        }
    }

    #[test]
    fn uniform_negative_cost_selects_everything() {
        let c = build_complex(2, 2, Connectivity::Conn8).unwrap();
        let per_face = (0..c.faces.len())
            .map(|f| -10.0 * face_area_f::<f64>(&c, f))
            .collect();
        let dc = DataCost { per_face, constant_offset: 0.0 };
        let (labels, obj): (Vec<u8>, f64) = segment_length_mincut(&c, &dc, 0.1).unwrap();
        assert!(labels.iter().all(|&l| l == 1));
        // All foreground: data -10 * area(4) plus 0.1 * perimeter(8).
        assert!((obj - (-40.0 + 0.8)).abs() < 1e-9);
    }
}
