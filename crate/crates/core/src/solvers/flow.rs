//! Exact maximum flow (Dinic) on networks with real capacities.

use std::collections::VecDeque;

use crate::error::{Error, Result};

#[derive(Debug, Clone)]
pub struct FlowNetwork {
    nodes: usize,
    source: usize,
    sink: usize,
    edges: Vec<(usize, usize, f64)>,
}

impl FlowNetwork {
    pub fn new(nodes: usize, source: usize, sink: usize) -> Result<Self> {
        if source >= nodes || sink >= nodes {
            return Err(Error::invalid("source and sink must be valid nodes"));
        }
        if source == sink {
            return Err(Error::invalid("source and sink must differ"));
        }
        Ok(FlowNetwork { nodes, source, sink, edges: Vec::new() })
    }

    pub fn add_edge(&mut self, from: usize, to: usize, capacity: f64) -> Result<()> {
        if from >= self.nodes || to >= self.nodes {
            return Err(Error::invalid(format!("edge ({from}, {to}) references a missing node")));
        }
        if !capacity.is_finite() || capacity < 0.0 {
            return Err(Error::invalid(format!("capacity {capacity} must be finite and nonnegative")));
        }
        self.edges.push((from, to, capacity));
        Ok(())
    }

    pub fn nodes(&self) -> usize {
        self.nodes
    }

    pub fn source(&self) -> usize {
        self.source
    }

    pub fn sink(&self) -> usize {
        self.sink
    }

    pub fn edges(&self) -> &[(usize, usize, f64)] {
        &self.edges
    }

    /// Total capacity of edges leaving `source_side`.
    pub fn cut_capacity(&self, source_side: &[bool]) -> f64 {
        self.edges.iter().filter(|&&(u, v, _)| source_side[u] && !source_side[v]).map(|&(_, _, c)| c).sum()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct FlowResult {
    pub value: f64,
    /// Nodes reachable from the source in the final residual graph
    /// (the smallest minimum-cut source side).
    pub source_side: Vec<bool>,
    /// Nodes that cannot reach the sink in the final residual graph
    /// (the largest minimum-cut source side).
    pub max_source_side: Vec<bool>,
}

struct Residual {
    head: Vec<usize>,
    cap: Vec<f64>,
    adj: Vec<Vec<usize>>,
    eps: f64,
}

impl Residual {
    fn build(net: &FlowNetwork) -> Self {
        let mut r = Residual {
            head: Vec::with_capacity(2 * net.edges.len()),
            cap: Vec::with_capacity(2 * net.edges.len()),
            adj: vec![Vec::new(); net.nodes],
            eps: 0.0,
        };
        let mut max_cap: f64 = 0.0;
        for &(u, v, c) in &net.edges {
            r.adj[u].push(r.head.len());
            r.head.push(v);
            r.cap.push(c);
            r.adj[v].push(r.head.len());
            r.head.push(u);
            r.cap.push(0.0);
            max_cap = max_cap.max(c);
        }
        r.eps = 1e-12 * max_cap.max(1.0);
        r
    }

    fn levels(&self, s: usize) -> Vec<usize> {
        let mut level = vec![usize::MAX; self.adj.len()];
        level[s] = 0;
        let mut queue = VecDeque::from([s]);
        while let Some(u) = queue.pop_front() {
            for &e in &self.adj[u] {
                let v = self.head[e];
                if self.cap[e] > self.eps && level[v] == usize::MAX {
                    level[v] = level[u] + 1;
                    queue.push_back(v);
                }
            }
        }
        level
    }

    fn augment(&mut self, u: usize, t: usize, pushed: f64, level: &[usize], iter: &mut [usize]) -> f64 {
        if u == t {
            return pushed;
        }
        while iter[u] < self.adj[u].len() {
            let e = self.adj[u][iter[u]];
            let v = self.head[e];
            if self.cap[e] > self.eps && level[v] == level[u] + 1 {
                let d = self.augment(v, t, pushed.min(self.cap[e]), level, iter);
                if d > 0.0 {
                    self.cap[e] -= d;
                    self.cap[e ^ 1] += d;
                    return d;
                }
            }
            iter[u] += 1;
        }
        0.0
    }

    fn reach_from(&self, s: usize) -> Vec<bool> {
        let mut seen = vec![false; self.adj.len()];
        seen[s] = true;
        let mut stack = vec![s];
        while let Some(u) = stack.pop() {
            for &e in &self.adj[u] {
                let v = self.head[e];
                if self.cap[e] > self.eps && !seen[v] {
                    seen[v] = true;
                    stack.push(v);
                }
            }
        }
        seen
    }

    /// Nodes with a residual path to `t`.
    fn reach_to(&self, t: usize) -> Vec<bool> {
        let mut seen = vec![false; self.adj.len()];
        seen[t] = true;
        let mut stack = vec![t];
        while let Some(v) = stack.pop() {
            // edge u->v has residual capacity cap[e ^ 1] where e is v's reverse slot
            for &e in &self.adj[v] {
                let u = self.head[e];
                if self.cap[e ^ 1] > self.eps && !seen[u] {
                    seen[u] = true;
                    stack.push(u);
                }
            }
        }
        seen
    }
}

pub fn max_flow(net: &FlowNetwork) -> FlowResult {
    let mut r = Residual::build(net);
    let (s, t) = (net.source, net.sink);
    let mut value = 0.0;
    loop {
        let level = r.levels(s);
        if level[t] == usize::MAX {
            break;
        }
        let mut iter = vec![0; net.nodes];
        loop {
            let d = r.augment(s, t, f64::INFINITY, &level, &mut iter);
            if d <= 0.0 {
                break;
            }
            value += d;
        }
    }
    let source_side = r.reach_from(s);
    let max_source_side = r.reach_to(t).into_iter().map(|b| !b).collect();
    FlowResult { value, source_side, max_source_side }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::gumbel::RngStream;

    fn exhaustive_min_cut(net: &FlowNetwork) -> f64 {
        let inner: Vec<usize> = (0..net.nodes()).filter(|&v| v != net.source() && v != net.sink()).collect();
        let mut best = f64::INFINITY;
        for mask in 0u32..(1 << inner.len()) {
            let mut side = vec![false; net.nodes()];
            side[net.source()] = true;
            for (k, &v) in inner.iter().enumerate() {
                side[v] = mask >> k & 1 == 1;
            }
            best = best.min(net.cut_capacity(&side));
        }
        best
    }

    #[test]
    fn single_edge() {
        let mut net = FlowNetwork::new(2, 0, 1).unwrap();
        net.add_edge(0, 1, 7.0).unwrap();
        let r = max_flow(&net);
        assert_eq!(r.value, 7.0);
        assert_eq!(r.source_side, vec![true, false]);
    }

    #[test]
    fn diamond() {
        // s=0, a=1, b=2, t=3
        let mut net = FlowNetwork::new(4, 0, 3).unwrap();
        net.add_edge(0, 1, 3.0).unwrap();
        net.add_edge(0, 2, 2.0).unwrap();
        net.add_edge(1, 3, 2.0).unwrap();
        net.add_edge(2, 3, 3.0).unwrap();
        let r = max_flow(&net);
        assert!((r.value - 4.0).abs() < 1e-12);
        assert!((exhaustive_min_cut(&net) - 4.0).abs() < 1e-12);
        assert!((net.cut_capacity(&r.source_side) - r.value).abs() < 1e-12);
    }

    #[test]
    fn random_networks_match_exhaustive_cuts() {
        let mut rng = RngStream::new(17, 0);
        for trial in 0..3 {
            let nodes = 20;
            let mut net = FlowNetwork::new(nodes, 0, nodes - 1).unwrap();
            for u in 0..nodes {
                for v in 0..nodes {
                    if u != v && rng.unit() < 0.2 {
                        net.add_edge(u, v, rng.uniform(0.0, 10.0)).unwrap();
                    }
                }
            }
            let r = max_flow(&net);
            let oracle = exhaustive_min_cut(&net);
            assert!((r.value - oracle).abs() < 1e-9, "trial {trial}: {} vs {oracle}", r.value);
            assert!((net.cut_capacity(&r.source_side) - r.value).abs() < 1e-9);
            assert!((net.cut_capacity(&r.max_source_side) - r.value).abs() < 1e-9);
        }
    }

    #[test]
    fn rejects_invalid_networks() {
        assert!(FlowNetwork::new(2, 0, 0).is_err());
        let mut net = FlowNetwork::new(2, 0, 1).unwrap();
        assert!(net.add_edge(0, 1, -1.0).is_err());
        assert!(net.add_edge(0, 5, 1.0).is_err());
        assert!(net.add_edge(0, 1, f64::INFINITY).is_err());
    }
}
