//! Dinic's maximum flow, used for maximum-weight closures.

use std::collections::VecDeque;

pub const INF: i64 = i64::MAX / 4;

#[derive(Clone, Debug)]
struct Edge {
    to: usize,
    cap: i64,
}

#[derive(Clone, Debug)]
pub struct FlowNetwork {
    edges: Vec<Edge>,
    adj: Vec<Vec<usize>>,
}

impl FlowNetwork {
    pub fn new(nodes: usize) -> Self {
        FlowNetwork {
            edges: Vec::new(),
            adj: vec![Vec::new(); nodes],
        }
    }

    pub fn add_edge(&mut self, from: usize, to: usize, cap: i64) {
        self.adj[from].push(self.edges.len());
        self.edges.push(Edge { to, cap });
        self.adj[to].push(self.edges.len());
        self.edges.push(Edge { to: from, cap: 0 });
    }

    fn levels(&self, s: usize) -> Vec<Option<usize>> {
        let mut level = vec![None; self.adj.len()];
        level[s] = Some(0);
        let mut queue = VecDeque::from([s]);
        while let Some(u) = queue.pop_front() {
            for &e in &self.adj[u] {
                let Edge { to, cap } = self.edges[e];
                if cap > 0 && level[to].is_none() {
                    level[to] = level[u].map(|l| l + 1);
                    queue.push_back(to);
                }
            }
        }
        level
    }

    fn push(
        &mut self,
        u: usize,
        t: usize,
        limit: i64,
        level: &[Option<usize>],
        next: &mut [usize],
    ) -> i64 {
        if u == t {
            return limit;
        }
        while next[u] < self.adj[u].len() {
            let e = self.adj[u][next[u]];
            let Edge { to, cap } = self.edges[e];
            if cap > 0 && level[to] == level[u].map(|l| l + 1) {
                let pushed = self.push(to, t, limit.min(cap), level, next);
                if pushed > 0 {
                    self.edges[e].cap -= pushed;
                    self.edges[e ^ 1].cap += pushed;
                    return pushed;
                }
            }
            next[u] += 1;
        }
        0
    }

    pub fn max_flow(&mut self, s: usize, t: usize) -> i64 {
        let mut total = 0;
        loop {
            let level = self.levels(s);
            if level[t].is_none() {
                return total;
            }
            let mut next = vec![0; self.adj.len()];
            loop {
                let pushed = self.push(s, t, INF, &level, &mut next);
                if pushed == 0 {
                    break;
                }
                total += pushed;
            }
        }
    }

    /// Nodes reachable from `s` in the residual network.
    pub fn source_side(&self, s: usize) -> Vec<bool> {
        self.levels(s).into_iter().map(|l| l.is_some()).collect()
    }
}

/// A maximum-profit subset closed under `requires` (choosing `v` forces
/// every `requires[v]`), together with its profit. Among optimal subsets the
/// smallest is returned.
pub fn max_weight_closure(profit: &[i64], requires: &[Vec<usize>]) -> (Vec<bool>, i64) {
    let n = profit.len();
    let (s, t) = (n, n + 1);
    let mut net = FlowNetwork::new(n + 2);
    let mut positive = 0;
    for (v, &p) in profit.iter().enumerate() {
        if p > 0 {
            net.add_edge(s, v, p);
            positive += p;
        } else if p < 0 {
            net.add_edge(v, t, -p);
        }
        for &u in &requires[v] {
            net.add_edge(v, u, INF);
        }
    }
    let cut = net.max_flow(s, t);
    let side = net.source_side(s);
    (side[..n].to_vec(), positive - cut)
}
