//! Integral maximum flow, with or without lower bounds (demands) on edges.
//!
//! Augmenting paths are found by BFS (Edmonds-Karp); neighbours are scanned in increasing node
//! id, so results are deterministic. Infinite capacities stay symbolic.

use std::collections::VecDeque;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
pub enum Capacity {
    Finite(u64),
    Infinite,
}

impl Capacity {
    fn admits(self, flow: u64) -> bool {
        match self {
            Capacity::Finite(c) => flow <= c,
            Capacity::Infinite => true,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FlowEdge {
    pub from: usize,
    pub to: usize,
    pub capacity: Capacity,
    pub demand: u64,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FlowNetwork {
    nodes: usize,
    source: usize,
    sink: usize,
    edges: Vec<FlowEdge>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct IntegralFlow {
    pub flows: Vec<u64>,
    pub value: u64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, thiserror::Error)]
#[error("no flow satisfies all edge demands")]
pub struct InfeasibleDemands;

impl FlowNetwork {
    /// A network with nodes `0` (source) and `1` (sink).
    pub fn new() -> Self {
        FlowNetwork { nodes: 2, source: 0, sink: 1, edges: Vec::new() }
    }

    pub fn source(&self) -> usize {
        self.source
    }

    pub fn sink(&self) -> usize {
        self.sink
    }

    pub fn num_nodes(&self) -> usize {
        self.nodes
    }

    pub fn num_edges(&self) -> usize {
        self.edges.len()
    }

    pub fn edges(&self) -> &[FlowEdge] {
        &self.edges
    }

    pub fn add_node(&mut self) -> usize {
        self.nodes += 1;
        self.nodes - 1
    }

    pub fn add_edge(&mut self, from: usize, to: usize, capacity: Capacity) -> usize {
        self.add_edge_with_demand(from, to, capacity, 0)
    }

    pub fn add_edge_with_demand(&mut self, from: usize, to: usize, capacity: Capacity, demand: u64) -> usize {
        assert!(from < self.nodes && to < self.nodes, "edge endpoints must exist");
        assert!(capacity.admits(demand), "demand exceeds capacity");
        self.edges.push(FlowEdge { from, to, capacity, demand });
        self.edges.len() - 1
    }

    /// Net flow leaving the source.
    pub fn flow_value(&self, flows: &[u64]) -> i128 {
        self.edges.iter().zip(flows).fold(0i128, |acc, (e, &f)| {
            let f = f as i128;
            match (e.from == self.source, e.to == self.source) {
                (true, false) => acc + f,
                (false, true) => acc - f,
                _ => acc,
            }
        })
    }

    /// Box constraints on every edge and conservation everywhere except source and sink.
    pub fn is_valid_flow(&self, flow: &IntegralFlow) -> bool {
        if flow.flows.len() != self.edges.len() {
            return false;
        }
        let mut balance = vec![0i128; self.nodes];
        for (e, &f) in self.edges.iter().zip(&flow.flows) {
            if f < e.demand || !e.capacity.admits(f) {
                return false;
            }
            balance[e.from] -= f as i128;
            balance[e.to] += f as i128;
        }
        let conserved = (0..self.nodes).all(|v| v == self.source || v == self.sink || balance[v] == 0);
        conserved && self.flow_value(&flow.flows) == flow.value as i128
    }
}

impl Default for FlowNetwork {
    fn default() -> Self {
        Self::new()
    }
}

/// Maximum flow in a network without demands. Edges leaving the source must be finite.
pub fn max_flow_integral(net: &FlowNetwork) -> IntegralFlow {
    assert!(net.edges.iter().all(|e| e.demand == 0), "use feasible_flow_with_demands for demands");
    let mut residual = Residual::new(net.nodes, &net.edges, vec![0; net.edges.len()]);
    residual.augment_all(net.source, net.sink);
    let flows = residual.flows;
    let value = u64::try_from(net.flow_value(&flows)).expect("max flow is nonnegative");
    IntegralFlow { flows, value }
}

/// Maximum flow subject to `demand <= flow <= capacity` on every edge.
///
/// Phase one finds any feasible flow: demands are subtracted from capacities and turned into
/// node excesses served by a super source and super sink, with an uncapacitated sink-to-source
/// edge closing the circulation. Phase two augments that flow to a maximum one without letting
/// any edge drop below its demand.
pub fn feasible_flow_with_demands(net: &FlowNetwork) -> Result<IntegralFlow, InfeasibleDemands> {
    if net.edges.iter().any(|e| !e.capacity.admits(e.demand)) {
        return Err(InfeasibleDemands);
    }
    let n = net.nodes;
    let super_source = n;
    let super_sink = n + 1;
    let mut excess = vec![0i128; n];
    let mut edges: Vec<FlowEdge> = net
        .edges
        .iter()
        .map(|e| {
            excess[e.to] += e.demand as i128;
            excess[e.from] -= e.demand as i128;
            let capacity = match e.capacity {
                Capacity::Finite(c) => Capacity::Finite(c - e.demand),
                Capacity::Infinite => Capacity::Infinite,
            };
            FlowEdge { from: e.from, to: e.to, capacity, demand: 0 }
        })
        .collect();
    let closing = edges.len();
    edges.push(FlowEdge { from: net.sink, to: net.source, capacity: Capacity::Infinite, demand: 0 });
    let mut required: u64 = 0;
    for (v, &x) in excess.iter().enumerate() {
        if x > 0 {
            edges.push(FlowEdge { from: super_source, to: v, capacity: Capacity::Finite(x as u64), demand: 0 });
            required += x as u64;
        } else if x < 0 {
            edges.push(FlowEdge { from: v, to: super_sink, capacity: Capacity::Finite((-x) as u64), demand: 0 });
        }
    }
    let mut phase_one = Residual::new(n + 2, &edges, vec![0; edges.len()]);
    let served = phase_one.augment_all(super_source, super_sink);
    if served < required {
        return Err(InfeasibleDemands);
    }

    let flows: Vec<u64> = net.edges.iter().zip(&phase_one.flows).map(|(e, &f)| f + e.demand).collect();
    debug_assert!(phase_one.flows[closing] as i128 == net.flow_value(&flows));

    let mut phase_two = Residual::new(n, &net.edges, flows);
    phase_two.augment_all(net.source, net.sink);
    let flows = phase_two.flows;
    let value = u64::try_from(net.flow_value(&flows)).expect("flow value is nonnegative");
    Ok(IntegralFlow { flows, value })
}

/// Residual view over an edge list. Arc `2e` is edge `e` forward, arc `2e + 1` its reverse.
struct Residual<'a> {
    edges: &'a [FlowEdge],
    flows: Vec<u64>,
    adjacency: Vec<Vec<usize>>,
}

impl<'a> Residual<'a> {
    fn new(nodes: usize, edges: &'a [FlowEdge], flows: Vec<u64>) -> Self {
        let mut adjacency = vec![Vec::new(); nodes];
        for (e, edge) in edges.iter().enumerate() {
            adjacency[edge.from].push(2 * e);
            adjacency[edge.to].push(2 * e + 1);
        }
        for (v, arcs) in adjacency.iter_mut().enumerate() {
            arcs.sort_by_key(|&a| (Self::head_of(edges, a, v), a));
        }
        Residual { edges, flows, adjacency }
    }

    fn head_of(edges: &[FlowEdge], arc: usize, tail: usize) -> usize {
        let e = &edges[arc / 2];
        if arc % 2 == 0 {
            e.to
        } else {
            debug_assert_eq!(e.to, tail);
            e.from
        }
    }

    /// `None` stands for unlimited residual capacity.
    fn residual(&self, arc: usize) -> Option<u64> {
        let e = &self.edges[arc / 2];
        let f = self.flows[arc / 2];
        if arc % 2 == 0 {
            match e.capacity {
                Capacity::Finite(c) => Some(c - f),
                Capacity::Infinite => None,
            }
        } else {
            Some(f - e.demand)
        }
    }

    fn augment_all(&mut self, s: usize, t: usize) -> u64 {
        let mut total = 0u64;
        while let Some(path) = self.shortest_path(s, t) {
            let bottleneck = path
                .iter()
                .filter_map(|&a| self.residual(a))
                .min()
                .expect("augmenting path of unbounded capacity");
            for &a in &path {
                if a % 2 == 0 {
                    self.flows[a / 2] += bottleneck;
                } else {
                    self.flows[a / 2] -= bottleneck;
                }
            }
            total += bottleneck;
        }
        total
    }

    fn shortest_path(&self, s: usize, t: usize) -> Option<Vec<usize>> {
        let mut parent: Vec<Option<usize>> = vec![None; self.adjacency.len()];
        let mut seen = vec![false; self.adjacency.len()];
        seen[s] = true;
        let mut queue = VecDeque::from([s]);
        while let Some(v) = queue.pop_front() {
            if v == t {
                break;
            }
            for &a in &self.adjacency[v] {
                if self.residual(a) == Some(0) {
                    continue;
                }
                let w = Self::head_of(self.edges, a, v);
                if !seen[w] {
                    seen[w] = true;
                    parent[w] = Some(a);
                    queue.push_back(w);
                }
            }
        }
        if !seen[t] {
            return None;
        }
        let mut path = Vec::new();
        let mut v = t;
        while v != s {
            let a = parent[v].expect("BFS tree");
            path.push(a);
            let e = &self.edges[a / 2];
            v = if a % 2 == 0 { e.from } else { e.to };
        }
        path.reverse();
        Some(path)
    }
}
