//! Capacity analysis: exact max-flow/min-cut, multicast capacity, and
//! conformal path decomposition.
//!
//! All arithmetic is over exact rationals; the duality and oracle tests
//! require rational equality, not float closeness. Wireline networks are
//! handled directly. Wireless min cuts go through an expanded graph: for each
//! hyperarc (i, J) and reception set K with positive rate, a virtual node v
//! is added with an arc i -> v of capacity z_iJK and arcs v -> j of
//! effectively infinite capacity for every j in K. A virtual node then sits
//! on the source side of a minimum cut exactly when K does, which makes the
//! expanded min cut equal the hypergraph cut value
//! sum over i in Q of sum over K not contained in Q of z_iJK.

use crate::network::{Network, NetworkKind, NodeId};
use crate::rate::Rate;
use num_traits::{One, Zero};
use std::collections::{BTreeMap, VecDeque};
use thiserror::Error;

#[derive(Debug, Error, PartialEq, Eq)]
pub enum FlowError {
    #[error("source and sink coincide")]
    SameEndpoints,
    #[error("node id {0} not in network")]
    MissingNode(NodeId),
    #[error("operation requires a wireline network")]
    NotWireline,
    #[error("sink set is empty")]
    NoSinks,
    #[error("source is listed as a sink")]
    SourceIsSink,
    #[error("flow support contains a cycle")]
    CyclicFlow,
    #[error("flow violates conservation at node {0}")]
    NotConserved(NodeId),
}

/// A feasible s-t flow on a wireline network, aggregated per ordered node
/// pair (parallel arcs share their combined capacity).
///
/// Freshly computed flows can contain directed cycles in their support when
/// augmentation cancels around opposing arcs; [`remove_cycles`] strips them
/// without changing the value, and [`decompose_paths`] requires acyclic
/// input.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FlowVector {
    pub source: NodeId,
    pub sink: NodeId,
    pub value: Rate,
    /// Strictly positive flow per (head, tail) pair.
    pub flows: BTreeMap<(NodeId, NodeId), Rate>,
}

/// A cut separating the source side Q from the sink side.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Cut {
    /// Nodes on the source side, sorted ascending. Contains s, excludes t.
    pub q_side: Vec<NodeId>,
    /// Forward capacity of the cut: sum of z over crossing arcs, or the
    /// hypergraph formula for wireless networks.
    pub capacity: Rate,
}

/// Simple paths with positive rates whose per-arc sums reproduce a flow.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FlowDecomposition {
    pub paths: Vec<FlowPath>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FlowPath {
    pub nodes: Vec<NodeId>,
    pub rate: Rate,
}

impl FlowDecomposition {
    /// Total rate carried by all paths.
    pub fn total_rate(&self) -> Rate {
        let mut acc = Rate::zero();
        for p in &self.paths {
            acc += &p.rate;
        }
        acc
    }
}

/// Directed capacity graph for the exact Edmonds-Karp solver.
struct CapacityGraph {
    n: usize,
    cap: BTreeMap<(usize, usize), Rate>,
    adj: Vec<Vec<usize>>,
}

impl CapacityGraph {
    fn new(n: usize) -> Self {
        CapacityGraph { n, cap: BTreeMap::new(), adj: vec![Vec::new(); n] }
    }

    fn add_node(&mut self) -> usize {
        self.adj.push(Vec::new());
        self.n += 1;
        self.n - 1
    }

    fn add_capacity(&mut self, u: usize, v: usize, z: &Rate) {
        if z.is_zero() {
            return;
        }
        let entry = self.cap.entry((u, v)).or_insert_with(Rate::zero);
        if entry.is_zero() {
            // First capacity on this pair: make it traversable both ways for
            // the residual search.
            if !self.adj[u].contains(&v) {
                self.adj[u].push(v);
            }
            if !self.adj[v].contains(&u) {
                self.adj[v].push(u);
            }
        }
        *entry += z;
    }

    fn finish(&mut self) {
        // Deterministic neighbor order keeps augmenting-path choices, and
        // therefore extracted cuts, reproducible.
        for nbrs in &mut self.adj {
            nbrs.sort_unstable();
            nbrs.dedup();
        }
    }

    fn capacity(&self, u: usize, v: usize) -> Rate {
        self.cap.get(&(u, v)).cloned().unwrap_or_else(Rate::zero)
    }

    /// Exact Edmonds-Karp. Returns the flow value, the per-pair flow, and the
    /// set of nodes reachable from s in the final residual graph.
    fn max_flow(&self, s: usize, t: usize) -> (Rate, BTreeMap<(usize, usize), Rate>, Vec<bool>) {
        let mut flow: BTreeMap<(usize, usize), Rate> = BTreeMap::new();
        let get = |m: &BTreeMap<(usize, usize), Rate>, u: usize, v: usize| {
            m.get(&(u, v)).cloned().unwrap_or_else(Rate::zero)
        };
        let mut value = Rate::zero();
        loop {
            // BFS over positive residual capacity.
            let mut parent: Vec<Option<usize>> = vec![None; self.n];
            let mut seen = vec![false; self.n];
            seen[s] = true;
            let mut queue = VecDeque::from([s]);
            while let Some(u) = queue.pop_front() {
                for &v in &self.adj[u] {
                    if !seen[v] {
                        let residual = self.capacity(u, v) - get(&flow, u, v) + get(&flow, v, u);
                        if residual > Rate::zero() {
                            seen[v] = true;
                            parent[v] = Some(u);
                            queue.push_back(v);
                        }
                    }
                }
            }
            if !seen[t] {
                return (value, flow, seen);
            }
            // Bottleneck along the BFS path.
            let mut path = Vec::new();
            let mut v = t;
            while let Some(u) = parent[v] {
                path.push((u, v));
                v = u;
            }
            path.reverse();
            let mut push: Option<Rate> = None;
            for &(u, v) in &path {
                let residual = self.capacity(u, v) - get(&flow, u, v) + get(&flow, v, u);
                push = Some(match push {
                    None => residual,
                    Some(p) if residual < p => residual,
                    Some(p) => p,
                });
            }
            let push = push.expect("path is non-empty");
            // Apply: cancel opposing flow before adding forward flow, so the
            // stored flow never carries both directions of a pair.
            for &(u, v) in &path {
                let reverse = get(&flow, v, u);
                let cancel = if reverse < push { reverse } else { push.clone() };
                if !cancel.is_zero() {
                    let r = flow.get_mut(&(v, u)).expect("reverse flow exists");
                    *r -= &cancel;
                    if r.is_zero() {
                        flow.remove(&(v, u));
                    }
                }
                let forward = &push - &cancel;
                if !forward.is_zero() {
                    *flow.entry((u, v)).or_insert_with(Rate::zero) += forward;
                }
            }
            value += push;
        }
    }
}

fn check_nodes(net: &Network, nodes: &[NodeId]) -> Result<(), FlowError> {
    for &n in nodes {
        if n >= net.node_count() {
            return Err(FlowError::MissingNode(n));
        }
    }
    Ok(())
}

fn wireline_graph(net: &Network) -> CapacityGraph {
    let mut g = CapacityGraph::new(net.node_count());
    for arc in net.arcs() {
        g.add_capacity(arc.head, arc.tail, &arc.z);
    }
    g.finish();
    g
}

/// Expanded graph for a wireless network plus, per virtual node, the
/// (head, mask) it represents.
fn wireless_expanded_graph(net: &Network) -> CapacityGraph {
    let mut g = CapacityGraph::new(net.node_count());
    let mut total = Rate::zero();
    for ha in net.hyperarcs() {
        for z in ha.receptions.values() {
            total += z;
        }
    }
    let infinite = total + Rate::one();
    let mut pending = Vec::new();
    for ha in net.hyperarcs() {
        for (mask, z) in &ha.receptions {
            if z.is_zero() {
                continue;
            }
            pending.push((ha.head, ha.nodes_of_mask(*mask), z.clone()));
        }
    }
    for (head, members, z) in pending {
        let v = g.add_node();
        g.add_capacity(head, v, &z);
        for j in members {
            g.add_capacity(v, j, &infinite);
        }
    }
    g.finish();
    g
}

/// Maximum s-t flow on a wireline network. The value equals
/// [`min_cut_capacity`]; the flow map is aggregated per node pair.
pub fn max_flow(net: &Network, s: NodeId, t: NodeId) -> Result<FlowVector, FlowError> {
    if net.kind() != NetworkKind::Wireline {
        return Err(FlowError::NotWireline);
    }
    check_nodes(net, &[s, t])?;
    if s == t {
        return Err(FlowError::SameEndpoints);
    }
    let g = wireline_graph(net);
    let (value, flow, _) = g.max_flow(s, t);
    Ok(FlowVector { source: s, sink: t, value, flows: flow })
}

/// Minimum s-t cut. Works for both network kinds; wireless networks go
/// through the expanded-graph reduction.
pub fn min_cut(net: &Network, s: NodeId, t: NodeId) -> Result<Cut, FlowError> {
    check_nodes(net, &[s, t])?;
    if s == t {
        return Err(FlowError::SameEndpoints);
    }
    let (graph, real_nodes) = match net.kind() {
        NetworkKind::Wireline => (wireline_graph(net), net.node_count()),
        NetworkKind::Wireless => (wireless_expanded_graph(net), net.node_count()),
    };
    let (value, _, reachable) = graph.max_flow(s, t);
    let q_side: Vec<NodeId> = (0..real_nodes).filter(|&n| reachable[n]).collect();
    let capacity = cut_capacity(net, &q_side);
    debug_assert_eq!(capacity, value);
    Ok(Cut { q_side, capacity: value })
}

/// Forward capacity of an explicit cut Q, by the defining formula.
pub fn cut_capacity(net: &Network, q_side: &[NodeId]) -> Rate {
    let in_q = |n: NodeId| q_side.contains(&n);
    let mut acc = Rate::zero();
    match net.kind() {
        NetworkKind::Wireline => {
            for arc in net.arcs() {
                if in_q(arc.head) && !in_q(arc.tail) {
                    acc += &arc.z;
                }
            }
        }
        NetworkKind::Wireless => {
            for ha in net.hyperarcs() {
                if !in_q(ha.head) {
                    continue;
                }
                for (mask, z) in &ha.receptions {
                    let fully_inside = ha
                        .nodes_of_mask(*mask)
                        .into_iter()
                        .all(in_q);
                    if !fully_inside {
                        acc += z;
                    }
                }
            }
        }
    }
    acc
}

/// Min-cut capacity between s and t.
pub fn min_cut_capacity(net: &Network, s: NodeId, t: NodeId) -> Result<Rate, FlowError> {
    Ok(min_cut(net, s, t)?.capacity)
}

/// Multicast capacity: the smallest per-sink min cut.
pub fn multicast_capacity(net: &Network, s: NodeId, sinks: &[NodeId]) -> Result<Rate, FlowError> {
    if sinks.is_empty() {
        return Err(FlowError::NoSinks);
    }
    if sinks.contains(&s) {
        return Err(FlowError::SourceIsSink);
    }
    let mut best: Option<Rate> = None;
    for &t in sinks {
        let c = min_cut_capacity(net, s, t)?;
        best = Some(match best {
            None => c,
            Some(b) if c < b => c,
            Some(b) => b,
        });
    }
    Ok(best.expect("sinks non-empty"))
}

fn positive_out_neighbors(
    flows: &BTreeMap<(NodeId, NodeId), Rate>,
    u: NodeId,
) -> Vec<NodeId> {
    // BTreeMap order makes this ascending in the neighbor id, which is the
    // documented deterministic tie-break.
    flows
        .range((u, 0)..(u + 1, 0))
        .filter(|(_, z)| !z.is_zero())
        .map(|(&(_, v), _)| v)
        .collect()
}

/// Finds a directed cycle in the flow support, if any, as a node sequence
/// with identical first and last element.
fn find_cycle(flows: &BTreeMap<(NodeId, NodeId), Rate>) -> Option<Vec<NodeId>> {
    let nodes: Vec<NodeId> = flows.keys().map(|&(u, _)| u).collect();
    let mut state: BTreeMap<NodeId, u8> = BTreeMap::new(); // 1 = on stack, 2 = done
    for &start in &nodes {
        if state.contains_key(&start) {
            continue;
        }
        // Iterative DFS with explicit stack of (node, next neighbor index).
        let mut stack: Vec<(NodeId, Vec<NodeId>, usize)> = Vec::new();
        state.insert(start, 1);
        stack.push((start, positive_out_neighbors(flows, start), 0));
        while let Some((u, nbrs, idx)) = stack.last_mut() {
            if *idx >= nbrs.len() {
                state.insert(*u, 2);
                stack.pop();
                continue;
            }
            let v = nbrs[*idx];
            *idx += 1;
            match state.get(&v) {
                Some(1) => {
                    // Found a cycle: unwind the stack back to v.
                    let mut cycle: Vec<NodeId> =
                        stack.iter().map(|(n, _, _)| *n).collect();
                    let pos = cycle.iter().position(|&n| n == v).expect("v on stack");
                    cycle.drain(..pos);
                    cycle.push(v);
                    return Some(cycle);
                }
                Some(_) => {}
                None => {
                    state.insert(v, 1);
                    stack.push((v, positive_out_neighbors(flows, v), 0));
                }
            }
        }
    }
    None
}

/// Subtracts flow around directed cycles until the support is acyclic. The
/// flow value and net conservation are unchanged.
pub fn remove_cycles(f: &FlowVector) -> FlowVector {
    let mut flows = f.flows.clone();
    flows.retain(|_, z| !z.is_zero());
    while let Some(cycle) = find_cycle(&flows) {
        let mut bottleneck: Option<Rate> = None;
        for w in cycle.windows(2) {
            let z = flows[&(w[0], w[1])].clone();
            bottleneck = Some(match bottleneck {
                None => z,
                Some(b) if z < b => z,
                Some(b) => b,
            });
        }
        let b = bottleneck.expect("cycle has arcs");
        for w in cycle.windows(2) {
            let entry = flows.get_mut(&(w[0], w[1])).expect("cycle arc");
            *entry -= &b;
            if entry.is_zero() {
                flows.remove(&(w[0], w[1]));
            }
        }
    }
    FlowVector {
        source: f.source,
        sink: f.sink,
        value: f.value.clone(),
        flows,
    }
}

fn check_conservation(f: &FlowVector) -> Result<(), FlowError> {
    let mut balance: BTreeMap<NodeId, Rate> = BTreeMap::new();
    for (&(u, v), z) in &f.flows {
        *balance.entry(u).or_insert_with(Rate::zero) += z;
        *balance.entry(v).or_insert_with(Rate::zero) -= z;
    }
    for (&n, b) in &balance {
        let expected = if n == f.source {
            f.value.clone()
        } else if n == f.sink {
            -f.value.clone()
        } else {
            Rate::zero()
        };
        if *b != expected {
            return Err(FlowError::NotConserved(n));
        }
    }
    if f.flows.is_empty() && !f.value.is_zero() {
        return Err(FlowError::NotConserved(f.source));
    }
    Ok(())
}

/// Decomposes an acyclic flow into simple s-t paths with positive rates.
/// Paths are extracted deterministically: depth-first, always following the
/// lowest-numbered node with remaining flow, carrying the bottleneck rate.
pub fn decompose_paths(f: &FlowVector) -> Result<FlowDecomposition, FlowError> {
    check_conservation(f)?;
    let mut flows = f.flows.clone();
    flows.retain(|_, z| !z.is_zero());
    if find_cycle(&flows).is_some() {
        return Err(FlowError::CyclicFlow);
    }
    let mut paths = Vec::new();
    let mut remaining = f.value.clone();
    while !remaining.is_zero() {
        // Conservation guarantees a positive-flow path from s reaches t.
        let mut nodes = vec![f.source];
        let mut u = f.source;
        while u != f.sink {
            let next = *positive_out_neighbors(&flows, u)
                .first()
                .expect("conserved positive flow leaves every non-sink node");
            nodes.push(next);
            u = next;
        }
        let mut bottleneck: Option<Rate> = None;
        for w in nodes.windows(2) {
            let z = flows[&(w[0], w[1])].clone();
            bottleneck = Some(match bottleneck {
                None => z,
                Some(b) if z < b => z,
                Some(b) => b,
            });
        }
        let rate = bottleneck.expect("path has arcs");
        for w in nodes.windows(2) {
            let entry = flows.get_mut(&(w[0], w[1])).expect("path arc");
            *entry -= &rate;
            if entry.is_zero() {
                flows.remove(&(w[0], w[1]));
            }
        }
        remaining -= &rate;
        paths.push(FlowPath { nodes, rate });
    }
    Ok(FlowDecomposition { paths })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::network::Network;
    use crate::rate::parse_rate;
    use num_bigint::BigInt;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn rat(s: &str) -> Rate {
        parse_rate(s).unwrap()
    }

    /// Brute-force min cut by enumerating every node subset containing s and
    /// excluding t; independent of the solver.
    fn enumerate_min_cut(net: &Network, s: NodeId, t: NodeId) -> Rate {
        let n = net.node_count();
        let mut best: Option<Rate> = None;
        for mask in 0u32..(1 << n) {
            if mask & (1 << s) == 0 || mask & (1 << t) != 0 {
                continue;
            }
            let q: Vec<NodeId> = (0..n).filter(|&i| mask & (1 << i) != 0).collect();
            let cap = cut_capacity(net, &q);
            best = Some(match best {
                None => cap,
                Some(b) if cap < b => cap,
                Some(b) => b,
            });
        }
        best.expect("at least Q = {s}")
    }

    #[test]
    fn single_arc_value() {
        let net = Network::parse("node s; node t; arc s t 2.5").unwrap();
        let f = max_flow(&net, 0, 1).unwrap();
        assert_eq!(f.value, rat("2.5"));
        assert_eq!(min_cut_capacity(&net, 0, 1).unwrap(), rat("2.5"));
    }

    #[test]
    fn bottleneck_path() {
        let net = Network::parse("node s; node a; node t; arc s a 3; arc a t 1").unwrap();
        assert_eq!(min_cut_capacity(&net, 0, 2).unwrap(), rat("1"));
    }

    #[test]
    fn two_parallel_two_hop_paths() {
        let net = Network::parse(
            "node s; node a; node b; node t; arc s a 1; arc a t 1; arc s b 1; arc b t 1",
        )
        .unwrap();
        let f = max_flow(&net, 0, 3).unwrap();
        assert_eq!(f.value, rat("2"));
        assert_eq!(enumerate_min_cut(&net, 0, 3), rat("2"));
    }

    #[test]
    fn disconnected_pair_has_zero_flow() {
        let net = Network::parse("node s; node t; node u; arc s u 4").unwrap();
        let f = max_flow(&net, 0, 1).unwrap();
        assert_eq!(f.value, Rate::zero());
        assert!(f.flows.is_empty());
    }

    #[test]
    fn wireless_broadcast_example() {
        let net = Network::parse(
            "node s; node t1; node t2; hyperarc s {t1 t2} {t1}=1 {t2}=1 {t1 t2}=1",
        )
        .unwrap();
        let t1 = net.node_id("t1").unwrap();
        // Cut Q = {s, t2}: reception sets {t1} and {t1 t2} leave Q.
        assert_eq!(min_cut_capacity(&net, 0, t1).unwrap(), rat("2"));
    }

    #[test]
    fn min_cut_reports_cut_set() {
        let net = Network::parse("node s; node a; node t; arc s a 5; arc a t 2").unwrap();
        let cut = min_cut(&net, 0, 2).unwrap();
        assert_eq!(cut.capacity, rat("2"));
        assert_eq!(cut.q_side, vec![0, 1]);
        assert_eq!(cut_capacity(&net, &cut.q_side), rat("2"));
    }

    #[test]
    fn multicast_takes_min_over_sinks() {
        let net = Network::parse(
            "node s; node t1; node t2; arc s t1 2; arc s t2 3",
        )
        .unwrap();
        assert_eq!(multicast_capacity(&net, 0, &[1]).unwrap(), rat("2"));
        assert_eq!(multicast_capacity(&net, 0, &[1, 2]).unwrap(), rat("2"));
        assert_eq!(
            multicast_capacity(&net, 0, &[]).unwrap_err(),
            FlowError::NoSinks
        );
        assert_eq!(
            multicast_capacity(&net, 0, &[0, 1]).unwrap_err(),
            FlowError::SourceIsSink
        );
    }

    #[test]
    fn butterfly_multicast_capacity_is_two() {
        // Classic butterfly: s feeds two relays, a middle arc is shared, both
        // sinks see capacity 2 with unit arc rates.
        let net = Network::parse(
            "node s; node n1; node n2; node n3; node n4; node t1; node t2\n\
             arc s n1 1; arc s n2 1; arc n1 n3 1; arc n2 n3 1; arc n3 n4 1\n\
             arc n1 t1 1; arc n2 t2 1; arc n4 t1 1; arc n4 t2 1",
        )
        .unwrap();
        let t1 = net.node_id("t1").unwrap();
        let t2 = net.node_id("t2").unwrap();
        assert_eq!(multicast_capacity(&net, 0, &[t1, t2]).unwrap(), rat("2"));
        assert_eq!(enumerate_min_cut(&net, 0, t1), rat("2"));
        assert_eq!(enumerate_min_cut(&net, 0, t2), rat("2"));
    }

    #[test]
    fn duality_on_random_wireline_graphs() {
        let mut rng = ChaCha8Rng::seed_from_u64(0xF70);
        for round in 0..40 {
            let n = rng.random_range(2..=8usize);
            let mut text = String::new();
            for i in 0..n {
                text.push_str(&format!("node v{i}\n"));
            }
            for i in 0..n {
                for j in 0..n {
                    if i != j && rng.random_bool(0.45) {
                        let num = rng.random_range(0..=8u32);
                        text.push_str(&format!("arc v{i} v{j} {num}/4\n"));
                    }
                }
            }
            let net = Network::parse(&text).unwrap();
            let f = max_flow(&net, 0, 1).unwrap();
            let oracle = enumerate_min_cut(&net, 0, 1);
            assert_eq!(f.value, oracle, "round {round}\n{text}");
            assert_eq!(min_cut_capacity(&net, 0, 1).unwrap(), oracle);
        }
    }

    #[test]
    fn wireless_reduction_matches_enumeration() {
        let mut rng = ChaCha8Rng::seed_from_u64(0xF71);
        for round in 0..25 {
            let n = rng.random_range(2..=6usize);
            let mut text = String::new();
            for i in 0..n {
                text.push_str(&format!("node v{i}\n"));
            }
            for head in 0..n {
                if !rng.random_bool(0.7) {
                    continue;
                }
                let mut others: Vec<usize> = (0..n).filter(|&j| j != head).collect();
                // Random tail set of size 1..=3.
                for k in (1..others.len()).rev() {
                    let j = rng.random_range(0..=k);
                    others.swap(k, j);
                }
                let tail_len = rng.random_range(1..=others.len().min(3));
                let tails = &others[..tail_len];
                let tail_names: Vec<String> =
                    tails.iter().map(|&j| format!("v{j}")).collect();
                let mut sets = String::new();
                for mask in 1u32..(1 << tail_len) {
                    if rng.random_bool(0.6) {
                        let members: Vec<String> = (0..tail_len)
                            .filter(|b| mask & (1 << b) != 0)
                            .map(|b| format!("v{}", tails[b]))
                            .collect();
                        let num = rng.random_range(0..=6u32);
                        sets.push_str(&format!(" {{{}}}={}/2", members.join(" "), num));
                    }
                }
                if sets.is_empty() {
                    continue;
                }
                text.push_str(&format!(
                    "hyperarc v{head} {{{}}}{}\n",
                    tail_names.join(" "),
                    sets
                ));
            }
            let net = match Network::parse(&text) {
                Ok(net) => net,
                Err(_) => continue, // wireline-only rounds produce no hyperarcs
            };
            if net.kind() != NetworkKind::Wireless {
                continue;
            }
            let got = min_cut_capacity(&net, 0, 1).unwrap();
            let oracle = enumerate_min_cut(&net, 0, 1);
            assert_eq!(got, oracle, "round {round}\n{text}");
        }
    }

    #[test]
    fn wireline_as_wireless_preserves_capacity() {
        let net = Network::parse(
            "node s; node a; node b; node t; arc s a 1.5; arc a b 1; arc b t 2; arc s t 0.25",
        )
        .unwrap();
        let w = net.wireline_as_wireless().unwrap();
        for t in 1..net.node_count() {
            assert_eq!(
                min_cut_capacity(&net, 0, t).unwrap(),
                min_cut_capacity(&w, 0, t).unwrap()
            );
        }
    }

    #[test]
    fn three_arc_path_as_wireless_keeps_bottleneck() {
        let net =
            Network::parse("node s; node a; node b; node t; arc s a 3; arc a b 0.5; arc b t 2")
                .unwrap();
        let w = net.wireline_as_wireless().unwrap();
        assert_eq!(w.hyperarcs().len(), 3);
        assert_eq!(min_cut_capacity(&w, 0, 3).unwrap(), rat("0.5"));
    }

    #[test]
    fn remove_cycles_leaves_acyclic_flow_alone() {
        let net = Network::parse("node s; node a; node t; arc s a 1; arc a t 1").unwrap();
        let f = max_flow(&net, 0, 2).unwrap();
        assert_eq!(remove_cycles(&f), f);
    }

    #[test]
    fn remove_cycles_strips_a_three_cycle() {
        // A path s -> a -> t carrying 1, plus a 3-cycle a -> b -> c -> a of 0.5.
        let mut flows = BTreeMap::new();
        flows.insert((0usize, 1usize), rat("1"));
        flows.insert((1, 4), rat("1"));
        flows.insert((1, 2), rat("0.5"));
        flows.insert((2, 3), rat("0.5"));
        flows.insert((3, 1), rat("0.5"));
        let f = FlowVector { source: 0, sink: 4, value: rat("1"), flows };
        let cleaned = remove_cycles(&f);
        assert_eq!(cleaned.value, rat("1"));
        assert_eq!(cleaned.flows.len(), 2);
        assert_eq!(cleaned.flows[&(0, 1)], rat("1"));
        assert_eq!(cleaned.flows[&(1, 4)], rat("1"));
        assert!(decompose_paths(&cleaned).is_ok());
    }

    #[test]
    fn remove_cycles_on_zero_flow() {
        let f = FlowVector {
            source: 0,
            sink: 1,
            value: Rate::zero(),
            flows: BTreeMap::new(),
        };
        assert_eq!(remove_cycles(&f).flows.len(), 0);
    }

    #[test]
    fn decompose_single_path() {
        let net = Network::parse("node s; node a; node t; arc s a 2; arc a t 2").unwrap();
        let d = decompose_paths(&max_flow(&net, 0, 2).unwrap()).unwrap();
        assert_eq!(d.paths.len(), 1);
        assert_eq!(d.paths[0].nodes, vec![0, 1, 2]);
        assert_eq!(d.paths[0].rate, rat("2"));
    }

    #[test]
    fn decompose_two_disjoint_paths() {
        let net = Network::parse(
            "node s; node a; node b; node t; arc s a 1; arc a t 1; arc s b 1; arc b t 1",
        )
        .unwrap();
        let d = decompose_paths(&max_flow(&net, 0, 3).unwrap()).unwrap();
        assert_eq!(d.paths.len(), 2);
        assert_eq!(d.total_rate(), rat("2"));
        for p in &d.paths {
            assert_eq!(p.rate, rat("1"));
        }
    }

    #[test]
    fn decompose_rejects_cycles() {
        let mut flows = BTreeMap::new();
        flows.insert((0usize, 1usize), rat("1"));
        flows.insert((1, 0), rat("1"));
        let f = FlowVector { source: 0, sink: 1, value: Rate::zero(), flows };
        // The 2-cycle conserves flow everywhere, so it reaches the cycle check.
        assert_eq!(decompose_paths(&f).unwrap_err(), FlowError::CyclicFlow);
    }

    #[test]
    fn decompose_reconstructs_arc_flows_exactly() {
        let mut rng = ChaCha8Rng::seed_from_u64(0xF72);
        for round in 0..30 {
            let n = rng.random_range(3..=8usize);
            let mut text = String::new();
            for i in 0..n {
                text.push_str(&format!("node v{i}\n"));
            }
            // Arcs only from lower to higher ids: supports are acyclic by
            // construction.
            for i in 0..n {
                for j in (i + 1)..n {
                    if rng.random_bool(0.5) {
                        let num = rng.random_range(1..=8u32);
                        text.push_str(&format!("arc v{i} v{j} {num}/3\n"));
                    }
                }
            }
            let net = Network::parse(&text).unwrap();
            let f = max_flow(&net, 0, n - 1).unwrap();
            let d = decompose_paths(&f).unwrap();
            assert!(d.paths.len() <= f.flows.len().max(1), "round {round}");
            assert_eq!(d.total_rate(), f.value, "round {round}");
            let mut rebuilt: BTreeMap<(NodeId, NodeId), Rate> = BTreeMap::new();
            for p in &d.paths {
                assert!(p.rate > Rate::zero());
                // Paths must be simple.
                let mut sorted = p.nodes.clone();
                sorted.sort_unstable();
                sorted.dedup();
                assert_eq!(sorted.len(), p.nodes.len(), "round {round}");
                for w in p.nodes.windows(2) {
                    *rebuilt.entry((w[0], w[1])).or_insert_with(Rate::zero) += &p.rate;
                }
            }
            let mut nonzero = f.flows.clone();
            nonzero.retain(|_, z| !z.is_zero());
            assert_eq!(rebuilt, nonzero, "round {round}\n{text}");
        }
    }

    #[test]
    fn conservation_violations_detected() {
        let mut flows = BTreeMap::new();
        flows.insert((0usize, 1usize), rat("1"));
        let f = FlowVector { source: 0, sink: 2, value: rat("1"), flows };
        assert!(matches!(
            decompose_paths(&f).unwrap_err(),
            FlowError::NotConserved(_)
        ));
    }

    #[test]
    fn rejects_missing_nodes_and_same_endpoints() {
        let net = Network::parse("node s; node t; arc s t 1").unwrap();
        assert_eq!(max_flow(&net, 0, 5).unwrap_err(), FlowError::MissingNode(5));
        assert_eq!(max_flow(&net, 1, 1).unwrap_err(), FlowError::SameEndpoints);
    }

    #[test]
    fn exactness_survives_awkward_rationals() {
        // Capacities chosen so floating point would drift.
        let net = Network::parse(
            "node s; node a; node b; node t\n\
             arc s a 1/3; arc s b 1/7; arc a t 1/3; arc b t 1/7; arc a b 1/11",
        )
        .unwrap();
        let f = max_flow(&net, 0, 3).unwrap();
        let expected = Rate::new(BigInt::from(1), BigInt::from(3))
            + Rate::new(BigInt::from(1), BigInt::from(7));
        assert_eq!(f.value, expected);
        assert_eq!(enumerate_min_cut(&net, 0, 3), expected);
    }
}
