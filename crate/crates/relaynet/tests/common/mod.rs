//! Shared fixtures and independent oracles for integration tests.
//!
//! The oracles re-derive expected values by routes separate from the
//! library's computation paths: recursive enumeration with plain summation
//! for entropies, DFS path enumeration for longest paths and schedule
//! dependencies.

#![allow(dead_code)]

use std::collections::{BTreeSet, HashMap};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use relaynet::info::{InputDistribution, Var};
use relaynet::network::{EdgeFn, Mode, Network, NodeId, Role, RxFn, Symbol};

pub fn node(label: u32) -> NodeId {
    NodeId::from_index((label - 1) as usize)
}

pub fn path3_aref() -> Network {
    Network::builder(Mode::Aref)
        .node(1, Role::Source)
        .node(2, Role::Relay)
        .node(3, Role::Dest)
        .edge_fn(1, 2, EdgeFn::Identity)
        .edge_fn(2, 3, EdgeFn::Identity)
        .build()
        .unwrap()
}

pub fn path3_det() -> Network {
    Network::builder(Mode::Deterministic)
        .node(1, Role::Source)
        .node(2, Role::Relay)
        .node(3, Role::Dest)
        .edge(1, 2)
        .edge(2, 3)
        .rx_fn(2, RxFn::Xor)
        .rx_fn(3, RxFn::Xor)
        .build()
        .unwrap()
}

pub fn diamond_aref() -> Network {
    Network::builder(Mode::Aref)
        .node(1, Role::Source)
        .node(2, Role::Relay)
        .node(3, Role::Relay)
        .node(4, Role::Dest)
        .edge_fn(1, 2, EdgeFn::Identity)
        .edge_fn(1, 3, EdgeFn::Identity)
        .edge_fn(2, 4, EdgeFn::Identity)
        .edge_fn(3, 4, EdgeFn::Identity)
        .build()
        .unwrap()
}

/// Layered diamond with an interfering (mod-2 sum) destination.
pub fn diamond_xor() -> Network {
    Network::builder(Mode::Deterministic)
        .node(1, Role::Source)
        .node(2, Role::Relay)
        .node(3, Role::Relay)
        .node(4, Role::Dest)
        .edge(1, 2)
        .edge(1, 3)
        .edge(2, 4)
        .edge(3, 4)
        .rx_fn(2, RxFn::Xor)
        .rx_fn(3, RxFn::Xor)
        .rx_fn(4, RxFn::Xor)
        .build()
        .unwrap()
}

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Random acyclic deterministic-mode network: node 1 source, node n dest,
/// edges only from lower to higher ids, random binary receive tables.
pub fn random_det_net(rng: &mut ChaCha8Rng, max_nodes: usize) -> Network {
    let n = rng.random_range(3..=max_nodes);
    let mut b = Network::builder(Mode::Deterministic).alphabet(2);
    for i in 1..=n as u32 {
        let role = if i == 1 {
            Role::Source
        } else if i == n as u32 {
            Role::Dest
        } else {
            Role::Relay
        };
        b = b.node(i, role);
    }
    let mut indeg = vec![0usize; n + 1];
    for u in 1..=n as u32 {
        for v in (u + 1)..=n as u32 {
            if rng.random_bool(0.5) {
                b = b.edge(u, v);
                indeg[v as usize] += 1;
            }
        }
    }
    for v in 2..=n as u32 {
        if indeg[v as usize] > 0 {
            if rng.random_bool(0.3) {
                b = b.rx_fn(v, RxFn::Xor);
            } else {
                let table: Vec<Symbol> = (0..(1usize << indeg[v as usize]))
                    .map(|_| rng.random_range(0..2) as Symbol)
                    .collect();
                b = b.rx_fn(v, RxFn::Table(table));
            }
        }
    }
    b.build().unwrap()
}

/// Random acyclic aref-mode network with random binary edge tables.
pub fn random_aref_net(rng: &mut ChaCha8Rng, max_nodes: usize) -> Network {
    let n = rng.random_range(3..=max_nodes);
    let mut b = Network::builder(Mode::Aref).alphabet(2);
    for i in 1..=n as u32 {
        let role = if i == 1 {
            Role::Source
        } else if i == n as u32 {
            Role::Dest
        } else {
            Role::Relay
        };
        b = b.node(i, role);
    }
    for u in 1..=n as u32 {
        for v in (u + 1)..=n as u32 {
            if rng.random_bool(0.5) {
                let f = match rng.random_range(0..3) {
                    0 => EdgeFn::Identity,
                    1 => EdgeFn::Table(vec![
                        rng.random_range(0..2) as Symbol,
                        rng.random_range(0..2) as Symbol,
                    ]),
                    _ => EdgeFn::Const(rng.random_range(0..2) as Symbol),
                };
                b = b.edge_fn(u, v, f);
            }
        }
    }
    b.build().unwrap()
}

/// Random strictly positive product distribution.
pub fn random_dist(rng: &mut ChaCha8Rng, net: &Network) -> InputDistribution {
    let probs: Vec<Vec<f64>> = net
        .node_ids()
        .map(|u| {
            let q = net.alphabet(u);
            let raw: Vec<f64> = (0..q).map(|_| rng.random_range(0.05..1.0)).collect();
            let sum: f64 = raw.iter().sum();
            raw.iter().map(|x| x / sum).collect()
        })
        .collect();
    InputDistribution::new(net, probs).unwrap()
}

// ---------------------------------------------------------------------
// Oracles
// ---------------------------------------------------------------------

/// Evaluate one variable on an input tuple, mirroring the channel
/// semantics directly from the network definition.
fn oracle_eval(net: &Network, var: Var, x: &[Symbol]) -> Vec<Symbol> {
    match var {
        Var::Input(u) => vec![x[u.index()]],
        Var::EdgeOutput(u, v) => vec![net.edge_fn(u, v).unwrap().apply(x[u.index()])],
        Var::NodeOutput(v) => match net.mode() {
            Mode::Aref => net
                .in_neighbors(v)
                .iter()
                .map(|&u| net.edge_fn(u, v).unwrap().apply(x[u.index()]))
                .collect(),
            Mode::Deterministic => {
                let ins = net.in_neighbors(v);
                if ins.is_empty() {
                    vec![]
                } else {
                    let inputs: Vec<Symbol> = ins.iter().map(|u| x[u.index()]).collect();
                    let arities: Vec<usize> = ins.iter().map(|u| net.alphabet(*u)).collect();
                    vec![net.rx_fn(v).unwrap().apply(&inputs, &arities, net.alphabet(v))]
                }
            }
            Mode::Gaussian => panic!("oracle is for deterministic networks"),
        },
    }
}

/// Joint distribution by recursive tuple enumeration with plain summation.
pub fn oracle_joint_table(
    net: &Network,
    dist: &InputDistribution,
    vars: &[Var],
) -> HashMap<Vec<Symbol>, f64> {
    let n = net.node_count();
    let mut table = HashMap::new();
    let mut x = vec![0 as Symbol; n];
    fn rec(
        net: &Network,
        dist: &InputDistribution,
        vars: &[Var],
        x: &mut Vec<Symbol>,
        depth: usize,
        p: f64,
        table: &mut HashMap<Vec<Symbol>, f64>,
    ) {
        if depth == net.node_count() {
            let mut key = Vec::new();
            for &v in vars {
                key.extend(oracle_eval(net, v, x));
            }
            *table.entry(key).or_insert(0.0) += p;
            return;
        }
        let u = NodeId::from_index(depth);
        for s in 0..net.alphabet(u) {
            x[depth] = s as Symbol;
            rec(net, dist, vars, x, depth + 1, p * dist.prob(u, s as Symbol), table);
        }
    }
    rec(net, dist, vars, &mut x, 0, 1.0, &mut table);
    table
}

pub fn oracle_entropy(net: &Network, dist: &InputDistribution, vars: &[Var]) -> f64 {
    oracle_joint_table(net, dist, vars)
        .values()
        .filter(|&&p| p > 0.0)
        .map(|&p| -p * p.log2())
        .sum()
}

/// Conditional entropy `H(B | A)` via the conditional decomposition
/// `sum_a p(a) H(B | A = a)`.
pub fn oracle_conditional_entropy(
    net: &Network,
    dist: &InputDistribution,
    b: &[Var],
    a: &[Var],
) -> f64 {
    let mut joint_vars: Vec<Var> = a.to_vec();
    for &v in b {
        if !joint_vars.contains(&v) {
            joint_vars.push(v);
        }
    }
    let a_len: usize = {
        // Width of the A prefix in the evaluated key.
        let probe = oracle_joint_table(net, dist, a);
        probe.keys().next().map(|k| k.len()).unwrap_or(0)
    };
    let joint = oracle_joint_table(net, dist, &joint_vars);
    let mut by_a: HashMap<Vec<Symbol>, Vec<f64>> = HashMap::new();
    for (key, &p) in &joint {
        by_a.entry(key[..a_len].to_vec()).or_default().push(p);
    }
    let mut h = 0.0;
    for group in by_a.values() {
        let pa: f64 = group.iter().sum();
        if pa <= 0.0 {
            continue;
        }
        let h_cond: f64 = group
            .iter()
            .filter(|&&p| p > 0.0)
            .map(|&p| {
                let q = p / pa;
                -q * q.log2()
            })
            .sum();
        h += pa * h_cond;
    }
    h
}

/// All source-to-`target` path lengths by DFS.
pub fn oracle_path_lengths(net: &Network, target: NodeId) -> BTreeSet<u32> {
    fn dfs(net: &Network, u: NodeId, target: NodeId, len: u32, out: &mut BTreeSet<u32>) {
        if u == target {
            out.insert(len);
        }
        for &v in net.out_neighbors(u) {
            dfs(net, v, target, len + 1, out);
        }
    }
    let mut out = BTreeSet::new();
    dfs(net, net.source(), target, 0, &mut out);
    out
}

/// Reachability from the source; a node reaches itself by the empty path.
pub fn oracle_reachable(net: &Network, target: NodeId) -> bool {
    !oracle_path_lengths(net, target).is_empty()
}
