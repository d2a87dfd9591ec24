//! Exact entropies and mutual informations of network variables under
//! product input distributions.
//!
//! Everything here enumerates the full space of input tuples, evaluates the
//! deterministic network on each tuple, and accumulates the joint
//! distribution of the selected variables. Exactness (up to double rounding)
//! is the point; a tuple cap keeps the enumeration honest at desk scale.

use std::collections::BTreeMap;

use crate::error::{Error, Result};
use crate::network::{Mode, Network, NodeId, Symbol};
use crate::par;

/// Default cap on the number of enumerated input tuples.
pub const DEFAULT_TUPLE_CAP: u64 = 1 << 24;

const CHUNK: u64 = 1 << 14;

/// Compensated (Kahan) summation.
#[derive(Clone, Copy, Default)]
pub(crate) struct Kahan {
    sum: f64,
    carry: f64,
}

impl Kahan {
    pub(crate) fn add(&mut self, v: f64) {
        let y = v - self.carry;
        let t = self.sum + y;
        self.carry = (t - self.sum) - y;
        self.sum = t;
    }

    pub(crate) fn value(self) -> f64 {
        self.sum
    }
}

/// Product distribution over the node input alphabets.
#[derive(Clone, Debug, PartialEq)]
pub struct InputDistribution {
    probs: Vec<Vec<f64>>,
}

impl InputDistribution {
    /// Uniform inputs at every node.
    pub fn uniform(net: &Network) -> Self {
        let probs = net
            .node_ids()
            .map(|u| {
                let q = net.alphabet(u);
                vec![1.0 / q as f64; q]
            })
            .collect();
        InputDistribution { probs }
    }

    /// Validates lengths, nonnegativity, and unit sums (within 1e-12).
    pub fn new(net: &Network, probs: Vec<Vec<f64>>) -> Result<Self> {
        if probs.len() != net.node_count() {
            return Err(Error::Distribution(format!(
                "expected {} node distributions, got {}",
                net.node_count(),
                probs.len()
            )));
        }
        for (i, p) in probs.iter().enumerate() {
            let u = NodeId::from_index(i);
            if p.len() != net.alphabet(u) {
                return Err(Error::Distribution(format!(
                    "node {u}: expected {} probabilities, got {}",
                    net.alphabet(u),
                    p.len()
                )));
            }
            if p.iter().any(|&x| !x.is_finite() || x < 0.0) {
                return Err(Error::Distribution(format!(
                    "node {u}: probabilities must be finite and nonnegative"
                )));
            }
            let sum: f64 = p.iter().sum();
            if (sum - 1.0).abs() > 1e-12 {
                return Err(Error::Distribution(format!(
                    "node {u}: probabilities sum to {sum}, expected 1"
                )));
            }
        }
        Ok(InputDistribution { probs })
    }

    /// Parse a distribution document: one `dist <node> p=<comma list>` line
    /// per node; nodes not mentioned stay uniform. `#` starts a comment.
    pub fn parse_doc(net: &Network, text: &str) -> Result<Self> {
        let mut dist = InputDistribution::uniform(net);
        let mut probs = std::mem::take(&mut dist.probs);
        for (i, raw) in text.lines().enumerate() {
            let body = match raw.find('#') {
                Some(p) => &raw[..p],
                None => raw,
            };
            let body = body.trim();
            if body.is_empty() {
                continue;
            }
            let toks: Vec<&str> = body.split_whitespace().collect();
            if toks.len() != 3 || toks[0] != "dist" || !toks[2].starts_with("p=") {
                return Err(Error::Distribution(format!(
                    "line {}: expected `dist <node> p=<comma list>`",
                    i + 1
                )));
            }
            let label: u32 = toks[1]
                .parse()
                .map_err(|_| Error::Distribution(format!("line {}: invalid node id", i + 1)))?;
            if label == 0 || label as usize > net.node_count() {
                return Err(Error::Distribution(format!(
                    "line {}: node {label} does not exist",
                    i + 1
                )));
            }
            let values: std::result::Result<Vec<f64>, _> =
                toks[2][2..].split(',').map(|c| c.trim().parse::<f64>()).collect();
            let values = values
                .map_err(|_| Error::Distribution(format!("line {}: invalid probability", i + 1)))?;
            probs[(label - 1) as usize] = values;
        }
        InputDistribution::new(net, probs)
    }

    pub fn node_probs(&self, u: NodeId) -> &[f64] {
        &self.probs[u.index()]
    }

    pub fn prob(&self, u: NodeId, x: Symbol) -> f64 {
        self.probs[u.index()][x as usize]
    }

    /// Replace one node's probability vector. The caller is responsible for
    /// keeping it a valid distribution of the right length.
    pub fn set_node(&mut self, u: NodeId, p: Vec<f64>) {
        self.probs[u.index()] = p;
    }

    /// Marginal entropy of one node input, in bits.
    pub fn node_entropy(&self, u: NodeId) -> f64 {
        let mut h = Kahan::default();
        for &p in &self.probs[u.index()] {
            if p > 0.0 {
                h.add(-p * p.log2());
            }
        }
        h.value().max(0.0)
    }

    /// Joint entropy of all inputs; the inputs are independent, so this is
    /// the sum of the marginals.
    pub fn total_input_entropy(&self) -> f64 {
        let mut h = Kahan::default();
        for i in 0..self.probs.len() {
            h.add(self.node_entropy(NodeId::from_index(i)));
        }
        h.value()
    }

    pub fn render(&self) -> String {
        let mut out = String::new();
        for (i, p) in self.probs.iter().enumerate() {
            let cells: Vec<String> = p.iter().map(|x| format!("{x:.6}")).collect();
            out.push_str(&format!("dist {} p={}\n", i + 1, cells.join(",")));
        }
        out
    }
}

/// One network random variable.
#[derive(Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Debug)]
pub enum Var {
    /// Channel input `X_u`.
    Input(NodeId),
    /// Channel output `Y_v`: the tuple of incoming edge outputs in aref
    /// mode, the receive-function output in deterministic mode.
    NodeOutput(NodeId),
    /// Single edge output `Y_uv` (aref mode only).
    EdgeOutput(NodeId, NodeId),
}

/// Enumeration options for the entropy routines.
#[derive(Clone, Copy, Debug)]
pub struct EnumOpts {
    pub tuple_cap: u64,
    /// Partition the tuple range across workers. The chunked merge order is
    /// fixed, so results do not depend on the worker count, but they may
    /// differ from the sequential path by double rounding (within 1e-9 on
    /// desk-scale networks).
    pub parallel: bool,
}

impl Default for EnumOpts {
    fn default() -> Self {
        EnumOpts {
            tuple_cap: DEFAULT_TUPLE_CAP,
            parallel: false,
        }
    }
}

fn check_enumerable(net: &Network, vars: &[Var], cap: u64) -> Result<u64> {
    if net.mode() == Mode::Gaussian {
        return Err(Error::Mode(
            "entropy enumeration is not defined for gaussian networks".into(),
        ));
    }
    for v in vars {
        match *v {
            Var::Input(u) | Var::NodeOutput(u) => {
                if u.index() >= net.node_count() {
                    return Err(Error::InvalidInput(format!("unknown node {u}")));
                }
            }
            Var::EdgeOutput(u, v) => {
                if net.mode() != Mode::Aref {
                    return Err(Error::Mode(
                        "edge outputs are only defined for aref networks".into(),
                    ));
                }
                if net.edge_fn(u, v).is_none() {
                    return Err(Error::InvalidInput(format!("unknown edge {u}->{v}")));
                }
            }
        }
    }
    let mut total: u64 = 1;
    for u in net.node_ids() {
        total = total
            .checked_mul(net.alphabet(u) as u64)
            .filter(|&t| t <= cap)
            .ok_or_else(|| {
                Error::CapExceeded(format!(
                    "input-tuple count exceeds the enumeration cap of {cap}"
                ))
            })?;
    }
    Ok(total)
}

/// Append the evaluation of `var` on the input tuple `x` to `key`.
pub(crate) fn eval_var(net: &Network, var: Var, x: &[Symbol], key: &mut Vec<Symbol>) {
    match var {
        Var::Input(u) => key.push(x[u.index()]),
        Var::EdgeOutput(u, v) => {
            key.push(net.edge_fn(u, v).expect("validated edge").apply(x[u.index()]))
        }
        Var::NodeOutput(v) => match net.mode() {
            Mode::Aref => {
                for &u in net.in_neighbors(v) {
                    key.push(net.edge_fn(u, v).expect("validated edge").apply(x[u.index()]));
                }
            }
            Mode::Deterministic => {
                if let Some(f) = net.rx_fn(v) {
                    let ins = net.in_neighbors(v);
                    let inputs: Vec<Symbol> = ins.iter().map(|u| x[u.index()]).collect();
                    let arities: Vec<usize> = ins.iter().map(|u| net.alphabet(*u)).collect();
                    key.push(f.apply(&inputs, &arities, net.alphabet(v)));
                }
                // in-degree 0: the output carries nothing.
            }
            Mode::Gaussian => unreachable!("rejected by check_enumerable"),
        },
    }
}

fn decode_tuple(net: &Network, mut t: u64, x: &mut [Symbol]) {
    for i in (0..net.node_count()).rev() {
        let q = net.alphabet(NodeId::from_index(i)) as u64;
        x[i] = (t % q) as Symbol;
        t /= q;
    }
}

fn accumulate_range(
    net: &Network,
    dist: &InputDistribution,
    vars: &[Var],
    range: std::ops::Range<u64>,
) -> BTreeMap<Vec<Symbol>, Kahan> {
    let n = net.node_count();
    let mut x = vec![0 as Symbol; n];
    let mut key = Vec::with_capacity(vars.len() * 2);
    let mut table: BTreeMap<Vec<Symbol>, Kahan> = BTreeMap::new();
    for t in range {
        decode_tuple(net, t, &mut x);
        let mut p = 1.0;
        for (i, &xi) in x.iter().enumerate() {
            p *= dist.prob(NodeId::from_index(i), xi);
        }
        if p == 0.0 {
            continue;
        }
        key.clear();
        for &v in vars {
            eval_var(net, v, &x, &mut key);
        }
        table.entry(key.clone()).or_default().add(p);
    }
    table
}

/// Joint distribution of the selected variables, keyed by their evaluated
/// symbol tuples. Keys are ordered, so iteration is deterministic.
pub fn joint_table(
    net: &Network,
    dist: &InputDistribution,
    vars: &[Var],
) -> Result<BTreeMap<Vec<Symbol>, f64>> {
    joint_table_with(net, dist, vars, &EnumOpts::default())
}

pub fn joint_table_with(
    net: &Network,
    dist: &InputDistribution,
    vars: &[Var],
    opts: &EnumOpts,
) -> Result<BTreeMap<Vec<Symbol>, f64>> {
    let total = check_enumerable(net, vars, opts.tuple_cap)?;
    let finish = |t: BTreeMap<Vec<Symbol>, Kahan>| {
        t.into_iter().map(|(k, s)| (k, s.value())).collect()
    };
    if !opts.parallel || total <= CHUNK {
        return Ok(finish(accumulate_range(net, dist, vars, 0..total)));
    }
    let chunks = total.div_ceil(CHUNK) as usize;
    let partials = par::map_range(chunks, |c| {
        let lo = c as u64 * CHUNK;
        let hi = (lo + CHUNK).min(total);
        accumulate_range(net, dist, vars, lo..hi)
    });
    // Chunk maps merge in chunk order, so the result does not depend on
    // the worker count.
    let mut table: BTreeMap<Vec<Symbol>, Kahan> = BTreeMap::new();
    for partial in partials {
        for (k, s) in partial {
            table.entry(k).or_default().add(s.value());
        }
    }
    Ok(finish(table))
}

fn entropy_of_table(table: &BTreeMap<Vec<Symbol>, f64>) -> f64 {
    let mut h = Kahan::default();
    for &p in table.values() {
        if p > 0.0 {
            h.add(-p * p.log2());
        }
    }
    h.value().max(0.0)
}

/// Exact Shannon entropy (bits) of the joint distribution of `vars`.
pub fn joint_entropy(net: &Network, dist: &InputDistribution, vars: &[Var]) -> Result<f64> {
    joint_entropy_with(net, dist, vars, &EnumOpts::default())
}

pub fn joint_entropy_with(
    net: &Network,
    dist: &InputDistribution,
    vars: &[Var],
    opts: &EnumOpts,
) -> Result<f64> {
    Ok(entropy_of_table(&joint_table_with(net, dist, vars, opts)?))
}

fn union_vars(groups: &[&[Var]]) -> Vec<Var> {
    let mut out: Vec<Var> = Vec::new();
    for g in groups {
        for &v in *g {
            if !out.contains(&v) {
                out.push(v);
            }
        }
    }
    out
}

/// Conditional mutual information `I(A; B | C)` in bits, computed as
/// `H(A,C) + H(B,C) - H(A,B,C) - H(C)` and clamped to `[0, inf)`.
pub fn conditional_mutual_information(
    net: &Network,
    dist: &InputDistribution,
    a: &[Var],
    b: &[Var],
    c: &[Var],
) -> Result<f64> {
    conditional_mutual_information_with(net, dist, a, b, c, &EnumOpts::default())
}

pub fn conditional_mutual_information_with(
    net: &Network,
    dist: &InputDistribution,
    a: &[Var],
    b: &[Var],
    c: &[Var],
    opts: &EnumOpts,
) -> Result<f64> {
    let h_ac = joint_entropy_with(net, dist, &union_vars(&[a, c]), opts)?;
    let h_bc = joint_entropy_with(net, dist, &union_vars(&[b, c]), opts)?;
    let h_abc = joint_entropy_with(net, dist, &union_vars(&[a, b, c]), opts)?;
    let h_c = joint_entropy_with(net, dist, &union_vars(&[c]), opts)?;
    let i = h_ac + h_bc - h_abc - h_c;
    Ok(if i < 0.0 { 0.0 } else { i })
}
