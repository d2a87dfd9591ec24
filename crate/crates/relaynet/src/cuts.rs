//! Cut enumeration, cut values, min-cut bounds, and input-distribution
//! search.
//!
//! A cut is a node bipartition `(S, S^c)` with the source in `S`. Its value
//! upper-bounds the achievable rate and is computed by one of three
//! formulas, which coincide on the network classes they apply to:
//!
//! * general:        `I(X_S ; Y_{head(S)} | X_{S^c})`
//! * deterministic:  `H(Y_{head(S)} | X_{S^c})`
//! * aref:           `sum over u in tail(S) of H(Y_{u,head(S)})`
//!
//! where `tail(S)`/`head(S)` are the tails and heads of the edges crossing
//! the cut. Enumeration is exhaustive (`2^(|V|-2)` cuts per destination);
//! per-cut evaluation fans out across workers, and every cut value is
//! computed by a sequential enumeration, so results are bit-identical
//! regardless of the worker count.

use std::collections::BTreeMap;

use crate::error::{Error, Result};
use crate::info::{self, InputDistribution, Var};
use crate::network::{Mode, Network, NodeId, NodeSet};
use crate::par;

/// Default cap on the node count for exhaustive cut enumeration.
pub const DEFAULT_NODE_CAP: usize = 24;

/// A source-side node set with the boundaries of its crossing edges.
#[derive(Clone, Copy, PartialEq, Eq, Debug)]
pub struct Cut {
    /// Nodes on the source side, including the source itself.
    pub s_side: NodeSet,
    /// Tails of crossing edges: nodes in `S` with an edge into `S^c`.
    pub tail_boundary: NodeSet,
    /// Heads of crossing edges: nodes in `S^c` with an edge from `S`.
    pub head_boundary: NodeSet,
}

impl Cut {
    /// Build a cut from its source side, deriving both boundaries.
    pub fn from_s_side(net: &Network, s_side: NodeSet) -> Cut {
        let mut tail = NodeSet::empty();
        let mut head = NodeSet::empty();
        for &(u, v) in net.edges() {
            if s_side.contains(u) && !s_side.contains(v) {
                tail.insert(u);
                head.insert(v);
            }
        }
        Cut {
            s_side,
            tail_boundary: tail,
            head_boundary: head,
        }
    }

    pub fn complement(&self, net: &Network) -> NodeSet {
        self.s_side.complement(net.node_count())
    }
}

#[derive(Clone, Copy, PartialEq, Eq, Debug)]
pub enum CutFormula {
    General,
    Deterministic,
    Aref,
}

impl CutFormula {
    pub fn as_str(self) -> &'static str {
        match self {
            CutFormula::General => "general",
            CutFormula::Deterministic => "deterministic",
            CutFormula::Aref => "aref",
        }
    }

    /// The natural formula for a network's mode.
    pub fn default_for(mode: Mode) -> Result<CutFormula> {
        match mode {
            Mode::Aref => Ok(CutFormula::Aref),
            Mode::Deterministic => Ok(CutFormula::Deterministic),
            Mode::Gaussian => Err(Error::Mode(
                "cut values are not computable for gaussian networks".into(),
            )),
        }
    }
}

#[derive(Clone, Debug)]
pub struct CutReport {
    pub cut: Cut,
    pub value_bits: f64,
    pub formula: CutFormula,
}

/// Result of a min-cut sweep.
#[derive(Clone, Debug)]
pub struct BoundResult {
    /// Min over all destinations of the per-destination min cut value.
    pub min_cut_bits: f64,
    /// All cuts attaining the minimum, sorted by node-set label sequence.
    pub argmin_cuts: Vec<Cut>,
    /// Per-destination minima.
    pub per_destination: BTreeMap<NodeId, f64>,
    /// The input distribution the bound was evaluated under.
    pub distribution: InputDistribution,
}

/// All cuts separating the source from destination `t`: every
/// `S` with `source in S` and `t not in S`, exactly `2^(|V|-2)` of them.
pub fn enumerate_cuts(net: &Network, t: NodeId) -> Result<impl Iterator<Item = Cut> + '_> {
    enumerate_cuts_with(net, t, DEFAULT_NODE_CAP)
}

pub fn enumerate_cuts_with(
    net: &Network,
    t: NodeId,
    node_cap: usize,
) -> Result<impl Iterator<Item = Cut> + '_> {
    if net.node_count() > node_cap {
        return Err(Error::CapExceeded(format!(
            "cut enumeration over {} nodes exceeds the cap of {node_cap}; raise it explicitly to proceed",
            net.node_count()
        )));
    }
    if net.role(t) != crate::network::Role::Dest {
        return Err(Error::InvalidInput(format!("node {t} is not a destination")));
    }
    let s = net.source();
    let free: Vec<NodeId> = net.node_ids().filter(|&u| u != s && u != t).collect();
    let count = 1u64 << free.len();
    Ok((0..count).map(move |bits| {
        let mut s_side = NodeSet::empty();
        s_side.insert(s);
        for (i, &u) in free.iter().enumerate() {
            if bits & (1 << i) != 0 {
                s_side.insert(u);
            }
        }
        Cut::from_s_side(net, s_side)
    }))
}

fn inputs_of(set: NodeSet) -> Vec<Var> {
    set.iter().map(Var::Input).collect()
}

fn outputs_of(set: NodeSet) -> Vec<Var> {
    set.iter().map(Var::NodeOutput).collect()
}

/// Value of one cut under the given formula, in bits.
pub fn cut_value(
    net: &Network,
    dist: &InputDistribution,
    cut: &Cut,
    formula: CutFormula,
) -> Result<CutReport> {
    let value_bits = match formula {
        CutFormula::General => {
            let a = inputs_of(cut.s_side);
            let b = outputs_of(cut.head_boundary);
            let c = inputs_of(cut.complement(net));
            info::conditional_mutual_information(net, dist, &a, &b, &c)?
        }
        CutFormula::Deterministic => {
            let mut head_and_comp = outputs_of(cut.head_boundary);
            let comp = inputs_of(cut.complement(net));
            head_and_comp.extend_from_slice(&comp);
            let h_joint = info::joint_entropy(net, dist, &head_and_comp)?;
            let h_comp = info::joint_entropy(net, dist, &comp)?;
            (h_joint - h_comp).max(0.0)
        }
        CutFormula::Aref => {
            if net.mode() != Mode::Aref {
                return Err(Error::Mode(
                    "the aref cut formula requires an aref network".into(),
                ));
            }
            let mut total = 0.0;
            for u in cut.tail_boundary.iter() {
                let vars: Vec<Var> = net
                    .out_neighbors(u)
                    .iter()
                    .filter(|&&v| cut.head_boundary.contains(v) && !cut.s_side.contains(v))
                    .map(|&v| Var::EdgeOutput(u, v))
                    .collect();
                total += info::joint_entropy(net, dist, &vars)?;
            }
            total
        }
    };
    Ok(CutReport {
        cut: *cut,
        value_bits,
        formula,
    })
}

/// Every source-side set that separates the source from at least one
/// destination, with its cut value. Masks ascend; values are computed in
/// parallel but each one by a sequential enumeration.
fn all_cut_values(
    net: &Network,
    dist: &InputDistribution,
    formula: CutFormula,
    node_cap: usize,
) -> Result<Vec<(Cut, f64)>> {
    let n = net.node_count();
    if n > node_cap {
        return Err(Error::CapExceeded(format!(
            "cut enumeration over {n} nodes exceeds the cap of {node_cap}; raise it explicitly to proceed"
        )));
    }
    let s = net.source();
    let free: Vec<NodeId> = net.node_ids().filter(|&u| u != s).collect();
    let mut cuts: Vec<Cut> = Vec::new();
    for bits in 0..(1u64 << free.len()) {
        let mut s_side = NodeSet::empty();
        s_side.insert(s);
        for (i, &u) in free.iter().enumerate() {
            if bits & (1 << i) != 0 {
                s_side.insert(u);
            }
        }
        if net.destinations().iter().any(|t| !s_side.contains(*t)) {
            cuts.push(Cut::from_s_side(net, s_side));
        }
    }
    let values = par::map_vec(cuts, |cut| {
        cut_value(net, dist, &cut, formula).map(|r| (cut, r.value_bits))
    });
    values.into_iter().collect()
}

/// Exact min cut over all destinations under `dist`, with all argmin cuts.
pub fn min_cut(net: &Network, dist: &InputDistribution) -> Result<BoundResult> {
    min_cut_with(net, dist, CutFormula::default_for(net.mode())?, DEFAULT_NODE_CAP)
}

pub fn min_cut_with(
    net: &Network,
    dist: &InputDistribution,
    formula: CutFormula,
    node_cap: usize,
) -> Result<BoundResult> {
    let values = all_cut_values(net, dist, formula, node_cap)?;
    assemble_bound(net, dist, &values)
}

fn assemble_bound(
    net: &Network,
    dist: &InputDistribution,
    values: &[(Cut, f64)],
) -> Result<BoundResult> {
    let mut per_destination: BTreeMap<NodeId, f64> = BTreeMap::new();
    for &(cut, value) in values {
        for &t in net.destinations() {
            if !cut.s_side.contains(t) {
                per_destination
                    .entry(t)
                    .and_modify(|m| *m = m.min(value))
                    .or_insert(value);
            }
        }
    }
    let min_cut_bits = per_destination
        .values()
        .copied()
        .fold(f64::INFINITY, f64::min);
    let mut argmin_cuts: Vec<Cut> = values
        .iter()
        .filter(|&&(_, v)| v == min_cut_bits)
        .map(|&(c, _)| c)
        .collect();
    argmin_cuts.sort_by(|a, b| a.s_side.lex_cmp(b.s_side));
    Ok(BoundResult {
        min_cut_bits,
        argmin_cuts,
        per_destination,
        distribution: dist.clone(),
    })
}

/// Configuration for the product-distribution search.
#[derive(Clone, Copy, Debug)]
pub struct DistSearchConfig {
    /// Simplex grid resolution: probabilities are multiples of
    /// `1/grid_steps`.
    pub grid_steps: u32,
    /// Cap on full coordinate sweeps.
    pub max_sweeps: u32,
    pub node_cap: usize,
}

impl Default for DistSearchConfig {
    fn default() -> Self {
        DistSearchConfig {
            grid_steps: 16,
            max_sweeps: 32,
            node_cap: DEFAULT_NODE_CAP,
        }
    }
}

/// All compositions of `steps` into `parts` nonnegative integers, in
/// lexicographic order.
fn compositions(steps: u32, parts: usize) -> Vec<Vec<u32>> {
    fn rec(remaining: u32, parts: usize, prefix: &mut Vec<u32>, out: &mut Vec<Vec<u32>>) {
        if parts == 1 {
            prefix.push(remaining);
            out.push(prefix.clone());
            prefix.pop();
            return;
        }
        for k in 0..=remaining {
            prefix.push(k);
            rec(remaining - k, parts - 1, prefix, out);
            prefix.pop();
        }
    }
    let mut out = Vec::new();
    rec(steps, parts, &mut Vec::new(), &mut out);
    out
}

/// Coordinate ascent over per-node simplex grids, maximizing the min cut.
///
/// Starts from the uniform distribution, sweeps nodes in ascending id
/// order, and adopts the first grid vector that improves the bound
/// (first-improvement). Deterministic for a given configuration.
pub fn optimize_distribution(net: &Network, cfg: &DistSearchConfig) -> Result<BoundResult> {
    if cfg.grid_steps == 0 {
        return Err(Error::InvalidInput("grid resolution must be positive".into()));
    }
    let formula = CutFormula::default_for(net.mode())?;
    let mut dist = InputDistribution::uniform(net);
    let mut best = min_cut_with(net, &dist, formula, cfg.node_cap)?.min_cut_bits;

    let mut grids: BTreeMap<usize, Vec<Vec<f64>>> = BTreeMap::new();
    for u in net.node_ids() {
        let q = net.alphabet(u);
        grids.entry(q).or_insert_with(|| {
            compositions(cfg.grid_steps, q)
                .into_iter()
                .map(|comp| comp.iter().map(|&k| k as f64 / cfg.grid_steps as f64).collect())
                .collect()
        });
    }

    for _ in 0..cfg.max_sweeps {
        let mut improved = false;
        for u in net.node_ids() {
            let saved = dist.node_probs(u).to_vec();
            for candidate in &grids[&net.alphabet(u)] {
                if *candidate == saved {
                    continue;
                }
                dist.set_node(u, candidate.clone());
                let value = min_cut_with(net, &dist, formula, cfg.node_cap)?.min_cut_bits;
                if value > best + 1e-12 {
                    best = value;
                    improved = true;
                    break;
                }
                dist.set_node(u, saved.clone());
            }
        }
        if !improved {
            break;
        }
    }
    min_cut_with(net, &dist, formula, cfg.node_cap)
}

/// The cut-set report document: per destination, one line per cut with the
/// node set, both boundaries, and the value to 9 decimal places; then the
/// overall minimum and all argmin cuts. Deterministically ordered.
pub fn report_doc(
    net: &Network,
    dist: &InputDistribution,
    formula: CutFormula,
    node_cap: usize,
) -> Result<(String, BoundResult)> {
    let values = all_cut_values(net, dist, formula, node_cap)?;
    let bound = assemble_bound(net, dist, &values)?;
    let mut out = String::new();
    for &t in net.destinations() {
        let mut rows: Vec<&(Cut, f64)> = values
            .iter()
            .filter(|(c, _)| !c.s_side.contains(t))
            .collect();
        rows.sort_by(|a, b| a.0.s_side.lex_cmp(b.0.s_side));
        out.push_str(&format!("dest={t} cuts={}\n", rows.len()));
        for (cut, value) in rows {
            out.push_str(&format!(
                "cut S={} b1={} b2={} value={:.9}\n",
                cut.s_side, cut.tail_boundary, cut.head_boundary, value
            ));
        }
        out.push_str(&format!("dest_min={t} value={:.9}\n", bound.per_destination[&t]));
    }
    out.push_str(&format!("min_cut_bits={:.9}\n", bound.min_cut_bits));
    for cut in &bound.argmin_cuts {
        out.push_str(&format!("argmin S={}\n", cut.s_side));
    }
    Ok((out, bound))
}
