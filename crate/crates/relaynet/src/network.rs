//! Relay-network topologies and channel semantics.
//!
//! A [`Network`] is a finite acyclic directed graph with one source node,
//! one or more destination nodes, and per-edge or per-node channel
//! functions. Three channel semantics are supported:
//!
//! * `aref` — broadcast without interference: every edge `(u,v)` carries its
//!   own deterministic symbol map `Y_uv = f_uv(X_u)`, and a node observes
//!   the tuple of its incoming edge outputs;
//! * `deterministic` — general deterministic interference: a node observes a
//!   single symbol computed from the tuple of its in-neighbors' inputs;
//! * `gaussian` — complex-gain edges used by the SNR-scaling formulas only.
//!
//! Networks are built from a small line-oriented text format (`relaynet v1`,
//! see [`Network::parse`]) or programmatically via [`NetworkBuilder`].

use std::cmp::Ordering;
use std::collections::{BTreeMap, BTreeSet, BinaryHeap, VecDeque};
use std::fmt;

use crate::error::{Error, Result};

/// Channel symbol; node alphabets are `0..q`.
pub type Symbol = u16;

/// Dense 0-based node index. The text format numbers nodes `1..=|V|`;
/// [`NodeId::label`] recovers the external id.
#[derive(Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Debug)]
pub struct NodeId(u32);

impl NodeId {
    pub fn from_index(index: usize) -> Self {
        NodeId(index as u32)
    }

    pub fn index(self) -> usize {
        self.0 as usize
    }

    /// External 1-based id as used in network files and reports.
    pub fn label(self) -> u32 {
        self.0 + 1
    }
}

impl fmt::Display for NodeId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.label())
    }
}

#[derive(Clone, Copy, PartialEq, Eq, Debug)]
pub enum Role {
    Source,
    Relay,
    Dest,
}

impl Role {
    fn as_str(self) -> &'static str {
        match self {
            Role::Source => "source",
            Role::Relay => "relay",
            Role::Dest => "dest",
        }
    }
}

#[derive(Clone, Copy, PartialEq, Eq, Debug)]
pub enum Mode {
    Aref,
    Deterministic,
    Gaussian,
}

impl Mode {
    pub fn as_str(self) -> &'static str {
        match self {
            Mode::Aref => "aref",
            Mode::Deterministic => "deterministic",
            Mode::Gaussian => "gaussian",
        }
    }
}

/// Per-edge symbol map (`aref` mode).
#[derive(Clone, PartialEq, Eq, Debug)]
pub enum EdgeFn {
    Identity,
    Const(Symbol),
    Table(Vec<Symbol>),
}

impl EdgeFn {
    pub fn apply(&self, x: Symbol) -> Symbol {
        match self {
            EdgeFn::Identity => x,
            EdgeFn::Const(c) => *c,
            EdgeFn::Table(t) => t[x as usize],
        }
    }

    fn render(&self) -> String {
        match self {
            EdgeFn::Identity => "identity".to_string(),
            EdgeFn::Const(c) => format!("const:{c}"),
            EdgeFn::Table(t) => {
                let cells: Vec<String> = t.iter().map(|s| s.to_string()).collect();
                format!("table:{}", cells.join(","))
            }
        }
    }
}

/// Per-node receive function over the tuple of in-neighbor inputs
/// (`deterministic` mode). Table entries are row-major with in-neighbors
/// ordered by ascending node id.
#[derive(Clone, PartialEq, Eq, Debug)]
pub enum RxFn {
    /// Sum of the incoming symbols modulo the node alphabet size.
    Xor,
    Table(Vec<Symbol>),
}

impl RxFn {
    /// Evaluate on one tuple of in-neighbor symbols. `arities` gives the
    /// in-neighbor alphabet sizes in the same order as `inputs`.
    pub fn apply(&self, inputs: &[Symbol], arities: &[usize], q_out: usize) -> Symbol {
        match self {
            RxFn::Xor => {
                let sum: u64 = inputs.iter().map(|&s| s as u64).sum();
                (sum % q_out as u64) as Symbol
            }
            RxFn::Table(t) => {
                let mut idx = 0usize;
                for (&x, &q) in inputs.iter().zip(arities) {
                    idx = idx * q + x as usize;
                }
                t[idx]
            }
        }
    }

    fn render(&self) -> String {
        match self {
            RxFn::Xor => "xor".to_string(),
            RxFn::Table(t) => {
                let cells: Vec<String> = t.iter().map(|s| s.to_string()).collect();
                format!("table:{}", cells.join(","))
            }
        }
    }
}

/// Set of nodes packed as a bitmask over internal indices.
#[derive(Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Debug, Default)]
pub struct NodeSet(u64);

impl NodeSet {
    pub const MAX_NODES: usize = 64;

    pub fn empty() -> Self {
        NodeSet(0)
    }

    pub fn from_bits(bits: u64) -> Self {
        NodeSet(bits)
    }

    pub fn bits(self) -> u64 {
        self.0
    }

    pub fn insert(&mut self, id: NodeId) {
        self.0 |= 1 << id.index();
    }

    pub fn contains(self, id: NodeId) -> bool {
        self.0 & (1 << id.index()) != 0
    }

    pub fn len(self) -> usize {
        self.0.count_ones() as usize
    }

    pub fn is_empty(self) -> bool {
        self.0 == 0
    }

    pub fn union(self, other: NodeSet) -> NodeSet {
        NodeSet(self.0 | other.0)
    }

    /// All nodes of an `n`-node network that are not in this set.
    pub fn complement(self, n: usize) -> NodeSet {
        let all = if n == 64 { u64::MAX } else { (1u64 << n) - 1 };
        NodeSet(all & !self.0)
    }

    pub fn iter(self) -> impl Iterator<Item = NodeId> {
        let mut bits = self.0;
        std::iter::from_fn(move || {
            if bits == 0 {
                None
            } else {
                let i = bits.trailing_zeros();
                bits &= bits - 1;
                Some(NodeId(i))
            }
        })
    }

    /// Order node sets as ascending label sequences (lexicographic).
    pub fn lex_cmp(self, other: NodeSet) -> Ordering {
        let a: Vec<u32> = self.iter().map(NodeId::label).collect();
        let b: Vec<u32> = other.iter().map(NodeId::label).collect();
        a.cmp(&b)
    }
}

impl FromIterator<NodeId> for NodeSet {
    fn from_iter<I: IntoIterator<Item = NodeId>>(iter: I) -> Self {
        let mut s = NodeSet::empty();
        for id in iter {
            s.insert(id);
        }
        s
    }
}

impl fmt::Display for NodeSet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{{")?;
        for (k, id) in self.iter().enumerate() {
            if k > 0 {
                write!(f, ",")?;
            }
            write!(f, "{id}")?;
        }
        write!(f, "}}")
    }
}

/// Longest-path layering of the subgraph reachable from the source.
#[derive(Clone, Debug, PartialEq)]
pub struct Layering {
    /// Longest path length from the source, per node; `None` if unreachable.
    pub layer: Vec<Option<u32>>,
    /// Longest path from the source to any destination.
    pub longest: u32,
    /// True iff all source-to-node paths have equal length, for every
    /// reachable node.
    pub is_layered: bool,
}

/// A validated relay network.
#[derive(Clone, Debug, PartialEq)]
pub struct Network {
    mode: Mode,
    roles: Vec<Role>,
    alphabet: Vec<usize>,
    edges: Vec<(NodeId, NodeId)>,
    out_nbrs: Vec<Vec<NodeId>>,
    in_nbrs: Vec<Vec<NodeId>>,
    edge_fns: BTreeMap<(NodeId, NodeId), EdgeFn>,
    rx_fns: BTreeMap<NodeId, RxFn>,
    gains: BTreeMap<(NodeId, NodeId), f64>,
    source: NodeId,
    dests: Vec<NodeId>,
}

impl Network {
    pub fn builder(mode: Mode) -> NetworkBuilder {
        NetworkBuilder::new(mode)
    }

    pub fn mode(&self) -> Mode {
        self.mode
    }

    pub fn node_count(&self) -> usize {
        self.roles.len()
    }

    pub fn node_ids(&self) -> impl Iterator<Item = NodeId> {
        (0..self.roles.len() as u32).map(NodeId)
    }

    pub fn role(&self, u: NodeId) -> Role {
        self.roles[u.index()]
    }

    pub fn source(&self) -> NodeId {
        self.source
    }

    pub fn destinations(&self) -> &[NodeId] {
        &self.dests
    }

    /// Input alphabet size of node `u`.
    pub fn alphabet(&self, u: NodeId) -> usize {
        self.alphabet[u.index()]
    }

    pub fn edges(&self) -> &[(NodeId, NodeId)] {
        &self.edges
    }

    pub fn edge_count(&self) -> usize {
        self.edges.len()
    }

    pub fn has_edge(&self, u: NodeId, v: NodeId) -> bool {
        self.out_nbrs[u.index()].binary_search(&v).is_ok()
    }

    /// In-neighbors of `v`, ascending.
    pub fn in_neighbors(&self, v: NodeId) -> &[NodeId] {
        &self.in_nbrs[v.index()]
    }

    /// Out-neighbors of `u`, ascending.
    pub fn out_neighbors(&self, u: NodeId) -> &[NodeId] {
        &self.out_nbrs[u.index()]
    }

    pub fn edge_fn(&self, u: NodeId, v: NodeId) -> Option<&EdgeFn> {
        self.edge_fns.get(&(u, v))
    }

    pub fn rx_fn(&self, v: NodeId) -> Option<&RxFn> {
        self.rx_fns.get(&v)
    }

    pub fn gain(&self, u: NodeId, v: NodeId) -> Option<f64> {
        self.gains.get(&(u, v)).copied()
    }

    /// Deterministic topological order; ties broken by ascending node id.
    pub fn toposort(&self) -> Vec<NodeId> {
        let n = self.node_count();
        let mut indeg: Vec<usize> = (0..n).map(|i| self.in_nbrs[i].len()).collect();
        let mut heap: BinaryHeap<std::cmp::Reverse<NodeId>> = (0..n)
            .filter(|&i| indeg[i] == 0)
            .map(|i| std::cmp::Reverse(NodeId(i as u32)))
            .collect();
        let mut order = Vec::with_capacity(n);
        while let Some(std::cmp::Reverse(u)) = heap.pop() {
            order.push(u);
            for &v in &self.out_nbrs[u.index()] {
                indeg[v.index()] -= 1;
                if indeg[v.index()] == 0 {
                    heap.push(std::cmp::Reverse(v));
                }
            }
        }
        debug_assert_eq!(order.len(), n);
        order
    }

    /// Per-node reachability from the source.
    pub fn reachable_from_source(&self) -> Vec<bool> {
        let mut seen = vec![false; self.node_count()];
        let mut queue = VecDeque::new();
        seen[self.source.index()] = true;
        queue.push_back(self.source);
        while let Some(u) = queue.pop_front() {
            for &v in &self.out_nbrs[u.index()] {
                if !seen[v.index()] {
                    seen[v.index()] = true;
                    queue.push_back(v);
                }
            }
        }
        seen
    }

    /// Longest source-to-destination path length and the layered property.
    ///
    /// Errors if no destination is reachable from the source.
    pub fn layering(&self) -> Result<Layering> {
        let reachable = self.reachable_from_source();
        let mut layer: Vec<Option<u32>> = vec![None; self.node_count()];
        layer[self.source.index()] = Some(0);
        for u in self.toposort() {
            if !reachable[u.index()] {
                continue;
            }
            let du = layer[u.index()].expect("reachable node visited in topo order");
            for &v in &self.out_nbrs[u.index()] {
                let dv = layer[v.index()].get_or_insert(0);
                *dv = (*dv).max(du + 1);
            }
        }
        let longest = self
            .dests
            .iter()
            .filter_map(|t| layer[t.index()])
            .max()
            .ok_or_else(|| {
                Error::NoDestination("no destination is reachable from the source".into())
            })?;
        let is_layered = self.edges.iter().all(|&(u, v)| {
            !reachable[u.index()]
                || layer[v.index()] == layer[u.index()].map(|d| d + 1)
        });
        Ok(Layering {
            layer,
            longest,
            is_layered,
        })
    }

    /// True iff every destination is reachable from the source, i.e. an
    /// out-arborescence rooted at the source covers all destinations.
    pub fn steiner_reachability(&self) -> bool {
        let reachable = self.reachable_from_source();
        self.dests.iter().all(|t| reachable[t.index()])
    }

    /// Render as a canonical `relaynet v1` document; `parse` inverts this.
    pub fn render(&self) -> String {
        let mut out = String::from("relaynet v1\n");
        out.push_str(&format!("mode {}\n", self.mode.as_str()));
        if self.mode != Mode::Gaussian {
            out.push_str(&format!("alphabet q={}\n", self.alphabet[0]));
        }
        for u in self.node_ids() {
            out.push_str(&format!("node {} role={}\n", u, self.role(u).as_str()));
        }
        for &(u, v) in &self.edges {
            match self.mode {
                Mode::Aref => {
                    let f = &self.edge_fns[&(u, v)];
                    out.push_str(&format!("edge {u} {v} fn={}\n", f.render()));
                }
                Mode::Deterministic => out.push_str(&format!("edge {u} {v}\n")),
                Mode::Gaussian => {
                    out.push_str(&format!("edge {u} {v} gain={}\n", self.gains[&(u, v)]));
                }
            }
        }
        if self.mode == Mode::Deterministic {
            for (v, f) in &self.rx_fns {
                out.push_str(&format!("rxfn {v} {}\n", f.render()));
            }
        }
        out
    }

    /// Parse a `relaynet v1` document. Unknown directives or keys are
    /// errors; `#` starts a comment.
    pub fn parse(text: &str) -> Result<Network> {
        let err = |line: usize, msg: String| Error::Parse { line, msg };
        let mut lines = Vec::new();
        for (i, raw) in text.lines().enumerate() {
            let body = match raw.find('#') {
                Some(p) => &raw[..p],
                None => raw,
            };
            let body = body.trim();
            if !body.is_empty() {
                lines.push((i + 1, body));
            }
        }
        let Some(&(first_no, first)) = lines.first() else {
            return Err(err(1, "empty document; expected `relaynet v1`".into()));
        };
        if first != "relaynet v1" {
            return Err(err(first_no, format!("expected `relaynet v1`, found `{first}`")));
        }

        let mut mode: Option<Mode> = None;
        let mut builder: Option<NetworkBuilder> = None;
        let mut declared: BTreeSet<u32> = BTreeSet::new();
        let mut seen_alphabet = false;

        for &(no, line) in &lines[1..] {
            let toks: Vec<&str> = line.split_whitespace().collect();
            match toks[0] {
                "mode" => {
                    if mode.is_some() {
                        return Err(err(no, "duplicate `mode` line".into()));
                    }
                    if toks.len() != 2 {
                        return Err(err(no, "usage: mode aref|deterministic|gaussian".into()));
                    }
                    let m = match toks[1] {
                        "aref" => Mode::Aref,
                        "deterministic" => Mode::Deterministic,
                        "gaussian" => Mode::Gaussian,
                        other => return Err(err(no, format!("unknown mode `{other}`"))),
                    };
                    mode = Some(m);
                    builder = Some(NetworkBuilder::new(m));
                }
                "alphabet" => {
                    let b = builder
                        .as_mut()
                        .ok_or_else(|| err(no, "`alphabet` must come after `mode`".into()))?;
                    if mode == Some(Mode::Gaussian) {
                        return Err(err(no, "`alphabet` is not valid in gaussian mode".into()));
                    }
                    if seen_alphabet {
                        return Err(err(no, "duplicate `alphabet` line".into()));
                    }
                    if toks.len() != 2 || !toks[1].starts_with("q=") {
                        return Err(err(no, "usage: alphabet q=<int>".into()));
                    }
                    let q: usize = toks[1][2..]
                        .parse()
                        .map_err(|_| err(no, format!("invalid alphabet size `{}`", &toks[1][2..])))?;
                    b.set_alphabet(q);
                    seen_alphabet = true;
                }
                "node" => {
                    let b = builder
                        .as_mut()
                        .ok_or_else(|| err(no, "`node` must come after `mode`".into()))?;
                    if toks.len() < 2 || toks.len() > 3 {
                        return Err(err(no, "usage: node <id> [role=source|dest|relay]".into()));
                    }
                    let id: u32 = toks[1]
                        .parse()
                        .map_err(|_| err(no, format!("invalid node id `{}`", toks[1])))?;
                    if id == 0 {
                        return Err(err(no, "node ids start at 1".into()));
                    }
                    if !declared.insert(id) {
                        return Err(err(no, format!("duplicate node {id}")));
                    }
                    let role = match toks.get(2) {
                        None => Role::Relay,
                        Some(&"role=source") => Role::Source,
                        Some(&"role=dest") => Role::Dest,
                        Some(&"role=relay") => Role::Relay,
                        Some(other) => {
                            return Err(err(no, format!("unknown node attribute `{other}`")))
                        }
                    };
                    b.push_node(id, role);
                }
                "edge" => {
                    let b = builder
                        .as_mut()
                        .ok_or_else(|| err(no, "`edge` must come after `mode`".into()))?;
                    if toks.len() < 3 {
                        return Err(err(no, "usage: edge <u> <v> [...]".into()));
                    }
                    let u: u32 = toks[1]
                        .parse()
                        .map_err(|_| err(no, format!("invalid node id `{}`", toks[1])))?;
                    let v: u32 = toks[2]
                        .parse()
                        .map_err(|_| err(no, format!("invalid node id `{}`", toks[2])))?;
                    if !declared.contains(&u) || !declared.contains(&v) {
                        return Err(err(no, "edge references an undeclared node".into()));
                    }
                    match mode.unwrap() {
                        Mode::Aref => {
                            if toks.len() != 4 || !toks[3].starts_with("fn=") {
                                return Err(err(no, "aref edges need fn=identity|const:<c>|table:<...>".into()));
                            }
                            let f = parse_edge_fn(&toks[3][3..]).map_err(|m| err(no, m))?;
                            b.push_edge_fn(u, v, f);
                        }
                        Mode::Deterministic => {
                            if toks.len() != 3 {
                                return Err(err(no, "deterministic edges take no attributes".into()));
                            }
                            b.push_edge(u, v);
                        }
                        Mode::Gaussian => {
                            if toks.len() != 4 || !toks[3].starts_with("gain=") {
                                return Err(err(no, "gaussian edges need gain=<decimal>".into()));
                            }
                            let g: f64 = toks[3][5..]
                                .parse()
                                .map_err(|_| err(no, format!("invalid gain `{}`", &toks[3][5..])))?;
                            b.push_gain(u, v, g);
                        }
                    }
                }
                "rxfn" => {
                    let b = builder
                        .as_mut()
                        .ok_or_else(|| err(no, "`rxfn` must come after `mode`".into()))?;
                    if mode != Some(Mode::Deterministic) {
                        return Err(err(no, "`rxfn` is only valid in deterministic mode".into()));
                    }
                    if toks.len() != 3 {
                        return Err(err(no, "usage: rxfn <v> xor|table:<...>".into()));
                    }
                    let v: u32 = toks[1]
                        .parse()
                        .map_err(|_| err(no, format!("invalid node id `{}`", toks[1])))?;
                    if !declared.contains(&v) {
                        return Err(err(no, "rxfn references an undeclared node".into()));
                    }
                    let f = parse_rx_fn(toks[2]).map_err(|m| err(no, m))?;
                    b.push_rx_fn(v, f);
                }
                other => return Err(err(no, format!("unknown directive `{other}`"))),
            }
        }

        let builder = builder.ok_or_else(|| {
            err(lines.last().map(|&(n, _)| n).unwrap_or(1), "missing `mode` line".into())
        })?;
        builder.build()
    }
}

fn parse_edge_fn(spec: &str) -> std::result::Result<EdgeFn, String> {
    if spec == "identity" {
        Ok(EdgeFn::Identity)
    } else if let Some(c) = spec.strip_prefix("const:") {
        let c: Symbol = c.parse().map_err(|_| format!("invalid const symbol `{c}`"))?;
        Ok(EdgeFn::Const(c))
    } else if let Some(cells) = spec.strip_prefix("table:") {
        Ok(EdgeFn::Table(parse_symbol_list(cells)?))
    } else {
        Err(format!("unknown edge function `{spec}`"))
    }
}

fn parse_rx_fn(spec: &str) -> std::result::Result<RxFn, String> {
    if spec == "xor" {
        Ok(RxFn::Xor)
    } else if let Some(cells) = spec.strip_prefix("table:") {
        Ok(RxFn::Table(parse_symbol_list(cells)?))
    } else {
        Err(format!("unknown receive function `{spec}`"))
    }
}

fn parse_symbol_list(cells: &str) -> std::result::Result<Vec<Symbol>, String> {
    cells
        .split(',')
        .map(|c| c.trim().parse::<Symbol>().map_err(|_| format!("invalid table entry `{c}`")))
        .collect()
}

/// Programmatic construction; all ids are external 1-based labels and must
/// be dense `1..=|V|`. Validation happens in [`NetworkBuilder::build`].
pub struct NetworkBuilder {
    mode: Mode,
    q: usize,
    nodes: Vec<(u32, Role)>,
    edges: Vec<(u32, u32)>,
    edge_fns: Vec<(u32, u32, EdgeFn)>,
    gains: Vec<(u32, u32, f64)>,
    rx_fns: Vec<(u32, RxFn)>,
}

impl NetworkBuilder {
    pub fn new(mode: Mode) -> Self {
        NetworkBuilder {
            mode,
            q: 2,
            nodes: Vec::new(),
            edges: Vec::new(),
            edge_fns: Vec::new(),
            gains: Vec::new(),
            rx_fns: Vec::new(),
        }
    }

    pub fn alphabet(mut self, q: usize) -> Self {
        self.set_alphabet(q);
        self
    }

    pub fn node(mut self, label: u32, role: Role) -> Self {
        self.push_node(label, role);
        self
    }

    /// Deterministic-mode edge (no per-edge payload).
    pub fn edge(mut self, u: u32, v: u32) -> Self {
        self.push_edge(u, v);
        self
    }

    pub fn edge_fn(mut self, u: u32, v: u32, f: EdgeFn) -> Self {
        self.push_edge_fn(u, v, f);
        self
    }

    pub fn gain(mut self, u: u32, v: u32, g: f64) -> Self {
        self.push_gain(u, v, g);
        self
    }

    pub fn rx_fn(mut self, v: u32, f: RxFn) -> Self {
        self.push_rx_fn(v, f);
        self
    }

    fn set_alphabet(&mut self, q: usize) {
        self.q = q;
    }

    fn push_node(&mut self, label: u32, role: Role) {
        self.nodes.push((label, role));
    }

    fn push_edge(&mut self, u: u32, v: u32) {
        self.edges.push((u, v));
    }

    fn push_edge_fn(&mut self, u: u32, v: u32, f: EdgeFn) {
        self.edges.push((u, v));
        self.edge_fns.push((u, v, f));
    }

    fn push_gain(&mut self, u: u32, v: u32, g: f64) {
        self.edges.push((u, v));
        self.gains.push((u, v, g));
    }

    fn push_rx_fn(&mut self, v: u32, f: RxFn) {
        self.rx_fns.push((v, f));
    }

    pub fn build(self) -> Result<Network> {
        let n = self.nodes.len();
        if n == 0 {
            return Err(Error::Validation("network has no nodes".into()));
        }
        if n > NodeSet::MAX_NODES {
            return Err(Error::Validation(format!(
                "too many nodes: {n} (limit {})",
                NodeSet::MAX_NODES
            )));
        }
        // Dense 1..=n labels, any declaration order.
        let mut labels: Vec<u32> = self.nodes.iter().map(|&(l, _)| l).collect();
        labels.sort_unstable();
        for (i, &l) in labels.iter().enumerate() {
            if l as usize != i + 1 {
                return Err(Error::Validation(format!(
                    "node ids must be dense 1..={n}; found id {l}"
                )));
            }
        }
        if self.mode != Mode::Gaussian && self.q < 2 {
            return Err(Error::Validation(format!(
                "alphabet size must be at least 2, got {}",
                self.q
            )));
        }

        let mut roles = vec![Role::Relay; n];
        for &(label, role) in &self.nodes {
            roles[(label - 1) as usize] = role;
        }
        let sources: Vec<usize> = (0..n).filter(|&i| roles[i] == Role::Source).collect();
        if sources.len() != 1 {
            return Err(Error::Validation(format!(
                "exactly one source required, found {}",
                sources.len()
            )));
        }
        let source = NodeId(sources[0] as u32);
        let dests: Vec<NodeId> = (0..n)
            .filter(|&i| roles[i] == Role::Dest)
            .map(|i| NodeId(i as u32))
            .collect();
        if dests.is_empty() {
            return Err(Error::Validation("at least one destination required".into()));
        }

        let id = |label: u32| NodeId(label - 1);
        let mut edges: Vec<(NodeId, NodeId)> = Vec::with_capacity(self.edges.len());
        let mut seen = BTreeSet::new();
        for &(u, v) in &self.edges {
            if u == v {
                return Err(Error::Cycle(format!("self-loop at node {u}")));
            }
            if !seen.insert((u, v)) {
                return Err(Error::Validation(format!("duplicate edge {u} -> {v}")));
            }
            edges.push((id(u), id(v)));
        }
        edges.sort_unstable();

        let mut out_nbrs: Vec<Vec<NodeId>> = vec![Vec::new(); n];
        let mut in_nbrs: Vec<Vec<NodeId>> = vec![Vec::new(); n];
        for &(u, v) in &edges {
            out_nbrs[u.index()].push(v);
            in_nbrs[v.index()].push(u);
        }
        for list in out_nbrs.iter_mut().chain(in_nbrs.iter_mut()) {
            list.sort_unstable();
        }

        // Acyclicity via Kahn's algorithm.
        {
            let mut indeg: Vec<usize> = (0..n).map(|i| in_nbrs[i].len()).collect();
            let mut stack: Vec<usize> = (0..n).filter(|&i| indeg[i] == 0).collect();
            let mut visited = 0;
            while let Some(u) = stack.pop() {
                visited += 1;
                for &v in &out_nbrs[u] {
                    indeg[v.index()] -= 1;
                    if indeg[v.index()] == 0 {
                        stack.push(v.index());
                    }
                }
            }
            if visited != n {
                let stuck = (0..n).find(|&i| indeg[i] > 0).unwrap();
                return Err(Error::Cycle(format!(
                    "cycle detected involving node {}",
                    NodeId(stuck as u32)
                )));
            }
        }

        let alphabet = vec![self.q; n];
        let mut net = Network {
            mode: self.mode,
            roles,
            alphabet,
            edges,
            out_nbrs,
            in_nbrs,
            edge_fns: BTreeMap::new(),
            rx_fns: BTreeMap::new(),
            gains: BTreeMap::new(),
            source,
            dests,
        };

        match self.mode {
            Mode::Aref => {
                for (u, v, f) in self.edge_fns {
                    let q_u = net.alphabet[(u - 1) as usize];
                    match &f {
                        EdgeFn::Identity => {}
                        EdgeFn::Const(c) => {
                            if (*c as usize) >= q_u {
                                return Err(Error::Validation(format!(
                                    "edge {u}->{v}: const symbol {c} outside alphabet 0..{q_u}"
                                )));
                            }
                        }
                        EdgeFn::Table(t) => {
                            if t.len() != q_u {
                                return Err(Error::Validation(format!(
                                    "edge {u}->{v}: table length {} != sender alphabet {q_u}",
                                    t.len()
                                )));
                            }
                            if let Some(&bad) = t.iter().find(|&&s| (s as usize) >= q_u) {
                                return Err(Error::Validation(format!(
                                    "edge {u}->{v}: table output {bad} outside alphabet 0..{q_u}"
                                )));
                            }
                        }
                    }
                    net.edge_fns.insert((id(u), id(v)), f);
                }
                for &(u, v) in &net.edges {
                    if !net.edge_fns.contains_key(&(u, v)) {
                        return Err(Error::Validation(format!(
                            "edge {u}->{v} is missing its edge function"
                        )));
                    }
                }
            }
            Mode::Deterministic => {
                let mut rx: BTreeMap<NodeId, RxFn> = BTreeMap::new();
                for (v, f) in self.rx_fns {
                    if rx.insert(id(v), f).is_some() {
                        return Err(Error::Validation(format!("duplicate rxfn for node {v}")));
                    }
                }
                for v in net.node_ids() {
                    let indeg = net.in_nbrs[v.index()].len();
                    match rx.get(&v) {
                        None if indeg > 0 => {
                            return Err(Error::Validation(format!(
                                "node {v} has in-degree {indeg} but no rxfn"
                            )));
                        }
                        Some(_) if indeg == 0 => {
                            return Err(Error::Validation(format!(
                                "node {v} has an rxfn but no incoming edges"
                            )));
                        }
                        Some(RxFn::Table(t)) => {
                            let domain: usize = net.in_nbrs[v.index()]
                                .iter()
                                .map(|u| net.alphabet[u.index()])
                                .product();
                            if t.len() != domain {
                                return Err(Error::Validation(format!(
                                    "node {v}: rxfn table length {} != product of in-neighbor alphabets {domain}",
                                    t.len()
                                )));
                            }
                            let q_v = net.alphabet[v.index()];
                            if let Some(&bad) = t.iter().find(|&&s| (s as usize) >= q_v) {
                                return Err(Error::Validation(format!(
                                    "node {v}: rxfn output {bad} outside alphabet 0..{q_v}"
                                )));
                            }
                        }
                        _ => {}
                    }
                }
                net.rx_fns = rx;
            }
            Mode::Gaussian => {
                for (u, v, g) in self.gains {
                    if !g.is_finite() || g <= 0.0 {
                        return Err(Error::Validation(format!(
                            "edge {u}->{v}: gain must be finite and positive, got {g}"
                        )));
                    }
                    net.gains.insert((id(u), id(v)), g);
                }
            }
        }

        Ok(net)
    }
}
