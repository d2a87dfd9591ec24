//! Monte-Carlo simulation of random coding over deterministic networks.
//!
//! Each trial draws a fresh random codebook at the source and a fresh
//! random forwarding map at every other node, runs every message through
//! the network in one topological pass per message (each node sends a
//! function of the whole block it received in the previous activation), and
//! applies the ambiguity decoder at each destination: message `w` is in
//! error iff some other message produces the same destination output block.
//!
//! Forwarding maps over all possible received blocks would be astronomically
//! large, so images are derived on demand: the image of a received block is
//! drawn from a ChaCha stream seeded by `(trial, node, block contents)` and
//! cached. A block therefore always maps to the same image (the maps are
//! functions), distinct blocks get independent draws, and the whole
//! experiment is reproducible bit-for-bit from the master seed regardless
//! of trial execution order or worker count.

use std::collections::{BTreeMap, HashMap};

use crate::cuts::Cut;
use crate::error::{Error, Result};
use crate::info::{self, InputDistribution, Var};
use crate::network::{Mode, Network, NodeId, NodeSet, Symbol};
use crate::par;
use crate::rng::{
    is_robustly_typical, mix, mix_symbols, rng_from, sample_block, TAG_CODEWORD, TAG_PAIRS,
    TAG_RELAY, TAG_TRIAL,
};

/// Default cap on the number of messages `ceil(2^(nR))`.
pub const DEFAULT_MESSAGE_CAP: usize = 1 << 16;
/// Default cap on message pairs sampled for distinguishability statistics.
pub const DEFAULT_PAIR_SAMPLE_CAP: u64 = 10_000;
/// Default cap on rejection-sampling attempts in strict-typical mode.
pub const DEFAULT_ATTEMPT_CAP: u32 = 100_000;

#[derive(Clone, Copy, PartialEq, Eq, Debug)]
pub enum TypicalityMode {
    /// Draw codewords and forwarding images i.i.d. per symbol.
    IidShortcut,
    /// Rejection-sample them from the robustly typical set.
    StrictTypical,
}

impl TypicalityMode {
    pub fn as_str(self) -> &'static str {
        match self {
            TypicalityMode::IidShortcut => "iid",
            TypicalityMode::StrictTypical => "strict",
        }
    }
}

#[derive(Clone, Copy, Debug)]
pub struct TypicalityConfig {
    pub mode: TypicalityMode,
    pub delta: f64,
    pub attempt_cap: u32,
}

impl TypicalityConfig {
    pub fn iid() -> Self {
        TypicalityConfig {
            mode: TypicalityMode::IidShortcut,
            delta: 0.1,
            attempt_cap: DEFAULT_ATTEMPT_CAP,
        }
    }

    pub fn strict(delta: f64) -> Result<Self> {
        if !(delta > 0.0 && delta < 1.0) {
            return Err(Error::InvalidInput(format!(
                "typicality delta must lie in (0,1), got {delta}"
            )));
        }
        Ok(TypicalityConfig {
            mode: TypicalityMode::StrictTypical,
            delta,
            attempt_cap: DEFAULT_ATTEMPT_CAP,
        })
    }
}

impl Default for TypicalityConfig {
    fn default() -> Self {
        TypicalityConfig::iid()
    }
}

impl PartialEq for TypicalityConfig {
    fn eq(&self, other: &Self) -> bool {
        self.mode == other.mode
            && self.delta == other.delta
            && self.attempt_cap == other.attempt_cap
    }
}

#[derive(Clone, Debug)]
pub struct RunConfig {
    /// Block length in channel uses.
    pub n: usize,
    /// Rate in bits per use; the codebook has `ceil(2^(nR))` words.
    pub rate: f64,
    pub trials: u64,
    pub seed: u64,
    pub typicality: TypicalityConfig,
    pub message_cap: usize,
    /// Record per-cut distinguishability-set counts.
    pub cut_stats: bool,
    pub pair_sample_cap: u64,
}

impl RunConfig {
    pub fn new(n: usize, rate: f64, trials: u64, seed: u64) -> Self {
        RunConfig {
            n,
            rate,
            trials,
            seed,
            typicality: TypicalityConfig::default(),
            message_cap: DEFAULT_MESSAGE_CAP,
            cut_stats: false,
            pair_sample_cap: DEFAULT_PAIR_SAMPLE_CAP,
        }
    }
}

/// Number of messages `ceil(2^(nR))`, checked against the cap.
pub fn message_count(n: usize, rate: f64, cap: usize) -> Result<usize> {
    if n == 0 {
        return Err(Error::InvalidInput("block length must be positive".into()));
    }
    if !(rate.is_finite() && rate >= 0.0) {
        return Err(Error::InvalidInput(format!("rate must be nonnegative, got {rate}")));
    }
    let m = (n as f64 * rate).exp2().ceil();
    if m > cap as f64 {
        return Err(Error::CapExceeded(format!(
            "codebook of ceil(2^({n}*{rate})) = {m:.0} messages exceeds the cap of {cap}"
        )));
    }
    Ok(m as usize)
}

/// All node input and output blocks of one trial, for every message.
///
/// Blocks are stored flat per node: message `w`'s input block is
/// `x[v][w*n .. (w+1)*n]`, its output block `y[v][w*stride(v) ..]` where a
/// node's output stride is `n` per incoming edge in aref mode (edge-major)
/// and `n` in deterministic mode.
pub struct TrialRealization {
    n: usize,
    messages: usize,
    x: Vec<Vec<Symbol>>,
    y: Vec<Vec<Symbol>>,
    y_stride: Vec<usize>,
}

impl TrialRealization {
    pub fn message_count(&self) -> usize {
        self.messages
    }

    /// Input (transmitted) block of node `v` for message `w`.
    pub fn x_block(&self, v: NodeId, w: usize) -> &[Symbol] {
        &self.x[v.index()][w * self.n..(w + 1) * self.n]
    }

    /// Output (received) block of node `v` for message `w`; empty when the
    /// node has no incoming edges.
    pub fn y_block(&self, v: NodeId, w: usize) -> &[Symbol] {
        let s = self.y_stride[v.index()];
        &self.y[v.index()][w * s..(w + 1) * s]
    }
}

struct BlockSampler<'a> {
    dist: &'a InputDistribution,
    typ: TypicalityConfig,
    n: usize,
}

impl BlockSampler<'_> {
    /// Draw node `v`'s length-`n` input block from the seeded stream,
    /// rejection-sampling against robust typicality in strict mode.
    fn sample(&self, seed: u64, v: NodeId) -> Result<Vec<Symbol>> {
        let mut rng = rng_from(&[seed]);
        let probs = self.dist.node_probs(v);
        match self.typ.mode {
            TypicalityMode::IidShortcut => Ok(sample_block(&mut rng, probs, self.n)),
            TypicalityMode::StrictTypical => {
                for _ in 0..self.typ.attempt_cap {
                    let block = sample_block(&mut rng, probs, self.n);
                    if is_robustly_typical(&block, probs, self.typ.delta) {
                        return Ok(block);
                    }
                }
                Err(Error::Sampling(format!(
                    "typical set T_delta^n(P_X{}) yielded no sample in {} attempts (n={}, delta={}); the set is empty or far too small",
                    v, self.typ.attempt_cap, self.n, self.typ.delta
                )))
            }
        }
    }
}

/// Materialize one trial: fresh codebook and forwarding maps from the
/// trial's seed stream, then all node blocks for every message.
pub fn realize_trial(
    net: &Network,
    dist: &InputDistribution,
    cfg: &RunConfig,
    trial: u64,
) -> Result<TrialRealization> {
    if net.mode() == Mode::Gaussian {
        return Err(Error::Mode(
            "coded simulation is not defined for gaussian networks".into(),
        ));
    }
    let n = cfg.n;
    let m = message_count(n, cfg.rate, cfg.message_cap)?;
    let trial_seed = mix(&[cfg.seed, TAG_TRIAL, trial]);
    let sampler = BlockSampler {
        dist,
        typ: cfg.typicality,
        n,
    };

    let nodes = net.node_count();
    let y_stride: Vec<usize> = net
        .node_ids()
        .map(|v| match net.mode() {
            Mode::Aref => n * net.in_neighbors(v).len(),
            _ => {
                if net.in_neighbors(v).is_empty() {
                    0
                } else {
                    n
                }
            }
        })
        .collect();

    let mut x: Vec<Vec<Symbol>> = (0..nodes).map(|_| Vec::with_capacity(m * n)).collect();
    let mut y: Vec<Vec<Symbol>> = (0..nodes)
        .map(|i| Vec::with_capacity(m * y_stride[i]))
        .collect();

    // Forwarding-map caches, one per node. Images are pure functions of
    // (trial, node, received block); the cache only avoids resampling.
    let mut relay_cache: Vec<HashMap<Vec<Symbol>, Vec<Symbol>>> =
        (0..nodes).map(|_| HashMap::new()).collect();

    let order = net.toposort();
    let source = net.source();
    let mut rx_inputs: Vec<Symbol> = Vec::new();

    for w in 0..m {
        for &v in &order {
            let vi = v.index();
            // Received block first: a function of the in-neighbors' inputs.
            let y_start = y[vi].len();
            match net.mode() {
                Mode::Aref => {
                    for &u in net.in_neighbors(v) {
                        let f = net.edge_fn(u, v).expect("validated edge");
                        let xu = &x[u.index()][w * n..(w + 1) * n];
                        for &s in xu {
                            y[vi].push(f.apply(s));
                        }
                    }
                }
                Mode::Deterministic => {
                    let ins = net.in_neighbors(v);
                    if !ins.is_empty() {
                        let f = net.rx_fn(v).expect("validated rxfn");
                        let arities: Vec<usize> =
                            ins.iter().map(|u| net.alphabet(*u)).collect();
                        for i in 0..n {
                            rx_inputs.clear();
                            for &u in ins {
                                rx_inputs.push(x[u.index()][w * n + i]);
                            }
                            y[vi].push(f.apply(&rx_inputs, &arities, net.alphabet(v)));
                        }
                    }
                }
                Mode::Gaussian => unreachable!(),
            }

            // Transmitted block: codeword at the source, forwarding image
            // elsewhere.
            if v == source {
                let seed = mix(&[trial_seed, TAG_CODEWORD, w as u64]);
                let block = sampler.sample(seed, v)?;
                x[vi].extend_from_slice(&block);
            } else {
                let received = y[vi][y_start..].to_vec();
                if let Some(img) = relay_cache[vi].get(&received) {
                    let img = img.clone();
                    x[vi].extend_from_slice(&img);
                } else {
                    let seed = mix(&[trial_seed, TAG_RELAY, vi as u64, mix_symbols(trial_seed, &received)]);
                    let img = sampler.sample(seed, v)?;
                    x[vi].extend_from_slice(&img);
                    relay_cache[vi].insert(received, img);
                }
            }
        }
    }

    Ok(TrialRealization {
        n,
        messages: m,
        x,
        y,
        y_stride,
    })
}

/// Nodes whose output blocks differ under `w` and `w2`; the source is
/// always included by convention.
pub fn distinguishability_set(
    net: &Network,
    tr: &TrialRealization,
    w: usize,
    w2: usize,
) -> NodeSet {
    let mut set = NodeSet::empty();
    set.insert(net.source());
    for v in net.node_ids() {
        if tr.y_block(v, w) != tr.y_block(v, w2) {
            set.insert(v);
        }
    }
    set
}

/// Errors at destination `t`: messages whose output block collides with
/// another message's.
fn ambiguous_messages(tr: &TrialRealization, t: NodeId) -> u64 {
    let m = tr.messages;
    if m < 2 {
        return 0;
    }
    let mut idx: Vec<u32> = (0..m as u32).collect();
    idx.sort_unstable_by(|&a, &b| tr.y_block(t, a as usize).cmp(tr.y_block(t, b as usize)));
    let mut errors = 0u64;
    let mut run_start = 0;
    for i in 1..=m {
        if i == m
            || tr.y_block(t, idx[i] as usize) != tr.y_block(t, idx[run_start] as usize)
        {
            let run = i - run_start;
            if run > 1 {
                errors += run as u64;
            }
            run_start = i;
        }
    }
    errors
}

/// Per-destination decoder statistics.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct DestReport {
    pub dest: NodeId,
    pub errors: u64,
    /// Message decodings examined: trials x messages.
    pub examined: u64,
}

impl DestReport {
    pub fn p_e(&self) -> f64 {
        if self.examined == 0 {
            0.0
        } else {
            self.errors as f64 / self.examined as f64
        }
    }

    /// Wilson 95% score interval for the error probability.
    pub fn wilson95(&self) -> (f64, f64) {
        wilson95(self.errors, self.examined)
    }
}

fn wilson95(successes: u64, total: u64) -> (f64, f64) {
    if total == 0 {
        return (0.0, 1.0);
    }
    let z = 1.959963984540054_f64;
    let n = total as f64;
    let p = successes as f64 / n;
    let z2 = z * z;
    let denom = 1.0 + z2 / n;
    let center = (p + z2 / (2.0 * n)) / denom;
    let half = z * (p * (1.0 - p) / n + z2 / (4.0 * n * n)).sqrt() / denom;
    ((center - half).max(0.0), (center + half).min(1.0))
}

/// Distinguishability-set counts over sampled message pairs.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CutStats {
    pub pairs_examined: u64,
    /// Node-set bitmask of the distinguishability set -> occurrence count.
    pub counts: BTreeMap<u64, u64>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct ExperimentResult {
    pub n: usize,
    pub rate: f64,
    pub trials: u64,
    pub master_seed: u64,
    pub typicality: TypicalityConfig,
    pub messages: u64,
    pub dests: Vec<DestReport>,
    pub cut_stats: Option<CutStats>,
}

impl ExperimentResult {
    /// Structured text report: a header with all parameters, then one
    /// `dest, trials, errors, p_e, ci_low, ci_high` row per destination.
    pub fn render(&self) -> String {
        let mut out = self.render_header();
        out.push_str("dest, trials, errors, p_e, ci_low, ci_high\n");
        for d in &self.dests {
            out.push_str(&self.render_dest_row(d, None));
        }
        self.render_cut_stats(&mut out);
        out
    }

    fn render_header(&self) -> String {
        format!(
            "n={} rate={:.6} trials={} seed={} typicality={} delta={:.6} messages={}\n",
            self.n,
            self.rate,
            self.trials,
            self.master_seed,
            self.typicality.mode.as_str(),
            self.typicality.delta,
            self.messages
        )
    }

    fn render_dest_row(&self, d: &DestReport, rate: Option<f64>) -> String {
        let (lo, hi) = d.wilson95();
        let prefix = match rate {
            Some(r) => format!("{r:.6}, "),
            None => String::new(),
        };
        format!(
            "{prefix}{}, {}, {}, {:.6}, {:.6}, {:.6}\n",
            d.dest, self.trials, d.errors, d.p_e(), lo, hi
        )
    }

    fn render_cut_stats(&self, out: &mut String) {
        if let Some(stats) = &self.cut_stats {
            out.push_str(&format!("pairs_examined={}\n", stats.pairs_examined));
            let mut keys: Vec<NodeSet> =
                stats.counts.keys().map(|&m| NodeSet::from_bits(m)).collect();
            keys.sort_by(|a, b| a.lex_cmp(*b));
            for k in keys {
                out.push_str(&format!(
                    "cutstat S={} count={}\n",
                    k,
                    stats.counts[&k.bits()]
                ));
            }
        }
    }
}

struct TrialOutput {
    errors: Vec<u64>,
    pairs_examined: u64,
    cut_counts: BTreeMap<u64, u64>,
}

fn run_trial(net: &Network, dist: &InputDistribution, cfg: &RunConfig, trial: u64) -> Result<TrialOutput> {
    let tr = realize_trial(net, dist, cfg, trial)?;
    let errors: Vec<u64> = net
        .destinations()
        .iter()
        .map(|&t| ambiguous_messages(&tr, t))
        .collect();

    let mut pairs_examined = 0u64;
    let mut cut_counts: BTreeMap<u64, u64> = BTreeMap::new();
    if cfg.cut_stats && tr.messages >= 2 {
        let m = tr.messages;
        let total_pairs = m as u64 * (m as u64 - 1) / 2;
        let record = |w: usize, w2: usize, counts: &mut BTreeMap<u64, u64>| {
            let set = distinguishability_set(net, &tr, w, w2);
            *counts.entry(set.bits()).or_insert(0) += 1;
        };
        if total_pairs <= cfg.pair_sample_cap {
            for w in 0..m {
                for w2 in (w + 1)..m {
                    record(w, w2, &mut cut_counts);
                }
            }
            pairs_examined = total_pairs;
        } else {
            let trial_seed = mix(&[cfg.seed, TAG_TRIAL, trial]);
            let mut rng = rng_from(&[trial_seed, TAG_PAIRS]);
            while pairs_examined < cfg.pair_sample_cap {
                let w = sample_index(&mut rng, m);
                let w2 = sample_index(&mut rng, m);
                if w == w2 {
                    continue;
                }
                record(w.min(w2), w.max(w2), &mut cut_counts);
                pairs_examined += 1;
            }
        }
    }

    Ok(TrialOutput {
        errors,
        pairs_examined,
        cut_counts,
    })
}

fn sample_index(rng: &mut rand_chacha::ChaCha8Rng, m: usize) -> usize {
    use rand::Rng;
    rng.random_range(0..m)
}

/// Run the full Monte-Carlo experiment. Trials are independent and fan out
/// across workers; aggregation is a sum of counts, so the result is
/// bit-identical for any worker count.
pub fn run_experiment(
    net: &Network,
    dist: &InputDistribution,
    cfg: &RunConfig,
) -> Result<ExperimentResult> {
    let m = message_count(cfg.n, cfg.rate, cfg.message_cap)?;
    let outputs = par::map_range(cfg.trials as usize, |i| run_trial(net, dist, cfg, i as u64));

    let mut errors = vec![0u64; net.destinations().len()];
    let mut pairs_examined = 0u64;
    let mut cut_counts: BTreeMap<u64, u64> = BTreeMap::new();
    for out in outputs {
        let out = out?;
        for (acc, e) in errors.iter_mut().zip(&out.errors) {
            *acc += e;
        }
        pairs_examined += out.pairs_examined;
        for (k, c) in out.cut_counts {
            *cut_counts.entry(k).or_insert(0) += c;
        }
    }

    let examined = cfg.trials * m as u64;
    let dests = net
        .destinations()
        .iter()
        .zip(errors)
        .map(|(&dest, errors)| DestReport {
            dest,
            errors,
            examined,
        })
        .collect();
    Ok(ExperimentResult {
        n: cfg.n,
        rate: cfg.rate,
        trials: cfg.trials,
        master_seed: cfg.seed,
        typicality: cfg.typicality,
        messages: m as u64,
        dests,
        cut_stats: cfg.cut_stats.then_some(CutStats {
            pairs_examined,
            counts: cut_counts,
        }),
    })
}

/// Run one experiment per rate, reusing the same master seed so codebooks
/// are coupled across rates. Results are returned in the given rate order.
pub fn rate_sweep(
    net: &Network,
    dist: &InputDistribution,
    cfg: &RunConfig,
    rates: &[f64],
) -> Result<Vec<ExperimentResult>> {
    rates
        .iter()
        .map(|&rate| {
            let mut c = cfg.clone();
            c.rate = rate;
            run_experiment(net, dist, &c)
        })
        .collect()
}

/// Sweep table: header, then `rate, dest, trials, errors, p_e, ...` rows.
pub fn render_sweep(results: &[ExperimentResult]) -> String {
    let mut out = String::new();
    if let Some(first) = results.first() {
        out.push_str(&format!(
            "n={} trials={} seed={} typicality={} delta={:.6}\n",
            first.n,
            first.trials,
            first.master_seed,
            first.typicality.mode.as_str(),
            first.typicality.delta
        ));
    }
    out.push_str("rate, dest, trials, errors, p_e, ci_low, ci_high\n");
    for r in results {
        for d in &r.dests {
            out.push_str(&r.render_dest_row(d, Some(r.rate)));
        }
    }
    out
}

/// Theoretical per-cut error exponent in bits:
/// `H(Y_head(S) | X_S^c) - 3 delta H(X_V)`. May be negative for large
/// `delta`; returned as-is.
pub fn theoretical_cut_exponent(
    net: &Network,
    dist: &InputDistribution,
    cut: &Cut,
    delta: f64,
) -> Result<f64> {
    if net.mode() == Mode::Gaussian {
        return Err(Error::Mode(
            "cut exponents are not defined for gaussian networks".into(),
        ));
    }
    let head: Vec<Var> = cut.head_boundary.iter().map(Var::NodeOutput).collect();
    let comp: Vec<Var> = cut.complement(net).iter().map(Var::Input).collect();
    let mut joint = head;
    joint.extend_from_slice(&comp);
    let h_joint = info::joint_entropy(net, dist, &joint)?;
    let h_comp = info::joint_entropy(net, dist, &comp)?;
    Ok((h_joint - h_comp).max(0.0) - 3.0 * delta * dist.total_input_entropy())
}

/// Outcome of checking the typicality consequence for one message pair.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Lemma1Outcome {
    Holds,
    /// One of the messages' full input tuples was not jointly typical; the
    /// implication says nothing about such pairs.
    PreconditionViolated,
    Violated(String),
}

/// Check, for one pair `(w, w2)` with distinguishability set `S`:
/// (a) `(x_S(w2), y_head(S)(w), x_S^c(w))` is jointly robustly typical for
/// the true joint distribution of those variables, and
/// (b) `x_S^c(w2) = x_S^c(w)`.
pub fn lemma1_check(
    net: &Network,
    dist: &InputDistribution,
    tr: &TrialRealization,
    w: usize,
    w2: usize,
    delta: f64,
) -> Result<Lemma1Outcome> {
    let all_inputs: Vec<Var> = net.node_ids().map(Var::Input).collect();
    let input_joint = info::joint_table(net, dist, &all_inputs)?;
    if !message_inputs_typical(net, tr, w, &input_joint, delta)
        || !message_inputs_typical(net, tr, w2, &input_joint, delta)
    {
        return Ok(Lemma1Outcome::PreconditionViolated);
    }
    let set = distinguishability_set(net, tr, w, w2);
    let cut = Cut::from_s_side(net, set);
    let table = lemma1_reference_table(net, dist, &cut)?;
    Ok(lemma1_verify(net, tr, w, w2, &cut, &table, delta))
}

/// The exact joint distribution of `(X_S, Y_head(S), X_S^c)`.
fn lemma1_reference_table(
    net: &Network,
    dist: &InputDistribution,
    cut: &Cut,
) -> Result<BTreeMap<Vec<Symbol>, f64>> {
    let vars = lemma1_vars(net, cut);
    info::joint_table(net, dist, &vars)
}

fn lemma1_vars(net: &Network, cut: &Cut) -> Vec<Var> {
    let mut vars: Vec<Var> = cut.s_side.iter().map(Var::Input).collect();
    vars.extend(cut.head_boundary.iter().map(Var::NodeOutput));
    vars.extend(cut.complement(net).iter().map(Var::Input));
    vars
}

fn message_inputs_typical(
    net: &Network,
    tr: &TrialRealization,
    w: usize,
    input_joint: &BTreeMap<Vec<Symbol>, f64>,
    delta: f64,
) -> bool {
    let n = tr.n;
    let mut counts: HashMap<Vec<Symbol>, u64> = HashMap::new();
    for i in 0..n {
        let key: Vec<Symbol> = net.node_ids().map(|v| tr.x_block(v, w)[i]).collect();
        *counts.entry(key).or_insert(0) += 1;
    }
    empirical_matches(&counts, input_joint, n, delta)
}

fn lemma1_verify(
    net: &Network,
    tr: &TrialRealization,
    w: usize,
    w2: usize,
    cut: &Cut,
    table: &BTreeMap<Vec<Symbol>, f64>,
    delta: f64,
) -> Lemma1Outcome {
    // (b) The complement's inputs must agree exactly: nodes outside the
    // distinguishability set received identical blocks, and forwarding maps
    // are functions.
    for v in cut.complement(net).iter() {
        if tr.x_block(v, w) != tr.x_block(v, w2) {
            return Lemma1Outcome::Violated(format!(
                "x_{v} differs across the pair although {v} cannot distinguish it"
            ));
        }
    }

    // (a) Empirical joint of (x_S(w2), y_head(w), x_S^c(w)) against the
    // exact joint.
    let n = tr.n;
    let mut counts: HashMap<Vec<Symbol>, u64> = HashMap::new();
    for i in 0..n {
        let mut key: Vec<Symbol> = Vec::new();
        for u in cut.s_side.iter() {
            key.push(tr.x_block(u, w2)[i]);
        }
        for v in cut.head_boundary.iter() {
            push_node_output_at(net, tr, v, w, i, &mut key);
        }
        for u in cut.complement(net).iter() {
            key.push(tr.x_block(u, w)[i]);
        }
        *counts.entry(key).or_insert(0) += 1;
    }
    if empirical_matches(&counts, table, n, delta) {
        Lemma1Outcome::Holds
    } else {
        Lemma1Outcome::Violated(
            "mixed-pair tuple sequence is not jointly robustly typical".into(),
        )
    }
}

/// Append node `v`'s per-step output symbols for message `w` at step `i`,
/// in the same expansion order as [`info::Var::NodeOutput`].
fn push_node_output_at(
    net: &Network,
    tr: &TrialRealization,
    v: NodeId,
    w: usize,
    i: usize,
    key: &mut Vec<Symbol>,
) {
    let y = tr.y_block(v, w);
    match net.mode() {
        Mode::Aref => {
            let indeg = net.in_neighbors(v).len();
            for e in 0..indeg {
                key.push(y[e * tr.n + i]);
            }
        }
        _ => {
            if !y.is_empty() {
                key.push(y[i]);
            }
        }
    }
}

/// `|count(a)/n - p(a)| <= delta p(a)` for every value of the joint, and no
/// observed value outside the support.
fn empirical_matches(
    counts: &HashMap<Vec<Symbol>, u64>,
    reference: &BTreeMap<Vec<Symbol>, f64>,
    n: usize,
    delta: f64,
) -> bool {
    for (key, &c) in counts {
        match reference.get(key) {
            None => return false,
            Some(&p) => {
                if (c as f64 / n as f64 - p).abs() > delta * p {
                    return false;
                }
            }
        }
    }
    for (key, &p) in reference {
        if p > 0.0 && !counts.contains_key(key) && (0.0f64 - p).abs() > delta * p {
            return false;
        }
    }
    true
}

/// Aggregate result of a Lemma-1 assertion sweep.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub struct Lemma1Report {
    pub pairs_checked: u64,
    pub precondition_skips: u64,
    pub violations: u64,
}

/// Sample message pairs across trials until `target_pairs` pairs pass the
/// typicality precondition (or `max_trials` trials are spent), checking the
/// implication on each.
pub fn lemma1_harness(
    net: &Network,
    dist: &InputDistribution,
    cfg: &RunConfig,
    target_pairs: u64,
    max_trials: u64,
) -> Result<Lemma1Report> {
    if cfg.typicality.mode != TypicalityMode::StrictTypical {
        return Err(Error::InvalidInput(
            "the typicality harness requires strict-typical mode".into(),
        ));
    }
    let delta = cfg.typicality.delta;
    let all_inputs: Vec<Var> = net.node_ids().map(Var::Input).collect();
    let input_joint = info::joint_table(net, dist, &all_inputs)?;
    let mut tables: BTreeMap<u64, BTreeMap<Vec<Symbol>, f64>> = BTreeMap::new();
    let mut report = Lemma1Report::default();

    for trial in 0..max_trials {
        if report.pairs_checked >= target_pairs {
            break;
        }
        let tr = realize_trial(net, dist, cfg, trial)?;
        let m = tr.messages;
        let typical: Vec<bool> = (0..m)
            .map(|w| message_inputs_typical(net, &tr, w, &input_joint, delta))
            .collect();
        for w in 0..m {
            for w2 in (w + 1)..m {
                if report.pairs_checked >= target_pairs {
                    break;
                }
                if !typical[w] || !typical[w2] {
                    report.precondition_skips += 1;
                    continue;
                }
                let set = distinguishability_set(net, &tr, w, w2);
                let cut = Cut::from_s_side(net, set);
                let table = match tables.get(&set.bits()) {
                    Some(t) => t,
                    None => {
                        let t = lemma1_reference_table(net, dist, &cut)?;
                        tables.entry(set.bits()).or_insert(t)
                    }
                };
                match lemma1_verify(net, &tr, w, w2, &cut, table, delta) {
                    Lemma1Outcome::Holds => report.pairs_checked += 1,
                    Lemma1Outcome::Violated(_) => {
                        report.pairs_checked += 1;
                        report.violations += 1;
                    }
                    Lemma1Outcome::PreconditionViolated => unreachable!(),
                }
            }
        }
    }
    Ok(report)
}
