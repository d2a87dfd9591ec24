//! Acceptance suite: one test per release criterion, each printing a
//! `ACCEPTANCE <k> <name>: PASS|FAIL` line (visible with `--nocapture`).
//!
//! Criteria cover the cut-value decomposition on the seven-node fragment,
//! agreement of the three cut formulas on randomized networks, cut counts,
//! Monte-Carlo achievability and converse behavior, the typicality
//! implication harness, golden schedule tables, forward-window blocking,
//! the SNR-gap formulas, and byte-determinism of the CLI across runs and
//! thread counts.

use std::collections::BTreeSet;
use std::path::PathBuf;
use std::process::Command;
use std::time::Instant;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use relaynet::coding::{self, RunConfig, TypicalityConfig};
use relaynet::cuts::{self, Cut, CutFormula};
use relaynet::gaussian::{self, GaussianParams};
use relaynet::info::{self, InputDistribution, Var};
use relaynet::network::{
    EdgeFn, Mode, Network, NodeId, NodeSet, Role, RxFn, Symbol,
};
use relaynet::schedule::{self, MessageFeasibility, ScheduleMode};

const TOL: f64 = 1e-9;

fn report(k: u32, name: &str, pass: bool, detail: &str) {
    println!("ACCEPTANCE {k:02} {name}: {}", if pass { "PASS" } else { "FAIL" });
    assert!(pass, "ACCEPTANCE {k:02} {name} failed: {detail}");
}

fn nets_dir() -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../nets")
}

fn golden_dir() -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("tests/golden")
}

fn load(name: &str) -> Network {
    let text = std::fs::read_to_string(nets_dir().join(name)).unwrap();
    Network::parse(&text).unwrap()
}

fn node(label: u32) -> NodeId {
    NodeId::from_index((label - 1) as usize)
}

fn set(labels: &[u32]) -> NodeSet {
    labels.iter().map(|&l| node(l)).collect()
}

fn run_cli(args: &[&str]) -> (String, String, i32) {
    let out = Command::new(env!("CARGO_BIN_EXE_relaynet"))
        .args(args)
        .current_dir(nets_dir().join("../"))
        .output()
        .expect("binary runs");
    (
        String::from_utf8(out.stdout).unwrap(),
        String::from_utf8(out.stderr).unwrap(),
        out.status.code().unwrap_or(-1),
    )
}

// ---------------------------------------------------------------------
// 1. Cut-value decomposition on the seven-node fragment
// ---------------------------------------------------------------------
#[test]
fn criterion_01_cut_value_decomposition() {
    let net = load("fig1_fragment.net");
    let dist = InputDistribution::uniform(&net);
    let cut = Cut::from_s_side(&net, set(&[1, 2, 3, 7]));

    let boundaries_ok =
        cut.tail_boundary == set(&[2, 3]) && cut.head_boundary == set(&[4, 6]);

    // The aref value decomposes per sender: joint entropy of node 2's two
    // crossing edge outputs plus the marginal entropy of node 3's one.
    let h_24_26 = info::joint_entropy(
        &net,
        &dist,
        &[Var::EdgeOutput(node(2), node(4)), Var::EdgeOutput(node(2), node(6))],
    )
    .unwrap();
    let h_34 =
        info::joint_entropy(&net, &dist, &[Var::EdgeOutput(node(3), node(4))]).unwrap();

    let aref = cuts::cut_value(&net, &dist, &cut, CutFormula::Aref).unwrap().value_bits;
    let det = cuts::cut_value(&net, &dist, &cut, CutFormula::Deterministic)
        .unwrap()
        .value_bits;
    let general = cuts::cut_value(&net, &dist, &cut, CutFormula::General)
        .unwrap()
        .value_bits;

    let pass = boundaries_ok
        && (aref - (h_24_26 + h_34)).abs() < TOL
        && (aref - 2.0).abs() < TOL
        && (aref - det).abs() < TOL
        && (aref - general).abs() < TOL;
    report(
        1,
        "cut-value-decomposition",
        pass,
        &format!(
            "b1={} b2={} aref={aref} sum={} det={det} general={general}",
            cut.tail_boundary,
            cut.head_boundary,
            h_24_26 + h_34
        ),
    );
}

// ---------------------------------------------------------------------
// 2. Formula-equivalence suite on randomized networks
// ---------------------------------------------------------------------

fn random_net(rng: &mut ChaCha8Rng, aref: bool) -> Network {
    let n = rng.random_range(3..=5);
    let mode = if aref { Mode::Aref } else { Mode::Deterministic };
    let mut b = Network::builder(mode).alphabet(2);
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
                if aref {
                    let f = match rng.random_range(0..3) {
                        0 => EdgeFn::Identity,
                        1 => EdgeFn::Table(vec![
                            rng.random_range(0..2) as Symbol,
                            rng.random_range(0..2) as Symbol,
                        ]),
                        _ => EdgeFn::Const(rng.random_range(0..2) as Symbol),
                    };
                    b = b.edge_fn(u, v, f);
                } else {
                    b = b.edge(u, v);
                }
                indeg[v as usize] += 1;
            }
        }
    }
    if !aref {
        for v in 2..=n as u32 {
            if indeg[v as usize] > 0 {
                let table: Vec<Symbol> = (0..(1usize << indeg[v as usize]))
                    .map(|_| rng.random_range(0..2) as Symbol)
                    .collect();
                b = b.rx_fn(v, RxFn::Table(table));
            }
        }
    }
    b.build().unwrap()
}

fn random_dist(rng: &mut ChaCha8Rng, net: &Network) -> InputDistribution {
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

#[test]
fn criterion_02_formula_equivalence_suite() {
    let start = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(0xF0404);
    let mut worst: f64 = 0.0;
    for i in 0..200 {
        let aref = i % 2 == 0;
        let net = random_net(&mut rng, aref);
        let dist = random_dist(&mut rng, &net);
        let t = *net.destinations().first().unwrap();
        for cut in cuts::enumerate_cuts(&net, t).unwrap() {
            let general = cuts::cut_value(&net, &dist, &cut, CutFormula::General)
                .unwrap()
                .value_bits;
            let det = cuts::cut_value(&net, &dist, &cut, CutFormula::Deterministic)
                .unwrap()
                .value_bits;
            worst = worst.max((general - det).abs());
            if aref {
                let aref_v = cuts::cut_value(&net, &dist, &cut, CutFormula::Aref)
                    .unwrap()
                    .value_bits;
                worst = worst.max((det - aref_v).abs());
            }
        }
    }
    let elapsed = start.elapsed().as_secs_f64();
    let pass = worst < TOL && elapsed <= 60.0;
    report(
        2,
        "formula-equivalence-suite",
        pass,
        &format!("worst disagreement {worst:.3e}, runtime {elapsed:.1}s"),
    );
}

// ---------------------------------------------------------------------
// 3. Cut enumeration count
// ---------------------------------------------------------------------
#[test]
fn criterion_03_cut_enumeration_count() {
    let mut pass = true;
    let mut detail = String::new();
    for n in 3..=6u32 {
        let mut b = Network::builder(Mode::Aref).alphabet(2).node(1, Role::Source);
        for i in 2..n {
            b = b.node(i, Role::Relay);
        }
        b = b.node(n, Role::Dest);
        for i in 1..n {
            b = b.edge_fn(i, i + 1, EdgeFn::Identity);
        }
        let net = b.build().unwrap();
        let count = cuts::enumerate_cuts(&net, node(n)).unwrap().count();
        let expected = 1usize << (n - 2);
        detail.push_str(&format!("|V|={n}: {count} cuts; "));
        pass &= count == expected;
    }
    report(3, "cut-enumeration-count", pass, &detail);
}

// ---------------------------------------------------------------------
// 4. Achievability below min-cut, with exponential decay in n
// ---------------------------------------------------------------------
#[test]
fn criterion_04_achievability_below_min_cut() {
    let start = Instant::now();
    let net = load("path3.net");
    let dist = InputDistribution::uniform(&net);
    let p16 = coding::run_experiment(&net, &dist, &RunConfig::new(16, 0.25, 1000, 0xC0FFEE))
        .unwrap()
        .dests[0]
        .p_e();
    let p32 = coding::run_experiment(&net, &dist, &RunConfig::new(32, 0.25, 1000, 0xC0FFEE))
        .unwrap()
        .dests[0]
        .p_e();
    let elapsed = start.elapsed().as_secs_f64();
    let pass = p16 <= 0.01 && (p32 == 0.0 || p32 <= p16 / 4.0) && elapsed <= 120.0;
    report(
        4,
        "achievability-below-min-cut",
        pass,
        &format!("p_e(n=16)={p16}, p_e(n=32)={p32}, runtime {elapsed:.1}s"),
    );
}

// ---------------------------------------------------------------------
// 5. Converse: more messages than sequences forces errors
// ---------------------------------------------------------------------
#[test]
fn criterion_05_pigeonhole_converse() {
    let net = load("path3.net");
    let dist = InputDistribution::uniform(&net);
    // ceil(2^(8*1.25)) = 1024 messages, only 2^8 = 256 binary blocks.
    let r = coding::run_experiment(&net, &dist, &RunConfig::new(8, 1.25, 100, 0xC0FFEE)).unwrap();
    let p_e = r.dests[0].p_e();
    let pass = r.messages as f64 > 256.0 && p_e >= 0.9;
    report(
        5,
        "pigeonhole-converse",
        pass,
        &format!("messages={}, p_e={p_e}", r.messages),
    );
}

// ---------------------------------------------------------------------
// 6. Typicality-implication harness on layered networks
// ---------------------------------------------------------------------
#[test]
fn criterion_06_typicality_implication_harness() {
    let path = Network::builder(Mode::Deterministic)
        .alphabet(2)
        .node(1, Role::Source)
        .node(2, Role::Relay)
        .node(3, Role::Dest)
        .edge(1, 2)
        .edge(2, 3)
        .rx_fn(2, RxFn::Xor)
        .rx_fn(3, RxFn::Xor)
        .build()
        .unwrap();
    let diamond = Network::builder(Mode::Deterministic)
        .alphabet(2)
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
        .unwrap();

    let mut total_checked = 0;
    let mut total_violations = 0;
    let mut detail = String::new();
    for (name, net, delta) in [("path", path, 0.5), ("diamond", diamond, 0.75)] {
        assert!(net.layering().unwrap().is_layered);
        let dist = InputDistribution::uniform(&net);
        // 16 messages per trial at n=128.
        let mut cfg = RunConfig::new(128, 4.0 / 128.0, 0, 0x1E44A);
        cfg.typicality = TypicalityConfig::strict(delta).unwrap();
        let r = coding::lemma1_harness(&net, &dist, &cfg, 5_000, 5_000).unwrap();
        detail.push_str(&format!(
            "{name}: checked={} skips={} violations={}; ",
            r.pairs_checked, r.precondition_skips, r.violations
        ));
        total_checked += r.pairs_checked;
        total_violations += r.violations;
    }
    let pass = total_checked >= 10_000 && total_violations == 0;
    report(6, "typicality-implication-harness", pass, &detail);
}

// ---------------------------------------------------------------------
// 7. Golden schedule tables
// ---------------------------------------------------------------------
#[test]
fn criterion_07_schedule_table_reproduction() {
    let batch_golden =
        std::fs::read_to_string(golden_dir().join("fig2_b3_batch.txt")).unwrap();
    let pipe_golden =
        std::fs::read_to_string(golden_dir().join("fig2_b3_pipelined.txt")).unwrap();

    let (batch_out, _, code_b) =
        run_cli(&["schedule", "nets/fig2.net", "--blocks", "3", "--mode", "batch"]);
    let (pipe_out, _, code_p) =
        run_cli(&["schedule", "nets/fig2.net", "--blocks", "3", "--mode", "pipelined"]);

    // Structural spot checks straight off the schedule.
    let net = load("fig2.net");
    let sched = schedule::build_schedule(&net, 3, ScheduleMode::Pipelined).unwrap();
    let deps_of = |block: u32| -> BTreeSet<u32> {
        sched.record(block, node(3)).unwrap().deps.clone()
    };
    let structure_ok = sched.total_blocks() == 5
        && deps_of(3) == BTreeSet::from([1, 2])
        && deps_of(4) == BTreeSet::from([2, 3]);

    let pass = code_b == 0
        && code_p == 0
        && batch_out == batch_golden
        && pipe_out == pipe_golden
        && structure_ok;
    report(
        7,
        "schedule-table-reproduction",
        pass,
        &format!(
            "batch_match={} pipelined_match={} structure_ok={structure_ok}",
            batch_out == batch_golden,
            pipe_out == pipe_golden
        ),
    );
}

// ---------------------------------------------------------------------
// 8. Forward-window blocking
// ---------------------------------------------------------------------
#[test]
fn criterion_08_forward_window_blocking() {
    let net = load("fig2.net");
    let sched = schedule::build_schedule(&net, 3, ScheduleMode::Pipelined).unwrap();
    let analysis = schedule::forward_window_analysis(&net, &sched, node(4)).unwrap();
    let w1_blocked = matches!(
        &analysis[0],
        MessageFeasibility::Blocked { message: 1, block: 3, by_node, by_block: 3, deps }
            if *by_node == node(3) && deps == &BTreeSet::from([1, 2])
    );

    // Layered networks never block any message.
    let mut layered_clean = true;
    for name in ["path3.net", "diamond.net"] {
        let net = load(name);
        assert!(net.layering().unwrap().is_layered);
        let sched = schedule::build_schedule(&net, 4, ScheduleMode::Pipelined).unwrap();
        for &t in net.destinations() {
            for f in schedule::forward_window_analysis(&net, &sched, t).unwrap() {
                layered_clean &= matches!(f, MessageFeasibility::Decodable { .. });
            }
        }
    }
    let pass = w1_blocked && layered_clean;
    report(
        8,
        "forward-window-blocking",
        pass,
        &format!("w1_blocked={w1_blocked} layered_clean={layered_clean}"),
    );
}

// ---------------------------------------------------------------------
// 9. SNR-gap formulas
// ---------------------------------------------------------------------
#[test]
fn criterion_09_gap_formulas() {
    let net = load("gaussian5.net");
    let params = GaussianParams::new(100.0, 1.0).unwrap();
    let r = gaussian::gap(&net, &params).unwrap();

    let df_expected = 101f64.log2();
    let ub_expected = 1601f64.log2();
    let formulas_ok = (r.df_rate_bits - df_expected).abs() < 1e-6
        && (r.cut_ub_bits - ub_expected).abs() < 1e-6
        && (r.gap_exact_bits - (ub_expected - df_expected)).abs() < 1e-6
        && (r.gap_exact_bits - 3.987).abs() < 5e-4
        && (r.gap_asymptotic_bits - 4.0).abs() < 1e-6;

    let mut sweep_ok = true;
    for snr in [1e4, 3e4, 1e5, 1e6, 1e8] {
        let p = GaussianParams::new(snr, 1.0).unwrap();
        let r = gaussian::gap(&net, &p).unwrap();
        sweep_ok &= (r.gap_exact_bits - r.gap_asymptotic_bits).abs() <= 0.05;
    }
    let pass = formulas_ok && sweep_ok;
    report(
        9,
        "gap-formulas",
        pass,
        &format!(
            "df={} ub={} gap={} asym={} sweep_ok={sweep_ok}",
            r.df_rate_bits, r.cut_ub_bits, r.gap_exact_bits, r.gap_asymptotic_bits
        ),
    );
}

// ---------------------------------------------------------------------
// 10. CLI determinism across runs and thread counts
// ---------------------------------------------------------------------
#[test]
fn criterion_10_cli_determinism() {
    let invocations: Vec<Vec<&str>> = vec![
        vec!["validate", "nets/path3.net"],
        vec!["cutset", "nets/diamond.net", "--dist", "uniform"],
        vec!["cutset", "nets/fig1_fragment.net", "--formula", "general"],
        vec![
            "simulate", "nets/path3.net", "--n", "16", "--rate", "0.25", "--trials", "200",
            "--seed", "42", "--cut-stats",
        ],
        vec![
            "sweep", "nets/path3.net", "--n", "12", "--rates", "0.25,0.5,0.75", "--trials",
            "100", "--seed", "7",
        ],
        vec!["schedule", "nets/fig2.net", "--blocks", "3", "--mode", "batch"],
        vec![
            "schedule", "nets/fig2.net", "--blocks", "3", "--mode", "pipelined",
            "--analyze-window",
        ],
        vec!["schedule", "nets/fig2.net", "--blocks", "3", "--mode", "pipelined", "--machine"],
        vec!["gap", "nets/gaussian5.net", "--power", "100", "--noise", "1"],
    ];

    let mut pass = true;
    let mut detail = String::new();
    for args in &invocations {
        let (a, _, code_a) = run_cli(args);
        let (b, _, code_b) = run_cli(args);
        let mut with_threads_1 = args.clone();
        with_threads_1.extend(["--threads", "1"]);
        let mut with_threads_8 = args.clone();
        with_threads_8.extend(["--threads", "8"]);
        let (c, _, code_c) = run_cli(&with_threads_1);
        let (d, _, code_d) = run_cli(&with_threads_8);
        let ok = code_a == 0
            && code_b == 0
            && code_c == 0
            && code_d == 0
            && a == b
            && a == c
            && a == d;
        if !ok {
            pass = false;
            detail.push_str(&format!("divergent output for {args:?}; "));
        }
    }
    report(10, "cli-determinism", pass, &detail);
}
