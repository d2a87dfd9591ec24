//! Block-transmission schedules for acyclic networks.
//!
//! Transmission runs over `B + L - 1` length-`n` blocks, where `B` is the
//! number of message blocks and `L` the longest source-to-destination path.
//! In batch mode the source sends a function of the whole message in every
//! one of its `B` blocks; in pipelined mode it sends message block `w_b` in
//! block `b`. Relays transmit a function of what they received in the
//! previous block either way, so the two modes have identical activity
//! patterns and differ only in which messages influence each transmission.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt::Write as _;

use crate::error::{Error, Result};
use crate::network::{Network, NodeId, Role};

#[derive(Clone, Copy, PartialEq, Eq, Debug)]
pub enum ScheduleMode {
    Batch,
    Pipelined,
}

impl ScheduleMode {
    pub fn as_str(self) -> &'static str {
        match self {
            ScheduleMode::Batch => "batch",
            ScheduleMode::Pipelined => "pipelined",
        }
    }
}

/// Message indices are 1-based; in batch mode the single long message is
/// represented by this sentinel and rendered as `w`.
pub const WHOLE_MESSAGE: u32 = 0;

/// One active cell of the schedule: node `node` transmits in block `block`
/// a function of the message blocks in `deps`.
#[derive(Clone, PartialEq, Eq, Debug)]
pub struct TransmissionRecord {
    pub node: NodeId,
    pub block: u32,
    pub deps: BTreeSet<u32>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct Schedule {
    pub mode: ScheduleMode,
    /// Number of message blocks `B`.
    pub message_blocks: u32,
    /// Longest source-to-destination path length `L`.
    pub longest_path: u32,
    source: NodeId,
    entries: BTreeMap<(u32, NodeId), TransmissionRecord>,
    columns: Vec<NodeId>,
}

impl Schedule {
    pub fn total_blocks(&self) -> u32 {
        self.message_blocks + self.longest_path - 1
    }

    pub fn record(&self, block: u32, node: NodeId) -> Option<&TransmissionRecord> {
        self.entries.get(&(block, node))
    }

    /// Active records in (block, node) order.
    pub fn records(&self) -> impl Iterator<Item = &TransmissionRecord> {
        self.entries.values()
    }

    /// Nodes that transmit at least once (out-degree >= 1), ascending; the
    /// table columns.
    pub fn transmitting_nodes(&self) -> &[NodeId] {
        &self.columns
    }

    fn dep_label(&self, deps: &BTreeSet<u32>) -> String {
        match self.mode {
            ScheduleMode::Batch => "w".to_string(),
            ScheduleMode::Pipelined => {
                let parts: Vec<String> = deps.iter().map(|b| format!("w{b}")).collect();
                parts.join(",")
            }
        }
    }
}

/// Build the block schedule for `message_blocks` message blocks.
pub fn build_schedule(
    net: &Network,
    message_blocks: u32,
    mode: ScheduleMode,
) -> Result<Schedule> {
    if message_blocks == 0 {
        return Err(Error::InvalidInput("at least one message block required".into()));
    }
    let longest_path = net.layering()?.longest;
    let total = message_blocks + longest_path - 1;
    let source = net.source();

    let columns: Vec<NodeId> = net
        .node_ids()
        .filter(|&u| !net.out_neighbors(u).is_empty())
        .collect();

    let mut entries: BTreeMap<(u32, NodeId), TransmissionRecord> = BTreeMap::new();
    for block in 1..=total {
        for &u in &columns {
            let deps: Option<BTreeSet<u32>> = if u == source {
                // The source encodes messages only; its received symbols are
                // ignored.
                (block <= message_blocks).then(|| match mode {
                    ScheduleMode::Batch => BTreeSet::from([WHOLE_MESSAGE]),
                    ScheduleMode::Pipelined => BTreeSet::from([block]),
                })
            } else if block == 1 {
                None
            } else {
                let mut union: BTreeSet<u32> = BTreeSet::new();
                let mut received = false;
                for &v in net.in_neighbors(u) {
                    if let Some(prev) = entries.get(&(block - 1, v)) {
                        received = true;
                        union.extend(prev.deps.iter().copied());
                    }
                }
                received.then_some(union)
            };
            if let Some(deps) = deps {
                entries.insert((block, u), TransmissionRecord { node: u, block, deps });
            }
        }
    }

    Ok(Schedule {
        mode,
        message_blocks,
        longest_path,
        source,
        entries,
        columns,
    })
}

/// Forward-window feasibility of one message block at a destination.
#[derive(Clone, PartialEq, Eq, Debug)]
pub enum MessageFeasibility {
    /// `message` can be decoded from a forward window ending at `block`.
    Decodable { message: u32, block: u32 },
    /// Decoding `message` at `block` is blocked: the destination receives
    /// `by_node`'s block-`by_block` transmission, which mixes it with later
    /// message blocks.
    Blocked {
        message: u32,
        block: u32,
        by_node: NodeId,
        by_block: u32,
        deps: BTreeSet<u32>,
    },
}

/// Forward sliding-window analysis at destination `t` (pipelined mode).
///
/// Message `w_b` is decodable at block `b + L - 1` iff every transmission
/// received by `t` up to that block that depends on `w_b` depends only on
/// message blocks `<= b`.
pub fn forward_window_analysis(
    net: &Network,
    schedule: &Schedule,
    t: NodeId,
) -> Result<Vec<MessageFeasibility>> {
    if schedule.mode != ScheduleMode::Pipelined {
        return Err(Error::InvalidInput(
            "forward-window analysis applies to pipelined schedules".into(),
        ));
    }
    if net.role(t) != Role::Dest {
        return Err(Error::InvalidInput(format!("node {t} is not a destination")));
    }
    let horizon = schedule.longest_path - 1;
    let mut out = Vec::with_capacity(schedule.message_blocks as usize);
    for b in 1..=schedule.message_blocks {
        let deadline = b + horizon;
        let mut verdict = MessageFeasibility::Decodable { message: b, block: deadline };
        'scan: for block in 1..=deadline.min(schedule.total_blocks()) {
            for &v in net.in_neighbors(t) {
                if let Some(rec) = schedule.record(block, v) {
                    if rec.deps.contains(&b) && rec.deps.iter().any(|&d| d > b) {
                        verdict = MessageFeasibility::Blocked {
                            message: b,
                            block: deadline,
                            by_node: v,
                            by_block: block,
                            deps: rec.deps.clone(),
                        };
                        break 'scan;
                    }
                }
            }
        }
        out.push(verdict);
    }
    Ok(out)
}

/// Delay metrics of a schedule.
#[derive(Clone, Debug, PartialEq)]
pub struct DelayReport {
    pub mode: ScheduleMode,
    /// Block by which every destination can decode everything under joint
    /// decoding; `B + L - 1` in both modes.
    pub end_to_end_blocks: u32,
    /// Last block in which the source must know any part of the message:
    /// block 1 in batch mode (the whole message up front), block `B` in
    /// pipelined mode (`w_b` is first needed at block `b`).
    pub encoding_last_block: u32,
    /// Per-destination forward-window feasibility (pipelined only).
    pub windows: BTreeMap<NodeId, Vec<MessageFeasibility>>,
}

pub fn delay_report(net: &Network, schedule: &Schedule) -> Result<DelayReport> {
    let mut windows = BTreeMap::new();
    if schedule.mode == ScheduleMode::Pipelined {
        for &t in net.destinations() {
            windows.insert(t, forward_window_analysis(net, schedule, t)?);
        }
    }
    Ok(DelayReport {
        mode: schedule.mode,
        end_to_end_blocks: schedule.total_blocks(),
        encoding_last_block: match schedule.mode {
            ScheduleMode::Batch => 1,
            ScheduleMode::Pipelined => schedule.message_blocks,
        },
        windows,
    })
}

/// Fixed-width text table: one row per block, one column per transmitting
/// node; idle cells show `·`. Byte-stable for golden tests.
pub fn render_table(schedule: &Schedule) -> String {
    const IDLE: &str = "\u{b7}";
    let mut header: Vec<String> = vec!["Block b".into(), "Message".into()];
    for &u in &schedule.columns {
        header.push(format!("{u} Transmits"));
    }
    let mut rows: Vec<Vec<String>> = vec![header];
    for block in 1..=schedule.total_blocks() {
        let mut row = vec![block.to_string()];
        row.push(if block <= schedule.message_blocks {
            match schedule.mode {
                ScheduleMode::Batch => "w".to_string(),
                ScheduleMode::Pipelined => format!("w{block}"),
            }
        } else {
            IDLE.to_string()
        });
        for &u in &schedule.columns {
            row.push(match schedule.record(block, u) {
                None => IDLE.to_string(),
                Some(rec) => {
                    let deps = schedule.dep_label(&rec.deps);
                    if u == schedule.source {
                        format!("x{u}^({block})({deps})")
                    } else {
                        format!("x{u}^({block})(y{u}^({})({deps}))", block - 1)
                    }
                }
            });
        }
        rows.push(row);
    }

    let cols = rows[0].len();
    let widths: Vec<usize> = (0..cols)
        .map(|c| rows.iter().map(|r| r[c].chars().count()).max().unwrap())
        .collect();
    let mut out = String::new();
    for row in &rows {
        for (c, cell) in row.iter().enumerate() {
            if c > 0 {
                out.push_str(" | ");
            }
            out.push_str(cell);
            if c + 1 < cols {
                for _ in cell.chars().count()..widths[c] {
                    out.push(' ');
                }
            }
        }
        while out.ends_with(' ') {
            out.pop();
        }
        out.push('\n');
    }
    out
}

/// Machine-readable emission: one `node,block,deps=...` record per active
/// cell, in (block, node) order.
pub fn render_machine(schedule: &Schedule) -> String {
    let mut out = String::new();
    for rec in schedule.records() {
        let deps = match schedule.mode {
            ScheduleMode::Batch => "w".to_string(),
            ScheduleMode::Pipelined => {
                let parts: Vec<String> = rec.deps.iter().map(|b| format!("w{b}")).collect();
                parts.join("+")
            }
        };
        let _ = writeln!(out, "{},{},deps={}", rec.node, rec.block, deps);
    }
    out
}
