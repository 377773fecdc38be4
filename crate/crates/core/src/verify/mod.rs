//! Trace analyzers and independent oracles.
//!
//! Each check re-derives what it needs from the trace rows, the oracle, and
//! the strategies themselves. None of them reads the engine's internal
//! state, so a bug in the construction shows up as a failed check rather than
//! being repeated by it.

mod sublemma;

use std::cmp::Ordering;
use std::fmt;

use thiserror::Error;

pub use sublemma::{
    check_sublemma_equivalence, check_sublemma_equivalence_with, sublemma_oracle, Counterexample, SublemmaDomainError,
    SublemmaReport,
};

use crate::bits::Bit;
use crate::capital::{ext_ratio_cmp, Capital, ExtRatio};
use crate::construction::{AttentionReason, OpponentValue, StageRecord, Trace};
use crate::martingale::{Adversary, EvalResult, Martingale};
use crate::opponents::OpponentStrategy;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum VerifyError {
    #[error("trace records {trace} opponents but the family has {family}")]
    FamilySize { trace: usize, family: usize },
    #[error("opponent {index} is {family:?} in the family but {trace:?} in the trace")]
    FamilyName {
        index: usize,
        trace: String,
        family: String,
    },
}

/// Outcome of one trace check. Failures are human-readable, one per
/// offending row or opponent.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CheckReport {
    pub name: &'static str,
    pub rows_checked: usize,
    pub failures: Vec<String>,
}

impl CheckReport {
    fn new(name: &'static str) -> Self {
        CheckReport {
            name,
            rows_checked: 0,
            failures: Vec::new(),
        }
    }

    pub fn passed(&self) -> bool {
        self.failures.is_empty()
    }
}

impl fmt::Display for CheckReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let status = if self.passed() { "pass" } else { "fail" };
        write!(
            f,
            "check={} status={} rows={} failures={}",
            self.name,
            status,
            self.rows_checked,
            self.failures.len()
        )
    }
}

fn ensure_family(trace: &Trace, family: &[OpponentStrategy]) -> Result<(), VerifyError> {
    if trace.family_size() != family.len() {
        return Err(VerifyError::FamilySize {
            trace: trace.family_size(),
            family: family.len(),
        });
    }
    for (index, (info, s)) in trace.header.opponents.iter().zip(family).enumerate() {
        if info.name != s.name {
            return Err(VerifyError::FamilyName {
                index,
                trace: info.name.clone(),
                family: s.name.clone(),
            });
        }
    }
    Ok(())
}

/// `G_0..G_{E-1}` and `φ` before row `i`.
fn before(trace: &Trace, i: usize) -> (Vec<Capital>, Vec<OpponentValue>, Capital) {
    match i.checked_sub(1).map(|j| &trace.rows[j]) {
        Some(prev) => (
            prev.gambler_values.clone(),
            prev.opponent_values.clone(),
            prev.fresh_total.clone(),
        ),
        None => (
            vec![Capital::zero(); trace.family_size()],
            trace.header.initial_values.clone(),
            Capital::zero(),
        ),
    }
}

/// `M = 1 + ΣGₑ` and `M ≥ 1` on every row, with `M` recomputed from `B` by
/// running the adversary independently of the engine.
pub fn check_conservation(trace: &Trace) -> CheckReport {
    let mut report = CheckReport::new("conservation");
    let adversary = Adversary::new(&trace.header.oracle);
    let mut cursor = adversary.root();
    for row in &trace.rows {
        cursor = adversary.advance(&cursor, row.chosen_bit);
        let m = &cursor.capital;
        let total = Capital::one() + row.gambler_values.iter().sum::<Capital>() + row.fresh_total.clone();
        report.rows_checked += 1;
        if &row.adversary_capital != m {
            report.failures.push(format!(
                "stage {}: recorded M={} but M(B)={}",
                row.stage, row.adversary_capital, m
            ));
        }
        if &total != m {
            report
                .failures
                .push(format!("stage {}: M(B)={} but 1+ΣG={}", row.stage, m, total));
        }
        if m.is_zero() {
            report.failures.push(format!("stage {}: M(B)=0", row.stage));
        }
    }
    report
}

/// Per-opponent classification of the stages at which `Gₑ` changed.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct StageCounters {
    /// `Gₑ` and `φₑ` both increased.
    pub both_up: u64,
    /// `Gₑ` and `φₑ` both decreased.
    pub both_down: u64,
    /// `Gₑ` increased while `φₑ` held, fell, or was undefined.
    pub g_only_up: u64,
    /// `Gₑ` fell without `φₑ` falling. Never happens in a sound trace.
    pub unclassified: u64,
}

impl StageCounters {
    pub fn changes(&self) -> u64 {
        self.both_up + self.both_down + self.g_only_up + self.unclassified
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BookkeepingReport {
    pub check: CheckReport,
    pub counters: Vec<StageCounters>,
    /// Grants to gamblers past the family.
    pub fresh_grants: u64,
}

impl BookkeepingReport {
    pub fn passed(&self) -> bool {
        self.check.passed()
    }
}

/// Between consecutive rows exactly one gambler moves, by exactly one
/// quantum, and it is the acting one. From the first row on,
/// `Gₑ(t) = Gₑ(start) + both_up − both_down + g_only_up` for every opponent.
///
/// This checks changes only; absolute levels belong to
/// [`check_conservation`].
pub fn check_bookkeeping(trace: &Trace) -> BookkeepingReport {
    let e_count = trace.family_size();
    let mut report = BookkeepingReport {
        check: CheckReport::new("bookkeeping"),
        counters: vec![StageCounters::default(); e_count],
        fresh_grants: 0,
    };
    let Some(start) = trace.rows.first() else {
        return report;
    };
    report.check.rows_checked = 1;
    for pair in trace.rows.windows(2) {
        let (prev, row) = (&pair[0], &pair[1]);
        report.check.rows_checked += 1;
        let mut moved: Vec<(usize, Ordering)> = Vec::new();
        let mut single_quantum = true;
        for e in 0..e_count {
            let (g0, g1) = (&prev.gambler_values[e], &row.gambler_values[e]);
            if g0 == g1 {
                continue;
            }
            let dir = g1.cmp(g0);
            single_quantum &= g0.abs_diff(g1) == Capital::one();
            moved.push((e, dir));
            let (p0, p1) = (prev.opponent_values[e].value(), row.opponent_values[e].value());
            let phi_dir = match (p0, p1) {
                (Some(a), Some(b)) => Some(b.cmp(a)),
                _ => None,
            };
            let c = &mut report.counters[e];
            match (dir, phi_dir) {
                (Ordering::Greater, Some(Ordering::Greater)) => c.both_up += 1,
                (Ordering::Greater, _) => c.g_only_up += 1,
                (Ordering::Less, Some(Ordering::Less)) => c.both_down += 1,
                _ => c.unclassified += 1,
            }
        }
        if prev.fresh_total != row.fresh_total {
            single_quantum &= prev.fresh_total.abs_diff(&row.fresh_total) == Capital::one();
            moved.push((usize::MAX, row.fresh_total.cmp(&prev.fresh_total)));
            report.fresh_grants += 1;
        }
        let expected_mover = if row.acting_e < e_count {
            row.acting_e
        } else {
            usize::MAX
        };
        let ok = single_quantum && moved.len() == 1 && moved[0].0 == expected_mover;
        if !ok {
            report.check.failures.push(format!(
                "stage {}: expected one ±1 change for gambler {}, saw {} change(s){}",
                row.stage,
                row.acting_e,
                moved.len(),
                if single_quantum {
                    ""
                } else {
                    " with a jump larger than one quantum"
                }
            ));
        }
        for e in 0..e_count {
            let c = &report.counters[e];
            let credited = &start.gambler_values[e] + &Capital::from(c.both_up + c.g_only_up);
            let debited = &row.gambler_values[e] + &Capital::from(c.both_down);
            if credited != debited || c.unclassified > 0 {
                report.check.failures.push(format!(
                    "stage {}: counters do not reconstruct G_{e}={} (start {}, +{} +{} -{}, {} unclassified)",
                    row.stage,
                    row.gambler_values[e],
                    start.gambler_values[e],
                    c.both_up,
                    c.g_only_up,
                    c.both_down,
                    c.unclassified
                ));
            }
        }
    }
    report
}

/// On every clause-2c row the acting gambler's ratio `Gₑ/φₑ` does not
/// decrease (extended-rational comparison).
pub fn check_ratio_monotonicity(trace: &Trace) -> CheckReport {
    let mut report = CheckReport::new("ratio_monotonicity");
    for (i, row) in trace.rows.iter().enumerate() {
        if row.reason != AttentionReason::Clause2c {
            continue;
        }
        report.rows_checked += 1;
        let e = row.acting_e;
        let (gs, phis, _) = before(trace, i);
        let (Some(phi0), Some(phi1)) = (phis[e].value(), row.opponent_values[e].value()) else {
            report
                .failures
                .push(format!("stage {}: clause 2c without φ_{e} values", row.stage));
            continue;
        };
        let before = ExtRatio::new(gs[e].clone(), phi0.clone());
        let after = ExtRatio::new(row.gambler_values[e].clone(), phi1.clone());
        if ext_ratio_cmp(&after, &before) == Ordering::Less {
            report.failures.push(format!(
                "stage {}: G_{e}/φ_{e} fell from {before} to {after}",
                row.stage
            ));
        }
    }
    report
}

/// Clause-2c rows where `φₑ` backs `A`'s bit follow `A` exactly when the
/// integer predicate `n·Gₑ < φₑ` says so.
pub fn check_sublemma_agreement(trace: &Trace) -> CheckReport {
    let mut report = CheckReport::new("sublemma_agreement");
    for (i, row) in trace.rows.iter().enumerate() {
        let Some(step) = &row.ratio_step else { continue };
        let e = row.acting_e;
        let (gs, phis, _) = before(trace, i);
        if phis[e].value() != Some(&step.phi_before) || gs[e] != step.g_before {
            report.failures.push(format!(
                "stage {}: recorded decision inputs disagree with the previous row",
                row.stage
            ));
            continue;
        }
        let Some(n) = step.phi_if_a.checked_sub(&step.phi_before).filter(|n| !n.is_zero()) else {
            continue;
        };
        report.rows_checked += 1;
        match sublemma_oracle(&gs[e], &step.phi_before, &n) {
            Ok(predicted) if predicted == row.matches_a => {}
            Ok(predicted) => report.failures.push(format!(
                "stage {}: G={} φ={} n={}: construction {} A but the predicate says {}",
                row.stage,
                gs[e],
                step.phi_before,
                n,
                if row.matches_a { "followed" } else { "opposed" },
                predicted
            )),
            Err(err) => report.failures.push(format!("stage {}: {err}", row.stage)),
        }
    }
    report
}

/// Once an opponent is reported inactive it is never reported again.
pub fn check_activity_monotone(trace: &Trace) -> CheckReport {
    let mut report = CheckReport::new("activity_monotone");
    let mut gone = vec![false; trace.family_size()];
    for row in &trace.rows {
        report.rows_checked += 1;
        for (e, v) in row.opponent_values.iter().enumerate() {
            match v {
                OpponentValue::Inactive => gone[e] = true,
                _ if gone[e] => report
                    .failures
                    .push(format!("stage {}: opponent {e} reactivated", row.stage)),
                _ => {}
            }
        }
    }
    report
}

/// A clause-2c row whose gambler already held at least `φₑ` strictly lowers
/// `φₑ`.
pub fn check_dominance_decrease(trace: &Trace) -> CheckReport {
    let mut report = CheckReport::new("dominance_decrease");
    for (i, row) in trace.rows.iter().enumerate() {
        if row.reason != AttentionReason::Clause2c {
            continue;
        }
        let e = row.acting_e;
        let (gs, phis, _) = before(trace, i);
        let (Some(phi0), Some(phi1)) = (phis[e].value(), row.opponent_values[e].value()) else {
            continue;
        };
        if &gs[e] < phi0 {
            continue;
        }
        report.rows_checked += 1;
        if phi1 >= phi0 {
            report.failures.push(format!(
                "stage {}: G_{e}={} ≥ φ_{e}={} yet φ_{e} went to {}",
                row.stage, gs[e], phi0, phi1
            ));
        }
    }
    report
}

/// What an opponent looks like at one node of `B`, recomputed from the
/// strategy alone.
#[derive(Debug, Clone)]
struct NodeView {
    active: bool,
    value: EvalResult,
    children: [EvalResult; 2],
}

impl NodeView {
    /// Nonzero wager at this node, if any.
    fn wagers(&self) -> bool {
        match (&self.value, &self.children) {
            (EvalResult::Converges(p), [EvalResult::Converges(c0), EvalResult::Converges(c1)]) => c0 != p || c1 != p,
            _ => false,
        }
    }
}

/// Walks every opponent along `B`, tracking activity with its own logic.
/// Yields the views at `B↾0, …, B↾n`.
fn replay(trace: &Trace, family: &[OpponentStrategy]) -> Vec<Vec<NodeView>> {
    let mut cursors: Vec<_> = family.iter().map(|s| s.root()).collect();
    let mut active = vec![true; family.len()];
    let mut views = Vec::with_capacity(trace.rows.len() + 1);
    let bits: Vec<Bit> = trace.rows.iter().map(|r| r.chosen_bit).collect();
    for depth in 0..=bits.len() {
        let mut here = Vec::with_capacity(family.len());
        for (e, s) in family.iter().enumerate() {
            let value = s.value(&cursors[e]);
            let children = Bit::BOTH.map(|b| s.value(&s.advance(&cursors[e], b)));
            if active[e] {
                let fair = match (&value, &children) {
                    (EvalResult::Converges(p), [EvalResult::Converges(c0), EvalResult::Converges(c1)]) => {
                        p.doubled() == c0 + c1
                    }
                    _ => true,
                };
                active[e] = value.converges() && children[0].converges() == children[1].converges() && fair;
            }
            here.push(NodeView {
                active: active[e],
                value,
                children,
            });
        }
        views.push(here);
        if let Some(&bit) = bits.get(depth) {
            for (e, s) in family.iter().enumerate() {
                cursors[e] = s.advance(&cursors[e], bit);
            }
        }
    }
    views
}

fn attention(view: &NodeView, g: &Capital) -> Option<AttentionReason> {
    if g.is_zero() {
        return Some(AttentionReason::Clause1);
    }
    if !view.active {
        return None;
    }
    let parent = view.value.value()?;
    match (&view.children[0], &view.children[1]) {
        (EvalResult::Diverges, EvalResult::Diverges) => Some(AttentionReason::Clause2a),
        (EvalResult::Converges(c0), EvalResult::Converges(c1)) if c0 == parent && c1 == parent => {
            (parent > g).then_some(AttentionReason::Clause2b)
        }
        (EvalResult::Converges(c0), EvalResult::Converges(c1)) if c0 != parent && c1 != parent => {
            Some(AttentionReason::Clause2c)
        }
        _ => None,
    }
}

/// Each row acts for the least index requiring attention, for the reason
/// recorded. Re-evaluates the strategies along `B` from scratch.
pub fn check_priority(trace: &Trace, family: &[OpponentStrategy]) -> Result<CheckReport, VerifyError> {
    ensure_family(trace, family)?;
    let mut report = CheckReport::new("priority");
    let views = replay(trace, family);
    let e_count = family.len();
    let mut fresh_used = 0usize;
    for (i, row) in trace.rows.iter().enumerate() {
        report.rows_checked += 1;
        let (gs, _, _) = before(trace, i);
        let expected = (0..e_count)
            .find_map(|e| attention(&views[i][e], &gs[e]).map(|r| (e, r)))
            .unwrap_or((e_count + fresh_used, AttentionReason::Clause1));
        if (row.acting_e, row.reason) != expected {
            report.failures.push(format!(
                "stage {}: acted for {} ({}) but the least index requiring attention is {} ({})",
                row.stage, row.acting_e, row.reason, expected.0, expected.1
            ));
        }
        if row.acting_e >= e_count {
            fresh_used += 1;
        }
    }
    Ok(report)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DefeatStatus {
    /// Capital along `B` ended at 0.
    Defeated,
    /// Stopped betting before the trailing window.
    Settled,
    /// Still betting within the trailing window.
    Undefeated,
}

impl fmt::Display for DefeatStatus {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            DefeatStatus::Defeated => "defeated",
            DefeatStatus::Settled => "settled",
            DefeatStatus::Undefeated => "undefeated",
        })
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct OpponentOutcome {
    pub name: String,
    /// Stage at which the last nonzero wager along `B` was settled.
    pub last_bet_stage: Option<u64>,
    /// Largest value along `B` while the opponent was active.
    pub sup_capital: Capital,
    pub final_value: Option<Capital>,
    pub status: DefeatStatus,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DefeatReport {
    pub window: u64,
    pub stages: u64,
    pub opponents: Vec<OpponentOutcome>,
}

/// Default trailing window: a tenth of the trace, at least one stage.
pub fn default_window(stages: u64) -> u64 {
    (stages / 10).max(1)
}

/// Classifies each opponent by its behaviour along `B`. An opponent counts
/// as undefeated if it wagered within the last `window` stages.
pub fn analyze_defeat(
    trace: &Trace,
    family: &[OpponentStrategy],
    window: Option<u64>,
) -> Result<DefeatReport, VerifyError> {
    ensure_family(trace, family)?;
    let stages = trace.rows.len() as u64;
    let window = window.unwrap_or_else(|| default_window(stages));
    let views = replay(trace, family);
    let opponents = family
        .iter()
        .enumerate()
        .map(|(e, s)| {
            let mut last_bet_stage = None;
            let mut sup = Capital::zero();
            for (depth, node) in views.iter().enumerate() {
                let v = &node[e];
                if !v.active {
                    break;
                }
                if let Some(c) = v.value.value() {
                    sup = sup.max(c.clone());
                }
                if (depth as u64) < stages && v.wagers() {
                    last_bet_stage = Some(depth as u64 + 1);
                }
            }
            let final_value = views.last().and_then(|node| node[e].value.value().cloned());
            let status = match (&final_value, last_bet_stage) {
                (Some(v), _) if v.is_zero() => DefeatStatus::Defeated,
                (_, Some(t)) if t + window > stages => DefeatStatus::Undefeated,
                _ => DefeatStatus::Settled,
            };
            OpponentOutcome {
                name: s.name.clone(),
                last_bet_stage,
                sup_capital: sup,
                final_value,
                status,
            }
        })
        .collect();
    Ok(DefeatReport {
        window,
        stages,
        opponents,
    })
}

/// `Gₑ/φₑ` after each row, or `None` where `φₑ` is not a value.
pub fn ratio_trajectory(trace: &Trace, e: usize) -> Vec<Option<ExtRatio>> {
    trace
        .rows
        .iter()
        .map(|r: &StageRecord| {
            r.opponent_values[e]
                .value()
                .map(|phi| ExtRatio::new(r.gambler_values[e].clone(), phi.clone()))
        })
        .collect()
}

/// Every trace-level check that needs no family.
pub fn trace_checks(trace: &Trace) -> Vec<CheckReport> {
    vec![
        check_conservation(trace),
        check_bookkeeping(trace).check,
        check_ratio_monotonicity(trace),
        check_sublemma_agreement(trace),
        check_activity_monotone(trace),
        check_dominance_decrease(trace),
    ]
}
