//! Stage records and the CSV trace format.
//!
//! Columns: `stage,acting_e,reason,bit,matches_A,M_capital,G_0..G_{E-1},phi_0..phi_{E-1}`
//! where `E` is the family size. A `phi` cell is a decimal value, `div`, or
//! `inactive`.

use std::fmt;
use std::io::Write;

use crate::bits::{Bit, BitString};
use crate::capital::Capital;
use crate::martingale::{EvalResult, Flavor};
use crate::oracle::Oracle;

use super::{AttentionReason, ConstructionState};

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum OpponentValue {
    Value(Capital),
    Diverged,
    Inactive,
}

impl OpponentValue {
    pub fn value(&self) -> Option<&Capital> {
        match self {
            OpponentValue::Value(c) => Some(c),
            _ => None,
        }
    }
}

impl From<&EvalResult> for OpponentValue {
    fn from(r: &EvalResult) -> Self {
        match r {
            EvalResult::Converges(c) => OpponentValue::Value(c.clone()),
            EvalResult::Diverges => OpponentValue::Diverged,
        }
    }
}

impl fmt::Display for OpponentValue {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            OpponentValue::Value(c) => c.fmt(f),
            OpponentValue::Diverged => f.write_str("div"),
            OpponentValue::Inactive => f.write_str("inactive"),
        }
    }
}

/// Inputs to a clause-2c decision, captured before the stage acted.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RatioStep {
    pub g_before: Capital,
    pub phi_before: Capital,
    pub phi_if_a: Capital,
    pub phi_if_not_a: Capital,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct StageRecord {
    /// 1-based; stage `s` decides bit `s - 1` of `B`.
    pub stage: u64,
    pub acting_e: usize,
    pub reason: AttentionReason,
    pub chosen_bit: Bit,
    pub matches_a: bool,
    pub adversary_capital: Capital,
    /// `G_0..G_{E-1}` after the stage.
    pub gambler_values: Vec<Capital>,
    /// Summed capital of gamblers initialized past the family.
    pub fresh_total: Capital,
    /// `φₑ` at the prefix after the stage.
    pub opponent_values: Vec<OpponentValue>,
    pub ratio_step: Option<RatioStep>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct OpponentInfo {
    pub name: String,
    pub flavor: Flavor,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TraceHeader {
    pub oracle: Oracle,
    pub opponents: Vec<OpponentInfo>,
    /// `φₑ(ε)` before stage 1.
    pub initial_values: Vec<OpponentValue>,
}

#[derive(Debug, Clone)]
pub struct Trace {
    pub header: TraceHeader,
    pub rows: Vec<StageRecord>,
    pub final_state: ConstructionState,
}

impl Trace {
    pub fn family_size(&self) -> usize {
        self.header.opponents.len()
    }

    /// `B↾n` for the `n` stages recorded.
    pub fn b_prefix(&self) -> BitString {
        self.rows.iter().map(|r| r.chosen_bit).collect()
    }

    /// `M`'s capital at the end, or its initial quantum for an empty trace.
    pub fn final_adversary_capital(&self) -> Capital {
        self.rows
            .last()
            .map(|r| r.adversary_capital.clone())
            .unwrap_or_else(Capital::one)
    }
}

pub fn write_trace_csv<W: Write>(trace: &Trace, out: W) -> Result<(), csv::Error> {
    let mut w = csv::Writer::from_writer(out);
    let e = trace.family_size();
    let mut header: Vec<String> = ["stage", "acting_e", "reason", "bit", "matches_A", "M_capital"]
        .iter()
        .map(|s| s.to_string())
        .collect();
    header.extend((0..e).map(|i| format!("G_{i}")));
    header.extend((0..e).map(|i| format!("phi_{i}")));
    w.write_record(&header)?;
    for row in &trace.rows {
        let mut record = vec![
            row.stage.to_string(),
            row.acting_e.to_string(),
            row.reason.to_string(),
            row.chosen_bit.to_string(),
            row.matches_a.to_string(),
            row.adversary_capital.to_string(),
        ];
        record.extend(row.gambler_values.iter().map(|g| g.to_string()));
        record.extend(row.opponent_values.iter().map(|v| v.to_string()));
        w.write_record(&record)?;
    }
    w.flush()?;
    Ok(())
}
