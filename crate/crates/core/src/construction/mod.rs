//! The diagonalization engine.
//!
//! Builds `B` one bit per stage against a finite family of opponents `φₑ`
//! while the adversary `M` bets on `A`. `M`'s capital is split into a reserve
//! of one quantum and gamblers `Gₑ`; every stage credits or debits exactly one
//! gambler by one quantum, on behalf of the least index requiring attention.
//!
//! Convergence questions about `φₑ` are answered by the opponents themselves
//! (declared divergence) or by a fuel bound; see
//! [`Flavor`](crate::martingale::Flavor).

mod trace;

use std::collections::BTreeMap;
use std::fmt;

pub use trace::{write_trace_csv, OpponentInfo, OpponentValue, RatioStep, StageRecord, Trace, TraceHeader};

use crate::bits::{Bit, BitString};
use crate::capital::{ext_ratio_cmp, Capital, ExtRatio};
use crate::martingale::{EvalResult, Martingale};
use crate::opponents::{OpponentCursor, OpponentStrategy};
use crate::oracle::Oracle;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum InactiveReason {
    FairnessViolation,
    MixedConvergence,
    ParentDivergence,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum ActivityStatus {
    Active,
    /// Inactive from stage `at_stage` onward. Never reverts.
    Inactive {
        reason: InactiveReason,
        at_stage: u64,
    },
}

impl ActivityStatus {
    pub fn is_active(self) -> bool {
        self == ActivityStatus::Active
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum AttentionReason {
    /// `Gₑ = 0`.
    Clause1,
    /// Both children of the current node diverge.
    Clause2a,
    /// `φₑ` is not betting but holds more than `Gₑ`.
    Clause2b,
    /// `φₑ` is betting.
    Clause2c,
}

impl AttentionReason {
    pub fn as_str(self) -> &'static str {
        match self {
            AttentionReason::Clause1 => "clause1",
            AttentionReason::Clause2a => "clause2a",
            AttentionReason::Clause2b => "clause2b",
            AttentionReason::Clause2c => "clause2c",
        }
    }
}

impl fmt::Display for AttentionReason {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

/// Memoized evaluations of one opponent at the current prefix of `B` and at
/// its two children.
#[derive(Debug, Clone)]
struct Frontier {
    value: EvalResult,
    children: [(OpponentCursor, EvalResult); 2],
}

impl Frontier {
    fn at(strategy: &OpponentStrategy, cursor: OpponentCursor) -> Frontier {
        let value = strategy.value(&cursor);
        let children = Bit::BOTH.map(|b| {
            let child = strategy.advance(&cursor, b);
            let v = strategy.value(&child);
            (child, v)
        });
        Frontier { value, children }
    }

    fn child_value(&self, bit: Bit) -> &EvalResult {
        &self.children[bit.as_u8() as usize].1
    }
}

/// Everything the construction knows after some number of stages.
#[derive(Debug, Clone)]
pub struct ConstructionState {
    b_prefix: BitString,
    /// Sparse; an absent index holds zero.
    gamblers: BTreeMap<usize, Capital>,
    reserve: Capital,
    /// Capital of initialized gamblers beyond the opponent family.
    fresh_total: Capital,
    fresh_count: usize,
    adversary: Capital,
    activity: Vec<ActivityStatus>,
    /// `None` once the opponent is inactive and no longer evaluated.
    frontier: Vec<Option<Frontier>>,
}

impl ConstructionState {
    pub fn b_prefix(&self) -> &BitString {
        &self.b_prefix
    }

    /// Completed stages, which equals `|B|`.
    pub fn stages_run(&self) -> u64 {
        self.b_prefix.len() as u64
    }

    pub fn gambler(&self, e: usize) -> Capital {
        self.gamblers.get(&e).cloned().unwrap_or_default()
    }

    pub fn gamblers(&self) -> &BTreeMap<usize, Capital> {
        &self.gamblers
    }

    pub fn reserve(&self) -> &Capital {
        &self.reserve
    }

    pub fn fresh_total(&self) -> &Capital {
        &self.fresh_total
    }

    /// `M(B)` as tracked incrementally by the engine.
    pub fn adversary_capital(&self) -> &Capital {
        &self.adversary
    }

    pub fn activity(&self, e: usize) -> ActivityStatus {
        self.activity.get(e).copied().unwrap_or(BEYOND_FAMILY)
    }

    /// `φₑ(B)` if still evaluated.
    pub fn opponent_value(&self, e: usize) -> Option<&EvalResult> {
        self.frontier.get(e)?.as_ref().map(|f| &f.value)
    }
}

/// Indices past the family behave like the nowhere-defined function.
const BEYOND_FAMILY: ActivityStatus = ActivityStatus::Inactive {
    reason: InactiveReason::ParentDivergence,
    at_stage: 1,
};

/// Decides the clause-2c bit. Returns `true` to follow `A`.
///
/// Compares `(G+1)/φ(B⌢A(s))` with `(G−1)/φ(B⌢Ā(s))`, where a zero
/// denominator is infinite. Only a strictly larger `A`-side ratio follows
/// `A`; ties go to `Ā`, which lowers both `Gₑ` and `φₑ`.
///
/// # Panics
/// If `g` is zero; zero-capital gamblers are handled by clause 1 first.
pub fn choose_bit_clause2c(g: &Capital, phi_child_a: &Capital, phi_child_not_a: &Capital) -> bool {
    assert!(!g.is_zero(), "clause 2c needs a funded gambler");
    let mut up = g.clone();
    up.increment();
    let mut down = g.clone();
    down.decrement();
    let follow = ExtRatio::new(up, phi_child_a.clone());
    let oppose = ExtRatio::new(down, phi_child_not_a.clone());
    ext_ratio_cmp(&follow, &oppose) == std::cmp::Ordering::Greater
}

/// A running construction over a fixed oracle and opponent family.
pub struct Construction<'a> {
    oracle: &'a Oracle,
    family: &'a [OpponentStrategy],
    state: ConstructionState,
}

impl<'a> Construction<'a> {
    /// Stage 0: `B = ε`, all gamblers empty.
    pub fn new(oracle: &'a Oracle, family: &'a [OpponentStrategy]) -> Self {
        let frontier = family.iter().map(|s| Some(Frontier::at(s, s.root()))).collect();
        let mut c = Construction {
            oracle,
            family,
            state: ConstructionState {
                b_prefix: BitString::empty(),
                gamblers: BTreeMap::new(),
                reserve: Capital::one(),
                fresh_total: Capital::zero(),
                fresh_count: 0,
                adversary: Capital::one(),
                activity: vec![ActivityStatus::Active; family.len()],
                frontier,
            },
        };
        for e in 0..family.len() {
            c.update_activity(e);
        }
        c
    }

    pub fn state(&self) -> &ConstructionState {
        &self.state
    }

    pub fn into_state(self) -> ConstructionState {
        self.state
    }

    pub fn family(&self) -> &'a [OpponentStrategy] {
        self.family
    }

    /// Checks the newest node of `B` for opponent `e` and returns the
    /// resulting status.
    ///
    /// `φₑ` stays active while it converges on `B`, its children at each node
    /// converge together, and it is fair wherever all three converge.
    pub fn update_activity(&mut self, e: usize) -> ActivityStatus {
        let Some(status) = self.state.activity.get(e).copied() else {
            return BEYOND_FAMILY;
        };
        if !status.is_active() {
            return status;
        }
        let frontier = self.state.frontier[e]
            .as_ref()
            .expect("active opponents keep a frontier");
        let reason = match (
            &frontier.value,
            frontier.child_value(Bit::Zero),
            frontier.child_value(Bit::One),
        ) {
            (EvalResult::Diverges, _, _) => Some(InactiveReason::ParentDivergence),
            (_, c0, c1) if c0.converges() != c1.converges() => Some(InactiveReason::MixedConvergence),
            (EvalResult::Converges(p), EvalResult::Converges(c0), EvalResult::Converges(c1))
                if p.doubled() != c0 + c1 =>
            {
                Some(InactiveReason::FairnessViolation)
            }
            _ => None,
        };
        let status = match reason {
            Some(reason) => {
                self.state.frontier[e] = None;
                ActivityStatus::Inactive {
                    reason,
                    at_stage: self.state.stages_run() + 1,
                }
            }
            None => ActivityStatus::Active,
        };
        self.state.activity[e] = status;
        status
    }

    /// The clause under which `e` requires attention at the next stage.
    pub fn requires_attention(&self, e: usize) -> Option<AttentionReason> {
        let g = self.state.gambler(e);
        if g.is_zero() {
            return Some(AttentionReason::Clause1);
        }
        if !self.state.activity(e).is_active() {
            return None;
        }
        let frontier = self.state.frontier[e].as_ref()?;
        let parent = frontier.value.value()?;
        match (frontier.child_value(Bit::Zero), frontier.child_value(Bit::One)) {
            (EvalResult::Diverges, EvalResult::Diverges) => Some(AttentionReason::Clause2a),
            (EvalResult::Converges(c0), EvalResult::Converges(c1)) => {
                if c0 == parent && c1 == parent {
                    (parent > &g).then_some(AttentionReason::Clause2b)
                } else if c0 != parent && c1 != parent {
                    Some(AttentionReason::Clause2c)
                } else {
                    None
                }
            }
            _ => None,
        }
    }

    /// Least index requiring attention. Past the family only uninitialized
    /// gamblers qualify, and they are initialized in index order.
    fn least_requiring_attention(&self) -> (usize, AttentionReason) {
        (0..self.family.len())
            .find_map(|e| self.requires_attention(e).map(|r| (e, r)))
            .unwrap_or((self.family.len() + self.state.fresh_count, AttentionReason::Clause1))
    }

    pub fn run_stage(&mut self) -> StageRecord {
        let position = self.state.stages_run();
        let stage = position + 1;
        let was_active: Vec<bool> = self.state.activity.iter().map(|s| s.is_active()).collect();
        let (e, reason) = self.least_requiring_attention();
        let a_bit = self.oracle.bit(position);

        let mut ratio_step = None;
        let follow_a = match reason {
            AttentionReason::Clause2c => {
                let frontier = self.state.frontier[e]
                    .as_ref()
                    .expect("clause 2c implies an active opponent");
                let value = |r: &EvalResult| r.value().expect("clause 2c children converge").clone();
                let step = RatioStep {
                    g_before: self.state.gambler(e),
                    phi_before: value(&frontier.value),
                    phi_if_a: value(frontier.child_value(a_bit)),
                    phi_if_not_a: value(frontier.child_value(a_bit.complement())),
                };
                let follow = choose_bit_clause2c(&step.g_before, &step.phi_if_a, &step.phi_if_not_a);
                ratio_step = Some(step);
                follow
            }
            _ => true,
        };
        let bit = if follow_a { a_bit } else { a_bit.complement() };

        let gambler = self.state.gamblers.entry(e).or_default();
        if follow_a {
            gambler.increment();
        } else {
            gambler.decrement();
        }
        if e >= self.family.len() {
            self.state.fresh_count += 1;
            self.state.fresh_total.increment();
        }
        // M bets one quantum on A(position) whenever it has capital.
        if !self.state.adversary.is_zero() {
            if follow_a {
                self.state.adversary.increment();
            } else {
                self.state.adversary.decrement();
            }
        }
        self.state.b_prefix.push(bit);

        for (i, strategy) in self.family.iter().enumerate() {
            if let Some(frontier) = self.state.frontier[i].take() {
                let [c0, c1] = frontier.children;
                let next = if bit == Bit::Zero { c0.0 } else { c1.0 };
                self.state.frontier[i] = Some(Frontier::at(strategy, next));
                self.update_activity(i);
            }
        }

        let opponent_values = (0..self.family.len())
            .map(|i| {
                if !was_active[i] {
                    return OpponentValue::Inactive;
                }
                match self.state.frontier[i].as_ref() {
                    Some(f) => OpponentValue::from(&f.value),
                    // deactivated just now; report what it answered here
                    None => OpponentValue::from(&self.family[i].evaluate(&self.state.b_prefix)),
                }
            })
            .collect();

        StageRecord {
            stage,
            acting_e: e,
            reason,
            chosen_bit: bit,
            matches_a: bit == self.oracle.bit(stage - 1),
            adversary_capital: self.state.adversary.clone(),
            gambler_values: (0..self.family.len()).map(|i| self.state.gambler(i)).collect(),
            fresh_total: self.state.fresh_total.clone(),
            opponent_values,
            ratio_step,
        }
    }

    fn header(&self) -> TraceHeader {
        TraceHeader {
            oracle: self.oracle.clone(),
            opponents: self
                .family
                .iter()
                .map(|s| OpponentInfo {
                    name: s.name.clone(),
                    flavor: s.flavor,
                })
                .collect(),
            initial_values: self
                .family
                .iter()
                .map(|s| OpponentValue::from(&s.evaluate(&BitString::empty())))
                .collect(),
        }
    }
}

/// Runs `num_stages` stages from stage 0 and returns the full trace.
pub fn build_b(oracle: &Oracle, family: &[OpponentStrategy], num_stages: u64) -> Trace {
    let mut construction = Construction::new(oracle, family);
    let header = construction.header();
    let rows = (0..num_stages).map(|_| construction.run_stage()).collect();
    Trace {
        header,
        rows,
        final_state: construction.into_state(),
    }
}
