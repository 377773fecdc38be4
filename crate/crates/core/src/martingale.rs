//! Martingales as queryable (possibly partial) functions on binary strings,
//! the adversary martingale `M`, and finite-depth checks of fairness,
//! valuedness, and success.

use std::collections::BTreeSet;
use std::fmt;

use thiserror::Error;

use crate::bits::{Bit, BitString};
use crate::capital::Capital;
use crate::oracle::Oracle;

/// Answer to a convergence query at a node.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum EvalResult {
    Converges(Capital),
    Diverges,
}

impl EvalResult {
    pub fn value(&self) -> Option<&Capital> {
        match self {
            EvalResult::Converges(c) => Some(c),
            EvalResult::Diverges => None,
        }
    }

    pub fn converges(&self) -> bool {
        matches!(self, EvalResult::Converges(_))
    }
}

/// How divergence answers are produced.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Flavor {
    /// Divergence is declared by the strategy itself, so convergence queries
    /// are answered exactly.
    DeclaredPartial,
    /// Evaluations costing more than `fuel` steps are reported as divergent.
    FuelBounded { fuel: u64 },
}

impl fmt::Display for Flavor {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Flavor::DeclaredPartial => write!(f, "declared-partial"),
            Flavor::FuelBounded { fuel } => write!(f, "fuel-bounded({fuel})"),
        }
    }
}

/// A deterministic, possibly partial, integer-valued betting strategy.
///
/// Evaluation is incremental: a cursor sits at a node of the binary tree and
/// [`advance`](Martingale::advance) moves it to a child. A partial martingale
/// keeps cursors below a divergent node divergent (downward-closed domain);
/// [`validate_fairness`] reports strategies that don't.
pub trait Martingale {
    type Cursor: Clone;

    fn root(&self) -> Self::Cursor;

    fn advance(&self, cursor: &Self::Cursor, bit: Bit) -> Self::Cursor;

    fn value(&self, cursor: &Self::Cursor) -> EvalResult;

    fn evaluate(&self, sigma: &BitString) -> EvalResult {
        let mut cursor = self.root();
        for bit in sigma.iter() {
            cursor = self.advance(&cursor, bit);
        }
        self.value(&cursor)
    }
}

/// The adversary `M`: starts with one quantum and bets one quantum that the
/// `n`th bit it sees is `A(n)`, until it runs out of capital.
#[derive(Debug, Clone, Copy)]
pub struct Adversary<'a> {
    oracle: &'a Oracle,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct AdversaryCursor {
    pub depth: u64,
    pub capital: Capital,
}

impl<'a> Adversary<'a> {
    pub fn new(oracle: &'a Oracle) -> Self {
        Adversary { oracle }
    }

    pub fn oracle(&self) -> &'a Oracle {
        self.oracle
    }
}

impl Martingale for Adversary<'_> {
    type Cursor = AdversaryCursor;

    fn root(&self) -> AdversaryCursor {
        AdversaryCursor {
            depth: 0,
            capital: Capital::one(),
        }
    }

    fn advance(&self, cursor: &AdversaryCursor, bit: Bit) -> AdversaryCursor {
        let mut capital = cursor.capital.clone();
        if !capital.is_zero() {
            if bit == self.oracle.bit(cursor.depth) {
                capital.increment();
            } else {
                capital.decrement();
            }
        }
        AdversaryCursor {
            depth: cursor.depth + 1,
            capital,
        }
    }

    fn value(&self, cursor: &AdversaryCursor) -> EvalResult {
        EvalResult::Converges(cursor.capital.clone())
    }
}

/// `M(σ)` for the adversary betting on `oracle`.
pub fn adversary_capital(oracle: &Oracle, sigma: &BitString) -> Capital {
    let m = Adversary::new(oracle);
    let mut cursor = m.root();
    for bit in sigma.iter() {
        cursor = m.advance(&cursor, bit);
    }
    cursor.capital
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum ViolationKind {
    /// Parent and both children converge but `2·parent ≠ child0 + child1`.
    Unfair { parent: Capital, children: [Capital; 2] },
    /// Exactly one child converges.
    MixedConvergence,
    /// The parent diverges yet a child converges.
    NotDownwardClosed,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Violation {
    pub at: BitString,
    pub kind: ViolationKind,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ValidationReport {
    pub depth: usize,
    pub nodes_checked: u64,
    pub violations: Vec<Violation>,
}

impl ValidationReport {
    pub fn is_clean(&self) -> bool {
        self.violations.is_empty()
    }

    pub fn fairness_violations(&self) -> impl Iterator<Item = &Violation> {
        self.violations
            .iter()
            .filter(|v| matches!(v.kind, ViolationKind::Unfair { .. }))
    }
}

/// Exhaustively checks every node of length `< depth`.
///
/// Values are [`Capital`]s, so non-integer or negative values cannot occur.
pub fn validate_fairness<M: Martingale>(strategy: &M, depth: usize) -> ValidationReport {
    let mut report = ValidationReport {
        depth,
        nodes_checked: 0,
        violations: Vec::new(),
    };
    let mut stack = vec![(BitString::empty(), strategy.root())];
    while let Some((sigma, cursor)) = stack.pop() {
        if sigma.len() >= depth {
            continue;
        }
        report.nodes_checked += 1;
        let parent = strategy.value(&cursor);
        let kids = Bit::BOTH.map(|b| strategy.advance(&cursor, b));
        let values = [strategy.value(&kids[0]), strategy.value(&kids[1])];
        let kind = match (&parent, &values[0], &values[1]) {
            (EvalResult::Converges(p), EvalResult::Converges(c0), EvalResult::Converges(c1)) => {
                (p.doubled() != c0 + c1).then(|| ViolationKind::Unfair {
                    parent: p.clone(),
                    children: [c0.clone(), c1.clone()],
                })
            }
            (EvalResult::Diverges, c0, c1) if c0.converges() || c1.converges() => {
                Some(ViolationKind::NotDownwardClosed)
            }
            (_, c0, c1) if c0.converges() != c1.converges() => Some(ViolationKind::MixedConvergence),
            _ => None,
        };
        if let Some(kind) = kind {
            report.violations.push(Violation {
                at: sigma.clone(),
                kind,
            });
        }
        let [k0, k1] = kids;
        stack.push((sigma.child(Bit::One), k1));
        stack.push((sigma.child(Bit::Zero), k0));
    }
    report
}

/// Strongest valuedness class observed to a finite depth.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum ValuednessClass {
    /// No wagers observed; only the integer-valued claim is supported.
    IntegerValued,
    FiniteValued(BTreeSet<Capital>),
    SingleValued(Capital),
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ValuednessReport {
    pub depth: usize,
    pub class: ValuednessClass,
    /// Nonzero wager magnitudes seen at converging nodes.
    pub observed_wagers: BTreeSet<Capital>,
    /// Some node held at least the smallest observed wager but wagered 0.
    pub idle_with_funds: bool,
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ClassifyError {
    #[error("strategy is not a fair martingale to depth {depth} ({violations} violations)")]
    NotFair { depth: usize, violations: usize },
}

/// Classifies wager sizes over nodes of length `< depth`.
///
/// A node whose capital is below every wager in `T` must not bet, so zero
/// wagers there are consistent with `T`. A zero wager at a node that could
/// afford some member of `T` forces `0 ∈ T`.
pub fn classify_valuedness<M: Martingale>(strategy: &M, depth: usize) -> Result<ValuednessReport, ClassifyError> {
    let fairness = validate_fairness(strategy, depth);
    if !fairness.is_clean() {
        return Err(ClassifyError::NotFair {
            depth,
            violations: fairness.violations.len(),
        });
    }

    let mut wagers = BTreeSet::new();
    let mut idle_capitals: Vec<Capital> = Vec::new();
    let mut stack = vec![(0usize, strategy.root())];
    while let Some((len, cursor)) = stack.pop() {
        if len >= depth {
            continue;
        }
        let EvalResult::Converges(parent) = strategy.value(&cursor) else {
            continue;
        };
        let child0 = strategy.advance(&cursor, Bit::Zero);
        if let EvalResult::Converges(c0) = strategy.value(&child0) {
            let wager = parent.abs_diff(&c0);
            if wager.is_zero() {
                idle_capitals.push(parent);
            } else {
                wagers.insert(wager);
            }
        }
        stack.push((len + 1, strategy.advance(&cursor, Bit::One)));
        stack.push((len + 1, child0));
    }

    let idle_with_funds = match wagers.first() {
        Some(min) => idle_capitals.iter().any(|c| c >= min),
        None => false,
    };
    let class = if wagers.is_empty() {
        ValuednessClass::IntegerValued
    } else {
        let mut t = wagers.clone();
        if idle_with_funds {
            t.insert(Capital::zero());
        }
        if t.len() == 1 {
            ValuednessClass::SingleValued(t.into_iter().next().expect("one element"))
        } else {
            ValuednessClass::FiniteValued(t)
        }
    };
    Ok(ValuednessReport {
        depth,
        class,
        observed_wagers: wagers,
        idle_with_funds,
    })
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SuccessSummary {
    pub sup_observed: Capital,
    pub threshold_reached: bool,
}

/// Running supremum of a capital sequence against a threshold. `None` for an
/// empty sequence.
pub fn success_sup<'a, I>(capitals: I, threshold: &Capital) -> Option<SuccessSummary>
where
    I: IntoIterator<Item = &'a Capital>,
{
    let sup = capitals.into_iter().max()?.clone();
    Some(SuccessSummary {
        threshold_reached: &sup >= threshold,
        sup_observed: sup,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn bits(s: &str) -> BitString {
        s.parse().unwrap()
    }

    /// Values given by a closure; stands in for catalog strategies so these
    /// tests stay independent of the opponents module.
    struct FnMartingale<F: Fn(&BitString) -> EvalResult>(F);

    impl<F: Fn(&BitString) -> EvalResult> Martingale for FnMartingale<F> {
        type Cursor = BitString;
        fn root(&self) -> BitString {
            BitString::empty()
        }
        fn advance(&self, c: &BitString, bit: Bit) -> BitString {
            c.child(bit)
        }
        fn value(&self, c: &BitString) -> EvalResult {
            (self.0)(c)
        }
    }

    fn conv(v: u64) -> EvalResult {
        EvalResult::Converges(v.into())
    }

    #[test]
    fn adversary_starts_with_one_quantum() {
        let a = Oracle::periodic("01").unwrap();
        assert_eq!(adversary_capital(&a, &BitString::empty()), Capital::from(1));
    }

    #[test]
    fn adversary_gains_one_per_matching_bit() {
        let a = Oracle::periodic("01").unwrap();
        assert_eq!(adversary_capital(&a, &bits("010")), Capital::from(4));
    }

    #[test]
    fn adversary_freezes_at_zero() {
        let a = Oracle::periodic("01").unwrap();
        assert_eq!(adversary_capital(&a, &bits("1")), Capital::zero());
        assert_eq!(adversary_capital(&a, &bits("10")), Capital::zero());
        assert_eq!(adversary_capital(&a, &bits("1111")), Capital::zero());
    }

    #[test]
    fn adversary_is_fair_to_depth_12() {
        for a in ["periodic:01", "seed:42", "prefix:111:periodic:0"] {
            let a: Oracle = a.parse().unwrap();
            let report = validate_fairness(&Adversary::new(&a), 12);
            assert!(report.is_clean(), "{:?}", report.violations.first());
            assert_eq!(report.nodes_checked, (1 << 12) - 1);
        }
    }

    #[test]
    fn adversary_is_single_valued_one() {
        let a: Oracle = "seed:42".parse().unwrap();
        let report = classify_valuedness(&Adversary::new(&a), 10).unwrap();
        assert_eq!(report.class, ValuednessClass::SingleValued(Capital::one()));
    }

    #[test]
    fn fair_split_has_no_violation() {
        let m = FnMartingale(|s: &BitString| match s.to_string().as_str() {
            "" => conv(4),
            "0" => conv(6),
            "1" => conv(2),
            _ => EvalResult::Diverges,
        });
        let report = validate_fairness(&m, 1);
        assert!(report.is_clean());
    }

    #[test]
    fn unfair_split_is_flagged() {
        let m = FnMartingale(|s: &BitString| match s.to_string().as_str() {
            "" => conv(4),
            "0" => conv(6),
            "1" => conv(3),
            _ => EvalResult::Diverges,
        });
        let report = validate_fairness(&m, 1);
        assert_eq!(
            report.violations,
            vec![Violation {
                at: BitString::empty(),
                kind: ViolationKind::Unfair {
                    parent: 4.into(),
                    children: [6.into(), 3.into()]
                }
            }]
        );
    }

    #[test]
    fn mixed_child_convergence_is_flagged() {
        let m = FnMartingale(|s: &BitString| match s.to_string().as_str() {
            "" => conv(5),
            "0" => conv(5),
            _ => EvalResult::Diverges,
        });
        let report = validate_fairness(&m, 1);
        assert_eq!(report.violations.len(), 1);
        assert_eq!(report.violations[0].kind, ViolationKind::MixedConvergence);
    }

    #[test]
    fn divergent_parent_with_convergent_child_is_flagged() {
        let m = FnMartingale(|s: &BitString| match s.to_string().as_str() {
            "0" => conv(1),
            "1" => conv(1),
            _ => EvalResult::Diverges,
        });
        let report = validate_fairness(&m, 1);
        assert_eq!(report.violations[0].kind, ViolationKind::NotDownwardClosed);
    }

    /// Bets `1 + (|σ| mod 3)` on 0 when it can afford it.
    fn cycling_wager(s: &BitString) -> EvalResult {
        let mut capital: u64 = 20;
        for (i, b) in s.iter().enumerate() {
            let w = 1 + (i as u64 % 3);
            if capital >= w {
                capital = if b == Bit::Zero { capital + w } else { capital - w };
            }
        }
        conv(capital)
    }

    #[test]
    fn wagers_from_one_to_three_are_finite_valued() {
        let report = classify_valuedness(&FnMartingale(cycling_wager), 8).unwrap();
        let expected: BTreeSet<Capital> = [1u64, 2, 3].into_iter().map(Capital::from).collect();
        assert_eq!(report.class, ValuednessClass::FiniteValued(expected));
    }

    #[test]
    fn never_wagering_is_degenerate_integer_valued() {
        let report = classify_valuedness(&FnMartingale(|_: &BitString| conv(5)), 6).unwrap();
        assert_eq!(report.class, ValuednessClass::IntegerValued);
        assert!(report.observed_wagers.is_empty());
    }

    #[test]
    fn classification_rejects_unfair_strategies() {
        let m = FnMartingale(|s: &BitString| conv(s.len() as u64));
        assert!(matches!(classify_valuedness(&m, 3), Err(ClassifyError::NotFair { .. })));
    }

    #[test]
    fn success_sup_examples() {
        let caps: Vec<Capital> = [1u64, 2, 3, 2].into_iter().map(Capital::from).collect();
        let s = success_sup(&caps, &3.into()).unwrap();
        assert_eq!((s.sup_observed, s.threshold_reached), (Capital::from(3), true));

        let caps: Vec<Capital> = [1u64, 0, 0, 0].into_iter().map(Capital::from).collect();
        let s = success_sup(&caps, &2.into()).unwrap();
        assert_eq!((s.sup_observed, s.threshold_reached), (Capital::from(1), false));

        assert_eq!(success_sup(&Vec::<Capital>::new(), &1.into()), None);
    }
}
