//! The bundled opponent catalog.
//!
//! Each opponent is a deterministic integer-valued strategy built from a
//! [`StrategySpec`]. The kinds are chosen so that a small family reaches every
//! attention clause of the construction: savers trigger the "not betting but
//! richer than its gambler" case, `partial_after` runs out of domain, and the
//! bettors force the ratio rule.

mod spec;

use std::collections::HashMap;
use std::fmt;
use std::str::FromStr;

use thiserror::Error;

pub use spec::{parse_strategy_spec, serialize_strategy_specs, StrategyKind, StrategySpec};

use crate::bits::{Bit, BitString};
use crate::capital::Capital;
use crate::martingale::{EvalResult, Flavor, Martingale};
use crate::oracle::Oracle;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum SpecError {
    #[error("line {line}: {message}")]
    Syntax { line: usize, message: String },
    #[error("line {line}: duplicate strategy name {name:?}")]
    DuplicateName { line: usize, name: String },
    #[error("line {line}: unknown kind {kind:?}")]
    UnknownKind { line: usize, kind: String },
    #[error("{name}: {kind} requires parameter {param:?}")]
    MissingParam {
        name: String,
        kind: StrategyKind,
        param: &'static str,
    },
    #[error("{name}: parameter {param}={value:?} is not valid ({expected})")]
    InvalidParam {
        name: String,
        param: String,
        value: String,
        expected: &'static str,
    },
    #[error("{name}: capital must be non-negative, got {value}")]
    NegativeCapital { name: String, value: String },
    #[error("{name}: unexpected parameter {param:?} for {kind}")]
    UnknownParam {
        name: String,
        kind: StrategyKind,
        param: String,
    },
}

/// Which bit a bettor backs at a node.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Guesser {
    /// Backs `|σ| mod 2`.
    Alternating,
    AllZeros,
    AllOnes,
    /// Backs the more frequent bit of `σ`, 0 on ties.
    MajorityOfHistory,
}

impl Guesser {
    fn name(self) -> &'static str {
        match self {
            Guesser::Alternating => "alternating",
            Guesser::AllZeros => "all_zeros",
            Guesser::AllOnes => "all_ones",
            Guesser::MajorityOfHistory => "majority_of_history",
        }
    }

    fn guess(self, depth: u64, ones: u64) -> Bit {
        match self {
            Guesser::Alternating => Bit::from(depth % 2 == 1),
            Guesser::AllZeros => Bit::Zero,
            Guesser::AllOnes => Bit::One,
            Guesser::MajorityOfHistory => Bit::from(2 * ones > depth),
        }
    }
}

impl FromStr for Guesser {
    type Err = ();

    fn from_str(s: &str) -> Result<Self, ()> {
        [
            Guesser::Alternating,
            Guesser::AllZeros,
            Guesser::AllOnes,
            Guesser::MajorityOfHistory,
        ]
        .into_iter()
        .find(|g| g.name() == s)
        .ok_or(())
    }
}

impl fmt::Display for Guesser {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Behavior {
    /// Wagers `stake` on the guess while capital covers it, else nothing.
    ConstantBettor { stake: Capital, guesser: Guesser },
    /// Never wagers.
    Saver,
    /// Constant, and defined only on strings of length `≤ depth`.
    PartialAfter { depth: u64 },
    /// Wagers `base`, doubling after each win and resetting after each loss,
    /// capped at current capital.
    Escalator { base: Capital, guesser: Guesser },
    /// Wagers one quantum on the true next bit of the oracle.
    Copycat { oracle: Oracle },
    /// Explicit values; strings not listed diverge.
    Table { entries: HashMap<BitString, Capital> },
}

/// A concrete opponent `φₑ`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct OpponentStrategy {
    pub name: String,
    pub flavor: Flavor,
    pub initial_capital: Capital,
    pub behavior: Behavior,
}

/// Position of an opponent's evaluation in the binary tree.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct OpponentCursor {
    depth: u64,
    /// `None` once the strategy has diverged.
    capital: Option<Capital>,
    ones: u64,
    /// Escalator's next intended wager.
    stake: Capital,
    /// Only tracked for table lookups.
    path: Option<BitString>,
}

impl OpponentCursor {
    pub fn depth(&self) -> u64 {
        self.depth
    }
}

impl OpponentStrategy {
    /// `(amount, backed bit)` this opponent wagers at the cursor's node.
    /// Zero wagers come back as `None`.
    fn wager(&self, cursor: &OpponentCursor) -> Option<(Capital, Bit)> {
        let capital = cursor.capital.as_ref()?;
        let (amount, bit) = match &self.behavior {
            Behavior::ConstantBettor { stake, guesser } => {
                if capital < stake {
                    return None;
                }
                (stake.clone(), guesser.guess(cursor.depth, cursor.ones))
            }
            Behavior::Escalator { guesser, .. } => (
                cursor.stake.clone().min(capital.clone()),
                guesser.guess(cursor.depth, cursor.ones),
            ),
            Behavior::Copycat { oracle } => {
                if capital.is_zero() {
                    return None;
                }
                (Capital::one(), oracle.bit(cursor.depth))
            }
            Behavior::Saver | Behavior::PartialAfter { .. } | Behavior::Table { .. } => return None,
        };
        (!amount.is_zero()).then_some((amount, bit))
    }
}

impl Martingale for OpponentStrategy {
    type Cursor = OpponentCursor;

    fn root(&self) -> OpponentCursor {
        let (capital, stake, path) = match &self.behavior {
            Behavior::Table { entries } => {
                let root = BitString::empty();
                (entries.get(&root).cloned(), Capital::zero(), Some(root))
            }
            Behavior::Escalator { base, .. } => (Some(self.initial_capital.clone()), base.clone(), None),
            _ => (Some(self.initial_capital.clone()), Capital::zero(), None),
        };
        OpponentCursor {
            depth: 0,
            capital,
            ones: 0,
            stake,
            path,
        }
    }

    fn advance(&self, cursor: &OpponentCursor, bit: Bit) -> OpponentCursor {
        let depth = cursor.depth + 1;
        let ones = cursor.ones + u64::from(bit.as_u8());
        if let Behavior::Table { entries } = &self.behavior {
            let path = cursor.path.as_ref().expect("table cursors track their path").child(bit);
            return OpponentCursor {
                depth,
                capital: entries.get(&path).cloned(),
                ones,
                stake: Capital::zero(),
                path: Some(path),
            };
        }
        let wager = self.wager(cursor);
        let capital = match (&cursor.capital, &self.behavior) {
            (None, _) => None,
            (Some(_), Behavior::PartialAfter { depth: limit }) if depth > *limit => None,
            (Some(c), _) => Some(match &wager {
                Some((amount, backed)) if *backed == bit => c + amount,
                Some((amount, _)) => c.checked_sub(amount).expect("wager never exceeds capital"),
                None => c.clone(),
            }),
        };
        let stake = match (&self.behavior, &wager) {
            (Behavior::Escalator { .. }, Some((amount, backed))) if *backed == bit => amount.doubled(),
            (Behavior::Escalator { base, .. }, Some(_)) => base.clone(),
            _ => cursor.stake.clone(),
        };
        OpponentCursor {
            depth,
            capital,
            ones,
            stake,
            path: None,
        }
    }

    /// Evaluating at depth `n` costs `n + 1` steps under a fuel bound.
    fn value(&self, cursor: &OpponentCursor) -> EvalResult {
        if let Flavor::FuelBounded { fuel } = self.flavor {
            if cursor.depth + 1 > fuel {
                return EvalResult::Diverges;
            }
        }
        match &cursor.capital {
            Some(c) => EvalResult::Converges(c.clone()),
            None => EvalResult::Diverges,
        }
    }
}

struct Params<'a> {
    spec: &'a StrategySpec,
    used: Vec<&'static str>,
}

impl<'a> Params<'a> {
    fn new(spec: &'a StrategySpec) -> Self {
        Params { spec, used: Vec::new() }
    }

    fn raw(&mut self, key: &'static str) -> Option<&'a str> {
        self.used.push(key);
        self.spec.params.get(key).map(String::as_str)
    }

    fn required(&mut self, key: &'static str) -> Result<&'a str, SpecError> {
        self.raw(key).ok_or_else(|| SpecError::MissingParam {
            name: self.spec.name.clone(),
            kind: self.spec.kind,
            param: key,
        })
    }

    fn invalid(&self, param: &str, value: &str, expected: &'static str) -> SpecError {
        SpecError::InvalidParam {
            name: self.spec.name.clone(),
            param: param.to_string(),
            value: value.to_string(),
            expected,
        }
    }

    fn capital(&mut self, key: &'static str) -> Result<Capital, SpecError> {
        let value = self.required(key)?;
        parse_capital(&self.spec.name, key, value)
    }

    fn count(&mut self, key: &'static str) -> Result<u64, SpecError> {
        let value = self.required(key)?;
        value
            .parse()
            .map_err(|_| self.invalid(key, value, "a non-negative integer"))
    }

    fn guesser(&mut self, key: &'static str, default: Option<Guesser>) -> Result<Guesser, SpecError> {
        match (self.raw(key), default) {
            (Some(v), _) => v
                .parse()
                .map_err(|_| self.invalid(key, v, "alternating, all_zeros, all_ones or majority_of_history")),
            (None, Some(g)) => Ok(g),
            (None, None) => Err(SpecError::MissingParam {
                name: self.spec.name.clone(),
                kind: self.spec.kind,
                param: key,
            }),
        }
    }

    /// Rejects any parameter not consumed, except bit-string keys for tables.
    fn finish(self, allow_bit_keys: bool) -> Result<(), SpecError> {
        for key in self.spec.params.keys() {
            let is_bits = allow_bit_keys && key.parse::<BitString>().is_ok();
            if !is_bits && !self.used.contains(&key.as_str()) {
                return Err(SpecError::UnknownParam {
                    name: self.spec.name.clone(),
                    kind: self.spec.kind,
                    param: key.clone(),
                });
            }
        }
        Ok(())
    }
}

fn parse_capital(name: &str, key: &str, value: &str) -> Result<Capital, SpecError> {
    if let Some(rest) = value.strip_prefix('-') {
        if !rest.is_empty() && rest.bytes().all(|b| b.is_ascii_digit()) {
            return Err(SpecError::NegativeCapital {
                name: name.to_string(),
                value: value.to_string(),
            });
        }
    }
    if value.is_empty() || !value.bytes().all(|b| b.is_ascii_digit()) {
        return Err(SpecError::InvalidParam {
            name: name.to_string(),
            param: key.to_string(),
            value: value.to_string(),
            expected: "a non-negative decimal integer",
        });
    }
    Ok(value.parse().expect("validated decimal digits"))
}

/// Builds the opponent described by `spec`.
///
/// `run_oracle` is the sequence the construction diagonalizes against; a
/// `copycat` without an explicit `oracle=` parameter is bound to it.
pub fn make_builtin(spec: &StrategySpec, run_oracle: &Oracle) -> Result<OpponentStrategy, SpecError> {
    let mut p = Params::new(spec);
    let flavor = match p.raw("fuel") {
        Some(v) => Flavor::FuelBounded {
            fuel: v.parse().map_err(|_| p.invalid("fuel", v, "a non-negative integer"))?,
        },
        None => Flavor::DeclaredPartial,
    };
    let (initial_capital, behavior) = match spec.kind {
        StrategyKind::ConstantBettor => {
            let stake = p.capital("k")?;
            let guesser = p.guesser("guess", None)?;
            (p.capital("capital")?, Behavior::ConstantBettor { stake, guesser })
        }
        StrategyKind::Saver => (p.capital("c")?, Behavior::Saver),
        StrategyKind::PartialAfter => {
            let depth = p.count("d")?;
            (p.capital("capital")?, Behavior::PartialAfter { depth })
        }
        StrategyKind::Escalator => {
            let base = p.capital("k")?;
            let guesser = p.guesser("guess", Some(Guesser::AllOnes))?;
            (p.capital("capital")?, Behavior::Escalator { base, guesser })
        }
        StrategyKind::Copycat => {
            let oracle = match p.raw("oracle") {
                Some(d) => d.parse().map_err(|_| p.invalid("oracle", d, "an oracle descriptor"))?,
                None => run_oracle.clone(),
            };
            (p.capital("capital")?, Behavior::Copycat { oracle })
        }
        StrategyKind::Table => {
            let root = p.capital("capital")?;
            let mut entries = HashMap::new();
            for (key, value) in &spec.params {
                if let Ok(sigma) = key.parse::<BitString>() {
                    entries.insert(sigma, parse_capital(&spec.name, key, value)?);
                }
            }
            entries.insert(BitString::empty(), root.clone());
            (root, Behavior::Table { entries })
        }
    };
    p.finish(spec.kind == StrategyKind::Table)?;
    Ok(OpponentStrategy {
        name: spec.name.clone(),
        flavor,
        initial_capital,
        behavior,
    })
}

pub fn build_family(specs: &[StrategySpec], run_oracle: &Oracle) -> Result<Vec<OpponentStrategy>, SpecError> {
    specs.iter().map(|s| make_builtin(s, run_oracle)).collect()
}

/// The canonical reproducible family, in priority order.
pub fn default_family_specs() -> Vec<StrategySpec> {
    use StrategyKind::*;
    vec![
        StrategySpec::new(
            "alt1",
            ConstantBettor,
            [("k", "1"), ("guess", "alternating"), ("capital", "10")],
        ),
        StrategySpec::new("esc1", Escalator, [("k", "1"), ("capital", "10")]),
        StrategySpec::new("save5", Saver, [("c", "5")]),
        StrategySpec::new("part3", PartialAfter, [("d", "3"), ("capital", "4")]),
        StrategySpec::new(
            "maj2",
            ConstantBettor,
            [("k", "2"), ("guess", "majority_of_history"), ("capital", "10")],
        ),
    ]
}
