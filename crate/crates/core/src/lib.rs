//! Exact-arithmetic simulation of a diagonalization against integer-valued
//! martingales.
//!
//! Given an oracle sequence `A` and a finite family of opponent strategies,
//! [`construction::build_b`] builds a sequence `B` on which every opponent
//! eventually stops betting, while the single-valued adversary `M` that bets
//! one quantum per bit on `A` keeps gaining. [`verify`] re-checks the
//! finitely checkable claims about the run.
//!
//! All arithmetic is on arbitrary-precision integers; there is no floating
//! point anywhere.

pub mod bits;
pub mod capital;
pub mod construction;
pub mod martingale;
pub mod opponents;
pub mod oracle;
pub mod verify;

pub use bits::{Bit, BitString};
pub use capital::{ext_ratio_cmp, Capital, ExtRatio};
pub use construction::{build_b, AttentionReason, Construction, StageRecord, Trace};
pub use martingale::{adversary_capital, EvalResult, Flavor, Martingale};
pub use opponents::{make_builtin, parse_strategy_spec, OpponentStrategy, StrategySpec};
pub use oracle::{oracle_bit, Oracle};
