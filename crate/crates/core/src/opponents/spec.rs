//! Line-oriented strategy spec files.
//!
//! ```text
//! # name  kind             params
//! a       constant_bettor  k=1 guess=alternating capital=10
//! b       partial_after    d=3 capital=4
//! s1      saver            c=5
//! ```
//!
//! Blank lines and `#` comments are ignored. An opponent's index is its
//! position among the non-comment lines, which is also its priority.

use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;

use super::SpecError;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum StrategyKind {
    ConstantBettor,
    Saver,
    PartialAfter,
    Escalator,
    Copycat,
    Table,
}

impl StrategyKind {
    pub const ALL: [StrategyKind; 6] = [
        StrategyKind::ConstantBettor,
        StrategyKind::Saver,
        StrategyKind::PartialAfter,
        StrategyKind::Escalator,
        StrategyKind::Copycat,
        StrategyKind::Table,
    ];

    pub fn name(self) -> &'static str {
        match self {
            StrategyKind::ConstantBettor => "constant_bettor",
            StrategyKind::Saver => "saver",
            StrategyKind::PartialAfter => "partial_after",
            StrategyKind::Escalator => "escalator",
            StrategyKind::Copycat => "copycat",
            StrategyKind::Table => "table",
        }
    }
}

impl FromStr for StrategyKind {
    type Err = ();

    fn from_str(s: &str) -> Result<Self, ()> {
        StrategyKind::ALL.into_iter().find(|k| k.name() == s).ok_or(())
    }
}

impl fmt::Display for StrategyKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// One declared opponent. Parameter values stay textual here; they are typed
/// and validated by [`make_builtin`](super::make_builtin).
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct StrategySpec {
    pub name: String,
    pub kind: StrategyKind,
    pub params: BTreeMap<String, String>,
}

impl StrategySpec {
    pub fn new<I, K, V>(name: &str, kind: StrategyKind, params: I) -> Self
    where
        I: IntoIterator<Item = (K, V)>,
        K: Into<String>,
        V: Into<String>,
    {
        StrategySpec {
            name: name.to_string(),
            kind,
            params: params.into_iter().map(|(k, v)| (k.into(), v.into())).collect(),
        }
    }
}

impl fmt::Display for StrategySpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} {}", self.name, self.kind)?;
        for (k, v) in &self.params {
            write!(f, " {k}={v}")?;
        }
        Ok(())
    }
}

pub fn parse_strategy_spec(text: &str) -> Result<Vec<StrategySpec>, SpecError> {
    let mut specs: Vec<StrategySpec> = Vec::new();
    for (i, raw) in text.lines().enumerate() {
        let line = i + 1;
        let content = raw.split('#').next().unwrap_or("").trim();
        if content.is_empty() {
            continue;
        }
        let mut words = content.split_whitespace();
        let name = words.next().expect("non-empty line has a first word");
        let Some(kind_word) = words.next() else {
            return Err(SpecError::Syntax {
                line,
                message: format!("expected `name kind key=value...`, got {content:?}"),
            });
        };
        let kind = kind_word.parse().map_err(|_| SpecError::UnknownKind {
            line,
            kind: kind_word.to_string(),
        })?;
        let mut params = BTreeMap::new();
        for word in words {
            let Some((key, value)) = word.split_once('=') else {
                return Err(SpecError::Syntax {
                    line,
                    message: format!("expected key=value, got {word:?}"),
                });
            };
            if key.is_empty() || value.is_empty() {
                return Err(SpecError::Syntax {
                    line,
                    message: format!("empty key or value in {word:?}"),
                });
            }
            if params.insert(key.to_string(), value.to_string()).is_some() {
                return Err(SpecError::Syntax {
                    line,
                    message: format!("parameter {key:?} given twice"),
                });
            }
        }
        if specs.iter().any(|s| s.name == name) {
            return Err(SpecError::DuplicateName {
                line,
                name: name.to_string(),
            });
        }
        specs.push(StrategySpec {
            name: name.to_string(),
            kind,
            params,
        });
    }
    Ok(specs)
}

pub fn serialize_strategy_specs(specs: &[StrategySpec]) -> String {
    specs.iter().map(|s| format!("{s}\n")).collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn single_saver_line() {
        let specs = parse_strategy_spec("s1 saver c=5").unwrap();
        assert_eq!(specs, vec![StrategySpec::new("s1", StrategyKind::Saver, [("c", "5")])]);
    }

    #[test]
    fn file_order_is_index_order() {
        let text = "a constant_bettor k=1 guess=alternating capital=10\nb partial_after d=3 capital=4";
        let specs = parse_strategy_spec(text).unwrap();
        assert_eq!(specs.len(), 2);
        assert_eq!(specs[0].name, "a");
        assert_eq!(specs[0].kind, StrategyKind::ConstantBettor);
        assert_eq!(specs[0].params["guess"], "alternating");
        assert_eq!(specs[1].name, "b");
        assert_eq!(specs[1].params["d"], "3");
    }

    #[test]
    fn unknown_kind_reports_line() {
        let err = parse_strategy_spec("x frobnicate z=1").unwrap_err();
        assert_eq!(
            err,
            SpecError::UnknownKind {
                line: 1,
                kind: "frobnicate".into()
            }
        );
    }

    #[test]
    fn comments_and_blank_lines_are_skipped() {
        let text = "# family\n\n  s saver c=1  # trailing\n\n# end\nt saver c=2\n";
        let specs = parse_strategy_spec(text).unwrap();
        assert_eq!(specs.iter().map(|s| s.name.as_str()).collect::<Vec<_>>(), ["s", "t"]);
    }

    #[test]
    fn syntax_errors_carry_line_numbers() {
        assert!(matches!(
            parse_strategy_spec("a saver c=1\n\nlonely"),
            Err(SpecError::Syntax { line: 3, .. })
        ));
        assert!(matches!(
            parse_strategy_spec("a saver c5"),
            Err(SpecError::Syntax { line: 1, .. })
        ));
        assert!(matches!(
            parse_strategy_spec("a saver c=1 c=2"),
            Err(SpecError::Syntax { line: 1, .. })
        ));
    }

    #[test]
    fn duplicate_names_are_rejected() {
        assert_eq!(
            parse_strategy_spec("a saver c=1\na saver c=2").unwrap_err(),
            SpecError::DuplicateName {
                line: 2,
                name: "a".into()
            }
        );
    }

    fn arb_spec() -> impl Strategy<Value = StrategySpec> {
        let kind = proptest::sample::select(StrategyKind::ALL.to_vec());
        let params = proptest::collection::btree_map("[a-z][a-z0-9_]{0,6}", "[a-z0-9:]{1,8}", 0..4);
        ("[a-zA-Z][a-zA-Z0-9_]{0,8}", kind, params).prop_map(|(name, kind, params)| StrategySpec { name, kind, params })
    }

    proptest! {
        #[test]
        fn parse_inverts_serialize(specs in proptest::collection::vec(arb_spec(), 0..6)) {
            let mut seen = std::collections::HashSet::new();
            let specs: Vec<_> = specs.into_iter().filter(|s| seen.insert(s.name.clone())).collect();
            let text = serialize_strategy_specs(&specs);
            prop_assert_eq!(parse_strategy_spec(&text).unwrap(), specs);
        }
    }
}
