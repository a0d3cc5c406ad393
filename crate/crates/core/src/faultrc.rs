//! The `.faultrc` fault-injection script.
//!
//! ```text
//! INJECT CRASH ON COMPONENT 1
//!        AFTER 5000000 TICKS
//! INJECT SLOWDOWN ON COMPONENT 2 AFTER 1000000 TICKS FOR 2000000 TICKS FACTOR 10
//! INJECT REBOOT ON NODE 0 AFTER 10000000 TICKS.
//! ```
//!
//! A statement runs from `INJECT` to its closing `TICKS` (or `FACTOR <f>`
//! for slowdowns) and may span lines. Keywords are case-insensitive, `#`
//! starts a comment and a statement may end with a period. `COMPONENT k`
//! is task D of node k, `ICOMPONENT k` is task I of node k.

use std::fmt;

use thiserror::Error;

use crate::types::{NodeId, TaskKind, Tick};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum FaultKind {
    /// One task stops for good; the rest of the node keeps running.
    CrashComponent { task: TaskKind },
    /// Every task of the node stops. It comes back only if the
    /// configuration sets a reboot delay.
    CrashNode,
    /// Crash the node and bring it back after the reboot delay.
    RebootNode,
    /// Messages sent by the node's task D take `factor` times as long for
    /// `duration` ticks.
    Slowdown { duration: Tick, factor: u32 },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct FaultSpec {
    pub kind: FaultKind,
    pub target: NodeId,
    /// Injection tick, counted from the start of the run.
    pub at: Tick,
}

impl FaultSpec {
    pub fn crash_component(target: u32, at: Tick) -> Self {
        FaultSpec { kind: FaultKind::CrashComponent { task: TaskKind::D }, target: NodeId(target), at }
    }

    pub fn crash_node(target: u32, at: Tick) -> Self {
        FaultSpec { kind: FaultKind::CrashNode, target: NodeId(target), at }
    }

    pub fn reboot_node(target: u32, at: Tick) -> Self {
        FaultSpec { kind: FaultKind::RebootNode, target: NodeId(target), at }
    }

    pub fn slowdown(target: u32, at: Tick, duration: Tick, factor: u32) -> Self {
        FaultSpec { kind: FaultKind::Slowdown { duration, factor }, target: NodeId(target), at }
    }
}

impl fmt::Display for FaultSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let (kind, target) = match self.kind {
            FaultKind::CrashComponent { task: TaskKind::D } => ("CRASH", "COMPONENT"),
            FaultKind::CrashComponent { task: TaskKind::I } => ("CRASH", "ICOMPONENT"),
            FaultKind::CrashNode => ("CRASH", "NODE"),
            FaultKind::RebootNode => ("REBOOT", "NODE"),
            FaultKind::Slowdown { .. } => ("SLOWDOWN", "COMPONENT"),
        };
        write!(f, "INJECT {kind} ON {target} {} AFTER {} TICKS", self.target, self.at)?;
        if let FaultKind::Slowdown { duration, factor } = self.kind {
            write!(f, " FOR {duration} TICKS FACTOR {factor}")?;
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum FaultrcError {
    #[error("line {line}: expected {expected}, found `{found}`")]
    Syntax { line: usize, expected: &'static str, found: String },
    #[error("line {line}: statement incomplete, expected {expected}")]
    UnexpectedEnd { line: usize, expected: &'static str },
    #[error("line {line}: `{value}` is not a valid {what}")]
    Number { line: usize, what: &'static str, value: String },
    #[error("line {line}: {kind} cannot target {target}")]
    Unsupported { line: usize, kind: &'static str, target: &'static str },
}

struct Token<'a> {
    text: &'a str,
    line: usize,
}

fn tokenize(text: &str) -> Vec<Token<'_>> {
    let mut tokens = Vec::new();
    for (idx, raw) in text.lines().enumerate() {
        let code = raw.split('#').next().unwrap_or("");
        for word in code.split_whitespace() {
            // A trailing period closes a statement; it carries no meaning.
            let word = word.strip_suffix('.').unwrap_or(word);
            if !word.is_empty() {
                tokens.push(Token { text: word, line: idx + 1 });
            }
        }
    }
    tokens
}

struct Parser<'a> {
    tokens: Vec<Token<'a>>,
    pos: usize,
    last_line: usize,
}

impl<'a> Parser<'a> {
    fn peek(&self) -> Option<&Token<'a>> {
        self.tokens.get(self.pos)
    }

    fn next(&mut self, expected: &'static str) -> Result<&Token<'a>, FaultrcError> {
        let line = self.last_line;
        let tok = self.tokens.get(self.pos).ok_or(FaultrcError::UnexpectedEnd { line, expected })?;
        self.pos += 1;
        self.last_line = tok.line;
        Ok(tok)
    }

    fn keyword(&mut self, word: &'static str) -> Result<usize, FaultrcError> {
        let tok = self.next(word)?;
        if tok.text.eq_ignore_ascii_case(word) {
            Ok(tok.line)
        } else {
            Err(FaultrcError::Syntax { line: tok.line, expected: word, found: tok.text.to_string() })
        }
    }

    fn one_of(
        &mut self,
        words: &[&'static str],
        expected: &'static str,
    ) -> Result<(&'static str, usize), FaultrcError> {
        let tok = self.next(expected)?;
        words
            .iter()
            .find(|w| tok.text.eq_ignore_ascii_case(w))
            .map(|w| (*w, tok.line))
            .ok_or_else(|| FaultrcError::Syntax { line: tok.line, expected, found: tok.text.to_string() })
    }

    fn number<T: std::str::FromStr>(&mut self, what: &'static str) -> Result<(T, usize), FaultrcError> {
        let tok = self.next(what)?;
        tok.text.parse().map(|v| (v, tok.line)).map_err(|_| FaultrcError::Number {
            line: tok.line,
            what,
            value: tok.text.to_string(),
        })
    }

    fn statement(&mut self) -> Result<FaultSpec, FaultrcError> {
        let start = self.keyword("INJECT")?;
        let (kind, _) = self.one_of(&["CRASH", "REBOOT", "SLOWDOWN"], "CRASH, REBOOT or SLOWDOWN")?;
        self.keyword("ON")?;
        let (target, target_line) =
            self.one_of(&["COMPONENT", "ICOMPONENT", "NODE"], "COMPONENT, ICOMPONENT or NODE")?;
        let (id, _) = self.number::<u32>("node id")?;
        self.keyword("AFTER")?;
        let (at, at_line) = self.number::<Tick>("tick count")?;
        if at == 0 {
            return Err(FaultrcError::Number {
                line: at_line,
                what: "injection tick (must be > 0)",
                value: "0".into(),
            });
        }
        self.keyword("TICKS")?;
        let unsupported = |kind| Err(FaultrcError::Unsupported { line: target_line.max(start), kind, target });
        let fault_kind = match (kind, target) {
            ("CRASH", "COMPONENT") => FaultKind::CrashComponent { task: TaskKind::D },
            ("CRASH", "ICOMPONENT") => FaultKind::CrashComponent { task: TaskKind::I },
            ("CRASH", _) => FaultKind::CrashNode,
            ("REBOOT", "NODE") => FaultKind::RebootNode,
            ("REBOOT", _) => return unsupported("REBOOT"),
            ("SLOWDOWN", "COMPONENT") => {
                self.keyword("FOR")?;
                let (duration, line) = self.number::<Tick>("duration")?;
                if duration == 0 {
                    return Err(FaultrcError::Number { line, what: "duration (must be > 0)", value: "0".into() });
                }
                self.keyword("TICKS")?;
                self.keyword("FACTOR")?;
                let (factor, line) = self.number::<u32>("slowdown factor")?;
                if factor == 0 {
                    return Err(FaultrcError::Number {
                        line,
                        what: "slowdown factor (must be >= 1)",
                        value: "0".into(),
                    });
                }
                FaultKind::Slowdown { duration, factor }
            }
            ("SLOWDOWN", _) => return unsupported("SLOWDOWN"),
            _ => unreachable!("keywords restricted above"),
        };
        Ok(FaultSpec { kind: fault_kind, target: NodeId(id), at })
    }
}

/// Parses a script into fault specs, in source order.
pub fn parse_faultrc(text: &str) -> Result<Vec<FaultSpec>, FaultrcError> {
    let mut parser = Parser { tokens: tokenize(text), pos: 0, last_line: 1 };
    let mut out = Vec::new();
    while parser.peek().is_some() {
        out.push(parser.statement()?);
    }
    Ok(out)
}

/// One statement per line, upper-case keywords.
pub fn render_faultrc(faults: &[FaultSpec]) -> String {
    faults.iter().map(|f| format!("{f}\n")).collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn two_statement_listing() {
        let text = "INJECT CRASH ON COMPONENT 1\n      AFTER 5000000 TICKS\nINJECT CRASH ON NODE 0\n      AFTER 10000000 TICKS.\n";
        assert_eq!(
            parse_faultrc(text).unwrap(),
            vec![FaultSpec::crash_component(1, 5_000_000), FaultSpec::crash_node(0, 10_000_000)]
        );
    }

    #[test]
    fn empty_and_comments() {
        assert_eq!(parse_faultrc("").unwrap(), vec![]);
        assert_eq!(parse_faultrc("# nothing\n\n   # at all\n").unwrap(), vec![]);
    }

    #[test]
    fn slowdown_round_trip() {
        let text = "INJECT SLOWDOWN ON COMPONENT 2 AFTER 1000000 TICKS FOR 2000000 TICKS FACTOR 10";
        let parsed = parse_faultrc(text).unwrap();
        assert_eq!(parsed, vec![FaultSpec::slowdown(2, 1_000_000, 2_000_000, 10)]);
        assert_eq!(render_faultrc(&parsed), format!("{text}\n"));
    }

    #[test]
    fn keywords_ignore_case() {
        let parsed =
            parse_faultrc("inject Reboot on node 3 after 7 ticks # later\ninject crash on icomponent 2 after 9 ticks")
                .unwrap();
        assert_eq!(parsed[0], FaultSpec::reboot_node(3, 7));
        assert_eq!(parsed[1].kind, FaultKind::CrashComponent { task: TaskKind::I });
    }

    #[test]
    fn errors_carry_line_numbers() {
        let err = parse_faultrc("INJECT CRASH ON NODE 0 AFTER 5 TICKS\n\nINJECT CRASH ON NODE 1\n").unwrap_err();
        assert_eq!(err, FaultrcError::UnexpectedEnd { line: 3, expected: "AFTER" });

        let err = parse_faultrc("INJECT CRASH ON NODE 0\nBEFORE 5 TICKS").unwrap_err();
        assert!(matches!(err, FaultrcError::Syntax { line: 2, expected: "AFTER", .. }), "{err}");

        let err = parse_faultrc("INJECT SLOWDOWN ON NODE 2 AFTER 1 TICKS FOR 1 TICKS FACTOR 2").unwrap_err();
        assert!(matches!(err, FaultrcError::Unsupported { kind: "SLOWDOWN", target: "NODE", .. }));

        let err = parse_faultrc("INJECT REBOOT ON COMPONENT 2 AFTER 1 TICKS").unwrap_err();
        assert!(matches!(err, FaultrcError::Unsupported { kind: "REBOOT", .. }));

        let err = parse_faultrc("INJECT CRASH ON NODE 0 AFTER -5 TICKS").unwrap_err();
        assert!(matches!(err, FaultrcError::Number { line: 1, .. }));

        let err = parse_faultrc("INJECT CRASH ON NODE 0 AFTER 0 TICKS").unwrap_err();
        assert!(matches!(err, FaultrcError::Number { .. }));
    }

    fn arb_fault() -> impl Strategy<Value = FaultSpec> {
        let kind = prop_oneof![
            Just(FaultKind::CrashComponent { task: TaskKind::D }),
            Just(FaultKind::CrashComponent { task: TaskKind::I }),
            Just(FaultKind::CrashNode),
            Just(FaultKind::RebootNode),
            (1u64..1_000_000_000, 1u32..1000).prop_map(|(duration, factor)| FaultKind::Slowdown { duration, factor }),
        ];
        (kind, 0u32..64, 1u64..u64::MAX).prop_map(|(kind, target, at)| FaultSpec { kind, target: NodeId(target), at })
    }

    proptest! {
        #[test]
        fn render_then_parse_is_identity(faults in proptest::collection::vec(arb_fault(), 0..8)) {
            let text = render_faultrc(&faults);
            let parsed = parse_faultrc(&text).unwrap();
            prop_assert_eq!(&parsed, &faults);
            prop_assert_eq!(render_faultrc(&parsed), text);
        }
    }
}
