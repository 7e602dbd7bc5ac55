//! Line-oriented `.aut` automaton files.
//!
//! ```text
//! # format: v1
//! alphabet: a1 a2 a3 a4
//! states: 16
//! initial: 0
//! marked: 15
//! trans: 0 a2 1
//! ```
//!
//! `#` starts a comment. Keys other than the five above, repeated headers,
//! duplicate transitions and out-of-range indices are errors carrying the
//! 1-based line number.

use std::fmt::Write as _;

use crate::automaton::{Alphabet, Automaton, StateId};
use crate::error::{Error, Result};

pub const FORMAT_HEADER: &str = "# format: v1";

/// One `key: args...` line.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Directive<'a> {
    pub line: usize,
    pub key: &'a str,
    pub args: Vec<&'a str>,
}

/// Splits `text` into directives, dropping comments and blank lines.
pub fn directives(text: &str) -> Result<Vec<Directive<'_>>> {
    let mut out = Vec::new();
    for (i, raw) in text.lines().enumerate() {
        let line = i + 1;
        let body = raw.split('#').next().unwrap_or("").trim();
        if body.is_empty() {
            continue;
        }
        let Some((key, rest)) = body.split_once(':') else {
            return Err(Error::parse(line, format!("expected `key: value`, found `{body}`")));
        };
        out.push(Directive {
            line,
            key: key.trim(),
            args: rest.split_whitespace().collect(),
        });
    }
    Ok(out)
}

pub(crate) fn parse_index(line: usize, what: &str, tok: &str) -> Result<usize> {
    tok.parse::<usize>()
        .map_err(|_| Error::parse(line, format!("{what}: `{tok}` is not a non-negative integer")))
}

fn single<'a>(d: &Directive<'a>) -> Result<&'a str> {
    match d.args.as_slice() {
        [one] => Ok(one),
        _ => Err(Error::parse(
            d.line,
            format!("`{}` takes exactly one value", d.key),
        )),
    }
}

fn set_once<T>(slot: &mut Option<T>, value: T, d: &Directive<'_>) -> Result<()> {
    if slot.is_some() {
        return Err(Error::parse(d.line, format!("duplicate `{}` line", d.key)));
    }
    *slot = Some(value);
    Ok(())
}

/// Parses an `.aut` document.
pub fn parse_aut(text: &str) -> Result<Automaton> {
    let dirs = directives(text)?;
    let mut alphabet = None;
    let mut states = None;
    let mut initial = None;
    let mut marked: Option<Vec<(usize, usize)>> = None;
    let mut trans = Vec::new();
    for d in &dirs {
        match d.key {
            "alphabet" => {
                let a = Alphabet::new(d.args.iter().copied())
                    .map_err(|e| Error::parse(d.line, e.to_string()))?;
                set_once(&mut alphabet, a, d)?;
            }
            "states" => set_once(&mut states, parse_index(d.line, "states", single(d)?)?, d)?,
            "initial" => {
                set_once(&mut initial, (d.line, parse_index(d.line, "initial", single(d)?)?), d)?
            }
            "marked" => {
                let ms = d
                    .args
                    .iter()
                    .map(|t| parse_index(d.line, "marked", t).map(|s| (d.line, s)))
                    .collect::<Result<Vec<_>>>()?;
                set_once(&mut marked, ms, d)?;
            }
            "trans" => trans.push(d),
            other => return Err(Error::parse(d.line, format!("unknown key `{other}`"))),
        }
    }
    let last = dirs.last().map_or(1, |d| d.line);
    let alphabet = alphabet.ok_or_else(|| Error::parse(last, "missing `alphabet` line"))?;
    let states = states.ok_or_else(|| Error::parse(last, "missing `states` line"))?;
    let in_range = |line: usize, s: usize| -> Result<StateId> {
        if s >= states {
            return Err(Error::parse(
                line,
                format!("state {s} out of range (states: {states})"),
            ));
        }
        Ok(StateId(s))
    };

    let mut b = Automaton::builder(alphabet.clone(), states)
        .map_err(|e| Error::parse(last, e.to_string()))?;
    let (line, init) = initial.ok_or_else(|| Error::parse(last, "missing `initial` line"))?;
    b.initial(in_range(line, init)?)?;
    for (line, s) in marked.unwrap_or_default() {
        b.mark(in_range(line, s)?)?;
    }
    for d in trans {
        let [from, label, to] = d.args.as_slice() else {
            return Err(Error::parse(d.line, "`trans` takes `<from> <action> <to>`"));
        };
        let from = in_range(d.line, parse_index(d.line, "trans", from)?)?;
        let to = in_range(d.line, parse_index(d.line, "trans", to)?)?;
        let a = alphabet
            .id(label)
            .map_err(|e| Error::parse(d.line, e.to_string()))?;
        b.transition(from, a, to)
            .map_err(|e| Error::parse(d.line, e.to_string()))?;
    }
    Ok(b.build())
}

/// Renders `aut` as an `.aut` document. Product origin tags are written as
/// comments.
pub fn write_aut(aut: &Automaton) -> String {
    let mut out = String::new();
    let _ = writeln!(out, "{FORMAT_HEADER}");
    let _ = writeln!(out, "alphabet: {}", aut.alphabet().labels().join(" "));
    let _ = writeln!(out, "states: {}", aut.state_count());
    let _ = writeln!(out, "initial: {}", aut.initial());
    let marked: Vec<String> = aut.marked_states().iter().map(|s| s.to_string()).collect();
    let _ = writeln!(out, "marked: {}", marked.join(" "));
    if aut.has_origins() {
        for s in aut.states() {
            let (x, y) = aut.origin(s).expect("tagged");
            let _ = writeln!(out, "# origin {s} = ({x},{y})");
        }
    }
    for (s, a, t) in aut.transitions() {
        let _ = writeln!(out, "trans: {s} {} {t}", aut.alphabet().label(a));
    }
    out
}
