//! CSV and text outputs. Every file starts with a `# format: v1` line.

use std::io::Write;

use crate::automaton::{Alphabet, Automaton};
use crate::coverage::CoverageReport;
use crate::error::Result;
use crate::format::FORMAT_HEADER;
use crate::language::Language;
use crate::learner::{EpisodeTrace, QTable};

fn labels(alphabet: &Alphabet, actions: impl IntoIterator<Item = crate::ActionId>) -> String {
    actions
        .into_iter()
        .map(|a| alphabet.label(a))
        .collect::<Vec<_>>()
        .join(" ")
}

/// `state,missing_actions` per non-goal state, then `# verdict: ...`.
pub fn write_coverage_csv<W: Write>(report: &CoverageReport, mut out: W) -> Result<()> {
    writeln!(out, "{FORMAT_HEADER}")?;
    {
        let mut w = csv::Writer::from_writer(&mut out);
        w.write_record(["state", "missing_actions"])?;
        for sc in &report.states {
            let missing = report.missing(sc.state).unwrap_or_default();
            w.write_record([sc.state.to_string(), labels(&report.alphabet, missing)])?;
        }
        w.flush()?;
    }
    writeln!(out, "# verdict: {}", report.verdict)?;
    Ok(())
}

/// `state,action,q_value,visit_count` for every pair.
pub fn write_q_csv<W: Write>(q: &QTable, alphabet: &Alphabet, mut out: W) -> Result<()> {
    writeln!(out, "{FORMAT_HEADER}")?;
    let mut w = csv::Writer::from_writer(out);
    w.write_record(["state", "action", "q_value", "visit_count"])?;
    for s in (0..q.state_count()).map(crate::StateId) {
        for a in alphabet.ids() {
            w.write_record([
                s.to_string(),
                alphabet.label(a).to_string(),
                q.get(s, a).to_string(),
                q.visits(s, a).to_string(),
            ])?;
        }
    }
    w.flush()?;
    Ok(())
}

/// `episode,return,steps,termination`.
pub fn write_returns_csv<W: Write>(traces: &[EpisodeTrace], gamma: f64, mut out: W) -> Result<()> {
    writeln!(out, "{FORMAT_HEADER}")?;
    let mut w = csv::Writer::from_writer(out);
    w.write_record(["episode", "return", "steps", "termination"])?;
    for t in traces {
        w.write_record([
            t.index.to_string(),
            t.discounted_return(gamma).to_string(),
            t.steps.len().to_string(),
            t.termination.to_string(),
        ])?;
    }
    w.flush()?;
    Ok(())
}

/// One line of action labels per episode.
pub fn write_trace_log<W: Write>(traces: &[EpisodeTrace], alphabet: &Alphabet, mut out: W) -> Result<()> {
    writeln!(out, "{FORMAT_HEADER}")?;
    for t in traces {
        writeln!(out, "{}", labels(alphabet, t.actions()))?;
    }
    Ok(())
}

/// Reads a trace log back into action strings.
pub fn read_trace_log(text: &str, alphabet: &Alphabet) -> Result<Vec<crate::ActionString>> {
    text.lines()
        .enumerate()
        .filter(|(_, l)| !l.starts_with('#'))
        .map(|(i, l)| {
            alphabet
                .parse_string(l)
                .map_err(|e| crate::Error::Parse {
                    line: i + 1,
                    message: e.to_string(),
                })
        })
        .collect()
}

/// `string,marked`, strings as space-separated labels (`λ` for the empty
/// string), in length-then-lexicographic order.
pub fn write_language_csv<W: Write>(lang: &Language, aut: &Automaton, mut out: W) -> Result<()> {
    writeln!(out, "{FORMAT_HEADER}")?;
    let mut strings: Vec<_> = lang.generated.iter().collect();
    strings.sort_by(|a, b| a.len().cmp(&b.len()).then_with(|| a.cmp(b)));
    let mut w = csv::Writer::from_writer(out);
    w.write_record(["string", "marked"])?;
    for l in strings {
        w.write_record([
            aut.alphabet().format_string(l),
            lang.marked.contains(l).to_string(),
        ])?;
    }
    w.flush()?;
    Ok(())
}
