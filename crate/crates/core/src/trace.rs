//! Scripted dialogue traces.
//!
//! One directive per line; blank lines and `#` comments are skipped.
//!
//! ```text
//! start happy
//! say V(S:I, O:cake, P:eat) | prospect=prospective agent=other
//! groups 0 0.8 0 0 0 0 0 0 0.2
//! feelings 3.625 0.125 1.375 0.292 0.292 0.583
//! idle
//! ```
//!
//! `feelings` takes six 0-4 grades (happy, angry, surprise, sad, disgust,
//! fear) and applies them as a direct stimulus. Results are written as CSV
//! with the fixed columns of [`CSV_HEADER`].

use std::io::Write;

use serde::Serialize;

use crate::elicitation::{ElicitationContext, GroupVector};
use crate::mstn::MentalState;
use crate::recommend::{groups_from_feelings, FeelingVector6, MAX_GRADE};
use crate::session::{Engine, Session, TurnInput, TurnReport};
use crate::Error;

pub const CSV_HEADER: [&str; 7] = ["turn", "input", "state_before", "state_after", "group", "intensity", "valence"];

#[derive(Debug, Clone, PartialEq)]
pub struct Trace {
    pub start: Option<MentalState>,
    pub steps: Vec<(String, TurnInput)>,
}

fn bad(line: usize, msg: impl Into<String>) -> Error {
    Error::Session(format!("trace line {line}: {}", msg.into()))
}

/// Parses `key=value` pairs into an appraisal context.
pub fn parse_context(text: &str) -> Result<ElicitationContext, String> {
    let mut map = serde_json::Map::new();
    for pair in text.split_whitespace() {
        let (k, v) = pair.split_once('=').ok_or_else(|| format!("expected key=value, got `{pair}`"))?;
        map.insert(k.to_string(), serde_json::Value::String(v.to_string()));
    }
    let ctx: ElicitationContext = serde_json::from_value(serde_json::Value::Object(map)).map_err(|e| e.to_string())?;
    Ok(ctx)
}

fn numbers<const N: usize>(line: usize, text: &str) -> Result<[f64; N], Error> {
    let vals: Vec<f64> = text
        .split_whitespace()
        .map(|t| t.parse::<f64>().map_err(|_| bad(line, format!("not a number: `{t}`"))))
        .collect::<Result<_, _>>()?;
    vals.try_into().map_err(|v: Vec<f64>| bad(line, format!("expected {N} numbers, got {}", v.len())))
}

impl Trace {
    pub fn parse(text: &str) -> Result<Self, Error> {
        let mut trace = Trace { start: None, steps: Vec::new() };
        for (i, raw) in text.lines().enumerate() {
            let n = i + 1;
            let line = raw.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let (cmd, rest) = line.split_once(char::is_whitespace).unwrap_or((line, ""));
            let rest = rest.trim();
            let input = match cmd {
                "start" => {
                    if !trace.steps.is_empty() || trace.start.is_some() {
                        return Err(bad(n, "`start` must come first and only once"));
                    }
                    trace.start = Some(rest.parse::<MentalState>().map_err(|e| bad(n, e.to_string()))?);
                    continue;
                }
                "say" => {
                    let (frame, ctx) = rest.split_once('|').unwrap_or((rest, ""));
                    let context = parse_context(ctx).map_err(|e| bad(n, e))?;
                    TurnInput::Utterance { frame: frame.trim().to_string(), context }
                }
                "groups" => {
                    let g = numbers::<9>(n, rest)?;
                    if g.iter().any(|e| !(0.0..=1.0).contains(e)) {
                        return Err(bad(n, "group strengths must lie in [0, 1]"));
                    }
                    TurnInput::Stimulus { groups: GroupVector(g) }
                }
                "feelings" => {
                    let g = numbers::<6>(n, rest)?;
                    if g.iter().any(|e| !(0.0..=MAX_GRADE).contains(e)) {
                        return Err(bad(n, "grades must lie in [0, 4]"));
                    }
                    TurnInput::Stimulus { groups: groups_from_feelings(&FeelingVector6::from_grades(g)) }
                }
                "idle" if rest.is_empty() => TurnInput::Idle,
                _ => return Err(bad(n, format!("unknown directive `{cmd}`"))),
            };
            trace.steps.push((line.to_string(), input));
        }
        Ok(trace)
    }

    /// Runs the trace in a fresh session.
    pub fn run(&self, engine: &Engine, session_id: &str, persona: Option<String>) -> Result<(Session, Vec<TurnReport>), Error> {
        let mut s = engine.new_session(session_id, persona);
        if let Some(st) = self.start {
            s.set_initial_state(st)?;
        }
        let mut reports = Vec::with_capacity(self.steps.len());
        for (i, (_, input)) in self.steps.iter().enumerate() {
            let r = s.post(engine, input).map_err(|e| Error::Replay { turn: i + 1, msg: e.to_string() })?;
            reports.push(r);
        }
        Ok((s, reports))
    }
}

#[derive(Serialize)]
struct Row<'a> {
    turn: usize,
    input: &'a str,
    state_before: &'a str,
    state_after: &'a str,
    group: String,
    intensity: String,
    valence: String,
}

/// Writes one CSV row per turn.
pub fn write_csv<W: Write>(out: W, trace: &Trace, reports: &[TurnReport]) -> Result<(), Error> {
    let mut w = csv::Writer::from_writer(out);
    for ((line, _), r) in trace.steps.iter().zip(reports) {
        let row = Row {
            turn: r.turn,
            input: line,
            state_before: r.previous_state.as_str(),
            state_after: r.new_state.as_str(),
            group: r.chosen_group.map(|g| g.to_string()).unwrap_or_default(),
            intensity: r.egc.as_ref().map(|e| format!("{:.6}", e.intensity)).unwrap_or_default(),
            valence: r.egc.as_ref().map(|e| e.valence.to_string()).unwrap_or_default(),
        };
        w.serialize(row).map_err(|e| Error::Session(e.to_string()))?;
    }
    if reports.is_empty() {
        w.write_record(CSV_HEADER).map_err(|e| Error::Session(e.to_string()))?;
    }
    w.flush()?;
    Ok(())
}
