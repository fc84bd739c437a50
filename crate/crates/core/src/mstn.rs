//! Mental state transition network.
//!
//! Seven discrete mental states connected by learnable transition costs.
//! Costs are derived from transition counts,
//! `cost(i, j) = 1 - #(i -> j) / sum_j #(i -> j)`, so frequent transitions are
//! cheap. A stimulus (a [`GroupVector`]) selects the group `k` maximising
//! `e_k / cost(current, target(k))` and moves to that group's target state.
//! Without stimulus the state drifts along the seeded transition frequencies.

use std::fmt;
use std::str::FromStr;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::elicitation::GroupVector;

/// Pseudo-observations per table row when seeding counts.
pub const SEED_PSEUDO_COUNTS: f64 = 1000.0;
/// Allowed departure of a printed row sum from 1.0.
pub const ROW_SUM_TOLERANCE: f64 = 0.01;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum MstnError {
    #[error("row {row} sums to {sum}, more than {ROW_SUM_TOLERANCE} away from 1.0")]
    RowSum { row: MentalState, sum: f64 },
    #[error("entry ({row}, {col}) = {value} outside [0, 1]")]
    Entry { row: MentalState, col: MentalState, value: f64 },
    #[error("line {line}: {msg}")]
    Format { line: usize, msg: String },
    #[error("no emotion group is active")]
    NoStimulus,
    #[error("unknown mental state `{0}`")]
    UnknownState(String),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum MentalState {
    Happy,
    Quiet,
    Sad,
    Surprise,
    Angry,
    Fear,
    Disgust,
}

impl MentalState {
    /// Table order: happy, quiet, sad, surprise, angry, fear, disgust.
    pub const ALL: [MentalState; 7] = [
        MentalState::Happy,
        MentalState::Quiet,
        MentalState::Sad,
        MentalState::Surprise,
        MentalState::Angry,
        MentalState::Fear,
        MentalState::Disgust,
    ];

    pub fn index(self) -> usize {
        self as usize
    }

    pub fn from_index(i: usize) -> MentalState {
        Self::ALL[i]
    }

    pub fn as_str(self) -> &'static str {
        match self {
            MentalState::Happy => "happy",
            MentalState::Quiet => "quiet",
            MentalState::Sad => "sad",
            MentalState::Surprise => "surprise",
            MentalState::Angry => "angry",
            MentalState::Fear => "fear",
            MentalState::Disgust => "disgust",
        }
    }
}

impl fmt::Display for MentalState {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for MentalState {
    type Err = MstnError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let s = s.trim();
        Self::ALL
            .into_iter()
            .find(|m| m.as_str().eq_ignore_ascii_case(s))
            .ok_or_else(|| MstnError::UnknownState(s.to_string()))
    }
}

/// Transition relative frequencies as read from the asset file, along with
/// the literal text of each cell.
#[derive(Debug, Clone, PartialEq)]
pub struct TransitionTable {
    pub values: [[f64; 7]; 7],
    pub raw: [[String; 7]; 7],
}

impl TransitionTable {
    /// Parses the header-labelled 7x7 table. Rows and columns may come in
    /// any order; they are stored in [`MentalState::ALL`] order.
    pub fn parse(text: &str) -> Result<Self, MstnError> {
        let mut lines = text
            .lines()
            .enumerate()
            .map(|(i, l)| (i + 1, l.trim()))
            .filter(|(_, l)| !l.is_empty() && !l.starts_with('#'));

        let (hline, header) = lines.next().ok_or(MstnError::Format { line: 0, msg: "empty table".into() })?;
        let cols: Vec<&str> = header.split_whitespace().skip(1).collect();
        if cols.len() != 7 {
            return Err(MstnError::Format { line: hline, msg: format!("expected 7 column labels, found {}", cols.len()) });
        }
        let col_states = parse_labels(&cols, hline)?;

        let mut values = [[f64::NAN; 7]; 7];
        let mut raw: [[String; 7]; 7] = Default::default();
        let mut seen = [false; 7];
        for (line, l) in lines {
            let fields: Vec<&str> = l.split_whitespace().collect();
            if fields.len() != 8 {
                return Err(MstnError::Format { line, msg: format!("expected label and 7 values, found {} fields", fields.len()) });
            }
            let row: MentalState = fields[0].parse().map_err(|e: MstnError| MstnError::Format { line, msg: e.to_string() })?;
            if std::mem::replace(&mut seen[row.index()], true) {
                return Err(MstnError::Format { line, msg: format!("row `{row}` repeated") });
            }
            for (c, cell) in fields[1..].iter().enumerate() {
                let v: f64 = cell
                    .parse()
                    .map_err(|_| MstnError::Format { line, msg: format!("invalid number `{cell}`") })?;
                let col = col_states[c];
                values[row.index()][col.index()] = v;
                raw[row.index()][col.index()] = cell.to_string();
            }
        }
        if let Some(missing) = seen.iter().position(|s| !s) {
            return Err(MstnError::Format {
                line: 0,
                msg: format!("row `{}` missing", MentalState::from_index(missing)),
            });
        }
        Ok(Self { values, raw })
    }

    pub fn row_sum(&self, row: MentalState) -> f64 {
        self.values[row.index()].iter().sum()
    }

    /// Rows whose sum departs from 1.0 by more than the tolerance.
    pub fn drifting_rows(&self) -> Vec<(MentalState, f64)> {
        MentalState::ALL
            .into_iter()
            .map(|s| (s, self.row_sum(s)))
            .filter(|(_, sum)| (sum - 1.0).abs() > ROW_SUM_TOLERANCE)
            .collect()
    }
}

fn parse_labels(labels: &[&str], line: usize) -> Result<[MentalState; 7], MstnError> {
    let mut out = [MentalState::Quiet; 7];
    let mut seen = [false; 7];
    for (i, l) in labels.iter().enumerate() {
        let s: MentalState = l.parse().map_err(|e: MstnError| MstnError::Format { line, msg: e.to_string() })?;
        if std::mem::replace(&mut seen[s.index()], true) {
            return Err(MstnError::Format { line, msg: format!("column `{s}` repeated") });
        }
        out[i] = s;
    }
    Ok(out)
}

/// Transition counts; costs and probabilities are derived from them.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TransitionModel {
    counts: [[f64; 7]; 7],
}

impl TransitionModel {
    /// Builds counts from a table of relative frequencies.
    ///
    /// Each row becomes [`SEED_PSEUDO_COUNTS`] pseudo-observations. The
    /// printed rows carry rounding error, so the residual `1 - rowsum` is
    /// booked on the self-loop: off-diagonal costs then equal `1 - p`
    /// exactly. If that would make the self-loop negative the row is scaled
    /// proportionally instead.
    pub fn seed_from_table(probabilities: &[[f64; 7]; 7]) -> Result<Self, MstnError> {
        let mut counts = [[0.0; 7]; 7];
        for (i, row) in probabilities.iter().enumerate() {
            let state = MentalState::from_index(i);
            for (j, &p) in row.iter().enumerate() {
                if !(0.0..=1.0).contains(&p) {
                    return Err(MstnError::Entry { row: state, col: MentalState::from_index(j), value: p });
                }
            }
            let sum: f64 = row.iter().sum();
            if (sum - 1.0).abs() > ROW_SUM_TOLERANCE {
                return Err(MstnError::RowSum { row: state, sum });
            }
            let residual = 1.0 - sum;
            if row[i] + residual >= 0.0 {
                for (j, &p) in row.iter().enumerate() {
                    counts[i][j] = p * SEED_PSEUDO_COUNTS;
                }
                counts[i][i] += residual * SEED_PSEUDO_COUNTS;
            } else {
                for (j, &p) in row.iter().enumerate() {
                    counts[i][j] = p / sum * SEED_PSEUDO_COUNTS;
                }
            }
        }
        Ok(Self { counts })
    }

    /// Every cell holds the same count.
    pub fn uniform(count: f64) -> Self {
        assert!(count > 0.0);
        Self { counts: [[count; 7]; 7] }
    }

    pub fn from_counts(counts: [[f64; 7]; 7]) -> Result<Self, MstnError> {
        for (i, row) in counts.iter().enumerate() {
            let state = MentalState::from_index(i);
            if let Some(j) = row.iter().position(|&c| !(c.is_finite() && c >= 0.0)) {
                return Err(MstnError::Entry { row: state, col: MentalState::from_index(j), value: row[j] });
            }
            if row.iter().sum::<f64>() <= 0.0 {
                return Err(MstnError::RowSum { row: state, sum: 0.0 });
            }
        }
        Ok(Self { counts })
    }

    pub fn counts(&self) -> &[[f64; 7]; 7] {
        &self.counts
    }

    pub fn count(&self, from: MentalState, to: MentalState) -> f64 {
        self.counts[from.index()][to.index()]
    }

    pub fn row_total(&self, from: MentalState) -> f64 {
        self.counts[from.index()].iter().sum()
    }

    pub fn probability(&self, from: MentalState, to: MentalState) -> f64 {
        self.count(from, to) / self.row_total(from)
    }

    pub fn cost(&self, from: MentalState, to: MentalState) -> f64 {
        1.0 - self.probability(from, to)
    }

    pub fn cost_matrix(&self) -> [[f64; 7]; 7] {
        let mut out = [[0.0; 7]; 7];
        for from in MentalState::ALL {
            for to in MentalState::ALL {
                out[from.index()][to.index()] = self.cost(from, to);
            }
        }
        out
    }

    /// Records one transition; only the `from` row changes.
    pub fn observe_transition(&mut self, from: MentalState, to: MentalState) {
        self.counts[from.index()][to.index()] += 1.0;
    }
}

/// Target state of each emotion group, indexed by group - 1.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct GroupTargets(pub [MentalState; 9]);

impl Default for GroupTargets {
    fn default() -> Self {
        use MentalState::*;
        Self([Happy, Happy, Sad, Sad, Sad, Disgust, Angry, Fear, Surprise])
    }
}

impl GroupTargets {
    pub fn target(&self, group: usize) -> MentalState {
        self.0[group - 1]
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum IdleMode {
    /// Move to the most frequent successor.
    #[default]
    Deterministic,
    /// Sample the successor from the row distribution.
    Stochastic,
}

impl FromStr for IdleMode {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "deterministic" => Ok(IdleMode::Deterministic),
            "stochastic" => Ok(IdleMode::Stochastic),
            _ => Err(format!("unknown idle mode `{s}` (deterministic|stochastic)")),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum TieBreak {
    #[default]
    LowestGroup,
    HighestGroup,
}

/// Outcome of a stimulus-driven step.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Transition {
    pub from: MentalState,
    pub to: MentalState,
    /// Winning emotion group, 1..=9.
    pub group: usize,
    /// `e_k / cost` of the winner; infinite when its cost is zero.
    pub score: f64,
}

/// Scores `e_k / cost(current, target(k))` for every active group.
/// Inactive groups (e_k <= 0) score `None`.
pub fn group_scores(
    model: &TransitionModel,
    current: MentalState,
    targets: &GroupTargets,
    e: &GroupVector,
) -> [Option<f64>; 9] {
    let mut out = [None; 9];
    for (k, slot) in out.iter_mut().enumerate() {
        let strength = e.0[k];
        if strength > 0.0 {
            let cost = model.cost(current, targets.0[k]);
            *slot = Some(if cost <= 0.0 { f64::INFINITY } else { strength / cost });
        }
    }
    out
}

/// Chooses the winning group (1-based) and its score.
pub fn choose_group(
    model: &TransitionModel,
    current: MentalState,
    targets: &GroupTargets,
    e: &GroupVector,
    tie_break: TieBreak,
) -> Option<(usize, f64)> {
    let scores = group_scores(model, current, targets, e);
    let mut best: Option<(usize, f64)> = None;
    for (k, s) in scores.iter().enumerate() {
        let Some(s) = *s else { continue };
        let better = match best {
            None => true,
            Some((_, b)) => match tie_break {
                TieBreak::LowestGroup => s > b,
                TieBreak::HighestGroup => s >= b,
            },
        };
        if better {
            best = Some((k + 1, s));
        }
    }
    best
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, rename_all = "kebab-case")]
pub struct MstnConfig {
    pub idle_mode: IdleMode,
    pub tie_break: TieBreak,
    pub group_targets: GroupTargets,
    /// Feed stimulus-driven transitions back into the counts.
    pub learn: bool,
    pub initial_state: MentalState,
}

impl Default for MstnConfig {
    fn default() -> Self {
        Self {
            idle_mode: IdleMode::default(),
            tie_break: TieBreak::default(),
            group_targets: GroupTargets::default(),
            learn: true,
            initial_state: MentalState::Quiet,
        }
    }
}

#[derive(Debug, Clone)]
pub struct StateMachine {
    current: MentalState,
    model: TransitionModel,
    config: MstnConfig,
    seed: u64,
    rng: ChaCha8Rng,
}

impl StateMachine {
    pub fn new(model: TransitionModel, config: MstnConfig, seed: u64) -> Self {
        Self {
            current: config.initial_state,
            model,
            config,
            seed,
            rng: ChaCha8Rng::seed_from_u64(seed),
        }
    }

    pub fn current(&self) -> MentalState {
        self.current
    }

    pub fn set_current(&mut self, s: MentalState) {
        self.current = s;
    }

    pub fn model(&self) -> &TransitionModel {
        &self.model
    }

    pub fn config(&self) -> &MstnConfig {
        &self.config
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    /// Stimulus-driven step. Errors with [`MstnError::NoStimulus`] when no
    /// group is active; use [`StateMachine::idle_tick`] then.
    pub fn next_state(&mut self, e: &GroupVector) -> Result<Transition, MstnError> {
        let (group, score) = choose_group(&self.model, self.current, &self.config.group_targets, e, self.config.tie_break)
            .ok_or(MstnError::NoStimulus)?;
        let from = self.current;
        let to = self.config.group_targets.target(group);
        if self.config.learn {
            self.model.observe_transition(from, to);
        }
        self.current = to;
        Ok(Transition { from, to, group, score })
    }

    /// Drift without stimulus. Does not update the counts.
    pub fn idle_tick(&mut self) -> MentalState {
        let from = self.current;
        let row = &self.model.counts[from.index()];
        let next = match self.config.idle_mode {
            IdleMode::Deterministic => {
                let mut best = 0;
                for j in 1..7 {
                    if row[j] > row[best] {
                        best = j;
                    }
                }
                best
            }
            IdleMode::Stochastic => {
                let total: f64 = row.iter().sum();
                let mut r = self.rng.random::<f64>() * total;
                let mut pick = 6;
                for (j, &c) in row.iter().enumerate() {
                    if r < c {
                        pick = j;
                        break;
                    }
                    r -= c;
                }
                pick
            }
        };
        self.current = MentalState::from_index(next);
        self.current
    }
}
