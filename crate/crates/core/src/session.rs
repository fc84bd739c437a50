//! The per-user dialogue pipeline.
//!
//! An [`Engine`] holds the shared, read-mostly data (configuration, seeded
//! transition model, spot catalog, FV store). A [`Session`] owns one user's
//! state machine, feeling profile, history and pending prospects. Every turn
//! is all-or-nothing: a failing turn leaves the session untouched.

use std::fs::{self, File, OpenOptions};
use std::io::{BufRead, BufReader, Write};
use std::path::{Path, PathBuf};
use std::time::{SystemTime, UNIX_EPOCH};

use serde::{Deserialize, Serialize};

use crate::case_frame::parse_case_frame;
use crate::config::EngineConfig;
use crate::egc::{egc_evaluate, EgcResult, Valence};
use crate::elicitation::{
    elicit_emotions, group_vector, tagged_emotions, ElicitationContext, EmotionInstance, GroupVector, Prospect,
    ProspectKind,
};
use crate::fixtures;
use crate::fv_store::{FvDatabase, FvStore};
use crate::mstn::{MentalState, StateMachine, TransitionModel, TransitionTable};
use crate::recommend::{
    feeling_vector_from_groups, rank_spots, GeoPoint, RankedSpot, SpotCatalog, UserAffectProfile,
};
use crate::Error;

/// Recommendations attached to each turn report.
pub const TURN_RECOMMENDATIONS: usize = 3;

pub const TRANSITION_FILE: &str = "transition_table.tsv";
pub const SPOTS_FILE: &str = "spots.tsv";
pub const FV_FILE: &str = "fv.tsv";
pub const SESSIONS_DIR: &str = "sessions";

#[derive(Debug)]
pub struct Engine {
    pub config: EngineConfig,
    pub table: TransitionTable,
    pub seed_model: TransitionModel,
    pub catalog: SpotCatalog,
    pub fv: FvStore,
}

impl Engine {
    /// Loads data from `config.data_dir`, falling back to the bundled
    /// fixtures for any file that is absent.
    pub fn from_config(config: EngineConfig) -> Result<Self, Error> {
        config.validate()?;
        let dir = config.data_dir.clone();
        let file = |name: &str| dir.as_ref().map(|d| d.join(name)).filter(|p| p.exists());

        let table = match file(TRANSITION_FILE) {
            Some(p) => TransitionTable::parse(&fs::read_to_string(&p)?)?,
            None => fixtures::transition_table(),
        };
        let catalog = match file(SPOTS_FILE) {
            Some(p) => crate::recommend::load_spot_catalog(&p)?,
            None => fixtures::spot_catalog(),
        };
        let fv = match &dir {
            Some(d) => {
                let path = d.join(FV_FILE);
                if path.exists() {
                    FvStore::open(path)?
                } else {
                    fs::create_dir_all(d).map_err(|e| Error::Config(format!("{}: {e}", d.display())))?;
                    let store = FvStore::open(path)?;
                    store.replace(fixtures::default_fv())?;
                    store
                }
            }
            None => FvStore::in_memory(fixtures::default_fv()),
        };
        Self::with_parts(config, table, catalog, fv)
    }

    pub fn with_parts(
        config: EngineConfig,
        table: TransitionTable,
        catalog: SpotCatalog,
        fv: FvStore,
    ) -> Result<Self, Error> {
        let seed_model = TransitionModel::seed_from_table(&table.values)?;
        Ok(Self { config, table, seed_model, catalog, fv })
    }

    /// Bundled data, in-memory FV store.
    pub fn bundled(config: EngineConfig) -> Result<Self, Error> {
        Self::with_parts(
            config,
            fixtures::transition_table(),
            fixtures::spot_catalog(),
            FvStore::in_memory(fixtures::default_fv()),
        )
    }

    pub fn sessions_dir(&self) -> Option<PathBuf> {
        self.config.data_dir.as_ref().map(|d| d.join(SESSIONS_DIR))
    }

    pub fn new_session(&self, id: impl Into<String>, persona: Option<String>) -> Session {
        let header = SessionHeader {
            id: id.into(),
            persona,
            seed: self.config.seed,
            created_ms: now_ms(),
        };
        Session::from_header(self, header)
    }

    pub fn recommend(
        &self,
        affect: &UserAffectProfile,
        here: Option<GeoPoint>,
        radius_km: Option<f64>,
    ) -> Result<Vec<RankedSpot>, Error> {
        Ok(rank_spots(affect, &self.catalog, here, radius_km, self.config.metric)?)
    }
}

pub fn now_ms() -> u64 {
    SystemTime::now().duration_since(UNIX_EPOCH).map_or(0, |d| d.as_millis() as u64)
}

/// What drove a turn.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum TurnInput {
    Utterance {
        frame: String,
        #[serde(default)]
        context: ElicitationContext,
    },
    /// A group vector supplied directly, bypassing appraisal.
    Stimulus { groups: GroupVector },
    Idle,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HistoryEntry {
    pub turn: usize,
    pub input: TurnInput,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub egc: Option<EgcResult>,
    pub emotions: Vec<EmotionInstance>,
    pub groups: GroupVector,
    pub chosen_group: Option<usize>,
    pub state_before: MentalState,
    pub state_after: MentalState,
    pub timestamp_ms: u64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PendingProspect {
    pub turn: usize,
    pub kind: ProspectKind,
    pub frame: String,
}

/// Everything a turn produced, as returned by the CLI and the HTTP service.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TurnReport {
    pub session_id: String,
    pub turn: usize,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub egc: Option<EgcResult>,
    pub emotions: Vec<EmotionInstance>,
    pub groups: GroupVector,
    pub chosen_group: Option<usize>,
    pub previous_state: MentalState,
    pub new_state: MentalState,
    pub affect: UserAffectProfile,
    pub recommendations: Vec<RankedSpot>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SessionHeader {
    pub id: String,
    pub persona: Option<String>,
    pub seed: u64,
    pub created_ms: u64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StateView {
    pub session_id: String,
    pub state: MentalState,
    pub affect: UserAffectProfile,
    pub turns: usize,
}

#[derive(Debug, Clone)]
pub struct Session {
    header: SessionHeader,
    machine: StateMachine,
    affect: UserAffectProfile,
    history: Vec<HistoryEntry>,
    pending: Vec<PendingProspect>,
}

/// Effects of a turn computed before anything is committed.
struct Plan {
    input: TurnInput,
    egc: Option<EgcResult>,
    emotions: Vec<EmotionInstance>,
    groups: GroupVector,
    prospect: ProspectUpdate,
}

enum ProspectUpdate {
    None,
    Push(ProspectKind, String),
    Pop,
}

impl Session {
    fn from_header(engine: &Engine, header: SessionHeader) -> Self {
        let machine = StateMachine::new(engine.seed_model.clone(), engine.config.mstn, header.seed);
        Self {
            header,
            machine,
            affect: UserAffectProfile::new(engine.config.alpha),
            history: Vec::new(),
            pending: Vec::new(),
        }
    }

    pub fn id(&self) -> &str {
        &self.header.id
    }

    pub fn header(&self) -> &SessionHeader {
        &self.header
    }

    pub fn persona(&self) -> Option<&str> {
        self.header.persona.as_deref()
    }

    pub fn state(&self) -> MentalState {
        self.machine.current()
    }

    pub fn machine(&self) -> &StateMachine {
        &self.machine
    }

    pub fn affect(&self) -> &UserAffectProfile {
        &self.affect
    }

    pub fn history(&self) -> &[HistoryEntry] {
        &self.history
    }

    pub fn pending_prospects(&self) -> &[PendingProspect] {
        &self.pending
    }

    pub fn view(&self) -> StateView {
        StateView {
            session_id: self.header.id.clone(),
            state: self.state(),
            affect: self.affect,
            turns: self.history.len(),
        }
    }

    /// Places the machine in `state` before the first turn.
    pub fn set_initial_state(&mut self, state: MentalState) -> Result<(), Error> {
        if !self.history.is_empty() {
            return Err(Error::Session("initial state can only be set before the first turn".into()));
        }
        self.machine.set_current(state);
        Ok(())
    }

    pub fn recommendations(
        &self,
        engine: &Engine,
        here: Option<GeoPoint>,
        radius_km: Option<f64>,
    ) -> Result<Vec<RankedSpot>, Error> {
        engine.recommend(&self.affect, here, radius_km)
    }

    /// Runs the full pipeline on one case-frame utterance.
    pub fn post_utterance(
        &mut self,
        engine: &Engine,
        frame_text: &str,
        context: ElicitationContext,
    ) -> Result<TurnReport, Error> {
        let plan = self.plan_utterance(engine, frame_text, context)?;
        self.commit(engine, plan)
    }

    /// Applies a group vector directly, as if appraisal had produced it.
    pub fn post_stimulus(&mut self, engine: &Engine, groups: GroupVector) -> Result<TurnReport, Error> {
        if groups.0.iter().any(|e| !(0.0..=1.0).contains(e)) {
            return Err(Error::Session("group strengths must lie in [0, 1]".into()));
        }
        let plan = Plan {
            input: TurnInput::Stimulus { groups },
            egc: None,
            emotions: Vec::new(),
            groups,
            prospect: ProspectUpdate::None,
        };
        self.commit(engine, plan)
    }

    pub fn post_idle(&mut self, engine: &Engine) -> Result<TurnReport, Error> {
        let plan = Plan {
            input: TurnInput::Idle,
            egc: None,
            emotions: Vec::new(),
            groups: GroupVector::zero(),
            prospect: ProspectUpdate::None,
        };
        self.commit(engine, plan)
    }

    pub fn post(&mut self, engine: &Engine, input: &TurnInput) -> Result<TurnReport, Error> {
        match input {
            TurnInput::Utterance { frame, context } => self.post_utterance(engine, frame, *context),
            TurnInput::Stimulus { groups } => self.post_stimulus(engine, *groups),
            TurnInput::Idle => self.post_idle(engine),
        }
    }

    fn plan_utterance(
        &self,
        engine: &Engine,
        frame_text: &str,
        mut context: ElicitationContext,
    ) -> Result<Plan, Error> {
        let frame = parse_case_frame(frame_text)?;
        let egc = {
            let db = engine.fv.read();
            egc_evaluate(&frame, &db, self.persona(), &engine.config.egc)
        };
        context.prior_prospect = match context.prospect {
            Prospect::Confirmed | Prospect::Disconfirmed => self.pending.last().map(|p| p.kind),
            _ => None,
        };
        let mut emotions = elicit_emotions(&egc, &context)?;
        emotions.extend(tagged_emotions(&frame.tags, &egc));
        let groups = group_vector(&emotions);
        let prospect = match (context.prospect, egc.valence) {
            (Prospect::Prospective, Valence::Pleasure) => ProspectUpdate::Push(ProspectKind::Hope, frame.render()),
            (Prospect::Prospective, Valence::Displeasure) => ProspectUpdate::Push(ProspectKind::Fear, frame.render()),
            (Prospect::Confirmed | Prospect::Disconfirmed, v) if v != Valence::None => ProspectUpdate::Pop,
            _ => ProspectUpdate::None,
        };
        context.prior_prospect = None;
        Ok(Plan {
            input: TurnInput::Utterance { frame: frame_text.trim().to_string(), context },
            egc: Some(egc),
            emotions,
            groups,
            prospect,
        })
    }

    fn commit(&mut self, engine: &Engine, plan: Plan) -> Result<TurnReport, Error> {
        let before = self.machine.current();
        let chosen_group = if plan.groups.is_zero() {
            self.machine.idle_tick();
            None
        } else {
            Some(self.machine.next_state(&plan.groups)?.group)
        };
        if !plan.groups.is_zero() {
            self.affect.update(&feeling_vector_from_groups(&plan.groups));
        }
        let turn = self.history.len() + 1;
        match plan.prospect {
            ProspectUpdate::None => {}
            ProspectUpdate::Push(kind, frame) => self.pending.push(PendingProspect { turn, kind, frame }),
            ProspectUpdate::Pop => {
                self.pending.pop();
            }
        }
        let entry = HistoryEntry {
            turn,
            input: plan.input,
            egc: plan.egc,
            emotions: plan.emotions,
            groups: plan.groups,
            chosen_group,
            state_before: before,
            state_after: self.machine.current(),
            timestamp_ms: now_ms(),
        };
        let report = self.report_for(engine, &entry);
        self.history.push(entry);
        Ok(report)
    }

    fn report_for(&self, engine: &Engine, entry: &HistoryEntry) -> TurnReport {
        let mut recommendations = engine.recommend(&self.affect, None, None).unwrap_or_default();
        recommendations.truncate(TURN_RECOMMENDATIONS);
        TurnReport {
            session_id: self.header.id.clone(),
            turn: entry.turn,
            egc: entry.egc.clone(),
            emotions: entry.emotions.clone(),
            groups: entry.groups,
            chosen_group: entry.chosen_group,
            previous_state: entry.state_before,
            new_state: entry.state_after,
            affect: self.affect,
            recommendations,
        }
    }

    /// Re-runs the recorded inputs through a fresh session.
    pub fn replay(engine: &Engine, header: SessionHeader, inputs: &[TurnInput], initial: Option<MentalState>) -> Result<Session, Error> {
        let mut s = Session::from_header(engine, header);
        if let Some(st) = initial {
            s.set_initial_state(st)?;
        }
        for input in inputs {
            s.post(engine, input)?;
        }
        Ok(s)
    }

    /// Rebuilds a session from journaled entries without re-appraising:
    /// each entry's recorded group vector drives the machine, and the
    /// resulting state must match what was recorded.
    pub fn restore(engine: &Engine, header: SessionHeader, entries: Vec<HistoryEntry>) -> Result<Session, Error> {
        let mut s = Session::from_header(engine, header);
        for entry in entries {
            if entry.turn != s.history.len() + 1 {
                return Err(Error::Replay { turn: entry.turn, msg: "turn numbers out of sequence".into() });
            }
            if s.history.is_empty() {
                s.machine.set_current(entry.state_before);
            } else if entry.state_before != s.machine.current() {
                return Err(Error::Replay { turn: entry.turn, msg: "state_before does not chain".into() });
            }
            let chosen = if entry.groups.is_zero() {
                s.machine.idle_tick();
                None
            } else {
                s.affect.update(&feeling_vector_from_groups(&entry.groups));
                Some(s.machine.next_state(&entry.groups)?.group)
            };
            if s.machine.current() != entry.state_after || chosen != entry.chosen_group {
                return Err(Error::Replay {
                    turn: entry.turn,
                    msg: format!("recorded {} but replay gives {}", entry.state_after, s.machine.current()),
                });
            }
            if let TurnInput::Utterance { frame, context } = &entry.input {
                match (context.prospect, entry.egc.as_ref().map(|e| e.valence)) {
                    (Prospect::Prospective, Some(Valence::Pleasure)) => {
                        s.pending.push(PendingProspect { turn: entry.turn, kind: ProspectKind::Hope, frame: frame.clone() })
                    }
                    (Prospect::Prospective, Some(Valence::Displeasure)) => {
                        s.pending.push(PendingProspect { turn: entry.turn, kind: ProspectKind::Fear, frame: frame.clone() })
                    }
                    (Prospect::Confirmed | Prospect::Disconfirmed, Some(v)) if v != Valence::None => {
                        s.pending.pop();
                    }
                    _ => {}
                }
            }
            s.history.push(entry);
        }
        Ok(s)
    }

    /// State after each turn, in order.
    pub fn state_sequence(&self) -> Vec<MentalState> {
        self.history.iter().map(|h| h.state_after).collect()
    }
}

/// Append-only JSON-lines log of one session: a header line followed by one
/// [`HistoryEntry`] per turn.
#[derive(Debug)]
pub struct SessionJournal {
    path: PathBuf,
}

#[derive(Serialize, Deserialize)]
#[serde(tag = "record", rename_all = "kebab-case")]
#[allow(clippy::large_enum_variant)]
enum JournalRecord {
    Header(SessionHeader),
    Turn(HistoryEntry),
}

impl SessionJournal {
    pub fn path_for(dir: &Path, id: &str) -> PathBuf {
        dir.join(format!("{id}.jsonl"))
    }

    pub fn create(dir: &Path, header: &SessionHeader) -> Result<Self, Error> {
        fs::create_dir_all(dir)?;
        let path = Self::path_for(dir, &header.id);
        let mut f = OpenOptions::new().create_new(true).write(true).open(&path)?;
        writeln!(f, "{}", serde_json::to_string(&JournalRecord::Header(header.clone()))?)?;
        f.sync_data()?;
        Ok(Self { path })
    }

    pub fn open(path: PathBuf) -> Self {
        Self { path }
    }

    pub fn append(&self, entry: &HistoryEntry) -> Result<(), Error> {
        let mut f = OpenOptions::new().append(true).open(&self.path)?;
        writeln!(f, "{}", serde_json::to_string(&JournalRecord::Turn(entry.clone()))?)?;
        f.sync_data()?;
        Ok(())
    }

    pub fn read(path: &Path) -> Result<(SessionHeader, Vec<HistoryEntry>), Error> {
        let reader = BufReader::new(File::open(path)?);
        let mut header = None;
        let mut entries = Vec::new();
        for (i, line) in reader.lines().enumerate() {
            let line = line?;
            if line.trim().is_empty() {
                continue;
            }
            let rec: JournalRecord = serde_json::from_str(&line)
                .map_err(|e| Error::Session(format!("{}:{}: {e}", path.display(), i + 1)))?;
            match rec {
                JournalRecord::Header(h) if header.is_none() => header = Some(h),
                JournalRecord::Header(_) => {
                    return Err(Error::Session(format!("{}:{}: second header", path.display(), i + 1)))
                }
                JournalRecord::Turn(t) => entries.push(t),
            }
        }
        let header = header.ok_or_else(|| Error::Session(format!("{}: missing header", path.display())))?;
        Ok((header, entries))
    }

    /// Rebuilds every journaled session in `dir`.
    pub fn restore_all(engine: &Engine, dir: &Path) -> Result<Vec<(Session, SessionJournal)>, Error> {
        let mut out = Vec::new();
        if !dir.exists() {
            return Ok(out);
        }
        let mut paths: Vec<PathBuf> = fs::read_dir(dir)?
            .filter_map(|e| e.ok().map(|e| e.path()))
            .filter(|p| p.extension().is_some_and(|x| x == "jsonl"))
            .collect();
        paths.sort();
        for p in paths {
            let (header, entries) = Self::read(&p)?;
            out.push((Session::restore(engine, header, entries)?, SessionJournal::open(p)));
        }
        Ok(out)
    }
}

/// Convenience used by tools that only need a lexicon snapshot.
pub fn fv_snapshot(engine: &Engine) -> FvDatabase {
    engine.fv.snapshot()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::elicitation::{Approval, EmotionType, Party};

    fn engine() -> Engine {
        Engine::bundled(EngineConfig::default()).unwrap()
    }

    #[test]
    fn fresh_session_is_quiet() {
        let e = engine();
        let s = e.new_session("s1", None);
        assert_eq!(s.state(), MentalState::Quiet);
        assert!(s.history().is_empty());
    }

    #[test]
    fn joyful_utterance_moves_quiet_to_happy() {
        let e = engine();
        let mut s = e.new_session("s1", None);
        let r = s.post_utterance(&e, "V(S:I, O:okonomiyaki, P:eat)", Default::default()).unwrap();
        assert_eq!(r.previous_state, MentalState::Quiet);
        assert_eq!(r.new_state, MentalState::Happy);
        assert_eq!(r.chosen_group, Some(2));
        assert_eq!(r.emotions[0].emotion, EmotionType::Joy);
        assert_eq!(r.recommendations.len(), TURN_RECOMMENDATIONS);
        assert!(r.affect.current.happy > 0.0);
    }

    #[test]
    fn failed_turn_changes_nothing() {
        let e = engine();
        let mut s = e.new_session("s1", None);
        s.post_utterance(&e, "V(S:I, O:okonomiyaki, P:eat)", Default::default()).unwrap();
        let before = (s.state(), *s.affect(), s.history().len(), s.machine().model().clone());
        assert!(s.post_utterance(&e, "V(S:I, X:foo, P:go)", Default::default()).is_err());
        let ctx = ElicitationContext { prospect: Prospect::Confirmed, ..Default::default() };
        assert!(matches!(
            s.post_utterance(&e, "V(S:I, O:cake, P:eat)", ctx),
            Err(Error::Context(_))
        ));
        assert_eq!(before, (s.state(), *s.affect(), s.history().len(), s.machine().model().clone()));
    }

    #[test]
    fn prospect_then_confirmation() {
        let e = engine();
        let mut s = e.new_session("s1", None);
        let hope = ElicitationContext { prospect: Prospect::Prospective, ..Default::default() };
        let r = s.post_utterance(&e, "V(S:I, O:Miyajima, P:visit)", hope).unwrap();
        assert_eq!(r.emotions[0].emotion, EmotionType::Hope);
        assert_eq!(s.pending_prospects().len(), 1);
        let confirmed = ElicitationContext { prospect: Prospect::Disconfirmed, ..Default::default() };
        let r = s.post_utterance(&e, "V(S:I, O:Miyajima, P:visit)", confirmed).unwrap();
        assert_eq!(r.emotions[0].emotion, EmotionType::Disappointment);
        assert!(s.pending_prospects().is_empty());
    }

    #[test]
    fn no_emotion_drifts() {
        let e = engine();
        let mut s = e.new_session("s1", None);
        let r = s.post_utterance(&e, "V(S:somebody, P:go)", Default::default()).unwrap();
        assert_eq!(r.egc.as_ref().unwrap().valence, Valence::None);
        assert!(r.emotions.is_empty());
        assert_eq!(r.chosen_group, None);
        assert_eq!(r.new_state, MentalState::Quiet);
    }

    #[test]
    fn recommendations_before_any_turn_use_zero_profile() {
        let e = engine();
        let s = e.new_session("s1", None);
        let ranked = s.recommendations(&e, None, None).unwrap();
        let mut expect: Vec<(f64, String)> = e
            .catalog
            .spots
            .iter()
            .map(|sp| (sp.profile.euclidean(&Default::default()), sp.name.clone()))
            .collect();
        expect.sort_by(|a, b| a.0.partial_cmp(&b.0).unwrap().then(a.1.cmp(&b.1)));
        let got: Vec<&str> = ranked.iter().map(|r| r.name.as_str()).collect();
        let want: Vec<&str> = expect.iter().map(|x| x.1.as_str()).collect();
        assert_eq!(got, want);
    }

    #[test]
    fn sessions_are_isolated() {
        let e = engine();
        let mut a = e.new_session("a", None);
        let mut b = e.new_session("b", None);
        let blame = ElicitationContext { approval: Approval::Disapprove, agent: Party::Other, ..Default::default() };
        let r = a.post_utterance(&e, "V(S:I, O:wallet, P:lose)", blame).unwrap();
        assert!(r.emotions.iter().any(|x| x.emotion == EmotionType::Anger));
        b.post_utterance(&e, "V(S:I, O:cake, P:eat)", Default::default()).unwrap();
        let solo = {
            let mut c = e.new_session("c", None);
            c.post_utterance(&e, "V(S:I, O:cake, P:eat)", Default::default()).unwrap();
            c
        };
        assert_eq!(b.state(), solo.state());
        assert_eq!(b.affect(), solo.affect());
        assert_eq!(b.machine().model(), solo.machine().model());
        assert_ne!(a.state(), b.state());
    }

    #[test]
    fn journal_restore_round_trip() {
        let dir = std::env::temp_dir().join(format!("journal-{}", std::process::id()));
        let _ = fs::remove_dir_all(&dir);
        let e = engine();
        let mut s = e.new_session("j1", Some("mika".into()));
        let journal = SessionJournal::create(&dir, s.header()).unwrap();
        let inputs = [
            TurnInput::Utterance { frame: "V(S:I, O:okonomiyaki, P:eat)".into(), context: Default::default() },
            TurnInput::Idle,
            TurnInput::Utterance {
                frame: "V(S:I, O:wallet, P:lose)".into(),
                context: ElicitationContext { prospect: Prospect::Prospective, ..Default::default() },
            },
            TurnInput::Stimulus { groups: GroupVector([0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.9, 0.0, 0.0]) },
        ];
        for i in &inputs {
            s.post(&e, i).unwrap();
            journal.append(s.history().last().unwrap()).unwrap();
        }
        let restored = SessionJournal::restore_all(&e, &dir).unwrap();
        assert_eq!(restored.len(), 1);
        let (r, _) = &restored[0];
        assert_eq!(r.history(), s.history());
        assert_eq!(r.state(), s.state());
        assert_eq!(r.affect(), s.affect());
        assert_eq!(r.pending_prospects().len(), 1);
        assert_eq!(r.machine().model(), s.machine().model());
        fs::remove_dir_all(&dir).unwrap();
    }

    #[test]
    fn tampered_journal_is_rejected() {
        let e = engine();
        let mut s = e.new_session("t", None);
        s.post_utterance(&e, "V(S:I, O:okonomiyaki, P:eat)", Default::default()).unwrap();
        let mut entries = s.history().to_vec();
        entries[0].state_after = MentalState::Fear;
        assert!(matches!(
            Session::restore(&e, s.header().clone(), entries),
            Err(Error::Replay { turn: 1, .. })
        ));
    }
}
