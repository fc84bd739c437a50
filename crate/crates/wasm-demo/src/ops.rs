use std::collections::BTreeMap;

use concierge_core::case_frame::parse_case_frame;
use concierge_core::egc::{egc_evaluate, EgcConfig, EgcResult};
use concierge_core::elicitation::{
    elicit_emotions, group_vector, tagged_emotions, ElicitationContext, EmotionInstance, GroupVector,
    ProspectKind,
};
use concierge_core::fixtures;
use concierge_core::fv_store::Layer;
use concierge_core::mstn::{choose_group, group_scores, GroupTargets, MentalState, TieBreak, TransitionModel};
use concierge_core::recommend::{self, DistanceMetric, FeelingVector6, GeoPoint, RankedSpot, UserAffectProfile};
use serde::Serialize;

fn parse_json<T: serde::de::DeserializeOwned + Default>(what: &str, text: &str) -> Result<T, String> {
    if text.trim().is_empty() {
        return Ok(T::default());
    }
    serde_json::from_str(text).map_err(|e| format!("{what}: {e}"))
}

fn to_json<T: Serialize>(v: &T) -> String {
    serde_json::to_string(v).expect("plain data serializes")
}

#[derive(Serialize)]
pub struct Evaluation {
    pub signature: String,
    pub egc: EgcResult,
    pub emotions: Vec<EmotionInstance>,
    pub groups: GroupVector,
}

pub fn evaluate(frame: &str, context: &str, fv: &str, beta: f64) -> Result<String, String> {
    let frame = parse_case_frame(frame).map_err(|e| e.to_string())?;
    let mut flags: serde_json::Map<String, serde_json::Value> = parse_json("context", context)?;
    // A stateless caller names the earlier prospect a confirmation resolves.
    let prior: Option<ProspectKind> = match flags.remove("prior") {
        Some(v) => Some(serde_json::from_value(v).map_err(|e| format!("prior: {e}"))?),
        None => None,
    };
    let mut ctx: ElicitationContext =
        serde_json::from_value(serde_json::Value::Object(flags)).map_err(|e| format!("context: {e}"))?;
    ctx.prior_prospect = prior;
    let overrides: BTreeMap<String, f64> = parse_json("fv", fv)?;
    if !beta.is_finite() || beta == 0.0 {
        return Err(format!("beta {beta} must be finite and non-zero"));
    }
    let mut db = fixtures::default_fv();
    for (term, v) in &overrides {
        db.upsert(term, *v, &Layer::Default).map_err(|e| e.to_string())?;
    }
    let cfg = EgcConfig { beta, ..EgcConfig::default() };
    let egc = egc_evaluate(&frame, &db, None, &cfg);
    let mut emotions = elicit_emotions(&egc, &ctx).map_err(|e| e.to_string())?;
    emotions.extend(tagged_emotions(&frame.tags, &egc));
    let groups = group_vector(&emotions);
    Ok(to_json(&Evaluation { signature: frame.signature().to_string(), egc, emotions, groups }))
}

#[derive(Serialize)]
pub struct GroupScore {
    pub group: usize,
    pub strength: f64,
    pub target: MentalState,
    pub cost: f64,
    pub score: Option<f64>,
}

#[derive(Serialize)]
pub struct Step {
    pub from: MentalState,
    pub to: MentalState,
    pub group: Option<usize>,
    pub groups: Vec<GroupScore>,
}

pub fn step(state: &str, groups: &str) -> Result<String, String> {
    let from: MentalState = state.parse().map_err(|e: concierge_core::MstnError| e.to_string())?;
    let e: [f64; 9] = serde_json::from_str(groups).map_err(|e| format!("groups: {e}"))?;
    if e.iter().any(|x| !(0.0..=1.0).contains(x)) {
        return Err("group strengths must lie in [0, 1]".into());
    }
    let e = GroupVector(e);
    let model = TransitionModel::seed_from_table(&fixtures::transition_table().values).map_err(|e| e.to_string())?;
    let targets = GroupTargets::default();
    let scores = group_scores(&model, from, &targets, &e);
    let chosen = choose_group(&model, from, &targets, &e, TieBreak::LowestGroup);
    let rows = (1..=9)
        .map(|k| GroupScore {
            group: k,
            strength: e.get(k),
            target: targets.target(k),
            cost: model.cost(from, targets.target(k)),
            // JSON has no infinity; a zero-cost winner reports null score.
            score: scores[k - 1].filter(|s| s.is_finite()),
        })
        .collect();
    let (group, to) = match chosen {
        Some((k, _)) => (Some(k), targets.target(k)),
        None => (None, from),
    };
    Ok(to_json(&Step { from, to, group, groups: rows }))
}

pub fn rank(profile: &str, lat: Option<f64>, lon: Option<f64>, radius_km: Option<f64>) -> Result<String, String> {
    let p: [f64; 6] = serde_json::from_str(profile).map_err(|e| format!("profile: {e}"))?;
    let current = FeelingVector6::from_array(p);
    if !current.is_valid() {
        return Err("feelings must lie in [0, 1]".into());
    }
    let here = match (lat, lon) {
        (Some(a), Some(o)) => Some(GeoPoint::new(a, o).map_err(|e| e.to_string())?),
        (None, None) => None,
        _ => return Err("latitude and longitude go together".into()),
    };
    let user = UserAffectProfile { current, ..UserAffectProfile::default() };
    let ranked: Vec<RankedSpot> =
        recommend::rank_spots(&user, &fixtures::spot_catalog(), here, radius_km, DistanceMetric::Euclidean).map_err(|e| e.to_string())?;
    Ok(to_json(&ranked))
}

pub fn spots() -> String {
    to_json(&fixtures::spot_catalog().spots)
}
