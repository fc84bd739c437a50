//! Refines pleasure/displeasure into specific emotion types and aggregates
//! them into the nine emotion groups that drive the state machine.
//!
//! The appraisal rules emit the twenty Elliott types. The eight remaining
//! group members (liking, love, shy, sadness, perplexity, hate, reproach,
//! surprise) are only reachable through lexical tags on the case frame.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::case_frame::LexicalTag;
use crate::egc::{EgcResult, Valence};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ContextError {
    #[error("{0} event without a prior prospective event")]
    NoPriorProspect(Prospect),
    #[error("event affecting another party needs a desirability judgement")]
    MissingDesirability,
}

macro_rules! emotion_types {
    ($($variant:ident => $name:literal, $group:literal;)*) => {
        #[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
        pub enum EmotionType {
            $(#[serde(rename = $name)] $variant,)*
        }

        impl EmotionType {
            pub const ALL: &'static [EmotionType] = &[$(EmotionType::$variant,)*];

            pub fn as_str(self) -> &'static str {
                match self { $(EmotionType::$variant => $name,)* }
            }

            /// Emotion group number, 1..=9.
            pub fn group(self) -> usize {
                match self { $(EmotionType::$variant => $group,)* }
            }
        }
    };
}

emotion_types! {
    Gloating => "gloating", 1;
    Hope => "hope", 1;
    Satisfaction => "satisfaction", 1;
    Relief => "relief", 1;
    Pride => "pride", 1;
    Admiration => "admiration", 1;
    Liking => "liking", 1;
    Gratitude => "gratitude", 1;
    Gratification => "gratification", 1;
    Love => "love", 1;
    Shy => "shy", 1;
    Joy => "joy", 2;
    HappyFor => "happy-for", 2;
    SorryFor => "sorry-for", 3;
    Shame => "shame", 3;
    Remorse => "remorse", 3;
    FearsConfirmed => "fears-confirmed", 4;
    Disappointment => "disappointment", 4;
    Sadness => "sadness", 4;
    Distress => "distress", 5;
    Perplexity => "perplexity", 5;
    Disliking => "disliking", 6;
    Hate => "hate", 6;
    Resentment => "resentment", 7;
    Reproach => "reproach", 7;
    Anger => "anger", 7;
    Fear => "fear", 8;
    Surprise => "surprise", 9;
}

impl EmotionType {
    /// True for the types outside the appraisal rule table.
    pub fn is_lexical_only(self) -> bool {
        use EmotionType::*;
        matches!(self, Liking | Love | Shy | Sadness | Perplexity | Hate | Reproach | Surprise)
    }
}

impl fmt::Display for EmotionType {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for EmotionType {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let norm = s.trim().to_ascii_lowercase().replace('_', "-");
        let norm = match norm.as_str() {
            "fear-confirmed" => "fears-confirmed",
            other => other,
        };
        EmotionType::ALL
            .iter()
            .copied()
            .find(|e| e.as_str() == norm)
            .ok_or_else(|| format!("unknown emotion type `{s}`"))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Party {
    #[default]
    #[serde(rename = "self")]
    Own,
    Other,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Desirability {
    Desirable,
    Undesirable,
    #[default]
    #[serde(rename = "n/a")]
    NotApplicable,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Prospect {
    #[default]
    None,
    Prospective,
    Confirmed,
    Disconfirmed,
}

impl fmt::Display for Prospect {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Prospect::None => "none",
            Prospect::Prospective => "prospective",
            Prospect::Confirmed => "confirmed",
            Prospect::Disconfirmed => "disconfirmed",
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Approval {
    Approve,
    Disapprove,
    #[default]
    #[serde(rename = "n/a")]
    NotApplicable,
}

/// What a pending prospect was hoped or feared to be.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ProspectKind {
    Hope,
    Fear,
}

/// Per-utterance appraisal conditions. The engine never infers these.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(default, rename_all = "kebab-case", deny_unknown_fields)]
pub struct ElicitationContext {
    pub agent: Party,
    pub affected: Party,
    pub desirability: Desirability,
    pub prospect: Prospect,
    pub approval: Approval,
    /// The earlier prospect a confirmation resolves; supplied by the session.
    #[serde(skip)]
    pub prior_prospect: Option<ProspectKind>,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EmotionInstance {
    pub emotion: EmotionType,
    pub strength: f64,
}

/// Strength e_1..e_9 of the nine emotion groups, stored zero-based.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
#[serde(transparent)]
pub struct GroupVector(pub [f64; 9]);

impl GroupVector {
    pub fn zero() -> Self {
        Self::default()
    }

    /// Strength of group `k`, 1-based.
    pub fn get(&self, k: usize) -> f64 {
        self.0[k - 1]
    }

    pub fn set(&mut self, k: usize, v: f64) {
        self.0[k - 1] = v;
    }

    pub fn is_zero(&self) -> bool {
        self.0.iter().all(|&e| e <= 0.0)
    }

    pub fn max_strength(&self) -> f64 {
        self.0.iter().copied().fold(0.0, f64::max)
    }
}

/// Applies the appraisal rule table to one evaluated event.
///
/// On-axis events (no valence) elicit nothing.
pub fn elicit_emotions(
    result: &EgcResult,
    ctx: &ElicitationContext,
) -> Result<Vec<EmotionInstance>, ContextError> {
    if matches!(ctx.prospect, Prospect::Confirmed | Prospect::Disconfirmed) && ctx.prior_prospect.is_none() {
        return Err(ContextError::NoPriorProspect(ctx.prospect));
    }
    if ctx.affected == Party::Other && ctx.desirability == Desirability::NotApplicable {
        return Err(ContextError::MissingDesirability);
    }
    let pleasant = match result.valence {
        Valence::Pleasure => true,
        Valence::Displeasure => false,
        Valence::None => return Ok(Vec::new()),
    };
    let strength = result.intensity.min(1.0);
    let mut out: Vec<EmotionType> = Vec::new();

    let attribution = match (ctx.approval, ctx.agent) {
        (Approval::Approve, Party::Own) => Some(EmotionType::Pride),
        (Approval::Approve, Party::Other) => Some(EmotionType::Admiration),
        (Approval::Disapprove, Party::Own) => Some(EmotionType::Shame),
        (Approval::Disapprove, Party::Other) => Some(EmotionType::Disliking),
        (Approval::NotApplicable, _) => None,
    };
    out.extend(attribution);

    let mut well_being = None;
    match ctx.prospect {
        Prospect::None => {
            if ctx.affected == Party::Own {
                well_being = Some(if pleasant { EmotionType::Joy } else { EmotionType::Distress });
                out.extend(well_being);
            } else {
                out.push(match (pleasant, ctx.desirability) {
                    (true, Desirability::Desirable) => EmotionType::HappyFor,
                    (true, _) => EmotionType::Gloating,
                    (false, Desirability::Desirable) => EmotionType::Resentment,
                    (false, _) => EmotionType::SorryFor,
                });
            }
        }
        Prospect::Prospective => out.push(if pleasant { EmotionType::Hope } else { EmotionType::Fear }),
        Prospect::Confirmed | Prospect::Disconfirmed => {
            let prior = ctx.prior_prospect.expect("checked above");
            out.push(match (ctx.prospect, prior) {
                (Prospect::Confirmed, ProspectKind::Hope) => EmotionType::Satisfaction,
                (Prospect::Confirmed, ProspectKind::Fear) => EmotionType::FearsConfirmed,
                (_, ProspectKind::Hope) => EmotionType::Disappointment,
                (_, ProspectKind::Fear) => EmotionType::Relief,
            });
        }
    }

    let compound = match (attribution, well_being) {
        (Some(EmotionType::Admiration), Some(EmotionType::Joy)) => Some(EmotionType::Gratitude),
        (Some(EmotionType::Disliking), Some(EmotionType::Distress)) => Some(EmotionType::Anger),
        (Some(EmotionType::Pride), Some(EmotionType::Joy)) => Some(EmotionType::Gratification),
        (Some(EmotionType::Shame), Some(EmotionType::Distress)) => Some(EmotionType::Remorse),
        _ => None,
    };
    out.extend(compound);

    // Every base instance carries the event intensity, so the min-of-bases
    // compound strength is that same value.
    Ok(out
        .into_iter()
        .map(|emotion| EmotionInstance { emotion, strength })
        .collect())
}

/// Emotions contributed by lexical tags. Untagged strength falls back to the
/// event intensity; zero-strength instances are dropped.
pub fn tagged_emotions(tags: &[LexicalTag], result: &EgcResult) -> Vec<EmotionInstance> {
    tags.iter()
        .map(|t| EmotionInstance {
            emotion: t.emotion,
            strength: t.strength.unwrap_or(result.intensity).clamp(0.0, 1.0),
        })
        .filter(|e| e.strength > 0.0)
        .collect()
}

/// e_k = max strength over the instances belonging to group k.
pub fn group_vector(instances: &[EmotionInstance]) -> GroupVector {
    let mut g = GroupVector::zero();
    for inst in instances {
        let k = inst.emotion.group();
        g.set(k, g.get(k).max(inst.strength.clamp(0.0, 1.0)));
    }
    g
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::egc::{AxisAssignment, EgcResult};

    fn result(valence: Valence, intensity: f64) -> EgcResult {
        let sign = if valence == Valence::Displeasure { -1.0 } else { 1.0 };
        EgcResult::from_parts(
            AxisAssignment { f1: sign * 0.5, f2: 0.5, f3: 0.5, used_beta: false },
            valence,
            intensity,
        )
    }

    fn types(v: &[EmotionInstance]) -> Vec<EmotionType> {
        v.iter().map(|e| e.emotion).collect()
    }

    #[test]
    fn joy_for_plain_pleasure() {
        let out = elicit_emotions(&result(Valence::Pleasure, 0.6), &ElicitationContext::default()).unwrap();
        assert_eq!(types(&out), vec![EmotionType::Joy]);
        assert_eq!(out[0].strength, 0.6);
    }

    #[test]
    fn hope_when_prospective() {
        let ctx = ElicitationContext { prospect: Prospect::Prospective, ..Default::default() };
        assert_eq!(types(&elicit_emotions(&result(Valence::Pleasure, 0.5), &ctx).unwrap()), vec![EmotionType::Hope]);
        assert_eq!(types(&elicit_emotions(&result(Valence::Displeasure, 0.5), &ctx).unwrap()), vec![EmotionType::Fear]);
    }

    #[test]
    fn fortunes_of_others() {
        let cases = [
            (Valence::Pleasure, Desirability::Desirable, EmotionType::HappyFor),
            (Valence::Pleasure, Desirability::Undesirable, EmotionType::Gloating),
            (Valence::Displeasure, Desirability::Desirable, EmotionType::Resentment),
            (Valence::Displeasure, Desirability::Undesirable, EmotionType::SorryFor),
        ];
        for (v, d, want) in cases {
            let ctx = ElicitationContext { affected: Party::Other, desirability: d, ..Default::default() };
            assert_eq!(types(&elicit_emotions(&result(v, 0.5), &ctx).unwrap()), vec![want]);
        }
    }

    #[test]
    fn confirmation() {
        let cases = [
            (Prospect::Confirmed, ProspectKind::Hope, EmotionType::Satisfaction),
            (Prospect::Disconfirmed, ProspectKind::Fear, EmotionType::Relief),
            (Prospect::Confirmed, ProspectKind::Fear, EmotionType::FearsConfirmed),
            (Prospect::Disconfirmed, ProspectKind::Hope, EmotionType::Disappointment),
        ];
        for (p, prior, want) in cases {
            let ctx = ElicitationContext { prospect: p, prior_prospect: Some(prior), ..Default::default() };
            assert_eq!(types(&elicit_emotions(&result(Valence::Pleasure, 0.5), &ctx).unwrap()), vec![want]);
        }
        let ctx = ElicitationContext { prospect: Prospect::Confirmed, ..Default::default() };
        assert_eq!(
            elicit_emotions(&result(Valence::Pleasure, 0.5), &ctx).unwrap_err(),
            ContextError::NoPriorProspect(Prospect::Confirmed)
        );
    }

    #[test]
    fn attribution_and_compounds() {
        let ctx = ElicitationContext { approval: Approval::Approve, agent: Party::Other, ..Default::default() };
        let out = elicit_emotions(&result(Valence::Pleasure, 0.7), &ctx).unwrap();
        assert_eq!(types(&out), vec![EmotionType::Admiration, EmotionType::Joy, EmotionType::Gratitude]);
        assert!(out.iter().all(|e| e.strength == 0.7));

        let ctx = ElicitationContext { approval: Approval::Disapprove, agent: Party::Other, ..Default::default() };
        let out = elicit_emotions(&result(Valence::Displeasure, 0.4), &ctx).unwrap();
        assert_eq!(types(&out), vec![EmotionType::Disliking, EmotionType::Distress, EmotionType::Anger]);

        let ctx = ElicitationContext { approval: Approval::Approve, ..Default::default() };
        let out = elicit_emotions(&result(Valence::Pleasure, 0.4), &ctx).unwrap();
        assert_eq!(types(&out), vec![EmotionType::Pride, EmotionType::Joy, EmotionType::Gratification]);

        let ctx = ElicitationContext { approval: Approval::Disapprove, ..Default::default() };
        let out = elicit_emotions(&result(Valence::Displeasure, 0.4), &ctx).unwrap();
        assert_eq!(types(&out), vec![EmotionType::Shame, EmotionType::Distress, EmotionType::Remorse]);

        // no compound without the matching well-being base
        let ctx = ElicitationContext { approval: Approval::Approve, agent: Party::Other, ..Default::default() };
        let out = elicit_emotions(&result(Valence::Displeasure, 0.4), &ctx).unwrap();
        assert_eq!(types(&out), vec![EmotionType::Admiration, EmotionType::Distress]);
    }

    #[test]
    fn on_axis_elicits_nothing() {
        let r = EgcResult::from_parts(
            AxisAssignment { f1: 0.0, f2: 0.5, f3: 0.5, used_beta: false },
            Valence::None,
            0.0,
        );
        assert!(elicit_emotions(&r, &ElicitationContext::default()).unwrap().is_empty());
    }

    #[test]
    fn other_party_needs_desirability() {
        let ctx = ElicitationContext { affected: Party::Other, ..Default::default() };
        assert_eq!(
            elicit_emotions(&result(Valence::Pleasure, 0.5), &ctx).unwrap_err(),
            ContextError::MissingDesirability
        );
    }

    #[test]
    fn group_vector_examples() {
        assert_eq!(group_vector(&[]), GroupVector::zero());
        let g = group_vector(&[EmotionInstance { emotion: EmotionType::Joy, strength: 0.8 }]);
        assert_eq!(g.0, [0.0, 0.8, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0]);
        let g = group_vector(&[
            EmotionInstance { emotion: EmotionType::Hope, strength: 0.3 },
            EmotionInstance { emotion: EmotionType::Relief, strength: 0.7 },
        ]);
        assert_eq!(g.get(1), 0.7);
        assert_eq!(g.0.iter().filter(|&&e| e > 0.0).count(), 1);
    }

    #[test]
    fn group_membership_table() {
        let expected: [&[&str]; 9] = [
            &["gloating", "hope", "satisfaction", "relief", "pride", "admiration", "liking", "gratitude", "gratification", "love", "shy"],
            &["joy", "happy_for"],
            &["sorry-for", "shame", "remorse"],
            &["fear-confirmed", "disappointment", "sadness"],
            &["distress", "perplexity"],
            &["disliking", "hate"],
            &["resentment", "reproach", "anger"],
            &["fear"],
            &["surprise"],
        ];
        assert_eq!(EmotionType::ALL.len(), 28);
        let mut seen = std::collections::HashSet::new();
        for (i, members) in expected.iter().enumerate() {
            for name in *members {
                let e: EmotionType = name.parse().unwrap();
                assert_eq!(e.group(), i + 1, "{name}");
                assert!(seen.insert(e), "{name} listed twice");
            }
        }
        assert_eq!(seen.len(), 28);
    }

    #[test]
    fn elliott_types_are_subset() {
        let elliott = [
            "joy", "distress", "happy-for", "gloating", "resentment", "sorry-for", "hope", "fear",
            "satisfaction", "relief", "fears-confirmed", "disappointment", "pride", "admiration",
            "shame", "disliking", "gratitude", "anger", "gratification", "remorse",
        ];
        for name in elliott {
            let e: EmotionType = name.parse().unwrap();
            assert!(!e.is_lexical_only(), "{name}");
        }
        assert_eq!(EmotionType::ALL.iter().filter(|e| e.is_lexical_only()).count(), 8);
    }

    #[test]
    fn tags_use_intensity_unless_explicit() {
        let r = result(Valence::Pleasure, 0.4);
        let tags = [
            LexicalTag { emotion: EmotionType::Surprise, strength: None },
            LexicalTag { emotion: EmotionType::Hate, strength: Some(0.9) },
            LexicalTag { emotion: EmotionType::Love, strength: Some(0.0) },
        ];
        let out = tagged_emotions(&tags, &r);
        assert_eq!(
            out,
            vec![
                EmotionInstance { emotion: EmotionType::Surprise, strength: 0.4 },
                EmotionInstance { emotion: EmotionType::Hate, strength: 0.9 },
            ]
        );
    }
}
