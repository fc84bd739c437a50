//! Emotion generating calculations: favorite values of the case elements are
//! laid out on three axes according to the event type, and the octant of the
//! resulting synthetic vector decides pleasure or displeasure.

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::case_frame::{CaseFrame, EventKind, EventSignature, SlotRole};
use crate::fv_store::{FvDatabase, Provenance};

/// Dummy second-axis value for event types without an f2 element.
pub const DEFAULT_BETA: f64 = 0.5;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum IntensityFormula {
    /// |f1·f2·f3|^(1/3)
    #[default]
    GeometricMean,
    /// sqrt(f1² + f2² + f3²) / sqrt(3)
    Euclidean,
}

/// Which of the two printed lines of the V(S,O) row to use.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum SubjectObjectReading {
    /// (f_S, f_O, f_P)
    #[default]
    SubjectObject,
    /// (f_O, β, f_P)
    ObjectOnly,
}

/// Third axis of V(S,O,OM): printed as f_O, possibly meant to be f_P.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum MutualThirdAxis {
    #[default]
    AsPrinted,
    Predicate,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, rename_all = "kebab-case")]
pub struct EgcConfig {
    pub beta: f64,
    pub intensity: IntensityFormula,
    pub subject_object: SubjectObjectReading,
    pub mutual_third_axis: MutualThirdAxis,
}

impl Default for EgcConfig {
    fn default() -> Self {
        Self {
            beta: DEFAULT_BETA,
            intensity: IntensityFormula::default(),
            subject_object: SubjectObjectReading::default(),
            mutual_third_axis: MutualThirdAxis::default(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AxisAssignment {
    pub f1: f64,
    pub f2: f64,
    pub f3: f64,
    pub used_beta: bool,
}

impl AxisAssignment {
    pub fn new(f1: f64, f2: f64, f3: f64) -> Self {
        Self { f1, f2, f3, used_beta: false }
    }

    pub fn components(&self) -> [f64; 3] {
        [self.f1, self.f2, self.f3]
    }

    pub fn is_on_axis(&self) -> bool {
        self.components().contains(&0.0)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Area {
    I,
    II,
    III,
    IV,
    V,
    VI,
    VII,
    VIII,
    #[serde(rename = "on-axis")]
    OnAxis,
}

impl fmt::Display for Area {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Area::I => "I",
            Area::II => "II",
            Area::III => "III",
            Area::IV => "IV",
            Area::V => "V",
            Area::VI => "VI",
            Area::VII => "VII",
            Area::VIII => "VIII",
            Area::OnAxis => "on-axis",
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Valence {
    Pleasure,
    Displeasure,
    None,
}

impl fmt::Display for Valence {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Valence::Pleasure => "pleasure",
            Valence::Displeasure => "displeasure",
            Valence::None => "none",
        })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EgcResult {
    pub vector: AxisAssignment,
    pub area: Area,
    pub valence: Valence,
    pub intensity: f64,
    /// Terms that fell back to the neutral FV.
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub unknown_terms: Vec<String>,
}

impl EgcResult {
    pub fn from_parts(vector: AxisAssignment, valence: Valence, intensity: f64) -> Self {
        let (area, _) = classify_octant(&vector);
        Self { vector, area, valence, intensity, unknown_terms: Vec::new() }
    }
}

/// Resolves the FVs of a frame's elements.
struct Elements<'a> {
    frame: &'a CaseFrame,
    db: &'a FvDatabase,
    persona: Option<&'a str>,
    unknown: Vec<String>,
}

impl Elements<'_> {
    fn term(&mut self, term: &str) -> f64 {
        let (v, prov) = self.db.lookup(term, self.persona);
        if prov == Provenance::Unknown && !self.unknown.iter().any(|t| t == term) {
            self.unknown.push(term.to_string());
        }
        v.get()
    }

    /// FV of a slot; an absent slot counts as 0.0.
    fn slot(&mut self, role: SlotRole) -> f64 {
        match self.frame.slot(role) {
            Some(t) => self.term(t),
            None => 0.0,
        }
    }

    fn predicate(&mut self) -> f64 {
        let p = self.frame.predicate.clone();
        self.term(&p)
    }
}

/// Lays out the frame's favorite values on the three axes.
pub fn assign_axes(
    frame: &CaseFrame,
    db: &FvDatabase,
    persona: Option<&str>,
    cfg: &EgcConfig,
) -> AxisAssignment {
    assign_axes_traced(frame, db, persona, cfg).0
}

fn assign_axes_traced(
    frame: &CaseFrame,
    db: &FvDatabase,
    persona: Option<&str>,
    cfg: &EgcConfig,
) -> (AxisAssignment, Vec<String>) {
    use EventSignature::*;
    use SlotRole as R;

    let mut el = Elements { frame, db, persona, unknown: Vec::new() };
    let sig = frame.signature();
    debug_assert_eq!(sig.kind() == EventKind::Attribute, frame.kind == EventKind::Attribute);

    // Evaluate in a fixed S, O.., P order so unknown_terms is stable.
    let f_s = el.slot(R::S);
    let (f1, f2, f3) = match sig {
        VS | AS | ASOf | ASOt | ASOm | ASOs => (f_s, None, el.predicate()),
        VSOf | VSOt => {
            let diff = el.slot(R::OT) - el.slot(R::OF);
            (f_s, Some(diff), el.predicate())
        }
        VSOm => {
            let om = el.slot(R::OM);
            (f_s, Some(om), el.predicate())
        }
        VSOs => {
            let os = el.slot(R::OS);
            (f_s - os, None, el.predicate())
        }
        VSO => {
            let o = el.slot(R::O);
            let p = el.predicate();
            match cfg.subject_object {
                SubjectObjectReading::SubjectObject => (f_s, Some(o), p),
                SubjectObjectReading::ObjectOnly => (o, None, p),
            }
        }
        VSOOf | VSOOt => {
            let o = el.slot(R::O);
            let diff = el.slot(R::OT) - el.slot(R::OF);
            (o, Some(diff), el.predicate())
        }
        VSOOm => {
            let o = el.slot(R::O);
            let om = el.slot(R::OM);
            let third = match cfg.mutual_third_axis {
                MutualThirdAxis::AsPrinted => o,
                MutualThirdAxis::Predicate => el.predicate(),
            };
            (o, Some(om), third)
        }
        VSOI => {
            let o = el.slot(R::O);
            let i = el.slot(R::I);
            (o, Some(i), el.predicate())
        }
        VSOOc => {
            let o = el.slot(R::O);
            let oc = el.slot(R::OC);
            (o, None, oc)
        }
        ASO => {
            let o = el.slot(R::O);
            (o, None, el.predicate())
        }
    };
    let used_beta = f2.is_none();
    let v = AxisAssignment {
        f1,
        f2: f2.unwrap_or(cfg.beta),
        f3,
        used_beta,
    };
    (v, el.unknown)
}

/// Maps a vector to its area and valence. Any zero component means the
/// vector lies on an axis and no emotion is raised.
pub fn classify_octant(v: &AxisAssignment) -> (Area, Valence) {
    if v.is_on_axis() {
        return (Area::OnAxis, Valence::None);
    }
    let (p1, p2, p3) = (v.f1 > 0.0, v.f2 > 0.0, v.f3 > 0.0);
    match (p1, p2, p3) {
        (true, true, true) => (Area::I, Valence::Pleasure),
        (false, true, true) => (Area::II, Valence::Displeasure),
        (false, false, true) => (Area::III, Valence::Pleasure),
        (true, false, true) => (Area::IV, Valence::Displeasure),
        (true, true, false) => (Area::V, Valence::Displeasure),
        (false, true, false) => (Area::VI, Valence::Pleasure),
        (false, false, false) => (Area::VII, Valence::Displeasure),
        (true, false, false) => (Area::VIII, Valence::Pleasure),
    }
}

pub fn intensity(v: &AxisAssignment) -> f64 {
    intensity_with(v, IntensityFormula::GeometricMean)
}

pub fn intensity_with(v: &AxisAssignment, formula: IntensityFormula) -> f64 {
    if v.is_on_axis() {
        return 0.0;
    }
    match formula {
        IntensityFormula::GeometricMean => (v.f1 * v.f2 * v.f3).abs().cbrt(),
        IntensityFormula::Euclidean => {
            (v.f1 * v.f1 + v.f2 * v.f2 + v.f3 * v.f3).sqrt() / 3f64.sqrt()
        }
    }
}

pub fn egc_evaluate(
    frame: &CaseFrame,
    db: &FvDatabase,
    persona: Option<&str>,
    cfg: &EgcConfig,
) -> EgcResult {
    let (vector, unknown_terms) = assign_axes_traced(frame, db, persona, cfg);
    let (area, valence) = classify_octant(&vector);
    EgcResult {
        vector,
        area,
        valence,
        intensity: intensity_with(&vector, cfg.intensity),
        unknown_terms,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::case_frame::parse_case_frame;
    use crate::fv_store::Layer;
    use approx::assert_abs_diff_eq;
    use proptest::prelude::*;

    fn db(entries: &[(&str, f64)]) -> FvDatabase {
        let mut db = FvDatabase::new();
        for (t, v) in entries {
            db.upsert(t, *v, &Layer::Default).unwrap();
        }
        db
    }

    fn axes(text: &str, entries: &[(&str, f64)]) -> AxisAssignment {
        assign_axes(&parse_case_frame(text).unwrap(), &db(entries), None, &EgcConfig::default())
    }

    #[test]
    fn subject_object_row() {
        let v = axes("V(S:I, O:cake, P:eat)", &[("I", 0.8), ("cake", 0.5), ("eat", 0.6)]);
        assert_eq!((v.f1, v.f2, v.f3, v.used_beta), (0.8, 0.5, 0.6, false));
    }

    #[test]
    fn attribute_row_uses_beta() {
        let v = axes("A(S:scenery, C:beautiful)", &[("scenery", 0.3), ("beautiful", 0.4)]);
        assert_eq!((v.f1, v.f2, v.f3, v.used_beta), (0.3, 0.5, 0.4, true));
    }

    #[test]
    fn source_difference_row() {
        let v = axes("V(S:I, OS:friend, P:part)", &[("I", 0.2), ("friend", 0.7), ("part", 0.5)]);
        assert_abs_diff_eq!(v.f1, -0.5, epsilon = 1e-12);
        assert_eq!((v.f2, v.f3, v.used_beta), (0.5, 0.5, true));
    }

    #[test]
    fn from_to_difference_missing_counterpart_is_zero() {
        let v = axes("V(S:I, OF:Tokyo, P:leave)", &[("I", 0.5), ("Tokyo", 0.4), ("leave", 0.2)]);
        assert_eq!((v.f1, v.f2, v.f3), (0.5, -0.4, 0.2));
        let v = axes(
            "V(S:I, OF:Tokyo, OT:Hiroshima, P:move)",
            &[("I", 0.5), ("Tokyo", 0.4), ("Hiroshima", 0.9), ("move", 0.2)],
        );
        assert_abs_diff_eq!(v.f2, 0.5, epsilon = 1e-12);
    }

    #[test]
    fn variant_readings() {
        let frame = parse_case_frame("V(S:I, O:cake, P:eat)").unwrap();
        let d = db(&[("I", 0.8), ("cake", -0.5), ("eat", 0.6)]);
        let cfg = EgcConfig { subject_object: SubjectObjectReading::ObjectOnly, ..Default::default() };
        let v = assign_axes(&frame, &d, None, &cfg);
        assert_eq!((v.f1, v.f2, v.f3, v.used_beta), (-0.5, 0.5, 0.6, true));

        let frame = parse_case_frame("V(S:I, O:photo, OM:friend, P:share)").unwrap();
        let d = db(&[("photo", 0.3), ("friend", 0.9), ("share", -0.7)]);
        let v = assign_axes(&frame, &d, None, &EgcConfig::default());
        assert_eq!((v.f1, v.f2, v.f3), (0.3, 0.9, 0.3));
        let cfg = EgcConfig { mutual_third_axis: MutualThirdAxis::Predicate, ..Default::default() };
        let v = assign_axes(&frame, &d, None, &cfg);
        assert_eq!((v.f1, v.f2, v.f3), (0.3, 0.9, -0.7));
    }

    #[test]
    fn octant_examples() {
        assert_eq!(classify_octant(&AxisAssignment::new(0.8, 0.5, 0.6)), (Area::I, Valence::Pleasure));
        assert_eq!(classify_octant(&AxisAssignment::new(-0.3, 0.5, 0.6)), (Area::II, Valence::Displeasure));
        assert_eq!(classify_octant(&AxisAssignment::new(0.1, 0.0, -0.4)), (Area::OnAxis, Valence::None));
    }

    #[test]
    fn intensity_examples() {
        // 0.8 * 0.5 * 0.6 = 0.24; 0.6214^3 = 0.23995..
        let got = intensity(&AxisAssignment::new(0.8, 0.5, 0.6));
        assert_abs_diff_eq!(got, 0.621_446_501_2, epsilon = 1e-9);
        assert_abs_diff_eq!(got.powi(3), 0.24, epsilon = 1e-12);
        assert_eq!(intensity(&AxisAssignment::new(0.3, 0.0, 0.9)), 0.0);
        assert_eq!(intensity(&AxisAssignment::new(1.0, 1.0, 1.0)), 1.0);
        assert_abs_diff_eq!(
            intensity_with(&AxisAssignment::new(1.0, -1.0, 1.0), IntensityFormula::Euclidean),
            1.0,
            epsilon = 1e-12
        );
    }

    #[test]
    fn evaluate_examples() {
        let cfg = EgcConfig::default();
        let d = db(&[("I", 0.5), ("souvenir", 0.7), ("buy", 0.4), ("miss", -0.6)]);
        let r = egc_evaluate(&parse_case_frame("V(S:I, O:souvenir, P:buy)").unwrap(), &d, None, &cfg);
        assert_eq!((r.area, r.valence), (Area::I, Valence::Pleasure));

        let r = egc_evaluate(&parse_case_frame("V(S:I, O:souvenir, P:miss)").unwrap(), &d, None, &cfg);
        assert_eq!((r.area, r.valence), (Area::V, Valence::Displeasure));

        let r = egc_evaluate(&parse_case_frame("V(S:stranger, O:souvenir, P:buy)").unwrap(), &d, None, &cfg);
        assert_eq!((r.valence, r.intensity), (Valence::None, 0.0));
        assert_eq!(r.unknown_terms, vec!["stranger".to_string()]);
    }

    #[test]
    fn persona_changes_outcome() {
        let mut d = db(&[("I", 0.5), ("rain", -0.6), ("walk", 0.5)]);
        d.upsert("rain", 0.8, &Layer::Persona("mika".into())).unwrap();
        let f = parse_case_frame("V(S:I, O:rain, P:walk)").unwrap();
        let cfg = EgcConfig::default();
        assert_eq!(egc_evaluate(&f, &d, None, &cfg).valence, Valence::Displeasure);
        assert_eq!(egc_evaluate(&f, &d, Some("mika"), &cfg).valence, Valence::Pleasure);
    }

    fn nonzero() -> impl Strategy<Value = f64> {
        prop_oneof![-1.0f64..-1e-6, 1e-6f64..1.0]
    }

    proptest! {
        #[test]
        fn intensity_is_bounded_and_monotone(a in -2.0f64..2.0, b in -1.0f64..1.0, c in -1.0f64..1.0, k in 1.0f64..2.0) {
            let v = AxisAssignment::new(a, b, c);
            let i = intensity(&v);
            prop_assert!((0.0..=2f64.cbrt() + 1e-12).contains(&i));
            let bigger = AxisAssignment::new(b, c * k, a);
            let base = AxisAssignment::new(b, c, a);
            prop_assert!(intensity(&bigger) >= intensity(&base) - 1e-12);
        }

        #[test]
        fn single_flip_flips_valence(a in nonzero(), b in nonzero(), c in nonzero(), axis in 0usize..3) {
            let v = AxisAssignment::new(a, b, c);
            let mut comps = v.components();
            comps[axis] = -comps[axis];
            let w = AxisAssignment::new(comps[0], comps[1], comps[2]);
            let (_, before) = classify_octant(&v);
            let (_, after) = classify_octant(&w);
            prop_assert_ne!(before, Valence::None);
            prop_assert_ne!(before, after);
            prop_assert_ne!(after, Valence::None);
        }
    }
}
