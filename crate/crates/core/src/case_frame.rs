//! Case-frame notation.
//!
//! An utterance enters the engine as a typed event with role slots, written
//! in a compact notation:
//!
//! ```text
//! frame  := kind '(' pair (',' pair)* ')' tag*
//! kind   := 'V' | 'A'                      verb event | attribute event
//! pair   := role ':' token
//! role   := S | O | OF | OT | OM | OS | OC | I | P | C
//! tag    := '#' emotion ('=' strength)? | '!'
//! ```
//!
//! Verb events carry their predicate in `P`, attribute events carry the
//! adjective in `C`. Both are stored in [`CaseFrame::predicate`]. Tokens are
//! opaque, case-sensitive and may not contain `(`, `)`, `,` or `:`. A trailing
//! `!` is shorthand for `#surprise`.
//!
//! ```text
//! V(S:I, O:cake, P:eat)
//! A(S:scenery, C:beautiful)
//! V(S:I, O:wallet, P:lose) #perplexity=0.6 !
//! ```
//!
//! Every accepted slot set matches exactly one [`EventSignature`].

use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::elicitation::EmotionType;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum CaseFrameError {
    #[error("syntax error at byte {pos}: {msg}")]
    Syntax { pos: usize, msg: String },
    #[error("slot set {0} matches no event signature")]
    UnknownSignature(String),
    #[error("slot {0} given more than once")]
    DuplicateSlot(String),
    #[error("unknown lexical emotion tag `{0}`")]
    UnknownTag(String),
    #[error("tag strength {0} outside [0, 1]")]
    TagStrength(f64),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum EventKind {
    Verb,
    Attribute,
}

impl EventKind {
    fn letter(self) -> char {
        match self {
            EventKind::Verb => 'V',
            EventKind::Attribute => 'A',
        }
    }
}

/// Case role of a non-predicate slot.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum SlotRole {
    S,
    O,
    OF,
    OT,
    OM,
    OS,
    OC,
    I,
}

impl SlotRole {
    pub const ALL: [SlotRole; 8] = [
        SlotRole::S,
        SlotRole::O,
        SlotRole::OF,
        SlotRole::OT,
        SlotRole::OM,
        SlotRole::OS,
        SlotRole::OC,
        SlotRole::I,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            SlotRole::S => "S",
            SlotRole::O => "O",
            SlotRole::OF => "OF",
            SlotRole::OT => "OT",
            SlotRole::OM => "OM",
            SlotRole::OS => "OS",
            SlotRole::OC => "OC",
            SlotRole::I => "I",
        }
    }

    fn bit(self) -> u16 {
        1 << (self as u16)
    }
}

impl fmt::Display for SlotRole {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for SlotRole {
    type Err = ();

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        SlotRole::ALL
            .into_iter()
            .find(|r| r.as_str() == s)
            .ok_or(())
    }
}

/// The closed set of event types an utterance may take.
///
/// `V(S,O,I)` is the row the axis table prints as `V(S,O,O)`; its second
/// axis is the instrument FV.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum EventSignature {
    #[serde(rename = "V(S)")]
    VS,
    #[serde(rename = "A(S,C)")]
    AS,
    #[serde(rename = "A(S,OF,C)")]
    ASOf,
    #[serde(rename = "A(S,OT,C)")]
    ASOt,
    #[serde(rename = "A(S,OM,C)")]
    ASOm,
    #[serde(rename = "A(S,OS,C)")]
    ASOs,
    #[serde(rename = "V(S,OF)")]
    VSOf,
    #[serde(rename = "V(S,OT)")]
    VSOt,
    #[serde(rename = "V(S,OM)")]
    VSOm,
    #[serde(rename = "V(S,OS)")]
    VSOs,
    #[serde(rename = "V(S,O)")]
    VSO,
    #[serde(rename = "V(S,O,OF)")]
    VSOOf,
    #[serde(rename = "V(S,O,OT)")]
    VSOOt,
    #[serde(rename = "V(S,O,OM)")]
    VSOOm,
    #[serde(rename = "V(S,O,I)")]
    VSOI,
    #[serde(rename = "V(S,O,OC)")]
    VSOOc,
    #[serde(rename = "A(S,O,C)")]
    ASO,
}

impl EventSignature {
    pub const ALL: [EventSignature; 17] = [
        EventSignature::VS,
        EventSignature::AS,
        EventSignature::ASOf,
        EventSignature::ASOt,
        EventSignature::ASOm,
        EventSignature::ASOs,
        EventSignature::VSOf,
        EventSignature::VSOt,
        EventSignature::VSOm,
        EventSignature::VSOs,
        EventSignature::VSO,
        EventSignature::VSOOf,
        EventSignature::VSOOt,
        EventSignature::VSOOm,
        EventSignature::VSOI,
        EventSignature::VSOOc,
        EventSignature::ASO,
    ];

    pub fn kind(self) -> EventKind {
        use EventSignature::*;
        match self {
            AS | ASOf | ASOt | ASOm | ASOs | ASO => EventKind::Attribute,
            _ => EventKind::Verb,
        }
    }

    /// Slots that must be present, excluding the predicate.
    pub fn required_slots(self) -> &'static [SlotRole] {
        use EventSignature::*;
        use SlotRole as R;
        match self {
            VS | AS => &[R::S],
            ASOf | VSOf => &[R::S, R::OF],
            ASOt | VSOt => &[R::S, R::OT],
            ASOm | VSOm => &[R::S, R::OM],
            ASOs | VSOs => &[R::S, R::OS],
            VSO | ASO => &[R::S, R::O],
            VSOOf => &[R::S, R::O, R::OF],
            VSOOt => &[R::S, R::O, R::OT],
            VSOOm => &[R::S, R::O, R::OM],
            VSOI => &[R::S, R::O, R::I],
            VSOOc => &[R::S, R::O, R::OC],
        }
    }

    /// Slots that may additionally appear. Only the from/to difference rows
    /// take one: a `from` event may name its destination too.
    pub fn optional_slots(self) -> &'static [SlotRole] {
        match self {
            EventSignature::VSOf | EventSignature::VSOOf => &[SlotRole::OT],
            _ => &[],
        }
    }

    fn required_mask(self) -> u16 {
        self.required_slots().iter().fold(0, |m, r| m | r.bit())
    }

    fn optional_mask(self) -> u16 {
        self.optional_slots().iter().fold(0, |m, r| m | r.bit())
    }

    /// Whether a slot set (bitmask over [`SlotRole`]) of the given kind is
    /// accepted by this signature.
    fn accepts(self, kind: EventKind, mask: u16) -> bool {
        let req = self.required_mask();
        self.kind() == kind && mask & req == req && mask & !(req | self.optional_mask()) == 0
    }

    /// Finds the unique signature for a slot set, if any.
    pub fn match_slots<'a>(
        kind: EventKind,
        roles: impl IntoIterator<Item = &'a SlotRole>,
    ) -> Option<EventSignature> {
        let mask = roles.into_iter().fold(0, |m, r| m | r.bit());
        Self::match_mask(kind, mask)
    }

    fn match_mask(kind: EventKind, mask: u16) -> Option<EventSignature> {
        let mut hits = Self::ALL.into_iter().filter(|s| s.accepts(kind, mask));
        let first = hits.next()?;
        debug_assert!(hits.next().is_none(), "ambiguous signature table");
        Some(first)
    }
}

impl fmt::Display for EventSignature {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}(", self.kind().letter())?;
        let mut first = true;
        for r in self.required_slots() {
            if !first {
                f.write_str(",")?;
            }
            first = false;
            f.write_str(r.as_str())?;
        }
        if self.kind() == EventKind::Attribute {
            f.write_str(",C")?;
        }
        f.write_str(")")
    }
}

/// A lexical emotion marker attached to a frame. Only the emotion types the
/// appraisal rules never produce are accepted.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LexicalTag {
    pub emotion: EmotionType,
    /// Explicit strength; `None` means "the event's intensity".
    pub strength: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CaseFrame {
    pub kind: EventKind,
    pub slots: BTreeMap<SlotRole, String>,
    pub predicate: String,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub tags: Vec<LexicalTag>,
}

impl CaseFrame {
    pub fn signature(&self) -> EventSignature {
        signature_of(self)
    }

    pub fn slot(&self, role: SlotRole) -> Option<&str> {
        self.slots.get(&role).map(String::as_str)
    }

    /// Renders back to notation. Slots are emitted in canonical role order.
    pub fn render(&self) -> String {
        let mut out = String::new();
        out.push(self.kind.letter());
        out.push('(');
        for (role, tok) in &self.slots {
            out.push_str(role.as_str());
            out.push(':');
            out.push_str(tok);
            out.push_str(", ");
        }
        out.push_str(match self.kind {
            EventKind::Verb => "P:",
            EventKind::Attribute => "C:",
        });
        out.push_str(&self.predicate);
        out.push(')');
        for tag in &self.tags {
            out.push_str(" #");
            out.push_str(tag.emotion.as_str());
            if let Some(s) = tag.strength {
                out.push('=');
                out.push_str(&s.to_string());
            }
        }
        out
    }
}

impl fmt::Display for CaseFrame {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.render())
    }
}

impl FromStr for CaseFrame {
    type Err = CaseFrameError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        parse_case_frame(s)
    }
}

/// Returns the event signature of a validated frame.
pub fn signature_of(frame: &CaseFrame) -> EventSignature {
    EventSignature::match_slots(frame.kind, frame.slots.keys())
        .expect("CaseFrame constructed outside the parser has an invalid slot set")
}

struct Cursor<'a> {
    src: &'a str,
    pos: usize,
}

impl<'a> Cursor<'a> {
    fn err<T>(&self, msg: impl Into<String>) -> Result<T, CaseFrameError> {
        Err(CaseFrameError::Syntax {
            pos: self.pos,
            msg: msg.into(),
        })
    }

    fn rest(&self) -> &'a str {
        &self.src[self.pos..]
    }

    fn skip_ws(&mut self) {
        let trimmed = self.rest().trim_start();
        self.pos = self.src.len() - trimmed.len();
    }

    fn peek(&self) -> Option<char> {
        self.rest().chars().next()
    }

    fn bump(&mut self) -> Option<char> {
        let c = self.peek()?;
        self.pos += c.len_utf8();
        Some(c)
    }

    fn expect(&mut self, want: char) -> Result<(), CaseFrameError> {
        self.skip_ws();
        match self.peek() {
            Some(c) if c == want => {
                self.bump();
                Ok(())
            }
            Some(c) => self.err(format!("expected `{want}`, found `{c}`")),
            None => self.err(format!("expected `{want}`, found end of input")),
        }
    }

    fn take_while(&mut self, pred: impl Fn(char) -> bool) -> &'a str {
        let start = self.pos;
        while let Some(c) = self.peek() {
            if !pred(c) {
                break;
            }
            self.bump();
        }
        &self.src[start..self.pos]
    }
}

fn is_token_char(c: char) -> bool {
    !matches!(c, '(' | ')' | ',' | ':') && !c.is_control()
}

/// Parses and validates case-frame notation.
pub fn parse_case_frame(text: &str) -> Result<CaseFrame, CaseFrameError> {
    let mut cur = Cursor { src: text, pos: 0 };
    cur.skip_ws();
    let kind = match cur.bump() {
        Some('V') => EventKind::Verb,
        Some('A') => EventKind::Attribute,
        Some(c) => {
            cur.pos -= c.len_utf8();
            return cur.err(format!("expected event kind `V` or `A`, found `{c}`"));
        }
        None => return cur.err("empty case frame"),
    };
    cur.expect('(')?;

    let mut slots = BTreeMap::new();
    let mut predicate: Option<String> = None;
    let mut unknown_roles: Vec<String> = Vec::new();
    let mut seen: Vec<String> = Vec::new();
    loop {
        cur.skip_ws();
        let role = cur.take_while(|c| c.is_ascii_alphanumeric() || c == '_');
        if role.is_empty() {
            return cur.err("expected slot role");
        }
        cur.expect(':')?;
        cur.skip_ws();
        let tok_pos = cur.pos;
        let tok = cur.take_while(is_token_char).trim_end();
        if tok.is_empty() {
            cur.pos = tok_pos;
            return cur.err(format!("empty token for slot {role}"));
        }
        if seen.iter().any(|r| r == role) {
            return Err(CaseFrameError::DuplicateSlot(role.to_string()));
        }
        seen.push(role.to_string());

        let pred_role = match kind {
            EventKind::Verb => "P",
            EventKind::Attribute => "C",
        };
        if role == pred_role {
            predicate = Some(tok.to_string());
        } else if let Ok(r) = role.parse::<SlotRole>() {
            slots.insert(r, tok.to_string());
        } else {
            unknown_roles.push(role.to_string());
        }

        cur.skip_ws();
        match cur.bump() {
            Some(',') => continue,
            Some(')') => break,
            Some(c) => {
                cur.pos -= c.len_utf8();
                return cur.err(format!("expected `,` or `)`, found `{c}`"));
            }
            None => return cur.err("unterminated case frame"),
        }
    }

    let tags = parse_tags(&mut cur)?;

    let describe = || {
        let mut parts: Vec<String> = slots.keys().map(|r: &SlotRole| r.to_string()).collect();
        parts.extend(unknown_roles.iter().cloned());
        if predicate.is_some() {
            parts.push(
                match kind {
                    EventKind::Verb => "P",
                    EventKind::Attribute => "C",
                }
                .into(),
            );
        }
        format!("{}({})", kind.letter(), parts.join(","))
    };
    if !unknown_roles.is_empty() || predicate.is_none() {
        return Err(CaseFrameError::UnknownSignature(describe()));
    }
    if EventSignature::match_slots(kind, slots.keys()).is_none() {
        return Err(CaseFrameError::UnknownSignature(describe()));
    }

    Ok(CaseFrame {
        kind,
        slots,
        predicate: predicate.expect("checked above"),
        tags,
    })
}

fn parse_tags(cur: &mut Cursor<'_>) -> Result<Vec<LexicalTag>, CaseFrameError> {
    let mut tags = Vec::new();
    loop {
        cur.skip_ws();
        match cur.peek() {
            None => return Ok(tags),
            Some('!') => {
                cur.bump();
                tags.push(LexicalTag {
                    emotion: EmotionType::Surprise,
                    strength: None,
                });
            }
            Some('#') => {
                cur.bump();
                let name = cur.take_while(|c| c.is_ascii_alphanumeric() || c == '-' || c == '_');
                if name.is_empty() {
                    return cur.err("expected emotion name after `#`");
                }
                let emotion = name
                    .parse::<EmotionType>()
                    .ok()
                    .filter(|e| e.is_lexical_only())
                    .ok_or_else(|| CaseFrameError::UnknownTag(name.to_string()))?;
                let strength = if cur.peek() == Some('=') {
                    cur.bump();
                    let num_pos = cur.pos;
                    let raw = cur.take_while(|c| c.is_ascii_digit() || matches!(c, '.' | '-' | '+' | 'e' | 'E'));
                    let v: f64 = raw.parse().map_err(|_| CaseFrameError::Syntax {
                        pos: num_pos,
                        msg: format!("invalid tag strength `{raw}`"),
                    })?;
                    if !(0.0..=1.0).contains(&v) {
                        return Err(CaseFrameError::TagStrength(v));
                    }
                    Some(v)
                } else {
                    None
                };
                tags.push(LexicalTag { emotion, strength });
            }
            Some(c) => return cur.err(format!("unexpected `{c}` after case frame")),
        }
    }
}
