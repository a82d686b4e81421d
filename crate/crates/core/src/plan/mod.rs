//! The structured plan language: one entry per part, naming the catalog
//! object, its orientation, optional hole modifications, its connections
//! and whether it performs the target function.

mod normalize;
mod parse;
pub mod tokens;

use serde::{Deserialize, Serialize};
use serde_json::{json, Value};

use crate::geometry::{Axis, Face};
pub use normalize::{normalize_raw, normalize_token, normalize_value, strip_code_fence, JsonSyntaxError};
pub use parse::{check_plan, is_valid_part_name, parse_plan, parse_plan_text};
use tokens::{Align, HoleSpan, ModAlign};

#[derive(Debug, Clone, PartialEq)]
pub struct CraftPlan {
    pub parts: Vec<PartSpec>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct PartSpec {
    pub name: String,
    /// Canonical catalog id.
    pub available_obj: String,
    pub orientation: Orientation,
    pub modifications: Vec<ModificationSpec>,
    pub connections: Vec<ConnectionSpec>,
    pub exec_function: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub enum Orientation {
    /// Millimetre dimensions along world X, Y, Z; a permutation of the
    /// catalog dims.
    Cuboid([f64; 3]),
    /// World axis of the cylinder's principal axis.
    Cylinder(Axis),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "UPPERCASE")]
pub enum ModificationType {
    Hole,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ModificationSpec {
    pub name: String,
    pub mod_type: ModificationType,
    /// Alignment per world axis, indexed X, Y, Z.
    pub align: [ModAlign; 3],
}

impl ModificationSpec {
    /// The axis carrying the FULL/HALF token, and its span.
    pub fn hole_axis(&self) -> (Axis, HoleSpan) {
        Axis::ALL
            .into_iter()
            .find_map(|a| match self.align[a.index()] {
                ModAlign::Through(span) => Some((a, span)),
                ModAlign::At(_) => None,
            })
            .expect("validated modification has exactly one through axis")
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum JointType {
    Fixed,
    NonFixed,
}

#[derive(Debug, Clone, PartialEq)]
pub enum Contact {
    Surface {
        /// Face of the declaring part where the contact occurs.
        to_face: Face,
        align: [Align; 3],
    },
    Inserted {
        to_modification: String,
    },
}

#[derive(Debug, Clone, PartialEq)]
pub struct ConnectionSpec {
    pub to_part: String,
    pub contact: Contact,
    pub joint: JointType,
}

impl ConnectionSpec {
    pub fn contact_name(&self) -> &'static str {
        match self.contact {
            Contact::Surface { .. } => "SURFACE",
            Contact::Inserted { .. } => "INSERTED",
        }
    }
}

impl CraftPlan {
    pub fn part(&self, name: &str) -> Option<&PartSpec> {
        self.parts.iter().find(|p| p.name == name)
    }

    pub fn index_of(&self, name: &str) -> Option<usize> {
        self.parts.iter().position(|p| p.name == name)
    }

    /// Canonical JSON text. Reparsing it yields an equal plan.
    pub fn to_json_string(&self) -> String {
        serde_json::to_string_pretty(&self.to_json()).expect("plan serializes")
    }

    pub fn to_json(&self) -> Value {
        Value::Array(self.parts.iter().map(part_to_json).collect())
    }

    /// Swaps every LEFT and RIGHT token: faces, alignments and half-hole
    /// directions along Y. Axis tokens (`LEFT_RIGHT`, `RIGHT_LEFT_FULL`)
    /// are unchanged since they name an axis, not a side.
    pub fn mirrored_left_right(&self) -> CraftPlan {
        let flip_align = |a: Align| match a {
            Align::Flush(s) => Align::Flush(s.flip()),
            Align::Center => Align::Center,
        };
        let mut plan = self.clone();
        for part in &mut plan.parts {
            for m in &mut part.modifications {
                let y = &mut m.align[Axis::Y.index()];
                *y = match *y {
                    ModAlign::At(a) => ModAlign::At(flip_align(a)),
                    ModAlign::Through(HoleSpan::HalfFrom(s)) => {
                        ModAlign::Through(HoleSpan::HalfFrom(s.flip()))
                    }
                    full => full,
                };
            }
            for c in &mut part.connections {
                if let Contact::Surface { to_face, align } = &mut c.contact {
                    if to_face.axis == Axis::Y {
                        *to_face = to_face.opposite();
                    }
                    align[Axis::Y.index()] = flip_align(align[Axis::Y.index()]);
                }
            }
        }
        plan
    }
}

/// Emits whole numbers as JSON integers so canonical plans read like the
/// hand-written ones.
fn number(v: f64) -> Value {
    if v.fract() == 0.0 && v.abs() < 1e15 {
        json!(v as i64)
    } else {
        json!(v)
    }
}

fn part_to_json(part: &PartSpec) -> Value {
    let orientation = match &part.orientation {
        Orientation::Cuboid(d) => Value::Array(d.iter().map(|v| number(*v)).collect()),
        Orientation::Cylinder(axis) => json!(tokens::cylinder_axis_token(*axis)),
    };
    let modifications: Vec<Value> = part
        .modifications
        .iter()
        .map(|m| {
            json!({
                "NAME": m.name,
                "TYPE": "HOLE",
                "ALIGN_X": tokens::modification_align_token(Axis::X, m.align[0]),
                "ALIGN_Y": tokens::modification_align_token(Axis::Y, m.align[1]),
                "ALIGN_Z": tokens::modification_align_token(Axis::Z, m.align[2]),
            })
        })
        .collect();
    let connections: Vec<Value> = part
        .connections
        .iter()
        .map(|c| {
            let joint = match c.joint {
                JointType::Fixed => "FIXED",
                JointType::NonFixed => "NON_FIXED",
            };
            match &c.contact {
                Contact::Surface { to_face, align } => json!({
                    "TO_PART": c.to_part,
                    "CONTACT_TYPE": "SURFACE",
                    "TO_FACE": tokens::face_token(*to_face),
                    "ALIGN_X": tokens::connection_align_token(Axis::X, align[0]),
                    "ALIGN_Y": tokens::connection_align_token(Axis::Y, align[1]),
                    "ALIGN_Z": tokens::connection_align_token(Axis::Z, align[2]),
                    "TYPE": joint,
                }),
                Contact::Inserted { to_modification } => json!({
                    "TO_PART": c.to_part,
                    "CONTACT_TYPE": "INSERTED",
                    "TO_MODIFICATION": to_modification,
                    "TYPE": joint,
                }),
            }
        })
        .collect();
    json!({
        "NAME": part.name,
        "AVAILABLE_OBJ": part.available_obj,
        "ORIENTATION": orientation,
        "MODIFICATIONS": modifications,
        "CONNECTIONS": connections,
        "EXEC_FUNCTION": part.exec_function,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum IssueCode {
    JsonSyntax,
    MissingField,
    UnknownToken,
    UnknownObject,
    BadOrientationPermutation,
    DanglingReference,
    DuplicateName,
    BadNamePattern,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FormatIssue {
    pub part: String,
    pub field: String,
    pub code: IssueCode,
    pub message: String,
}

/// Outcome of format validation. Serialized verbatim into feedback prompts.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct FormatReport {
    pub ok: bool,
    pub errors: Vec<FormatIssue>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub warnings: Vec<String>,
}

impl FormatReport {
    pub fn passed(warnings: Vec<String>) -> Self {
        FormatReport {
            ok: true,
            errors: Vec::new(),
            warnings,
        }
    }

    pub fn failed(errors: Vec<FormatIssue>) -> Self {
        FormatReport {
            ok: errors.is_empty(),
            errors,
            warnings: Vec::new(),
        }
    }

    pub fn has_code(&self, code: IssueCode) -> bool {
        self.errors.iter().any(|e| e.code == code)
    }
}
