//! Format validation: turns normalized JSON into a [`CraftPlan`], collecting
//! every violation instead of stopping at the first.

use std::collections::HashSet;

use serde_json::{Map, Value};

use super::normalize::{normalize_raw, normalize_value};
use super::tokens::{self, Align, ModAlign};
use super::{
    Contact, ConnectionSpec, CraftPlan, FormatIssue, FormatReport, IssueCode, JointType,
    ModificationSpec, ModificationType, Orientation, PartSpec,
};
use crate::catalog::{Catalog, ObjectShape};
use crate::geometry::Axis;

const PART_KEYS: [&str; 6] = [
    "NAME",
    "AVAILABLE_OBJ",
    "ORIENTATION",
    "MODIFICATIONS",
    "CONNECTIONS",
    "EXEC_FUNCTION",
];
const ALIGN_KEYS: [&str; 3] = ["ALIGN_X", "ALIGN_Y", "ALIGN_Z"];

/// Normalizes raw model output and parses it.
pub fn parse_plan_text(raw: &str, catalog: &Catalog) -> Result<CraftPlan, FormatReport> {
    match normalize_raw(raw) {
        Ok(value) => parse_plan(&value, catalog),
        Err(e) => Err(FormatReport::failed(vec![FormatIssue {
            part: String::new(),
            field: String::new(),
            code: IssueCode::JsonSyntax,
            message: e.to_string(),
        }])),
    }
}

/// Parses a plan. On success the report carries only warnings.
pub fn check_plan(value: &Value, catalog: &Catalog) -> (Option<CraftPlan>, FormatReport) {
    let value = normalize_value(value);
    let mut cx = Checker::default();
    let entries = match top_level_parts(&value) {
        Some(entries) => entries,
        None => {
            cx.issue("", "PARTS", IssueCode::MissingField, "expected a list of parts");
            return (None, FormatReport::failed(cx.errors));
        }
    };
    if entries.is_empty() {
        cx.issue("", "PARTS", IssueCode::MissingField, "plan has no parts");
    }

    let parts: Vec<Option<PartSpec>> = entries
        .iter()
        .enumerate()
        .map(|(i, entry)| cx.part(i, entry, catalog))
        .collect();

    let raw_names: HashSet<&str> = entries
        .iter()
        .filter_map(|e| e.get("NAME").and_then(Value::as_str))
        .collect();
    cx.check_names(&parts);
    cx.check_references(&parts, &raw_names);

    if parts.iter().flatten().all(|p| !p.exec_function) && !parts.is_empty() {
        cx.warnings
            .push("no part has EXEC_FUNCTION set to true".to_string());
    }

    if cx.errors.is_empty() {
        let parts = parts.into_iter().map(|p| p.expect("no errors")).collect();
        (Some(CraftPlan { parts }), FormatReport::passed(cx.warnings))
    } else {
        let mut report = FormatReport::failed(cx.errors);
        report.warnings = cx.warnings;
        (None, report)
    }
}

/// Parses normalized plan JSON against a catalog.
pub fn parse_plan(value: &Value, catalog: &Catalog) -> Result<CraftPlan, FormatReport> {
    match check_plan(value, catalog) {
        (Some(plan), _) => Ok(plan),
        (None, report) => Err(report),
    }
}

/// Accepts a bare array, `{"PARTS": [...]}`, any object with exactly one
/// array-valued field, or a single part object.
fn top_level_parts(value: &Value) -> Option<Vec<Value>> {
    match value {
        Value::Array(items) => Some(items.clone()),
        Value::Object(map) => {
            if let Some(Value::Array(items)) = map.get("PARTS") {
                return Some(items.clone());
            }
            if map.contains_key("NAME") {
                return Some(vec![value.clone()]);
            }
            let mut arrays = map.values().filter_map(Value::as_array);
            match (arrays.next(), arrays.next(), map.len()) {
                (Some(items), None, 1) => Some(items.clone()),
                _ => None,
            }
        }
        _ => None,
    }
}

/// `<TYPE>_<numeral>`, where TYPE may itself contain underscores
/// (`SIDE_PANEL_1`).
pub fn is_valid_part_name(name: &str) -> bool {
    let Some((head, digits)) = name.rsplit_once('_') else {
        return false;
    };
    let mut chars = head.chars();
    !digits.is_empty()
        && digits.bytes().all(|b| b.is_ascii_digit())
        && chars.next().is_some_and(|c| c.is_ascii_uppercase())
        && chars.all(|c| c.is_ascii_uppercase() || c.is_ascii_digit() || c == '_')
}

fn is_valid_modification_name(name: &str) -> bool {
    name.strip_prefix("HOLE_")
        .is_some_and(|d| !d.is_empty() && d.bytes().all(|b| b.is_ascii_digit()))
}

fn describe(v: &Value) -> String {
    let s = v.to_string();
    if s.chars().count() > 60 {
        format!("{}...", s.chars().take(57).collect::<String>())
    } else {
        s
    }
}

#[derive(Default)]
struct Checker {
    errors: Vec<FormatIssue>,
    warnings: Vec<String>,
}

impl Checker {
    fn issue(&mut self, part: &str, field: &str, code: IssueCode, message: impl Into<String>) {
        self.errors.push(FormatIssue {
            part: part.to_string(),
            field: field.to_string(),
            code,
            message: message.into(),
        });
    }

    fn missing(&mut self, part: &str, field: &str) {
        self.issue(part, field, IssueCode::MissingField, format!("missing required field {field}"));
    }

    fn unknown(&mut self, part: &str, field: &str, value: &Value, allowed: &[&str]) {
        let message = if allowed.is_empty() {
            format!("invalid value {} for {field}", describe(value))
        } else {
            format!(
                "invalid value {} for {field}; expected one of {}",
                describe(value),
                allowed.join(", ")
            )
        };
        self.issue(part, field, IssueCode::UnknownToken, message);
    }

    /// Looks up a required string field, reporting absence or wrong type.
    fn string_field<'a>(
        &mut self,
        obj: &'a Map<String, Value>,
        part: &str,
        prefix: &str,
        key: &str,
    ) -> Option<&'a str> {
        let field = format!("{prefix}{key}");
        match obj.get(key) {
            None | Some(Value::Null) => {
                self.missing(part, &field);
                None
            }
            Some(Value::String(s)) => Some(s.as_str()),
            Some(other) => {
                self.unknown(part, &field, other, &[]);
                None
            }
        }
    }

    fn part(&mut self, index: usize, entry: &Value, catalog: &Catalog) -> Option<PartSpec> {
        let Some(obj) = entry.as_object() else {
            let label = format!("#{index}");
            self.unknown(&label, "", entry, &[]);
            return None;
        };
        let label = obj
            .get("NAME")
            .and_then(Value::as_str)
            .map(str::to_string)
            .unwrap_or_else(|| format!("#{index}"));
        let label = label.as_str();
        let before = self.errors.len();

        for key in obj.keys().filter(|k| !PART_KEYS.contains(&k.as_str())) {
            self.warnings.push(format!("{label}: ignored unknown field {key}"));
        }

        let name = self.string_field(obj, label, "", "NAME");
        if let Some(n) = name {
            if !is_valid_part_name(n) {
                self.issue(
                    label,
                    "NAME",
                    IssueCode::BadNamePattern,
                    format!("part name {n} must look like TYPE_<numeral>"),
                );
            }
        }

        let object = self
            .string_field(obj, label, "", "AVAILABLE_OBJ")
            .and_then(|id| match catalog.lookup(id) {
                Ok(o) => Some(o),
                Err(_) => {
                    self.issue(
                        label,
                        "AVAILABLE_OBJ",
                        IssueCode::UnknownObject,
                        format!("{id} is not in the list of available objects"),
                    );
                    None
                }
            });

        let orientation = match obj.get("ORIENTATION") {
            None | Some(Value::Null) => {
                self.missing(label, "ORIENTATION");
                None
            }
            Some(v) => object.and_then(|o| self.orientation(label, v, &o.shape)),
        };

        let modifications = self.modifications(label, obj.get("MODIFICATIONS"));
        let connections = self.connections(label, obj.get("CONNECTIONS"));

        let exec_function = match obj.get("EXEC_FUNCTION") {
            None | Some(Value::Null) => {
                self.missing(label, "EXEC_FUNCTION");
                None
            }
            Some(Value::Bool(b)) => Some(*b),
            Some(other) => {
                self.unknown(label, "EXEC_FUNCTION", other, &["true", "false"]);
                None
            }
        };

        if self.errors.len() > before {
            return None;
        }
        Some(PartSpec {
            name: name?.to_string(),
            available_obj: object?.id.clone(),
            orientation: orientation?,
            modifications: modifications?,
            connections: connections?,
            exec_function: exec_function?,
        })
    }

    fn orientation(&mut self, part: &str, v: &Value, shape: &ObjectShape) -> Option<Orientation> {
        match shape {
            ObjectShape::Cuboid { dims } => {
                let triple: Option<Vec<f64>> = v
                    .as_array()
                    .filter(|a| a.len() == 3)
                    .and_then(|a| a.iter().map(Value::as_f64).collect());
                let Some(triple) = triple else {
                    self.issue(
                        part,
                        "ORIENTATION",
                        IssueCode::UnknownToken,
                        format!(
                            "cuboid orientation must be [dim_x, dim_y, dim_z], got {}",
                            describe(v)
                        ),
                    );
                    return None;
                };
                let mut want = *dims;
                let mut got = [triple[0], triple[1], triple[2]];
                want.sort_by(f64::total_cmp);
                got.sort_by(f64::total_cmp);
                if want.iter().zip(&got).any(|(a, b)| (a - b).abs() > 1e-9) {
                    self.issue(
                        part,
                        "ORIENTATION",
                        IssueCode::BadOrientationPermutation,
                        format!(
                            "{} is not a permutation of the object dimensions {:?}",
                            describe(v),
                            dims
                        ),
                    );
                    return None;
                }
                Some(Orientation::Cuboid([triple[0], triple[1], triple[2]]))
            }
            ObjectShape::Cylinder { .. } => {
                let allowed = tokens::CYLINDER_AXIS_TOKENS.map(|(t, _)| t);
                match v.as_str().and_then(tokens::parse_cylinder_axis) {
                    Some(axis) => Some(Orientation::Cylinder(axis)),
                    None => {
                        self.unknown(part, "ORIENTATION", v, &allowed);
                        None
                    }
                }
            }
        }
    }

    fn modifications(&mut self, part: &str, v: Option<&Value>) -> Option<Vec<ModificationSpec>> {
        let items = match v {
            None | Some(Value::Null) => return Some(Vec::new()),
            Some(Value::Array(items)) => items,
            Some(other) => {
                self.unknown(part, "MODIFICATIONS", other, &[]);
                return None;
            }
        };
        let mut out = Vec::with_capacity(items.len());
        let mut ok = true;
        let mut seen = HashSet::new();
        for (j, item) in items.iter().enumerate() {
            let prefix = format!("MODIFICATIONS[{j}].");
            let Some(obj) = item.as_object() else {
                self.unknown(part, &format!("MODIFICATIONS[{j}]"), item, &[]);
                ok = false;
                continue;
            };
            let name = self.string_field(obj, part, &prefix, "NAME");
            if let Some(n) = name {
                if !is_valid_modification_name(n) {
                    self.issue(
                        part,
                        &format!("{prefix}NAME"),
                        IssueCode::BadNamePattern,
                        format!("modification name {n} must look like HOLE_<numeral>"),
                    );
                    ok = false;
                } else if !seen.insert(n.to_string()) {
                    self.issue(
                        part,
                        &format!("{prefix}NAME"),
                        IssueCode::DuplicateName,
                        format!("modification {n} is declared twice"),
                    );
                    ok = false;
                }
            }
            let mod_type = self
                .string_field(obj, part, &prefix, "TYPE")
                .and_then(|t| match t {
                    "HOLE" => Some(ModificationType::Hole),
                    _ => {
                        self.unknown(
                            part,
                            &format!("{prefix}TYPE"),
                            &Value::String(t.to_string()),
                            &tokens::MODIFICATION_TYPES,
                        );
                        None
                    }
                });
            let mut align = [None; 3];
            for axis in Axis::ALL {
                let key = ALIGN_KEYS[axis.index()];
                if let Some(t) = self.string_field(obj, part, &prefix, key) {
                    align[axis.index()] = tokens::parse_modification_align(axis, t);
                    if align[axis.index()].is_none() {
                        self.unknown(
                            part,
                            &format!("{prefix}{key}"),
                            &Value::String(t.to_string()),
                            &tokens::modification_align_tokens(axis),
                        );
                    }
                }
            }
            let align = match align {
                [Some(x), Some(y), Some(z)] => {
                    let through = [x, y, z]
                        .iter()
                        .filter(|a| matches!(a, ModAlign::Through(_)))
                        .count();
                    if through != 1 {
                        self.issue(
                            part,
                            &format!("{prefix}ALIGN"),
                            IssueCode::UnknownToken,
                            format!(
                                "exactly one of ALIGN_X/ALIGN_Y/ALIGN_Z must be a *_FULL or *_HALF token, found {through}"
                            ),
                        );
                        None
                    } else {
                        Some([x, y, z])
                    }
                }
                _ => None,
            };
            match (name, mod_type, align) {
                (Some(n), Some(mod_type), Some(align)) if ok => out.push(ModificationSpec {
                    name: n.to_string(),
                    mod_type,
                    align,
                }),
                _ => ok = false,
            }
        }
        ok.then_some(out)
    }

    fn connections(&mut self, part: &str, v: Option<&Value>) -> Option<Vec<ConnectionSpec>> {
        let items = match v {
            None | Some(Value::Null) => {
                self.missing(part, "CONNECTIONS");
                return None;
            }
            Some(Value::Array(items)) => items,
            Some(other) => {
                self.unknown(part, "CONNECTIONS", other, &[]);
                return None;
            }
        };
        let mut out = Vec::with_capacity(items.len());
        let mut ok = true;
        for (j, item) in items.iter().enumerate() {
            match self.connection(part, j, item) {
                Some(c) => out.push(c),
                None => ok = false,
            }
        }
        ok.then_some(out)
    }

    fn connection(&mut self, part: &str, j: usize, item: &Value) -> Option<ConnectionSpec> {
        let prefix = format!("CONNECTIONS[{j}].");
        let Some(obj) = item.as_object() else {
            self.unknown(part, &format!("CONNECTIONS[{j}]"), item, &[]);
            return None;
        };
        let before = self.errors.len();
        let to_part = self.string_field(obj, part, &prefix, "TO_PART");
        let contact_type = self.string_field(obj, part, &prefix, "CONTACT_TYPE");

        let contact = match contact_type {
            Some("SURFACE") => {
                let to_face = self
                    .string_field(obj, part, &prefix, "TO_FACE")
                    .and_then(|t| {
                        let face = tokens::parse_face(t);
                        if face.is_none() {
                            let allowed = tokens::FACE_TOKENS.map(|(t, _)| t);
                            self.unknown(
                                part,
                                &format!("{prefix}TO_FACE"),
                                &Value::String(t.to_string()),
                                &allowed,
                            );
                        }
                        face
                    });
                let mut align: [Option<Align>; 3] = [None; 3];
                for axis in Axis::ALL {
                    let key = ALIGN_KEYS[axis.index()];
                    if let Some(t) = self.string_field(obj, part, &prefix, key) {
                        align[axis.index()] = tokens::parse_connection_align(axis, t);
                        if align[axis.index()].is_none() {
                            self.unknown(
                                part,
                                &format!("{prefix}{key}"),
                                &Value::String(t.to_string()),
                                &tokens::connection_align_tokens(axis),
                            );
                        }
                    }
                }
                match (to_face, align) {
                    (Some(to_face), [Some(x), Some(y), Some(z)]) => Some(Contact::Surface {
                        to_face,
                        align: [x, y, z],
                    }),
                    _ => None,
                }
            }
            Some("INSERTED") => self
                .string_field(obj, part, &prefix, "TO_MODIFICATION")
                .map(|m| Contact::Inserted {
                    to_modification: m.to_string(),
                }),
            Some(other) => {
                self.unknown(
                    part,
                    &format!("{prefix}CONTACT_TYPE"),
                    &Value::String(other.to_string()),
                    &tokens::CONTACT_TOKENS,
                );
                None
            }
            None => None,
        };

        let joint = match obj.get("TYPE") {
            None | Some(Value::Null) => match contact {
                Some(Contact::Inserted { .. }) => Some(JointType::NonFixed),
                _ => Some(JointType::Fixed),
            },
            Some(Value::String(s)) if s == "FIXED" => Some(JointType::Fixed),
            Some(Value::String(s)) if s == "NON_FIXED" => Some(JointType::NonFixed),
            Some(other) => {
                self.unknown(part, &format!("{prefix}TYPE"), other, &tokens::JOINT_TOKENS);
                None
            }
        };

        if self.errors.len() > before {
            return None;
        }
        Some(ConnectionSpec {
            to_part: to_part?.to_string(),
            contact: contact?,
            joint: joint?,
        })
    }

    fn check_names(&mut self, parts: &[Option<PartSpec>]) {
        let mut seen = HashSet::new();
        for p in parts.iter().flatten() {
            if !seen.insert(p.name.as_str()) {
                self.issue(
                    &p.name,
                    "NAME",
                    IssueCode::DuplicateName,
                    format!("part name {} is used more than once", p.name),
                );
            }
        }
    }

    fn check_references(&mut self, parts: &[Option<PartSpec>], raw_names: &HashSet<&str>) {
        let known: Vec<&PartSpec> = parts.iter().flatten().collect();
        for p in &known {
            for (j, c) in p.connections.iter().enumerate() {
                let field = format!("CONNECTIONS[{j}].TO_PART");
                if c.to_part == p.name {
                    self.issue(
                        &p.name,
                        &field,
                        IssueCode::DanglingReference,
                        "a part cannot connect to itself",
                    );
                    continue;
                }
                let Some(target) = known.iter().find(|q| q.name == c.to_part) else {
                    // A target that failed its own validation is already
                    // reported; only flag names that appear nowhere.
                    if !raw_names.contains(c.to_part.as_str()) {
                        self.issue(
                            &p.name,
                            &field,
                            IssueCode::DanglingReference,
                            format!("TO_PART {} does not name a part in the plan", c.to_part),
                        );
                    }
                    continue;
                };
                if let Contact::Inserted { to_modification } = &c.contact {
                    if !target.modifications.iter().any(|m| &m.name == to_modification) {
                        self.issue(
                            &p.name,
                            &format!("CONNECTIONS[{j}].TO_MODIFICATION"),
                            IssueCode::DanglingReference,
                            format!("{} has no modification named {to_modification}", target.name),
                        );
                    }
                }
            }
        }
    }
}
