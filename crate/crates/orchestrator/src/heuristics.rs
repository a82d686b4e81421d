//! Per-category hints: the minimal set of parts and one constraint.

use std::path::Path;

use serde::{Deserialize, Serialize};
use serde_json::{Map, Value};

use crate::category::Category;
use crate::OrchestratorError;

#[derive(Debug, Clone, Default, PartialEq)]
pub struct Heuristics {
    minimal_parts: Map<String, Value>,
    constraints: Map<String, Value>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CategoryHeuristics {
    /// Part type and count, in file order.
    pub minimal_parts: Vec<(String, u32)>,
    pub constraint: Option<String>,
}

impl Heuristics {
    pub fn from_json(text: &str) -> Result<Heuristics, OrchestratorError> {
        let v: Value = serde_json::from_str(text).map_err(|e| OrchestratorError::Data(format!("heuristics: {e}")))?;
        let section = |key: &str| -> Result<Map<String, Value>, OrchestratorError> {
            match v.get(key) {
                Some(Value::Object(m)) => Ok(m.clone()),
                None => Ok(Map::new()),
                Some(_) => Err(OrchestratorError::Data(format!("heuristics: {key} must be an object"))),
            }
        };
        Ok(Heuristics {
            minimal_parts: section("minimal_parts")?,
            constraints: section("constraints")?,
        })
    }

    pub fn load(path: &Path) -> Result<Heuristics, OrchestratorError> {
        Heuristics::from_json(&crate::read(path)?)
    }

    pub fn bundled() -> Heuristics {
        Heuristics::from_json(include_str!("../../../data/heuristics.json")).expect("bundled heuristics parse")
    }

    fn lookup<'a>(map: &'a Map<String, Value>, category: Category) -> Option<&'a Value> {
        map.iter()
            .find(|(k, _)| k.eq_ignore_ascii_case(category.name()))
            .map(|(_, v)| v)
    }

    /// Hints for `category`. When no minimal set is listed, the part types
    /// of `template` stand in.
    pub fn for_category(&self, category: Category, template: &Value) -> CategoryHeuristics {
        let minimal_parts = match Heuristics::lookup(&self.minimal_parts, category) {
            Some(Value::Object(m)) => m
                .iter()
                .map(|(k, v)| (k.clone(), v.as_u64().unwrap_or(1) as u32))
                .collect(),
            _ => parts_of_template(template),
        };
        let constraint = Heuristics::lookup(&self.constraints, category)
            .and_then(Value::as_str)
            .map(str::to_string);
        CategoryHeuristics {
            minimal_parts,
            constraint,
        }
    }
}

/// Counts part types in a template, `WHEEL_3` counting as a `Wheel`.
pub fn parts_of_template(template: &Value) -> Vec<(String, u32)> {
    let mut out: Vec<(String, u32)> = Vec::new();
    let parts = template.as_array().cloned().unwrap_or_default();
    for p in &parts {
        let Some(name) = p.get("NAME").and_then(Value::as_str) else {
            continue;
        };
        let kind = name.rsplit_once('_').map_or(name, |(head, _)| head);
        let kind = title_case(kind);
        match out.iter_mut().find(|(k, _)| *k == kind) {
            Some((_, n)) => *n += 1,
            None => out.push((kind, 1)),
        }
    }
    out
}

fn title_case(s: &str) -> String {
    s.split('_')
        .map(|w| {
            let mut c = w.chars();
            match c.next() {
                Some(f) => f.to_ascii_uppercase().to_string() + &c.as_str().to_ascii_lowercase(),
                None => String::new(),
            }
        })
        .collect::<Vec<_>>()
        .join("_")
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn template_part_types() {
        let t: Value = serde_json::from_str(r#"[{"NAME":"CARGO_1"},{"NAME":"WHEEL_1"},{"NAME":"WHEEL_2"},{"NAME":"SIDE_PANEL_1"}]"#).unwrap();
        assert_eq!(
            parts_of_template(&t),
            vec![("Cargo".into(), 1), ("Wheel".into(), 2), ("Side_Panel".into(), 1)]
        );
    }

    #[test]
    fn bundled_file_covers_every_category() {
        let h = Heuristics::bundled();
        for c in Category::ALL {
            assert!(h.for_category(c, &Value::Null).constraint.is_some(), "{c:?}");
        }
        let hammer = h.for_category(Category::Hammer, &Value::Null);
        assert_eq!(hammer.minimal_parts, vec![("Head".into(), 1), ("Handle".into(), 1)]);
    }
}
