use serde_json::{Map, Value};

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
#[error("invalid JSON: {0}")]
pub struct JsonSyntaxError(pub String);

/// Uppercases and replaces hyphens with underscores.
pub fn normalize_token(s: &str) -> String {
    s.to_uppercase().replace('-', "_")
}

/// Recursively normalizes keys and string values. Numbers and booleans are
/// left alone.
pub fn normalize_value(value: &Value) -> Value {
    match value {
        Value::Object(map) => {
            let mut out = Map::with_capacity(map.len());
            for (k, v) in map {
                out.insert(normalize_token(k), normalize_value(v));
            }
            Value::Object(out)
        }
        Value::Array(items) => Value::Array(items.iter().map(normalize_value).collect()),
        Value::String(s) => Value::String(normalize_token(s)),
        other => other.clone(),
    }
}

/// Strips a markdown code fence if the text contains one.
pub fn strip_code_fence(raw: &str) -> &str {
    let Some(start) = raw.find("```") else {
        return raw.trim();
    };
    let after = &raw[start + 3..];
    // Skip the info string (e.g. "json") up to the end of the line.
    let body_start = after.find('\n').map(|i| i + 1).unwrap_or(after.len());
    let body = &after[body_start..];
    match body.find("```") {
        Some(end) => body[..end].trim(),
        None => body.trim(),
    }
}

/// Parses raw model output into normalized JSON.
pub fn normalize_raw(raw: &str) -> Result<Value, JsonSyntaxError> {
    let text = strip_code_fence(raw);
    let value = match serde_json::from_str::<Value>(text) {
        Ok(v) => v,
        Err(first_err) => {
            // Fall back to the outermost bracketed span when the model wraps
            // JSON in prose.
            let span = outer_json_span(text).ok_or_else(|| JsonSyntaxError(first_err.to_string()))?;
            serde_json::from_str::<Value>(span).map_err(|_| JsonSyntaxError(first_err.to_string()))?
        }
    };
    Ok(normalize_value(&value))
}

fn outer_json_span(text: &str) -> Option<&str> {
    let start = text.find(['[', '{'])?;
    let close = if text.as_bytes()[start] == b'[' { ']' } else { '}' };
    let end = text.rfind(close)?;
    (end > start).then(|| &text[start..=end])
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;
    use serde_json::json;

    #[test]
    fn keys_are_uppercased_and_hyphens_replaced() {
        let v = normalize_value(&json!({"align-x": "front", "Exec_function": true}));
        assert_eq!(v, json!({"ALIGN_X": "FRONT", "EXEC_FUNCTION": true}));
    }

    #[test]
    fn already_normal_is_fixed_point() {
        let v = json!({"ALIGN_X": "CENTER"});
        assert_eq!(normalize_value(&v), v);
    }

    #[test]
    fn mixed_case_values_normalize() {
        assert_eq!(normalize_token("Top_Bottom"), "TOP_BOTTOM");
        assert_eq!(normalize_token("non-fixed"), "NON_FIXED");
    }

    #[test]
    fn numbers_untouched() {
        let v = normalize_value(&json!({"orientation": [200, 40.5, 20]}));
        assert_eq!(v, json!({"ORIENTATION": [200, 40.5, 20]}));
    }

    #[test]
    fn code_fences_are_stripped() {
        let raw = "Here is the plan:\n```json\n[{\"name\": \"a-1\"}]\n```\nThanks";
        assert_eq!(normalize_raw(raw).unwrap(), json!([{"NAME": "A_1"}]));
    }

    #[test]
    fn prose_wrapped_json_is_recovered() {
        let raw = "The plan is [ {\"name\": \"x_1\"} ] as requested.";
        assert_eq!(normalize_raw(raw).unwrap(), json!([{"NAME": "X_1"}]));
    }

    #[test]
    fn syntax_errors_reported() {
        assert!(normalize_raw("[{\"name\": }").is_err());
        assert!(normalize_raw("").is_err());
    }

    fn arb_json() -> impl Strategy<Value = Value> {
        let leaf = prop_oneof![
            Just(Value::Null),
            any::<bool>().prop_map(Value::Bool),
            any::<i32>().prop_map(|n| json!(n)),
            "[a-zA-Z_\\-ßéü ]{0,12}".prop_map(Value::String),
        ];
        leaf.prop_recursive(4, 48, 6, |inner| {
            prop_oneof![
                prop::collection::vec(inner.clone(), 0..6).prop_map(Value::Array),
                prop::collection::btree_map("[a-zA-Z_\\-]{1,10}", inner, 0..6)
                    .prop_map(|m| Value::Object(m.into_iter().collect())),
            ]
        })
    }

    proptest! {
        #[test]
        fn normalization_is_idempotent(v in arb_json()) {
            let once = normalize_value(&v);
            prop_assert_eq!(normalize_value(&once), once);
        }
    }
}
