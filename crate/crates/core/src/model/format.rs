//! On-disk network description.
//!
//! The file is JSON with a fixed set of field names. Unknown fields and
//! duplicate object keys are rejected; semantic checks happen later in
//! [`validate_network`](super::validate_network).

use std::fmt;
use std::marker::PhantomData;

use serde::de::{MapAccess, Visitor};
use serde::ser::SerializeMap;
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RawNetwork {
    pub variables: Vec<RawVariable>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RawVariable {
    pub name: String,
    pub values: Vec<String>,
    #[serde(default)]
    pub parents: Vec<String>,
    #[serde(default)]
    pub concepts: Vec<RawConcept>,
    pub cpt: Vec<RawRow>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RawConcept {
    pub name: String,
    pub values: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RawRow {
    pub given: StrictMap<String>,
    pub p: StrictMap<f64>,
}

/// A JSON object kept in document order that refuses repeated keys.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct StrictMap<V>(pub Vec<(String, V)>);

impl<V> StrictMap<V> {
    pub fn get(&self, key: &str) -> Option<&V> {
        self.0.iter().find(|(k, _)| k == key).map(|(_, v)| v)
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn iter(&self) -> impl Iterator<Item = (&str, &V)> {
        self.0.iter().map(|(k, v)| (k.as_str(), v))
    }
}

impl<V> FromIterator<(String, V)> for StrictMap<V> {
    fn from_iter<T: IntoIterator<Item = (String, V)>>(iter: T) -> Self {
        StrictMap(iter.into_iter().collect())
    }
}

impl<V: Serialize> Serialize for StrictMap<V> {
    fn serialize<S: Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        let mut map = serializer.serialize_map(Some(self.0.len()))?;
        for (k, v) in &self.0 {
            map.serialize_entry(k, v)?;
        }
        map.end()
    }
}

impl<'de, V: Deserialize<'de>> Deserialize<'de> for StrictMap<V> {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> std::result::Result<Self, D::Error> {
        struct StrictVisitor<V>(PhantomData<V>);

        impl<'de, V: Deserialize<'de>> Visitor<'de> for StrictVisitor<V> {
            type Value = StrictMap<V>;

            fn expecting(&self, f: &mut fmt::Formatter) -> fmt::Result {
                f.write_str("an object without repeated keys")
            }

            fn visit_map<A: MapAccess<'de>>(self, mut access: A) -> std::result::Result<Self::Value, A::Error> {
                let mut entries: Vec<(String, V)> = Vec::new();
                while let Some((k, v)) = access.next_entry::<String, V>()? {
                    if entries.iter().any(|(seen, _)| *seen == k) {
                        return Err(serde::de::Error::custom(format_args!("duplicate key `{k}`")));
                    }
                    entries.push((k, v));
                }
                Ok(StrictMap(entries))
            }
        }

        deserializer.deserialize_map(StrictVisitor(PhantomData))
    }
}

impl RawNetwork {
    pub fn from_json(text: &str) -> Result<RawNetwork> {
        serde_json::from_str(text).map_err(|e| Error::Parse(e.to_string()))
    }

    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("network descriptions always serialize");
        s.push('\n');
        s
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const MINIMAL: &str = r#"{"variables":[{"name":"A","values":["t","f"],"cpt":[{"given":{},"p":{"t":0.5,"f":0.5}}]}]}"#;

    #[test]
    fn parses_minimal_document() {
        let raw = RawNetwork::from_json(MINIMAL).unwrap();
        assert_eq!(raw.variables.len(), 1);
        assert!(raw.variables[0].parents.is_empty());
        assert_eq!(raw.variables[0].cpt[0].p.get("t"), Some(&0.5));
    }

    #[test]
    fn rejects_unknown_fields() {
        let text = MINIMAL.replace(r#""name":"A""#, r#""name":"A","color":"red""#);
        let err = RawNetwork::from_json(&text).unwrap_err();
        assert!(err.to_string().contains("unknown field"), "{err}");
    }

    #[test]
    fn rejects_duplicate_keys() {
        let text = MINIMAL.replace(r#""t":0.5,"f":0.5"#, r#""t":0.5,"t":0.5"#);
        let err = RawNetwork::from_json(&text).unwrap_err();
        assert!(err.to_string().contains("duplicate key"), "{err}");
    }

    #[test]
    fn reports_position() {
        let err = RawNetwork::from_json("{\"variables\": [\n  {\"name\": 3}]}").unwrap_err();
        assert!(err.to_string().contains("line 2"), "{err}");
    }

    #[test]
    fn json_round_trips() {
        let raw = RawNetwork::from_json(MINIMAL).unwrap();
        assert_eq!(RawNetwork::from_json(&raw.to_json()).unwrap(), raw);
    }
}
