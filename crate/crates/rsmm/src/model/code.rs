use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Deserializer, Serialize, Serializer};

/// Position of a practice in the maturity matrix: focus area, capability
/// and maturity level. Rendered as `f.c.l` with no padding.
///
/// Ordering is numeric on `(focus_area, capability, level)`, so `1.2.10`
/// sorts after `1.2.9`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct PracticeCode {
    pub focus_area: u32,
    pub capability: u32,
    pub level: u32,
}

impl PracticeCode {
    pub const fn new(focus_area: u32, capability: u32, level: u32) -> Self {
        Self {
            focus_area,
            capability,
            level,
        }
    }

    pub fn capability_ref(&self) -> CapabilityRef {
        CapabilityRef::new(self.focus_area, self.capability)
    }
}

impl fmt::Display for PracticeCode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}.{}.{}", self.focus_area, self.capability, self.level)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
#[error("invalid practice code `{input}`: expected `focus_area.capability.level`")]
pub struct CodeParseError {
    pub input: String,
}

fn parse_component(part: &str) -> Option<u32> {
    // Canonical form only: decimal digits, no sign, no leading zeros.
    if part.is_empty() || !part.bytes().all(|b| b.is_ascii_digit()) {
        return None;
    }
    if part.len() > 1 && part.starts_with('0') {
        return None;
    }
    part.parse().ok()
}

impl FromStr for PracticeCode {
    type Err = CodeParseError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let err = || CodeParseError { input: s.to_string() };
        let mut parts = s.trim().split('.');
        let f = parts.next().and_then(parse_component).ok_or_else(err)?;
        let c = parts.next().and_then(parse_component).ok_or_else(err)?;
        let l = parts.next().and_then(parse_component).ok_or_else(err)?;
        if parts.next().is_some() {
            return Err(err());
        }
        Ok(Self::new(f, c, l))
    }
}

impl Serialize for PracticeCode {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        serializer.collect_str(self)
    }
}

impl<'de> Deserialize<'de> for PracticeCode {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        let s = String::deserialize(deserializer)?;
        s.parse().map_err(serde::de::Error::custom)
    }
}

/// A capability within a focus area, rendered `f.c`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct CapabilityRef {
    pub focus_area: u32,
    pub capability: u32,
}

impl CapabilityRef {
    pub const fn new(focus_area: u32, capability: u32) -> Self {
        Self { focus_area, capability }
    }

    pub fn at_level(&self, level: u32) -> PracticeCode {
        PracticeCode::new(self.focus_area, self.capability, level)
    }
}

impl fmt::Display for CapabilityRef {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}.{}", self.focus_area, self.capability)
    }
}

impl FromStr for CapabilityRef {
    type Err = CodeParseError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let err = || CodeParseError { input: s.to_string() };
        let (f, c) = s.trim().split_once('.').ok_or_else(err)?;
        Ok(Self::new(
            parse_component(f).ok_or_else(err)?,
            parse_component(c).ok_or_else(err)?,
        ))
    }
}

impl Serialize for CapabilityRef {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        serializer.collect_str(self)
    }
}

impl<'de> Deserialize<'de> for CapabilityRef {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        let s = String::deserialize(deserializer)?;
        s.parse().map_err(serde::de::Error::custom)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn parses_canonical_codes() {
        assert_eq!("2.3.5".parse::<PracticeCode>().unwrap(), PracticeCode::new(2, 3, 5));
        assert_eq!("1.2.10".parse::<PracticeCode>().unwrap().level, 10);
    }

    #[test]
    fn rejects_malformed_codes() {
        for bad in ["", "1.2", "1.2.3.4", "a.b.c", "1..3", "01.2.3", "-1.2.3", "1.2.+3"] {
            assert!(bad.parse::<PracticeCode>().is_err(), "{bad} should not parse");
        }
    }

    #[test]
    fn orders_numerically() {
        let mut codes: Vec<PracticeCode> = ["1.2.10", "1.2.9", "1.10.1", "1.2.1"]
            .iter()
            .map(|s| s.parse().unwrap())
            .collect();
        codes.sort();
        let text: Vec<String> = codes.iter().map(ToString::to_string).collect();
        assert_eq!(text, ["1.2.1", "1.2.9", "1.2.10", "1.10.1"]);
    }

    #[test]
    fn serializes_as_map_key() {
        let mut map = std::collections::BTreeMap::new();
        map.insert(PracticeCode::new(1, 2, 3), true);
        let json = serde_json::to_string(&map).unwrap();
        assert_eq!(json, r#"{"1.2.3":true}"#);
        let back: std::collections::BTreeMap<PracticeCode, bool> = serde_json::from_str(&json).unwrap();
        assert_eq!(back, map);
    }

    proptest! {
        #[test]
        fn display_parse_round_trip(f in 0u32..1000, c in 0u32..1000, l in 0u32..1000) {
            let code = PracticeCode::new(f, c, l);
            prop_assert_eq!(code.to_string().parse::<PracticeCode>().unwrap(), code);
        }
    }
}
