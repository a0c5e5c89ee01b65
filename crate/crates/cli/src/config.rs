//! Line-oriented `key = value` configs with `[section]` headers. Keys before
//! the first header belong to the `run` section.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::str::FromStr;

use crate::failure::{Failure, Outcome};

pub const RUN: &str = "run";

/// One tunable: `section.key` with its default as written in a config.
#[derive(Debug, Clone, Copy)]
pub struct Param {
    pub section: &'static str,
    pub key: &'static str,
    pub default: &'static str,
    pub help: &'static str,
}

pub const fn param(section: &'static str, key: &'static str, default: &'static str, help: &'static str) -> Param {
    Param { section, key, default, help }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Entry {
    pub value: String,
    pub line: usize,
}

/// Parsed but not yet validated config text.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct RawConfig {
    pub entries: BTreeMap<(String, String), Entry>,
}

impl RawConfig {
    pub fn parse(text: &str) -> Outcome<Self> {
        let mut entries = BTreeMap::new();
        let mut section = RUN.to_string();
        for (k, raw) in text.lines().enumerate() {
            let line = k + 1;
            let t = raw.trim();
            if t.is_empty() || t.starts_with('#') {
                continue;
            }
            if let Some(rest) = t.strip_prefix('[') {
                let name = rest
                    .strip_suffix(']')
                    .map(str::trim)
                    .filter(|n| !n.is_empty() && n.chars().all(|c| c.is_ascii_alphanumeric() || c == '_' || c == '-'))
                    .ok_or_else(|| Failure::config(Some(line), t, "malformed section header"))?;
                section = name.to_string();
                continue;
            }
            let (key, value) = t
                .split_once('=')
                .ok_or_else(|| Failure::config(Some(line), t, "expected `key = value`"))?;
            let key = key.trim();
            if key.is_empty() {
                return Err(Failure::config(Some(line), t, "empty key"));
            }
            let field = format!("{section}.{key}");
            let entry = Entry { value: value.trim().to_string(), line };
            if let Some(prev) = entries.insert((section.clone(), key.to_string()), entry) {
                return Err(Failure::config(Some(line), field, format!("duplicate key (first set on line {})", prev.line)));
            }
        }
        Ok(Self { entries })
    }

    pub fn get(&self, section: &str, key: &str) -> Option<&Entry> {
        self.entries.get(&(section.to_string(), key.to_string()))
    }
}

/// Config values for one scenario with defaults filled in.
#[derive(Debug, Clone)]
pub struct Resolved {
    pub scenario: &'static str,
    params: &'static [Param],
    values: BTreeMap<(String, String), Entry>,
}

/// Keys every scenario accepts in the `run` section.
pub const RUN_PARAMS: [Param; 3] = [
    param(RUN, "scenario", "", "scenario name"),
    param(RUN, "seed", "1", "base seed for data and initialization"),
    param(RUN, "out_dir", "", "output directory (default out/<scenario>)"),
];

impl Resolved {
    /// Rejects keys outside `RUN_PARAMS` and `params`.
    pub fn new(scenario: &'static str, params: &'static [Param], raw: &RawConfig) -> Outcome<Self> {
        let known = |s: &str, k: &str| RUN_PARAMS.iter().chain(params).any(|p| p.section == s && p.key == k);
        for ((s, k), e) in &raw.entries {
            if !known(s, k) {
                return Err(Failure::config(
                    Some(e.line),
                    format!("{s}.{k}"),
                    format!("unknown key for scenario {scenario}"),
                ));
            }
        }
        let mut values = BTreeMap::new();
        for p in RUN_PARAMS.iter().chain(params) {
            let entry = raw
                .get(p.section, p.key)
                .cloned()
                .unwrap_or(Entry { value: p.default.to_string(), line: 0 });
            values.insert((p.section.to_string(), p.key.to_string()), entry);
        }
        values.insert((RUN.into(), "scenario".into()), Entry { value: scenario.into(), line: 0 });
        Ok(Self { scenario, params, values })
    }

    pub fn set(&mut self, section: &str, key: &str, value: String) {
        if let Some(e) = self.values.get_mut(&(section.to_string(), key.to_string())) {
            e.value = value;
        }
    }

    pub fn raw(&self, section: &str, key: &str) -> (&str, Option<usize>) {
        let e = self
            .values
            .get(&(section.to_string(), key.to_string()))
            .unwrap_or_else(|| panic!("scenario {} reads undeclared key {section}.{key}", self.scenario));
        (&e.value, (e.line > 0).then_some(e.line))
    }

    pub fn get<T: FromStr>(&self, section: &str, key: &str) -> Outcome<T>
    where
        T::Err: std::fmt::Display,
    {
        let (v, line) = self.raw(section, key);
        v.parse::<T>()
            .map_err(|e| Failure::config(line, format!("{section}.{key}"), format!("cannot parse {v:?}: {e}")))
    }

    /// Comma-separated list.
    pub fn list<T: FromStr>(&self, section: &str, key: &str) -> Outcome<Vec<T>>
    where
        T::Err: std::fmt::Display,
    {
        let (v, line) = self.raw(section, key);
        v.split(',')
            .map(str::trim)
            .filter(|s| !s.is_empty())
            .map(|s| {
                s.parse::<T>()
                    .map_err(|e| Failure::config(line, format!("{section}.{key}"), format!("cannot parse {s:?}: {e}")))
            })
            .collect()
    }

    /// Failure pointing at `section.key`, for values that parse but are unusable.
    pub fn reject(&self, section: &str, key: &str, message: impl Into<String>) -> Failure {
        Failure::config(self.raw(section, key).1, format!("{section}.{key}"), message)
    }

    pub fn seed(&self) -> Outcome<u64> {
        self.get(RUN, "seed")
    }

    /// Round-trippable text with every value spelled out.
    pub fn echo(&self) -> String {
        let mut out = String::new();
        for p in &RUN_PARAMS {
            let _ = writeln!(out, "{} = {}", p.key, self.raw(RUN, p.key).0);
        }
        let mut current = "";
        for p in self.params {
            if p.section != current {
                let _ = writeln!(out, "\n[{}]", p.section);
                current = p.section;
            }
            let _ = writeln!(out, "# {}\n{} = {}", p.help, p.key, self.raw(p.section, p.key).0);
        }
        out
    }
}
