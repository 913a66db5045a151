//! Plain-text `key = value` configuration with per-command sections.
//!
//! ```text
//! # global keys apply to every command
//! units = ev-ps
//!
//! [evolve]
//! delta_e = 4.37e-6
//! pulse = gaussian alpha=1.5707963267948966 t=150 tau=9.46
//! ```
//!
//! Precedence, lowest first: global keys, the section of the running command,
//! command-line flags. A key set at a higher level replaces every value of
//! that key from the lower levels, including the repeatable `pulse` key.
//! Repeating any other key inside one level is an error.

use std::collections::BTreeMap;
use std::fmt;

use super::CliError;

/// Keys that may appear more than once within one level.
const REPEATABLE: &[&str] = &["pulse"];

/// Parsed configuration file: global entries plus one list per section.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct ConfigFile {
    pub global: Vec<(String, String)>,
    pub sections: BTreeMap<String, Vec<(String, String)>>,
}

impl ConfigFile {
    pub fn parse(text: &str) -> Result<Self, CliError> {
        let mut file = ConfigFile::default();
        let mut current: Option<String> = None;
        for (n, raw) in text.lines().enumerate() {
            let line = raw.trim();
            if line.is_empty() || line.starts_with('#') || line.starts_with(';') {
                continue;
            }
            if let Some(rest) = line.strip_prefix('[') {
                let name = rest
                    .strip_suffix(']')
                    .ok_or_else(|| {
                        CliError::Config(format!("line {}: unterminated section header", n + 1))
                    })?
                    .trim();
                if name.is_empty() {
                    return Err(CliError::Config(format!(
                        "line {}: empty section name",
                        n + 1
                    )));
                }
                file.sections.entry(name.to_string()).or_default();
                current = Some(name.to_string());
                continue;
            }
            let (key, value) = line.split_once('=').ok_or_else(|| {
                CliError::Config(format!("line {}: expected `key = value`", n + 1))
            })?;
            let key = normalize_key(key);
            if key.is_empty() {
                return Err(CliError::Config(format!("line {}: empty key", n + 1)));
            }
            let entry = (key, value.trim().to_string());
            match &current {
                Some(section) => file
                    .sections
                    .get_mut(section)
                    .expect("section inserted")
                    .push(entry),
                None => file.global.push(entry),
            }
        }
        Ok(file)
    }

    fn section(&self, name: &str) -> &[(String, String)] {
        self.sections.get(name).map(Vec::as_slice).unwrap_or(&[])
    }
}

/// `delta-e` and `delta_e` name the same key.
pub fn normalize_key(key: &str) -> String {
    key.trim().to_ascii_lowercase().replace('-', "_")
}

/// Where a resolved value came from.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Origin {
    File,
    Section,
    Flag,
}

impl fmt::Display for Origin {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Origin::File => "file",
            Origin::Section => "section",
            Origin::Flag => "flag",
        })
    }
}

/// Resolved key/value settings for one command.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct Settings {
    values: BTreeMap<String, (Origin, Vec<String>)>,
}

fn layer(
    entries: &[(String, String)],
    level: &str,
) -> Result<BTreeMap<String, Vec<String>>, CliError> {
    let mut out: BTreeMap<String, Vec<String>> = BTreeMap::new();
    for (k, v) in entries {
        let slot = out.entry(k.clone()).or_default();
        if !slot.is_empty() && !REPEATABLE.contains(&k.as_str()) {
            return Err(CliError::Config(format!(
                "key `{k}` given twice in {level}"
            )));
        }
        slot.push(v.clone());
    }
    Ok(out)
}

impl Settings {
    /// Merges global file keys, the `[command]` section and flags.
    pub fn resolve(
        command: &str,
        file: Option<&ConfigFile>,
        flags: &[(String, String)],
    ) -> Result<Self, CliError> {
        let mut values = BTreeMap::new();
        let mut levels = Vec::new();
        if let Some(file) = file {
            levels.push((layer(&file.global, "the global section")?, Origin::File));
            levels.push((
                layer(file.section(command), &format!("section [{command}]"))?,
                Origin::Section,
            ));
        }
        levels.push((layer(flags, "the command-line flags")?, Origin::Flag));
        for (level, origin) in levels {
            for (k, v) in level {
                values.insert(k, (origin, v));
            }
        }
        Ok(Self { values })
    }

    /// Rejects keys outside `allowed`.
    pub fn restrict(&self, command: &str, allowed: &[&str]) -> Result<(), CliError> {
        for (k, (origin, _)) in &self.values {
            if !allowed.contains(&k.as_str()) {
                return Err(CliError::Config(format!(
                    "unknown key `{k}` for {command} (from {origin})"
                )));
            }
        }
        Ok(())
    }

    pub fn contains(&self, key: &str) -> bool {
        self.values.contains_key(key)
    }

    pub fn all(&self, key: &str) -> &[String] {
        self.values
            .get(key)
            .map(|(_, v)| v.as_slice())
            .unwrap_or(&[])
    }

    pub fn str(&self, key: &str) -> Option<&str> {
        self.all(key).first().map(String::as_str)
    }

    pub fn f64(&self, key: &str) -> Result<Option<f64>, CliError> {
        self.str(key).map(|v| parse_f64(key, v)).transpose()
    }

    pub fn usize(&self, key: &str) -> Result<Option<usize>, CliError> {
        self.str(key)
            .map(|v| {
                v.parse::<usize>().map_err(|_| {
                    CliError::Config(format!("`{key}` must be a non-negative integer, got `{v}`"))
                })
            })
            .transpose()
    }

    /// Comma-separated list of numbers.
    pub fn f64_list(&self, key: &str) -> Result<Option<Vec<f64>>, CliError> {
        self.str(key)
            .map(|v| {
                v.split(',')
                    .map(str::trim)
                    .filter(|s| !s.is_empty())
                    .map(|s| parse_f64(key, s))
                    .collect()
            })
            .transpose()
    }

    /// `(key, value, origin)` for the provenance header.
    pub fn entries(&self) -> impl Iterator<Item = (&str, &str, Origin)> {
        self.values
            .iter()
            .flat_map(|(k, (o, vs))| vs.iter().map(move |v| (k.as_str(), v.as_str(), *o)))
    }
}

/// Accepts plain decimals plus `pi`, `pi/N` and `N*pi` for angles.
pub fn parse_f64(key: &str, v: &str) -> Result<f64, CliError> {
    let bad = || CliError::Config(format!("`{key}` must be a number, got `{v}`"));
    let s = v.trim();
    let pi = std::f64::consts::PI;
    let signed = |s: &str| -> Option<f64> {
        let (sign, body) = match s.strip_prefix('-') {
            Some(b) => (-1.0, b),
            None => (1.0, s),
        };
        let x = if body == "pi" {
            pi
        } else if let Some(d) = body.strip_prefix("pi/") {
            pi / d.parse::<f64>().ok()?
        } else {
            body.strip_suffix("*pi")?.parse::<f64>().ok()? * pi
        };
        Some(sign * x)
    };
    signed(s).or_else(|| s.parse::<f64>().ok()).ok_or_else(bad)
}

#[cfg(test)]
mod tests {
    use super::*;

    const TEXT: &str = "\
# comment
units = ev-ps
delta-e = 1

[evolve]
delta_e = 2
pulse = kick alpha=1 t=0
pulse = kick alpha=1 t=1

[sweep-surface]
eps_step = 0.1
";

    fn flags(kv: &[(&str, &str)]) -> Vec<(String, String)> {
        kv.iter()
            .map(|(k, v)| (k.to_string(), v.to_string()))
            .collect()
    }

    #[test]
    fn parses_sections() {
        let f = ConfigFile::parse(TEXT).unwrap();
        assert_eq!(f.global.len(), 2);
        assert_eq!(f.global[1].0, "delta_e");
        assert_eq!(f.sections["evolve"].len(), 3);
        assert_eq!(f.sections["sweep-surface"].len(), 1);
    }

    #[test]
    fn precedence() {
        let f = ConfigFile::parse(TEXT).unwrap();
        let s = Settings::resolve("evolve", Some(&f), &[]).unwrap();
        assert_eq!(s.f64("delta_e").unwrap(), Some(2.0));
        assert_eq!(s.all("pulse").len(), 2);
        assert_eq!(s.str("units"), Some("ev-ps"));

        let s = Settings::resolve(
            "evolve",
            Some(&f),
            &flags(&[("delta_e", "3"), ("pulse", "kick alpha=2 t=5")]),
        )
        .unwrap();
        assert_eq!(s.f64("delta_e").unwrap(), Some(3.0));
        assert_eq!(s.all("pulse"), ["kick alpha=2 t=5"]);

        let s = Settings::resolve("sweep-surface", Some(&f), &[]).unwrap();
        assert_eq!(s.f64("delta_e").unwrap(), Some(1.0));
        assert!(!s.contains("pulse"));
    }

    #[test]
    fn duplicates_rejected() {
        let f = ConfigFile::parse("a = 1\na = 2\n").unwrap();
        assert!(matches!(
            Settings::resolve("evolve", Some(&f), &[]),
            Err(CliError::Config(_))
        ));
        assert!(Settings::resolve("evolve", None, &flags(&[("tf", "1"), ("tf", "2")])).is_err());
    }

    #[test]
    fn malformed_lines() {
        assert!(ConfigFile::parse("[evolve\n").is_err());
        assert!(ConfigFile::parse("just words\n").is_err());
        assert!(ConfigFile::parse("= 3\n").is_err());
    }

    #[test]
    fn restrict_unknown() {
        let s = Settings::resolve("evolve", None, &flags(&[("bogus", "1")])).unwrap();
        assert!(s.restrict("evolve", &["tf"]).is_err());
    }

    #[test]
    fn angle_literals() {
        let pi = std::f64::consts::PI;
        assert_eq!(parse_f64("a", "pi/2").unwrap(), pi / 2.0);
        assert_eq!(parse_f64("a", "-pi").unwrap(), -pi);
        assert_eq!(parse_f64("a", "2*pi").unwrap(), 2.0 * pi);
        assert_eq!(parse_f64("a", "1e-3").unwrap(), 1e-3);
        assert!(parse_f64("a", "abc").is_err());
    }
}
