//! INI documents with line-aware field diagnostics.

use std::fmt;
use std::path::PathBuf;
use std::str::FromStr;

use ini::Ini;

/// Where a config problem was found.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Location {
    pub origin: String,
    pub line: Option<usize>,
}

impl fmt::Display for Location {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.line {
            Some(line) => write!(f, "{}:{}", self.origin, line),
            None => write!(f, "{}", self.origin),
        }
    }
}

#[derive(Debug, thiserror::Error)]
pub enum ConfigError {
    #[error("{at}: syntax error: {msg}")]
    Syntax { at: Location, msg: String },
    #[error("{at}: missing `{key}` in [{section}]")]
    Missing {
        at: Location,
        section: String,
        key: String,
    },
    #[error("{at}: [{section}] {key}: {msg}")]
    Invalid {
        at: Location,
        section: String,
        key: String,
        msg: String,
    },
    #[error("{at}: unknown key `{key}` in [{section}]")]
    UnknownKey {
        at: Location,
        section: String,
        key: String,
    },
    #[error("{at}: unknown section [{section}]")]
    UnknownSection { at: Location, section: String },
    #[error("unknown scenario `{0}`: not a readable file or a built-in (see `bemodel list`)")]
    UnknownScenario(String),
    #[error("cannot read {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("bad override `{0}`: expected section.key=value")]
    Override(String),
}

/// A parsed INI document plus its source text for line lookups.
#[derive(Debug, Clone)]
pub struct Document {
    origin: String,
    ini: Ini,
    text: String,
}

impl Document {
    pub fn load(origin: impl Into<String>, text: &str) -> Result<Self, ConfigError> {
        let origin = origin.into();
        let ini = Ini::load_from_str(text).map_err(|e| ConfigError::Syntax {
            at: Location {
                origin: origin.clone(),
                line: Some(e.line + 1),
            },
            msg: e.msg.into_owned(),
        })?;
        if let Some(general) = ini.section(None::<String>) {
            if let Some((key, _)) = general.iter().next() {
                return Err(ConfigError::UnknownKey {
                    at: Location {
                        origin: origin.clone(),
                        line: find_line(text, None, key),
                    },
                    section: "<top level>".into(),
                    key: key.into(),
                });
            }
        }
        Ok(Self {
            origin,
            ini,
            text: text.to_owned(),
        })
    }

    pub fn origin(&self) -> &str {
        &self.origin
    }

    pub fn has_section(&self, section: &str) -> bool {
        self.ini.section(Some(section)).is_some()
    }

    pub fn get(&self, section: &str, key: &str) -> Option<&str> {
        self.ini
            .section(Some(section))
            .and_then(|p| p.get(key))
            .map(str::trim)
    }

    /// Replaces (or adds) a value; used for command-line overrides.
    pub fn set(&mut self, section: &str, key: &str, value: &str) {
        self.ini.with_section(Some(section)).set(key, value);
    }

    /// Applies a `section.key=value` override.
    pub fn apply_override(&mut self, spec: &str) -> Result<(), ConfigError> {
        let bad = || ConfigError::Override(spec.to_owned());
        let (path, value) = spec.split_once('=').ok_or_else(bad)?;
        let (section, key) = path.trim().split_once('.').ok_or_else(bad)?;
        if section.is_empty() || key.is_empty() {
            return Err(bad());
        }
        self.set(section, key, value.trim());
        Ok(())
    }

    pub fn at(&self, section: &str, key: &str) -> Location {
        Location {
            origin: self.origin.clone(),
            line: find_line(&self.text, Some(section), key),
        }
    }

    pub fn invalid(&self, section: &str, key: &str, msg: impl Into<String>) -> ConfigError {
        ConfigError::Invalid {
            at: self.at(section, key),
            section: section.into(),
            key: key.into(),
            msg: msg.into(),
        }
    }

    pub fn missing(&self, section: &str, key: &str) -> ConfigError {
        ConfigError::Missing {
            at: Location {
                origin: self.origin.clone(),
                line: None,
            },
            section: section.into(),
            key: key.into(),
        }
    }

    pub fn require(&self, section: &str, key: &str) -> Result<&str, ConfigError> {
        self.get(section, key).ok_or_else(|| self.missing(section, key))
    }

    /// Parses an optional scalar field.
    pub fn parse<T>(&self, section: &str, key: &str) -> Result<Option<T>, ConfigError>
    where
        T: FromStr,
        T::Err: fmt::Display,
    {
        match self.get(section, key) {
            None => Ok(None),
            Some(raw) => parse_scalar(raw)
                .map(Some)
                .map_err(|e| self.invalid(section, key, e)),
        }
    }

    pub fn parse_or<T>(&self, section: &str, key: &str, default: T) -> Result<T, ConfigError>
    where
        T: FromStr,
        T::Err: fmt::Display,
    {
        Ok(self.parse(section, key)?.unwrap_or(default))
    }

    /// Parses an optional comma-separated list.
    pub fn parse_list<T>(&self, section: &str, key: &str) -> Result<Option<Vec<T>>, ConfigError>
    where
        T: FromStr,
        T::Err: fmt::Display,
    {
        match self.get(section, key) {
            None => Ok(None),
            Some(raw) => split_list(raw)
                .into_iter()
                .map(parse_scalar)
                .collect::<Result<Vec<T>, String>>()
                .map(Some)
                .map_err(|e| self.invalid(section, key, e)),
        }
    }

    /// Rejects sections and keys outside `allowed` (catches typos).
    pub fn check_keys(&self, allowed: &[(&str, &[&str])]) -> Result<(), ConfigError> {
        for (name, props) in self.ini.iter() {
            let Some(name) = name else { continue };
            let Some((_, keys)) = allowed.iter().find(|(s, _)| *s == name) else {
                return Err(ConfigError::UnknownSection {
                    at: Location {
                        origin: self.origin.clone(),
                        line: find_section_line(&self.text, name),
                    },
                    section: name.into(),
                });
            };
            if keys.contains(&"*") {
                continue;
            }
            for (key, _) in props.iter() {
                if !keys.contains(&key) {
                    return Err(ConfigError::UnknownKey {
                        at: self.at(name, key),
                        section: name.into(),
                        key: key.into(),
                    });
                }
            }
        }
        Ok(())
    }

    /// Keys of a section, in file order.
    pub fn keys(&self, section: &str) -> Vec<String> {
        self.ini
            .section(Some(section))
            .map(|p| p.iter().map(|(k, _)| k.to_owned()).collect())
            .unwrap_or_default()
    }
}

pub fn split_list(raw: &str) -> Vec<&str> {
    raw.split(',').map(str::trim).filter(|s| !s.is_empty()).collect()
}

fn parse_scalar<T>(raw: &str) -> Result<T, String>
where
    T: FromStr,
    T::Err: fmt::Display,
{
    let raw = raw.trim();
    raw.parse::<T>().map_err(|e| format!("cannot parse `{raw}`: {e}"))
}

fn find_section_line(text: &str, section: &str) -> Option<usize> {
    text.lines()
        .position(|l| l.trim() == format!("[{section}]"))
        .map(|i| i + 1)
}

/// Best-effort line number of `key` inside `section` (`None` for the
/// top level).
fn find_line(text: &str, section: Option<&str>, key: &str) -> Option<usize> {
    let mut current: Option<String> = None;
    for (i, line) in text.lines().enumerate() {
        let t = line.trim();
        if t.starts_with('[') && t.ends_with(']') {
            current = Some(t[1..t.len() - 1].trim().to_owned());
            continue;
        }
        if current.as_deref() != section {
            continue;
        }
        if let Some((k, _)) = t.split_once(['=', ':']) {
            if k.trim() == key {
                return Some(i + 1);
            }
        }
    }
    None
}

#[cfg(test)]
mod tests {
    use super::*;

    const TEXT: &str = "[model]\nn = 3\nm = 1 # effective dimension\n\n[grid]\npoints = 12, x\n";

    #[test]
    fn fields_and_lines() {
        let doc = Document::load("test.ini", TEXT).unwrap();
        assert_eq!(doc.parse::<u32>("model", "n").unwrap(), Some(3));
        assert_eq!(doc.parse::<f64>("model", "m").unwrap(), Some(1.0));
        let err = doc.parse_list::<f64>("grid", "points").unwrap_err();
        assert_eq!(err.to_string(), "test.ini:6: [grid] points: cannot parse `x`: invalid float literal");
        assert!(doc.require("model", "warp").is_err());
    }

    #[test]
    fn unknown_keys_and_sections() {
        let doc = Document::load("t", TEXT).unwrap();
        let err = doc.check_keys(&[("model", &["n", "m"])]).unwrap_err();
        assert!(matches!(err, ConfigError::UnknownSection { ref at, .. } if at.line == Some(5)));
        let err = doc.check_keys(&[("model", &["n"]), ("grid", &["points"])]).unwrap_err();
        assert!(matches!(err, ConfigError::UnknownKey { ref at, .. } if at.line == Some(3)));
        assert!(Document::load("t", "stray = 1\n[model]\n").is_err());
    }

    #[test]
    fn overrides() {
        let mut doc = Document::load("t", TEXT).unwrap();
        doc.apply_override("model.n=4").unwrap();
        assert_eq!(doc.get("model", "n"), Some("4"));
        assert!(doc.apply_override("nonsense").is_err());
    }
}
