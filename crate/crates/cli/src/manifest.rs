//! Plain-text `key=value` run manifests.
//!
//! Every output directory gets exactly one `manifest.txt`. Besides the
//! descriptive fields it stores the full argument vector as `arg.N` entries,
//! which is what `resdeconv replay` re-executes.

use std::fmt::Display;
use std::fs;
use std::path::Path;

use crate::error::{AtPath, CliError, CliResult};

pub const MANIFEST_NAME: &str = "manifest.txt";

#[derive(Debug, Clone, Default, PartialEq)]
pub struct Manifest {
    entries: Vec<(String, String)>,
}

impl Manifest {
    pub fn new(command: &str, args: &[String]) -> Self {
        let mut m = Manifest::default();
        m.set("command", command);
        m.set("version", env!("CARGO_PKG_VERSION"));
        for (i, a) in args.iter().enumerate() {
            m.set(format!("arg.{i}"), a);
        }
        m
    }

    /// Appends an entry. Newlines in values are replaced by spaces so the
    /// file stays one entry per line.
    pub fn set(&mut self, key: impl Into<String>, value: impl Display) {
        let value = value.to_string().replace(['\n', '\r'], " ");
        self.entries.push((key.into(), value));
    }

    pub fn get(&self, key: &str) -> Option<&str> {
        self.entries.iter().find(|(k, _)| k == key).map(|(_, v)| v.as_str())
    }

    pub fn args(&self) -> Vec<String> {
        (0..)
            .map_while(|i| self.get(&format!("arg.{i}")).map(str::to_string))
            .collect()
    }

    pub fn render(&self) -> String {
        self.entries.iter().map(|(k, v)| format!("{k}={v}\n")).collect()
    }

    pub fn parse(text: &str) -> CliResult<Self> {
        let mut m = Manifest::default();
        for (no, line) in text.lines().enumerate() {
            if line.trim().is_empty() {
                continue;
            }
            let (k, v) = line
                .split_once('=')
                .ok_or_else(|| CliError::Usage(format!("manifest line {} has no '='", no + 1)))?;
            m.entries.push((k.to_string(), v.to_string()));
        }
        Ok(m)
    }

    pub fn write_to(&self, dir: &Path) -> CliResult<()> {
        let path = dir.join(MANIFEST_NAME);
        fs::write(&path, self.render()).at(&path)
    }

    pub fn read_from(path: &Path) -> CliResult<Self> {
        Manifest::parse(&fs::read_to_string(path).at(path)?)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn round_trip_and_args() {
        let args = vec!["deconv".to_string(), "--out".into(), "a=b".into()];
        let mut m = Manifest::new("deconv", &args);
        m.set("note", "two\nlines");
        let back = Manifest::parse(&m.render()).unwrap();
        assert_eq!(back, Manifest::parse(&back.render()).unwrap());
        assert_eq!(back.args(), args);
        assert_eq!(back.get("note"), Some("two lines"));
        assert_eq!(back.get("command"), Some("deconv"));
    }

    #[test]
    fn rejects_lines_without_separator() {
        assert!(Manifest::parse("command=x\nbogus\n").is_err());
    }
}
