//! Run manifests embedded in every output file.

use std::collections::BTreeMap;
use std::fmt::Display;

use serde::{Deserialize, Serialize};

pub const TOOL: &str = "typeb";
pub const VERSION: &str = env!("CARGO_PKG_VERSION");

/// What produced a file: subcommand, every parameter, seeds, version.
///
/// Parameters are kept as strings in a sorted map so that two runs with the
/// same flags produce the same manifest text. The wall time is recorded in
/// JSON output only; CSV output leaves it out so that identical runs give
/// byte-identical files.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RunManifest {
    pub tool: String,
    pub version: String,
    pub subcommand: String,
    pub parameters: BTreeMap<String, String>,
    pub seeds: Vec<u64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub wall_time_seconds: Option<f64>,
}

impl RunManifest {
    pub fn new(subcommand: &str) -> Self {
        Self {
            tool: TOOL.to_owned(),
            version: VERSION.to_owned(),
            subcommand: subcommand.to_owned(),
            parameters: BTreeMap::new(),
            seeds: Vec::new(),
            wall_time_seconds: None,
        }
    }

    pub fn param(mut self, key: &str, value: impl Display) -> Self {
        self.parameters.insert(key.to_owned(), value.to_string());
        self
    }

    pub fn seeds(mut self, seeds: &[u64]) -> Self {
        self.seeds = seeds.to_vec();
        self
    }

    /// `# key: value` lines for the top of a CSV file.
    pub fn csv_comment(&self) -> String {
        let mut out = format!("# tool: {} {}\n# subcommand: {}\n", self.tool, self.version, self.subcommand);
        for (k, v) in &self.parameters {
            out.push_str(&format!("# {k}: {v}\n"));
        }
        if !self.seeds.is_empty() {
            let list: Vec<String> = self.seeds.iter().map(u64::to_string).collect();
            out.push_str(&format!("# seeds: {}\n", list.join(",")));
        }
        out
    }
}

/// Reads the manifest comment block back from CSV text.
pub fn parse_csv_comment(text: &str) -> BTreeMap<String, String> {
    text.lines()
        .map_while(|l| l.strip_prefix("# "))
        .filter_map(|l| l.split_once(": "))
        .map(|(k, v)| (k.to_owned(), v.to_owned()))
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn comment_block_round_trips_parameters() {
        let m = RunManifest::new("clt").param("k", 4).param("q", 0.5).seeds(&[0, 1]);
        let text = m.csv_comment();
        let parsed = parse_csv_comment(&text);
        assert_eq!(parsed["k"], "4");
        assert_eq!(parsed["q"], "0.5");
        assert_eq!(parsed["seeds"], "0,1");
        assert!(!text.contains("wall"));
    }
}
