//! Verification reports, serialized as line-delimited JSON.

use std::collections::BTreeMap;

use serde::Serialize;

use crate::print::print_structure;
use crate::structure::{Elem, Structure};

pub const SCHEMA_VERSION: u32 = 1;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Status {
    Pass,
    Fail,
    NotFinitelyTestable,
}

/// A counterexample: printed structures plus whatever else pins it down.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct Witness {
    pub note: String,
    pub structures: Vec<String>,
    #[serde(skip_serializing_if = "Vec::is_empty")]
    pub elements: Vec<Elem>,
}

impl Witness {
    pub fn new(note: impl Into<String>, structures: &[&Structure]) -> Witness {
        Witness {
            note: note.into(),
            structures: structures.iter().map(|s| print_structure(s)).collect(),
            elements: Vec::new(),
        }
    }

    pub fn with_elements(mut self, elements: impl IntoIterator<Item = Elem>) -> Witness {
        self.elements = elements.into_iter().collect();
        self
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct Check {
    pub name: String,
    pub status: Status,
    /// How many instances were examined.
    pub instances: usize,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub note: Option<String>,
    #[serde(skip_serializing_if = "Vec::is_empty")]
    pub witnesses: Vec<Witness>,
}

/// At most this many witnesses are kept per failing check.
pub const MAX_WITNESSES: usize = 5;

impl Check {
    /// Pass when `witnesses` is empty, fail otherwise.
    pub fn from_witnesses(name: impl Into<String>, instances: usize, mut witnesses: Vec<Witness>) -> Check {
        witnesses.truncate(MAX_WITNESSES);
        Check {
            name: name.into(),
            status: if witnesses.is_empty() {
                Status::Pass
            } else {
                Status::Fail
            },
            instances,
            note: None,
            witnesses,
        }
    }

    pub fn untestable(name: impl Into<String>, note: impl Into<String>) -> Check {
        Check {
            name: name.into(),
            status: Status::NotFinitelyTestable,
            instances: 0,
            note: Some(note.into()),
            witnesses: Vec::new(),
        }
    }

    pub fn with_note(mut self, note: impl Into<String>) -> Check {
        self.note = Some(note.into());
        self
    }

    pub fn passed(&self) -> bool {
        self.status != Status::Fail
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct VerificationReport {
    pub schema: u32,
    pub command: String,
    pub caps: BTreeMap<String, usize>,
    pub checks: Vec<Check>,
    pub counts: BTreeMap<String, usize>,
    /// Only filled in on request, so that default output is reproducible.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub wall_ms: Option<u128>,
}

impl VerificationReport {
    pub fn new(command: impl Into<String>) -> VerificationReport {
        VerificationReport {
            schema: SCHEMA_VERSION,
            command: command.into(),
            caps: BTreeMap::new(),
            checks: Vec::new(),
            counts: BTreeMap::new(),
            wall_ms: None,
        }
    }

    pub fn cap(mut self, name: &str, value: usize) -> Self {
        self.caps.insert(name.to_string(), value);
        self
    }

    pub fn push(&mut self, check: Check) {
        self.checks.push(check);
    }

    pub fn count(&mut self, name: &str, value: usize) {
        self.counts.insert(name.to_string(), value);
    }

    pub fn passed(&self) -> bool {
        self.checks.iter().all(Check::passed)
    }

    pub fn check(&self, name: &str) -> Option<&Check> {
        self.checks.iter().find(|c| c.name == name)
    }

    pub fn extend(&mut self, other: VerificationReport) {
        self.checks.extend(other.checks);
        self.counts.extend(other.counts);
        self.caps.extend(other.caps);
    }

    /// Header record, one record per check, then a summary record.
    pub fn to_json_lines(&self) -> String {
        #[derive(Serialize)]
        struct Header<'a> {
            record: &'static str,
            schema: u32,
            command: &'a str,
            caps: &'a BTreeMap<String, usize>,
        }
        #[derive(Serialize)]
        struct CheckLine<'a> {
            record: &'static str,
            #[serde(flatten)]
            check: &'a Check,
        }
        #[derive(Serialize)]
        struct Summary<'a> {
            record: &'static str,
            passed: bool,
            failed_checks: usize,
            counts: &'a BTreeMap<String, usize>,
            #[serde(skip_serializing_if = "Option::is_none")]
            wall_ms: Option<u128>,
        }
        let mut lines = vec![serde_json::to_string(&Header {
            record: "report",
            schema: self.schema,
            command: &self.command,
            caps: &self.caps,
        })
        .expect("serializable")];
        for c in &self.checks {
            lines.push(
                serde_json::to_string(&CheckLine {
                    record: "check",
                    check: c,
                })
                .expect("serializable"),
            );
        }
        lines.push(
            serde_json::to_string(&Summary {
                record: "summary",
                passed: self.passed(),
                failed_checks: self.checks.iter().filter(|c| !c.passed()).count(),
                counts: &self.counts,
                wall_ms: self.wall_ms,
            })
            .expect("serializable"),
        );
        let mut out = lines.join("\n");
        out.push('\n');
        out
    }
}
