use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Status {
    Pass,
    Fail,
    Skip,
}

impl Status {
    pub fn from_ok(ok: bool) -> Self {
        if ok {
            Status::Pass
        } else {
            Status::Fail
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct CheckRecord {
    pub name: String,
    pub status: Status,
    pub details: String,
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct Summary {
    pub pass: usize,
    pub fail: usize,
    pub skip: usize,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Report {
    pub command: String,
    pub checks: Vec<CheckRecord>,
    pub summary: Summary,
    #[serde(default, skip_serializing_if = "serde_json::Value::is_null")]
    pub data: serde_json::Value,
}

impl Report {
    pub fn new(command: impl Into<String>) -> Self {
        Self { command: command.into(), checks: Vec::new(), summary: Summary::default(), data: serde_json::Value::Null }
    }

    pub fn push(&mut self, name: impl Into<String>, status: Status, details: impl Into<String>) {
        match status {
            Status::Pass => self.summary.pass += 1,
            Status::Fail => self.summary.fail += 1,
            Status::Skip => self.summary.skip += 1,
        }
        self.checks.push(CheckRecord { name: name.into(), status, details: details.into() });
    }

    pub fn check(&mut self, name: impl Into<String>, ok: bool, details: impl Into<String>) {
        self.push(name, Status::from_ok(ok), details);
    }

    pub fn info(&mut self, name: impl Into<String>, details: impl Into<String>) {
        self.push(name, Status::Skip, details);
    }

    pub fn exit_code(&self) -> i32 {
        if self.summary.fail == 0 {
            0
        } else {
            1
        }
    }

    pub fn render(&self) -> String {
        let mut out = format!("{}\n", self.command);
        let w = self.checks.iter().map(|c| c.name.chars().count()).max().unwrap_or(0);
        for c in &self.checks {
            let tag = match c.status {
                Status::Pass => "PASS",
                Status::Fail => "FAIL",
                Status::Skip => "INFO",
            };
            let pad = w - c.name.chars().count();
            let _ = writeln!(out, "  {tag}  {}{}  {}", c.name, " ".repeat(pad), c.details);
        }
        let s = self.summary;
        let _ = writeln!(out, "{} passed, {} failed, {} informational", s.pass, s.fail, s.skip);
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn exit_codes() {
        let mut r = Report::new("x");
        r.check("a", true, "");
        r.info("b", "note");
        assert_eq!(r.exit_code(), 0);
        r.check("c", false, "bad");
        assert_eq!(r.exit_code(), 1);
        assert_eq!(r.summary, Summary { pass: 1, fail: 1, skip: 1 });
        assert!(r.render().contains("FAIL  c"));
    }
}
