//! Summary lines and CSV artifacts.

use std::path::{Path, PathBuf};

/// One checked quantity: `measured <= bound + margin` unless `pass` was set
/// explicitly.
#[derive(Clone, Debug, PartialEq)]
pub struct Check {
    pub name: String,
    pub measured: f64,
    pub bound: f64,
    pub margin: f64,
    pub pass: bool,
    pub note: String,
}

impl Check {
    pub fn at_most(name: impl Into<String>, measured: f64, bound: f64) -> Self {
        Self::with_margin(name, measured, bound, 0.0)
    }

    pub fn with_margin(name: impl Into<String>, measured: f64, bound: f64, margin: f64) -> Self {
        Self {
            name: name.into(),
            measured,
            bound,
            margin,
            pass: measured <= bound + margin,
            note: String::new(),
        }
    }

    /// `measured >= bound`.
    pub fn at_least(name: impl Into<String>, measured: f64, bound: f64) -> Self {
        let mut c = Self::at_most(name, measured, bound);
        c.pass = measured >= bound;
        c
    }

    pub fn note(mut self, note: impl Into<String>) -> Self {
        self.note = note.into();
        self
    }

    pub fn status(&self) -> &'static str {
        if self.pass {
            "PASS"
        } else {
            "FAIL"
        }
    }
}

pub const SUMMARY_HEADER: &str = "name,measured,bound,margin,status";

/// Header, then one line per check with failures first; order is otherwise
/// preserved.
pub fn emit_summary(checks: &[Check]) -> String {
    let mut s = String::from(SUMMARY_HEADER);
    s.push('\n');
    let mut sorted: Vec<&Check> = checks.iter().collect();
    sorted.sort_by_key(|c| c.pass);
    for c in sorted {
        s.push_str(&format!(
            "{},{:?},{:?},{:?},{}",
            c.name.replace(',', ";"),
            c.measured,
            c.bound,
            c.margin,
            c.status()
        ));
        if !c.note.is_empty() {
            s.push_str(&format!(",{}", c.note.replace(',', ";")));
        }
        s.push('\n');
    }
    s
}

/// `0` when every check passes, `1` otherwise.
pub fn exit_status(checks: &[Check]) -> i32 {
    if checks.iter().all(|c| c.pass) {
        0
    } else {
        1
    }
}

/// Output directory; created on first write.
#[derive(Clone, Debug)]
pub struct OutDir {
    root: PathBuf,
}

impl OutDir {
    pub fn new(root: impl Into<PathBuf>) -> Self {
        Self { root: root.into() }
    }

    pub fn path(&self) -> &Path {
        &self.root
    }

    pub fn write(&self, name: &str, contents: &str) -> std::io::Result<PathBuf> {
        std::fs::create_dir_all(&self.root)?;
        let p = self.root.join(name);
        std::fs::write(&p, contents)?;
        Ok(p)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn empty_summary_is_header_only() {
        assert_eq!(emit_summary(&[]), format!("{SUMMARY_HEADER}\n"));
        assert_eq!(exit_status(&[]), 0);
    }

    #[test]
    fn single_pass_line() {
        let s = emit_summary(&[Check::at_most("a", 1.0, 2.0)]);
        let lines: Vec<&str> = s.lines().collect();
        assert_eq!(lines, vec![SUMMARY_HEADER, "a,1.0,2.0,0.0,PASS"]);
    }

    #[test]
    fn failures_sort_first() {
        let checks = [
            Check::at_most("p1", 0.0, 1.0),
            Check::with_margin("f1", 3.0, 1.0, 0.5),
            Check::at_most("p2", 0.0, 1.0),
            Check::at_most("f2", 2.0, 1.0).note("x, y"),
        ];
        let names: Vec<String> = emit_summary(&checks)
            .lines()
            .skip(1)
            .map(|l| l.split(',').next().unwrap().to_string())
            .collect();
        assert_eq!(names, ["f1", "f2", "p1", "p2"]);
        assert!(emit_summary(&checks).contains("FAIL,x; y"));
        assert_eq!(exit_status(&checks), 1);
    }

    #[test]
    fn nan_bound_fails() {
        assert!(!Check::at_most("n", 0.0, f64::NAN).pass);
    }
}
