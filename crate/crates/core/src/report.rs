//! Pass/fail reports with counterexample witnesses.

use serde::Serialize;

/// Maximum number of failing witnesses kept in a report.
pub const MAX_WITNESSES: usize = 32;

/// One evaluated inequality `lhs <= rhs`, tagged with the points that
/// produced it. `margin = rhs - lhs`; it is negative on a violation.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Witness {
    pub points: Vec<f64>,
    pub lhs: f64,
    pub rhs: f64,
    pub margin: f64,
    pub slack: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CheckReport {
    pub check: String,
    pub passed: bool,
    /// Number of inequalities (or points) evaluated.
    pub evaluated: usize,
    pub violations: usize,
    /// Smallest margin seen, whether or not it was a violation.
    pub min_margin: Option<f64>,
    /// The worst violation; on ties the lexicographically smallest points.
    pub worst: Option<Witness>,
    pub witnesses: Vec<Witness>,
    pub notes: Vec<String>,
}

impl CheckReport {
    pub fn failing_points(&self) -> impl Iterator<Item = &[f64]> {
        self.witnesses.iter().map(|w| w.points.as_slice())
    }
}

/// Accumulates inequality evaluations into a [`CheckReport`].
#[derive(Debug, Clone)]
pub struct ReportBuilder {
    report: CheckReport,
    forced_failure: bool,
}

fn lex_less(a: &[f64], b: &[f64]) -> bool {
    a.iter()
        .zip(b)
        .find(|(x, y)| x != y)
        .map(|(x, y)| x < y)
        .unwrap_or(a.len() < b.len())
}

impl ReportBuilder {
    pub fn new(check: impl Into<String>) -> Self {
        Self {
            report: CheckReport {
                check: check.into(),
                passed: true,
                evaluated: 0,
                violations: 0,
                min_margin: None,
                worst: None,
                witnesses: Vec::new(),
                notes: Vec::new(),
            },
            forced_failure: false,
        }
    }

    /// Records `lhs <= rhs` (violated when `lhs > rhs + slack`). Returns
    /// whether the inequality held.
    pub fn le(&mut self, points: &[f64], lhs: f64, rhs: f64, slack: f64) -> bool {
        self.inequality(points, lhs, rhs, rhs - lhs, slack)
    }

    /// Records `lhs >= rhs` with the given slack.
    pub fn ge(&mut self, points: &[f64], lhs: f64, rhs: f64, slack: f64) -> bool {
        self.inequality(points, lhs, rhs, lhs - rhs, slack)
    }

    fn inequality(&mut self, points: &[f64], lhs: f64, rhs: f64, margin: f64, slack: f64) -> bool {
        let r = &mut self.report;
        r.evaluated += 1;
        if !margin.is_nan() {
            r.min_margin = Some(r.min_margin.map_or(margin, |m| m.min(margin)));
        }
        let ok = margin >= -slack;
        if !ok {
            self.violation(Witness {
                points: points.to_vec(),
                lhs,
                rhs,
                margin,
                slack,
            });
        }
        ok
    }

    /// Records `|lhs - rhs| <= slack`.
    pub fn close(&mut self, points: &[f64], lhs: f64, rhs: f64, slack: f64) -> bool {
        let diff = (lhs - rhs).abs();
        let r = &mut self.report;
        r.evaluated += 1;
        let margin = slack - diff;
        r.min_margin = Some(r.min_margin.map_or(margin, |m| m.min(margin)));
        let ok = diff <= slack;
        if !ok {
            self.violation(Witness {
                points: points.to_vec(),
                lhs,
                rhs,
                margin: -diff,
                slack,
            });
        }
        ok
    }

    /// Records a violation that is not an inequality (e.g. missing witness).
    pub fn violation(&mut self, w: Witness) {
        let r = &mut self.report;
        r.passed = false;
        r.violations += 1;
        let worse = match &r.worst {
            None => true,
            Some(cur) => w.margin < cur.margin || (w.margin == cur.margin && lex_less(&w.points, &cur.points)),
        };
        if worse {
            r.worst = Some(w.clone());
        }
        if r.witnesses.len() < MAX_WITNESSES {
            r.witnesses.push(w);
        }
    }

    pub fn count(&mut self) {
        self.report.evaluated += 1;
    }

    pub fn note(&mut self, note: impl Into<String>) {
        self.report.notes.push(note.into());
    }

    /// Marks the report failed without a witness (precondition failures).
    pub fn fail(&mut self, note: impl Into<String>) {
        self.forced_failure = true;
        self.note(note);
    }

    pub fn passed(&self) -> bool {
        self.report.passed && !self.forced_failure
    }

    pub fn finish(mut self) -> CheckReport {
        if self.forced_failure {
            self.report.passed = false;
        }
        self.report
    }
}
