//! Residual bookkeeping shared by every verification pass.

use serde::Serialize;

use crate::expr::Point;
use crate::sampling::{Samples, SkippedPoint};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum CheckKind {
    /// Passes when the worst residual is below tolerance.
    Residual,
    /// Passes when the smallest magnitude stays above tolerance.
    NonVanishing,
}

/// Outcome of one named check over a point set.
#[derive(Debug, Clone, Serialize)]
pub struct CheckResult {
    pub name: String,
    pub kind: CheckKind,
    /// Largest residual (or smallest magnitude, for `NonVanishing`).
    pub worst: f64,
    pub witness: Option<Point>,
    pub tol: f64,
    pub evaluated: usize,
    pub passed: bool,
}

impl CheckResult {
    fn new(name: &str, kind: CheckKind, tol: f64) -> Self {
        CheckResult {
            name: name.to_string(),
            kind,
            worst: match kind {
                CheckKind::Residual => 0.0,
                CheckKind::NonVanishing => f64::INFINITY,
            },
            witness: None,
            tol,
            evaluated: 0,
            passed: true,
        }
    }

    fn record(&mut self, p: &Point, value: f64) {
        self.evaluated += 1;
        let value = if value.is_nan() {
            match self.kind {
                CheckKind::Residual => f64::INFINITY,
                CheckKind::NonVanishing => 0.0,
            }
        } else {
            value.abs()
        };
        let worse = match self.kind {
            CheckKind::Residual => value > self.worst,
            CheckKind::NonVanishing => value < self.worst,
        };
        if worse || self.witness.is_none() {
            if worse {
                self.worst = value;
            }
            if worse || self.evaluated == 1 {
                self.witness = Some(*p);
            }
        }
        self.passed = match self.kind {
            CheckKind::Residual => self.worst < self.tol,
            CheckKind::NonVanishing => self.worst > self.tol,
        };
    }
}

/// Accumulates named checks in first-seen order.
#[derive(Debug, Clone)]
pub struct Checks {
    tol: f64,
    results: Vec<CheckResult>,
}

impl Checks {
    pub fn new(tol: f64) -> Self {
        Checks { tol, results: Vec::new() }
    }

    fn slot(&mut self, name: &str, kind: CheckKind, tol: f64) -> &mut CheckResult {
        let idx = match self.results.iter().position(|r| r.name == name) {
            Some(i) => i,
            None => {
                self.results.push(CheckResult::new(name, kind, tol));
                self.results.len() - 1
            }
        };
        &mut self.results[idx]
    }

    /// Declares a check without recording a value, so it is listed even when
    /// no point applies.
    pub fn declare(&mut self, name: &str, kind: CheckKind) {
        let tol = self.tol;
        self.slot(name, kind, tol);
    }

    pub fn residual(&mut self, name: &str, p: &Point, value: f64) {
        let tol = self.tol;
        self.slot(name, CheckKind::Residual, tol).record(p, value);
    }

    pub fn residual_tol(&mut self, name: &str, tol: f64, p: &Point, value: f64) {
        self.slot(name, CheckKind::Residual, tol).record(p, value);
    }

    pub fn nonvanishing(&mut self, name: &str, p: &Point, value: f64) {
        let tol = self.tol;
        self.slot(name, CheckKind::NonVanishing, tol).record(p, value);
    }

    pub fn finish(self) -> Vec<CheckResult> {
        self.results
    }
}

pub fn all_passed(results: &[CheckResult]) -> bool {
    results.iter().all(|r| r.passed)
}

/// Named checks evaluated over a seeded point set.
#[derive(Debug, Clone, Serialize)]
pub struct CheckReport {
    pub structure: String,
    pub points: usize,
    pub seed: u64,
    pub tol: f64,
    pub checks: Vec<CheckResult>,
    pub skipped: Vec<SkippedPoint>,
    pub passed: bool,
}

impl CheckReport {
    pub fn new<T>(structure: &str, seed: u64, tol: f64, checks: Checks, samples: Samples<T>) -> Self {
        let checks = checks.finish();
        CheckReport {
            structure: structure.to_string(),
            points: samples.points.len(),
            seed,
            tol,
            passed: all_passed(&checks),
            checks,
            skipped: samples.skipped,
        }
    }

    pub fn check(&self, name: &str) -> Option<&CheckResult> {
        self.checks.iter().find(|c| c.name == name)
    }

    pub fn failing(&self) -> impl Iterator<Item = &CheckResult> {
        self.checks.iter().filter(|c| !c.passed)
    }
}
