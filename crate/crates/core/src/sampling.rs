//! Seeded sampling of evaluation points inside a chart's box.

use rand_core::{RngCore, SeedableRng};
use rand_xoshiro::SplitMix64;
use serde::Serialize;
use thiserror::Error;

use crate::expr::{Point, Tape};
use crate::structure::{ChartSpec, ConstraintKind};
use crate::sweep;

/// Attempts allowed per requested point before sampling gives up.
pub const MAX_ATTEMPTS_PER_POINT: usize = 10_000;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum SamplingError {
    #[error("could not find an admissible point after {attempts} attempts")]
    Exhausted { attempts: usize },
    #[error("at least one sample point is required")]
    NoPoints,
}

/// Uniform points in the sampling box that satisfy the chart's domain constraints.
pub struct PointSampler {
    rng: SplitMix64,
    bounds: [(f64, f64); 3],
    constraints: Option<(Tape, Vec<ConstraintKind>)>,
}

impl PointSampler {
    pub fn new(chart: &ChartSpec, seed: u64) -> Self {
        let constraints = (!chart.constraints.is_empty()).then(|| {
            let exprs: Vec<_> = chart.constraints.iter().map(|c| c.expr.clone()).collect();
            (Tape::new(&exprs), chart.constraints.iter().map(|c| c.kind).collect())
        });
        PointSampler { rng: SplitMix64::seed_from_u64(seed), bounds: chart.sampling_box.bounds(), constraints }
    }

    fn uniform(&mut self) -> f64 {
        // 53 random mantissa bits in [0, 1)
        (self.rng.next_u64() >> 11) as f64 * (1.0 / (1u64 << 53) as f64)
    }

    fn candidate(&mut self) -> Point {
        let values = std::array::from_fn(|i| {
            let (lo, hi) = self.bounds[i];
            lo + (hi - lo) * self.uniform()
        });
        Point::new(values).expect("box bounds are finite")
    }

    fn admits(&self, p: &Point) -> bool {
        let Some((tape, kinds)) = &self.constraints else {
            return true;
        };
        match tape.eval(p) {
            Ok(values) => values.iter().zip(kinds).all(|(v, kind)| match kind {
                ConstraintKind::NonZero => *v != 0.0,
                ConstraintKind::Positive => *v > 0.0,
            }),
            Err(_) => false,
        }
    }

    /// Next point satisfying the domain constraints.
    pub fn next_admissible(&mut self) -> Result<Point, SamplingError> {
        for _ in 0..MAX_ATTEMPTS_PER_POINT {
            let p = self.candidate();
            if self.admits(&p) {
                return Ok(p);
            }
        }
        Err(SamplingError::Exhausted { attempts: MAX_ATTEMPTS_PER_POINT })
    }

    pub fn admissible(&mut self, n: usize) -> Result<Vec<Point>, SamplingError> {
        (0..n).map(|_| self.next_admissible()).collect()
    }
}

/// A point dropped because some field could not be evaluated there.
#[derive(Debug, Clone, Serialize)]
pub struct SkippedPoint {
    pub point: Point,
    pub reason: String,
}

/// Sampled points with the per-point values computed at them.
#[derive(Debug, Clone)]
pub struct Samples<T> {
    pub points: Vec<Point>,
    pub values: Vec<T>,
    pub skipped: Vec<SkippedPoint>,
}

/// Draws `n` admissible points at which `eval` succeeds.
///
/// Candidates are drawn from the seeded stream in batches and evaluated with
/// the default sweep strategy; the first `n` successes in stream order are
/// kept, so the result does not depend on thread scheduling.
pub fn sample_evaluated<T, E, F>(chart: &ChartSpec, n: usize, seed: u64, eval: F) -> Result<Samples<T>, SamplingError>
where
    T: Send,
    E: std::fmt::Display + Send,
    F: Fn(&Point) -> Result<T, E> + Sync + Send,
{
    if n == 0 {
        return Err(SamplingError::NoPoints);
    }
    let mut sampler = PointSampler::new(chart, seed);
    let mut out = Samples { points: Vec::with_capacity(n), values: Vec::with_capacity(n), skipped: Vec::new() };
    let budget = n.saturating_mul(MAX_ATTEMPTS_PER_POINT);
    while out.points.len() < n {
        if out.skipped.len() >= budget {
            return Err(SamplingError::Exhausted { attempts: budget });
        }
        let batch = sampler.admissible(n - out.points.len())?;
        let results = sweep::map(&batch, |p| eval(p));
        for (p, r) in batch.into_iter().zip(results) {
            match r {
                Ok(v) if out.points.len() < n => {
                    out.points.push(p);
                    out.values.push(v);
                }
                Ok(_) => {}
                Err(e) => out.skipped.push(SkippedPoint { point: p, reason: e.to_string() }),
            }
        }
    }
    Ok(out)
}
