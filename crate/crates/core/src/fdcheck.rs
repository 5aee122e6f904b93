//! Central finite differences against the symbolic derivatives.

use nalgebra::Matrix3;
use thiserror::Error;

use crate::expr::{EvalError, NonFinitePoint, Point, DIM};
use crate::report::{CheckKind, CheckReport, Checks};
use crate::sampling::{sample_evaluated, SamplingError};
use crate::structure::{ContactStructure, Jet, JetEvaluator};

pub const FD_CHECKS: [&str; 2] = ["fd_metric_derivatives", "fd_h_lie_derivative"];

/// `|a − b| / max(|a|, |b|, 1)`, entrywise maximum.
pub fn relative_error(a: &Matrix3<f64>, b: &Matrix3<f64>) -> f64 {
    a.iter().zip(b.iter()).map(|(x, y)| (x - y).abs() / x.abs().max(y.abs()).max(1.0)).fold(0.0, f64::max)
}

#[derive(Debug, Error)]
enum StencilError {
    #[error(transparent)]
    Eval(#[from] EvalError),
    #[error("stencil leaves the representable range at {0:?}")]
    Point(NonFinitePoint),
}

struct Stencil {
    plus: [Jet; DIM],
    minus: [Jet; DIM],
}

impl Stencil {
    fn at(ev: &JetEvaluator, p: &Point, step: f64) -> Result<Self, StencilError> {
        let shifted = |k: usize, s: f64| -> Result<Jet, StencilError> {
            let q = p.shifted(k, s * step).map_err(StencilError::Point)?;
            Ok(ev.eval(&q)?)
        };
        let plus = [shifted(0, 1.0)?, shifted(1, 1.0)?, shifted(2, 1.0)?];
        let minus = [shifted(0, -1.0)?, shifted(1, -1.0)?, shifted(2, -1.0)?];
        Ok(Stencil { plus, minus })
    }

    fn partial(&self, k: usize, step: f64, f: impl Fn(&Jet) -> Matrix3<f64>) -> Matrix3<f64> {
        (f(&self.plus[k]) - f(&self.minus[k])) / (2.0 * step)
    }
}

/// Largest relative error of `∂ₖg` and of `h` against `½ L_ξφ`, both built
/// from differences of values only.
fn errors(j: &Jet, st: &Stencil, step: f64) -> [f64; 2] {
    let metric = (0..DIM).map(|k| relative_error(&j.dg[k], &st.partial(k, step, |q| q.g))).fold(0.0, f64::max);
    let dxi = Matrix3::from_fn(|i, k| (st.plus[k].xi[i] - st.minus[k].xi[i]) / (2.0 * step));
    let along = (0..DIM).fold(Matrix3::zeros(), |acc, k| acc + st.partial(k, step, |q| q.phi) * j.xi[k]);
    let lie = along - dxi * j.phi + j.phi * dxi;
    [metric, relative_error(&j.h, &(0.5 * lie))]
}

/// Compares symbolic derivatives with central differences of step `step` at
/// `n_points` seeded points. `∂g` is held to `rel_tol`, `h` to `h_tol`.
pub fn fd_check(
    s: &ContactStructure,
    n_points: usize,
    seed: u64,
    step: f64,
    rel_tol: f64,
    h_tol: f64,
) -> Result<CheckReport, SamplingError> {
    let ev = JetEvaluator::new(s);
    let samples = sample_evaluated(&s.chart, n_points, seed, |p| {
        let j = ev.eval(p)?;
        let st = Stencil::at(&ev, p, step)?;
        Ok::<_, StencilError>(errors(&j, &st, step))
    })?;
    let mut checks = Checks::new(rel_tol);
    for name in FD_CHECKS {
        checks.declare(name, CheckKind::Residual);
    }
    for (p, [metric, h]) in samples.points.iter().zip(samples.values.iter()) {
        checks.residual_tol(FD_CHECKS[0], rel_tol, p, *metric);
        checks.residual_tol(FD_CHECKS[1], h_tol, p, *h);
    }
    Ok(CheckReport::new(&s.chart.name, seed, rel_tol, checks, samples))
}
