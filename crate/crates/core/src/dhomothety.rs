//! D-homothetic deformations `η̄ = αη, ξ̄ = ξ/α, φ̄ = φ,
//! ḡ = αg + α(α−1)η⊗η` and checks of how `h`, `λ`, `κ`, `μ` and `‖grad λ‖`
//! transform.

use serde::Serialize;
use thiserror::Error;

use crate::curvature::Analysis;
use crate::expr::{Differentiator, Expr};
use crate::fields::{lie_derivative_11_with, OneForm};
use crate::nullity::{extract_kmn_at, grad_lambda_at, NullityError, NullityReport};
use crate::report::{CheckKind, CheckReport, Checks};
use crate::sampling::{sample_evaluated, SamplingError};
use crate::structure::{validate, ContactStructure, Frame, Matrix};

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct DHomothetyParams {
    pub alpha: f64,
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum DHomothetyError {
    #[error("alpha must be a positive finite number, got {0}")]
    InvalidAlpha(f64),
    #[error(transparent)]
    Sampling(#[from] SamplingError),
}

impl DHomothetyParams {
    pub fn new(alpha: f64) -> Result<Self, DHomothetyError> {
        if alpha.is_finite() && alpha > 0.0 {
            Ok(DHomothetyParams { alpha })
        } else {
            Err(DHomothetyError::InvalidAlpha(alpha))
        }
    }
}

/// The deformed structure. `h̄` is recomputed as `½ L_ξ̄ φ̄`; the inverse
/// metric uses the closed form `ḡ⁻¹ = (g⁻¹ − ((α−1)/α) ξ⊗ξ)/α`.
pub fn apply(s: &ContactStructure, alpha: f64) -> Result<ContactStructure, DHomothetyError> {
    let alpha = DHomothetyParams::new(alpha)?.alpha;
    let a = Expr::constant(alpha);
    let eta = &s.eta.0;
    let xi = &s.xi.0;
    let stretch = Expr::constant(alpha * (alpha - 1.0));
    let g: Matrix = std::array::from_fn(|i| std::array::from_fn(|j| &a * &s.g[i][j] + &stretch * &eta[i] * &eta[j]));
    let shrink = Expr::constant((alpha - 1.0) / alpha);
    let inv_a = Expr::constant(1.0 / alpha);
    let g_inv: Matrix =
        std::array::from_fn(|i| std::array::from_fn(|j| &inv_a * (&s.g_inv[i][j] - &shrink * &xi[i] * &xi[j])));
    let xi_bar = s.xi.scale(&inv_a);
    let eta_bar = OneForm(std::array::from_fn(|i| &a * &eta[i]));
    let h = lie_derivative_11_with(&mut Differentiator::new(), &xi_bar, &s.phi).scale(&Expr::constant(0.5));
    let root = Expr::constant(1.0 / alpha.sqrt());
    let frame = s.frame.as_ref().map(|f| Frame { xi: xi_bar.clone(), e: f.e.scale(&root), phie: f.phie.scale(&root) });
    let mut chart = s.chart.clone();
    if alpha != 1.0 {
        chart.name = format!("{}-alpha{}", s.chart.name, alpha);
    }
    Ok(ContactStructure { chart, g, g_inv, phi: s.phi.clone(), xi: xi_bar, eta: eta_bar, h, frame })
}

pub fn kappa_bar(kappa: f64, alpha: f64) -> f64 {
    (kappa + alpha * alpha - 1.0) / (alpha * alpha)
}

pub fn mu_bar(mu: f64, alpha: f64) -> f64 {
    (mu + 2.0 * (alpha - 1.0)) / alpha
}

/// Original and deformed values at one sample point.
#[derive(Debug, Clone, Serialize)]
pub struct DHomothetyRow {
    pub original: NullityReport,
    pub deformed: NullityReport,
    pub grad_lambda: Option<f64>,
    pub grad_lambda_bar: Option<f64>,
}

#[derive(Debug, Clone, Serialize)]
pub struct DHomothetyReport {
    pub alpha: f64,
    pub checks: CheckReport,
    pub deformed_validation: CheckReport,
    pub rows: Vec<DHomothetyRow>,
}

impl DHomothetyReport {
    pub fn passed(&self) -> bool {
        self.checks.passed && self.deformed_validation.passed
    }
}

/// Transformation checks, in report order.
pub const LAWS: [&str; 7] =
    ["h_scaling", "lambda_scaling", "unit_reeb", "eta_xi", "kappa_law", "mu_law", "grad_lambda_norm"];

struct Outcome {
    row: DHomothetyRow,
    h_scaling: f64,
    unit_reeb: f64,
    eta_xi: f64,
}

/// Compares `original` with its `alpha`-deformation at seeded points.
///
/// The `κ̄`, `μ̄` laws are checked only where the original nullity fit has
/// residual below `tol`. The gradient law `‖grad λ̄‖ = α^{-3/2}‖grad λ‖` is
/// checked wherever `h ≠ 0`; it presumes `ξλ = 0`.
pub fn verify_transform(
    original: &Analysis,
    alpha: f64,
    n_points: usize,
    seed: u64,
    tol: f64,
) -> Result<DHomothetyReport, DHomothetyError> {
    let deformed = Analysis::new(&apply(&original.structure, alpha)?);
    let samples = sample_evaluated(&original.structure.chart, n_points, seed, |p| {
        let pd = original.eval(p)?;
        let pdb = deformed.eval(p)?;
        let row = DHomothetyRow {
            original: extract_kmn_at(&pd)?,
            deformed: extract_kmn_at(&pdb)?,
            grad_lambda: grad_lambda_at(&pd.jet).ok().map(|g| g.norm),
            grad_lambda_bar: grad_lambda_at(&pdb.jet).ok().map(|g| g.norm),
        };
        let j = &pdb.jet;
        Ok::<_, NullityError>(Outcome {
            row,
            h_scaling: (j.h - pd.jet.h / alpha).amax(),
            unit_reeb: (j.xi.dot(&(j.g * j.xi)) - 1.0).abs(),
            eta_xi: (j.eta.dot(&j.xi) - 1.0).abs(),
        })
    })?;
    let mut checks = Checks::new(tol);
    for name in LAWS {
        checks.declare(name, CheckKind::Residual);
    }
    let mut rows = Vec::with_capacity(samples.points.len());
    for (p, o) in samples.points.iter().zip(samples.values.iter()) {
        let (r, rb) = (&o.row.original, &o.row.deformed);
        checks.residual("h_scaling", p, o.h_scaling);
        checks.residual("lambda_scaling", p, rb.lambda - r.lambda / alpha);
        checks.residual("unit_reeb", p, o.unit_reeb);
        checks.residual("eta_xi", p, o.eta_xi);
        if r.residual < tol {
            checks.residual("kappa_law", p, rb.kappa - kappa_bar(r.kappa, alpha));
            if let (Some(mu), Some(mub)) = (r.mu, rb.mu) {
                checks.residual("mu_law", p, mub - mu_bar(mu, alpha));
            }
        }
        if let (Some(gl), Some(glb)) = (o.row.grad_lambda, o.row.grad_lambda_bar) {
            checks.residual("grad_lambda_norm", p, glb - alpha.powf(-1.5) * gl);
        }
        rows.push(o.row.clone());
    }
    let name = original.structure.chart.name.clone();
    let checks = CheckReport::new(&name, seed, tol, checks, samples);
    let deformed_validation = validate(&deformed.structure, n_points, seed, tol)?;
    Ok(DHomothetyReport { alpha, checks, deformed_validation, rows })
}

/// Largest componentwise difference between the tensors of two structures on
/// the same chart at `n_points` seeded points.
pub fn max_component_difference(
    a: &ContactStructure,
    b: &ContactStructure,
    n_points: usize,
    seed: u64,
) -> Result<f64, SamplingError> {
    let fields = |s: &ContactStructure| -> Vec<Expr> {
        let mut v: Vec<Expr> = Vec::new();
        for m in [&s.g, &s.g_inv, &s.phi.0, &s.h.0] {
            v.extend(m.iter().flatten().cloned());
        }
        v.extend(s.xi.0.iter().cloned());
        v.extend(s.eta.0.iter().cloned());
        v
    };
    let diff: Vec<Expr> = fields(a).iter().zip(fields(b)).map(|(x, y)| x - &y).collect();
    let tape = crate::expr::Tape::new(&diff);
    let samples = sample_evaluated(&a.chart, n_points, seed, |p| tape.eval(p))?;
    Ok(samples.values.iter().flatten().fold(0.0, |acc: f64, v| acc.max(v.abs())))
}
