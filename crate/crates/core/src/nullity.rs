//! Pointwise φ-bases, the connection coefficients `a, b, c, A, B`,
//! extraction of the nullity functions `(κ, μ, ν)`, the gradient of `λ`, and
//! classification.

use nalgebra::{Matrix3, SymmetricEigen, Vector3};
use serde::Serialize;
use thiserror::Error;

use crate::curvature::{Analysis, PointData};
use crate::expr::{EvalError, Point, DIM};
use crate::sampling::{sample_evaluated, Samples, SamplingError};
use crate::structure::Jet;

/// Below this value of `λ` the eigenbasis of `h` is not determined.
pub const LAMBDA_MIN: f64 = 1e-6;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum NullityError {
    #[error("h is degenerate at {point} (lambda = {lambda:e})")]
    Degenerate { point: Point, lambda: f64 },
    #[error("metric is not positive definite at {point}")]
    NotPositive { point: Point },
    #[error(transparent)]
    Eval(#[from] EvalError),
}

/// Orthonormal eigenframe `{ξ, e, φe}` of `h` at a point, `he = λe`.
#[derive(Debug, Clone, Serialize)]
pub struct PhiBasis {
    pub point: Point,
    pub xi: Vector3<f64>,
    pub e: Vector3<f64>,
    pub phie: Vector3<f64>,
    pub lambda: f64,
}

fn inner(g: &Matrix3<f64>, u: &Vector3<f64>, v: &Vector3<f64>) -> f64 {
    u.dot(&(g * v))
}

/// Flips `v` so that its first component that is not negligible is positive.
fn fix_sign(v: Vector3<f64>) -> Vector3<f64> {
    let scale = v.amax();
    match v.iter().find(|c| c.abs() > 1e-12 * scale) {
        Some(c) if *c < 0.0 => -v,
        _ => v,
    }
}

/// Eigenvectors of the `g`-self-adjoint operator `m`, orthonormal for `g`,
/// with eigenvalues in ascending order.
fn g_eigen(g: &Matrix3<f64>, m: &Matrix3<f64>, point: &Point) -> Result<(Vector3<f64>, Matrix3<f64>), NullityError> {
    let chol = g.cholesky().ok_or(NullityError::NotPositive { point: *point })?;
    let l = chol.l();
    let l_inv_t = l.transpose().try_inverse().ok_or(NullityError::NotPositive { point: *point })?;
    let a = l.transpose() * m * l_inv_t;
    let sym = 0.5 * (a + a.transpose());
    let eig = SymmetricEigen::new(sym);
    let mut order = [0usize, 1, 2];
    order.sort_by(|&i, &j| eig.eigenvalues[i].total_cmp(&eig.eigenvalues[j]));
    let values = Vector3::from_fn(|k, _| eig.eigenvalues[order[k]]);
    let vectors = Matrix3::from_fn(|r, k| (l_inv_t * eig.eigenvectors.column(order[k]))[r]);
    Ok((values, vectors))
}

/// The φ-basis at a jet. `e` is the unit `+λ` eigenvector of `h`, signed so
/// its first non-negligible coordinate component is positive.
pub fn phi_basis_at(j: &Jet) -> Result<PhiBasis, NullityError> {
    let lambda = j.lambda();
    if lambda.is_nan() || lambda < LAMBDA_MIN {
        return Err(NullityError::Degenerate { point: j.point, lambda });
    }
    let (_, vectors) = g_eigen(&j.g, &j.h, &j.point)?;
    let e = fix_sign(vectors.column(2).into_owned());
    let e = e / inner(&j.g, &e, &e).sqrt();
    Ok(PhiBasis { point: j.point, xi: j.xi, e, phie: j.phi * e, lambda })
}

/// Any unit vector orthogonal to `ξ`, for points where `h` vanishes.
fn transverse_basis(j: &Jet) -> Result<PhiBasis, NullityError> {
    let (_, vectors) = g_eigen(&j.g, &(j.xi * (j.g * j.xi).transpose()), &j.point)?;
    let e = fix_sign(vectors.column(0).into_owned());
    let e = e / inner(&j.g, &e, &e).sqrt();
    Ok(PhiBasis { point: j.point, xi: j.xi, e, phie: j.phi * e, lambda: j.lambda() })
}

impl PhiBasis {
    /// The tensor `s` with `sξ = 0`, `se = e`, `sφe = −φe`.
    pub fn s_tensor(&self, g: &Matrix3<f64>) -> Matrix3<f64> {
        self.e * (g * self.e).transpose() - self.phie * (g * self.phie).transpose()
    }

    /// Largest deviation from the defining properties of a φ-basis.
    pub fn defect(&self, j: &Jet) -> f64 {
        let frame = [self.xi, self.e, self.phie];
        let mut worst: f64 = 0.0;
        for a in 0..DIM {
            for b in 0..DIM {
                let target = if a == b { 1.0 } else { 0.0 };
                worst = worst.max((inner(&j.g, &frame[a], &frame[b]) - target).abs());
            }
        }
        worst = worst.max((j.h * self.e - self.lambda * self.e).amax());
        worst.max((j.h * self.phie + self.lambda * self.phie).amax())
    }
}

/// Differential of `λ = √(½ tr h²)`, as covector components `∂ₖλ`.
pub fn d_lambda(j: &Jet, lambda: f64) -> Vector3<f64> {
    Vector3::from_fn(|k, _| (j.h * j.dh[k]).trace() / (2.0 * lambda))
}

/// `τφ` as a covariant tensor: `(X, Y) ↦ g(X, φ τ♯Y)`, where `τ♯` is `τ`
/// with its second slot raised by `g`.
pub fn tau_phi(pd: &PointData) -> Matrix3<f64> {
    pd.jet.g * pd.jet.phi * pd.jet.g_inv * pd.tau
}

#[derive(Debug, Clone, Copy, Serialize)]
pub struct FrameResiduals {
    pub nabla_e: f64,
    pub nabla_phie: f64,
    pub nabla_xi: f64,
    pub nabla_xi_h: f64,
    pub b_relation: f64,
    pub c_relation: f64,
}

impl FrameResiduals {
    pub fn max(&self) -> f64 {
        [self.nabla_e, self.nabla_phie, self.nabla_xi, self.nabla_xi_h, self.b_relation, self.c_relation]
            .into_iter()
            .fold(0.0, f64::max)
    }
}

/// Connection coefficients of a φ-basis at one point.
#[derive(Debug, Clone, Serialize)]
pub struct AbcReport {
    pub point: Point,
    pub lambda: f64,
    pub a: f64,
    pub b: f64,
    pub c: f64,
    #[serde(rename = "A")]
    pub big_a: f64,
    #[serde(rename = "B")]
    pub big_b: f64,
    pub residuals: FrameResiduals,
    /// `max |∇_ξτ − 2aτφ|` over coordinate components.
    pub tau_relation: f64,
    pub xi_lambda: f64,
}

/// `∇_X e` from the derivative of the eigen-equation `he = λe`:
/// its `φe` component is `g((∇_X h)e, φe)/2λ`, its `e` component vanishes
/// and its `ξ` component is `−g(e, ∇_X ξ)`.
fn nabla_e(pd: &PointData, basis: &PhiBasis, x: &Vector3<f64>, nabla_xi: &Matrix3<f64>) -> Vector3<f64> {
    let g = &pd.jet.g;
    let along_phie = inner(g, &(pd.nabla_h_along(x) * basis.e), &basis.phie) / (2.0 * basis.lambda);
    let along_xi = -inner(g, &basis.e, &(nabla_xi * x));
    along_phie * basis.phie + along_xi * basis.xi
}

pub fn abc_at(pd: &PointData) -> Result<AbcReport, NullityError> {
    let j = &pd.jet;
    let basis = phi_basis_at(j)?;
    let lambda = basis.lambda;
    let g = &j.g;
    let (xi, e, phie) = (basis.xi, basis.e, basis.phie);
    let nabla_xi = j.nabla_xi(&pd.gamma);
    let nabla_phi = j.nabla_phi(&pd.gamma);
    let along = |m: &[Matrix3<f64>; DIM], x: &Vector3<f64>| (0..DIM).fold(Matrix3::zeros(), |acc, k| acc + m[k] * x[k]);

    let n_xi_e = nabla_e(pd, &basis, &xi, &nabla_xi);
    let n_e_e = nabla_e(pd, &basis, &e, &nabla_xi);
    let n_phie_e = nabla_e(pd, &basis, &phie, &nabla_xi);
    let a = inner(g, &n_xi_e, &phie);
    let b = inner(g, &n_e_e, &phie);
    let c = -inner(g, &n_phie_e, &phie);

    let nabla_e_residual =
        [(n_xi_e - a * phie).amax(), (n_e_e - b * phie).amax(), (n_phie_e - (-c * phie + (lambda - 1.0) * xi)).amax()]
            .into_iter()
            .fold(0.0, f64::max);

    // ∇_X φe = (∇_X φ)e + φ∇_X e
    let n_phie = |x: &Vector3<f64>, ne: &Vector3<f64>| along(&nabla_phi, x) * e + j.phi * ne;
    let nabla_phie_residual = [
        (n_phie(&xi, &n_xi_e) + a * e).amax(),
        (n_phie(&e, &n_e_e) - (-b * e + (1.0 + lambda) * xi)).amax(),
        (n_phie(&phie, &n_phie_e) - c * e).amax(),
    ]
    .into_iter()
    .fold(0.0, f64::max);

    let nabla_xi_residual = [
        (nabla_xi * xi).amax(),
        (nabla_xi * e + (1.0 + lambda) * phie).amax(),
        (nabla_xi * phie - (1.0 - lambda) * e).amax(),
    ]
    .into_iter()
    .fold(0.0, f64::max);

    let dl = d_lambda(j, lambda);
    let (e_l, phie_l, xi_l) = (dl.dot(&e), dl.dot(&phie), dl.dot(&xi));
    let nabla_xi_h = pd.nabla_h_along(&xi);
    let expected_h = -2.0 * a * j.h * j.phi + xi_l * basis.s_tensor(g);

    let big_a = pd.ricci_form(&xi, &e);
    let big_b = pd.ricci_form(&xi, &phie);
    let residuals = FrameResiduals {
        nabla_e: nabla_e_residual,
        nabla_phie: nabla_phie_residual,
        nabla_xi: nabla_xi_residual,
        nabla_xi_h: (nabla_xi_h - expected_h).amax(),
        b_relation: (b - (phie_l + big_a) / (2.0 * lambda)).abs(),
        c_relation: (c - (e_l + big_b) / (2.0 * lambda)).abs(),
    };
    Ok(AbcReport {
        point: j.point,
        lambda,
        a,
        b,
        c,
        big_a,
        big_b,
        residuals,
        tau_relation: (pd.nabla_xi_tau - 2.0 * a * tau_phi(pd)).amax(),
        xi_lambda: xi_l,
    })
}

/// Best scalar `k` in `∇_ξτ ≈ k·τφ` (least squares over components) and the
/// remaining misfit.
pub fn tau_coefficient(pd: &PointData) -> (f64, f64) {
    let t = tau_phi(pd);
    let norm = t.norm_squared();
    if norm == 0.0 {
        return (0.0, pd.nabla_xi_tau.amax());
    }
    let k = pd.nabla_xi_tau.dot(&t) / norm;
    (k, (pd.nabla_xi_tau - k * t).amax())
}

/// Nullity functions fitted at one point.
#[derive(Debug, Clone, Serialize)]
pub struct NullityReport {
    pub point: Point,
    pub lambda: f64,
    pub kappa: f64,
    /// `None` where `λ < LAMBDA_MIN`.
    pub mu: Option<f64>,
    pub nu: Option<f64>,
    pub residual: f64,
    pub degenerate: bool,
}

pub fn extract_kmn_at(pd: &PointData) -> Result<NullityReport, NullityError> {
    let j = &pd.jet;
    let (basis, degenerate) = match phi_basis_at(j) {
        Ok(b) => (b, false),
        Err(NullityError::Degenerate { .. }) => (transverse_basis(j)?, true),
        Err(other) => return Err(other),
    };
    let g = &j.g;
    let (xi, e, phie) = (basis.xi, basis.e, basis.phie);
    let r_e = pd.curvature(&e, &xi, &xi);
    let r_phie = pd.curvature(&phie, &xi, &xi);
    let c1 = inner(g, &r_e, &e);
    let c2 = inner(g, &r_phie, &phie);
    let c3 = inner(g, &r_e, &phie);
    let c4 = inner(g, &r_phie, &e);
    let lambda = basis.lambda;
    let kappa = 0.5 * (c1 + c2);
    let (mu, nu) = if degenerate { (0.0, 0.0) } else { ((c1 - c2) / (2.0 * lambda), (c3 + c4) / (2.0 * lambda)) };

    let phih = j.phi * j.h;
    let mut residual =
        [(c3 - c4).abs(), pd.curvature(&e, &phie, &xi).amax(), inner(g, &r_e, &xi).abs(), inner(g, &r_phie, &xi).abs()]
            .into_iter()
            .fold(0.0, f64::max);
    let unit = |i: usize| Vector3::from_fn(|k, _| if k == i { 1.0 } else { 0.0 });
    for i in 0..DIM {
        for k in i + 1..DIM {
            let (x, y) = (unit(i), unit(k));
            let (ex, ey) = (j.eta[i], j.eta[k]);
            let fitted = kappa * (ey * x - ex * y)
                + mu * (ey * (j.h * x) - ex * (j.h * y))
                + nu * (ey * (phih * x) - ex * (phih * y));
            residual = residual.max((pd.curvature(&x, &y, &xi) - fitted).amax());
        }
    }
    Ok(NullityReport {
        point: j.point,
        lambda,
        kappa,
        mu: (!degenerate).then_some(mu),
        nu: (!degenerate).then_some(nu),
        residual: if residual.is_nan() { f64::INFINITY } else { residual },
        degenerate,
    })
}

/// `grad λ` at one point with its components in the φ-basis.
#[derive(Debug, Clone, Serialize)]
pub struct GradLambda {
    pub point: Point,
    pub lambda: f64,
    pub grad: Vector3<f64>,
    pub norm: f64,
    pub e_lambda: f64,
    pub phie_lambda: f64,
    pub xi_lambda: f64,
    /// Whether the basis was replaced by `(ξ, −e, −φe)` so that the larger of
    /// `e·λ`, `φe·λ` is non-negative.
    pub flipped: bool,
}

pub fn grad_lambda_at(j: &Jet) -> Result<GradLambda, NullityError> {
    let basis = phi_basis_at(j)?;
    let dl = d_lambda(j, basis.lambda);
    let grad = j.g_inv * dl;
    let (mut e_l, mut phie_l) = (dl.dot(&basis.e), dl.dot(&basis.phie));
    let dominant = if e_l.abs() >= phie_l.abs() { e_l } else { phie_l };
    let flipped = dominant < 0.0;
    if flipped {
        e_l = -e_l;
        phie_l = -phie_l;
    }
    Ok(GradLambda {
        point: j.point,
        lambda: basis.lambda,
        norm: dl.dot(&grad).max(0.0).sqrt(),
        grad,
        e_lambda: e_l,
        phie_lambda: phie_l,
        xi_lambda: dl.dot(&basis.xi),
        flipped,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum Label {
    #[serde(rename = "Sasakian")]
    Sasakian,
    #[serde(rename = "K-contact")]
    KContact,
    #[serde(rename = "(kappa,mu)")]
    KappaMu,
    #[serde(rename = "generalized (kappa,mu)")]
    GeneralizedKappaMu,
    #[serde(rename = "(kappa,mu,nu)")]
    KappaMuNu,
    #[serde(rename = "generic")]
    Generic,
}

impl Label {
    pub fn as_str(self) -> &'static str {
        match self {
            Label::Sasakian => "Sasakian",
            Label::KContact => "K-contact",
            Label::KappaMu => "(kappa,mu)",
            Label::GeneralizedKappaMu => "generalized (kappa,mu)",
            Label::KappaMuNu => "(kappa,mu,nu)",
            Label::Generic => "generic",
        }
    }

    pub fn is_kappa_mu_family(self) -> bool {
        matches!(self, Label::KappaMu | Label::GeneralizedKappaMu)
    }
}

impl std::fmt::Display for Label {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Debug, Clone, Copy, Serialize)]
pub struct Stats {
    pub mean: f64,
    pub std: f64,
    pub min: f64,
    pub max: f64,
}

impl Stats {
    pub fn of(values: &[f64]) -> Option<Stats> {
        if values.is_empty() {
            return None;
        }
        let n = values.len() as f64;
        let mean = values.iter().sum::<f64>() / n;
        let var = values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / n;
        Some(Stats {
            mean,
            std: var.sqrt(),
            min: values.iter().cloned().fold(f64::INFINITY, f64::min),
            max: values.iter().cloned().fold(f64::NEG_INFINITY, f64::max),
        })
    }

    /// Relative spread small enough to call the sampled function constant.
    pub fn is_constant(&self) -> bool {
        self.std < 1e-6 * (1.0 + self.mean.abs())
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct Classification {
    pub label: Label,
    pub max_lambda: f64,
    pub max_residual: f64,
    pub kappa: Option<Stats>,
    pub mu: Option<Stats>,
    pub max_abs_nu: f64,
    pub degenerate_points: usize,
}

/// Labels a structure from its per-point nullity reports.
pub fn classify(reports: &[NullityReport], tol: f64) -> Classification {
    let max_lambda = reports.iter().map(|r| r.lambda).fold(0.0, f64::max);
    let max_residual = reports.iter().map(|r| r.residual).fold(0.0, f64::max);
    let kappas: Vec<f64> = reports.iter().map(|r| r.kappa).collect();
    let mus: Vec<f64> = reports.iter().filter_map(|r| r.mu).collect();
    let max_abs_nu = reports.iter().filter_map(|r| r.nu).map(f64::abs).fold(0.0, f64::max);
    let kappa = Stats::of(&kappas);
    let mu = Stats::of(&mus);
    let fits = max_residual < tol;
    let label = if max_lambda < tol {
        let unit_kappa = kappas.iter().all(|k| (k - 1.0).abs() < tol);
        if fits && unit_kappa {
            Label::Sasakian
        } else {
            Label::KContact
        }
    } else if fits && max_abs_nu < tol {
        let constant = kappa.is_some_and(|s| s.is_constant()) && mu.is_none_or(|s| s.is_constant());
        if constant {
            Label::KappaMu
        } else {
            Label::GeneralizedKappaMu
        }
    } else if fits {
        Label::KappaMuNu
    } else {
        Label::Generic
    };
    Classification {
        label,
        max_lambda,
        max_residual,
        kappa,
        mu,
        max_abs_nu,
        degenerate_points: reports.iter().filter(|r| r.degenerate).count(),
    }
}

/// Nullity reports at `n_points` seeded admissible points.
pub fn nullity_sweep(analysis: &Analysis, n_points: usize, seed: u64) -> Result<Samples<NullityReport>, SamplingError> {
    sample_evaluated(&analysis.structure.chart, n_points, seed, |p| extract_kmn_at(&analysis.eval(p)?))
}
