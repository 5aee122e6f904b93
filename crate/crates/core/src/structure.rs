//! Contact metric structures on a chart: assembly from a frame or from tensor
//! components, the first-order numeric jet used by every point check, and the
//! axiom validator.

use nalgebra::{Matrix3, Vector3};
use serde::Serialize;
use thiserror::Error;

use crate::expr::{Coords, Differentiator, EvalError, Expr, Point, Tape, DIM};
use crate::fields::{lie_derivative_11_with, OneForm, TensorField11, VectorField};
use crate::report::{CheckKind, CheckReport, Checks};
use crate::sampling::{sample_evaluated, PointSampler, SamplingError};

pub type Matrix = [[Expr; DIM]; DIM];

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum ConstraintKind {
    NonZero,
    Positive,
}

/// A scalar that must be nonzero (or positive) wherever the structure is used.
#[derive(Debug, Clone, PartialEq)]
pub struct DomainConstraint {
    pub expr: Expr,
    pub kind: ConstraintKind,
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum BoxError {
    #[error("interval for coordinate {index} is empty or not finite: [{lo}, {hi}]")]
    Degenerate { index: usize, lo: f64, hi: f64 },
}

/// Per-coordinate closed intervals to sample from.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SamplingBox([(f64, f64); DIM]);

impl SamplingBox {
    pub fn new(bounds: [(f64, f64); DIM]) -> Result<Self, BoxError> {
        for (index, &(lo, hi)) in bounds.iter().enumerate() {
            if !(lo.is_finite() && hi.is_finite() && lo < hi) {
                return Err(BoxError::Degenerate { index, lo, hi });
            }
        }
        Ok(SamplingBox(bounds))
    }

    pub fn bounds(&self) -> [(f64, f64); DIM] {
        self.0
    }

    pub fn contains(&self, p: &Point) -> bool {
        self.0.iter().zip(p.coords().iter()).all(|(&(lo, hi), &v)| lo <= v && v <= hi)
    }
}

impl Default for SamplingBox {
    fn default() -> Self {
        SamplingBox([(-1.0, 1.0); DIM])
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ChartSpec {
    pub name: String,
    pub coords: Coords,
    pub constraints: Vec<DomainConstraint>,
    pub sampling_box: SamplingBox,
}

impl ChartSpec {
    pub fn new(name: impl Into<String>, coords: Coords, sampling_box: SamplingBox) -> Self {
        ChartSpec { name: name.into(), coords, constraints: Vec::new(), sampling_box }
    }

    pub fn with_constraint(mut self, expr: Expr, kind: ConstraintKind) -> Self {
        self.constraints.push(DomainConstraint { expr, kind });
        self
    }
}

/// The orthonormal frame a structure was built from, if any.
#[derive(Debug, Clone, PartialEq)]
pub struct Frame {
    pub xi: VectorField,
    pub e: VectorField,
    pub phie: VectorField,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ContactStructure {
    pub chart: ChartSpec,
    /// Covariant metric components `g(∂ᵢ, ∂ⱼ)`.
    pub g: Matrix,
    pub g_inv: Matrix,
    pub phi: TensorField11,
    pub xi: VectorField,
    pub eta: OneForm,
    pub h: TensorField11,
    pub frame: Option<Frame>,
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum StructureError {
    #[error("frame is singular at {point} (determinant {det:e})")]
    SingularFrame { point: Point, det: f64 },
    #[error("metric is singular at {point} (determinant {det:e})")]
    SingularMetric { point: Point, det: f64 },
    #[error("metric is not symmetric: g{i}{j} differs from g{j}{i} at {point}")]
    NotSymmetric { i: usize, j: usize, point: Point },
    #[error("determinant vanishes identically")]
    IdenticallySingular,
    #[error(transparent)]
    Sampling(#[from] SamplingError),
}

/// Points used by the builders to screen for singular input.
const SCREEN_POINTS: usize = 16;
const SCREEN_SEED: u64 = 0x5eed;
const SINGULAR_DET: f64 = 1e-12;

pub fn det3(m: &Matrix) -> Expr {
    let minor = |r1: usize, r2: usize, c1: usize, c2: usize| &m[r1][c1] * &m[r2][c2] - &m[r1][c2] * &m[r2][c1];
    &m[0][0] * minor(1, 2, 1, 2) - &m[0][1] * minor(1, 2, 0, 2) + &m[0][2] * minor(1, 2, 0, 1)
}

/// Classical adjugate, so that `m · adj(m) = det(m) · I`.
pub fn adjugate3(m: &Matrix) -> Matrix {
    std::array::from_fn(|i| {
        std::array::from_fn(|j| {
            // cofactor of entry (j, i)
            let rows: Vec<usize> = (0..DIM).filter(|&r| r != j).collect();
            let cols: Vec<usize> = (0..DIM).filter(|&c| c != i).collect();
            let minor = &m[rows[0]][cols[0]] * &m[rows[1]][cols[1]] - &m[rows[0]][cols[1]] * &m[rows[1]][cols[0]];
            if (i + j) % 2 == 0 {
                minor
            } else {
                -minor
            }
        })
    })
}

pub fn inverse3(m: &Matrix) -> Result<(Matrix, Expr), StructureError> {
    let det = det3(m);
    if det.is_zero() {
        return Err(StructureError::IdenticallySingular);
    }
    let adj = adjugate3(m);
    Ok((adj.map(|row| row.map(|a| &a / &det)), det))
}

/// Evaluates `det` at a few admissible points and reports where it (nearly)
/// vanishes. Points where it cannot be evaluated are ignored.
fn screen_determinant(chart: &ChartSpec, det: &Expr) -> Result<Option<(Point, f64)>, SamplingError> {
    let tape = Tape::new(std::slice::from_ref(det));
    let mut sampler = PointSampler::new(chart, SCREEN_SEED);
    for p in sampler.admissible(SCREEN_POINTS)? {
        if let Ok(v) = tape.eval(&p) {
            if v[0].abs() < SINGULAR_DET {
                return Ok(Some((p, v[0])));
            }
        }
    }
    Ok(None)
}

fn half_lie_derivative(d: &mut Differentiator, xi: &VectorField, phi: &TensorField11) -> TensorField11 {
    lie_derivative_11_with(d, xi, phi).scale(&Expr::constant(0.5))
}

/// Builds the structure that declares `(ξ, e, φe)` orthonormal with
/// `φξ = 0`, `φ(e) = φe`, `φ(φe) = −e`.
pub fn build_from_frame(
    chart: ChartSpec,
    xi: VectorField,
    e: VectorField,
    phie: VectorField,
) -> Result<ContactStructure, StructureError> {
    let cols = [&xi, &e, &phie];
    let frame: Matrix = std::array::from_fn(|i| std::array::from_fn(|a| cols[a].0[i].clone()));
    let (inv, det) = inverse3(&frame)?;
    if let Some((point, det)) = screen_determinant(&chart, &det)? {
        return Err(StructureError::SingularFrame { point, det });
    }
    // Row a of the inverse is the coframe dual to frame vector a.
    let g: Matrix = std::array::from_fn(|i| {
        std::array::from_fn(|j| {
            if j < i {
                return Expr::zero();
            }
            (0..DIM).map(|a| &inv[a][i] * &inv[a][j]).fold(Expr::zero(), |s, t| s + t)
        })
    });
    let g: Matrix =
        std::array::from_fn(|i| std::array::from_fn(|j| if j < i { g[j][i].clone() } else { g[i][j].clone() }));
    let g_inv: Matrix = std::array::from_fn(|i| {
        std::array::from_fn(|j| (0..DIM).map(|a| &frame[i][a] * &frame[j][a]).fold(Expr::zero(), |s, t| s + t))
    });
    let phi =
        TensorField11(std::array::from_fn(|i| std::array::from_fn(|j| &phie.0[i] * &inv[1][j] - &e.0[i] * &inv[2][j])));
    let eta = OneForm(inv[0].clone());
    let h = half_lie_derivative(&mut Differentiator::new(), &xi, &phi);
    Ok(ContactStructure { chart, g, g_inv, phi, xi: xi.clone(), eta, h, frame: Some(Frame { xi, e, phie }) })
}

/// Builds a structure from covariant metric components, `φ` and `ξ`.
/// `η` is the metric dual of `ξ`. Nothing beyond invertibility is checked.
pub fn build_from_tensors(
    chart: ChartSpec,
    g: Matrix,
    phi: TensorField11,
    xi: VectorField,
) -> Result<ContactStructure, StructureError> {
    let asymmetric: Vec<(usize, usize)> =
        (0..DIM).flat_map(|i| (i + 1..DIM).map(move |j| (i, j))).filter(|&(i, j)| g[i][j] != g[j][i]).collect();
    if !asymmetric.is_empty() {
        let exprs: Vec<Expr> = asymmetric.iter().map(|&(i, j)| &g[i][j] - &g[j][i]).collect();
        let tape = Tape::new(&exprs);
        let mut sampler = PointSampler::new(&chart, SCREEN_SEED);
        for p in sampler.admissible(SCREEN_POINTS)? {
            let Ok(values) = tape.eval(&p) else { continue };
            if let Some(k) = values.iter().position(|v| v.abs() > 1e-12) {
                let (i, j) = asymmetric[k];
                return Err(StructureError::NotSymmetric { i, j, point: p });
            }
        }
    }
    let (g_inv, det) = inverse3(&g)?;
    if let Some((point, det)) = screen_determinant(&chart, &det)? {
        return Err(StructureError::SingularMetric { point, det });
    }
    let eta = OneForm(std::array::from_fn(|j| (0..DIM).map(|i| &g[i][j] * &xi.0[i]).fold(Expr::zero(), |s, t| s + t)));
    let h = half_lie_derivative(&mut Differentiator::new(), &xi, &phi);
    Ok(ContactStructure { chart, g, g_inv, phi, xi, eta, h, frame: None })
}

fn flat(m: &Matrix) -> impl Iterator<Item = Expr> + '_ {
    m.iter().flatten().cloned()
}

fn matrix_from(values: &[f64]) -> Matrix3<f64> {
    Matrix3::from_row_slice(&values[..9])
}

/// Values and first partial derivatives of the structure tensors at a point.
#[derive(Debug, Clone)]
pub struct Jet {
    pub point: Point,
    pub g: Matrix3<f64>,
    pub g_inv: Matrix3<f64>,
    pub phi: Matrix3<f64>,
    pub h: Matrix3<f64>,
    pub xi: Vector3<f64>,
    pub eta: Vector3<f64>,
    /// `dη(∂ᵢ,∂ⱼ) = ∂ᵢηⱼ − ∂ⱼηᵢ`.
    pub d_eta: Matrix3<f64>,
    /// `dg[k] = ∂ₖ g`.
    pub dg: [Matrix3<f64>; DIM],
    pub dphi: [Matrix3<f64>; DIM],
    pub dh: [Matrix3<f64>; DIM],
    /// Entry `(i, k)` is `∂ₖ ξⁱ`.
    pub dxi: Matrix3<f64>,
}

impl Jet {
    /// `Γ[k]` holds `Γᵏᵢⱼ` at row `i`, column `j`.
    pub fn christoffel(&self) -> [Matrix3<f64>; DIM] {
        std::array::from_fn(|k| {
            Matrix3::from_fn(|i, j| {
                0.5 * (0..DIM)
                    .map(|l| self.g_inv[(k, l)] * (self.dg[i][(j, l)] + self.dg[j][(i, l)] - self.dg[l][(i, j)]))
                    .sum::<f64>()
            })
        })
    }

    /// `(∇_k φ)` as a matrix, for each coordinate direction `k`.
    pub fn nabla_phi(&self, gamma: &[Matrix3<f64>; DIM]) -> [Matrix3<f64>; DIM] {
        std::array::from_fn(|k| {
            let gk = connection_matrix(gamma, k);
            self.dphi[k] + gk * self.phi - self.phi * gk
        })
    }

    /// `(∇_k h)` for each coordinate direction `k`.
    pub fn nabla_h(&self, gamma: &[Matrix3<f64>; DIM]) -> [Matrix3<f64>; DIM] {
        std::array::from_fn(|k| {
            let gk = connection_matrix(gamma, k);
            self.dh[k] + gk * self.h - self.h * gk
        })
    }

    /// Matrix with column `k` equal to `∇_{∂ₖ} ξ`.
    pub fn nabla_xi(&self, gamma: &[Matrix3<f64>; DIM]) -> Matrix3<f64> {
        Matrix3::from_fn(|a, k| self.dxi[(a, k)] + (0..DIM).map(|c| gamma[a][(k, c)] * self.xi[c]).sum::<f64>())
    }

    /// `λ = √(½ tr h²)`.
    pub fn lambda(&self) -> f64 {
        (0.5 * (self.h * self.h).trace()).max(0.0).sqrt()
    }
}

/// Entry `(a, c)` is `Γᵃₖc`, the connection matrix along `∂ₖ`.
pub fn connection_matrix(gamma: &[Matrix3<f64>; DIM], k: usize) -> Matrix3<f64> {
    Matrix3::from_fn(|a, c| gamma[a][(k, c)])
}

/// Compiled evaluator for [`Jet`]s of one structure.
#[derive(Debug, Clone)]
pub struct JetEvaluator {
    tape: Tape,
}

impl JetEvaluator {
    pub fn new(s: &ContactStructure) -> Self {
        let mut d = Differentiator::new();
        let mut out: Vec<Expr> = Vec::with_capacity(180);
        out.extend(flat(&s.g));
        out.extend(flat(&s.g_inv));
        out.extend(flat(&s.phi.0));
        out.extend(flat(&s.h.0));
        out.extend(s.xi.0.iter().cloned());
        out.extend(s.eta.0.iter().cloned());
        for i in 0..DIM {
            for j in 0..DIM {
                out.push(d.diff(&s.eta.0[j], i));
            }
        }
        for m in [&s.g, &s.phi.0, &s.h.0] {
            for k in 0..DIM {
                for e in m.iter().flatten() {
                    out.push(d.diff(e, k));
                }
            }
        }
        for i in 0..DIM {
            for k in 0..DIM {
                out.push(d.diff(&s.xi.0[i], k));
            }
        }
        JetEvaluator { tape: Tape::new(&out) }
    }

    pub fn eval(&self, p: &Point) -> Result<Jet, EvalError> {
        let v = self.tape.eval(p)?;
        let mut at = 0;
        let mut take = |n: usize| {
            let s = &v[at..at + n];
            at += n;
            s
        };
        let g = matrix_from(take(9));
        let g_inv = matrix_from(take(9));
        let phi = matrix_from(take(9));
        let h = matrix_from(take(9));
        let xi = Vector3::from_column_slice(take(3));
        let eta = Vector3::from_column_slice(take(3));
        let deta = matrix_from(take(9));
        let dg: [Matrix3<f64>; DIM] = std::array::from_fn(|_| matrix_from(take(9)));
        let dphi: [Matrix3<f64>; DIM] = std::array::from_fn(|_| matrix_from(take(9)));
        let dh: [Matrix3<f64>; DIM] = std::array::from_fn(|_| matrix_from(take(9)));
        let dxi = matrix_from(take(9));
        Ok(Jet { point: *p, g, g_inv, phi, h, xi, eta, d_eta: deta - deta.transpose(), dg, dphi, dh, dxi })
    }
}

/// Contact metric axioms in report order.
pub const AXIOMS: [(&str, CheckKind); 17] = [
    ("metric_positive_definite", CheckKind::NonVanishing),
    ("metric_inverse", CheckKind::Residual),
    ("eta_xi", CheckKind::Residual),
    ("phi_xi", CheckKind::Residual),
    ("phi_squared", CheckKind::Residual),
    ("eta_phi", CheckKind::Residual),
    ("metric_compatibility", CheckKind::Residual),
    ("contact_form", CheckKind::NonVanishing),
    ("contact_metric", CheckKind::Residual),
    ("h_xi", CheckKind::Residual),
    ("eta_h", CheckKind::Residual),
    ("h_anticommutes_phi", CheckKind::Residual),
    ("trace_h", CheckKind::Residual),
    ("trace_phi_h", CheckKind::Residual),
    ("h_symmetric", CheckKind::Residual),
    ("phi_h_symmetric", CheckKind::Residual),
    ("integrability", CheckKind::Residual),
];

fn amax(m: &Matrix3<f64>) -> f64 {
    m.iter().fold(0.0_f64, |acc, v| if v.is_nan() { f64::NAN } else { acc.max(v.abs()) })
}

fn antisymmetric_part(m: &Matrix3<f64>) -> Matrix3<f64> {
    m - m.transpose()
}

/// Residual (or magnitude, for non-vanishing checks) of every axiom at one jet.
pub fn axiom_values(j: &Jet) -> [f64; 17] {
    let id = Matrix3::identity();
    let eta_xi = j.xi * j.eta.transpose();
    let minors = [j.g[(0, 0)], j.g[(0, 0)] * j.g[(1, 1)] - j.g[(0, 1)] * j.g[(1, 0)], j.g.determinant()];
    let min_minor = minors.iter().cloned().fold(f64::INFINITY, f64::min);
    let d = &j.d_eta;
    let volume = j.eta[0] * d[(1, 2)] - j.eta[1] * d[(0, 2)] + j.eta[2] * d[(0, 1)];
    let gamma = j.christoffel();
    let nabla_phi = j.nabla_phi(&gamma);
    let ih = id + j.h;
    let lowered = ih.transpose() * j.g;
    let integrability = (0..DIM)
        .map(|k| {
            let expected = Matrix3::from_fn(|a, b| lowered[(k, b)] * j.xi[a] - j.eta[b] * ih[(a, k)]);
            amax(&(nabla_phi[k] - expected))
        })
        .fold(0.0, f64::max);
    let gh = j.g * j.h;
    let gphih = j.g * j.phi * j.h;
    [
        if min_minor > 0.0 { min_minor } else { 0.0 },
        amax(&(j.g * j.g_inv - id)),
        (j.eta.dot(&j.xi) - 1.0).abs(),
        (j.phi * j.xi).amax(),
        amax(&(j.phi * j.phi + id - eta_xi)),
        (j.phi.transpose() * j.eta).amax(),
        amax(&(j.phi.transpose() * j.g * j.phi - j.g + j.eta * j.eta.transpose())),
        volume,
        amax(&(0.5 * j.d_eta - j.g * j.phi)),
        (j.h * j.xi).amax(),
        (j.h.transpose() * j.eta).amax(),
        amax(&(j.phi * j.h + j.h * j.phi)),
        j.h.trace().abs(),
        (j.phi * j.h).trace().abs(),
        amax(&antisymmetric_part(&gh)),
        amax(&antisymmetric_part(&gphih)),
        integrability,
    ]
}

pub type ValidationReport = CheckReport;

/// Evaluates every contact metric axiom at `n_points` seeded admissible points.
pub fn validate(s: &ContactStructure, n_points: usize, seed: u64, tol: f64) -> Result<ValidationReport, SamplingError> {
    let evaluator = JetEvaluator::new(s);
    let samples = sample_evaluated(&s.chart, n_points, seed, |p| evaluator.eval(p).map(|j| axiom_values(&j)))?;
    let mut checks = Checks::new(tol);
    for (name, kind) in AXIOMS {
        checks.declare(name, kind);
    }
    for (p, values) in samples.points.iter().zip(&samples.values) {
        for ((name, kind), v) in AXIOMS.iter().zip(values) {
            match kind {
                CheckKind::Residual => checks.residual(name, p, *v),
                CheckKind::NonVanishing => checks.nonvanishing(name, p, *v),
            }
        }
    }
    Ok(CheckReport::new(&s.chart.name, seed, tol, checks, samples))
}
