//! Levi-Civita connection, Riemann curvature and the derived tensors `Q`,
//! `l`, `τ` and `∇_ξτ`, built symbolically once per structure and then
//! evaluated per point.
//!
//! Sign convention: `R(X,Y)Z = ∇_X∇_Y Z − ∇_Y∇_X Z − ∇_[X,Y] Z`, so in
//! components
//!
//! ```text
//! Rˡᵢⱼₖ = ∂ᵢΓˡⱼₖ − ∂ⱼΓˡᵢₖ + ΓˡᵢₘΓᵐⱼₖ − ΓˡⱼₘΓᵐᵢₖ
//! ```
//!
//! is the `∂ₗ` component of `R(∂ᵢ,∂ⱼ)∂ₖ`.

use nalgebra::{Matrix3, Vector3};

use crate::expr::{sum, Differentiator, EvalError, Expr, Point, Tape, DIM};
use crate::fields::{directional_derivative_with, TensorField11, VectorField};
use crate::report::{CheckKind, CheckReport, Checks};
use crate::sampling::{sample_evaluated, SamplingError};
use crate::structure::{ContactStructure, Jet, JetEvaluator, Matrix};

type Rank3 = [[[Expr; DIM]; DIM]; DIM];
type Rank4 = [[[[Expr; DIM]; DIM]; DIM]; DIM];

/// Christoffel symbols of the second kind; `gamma[k][i][j] = Γᵏᵢⱼ`.
#[derive(Debug, Clone)]
pub struct Connection {
    pub gamma: Rank3,
}

pub fn christoffel(s: &ContactStructure) -> Connection {
    christoffel_with(&mut Differentiator::new(), s)
}

pub fn christoffel_with(d: &mut Differentiator, s: &ContactStructure) -> Connection {
    // dg[m][i][j] = ∂ₘ gᵢⱼ
    let dg: Rank3 = std::array::from_fn(|m| std::array::from_fn(|i| std::array::from_fn(|j| d.diff(&s.g[i][j], m))));
    let lower: Rank3 = std::array::from_fn(|l| {
        std::array::from_fn(|i| std::array::from_fn(|j| &dg[i][j][l] + &dg[j][i][l] - &dg[l][i][j]))
    });
    let half = Expr::constant(0.5);
    let mut gamma: Rank3 = std::array::from_fn(|_| std::array::from_fn(|_| std::array::from_fn(|_| Expr::zero())));
    for (gk, g_inv_k) in gamma.iter_mut().zip(&s.g_inv) {
        for i in 0..DIM {
            for j in i..DIM {
                let c = &half * sum((0..DIM).map(|l| &g_inv_k[l] * &lower[l][i][j]));
                gk[j][i] = c.clone();
                gk[i][j] = c;
            }
        }
    }
    Connection { gamma }
}

impl Connection {
    /// `(∇_X Y)ᵏ = Xⁱ∂ᵢYᵏ + ΓᵏᵢⱼXⁱYʲ`.
    pub fn covariant_derivative(&self, x: &VectorField, y: &VectorField) -> VectorField {
        covariant_derivative_with(&mut Differentiator::new(), self, x, y)
    }
}

pub fn covariant_derivative(conn: &Connection, x: &VectorField, y: &VectorField) -> VectorField {
    conn.covariant_derivative(x, y)
}

pub fn covariant_derivative_with(
    d: &mut Differentiator,
    conn: &Connection,
    x: &VectorField,
    y: &VectorField,
) -> VectorField {
    VectorField(std::array::from_fn(|k| {
        let transport = directional_derivative_with(d, x, &y.0[k]);
        let correction = sum((0..DIM)
            .flat_map(|i| (0..DIM).map(move |j| (i, j)))
            .map(|(i, j)| &conn.gamma[k][i][j] * &x.0[i] * &y.0[j]));
        transport + correction
    }))
}

/// `r[l][i][j][k] = Rˡᵢⱼₖ`.
#[derive(Debug, Clone)]
pub struct Riemann {
    pub r: Rank4,
}

pub fn riemann(conn: &Connection) -> Riemann {
    riemann_with(&mut Differentiator::new(), conn)
}

pub fn riemann_with(d: &mut Differentiator, conn: &Connection) -> Riemann {
    let g = &conn.gamma;
    let mut r: Rank4 = std::array::from_fn(|_| {
        std::array::from_fn(|_| std::array::from_fn(|_| std::array::from_fn(|_| Expr::zero())))
    });
    for l in 0..DIM {
        for i in 0..DIM {
            for j in i + 1..DIM {
                for k in 0..DIM {
                    let quadratic = sum((0..DIM).map(|m| &g[l][i][m] * &g[m][j][k] - &g[l][j][m] * &g[m][i][k]));
                    let c = d.diff(&g[l][j][k], i) - d.diff(&g[l][i][k], j) + quadratic;
                    r[l][j][i][k] = -&c;
                    r[l][i][j][k] = c;
                }
            }
        }
    }
    Riemann { r }
}

/// Ricci tensor `S(Y,Z) = tr(X ↦ R(X,Y)Z)` and the Ricci operator `Q = g⁻¹S`.
pub fn ricci_operator(rm: &Riemann, s: &ContactStructure) -> (Matrix, TensorField11) {
    let ricci: Matrix =
        std::array::from_fn(|j| std::array::from_fn(|k| sum((0..DIM).map(|i| rm.r[i][i][j][k].clone()))));
    let q = TensorField11(std::array::from_fn(|a| {
        std::array::from_fn(|b| sum((0..DIM).map(|c| &s.g_inv[a][c] * &ricci[c][b])))
    }));
    (ricci, q)
}

/// `l(X) = R(X,ξ)ξ`.
pub fn l_operator(rm: &Riemann, s: &ContactStructure) -> TensorField11 {
    let xi = &s.xi.0;
    TensorField11(std::array::from_fn(|a| {
        std::array::from_fn(|b| {
            sum((0..DIM).flat_map(|j| (0..DIM).map(move |k| (j, k))).map(|(j, k)| &rm.r[a][b][j][k] * &xi[j] * &xi[k]))
        })
    }))
}

/// `τ(X,Y) = 2g(φX, hY)` and its covariant derivative along `ξ`, both as
/// covariant components.
pub fn tau_tensors(s: &ContactStructure, conn: &Connection) -> (Matrix, Matrix) {
    tau_tensors_with(&mut Differentiator::new(), s, conn)
}

pub fn tau_tensors_with(d: &mut Differentiator, s: &ContactStructure, conn: &Connection) -> (Matrix, Matrix) {
    let phi = &s.phi.0;
    let h = &s.h.0;
    // (gh)_{ab} = g(∂a, h∂b)
    let gh: Matrix = std::array::from_fn(|a| std::array::from_fn(|b| sum((0..DIM).map(|c| &s.g[a][c] * &h[c][b]))));
    let tau: Matrix =
        std::array::from_fn(|i| std::array::from_fn(|j| 2.0 * sum((0..DIM).map(|a| &phi[a][i] * &gh[a][j]))));
    let xi = &s.xi.0;
    let g = &conn.gamma;
    let nabla: Matrix = std::array::from_fn(|i| {
        std::array::from_fn(|j| {
            let transport = directional_derivative_with(d, &s.xi, &tau[i][j]);
            let correction = sum((0..DIM)
                .flat_map(|k| (0..DIM).map(move |m| (k, m)))
                .map(|(k, m)| &xi[k] * (&g[m][k][i] * &tau[m][j] + &g[m][k][j] * &tau[i][m])));
            transport - correction
        })
    });
    (tau, nabla)
}

/// Curvature-derived fields of one structure.
#[derive(Debug, Clone)]
pub struct CurvatureBundle {
    pub riemann: Riemann,
    /// Covariant Ricci tensor `S`.
    pub ricci: Matrix,
    pub q: TensorField11,
    pub l: TensorField11,
    pub tau: Matrix,
    pub nabla_xi_tau: Matrix,
}

impl CurvatureBundle {
    pub fn new(s: &ContactStructure, conn: &Connection) -> Self {
        let mut d = Differentiator::new();
        let riemann = riemann_with(&mut d, conn);
        let (ricci, q) = ricci_operator(&riemann, s);
        let l = l_operator(&riemann, s);
        let (tau, nabla_xi_tau) = tau_tensors_with(&mut d, s, conn);
        CurvatureBundle { riemann, ricci, q, l, tau, nabla_xi_tau }
    }
}

/// Everything known about a structure at one point.
#[derive(Debug, Clone)]
pub struct PointData {
    pub jet: Jet,
    /// `gamma[k]` holds `Γᵏᵢⱼ` at row `i`, column `j`.
    pub gamma: [Matrix3<f64>; DIM],
    /// `r[l][i][j][k] = Rˡᵢⱼₖ`.
    pub r: [[[[f64; DIM]; DIM]; DIM]; DIM],
    pub ricci: Matrix3<f64>,
    pub q: Matrix3<f64>,
    pub l: Matrix3<f64>,
    pub tau: Matrix3<f64>,
    pub nabla_xi_tau: Matrix3<f64>,
}

impl PointData {
    pub fn point(&self) -> &Point {
        &self.jet.point
    }

    /// `R(X,Y)Z`.
    pub fn curvature(&self, x: &Vector3<f64>, y: &Vector3<f64>, z: &Vector3<f64>) -> Vector3<f64> {
        Vector3::from_fn(|l, _| {
            let mut acc = 0.0;
            for i in 0..DIM {
                for j in 0..DIM {
                    if x[i] == 0.0 || y[j] == 0.0 {
                        continue;
                    }
                    for k in 0..DIM {
                        acc += self.r[l][i][j][k] * x[i] * y[j] * z[k];
                    }
                }
            }
            acc
        })
    }

    pub fn inner(&self, u: &Vector3<f64>, v: &Vector3<f64>) -> f64 {
        u.dot(&(self.jet.g * v))
    }

    /// `S(X,Y)`.
    pub fn ricci_form(&self, u: &Vector3<f64>, v: &Vector3<f64>) -> f64 {
        u.dot(&(self.ricci * v))
    }

    /// `∇_X Y` for a field `Y` with value `y` and Jacobian `dy` (entry
    /// `(i, k)` is `∂ₖYⁱ`).
    pub fn nabla(&self, x: &Vector3<f64>, y: &Vector3<f64>, dy: &Matrix3<f64>) -> Vector3<f64> {
        dy * x + Vector3::from_fn(|k, _| x.dot(&(self.gamma[k] * y)))
    }

    /// `∇_X h` for a tangent vector `X`.
    pub fn nabla_h_along(&self, x: &Vector3<f64>) -> Matrix3<f64> {
        let nh = self.jet.nabla_h(&self.gamma);
        (0..DIM).fold(Matrix3::zeros(), |acc, k| acc + nh[k] * x[k])
    }

    /// Full contraction `τᵢⱼτₖₗgⁱᵏgʲˡ`.
    pub fn tau_norm_squared(&self) -> f64 {
        let gi = &self.jet.g_inv;
        (gi * self.tau * gi).component_mul(&self.tau.transpose()).sum()
    }
}

/// Symbolic connection and curvature of a structure together with the compiled
/// point evaluators.
#[derive(Debug, Clone)]
pub struct Analysis {
    pub structure: ContactStructure,
    pub connection: Connection,
    pub bundle: CurvatureBundle,
    jet: JetEvaluator,
    tape: Tape,
}

impl Analysis {
    pub fn new(s: &ContactStructure) -> Self {
        let mut d = Differentiator::new();
        let connection = christoffel_with(&mut d, s);
        let bundle = CurvatureBundle::new(s, &connection);
        let mut out: Vec<Expr> = Vec::with_capacity(27 + 81 + 45);
        out.extend(connection.gamma.iter().flatten().flatten().cloned());
        out.extend(bundle.riemann.r.iter().flatten().flatten().flatten().cloned());
        for m in [&bundle.ricci, &bundle.q.0, &bundle.l.0, &bundle.tau, &bundle.nabla_xi_tau] {
            out.extend(m.iter().flatten().cloned());
        }
        Analysis { structure: s.clone(), connection, bundle, jet: JetEvaluator::new(s), tape: Tape::new(&out) }
    }

    pub fn jet(&self, p: &Point) -> Result<Jet, EvalError> {
        self.jet.eval(p)
    }

    pub fn eval(&self, p: &Point) -> Result<PointData, EvalError> {
        let jet = self.jet.eval(p)?;
        let v = self.tape.eval(p)?;
        let m = |at: usize| Matrix3::from_row_slice(&v[at..at + 9]);
        let gamma = std::array::from_fn(|k| m(9 * k));
        let r = std::array::from_fn(|l| {
            std::array::from_fn(|i| {
                std::array::from_fn(|j| std::array::from_fn(|k| v[27 + 27 * l + 9 * i + 3 * j + k]))
            })
        });
        let base = 27 + 81;
        Ok(PointData {
            jet,
            gamma,
            r,
            ricci: m(base),
            q: m(base + 9),
            l: m(base + 18),
            tau: m(base + 27),
            nabla_xi_tau: m(base + 36),
        })
    }
}

fn amax(m: &Matrix3<f64>) -> f64 {
    m.iter().fold(0.0_f64, |acc, v| if v.is_nan() { f64::NAN } else { acc.max(v.abs()) })
}

/// Identity suite in report order.
pub const IDENTITIES: [&str; 8] = [
    "nabla_xi",
    "nabla_xi_h",
    "l_phi_l_phi",
    "trace_l_ricci",
    "ricci_xi_xi",
    "nabla_xi_tau",
    "tau_norm",
    "integrability",
];

/// Residual of every identity at one point, in [`IDENTITIES`] order.
pub fn identity_residuals(pd: &PointData) -> [f64; 8] {
    let j = &pd.jet;
    let id = Matrix3::identity();
    let phi = &j.phi;
    let h = &j.h;
    let h2 = h * h;
    let nabla_xi = j.nabla_xi(&pd.gamma);
    let nabla_xi_h = pd.nabla_h_along(&j.xi);
    let s_xi_xi = pd.ricci_form(&j.xi, &j.xi);
    let nabla_phi = j.nabla_phi(&pd.gamma);
    let ih = id + h;
    let lowered = ih.transpose() * j.g;
    let integrability = (0..DIM)
        .map(|k| {
            let expected = Matrix3::from_fn(|a, b| lowered[(k, b)] * j.xi[a] - j.eta[b] * ih[(a, k)]);
            amax(&(nabla_phi[k] - expected))
        })
        .fold(0.0, f64::max);
    [
        amax(&(nabla_xi + phi + phi * h)),
        amax(&(nabla_xi_h - (phi - phi * h2 - phi * pd.l))),
        amax(&(pd.l - phi * pd.l * phi + 2.0 * (h2 + phi * phi))),
        (pd.l.trace() - s_xi_xi).abs(),
        (s_xi_xi - (2.0 - h2.trace())).abs(),
        amax(&(pd.nabla_xi_tau - 2.0 * phi.transpose() * j.g * nabla_xi_h)),
        (pd.tau_norm_squared() - 4.0 * h2.trace()).abs(),
        integrability,
    ]
}

/// Evaluates the identity suite at `n_points` seeded admissible points.
pub fn check_b_identities(
    analysis: &Analysis,
    n_points: usize,
    seed: u64,
    tol: f64,
) -> Result<CheckReport, SamplingError> {
    let samples = sample_evaluated(&analysis.structure.chart, n_points, seed, |p| {
        analysis.eval(p).map(|pd| identity_residuals(&pd))
    })?;
    let mut checks = Checks::new(tol);
    for name in IDENTITIES {
        checks.declare(name, CheckKind::Residual);
    }
    for (p, values) in samples.points.iter().zip(&samples.values) {
        for (name, v) in IDENTITIES.iter().zip(values) {
            checks.residual(name, p, *v);
        }
    }
    Ok(CheckReport::new(&analysis.structure.chart.name, seed, tol, checks, samples))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::expr::{parse, Coords};
    use crate::structure::{build_from_frame, build_from_tensors, ChartSpec, SamplingBox};

    fn xyz(text: &str) -> Expr {
        parse(text, &Coords::xyz()).unwrap()
    }

    fn field(c: [&str; 3]) -> VectorField {
        VectorField(c.map(xyz))
    }

    fn chart(bounds: [(f64, f64); 3]) -> ChartSpec {
        ChartSpec::new("test", Coords::xyz(), SamplingBox::new(bounds).unwrap())
    }

    fn example3() -> Analysis {
        let s = build_from_frame(
            chart([(-1.0, 1.0), (-1.0, 1.0), (0.5, 2.0)]),
            field(["1", "0", "0"]),
            field(["-2*y", "2*x*z - 1", "1"]),
            field(["0", "1", "0"]),
        )
        .unwrap();
        Analysis::new(&s)
    }

    #[test]
    fn euclidean_metric_has_no_christoffel_symbols() {
        let g = [["1", "0", "0"], ["0", "1", "0"], ["0", "0", "1"]].map(|r| r.map(xyz));
        let s = build_from_tensors(chart([(-1.0, 1.0); 3]), g, TensorField11::zero(), field(["1", "0", "0"])).unwrap();
        let conn = christoffel(&s);
        assert!(conn.gamma.iter().flatten().flatten().all(|e| e.simplify().is_zero()));
    }

    #[test]
    fn warped_metric_christoffel() {
        let g = [["1", "0", "0"], ["0", "1", "0"], ["0", "0", "z^2"]].map(|r| r.map(xyz));
        let s = build_from_tensors(
            chart([(-1.0, 1.0), (-1.0, 1.0), (0.5, 2.0)]),
            g,
            TensorField11::zero(),
            field(["1", "0", "0"]),
        )
        .unwrap();
        let conn = christoffel(&s);
        let p = Point::new([0.2, 0.4, 1.3]).unwrap();
        assert!((conn.gamma[2][2][2].eval(&p).unwrap() - 1.0 / 1.3).abs() < 1e-14);
        for k in 0..3 {
            for i in 0..3 {
                for j in 0..3 {
                    if (k, i, j) != (2, 2, 2) {
                        assert_eq!(conn.gamma[k][i][j].eval(&p).unwrap(), 0.0);
                    }
                }
            }
        }
    }

    #[test]
    fn example3_reeb_field_derivatives() {
        let a = example3();
        let s = &a.structure;
        let frame = s.frame.as_ref().unwrap();
        let lam = xyz("z");
        let e_xi = a.connection.covariant_derivative(&frame.e, &s.xi);
        let target = e_xi.add(&frame.phie.scale(&(1.0 + &lam)));
        let xi_xi = a.connection.covariant_derivative(&s.xi, &s.xi);
        let p = Point::new([0.3, -0.7, 1.4]).unwrap();
        assert!(target.eval(&p).unwrap().amax() < 1e-12);
        assert!(xi_xi.eval(&p).unwrap().amax() < 1e-12);
    }

    #[test]
    fn example3_identities_hold() {
        let r = check_b_identities(&example3(), 32, 42, 1e-8).unwrap();
        assert!(r.passed, "{:#?}", r.checks);
    }

    #[test]
    fn example3_ricci_xi_xi() {
        let a = example3();
        let p = Point::new([0.1, 0.5, 1.2]).unwrap();
        let pd = a.eval(&p).unwrap();
        let s = pd.ricci_form(&pd.jet.xi, &pd.jet.xi);
        assert!((s - (2.0 - 2.0 * 1.44)).abs() < 1e-12, "{s}");
    }
}
