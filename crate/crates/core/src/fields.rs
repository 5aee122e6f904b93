//! Vector fields, one-forms and (1,1)-tensor fields with `Expr` components
//! in the coordinate basis, plus the Lie bracket, Lie derivative and exterior
//! derivative.

use nalgebra::{Matrix3, Vector3};

use crate::expr::{sum, Differentiator, EvalError, Expr, Point, Tape, DIM};

/// Components in the basis `∂/∂x⁰, ∂/∂x¹, ∂/∂x²`.
#[derive(Debug, Clone, PartialEq)]
pub struct VectorField(pub [Expr; DIM]);

/// Components in the basis `dx⁰, dx¹, dx²`.
#[derive(Debug, Clone, PartialEq)]
pub struct OneForm(pub [Expr; DIM]);

/// Mixed (1,1) tensor. Entry `[i][j]` is the `∂ᵢ` component of `T(∂ⱼ)`.
#[derive(Debug, Clone, PartialEq)]
pub struct TensorField11(pub [[Expr; DIM]; DIM]);

fn eval_vector(components: &[Expr; DIM], p: &Point) -> Result<Vector3<f64>, EvalError> {
    let v = Tape::new(components).eval(p)?;
    Ok(Vector3::new(v[0], v[1], v[2]))
}

impl VectorField {
    pub fn new(components: [Expr; DIM]) -> Self {
        VectorField(components)
    }

    pub fn zero() -> Self {
        VectorField(std::array::from_fn(|_| Expr::zero()))
    }

    /// The coordinate field `∂/∂xⁱ`.
    pub fn coordinate(i: usize) -> Self {
        VectorField(std::array::from_fn(|k| if k == i { Expr::one() } else { Expr::zero() }))
    }

    pub fn component(&self, i: usize) -> &Expr {
        &self.0[i]
    }

    pub fn scale(&self, f: &Expr) -> Self {
        VectorField(std::array::from_fn(|i| f * &self.0[i]))
    }

    pub fn add(&self, other: &Self) -> Self {
        VectorField(std::array::from_fn(|i| &self.0[i] + &other.0[i]))
    }

    pub fn sub(&self, other: &Self) -> Self {
        VectorField(std::array::from_fn(|i| &self.0[i] - &other.0[i]))
    }

    pub fn eval(&self, p: &Point) -> Result<Vector3<f64>, EvalError> {
        eval_vector(&self.0, p)
    }
}

impl OneForm {
    pub fn new(components: [Expr; DIM]) -> Self {
        OneForm(components)
    }

    /// `ω(V)` as a scalar field.
    pub fn apply(&self, v: &VectorField) -> Expr {
        sum((0..DIM).map(|i| &self.0[i] * &v.0[i]))
    }

    pub fn scale(&self, f: &Expr) -> Self {
        OneForm(std::array::from_fn(|i| f * &self.0[i]))
    }

    pub fn eval(&self, p: &Point) -> Result<Vector3<f64>, EvalError> {
        eval_vector(&self.0, p)
    }
}

impl TensorField11 {
    pub fn new(entries: [[Expr; DIM]; DIM]) -> Self {
        TensorField11(entries)
    }

    pub fn zero() -> Self {
        TensorField11(std::array::from_fn(|_| std::array::from_fn(|_| Expr::zero())))
    }

    pub fn identity() -> Self {
        TensorField11(std::array::from_fn(|i| std::array::from_fn(|j| if i == j { Expr::one() } else { Expr::zero() })))
    }

    /// `ω ⊗ V`, the tensor `X ↦ ω(X) V`.
    pub fn outer(form: &OneForm, v: &VectorField) -> Self {
        TensorField11(std::array::from_fn(|i| std::array::from_fn(|j| &v.0[i] * &form.0[j])))
    }

    pub fn entry(&self, i: usize, j: usize) -> &Expr {
        &self.0[i][j]
    }

    pub fn apply(&self, v: &VectorField) -> VectorField {
        VectorField(std::array::from_fn(|i| sum((0..DIM).map(|j| &self.0[i][j] * &v.0[j]))))
    }

    /// Composition `self ∘ other`.
    pub fn compose(&self, other: &Self) -> Self {
        TensorField11(std::array::from_fn(|i| {
            std::array::from_fn(|j| sum((0..DIM).map(|k| &self.0[i][k] * &other.0[k][j])))
        }))
    }

    pub fn add(&self, other: &Self) -> Self {
        TensorField11(std::array::from_fn(|i| std::array::from_fn(|j| &self.0[i][j] + &other.0[i][j])))
    }

    pub fn sub(&self, other: &Self) -> Self {
        TensorField11(std::array::from_fn(|i| std::array::from_fn(|j| &self.0[i][j] - &other.0[i][j])))
    }

    pub fn scale(&self, f: &Expr) -> Self {
        TensorField11(std::array::from_fn(|i| std::array::from_fn(|j| f * &self.0[i][j])))
    }

    pub fn trace(&self) -> Expr {
        sum((0..DIM).map(|i| self.0[i][i].clone()))
    }

    /// Entries in row-major order.
    pub fn flat(&self) -> Vec<Expr> {
        self.0.iter().flatten().cloned().collect()
    }

    pub fn eval(&self, p: &Point) -> Result<Matrix3<f64>, EvalError> {
        let v = Tape::new(&self.flat()).eval(p)?;
        Ok(Matrix3::from_row_slice(&v))
    }
}

/// `V(f) = Σ Vⁱ ∂f/∂xⁱ`.
pub fn directional_derivative(v: &VectorField, f: &Expr) -> Expr {
    directional_derivative_with(&mut Differentiator::new(), v, f)
}

pub fn directional_derivative_with(d: &mut Differentiator, v: &VectorField, f: &Expr) -> Expr {
    sum((0..DIM).map(|i| &v.0[i] * &d.diff(f, i)))
}

/// `[V, W]ᵏ = V(Wᵏ) − W(Vᵏ)`.
pub fn lie_bracket(v: &VectorField, w: &VectorField) -> VectorField {
    lie_bracket_with(&mut Differentiator::new(), v, w)
}

pub fn lie_bracket_with(d: &mut Differentiator, v: &VectorField, w: &VectorField) -> VectorField {
    VectorField(std::array::from_fn(|k| {
        directional_derivative_with(d, v, &w.0[k]) - directional_derivative_with(d, w, &v.0[k])
    }))
}

/// Lie derivative of a (1,1) tensor, `(L_V T)(X) = [V, TX] − T[V, X]`.
///
/// In components: `(L_V T)ⁱⱼ = V(Tⁱⱼ) − Tᵏⱼ ∂ₖVⁱ + Tⁱₖ ∂ⱼVᵏ`.
pub fn lie_derivative_11(v: &VectorField, t: &TensorField11) -> TensorField11 {
    lie_derivative_11_with(&mut Differentiator::new(), v, t)
}

pub fn lie_derivative_11_with(d: &mut Differentiator, v: &VectorField, t: &TensorField11) -> TensorField11 {
    // dv[k][i] = ∂ₖ Vⁱ
    let dv: [[Expr; DIM]; DIM] = std::array::from_fn(|k| std::array::from_fn(|i| d.diff(&v.0[i], k)));
    TensorField11(std::array::from_fn(|i| {
        std::array::from_fn(|j| {
            let transport = directional_derivative_with(d, v, &t.0[i][j]);
            let left = sum((0..DIM).map(|k| &t.0[k][j] * &dv[k][i]));
            let right = sum((0..DIM).map(|k| &t.0[i][k] * &dv[j][k]));
            transport - left + right
        })
    }))
}

/// Exterior derivative of a one-form, exposed as an evaluator.
///
/// Uses the unnormalised convention `dω(X,Y) = X(ω(Y)) − Y(ω(X)) − ω([X,Y])`,
/// whose coordinate components are `∂ᵢωⱼ − ∂ⱼωᵢ`.
#[derive(Debug, Clone)]
pub struct TwoForm {
    components: [[Expr; DIM]; DIM],
    tape: Tape,
}

impl TwoForm {
    /// Component `dω(∂ᵢ, ∂ⱼ)`.
    pub fn component(&self, i: usize, j: usize) -> &Expr {
        &self.components[i][j]
    }

    pub fn matrix_at(&self, p: &Point) -> Result<Matrix3<f64>, EvalError> {
        Ok(Matrix3::from_row_slice(&self.tape.eval(p)?))
    }

    /// `dω(X, Y)` at `p` for tangent vectors given by their components.
    pub fn eval(&self, x: &Vector3<f64>, y: &Vector3<f64>, p: &Point) -> Result<f64, EvalError> {
        Ok(x.dot(&(self.matrix_at(p)? * y)))
    }
}

pub fn d_oneform(omega: &OneForm) -> TwoForm {
    let mut d = Differentiator::new();
    let components: [[Expr; DIM]; DIM] =
        std::array::from_fn(|i| std::array::from_fn(|j| d.diff(&omega.0[j], i) - d.diff(&omega.0[i], j)));
    let flat: Vec<Expr> = components.iter().flatten().cloned().collect();
    TwoForm { tape: Tape::new(&flat), components }
}
