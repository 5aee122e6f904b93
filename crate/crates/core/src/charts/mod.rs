//! Classification charts for three-dimensional contact metric manifolds with
//! `‖grad λ‖ = 1` and `∇_ξτ = 2aτφ`, and the catalog of worked examples.
//!
//! Both cases take `ξ = ∂x`. With `λ = lam_of_z = ∫dz/k₃ + const` and
//! `F = ∂H/∂y`:
//!
//! * case 1: `φe = ∂y`, `e = k₁∂x + k₂∂y + k₃∂z` with `k₁ = −2y + r`,
//! * case 2: `e = ∂y`, `φe = k₁∂x + k₂∂y + k₃∂z` with `k₁ = 2y + r`,
//!
//! and in both `k₂ = 2xλ − (H + y)/(2λ) + β`.

mod catalog;
mod integrate;
mod theorem4;

pub use catalog::{
    catalog, run_entry, CatalogEntry, Claim, ClaimOutcome, ClaimStatus, ExampleReport, ExampleRow, LabelOutcome,
    Quantity, Source, CLAIM_TOL, CONSISTENCY_TOL,
};
pub use integrate::{integrate_reciprocal, Antiderivative, IntegrateError};
pub use theorem4::{verify_theorem4, Theorem4Report, Theorem4Row, Theorem4Tolerances, THEOREM4_CHECKS};

use serde::Serialize;
use thiserror::Error;

use crate::expr::{parse, Coords, Expr, ParseError, DIM};
use crate::fields::VectorField;
use crate::sampling::SamplingError;
use crate::specfile::{Body, ManifoldSpec};
use crate::structure::{ChartSpec, ConstraintKind, SamplingBox, StructureError};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum ChartCase {
    #[serde(rename = "1")]
    One,
    #[serde(rename = "2")]
    Two,
}

impl ChartCase {
    pub fn number(self) -> u8 {
        match self {
            ChartCase::One => 1,
            ChartCase::Two => 2,
        }
    }
}

impl TryFrom<u8> for ChartCase {
    type Error = ChartError;

    fn try_from(n: u8) -> Result<Self, ChartError> {
        match n {
            1 => Ok(ChartCase::One),
            2 => Ok(ChartCase::Two),
            other => Err(ChartError::InvalidCase(other)),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ChartError {
    #[error("chart case must be 1 or 2, got {0}")]
    InvalidCase(u8),
    #[error("cannot parse {param}: {source}")]
    Parse {
        param: &'static str,
        #[source]
        source: ParseError,
    },
    #[error("{param} may not depend on {coord}")]
    Dependency { param: &'static str, coord: &'static str },
    #[error(transparent)]
    Integrate(#[from] IntegrateError),
    #[error("lambda_const must be finite")]
    NonFiniteConstant,
    #[error(transparent)]
    Structure(#[from] StructureError),
    #[error(transparent)]
    Sampling(#[from] SamplingError),
}

/// Free data of a classification chart. All expressions are in `x, y, z`.
#[derive(Debug, Clone, PartialEq)]
pub struct ChartParams {
    pub case: ChartCase,
    pub k3: Expr,
    pub r: Expr,
    pub beta: Expr,
    pub h: Expr,
    pub lambda_const: f64,
    pub sampling_box: SamplingBox,
}

/// The box used when none is given. With `z ∈ [1.5, 3]` both `λ = z` and
/// `λ = ln z` stay above `0.4`; the coefficient relations divide by `λ`.
pub fn default_chart_box() -> SamplingBox {
    SamplingBox::new([(-1.0, 1.0), (-1.0, 1.0), (1.5, 3.0)]).expect("valid box")
}

impl ChartParams {
    pub fn new(case: ChartCase, k3: Expr, r: Expr, beta: Expr, h: Expr) -> Self {
        ChartParams { case, k3, r, beta, h, lambda_const: 0.0, sampling_box: default_chart_box() }
    }

    /// Parses the four expressions in the coordinates `x, y, z`.
    pub fn parse(case: ChartCase, k3: &str, r: &str, beta: &str, h: &str) -> Result<Self, ChartError> {
        let coords = Coords::xyz();
        let p = |param: &'static str, text: &str| {
            parse(text, &coords).map_err(|source| ChartError::Parse { param, source })
        };
        Ok(ChartParams::new(case, p("k3", k3)?, p("r", r)?, p("beta", beta)?, p("H", h)?))
    }

    fn check_dependencies(&self) -> Result<(), ChartError> {
        const NAMES: [&str; DIM] = ["x", "y", "z"];
        let only_z: [(&'static str, &Expr); 3] = [("k3", &self.k3), ("r", &self.r), ("beta", &self.beta)];
        for (param, e) in only_z {
            for (v, coord) in NAMES.into_iter().enumerate().take(2) {
                if e.depends_on(v) {
                    return Err(ChartError::Dependency { param, coord });
                }
            }
        }
        if self.h.depends_on(0) {
            return Err(ChartError::Dependency { param: "H", coord: "x" });
        }
        if !self.lambda_const.is_finite() {
            return Err(ChartError::NonFiniteConstant);
        }
        Ok(())
    }
}

/// A generated chart together with the functions used to build it.
#[derive(Debug, Clone, PartialEq)]
pub struct GeneratedChart {
    pub params: ChartParams,
    pub spec: ManifoldSpec,
    pub lam_of_z: Expr,
    /// `F = ∂H/∂y`.
    pub f: Expr,
    /// `(k₁, k₂, k₃)`.
    pub k: [Expr; DIM],
}

impl GeneratedChart {
    /// The frame field with components `(k₁, k₂, k₃)`: `e` in case 1 and
    /// `φe` in case 2.
    pub fn moving_field(&self) -> VectorField {
        VectorField(self.k.clone())
    }
}

pub fn build_chart(params: &ChartParams) -> Result<GeneratedChart, ChartError> {
    params.check_dependencies()?;
    let anti = integrate_reciprocal(&params.k3, params.lambda_const)?;
    let lam = anti.expr;
    let (x, y) = (Expr::var(0), Expr::var(1));
    let two = Expr::constant(2.0);
    let k1 = match params.case {
        ChartCase::One => &params.r - &(&two * &y),
        ChartCase::Two => &(&two * &y) + &params.r,
    };
    let k2 = &(&(&(&two * &x) * &lam) - &(&(&params.h + &y) / &(&two * &lam))) + &params.beta;
    let k = [k1, k2, params.k3.clone()];
    let f = params.h.diff(1).simplify();

    let name = format!("chart-case{}", params.case.number());
    let mut chart = ChartSpec::new(name, Coords::xyz(), params.sampling_box);
    if params.k3.as_const().is_none() {
        chart = chart.with_constraint(params.k3.clone(), ConstraintKind::NonZero);
    }
    if anti.uses_log {
        chart = chart.with_constraint(Expr::var(2), ConstraintKind::Positive);
    }
    chart = chart.with_constraint(lam.clone(), ConstraintKind::Positive);
    let xi = VectorField::coordinate(0);
    let moving = VectorField(k.clone());
    let body = match params.case {
        ChartCase::One => Body::Frame { xi, e: moving, phie: VectorField::coordinate(1) },
        ChartCase::Two => Body::Frame { xi, e: VectorField::coordinate(1), phie: moving },
    };
    Ok(GeneratedChart { params: params.clone(), spec: ManifoldSpec { chart, body }, lam_of_z: lam, f, k })
}
