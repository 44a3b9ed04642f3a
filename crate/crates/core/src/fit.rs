//! Least-squares fits of average cost against transformed sizes.

use std::fmt;
use std::str::FromStr;

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::reference::rho;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FitModel {
    /// `y = c0 + c1 lg x`
    LinearInLgn,
    /// `y = c0 + c1 lg lg x`
    LinearInLglgn,
    /// `y = c0 + c1 lg x`, with `x` a set size
    LinearInLgk,
    /// `y = B − (B − A) ρ(x)`, reported as `[A, B]`
    RhoLinear,
    /// `y = c0 + c1 ρ + c2 ρ² + c3 ρ³`
    RhoCubic,
}

impl FitModel {
    pub fn arity(self) -> usize {
        match self {
            FitModel::RhoCubic => 4,
            _ => 2,
        }
    }

    /// Regressor row for raw size `x`.
    fn row(self, x: f64) -> Result<Vec<f64>> {
        Ok(match self {
            FitModel::LinearInLgn | FitModel::LinearInLgk => vec![1.0, x.log2()],
            FitModel::LinearInLglgn => vec![1.0, x.log2().log2()],
            FitModel::RhoLinear | FitModel::RhoCubic => {
                if x < 2.0 || x.fract() != 0.0 {
                    return Err(Error::DegenerateFit);
                }
                let r = rho(x as usize)?;
                if self == FitModel::RhoLinear {
                    vec![1.0, r]
                } else {
                    vec![1.0, r, r * r, r * r * r]
                }
            }
        })
    }

    /// The transformed abscissa used when reporting slopes.
    pub fn transform(self, x: f64) -> Result<f64> {
        Ok(self.row(x)?[1])
    }
}

impl fmt::Display for FitModel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            FitModel::LinearInLgn => "lgn",
            FitModel::LinearInLglgn => "lglgn",
            FitModel::LinearInLgk => "lgk",
            FitModel::RhoLinear => "rho-linear",
            FitModel::RhoCubic => "rho-cubic",
        })
    }
}

impl FromStr for FitModel {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Ok(match s {
            "lgn" | "linear_in_lgn" => FitModel::LinearInLgn,
            "lglgn" | "linear_in_lglgn" => FitModel::LinearInLglgn,
            "lgk" | "linear_in_lgk" => FitModel::LinearInLgk,
            "rho-linear" | "rho_linear" => FitModel::RhoLinear,
            "rho-cubic" | "rho_cubic" => FitModel::RhoCubic,
            _ => return Err(Error::Parse(format!("unknown fit model {s:?}"))),
        })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FitResult {
    pub model: FitModel,
    pub coefficients: Vec<f64>,
    pub residual_rms: f64,
    pub r_squared: f64,
    pub points: usize,
}

impl FitResult {
    /// Model prediction at raw size `x`.
    pub fn predict(&self, x: f64) -> Result<f64> {
        let beta = self.raw_coefficients();
        Ok(self
            .model
            .row(x)?
            .iter()
            .zip(&beta)
            .map(|(a, b)| a * b)
            .sum())
    }

    /// Slope with respect to the transformed abscissa (linear models only).
    pub fn slope(&self) -> f64 {
        match self.model {
            FitModel::RhoLinear => self.coefficients[0] - self.coefficients[1],
            _ => self.coefficients[1],
        }
    }

    fn raw_coefficients(&self) -> Vec<f64> {
        match self.model {
            FitModel::RhoLinear => {
                let (a, b) = (self.coefficients[0], self.coefficients[1]);
                vec![b, a - b]
            }
            _ => self.coefficients.clone(),
        }
    }
}

/// Ordinary least squares of `y` on the model's regressors of `x`.
pub fn fit(points: &[(f64, f64)], model: FitModel) -> Result<FitResult> {
    let p = model.arity();
    let n = points.len();
    if n < p {
        return Err(Error::DegenerateFit);
    }
    let mut rows = Vec::with_capacity(n * p);
    for &(x, _) in points {
        rows.extend(model.row(x)?);
    }
    if rows.iter().any(|v| !v.is_finite()) {
        return Err(Error::DegenerateFit);
    }
    let design = DMatrix::from_row_slice(n, p, &rows);
    let y = DVector::from_iterator(n, points.iter().map(|&(_, y)| y));
    // scale columns so the rank test is meaningful for small regressors
    let norms: Vec<f64> = (0..p).map(|j| design.column(j).norm()).collect();
    if norms.contains(&0.0) {
        return Err(Error::DegenerateFit);
    }
    let mut scaled = design.clone();
    for (j, s) in norms.iter().enumerate() {
        scaled.column_mut(j).scale_mut(1.0 / s);
    }
    let svd = scaled.svd(true, true);
    let smax = svd.singular_values.max();
    let smin = svd.singular_values.min();
    if smin <= smax * 1e-12 {
        return Err(Error::DegenerateFit);
    }
    let scaled_beta = svd.solve(&y, 0.0).map_err(|_| Error::DegenerateFit)?;
    let beta: Vec<f64> = scaled_beta.iter().zip(&norms).map(|(b, s)| b / s).collect();
    let fitted = &design * DVector::from_vec(beta.clone());
    let ss_res: f64 = (&y - &fitted).iter().map(|r| r * r).sum();
    let mean = y.mean();
    let ss_tot: f64 = y.iter().map(|v| (v - mean) * (v - mean)).sum();
    let r_squared = if ss_tot <= f64::EPSILON * mean.abs().max(1.0) * n as f64 {
        1.0
    } else {
        1.0 - ss_res / ss_tot
    };
    let coefficients = match model {
        FitModel::RhoLinear => vec![beta[0] + beta[1], beta[0]],
        _ => beta,
    };
    Ok(FitResult {
        model,
        coefficients,
        residual_rms: (ss_res / n as f64).sqrt(),
        r_squared,
        points: n,
    })
}
