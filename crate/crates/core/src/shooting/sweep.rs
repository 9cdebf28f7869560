use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::Params;

use super::kink::find_kink_mu_with;
use super::ShootingOptions;

/// One tilt of a kink sweep. The speed curve follows from `mu_hat` alone:
/// `v(alpha) = mu_hat / sqrt(alpha^2 + mu_hat^2)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct KinkPoint {
    pub mu_hat: f64,
    /// `mu_hat / gamma`, which tends to `pi / 4` as the tilt vanishes.
    pub ratio: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepRow {
    pub gamma: f64,
    pub outcome: Result<KinkPoint>,
}

/// `find_kink_mu` over a list of tilts, in parallel. Rows come back sorted
/// by `gamma`; a failing row keeps its error and the rest still run.
pub fn sweep_mu_hat(gammas: &[f64], tol: f64) -> Vec<SweepRow> {
    sweep_mu_hat_with(gammas, tol, &ShootingOptions::default())
}

pub fn sweep_mu_hat_with(gammas: &[f64], tol: f64, options: &ShootingOptions) -> Vec<SweepRow> {
    let mut gammas = gammas.to_vec();
    gammas.sort_by(f64::total_cmp);
    gammas
        .par_iter()
        .map(|&gamma| SweepRow {
            gamma,
            outcome: Params::new(gamma, 0.0)
                .and_then(|p| find_kink_mu_with(p, tol, options))
                .map(|(mu_hat, _)| KinkPoint {
                    mu_hat,
                    ratio: mu_hat / gamma,
                }),
        })
        .collect()
}

/// Value at `x = 0` of the polynomial through the points (Neville's
/// scheme), the Richardson limit for an error expansion in powers of `x`.
pub fn extrapolate_to_zero(points: &[(f64, f64)]) -> Result<f64> {
    if points.is_empty() {
        return Err(Error::InvalidParameter {
            name: "points",
            value: 0.0,
            reason: "need at least one point",
        });
    }
    let xs: Vec<f64> = points.iter().map(|p| p.0).collect();
    let mut p: Vec<f64> = points.iter().map(|p| p.1).collect();
    let n = p.len();
    for m in 1..n {
        for i in 0..n - m {
            let (xi, xj) = (xs[i], xs[i + m]);
            if xi == xj {
                return Err(Error::InvalidParameter {
                    name: "points",
                    value: xi,
                    reason: "abscissae must be distinct",
                });
            }
            p[i] = (xj * p[i] - xi * p[i + 1]) / (xj - xi);
        }
    }
    Ok(p[0])
}
