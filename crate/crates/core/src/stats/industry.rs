//! Cross-industry regression of rank gaps on industry membership.
//!
//! `gap = gamma0 + gamma1 * Finance + gamma2 * Construction + error`, with
//! Healthcare absorbed into the intercept. Because the design is saturated,
//! the coefficients are exactly group-mean contrasts against Healthcare,
//! which gives an independent closed form the tests exploit.

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use super::{degenerate_t, two_sided_t_p, StatsError};
use crate::corpus::Industry;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct IndustryFit {
    /// Mean gap in the Healthcare baseline.
    pub gamma0: f64,
    /// Finance shift relative to Healthcare.
    pub gamma1: f64,
    /// Construction shift relative to Healthcare.
    pub gamma2: f64,
    pub se_gamma0: f64,
    pub se_gamma1: f64,
    pub se_gamma2: f64,
    pub p_gamma0: f64,
    pub p_gamma1: f64,
    pub p_gamma2: f64,
    pub n_obs: usize,
}

pub fn fit_industry(gaps: &[(f64, Industry)]) -> Result<IndustryFit, StatsError> {
    for (_, industry) in gaps {
        if let Industry::Other(name) = industry {
            return Err(StatsError::UnsupportedIndustry(name.clone()));
        }
    }
    for required in [Industry::Healthcare, Industry::Finance, Industry::Construction] {
        if !gaps.iter().any(|(_, i)| *i == required) {
            return Err(StatsError::MissingIndustry(required.to_string()));
        }
    }
    let n = gaps.len();
    // Three coefficients need at least one residual degree of freedom.
    if n < 4 {
        return Err(StatsError::TooFewObservations { have: n, need: 4 });
    }

    let mut design = DMatrix::zeros(n, 3);
    let mut outcome = DVector::zeros(n);
    for (row, (gap, industry)) in gaps.iter().enumerate() {
        design[(row, 0)] = 1.0;
        match industry {
            Industry::Finance => design[(row, 1)] = 1.0,
            Industry::Construction => design[(row, 2)] = 1.0,
            Industry::Healthcare => {}
            Industry::Other(_) => unreachable!("rejected above"),
        }
        outcome[row] = *gap;
    }

    let xtx = design.transpose() * &design;
    let xty = design.transpose() * &outcome;
    let coefficients = xtx
        .clone()
        .qr()
        .solve(&xty)
        .expect("all three industries present, so the design is full rank");
    let fitted = &design * &coefficients;
    let rss: f64 = (&outcome - fitted).iter().map(|r| r * r).sum();
    let df = (n - 3) as f64;
    let sigma2 = rss / df;
    let xtx_inv = xtx
        .try_inverse()
        .expect("full-rank design has invertible moment matrix");

    let mut se = [0.0f64; 3];
    let mut p = [0.0f64; 3];
    for j in 0..3 {
        se[j] = (sigma2 * xtx_inv[(j, j)]).sqrt();
        p[j] = if se[j] == 0.0 {
            degenerate_t(coefficients[j]).1
        } else {
            two_sided_t_p(coefficients[j] / se[j], df)
        };
    }

    Ok(IndustryFit {
        gamma0: coefficients[0],
        gamma1: coefficients[1],
        gamma2: coefficients[2],
        se_gamma0: se[0],
        se_gamma1: se[1],
        se_gamma2: se[2],
        p_gamma0: p[0],
        p_gamma1: p[1],
        p_gamma2: p[2],
        n_obs: n,
    })
}
