//! Matrix exponential by scaling and squaring.
//!
//! The generator is scaled by `2^-s` until its 1-norm is at most
//! [`SCALED_NORM`], a truncated Taylor series is evaluated with the
//! Paterson-Stockmeyer scheme, and the result is squared `s` times. The
//! Taylor degree is the smallest one whose remainder bound on the scaled
//! matrix falls below the requested tolerance.

use num_complex::Complex64;

use crate::error::{PbxError, Result};
use crate::exec::Exec;
use crate::operator::TruncatedOperator;

/// Target 1-norm of the scaled generator.
pub const SCALED_NORM: f64 = 0.5;

/// Degree ceiling for the Taylor core.
pub const MAX_DEGREE: usize = 30;

/// Scaling exponent and Taylor degree picked for a given generator norm.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ExpPlan {
    pub squarings: u32,
    pub degree: usize,
}

impl ExpPlan {
    pub fn for_norm(norm: f64, tol: f64) -> Self {
        let squarings = if norm > SCALED_NORM {
            (norm / SCALED_NORM).log2().ceil() as u32
        } else {
            0
        };
        let b = norm / 2f64.powi(squarings as i32);
        // Remainder of the Taylor series after degree m, relative to a lower
        // bound e^{-b} of ||exp(B)||.
        let target = tol.max(f64::EPSILON / 4.0) * (-b).exp();
        let mut term = 1.0; // b^{m+1}/(m+1)!
        let mut degree = MAX_DEGREE;
        for m in 0..MAX_DEGREE {
            term *= b / (m + 1) as f64;
            let tail = term / (1.0 - b / (m + 2) as f64);
            if m >= 1 && tail <= target {
                degree = m;
                break;
            }
        }
        Self { squarings, degree }
    }
}

/// `exp(X)` with the default execution policy.
pub fn op_exp(x: &TruncatedOperator, tol: f64) -> Result<TruncatedOperator> {
    op_exp_with(x, tol, Exec::default())
}

pub fn op_exp_with(x: &TruncatedOperator, tol: f64, exec: Exec) -> Result<TruncatedOperator> {
    if !(tol > 0.0 && tol.is_finite()) {
        return Err(PbxError::InvalidTolerance(tol));
    }
    if !x.is_finite() {
        return Err(PbxError::NonFinite {
            what: "exponential generator",
        });
    }
    let plan = ExpPlan::for_norm(x.norm1(), tol);
    let scaled = x.scale(Complex64::new(2f64.powi(-(plan.squarings as i32)), 0.0));
    let mut result = taylor(&scaled, plan.degree, exec)?;
    for step in 0..plan.squarings {
        result = result.mul_with(&result, exec)?;
        if !result.is_finite() {
            return Err(PbxError::Overflow {
                scale: plan.squarings,
                step: step + 1,
            });
        }
    }
    Ok(result)
}

/// `sum_{k=0}^{m} B^k / k!` by Paterson-Stockmeyer.
fn taylor(b: &TruncatedOperator, degree: usize, exec: Exec) -> Result<TruncatedOperator> {
    let d = b.dim();
    let mut coeffs = Vec::with_capacity(degree + 1);
    let mut c = 1.0;
    for k in 0..=degree {
        if k > 0 {
            c /= k as f64;
        }
        coeffs.push(c);
    }

    let block = ((degree + 1) as f64).sqrt().ceil() as usize;
    let block = block.max(1);
    // powers[i] = B^i for i in 0..=block
    let mut powers = vec![TruncatedOperator::identity(d), b.clone()];
    while powers.len() <= block {
        let next = powers.last().unwrap().mul_with(b, exec)?;
        powers.push(next);
    }
    let chunks = degree / block + 1;
    let chunk_poly = |j: usize| -> TruncatedOperator {
        let mut acc = TruncatedOperator::zeros(d);
        for i in 0..block {
            let k = j * block + i;
            if k > degree {
                break;
            }
            acc = acc.add_scaled(Complex64::new(coeffs[k], 0.0), &powers[i]);
        }
        acc
    };

    let mut result = chunk_poly(chunks - 1);
    for j in (0..chunks - 1).rev() {
        result = result.mul_with(&powers[block], exec)?;
        result = &result + &chunk_poly(j);
    }
    Ok(result)
}

/// `||W_b||_1 * ||(W^{-1})_b||_1` on the leading `b x b` blocks, given both
/// the operator and its inverse.
pub fn block_condition_estimate(
    w: &TruncatedOperator,
    w_inv: &TruncatedOperator,
    block: usize,
) -> Result<f64> {
    Ok(w.leading_block(block)?.norm1() * w_inv.leading_block(block)?.norm1())
}
