//! The weighted convex combination of a cutter family, its relaxed version,
//! and the extrapolation gain that licenses relaxation beyond the classical
//! interval.
//!
//! For a weight vector `w`, `T_w(x)` is the w-weighted convex combination of
//! the operator images. The gain
//! `L(x, w) = sum_i w(i) |T_i(x) - x|^2 / |T_w(x) - x|^2` (1 when the block
//! fixes `x`) is always at least 1, and the relaxed step
//! `x + lambda (T_w(x) - x)` keeps the Fejer decrease for every
//! `lambda <= (2 - tau2) L(x, w)`. `lambda_hat` is the same ratio restricted
//! to the support; it is the depth at which the relaxed step meets the
//! product-space hyperplane (see the `productspace` module for the
//! independent route used to cross-check it).
//!
//! Everything here works over the support of `w`: operators with zero weight
//! are never evaluated. That is the entire computational point of blocks.

use crate::error::{Error, Result};
use crate::linalg::Vector;
use crate::operators::{evaluate, Cutter};
use crate::weights::WeightVector;

/// Cap applied to the gain and to `lambda_hat`. Near a solution the
/// denominator can underflow relative to the numerator through cancellation
/// even though the theory forbids an exact zero; the cap prevents runaway
/// steps and is inert away from solutions.
pub const DEFAULT_LAMBDA_CAP: f64 = 1e8;

/// Scale-relative threshold deciding "the block fixes x": displacements with
/// norm at or below this are treated as zero.
pub fn eps_fix(x: &Vector) -> f64 {
    1e-14 * (1.0 + x.norm())
}

/// Indices with strictly positive weight.
pub fn support(w: &WeightVector) -> Vec<usize> {
    w.support()
}

/// One evaluation pass over the block: per-operator squared displacements
/// (zero for indices outside the support, which are never evaluated), the
/// weighted displacement `T_w(x) - x`, and the weighted sum of squared
/// displacements.
struct BlockPass {
    per_op_sq: Vec<f64>,
    weighted_displacement: Vector,
    weighted_sq_sum: f64,
}

fn block_pass(ops: &[Cutter], w: &WeightVector, x: &Vector) -> Result<BlockPass> {
    if ops.len() != w.len() {
        return Err(Error::DimensionMismatch { left: ops.len(), right: w.len() });
    }
    let mut per_op_sq = vec![0.0; ops.len()];
    let mut weighted_displacement = Vector::zeros(x.dim());
    let mut weighted_sq_sum = 0.0;
    for (i, op) in ops.iter().enumerate() {
        let wi = w.get(i);
        if wi == 0.0 {
            continue;
        }
        let d = evaluate(op, x)?.sub(x);
        let dsq = d.norm_sq();
        per_op_sq[i] = dsq;
        weighted_sq_sum += wi * dsq;
        weighted_displacement = weighted_displacement.add_scaled(wi, &d);
    }
    Ok(BlockPass { per_op_sq, weighted_displacement, weighted_sq_sum })
}

/// `T_w(x)`: the w-weighted combination, computed in displacement form
/// `x + sum_i w(i) (T_i(x) - x)` so that a block-fixed point is returned
/// bit-exactly.
pub fn apply_tw(ops: &[Cutter], w: &WeightVector, x: &Vector) -> Result<Vector> {
    let pass = block_pass(ops, w, x)?;
    Ok(x.add_scaled(1.0, &pass.weighted_displacement))
}

/// `T_{w,lambda}(x) = x + lambda (T_w(x) - x)`.
pub fn apply_relaxed(ops: &[Cutter], w: &WeightVector, lambda: f64, x: &Vector) -> Result<Vector> {
    if !lambda.is_finite() {
        return Err(Error::NonFinite("relaxation parameter".into()));
    }
    let pass = block_pass(ops, w, x)?;
    Ok(x.add_scaled(lambda, &pass.weighted_displacement))
}

fn ratio(pass: &BlockPass, x: &Vector, cap: f64) -> Option<f64> {
    let den = pass.weighted_displacement.norm_sq();
    let eps = eps_fix(x);
    if den <= eps * eps {
        return None;
    }
    Some((pass.weighted_sq_sum / den).max(1.0).min(cap))
}

/// The extrapolation gain `L(x, w)`: at least 1, exactly 1 when the weighted
/// displacement vanishes (within [`eps_fix`]), capped at `cap`.
pub fn gain_with_cap(ops: &[Cutter], w: &WeightVector, x: &Vector, cap: f64) -> Result<f64> {
    let pass = block_pass(ops, w, x)?;
    Ok(ratio(&pass, x, cap).unwrap_or(1.0))
}

/// [`gain_with_cap`] at the default cap.
pub fn gain(ops: &[Cutter], w: &WeightVector, x: &Vector) -> Result<f64> {
    gain_with_cap(ops, w, x, DEFAULT_LAMBDA_CAP)
}

/// The support-restricted gain `lambda_hat`; unlike [`gain`] it is undefined
/// at block-fixed points and reports that as an error.
pub fn lambda_hat_with_cap(ops: &[Cutter], w: &WeightVector, x: &Vector, cap: f64) -> Result<f64> {
    let pass = block_pass(ops, w, x)?;
    ratio(&pass, x, cap).ok_or(Error::AtFixedPoint)
}

/// [`lambda_hat_with_cap`] at the default cap.
pub fn lambda_hat(ops: &[Cutter], w: &WeightVector, x: &Vector) -> Result<f64> {
    lambda_hat_with_cap(ops, w, x, DEFAULT_LAMBDA_CAP)
}

/// Everything one block evaluation yields. `gain` and `lambda_hat` come from
/// the same pass, so the identity `gain = lambda_hat` (away from block-fixed
/// points) holds exactly; a discrepancy would surface in the report rather
/// than be papered over.
#[derive(Clone, Debug)]
pub struct CombinationReport {
    /// `T_w(x)`.
    pub t_w: Vector,
    /// `T_w(x) - x`.
    pub t_w_minus_x: Vector,
    /// `|T_i(x) - x|^2` per index; zero-weight operators are not evaluated
    /// and report 0.
    pub per_op_displacements: Vec<f64>,
    /// `sum_i w(i) |T_i(x) - x|^2`.
    pub weighted_displacement_sq: f64,
    /// `L(x, w)` (1 at block-fixed points).
    pub gain: f64,
    /// `lambda_hat`; `None` at block-fixed points.
    pub lambda_hat: Option<f64>,
}

impl CombinationReport {
    /// True when the weighted displacement vanished within [`eps_fix`].
    pub fn block_fixed(&self) -> bool {
        self.lambda_hat.is_none()
    }
}

pub fn combination_report_with_cap(
    ops: &[Cutter],
    w: &WeightVector,
    x: &Vector,
    cap: f64,
) -> Result<CombinationReport> {
    let pass = block_pass(ops, w, x)?;
    let lh = ratio(&pass, x, cap);
    Ok(CombinationReport {
        t_w: x.add_scaled(1.0, &pass.weighted_displacement),
        t_w_minus_x: pass.weighted_displacement,
        per_op_displacements: pass.per_op_sq,
        weighted_displacement_sq: pass.weighted_sq_sum,
        gain: lh.unwrap_or(1.0),
        lambda_hat: lh,
    })
}

pub fn combination_report(ops: &[Cutter], w: &WeightVector, x: &Vector) -> Result<CombinationReport> {
    combination_report_with_cap(ops, w, x, DEFAULT_LAMBDA_CAP)
}
