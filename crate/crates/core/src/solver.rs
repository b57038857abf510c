//! The extrapolated block-iterative loop: weighted steps with relaxation
//! chosen from the gain-scaled interval, full-family residual stopping, and
//! the Fejer audit that re-checks every structural inequality on a recorded
//! trace.

use serde::{Deserialize, Serialize};

use crate::combine::{combination_report_with_cap, DEFAULT_LAMBDA_CAP};
use crate::error::{Error, Result};
use crate::linalg::{rel_tol, Vector};
use crate::operators::{fixed_point_residual, Cutter};
use crate::weights::{WeightSchedule, WeightVector};

/// How the relaxation parameter is picked inside the admissible interval
/// `[tau1, (2 - tau2) L_k]`. The interval is never empty since `L_k >= 1`.
#[derive(Clone, Debug, PartialEq)]
pub enum LambdaPolicy {
    /// A constant; must lie in `[tau1, 2 - tau2]` so it is admissible for
    /// every gain.
    Fixed(f64),
    /// The deepest admissible step `(2 - tau2) L_k`.
    MaxExtrapolation,
    /// `max(tau1, gamma (2 - tau2) L_k)` for a fraction `gamma` in (0, 1].
    Fraction(f64),
}

#[derive(Clone, Debug)]
pub struct SolverConfig {
    pub tau1: f64,
    pub tau2: f64,
    pub lambda_policy: LambdaPolicy,
    pub schedule: WeightSchedule,
    pub max_iterations: usize,
    pub residual_tolerance: f64,
    /// Full-family residual is evaluated every this many iterations;
    /// `None` means `max(1, m)` so off-block operators are not touched each
    /// step.
    pub residual_check_stride: Option<usize>,
    pub lambda_cap: f64,
    /// Full trace is retained up to this many records, then thinned
    /// geometrically (keep-stride doubles).
    pub trace_limit: usize,
    /// Known common fixed points, recorded into the trace as distance
    /// diagnostics. Membership in the common fixed-point set is the caller's
    /// contract; it is what the Fejer audit quantifies over.
    pub reference_points: Vec<Vector>,
}

impl SolverConfig {
    pub fn new(schedule: WeightSchedule) -> Self {
        Self {
            tau1: 1.0,
            tau2: 1.0,
            lambda_policy: LambdaPolicy::MaxExtrapolation,
            schedule,
            max_iterations: 100_000,
            residual_tolerance: 1e-8,
            residual_check_stride: None,
            lambda_cap: DEFAULT_LAMBDA_CAP,
            trace_limit: 100_000,
            reference_points: Vec::new(),
        }
    }

    pub fn validate(&self, ops: &[Cutter]) -> Result<()> {
        if ops.is_empty() {
            return Err(Error::InvalidConfig("no operators".into()));
        }
        let n = ops[0].dimension();
        if let Some(op) = ops.iter().find(|op| op.dimension() != n) {
            return Err(Error::DimensionMismatch { left: n, right: op.dimension() });
        }
        for tau in [self.tau1, self.tau2] {
            if !(tau > 0.0 && tau <= 1.0) {
                return Err(Error::InvalidConfig(format!("tau {tau} outside (0, 1]")));
            }
        }
        match self.lambda_policy {
            LambdaPolicy::Fixed(c) => {
                if !(c >= self.tau1 && c <= 2.0 - self.tau2) {
                    return Err(Error::InvalidConfig(format!(
                        "fixed relaxation {c} outside [{}, {}]",
                        self.tau1,
                        2.0 - self.tau2
                    )));
                }
            }
            LambdaPolicy::Fraction(g) => {
                if !(g > 0.0 && g <= 1.0) {
                    return Err(Error::InvalidConfig(format!("fraction {g} outside (0, 1]")));
                }
            }
            LambdaPolicy::MaxExtrapolation => {}
        }
        if self.max_iterations == 0 {
            return Err(Error::InvalidConfig("max_iterations must be >= 1".into()));
        }
        if !(self.residual_tolerance > 0.0 && self.residual_tolerance.is_finite()) {
            return Err(Error::InvalidConfig("residual tolerance must be positive".into()));
        }
        if !(self.lambda_cap >= 1.0) {
            return Err(Error::InvalidConfig("lambda cap must be >= 1".into()));
        }
        if self.schedule.index_count() != ops.len() {
            return Err(Error::InvalidConfig(format!(
                "schedule addresses {} operators, problem has {}",
                self.schedule.index_count(),
                ops.len()
            )));
        }
        for q in &self.reference_points {
            if q.dim() != n {
                return Err(Error::DimensionMismatch { left: q.dim(), right: n });
            }
        }
        Ok(())
    }
}

/// Per-step log entry. `x` is the iterate before the step; `step_norm` is the
/// norm of the move to the next iterate.
#[derive(Clone, Debug)]
pub struct IterationRecord {
    pub k: usize,
    pub x: Vector,
    pub weights: WeightVector,
    /// The block: support of the step's weight vector.
    pub block: Vec<usize>,
    /// The extrapolation gain L_k.
    pub gain: f64,
    pub lambda: f64,
    /// Full-family residual at `x`, when this step measured it.
    pub residual: Option<f64>,
    pub step_norm: f64,
    /// Distance of `x` to each configured reference point.
    pub distances_to_refs: Vec<f64>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum SolveStatus {
    Converged,
    MaxIterations,
    Error,
}

#[derive(Clone, Debug)]
pub struct SolveResult {
    pub status: SolveStatus,
    pub final_point: Vector,
    /// Steps actually taken.
    pub iterations: usize,
    /// Full-family residual at the final point (NaN if it could not be
    /// evaluated after an error).
    pub final_residual: f64,
    pub message: Option<String>,
    pub trace: Vec<IterationRecord>,
}

/// Pick the relaxation parameter for one step; always lands inside
/// `[tau1, (2 - tau2) gain]`.
pub fn choose_lambda(policy: &LambdaPolicy, tau1: f64, tau2: f64, gain: f64) -> f64 {
    match policy {
        LambdaPolicy::Fixed(c) => *c,
        LambdaPolicy::MaxExtrapolation => (2.0 - tau2) * gain,
        LambdaPolicy::Fraction(g) => (g * (2.0 - tau2) * gain).max(tau1),
    }
}

/// `max_i |T_i(x) - x|` over the whole family. This is the convergence
/// certificate: it quantifies over every operator, not just the current
/// block.
pub fn full_residual(ops: &[Cutter], x: &Vector) -> Result<f64> {
    let mut r: f64 = 0.0;
    for op in ops {
        r = r.max(fixed_point_residual(op, x)?);
    }
    Ok(r)
}

/// One iteration of the scheme: validates that `lambda` is admissible for
/// the gain at `x`, then relaxes along the weighted displacement. Only
/// operators in the support of `w` are evaluated.
pub fn step(
    ops: &[Cutter],
    x: &Vector,
    w: &WeightVector,
    lambda: f64,
    tau1: f64,
    tau2: f64,
) -> Result<Vector> {
    let report = combination_report_with_cap(ops, w, x, DEFAULT_LAMBDA_CAP)?;
    let hi = (2.0 - tau2) * report.gain;
    if !(lambda >= tau1 - rel_tol(tau1) && lambda <= hi + rel_tol(hi)) {
        return Err(Error::LambdaOutOfRange { lambda, lo: tau1, hi });
    }
    if report.block_fixed() {
        return Ok(x.clone());
    }
    Ok(x.add_scaled(lambda, &report.t_w_minus_x))
}

struct TraceBuffer {
    records: Vec<IterationRecord>,
    keep_stride: usize,
    limit: usize,
}

impl TraceBuffer {
    fn new(limit: usize) -> Self {
        Self { records: Vec::new(), keep_stride: 1, limit: limit.max(2) }
    }

    fn push(&mut self, rec: IterationRecord) {
        if !rec.k.is_multiple_of(self.keep_stride) {
            return;
        }
        self.records.push(rec);
        if self.records.len() > self.limit {
            self.keep_stride *= 2;
            let stride = self.keep_stride;
            self.records.retain(|r| r.k % stride == 0);
        }
    }
}

/// Run the iteration from `x0` until the full-family residual drops to the
/// tolerance or the iteration budget runs out. Any step error aborts with
/// status `Error` and the partial trace. A nonempty common fixed-point set
/// is the standing assumption; it is not (and cannot be) verified here.
pub fn run(ops: &[Cutter], x0: &Vector, config: &SolverConfig) -> SolveResult {
    let mut trace = TraceBuffer::new(config.trace_limit);
    let mut x = x0.clone();
    let mut iterations = 0usize;
    match run_loop(ops, config, &mut x, &mut iterations, &mut trace) {
        Ok((status, final_residual)) => SolveResult {
            status,
            final_point: x,
            iterations,
            final_residual,
            message: None,
            trace: trace.records,
        },
        Err(e) => {
            let final_residual = full_residual(ops, &x).unwrap_or(f64::NAN);
            SolveResult {
                status: SolveStatus::Error,
                final_point: x,
                iterations,
                final_residual,
                message: Some(e.to_string()),
                trace: trace.records,
            }
        }
    }
}

fn run_loop(
    ops: &[Cutter],
    config: &SolverConfig,
    x: &mut Vector,
    iterations: &mut usize,
    trace: &mut TraceBuffer,
) -> Result<(SolveStatus, f64)> {
    config.validate(ops)?;
    if x.dim() != ops[0].dimension() {
        return Err(Error::DimensionMismatch { left: x.dim(), right: ops[0].dimension() });
    }
    let m = ops.len();
    let stride = config.residual_check_stride.unwrap_or(m).max(1);

    for k in 0..config.max_iterations {
        *iterations = k;
        let measured = if k % stride == 0 {
            let r = full_residual(ops, x)?;
            if r <= config.residual_tolerance {
                return Ok((SolveStatus::Converged, r));
            }
            Some(r)
        } else {
            None
        };

        let w = config.schedule.weights_at(k)?;
        if w.len() != m {
            return Err(Error::DimensionMismatch { left: w.len(), right: m });
        }
        let report = combination_report_with_cap(ops, &w, x, config.lambda_cap)?;
        let lambda = choose_lambda(&config.lambda_policy, config.tau1, config.tau2, report.gain);

        // hard admissibility assertion on every recorded step
        let hi = (2.0 - config.tau2) * report.gain;
        if !(lambda >= config.tau1 - rel_tol(config.tau1) && lambda <= hi + rel_tol(hi)) {
            return Err(Error::LambdaOutOfRange { lambda, lo: config.tau1, hi });
        }

        // When the block fixes x while the full residual is still large, the
        // step degenerates to x itself and the schedule moves on; recurrence
        // of the other indices is the weight condition's job.
        let x_next = if report.block_fixed() {
            x.clone()
        } else {
            x.add_scaled(lambda, &report.t_w_minus_x)
        };
        if !x_next.all_finite() {
            return Err(Error::NonFinite(format!("iterate at step {k}")));
        }

        let step_norm = x_next.dist(x);
        let distances_to_refs = config.reference_points.iter().map(|q| x.dist(q)).collect();
        trace.push(IterationRecord {
            k,
            x: x.clone(),
            weights: w.clone(),
            block: w.support(),
            gain: report.gain,
            lambda,
            residual: measured,
            step_norm,
            distances_to_refs,
        });
        *x = x_next;
    }

    *iterations = config.max_iterations;
    let r = full_residual(ops, x)?;
    let status = if r <= config.residual_tolerance {
        SolveStatus::Converged
    } else {
        SolveStatus::MaxIterations
    };
    Ok((status, r))
}

/// Which audited inequality a violation refers to.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum FejerCheck {
    /// Per-reference monotone distance decrease.
    Monotonicity,
    /// The relaxation lay inside `[tau1, (2 - tau2) L_k]`.
    LambdaInterval,
    /// Squared-distance decrease by `tau1 tau2` times the weighted squared
    /// displacement. Valid on the whole admissible interval.
    WeightedDecrease,
    /// Squared-distance decrease proportional to the squared step. The
    /// constant is `tau2` up to the unrelaxed depth (`lambda <= L_k`), where
    /// that form is a theorem; past it the sharp uniform constant over the
    /// admissible interval is `tau2 / (2 - tau2)` (the two coincide at
    /// `tau2 = 1`, and a single projector run at `lambda = (2 - tau2) L`
    /// attains it with equality).
    RelaxedDecrease,
    /// Running sum of squared steps stays below
    /// `(2 - tau2) |x0 - q|^2 / tau2`, the bound the relaxed decrease yields
    /// uniformly over the admissible interval (`|x0 - q|^2 / tau2` holds on
    /// runs that stay at or below the unrelaxed depth, and at `tau2 = 1`).
    StepSummability,
}

#[derive(Clone, Debug)]
pub struct FejerViolation {
    pub k: usize,
    /// Index into the reference list, when the check quantifies over one.
    pub ref_index: Option<usize>,
    pub check: FejerCheck,
    /// How far past the tolerance the inequality failed.
    pub excess: f64,
}

#[derive(Clone, Debug)]
pub struct FejerAudit {
    /// Steps the audit looked at.
    pub steps_audited: usize,
    /// Transitions with consecutive iteration indices (full per-step checks).
    pub adjacent_transitions: usize,
    /// Sum of squared step norms over the audited records.
    pub sum_sq_steps: f64,
    pub first_violation: Option<FejerViolation>,
}

impl FejerAudit {
    pub fn passed(&self) -> bool {
        self.first_violation.is_none()
    }
}

/// Trace data the audit consumes: what a trace row records about one step.
#[derive(Clone, Debug)]
pub struct RecordedStep {
    pub k: usize,
    pub lambda: f64,
    pub gain: f64,
    pub step_norm: f64,
    /// Distances to the reference points at this step's iterate.
    pub dists: Vec<f64>,
}

const PER_STEP_SLACK: f64 = 1e-10;
const SUM_SLACK: f64 = 1e-8;

/// Audit recorded steps directly (the CSV-level entry point). Distances may
/// be empty, in which case only the interval admissibility is checked.
/// `final_dists`, when given, supplies the distances after the last recorded
/// step together with whether that transition is a single iteration.
pub fn audit_recorded_steps(
    steps: &[RecordedStep],
    final_dists: Option<(&[f64], bool)>,
    tau1: f64,
    tau2: f64,
) -> Result<FejerAudit> {
    for tau in [tau1, tau2] {
        if !(tau > 0.0 && tau <= 1.0) {
            return Err(Error::InvalidConfig(format!("tau {tau} outside (0, 1]")));
        }
    }
    let mut audit = FejerAudit {
        steps_audited: steps.len(),
        adjacent_transitions: 0,
        sum_sq_steps: 0.0,
        first_violation: None,
    };
    let mut violations: Vec<FejerViolation> = Vec::new();
    let d0: Vec<f64> = steps.first().map(|s| s.dists.clone()).unwrap_or_default();
    let mut sum_sq = 0.0;

    for (i, s) in steps.iter().enumerate() {
        // (b) precondition: the recorded relaxation was admissible
        let hi = (2.0 - tau2) * s.gain;
        if !(s.lambda >= tau1 - rel_tol(tau1) && s.lambda <= hi + rel_tol(hi)) {
            violations.push(FejerViolation {
                k: s.k,
                ref_index: None,
                check: FejerCheck::LambdaInterval,
                excess: (s.lambda - hi).max(tau1 - s.lambda),
            });
        }

        sum_sq += s.step_norm * s.step_norm;
        for (j, d0j) in d0.iter().enumerate() {
            // (d) running bound from the relaxed decrease, uniform over the
            // admissible interval
            let bound = d0j * d0j * (2.0 - tau2) / tau2 + SUM_SLACK;
            if sum_sq > bound {
                violations.push(FejerViolation {
                    k: s.k,
                    ref_index: Some(j),
                    check: FejerCheck::StepSummability,
                    excess: sum_sq - bound,
                });
            }
        }

        let next: Option<(&[f64], bool)> = if i + 1 < steps.len() {
            let n = &steps[i + 1];
            Some((&n.dists, n.k == s.k + 1))
        } else {
            final_dists
        };
        let Some((after, adjacent)) = next else { continue };
        if after.len() != s.dists.len() {
            return Err(Error::DimensionMismatch { left: after.len(), right: s.dists.len() });
        }
        if adjacent {
            audit.adjacent_transitions += 1;
        }
        // Weighted squared displacement reconstructed from the recorded
        // step: |x_{k+1} - x_k| = lambda |T_w(x_k) - x_k|, so the sum is
        // gain * (step / lambda)^2.
        let weighted_sq = if s.lambda > 0.0 {
            s.gain * (s.step_norm / s.lambda) * (s.step_norm / s.lambda)
        } else {
            0.0
        };
        for j in 0..s.dists.len() {
            let before = s.dists[j];
            let a = after[j];
            // (a) Fejer monotonicity (valid across thinned gaps)
            if a > before + PER_STEP_SLACK {
                violations.push(FejerViolation {
                    k: s.k,
                    ref_index: Some(j),
                    check: FejerCheck::Monotonicity,
                    excess: a - before - PER_STEP_SLACK,
                });
            }
            if adjacent {
                // (b) decrease by tau1 tau2 * weighted displacement
                let rhs_b = before * before - tau1 * tau2 * weighted_sq + PER_STEP_SLACK;
                if a * a > rhs_b {
                    violations.push(FejerViolation {
                        k: s.k,
                        ref_index: Some(j),
                        check: FejerCheck::WeightedDecrease,
                        excess: a * a - rhs_b,
                    });
                }
                // (c) decrease proportional to the squared step; the tau2
                // constant applies up to the unrelaxed depth, the uniform
                // constant tau2/(2 - tau2) beyond it
                let c2 = if s.lambda <= s.gain * (1.0 + 1e-12) {
                    tau2
                } else {
                    tau2 / (2.0 - tau2)
                };
                let rhs_c = before * before - c2 * s.step_norm * s.step_norm + PER_STEP_SLACK;
                if a * a > rhs_c {
                    violations.push(FejerViolation {
                        k: s.k,
                        ref_index: Some(j),
                        check: FejerCheck::RelaxedDecrease,
                        excess: a * a - rhs_c,
                    });
                }
            }
        }
    }

    audit.sum_sq_steps = sum_sq;
    audit.first_violation = violations.into_iter().min_by_key(|v| v.k);
    Ok(audit)
}

/// Audit a solve result against reference points assumed to lie in the
/// common fixed-point set: Fejer monotonicity, both per-step decrease
/// inequalities, interval admissibility, and the step-summability bound.
/// Distances are recomputed from the recorded iterates.
pub fn fejer_audit(
    result: &SolveResult,
    refs: &[Vector],
    tau1: f64,
    tau2: f64,
) -> Result<FejerAudit> {
    if refs.is_empty() {
        return Err(Error::InvalidConfig("audit needs at least one reference point".into()));
    }
    let steps: Vec<RecordedStep> = result
        .trace
        .iter()
        .map(|r| RecordedStep {
            k: r.k,
            lambda: r.lambda,
            gain: r.gain,
            step_norm: r.step_norm,
            dists: refs.iter().map(|q| r.x.dist(q)).collect(),
        })
        .collect();
    let final_dists: Vec<f64> = refs.iter().map(|q| result.final_point.dist(q)).collect();
    let final_adjacent = result
        .trace
        .last()
        .map(|r| r.k + 1 == result.iterations)
        .unwrap_or(false);
    audit_recorded_steps(&steps, Some((&final_dists, final_adjacent)), tau1, tau2)
}
