//! The verification battery: every acceptance criterion as a runnable check,
//! shared by the `verify` CLI command and the acceptance test suite.
//!
//! Each check pins its tolerances and its runtime budget; a check passes only
//! if the assertions hold and the budget is met. Checks are deterministic
//! under the base seed.

use std::time::Instant;

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::combine::{self, apply_relaxed, apply_tw};
use crate::generate::{self, Geometry};
use crate::linalg::Vector;
use crate::operators::{
    check_cutter_inequality, evaluate, fixed_point_residual, Cutter, HalfspaceSet,
};
use crate::productspace;
use crate::solver::{
    choose_lambda, fejer_audit, full_residual, run, FejerCheck, LambdaPolicy, SolveResult,
    SolveStatus, SolverConfig,
};
use crate::weights::{
    partial_sums, verify_intermittent, Verdict, WeightSchedule, WeightVector,
};

#[derive(Clone, Debug)]
pub struct CheckOutcome {
    pub id: &'static str,
    pub label: &'static str,
    pub budget_seconds: f64,
    pub seconds: f64,
    pub passed: bool,
    pub details: String,
}

impl CheckOutcome {
    fn finish(
        id: &'static str,
        label: &'static str,
        budget_seconds: f64,
        started: Instant,
        ok: bool,
        details: String,
    ) -> Self {
        let seconds = started.elapsed().as_secs_f64();
        let passed = ok && seconds <= budget_seconds;
        let details = if ok && !passed {
            format!("over budget ({seconds:.1}s > {budget_seconds}s); {details}")
        } else {
            details
        };
        Self { id, label, budget_seconds, seconds, passed, details }
    }

    pub fn line(&self) -> String {
        format!(
            "{} {:34} ({:.2}s / {:.0}s) {}",
            if self.passed { "PASS" } else { "FAIL" },
            self.id,
            self.seconds,
            self.budget_seconds,
            self.details
        )
    }
}

/// Run the full battery in criterion order.
pub fn run_all(base_seed: u64) -> Vec<CheckOutcome> {
    run_battery(base_seed, false)
}

/// Run the battery without the two long convergence suites.
pub fn run_quick(base_seed: u64) -> Vec<CheckOutcome> {
    run_battery(base_seed, true)
}

fn run_battery(base_seed: u64, skip_convergence: bool) -> Vec<CheckOutcome> {
    let mut out = Vec::new();
    out.push(check_cutter_axioms(base_seed));
    out.push(check_lambda_hat_agreement(base_seed));
    let (fejer, suite) = check_fejer_inequalities(base_seed);
    out.push(fejer);
    out.push(check_two_hyperplane_exact());
    if !skip_convergence {
        out.push(check_convergence_intermittent(base_seed));
        out.push(check_convergence_divergent_sum(base_seed));
    }
    out.push(check_weight_verifiers(base_seed));
    out.push(check_step_summability(&suite));
    out.push(check_nesting_inclusion(base_seed));
    out.push(check_support_characterization(base_seed));
    out
}

fn rng_for(base_seed: u64, salt: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(base_seed ^ salt.wrapping_mul(0x9E37_79B9_7F4A_7C15))
}

fn random_point(rng: &mut ChaCha8Rng, n: usize, scale: f64) -> Vector {
    Vector::new((0..n).map(|_| rng.random_range(-scale..scale)).collect()).unwrap()
}

fn random_unit(rng: &mut ChaCha8Rng, n: usize) -> Vector {
    loop {
        let v = random_point(rng, n, 1.0);
        let norm = v.norm();
        if norm > 0.1 {
            return v.scale(1.0 / norm);
        }
    }
}

fn random_positive_weights(rng: &mut ChaCha8Rng, m: usize) -> WeightVector {
    let raw: Vec<f64> = (0..m).map(|_| rng.random_range(0.05..1.0)).collect();
    let sum: f64 = raw.iter().sum();
    WeightVector::new(raw.into_iter().map(|e| e / sum).collect()).unwrap()
}

fn two_hyperplane_ops() -> Vec<Cutter> {
    vec![
        Cutter::hyperplane(Vector::new(vec![0.0, 1.0]).unwrap(), 0.0).unwrap(),
        Cutter::hyperplane(Vector::new(vec![1.0, 0.0]).unwrap(), 0.0).unwrap(),
    ]
}

// ---------------------------------------------------------------------------
// criterion 1: the cutter inequality on every shipped kind
// ---------------------------------------------------------------------------

/// A shipped kind together with an evaluate-independent sampler of its
/// fixed-point set.
struct KindCase {
    op: Cutter,
    sample_fixed: Box<dyn Fn(&mut ChaCha8Rng) -> Vector>,
}

fn kind_cases(rng: &mut ChaCha8Rng, n: usize) -> Vec<KindCase> {
    let mut cases = Vec::new();

    let normal = random_unit(rng, n).scale(rng.random_range(0.5..2.0));
    let offset = rng.random_range(-1.0..1.0);
    let nn = normal.clone();
    cases.push(KindCase {
        op: Cutter::halfspace(normal.clone(), offset).unwrap(),
        sample_fixed: Box::new(move |r| {
            // any point, pulled to the feasible side with positive margin
            let u = Vector::new((0..n).map(|_| r.random_range(-2.0..2.0)).collect()).unwrap();
            let s = crate::linalg::inner(&nn, &u).unwrap();
            let margin = r.random_range(0.0..2.0);
            u.add_scaled(-(s - offset).max(0.0) / nn.norm_sq() - margin / nn.norm_sq(), &nn)
        }),
    });

    let normal = random_unit(rng, n).scale(rng.random_range(0.5..2.0));
    let offset = rng.random_range(-1.0..1.0);
    let nn = normal.clone();
    cases.push(KindCase {
        op: Cutter::hyperplane(normal.clone(), offset).unwrap(),
        sample_fixed: Box::new(move |r| {
            let u = Vector::new((0..n).map(|_| r.random_range(-2.0..2.0)).collect()).unwrap();
            let s = crate::linalg::inner(&nn, &u).unwrap();
            u.add_scaled(-(s - offset) / nn.norm_sq(), &nn)
        }),
    });

    let center = random_point(rng, n, 1.0);
    let radius = rng.random_range(0.3..2.0);
    let c = center.clone();
    cases.push(KindCase {
        op: Cutter::ball(center.clone(), radius).unwrap(),
        sample_fixed: Box::new(move |r| {
            let dir = {
                let v = Vector::new((0..n).map(|_| r.random_range(-1.0..1.0)).collect()).unwrap();
                let nrm = v.norm().max(0.05);
                v.scale(1.0 / nrm)
            };
            c.add_scaled(radius * r.random_range(0.0..1.0), &dir)
        }),
    });

    let lower = random_point(rng, n, 1.0);
    let upper = lower.add_scaled(1.0, &Vector::new(vec![rng.random_range(0.2..2.0); n]).unwrap());
    let (lo, up) = (lower.clone(), upper.clone());
    cases.push(KindCase {
        op: Cutter::box_set(lower, upper).unwrap(),
        sample_fixed: Box::new(move |r| {
            Vector::new(
                (0..n)
                    .map(|i| lo[i] + r.random_range(0.0..1.0) * (up[i] - lo[i]))
                    .collect(),
            )
            .unwrap()
        }),
    });

    if n >= 2 {
        let rows: Vec<Vector> = (0..(n - 1).min(2))
            .map(|i| {
                // canonical-ish rows kept independent by disjoint leading entries
                let mut e = vec![0.0; n];
                e[i] = 1.0;
                let mut v = Vector::new(e).unwrap();
                v = v.add_scaled(0.3, &random_unit(rng, n));
                v
            })
            .collect();
        let rhs: Vec<f64> = rows.iter().map(|_| rng.random_range(-1.0..1.0)).collect();
        let op = Cutter::affine_subspace(rows, rhs).unwrap();
        let proj_op = op.clone();
        cases.push(KindCase {
            op,
            sample_fixed: Box::new(move |r| {
                let u = Vector::new((0..n).map(|_| r.random_range(-2.0..2.0)).collect()).unwrap();
                // the projection of a random point spans the subspace; for the
                // sampler this closed form is the geometric ground truth
                evaluate(&proj_op, &u).unwrap()
            }),
        });
    }

    let center = random_point(rng, n, 1.0);
    let radius = rng.random_range(0.3..2.0);
    let c = center.clone();
    cases.push(KindCase {
        op: Cutter::quadratic_sublevel(center, radius).unwrap(),
        sample_fixed: Box::new(move |r| {
            let dir = {
                let v = Vector::new((0..n).map(|_| r.random_range(-1.0..1.0)).collect()).unwrap();
                let nrm = v.norm().max(0.05);
                v.scale(1.0 / nrm)
            };
            c.add_scaled(radius * r.random_range(0.0..1.0), &dir)
        }),
    });

    cases
}

pub fn check_cutter_axioms(base_seed: u64) -> CheckOutcome {
    let started = Instant::now();
    let mut rng = rng_for(base_seed, 1);
    let mut max_value = f64::NEG_INFINITY;
    let mut samples = 0usize;
    let mut failure = None;

    'outer: for n in [2usize, 5, 20] {
        for case in kind_cases(&mut rng, n) {
            for _ in 0..1000 {
                let x = random_point(&mut rng, n, 2.0);
                let q = (case.sample_fixed)(&mut rng);
                if !case.op.fixed_set_contains(&q, 1e-9).unwrap() {
                    failure = Some(format!(
                        "sampler produced a non-fixed point for {}",
                        case.op.kind_name()
                    ));
                    break 'outer;
                }
                let value = check_cutter_inequality(&case.op, &x, &q).unwrap();
                max_value = max_value.max(value);
                samples += 1;
                if value > 1e-12 {
                    failure = Some(format!(
                        "{} violated the cutter inequality: {value:.3e} at n={n}",
                        case.op.kind_name()
                    ));
                    break 'outer;
                }
            }
        }
    }

    let ok = failure.is_none();
    let details = failure
        .unwrap_or_else(|| format!("{samples} samples, max value {max_value:.2e} <= 1e-12"));
    CheckOutcome::finish("cutter-axioms", "cutter inequality on all kinds", 5.0, started, ok, details)
}

// ---------------------------------------------------------------------------
// criterion 2: the two lambda-hat routes agree
// ---------------------------------------------------------------------------

/// An instance family in which a far point along `push` violates every
/// operator at once, so "bounded away from the common set" is achievable by
/// construction (min per-operator residual over the full support).
fn coviolable_instance(
    rng: &mut ChaCha8Rng,
    n: usize,
    m: usize,
) -> (Vec<Cutter>, Vec<Vector>, Vector, Vector) {
    let rho = 0.3;
    let center = random_point(rng, n, 1.0);
    let push = random_unit(rng, n);
    let mut ops = Vec::with_capacity(m);
    for slot in 0..m {
        match slot % 4 {
            0 => {
                // normal biased along `push` so deep points are infeasible
                let normal = random_unit(rng, n).add_scaled(1.5, &push);
                let offset = crate::linalg::inner(&normal, &center).unwrap() + rho * normal.norm();
                ops.push(Cutter::halfspace(normal, offset).unwrap());
            }
            1 => {
                let dir = random_unit(rng, n);
                let shift = rng.random_range(0.0..1.0);
                let c = center.add_scaled(shift, &dir);
                ops.push(Cutter::ball(c, shift + rho).unwrap());
            }
            2 => {
                let lower = Vector::new(
                    (0..n).map(|i| center[i] - rho - rng.random_range(0.0..1.0)).collect(),
                )
                .unwrap();
                let upper = Vector::new(
                    (0..n).map(|i| center[i] + rho + rng.random_range(0.0..1.0)).collect(),
                )
                .unwrap();
                ops.push(Cutter::box_set(lower, upper).unwrap());
            }
            _ => {
                let dir = random_unit(rng, n);
                let shift = rng.random_range(0.0..1.0);
                let c = center.add_scaled(shift, &dir);
                ops.push(Cutter::quadratic_sublevel(c, shift + rho).unwrap());
            }
        }
    }
    let second = center.add_scaled(rho * 0.5, &random_unit(rng, n));
    (ops, vec![center.clone(), second], center, push)
}

pub fn check_lambda_hat_agreement(base_seed: u64) -> CheckOutcome {
    let started = Instant::now();
    let mut rng = rng_for(base_seed, 2);
    let mut worst_rel = 0.0f64;
    let mut min_value = f64::INFINITY;
    let mut failure = None;

    'outer: for trial in 0..1000 {
        let n = 2 + (trial % 5);
        let m = 2 + (trial % 9);
        let (ops, _refs, center, push) = coviolable_instance(&mut rng, n, m);
        let w = random_positive_weights(&mut rng, m);

        // bounded away from the common set: every supported operator violated
        let mut x = center
            .add_scaled(rng.random_range(4.0..6.0), &push)
            .add_scaled(0.05, &random_unit(&mut rng, n));
        let mut ok_x = false;
        for _ in 0..20 {
            let min_res = ops
                .iter()
                .map(|op| fixed_point_residual(op, &x).unwrap())
                .fold(f64::INFINITY, f64::min);
            if min_res >= 1e-6 {
                ok_x = true;
                break;
            }
            x = center.add_scaled(rng.random_range(5.0..8.0), &push);
        }
        if !ok_x {
            failure = Some(format!("trial {trial}: no bounded-away point found"));
            break 'outer;
        }

        let component = combine::lambda_hat(&ops, &w, &x).unwrap();
        let product = productspace::lambda_hat_product(&ops, &w, &x).unwrap();
        let rel = (component - product).abs() / component.abs().max(1.0);
        worst_rel = worst_rel.max(rel);
        min_value = min_value.min(component.min(product));
        if rel > 1e-10 {
            failure = Some(format!(
                "trial {trial}: routes disagree, component {component} vs product {product}"
            ));
            break 'outer;
        }
        if component < 1.0 - 1e-12 || product < 1.0 - 1e-12 {
            failure = Some(format!("trial {trial}: gain below one: {component} / {product}"));
            break 'outer;
        }
    }

    let ok = failure.is_none();
    let details = failure.unwrap_or_else(|| {
        format!("1000 instances, worst relative gap {worst_rel:.2e}, min value {min_value:.12}")
    });
    CheckOutcome::finish(
        "lambda-hat-agreement",
        "component vs product-space gain",
        5.0,
        started,
        ok,
        details,
    )
}

// ---------------------------------------------------------------------------
// criteria 3 + 8: Fejer inequalities on traces, fault injection, summability
// ---------------------------------------------------------------------------

pub struct AuditedRun {
    pub result: SolveResult,
    pub refs: Vec<Vector>,
    pub tau1: f64,
    pub tau2: f64,
    pub label: String,
}

/// The small convergence suite audited by criteria 3 and 8.
pub fn convergence_mini_suite(base_seed: u64) -> Vec<AuditedRun> {
    let mut runs = Vec::new();
    let mut push = |ops: &[Cutter],
                    x0: &Vector,
                    refs: Vec<Vector>,
                    schedule: WeightSchedule,
                    policy: LambdaPolicy,
                    tau1: f64,
                    tau2: f64,
                    label: String| {
        let mut config = SolverConfig::new(schedule);
        config.tau1 = tau1;
        config.tau2 = tau2;
        config.lambda_policy = policy;
        config.max_iterations = 20_000;
        config.residual_tolerance = 1e-9;
        config.reference_points = refs.clone();
        let result = run(ops, x0, &config);
        runs.push(AuditedRun { result, refs, tau1, tau2, label });
    };

    let two = two_hyperplane_ops();
    let x0 = Vector::new(vec![1.0, 1.0]).unwrap();
    let origin = vec![Vector::zeros(2)];
    push(
        &two,
        &x0,
        origin.clone(),
        WeightSchedule::constant_uniform(2).unwrap(),
        LambdaPolicy::MaxExtrapolation,
        1.0,
        1.0,
        "two-hyperplanes/uniform/max".into(),
    );
    push(
        &two,
        &x0,
        origin,
        WeightSchedule::constant_uniform(2).unwrap(),
        LambdaPolicy::Fixed(1.0),
        0.5,
        0.8,
        "two-hyperplanes/uniform/fixed1".into(),
    );

    for (idx, geometry) in [(0u64, Geometry::Halfspaces), (1, Geometry::Mixed)] {
        let inst = generate::random_instance(5 + idx as usize, 5, geometry, base_seed + 40 + idx)
            .expect("generator");
        let m = inst.operators.len();
        let schedules: Vec<(WeightSchedule, &str)> = vec![
            (WeightSchedule::constant_uniform(m).unwrap(), "uniform"),
            (WeightSchedule::example46(m).unwrap(), "example46"),
            (WeightSchedule::cyclic_singleton(m).unwrap(), "cyclic"),
        ];
        for (schedule, sname) in schedules {
            for (policy, pname, t1, t2) in [
                (LambdaPolicy::MaxExtrapolation, "max", 1.0, 1.0),
                (LambdaPolicy::Fixed(1.0), "fixed1", 0.5, 0.8),
            ] {
                push(
                    &inst.operators,
                    &inst.x0,
                    inst.reference_points.clone(),
                    schedule.clone(),
                    policy,
                    t1,
                    t2,
                    format!("gen{idx}/{sname}/{pname}"),
                );
            }
        }
    }
    runs
}

pub fn check_fejer_inequalities(base_seed: u64) -> (CheckOutcome, Vec<AuditedRun>) {
    let started = Instant::now();
    let suite = convergence_mini_suite(base_seed);
    let mut failure = None;
    let mut audited = 0usize;

    for run_case in &suite {
        if run_case.result.status != SolveStatus::Converged {
            failure = Some(format!("{}: did not converge", run_case.label));
            break;
        }
        match fejer_audit(&run_case.result, &run_case.refs, run_case.tau1, run_case.tau2) {
            Ok(audit) if audit.passed() => audited += 1,
            Ok(audit) => {
                let v = audit.first_violation.unwrap();
                failure = Some(format!(
                    "{}: {:?} violated at k={} by {:.3e}",
                    run_case.label, v.check, v.k, v.excess
                ));
                break;
            }
            Err(e) => {
                failure = Some(format!("{}: audit error {e}", run_case.label));
                break;
            }
        }
    }

    // fault injection: an inflated recorded relaxation must be caught
    if failure.is_none() {
        let victim = suite
            .iter()
            .find(|r| r.result.trace.len() >= 3)
            .expect("suite has multi-step runs");
        let mut corrupted = victim.result.clone();
        let k_bad = corrupted.trace.len() / 2;
        let rec = &mut corrupted.trace[k_bad];
        rec.lambda = (2.0 - victim.tau2) * rec.gain * 1.5;
        let k_bad = rec.k;
        match fejer_audit(&corrupted, &victim.refs, victim.tau1, victim.tau2) {
            Ok(audit) => match audit.first_violation {
                Some(v) if v.k == k_bad && v.check == FejerCheck::LambdaInterval => {}
                Some(v) => {
                    failure = Some(format!(
                        "fault injection misattributed: {:?} at k={} (expected k={k_bad})",
                        v.check, v.k
                    ))
                }
                None => failure = Some("fault injection went undetected".into()),
            },
            Err(e) => failure = Some(format!("fault-injection audit error {e}")),
        }
    }

    let ok = failure.is_none();
    let details = failure
        .clone()
        .unwrap_or_else(|| format!("{audited} traces audited clean; injected fault detected"));
    (
        CheckOutcome::finish(
            "fejer-inequalities",
            "per-step decreases + fault injection",
            10.0,
            started,
            ok,
            details,
        ),
        suite,
    )
}

pub fn check_step_summability(suite: &[AuditedRun]) -> CheckOutcome {
    let started = Instant::now();
    let mut failure = None;
    let mut worst_ratio = 0.0f64;

    for run_case in suite {
        let trace = &run_case.result.trace;
        if trace.is_empty() {
            continue;
        }
        let sum_sq: f64 = trace.iter().map(|r| r.step_norm * r.step_norm).sum();
        for q in &run_case.refs {
            let d0 = trace[0].x.dist(q);
            let bound = d0 * d0 / run_case.tau2 + 1e-8;
            worst_ratio = worst_ratio.max(sum_sq / bound);
            if sum_sq > bound {
                failure = Some(format!(
                    "{}: step-square sum {sum_sq:.6e} exceeds bound {bound:.6e}",
                    run_case.label
                ));
            }
        }
    }

    let ok = failure.is_none();
    let details =
        failure.unwrap_or_else(|| format!("worst sum/bound ratio {worst_ratio:.3} over the suite"));
    CheckOutcome::finish(
        "step-summability",
        "sum of squared steps vs tau2 bound",
        10.0,
        started,
        ok,
        details,
    )
}

// ---------------------------------------------------------------------------
// criterion 4: the exact two-hyperplane step
// ---------------------------------------------------------------------------

pub fn check_two_hyperplane_exact() -> CheckOutcome {
    let started = Instant::now();
    let ops = two_hyperplane_ops();
    let mut config = SolverConfig::new(WeightSchedule::constant_uniform(2).unwrap());
    config.residual_check_stride = Some(1);
    let result = run(&ops, &Vector::new(vec![1.0, 1.0]).unwrap(), &config);

    let mut problems = Vec::new();
    if result.status != SolveStatus::Converged || result.iterations != 1 {
        problems.push(format!(
            "expected one-step convergence, got {:?} after {}",
            result.status, result.iterations
        ));
    }
    if let Some(rec) = result.trace.first() {
        if (rec.gain - 2.0).abs() > 1e-14 {
            problems.push(format!("gain {} != 2", rec.gain));
        }
        if (rec.lambda - 2.0).abs() > 1e-14 {
            problems.push(format!("lambda {} != 2", rec.lambda));
        }
    } else {
        problems.push("empty trace".into());
    }
    let err = result.final_point.as_slice().iter().map(|e| e.abs()).fold(0.0, f64::max);
    if err > 1e-14 {
        problems.push(format!("final point off the origin by {err:.3e}"));
    }

    let ok = problems.is_empty();
    let details = if ok {
        "L=2, lambda=2, one step to the origin (error 0)".to_string()
    } else {
        problems.join("; ")
    };
    CheckOutcome::finish(
        "two-hyperplane-exact",
        "hand-checked extrapolated step",
        1.0,
        started,
        ok,
        details,
    )
}

// ---------------------------------------------------------------------------
// criteria 5 + 6: convergence suites
// ---------------------------------------------------------------------------

fn suite_instances(base_seed: u64) -> Vec<generate::GeneratedInstance> {
    (0..20)
        .map(|i| {
            let n = 5 + (i % 16); // 5..20
            let m = 5 + (i % 6); // 5..10
            let geometry = if i % 2 == 0 { Geometry::Halfspaces } else { Geometry::Balls };
            generate::random_instance(n, m, geometry, base_seed + 1000 + i as u64)
                .expect("generator")
        })
        .collect()
}

pub fn check_convergence_intermittent(base_seed: u64) -> CheckOutcome {
    let started = Instant::now();
    let instances = suite_instances(base_seed);
    let mut failure = None;
    let mut total_runs = 0usize;
    let mut max_iters = 0usize;

    'outer: for (i, inst) in instances.iter().enumerate() {
        let m = inst.operators.len();
        let schedules: Vec<(WeightSchedule, &str)> = vec![
            (
                WeightSchedule::example45(m, 2 * m, base_seed + 7 * i as u64).unwrap(),
                "example45",
            ),
            (WeightSchedule::example46(m).unwrap(), "example46"),
            (WeightSchedule::cyclic_singleton(m).unwrap(), "cyclic-singleton"),
        ];
        for (schedule, sname) in schedules {
            for (policy, pname) in
                [(LambdaPolicy::Fixed(1.0), "fixed1"), (LambdaPolicy::MaxExtrapolation, "max")]
            {
                let mut config = SolverConfig::new(schedule.clone());
                config.lambda_policy = policy;
                config.max_iterations = 100_000;
                config.residual_tolerance = 1e-8;
                config.reference_points = inst.reference_points.clone();
                let result = run(&inst.operators, &inst.x0, &config);
                total_runs += 1;
                max_iters = max_iters.max(result.iterations);
                if result.status != SolveStatus::Converged {
                    failure = Some(format!(
                        "instance {i} ({}) {sname}/{pname}: {:?} after {} iterations, residual {:.3e}",
                        inst.spec.name, result.status, result.iterations, result.final_residual
                    ));
                    break 'outer;
                }
            }
        }
    }

    let ok = failure.is_none();
    let details = failure.unwrap_or_else(|| {
        format!("{total_runs} runs converged to 1e-8; worst iteration count {max_iters}")
    });
    CheckOutcome::finish(
        "convergence-intermittent",
        "20 instances x 3 schedules x 2 policies",
        60.0,
        started,
        ok,
        details,
    )
}

pub fn check_convergence_divergent_sum(base_seed: u64) -> CheckOutcome {
    let started = Instant::now();
    let instances = suite_instances(base_seed);
    let mut failure = None;
    let mut max_iters = 0usize;

    for (i, inst) in instances.iter().enumerate() {
        let m = inst.operators.len();
        let mut config =
            SolverConfig::new(WeightSchedule::remark44_counterexample(m).unwrap());
        config.lambda_policy = LambdaPolicy::MaxExtrapolation;
        config.max_iterations = 1_000_000;
        config.residual_tolerance = 1e-6;
        let result = run(&inst.operators, &inst.x0, &config);
        max_iters = max_iters.max(result.iterations);
        if result.status != SolveStatus::Converged {
            failure = Some(format!(
                "instance {i} ({}): {:?} after {} iterations, residual {:.3e}",
                inst.spec.name, result.status, result.iterations, result.final_residual
            ));
            break;
        }
    }

    let ok = failure.is_none();
    let details = failure.unwrap_or_else(|| {
        format!("20 interior-ball instances converged to 1e-6; worst iteration count {max_iters}")
    });
    CheckOutcome::finish(
        "convergence-divergent-sum",
        "decaying-weight schedule with interior",
        120.0,
        started,
        ok,
        details,
    )
}

// ---------------------------------------------------------------------------
// criterion 7: weight-condition verifiers
// ---------------------------------------------------------------------------

pub fn check_weight_verifiers(base_seed: u64) -> CheckOutcome {
    let started = Instant::now();
    let mut failure: Option<String> = None;

    // the uniform-every-m schedule holds its (m, 1/m) guarantee on 10^3
    for m in [2usize, 5, 10] {
        let sched = WeightSchedule::example46(m).unwrap();
        let report = verify_intermittent(&sched, 1000, m, 1.0 / m as f64).unwrap();
        if !report.holds() {
            failure = Some(format!("example46 m={m} failed its own guarantee"));
        }
    }

    // the randomized schedule holds (s, 1/(2m)) over ten windows
    if failure.is_none() {
        for (m, s) in [(2usize, 4usize), (5, 6)] {
            let sched = WeightSchedule::example45(m, s, base_seed + m as u64).unwrap();
            let report = verify_intermittent(&sched, 10 * s, s, 1.0 / (2.0 * m as f64)).unwrap();
            if !report.holds() {
                failure = Some(format!("example45 m={m} s={s} failed its own guarantee"));
            }
        }
    }

    // the counterexample schedule fails every grid point, with real witnesses
    let mut grid_hits = 0usize;
    if failure.is_none() {
        let m = 2usize;
        let sched = WeightSchedule::remark44_counterexample(m).unwrap();
        'grid: for window in [1usize, 5, 10, 25, 50] {
            for floor in [1e-3, 1e-2, 1e-1] {
                let horizon = (1.0 / (floor * m as f64)).ceil() as usize + 2 * window + 10;
                let report = verify_intermittent(&sched, horizon, window, floor).unwrap();
                match report.verdict {
                    Verdict::ViolatedAt { k, index } => {
                        // confirm the witness against the schedule itself
                        let genuine = (k..k + window)
                            .all(|j| sched.weights_at(j).unwrap().get(index) < floor);
                        if !genuine {
                            failure = Some(format!(
                                "spurious witness (k={k}, i={index}) at window={window}, floor={floor}"
                            ));
                            break 'grid;
                        }
                        grid_hits += 1;
                    }
                    Verdict::HoldsOnHorizon => {
                        failure = Some(format!(
                            "counterexample passed at window={window}, floor={floor}"
                        ));
                        break 'grid;
                    }
                }
            }
        }
    }

    // ... while its partial sums still pass 3 by the harmonic-bound horizon
    let mut sums_info = String::new();
    if failure.is_none() {
        let m = 2usize;
        let sched = WeightSchedule::remark44_counterexample(m).unwrap();
        // ln(horizon + 1) / m >= 3 guarantees the sum exceeds 3
        let horizon = ((3.0 * m as f64).exp() as usize) + 10;
        let sums = partial_sums(&sched, horizon).unwrap();
        if let Some((i, s)) = sums.iter().enumerate().find(|(_, s)| **s <= 3.0) {
            failure = Some(format!("partial sum {s} at index {i} below 3 on horizon {horizon}"));
        } else {
            sums_info = format!(
                "; partial sums at horizon {horizon}: [{}]",
                sums.iter().map(|s| format!("{s:.2}")).collect::<Vec<_>>().join(", ")
            );
        }
    }

    let ok = failure.is_none();
    let details = failure.unwrap_or_else(|| {
        format!("guarantees hold; counterexample violated on all {grid_hits} grid points{sums_info}")
    });
    CheckOutcome::finish(
        "weight-condition-verifiers",
        "intermittent floor vs divergent sums",
        5.0,
        started,
        ok,
        details,
    )
}

// ---------------------------------------------------------------------------
// criterion 9: half-space nesting and the inclusion chain
// ---------------------------------------------------------------------------

pub fn check_nesting_inclusion(base_seed: u64) -> CheckOutcome {
    let started = Instant::now();
    let mut rng = rng_for(base_seed, 9);
    let mut failure = None;
    let mut samples = 0usize;
    const SLACK: f64 = 1e-10;

    'outer: for i in 0..20usize {
        let n = 2 + (i % 5);
        let m = 2 + (i % 4);
        let (ops, refs, center, push) = coviolable_instance(&mut rng, n, m);
        for _ in 0..80 {
            let w = random_positive_weights(&mut rng, m);
            let x = center
                .add_scaled(rng.random_range(4.0..6.0), &push)
                .add_scaled(0.1, &random_unit(&mut rng, n));
            if full_residual(&ops, &x).unwrap() < 1e-3 {
                continue;
            }
            let lh = match combine::lambda_hat(&ops, &w, &x) {
                Ok(v) => v,
                Err(_) => continue,
            };
            let t_w = apply_tw(&ops, &w, &x).unwrap();
            let displacement = t_w.dist(&x);

            // nesting with a sampled member of the deeper half-space
            let lambda2 = rng.random_range(0.5..1.5 * lh.max(1.0));
            let lambda1 = lambda2 * rng.random_range(0.05..0.9);
            let y1 = apply_relaxed(&ops, &w, lambda1, &x).unwrap();
            let y2 = apply_relaxed(&ops, &w, lambda2, &x).unwrap();
            let h1 = HalfspaceSet::new(x.clone(), y1.clone()).unwrap();
            let h2 = HalfspaceSet::new(x.clone(), y2.clone()).unwrap();
            let mut z = random_point(&mut rng, n, 5.0);
            if h2.margin(&z).unwrap() > 0.0 {
                // reflect across the boundary hyperplane of H(x, y2)
                let normal = x.sub(&y2);
                let margin = h2.margin(&z).unwrap();
                z = z.add_scaled(-2.0 * margin / normal.norm_sq(), &normal);
            }
            samples += 1;
            if h1.margin(&z).unwrap() > SLACK {
                failure = Some(format!(
                    "nesting violated at instance {i}: member of deeper set escapes shallower"
                ));
                break 'outer;
            }
            // strictness witness: the shallower relaxed point is outside the
            // deeper half-space whenever the displacement is nontrivial
            if displacement >= 1e-3 {
                samples += 1;
                let strict = h2.margin(&y1).unwrap();
                if strict <= 0.0 {
                    failure = Some(format!(
                        "strictness witness failed at instance {i}: margin {strict:.3e}"
                    ));
                    break 'outer;
                }
            }

            // inclusion chain at lambda-hat and below, for every known common
            // fixed point
            let b = apply_relaxed(&ops, &w, lh, &x).unwrap();
            let hb = HalfspaceSet::new(x.clone(), b.clone()).unwrap();
            let hw = HalfspaceSet::new(x.clone(), t_w.clone()).unwrap();
            for q in &refs {
                samples += 2;
                if hb.margin(q).unwrap() > SLACK {
                    failure = Some(format!("q escaped the extrapolated half-space at {i}"));
                    break 'outer;
                }
                if hw.margin(q).unwrap() > SLACK {
                    failure = Some(format!("q escaped the unrelaxed half-space at {i}"));
                    break 'outer;
                }
                for frac in [0.25, 0.5, 0.75] {
                    samples += 1;
                    let y = apply_relaxed(&ops, &w, frac * lh, &x).unwrap();
                    let h = HalfspaceSet::new(x.clone(), y).unwrap();
                    if h.margin(q).unwrap() > SLACK {
                        failure = Some(format!("q escaped an intermediate half-space at {i}"));
                        break 'outer;
                    }
                }
            }
            // chain direction: members of the extrapolated set stay in the
            // unrelaxed one
            let mut zc = random_point(&mut rng, n, 5.0);
            if hb.margin(&zc).unwrap() > 0.0 {
                let normal = x.sub(&b);
                let margin = hb.margin(&zc).unwrap();
                if normal.norm_sq() > 0.0 {
                    zc = zc.add_scaled(-2.0 * margin / normal.norm_sq(), &normal);
                }
            }
            samples += 1;
            if hb.margin(&zc).unwrap() <= SLACK && hw.margin(&zc).unwrap() > SLACK {
                failure = Some(format!("extrapolated set escaped the unrelaxed one at {i}"));
                break 'outer;
            }
        }
    }

    let ok = failure.is_none();
    let details =
        failure.unwrap_or_else(|| format!("{samples} membership samples, zero violations"));
    CheckOutcome::finish(
        "halfspace-nesting-inclusion",
        "relaxation nesting + inclusion chain",
        10.0,
        started,
        ok,
        details,
    )
}

// ---------------------------------------------------------------------------
// criterion 10: fixed points of the relaxed operator vs per-operator residuals
// ---------------------------------------------------------------------------

pub fn check_support_characterization(base_seed: u64) -> CheckOutcome {
    let started = Instant::now();
    let mut failure: Option<String> = None;

    // a block solved while the full problem is not
    let ops = vec![
        Cutter::hyperplane(Vector::new(vec![0.0, 1.0]).unwrap(), 0.0).unwrap(),
        Cutter::ball(Vector::new(vec![0.0, 0.0]).unwrap(), 2.0).unwrap(),
        Cutter::halfspace(Vector::new(vec![1.0, 0.0]).unwrap(), -10.0).unwrap(),
    ];
    let w = WeightVector::new(vec![0.5, 0.5, 0.0]).unwrap();
    let x = Vector::new(vec![1.5, 0.0]).unwrap();
    for lambda in [1.0, 1.7] {
        // L = 1 on a solved block, so admissible lambda is [tau1, 2 - tau2]
        let l = combine::gain(&ops, &w, &x).unwrap();
        let lam = choose_lambda(&LambdaPolicy::Fixed(lambda), 0.3, 0.3, l);
        let stepped = apply_relaxed(&ops, &w, lam, &x).unwrap();
        if stepped != x {
            failure = Some(format!("solved block moved the iterate at lambda={lambda}"));
        }
    }
    if failure.is_none() {
        for i in w.support() {
            let r = fixed_point_residual(&ops[i], &x).unwrap();
            if r > 1e-10 {
                failure = Some(format!("support residual {r:.3e} at operator {i}"));
            }
        }
        // the off-support operator is genuinely unsolved
        if fixed_point_residual(&ops[2], &x).unwrap() < 1.0 {
            failure = Some("constructed instance lost its off-support violation".into());
        }
    }

    // converse direction is exact: fixed on the support means the combination
    // returns the point bit-for-bit
    if failure.is_none() {
        let t = apply_tw(&ops, &w, &x).unwrap();
        if t != x {
            failure = Some("converse direction not exact for the constructed block".into());
        }
    }

    // random instances: every reference point is exactly fixed under any
    // admissible relaxation
    if failure.is_none() {
        'outer: for i in 0..10u64 {
            let inst =
                generate::random_instance(4, 5, Geometry::Mixed, base_seed + 300 + i).unwrap();
            let m = inst.operators.len();
            let w = WeightVector::uniform(m).unwrap();
            for q in &inst.reference_points {
                for lambda in [0.7, 1.0, 1.5] {
                    let stepped = apply_relaxed(&inst.operators, &w, lambda, q).unwrap();
                    if &stepped != q {
                        failure = Some(format!("reference moved under lambda={lambda} at {i}"));
                        break 'outer;
                    }
                }
                for (j, op) in inst.operators.iter().enumerate() {
                    if fixed_point_residual(op, q).unwrap() > 1e-10 {
                        failure = Some(format!("reference residual at op {j}, instance {i}"));
                        break 'outer;
                    }
                }
            }
        }
    }

    let ok = failure.is_none();
    let details = failure.unwrap_or_else(|| {
        "solved blocks hold their point exactly; support residuals stay at zero".to_string()
    });
    CheckOutcome::finish(
        "support-characterization",
        "relaxed fixed points vs block residuals",
        2.0,
        started,
        ok,
        details,
    )
}
