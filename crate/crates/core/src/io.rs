//! Problem and run-configuration JSON formats, trace CSV emission, and the
//! summary file the CLI writes next to a trace.
//!
//! Floats in the CSV are printed with 17 significant digits so a trace can be
//! re-audited bit-faithfully; the JSON side relies on serde_json's exact
//! shortest round-trip encoding for the same guarantee.

use std::fs;
use std::io::Write;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::Vector;
use crate::operators::{fixed_point_residual, Cutter};
use crate::solver::{
    IterationRecord, LambdaPolicy, RecordedStep, SolveResult, SolveStatus, SolverConfig,
};
use crate::weights::{WeightSchedule, WeightVector};

/// Tolerance at which a declared reference point must be fixed by every
/// operator of the problem.
pub const REFERENCE_RESIDUAL_TOL: f64 = 1e-10;

/// Serializable description of one cutter.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum CutterDesc {
    Halfspace { normal: Vector, offset: f64 },
    Hyperplane { normal: Vector, offset: f64 },
    Ball { center: Vector, radius: f64 },
    Box { lower: Vector, upper: Vector },
    AffineSubspace { rows: Vec<Vector>, rhs: Vec<f64> },
    /// Subgradient projection of `|u - center|^2 - radius^2`.
    QuadraticSublevel { center: Vector, radius: f64 },
}

impl CutterDesc {
    pub fn dimension(&self) -> usize {
        match self {
            Self::Halfspace { normal, .. } | Self::Hyperplane { normal, .. } => normal.dim(),
            Self::Ball { center, .. } | Self::QuadraticSublevel { center, .. } => center.dim(),
            Self::Box { lower, .. } => lower.dim(),
            Self::AffineSubspace { rows, .. } => rows.first().map(|r| r.dim()).unwrap_or(0),
        }
    }

    pub fn build(&self) -> Result<Cutter> {
        match self {
            Self::Halfspace { normal, offset } => Cutter::halfspace(normal.clone(), *offset),
            Self::Hyperplane { normal, offset } => Cutter::hyperplane(normal.clone(), *offset),
            Self::Ball { center, radius } => Cutter::ball(center.clone(), *radius),
            Self::Box { lower, upper } => Cutter::box_set(lower.clone(), upper.clone()),
            Self::AffineSubspace { rows, rhs } => {
                Cutter::affine_subspace(rows.clone(), rhs.clone())
            }
            Self::QuadraticSublevel { center, radius } => {
                Cutter::quadratic_sublevel(center.clone(), *radius)
            }
        }
    }
}

/// A problem file: the operator family, optional known common fixed points,
/// and metadata.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ProblemSpec {
    pub name: String,
    pub dimension: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
    pub operators: Vec<CutterDesc>,
    #[serde(default)]
    pub reference_points: Vec<Vector>,
}

/// A validated problem: the spec plus its built operators.
#[derive(Clone, Debug)]
pub struct Problem {
    pub spec: ProblemSpec,
    pub operators: Vec<Cutter>,
}

impl ProblemSpec {
    /// Validate and build the operators. Reference points must be fixed by
    /// every operator at [`REFERENCE_RESIDUAL_TOL`].
    pub fn build(&self) -> Result<Problem> {
        if self.dimension == 0 {
            return Err(Error::Validation("dimension must be >= 1".into()));
        }
        if self.operators.is_empty() {
            return Err(Error::Validation("problem has no operators".into()));
        }
        let mut operators = Vec::with_capacity(self.operators.len());
        for (i, desc) in self.operators.iter().enumerate() {
            if desc.dimension() != self.dimension {
                return Err(Error::Validation(format!(
                    "operator #{i} has dimension {}, problem has {}",
                    desc.dimension(),
                    self.dimension
                )));
            }
            let op = desc
                .build()
                .map_err(|e| Error::Validation(format!("operator #{i}: {e}")))?;
            operators.push(op);
        }
        for (j, q) in self.reference_points.iter().enumerate() {
            if q.dim() != self.dimension {
                return Err(Error::Validation(format!(
                    "reference point #{j} has dimension {}, problem has {}",
                    q.dim(),
                    self.dimension
                )));
            }
            for (i, op) in operators.iter().enumerate() {
                let r = fixed_point_residual(op, q)
                    .map_err(|e| Error::Validation(format!("reference point #{j}: {e}")))?;
                if r > REFERENCE_RESIDUAL_TOL {
                    return Err(Error::Validation(format!(
                        "reference point #{j} is not fixed by operator #{i} ({}): residual {r:.3e}",
                        self.operators[i].kind_label()
                    )));
                }
            }
        }
        Ok(Problem { spec: self.clone(), operators })
    }
}

impl CutterDesc {
    fn kind_label(&self) -> &'static str {
        match self {
            Self::Halfspace { .. } => "halfspace",
            Self::Hyperplane { .. } => "hyperplane",
            Self::Ball { .. } => "ball",
            Self::Box { .. } => "box",
            Self::AffineSubspace { .. } => "affine-subspace",
            Self::QuadraticSublevel { .. } => "quadratic-sublevel",
        }
    }
}

pub fn load_problem(path: impl AsRef<Path>) -> Result<Problem> {
    let text = fs::read_to_string(path)?;
    let spec: ProblemSpec = serde_json::from_str(&text)?;
    spec.build()
}

pub fn save_problem(path: impl AsRef<Path>, spec: &ProblemSpec) -> Result<()> {
    let text = serde_json::to_string_pretty(spec)?;
    fs::write(path, text)?;
    Ok(())
}

/// Relaxation policy description.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "kebab-case")]
pub enum PolicyDesc {
    Fixed { value: f64 },
    MaxExtrapolation,
    Fraction { gamma: f64 },
}

impl PolicyDesc {
    pub fn build(&self) -> LambdaPolicy {
        match self {
            Self::Fixed { value } => LambdaPolicy::Fixed(*value),
            Self::MaxExtrapolation => LambdaPolicy::MaxExtrapolation,
            Self::Fraction { gamma } => LambdaPolicy::Fraction(*gamma),
        }
    }
}

/// Weight schedule description. The operator count m comes from the problem,
/// not the config. The randomized schedule requires an explicit seed;
/// omitting it is a load error, not a default.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum ScheduleDesc {
    ConstantUniform,
    CyclicSingleton,
    Example45 { s: usize, seed: u64 },
    Example46,
    Remark44Counterexample,
    UserTable { table: Vec<WeightVector> },
}

impl ScheduleDesc {
    pub fn build(&self, m: usize) -> Result<WeightSchedule> {
        match self {
            Self::ConstantUniform => WeightSchedule::constant_uniform(m),
            Self::CyclicSingleton => WeightSchedule::cyclic_singleton(m),
            Self::Example45 { s, seed } => WeightSchedule::example45(m, *s, *seed),
            Self::Example46 => WeightSchedule::example46(m),
            Self::Remark44Counterexample => WeightSchedule::remark44_counterexample(m),
            Self::UserTable { table } => {
                let sched = WeightSchedule::user_table(table.clone())?;
                if sched.index_count() != m {
                    return Err(Error::InvalidConfig(format!(
                        "user table rows have length {}, problem has {m} operators",
                        sched.index_count()
                    )));
                }
                Ok(sched)
            }
        }
    }
}

/// A run-configuration file.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RunConfig {
    pub tau1: f64,
    pub tau2: f64,
    pub lambda_policy: PolicyDesc,
    pub schedule: ScheduleDesc,
    pub max_iterations: usize,
    pub residual_tolerance: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub residual_check_stride: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub lambda_cap: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub trace_limit: Option<usize>,
}

impl RunConfig {
    /// Instantiate for a problem with `m` operators, wiring the problem's
    /// reference points into the trace diagnostics.
    pub fn build(&self, m: usize, reference_points: Vec<Vector>) -> Result<SolverConfig> {
        Ok(SolverConfig {
            tau1: self.tau1,
            tau2: self.tau2,
            lambda_policy: self.lambda_policy.build(),
            schedule: self.schedule.build(m)?,
            max_iterations: self.max_iterations,
            residual_tolerance: self.residual_tolerance,
            residual_check_stride: self.residual_check_stride,
            lambda_cap: self.lambda_cap.unwrap_or(crate::combine::DEFAULT_LAMBDA_CAP),
            trace_limit: self.trace_limit.unwrap_or(100_000),
            reference_points,
        })
    }
}

pub fn load_config(path: impl AsRef<Path>) -> Result<RunConfig> {
    let text = fs::read_to_string(path)?;
    Ok(serde_json::from_str(&text)?)
}

pub fn save_config(path: impl AsRef<Path>, config: &RunConfig) -> Result<()> {
    fs::write(path, serde_json::to_string_pretty(config)?)?;
    Ok(())
}

/// 17 significant digits: enough to reproduce any f64 exactly.
pub fn format_f64(v: f64) -> String {
    format!("{v:.16e}")
}

/// Write the trace as CSV with the fixed header
/// `k,lambda,L,residual,step_norm,dist_to_ref_0,...`. The residual column is
/// empty on steps that did not measure the full-family residual.
pub fn write_trace_csv<W: Write>(mut out: W, trace: &[IterationRecord]) -> Result<()> {
    let ref_count = trace.first().map(|r| r.distances_to_refs.len()).unwrap_or(0);
    let mut header = String::from("k,lambda,L,residual,step_norm");
    for j in 0..ref_count {
        header.push_str(&format!(",dist_to_ref_{j}"));
    }
    writeln!(out, "{header}")?;
    for rec in trace {
        let residual = rec.residual.map(format_f64).unwrap_or_default();
        let mut line = format!(
            "{},{},{},{},{}",
            rec.k,
            format_f64(rec.lambda),
            format_f64(rec.gain),
            residual,
            format_f64(rec.step_norm)
        );
        for d in &rec.distances_to_refs {
            line.push(',');
            line.push_str(&format_f64(*d));
        }
        writeln!(out, "{line}")?;
    }
    Ok(())
}

pub fn write_trace_csv_file(path: impl AsRef<Path>, trace: &[IterationRecord]) -> Result<()> {
    let file = fs::File::create(path)?;
    write_trace_csv(std::io::BufWriter::new(file), trace)
}

/// One parsed row of a trace CSV.
#[derive(Clone, Debug, PartialEq)]
pub struct TraceRow {
    pub k: usize,
    pub lambda: f64,
    pub gain: f64,
    pub residual: Option<f64>,
    pub step_norm: f64,
    pub dists: Vec<f64>,
}

impl TraceRow {
    pub fn to_recorded_step(&self) -> RecordedStep {
        RecordedStep {
            k: self.k,
            lambda: self.lambda,
            gain: self.gain,
            step_norm: self.step_norm,
            dists: self.dists.clone(),
        }
    }
}

pub fn read_trace_csv(path: impl AsRef<Path>) -> Result<Vec<TraceRow>> {
    let text = fs::read_to_string(path)?;
    let mut lines = text.lines();
    let header = lines
        .next()
        .ok_or_else(|| Error::Validation("empty trace file".into()))?;
    if !header.starts_with("k,lambda,L,residual,step_norm") {
        return Err(Error::Validation(format!("unexpected trace header: {header}")));
    }
    let mut rows = Vec::new();
    for (lineno, line) in lines.enumerate() {
        if line.trim().is_empty() {
            continue;
        }
        let fields: Vec<&str> = line.split(',').collect();
        if fields.len() < 5 {
            return Err(Error::Validation(format!("trace row {} too short", lineno + 2)));
        }
        let parse = |s: &str, what: &str| -> Result<f64> {
            s.parse::<f64>()
                .map_err(|_| Error::Validation(format!("bad {what} on row {}", lineno + 2)))
        };
        let residual = if fields[3].is_empty() {
            None
        } else {
            Some(parse(fields[3], "residual")?)
        };
        let dists = fields[5..]
            .iter()
            .map(|f| parse(f, "distance"))
            .collect::<Result<Vec<_>>>()?;
        rows.push(TraceRow {
            k: fields[0]
                .parse()
                .map_err(|_| Error::Validation(format!("bad k on row {}", lineno + 2)))?,
            lambda: parse(fields[1], "lambda")?,
            gain: parse(fields[2], "gain")?,
            residual,
            step_norm: parse(fields[4], "step_norm")?,
            dists,
        });
    }
    Ok(rows)
}

/// The JSON summary written next to a trace.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct RunSummary {
    pub status: SolveStatus,
    pub iterations: usize,
    pub final_residual: f64,
    pub final_point: Vector,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub message: Option<String>,
}

impl RunSummary {
    pub fn from_result(result: &SolveResult) -> Self {
        Self {
            status: result.status,
            iterations: result.iterations,
            final_residual: result.final_residual,
            final_point: result.final_point.clone(),
            message: result.message.clone(),
        }
    }
}

pub fn write_summary_json(path: impl AsRef<Path>, result: &SolveResult) -> Result<()> {
    let summary = RunSummary::from_result(result);
    fs::write(path, serde_json::to_string_pretty(&summary)?)?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::solver::{run, SolverConfig};

    fn two_hyperplane_spec() -> ProblemSpec {
        ProblemSpec {
            name: "two-hyperplanes".into(),
            dimension: 2,
            seed: None,
            operators: vec![
                CutterDesc::Hyperplane {
                    normal: Vector::new(vec![0.0, 1.0]).unwrap(),
                    offset: 0.0,
                },
                CutterDesc::Hyperplane {
                    normal: Vector::new(vec![1.0, 0.0]).unwrap(),
                    offset: 0.0,
                },
            ],
            reference_points: vec![Vector::zeros(2)],
        }
    }

    #[test]
    fn problem_round_trip() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("p.json");
        let spec = two_hyperplane_spec();
        save_problem(&path, &spec).unwrap();
        let loaded = load_problem(&path).unwrap();
        assert_eq!(loaded.spec, spec);
        assert_eq!(loaded.operators.len(), 2);
    }

    #[test]
    fn reference_point_violation_names_the_operator() {
        let mut spec = two_hyperplane_spec();
        spec.reference_points = vec![Vector::new(vec![1.0, 0.0]).unwrap()];
        let err = spec.build().unwrap_err().to_string();
        assert!(err.contains("reference point #0"), "{err}");
        assert!(err.contains("operator #1"), "{err}");
    }

    #[test]
    fn zero_normal_rejected_with_operator_index() {
        let mut spec = two_hyperplane_spec();
        spec.operators[0] = CutterDesc::Halfspace {
            normal: Vector::new(vec![0.0, 0.0]).unwrap(),
            offset: 1.0,
        };
        spec.reference_points.clear();
        let err = spec.build().unwrap_err().to_string();
        assert!(err.contains("operator #0"), "{err}");
    }

    #[test]
    fn dimension_mismatch_rejected() {
        let mut spec = two_hyperplane_spec();
        spec.dimension = 3;
        spec.reference_points.clear();
        assert!(spec.build().is_err());
    }

    #[test]
    fn example45_schedule_requires_seed_in_json() {
        let text = r#"{"kind": "example45", "s": 4}"#;
        assert!(serde_json::from_str::<ScheduleDesc>(text).is_err());
        let text = r#"{"kind": "example45", "s": 4, "seed": 7}"#;
        assert!(serde_json::from_str::<ScheduleDesc>(text).is_ok());
    }

    #[test]
    fn config_round_trip_and_build() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("c.json");
        let config = RunConfig {
            tau1: 1.0,
            tau2: 1.0,
            lambda_policy: PolicyDesc::MaxExtrapolation,
            schedule: ScheduleDesc::Example46,
            max_iterations: 1000,
            residual_tolerance: 1e-8,
            residual_check_stride: None,
            lambda_cap: None,
            trace_limit: None,
        };
        save_config(&path, &config).unwrap();
        let loaded = load_config(&path).unwrap();
        assert_eq!(loaded, config);
        let solver_config = loaded.build(3, vec![]).unwrap();
        assert_eq!(solver_config.schedule.index_count(), 3);
    }

    #[test]
    fn trace_csv_round_trip_is_bit_faithful() {
        let problem = two_hyperplane_spec().build().unwrap();
        let m = problem.operators.len();
        let mut config =
            SolverConfig::new(crate::weights::WeightSchedule::constant_uniform(m).unwrap());
        config.lambda_policy = LambdaPolicy::Fixed(1.0);
        config.max_iterations = 8;
        config.residual_tolerance = 1e-30;
        config.reference_points = problem.spec.reference_points.clone();
        let x0 = Vector::new(vec![1.0, 1.0]).unwrap();
        let result = run(&problem.operators, &x0, &config);
        assert_eq!(result.trace.len(), 8);

        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("trace.csv");
        write_trace_csv_file(&path, &result.trace).unwrap();
        let rows = read_trace_csv(&path).unwrap();
        assert_eq!(rows.len(), result.trace.len());
        for (row, rec) in rows.iter().zip(&result.trace) {
            assert_eq!(row.k, rec.k);
            assert_eq!(row.lambda, rec.lambda);
            assert_eq!(row.gain, rec.gain);
            assert_eq!(row.step_norm, rec.step_norm);
            assert_eq!(row.residual, rec.residual);
            assert_eq!(row.dists, rec.distances_to_refs);
        }
    }

    #[test]
    fn summary_reports_converged_status() {
        let problem = two_hyperplane_spec().build().unwrap();
        let config = RunConfig {
            tau1: 1.0,
            tau2: 1.0,
            lambda_policy: PolicyDesc::MaxExtrapolation,
            schedule: ScheduleDesc::ConstantUniform,
            max_iterations: 100,
            residual_tolerance: 1e-10,
            residual_check_stride: Some(1),
            lambda_cap: None,
            trace_limit: None,
        }
        .build(2, problem.spec.reference_points.clone())
        .unwrap();
        let result = run(&problem.operators, &Vector::new(vec![1.0, 1.0]).unwrap(), &config);
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("summary.json");
        write_summary_json(&path, &result).unwrap();
        let text = fs::read_to_string(&path).unwrap();
        let summary: RunSummary = serde_json::from_str(&text).unwrap();
        assert_eq!(summary.status, SolveStatus::Converged);
        assert!(summary.final_residual <= 1e-10);
        assert!(text.contains("\"converged\""));
    }
}
