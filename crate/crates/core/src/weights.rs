//! Weight vectors, dynamic weight schedules, and finite-horizon verifiers for
//! the two weight conditions the convergence theory rests on.
//!
//! Two conditions matter for the solver:
//! * divergent sums: every index receives infinite total weight;
//! * intermittent floor: every index receives weight at least alpha somewhere
//!   in every window of `s` consecutive iterations.
//!
//! The second implies the first; the converse fails (the shipped
//! counterexample schedule separates them). Both are infinite statements, so
//! the verifiers here only produce finite-horizon evidence. Schedules whose
//! construction guarantees a condition analytically carry that fact as
//! metadata instead (see [`WeightSchedule::guarantee`]).

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

const WEIGHT_SUM_TOL: f64 = 1e-12;

/// m nonnegative weights summing to one.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "Vec<f64>", into = "Vec<f64>")]
pub struct WeightVector {
    weights: Vec<f64>,
}

impl WeightVector {
    pub fn new(weights: Vec<f64>) -> Result<Self> {
        if weights.is_empty() {
            return Err(Error::InvalidWeights("empty weight vector".into()));
        }
        for (i, w) in weights.iter().enumerate() {
            if !w.is_finite() || *w < 0.0 || *w > 1.0 {
                return Err(Error::InvalidWeights(format!(
                    "weight {w} at index {i} outside [0, 1]"
                )));
            }
        }
        let sum: f64 = weights.iter().sum();
        if (sum - 1.0).abs() > WEIGHT_SUM_TOL {
            return Err(Error::InvalidWeights(format!("weights sum to {sum}, not 1")));
        }
        Ok(Self { weights })
    }

    pub fn uniform(m: usize) -> Result<Self> {
        Self::new(vec![1.0 / m as f64; m])
    }

    /// The indicator weight vector of a single index.
    pub fn singleton(m: usize, index: usize) -> Result<Self> {
        if index >= m {
            return Err(Error::InvalidWeights(format!("index {index} >= m = {m}")));
        }
        let mut w = vec![0.0; m];
        w[index] = 1.0;
        Self::new(w)
    }

    pub fn len(&self) -> usize {
        self.weights.len()
    }

    pub fn is_empty(&self) -> bool {
        self.weights.is_empty()
    }

    pub fn get(&self, i: usize) -> f64 {
        self.weights[i]
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.weights
    }

    /// Indices with strictly positive weight. Nonempty by construction.
    pub fn support(&self) -> Vec<usize> {
        self.weights
            .iter()
            .enumerate()
            .filter(|(_, w)| **w > 0.0)
            .map(|(i, _)| i)
            .collect()
    }
}

impl TryFrom<Vec<f64>> for WeightVector {
    type Error = Error;
    fn try_from(weights: Vec<f64>) -> Result<Self> {
        WeightVector::new(weights)
    }
}

impl From<WeightVector> for Vec<f64> {
    fn from(w: WeightVector) -> Vec<f64> {
        w.weights
    }
}

fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Independent RNG per (seed, lane, index); gives the randomized schedule
/// random access in k without replaying a stream.
fn derived_rng(seed: u64, lane: u64, index: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(splitmix64(seed ^ splitmix64(index.wrapping_mul(2).wrapping_add(lane))))
}

/// Minimal integer strictly greater than `num / den` (the strict ceiling of
/// the rational num/den).
pub fn strict_ceil_div(num: usize, den: usize) -> usize {
    num / den + 1
}

/// The randomized intermittent schedule: in every window of `s/2` iterations
/// one designated iteration gives every index weight at least `1/(2m)`.
#[derive(Clone, Debug, PartialEq)]
pub struct Example45Schedule {
    m: usize,
    s: usize,
    seed: u64,
}

impl Example45Schedule {
    fn half_window(&self) -> usize {
        self.s / 2
    }

    /// The designated heavy iteration of window `t` (chosen uniformly inside
    /// the window, deterministic under the seed).
    pub fn heavy_iteration(&self, t: usize) -> usize {
        let s_half = self.half_window();
        let mut rng = derived_rng(self.seed, 0, t as u64);
        t * s_half + rng.random_range(0..s_half)
    }

    /// For a window start `l`, an iteration `k` in `{l, ..., l + s - 1}` at
    /// which every index is guaranteed weight >= `1/(2m)`.
    pub fn guaranteed_floor_iteration(&self, l: usize) -> usize {
        self.heavy_iteration(strict_ceil_div(l, self.half_window()))
    }

    fn weights_at(&self, k: usize) -> WeightVector {
        let m = self.m;
        let t = k / self.half_window();
        let heavy = self.heavy_iteration(t) == k;
        let mut rng = derived_rng(self.seed, 1, k as u64);
        let (lo, hi) = if heavy {
            (1.0 / (2.0 * m as f64), 1.0 / m as f64)
        } else {
            (0.0, 1.0 / m as f64)
        };
        let mut w = Vec::with_capacity(m);
        let mut sum = 0.0;
        for _ in 0..m - 1 {
            let wi = rng.random_range(lo..hi);
            sum += wi;
            w.push(wi);
        }
        w.push(1.0 - sum);
        WeightVector::new(w).expect("constructed weights are valid")
    }
}

/// A rule producing one weight vector per iteration index.
#[derive(Clone, Debug, PartialEq)]
pub enum WeightSchedule {
    /// `1/m` on every index, every iteration.
    ConstantUniform { m: usize },
    /// The indicator of index `k mod m`: fully sequential sweeps.
    CyclicSingleton { m: usize },
    /// Randomized intermittent schedule (floor `1/(2m)` once per half-window).
    Example45(Example45Schedule),
    /// Uniform every m-th iteration, weights drifting to the last index in
    /// between; intermittent with window `m` and floor `1/m`.
    Example46 { m: usize },
    /// Weights `1/((k+1)m)` on all but the last index: the partial sums
    /// diverge, yet no intermittent floor exists. Separates the two
    /// conditions.
    Remark44Counterexample { m: usize },
    /// An explicit finite table of weight vectors.
    UserTable { table: Vec<WeightVector> },
}

impl WeightSchedule {
    pub fn constant_uniform(m: usize) -> Result<Self> {
        if m == 0 {
            return Err(Error::InvalidConfig("m must be >= 1".into()));
        }
        Ok(Self::ConstantUniform { m })
    }

    pub fn cyclic_singleton(m: usize) -> Result<Self> {
        if m == 0 {
            return Err(Error::InvalidConfig("m must be >= 1".into()));
        }
        Ok(Self::CyclicSingleton { m })
    }

    pub fn example45(m: usize, s: usize, seed: u64) -> Result<Self> {
        if m <= 1 {
            return Err(Error::InvalidConfig("example45 needs m > 1".into()));
        }
        if s < 2 || !s.is_multiple_of(2) {
            return Err(Error::InvalidConfig("example45 needs an even window s >= 2".into()));
        }
        Ok(Self::Example45(Example45Schedule { m, s, seed }))
    }

    pub fn example46(m: usize) -> Result<Self> {
        if m <= 1 {
            return Err(Error::InvalidConfig("example46 needs m > 1".into()));
        }
        Ok(Self::Example46 { m })
    }

    pub fn remark44_counterexample(m: usize) -> Result<Self> {
        if m <= 1 {
            return Err(Error::InvalidConfig("remark44 counterexample needs m > 1".into()));
        }
        Ok(Self::Remark44Counterexample { m })
    }

    pub fn user_table(table: Vec<WeightVector>) -> Result<Self> {
        let first = table
            .first()
            .ok_or_else(|| Error::InvalidConfig("user table must be nonempty".into()))?;
        let m = first.len();
        if table.iter().any(|w| w.len() != m) {
            return Err(Error::InvalidConfig("user table rows have mixed lengths".into()));
        }
        Ok(Self::UserTable { table })
    }

    /// Number of operator indices m.
    pub fn index_count(&self) -> usize {
        match self {
            Self::ConstantUniform { m }
            | Self::CyclicSingleton { m }
            | Self::Example46 { m }
            | Self::Remark44Counterexample { m } => *m,
            Self::Example45(e) => e.m,
            Self::UserTable { table } => table[0].len(),
        }
    }

    /// The weight vector of iteration `k`.
    pub fn weights_at(&self, k: usize) -> Result<WeightVector> {
        match self {
            Self::ConstantUniform { m } => WeightVector::uniform(*m),
            Self::CyclicSingleton { m } => WeightVector::singleton(*m, k % m),
            Self::Example45(e) => Ok(e.weights_at(k)),
            Self::Example46 { m } => {
                let m = *m;
                if k.is_multiple_of(m) {
                    WeightVector::uniform(m)
                } else {
                    let small = 1.0 / (2.0 * k as f64 * m as f64);
                    let mut w = vec![small; m];
                    w[m - 1] = 1.0 - (m as f64 - 1.0) * small;
                    WeightVector::new(w)
                }
            }
            Self::Remark44Counterexample { m } => {
                let m = *m;
                let small = 1.0 / ((k as f64 + 1.0) * m as f64);
                let mut w = vec![small; m];
                w[m - 1] = 1.0 - (m as f64 - 1.0) * small;
                WeightVector::new(w)
            }
            Self::UserTable { table } => {
                table.get(k).cloned().ok_or(Error::ScheduleExhausted(k))
            }
        }
    }

    /// Conditions this schedule satisfies by construction, independent of any
    /// finite-horizon check.
    pub fn guarantee(&self) -> ScheduleGuarantee {
        match self {
            Self::ConstantUniform { m } => ScheduleGuarantee {
                intermittent: Some((1, 1.0 / *m as f64)),
                divergent_sums: true,
            },
            Self::CyclicSingleton { m } => ScheduleGuarantee {
                intermittent: Some((*m, 1.0)),
                divergent_sums: true,
            },
            Self::Example45(e) => ScheduleGuarantee {
                intermittent: Some((e.s, 1.0 / (2.0 * e.m as f64))),
                divergent_sums: true,
            },
            Self::Example46 { m } => ScheduleGuarantee {
                intermittent: Some((*m, 1.0 / *m as f64)),
                divergent_sums: true,
            },
            Self::Remark44Counterexample { .. } => ScheduleGuarantee {
                intermittent: None,
                divergent_sums: true,
            },
            Self::UserTable { .. } => ScheduleGuarantee {
                intermittent: None,
                divergent_sums: false,
            },
        }
    }
}

/// Analytic guarantees carried by a schedule: `intermittent` holds the
/// (window, floor) pair when the construction forces the intermittent
/// condition; `divergent_sums` marks divergent per-index weight sums.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ScheduleGuarantee {
    pub intermittent: Option<(usize, f64)>,
    pub divergent_sums: bool,
}

/// Which weight condition a report is about.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ConditionKind {
    SumDivergence,
    IntermittentFloor,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case", tag = "verdict")]
pub enum Verdict {
    HoldsOnHorizon,
    /// `k` is the start of a window (or the iteration) witnessing the
    /// violation for `index`.
    ViolatedAt { k: usize, index: usize },
}

/// Finite-horizon evidence for a weight condition. Never a proof: a verdict
/// of `HoldsOnHorizon` says nothing beyond the horizon.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ConditionReport {
    pub condition: ConditionKind,
    pub horizon: usize,
    pub verdict: Verdict,
    /// Per-index partial weight sums over the horizon.
    pub partial_sums: Vec<f64>,
    /// For a violated intermittent check: the largest weight the violating
    /// index received inside the reported window.
    pub witness_max: Option<f64>,
    pub window: Option<usize>,
    pub floor: Option<f64>,
}

impl ConditionReport {
    pub fn holds(&self) -> bool {
        self.verdict == Verdict::HoldsOnHorizon
    }
}

/// Per-index sums of the first `horizon` weight vectors. Purely diagnostic:
/// divergence of the infinite sums is not decidable from any prefix.
pub fn partial_sums(schedule: &WeightSchedule, horizon: usize) -> Result<Vec<f64>> {
    if horizon == 0 {
        return Err(Error::InvalidConfig("horizon must be >= 1".into()));
    }
    let m = schedule.index_count();
    let mut sums = vec![0.0; m];
    for k in 0..horizon {
        let w = schedule.weights_at(k)?;
        for i in 0..m {
            sums[i] += w.get(i);
        }
    }
    Ok(sums)
}

/// Packages [`partial_sums`] as a diagnostic report for the divergent-sum
/// condition.
pub fn sum_divergence_report(schedule: &WeightSchedule, horizon: usize) -> Result<ConditionReport> {
    let sums = partial_sums(schedule, horizon)?;
    Ok(ConditionReport {
        condition: ConditionKind::SumDivergence,
        horizon,
        verdict: Verdict::HoldsOnHorizon,
        partial_sums: sums,
        witness_max: None,
        window: None,
        floor: None,
    })
}

/// Checks the intermittent floor condition on a finite horizon: every window
/// `{l, ..., l + window - 1}` with `l + window <= horizon` must contain, for
/// every index, an iteration with weight >= `floor`. On failure the report
/// carries a concrete (window start, index) counterexample.
pub fn verify_intermittent(
    schedule: &WeightSchedule,
    horizon: usize,
    window: usize,
    floor: f64,
) -> Result<ConditionReport> {
    if window == 0 {
        return Err(Error::InvalidConfig("window must be >= 1".into()));
    }
    if horizon < window {
        return Err(Error::InvalidConfig(format!(
            "horizon {horizon} shorter than window {window}"
        )));
    }
    if !(floor > 0.0) {
        return Err(Error::InvalidConfig("floor must be positive".into()));
    }
    let m = schedule.index_count();
    let mut table = Vec::with_capacity(horizon);
    let mut sums = vec![0.0; m];
    for k in 0..horizon {
        let w = schedule.weights_at(k)?;
        for i in 0..m {
            sums[i] += w.get(i);
        }
        table.push(w);
    }

    // A window starting at l lacks a hit for index i exactly when the gap
    // between consecutive hits (with sentinels before 0 and after the end)
    // exceeds the window length.
    let mut violation: Option<(usize, usize)> = None;
    'indices: for i in 0..m {
        let mut prev_hit: isize = -1;
        for k in 0..horizon {
            if table[k].get(i) >= floor {
                prev_hit = k as isize;
            } else if k as isize - prev_hit >= window as isize {
                let start = (prev_hit + 1) as usize;
                if start + window <= horizon {
                    violation = Some((start, i));
                    break 'indices;
                }
            }
        }
    }

    let (verdict, witness_max) = match violation {
        Some((start, i)) => {
            let max_in_window = (start..start + window)
                .map(|k| table[k].get(i))
                .fold(f64::NEG_INFINITY, f64::max);
            (Verdict::ViolatedAt { k: start, index: i }, Some(max_in_window))
        }
        None => (Verdict::HoldsOnHorizon, None),
    };

    Ok(ConditionReport {
        condition: ConditionKind::IntermittentFloor,
        horizon,
        verdict,
        partial_sums: sums,
        witness_max,
        window: Some(window),
        floor: Some(floor),
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn weight_vector_invariants() {
        assert!(WeightVector::new(vec![0.5, 0.5]).is_ok());
        assert!(WeightVector::new(vec![0.5, 0.6]).is_err());
        assert!(WeightVector::new(vec![-0.1, 1.1]).is_err());
        assert!(WeightVector::new(vec![]).is_err());
    }

    #[test]
    fn support_examples() {
        let w = WeightVector::new(vec![0.0, 1.0, 0.0]).unwrap();
        assert_eq!(w.support(), vec![1]);
        let w = WeightVector::new(vec![0.5, 0.5, 0.0]).unwrap();
        assert_eq!(w.support(), vec![0, 1]);
        let w = WeightVector::uniform(4).unwrap();
        assert_eq!(w.support(), vec![0, 1, 2, 3]);
    }

    #[test]
    fn cyclic_singleton_rotates() {
        let s = WeightSchedule::cyclic_singleton(3).unwrap();
        for k in 0..9 {
            let w = s.weights_at(k).unwrap();
            assert_eq!(w.support(), vec![k % 3]);
            assert_eq!(w.get(k % 3), 1.0);
        }
    }

    #[test]
    fn example46_values() {
        let s = WeightSchedule::example46(2).unwrap();
        assert_eq!(s.weights_at(0).unwrap().as_slice(), &[0.5, 0.5]);
        assert_eq!(s.weights_at(1).unwrap().as_slice(), &[0.25, 0.75]);
    }

    #[test]
    fn remark44_values() {
        let s = WeightSchedule::remark44_counterexample(3).unwrap();
        let w = s.weights_at(1).unwrap();
        assert!(crate::linalg::approx_eq(w.get(0), 1.0 / 6.0));
        assert!(crate::linalg::approx_eq(w.get(1), 1.0 / 6.0));
        assert!(crate::linalg::approx_eq(w.get(2), 2.0 / 3.0));
    }

    #[test]
    fn example45_requires_even_window_and_m_over_one() {
        assert!(WeightSchedule::example45(1, 4, 7).is_err());
        assert!(WeightSchedule::example45(3, 5, 7).is_err());
        assert!(WeightSchedule::example45(3, 4, 7).is_ok());
    }

    #[test]
    fn example45_heavy_iteration_floor_and_determinism() {
        let s = WeightSchedule::example45(4, 6, 99).unwrap();
        let e = match &s {
            WeightSchedule::Example45(e) => e.clone(),
            _ => unreachable!(),
        };
        for t in 0..40 {
            let h = e.heavy_iteration(t);
            assert!(h >= t * 3 && h < (t + 1) * 3);
            let w = s.weights_at(h).unwrap();
            // all indices at least 1/(2m); the last one at least 1/m
            for i in 0..3 {
                assert!(w.get(i) >= 1.0 / 8.0);
            }
            assert!(w.get(3) >= 1.0 / 4.0 - 1e-15);
        }
        // deterministic under the seed, and every k yields a valid vector
        let s2 = WeightSchedule::example45(4, 6, 99).unwrap();
        for k in 0..200 {
            assert_eq!(s.weights_at(k).unwrap(), s2.weights_at(k).unwrap());
        }
    }

    #[test]
    fn example45_guaranteed_floor_iteration_lands_in_window() {
        // the strict-ceiling window argument: the designated iteration for
        // window start l lies in {l, ..., l+s-1}
        let s = 8usize;
        let sched = match WeightSchedule::example45(3, s, 5).unwrap() {
            WeightSchedule::Example45(e) => e,
            _ => unreachable!(),
        };
        for l in 0..300 {
            let h = sched.guaranteed_floor_iteration(l);
            assert!(h >= l && h < l + s, "l={l} h={h}");
        }
    }

    #[test]
    fn strict_ceiling_is_minimal_integer_strictly_greater() {
        assert_eq!(strict_ceil_div(0, 3), 1);
        assert_eq!(strict_ceil_div(2, 3), 1);
        assert_eq!(strict_ceil_div(3, 3), 2);
        assert_eq!(strict_ceil_div(7, 3), 3);
    }

    #[test]
    fn user_table_exhaustion() {
        let t = WeightSchedule::user_table(vec![WeightVector::uniform(2).unwrap()]).unwrap();
        assert!(t.weights_at(0).is_ok());
        assert!(matches!(t.weights_at(1), Err(Error::ScheduleExhausted(1))));
    }

    #[test]
    fn partial_sums_constant_uniform() {
        let s = WeightSchedule::constant_uniform(4).unwrap();
        let sums = partial_sums(&s, 100).unwrap();
        for v in sums {
            assert!((v - 25.0).abs() < 1e-9);
        }
    }

    #[test]
    fn partial_sums_cyclic() {
        let s = WeightSchedule::cyclic_singleton(5).unwrap();
        let sums = partial_sums(&s, 5 * 7).unwrap();
        for v in sums {
            assert_eq!(v, 7.0);
        }
    }

    #[test]
    fn partial_sums_remark44_tracks_harmonic_growth() {
        let m = 3usize;
        let s = WeightSchedule::remark44_counterexample(m).unwrap();
        let horizon = 5000;
        let sums = partial_sums(&s, horizon).unwrap();
        // independent harmonic bracket: ln(H+1) <= H_H <= 1 + ln(H)
        let h = horizon as f64;
        let lower = (h + 1.0).ln() / m as f64;
        let upper = (1.0 + h.ln()) / m as f64;
        for i in 0..m - 1 {
            assert!(sums[i] >= lower && sums[i] <= upper, "sum {} vs [{lower}, {upper}]", sums[i]);
        }
        // the sum is unbounded: it keeps growing between horizons
        let sums2 = partial_sums(&s, 2 * horizon).unwrap();
        assert!(sums2[0] > sums[0] + 0.2);
    }

    #[test]
    fn verify_intermittent_constant_uniform() {
        let s = WeightSchedule::constant_uniform(3).unwrap();
        let r = verify_intermittent(&s, 50, 1, 1.0 / 3.0).unwrap();
        assert!(r.holds());
    }

    #[test]
    fn verify_intermittent_example46() {
        let s = WeightSchedule::example46(4).unwrap();
        let r = verify_intermittent(&s, 1000, 4, 0.25).unwrap();
        assert!(r.holds());
    }

    #[test]
    fn verify_intermittent_remark44_fails_with_witness() {
        let s = WeightSchedule::remark44_counterexample(2).unwrap();
        let r = verify_intermittent(&s, 4000, 10, 1e-3).unwrap();
        match r.verdict {
            Verdict::ViolatedAt { k, index } => {
                assert!(index < 1, "only non-terminal indices decay");
                // confirm the witness: nothing in that window reaches the floor
                for j in k..k + 10 {
                    assert!(s.weights_at(j).unwrap().get(index) < 1e-3);
                }
                assert!(r.witness_max.unwrap() < 1e-3);
            }
            Verdict::HoldsOnHorizon => panic!("expected a violation"),
        }
    }

    /// gap-scan result agrees with the brute-force definition
    #[test]
    fn verify_intermittent_matches_naive_scan() {
        let schedules = [
            WeightSchedule::example46(3).unwrap(),
            WeightSchedule::remark44_counterexample(3).unwrap(),
            WeightSchedule::example45(3, 4, 11).unwrap(),
            WeightSchedule::cyclic_singleton(3).unwrap(),
        ];
        for sched in &schedules {
            for (window, floor) in [(2usize, 0.2), (5, 1.0 / 3.0), (4, 0.05)] {
                let horizon = 120;
                let report = verify_intermittent(sched, horizon, window, floor).unwrap();
                let table: Vec<_> =
                    (0..horizon).map(|k| sched.weights_at(k).unwrap()).collect();
                let mut naive: Option<(usize, usize)> = None;
                'outer: for i in 0..3 {
                    for l in 0..=horizon - window {
                        if (l..l + window).all(|k| table[k].get(i) < floor) {
                            naive = Some((l, i));
                            break 'outer;
                        }
                    }
                }
                match (&report.verdict, naive) {
                    (Verdict::HoldsOnHorizon, None) => {}
                    (Verdict::ViolatedAt { k, index }, Some(_)) => {
                        assert!((*k..*k + window).all(|j| table[j].get(*index) < floor));
                    }
                    (got, want) => panic!("verdict {got:?} vs naive {want:?}"),
                }
            }
        }
    }

    /// the intermittent floor forces linear growth of the partial sums
    #[test]
    fn intermittent_floor_implies_partial_sum_growth() {
        let cases = [
            (WeightSchedule::constant_uniform(3).unwrap(), 1usize, 1.0 / 3.0),
            (WeightSchedule::cyclic_singleton(4).unwrap(), 4, 1.0),
            (WeightSchedule::example46(3).unwrap(), 3, 1.0 / 3.0),
            (WeightSchedule::example45(3, 6, 17).unwrap(), 6, 1.0 / 6.0),
        ];
        for (sched, window, floor) in cases {
            let horizon = 600;
            assert!(verify_intermittent(&sched, horizon, window, floor).unwrap().holds());
            let sums = partial_sums(&sched, horizon).unwrap();
            let bound = floor * (horizon / window) as f64;
            for (i, v) in sums.iter().enumerate() {
                assert!(
                    *v >= bound - 1e-9,
                    "index {i}: partial sum {v} below floor bound {bound}"
                );
            }
        }
    }
}
