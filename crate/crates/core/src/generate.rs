//! Seeded random feasible instances: operator families built around a known
//! interior ball, so the common fixed-point set is nonempty with nonempty
//! interior by construction and reference points are available for
//! diagnostics.

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::error::Result;
use crate::io::{CutterDesc, ProblemSpec};
use crate::linalg::Vector;
use crate::operators::Cutter;
use crate::solver::full_residual;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Geometry {
    Halfspaces,
    Balls,
    /// Rotates through half-space, ball, box, and quadratic-sublevel kinds.
    Mixed,
}

impl std::str::FromStr for Geometry {
    type Err = String;
    fn from_str(s: &str) -> std::result::Result<Self, String> {
        match s {
            "halfspaces" => Ok(Self::Halfspaces),
            "balls" => Ok(Self::Balls),
            "mixed" => Ok(Self::Mixed),
            other => Err(format!("unknown geometry '{other}' (halfspaces|balls|mixed)")),
        }
    }
}

/// A generated instance. The ball of `interior_radius` around
/// `interior_center` is contained in every operator's fixed-point set, so
/// both reference points are genuine common fixed points.
#[derive(Clone, Debug)]
pub struct GeneratedInstance {
    pub spec: ProblemSpec,
    pub operators: Vec<Cutter>,
    pub reference_points: Vec<Vector>,
    pub x0: Vector,
    pub interior_center: Vector,
    pub interior_radius: f64,
}

fn random_vector(rng: &mut ChaCha8Rng, n: usize, scale: f64) -> Vector {
    Vector::new((0..n).map(|_| rng.random_range(-scale..scale)).collect())
        .expect("finite by construction")
}

fn random_direction(rng: &mut ChaCha8Rng, n: usize) -> Vector {
    loop {
        let v = random_vector(rng, n, 1.0);
        let norm = v.norm();
        if norm > 0.1 {
            return v.scale(1.0 / norm);
        }
    }
}

fn desc_for(
    rng: &mut ChaCha8Rng,
    kind_slot: usize,
    geometry: Geometry,
    center: &Vector,
    rho: f64,
) -> CutterDesc {
    let n = center.dim();
    let pick = match geometry {
        Geometry::Halfspaces => 0,
        Geometry::Balls => 1,
        Geometry::Mixed => kind_slot % 4,
    };
    match pick {
        0 => {
            // half-space tangent to the interior ball
            let normal = random_direction(rng, n).scale(rng.random_range(0.5..2.0));
            let offset = crate::linalg::inner(&normal, center).expect("dims match")
                + rho * normal.norm();
            CutterDesc::Halfspace { normal, offset }
        }
        1 => {
            let dir = random_direction(rng, n);
            let shift = rng.random_range(0.0..1.5);
            let ball_center = center.add_scaled(shift, &dir);
            CutterDesc::Ball { center: ball_center, radius: shift + rho }
        }
        2 => {
            let lower = Vector::new(
                (0..n)
                    .map(|i| center[i] - rho - rng.random_range(0.0..1.0))
                    .collect(),
            )
            .unwrap();
            let upper = Vector::new(
                (0..n)
                    .map(|i| center[i] + rho + rng.random_range(0.0..1.0))
                    .collect(),
            )
            .unwrap();
            CutterDesc::Box { lower, upper }
        }
        _ => {
            let dir = random_direction(rng, n);
            let shift = rng.random_range(0.0..1.0);
            let ball_center = center.add_scaled(shift, &dir);
            CutterDesc::QuadraticSublevel { center: ball_center, radius: shift + rho }
        }
    }
}

/// Build a feasible instance with `m` operators in R^n. Deterministic under
/// the seed. The start point is pushed away from the common set so runs have
/// work to do.
pub fn random_instance(n: usize, m: usize, geometry: Geometry, seed: u64) -> Result<GeneratedInstance> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let rho = 0.3;
    let center = random_vector(&mut rng, n, 1.0);

    let descs: Vec<CutterDesc> = (0..m)
        .map(|i| desc_for(&mut rng, i, geometry, &center, rho))
        .collect();

    let second_ref = center.add_scaled(rho * 0.5, &random_direction(&mut rng, n));
    let spec = ProblemSpec {
        name: format!("generated-{seed}"),
        dimension: n,
        seed: Some(seed),
        operators: descs,
        reference_points: vec![center.clone(), second_ref],
    };
    let problem = spec.build()?;

    // start outside the common set (retry with growing offsets; feasible
    // instances admit such points unless every operator covers the sphere)
    let mut x0 = center.add_scaled(3.0, &random_direction(&mut rng, n));
    for attempt in 0..64 {
        if full_residual(&problem.operators, &x0)? >= 1e-3 {
            break;
        }
        x0 = center.add_scaled(3.0 + attempt as f64, &random_direction(&mut rng, n));
    }

    Ok(GeneratedInstance {
        reference_points: problem.spec.reference_points.clone(),
        operators: problem.operators,
        spec: problem.spec,
        x0,
        interior_center: center,
        interior_radius: rho,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::operators::fixed_point_residual;

    #[test]
    fn generated_instances_are_feasible_and_deterministic() {
        for geometry in [Geometry::Halfspaces, Geometry::Balls, Geometry::Mixed] {
            let a = random_instance(5, 6, geometry, 123).unwrap();
            let b = random_instance(5, 6, geometry, 123).unwrap();
            assert_eq!(a.spec, b.spec);
            assert_eq!(a.x0, b.x0);
            // both references are common fixed points
            for q in &a.reference_points {
                for op in &a.operators {
                    assert!(fixed_point_residual(op, q).unwrap() <= 1e-12);
                }
            }
            // the interior ball certificate: points of the ball are fixed
            let mut rng = ChaCha8Rng::seed_from_u64(9);
            for _ in 0..20 {
                let q = a
                    .interior_center
                    .add_scaled(a.interior_radius * rng.random_range(0.0..1.0), &random_direction(&mut rng, 5));
                for op in &a.operators {
                    assert!(fixed_point_residual(op, &q).unwrap() <= 1e-12);
                }
            }
            // the start has work to do
            assert!(full_residual(&a.operators, &a.x0).unwrap() >= 1e-3);
        }
    }

    #[test]
    fn different_seeds_differ() {
        let a = random_instance(4, 5, Geometry::Mixed, 1).unwrap();
        let b = random_instance(4, 5, Geometry::Mixed, 2).unwrap();
        assert_ne!(a.spec, b.spec);
    }
}
