//! The cutter library: concrete operators whose fixed-point sets are cut out
//! by the half-space inequality, plus the checker for that inequality.
//!
//! A cutter `T` has a nonempty fixed-point set and satisfies, for every point
//! `x` and every fixed point `q`, `<x - T(x), q - T(x)> <= 0`. Equivalently,
//! `Fix(T)` lies in the half-space `H(x, T(x))` for every `x`. Orthogonal
//! projections onto closed convex sets and subgradient projections of convex
//! functions with nonempty zero-sublevel sets are the shipped instances.
//!
//! The convergence theory additionally requires the cutters to be continuous.
//! Every shipped kind is continuous by construction; user-supplied
//! subgradient handles carry that obligation as a documented contract, not a
//! runtime check.

use std::fmt;
use std::sync::Arc;

use crate::error::{Error, Result};
use crate::linalg::{inner, rel_tol, Vector};

pub type ConvexFn = Arc<dyn Fn(&Vector) -> f64 + Send + Sync>;
pub type SubgradientFn = Arc<dyn Fn(&Vector) -> Vector + Send + Sync>;

/// Subgradient-projection cutter for a convex `f` with nonempty zero-sublevel
/// set: points with `f(x) <= 0` are fixed, others move along `-g(x)` to the
/// linearized zero level.
///
/// The handles must describe a continuous convex function and a selection of
/// its subdifferential; the library does no differentiation of its own.
#[derive(Clone)]
pub struct SubgradientCutter {
    dim: usize,
    f: ConvexFn,
    g: SubgradientFn,
    witness: Option<Vector>,
}

impl fmt::Debug for SubgradientCutter {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("SubgradientCutter")
            .field("dim", &self.dim)
            .field("witness", &self.witness)
            .finish_non_exhaustive()
    }
}

/// Projection onto an affine subspace `{u | <a_j, u> = b_j for all j}` given
/// by independent rows. The row Gram matrix is factored once at construction.
#[derive(Clone, Debug)]
pub struct AffineSubspace {
    rows: Vec<Vector>,
    rhs: Vec<f64>,
    chol: Vec<Vec<f64>>,
}

impl AffineSubspace {
    fn new(rows: Vec<Vector>, rhs: Vec<f64>) -> Result<Self> {
        if rows.is_empty() {
            return Err(Error::InvalidOperator("affine subspace needs >= 1 row".into()));
        }
        if rows.len() != rhs.len() {
            return Err(Error::InvalidOperator(format!(
                "affine subspace has {} rows but {} right-hand sides",
                rows.len(),
                rhs.len()
            )));
        }
        let n = rows[0].dim();
        if rows.iter().any(|r| r.dim() != n) {
            return Err(Error::InvalidOperator("affine subspace rows have mixed dimensions".into()));
        }
        if rhs.iter().any(|b| !b.is_finite()) {
            return Err(Error::NonFinite("affine right-hand side".into()));
        }
        let k = rows.len();
        let mut gram = vec![vec![0.0; k]; k];
        for i in 0..k {
            for j in 0..=i {
                let g = inner(&rows[i], &rows[j])?;
                gram[i][j] = g;
                gram[j][i] = g;
            }
        }
        let chol = cholesky(&gram).ok_or_else(|| {
            Error::InvalidOperator("affine subspace rows are linearly dependent".into())
        })?;
        Ok(Self { rows, rhs, chol })
    }

    fn project(&self, x: &Vector) -> Vector {
        let k = self.rows.len();
        let mut r = Vec::with_capacity(k);
        for j in 0..k {
            r.push(inner(&self.rows[j], x).expect("dims checked") - self.rhs[j]);
        }
        let y = chol_solve(&self.chol, &r);
        let mut p = x.clone();
        for j in 0..k {
            p = p.add_scaled(-y[j], &self.rows[j]);
        }
        p
    }

    fn residual_inf(&self, q: &Vector) -> f64 {
        self.rows
            .iter()
            .zip(&self.rhs)
            .map(|(row, b)| (inner(row, q).expect("dims checked") - b).abs())
            .fold(0.0, f64::max)
    }
}

fn cholesky(a: &[Vec<f64>]) -> Option<Vec<Vec<f64>>> {
    let n = a.len();
    let mut l = vec![vec![0.0; n]; n];
    for i in 0..n {
        for j in 0..=i {
            let mut sum = a[i][j];
            for t in 0..j {
                sum -= l[i][t] * l[j][t];
            }
            if i == j {
                // pivot relative to the diagonal: catches dependence that
                // roundoff turns into a tiny positive value
                if sum <= a[i][i] * 1e-12 || !sum.is_finite() {
                    return None;
                }
                l[i][j] = sum.sqrt();
            } else {
                l[i][j] = sum / l[j][j];
            }
        }
    }
    Some(l)
}

fn chol_solve(l: &[Vec<f64>], b: &[f64]) -> Vec<f64> {
    let n = l.len();
    let mut y = vec![0.0; n];
    for i in 0..n {
        let mut sum = b[i];
        for t in 0..i {
            sum -= l[i][t] * y[t];
        }
        y[i] = sum / l[i][i];
    }
    let mut x = vec![0.0; n];
    for i in (0..n).rev() {
        let mut sum = y[i];
        for t in i + 1..n {
            sum -= l[t][i] * x[t];
        }
        x[i] = sum / l[i][i];
    }
    x
}

/// A concrete cutter operator. Build through the constructors; they enforce
/// the per-kind parameter invariants.
#[derive(Clone, Debug)]
pub enum Cutter {
    Halfspace { normal: Vector, offset: f64 },
    Hyperplane { normal: Vector, offset: f64 },
    Ball { center: Vector, radius: f64 },
    Box { lower: Vector, upper: Vector },
    AffineSubspace(AffineSubspace),
    SubgradientProjection(SubgradientCutter),
}

impl Cutter {
    /// Projection onto `{u | <normal, u> <= offset}`.
    pub fn halfspace(normal: Vector, offset: f64) -> Result<Self> {
        if normal.norm_sq() == 0.0 {
            return Err(Error::InvalidOperator("half-space normal must be nonzero".into()));
        }
        if !offset.is_finite() {
            return Err(Error::NonFinite("half-space offset".into()));
        }
        Ok(Self::Halfspace { normal, offset })
    }

    /// Projection onto `{u | <normal, u> = offset}`.
    pub fn hyperplane(normal: Vector, offset: f64) -> Result<Self> {
        if normal.norm_sq() == 0.0 {
            return Err(Error::InvalidOperator("hyperplane normal must be nonzero".into()));
        }
        if !offset.is_finite() {
            return Err(Error::NonFinite("hyperplane offset".into()));
        }
        Ok(Self::Hyperplane { normal, offset })
    }

    /// Projection onto the closed ball of the given center and radius.
    pub fn ball(center: Vector, radius: f64) -> Result<Self> {
        if !(radius > 0.0) || !radius.is_finite() {
            return Err(Error::InvalidOperator(format!("ball radius {radius} must be > 0")));
        }
        Ok(Self::Ball { center, radius })
    }

    /// Projection onto the axis-aligned box `[lower, upper]`.
    pub fn box_set(lower: Vector, upper: Vector) -> Result<Self> {
        if lower.dim() != upper.dim() {
            return Err(Error::DimensionMismatch { left: lower.dim(), right: upper.dim() });
        }
        for i in 0..lower.dim() {
            if lower[i] > upper[i] {
                return Err(Error::InvalidOperator(format!(
                    "box bounds crossed at coordinate {i}: {} > {}",
                    lower[i], upper[i]
                )));
            }
        }
        Ok(Self::Box { lower, upper })
    }

    /// Projection onto `{u | <a_j, u> = b_j}` for linearly independent rows.
    pub fn affine_subspace(rows: Vec<Vector>, rhs: Vec<f64>) -> Result<Self> {
        Ok(Self::AffineSubspace(AffineSubspace::new(rows, rhs)?))
    }

    /// Subgradient projection from user handles. `witness` is an optional
    /// known point of the zero-sublevel set, used by diagnostics.
    pub fn subgradient_projection(
        dim: usize,
        f: ConvexFn,
        g: SubgradientFn,
        witness: Option<Vector>,
    ) -> Result<Self> {
        if dim == 0 {
            return Err(Error::InvalidOperator("dimension must be >= 1".into()));
        }
        if let Some(w) = &witness {
            if w.dim() != dim {
                return Err(Error::DimensionMismatch { left: dim, right: w.dim() });
            }
        }
        Ok(Self::SubgradientProjection(SubgradientCutter { dim, f, g, witness }))
    }

    /// Subgradient projection of `f(u) = |u - center|^2 - radius^2`; its
    /// fixed-point set is the ball of the given center and radius.
    pub fn quadratic_sublevel(center: Vector, radius: f64) -> Result<Self> {
        if !(radius > 0.0) || !radius.is_finite() {
            return Err(Error::InvalidOperator(format!("radius {radius} must be > 0")));
        }
        let dim = center.dim();
        let c_f = center.clone();
        let c_g = center.clone();
        let r2 = radius * radius;
        Self::subgradient_projection(
            dim,
            Arc::new(move |u: &Vector| u.sub(&c_f).norm_sq() - r2),
            Arc::new(move |u: &Vector| u.sub(&c_g).scale(2.0)),
            Some(center),
        )
    }

    pub fn dimension(&self) -> usize {
        match self {
            Self::Halfspace { normal, .. } | Self::Hyperplane { normal, .. } => normal.dim(),
            Self::Ball { center, .. } => center.dim(),
            Self::Box { lower, .. } => lower.dim(),
            Self::AffineSubspace(a) => a.rows[0].dim(),
            Self::SubgradientProjection(s) => s.dim,
        }
    }

    /// True for the kinds that are orthogonal projections onto their
    /// fixed-point sets. Subgradient projections are cutters but not
    /// projections.
    pub fn is_projection(&self) -> bool {
        !matches!(self, Self::SubgradientProjection(_))
    }

    pub fn kind_name(&self) -> &'static str {
        match self {
            Self::Halfspace { .. } => "halfspace",
            Self::Hyperplane { .. } => "hyperplane",
            Self::Ball { .. } => "ball",
            Self::Box { .. } => "box",
            Self::AffineSubspace(_) => "affine-subspace",
            Self::SubgradientProjection(_) => "subgradient-projection",
        }
    }

    /// A known fixed point, when one is available.
    pub fn witness(&self) -> Option<Vector> {
        match self {
            Self::Halfspace { normal, offset } => {
                let n = normal.dim();
                if *offset >= 0.0 {
                    Some(Vector::zeros(n))
                } else {
                    Some(normal.scale(offset / normal.norm_sq()))
                }
            }
            Self::Hyperplane { normal, offset } => {
                Some(normal.scale(offset / normal.norm_sq()))
            }
            Self::Ball { center, .. } => Some(center.clone()),
            Self::Box { lower, upper } => {
                Some(lower.add_scaled(0.5, &upper.sub(lower)))
            }
            Self::AffineSubspace(a) => Some(a.project(&Vector::zeros(a.rows[0].dim()))),
            Self::SubgradientProjection(s) => s.witness.clone(),
        }
    }

    /// Membership oracle for the fixed-point set, evaluated geometrically
    /// (independent of [`evaluate`]): `Some(true)` when `q` satisfies the
    /// defining constraints within `tol`.
    pub fn fixed_set_contains(&self, q: &Vector, tol: f64) -> Result<bool> {
        if q.dim() != self.dimension() {
            return Err(Error::DimensionMismatch { left: q.dim(), right: self.dimension() });
        }
        Ok(match self {
            Self::Halfspace { normal, offset } => inner(normal, q)? - offset <= tol,
            Self::Hyperplane { normal, offset } => (inner(normal, q)? - offset).abs() <= tol,
            Self::Ball { center, radius } => q.dist(center) - radius <= tol,
            Self::Box { lower, upper } => (0..q.dim())
                .all(|i| q[i] >= lower[i] - tol && q[i] <= upper[i] + tol),
            Self::AffineSubspace(a) => a.residual_inf(q) <= tol,
            Self::SubgradientProjection(s) => (s.f)(q) <= tol,
        })
    }
}

/// Apply the cutter: `T(x)`.
pub fn evaluate(op: &Cutter, x: &Vector) -> Result<Vector> {
    if x.dim() != op.dimension() {
        return Err(Error::DimensionMismatch { left: x.dim(), right: op.dimension() });
    }
    let out = match op {
        Cutter::Halfspace { normal, offset } => {
            let s = inner(normal, x)?;
            if s <= *offset {
                x.clone()
            } else {
                x.add_scaled(-(s - offset) / normal.norm_sq(), normal)
            }
        }
        Cutter::Hyperplane { normal, offset } => {
            let s = inner(normal, x)?;
            x.add_scaled(-(s - offset) / normal.norm_sq(), normal)
        }
        Cutter::Ball { center, radius } => {
            let d = x.sub(center);
            let dist = d.norm();
            if dist <= *radius {
                x.clone()
            } else {
                center.add_scaled(radius / dist, &d)
            }
        }
        Cutter::Box { lower, upper } => {
            let clamped: Vec<f64> = x
                .as_slice()
                .iter()
                .enumerate()
                .map(|(i, v)| v.max(lower[i]).min(upper[i]))
                .collect();
            Vector::new(clamped)?
        }
        Cutter::AffineSubspace(a) => a.project(x),
        Cutter::SubgradientProjection(s) => {
            let fx = (s.f)(x);
            if !fx.is_finite() {
                return Err(Error::NonFinite("convex function value".into()));
            }
            if fx <= 0.0 {
                x.clone()
            } else {
                let gx = (s.g)(x);
                if gx.dim() != x.dim() {
                    return Err(Error::DimensionMismatch { left: gx.dim(), right: x.dim() });
                }
                let gs = gx.norm_sq();
                if gs == 0.0 {
                    return Err(Error::ZeroSubgradient);
                }
                x.add_scaled(-fx / gs, &gx)
            }
        }
    };
    if !out.all_finite() {
        return Err(Error::NonFinite(format!("{} evaluation", op.kind_name())));
    }
    Ok(out)
}

/// The defining cutter quantity `<x - T(x), q - T(x)>`; nonpositive (up to
/// roundoff) whenever `q` is a fixed point of `T`.
pub fn check_cutter_inequality(op: &Cutter, x: &Vector, q: &Vector) -> Result<f64> {
    let tx = evaluate(op, x)?;
    inner(&x.sub(&tx), &q.sub(&tx))
}

/// `|T(x) - x|`.
pub fn fixed_point_residual(op: &Cutter, x: &Vector) -> Result<f64> {
    Ok(evaluate(op, x)?.dist(x))
}

/// The set `H(x, y) = {u | <x - y, u - y> <= 0}`: a half-space when `x != y`,
/// the whole space otherwise.
#[derive(Clone, Debug, PartialEq)]
pub struct HalfspaceSet {
    anchor: Vector,
    image: Vector,
}

impl HalfspaceSet {
    pub fn new(anchor: Vector, image: Vector) -> Result<Self> {
        if anchor.dim() != image.dim() {
            return Err(Error::DimensionMismatch { left: anchor.dim(), right: image.dim() });
        }
        Ok(Self { anchor, image })
    }

    /// The membership margin `<x - y, u - y>`; `u` belongs to the set when
    /// this is nonpositive.
    pub fn margin(&self, u: &Vector) -> Result<f64> {
        inner(&self.anchor.sub(&self.image), &u.sub(&self.image))
    }

    /// Membership at the crate-wide relative tolerance.
    pub fn contains(&self, u: &Vector) -> Result<bool> {
        let scale = self.anchor.dist(&self.image) * u.dist(&self.image);
        Ok(self.margin(u)? <= rel_tol(scale))
    }

    /// Membership at an explicit absolute slack.
    pub fn contains_with_slack(&self, u: &Vector, slack: f64) -> Result<bool> {
        Ok(self.margin(u)? <= slack)
    }
}

/// Half-space membership test for `H(x, y)`.
pub fn halfspace_contains(set: &HalfspaceSet, u: &Vector) -> Result<bool> {
    set.contains(u)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn v(entries: &[f64]) -> Vector {
        Vector::new(entries.to_vec()).unwrap()
    }

    #[test]
    fn halfspace_projection_hand_value() {
        let t = Cutter::halfspace(v(&[1.0, 0.0]), 1.0).unwrap();
        let p = evaluate(&t, &v(&[2.0, 0.0])).unwrap();
        assert_eq!(p, v(&[1.0, 0.0]));
    }

    /// minimality of the half-space projection against sampled feasible points
    #[test]
    fn halfspace_projection_is_nearest_feasible_point() {
        use rand::{Rng, SeedableRng};
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(42);
        let a = v(&[0.3, -1.2, 0.7]);
        let t = Cutter::halfspace(a.clone(), 0.4).unwrap();
        let x = v(&[2.0, -3.0, 1.5]);
        let p = evaluate(&t, &x).unwrap();
        let d_opt = x.dist(&p);
        for _ in 0..500 {
            let u = Vector::new((0..3).map(|_| rng.random_range(-5.0..5.0)).collect()).unwrap();
            if inner(&a, &u).unwrap() <= 0.4 {
                assert!(x.dist(&u) >= d_opt - 1e-12);
            }
        }
    }

    #[test]
    fn ball_interior_point_is_fixed() {
        let t = Cutter::ball(v(&[0.0, 0.0]), 1.0).unwrap();
        let x = v(&[0.0, 0.5]);
        assert_eq!(evaluate(&t, &x).unwrap(), x);
    }

    #[test]
    fn subgradient_projection_hand_value() {
        // f(u) = |u|^2 - 1 at (2, 0): f = 3, g = (4, 0), step to (1.25, 0)
        let t = Cutter::quadratic_sublevel(v(&[0.0, 0.0]), 1.0).unwrap();
        let p = evaluate(&t, &v(&[2.0, 0.0])).unwrap();
        assert!((p[0] - 1.25).abs() < 1e-15 && p[1] == 0.0);
        // the function value decreases toward the level set
        assert!(p.norm_sq() - 1.0 < 3.0);
    }

    #[test]
    fn zero_subgradient_is_an_error() {
        let t = Cutter::subgradient_projection(
            2,
            Arc::new(|_x: &Vector| 1.0),
            Arc::new(|x: &Vector| Vector::zeros(x.dim())),
            None,
        )
        .unwrap();
        assert!(matches!(evaluate(&t, &v(&[0.0, 0.0])), Err(Error::ZeroSubgradient)));
    }

    #[test]
    fn nan_from_handles_is_an_error() {
        let t = Cutter::subgradient_projection(
            1,
            Arc::new(|_x: &Vector| f64::NAN),
            Arc::new(|x: &Vector| x.clone()),
            None,
        )
        .unwrap();
        assert!(matches!(evaluate(&t, &v(&[1.0])), Err(Error::NonFinite(_))));
    }

    #[test]
    fn cutter_inequality_hand_value() {
        // a=(1,0), beta=0: T((1,1)) = (0,1); <(1,0), (-1,-1)> = -1
        let t = Cutter::halfspace(v(&[1.0, 0.0]), 0.0).unwrap();
        let value = check_cutter_inequality(&t, &v(&[1.0, 1.0]), &v(&[-1.0, 0.0])).unwrap();
        assert_eq!(value, -1.0);
    }

    #[test]
    fn cutter_inequality_zero_at_fixed_points() {
        let t = Cutter::ball(v(&[1.0, 2.0]), 2.0).unwrap();
        let x = v(&[1.0, 1.0]); // interior, so x = T(x)
        let q = v(&[1.0, 2.0]);
        assert_eq!(check_cutter_inequality(&t, &x, &q).unwrap(), 0.0);
    }

    #[test]
    fn residual_hand_values() {
        let hs = Cutter::halfspace(v(&[1.0, 0.0]), 0.0).unwrap();
        assert_eq!(fixed_point_residual(&hs, &v(&[3.0, 0.0])).unwrap(), 3.0);
        let ball = Cutter::ball(v(&[0.0, 0.0]), 1.0).unwrap();
        assert_eq!(fixed_point_residual(&ball, &v(&[2.0, 0.0])).unwrap(), 1.0);
        assert_eq!(fixed_point_residual(&ball, &v(&[0.3, 0.0])).unwrap(), 0.0);
    }

    #[test]
    fn halfspace_set_membership() {
        let h = HalfspaceSet::new(v(&[1.0, 0.0]), v(&[0.0, 0.0])).unwrap();
        assert!(h.contains(&v(&[-1.0, 0.0])).unwrap());
        assert!(!h.contains(&v(&[1.0, 0.0])).unwrap());
        // anchor = image: the whole space
        let all = HalfspaceSet::new(v(&[1.0, 1.0]), v(&[1.0, 1.0])).unwrap();
        assert!(all.contains(&v(&[100.0, -7.0])).unwrap());
    }

    #[test]
    fn affine_projection_matches_hyperplane_case() {
        let a = v(&[0.0, 3.0]);
        let hyper = Cutter::hyperplane(a.clone(), 6.0).unwrap();
        let affine = Cutter::affine_subspace(vec![a], vec![6.0]).unwrap();
        let x = v(&[4.0, 7.0]);
        let p1 = evaluate(&hyper, &x).unwrap();
        let p2 = evaluate(&affine, &x).unwrap();
        assert!(p1.dist(&p2) < 1e-12);
        assert_eq!(p1, v(&[4.0, 2.0]));
    }

    #[test]
    fn affine_projection_two_rows() {
        // intersection of {u1 = 1} and {u2 = -2} in R^3
        let rows = vec![v(&[1.0, 0.0, 0.0]), v(&[0.0, 1.0, 0.0])];
        let t = Cutter::affine_subspace(rows, vec![1.0, -2.0]).unwrap();
        let p = evaluate(&t, &v(&[5.0, 5.0, 5.0])).unwrap();
        assert!(p.dist(&v(&[1.0, -2.0, 5.0])) < 1e-12);
        // idempotent
        assert!(evaluate(&t, &p).unwrap().dist(&p) < 1e-12);
    }

    #[test]
    fn dependent_affine_rows_rejected() {
        let rows = vec![v(&[1.0, 1.0]), v(&[2.0, 2.0])];
        assert!(Cutter::affine_subspace(rows, vec![0.0, 0.0]).is_err());
    }

    #[test]
    fn invalid_parameters_rejected() {
        assert!(Cutter::halfspace(v(&[0.0, 0.0]), 1.0).is_err());
        assert!(Cutter::ball(v(&[0.0]), 0.0).is_err());
        assert!(Cutter::ball(v(&[0.0]), -1.0).is_err());
        assert!(Cutter::box_set(v(&[1.0]), v(&[0.0])).is_err());
    }

    #[test]
    fn witnesses_are_fixed_points() {
        let ops = [
            Cutter::halfspace(v(&[1.0, -2.0]), -3.0).unwrap(),
            Cutter::hyperplane(v(&[2.0, 1.0]), 4.0).unwrap(),
            Cutter::ball(v(&[1.0, 1.0]), 0.5).unwrap(),
            Cutter::box_set(v(&[-1.0, 0.0]), v(&[1.0, 2.0])).unwrap(),
            Cutter::affine_subspace(vec![v(&[1.0, 1.0])], vec![3.0]).unwrap(),
            Cutter::quadratic_sublevel(v(&[0.5, 0.5]), 2.0).unwrap(),
        ];
        for op in &ops {
            let q = op.witness().expect("shipped kinds carry a witness");
            assert!(
                fixed_point_residual(op, &q).unwrap() <= 1e-12,
                "witness not fixed for {}",
                op.kind_name()
            );
            assert!(op.fixed_set_contains(&q, 1e-10).unwrap());
        }
    }

    #[test]
    fn dimension_mismatch_is_an_error() {
        let t = Cutter::ball(v(&[0.0, 0.0]), 1.0).unwrap();
        assert!(matches!(
            evaluate(&t, &v(&[1.0])),
            Err(Error::DimensionMismatch { .. })
        ));
    }

    /// cutters are immutable and shareable across threads
    #[test]
    fn cutters_are_send_and_sync() {
        fn assert_send_sync<T: Send + Sync>() {}
        assert_send_sync::<Cutter>();
        assert_send_sync::<HalfspaceSet>();
    }
}
