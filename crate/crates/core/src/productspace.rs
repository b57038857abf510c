//! The product-space formalism: the diagonal embedding, the two projections
//! of the product space, and the extrapolated target point built from them.
//!
//! A common-fixed-point problem over m operators in R^n embeds into the
//! product space (R^n)^m with the weighted inner product; the problem becomes
//! finding a point of the diagonal that is fixed componentwise. This module
//! exists as an independent computational route for the quantities the
//! `combine` module computes componentwise (most importantly `lambda_hat`):
//! the production solver never calls it, the cross-check suites do. Keep the
//! two routes separate; their agreement is one of the acceptance checks.

use crate::combine::eps_fix;
use crate::error::{Error, Result};
use crate::linalg::{product_norm_sq, ProductPoint, Vector};
use crate::operators::{evaluate, Cutter};
use crate::weights::WeightVector;

/// A point of the diagonal subspace: all m components equal `base`.
#[derive(Clone, Debug, PartialEq)]
pub struct DiagonalPoint {
    base: Vector,
}

impl DiagonalPoint {
    pub fn new(base: Vector) -> Self {
        Self { base }
    }

    pub fn base(&self) -> &Vector {
        &self.base
    }

    pub fn into_base(self) -> Vector {
        self.base
    }

    pub fn to_product(&self, m: usize) -> Result<ProductPoint> {
        embed(&self.base, m)
    }
}

/// The canonical embedding `J(u) = (u, ..., u)`.
pub fn embed(u: &Vector, m: usize) -> Result<ProductPoint> {
    if m == 0 {
        return Err(Error::Validation("embedding needs m >= 1".into()));
    }
    ProductPoint::new(vec![u.clone(); m])
}

/// The product operator: apply the i-th cutter to the i-th component.
pub fn apply_componentwise(ops: &[Cutter], x: &ProductPoint) -> Result<ProductPoint> {
    if ops.len() != x.count() {
        return Err(Error::DimensionMismatch { left: ops.len(), right: x.count() });
    }
    let components = ops
        .iter()
        .zip(x.components())
        .map(|(op, xi)| evaluate(op, xi))
        .collect::<Result<Vec<_>>>()?;
    ProductPoint::new(components)
}

/// Componentwise projection onto the product of the operators' fixed sets.
/// Only defined for projection kinds; subgradient projections are rejected.
pub fn project_product(ops: &[Cutter], x: &ProductPoint) -> Result<ProductPoint> {
    if let Some(op) = ops.iter().find(|op| !op.is_projection()) {
        return Err(Error::InvalidOperator(format!(
            "componentwise projection needs projection operators, got {}",
            op.kind_name()
        )));
    }
    apply_componentwise(ops, x)
}

/// Projection onto the diagonal in the w-weighted product space: the
/// diagonal point whose base is the w-weighted average of the components.
/// Zero weights contribute nothing; the support convention extends the
/// positive-weight formula.
pub fn project_diagonal(x: &ProductPoint, w: &WeightVector) -> Result<DiagonalPoint> {
    if x.count() != w.len() {
        return Err(Error::DimensionMismatch { left: x.count(), right: w.len() });
    }
    let mut base = Vector::zeros(x.dim());
    for i in 0..x.count() {
        let wi = w.get(i);
        if wi == 0.0 {
            continue;
        }
        base = base.add_scaled(wi, x.component(i));
    }
    Ok(DiagonalPoint { base })
}

/// The squared product-space norms that define `lambda_hat` through the
/// product route: numerator `|||T(J(x)) - J(x)|||^2_w`, denominator
/// `|||P_D(T(J(x))) - J(x)|||^2_w`.
fn product_ratio_parts(ops: &[Cutter], w: &WeightVector, x: &Vector) -> Result<(f64, f64)> {
    let m = ops.len();
    let jx = embed(x, m)?;
    let tx = apply_componentwise(ops, &jx)?;
    let num = product_norm_sq(&tx.sub(&jx), w)?;
    let pd = project_diagonal(&tx, w)?;
    let pd_j = pd.to_product(m)?;
    let den = product_norm_sq(&pd_j.sub(&jx), w)?;
    Ok((num, den))
}

/// `lambda_hat` computed through the product space. This is the oracle route:
/// it aggregates absolute operator images through the diagonal projection and
/// measures with the weighted product norm, while the `combine` module
/// aggregates displacements componentwise. No clamping is applied.
pub fn lambda_hat_product(ops: &[Cutter], w: &WeightVector, x: &Vector) -> Result<f64> {
    let (num, den) = product_ratio_parts(ops, w, x)?;
    let eps = eps_fix(x);
    if den <= eps * eps {
        return Err(Error::AtFixedPoint);
    }
    Ok(num / den)
}

/// The extrapolated diagonal target: from the diagonal point `J(x)`, step
/// toward the diagonal projection of the operator images, scaled by the
/// product-space gain. Its base equals the fully extrapolated relaxed step
/// `T_{w, lambda_hat}(x)`.
pub fn b_w(ops: &[Cutter], w: &WeightVector, x: &Vector) -> Result<DiagonalPoint> {
    let m = ops.len();
    let jx = embed(x, m)?;
    let tx = apply_componentwise(ops, &jx)?;
    let num = product_norm_sq(&tx.sub(&jx), w)?;
    let pd = project_diagonal(&tx, w)?;
    let pd_j = pd.to_product(m)?;
    let den = product_norm_sq(&pd_j.sub(&jx), w)?;
    let eps = eps_fix(x);
    if den <= eps * eps {
        return Err(Error::AtFixedPoint);
    }
    let base = x.add_scaled(num / den, &pd.base().sub(x));
    Ok(DiagonalPoint { base })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::product_inner;

    fn v(entries: &[f64]) -> Vector {
        Vector::new(entries.to_vec()).unwrap()
    }

    fn two_hyperplanes() -> Vec<Cutter> {
        vec![
            Cutter::hyperplane(v(&[0.0, 1.0]), 0.0).unwrap(),
            Cutter::hyperplane(v(&[1.0, 0.0]), 0.0).unwrap(),
        ]
    }

    fn half() -> WeightVector {
        WeightVector::new(vec![0.5, 0.5]).unwrap()
    }

    #[test]
    fn embed_repeats_the_base() {
        let p = embed(&v(&[1.0, 2.0]), 3).unwrap();
        assert_eq!(p.count(), 3);
        for c in p.components() {
            assert_eq!(c, &v(&[1.0, 2.0]));
        }
        assert!(embed(&v(&[1.0]), 0).is_err());
    }

    #[test]
    fn embed_then_project_diagonal_is_identity() {
        let u = v(&[0.5, -2.0]);
        let p = embed(&u, 4).unwrap();
        let d = project_diagonal(&p, &WeightVector::uniform(4).unwrap()).unwrap();
        assert!(d.base().dist(&u) < 1e-15);
    }

    #[test]
    fn project_diagonal_weighted_average() {
        let p = ProductPoint::new(vec![v(&[1.0, 0.0]), v(&[0.0, 1.0])]).unwrap();
        let d = project_diagonal(&p, &half()).unwrap();
        assert_eq!(d.base(), &v(&[0.5, 0.5]));
    }

    /// the diagonal base minimizes the weighted sum of squared distances
    #[test]
    fn project_diagonal_is_locally_minimal() {
        use rand::{Rng, SeedableRng};
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(3);
        let p = ProductPoint::new(vec![v(&[1.0, -1.0]), v(&[0.0, 2.0]), v(&[3.0, 3.0])]).unwrap();
        let w = WeightVector::new(vec![0.2, 0.5, 0.3]).unwrap();
        let base = project_diagonal(&p, &w).unwrap().into_base();
        let objective = |z: &Vector| -> f64 {
            (0..3).map(|i| w.get(i) * p.component(i).dist(z).powi(2)).sum()
        };
        let at_base = objective(&base);
        for _ in 0..200 {
            let delta = Vector::new(vec![
                rng.random_range(-0.5..0.5),
                rng.random_range(-0.5..0.5),
            ])
            .unwrap();
            assert!(objective(&base.add_scaled(1.0, &delta)) >= at_base - 1e-12);
        }
    }

    #[test]
    fn project_product_matches_componentwise_evaluate() {
        let ops = two_hyperplanes();
        let p = ProductPoint::new(vec![v(&[1.0, 1.0]), v(&[2.0, -3.0])]).unwrap();
        let q = project_product(&ops, &p).unwrap();
        for (i, op) in ops.iter().enumerate() {
            assert_eq!(q.component(i), &evaluate(op, p.component(i)).unwrap());
        }
        // already inside the product set: fixed
        let inside = ProductPoint::new(vec![v(&[5.0, 0.0]), v(&[0.0, 5.0])]).unwrap();
        assert_eq!(project_product(&ops, &inside).unwrap(), inside);
    }

    #[test]
    fn project_product_rejects_non_projections() {
        let ops = vec![Cutter::quadratic_sublevel(v(&[0.0, 0.0]), 1.0).unwrap()];
        let p = embed(&v(&[2.0, 0.0]), 1).unwrap();
        assert!(matches!(project_product(&ops, &p), Err(Error::InvalidOperator(_))));
        // the general componentwise application accepts any cutter
        assert!(apply_componentwise(&ops, &p).is_ok());
    }

    #[test]
    fn b_w_two_hyperplane_base_is_origin() {
        let b = b_w(&two_hyperplanes(), &half(), &v(&[1.0, 1.0])).unwrap();
        assert!(b.base().norm() < 1e-15);
    }

    #[test]
    fn b_w_errors_at_common_fixed_points() {
        assert!(matches!(
            b_w(&two_hyperplanes(), &half(), &Vector::zeros(2)),
            Err(Error::AtFixedPoint)
        ));
    }

    /// the target point lies on the product-space hyperplane through T(J(x))
    #[test]
    fn b_w_lies_on_the_orthogonality_hyperplane() {
        let ops = two_hyperplanes();
        let w = half();
        let x = v(&[1.0, 1.0]);
        let b = b_w(&ops, &w, &x).unwrap();
        let m = ops.len();
        let jx = embed(&x, m).unwrap();
        let tx = apply_componentwise(&ops, &jx).unwrap();
        let bj = b.to_product(m).unwrap();
        let value = product_inner(&bj.sub(&tx), &tx.sub(&jx), &w).unwrap();
        assert!(value.abs() <= 1e-10);
    }

    #[test]
    fn lambda_hat_product_two_hyperplane_value() {
        let got = lambda_hat_product(&two_hyperplanes(), &half(), &v(&[1.0, 1.0])).unwrap();
        assert!((got - 2.0).abs() < 1e-14);
    }
}
