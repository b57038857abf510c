//! Dense points of R^n and the weighted inner product on the m-fold product
//! space that the block-iterative machinery is built on.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::weights::WeightVector;

/// Crate-wide relative comparison tolerance: `1e-12 * (1 + magnitude)`.
pub fn rel_tol(magnitude: f64) -> f64 {
    1e-12 * (1.0 + magnitude.abs())
}

/// Equality up to the crate-wide relative tolerance.
pub fn approx_eq(a: f64, b: f64) -> bool {
    (a - b).abs() <= rel_tol(a.abs().max(b.abs()))
}

/// A point of R^n. Entries are finite by construction and the dimension is
/// fixed across one problem.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "Vec<f64>", into = "Vec<f64>")]
pub struct Vector {
    entries: Vec<f64>,
}

impl Vector {
    pub fn new(entries: Vec<f64>) -> Result<Self> {
        if entries.is_empty() {
            return Err(Error::Validation("vector dimension must be >= 1".into()));
        }
        if entries.iter().any(|e| !e.is_finite()) {
            return Err(Error::NonFinite("vector entry".into()));
        }
        Ok(Self { entries })
    }

    pub fn zeros(n: usize) -> Self {
        Self { entries: vec![0.0; n] }
    }

    pub fn dim(&self) -> usize {
        self.entries.len()
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.entries
    }

    pub fn norm_sq(&self) -> f64 {
        self.entries.iter().map(|e| e * e).sum()
    }

    pub fn norm(&self) -> f64 {
        self.norm_sq().sqrt()
    }

    /// `|self - other|`.
    pub fn dist(&self, other: &Vector) -> f64 {
        debug_assert_eq!(self.dim(), other.dim());
        self.entries
            .iter()
            .zip(&other.entries)
            .map(|(a, b)| (a - b) * (a - b))
            .sum::<f64>()
            .sqrt()
    }

    /// `self + t * d`.
    pub fn add_scaled(&self, t: f64, d: &Vector) -> Vector {
        debug_assert_eq!(self.dim(), d.dim());
        Vector {
            entries: self
                .entries
                .iter()
                .zip(&d.entries)
                .map(|(a, b)| a + t * b)
                .collect(),
        }
    }

    pub fn sub(&self, other: &Vector) -> Vector {
        debug_assert_eq!(self.dim(), other.dim());
        Vector {
            entries: self
                .entries
                .iter()
                .zip(&other.entries)
                .map(|(a, b)| a - b)
                .collect(),
        }
    }

    pub fn scale(&self, t: f64) -> Vector {
        Vector {
            entries: self.entries.iter().map(|a| a * t).collect(),
        }
    }

    pub fn all_finite(&self) -> bool {
        self.entries.iter().all(|e| e.is_finite())
    }
}

impl std::ops::Index<usize> for Vector {
    type Output = f64;
    fn index(&self, i: usize) -> &f64 {
        &self.entries[i]
    }
}

impl TryFrom<Vec<f64>> for Vector {
    type Error = Error;
    fn try_from(entries: Vec<f64>) -> Result<Self> {
        Vector::new(entries)
    }
}

impl From<Vector> for Vec<f64> {
    fn from(v: Vector) -> Vec<f64> {
        v.entries
    }
}

/// Euclidean inner product.
pub fn inner(x: &Vector, y: &Vector) -> Result<f64> {
    if x.dim() != y.dim() {
        return Err(Error::DimensionMismatch { left: x.dim(), right: y.dim() });
    }
    Ok(x.entries.iter().zip(&y.entries).map(|(a, b)| a * b).sum())
}

/// An element of the m-fold product space X^m: one component per operator
/// index.
#[derive(Clone, Debug, PartialEq)]
pub struct ProductPoint {
    components: Vec<Vector>,
}

impl ProductPoint {
    pub fn new(components: Vec<Vector>) -> Result<Self> {
        if components.is_empty() {
            return Err(Error::Validation("product point needs >= 1 component".into()));
        }
        let n = components[0].dim();
        if let Some(bad) = components.iter().find(|c| c.dim() != n) {
            return Err(Error::DimensionMismatch { left: n, right: bad.dim() });
        }
        Ok(Self { components })
    }

    /// Number of components m.
    pub fn count(&self) -> usize {
        self.components.len()
    }

    /// Dimension n of each component.
    pub fn dim(&self) -> usize {
        self.components[0].dim()
    }

    pub fn components(&self) -> &[Vector] {
        &self.components
    }

    pub fn component(&self, i: usize) -> &Vector {
        &self.components[i]
    }

    pub fn sub(&self, other: &ProductPoint) -> ProductPoint {
        debug_assert_eq!(self.count(), other.count());
        ProductPoint {
            components: self
                .components
                .iter()
                .zip(&other.components)
                .map(|(a, b)| a.sub(b))
                .collect(),
        }
    }
}

/// Weighted inner product on X^m: the w-weighted sum of componentwise
/// Euclidean inner products.
pub fn product_inner(x: &ProductPoint, y: &ProductPoint, w: &WeightVector) -> Result<f64> {
    if x.count() != y.count() {
        return Err(Error::DimensionMismatch { left: x.count(), right: y.count() });
    }
    if x.count() != w.len() {
        return Err(Error::DimensionMismatch { left: x.count(), right: w.len() });
    }
    let mut acc = 0.0;
    for i in 0..x.count() {
        let wi = w.get(i);
        if wi == 0.0 {
            continue;
        }
        acc += wi * inner(x.component(i), y.component(i))?;
    }
    Ok(acc)
}

/// Squared norm induced by [`product_inner`].
pub fn product_norm_sq(x: &ProductPoint, w: &WeightVector) -> Result<f64> {
    product_inner(x, x, w)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn v(entries: &[f64]) -> Vector {
        Vector::new(entries.to_vec()).unwrap()
    }

    #[test]
    fn inner_orthogonal_axes() {
        assert_eq!(inner(&v(&[1.0, 0.0]), &v(&[0.0, 1.0])).unwrap(), 0.0);
    }

    #[test]
    fn inner_direct_arithmetic() {
        assert_eq!(inner(&v(&[1.0, 2.0]), &v(&[3.0, 4.0])).unwrap(), 11.0);
    }

    #[test]
    fn inner_dimension_mismatch() {
        assert!(matches!(
            inner(&v(&[1.0]), &v(&[1.0, 2.0])),
            Err(Error::DimensionMismatch { .. })
        ));
    }

    #[test]
    fn vector_rejects_nan() {
        assert!(Vector::new(vec![0.0, f64::NAN]).is_err());
        assert!(Vector::new(vec![f64::INFINITY]).is_err());
        assert!(Vector::new(vec![]).is_err());
    }

    #[test]
    fn product_inner_unit_cross() {
        // m=2, w=(1/2,1/2), x=((1,0),(0,1)), y=x: 0.5*1 + 0.5*1 = 1
        let x = ProductPoint::new(vec![v(&[1.0, 0.0]), v(&[0.0, 1.0])]).unwrap();
        let w = WeightVector::new(vec![0.5, 0.5]).unwrap();
        assert_eq!(product_inner(&x, &x, &w).unwrap(), 1.0);
    }

    #[test]
    fn product_inner_zero_weight_component_ignored() {
        let x = ProductPoint::new(vec![v(&[1.0, 0.0]), v(&[1e300, 1e300])]).unwrap();
        let y = x.clone();
        let w = WeightVector::new(vec![1.0, 0.0]).unwrap();
        assert_eq!(product_inner(&x, &y, &w).unwrap(), 1.0);
    }

    #[test]
    fn product_inner_shape_mismatch() {
        let x = ProductPoint::new(vec![v(&[1.0, 0.0])]).unwrap();
        let y = ProductPoint::new(vec![v(&[1.0, 0.0]), v(&[0.0, 1.0])]).unwrap();
        let w = WeightVector::new(vec![0.5, 0.5]).unwrap();
        assert!(product_inner(&x, &y, &w).is_err());
    }

    #[test]
    fn vector_serde_is_a_plain_array() {
        let x = v(&[1.5, -2.0]);
        let s = serde_json::to_string(&x).unwrap();
        assert_eq!(s, "[1.5,-2.0]");
        let back: Vector = serde_json::from_str(&s).unwrap();
        assert_eq!(back, x);
        assert!(serde_json::from_str::<Vector>("[1.0,null]").is_err());
    }
}
