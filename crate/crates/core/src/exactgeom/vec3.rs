use std::cmp::Ordering;
use std::fmt;

use crate::error::{Error, Result};
use crate::exactgeom::q2::Q2;

/// A vector in ℝ³ with components in ℚ(√2).
#[derive(Clone, PartialEq, Eq, Hash, Debug)]
pub struct Vec3(pub [Q2; 3]);

impl Vec3 {
    pub fn new(x: Q2, y: Q2, z: Q2) -> Self {
        Vec3([x, y, z])
    }

    /// Builds a vector whose components are `n + m·√2` with small integers.
    pub fn from_parts(parts: [(i64, i64); 3]) -> Self {
        Vec3(parts.map(|(n, m)| Q2::from_ratios(n, 1, m, 1)))
    }

    pub fn components(&self) -> &[Q2; 3] {
        &self.0
    }

    pub fn is_zero(&self) -> bool {
        self.0.iter().all(Q2::is_zero)
    }

    pub fn dot(&self, other: &Vec3) -> Q2 {
        self.0.iter().zip(other.0.iter()).map(|(u, v)| u * v).sum()
    }

    pub fn norm_sq(&self) -> Q2 {
        self.dot(self)
    }

    /// Cross product without the parallel check.
    pub fn cross_unchecked(&self, other: &Vec3) -> Vec3 {
        let [a1, a2, a3] = &self.0;
        let [b1, b2, b3] = &other.0;
        Vec3::new(a2 * b3 - a3 * b2, a3 * b1 - a1 * b3, a1 * b2 - a2 * b1)
    }

    /// Cross product; fails with [`Error::ZeroCross`] on parallel inputs.
    pub fn cross(&self, other: &Vec3) -> Result<Vec3> {
        let c = self.cross_unchecked(other);
        if c.is_zero() {
            Err(Error::ZeroCross)
        } else {
            Ok(c)
        }
    }

    pub fn scale(&self, k: &Q2) -> Vec3 {
        Vec3(self.0.clone().map(|c| &c * k))
    }

    /// Lexicographic order over components, each compared by
    /// (rational part, √2 coefficient).
    pub fn cmp_parts(&self, other: &Vec3) -> Ordering {
        self.0
            .iter()
            .zip(other.0.iter())
            .map(|(u, v)| u.cmp_parts(v))
            .find(|o| o.is_ne())
            .unwrap_or(Ordering::Equal)
    }
}

impl fmt::Display for Vec3 {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({}, {}, {})", self.0[0], self.0[1], self.0[2])
    }
}

/// A direction in ℝ³ up to nonzero scalar multiples.
///
/// The stored representative has its first nonzero component positive.
/// Two rays compare equal when their representatives are parallel.
#[derive(Clone, Debug)]
pub struct Ray {
    rep: Vec3,
}

impl Ray {
    pub fn new(v: Vec3) -> Result<Ray> {
        if v.is_zero() {
            return Err(Error::ZeroVector);
        }
        let negative = v.0.iter().find(|c| !c.is_zero()).is_some_and(Q2::is_negative);
        let rep = if negative { v.scale(&Q2::from_int(-1)) } else { v };
        Ok(Ray { rep })
    }

    pub fn from_parts(parts: [(i64, i64); 3]) -> Ray {
        Ray::new(Vec3::from_parts(parts)).expect("nonzero representative")
    }

    pub fn rep(&self) -> &Vec3 {
        &self.rep
    }

    pub fn dot(&self, other: &Ray) -> Q2 {
        self.rep.dot(&other.rep)
    }

    pub fn is_orthogonal(&self, other: &Ray) -> bool {
        self.dot(other).is_zero()
    }

    /// `(u·v)² / (|u|²·|v|²)`, the squared cosine between the two rays.
    pub fn squared_overlap(&self, other: &Ray) -> Q2 {
        let d = self.dot(other);
        let num = &d * &d;
        let den = &self.rep.norm_sq() * &other.rep.norm_sq();
        num.checked_div(&den).expect("rays have nonzero norm")
    }

    /// Canonical total order on representatives, descending in
    /// [`Vec3::cmp_parts`]: `(1,0,0)` sorts before `(0,1,0)` before `(0,0,1)`.
    pub fn cmp_canonical(&self, other: &Ray) -> Ordering {
        other.rep.cmp_parts(&self.rep)
    }
}

impl PartialEq for Ray {
    fn eq(&self, other: &Ray) -> bool {
        self.rep.cross_unchecked(&other.rep).is_zero()
    }
}

impl Eq for Ray {}

impl fmt::Display for Ray {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        self.rep.fmt(f)
    }
}

impl serde::Serialize for Ray {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        self.rep.0.serialize(s)
    }
}

pub fn dot(u: &Vec3, v: &Vec3) -> Q2 {
    u.dot(v)
}

pub fn cross(u: &Vec3, v: &Vec3) -> Result<Vec3> {
    u.cross(v)
}

pub fn squared_overlap(u: &Ray, v: &Ray) -> Q2 {
    u.squared_overlap(v)
}

#[cfg(test)]
mod tests {
    use super::*;

    const R2: (i64, i64) = (0, 1);
    const NR2: (i64, i64) = (0, -1);

    fn v(parts: [(i64, i64); 3]) -> Vec3 {
        Vec3::from_parts(parts)
    }

    #[test]
    fn dot_examples() {
        assert!(dot(&v([(0, 0), (1, 0), R2]), &v([(1, 0), R2, (-1, 0)])).is_zero());
        assert_eq!(dot(&v([(1, 0), (0, 0), (0, 0)]), &v([(1, 0), (0, 0), (0, 0)])), Q2::one());
        assert_eq!(dot(&v([(1, 0), (1, 0), R2]), &v([R2, (1, 0), (1, 0)])), Q2::from_ratios(1, 1, 2, 1));
    }

    #[test]
    fn cross_examples() {
        let c = cross(&v([(0, 0), (1, 0), R2]), &v([(1, 0), R2, (-1, 0)])).unwrap();
        assert_eq!(c, v([(-3, 0), R2, (-1, 0)]));
        let c = cross(&v([(1, 0), (0, 0), (0, 0)]), &v([(0, 0), (1, 0), (0, 0)])).unwrap();
        assert_eq!(c, v([(0, 0), (0, 0), (1, 0)]));
        assert!(matches!(cross(&v([(1, 0), (1, 0), (0, 0)]), &v([(2, 0), (2, 0), (0, 0)])), Err(Error::ZeroCross)));
    }

    #[test]
    fn cross_is_orthogonal_to_inputs() {
        let u = v([(1, 0), (1, 0), R2]);
        let w = v([(0, 0), (1, 0), NR2]);
        let c = cross(&u, &w).unwrap();
        assert!(c.dot(&u).is_zero());
        assert!(c.dot(&w).is_zero());
    }

    #[test]
    fn squared_overlap_examples() {
        let e1 = Ray::from_parts([(1, 0), (0, 0), (0, 0)]);
        assert_eq!(squared_overlap(&e1, &e1), Q2::one());
        assert!(squared_overlap(&e1, &Ray::from_parts([(0, 0), (1, 0), R2])).is_zero());
        let u = Ray::from_parts([(1, 0), (1, 0), R2]);
        let w = Ray::from_parts([R2, (1, 0), (1, 0)]);
        assert_eq!(squared_overlap(&u, &w), Q2::from_ratios(9, 16, 1, 4));
        // Scaling a representative does not change the overlap.
        let w2 = Ray::new(w.rep().scale(&Q2::from_int(-3))).unwrap();
        assert_eq!(squared_overlap(&u, &w2), Q2::from_ratios(9, 16, 1, 4));
    }

    #[test]
    fn ray_canonical_sign_and_equality() {
        let r = Ray::from_parts([(0, 0), (-1, 0), R2]);
        assert_eq!(r.rep(), &v([(0, 0), (1, 0), NR2]));
        assert_eq!(Ray::from_parts([(0, 0), (0, 0), (-1, 0)]), Ray::from_parts([(0, 0), (0, 0), (1, 0)]));
        assert_eq!(Ray::from_parts([(2, 0), (2, 0), (0, 2)]), Ray::from_parts([(1, 0), (1, 0), R2]));
        assert_ne!(Ray::from_parts([(1, 0), (1, 0), R2]), Ray::from_parts([(1, 0), (1, 0), NR2]));
        let again = Ray::new(r.rep().clone()).unwrap();
        assert_eq!(again.rep(), r.rep());
        assert!(matches!(Ray::new(v([(0, 0); 3])), Err(Error::ZeroVector)));
    }

    #[test]
    fn canonical_order_puts_axes_in_xyz_order() {
        let e = [
            Ray::from_parts([(1, 0), (0, 0), (0, 0)]),
            Ray::from_parts([(0, 0), (1, 0), (0, 0)]),
            Ray::from_parts([(0, 0), (0, 0), (1, 0)]),
        ];
        let mut shuffled = vec![e[2].clone(), e[0].clone(), e[1].clone()];
        shuffled.sort_by(Ray::cmp_canonical);
        assert_eq!(shuffled, e.to_vec());
    }
}
