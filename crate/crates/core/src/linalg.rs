//! Fixed-size 2×2 and 3-vector arithmetic used by the node-wise form algebra.

use std::ops::{Add, AddAssign, Mul, Neg, Sub};

use crate::scalar::Real;

/// 2×2 matrix `[[a, b], [c, d]]` acting on column vectors.
///
/// Symmetric bilinear forms (I, II, III) and the mixed tensors (B, B*) both
/// use this type; a form `g` and an operator `A` combine as `g(Ax, Ay) = Aᵀ g A`.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct Mat2<T> {
    pub a: T,
    pub b: T,
    pub c: T,
    pub d: T,
}

impl<T: Real> Mat2<T> {
    pub fn new(a: T, b: T, c: T, d: T) -> Self {
        Self { a, b, c, d }
    }

    pub fn sym(a: T, b: T, d: T) -> Self {
        Self { a, b, c: b, d }
    }

    pub fn diag(a: T, d: T) -> Self {
        Self::new(a, T::zero(), T::zero(), d)
    }

    pub fn identity() -> Self {
        Self::diag(T::one(), T::one())
    }

    pub fn zero() -> Self {
        Self::diag(T::zero(), T::zero())
    }

    pub fn scale(self, s: T) -> Self {
        Self::new(self.a * s, self.b * s, self.c * s, self.d * s)
    }

    pub fn det(&self) -> T {
        self.a * self.d - self.b * self.c
    }

    pub fn trace(&self) -> T {
        self.a + self.d
    }

    pub fn transpose(&self) -> Self {
        Self::new(self.a, self.c, self.b, self.d)
    }

    /// Inverse, or `None` when `|det|` is at or below `T::epsilon()` times the
    /// squared entry scale.
    pub fn inverse(&self) -> Option<Self> {
        let det = self.det();
        let scale = self.max_abs();
        if !det.is_finite() || det.abs() <= T::epsilon() * scale * scale || scale == T::zero() {
            return None;
        }
        let inv = T::one() / det;
        Some(Self::new(self.d * inv, -self.b * inv, -self.c * inv, self.a * inv))
    }

    /// Symmetric part `(A + Aᵀ)/2`.
    pub fn symmetrized(&self) -> Self {
        let off = (self.b + self.c) * T::lit(0.5);
        Self::sym(self.a, off, self.d)
    }

    pub fn max_abs(&self) -> T {
        self.a.abs().max(self.b.abs()).max(self.c.abs()).max(self.d.abs())
    }

    pub fn is_finite(&self) -> bool {
        self.a.is_finite() && self.b.is_finite() && self.c.is_finite() && self.d.is_finite()
    }

    /// Positive definiteness of the symmetric part.
    pub fn is_positive_definite(&self) -> bool {
        let s = self.symmetrized();
        s.a > T::zero() && s.det() > T::zero()
    }

    /// `g(A·, A·) = Aᵀ g A` for a form `self` and operator `op`.
    pub fn pullback(&self, op: &Mat2<T>) -> Self {
        (op.transpose() * *self * *op).symmetrized()
    }

    /// `g(A·, C·) = Aᵀ g C`, symmetrized.
    pub fn pair(&self, left: &Mat2<T>, right: &Mat2<T>) -> Self {
        (left.transpose() * *self * *right).symmetrized()
    }

    pub fn mul_vec(&self, v: [T; 2]) -> [T; 2] {
        [self.a * v[0] + self.b * v[1], self.c * v[0] + self.d * v[1]]
    }

    /// Eigenvalues `(larger, smaller)` from trace and determinant, assuming
    /// they are real (operators self-adjoint for a metric). A slightly
    /// negative discriminant from rounding is clamped to zero.
    pub fn real_eigenvalues(&self) -> (T, T) {
        let half = self.trace() * T::lit(0.5);
        let disc = (half * half - self.det()).max(T::zero()).sqrt();
        (half + disc, half - disc)
    }

    pub fn solve(&self, rhs: &Mat2<T>) -> Option<Self> {
        self.inverse().map(|inv| inv * *rhs)
    }
}

impl<T: Real> Add for Mat2<T> {
    type Output = Self;
    fn add(self, o: Self) -> Self {
        Self::new(self.a + o.a, self.b + o.b, self.c + o.c, self.d + o.d)
    }
}

impl<T: Real> AddAssign for Mat2<T> {
    fn add_assign(&mut self, o: Self) {
        *self = *self + o;
    }
}

impl<T: Real> Sub for Mat2<T> {
    type Output = Self;
    fn sub(self, o: Self) -> Self {
        Self::new(self.a - o.a, self.b - o.b, self.c - o.c, self.d - o.d)
    }
}

impl<T: Real> Neg for Mat2<T> {
    type Output = Self;
    fn neg(self) -> Self {
        Self::new(-self.a, -self.b, -self.c, -self.d)
    }
}

impl<T: Real> Mul for Mat2<T> {
    type Output = Self;
    fn mul(self, o: Self) -> Self {
        Self::new(
            self.a * o.a + self.b * o.c,
            self.a * o.b + self.b * o.d,
            self.c * o.a + self.d * o.c,
            self.c * o.b + self.d * o.d,
        )
    }
}

/// Euclidean 3-vector in half-space coordinates `(x1, x2, ξ)`.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct Vec3<T> {
    pub x: T,
    pub y: T,
    pub z: T,
}

impl<T: Real> Vec3<T> {
    pub fn new(x: T, y: T, z: T) -> Self {
        Self { x, y, z }
    }

    pub fn zero() -> Self {
        Self::new(T::zero(), T::zero(), T::zero())
    }

    pub fn dot(&self, o: &Self) -> T {
        self.x * o.x + self.y * o.y + self.z * o.z
    }

    pub fn cross(&self, o: &Self) -> Self {
        Self::new(
            self.y * o.z - self.z * o.y,
            self.z * o.x - self.x * o.z,
            self.x * o.y - self.y * o.x,
        )
    }

    pub fn norm(&self) -> T {
        self.dot(self).sqrt()
    }

    pub fn scale(self, s: T) -> Self {
        Self::new(self.x * s, self.y * s, self.z * s)
    }

    pub fn component(&self, k: usize) -> T {
        match k {
            0 => self.x,
            1 => self.y,
            _ => self.z,
        }
    }

    pub fn from_components(c: [T; 3]) -> Self {
        Self::new(c[0], c[1], c[2])
    }
}

impl<T: Real> Add for Vec3<T> {
    type Output = Self;
    fn add(self, o: Self) -> Self {
        Self::new(self.x + o.x, self.y + o.y, self.z + o.z)
    }
}

impl<T: Real> Sub for Vec3<T> {
    type Output = Self;
    fn sub(self, o: Self) -> Self {
        Self::new(self.x - o.x, self.y - o.y, self.z - o.z)
    }
}

impl<T: Real> Neg for Vec3<T> {
    type Output = Self;
    fn neg(self) -> Self {
        Self::new(-self.x, -self.y, -self.z)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn inverse_round_trip() {
        let m = Mat2::new(2.0, 1.0, -0.5, 3.0);
        let p = m * m.inverse().unwrap();
        assert!((p - Mat2::identity()).max_abs() < 1e-15);
    }

    #[test]
    fn singular_has_no_inverse() {
        assert!(Mat2::new(1.0, 2.0, 2.0, 4.0).inverse().is_none());
        assert!(Mat2::<f64>::zero().inverse().is_none());
    }

    #[test]
    fn eigenvalues_of_diagonal() {
        let (hi, lo) = Mat2::diag(3.0, -1.0).real_eigenvalues();
        assert_eq!((hi, lo), (3.0, -1.0));
    }

    #[test]
    fn pullback_matches_explicit_product() {
        let g = Mat2::sym(2.0, 0.3, 1.0);
        let a = Mat2::new(1.0, 2.0, 0.0, 1.0);
        let explicit = a.transpose() * g * a;
        assert!((g.pullback(&a) - explicit).max_abs() < 1e-15);
    }
}
