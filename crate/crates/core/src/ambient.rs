//! Upper half-space model of H³ with unit curvature radius: points, the
//! distance function, closed-form geodesics and the Levi-Civita connection.

use crate::error::{Error, Result};
use crate::linalg::Vec3;
use crate::scalar::{lit, Real};

/// A point `(x1, x2, ξ)` of the upper half-space, `ξ > 0`.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct AmbientPoint<T> {
    pub x1: T,
    pub x2: T,
    pub xi: T,
}

impl<T: Real> AmbientPoint<T> {
    pub fn new(x1: T, x2: T, xi: T) -> Result<Self> {
        let p = Self { x1, x2, xi };
        p.check()?;
        Ok(p)
    }

    pub fn check(&self) -> Result<()> {
        if self.xi > T::zero() && self.x1.is_finite() && self.x2.is_finite() && self.xi.is_finite() {
            Ok(())
        } else {
            Err(Error::Domain(format!("height {} is not positive", self.xi)))
        }
    }

    pub fn to_vec(&self) -> Vec3<T> {
        Vec3::new(self.x1, self.x2, self.xi)
    }

    pub fn from_vec(v: Vec3<T>) -> Self {
        Self { x1: v.x, x2: v.y, xi: v.z }
    }

    /// Hyperbolic norm of a tangent vector at this point.
    pub fn norm(&self, v: &Vec3<T>) -> T {
        v.norm() / self.xi
    }

    /// Hyperbolic inner product of two tangent vectors at this point.
    pub fn inner(&self, v: &Vec3<T>, w: &Vec3<T>) -> T {
        v.dot(w) / (self.xi * self.xi)
    }
}

/// `d(p, q) = 2 asinh(|p − q| / (2√(ξ_p ξ_q)))`, equivalent to
/// `cosh d = 1 + |p − q|² / (2 ξ_p ξ_q)` but accurate for nearby points.
pub fn hyperbolic_distance<T: Real>(p: &AmbientPoint<T>, q: &AmbientPoint<T>) -> Result<T> {
    p.check()?;
    q.check()?;
    let chord = (p.to_vec() - q.to_vec()).norm();
    let two = lit::<T>(2.0);
    Ok(two * (chord / (two * (p.xi * q.xi).sqrt())).asinh())
}

/// End point and velocity of a geodesic flow.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FlowState<T> {
    pub point: AmbientPoint<T>,
    /// Unit (hyperbolic) velocity at `point`.
    pub velocity: Vec3<T>,
}

/// Follows the unit-speed geodesic leaving `p` with velocity `n` for signed
/// time `rho` and returns the end point with the transported velocity.
///
/// Geodesics are vertical lines or vertical semicircles; with `w = n/ξ₀`
/// split into horizontal part `w_h` and vertical part `b`,
/// `ξ(t) = ξ₀/(cosh t − b sinh t)` and the horizontal displacement is
/// `ξ₀ sinh t · w_h/(cosh t − b sinh t)`.
pub fn geodesic_flow<T: Real>(p: &AmbientPoint<T>, n: &Vec3<T>, rho: T) -> Result<FlowState<T>> {
    p.check()?;
    let unit = p.norm(n);
    let tol = lit::<T>(1e-9).max(T::epsilon() * lit(64.0));
    if !((unit - T::one()).abs() <= tol) {
        return Err(Error::Domain(format!("normal has hyperbolic norm {unit}, expected 1")));
    }
    let w = n.scale(T::one() / p.xi);
    let b = w.z;
    let (sh, ch) = (rho.sinh(), rho.cosh());
    let den = ch - b * sh;
    let dden = sh - b * ch;
    let xi0 = p.xi;
    let point = AmbientPoint {
        x1: p.x1 + xi0 * sh * w.x / den,
        x2: p.x2 + xi0 * sh * w.y / den,
        xi: xi0 / den,
    };
    let den2 = den * den;
    let velocity = Vec3::new(xi0 * w.x / den2, xi0 * w.y / den2, -xi0 * dden / den2);
    Ok(FlowState { point, velocity })
}

/// Point at signed distance `rho` along the geodesic through `p` with unit
/// initial velocity `n`.
pub fn normal_geodesic_flow<T: Real>(p: &AmbientPoint<T>, n: &Vec3<T>, rho: T) -> Result<AmbientPoint<T>> {
    geodesic_flow(p, n, rho).map(|s| s.point)
}

/// Levi-Civita derivative `∇_X Y` of the metric `|dx|²/ξ²` at height `xi`,
/// given the flat directional derivative `dxy = D_X Y`.
pub fn covariant_derivative<T: Real>(xi: T, x: &Vec3<T>, y: &Vec3<T>, dxy: &Vec3<T>) -> Vec3<T> {
    let corr = (x.scale(y.z) + y.scale(x.z)).scale(T::one() / xi);
    let up = Vec3::new(T::zero(), T::zero(), x.dot(y) / xi);
    *dxy - corr + up
}
