//! Liouville fields `I* = e^φ |dz|²` on lattices and rectangles, the
//! holomorphic-quadratic-differential `θ = φ_zz − ½φ_z²`, the Epstein
//! embedding realizing the data at infinity, and the Schwarzian derivative.

use std::io::{BufRead, Write};

use num_complex::Complex;

use crate::ambient::AmbientPoint;
use crate::error::{Error, Result};
use crate::grid::{axis_derivative, Derivs, DiffScheme, Grid};
use crate::infinity::InfinityData;
use crate::linalg::{Mat2, Vec3};
use crate::patch::{Orientation, SurfacePatch};
use crate::scalar::{lit, Real};

/// Half-width of the high-order stencils used on bordered patches.
pub const STENCIL_HALF_WIDTH: usize = 5;

/// Where a Liouville field lives.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum LiouvilleDomain<T> {
    /// Torus `ℂ/(ω₁ℤ + ω₂ℤ)`; node `(i, j)` is `(i/n)ω₁ + (j/m)ω₂`.
    Torus,
    /// Parallelogram `origin + sω₁ + tω₂`, `s, t ∈ [0, 1]`, with `ghost`
    /// rings excluded from integrals and residuals.
    Patch { origin: Complex<T>, ghost: usize },
}

/// A real conformal factor sampled on a lattice.
#[derive(Debug, Clone, PartialEq)]
pub struct LiouvilleField<T> {
    pub omega1: Complex<T>,
    pub omega2: Complex<T>,
    pub n: usize,
    pub m: usize,
    pub phi: Vec<T>,
    /// Derivative scheme on the torus; patches always use centered
    /// high-order stencils.
    pub scheme: DiffScheme,
    pub domain: LiouvilleDomain<T>,
}

/// `φ_z`, `φ_zz` and the real `φ_zz̄`.
#[derive(Debug, Clone)]
pub struct ComplexDerivs<T> {
    pub z: Vec<Complex<T>>,
    pub zz: Vec<Complex<T>>,
    pub zzbar: Vec<T>,
}

/// `θ` per node.
#[derive(Debug, Clone)]
pub struct HqdField<T> {
    pub theta: Vec<Complex<T>>,
}

/// Outcome of the principal-curvature sign test.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Convexity {
    Pass,
    Fail { nodes: Vec<usize> },
}

impl Convexity {
    pub fn passed(&self) -> bool {
        matches!(self, Convexity::Pass)
    }
}

impl<T: Real> LiouvilleField<T> {
    /// Samples `f` on the torus with periods `ω₁, ω₂`.
    pub fn torus(omega1: Complex<T>, omega2: Complex<T>, n: usize, m: usize, f: impl Fn(Complex<T>) -> T) -> Result<Self> {
        let mut field = Self { omega1, omega2, n, m, phi: Vec::new(), scheme: DiffScheme::Spectral, domain: LiouvilleDomain::Torus };
        field.phi = (0..n * m).map(|k| f(field.node(k))).collect();
        field.validate()?;
        Ok(field)
    }

    /// Samples `f` on a bordered parallelogram.
    pub fn patch(origin: Complex<T>, omega1: Complex<T>, omega2: Complex<T>, n: usize, m: usize, f: impl Fn(Complex<T>) -> T) -> Result<Self> {
        let domain = LiouvilleDomain::Patch { origin, ghost: STENCIL_HALF_WIDTH };
        let mut field = Self { omega1, omega2, n, m, phi: Vec::new(), scheme: DiffScheme::Central, domain };
        field.phi = (0..n * m).map(|k| f(field.node(k))).collect();
        field.validate()?;
        Ok(field)
    }

    pub fn with_scheme(mut self, scheme: DiffScheme) -> Self {
        self.scheme = scheme;
        self
    }

    pub fn with_phi(&self, phi: Vec<T>) -> Self {
        Self { phi, ..self.clone() }
    }

    pub fn validate(&self) -> Result<()> {
        if self.phi.len() != self.n * self.m {
            return Err(Error::Domain("φ sample count does not match the grid".into()));
        }
        if self.phi.iter().any(|p| !p.is_finite()) {
            return Err(Error::Domain("φ has non-finite samples".into()));
        }
        if self.orientation_value() == T::zero() {
            return Err(Error::Domain("periods are not independent over ℝ".into()));
        }
        if let LiouvilleDomain::Patch { ghost, .. } = self.domain {
            if ghost < STENCIL_HALF_WIDTH {
                return Err(Error::Domain(format!("patch ghost margin must be at least {STENCIL_HALF_WIDTH}")));
            }
        }
        self.grid().validate()
    }

    fn orientation_value(&self) -> T {
        (self.omega1.conj() * self.omega2).im
    }

    fn steps(&self) -> (T, T) {
        match self.domain {
            LiouvilleDomain::Torus => (T::one() / T::of_usize(self.n), T::one() / T::of_usize(self.m)),
            LiouvilleDomain::Patch { .. } => (T::one() / T::of_usize(self.n - 1), T::one() / T::of_usize(self.m - 1)),
        }
    }

    /// Grid in the lattice parameters `(s, t)`.
    pub fn grid(&self) -> Grid<T> {
        let (hs, ht) = self.steps();
        let scheme = if self.is_torus() { self.scheme } else { DiffScheme::Central };
        match self.domain {
            LiouvilleDomain::Torus => Grid::periodic(
                self.n,
                self.m,
                hs,
                ht,
                Vec3::new(self.omega1.re, self.omega1.im, T::zero()),
                Vec3::new(self.omega2.re, self.omega2.im, T::zero()),
            )
            .with_scheme(scheme),
            LiouvilleDomain::Patch { ghost, .. } => Grid::bordered(self.n, self.m, hs, ht, ghost),
        }
    }

    pub fn is_torus(&self) -> bool {
        self.domain == LiouvilleDomain::Torus
    }

    /// Complex coordinate of node `k`.
    pub fn node(&self, k: usize) -> Complex<T> {
        let (hs, ht) = self.steps();
        let (i, j) = (k % self.n, k / self.n);
        let base = match self.domain {
            LiouvilleDomain::Torus => Complex::new(T::zero(), T::zero()),
            LiouvilleDomain::Patch { origin, .. } => origin,
        };
        base + self.omega1 * (T::of_usize(i) * hs) + self.omega2 * (T::of_usize(j) * ht)
    }

    /// Euclidean area of one lattice cell `|Im(ω̄₁ω₂)|`.
    pub fn cell_area(&self) -> T {
        self.orientation_value().abs()
    }

    /// Partials of a real field in the lattice parameters.
    pub fn param_derivs(&self, f: &[T]) -> Result<Derivs<T>> {
        let grid = self.grid();
        if self.is_torus() {
            return grid.diff(f);
        }
        let (hs, ht) = self.steps();
        let w = STENCIL_HALF_WIDTH;
        let (n, m) = (self.n, self.m);
        let cf: Vec<Complex<T>> = f.iter().map(|&x| Complex::new(x, T::zero())).collect();
        let re = |v: Vec<Complex<T>>| v.into_iter().map(|z| z.re).collect::<Vec<T>>();
        let u = axis_derivative(&cf, n, m, true, 1, hs, w);
        let v = axis_derivative(&cf, n, m, false, 1, ht, w);
        let uv = axis_derivative(&v, n, m, true, 1, hs, w);
        Ok(Derivs {
            uu: re(axis_derivative(&cf, n, m, true, 2, hs, w)),
            vv: re(axis_derivative(&cf, n, m, false, 2, ht, w)),
            u: re(u),
            v: re(v),
            uv: re(uv),
        })
    }

    fn chain_rule(&self, d: &Derivs<T>) -> ComplexDerivs<T> {
        let (w1, w2) = (self.omega1, self.omega2);
        let den = w1 * w2.conj() - w1.conj() * w2;
        let den2 = den * den;
        let c = |x: T| Complex::new(x, T::zero());
        let two = lit::<T>(2.0);
        let re12 = (w1 * w2.conj()).re;
        let n = d.u.len();
        let mut out = ComplexDerivs { z: Vec::with_capacity(n), zz: Vec::with_capacity(n), zzbar: Vec::with_capacity(n) };
        for k in 0..n {
            out.z.push((w2.conj() * d.u[k] - w1.conj() * d.v[k]) / den);
            out.zz.push(
                (w2.conj() * w2.conj() * d.uu[k] - w1.conj() * w2.conj() * c(two * d.uv[k]) + w1.conj() * w1.conj() * d.vv[k]) / den2,
            );
            let q = c(-w2.norm_sqr() * d.uu[k] + two * re12 * d.uv[k] - w1.norm_sqr() * d.vv[k]) / den2;
            out.zzbar.push(q.re);
        }
        out
    }

    /// `φ_z = ½(φ_x − iφ_y)`, `φ_zz` and `φ_zz̄` by the chain rule from the
    /// lattice parameters.
    pub fn complex_derivatives(&self) -> Result<ComplexDerivs<T>> {
        let d = self.param_derivs(&self.phi)?;
        Ok(self.chain_rule(&d))
    }

    pub fn hqd_theta(&self) -> Result<HqdField<T>> {
        let d = self.complex_derivatives()?;
        Ok(HqdField { theta: theta_from(&d) })
    }

    /// `∂(x, y)/∂(s, t)`.
    fn jacobian(&self) -> Mat2<T> {
        Mat2::new(self.omega1.re, self.omega2.re, self.omega1.im, self.omega2.im)
    }

    /// Data at infinity: `I* = e^φ|dz|²`,
    /// `II* = ½(θdz² + θ̄dz̄²) + φ_zz̄ |dz|²`, `K* = −2e^{−φ}φ_zz̄`, all in
    /// lattice parameters.
    pub fn infinity_data(&self) -> Result<InfinityData<T>> {
        let d = self.complex_derivatives()?;
        self.infinity_from(&d)
    }

    fn infinity_from(&self, d: &ComplexDerivs<T>) -> Result<InfinityData<T>> {
        let grid = self.grid();
        let theta = theta_from(d);
        let jac = self.jacobian();
        let flat = Mat2::<T>::identity().pullback(&jac);
        let cell = grid.cell_area() * jac.det().abs();
        let two = lit::<T>(2.0);
        let mut first = Vec::with_capacity(self.phi.len());
        let mut second = Vec::with_capacity(self.phi.len());
        let mut curvature = Vec::with_capacity(self.phi.len());
        let mut da = Vec::with_capacity(self.phi.len());
        for k in 0..self.phi.len() {
            let e = self.phi[k].exp();
            let (th, q) = (theta[k], d.zzbar[k]);
            first.push(flat.scale(e));
            second.push(Mat2::sym(th.re + q, -th.im, -th.re + q).pullback(&jac));
            curvature.push(-two * q / e);
            da.push(if grid.is_interior(k) { e * cell } else { T::zero() });
        }
        InfinityData::from_starred(grid, first, second, curvature, da)
    }

    /// `k*₁,₂ = e^{−φ}(φ_zz̄ ± |θ|)`, larger first.
    pub fn principal_curvatures_at_infinity(&self) -> Result<(Vec<T>, Vec<T>)> {
        let d = self.complex_derivatives()?;
        let theta = theta_from(&d);
        Ok((0..self.phi.len())
            .map(|k| {
                let s = (-self.phi[k]).exp();
                (s * (d.zzbar[k] + theta[k].norm()), s * (d.zzbar[k] - theta[k].norm()))
            })
            .unzip())
    }

    fn interior(&self) -> impl Iterator<Item = usize> + '_ {
        let grid = self.grid();
        (0..self.phi.len()).filter(move |&k| grid.is_interior(k))
    }

    /// Passes iff every principal curvature at infinity is positive.
    pub fn convexity_test(&self) -> Result<Convexity> {
        let (_, k2) = self.principal_curvatures_at_infinity()?;
        let nodes: Vec<usize> = self.interior().filter(|&k| !(k2[k] > T::zero())).collect();
        Ok(if nodes.is_empty() { Convexity::Pass } else { Convexity::Fail { nodes } })
    }

    /// Fails if the Epstein leaf at distance `rho` is singular somewhere,
    /// i.e. `E + e^{−2ρ}B*` degenerates (`e^{2ρ} + k*₂ ≤ 0`).
    pub fn leaf_regularity(&self, rho: T) -> Result<()> {
        let (_, k2) = self.principal_curvatures_at_infinity()?;
        let s = (rho + rho).exp();
        let nodes: Vec<usize> = self.interior().filter(|&k| !(s + k2[k] > T::zero())).collect();
        if nodes.is_empty() {
            Ok(())
        } else {
            Err(Error::Regularity { nodes })
        }
    }

    /// Smallest leaf distance for which [`leaf_regularity`](Self::leaf_regularity) holds.
    pub fn regular_from(&self) -> Result<T> {
        let (_, k2) = self.principal_curvatures_at_infinity()?;
        let worst = self.interior().map(|k| k2[k]).fold(T::zero(), T::min);
        Ok(if worst < T::zero() { lit::<T>(0.5) * (-worst).ln() } else { T::neg_infinity() })
    }

    /// Epstein surface at parameter `rho`:
    /// `ξ = √2 e^{−ρ}e^{−φ/2}/(1 + ½e^{−2ρ}e^{−φ}|φ_z|²)`,
    /// `y = z + φ̄_z e^{−2ρ}e^{−φ}/(1 + ½e^{−2ρ}e^{−φ}|φ_z|²)`.
    pub fn epstein_embedding(&self, rho: T) -> Result<SurfacePatch<T>> {
        let d = self.complex_derivatives()?;
        let half = lit::<T>(0.5);
        let sqrt2 = lit::<T>(2.0).sqrt();
        let points = (0..self.phi.len())
            .map(|k| {
                let e = (-(rho + rho) - self.phi[k]).exp();
                let den = T::one() + half * e * d.z[k].norm_sqr();
                let xi = sqrt2 * (-rho - half * self.phi[k]).exp() / den;
                let y = self.node(k) + d.z[k].conj() * (e / den);
                AmbientPoint { x1: y.re, x2: y.im, xi }
            })
            .collect();
        let orientation = if self.orientation_value() > T::zero() { Orientation::Negative } else { Orientation::Positive };
        SurfacePatch::new(self.grid(), points, orientation)
    }

    /// `max |∂_z̄ θ|` over interior nodes.
    pub fn theta_antiholomorphy_residual(&self) -> Result<T> {
        let theta = self.hqd_theta()?.theta;
        let re: Vec<T> = theta.iter().map(|t| t.re).collect();
        let im: Vec<T> = theta.iter().map(|t| t.im).collect();
        let (dr, di) = (self.param_derivs(&re)?, self.param_derivs(&im)?);
        let (w1, w2) = (self.omega1, self.omega2);
        let den = w1 * w2.conj() - w1.conj() * w2;
        let interior: Vec<usize> = self.interior().collect();
        Ok(interior
            .into_iter()
            .map(|k| {
                let ds = Complex::new(dr.u[k], di.u[k]);
                let dt = Complex::new(dr.v[k], di.v[k]);
                ((w1 * dt - w2 * ds) / den).norm()
            })
            .fold(T::zero(), T::max))
    }

    /// `max |II*₀ − Re(θ dz²)|` in lattice parameters.
    pub fn traceless_matches_theta(&self) -> Result<T> {
        let inf = self.infinity_data()?;
        let theta = self.hqd_theta()?.theta;
        let jac = self.jacobian();
        Ok(self
            .interior()
            .map(|k| {
                let re_theta = Mat2::sym(theta[k].re, -theta[k].im, -theta[k].re).pullback(&jac);
                (inf.traceless[k] - re_theta).max_abs()
            })
            .fold(T::zero(), T::max))
    }

    /// Writes the field as
    /// `# liouville n=N m=M omega1=re,im omega2=re,im` followed by `M` rows of
    /// `N` comma-separated values (torus fields only).
    pub fn write_csv(&self, mut out: impl Write) -> Result<()> {
        writeln!(
            out,
            "# liouville n={} m={} omega1={},{} omega2={},{}",
            self.n, self.m, self.omega1.re, self.omega1.im, self.omega2.re, self.omega2.im
        )?;
        for row in self.phi.chunks(self.n) {
            let line: Vec<String> = row.iter().map(|v| format!("{:e}", v.to_f64_lossy())).collect();
            writeln!(out, "{}", line.join(","))?;
        }
        Ok(())
    }

    /// Reads a torus field written by [`write_csv`](Self::write_csv).
    pub fn read_csv(input: impl BufRead) -> Result<Self> {
        let mut lines = input.lines();
        let header = lines.next().ok_or_else(|| Error::Parse("empty Liouville file".into()))??;
        let body = header
            .trim()
            .strip_prefix('#')
            .map(str::trim)
            .and_then(|h| h.strip_prefix("liouville"))
            .ok_or_else(|| Error::Parse(format!("bad Liouville header: {header}")))?;
        let (mut n, mut m, mut w1, mut w2) = (None, None, None, None);
        for tok in body.split_whitespace() {
            let (key, val) = tok.split_once('=').ok_or_else(|| Error::Parse(format!("bad header token {tok}")))?;
            match key {
                "n" => n = Some(parse_usize(val)?),
                "m" => m = Some(parse_usize(val)?),
                "omega1" => w1 = Some(parse_complex(val)?),
                "omega2" => w2 = Some(parse_complex(val)?),
                _ => return Err(Error::Parse(format!("unknown header key {key}"))),
            }
        }
        let missing = |k: &str| Error::Parse(format!("header is missing {k}"));
        let (n, m) = (n.ok_or_else(|| missing("n"))?, m.ok_or_else(|| missing("m"))?);
        let (w1, w2) = (w1.ok_or_else(|| missing("omega1"))?, w2.ok_or_else(|| missing("omega2"))?);
        let rest: String = lines.collect::<std::io::Result<Vec<_>>>()?.join("\n");
        let mut reader = csv::ReaderBuilder::new().has_headers(false).from_reader(rest.as_bytes());
        let mut phi = Vec::with_capacity(n * m);
        for rec in reader.records() {
            let rec = rec?;
            if rec.len() != n {
                return Err(Error::Parse(format!("row with {} values, expected {n}", rec.len())));
            }
            for v in rec.iter() {
                let x: f64 = v.trim().parse().map_err(|_| Error::Parse(format!("bad value {v}")))?;
                phi.push(lit(x));
            }
        }
        if phi.len() != n * m {
            return Err(Error::Parse(format!("{} values, expected {}", phi.len(), n * m)));
        }
        let field = Self { omega1: w1, omega2: w2, n, m, phi, scheme: DiffScheme::Spectral, domain: LiouvilleDomain::Torus };
        field.validate()?;
        Ok(field)
    }
}

fn theta_from<T: Real>(d: &ComplexDerivs<T>) -> Vec<Complex<T>> {
    let half = lit::<T>(0.5);
    d.zz.iter().zip(&d.z).map(|(zz, z)| *zz - *z * *z * half).collect()
}

fn parse_usize(s: &str) -> Result<usize> {
    s.parse().map_err(|_| Error::Parse(format!("bad integer {s}")))
}

fn parse_complex<T: Real>(s: &str) -> Result<Complex<T>> {
    let (re, im) = s.split_once(',').ok_or_else(|| Error::Parse(format!("bad complex {s}")))?;
    let p = |x: &str| x.parse::<f64>().map(lit::<T>).map_err(|_| Error::Parse(format!("bad number {x}")));
    Ok(Complex::new(p(re)?, p(im)?))
}

/// Square grid `origin + h(i + i·j)` of complex sample points.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ComplexPatch<T> {
    pub origin: Complex<T>,
    pub h: T,
    pub n: usize,
    pub m: usize,
}

impl<T: Real> ComplexPatch<T> {
    pub fn node(&self, k: usize) -> Complex<T> {
        self.origin + Complex::new(T::of_usize(k % self.n) * self.h, T::of_usize(k / self.n) * self.h)
    }

    pub fn sample(&self, f: impl Fn(Complex<T>) -> Complex<T>) -> Vec<Complex<T>> {
        (0..self.n * self.m).map(|k| f(self.node(k))).collect()
    }

    /// Nodes at least a stencil half-width away from the left/right edges.
    pub fn is_interior(&self, k: usize) -> bool {
        let i = k % self.n;
        i >= STENCIL_HALF_WIDTH && i + STENCIL_HALF_WIDTH < self.n
    }
}

/// `S(f) = f'''/f' − (3/2)(f''/f')²` of holomorphic samples, using
/// derivatives along the real direction. Nodes within a stencil half-width
/// of the left/right edges are set to zero.
pub fn schwarzian<T: Real>(values: &[Complex<T>], patch: &ComplexPatch<T>) -> Result<Vec<Complex<T>>> {
    if values.len() != patch.n * patch.m {
        return Err(Error::Domain("sample count does not match the patch".into()));
    }
    if patch.n < 2 * STENCIL_HALF_WIDTH + 1 {
        return Err(Error::Domain("patch too narrow for the derivative stencil".into()));
    }
    let d = |order| axis_derivative(values, patch.n, patch.m, true, order, patch.h, STENCIL_HALF_WIDTH);
    let (d1, d2, d3) = (d(1), d(2), d(3));
    let scale = values.iter().map(|v| v.norm()).fold(T::zero(), T::max);
    let floor = T::epsilon().sqrt() * (T::one() + scale);
    let mut out = vec![Complex::new(T::zero(), T::zero()); values.len()];
    for k in 0..values.len() {
        if !patch.is_interior(k) {
            continue;
        }
        if d1[k].norm() <= floor {
            return Err(Error::Domain(format!("f' vanishes at node {k}")));
        }
        let r = d2[k] / d1[k];
        out[k] = d3[k] / d1[k] - r * r * lit::<T>(1.5);
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::TAU;

    fn c(re: f64, im: f64) -> Complex<f64> {
        Complex::new(re, im)
    }

    fn square(n: usize, f: impl Fn(Complex<f64>) -> f64) -> LiouvilleField<f64> {
        LiouvilleField::torus(c(1.0, 0.0), c(0.0, 1.0), n, n, f).unwrap()
    }

    #[test]
    fn constant_field_is_flat() {
        let f = square(16, |_| 0.7);
        let d = f.complex_derivatives().unwrap();
        assert!(d.z.iter().all(|z| z.norm() < 1e-14) && d.zzbar.iter().all(|q| q.abs() < 1e-12));
        assert!(f.hqd_theta().unwrap().theta.iter().all(|t| t.norm() < 1e-12));
        let (k1, k2) = f.principal_curvatures_at_infinity().unwrap();
        assert!(k1.iter().chain(&k2).all(|k| k.abs() < 1e-12));
        assert!(!f.convexity_test().unwrap().passed());
    }

    #[test]
    fn cosine_derivative_spectral() {
        let l = 2.0;
        let f = LiouvilleField::torus(c(l, 0.0), c(0.0, l), 32, 32, |z| (TAU * z.re / l).cos()).unwrap();
        let d = f.complex_derivatives().unwrap();
        for k in 0..f.phi.len() {
            let x = f.node(k).re;
            let expected = -(std::f64::consts::PI / l) * (TAU * x / l).sin();
            assert!((d.z[k] - c(expected, 0.0)).norm() < 1e-10);
        }
    }

    #[test]
    fn skew_lattice_chain_rule() {
        // φ = cos(2π Re(z·a)) is periodic when the lattice pairs integrally with a.
        let (w1, w2) = (c(1.0, 0.0), c(0.4, 1.1));
        let f = LiouvilleField::torus(w1, w2, 32, 32, |z| 0.1 * (TAU * (z.re - z.im * 0.4 / 1.1)).cos()).unwrap();
        let d = f.complex_derivatives().unwrap();
        for k in [0usize, 37, 300] {
            let z = f.node(k);
            let arg = TAU * (z.re - z.im * 0.4 / 1.1);
            let (gx, gy) = (-0.1 * TAU * arg.sin(), 0.1 * TAU * 0.4 / 1.1 * arg.sin());
            assert!((d.z[k] - c(0.5 * gx, -0.5 * gy)).norm() < 1e-10);
            let lap = -0.1 * TAU * TAU * (1.0 + (0.4f64 / 1.1).powi(2)) * arg.cos();
            assert!((d.zzbar[k] - 0.25 * lap).abs() < 1e-9);
        }
    }

    #[test]
    fn fuchsian_patch() {
        let f = LiouvilleField::patch(c(-0.5, 1.0), c(1.0, 0.0), c(0.0, 1.0), 61, 61, |z| -2.0 * z.im.ln()).unwrap();
        let theta = f.hqd_theta().unwrap().theta;
        let grid = f.grid();
        let (k1, k2) = f.principal_curvatures_at_infinity().unwrap();
        for k in grid.interior_nodes() {
            assert!(theta[k].norm() < 1e-8, "{}", theta[k]);
            assert!((k1[k] - 0.5).abs() < 1e-8 && (k2[k] - 0.5).abs() < 1e-8);
        }
        assert!(f.convexity_test().unwrap().passed());
        let inf = f.infinity_data().unwrap();
        for k in grid.interior_nodes() {
            assert!((inf.shape[k] - Mat2::identity().scale(0.5)).max_abs() < 1e-8);
        }
    }

    #[test]
    fn polynomial_patch_theta() {
        // φ = Re(z²) = x² − y²: φ_z = z, φ_zz = 1, θ = 1 − z²/2.
        let f = LiouvilleField::patch(c(0.1, 0.2), c(0.8, 0.0), c(0.0, 0.8), 41, 41, |z| (z * z).re).unwrap();
        let theta = f.hqd_theta().unwrap().theta;
        for k in f.grid().interior_nodes() {
            let z = f.node(k);
            assert!((theta[k] - (c(1.0, 0.0) - z * z * 0.5)).norm() < 1e-9);
        }
    }

    #[test]
    fn random_field_identities() {
        let f = square(32, |z| 0.1 * (TAU * z.re).cos() + 0.05 * (TAU * (z.re + 2.0 * z.im)).sin());
        let inf = f.infinity_data().unwrap();
        let (k1, k2) = f.principal_curvatures_at_infinity().unwrap();
        for k in 0..f.phi.len() {
            assert!((k1[k] + k2[k] + inf.curvature[k]).abs() < 1e-10);
            assert!((inf.mean[k] + inf.curvature[k]).abs() < 1e-10);
        }
        assert!(f.traceless_matches_theta().unwrap() < 1e-12);
        assert!(inf.traceless_residual() < 1e-12);
    }

    #[test]
    fn constant_field_epstein_is_horotorus() {
        let (cst, rho) = (0.3, 0.8);
        let f = square(16, |_| cst);
        let eps = f.epstein_embedding(rho).unwrap();
        let xi = 2f64.sqrt() * (-rho - cst / 2.0).exp();
        for (k, p) in eps.points.iter().enumerate() {
            assert!((p.xi - xi).abs() < 1e-14);
            assert!((c(p.x1, p.x2) - f.node(k)).norm() < 1e-14);
        }
        let forms = eps.compute_forms().unwrap();
        let expected = 0.5 * (2.0 * rho).exp() * cst.exp();
        assert!((forms.first[3] - Mat2::identity().scale(expected)).max_abs() < 1e-10);
        // Orientation: the normal points toward the boundary, so B = E.
        assert!((forms.shape[3] - Mat2::identity()).max_abs() < 1e-10);
    }

    #[test]
    fn theta_holomorphic_for_fuchsian() {
        let f = LiouvilleField::patch(c(-0.5, 1.0), c(1.0, 0.0), c(0.0, 1.0), 41, 41, |z| -2.0 * z.im.ln()).unwrap();
        assert!(f.theta_antiholomorphy_residual().unwrap() < 1e-6);
    }

    #[test]
    fn csv_round_trip() {
        let f = LiouvilleField::torus(c(1.0, 0.0), c(0.3, 0.9), 8, 10, |z| z.re.sin()).unwrap();
        let mut buf = Vec::new();
        f.write_csv(&mut buf).unwrap();
        let g = LiouvilleField::<f64>::read_csv(buf.as_slice()).unwrap();
        assert_eq!((g.n, g.m), (8, 10));
        assert!((g.omega2 - f.omega2).norm() < 1e-15);
        assert!(f.phi.iter().zip(&g.phi).all(|(a, b)| (a - b).abs() < 1e-15));
        assert!(LiouvilleField::<f64>::read_csv("# liouville n=2\n1,2\n".as_bytes()).is_err());
    }

    #[test]
    fn schwarzian_examples() {
        let patch = ComplexPatch { origin: c(0.2, 0.3), h: 0.01, n: 41, m: 5 };
        let mobius = patch.sample(|z| (z * 2.0 + c(1.0, 0.5)) / (z * c(0.3, -0.2) + c(1.5, 0.0)));
        let exp = patch.sample(|z| z.exp());
        let sq = patch.sample(|z| z * z);
        let (sm, se, ss) = (schwarzian(&mobius, &patch).unwrap(), schwarzian(&exp, &patch).unwrap(), schwarzian(&sq, &patch).unwrap());
        for k in (0..patch.n * patch.m).filter(|&k| patch.is_interior(k)) {
            assert!(sm[k].norm() < 1e-8, "{}", sm[k]);
            assert!((se[k] + c(0.5, 0.0)).norm() < 1e-8);
            let z = patch.node(k);
            assert!((ss[k] + c(1.5, 0.0) / (z * z)).norm() < 1e-7);
        }
        let flat = patch.sample(|_| c(1.0, 0.0));
        assert!(schwarzian(&flat, &patch).is_err());
    }

    #[test]
    fn epstein_route_reproduces_data_at_infinity() {
        let phi = |z: Complex<f64>| 0.1 * (TAU * z.re).cos() + 0.05 * (TAU * (z.re + z.im / 1.3)).sin();
        let f = LiouvilleField::torus(c(1.0, 0.0), c(0.0, 1.3), 48, 48, phi).unwrap();
        let inf = f.infinity_data().unwrap();
        let rho = 2.0;
        let forms = f.epstein_embedding(rho).unwrap().compute_forms().unwrap();
        let predicted = crate::infinity::metric_from_infinity_at_rho(&inf, rho);
        let kstar = crate::infinity::curvature_at_infinity(&forms).unwrap();
        let s = (2.0 * rho).exp();
        for k in 0..f.phi.len() {
            assert!((forms.first[k] - predicted[k]).max_abs() < 1e-8 * s);
            assert!((kstar[k] * s - inf.curvature[k]).abs() < 1e-8);
        }
    }

    #[test]
    fn fuchsian_epstein_leaves_are_equidistant_planes() {
        let f = LiouvilleField::patch(c(-0.5, 1.0), c(1.0, 0.0), c(0.0, 1.0), 41, 41, |z| -2.0 * z.im.ln()).unwrap();
        let inf = f.infinity_data().unwrap();
        for rho in [0.5, 1.0, 2.0] {
            let patch = f.epstein_embedding(rho).unwrap();
            let forms = patch.compute_forms().unwrap();
            let predicted = crate::infinity::metric_from_infinity_at_rho(&inf, rho);
            // Points lie on a Euclidean plane through the real axis: ξ/Im y is constant.
            let slope = patch.points[0].xi / patch.points[0].x2;
            for k in forms.grid.interior_nodes() {
                assert!((forms.first[k] - predicted[k]).max_abs() < 1e-9);
                assert!((patch.points[k].xi / patch.points[k].x2 - slope).abs() < 1e-12);
            }
        }
    }
}
