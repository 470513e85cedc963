//! Sampled parametric surfaces in H³ and their fundamental forms.

use std::io::Write;

use rand::Rng;
use rayon::prelude::*;

use crate::ambient::{geodesic_flow, AmbientPoint};
use crate::error::{Error, Result};
use crate::grid::{codazzi_norms, interior_max, intrinsic_curvature, DiffScheme, Grid, Topology};
use crate::linalg::{Mat2, Vec3};
use crate::scalar::{lit, Real};

/// Sign applied to `x_u × x_v` to obtain the stored normal side. The normal
/// always points toward the conformal boundary of the region of interest.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Orientation {
    Positive,
    Negative,
}

impl Orientation {
    pub fn sign<T: Real>(self) -> T {
        match self {
            Orientation::Positive => T::one(),
            Orientation::Negative => -T::one(),
        }
    }
}

/// A surface sampled on a node grid.
#[derive(Debug, Clone)]
pub struct SurfacePatch<T> {
    pub grid: Grid<T>,
    pub points: Vec<AmbientPoint<T>>,
    pub orientation: Orientation,
    /// Exact unit normals, when known; used by the normal flow.
    pub normals: Option<Vec<Vec3<T>>>,
    /// Exact fundamental forms, when known; required on closed grids.
    pub exact: Option<Box<FormField<T>>>,
}

/// First and second partials of the embedding at every node.
#[derive(Debug, Clone)]
pub struct EmbeddingDerivs<T> {
    pub xu: Vec<Vec3<T>>,
    pub xv: Vec<Vec3<T>>,
    pub xuu: Vec<Vec3<T>>,
    pub xuv: Vec<Vec3<T>>,
    pub xvv: Vec<Vec3<T>>,
}

impl<T: Real> SurfacePatch<T> {
    pub fn new(grid: Grid<T>, points: Vec<AmbientPoint<T>>, orientation: Orientation) -> Result<Self> {
        grid.validate()?;
        if points.len() != grid.len() {
            return Err(Error::Domain(format!("{} points for a grid of {} nodes", points.len(), grid.len())));
        }
        for p in &points {
            p.check()?;
        }
        Ok(Self { grid, points, orientation, normals: None, exact: None })
    }

    /// Builds a patch over the unit square cell `[0,1)²` whose seams are the
    /// horizontal translations `(1,0)` and `(0,1)`. `f(u, v)` must satisfy
    /// `f(u+1, v) = f(u, v) + (1, 0, 0)` and likewise in `v`.
    pub fn unit_cell(n: usize, scheme: DiffScheme, orientation: Orientation, f: impl Fn(T, T) -> Vec3<T> + Sync) -> Result<Self> {
        let h = T::one() / T::of_usize(n);
        let grid = Grid::periodic(n, n, h, h, Vec3::new(T::one(), T::zero(), T::zero()), Vec3::new(T::zero(), T::one(), T::zero()))
            .with_scheme(scheme);
        let points = (0..grid.len())
            .into_par_iter()
            .map(|k| {
                let (i, j) = grid.coords(k);
                AmbientPoint::from_vec(f(T::of_usize(i) * h, T::of_usize(j) * h))
            })
            .collect();
        Self::new(grid, points, orientation)
    }

    pub fn with_normals(mut self, normals: Vec<Vec3<T>>) -> Self {
        self.normals = Some(normals);
        self
    }

    pub fn with_exact(mut self, forms: FormField<T>) -> Self {
        self.exact = Some(Box::new(forms));
        self
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    /// Euclidean area of the horizontal period parallelogram (periodic only).
    pub fn cell_area(&self) -> Option<T> {
        match &self.grid.topology {
            Topology::Periodic { shift_u, shift_v } => Some((shift_u.x * shift_v.y - shift_u.y * shift_v.x).abs()),
            _ => None,
        }
    }

    /// Partial derivatives of the embedding. On periodic grids the linear
    /// seam offset is removed before differencing and added back.
    pub fn embedding_derivs(&self) -> Result<EmbeddingDerivs<T>> {
        let g = &self.grid;
        let (lift_u, lift_v) = match &g.topology {
            Topology::Periodic { shift_u, shift_v } => (
                shift_u.scale(T::one() / (T::of_usize(g.n) * g.hu)),
                shift_v.scale(T::one() / (T::of_usize(g.m) * g.hv)),
            ),
            _ => (Vec3::zero(), Vec3::zero()),
        };
        let comps: Vec<_> = (0..3)
            .into_par_iter()
            .map(|c| {
                let field: Vec<T> = (0..g.len())
                    .map(|k| {
                        let (i, j) = g.coords(k);
                        let lin = lift_u.scale(T::of_usize(i) * g.hu) + lift_v.scale(T::of_usize(j) * g.hv);
                        self.points[k].to_vec().component(c) - lin.component(c)
                    })
                    .collect();
                g.diff(&field)
            })
            .collect::<Result<Vec<_>>>()?;
        let vec = |sel: fn(&crate::grid::Derivs<T>) -> &Vec<T>, add: Vec3<T>| -> Vec<Vec3<T>> {
            (0..g.len())
                .map(|k| Vec3::new(sel(&comps[0])[k], sel(&comps[1])[k], sel(&comps[2])[k]) + add)
                .collect()
        };
        Ok(EmbeddingDerivs {
            xu: vec(|d| &d.u, lift_u),
            xv: vec(|d| &d.v, lift_v),
            xuu: vec(|d| &d.uu, Vec3::zero()),
            xuv: vec(|d| &d.uv, Vec3::zero()),
            xvv: vec(|d| &d.vv, Vec3::zero()),
        })
    }

    /// Unit normals `σ ξ (x_u × x_v)/|x_u × x_v|` from the discrete tangents.
    pub fn discrete_normals(&self) -> Result<Vec<Vec3<T>>> {
        let d = self.embedding_derivs()?;
        let sigma: T = self.orientation.sign();
        Ok((0..self.len())
            .map(|k| {
                let c = d.xu[k].cross(&d.xv[k]);
                c.scale(sigma * self.points[k].xi / c.norm())
            })
            .collect())
    }

    /// Fundamental forms from differences of the embedding.
    pub fn compute_forms(&self) -> Result<FormField<T>> {
        if self.grid.topology == Topology::Closed {
            return self
                .exact
                .as_deref()
                .cloned()
                .ok_or_else(|| Error::Unsupported("closed patch without exact forms".into()));
        }
        let d = self.embedding_derivs()?;
        let sigma: T = self.orientation.sign();
        let pairs = (0..self.len())
            .into_par_iter()
            .map(|k| {
                let xi = self.points[k].xi;
                let (xu, xv) = (d.xu[k], d.xv[k]);
                let inv_xi2 = T::one() / (xi * xi);
                let first = Mat2::sym(xu.dot(&xu), xu.dot(&xv), xv.dot(&xv)).scale(inv_xi2);
                if !first.is_positive_definite() {
                    return Err(Error::Discretization { node: k, detail: format!("I = {first:?}") });
                }
                let c = xu.cross(&xv);
                let nu = c.scale(sigma * xi / c.norm());
                let term = |xab: &Vec3<T>, xa: &Vec3<T>, xb: &Vec3<T>| -(nu.dot(xab) + xa.dot(xb) * nu.z / xi) * inv_xi2;
                let second = Mat2::sym(term(&d.xuu[k], &xu, &xu), term(&d.xuv[k], &xu, &xv), term(&d.xvv[k], &xv, &xv));
                Ok((first, second))
            })
            .collect::<Result<Vec<_>>>()?;
        let (first, second) = pairs.into_iter().unzip();
        FormField::from_forms(self.grid.clone(), first, second)
    }

    /// Wavefront OBJ with vertices in half-space coordinates and one quad per
    /// grid cell (seams are not closed).
    pub fn write_obj(&self, mut out: impl Write) -> Result<()> {
        for p in &self.points {
            writeln!(out, "v {} {} {}", p.x1, p.x2, p.xi)?;
        }
        let g = &self.grid;
        for j in 0..g.m - 1 {
            for i in 0..g.n - 1 {
                let k = g.idx(i, j) + 1;
                let (k2, k3, k4) = (g.idx(i + 1, j) + 1, g.idx(i + 1, j + 1) + 1, g.idx(i, j + 1) + 1);
                writeln!(out, "f {k} {k2} {k3} {k4}")?;
            }
        }
        Ok(())
    }
}

/// Integrals `∫da`, `∫H da`, `∫K_e da` and `∫K da`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Moments<T> {
    pub area: T,
    pub mean: T,
    pub extrinsic: T,
    pub gauss: T,
}

/// Per-node fundamental forms and curvatures of a surface.
#[derive(Debug, Clone)]
pub struct FormField<T> {
    pub grid: Grid<T>,
    pub first: Vec<Mat2<T>>,
    pub second: Vec<Mat2<T>>,
    pub third: Vec<Mat2<T>>,
    pub shape: Vec<Mat2<T>>,
    pub mean: Vec<T>,
    pub extrinsic: Vec<T>,
    pub gauss: Vec<T>,
    /// Quadrature weight `√det I · h_u h_v`; zero on ghost nodes.
    pub da: Vec<T>,
}

impl<T: Real> FormField<T> {
    pub fn from_forms(grid: Grid<T>, first: Vec<Mat2<T>>, second: Vec<Mat2<T>>) -> Result<Self> {
        let shape = first
            .iter()
            .zip(&second)
            .enumerate()
            .map(|(k, (i, ii))| {
                i.solve(ii).filter(|_| i.is_positive_definite()).ok_or_else(|| Error::Discretization {
                    node: k,
                    detail: format!("I = {i:?} is not positive definite"),
                })
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(Self::assemble(grid, first, second, shape))
    }

    /// Builds the forms from `I` and the shape operator, `II = I B`.
    pub fn from_operator(grid: Grid<T>, first: Vec<Mat2<T>>, shape: Vec<Mat2<T>>) -> Result<Self> {
        if let Some(k) = first.iter().position(|i| !i.is_positive_definite()) {
            return Err(Error::Discretization { node: k, detail: format!("I = {:?} is not positive definite", first[k]) });
        }
        let second = first.iter().zip(&shape).map(|(i, b)| (*i * *b).symmetrized()).collect();
        Ok(Self::assemble(grid, first, second, shape))
    }

    fn assemble(grid: Grid<T>, first: Vec<Mat2<T>>, second: Vec<Mat2<T>>, shape: Vec<Mat2<T>>) -> Self {
        let third = second.iter().zip(&shape).map(|(ii, b)| (*ii * *b).symmetrized()).collect();
        let mean = shape.iter().map(|b| b.trace()).collect();
        let extrinsic: Vec<T> = shape.iter().map(|b| b.det()).collect();
        let gauss = extrinsic.iter().map(|&ke| ke - T::one()).collect();
        let cell = grid.cell_area();
        let da = first
            .iter()
            .enumerate()
            .map(|(k, i)| if grid.is_interior(k) { i.det().sqrt() * cell } else { T::zero() })
            .collect();
        Self { grid, first, second, third, shape, mean, extrinsic, gauss, da }
    }

    pub fn len(&self) -> usize {
        self.first.len()
    }

    pub fn is_empty(&self) -> bool {
        self.first.is_empty()
    }

    /// `Σ f(k) da_k`.
    pub fn integrate(&self, f: impl Fn(usize) -> T) -> T {
        self.da.iter().enumerate().map(|(k, &w)| if w == T::zero() { T::zero() } else { f(k) * w }).sum()
    }

    pub fn moments(&self) -> Moments<T> {
        Moments {
            area: self.integrate(|_| T::one()),
            mean: self.integrate(|k| self.mean[k]),
            extrinsic: self.integrate(|k| self.extrinsic[k]),
            gauss: self.integrate(|k| self.gauss[k]),
        }
    }

    /// `(1/2π) ∫K da`.
    pub fn euler_characteristic(&self) -> T {
        self.moments().gauss / (T::PI() + T::PI())
    }

    /// Genus from the rounded discrete Gauss–Bonnet integral.
    pub fn genus(&self) -> i64 {
        let chi = self.euler_characteristic().to_f64_lossy();
        (1.0 - chi / 2.0).round() as i64
    }

    /// `max ‖I B − Bᵀ I‖` over nodes.
    pub fn self_adjointness_residual(&self) -> T {
        self.first
            .iter()
            .zip(&self.shape)
            .map(|(i, b)| (*i * *b - b.transpose() * *i).max_abs())
            .fold(T::zero(), T::max)
    }
}

/// `max |det B − (K_int + 1)|` with `K_int` from the metric alone.
pub fn gauss_residual<T: Real>(forms: &FormField<T>) -> Result<T> {
    let k_int = intrinsic_curvature(&forms.grid, &forms.first)?;
    let diff: Vec<T> = (0..forms.len()).map(|k| forms.extrinsic[k] - (k_int[k] + T::one())).collect();
    Ok(interior_max(&forms.grid, &diff))
}

/// Maximum norm of `d^∇B(∂_u, ∂_v)` for the Levi-Civita connection of I.
pub fn codazzi_residual<T: Real>(forms: &FormField<T>) -> Result<T> {
    let r = codazzi_norms(&forms.grid, &forms.first, &forms.shape, None)?;
    Ok(interior_max(&forms.grid, &r))
}

/// Closed-form test surfaces.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum AnalyticKind<T> {
    /// Sphere of radius `r` about `(0, 0, 1)`, outward normal.
    GeodesicSphere(T),
    /// Surface at distance `ρ` from the vertical plane `x2 = 0`.
    PlaneEquidistant(T),
    /// Horosphere `ξ = c` over the unit cell, normal toward `ξ = 0`.
    Horosphere(T),
}

pub fn sphere_area<T: Real>(r: T) -> T {
    lit::<T>(4.0) * T::PI() * r.sinh().powi(2)
}

pub fn ball_volume<T: Real>(r: T) -> T {
    T::PI() * ((r + r).sinh() - r - r)
}

/// Exact patch and forms for an analytic family on an `n × m` grid.
///
/// The sphere uses a closed grid in `(φ, z = cos θ)` with midpoint nodes; its
/// area element is constant in these coordinates so node sums integrate
/// exactly. The plane-equidistant surface is a bordered patch in
/// `(x1, ln ξ₀)` coordinates of the base plane.
pub fn analytic_family<T: Real>(kind: AnalyticKind<T>, n: usize, m: usize) -> Result<(SurfacePatch<T>, FormField<T>)> {
    match kind {
        AnalyticKind::GeodesicSphere(r) => geodesic_sphere(r, n, m),
        AnalyticKind::PlaneEquidistant(rho) => plane_equidistant(rho, n, m),
        AnalyticKind::Horosphere(c) => horosphere(c, n),
    }
}

fn geodesic_sphere<T: Real>(r: T, n: usize, m: usize) -> Result<(SurfacePatch<T>, FormField<T>)> {
    if !(r > T::zero()) {
        return Err(Error::Domain(format!("sphere radius {r} must be positive")));
    }
    let two_pi = T::PI() + T::PI();
    let two = lit::<T>(2.0);
    let grid = Grid::closed(n, m, two_pi / T::of_usize(n), two / T::of_usize(m));
    grid.validate()?;
    let center = AmbientPoint::new(T::zero(), T::zero(), T::one())?;
    let half = lit::<T>(0.5);
    let sh2 = r.sinh().powi(2);
    let coth = T::one() / r.tanh();
    let mut points = Vec::with_capacity(grid.len());
    let mut normals = Vec::with_capacity(grid.len());
    let mut first = Vec::with_capacity(grid.len());
    for k in 0..grid.len() {
        let (i, j) = grid.coords(k);
        let phi = (T::of_usize(i) + half) * grid.hu;
        let z = -T::one() + (T::of_usize(j) + half) * grid.hv;
        let s = (T::one() - z * z).sqrt();
        let dir = Vec3::new(s * phi.cos(), s * phi.sin(), z);
        let st = geodesic_flow(&center, &dir, r)?;
        points.push(st.point);
        normals.push(st.velocity);
        first.push(Mat2::diag(sh2 * s * s, sh2 / (s * s)));
    }
    let shape = vec![Mat2::identity().scale(coth); grid.len()];
    let forms = FormField::from_operator(grid.clone(), first, shape)?;
    let patch = SurfacePatch { grid, points, orientation: Orientation::Positive, normals: Some(normals), exact: None }
        .with_exact(forms.clone());
    Ok((patch, forms))
}

fn plane_equidistant<T: Real>(rho: T, n: usize, m: usize) -> Result<(SurfacePatch<T>, FormField<T>)> {
    let two = lit::<T>(2.0);
    let grid = Grid::bordered(n, m, two / T::of_usize(n - 1), two / T::of_usize(m - 1), 2);
    grid.validate()?;
    let mut points = Vec::with_capacity(grid.len());
    let mut normals = Vec::with_capacity(grid.len());
    let mut first = Vec::with_capacity(grid.len());
    let ch2 = rho.cosh().powi(2);
    for k in 0..grid.len() {
        let (i, j) = grid.coords(k);
        let u = -T::one() + T::of_usize(i) * grid.hu;
        let v = -T::one() + T::of_usize(j) * grid.hv;
        let base = AmbientPoint::new(u, T::zero(), v.exp())?;
        let st = geodesic_flow(&base, &Vec3::new(T::zero(), base.xi, T::zero()), rho)?;
        points.push(st.point);
        normals.push(st.velocity);
        first.push(Mat2::diag(ch2 * (-(v + v)).exp(), ch2));
    }
    let shape = vec![Mat2::identity().scale(rho.tanh()); grid.len()];
    let forms = FormField::from_operator(grid.clone(), first, shape)?;
    let patch = SurfacePatch::new(grid, points, Orientation::Negative)?.with_normals(normals).with_exact(forms.clone());
    Ok((patch, forms))
}

fn horosphere<T: Real>(c: T, n: usize) -> Result<(SurfacePatch<T>, FormField<T>)> {
    if !(c > T::zero()) {
        return Err(Error::Domain(format!("horosphere height {c} must be positive")));
    }
    let patch = SurfacePatch::unit_cell(n, DiffScheme::Central, Orientation::Negative, |u, v| Vec3::new(u, v, c))?;
    let inv = T::one() / (c * c);
    let first = vec![Mat2::identity().scale(inv); patch.len()];
    let forms = FormField::from_operator(patch.grid.clone(), first, vec![Mat2::identity(); patch.len()])?;
    let normals = vec![Vec3::new(T::zero(), T::zero(), -c); patch.len()];
    Ok((patch.with_normals(normals).with_exact(forms.clone()), forms))
}

/// Bordered piece of the sphere of radius `r` about `(0, 0, 1)` in `(φ, z)`
/// coordinates, away from the poles, for finite-difference checks.
pub fn sphere_band<T: Real>(r: T, n: usize, scheme_ghost: usize) -> Result<SurfacePatch<T>> {
    let span_phi = T::PI();
    let span_z = lit::<T>(1.4);
    let grid = Grid::bordered(n, n, span_phi / T::of_usize(n - 1), span_z / T::of_usize(n - 1), scheme_ghost);
    grid.validate()?;
    let center = AmbientPoint::new(T::zero(), T::zero(), T::one())?;
    let points = (0..grid.len())
        .map(|k| {
            let (i, j) = grid.coords(k);
            let phi = T::of_usize(i) * grid.hu;
            let z = -lit::<T>(0.7) + T::of_usize(j) * grid.hv;
            let s = (T::one() - z * z).sqrt();
            geodesic_flow(&center, &Vec3::new(s * phi.cos(), s * phi.sin(), z), r).map(|st| st.point)
        })
        .collect::<Result<Vec<_>>>()?;
    SurfacePatch::new(grid, points, Orientation::Positive)
}

/// One term `a cos 2π(k·x) + b sin 2π(k·x)` of a trigonometric series.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TrigTerm<T> {
    pub kx: i32,
    pub ky: i32,
    pub cos: T,
    pub sin: T,
}

/// A real trigonometric polynomial on the unit torus.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct TrigSeries<T> {
    pub terms: Vec<TrigTerm<T>>,
}

impl<T: Real> TrigSeries<T> {
    pub fn single(kx: i32, ky: i32, cos: T, sin: T) -> Self {
        Self { terms: vec![TrigTerm { kx, ky, cos, sin }] }
    }

    /// Random series with frequencies `|k| ≤ max_k` and coefficient size `amp`
    /// damped like `1/(1+|k|²)`.
    pub fn random(rng: &mut impl Rng, max_k: i32, amp: f64) -> Self {
        let mut terms = Vec::new();
        for kx in 0..=max_k {
            for ky in -max_k..=max_k {
                if (kx == 0 && ky <= 0) || kx * kx + ky * ky > max_k * max_k {
                    continue;
                }
                let damp = amp / (1.0 + (kx * kx + ky * ky) as f64);
                terms.push(TrigTerm {
                    kx,
                    ky,
                    cos: lit(rng.gen_range(-1.0..1.0) * damp),
                    sin: lit(rng.gen_range(-1.0..1.0) * damp),
                });
            }
        }
        Self { terms }
    }

    pub fn eval(&self, x: T, y: T) -> T {
        let two_pi = T::PI() + T::PI();
        self.terms
            .iter()
            .map(|t| {
                let arg = two_pi * (T::lit(t.kx as f64) * x + T::lit(t.ky as f64) * y);
                t.cos * arg.cos() + t.sin * arg.sin()
            })
            .sum()
    }

    pub fn scaled(&self, s: T) -> Self {
        Self { terms: self.terms.iter().map(|t| TrigTerm { cos: t.cos * s, sin: t.sin * s, ..*t }).collect() }
    }

    pub fn plus(&self, other: &Self) -> Self {
        Self { terms: self.terms.iter().chain(&other.terms).copied().collect() }
    }
}

/// Periodic graph `ξ = c·exp(h(x, y))` over the unit cell; its stored normal
/// points down, toward the conformal boundary.
#[derive(Debug, Clone, PartialEq)]
pub struct GraphSurface<T> {
    pub height: T,
    pub relief: TrigSeries<T>,
}

impl<T: Real> GraphSurface<T> {
    pub fn new(height: T, relief: TrigSeries<T>) -> Self {
        Self { height, relief }
    }

    pub fn xi(&self, x: T, y: T) -> T {
        self.height * self.relief.eval(x, y).exp()
    }

    pub fn patch(&self, n: usize, scheme: DiffScheme) -> Result<SurfacePatch<T>> {
        SurfacePatch::unit_cell(n, scheme, Orientation::Negative, |u, v| Vec3::new(u, v, self.xi(u, v)))
    }

    /// Largest height attained on a fine sample of the cell.
    pub fn max_height(&self) -> T {
        let n = 64;
        let h = T::one() / T::of_usize(n);
        (0..n * n)
            .map(|k| self.xi(T::of_usize(k % n) * h, T::of_usize(k / n) * h))
            .fold(T::zero(), T::max)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::convergence_order;

    #[test]
    fn horosphere_forms_from_differences() {
        let (patch, exact) = analytic_family(AnalyticKind::Horosphere(1.0f64), 16, 16).unwrap();
        let f = patch.compute_forms().unwrap();
        for k in 0..f.len() {
            assert!((f.shape[k] - Mat2::identity()).max_abs() < 1e-12);
            assert!((f.mean[k] - 2.0).abs() < 1e-12 && f.gauss[k].abs() < 1e-12);
            assert!((f.da[k] - exact.da[k]).abs() < 1e-15);
        }
        assert!(gauss_residual(&f).unwrap() < 1e-10);
        assert!(codazzi_residual(&f).unwrap() < 1e-10);
    }

    #[test]
    fn vertical_plane_is_totally_geodesic() {
        let (patch, exact) = analytic_family(AnalyticKind::PlaneEquidistant(0.0f64), 24, 24).unwrap();
        let f = patch.compute_forms().unwrap();
        for k in f.grid.interior_nodes() {
            assert!(f.shape[k].max_abs() < 1e-3, "{:?}", f.shape[k]);
            assert!((f.first[k] - exact.first[k]).max_abs() < 1e-2);
        }
        assert!(exact.gauss.iter().all(|&k| (k + 1.0).abs() < 1e-15));
    }

    #[test]
    fn plane_equidistant_discrete_shape_operator() {
        let rho = 0.4f64;
        let (patch, _) = analytic_family(AnalyticKind::PlaneEquidistant(rho), 32, 32).unwrap();
        let f = patch.compute_forms().unwrap();
        let err = f.grid.interior_nodes().map(|k| (f.shape[k] - Mat2::identity().scale(rho.tanh())).max_abs()).fold(0.0, f64::max);
        assert!(err < 5e-3, "{err}");
    }

    #[test]
    fn sphere_exact_data() {
        let (_, f) = analytic_family(AnalyticKind::GeodesicSphere(1.0f64), 16, 12).unwrap();
        let m = f.moments();
        assert!((m.area - sphere_area(1.0)).abs() < 1e-12);
        assert!((m.area - 17.35539).abs() < 1e-4);
        assert!((f.shape[0].a - 1.0f64 / 1.0f64.tanh()).abs() < 1e-15);
        assert!((f.euler_characteristic() - 2.0).abs() < 1e-12);
        assert!(f.self_adjointness_residual() < 1e-12);
    }

    #[test]
    fn sphere_band_converges() {
        let mut errs = Vec::new();
        let mut hs = Vec::new();
        for n in [32, 64, 128] {
            let p = sphere_band(1.0f64, n, 2).unwrap();
            let f = p.compute_forms().unwrap();
            let coth = 1.0 / 1.0f64.tanh();
            let e = f.grid.interior_nodes().map(|k| (f.shape[k].a - coth).abs().max((f.shape[k].d - coth).abs())).fold(0.0, f64::max);
            errs.push(e.max(gauss_residual(&f).unwrap()));
            hs.push(f.grid.hu);
        }
        assert!(errs[2] < 2e-3);
        assert!(convergence_order(&hs, &errs) > 1.5, "{errs:?}");
    }

    #[test]
    fn periodic_graph_residuals_are_second_order() {
        let g = GraphSurface::new(
            1.0f64,
            TrigSeries { terms: vec![TrigTerm { kx: 1, ky: 0, cos: 0.05, sin: 0.0 }, TrigTerm { kx: 1, ky: 1, cos: 0.0, sin: 0.03 }] },
        );
        let mut gauss = Vec::new();
        let mut cod = Vec::new();
        let mut gb = Vec::new();
        let ns = [32usize, 64, 128];
        for &n in &ns {
            let f = g.patch(n, DiffScheme::Central).unwrap().compute_forms().unwrap();
            gauss.push(gauss_residual(&f).unwrap());
            cod.push(codazzi_residual(&f).unwrap());
            gb.push(f.euler_characteristic().abs());
        }
        let hs: Vec<f64> = ns.iter().map(|&n| 1.0 / n as f64).collect();
        assert!((convergence_order(&hs, &gauss) - 2.0).abs() < 0.3, "{gauss:?}");
        assert!((convergence_order(&hs, &cod) - 2.0).abs() < 0.3, "{cod:?}");
        assert!(gb[2] < 1e-3, "{gb:?}");
    }

    #[test]
    fn obj_export_counts() {
        let (patch, _) = analytic_family(AnalyticKind::Horosphere(1.0f64), 8, 8).unwrap();
        let mut buf = Vec::new();
        patch.write_obj(&mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        assert_eq!(text.lines().filter(|l| l.starts_with("v ")).count(), 64);
        assert_eq!(text.lines().filter(|l| l.starts_with("f ")).count(), 49);
    }
}
