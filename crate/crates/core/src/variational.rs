//! First-variation formulas for `V` and `W`, evaluated on deformation
//! families and compared against finite differences of the volume
//! functionals.

use std::io::Write;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::grid::{convergence_order, DiffScheme};
use crate::infinity::{bracket, linearize, to_infinity, InfinityData};
use crate::linalg::Mat2;
use crate::liouville::LiouvilleField;
use crate::patch::{analytic_family, AnalyticKind, FormField, GraphSurface, SurfacePatch, TrigSeries};
use crate::scalar::{lit, Real};
use crate::wvolume::{slab_volume, w_volume, SlabSpec};

/// Default ε-schedule for finite-difference comparisons.
pub const EPS_SCHEDULE: [f64; 3] = [1e-2, 1e-3, 1e-4];

/// Inner step for Richardson differentiation of discrete forms.
const FORM_STEP: f64 = 1e-3;

/// `|det(A) tr(A⁻¹B) − tr(A) tr(B) + tr(AB)|`.
pub fn trace_identity_check<T: Real>(a: &Mat2<T>, b: &Mat2<T>) -> Result<T> {
    let inv = a.inverse().ok_or_else(|| Error::Domain("trace identity needs an invertible A".into()))?;
    Ok((a.det() * (inv * *b).trace() - a.trace() * b.trace() + (*a * *b).trace()).abs())
}

/// Boundary data of a family at `ε = 0` and its first variation.
#[derive(Debug, Clone)]
pub struct FormVariation<T> {
    pub base: FormField<T>,
    pub first: Vec<Mat2<T>>,
    pub second: Vec<Mat2<T>>,
    pub mean: Vec<T>,
}

/// Data at infinity at `ε = 0` and its first variation.
#[derive(Debug, Clone)]
pub struct StarFieldVariation<T> {
    pub base: InfinityData<T>,
    pub first: Vec<Mat2<T>>,
    pub second: Vec<Mat2<T>>,
    pub mean: Vec<T>,
}

fn pair<T: Real>(a: &Mat2<T>, b: &Mat2<T>, reference: &Mat2<T>) -> T {
    bracket(a, b, reference).unwrap_or_else(|_| T::nan())
}

/// Formula side of `δV = ½∫(δH + ½⟨δI, II⟩) da`.
pub fn schlafli_dv_formula<T: Real>(var: &FormVariation<T>) -> T {
    let half = lit::<T>(0.5);
    let f = &var.base;
    half * f.integrate(|k| var.mean[k] + half * pair(&var.first[k], &f.second[k], &f.first[k]))
}

/// `δW = ¼∫⟨δII − (H/2)δI, I⟩ da`.
pub fn dw_boundary<T: Real>(var: &FormVariation<T>) -> T {
    let half = lit::<T>(0.5);
    let f = &var.base;
    lit::<T>(0.25) * f.integrate(|k| pair(&(var.second[k] - var.first[k].scale(half * f.mean[k])), &f.first[k], &f.first[k]))
}

/// `δW = −¼∫⟨δII* − (H*/2)δI*, I*⟩ da*`.
pub fn dw_infinity<T: Real>(var: &StarFieldVariation<T>) -> T {
    let half = lit::<T>(0.5);
    let s = &var.base;
    -lit::<T>(0.25) * s.integrate(|k| pair(&(var.second[k] - var.first[k].scale(half * s.mean[k])), &s.first[k], &s.first[k]))
}

/// `δW = −¼∫(δH* + ⟨δI*, II*₀⟩) da*`.
pub fn dw_traceless<T: Real>(var: &StarFieldVariation<T>) -> T {
    let s = &var.base;
    -lit::<T>(0.25) * s.integrate(|k| var.mean[k] + pair(&var.first[k], &s.traceless[k], &s.first[k]))
}

/// Pushes a boundary variation through the exact linearized transform.
pub fn star_variation<T: Real>(var: &FormVariation<T>) -> Result<StarFieldVariation<T>> {
    let base = to_infinity(&var.base);
    base.require_valid()?;
    let f = &var.base;
    let n = f.len();
    let (mut first, mut second, mut mean) = (Vec::with_capacity(n), Vec::with_capacity(n), Vec::with_capacity(n));
    for k in 0..n {
        let sv = linearize(&f.first[k], &f.second[k], &var.first[k], &var.second[k]).ok_or(Error::TransformSingular { node: k })?;
        first.push(sv.first);
        second.push(sv.second);
        mean.push(sv.mean);
    }
    Ok(StarFieldVariation { base, first, second, mean })
}

/// A one-parameter deformation of a compact region, `ε ↦ N_ε`.
pub trait DeformationFamily<T: Real> {
    fn label(&self) -> String;
    /// Volume of `N_ε`.
    fn volume(&self, eps: T) -> Result<T>;
    /// W-volume of `N_ε`.
    fn w(&self, eps: T) -> Result<T>;
    /// Boundary forms at `ε = 0` with their first variation.
    fn variation(&self) -> Result<FormVariation<T>>;
    /// Variation of the data at infinity. Defaults to the transformed
    /// boundary variation.
    fn star_variation(&self) -> Result<StarFieldVariation<T>> {
        star_variation(&self.variation()?)
    }
}

/// Geodesic balls `r ↦ r + ε`, with analytic variations.
#[derive(Debug, Clone, Copy)]
pub struct BallFamily<T> {
    pub radius: T,
    pub n: usize,
}

impl<T: Real> BallFamily<T> {
    fn leaf(&self, eps: T) -> Result<FormField<T>> {
        Ok(analytic_family(AnalyticKind::GeodesicSphere(self.radius + eps), self.n, self.n)?.1)
    }
}

impl<T: Real> DeformationFamily<T> for BallFamily<T> {
    fn label(&self) -> String {
        format!("ball r={}", self.radius)
    }

    fn volume(&self, eps: T) -> Result<T> {
        let leaf = self.leaf(eps)?;
        slab_volume(&SlabSpec::Foliation { leaf: &leaf, from: -(self.radius + eps), to: T::zero() })
    }

    fn w(&self, eps: T) -> Result<T> {
        let leaf = self.leaf(eps)?;
        Ok(lit(w_volume(&SlabSpec::Foliation { leaf: &leaf, from: -(self.radius + eps), to: T::zero() })?.w))
    }

    /// `δI = 2coth r I`, `δII = cosh 2r / sinh²r I`, `δH = −2/sinh²r`.
    fn variation(&self) -> Result<FormVariation<T>> {
        let base = self.leaf(T::zero())?;
        let r = self.radius;
        let (s, c) = (r.sinh(), r.cosh());
        let two = lit::<T>(2.0);
        let first = base.first.iter().map(|i| i.scale(two * c / s)).collect();
        let second = base.first.iter().map(|i| i.scale((r + r).cosh() / (s * s))).collect();
        let mean = vec![-two / (s * s); base.len()];
        Ok(FormVariation { base, first, second, mean })
    }
}

/// Direction of a graph-surface deformation.
#[derive(Debug, Clone, PartialEq)]
pub enum GraphDirection<T> {
    /// `h ↦ h + εg`, i.e. `ξ ↦ ξ e^{εg}`.
    Vertical(TrigSeries<T>),
    /// `(u, v) ↦ (u + εa, v + εb)`.
    Tangential(TrigSeries<T>, TrigSeries<T>),
}

/// Deformations of the capped region above a periodic graph surface. The
/// cap horosphere is held fixed.
#[derive(Debug, Clone)]
pub struct GraphFamily<T> {
    pub surface: GraphSurface<T>,
    pub direction: GraphDirection<T>,
    pub n: usize,
    pub depth: T,
}

impl<T: Real> GraphFamily<T> {
    /// Places the cap at twice the highest point of the surface.
    pub fn new(surface: GraphSurface<T>, direction: GraphDirection<T>, n: usize) -> Self {
        let depth = lit::<T>(2.0) * surface.max_height();
        Self { surface, direction, n, depth }
    }

    pub fn patch(&self, eps: T) -> Result<SurfacePatch<T>> {
        let s = &self.surface;
        let orientation = s.patch(8, DiffScheme::Spectral)?.orientation;
        let dir = &self.direction;
        SurfacePatch::unit_cell(self.n, DiffScheme::Spectral, orientation, |u, v| match dir {
            GraphDirection::Vertical(g) => crate::linalg::Vec3::new(u, v, s.xi(u, v) * (eps * g.eval(u, v)).exp()),
            GraphDirection::Tangential(a, b) => {
                let (x, y) = (u + eps * a.eval(u, v), v + eps * b.eval(u, v));
                crate::linalg::Vec3::new(x, y, s.xi(x, y))
            }
        })
    }

    fn report(&self, eps: T) -> Result<(T, T)> {
        let patch = self.patch(eps)?;
        let forms = patch.compute_forms()?;
        let spec = SlabSpec::Capped { patch: &patch, forms: &forms, depth: self.depth };
        let r = w_volume(&spec)?;
        Ok((lit(r.volume), lit(r.w)))
    }
}

/// Richardson-extrapolated derivative of the forms of `build(ε)` at 0.
fn form_variation<T: Real>(build: impl Fn(T) -> Result<FormField<T>>) -> Result<FormVariation<T>> {
    let h = lit::<T>(FORM_STEP);
    let half = lit::<T>(0.5);
    let base = build(T::zero())?;
    let diff = |h: T| -> Result<(Vec<Mat2<T>>, Vec<Mat2<T>>, Vec<T>)> {
        let (p, m) = (build(h)?, build(-h)?);
        let s = half / h;
        Ok((
            p.first.iter().zip(&m.first).map(|(a, b)| (*a - *b).scale(s)).collect(),
            p.second.iter().zip(&m.second).map(|(a, b)| (*a - *b).scale(s)).collect(),
            p.mean.iter().zip(&m.mean).map(|(a, b)| (*a - *b) * s).collect(),
        ))
    };
    let (d1, d2) = (diff(h)?, diff(h * half)?);
    let third = T::one() / lit::<T>(3.0);
    let four = lit::<T>(4.0);
    let mix = |a: &Mat2<T>, b: &Mat2<T>| (b.scale(four) - *a).scale(third);
    Ok(FormVariation {
        first: d1.0.iter().zip(&d2.0).map(|(a, b)| mix(a, b)).collect(),
        second: d1.1.iter().zip(&d2.1).map(|(a, b)| mix(a, b)).collect(),
        mean: d1.2.iter().zip(&d2.2).map(|(a, b)| (four * *b - *a) * third).collect(),
        base,
    })
}

impl<T: Real> DeformationFamily<T> for GraphFamily<T> {
    fn label(&self) -> String {
        match self.direction {
            GraphDirection::Vertical(_) => "graph vertical".into(),
            GraphDirection::Tangential(..) => "graph tangential".into(),
        }
    }

    fn volume(&self, eps: T) -> Result<T> {
        Ok(self.report(eps)?.0)
    }

    fn w(&self, eps: T) -> Result<T> {
        Ok(self.report(eps)?.1)
    }

    fn variation(&self) -> Result<FormVariation<T>> {
        form_variation(|e| self.patch(e)?.compute_forms())
    }
}

/// Conformal deformations `φ ↦ φ + εu` of a Liouville torus, realized by the
/// capped region above the Epstein surface at distance `rho`.
#[derive(Debug, Clone)]
pub struct EpsteinFamily<T> {
    pub field: LiouvilleField<T>,
    pub direction: Vec<T>,
    pub rho: T,
    pub depth: T,
}

impl<T: Real> EpsteinFamily<T> {
    /// Places the cap at twice the highest point of the base surface.
    pub fn new(field: LiouvilleField<T>, direction: Vec<T>, rho: T) -> Result<Self> {
        if !field.is_torus() {
            return Err(Error::Unsupported("Epstein families need a torus field".into()));
        }
        if direction.len() != field.phi.len() {
            return Err(Error::Domain("direction length does not match the field".into()));
        }
        field.leaf_regularity(rho)?;
        let top = field.epstein_embedding(rho)?.points.iter().map(|p| p.xi).fold(T::zero(), T::max);
        Ok(Self { field, direction, rho, depth: lit::<T>(2.0) * top })
    }

    pub fn field_at(&self, eps: T) -> LiouvilleField<T> {
        self.field.with_phi(self.field.phi.iter().zip(&self.direction).map(|(p, u)| *p + eps * *u).collect())
    }

    fn report(&self, eps: T) -> Result<(T, T)> {
        let patch = self.field_at(eps).epstein_embedding(self.rho)?;
        let forms = patch.compute_forms()?;
        let r = w_volume(&SlabSpec::Capped { patch: &patch, forms: &forms, depth: self.depth })?;
        Ok((lit(r.volume), lit(r.w)))
    }

    /// Data at infinity of the leaf at `rho`: `e^{2ρ}I*`, `II*`, `e^{−2ρ}K*`.
    pub fn leaf_infinity(&self, field: &LiouvilleField<T>) -> Result<InfinityData<T>> {
        let inf = field.infinity_data()?;
        let s = (self.rho + self.rho).exp();
        InfinityData::from_starred(
            inf.grid.clone(),
            inf.first.iter().map(|i| i.scale(s)).collect(),
            inf.second,
            inf.curvature.iter().map(|k| *k / s).collect(),
            inf.da.iter().map(|a| *a * s).collect(),
        )
    }
}

impl<T: Real> DeformationFamily<T> for EpsteinFamily<T> {
    fn label(&self) -> String {
        format!("epstein rho={}", self.rho)
    }

    fn volume(&self, eps: T) -> Result<T> {
        Ok(self.report(eps)?.0)
    }

    fn w(&self, eps: T) -> Result<T> {
        Ok(self.report(eps)?.1)
    }

    fn variation(&self) -> Result<FormVariation<T>> {
        form_variation(|e| self.field_at(e).epstein_embedding(self.rho)?.compute_forms())
    }

    /// Direct route from the Liouville field: `δI* = uI*`, and `δII*` by a
    /// central difference, which is exact since `II*` is quadratic in `φ`.
    fn star_variation(&self) -> Result<StarFieldVariation<T>> {
        let base = self.leaf_infinity(&self.field)?;
        let h = lit::<T>(FORM_STEP);
        let (p, m) = (self.leaf_infinity(&self.field_at(h))?, self.leaf_infinity(&self.field_at(-h))?);
        let s = lit::<T>(0.5) / h;
        let first: Vec<Mat2<T>> = base.first.iter().zip(&self.direction).map(|(i, u)| i.scale(*u)).collect();
        let second: Vec<Mat2<T>> = p.second.iter().zip(&m.second).map(|(a, b)| (*a - *b).scale(s)).collect();
        let mean = (0..base.len())
            .map(|k| pair(&second[k], &base.first[k], &base.first[k]) - pair(&first[k], &base.second[k], &base.first[k]))
            .collect();
        Ok(StarFieldVariation { base, first, second, mean })
    }
}

/// `(W(ε) − W(−ε))/2ε`.
pub fn central_difference<T: Real>(f: impl Fn(T) -> Result<T>, eps: T) -> Result<T> {
    Ok((f(eps)? - f(-eps)?) / (eps + eps))
}

/// One row of a formula-versus-finite-difference table.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct VariationRow {
    pub eps: f64,
    pub formula: f64,
    pub finite_difference: f64,
    pub ratio: f64,
}

/// Formula value compared against finite differences over an ε-schedule.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct VariationCheck {
    pub label: String,
    pub quantity: String,
    pub formula: f64,
    pub rows: Vec<VariationRow>,
    /// Fitted order of `|fd − formula|` in ε.
    pub order: f64,
}

impl VariationCheck {
    fn new<T: Real>(label: String, quantity: &str, formula: T, eps: &[T], f: impl Fn(T) -> Result<T>) -> Result<Self> {
        let formula = formula.to_f64_lossy();
        let mut rows = Vec::with_capacity(eps.len());
        for &e in eps {
            let fd = central_difference(&f, e)?.to_f64_lossy();
            rows.push(VariationRow { eps: e.to_f64_lossy(), formula, finite_difference: fd, ratio: fd / formula });
        }
        let hs: Vec<f64> = rows.iter().map(|r| r.eps).collect();
        let errs: Vec<f64> = rows.iter().map(|r| (r.finite_difference - r.formula).abs()).collect();
        let order = if hs.len() >= 2 { convergence_order(&hs, &errs) } else { f64::NAN };
        Ok(Self { label, quantity: quantity.into(), formula, rows, order })
    }

    pub fn max_error(&self) -> f64 {
        self.rows.iter().map(|r| (r.finite_difference - r.formula).abs()).fold(0.0, f64::max)
    }

    pub fn finest_error(&self) -> f64 {
        self.rows.last().map_or(f64::NAN, |r| (r.finite_difference - r.formula).abs())
    }

    /// Appends rows as `label,quantity,eps,formula,finite_difference,ratio`.
    pub fn write_csv(checks: &[VariationCheck], out: impl Write) -> Result<()> {
        let mut w = csv::Writer::from_writer(out);
        w.write_record(["label", "quantity", "eps", "formula", "finite_difference", "ratio"])?;
        for c in checks {
            for r in &c.rows {
                w.write_record([
                    c.label.clone(),
                    c.quantity.clone(),
                    r.eps.to_string(),
                    r.formula.to_string(),
                    r.finite_difference.to_string(),
                    r.ratio.to_string(),
                ])?;
            }
        }
        w.flush()?;
        Ok(())
    }
}

/// Schläfli check of `δV`.
pub fn schlafli_dv<T: Real>(family: &dyn DeformationFamily<T>, eps: &[T]) -> Result<VariationCheck> {
    let formula = schlafli_dv_formula(&family.variation()?);
    VariationCheck::new(family.label(), "dV", formula, eps, |e| family.volume(e))
}

/// All three formulas for `δW` on one family.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct WVariation {
    pub label: String,
    pub boundary: f64,
    pub infinity: f64,
    pub traceless: f64,
    pub check: VariationCheck,
}

impl WVariation {
    /// Largest pairwise difference of the three formulas.
    pub fn spread(&self) -> f64 {
        let v = [self.boundary, self.infinity, self.traceless];
        let max = v.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
        let min = v.iter().cloned().fold(f64::INFINITY, f64::min);
        max - min
    }
}

pub fn w_variation<T: Real>(family: &dyn DeformationFamily<T>, eps: &[T]) -> Result<WVariation> {
    let var = family.variation()?;
    let star = family.star_variation()?;
    let boundary = dw_boundary(&var);
    let check = VariationCheck::new(family.label(), "dW", boundary, eps, |e| family.w(e))?;
    Ok(WVariation {
        label: family.label(),
        boundary: boundary.to_f64_lossy(),
        infinity: dw_infinity(&star).to_f64_lossy(),
        traceless: dw_traceless(&star).to_f64_lossy(),
        check,
    })
}

/// The schedule as scalars.
pub fn eps_schedule<T: Real>() -> Vec<T> {
    EPS_SCHEDULE.iter().map(|&e| lit(e)).collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use std::f64::consts::{PI, TAU};

    #[test]
    fn trace_identity() {
        assert!(trace_identity_check(&Mat2::identity(), &Mat2::new(1.0, 2.0, 3.0, 4.0)).unwrap() < 1e-15);
        assert!(trace_identity_check(&Mat2::diag(2.0, 3.0), &Mat2::identity()).unwrap() < 1e-15);
        let mut rng = rand::rngs::StdRng::seed_from_u64(5);
        for _ in 0..1000 {
            let a: Mat2<f64> = Mat2::new(rng.gen_range(-2.0..2.0), rng.gen_range(-2.0..2.0), rng.gen_range(-2.0..2.0), rng.gen_range(-2.0..2.0));
            let b = Mat2::new(rng.gen_range(-2.0..2.0), rng.gen_range(-2.0..2.0), rng.gen_range(-2.0..2.0), rng.gen_range(-2.0..2.0));
            if a.det().abs() > 1e-3 {
                assert!(trace_identity_check(&a, &b).unwrap() < 1e-12);
            }
        }
        assert!(trace_identity_check(&Mat2::<f64>::zero(), &Mat2::identity()).is_err());
    }

    #[test]
    fn ball_family() {
        for r in [0.5, 1.0, 2.0] {
            let fam = BallFamily { radius: r, n: 32 };
            let dv = schlafli_dv(&fam, &eps_schedule()).unwrap();
            let area = 4.0 * PI * (r as f64).sinh().powi(2);
            assert!((dv.formula - area).abs() < 1e-6 * area, "{} {}", dv.formula, area);
            let w = w_variation(&fam, &eps_schedule()).unwrap();
            assert!((w.boundary + TAU).abs() < 1e-6, "{}", w.boundary);
            assert!(w.spread() < 1e-9, "{:?}", w);
        }
    }

    #[test]
    fn graph_vertical_family() {
        let surface = GraphSurface::new(0.25, TrigSeries::single(1, 1, 0.05, 0.02));
        let fam = GraphFamily::new(surface, GraphDirection::Vertical(TrigSeries::single(1, 1, 0.3, 0.2)), 32);
        let w = w_variation(&fam, &eps_schedule()).unwrap();
        assert!(w.spread() < 1e-9);
        assert!(w.check.order >= 2.0 - 0.05, "{}", w.check.order);
        let dv = schlafli_dv(&fam, &eps_schedule()).unwrap();
        assert!(dv.order >= 1.95);
    }

    #[test]
    fn graph_tangential_family() {
        let surface = GraphSurface::new(0.25, TrigSeries::single(1, 1, 0.05, 0.02));
        let dir = GraphDirection::Tangential(TrigSeries::single(0, 1, 0.1, 0.0), TrigSeries::single(1, 0, 0.0, 0.1));
        let fam = GraphFamily::new(surface, dir, 32);
        let dv = schlafli_dv(&fam, &eps_schedule()).unwrap();
        assert!(dv.formula.abs() < 1e-8 && dv.finest_error() < 1e-8);
    }

    #[test]
    fn epstein_family() {
        let field = LiouvilleField::torus(
            num_complex::Complex::new(1.0, 0.0),
            num_complex::Complex::new(0.0, 1.0),
            32,
            32,
            |z| 0.1 * (TAU * z.re).cos(),
        )
        .unwrap();
        let u: Vec<f64> = (0..field.phi.len()).map(|k| 0.2 * (TAU * field.node(k).re).cos() + 0.1 * (TAU * field.node(k).im).sin()).collect();
        let fam = EpsteinFamily::new(field, u, 1.0).unwrap();
        let w = w_variation(&fam, &eps_schedule()).unwrap();
        assert!(w.spread() < 1e-9);
        // W = −(1/16)∫|∇φ|² on Epstein tori, so δW = −(1/8)∫∇φ·∇u exactly.
        assert!((w.boundary + PI * PI / 200.0).abs() < 1e-10, "{}", w.boundary);
        assert!(w.check.max_error() < 1e-9);
        let w0 = fam.w(0.0).unwrap();
        assert!((w0 + 0.01 * PI * PI / 8.0).abs() < 1e-10, "{w0}");
    }
}
