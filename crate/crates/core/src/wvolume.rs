//! Volume functionals of regions bounded by surfaces: the hyperbolic volume
//! V, the W-volume `V − ¼∮H da`, the Einstein–Hilbert dual `V − ½∮H da`, the
//! momentum of a boundary surface and the renormalized volume of an end.

use std::io::Write;

use serde::Serialize;

use crate::equidistant::{area_at_distance, check_distance, forms_at_distance};
use crate::error::{Error, Result};
use crate::grid::least_squares_slope;
use crate::linalg::Mat2;
use crate::patch::{FormField, Moments, SurfacePatch};
use crate::scalar::{lit, Real};

/// Volume between `S` and `S_ρ` from the moments of `S`:
/// `½∫(sinh 2ρ + (K/2)(sinh 2ρ − 2ρ) + (H/2)(cosh 2ρ − 1)) da`.
/// Negative for `ρ < 0`.
pub fn slab_volume_closed<T: Real>(m: &Moments<T>, rho: T) -> T {
    let half = lit::<T>(0.5);
    let two_rho = rho + rho;
    let (sh, ch) = (two_rho.sinh(), two_rho.cosh());
    half * (sh * m.area + half * m.gauss * (sh - two_rho) + half * m.mean * (ch - T::one()))
}

/// `A(ρ)` from the moments of `S`.
pub fn area_closed<T: Real>(m: &Moments<T>, rho: T) -> T {
    let (sh, ch) = (rho.sinh(), rho.cosh());
    ch * ch * m.area + ch * sh * m.mean + sh * sh * m.extrinsic
}

/// `∫_{S_ρ} H da` from the moments of `S`.
pub fn mean_integral_closed<T: Real>(m: &Moments<T>, rho: T) -> T {
    let two_rho = rho + rho;
    two_rho.sinh() * (m.area + m.extrinsic) + two_rho.cosh() * m.mean
}

/// A compact region of H³ (or of a periodic quotient) described by its
/// boundary.
#[derive(Debug, Clone, Copy)]
pub enum SlabSpec<'a, T> {
    /// Region between the leaves `S_from` and `S_to` (`from < to`) of the
    /// equidistant foliation of `leaf`. A geodesic ball of radius `r` is the
    /// slab `[−r, 0]` of its boundary sphere.
    Foliation { leaf: &'a FormField<T>, from: T, to: T },
    /// Region between a periodic surface `S` (outer boundary, normal toward
    /// the conformal boundary) and the horosphere `ξ = depth` lying above it.
    Capped { patch: &'a SurfacePatch<T>, forms: &'a FormField<T>, depth: T },
}

/// Area and outward-normal mean-curvature integral of a boundary component.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BoundaryTerm {
    pub label: String,
    pub area: f64,
    pub mean_integral: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct VolumeReport {
    pub volume: f64,
    pub boundary: Vec<BoundaryTerm>,
    pub w: f64,
    pub einstein_hilbert: f64,
    pub euler_characteristic: Option<f64>,
    pub renormalized: Option<f64>,
    pub residual: Option<f64>,
}

impl VolumeReport {
    fn new(volume: f64, boundary: Vec<BoundaryTerm>) -> Self {
        let total: f64 = boundary.iter().map(|b| b.mean_integral).sum();
        Self {
            volume,
            w: volume - 0.25 * total,
            einstein_hilbert: volume - 0.5 * total,
            boundary,
            euler_characteristic: None,
            renormalized: None,
            residual: None,
        }
    }

    /// `W − (V + I_EH)/2`.
    pub fn duality_gap(&self) -> f64 {
        self.w - 0.5 * (self.volume + self.einstein_hilbert)
    }

    pub fn write_json(&self, out: impl Write) -> Result<()> {
        serde_json::to_writer_pretty(out, self)?;
        Ok(())
    }
}

fn validate_foliation<T: Real>(leaf: &FormField<T>, from: T, to: T) -> Result<()> {
    if !(from <= to) {
        return Err(Error::Domain(format!("slab bounds {from} > {to}")));
    }
    check_distance(leaf, from)?;
    check_distance(leaf, to)
}

fn capped_volume<T: Real>(patch: &SurfacePatch<T>, depth: T) -> Result<T> {
    let cell = patch.cell_area().ok_or_else(|| Error::Domain("capped regions need a periodic patch".into()))?;
    let top = patch.points.iter().map(|p| p.xi).fold(T::zero(), T::max);
    if !(depth > top) {
        return Err(Error::Domain(format!("cap horosphere ξ = {depth} does not lie above the surface (max ξ = {top})")));
    }
    let d = patch.embedding_derivs()?;
    let sigma: T = patch.orientation.sign();
    let half = lit::<T>(0.5);
    let flux: T = (0..patch.len())
        .map(|k| d.xu[k].cross(&d.xv[k]).z / (patch.points[k].xi * patch.points[k].xi))
        .sum::<T>()
        * patch.grid.cell_area();
    Ok(-half * sigma * flux - half * cell / (depth * depth))
}

/// Volume of the region.
pub fn slab_volume<T: Real>(spec: &SlabSpec<'_, T>) -> Result<T> {
    match *spec {
        SlabSpec::Foliation { leaf, from, to } => {
            validate_foliation(leaf, from, to)?;
            let m = leaf.moments();
            Ok(slab_volume_closed(&m, to) - slab_volume_closed(&m, from))
        }
        SlabSpec::Capped { patch, depth, .. } => capped_volume(patch, depth),
    }
}

/// Volume of a foliation slab by composite Simpson integration of the
/// node-summed `A(ρ)` over `intervals` (rounded up to even) subintervals.
pub fn slab_volume_quadrature<T: Real>(spec: &SlabSpec<'_, T>, intervals: usize) -> Result<T> {
    let SlabSpec::Foliation { leaf, from, to } = *spec else {
        return Err(Error::Unsupported("ρ-quadrature needs a foliation slab".into()));
    };
    validate_foliation(leaf, from, to)?;
    let n = intervals.max(2) + intervals % 2;
    let h = (to - from) / T::of_usize(n);
    let mut acc = T::zero();
    for q in 0..=n {
        let w = if q == 0 || q == n { T::one() } else if q % 2 == 1 { lit(4.0) } else { lit(2.0) };
        let rho = if q == n { to } else { from + h * T::of_usize(q) };
        acc = acc + w * area_at_distance(leaf, rho)?;
    }
    Ok(acc * h / lit(3.0))
}

fn foliation_boundary<T: Real>(leaf: &FormField<T>, from: T, to: T) -> Vec<BoundaryTerm> {
    let m = leaf.moments();
    vec![
        BoundaryTerm {
            label: "outer".into(),
            area: area_closed(&m, to).to_f64_lossy(),
            mean_integral: mean_integral_closed(&m, to).to_f64_lossy(),
        },
        BoundaryTerm {
            label: "inner".into(),
            area: area_closed(&m, from).to_f64_lossy(),
            mean_integral: -mean_integral_closed(&m, from).to_f64_lossy(),
        },
    ]
}

fn capped_boundary<T: Real>(patch: &SurfacePatch<T>, forms: &FormField<T>, depth: T) -> Result<Vec<BoundaryTerm>> {
    let cell = patch.cell_area().ok_or_else(|| Error::Domain("capped regions need a periodic patch".into()))?;
    let m = forms.moments();
    let cap_area = (cell / (depth * depth)).to_f64_lossy();
    Ok(vec![
        BoundaryTerm { label: "surface".into(), area: m.area.to_f64_lossy(), mean_integral: m.mean.to_f64_lossy() },
        BoundaryTerm { label: "cap".into(), area: cap_area, mean_integral: -2.0 * cap_area },
    ])
}

/// Closed-form volume report with outward-normal conventions on every
/// boundary component.
pub fn w_volume<T: Real>(spec: &SlabSpec<'_, T>) -> Result<VolumeReport> {
    let v = slab_volume(spec)?.to_f64_lossy();
    let boundary = match *spec {
        SlabSpec::Foliation { leaf, from, to } => foliation_boundary(leaf, from, to),
        SlabSpec::Capped { patch, forms, depth } => capped_boundary(patch, forms, depth)?,
    };
    Ok(VolumeReport::new(v, boundary))
}

/// Volume report for a foliation slab with V by ρ-quadrature and the
/// boundary integrals summed over the re-derived leaf forms.
pub fn w_volume_quadrature<T: Real>(spec: &SlabSpec<'_, T>, intervals: usize) -> Result<VolumeReport> {
    let v = slab_volume_quadrature(spec, intervals)?.to_f64_lossy();
    let SlabSpec::Foliation { leaf, from, to } = *spec else { unreachable!() };
    let term = |rho: T, label: &str, sign: f64| -> Result<BoundaryTerm> {
        if let Some((_, crit)) = crate::equidistant::breakdown_distance(leaf, rho > T::zero()) {
            if (crit - rho).abs() <= lit::<T>(1e-12) * (T::one() + crit.abs()) {
                return Ok(BoundaryTerm { label: label.into(), area: 0.0, mean_integral: 0.0 });
            }
        }
        let f = forms_at_distance(leaf, rho)?;
        Ok(BoundaryTerm {
            label: label.into(),
            area: f.integrate(|_| T::one()).to_f64_lossy(),
            mean_integral: sign * f.integrate(|k| f.mean[k]).to_f64_lossy(),
        })
    };
    Ok(VolumeReport::new(v, vec![term(to, "outer", 1.0)?, term(from, "inner", -1.0)?]))
}

/// Sandwich identity check for the slab `[0, ρ]` of `S`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SandwichCheck {
    pub w: f64,
    pub genus: i64,
    pub expected: f64,
    pub residual: f64,
}

/// `|W[S, S_ρ] − 2πρ(g − 1)|` with `g` rounded from the discrete
/// Gauss–Bonnet integral of `S`.
pub fn sandwich_check<T: Real>(leaf: &FormField<T>, rho: T) -> Result<SandwichCheck> {
    let (from, to) = if rho >= T::zero() { (T::zero(), rho) } else { (rho, T::zero()) };
    let report = w_volume(&SlabSpec::Foliation { leaf, from, to })?;
    let genus = leaf.genus();
    let expected = 2.0 * std::f64::consts::PI * (to - from).to_f64_lossy() * (genus as f64 - 1.0);
    Ok(SandwichCheck { w: report.w, genus, expected, residual: (report.w - expected).abs() })
}

/// Conjugate momentum `π = −¼(II − (H/2) I)`.
pub fn momentum<T: Real>(forms: &FormField<T>) -> Vec<Mat2<T>> {
    let q = lit::<T>(-0.25);
    let half = lit::<T>(0.5);
    (0..forms.len())
        .map(|k| (forms.second[k] - forms.first[k].scale(half * forms.mean[k])).scale(q))
        .collect()
}

/// `max_k |tr_I π|`.
pub fn momentum_trace_residual<T: Real>(forms: &FormField<T>) -> T {
    momentum(forms)
        .iter()
        .zip(&forms.first)
        .map(|(p, i)| i.solve(p).map_or(T::nan(), |m| m.trace()).abs())
        .fold(T::zero(), T::max)
}

/// Legendre correction `∫⟨π, I⟩ da`, which vanishes for the traceless
/// momentum (self-duality of W).
pub fn legendre_correction<T: Real>(forms: &FormField<T>) -> Result<T> {
    let pi = momentum(forms);
    let mut acc = T::zero();
    for k in 0..forms.len() {
        if forms.da[k] != T::zero() {
            acc = acc + crate::infinity::bracket(&pi[k], &forms.first[k], &forms.first[k])? * forms.da[k];
        }
    }
    Ok(acc)
}

/// One row of the renormalized-volume table.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct RenormalizedRow {
    pub rho: f64,
    pub volume: f64,
    pub area: f64,
    /// `V(ρ) − A(ρ)/2 − 2πρ(g − 1)`.
    pub renormalized: f64,
    /// `−¼ e^{−2ρ} ∫(2 − H + K) da`.
    pub model: f64,
    /// Difference between `renormalized` and the exact finite-ρ expression.
    pub identity_error: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RenormalizedReport {
    pub rows: Vec<RenormalizedRow>,
    pub genus: i64,
    /// W of the region bounded by `S` (core volume minus ¼∫H).
    pub w_core: f64,
    /// Limit extrapolated from the three largest ρ.
    pub renormalized_volume: f64,
    /// `W_core − π(g − 1)`.
    pub expected: f64,
    /// Fitted slope of `log|V(ρ) − A/2 − 2πρ(g − 1) − V_R|` against ρ.
    pub decay_exponent: f64,
    pub max_identity_error: f64,
}

impl RenormalizedReport {
    pub fn write_csv(&self, out: impl Write) -> Result<()> {
        let mut w = csv::Writer::from_writer(out);
        for r in &self.rows {
            w.serialize(r)?;
        }
        w.flush()?;
        Ok(())
    }
}

/// Renormalized volume of the end foliated by the leaves `S_ρ` of a convex
/// surface `S`. `V(ρ)` is `core_volume` (volume of the region bounded by
/// `S`, zero to measure the end alone) plus the slab `[0, ρ]`. The genus is
/// declared for analytic families and measured otherwise.
pub fn renormalized_volume<T: Real>(leaf: &FormField<T>, rhos: &[T], core_volume: T, genus: Option<i64>) -> Result<RenormalizedReport> {
    if rhos.len() < 3 {
        return Err(Error::Domain("need at least three ρ values".into()));
    }
    let max_rho = rhos.iter().copied().fold(T::zero(), T::max);
    check_distance(leaf, max_rho)?;
    let m = leaf.moments();
    let g = genus.unwrap_or_else(|| leaf.genus());
    let pi = std::f64::consts::PI;
    let gm1 = g as f64 - 1.0;
    let residual_integral = (lit::<T>(2.0) * m.area - m.mean + m.gauss).to_f64_lossy();
    let w_core = core_volume.to_f64_lossy() - 0.25 * m.mean.to_f64_lossy();
    let rows: Vec<RenormalizedRow> = rhos
        .iter()
        .map(|&rho| {
            let r = rho.to_f64_lossy();
            let volume = (core_volume + slab_volume_closed(&m, rho)).to_f64_lossy();
            let area = area_closed(&m, rho).to_f64_lossy();
            let renormalized = volume - 0.5 * area - 2.0 * pi * r * gm1;
            let model = -0.25 * (-2.0 * r).exp() * residual_integral;
            let exact = model + w_core - pi * gm1;
            RenormalizedRow { rho: r, volume, area, renormalized, model, identity_error: renormalized - exact }
        })
        .collect();
    let mut sorted = rows.clone();
    sorted.sort_by(|a, b| a.rho.total_cmp(&b.rho));
    let top = &sorted[sorted.len() - 3..];
    let xs: Vec<f64> = top.iter().map(|r| (-2.0 * r.rho).exp()).collect();
    let ys: Vec<f64> = top.iter().map(|r| r.renormalized).collect();
    let slope = least_squares_slope(&xs, &ys);
    let intercept = ys.iter().zip(&xs).map(|(y, x)| y - slope * x).sum::<f64>() / 3.0;
    let (dx, dy): (Vec<f64>, Vec<f64>) = sorted
        .iter()
        .filter(|r| (r.renormalized - intercept).abs() > 0.0)
        .map(|r| (r.rho, (r.renormalized - intercept).abs().ln()))
        .unzip();
    let decay_exponent = if dx.len() >= 2 { least_squares_slope(&dx, &dy) } else { f64::NAN };
    let max_identity_error = rows.iter().map(|r| r.identity_error.abs()).fold(0.0, f64::max);
    Ok(RenormalizedReport {
        rows,
        genus: g,
        w_core,
        renormalized_volume: intercept,
        expected: w_core - pi * gm1,
        decay_exponent,
        max_identity_error,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::DiffScheme;
    use crate::patch::{analytic_family, ball_volume, AnalyticKind, GraphSurface, TrigSeries};
    use std::f64::consts::PI;

    fn sphere(r: f64) -> FormField<f64> {
        analytic_family(AnalyticKind::GeodesicSphere(r), 16, 16).unwrap().1
    }

    #[test]
    fn ball_w_volume() {
        for r in [0.5, 1.0, 2.0] {
            let s = sphere(r);
            let spec = SlabSpec::Foliation { leaf: &s, from: -r, to: 0.0 };
            let rep = w_volume(&spec).unwrap();
            assert!((rep.volume - ball_volume(r)).abs() < 1e-10 * ball_volume(r).max(1.0));
            assert!((rep.w + 2.0 * PI * r).abs() < 1e-9, "{}", rep.w);
            assert!(rep.duality_gap().abs() < 1e-12);
            let quad = w_volume_quadrature(&spec, 4096).unwrap();
            assert!((quad.w + 2.0 * PI * r).abs() < 1e-7, "{}", quad.w);
        }
        let s = sphere(1.0);
        let rep = w_volume(&SlabSpec::Foliation { leaf: &s, from: -1.0, to: 0.0 }).unwrap();
        assert!((rep.volume - 5.110932705708289).abs() < 1e-10);
        let eh = rep.volume - 0.5 * 2.0 / 1.0f64.tanh() * 4.0 * PI * 1.0f64.sinh().powi(2);
        assert!((rep.einstein_hilbert - eh).abs() < 1e-10);
    }

    #[test]
    fn horotorus_slab() {
        let (_, f) = analytic_family(AnalyticKind::Horosphere(1.0f64), 8, 8).unwrap();
        let a0 = f.moments().area;
        for rho in [0.3, 1.0, 2.5] {
            let v = slab_volume(&SlabSpec::Foliation { leaf: &f, from: 0.0, to: rho }).unwrap();
            assert!((v - 0.5 * a0 * ((2.0 * rho).exp() - 1.0)).abs() < 1e-12 * v);
            let sw = sandwich_check(&f, rho).unwrap();
            assert_eq!(sw.genus, 1);
            assert!(sw.residual < 1e-10);
        }
    }

    #[test]
    fn sphere_sandwich_and_additivity() {
        let s = sphere(1.0);
        let sw = sandwich_check(&s, 0.8).unwrap();
        assert_eq!(sw.genus, 0);
        assert!(sw.residual < 1e-9);
        let w = |a: f64, b: f64| w_volume(&SlabSpec::Foliation { leaf: &s, from: a, to: b }).unwrap().w;
        assert!((w(0.0, 0.4) + w(0.4, 1.1) - w(0.0, 1.1)).abs() < 1e-10);
    }

    #[test]
    fn capped_horotorus_is_w_flat() {
        let (patch, f) = analytic_family(AnalyticKind::Horosphere(0.5f64), 16, 16).unwrap();
        let rep = w_volume(&SlabSpec::Capped { patch: &patch, forms: &f, depth: 2.0 }).unwrap();
        assert!((rep.volume - 0.5 * (4.0 - 0.25)).abs() < 1e-12);
        assert!(rep.w.abs() < 1e-12);
        assert!(w_volume(&SlabSpec::Capped { patch: &patch, forms: &f, depth: 0.4 }).is_err());
    }

    #[test]
    fn capped_graph_volume_matches_direct_integral() {
        let g = GraphSurface::new(0.8f64, TrigSeries::single(1, 1, 0.1, 0.05));
        let patch = g.patch(32, DiffScheme::Spectral).unwrap();
        let f = patch.compute_forms().unwrap();
        let depth = 3.0;
        let v = slab_volume(&SlabSpec::Capped { patch: &patch, forms: &f, depth }).unwrap();
        let direct: f64 = patch.points.iter().map(|p| 0.5 * (p.xi.powi(-2) - depth.powi(-2))).sum::<f64>() / patch.len() as f64;
        assert!((v - direct).abs() < 1e-12);
    }

    #[test]
    fn momentum_is_traceless() {
        let g = GraphSurface::new(1.0f64, TrigSeries::single(2, 1, 0.05, 0.02));
        let f = g.patch(24, DiffScheme::Central).unwrap().compute_forms().unwrap();
        assert!(momentum_trace_residual(&f) < 1e-13);
        assert!(legendre_correction(&f).unwrap().abs() < 1e-12);
        let (_, h) = analytic_family(AnalyticKind::Horosphere(1.0f64), 8, 8).unwrap();
        assert!(momentum(&h).iter().all(|p| p.max_abs() < 1e-15));
    }

    #[test]
    fn renormalized_ball() {
        let s = sphere(1.0);
        let rhos: Vec<f64> = (1..=8).map(|k| 0.5 * k as f64).collect();
        let rep = renormalized_volume(&s, &rhos, ball_volume(1.0), Some(0)).unwrap();
        assert!(rep.max_identity_error < 1e-8, "{}", rep.max_identity_error);
        assert!((rep.renormalized_volume + PI).abs() < 1e-6, "{}", rep.renormalized_volume);
        assert!((rep.decay_exponent + 2.0).abs() < 0.1, "{}", rep.decay_exponent);
        let end = renormalized_volume(&s, &rhos, 0.0, Some(0)).unwrap();
        assert!(end.max_identity_error < 1e-8);
    }

    #[test]
    fn renormalized_horotorus() {
        let (_, f) = analytic_family(AnalyticKind::Horosphere(1.0f64), 8, 8).unwrap();
        let a0 = f.moments().area;
        let rep = renormalized_volume(&f, &[0.5, 1.0, 2.0, 3.0], 0.0, None).unwrap();
        for r in &rep.rows {
            assert!((r.renormalized + 0.5 * a0).abs() < 1e-10 * (2.0 * r.rho).exp());
        }
    }
}
