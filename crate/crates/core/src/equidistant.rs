//! Equidistant foliations: the surfaces `S_ρ` at signed normal distance `ρ`
//! from a base surface, computed in closed form from the forms of `S` and by
//! flowing the embedding along normal geodesics.

use std::io::Write;

use rayon::prelude::*;
use serde::Serialize;

use crate::ambient::geodesic_flow;
use crate::error::{Error, Result};
use crate::infinity::InfinityData;
use crate::linalg::Mat2;
use crate::patch::{FormField, SurfacePatch};
use crate::scalar::{lit, Real};
use crate::wvolume::slab_volume_closed;

/// `(cosh ρ E + sinh ρ B, sinh ρ E + cosh ρ B)`, the factors for which
/// `I_ρ = I(P·, P·)` and `B_ρ = P⁻¹Q`.
fn factors<T: Real>(b: &Mat2<T>, rho: T) -> (Mat2<T>, Mat2<T>) {
    let (sh, ch) = (rho.sinh(), rho.cosh());
    let e = Mat2::identity();
    (e.scale(ch) + b.scale(sh), e.scale(sh) + b.scale(ch))
}

/// Signed distance at which node `k` of the foliation degenerates when moving
/// in the direction of `sign(rho)`, if it does.
pub fn node_critical_distance<T: Real>(b: &Mat2<T>, forward: bool) -> Option<T> {
    let (k_max, k_min) = b.real_eigenvalues();
    if forward {
        (k_min < -T::one()).then(|| (-T::one() / k_min).atanh())
    } else {
        (k_max > T::one()).then(|| -(T::one() / k_max).atanh())
    }
}

/// Closest breakdown in the given direction: `(node, critical ρ)`.
pub fn breakdown_distance<T: Real>(forms: &FormField<T>, forward: bool) -> Option<(usize, T)> {
    forms
        .shape
        .iter()
        .enumerate()
        .filter_map(|(k, b)| node_critical_distance(b, forward).map(|r| (k, r)))
        .min_by(|a, b| a.1.abs().partial_cmp(&b.1.abs()).unwrap_or(std::cmp::Ordering::Equal))
}

/// Fails if the foliation degenerates strictly between 0 and `rho`. Reaching
/// the critical distance exactly (a leaf collapsing to a point) is allowed.
pub fn check_distance<T: Real>(forms: &FormField<T>, rho: T) -> Result<()> {
    if rho == T::zero() {
        return Ok(());
    }
    if let Some((node, crit)) = breakdown_distance(forms, rho > T::zero()) {
        let slack = lit::<T>(1e-12) * (T::one() + crit.abs());
        if rho.abs() > crit.abs() + slack {
            return Err(Error::FoliationBreakdown { node, critical_rho: crit.to_f64_lossy() });
        }
    }
    Ok(())
}

/// First fundamental form of `S_ρ` pulled back to the parameters of `S`.
pub fn metric_at_distance<T: Real>(forms: &FormField<T>, rho: T) -> Result<Vec<Mat2<T>>> {
    check_distance(forms, rho)?;
    Ok(forms
        .first
        .iter()
        .zip(&forms.shape)
        .map(|(i, b)| i.pullback(&factors(b, rho).0))
        .collect())
}

/// Complete forms of `S_ρ`, with `da_ρ = det P · da`.
pub fn forms_at_distance<T: Real>(forms: &FormField<T>, rho: T) -> Result<FormField<T>> {
    check_distance(forms, rho)?;
    let mut first = Vec::with_capacity(forms.len());
    let mut shape = Vec::with_capacity(forms.len());
    let mut da = Vec::with_capacity(forms.len());
    for k in 0..forms.len() {
        let (p, q) = factors(&forms.shape[k], rho);
        let inv = p.inverse().ok_or(Error::FoliationBreakdown { node: k, critical_rho: rho.to_f64_lossy() })?;
        first.push(forms.first[k].pullback(&p));
        shape.push(inv * q);
        da.push(p.det() * forms.da[k]);
    }
    let second = first.iter().zip(&shape).map(|(i, b)| (*i * *b).symmetrized()).collect();
    let mut out = FormField::from_forms(forms.grid.clone(), first, second)?;
    out.da = da;
    Ok(out)
}

/// `A(ρ) = ∫(cosh²ρ + cosh ρ sinh ρ H + sinh²ρ K_e) da`.
pub fn area_at_distance<T: Real>(forms: &FormField<T>, rho: T) -> Result<T> {
    check_distance(forms, rho)?;
    let (sh, ch) = (rho.sinh(), rho.cosh());
    Ok(forms.integrate(|k| ch * ch + ch * sh * forms.mean[k] + sh * sh * forms.extrinsic[k]))
}

/// `∫_{S_ρ} H da = ∫_S (sinh 2ρ (1 + K_e) + cosh 2ρ H) da`.
pub fn mean_curvature_integral_at_distance<T: Real>(forms: &FormField<T>, rho: T) -> Result<T> {
    check_distance(forms, rho)?;
    let (sh2, ch2) = ((rho + rho).sinh(), (rho + rho).cosh());
    Ok(forms.integrate(|k| sh2 * (T::one() + forms.extrinsic[k]) + ch2 * forms.mean[k]))
}

/// `B_ρ = (E + e^{−2ρ}B*)⁻¹(E − e^{−2ρ}B*)` from data at infinity.
pub fn shape_operator_at_distance<T: Real>(inf: &InfinityData<T>, rho: T) -> Result<Vec<Mat2<T>>> {
    let s = (-(rho + rho)).exp();
    let e = Mat2::identity();
    inf.shape
        .iter()
        .enumerate()
        .map(|(k, bs)| {
            let p = e + bs.scale(s);
            p.solve(&(e - bs.scale(s))).ok_or(Error::FoliationBreakdown { node: k, critical_rho: rho.to_f64_lossy() })
        })
        .collect()
}

/// Moves every node of `patch` a signed distance `rho` along its normal.
/// The result carries the transported normals, and exact forms when the
/// input has them.
pub fn flow_surface<T: Real>(patch: &SurfacePatch<T>, rho: T) -> Result<SurfacePatch<T>> {
    let forms = patch.compute_forms()?;
    check_distance(&forms, rho)?;
    let normals = match &patch.normals {
        Some(n) => n.clone(),
        None => patch.discrete_normals()?,
    };
    let states = patch
        .points
        .par_iter()
        .zip(normals.par_iter())
        .map(|(p, n)| geodesic_flow(p, n, rho))
        .collect::<Result<Vec<_>>>()?;
    let (points, velocities): (Vec<_>, Vec<_>) = states.into_iter().map(|s| (s.point, s.velocity)).unzip();
    let mut out = SurfacePatch::new(patch.grid.clone(), points, patch.orientation)?.with_normals(velocities);
    if let Some(exact) = &patch.exact {
        out = out.with_exact(forms_at_distance(exact, rho)?);
    }
    Ok(out)
}

/// One row of a foliation table.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct DistanceRow {
    pub rho: f64,
    pub area: f64,
    pub mean_integral: f64,
    pub volume: f64,
}

/// `(ρ, A(ρ), ∫H, V(ρ))` along the foliation, with `V` the slab volume
/// between `S` and `S_ρ`.
pub fn distance_table<T: Real>(forms: &FormField<T>, rhos: &[T]) -> Result<Vec<DistanceRow>> {
    let moments = forms.moments();
    rhos.par_iter()
        .map(|&rho| {
            Ok(DistanceRow {
                rho: rho.to_f64_lossy(),
                area: area_at_distance(forms, rho)?.to_f64_lossy(),
                mean_integral: mean_curvature_integral_at_distance(forms, rho)?.to_f64_lossy(),
                volume: slab_volume_closed(&moments, rho).to_f64_lossy(),
            })
        })
        .collect()
}

pub fn write_distance_csv(rows: &[DistanceRow], out: impl Write) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    for r in rows {
        w.serialize(r)?;
    }
    w.flush()?;
    Ok(())
}
