//! Fundamental forms "at infinity": the rescaled limits of the equidistant
//! foliation data, their inverse, and their first-order linearization.

use crate::error::{Error, Result};
use crate::grid::{codazzi_norms, intrinsic_curvature, Grid};
use crate::linalg::Mat2;
use crate::patch::FormField;
use crate::scalar::{lit, Real};

/// Per-node data at infinity.
#[derive(Debug, Clone)]
pub struct InfinityData<T> {
    pub grid: Grid<T>,
    pub first: Vec<Mat2<T>>,
    pub second: Vec<Mat2<T>>,
    pub third: Vec<Mat2<T>>,
    /// `B*`; zero where `valid` is false.
    pub shape: Vec<Mat2<T>>,
    pub mean: Vec<T>,
    pub curvature: Vec<T>,
    /// `II*₀ = II* − (H*/2) I*`.
    pub traceless: Vec<Mat2<T>>,
    pub da: Vec<T>,
    /// Nodes where `E + B` is invertible and `B*`, `K*` are defined.
    pub valid: Vec<bool>,
}

/// `(I*, II*, III*)` for one node with forms `I` and shape operator `B`.
pub fn star_forms<T: Real>(i: &Mat2<T>, b: &Mat2<T>) -> (Mat2<T>, Mat2<T>, Mat2<T>) {
    let half = lit::<T>(0.5);
    let e = Mat2::identity();
    let p = e + *b;
    let m = e - *b;
    (i.pullback(&p).scale(half), i.pair(&m, &p).scale(half), i.pullback(&m).scale(half))
}

/// `B* = (E + B)⁻¹(E − B)`.
pub fn star_shape<T: Real>(b: &Mat2<T>) -> Option<Mat2<T>> {
    let e = Mat2::identity();
    (e + *b).solve(&(e - *b))
}

/// `(I, II, B)` from `I*` and `B*`, the inverse of [`star_forms`].
pub fn unstar_forms<T: Real>(istar: &Mat2<T>, bstar: &Mat2<T>) -> Option<(Mat2<T>, Mat2<T>, Mat2<T>)> {
    let half = lit::<T>(0.5);
    let e = Mat2::identity();
    let p = e + *bstar;
    let m = e - *bstar;
    let b = p.solve(&m)?;
    Some((istar.pullback(&p).scale(half), istar.pair(&p, &m).scale(half), b))
}

/// `tr(ref⁻¹ A ref⁻¹ B)`.
pub fn bracket<T: Real>(a: &Mat2<T>, b: &Mat2<T>, reference: &Mat2<T>) -> Result<T> {
    let inv = reference
        .inverse()
        .filter(|_| reference.is_positive_definite())
        .ok_or_else(|| Error::Domain("bracket reference form is not positive definite".into()))?;
    Ok((inv * *a * inv * *b).trace())
}

/// Forward transform. Nodes with singular `E + B` are flagged, not fatal.
pub fn to_infinity<T: Real>(forms: &FormField<T>) -> InfinityData<T> {
    let half = lit::<T>(0.5);
    let n = forms.len();
    let mut out = InfinityData {
        grid: forms.grid.clone(),
        first: Vec::with_capacity(n),
        second: Vec::with_capacity(n),
        third: Vec::with_capacity(n),
        shape: Vec::with_capacity(n),
        mean: Vec::with_capacity(n),
        curvature: Vec::with_capacity(n),
        traceless: Vec::with_capacity(n),
        da: Vec::with_capacity(n),
        valid: Vec::with_capacity(n),
    };
    for k in 0..n {
        let b = &forms.shape[k];
        let (i1, i2, i3) = star_forms(&forms.first[k], b);
        let denom = (Mat2::identity() + *b).det();
        let bs = star_shape(b).filter(|_| denom != T::zero());
        let (bs, ok) = match bs {
            Some(bs) => (bs, true),
            None => (Mat2::zero(), false),
        };
        let h = bs.trace();
        out.first.push(i1);
        out.second.push(i2);
        out.third.push(i3);
        out.shape.push(bs);
        out.mean.push(h);
        out.curvature.push(if ok { (forms.gauss[k] + forms.gauss[k]) / denom } else { T::zero() });
        out.traceless.push(i2 - i1.scale(h * half));
        out.da.push(half * denom * forms.da[k]);
        out.valid.push(ok);
    }
    out
}

impl<T: Real> InfinityData<T> {
    /// Assembles data at infinity from `I*`, `II*`, an independently known
    /// `K*` and area weights.
    pub fn from_starred(grid: Grid<T>, first: Vec<Mat2<T>>, second: Vec<Mat2<T>>, curvature: Vec<T>, da: Vec<T>) -> Result<Self> {
        let half = lit::<T>(0.5);
        let mut third = Vec::with_capacity(first.len());
        let mut shape = Vec::with_capacity(first.len());
        let mut mean = Vec::with_capacity(first.len());
        let mut traceless = Vec::with_capacity(first.len());
        for (k, (i1, i2)) in first.iter().zip(&second).enumerate() {
            let bs = i1
                .solve(i2)
                .filter(|_| i1.is_positive_definite())
                .ok_or_else(|| Error::Discretization { node: k, detail: "I* is not positive definite".into() })?;
            third.push((*i2 * bs).symmetrized());
            let h = bs.trace();
            shape.push(bs);
            mean.push(h);
            traceless.push(*i2 - i1.scale(h * half));
        }
        let valid = vec![true; first.len()];
        Ok(Self { grid, first, second, third, shape, mean, curvature, traceless, da, valid })
    }

    pub fn len(&self) -> usize {
        self.first.len()
    }

    pub fn is_empty(&self) -> bool {
        self.first.is_empty()
    }

    /// Errors on the first node where `B*` is undefined.
    pub fn require_valid(&self) -> Result<()> {
        match self.valid.iter().position(|&v| !v) {
            Some(node) => Err(Error::TransformSingular { node }),
            None => Ok(()),
        }
    }

    pub fn integrate(&self, f: impl Fn(usize) -> T) -> T {
        self.da.iter().enumerate().map(|(k, &w)| if w == T::zero() { T::zero() } else { f(k) * w }).sum()
    }

    fn masked_max(&self, f: impl Fn(usize) -> T) -> T {
        (0..self.len())
            .filter(|&k| self.valid[k] && self.grid.is_interior(k))
            .map(|k| f(k).abs())
            .fold(T::zero(), T::max)
    }

    /// `max |H* + K*|` over valid nodes.
    pub fn mean_curvature_residual(&self) -> T {
        self.masked_max(|k| self.mean[k] + self.curvature[k])
    }

    /// `max |tr_{I*} II*₀|`.
    pub fn traceless_residual(&self) -> T {
        self.masked_max(|k| self.first[k].solve(&self.traceless[k]).map_or(T::nan(), |m| m.trace()))
    }

    /// `max ‖III* − I*(B*·, B*·)‖`.
    pub fn third_form_residual(&self) -> T {
        self.masked_max(|k| (self.third[k] - self.first[k].pullback(&self.shape[k])).max_abs())
    }
}

/// Inverse transform back to boundary data.
pub fn from_infinity<T: Real>(inf: &InfinityData<T>) -> Result<FormField<T>> {
    let mut first = Vec::with_capacity(inf.len());
    let mut shape = Vec::with_capacity(inf.len());
    for k in 0..inf.len() {
        let (i, _, b) = unstar_forms(&inf.first[k], &inf.shape[k]).ok_or(Error::InverseTransform { node: k })?;
        first.push(i);
        shape.push(b);
    }
    FormField::from_operator(inf.grid.clone(), first, shape)
}

/// `K* = 2K/(1 + H + K_e)` per node.
pub fn curvature_at_infinity<T: Real>(forms: &FormField<T>) -> Result<Vec<T>> {
    (0..forms.len())
        .map(|k| {
            let denom = T::one() + forms.mean[k] + forms.extrinsic[k];
            if denom == T::zero() {
                Err(Error::TransformSingular { node: k })
            } else {
                Ok((forms.gauss[k] + forms.gauss[k]) / denom)
            }
        })
        .collect()
}

/// `H* = tr B*` per node.
pub fn mean_curvature_at_infinity<T: Real>(inf: &InfinityData<T>) -> Vec<T> {
    inf.shape.iter().map(|b| b.trace()).collect()
}

/// Curvature of the sampled `I*` field computed from the metric alone.
pub fn intrinsic_curvature_at_infinity<T: Real>(inf: &InfinityData<T>) -> Result<Vec<T>> {
    intrinsic_curvature(&inf.grid, &inf.first)
}

/// Maximum norm of `d^{∇*}B*` for the Levi-Civita connection of `I*`.
pub fn codazzi_star_residual<T: Real>(inf: &InfinityData<T>) -> Result<T> {
    let r = codazzi_norms(&inf.grid, &inf.first, &inf.shape, Some(&inf.valid))?;
    Ok(crate::grid::interior_max(&inf.grid, &r))
}

/// `I_ρ = ½e^{2ρ}I* + II* + ½e^{−2ρ}III*`.
pub fn metric_from_infinity_at_rho<T: Real>(inf: &InfinityData<T>, rho: T) -> Vec<Mat2<T>> {
    let up = lit::<T>(0.5) * (rho + rho).exp();
    let down = lit::<T>(0.5) * (-(rho + rho)).exp();
    (0..inf.len())
        .map(|k| inf.first[k].scale(up) + inf.second[k] + inf.third[k].scale(down))
        .collect()
}

/// First-order variation of the data at infinity at one node.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StarVariation<T> {
    pub first: Mat2<T>,
    pub second: Mat2<T>,
    pub shape: Mat2<T>,
    pub mean: T,
}

/// Exact linearization of the forward transform at `(I, II)` in the
/// direction `(δI, δII)`.
pub fn linearize<T: Real>(i: &Mat2<T>, ii: &Mat2<T>, di: &Mat2<T>, dii: &Mat2<T>) -> Option<StarVariation<T>> {
    let half = lit::<T>(0.5);
    let inv = i.inverse()?;
    let b = inv * *ii;
    let db = inv * (*dii - *di * b);
    let diii = *dii * b + b.transpose() * *dii - b.transpose() * *di * b;
    let pinv = (Mat2::identity() + b).inverse()?;
    let dbs = (pinv * db * pinv).scale(-lit::<T>(2.0));
    Some(StarVariation {
        first: (*di + dii.scale(lit(2.0)) + diii).scale(half).symmetrized(),
        second: (*di - diii).scale(half).symmetrized(),
        shape: dbs,
        mean: dbs.trace(),
    })
}
