//! Maximization of `F = W − (λ/4)∫da*` over conformal factors of a
//! Liouville torus at fixed area.

use std::io::Write;

use num_complex::Complex;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::grid::Spectral2;
use crate::liouville::LiouvilleField;
use crate::scalar::{lit, Real};
use crate::wvolume::{w_volume, SlabSpec};

/// Gradient density constant `c` in `dF = ∫c(K* + λ)v da*` for
/// `I* ↦ e^{2εv}I*`, as measured by [`calibrate_gradient`].
pub const GRADIENT_CONSTANT: f64 = -0.5;

/// Current iterate `I* = e^{2u}e^{φ₀}|dz|²`.
#[derive(Debug, Clone)]
pub struct ConformalState<T> {
    pub base: LiouvilleField<T>,
    pub u: Vec<T>,
    pub lambda: T,
    pub area_target: T,
    /// Distance of the Epstein leaf bounding the capped region.
    pub rho_ref: T,
}

impl<T: Real> ConformalState<T> {
    /// Starts at `u = 0` with the current area as target.
    pub fn new(base: LiouvilleField<T>, rho_ref: T) -> Result<Self> {
        if !base.is_torus() {
            return Err(Error::Unsupported("extremization runs on torus fields".into()));
        }
        let u = vec![T::zero(); base.phi.len()];
        let mut state = Self { base, u, lambda: T::zero(), area_target: T::zero(), rho_ref };
        state.area_target = state.area()?;
        state.lambda = state.multiplier()?;
        Ok(state)
    }

    pub fn with_area_target(mut self, area: T) -> Result<Self> {
        if !(area > T::zero()) {
            return Err(Error::Domain("area target must be positive".into()));
        }
        self.area_target = area;
        self.project()?;
        Ok(self)
    }

    pub fn field(&self) -> LiouvilleField<T> {
        let two = lit::<T>(2.0);
        self.base.with_phi(self.base.phi.iter().zip(&self.u).map(|(p, u)| *p + two * *u).collect())
    }

    fn with_u(&self, u: Vec<T>) -> Self {
        Self { u, ..self.clone() }
    }

    /// Per-node `da*` weights.
    pub fn area_weights(&self) -> Vec<T> {
        let cell = self.base.cell_area() / T::of_usize(self.u.len());
        self.field().phi.iter().map(|p| p.exp() * cell).collect()
    }

    pub fn area(&self) -> Result<T> {
        Ok(self.area_weights().into_iter().sum())
    }

    /// `K* = −2e^{−φ}φ_zz̄`.
    pub fn curvature(&self) -> Result<Vec<T>> {
        Ok(self.field().infinity_data()?.curvature)
    }

    /// `λ = −(∫K*da*)/(∫da*)`.
    pub fn multiplier(&self) -> Result<T> {
        let (k, w) = (self.curvature()?, self.area_weights());
        let area: T = w.iter().copied().sum();
        Ok(-k.iter().zip(&w).map(|(k, w)| *k * *w).sum::<T>() / area)
    }

    pub fn gauss_bonnet(&self) -> Result<T> {
        let (k, w) = (self.curvature()?, self.area_weights());
        Ok(k.iter().zip(&w).map(|(k, w)| *k * *w).sum())
    }

    /// `max |K* + λ|`.
    pub fn residual(&self) -> Result<T> {
        let k = self.curvature()?;
        Ok(k.iter().map(|k| (*k + self.lambda).abs()).fold(T::zero(), T::max))
    }

    /// Area-weighted standard deviation of `K*`.
    pub fn curvature_stddev(&self) -> Result<T> {
        let (k, w) = (self.curvature()?, self.area_weights());
        let area: T = w.iter().copied().sum();
        let mean = k.iter().zip(&w).map(|(k, w)| *k * *w).sum::<T>() / area;
        Ok((k.iter().zip(&w).map(|(k, w)| (*k - mean) * (*k - mean) * *w).sum::<T>() / area).sqrt())
    }

    /// Rescales `u ↦ u + ½ln(A_target/A)`.
    pub fn project(&mut self) -> Result<()> {
        let shift = lit::<T>(0.5) * (self.area_target / self.area()?).ln();
        self.u.iter_mut().for_each(|u| *u = *u + shift);
        Ok(())
    }
}

/// `F = W − (λ/4)∫da*` with `W` the W-volume of the capped region above the
/// Epstein leaf at `rho_ref`.
pub fn objective<T: Real>(state: &ConformalState<T>) -> Result<T> {
    let field = state.field();
    field.leaf_regularity(state.rho_ref)?;
    let patch = field.epstein_embedding(state.rho_ref)?;
    let forms = patch.compute_forms()?;
    let top = patch.points.iter().map(|p| p.xi).fold(T::zero(), T::max);
    let depth = lit::<T>(2.0) * top;
    let w: T = lit(w_volume(&SlabSpec::Capped { patch: &patch, forms: &forms, depth })?.w);
    Ok(w - lit::<T>(0.25) * state.lambda * state.area()?)
}

/// `L²(da*)` gradient density `c(K* + λ)` with respect to `u`.
pub fn gradient<T: Real>(state: &ConformalState<T>) -> Result<Vec<T>> {
    let c = lit::<T>(GRADIENT_CONSTANT);
    Ok(state.curvature()?.into_iter().map(|k| c * (k + state.lambda)).collect())
}

/// Ratio of the central difference of `F` along `v` to `∫(K* + λ)v da*`.
pub fn calibrate_gradient<T: Real>(state: &ConformalState<T>, v: &[T], eps: T) -> Result<T> {
    let shifted = |s: T| state.with_u(state.u.iter().zip(v).map(|(u, v)| *u + s * *v).collect());
    let fd = (objective(&shifted(eps))? - objective(&shifted(-eps))?) / (eps + eps);
    let (k, w) = (state.curvature()?, state.area_weights());
    let pairing: T = (0..v.len()).map(|i| (k[i] + state.lambda) * v[i] * w[i]).sum();
    Ok(fd / pairing)
}

/// Flat Laplacian `Δ₀ = ∂²ₓ + ∂²ᵧ` in Fourier: returns `−Δ₀` symbols per mode.
fn flat_symbols<T: Real>(field: &LiouvilleField<T>, spec: &Spectral2<T>) -> Vec<T> {
    let (n, m) = (field.n, field.m);
    let (w1, w2) = (field.omega1, field.omega2);
    // Metric G = JᵀJ of the lattice parameters; −Δ₀ ↦ kᵀG⁻¹k.
    let (g11, g12, g22) = (w1.norm_sqr(), (w1.conj() * w2).re, w2.norm_sqr());
    let det = g11 * g22 - g12 * g12;
    let (hu, hv) = (T::one() / T::of_usize(n), T::one() / T::of_usize(m));
    let mut out = Vec::with_capacity(n * m);
    for q in 0..m {
        for p in 0..n {
            let (ku, _, kv, _) = spec.symbols(p, q, hu, hv);
            out.push((g22 * ku * ku - lit::<T>(2.0) * g12 * ku * kv + g11 * kv * kv) / det);
        }
    }
    out
}

fn apply_symbol<T: Real>(spec: &Spectral2<T>, f: &[T], symbol: impl Fn(usize) -> T) -> Vec<T> {
    let mut hat = spec.forward(f);
    hat.iter_mut().enumerate().for_each(|(k, z)| *z = *z * symbol(k));
    spec.inverse(hat).into_iter().map(|z| z.re).collect()
}

/// Positive Laplacian of `I*`, `Δv = −4e^{−φ}v_zz̄`.
pub fn laplacian<T: Real>(state: &ConformalState<T>, v: &[T]) -> Result<Vec<T>> {
    let field = state.field();
    let vz = field.with_phi(v.to_vec()).complex_derivatives()?;
    Ok(field.phi.iter().zip(&vz.zzbar).map(|(p, q)| -lit::<T>(4.0) * (-*p).exp() * *q).collect())
}

/// `max |δK* − (−2vK* + Δv)|` for `φ ↦ φ + 2εv`, with `δK*` by a central
/// difference.
pub fn curvature_variation_residual<T: Real>(state: &ConformalState<T>, v: &[T], eps: T) -> Result<T> {
    let shifted = |s: T| state.with_u(state.u.iter().zip(v).map(|(u, v)| *u + s * *v).collect());
    let (kp, km) = (shifted(eps).curvature()?, shifted(-eps).curvature()?);
    let k = state.curvature()?;
    let lap = laplacian(state, v)?;
    let two = lit::<T>(2.0);
    Ok((0..v.len())
        .map(|i| ((kp[i] - km[i]) / (eps + eps) - (-two * v[i] * k[i] + lap[i])).abs())
        .fold(T::zero(), T::max))
}

/// Both evaluations of the second variation of `F` along `(u, v)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct HessianForm {
    /// `½∫(2K*uv − (Δv)u) da*`.
    pub laplacian_route: f64,
    /// `½∫(−2λuv − ⟨du, dv⟩) da*`.
    pub gradient_route: f64,
}

/// Conformal Hessian at a critical state.
pub fn hessian_quadform<T: Real>(state: &ConformalState<T>, u: &[T], v: &[T], tol: T) -> Result<HessianForm> {
    let r = state.residual()?;
    if r > tol {
        return Err(Error::Precondition(format!("state is not critical: max |K* + λ| = {r}")));
    }
    let field = state.field();
    let k = state.curvature()?;
    let w = state.area_weights();
    let lap = laplacian(state, v)?;
    let (du, dv) = (field.with_phi(u.to_vec()).complex_derivatives()?, field.with_phi(v.to_vec()).complex_derivatives()?);
    let cell = field.cell_area() / T::of_usize(u.len());
    let (half, two, four) = (lit::<T>(0.5), lit::<T>(2.0), lit::<T>(4.0));
    let mut a = T::zero();
    let mut b = T::zero();
    for i in 0..u.len() {
        a = a + (two * k[i] * u[i] * v[i] - lap[i] * u[i]) * w[i];
        // ⟨du, dv⟩da* is conformally invariant: 4Re(u_z v̄_z) dx dy.
        b = b - two * state.lambda * u[i] * v[i] * w[i] - four * (du.z[i] * dv.z[i].conj()).re * cell;
    }
    Ok(HessianForm { laplacian_route: (half * a).to_f64_lossy(), gradient_route: (half * b).to_f64_lossy() })
}

/// Second central difference of `F` along `v` (area constraint off).
pub fn hessian_finite_difference<T: Real>(state: &ConformalState<T>, v: &[T], eps: T) -> Result<T> {
    let shifted = |s: T| state.with_u(state.u.iter().zip(v).map(|(u, v)| *u + s * *v).collect());
    let (fp, f0, fm) = (objective(&shifted(eps))?, objective(state)?, objective(&shifted(-eps))?);
    Ok((fp - f0 - f0 + fm) / (eps * eps))
}

/// Removes the `da*`-weighted mean so that `v` is area-neutral to first order.
pub fn area_neutral<T: Real>(state: &ConformalState<T>, v: &[T]) -> Vec<T> {
    let w = state.area_weights();
    let area: T = w.iter().copied().sum();
    let mean = v.iter().zip(&w).map(|(v, w)| *v * *w).sum::<T>() / area;
    v.iter().map(|v| *v - mean).collect()
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ExtremizeOptions {
    pub tol: f64,
    pub max_iterations: usize,
    pub max_halvings: usize,
    /// Shift `β` in the preconditioner `2/(β + |k|²)`.
    pub precondition_shift: f64,
    pub armijo: f64,
}

impl Default for ExtremizeOptions {
    fn default() -> Self {
        Self { tol: 1e-6, max_iterations: 200, max_halvings: 30, precondition_shift: 1.0, armijo: 1e-4 }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct IterationLog {
    pub iteration: usize,
    pub objective: f64,
    pub residual: f64,
    pub step: f64,
    pub lambda: f64,
    pub gauss_bonnet: f64,
    pub area: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ExtremizeReport {
    pub converged: bool,
    pub iterations: usize,
    pub lambda: f64,
    pub residual: f64,
    pub curvature_stddev: f64,
    pub log: Vec<IterationLog>,
}

impl ExtremizeReport {
    pub fn write_json(&self, out: impl Write) -> Result<()> {
        serde_json::to_writer_pretty(out, self)?;
        Ok(())
    }

    /// Largest decrease of `F` between consecutive accepted steps.
    pub fn max_decrease(&self) -> f64 {
        self.log.windows(2).map(|w| w[0].objective - w[1].objective).fold(0.0, f64::max)
    }

    /// Largest drift of `∫K*da*` from its initial value.
    pub fn gauss_bonnet_drift(&self) -> f64 {
        let first = self.log.first().map_or(0.0, |l| l.gauss_bonnet);
        self.log.iter().map(|l| (l.gauss_bonnet - first).abs()).fold(0.0, f64::max)
    }
}

/// Preconditioned projected gradient ascent with backtracking on `F`.
pub fn run_extremization<T: Real>(mut state: ConformalState<T>, opts: &ExtremizeOptions) -> Result<(ConformalState<T>, ExtremizeReport)> {
    let field = state.base.clone();
    let spec = Spectral2::new(field.n, field.m);
    let symbols = flat_symbols(&field, &spec);
    let shift: T = lit(opts.precondition_shift);
    let tol: T = lit(opts.tol);
    state.project()?;
    state.lambda = state.multiplier()?;
    let mut f = objective(&state)?;
    let mut log = Vec::new();
    let mut step = T::one();
    let record = |state: &ConformalState<T>, it: usize, f: T, step: T| -> Result<IterationLog> {
        Ok(IterationLog {
            iteration: it,
            objective: f.to_f64_lossy(),
            residual: state.residual()?.to_f64_lossy(),
            step: step.to_f64_lossy(),
            lambda: state.lambda.to_f64_lossy(),
            gauss_bonnet: state.gauss_bonnet()?.to_f64_lossy(),
            area: state.area()?.to_f64_lossy(),
        })
    };
    log.push(record(&state, 0, f, T::zero())?);
    let mut iterations = 0;
    while state.residual()? > tol && iterations < opts.max_iterations {
        let g = gradient(&state)?;
        let w = state.area_weights();
        let cell = field.cell_area() / T::of_usize(w.len());
        // Flat L² gradient, then Sobolev smoothing.
        let flat: Vec<T> = g.iter().zip(&w).map(|(g, w)| *g * *w / cell).collect();
        let two = lit::<T>(2.0);
        let dir = apply_symbol(&spec, &flat, |k| two / (shift + symbols[k]));
        let slope: T = (0..dir.len()).map(|i| g[i] * dir[i] * w[i]).sum();
        let mut t = T::one().min(step + step);
        let mut accepted: Option<ConformalState<T>> = None;
        for _ in 0..=opts.max_halvings {
            let mut trial = state.with_u(state.u.iter().zip(&dir).map(|(u, d)| *u + t * *d).collect());
            trial.project()?;
            match objective(&trial) {
                Ok(ft) if ft >= f + lit::<T>(opts.armijo) * t * slope => {
                    accepted = Some(trial);
                    break;
                }
                Ok(_) | Err(Error::Regularity { .. }) => t = t * lit::<T>(0.5),
                Err(e) => return Err(e),
            }
        }
        let Some(next) = accepted else {
            return Err(Error::LineSearch(iterations));
        };
        iterations += 1;
        state = next;
        step = t;
        state.lambda = state.multiplier()?;
        // Re-evaluate at the updated multiplier so the logged F is consistent.
        f = objective(&state)?;
        log.push(record(&state, iterations, f, t)?);
    }
    let residual = state.residual()?;
    let report = ExtremizeReport {
        converged: residual <= tol,
        iterations,
        lambda: state.lambda.to_f64_lossy(),
        residual: residual.to_f64_lossy(),
        curvature_stddev: state.curvature_stddev()?.to_f64_lossy(),
        log,
    };
    Ok((state, report))
}

/// Random smooth test direction with wavenumbers up to `max_k`.
pub fn random_direction<T: Real>(field: &LiouvilleField<T>, rng: &mut impl rand::Rng, max_k: i32) -> Vec<T> {
    let series = crate::patch::TrigSeries::<T>::random(rng, max_k, 1.0);
    let (w1, w2) = (field.omega1, field.omega2);
    let det = (w1.conj() * w2).im;
    (0..field.phi.len())
        .map(|k| {
            // Lattice parameters of z, so the direction is periodic.
            let z: Complex<T> = field.node(k);
            let s = (z.re * w2.im - z.im * w2.re) / det;
            let t = (w1.re * z.im - w1.im * z.re) / det;
            series.eval(s, t)
        })
        .collect()
}
