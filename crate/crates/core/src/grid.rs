//! Node grids, finite-difference and spectral derivatives, and the intrinsic
//! tensor calculus (Christoffel symbols, Brioschi curvature, Codazzi
//! residuals) evaluated on sampled 2×2 fields.

use std::sync::Arc;

use num_complex::Complex;
use rustfft::{Fft, FftPlanner};

use crate::error::{Error, Result};
use crate::linalg::{Mat2, Vec3};
use crate::scalar::{lit, Real};

/// How the parameter rectangle closes up.
#[derive(Debug, Clone, PartialEq)]
pub enum Topology<T> {
    /// Doubly periodic cell. Crossing the `u` (resp. `v`) seam adds the
    /// horizontal translation `shift_u` (resp. `shift_v`) to embedding samples;
    /// scalar fields wrap without offset.
    Periodic { shift_u: Vec3<T>, shift_v: Vec3<T> },
    /// Rectangle whose outer `ghost` rings are excluded from integrals and
    /// residuals.
    Bordered { ghost: usize },
    /// Closed analytic surface sampled at quadrature nodes. Only exact data is
    /// attached to such grids; finite differences are unavailable.
    Closed,
}

/// Derivative discretization used on a grid.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum DiffScheme {
    /// Second-order central differences (one-sided at bordered edges).
    #[default]
    Central,
    /// Trigonometric interpolation; periodic grids only.
    Spectral,
}

/// Uniform `n × m` node grid with spacing `(hu, hv)`; node `(i, j)` is stored
/// at `j * n + i`.
#[derive(Debug, Clone, PartialEq)]
pub struct Grid<T> {
    pub n: usize,
    pub m: usize,
    pub hu: T,
    pub hv: T,
    pub topology: Topology<T>,
    pub scheme: DiffScheme,
}

/// First and second partial derivatives of a scalar node field.
#[derive(Debug, Clone)]
pub struct Derivs<T> {
    pub u: Vec<T>,
    pub v: Vec<T>,
    pub uu: Vec<T>,
    pub uv: Vec<T>,
    pub vv: Vec<T>,
}

impl<T: Real> Grid<T> {
    pub fn periodic(n: usize, m: usize, hu: T, hv: T, shift_u: Vec3<T>, shift_v: Vec3<T>) -> Self {
        Self { n, m, hu, hv, topology: Topology::Periodic { shift_u, shift_v }, scheme: DiffScheme::Central }
    }

    pub fn bordered(n: usize, m: usize, hu: T, hv: T, ghost: usize) -> Self {
        Self { n, m, hu, hv, topology: Topology::Bordered { ghost }, scheme: DiffScheme::Central }
    }

    pub fn closed(n: usize, m: usize, hu: T, hv: T) -> Self {
        Self { n, m, hu, hv, topology: Topology::Closed, scheme: DiffScheme::Central }
    }

    pub fn with_scheme(mut self, scheme: DiffScheme) -> Self {
        self.scheme = scheme;
        self
    }

    pub fn len(&self) -> usize {
        self.n * self.m
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    #[inline]
    pub fn idx(&self, i: usize, j: usize) -> usize {
        j * self.n + i
    }

    #[inline]
    pub fn coords(&self, k: usize) -> (usize, usize) {
        (k % self.n, k / self.n)
    }

    pub fn is_periodic(&self) -> bool {
        matches!(self.topology, Topology::Periodic { .. })
    }

    /// Whether node `k` enters integrals and residual maxima.
    pub fn is_interior(&self, k: usize) -> bool {
        match self.topology {
            Topology::Bordered { ghost } => {
                let (i, j) = self.coords(k);
                i >= ghost && i + ghost < self.n && j >= ghost && j + ghost < self.m
            }
            _ => true,
        }
    }

    pub fn interior_nodes(&self) -> impl Iterator<Item = usize> + '_ {
        (0..self.len()).filter(move |&k| self.is_interior(k))
    }

    pub fn cell_area(&self) -> T {
        self.hu * self.hv
    }

    /// Validates the structural invariants (size, ghost margin, scheme).
    pub fn validate(&self) -> Result<()> {
        if self.n < 8 || self.m < 8 {
            return Err(Error::Domain(format!("grid {}x{} smaller than 8x8", self.n, self.m)));
        }
        if !(self.hu > T::zero() && self.hv > T::zero()) {
            return Err(Error::Domain("grid spacing must be positive".into()));
        }
        if let Topology::Bordered { ghost } = self.topology {
            if 2 * ghost + 1 > self.n.min(self.m) {
                return Err(Error::Domain("ghost margin leaves no interior nodes".into()));
            }
        }
        if self.scheme == DiffScheme::Spectral && !self.is_periodic() {
            return Err(Error::Domain("spectral derivatives need a periodic grid".into()));
        }
        Ok(())
    }

    /// All first and second partials of `f`.
    pub fn diff(&self, f: &[T]) -> Result<Derivs<T>> {
        debug_assert_eq!(f.len(), self.len());
        match (&self.topology, self.scheme) {
            (Topology::Closed, _) => {
                Err(Error::Unsupported("finite differences on a closed analytic grid".into()))
            }
            (Topology::Periodic { .. }, DiffScheme::Spectral) => Ok(Spectral2::new(self.n, self.m).derivs(f, self.hu, self.hv)),
            (Topology::Periodic { .. }, DiffScheme::Central) => Ok(self.central(f, true)),
            (Topology::Bordered { .. }, DiffScheme::Central) => Ok(self.central(f, false)),
            (Topology::Bordered { .. }, DiffScheme::Spectral) => {
                Err(Error::Domain("spectral derivatives need a periodic grid".into()))
            }
        }
    }

    fn central(&self, f: &[T], wrap: bool) -> Derivs<T> {
        let (n, m) = (self.n, self.m);
        let u = axis_first(f, n, m, Axis::U, self.hu, wrap);
        let v = axis_first(f, n, m, Axis::V, self.hv, wrap);
        let uu = axis_second(f, n, m, Axis::U, self.hu, wrap);
        let vv = axis_second(f, n, m, Axis::V, self.hv, wrap);
        let uv = axis_first(&v, n, m, Axis::U, self.hu, wrap);
        Derivs { u, v, uu, uv, vv }
    }
}

#[derive(Clone, Copy)]
enum Axis {
    U,
    V,
}

fn axis_first<T: Real>(f: &[T], n: usize, m: usize, axis: Axis, h: T, wrap: bool) -> Vec<T> {
    let two_h = h + h;
    let mut out = vec![T::zero(); n * m];
    for j in 0..m {
        for i in 0..n {
            let (p, len) = match axis {
                Axis::U => (i, n),
                Axis::V => (j, m),
            };
            let at = |q: usize| match axis {
                Axis::U => f[j * n + q],
                Axis::V => f[q * n + i],
            };
            out[j * n + i] = if p > 0 && p + 1 < len {
                (at(p + 1) - at(p - 1)) / two_h
            } else if wrap {
                (at((p + 1) % len) - at((p + len - 1) % len)) / two_h
            } else if p == 0 {
                (-lit::<T>(3.0) * at(0) + lit::<T>(4.0) * at(1) - at(2)) / two_h
            } else {
                (lit::<T>(3.0) * at(p) - lit::<T>(4.0) * at(p - 1) + at(p - 2)) / two_h
            };
        }
    }
    out
}

fn axis_second<T: Real>(f: &[T], n: usize, m: usize, axis: Axis, h: T, wrap: bool) -> Vec<T> {
    let h2 = h * h;
    let two = lit::<T>(2.0);
    let mut out = vec![T::zero(); n * m];
    for j in 0..m {
        for i in 0..n {
            let (p, len) = match axis {
                Axis::U => (i, n),
                Axis::V => (j, m),
            };
            let at = |q: usize| match axis {
                Axis::U => f[j * n + q],
                Axis::V => f[q * n + i],
            };
            out[j * n + i] = if p > 0 && p + 1 < len {
                (at(p + 1) - two * at(p) + at(p - 1)) / h2
            } else if wrap {
                (at((p + 1) % len) - two * at(p) + at((p + len - 1) % len)) / h2
            } else if p == 0 {
                (two * at(0) - lit::<T>(5.0) * at(1) + lit::<T>(4.0) * at(2) - at(3)) / h2
            } else {
                (two * at(p) - lit::<T>(5.0) * at(p - 1) + lit::<T>(4.0) * at(p - 2) - at(p - 3)) / h2
            };
        }
    }
    out
}

/// 2-D FFT plans for an `n × m` row-major field.
pub(crate) struct Spectral2<T: Real> {
    n: usize,
    m: usize,
    fwd_n: Arc<dyn Fft<T>>,
    inv_n: Arc<dyn Fft<T>>,
    fwd_m: Arc<dyn Fft<T>>,
    inv_m: Arc<dyn Fft<T>>,
}

impl<T: Real> Spectral2<T> {
    pub(crate) fn new(n: usize, m: usize) -> Self {
        let mut planner = FftPlanner::new();
        Self {
            n,
            m,
            fwd_n: planner.plan_fft_forward(n),
            inv_n: planner.plan_fft_inverse(n),
            fwd_m: planner.plan_fft_forward(m),
            inv_m: planner.plan_fft_inverse(m),
        }
    }

    fn transform(&self, data: &mut [Complex<T>], forward: bool) {
        let (n, m) = (self.n, self.m);
        let (row, col) = if forward { (&self.fwd_n, &self.fwd_m) } else { (&self.inv_n, &self.inv_m) };
        for chunk in data.chunks_mut(n) {
            row.process(chunk);
        }
        let mut column = vec![Complex::new(T::zero(), T::zero()); m];
        for i in 0..n {
            for j in 0..m {
                column[j] = data[j * n + i];
            }
            col.process(&mut column);
            for j in 0..m {
                data[j * n + i] = column[j];
            }
        }
    }

    pub(crate) fn forward(&self, f: &[T]) -> Vec<Complex<T>> {
        let mut data: Vec<Complex<T>> = f.iter().map(|&x| Complex::new(x, T::zero())).collect();
        self.transform(&mut data, true);
        data
    }

    /// Inverse transform including the `1/(nm)` normalization.
    pub(crate) fn inverse(&self, mut data: Vec<Complex<T>>) -> Vec<Complex<T>> {
        self.transform(&mut data, false);
        let norm = T::one() / T::of_usize(self.n * self.m);
        data.iter_mut().for_each(|z| *z = *z * norm);
        data
    }

    /// Signed wavenumber of index `p` on an axis of length `len`, and whether
    /// it is the Nyquist mode.
    fn wavenumber(p: usize, len: usize) -> (T, bool) {
        let nyquist = len % 2 == 0 && p == len / 2;
        let k = if p <= len / 2 { T::of_usize(p) } else { -T::of_usize(len - p) };
        (k, nyquist)
    }

    /// Angular wavenumbers `(ku, ku_first, kv, kv_first)` per mode; the
    /// `_first` variants zero the Nyquist mode for odd-order derivatives.
    pub(crate) fn symbols(&self, p: usize, q: usize, hu: T, hv: T) -> (T, T, T, T) {
        let two_pi = T::PI() + T::PI();
        let (ku, nyq_u) = Self::wavenumber(p, self.n);
        let (kv, nyq_v) = Self::wavenumber(q, self.m);
        let ku = two_pi * ku / (T::of_usize(self.n) * hu);
        let kv = two_pi * kv / (T::of_usize(self.m) * hv);
        let ku1 = if nyq_u { T::zero() } else { ku };
        let kv1 = if nyq_v { T::zero() } else { kv };
        (ku, ku1, kv, kv1)
    }

    pub(crate) fn derivs(&self, f: &[T], hu: T, hv: T) -> Derivs<T> {
        let hat = self.forward(f);
        let (n, m) = (self.n, self.m);
        let apply = |sym: &dyn Fn(T, T, T, T) -> Complex<T>| -> Vec<T> {
            let mut out = hat.clone();
            for q in 0..m {
                for p in 0..n {
                    let (ku, ku1, kv, kv1) = self.symbols(p, q, hu, hv);
                    out[q * n + p] = out[q * n + p] * sym(ku, ku1, kv, kv1);
                }
            }
            self.inverse(out).into_iter().map(|z| z.re).collect()
        };
        let zero = T::zero();
        Derivs {
            u: apply(&|_, ku1, _, _| Complex::new(zero, ku1)),
            v: apply(&|_, _, _, kv1| Complex::new(zero, kv1)),
            uu: apply(&|ku, _, _, _| Complex::new(-ku * ku, zero)),
            uv: apply(&|_, ku1, _, kv1| Complex::new(-ku1 * kv1, zero)),
            vv: apply(&|_, _, kv, _| Complex::new(-kv * kv, zero)),
        }
    }
}

/// Finite-difference weights for derivatives of order `0..=max_order` at
/// the origin from samples at `offsets` (Fornberg's recursion).
/// `weights[k][j]` multiplies the sample at `offsets[j]` for derivative `k`.
pub fn fd_weights<T: Real>(offsets: &[T], max_order: usize) -> Vec<Vec<T>> {
    let len = offsets.len();
    let mut c = vec![vec![T::zero(); max_order + 1]; len];
    let mut c1 = T::one();
    let mut c4 = offsets[0];
    c[0][0] = T::one();
    for i in 1..len {
        let mn = i.min(max_order);
        let mut c2 = T::one();
        let c5 = c4;
        c4 = offsets[i];
        for j in 0..i {
            let c3 = offsets[i] - offsets[j];
            c2 = c2 * c3;
            if j == i - 1 {
                for k in (1..=mn).rev() {
                    c[i][k] = c1 * (T::of_usize(k) * c[i - 1][k - 1] - c5 * c[i - 1][k]) / c2;
                }
                c[i][0] = -c1 * c5 * c[i - 1][0] / c2;
            }
            for k in (1..=mn).rev() {
                c[j][k] = (c4 * c[j][k] - T::of_usize(k) * c[j][k - 1]) / c3;
            }
            c[j][0] = c4 * c[j][0] / c3;
        }
        c1 = c2;
    }
    (0..=max_order).map(|k| (0..len).map(|j| c[j][k]).collect()).collect()
}

/// Centered high-order stencil of half-width `w` for derivatives up to
/// `max_order`, scaled for spacing `h`. Returns `stencils[k][q]` for offset
/// `q - w`.
pub fn centered_stencils<T: Real>(w: usize, max_order: usize, h: T) -> Vec<Vec<T>> {
    let offsets: Vec<T> = (0..=2 * w).map(|q| T::of_usize(q) - T::of_usize(w)).collect();
    let raw = fd_weights(&offsets, max_order);
    raw.into_iter()
        .enumerate()
        .map(|(k, row)| {
            let scale = h.powi(k as i32);
            row.into_iter().map(|wt| wt / scale).collect()
        })
        .collect()
}

/// Derivative of order `order` along one axis of an `n × m` complex field
/// from `2w + 1`-point Fornberg windows, centered in the interior and shifted
/// inward near the edges.
pub(crate) fn axis_derivative<T: Real>(
    f: &[Complex<T>],
    n: usize,
    m: usize,
    along_u: bool,
    order: usize,
    h: T,
    w: usize,
) -> Vec<Complex<T>> {
    let len = if along_u { n } else { m };
    let width = (2 * w + 1).min(len);
    let scale = h.powi(order as i32);
    let windows: Vec<(usize, Vec<T>)> = (0..len)
        .map(|p| {
            let lo = p.saturating_sub(w).min(len - width);
            let offsets: Vec<T> = (lo..lo + width).map(|q| T::of_usize(q) - T::of_usize(p)).collect();
            let weights = fd_weights(&offsets, order).swap_remove(order);
            (lo, weights.into_iter().map(|wt| wt / scale).collect())
        })
        .collect();
    let mut out = vec![Complex::new(T::zero(), T::zero()); n * m];
    for j in 0..m {
        for i in 0..n {
            let (p, i0) = if along_u { (i, j * n) } else { (j, i) };
            let stride = if along_u { 1 } else { n };
            let (lo, wts) = &windows[p];
            let mut acc = Complex::new(T::zero(), T::zero());
            for (q, &wt) in wts.iter().enumerate() {
                acc = acc + f[i0 + (lo + q) * stride] * wt;
            }
            out[j * n + i] = acc;
        }
    }
    out
}

/// Christoffel symbols `gamma[k][i][j] = Γ^k_ij` of a metric with partials
/// `dg[0] = ∂_u g`, `dg[1] = ∂_v g`.
pub fn christoffel<T: Real>(g: &Mat2<T>, dg: &[Mat2<T>; 2]) -> Option<[[[T; 2]; 2]; 2]> {
    let inv = g.inverse()?;
    let comp = |m: &Mat2<T>, i: usize, j: usize| match (i, j) {
        (0, 0) => m.a,
        (0, 1) => m.b,
        (1, 0) => m.c,
        _ => m.d,
    };
    let half = lit::<T>(0.5);
    let mut gamma = [[[T::zero(); 2]; 2]; 2];
    for k in 0..2 {
        for i in 0..2 {
            for j in 0..2 {
                let mut acc = T::zero();
                for l in 0..2 {
                    let lower = comp(&dg[i], j, l) + comp(&dg[j], i, l) - comp(&dg[l], i, j);
                    acc = acc + comp(&inv, k, l) * lower;
                }
                gamma[k][i][j] = half * acc;
            }
        }
    }
    Some(gamma)
}

/// Partial derivatives of each metric component `E = g.a`, `F = g.b`, `G = g.d`.
pub(crate) struct MetricDerivs<T> {
    pub e: Derivs<T>,
    pub f: Derivs<T>,
    pub g: Derivs<T>,
}

impl<T: Real> MetricDerivs<T> {
    pub(crate) fn new(grid: &Grid<T>, metric: &[Mat2<T>]) -> Result<Self> {
        let e: Vec<T> = metric.iter().map(|g| g.a).collect();
        let f: Vec<T> = metric.iter().map(|g| g.b).collect();
        let g: Vec<T> = metric.iter().map(|g| g.d).collect();
        Ok(Self { e: grid.diff(&e)?, f: grid.diff(&f)?, g: grid.diff(&g)? })
    }

    pub(crate) fn partials(&self, k: usize) -> [Mat2<T>; 2] {
        [
            Mat2::sym(self.e.u[k], self.f.u[k], self.g.u[k]),
            Mat2::sym(self.e.v[k], self.f.v[k], self.g.v[k]),
        ]
    }
}

/// Gaussian curvature of a sampled metric computed from the metric alone
/// (Brioschi formula). Values are meaningful on interior nodes.
pub fn intrinsic_curvature<T: Real>(grid: &Grid<T>, metric: &[Mat2<T>]) -> Result<Vec<T>> {
    let d = MetricDerivs::new(grid, metric)?;
    let half = lit::<T>(0.5);
    Ok(metric
        .iter()
        .enumerate()
        .map(|(k, g)| {
            let (e, f, gg) = (g.a, g.b, g.d);
            let m1 = det3([
                [-half * d.e.vv[k] + d.f.uv[k] - half * d.g.uu[k], half * d.e.u[k], d.f.u[k] - half * d.e.v[k]],
                [d.f.v[k] - half * d.g.u[k], e, f],
                [half * d.g.v[k], f, gg],
            ]);
            let m2 = det3([
                [T::zero(), half * d.e.v[k], half * d.g.u[k]],
                [half * d.e.v[k], e, f],
                [half * d.g.u[k], f, gg],
            ]);
            let w = e * gg - f * f;
            (m1 - m2) / (w * w)
        })
        .collect())
}

fn det3<T: Real>(m: [[T; 3]; 3]) -> T {
    m[0][0] * (m[1][1] * m[2][2] - m[1][2] * m[2][1]) - m[0][1] * (m[1][0] * m[2][2] - m[1][2] * m[2][0])
        + m[0][2] * (m[1][0] * m[2][1] - m[1][1] * m[2][0])
}

/// Norm of `(d^∇ A)(∂_u, ∂_v)` per node for a (1,1)-tensor field `op` and
/// the Levi-Civita connection of `metric`. Nodes where `mask` is false or
/// that are not interior report zero.
pub fn codazzi_norms<T: Real>(
    grid: &Grid<T>,
    metric: &[Mat2<T>],
    op: &[Mat2<T>],
    mask: Option<&[bool]>,
) -> Result<Vec<T>> {
    let d = MetricDerivs::new(grid, metric)?;
    let col_u: Vec<T> = op.iter().map(|a| a.b).collect(); // A^0_1
    let col_v: Vec<T> = op.iter().map(|a| a.d).collect(); // A^1_1
    let row_u: Vec<T> = op.iter().map(|a| a.a).collect(); // A^0_0
    let row_v: Vec<T> = op.iter().map(|a| a.c).collect(); // A^1_0
    let d01 = grid.diff(&col_u)?;
    let d11 = grid.diff(&col_v)?;
    let d00 = grid.diff(&row_u)?;
    let d10 = grid.diff(&row_v)?;
    let mut out = vec![T::zero(); grid.len()];
    for k in grid.interior_nodes() {
        if mask.is_some_and(|mk| !mk[k]) {
            continue;
        }
        let Some(gamma) = christoffel(&metric[k], &d.partials(k)) else {
            continue;
        };
        let a = &op[k];
        let cols = [[a.a, a.c], [a.b, a.d]]; // cols[j][l] = A^l_j
        let mut r = [d01.u[k] - d00.v[k], d11.u[k] - d10.v[k]];
        for (kk, rk) in r.iter_mut().enumerate() {
            for l in 0..2 {
                *rk = *rk + gamma[kk][0][l] * cols[1][l] - gamma[kk][1][l] * cols[0][l];
            }
        }
        let g = &metric[k];
        let sq = g.a * r[0] * r[0] + (g.b + g.c) * r[0] * r[1] + g.d * r[1] * r[1];
        out[k] = sq.max(T::zero()).sqrt();
    }
    Ok(out)
}

/// Maximum over interior nodes.
pub fn interior_max<T: Real>(grid: &Grid<T>, values: &[T]) -> T {
    grid.interior_nodes().map(|k| values[k].abs()).fold(T::zero(), T::max)
}

/// Least-squares slope of `log(err)` against `log(h)`.
pub fn convergence_order(h: &[f64], err: &[f64]) -> f64 {
    let xs: Vec<f64> = h.iter().map(|x| x.ln()).collect();
    let ys: Vec<f64> = err.iter().map(|x| x.ln()).collect();
    least_squares_slope(&xs, &ys)
}

pub fn least_squares_slope(xs: &[f64], ys: &[f64]) -> f64 {
    let n = xs.len() as f64;
    let mx = xs.iter().sum::<f64>() / n;
    let my = ys.iter().sum::<f64>() / n;
    let num: f64 = xs.iter().zip(ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let den: f64 = xs.iter().map(|x| (x - mx) * (x - mx)).sum();
    num / den
}

#[cfg(test)]
mod tests {
    use super::*;

    fn periodic_grid(n: usize) -> Grid<f64> {
        let h = 1.0 / n as f64;
        Grid::periodic(n, n, h, h, Vec3::new(1.0, 0.0, 0.0), Vec3::new(0.0, 1.0, 0.0))
    }

    fn sample(grid: &Grid<f64>, f: impl Fn(f64, f64) -> f64) -> Vec<f64> {
        (0..grid.len())
            .map(|k| {
                let (i, j) = grid.coords(k);
                f(i as f64 * grid.hu, j as f64 * grid.hv)
            })
            .collect()
    }

    #[test]
    fn spectral_derivative_of_trig_is_exact() {
        let g = periodic_grid(32).with_scheme(DiffScheme::Spectral);
        let tau = std::f64::consts::TAU;
        let f = sample(&g, |x, y| (tau * x).sin() * (2.0 * tau * y).cos());
        let d = g.diff(&f).unwrap();
        let exact_uv = sample(&g, |x, y| -2.0 * tau * tau * (tau * x).cos() * (2.0 * tau * y).sin());
        let exact_vv = sample(&g, |x, y| -4.0 * tau * tau * (tau * x).sin() * (2.0 * tau * y).cos());
        for k in 0..g.len() {
            assert!((d.uv[k] - exact_uv[k]).abs() < 1e-10);
            assert!((d.vv[k] - exact_vv[k]).abs() < 1e-10);
        }
    }

    #[test]
    fn central_derivative_is_second_order() {
        let tau = std::f64::consts::TAU;
        let errs: Vec<f64> = [16usize, 32, 64]
            .iter()
            .map(|&n| {
                let g = periodic_grid(n);
                let f = sample(&g, |x, _| (tau * x).sin());
                let d = g.diff(&f).unwrap();
                let exact = sample(&g, |x, _| tau * (tau * x).cos());
                d.u.iter().zip(&exact).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max)
            })
            .collect();
        let order = convergence_order(&[1.0 / 16.0, 1.0 / 32.0, 1.0 / 64.0], &errs);
        assert!((order - 2.0).abs() < 0.1, "order {order}");
    }

    #[test]
    fn bordered_one_sided_derivatives_are_exact_on_quadratics() {
        let g = Grid::bordered(10, 10, 0.1, 0.1, 2);
        let f = sample(&g, |x, y| x * x + 3.0 * x * y - y * y);
        let d = g.diff(&f).unwrap();
        let k = g.idx(0, 9);
        let (x, y) = (0.0, 0.9);
        assert!((d.u[k] - (2.0 * x + 3.0 * y)).abs() < 1e-12);
        assert!((d.uu[k] - 2.0).abs() < 1e-10);
        assert!((d.vv[k] + 2.0).abs() < 1e-10);
    }

    #[test]
    fn fornberg_reproduces_classic_weights() {
        let w = fd_weights(&[-1.0, 0.0, 1.0], 2);
        assert_eq!(w[1], vec![-0.5, 0.0, 0.5]);
        assert_eq!(w[2], vec![1.0, -2.0, 1.0]);
    }

    #[test]
    fn brioschi_flat_and_round() {
        // Flat metric: K = 0. Metric of the unit sphere in (θ, φ) would need
        // a bordered patch; here a conformally flat periodic metric
        // e^{2σ}(du² + dv²) with K = -e^{-2σ} Δσ is checked spectrally.
        let g = periodic_grid(32).with_scheme(DiffScheme::Spectral);
        let tau = std::f64::consts::TAU;
        let sigma = sample(&g, |x, y| 0.1 * (tau * x).cos() + 0.05 * (tau * y).sin());
        let metric: Vec<Mat2<f64>> = sigma.iter().map(|s| Mat2::diag((2.0 * s).exp(), (2.0 * s).exp())).collect();
        let k = intrinsic_curvature(&g, &metric).unwrap();
        let lap = sample(&g, |x, y| -0.1 * tau * tau * (tau * x).cos() - 0.05 * tau * tau * (tau * y).sin());
        for n in 0..g.len() {
            let expected = -(-2.0 * sigma[n]).exp() * lap[n];
            assert!((k[n] - expected).abs() < 1e-9, "{} vs {}", k[n], expected);
        }
    }
}
