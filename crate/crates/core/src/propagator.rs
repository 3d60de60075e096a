//! 3D acoustic finite-difference propagation: eighth order in space, second order in
//! time, with a damping band on all faces.
//!
//! The update for every padded grid point is
//!
//! ```text
//! u_next = phi1 * (2 u - phi2 * u_prev + (c dt)^2 * lap8(u))
//! ```
//!
//! followed by point injection of the source wavelet. Neighbors beyond the outer face of
//! the padded volume read as zero.

use std::f64::consts::PI;

use crate::error::{Error, Result};
use crate::model::{
    ricker, AcquisitionGeometry, Grid3, GridPoint, RickerSource, Seismogram, VelocityModel,
};
use crate::parsched::{SchedulePolicy, ThreadPool};

/// Central-difference weights of the eighth-order second derivative for offsets 0..=4.
pub const STENCIL: [f64; 5] = [
    -205.0 / 72.0,
    8.0 / 5.0,
    -1.0 / 5.0,
    8.0 / 315.0,
    -1.0 / 560.0,
];

/// Stencil half-width.
pub const RADIUS: usize = 4;

/// Depth of padded coordinate `p` into the damping band: 0 in the interior, `wb` on the
/// outer face.
pub fn band_depth(p: usize, n: usize, wb: usize) -> usize {
    if p < wb {
        wb - p
    } else if p >= wb + n {
        p + 1 - (wb + n)
    } else {
        0
    }
}

/// Per-point damping factors `phi1 = 1 / (1 + phi)` and `phi2 = 1 - phi`.
#[derive(Debug, Clone, PartialEq)]
pub struct BoundaryCoeffs {
    phi1: Vec<f64>,
    phi2: Vec<f64>,
}

impl BoundaryCoeffs {
    /// No damping anywhere.
    pub fn identity(grid: &Grid3) -> Self {
        Self {
            phi1: vec![1.0; grid.len()],
            phi2: vec![1.0; grid.len()],
        }
    }

    pub fn phi1(&self) -> &[f64] {
        &self.phi1
    }

    pub fn phi2(&self) -> &[f64] {
        &self.phi2
    }
}

/// Damping profile `pi f_peak dt (w_i / w_b)^2` per dimension, summed over dimensions.
pub fn compute_boundary_coeffs(grid: &Grid3, f_peak: f64, dt: f64) -> BoundaryCoeffs {
    let wb = grid.wb;
    if wb == 0 {
        return BoundaryCoeffs::identity(grid);
    }
    let scale = PI * f_peak * dt;
    let profile = |n: usize, len: usize| -> Vec<f64> {
        (0..len)
            .map(|p| {
                let w = band_depth(p, n, wb) as f64 / wb as f64;
                scale * w * w
            })
            .collect()
    };
    let [a, b, c] = grid.padded();
    let (d1, d2, d3) = (
        profile(grid.n1, a),
        profile(grid.n2, b),
        profile(grid.n3, c),
    );
    let mut phi1 = Vec::with_capacity(grid.len());
    let mut phi2 = Vec::with_capacity(grid.len());
    for &f1 in &d1 {
        for &f2 in &d2 {
            for &f3 in &d3 {
                let phi = f1 + f2 + f3;
                phi1.push(1.0 / (1.0 + phi));
                phi2.push(1.0 - phi);
            }
        }
    }
    BoundaryCoeffs { phi1, phi2 }
}

/// Pressure at the two most recent time levels.
#[derive(Debug, Clone, PartialEq)]
pub struct WavefieldPair {
    pub prev: Vec<f64>,
    pub curr: Vec<f64>,
}

impl WavefieldPair {
    pub fn zeros(len: usize) -> Self {
        Self {
            prev: vec![0.0; len],
            curr: vec![0.0; len],
        }
    }

    pub fn len(&self) -> usize {
        self.curr.len()
    }

    pub fn is_empty(&self) -> bool {
        self.curr.is_empty()
    }

    pub fn is_finite(&self) -> bool {
        self.prev.iter().chain(&self.curr).all(|v| v.is_finite())
    }

    pub fn fill_zero(&mut self) {
        self.prev.fill(0.0);
        self.curr.fill(0.0);
    }

    pub fn copy_from(&mut self, other: &WavefieldPair) {
        self.prev.copy_from_slice(&other.prev);
        self.curr.copy_from_slice(&other.curr);
    }

    /// Sum of squares of the current level.
    pub fn energy(&self) -> f64 {
        self.curr.iter().map(|v| v * v).sum()
    }
}

/// Receivers grouped by grid point so duplicate positions inject without races.
#[derive(Debug, Clone)]
pub struct ReceiverInjector {
    /// (flat padded index, receiver indices in ascending order)
    groups: Vec<(usize, Vec<usize>)>,
}

impl ReceiverInjector {
    pub fn new(grid: &Grid3, receivers: &[GridPoint]) -> Self {
        let mut by_point: std::collections::BTreeMap<usize, Vec<usize>> = Default::default();
        for (r, &p) in receivers.iter().enumerate() {
            by_point.entry(grid.interior_index(p)).or_default().push(r);
        }
        Self {
            groups: by_point.into_iter().collect(),
        }
    }

    pub fn n_points(&self) -> usize {
        self.groups.len()
    }
}

#[derive(Clone, Copy)]
struct ScatterPtr(*mut f64);

// SAFETY: used only to write at distinct indices (one per receiver group) from
// concurrently running loop bodies.
unsafe impl Sync for ScatterPtr {}
unsafe impl Send for ScatterPtr {}

impl ScatterPtr {
    fn get(self) -> *mut f64 {
        self.0
    }
}

/// The time-stepping operator for one model and time step.
#[derive(Debug, Clone)]
pub struct Propagator<'m> {
    model: &'m VelocityModel,
    coeffs: BoundaryCoeffs,
    dt: f64,
    /// `STENCIL[k] / dx^2` per axis.
    weights: [[f64; 5]; 3],
    center: f64,
    dims: [usize; 3],
}

impl<'m> Propagator<'m> {
    pub fn new(model: &'m VelocityModel, coeffs: BoundaryCoeffs, dt: f64) -> Result<Self> {
        let grid = model.grid();
        if coeffs.phi1.len() != grid.len() || coeffs.phi2.len() != grid.len() {
            return Err(Error::InvalidParameter(
                "boundary coefficients do not match the grid".into(),
            ));
        }
        if !(dt > 0.0) {
            return Err(Error::InvalidParameter(format!(
                "dt must be positive, got {dt}"
            )));
        }
        let mut weights = [[0.0; 5]; 3];
        for (axis, dx) in grid.spacing().into_iter().enumerate() {
            for k in 0..5 {
                weights[axis][k] = STENCIL[k] / (dx * dx);
            }
        }
        let center = weights[0][0] + weights[1][0] + weights[2][0];
        Ok(Self {
            model,
            coeffs,
            dt,
            weights,
            center,
            dims: grid.padded(),
        })
    }

    /// Propagator with the damping band configured for the geometry's source and time step.
    pub fn for_geometry(model: &'m VelocityModel, geom: &AcquisitionGeometry) -> Result<Self> {
        let coeffs = compute_boundary_coeffs(model.grid(), geom.source.f_peak, geom.dt);
        Self::new(model, coeffs, geom.dt)
    }

    pub fn model(&self) -> &VelocityModel {
        self.model
    }

    pub fn coeffs(&self) -> &BoundaryCoeffs {
        &self.coeffs
    }

    pub fn dt(&self) -> f64 {
        self.dt
    }

    /// Grid points in the parallel loop of [`Propagator::step`].
    pub fn loop_len(&self) -> usize {
        self.model.grid().len()
    }

    #[inline]
    fn c2dt2(&self, idx: usize) -> f64 {
        let k = self.model.velocities()[idx] * self.dt;
        k * k
    }

    /// Advances one time level: `prev` is overwritten with the new level and the roles
    /// are swapped, so afterwards `curr` holds `u(t + dt)` and `prev` holds `u(t)`.
    pub fn step(&self, fields: &mut WavefieldPair, pool: &ThreadPool, policy: SchedulePolicy) {
        assert_eq!(
            fields.len(),
            self.loop_len(),
            "wavefield does not match the grid"
        );
        {
            let WavefieldPair { prev, curr } = &mut *fields;
            let curr: &[f64] = curr;
            pool.parallel_for_slice(prev, policy, |start, out| {
                self.update_range(start, out, curr)
            });
        }
        std::mem::swap(&mut fields.prev, &mut fields.curr);
    }

    fn update_range(&self, start: usize, out: &mut [f64], curr: &[f64]) {
        let [n1, n2, n3] = self.dims;
        let r = RADIUS;
        let mut idx = start;
        let end = start + out.len();
        while idx < end {
            let p3 = idx % n3;
            let row = idx / n3;
            let (p1, p2) = (row / n2, row % n2);
            let seg_end = (idx - p3 + n3).min(end);
            let row_inside =
                n1 > 2 * r && n2 > 2 * r && (r..n1 - r).contains(&p1) && (r..n2 - r).contains(&p2);
            if row_inside && n3 > 2 * r {
                let row_base = idx - p3;
                let fast_lo = (row_base + r).max(idx);
                let fast_hi = (row_base + n3 - r).min(seg_end);
                if fast_lo < fast_hi {
                    for i in idx..fast_lo {
                        out[i - start] = self.update_point_slow(i, out[i - start], curr);
                    }
                    self.update_fast(fast_lo, &mut out[fast_lo - start..fast_hi - start], curr);
                    for i in fast_hi..seg_end {
                        out[i - start] = self.update_point_slow(i, out[i - start], curr);
                    }
                    idx = seg_end;
                    continue;
                }
            }
            for i in idx..seg_end {
                out[i - start] = self.update_point_slow(i, out[i - start], curr);
            }
            idx = seg_end;
        }
    }

    /// Update for a run of points whose full stencil lies inside the padded volume.
    fn update_fast(&self, base: usize, out: &mut [f64], curr: &[f64]) {
        let len = out.len();
        let s3 = 1;
        let s2 = self.dims[2];
        let s1 = self.dims[1] * self.dims[2];
        let at = |off: isize| -> &[f64] {
            let b = (base as isize + off) as usize;
            &curr[b..b + len]
        };
        let u = at(0);
        let n = |s: usize, k: usize| (at((k * s) as isize), at(-((k * s) as isize)));
        let (a1p, a1m) = n(s3, 1);
        let (a2p, a2m) = n(s3, 2);
        let (a3p, a3m) = n(s3, 3);
        let (a4p, a4m) = n(s3, 4);
        let (b1p, b1m) = n(s2, 1);
        let (b2p, b2m) = n(s2, 2);
        let (b3p, b3m) = n(s2, 3);
        let (b4p, b4m) = n(s2, 4);
        let (c1p, c1m) = n(s1, 1);
        let (c2p, c2m) = n(s1, 2);
        let (c3p, c3m) = n(s1, 3);
        let (c4p, c4m) = n(s1, 4);
        let vel = &self.model.velocities()[base..base + len];
        let phi1 = &self.coeffs.phi1[base..base + len];
        let phi2 = &self.coeffs.phi2[base..base + len];
        let [w1, w2, w3] = self.weights;
        let center = self.center;
        let dt = self.dt;
        for j in 0..len {
            let mut lap = center * u[j];
            lap +=
                w3[1] * (a1p[j] + a1m[j]) + w2[1] * (b1p[j] + b1m[j]) + w1[1] * (c1p[j] + c1m[j]);
            lap +=
                w3[2] * (a2p[j] + a2m[j]) + w2[2] * (b2p[j] + b2m[j]) + w1[2] * (c2p[j] + c2m[j]);
            lap +=
                w3[3] * (a3p[j] + a3m[j]) + w2[3] * (b3p[j] + b3m[j]) + w1[3] * (c3p[j] + c3m[j]);
            lap +=
                w3[4] * (a4p[j] + a4m[j]) + w2[4] * (b4p[j] + b4m[j]) + w1[4] * (c4p[j] + c4m[j]);
            let k = vel[j] * dt;
            out[j] = phi1[j] * (2.0 * u[j] - phi2[j] * out[j] + k * k * lap);
        }
    }

    /// Laplacian at a padded point with zero values beyond the outer faces.
    pub fn laplacian_at(&self, idx: usize, field: &[f64]) -> f64 {
        let [n1, n2, n3] = self.dims;
        let p3 = idx % n3;
        let row = idx / n3;
        let (p1, p2) = (row / n2, row % n2);
        let s2 = n3;
        let s1 = n2 * n3;
        let get = |p: usize, n: usize, k: usize, stride: usize, up: bool| -> f64 {
            if up {
                if p + k < n {
                    field[idx + k * stride]
                } else {
                    0.0
                }
            } else if p >= k {
                field[idx - k * stride]
            } else {
                0.0
            }
        };
        let [w1, w2, w3] = self.weights;
        let mut lap = self.center * field[idx];
        for k in 1..=RADIUS {
            lap += w3[k] * (get(p3, n3, k, 1, true) + get(p3, n3, k, 1, false))
                + w2[k] * (get(p2, n2, k, s2, true) + get(p2, n2, k, s2, false))
                + w1[k] * (get(p1, n1, k, s1, true) + get(p1, n1, k, s1, false));
        }
        lap
    }

    #[inline]
    fn update_point_slow(&self, idx: usize, prev: f64, curr: &[f64]) -> f64 {
        let lap = self.laplacian_at(idx, curr);
        let k = self.model.velocities()[idx] * self.dt;
        self.coeffs.phi1[idx] * (2.0 * curr[idx] - self.coeffs.phi2[idx] * prev + k * k * lap)
    }

    /// Subtracts `phi1 (c dt)^2 s(t)` at the source point of the newest level.
    pub fn inject_source(&self, fields: &mut WavefieldPair, src: &RickerSource, t: f64) {
        let idx = self.model.grid().interior_index(src.position);
        let s = ricker(t, src);
        fields.curr[idx] -= self.coeffs.phi1[idx] * self.c2dt2(idx) * s;
    }

    /// Adds `(c dt)^2` times each receiver's sample at `t_index` to the newest level.
    pub fn inject_receivers(
        &self,
        fields: &mut WavefieldPair,
        injector: &ReceiverInjector,
        seismogram: &Seismogram,
        t_index: usize,
        pool: &ThreadPool,
    ) {
        assert!(t_index < seismogram.ns());
        let target = ScatterPtr(fields.curr.as_mut_ptr());
        let len = fields.curr.len();
        pool.parallel_for(
            injector.groups.len(),
            SchedulePolicy::static_default(),
            |range| {
                for (idx, members) in &injector.groups[range] {
                    let mut add = 0.0;
                    for &r in members {
                        add += seismogram.get(r, t_index);
                    }
                    assert!(*idx < len);
                    // SAFETY: group indices are unique and in bounds, so no two bodies touch
                    // the same element; `fields` is exclusively borrowed for the call.
                    unsafe {
                        *target.get().add(*idx) += self.c2dt2(*idx) * add;
                    }
                }
            },
        );
    }
}

/// Copies the newest level at every receiver into column `t_index`.
pub fn record_receivers(
    fields: &WavefieldPair,
    grid: &Grid3,
    geom: &AcquisitionGeometry,
    t_index: usize,
    seismogram: &mut Seismogram,
) {
    assert!(t_index < geom.ns);
    for (r, &p) in geom.receivers.iter().enumerate() {
        seismogram.set(r, t_index, fields.curr[grid.interior_index(p)]);
    }
}

/// Runs the full forward simulation and records every receiver.
pub fn forward_model(
    model: &VelocityModel,
    geom: &AcquisitionGeometry,
    pool: &ThreadPool,
    policy: SchedulePolicy,
) -> Result<Seismogram> {
    geom.require_receivers()?;
    let prop = Propagator::for_geometry(model, geom)?;
    let grid = model.grid();
    let mut fields = WavefieldPair::zeros(grid.len());
    let mut seis = Seismogram::for_geometry(geom);
    for it in 0..geom.ns {
        prop.step(&mut fields, pool, policy);
        prop.inject_source(&mut fields, &geom.source, it as f64 * geom.dt);
        record_receivers(&fields, grid, geom, it, &mut seis);
    }
    if !fields.is_finite() || seis.data().iter().any(|v| !v.is_finite()) {
        return Err(Error::UnstablePropagation { steps: geom.ns });
    }
    Ok(seis)
}
