//! Grids, velocity models, acquisition geometry and the source wavelet.
//!
//! All volumes are stored flattened with the vertical axis (x3) fastest, over the
//! padded grid that includes the absorbing band on every face.

use std::f64::consts::PI;
use std::path::Path;

use crate::error::{Error, Result};
use crate::io;

/// Grid index in interior coordinates (absorbing band excluded).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct GridPoint {
    pub i1: usize,
    pub i2: usize,
    pub i3: usize,
}

impl GridPoint {
    pub const fn new(i1: usize, i2: usize, i3: usize) -> Self {
        Self { i1, i2, i3 }
    }
}

/// Regular 3D grid with an absorbing band of `wb` points on all six faces.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Grid3 {
    pub n1: usize,
    pub n2: usize,
    pub n3: usize,
    pub dx1: f64,
    pub dx2: f64,
    pub dx3: f64,
    pub wb: usize,
}

impl Grid3 {
    pub fn new(n: [usize; 3], dx: [f64; 3], wb: usize) -> Result<Self> {
        if n.contains(&0) {
            return Err(Error::InvalidParameter(format!(
                "grid counts must be >= 1, got {n:?}"
            )));
        }
        if dx.iter().any(|&v| !(v > 0.0 && v.is_finite())) {
            return Err(Error::InvalidParameter(format!(
                "grid spacings must be positive, got {dx:?}"
            )));
        }
        Ok(Self {
            n1: n[0],
            n2: n[1],
            n3: n[2],
            dx1: dx[0],
            dx2: dx[1],
            dx3: dx[2],
            wb,
        })
    }

    /// Cubic grid with equal spacing.
    pub fn cube(n: usize, dx: f64, wb: usize) -> Result<Self> {
        Self::new([n; 3], [dx; 3], wb)
    }

    /// Padded extents `n_i + 2 wb`.
    pub fn padded(&self) -> [usize; 3] {
        let w = 2 * self.wb;
        [self.n1 + w, self.n2 + w, self.n3 + w]
    }

    /// Flattened number of points over the padded volume (the parallel loop length).
    pub fn len(&self) -> usize {
        let [a, b, c] = self.padded();
        a * b * c
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn interior_len(&self) -> usize {
        self.n1 * self.n2 * self.n3
    }

    pub fn spacing(&self) -> [f64; 3] {
        [self.dx1, self.dx2, self.dx3]
    }

    pub fn min_spacing(&self) -> f64 {
        self.dx1.min(self.dx2).min(self.dx3)
    }

    pub fn max_spacing(&self) -> f64 {
        self.dx1.max(self.dx2).max(self.dx3)
    }

    /// Flattened index of a padded-grid coordinate.
    #[inline]
    pub fn index(&self, p1: usize, p2: usize, p3: usize) -> usize {
        let [_, b, c] = self.padded();
        (p1 * b + p2) * c + p3
    }

    /// Inverse of [`Grid3::index`].
    #[inline]
    pub fn coords(&self, idx: usize) -> (usize, usize, usize) {
        let [_, b, c] = self.padded();
        let p3 = idx % c;
        let rest = idx / c;
        (rest / b, rest % b, p3)
    }

    /// Flattened padded index of an interior point.
    #[inline]
    pub fn interior_index(&self, p: GridPoint) -> usize {
        self.index(p.i1 + self.wb, p.i2 + self.wb, p.i3 + self.wb)
    }

    pub fn contains(&self, p: GridPoint) -> bool {
        p.i1 < self.n1 && p.i2 < self.n2 && p.i3 < self.n3
    }

    pub(crate) fn check_point(&self, what: &'static str, p: GridPoint) -> Result<()> {
        if self.contains(p) {
            Ok(())
        } else {
            Err(Error::OutOfGrid {
                what,
                i1: p.i1,
                i2: p.i2,
                i3: p.i3,
            })
        }
    }
}

/// Propagation velocity (m/s) at every padded grid point.
#[derive(Debug, Clone, PartialEq)]
pub struct VelocityModel {
    grid: Grid3,
    c: Vec<f64>,
    cmin: f64,
    cmax: f64,
}

impl VelocityModel {
    /// Builds a model from interior values (x3-fastest) and fills the absorbing band by
    /// replicating the nearest interior value.
    pub fn from_interior(grid: Grid3, interior: &[f64]) -> Result<Self> {
        if interior.len() != grid.interior_len() {
            return Err(Error::InvalidParameter(format!(
                "expected {} interior velocities, got {}",
                grid.interior_len(),
                interior.len()
            )));
        }
        for (index, &value) in interior.iter().enumerate() {
            if !value.is_finite() {
                return Err(Error::NonFiniteVelocity { index });
            }
            if value <= 0.0 {
                return Err(Error::NonPositiveVelocity { index, value });
            }
        }

        let [a, b, c] = grid.padded();
        let clamp = |p: usize, n: usize| p.saturating_sub(grid.wb).min(n - 1);
        let mut vel = Vec::with_capacity(grid.len());
        for p1 in 0..a {
            let i1 = clamp(p1, grid.n1);
            for p2 in 0..b {
                let i2 = clamp(p2, grid.n2);
                let row = (i1 * grid.n2 + i2) * grid.n3;
                for p3 in 0..c {
                    vel.push(interior[row + clamp(p3, grid.n3)]);
                }
            }
        }

        let cmin = interior.iter().copied().fold(f64::INFINITY, f64::min);
        let cmax = interior.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        Ok(Self {
            grid,
            c: vel,
            cmin,
            cmax,
        })
    }

    pub fn homogeneous(grid: Grid3, velocity: f64) -> Result<Self> {
        Self::from_interior(grid, &vec![velocity; grid.interior_len()])
    }

    pub fn grid(&self) -> &Grid3 {
        &self.grid
    }

    /// Velocities over the padded grid.
    pub fn velocities(&self) -> &[f64] {
        &self.c
    }

    pub fn at(&self, p: GridPoint) -> f64 {
        self.c[self.grid.interior_index(p)]
    }

    pub fn cmin(&self) -> f64 {
        self.cmin
    }

    pub fn cmax(&self) -> f64 {
        self.cmax
    }
}

/// Two-layer model with a flat interface at the vertical midpoint: interior points with
/// `i3 < n3 / 2` take `v_top`, the rest `v_bottom`.
pub fn build_two_layer_model(grid: Grid3, v_top: f64, v_bottom: f64) -> Result<VelocityModel> {
    if !(v_top > 0.0 && v_bottom > 0.0) {
        return Err(Error::InvalidParameter(format!(
            "layer velocities must be positive, got {v_top} and {v_bottom}"
        )));
    }
    let half = grid.n3 / 2;
    let column: Vec<f64> = (0..grid.n3)
        .map(|i3| if i3 < half { v_top } else { v_bottom })
        .collect();
    let interior: Vec<f64> = (0..grid.n1 * grid.n2)
        .flat_map(|_| column.iter().copied())
        .collect();
    VelocityModel::from_interior(grid, &interior)
}

/// Interface depth of [`build_two_layer_model`] in interior grid points.
pub fn two_layer_interface(grid: &Grid3) -> usize {
    grid.n3 / 2
}

/// Reads a headerless little-endian f32 interior volume (x3 fastest).
pub fn load_velocity_model(path: impl AsRef<Path>, grid: Grid3) -> Result<VelocityModel> {
    let path = path.as_ref();
    let values = io::read_f32_le(path, grid.interior_len())?;
    let interior: Vec<f64> = values.into_iter().map(f64::from).collect();
    VelocityModel::from_interior(grid, &interior)
}

/// Ricker wavelet source.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RickerSource {
    pub f_peak: f64,
    pub t0: f64,
    pub position: GridPoint,
    /// Scale on the wavelet; 1 unless a test silences the source.
    pub amplitude: f64,
}

impl RickerSource {
    /// Source with the default delay [`default_delay`].
    pub fn new(f_peak: f64, position: GridPoint) -> Result<Self> {
        Self::with_delay(f_peak, default_delay(f_peak), position)
    }

    pub fn with_delay(f_peak: f64, t0: f64, position: GridPoint) -> Result<Self> {
        if !(f_peak > 0.0 && f_peak.is_finite()) {
            return Err(Error::InvalidParameter(format!(
                "peak frequency must be positive, got {f_peak}"
            )));
        }
        if !(t0 >= 0.0 && t0.is_finite()) {
            return Err(Error::InvalidParameter(format!(
                "wavelet delay must be non-negative, got {t0}"
            )));
        }
        Ok(Self {
            f_peak,
            t0,
            position,
            amplitude: 1.0,
        })
    }

    pub fn with_amplitude(mut self, amplitude: f64) -> Self {
        self.amplitude = amplitude;
        self
    }
}

/// Delay at which the wavelet envelope has decayed to about 1e-6 of its peak.
pub fn default_delay(f_peak: f64) -> f64 {
    6.0 / (PI * f_peak * std::f64::consts::SQRT_2)
}

/// Effective maximum frequency used for the dispersion bound when none is given.
pub fn default_f_max(f_peak: f64) -> f64 {
    2.5 * f_peak
}

/// Ricker wavelet `(1 - 2 pi^2 f^2 tau^2) exp(-pi^2 f^2 tau^2)` with `tau = t - t0`.
pub fn ricker(t: f64, src: &RickerSource) -> f64 {
    let tau = t - src.t0;
    let a = (PI * src.f_peak * tau).powi(2);
    src.amplitude * (1.0 - 2.0 * a) * (-a).exp()
}

/// One shot: the source, the receivers, and the time axis.
#[derive(Debug, Clone, PartialEq)]
pub struct AcquisitionGeometry {
    pub source: RickerSource,
    pub receivers: Vec<GridPoint>,
    pub ns: usize,
    pub dt: f64,
}

impl AcquisitionGeometry {
    pub fn new(
        grid: &Grid3,
        source: RickerSource,
        receivers: Vec<GridPoint>,
        ns: usize,
        dt: f64,
    ) -> Result<Self> {
        if ns == 0 {
            return Err(Error::InvalidParameter("ns must be >= 1".into()));
        }
        if !(dt > 0.0 && dt.is_finite()) {
            return Err(Error::InvalidParameter(format!(
                "dt must be positive, got {dt}"
            )));
        }
        grid.check_point("source", source.position)?;
        for &r in &receivers {
            grid.check_point("receiver", r)?;
        }
        Ok(Self {
            source,
            receivers,
            ns,
            dt,
        })
    }

    /// Total simulated time `ns * dt`.
    pub fn duration(&self) -> f64 {
        self.ns as f64 * self.dt
    }

    pub(crate) fn require_receivers(&self) -> Result<()> {
        if self.receivers.is_empty() {
            Err(Error::NoReceivers)
        } else {
            Ok(())
        }
    }
}

/// Receiver-by-time matrix of recorded pressure, receiver-major.
#[derive(Debug, Clone, PartialEq)]
pub struct Seismogram {
    n_receivers: usize,
    ns: usize,
    data: Vec<f64>,
}

impl Seismogram {
    pub fn zeros(n_receivers: usize, ns: usize) -> Self {
        Self {
            n_receivers,
            ns,
            data: vec![0.0; n_receivers * ns],
        }
    }

    pub fn for_geometry(geom: &AcquisitionGeometry) -> Self {
        Self::zeros(geom.receivers.len(), geom.ns)
    }

    pub fn from_data(n_receivers: usize, ns: usize, data: Vec<f64>) -> Result<Self> {
        if data.len() != n_receivers * ns {
            return Err(Error::InvalidParameter(format!(
                "seismogram data has {} samples, expected {}x{}",
                data.len(),
                n_receivers,
                ns
            )));
        }
        if let Some(i) = data.iter().position(|v| !v.is_finite()) {
            return Err(Error::InvalidParameter(format!(
                "seismogram sample {i} is not finite"
            )));
        }
        Ok(Self {
            n_receivers,
            ns,
            data,
        })
    }

    pub fn shape(&self) -> (usize, usize) {
        (self.n_receivers, self.ns)
    }

    pub fn n_receivers(&self) -> usize {
        self.n_receivers
    }

    pub fn ns(&self) -> usize {
        self.ns
    }

    pub fn trace(&self, r: usize) -> &[f64] {
        &self.data[r * self.ns..(r + 1) * self.ns]
    }

    #[inline]
    pub fn get(&self, r: usize, t: usize) -> f64 {
        self.data[r * self.ns + t]
    }

    #[inline]
    pub fn set(&mut self, r: usize, t: usize, v: f64) {
        self.data[r * self.ns + t] = v;
    }

    pub fn data(&self) -> &[f64] {
        &self.data
    }

    pub fn data_mut(&mut self) -> &mut [f64] {
        &mut self.data
    }

    pub(crate) fn check_matches(&self, geom: &AcquisitionGeometry) -> Result<()> {
        let expected = (geom.receivers.len(), geom.ns);
        if self.shape() != expected {
            return Err(Error::ShapeMismatch {
                expected,
                found: self.shape(),
            });
        }
        Ok(())
    }
}

/// Outcome of the dispersion and stability checks.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StabilityReport {
    /// Largest admissible spacing `cmin / (W f_max)` in meters.
    pub dx_bound: f64,
    /// Largest admissible time step `2 min(dx) / (pi cmax sqrt 3)` in seconds.
    pub dt_bound: f64,
    pub dx_ok: bool,
    pub dt_ok: bool,
    pub points_per_wavelength: f64,
    pub f_max: f64,
}

impl StabilityReport {
    pub fn passes(&self) -> bool {
        self.dx_ok && self.dt_ok
    }
}

/// Checks grid spacing against numerical dispersion and the time step against stability.
pub fn check_stability(
    model: &VelocityModel,
    geom: &AcquisitionGeometry,
    f_max: f64,
    points_per_wavelength: f64,
) -> Result<StabilityReport> {
    if !(f_max > 0.0) {
        return Err(Error::InvalidParameter(format!(
            "f_max must be positive, got {f_max}"
        )));
    }
    if !(points_per_wavelength >= 4.0) {
        return Err(Error::InvalidParameter(format!(
            "points per wavelength must be >= 4, got {points_per_wavelength}"
        )));
    }
    let grid = model.grid();
    let dx_bound = model.cmin() / (points_per_wavelength * f_max);
    let dt_bound = 2.0 * grid.min_spacing() / (PI * model.cmax() * 3f64.sqrt());
    Ok(StabilityReport {
        dx_bound,
        dt_bound,
        dx_ok: grid.max_spacing() <= dx_bound,
        dt_ok: geom.dt <= dt_bound,
        points_per_wavelength,
        f_max,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn geom_for(model: &VelocityModel, dt: f64) -> AcquisitionGeometry {
        let src = RickerSource::new(20.0, GridPoint::new(0, 0, 0)).unwrap();
        AcquisitionGeometry::new(model.grid(), src, vec![GridPoint::new(0, 0, 0)], 10, dt).unwrap()
    }

    #[test]
    fn ricker_peaks_at_delay() {
        let src = RickerSource::new(20.0, GridPoint::new(0, 0, 0)).unwrap();
        assert_eq!(ricker(src.t0, &src), 1.0);
    }

    #[test]
    fn ricker_decays() {
        let src = RickerSource::with_delay(20.0, 0.5, GridPoint::new(0, 0, 0)).unwrap();
        for tau in [1.0001, 1.5, 3.0, -1.0001, -2.0] {
            assert!(ricker(0.5 + tau, &src).abs() < 1e-12);
        }
    }

    #[test]
    fn ricker_matches_high_precision_evaluation() {
        // (1 - 2a) exp(-a), a = (pi * 20 * 0.025)^2, evaluated at 30 digits.
        let src = RickerSource::with_delay(20.0, 0.1, GridPoint::new(0, 0, 0)).unwrap();
        let v = ricker(0.125, &src);
        assert!(
            (v - (-0.333690792296469441219688035927)).abs() < 1e-14,
            "{v}"
        );
    }

    #[test]
    fn default_delay_value() {
        assert!((default_delay(20.0) - 0.0675237237117829552).abs() < 1e-15);
    }

    #[test]
    fn dispersion_bound_is_inclusive() {
        let grid = Grid3::cube(4, 10.0, 0).unwrap();
        let model = VelocityModel::homogeneous(grid, 2000.0).unwrap();
        let r = check_stability(&model, &geom_for(&model, 1e-3), 50.0, 4.0).unwrap();
        assert_eq!(r.dx_bound, 10.0);
        assert!(r.dx_ok);
    }

    #[test]
    fn time_step_bound() {
        let grid = Grid3::cube(4, 10.0, 0).unwrap();
        let model = VelocityModel::homogeneous(grid, 2000.0).unwrap();
        let r = check_stability(&model, &geom_for(&model, 1e-3), 50.0, 4.0).unwrap();
        assert!((r.dt_bound - 1.83776298473930683e-3).abs() < 1e-15);
        assert!(r.dt_ok);

        let fast = VelocityModel::homogeneous(grid, 4000.0).unwrap();
        let r = check_stability(&fast, &geom_for(&fast, 1e-3), 50.0, 4.0).unwrap();
        assert!((r.dt_bound - 0.918881492369653416e-3).abs() < 1e-15);
        assert!(!r.dt_ok);
    }

    #[test]
    fn stability_preconditions() {
        let grid = Grid3::cube(2, 10.0, 0).unwrap();
        let model = VelocityModel::homogeneous(grid, 2000.0).unwrap();
        let g = geom_for(&model, 1e-3);
        assert!(check_stability(&model, &g, 0.0, 4.0).is_err());
        assert!(check_stability(&model, &g, 50.0, 3.9).is_err());
    }

    #[test]
    fn stability_is_monotone_in_fmax_and_w() {
        let grid = Grid3::new([3, 3, 3], [7.0, 9.0, 12.0], 1).unwrap();
        let model = build_two_layer_model(grid, 1400.0, 2000.0).unwrap();
        let g = geom_for(&model, 1e-3);
        let fs: Vec<f64> = (1..60).map(|k| k as f64 * 1.5).collect();
        let ws: Vec<f64> = (0..20).map(|k| 4.0 + k as f64 * 0.5).collect();
        for &w in &ws {
            let mut was_ok = true;
            for &f in &fs {
                let ok = check_stability(&model, &g, f, w).unwrap().dx_ok;
                assert!(was_ok || !ok, "dx_ok turned true at f={f}, W={w}");
                was_ok = ok;
            }
        }
        for &f in &fs {
            let mut was_ok = true;
            for &w in &ws {
                let ok = check_stability(&model, &g, f, w).unwrap().dx_ok;
                assert!(was_ok || !ok);
                was_ok = ok;
            }
        }
    }

    #[test]
    fn two_layer_values() {
        let grid = Grid3::cube(5, 10.0, 2).unwrap();
        let homog = build_two_layer_model(grid, 2000.0, 2000.0).unwrap();
        assert_eq!((homog.cmin(), homog.cmax()), (2000.0, 2000.0));

        let m = build_two_layer_model(grid, 1400.0, 2000.0).unwrap();
        assert_eq!((m.cmin(), m.cmax()), (1400.0, 2000.0));
    }

    #[test]
    fn two_layer_split_at_midpoint() {
        let grid = Grid3::new([2, 2, 4], [10.0; 3], 1).unwrap();
        let m = build_two_layer_model(grid, 1400.0, 2000.0).unwrap();
        for i3 in 0..4 {
            let want = if i3 < 2 { 1400.0 } else { 2000.0 };
            assert_eq!(m.at(GridPoint::new(1, 0, i3)), want);
        }
        // band above the top replicates the top layer, below the bottom the bottom layer
        assert_eq!(m.velocities()[grid.index(0, 0, 0)], 1400.0);
        assert_eq!(m.velocities()[grid.index(3, 3, 5)], 2000.0);
    }

    #[test]
    fn velocity_bounds_hold_everywhere() {
        for wb in 0..3 {
            let grid = Grid3::new([3, 4, 5], [10.0; 3], wb).unwrap();
            let interior: Vec<f64> = (0..grid.interior_len())
                .map(|i| 1000.0 + ((i * 37) % 23) as f64 * 50.0)
                .collect();
            let m = VelocityModel::from_interior(grid, &interior).unwrap();
            assert!(m
                .velocities()
                .iter()
                .all(|&c| m.cmin() <= c && c <= m.cmax()));
            assert_eq!(m.cmin(), 1000.0);
            assert_eq!(m.cmax(), 1000.0 + 22.0 * 50.0);
        }
    }

    #[test]
    fn index_round_trip_exhaustive() {
        for n1 in 1..=16 {
            for n2 in 1..=16 {
                for n3 in 1..=16 {
                    let g = Grid3::new([n1, n2, n3], [1.0; 3], 0).unwrap();
                    for idx in 0..g.len() {
                        let (a, b, c) = g.coords(idx);
                        assert_eq!(g.index(a, b, c), idx);
                    }
                }
            }
        }
    }

    #[test]
    fn invalid_grids() {
        assert!(Grid3::new([0, 1, 1], [1.0; 3], 0).is_err());
        assert!(Grid3::new([1, 1, 1], [1.0, 0.0, 1.0], 0).is_err());
        assert!(Grid3::new([1, 1, 1], [1.0, 1.0, -2.0], 0).is_err());
    }

    #[test]
    fn geometry_validation() {
        let grid = Grid3::cube(4, 10.0, 2).unwrap();
        let src = RickerSource::new(20.0, GridPoint::new(1, 1, 1)).unwrap();
        assert!(AcquisitionGeometry::new(&grid, src, vec![], 0, 1e-3).is_err());
        assert!(AcquisitionGeometry::new(&grid, src, vec![], 1, 0.0).is_err());
        assert!(matches!(
            AcquisitionGeometry::new(&grid, src, vec![GridPoint::new(4, 0, 0)], 1, 1e-3),
            Err(Error::OutOfGrid {
                what: "receiver",
                ..
            })
        ));
        let bad_src = RickerSource::new(20.0, GridPoint::new(0, 0, 4)).unwrap();
        assert!(AcquisitionGeometry::new(&grid, bad_src, vec![], 1, 1e-3).is_err());
        assert!(RickerSource::new(0.0, GridPoint::new(0, 0, 0)).is_err());
        assert!(RickerSource::with_delay(10.0, -1.0, GridPoint::new(0, 0, 0)).is_err());
    }
}
