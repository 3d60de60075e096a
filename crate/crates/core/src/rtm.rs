//! Reverse time migration: forward propagation with checkpoints, backward propagation of
//! the recorded data, zero-lag cross-correlation imaging and stacking over shots.

use std::path::{Path, PathBuf};

use crate::autotune::{autotune, TuneConfig, TuneResult};
use crate::error::{Error, Result};
use crate::io;
use crate::model::{AcquisitionGeometry, Grid3, GridPoint, Seismogram, VelocityModel};
use crate::parsched::{monotonic_now, SchedulePolicy, ThreadPool};
use crate::propagator::{Propagator, ReceiverInjector, WavefieldPair};

/// Evenly spaced snapshots of the forward wavefield.
#[derive(Debug, Clone)]
pub struct CheckpointStore {
    n_b: usize,
    ns: usize,
    stride: usize,
    entries: Vec<(usize, WavefieldPair)>,
}

impl CheckpointStore {
    /// Store for `ns` steps in at most `n_b` snapshots, stride `ceil(ns / n_b)`.
    pub fn new(n_b: usize, ns: usize) -> Result<Self> {
        if n_b == 0 {
            return Err(Error::InvalidParameter("n_b must be at least 1".into()));
        }
        if ns == 0 {
            return Err(Error::InvalidParameter("ns must be at least 1".into()));
        }
        Ok(Self {
            n_b,
            ns,
            stride: ns.div_ceil(n_b),
            entries: Vec::new(),
        })
    }

    pub fn n_b(&self) -> usize {
        self.n_b
    }

    pub fn stride(&self) -> usize {
        self.stride
    }

    pub fn ns(&self) -> usize {
        self.ns
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn steps(&self) -> Vec<usize> {
        self.entries.iter().map(|e| e.0).collect()
    }

    pub fn is_checkpoint(&self, step: usize) -> bool {
        step.is_multiple_of(self.stride)
    }

    fn save(&mut self, step: usize, fields: &WavefieldPair) {
        debug_assert!(self.is_checkpoint(step));
        debug_assert!(self.entries.last().is_none_or(|e| e.0 < step));
        assert!(self.entries.len() < self.n_b, "checkpoint store overflow");
        self.entries.push((step, fields.clone()));
    }

    /// Snapshot at the largest checkpoint step not after `t`.
    pub fn nearest(&self, t: usize) -> &(usize, WavefieldPair) {
        &self.entries[t / self.stride]
    }

    pub fn clear(&mut self) {
        self.entries.clear();
    }
}

/// Forward steps 0..ns (step + source injection), snapshotting every `stride` steps.
pub fn rtm_forward(
    prop: &Propagator<'_>,
    geom: &AcquisitionGeometry,
    pool: &ThreadPool,
    policy: SchedulePolicy,
    store: &mut CheckpointStore,
) -> WavefieldPair {
    assert!(store.is_empty(), "checkpoint store must start empty");
    assert_eq!(store.ns(), geom.ns);
    let mut fields = WavefieldPair::zeros(prop.loop_len());
    for it in 0..geom.ns {
        forward_step(prop, geom, pool, policy, &mut fields, it);
        if store.is_checkpoint(it) {
            store.save(it, &fields);
        }
    }
    fields
}

fn forward_step(
    prop: &Propagator<'_>,
    geom: &AcquisitionGeometry,
    pool: &ThreadPool,
    policy: SchedulePolicy,
    fields: &mut WavefieldPair,
    it: usize,
) {
    prop.step(fields, pool, policy);
    prop.inject_source(fields, &geom.source, it as f64 * geom.dt);
}

/// Serves forward wavefields from a [`CheckpointStore`], recomputing from the nearest
/// snapshot. The recomputed segment is cached, so a descending sweep recomputes each
/// segment once. Memory: one wavefield pair of scratch plus up to `stride` cached levels.
pub struct ForwardRetriever<'a, 'm> {
    prop: &'a Propagator<'m>,
    geom: &'a AcquisitionGeometry,
    store: &'a CheckpointStore,
    policy: SchedulePolicy,
    work: WavefieldPair,
    /// Checkpoint step of the cached segment.
    cache_start: Option<usize>,
    /// `cache[k]` is `u_curr` at step `cache_start + k + 1`.
    cache: Vec<Vec<f64>>,
    spare: Vec<Vec<f64>>,
    recomputed: usize,
}

impl<'a, 'm> ForwardRetriever<'a, 'm> {
    pub fn new(
        prop: &'a Propagator<'m>,
        geom: &'a AcquisitionGeometry,
        store: &'a CheckpointStore,
        policy: SchedulePolicy,
    ) -> Self {
        Self {
            prop,
            geom,
            store,
            policy,
            work: WavefieldPair::zeros(0),
            cache_start: None,
            cache: Vec::new(),
            spare: Vec::new(),
            recomputed: 0,
        }
    }

    /// Forward steps executed so far by retrieval.
    pub fn recomputed_steps(&self) -> usize {
        self.recomputed
    }

    /// `u_curr` after forward step `t`.
    pub fn get(&mut self, t: usize, pool: &ThreadPool) -> &[f64] {
        assert!(t < self.geom.ns, "step {t} out of range");
        let (c, snap) = self.store.nearest(t);
        let c = *c;
        if t == c {
            return &snap.curr;
        }
        let have = match self.cache_start {
            Some(s) if s == c => self.cache.len(),
            _ => 0,
        };
        if t - c > have {
            if have == 0 {
                self.spare.append(&mut self.cache);
                if self.work.len() != snap.len() {
                    self.work = snap.clone();
                } else {
                    self.work.copy_from(snap);
                }
                self.cache_start = Some(c);
            }
            for it in c + have + 1..=t {
                forward_step(self.prop, self.geom, pool, self.policy, &mut self.work, it);
                self.recomputed += 1;
                let mut buf = self.spare.pop().unwrap_or_default();
                buf.clear();
                buf.extend_from_slice(&self.work.curr);
                self.cache.push(buf);
            }
        }
        &self.cache[t - c - 1]
    }
}

/// Stacked image over the interior grid points.
#[derive(Debug, Clone, PartialEq)]
pub struct ImageVolume {
    grid: Grid3,
    values: Vec<f64>,
    shots: usize,
}

impl ImageVolume {
    pub fn zeros(grid: &Grid3) -> Self {
        Self {
            grid: *grid,
            values: vec![0.0; grid.interior_len()],
            shots: 0,
        }
    }

    pub fn grid(&self) -> &Grid3 {
        &self.grid
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn shots(&self) -> usize {
        self.shots
    }

    pub fn dims(&self) -> [usize; 3] {
        [self.grid.n1, self.grid.n2, self.grid.n3]
    }

    pub fn at(&self, p: GridPoint) -> f64 {
        self.values[(p.i1 * self.grid.n2 + p.i2) * self.grid.n3 + p.i3]
    }

    /// Vertical profile (along x3) below interior position (i1, i2).
    pub fn profile(&self, i1: usize, i2: usize) -> &[f64] {
        let n3 = self.grid.n3;
        let start = (i1 * self.grid.n2 + i2) * n3;
        &self.values[start..start + n3]
    }

    pub fn is_finite(&self) -> bool {
        self.values.iter().all(|v| v.is_finite())
    }

    /// Adds another image in place.
    pub fn stack(&mut self, other: &ImageVolume) -> Result<()> {
        if self.dims() != other.dims() {
            return Err(Error::InvalidParameter(format!(
                "cannot stack image of dims {:?} onto {:?}",
                other.dims(),
                self.dims()
            )));
        }
        for (a, b) in self.values.iter_mut().zip(&other.values) {
            *a += b;
        }
        self.shots += other.shots;
        Ok(())
    }

    /// Raw little-endian f64 values, x3 fastest.
    pub fn to_le_bytes(&self) -> Vec<u8> {
        io::f64_le_bytes(&self.values)
    }

    pub fn sidecar_path(path: &Path) -> PathBuf {
        let mut s = path.as_os_str().to_owned();
        s.push(".meta");
        PathBuf::from(s)
    }

    pub fn metadata(&self) -> String {
        let g = &self.grid;
        format!(
            "format = f64le\norder = x3-fastest\nn1 = {}\nn2 = {}\nn3 = {}\ndx1 = {}\ndx2 = {}\ndx3 = {}\nshots = {}\n",
            g.n1, g.n2, g.n3, g.dx1, g.dx2, g.dx3, self.shots
        )
    }

    /// Writes the volume and a `<path>.meta` text sidecar.
    pub fn write(&self, path: impl AsRef<Path>) -> Result<()> {
        let path = path.as_ref();
        io::write_f64_le(path, &self.values)?;
        io::write_text(Self::sidecar_path(path), &self.metadata())
    }

    pub fn read(path: impl AsRef<Path>, grid: &Grid3, shots: usize) -> Result<Self> {
        let values = io::read_f64_le(path, grid.interior_len())?;
        Ok(Self {
            grid: *grid,
            values,
            shots,
        })
    }
}

/// `image += u_fwd * u_bwd` over interior points, Static policy.
pub fn imaging_step(image: &mut ImageVolume, u_fwd: &[f64], u_bwd: &[f64], pool: &ThreadPool) {
    let g = image.grid;
    assert_eq!(u_fwd.len(), g.len());
    assert_eq!(u_bwd.len(), g.len());
    let n3 = g.n3;
    pool.parallel_for_slice(
        &mut image.values,
        SchedulePolicy::static_default(),
        |start, out| {
            let mut j = 0;
            while j < out.len() {
                let lin = start + j;
                let row = lin / n3;
                let i3 = lin % n3;
                let (i1, i2) = (row / g.n2, row % g.n2);
                let run = (n3 - i3).min(out.len() - j);
                let base = g.interior_index(GridPoint::new(i1, i2, i3));
                let f = &u_fwd[base..base + run];
                let b = &u_bwd[base..base + run];
                for ((o, x), y) in out[j..j + run].iter_mut().zip(f).zip(b) {
                    *o += x * y;
                }
                j += run;
            }
        },
    );
}

#[derive(Debug, Clone, PartialEq)]
pub struct RtmConfig {
    pub policy: SchedulePolicy,
    pub n_b: usize,
    /// Recorded with the run; the even checkpoint schedule does not use it.
    pub n_c: Option<usize>,
    pub tune: Option<TuneConfig>,
}

impl Default for RtmConfig {
    fn default() -> Self {
        Self {
            policy: SchedulePolicy::static_default(),
            n_b: 16,
            n_c: None,
            tune: None,
        }
    }
}

/// Kernel step counts of one migrated shot.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct StepCounts {
    pub forward: usize,
    pub backward: usize,
    pub recomputed: usize,
}

impl StepCounts {
    pub fn total(&self) -> usize {
        self.forward + self.backward + self.recomputed
    }
}

impl std::ops::AddAssign for StepCounts {
    fn add_assign(&mut self, o: Self) {
        self.forward += o.forward;
        self.backward += o.backward;
        self.recomputed += o.recomputed;
    }
}

/// Step counts of one shot with `ns` steps and `n_b` buffers, without running it.
pub fn predicted_steps(ns: usize, n_b: usize) -> StepCounts {
    let stride = ns.div_ceil(n_b.max(1));
    let segments = ns.div_ceil(stride);
    StepCounts {
        forward: ns,
        backward: ns,
        recomputed: ns - segments,
    }
}

/// Migrates one shot and returns its image with `shots = 1`.
pub fn migrate_shot(
    model: &VelocityModel,
    observed: &Seismogram,
    geom: &AcquisitionGeometry,
    pool: &ThreadPool,
    cfg: &RtmConfig,
) -> Result<(ImageVolume, StepCounts)> {
    observed.check_matches(geom)?;
    let grid = model.grid();
    let prop = Propagator::for_geometry(model, geom)?;
    let policy = cfg.policy;
    let mut store = CheckpointStore::new(cfg.n_b, geom.ns)?;
    let last = rtm_forward(&prop, geom, pool, policy, &mut store);
    if !last.is_finite() {
        return Err(Error::UnstableMigration { which: "source" });
    }
    drop(last);

    let injector = ReceiverInjector::new(grid, &geom.receivers);
    let mut image = ImageVolume::zeros(grid);
    let mut ur = WavefieldPair::zeros(grid.len());
    let mut retriever = ForwardRetriever::new(&prop, geom, &store, policy);
    for t in (0..geom.ns).rev() {
        prop.step(&mut ur, pool, policy);
        prop.inject_receivers(&mut ur, &injector, observed, t, pool);
        let uf = retriever.get(t, pool);
        imaging_step(&mut image, uf, &ur.curr, pool);
    }
    if !ur.is_finite() || !image.is_finite() {
        return Err(Error::UnstableMigration { which: "receiver" });
    }
    image.shots = 1;
    let counts = StepCounts {
        forward: geom.ns,
        backward: geom.ns,
        recomputed: retriever.recomputed_steps(),
    };
    Ok((image, counts))
}

#[derive(Debug, Clone, PartialEq)]
pub struct MigrationReport {
    pub total_seconds: f64,
    pub tuner_seconds: f64,
    pub shot_seconds: Vec<f64>,
    pub policy: SchedulePolicy,
    pub tune: Option<TuneResult>,
    pub steps: StepCounts,
    pub threads: usize,
}

impl MigrationReport {
    pub fn tuner_fraction(&self) -> f64 {
        if self.total_seconds > 0.0 {
            self.tuner_seconds / self.total_seconds
        } else {
            0.0
        }
    }

    /// Chunk of the propagation policy, if it has one.
    pub fn chunk(&self) -> Option<usize> {
        self.tune.as_ref().map(|t| t.chunk).or(self.policy.chunk())
    }
}

/// Migrates and stacks every shot. With `cfg.tune` set, the chunk is tuned once before
/// the first shot and used for all propagation loops.
pub fn migrate_all(
    model: &VelocityModel,
    shots: &[(AcquisitionGeometry, Seismogram)],
    pool: &ThreadPool,
    cfg: &RtmConfig,
) -> Result<(ImageVolume, MigrationReport)> {
    let start = monotonic_now();
    if shots.is_empty() {
        return Err(Error::InvalidParameter("no shots to migrate".into()));
    }
    let mut run_cfg = cfg.clone();
    let mut tune = None;
    let mut tuner_seconds = 0.0;
    if let Some(tcfg) = &cfg.tune {
        let t0 = monotonic_now();
        let result = autotune(model, &shots[0].0, pool, tcfg).map_err(|e| Error::Shot {
            shot: 0,
            source: Box::new(e),
        })?;
        tuner_seconds = monotonic_now() - t0;
        run_cfg.policy = result.policy();
        tune = Some(result);
    }
    let mut image = ImageVolume::zeros(model.grid());
    let mut steps = StepCounts::default();
    let mut shot_seconds = Vec::with_capacity(shots.len());
    for (k, (geom, seis)) in shots.iter().enumerate() {
        let t0 = monotonic_now();
        let (img, counts) =
            migrate_shot(model, seis, geom, pool, &run_cfg).map_err(|e| Error::Shot {
                shot: k,
                source: Box::new(e),
            })?;
        image.stack(&img)?;
        steps += counts;
        shot_seconds.push(monotonic_now() - t0);
    }
    Ok((
        image,
        MigrationReport {
            total_seconds: monotonic_now() - start,
            tuner_seconds,
            shot_seconds,
            policy: run_cfg.policy,
            tune,
            steps,
            threads: pool.n_threads(),
        },
    ))
}
