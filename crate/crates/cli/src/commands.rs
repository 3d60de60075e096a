use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use sha2::{Digest, Sha256};

use chunktune::autotune::{autotune_with, StepTimer, WallTimer};
use chunktune::io::{read_f64_le, write_f64_le, write_text};
use chunktune::{
    check_stability, forward_model, migrate_all, AcquisitionGeometry, Error, GridPoint,
    ImageVolume, MigrationReport, RickerSource, SchedulePolicy, Seismogram, StabilityReport,
    ThreadPool, TuneResult, VelocityModel,
};

use crate::analytic::{analytical_trace, mse, peak_normalize};
use crate::config::{RunConfig, SchedulerKind};
use crate::error::CliError;

pub const IMAGE_FILE: &str = "image.bin";
pub const TIMING_FILE: &str = "timing.csv";
pub const TUNE_TRACE_FILE: &str = "tune_trace.csv";
pub const BENCH_FILE: &str = "bench.csv";
pub const PREVIEW_FILE: &str = "trace_preview.csv";
pub const VALIDATE_FILE: &str = "validate_trace.csv";
pub const BENCH_HEADER: &str =
    "scheduler,chunk,shots,median_seconds,reps,tuner_overhead_seconds,threads";

pub fn shot_path(dir: &Path, k: usize) -> PathBuf {
    dir.join(format!("shot_{k}.bin"))
}

fn ensure_dir(dir: &Path) -> Result<(), CliError> {
    std::fs::create_dir_all(dir).map_err(|e| CliError::Io(format!("{}: {e}", dir.display())))
}

fn pool_for(cfg: &RunConfig) -> Result<ThreadPool, CliError> {
    Ok(ThreadPool::new(cfg.resolve_threads()?)?)
}

/// Loop policy for commands that never tune.
fn fixed_policy(cfg: &RunConfig) -> Result<SchedulePolicy, CliError> {
    Ok(cfg
        .scheduler
        .policy(cfg.chunk)?
        .unwrap_or_else(SchedulePolicy::static_default))
}

pub fn sha256_hex(bytes: &[u8]) -> String {
    hex::encode(Sha256::digest(bytes))
}

#[derive(Debug, Clone)]
pub struct ModelOutput {
    pub shot_files: Vec<PathBuf>,
    pub preview: PathBuf,
    pub stability: StabilityReport,
}

fn stability_text(r: &StabilityReport) -> String {
    format!(
        "stability check failed: dx bound {:.4} m ({}), dt bound {:.6} s ({}); set force = true to run anyway",
        r.dx_bound,
        if r.dx_ok { "ok" } else { "violated" },
        r.dt_bound,
        if r.dt_ok { "ok" } else { "violated" },
    )
}

fn nearest_receiver(geom: &AcquisitionGeometry) -> usize {
    let s = geom.source.position;
    let d2 = |p: &GridPoint| {
        let d = |a: usize, b: usize| a.abs_diff(b).pow(2);
        d(p.i1, s.i1) + d(p.i2, s.i2) + d(p.i3, s.i3)
    };
    (0..geom.receivers.len())
        .min_by_key(|&r| d2(&geom.receivers[r]))
        .unwrap_or(0)
}

/// Forward-models every shot and writes `shot_<k>.bin` (f64 little-endian,
/// receiver-major) plus a CSV preview of the trace nearest the first source.
pub fn cmd_model(cfg: &RunConfig) -> Result<ModelOutput, CliError> {
    cfg.validate()?;
    let model = cfg.velocity_model()?;
    let geoms = cfg.geometries()?;
    let stability = check_stability(&model, &geoms[0], cfg.f_max(), cfg.points_per_wavelength)?;
    if !stability.passes() && !cfg.force {
        return Err(CliError::Numerical(stability_text(&stability)));
    }
    if geoms[0].receivers.is_empty() {
        return Err(Error::NoReceivers.into());
    }
    let pool = pool_for(cfg)?;
    let policy = fixed_policy(cfg)?;
    ensure_dir(&cfg.output_dir)?;
    let mut shot_files = Vec::with_capacity(geoms.len());
    let mut first = None;
    for (k, geom) in geoms.iter().enumerate() {
        let seis = forward_model(&model, geom, &pool, policy).map_err(|e| Error::Shot {
            shot: k,
            source: Box::new(e),
        })?;
        let path = shot_path(&cfg.output_dir, k);
        write_f64_le(&path, seis.data())?;
        shot_files.push(path);
        if k == 0 {
            first = Some(seis);
        }
    }
    let seis = first.expect("at least one shot");
    let r = nearest_receiver(&geoms[0]);
    let p = geoms[0].receivers[r];
    let mut csv = format!(
        "# receiver {r} at ({}, {}, {})\nstep,time_s,amplitude\n",
        p.i1, p.i2, p.i3
    );
    for (t, v) in seis.trace(r).iter().enumerate() {
        writeln!(csv, "{t},{},{v:e}", (t + 1) as f64 * cfg.dt).unwrap();
    }
    let preview = cfg.output_dir.join(PREVIEW_FILE);
    write_text(&preview, &csv)?;
    Ok(ModelOutput {
        shot_files,
        preview,
        stability,
    })
}

/// Reads the shot files written by [`cmd_model`] for the configured geometry.
pub fn load_shots(cfg: &RunConfig) -> Result<Vec<(AcquisitionGeometry, Seismogram)>, CliError> {
    cfg.geometries()?
        .into_iter()
        .enumerate()
        .map(|(k, g)| {
            if g.receivers.is_empty() {
                return Err(Error::NoReceivers.into());
            }
            let n = g.receivers.len();
            let data = read_f64_le(shot_path(&cfg.output_dir, k), n * g.ns)?;
            let seis = Seismogram::from_data(n, g.ns, data)?;
            Ok((g, seis))
        })
        .collect()
}

#[derive(Debug, Clone)]
pub struct MigrateOutput {
    pub image_path: PathBuf,
    pub timing_path: PathBuf,
    pub report: MigrationReport,
    pub checksum: String,
}

fn migrate_once(
    cfg: &RunConfig,
    kind: SchedulerKind,
    model: &VelocityModel,
    shots: &[(AcquisitionGeometry, Seismogram)],
    pool: &ThreadPool,
) -> Result<(ImageVolume, MigrationReport), CliError> {
    let rtm = cfg.rtm_config_for(kind, cfg.chunk)?;
    Ok(migrate_all(model, shots, pool, &rtm)?)
}

pub fn timing_csv(scheduler: SchedulerKind, report: &MigrationReport) -> String {
    let total = report.total_seconds;
    let chunk = report.chunk().map_or(String::new(), |c| c.to_string());
    let tail = format!(
        "{},{},{chunk},{}",
        scheduler.as_str(),
        report.policy,
        report.threads
    );
    let mut s = String::from("row,shot,seconds,fraction,scheduler,policy,chunk,threads\n");
    let frac = |x: f64| if total > 0.0 { x / total } else { 0.0 };
    writeln!(s, "total,,{total:e},1,{tail}").unwrap();
    writeln!(
        s,
        "tuner,,{:e},{:e},{tail}",
        report.tuner_seconds,
        report.tuner_fraction()
    )
    .unwrap();
    for (k, &sec) in report.shot_seconds.iter().enumerate() {
        writeln!(s, "shot,{k},{sec:e},{:e},{tail}", frac(sec)).unwrap();
    }
    s
}

/// Migrates the modeled shots and writes `image.bin`, its `.meta` sidecar and `timing.csv`.
pub fn cmd_migrate(cfg: &RunConfig) -> Result<MigrateOutput, CliError> {
    cfg.validate()?;
    let model = cfg.velocity_model()?;
    let shots = load_shots(cfg)?;
    let pool = pool_for(cfg)?;
    let (image, report) = migrate_once(cfg, cfg.scheduler, &model, &shots, &pool)?;
    if !image.is_finite() {
        return Err(Error::UnstableMigration { which: "image" }.into());
    }
    ensure_dir(&cfg.output_dir)?;
    let image_path = cfg.output_dir.join(IMAGE_FILE);
    image.write(&image_path)?;
    let timing_path = cfg.output_dir.join(TIMING_FILE);
    write_text(&timing_path, &timing_csv(cfg.scheduler, &report))?;
    if let Some(t) = &report.tune {
        write_text(cfg.output_dir.join(TUNE_TRACE_FILE), &t.trace_csv())?;
    }
    Ok(MigrateOutput {
        image_path,
        timing_path,
        checksum: sha256_hex(&image.to_le_bytes()),
        report,
    })
}

pub fn cmd_tune(cfg: &RunConfig) -> Result<TuneResult, CliError> {
    cmd_tune_with(cfg, &mut WallTimer)
}

/// Tunes the chunk on the first shot's geometry and writes `tune_trace.csv`.
pub fn cmd_tune_with(cfg: &RunConfig, timer: &mut dyn StepTimer) -> Result<TuneResult, CliError> {
    cfg.validate()?;
    let model = cfg.velocity_model()?;
    let geoms = cfg.geometries()?;
    let pool = pool_for(cfg)?;
    let result = autotune_with(&model, &geoms[0], &pool, &cfg.tune_config(), timer)?;
    ensure_dir(&cfg.output_dir)?;
    write_text(cfg.output_dir.join(TUNE_TRACE_FILE), &result.trace_csv())?;
    Ok(result)
}

#[derive(Debug, Clone, PartialEq)]
pub struct BenchRecord {
    pub scheduler: SchedulerKind,
    pub chunk: usize,
    pub shots: usize,
    pub median_seconds: f64,
    pub reps: usize,
    pub tuner_overhead_seconds: f64,
    pub threads: usize,
    pub checksum: String,
    pub seconds: Vec<f64>,
}

impl BenchRecord {
    pub fn csv_row(&self) -> String {
        format!(
            "{},{},{},{:e},{},{:e},{}",
            self.scheduler.as_str(),
            self.chunk,
            self.shots,
            self.median_seconds,
            self.reps,
            self.tuner_overhead_seconds,
            self.threads
        )
    }
}

pub fn bench_csv(records: &[BenchRecord]) -> String {
    let mut s = format!("{BENCH_HEADER}\n");
    for r in records {
        writeln!(s, "{}", r.csv_row()).unwrap();
    }
    s
}

/// Median of a non-empty sample; the mean of the two middle values for even sizes.
pub fn median(v: &[f64]) -> f64 {
    let mut s = v.to_vec();
    s.sort_by(f64::total_cmp);
    let n = s.len();
    if n % 2 == 1 {
        s[n / 2]
    } else {
        0.5 * (s[n / 2 - 1] + s[n / 2])
    }
}

/// Relative wall-time reduction of `tuned` against `base`, in percent.
pub fn speedup_percent(base: &BenchRecord, tuned: &BenchRecord) -> f64 {
    100.0 * (base.median_seconds - tuned.median_seconds) / base.median_seconds
}

pub const BENCH_SCHEDULERS: [SchedulerKind; 4] = [
    SchedulerKind::Static,
    SchedulerKind::Auto,
    SchedulerKind::Guided,
    SchedulerKind::Tuned,
];

/// Runs the migration `reps` times under each baseline scheduler and the tuner, writes
/// `bench.csv`, and fails if any run produced a different image.
pub fn cmd_bench(cfg: &RunConfig) -> Result<Vec<BenchRecord>, CliError> {
    cfg.validate()?;
    let model = cfg.velocity_model()?;
    let shots = load_shots(cfg)?;
    let pool = pool_for(cfg)?;
    let n_loop = model.grid().len();
    let mut records = Vec::new();
    for kind in BENCH_SCHEDULERS {
        let mut seconds = Vec::with_capacity(cfg.reps);
        let mut tuner = Vec::with_capacity(cfg.reps);
        let mut chunks = Vec::with_capacity(cfg.reps);
        let mut checksum: Option<String> = None;
        for _ in 0..cfg.reps {
            let rtm = cfg.rtm_config_for(kind, None)?;
            let (image, report) = migrate_all(&model, &shots, &pool, &rtm)?;
            let sum = sha256_hex(&image.to_le_bytes());
            match &checksum {
                Some(c) if *c != sum => {
                    return Err(CliError::Numerical(format!(
                        "image checksum mismatch under {}: {c} vs {sum}",
                        kind.as_str()
                    )))
                }
                _ => checksum = Some(sum),
            }
            seconds.push(report.total_seconds);
            tuner.push(report.tuner_seconds);
            chunks.push(report.policy.resolved_chunk(n_loop, pool.n_threads()));
        }
        // Chunk of the run closest to the median time.
        let med = median(&seconds);
        let at = (0..seconds.len())
            .min_by(|&a, &b| {
                (seconds[a] - med)
                    .abs()
                    .total_cmp(&(seconds[b] - med).abs())
            })
            .unwrap();
        records.push(BenchRecord {
            scheduler: kind,
            chunk: chunks[at],
            shots: shots.len(),
            median_seconds: med,
            reps: cfg.reps,
            tuner_overhead_seconds: median(&tuner),
            threads: pool.n_threads(),
            checksum: checksum.unwrap(),
            seconds,
        });
    }
    if let Some(r) = records.iter().find(|r| r.checksum != records[0].checksum) {
        return Err(CliError::Numerical(format!(
            "image checksum mismatch: {} {} vs {} {}",
            records[0].scheduler.as_str(),
            records[0].checksum,
            r.scheduler.as_str(),
            r.checksum
        )));
    }
    ensure_dir(&cfg.output_dir)?;
    write_text(cfg.output_dir.join(BENCH_FILE), &bench_csv(&records))?;
    Ok(records)
}

#[derive(Debug, Clone)]
pub struct ValidationReport {
    pub offset_m: f64,
    pub receiver: GridPoint,
    pub source: GridPoint,
    /// Peak-normalized mean squared error; infinite if the run blew up.
    pub mse: f64,
    pub tolerance: f64,
    pub passed: bool,
    pub stability: StabilityReport,
    pub trace_path: Option<PathBuf>,
}

/// Homogeneous point-source run compared against the free-space solution at one receiver
/// offset along x1 from the grid center.
pub fn cmd_validate(cfg: &RunConfig) -> Result<ValidationReport, CliError> {
    cfg.validate()?;
    let grid = cfg.grid()?;
    let cells = cfg.validate_offset / cfg.dx1;
    let k = cells.round();
    if (cells - k).abs() > 1e-9 * cells.max(1.0) {
        return Err(CliError::Config(format!(
            "validate_offset {} m is not a multiple of dx1 = {} m",
            cfg.validate_offset, cfg.dx1
        )));
    }
    let k = k as usize;
    if k == 0 {
        return Err(CliError::Config("receiver coincides with source".into()));
    }
    let source = GridPoint::new(cfg.n1 / 2, cfg.n2 / 2, cfg.n3 / 2);
    let receiver = GridPoint::new(source.i1 + k, source.i2, source.i3);
    let model = VelocityModel::homogeneous(grid, cfg.validate_velocity)?;
    let wavelet = match cfg.source_delay {
        Some(t0) => RickerSource::with_delay(cfg.f_peak, t0, source)?,
        None => RickerSource::new(cfg.f_peak, source)?,
    };
    let geom = AcquisitionGeometry::new(&grid, wavelet, vec![receiver], cfg.ns, cfg.dt)?;
    let stability = check_stability(&model, &geom, cfg.f_max(), cfg.points_per_wavelength)?;
    let pool = pool_for(cfg)?;
    let offset_m = k as f64 * cfg.dx1;
    let computed = match forward_model(&model, &geom, &pool, fixed_policy(cfg)?) {
        Ok(seis) => Some(seis),
        Err(e) if e.is_numerical() => None,
        Err(e) => return Err(e.into()),
    };
    let Some(seis) = computed else {
        return Ok(ValidationReport {
            offset_m,
            receiver,
            source,
            mse: f64::INFINITY,
            tolerance: cfg.validate_tolerance,
            passed: false,
            stability,
            trace_path: None,
        });
    };
    let num = peak_normalize(seis.trace(0));
    let ana = peak_normalize(&analytical_trace(
        &wavelet,
        offset_m,
        cfg.validate_velocity,
        cfg.ns,
        cfg.dt,
    ));
    let err = mse(&num, &ana);
    let mut csv = String::from("step,time_s,computed,analytical\n");
    for t in 0..cfg.ns {
        writeln!(
            csv,
            "{t},{},{:e},{:e}",
            (t + 1) as f64 * cfg.dt,
            num[t],
            ana[t]
        )
        .unwrap();
    }
    ensure_dir(&cfg.output_dir)?;
    let trace_path = cfg.output_dir.join(VALIDATE_FILE);
    write_text(&trace_path, &csv)?;
    Ok(ValidationReport {
        offset_m,
        receiver,
        source,
        mse: err,
        tolerance: cfg.validate_tolerance,
        passed: err.is_finite() && err <= cfg.validate_tolerance,
        stability,
        trace_path: Some(trace_path),
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn median_odd_and_even() {
        assert_eq!(median(&[3.0, 1.0, 2.0]), 2.0);
        assert_eq!(median(&[4.0, 1.0, 2.0, 3.0]), 2.5);
        assert_eq!(median(&[7.0]), 7.0);
    }

    #[test]
    fn bench_header_is_fixed() {
        let csv = bench_csv(&[]);
        assert_eq!(
            csv,
            "scheduler,chunk,shots,median_seconds,reps,tuner_overhead_seconds,threads\n"
        );
    }

    #[test]
    fn sha_of_empty() {
        assert_eq!(
            sha256_hex(b""),
            "e3b0c44298fc1c149afbf4c8996fb92427ae41e4649b934ca495991b7852b855"
        );
    }
}
