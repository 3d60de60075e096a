//! Flat `key = value` run configuration.
//!
//! Blank lines and lines starting with `#` are ignored. Every key has a default; unknown
//! keys and malformed values are rejected. Optional values take `auto`.

use std::fmt::Write as _;
use std::path::PathBuf;
use std::str::FromStr;

use chunktune::csa::{AcceptanceRule, CsaParams};
use chunktune::model::{build_two_layer_model, load_velocity_model};
use chunktune::parsched::{threads_from_env, SchedulePolicy};
use chunktune::rtm::RtmConfig;
use chunktune::{AcquisitionGeometry, Grid3, GridPoint, RickerSource, TuneConfig, VelocityModel};

use crate::error::CliError;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum VelocityKind {
    TwoLayer,
    Homogeneous,
    File,
}

impl FromStr for VelocityKind {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        match s {
            "two_layer" => Ok(Self::TwoLayer),
            "homogeneous" => Ok(Self::Homogeneous),
            "file" => Ok(Self::File),
            _ => Err("expected two_layer, homogeneous or file".into()),
        }
    }
}

impl VelocityKind {
    fn as_str(self) -> &'static str {
        match self {
            Self::TwoLayer => "two_layer",
            Self::Homogeneous => "homogeneous",
            Self::File => "file",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SchedulerKind {
    Static,
    Auto,
    Guided,
    Dynamic,
    Tuned,
}

impl FromStr for SchedulerKind {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        match s {
            "static" => Ok(Self::Static),
            "auto" => Ok(Self::Auto),
            "guided" => Ok(Self::Guided),
            "dynamic" => Ok(Self::Dynamic),
            "tuned" => Ok(Self::Tuned),
            _ => Err("expected static, auto, guided, dynamic or tuned".into()),
        }
    }
}

impl SchedulerKind {
    pub fn as_str(self) -> &'static str {
        match self {
            Self::Static => "static",
            Self::Auto => "auto",
            Self::Guided => "guided",
            Self::Dynamic => "dynamic",
            Self::Tuned => "tuned",
        }
    }

    /// Loop policy for a fixed scheduler; `None` for `tuned`.
    pub fn policy(self, chunk: Option<usize>) -> Result<Option<SchedulePolicy>, CliError> {
        let p = match (self, chunk) {
            (Self::Tuned, _) => return Ok(None),
            (Self::Static, None) => SchedulePolicy::static_default(),
            (Self::Static, Some(c)) => SchedulePolicy::static_chunk(c)?,
            (Self::Auto, _) => SchedulePolicy::auto(),
            (Self::Guided, None) => SchedulePolicy::guided_default(),
            (Self::Guided, Some(c)) => SchedulePolicy::guided(c)?,
            (Self::Dynamic, None) => return Err(CliError::Config("dynamic requires chunk".into())),
            (Self::Dynamic, Some(c)) => SchedulePolicy::dynamic(c)?,
        };
        Ok(Some(p))
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub n1: usize,
    pub n2: usize,
    pub n3: usize,
    pub dx1: f64,
    pub dx2: f64,
    pub dx3: f64,
    pub wb: usize,
    pub velocity: VelocityKind,
    pub velocity_file: Option<PathBuf>,
    pub v_top: f64,
    pub v_bottom: f64,
    pub v_const: f64,
    pub f_peak: f64,
    pub source_delay: Option<f64>,
    pub f_max: Option<f64>,
    pub points_per_wavelength: f64,
    pub force: bool,
    pub dt: f64,
    pub ns: usize,
    pub shots: usize,
    pub source_i3: usize,
    pub sources: Option<Vec<GridPoint>>,
    pub receivers: bool,
    pub receiver_i3: Option<usize>,
    pub receiver_stride: usize,
    pub receiver_aperture: Option<usize>,
    pub scheduler: SchedulerKind,
    pub chunk: Option<usize>,
    pub csa_t_gen0: f64,
    pub csa_t_ac0: f64,
    pub csa_iters: usize,
    pub csa_m: usize,
    pub csa_alpha: f64,
    pub csa_sigma_d2: Option<f64>,
    pub csa_gen_decay: f64,
    pub csa_rule: AcceptanceRule,
    pub tune_lo: usize,
    pub n_b: usize,
    pub n_c: Option<usize>,
    pub threads: Option<usize>,
    pub seed: u64,
    pub output_dir: PathBuf,
    pub reps: usize,
    pub validate_velocity: f64,
    pub validate_offset: f64,
    pub validate_tolerance: f64,
}

impl Default for RunConfig {
    fn default() -> Self {
        Self {
            n1: 101,
            n2: 101,
            n3: 101,
            dx1: 10.0,
            dx2: 10.0,
            dx3: 10.0,
            wb: 20,
            velocity: VelocityKind::TwoLayer,
            velocity_file: None,
            v_top: 1400.0,
            v_bottom: 2000.0,
            v_const: 2000.0,
            f_peak: 20.0,
            source_delay: None,
            f_max: None,
            points_per_wavelength: 4.0,
            force: false,
            dt: 1e-3,
            ns: 500,
            shots: 1,
            source_i3: 10,
            sources: None,
            receivers: true,
            receiver_i3: None,
            receiver_stride: 2,
            receiver_aperture: None,
            scheduler: SchedulerKind::Static,
            chunk: None,
            csa_t_gen0: 100.0,
            csa_t_ac0: 0.9,
            csa_iters: 40,
            csa_m: 4,
            csa_alpha: 0.005,
            csa_sigma_d2: None,
            csa_gen_decay: 0.99999,
            csa_rule: AcceptanceRule::Conventional,
            tune_lo: 50,
            n_b: 16,
            n_c: None,
            threads: None,
            seed: 0,
            output_dir: PathBuf::from("out"),
            reps: 5,
            validate_velocity: 2000.0,
            validate_offset: 200.0,
            validate_tolerance: 1e-3,
        }
    }
}

/// Every key with its unit or accepted values, in serialization order.
pub const KEYS: &[(&str, &str)] = &[
    ("n1", "interior grid points along x1"),
    ("n2", "interior grid points along x2"),
    ("n3", "interior grid points along x3 (vertical)"),
    ("dx1", "grid spacing along x1, meters"),
    ("dx2", "grid spacing along x2, meters"),
    ("dx3", "grid spacing along x3, meters"),
    ("wb", "absorbing band thickness on every face, grid points"),
    ("velocity", "two_layer | homogeneous | file"),
    (
        "velocity_file",
        "raw f32 little-endian model, x3 fastest (velocity = file)",
    ),
    ("v_top", "upper-layer velocity, m/s (two_layer)"),
    ("v_bottom", "lower-layer velocity, m/s (two_layer)"),
    ("v_const", "velocity, m/s (homogeneous)"),
    ("f_peak", "Ricker peak frequency, Hz"),
    (
        "source_delay",
        "wavelet delay, seconds (auto: 6 / (pi f_peak sqrt 2))",
    ),
    (
        "f_max",
        "maximum frequency for the dispersion bound, Hz (auto: 2.5 f_peak)",
    ),
    (
        "points_per_wavelength",
        "grid points per minimum wavelength, at least 4",
    ),
    (
        "force",
        "run even if the stability check fails, true | false",
    ),
    ("dt", "time step, seconds"),
    ("ns", "number of time steps"),
    (
        "shots",
        "number of shots, spread along x1 at the center of x2",
    ),
    ("source_i3", "source depth, interior grid index"),
    (
        "sources",
        "explicit source points i1,i2,i3;... (auto: from shots and source_i3)",
    ),
    (
        "receivers",
        "true | false (false leaves the receiver list empty)",
    ),
    (
        "receiver_i3",
        "receiver depth, interior grid index (auto: source depth)",
    ),
    (
        "receiver_stride",
        "receiver spacing along x1 and x2, grid points",
    ),
    (
        "receiver_aperture",
        "max receiver distance from the source along x1 and x2, grid points (auto: all)",
    ),
    ("scheduler", "static | auto | guided | dynamic | tuned"),
    (
        "chunk",
        "block size (static), chunk size (dynamic) or minimum chunk (guided)",
    ),
    ("csa_t_gen0", "initial generation temperature"),
    ("csa_t_ac0", "initial acceptance temperature"),
    ("csa_iters", "annealing iterations N"),
    ("csa_m", "coupled optimizers m"),
    ("csa_alpha", "acceptance temperature rate"),
    (
        "csa_sigma_d2",
        "desired acceptance variance (auto: 0.99 (m-1)/m^2)",
    ),
    (
        "csa_gen_decay",
        "generation temperature factor per iteration",
    ),
    ("csa_rule", "conventional | literal"),
    ("tune_lo", "smallest chunk the tuner considers"),
    ("n_b", "checkpoint buffers per shot"),
    ("n_c", "checkpoint count, recorded only"),
    (
        "threads",
        "worker threads (auto: CHUNKTUNE_THREADS, then hardware)",
    ),
    ("seed", "random seed"),
    ("output_dir", "directory for all outputs"),
    ("reps", "repetitions per scheduler (bench)"),
    (
        "validate_velocity",
        "homogeneous velocity for validate, m/s",
    ),
    (
        "validate_offset",
        "source-receiver offset along x1 for validate, meters",
    ),
    (
        "validate_tolerance",
        "maximum normalized mean squared error for validate",
    ),
];

fn parse_num<T: FromStr>(v: &str) -> Result<T, String> {
    v.parse::<T>().map_err(|_| "not a valid number".to_string())
}

fn parse_opt<T: FromStr>(v: &str) -> Result<Option<T>, String> {
    if v == "auto" {
        Ok(None)
    } else {
        parse_num(v).map(Some)
    }
}

fn parse_bool(v: &str) -> Result<bool, String> {
    match v {
        "true" => Ok(true),
        "false" => Ok(false),
        _ => Err("expected true or false".into()),
    }
}

fn parse_points(v: &str) -> Result<Option<Vec<GridPoint>>, String> {
    if v == "auto" {
        return Ok(None);
    }
    v.split(';')
        .map(|p| {
            let c: Vec<&str> = p.split(',').map(str::trim).collect();
            match c.as_slice() {
                [a, b, c] => Ok(GridPoint::new(parse_num(a)?, parse_num(b)?, parse_num(c)?)),
                _ => Err("expected i1,i2,i3 triples separated by ;".to_string()),
            }
        })
        .collect::<Result<Vec<_>, _>>()
        .map(Some)
}

fn opt_str<T: ToString>(v: &Option<T>) -> String {
    v.as_ref().map_or_else(|| "auto".to_string(), T::to_string)
}

impl RunConfig {
    /// Parses the file text over the defaults, then validates.
    pub fn parse(text: &str) -> Result<Self, CliError> {
        Self::parse_with_overrides(text, &[])
    }

    /// Parses the file text, applies `key = value` overrides in order, then validates.
    pub fn parse_with_overrides(
        text: &str,
        overrides: &[(String, String)],
    ) -> Result<Self, CliError> {
        let mut cfg = Self::default();
        for (n, line) in text.lines().enumerate() {
            let line = line.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let (k, v) = line.split_once('=').ok_or_else(|| {
                CliError::Config(format!("line {}: expected `key = value`", n + 1))
            })?;
            cfg.set(k.trim(), v.trim())
                .map_err(|e| CliError::Config(format!("line {}: {e}", n + 1)))?;
        }
        for (k, v) in overrides {
            cfg.set(k, v)?;
        }
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load(path: &std::path::Path, overrides: &[(String, String)]) -> Result<Self, CliError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| CliError::Io(format!("{}: {e}", path.display())))?;
        Self::parse_with_overrides(&text, overrides)
    }

    /// Sets one key from its text form.
    pub fn set(&mut self, key: &str, v: &str) -> Result<(), CliError> {
        let bad = |e: String| CliError::Config(format!("{key} = {v}: {e}"));
        match key {
            "n1" => self.n1 = parse_num(v).map_err(bad)?,
            "n2" => self.n2 = parse_num(v).map_err(bad)?,
            "n3" => self.n3 = parse_num(v).map_err(bad)?,
            "dx1" => self.dx1 = parse_num(v).map_err(bad)?,
            "dx2" => self.dx2 = parse_num(v).map_err(bad)?,
            "dx3" => self.dx3 = parse_num(v).map_err(bad)?,
            "wb" => self.wb = parse_num(v).map_err(bad)?,
            "velocity" => self.velocity = v.parse().map_err(bad)?,
            "velocity_file" => self.velocity_file = (v != "auto").then(|| PathBuf::from(v)),
            "v_top" => self.v_top = parse_num(v).map_err(bad)?,
            "v_bottom" => self.v_bottom = parse_num(v).map_err(bad)?,
            "v_const" => self.v_const = parse_num(v).map_err(bad)?,
            "f_peak" => self.f_peak = parse_num(v).map_err(bad)?,
            "source_delay" => self.source_delay = parse_opt(v).map_err(bad)?,
            "f_max" => self.f_max = parse_opt(v).map_err(bad)?,
            "points_per_wavelength" => self.points_per_wavelength = parse_num(v).map_err(bad)?,
            "force" => self.force = parse_bool(v).map_err(bad)?,
            "dt" => self.dt = parse_num(v).map_err(bad)?,
            "ns" => self.ns = parse_num(v).map_err(bad)?,
            "shots" => self.shots = parse_num(v).map_err(bad)?,
            "source_i3" => self.source_i3 = parse_num(v).map_err(bad)?,
            "sources" => self.sources = parse_points(v).map_err(bad)?,
            "receivers" => self.receivers = parse_bool(v).map_err(bad)?,
            "receiver_i3" => self.receiver_i3 = parse_opt(v).map_err(bad)?,
            "receiver_stride" => self.receiver_stride = parse_num(v).map_err(bad)?,
            "receiver_aperture" => self.receiver_aperture = parse_opt(v).map_err(bad)?,
            "scheduler" => self.scheduler = v.parse().map_err(bad)?,
            "chunk" => self.chunk = parse_opt(v).map_err(bad)?,
            "csa_t_gen0" => self.csa_t_gen0 = parse_num(v).map_err(bad)?,
            "csa_t_ac0" => self.csa_t_ac0 = parse_num(v).map_err(bad)?,
            "csa_iters" => self.csa_iters = parse_num(v).map_err(bad)?,
            "csa_m" => self.csa_m = parse_num(v).map_err(bad)?,
            "csa_alpha" => self.csa_alpha = parse_num(v).map_err(bad)?,
            "csa_sigma_d2" => self.csa_sigma_d2 = parse_opt(v).map_err(bad)?,
            "csa_gen_decay" => self.csa_gen_decay = parse_num(v).map_err(bad)?,
            "csa_rule" => {
                self.csa_rule = v
                    .parse()
                    .map_err(|e: chunktune::Error| bad(e.to_string()))?
            }
            "tune_lo" => self.tune_lo = parse_num(v).map_err(bad)?,
            "n_b" => self.n_b = parse_num(v).map_err(bad)?,
            "n_c" => self.n_c = parse_opt(v).map_err(bad)?,
            "threads" => self.threads = parse_opt(v).map_err(bad)?,
            "seed" => self.seed = parse_num(v).map_err(bad)?,
            "output_dir" => self.output_dir = PathBuf::from(v),
            "reps" => self.reps = parse_num(v).map_err(bad)?,
            "validate_velocity" => self.validate_velocity = parse_num(v).map_err(bad)?,
            "validate_offset" => self.validate_offset = parse_num(v).map_err(bad)?,
            "validate_tolerance" => self.validate_tolerance = parse_num(v).map_err(bad)?,
            _ => return Err(CliError::Config(format!("unknown key `{key}`"))),
        }
        Ok(())
    }

    fn value_of(&self, key: &str) -> String {
        match key {
            "n1" => self.n1.to_string(),
            "n2" => self.n2.to_string(),
            "n3" => self.n3.to_string(),
            "dx1" => self.dx1.to_string(),
            "dx2" => self.dx2.to_string(),
            "dx3" => self.dx3.to_string(),
            "wb" => self.wb.to_string(),
            "velocity" => self.velocity.as_str().into(),
            "velocity_file" => self
                .velocity_file
                .as_ref()
                .map_or_else(|| "auto".into(), |p| p.display().to_string()),
            "v_top" => self.v_top.to_string(),
            "v_bottom" => self.v_bottom.to_string(),
            "v_const" => self.v_const.to_string(),
            "f_peak" => self.f_peak.to_string(),
            "source_delay" => opt_str(&self.source_delay),
            "f_max" => opt_str(&self.f_max),
            "points_per_wavelength" => self.points_per_wavelength.to_string(),
            "force" => self.force.to_string(),
            "dt" => self.dt.to_string(),
            "ns" => self.ns.to_string(),
            "shots" => self.shots.to_string(),
            "source_i3" => self.source_i3.to_string(),
            "sources" => self.sources.as_ref().map_or_else(
                || "auto".into(),
                |v| {
                    v.iter()
                        .map(|p| format!("{},{},{}", p.i1, p.i2, p.i3))
                        .collect::<Vec<_>>()
                        .join(";")
                },
            ),
            "receivers" => self.receivers.to_string(),
            "receiver_i3" => opt_str(&self.receiver_i3),
            "receiver_stride" => self.receiver_stride.to_string(),
            "receiver_aperture" => opt_str(&self.receiver_aperture),
            "scheduler" => self.scheduler.as_str().into(),
            "chunk" => opt_str(&self.chunk),
            "csa_t_gen0" => self.csa_t_gen0.to_string(),
            "csa_t_ac0" => self.csa_t_ac0.to_string(),
            "csa_iters" => self.csa_iters.to_string(),
            "csa_m" => self.csa_m.to_string(),
            "csa_alpha" => self.csa_alpha.to_string(),
            "csa_sigma_d2" => opt_str(&self.csa_sigma_d2),
            "csa_gen_decay" => self.csa_gen_decay.to_string(),
            "csa_rule" => self.csa_rule.to_string(),
            "tune_lo" => self.tune_lo.to_string(),
            "n_b" => self.n_b.to_string(),
            "n_c" => opt_str(&self.n_c),
            "threads" => opt_str(&self.threads),
            "seed" => self.seed.to_string(),
            "output_dir" => self.output_dir.display().to_string(),
            "reps" => self.reps.to_string(),
            "validate_velocity" => self.validate_velocity.to_string(),
            "validate_offset" => self.validate_offset.to_string(),
            "validate_tolerance" => self.validate_tolerance.to_string(),
            _ => unreachable!("key table out of sync: {key}"),
        }
    }

    /// Full config text with one documented line per key.
    pub fn to_text(&self) -> String {
        let mut s = String::new();
        for (key, doc) in KEYS {
            writeln!(s, "# {doc}\n{key} = {}", self.value_of(key)).unwrap();
        }
        s
    }

    /// Checks every value that later stages would reject, without touching files.
    pub fn validate(&self) -> Result<(), CliError> {
        let grid = self.grid()?;
        let positive = [
            ("f_peak", self.f_peak),
            ("dt", self.dt),
            ("v_top", self.v_top),
            ("v_bottom", self.v_bottom),
            ("v_const", self.v_const),
            ("validate_velocity", self.validate_velocity),
            ("validate_tolerance", self.validate_tolerance),
        ];
        for (k, v) in positive {
            if !(v > 0.0 && v.is_finite()) {
                return Err(CliError::Config(format!("{k} must be positive, got {v}")));
            }
        }
        if !(self.validate_offset >= 0.0) {
            return Err(CliError::Config(
                "validate_offset must not be negative".into(),
            ));
        }
        if let Some(f) = self.f_max {
            if !(f > 0.0) {
                return Err(CliError::Config(format!("f_max must be positive, got {f}")));
            }
        }
        if !(self.points_per_wavelength >= 4.0) {
            return Err(CliError::Config(
                "points_per_wavelength must be at least 4".into(),
            ));
        }
        let counts = [
            ("ns", self.ns),
            ("shots", self.shots),
            ("receiver_stride", self.receiver_stride),
            ("n_b", self.n_b),
            ("reps", self.reps),
            ("tune_lo", self.tune_lo),
        ];
        for (k, v) in counts {
            if v == 0 {
                return Err(CliError::Config(format!("{k} must be at least 1")));
            }
        }
        if self.threads == Some(0) {
            return Err(CliError::Config("threads must be at least 1".into()));
        }
        if self.velocity == VelocityKind::File && self.velocity_file.is_none() {
            return Err(CliError::Config(
                "velocity = file requires velocity_file".into(),
            ));
        }
        if let Some(src) = &self.sources {
            if src.is_empty() {
                return Err(CliError::Config("sources must not be empty".into()));
            }
        }
        self.scheduler.policy(self.chunk)?;
        self.csa_params().validate()?;
        for g in self.geometries_unchecked(&grid)? {
            if self.receivers && g.receivers.is_empty() {
                return Err(CliError::Config(
                    "receiver layout selects no grid points".into(),
                ));
            }
        }
        Ok(())
    }

    pub fn grid(&self) -> Result<Grid3, CliError> {
        Ok(Grid3::new(
            [self.n1, self.n2, self.n3],
            [self.dx1, self.dx2, self.dx3],
            self.wb,
        )?)
    }

    pub fn velocity_model(&self) -> Result<VelocityModel, CliError> {
        let grid = self.grid()?;
        Ok(match self.velocity {
            VelocityKind::TwoLayer => build_two_layer_model(grid, self.v_top, self.v_bottom)?,
            VelocityKind::Homogeneous => VelocityModel::homogeneous(grid, self.v_const)?,
            VelocityKind::File => {
                let path = self.velocity_file.as_ref().expect("validated");
                load_velocity_model(path, grid)?
            }
        })
    }

    pub fn source_positions(&self) -> Vec<GridPoint> {
        if let Some(s) = &self.sources {
            return s.clone();
        }
        (0..self.shots)
            .map(|k| {
                GridPoint::new(
                    (k + 1) * self.n1 / (self.shots + 1),
                    self.n2 / 2,
                    self.source_i3,
                )
            })
            .collect()
    }

    fn receivers_for(&self, src: GridPoint) -> Vec<GridPoint> {
        if !self.receivers {
            return Vec::new();
        }
        let depth = self.receiver_i3.unwrap_or(src.i3);
        let near = |i: usize, c: usize| self.receiver_aperture.is_none_or(|a| i.abs_diff(c) <= a);
        let mut out = Vec::new();
        for i1 in (0..self.n1).step_by(self.receiver_stride) {
            for i2 in (0..self.n2).step_by(self.receiver_stride) {
                if near(i1, src.i1) && near(i2, src.i2) {
                    out.push(GridPoint::new(i1, i2, depth));
                }
            }
        }
        out
    }

    fn wavelet(&self, at: GridPoint) -> Result<RickerSource, CliError> {
        Ok(match self.source_delay {
            Some(t0) => RickerSource::with_delay(self.f_peak, t0, at)?,
            None => RickerSource::new(self.f_peak, at)?,
        })
    }

    fn geometries_unchecked(&self, grid: &Grid3) -> Result<Vec<AcquisitionGeometry>, CliError> {
        self.source_positions()
            .into_iter()
            .map(|s| {
                Ok(AcquisitionGeometry::new(
                    grid,
                    self.wavelet(s)?,
                    self.receivers_for(s),
                    self.ns,
                    self.dt,
                )?)
            })
            .collect()
    }

    /// One acquisition geometry per shot.
    pub fn geometries(&self) -> Result<Vec<AcquisitionGeometry>, CliError> {
        let grid = self.grid()?;
        self.geometries_unchecked(&grid)
    }

    pub fn f_max(&self) -> f64 {
        self.f_max
            .unwrap_or_else(|| chunktune::model::default_f_max(self.f_peak))
    }

    pub fn csa_params(&self) -> CsaParams {
        let mut p = CsaParams::with_optimizers(self.csa_m);
        p.t_gen0 = self.csa_t_gen0;
        p.t_ac0 = self.csa_t_ac0;
        p.n_iter = self.csa_iters;
        p.alpha = self.csa_alpha;
        if let Some(s) = self.csa_sigma_d2 {
            p.sigma_d2 = s;
        }
        p.gen_decay = self.csa_gen_decay;
        p.seed = self.seed;
        p.rule = self.csa_rule;
        p
    }

    pub fn tune_config(&self) -> TuneConfig {
        TuneConfig {
            csa: self.csa_params(),
            lo: self.tune_lo,
            hi: None,
        }
    }

    /// Migration settings for the configured scheduler.
    pub fn rtm_config(&self) -> Result<RtmConfig, CliError> {
        self.rtm_config_for(self.scheduler, self.chunk)
    }

    pub fn rtm_config_for(
        &self,
        kind: SchedulerKind,
        chunk: Option<usize>,
    ) -> Result<RtmConfig, CliError> {
        let policy = kind.policy(chunk)?;
        Ok(RtmConfig {
            policy: policy.unwrap_or_else(SchedulePolicy::static_default),
            n_b: self.n_b,
            n_c: self.n_c,
            tune: policy.is_none().then(|| self.tune_config()),
        })
    }

    /// Thread count: config, then `CHUNKTUNE_THREADS`, then the hardware.
    pub fn resolve_threads(&self) -> Result<usize, CliError> {
        if let Some(t) = self.threads {
            return Ok(t);
        }
        Ok(threads_from_env()?.unwrap_or_else(chunktune::parsched::hardware_threads))
    }
}
