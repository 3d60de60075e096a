use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use chunktune_cli::commands::{speedup_percent, BENCH_FILE};
use chunktune_cli::{
    cmd_bench, cmd_migrate, cmd_model, cmd_tune, cmd_validate, CliError, RunConfig, SchedulerKind,
};

#[derive(Parser)]
#[command(
    name = "chunktune",
    version,
    about = "Seismic modeling and migration with tuned loop scheduling"
)]
struct Cli {
    /// Config file of `key = value` lines; defaults apply to missing keys.
    #[arg(short, long, global = true)]
    config: Option<PathBuf>,

    /// Override one config key, e.g. `--set ns=300`. Repeatable.
    #[arg(long = "set", value_name = "KEY=VALUE", global = true)]
    set: Vec<String>,

    #[arg(long, global = true)]
    threads: Option<usize>,

    #[arg(long, global = true)]
    seed: Option<u64>,

    #[arg(long, global = true)]
    output_dir: Option<PathBuf>,

    /// static | auto | guided | dynamic | tuned
    #[arg(long, global = true)]
    scheduler: Option<String>,

    #[arg(long, global = true)]
    chunk: Option<usize>,

    #[arg(long, global = true)]
    csa_iters: Option<usize>,

    #[arg(long, global = true)]
    csa_m: Option<usize>,

    #[arg(long, global = true)]
    reps: Option<usize>,

    /// Run even if the stability check fails.
    #[arg(long, global = true)]
    force: bool,

    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Forward-model every shot and write the seismograms.
    Model,
    /// Migrate the modeled shots into a stacked image.
    Migrate,
    /// Tune the chunk size on the first shot and write the search trace.
    Tune,
    /// Time the migration under each scheduler.
    Bench,
    /// Compare a homogeneous-model trace with the free-space solution.
    Validate,
    /// Print the resolved configuration with every key documented.
    Config,
}

impl Cli {
    fn overrides(&self) -> Result<Vec<(String, String)>, CliError> {
        let mut out = Vec::new();
        for s in &self.set {
            let (k, v) = s
                .split_once('=')
                .ok_or_else(|| CliError::Config(format!("--set expects KEY=VALUE, got `{s}`")))?;
            out.push((k.trim().to_string(), v.trim().to_string()));
        }
        let mut push = |k: &str, v: Option<String>| {
            if let Some(v) = v {
                out.push((k.to_string(), v));
            }
        };
        push("threads", self.threads.map(|v| v.to_string()));
        push("seed", self.seed.map(|v| v.to_string()));
        push(
            "output_dir",
            self.output_dir.as_ref().map(|p| p.display().to_string()),
        );
        push("scheduler", self.scheduler.clone());
        push("chunk", self.chunk.map(|v| v.to_string()));
        push("csa_iters", self.csa_iters.map(|v| v.to_string()));
        push("csa_m", self.csa_m.map(|v| v.to_string()));
        push("reps", self.reps.map(|v| v.to_string()));
        push("force", self.force.then(|| "true".to_string()));
        Ok(out)
    }

    fn load(&self) -> Result<RunConfig, CliError> {
        let overrides = self.overrides()?;
        match &self.config {
            Some(p) => RunConfig::load(p, &overrides),
            None => RunConfig::parse_with_overrides("", &overrides),
        }
    }
}

fn run(cli: &Cli) -> Result<(), CliError> {
    let cfg = cli.load()?;
    match cli.command {
        Command::Config => print!("{}", cfg.to_text()),
        Command::Model => {
            let out = cmd_model(&cfg)?;
            for p in &out.shot_files {
                println!("wrote {}", p.display());
            }
            println!("wrote {}", out.preview.display());
        }
        Command::Migrate => {
            let out = cmd_migrate(&cfg)?;
            let r = &out.report;
            println!("image = {}", out.image_path.display());
            println!("timing = {}", out.timing_path.display());
            println!("sha256 = {}", out.checksum);
            println!("policy = {}", r.policy);
            println!("total_seconds = {:.3}", r.total_seconds);
            println!("tuner_seconds = {:.3}", r.tuner_seconds);
            println!("tuner_fraction = {:.4}", r.tuner_fraction());
        }
        Command::Tune => {
            let r = cmd_tune(&cfg)?;
            println!("chunk = {}", r.chunk);
            println!("cost_seconds = {:e}", r.cost);
            println!("evaluations = {}", r.evaluations);
            println!("timed_evaluations = {}", r.timed_evaluations());
            println!("domain = [{}, {}]", r.domain.0, r.domain.1);
            println!("wall_seconds = {:.3}", r.wall_seconds);
        }
        Command::Bench => {
            let recs = cmd_bench(&cfg)?;
            print!("{}", chunktune_cli::commands::bench_csv(&recs));
            println!("sha256 = {}", recs[0].checksum);
            let find = |k: SchedulerKind| recs.iter().find(|r| r.scheduler == k);
            if let Some(tuned) = find(SchedulerKind::Tuned) {
                for base in [
                    SchedulerKind::Static,
                    SchedulerKind::Auto,
                    SchedulerKind::Guided,
                ] {
                    if let Some(b) = find(base) {
                        println!(
                            "speedup_vs_{} = {:+.1}%",
                            base.as_str(),
                            speedup_percent(b, tuned)
                        );
                    }
                }
            }
            println!("wrote {}", cfg.output_dir.join(BENCH_FILE).display());
        }
        Command::Validate => {
            let r = cmd_validate(&cfg)?;
            println!("offset_m = {}", r.offset_m);
            println!("mse = {:e}", r.mse);
            println!("tolerance = {:e}", r.tolerance);
            println!(
                "stability = {}",
                if r.stability.passes() {
                    "ok"
                } else {
                    "violated"
                }
            );
            println!("verdict = {}", if r.passed { "pass" } else { "fail" });
            if !r.passed {
                return Err(CliError::Numerical(format!(
                    "validation failed: mse {:e} exceeds {:e}",
                    r.mse, r.tolerance
                )));
            }
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match run(&cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
