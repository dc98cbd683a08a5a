use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::sync::atomic::{AtomicUsize, Ordering};
use std::sync::Mutex;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde_json::json;

use softsnake::gaits::{GaitKind, GaitSpec};
use softsnake::harness::{
    export_plots, output, run_drop_test, run_gait, self_check, velocity_fit, ExperimentConfig,
};
use softsnake::integrator::Method;
use softsnake::{Error, Result};

#[derive(Parser)]
#[command(name = "softsnake", version, about = "Soft robotic snake dynamics experiments")]
struct Cli {
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Release the robot from the drop height and report how it settles.
    Drop(RunArgs),
    /// Drop, settle, then run a rolling gait and report its velocities.
    Gait(RunArgs),
    /// Fit gait velocities to an existing base_pose.csv.
    Metrics {
        /// base_pose.csv written by `gait`.
        input: PathBuf,
        #[command(flatten)]
        cfg: ConfigArgs,
    },
    /// Render SVG plots for every series CSV in a directory.
    Plot { dir: PathBuf },
    /// Parse and validate a config, printing the normalized TOML.
    ValidateConfig {
        config: PathBuf,
        /// Also run model self-checks at this many seeded random states.
        #[arg(long, value_name = "N")]
        check: Option<usize>,
        /// Seed for the self-checks (overrides the config).
        #[arg(long)]
        seed: Option<u64>,
    },
}

#[derive(Args, Clone)]
struct ConfigArgs {
    /// TOML experiment config; defaults apply when omitted.
    #[arg(long, short)]
    config: Option<PathBuf>,
    #[arg(long)]
    output_dir: Option<PathBuf>,
    /// Seed for randomized utilities.
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long, value_enum)]
    kind: Option<KindArg>,
    /// Peak PMA length change, m.
    #[arg(long)]
    amplitude: Option<f64>,
    /// Gait frequency, Hz.
    #[arg(long)]
    frequency: Option<f64>,
    /// Phase lag between sections, rad.
    #[arg(long)]
    phase_shift: Option<f64>,
    /// Gait duration, s.
    #[arg(long)]
    duration: Option<f64>,
    #[arg(long)]
    drop_height: Option<f64>,
    #[arg(long)]
    settle_time: Option<f64>,
    #[arg(long, value_enum)]
    method: Option<MethodArg>,
    #[arg(long)]
    rel_tol: Option<f64>,
    #[arg(long)]
    abs_tol: Option<f64>,
    /// Disable ground contact.
    #[arg(long)]
    no_contact: bool,
    /// Override any config field by dotted path, e.g. `robot.K_g=10000`.
    #[arg(long = "set", value_name = "PATH=VALUE")]
    sets: Vec<String>,
}

#[derive(Args)]
struct RunArgs {
    #[command(flatten)]
    cfg: ConfigArgs,
    /// Run each of these configs in parallel, each into
    /// `<output_dir>/<config file stem>`.
    #[arg(long, num_args = 1.., value_name = "CONFIG")]
    sweep: Vec<PathBuf>,
    /// Skip SVG rendering.
    #[arg(long)]
    no_plots: bool,
}

#[derive(Clone, Copy, ValueEnum)]
enum KindArg {
    Planar,
    Spatial,
}

#[derive(Clone, Copy, ValueEnum)]
enum MethodArg {
    ImplicitAdaptive,
    SemiImplicitFixed,
}

fn set_path(root: &mut toml::Table, path: &str, raw: &str) -> Result<()> {
    let value: toml::Value = match toml::from_str::<toml::Table>(&format!("v = {raw}")) {
        Ok(mut t) => t.remove("v").expect("key present"),
        Err(_) => toml::Value::String(raw.to_string()),
    };
    let mut keys: Vec<&str> = path.split('.').collect();
    let last = keys.pop().filter(|k| !k.is_empty()).ok_or_else(|| Error::Config(format!("empty --set path `{path}`")))?;
    let mut table = root;
    for k in keys {
        table = table
            .entry(k)
            .or_insert_with(|| toml::Value::Table(toml::Table::new()))
            .as_table_mut()
            .ok_or_else(|| Error::Config(format!("--set path `{path}`: `{k}` is not a table")))?;
    }
    table.insert(last.to_string(), value);
    Ok(())
}

impl ConfigArgs {
    fn load(&self, config: Option<&Path>) -> Result<ExperimentConfig> {
        let base = match config.or(self.config.as_deref()) {
            Some(p) => ExperimentConfig::load(p)?,
            None => ExperimentConfig::default(),
        };
        let mut cfg = if self.sets.is_empty() {
            base
        } else {
            let mut table: toml::Table = toml::from_str(&base.to_toml_string()?)
                .map_err(|e| Error::Config(e.to_string()))?;
            for s in &self.sets {
                let (path, raw) = s
                    .split_once('=')
                    .ok_or_else(|| Error::Config(format!("--set expects PATH=VALUE, got `{s}`")))?;
                set_path(&mut table, path.trim(), raw.trim())?;
            }
            let text = toml::to_string(&table).map_err(|e| Error::Config(e.to_string()))?;
            ExperimentConfig::from_toml_str(&text)?
        };
        if let Some(d) = &self.output_dir {
            cfg.output_dir = d.clone();
        }
        if let Some(s) = self.seed {
            cfg.seed = s;
        }
        if let Some(h) = self.drop_height {
            cfg.drop_height = h;
        }
        if let Some(t) = self.settle_time {
            cfg.settle_time = t;
        }
        if let Some(m) = self.method {
            cfg.integrator.method = match m {
                MethodArg::ImplicitAdaptive => Method::ImplicitAdaptive,
                MethodArg::SemiImplicitFixed => Method::SemiImplicitFixed,
            };
        }
        if let Some(v) = self.rel_tol {
            cfg.integrator.rel_tol = v;
        }
        if let Some(v) = self.abs_tol {
            cfg.integrator.abs_tol = v;
        }
        if self.no_contact {
            cfg.contact = false;
        }
        let gait_flags = self.kind.is_some()
            || self.amplitude.is_some()
            || self.frequency.is_some()
            || self.phase_shift.is_some()
            || self.duration.is_some();
        if gait_flags {
            let kind = match self.kind {
                Some(KindArg::Planar) => Some(GaitKind::PlanarRolling),
                Some(KindArg::Spatial) => Some(GaitKind::SpatialRolling),
                None => None,
            };
            let g = cfg
                .gait
                .get_or_insert_with(|| GaitSpec::new(kind.unwrap_or(GaitKind::PlanarRolling)));
            if let Some(k) = kind {
                g.kind = k;
            }
            if let Some(v) = self.amplitude {
                g.amplitude = v;
            }
            if let Some(v) = self.frequency {
                g.frequency = v;
            }
            if let Some(v) = self.phase_shift {
                g.phase_shift = Some(v);
            }
            if let Some(v) = self.duration {
                g.duration = v;
            }
        }
        cfg.validate()?;
        Ok(cfg)
    }
}

fn run_one(gait: bool, cfg: &ExperimentConfig, plots: bool) -> Result<serde_json::Value> {
    let dir = cfg.prepare_output_dir()?;
    let report = if gait {
        let mut cfg = cfg.clone();
        if cfg.gait.is_none() {
            cfg.gait = Some(GaitSpec::planar());
        }
        let run = run_gait(&cfg, Some(dir))?;
        json!({
            "output_dir": dir,
            "metrics": run.metrics,
            "stats": run.gait.stats,
        })
    } else {
        let run = run_drop_test(cfg, Some(dir))?;
        json!({ "output_dir": dir, "report": run.report })
    };
    if plots {
        export_plots(dir)?;
    }
    Ok(report)
}

fn run(gait: bool, args: &RunArgs) -> Result<serde_json::Value> {
    let plots = !args.no_plots;
    if args.sweep.is_empty() {
        let cfg = args.cfg.load(None)?;
        return run_one(gait, &cfg, plots);
    }
    let configs = args
        .sweep
        .iter()
        .map(|p| {
            let mut cfg = args.cfg.load(Some(p))?;
            let stem = p.file_stem().map(|s| s.to_os_string()).unwrap_or_default();
            cfg.output_dir = cfg.output_dir.join(stem);
            Ok((p.clone(), cfg))
        })
        .collect::<Result<Vec<_>>>()?;
    let workers = std::thread::available_parallelism()
        .map(|n| n.get())
        .unwrap_or(1)
        .min(configs.len());
    let next = AtomicUsize::new(0);
    let results: Mutex<Vec<Option<serde_json::Value>>> = Mutex::new(vec![None; configs.len()]);
    std::thread::scope(|s| {
        for _ in 0..workers {
            s.spawn(|| loop {
                let k = next.fetch_add(1, Ordering::SeqCst);
                let Some((path, cfg)) = configs.get(k) else { break };
                let v = match run_one(gait, cfg, plots) {
                    Ok(v) => json!({ "config": path, "ok": true, "result": v }),
                    Err(e) => json!({ "config": path, "ok": false, "error": error_json(&e) }),
                };
                results.lock().expect("no worker panics while holding the lock")[k] = Some(v);
            });
        }
    });
    let results: Vec<_> = results.into_inner().expect("workers joined").into_iter().flatten().collect();
    let failed = results.iter().filter(|r| r["ok"] == false).count();
    let summary = json!({ "runs": results, "failed": failed });
    if failed > 0 {
        return Err(Error::Config(format!(
            "{failed} of {} sweep runs failed: {summary}",
            configs.len()
        )));
    }
    Ok(summary)
}

fn metrics(input: &Path, cfg: &ConfigArgs) -> Result<serde_json::Value> {
    let cfg = cfg.load(None)?;
    let gait = cfg.gait.clone().unwrap_or_else(GaitSpec::planar);
    let (header, rows) = output::read_table(input)?;
    if header.len() < 3 || !header[1].starts_with('x') || !header[2].starts_with('y') {
        return Err(Error::Config(format!(
            "{}: expected columns t, x, y, ...",
            input.display()
        )));
    }
    let t: Vec<f64> = rows.iter().map(|r| r[0]).collect();
    let x: Vec<f64> = rows.iter().map(|r| r[1]).collect();
    let y: Vec<f64> = rows.iter().map(|r| r[2]).collect();
    let fit = velocity_fit(&t, &x, &y, &gait)?;
    let net = match (rows.first(), rows.last()) {
        (Some(a), Some(b)) => ((b[1] - a[1]).powi(2) + (b[2] - a[2]).powi(2)).sqrt(),
        _ => 0.0,
    };
    Ok(json!({
        "vx_cm_s": 100.0 * fit.vx,
        "vy_cm_s": 100.0 * fit.vy,
        "net_displacement_m": net,
        "cycles": fit.cycles,
        "window_s": fit.window,
    }))
}

fn error_json(e: &Error) -> serde_json::Value {
    let mut v = json!({ "error": e.kind(), "message": e.to_string() });
    match e {
        Error::StepUnderflow { t, step, last_state } => {
            v["t"] = json!(t);
            v["step"] = json!(step);
            v["last_q"] = json!(last_state.q.as_slice());
            v["last_qdot"] = json!(last_state.qdot.as_slice());
        }
        Error::IkNoConvergence { best, residual, .. } => {
            v["best"] = json!(best);
            v["residual"] = json!(residual);
        }
        _ => {}
    }
    v
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let res = match &cli.cmd {
        Cmd::Drop(a) => run(false, a),
        Cmd::Gait(a) => run(true, a),
        Cmd::Metrics { input, cfg } => metrics(input, cfg),
        Cmd::Plot { dir } => export_plots(dir).map(|files| json!({ "written": files })),
        Cmd::ValidateConfig { config, check, seed } => ExperimentConfig::load(config).and_then(|cfg| {
            let mut v = json!({ "valid": true, "normalized": cfg.to_toml_string()? });
            if let Some(n) = check {
                let seed = seed.unwrap_or(cfg.seed);
                v["self_check"] = serde_json::to_value(self_check(&cfg.robot, seed, *n)?)
                    .expect("plain numeric struct");
            }
            Ok(v)
        }),
    };
    match res {
        Ok(v) => {
            println!("{}", serde_json::to_string_pretty(&v).expect("json values serialize"));
            ExitCode::SUCCESS
        }
        Err(e) => {
            eprintln!("{}", error_json(&e));
            ExitCode::FAILURE
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn set_path_creates_tables_and_parses_values() {
        let mut t = toml::Table::new();
        set_path(&mut t, "robot.K_g", "10000.0").unwrap();
        set_path(&mut t, "integrator.method", "semi-implicit-fixed").unwrap();
        set_path(&mut t, "contact", "false").unwrap();
        assert_eq!(t["robot"]["K_g"].as_float(), Some(10000.0));
        assert_eq!(t["integrator"]["method"].as_str(), Some("semi-implicit-fixed"));
        assert_eq!(t["contact"].as_bool(), Some(false));
        assert!(set_path(&mut t, "contact.x", "1").is_err());
    }

    #[test]
    fn flags_override_config() {
        let args = ConfigArgs::parse_from([
            "x",
            "--kind",
            "spatial",
            "--frequency",
            "0.25",
            "--set",
            "robot.K_g=5000.0",
            "--seed",
            "9",
        ]);
        let cfg = args.load(None).unwrap();
        let g = cfg.gait.unwrap();
        assert_eq!(g.kind, GaitKind::SpatialRolling);
        assert_eq!(g.frequency, 0.25);
        assert_eq!(cfg.robot.ground_stiffness, 5000.0);
        assert_eq!(cfg.seed, 9);
    }

    #[test]
    fn invalid_override_is_a_domain_error() {
        let args = ConfigArgs::parse_from(["x", "--amplitude", "0.2"]);
        let err = args.load(None).unwrap_err();
        assert_eq!(error_json(&err)["error"], "input_domain");
    }

    #[derive(Parser)]
    struct Wrap {
        #[command(flatten)]
        a: ConfigArgs,
    }

    impl ConfigArgs {
        fn parse_from<const N: usize>(argv: [&str; N]) -> Self {
            Wrap::parse_from(argv).a
        }
    }
}
