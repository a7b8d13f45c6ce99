//! Command-line front end.
//!
//! Configuration is a flat `key = value` file (`#` starts a comment) merged
//! with `--set key=value` overrides. Every run writes `metadata.json` holding
//! the fully resolved key set, and that file is accepted by `--config` too,
//! so a run can be replayed from its own output.

use std::collections::BTreeMap;
use std::ffi::OsString;
use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use clap::{Parser, Subcommand};
use rayon::prelude::*;
use serde_json::json;

use crate::error::{Error, Result};
use crate::model::{DiffusivityModel, PotentialModel, ReactionModel};
use crate::output::{fmt17, row, write_file};
use crate::pde::{self, Discretisation, Integrator, Regularisation, SimulationConfig};
use crate::regularization::{solve_weight_parameter, RegularisationWeight, WeightFamily};
use crate::shock::{self, ShockFamily, ShockPosition, ShockRule};
use crate::wave::{self, ShootingOptions, SpeedSearch};

pub const OUT_ENV: &str = "SHOCKSELECT_OUT";

const LENGTH_TABLE_POINTS: usize = 201;

/// Known keys and their defaults; an empty default means "unset".
const DEFAULTS: &[(&str, &str)] = &[
    ("model.a", "0.2"),
    ("model.b", "0.4"),
    ("model.delta", "0.5"),
    ("model.poly", ""),
    ("reaction.gamma", "0.5"),
    ("reg.family", "exponential"),
    ("reg.A", ""),
    ("shock.rule", "continuous-diffusivity"),
    ("wave.c", ""),
    ("wave.c_min", "0"),
    ("wave.c_max", "0.5"),
    ("wave.scan_step", "0.005"),
    ("sweep.cmd", "analyze"),
    ("sweep.var", "model.delta"),
    ("sweep.start", ""),
    ("sweep.stop", ""),
    ("sweep.step", ""),
    ("sim.x_min", "0"),
    ("sim.x_max", "10"),
    ("sim.dx", "0.001"),
    ("sim.t_end", "20"),
    ("sim.snapshot_step", "2"),
    ("sim.snapshot_times", ""),
    ("sim.epsilon", "0.01"),
    ("sim.regularisation", "linear"),
    ("sim.discretisation", "central"),
    ("sim.x0", ""),
    ("sim.left_value", "1"),
    ("sim.right_value", "0"),
    ("sim.integrator", "rosenbrock"),
    ("sim.rtol", "1e-6"),
    ("sim.atol", "1e-9"),
    ("out.dir", "out"),
];

#[derive(Debug, Parser)]
#[command(
    name = "shockselect",
    version,
    about = "Shock selection in forward-backward diffusion"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
    /// key = value configuration file (or a metadata.json from an earlier run)
    #[arg(long, global = true, value_name = "PATH")]
    pub config: Option<PathBuf>,
    /// Override one key; repeatable
    #[arg(long = "set", global = true, value_name = "KEY=VALUE")]
    pub set: Vec<String>,
    /// Output directory (the SHOCKSELECT_OUT environment variable wins)
    #[arg(long, global = true, value_name = "DIR")]
    pub out: Option<PathBuf>,
    /// Worker threads for sweeps
    #[arg(long, global = true, value_name = "N")]
    pub workers: Option<usize>,
    /// Also write a gnuplot script next to the data
    #[arg(long = "gnuplot-script", global = true)]
    pub gnuplot_script: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Subcommand)]
pub enum Command {
    /// Shock positions, shock-length table and its extrema
    Analyze,
    /// Solve for the weight parameter selecting the target shock
    SolveA,
    /// Travelling-wave speed by shooting
    WaveSpeed,
    /// Time-dependent simulation of the regularised equation
    Simulate,
    /// Repeat a command over a parameter range
    Sweep,
}

/// Fully resolved key set.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RunConfig {
    values: BTreeMap<String, String>,
}

impl Default for RunConfig {
    fn default() -> Self {
        RunConfig {
            values: DEFAULTS
                .iter()
                .map(|(k, v)| (k.to_string(), v.to_string()))
                .collect(),
        }
    }
}

impl RunConfig {
    pub fn set(&mut self, key: &str, value: &str) -> Result<()> {
        match self.values.get_mut(key) {
            Some(slot) => {
                *slot = value.trim().to_string();
                Ok(())
            }
            None => Err(Error::Config(format!("unknown key '{key}'"))),
        }
    }

    /// Applies a `key=value` assignment.
    pub fn assign(&mut self, text: &str) -> Result<()> {
        let (k, v) = text
            .split_once('=')
            .ok_or_else(|| Error::Config(format!("expected key=value, got '{text}'")))?;
        self.set(k.trim(), v)
    }

    /// Merges a `key = value` text; blank lines and `#` comments are skipped.
    pub fn merge_text(&mut self, text: &str) -> Result<()> {
        for (n, line) in text.lines().enumerate() {
            let line = line.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            self.assign(line)
                .map_err(|e| Error::Config(format!("line {}: {e}", n + 1)))?;
        }
        Ok(())
    }

    /// Merges the `config` object of a metadata file.
    pub fn merge_metadata(&mut self, text: &str) -> Result<()> {
        let meta: serde_json::Value = serde_json::from_str(text)?;
        let map = meta
            .get("config")
            .and_then(|c| c.as_object())
            .ok_or_else(|| Error::Config("metadata has no 'config' object".into()))?;
        for (k, v) in map {
            let v = v.as_str().ok_or_else(|| {
                Error::Config(format!("metadata value for '{k}' is not a string"))
            })?;
            self.set(k, v)?;
        }
        Ok(())
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        let mut cfg = RunConfig::default();
        if text.trim_start().starts_with('{') {
            cfg.merge_metadata(&text)?;
        } else {
            cfg.merge_text(&text)?;
        }
        Ok(cfg)
    }

    pub fn get(&self, key: &str) -> &str {
        self.values.get(key).map(String::as_str).unwrap_or("")
    }

    pub fn values(&self) -> &BTreeMap<String, String> {
        &self.values
    }

    pub fn f64(&self, key: &str) -> Result<f64> {
        let v = self.get(key);
        v.parse()
            .map_err(|_| Error::Config(format!("{key} = '{v}' is not a number")))
    }

    pub fn opt_f64(&self, key: &str) -> Result<Option<f64>> {
        if self.get(key).is_empty() {
            Ok(None)
        } else {
            self.f64(key).map(Some)
        }
    }

    fn list(&self, key: &str) -> Result<Vec<f64>> {
        self.get(key)
            .split(',')
            .map(|s| {
                s.trim()
                    .parse()
                    .map_err(|_| Error::Config(format!("{key}: '{s}' is not a number")))
            })
            .collect()
    }

    pub fn model(&self) -> Result<PotentialModel> {
        let d = if self.get("model.poly").is_empty() {
            DiffusivityModel::cubic(
                self.f64("model.a")?,
                self.f64("model.b")?,
                self.f64("model.delta")?,
            )?
        } else {
            DiffusivityModel::polynomial(self.list("model.poly")?)?
        };
        Ok(PotentialModel::new(d))
    }

    pub fn reaction(&self) -> Result<ReactionModel> {
        match self.get("reaction.gamma") {
            "" | "none" => Ok(ReactionModel::Zero),
            _ => ReactionModel::cubic(self.f64("reaction.gamma")?),
        }
    }

    pub fn rule(&self) -> Result<ShockRule> {
        match self.get("shock.rule") {
            "equal-area" => Ok(ShockRule::EqualArea),
            "continuous-diffusivity" | "continuous-d" => Ok(ShockRule::ContinuousDiffusivity),
            "lower-knee" => Ok(ShockRule::LowerKnee),
            "upper-knee" => Ok(ShockRule::UpperKnee),
            other => Err(Error::Config(format!("unknown shock rule '{other}'"))),
        }
    }

    pub fn family(&self) -> Result<WeightFamily> {
        self.get("reg.family").parse()
    }

    pub fn search(&self) -> Result<SpeedSearch> {
        Ok(SpeedSearch {
            c_min: self.f64("wave.c_min")?,
            c_max: self.f64("wave.c_max")?,
            scan_step: self.f64("wave.scan_step")?,
        })
    }

    pub fn simulation(&self) -> Result<SimulationConfig> {
        let t_end = self.f64("sim.t_end")?;
        let snapshot_times = if self.get("sim.snapshot_times").is_empty() {
            SimulationConfig::every(self.f64("sim.snapshot_step")?, t_end)
        } else {
            self.list("sim.snapshot_times")?
        };
        let regularisation = match self.get("sim.regularisation") {
            "linear" => Regularisation::Linear,
            "nonlinear" => Regularisation::Nonlinear,
            other => return Err(Error::Config(format!("unknown regularisation '{other}'"))),
        };
        let discretisation = match self.get("sim.discretisation") {
            "central" => Discretisation::Central,
            "conservative" => Discretisation::Conservative,
            other => return Err(Error::Config(format!("unknown discretisation '{other}'"))),
        };
        let integrator = match self.get("sim.integrator") {
            "rosenbrock" => Integrator::Rosenbrock,
            "explicit" => Integrator::Explicit,
            other => return Err(Error::Config(format!("unknown integrator '{other}'"))),
        };
        let weight = match regularisation {
            Regularisation::Linear => RegularisationWeight::constant(),
            Regularisation::Nonlinear => self.weight()?,
        };
        let cfg = SimulationConfig {
            x_min: self.f64("sim.x_min")?,
            x_max: self.f64("sim.x_max")?,
            dx: self.f64("sim.dx")?,
            t_end,
            snapshot_times,
            epsilon: self.f64("sim.epsilon")?,
            regularisation,
            weight,
            discretisation,
            x0: self.opt_f64("sim.x0")?,
            left_value: self.f64("sim.left_value")?,
            right_value: self.f64("sim.right_value")?,
            integrator,
            rtol: self.f64("sim.rtol")?,
            atol: self.f64("sim.atol")?,
        };
        cfg.validate()?;
        Ok(cfg)
    }

    /// Weight from `reg.family` and `reg.A`; an unset `A` is solved for so
    /// that the weight selects the target shock.
    pub fn weight(&self) -> Result<RegularisationWeight> {
        let family = self.family()?;
        match (family, self.opt_f64("reg.A")?) {
            (WeightFamily::Constant, _) => Ok(RegularisationWeight::constant()),
            (_, Some(a)) => RegularisationWeight::new(family, a),
            (_, None) => {
                let model = self.model()?;
                let target = target_shock(&model, self.rule()?)?;
                Ok(solve_weight_parameter(&model, &target, family)?.weight)
            }
        }
    }

    fn metadata(&self, command: &str, results: serde_json::Value) -> serde_json::Value {
        json!({
            "program": env!("CARGO_PKG_NAME"),
            "version": env!("CARGO_PKG_VERSION"),
            "command": command,
            "config": self.values,
            "results": results,
        })
    }
}

/// Shock selected by a named rule.
pub fn target_shock(model: &PotentialModel, rule: ShockRule) -> Result<ShockPosition> {
    match rule {
        ShockRule::EqualArea => shock::equal_area_shock(model),
        ShockRule::ContinuousDiffusivity => shock::continuous_diffusivity_shock(model),
        ShockRule::LowerKnee => Ok(shock::knee_shocks(model)?.0),
        ShockRule::UpperKnee => Ok(shock::knee_shocks(model)?.1),
        ShockRule::Custom => Err(Error::Config(
            "custom shocks have no rule to evaluate".into(),
        )),
    }
}

struct Context {
    config: RunConfig,
    out: PathBuf,
    workers: Option<usize>,
    gnuplot: bool,
}

fn command_name(c: Command) -> &'static str {
    match c {
        Command::Analyze => "analyze",
        Command::SolveA => "solve-a",
        Command::WaveSpeed => "wave-speed",
        Command::Simulate => "simulate",
        Command::Sweep => "sweep",
    }
}

fn parse_command(name: &str) -> Result<Command> {
    match name {
        "analyze" => Ok(Command::Analyze),
        "solve-a" => Ok(Command::SolveA),
        "wave-speed" => Ok(Command::WaveSpeed),
        other => Err(Error::Config(format!(
            "sweep.cmd must be analyze, solve-a or wave-speed, got '{other}'"
        ))),
    }
}

/// Parses arguments, runs the command and returns the process exit code.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return code;
        }
    };
    match execute(&cli) {
        Ok(()) => 0,
        Err(e) => {
            eprintln!("error: {e}");
            e.exit_code()
        }
    }
}

pub fn execute(cli: &Cli) -> Result<()> {
    let mut config = match &cli.config {
        Some(path) => RunConfig::load(path)?,
        None => RunConfig::default(),
    };
    for s in &cli.set {
        config.assign(s)?;
    }
    let out = match std::env::var_os(OUT_ENV) {
        Some(dir) if !dir.is_empty() => PathBuf::from(dir),
        _ => cli
            .out
            .clone()
            .unwrap_or_else(|| PathBuf::from(config.get("out.dir"))),
    };
    config.set("out.dir", &out.to_string_lossy())?;
    if cli.workers == Some(0) {
        return Err(Error::Config("--workers must be at least 1".into()));
    }
    let ctx = Context {
        config,
        out,
        workers: cli.workers,
        gnuplot: cli.gnuplot_script,
    };
    match cli.command {
        Command::Analyze => analyze(&ctx),
        Command::SolveA if !ctx.config.get("sweep.start").is_empty() => {
            sweep_with(&ctx, Command::SolveA)
        }
        Command::SolveA => solve_a(&ctx),
        Command::WaveSpeed => wave_speed(&ctx),
        Command::Simulate => simulate(&ctx),
        Command::Sweep => sweep_with(&ctx, parse_command(ctx.config.get("sweep.cmd"))?),
    }
}

fn finish(
    ctx: &Context,
    command: Command,
    results: serde_json::Value,
    script: Option<String>,
) -> Result<()> {
    let meta = ctx.config.metadata(command_name(command), results);
    write_file(
        &ctx.out.join("metadata.json"),
        &serde_json::to_string_pretty(&meta)?,
    )?;
    if let (true, Some(s)) = (ctx.gnuplot, script) {
        write_file(&ctx.out.join("plot.gp"), &s)?;
    }
    Ok(())
}

fn shock_row(s: &ShockPosition) -> String {
    format!(
        "{},{}",
        s.rule.name(),
        row(&[s.u_left, s.u_right, s.phi_s, s.length()])
    )
}

struct Analysis {
    shocks: [ShockPosition; 4],
}

fn analysis(model: &PotentialModel) -> Result<Analysis> {
    let (lower, upper) = shock::knee_shocks(model)?;
    Ok(Analysis {
        shocks: [
            lower,
            upper,
            shock::equal_area_shock(model)?,
            shock::continuous_diffusivity_shock(model)?,
        ],
    })
}

fn analyze(ctx: &Context) -> Result<()> {
    let model = ctx.config.model()?;
    let a = analysis(&model)?;
    let mut csv = String::from("rule,u_left,u_right,phi_s,length\n");
    for s in &a.shocks {
        csv.push_str(&shock_row(s));
        csv.push('\n');
    }
    write_file(&ctx.out.join("shocks.csv"), &csv)?;
    print!("{csv}");

    let family = ShockFamily::new(&model);
    let (lo, hi) = family.range();
    let mut table = String::from("phi_s,u_left,u_right,length,dlength\n");
    for k in 0..LENGTH_TABLE_POINTS {
        let phi = lo + (hi - lo) * k as f64 / (LENGTH_TABLE_POINTS - 1) as f64;
        let phi = phi.min(hi);
        let (l, r) = family.endpoints_for_phi(phi)?;
        let dl = family.shock_length_derivative(phi)?;
        table.push_str(&row(&[phi, l, r, r - l, dl]));
        table.push('\n');
    }
    write_file(&ctx.out.join("shock_length.csv"), &table)?;

    let extrema = shock::shock_length_extrema(&model)?;
    let mut ex = String::from("phi_s,length,second_derivative,kind\n");
    for e in &extrema {
        let _ = writeln!(
            ex,
            "{},{:?}",
            row(&[e.phi_s, e.length, e.second_derivative]),
            e.kind
        );
    }
    write_file(&ctx.out.join("extrema.csv"), &ex)?;

    let script = "set datafile separator ','\n\
        set key autotitle columnhead\n\
        set xlabel 'Phi_S'\n\
        set ylabel 'S_L'\n\
        plot 'shock_length.csv' using 1:4 with lines\n"
        .to_string();
    finish(
        ctx,
        Command::Analyze,
        json!({ "shocks": a.shocks, "extrema": extrema }),
        Some(script),
    )
}

fn solve_a(ctx: &Context) -> Result<()> {
    let model = ctx.config.model()?;
    let rule = ctx.config.rule()?;
    let family = ctx.config.family()?;
    let target = target_shock(&model, rule)?;
    let sol = solve_weight_parameter(&model, &target, family)?;
    let csv = format!(
        "family,rule,A,residual,quadrature_residual,sign_changes\n{},{},{},{}\n",
        family.name(),
        rule.name(),
        row(&[sol.weight.a, sol.residual, sol.quadrature_residual]),
        sol.sign_changes
    );
    write_file(&ctx.out.join("solve_a.csv"), &csv)?;
    println!("A = {} (residual {:e})", fmt17(sol.weight.a), sol.residual);
    finish(
        ctx,
        Command::SolveA,
        json!({ "target": target, "solution": sol }),
        None,
    )
}

fn wave_speed(ctx: &Context) -> Result<()> {
    let model = ctx.config.model()?;
    let reaction = ctx.config.reaction()?;
    let target = target_shock(&model, ctx.config.rule()?)?;
    let opts = ShootingOptions::default();
    let (results, shot) = match ctx.config.opt_f64("wave.c")? {
        Some(c) => {
            let shot = wave::shoot_manifolds(c, &target, &model, &reaction, &opts)?;
            let csv = format!("c,dp\n{}\n", row(&[c, shot.mismatch]));
            write_file(&ctx.out.join("dp.csv"), &csv)?;
            println!("c = {} dp = {}", fmt17(c), fmt17(shot.mismatch));
            (
                json!({ "c": c, "dp": shot.mismatch, "shock": target }),
                shot,
            )
        }
        None => {
            let sol =
                wave::solve_wave_speed(&target, &model, &reaction, &ctx.config.search()?, &opts)?;
            let mut scan = String::from("c,dp\n");
            for (c, dp) in &sol.scan {
                scan.push_str(&row(&[*c, *dp]));
                scan.push('\n');
            }
            write_file(&ctx.out.join("dp_scan.csv"), &scan)?;
            let csv = format!(
                "rule,c,weak_residual,dp,u_left,u_right\n{},{}\n",
                target.rule.name(),
                row(&[
                    sol.c,
                    sol.weak_residual,
                    sol.shot.mismatch,
                    target.u_left,
                    target.u_right
                ])
            );
            write_file(&ctx.out.join("speed.csv"), &csv)?;
            println!(
                "c = {} (weak residual {:e})",
                fmt17(sol.c),
                sol.weak_residual
            );
            let results = json!({
                "c": sol.c,
                "weak_residual": sol.weak_residual,
                "dp": sol.shot.mismatch,
                "shock": target,
            });
            (results, sol.shot)
        }
    };
    write_file(
        &ctx.out.join("unstable.csv"),
        &wave::trajectory_csv(&shot.unstable),
    )?;
    write_file(
        &ctx.out.join("stable.csv"),
        &wave::trajectory_csv(&shot.stable),
    )?;
    let script = "set datafile separator ','\n\
        set xlabel 'u'\n\
        set ylabel 'p'\n\
        plot 'unstable.csv' using 2:3 with lines title 'from u = 1', \
        'stable.csv' using 2:3 with lines title 'to u = 0'\n"
        .to_string();
    finish(ctx, Command::WaveSpeed, results, Some(script))
}

fn simulate(ctx: &Context) -> Result<()> {
    let model = ctx.config.model()?;
    let reaction = ctx.config.reaction()?;
    let sim = ctx.config.simulation()?;
    let predicted = match sim.regularisation {
        Regularisation::Linear => shock::equal_area_shock(&model)?,
        Regularisation::Nonlinear => crate::regularization::shock_for_weight(&model, &sim.weight)?,
    };
    let result = pde::integrate(&sim, &model, &reaction)?;
    let files = pde::write_result(&ctx.out, &result)?;
    if let Some(last) = result.snapshots.last() {
        let report = pde::discretisation_error_report(&last.u, sim.dx, sim.discretisation, &model);
        write_file(
            &ctx.out.join("discretisation_error.csv"),
            &report.to_csv(&result.grid),
        )?;
    }
    let fin = result.final_shock();
    match fin {
        Some(s) => println!(
            "t = {}: x_s = {}, u_left = {}, u_right = {} (predicted {}, {})",
            fmt17(sim.t_end),
            fmt17(s.x_s),
            fmt17(s.u_left),
            fmt17(s.u_right),
            fmt17(predicted.u_left),
            fmt17(predicted.u_right)
        ),
        None => println!("no front located in the final snapshot"),
    }
    if result.overshoot {
        eprintln!(
            "warning: profile left [{}, {}] (min {}, max {})",
            pde::OVERSHOOT_BAND.0,
            pde::OVERSHOOT_BAND.1,
            result.min_u,
            result.max_u
        );
    }
    let mut script =
        String::from("set datafile separator ','\nset xlabel 'x'\nset ylabel 'u'\nplot ");
    let snaps: Vec<String> = files
        .iter()
        .filter_map(|p| p.file_name().map(|n| n.to_string_lossy().into_owned()))
        .filter(|n| n.starts_with("snapshot_"))
        .map(|n| format!("'{n}' using 1:2 with lines title '{n}'"))
        .collect();
    script.push_str(&snaps.join(", "));
    script.push('\n');
    let results = json!({
        "simulation": sim,
        "predicted": predicted,
        "final_shock": fin,
        "speeds": result.speeds(),
        "steps": result.steps,
        "rejected_steps": result.rejected_steps,
        "min_u": result.min_u,
        "max_u": result.max_u,
        "overshoot": result.overshoot,
    });
    finish(ctx, Command::Simulate, results, Some(script))
}

/// Values `start, start + step, ...` up to `stop` inclusive.
pub fn sweep_values(start: f64, stop: f64, step: f64) -> Result<Vec<f64>> {
    if !(step > 0.0) || !(stop >= start) || !start.is_finite() || !stop.is_finite() {
        return Err(Error::Config(format!(
            "empty sweep range: start {start}, stop {stop}, step {step}"
        )));
    }
    let n = ((stop - start) / step + 1e-9).floor() as usize;
    // snap to 12 decimals so that e.g. 0.1 steps hit 0 exactly
    Ok((0..=n)
        .map(|k| ((start + k as f64 * step) * 1e12).round() / 1e12)
        .collect())
}

fn sweep_header(cmd: Command) -> &'static str {
    match cmd {
        Command::Analyze => {
            "lower_knee_u_left,lower_knee_u_right,upper_knee_u_left,upper_knee_u_right,\
             equal_area_u_left,equal_area_u_right,continuous_d_u_left,continuous_d_u_right"
        }
        Command::SolveA => "A,residual",
        _ => "c,weak_residual",
    }
}

fn sweep_row(cfg: &RunConfig, cmd: Command) -> Result<Vec<f64>> {
    let model = cfg.model()?;
    match cmd {
        Command::Analyze => {
            let a = analysis(&model)?;
            Ok(a.shocks
                .iter()
                .flat_map(|s| [s.u_left, s.u_right])
                .collect())
        }
        Command::SolveA => {
            let target = target_shock(&model, cfg.rule()?)?;
            let sol = solve_weight_parameter(&model, &target, cfg.family()?)?;
            Ok(vec![sol.weight.a, sol.residual])
        }
        _ => {
            let target = target_shock(&model, cfg.rule()?)?;
            let sol = wave::solve_wave_speed(
                &target,
                &model,
                &cfg.reaction()?,
                &cfg.search()?,
                &ShootingOptions::default(),
            )?;
            Ok(vec![sol.c, sol.weak_residual])
        }
    }
}

fn sweep_with(ctx: &Context, cmd: Command) -> Result<()> {
    let cfg = &ctx.config;
    let var = cfg.get("sweep.var").to_string();
    if var.starts_with("sweep.") || var == "out.dir" {
        return Err(Error::Config(format!("cannot sweep over '{var}'")));
    }
    let values = sweep_values(
        cfg.f64("sweep.start")?,
        cfg.f64("sweep.stop")?,
        cfg.f64("sweep.step")?,
    )?;
    let job = |v: &f64| -> Result<Vec<f64>> {
        let mut c = cfg.clone();
        c.set(&var, &fmt17(*v))?;
        sweep_row(&c, cmd)
    };
    let rows: Vec<Result<Vec<f64>>> = match ctx.workers {
        Some(n) => rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build()
            .map_err(|e| Error::Config(format!("thread pool: {e}")))?
            .install(|| values.par_iter().map(job).collect()),
        None => values.par_iter().map(job).collect(),
    };

    let width = sweep_header(cmd).split(',').count();
    let mut csv = format!("{var},status,{}\n", sweep_header(cmd));
    for (v, r) in values.iter().zip(&rows) {
        let (status, vals) = match r {
            Ok(vals) => ("ok".to_string(), vals.clone()),
            Err(e) => (
                e.to_string().replace([',', '\n'], ";"),
                vec![f64::NAN; width],
            ),
        };
        let _ = writeln!(csv, "{},{},{}", fmt17(*v), status, row(&vals));
    }
    let name = format!("sweep_{}.csv", command_name(cmd).replace('-', "_"));
    write_file(&ctx.out.join(&name), &csv)?;
    let failed = rows.iter().filter(|r| r.is_err()).count();
    println!(
        "{} rows, {} failed -> {}",
        rows.len(),
        failed,
        ctx.out.join(&name).display()
    );

    let script = format!(
        "set datafile separator ','\nset key autotitle columnhead\nset xlabel '{var}'\n\
         plot for [i=3:{}] '{name}' using 1:i with linespoints\n",
        width + 2
    );
    finish(
        ctx,
        Command::Sweep,
        json!({ "command": command_name(cmd), "rows": rows.len(), "failed": failed }),
        Some(script),
    )?;
    if failed == rows.len() {
        if let Some(Err(e)) = rows.into_iter().find(|r| r.is_err()) {
            return Err(e);
        }
    }
    Ok(())
}
