//! Command dispatch and output rendering.

use std::error::Error;
use std::fs;
use std::io::Write;
use std::path::PathBuf;
use std::process::ExitCode;

use siclab::experiments::{self, ExperimentKind, ExperimentSpec, PlantSpec};
use siclab::model::{FeedbackGain, LinearSystem, NoiseConfig};
use siclab::numfmt::g17;
use siclab::security::{self, SecurityRequirement};
use siclab::seed::derive_seed;
use siclab::sysid;

use crate::cli::{
    Cli, Command, DesignArgs, Format, GammaArgs, IdentifyArgs, LoopCommand, SecureArgs, SweepArgs,
    SweepKind,
};

type CliResult = Result<ExitCode, Box<dyn Error>>;

/// Shared flags every handler needs.
struct Context {
    seed: u64,
    format: Format,
    output: Option<PathBuf>,
    plant: Option<String>,
}

pub fn run(args: Cli) -> CliResult {
    let ctx = Context {
        seed: args.seed,
        format: args.format,
        output: args.output,
        plant: args.plant,
    };
    if args.dump_plant {
        if args.command.is_some() {
            return Err("--dump-plant does not take a subcommand".into());
        }
        let sys = resolve_plant(&ctx)?;
        emit(&ctx, &(sys.to_json_string() + "\n"))?;
        return Ok(ExitCode::SUCCESS);
    }
    let command = args.command.ok_or("missing subcommand; see --help")?;
    match command {
        Command::Gamma(cmd) => gamma(&ctx, &resolve_plant(&ctx)?, &cmd),
        Command::Secure(cmd) => secure(&ctx, &resolve_plant(&ctx)?, &cmd),
        Command::Identify(cmd) => identify(&ctx, &resolve_plant(&ctx)?, &cmd),
        Command::Sweep(cmd) => sweep(&ctx, &cmd, None),
        Command::Design(cmd) => design(&ctx, &resolve_plant(&ctx)?, &cmd),
        Command::ClosedLoop(cmd) => {
            let open = resolve_plant(&ctx)?;
            let gain_text = fs::read_to_string(&cmd.gain_file)
                .map_err(|e| format!("cannot read gain file {}: {e}", cmd.gain_file.display()))?;
            let gain = FeedbackGain::from_json_str(&gain_text)?;
            let closed = open.close_loop(&gain)?;
            match cmd.command {
                LoopCommand::Gamma(inner) => gamma(&ctx, &closed, &inner),
                LoopCommand::Secure(inner) => secure(&ctx, &closed, &inner),
                LoopCommand::Identify(inner) => identify(&ctx, &closed, &inner),
                LoopCommand::Sweep(inner) => sweep(&ctx, &inner, Some(cmd.gain_file.clone())),
                LoopCommand::Design(inner) => design(&ctx, &closed, &inner),
            }
        }
    }
}

fn resolve_plant(ctx: &Context) -> Result<LinearSystem, Box<dyn Error>> {
    match ctx.plant.as_deref() {
        None => Err("missing --plant (path to a plant JSON file, or \"paper\")".into()),
        Some("paper") => Ok(LinearSystem::reference_plant()),
        Some(path) => {
            let text = fs::read_to_string(path)
                .map_err(|e| format!("cannot read plant file {path}: {e}"))?;
            Ok(LinearSystem::from_json_str(&text)?)
        }
    }
}

fn emit(ctx: &Context, text: &str) -> Result<(), Box<dyn Error>> {
    match &ctx.output {
        Some(path) => fs::write(path, text)
            .map_err(|e| format!("cannot write {}: {e}", path.display()).into()),
        None => {
            std::io::stdout().write_all(text.as_bytes())?;
            Ok(())
        }
    }
}

fn gamma(ctx: &Context, sys: &LinearSystem, cmd: &GammaArgs) -> CliResult {
    let noise = NoiseConfig::new(cmd.sigma_w2, cmd.sigma_u2)?;
    let grid = match (cmd.n, &cmd.n_grid) {
        (Some(n), None) => vec![n],
        (None, Some(text)) => parse_grid(text)?,
        _ => return Err("provide exactly one of --n and --n-grid".into()),
    };
    let profile = security::complexity_profile(sys, &noise, &grid)?;

    let text = match ctx.format {
        Format::Csv => {
            let mut out = String::new();
            if cmd.explain {
                out.push_str(&format!("# tr_psi1={}\n", g17(profile.tr_psi1)));
                out.push_str(&format!("# tr_psi2={}\n", g17(profile.tr_psi2)));
                out.push_str(&format!("# r_sigma={}\n", g17(profile.variance_ratio)));
                out.push_str(&format!(
                    "# spectral_radius={}\n",
                    g17(profile.spectral_radius)
                ));
            }
            out.push_str(if cmd.approx {
                "N,gamma_exact,gamma_approx\n"
            } else {
                "N,gamma_exact\n"
            });
            for row in &profile.rows {
                if cmd.approx {
                    out.push_str(&format!(
                        "{},{},{}\n",
                        row.n_samples,
                        g17(row.gamma_exact),
                        g17(row.gamma_approx)
                    ));
                } else {
                    out.push_str(&format!("{},{}\n", row.n_samples, g17(row.gamma_exact)));
                }
            }
            out
        }
        Format::Json => {
            let rows: Vec<serde_json::Value> = profile
                .rows
                .iter()
                .map(|row| {
                    let mut object = serde_json::json!({
                        "N": row.n_samples,
                        "gamma_exact": row.gamma_exact,
                    });
                    if cmd.approx {
                        object["gamma_approx"] = row.gamma_approx.into();
                    }
                    object
                })
                .collect();
            let mut document = serde_json::json!({ "rows": rows });
            if cmd.explain {
                document["explain"] = serde_json::json!({
                    "tr_psi1": profile.tr_psi1,
                    "tr_psi2": profile.tr_psi2,
                    "r_sigma": profile.variance_ratio,
                    "spectral_radius": profile.spectral_radius,
                });
            }
            serde_json::to_string_pretty(&document)? + "\n"
        }
    };
    emit(ctx, &text)?;
    Ok(ExitCode::SUCCESS)
}

fn secure(ctx: &Context, sys: &LinearSystem, cmd: &SecureArgs) -> CliResult {
    let noise = NoiseConfig::new(cmd.sigma_w2, cmd.sigma_u2)?;
    let req =
        SecurityRequirement::new(cmd.gamma_c, cmd.tau_c, cmd.flops, cmd.lambda, cmd.key_mode)?;
    let verdict = security::is_secure(sys, &noise, &req)?;
    emit(ctx, &(serde_json::to_string_pretty(&verdict)? + "\n"))?;
    Ok(if verdict.secure {
        ExitCode::SUCCESS
    } else {
        ExitCode::from(3)
    })
}

fn identify(ctx: &Context, sys: &LinearSystem, cmd: &IdentifyArgs) -> CliResult {
    let noise = NoiseConfig::new(cmd.sigma_w2, cmd.sigma_u2)?;
    if cmd.n < 2 {
        return Err(security::SecurityError::SampleCountTooSmall { got: cmd.n }.into());
    }
    let outcome = sysid::mean_error(sys, &noise, cmd.n as usize, cmd.trials, ctx.seed)?;
    // gamma is undefined without process noise; the column stays empty then
    let gamma = (noise.sigma_w_sq() > 0.0)
        .then(|| security::gamma_exact(sys, &noise, cmd.n))
        .transpose()?;

    if let Some(path) = &cmd.dump {
        let first_seed = derive_seed(ctx.seed, &[0]);
        let data = sysid::simulate_attack(sys, &noise, cmd.n as usize, first_seed)?;
        fs::write(path, data.to_csv())
            .map_err(|e| format!("cannot write {}: {e}", path.display()))?;
    }

    let text = match ctx.format {
        Format::Csv => format!(
            "N,trials,mean_epsilon,stderr,gamma_exact\n{},{},{},{},{}\n",
            cmd.n,
            cmd.trials,
            g17(outcome.mean),
            g17(outcome.std_error),
            gamma.map(g17).unwrap_or_default()
        ),
        Format::Json => {
            serde_json::to_string_pretty(&serde_json::json!({
                "N": cmd.n,
                "trials": cmd.trials,
                "mean_epsilon": outcome.mean,
                "stderr": outcome.std_error,
                "gamma_exact": gamma,
            }))? + "\n"
        }
    };
    emit(ctx, &text)?;
    Ok(ExitCode::SUCCESS)
}

fn sweep(ctx: &Context, cmd: &SweepArgs, gain_file: Option<PathBuf>) -> CliResult {
    let mut spec = match cmd.kind {
        SweepKind::ErrorSweep => {
            let plant = match ctx.plant.as_deref() {
                None | Some("paper") => PlantSpec::Builtin,
                Some(path) => PlantSpec::File(PathBuf::from(path)),
            };
            ExperimentSpec::error_sweep(plant, ctx.seed)
        }
        SweepKind::VarianceGrid => ExperimentSpec {
            plant: PlantSpec::Ladder { count: cmd.plants },
            ..ExperimentSpec::variance_grid(ctx.seed)
        },
        SweepKind::GramianSweep => ExperimentSpec {
            plant: PlantSpec::Ladder { count: cmd.plants },
            master_seed: ctx.seed,
            ..ExperimentSpec::gramian_sweep()
        },
    };
    if let Some(text) = &cmd.n_grid {
        spec.n_grid = parse_grid(text)?;
    }
    if let Some(text) = &cmd.j_grid {
        spec.j_grid = parse_grid(text)?;
    }
    if let Some(trials) = cmd.trials {
        spec.trials = trials;
    }
    if let Some(text) = &cmd.sigma_w2_set {
        spec.sigma_w_sq_set = parse_f64_list(text)?;
    }
    if let Some(text) = &cmd.sigma_u2_set {
        spec.sigma_u_sq_set = parse_f64_list(text)?;
    }
    if gain_file.is_some() {
        if cmd.kind != SweepKind::ErrorSweep {
            return Err("closed-loop sweeps are limited to error-sweep (ladder \
                        sweeps generate their own plants)"
                .into());
        }
        spec.gain_file = gain_file;
    }

    let paths = match spec.kind {
        ExperimentKind::ErrorSweep => {
            experiments::run_error_sweep(&spec)?.write_to_dir(&cmd.out_dir)?
        }
        ExperimentKind::VarianceGrid => {
            experiments::run_variance_grid(&spec)?.write_to_dir(&cmd.out_dir)?
        }
        ExperimentKind::GramianSweep => {
            experiments::run_gramian_sweep(&spec)?.write_to_dir(&cmd.out_dir)?
        }
    };
    for path in paths {
        eprintln!("wrote {}", path.display());
    }
    Ok(ExitCode::SUCCESS)
}

fn design(ctx: &Context, sys: &LinearSystem, cmd: &DesignArgs) -> CliResult {
    let noise = NoiseConfig::new(cmd.sigma_w2, cmd.sigma_u2)?;
    let lambda =
        security::min_lambda(sys, &noise, cmd.gamma_c, cmd.tau_c, cmd.flops, cmd.key_mode)?;
    let n_star = security::min_sample_size(sys, &noise, cmd.gamma_c)?;
    let text = serde_json::to_string_pretty(&serde_json::json!({
        "lambda": lambda,
        "n_star": n_star,
        "key_mode": cmd.key_mode.to_string(),
    }))? + "\n";
    emit(ctx, &text)?;
    Ok(ExitCode::SUCCESS)
}

/// Parses a sample-count grid: comma-separated entries, each either a
/// plain integer or an inclusive `start..end..step` range.
fn parse_grid(text: &str) -> Result<Vec<u64>, Box<dyn Error>> {
    let mut grid = Vec::new();
    for token in text.split(',') {
        let token = token.trim();
        let parts: Vec<&str> = token.split("..").collect();
        match parts.as_slice() {
            [value] => grid.push(parse_u64(value)?),
            [start, end, step] => {
                let (start, end, step) = (parse_u64(start)?, parse_u64(end)?, parse_u64(step)?);
                if step == 0 || end < start {
                    return Err(format!("bad grid range '{token}'").into());
                }
                grid.extend((start..=end).step_by(step as usize));
            }
            _ => {
                return Err(format!("bad grid token '{token}' (use N or start..end..step)").into())
            }
        }
    }
    if grid.is_empty() {
        return Err("grid must not be empty".into());
    }
    Ok(grid)
}

fn parse_u64(text: &str) -> Result<u64, Box<dyn Error>> {
    text.parse::<u64>()
        .map_err(|_| format!("'{text}' is not a sample count").into())
}

fn parse_f64_list(text: &str) -> Result<Vec<f64>, Box<dyn Error>> {
    text.split(',')
        .map(|token| {
            token
                .trim()
                .parse::<f64>()
                .map_err(|_| format!("'{token}' is not a number").into())
        })
        .collect()
}
