use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::Context;
use clap::{Args, Parser, Subcommand};
use serde_json::json;

use ngstate::densmat::{classify_regime, peak_fit, Regime};
use ngstate::figures::{run_figure, Format, Preset, RunConfig};
use ngstate::observables::{c4_ratio_nx, entropy_per_dof, purity};
use ngstate::statemap::{x_from_c4, ReducedState};
use ngstate::validation::{run_validation, ValidationOptions};
use ngstate::wigner::Mode;
use ngstate::Error;

#[derive(Parser)]
#[command(
    name = "ngstate",
    version,
    about = "Large-N non-Gaussian density operators: figures, evaluations and validation"
)]
struct Cli {
    /// Worker threads (falls back to NGSTATE_THREADS, then all cores).
    #[arg(long, global = true, env = "NGSTATE_THREADS")]
    threads: Option<usize>,

    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Write the data behind one figure.
    Figure(FigureArgs),
    /// Scalar observables of one state as JSON.
    Eval(EvalArgs),
    /// Run the invariant suite; exits 0 only if every check passes.
    Validate(ValidateArgs),
}

#[derive(Args)]
struct FigureArgs {
    /// fig1_c4, fig2_purity, fig3_dsurface, fig4_dslices, fig5_wigner, fig6_contours or fig7_slice.
    #[arg(value_parser = parse::<Preset>)]
    preset: Preset,
    /// Thermal occupation n (replaces the preset's list).
    #[arg(long)]
    n: Option<f64>,
    /// Non-Gaussianity x (replaces the preset's list).
    #[arg(long, allow_hyphen_values = true)]
    x: Option<f64>,
    /// Target C4/2F^2 in (-1, 0]; converted to x at the chosen n.
    #[arg(long = "c4-ratio", allow_hyphen_values = true)]
    c4_ratio: Option<f64>,
    /// Squeezing strength in [0, 1) (fig6).
    #[arg(long)]
    gamma: Option<f64>,
    /// Squeezing angle in [0, 2 pi) (fig6).
    #[arg(long)]
    phi: Option<f64>,
    /// Relative orientation of the phi and pi vectors: para or perp (fig6).
    #[arg(long, value_parser = parse::<Mode>)]
    mode: Option<Mode>,
    /// Grid size as WxH.
    #[arg(long, value_parser = parse_grid)]
    grid: Option<(usize, usize)>,
    /// Upper end of the u axis (fig7: half-width of the scaled phi axis).
    #[arg(long = "u-max")]
    u_max: Option<f64>,
    /// Upper end of the v axis, or the radial integration cutoff for Wigner presets.
    #[arg(long = "v-max")]
    v_max: Option<f64>,
    /// Largest r where the Wigner function is trusted; points beyond are masked.
    #[arg(long = "r-max")]
    r_max: Option<f64>,
    /// Even N values, either "4,8,12" or "4:40:4".
    #[arg(long = "N-list", value_parser = parse_n_list)]
    n_list: Option<NList>,
    /// Spread tolerance for the large-N extrapolation.
    #[arg(long)]
    tol: Option<f64>,
    /// Output directory.
    #[arg(long, default_value = "out")]
    out: PathBuf,
    /// csv or json.
    #[arg(long, default_value = "csv", value_parser = parse::<Format>)]
    format: Format,
}

#[derive(Args)]
struct EvalArgs {
    #[arg(long)]
    n: f64,
    #[arg(long, allow_hyphen_values = true)]
    x: Option<f64>,
    #[arg(long = "c4-ratio", allow_hyphen_values = true)]
    c4_ratio: Option<f64>,
}

#[derive(Args)]
struct ValidateArgs {
    /// Reduced grid and truncation.
    #[arg(long)]
    quick: bool,
    /// Write the machine-readable report here.
    #[arg(long)]
    json: Option<PathBuf>,
    /// Scale kappa in the parameter map (negative control).
    #[arg(long = "kappa-scale", default_value_t = 1.0, hide = true)]
    kappa_scale: f64,
}

fn parse<T: std::str::FromStr<Err = Error>>(s: &str) -> Result<T, String> {
    s.parse().map_err(|e: Error| e.to_string())
}

fn parse_grid(s: &str) -> Result<(usize, usize), String> {
    let (w, h) = s.split_once(['x', 'X']).ok_or("expected WxH")?;
    Ok((
        w.trim().parse().map_err(|_| "bad width")?,
        h.trim().parse().map_err(|_| "bad height")?,
    ))
}

#[derive(Clone)]
struct NList(Vec<u32>);

fn parse_n_list(s: &str) -> Result<NList, String> {
    let bad = |_| format!("bad N list '{s}'");
    if let Some((lo, rest)) = s.split_once(':') {
        let (hi, step) = rest.split_once(':').unwrap_or((rest, "2"));
        let (lo, hi, step): (u32, u32, u32) = (
            lo.parse().map_err(bad)?,
            hi.parse().map_err(bad)?,
            step.parse().map_err(bad)?,
        );
        if step == 0 {
            return Err("step must be positive".into());
        }
        return Ok(NList((lo..=hi).step_by(step as usize).collect()));
    }
    s.split(',')
        .map(|t| t.trim().parse().map_err(bad))
        .collect::<Result<_, _>>()
        .map(NList)
}

fn exit_code(e: &Error) -> u8 {
    match e {
        Error::NotConverged { .. } => 1,
        _ => 2,
    }
}

fn figure(a: FigureArgs) -> Result<ExitCode, Error> {
    let cfg = RunConfig {
        preset: a.preset,
        n: a.n,
        x: a.x,
        c4_ratio: a.c4_ratio,
        gamma: a.gamma,
        phi: a.phi,
        mode: a.mode,
        grid: a.grid,
        u_max: a.u_max,
        v_max: a.v_max,
        r_max: a.r_max,
        n_list: a.n_list.map(|l| l.0),
        tol: a.tol,
        out: a.out,
        format: a.format,
    };
    let outcome = run_figure(&cfg)?;
    for f in &outcome.files {
        println!("{}", f.display());
    }
    if outcome.not_converged > 0 {
        eprintln!(
            "warning: {} points not converged; output is partial",
            outcome.not_converged
        );
        return Ok(ExitCode::from(1));
    }
    Ok(ExitCode::SUCCESS)
}

fn eval(a: EvalArgs) -> Result<ExitCode, Error> {
    let x = match (a.x, a.c4_ratio) {
        (Some(x), None) => x,
        (None, Some(c)) => x_from_c4(a.n, c)?,
        _ => {
            return Err(Error::InvalidConfig(
                "give exactly one of --x and --c4-ratio".into(),
            ))
        }
    };
    let mut out = json!({
        "n": a.n,
        "x": x,
        "c4_ratio": c4_ratio_nx(a.n, x)?,
        "entropy_per_dof": entropy_per_dof(a.n)?,
    });
    if a.n > 0.0 {
        let st = ReducedState::new(a.n, x)?;
        let p = purity(&st)?;
        out["purity"] = json!(p.p);
        out["purity_ratio"] = json!(p.ratio);
        let regime = classify_regime(&st);
        out["regime"] = json!(format!("{regime:?}"));
        if regime == Regime::Peaked {
            let f = peak_fit(&st)?;
            out["u0"] = json!(f.u0);
            out["delta_u_sq"] = json!(f.delta_u_sq);
        }
    }
    println!("{}", serde_json::to_string_pretty(&out).expect("json"));
    Ok(ExitCode::SUCCESS)
}

fn validate(a: ValidateArgs) -> anyhow::Result<ExitCode> {
    let report = run_validation(ValidationOptions {
        quick: a.quick,
        kappa_scale: a.kappa_scale,
    })?;
    print!("{}", report.lines());
    if let Some(path) = a.json {
        std::fs::write(&path, report.to_json())
            .with_context(|| format!("writing {}", path.display()))?;
    }
    match report.first_failure() {
        None => Ok(ExitCode::SUCCESS),
        Some(c) => {
            eprintln!("FAILED: {}", c.line());
            Ok(ExitCode::from(1))
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    if let Some(t) = cli.threads {
        if t == 0 {
            eprintln!("error: --threads must be positive");
            return ExitCode::from(2);
        }
        if let Err(e) = rayon::ThreadPoolBuilder::new()
            .num_threads(t)
            .build_global()
        {
            eprintln!("error: {e}");
            return ExitCode::from(2);
        }
    }
    let result = match cli.command {
        Command::Figure(a) => figure(a),
        Command::Eval(a) => eval(a),
        Command::Validate(a) => {
            return validate(a).unwrap_or_else(|e| {
                eprintln!("error: {e:#}");
                ExitCode::from(2)
            })
        }
    };
    result.unwrap_or_else(|e| {
        eprintln!("error: {e}");
        ExitCode::from(exit_code(&e))
    })
}
