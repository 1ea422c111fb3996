//! `dp3`: command-line front end to `dp3-core`.
//!
//! Exit codes: 0 success, 2 invalid input, 3 a mathematical condition does
//! not hold, 4 numerical failure (integration or fit). Errors are reported
//! on stderr as a JSON object. `DP3_LOG` sets the log level.

use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use dp3_core::asymptotics::{self, VerifyOptions};
use dp3_core::backlund::{self, Lattice};
use dp3_core::batch::{self, GroupAction, Mode};
use dp3_core::monodromy::{Direction, LieKind};
use dp3_core::ode::{self, SolutionState, Trajectory};
use dp3_core::sampling::{self, BranchKind, Constraints};
use dp3_core::{io as dio, EquationParams, Error, ErrorKind, MonodromyPoint};
use num_complex::Complex64;
use serde_json::json;

#[derive(Parser)]
#[command(name = "dp3", version, about = "Connection formulae for the degenerate third Painleve equation")]
struct Cli {
    /// Write the result here instead of stdout.
    #[arg(long, short, global = true)]
    output: Option<PathBuf>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Manifold points: residual checks, group actions, sampling.
    Monodromy {
        #[command(subcommand)]
        op: MonodromyOp,
    },
    /// Parameters of an asymptotic chart.
    Chart {
        #[arg(value_enum)]
        regime: RegimeArg,
        #[command(flatten)]
        ctx: PointCtx,
    },
    /// Evaluate u or the Hamiltonian from an asymptotic chart.
    Eval {
        #[arg(value_enum)]
        what: Quantity,
        #[arg(long, value_enum)]
        regime: RegimeArg,
        /// |tau|, one or more.
        #[arg(long, required = true, num_args = 1.., value_delimiter = ',')]
        tau: Vec<f64>,
        #[command(flatten)]
        ctx: PointCtx,
    },
    /// Integrate along a ray from a small-tau seed or the algebraic solution.
    Integrate(IntegrateArgs),
    /// Seed at tau0 from the small-tau chart, integrate, fit the large-tau chart.
    VerifyConnection(VerifyArgs),
    /// Backlund ladder from a seed state.
    Ladder(LadderArgs),
    /// Lattice residuals along a ladder.
    Lattice {
        #[arg(long, value_enum)]
        which: LatticeArg,
        #[command(flatten)]
        ladder: LadderArgs,
    },
    /// Fit the large-tau chart to a trajectory CSV.
    Fit {
        #[arg(long)]
        trajectory: PathBuf,
        #[arg(long, value_parser = parse_complex, default_value = "0", allow_hyphen_values = true)]
        a: Complex64,
        #[command(flatten)]
        eq: EqArgs,
    },
}

#[derive(Subcommand)]
enum MonodromyOp {
    /// Residuals of the defining relations and derived quantities.
    Check {
        #[arg(long)]
        point: String,
        /// Exit 3 when the largest residual exceeds this.
        #[arg(long, default_value_t = 1e-10)]
        tol: f64,
    },
    /// Image of a point under a group action.
    Map {
        #[arg(long)]
        point: String,
        #[arg(long, value_enum)]
        action: ActionArg,
        #[arg(long, default_value_t = 0, allow_negative_numbers = true)]
        eps1: i8,
        #[arg(long, default_value_t = 0, allow_negative_numbers = true)]
        eps2: i8,
        #[arg(long, value_enum, default_value = "up")]
        direction: DirectionArg,
        #[arg(long, value_enum, default_value = "negate-tau")]
        kind: LieArg,
        #[arg(long, default_value_t = 1, allow_negative_numbers = true)]
        p: i8,
        #[arg(long, default_value_t = 1, allow_negative_numbers = true)]
        l: i8,
    },
    /// Seeded random points of one branch.
    Sample {
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, default_value_t = 1)]
        count: usize,
        #[arg(long, default_value_t = 1)]
        branch: u8,
        #[arg(long)]
        max_abs_a: Option<f64>,
        #[arg(long)]
        max_abs_nu: Option<f64>,
        #[arg(long)]
        max_re_nu: Option<f64>,
        #[arg(long)]
        max_re_rho: Option<f64>,
        /// Also require both asymptotic charts on the positive real ray for (eps, b).
        #[arg(long)]
        charts: bool,
        #[command(flatten)]
        eq: EqArgs,
    },
}

#[derive(Args, Clone)]
struct EqArgs {
    #[arg(long, default_value_t = 1, allow_negative_numbers = true)]
    eps: i8,
    #[arg(long, default_value_t = 1.0, allow_negative_numbers = true)]
    b: f64,
    /// Sector label; defaults to 0 for eps*b > 0 and +1 otherwise.
    #[arg(long, allow_negative_numbers = true)]
    eps2: Option<i8>,
}

impl EqArgs {
    fn params(&self) -> dp3_core::Result<EquationParams> {
        match self.eps2 {
            Some(e2) => EquationParams::with_sector(self.eps, self.b, e2),
            None => EquationParams::new(self.eps, self.b),
        }
    }
}

#[derive(Args, Clone)]
struct PointCtx {
    /// Point as inline JSON or a file path.
    #[arg(long)]
    point: String,
    /// Ray label.
    #[arg(long, default_value_t = 0, allow_negative_numbers = true)]
    eps1: i8,
    /// Use the imaginary ray tau = i eps1 |tau|.
    #[arg(long)]
    imag: bool,
    #[command(flatten)]
    eq: EqArgs,
}

#[derive(Args)]
struct IntegrateArgs {
    /// Seed from this point's small-tau chart; omit to start on the algebraic solution.
    #[arg(long)]
    point: Option<String>,
    #[arg(long)]
    tau0: f64,
    #[arg(long)]
    tau1: f64,
    #[arg(long, default_value_t = 0, allow_negative_numbers = true)]
    eps1: i8,
    #[arg(long, default_value_t = 1e-11)]
    tol: f64,
    /// Dense output at this many equally spaced |tau|; 0 records every step.
    #[arg(long, default_value_t = 0)]
    samples: usize,
    #[arg(long, value_enum, default_value = "csv")]
    format: Format,
    #[command(flatten)]
    eq: EqArgs,
}

#[derive(Args)]
struct VerifyArgs {
    /// One point or a JSON list; lists are processed in parallel.
    #[arg(long)]
    point: String,
    #[arg(long, default_value_t = 0.02)]
    tau0: f64,
    #[arg(long, default_value_t = 400.0)]
    tau1: f64,
    #[arg(long, default_value_t = 0, allow_negative_numbers = true)]
    eps1: i8,
    #[arg(long, default_value_t = 1e-11)]
    tol: f64,
    #[arg(long, default_value_t = 1500)]
    samples: usize,
    #[arg(long, default_value_t = 0.5)]
    window: f64,
    /// Extra seeding points for the convergence table.
    #[arg(long, value_delimiter = ',')]
    tau0s: Vec<f64>,
    /// Extra end points for the convergence table.
    #[arg(long, value_delimiter = ',')]
    tau1s: Vec<f64>,
    #[arg(long)]
    sequential: bool,
    #[command(flatten)]
    eq: EqArgs,
}

#[derive(Args, Clone)]
struct LadderArgs {
    /// Positive tau of the seed.
    #[arg(long, default_value_t = 1.0)]
    tau: f64,
    #[arg(long, default_value_t = 0, allow_negative_numbers = true)]
    n_min: i64,
    #[arg(long, default_value_t = 5)]
    n_max: i64,
    /// Explicit seed `u(tau)`; the algebraic solution when omitted.
    #[arg(long, value_parser = parse_complex, allow_hyphen_values = true)]
    u: Option<Complex64>,
    #[arg(long, value_parser = parse_complex, allow_hyphen_values = true)]
    du: Option<Complex64>,
    #[arg(long, value_parser = parse_complex, default_value = "0", allow_hyphen_values = true)]
    a0: Complex64,
    /// Step for the Toda derivatives (relative to tau).
    #[arg(long, default_value_t = 1e-4)]
    h: f64,
    #[command(flatten)]
    eq: EqArgs,
}

#[derive(Clone, Copy, ValueEnum)]
enum RegimeArg {
    Large,
    Small,
}

#[derive(Clone, Copy, ValueEnum)]
enum Quantity {
    U,
    H,
}

#[derive(Clone, Copy, ValueEnum)]
enum Format {
    Json,
    Csv,
}

#[derive(Clone, Copy, ValueEnum)]
enum ActionArg {
    F,
    Fhat,
    Backlund,
    Lie,
}

#[derive(Clone, Copy, ValueEnum)]
enum DirectionArg {
    Up,
    Down,
}

#[derive(Clone, Copy, ValueEnum)]
enum LieArg {
    NegateTau,
    NegateA,
    RotateTau,
}

#[derive(Clone, Copy, ValueEnum)]
enum LatticeArg {
    Km,
    Dp,
    Toda,
    FRec,
}

/// `x`, `x,y` or `[x, y]`.
fn parse_complex(s: &str) -> Result<Complex64, String> {
    let t = s.trim().trim_start_matches('[').trim_end_matches(']');
    let parts: Vec<&str> = t.split(',').map(str::trim).collect();
    let num = |p: &str| p.parse::<f64>().map_err(|_| format!("bad number {p:?}"));
    match parts.as_slice() {
        [re] => Ok(Complex64::new(num(re)?, 0.0)),
        [re, im] => Ok(Complex64::new(num(re)?, num(im)?)),
        _ => Err(format!("expected re or re,im, got {s:?}")),
    }
}

type Res<T> = dp3_core::Result<T>;

fn invalid(msg: impl Into<String>) -> Error {
    Error::InvalidParameters(msg.into())
}

fn emit(out: &Option<PathBuf>, text: &str) -> Res<()> {
    let write = |w: &mut dyn Write| -> io::Result<()> {
        w.write_all(text.as_bytes())?;
        if !text.ends_with('\n') {
            w.write_all(b"\n")?;
        }
        w.flush()
    };
    let r = match out {
        Some(p) => File::create(p).and_then(|f| write(&mut BufWriter::new(f))),
        None => match write(&mut io::stdout().lock()) {
            // The reader went away (e.g. `| head`); nothing left to report.
            Err(e) if e.kind() == io::ErrorKind::BrokenPipe => std::process::exit(0),
            r => r,
        },
    };
    r.map_err(|e| invalid(format!("cannot write output: {e}")))
}

fn json_text<T: serde::Serialize>(v: &T) -> Res<String> {
    dio::to_json(v)
}

fn large_chart(pt: &MonodromyPoint, ctx: &PointCtx, p: &EquationParams) -> Res<asymptotics::LargeTauChart> {
    if ctx.imag {
        asymptotics::large_tau_chart_imag(pt, ctx.eps1, p)
    } else {
        asymptotics::large_tau_chart(pt, ctx.eps1, p)
    }
}

fn small_chart(pt: &MonodromyPoint, ctx: &PointCtx, p: &EquationParams) -> Res<asymptotics::SmallTauChart> {
    if ctx.imag {
        asymptotics::small_tau_chart_imag(pt, ctx.eps1, p)
    } else {
        asymptotics::small_tau_chart(pt, ctx.eps1, p)
    }
}

fn monodromy(op: MonodromyOp, out: &Option<PathBuf>) -> Res<()> {
    match op {
        MonodromyOp::Check { point, tol } => {
            let pts = dio::load_points(&point)?;
            let checks = batch::manifold_checks(&pts, Mode::Sequential);
            let rows: Vec<_> = pts
                .iter()
                .zip(&checks)
                .map(|(pt, c)| {
                    json!({
                        "residuals": pt.manifold_residual(),
                        "max_residual": c.max_residual,
                        "det_defect": c.det_defect,
                        "cos_2pi_rho": pt.cos_2pi_rho(),
                        "cos_2pi_rho_inf": pt.cos_2pi_rho_inf(),
                        "rho": pt.rho(),
                        "cyclic": c.cyclic,
                    })
                })
                .collect();
            let text = if rows.len() == 1 { json_text(&rows[0])? } else { json_text(&rows)? };
            emit(out, &text)?;
            let worst = checks.iter().map(|c| c.max_residual).fold(0.0, f64::max);
            if worst > tol {
                return Err(Error::ConditionViolation(format!("manifold residual {worst:e} exceeds {tol:e}")));
            }
            Ok(())
        }
        MonodromyOp::Map { point, action, eps1, eps2, direction, kind, p, l } => {
            let pt = dio::load_point(&point)?;
            let act = match action {
                ActionArg::F => GroupAction::F { eps1, eps2 },
                ActionArg::Fhat => GroupAction::FHat { eps1, eps2 },
                ActionArg::Backlund => GroupAction::Backlund {
                    direction: match direction {
                        DirectionArg::Up => Direction::Up,
                        DirectionArg::Down => Direction::Down,
                    },
                },
                ActionArg::Lie => GroupAction::LiePoint {
                    kind: match kind {
                        LieArg::NegateTau => LieKind::NegateTau,
                        LieArg::NegateA => LieKind::NegateA,
                        LieArg::RotateTau => LieKind::RotateTau,
                    },
                    p,
                    l,
                },
            };
            emit(out, &json_text(&act.apply(&pt)?)?)
        }
        MonodromyOp::Sample { seed, count, branch, max_abs_a, max_abs_nu, max_re_nu, max_re_rho, charts, eq } => {
            let kind = BranchKind::from_index(branch)?;
            let c = Constraints {
                max_abs_a,
                max_abs_nu,
                max_abs_re_nu: max_re_nu,
                max_abs_re_rho: max_re_rho,
                charts: if charts { Some((eq.params()?, 0)) } else { None },
                ..Constraints::default()
            };
            let pts = sampling::sample_manifold(seed, count, kind, &c)?;
            emit(out, &json_text(&pts)?)
        }
    }
}

fn integrate(args: IntegrateArgs, out: &Option<PathBuf>) -> Res<()> {
    let p = args.eq.params()?;
    if !(args.tau0 > 0.0 && args.tau1 > 0.0) {
        return Err(invalid("tau0 and tau1 must be positive"));
    }
    let dir = match args.eps1 {
        0 => Complex64::new(1.0, 0.0),
        1 | -1 => Complex64::new(-1.0, 0.0),
        e => return Err(invalid(format!("eps1 = {e} is not a real ray label"))),
    };
    let (seed, a) = match &args.point {
        Some(src) => {
            let pt = dio::load_point(src)?;
            let ch = asymptotics::small_tau_chart(&pt, args.eps1, &p)?;
            let (u, du) = ch.u_with_derivative(args.tau0)?;
            (SolutionState::new(dir * args.tau0, u, du), pt.a)
        }
        None => {
            if args.eps1 != 0 {
                return Err(invalid("the algebraic seed is on the positive ray"));
            }
            (backlund::algebraic_seed(args.tau0, &p), Complex64::new(0.0, 0.0))
        }
    };
    let outputs: Vec<f64> = match args.samples {
        0 => Vec::new(),
        1 => vec![args.tau1],
        m => (0..m).map(|k| args.tau0 + (args.tau1 - args.tau0) * k as f64 / (m - 1) as f64).collect(),
    };
    log::info!("integrating from |tau| = {} to {}", args.tau0, args.tau1);
    let traj = ode::integrate_ray(&seed, a, &p, args.tau1, args.tol, &outputs)?;
    log::debug!("{} samples", traj.samples.len());
    match args.format {
        Format::Json => emit(out, &json_text(&traj)?),
        Format::Csv => {
            let mut buf = Vec::new();
            dio::write_trajectory_csv(&traj, &mut buf)?;
            emit(out, &String::from_utf8(buf).expect("csv is ascii"))
        }
    }
}

fn verify(args: VerifyArgs, out: &Option<PathBuf>) -> Res<()> {
    let p = args.eq.params()?;
    let pts = dio::load_points(&args.point)?;
    let opts = VerifyOptions {
        eps1: args.eps1,
        tol: args.tol,
        samples: args.samples,
        window: args.window,
        tau0_list: args.tau0s,
        tau1_list: args.tau1s,
    };
    let mode = if args.sequential { Mode::Sequential } else { Mode::Parallel };
    log::info!("verifying {} point(s)", pts.len());
    let reports = batch::verify_connections(&pts, &p, args.tau0, args.tau1, &opts, mode)
        .into_iter()
        .collect::<Res<Vec<_>>>()?;
    let text = if reports.len() == 1 { json_text(&reports[0])? } else { json_text(&reports)? };
    emit(out, &text)
}

fn build_ladder(args: &LadderArgs, tau: f64) -> Res<Vec<backlund::LadderEntry>> {
    let p = args.eq.params()?;
    let seed = match (args.u, args.du) {
        (Some(u), Some(du)) => {
            if tau != args.tau {
                // Neighbouring seeds of an explicit state come from integration.
                let base = SolutionState::new(Complex64::new(args.tau, 0.0), u, du);
                let tr = ode::integrate_ray(&base, args.a0, &p, tau, 1e-13, &[tau])?;
                tr.samples[tr.samples.len() - 1]
            } else {
                SolutionState::new(Complex64::new(tau, 0.0), u, du)
            }
        }
        (None, None) => {
            if args.a0 != Complex64::new(0.0, 0.0) {
                return Err(invalid("the algebraic seed needs a0 = 0; pass --u and --du otherwise"));
            }
            backlund::algebraic_seed(tau, &p)
        }
        _ => return Err(invalid("--u and --du go together")),
    };
    backlund::ladder_range(&seed, args.a0, &p, args.n_min, args.n_max)
}

fn ladder(args: LadderArgs, out: &Option<PathBuf>) -> Res<()> {
    if !(args.tau > 0.0) {
        return Err(invalid("tau must be positive"));
    }
    let p = args.eq.params()?;
    let l = build_ladder(&args, args.tau)?;
    emit(out, &json_text(&backlund::ladder_records(&l, &p))?)
}

fn lattice(which: LatticeArg, args: LadderArgs, out: &Option<PathBuf>) -> Res<()> {
    if !(args.tau > 0.0) {
        return Err(invalid("tau must be positive"));
    }
    let p = args.eq.params()?;
    let which = match which {
        LatticeArg::Km => Lattice::Km,
        LatticeArg::Dp => Lattice::Dp,
        LatticeArg::Toda => Lattice::Toda,
        LatticeArg::FRec => Lattice::FRec,
    };
    let mid = build_ladder(&args, args.tau)?;
    let res = if which == Lattice::Toda {
        let h = args.h * args.tau;
        let lo = build_ladder(&args, args.tau - h)?;
        let hi = build_ladder(&args, args.tau + h)?;
        backlund::lattice_residuals(&mid, args.a0, &p, which, Some((&lo, &hi, h)))?
    } else {
        backlund::lattice_residuals(&mid, args.a0, &p, which, None)?
    };
    let rows: Vec<_> = res.iter().map(|(n, r)| json!({ "n": n, "residual": r })).collect();
    emit(out, &json_text(&json!({ "lattice": which, "tau": args.tau, "residuals": rows }))?)
}

fn fit(trajectory: PathBuf, a: Complex64, eq: EqArgs, out: &Option<PathBuf>) -> Res<()> {
    let p = eq.params()?;
    let f = File::open(&trajectory).map_err(|e| invalid(format!("{}: {e}", trajectory.display())))?;
    let traj: Trajectory = dio::read_trajectory_csv(f, &p, a)?;
    emit(out, &json_text(&asymptotics::fit_large_tau(&traj, &p)?)?)
}

fn run(cli: Cli) -> Res<()> {
    let out = cli.output;
    match cli.command {
        Command::Monodromy { op } => monodromy(op, &out),
        Command::Chart { regime, ctx } => {
            let p = ctx.eq.params()?;
            let pt = dio::load_point(&ctx.point)?;
            let text = match regime {
                RegimeArg::Large => json_text(&large_chart(&pt, &ctx, &p)?)?,
                RegimeArg::Small => json_text(&small_chart(&pt, &ctx, &p)?)?,
            };
            emit(&out, &text)
        }
        Command::Eval { what, regime, tau, ctx } => {
            let p = ctx.eq.params()?;
            let pt = dio::load_point(&ctx.point)?;
            let vals: Vec<Complex64> = match regime {
                RegimeArg::Large => {
                    let ch = large_chart(&pt, &ctx, &p)?;
                    tau.iter()
                        .map(|&s| match what {
                            Quantity::U => ch.u(s),
                            Quantity::H => ch.hamiltonian(s),
                        })
                        .collect::<Res<_>>()?
                }
                RegimeArg::Small => {
                    let ch = small_chart(&pt, &ctx, &p)?;
                    tau.iter()
                        .map(|&s| match what {
                            Quantity::U => ch.u(s),
                            Quantity::H => ch.hamiltonian(s),
                        })
                        .collect::<Res<_>>()?
                }
            };
            let text = if vals.len() == 1 { serde_json::to_string(&vals[0]) } else { serde_json::to_string(&vals) };
            emit(&out, &text.map_err(|e| invalid(e.to_string()))?)
        }
        Command::Integrate(args) => integrate(args, &out),
        Command::VerifyConnection(args) => verify(args, &out),
        Command::Ladder(args) => ladder(args, &out),
        Command::Lattice { which, ladder } => lattice(which, ladder, &out),
        Command::Fit { trajectory, a, eq } => fit(trajectory, a, eq, &out),
    }
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::new().filter_or("DP3_LOG", "warn")).init();
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            let (code, kind) = match e.kind() {
                ErrorKind::Validation => (2, "validation"),
                ErrorKind::Condition => (3, "condition_violation"),
                ErrorKind::Numerical => (4, "numerical_failure"),
            };
            eprintln!("{}", json!({ "error": kind, "message": e.to_string(), "exit_code": code }));
            ExitCode::from(code)
        }
    }
}
