//! Subcommand implementations.

use std::fs;
use std::path::{Path, PathBuf};

use rayon::prelude::*;

use trapctl_core::ermakov::{
    ermakov_invariant, integrate, FrequencySchedule, IntegratorConfig, ScalingState, SegmentLaw,
    Trajectory, TrajectoryEvent,
};
use trapctl_core::phasespace::{
    evolve, map_from_scaling_state, thermal_state, wigner_grid, GaussianState, WignerGrid,
};
use trapctl_core::protocol::{
    design_bangbang_positive, design_constant_mu, design_delta_sta, design_dkc_free,
    design_dkc_free_longtime, design_dkc_inverted, design_finite_dkc_free,
    design_finite_dkc_inverted, dkc_kick_exact_tof, dkc_kick_longtime_tof, ProtocolFamily,
    ProtocolSpec,
};
use trapctl_core::verify::{verify_protocol, EnsembleCheck, EnsembleConfig, Thresholds};

use crate::args::{
    Cli, Command, DesignArgs, FamilyParams, SimulateArgs, SweepArgs, TableArgs, VerifyArgs,
    WignerArgs,
};
use crate::figures::{preset, Preset, TableKind};
use crate::format::{float, Csv};
use crate::protocol_file;
use crate::CliError;

pub fn dispatch(cli: Cli) -> Result<i32, CliError> {
    let ctx = Context {
        omega0: cli.omega0,
        tol: cli.tol,
        seed: cli.seed,
        out_dir: cli.out_dir.clone(),
        paper_defaults: cli.paper_defaults.clone(),
    };
    if !(ctx.omega0 > 0.0) {
        return Err(CliError::Input(format!(
            "--omega0 must be positive, got {}",
            ctx.omega0
        )));
    }
    if !(ctx.tol > 0.0) {
        return Err(CliError::Input(format!(
            "--tol must be positive, got {}",
            ctx.tol
        )));
    }
    match cli.command {
        Command::Design(args) => cmd_design(&ctx, args),
        Command::Simulate(args) => cmd_simulate(&ctx, args),
        Command::Table(args) => cmd_table(&ctx, args),
        Command::Wigner(args) => cmd_wigner(&ctx, args),
        Command::Verify(args) => cmd_verify(&ctx, args),
        Command::Sweep(args) => cmd_sweep(&ctx, args),
    }
}

struct Context {
    omega0: f64,
    tol: f64,
    seed: u64,
    out_dir: PathBuf,
    paper_defaults: Option<String>,
}

impl Context {
    fn integrator(&self) -> IntegratorConfig {
        IntegratorConfig::with_rel_tol(self.tol)
    }

    fn resolve_out(&self, path: &Path) -> Result<PathBuf, CliError> {
        let full = if path.is_absolute() {
            path.to_path_buf()
        } else {
            self.out_dir.join(path)
        };
        if let Some(parent) = full.parent() {
            if !parent.as_os_str().is_empty() {
                fs::create_dir_all(parent)?;
            }
        }
        Ok(full)
    }

    /// Protocol from an explicit file, or from --paper-defaults when the
    /// figure id names a protocol-shaped preset.
    fn protocol_from(&self, file: Option<&Path>) -> Result<ProtocolSpec, CliError> {
        match (file, &self.paper_defaults) {
            (Some(path), _) => {
                let text = fs::read_to_string(path).map_err(|e| {
                    CliError::Input(format!("cannot read protocol file {}: {e}", path.display()))
                })?;
                protocol_file::from_text(&text)
            }
            (None, Some(id)) => match preset(id, self.omega0)? {
                Preset::Simulate { spec } | Preset::Wigner { spec, .. } => Ok(spec),
                Preset::Table { .. } => Err(CliError::Input(format!(
                    "{id} is a table preset; use `trapctl table --paper-defaults {id}`"
                ))),
            },
            (None, None) => Err(CliError::Input(
                "no protocol given: pass --protocol FILE or --paper-defaults FIGURE".into(),
            )),
        }
    }
}

fn require(family: &str, name: &str, value: Option<f64>) -> Result<f64, CliError> {
    value.ok_or_else(|| CliError::Input(format!("family {family} requires --{name}")))
}

/// Build a protocol from a family name and its named parameters.
pub fn design_from_family(
    family: &str,
    omega0: f64,
    p: &FamilyParams,
) -> Result<ProtocolSpec, CliError> {
    let fam: ProtocolFamily = family
        .parse()
        .map_err(|e: String| CliError::Input(e))?;
    // b_F and ω_F determine each other through ω_F = ω₀/b_F².
    let b_f = p
        .b_f
        .or_else(|| p.omega_f.map(|w| (omega0 / w).sqrt()));
    let omega_f = p.omega_f.or_else(|| p.b_f.map(|b| omega0 / (b * b)));
    let spec = match fam {
        ProtocolFamily::DkcFree => design_dkc_free(require(family, "b-f", b_f)?, omega0)?,
        ProtocolFamily::DkcFreeLongtime => {
            design_dkc_free_longtime(require(family, "b-f", b_f)?, omega0)?
        }
        ProtocolFamily::DkcInverted => design_dkc_inverted(
            require(family, "b-f", b_f)?,
            require(family, "omega-i", p.omega_i)?,
            omega0,
        )?,
        ProtocolFamily::BangBangPositive => {
            design_bangbang_positive(omega0, require(family, "omega-f", omega_f)?)?
        }
        ProtocolFamily::ConstantMu => {
            design_constant_mu(
                omega0,
                require(family, "omega-f", omega_f)?,
                require(family, "t-f", p.t_f)?,
            )?
            .0
        }
        ProtocolFamily::DeltaSta => {
            let n = p
                .n
                .ok_or_else(|| CliError::Input(format!("family {family} requires --n")))?;
            design_delta_sta(
                omega0,
                require(family, "omega-f", omega_f)?,
                require(family, "t-k", p.t_k)?,
                n,
            )?
        }
        ProtocolFamily::FiniteDkcFree => design_finite_dkc_free(
            omega0,
            require(family, "omega-f", omega_f)?,
            require(family, "omega-k", p.omega_k)?,
        )?,
        ProtocolFamily::FiniteDkcInverted => design_finite_dkc_inverted(
            omega0,
            require(family, "omega-f", omega_f)?,
            require(family, "omega-i", p.omega_i)?,
            require(family, "omega-k", p.omega_k)?,
        )?,
    };
    Ok(spec)
}

fn cmd_design(ctx: &Context, args: DesignArgs) -> Result<i32, CliError> {
    let spec = match (&args.family, &ctx.paper_defaults) {
        (Some(family), _) => design_from_family(family, ctx.omega0, &args.params)?,
        (None, Some(_)) => ctx.protocol_from(None)?,
        (None, None) => {
            return Err(CliError::Input(
                "design requires --family (or --paper-defaults)".into(),
            ))
        }
    };
    let out = args
        .out
        .unwrap_or_else(|| PathBuf::from(format!("{}.protocol", spec.family)));
    let path = ctx.resolve_out(&out)?;
    fs::write(&path, protocol_file::to_text(&spec))?;

    println!("designed {} protocol", spec.family);
    for (key, value) in &spec.design_params {
        println!("  {key} = {value:.12}");
    }
    println!(
        "  predicted final: b = {:.12}, b_dot = {:.12} at t = {:.12}",
        spec.predicted_final.b, spec.predicted_final.b_dot, spec.predicted_final.t
    );
    println!("wrote {}", path.display());
    Ok(0)
}

/// Trajectory CSV: one row per sample, kick events as flagged rows with
/// the post-kick rate.
fn trajectory_csv(traj: &Trajectory, schedule: &FrequencySchedule) -> String {
    let mut csv = Csv::new(&[
        "t (1/omega0)",
        "omega_sq (omega0^2)",
        "b",
        "b_dot (omega0)",
        "alpha",
        "event",
    ]);
    let kicks: Vec<&TrajectoryEvent> = traj
        .events
        .iter()
        .filter(|e| matches!(e, TrajectoryEvent::Kick { .. }))
        .collect();
    let mut next_kick = 0usize;
    for (sample, alpha) in traj.samples.iter().zip(&traj.alpha_log) {
        csv.row(&[
            float(sample.t),
            float(sample.omega_sq),
            float(sample.b),
            float(sample.b_dot),
            float(*alpha),
            String::new(),
        ]);
        while next_kick < kicks.len() && kicks[next_kick].time() <= sample.t {
            if let TrajectoryEvent::Kick {
                t,
                kappa,
                b,
                b_dot_after,
                ..
            } = kicks[next_kick]
            {
                let omega_sq = schedule.omega_sq_at(*t);
                let alpha = ermakov_invariant(
                    &ScalingState {
                        b: *b,
                        b_dot: *b_dot_after,
                        t: *t,
                    },
                    omega_sq,
                    schedule.omega0,
                );
                csv.row(&[
                    float(*t),
                    float(omega_sq),
                    float(*b),
                    float(*b_dot_after),
                    float(alpha),
                    format!("kick kappa={}", float(*kappa)),
                ]);
            }
            next_kick += 1;
        }
    }
    csv.finish()
}

fn cmd_simulate(ctx: &Context, args: SimulateArgs) -> Result<i32, CliError> {
    let spec = ctx.protocol_from(args.protocol.as_deref())?;
    let mut schedule = spec.schedule.clone();
    if args.hold_periods > 0.0 && schedule.omega_final_sq > 0.0 {
        let period = std::f64::consts::TAU / schedule.omega_final_sq.sqrt();
        schedule.push_segment(SegmentLaw::constant(
            schedule.omega_final_sq,
            args.hold_periods * period,
        ));
    }
    let per_segment = (args.resolution / schedule.segments.len().max(1)).max(8);
    let config = ctx.integrator().dense(per_segment);
    let traj = integrate(&schedule, ScalingState::initial(), &config)?;

    let out = args
        .out
        .unwrap_or_else(|| PathBuf::from(format!("{}.trajectory.csv", spec.family)));
    let path = ctx.resolve_out(&out)?;
    fs::write(&path, trajectory_csv(&traj, &schedule))?;
    let fin = traj.final_state();
    println!(
        "simulated {}: {} samples, final b = {:.9}, b_dot = {:.3e}",
        spec.family,
        traj.samples.len(),
        fin.b,
        fin.b_dot
    );
    println!("wrote {}", path.display());
    Ok(0)
}

fn grid_points(from: f64, to: f64, points: usize, log_spaced: bool) -> Vec<f64> {
    if points < 2 {
        return vec![from];
    }
    (0..points)
        .map(|i| {
            let x = i as f64 / (points - 1) as f64;
            if log_spaced {
                from * (to / from).powf(x)
            } else {
                from + (to - from) * x
            }
        })
        .collect()
}

fn cmd_table(ctx: &Context, args: TableArgs) -> Result<i32, CliError> {
    let figure_id = args
        .figure
        .clone()
        .or_else(|| ctx.paper_defaults.clone())
        .ok_or_else(|| {
            CliError::Input("table requires --figure (or --paper-defaults)".into())
        })?;
    let table = match preset(&figure_id, ctx.omega0)? {
        Preset::Table {
            kind,
            from,
            to,
            points,
            log_spaced,
            omega_f,
            omega_i,
        } => (kind, from, to, points, log_spaced, omega_f, omega_i),
        _ => {
            return Err(CliError::Input(format!(
                "{figure_id} is not a table preset (tables: fig2, fig5, fig8, fig9)"
            )))
        }
    };
    let (kind, mut from, mut to, mut points, log_spaced, omega_f, omega_i) = table;
    if let Some(v) = args.from {
        from = v;
    }
    if let Some(v) = args.to {
        to = v;
    }
    if let Some(v) = args.points {
        points = v;
    }
    if !(to > from && from > 0.0) {
        return Err(CliError::Input(format!(
            "sweep range must satisfy 0 < from < to, got [{from}, {to}]"
        )));
    }

    let omega0 = ctx.omega0;
    let xs = grid_points(from, to, points, log_spaced);
    let content = match kind {
        TableKind::KickStrengthVsTime => {
            let mut csv = Csv::new(&[
                "t_k (1/omega0)",
                "kappa_exact (omega0)",
                "kappa_longtime (omega0)",
                "ratio_exact_over_longtime",
            ]);
            for &t_k in &xs {
                let exact = dkc_kick_exact_tof(t_k, omega0);
                let longtime = dkc_kick_longtime_tof(t_k)?;
                csv.row(&[
                    float(t_k),
                    float(exact),
                    float(longtime),
                    float(exact / longtime),
                ]);
            }
            csv.finish()
        }
        TableKind::GainRatioVsN => {
            let mut csv = Csv::new(&["N", "gain_ratio"]);
            for &n in &xs {
                let ratio = trapctl_core::protocol::adiabatic_gain_ratio(n)
                    .map_err(|e| CliError::Input(e.to_string()))?;
                csv.row(&[float(n), float(ratio)]);
            }
            csv.finish()
        }
        TableKind::FinitePulseFree | TableKind::FinitePulseInverted => {
            finite_pulse_table(kind, &xs, omega0, omega_f, omega_i)?
        }
    };

    let out = args
        .out
        .unwrap_or_else(|| PathBuf::from(format!("{figure_id}.table.csv")));
    let path = ctx.resolve_out(&out)?;
    fs::write(&path, content)?;
    println!("wrote {} ({} rows)", path.display(), xs.len());
    Ok(0)
}

fn finite_pulse_table(
    kind: TableKind,
    omega_ks: &[f64],
    omega0: f64,
    omega_f: f64,
    omega_i: Option<f64>,
) -> Result<String, CliError> {
    let b_f = (omega0 / omega_f).sqrt();
    // Instantaneous δ-kick reference strengths for the two expansion
    // kinds (exact condition and its long-time approximation).
    let (kappa_exact, kappa_longtime) = match kind {
        TableKind::FinitePulseFree => {
            let t_k = (b_f * b_f - 1.0).sqrt() / omega0;
            (omega0 * (b_f * b_f - 1.0).sqrt() / (b_f * b_f), 1.0 / t_k)
        }
        TableKind::FinitePulseInverted => {
            let wi = omega_i.expect("inverted preset carries omega_i");
            let spec = design_dkc_inverted(b_f, wi, omega0)?;
            // Long-time inverted-trap condition: κ ≈ ω_I.
            (spec.design_params["kappa"], wi)
        }
        _ => unreachable!(),
    };

    let mut csv = Csv::new(&[
        "omega_k (omega0)",
        "status",
        "t_k (1/omega0)",
        "tau_k_finite (1/omega0)",
        "tau_k_delta_exact (1/omega0)",
        "tau_k_delta_longtime (1/omega0)",
        "kick_strength_finite (omega0)",
        "kick_strength_delta_exact (omega0)",
        "kick_strength_delta_longtime (omega0)",
    ]);
    for &omega_k in omega_ks {
        let designed = match kind {
            TableKind::FinitePulseFree => design_finite_dkc_free(omega0, omega_f, omega_k),
            TableKind::FinitePulseInverted => design_finite_dkc_inverted(
                omega0,
                omega_f,
                omega_i.expect("inverted preset carries omega_i"),
                omega_k,
            ),
            _ => unreachable!(),
        };
        let wk2 = omega_k * omega_k;
        match designed {
            Ok(spec) => csv.row(&[
                float(omega_k),
                "ok".into(),
                float(spec.design_params["t_k"]),
                float(spec.design_params["tau_k"]),
                float(kappa_exact / wk2),
                float(kappa_longtime / wk2),
                float(spec.design_params["kick_strength"]),
                float(kappa_exact),
                float(kappa_longtime),
            ]),
            // Flagged, not fatal: the row records why the point is out
            // of reach.
            Err(e) => csv.row(&[
                float(omega_k),
                format!("infeasible ({})", e.to_string().replace(',', ";")),
                String::new(),
                String::new(),
                float(kappa_exact / wk2),
                float(kappa_longtime / wk2),
                String::new(),
                float(kappa_exact),
                float(kappa_longtime),
            ]),
        }
    }
    Ok(csv.finish())
}

/// One Wigner snapshot: time, whether kicks at exactly that time apply,
/// and a label for the grid header.
struct Snapshot {
    t: f64,
    include_kick: bool,
    label: String,
}

fn default_snapshots(spec: &ProtocolSpec) -> Vec<Snapshot> {
    let total = spec.schedule.total_duration();
    if let Some(&(t_kick, _)) = spec.schedule.kicks.last() {
        vec![
            Snapshot {
                t: 0.0,
                include_kick: false,
                label: "initial".into(),
            },
            Snapshot {
                t: t_kick,
                include_kick: false,
                label: "pre-kick".into(),
            },
            Snapshot {
                t: t_kick,
                include_kick: true,
                label: "post-kick".into(),
            },
        ]
    } else {
        // Finite-pulse protocols: initial, end of expansion, end of pulse.
        let expansion_end = spec
            .schedule
            .segments
            .first()
            .map_or(total, |s| s.duration);
        vec![
            Snapshot {
                t: 0.0,
                include_kick: false,
                label: "initial".into(),
            },
            Snapshot {
                t: expansion_end,
                include_kick: false,
                label: "pre-pulse".into(),
            },
            Snapshot {
                t: total,
                include_kick: false,
                label: "final".into(),
            },
        ]
    }
}

fn snapshot_state(
    spec: &ProtocolSpec,
    snap: &Snapshot,
    config: &IntegratorConfig,
) -> Result<ScalingState, CliError> {
    if snap.t == 0.0 && !snap.include_kick {
        return Ok(ScalingState::initial());
    }
    let clipped = spec.schedule.truncated(snap.t, snap.include_kick);
    let traj = integrate(&clipped, ScalingState::initial(), config)?;
    Ok(traj.final_state())
}

fn wigner_file(
    spec: &ProtocolSpec,
    snap: &Snapshot,
    state: &GaussianState,
    grid: &WignerGrid,
    r0: f64,
    p0: f64,
) -> String {
    let mut out = String::from("trapctl-wigner-grid v1\n");
    out.push_str(&format!("protocol: {}\n", spec.family));
    out.push_str(&format!("snapshot: {}\n", snap.label));
    out.push_str(&format!("snapshot_t: {}\n", float(snap.t)));
    out.push_str(&format!("omega0: {}\n", float(spec.schedule.omega0)));
    out.push_str(&format!("r0: {}\n", float(r0)));
    out.push_str(&format!("p0: {}\n", float(p0)));
    out.push_str(&format!("sigma_rr: {}\n", float(state.sigma_rr)));
    out.push_str(&format!("sigma_rp: {}\n", float(state.sigma_rp)));
    out.push_str(&format!("sigma_pp: {}\n", float(state.sigma_pp)));
    out.push_str(&format!("det_sigma: {}\n", float(grid.det_sigma)));
    out.push_str(&format!(
        "r_range_scaled: {} {}\n",
        float(grid.r_axis[0] / r0),
        float(grid.r_axis[grid.r_axis.len() - 1] / r0)
    ));
    out.push_str(&format!(
        "p_range_scaled: {} {}\n",
        float(grid.p_axis[0] / p0),
        float(grid.p_axis[grid.p_axis.len() - 1] / p0)
    ));
    out.push_str(&format!(
        "resolution: {} {}\n",
        grid.r_axis.len(),
        grid.p_axis.len()
    ));
    out.push_str("layout: rows over r (scaled by r0), columns over p (scaled by p0)\n");
    out.push_str("data:\n");
    for i in 0..grid.r_axis.len() {
        let row: Vec<String> = (0..grid.p_axis.len())
            .map(|j| float(grid.value(i, j)))
            .collect();
        out.push_str(&row.join(" "));
        out.push('\n');
    }
    out
}

fn cmd_wigner(ctx: &Context, args: WignerArgs) -> Result<i32, CliError> {
    let spec = ctx.protocol_from(args.protocol.as_deref())?;
    let omega0 = ctx.omega0;
    let beta0 = match (&args.beta0, &ctx.paper_defaults) {
        (Some(b), _) => *b,
        (None, Some(id)) => match preset(id, omega0)? {
            Preset::Wigner { beta0, .. } => beta0,
            _ => 1.0 / omega0,
        },
        (None, None) => 1.0 / omega0,
    };
    if args.resolution < 2 {
        return Err(CliError::Input(
            "--resolution must be at least 2 per axis".into(),
        ));
    }
    let initial = thermal_state(beta0, omega0)?;

    let snapshots: Vec<Snapshot> = match &args.times {
        None => default_snapshots(&spec),
        Some(spec_times) => {
            let total = spec.schedule.total_duration();
            let mut snaps = Vec::new();
            for tok in spec_times.split(',') {
                let t: f64 = tok.trim().parse().map_err(|_| {
                    CliError::Input(format!("malformed snapshot time `{tok}`"))
                })?;
                if !(0.0..=total).contains(&t) {
                    return Err(CliError::Input(format!(
                        "snapshot time {t} outside the protocol span [0, {total}]"
                    )));
                }
                let on_kick = spec.schedule.kicks.iter().any(|&(tk, _)| tk == t);
                snaps.push(Snapshot {
                    t,
                    include_kick: false,
                    label: format!("t={t}"),
                });
                if on_kick {
                    snaps.push(Snapshot {
                        t,
                        include_kick: true,
                        label: format!("t={t} post-kick"),
                    });
                }
            }
            snaps
        }
    };

    let config = ctx.integrator();
    let mut states = Vec::new();
    for snap in &snapshots {
        let scaling = snapshot_state(&spec, snap, &config)?;
        let state = evolve(&initial, &map_from_scaling_state(&scaling))?;
        states.push(state);
    }

    // Shared axes over all snapshots, scaled by the reference-trap
    // widths r₀ = √(1/(2ω₀)) and p₀ = √(ω₀/2).
    let r0 = (1.0 / (2.0 * omega0)).sqrt();
    let p0 = (omega0 / 2.0).sqrt();
    let r_half = match args.r_max {
        Some(v) => v * r0,
        None => {
            4.5 * states
                .iter()
                .map(|s| s.sigma_rr.sqrt())
                .fold(f64::MIN_POSITIVE, f64::max)
        }
    };
    let p_half = match args.p_max {
        Some(v) => v * p0,
        None => {
            4.5 * states
                .iter()
                .map(|s| s.sigma_pp.sqrt())
                .fold(f64::MIN_POSITIVE, f64::max)
        }
    };

    let prefix = args
        .out_prefix
        .clone()
        .unwrap_or_else(|| format!("{}.wigner", spec.family));
    for (i, (snap, state)) in snapshots.iter().zip(&states).enumerate() {
        let grid = wigner_grid(
            state,
            (-r_half, r_half),
            (-p_half, p_half),
            (args.resolution, args.resolution),
        )?;
        let path = ctx.resolve_out(Path::new(&format!("{prefix}.{i}.grid")))?;
        fs::write(&path, wigner_file(&spec, snap, state, &grid, r0, p0))?;
        println!(
            "wrote {} ({}; sigma_rr = {:.6}, sigma_pp = {:.6}, sigma_rp = {:.6})",
            path.display(),
            snap.label,
            state.sigma_rr,
            state.sigma_pp,
            state.sigma_rp
        );
    }
    Ok(0)
}

fn cmd_verify(ctx: &Context, args: VerifyArgs) -> Result<i32, CliError> {
    let spec = ctx.protocol_from(args.protocol.as_deref())?;
    let thresholds = Thresholds {
        b_residual: args.b_tol,
        b_dot_residual: args.bdot_tol,
        invariant_drift: args.drift_tol,
        ..Thresholds::default()
    };
    let ensemble = if args.ensemble {
        let beta0 = args.beta0.unwrap_or(1.0 / ctx.omega0);
        Some(EnsembleCheck {
            initial: thermal_state(beta0, ctx.omega0)?,
            config: EnsembleConfig::new(args.samples, ctx.seed),
        })
    } else {
        None
    };
    let report = verify_protocol(&spec, &thresholds, &ctx.integrator(), ensemble.as_ref())?;

    let out = args
        .out
        .unwrap_or_else(|| PathBuf::from(format!("{}.report.txt", spec.family)));
    let path = ctx.resolve_out(&out)?;
    let text = report.to_text();
    fs::write(&path, &text)?;
    print!("{text}");
    println!("wrote {}", path.display());
    if report.passed() {
        Ok(0)
    } else {
        Err(CliError::VerificationFailed)
    }
}

fn apply_sweep_value(
    params: &FamilyParams,
    name: &str,
    value: f64,
) -> Result<FamilyParams, CliError> {
    let mut p = params.clone();
    match name {
        "b-f" => p.b_f = Some(value),
        "omega-f" => p.omega_f = Some(value),
        "omega-i" => p.omega_i = Some(value),
        "omega-k" => p.omega_k = Some(value),
        "t-k" => p.t_k = Some(value),
        "t-f" => p.t_f = Some(value),
        "n" => p.n = Some(value.round() as u32),
        other => {
            return Err(CliError::Input(format!(
                "unknown sweep parameter `{other}` \
                 (expected b-f, omega-f, omega-i, omega-k, t-k, t-f, or n)"
            )))
        }
    }
    Ok(p)
}

fn cmd_sweep(ctx: &Context, args: SweepArgs) -> Result<i32, CliError> {
    if args.points < 1 {
        return Err(CliError::Input("--points must be at least 1".into()));
    }
    if !(args.to > args.from) {
        return Err(CliError::Input(format!(
            "sweep range must satisfy from < to, got [{}, {}]",
            args.from, args.to
        )));
    }
    // Reject unknown parameter names before spawning work.
    apply_sweep_value(&args.params, &args.param, args.from)?;

    let xs = grid_points(args.from, args.to, args.points, false);
    let thresholds = Thresholds::default();
    let config = ctx.integrator();
    let omega0 = ctx.omega0;

    let rows: Vec<Vec<String>> = xs
        .par_iter()
        .map(|&value| {
            let p = apply_sweep_value(&args.params, &args.param, value)
                .expect("validated above");
            match design_from_family(&args.family, omega0, &p) {
                Ok(spec) => match verify_protocol(&spec, &thresholds, &config, None) {
                    Ok(report) => vec![
                        float(value),
                        "ok".into(),
                        float(report.final_b_error),
                        float(report.final_b_dot_residual),
                        float(report.max_invariant_drift),
                        float(report.stationarity_error),
                        if report.passed() { "true" } else { "false" }.into(),
                    ],
                    Err(e) => vec![
                        float(value),
                        format!("error ({})", e.to_string().replace(',', ";")),
                        String::new(),
                        String::new(),
                        String::new(),
                        String::new(),
                        "false".into(),
                    ],
                },
                Err(e) => vec![
                    float(value),
                    format!("infeasible ({})", e.to_string().replace(',', ";")),
                    String::new(),
                    String::new(),
                    String::new(),
                    String::new(),
                    String::new(),
                ],
            }
        })
        .collect();

    let mut csv = Csv::new(&[
        &args.param,
        "status",
        "final_b_error",
        "final_b_dot_residual",
        "invariant_drift",
        "stationarity_error",
        "pass",
    ]);
    for row in &rows {
        csv.row(row);
    }
    let out = args
        .out
        .unwrap_or_else(|| PathBuf::from(format!("{}.sweep.csv", args.family)));
    let path = ctx.resolve_out(&out)?;
    fs::write(&path, csv.finish())?;
    println!("wrote {} ({} points)", path.display(), xs.len());
    Ok(0)
}
