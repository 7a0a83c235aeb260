//! The five experiment pipelines behind the run subcommands.

use std::path::PathBuf;
use std::time::Instant;

use degenlab_core::io::{
    fmt_f64, write_growth_csv, write_heat_run_csv, write_probe_csv, write_sobolev_scan_csv, write_strip_field_bin,
    write_table, write_triplets,
};
use degenlab_core::mellin::{
    mellin_forward, model_residual, tau_decay_report, Half, MellinField, ModelRhs, ModelSolver, StripField, StripGrid,
};
use degenlab_core::profile::make_profile;
use degenlab_core::quadrature::Cutoff;
use degenlab_core::singular::{
    build_singular, default_cutoffs, derivative_ladder, gevrey_scan, higher_order_singular, residual_check,
    sobolev_scan, GevreyReport, ResidualReport,
};
use degenlab_core::spectrum::{spectrum_of, SpectrumReport};
use degenlab_core::torus::eigen::GapOptions;
use degenlab_core::torus::probe::squeezed_bump;
use degenlab_core::torus::{
    growth_scan, heat_evolve, regularity_probe, semigroup_inverse_check, spectral_gap, DiscreteOperator, HeatOptions,
    SobolevNorm,
};
use degenlab_core::torus_spec::{extend_to_torus, TorusGrid};
use degenlab_core::{Cplx, Profile, TorusSpec};
use serde_json::{json, Value};

use crate::config::{
    Experiment, Format, HeatParams, LoadedConfig, ModelParams, ProbeParams, SingularParams, SpectrumParams, TorusParams,
};
use crate::error::{classify, CliError};
use crate::manifest::{Manifest, OutputDir};
use crate::plot::plot_report;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RunOptions {
    pub out: Option<PathBuf>,
    /// Multiplies the torus grid and the number of Mellin frequencies.
    pub grid_scale: usize,
    pub seed: Option<u64>,
}

impl Default for RunOptions {
    fn default() -> Self {
        Self { out: None, grid_scale: 1, seed: None }
    }
}

#[derive(Debug, Clone)]
pub struct RunReport {
    pub experiment: &'static str,
    pub out_dir: PathBuf,
    pub manifest: Manifest,
    /// Headline numbers, also written to the experiment's JSON.
    pub summary: Value,
}

struct Ctx<'a> {
    cfg: &'a LoadedConfig,
    out: OutputDir,
    scale: usize,
    seed: u64,
    /// Report CSVs that have a plot schema.
    plottable: Vec<String>,
}

impl Ctx<'_> {
    fn core<T>(&self, section: &str, r: degenlab_core::Result<T>) -> Result<T, CliError> {
        r.map_err(|e| classify(e, self.cfg, section))
    }

    fn wants(&self, f: Format) -> bool {
        self.cfg.config.output.wants(f)
    }

    fn profile(&self) -> Result<Profile, CliError> {
        let desc = self.cfg.config.profile_descriptor()?;
        self.core("profile", make_profile(desc, self.cfg.config.profile.m))
    }

    fn spectrum(&self, profile: &Profile, w_max: f64, count: usize) -> Result<SpectrumReport<f64>, CliError> {
        self.core("profile", spectrum_of(profile, w_max, count))
    }

    fn torus(&self) -> TorusParams {
        let mut t = self.cfg.config.torus_params(&self.cfg.experiment);
        t.nx *= self.scale;
        t.nt *= self.scale;
        t
    }

    fn torus_spec(&self, profile: &Profile) -> Result<(TorusParams, TorusSpec), CliError> {
        let t = self.torus();
        let spec = self
            .core("torus", extend_to_torus(profile, t.period_x, t.period_t, TorusGrid::new(t.nx, t.nt), t.variant))?;
        Ok((t, spec))
    }

    fn csv(
        &mut self,
        name: &str,
        f: impl FnOnce(&mut dyn std::io::Write) -> degenlab_core::Result<()>,
    ) -> Result<(), CliError> {
        if self.wants(Format::Csv) {
            self.out.write_with(name, f)?;
        }
        Ok(())
    }

    fn report_csv(
        &mut self,
        name: &str,
        f: impl FnOnce(&mut dyn std::io::Write) -> degenlab_core::Result<()>,
    ) -> Result<(), CliError> {
        if self.wants(Format::Csv) {
            self.out.write_with(name, f)?;
            self.plottable.push(name.to_string());
        }
        Ok(())
    }

    fn json(&mut self, name: &str, v: &Value) -> Result<(), CliError> {
        if self.wants(Format::Json) {
            self.out.write_json(name, v)?;
        }
        Ok(())
    }

    fn triplets(&mut self, op: &DiscreteOperator<f64>) -> Result<(), CliError> {
        if self.wants(Format::Triplets) {
            self.out.write_with("operator.txt", |w| write_triplets(w, op))?;
        }
        Ok(())
    }
}

/// `s` values given directly followed by `s₀ + offset`.
fn with_offsets(
    ctx: &Ctx,
    section: &str,
    direct: &[f64],
    offsets: &[f64],
    report: &SpectrumReport<f64>,
) -> Result<Vec<f64>, CliError> {
    let mut s = direct.to_vec();
    if !offsets.is_empty() {
        let s0 = report.s0.ok_or_else(|| {
            ctx.cfg.key_error(section, "s0_offsets", "the profile has no real threshold s0 to offset from")
        })?;
        s.extend(offsets.iter().map(|d| s0 + d));
    }
    Ok(s)
}

fn profile_json(profile: &Profile) -> Value {
    json!({ "descriptor": profile.descriptor, "m": profile.m, "fingerprint": profile.fingerprint() })
}

fn run_spectrum(ctx: &mut Ctx, p: &SpectrumParams) -> Result<Value, CliError> {
    let profile = ctx.profile()?;
    let report = ctx.spectrum(&profile, p.w_max, p.max_count)?;
    let rows = report.sigma0.iter().enumerate().map(|(k, &w)| {
        let s = if w >= -0.25 { (w + 0.25).sqrt() } else { f64::NAN };
        vec![k.to_string(), fmt_f64(w), fmt_f64(s)]
    });
    let rows: Vec<Vec<String>> = rows.collect();
    ctx.csv("sigma.csv", |w| write_table(w, &["k".into(), "w".into(), "s".into()], rows))?;
    let summary = json!({
        "s0": report.s0,
        "zero_membership_flag": report.zero_membership_flag,
        "roots": report.sigma0.len(),
    });
    ctx.json("spectrum.json", &json!({ "profile": profile_json(&profile), "params": p, "report": report }))?;
    Ok(summary)
}

/// `u* = (1 - x²) exp(-(log t)²)` on `t > 0` and `𝓛ₛ u*` in closed form.
pub fn manufactured(profile: &Profile, s: f64, grid: StripGrid<f64>) -> (StripField<f64>, StripField<f64>) {
    let phi = |u: f64| (-(u * u)).exp();
    let exact = StripField::from_positive_fn(grid, |x, t| (1.0 - x * x) * phi(t.ln()));
    let p = profile.clone();
    let f = StripField::from_positive_fn(grid, move |x, t| {
        let u = t.ln();
        let (d0, d1, d2) = (phi(u), -2.0 * u * phi(u), (4.0 * u * u - 2.0) * phi(u));
        let a2 = p.alpha(x).powi(2);
        let tt = d2 + (2.0 * s + 1.0) * d1 + s * (s + 1.0) * d0;
        2.0 * d0 - a2 * (1.0 - x * x) * tt + p.beta(x) * (1.0 - x * x) * d0
    });
    (exact, f)
}

pub fn relative_l2(a: &StripField<f64>, reference: &StripField<f64>) -> f64 {
    let d = a.axpy(Cplx::new(-1.0, 0.0), reference).expect("same grid");
    (d.norm_sq() / reference.norm_sq()).sqrt()
}

/// `(1 - x²)(2 + x)/(1 + τ²)`: smooth in `x`, algebraic in `τ`, so every
/// frequency bin carries data for the decay fit.
pub fn decay_probe(grid: StripGrid<f64>) -> MellinField<f64> {
    let mut m = MellinField::zeros(grid, Half::Positive);
    for i in 0..grid.nx {
        let x = grid.x(i);
        for j in 0..grid.n_tau {
            let tau = grid.tau(j);
            m.values[i * grid.n_tau + j] = Cplx::new((1.0 - x * x) * (2.0 + x) / (1.0 + tau * tau), 0.0);
        }
    }
    m
}

fn run_model(ctx: &mut Ctx, p: &ModelParams) -> Result<Value, CliError> {
    const SEC: &str = "experiment.model";
    let profile = ctx.profile()?;
    let w_cap = (p.s.abs() + 2.0).powi(2);
    let report = ctx.spectrum(&profile, w_cap, 200)?;
    let grid = ctx.core(SEC, StripGrid::new(p.nx, p.u_min, p.u_max, p.n_tau * ctx.scale))?;
    let (exact, f) = manufactured(&profile, p.s, grid);
    let solver = ctx.core(SEC, ModelSolver::new(&profile, p.s, grid, &report))?;
    let rhs: ModelRhs<f64> = f.clone().into();
    let sol = ctx.core(SEC, solver.solve(&rhs))?;
    let error = relative_l2(&sol.u, &exact);
    let residual = ctx.core(SEC, model_residual(&profile, p.s, &sol.u, &rhs))?;
    let fhat = ctx.core(SEC, mellin_forward(&f, Half::Positive))?;
    let plancherel = f.half_norm_sq(Half::Positive) / fhat.norm_sq();
    let decay = ctx.core(SEC, tau_decay_report(solver.operator(), p.s, &decay_probe(grid)))?;
    let rows: Vec<Vec<String>> =
        decay.tau.iter().zip(&decay.ratio).map(|(t, r)| vec![fmt_f64(*t), fmt_f64(*r)]).collect();
    ctx.csv("tau_decay.csv", |w| write_table(w, &["tau".into(), "ratio".into()], rows))?;
    if ctx.wants(Format::Bin) {
        ctx.out.write_with("solution.bin", |w| write_strip_field_bin(w, &sol.u))?;
    }
    let summary = json!({
        "relative_l2_error": error,
        "discrete_residual": sol.residual,
        "model_residual": residual,
        "plancherel_ratio": plancherel,
        "tau_decay_slope": decay.slope,
    });
    ctx.json(
        "model.json",
        &json!({
            "profile": profile_json(&profile),
            "params": p,
            "grid": { "nx": grid.nx, "u_min": grid.u_min, "u_max": grid.u_max, "n_tau": grid.n_tau },
            "summary": summary,
            "tau_decay": { "slope": decay.slope, "fit_constant": decay.fit_constant, "sup_constant": decay.sup_constant, "tail_start": decay.tail_start },
            "warnings": sol.warnings,
        }),
    )?;
    Ok(summary)
}

fn residual_json(r: &ResidualReport) -> Value {
    json!({
        "plateau_max": r.plateau_max,
        "transition_max": r.transition_max,
        "identity_error": r.identity_error,
        "x_step": r.x_step,
        "t_samples": r.t_samples,
    })
}

/// Grid on which singular fields are sampled for the binary export.
fn singular_grid(scale: usize) -> degenlab_core::Result<StripGrid<f64>> {
    StripGrid::new(129, -8.0, 3.0, 512 * scale)
}

fn run_singular(ctx: &mut Ctx, p: &SingularParams) -> Result<Value, CliError> {
    const SEC: &str = "experiment.singular";
    let profile = ctx.profile()?;
    let report = ctx.spectrum(&profile, p.w_max, 40)?;
    let cut = Cutoff { t1: p.t1, t2: p.t2 };
    let grid = ctx.core(SEC, singular_grid(ctx.scale))?;
    let m = profile.m;
    let sol = if m == 1 {
        ctx.core(SEC, build_singular(&profile, &report, p.j, cut, grid))?
    } else {
        ctx.core(SEC, higher_order_singular(&profile, &report, m, p.j, cut, grid))?
    };
    let residual = residual_check(&sol, &profile);
    if ctx.wants(Format::Bin) {
        ctx.out.write_with("singular.bin", |w| write_strip_field_bin(w, &sol.field))?;
    }
    let s_j = report.sigma.get(p.j).copied();
    let mut body = json!({
        "profile": profile_json(&profile),
        "params": p,
        "j": p.j,
        "w": sol.w,
        "s_j": s_j,
        "residual": residual_json(&residual),
    });
    let summary = if m == 1 {
        let s_j = s_j.expect("build_singular checked the index");
        let r_values = p.r_values.clone().unwrap_or_else(|| vec![0.0, 0.5, s_j - 0.5, s_j]);
        let cutoffs = p.cutoffs.clone().unwrap_or_else(default_cutoffs);
        let scan = ctx.core(SEC, sobolev_scan(&sol, &r_values, &cutoffs))?;
        ctx.report_csv("scan.csv", |w| write_sobolev_scan_csv(w, &scan))?;
        body["gamma"] = json!(sol.gamma);
        body["scan"] = json!(scan);
        json!({
            "gamma": sol.gamma,
            "tail_exponent": scan.tail_exponent,
            "s_hat": scan.s_hat,
            "plateau_residual": residual.plateau_max,
        })
    } else {
        let gev = ctx.core(SEC, gevrey_scan(&sol, (p.gevrey_window[0], p.gevrey_window[1]), p.gevrey_samples))?;
        let ladder = ctx.core(SEC, derivative_ladder(&sol, p.ladder_order, p.ladder_t_max))?;
        if let GevreyReport::Exponential { samples, .. } = &gev {
            let rows: Vec<Vec<String>> =
                samples.iter().map(|(t, a, b)| vec![fmt_f64(*t), fmt_f64(*a), fmt_f64(*b)]).collect();
            ctx.csv("gevrey.csv", |w| write_table(w, &["tau".into(), "origin".into(), "full".into()], rows))?;
        }
        let rows: Vec<Vec<String>> = ladder
            .exact_sup
            .iter()
            .zip(&ladder.fd_estimate)
            .enumerate()
            .map(|(k, (a, b))| vec![k.to_string(), fmt_f64(*a), fmt_f64(*b)])
            .collect();
        ctx.csv("ladder.csv", |w| write_table(w, &["k".into(), "exact_sup".into(), "fd_estimate".into()], rows))?;
        let lambda = match sol.time {
            degenlab_core::singular::TimeProfile::Exponential { lambda, .. } => lambda,
            _ => f64::NAN,
        };
        let max_derivative = ladder.exact_sup.iter().copied().fold(0.0, f64::max);
        body["lambda"] = json!(lambda);
        body["gevrey"] = json!(gev);
        body["ladder"] = json!({ "exact_sup": ladder.exact_sup, "fd_estimate": ladder.fd_estimate, "t_max": ladder.t_max, "fd_step": ladder.fd_step });
        json!({
            "lambda": lambda,
            "max_derivative_at_origin": max_derivative,
            "plateau_residual": residual.plateau_max,
        })
    };
    body["summary"] = summary.clone();
    ctx.json("singular.json", &body)?;
    Ok(summary)
}

fn run_probe(ctx: &mut Ctx, p: &ProbeParams) -> Result<Value, CliError> {
    const SEC: &str = "experiment.probe";
    let profile = ctx.profile()?;
    let report = ctx.spectrum(&profile, 200.0, 8)?;
    let s_values = with_offsets(ctx, SEC, &p.s_values, &p.s0_offsets, &report)?;
    let (t, spec) = ctx.torus_spec(&profile)?;
    if ctx.wants(Format::Triplets) {
        ctx.triplets(&DiscreteOperator::assemble(&spec))?;
    }
    let rep = ctx.core(SEC, regularity_probe(&spec, &s_values, &p.eps))?;
    ctx.report_csv("probe.csv", |w| write_probe_csv(w, &rep))?;
    let summary = json!({
        "s_values": rep.s_values,
        "input_exponents": rep.input_exponents,
        "ratio_exponents": rep.ratio_exponents,
        "skipped": rep.skipped,
    });
    ctx.json(
        "probe.json",
        &json!({ "profile": profile_json(&profile), "s0": report.s0, "torus": t, "params": p, "report": rep }),
    )?;
    Ok(summary)
}

/// Inner CG tolerance of the gap computation. Tighter values stagnate in
/// rounding on grids of a few ten thousand nodes.
const GAP_INNER_TOL: f64 = 1e-10;

fn run_heat(ctx: &mut Ctx, p: &HeatParams) -> Result<Value, CliError> {
    const SEC: &str = "experiment.heat";
    let profile = ctx.profile()?;
    let report = ctx.spectrum(&profile, 200.0, 8)?;
    let s_values = with_offsets(ctx, SEC, &p.s_values, &p.s0_offsets, &report)?;
    let (t, spec) = ctx.torus_spec(&profile)?;
    let op = DiscreteOperator::assemble(&spec);
    ctx.triplets(&op)?;
    let sob = SobolevNorm::new(&spec);
    let f = squeezed_bump(&spec, p.eps);
    let mut opts = HeatOptions::new(p.dt, p.tau_max, p.scheme);
    opts.s_values = s_values.clone();
    opts.record_every = p.record_every;
    let run = ctx.core(SEC, heat_evolve(&op, &sob, &f, &opts))?;
    let growth = (0..s_values.len()).map(|k| growth_scan(&run, k)).collect::<degenlab_core::Result<Vec<_>>>();
    let growth = ctx.core(SEC, growth)?;
    ctx.report_csv("heat.csv", |w| write_heat_run_csv(w, &run))?;
    ctx.csv("growth.csv", |w| write_growth_csv(w, &growth))?;

    let gap = if p.gap || p.semigroup {
        Some(ctx.core(
            SEC,
            spectral_gap(&op, GapOptions { seed: ctx.seed, inner_tol: GAP_INNER_TOL, ..GapOptions::default() }),
        )?)
    } else {
        None
    };
    let semigroup = match (&gap, p.semigroup) {
        (Some(g), true) => {
            let mean = op.mean(&f);
            let f0: Vec<f64> = f.iter().map(|v| v - mean).collect();
            let horizon = p.semigroup_horizon / g.lambda1;
            let chk = ctx.core(SEC, semigroup_inverse_check(&op, &f0, g.lambda1, horizon, p.semigroup_steps))?;
            Some(
                json!({ "tau_max": chk.tau_max, "steps": chk.steps, "discrepancy": chk.discrepancy, "tail_bound": chk.tail_bound }),
            )
        }
        _ => None,
    };
    let windows: Vec<Value> = growth
        .iter()
        .map(|g| {
            let longest = g.longest_window();
            json!({ "s": g.s, "max_slope": g.max_slope, "positive_windows": g.positive_windows, "longest_window": longest })
        })
        .collect();
    let summary = json!({
        "contraction_defect": run.contraction_defect,
        "lambda1": gap.as_ref().map(|g| g.lambda1),
        "semigroup_discrepancy": semigroup.as_ref().map(|s| s["discrepancy"].clone()),
        "longest_window": growth.iter().map(|g| g.longest_window()).collect::<Vec<_>>(),
    });
    ctx.json(
        "heat.json",
        &json!({
            "profile": profile_json(&profile),
            "s0": report.s0,
            "torus": t,
            "params": p,
            "s_values": s_values,
            "steps": run.tau.len().saturating_sub(1) * p.record_every,
            "contraction_defect": run.contraction_defect,
            "cg_iterations": run.cg_iterations,
            "growth": windows,
            "gap": gap,
            "semigroup": semigroup,
            "summary": summary,
        }),
    )?;
    Ok(summary)
}

/// Runs the experiment selected by `cfg` and writes its artifacts.
pub fn run_experiment(cfg: &LoadedConfig, opts: &RunOptions) -> Result<RunReport, CliError> {
    if !opts.grid_scale.is_power_of_two() || opts.grid_scale > 16 {
        return Err(CliError::Config(crate::config::ConfigError {
            key: "--grid-scale".into(),
            line: None,
            message: format!("must be a power of two between 1 and 16, got {}", opts.grid_scale),
        }));
    }
    let dir = opts.out.clone().unwrap_or_else(|| cfg.config.output.dir.clone());
    let out = OutputDir::prepare(&dir)?;
    let seed = opts.seed.unwrap_or(cfg.config.seed);
    let mut ctx = Ctx { cfg, out, scale: opts.grid_scale, seed, plottable: Vec::new() };
    ctx.out.write_bytes("config.toml", cfg.source.as_bytes())?;
    let started = Instant::now();
    let summary = match &cfg.experiment {
        Experiment::Spectrum(p) => run_spectrum(&mut ctx, p)?,
        Experiment::Model(p) => run_model(&mut ctx, p)?,
        Experiment::Singular(p) => run_singular(&mut ctx, p)?,
        Experiment::Probe(p) => run_probe(&mut ctx, p)?,
        Experiment::Heat(p) => run_heat(&mut ctx, p)?,
    };
    if cfg.config.output.plot {
        for name in std::mem::take(&mut ctx.plottable) {
            let (_, svg) = plot_report(&ctx.out.path(&name), None, &cfg.sha256)?;
            ctx.out.write_bytes(&name.replace(".csv", ".svg"), svg.as_bytes())?;
        }
    }
    log_elapsed(cfg.experiment.name(), started);
    let manifest = ctx.out.finish(Manifest {
        tool: "degenlab".into(),
        version: env!("CARGO_PKG_VERSION").into(),
        experiment: cfg.experiment.name().into(),
        config_sha256: cfg.sha256.clone(),
        seed,
        grid_scale: opts.grid_scale,
        files: Vec::new(),
    })?;
    Ok(RunReport { experiment: cfg.experiment.name(), out_dir: dir, manifest, summary })
}

fn log_elapsed(name: &str, started: Instant) {
    eprintln!("{name}: finished in {:.2} s", started.elapsed().as_secs_f64());
}
