//! The `renvol` command line: one subcommand per module operation, each
//! producing a JSON report of inputs, outputs and tolerance-checked assertions.
//!
//! Exit status is 0 when every assertion passes, 1 when one fails, 2 for
//! configuration errors and 3 when a numerical method does not converge.

use std::f64::consts::PI;
use std::ffi::OsString;
use std::fs;
use std::path::{Path, PathBuf};
use std::time::Instant;

use clap::{Parser, ValueEnum};
use serde::{Deserialize, Serialize};
use serde_json::{json, Value};

use crate::epstein::{envelope, duality_report, EnvelopeProblem};
use crate::error::{Error, Result};
use crate::foliation::{
    boundary_metric_area, flow, h_defect_limit, minkowski_report, vr_limit, w_invariance_report, CHI,
};
use crate::hyp3::{ball_closed_form, BoundaryPoint};
use crate::io;
use crate::profile::{
    foliation_profile_checks, fuchsian_profile, geometric_grid, hawking_mass, vr_from_profile, IsoProfile,
};
use crate::sphere::{
    corollary_gap, mobius_factor, polyakov_diff, polyakov_path_integral, ricci_flow, ConformalFactor,
    RicciOptions,
};
use crate::surfaces::{RadialSurface, DEFAULT_NODES};
use crate::tube::{
    first_eigenvalue, jacobi_eigenvalues, jacobi_eigenvalues_fd, jacobi_eigenvalues_fd_extrapolated,
    second_eigenvalue, stability_threshold, BoundaryCondition, TubeSpec,
};

pub const EXIT_ASSERTION: i32 = 1;
pub const EXIT_CONFIG: i32 = 2;
pub const EXIT_NONCONVERGENCE: i32 = 3;

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Command {
    Ball,
    Surface,
    Flow,
    Minkowski,
    RicciFlow,
    Polyakov,
    Envelope,
    Profile,
    Hawking,
    Vr,
    Tube,
}

impl Command {
    fn name(self) -> &'static str {
        match self {
            Command::Ball => "ball",
            Command::Surface => "surface",
            Command::Flow => "flow",
            Command::Minkowski => "minkowski",
            Command::RicciFlow => "ricci-flow",
            Command::Polyakov => "polyakov",
            Command::Envelope => "envelope",
            Command::Profile => "profile",
            Command::Hawking => "hawking",
            Command::Vr => "vr",
            Command::Tube => "tube",
        }
    }
}

/// Options for every command. Each may also come from a JSON file given by
/// `--config`; flags on the command line win.
#[derive(Clone, Debug, Default, PartialEq, Parser, Serialize, Deserialize)]
#[command(name = "renvol", version, about = "Renormalized volume toolkit for hyperbolic 3-space")]
#[serde(default, deny_unknown_fields)]
pub struct RunConfig {
    #[arg(value_enum)]
    pub command: Option<Command>,

    /// JSON file with any of these options.
    #[arg(long)]
    #[serde(skip)]
    pub config: Option<PathBuf>,

    /// Geodesic ball radius.
    #[arg(long, allow_hyphen_values = true)]
    pub r: Option<f64>,
    /// `sphere:R`, `legendre:c0,c1,..`, `cos:R,AMP,K` or a surface CSV.
    #[arg(long)]
    pub surface: Option<String>,
    /// Flow distances, comma separated.
    #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
    pub r_grid: Option<Vec<f64>>,
    /// Largest flow distance used for limits at infinity.
    #[arg(long)]
    pub r_max: Option<f64>,
    /// `zero`, `constant:C`, `zonal:c0,c1,..`, `random:L,AMP`, `mobius:T` or a JSON file.
    #[arg(long, allow_hyphen_values = true)]
    pub omega: Option<String>,
    /// Horosphere offset of the envelope.
    #[arg(long, allow_hyphen_values = true)]
    pub offset: Option<f64>,
    /// `fuchsian:genus=G[,shift=S]`, `fuchsian:chi=X[,shift=S]` or a profile CSV.
    #[arg(long)]
    pub profile: Option<String>,
    #[arg(long)]
    pub vmin: Option<f64>,
    #[arg(long)]
    pub vmax: Option<f64>,
    /// Number of profile samples.
    #[arg(long)]
    pub samples: Option<usize>,
    /// Tube slope.
    #[arg(long)]
    pub a: Option<f64>,
    /// Tube domain length.
    #[arg(long)]
    pub lambda: Option<f64>,
    #[arg(long)]
    pub bc: Option<BoundaryCondition>,
    /// Radial cells of the finite-difference oracle.
    #[arg(long)]
    pub grid_n: Option<usize>,
    #[arg(long)]
    pub dt: Option<f64>,
    #[arg(long)]
    pub t_max: Option<f64>,
    /// Convergence tolerance of the Ricci flow.
    #[arg(long)]
    pub tol: Option<f64>,
    #[arg(long)]
    pub band_limit: Option<usize>,
    /// Quadrature nodes of the Polyakov path integral.
    #[arg(long)]
    pub nodes: Option<usize>,
    #[arg(long)]
    pub seed: Option<u64>,
    /// Expected value of the headline output, asserted when given.
    #[arg(long, allow_hyphen_values = true)]
    pub expect: Option<f64>,
    /// Report path; standard output when absent.
    #[arg(long)]
    pub output: Option<PathBuf>,
    /// Path for the command's data series (CSV, or JSON lines for `flow`).
    #[arg(long)]
    pub series: Option<PathBuf>,
}

macro_rules! overlay {
    ($hi:expr, $lo:expr, $($f:ident),*) => {
        RunConfig { config: $hi.config.clone(), $($f: $hi.$f.clone().or($lo.$f.clone())),* }
    };
}

impl RunConfig {
    /// `self` with unset options taken from `file`.
    pub fn over(&self, file: &RunConfig) -> RunConfig {
        overlay!(
            self, file, command, r, surface, r_grid, r_max, omega, offset, profile, vmin, vmax, samples, a, lambda,
            bc, grid_n, dt, t_max, tol, band_limit, nodes, seed, expect, output, series
        )
    }

    /// Loads `--config` (if any) underneath the flags.
    pub fn resolve(self) -> Result<RunConfig> {
        match &self.config {
            None => Ok(self),
            Some(path) => {
                let text = fs::read_to_string(path)?;
                let file: RunConfig = serde_json::from_str(&text)?;
                Ok(self.over(&file))
            }
        }
    }

    fn validate(&self) -> Result<()> {
        let positive = [
            ("r", self.r),
            ("r_max", self.r_max),
            ("vmin", self.vmin),
            ("vmax", self.vmax),
            ("a", self.a),
            ("lambda", self.lambda),
            ("dt", self.dt),
            ("tol", self.tol),
        ];
        for (name, v) in positive {
            if let Some(v) = v {
                if !(v > 0.0 && v.is_finite()) {
                    return Err(Error::invalid(format!("--{} must be positive, got {v}", name.replace('_', "-"))));
                }
            }
        }
        if let Some(t) = self.t_max {
            if !(t >= 0.0 && t.is_finite()) {
                return Err(Error::invalid(format!("--t-max must be nonnegative, got {t}")));
            }
        }
        if let Some(g) = &self.r_grid {
            if g.is_empty() || g.iter().any(|r| !(*r >= 0.0 && r.is_finite())) {
                return Err(Error::invalid("--r-grid must be a non-empty list of nonnegative distances"));
            }
        }
        if matches!(self.samples, Some(n) if n < 8) {
            return Err(Error::invalid("--samples must be at least 8"));
        }
        if matches!(self.nodes, Some(0)) {
            return Err(Error::invalid("--nodes must be positive"));
        }
        Ok(())
    }
}

/// One checked quantity with the tolerance it was checked against.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Assertion {
    pub name: String,
    pub value: f64,
    pub tolerance: f64,
    /// How value and tolerance are compared.
    pub relation: String,
    pub pass: bool,
}

impl Assertion {
    /// |value| ≤ tolerance.
    pub fn near_zero(name: impl Into<String>, value: f64, tolerance: f64) -> Self {
        Self::make(name, value, tolerance, "|value| <= tolerance", value.abs() <= tolerance)
    }

    /// value ≥ −tolerance.
    pub fn nonnegative(name: impl Into<String>, value: f64, tolerance: f64) -> Self {
        Self::make(name, value, tolerance, "value >= -tolerance", value >= -tolerance)
    }

    /// value ≤ tolerance.
    pub fn at_most(name: impl Into<String>, value: f64, tolerance: f64) -> Self {
        Self::make(name, value, tolerance, "value <= tolerance", value <= tolerance)
    }

    /// value < tolerance.
    pub fn below(name: impl Into<String>, value: f64, tolerance: f64) -> Self {
        Self::make(name, value, tolerance, "value < tolerance", value < tolerance)
    }

    fn make(name: impl Into<String>, value: f64, tolerance: f64, relation: &str, pass: bool) -> Self {
        Self { name: name.into(), value, tolerance, relation: relation.into(), pass: pass && value.is_finite() }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Report {
    pub command: String,
    pub inputs: Value,
    pub outputs: Value,
    pub assertions: Vec<Assertion>,
}

impl Report {
    pub fn passed(&self) -> bool {
        self.assertions.iter().all(|a| a.pass)
    }

    /// Pretty JSON with sorted keys and a trailing newline.
    pub fn to_json(&self) -> Result<String> {
        let mut s = serde_json::to_string_pretty(&serde_json::to_value(self)?)?;
        s.push('\n');
        Ok(s)
    }
}

pub fn parse_surface(spec: &str) -> Result<RadialSurface> {
    let numbers = |s: &str| -> Result<Vec<f64>> {
        s.split(',')
            .map(|x| x.trim().parse().map_err(|_| Error::invalid(format!("bad number {x:?} in {spec:?}"))))
            .collect()
    };
    match spec.split_once(':') {
        Some(("sphere", r)) => {
            let r = numbers(r)?;
            match r[..] {
                [r] => RadialSurface::sphere(r),
                _ => Err(Error::invalid("sphere:R takes one radius")),
            }
        }
        Some(("legendre", c)) => RadialSurface::from_legendre(&numbers(c)?),
        Some(("cos", args)) => match numbers(args)?[..] {
            [r0, amp, k] if k >= 0.0 && k.fract() == 0.0 && (k as usize) <= DEFAULT_NODES / 2 => {
                RadialSurface::from_fn(DEFAULT_NODES, k as usize, |t| r0 + amp * (k * t).cos())
            }
            _ => Err(Error::invalid("cos:R,AMP,K needs a radius, an amplitude and a whole frequency")),
        },
        _ => io::read_surface_csv(Path::new(spec)),
    }
}

pub fn parse_omega(spec: &str, seed: u64) -> Result<ConformalFactor> {
    let numbers = |s: &str| -> Result<Vec<f64>> {
        s.split(',')
            .map(|x| x.trim().parse().map_err(|_| Error::invalid(format!("bad number {x:?} in {spec:?}"))))
            .collect()
    };
    if spec == "zero" {
        return Ok(ConformalFactor::zero(0));
    }
    match spec.split_once(':') {
        Some(("constant", c)) => match numbers(c)?[..] {
            [c] => Ok(ConformalFactor::constant(c)),
            _ => Err(Error::invalid("constant:C takes one value")),
        },
        Some(("zonal", c)) => Ok(ConformalFactor::zonal(&numbers(c)?)),
        Some(("random", args)) => match numbers(args)?[..] {
            [l, amp] if l >= 1.0 && l.fract() == 0.0 && amp >= 0.0 => {
                Ok(ConformalFactor::random(l as usize, amp, seed))
            }
            _ => Err(Error::invalid("random:L,AMP needs a whole band limit ≥ 1 and an amplitude ≥ 0")),
        },
        Some(("mobius", t)) => match numbers(t)?[..] {
            [t] => mobius_factor(t, BoundaryPoint::north()),
            _ => Err(Error::invalid("mobius:T takes one parameter")),
        },
        _ => io::read_conformal_json(fs::File::open(spec)?),
    }
}

/// A profile and the v_r value it is known to have, if any.
pub fn parse_profile(spec: &str, v_grid: &[f64]) -> Result<(IsoProfile, Option<f64>)> {
    let Some(args) = spec.strip_prefix("fuchsian:") else {
        return Ok((io::read_profile_csv(Path::new(spec))?, None));
    };
    let mut chi = None;
    let mut shift = 0.0;
    for kv in args.split(',') {
        let (k, v) = kv.split_once('=').ok_or_else(|| Error::invalid(format!("bad profile option {kv:?}")))?;
        let bad = || Error::invalid(format!("bad value {v:?} for {k}"));
        match k.trim() {
            "genus" => chi = Some(2 - 2 * v.trim().parse::<i64>().map_err(|_| bad())?),
            "chi" => chi = Some(v.trim().parse::<i64>().map_err(|_| bad())?),
            "shift" => shift = v.trim().parse::<f64>().map_err(|_| bad())?,
            other => return Err(Error::invalid(format!("unknown profile option {other:?}"))),
        }
    }
    let chi = chi.ok_or_else(|| Error::invalid("fuchsian profile needs genus= or chi="))?;
    let p = fuchsian_profile(chi, v_grid)?;
    if shift == 0.0 {
        Ok((p, Some(0.0)))
    } else {
        // I ↦ I + s moves the limit of V − ½I + … by −s/2.
        Ok((p.shifted(shift)?, Some(-0.5 * shift)))
    }
}

fn is_round(surface: &RadialSurface) -> bool {
    let (lo, hi) = (surface.min_radius(), surface.max_radius());
    hi - lo <= 1e-14 * hi
}

fn run_ball(cfg: &RunConfig) -> Result<(Value, Vec<Assertion>)> {
    let r = cfg.r.unwrap_or(1.0);
    let b = ball_closed_form(r)?;
    let q = RadialSurface::sphere(r)?;
    let w_quad = q.w_volume();
    let outputs = json!({
        "area": b.area, "volume": b.volume, "mean_curvature": b.mean_curvature,
        "w_volume": b.w_volume(), "w_volume_quadrature": w_quad,
    });
    let checks = vec![
        Assertion::near_zero("W + 2πr (closed form)", b.w_volume() + 2.0 * PI * r, 1e-9),
        Assertion::near_zero("W + 2πr (surface quadrature)", w_quad + 2.0 * PI * r, 1e-7),
    ];
    Ok((outputs, checks))
}

fn require<'a, T>(v: &'a Option<T>, flag: &str) -> Result<&'a T> {
    v.as_ref().ok_or_else(|| Error::invalid(format!("this command needs --{flag}")))
}

fn run_surface(cfg: &RunConfig) -> Result<(Value, Vec<Assertion>)> {
    let s = parse_surface(require(&cfg.surface, "surface")?)?;
    if let Some(p) = &cfg.series {
        io::write_surface_csv(p, &s)?;
    }
    let t = s.totals();
    let outputs = json!({
        "nodes": s.len(), "band_limit": s.band_limit(), "totals": t,
        "w_volume": s.w_volume(), "hconvexity_margin": s.hconvexity_margin(),
        "min_radius": s.min_radius(), "max_radius": s.max_radius(),
    });
    Ok((outputs, vec![Assertion::near_zero("Gauss–Bonnet χ − 2", t.euler - 2.0, 1e-8)]))
}

fn run_flow(cfg: &RunConfig) -> Result<(Value, Vec<Assertion>)> {
    let spec = require(&cfg.surface, "surface")?;
    let s = parse_surface(spec)?;
    let r_grid = cfg.r_grid.clone().unwrap_or_else(|| (0..=6).map(f64::from).collect());
    let r_max = cfg.r_max.unwrap_or(8.0);
    let (_, spread) = w_invariance_report(&s, &r_grid)?;
    let states = r_grid.iter().map(|&r| flow(&s, r)).collect::<Result<Vec<_>>>()?;
    let record = io::FoliationRecord::from_states(spec.clone(), &states);
    if let Some(p) = &cfg.series {
        io::append_foliation_record(p, &record)?;
    }
    let hd = h_defect_limit(&s, r_max)?;
    let bm = boundary_metric_area(&s)?;
    let vr = vr_limit(&s)?;
    let outputs = json!({
        "record": record, "w_spread": spread, "h_defect": hd, "boundary_metric_area": bm, "vr": vr,
    });
    let checks = vec![
        Assertion::at_most("spread of W + 2πr over r_grid", spread, 1e-6),
        Assertion::near_zero("lim ∫(H_r − 1)dA_r − πχ", hd.limit - PI * CHI, 1e-5),
        Assertion::at_most("|lim e^{−2r}area_r − β|", bm.deviation, 1e-6),
    ];
    Ok((outputs, checks))
}

fn run_minkowski(cfg: &RunConfig) -> Result<(Value, Vec<Assertion>)> {
    let s = parse_surface(require(&cfg.surface, "surface")?)?;
    let m = minkowski_report(&s)?;
    let mut checks = vec![
        Assertion::nonnegative("slack_log", m.slack_log, 1e-8),
        Assertion::nonnegative("slack_combined", m.slack_combined, 1e-8),
    ];
    if is_round(&s) {
        checks.push(Assertion::near_zero("slack_log on a geodesic sphere", m.slack_log, 1e-8));
    }
    Ok((json!({ "minkowski": m, "hconvexity_margin": s.hconvexity_margin() }), checks))
}

fn run_ricci(cfg: &RunConfig) -> Result<(Value, Vec<Assertion>)> {
    let omega = parse_omega(require(&cfg.omega, "omega")?, cfg.seed.unwrap_or(0))?;
    let defaults = RicciOptions::default();
    let opts = RicciOptions {
        dt: cfg.dt.unwrap_or(defaults.dt),
        t_max: cfg.t_max.unwrap_or(defaults.t_max),
        tol: cfg.tol.unwrap_or(defaults.tol),
        band_limit: cfg.band_limit.unwrap_or(defaults.band_limit),
        ..defaults
    };
    let tr = ricci_flow(&omega, &opts)?;
    if let Some(p) = &cfg.series {
        io::write_atomic(p, &io::flow_trace_csv(&tr)?)?;
    }
    let last = tr.last();
    let outputs = json!({
        "band_limit": tr.band_limit, "converged": tr.converged, "steps": tr.records.len() - 1,
        "rejected_steps": tr.rejected_steps, "t_final": last.t, "w_rel_final": last.w_rel,
        "max_curv_dev_final": last.max_curv_dev, "worst_w_decrease": tr.worst_w_decrease(),
        "max_area_drift": tr.max_area_drift(), "min_dw_dt": tr.min_dw_dt(),
    });
    let checks = vec![
        Assertion::below("final max|K − K̄|", last.max_curv_dev, opts.tol),
        Assertion::nonnegative("worst per-step change of W_rel", tr.worst_w_decrease(), 1e-9),
        Assertion::below("area drift", tr.max_area_drift(), 1e-8),
    ];
    Ok((outputs, checks))
}

fn run_polyakov(cfg: &RunConfig) -> Result<(Value, Vec<Assertion>)> {
    let spec = require(&cfg.omega, "omega")?;
    let omega = parse_omega(spec, cfg.seed.unwrap_or(0))?;
    let diff = polyakov_diff(&omega);
    let path = polyakov_path_integral(&omega, cfg.nodes.unwrap_or(16));
    let mut checks = vec![Assertion::near_zero("polyakov_diff − path integral", diff - path, 1e-6)];
    let gap = corollary_gap(&omega).ok();
    if let Some(g) = gap {
        checks.push(Assertion::nonnegative("corollary gap", g.gap, 1e-12));
        checks.push(Assertion::at_most("∫ω dvol₀ under the area constraint", g.mean_integral, 1e-9));
        if spec.starts_with("mobius:") {
            checks.push(Assertion::near_zero("corollary gap of a Möbius factor", g.gap, 1e-6));
        }
    }
    if let Some(c) = spec.strip_prefix("constant:").and_then(|c| c.trim().parse::<f64>().ok()) {
        checks.push(Assertion::near_zero("polyakov_diff + 2πc", diff + 2.0 * PI * c, 1e-9));
    }
    let outputs = json!({
        "polyakov_diff": diff, "path_integral": path, "dirichlet_energy": omega.dirichlet_energy(),
        "mean_integral": omega.mean_integral(), "area": omega.area(), "corollary": gap,
    });
    Ok((outputs, checks))
}

fn run_envelope(cfg: &RunConfig) -> Result<(Value, Vec<Assertion>)> {
    let omega = parse_omega(cfg.omega.as_deref().unwrap_or("zero"), cfg.seed.unwrap_or(0))?;
    let offset = cfg.offset.unwrap_or(1.0);
    let top = omega.values().iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let constant = top - omega.min_value() <= 1e-14;
    let value = omega.eval(0.0, 0.0);
    let problem = EnvelopeProblem::new(omega, offset)?;
    let surface = envelope(&problem)?;
    if let Some(p) = &cfg.series {
        io::write_surface_csv(p, &surface)?;
    }
    let d = duality_report(&problem)?;
    let mut checks = vec![Assertion::at_most("duality discrepancy", d.discrepancy, 1e-4)];
    if constant {
        let dev = surface.radius().iter().map(|r| (r - (offset + value)).abs()).fold(0.0, f64::max);
        checks.push(Assertion::at_most("distance from the radius-(t + c) sphere", dev, 1e-8));
    }
    let outputs = json!({
        "duality": d, "min_radius": surface.min_radius(), "max_radius": surface.max_radius(),
        "hconvexity_margin": surface.hconvexity_margin(), "w_volume": surface.w_volume(),
    });
    Ok((outputs, checks))
}

fn profile_from(cfg: &RunConfig) -> Result<(IsoProfile, Option<f64>)> {
    let lo = cfg.vmin.unwrap_or(10.0);
    let hi = cfg.vmax.unwrap_or(1e4);
    if !(hi > lo) {
        return Err(Error::invalid("--vmax must exceed --vmin"));
    }
    parse_profile(require(&cfg.profile, "profile")?, &geometric_grid(lo, hi, cfg.samples.unwrap_or(400)))
}

fn run_profile(cfg: &RunConfig) -> Result<(Value, Vec<Assertion>)> {
    let (p, _) = profile_from(cfg)?;
    if let Some(path) = &cfg.series {
        io::write_profile_csv(path, &p)?;
    }
    let f = foliation_profile_checks(&p)?;
    let outputs = json!({ "samples": p.len(), "chi_boundary": p.chi_boundary(), "checks": f });
    let checks = vec![
        Assertion::near_zero("lim I/V − 2", f.ratio_limit - 2.0, 1e-4),
        Assertion::at_most(
            "samples beyond V* violating I′ > I/V",
            f.v_star.map_or(p.len() as f64, |_| 0.0),
            0.0,
        ),
    ];
    Ok((outputs, checks))
}

fn run_hawking(cfg: &RunConfig) -> Result<(Value, Vec<Assertion>)> {
    let (p, _) = profile_from(cfg)?;
    let t = hawking_mass(&p);
    if let Some(path) = &cfg.series {
        io::write_atomic(path, &io::hawking_csv(&t)?)?;
    }
    let worst = t.m_h.windows(2).map(|w| w[1] - w[0]).fold(0.0, f64::min);
    let max = t.m_h.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let outputs = json!({
        "max_m_h": max, "min_m_h": t.m_h.iter().copied().fold(f64::INFINITY, f64::min),
        "worst_decrease": worst, "monotone_ok": t.monotone_ok, "sign_ok": t.sign_ok,
    });
    let checks = vec![
        Assertion::nonnegative("worst per-sample change of m_H", worst, 1e-6),
        Assertion::at_most("max m_H", max, 1e-8),
    ];
    Ok((outputs, checks))
}

fn run_vr(cfg: &RunConfig) -> Result<(Value, Vec<Assertion>)> {
    let (p, known) = profile_from(cfg)?;
    let r = vr_from_profile(&p)?;
    let mut checks = vec![Assertion::at_most("tail spread", r.tail_spread, 1e-4)];
    if let Some(e) = cfg.expect.or(known) {
        checks.push(Assertion::near_zero("v_r − expected", r.v_r - e, 1e-4));
    }
    Ok((json!({ "vr": r, "expected": cfg.expect.or(known) }), checks))
}

fn run_tube(cfg: &RunConfig) -> Result<(Value, Vec<Assertion>)> {
    let lambda = cfg.lambda.unwrap_or(PI);
    let bc = cfg.bc.unwrap_or(BoundaryCondition::Neumann);
    let spec = TubeSpec::new(cfg.a.unwrap_or(1.0), lambda, bc)?;
    let grid_n = cfg.grid_n.unwrap_or(2048);
    let exact = jacobi_eigenvalues(&spec, 10, 10)?;
    let exact = &exact[..10];
    let fd = jacobi_eigenvalues_fd(&spec, grid_n, 10)?;
    let fdx = jacobi_eigenvalues_fd_extrapolated(&spec, grid_n, 10)?;
    let err = |v: &[f64]| v.iter().zip(exact).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);
    let th = stability_threshold(lambda, bc)?;
    if let Some(p) = &cfg.series {
        io::write_atomic(p, &io::threshold_csv(&[th])?)?;
    }
    let at_threshold = TubeSpec::new(th.a_max, lambda, bc)?.mode_eigenvalue(1, 0);
    let outputs = json!({
        "eigenvalues": exact, "fd_eigenvalues": fd, "fd_extrapolated": fdx,
        "fd_error": err(&fd), "fd_extrapolated_error": err(&fdx),
        "first_eigenvalue": first_eigenvalue(&spec), "second_eigenvalue": second_eigenvalue(&spec),
        "stable": second_eigenvalue(&spec) >= 0.0, "threshold": th,
    });
    let checks = vec![
        Assertion::near_zero("mode (1,0) eigenvalue at a_max", at_threshold, 1e-12),
        Assertion::at_most("extrapolated FD spectrum error", err(&fdx), 1e-6),
        Assertion::below("constant-mode eigenvalue", first_eigenvalue(&spec), 0.0),
    ];
    Ok((outputs, checks))
}

/// Runs a resolved configuration and returns its report.
pub fn run(cfg: &RunConfig) -> Result<Report> {
    cfg.validate()?;
    let command = cfg.command.ok_or_else(|| Error::invalid("no command given"))?;
    let (outputs, assertions) = match command {
        Command::Ball => run_ball(cfg),
        Command::Surface => run_surface(cfg),
        Command::Flow => run_flow(cfg),
        Command::Minkowski => run_minkowski(cfg),
        Command::RicciFlow => run_ricci(cfg),
        Command::Polyakov => run_polyakov(cfg),
        Command::Envelope => run_envelope(cfg),
        Command::Profile => run_profile(cfg),
        Command::Hawking => run_hawking(cfg),
        Command::Vr => run_vr(cfg),
        Command::Tube => run_tube(cfg),
    }?;
    Ok(Report { command: command.name().into(), inputs: serde_json::to_value(cfg)?, outputs, assertions })
}

pub fn exit_code(err: &Error) -> i32 {
    match err {
        Error::NonConvergence(_) | Error::UnderResolved { .. } => EXIT_NONCONVERGENCE,
        _ => EXIT_CONFIG,
    }
}

fn configure_threads() -> Result<()> {
    let Ok(v) = std::env::var("RENVOL_THREADS") else {
        return Ok(());
    };
    let n: usize = v
        .trim()
        .parse()
        .ok()
        .filter(|n| *n > 0)
        .ok_or_else(|| Error::invalid(format!("RENVOL_THREADS must be a positive integer, got {v:?}")))?;
    // A pool that already exists (e.g. in tests) keeps its size.
    let _ = rayon::ThreadPoolBuilder::new().num_threads(n).build_global();
    Ok(())
}

fn execute(cfg: RunConfig) -> Result<i32> {
    configure_threads()?;
    let cfg = cfg.resolve()?;
    let start = Instant::now();
    let report = run(&cfg)?;
    let text = report.to_json()?;
    match &cfg.output {
        Some(p) => io::write_atomic(p, text.as_bytes())?,
        None => print!("{text}"),
    }
    eprintln!("renvol {}: {} assertions, {:.3} s", report.command, report.assertions.len(), start.elapsed().as_secs_f64());
    for a in report.assertions.iter().filter(|a| !a.pass) {
        eprintln!("  FAIL {}: {:.6e} ({} with tolerance {:.1e})", a.name, a.value, a.relation, a.tolerance);
    }
    Ok(if report.passed() { 0 } else { EXIT_ASSERTION })
}

/// Entry point of the binary: parses `args` and returns the exit status.
pub fn main_with_args<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cfg = match RunConfig::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { EXIT_CONFIG } else { 0 };
        }
    };
    match execute(cfg) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("renvol: {e}");
            exit_code(&e)
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn parse(args: &[&str]) -> RunConfig {
        RunConfig::try_parse_from(std::iter::once("renvol").chain(args.iter().copied())).unwrap()
    }

    #[test]
    fn flags_override_file() {
        let file: RunConfig = serde_json::from_str(r#"{"command":"ball","r":2.0,"seed":5}"#).unwrap();
        let cli = parse(&["--r", "0.5"]);
        let m = cli.over(&file);
        assert_eq!(m.command, Some(Command::Ball));
        assert_eq!(m.r, Some(0.5));
        assert_eq!(m.seed, Some(5));
    }

    #[test]
    fn unknown_config_keys_are_rejected() {
        assert!(serde_json::from_str::<RunConfig>(r#"{"radius":1}"#).is_err());
    }

    #[test]
    fn ball_report_passes() {
        let rep = run(&parse(&["ball", "--r", "1"])).unwrap();
        assert!(rep.passed());
        assert!((rep.outputs["w_volume"].as_f64().unwrap() + 2.0 * PI).abs() < 1e-12);
    }

    #[test]
    fn bad_values_are_config_errors() {
        let e = run(&parse(&["ball", "--r", "-1"])).unwrap_err();
        assert_eq!(exit_code(&e), EXIT_CONFIG);
        assert!(run(&parse(&["minkowski"])).is_err());
        assert!(parse_surface("cos:1,0.1,2.5").is_err());
        assert!(parse_omega("random:0,0.1", 0).is_err());
        assert!(parse_profile("fuchsian:genus=1", &[1.0, 2.0, 3.0]).is_err());
    }

    #[test]
    fn specs_parse() {
        let s = parse_surface("cos:1.2,0.05,2").unwrap();
        assert_eq!(s.band_limit(), 2);
        assert!(is_round(&parse_surface("sphere:0.7").unwrap()));
        assert_eq!(parse_omega("zonal:0,0,0.1", 0).unwrap().lmax(), 2);
        let (p, known) = parse_profile("fuchsian:genus=3,shift=-0.2", &[1.0, 2.0, 4.0]).unwrap();
        assert_eq!(p.chi_boundary(), -8);
        assert_eq!(known, Some(0.1));
    }
}
