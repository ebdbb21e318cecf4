use super::config::{Mode, RunConfig};
use super::verify::verify_suite;
use crate::block::{
    block_map_row, classify_regularizability, default_block, extrapolate_gamma_zero, gamma_limits, make_block,
    write_block_map, BlockSpec, TransitOptions,
};
use crate::blowup::{
    equilibria_and_eigenvalues, fit_slope, manifold_arc, numeric_spectrum, write_manifold_arc, McGeheeState,
};
use crate::dynamics::{hamiltonian, integrate_with, write_trajectory, IntegrateOptions, PhaseState, Termination};
use crate::error::{Error, Result};
use crate::geometry::SurfaceSpec;
use crate::invariants::{drift_along_flow, write_report};
use crate::report::{self, fmt_num};
use crate::trajectory::{compare_orbit, write_comparison};
use rayon::prelude::*;
use std::f64::consts::PI;
use std::fs::{self, File};
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};

/// What a run produced. `exit_code` is 0 on success and 2 when a numerical
/// check failed after the artifacts were written.
#[derive(Debug, Clone, PartialEq)]
pub struct RunOutcome {
    pub exit_code: i32,
    pub files: Vec<PathBuf>,
    /// Summary lines for standard output.
    pub lines: Vec<String>,
}

struct Out {
    dir: PathBuf,
    files: Vec<PathBuf>,
}

fn io_error(path: &Path, e: std::io::Error) -> Error {
    Error::validation("output.dir", format!("{}: {e}", path.display()))
}

impl Out {
    fn new(dir: &str) -> Result<Self> {
        let dir = PathBuf::from(dir);
        fs::create_dir_all(&dir).map_err(|e| io_error(&dir, e))?;
        Ok(Out { dir, files: Vec::new() })
    }

    fn create(&mut self, name: &str) -> Result<BufWriter<File>> {
        let path = self.dir.join(name);
        let f = File::create(&path).map_err(|e| io_error(&path, e))?;
        self.files.push(path);
        Ok(BufWriter::new(f))
    }

    fn text(&mut self, name: &str, lines: &[String]) -> Result<()> {
        let path = self.dir.join(name);
        let mut w = self.create(name)?;
        for l in lines {
            writeln!(w, "{l}").map_err(|e| io_error(&path, e))?;
        }
        w.flush().map_err(|e| io_error(&path, e))
    }
}

/// Validates `cfg`, runs the selected mode and writes its artifacts, plus
/// `effective_config.toml`, into the output directory.
pub fn run(cfg: &RunConfig) -> Result<RunOutcome> {
    let s = cfg.validate()?;
    let mode = cfg.mode()?;
    let mut out = Out::new(&cfg.output.dir)?;
    out.text("effective_config.toml", &[cfg.to_toml()?.trim_end().to_string()])?;
    let (exit_code, lines) = match mode {
        Mode::Simulate => simulate(&s, cfg, &mut out)?,
        Mode::Blowup => blowup(&s, cfg, &mut out)?,
        Mode::BlockMap => block_map(&s, cfg, &mut out)?,
        Mode::Classify => classify(&s, cfg, &mut out)?,
        Mode::Verify => verify(&s, cfg, &mut out)?,
        Mode::Sweep => sweep_mode(cfg, &mut out)?,
    };
    Ok(RunOutcome {
        exit_code,
        files: out.files,
        lines,
    })
}

fn kv(key: &str, value: f64) -> String {
    format!("{key}={}", fmt_num(value))
}

fn simulate(s: &SurfaceSpec, cfg: &RunConfig, out: &mut Out) -> Result<(i32, Vec<String>)> {
    let init = cfg.initial.as_ref().expect("validated");
    let x0 = PhaseState::new(init.r.value(), init.theta.value(), init.p_r.value(), init.p_theta.value());
    let ig = &cfg.integrator;
    let opts = IntegrateOptions {
        collision_margin: ig.collision_margin.as_ref().map(|m| m.value()),
        sample_dt: ig.sample_dt.as_ref().map(|d| d.value()),
        ..IntegrateOptions::new(ig.tol.value())
    };
    let traj = integrate_with(s, &x0, ig.t_end.value(), &opts)?;
    write_trajectory(s, &traj, out.create("trajectory.csv")?)?;

    // At most 200 evenly spaced samples for the bracket report.
    let stride = traj.samples.len().div_ceil(200).max(1);
    let states: Vec<PhaseState> = traj.samples.iter().step_by(stride).map(|p| p.state).collect();
    write_report(s, &states, out.create("invariants.csv")?)?;

    let mut lines = vec![
        format!(
            "termination={}",
            match &traj.termination {
                Termination::TimeLimit => "time-limit".to_string(),
                Termination::CollisionApproach => "collision-approach".to_string(),
                Termination::NumericalFailure(m) => format!("numerical-failure ({m})"),
            }
        ),
        format!("samples={}", traj.samples.len()),
        kv("t_final", traj.last().t),
    ];
    if traj.samples.len() >= 2 {
        let d = drift_along_flow(s, &traj)?;
        lines.extend([kv("drift_H", d.h), kv("drift_p_theta", d.p_theta), kv("drift_I1", d.i1), kv("drift_I2", d.i2)]);
    }
    if x0.p_theta != 0.0 {
        write_comparison(s, &traj, out.create("orbit.csv")?)?;
        lines.push(kv("orbit_deviation", compare_orbit(s, &traj)?));
    }
    let h = hamiltonian(s, &x0)?;
    let mut barrier = f64::NEG_INFINITY;
    for smp in &traj.samples {
        let th = s.profile(smp.state.r)?.theta;
        if th > 0.0 {
            barrier = barrier.max(s.gamma_c() * th - h);
        }
    }
    if barrier.is_finite() {
        lines.push(kv("south_barrier_max", barrier));
    }
    out.text("summary.txt", &lines)?;
    Ok((if traj.is_failure() { 2 } else { 0 }, lines))
}

fn blowup(s: &SurfaceSpec, cfg: &RunConfig, out: &mut Out) -> Result<(i32, Vec<String>)> {
    let b = &cfg.blowup;
    let expected = 0.5 * s.beta().abs();
    let mut lines = vec![kv("beta", s.beta()), kv("expected_slope", expected)];
    let mut worst: f64 = 0.0;
    for k in 0..b.arcs {
        let theta0 = 2.0 * PI * k as f64 / b.arcs as f64;
        let arc = manifold_arc(s, theta0, b.chi_offset.value(), b.tol.value())?;
        write_manifold_arc(&arc, out.create(&format!("manifold_arc_{k:03}.csv"))?)?;
        let th: Vec<f64> = arc.iter().map(|p| p.theta).collect();
        let ch: Vec<f64> = arc.iter().map(|p| p.chi).collect();
        let slope = fit_slope(&th, &ch).ok_or_else(|| Error::Numerical(format!("arc {k} too short")))?;
        worst = worst.max((slope - expected).abs());
        lines.push(format!("arc={k} {}", kv("slope", slope)));
    }
    lines.push(kv("max_slope_error", worst));
    let eq = equilibria_and_eigenvalues(s);
    for (name, c) in [("S+", eq.s_plus), ("S-", eq.s_minus)] {
        let num = numeric_spectrum(s, &McGeheeState::new(0.0, 0.0, c.v, 0.0), 1e-5)?;
        let fmt = |v: &[f64]| v.iter().map(|x| fmt_num(*x)).collect::<Vec<_>>().join(" ");
        lines.push(format!("{name} v={} analytic=[{}] numeric=[{}]", fmt_num(c.v), fmt(&c.eigenvalues), fmt(&num)));
    }
    out.text("summary.txt", &lines)?;
    Ok((if worst < 1e-8 { 0 } else { 2 }, lines))
}

fn block_for(s: &SurfaceSpec, cfg: &RunConfig, h: f64) -> Result<BlockSpec> {
    match &cfg.block.delta {
        Some(d) => make_block(s, h, d.value()),
        None => default_block(s, h),
    }
}

fn transit_opts(cfg: &RunConfig) -> TransitOptions {
    TransitOptions {
        tol: cfg.block.tol.value(),
        tau_cap: cfg.block.tau_cap.value(),
    }
}

/// `n` values of |u| per side spread over `[0.05, 0.95]·u_max`, ascending.
fn u_grid(u_max: f64, n: u32) -> Vec<f64> {
    let mags: Vec<f64> = (0..n)
        .map(|i| {
            let frac = if n == 1 { 0.5 } else { 0.05 + 0.9 * i as f64 / (n - 1) as f64 };
            u_max * frac
        })
        .collect();
    mags.iter().rev().map(|m| -m).chain(mags.iter().copied()).collect()
}

fn block_map(s: &SurfaceSpec, cfg: &RunConfig, out: &mut Out) -> Result<(i32, Vec<String>)> {
    let h = cfg.block.h.value();
    let bs = block_for(s, cfg, h)?;
    let opts = transit_opts(cfg);
    let theta = cfg.block.theta.value();
    let rows = u_grid(bs.u_max(s), cfg.block.n_u)
        .par_iter()
        .map(|&u| block_map_row(&bs, s, theta, u, &opts))
        .collect::<Result<Vec<_>>>()?;
    write_block_map(&rows, out.create("block_map.csv")?)?;
    let max_dev = rows.iter().map(|r| r.deviation()).fold(0.0, f64::max);
    let (plus, minus) = gamma_limits(s);
    let gp = extrapolate_gamma_zero(&bs, s, 1.0, &opts)?;
    let gm = extrapolate_gamma_zero(&bs, s, -1.0, &opts)?;
    let lines = vec![
        kv("beta", s.beta()),
        kv("h", bs.h),
        kv("delta", bs.delta),
        kv("r_delta", bs.r_delta),
        kv("k1", bs.k1),
        kv("k2", bs.k2),
        kv("convexity_margin", bs.convexity_margin),
        kv("max_deviation", max_dev),
        kv("gamma_zero_plus", gp),
        kv("gamma_zero_plus_expected", plus),
        kv("gamma_zero_minus", gm),
        kv("gamma_zero_minus_expected", minus),
    ];
    out.text("summary.txt", &lines)?;
    let ok = max_dev < 1e-6 && (gp - plus).abs() < 1e-3 && (gm - minus).abs() < 1e-3;
    Ok((if ok { 0 } else { 2 }, lines))
}

fn classify(s: &SurfaceSpec, cfg: &RunConfig, out: &mut Out) -> Result<(i32, Vec<String>)> {
    let betas: Vec<f64> = if cfg.classify.betas.is_empty() {
        vec![s.beta()]
    } else {
        cfg.classify.betas.iter().map(|b| b.value()).collect()
    };
    let mut lines = Vec::with_capacity(betas.len());
    for beta in betas {
        let sb = cfg.surface.with_beta(beta)?;
        lines.push(classify_regularizability(&sb, cfg.classify.m_max)?.to_string());
    }
    out.text("verdicts.txt", &lines)?;
    Ok((0, lines))
}

fn verify(s: &SurfaceSpec, cfg: &RunConfig, out: &mut Out) -> Result<(i32, Vec<String>)> {
    let (suites, states) = verify_suite(s, cfg)?;
    write_report(s, &states, out.create("invariants.csv")?)?;
    let mut lines: Vec<String> = suites.iter().map(|r| r.line()).collect();
    let failed = suites.iter().filter(|r| !r.passed).count();
    lines.push(format!("summary passed={} failed={failed}", suites.len() - failed));
    out.text("verify_report.txt", &lines)?;
    Ok((if failed == 0 { 0 } else { 2 }, lines))
}

pub const SWEEP_HEADER: [&str; 11] = [
    "index",
    "beta",
    "h",
    "delta",
    "north",
    "orbifold",
    "gamma_plus",
    "gamma_minus",
    "gamma_plus_error",
    "gamma_minus_error",
    "status",
];

/// One grid cell of a sweep. Numeric fields are NaN when the cell failed
/// before reaching them.
#[derive(Debug, Clone, PartialEq)]
pub struct SweepRow {
    pub index: usize,
    pub beta: f64,
    pub h: f64,
    pub delta: f64,
    pub north: Option<u32>,
    pub orbifold: Option<u32>,
    pub gamma_plus: f64,
    pub gamma_minus: f64,
    pub gamma_plus_error: f64,
    pub gamma_minus_error: f64,
    /// `None` when the cell succeeded.
    pub failure: Option<String>,
}

impl SweepRow {
    fn record(&self) -> Vec<String> {
        let opt = |x: Option<u32>| x.map_or_else(|| "none".to_string(), |m| m.to_string());
        vec![
            self.index.to_string(),
            fmt_num(self.beta),
            fmt_num(self.h),
            fmt_num(self.delta),
            opt(self.north),
            opt(self.orbifold),
            fmt_num(self.gamma_plus),
            fmt_num(self.gamma_minus),
            fmt_num(self.gamma_plus_error),
            fmt_num(self.gamma_minus_error),
            self.failure.clone().map_or_else(|| "ok".to_string(), |m| format!("failed: {m}")),
        ]
    }
}

fn sweep_cell(cfg: &RunConfig, index: usize, beta: f64, h: f64) -> SweepRow {
    let mut row = SweepRow {
        index,
        beta,
        h,
        delta: f64::NAN,
        north: None,
        orbifold: None,
        gamma_plus: f64::NAN,
        gamma_minus: f64::NAN,
        gamma_plus_error: f64::NAN,
        gamma_minus_error: f64::NAN,
        failure: None,
    };
    let result = (|| -> Result<()> {
        let s = cfg.surface.with_beta(beta)?;
        let verdict = classify_regularizability(&s, cfg.classify.m_max)?;
        row.north = verdict.north;
        row.orbifold = verdict.orbifold_n;
        let bs = block_for(&s, cfg, h)?;
        row.delta = bs.delta;
        let opts = transit_opts(cfg);
        let (plus, minus) = gamma_limits(&s);
        row.gamma_plus = extrapolate_gamma_zero(&bs, &s, 1.0, &opts)?;
        row.gamma_minus = extrapolate_gamma_zero(&bs, &s, -1.0, &opts)?;
        row.gamma_plus_error = (row.gamma_plus - plus).abs();
        row.gamma_minus_error = (row.gamma_minus - minus).abs();
        if row.gamma_plus_error >= 1e-3 || row.gamma_minus_error >= 1e-3 {
            return Err(Error::Numerical("extrapolated limit off by more than 1e-3".into()));
        }
        Ok(())
    })();
    if let Err(e) = result {
        row.failure = Some(e.to_string());
    }
    row
}

/// Evaluates every `(β, h)` cell in parallel; rows come back in grid order
/// (β-major).
pub fn sweep(cfg: &RunConfig) -> Result<Vec<SweepRow>> {
    let sw = &cfg.sweep;
    if sw.betas.is_empty() || sw.energies.is_empty() {
        return Err(Error::validation("sweep", "grid is empty"));
    }
    let cells: Vec<(usize, f64, f64)> = sw
        .betas
        .iter()
        .flat_map(|b| sw.energies.iter().map(move |h| (b.value(), h.value())))
        .enumerate()
        .map(|(i, (b, h))| (i, b, h))
        .collect();
    Ok(cells.par_iter().map(|&(i, b, h)| sweep_cell(cfg, i, b, h)).collect())
}

fn sweep_mode(cfg: &RunConfig, out: &mut Out) -> Result<(i32, Vec<String>)> {
    let rows = sweep(cfg)?;
    let mut w = report::csv_writer(out.create("sweep.csv")?, &SWEEP_HEADER)?;
    for r in &rows {
        w.write_record(r.record()).map_err(report::io_err)?;
    }
    report::finish(w)?;
    let failed = rows.iter().filter(|r| r.failure.is_some()).count();
    let lines = vec![format!("rows={} failed={failed}", rows.len())];
    out.text("summary.txt", &lines)?;
    Ok((if failed == 0 { 0 } else { 2 }, lines))
}
