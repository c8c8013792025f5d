//! Dynamics of the risk-neutral ADO-Heston system:
//!
//! ```text
//! dF = √v F dW₁
//! dv = ζ t^{H-1} 1{t>ε} dt + ξ√v ν(t) dW₂
//! d𝒱 = β/ξ dt + ν(t) dW₂
//! ```
//!
//! with h = ξ𝒱 - 2√v + κ(T-t). The Monte Carlo drift β = κ + (ζt^{H-1}1{t>ε} -
//! ξ²ν²/4)/√v makes dh = 0 exactly; [`drift_ode_path`] integrates the
//! deterministic skeleton with the alternative β = κ - ξ/(4√v)·[ξν² + 4ζt^{H-1}1{t>ε}].

use std::io::Write;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::charfn::ModelParams;
use crate::error::{Error, Result};
use crate::par::{self, Execution};

/// How ζ depends on the conserved quantity h.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
#[serde(tag = "mode", rename_all = "lowercase")]
pub enum ZetaMode {
    /// ζ fixed at `ModelParams::zeta`.
    #[default]
    Constant,
    /// ζ(h) = α·h.
    Linear { alpha: f64 },
}

impl ZetaMode {
    fn eval(self, mp: &ModelParams, h: f64) -> f64 {
        match self {
            ZetaMode::Constant => mp.zeta,
            ZetaMode::Linear { alpha } => alpha * h,
        }
    }
}

/// Sampled solution of the deterministic drift ODE.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DriftPath {
    pub t: Vec<f64>,
    pub v: Vec<f64>,
    pub vv: Vec<f64>,
}

impl DriftPath {
    /// Index of an interior maximum of v, if there is one.
    pub fn interior_v_max(&self) -> Option<usize> {
        interior_extremum(&self.v, |a, b| a > b)
    }

    /// Index of an interior minimum of 𝒱, if there is one.
    pub fn interior_vv_min(&self) -> Option<usize> {
        interior_extremum(&self.vv, |a, b| a < b)
    }
}

fn interior_extremum(xs: &[f64], better: impl Fn(f64, f64) -> bool) -> Option<usize> {
    let mut best = 0;
    for (i, &x) in xs.iter().enumerate() {
        if better(x, xs[best]) {
            best = i;
        }
    }
    (best > 0 && best + 1 < xs.len() && better(xs[best], xs[0]) && better(xs[best], xs[xs.len() - 1]))
        .then_some(best)
}

/// `n + 1` equally spaced times from `t0` to `t1`.
pub fn uniform_grid(t0: f64, t1: f64, n: usize) -> Result<Vec<f64>> {
    if !(t1 > t0) || n == 0 || !t0.is_finite() || !t1.is_finite() {
        return Err(Error::invalid("uniform grid needs t0 < t1 and n >= 1"));
    }
    let dt = (t1 - t0) / n as f64;
    let mut g: Vec<f64> = (0..=n).map(|i| t0 + dt * i as f64).collect();
    g[n] = t1;
    Ok(g)
}

const DRIFT_GUARD: f64 = 1e9;

/// RK4 integration of the deterministic (v, 𝒱) system with ζ(h) = α·h on
/// `t_grid`, the last grid time playing the role of T in h. Starts from
/// (v₀, 𝒱₀) at the first grid time, which must be positive.
pub fn drift_ode_path(mp: &ModelParams, alpha: f64, t_grid: &[f64]) -> Result<DriftPath> {
    mp.validate()?;
    if t_grid.len() < 2 {
        return Err(Error::invalid("drift path grid needs at least 2 points"));
    }
    if !(t_grid[0] > 0.0) {
        return Err(Error::domain("drift path grid must start at t0 > 0"));
    }
    if t_grid.windows(2).any(|w| !(w[1] > w[0])) {
        return Err(Error::invalid("drift path grid must be strictly increasing"));
    }
    if !(mp.xi > 0.0) {
        return Err(Error::domain("drift path requires xi > 0"));
    }
    if !(mp.v0 > 0.0) {
        return Err(Error::domain("drift path requires v0 > 0"));
    }
    let maturity = t_grid[t_grid.len() - 1];
    let hp = &mp.hurst;
    let (kappa, xi, eps) = (mp.kappa, mp.xi, mp.eps);
    let rhs = |t: f64, v: f64, vv: f64| -> (f64, f64) {
        let sv = v.max(0.0).sqrt();
        let h = xi * vv - 2.0 * sv + kappa * (maturity - t);
        let force = if t > eps {
            alpha * h * t.powf(hp.h - 1.0)
        } else {
            0.0
        };
        let beta = kappa - xi / (4.0 * sv) * (xi * hp.nu_sq_unchecked(t) + 4.0 * force);
        (force, beta / xi)
    };

    let mut out = DriftPath {
        t: t_grid.to_vec(),
        v: Vec::with_capacity(t_grid.len()),
        vv: Vec::with_capacity(t_grid.len()),
    };
    let (mut v, mut vv) = (mp.v0, mp.vv0);
    out.v.push(v);
    out.vv.push(vv);
    for w in t_grid.windows(2) {
        let (t, dt) = (w[0], w[1] - w[0]);
        let k1 = rhs(t, v, vv);
        let k2 = rhs(t + 0.5 * dt, v + 0.5 * dt * k1.0, vv + 0.5 * dt * k1.1);
        let k3 = rhs(t + 0.5 * dt, v + 0.5 * dt * k2.0, vv + 0.5 * dt * k2.1);
        let k4 = rhs(t + dt, v + dt * k3.0, vv + dt * k3.1);
        v += dt / 6.0 * (k1.0 + 2.0 * k2.0 + 2.0 * k3.0 + k4.0);
        vv += dt / 6.0 * (k1.1 + 2.0 * k2.1 + 2.0 * k3.1 + k4.1);
        if !(v > 0.0) {
            return Err(Error::BlowUp {
                t: w[1],
                reason: format!("variance left (0, inf): v = {v}"),
            });
        }
        if !(vv.abs() <= DRIFT_GUARD) {
            return Err(Error::BlowUp {
                t: w[1],
                reason: format!("|V| exceeded {DRIFT_GUARD:e}"),
            });
        }
        out.v.push(v);
        out.vv.push(vv);
    }
    Ok(out)
}

/// Monte Carlo settings.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SimConfig {
    pub n_paths: usize,
    pub n_steps: usize,
    pub maturity: f64,
    pub seed: u64,
    /// Indicator cutoff; `None` uses the first positive grid time.
    pub eps: Option<f64>,
    pub zeta_mode: ZetaMode,
    /// Store every `record_stride`-th grid time (the final time is always
    /// stored). Use `n_steps` to keep only the endpoints.
    pub record_stride: usize,
    /// With `false` the Brownian drivers are switched off.
    pub noise: bool,
    #[serde(skip)]
    pub execution: Execution,
}

impl Default for SimConfig {
    fn default() -> Self {
        Self {
            n_paths: 1000,
            n_steps: 256,
            maturity: 1.0,
            seed: 0,
            eps: None,
            zeta_mode: ZetaMode::Constant,
            record_stride: 1,
            noise: true,
            execution: Execution::default(),
        }
    }
}

impl SimConfig {
    pub fn validate(&self) -> Result<()> {
        if self.n_paths == 0 {
            return Err(Error::invalid("n_paths must be at least 1"));
        }
        if self.n_steps < 8 {
            return Err(Error::invalid(format!(
                "n_steps must be at least 8, got {}",
                self.n_steps
            )));
        }
        if !(self.maturity > 0.0) || !self.maturity.is_finite() {
            return Err(Error::invalid(format!(
                "maturity must be positive, got {}",
                self.maturity
            )));
        }
        if self.record_stride == 0 {
            return Err(Error::invalid("record_stride must be at least 1"));
        }
        if let Some(e) = self.eps {
            if !(e >= 0.0) {
                return Err(Error::invalid(format!("eps must be nonnegative, got {e}")));
            }
        }
        Ok(())
    }

    pub fn dt(&self) -> f64 {
        self.maturity / self.n_steps as f64
    }

    fn eps(&self) -> f64 {
        self.eps.unwrap_or_else(|| self.dt())
    }

    fn recorded_steps(&self) -> Vec<usize> {
        let mut idx: Vec<usize> = (0..=self.n_steps).step_by(self.record_stride).collect();
        if idx.last() != Some(&self.n_steps) {
            idx.push(self.n_steps);
        }
        idx
    }
}

/// Simulated ensemble. Matrices are stored path-major: entry (p, j) sits at
/// `p * times.len() + j`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PathSet {
    pub times: Vec<f64>,
    pub n_paths: usize,
    pub f: Vec<f64>,
    pub v: Vec<f64>,
    pub vv: Vec<f64>,
    pub h: Vec<f64>,
    pub f0: f64,
    pub f_terminal: Vec<f64>,
    pub v_terminal: Vec<f64>,
    /// Per-path max |h_t - h_ε| over every grid time after ε.
    pub h_deviation: Vec<f64>,
    pub seed: u64,
    pub dt: f64,
    pub eps: f64,
}

impl PathSet {
    pub fn n_times(&self) -> usize {
        self.times.len()
    }

    fn row<'a>(&self, m: &'a [f64], p: usize) -> &'a [f64] {
        let n = self.n_times();
        &m[p * n..(p + 1) * n]
    }

    pub fn f_path(&self, p: usize) -> &[f64] {
        self.row(&self.f, p)
    }

    pub fn v_path(&self, p: usize) -> &[f64] {
        self.row(&self.v, p)
    }

    pub fn vv_path(&self, p: usize) -> &[f64] {
        self.row(&self.vv, p)
    }

    pub fn h_path(&self, p: usize) -> &[f64] {
        self.row(&self.h, p)
    }

    /// CSV with header `path,t,F,v,V,h`, one row per stored sample.
    pub fn write_csv<W: Write>(&self, mut w: W) -> std::io::Result<()> {
        writeln!(w, "path,t,F,v,V,h")?;
        for p in 0..self.n_paths {
            let (f, v, vv, h) = (self.f_path(p), self.v_path(p), self.vv_path(p), self.h_path(p));
            for (j, t) in self.times.iter().enumerate() {
                writeln!(
                    w,
                    "{p},{t:.16e},{:.16e},{:.16e},{:.16e},{:.16e}",
                    f[j], v[j], vv[j], h[j]
                )?;
            }
        }
        Ok(())
    }
}

struct PathOut {
    f: Vec<f64>,
    v: Vec<f64>,
    vv: Vec<f64>,
    h: Vec<f64>,
    f_t: f64,
    v_t: f64,
    h_dev: f64,
}

/// Floor on √v where it appears in a denominator.
const SQRT_V_FLOOR: f64 = 1e-8;

/// Per-step integrals shared by all paths: ∫ν² and ∫t^{H-1}1{t>ε}.
struct StepCoefs {
    nu_var: Vec<f64>,
    force: Vec<f64>,
}

impl StepCoefs {
    fn new(mp: &ModelParams, cfg: &SimConfig, grid: &[f64]) -> Self {
        let hp = &mp.hurst;
        let tol = 1e-12 * cfg.maturity;
        let eps = cfg.eps();
        let mut c = StepCoefs {
            nu_var: Vec::with_capacity(cfg.n_steps),
            force: Vec::with_capacity(cfg.n_steps),
        };
        for w in grid.windows(2) {
            let (t0, t1) = (w[0], w[1]);
            c.nu_var
                .push(if cfg.noise { hp.nu_sq_integral(t0, t1) } else { 0.0 });
            c.force.push(if t0 >= eps - tol {
                (t1.powf(hp.h) - t0.powf(hp.h)) / hp.h
            } else {
                0.0
            });
        }
        c
    }
}

fn simulate_path(
    mp: &ModelParams,
    cfg: &SimConfig,
    grid: &[f64],
    coefs: &StepCoefs,
    record: &[usize],
    path: usize,
) -> PathOut {
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    rng.set_stream(path as u64);
    let (kappa, xi, maturity) = (mp.kappa, mp.xi, cfg.maturity);
    let eps = cfg.eps();
    let tol = 1e-12 * maturity;
    let rho_perp = (1.0 - mp.rho * mp.rho).max(0.0).sqrt();

    // y = ξ𝒱 is evolved so that ξ = 0 stays finite
    let (mut log_f, mut v, mut y) = (mp.f0.ln(), mp.v0, xi * mp.vv0);
    let h_of = |v: f64, y: f64, t: f64| y - 2.0 * v.max(0.0).sqrt() + kappa * (maturity - t);
    let vv_of = |y: f64| if xi > 0.0 { y / xi } else { mp.vv0 };

    let n_rec = record.len();
    let mut out = PathOut {
        f: Vec::with_capacity(n_rec),
        v: Vec::with_capacity(n_rec),
        vv: Vec::with_capacity(n_rec),
        h: Vec::with_capacity(n_rec),
        f_t: 0.0,
        v_t: 0.0,
        h_dev: 0.0,
    };
    let mut next_rec = 0;
    let mut h_ref = None;
    let h0 = h_of(v, y, 0.0);
    let mut store = |i: usize, log_f: f64, v: f64, y: f64, out: &mut PathOut| {
        let h = h_of(v, y, grid[i]);
        if next_rec < n_rec && record[next_rec] == i {
            out.f.push(log_f.exp());
            out.v.push(v.max(0.0));
            out.vv.push(vv_of(y));
            out.h.push(h);
            next_rec += 1;
        }
        match h_ref {
            None if grid[i] >= eps - tol => h_ref = Some(h),
            Some(r) => out.h_dev = out.h_dev.max((h - r).abs()),
            None => {}
        }
    };
    store(0, log_f, v, y, &mut out);

    for i in 0..cfg.n_steps {
        let dt = grid[i + 1] - grid[i];
        let (z, z_perp): (f64, f64) = if cfg.noise {
            (rng.sample(StandardNormal), rng.sample(StandardNormal))
        } else {
            (0.0, 0.0)
        };
        let nu_var = coefs.nu_var[i];
        let force = if coefs.force[i] > 0.0 {
            let h = match cfg.zeta_mode {
                ZetaMode::Constant => h0,
                ZetaMode::Linear { .. } => h_of(v, y, grid[i]),
            };
            cfg.zeta_mode.eval(mp, h) * coefs.force[i]
        } else {
            0.0
        };
        let vp = v.max(0.0);
        let sv = vp.sqrt();
        let dw_nu = nu_var.sqrt() * z;
        let dv = force + xi * sv * dw_nu + 0.25 * xi * xi * nu_var * (z * z - 1.0);
        // The expansion of 2Δ√v behind the drift needs ξ²N ≪ v; near zero
        // use the pathwise increment instead.
        let dy = if xi * xi * nu_var < vp {
            kappa * dt + (force - 0.25 * xi * xi * nu_var) / sv.max(SQRT_V_FLOOR) + xi * dw_nu
        } else {
            kappa * dt + 2.0 * ((v + dv).max(0.0).sqrt() - sv)
        };
        let dw1 = dt.sqrt() * (mp.rho * z + rho_perp * z_perp);
        log_f += -0.5 * vp * dt + sv * dw1;
        v += dv;
        y += dy;
        store(i + 1, log_f, v, y, &mut out);
    }
    out.f_t = log_f.exp();
    out.v_t = v.max(0.0);
    out
}

/// Euler-type Monte Carlo of the risk-neutral system on a uniform grid:
/// log-Euler for F, Milstein for v with full truncation, and the
/// h-conserving drift for 𝒱. Path `p` draws from stream `p` of a ChaCha8
/// generator seeded with `cfg.seed`, so results do not depend on the number
/// of paths or threads.
pub fn simulate_q(mp: &ModelParams, cfg: &SimConfig) -> Result<PathSet> {
    mp.validate()?;
    cfg.validate()?;
    if let ZetaMode::Linear { alpha } = cfg.zeta_mode {
        if !alpha.is_finite() {
            return Err(Error::invalid("alpha must be finite"));
        }
    }
    if mp.xi == 0.0 && (mp.zeta != 0.0 || matches!(cfg.zeta_mode, ZetaMode::Linear { alpha } if alpha != 0.0))
    {
        return Err(Error::domain(
            "the market price of risk is undefined for xi = 0 with nonzero zeta",
        ));
    }
    let grid = uniform_grid(0.0, cfg.maturity, cfg.n_steps)?;
    let record = cfg.recorded_steps();
    let coefs = StepCoefs::new(mp, cfg, &grid);
    let paths = par::map_indexed(cfg.execution, cfg.n_paths, |p| {
        simulate_path(mp, cfg, &grid, &coefs, &record, p)
    });

    let n_rec = record.len();
    let cap = n_rec * cfg.n_paths;
    let mut ps = PathSet {
        times: record.iter().map(|&i| grid[i]).collect(),
        n_paths: cfg.n_paths,
        f: Vec::with_capacity(cap),
        v: Vec::with_capacity(cap),
        vv: Vec::with_capacity(cap),
        h: Vec::with_capacity(cap),
        f0: mp.f0,
        f_terminal: Vec::with_capacity(cfg.n_paths),
        v_terminal: Vec::with_capacity(cfg.n_paths),
        h_deviation: Vec::with_capacity(cfg.n_paths),
        seed: cfg.seed,
        dt: cfg.dt(),
        eps: cfg.eps(),
    };
    for p in paths {
        ps.f.extend(p.f);
        ps.v.extend(p.v);
        ps.vv.extend(p.vv);
        ps.h.extend(p.h);
        ps.f_terminal.push(p.f_t);
        ps.v_terminal.push(p.v_t);
        ps.h_deviation.push(p.h_dev);
    }
    if ps.f_terminal.iter().any(|f| !f.is_finite()) {
        return Err(Error::Numerical("non-finite forward price in simulation".into()));
    }
    Ok(ps)
}

/// max over paths and grid times after ε of |h_t - h_ε|.
pub fn check_h_invariant(ps: &PathSet) -> f64 {
    ps.h_deviation.iter().copied().fold(0.0, f64::max)
}

/// Sample mean and standard error of F_T/F₀.
pub fn mc_martingale_stat(ps: &PathSet) -> (f64, f64) {
    let n = ps.f_terminal.len();
    if n == 0 {
        return (f64::NAN, f64::NAN);
    }
    let ratios = ps.f_terminal.iter().map(|f| f / ps.f0);
    let mean = ratios.clone().sum::<f64>() / n as f64;
    if n == 1 {
        return (mean, 0.0);
    }
    let var = ratios.map(|r| (r - mean) * (r - mean)).sum::<f64>() / (n - 1) as f64;
    (mean, (var / n as f64).sqrt())
}
