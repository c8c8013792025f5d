use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::io::Write;
use std::path::Path;

use adoheston::fit::{fit_a_of_h, fit_power_law, fit_shared_exponent};
use adoheston::par::{self, Execution};
use adoheston::pricing::{self, FftGrid, FwdStartSpec};
use adoheston::sim::{self, SimConfig, ZetaMode};
use adoheston::skew::{self, log_grid};
use adoheston::SkewCurve;

use crate::config::{ExpRow, FitReport, FitRow, PricingModel, RunConfig};
use crate::{Cli, CliError, Command, GridArgs, ModelArgs, QuadArgs};

type Res<T> = Result<T, CliError>;

/// 17 significant digits.
fn num(x: f64) -> String {
    format!("{x:.16e}")
}

fn emit(out: Option<&Path>, text: &str) -> Res<()> {
    match out {
        Some(p) => {
            std::fs::write(p, text).map_err(|e| CliError::Input(format!("cannot write {}: {e}", p.display())))
        }
        None => {
            let mut lock = std::io::stdout().lock();
            lock.write_all(text.as_bytes())?;
            lock.flush()?;
            Ok(())
        }
    }
}

fn apply_model(cfg: &mut RunConfig, a: ModelArgs) {
    let m = &mut cfg.model;
    macro_rules! set {
        ($($f:ident),*) => { $( if a.$f.is_some() { m.$f = a.$f; } )* };
    }
    set!(
        hurst,
        kappa,
        xi,
        rho,
        zeta,
        implied_vol,
        eps,
        v0,
        vv0,
        f0,
        r,
        delta,
        skew_variance
    );
}

fn apply_grid(cfg: &mut RunConfig, g: GridArgs) {
    if g.t_min.is_some() {
        cfg.grid.t_min = g.t_min;
    }
    if g.t_max.is_some() {
        cfg.grid.t_max = g.t_max;
    }
    if g.n_t.is_some() {
        cfg.grid.n = g.n_t;
    }
}

fn apply_quad(cfg: &mut RunConfig, q: QuadArgs) {
    if q.u_max.is_some() {
        cfg.quadrature.u_max = q.u_max;
    }
    if q.rel_tol.is_some() {
        cfg.quadrature.rel_tol = q.rel_tol;
    }
    if q.max_subdivisions.is_some() {
        cfg.quadrature.max_subdivisions = q.max_subdivisions;
    }
}

fn maturity_grid(cfg: &RunConfig) -> Res<Vec<f64>> {
    let g = &cfg.grid;
    Ok(log_grid(
        g.t_min.unwrap_or(0.001),
        g.t_max.unwrap_or(0.3),
        g.n.unwrap_or(50),
    )?)
}

/// The Hurst exponent of single-H commands: 0.1 unless configured.
fn single_hurst(cfg: &RunConfig) -> Res<f64> {
    match cfg.model.hurst.as_deref() {
        None => Ok(0.1),
        Some([h]) => Ok(*h),
        Some(hs) => Err(CliError::Input(format!(
            "this command takes a single Hurst exponent, got {}",
            hs.len()
        ))),
    }
}

pub fn run(cli: Cli) -> Res<()> {
    if let Some(n) = cli.threads {
        if n == 0 {
            return Err(CliError::Input("--threads must be at least 1".into()));
        }
        if !par::configure_threads(n) {
            eprintln!("warning: thread count not applied");
        }
    }
    let exec = if cli.sequential {
        Execution::Sequential
    } else {
        Execution::Parallel
    };
    let mut cfg = RunConfig::load(cli.config.as_deref())?;
    if cli.seed.is_some() {
        cfg.seed = cli.seed;
    }
    let out = cli.out.as_deref();

    match cli.command {
        Command::SkewCurve { model, grid, quad } => {
            apply_model(&mut cfg, model);
            apply_grid(&mut cfg, grid);
            apply_quad(&mut cfg, quad);
            emit(out, &skew_curve_csv(&cfg, exec, true)?)
        }
        Command::SkewBound { model, grid } => {
            apply_model(&mut cfg, model);
            apply_grid(&mut cfg, grid);
            emit(out, &skew_curve_csv(&cfg, exec, false)?)
        }
        Command::Fit {
            input,
            model,
            grid,
            quad,
        } => {
            apply_model(&mut cfg, model);
            apply_grid(&mut cfg, grid);
            apply_quad(&mut cfg, quad);
            let curves = match input {
                Some(p) => read_curves(&p)?,
                None => compute_curves(&cfg, exec)?,
            };
            emit(out, &fit_json(&curves)?)
        }
        Command::FwdSkew {
            model,
            quad,
            s,
            tbar_min,
            tbar_max,
            n_tbar,
        } => {
            apply_model(&mut cfg, model);
            apply_quad(&mut cfg, quad);
            let f = &mut cfg.forward;
            f.s = s.or(f.s);
            f.tbar_min = tbar_min.or(f.tbar_min);
            f.tbar_max = tbar_max.or(f.tbar_max);
            f.n = n_tbar.or(f.n);
            emit(out, &fwd_skew_csv(&cfg, exec)?)
        }
        Command::DriftPath {
            model,
            alpha,
            t0,
            t_end,
            n_steps,
        } => {
            apply_model(&mut cfg, model);
            let d = &mut cfg.drift;
            d.alpha = alpha.or(d.alpha);
            d.t0 = t0.or(d.t0);
            d.t_end = t_end.or(d.t_end);
            d.n_steps = n_steps.or(d.n_steps);
            emit(out, &drift_csv(&cfg)?)
        }
        Command::Simulate {
            model,
            n_paths,
            n_steps,
            maturity,
            sim_eps,
            alpha,
            record_stride,
        } => {
            apply_model(&mut cfg, model);
            let sm = &mut cfg.sim;
            sm.n_paths = n_paths.or(sm.n_paths);
            sm.n_steps = n_steps.or(sm.n_steps);
            sm.maturity = maturity.or(sm.maturity);
            sm.eps = sim_eps.or(sm.eps);
            sm.alpha = alpha.or(sm.alpha);
            sm.record_stride = record_stride.or(sm.record_stride);
            simulate(&cfg, exec, out)
        }
        Command::PriceFwd {
            model,
            pricing_model,
            s,
            maturity,
            strikes,
            k_min,
            k_max,
            n_strikes,
            fft_n,
            eta,
            damping,
            n_paths,
            n_steps,
        } => {
            apply_model(&mut cfg, model);
            let p = &mut cfg.pricing;
            p.model = pricing_model.or(p.model);
            p.s = s.or(p.s);
            p.maturity = maturity.or(p.maturity);
            if strikes.is_some() {
                p.strikes = strikes;
            }
            p.k_min = k_min.or(p.k_min);
            p.k_max = k_max.or(p.k_max);
            p.n_strikes = n_strikes.or(p.n_strikes);
            p.fft_n = fft_n.or(p.fft_n);
            p.eta = eta.or(p.eta);
            p.alpha = damping.or(p.alpha);
            p.n_paths = n_paths.or(p.n_paths);
            p.n_steps = n_steps.or(p.n_steps);
            emit(out, &price_csv(&cfg, exec)?)
        }
    }
}

fn skew_curve_csv(cfg: &RunConfig, exec: Execution, with_skew: bool) -> Res<String> {
    let grid = maturity_grid(cfg)?;
    let mut text = String::from(if with_skew {
        "H,T,skew,upper_bound\n"
    } else {
        "H,T,upper_bound\n"
    });
    for h in cfg.hurst_values() {
        let mp = cfg.model_params(h)?;
        if with_skew {
            let q = cfg.quadrature()?;
            let curve = skew::skew_curve(&grid, &mp, &q, exec)?;
            let mut warned = false;
            for &(t, s) in &curve.points {
                let bound = match skew::atm_skew_upper_bound(t, &mp) {
                    Ok(b) => b,
                    Err(e) if !e.is_numerical() => {
                        if !warned {
                            eprintln!("warning: no upper bound at H = {h}: {e}");
                            warned = true;
                        }
                        f64::NAN
                    }
                    Err(e) => return Err(e.into()),
                };
                let _ = writeln!(text, "{},{},{},{}", num(h), num(t), num(s), num(bound));
            }
        } else {
            for &t in &grid {
                let b = skew::atm_skew_upper_bound(t, &mp)?;
                let _ = writeln!(text, "{},{},{}", num(h), num(t), num(b));
            }
        }
    }
    Ok(text)
}

fn compute_curves(cfg: &RunConfig, exec: Execution) -> Res<Vec<SkewCurve>> {
    let grid = maturity_grid(cfg)?;
    let q = cfg.quadrature()?;
    cfg.hurst_values()
        .into_iter()
        .map(|h| Ok(skew::skew_curve(&grid, &cfg.model_params(h)?, &q, exec)?))
        .collect()
}

/// Curves from a CSV with at least the columns `H`, `T` and `skew`.
fn read_curves(path: &Path) -> Res<Vec<SkewCurve>> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| CliError::Input(format!("cannot read {}: {e}", path.display())))?;
    let mut lines = text.lines().filter(|l| !l.trim().is_empty());
    let header: Vec<&str> = lines
        .next()
        .ok_or_else(|| CliError::Input(format!("{} is empty", path.display())))?
        .split(',')
        .map(str::trim)
        .collect();
    let col = |name: &str| {
        header
            .iter()
            .position(|c| *c == name)
            .ok_or_else(|| CliError::Input(format!("missing column {name} in {}", path.display())))
    };
    let (ih, it, is) = (col("H")?, col("T")?, col("skew")?);
    let mut groups: BTreeMap<u64, (f64, Vec<(f64, f64)>)> = BTreeMap::new();
    let mut order = Vec::new();
    for (lineno, line) in lines.enumerate() {
        let fields: Vec<&str> = line.split(',').map(str::trim).collect();
        let get = |i: usize| -> Res<f64> {
            fields
                .get(i)
                .and_then(|f| f.parse().ok())
                .ok_or_else(|| CliError::Input(format!("bad value on data line {}", lineno + 1)))
        };
        let (h, t, s) = (get(ih)?, get(it)?, get(is)?);
        let entry = groups.entry(h.to_bits()).or_insert_with(|| {
            order.push(h.to_bits());
            (h, Vec::new())
        });
        entry.1.push((t, s));
    }
    if order.is_empty() {
        return Err(CliError::Input(format!("{} has no data rows", path.display())));
    }
    order
        .into_iter()
        .map(|k| {
            let (h, pts) = groups.remove(&k).unwrap_or_default();
            Ok(SkewCurve::new(h, pts)?)
        })
        .collect()
}

fn fit_json(curves: &[SkewCurve]) -> Res<String> {
    if curves.is_empty() {
        return Err(CliError::Input("no skew curves to fit".into()));
    }
    let fits = curves.iter().map(fit_power_law).collect::<Result<Vec<_>, _>>()?;
    let shared = fit_shared_exponent(curves)?;
    let e = fit_a_of_h(&fits)?;
    let report = FitReport {
        per_h: fits.iter().map(FitRow::from).collect(),
        pooled_b: shared.b,
        ah_fit: ExpRow { c0: e.c0, c1: e.c1 },
    };
    let mut s = serde_json::to_string_pretty(&report).map_err(|e| CliError::Input(e.to_string()))?;
    s.push('\n');
    Ok(s)
}

fn fwd_skew_csv(cfg: &RunConfig, exec: Execution) -> Res<String> {
    let f = &cfg.forward;
    let s = f.s.unwrap_or(0.5);
    let tbars = log_grid(
        f.tbar_min.unwrap_or(0.005),
        f.tbar_max.unwrap_or(0.3),
        f.n.unwrap_or(50),
    )?;
    let q = cfg.quadrature()?;
    let mut text = String::from("H,s,Tbar,skew\n");
    for h in cfg.hurst_values() {
        let mp = cfg.model_params(h)?;
        let curve = skew::forward_skew_curve(s, &tbars, &mp, &q, exec)?;
        for &(tb, v) in &curve.points {
            let _ = writeln!(text, "{},{},{},{}", num(h), num(s), num(tb), num(v));
        }
    }
    Ok(text)
}

fn drift_csv(cfg: &RunConfig) -> Res<String> {
    let d = &cfg.drift;
    let mp = cfg.model_params(single_hurst(cfg)?)?;
    let t0 = d.t0.unwrap_or(1e-3);
    let t_end = d.t_end.unwrap_or(1.0);
    let n = d.n_steps.unwrap_or(999);
    let grid = sim::uniform_grid(t0, t_end, n)?;
    let path = sim::drift_ode_path(&mp, d.alpha.unwrap_or(0.1), &grid)?;
    let mut text = String::from("t,v,V\n");
    for i in 0..path.t.len() {
        let _ = writeln!(text, "{},{},{}", num(path.t[i]), num(path.v[i]), num(path.vv[i]));
    }
    Ok(text)
}

fn simulate(cfg: &RunConfig, exec: Execution, out: Option<&Path>) -> Res<()> {
    let mp = cfg.model_params(single_hurst(cfg)?)?;
    let s = &cfg.sim;
    let d = SimConfig::default();
    let sc = SimConfig {
        n_paths: s.n_paths.unwrap_or(100),
        n_steps: s.n_steps.unwrap_or(d.n_steps),
        maturity: s.maturity.unwrap_or(d.maturity),
        seed: cfg.seed.unwrap_or(0),
        eps: s.eps,
        zeta_mode: s
            .alpha
            .map_or(ZetaMode::Constant, |alpha| ZetaMode::Linear { alpha }),
        record_stride: s.record_stride.unwrap_or(1),
        noise: true,
        execution: exec,
    };
    let ps = sim::simulate_q(&mp, &sc)?;
    let (mean, se) = sim::mc_martingale_stat(&ps);
    eprintln!(
        "paths {}: mean F_T/F0 = {mean:.6} (se {se:.2e}), max |h - h_eps| = {:.3e}",
        ps.n_paths,
        sim::check_h_invariant(&ps)
    );
    let mut buf = Vec::new();
    ps.write_csv(&mut buf)?;
    emit(out, &String::from_utf8_lossy(&buf))
}

fn price_csv(cfg: &RunConfig, exec: Execution) -> Res<String> {
    let p = &cfg.pricing;
    let mp = cfg.model_params(single_hurst(cfg)?)?;
    let spec = FwdStartSpec {
        s: p.s.unwrap_or(0.5),
        maturity: p.maturity.unwrap_or(0.75),
        strike: 1.0,
        r: mp.r,
        delta: mp.delta,
    };
    let strikes = match &p.strikes {
        Some(k) if k.is_empty() => return Err(CliError::Input("strike list is empty".into())),
        Some(k) => k.clone(),
        None => {
            let (lo, hi, n) = (
                p.k_min.unwrap_or(0.5),
                p.k_max.unwrap_or(2.0),
                p.n_strikes.unwrap_or(21),
            );
            if n < 2 || hi.partial_cmp(&lo) != Some(std::cmp::Ordering::Greater) {
                return Err(CliError::Input(
                    "strike range needs k_min < k_max and at least 2 strikes".into(),
                ));
            }
            (0..n)
                .map(|i| lo + (hi - lo) * i as f64 / (n - 1) as f64)
                .collect()
        }
    };
    let d = FftGrid::default();
    let grid = FftGrid {
        n: p.fft_n.unwrap_or(d.n),
        eta: p.eta.unwrap_or(d.eta),
        alpha: p.alpha.unwrap_or(d.alpha),
    };
    let mut text = String::new();
    match p.model.unwrap_or_default() {
        PricingModel::Bs => {
            text.push_str("K,price,closed_form\n");
            let cf = pricing::bs_forward_cf(&spec, mp.implied_vol);
            let prices = pricing::carr_madan_strikes(&spec, &strikes, cf, &grid)?;
            for (k, price) in strikes.iter().zip(prices) {
                let exact = pricing::bs_forward_start(&FwdStartSpec { strike: *k, ..spec }, mp.implied_vol)?;
                let _ = writeln!(text, "{},{},{}", num(*k), num(price), num(exact));
            }
        }
        PricingModel::Ado => {
            text.push_str("K,price\n");
            let sc = SimConfig {
                n_paths: p.n_paths.unwrap_or(10_000),
                n_steps: p.n_steps.unwrap_or(64),
                seed: cfg.seed.unwrap_or(0),
                execution: exec,
                ..Default::default()
            };
            let prices = pricing::ado_forward_prices(&mp, &spec, &strikes, &sc, &grid)?;
            for (k, price) in strikes.iter().zip(prices) {
                let _ = writeln!(text, "{},{}", num(*k), num(price));
            }
        }
    }
    Ok(text)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn seventeen_digits() {
        assert_eq!(num(0.1), "1.0000000000000001e-1");
        assert_eq!(num(0.1).parse::<f64>().unwrap(), 0.1);
    }

    #[test]
    fn curves_grouped_by_hurst_in_input_order() {
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("c.csv");
        std::fs::write(&p, "T,skew,H\n0.1,2,0.3\n0.2,1,0.3\n0.1,5,0.1\n0.2,4,0.1\n").unwrap();
        let curves = read_curves(&p).unwrap();
        assert_eq!(curves.len(), 2);
        assert_eq!(curves[0].h, 0.3);
        assert_eq!(curves[1].skews().collect::<Vec<_>>(), [5.0, 4.0]);
    }

    #[test]
    fn malformed_input_is_rejected() {
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("c.csv");
        std::fs::write(&p, "H,T\n0.1,0.2\n").unwrap();
        assert!(matches!(read_curves(&p), Err(CliError::Input(_))));
        std::fs::write(&p, "H,T,skew\n0.1,x,1\n").unwrap();
        assert!(matches!(read_curves(&p), Err(CliError::Input(_))));
    }

    #[test]
    fn single_hurst_defaults_and_rejects_lists() {
        let mut cfg = RunConfig::default();
        assert_eq!(single_hurst(&cfg).unwrap(), 0.1);
        cfg.model.hurst = Some(vec![0.1, 0.2]);
        assert!(single_hurst(&cfg).is_err());
    }
}
