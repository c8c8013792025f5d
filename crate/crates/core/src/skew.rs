//! ATM implied skew of vanilla and forward-start options.
//!
//! 𝒮(T) = -e^{I²T/8}·√(2/π)·T^{-1/2}·∫₀^∞ u·Im φ(u - i/2)/(u²+¼) du

use std::cell::Cell;
use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::charfn::{self, ModelParams};
use crate::error::{Error, Result};
use crate::par::{self, Execution};
use crate::quad;

pub use crate::special::exp_integral_e1;

/// Truncation and tolerance for the skew integral.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct QuadratureConfig {
    /// Upper integration limit; `None` picks it from the decay of the integrand.
    pub u_max: Option<f64>,
    pub rel_tol: f64,
    pub max_subdivisions: usize,
}

impl Default for QuadratureConfig {
    fn default() -> Self {
        Self {
            u_max: None,
            rel_tol: 1e-8,
            max_subdivisions: 2000,
        }
    }
}

impl QuadratureConfig {
    pub fn validate(&self) -> Result<()> {
        if let Some(u) = self.u_max {
            if !(u > 0.0 && u.is_finite()) {
                return Err(Error::invalid(format!("u_max must be positive, got {u}")));
            }
        }
        if !(self.rel_tol > 0.0 && self.rel_tol <= 1e-2) {
            return Err(Error::invalid(format!(
                "rel_tol must lie in (0, 1e-2], got {}",
                self.rel_tol
            )));
        }
        if self.max_subdivisions == 0 {
            return Err(Error::invalid("max_subdivisions must be positive"));
        }
        Ok(())
    }
}

/// Skew sampled on a maturity grid for one Hurst exponent.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SkewCurve {
    pub h: f64,
    /// (T, skew) pairs, T strictly increasing.
    pub points: Vec<(f64, f64)>,
}

impl SkewCurve {
    pub fn new(h: f64, points: Vec<(f64, f64)>) -> Result<Self> {
        if points.iter().any(|&(t, _)| !(t > 0.0)) {
            return Err(Error::invalid("skew curve maturities must be positive"));
        }
        if points.windows(2).any(|w| !(w[1].0 > w[0].0)) {
            return Err(Error::invalid(
                "skew curve maturities must be strictly increasing",
            ));
        }
        Ok(Self { h, points })
    }

    pub fn maturities(&self) -> impl Iterator<Item = f64> + '_ {
        self.points.iter().map(|p| p.0)
    }

    pub fn skews(&self) -> impl Iterator<Item = f64> + '_ {
        self.points.iter().map(|p| p.1)
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }
}

/// `n` log-spaced points from `lo` to `hi` inclusive.
pub fn log_grid(lo: f64, hi: f64, n: usize) -> Result<Vec<f64>> {
    if !(lo > 0.0 && hi > lo) || n < 2 {
        return Err(Error::invalid("log grid needs 0 < lo < hi and at least 2 points"));
    }
    let (a, b) = (lo.ln(), hi.ln());
    let step = (b - a) / (n - 1) as f64;
    let mut g: Vec<f64> = (0..n).map(|i| (a + step * i as f64).exp()).collect();
    g[0] = lo;
    g[n - 1] = hi;
    Ok(g)
}

const TAIL_EXPONENT: f64 = 30.0;
const U_MAX_CAP: f64 = 1e4;

/// Smallest u where the negative-definite part of A_R + v·B_R reaches -30.
/// `lead` is the coefficient of ζ(u²+¼) in -A_R.
fn default_u_max(lead: f64, horizon: f64, mp: &ModelParams) -> f64 {
    let c = mp.zeta.max(0.0) * lead + 0.5 * mp.skew_variance() * horizon * 0.5;
    if !(c > 0.0) {
        return U_MAX_CAP;
    }
    (TAIL_EXPONENT / c).sqrt().min(U_MAX_CAP)
}

fn check_maturity(t: f64) -> Result<()> {
    if !(t > 0.0) || !t.is_finite() {
        return Err(Error::domain(format!(
            "maturity must be positive and finite, got {t}"
        )));
    }
    Ok(())
}

fn skew_integral<F: Fn(f64) -> Result<f64>>(
    phi_im: F,
    horizon: f64,
    u_max: f64,
    mp: &ModelParams,
    q: &QuadratureConfig,
) -> Result<f64> {
    q.validate()?;
    let failure = Cell::new(None);
    let integrand = |u: f64| match phi_im(u) {
        Ok(p) => u * p / (u * u + 0.25),
        Err(e) => {
            failure.set(Some(e));
            0.0
        }
    };
    let result = quad::integrate(integrand, 0.0, u_max, q.rel_tol, q.max_subdivisions);
    if let Some(e) = failure.into_inner() {
        return Err(e);
    }
    let iv2 = mp.implied_vol * mp.implied_vol;
    let pre = -(iv2 * horizon / 8.0).exp() * (2.0 / PI).sqrt() / horizon.sqrt();
    Ok(pre * result?.value)
}

/// ATM implied skew at maturity `t` using the vanilla exponents.
pub fn atm_skew(t: f64, mp: &ModelParams, q: &QuadratureConfig) -> Result<f64> {
    check_maturity(t)?;
    let h = mp.h();
    let lead = (5.0 - 2.0 * h) / 12.0 * t.powf(h + 1.0);
    let u_max = q.u_max.unwrap_or_else(|| default_u_max(lead, t, mp));
    skew_integral(|u| charfn::phi_im_shifted(u, t, mp), t, u_max, mp, q)
}

/// Exponent p(T,H) of the analytic skew bound. The ρξ cross term of A_R is
/// u-weighted and is dropped, which keeps the bound valid when ζρξ ≥ 0; the
/// ρξ term of B_R enters through ν(T).
pub fn upper_bound_exponent(t: f64, mp: &ModelParams) -> Result<f64> {
    check_maturity(t)?;
    let h = mp.h();
    let nu_t = mp.hurst.nu(t)?;
    let lead = mp.zeta / 12.0 * (5.0 - 2.0 * h) * t.powf(h + 1.0);
    let var = 0.5 * mp.skew_variance() * t * (1.0 + 0.25 * mp.xi * mp.rho * nu_t * t);
    Ok(lead + var)
}

/// Analytic bound e^{I²T/8}·(2πT)^{-1/2}·E₁(p/4) on the ATM skew: with
/// |sin| ≤ 1 and A_R + v·B_R ≤ -p(u²+¼) the integral is ½E₁(p/4).
pub fn atm_skew_upper_bound(t: f64, mp: &ModelParams) -> Result<f64> {
    check_maturity(t)?;
    if mp.zeta * mp.rho * mp.xi < 0.0 {
        return Err(Error::domain("skew bound requires zeta·rho·xi >= 0"));
    }
    let p = upper_bound_exponent(t, mp)?;
    if !(p > 0.0) {
        return Err(Error::domain(format!(
            "skew bound exponent p must be positive, got {p}"
        )));
    }
    let iv2 = mp.implied_vol * mp.implied_vol;
    Ok((iv2 * t / 8.0).exp() / (2.0 * PI * t).sqrt() * exp_integral_e1(0.25 * p)?)
}

/// ATM skew of a forward-start option with determination date `s` and
/// maturity `t`; depends on them only through T̄ = t - s.
pub fn atm_skew_forward(s: f64, t: f64, mp: &ModelParams, q: &QuadratureConfig) -> Result<f64> {
    if !(s >= 0.0) || !(s < t) || !t.is_finite() {
        return Err(Error::domain(format!("require 0 <= s < T, got s = {s}, T = {t}")));
    }
    let tbar = t - s;
    let h = mp.h();
    let lead = tbar.powf(h + 1.0) / (2.0 * h * (1.0 + h));
    let u_max = q.u_max.unwrap_or_else(|| default_u_max(lead, tbar, mp));
    skew_integral(
        |u| charfn::phi_im_shifted_forward(u, tbar, mp),
        tbar,
        u_max,
        mp,
        q,
    )
}

/// Vanilla skew at every maturity of `grid`.
pub fn skew_curve(
    grid: &[f64],
    mp: &ModelParams,
    q: &QuadratureConfig,
    exec: Execution,
) -> Result<SkewCurve> {
    if grid.is_empty() {
        return Err(Error::invalid("maturity grid is empty"));
    }
    if grid.windows(2).any(|w| !(w[1] > w[0])) {
        return Err(Error::invalid("maturity grid must be strictly increasing"));
    }
    let values = par::map_slice(exec, grid, |&t| atm_skew(t, mp, q));
    let points = grid
        .iter()
        .zip(values)
        .map(|(&t, s)| s.map(|s| (t, s)))
        .collect::<Result<Vec<_>>>()?;
    SkewCurve::new(mp.h(), points)
}

/// Forward skew at every T̄ of `tbar_grid` for a fixed determination date.
pub fn forward_skew_curve(
    s: f64,
    tbar_grid: &[f64],
    mp: &ModelParams,
    q: &QuadratureConfig,
    exec: Execution,
) -> Result<SkewCurve> {
    if tbar_grid.is_empty() {
        return Err(Error::invalid("maturity grid is empty"));
    }
    let values = par::map_slice(exec, tbar_grid, |&tb| atm_skew_forward(s, s + tb, mp, q));
    let points = tbar_grid
        .iter()
        .zip(values)
        .map(|(&tb, v)| v.map(|v| (tb, v)))
        .collect::<Result<Vec<_>>>()?;
    SkewCurve::new(mp.h(), points)
}
