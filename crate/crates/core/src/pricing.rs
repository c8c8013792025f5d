//! Forward-start call pricing: Black–Scholes closed forms and Carr–Madan FFT
//! inversion of a forward characteristic function.

use std::f64::consts::PI;

use num_complex::Complex64;
use rustfft::FftPlanner;
use serde::{Deserialize, Serialize};

use crate::charfn::{self, ModelParams};
use crate::error::{Error, Result};
use crate::par;
use crate::sim::{self, SimConfig};
use crate::special::norm_cdf;

/// Forward-start call paying (S_T/S_s - K)⁺ at T.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FwdStartSpec {
    /// Determination date.
    pub s: f64,
    pub maturity: f64,
    pub strike: f64,
    pub r: f64,
    pub delta: f64,
}

impl FwdStartSpec {
    pub fn validate(&self) -> Result<()> {
        if !(self.s >= 0.0) || !(self.maturity > self.s) || !self.maturity.is_finite() {
            return Err(Error::invalid(format!(
                "require 0 <= s < T, got s = {}, T = {}",
                self.s, self.maturity
            )));
        }
        if !(self.strike > 0.0) || !self.strike.is_finite() {
            return Err(Error::invalid(format!(
                "strike must be positive, got {}",
                self.strike
            )));
        }
        if !self.r.is_finite() || !self.delta.is_finite() {
            return Err(Error::invalid("rates must be finite"));
        }
        Ok(())
    }

    pub fn tbar(&self) -> f64 {
        self.maturity - self.s
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FftGrid {
    /// Number of nodes, a power of two ≥ 256.
    pub n: usize,
    /// Frequency spacing.
    pub eta: f64,
    /// Damping exponent.
    pub alpha: f64,
}

impl Default for FftGrid {
    fn default() -> Self {
        Self {
            n: 4096,
            eta: 0.25,
            alpha: 1.5,
        }
    }
}

impl FftGrid {
    pub fn validate(&self) -> Result<()> {
        if self.n < 256 || !self.n.is_power_of_two() {
            return Err(Error::invalid(format!(
                "FFT size must be a power of two >= 256, got {}",
                self.n
            )));
        }
        if !(self.eta > 0.0) || !self.eta.is_finite() {
            return Err(Error::invalid(format!("eta must be positive, got {}", self.eta)));
        }
        if !(self.alpha > 0.0) || !self.alpha.is_finite() {
            return Err(Error::invalid(format!(
                "alpha must be positive, got {}",
                self.alpha
            )));
        }
        Ok(())
    }

    /// Log-strike spacing 2π/(nη).
    pub fn lambda(&self) -> f64 {
        2.0 * PI / (self.n as f64 * self.eta)
    }
}

/// Black–Scholes call on spot `s` with dividend yield `delta`.
pub fn bs_call(k: f64, s: f64, tau: f64, sigma: f64, r: f64, delta: f64) -> Result<f64> {
    if !(k > 0.0) || !(s > 0.0) {
        return Err(Error::domain(format!(
            "spot and strike must be positive, got S = {s}, K = {k}"
        )));
    }
    if !(tau >= 0.0) || !(sigma >= 0.0) {
        return Err(Error::domain("tau and sigma must be nonnegative"));
    }
    let fwd = s * ((r - delta) * tau).exp();
    let disc = (-r * tau).exp();
    let sd = sigma * tau.sqrt();
    if sd == 0.0 {
        return Ok(disc * (fwd - k).max(0.0));
    }
    let d1 = ((fwd / k).ln() + 0.5 * sd * sd) / sd;
    let d2 = d1 - sd;
    Ok(disc * (fwd * norm_cdf(d1) - k * norm_cdf(d2)))
}

/// e^{-rs}·BS(K, 1, T-s, I, r, δ).
pub fn bs_forward_start(spec: &FwdStartSpec, implied_vol: f64) -> Result<f64> {
    spec.validate()?;
    if !(implied_vol > 0.0) {
        return Err(Error::domain(format!(
            "implied volatility must be positive, got {implied_vol}"
        )));
    }
    let inner = bs_call(spec.strike, 1.0, spec.tbar(), implied_vol, spec.r, spec.delta)?;
    Ok((-spec.r * spec.s).exp() * inner)
}

/// Carr–Madan price of the forward-start call from the CF of log(S_T/S_s).
///
/// The log-strike grid is centred on log K so the requested strike sits on a
/// node. The damped integrand is even and analytic in frequency, so the
/// trapezoid rule (half weight at zero) converges geometrically in η.
pub fn carr_madan_forward_call<F>(spec: &FwdStartSpec, forward_cf: F, grid: &FftGrid) -> Result<f64>
where
    F: Fn(Complex64) -> Complex64,
{
    spec.validate()?;
    grid.validate()?;
    let (n, eta, alpha) = (grid.n, grid.eta, grid.alpha);
    let lambda = grid.lambda();
    let k = spec.strike.ln();
    let centre = n / 2;
    let k_start = k - centre as f64 * lambda;
    let disc = (-spec.r * spec.maturity).exp();

    let mut buf: Vec<Complex64> = Vec::with_capacity(n);
    for j in 0..n {
        let v = j as f64 * eta;
        let phi = forward_cf(Complex64::new(v, -(alpha + 1.0)));
        let denom = Complex64::new(alpha * alpha + alpha - v * v, (2.0 * alpha + 1.0) * v);
        let psi = disc * phi / denom;
        if !(psi.re.is_finite() && psi.im.is_finite()) {
            return Err(Error::Numerical(format!(
                "characteristic function is not finite at frequency {v} - {}i",
                alpha + 1.0
            )));
        }
        let w = if j == 0 { 0.5 } else { 1.0 };
        let phase = Complex64::from_polar(1.0, -v * k_start);
        buf.push(phase * psi * (w * eta));
    }
    FftPlanner::new().plan_fft_forward(n).process(&mut buf);
    Ok((-alpha * k).exp() / PI * buf[centre].re)
}

/// Prices at several strikes sharing a specification.
pub fn carr_madan_strikes<F>(
    spec: &FwdStartSpec,
    strikes: &[f64],
    forward_cf: F,
    grid: &FftGrid,
) -> Result<Vec<f64>>
where
    F: Fn(Complex64) -> Complex64,
{
    strikes
        .iter()
        .map(|&k| carr_madan_forward_call(&FwdStartSpec { strike: k, ..*spec }, &forward_cf, grid))
        .collect()
}

/// Black–Scholes forward CF for a specification.
pub fn bs_forward_cf(spec: &FwdStartSpec, implied_vol: f64) -> impl Fn(Complex64) -> Complex64 {
    let (tau, r, delta) = (spec.tbar(), spec.r, spec.delta);
    move |u| charfn::bs_cf(u, tau, r, delta, implied_vol)
}

/// ADO-Heston forward CF with the expectation over the variance at the
/// determination date taken by Monte Carlo: the conditional CF
/// exp(A + v_s·B + iω(r-δ)T̄) averaged over simulated v_s.
#[derive(Debug, Clone, PartialEq)]
pub struct McForwardCf {
    pub mp: ModelParams,
    pub tbar: f64,
    pub v_s: Vec<f64>,
}

impl McForwardCf {
    /// Simulate the variance up to `spec.s` with `sim_cfg` (its maturity is
    /// overridden) and keep the terminal values. With s = 0 the variance is v₀.
    pub fn simulate(mp: &ModelParams, spec: &FwdStartSpec, sim_cfg: &SimConfig) -> Result<Self> {
        spec.validate()?;
        let mut mp = *mp;
        mp.r = spec.r;
        mp.delta = spec.delta;
        let v_s = if spec.s == 0.0 {
            vec![mp.v0]
        } else {
            let cfg = SimConfig {
                maturity: spec.s,
                record_stride: sim_cfg.n_steps,
                ..*sim_cfg
            };
            sim::simulate_q(&mp, &cfg)?.v_terminal
        };
        Ok(Self {
            mp,
            tbar: spec.tbar(),
            v_s,
        })
    }

    pub fn eval(&self, omega: Complex64) -> Complex64 {
        let a = charfn::forward_a_at(omega, self.tbar, &self.mp);
        let b = charfn::riccati_series_at(omega, 0.0, self.tbar, &self.mp);
        let (a, b) = match (a, b) {
            (Ok(a), Ok(b)) => (a, b),
            _ => return Complex64::new(f64::NAN, f64::NAN),
        };
        let drift = Complex64::new(0.0, 1.0) * omega * ((self.mp.r - self.mp.delta) * self.tbar);
        let sum: Complex64 = self.v_s.iter().map(|&v| (a + v * b + drift).exp()).sum();
        sum / self.v_s.len() as f64
    }
}

/// FFT prices at several strikes with the Monte Carlo ADO forward CF.
pub fn ado_forward_prices(
    mp: &ModelParams,
    spec: &FwdStartSpec,
    strikes: &[f64],
    sim_cfg: &SimConfig,
    grid: &FftGrid,
) -> Result<Vec<f64>> {
    let cf = McForwardCf::simulate(mp, spec, sim_cfg)?;
    let prices = par::map_slice(sim_cfg.execution, strikes, |&k| {
        carr_madan_forward_call(&FwdStartSpec { strike: k, ..*spec }, |w| cf.eval(w), grid)
    });
    prices.into_iter().collect()
}
