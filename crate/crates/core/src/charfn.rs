//! Characteristic-function exponents of the ADO-Heston model.
//!
//! Under the market-price-of-risk choice used here the CF of the log-forward
//! is affine in the variance, φ = exp(A + v·B), where B solves
//!
//! ```text
//! B' = -a(ω,t)·B - ½ξ²ν(t)²B² + c(ω),   B(T) = 0,
//! a(ω,t) = iωρξν(t),   c(ω) = ½ω(ω+i),
//! ```
//!
//! and A' = ξ·m(t)·B with m(t) = -ζ/(ξ t^{1-H}). Skew computations evaluate
//! the CF at the shifted frequency ω = u - i/2, where c = ½(u²+¼) is real
//! and a = ½(1+2iu)ρξν. Real `u` arguments below always mean that shift.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::kernels::HurstParams;

const I: Complex64 = Complex64 { re: 0.0, im: 1.0 };

/// Risk-neutral ADO-Heston parameters.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ModelParams {
    pub hurst: HurstParams,
    /// Mean-reversion rate κ.
    pub kappa: f64,
    /// Vol-of-vol ξ.
    pub xi: f64,
    pub rho: f64,
    /// Market-price scale ζ(h), constant along paths.
    pub zeta: f64,
    /// Implied-volatility level I used by the skew formulas.
    pub implied_vol: f64,
    /// Cutoff ε of the indicator 1{t > ε} in the market price of risk.
    pub eps: f64,
    pub v0: f64,
    /// Initial value of the ADO factor 𝒱.
    pub vv0: f64,
    pub f0: f64,
    pub r: f64,
    /// Continuous dividend yield.
    pub delta: f64,
    /// Variance plugged into the B-term of the skew integrand; `None` means I².
    pub skew_variance: Option<f64>,
}

impl ModelParams {
    /// Parameters with ε = 0, v₀ = I², 𝒱₀ = 0, F₀ = 1 and zero rates.
    pub fn new(h: f64, kappa: f64, xi: f64, rho: f64, zeta: f64, implied_vol: f64) -> Result<Self> {
        let mp = Self {
            hurst: HurstParams::new(h)?,
            kappa,
            xi,
            rho,
            zeta,
            implied_vol,
            eps: 0.0,
            v0: implied_vol * implied_vol,
            vv0: 0.0,
            f0: 1.0,
            r: 0.0,
            delta: 0.0,
            skew_variance: None,
        };
        mp.validate()?;
        Ok(mp)
    }

    pub fn validate(&self) -> Result<()> {
        let finite = [
            self.kappa,
            self.xi,
            self.rho,
            self.zeta,
            self.implied_vol,
            self.eps,
            self.v0,
            self.vv0,
            self.f0,
            self.r,
            self.delta,
        ];
        if finite.iter().any(|x| !x.is_finite()) {
            return Err(Error::invalid("model parameters must be finite"));
        }
        if !(self.kappa > 0.0) {
            return Err(Error::invalid(format!(
                "kappa must be positive, got {}",
                self.kappa
            )));
        }
        if self.xi < 0.0 {
            return Err(Error::invalid(format!("xi must be nonnegative, got {}", self.xi)));
        }
        if self.rho.abs() > 1.0 {
            return Err(Error::invalid(format!(
                "correlation must lie in [-1,1], got {}",
                self.rho
            )));
        }
        if !(self.implied_vol > 0.0) {
            return Err(Error::invalid(format!(
                "implied volatility level must be positive, got {}",
                self.implied_vol
            )));
        }
        if self.eps < 0.0 || self.v0 < 0.0 {
            return Err(Error::invalid("eps and v0 must be nonnegative"));
        }
        if !(self.f0 > 0.0) {
            return Err(Error::invalid(format!("F0 must be positive, got {}", self.f0)));
        }
        if let Some(v) = self.skew_variance {
            if !(v >= 0.0 && v.is_finite()) {
                return Err(Error::invalid(format!(
                    "skew variance must be nonnegative, got {v}"
                )));
            }
        }
        Ok(())
    }

    /// Same parameters with a different Hurst exponent.
    pub fn with_hurst(mut self, h: f64) -> Result<Self> {
        self.hurst = HurstParams::new(h)?;
        Ok(self)
    }

    pub fn h(&self) -> f64 {
        self.hurst.h
    }

    /// Variance used in the skew integrand: the override if set, else I².
    pub fn skew_variance(&self) -> f64 {
        self.skew_variance.unwrap_or(self.implied_vol * self.implied_vol)
    }

    /// θ(t) = ξ²ν(t)²/(4κ).
    pub fn theta(&self, t: f64) -> Result<f64> {
        crate::kernels::theta_of_t(t, &self.hurst, self.xi, self.kappa)
    }
}

/// Real and imaginary parts of the exponents A and B at one frequency.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct CfExponents {
    pub a_re: f64,
    pub a_im: f64,
    pub b_re: f64,
    pub b_im: f64,
}

impl CfExponents {
    pub fn new(a: Complex64, b: Complex64) -> Self {
        Self {
            a_re: a.re,
            a_im: a.im,
            b_re: b.re,
            b_im: b.im,
        }
    }

    pub fn a(&self) -> Complex64 {
        Complex64::new(self.a_re, self.a_im)
    }

    pub fn b(&self) -> Complex64 {
        Complex64::new(self.b_re, self.b_im)
    }
}

/// The frequency at which skew formulas evaluate the CF.
#[inline]
pub fn shifted(u: f64) -> Complex64 {
    Complex64::new(u, -0.5)
}

#[inline]
fn quad_coef(omega: Complex64) -> Complex64 {
    0.5 * omega * (omega + I)
}

#[inline]
fn linear_coef(omega: Complex64, nu: f64, mp: &ModelParams) -> Complex64 {
    I * omega * (mp.rho * mp.xi * nu)
}

fn check_times(t: f64, maturity: f64) -> Result<()> {
    if !(t >= 0.0) || !(maturity >= 0.0) || !t.is_finite() || !maturity.is_finite() {
        return Err(Error::domain(format!(
            "times must be finite and nonnegative, got t = {t}, T = {maturity}"
        )));
    }
    if t > maturity {
        return Err(Error::domain(format!(
            "require t <= T, got t = {t}, T = {maturity}"
        )));
    }
    Ok(())
}

/// Second-order expansion of B about the terminal time at a general complex
/// frequency: B = c(ω)(t-T)[1 - ½a(ω,T)(t-T)].
pub fn riccati_series_at(omega: Complex64, t: f64, maturity: f64, mp: &ModelParams) -> Result<Complex64> {
    check_times(t, maturity)?;
    if t == maturity {
        return Ok(Complex64::new(0.0, 0.0));
    }
    let nu_t = mp.hurst.nu(maturity)?;
    let d = t - maturity;
    let c = quad_coef(omega);
    let a = linear_coef(omega, nu_t, mp);
    Ok(c * d * (1.0 - 0.5 * a * d))
}

/// B(u; t, T) at the shifted frequency u - i/2, accurate to O((T-t)³).
pub fn riccati_series(u: f64, t: f64, maturity: f64, mp: &ModelParams) -> Result<Complex64> {
    riccati_series_at(shifted(u), t, maturity, mp)
}

/// Overflow guard for the numerical Riccati solve.
const RICCATI_GUARD: f64 = 1e12;

/// Integrate the Riccati equation for B backward from `maturity` (B = 0) to
/// `t` with `n_steps` fixed RK4 steps, at a general complex frequency.
pub fn riccati_ode_at(
    omega: Complex64,
    t: f64,
    maturity: f64,
    mp: &ModelParams,
    n_steps: usize,
) -> Result<Complex64> {
    check_times(t, maturity)?;
    if t == maturity {
        return Ok(Complex64::new(0.0, 0.0));
    }
    if !(t > 0.0) {
        return Err(Error::domain("riccati_ode requires t > 0 (nu is singular at 0)"));
    }
    if n_steps < 16 {
        return Err(Error::invalid(format!(
            "riccati_ode needs at least 16 steps, got {n_steps}"
        )));
    }
    let c = quad_coef(omega);
    let hp = &mp.hurst;
    let rhs = |s: f64, b: Complex64| -> Complex64 {
        let nu = hp.b_h * s.powf(hp.h - 0.5);
        -linear_coef(omega, nu, mp) * b - 0.5 * mp.xi * mp.xi * nu * nu * b * b + c
    };
    let step = (t - maturity) / n_steps as f64;
    let mut b = Complex64::new(0.0, 0.0);
    for i in 0..n_steps {
        let s = maturity + step * i as f64;
        let k1 = rhs(s, b);
        let k2 = rhs(s + 0.5 * step, b + 0.5 * step * k1);
        let k3 = rhs(s + 0.5 * step, b + 0.5 * step * k2);
        let k4 = rhs(s + step, b + step * k3);
        b += step / 6.0 * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
        if !(b.norm() <= RICCATI_GUARD) {
            return Err(Error::BlowUp {
                t: s + step,
                reason: format!("|B| exceeded {RICCATI_GUARD:e}"),
            });
        }
    }
    Ok(b)
}

/// Numerical Riccati solution at the shifted frequency; the independent
/// check on [`riccati_series`].
pub fn riccati_ode(u: f64, t: f64, maturity: f64, mp: &ModelParams, n_steps: usize) -> Result<Complex64> {
    riccati_ode_at(shifted(u), t, maturity, mp, n_steps)
}

/// Market price of risk m(t) = -ζ/(ξ t^{1-H}) for t > ε, else 0.
pub fn market_price_m(t: f64, mp: &ModelParams) -> Result<f64> {
    if !(t >= 0.0) {
        return Err(Error::domain(format!("market price requires t >= 0, got {t}")));
    }
    if mp.zeta == 0.0 || t <= mp.eps {
        return Ok(0.0);
    }
    if mp.xi == 0.0 {
        return Err(Error::domain(
            "market price is undefined for xi = 0 with zeta != 0",
        ));
    }
    Ok(-mp.zeta / (mp.xi * t.powf(1.0 - mp.h())))
}

/// Vanilla A-exponent at t = 0 to leading order in small T, in the closed
/// form used for the skew term structure:
///
/// A_R = -(1/12)ζ(u²+¼)[(5-2H)T^{H+1} + ½B_H²ρξu·T^{3H+1}]
/// A_I = -(1/12)ζB_H²ξρu(u²+¼)T^{3H+1}
///
/// This is not the exact integral of [`riccati_series`] against m; compare
/// [`exponent_a_forward`] with s = 0, which is.
pub fn exponent_a_vanilla(u: f64, maturity: f64, mp: &ModelParams) -> Result<Complex64> {
    if !(maturity > 0.0) || !maturity.is_finite() {
        return Err(Error::domain(format!(
            "maturity must be positive, got {maturity}"
        )));
    }
    let h = mp.h();
    let q = u * u + 0.25;
    let b2 = mp.hurst.b_h * mp.hurst.b_h;
    let t_lead = maturity.powf(h + 1.0);
    let t_corr = maturity.powf(3.0 * h + 1.0);
    let a_re = -mp.zeta * q / 12.0 * ((5.0 - 2.0 * h) * t_lead + 0.5 * b2 * mp.rho * mp.xi * u * t_corr);
    let a_im = -mp.zeta * b2 * mp.xi * mp.rho * u * q / 12.0 * t_corr;
    Ok(Complex64::new(a_re, a_im))
}

/// A = -ξ∫₀^{T̄} m(p)·B(ω; p, T̄) dp with B the second-order series and
/// ε = 0, integrated in closed form:
///
/// A = ζ·c(ω)·[-T̄^{H+1}/(H(H+1)) - a(ω,T̄)·T̄^{H+2}/(H(H+1)(H+2))].
pub fn forward_a_at(omega: Complex64, tbar: f64, mp: &ModelParams) -> Result<Complex64> {
    if !(tbar >= 0.0) || !tbar.is_finite() {
        return Err(Error::domain(format!(
            "time to maturity must be nonnegative, got {tbar}"
        )));
    }
    if tbar == 0.0 || mp.zeta == 0.0 {
        return Ok(Complex64::new(0.0, 0.0));
    }
    let h = mp.h();
    let c = quad_coef(omega);
    let a = linear_coef(omega, mp.hurst.nu(tbar)?, mp);
    let lead = tbar.powf(h + 1.0) / (h * (h + 1.0));
    let corr = tbar.powf(h + 2.0) / (h * (h + 1.0) * (h + 2.0));
    Ok(mp.zeta * c * (-lead - a * corr))
}

/// Forward-start A-exponent at the shifted frequency, for determination date
/// `s` and maturity `maturity` (T̄ = T - s).
///
/// A_R = -ζ(u²+¼)/(4H(1+H)(2+H))·[(4+2H)T̄^{H+1} + B_Hρξ·T̄^{2H+3/2}]
/// A_I = -ζu(u²+¼)ρξB_H·T̄^{2H+3/2}/(2H(1+H)(2+H))
pub fn exponent_a_forward(u: f64, s: f64, maturity: f64, mp: &ModelParams) -> Result<Complex64> {
    if !(s >= 0.0) || !(s < maturity) {
        return Err(Error::domain(format!(
            "require 0 <= s < T, got s = {s}, T = {maturity}"
        )));
    }
    forward_a_at(shifted(u), maturity - s, mp)
}

/// A and B of the vanilla CF at t = 0 and shifted frequency u - i/2.
pub fn vanilla_exponents(u: f64, maturity: f64, mp: &ModelParams) -> Result<CfExponents> {
    let a = exponent_a_vanilla(u, maturity, mp)?;
    let b = riccati_series(u, 0.0, maturity, mp)?;
    Ok(CfExponents::new(a, b))
}

/// A and B of the forward CF over a horizon `tbar`, shifted frequency.
pub fn forward_exponents(u: f64, tbar: f64, mp: &ModelParams) -> Result<CfExponents> {
    let a = forward_a_at(shifted(u), tbar, mp)?;
    let b = riccati_series(u, 0.0, tbar, mp)?;
    Ok(CfExponents::new(a, b))
}

#[inline]
fn im_phi(e: &CfExponents, v: f64) -> f64 {
    (e.a_re + v * e.b_re).exp() * e.a_im.sin()
}

/// Im φ(u - i/2) = exp(A_R + v·B_R)·sin(A_I) with v the skew variance
/// (I² by default); B_I is dropped as it is O(T²).
pub fn phi_im_shifted(u: f64, maturity: f64, mp: &ModelParams) -> Result<f64> {
    let e = vanilla_exponents(u, maturity, mp)?;
    Ok(im_phi(&e, mp.skew_variance()))
}

/// Forward-start analogue of [`phi_im_shifted`] over the horizon `tbar`.
pub fn phi_im_shifted_forward(u: f64, tbar: f64, mp: &ModelParams) -> Result<f64> {
    if !(tbar > 0.0) {
        return Err(Error::domain(format!(
            "time to maturity must be positive, got {tbar}"
        )));
    }
    let e = forward_exponents(u, tbar, mp)?;
    Ok(im_phi(&e, mp.skew_variance()))
}

/// Conditional forward CF of log(S_T/S_s) given the variance `v` at the
/// determination date: exp(A(ω,T̄) + v·B(ω;0,T̄) + iω(r-δ)T̄).
pub fn conditional_forward_cf(omega: Complex64, tbar: f64, v: f64, mp: &ModelParams) -> Result<Complex64> {
    let a = forward_a_at(omega, tbar, mp)?;
    let b = riccati_series_at(omega, 0.0, tbar, mp)?;
    let drift = I * omega * ((mp.r - mp.delta) * tbar);
    Ok((a + v * b + drift).exp())
}

/// Black–Scholes CF of log(S_{t+τ}/S_t):
/// exp[iu(r-δ-½σ²)τ - ½u²σ²τ].
pub fn bs_cf(u: Complex64, tau: f64, r: f64, delta: f64, sigma: f64) -> Complex64 {
    let s2 = sigma * sigma;
    (I * u * ((r - delta - 0.5 * s2) * tau) - 0.5 * u * u * (s2 * tau)).exp()
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use proptest::prelude::*;

    fn table_params(h: f64) -> ModelParams {
        ModelParams::new(h, 1.0, 0.01, 0.7, 100.0, 0.5).unwrap()
    }

    #[test]
    fn series_terminal_and_slope() {
        let mp = table_params(0.3);
        for u in [0.0, 0.7, 3.0] {
            assert_eq!(
                riccati_series(u, 0.4, 0.4, &mp).unwrap(),
                Complex64::new(0.0, 0.0)
            );
            let h = 1e-6;
            let b = riccati_series(u, 0.4 - h, 0.4, &mp).unwrap();
            let slope = -b / h;
            let want = 0.5 * (u * u + 0.25);
            assert!((slope.re - want).abs() < 1e-4 * want.max(1.0));
        }
    }

    #[test]
    fn series_rejects_t_after_maturity() {
        let mp = table_params(0.3);
        assert!(matches!(
            riccati_series(1.0, 0.5, 0.4, &mp),
            Err(Error::Domain(_))
        ));
    }

    #[test]
    fn series_second_derivative() {
        // B''(T) = -¼ξρ(1+2iu)(u²+¼)ν(T)
        let mp = table_params(0.2);
        let (u, t_mat, h) = (1.3, 0.5, 1e-4);
        let b = |t| riccati_series(u, t, t_mat, &mp).unwrap();
        let second = (b(t_mat) - 2.0 * b(t_mat - h) + b(t_mat - 2.0 * h)) / (h * h);
        let nu = mp.hurst.nu(t_mat).unwrap();
        let want = -0.25 * mp.xi * mp.rho * Complex64::new(1.0, 2.0 * u) * (u * u + 0.25) * nu;
        assert!((second - want).norm() < 1e-8 * want.norm().max(1.0));
    }

    #[test]
    fn series_matches_ode() {
        for h in [0.1, 0.3, 0.5] {
            let mp = table_params(h);
            let t_mat = 1.0;
            let b_ode = riccati_ode(1.0, t_mat - 0.05, t_mat, &mp, 1024).unwrap();
            let b_ser = riccati_series(1.0, t_mat - 0.05, t_mat, &mp).unwrap();
            assert!((b_ser - b_ode).norm() / b_ode.norm() < 1e-2, "H={h}");
        }
    }

    #[test]
    fn ode_zero_length_and_domain() {
        let mp = table_params(0.3);
        assert_eq!(
            riccati_ode(1.0, 0.2, 0.2, &mp, 64).unwrap(),
            Complex64::new(0.0, 0.0)
        );
        assert!(riccati_ode(1.0, 0.0, 0.2, &mp, 64).is_err());
        assert!(riccati_ode(1.0, 0.1, 0.2, &mp, 8).is_err());
    }

    #[test]
    fn ode_overflow_guard() {
        // a huge vol-of-vol with real frequency drives B through the guard
        let mut mp = table_params(0.5);
        mp.xi = 50.0;
        mp.rho = 0.0;
        let err = riccati_ode_at(Complex64::new(0.0, -30.0), 0.01, 5.0, &mp, 64).unwrap_err();
        assert!(matches!(err, Error::BlowUp { .. }), "{err:?}");
    }

    #[test]
    fn ode_conjugate_symmetry() {
        let mp = table_params(0.3);
        let bp = riccati_ode(1.5, 0.8, 1.0, &mp, 256).unwrap();
        let bm = riccati_ode(-1.5, 0.8, 1.0, &mp, 256).unwrap();
        assert_relative_eq!(bp.re, bm.re, max_relative = 1e-12);
        assert_relative_eq!(bp.im, -bm.im, max_relative = 1e-12);
    }

    #[test]
    fn vanilla_a_limits() {
        let mut mp = table_params(0.3);
        mp.rho = 0.0;
        let u = 1.2;
        let a = exponent_a_vanilla(u, 0.1, &mp).unwrap();
        assert_eq!(a.im, 0.0);
        let want = -mp.zeta / 12.0 * (u * u + 0.25) * (5.0 - 0.6) * 0.1f64.powf(1.3);
        assert_relative_eq!(a.re, want, max_relative = 1e-14);

        mp.zeta = 0.0;
        assert_eq!(exponent_a_vanilla(u, 0.1, &mp).unwrap(), Complex64::new(0.0, 0.0));
        assert!(exponent_a_vanilla(u, 0.0, &mp).is_err());
    }

    #[test]
    fn forward_a_limits() {
        let mp = table_params(0.2);
        assert!(exponent_a_forward(1.0, 0.5, 0.5, &mp).is_err());
        assert!(exponent_a_forward(1.0, -0.1, 0.5, &mp).is_err());
        assert_eq!(
            forward_a_at(shifted(1.0), 0.0, &mp).unwrap(),
            Complex64::new(0.0, 0.0)
        );
        let mut flat = mp;
        flat.zeta = 0.0;
        assert_eq!(
            exponent_a_forward(1.0, 0.1, 0.5, &flat).unwrap(),
            Complex64::new(0.0, 0.0)
        );
        // depends on s and T only through T - s
        let x = exponent_a_forward(0.8, 0.3, 0.35, &mp).unwrap();
        let y = exponent_a_forward(0.8, 0.0, 0.05, &mp).unwrap();
        assert_relative_eq!(x.re, y.re, max_relative = 1e-12);
        assert_relative_eq!(x.im, y.im, max_relative = 1e-12);
    }

    #[test]
    fn forward_a_expanded_form() {
        let mp = table_params(0.2);
        let (u, tbar, h): (f64, f64, f64) = (1.0, 0.05, 0.2);
        let q = u * u + 0.25;
        let b = mp.hurst.b_h;
        let den = 4.0 * h * (1.0 + h) * (2.0 + h);
        let re = -mp.zeta * q / den
            * ((4.0 + 2.0 * h) * tbar.powf(h + 1.0) + b * mp.rho * mp.xi * tbar.powf(2.0 * h + 1.5));
        let im = -mp.zeta * u * q * mp.rho * mp.xi * b * tbar.powf(2.0 * h + 1.5) * 2.0 / den;
        let a = exponent_a_forward(u, 0.0, tbar, &mp).unwrap();
        assert_relative_eq!(a.re, re, max_relative = 1e-13);
        assert_relative_eq!(a.im, im, max_relative = 1e-13);
    }

    #[test]
    fn market_price_values() {
        let mp = ModelParams::new(0.1, 1.0, 0.01, 0.7, 100.0, 0.5).unwrap();
        assert_relative_eq!(market_price_m(1.0, &mp).unwrap(), -10000.0, max_relative = 1e-14);
        let mut cut = mp;
        cut.eps = 0.2;
        assert_eq!(market_price_m(0.1, &cut).unwrap(), 0.0);
        assert_eq!(market_price_m(0.2, &cut).unwrap(), 0.0);
        let mut flat = mp;
        flat.zeta = 0.0;
        assert_eq!(market_price_m(0.5, &flat).unwrap(), 0.0);
        let mut degenerate = mp;
        degenerate.xi = 0.0;
        assert!(market_price_m(0.5, &degenerate).is_err());
    }

    #[test]
    fn phi_im_sign_and_zeros() {
        let mp = table_params(0.1);
        assert!(phi_im_shifted(1.0, 0.1, &mp).unwrap() < 0.0);
        assert_eq!(phi_im_shifted(0.0, 0.1, &mp).unwrap(), 0.0);
        let mut sym = mp;
        sym.rho = 0.0;
        for u in [0.1, 1.0, 10.0] {
            assert_eq!(phi_im_shifted(u, 0.1, &sym).unwrap(), 0.0);
            assert_eq!(phi_im_shifted_forward(u, 0.1, &sym).unwrap(), 0.0);
        }
    }

    #[test]
    fn bs_cf_identities() {
        let one = Complex64::new(1.0, 0.0);
        assert_eq!(bs_cf(Complex64::new(0.0, 0.0), 0.7, 0.03, 0.01, 0.4), one);
        assert_eq!(bs_cf(Complex64::new(2.5, 0.3), 0.0, 0.03, 0.01, 0.4), one);
        let m = bs_cf(Complex64::new(0.0, -1.0), 0.7, 0.03, 0.01, 0.4);
        assert_relative_eq!(m.re, (0.02f64 * 0.7).exp(), max_relative = 1e-14);
        assert!(m.im.abs() < 1e-15);
    }

    #[test]
    fn conditional_cf_reduces_to_black_scholes() {
        let mut mp = table_params(0.3);
        mp.xi = 0.0;
        mp.zeta = 0.0;
        mp.r = 0.02;
        mp.delta = 0.01;
        let v: f64 = 0.09;
        for w in [
            Complex64::new(0.7, 0.0),
            Complex64::new(3.0, -2.5),
            Complex64::new(-1.0, 0.3),
        ] {
            let ado = conditional_forward_cf(w, 0.4, v, &mp).unwrap();
            let bs = bs_cf(w, 0.4, 0.02, 0.01, v.sqrt());
            assert!((ado - bs).norm() < 1e-14 * bs.norm().max(1.0));
        }
    }

    #[test]
    fn model_params_validation() {
        assert!(ModelParams::new(0.3, 0.0, 0.01, 0.7, 100.0, 0.5).is_err());
        assert!(ModelParams::new(0.3, 1.0, 0.01, 1.2, 100.0, 0.5).is_err());
        assert!(ModelParams::new(0.3, 1.0, -0.1, 0.5, 100.0, 0.5).is_err());
        assert!(ModelParams::new(0.3, 1.0, 0.01, 0.5, 100.0, 0.0).is_err());
        assert!(ModelParams::new(1.0, 1.0, 0.01, 0.5, 100.0, 0.5).is_err());
        let mp = table_params(0.3);
        assert_eq!(mp.skew_variance(), 0.25);
        let mut over = mp;
        over.skew_variance = Some(0.04);
        assert_eq!(over.skew_variance(), 0.04);
        assert_relative_eq!(mp.theta(1.0).unwrap(), 1e-4 * mp.hurst.b_h.powi(2) / 4.0);
    }

    proptest! {
        #[test]
        fn uncorrelated_is_real(u in -20.0f64..20.0, t in 0.0f64..1.0, gap in 1e-4f64..1.0, h in 0.05f64..0.95) {
            let mut mp = table_params(h);
            mp.rho = 0.0;
            let b = riccati_series(u, t, t + gap, &mp).unwrap();
            let a_van = exponent_a_vanilla(u, t + gap, &mp).unwrap();
            let a_fwd = exponent_a_forward(u, t, t + gap, &mp).unwrap();
            prop_assert!(b.im.abs() < 1e-14);
            prop_assert!(a_van.im.abs() < 1e-14);
            prop_assert!(a_fwd.im.abs() < 1e-14);
        }

        #[test]
        fn series_parity_in_u(u in 0.0f64..30.0, t in 0.0f64..0.5, gap in 1e-3f64..0.5) {
            let mp = table_params(0.3);
            let bp = riccati_series(u, t, t + gap, &mp).unwrap();
            let bm = riccati_series(-u, t, t + gap, &mp).unwrap();
            prop_assert!((bp.re - bm.re).abs() <= 1e-14 * bp.re.abs().max(1e-300));
            prop_assert!((bp.im + bm.im).abs() <= 1e-14 * bp.im.abs().max(1e-300));
        }

        #[test]
        fn real_part_nonpositive(u in -30.0f64..30.0, t in 0.0f64..0.3, gap in 1e-4f64..0.3, h in 0.05f64..0.95) {
            let mp = table_params(h);
            let b = riccati_series(u, t, t + gap, &mp).unwrap();
            prop_assert!(b.re <= 0.0);
        }
    }
}
