//! Special functions: Γ, the exponential integral E₁ and the normal CDF.

use crate::error::{Error, Result};

/// Euler–Mascheroni constant.
const EULER_GAMMA: f64 = 0.577_215_664_901_532_9;

/// Γ(x) for real x (Lanczos approximation).
pub fn gamma(x: f64) -> f64 {
    statrs::function::gamma::gamma(x)
}

/// Standard normal cumulative distribution function.
pub fn norm_cdf(x: f64) -> f64 {
    0.5 * statrs::function::erf::erfc(-x / std::f64::consts::SQRT_2)
}

/// Exponential integral E₁(x) = ∫ₓ^∞ e^{-t}/t dt = Γ(0, x), for x > 0.
///
/// Power series for x ≤ 1, modified Lentz continued fraction above.
pub fn exp_integral_e1(x: f64) -> Result<f64> {
    if !(x > 0.0) {
        return Err(Error::domain(format!("E1 requires x > 0, got {x}")));
    }
    if x.is_infinite() {
        return Ok(0.0);
    }
    if x <= 1.0 {
        // E1(x) = -γ - ln x - Σ_{k≥1} (-x)^k / (k·k!)
        let mut sum = 0.0;
        let mut term = 1.0;
        for k in 1..200 {
            let kf = k as f64;
            term *= -x / kf;
            let add = term / kf;
            sum += add;
            if add.abs() < 1e-17 * sum.abs() {
                break;
            }
        }
        Ok(-EULER_GAMMA - x.ln() - sum)
    } else {
        // E1(x) = e^{-x} · 1/(x+1- 1/(x+3- 4/(x+5- ...)))
        let tiny = 1e-300;
        let mut b = x + 1.0;
        let mut c = 1.0 / tiny;
        let mut d = 1.0 / b;
        let mut h = d;
        for i in 1..500 {
            let an = -((i * i) as f64);
            b += 2.0;
            d = 1.0 / (an * d + b);
            c = b + an / c;
            let del = c * d;
            h *= del;
            if (del - 1.0).abs() < 1e-16 {
                return Ok(h * (-x).exp());
            }
        }
        Err(Error::Numerical(format!(
            "E1 continued fraction did not converge at x = {x}"
        )))
    }
}
