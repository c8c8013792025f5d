//! Fractional-kernel constants of the (adjusted) Dobric–Ojeda construction
//! and the vol-of-vol kernel ν(t) = B_H·t^{H-1/2}.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::special::gamma;

/// Hurst exponent together with the constants derived from it.
///
/// All fields are fixed by `h`; build with [`HurstParams::new`].
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct HurstParams {
    pub h: f64,
    /// Covariance scale α_H = ξ(H)·sin²(πH), ξ(H) = [Γ(2H+1)Γ(3-2H)]^{1/2}.
    pub alpha_h: f64,
    pub c_h: f64,
    /// Diffusion scale of the Dobric–Ojeda SDE; equals 1 at H = 1/2.
    pub b_h: f64,
    /// Coefficient of t^{2H-1} in the deterministic factor ψ_H(t).
    pub psi_coef: f64,
}

impl HurstParams {
    pub fn new(h: f64) -> Result<Self> {
        if !(h > 0.0 && h < 1.0) {
            return Err(Error::domain(format!(
                "Hurst exponent must lie in (0,1), got {h}"
            )));
        }
        let sin_pi_h = (PI * h).sin();
        let xi_h = (gamma(2.0 * h + 1.0) * gamma(3.0 - 2.0 * h)).sqrt();
        let alpha_h = xi_h * sin_pi_h * sin_pi_h;
        let g_32 = gamma(1.5 - h);
        let c_h = alpha_h / (2.0 * h * g_32 * gamma(h + 0.5));
        let b_h = 2f64.powf(3.0 - 4.0 * h) * gamma(2.0 - h) / (sin_pi_h.powi(4) * g_32 * g_32 * gamma(h));
        let psi_coef = gamma(3.0 - 2.0 * h) / (c_h * g_32 * g_32);
        Ok(Self {
            h,
            alpha_h,
            c_h,
            b_h,
            psi_coef,
        })
    }

    /// ν(t) = B_H·t^{H-1/2}.
    pub fn nu(&self, t: f64) -> Result<f64> {
        if t < 0.0 || t.is_nan() {
            return Err(Error::domain(format!("nu requires t >= 0, got {t}")));
        }
        if t == 0.0 {
            return if self.h > 0.5 {
                Ok(0.0)
            } else if self.h == 0.5 {
                Ok(self.b_h)
            } else {
                Err(Error::domain("nu(0) is singular for H < 1/2"))
            };
        }
        Ok(self.b_h * t.powf(self.h - 0.5))
    }

    /// ν(t)², skipping the domain checks; caller guarantees t > 0.
    #[inline]
    pub(crate) fn nu_sq_unchecked(&self, t: f64) -> f64 {
        self.b_h * self.b_h * t.powf(2.0 * self.h - 1.0)
    }

    /// ∫_{t0}^{t1} ν(s)² ds = B_H²·(t1^{2H} - t0^{2H})/(2H), finite for every H in (0,1).
    pub fn nu_sq_integral(&self, t0: f64, t1: f64) -> f64 {
        let p = 2.0 * self.h;
        self.b_h * self.b_h * (t1.powf(p) - t0.powf(p)) / p
    }

    /// ψ_H(t) = psi_coef·t^{2H-1}.
    pub fn psi(&self, t: f64) -> f64 {
        self.psi_coef * t.powf(2.0 * self.h - 1.0)
    }
}

pub fn hurst_constants(h: f64) -> Result<HurstParams> {
    HurstParams::new(h)
}

pub fn nu(t: f64, hp: &HurstParams) -> Result<f64> {
    hp.nu(t)
}

/// Mean-reversion level θ(t) = ξ²ν(t)²/(4κ).
pub fn theta_of_t(t: f64, hp: &HurstParams, xi: f64, kappa: f64) -> Result<f64> {
    if !(kappa > 0.0) {
        return Err(Error::domain(format!("kappa must be positive, got {kappa}")));
    }
    let nu = hp.nu(t)?;
    Ok(xi * xi * nu * nu / (4.0 * kappa))
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use proptest::prelude::*;

    // (H, B_H, α_H, c_H, psi_coef) from 30-digit mpmath evaluation
    const REF: [(f64, f64, f64, f64, f64); 3] = [
        (
            0.1,
            85.383_049_084_527_55,
            0.118_474_958_638_205_14,
            0.448_325_076_859_949_7,
            4.750_098_297_496_108,
        ),
        (
            0.3,
            2.928_671_287_828_912_7,
            0.689_535_612_990_776_3,
            1.075_088_627_905_835_9,
            1.370_539_420_189_813,
        ),
        (
            0.9,
            29.044_563_328_108_68,
            0.118_474_958_638_205_14,
            0.049_813_897_428_883_3,
            8.311_328_493_224_835,
        ),
    ];

    #[test]
    fn half_is_brownian() {
        let hp = HurstParams::new(0.5).unwrap();
        assert_relative_eq!(hp.b_h, 1.0, max_relative = 1e-13);
        assert_relative_eq!(hp.c_h, 1.0, max_relative = 1e-13);
        assert_relative_eq!(hp.psi_coef, 1.0, max_relative = 1e-13);
        assert_relative_eq!(hp.alpha_h, 1.0, max_relative = 1e-13);
        for t in [1e-4, 0.3, 1.0, 17.0] {
            assert_relative_eq!(hp.nu(t).unwrap(), 1.0, max_relative = 1e-13);
        }
    }

    #[test]
    fn constants_match_reference() {
        for (h, b, a, c, p) in REF {
            let hp = HurstParams::new(h).unwrap();
            assert_relative_eq!(hp.b_h, b, max_relative = 1e-12);
            assert_relative_eq!(hp.alpha_h, a, max_relative = 1e-12);
            assert_relative_eq!(hp.c_h, c, max_relative = 1e-12);
            assert_relative_eq!(hp.psi_coef, p, max_relative = 1e-12);
        }
    }

    #[test]
    fn endpoints_rejected() {
        for h in [0.0, 1.0, -0.2, 1.5, f64::NAN] {
            assert!(matches!(HurstParams::new(h), Err(Error::Domain(_))));
        }
    }

    #[test]
    fn nu_at_one_is_b_h() {
        for h in [0.05, 0.3, 0.7] {
            let hp = HurstParams::new(h).unwrap();
            assert_eq!(hp.nu(1.0).unwrap(), hp.b_h);
        }
    }

    #[test]
    fn nu_rough_small_t() {
        let hp = HurstParams::new(0.1).unwrap();
        let want = hp.b_h * 0.01f64.powf(-0.4);
        let log_space = ((0.1 - 0.5) * 0.01f64.ln() + hp.b_h.ln()).exp();
        assert_relative_eq!(hp.nu(0.01).unwrap(), want, max_relative = 1e-15);
        assert_relative_eq!(want, log_space, max_relative = 1e-12);
    }

    #[test]
    fn nu_domain() {
        let rough = HurstParams::new(0.2).unwrap();
        assert!(rough.nu(0.0).is_err());
        assert!(rough.nu(-1.0).is_err());
        let smooth = HurstParams::new(0.7).unwrap();
        assert_eq!(smooth.nu(0.0).unwrap(), 0.0);
        assert!(smooth.nu(-1e-9).is_err());
    }

    #[test]
    fn theta_values() {
        let hp = HurstParams::new(0.5).unwrap();
        assert_relative_eq!(
            theta_of_t(1.0, &hp, 0.01, 1.0).unwrap(),
            2.5e-5,
            max_relative = 1e-12
        );
        assert_eq!(theta_of_t(1.0, &hp, 0.0, 1.0).unwrap(), 0.0);
        let rough = HurstParams::new(0.2).unwrap();
        assert_relative_eq!(
            theta_of_t(1.0, &rough, 0.3, 2.0).unwrap(),
            0.09 * rough.b_h * rough.b_h / 8.0,
            max_relative = 1e-14
        );
        assert!(theta_of_t(1.0, &hp, 0.01, 0.0).is_err());
    }

    #[test]
    fn nu_sq_integral_matches_quadrature() {
        let hp = HurstParams::new(0.3).unwrap();
        let q = crate::quad::integrate(|s| hp.nu_sq_unchecked(s), 0.0, 0.7, 1e-11, 500).unwrap();
        assert_relative_eq!(hp.nu_sq_integral(0.0, 0.7), q.value, max_relative = 1e-9);
    }

    #[test]
    fn grid_constants_positive_and_monotone() {
        for i in 1..20 {
            let h = 0.05 * i as f64;
            let hp = HurstParams::new(h).unwrap();
            for v in [hp.alpha_h, hp.c_h, hp.b_h, hp.psi_coef] {
                assert!(v.is_finite() && v > 0.0, "H={h}");
            }
            let ts = [0.01, 0.1, 0.5, 1.0, 2.0];
            let nus: Vec<f64> = ts.iter().map(|&t| hp.nu(t).unwrap()).collect();
            for w in nus.windows(2) {
                if h < 0.5 - 1e-12 {
                    assert!(w[1] < w[0]);
                } else if h > 0.5 + 1e-12 {
                    assert!(w[1] > w[0]);
                }
            }
        }
    }

    proptest! {
        #[test]
        fn nu_log_space_consistent(h in 0.01f64..0.99, t in 1e-4f64..10.0) {
            let hp = HurstParams::new(h).unwrap();
            let direct = hp.nu(t).unwrap();
            let logged = ((h - 0.5) * t.ln() + hp.b_h.ln()).exp();
            prop_assert!((direct - logged).abs() <= 1e-12 * direct);
        }
    }
}
