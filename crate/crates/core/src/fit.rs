//! Log-space regression of skew term structures, 𝒮 ≈ a·T^{b(H-1/2)}, and of
//! the level a(H) ≈ exp(c1·H + c0).

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::skew::SkewCurve;

/// Closeness to H = 1/2 below which the exponent cannot be rescaled.
const HALF_TOL: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PowerLawFit {
    pub h: f64,
    pub a: f64,
    /// Fitted log-log slope.
    pub slope: f64,
    /// slope/(H - 1/2); `None` at H = 1/2.
    pub b_scaled: Option<f64>,
    /// Residual sum of squares in log space.
    pub rss: f64,
}

impl PowerLawFit {
    pub fn predict(&self, t: f64) -> f64 {
        self.a * t.powf(self.slope)
    }
}

/// log a(H) = c1·H + c0.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ExponentialFit {
    pub c0: f64,
    pub c1: f64,
}

impl ExponentialFit {
    pub fn predict(&self, h: f64) -> f64 {
        (self.c1 * h + self.c0).exp()
    }
}

/// Single exponent b shared by several curves, with per-curve levels refit
/// at that exponent.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SharedExponentFit {
    pub b: f64,
    pub fits: Vec<PowerLawFit>,
}

struct Line {
    intercept: f64,
    slope: f64,
    rss: f64,
}

fn ols(x: &[f64], y: &[f64]) -> Result<Line> {
    let n = x.len() as f64;
    let mx = x.iter().sum::<f64>() / n;
    let my = y.iter().sum::<f64>() / n;
    let sxx: f64 = x.iter().map(|xi| (xi - mx) * (xi - mx)).sum();
    let sxy: f64 = x.iter().zip(y).map(|(xi, yi)| (xi - mx) * (yi - my)).sum();
    let scale = x.iter().map(|v| v.abs()).fold(0.0, f64::max).max(1.0);
    if !(sxx > 1e-24 * scale * scale * n) {
        return Err(Error::Singular("regressor values are all equal".into()));
    }
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    let rss = x
        .iter()
        .zip(y)
        .map(|(xi, yi)| {
            let r = yi - intercept - slope * xi;
            r * r
        })
        .sum();
    Ok(Line {
        intercept,
        slope,
        rss,
    })
}

fn log_data(curve: &SkewCurve) -> Result<(Vec<f64>, Vec<f64>)> {
    if curve.len() < 5 {
        return Err(Error::Degenerate(format!(
            "power-law fit needs at least 5 points, got {}",
            curve.len()
        )));
    }
    let mut lt = Vec::with_capacity(curve.len());
    let mut ls = Vec::with_capacity(curve.len());
    for &(t, s) in &curve.points {
        if !(s > 0.0) || !s.is_finite() {
            return Err(Error::Degenerate(format!(
                "skew must be positive, got {s} at T = {t}"
            )));
        }
        if !(t > 0.0) {
            return Err(Error::Degenerate(format!("maturity must be positive, got {t}")));
        }
        lt.push(t.ln());
        ls.push(s.ln());
    }
    Ok((lt, ls))
}

fn scaled(slope: f64, h: f64) -> Option<f64> {
    let d = h - 0.5;
    (d.abs() > HALF_TOL).then(|| slope / d)
}

/// OLS of log 𝒮 on log T.
pub fn fit_power_law(curve: &SkewCurve) -> Result<PowerLawFit> {
    let (lt, ls) = log_data(curve)?;
    let line = ols(&lt, &ls)?;
    Ok(PowerLawFit {
        h: curve.h,
        a: line.intercept.exp(),
        slope: line.slope,
        b_scaled: scaled(line.slope, curve.h),
        rss: line.rss,
    })
}

/// OLS of log a on H for (H, a) pairs.
pub fn fit_exponential(points: &[(f64, f64)]) -> Result<ExponentialFit> {
    let mut hs: Vec<f64> = points.iter().map(|p| p.0).collect();
    hs.sort_by(f64::total_cmp);
    hs.dedup();
    if hs.len() < 3 {
        return Err(Error::Singular(format!(
            "exponential fit needs at least 3 distinct H, got {}",
            hs.len()
        )));
    }
    if let Some(&(h, a)) = points.iter().find(|p| !(p.1 > 0.0)) {
        return Err(Error::Degenerate(format!(
            "level must be positive, got {a} at H = {h}"
        )));
    }
    let x: Vec<f64> = points.iter().map(|p| p.0).collect();
    let y: Vec<f64> = points.iter().map(|p| p.1.ln()).collect();
    let line = ols(&x, &y)?;
    Ok(ExponentialFit {
        c0: line.intercept,
        c1: line.slope,
    })
}

pub fn fit_a_of_h(fits: &[PowerLawFit]) -> Result<ExponentialFit> {
    let pts: Vec<(f64, f64)> = fits.iter().map(|f| (f.h, f.a)).collect();
    fit_exponential(&pts)
}

/// Pooled exponent b as the 1/rss-weighted mean of the per-curve scaled
/// slopes (curves at H = 1/2 are fit but not pooled), then per-curve levels
/// refit with the exponent fixed at b(H-1/2).
pub fn fit_shared_exponent(curves: &[SkewCurve]) -> Result<SharedExponentFit> {
    if curves.len() < 2 {
        return Err(Error::Degenerate(format!(
            "shared-exponent fit needs at least 2 curves, got {}",
            curves.len()
        )));
    }
    let free: Vec<PowerLawFit> = curves.iter().map(fit_power_law).collect::<Result<_>>()?;
    let pooled: Vec<(f64, f64)> = free
        .iter()
        .filter_map(|f| f.b_scaled.map(|b| (b, f.rss)))
        .collect();
    if pooled.is_empty() {
        return Err(Error::Degenerate("no curve with H != 1/2 to pool".into()));
    }
    let exact: Vec<f64> = pooled.iter().filter(|p| p.1 == 0.0).map(|p| p.0).collect();
    let b = if exact.is_empty() {
        let wsum: f64 = pooled.iter().map(|p| 1.0 / p.1).sum();
        pooled.iter().map(|p| p.0 / p.1).sum::<f64>() / wsum
    } else {
        exact.iter().sum::<f64>() / exact.len() as f64
    };

    let fits = curves
        .iter()
        .map(|c| {
            let (lt, ls) = log_data(c)?;
            let slope = b * (c.h - 0.5);
            let n = lt.len() as f64;
            let intercept = lt.iter().zip(&ls).map(|(x, y)| y - slope * x).sum::<f64>() / n;
            let rss = lt
                .iter()
                .zip(&ls)
                .map(|(x, y)| (y - intercept - slope * x).powi(2))
                .sum();
            Ok(PowerLawFit {
                h: c.h,
                a: intercept.exp(),
                slope,
                b_scaled: scaled(slope, c.h).map(|_| b),
                rss,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(SharedExponentFit { b, fits })
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use proptest::prelude::*;

    fn synthetic(h: f64, a: f64, b: f64, n: usize) -> SkewCurve {
        let grid = crate::skew::log_grid(0.001, 0.3, n).unwrap();
        let pts = grid.iter().map(|&t| (t, a * t.powf(b * (h - 0.5)))).collect();
        SkewCurve::new(h, pts).unwrap()
    }

    #[test]
    fn exact_power_law() {
        let grid = crate::skew::log_grid(0.001, 0.3, 20).unwrap();
        let curve = SkewCurve::new(0.1, grid.iter().map(|&t| (t, 0.02 * t.powf(-0.9))).collect()).unwrap();
        let f = fit_power_law(&curve).unwrap();
        assert_relative_eq!(f.a, 0.02, max_relative = 1e-12);
        assert_relative_eq!(f.b_scaled.unwrap(), 2.25, max_relative = 1e-12);
        assert!(f.rss < 1e-24);
    }

    #[test]
    fn half_has_no_scaled_exponent() {
        let f = fit_power_law(&synthetic(0.5, 0.0002, 2.3, 10)).unwrap();
        assert!(f.b_scaled.is_none());
        assert!(f.slope.abs() < 1e-12);
    }

    #[test]
    fn degenerate_inputs() {
        let few = SkewCurve::new(0.1, vec![(0.1, 1.0), (0.2, 1.0), (0.3, 1.0), (0.4, 1.0)]).unwrap();
        assert!(matches!(fit_power_law(&few), Err(Error::Degenerate(_))));
        let mut neg = synthetic(0.1, 0.02, 2.3, 8);
        neg.points[3].1 = -1e-3;
        assert!(matches!(fit_power_law(&neg), Err(Error::Degenerate(_))));
        let same_t = SkewCurve {
            h: 0.1,
            points: vec![(0.1, 1.0); 6],
        };
        assert!(matches!(fit_power_law(&same_t), Err(Error::Singular(_))));
    }

    #[test]
    fn exponential_round_trip() {
        let pts: Vec<(f64, f64)> = [0.1, 0.2, 0.3, 0.4, 0.47, 0.5]
            .iter()
            .map(|&h| (h, (-12.5927 * h - 2.42651f64).exp()))
            .collect();
        let e = fit_exponential(&pts).unwrap();
        assert_relative_eq!(e.c1, -12.5927, max_relative = 1e-12);
        assert_relative_eq!(e.c0, -2.42651, max_relative = 1e-12);
        assert!(matches!(
            fit_exponential(&[(0.1, 1.0), (0.1, 2.0)]),
            Err(Error::Singular(_))
        ));
        assert!(matches!(
            fit_exponential(&[(0.1, 1.0), (0.1, 2.0), (0.2, 3.0), (0.2, 1.0)]),
            Err(Error::Singular(_))
        ));
    }

    #[test]
    fn shared_exponent_recovery() {
        let curves: Vec<SkewCurve> = [0.1, 0.2, 0.3, 0.4, 0.47, 0.5]
            .iter()
            .map(|&h| synthetic(h, (-12.5927 * h - 2.42651f64).exp(), 2.3, 50))
            .collect();
        let s = fit_shared_exponent(&curves).unwrap();
        assert!((s.b - 2.3).abs() < 1e-10);
        for (f, c) in s.fits.iter().zip(&curves) {
            assert_relative_eq!(f.a, (-12.5927 * c.h - 2.42651f64).exp(), max_relative = 1e-10);
        }
        assert!(fit_shared_exponent(&curves[..1]).is_err());
    }

    #[test]
    fn shared_exponent_weights_noisy_curves_less() {
        let clean = synthetic(0.1, 0.02, 2.0, 20);
        let mut noisy = synthetic(0.3, 0.001, 3.0, 20);
        for (i, p) in noisy.points.iter_mut().enumerate() {
            p.1 *= if i % 2 == 0 { 1.3 } else { 0.7 };
        }
        let mut slightly = synthetic(0.2, 0.01, 2.0, 20);
        for (i, p) in slightly.points.iter_mut().enumerate() {
            p.1 *= if i % 2 == 0 { 1.0001 } else { 0.9999 };
        }
        let s = fit_shared_exponent(&[slightly, noisy]).unwrap();
        assert!((s.b - 2.0).abs() < 0.01, "b = {}", s.b);
        let exact = fit_shared_exponent(&[clean, synthetic(0.3, 0.001, 3.0, 20)]);
        assert!(exact.unwrap().b.is_finite());
    }

    proptest! {
        #[test]
        fn scale_consistent(lambda in 1e-3f64..1e3, h in 0.05f64..0.45, b in 1.0f64..3.5) {
            let base = synthetic(h, 0.01, b, 15);
            let mut curve = base.clone();
            for (i, p) in curve.points.iter_mut().enumerate() {
                p.1 *= 1.0 + 0.05 * ((i * 7) % 5) as f64;
            }
            let f0 = fit_power_law(&curve).unwrap();
            let mut scaled_curve = curve.clone();
            for p in &mut scaled_curve.points {
                p.1 *= lambda;
            }
            let f1 = fit_power_law(&scaled_curve).unwrap();
            prop_assert!((f1.a / f0.a / lambda - 1.0).abs() < 1e-10);
            prop_assert!((f1.b_scaled.unwrap() - f0.b_scaled.unwrap()).abs() < 1e-9 * f0.b_scaled.unwrap().abs().max(1.0));
        }

        #[test]
        fn refit_is_idempotent(h in 0.05f64..0.45, jitter in 0.0f64..0.2) {
            let mut curve = synthetic(h, 0.01, 2.3, 12);
            for (i, p) in curve.points.iter_mut().enumerate() {
                p.1 *= 1.0 + jitter * ((i * 3) % 4) as f64;
            }
            let f = fit_power_law(&curve).unwrap();
            let pts = curve.points.iter().map(|&(t, _)| (t, f.predict(t))).collect();
            let g = fit_power_law(&SkewCurve::new(h, pts).unwrap()).unwrap();
            prop_assert!((g.a / f.a - 1.0).abs() < 1e-12);
            prop_assert!((g.slope - f.slope).abs() < 1e-12 * f.slope.abs().max(1.0));
        }
    }
}
