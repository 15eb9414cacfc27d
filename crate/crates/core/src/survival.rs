//! Survival amplitude and the first orthogonalization time.
//!
//! `S(t) = sum_n p_n exp(-2 pi i E_n t / h)` for a spectral state. Zeros of
//! `|S|^2` are tangential (the function is non-negative), so the finder scans
//! an oversampled grid for local minima and refines each candidate by
//! bisecting the sign change of `d|S|^2/dt`, rather than hunting for sign
//! changes of `S` itself. A state counts as orthogonal when `|S| <= tolerance`
//! (default 1e-9); generic states never hit an exact zero.
//!
//! The scan starts at `h / (2 e_max)` — no zero can occur earlier — and stops
//! at a horizon of a few multiples of the slower of the two speed-limit
//! bounds, past which nothing more is claimed. Oversampling at 64 points per
//! fastest-phase period is a heuristic: it cannot certify that no zero hides
//! below grid resolution, but no trigonometric polynomial at desk scale slips
//! through in practice.

use num_complex::Complex64;
use serde::Serialize;

use crate::state::SpectralState;
use crate::units::UnitConvention;
use crate::{QslError, Result};

/// `S(t)`; modulus never exceeds 1 (up to rounding).
pub fn survival_amplitude(s: &SpectralState, t: f64, units: &UnitConvention) -> Complex64 {
    let w = -std::f64::consts::TAU * t / units.h;
    let mut acc = Complex64::ZERO;
    for lv in s.levels() {
        acc += lv.probability * Complex64::cis(w * lv.energy);
    }
    acc
}

/// `d|S(t)|^2/dt`, computed analytically as `2 Re(conj(S) S')`.
pub fn survival_prob_derivative(s: &SpectralState, t: f64, units: &UnitConvention) -> f64 {
    let w = -std::f64::consts::TAU / units.h;
    let mut amp = Complex64::ZERO;
    let mut damp = Complex64::ZERO;
    for lv in s.levels() {
        let phase = Complex64::cis(w * lv.energy * t);
        amp += lv.probability * phase;
        damp += lv.probability * lv.energy * phase * Complex64::new(0.0, w);
    }
    2.0 * (amp.conj() * damp).re
}

/// Zero finder controls. All fields must be strictly positive.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ZeroFinderConfig {
    /// Orthogonality threshold on `|S|`.
    pub tolerance: f64,
    /// Grid points per period `h / e_max` of the fastest phase.
    pub oversample: u32,
    /// Scan horizon as a multiple of `max(tau_mt, tau_ml)`.
    pub horizon_factor: f64,
    /// Width of the refined time bracket.
    pub refine_tolerance: f64,
    /// Absolute horizon override; when set, `horizon_factor` is ignored.
    pub horizon: Option<f64>,
}

impl Default for ZeroFinderConfig {
    fn default() -> Self {
        Self {
            tolerance: 1e-9,
            oversample: 64,
            horizon_factor: 8.0,
            refine_tolerance: 1e-13,
            horizon: None,
        }
    }
}

impl ZeroFinderConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.tolerance.is_finite() && self.tolerance > 0.0) {
            return Err(QslError::InvalidConfig("tolerance must be > 0".into()));
        }
        if self.oversample < 8 {
            return Err(QslError::InvalidConfig("oversample must be >= 8".into()));
        }
        if !(self.horizon_factor.is_finite() && self.horizon_factor > 0.0) {
            return Err(QslError::InvalidConfig("horizon_factor must be > 0".into()));
        }
        if !(self.refine_tolerance.is_finite() && self.refine_tolerance > 0.0) {
            return Err(QslError::InvalidConfig("refine_tolerance must be > 0".into()));
        }
        if let Some(hz) = self.horizon {
            if !(hz.is_finite() && hz > 0.0) {
                return Err(QslError::InvalidConfig("horizon must be > 0".into()));
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum OrthoStatus {
    Found,
    NotFoundWithinHorizon,
}

/// Outcome of the first-zero search.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct OrthoResult {
    pub status: OrthoStatus,
    /// Earliest refined orthogonalization time, when found.
    pub tau: Option<f64>,
    /// Smallest `|S|` seen over the scan (equals `|S(tau)|` when found).
    pub min_overlap: f64,
    /// Time at which `min_overlap` was attained.
    pub argmin_time: f64,
    /// End of the scanned interval.
    pub horizon: f64,
    pub tolerance: f64,
}

impl OrthoResult {
    pub fn found(&self) -> bool {
        self.status == OrthoStatus::Found
    }
}

/// Locates the earliest time with `|S(t)| <= cfg.tolerance`.
///
/// States with fewer than two levels never orthogonalize and report
/// not-found with `min_overlap = 1`.
pub fn first_orthogonal_time(
    s: &SpectralState,
    cfg: &ZeroFinderConfig,
    units: &UnitConvention,
) -> Result<OrthoResult> {
    cfg.validate()?;

    if s.len() < 2 {
        return Ok(OrthoResult {
            status: OrthoStatus::NotFoundWithinHorizon,
            tau: None,
            min_overlap: 1.0,
            argmin_time: 0.0,
            horizon: 0.0,
            tolerance: cfg.tolerance,
        });
    }

    let h = units.h;
    let m = s.moments();
    let e_max = m.e_max;
    let tau_mt = h / (4.0 * m.energy_spread);
    let tau_ml = h / (4.0 * m.mean_energy);
    let horizon = cfg.horizon.unwrap_or(cfg.horizon_factor * tau_mt.max(tau_ml));
    let t_start = h / (2.0 * e_max);
    let step = h / e_max / cfg.oversample as f64;
    let tol_sq = cfg.tolerance * cfg.tolerance;

    let f = |t: f64| survival_amplitude(s, t, units).norm_sqr();
    let g = |t: f64| survival_prob_derivative(s, t, units);

    // A horizon below h/(2 e_max) leaves nothing to scan: no zero can occur
    // that early.
    if horizon <= t_start {
        return Ok(OrthoResult {
            status: OrthoStatus::NotFoundWithinHorizon,
            tau: None,
            min_overlap: f(horizon).max(0.0).sqrt(),
            argmin_time: horizon,
            horizon,
            tolerance: cfg.tolerance,
        });
    }

    let n_steps = (((horizon - t_start) / step).ceil() as usize).max(1);

    let mut best = f64::INFINITY;
    let mut best_t = t_start;
    let track = |val: f64, t: f64, best: &mut f64, best_t: &mut f64| {
        if val < *best {
            *best = val;
            *best_t = t;
        }
    };

    let mut prev = f(t_start);
    track(prev, t_start, &mut best, &mut best_t);
    let mut cur = f(t_start + step);
    track(cur, t_start + step, &mut best, &mut best_t);

    // Walk the grid; index i names the center of a (prev, cur, next) window.
    // The last window may overshoot the horizon by less than one step.
    for i in 1..=n_steps {
        let t_i = t_start + i as f64 * step;
        let next = f(t_i + step);
        track(next, t_i + step, &mut best, &mut best_t);

        let left_min = i == 1 && prev <= cur;
        let interior_min = cur <= prev && cur <= next;
        if left_min || interior_min {
            let (lo, hi) = if left_min {
                (t_start - step, t_start + step)
            } else {
                (t_i - step, t_i + step)
            };
            let t_ref = refine_minimum(&f, &g, lo, hi, cfg.refine_tolerance);
            let t_ref = t_ref.max(t_start);
            let val = f(t_ref);
            track(val, t_ref, &mut best, &mut best_t);
            if val <= tol_sq {
                return Ok(OrthoResult {
                    status: OrthoStatus::Found,
                    tau: Some(t_ref),
                    min_overlap: val.sqrt(),
                    argmin_time: t_ref,
                    horizon,
                    tolerance: cfg.tolerance,
                });
            }
        }
        prev = cur;
        cur = next;
    }

    Ok(OrthoResult {
        status: OrthoStatus::NotFoundWithinHorizon,
        tau: None,
        min_overlap: best.max(0.0).sqrt(),
        argmin_time: best_t,
        horizon,
        tolerance: cfg.tolerance,
    })
}

/// Refines a bracketed minimum of `f`. Prefers bisection on the derivative
/// sign change (robust through tangential double roots); falls back to
/// golden-section when the bracket does not show one.
fn refine_minimum(
    f: &dyn Fn(f64) -> f64,
    g: &dyn Fn(f64) -> f64,
    mut lo: f64,
    mut hi: f64,
    tol: f64,
) -> f64 {
    let (glo, ghi) = (g(lo), g(hi));
    if glo <= 0.0 && ghi >= 0.0 {
        let mut a = lo;
        let mut b = hi;
        while b - a > tol {
            let mid = 0.5 * (a + b);
            if g(mid) <= 0.0 {
                a = mid;
            } else {
                b = mid;
            }
        }
        return 0.5 * (a + b);
    }

    // Golden-section on f over [lo, hi].
    let phi = 0.5 * (3.0 - 5f64.sqrt());
    let mut x1 = lo + phi * (hi - lo);
    let mut x2 = hi - phi * (hi - lo);
    let mut f1 = f(x1);
    let mut f2 = f(x2);
    while hi - lo > tol {
        if f1 <= f2 {
            hi = x2;
            x2 = x1;
            f2 = f1;
            x1 = lo + phi * (hi - lo);
            f1 = f(x1);
        } else {
            lo = x1;
            x1 = x2;
            f1 = f2;
            x2 = hi - phi * (hi - lo);
            f2 = f(x2);
        }
    }
    0.5 * (lo + hi)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn two_level() -> SpectralState {
        SpectralState::new([(0.0, 0.5), (1.0, 0.5)]).unwrap()
    }

    fn u() -> UnitConvention {
        UnitConvention::default()
    }

    #[test]
    fn survival_at_zero_is_one() {
        let s = two_level();
        let v = survival_amplitude(&s, 0.0, &u());
        assert!((v - Complex64::new(1.0, 0.0)).norm() < 1e-15);
    }

    #[test]
    fn survival_quarter_period() {
        let s = two_level();
        let v = survival_amplitude(&s, 0.25, &u());
        assert!((v - Complex64::new(0.5, -0.5)).norm() < 1e-14);
    }

    #[test]
    fn survival_half_period_is_zero() {
        // Closed-form root of (1 + exp(-2 pi i E1 t)) / 2 at t = 1/(2 E1).
        let s = two_level();
        let v = survival_amplitude(&s, 0.5, &u());
        assert!(v.norm() < 1e-15);
    }

    #[test]
    fn derivative_vanishes_at_extrema() {
        let s = two_level();
        assert!(survival_prob_derivative(&s, 0.0, &u()).abs() < 1e-15);
        // d|S|^2/dt = 0 wherever S(t) = 0.
        assert!(survival_prob_derivative(&s, 0.5, &u()).abs() < 1e-12);
    }

    #[test]
    fn derivative_quarter_period_matches_closed_form_and_fd() {
        // |S|^2 = (1 + cos 2 pi t) / 2, so the derivative at t = 1/4 is -pi.
        let s = two_level();
        let d = survival_prob_derivative(&s, 0.25, &u());
        assert!((d + std::f64::consts::PI).abs() < 1e-12, "{d}");

        let eps = 1e-6;
        let f = |t: f64| survival_amplitude(&s, t, &u()).norm_sqr();
        let fd = (f(0.25 + eps) - f(0.25 - eps)) / (2.0 * eps);
        assert!((d - fd).abs() < 1e-6);
    }

    #[test]
    fn finds_two_level_zero() {
        let r = first_orthogonal_time(&two_level(), &ZeroFinderConfig::default(), &u()).unwrap();
        assert!(r.found());
        assert!((r.tau.unwrap() - 0.5).abs() < 1e-12, "{:?}", r.tau);
        assert!(r.min_overlap <= 1e-9);
        assert!((r.argmin_time - r.tau.unwrap()).abs() < 1e-12);
    }

    #[test]
    fn skewed_two_level_never_orthogonalizes() {
        // |S| = |0.9 + 0.1 exp(-2 pi i t)| has minimum 0.8 at t = 1/2.
        let s = SpectralState::new([(0.0, 0.9), (1.0, 0.1)]).unwrap();
        let r = first_orthogonal_time(&s, &ZeroFinderConfig::default(), &u()).unwrap();
        assert!(!r.found());
        assert!((r.min_overlap - 0.8).abs() < 1e-9, "{}", r.min_overlap);
        assert!((r.argmin_time - 0.5).abs() < 1e-6, "{}", r.argmin_time);
    }

    #[test]
    fn single_level_reports_not_found() {
        let s = SpectralState::new([(0.0, 1.0)]).unwrap();
        let r = first_orthogonal_time(&s, &ZeroFinderConfig::default(), &u()).unwrap();
        assert!(!r.found());
        assert_eq!(r.min_overlap, 1.0);
    }

    #[test]
    fn invalid_config_rejected() {
        let mut cfg = ZeroFinderConfig::default();
        cfg.oversample = 4;
        assert!(first_orthogonal_time(&two_level(), &cfg, &u()).is_err());
        let mut cfg = ZeroFinderConfig::default();
        cfg.tolerance = 0.0;
        assert!(first_orthogonal_time(&two_level(), &cfg, &u()).is_err());
    }

    #[test]
    fn respects_unit_convention() {
        // Doubling h doubles every time scale.
        let s = two_level();
        let u2 = UnitConvention::new(2.0).unwrap();
        let r = first_orthogonal_time(&s, &ZeroFinderConfig::default(), &u2).unwrap();
        assert!((r.tau.unwrap() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn periodic_spectrum_zero_is_in_first_period() {
        // All energies are multiples of E1 = 0.5, so S has period h/E1 = 2.
        let s = SpectralState::new([(0.0, 0.25), (0.5, 0.5), (1.0, 0.25)]).unwrap();
        let period = 2.0;
        let t = 0.37;
        let a = survival_amplitude(&s, t, &u());
        let b = survival_amplitude(&s, t + period, &u());
        assert!((a - b).norm() < 1e-12);
        let r = first_orthogonal_time(&s, &ZeroFinderConfig::default(), &u()).unwrap();
        assert!(r.found());
        assert!(r.tau.unwrap() < period);
        // (1 + e^{-i pi t})^2 / 4 = 0 at t = 1. S has a double zero there, so
        // |S|^2 is quartic and rounding noise blurs the location to ~1e-8.
        assert!((r.tau.unwrap() - 1.0).abs() < 2e-8);
    }
}
