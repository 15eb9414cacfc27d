//! Speed-limit bounds, the two trigonometric inequality margins behind them,
//! and the spectrum reduction moves (folding, reflection).
//!
//! The unified lower bound on the orthogonalization time is
//! `max(h/4E, h/4dE)`; it is attained only by the equal-weight two-level
//! state (`alpha = dE/E = 1`) and approached asymptotically otherwise. The
//! normalized "keel" value `2 tau (E + dE) / h` of any orthogonalizing state
//! therefore sits on or above the curve `(1 + exp|ln alpha|)/2`.

use serde::{Serialize, Serializer};

use crate::state::{Moments, SpectralState};
use crate::survival::survival_amplitude;
use crate::units::UnitConvention;
use crate::{QslError, Result};

/// `|S(tau)|` under which a state counts as orthogonal for reduction.
pub const REDUCE_ORTHO_TOL: f64 = 1e-9;

fn serialize_time<S: Serializer>(v: &f64, s: S) -> std::result::Result<S::Ok, S::Error> {
    if v.is_finite() {
        s.serialize_f64(*v)
    } else {
        s.serialize_str("inf")
    }
}

/// The closed-form lower bounds for one state.
///
/// Infinite bounds (degenerate moments) are kept as flag values and rendered
/// as `"inf"`, never raised as errors.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct BoundReport {
    /// Mandelstam-Tamm: `h / (4 dE)`.
    #[serde(serialize_with = "serialize_time")]
    pub tau_mt: f64,
    /// Margolus-Levitin: `h / (4 E)`.
    #[serde(serialize_with = "serialize_time")]
    pub tau_ml: f64,
    /// `max(tau_mt, tau_ml)`.
    #[serde(serialize_with = "serialize_time")]
    pub tau_unified: f64,
    /// Top-level bound: `h / (2 e_max)`.
    #[serde(serialize_with = "serialize_time")]
    pub tau_emax: f64,
    /// `2 tau_unified (E + dE) / h`, equal to `(1 + exp|ln alpha|)/2`.
    #[serde(serialize_with = "serialize_time")]
    pub keel_value_bound: f64,
    pub alpha: Option<f64>,
}

/// The keel bound curve `(1 + exp|ln alpha|) / 2`.
pub fn keel_bound(alpha: f64) -> f64 {
    0.5 * (1.0 + alpha.ln().abs().exp())
}

/// Computes every bound for the given moments.
///
/// Fails with "ground state only" when both `E` and `dE` vanish.
pub fn bound_report(m: &Moments, units: &UnitConvention) -> Result<BoundReport> {
    if m.mean_energy == 0.0 && m.energy_spread == 0.0 {
        return Err(QslError::Domain("ground state only".into()));
    }
    let h = units.h;
    let tau_mt = if m.energy_spread > 0.0 {
        h / (4.0 * m.energy_spread)
    } else {
        f64::INFINITY
    };
    let tau_ml = if m.mean_energy > 0.0 {
        h / (4.0 * m.mean_energy)
    } else {
        f64::INFINITY
    };
    let tau_unified = tau_mt.max(tau_ml);
    let tau_emax = if m.e_max > 0.0 {
        h / (2.0 * m.e_max)
    } else {
        f64::INFINITY
    };
    let keel_value_bound = 2.0 * tau_unified * (m.mean_energy + m.energy_spread) / h;
    Ok(BoundReport {
        tau_mt,
        tau_ml,
        tau_unified,
        tau_emax,
        keel_value_bound,
        alpha: m.alpha,
    })
}

/// Margin of `cos x >= 1 - (4/pi^2) x sin x - (2/pi^2) x^2`, valid for every
/// real `x`; equality exactly at `x = 0` and `x = +-pi`.
pub fn trig_margin_a(x: f64) -> f64 {
    let pi2 = std::f64::consts::PI * std::f64::consts::PI;
    x.cos() - (1.0 - 4.0 / pi2 * x * x.sin() - 2.0 / pi2 * x * x)
}

/// Margin of `cos x >= 1 - (2/pi)(x + sin x)`, valid for `x >= 0`;
/// equality exactly at `x = 0` and `x = pi`.
pub fn trig_margin_b(x: f64) -> Result<f64> {
    if x < 0.0 {
        return Err(QslError::Domain(format!(
            "trig_margin_b is valid only for x >= 0, got {x}"
        )));
    }
    Ok(x.cos() - (1.0 - 2.0 / std::f64::consts::PI * (x + x.sin())))
}

/// Folds every level with `E >= h/tau` down by multiples of `h/tau`.
///
/// The phases `exp(-2 pi i E tau / h)` are unchanged, so `S(tau)` is exactly
/// preserved while the mean energy drops by `h/tau` per fold. Colliding
/// levels merge; the ground level stays at 0.
pub fn fold_spectrum(s: &SpectralState, tau: f64, units: &UnitConvention) -> Result<SpectralState> {
    if !(tau.is_finite() && tau > 0.0) {
        return Err(QslError::InvalidConfig(format!(
            "fold time must be > 0, got {tau}"
        )));
    }
    let q = units.h / tau;
    let folded = s.levels().iter().map(|lv| {
        let k = (lv.energy / q).floor();
        let mut r = lv.energy - k * q;
        // Treat energies within rounding of the next multiple as exact.
        if r >= q * (1.0 - 1e-12) {
            r = 0.0;
        }
        (r.max(0.0), lv.probability)
    });
    SpectralState::new(folded)
}

/// Maps every level `E -> e_max - E`. `|S(t)|` is unchanged for all `t`
/// (the reflected amplitude is a unit phase times the conjugate); the mean
/// energy becomes `e_max - E`.
pub fn reflect_spectrum(s: &SpectralState) -> SpectralState {
    let e_max = s.e_max();
    SpectralState::new(
        s.levels()
            .iter()
            .map(|lv| (e_max - lv.energy, lv.probability)),
    )
    .expect("reflection preserves a valid spectrum")
}

/// Reduces a state that is orthogonal at `tau` to an equivalent one with
/// `e_max < h / tau`, picking whichever of the folded state and its
/// reflection has the smaller mean energy (so `E <= e_max / 2`).
pub fn reduce_spectrum(
    s: &SpectralState,
    tau: f64,
    units: &UnitConvention,
) -> Result<SpectralState> {
    let overlap = survival_amplitude(s, tau, units).norm();
    if overlap > REDUCE_ORTHO_TOL {
        return Err(QslError::Domain("state not orthogonal at tau".into()));
    }
    let folded = fold_spectrum(s, tau, units)?;
    let reflected = reflect_spectrum(&folded);
    if reflected.moments().mean_energy < folded.moments().mean_energy {
        Ok(reflected)
    } else {
        Ok(folded)
    }
}

/// True when the state is the equal-weight two-level form that attains the
/// `h / (2 e_max)` bound, up to `tol` on the probabilities.
pub fn is_equal_two_level(s: &SpectralState, tol: f64) -> bool {
    s.len() == 2 && (s.levels()[0].probability - 0.5).abs() <= tol
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::survival::{first_orthogonal_time, ZeroFinderConfig};

    fn u() -> UnitConvention {
        UnitConvention::default()
    }

    fn moments_of(levels: &[(f64, f64)]) -> Moments {
        SpectralState::new(levels.iter().copied()).unwrap().moments()
    }

    #[test]
    fn report_equal_two_level() {
        let r = bound_report(&moments_of(&[(0.0, 0.5), (1.0, 0.5)]), &u()).unwrap();
        assert!((r.tau_mt - 0.5).abs() < 1e-15);
        assert!((r.tau_ml - 0.5).abs() < 1e-15);
        assert!((r.tau_unified - 0.5).abs() < 1e-15);
        assert!((r.tau_emax - 0.5).abs() < 1e-15);
        assert!((r.keel_value_bound - 1.0).abs() < 1e-12);
    }

    #[test]
    fn report_alpha_one_third() {
        // E = 0.75, dE = 0.25: MT dominates, keel bound hits 2.
        let m = Moments {
            mean_energy: 0.75,
            energy_spread: 0.25,
            alpha: Some(1.0 / 3.0),
            e_max: 1.0,
        };
        let r = bound_report(&m, &u()).unwrap();
        assert!((r.tau_mt - 1.0).abs() < 1e-15);
        assert!((r.tau_ml - 1.0 / 3.0).abs() < 1e-15);
        assert!((r.tau_unified - 1.0).abs() < 1e-15);
        assert!((r.keel_value_bound - 2.0).abs() < 1e-12);
        assert!((keel_bound(1.0 / 3.0) - 2.0).abs() < 1e-12);
    }

    #[test]
    fn report_alpha_three() {
        let m = Moments {
            mean_energy: 0.5,
            energy_spread: 1.5,
            alpha: Some(3.0),
            e_max: 4.0,
        };
        let r = bound_report(&m, &u()).unwrap();
        assert!((r.tau_unified - r.tau_ml).abs() < 1e-15);
        assert!((r.tau_unified - 0.5).abs() < 1e-15);
        assert!((r.keel_value_bound - 2.0).abs() < 1e-12);
    }

    #[test]
    fn report_ground_only_errors() {
        let err = bound_report(&moments_of(&[(0.0, 1.0)]), &u()).unwrap_err();
        assert!(err.to_string().contains("ground state only"));
    }

    #[test]
    fn degenerate_bounds_render_as_inf_not_errors() {
        // Hand-built moments with a vanishing spread: the MT bound is an
        // explicit infinity flag and serializes as the string "inf".
        let m = Moments {
            mean_energy: 1.0,
            energy_spread: 0.0,
            alpha: None,
            e_max: 1.0,
        };
        let r = bound_report(&m, &u()).unwrap();
        assert!(r.tau_mt.is_infinite());
        assert!((r.tau_ml - 0.25).abs() < 1e-15);
        let json = serde_json::to_value(&r).unwrap();
        assert_eq!(json["tau_mt"], "inf");
        assert!(json["tau_ml"].is_number());
    }

    #[test]
    fn keel_identity_matches_closed_form() {
        for &(e, de) in &[(0.75, 0.25), (0.5, 0.5), (0.4, 1.3), (2.0, 0.3)] {
            let m = Moments {
                mean_energy: e,
                energy_spread: de,
                alpha: Some(de / e),
                e_max: e + de,
            };
            let r = bound_report(&m, &u()).unwrap();
            assert!(
                (r.keel_value_bound - keel_bound(de / e)).abs() < 1e-12,
                "E={e} dE={de}"
            );
        }
    }

    #[test]
    fn trig_margin_a_values() {
        use std::f64::consts::PI;
        assert!(trig_margin_a(0.0).abs() < 1e-15);
        assert!(trig_margin_a(PI).abs() < 1e-12);
        assert!(trig_margin_a(-PI).abs() < 1e-12);
        let expected = 2.0 / PI - 0.5;
        assert!((trig_margin_a(PI / 2.0) - expected).abs() < 1e-12);
    }

    #[test]
    fn trig_margin_b_values() {
        use std::f64::consts::PI;
        assert!(trig_margin_b(0.0).unwrap().abs() < 1e-15);
        assert!(trig_margin_b(PI).unwrap().abs() < 1e-12);
        assert!((trig_margin_b(PI / 2.0).unwrap() - 2.0 / PI).abs() < 1e-12);
        assert!(trig_margin_b(-0.1).is_err());
    }

    #[test]
    fn trig_margins_detect_equality_near_the_known_points() {
        use std::f64::consts::PI;
        // Both margins are quadratic around their equality points except
        // margin_b at 0, where the growth is linear (4x/pi).
        for probe in [PI + 1e-7, PI - 1e-7, 1e-7, -1e-7, -PI + 1e-7] {
            assert!(trig_margin_a(probe) < 1e-13, "margin at {probe}");
        }
        for probe in [PI + 1e-7, PI - 1e-7, 1e-14] {
            assert!(trig_margin_b(probe).unwrap() < 1e-13, "margin at {probe}");
        }
        // A detection threshold of 1e-13 only fires within 1e-6 of the
        // equality sets: everything at distance 1e-5 clears it.
        for probe in [1e-5, PI - 1e-5, PI + 1e-5, 2.0, 5.0] {
            assert!(trig_margin_a(probe) > 1e-13);
            assert!(trig_margin_b(probe).unwrap() > 1e-13);
        }
    }

    #[test]
    fn fold_brings_levels_below_h_over_tau() {
        let s = SpectralState::new([(0.0, 0.5), (3.0, 0.5)]).unwrap();
        let before = survival_amplitude(&s, 0.5, &u());
        let folded = fold_spectrum(&s, 0.5, &u()).unwrap();
        assert_eq!(folded.len(), 2);
        assert!((folded.levels()[1].energy - 1.0).abs() < 1e-12);
        assert!((s.moments().mean_energy - 1.5).abs() < 1e-15);
        assert!((folded.moments().mean_energy - 0.5).abs() < 1e-15);
        let after = survival_amplitude(&folded, 0.5, &u());
        assert!((before - after).norm() < 1e-12);
        assert!(before.norm() < 1e-12);
    }

    #[test]
    fn fold_is_identity_below_threshold() {
        let s = SpectralState::new([(0.0, 0.5), (1.0, 0.5)]).unwrap();
        let folded = fold_spectrum(&s, 0.5, &u()).unwrap();
        assert_eq!(folded, s);
    }

    #[test]
    fn fold_merges_collisions() {
        let third = 1.0 / 3.0;
        let s = SpectralState::new([(0.0, third), (2.0, third), (4.0, third)]).unwrap();
        let before = survival_amplitude(&s, 0.5, &u());
        let folded = fold_spectrum(&s, 0.5, &u()).unwrap();
        assert_eq!(folded.len(), 1);
        assert!((folded.levels()[0].probability - 1.0).abs() < 1e-15);
        let after = survival_amplitude(&folded, 0.5, &u());
        assert!((before - after).norm() < 1e-12);
    }

    #[test]
    fn reflect_swaps_two_level_weights() {
        let s = SpectralState::new([(0.0, 0.3), (1.0, 0.7)]).unwrap();
        let r = reflect_spectrum(&s);
        assert!((r.levels()[0].probability - 0.7).abs() < 1e-15);
        assert!((r.levels()[1].probability - 0.3).abs() < 1e-15);
        assert!((s.moments().mean_energy - 0.7).abs() < 1e-15);
        assert!((r.moments().mean_energy - 0.3).abs() < 1e-15);
    }

    #[test]
    fn reflect_symmetric_state_is_identity() {
        let s = SpectralState::new([(0.0, 0.5), (1.0, 0.5)]).unwrap();
        assert_eq!(reflect_spectrum(&s), s);
    }

    #[test]
    fn reflect_resorts_levels() {
        let s = SpectralState::new([(0.0, 0.25), (1.0, 0.25), (3.0, 0.5)]).unwrap();
        let r = reflect_spectrum(&s);
        let lv = r.levels();
        assert!((lv[0].energy - 0.0).abs() < 1e-15 && (lv[0].probability - 0.5).abs() < 1e-15);
        assert!((lv[1].energy - 2.0).abs() < 1e-15 && (lv[1].probability - 0.25).abs() < 1e-15);
        assert!((lv[2].energy - 3.0).abs() < 1e-15 && (lv[2].probability - 0.25).abs() < 1e-15);
    }

    #[test]
    fn reflect_preserves_survival_modulus() {
        let s = SpectralState::new([(0.0, 0.2), (0.7, 0.5), (1.9, 0.3)]).unwrap();
        let r = reflect_spectrum(&s);
        for i in 0..200 {
            let t = 0.013 * i as f64;
            let a = survival_amplitude(&s, t, &u()).norm();
            let b = survival_amplitude(&r, t, &u()).norm();
            assert!((a - b).abs() < 1e-12, "t={t}");
        }
    }

    #[test]
    fn reduce_folds_and_takes_lower_mean() {
        let s = SpectralState::new([(0.0, 0.5), (3.0, 0.5)]).unwrap();
        let red = reduce_spectrum(&s, 0.5, &u()).unwrap();
        let m = red.moments();
        assert!(m.e_max < 2.0);
        assert!((m.mean_energy - 0.5).abs() < 1e-12);
        assert!(m.mean_energy >= m.e_max / 4.0 - 1e-9);
        assert!(m.mean_energy <= m.e_max / 2.0 + 1e-9);
    }

    #[test]
    fn reduce_rejects_non_orthogonal_input() {
        let s = SpectralState::new([(0.0, 0.3), (1.0, 0.7)]).unwrap();
        let err = reduce_spectrum(&s, 0.5, &u()).unwrap_err();
        assert!(err.to_string().contains("not orthogonal"));
    }

    #[test]
    fn found_tau_respects_all_three_bounds() {
        let states = [
            vec![(0.0, 0.5), (1.0, 0.5)],
            vec![(0.0, 0.25), (0.5, 0.5), (1.0, 0.25)],
            vec![(0.0, 0.2), (0.35, 0.4), (0.85, 0.4)],
        ];
        for levels in states {
            let s = SpectralState::new(levels.iter().copied()).unwrap();
            let r = first_orthogonal_time(&s, &ZeroFinderConfig::default(), &u()).unwrap();
            if !r.found() {
                continue;
            }
            let tau = r.tau.unwrap();
            let m = s.moments();
            assert!(tau * 4.0 * m.energy_spread >= 1.0 - 1e-9);
            assert!(tau * 4.0 * m.mean_energy >= 1.0 - 1e-9);
            assert!(tau * 2.0 * m.e_max >= 1.0 - 1e-9);
        }
    }
}
