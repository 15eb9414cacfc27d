//! Mixed-state machinery: ensemble trace overlaps and the rank-2
//! demonstration that no mixed state attains the unified bound.
//!
//! An ensemble is a weighted set of mutually orthogonal pure states sharing
//! one basis frame. The orthogonality functional is
//! `Tr[rho(0) rho(t)] = sum_ij l_i l_j |<psi_i(0)|psi_j(t)>|^2`; every term is
//! non-negative, so the trace vanishes only if all pairwise overlaps do. For
//! the rank-2 ensemble built from the equal-weight two-level state and its
//! sign-flipped partner the diagonal overlaps vanish at `tau = h/(2 E1)` but
//! the cross overlaps have modulus 1 there, leaving
//! `Tr[rho(0) rho(tau)] = 2 l1 l2 > 0`.

use num_complex::Complex64;
use serde::Serialize;

use crate::bounds::BoundReport;
use crate::state::{AmplitudeState, BasisLabel, Moments};
use crate::units::UnitConvention;
use crate::{QslError, Result};

/// Pairwise member overlap allowed at `t = 0`; constructions are exact, so
/// this only absorbs floating-point noise.
pub const MEMBER_ORTHO_TOL: f64 = 1e-10;

/// Weighted ensemble of mutually orthogonal pure states.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MixedEnsemble {
    members: Vec<(f64, AmplitudeState)>,
}

impl MixedEnsemble {
    /// Validates weights (positive, summing to 1 within 1e-9, then
    /// renormalized) and pairwise orthogonality at `t = 0`.
    pub fn new(members: Vec<(f64, AmplitudeState)>) -> Result<Self> {
        if members.is_empty() {
            return Err(QslError::EmptySpectrum);
        }
        let mut sum = 0.0;
        for (w, _) in &members {
            if !(w.is_finite() && *w > 0.0) {
                return Err(QslError::InvalidConfig(format!(
                    "ensemble weights must be positive, got {w}"
                )));
            }
            sum += w;
        }
        if (sum - 1.0).abs() > crate::state::INPUT_SUM_TOL {
            return Err(QslError::ProbabilitySum {
                sum,
                tol: crate::state::INPUT_SUM_TOL,
            });
        }
        for i in 0..members.len() {
            for j in i + 1..members.len() {
                let ov = overlap(&members[i].1, &members[j].1, 0.0, &UnitConvention::default());
                if ov.norm() > MEMBER_ORTHO_TOL {
                    return Err(QslError::InvalidConfig(format!(
                        "ensemble members {i} and {j} are not orthogonal (|<i|j>| = {:.3e})",
                        ov.norm()
                    )));
                }
            }
        }
        let members = members.into_iter().map(|(w, s)| (w / sum, s)).collect();
        Ok(Self { members })
    }

    pub fn members(&self) -> &[(f64, AmplitudeState)] {
        &self.members
    }

    /// `sum l_i^2`, the value of the trace overlap at `t = 0`.
    pub fn purity(&self) -> f64 {
        self.members.iter().map(|(w, _)| w * w).sum()
    }

    /// Ensemble moments: the mean is the weight-averaged member mean, the
    /// spread comes from the weight-averaged second moment, and all energies
    /// are measured from the lowest contributing level across members.
    pub fn moments(&self) -> Moments {
        let mut ground = f64::INFINITY;
        let mut top = f64::NEG_INFINITY;
        for (_, member) in &self.members {
            for (label, a) in member.basis().iter().zip(member.amplitudes()) {
                if a.norm_sqr() > 0.0 {
                    ground = ground.min(label.energy);
                    top = top.max(label.energy);
                }
            }
        }
        let mut mean = 0.0;
        let mut second = 0.0;
        for (w, member) in &self.members {
            for (label, a) in member.basis().iter().zip(member.amplitudes()) {
                let p = a.norm_sqr();
                let e = label.energy - ground;
                mean += w * p * e;
                second += w * p * e * e;
            }
        }
        let spread = (second - mean * mean).max(0.0).sqrt();
        Moments {
            mean_energy: mean,
            energy_spread: spread,
            alpha: if mean > 0.0 { Some(spread / mean) } else { None },
            e_max: top - ground,
        }
    }
}

/// `<a(0)|b(t)>` over the matched basis labels; unmatched labels contribute
/// nothing. Time evolution multiplies each amplitude of `b` by
/// `exp(-2 pi i E t / h)`.
pub fn overlap(a: &AmplitudeState, b: &AmplitudeState, t: f64, units: &UnitConvention) -> Complex64 {
    let w = -std::f64::consts::TAU * t / units.h;
    let mut acc = Complex64::ZERO;
    for (la, amp_a) in a.basis().iter().zip(a.amplitudes()) {
        for (lb, amp_b) in b.basis().iter().zip(b.amplitudes()) {
            if la.matches(lb) {
                acc += amp_a.conj() * amp_b * Complex64::cis(w * lb.energy);
                break;
            }
        }
    }
    acc
}

/// `Tr[rho(0) rho(t)]` for the ensemble; lies in [0, 1].
pub fn trace_overlap(e: &MixedEnsemble, t: f64, units: &UnitConvention) -> f64 {
    let members = e.members();
    let mut acc = 0.0;
    for (wi, mi) in members {
        for (wj, mj) in members {
            acc += wi * wj * overlap(mi, mj, t, units).norm_sqr();
        }
    }
    acc
}

/// Rank-2 ensemble over the basis `{(0, 0), (e1, 0)}` with members
/// `(|0> + |1>)/sqrt(2)` and `(|0> - |1>)/sqrt(2)` and weights
/// `(lambda1, 1 - lambda1)`.
pub fn rank2_counterexample(e1: f64, lambda1: f64) -> Result<MixedEnsemble> {
    if !(e1.is_finite() && e1 > 0.0) {
        return Err(QslError::InvalidConfig(format!(
            "rank-2 ensemble requires E1 > 0, got {e1}"
        )));
    }
    if !(lambda1.is_finite() && lambda1 > 0.0 && lambda1 < 1.0) {
        return Err(QslError::InvalidConfig(format!(
            "rank-2 ensemble requires lambda1 in (0, 1), got {lambda1}"
        )));
    }
    let basis = vec![
        BasisLabel {
            energy: 0.0,
            degeneracy: 0,
        },
        BasisLabel {
            energy: e1,
            degeneracy: 0,
        },
    ];
    let r = std::f64::consts::FRAC_1_SQRT_2;
    let plus = AmplitudeState::new(basis.clone(), vec![Complex64::new(r, 0.0), Complex64::new(r, 0.0)])?;
    let minus = AmplitudeState::new(basis, vec![Complex64::new(r, 0.0), Complex64::new(-r, 0.0)])?;
    MixedEnsemble::new(vec![(lambda1, plus), (1.0 - lambda1, minus)])
}

/// Evaluates the trace overlap at the unified bound time of the ensemble's
/// averaged moments. A strictly positive result witnesses that the bound is
/// not attained; the caller asserts the margin.
pub fn mixed_nonattainability_check(
    e: &MixedEnsemble,
    report: &BoundReport,
    units: &UnitConvention,
) -> Result<f64> {
    if e.members().len() < 2 {
        return Err(QslError::Domain(
            "non-attainability check requires at least 2 ensemble members".into(),
        ));
    }
    Ok(trace_overlap(e, report.tau_unified, units))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::bounds::bound_report;

    fn u() -> UnitConvention {
        UnitConvention::default()
    }

    #[test]
    fn purity_at_time_zero() {
        let e = rank2_counterexample(1.0, 0.5).unwrap();
        assert!((trace_overlap(&e, 0.0, &u()) - 0.5).abs() < 1e-12);
        let e = rank2_counterexample(1.0, 0.9).unwrap();
        assert!((trace_overlap(&e, 0.0, &u()) - 0.82).abs() < 1e-12);
        assert!((e.purity() - 0.82).abs() < 1e-15);
    }

    #[test]
    fn members_orthogonal_by_construction() {
        let e = rank2_counterexample(2.5, 0.3).unwrap();
        let ov = overlap(&e.members()[0].1, &e.members()[1].1, 0.0, &u());
        assert!(ov.norm() < 1e-15);
    }

    #[test]
    fn single_member_reduces_to_survival_probability() {
        let two = crate::state::SpectralState::new([(0.0, 0.5), (1.0, 0.5)]).unwrap();
        let member = AmplitudeState::from_spectral(&two);
        let e = MixedEnsemble::new(vec![(1.0, member)]).unwrap();
        // At tau = h/(2 E1) the pure survival amplitude vanishes.
        assert!(trace_overlap(&e, 0.5, &u()) < 1e-24);
        // For one member the trace overlap is exactly |S(t)|^2.
        let s = crate::survival::survival_amplitude(&two, 0.2, &u()).norm_sqr();
        assert!((trace_overlap(&e, 0.2, &u()) - s).abs() < 1e-12);
    }

    /// Brute-force expansion of the four overlap terms for the rank-2
    /// ensemble at tau = h/(2 E1): the diagonal overlaps vanish while each
    /// cross overlap is (1 - exp(-i pi))/2 = 1 in modulus, leaving
    /// 2 l1 l2 exactly.
    #[test]
    fn rank2_trace_overlap_at_tau_equals_twice_weight_product() {
        for (l1, expect) in [(0.5, 0.5), (0.9, 0.18), (0.3, 0.42)] {
            let e = rank2_counterexample(1.0, l1).unwrap();
            let (m1, m2) = (&e.members()[0].1, &e.members()[1].1);
            let d1 = overlap(m1, m1, 0.5, &u()).norm();
            let d2 = overlap(m2, m2, 0.5, &u()).norm();
            let c12 = overlap(m1, m2, 0.5, &u()).norm();
            let c21 = overlap(m2, m1, 0.5, &u()).norm();
            assert!(d1 < 1e-15 && d2 < 1e-15);
            assert!((c12 - 1.0).abs() < 1e-12 && (c21 - 1.0).abs() < 1e-12);
            let brute =
                l1 * l1 * d1 * d1 + (1.0 - l1) * (1.0 - l1) * d2 * d2 + 2.0 * l1 * (1.0 - l1) * c12 * c12;
            let got = trace_overlap(&e, 0.5, &u());
            assert!((got - brute).abs() < 1e-12);
            assert!((got - expect).abs() < 1e-10, "l1={l1}: got {got}");
        }
    }

    #[test]
    fn trace_overlap_invariant_under_member_global_phase() {
        let e = rank2_counterexample(1.0, 0.4).unwrap();
        let phase = Complex64::cis(0.7321);
        let rotated = AmplitudeState::new(
            e.members()[1].1.basis().to_vec(),
            e.members()[1]
                .1
                .amplitudes()
                .iter()
                .map(|a| a * phase)
                .collect(),
        )
        .unwrap();
        let e2 = MixedEnsemble::new(vec![(0.4, e.members()[0].1.clone()), (0.6, rotated)]).unwrap();
        for i in 0..20 {
            let t = 0.11 * i as f64;
            assert!((trace_overlap(&e, t, &u()) - trace_overlap(&e2, t, &u())).abs() < 1e-12);
        }
    }

    #[test]
    fn nonattainability_check_is_strictly_positive() {
        let e = rank2_counterexample(1.0, 0.5).unwrap();
        let report = bound_report(&e.moments(), &u()).unwrap();
        // Ensemble moments here coincide with the pure two-level moments.
        assert!((report.tau_unified - 0.5).abs() < 1e-12);
        let value = mixed_nonattainability_check(&e, &report, &u()).unwrap();
        assert!((value - 0.5).abs() < 1e-10);
        assert!(value > 0.1);
    }

    #[test]
    fn nonattainability_check_rejects_single_member() {
        let two = crate::state::SpectralState::new([(0.0, 0.5), (1.0, 0.5)]).unwrap();
        let e = MixedEnsemble::new(vec![(1.0, AmplitudeState::from_spectral(&two))]).unwrap();
        let report = bound_report(&e.moments(), &u()).unwrap();
        assert!(mixed_nonattainability_check(&e, &report, &u()).is_err());
    }

    #[test]
    fn ensemble_moments_average_members() {
        let e = rank2_counterexample(2.0, 0.5).unwrap();
        let m = e.moments();
        assert!((m.mean_energy - 1.0).abs() < 1e-12);
        assert!((m.energy_spread - 1.0).abs() < 1e-12);
        assert_eq!(m.e_max, 2.0);
    }

    #[test]
    fn rejects_non_orthogonal_members() {
        let two = crate::state::SpectralState::new([(0.0, 0.5), (1.0, 0.5)]).unwrap();
        let a = AmplitudeState::from_spectral(&two);
        let r = MixedEnsemble::new(vec![(0.5, a.clone()), (0.5, a)]);
        assert!(r.is_err());
    }
}
