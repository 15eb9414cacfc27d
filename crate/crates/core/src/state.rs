//! State representations and moment computation.
//!
//! [`SpectralState`] is the working representation: a probability
//! distribution over distinct energy levels, which is all the survival
//! amplitude and every bound depend on. [`AmplitudeState`] keeps complex
//! amplitudes over labeled `(energy, degeneracy-index)` basis vectors and is
//! only needed where relative phases matter (cross-state overlaps, mixtures).
//!
//! Construction canonicalizes: zero-weight levels are dropped, the spectrum
//! is shifted so the lowest contributing energy is exactly 0, levels whose
//! energies agree to 1e-12 relative are merged, and probabilities are
//! renormalized after an input-tolerance check.

use num_complex::Complex64;
use serde::Serialize;

use crate::{QslError, Result};

/// Relative tolerance under which two energies are considered the same level.
pub const ENERGY_MERGE_REL_TOL: f64 = 1e-12;
/// Accepted deviation of input probability (or weight) sums from 1.
pub const INPUT_SUM_TOL: f64 = 1e-9;

/// One energy level with its occupation probability.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Level {
    pub energy: f64,
    pub probability: f64,
}

/// Probability distribution over strictly increasing energies, ground at 0.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SpectralState {
    levels: Vec<Level>,
}

impl SpectralState {
    /// Builds a state from raw `(energy, probability)` pairs.
    ///
    /// Zero-probability entries are dropped, energies are ground-shifted and
    /// merged, probabilities renormalized. Fails on an empty spectrum, on
    /// negative or non-finite entries, and when the probabilities do not sum
    /// to 1 within [`INPUT_SUM_TOL`].
    pub fn new<I>(levels: I) -> Result<Self>
    where
        I: IntoIterator<Item = (f64, f64)>,
    {
        let mut raw: Vec<(f64, f64)> = Vec::new();
        let mut sum = 0.0;
        for (e, p) in levels {
            if !e.is_finite() {
                return Err(QslError::InvalidConfig(format!("non-finite energy {e}")));
            }
            if !p.is_finite() || p < 0.0 {
                return Err(QslError::InvalidConfig(format!("invalid probability {p}")));
            }
            sum += p;
            if p > 0.0 {
                raw.push((e, p));
            }
        }
        if raw.is_empty() {
            return Err(QslError::EmptySpectrum);
        }
        if (sum - 1.0).abs() > INPUT_SUM_TOL {
            return Err(QslError::ProbabilitySum {
                sum,
                tol: INPUT_SUM_TOL,
            });
        }

        raw.sort_by(|a, b| a.0.partial_cmp(&b.0).expect("finite energies"));

        // Ground shift first so the merge tolerance acts in the canonical frame
        // (a uniform shift of the input must not change the result).
        let ground = raw[0].0;
        for lv in raw.iter_mut() {
            lv.0 -= ground;
        }
        raw[0].0 = 0.0;

        let mut merged: Vec<Level> = Vec::with_capacity(raw.len());
        for (e, p) in raw {
            match merged.last_mut() {
                Some(last) if (e - last.energy).abs() <= ENERGY_MERGE_REL_TOL * e.abs().max(last.energy.abs()) => {
                    last.probability += p;
                }
                _ => merged.push(Level {
                    energy: e,
                    probability: p,
                }),
            }
        }

        for lv in merged.iter_mut() {
            lv.probability /= sum;
        }

        Ok(Self { levels: merged })
    }

    pub fn levels(&self) -> &[Level] {
        &self.levels
    }

    pub fn len(&self) -> usize {
        self.levels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.levels.is_empty()
    }

    /// Largest energy carrying probability.
    pub fn e_max(&self) -> f64 {
        self.levels.last().map(|lv| lv.energy).unwrap_or(0.0)
    }

    /// Mean energy, energy spread, their ratio and the top level.
    pub fn moments(&self) -> Moments {
        let mut mean = 0.0;
        for lv in &self.levels {
            mean += lv.probability * lv.energy;
        }
        // Centered second moment; agrees with <E^2> - <E>^2 but does not
        // cancel catastrophically for narrow spectra.
        let mut var = 0.0;
        for lv in &self.levels {
            let d = lv.energy - mean;
            var += lv.probability * d * d;
        }
        let spread = var.max(0.0).sqrt();
        let alpha = if self.levels.len() > 1 && mean > 0.0 {
            Some(spread / mean)
        } else {
            None
        };
        Moments {
            mean_energy: mean,
            energy_spread: spread,
            alpha,
            e_max: self.e_max(),
        }
    }
}

/// Derived energy statistics of a state.
///
/// `alpha = dE / E` is `None` when only the ground level is present (E = 0),
/// so downstream reports can still render.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Moments {
    #[serde(rename = "E")]
    pub mean_energy: f64,
    #[serde(rename = "dE")]
    pub energy_spread: f64,
    pub alpha: Option<f64>,
    pub e_max: f64,
}

/// Label of an amplitude-basis vector: energy plus a degeneracy index to
/// distinguish states within one degenerate level.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct BasisLabel {
    pub energy: f64,
    pub degeneracy: u32,
}

impl BasisLabel {
    pub fn matches(&self, other: &BasisLabel) -> bool {
        self.degeneracy == other.degeneracy
            && (self.energy - other.energy).abs()
                <= ENERGY_MERGE_REL_TOL * self.energy.abs().max(other.energy.abs())
    }
}

/// Normalized complex amplitudes over labeled basis vectors.
///
/// Unlike [`SpectralState`], energies are kept as given (no ground shift):
/// members of a mixed ensemble must share one absolute energy frame.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct AmplitudeState {
    basis: Vec<BasisLabel>,
    amplitudes: Vec<Complex64>,
}

impl AmplitudeState {
    pub fn new(basis: Vec<BasisLabel>, amplitudes: Vec<Complex64>) -> Result<Self> {
        if basis.len() != amplitudes.len() {
            return Err(QslError::InvalidConfig(format!(
                "basis has {} labels but {} amplitudes were given",
                basis.len(),
                amplitudes.len()
            )));
        }
        if basis.is_empty() {
            return Err(QslError::EmptySpectrum);
        }
        for label in &basis {
            if !label.energy.is_finite() {
                return Err(QslError::InvalidConfig(format!(
                    "non-finite energy {}",
                    label.energy
                )));
            }
            if label.energy < 0.0 {
                return Err(QslError::NegativeEnergy(label.energy));
            }
        }
        for a in &amplitudes {
            if !a.re.is_finite() || !a.im.is_finite() {
                return Err(QslError::InvalidConfig("non-finite amplitude".into()));
            }
        }

        let mut order: Vec<usize> = (0..basis.len()).collect();
        order.sort_by(|&i, &j| {
            basis[i]
                .energy
                .partial_cmp(&basis[j].energy)
                .expect("finite energies")
                .then(basis[i].degeneracy.cmp(&basis[j].degeneracy))
        });
        let basis: Vec<BasisLabel> = order.iter().map(|&i| basis[i]).collect();
        let mut amplitudes: Vec<Complex64> = order.iter().map(|&i| amplitudes[i]).collect();

        for w in basis.windows(2) {
            if w[0].matches(&w[1]) {
                return Err(QslError::DuplicateBasisLabel {
                    energy: w[1].energy,
                    degeneracy: w[1].degeneracy,
                });
            }
        }

        let norm_sq: f64 = amplitudes.iter().map(|a| a.norm_sqr()).sum();
        if (norm_sq - 1.0).abs() > INPUT_SUM_TOL {
            return Err(QslError::ProbabilitySum {
                sum: norm_sq,
                tol: INPUT_SUM_TOL,
            });
        }
        let norm = norm_sq.sqrt();
        for a in amplitudes.iter_mut() {
            *a /= norm;
        }

        Ok(Self { basis, amplitudes })
    }

    /// Embeds a spectral state with real non-negative amplitudes, all at
    /// degeneracy index 0.
    pub fn from_spectral(s: &SpectralState) -> Self {
        let basis = s
            .levels()
            .iter()
            .map(|lv| BasisLabel {
                energy: lv.energy,
                degeneracy: 0,
            })
            .collect();
        let amplitudes = s
            .levels()
            .iter()
            .map(|lv| Complex64::new(lv.probability.sqrt(), 0.0))
            .collect();
        Self::new(basis, amplitudes).expect("a valid spectral state embeds")
    }

    pub fn basis(&self) -> &[BasisLabel] {
        &self.basis
    }

    pub fn amplitudes(&self) -> &[Complex64] {
        &self.amplitudes
    }

    /// Projects onto occupation probabilities per energy: degenerate slots
    /// are summed, phases dropped, and the ground is shifted to 0.
    ///
    /// The survival amplitude of the result has the same modulus as the
    /// self-overlap computed in the amplitude picture; the complex values
    /// agree exactly when the lowest contributing energy is already 0.
    pub fn collapse_to_spectral(&self) -> Result<SpectralState> {
        let pairs = self
            .basis
            .iter()
            .zip(&self.amplitudes)
            .map(|(label, a)| (label.energy, a.norm_sqr()));
        // SpectralState::new merges degenerate energies and applies the shift.
        SpectralState::new(pairs)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const SQRT_HALF: f64 = std::f64::consts::FRAC_1_SQRT_2;

    fn two_level() -> SpectralState {
        SpectralState::new([(0.0, 0.5), (1.0, 0.5)]).unwrap()
    }

    #[test]
    fn construction_drops_zero_weights_and_shifts_ground() {
        let s = SpectralState::new([(2.0, 0.5), (2.5, 0.0), (3.0, 0.5)]).unwrap();
        assert_eq!(s.len(), 2);
        assert_eq!(s.levels()[0].energy, 0.0);
        assert_eq!(s.levels()[1].energy, 1.0);
        assert_eq!(s.levels()[0].probability, 0.5);
    }

    #[test]
    fn construction_merges_near_equal_energies() {
        let s = SpectralState::new([(0.0, 0.25), (1.0, 0.25), (1.0 + 4e-13, 0.5)]).unwrap();
        assert_eq!(s.len(), 2);
        assert!((s.levels()[1].probability - 0.75).abs() < 1e-15);
    }

    #[test]
    fn construction_rejects_bad_sums_and_empty() {
        let err = SpectralState::new([(0.0, 0.6), (1.0, 0.5)]).unwrap_err();
        assert!(err.to_string().contains("sum to 1.1"));
        assert!(matches!(
            SpectralState::new(std::iter::empty::<(f64, f64)>()),
            Err(QslError::EmptySpectrum)
        ));
        assert!(matches!(
            SpectralState::new([(0.0, 0.0), (1.0, 0.0)]),
            Err(QslError::EmptySpectrum)
        ));
    }

    #[test]
    fn moments_two_level() {
        let m = two_level().moments();
        assert!((m.mean_energy - 0.5).abs() < 1e-15);
        assert!((m.energy_spread - 0.5).abs() < 1e-15);
        assert!((m.alpha.unwrap() - 1.0).abs() < 1e-12);
        assert_eq!(m.e_max, 1.0);
    }

    #[test]
    fn moments_skewed() {
        let s = SpectralState::new([(0.0, 0.25), (2.0, 0.75)]).unwrap();
        let m = s.moments();
        assert!((m.mean_energy - 1.5).abs() < 1e-12);
        assert!((m.energy_spread - 0.75f64.sqrt()).abs() < 1e-12);
        assert!((m.alpha.unwrap() - 0.75f64.sqrt() / 1.5).abs() < 1e-12);
        assert_eq!(m.e_max, 2.0);
    }

    #[test]
    fn moments_ground_only() {
        let s = SpectralState::new([(0.0, 1.0)]).unwrap();
        let m = s.moments();
        assert_eq!(m.mean_energy, 0.0);
        assert_eq!(m.energy_spread, 0.0);
        assert_eq!(m.alpha, None);
        assert_eq!(m.e_max, 0.0);
    }

    #[test]
    fn spread_matches_raw_second_moment_formula() {
        let s = SpectralState::new([(0.0, 0.2), (0.7, 0.5), (2.3, 0.3)]).unwrap();
        let m = s.moments();
        let mean: f64 = s.levels().iter().map(|l| l.probability * l.energy).sum();
        let second: f64 = s
            .levels()
            .iter()
            .map(|l| l.probability * l.energy * l.energy)
            .sum();
        let raw = (second - mean * mean).sqrt();
        assert!((m.energy_spread - raw).abs() <= 1e-10 * raw.max(1.0));
    }

    #[test]
    fn collapse_sums_degenerate_slots() {
        let s = AmplitudeState::new(
            vec![
                BasisLabel { energy: 0.0, degeneracy: 0 },
                BasisLabel { energy: 1.0, degeneracy: 0 },
                BasisLabel { energy: 1.0, degeneracy: 1 },
            ],
            vec![
                Complex64::new(SQRT_HALF, 0.0),
                Complex64::new(0.5, 0.0),
                Complex64::new(0.5, 0.0),
            ],
        )
        .unwrap()
        .collapse_to_spectral()
        .unwrap();
        assert_eq!(s.len(), 2);
        assert!((s.levels()[0].probability - 0.5).abs() < 1e-15);
        assert!((s.levels()[1].probability - 0.5).abs() < 1e-15);
    }

    #[test]
    fn collapse_ignores_phases() {
        let s = AmplitudeState::new(
            vec![
                BasisLabel { energy: 0.0, degeneracy: 0 },
                BasisLabel { energy: 1.0, degeneracy: 0 },
            ],
            vec![
                Complex64::new(0.0, SQRT_HALF),
                Complex64::new(-SQRT_HALF, 0.0),
            ],
        )
        .unwrap()
        .collapse_to_spectral()
        .unwrap();
        assert_eq!(s, two_level());
    }

    #[test]
    fn collapse_applies_ground_shift() {
        let s = AmplitudeState::new(
            vec![
                BasisLabel { energy: 2.0, degeneracy: 0 },
                BasisLabel { energy: 3.0, degeneracy: 0 },
            ],
            vec![
                Complex64::new(SQRT_HALF, 0.0),
                Complex64::new(SQRT_HALF, 0.0),
            ],
        )
        .unwrap()
        .collapse_to_spectral()
        .unwrap();
        assert_eq!(s, two_level());
    }

    #[test]
    fn duplicate_basis_labels_rejected() {
        let r = AmplitudeState::new(
            vec![
                BasisLabel { energy: 1.0, degeneracy: 0 },
                BasisLabel { energy: 1.0, degeneracy: 0 },
            ],
            vec![
                Complex64::new(SQRT_HALF, 0.0),
                Complex64::new(SQRT_HALF, 0.0),
            ],
        );
        assert!(matches!(r, Err(QslError::DuplicateBasisLabel { .. })));
    }

    #[test]
    fn collapse_round_trip_is_idempotent() {
        let s = SpectralState::new([(0.0, 0.3), (0.4, 0.45), (1.7, 0.25)]).unwrap();
        let round = AmplitudeState::from_spectral(&s)
            .collapse_to_spectral()
            .unwrap();
        assert_eq!(s.len(), round.len());
        for (a, b) in s.levels().iter().zip(round.levels()) {
            assert!((a.energy - b.energy).abs() < 1e-15);
            assert!((a.probability - b.probability).abs() < 1e-15);
        }
    }

    #[test]
    fn uniform_shift_yields_identical_state() {
        let a = SpectralState::new([(0.0, 0.3), (0.4, 0.45), (1.7, 0.25)]).unwrap();
        let b = SpectralState::new([(5.0, 0.3), (5.4, 0.45), (6.7, 0.25)]).unwrap();
        assert_eq!(a.len(), b.len());
        for (x, y) in a.levels().iter().zip(b.levels()) {
            assert!((x.energy - y.energy).abs() < 1e-12);
            assert!((x.probability - y.probability).abs() < 1e-15);
        }
    }
}
