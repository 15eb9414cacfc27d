//! Seeded random-state generators for property suites and scans.
//!
//! Generic random spectra rarely orthogonalize, so besides [`StateSampler::random_spectral`]
//! there are constructions with an exact zero of `S` at the designed time
//! `tau = 1` (unit `h`): three phasors whose triangle strictly contains the
//! origin, and four phasors grouped into two antipodal pairs. Lifting levels
//! by integer multiples of `h/tau` keeps the zero at `tau` while pushing
//! `e_max` past `h/tau`, which is exactly what the spectrum-reduction checks
//! need.

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::state::SpectralState;

pub struct StateSampler {
    rng: ChaCha8Rng,
}

impl StateSampler {
    pub fn new(seed: u64) -> Self {
        Self {
            rng: ChaCha8Rng::seed_from_u64(seed),
        }
    }

    /// Uniform scalar draw, for callers that should stay deterministic
    /// without owning an RNG.
    pub fn uniform(&mut self, lo: f64, hi: f64) -> f64 {
        self.rng.random_range(lo..hi)
    }

    /// Random state with `n` levels in [2, max_levels]: energies are spaced
    /// cumulative increments, probabilities a normalized positive draw.
    /// No orthogonality is implied.
    pub fn random_spectral(&mut self, max_levels: usize) -> SpectralState {
        let n = self.rng.random_range(2..=max_levels.max(2));
        let mut energy = 0.0;
        let mut levels = Vec::with_capacity(n);
        let mut total = 0.0;
        let mut probs = Vec::with_capacity(n);
        for i in 0..n {
            if i > 0 {
                energy += self.rng.random_range(0.05..1.0);
            }
            let p: f64 = self.rng.random_range(0.05..1.0);
            total += p;
            probs.push(p);
            levels.push(energy);
        }
        SpectralState::new(levels.into_iter().zip(probs.into_iter().map(|p| p / total)))
            .expect("sampled spectrum is valid")
    }

    /// Three-level state with `S(1) = 0` exactly (up to rounding): the three
    /// unit phasors at angles `{0, x1, x2}` strictly surround the origin, so
    /// the barycentric weights are positive.
    pub fn random_orthogonal_triangle(&mut self) -> SpectralState {
        use std::f64::consts::PI;
        // Interior condition: x1 in (0, pi), x2 in (pi, pi + x1).
        let x1 = self.rng.random_range(0.25 * PI..0.9 * PI);
        let x2 = PI + self.rng.random_range(0.1..0.9) * x1;
        // Solve p1 sin x1 + p2 sin x2 = 0, p0 + p1 cos x1 + p2 cos x2 = 0.
        let p2 = 1.0;
        let p1 = -p2 * x2.sin() / x1.sin();
        let p0 = -(p1 * x1.cos() + p2 * x2.cos());
        debug_assert!(p0 > 0.0 && p1 > 0.0, "origin not interior: x1={x1} x2={x2}");
        let total = p0 + p1 + p2;
        let scale = 1.0 / (2.0 * PI);
        SpectralState::new([
            (0.0, p0 / total),
            (x1 * scale, p1 / total),
            (x2 * scale, p2 / total),
        ])
        .expect("triangle construction is valid")
    }

    /// Four-level state built from two antipodal phasor pairs; `S(1) = 0`
    /// exactly for any pair weights.
    pub fn random_orthogonal_pairs(&mut self) -> SpectralState {
        use std::f64::consts::PI;
        let v = self.rng.random_range(0.15 * PI..0.85 * PI);
        let a = self.rng.random_range(0.2..1.0);
        let b = self.rng.random_range(0.2..1.0);
        let total = 2.0 * (a + b);
        let scale = 1.0 / (2.0 * PI);
        SpectralState::new([
            (0.0, a / total),
            (v * scale, b / total),
            (PI * scale, a / total),
            ((v + PI) * scale, b / total),
        ])
        .expect("pair construction is valid")
    }

    /// Orthogonal-at-1 state of either construction.
    pub fn random_orthogonal(&mut self) -> SpectralState {
        if self.rng.random_bool(0.5) {
            self.random_orthogonal_triangle()
        } else {
            self.random_orthogonal_pairs()
        }
    }

    /// Orthogonal-at-1 state with at least one level lifted by a whole
    /// multiple of `h/tau = 1`, so `e_max >= 1` while `S(1)` is unchanged.
    pub fn random_orthogonal_lifted(&mut self) -> SpectralState {
        let base = self.random_orthogonal();
        let n = base.len();
        let forced = self.rng.random_range(1..n);
        let levels: Vec<(f64, f64)> = base
            .levels()
            .iter()
            .enumerate()
            .map(|(i, lv)| {
                let lifted = i == forced || (i > 0 && self.rng.random_bool(0.4));
                let lift = if lifted {
                    self.rng.random_range(1..=3) as f64
                } else {
                    0.0
                };
                (lv.energy + lift, lv.probability)
            })
            .collect();
        SpectralState::new(levels).expect("lifted spectrum is valid")
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::survival::survival_amplitude;
    use crate::units::UnitConvention;

    #[test]
    fn constructions_are_orthogonal_at_one() {
        let u = UnitConvention::default();
        let mut sampler = StateSampler::new(7);
        for _ in 0..200 {
            let s = sampler.random_orthogonal();
            let overlap = survival_amplitude(&s, 1.0, &u).norm();
            assert!(overlap < 1e-12, "|S(1)| = {overlap:e}");
        }
    }

    #[test]
    fn lifted_states_exceed_fold_threshold_and_stay_orthogonal() {
        let u = UnitConvention::default();
        let mut sampler = StateSampler::new(11);
        for _ in 0..200 {
            let s = sampler.random_orthogonal_lifted();
            assert!(s.e_max() >= 1.0, "e_max = {}", s.e_max());
            let overlap = survival_amplitude(&s, 1.0, &u).norm();
            assert!(overlap < 1e-12);
        }
    }

    #[test]
    fn sampler_is_deterministic() {
        let a = StateSampler::new(42).random_spectral(5);
        let b = StateSampler::new(42).random_spectral(5);
        assert_eq!(a, b);
    }
}
