//! State file schema (JSON) and its parser.
//!
//! Three document shapes share the optional `"h"` key (Planck constant,
//! default 1):
//!
//! ```json
//! {"h": 1.0, "levels":  [{"e": 0.0, "p": 0.5}, {"e": 1.0, "p": 0.5}]}
//! {"h": 1.0, "basis":   [{"e": 0.0, "g": 0, "re": 0.7071, "im": 0.0}, ...]}
//! {"h": 1.0, "mixture": [{"w": 0.5, "state": {"levels": [...]}}, ...]}
//! ```
//!
//! Unknown keys are rejected. Mixture members are pure objects (`levels` or
//! `basis`); a member may repeat `"h"` only if it agrees with the outer value.

use num_complex::Complex64;
use serde::Deserialize;

use crate::mixed::MixedEnsemble;
use crate::state::{AmplitudeState, BasisLabel, SpectralState};
use crate::units::UnitConvention;
use crate::{QslError, Result};

/// A parsed state of any of the three schema shapes.
#[derive(Debug, Clone)]
pub enum ParsedState {
    Spectral(SpectralState),
    Amplitude(AmplitudeState),
    Mixed(MixedEnsemble),
}

/// Parse result: the state plus the document's unit convention.
#[derive(Debug, Clone)]
pub struct StateDocument {
    pub units: UnitConvention,
    pub state: ParsedState,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct Doc {
    h: Option<f64>,
    levels: Option<Vec<LevelDoc>>,
    basis: Option<Vec<BasisDoc>>,
    mixture: Option<Vec<MemberDoc>>,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct LevelDoc {
    e: f64,
    p: f64,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct BasisDoc {
    e: f64,
    g: u32,
    re: f64,
    im: f64,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct MemberDoc {
    w: f64,
    state: PureDoc,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct PureDoc {
    h: Option<f64>,
    levels: Option<Vec<LevelDoc>>,
    basis: Option<Vec<BasisDoc>>,
}

fn build_spectral(levels: &[LevelDoc]) -> Result<SpectralState> {
    for lv in levels {
        if lv.e < 0.0 {
            return Err(QslError::NegativeEnergy(lv.e));
        }
    }
    SpectralState::new(levels.iter().map(|lv| (lv.e, lv.p)))
}

fn build_amplitude(basis: &[BasisDoc]) -> Result<AmplitudeState> {
    let labels = basis
        .iter()
        .map(|b| BasisLabel {
            energy: b.e,
            degeneracy: b.g,
        })
        .collect();
    let amps = basis.iter().map(|b| Complex64::new(b.re, b.im)).collect();
    AmplitudeState::new(labels, amps)
}

fn build_member(doc: &PureDoc, outer_h: f64) -> Result<AmplitudeState> {
    if let Some(h) = doc.h {
        if (h - outer_h).abs() > 1e-12 * outer_h.abs().max(1.0) {
            return Err(QslError::Parse(format!(
                "mixture member declares h = {h} but the document uses h = {outer_h}"
            )));
        }
    }
    match (&doc.levels, &doc.basis) {
        // Spectral members embed with real non-negative amplitudes but keep
        // their absolute energies: ensemble members share one frame, so the
        // per-state ground shift must not be applied here.
        (Some(levels), None) => {
            for lv in levels {
                if lv.e < 0.0 {
                    return Err(QslError::NegativeEnergy(lv.e));
                }
                if !(lv.p.is_finite() && lv.p >= 0.0) {
                    return Err(QslError::Parse(format!("invalid probability {}", lv.p)));
                }
            }
            let labels = levels
                .iter()
                .map(|lv| BasisLabel {
                    energy: lv.e,
                    degeneracy: 0,
                })
                .collect();
            let amps = levels
                .iter()
                .map(|lv| Complex64::new(lv.p.sqrt(), 0.0))
                .collect();
            AmplitudeState::new(labels, amps)
        }
        (None, Some(basis)) => build_amplitude(basis),
        _ => Err(QslError::Parse(
            "mixture member must contain exactly one of \"levels\" or \"basis\"".into(),
        )),
    }
}

/// Parses a state document, validating schema, normalization and energies.
pub fn parse_state(text: &str) -> Result<StateDocument> {
    let doc: Doc = serde_json::from_str(text).map_err(|e| QslError::Parse(e.to_string()))?;
    let units = UnitConvention::new(doc.h.unwrap_or(1.0))?;

    let state = match (&doc.levels, &doc.basis, &doc.mixture) {
        (Some(levels), None, None) => ParsedState::Spectral(build_spectral(levels)?),
        (None, Some(basis), None) => ParsedState::Amplitude(build_amplitude(basis)?),
        (None, None, Some(members)) => {
            let mut built = Vec::with_capacity(members.len());
            for m in members {
                built.push((m.w, build_member(&m.state, units.h)?));
            }
            ParsedState::Mixed(MixedEnsemble::new(built)?)
        }
        _ => {
            return Err(QslError::Parse(
                "document must contain exactly one of \"levels\", \"basis\" or \"mixture\"".into(),
            ))
        }
    };

    Ok(StateDocument { units, state })
}

/// Renders a spectral state back into the file schema.
pub fn spectral_to_json(s: &SpectralState, units: &UnitConvention) -> serde_json::Value {
    serde_json::json!({
        "h": units.h,
        "levels": s
            .levels()
            .iter()
            .map(|lv| serde_json::json!({"e": lv.energy, "p": lv.probability}))
            .collect::<Vec<_>>(),
    })
}
