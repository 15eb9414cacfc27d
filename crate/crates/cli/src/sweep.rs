//! Keel-figure data: for each alpha, the bound curve value plus one row per
//! family parameter, written as byte-stable CSV.
//!
//! The alpha grid is uniform in `u = (alpha - 1)/(alpha + 1)`, the figure's
//! natural axis: it is symmetric in `ln alpha` and puts 1/3, 1 and 3 on the
//! standard 25-point [0.2, 5] grid exactly. Family rows carry the achieved
//! `alpha` of the constructed state (for the sparse `alpha > 1` family the
//! exact ratio sits below the nominal target at moderate `alpha`), so
//! `keel_value >= keel_bound` holds row by row.

use std::io::Write;

use serde::Serialize;

use qsl_core::bounds::keel_bound;
use qsl_core::families::{family_a_refine, family_b, FamilyAParams, FamilyBParams};
use qsl_core::units::UnitConvention;

use crate::CliError;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum FamilyTag {
    #[serde(rename = "bound")]
    Bound,
    A,
    B,
}

impl std::fmt::Display for FamilyTag {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            FamilyTag::Bound => write!(f, "bound"),
            FamilyTag::A => write!(f, "A"),
            FamilyTag::B => write!(f, "B"),
        }
    }
}

#[derive(Debug, Clone, Copy, Serialize)]
pub struct SweepRow {
    /// Alpha at which the row is plotted: the grid value for bound rows, the
    /// constructed state's exact ratio for family rows.
    pub alpha: f64,
    pub family: FamilyTag,
    /// p0 for family A rows, k for family B rows, 0 for the bound.
    pub param: f64,
    pub tau: f64,
    #[serde(rename = "E")]
    pub e: f64,
    #[serde(rename = "dE")]
    pub de: f64,
    pub keel_value: f64,
    pub keel_bound: f64,
    /// Grid alpha this row was generated for (ties family rows to their
    /// sweep point; not a CSV column).
    #[serde(skip)]
    pub grid_alpha: f64,
}

#[derive(Debug, Clone)]
pub struct SweepSpec {
    pub alphas: Vec<f64>,
    pub p0_list: Vec<f64>,
    pub k_list: Vec<u32>,
}

impl SweepSpec {
    /// Parses the CLI form: grid limits plus the "p0-list;k-list" parameter
    /// string.
    pub fn parse(
        alpha_min: f64,
        alpha_max: f64,
        points: usize,
        params: &str,
    ) -> Result<Self, CliError> {
        if !(alpha_min.is_finite() && alpha_min > 0.0 && alpha_max > alpha_min) {
            return Err(CliError::Msg(format!(
                "need 0 < alpha-min < alpha-max, got [{alpha_min}, {alpha_max}]"
            )));
        }
        if points < 1 {
            return Err(CliError::Msg("points must be >= 1".into()));
        }
        let mut halves = params.split(';');
        let (a_part, b_part) = match (halves.next(), halves.next(), halves.next()) {
            (Some(a), Some(b), None) => (a, b),
            _ => {
                return Err(CliError::Msg(
                    "params must be \"p0,p0,...;k,k,...\" (either list may be empty)".into(),
                ))
            }
        };
        let p0_list = parse_list::<f64>(a_part)?;
        let k_list = parse_list::<u32>(b_part)?;
        Ok(Self {
            alphas: alpha_grid(alpha_min, alpha_max, points),
            p0_list,
            k_list,
        })
    }
}

fn parse_list<T: std::str::FromStr>(text: &str) -> Result<Vec<T>, CliError> {
    text.split(',')
        .map(str::trim)
        .filter(|t| !t.is_empty())
        .map(|t| {
            t.parse::<T>()
                .map_err(|_| CliError::Msg(format!("bad list entry \"{t}\"")))
        })
        .collect()
}

/// Alpha grid uniform in `(alpha - 1)/(alpha + 1)`, endpoints included.
pub fn alpha_grid(alpha_min: f64, alpha_max: f64, points: usize) -> Vec<f64> {
    let to_u = |a: f64| (a - 1.0) / (a + 1.0);
    let from_u = |u: f64| (1.0 + u) / (1.0 - u);
    let (u0, u1) = (to_u(alpha_min), to_u(alpha_max));
    (0..points)
        .map(|j| {
            if points == 1 {
                return alpha_min;
            }
            let u = u0 + (u1 - u0) * j as f64 / (points - 1) as f64;
            let a = from_u(u);
            if (a - 1.0).abs() < 1e-12 {
                1.0
            } else {
                a
            }
        })
        .collect()
}

/// Builds every row in deterministic alpha-then-parameter order. Family
/// construction failures are reported to `progress` and the row skipped.
pub fn run_sweep(
    spec: &SweepSpec,
    units: &UnitConvention,
    progress: &mut dyn Write,
) -> Result<Vec<SweepRow>, CliError> {
    let h = units.h;
    let mut rows = Vec::new();
    for &alpha in &spec.alphas {
        rows.push(SweepRow {
            alpha,
            family: FamilyTag::Bound,
            param: 0.0,
            tau: 0.25 * h * (1.0f64).max(1.0 / alpha),
            e: 1.0,
            de: alpha,
            keel_value: keel_bound(alpha),
            keel_bound: keel_bound(alpha),
            grid_alpha: alpha,
        });

        if alpha == 1.0 {
            // Exact attainment: the equal-weight two-level state.
            rows.push(SweepRow {
                alpha: 1.0,
                family: FamilyTag::A,
                param: 0.0,
                tau: 0.5 * h,
                e: 0.5,
                de: 0.5,
                keel_value: 1.0,
                keel_bound: 1.0,
                grid_alpha: alpha,
            });
        } else if alpha < 1.0 {
            for &p0 in &spec.p0_list {
                match family_a_refine(&FamilyAParams { alpha, p0 }, units) {
                    Ok(fam) => rows.push(family_row(FamilyTag::A, p0, &fam, alpha, h)),
                    Err(e) => {
                        writeln!(progress, "skipping alpha={alpha} p0={p0}: {e}")?;
                    }
                }
            }
        } else {
            for &k in &spec.k_list {
                match family_b(&FamilyBParams { alpha, k, e1: 1.0 }, units) {
                    Ok(fam) => rows.push(family_row(FamilyTag::B, k as f64, &fam, alpha, h)),
                    Err(e) => {
                        writeln!(progress, "skipping alpha={alpha} k={k}: {e}")?;
                    }
                }
            }
        }
    }
    Ok(rows)
}

fn family_row(
    tag: FamilyTag,
    param: f64,
    fam: &qsl_core::families::FamilyState,
    grid_alpha: f64,
    h: f64,
) -> SweepRow {
    let m = fam.state.moments();
    SweepRow {
        alpha: fam.achieved_alpha,
        family: tag,
        param,
        tau: fam.achieved_tau,
        e: m.mean_energy,
        de: m.energy_spread,
        keel_value: 2.0 * fam.achieved_tau * (m.mean_energy + m.energy_spread) / h,
        keel_bound: keel_bound(fam.achieved_alpha),
        grid_alpha,
    }
}

fn sig12(x: f64) -> String {
    format!("{x:.11e}")
}

/// Renders rows as CSV with 12 significant digits and `\n` line endings;
/// byte-stable for identical inputs.
pub fn to_csv(rows: &[SweepRow]) -> String {
    let mut out = String::from("alpha,family,param,tau,E,dE,keel_value,keel_bound\n");
    for r in rows {
        out.push_str(&format!(
            "{},{},{},{},{},{},{},{}\n",
            sig12(r.alpha),
            r.family,
            sig12(r.param),
            sig12(r.tau),
            sig12(r.e),
            sig12(r.de),
            sig12(r.keel_value),
            sig12(r.keel_bound),
        ));
    }
    out
}
