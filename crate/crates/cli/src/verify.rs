//! Numerical property suites behind `qsl verify`.
//!
//! Each check samples with a fixed seed, so runs are reproducible; `samples`
//! scales the trigonometric scans directly and the state-based scans at
//! 1/1000 of that (they cost a zero search per sample).

use serde::Serialize;

use qsl_core::bounds::{
    bound_report, fold_spectrum, is_equal_two_level, keel_bound, reflect_spectrum, trig_margin_a,
    trig_margin_b,
};
use qsl_core::families::{family_a_refine, family_b, FamilyAParams, FamilyBParams};
use qsl_core::mixed::{rank2_counterexample, trace_overlap};
use qsl_core::sampling::StateSampler;
use qsl_core::survival::{first_orthogonal_time, survival_amplitude, ZeroFinderConfig};
use qsl_core::units::UnitConvention;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Suite {
    Trig,
    Bounds,
    Families,
    Mixed,
    All,
}

impl Suite {
    pub fn from_name(name: &str) -> Option<Self> {
        match name {
            "trig" => Some(Suite::Trig),
            "bounds" => Some(Suite::Bounds),
            "families" => Some(Suite::Families),
            "mixed" => Some(Suite::Mixed),
            "all" => Some(Suite::All),
            _ => None,
        }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct Check {
    pub name: String,
    pub passed: bool,
    pub detail: String,
}

fn check(name: &str, passed: bool, detail: String) -> Check {
    Check {
        name: name.to_string(),
        passed,
        detail,
    }
}

pub fn run_suite(suite: Suite, samples: u64) -> Vec<Check> {
    match suite {
        Suite::Trig => trig_suite(samples),
        Suite::Bounds => bounds_suite(samples),
        Suite::Families => families_suite(),
        Suite::Mixed => mixed_suite(),
        Suite::All => {
            let mut all = trig_suite(samples);
            all.extend(bounds_suite(samples));
            all.extend(families_suite());
            all.extend(mixed_suite());
            all
        }
    }
}

fn trig_suite(samples: u64) -> Vec<Check> {
    use std::f64::consts::PI;
    let mut sampler = StateSampler::new(0x7219);
    let mut checks = Vec::new();

    let mut min_a = f64::INFINITY;
    let mut stray_a = 0u64;
    for _ in 0..samples {
        let x = sampler.uniform(-20.0, 20.0);
        let m = trig_margin_a(x);
        min_a = min_a.min(m);
        if m <= 1e-13 {
            let dist = x.abs().min((x.abs() - PI).abs());
            if dist > 1e-6 {
                stray_a += 1;
            }
        }
    }
    checks.push(check(
        "trig.margin_a.nonnegative",
        min_a >= -1e-12,
        format!("min margin {min_a:.3e} over {samples} samples in [-20, 20]"),
    ));
    checks.push(check(
        "trig.margin_a.equality_set",
        stray_a == 0,
        format!("{stray_a} near-equality points away from {{0, +-pi}}"),
    ));

    let mut min_b = f64::INFINITY;
    let mut stray_b = 0u64;
    for _ in 0..samples {
        let x = sampler.uniform(0.0, 40.0);
        let m = trig_margin_b(x).expect("x >= 0");
        min_b = min_b.min(m);
        if m <= 1e-13 {
            let dist = x.min((x - PI).abs());
            if dist > 1e-6 {
                stray_b += 1;
            }
        }
    }
    checks.push(check(
        "trig.margin_b.nonnegative",
        min_b >= -1e-12,
        format!("min margin {min_b:.3e} over {samples} samples in [0, 40]"),
    ));
    checks.push(check(
        "trig.margin_b.equality_set",
        stray_b == 0,
        format!("{stray_b} near-equality points away from {{0, pi}}"),
    ));
    checks
}

fn bounds_suite(samples: u64) -> Vec<Check> {
    let units = UnitConvention::default();
    let cfg = ZeroFinderConfig::default();
    let n = (samples / 1000).clamp(100, 5000) as usize;
    let mut sampler = StateSampler::new(0xB0B0);
    let mut checks = Vec::new();

    let mut moments_ok = true;
    for _ in 0..n {
        let s = sampler.random_spectral(6);
        let m = s.moments();
        moments_ok &= m.energy_spread >= 0.0 && m.e_max >= m.mean_energy;
    }
    checks.push(check(
        "bounds.moments.sane",
        moments_ok,
        format!("dE >= 0 and e_max >= E on {n} random states"),
    ));

    let mut worst = f64::INFINITY;
    let mut rigid_ok = true;
    for _ in 0..n {
        let s = sampler.random_orthogonal();
        let r = first_orthogonal_time(&s, &cfg, &units).expect("finder");
        let tau = match r.tau {
            Some(t) => t,
            None => {
                worst = f64::NEG_INFINITY;
                continue;
            }
        };
        let m = s.moments();
        for ratio in [
            tau * 4.0 * m.energy_spread / units.h,
            tau * 4.0 * m.mean_energy / units.h,
            tau * 2.0 * m.e_max / units.h,
        ] {
            worst = worst.min(ratio);
        }
        if tau * 2.0 * m.e_max / units.h <= 1.0 + 1e-6 && !is_equal_two_level(&s, 1e-6) {
            rigid_ok = false;
        }
    }
    checks.push(check(
        "bounds.located_zeros.respect_bounds",
        worst >= 1.0 - 1e-9,
        format!("worst bound ratio {worst:.12} on {n} orthogonal states"),
    ));
    checks.push(check(
        "bounds.emax_attainment.rigidity",
        rigid_ok,
        "near-attainment of h/(2 e_max) only by equal two-level states".into(),
    ));

    let mut fold_ok = true;
    let mut reflect_ok = true;
    for _ in 0..n {
        let s = sampler.random_orthogonal_lifted();
        let folded = fold_spectrum(&s, 1.0, &units).expect("fold");
        let drift = (survival_amplitude(&s, 1.0, &units)
            - survival_amplitude(&folded, 1.0, &units))
        .norm();
        fold_ok &= drift < 1e-12
            && folded.moments().mean_energy <= s.moments().mean_energy + 1e-12
            && folded.e_max() < units.h;

        let r = reflect_spectrum(&s);
        for i in 0..40 {
            let t = 0.07 * i as f64;
            let d = (survival_amplitude(&s, t, &units).norm()
                - survival_amplitude(&r, t, &units).norm())
            .abs();
            reflect_ok &= d < 1e-12;
        }
    }
    checks.push(check(
        "bounds.fold.preserves_zero",
        fold_ok,
        format!("S(tau) drift < 1e-12 and mean never rises on {n} lifted states"),
    ));
    checks.push(check(
        "bounds.reflect.preserves_modulus",
        reflect_ok,
        "|S(t)| invariant under spectrum reflection".into(),
    ));
    checks
}

fn families_suite() -> Vec<Check> {
    let units = UnitConvention::default();
    let mut checks = Vec::new();

    let mut b_ok = true;
    let mut b_detail = String::new();
    for (alpha, k) in [(1.5, 2), (2.0, 10), (3.0, 6), (4.0, 12)] {
        let fam = family_b(
            &FamilyBParams {
                alpha,
                k,
                e1: 1.0,
            },
            &units,
        )
        .expect("family B");
        let s = survival_amplitude(&fam.state, 0.5 * units.h, &units).norm();
        if s >= 1e-12 || fam.bound_ratio <= 1.0 {
            b_ok = false;
            b_detail = format!("alpha={alpha} k={k}: |S|={s:.2e} ratio={}", fam.bound_ratio);
        }
    }
    checks.push(check(
        "families.b.exact_orthogonality",
        b_ok,
        if b_ok { "|S(h/2E1)| < 1e-12 on the (alpha, k) grid".into() } else { b_detail },
    ));

    let mut a_ok = true;
    let mut a_detail = String::new();
    for (alpha, p0) in [(0.4, 0.02), (0.5, 0.01), (0.7, 0.05)] {
        let fam = family_a_refine(&FamilyAParams { alpha, p0 }, &units).expect("family A");
        let s = survival_amplitude(&fam.state, fam.achieved_tau, &units).norm();
        if s >= 1e-10 || (fam.achieved_alpha - alpha).abs() >= 1e-10 || fam.bound_ratio <= 1.0 {
            a_ok = false;
            a_detail = format!(
                "alpha={alpha} p0={p0}: |S|={s:.2e} alpha_err={:.2e}",
                (fam.achieved_alpha - alpha).abs()
            );
        }
    }
    checks.push(check(
        "families.a.refined_orthogonality",
        a_ok,
        if a_ok { "exact zero and exact alpha after refinement".into() } else { a_detail },
    ));

    let ratios_a: Vec<f64> = [0.05, 0.02, 0.01]
        .iter()
        .map(|&p0| {
            family_a_refine(&FamilyAParams { alpha: 0.5, p0 }, &units)
                .expect("family A")
                .bound_ratio
        })
        .collect();
    let ratios_b: Vec<f64> = [5u32, 10, 20]
        .iter()
        .map(|&k| {
            family_b(
                &FamilyBParams {
                    alpha: 2.0,
                    k,
                    e1: 1.0,
                },
                &units,
            )
            .expect("family B")
            .bound_ratio
        })
        .collect();
    let monotone = ratios_a.windows(2).all(|w| w[1] < w[0])
        && ratios_b.windows(2).all(|w| w[1] < w[0]);
    checks.push(check(
        "families.ratio.monotone_convergence",
        monotone,
        format!("A: {ratios_a:?}, B: {ratios_b:?}"),
    ));

    let fam = family_a_refine(
        &FamilyAParams {
            alpha: 0.5,
            p0: 0.002,
        },
        &units,
    )
    .expect("family A");
    let m = fam.state.moments();
    let keel = 2.0 * fam.achieved_tau * (m.mean_energy + m.energy_spread) / units.h;
    let target = keel_bound(0.5);
    checks.push(check(
        "families.keel.approaches_bound",
        keel >= target && keel < target * 1.01,
        format!("keel {keel:.6} vs bound {target:.6} at p0 = 0.002"),
    ));
    checks
}

fn mixed_suite() -> Vec<Check> {
    let units = UnitConvention::default();
    let mut sampler = StateSampler::new(0x313D);
    let mut checks = Vec::new();

    let mut purity_ok = true;
    let mut positive_ok = true;
    for _ in 0..50 {
        let l1 = sampler.uniform(0.05, 0.95);
        let e1 = sampler.uniform(0.3, 3.0);
        let ens = rank2_counterexample(e1, l1).expect("rank-2 ensemble");
        let at_zero = trace_overlap(&ens, 0.0, &units);
        purity_ok &= (at_zero - (l1 * l1 + (1.0 - l1) * (1.0 - l1))).abs() < 1e-12;
        let tau = 0.5 * units.h / e1;
        let at_tau = trace_overlap(&ens, tau, &units);
        let expect = 2.0 * l1 * (1.0 - l1);
        positive_ok &= at_tau > 0.0 && (at_tau - expect).abs() < 1e-10;
    }
    checks.push(check(
        "mixed.trace.purity_at_zero",
        purity_ok,
        "Tr[rho(0)^2] = sum of squared weights".into(),
    ));
    checks.push(check(
        "mixed.trace.positive_at_tau",
        positive_ok,
        "rank-2 trace overlap equals 2 l1 l2 > 0 at the pure zero time".into(),
    ));

    // Mixing never pushes the orthogonality functional to zero before the
    // unified bound of the ensemble moments.
    let mut early_ok = true;
    for _ in 0..50 {
        let l1 = sampler.uniform(0.05, 0.95);
        let e1 = sampler.uniform(0.5, 2.0);
        let ens = rank2_counterexample(e1, l1).expect("rank-2 ensemble");
        let report = bound_report(&ens.moments(), &units).expect("bounds");
        for i in 1..=50 {
            let t = report.tau_unified * 0.999 * i as f64 / 50.0;
            if trace_overlap(&ens, t, &units) <= 1e-12 {
                early_ok = false;
            }
        }
    }
    checks.push(check(
        "mixed.trace.no_zero_before_bound",
        early_ok,
        "Tr[rho(0) rho(t)] > 0 strictly before tau_unified".into(),
    ));
    checks
}
