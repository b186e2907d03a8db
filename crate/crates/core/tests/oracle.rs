//! Analytic expected coefficients and effect decompositions of the built-ins.

#![allow(clippy::needless_range_loop)]

use changescore_core::scenario::{self, ScenarioId};
use changescore_core::{builtin, Strategy};

/// (change-score, adjusted, unadjusted), computed independently with a dense
/// numpy path-algebra script and frozen here.
const FROZEN: [(ScenarioId, [f64; 3]); 8] = [
    (ScenarioId::S1A, [0.2, 0.2, 0.2]),
    (ScenarioId::S1B, [0.191, 0.20365740740740743, 0.228]),
    (ScenarioId::S2A, [0.11906250000000003, 0.2, 0.3503125]),
    (
        ScenarioId::S2B,
        [0.11203750000000003, 0.2054761904761905, 0.3802875],
    ),
    (ScenarioId::S3A, [-0.030769230769230767, 0.05, 0.2]),
    (
        ScenarioId::S3B,
        [-0.03976923076923075, 0.050785247517660295, 0.228],
    ),
    (
        ScenarioId::S3APlus,
        [-0.030769230769230767, 0.0254186497545479, 0.2],
    ),
    (
        ScenarioId::S3BPlus,
        [-0.03976923076923075, 0.018562946514201224, 0.228],
    ),
];

fn oracle(id: ScenarioId, s: Strategy) -> f64 {
    builtin(id).oracle(s).unwrap()
}

#[test]
fn matches_frozen_oracle() {
    for (id, expected) in FROZEN {
        for (s, e) in Strategy::ALL.into_iter().zip(expected) {
            let got = oracle(id, s);
            assert!((got - e).abs() < 1e-12, "{id} {s}: {got} vs {e}");
        }
    }
}

#[test]
fn published_a_scenario_values_to_three_decimals() {
    let table = [
        (ScenarioId::S1A, [0.200, 0.200, 0.200]),
        (ScenarioId::S2A, [0.119, 0.200, 0.350]),
        (ScenarioId::S3A, [-0.031, 0.050, 0.200]),
        (ScenarioId::S3APlus, [-0.031, 0.025, 0.200]),
    ];
    for (id, expected) in table {
        for (s, e) in Strategy::ALL.into_iter().zip(expected) {
            assert!((oracle(id, s) - e).abs() <= 0.0005 + 1e-12, "{id} {s}");
        }
    }
    // 2A unadjusted: 0.3503 analytically; the published median is 0.351.
    assert!((oracle(ScenarioId::S2A, Strategy::FollowUpUnadjusted) - 0.351).abs() < 0.001);
}

#[test]
fn competing_exposure_strategies_coincide() {
    let v: Vec<f64> = Strategy::ALL
        .iter()
        .map(|&s| oracle(ScenarioId::S1A, s))
        .collect();
    assert_eq!(v[0], v[2]);
    assert!((v[0] - v[1]).abs() < 1e-15);
    assert!((v[0] - 0.2).abs() < 1e-15);
}

#[test]
fn mediator_sign_reversal() {
    let cs = oracle(ScenarioId::S3A, Strategy::ChangeScore);
    let total = oracle(ScenarioId::S3A, Strategy::FollowUpUnadjusted);
    assert!(cs < 0.0 && 0.0 < total);
}

#[test]
fn unadjusted_identical_in_1b_and_3b() {
    let a = oracle(ScenarioId::S1B, Strategy::FollowUpUnadjusted);
    let b = oracle(ScenarioId::S3B, Strategy::FollowUpUnadjusted);
    assert!((a - b).abs() < 1e-15, "{a} vs {b}");
}

#[test]
fn change_score_is_difference_of_slopes() {
    for id in ScenarioId::ALL {
        let spec = builtin(id);
        let sem = &spec.sem;
        let slope_y0 = sem.raw_cov("WC0", "IC0").unwrap() / sem.raw_cov("WC0", "WC0").unwrap();
        let cs = oracle(id, Strategy::ChangeScore);
        let un = oracle(id, Strategy::FollowUpUnadjusted);
        assert!((cs - (un - slope_y0)).abs() < 1e-15, "{id}");
    }
}

#[test]
fn removing_u2_leaves_change_score_and_unadjusted() {
    for id in [ScenarioId::S3APlus, ScenarioId::S3BPlus] {
        for s in [Strategy::ChangeScore, Strategy::FollowUpUnadjusted] {
            assert!((oracle(id, s) - oracle(id.parent(), s)).abs() < 1e-15);
        }
        assert!(
            oracle(id, Strategy::FollowUpAdjusted)
                < oracle(id.parent(), Strategy::FollowUpAdjusted)
        );
    }
}

#[test]
fn total_effect_two_routes_agree() {
    for id in ScenarioId::ALL {
        let sem = builtin(id).sem;
        let m = sem.total_effect_matrix();
        let dag = sem.dag();
        for x in 0..dag.len() {
            for y in 0..dag.len() {
                let traced = sem.total_effect(dag.name(x), dag.name(y)).unwrap();
                assert!((traced - m[y][x]).abs() < 1e-12, "{id} {x}->{y}");
            }
        }
    }
}

#[test]
fn mediated_effect_decomposition() {
    for id in [
        ScenarioId::S3A,
        ScenarioId::S3B,
        ScenarioId::S3APlus,
        ScenarioId::S3BPlus,
    ] {
        let sem = builtin(id).sem;
        let total = sem.total_effect("WC0", "IC1").unwrap();
        let direct = sem.direct_effect("WC0", "IC1").unwrap();
        let total_raw = sem.to_unstandardized(total, "WC0", "IC1").unwrap();
        let direct_raw = sem.to_unstandardized(direct, "WC0", "IC1").unwrap();
        assert!((direct_raw - 0.050).abs() < 1e-9, "{id}");
        assert!((total_raw - direct_raw - 0.150).abs() < 1e-9, "{id}");
        assert!((total_raw - 0.200).abs() < 1e-9);
    }
    let sem = builtin(ScenarioId::S3A).sem;
    assert!((sem.total_effect("WC0", "IC1").unwrap() - 0.4324).abs() < 1e-4);
    assert!((sem.direct_effect("WC0", "IC1").unwrap() - 0.1081).abs() < 1e-4);
    assert_eq!(sem.total_effect("IC1", "WC0").unwrap(), 0.0);
}

#[test]
fn builtin_coefficients_and_scales() {
    let s = builtin(ScenarioId::S3BPlus);
    let c = |a: &str, b: &str| s.sem.coefficient(a, b).unwrap().unwrap();
    assert_eq!(c("IC0", "IC1"), 0.65);
    assert!((c("WC0", "IC1") - 0.108108).abs() < 1e-6);
    assert!((c("WC0", "IC0") - 0.498961).abs() < 1e-6);
    assert!((c("U", "WC0") - 0.282843).abs() < 1e-6);
    assert!((c("U2", "IC1") - 0.282843).abs() < 1e-6);
    assert!((c("U", "IC1") - 0.030195).abs() < 1e-6);
    let s2 = builtin(ScenarioId::S2A);
    assert_eq!(s2.sem.coefficient("IC0", "WC0").unwrap(), Some(0.5));
    assert!((s2.sem.coefficient("WC0", "IC1").unwrap().unwrap() - 0.432432).abs() < 1e-6);
    assert_eq!(s2.sem.mean("IC1").unwrap(), 4.2);
    assert_eq!(s2.sem.sd("WC0").unwrap(), 1.6);
    assert!((scenario::SD_RATIO - 0.4625).abs() < 1e-15);
}

#[test]
fn builtin_residuals_admissible() {
    for id in ScenarioId::ALL {
        let sem = builtin(id).sem;
        for node in sem.dag().nodes() {
            let r = sem.residual_variance(&node.name).unwrap();
            assert!(r > 0.0 && r <= 1.0, "{id} {}: {r}", node.name);
        }
    }
    let sem = builtin(ScenarioId::S3A).sem;
    assert!((sem.residual_variance("IC1").unwrap() - 0.49568845872899925).abs() < 1e-12);
    assert!((sem.residual_variance("IC1").unwrap() - 0.4956).abs() < 1e-3);
}

#[test]
fn implied_correlations() {
    let c = builtin(ScenarioId::S2A).sem.implied_covariance(true);
    assert!((c.get("WC0", "IC0").unwrap() - 0.5).abs() < 1e-15);
    assert!((c.get("WC0", "IC1").unwrap() - 0.7574324324324325).abs() < 1e-12);
}

/// Symmetric Jacobi eigenvalues (test-only).
fn eigenvalues(mut a: Vec<Vec<f64>>) -> Vec<f64> {
    let n = a.len();
    for _ in 0..100 {
        let mut off = 0.0;
        for p in 0..n {
            for q in (p + 1)..n {
                off += a[p][q] * a[p][q];
                if a[p][q].abs() < 1e-300 {
                    continue;
                }
                let theta = (a[q][q] - a[p][p]) / (2.0 * a[p][q]);
                let t = theta.signum() / (theta.abs() + (theta * theta + 1.0).sqrt());
                let t = if theta == 0.0 { 1.0 } else { t };
                let c = 1.0 / (t * t + 1.0).sqrt();
                let s = t * c;
                for k in 0..n {
                    let (akp, akq) = (a[k][p], a[k][q]);
                    a[k][p] = c * akp - s * akq;
                    a[k][q] = s * akp + c * akq;
                }
                for k in 0..n {
                    let (apk, aqk) = (a[p][k], a[q][k]);
                    a[p][k] = c * apk - s * aqk;
                    a[q][k] = s * apk + c * aqk;
                }
            }
        }
        if off < 1e-30 {
            break;
        }
    }
    (0..n).map(|i| a[i][i]).collect()
}

#[test]
fn implied_covariance_symmetric_psd() {
    for id in ScenarioId::ALL {
        for standardized in [true, false] {
            let c = builtin(id).sem.implied_covariance(standardized);
            let k = c.dim();
            let mut m = vec![vec![0.0; k]; k];
            for i in 0..k {
                for j in 0..k {
                    assert_eq!(c.at(i, j), c.at(j, i));
                    m[i][j] = c.at(i, j);
                }
            }
            for ev in eigenvalues(m) {
                assert!(ev >= -1e-10, "{id}: {ev}");
            }
        }
    }
}
