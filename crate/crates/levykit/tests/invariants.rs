//! Cross-cutting invariants: transform identities, drift consistency,
//! scaling laws, density self-similarity, and sampler law checks.

use std::f64::consts::PI;

use levykit::concentration::ConcentrationFn;
use levykit::conditions::{self, WindowKind};
use levykit::density::{self, GridRequest};
use levykit::exponent::CharExponent;
use levykit::measure::zoo::{self, ZooMember};
use levykit::measure::SymmetricMatrix;
use levykit::numeric::quad;
use levykit::report::Verdict;
use levykit::simulate::{IncrementSampler, SamplerConfig, SmallJumpPolicy};
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn measures() -> Vec<ZooMember> {
    vec![
        zoo::isotropic_stable(1, 0.7).unwrap(),
        zoo::isotropic_stable(1, 1.5).unwrap(),
        zoo::isotropic_stable(2, 1.0).unwrap(),
        zoo::cylindrical_stable(2, 1.2).unwrap(),
        zoo::one_sided_1_stable(),
        zoo::stable_subordinator(0.5).unwrap(),
        zoo::mixed_stable_with_atoms(1.0).unwrap(),
    ]
}

/// Both tail-transform displays, for f(s) = s and f(s) = s², against
/// independent quadrature of the tail-mass side.
#[test]
fn tail_transform_identities() {
    let mut rng = ChaCha8Rng::seed_from_u64(4);
    for m in measures() {
        let n = m.triplet.levy();
        for _ in 0..5 {
            let r = 2f64.powf(rng.gen_range(-3.0..3.0));
            for q in [1.0, 2.0] {
                // ∫_{|z|<r} |z|^q N(dz) = ∫_0^r q s^{q-1} N(B_s^c) ds − r^q N(B_r^c).
                let lhs = n.partial_moment(0.0, r, q).unwrap();
                if lhs.is_finite() {
                    let f = |s: f64| q * s.powf(q - 1.0) * n.tail_mass(s).unwrap_or(f64::NAN);
                    let rhs = quad::integrate_panels(&f, 0.0, r, r * 0.25, 1e-9, &[]).unwrap()
                        - r.powf(q) * n.tail_mass(r).unwrap();
                    assert!(
                        (lhs - rhs).abs() <= 1e-6 * lhs.abs().max(1e-12),
                        "{} ball moment q={q} r={r}: {lhs} vs {rhs}",
                        m.name
                    );
                }
                // ∫_{|z|≥r} |z|^q N(dz) = ∫_0^∞ q s^{q-1} N(B_{r∨s}^c) ds.
                let lhs_tail = n.partial_moment(r, f64::INFINITY, q).unwrap();
                if lhs_tail.is_finite() {
                    let f = |s: f64| {
                        q * s.powf(q - 1.0) * n.tail_mass(s.max(r)).unwrap_or(f64::NAN)
                    };
                    let rhs = quad::integrate_panels(&f, 0.0, f64::INFINITY, r, 1e-9, &[]).unwrap();
                    assert!(
                        (lhs_tail - rhs).abs() <= 1e-6 * lhs_tail.abs().max(1e-12),
                        "{} tail moment q={q} r={r}: {lhs_tail} vs {rhs}",
                        m.name
                    );
                }
            }
        }
    }
}

/// |b_{r1} − b_{r2}| ≤ ∫_{r∧ ≤ |z| < r∨} |z| N(dz) ≤ (r∨)·h(r∧).
#[test]
fn effective_drift_consistency() {
    let mut rng = ChaCha8Rng::seed_from_u64(12);
    for m in measures() {
        for _ in 0..8 {
            let r1 = 2f64.powf(rng.gen_range(-4.0..4.0));
            let r2 = 2f64.powf(rng.gen_range(-4.0..4.0));
            if (r1 - r2).abs() < 1e-9 {
                continue;
            }
            let (lo, hi) = (r1.min(r2), r1.max(r2));
            let b1 = m.triplet.effective_drift(r1).unwrap();
            let b2 = m.triplet.effective_drift(r2).unwrap();
            let dev: f64 = b1
                .iter()
                .zip(&b2)
                .map(|(a, b)| (a - b) * (a - b))
                .sum::<f64>()
                .sqrt();
            let annulus = m.triplet.levy().annulus_first_moment(lo, hi).unwrap();
            let bound = hi * m.triplet.h_raw(lo).unwrap();
            assert!(
                dev <= annulus * (1.0 + 1e-9) + 1e-12,
                "{}: |b_{r1} - b_{r2}| = {dev} > annulus {annulus}",
                m.name
            );
            assert!(
                annulus <= bound * (1.0 + 1e-9),
                "{}: annulus {annulus} > (r∨)h(r∧) = {bound}",
                m.name
            );
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    /// Tail masses fall, truncated second moments rise, h falls, and the
    /// quadratic scaling bound holds, across random radii pairs.
    #[test]
    fn monotonicity_and_scaling(e1 in -6.0f64..6.0, e2 in -6.0f64..6.0, lam in 0.05f64..1.0) {
        let m = zoo::mixed_stable_with_atoms(1.0).unwrap();
        let n = m.triplet.levy();
        let (r1, r2) = (2f64.powf(e1.min(e2)), 2f64.powf(e1.max(e2)));
        prop_assert!(n.tail_mass(r1).unwrap() >= n.tail_mass(r2).unwrap() - 1e-12);
        prop_assert!(
            n.truncated_second_moment(r1).unwrap()
                <= n.truncated_second_moment(r2).unwrap() + 1e-12
        );
        let h1 = m.triplet.h_raw(r1).unwrap();
        let h2 = m.triplet.h_raw(r2).unwrap();
        prop_assert!(h1 >= h2 * (1.0 - 1e-12));
        // Quadratic scaling bound: λ²h(λr) ≤ h(r) for λ ≤ 1.
        let r = 2f64.powf(e1);
        let h_r = m.triplet.h_raw(r).unwrap();
        let h_lam = m.triplet.h_raw(lam * r).unwrap();
        prop_assert!(lam * lam * h_lam <= h_r * (1.0 + 1e-12));
        // Tail bounds of the concentration function.
        prop_assert!(n.tail_mass(r).unwrap() <= h_r * (1.0 + 1e-12));
        prop_assert!(n.truncated_second_moment(r).unwrap() <= r * r * h_r * (1.0 + 1e-12));
    }
}

/// The two h evaluators (definition vs tail-mass representation) agree to
/// 1e-6 relative across dyadic radii.
#[test]
fn h_evaluator_agreement() {
    for m in measures() {
        let c = ConcentrationFn::new(&m.triplet).unwrap();
        for k in (-20..=20).step_by(4) {
            let r = 2f64.powi(k);
            let a = c.h(r).unwrap();
            let b = c.h_by_tail_representation(r).unwrap();
            assert!(
                (a - b).abs() <= 1e-6 * a,
                "{} r=2^{k}: {a} vs {b}",
                m.name
            );
        }
    }
}

/// √Re ψ is subadditive along orthogonal splittings.
#[test]
fn re_psi_subadditive_on_splittings() {
    let m = zoo::mixed_stable_with_atoms(1.3).unwrap();
    let e = CharExponent::new(&m.triplet);
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    for _ in 0..24 {
        let x = [rng.gen_range(-6.0..6.0), rng.gen_range(-6.0..6.0)];
        let full = e.re_psi(&x).unwrap();
        let part1 = e.re_psi(&[x[0], 0.0]).unwrap();
        let part2 = e.re_psi(&[0.0, x[1]]).unwrap();
        assert!(
            full <= 2.0 * part1 + 2.0 * part2 + 1e-12,
            "Re ψ{x:?} = {full} vs 2({part1} + {part2})"
        );
    }
}

/// ψ* is non-decreasing in r.
#[test]
fn psi_star_monotone() {
    let m = zoo::mixed_stable_with_atoms(1.0).unwrap();
    let e = CharExponent::new(&m.triplet);
    let mut prev = 0.0;
    for k in -8..8 {
        let v = e.psi_star(2f64.powi(k)).unwrap().value;
        assert!(v >= prev * (1.0 - 1e-9));
        prev = v;
    }
}

/// (A1) propagates to (A3) with the predicted constant 1/(c_d·C_h) up to
/// the documented 2× lattice slack.
#[test]
fn scaling_constant_propagation() {
    for m in [
        zoo::isotropic_stable(1, 1.5).unwrap(),
        zoo::stable_subordinator(0.5).unwrap(),
    ] {
        let c = ConcentrationFn::new(&m.triplet).unwrap();
        let e = CharExponent::new(&m.triplet);
        let w = conditions::estimate_scaling(&c, WindowKind::LowerAtZero, f64::INFINITY).unwrap();
        let reports = conditions::check_a_family(&c, &e, &w).unwrap();
        let a3 = reports.iter().find(|r| r.id == "A3").unwrap();
        let predicted = a3.constant("predicted_lower").unwrap();
        let observed = a3.constant("observed_lower").unwrap();
        assert!(
            observed >= predicted / 2.0,
            "{}: observed {observed} vs predicted {predicted}",
            m.name
        );
        assert_eq!(a3.verdict, Verdict::Pass);
    }
}

/// Window stretching: a finite-θ window extends to R at the cost of
/// inflating the constant by (R/θ)².
#[test]
fn window_stretching() {
    let m = zoo::product_stable([0.5, 1.0, 1.5]).unwrap();
    let c = ConcentrationFn::new(&m.triplet).unwrap();
    let theta = 1.0;
    let w = conditions::estimate_scaling(&c, WindowKind::LowerAtZero, theta).unwrap();
    let big_r = 4.0;
    let stretched = w.constant * (big_r / theta) * (big_r / theta);
    for rk in [1.5f64, 2.0, 3.0, 3.9] {
        for lk in [0.5f64, 0.25, 0.0625] {
            let h_r = m.triplet.h_raw(rk).unwrap();
            let h_l = m.triplet.h_raw(lk * rk).unwrap();
            assert!(
                h_r <= stretched * lk.powf(w.alpha) * h_l * (1.0 + 1e-9),
                "stretched window violated at r={rk}, λ={lk}"
            );
        }
    }
}

/// Self-similarity of stable densities: p(t,x) = t^{-d/α} p(1, t^{-1/α} x),
/// grid values against wrap-free point quadrature.
#[test]
fn density_self_similarity() {
    let alpha = 1.5;
    let m = zoo::isotropic_stable(1, alpha).unwrap();
    let gt = density::density_grid(&m.triplet, 0.25, &GridRequest::default()).unwrap();
    let s = 0.25f64.powf(-1.0 / alpha);
    let n = gt.lattice.points[0];
    for i in [n / 2, n / 2 + 7, n / 2 - 40, n / 2 + 40] {
        let x = gt.coordinate(0, i);
        let lhs = gt.values[i];
        let rhs = s * density::density_point(&m.triplet, 1.0, &[s * x]).unwrap();
        assert!(
            (lhs - rhs).abs() <= 1e-5 * lhs.max(1e-8),
            "x={x}: {lhs} vs {rhs}"
        );
    }
}

/// The empirical mode radius |x_t| stays within a stable multiple of
/// h⁻¹(1/t) for a self-similar asymmetric member passing (C3). (For the
/// skewed α = 1 member the mode carries a t·ln t drift, so its empirical
/// argmax/scale ratio genuinely varies logarithmically; the argmax is a
/// witness choice, not the near-max point the bound quantifies over.)
#[test]
fn mode_location_tracks_scale() {
    let m = zoo::stable_subordinator(0.5).unwrap();
    let c = ConcentrationFn::new(&m.triplet).unwrap();
    let mut ratios = Vec::new();
    for k in [-6i32, -4, -2, 0] {
        let t = 2f64.powi(k);
        let g = density::density_grid(&m.triplet, t, &GridRequest::default()).unwrap();
        let (_, loc) = g.sup();
        let scale = c.h_inverse(1.0 / t).unwrap();
        ratios.push(loc[0].abs() / scale);
    }
    let max = ratios.iter().cloned().fold(0.0f64, f64::max);
    let min = ratios.iter().cloned().fold(f64::INFINITY, f64::min);
    assert!(max.is_finite() && max > 0.0 && min > 0.0);
    assert!(
        max <= 1.5 * min,
        "mode/scale ratios vary beyond ±50%: {ratios:?}"
    );
}

/// Gradient envelope bounded and consistent with the moment integral.
#[test]
fn gradient_envelope() {
    for m in [
        zoo::gaussian(SymmetricMatrix::scaled_identity(1, 0.5)),
        zoo::isotropic_stable(1, 1.0).unwrap(),
    ] {
        let grid: Vec<f64> = (-6..=0).map(|k| 2f64.powi(k)).collect();
        let cert = density::gradient_envelope_check(&m.triplet, &grid, 2.0).unwrap();
        assert_eq!(cert.verdict, Verdict::Pass, "{}: {:?}", m.name, cert.notes);
    }
}

/// Chapman–Kolmogorov at 16 random points for two members.
#[test]
fn chapman_kolmogorov_random_points() {
    let mut rng = ChaCha8Rng::seed_from_u64(23);
    for m in [
        zoo::isotropic_stable(1, 1.0).unwrap(),
        zoo::gaussian_with_cauchy_jumps(),
    ] {
        let req = GridRequest {
            min_extent: Some(vec![2000.0]),
            min_points: Some(vec![1 << 19]),
        };
        let g1 = density::density_grid(&m.triplet, 0.25, &req).unwrap();
        let g2 = density::density_grid(&m.triplet, 0.5, &req).unwrap();
        for _ in 0..16 {
            let x = rng.gen_range(-2.0..2.0);
            let conv = g1.convolve_at(&g1, &[x]);
            let direct = g2.interpolate(&[x]);
            assert!(
                (conv - direct).abs() <= 1e-4 * direct.max(1e-8),
                "{} x={x}: {conv} vs {direct}",
                m.name
            );
        }
    }
}

/// Empirical characteristic function against e^{-tψ} at 16 frequencies,
/// 10^6 paths (the remaining members run at reduced path counts in the
/// unit suites).
#[test]
fn sampler_law_million_paths() {
    for (member, time) in [
        (zoo::isotropic_stable(1, 1.0).unwrap(), 1.0),
        (zoo::mixed_stable_with_atoms(1.0).unwrap(), 0.25),
    ] {
        let cfg = SamplerConfig {
            epsilon: 0.05,
            policy: SmallJumpPolicy::GaussianSubstitute,
            seed: 77,
            paths: 1_000_000,
        };
        let sampler = IncrementSampler::new(&member.triplet, cfg).unwrap();
        let e = CharExponent::new(&member.triplet);
        let d = member.triplet.dim();
        let freqs: Vec<Vec<f64>> = (1..=16)
            .map(|k| {
                (0..d)
                    .map(|a| 0.25 * k as f64 * if a % 2 == 0 { 1.0 } else { -0.6 })
                    .collect()
            })
            .collect();
        let ecf = sampler.empirical_cf(time, &freqs);
        let tol = 4.0 / 1000.0;
        for (x, emp) in freqs.iter().zip(ecf) {
            let want = (-(time) * e.psi(x).unwrap()).exp();
            assert!(
                (emp - want).norm() < tol,
                "{} at {x:?}: {emp} vs {want}",
                member.name
            );
        }
    }
}

/// Kolmogorov–Smirnov distance of the Cauchy sampler against the arctan
/// law at 10^6 paths.
#[test]
fn cauchy_sampler_ks() {
    let m = zoo::isotropic_stable(1, 1.0).unwrap();
    let cfg = SamplerConfig {
        epsilon: 0.05,
        policy: SmallJumpPolicy::GaussianSubstitute,
        seed: 5,
        paths: 1_000_000,
    };
    let sampler = IncrementSampler::new(&m.triplet, cfg).unwrap();
    let mut xs: Vec<f64> = sampler
        .sample_increments(1.0)
        .into_iter()
        .map(|v| v[0])
        .collect();
    xs.sort_by(|a, b| a.partial_cmp(b).unwrap());
    let n = xs.len() as f64;
    let mut ks = 0.0f64;
    for (i, x) in xs.iter().enumerate() {
        let cdf = 0.5 + x.atan() / PI;
        ks = ks.max((cdf - i as f64 / n).abs());
        ks = ks.max((cdf - (i as f64 + 1.0) / n).abs());
    }
    assert!(ks < 0.002, "KS distance {ks}");
}

/// MC half-line mass agrees with the density-grid mass, and the drifted
/// Gaussian matches the normal tail oracle.
#[test]
fn half_line_cross_checks() {
    let cfg = SamplerConfig {
        epsilon: 0.05,
        policy: SmallJumpPolicy::GaussianSubstitute,
        seed: 13,
        paths: 400_000,
    };
    let m = zoo::one_sided_1_stable();
    let t = 0.25;
    let est = levykit::simulate::half_line_probability(&m.triplet, t, &cfg).unwrap();
    let grid = density::density_grid(&m.triplet, t, &GridRequest::default()).unwrap();
    // Midpoint cells [x - dx/2, x + dx/2) with a linear split of the cell
    // that straddles zero.
    let dx = grid.step(0);
    let mut mass_left = 0.0;
    for i in 0..grid.lattice.points[0] {
        let x = grid.coordinate(0, i);
        let frac = ((0.0 - (x - dx / 2.0)) / dx).clamp(0.0, 1.0);
        mass_left += grid.values[i] * dx * frac;
    }
    assert!(
        (est.value - mass_left).abs() <= est.ci_half_width + 3e-3,
        "MC {} vs grid mass {mass_left}",
        est.value
    );

    // Drifted Gaussian: P(Y_t < 0) = Φ(−10√t) for A = 1/2, b = 10.
    let t = 0.04;
    let g = levykit::measure::GeneratingTriplet::new(
        SymmetricMatrix::scaled_identity(1, 0.5),
        levykit::measure::LevyMeasure::zero(1),
        vec![10.0],
    )
    .unwrap();
    let est = levykit::simulate::half_line_probability(&g, t, &cfg).unwrap();
    let want = 0.5 * statrs::function::erf::erfc(10.0 * t.sqrt() / 2f64.sqrt());
    assert!(
        (est.value - want).abs() <= est.ci_half_width + 5e-4,
        "MC {} vs Φ oracle {want}",
        est.value
    );
}

/// C5 at m = 0 coincides with C2.
#[test]
fn c5_reduces_to_c2() {
    let m = zoo::isotropic_stable(1, 1.0).unwrap();
    let e = CharExponent::new(&m.triplet);
    let c = ConcentrationFn::new(&m.triplet).unwrap();
    let grid = conditions::dyadic_times(1.0, -6, 0);
    let c2 = conditions::check_c2(&e, &c, &grid).unwrap();
    let c5 = conditions::check_c5(&e, &c, 0, &grid).unwrap();
    let a = c2.constant("c2_hat").unwrap();
    let b = c5.constant("c5_hat").unwrap();
    assert!((a - b).abs() <= 1e-9 * a, "{a} vs {b}");
}

/// Decomposition reconstruction: tail masses add back to the original.
#[test]
fn decomposition_reconstruction() {
    let m = zoo::mixed_stable_with_atoms(1.0).unwrap();
    let nu = zoo::cylindrical_stable(2, 1.0).unwrap().triplet.levy().clone();
    let (z1, z2) = levykit::measure::decompose_levy(&m.triplet, &nu, 0.7, 2.0).unwrap();
    for k in -10..10 {
        let r = 2f64.powi(k);
        let total = m.triplet.levy().tail_mass(r).unwrap();
        let sum = z1.levy().tail_mass(r).unwrap() + z2.levy().tail_mass(r).unwrap();
        assert!(
            (total - sum).abs() <= 1e-10 * total.max(1e-300),
            "r=2^{k}: {total} vs {sum}"
        );
    }
}
