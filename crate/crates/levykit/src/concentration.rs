//! The concentration function h, the truncated-moment function K, and the
//! calculus identities connecting them.
//!
//! h(r) = r⁻²‖A‖ + ∫ (1 ∧ |z|²/r²) N(dz) is continuous and strictly
//! decreasing with h(0⁺) = ∞ and h(∞) = 0; its inverse sets the natural
//! space scale h⁻¹(1/t) of the process at time t.

use crate::conditions::{ScalingWindow, WindowKind};
use crate::error::{LevyError, Result};
use crate::measure::GeneratingTriplet;
use crate::numeric::quad;

/// h, K and a monotone bracket table for inversion.
///
/// The bracket is grown geometrically from r = 1 by factor 4 at
/// construction, so instances are read-only afterwards and safe to share.
pub struct ConcentrationFn {
    triplet: GeneratingTriplet,
    /// (r, h(r)) with r increasing, h decreasing.
    bracket: Vec<(f64, f64)>,
}

impl ConcentrationFn {
    pub fn new(triplet: &GeneratingTriplet) -> Result<Self> {
        let mut bracket = Vec::with_capacity(81);
        for k in -40..=40 {
            let r = 4f64.powi(k);
            let h = h_of(triplet, r)?;
            bracket.push((r, h));
        }
        Ok(ConcentrationFn {
            triplet: triplet.clone(),
            bracket,
        })
    }

    pub fn triplet(&self) -> &GeneratingTriplet {
        &self.triplet
    }

    /// h(r) by the definition.
    pub fn h(&self, r: f64) -> Result<f64> {
        h_of(&self.triplet, r)
    }

    /// h(r) through the tail-mass representation
    /// h(r) = r⁻²‖A‖ + r⁻² ∫_0^r 2s·N(B_s^c) ds: an independent route used
    /// to cross-check the definition.
    pub fn h_by_tail_representation(&self, r: f64) -> Result<f64> {
        assert!(r > 0.0);
        let n = self.triplet.levy();
        let f = |s: f64| -> f64 {
            2.0 * s * n.tail_mass(s).unwrap_or(f64::NAN)
        };
        let integral = quad::integrate_panels(&f, 0.0, r, r * 0.25, 1e-9, &[])?;
        Ok(self.triplet.gaussian().norm() / (r * r) + integral / (r * r))
    }

    /// K(r) ≤ h(r).
    pub fn k(&self, r: f64) -> Result<f64> {
        self.triplet.k_raw(r)
    }

    /// The unique r with h(r) = u, by bracketing and bisection to relative
    /// 1e-10. Errors with `BracketFailure` outside the achieved range.
    pub fn h_inverse(&self, u: f64) -> Result<f64> {
        assert!(u > 0.0);
        let (min_h, max_h) = (
            self.bracket.last().unwrap().1,
            self.bracket.first().unwrap().1,
        );
        if u > max_h || u < min_h {
            return Err(LevyError::BracketFailure { u, min: min_h, max: max_h });
        }
        // h is decreasing: find the bracket cell containing u.
        let idx = self.bracket.partition_point(|(_, h)| *h > u);
        if idx == 0 {
            return Ok(self.bracket[0].0);
        }
        let (mut lo, mut hi) = (self.bracket[idx - 1].0, self.bracket[idx.min(self.bracket.len() - 1)].0);
        if idx == self.bracket.len() {
            hi = self.bracket.last().unwrap().0;
        }
        for _ in 0..200 {
            if (hi - lo) <= 1e-10 * lo {
                break;
            }
            let mid = (lo * hi).sqrt();
            if self.h(mid)? > u {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        Ok((lo * hi).sqrt())
    }

    /// Residual of the identity h(b) − h(a) + ∫_a^b 2 K(r) r⁻¹ dr = 0.
    pub fn calculus_identity_residual(&self, a: f64, b: f64) -> Result<f64> {
        assert!(0.0 < a && a < b);
        let h_a = self.h(a)?;
        let h_b = if b.is_finite() { self.h(b)? } else { 0.0 };
        let f = |r: f64| -> f64 { 2.0 * self.k(r).unwrap_or(f64::NAN) / r };
        let integral = quad::integrate_panels(&f, a, b, a * 2.0, 1e-10, &[])?;
        Ok(h_b - h_a + integral)
    }

    /// Drift-deviation diagnostics under a lower scaling window with
    /// α_h > 1 at radius r < θ_h.
    ///
    /// Returns the deviation pair (|b_r − b|, max{r,r²}·h(r)/(θ_h∧1)) whose
    /// ratio is the empirical constant of the bound, plus the annulus
    /// first-moment pair with its explicit constant 2C_h/(α_h−1).
    pub fn drift_deviation_bound(
        &self,
        r: f64,
        window: &ScalingWindow,
    ) -> Result<DriftDeviation> {
        if window.kind != WindowKind::LowerAtZero {
            return Err(LevyError::ScalingWindowInvalid(
                "drift deviation needs a lower-at-zero window".into(),
            ));
        }
        if window.alpha <= 1.0 {
            return Err(LevyError::ScalingWindowInvalid(format!(
                "needs alpha_h > 1, got {}",
                window.alpha
            )));
        }
        if r >= window.theta {
            return Err(LevyError::ScalingWindowInvalid(format!(
                "needs r < theta_h = {}, got r = {r}",
                window.theta
            )));
        }
        let b = self.triplet.drift();
        let b_r = self.triplet.effective_drift(r)?;
        let dev = b_r
            .iter()
            .zip(b)
            .map(|(x, y)| (x - y) * (x - y))
            .sum::<f64>()
            .sqrt();
        let h_r = self.h(r)?;
        let shape = r.max(r * r) * h_r / window.theta.min(1.0);
        let annulus = if r < window.theta {
            self.triplet.levy().annulus_first_moment(r, window.theta)?
        } else {
            0.0
        };
        let annulus_rhs = 2.0 * window.constant / (window.alpha - 1.0) * r * h_r;
        Ok(DriftDeviation {
            deviation: dev,
            deviation_shape: shape,
            annulus_first_moment: annulus,
            annulus_bound: annulus_rhs,
        })
    }
}

/// Output of `drift_deviation_bound`. `deviation / deviation_shape` is the
/// empirical constant of the deviation bound (no closed form is available
/// for it); `annulus_first_moment ≤ annulus_bound` carries the explicit
/// constant 2·C_h/(α_h − 1).
#[derive(Debug, Clone)]
pub struct DriftDeviation {
    pub deviation: f64,
    pub deviation_shape: f64,
    pub annulus_first_moment: f64,
    pub annulus_bound: f64,
}

fn h_of(t: &GeneratingTriplet, r: f64) -> Result<f64> {
    t.h_raw(r)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::measure::zoo;
    use crate::measure::SymmetricMatrix;

    #[test]
    fn gaussian_h_and_inverse() {
        let m = zoo::gaussian(SymmetricMatrix::scaled_identity(1, 0.5));
        let c = ConcentrationFn::new(&m.triplet).unwrap();
        for r in [0.1, 1.0, 30.0] {
            assert!((c.h(r).unwrap() - 0.5 / (r * r)).abs() < 1e-14);
        }
        for u in [0.03f64, 1.0, 200.0] {
            let want = 1.0 / (2.0 * u).sqrt();
            let got = c.h_inverse(u).unwrap();
            assert!((got - want).abs() < 1e-8 * want, "u={u}: {got} vs {want}");
        }
    }

    #[test]
    fn one_sided_inverse_is_two_over_u() {
        let m = zoo::one_sided_1_stable();
        let c = ConcentrationFn::new(&m.triplet).unwrap();
        for u in [0.01, 1.0, 64.0] {
            let got = c.h_inverse(u).unwrap();
            assert!((got - 2.0 / u).abs() < 1e-8 * (2.0 / u), "u={u}: {got}");
        }
    }

    #[test]
    fn h_inverse_round_trip() {
        let m = zoo::mixed_stable_with_atoms(1.0).unwrap();
        let c = ConcentrationFn::new(&m.triplet).unwrap();
        for u in [0.05, 0.7, 13.0, 900.0] {
            let r = c.h_inverse(u).unwrap();
            let back = c.h(r).unwrap();
            assert!((back - u).abs() < 1e-8 * u, "u={u}: h(h⁻¹(u)) = {back}");
        }
    }

    #[test]
    fn bracket_failure_out_of_range() {
        let m = zoo::gaussian(SymmetricMatrix::scaled_identity(1, 0.5));
        let c = ConcentrationFn::new(&m.triplet).unwrap();
        assert!(matches!(
            c.h_inverse(1e-80),
            Err(LevyError::BracketFailure { .. })
        ));
    }

    #[test]
    fn calculus_identity_one_sided() {
        // h = 2/r, K = 1/r: h(2)-h(1) = -1 and ∫_1^2 2r^{-2} dr = 1.
        let m = zoo::one_sided_1_stable();
        let c = ConcentrationFn::new(&m.triplet).unwrap();
        let res = c.calculus_identity_residual(1.0, 2.0).unwrap();
        assert!(res.abs() < 1e-10, "residual {res}");
    }

    #[test]
    fn calculus_identity_gaussian_exact() {
        let m = zoo::gaussian(SymmetricMatrix::scaled_identity(2, 1.7));
        let c = ConcentrationFn::new(&m.triplet).unwrap();
        let res = c.calculus_identity_residual(0.3, 11.0).unwrap();
        assert!(res.abs() < 1e-12 * c.h(0.3).unwrap());
    }

    #[test]
    fn calculus_identity_to_infinity() {
        // b = ∞ with an isotropic stable: h(a) = ∫_a^∞ 2K(r)/r dr.
        let m = zoo::isotropic_stable(1, 1.5).unwrap();
        let c = ConcentrationFn::new(&m.triplet).unwrap();
        let res = c.calculus_identity_residual(0.7, f64::INFINITY).unwrap();
        assert!(res.abs() < 1e-8 * c.h(0.7).unwrap(), "residual {res}");
    }

    #[test]
    fn two_h_routes_agree() {
        let members = vec![
            zoo::isotropic_stable(1, 0.7).unwrap(),
            zoo::cylindrical_stable(2, 1.0).unwrap(),
            zoo::one_sided_1_stable(),
            zoo::gaussian_with_cauchy_jumps(),
        ];
        for m in members {
            let c = ConcentrationFn::new(&m.triplet).unwrap();
            for k in [-16i32, -4, 0, 4, 16] {
                let r = 2f64.powi(k);
                let a = c.h(r).unwrap();
                let b = c.h_by_tail_representation(r).unwrap();
                assert!(
                    (a - b).abs() < 1e-6 * a,
                    "{} at r=2^{k}: {a} vs {b}",
                    m.name
                );
            }
        }
    }

    #[test]
    fn k_below_h() {
        let m = zoo::mixed_stable_with_atoms(1.5).unwrap();
        let c = ConcentrationFn::new(&m.triplet).unwrap();
        for k in -10..10 {
            let r = 2f64.powi(k);
            assert!(c.k(r).unwrap() <= c.h(r).unwrap() * (1.0 + 1e-12));
        }
    }

    #[test]
    fn h_scaling_bounds() {
        // λ²h(λr) ≤ h(r) and √λ h⁻¹(λu) ≤ h⁻¹(u).
        let m = zoo::stable_subordinator(0.5).unwrap();
        let c = ConcentrationFn::new(&m.triplet).unwrap();
        for (lam, r) in [(0.3, 0.7), (0.9, 5.0), (0.05, 0.2)] {
            assert!(lam * lam * c.h(lam * r).unwrap() <= c.h(r).unwrap() * (1.0 + 1e-12));
        }
        for (lam, u) in [(2.0f64, 0.5f64), (16.0, 3.0)] {
            assert!(
                lam.sqrt() * c.h_inverse(lam * u).unwrap()
                    <= c.h_inverse(u).unwrap() * (1.0 + 1e-9)
            );
        }
    }

    #[test]
    fn small_jump_first_moment_diverges_for_cauchy() {
        // With a scaling window of α_h ≥ 1 and A = 0, ∫_{ε<|z|<1} |z| N(dz)
        // grows beyond any bound along ε = 2^{-k}.
        let m = zoo::isotropic_stable(1, 1.0).unwrap();
        let mut last = 0.0;
        for k in 1..40 {
            let eps = 2f64.powi(-k);
            let v = m.triplet.levy().annulus_first_moment(eps, 1.0).unwrap();
            assert!(v > last);
            last = v;
        }
        assert!(last > 17.0, "grows like (2/π)·k·ln2, got {last}");
    }

    #[test]
    fn drift_deviation_bounds() {
        // Isotropic 1.5-stable in d=1: symmetric, so the deviation is 0 and
        // the annulus moment obeys the explicit bound.
        let m = zoo::isotropic_stable(1, 1.5).unwrap();
        let c = ConcentrationFn::new(&m.triplet).unwrap();
        let w = ScalingWindow {
            kind: WindowKind::LowerAtZero,
            alpha: 1.5,
            constant: 1.0,
            theta: f64::INFINITY,
        };
        let d = c.drift_deviation_bound(0.25, &w).unwrap();
        assert_eq!(d.deviation, 0.0);
        assert!(d.annulus_first_moment <= d.annulus_bound);
        // Oracle: ∫_{|z|≥r,|z|<∞} |z| 𝒜|z|^{-2.5} dz = 2𝒜 r^{-1/2}/(1/2).
        let a = crate::numeric::special::stable_density_constant(1, 1.5);
        let want = 4.0 * a * 0.25f64.powf(-0.5);
        assert!((d.annulus_first_moment - want).abs() < 1e-10 * want);
    }

    #[test]
    fn drift_deviation_rejects_alpha_one() {
        let m = zoo::one_sided_1_stable();
        let c = ConcentrationFn::new(&m.triplet).unwrap();
        let w = ScalingWindow {
            kind: WindowKind::LowerAtZero,
            alpha: 1.0,
            constant: 1.0,
            theta: f64::INFINITY,
        };
        assert!(matches!(
            c.drift_deviation_bound(0.5, &w),
            Err(LevyError::ScalingWindowInvalid(_))
        ));
    }
}
