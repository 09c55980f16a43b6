//! Radial density profiles with exact moments for power laws.

use std::fmt;
use std::sync::Arc;

use crate::error::Result;
use crate::numeric::quad;

/// A density on `(0, ∞)` with respect to `dr`.
///
/// Power profiles integrate in closed form; everything else falls back to
/// adaptive quadrature. `singular_exponent` hints the behaviour of a
/// functional profile near 0 (`density(r) ≍ r^{singular_exponent}`), which
/// anchors the geometric panels.
#[derive(Clone)]
pub enum RadialProfile {
    Power {
        coeff: f64,
        exponent: f64,
    },
    Func {
        density: Arc<dyn Fn(f64) -> f64 + Send + Sync>,
        singular_exponent: f64,
    },
}

impl fmt::Debug for RadialProfile {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            RadialProfile::Power { coeff, exponent } => {
                write!(f, "Power({coeff} * r^{exponent})")
            }
            RadialProfile::Func { singular_exponent, .. } => {
                write!(f, "Func(~r^{singular_exponent} at 0)")
            }
        }
    }
}

impl RadialProfile {
    pub fn power(coeff: f64, exponent: f64) -> Self {
        RadialProfile::Power { coeff, exponent }
    }

    pub fn func<F: Fn(f64) -> f64 + Send + Sync + 'static>(f: F, singular_exponent: f64) -> Self {
        RadialProfile::Func {
            density: Arc::new(f),
            singular_exponent,
        }
    }

    pub fn value(&self, r: f64) -> f64 {
        match self {
            RadialProfile::Power { coeff, exponent } => coeff * r.powf(*exponent),
            RadialProfile::Func { density, .. } => density(r),
        }
    }

    pub fn as_power(&self) -> Option<(f64, f64)> {
        match self {
            RadialProfile::Power { coeff, exponent } => Some((*coeff, *exponent)),
            RadialProfile::Func { .. } => None,
        }
    }

    /// Near-zero growth exponent (density ≍ r^e as r → 0).
    pub fn singular_exponent(&self) -> f64 {
        match self {
            RadialProfile::Power { exponent, .. } => *exponent,
            RadialProfile::Func { singular_exponent, .. } => *singular_exponent,
        }
    }

    /// ∫_lo^hi r^q · density(r) dr. Divergent integrals return `∞`.
    pub fn moment(&self, lo: f64, hi: f64, q: f64) -> Result<f64> {
        debug_assert!(lo >= 0.0 && lo <= hi);
        if lo == hi {
            return Ok(0.0);
        }
        match self {
            RadialProfile::Power { coeff, exponent } => {
                if *coeff == 0.0 {
                    return Ok(0.0);
                }
                let p = q + exponent;
                let v = if (p + 1.0).abs() < 1e-14 {
                    if lo == 0.0 || hi.is_infinite() {
                        f64::INFINITY
                    } else {
                        (hi / lo).ln()
                    }
                } else {
                    let e = p + 1.0;
                    let upper = if hi.is_infinite() {
                        if e > 0.0 {
                            f64::INFINITY
                        } else {
                            0.0
                        }
                    } else {
                        hi.powf(e) / e
                    };
                    let lower = if lo == 0.0 {
                        if e > 0.0 {
                            0.0
                        } else {
                            f64::NEG_INFINITY
                        }
                    } else {
                        lo.powf(e) / e
                    };
                    upper - lower
                };
                Ok(coeff * v)
            }
            RadialProfile::Func { density, singular_exponent } => {
                // Divergence guard at the endpoints, then quadrature.
                if lo == 0.0 && q + singular_exponent <= -1.0 {
                    return Ok(f64::INFINITY);
                }
                let anchor = anchor_for(lo, hi);
                let f = |r: f64| r.powf(q) * density(r);
                quad::integrate_panels(&f, lo, hi, anchor, quad::REL_TOL, &[])
            }
        }
    }

    /// ∫_lo^hi g(b·r) density(r) dr by quadrature (no closed-form dispatch).
    pub fn weighted_by<F: Fn(f64) -> f64>(
        &self,
        lo: f64,
        hi: f64,
        b: f64,
        g: &F,
        breaks: &[f64],
        period: Option<f64>,
    ) -> Result<f64> {
        if lo == hi {
            return Ok(0.0);
        }
        let f = |r: f64| g(b * r) * self.value(r);
        match period {
            Some(p) if hi.is_finite() => quad::integrate_oscillatory(&f, lo, hi, p, quad::REL_TOL),
            _ => {
                let anchor = anchor_for(lo, hi);
                quad::integrate_panels(&f, lo, hi, anchor, quad::REL_TOL, breaks)
            }
        }
    }
}

fn anchor_for(lo: f64, hi: f64) -> f64 {
    if hi.is_finite() {
        if lo > 0.0 {
            (lo * hi).sqrt()
        } else {
            hi * 0.25
        }
    } else if lo > 0.0 {
        2.0 * lo
    } else {
        1.0
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn power_moments() {
        // density r^{-2} (one-sided 1-stable): ∫_1^∞ r·r^{-2} dr = ∞, ∫_0^1 r²·r^{-2} = 1
        let p = RadialProfile::power(1.0, -2.0);
        assert!(p.moment(1.0, f64::INFINITY, 1.0).unwrap().is_infinite());
        assert_eq!(p.moment(0.0, 1.0, 2.0).unwrap(), 1.0);
        assert_eq!(p.moment(2.0, f64::INFINITY, 0.0).unwrap(), 0.5);
        // log case: ∫_1^e r^{-2}·r dr = 1
        assert!((p.moment(1.0, std::f64::consts::E, 1.0).unwrap() - 1.0).abs() < 1e-14);
    }

    #[test]
    fn func_matches_power() {
        let p = RadialProfile::power(3.0, -1.7);
        let f = RadialProfile::func(|r| 3.0 * r.powf(-1.7), -1.7);
        for (lo, hi, q) in [(0.0, 1.0, 2.0), (0.5, 4.0, 1.0), (1.0, f64::INFINITY, 0.0)] {
            let a = p.moment(lo, hi, q).unwrap();
            let b = f.moment(lo, hi, q).unwrap();
            assert!((a - b).abs() < 1e-8 * a.abs().max(1.0), "{lo} {hi} {q}: {a} vs {b}");
        }
    }
}
