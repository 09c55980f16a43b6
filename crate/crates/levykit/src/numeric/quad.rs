//! Adaptive Gauss–Kronrod quadrature.
//!
//! A 15-point Kronrod rule with the embedded 7-point Gauss rule drives a
//! globally adaptive bisection scheme. Semi-infinite ranges and endpoint
//! singularities are handled with geometric panels so that integrable
//! power-law behaviour at `0` and power-law tails at `∞` converge without
//! a change of variables.

use crate::error::{LevyError, Result};

/// Abscissae of the 15-point Kronrod rule on [-1, 1] (positive half).
const XGK: [f64; 8] = [
    0.991_455_371_120_812_639_206_854_697_526_329,
    0.949_107_912_342_758_524_526_189_684_047_851,
    0.864_864_423_359_769_072_789_712_788_640_926,
    0.741_531_185_599_394_439_863_864_773_280_788,
    0.586_087_235_467_691_130_294_144_838_258_730,
    0.405_845_151_377_397_166_906_606_412_076_961,
    0.207_784_955_007_898_467_600_689_403_773_245,
    0.000_000_000_000_000_000_000_000_000_000_000,
];

/// Weights of the 15-point Kronrod rule.
const WGK: [f64; 8] = [
    0.022_935_322_010_529_224_963_732_008_058_970,
    0.063_092_092_629_978_553_290_700_663_189_204,
    0.104_790_010_322_250_183_839_876_322_541_518,
    0.140_653_259_715_525_918_745_189_590_510_238,
    0.169_004_726_639_267_902_826_583_426_598_550,
    0.190_350_578_064_785_409_913_256_402_421_014,
    0.204_432_940_075_298_892_414_161_999_234_649,
    0.209_482_141_084_727_828_012_999_174_891_714,
];

/// Weights of the embedded 7-point Gauss rule (nodes are XGK[1], XGK[3], XGK[5], XGK[7]).
const WG: [f64; 4] = [
    0.129_484_966_168_869_693_270_611_432_679_082,
    0.279_705_391_489_276_667_901_467_771_423_780,
    0.381_830_050_505_118_944_950_369_775_488_975,
    0.417_959_183_673_469_387_755_102_040_816_327,
];

/// One application of the G7/K15 pair on [a, b]. Returns (kronrod, error estimate, ∫|f|).
fn qk15<F: Fn(f64) -> f64>(f: &F, a: f64, b: f64) -> (f64, f64, f64) {
    let center = 0.5 * (a + b);
    let half = 0.5 * (b - a);
    let f_center = f(center);

    let mut result_gauss = WG[3] * f_center;
    let mut result_kronrod = WGK[7] * f_center;
    let mut result_abs = WGK[7] * f_center.abs();

    let mut fv = [0.0f64; 15];
    fv[7] = f_center;

    for j in 0..7 {
        let abscissa = half * XGK[j];
        let f1 = f(center - abscissa);
        let f2 = f(center + abscissa);
        fv[j] = f1;
        fv[14 - j] = f2;
        let sum = f1 + f2;
        result_kronrod += WGK[j] * sum;
        result_abs += WGK[j] * (f1.abs() + f2.abs());
        if j % 2 == 1 {
            result_gauss += WG[j / 2] * sum;
        }
    }

    let mean = result_kronrod * 0.5;
    let mut result_asc = WGK[7] * (f_center - mean).abs();
    for j in 0..7 {
        result_asc += WGK[j] * ((fv[j] - mean).abs() + (fv[14 - j] - mean).abs());
    }

    let result_kronrod = result_kronrod * half;
    let result_abs = result_abs * half.abs();
    let result_asc = result_asc * half.abs();
    let mut err = ((result_kronrod - result_gauss * half) * 1.0).abs();
    if result_asc != 0.0 && err != 0.0 {
        err = result_asc * (200.0 * err / result_asc).powf(1.5).min(1.0);
    }
    let min_err = 50.0 * f64::EPSILON * result_abs;
    if min_err > err {
        err = min_err;
    }
    (result_kronrod, err, result_abs)
}

#[derive(Debug, Clone, Copy)]
struct Interval {
    a: f64,
    b: f64,
    value: f64,
    err: f64,
}

/// Adaptive integration of `f` over the finite interval `[a, b]`.
///
/// `breaks` are interior points where the integrand is known to be
/// non-smooth (kinks, jumps, oscillation-period boundaries); the initial
/// partition is split there so the error estimator never straddles them.
pub fn adaptive<F: Fn(f64) -> f64>(
    f: &F,
    a: f64,
    b: f64,
    rel_tol: f64,
    abs_floor: f64,
    breaks: &[f64],
) -> Result<f64> {
    if a == b {
        return Ok(0.0);
    }
    debug_assert!(a < b);

    let mut cuts: Vec<f64> = vec![a];
    let mut sorted: Vec<f64> = breaks.iter().copied().filter(|x| *x > a && *x < b).collect();
    sorted.sort_by(|p, q| p.partial_cmp(q).unwrap());
    sorted.dedup();
    cuts.extend(sorted);
    cuts.push(b);

    let mut intervals: Vec<Interval> = Vec::with_capacity(cuts.len().max(16));
    let mut total = 0.0;
    let mut total_err = 0.0;
    let mut total_abs = 0.0;
    for w in cuts.windows(2) {
        let (v, e, ra) = qk15(f, w[0], w[1]);
        intervals.push(Interval {
            a: w[0],
            b: w[1],
            value: v,
            err: e,
        });
        total += v;
        total_err += e;
        total_abs += ra;
    }

    // Cancellation floor: once the error sits at the rounding level of
    // ∫|f|, further refinement cannot recover digits.
    let target = |total: f64, total_abs: f64| {
        abs_floor
            .max(rel_tol * total.abs())
            .max(50.0 * f64::EPSILON * total_abs)
    };

    let max_intervals = 4000;
    while total_err > target(total, total_abs) && intervals.len() < max_intervals {
        // Split the interval with the largest error estimate.
        let (worst, _) = intervals
            .iter()
            .enumerate()
            .max_by(|x, y| x.1.err.partial_cmp(&y.1.err).unwrap())
            .unwrap();
        let iv = intervals[worst];
        let mid = 0.5 * (iv.a + iv.b);
        if mid <= iv.a || mid >= iv.b {
            break; // interval at floating-point resolution
        }
        let (v1, e1, _) = qk15(f, iv.a, mid);
        let (v2, e2, _) = qk15(f, mid, iv.b);
        total += v1 + v2 - iv.value;
        total_err += e1 + e2 - iv.err;
        intervals[worst] = Interval {
            a: iv.a,
            b: mid,
            value: v1,
            err: e1,
        };
        intervals.push(Interval {
            a: mid,
            b: iv.b,
            value: v2,
            err: e2,
        });
    }

    if total_err > 10.0 * target(total, total_abs) {
        return Err(LevyError::QuadratureFailure {
            context: "adaptive",
            achieved: total_err,
            requested: target(total, total_abs),
        });
    }
    Ok(total)
}

/// Default relative tolerance used by the measure integrators.
pub const REL_TOL: f64 = 1e-9;

/// ∫_lo^hi f, where `0 ≤ lo < hi ≤ ∞` and `f` may have an integrable
/// power singularity at 0 and a decaying tail at ∞.
///
/// The range is covered by geometric panels anchored at `scale`
/// (doubling outward, halving inward); panel sums stop once three
/// consecutive panels contribute below tolerance.
pub fn integrate_panels<F: Fn(f64) -> f64>(
    f: &F,
    lo: f64,
    hi: f64,
    scale: f64,
    rel_tol: f64,
    breaks: &[f64],
) -> Result<f64> {
    debug_assert!(lo >= 0.0 && lo <= hi);
    if lo == hi {
        return Ok(0.0);
    }
    let anchor = if scale.is_finite() && scale > 0.0 { scale } else { 1.0 };

    let finite_hi = hi.is_finite();
    let mut acc = 0.0f64;

    // Relevant scales below/above which quiet panels may terminate early.
    let min_scale = breaks
        .iter()
        .copied()
        .filter(|b| *b > 0.0)
        .fold(anchor, f64::min);
    let max_scale = breaks.iter().copied().fold(anchor, f64::max);

    let floor = |acc: f64| rel_tol * acc.abs() * 0.3;

    // Central panel bounds: [max(lo, anchor/2), min(hi, 2*anchor)].
    let c_lo = lo.max(anchor * 0.5).min(if finite_hi { hi } else { f64::MAX });
    let c_hi = if finite_hi { hi.min(anchor * 2.0).max(c_lo) } else { anchor * 2.0 };

    if c_hi > c_lo {
        acc += adaptive(f, c_lo, c_hi, rel_tol, 0.0, breaks)?;
    }

    // Downward panels toward lo (possibly 0).
    let mut upper = c_lo;
    let mut quiet = 0;
    for _ in 0..2100 {
        if upper <= lo {
            break;
        }
        let lower = (upper * 0.5).max(lo);
        let piece = adaptive(f, lower, upper, rel_tol, floor(acc), breaks)?;
        acc += piece;
        if piece.abs() <= rel_tol * acc.abs().max(1e-300) && lower < min_scale {
            quiet += 1;
            if quiet >= 4 {
                break;
            }
        } else {
            quiet = 0;
        }
        if lower <= lo || lower < 1e-290 {
            break;
        }
        upper = lower;
    }

    // Upward panels toward hi (possibly ∞).
    let mut lower = c_hi;
    let mut quiet = 0;
    for _ in 0..2100 {
        if finite_hi && lower >= hi {
            break;
        }
        let upper = if finite_hi { (lower * 2.0).min(hi) } else { lower * 2.0 };
        let piece = adaptive(f, lower, upper, rel_tol, floor(acc), breaks)?;
        acc += piece;
        if piece.abs() <= rel_tol * acc.abs().max(1e-300) && upper > max_scale {
            quiet += 1;
            if quiet >= 4 && !finite_hi {
                break;
            }
        } else {
            quiet = 0;
        }
        if finite_hi && upper >= hi {
            break;
        }
        lower = upper;
        if lower > 1e290 {
            break;
        }
    }

    Ok(acc)
}

/// ∫_lo^hi f for an oscillatory integrand with wavelength `period`.
///
/// The interval is pre-split at period multiples so each sub-interval
/// holds at most one oscillation; beyond `hi_cap` the caller is expected
/// to have bounded the tail analytically.
pub fn integrate_oscillatory<F: Fn(f64) -> f64>(
    f: &F,
    lo: f64,
    hi: f64,
    period: f64,
    rel_tol: f64,
) -> Result<f64> {
    debug_assert!(hi.is_finite());
    if hi <= lo {
        return Ok(0.0);
    }
    if !(period.is_finite() && period > 0.0) || (hi - lo) / period < 4.0 {
        return integrate_panels(f, lo, hi, (lo.max(period * 0.1)).max(1e-8), rel_tol, &[]);
    }
    // Geometric panels cover the first period so that integrable endpoint
    // singularities at lo = 0 do not defeat plain bisection.
    let mut acc = 0.0f64;
    let head_end = (lo + period).min(hi);
    acc += integrate_panels(f, lo, head_end, period * 0.25, rel_tol, &[])?;
    let mut x = head_end;
    let n = ((hi - lo) / period).ceil() as usize;
    if n > 2_000_000 {
        return Err(LevyError::QuadratureFailure {
            context: "oscillatory span too long",
            achieved: n as f64,
            requested: 2e6,
        });
    }
    while x < hi {
        let next = (x + period).min(hi);
        let (v, e, _) = qk15(f, x, next);
        if e > rel_tol.max(1e-12) * v.abs().max(1e-300) && e > 1e-15 {
            acc += adaptive(f, x, next, rel_tol, 0.0, &[0.5 * (x + next)])?;
        } else {
            acc += v;
        }
        x = next;
    }
    Ok(acc)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn polynomial_is_exact() {
        let f = |x: f64| 3.0 * x * x;
        let v = adaptive(&f, 0.0, 2.0, 1e-12, 0.0, &[]).unwrap();
        assert!((v - 8.0).abs() < 1e-12);
    }

    #[test]
    fn kink_with_break_hint() {
        let f = |x: f64| (x - 0.3).abs();
        let v = adaptive(&f, 0.0, 1.0, 1e-12, 0.0, &[0.3]).unwrap();
        let exact = 0.3f64.powi(2) / 2.0 + 0.7f64.powi(2) / 2.0;
        assert!((v - exact).abs() < 1e-13);
    }

    #[test]
    fn integrable_singularity_at_zero() {
        // ∫_0^1 r^{-1/2} dr = 2
        let f = |x: f64| x.powf(-0.5);
        let v = integrate_panels(&f, 0.0, 1.0, 1.0, 1e-10, &[]).unwrap();
        assert!((v - 2.0).abs() < 1e-8, "got {v}");
    }

    #[test]
    fn power_tail_to_infinity() {
        // ∫_1^∞ r^{-2.5} dr = 1/1.5
        let f = |x: f64| x.powf(-2.5);
        let v = integrate_panels(&f, 1.0, f64::INFINITY, 1.0, 1e-10, &[]).unwrap();
        assert!((v - 1.0 / 1.5).abs() < 1e-9, "got {v}");
    }

    #[test]
    fn gaussian_full_line_half() {
        // ∫_0^∞ e^{-x²/2} dx = sqrt(π/2)
        let f = |x: f64| (-0.5 * x * x).exp();
        let v = integrate_panels(&f, 0.0, f64::INFINITY, 1.0, 1e-11, &[]).unwrap();
        assert!((v - (std::f64::consts::PI / 2.0).sqrt()).abs() < 1e-10);
    }

    #[test]
    fn oscillatory_damped() {
        // ∫_0^∞ e^{-x} cos(40 x) dx = 1/(1+1600)
        let period = 2.0 * std::f64::consts::PI / 40.0;
        let f = |x: f64| (-x).exp() * (40.0 * x).cos();
        let v = integrate_oscillatory(&f, 0.0, 40.0, period, 1e-11).unwrap();
        assert!((v - 1.0 / 1601.0).abs() < 1e-10, "got {v}");
    }
}
