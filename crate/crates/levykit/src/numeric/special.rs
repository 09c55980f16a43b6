//! Special functions and stable-law constants.

use std::f64::consts::PI;
use std::sync::OnceLock;

use statrs::function::gamma::gamma;

use super::quad;

/// Surface measure of the unit sphere in ℝᵈ: ω_d = 2π^{d/2}/Γ(d/2).
pub fn sphere_surface(d: usize) -> f64 {
    2.0 * PI.powf(d as f64 / 2.0) / gamma(d as f64 / 2.0)
}

/// Volume of the unit ball in ℝᵈ.
pub fn ball_volume(d: usize) -> f64 {
    sphere_surface(d) / d as f64
}

/// Normalization 𝒜_{d,α} = 2^α Γ((d+α)/2) / (π^{d/2} |Γ(-α/2)|).
///
/// With density 𝒜_{d,α} |z|^{-d-α} the isotropic α-stable process in ℝᵈ
/// has characteristic exponent exactly |x|^α.
pub fn stable_density_constant(d: usize, alpha: f64) -> f64 {
    assert!(alpha > 0.0 && alpha < 2.0, "alpha must lie in (0,2)");
    2f64.powf(alpha) * gamma((d as f64 + alpha) / 2.0)
        / (PI.powf(d as f64 / 2.0) * gamma(-alpha / 2.0).abs())
}

/// C(α) = ∫_0^∞ (1 - cos u) u^{-1-α} du for α ∈ (0,2).
pub fn one_minus_cos_integral(alpha: f64) -> f64 {
    assert!(alpha > 0.0 && alpha < 2.0);
    if (alpha - 1.0).abs() < 1e-9 {
        // Removable singularity of the closed form at α = 1.
        return PI / 2.0;
    }
    gamma(1.0 - alpha) * (PI * alpha / 2.0).cos() / alpha
}

/// S(α) = ∫_0^∞ sin(u) u^{-1-α} du for α ∈ (0,1).
pub fn sin_integral_power(alpha: f64) -> f64 {
    assert!(alpha > 0.0 && alpha < 1.0);
    gamma(1.0 - alpha) * (PI * alpha / 2.0).sin() / alpha
}

/// Compensated one-sided stable integral
/// G_α(a) = ∫_0^∞ (e^{iau} - 1 - iau·1_{u<1}) u^{-1-α} du, α ∈ (0,2),
/// returned as (re, im).
///
/// Re G_α(a) = -|a|^α C(α) always; the imaginary part carries the
/// compensation. At α = 1 the closed form is a(κ - ln|a|) with κ = 1 - γ.
pub fn one_sided_compensated(alpha: f64, a: f64) -> (f64, f64) {
    if a == 0.0 {
        return (0.0, 0.0);
    }
    let re = -a.abs().powf(alpha) * one_minus_cos_integral(alpha);
    let im = if (alpha - 1.0).abs() < 1e-9 {
        const KAPPA: f64 = 1.0 - EULER_GAMMA;
        a * (KAPPA - a.abs().ln())
    } else if alpha < 1.0 {
        // ∫ (e^{iau}-1) u^{-1-α} du = |a|^α Γ(-α) e^{-i sign(a) πα/2}, minus
        // the compensation ia ∫_0^1 u^{-α} du = ia/(1-α).
        let g = gamma(-alpha);
        -g * a.abs().powf(alpha) * (PI * alpha / 2.0).sin() * a.signum() - a / (1.0 - alpha)
    } else {
        // ∫ (e^{iau}-1-iau) u^{-1-α} du = |a|^α Γ(-α) e^{-i sign(a) πα/2}, plus ia/(α-1).
        let g = gamma(-alpha);
        -g * a.abs().powf(alpha) * (PI * alpha / 2.0).sin() * a.signum() + a / (alpha - 1.0)
    };
    (re, im)
}

/// Euler–Mascheroni constant.
pub const EULER_GAMMA: f64 = 0.577_215_664_901_532_9;

/// 1 - cos(u) evaluated without cancellation as 2 sin²(u/2).
#[inline]
pub fn one_minus_cos(u: f64) -> f64 {
    let s = (0.5 * u).sin();
    2.0 * s * s
}

/// sin(u) - u evaluated without cancellation (Taylor series near 0).
#[inline]
pub fn sin_minus_linear(u: f64) -> f64 {
    if u.abs() < 0.1 {
        let u2 = u * u;
        -u * u2 / 6.0 * (1.0 - u2 / 20.0 * (1.0 - u2 / 42.0 * (1.0 - u2 / 72.0)))
    } else {
        u.sin() - u
    }
}

/// Sine integral Si(x) = ∫_0^x sin t / t dt.
pub fn sine_integral(x: f64) -> f64 {
    let ax = x.abs();
    let s = if ax <= 10.0 {
        si_series(ax)
    } else {
        let (f, g) = si_aux(ax);
        PI / 2.0 - f * ax.cos() - g * ax.sin()
    };
    if x < 0.0 {
        -s
    } else {
        s
    }
}

fn si_series(x: f64) -> f64 {
    // Σ (-1)^k x^{2k+1} / ((2k+1)(2k+1)!)
    let mut sin_term = x; // (-1)^k x^{2k+1}/(2k+1)!
    let mut sum = x;
    let x2 = x * x;
    for k in 1..80usize {
        sin_term *= -x2 / ((2 * k) as f64 * (2 * k + 1) as f64);
        let contrib = sin_term / (2 * k + 1) as f64;
        sum += contrib;
        if contrib.abs() < 1e-17 * sum.abs().max(1.0) {
            break;
        }
    }
    sum
}

/// Auxiliary functions: f(x) = ∫_0^∞ e^{-xt}/(1+t²) dt, g(x) = ∫_0^∞ t e^{-xt}/(1+t²) dt.
fn si_aux(x: f64) -> (f64, f64) {
    if x >= 60.0 {
        // Asymptotic series; the minimal term is far below f64 precision here.
        let x2 = x * x;
        let mut f = 0.0;
        let mut g = 0.0;
        let mut num = 1.0; // (2k)! / x^{2k}
        for k in 0..12 {
            let sign = if k % 2 == 0 { 1.0 } else { -1.0 };
            f += sign * num;
            g += sign * num * (2 * k + 1) as f64;
            num *= ((2 * k + 1) * (2 * k + 2)) as f64 / x2;
            if num > 1e18 {
                break;
            }
        }
        (f / x, g / x2)
    } else {
        let cheb = si_aux_tables();
        (cheb.eval_f(x), cheb.eval_g(x))
    }
}

/// Chebyshev fits of x·f(x) and x²·g(x) in the variable u = 1/x on [1/60, 1/10].
struct SiAuxTables {
    f_coef: Vec<f64>,
    g_coef: Vec<f64>,
}

const SI_U_LO: f64 = 1.0 / 60.0;
const SI_U_HI: f64 = 1.0 / 10.0;

impl SiAuxTables {
    fn build() -> Self {
        let n = 40;
        let fit = |target: &dyn Fn(f64) -> f64| -> Vec<f64> {
            // Chebyshev interpolation at the n Gauss–Chebyshev points.
            let vals: Vec<f64> = (0..n)
                .map(|k| {
                    let t = (PI * (k as f64 + 0.5) / n as f64).cos();
                    let u = 0.5 * (SI_U_LO + SI_U_HI) + 0.5 * (SI_U_HI - SI_U_LO) * t;
                    target(1.0 / u)
                })
                .collect();
            (0..n)
                .map(|j| {
                    let mut c = 0.0;
                    for (k, v) in vals.iter().enumerate() {
                        c += v * (PI * j as f64 * (k as f64 + 0.5) / n as f64).cos();
                    }
                    c * 2.0 / n as f64
                })
                .collect()
        };
        let f_exact = |x: f64| {
            x * quad::integrate_panels(&|t: f64| (-x * t).exp() / (1.0 + t * t), 0.0, f64::INFINITY, 1.0 / x, 1e-14, &[])
                .expect("si aux f")
        };
        let g_exact = |x: f64| {
            x * x
                * quad::integrate_panels(&|t: f64| t * (-x * t).exp() / (1.0 + t * t), 0.0, f64::INFINITY, 1.0 / x, 1e-14, &[])
                    .expect("si aux g")
        };
        SiAuxTables {
            f_coef: fit(&f_exact),
            g_coef: fit(&g_exact),
        }
    }

    fn eval_cheb(coef: &[f64], u: f64) -> f64 {
        let t = (2.0 * u - SI_U_LO - SI_U_HI) / (SI_U_HI - SI_U_LO);
        let mut b0 = 0.0;
        let mut b1 = 0.0;
        for &c in coef.iter().rev() {
            let b2 = b1;
            b1 = b0;
            b0 = 2.0 * t * b1 - b2 + c;
        }
        b0 - t * b1 - 0.5 * coef[0]
    }

    fn eval_f(&self, x: f64) -> f64 {
        Self::eval_cheb(&self.f_coef, 1.0 / x) / x
    }

    fn eval_g(&self, x: f64) -> f64 {
        Self::eval_cheb(&self.g_coef, 1.0 / x) / (x * x)
    }
}

fn si_aux_tables() -> &'static SiAuxTables {
    static TABLES: OnceLock<SiAuxTables> = OnceLock::new();
    TABLES.get_or_init(SiAuxTables::build)
}

/// Bessel function J₀(x) via the integral representation
/// J₀(x) = (1/π) ∫_0^π cos(x sin θ) dθ (trapezoid rule, spectrally accurate).
pub fn bessel_j0(x: f64) -> f64 {
    let ax = x.abs();
    let n = (40 + (1.5 * ax) as usize).min(4000);
    let mut sum = 0.5 * ((ax * (0.0f64).sin()).cos() + (ax * PI.sin()).cos());
    for k in 1..n {
        let theta = PI * k as f64 / n as f64;
        sum += (ax * theta.sin()).cos();
    }
    sum / n as f64
}
