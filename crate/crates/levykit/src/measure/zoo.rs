//! Reference processes with closed-form exponents and concentration
//! functions, used as oracles throughout the test suites.

use std::f64::consts::PI;
use std::sync::Arc;

use statrs::function::gamma::gamma;

use crate::error::{LevyError, Result};
use crate::numeric::special::{
    one_minus_cos_integral, sphere_surface, stable_density_constant, EULER_GAMMA,
};

use super::{
    GeneratingTriplet, LevyMeasure, RadialProfile, Side, SphereAtom, SymmetricMatrix,
};

type ScalarFn = Arc<dyn Fn(f64) -> f64 + Send + Sync>;
type VectorFn = Arc<dyn Fn(&[f64]) -> f64 + Send + Sync>;

/// A zoo process: the triplet plus whatever reference functions are known
/// in closed form (up to the documented constants).
pub struct ZooMember {
    pub name: String,
    pub triplet: GeneratingTriplet,
    /// Re ψ(x) in closed form.
    pub re_psi: Option<VectorFn>,
    /// Im ψ(x) in closed form.
    pub im_psi: Option<VectorFn>,
    /// h(r) in closed form.
    pub h: Option<ScalarFn>,
    /// ψ*(r) = sup_{|z|≤r} Re ψ(z) in closed form.
    pub psi_star: Option<ScalarFn>,
    /// If Some(α): p(t,x) = t^{-d/α} p(1, t^{-1/α} x).
    pub self_similarity: Option<f64>,
}

/// h-coefficient of the jump part of an α-stable radial profile with unit
/// coefficient: ∫(1 ∧ |z|²/r²) k dr pieces give 1/(2−α) + 1/α per unit mass.
fn stable_h_coefficient(alpha: f64) -> f64 {
    1.0 / (2.0 - alpha) + 1.0 / alpha
}

fn check_alpha(alpha: f64) -> Result<()> {
    if alpha <= 0.0 || alpha >= 2.0 {
        return Err(LevyError::BadParameter(format!(
            "stability index must lie in (0,2), got {alpha}"
        )));
    }
    Ok(())
}

/// Brownian-type process (A, 0, 0).
pub fn gaussian(a: SymmetricMatrix) -> ZooMember {
    let dim = a.dim();
    let norm = a.norm();
    let qf = a.clone();
    let triplet =
        GeneratingTriplet::new(a, LevyMeasure::zero(dim), vec![0.0; dim]).expect("valid gaussian");
    ZooMember {
        name: "gaussian".to_string(),
        triplet,
        re_psi: Some(Arc::new(move |x: &[f64]| qf.quadratic_form(x))),
        im_psi: Some(Arc::new(|_x: &[f64]| 0.0)),
        h: Some(Arc::new(move |r: f64| norm / (r * r))),
        psi_star: Some(Arc::new(move |r: f64| norm * r * r)),
        self_similarity: Some(2.0),
    }
}

/// Isotropic α-stable process: ψ(x) = |x|^α exactly.
pub fn isotropic_stable(dim: usize, alpha: f64) -> Result<ZooMember> {
    check_alpha(alpha)?;
    if dim == 0 || dim > 3 {
        return Err(LevyError::BadParameter(format!(
            "isotropic_stable supports d ∈ {{1,2,3}}, got {dim}"
        )));
    }
    let coeff = stable_density_constant(dim, alpha);
    let n = LevyMeasure::radial(dim, RadialProfile::power(coeff, -(dim as f64) - alpha));
    let triplet = GeneratingTriplet::new(SymmetricMatrix::zero(dim), n, vec![0.0; dim])?;
    let h_coeff = sphere_surface(dim) * coeff * stable_h_coefficient(alpha);
    Ok(ZooMember {
        name: format!("isotropic_stable({dim},{alpha})"),
        triplet,
        re_psi: Some(Arc::new(move |x: &[f64]| {
            x.iter().map(|v| v * v).sum::<f64>().powf(alpha / 2.0)
        })),
        im_psi: Some(Arc::new(|_x: &[f64]| 0.0)),
        h: Some(Arc::new(move |r: f64| h_coeff * r.powf(-alpha))),
        psi_star: Some(Arc::new(move |r: f64| r.powf(alpha))),
        self_similarity: Some(alpha),
    })
}

/// Sum of independent one-dimensional symmetric α-stable processes, one per
/// coordinate axis: Re ψ(x) = Σ |x_k|^α.
pub fn cylindrical_stable(dim: usize, alpha: f64) -> Result<ZooMember> {
    check_alpha(alpha)?;
    let axis_coeff = stable_density_constant(1, alpha);
    let axes: Vec<LevyMeasure> = (0..dim)
        .map(|_| LevyMeasure::radial(1, RadialProfile::power(axis_coeff, -1.0 - alpha)))
        .collect();
    let n = LevyMeasure::cylindrical(axes);
    let triplet = GeneratingTriplet::new(SymmetricMatrix::zero(dim), n, vec![0.0; dim])?;
    let h_coeff = (dim as f64) * 2.0 * axis_coeff * stable_h_coefficient(alpha);
    let d = dim as f64;
    Ok(ZooMember {
        name: format!("cylindrical_stable({dim},{alpha})"),
        triplet,
        re_psi: Some(Arc::new(move |x: &[f64]| {
            x.iter().map(|v| v.abs().powf(alpha)).sum()
        })),
        im_psi: Some(Arc::new(|_x: &[f64]| 0.0)),
        h: Some(Arc::new(move |r: f64| h_coeff * r.powf(-alpha))),
        // Maximizing Σ|z_k|^α on |z| ≤ r puts equal weight on every axis.
        psi_star: Some(Arc::new(move |r: f64| d.powf(1.0 - alpha / 2.0) * r.powf(alpha))),
        self_similarity: Some(alpha),
    })
}

/// One-sided 1-stable process with N(dx) = x^{-2} 1_{x<0} dx and b = 0.
pub fn one_sided_1_stable() -> ZooMember {
    let n = LevyMeasure::one_sided(Side::Neg, RadialProfile::power(1.0, -2.0));
    let triplet = GeneratingTriplet::new(SymmetricMatrix::zero(1), n, vec![0.0]).unwrap();
    let kappa = 1.0 - EULER_GAMMA;
    ZooMember {
        name: "one_sided_1_stable".to_string(),
        triplet,
        re_psi: Some(Arc::new(|x: &[f64]| PI / 2.0 * x[0].abs())),
        im_psi: Some(Arc::new(move |x: &[f64]| {
            if x[0] == 0.0 {
                0.0
            } else {
                x[0] * (kappa - x[0].abs().ln())
            }
        })),
        h: Some(Arc::new(|r: f64| 2.0 / r)),
        psi_star: Some(Arc::new(|r: f64| PI / 2.0 * r)),
        self_similarity: None,
    }
}

/// α-stable subordinator, α ∈ (0,1): E e^{-uY_t} = e^{-t u^α}.
pub fn stable_subordinator(alpha: f64) -> Result<ZooMember> {
    if alpha <= 0.0 || alpha >= 1.0 {
        return Err(LevyError::BadParameter(format!(
            "subordinator index must lie in (0,1), got {alpha}"
        )));
    }
    let coeff = alpha / gamma(1.0 - alpha);
    let n = LevyMeasure::one_sided(Side::Pos, RadialProfile::power(coeff, -1.0 - alpha));
    // Drift cancels the Lévy–Khintchine compensation so the process is the
    // bare subordinator: b = ∫_{0<z<1} z N(dz).
    let b = coeff / (1.0 - alpha);
    let triplet = GeneratingTriplet::new(SymmetricMatrix::zero(1), n, vec![b])?;
    let h_coeff = coeff * stable_h_coefficient(alpha);
    let half_angle = PI * alpha / 2.0;
    Ok(ZooMember {
        name: format!("stable_subordinator({alpha})"),
        triplet,
        re_psi: Some(Arc::new(move |x: &[f64]| {
            half_angle.cos() * x[0].abs().powf(alpha)
        })),
        im_psi: Some(Arc::new(move |x: &[f64]| {
            -half_angle.sin() * x[0].signum() * x[0].abs().powf(alpha)
        })),
        h: Some(Arc::new(move |r: f64| h_coeff * r.powf(-alpha))),
        psi_star: Some(Arc::new(move |r: f64| half_angle.cos() * r.powf(alpha))),
        self_similarity: Some(alpha),
    })
}

/// Three independent symmetric stable coordinates with distinct indices.
pub fn product_stable(alphas: [f64; 3]) -> Result<ZooMember> {
    for &a in &alphas {
        check_alpha(a)?;
    }
    let axes: Vec<LevyMeasure> = alphas
        .iter()
        .map(|&a| LevyMeasure::radial(1, RadialProfile::power(stable_density_constant(1, a), -1.0 - a)))
        .collect();
    let n = LevyMeasure::cylindrical(axes);
    let triplet = GeneratingTriplet::new(SymmetricMatrix::zero(3), n, vec![0.0; 3])?;
    let h_coeffs: Vec<f64> = alphas
        .iter()
        .map(|&a| 2.0 * stable_density_constant(1, a) * stable_h_coefficient(a))
        .collect();
    let al = alphas;
    let hc = h_coeffs.clone();
    Ok(ZooMember {
        name: format!("product_stable({},{},{})", alphas[0], alphas[1], alphas[2]),
        triplet,
        re_psi: Some(Arc::new(move |x: &[f64]| {
            x.iter().zip(&al).map(|(v, a)| v.abs().powf(*a)).sum()
        })),
        im_psi: Some(Arc::new(|_x: &[f64]| 0.0)),
        h: Some(Arc::new(move |r: f64| {
            hc.iter()
                .zip(&al)
                .map(|(c, a)| c * r.powf(-a))
                .sum()
        })),
        psi_star: None,
        self_similarity: None,
    })
}

/// Stable measure with a finite atomic sphere measure λ and k(r) = r^{-1-α}.
pub fn spherical_stable(dim: usize, alpha: f64, atoms: Vec<SphereAtom>) -> Result<ZooMember> {
    check_alpha(alpha)?;
    if atoms.is_empty() {
        return Err(LevyError::BadParameter("atom list must be non-empty".into()));
    }
    for a in &atoms {
        let norm: f64 = a.direction.iter().map(|x| x * x).sum::<f64>().sqrt();
        if (norm - 1.0).abs() > 1e-9 || a.direction.len() != dim {
            return Err(LevyError::BadParameter(
                "sphere atoms must be unit vectors of the right dimension".into(),
            ));
        }
        if a.weight <= 0.0 {
            return Err(LevyError::BadParameter("atom weights must be positive".into()));
        }
    }
    let total: f64 = atoms.iter().map(|a| a.weight).sum();
    let c_alpha = one_minus_cos_integral(alpha);
    let refs = atoms.clone();
    let n = LevyMeasure::spherical(dim, atoms, RadialProfile::power(1.0, -1.0 - alpha));
    let triplet = GeneratingTriplet::new(SymmetricMatrix::zero(dim), n, vec![0.0; dim])?;
    let h_coeff = total * stable_h_coefficient(alpha);
    Ok(ZooMember {
        name: format!("spherical_stable({dim},{alpha})"),
        triplet,
        re_psi: Some(Arc::new(move |x: &[f64]| {
            refs.iter()
                .map(|a| {
                    let s: f64 = a.direction.iter().zip(x).map(|(u, v)| u * v).sum();
                    a.weight * c_alpha * s.abs().powf(alpha)
                })
                .sum()
        })),
        im_psi: None,
        h: Some(Arc::new(move |r: f64| h_coeff * r.powf(-alpha))),
        psi_star: None,
        self_similarity: Some(alpha),
    })
}

/// Default off-axis atoms used by the mixed cylindrical-plus-spherical
/// example: an asymmetric pair away from the axes.
pub fn default_offaxis_atoms() -> Vec<SphereAtom> {
    let s5 = 5f64.sqrt();
    vec![
        SphereAtom { direction: vec![1.0 / s5, 2.0 / s5], weight: 0.7 },
        SphereAtom { direction: vec![-2.0 / s5, 1.0 / s5], weight: 0.3 },
    ]
}

/// Cylindrical α-stable plus an independent α-stable part with off-axis
/// sphere atoms (d = 2); the cylindrical half is the symmetric minorant.
pub fn mixed_stable_with_atoms(alpha: f64) -> Result<ZooMember> {
    check_alpha(alpha)?;
    let cyl = cylindrical_stable(2, alpha)?;
    let sph = spherical_stable(2, alpha, default_offaxis_atoms())?;
    let n = LevyMeasure::sum(vec![cyl.triplet.levy().clone(), sph.triplet.levy().clone()]);
    let triplet = GeneratingTriplet::new(SymmetricMatrix::zero(2), n, vec![0.0; 2])?;
    let re_cyl = cyl.re_psi.clone().unwrap();
    let re_sph = sph.re_psi.clone().unwrap();
    let h_cyl = cyl.h.clone().unwrap();
    let h_sph = sph.h.clone().unwrap();
    Ok(ZooMember {
        name: format!("mixed_stable({alpha})"),
        triplet,
        re_psi: Some(Arc::new(move |x: &[f64]| re_cyl(x) + re_sph(x))),
        im_psi: None,
        h: Some(Arc::new(move |r: f64| h_cyl(r) + h_sph(r))),
        psi_star: None,
        self_similarity: Some(alpha),
    })
}

/// Brownian part A = I/2 plus Cauchy jumps in d = 1 (the Gaussian
/// lower-bound scenario).
pub fn gaussian_with_cauchy_jumps() -> ZooMember {
    let cauchy = isotropic_stable(1, 1.0).unwrap();
    let a = SymmetricMatrix::scaled_identity(1, 0.5);
    let n = cauchy.triplet.levy().clone();
    let triplet = GeneratingTriplet::new(a, n, vec![0.0]).unwrap();
    let h_c = cauchy.h.clone().unwrap();
    ZooMember {
        name: "gauss_cauchy".to_string(),
        triplet,
        re_psi: Some(Arc::new(|x: &[f64]| 0.5 * x[0] * x[0] + x[0].abs())),
        im_psi: Some(Arc::new(|_x: &[f64]| 0.0)),
        h: Some(Arc::new(move |r: f64| 0.5 / (r * r) + h_c(r))),
        psi_star: Some(Arc::new(|r: f64| 0.5 * r * r + r)),
        self_similarity: None,
    }
}

/// The seven zoo constructors.
pub fn constructors() -> Vec<(&'static str, &'static str)> {
    vec![
        ("gaussian", "gaussian:c  - A = c·I, d inferred from c list"),
        ("isotropic_stable", "isotropic_stable:d,alpha"),
        ("cylindrical_stable", "cylindrical_stable:d,alpha"),
        ("one_sided_1_stable", "one_sided_1_stable"),
        ("stable_subordinator", "stable_subordinator:alpha (alpha in (0,1))"),
        ("product_stable", "product_stable:a1,a2,a3"),
        ("spherical_stable", "spherical_stable:d,alpha (default off-axis atoms)"),
    ]
}

/// Resolves a `name:params` string (aliases: cauchy, example61, gauss_cauchy).
pub fn make_zoo(spec: &str) -> Result<ZooMember> {
    let (name, params) = match spec.split_once(':') {
        Some((n, p)) => (n.trim(), p.trim()),
        None => (spec.trim(), ""),
    };
    let nums: Vec<f64> = if params.is_empty() {
        vec![]
    } else {
        params
            .split(',')
            .map(|s| {
                s.trim()
                    .parse::<f64>()
                    .map_err(|e| LevyError::BadParameter(format!("bad number {s:?}: {e}")))
            })
            .collect::<Result<Vec<f64>>>()?
    };
    let get = |i: usize| -> Result<f64> {
        nums.get(i)
            .copied()
            .ok_or_else(|| LevyError::BadParameter(format!("{name} needs at least {} params", i + 1)))
    };
    match name {
        "gaussian" => {
            if nums.is_empty() {
                return Err(LevyError::BadParameter(
                    "gaussian:c1[,c2,...] - diagonal entries".into(),
                ));
            }
            let d = nums.len();
            let mut rows = vec![0.0; d * d];
            for (i, c) in nums.iter().enumerate() {
                rows[i * d + i] = *c;
            }
            Ok(gaussian(SymmetricMatrix::new(d, &rows)?))
        }
        "isotropic_stable" => isotropic_stable(get(0)? as usize, get(1)?),
        "cauchy" => isotropic_stable(1, 1.0),
        "cylindrical_stable" => cylindrical_stable(get(0)? as usize, get(1)?),
        "one_sided_1_stable" => Ok(one_sided_1_stable()),
        "stable_subordinator" => stable_subordinator(get(0)?),
        "product_stable" => product_stable([get(0)?, get(1)?, get(2)?]),
        "spherical_stable" => spherical_stable(get(0)? as usize, get(1)?, default_offaxis_atoms()),
        "example61" | "mixed_stable" => mixed_stable_with_atoms(if nums.is_empty() {
            1.0
        } else {
            nums[0]
        }),
        "gauss_cauchy" => Ok(gaussian_with_cauchy_jumps()),
        other => Err(LevyError::BadParameter(format!("unknown zoo member {other:?}"))),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::measure::Kernel;

    #[test]
    fn cauchy_re_psi_matches_integrals() {
        let z = isotropic_stable(1, 1.0).unwrap();
        let re = z.re_psi.unwrap();
        for x in [0.5, 3.0] {
            let direct = z
                .triplet
                .levy()
                .directional_integral(&[x], &Kernel::OneMinusCos, 0.0, f64::INFINITY)
                .unwrap();
            assert!((direct - re(&[x])).abs() < 1e-10);
            assert!((re(&[x]) - x.abs()).abs() < 1e-14);
        }
    }

    #[test]
    fn zoo_h_closed_forms_match_raw() {
        let members = vec![
            gaussian(SymmetricMatrix::scaled_identity(2, 0.5)),
            isotropic_stable(1, 1.0).unwrap(),
            isotropic_stable(2, 1.5).unwrap(),
            cylindrical_stable(2, 1.0).unwrap(),
            one_sided_1_stable(),
            stable_subordinator(0.5).unwrap(),
            product_stable([0.5, 1.0, 1.5]).unwrap(),
            mixed_stable_with_atoms(1.0).unwrap(),
            gaussian_with_cauchy_jumps(),
        ];
        for m in members {
            let h = m.h.as_ref().expect("zoo members carry h");
            for k in -8..8 {
                let r = 2f64.powi(k);
                let raw = m.triplet.h_raw(r).unwrap();
                assert!(
                    (raw - h(r)).abs() <= 1e-9 * raw,
                    "{}: h({r}) raw {raw} vs closed {}",
                    m.name,
                    h(r)
                );
            }
        }
    }

    #[test]
    fn one_sided_h_and_k() {
        let z = one_sided_1_stable();
        for r in [0.25, 1.0, 4.0] {
            assert!((z.triplet.h_raw(r).unwrap() - 2.0 / r).abs() < 1e-12);
            assert!((z.triplet.k_raw(r).unwrap() - 1.0 / r).abs() < 1e-12);
        }
    }

    #[test]
    fn subordinator_h_closed_form() {
        let z = stable_subordinator(0.5).unwrap();
        let h = z.h.unwrap();
        // h(r) = c(1/(2-α)+1/α) r^{-1/2} with c = 1/(2Γ(1/2)) = 1/(2√π).
        let c = 0.5 / PI.sqrt();
        let want = c * (1.0 / 1.5 + 2.0);
        assert!((h(1.0) - want).abs() < 1e-12);
    }

    #[test]
    fn make_zoo_parses() {
        assert!(make_zoo("cauchy").is_ok());
        assert!(make_zoo("product_stable:0.5,1.0,1.5").is_ok());
        assert!(make_zoo("isotropic_stable:2,1.5").is_ok());
        assert!(make_zoo("nonsense").is_err());
        assert!(make_zoo("isotropic_stable:2,2.5").is_err());
    }

    #[test]
    fn product_stable_h_windows() {
        // h ≍ r^{-1.5} near zero and r^{-0.5} near infinity.
        let z = product_stable([0.5, 1.0, 1.5]).unwrap();
        let h = z.h.unwrap();
        let slope_small = (h(1e-6) / h(1e-7)).ln() / 10f64.ln();
        let slope_big = (h(1e7) / h(1e6)).ln() / 10f64.ln();
        assert!((slope_small + 1.5).abs() < 0.01, "small-r slope {slope_small}");
        assert!((slope_big + 0.5).abs() < 0.01, "large-r slope {slope_big}");
    }
}
