//! The characteristic exponent ψ, its radial majorant ψ*, and the
//! projected quadratic form.
//!
//! ψ(x) = ⟨x,Ax⟩ − i⟨x,b⟩ − ∫ (e^{i⟨x,z⟩} − 1 − i⟨x,z⟩ 1_{|z|<1}) N(dz).
//!
//! Construction walks the measure tree once and compiles closed-form
//! terms (stable power laws, sphere atoms, sine-integral windows) so that
//! density grids can evaluate ψ millions of times without quadrature.
//! Trees outside that class fall back to the generic integrators.

use std::f64::consts::PI;

use num_complex::Complex64;

use crate::error::Result;
use crate::measure::{GeneratingTriplet, Kernel, Node};
use crate::numeric::special::{
    one_minus_cos, one_minus_cos_integral, one_sided_compensated, sine_integral,
    stable_density_constant,
};

#[derive(Debug, Clone)]
enum Dir {
    /// |x| itself (isotropic term).
    Norm,
    Axis(usize),
    Vector(Vec<f64>),
}

impl Dir {
    fn abs_component(&self, x: &[f64]) -> f64 {
        match self {
            Dir::Norm => x.iter().map(|v| v * v).sum::<f64>().sqrt(),
            Dir::Axis(k) => x[*k].abs(),
            Dir::Vector(v) => v.iter().zip(x).map(|(a, b)| a * b).sum::<f64>().abs(),
        }
    }

    fn component(&self, x: &[f64]) -> f64 {
        match self {
            Dir::Norm => x.iter().map(|v| v * v).sum::<f64>().sqrt(),
            Dir::Axis(k) => x[*k],
            Dir::Vector(v) => v.iter().zip(x).map(|(a, b)| a * b).sum(),
        }
    }
}

#[derive(Debug, Clone)]
enum ReTerm {
    /// coeff · |⟨dir, x⟩|^alpha
    Stable { dir: Dir, coeff: f64, alpha: f64 },
    /// coeff · ∫_lo^hi (1 − cos(a r)) r^{-2} dr with a = |⟨dir, x⟩|
    WindowedUnit { dir: Dir, coeff: f64, lo: f64, hi: f64 },
    /// w · (1 − cos⟨x, z⟩)
    PointMass { z: Vec<f64>, w: f64 },
}

impl ReTerm {
    fn eval(&self, x: &[f64]) -> f64 {
        match self {
            ReTerm::Stable { dir, coeff, alpha } => coeff * dir.abs_component(x).powf(*alpha),
            ReTerm::WindowedUnit { dir, coeff, lo, hi } => {
                coeff * windowed_unit_stable(dir.abs_component(x), *lo, *hi)
            }
            ReTerm::PointMass { z, w } => {
                let s: f64 = z.iter().zip(x).map(|(a, b)| a * b).sum();
                w * one_minus_cos(s)
            }
        }
    }
}

#[derive(Debug, Clone)]
enum ImTerm {
    /// coeff · Im G_α(⟨dir, x⟩): compensated one-sided stable integral.
    Compensated { dir: Dir, coeff: f64, alpha: f64 },
    /// w · (sin⟨x,z⟩ − ⟨x,z⟩·1_{compensated})
    PointMass { z: Vec<f64>, w: f64, compensated: bool },
}

impl ImTerm {
    fn eval(&self, x: &[f64]) -> f64 {
        match self {
            ImTerm::Compensated { dir, coeff, alpha } => {
                coeff * one_sided_compensated(*alpha, dir.component(x)).1
            }
            ImTerm::PointMass { z, w, compensated } => {
                let s: f64 = z.iter().zip(x).map(|(a, b)| a * b).sum();
                w * (s.sin() - if *compensated { s } else { 0.0 })
            }
        }
    }
}

/// ∫_lo^hi (1 − cos(a r)) r^{-2} dr for a ≥ 0.
fn windowed_unit_stable(a: f64, lo: f64, hi: f64) -> f64 {
    if a == 0.0 {
        return 0.0;
    }
    let at_lo = if lo == 0.0 { 0.0 } else { one_minus_cos(a * lo) / lo };
    let at_hi = if hi.is_infinite() { 0.0 } else { one_minus_cos(a * hi) / hi };
    let si_hi = if hi.is_infinite() { PI / 2.0 } else { sine_integral(a * hi) };
    at_lo - at_hi + a * (si_hi - sine_integral(a * lo))
}

/// Compiles the node tree into closed-form terms. Returns false when some
/// part offers no closed form; callers then use the generic integrators.
fn compile(
    node: &Node,
    scale: f64,
    lo: f64,
    hi: f64,
    dim: usize,
    re: &mut Vec<ReTerm>,
    im: &mut Vec<ImTerm>,
) -> bool {
    match node {
        Node::Zero { .. } => true,
        Node::Radial { dim: d, density } => {
            let Some((c, e)) = density.as_power() else { return false };
            let alpha = -e - *d as f64;
            if !(0.0 < alpha && alpha < 2.0) {
                return false;
            }
            if lo == 0.0 && hi.is_infinite() {
                re.push(ReTerm::Stable {
                    dir: Dir::Norm,
                    coeff: scale * c / stable_density_constant(*d, alpha),
                    alpha,
                });
                true
            } else if *d == 1 && (alpha - 1.0).abs() < 1e-12 {
                re.push(ReTerm::WindowedUnit {
                    dir: Dir::Norm,
                    coeff: 2.0 * scale * c,
                    lo,
                    hi,
                });
                true
            } else {
                false
            }
        }
        Node::Spherical { atoms, radial, .. } => {
            let Some((c, e)) = radial.as_power() else { return false };
            let alpha = -e - 1.0;
            if !(0.0 < alpha && alpha < 2.0) {
                return false;
            }
            let full = lo == 0.0 && hi.is_infinite();
            if !full && ((alpha - 1.0).abs() >= 1e-12 || !node.is_symmetric()) {
                return false;
            }
            for a in atoms {
                if full {
                    re.push(ReTerm::Stable {
                        dir: Dir::Vector(a.direction.clone()),
                        coeff: scale * a.weight * c * one_minus_cos_integral(alpha),
                        alpha,
                    });
                    im.push(ImTerm::Compensated {
                        dir: Dir::Vector(a.direction.clone()),
                        coeff: scale * a.weight * c,
                        alpha,
                    });
                } else {
                    re.push(ReTerm::WindowedUnit {
                        dir: Dir::Vector(a.direction.clone()),
                        coeff: scale * a.weight * c,
                        lo,
                        hi,
                    });
                }
            }
            true
        }
        Node::OneSided { side, radial } => {
            let Some((c, e)) = radial.as_power() else { return false };
            let alpha = -e - 1.0;
            if !(0.0 < alpha && alpha < 2.0) {
                return false;
            }
            if lo == 0.0 && hi.is_infinite() {
                re.push(ReTerm::Stable {
                    dir: Dir::Norm,
                    coeff: scale * c * one_minus_cos_integral(alpha),
                    alpha,
                });
                im.push(ImTerm::Compensated {
                    dir: Dir::Vector(vec![side.factor()]),
                    coeff: scale * c,
                    alpha,
                });
                true
            } else {
                // A windowed one-sided part would need incomplete
                // oscillatory integrals for its imaginary part.
                false
            }
        }
        Node::Atoms { points, .. } => {
            for (z, w) in points {
                let r: f64 = z.iter().map(|v| v * v).sum::<f64>().sqrt();
                if r < lo || r >= hi {
                    continue;
                }
                re.push(ReTerm::PointMass { z: z.clone(), w: scale * w });
                im.push(ImTerm::PointMass {
                    z: z.clone(),
                    w: scale * w,
                    compensated: r < 1.0,
                });
            }
            true
        }
        Node::Embed { axis, inner, .. } => {
            let mut re1 = Vec::new();
            let mut im1 = Vec::new();
            if !compile(inner, scale, lo, hi, 1, &mut re1, &mut im1) {
                return false;
            }
            for t in re1 {
                re.push(match t {
                    ReTerm::Stable { dir, coeff, alpha } => ReTerm::Stable {
                        dir: lift_dir(dir, *axis, dim),
                        coeff,
                        alpha,
                    },
                    ReTerm::WindowedUnit { dir, coeff, lo, hi } => ReTerm::WindowedUnit {
                        dir: lift_dir(dir, *axis, dim),
                        coeff,
                        lo,
                        hi,
                    },
                    ReTerm::PointMass { z, w } => {
                        let mut zz = vec![0.0; dim];
                        zz[*axis] = z[0];
                        ReTerm::PointMass { z: zz, w }
                    }
                });
            }
            for t in im1 {
                im.push(match t {
                    ImTerm::Compensated { dir, coeff, alpha } => ImTerm::Compensated {
                        dir: lift_dir(dir, *axis, dim),
                        coeff,
                        alpha,
                    },
                    ImTerm::PointMass { z, w, compensated } => {
                        let mut zz = vec![0.0; dim];
                        zz[*axis] = z[0];
                        ImTerm::PointMass { z: zz, w, compensated }
                    }
                });
            }
            true
        }
        Node::Scale { factor, inner } => compile(inner, scale * factor, lo, hi, dim, re, im),
        Node::Restrict { lo: l, hi: h, inner } => {
            compile(inner, scale, lo.max(*l), hi.min(*h), dim, re, im)
        }
        Node::Sum { terms, .. } => terms
            .iter()
            .all(|t| compile(t, scale, lo, hi, dim, re, im)),
        Node::Difference { minuend, subtrahend } => {
            compile(minuend, scale, lo, hi, dim, re, im)
                && compile(subtrahend, -scale, lo, hi, dim, re, im)
        }
    }
}

fn lift_dir(dir: Dir, axis: usize, dim: usize) -> Dir {
    match dir {
        Dir::Norm | Dir::Axis(_) => Dir::Axis(axis),
        Dir::Vector(v) => {
            let mut out = vec![0.0; dim];
            out[axis] = v[0];
            Dir::Vector(out)
        }
    }
}

/// Estimate of ψ*(r) from sampling; a certified lower bound of the sup.
#[derive(Debug, Clone)]
pub struct PsiStarEstimate {
    pub value: f64,
    pub directions: usize,
    pub radial_points: usize,
}

/// The characteristic exponent of a generating triplet.
pub struct CharExponent {
    triplet: GeneratingTriplet,
    compiled: Option<(Vec<ReTerm>, Vec<ImTerm>)>,
    directions: Vec<Vec<f64>>,
}

impl CharExponent {
    pub fn new(triplet: &GeneratingTriplet) -> Self {
        let mut re = Vec::new();
        let mut im = Vec::new();
        let ok = compile(
            triplet.levy().node(),
            1.0,
            0.0,
            f64::INFINITY,
            triplet.dim(),
            &mut re,
            &mut im,
        );
        CharExponent {
            triplet: triplet.clone(),
            compiled: if ok { Some((re, im)) } else { None },
            directions: direction_grid(triplet.dim()),
        }
    }

    pub fn triplet(&self) -> &GeneratingTriplet {
        &self.triplet
    }

    pub fn has_closed_form(&self) -> bool {
        self.compiled.is_some()
    }

    /// Re ψ(x) = ⟨x,Ax⟩ + ∫ (1 − cos⟨x,z⟩) N(dz) ≥ 0.
    pub fn re_psi(&self, x: &[f64]) -> Result<f64> {
        let quad = self.triplet.gaussian().quadratic_form(x);
        if let Some((re, _)) = &self.compiled {
            return Ok(quad + re.iter().map(|t| t.eval(x)).sum::<f64>());
        }
        let jump = self.triplet.levy().directional_integral(
            x,
            &Kernel::OneMinusCos,
            0.0,
            f64::INFINITY,
        )?;
        Ok(quad + jump)
    }

    /// Im ψ(x) = −⟨x,b⟩ − ∫ (sin⟨x,z⟩ − ⟨x,z⟩ 1_{|z|<1}) N(dz).
    pub fn im_psi(&self, x: &[f64]) -> Result<f64> {
        let drift: f64 = x.iter().zip(self.triplet.drift()).map(|(a, b)| a * b).sum();
        if let Some((_, im)) = &self.compiled {
            return Ok(-drift - im.iter().map(|t| t.eval(x)).sum::<f64>());
        }
        if self.triplet.levy().is_symmetric() {
            return Ok(-drift);
        }
        // Split the compensated integral at the unit radius window.
        let inner =
            self.triplet
                .levy()
                .directional_integral(x, &Kernel::SinMinusLinear, 0.0, 1.0)?;
        let outer =
            self.triplet
                .levy()
                .directional_integral(x, &Kernel::Sin, 1.0, f64::INFINITY)?;
        Ok(-drift - inner - outer)
    }

    /// Full complex exponent.
    pub fn psi(&self, x: &[f64]) -> Result<Complex64> {
        Ok(Complex64::new(self.re_psi(x)?, self.im_psi(x)?))
    }

    /// ψ*(r) = sup_{|z| ≤ r} Re ψ(z), estimated from below by sampling a
    /// direction grid × log-radial grid and refining around the best point.
    pub fn psi_star(&self, r: f64) -> Result<PsiStarEstimate> {
        assert!(r > 0.0);
        let radial_points = if self.compiled.is_some() { 48 } else { 16 };
        let mut best = 0.0f64;
        let mut best_dir = 0usize;
        let mut best_s = r;
        for (di, v) in self.directions.iter().enumerate() {
            for k in 0..radial_points {
                // log spacing over [r·2^{-12}, r], denser near r where the
                // sup typically lives.
                let s = r * 2f64.powf(-12.0 * (1.0 - (k as f64 + 1.0) / radial_points as f64));
                let x: Vec<f64> = v.iter().map(|c| c * s).collect();
                let val = self.re_psi(&x)?;
                if val > best {
                    best = val;
                    best_dir = di;
                    best_s = s;
                }
            }
        }
        // Golden-section refinement in the radial coordinate of the best ray.
        let v = &self.directions[best_dir];
        let f = |s: f64| -> Result<f64> {
            let x: Vec<f64> = v.iter().map(|c| c * s).collect();
            self.re_psi(&x)
        };
        let (mut a, mut b) = ((best_s * 0.5).max(r * 1e-6), r);
        let phi = 0.618_033_988_749_895;
        for _ in 0..40 {
            let m1 = b - phi * (b - a);
            let m2 = a + phi * (b - a);
            if f(m1)? < f(m2)? {
                a = m1;
            } else {
                b = m2;
            }
        }
        let refined = f(0.5 * (a + b))?.max(f(r)?);
        Ok(PsiStarEstimate {
            value: best.max(refined),
            directions: self.directions.len(),
            radial_points,
        })
    }

    /// The quadratic form ⟨x,Ax⟩ + ∫_{|⟨x,z⟩|<1} |⟨x,z⟩|² N(dz), which
    /// equals K₁(1/|x|) of the projected process.
    pub fn quadratic_form_k1(&self, x: &[f64]) -> Result<f64> {
        let norm: f64 = x.iter().map(|v| v * v).sum::<f64>().sqrt();
        assert!(norm > 0.0, "x must be non-zero");
        let v: Vec<f64> = x.iter().map(|c| c / norm).collect();
        let projected = self.triplet.levy().node().project(&v, 0.0, f64::INFINITY)?;
        let jump = projected.line_integral(norm, &Kernel::Square, 0.0, 1.0 / norm)?;
        Ok(self.triplet.gaussian().quadratic_form(x) + jump)
    }

    /// Structural rotational invariance (isotropic measure, scalar A).
    pub fn is_rotationally_invariant(&self) -> bool {
        let a = self.triplet.gaussian();
        let eigen = a.eigenvalues();
        let spread = eigen.iter().fold(0.0f64, |m, e| m.max(*e))
            - eigen.iter().fold(f64::INFINITY, |m, e| m.min(*e));
        let scalar_a = a.is_zero() || spread <= 1e-12 * a.norm();
        scalar_a && node_is_radial(self.triplet.levy().node())
    }
}

fn node_is_radial(node: &Node) -> bool {
    match node {
        Node::Zero { .. } | Node::Radial { .. } => true,
        Node::Scale { inner, .. } | Node::Restrict { inner, .. } => node_is_radial(inner),
        Node::Sum { terms, .. } => terms.iter().all(node_is_radial),
        Node::Difference { minuend, subtrahend } => {
            node_is_radial(minuend) && node_is_radial(subtrahend)
        }
        _ => false,
    }
}

/// Direction grids: ±1 (d = 1), equi-angular (d = 2), Fibonacci sphere (d = 3).
pub fn direction_grid(dim: usize) -> Vec<Vec<f64>> {
    match dim {
        1 => vec![vec![1.0], vec![-1.0]],
        2 => (0..256)
            .map(|k| {
                let th = 2.0 * PI * k as f64 / 256.0;
                vec![th.cos(), th.sin()]
            })
            .collect(),
        3 => {
            let n = 1024;
            let golden = (1.0 + 5f64.sqrt()) / 2.0;
            (0..n)
                .map(|k| {
                    let z = 1.0 - 2.0 * (k as f64 + 0.5) / n as f64;
                    let rho = (1.0 - z * z).sqrt();
                    let th = 2.0 * PI * (k as f64 / golden).fract();
                    vec![rho * th.cos(), rho * th.sin(), z]
                })
                .collect()
        }
        d => panic!("direction grids support d ≤ 3, got {d}"),
    }
}

#[cfg(test)]
pub(crate) fn windowed_unit_stable_reference(a: f64, lo: f64, hi: f64) -> f64 {
    windowed_unit_stable(a, lo, hi)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::measure::zoo;
    use crate::measure::{LevyMeasure, SymmetricMatrix};
    use crate::numeric::quad;

    #[test]
    fn compiled_matches_closed_forms() {
        let members = vec![
            zoo::isotropic_stable(1, 1.0).unwrap(),
            zoo::isotropic_stable(2, 1.5).unwrap(),
            zoo::cylindrical_stable(2, 1.0).unwrap(),
            zoo::one_sided_1_stable(),
            zoo::stable_subordinator(0.5).unwrap(),
            zoo::product_stable([0.5, 1.0, 1.5]).unwrap(),
            zoo::mixed_stable_with_atoms(1.0).unwrap(),
            zoo::gaussian_with_cauchy_jumps(),
        ];
        for m in members {
            let e = CharExponent::new(&m.triplet);
            assert!(e.has_closed_form(), "{} should compile", m.name);
            let d = m.triplet.dim();
            let x: Vec<f64> = (0..d).map(|k| 0.7 - 0.4 * k as f64).collect();
            if let Some(re_ref) = &m.re_psi {
                let got = e.re_psi(&x).unwrap();
                let want = re_ref(&x);
                assert!(
                    (got - want).abs() < 1e-10 * (1.0 + want.abs()),
                    "{}: re {got} vs {want}",
                    m.name
                );
            }
            if let Some(im_ref) = &m.im_psi {
                let got = e.im_psi(&x).unwrap();
                let want = im_ref(&x);
                assert!(
                    (got - want).abs() < 1e-10 * (1.0 + want.abs()),
                    "{}: im {got} vs {want}",
                    m.name
                );
            }
        }
    }

    #[test]
    fn one_sided_psi_against_quadrature() {
        // Independent high-precision oscillatory quadrature for Im ψ at x = 1.
        let m = zoo::one_sided_1_stable();
        let e = CharExponent::new(&m.triplet);
        let psi = e.psi(&[1.0]).unwrap();
        assert!((psi.re - PI / 2.0).abs() < 1e-10);
        // Im ψ(1) = -(∫_0^1 (sin(-u) + u) u^{-2} du + ∫_1^∞ sin(-u) u^{-2} du)
        // after substituting z = -u in the measure on the negative half-line.
        let inner = quad::integrate_panels(
            &|u: f64| crate::numeric::special::sin_minus_linear(-u) * u.powf(-2.0),
            0.0,
            1.0,
            0.5,
            1e-12,
            &[],
        )
        .unwrap();
        let outer = quad::integrate_oscillatory(
            &|u: f64| (-u).sin() * u.powf(-2.0),
            1.0,
            100_000.0,
            2.0 * PI,
            1e-12,
        )
        .unwrap();
        let want = -(inner + outer);
        assert!(
            (psi.im - want).abs() < 1e-6,
            "im {} vs quadrature {want}",
            psi.im
        );
    }

    #[test]
    fn symmetric_triplet_has_real_psi() {
        let m = zoo::cylindrical_stable(2, 1.3).unwrap();
        let e = CharExponent::new(&m.triplet);
        let p = e.psi(&[0.4, -1.1]).unwrap();
        assert!(p.im.abs() < 1e-12);
    }

    #[test]
    fn gaussian_with_drift() {
        let t = crate::measure::GeneratingTriplet::new(
            SymmetricMatrix::scaled_identity(1, 0.5),
            LevyMeasure::zero(1),
            vec![1.0],
        )
        .unwrap();
        let e = CharExponent::new(&t);
        let p = e.psi(&[2.0]).unwrap();
        assert!((p.re - 2.0).abs() < 1e-14);
        assert!((p.im + 2.0).abs() < 1e-14, "psi(x) = x²/2 - ix, got im {}", p.im);
    }

    #[test]
    fn psi_star_isotropic() {
        let m = zoo::isotropic_stable(1, 1.2).unwrap();
        let e = CharExponent::new(&m.triplet);
        for r in [0.5, 1.0, 8.0] {
            let est = e.psi_star(r).unwrap();
            let want = r.powf(1.2);
            assert!(
                est.value <= want * (1.0 + 1e-12) && est.value > 0.999 * want,
                "r={r}: {} vs {want}",
                est.value
            );
        }
    }

    #[test]
    fn psi_star_cylindrical_d2() {
        // sup over |z| ≤ r of |z1| + |z2| is √2·r for α = 1.
        let m = zoo::cylindrical_stable(2, 1.0).unwrap();
        let e = CharExponent::new(&m.triplet);
        let r = 2.0;
        let est = e.psi_star(r).unwrap();
        let want = 2f64.sqrt() * r;
        assert!(
            est.value <= want * (1.0 + 1e-12) && est.value > 0.9995 * want,
            "{} vs {want}",
            est.value
        );
    }

    #[test]
    fn quadratic_form_k1_gaussian() {
        let m = zoo::gaussian(SymmetricMatrix::scaled_identity(2, 0.5));
        let e = CharExponent::new(&m.triplet);
        let x = [3.0, 4.0];
        assert!((e.quadratic_form_k1(&x).unwrap() - 12.5).abs() < 1e-12);
    }

    #[test]
    fn quadratic_form_k1_matches_projected_k() {
        // Equals |x|² K₁(1/|x|) of the projected process.
        let m = zoo::mixed_stable_with_atoms(1.0).unwrap();
        let e = CharExponent::new(&m.triplet);
        let x = [1.5, -2.0];
        let norm = (1.5f64 * 1.5 + 4.0).sqrt();
        let v = [x[0] / norm, x[1] / norm];
        let proj = m.triplet.project(&v).unwrap();
        let k1 = proj.k_raw(1.0 / norm).unwrap();
        let direct = e.quadratic_form_k1(&x).unwrap();
        assert!((direct - k1).abs() < 1e-8 * direct, "{direct} vs {k1}");
    }

    #[test]
    fn projection_identity_for_exponents() {
        // Re ψ₁(s) = Re ψ(s·v) for the projected triplet.
        let m = zoo::mixed_stable_with_atoms(1.3).unwrap();
        let e = CharExponent::new(&m.triplet);
        let v = [0.6, 0.8];
        let proj = m.triplet.project(&v).unwrap();
        let pe = CharExponent::new(&proj);
        for s in [0.3, 1.0, 5.0] {
            let a = pe.re_psi(&[s]).unwrap();
            let b = e.re_psi(&[s * v[0], s * v[1]]).unwrap();
            assert!((a - b).abs() < 1e-8 * (1.0 + b), "s={s}: {a} vs {b}");
        }
    }

    #[test]
    fn rotational_invariance_detection() {
        assert!(CharExponent::new(&zoo::isotropic_stable(2, 1.0).unwrap().triplet)
            .is_rotationally_invariant());
        assert!(!CharExponent::new(&zoo::cylindrical_stable(2, 1.0).unwrap().triplet)
            .is_rotationally_invariant());
    }

    #[test]
    fn windowed_unit_stable_against_quadrature() {
        for (a, lo, hi) in [(2.0, 0.0, 1.0), (5.0, 0.5, 3.0), (1.3, 0.25, f64::INFINITY)] {
            let closed = windowed_unit_stable_reference(a, lo, hi);
            let f = |r: f64| one_minus_cos(a * r) * r.powf(-2.0);
            let hi_cut = if hi.is_infinite() { 20_000.0 } else { hi };
            let q = quad::integrate_oscillatory(&f, lo, hi_cut, 2.0 * PI / a, 1e-12).unwrap();
            let tail = if hi.is_infinite() { 2.0 / hi_cut } else { 0.0 };
            assert!(
                (closed - q).abs() <= tail + 1e-9,
                "a={a} [{lo},{hi}]: closed {closed} vs quad {q}"
            );
        }
    }
}
