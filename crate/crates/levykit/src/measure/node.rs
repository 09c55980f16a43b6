//! Measure nodes and their integral calculus.
//!
//! A Lévy measure is a tree of nodes. Every integral the crate needs is
//! one of three shapes, each with per-node exact evaluation where the
//! structure allows and adaptive quadrature otherwise:
//!
//! * `partial_moment`: ∫ |z|^q N(dz) over an annulus (exact for powers),
//! * `radial_integral`: ∫ f(|z|) N(dz) over an annulus (quadrature),
//! * `directional_integral`: ∫ g(⟨dir, z⟩) N(dz) over an annulus, reduced
//!   exactly to the one-dimensional pushforward along `dir`.
//!
//! Annulus windows commute with the whole algebra, which is what makes
//! restrictions, differences and projections exact rather than sampled.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::error::{LevyError, Result};
use crate::numeric::quad;
use crate::numeric::special::{
    one_minus_cos, sin_minus_linear, sine_integral, sphere_surface, stable_density_constant,
    one_minus_cos_integral, sin_integral_power,
};

use super::profile::RadialProfile;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Side {
    Neg,
    Pos,
}

impl Side {
    pub fn factor(self) -> f64 {
        match self {
            Side::Neg => -1.0,
            Side::Pos => 1.0,
        }
    }
}

/// One direction atom of a spherical-product measure.
#[derive(Debug, Clone)]
pub struct SphereAtom {
    pub direction: Vec<f64>,
    pub weight: f64,
}

#[derive(Debug, Clone)]
pub enum Node {
    /// The zero measure.
    Zero { dim: usize },
    /// Isotropic density j(|z|) with respect to Lebesgue measure on ℝᵈ.
    Radial { dim: usize, density: RadialProfile },
    /// Finite sphere measure (atoms) times a radial density k(r) dr.
    Spherical {
        dim: usize,
        atoms: Vec<SphereAtom>,
        radial: RadialProfile,
    },
    /// One-dimensional measure k(r) dr carried on the half-line `side`.
    OneSided { side: Side, radial: RadialProfile },
    /// Finite atoms (z_i, w_i); atoms at the origin are forbidden.
    Atoms { dim: usize, points: Vec<(Vec<f64>, f64)> },
    /// A one-dimensional measure placed on a coordinate axis of ℝᵈ.
    Embed {
        dim: usize,
        axis: usize,
        inner: Box<Node>,
    },
    Scale { factor: f64, inner: Box<Node> },
    /// Restriction to the annulus { lo ≤ |z| < hi }.
    Restrict { lo: f64, hi: f64, inner: Box<Node> },
    Sum { dim: usize, terms: Vec<Node> },
    /// minuend - subtrahend; non-negativity is checked on mass-like queries.
    Difference { minuend: Box<Node>, subtrahend: Box<Node> },
}

/// Integrand applied to ⟨dir, z⟩ in a directional integral.
pub enum Kernel<'a> {
    /// 1 - cos(s)
    OneMinusCos,
    /// sin(s)
    Sin,
    /// sin(s) - s (only meaningful over finite windows)
    SinMinusLinear,
    /// s
    Linear,
    /// s²
    Square,
    /// |s|^q
    AbsPower(f64),
    /// 1
    Indicator,
    /// 1_{s > 0}
    PositiveSide,
    Custom {
        g: &'a (dyn Fn(f64) -> f64 + Sync),
        breaks: &'a [f64],
        period: Option<f64>,
    },
}

impl Kernel<'_> {
    fn eval(&self, s: f64) -> f64 {
        match self {
            Kernel::OneMinusCos => one_minus_cos(s),
            Kernel::Sin => s.sin(),
            Kernel::SinMinusLinear => sin_minus_linear(s),
            Kernel::Linear => s,
            Kernel::Square => s * s,
            Kernel::AbsPower(q) => s.abs().powf(*q),
            Kernel::Indicator => 1.0,
            Kernel::PositiveSide => {
                if s > 0.0 {
                    1.0
                } else {
                    0.0
                }
            }
            Kernel::Custom { g, .. } => g(s),
        }
    }

    /// Oscillation period of the kernel in its argument, if any.
    fn period(&self) -> Option<f64> {
        match self {
            Kernel::OneMinusCos | Kernel::Sin | Kernel::SinMinusLinear => Some(2.0 * PI),
            Kernel::Custom { period, .. } => *period,
            _ => None,
        }
    }
}

impl Node {
    pub fn dim(&self) -> usize {
        match self {
            Node::Zero { dim }
            | Node::Radial { dim, .. }
            | Node::Spherical { dim, .. }
            | Node::Atoms { dim, .. }
            | Node::Embed { dim, .. }
            | Node::Sum { dim, .. } => *dim,
            Node::OneSided { .. } => 1,
            Node::Scale { inner, .. } => inner.dim(),
            Node::Restrict { inner, .. } => inner.dim(),
            Node::Difference { minuend, .. } => minuend.dim(),
        }
    }

    /// Structural symmetry under z ↦ -z.
    pub fn is_symmetric(&self) -> bool {
        match self {
            Node::Zero { .. } | Node::Radial { .. } => true,
            Node::OneSided { .. } => false,
            Node::Spherical { atoms, .. } => atoms_symmetric(atoms),
            Node::Atoms { points, .. } => points_symmetric(points),
            Node::Embed { inner, .. } => inner.is_symmetric(),
            Node::Scale { inner, .. } => inner.is_symmetric(),
            Node::Restrict { inner, .. } => inner.is_symmetric(),
            Node::Sum { terms, .. } => terms.iter().all(|t| t.is_symmetric()),
            Node::Difference { minuend, subtrahend } => {
                minuend.is_symmetric() && subtrahend.is_symmetric()
            }
        }
    }

    /// ∫_{lo ≤ |z| < hi} |z|^q N(dz); exact for power-law profiles.
    pub fn partial_moment(&self, lo: f64, hi: f64, q: f64) -> Result<f64> {
        if lo >= hi {
            return Ok(0.0);
        }
        match self {
            Node::Zero { .. } => Ok(0.0),
            Node::Radial { dim, density } => {
                Ok(sphere_surface(*dim) * density.moment(lo, hi, q + (*dim as f64) - 1.0)?)
            }
            Node::Spherical { atoms, radial, .. } => {
                let total: f64 = atoms.iter().map(|a| a.weight).sum();
                Ok(total * radial.moment(lo, hi, q)?)
            }
            Node::OneSided { radial, .. } => radial.moment(lo, hi, q),
            Node::Atoms { points, .. } => Ok(points
                .iter()
                .filter(|(z, _)| in_window(norm(z), lo, hi))
                .map(|(z, w)| w * norm(z).powf(q))
                .sum()),
            Node::Embed { inner, .. } => inner.partial_moment(lo, hi, q),
            Node::Scale { factor, inner } => Ok(factor * inner.partial_moment(lo, hi, q)?),
            Node::Restrict { lo: l, hi: h, inner } => {
                inner.partial_moment(lo.max(*l), hi.min(*h), q)
            }
            Node::Sum { terms, .. } => {
                let mut acc = 0.0;
                for t in terms {
                    acc += t.partial_moment(lo, hi, q)?;
                }
                Ok(acc)
            }
            Node::Difference { minuend, subtrahend } => {
                let m = minuend.partial_moment(lo, hi, q)?;
                let s = subtrahend.partial_moment(lo, hi, q)?;
                check_difference(m, s)
            }
        }
    }

    /// ∫_{lo ≤ |z| < hi} f(|z|) N(dz) by quadrature.
    ///
    /// `nonneg` marks a mass-like integrand so Difference nodes can check
    /// non-negativity of the result.
    pub fn radial_integral(
        &self,
        lo: f64,
        hi: f64,
        f: &(dyn Fn(f64) -> f64 + Sync),
        breaks: &[f64],
        nonneg: bool,
    ) -> Result<f64> {
        if lo >= hi {
            return Ok(0.0);
        }
        match self {
            Node::Zero { .. } => Ok(0.0),
            Node::Radial { dim, density } => {
                let d = *dim;
                let w = sphere_surface(d);
                let g = |r: f64| w * f(r) * r.powi(d as i32 - 1) * density.value(r);
                panel_quad(&g, lo, hi, breaks, density.singular_exponent() + d as f64 - 1.0)
            }
            Node::Spherical { atoms, radial, .. } => {
                let total: f64 = atoms.iter().map(|a| a.weight).sum();
                let g = |r: f64| total * f(r) * radial.value(r);
                panel_quad(&g, lo, hi, breaks, radial.singular_exponent())
            }
            Node::OneSided { radial, .. } => {
                let g = |r: f64| f(r) * radial.value(r);
                panel_quad(&g, lo, hi, breaks, radial.singular_exponent())
            }
            Node::Atoms { points, .. } => Ok(points
                .iter()
                .filter(|(z, _)| in_window(norm(z), lo, hi))
                .map(|(z, w)| w * f(norm(z)))
                .sum()),
            Node::Embed { inner, .. } => inner.radial_integral(lo, hi, f, breaks, nonneg),
            Node::Scale { factor, inner } => {
                Ok(factor * inner.radial_integral(lo, hi, f, breaks, nonneg)?)
            }
            Node::Restrict { lo: l, hi: h, inner } => {
                inner.radial_integral(lo.max(*l), hi.min(*h), f, breaks, nonneg)
            }
            Node::Sum { terms, .. } => {
                let mut acc = 0.0;
                for t in terms {
                    acc += t.radial_integral(lo, hi, f, breaks, nonneg)?;
                }
                Ok(acc)
            }
            Node::Difference { minuend, subtrahend } => {
                let m = minuend.radial_integral(lo, hi, f, breaks, nonneg)?;
                let s = subtrahend.radial_integral(lo, hi, f, breaks, nonneg)?;
                if nonneg {
                    check_difference(m, s)
                } else {
                    Ok(m - s)
                }
            }
        }
    }

    /// ∫_{lo ≤ |z| < hi} kernel(⟨dir, z⟩) N(dz).
    ///
    /// Reduced exactly to the pushforward along `dir/|dir|`; the window
    /// stays a constraint on the original radius |z|.
    pub fn directional_integral(
        &self,
        dir: &[f64],
        kernel: &Kernel,
        lo: f64,
        hi: f64,
    ) -> Result<f64> {
        let b = norm(dir);
        if b == 0.0 {
            return Ok(0.0);
        }
        let v: Vec<f64> = dir.iter().map(|x| x / b).collect();
        let projected = self.project(&v, lo, hi)?;
        projected.line_integral(b, kernel, 0.0, f64::INFINITY)
    }

    /// ∫_{lo ≤ |z| < hi} z N(dz) componentwise; zero exactly for symmetric nodes.
    pub fn moment_vector(&self, lo: f64, hi: f64) -> Result<Vec<f64>> {
        let d = self.dim();
        if lo >= hi || self.is_symmetric() {
            return Ok(vec![0.0; d]);
        }
        match self {
            Node::Zero { .. } | Node::Radial { .. } => Ok(vec![0.0; d]),
            Node::Spherical { atoms, radial, .. } => {
                let m1 = radial.moment(lo, hi, 1.0)?;
                let mut out = vec![0.0; d];
                for a in atoms {
                    for (o, x) in out.iter_mut().zip(&a.direction) {
                        *o += a.weight * x * m1;
                    }
                }
                Ok(out)
            }
            Node::OneSided { side, radial } => Ok(vec![side.factor() * radial.moment(lo, hi, 1.0)?]),
            Node::Atoms { points, .. } => {
                let mut out = vec![0.0; d];
                for (z, w) in points.iter().filter(|(z, _)| in_window(norm(z), lo, hi)) {
                    for (o, x) in out.iter_mut().zip(z) {
                        *o += w * x;
                    }
                }
                Ok(out)
            }
            Node::Embed { axis, inner, .. } => {
                let m = inner.moment_vector(lo, hi)?;
                let mut out = vec![0.0; d];
                out[*axis] = m[0];
                Ok(out)
            }
            Node::Scale { factor, inner } => {
                Ok(inner.moment_vector(lo, hi)?.iter().map(|x| factor * x).collect())
            }
            Node::Restrict { lo: l, hi: h, inner } => inner.moment_vector(lo.max(*l), hi.min(*h)),
            Node::Sum { terms, .. } => {
                let mut out = vec![0.0; d];
                for t in terms {
                    for (o, x) in out.iter_mut().zip(t.moment_vector(lo, hi)?) {
                        *o += x;
                    }
                }
                Ok(out)
            }
            Node::Difference { minuend, subtrahend } => {
                let m = minuend.moment_vector(lo, hi)?;
                let s = subtrahend.moment_vector(lo, hi)?;
                Ok(m.iter().zip(&s).map(|(a, b)| a - b).collect())
            }
        }
    }

    /// ∫_{lo ≤ |z| < hi} z zᵀ N(dz), row-major d×d.
    pub fn second_moment_matrix(&self, lo: f64, hi: f64) -> Result<Vec<f64>> {
        let d = self.dim();
        let mut out = vec![0.0; d * d];
        if lo >= hi {
            return Ok(out);
        }
        match self {
            Node::Zero { .. } => Ok(out),
            Node::Radial { dim, density } => {
                let m = sphere_surface(*dim) * density.moment(lo, hi, (*dim as f64) + 1.0)?;
                for i in 0..d {
                    out[i * d + i] = m / d as f64;
                }
                Ok(out)
            }
            Node::Spherical { atoms, radial, .. } => {
                let m2 = radial.moment(lo, hi, 2.0)?;
                for a in atoms {
                    for i in 0..d {
                        for j in 0..d {
                            out[i * d + j] += a.weight * a.direction[i] * a.direction[j] * m2;
                        }
                    }
                }
                Ok(out)
            }
            Node::OneSided { radial, .. } => {
                out[0] = radial.moment(lo, hi, 2.0)?;
                Ok(out)
            }
            Node::Atoms { points, .. } => {
                for (z, w) in points.iter().filter(|(z, _)| in_window(norm(z), lo, hi)) {
                    for i in 0..d {
                        for j in 0..d {
                            out[i * d + j] += w * z[i] * z[j];
                        }
                    }
                }
                Ok(out)
            }
            Node::Embed { axis, inner, .. } => {
                let m = inner.second_moment_matrix(lo, hi)?;
                out[axis * d + axis] = m[0];
                Ok(out)
            }
            Node::Scale { factor, inner } => Ok(inner
                .second_moment_matrix(lo, hi)?
                .iter()
                .map(|x| factor * x)
                .collect()),
            Node::Restrict { lo: l, hi: h, inner } => {
                inner.second_moment_matrix(lo.max(*l), hi.min(*h))
            }
            Node::Sum { terms, .. } => {
                for t in terms {
                    for (o, x) in out.iter_mut().zip(t.second_moment_matrix(lo, hi)?) {
                        *o += x;
                    }
                }
                Ok(out)
            }
            Node::Difference { minuend, subtrahend } => {
                let m = minuend.second_moment_matrix(lo, hi)?;
                let s = subtrahend.second_moment_matrix(lo, hi)?;
                Ok(m.iter().zip(&s).map(|(a, b)| a - b).collect())
            }
        }
    }

    /// Exact pushforward of the measure restricted to { wlo ≤ |z| < whi }
    /// under z ↦ ⟨v, z⟩, with the pushforward's atom at 0 removed.
    pub fn project(&self, v: &[f64], wlo: f64, whi: f64) -> Result<Node> {
        debug_assert!((norm(v) - 1.0).abs() < 1e-9);
        if wlo >= whi {
            return Ok(Node::Zero { dim: 1 });
        }
        match self {
            Node::Zero { .. } => Ok(Node::Zero { dim: 1 }),
            Node::Radial { dim, density } => project_radial(*dim, density, wlo, whi),
            Node::Spherical { atoms, radial, .. } => {
                let mut terms = Vec::new();
                for a in atoms {
                    let c: f64 = a.direction.iter().zip(v).map(|(x, y)| x * y).sum();
                    if c.abs() < 1e-14 {
                        continue;
                    }
                    let prof = stretch_profile(radial, c.abs());
                    let side = if c > 0.0 { Side::Pos } else { Side::Neg };
                    let one = Node::Scale {
                        factor: a.weight,
                        inner: Box::new(Node::OneSided { side, radial: prof }),
                    };
                    terms.push(restrict_node(one, c.abs() * wlo, c.abs() * whi));
                }
                Ok(sum_of(terms, 1))
            }
            Node::OneSided { side, radial } => {
                let c = v[0] * side.factor();
                let new_side = if c > 0.0 { Side::Pos } else { Side::Neg };
                // |v| = 1 in d = 1, so no stretching is needed.
                Ok(restrict_node(
                    Node::OneSided {
                        side: new_side,
                        radial: radial.clone(),
                    },
                    wlo,
                    whi,
                ))
            }
            Node::Atoms { points, .. } => {
                let pts: Vec<(Vec<f64>, f64)> = points
                    .iter()
                    .filter(|(z, _)| in_window(norm(z), wlo, whi))
                    .filter_map(|(z, w)| {
                        let s: f64 = z.iter().zip(v).map(|(x, y)| x * y).sum();
                        if s.abs() < 1e-300 {
                            None
                        } else {
                            Some((vec![s], *w))
                        }
                    })
                    .collect();
                Ok(Node::Atoms { dim: 1, points: pts })
            }
            Node::Embed { axis, inner, .. } => {
                let c = v[*axis];
                if c.abs() < 1e-14 {
                    return Ok(Node::Zero { dim: 1 });
                }
                let restricted = restrict_node(inner.as_ref().clone(), wlo, whi);
                Ok(stretch_1d(&restricted, c))
            }
            Node::Scale { factor, inner } => Ok(Node::Scale {
                factor: *factor,
                inner: Box::new(inner.project(v, wlo, whi)?),
            }),
            Node::Restrict { lo, hi, inner } => inner.project(v, wlo.max(*lo), whi.min(*hi)),
            Node::Sum { terms, .. } => {
                let mut out = Vec::with_capacity(terms.len());
                for t in terms {
                    out.push(t.project(v, wlo, whi)?);
                }
                Ok(sum_of(out, 1))
            }
            Node::Difference { minuend, subtrahend } => Ok(Node::Difference {
                minuend: Box::new(minuend.project(v, wlo, whi)?),
                subtrahend: Box::new(subtrahend.project(v, wlo, whi)?),
            }),
        }
    }

    /// 1-d only: ∫_{lo ≤ |s| < hi} kernel(b·s) ν(ds).
    pub fn line_integral(&self, b: f64, kernel: &Kernel, lo: f64, hi: f64) -> Result<f64> {
        debug_assert_eq!(self.dim(), 1);
        if lo >= hi {
            return Ok(0.0);
        }
        match self {
            Node::Zero { .. } => Ok(0.0),
            Node::Radial { density, .. } => Ok(profile_kernel(density, lo, hi, b, kernel)?
                + profile_kernel(density, lo, hi, -b, kernel)?),
            Node::OneSided { side, radial } => {
                profile_kernel(radial, lo, hi, b * side.factor(), kernel)
            }
            Node::Atoms { points, .. } => Ok(points
                .iter()
                .filter(|(z, _)| in_window(z[0].abs(), lo, hi))
                .map(|(z, w)| w * kernel.eval(b * z[0]))
                .sum()),
            Node::Scale { factor, inner } => Ok(factor * inner.line_integral(b, kernel, lo, hi)?),
            Node::Restrict { lo: l, hi: h, inner } => {
                inner.line_integral(b, kernel, lo.max(*l), hi.min(*h))
            }
            Node::Sum { terms, .. } => {
                let mut acc = 0.0;
                for t in terms {
                    acc += t.line_integral(b, kernel, lo, hi)?;
                }
                Ok(acc)
            }
            Node::Difference { minuend, subtrahend } => Ok(minuend
                .line_integral(b, kernel, lo, hi)?
                - subtrahend.line_integral(b, kernel, lo, hi)?),
            Node::Spherical { .. } | Node::Embed { .. } => {
                unreachable!("spherical/embed nodes are at least two-dimensional")
            }
        }
    }
}

fn atoms_symmetric(atoms: &[SphereAtom]) -> bool {
    atoms.iter().all(|a| {
        atoms.iter().any(|b| {
            (a.weight - b.weight).abs() <= 1e-12 * (a.weight.abs() + 1.0)
                && a.direction
                    .iter()
                    .zip(&b.direction)
                    .all(|(x, y)| (x + y).abs() < 1e-12)
        })
    })
}

fn points_symmetric(points: &[(Vec<f64>, f64)]) -> bool {
    points.iter().all(|(z, w)| {
        points.iter().any(|(z2, w2)| {
            (w - w2).abs() <= 1e-12 * (w.abs() + 1.0)
                && z.iter().zip(z2).all(|(x, y)| (x + y).abs() < 1e-12)
        })
    })
}

fn in_window(r: f64, lo: f64, hi: f64) -> bool {
    r >= lo && r < hi
}

fn norm(z: &[f64]) -> f64 {
    z.iter().map(|x| x * x).sum::<f64>().sqrt()
}

fn check_difference(m: f64, s: f64) -> Result<f64> {
    let v = m - s;
    let tol = 1e-12 * (m.abs() + 1.0);
    if v < -tol {
        return Err(LevyError::NegativeMass { value: v, tolerance: tol });
    }
    Ok(v.max(0.0))
}

pub(crate) fn sum_of(mut terms: Vec<Node>, dim: usize) -> Node {
    terms.retain(|t| !matches!(t, Node::Zero { .. }));
    match terms.len() {
        0 => Node::Zero { dim },
        1 => terms.pop().unwrap(),
        _ => Node::Sum { dim, terms },
    }
}

pub(crate) fn restrict_node(node: Node, lo: f64, hi: f64) -> Node {
    if lo <= 0.0 && hi.is_infinite() {
        node
    } else {
        Node::Restrict {
            lo,
            hi,
            inner: Box::new(node),
        }
    }
}

/// Pushforward of a 1-d profile measure k(r) dr under r ↦ c·r (c > 0).
fn stretch_profile(radial: &RadialProfile, c: f64) -> RadialProfile {
    debug_assert!(c > 0.0);
    match radial {
        RadialProfile::Power { coeff, exponent } => RadialProfile::Power {
            coeff: coeff * c.powf(-exponent - 1.0),
            exponent: *exponent,
        },
        RadialProfile::Func { density, singular_exponent } => {
            let density = density.clone();
            RadialProfile::Func {
                density: std::sync::Arc::new(move |s: f64| density(s / c) / c),
                singular_exponent: *singular_exponent,
            }
        }
    }
}

/// Pushforward of a 1-d node under s ↦ c·s (c ≠ 0).
fn stretch_1d(node: &Node, c: f64) -> Node {
    let a = c.abs();
    match node {
        Node::Zero { .. } => Node::Zero { dim: 1 },
        Node::Radial { density, .. } => Node::Radial {
            dim: 1,
            density: stretch_profile(density, a),
        },
        Node::OneSided { side, radial } => Node::OneSided {
            side: if c > 0.0 { *side } else { flip(*side) },
            radial: stretch_profile(radial, a),
        },
        Node::Atoms { points, .. } => Node::Atoms {
            dim: 1,
            points: points.iter().map(|(z, w)| (vec![c * z[0]], *w)).collect(),
        },
        Node::Scale { factor, inner } => Node::Scale {
            factor: *factor,
            inner: Box::new(stretch_1d(inner, c)),
        },
        Node::Restrict { lo, hi, inner } => Node::Restrict {
            lo: a * lo,
            hi: a * hi,
            inner: Box::new(stretch_1d(inner, c)),
        },
        Node::Sum { terms, .. } => Node::Sum {
            dim: 1,
            terms: terms.iter().map(|t| stretch_1d(t, c)).collect(),
        },
        Node::Difference { minuend, subtrahend } => Node::Difference {
            minuend: Box::new(stretch_1d(minuend, c)),
            subtrahend: Box::new(stretch_1d(subtrahend, c)),
        },
        Node::Spherical { .. } | Node::Embed { .. } => unreachable!("not one-dimensional"),
    }
}

fn flip(side: Side) -> Side {
    match side {
        Side::Neg => Side::Pos,
        Side::Pos => Side::Neg,
    }
}

/// Projection of an isotropic measure, restricted to wlo ≤ |z| < whi,
/// onto a line. The result is a symmetric 1-d density.
fn project_radial(dim: usize, density: &RadialProfile, wlo: f64, whi: f64) -> Result<Node> {
    if dim == 1 {
        return Ok(restrict_node(
            Node::Radial { dim: 1, density: density.clone() },
            wlo,
            whi,
        ));
    }
    // Unrestricted stable case: the projection of the isotropic α-stable
    // measure is the one-dimensional α-stable measure, exactly.
    if wlo == 0.0 && whi.is_infinite() {
        if let Some((coeff, exponent)) = density.as_power() {
            let alpha = -exponent - dim as f64;
            if alpha > 0.0 && alpha < 2.0 {
                let c1 = coeff * stable_density_constant(1, alpha)
                    / stable_density_constant(dim, alpha);
                return Ok(Node::Radial {
                    dim: 1,
                    density: RadialProfile::power(c1, -1.0 - alpha),
                });
            }
        }
    }
    // General case: marginal density computed on the fly.
    //   d = 2: j_p(s) = 2 ∫ j(√(s²+w²)) dw over the w-window,
    //   d = 3: j_p(s) = 2π ∫ j(u) u du over u ∈ [max(wlo,|s|), whi).
    let prof = density.clone();
    let singular = if wlo > 0.0 {
        0.0
    } else {
        prof.singular_exponent() + dim as f64 - 1.0
    };
    let (lo, hi) = (wlo, whi);
    let marginal: std::sync::Arc<dyn Fn(f64) -> f64 + Send + Sync> = match dim {
        2 => std::sync::Arc::new(move |s: f64| {
            let s = s.abs();
            if s >= hi {
                return 0.0;
            }
            let w_lo = (lo * lo - s * s).max(0.0).sqrt();
            let w_hi = if hi.is_finite() {
                (hi * hi - s * s).max(0.0).sqrt()
            } else {
                f64::INFINITY
            };
            let f = |w: f64| prof.value((s * s + w * w).sqrt());
            2.0 * quad::integrate_panels(&f, w_lo, w_hi, s.max(w_lo).max(1e-12), 1e-10, &[])
                .unwrap_or(f64::NAN)
        }),
        3 => {
            let prof3 = density.clone();
            std::sync::Arc::new(move |s: f64| {
                let s = s.abs();
                if s >= hi {
                    return 0.0;
                }
                let a = lo.max(s);
                if let Some((coeff, exponent)) = prof3.as_power() {
                    let e = exponent + 2.0;
                    let v = if (e + 1.0).abs() < 1e-14 {
                        if hi.is_finite() { (hi / a).ln() } else { f64::INFINITY }
                    } else {
                        let p = e + 1.0;
                        let up = if hi.is_finite() {
                            hi.powf(p) / p
                        } else if p > 0.0 {
                            f64::INFINITY
                        } else {
                            0.0
                        };
                        up - a.powf(p) / p
                    };
                    2.0 * PI * coeff * v
                } else {
                    let f = |u: f64| prof3.value(u) * u;
                    2.0 * PI
                        * quad::integrate_panels(&f, a, hi, a.max(1e-12) * 2.0, 1e-10, &[])
                            .unwrap_or(f64::NAN)
                }
            })
        }
        _ => {
            return Err(LevyError::BadParameter(format!(
                "radial projection supports d ≤ 3, got d = {dim}"
            )))
        }
    };
    Ok(restrict_node(
        Node::Radial {
            dim: 1,
            density: RadialProfile::Func {
                density: marginal,
                singular_exponent: singular,
            },
        },
        0.0,
        whi,
    ))
}

fn panel_quad(
    g: &(dyn Fn(f64) -> f64 + Sync),
    lo: f64,
    hi: f64,
    breaks: &[f64],
    _singular: f64,
) -> Result<f64> {
    let anchor = if lo > 0.0 && hi.is_finite() {
        (lo * hi).sqrt()
    } else if lo > 0.0 {
        2.0 * lo
    } else if hi.is_finite() {
        hi * 0.25
    } else {
        1.0
    };
    let anchor = breaks
        .iter()
        .copied()
        .filter(|b| *b > lo && *b < hi)
        .fold(anchor, f64::min);
    quad::integrate_panels(&|r| g(r), lo, hi, anchor, quad::REL_TOL, breaks)
}

/// ∫_lo^hi kernel(b·r) k(r) dr with closed forms where the profile allows.
fn profile_kernel(
    prof: &RadialProfile,
    lo: f64,
    hi: f64,
    b: f64,
    kernel: &Kernel,
) -> Result<f64> {
    if lo >= hi {
        return Ok(0.0);
    }
    match kernel {
        Kernel::Indicator => prof.moment(lo, hi, 0.0),
        Kernel::Linear => Ok(b * prof.moment(lo, hi, 1.0)?),
        Kernel::Square => Ok(b * b * prof.moment(lo, hi, 2.0)?),
        Kernel::AbsPower(q) => Ok(b.abs().powf(*q) * prof.moment(lo, hi, *q)?),
        Kernel::PositiveSide => {
            if b > 0.0 {
                prof.moment(lo, hi, 0.0)
            } else {
                Ok(0.0)
            }
        }
        Kernel::OneMinusCos => {
            if b == 0.0 {
                return Ok(0.0);
            }
            if let Some((coeff, exponent)) = prof.as_power() {
                let alpha = -1.0 - exponent;
                if alpha > 0.0 && alpha < 2.0 {
                    if lo == 0.0 && hi.is_infinite() {
                        return Ok(coeff * b.abs().powf(alpha) * one_minus_cos_integral(alpha));
                    }
                    if (alpha - 1.0).abs() < 1e-12 {
                        // ∫ (1-cos(br)) r^{-2} dr has a sine-integral primitive.
                        let a = b.abs();
                        let at_lo = if lo == 0.0 { 0.0 } else { one_minus_cos(a * lo) / lo };
                        let at_hi = if hi.is_infinite() { 0.0 } else { one_minus_cos(a * hi) / hi };
                        let si_hi = if hi.is_infinite() { PI / 2.0 } else { sine_integral(a * hi) };
                        return Ok(coeff * (at_lo - at_hi + a * (si_hi - sine_integral(a * lo))));
                    }
                    if hi.is_infinite() {
                        // Full integral minus the head [0, lo).
                        let full = coeff * b.abs().powf(alpha) * one_minus_cos_integral(alpha);
                        let head = profile_kernel(prof, 0.0, lo, b, kernel)?;
                        return Ok(full - head);
                    }
                }
            }
            osc_window(prof, lo, hi, b, kernel)
        }
        Kernel::Sin => {
            if b == 0.0 {
                return Ok(0.0);
            }
            if let Some((coeff, exponent)) = prof.as_power() {
                let alpha = -1.0 - exponent;
                if alpha > 0.0 && alpha < 1.0 {
                    if lo == 0.0 && hi.is_infinite() {
                        return Ok(coeff
                            * b.signum()
                            * b.abs().powf(alpha)
                            * sin_integral_power(alpha));
                    }
                    if hi.is_infinite() {
                        let full = coeff * b.signum() * b.abs().powf(alpha) * sin_integral_power(alpha);
                        let head = profile_kernel(prof, 0.0, lo, b, kernel)?;
                        return Ok(full - head);
                    }
                }
            }
            if hi.is_infinite() {
                return osc_tail(prof, lo, b, kernel);
            }
            osc_window(prof, lo, hi, b, kernel)
        }
        Kernel::SinMinusLinear => {
            if b == 0.0 {
                return Ok(0.0);
            }
            if hi.is_infinite() {
                return Err(LevyError::QuadratureFailure {
                    context: "sin-minus-linear kernel needs a finite window",
                    achieved: f64::INFINITY,
                    requested: 0.0,
                });
            }
            osc_window(prof, lo, hi, b, kernel)
        }
        Kernel::Custom { g, breaks, period } => {
            let scaled_breaks: Vec<f64> = breaks
                .iter()
                .map(|s| s / b.abs().max(1e-300))
                .filter(|r| *r > lo && *r < hi)
                .collect();
            if hi.is_infinite() {
                let f = |r: f64| g(b * r) * prof.value(r);
                let anchor = if lo > 0.0 { 2.0 * lo } else { 1.0 };
                quad::integrate_panels(&f, lo, hi, anchor, quad::REL_TOL, &scaled_breaks)
            } else {
                prof.weighted_by(lo, hi, b, g, &scaled_breaks, period.map(|p| p / b.abs()))
            }
        }
    }
}

/// Oscillatory kernel over a finite window.
fn osc_window(prof: &RadialProfile, lo: f64, hi: f64, b: f64, kernel: &Kernel) -> Result<f64> {
    let period = kernel.period().map(|p| p / b.abs());
    let f = |r: f64| kernel.eval(b * r) * prof.value(r);
    match period {
        Some(p) => quad::integrate_oscillatory(&f, lo, hi, p, quad::REL_TOL),
        None => quad::integrate_panels(&f, lo, hi, if lo > 0.0 { (lo * hi).sqrt() } else { hi * 0.25 }, quad::REL_TOL, &[]),
    }
}

/// Oscillatory kernel over (lo, ∞) for a decaying profile: truncate where the
/// second-mean-value bound 2·k(R)·R/(|b|R) makes the tail negligible.
fn osc_tail(prof: &RadialProfile, lo: f64, b: f64, kernel: &Kernel) -> Result<f64> {
    let period = kernel.period().map(|p| p / b.abs()).unwrap_or(1.0);
    let mut r_hi = (lo.max(period) * 4.0).max(4.0 * period);
    let mut prev = osc_window(prof, lo, r_hi, b, kernel)?;
    for _ in 0..40 {
        let next_hi = r_hi * 2.0;
        let piece = osc_window(prof, r_hi, next_hi, b, kernel)?;
        let acc = prev + piece;
        // Tail bound: |∫_R^∞ sin(br) k(r) dr| ≤ 2 k(R) / |b| for k decreasing.
        let tail_bound = 2.0 * prof.value(next_hi).abs() / b.abs();
        if piece.abs() <= 1e-10 * acc.abs().max(1e-12) && tail_bound <= 1e-10 * acc.abs().max(1e-12)
        {
            return Ok(acc);
        }
        prev = acc;
        r_hi = next_hi;
    }
    Ok(prev)
}
