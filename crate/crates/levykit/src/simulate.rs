//! Monte Carlo cross-checks: increment sampling, exit times against
//! 1/h(r), cone probabilities and half-line mass.
//!
//! Stable zoo nodes get exact samplers (Chambers–Mallows–Stuck for
//! symmetric and skewed laws, Kanter for one-sided α < 1, Gaussian
//! subordination for isotropic laws in d ≥ 2). Everything else runs
//! through compound Poisson above a cutoff ε with the small jumps
//! replaced per policy. Streams are keyed by (seed, path index), so
//! parallel runs reproduce bit for bit.

use std::f64::consts::PI;

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::concentration::ConcentrationFn;
use crate::error::{LevyError, Result};
use crate::measure::{GeneratingTriplet, Node, RadialProfile};
use crate::numeric::special::{stable_density_constant, EULER_GAMMA};

/// Small-jump handling below the cutoff ε.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SmallJumpPolicy {
    /// Replace by a centered Gaussian with the matched covariance.
    GaussianSubstitute,
    /// Drop the jumps, keep only the compensator drift (biased; documented).
    DriftOnly,
}

#[derive(Debug, Clone)]
pub struct SamplerConfig {
    pub epsilon: f64,
    pub policy: SmallJumpPolicy,
    pub seed: u64,
    pub paths: usize,
}

impl Default for SamplerConfig {
    fn default() -> Self {
        SamplerConfig {
            epsilon: 0.05,
            policy: SmallJumpPolicy::GaussianSubstitute,
            seed: 1,
            paths: 100_000,
        }
    }
}

/// Minimum σ(ε)/ε for the Gaussian substitution to be accurate.
const SUBSTITUTE_THRESHOLD: f64 = 4.0;

enum Part {
    /// Increment √(2t)·S·ξ with S·Sᵀ = A.
    Gaussian { factor: Vec<f64>, dim: usize },
    /// Constant drift m per unit time along `dir`.
    Drift { dir: Vec<f64> },
    /// scale·t^{1/α}·S_sym(α) along `dir`; scale premultiplied.
    SymmetricStable { dir: Vec<f64>, alpha: f64, coeff: f64 },
    /// Isotropic α-stable in d ≥ 2 by Gaussian subordination.
    IsotropicStable { dim: usize, alpha: f64, coeff: f64 },
    /// One-sided α-stable (per Lévy–Khintchine compensation) along `dir`.
    OneSidedStable { dir: Vec<f64>, alpha: f64, coeff: f64 },
    /// Compound Poisson above ε plus small-jump substitute.
    Generic {
        intensity: f64,
        jump: JumpSampler,
        /// Cholesky-like factor of Σ(ε) = ∫_{|z|<ε} z zᵀ N(dz).
        small_factor: Vec<f64>,
        /// Drift per unit time: −∫_{ε≤|z|<1} z N(dz).
        compensator: Vec<f64>,
        dim: usize,
    },
}

/// Samples a single jump from N restricted to {|z| ≥ ε} (normalized).
enum JumpSampler {
    /// Weighted alternatives.
    Mixture(Vec<(f64, JumpSampler)>),
    /// Pareto radius r ≥ lo with index α along a fixed direction.
    ParetoRay { dir: Vec<f64>, alpha: f64, lo: f64, hi: f64 },
    /// Pareto radius with a uniform sphere direction.
    ParetoSphere { dim: usize, alpha: f64, lo: f64, hi: f64 },
    /// Tabulated inverse CDF of the radius along a fixed direction.
    TableRay { dir: Vec<f64>, knots: Vec<(f64, f64)> },
    /// Fixed atoms.
    Atom(Vec<f64>),
}

impl JumpSampler {
    fn sample(&self, rng: &mut ChaCha8Rng, out: &mut [f64]) {
        match self {
            JumpSampler::Mixture(parts) => {
                let total: f64 = parts.iter().map(|p| p.0).sum();
                let mut u = rng.gen_range(0.0..total);
                for (w, s) in parts {
                    if u < *w {
                        s.sample(rng, out);
                        return;
                    }
                    u -= w;
                }
                parts.last().unwrap().1.sample(rng, out);
            }
            JumpSampler::ParetoRay { dir, alpha, lo, hi } => {
                let r = pareto_radius(rng, *alpha, *lo, *hi);
                for (o, d) in out.iter_mut().zip(dir) {
                    *o = r * d;
                }
            }
            JumpSampler::ParetoSphere { dim, alpha, lo, hi } => {
                let r = pareto_radius(rng, *alpha, *lo, *hi);
                let dir = uniform_sphere(rng, *dim);
                for (o, d) in out.iter_mut().zip(&dir) {
                    *o = r * d;
                }
            }
            JumpSampler::TableRay { dir, knots } => {
                let u: f64 = rng.gen();
                let r = inverse_cdf(knots, u);
                for (o, d) in out.iter_mut().zip(dir) {
                    *o = r * d;
                }
            }
            JumpSampler::Atom(z) => out.copy_from_slice(z),
        }
    }
}

fn pareto_radius(rng: &mut ChaCha8Rng, alpha: f64, lo: f64, hi: f64) -> f64 {
    // CDF over [lo, hi): F(r) = (lo^-α − r^-α)/(lo^-α − hi^-α).
    let u: f64 = rng.gen();
    let a = lo.powf(-alpha);
    let b = if hi.is_finite() { hi.powf(-alpha) } else { 0.0 };
    (a - u * (a - b)).powf(-1.0 / alpha)
}

fn uniform_sphere(rng: &mut ChaCha8Rng, dim: usize) -> Vec<f64> {
    loop {
        let v: Vec<f64> = (0..dim).map(|_| standard_normal(rng)).collect();
        let n = v.iter().map(|x| x * x).sum::<f64>().sqrt();
        if n > 1e-12 {
            return v.iter().map(|x| x / n).collect();
        }
    }
}

fn inverse_cdf(knots: &[(f64, f64)], u: f64) -> f64 {
    // knots: (cdf, r) increasing in cdf.
    let idx = knots.partition_point(|(c, _)| *c < u);
    if idx == 0 {
        return knots[0].1;
    }
    if idx >= knots.len() {
        return knots[knots.len() - 1].1;
    }
    let (c0, r0) = knots[idx - 1];
    let (c1, r1) = knots[idx];
    if c1 > c0 {
        r0 + (r1 - r0) * (u - c0) / (c1 - c0)
    } else {
        r0
    }
}

fn standard_normal(rng: &mut ChaCha8Rng) -> f64 {
    // Box–Muller; the second variate is discarded for simplicity.
    let u1: f64 = rng.gen_range(1e-300..1.0);
    let u2: f64 = rng.gen();
    (-2.0 * u1.ln()).sqrt() * (2.0 * PI * u2).cos()
}

/// Standard symmetric α-stable variate: E e^{ixS} = e^{-|x|^α}.
fn sample_symmetric_stable(rng: &mut ChaCha8Rng, alpha: f64) -> f64 {
    if (alpha - 1.0).abs() < 1e-12 {
        let u: f64 = rng.gen_range(-PI / 2.0 + 1e-12..PI / 2.0 - 1e-12);
        return u.tan();
    }
    if (alpha - 2.0).abs() < 1e-12 {
        return 2f64.sqrt() * standard_normal(rng);
    }
    let u: f64 = rng.gen_range(-PI / 2.0 + 1e-12..PI / 2.0 - 1e-12);
    let e: f64 = -(rng.gen_range(1e-300f64..1.0)).ln();
    let num = (alpha * u).sin();
    let den = u.cos().powf(1.0 / alpha);
    let tail = ((1.0 - alpha) * u).cos() / e;
    num / den * tail.powf((1.0 - alpha) / alpha)
}

/// One-sided α-stable variate, α ∈ (0,1), with E e^{-uS} = e^{-u^α}:
/// S = cos(πα/2)^{1/α} · X where X is the totally skewed CMS variate.
fn sample_positive_stable(rng: &mut ChaCha8Rng, alpha: f64) -> f64 {
    (PI * alpha / 2.0).cos().powf(1.0 / alpha) * sample_skewed_stable(rng, alpha)
}

/// Totally skewed (β = 1) standard stable for α ∈ (1,2):
/// E e^{ixS} = exp(-|x|^α (1 - i·sign(x) tan(πα/2))).
fn sample_skewed_stable(rng: &mut ChaCha8Rng, alpha: f64) -> f64 {
    // θ₀ = arctan(β tan(πα/2))/α with β = 1.
    let theta0 = ((PI * alpha / 2.0).tan()).atan() / alpha;
    let u: f64 = rng.gen_range(-PI / 2.0 + 1e-12..PI / 2.0 - 1e-12);
    let e: f64 = -(rng.gen_range(1e-300f64..1.0)).ln();
    let c = (alpha * theta0).cos().powf(-1.0 / alpha);
    let num = (alpha * (theta0 + u)).sin();
    let den = u.cos().powf(1.0 / alpha);
    let tail = ((alpha * theta0 + (alpha - 1.0) * u).cos() / e).powf((1.0 - alpha) / alpha);
    c * num / den * tail
}

/// Time-t value of the one-sided 1-stable law with measure
/// coeff·u^{-2} du on u > 0 under the Lévy–Khintchine compensation:
/// Y_t = σ·X + t·coeff·(κ + ln σ) with σ = t·coeff·π/2, κ = 1 − γ and
/// X the CMS α = 1, β = 1 variate (char exp −|x|(1 + i(2/π)sgn(x)ln|x|)).
fn sample_one_sided_unit_cauchy(rng: &mut ChaCha8Rng, t: f64, coeff: f64) -> f64 {
    let u: f64 = rng.gen_range(-PI / 2.0 + 1e-12..PI / 2.0 - 1e-12);
    let e: f64 = -(rng.gen_range(1e-300f64..1.0)).ln();
    let x = (2.0 / PI)
        * ((PI / 2.0 + u) * u.tan() - ((PI / 2.0 * e * u.cos()) / (PI / 2.0 + u)).ln());
    let sigma = t * coeff * PI / 2.0;
    let kappa = 1.0 - EULER_GAMMA;
    sigma * x + t * coeff * (kappa + sigma.ln())
}

/// Compiles per-node samplers; unrecognized structure goes to the generic
/// compound-Poisson bucket.
pub struct IncrementSampler {
    parts: Vec<Part>,
    dim: usize,
    pub config: SamplerConfig,
}

fn walk(
    node: &Node,
    scale: f64,
    dim: usize,
    exact: &mut Vec<Part>,
    generic: &mut Vec<(Node, f64)>,
) {
    match node {
        Node::Zero { .. } => {}
        Node::Radial { dim: d, density } => {
            if let Some((c, e)) = density.as_power() {
                let alpha = -e - *d as f64;
                if alpha > 0.0 && alpha < 2.0 {
                    let coeff = scale * c / stable_density_constant(*d, alpha);
                    if *d == 1 {
                        exact.push(Part::SymmetricStable {
                            dir: vec![1.0],
                            alpha,
                            coeff,
                        });
                    } else {
                        exact.push(Part::IsotropicStable { dim: *d, alpha, coeff });
                    }
                    return;
                }
            }
            generic.push((node.clone(), scale));
        }
        Node::Spherical { atoms, radial, .. } => {
            if let Some((c, e)) = radial.as_power() {
                let alpha = -e - 1.0;
                if alpha > 0.0 && alpha < 2.0 {
                    for a in atoms {
                        exact.push(Part::OneSidedStable {
                            dir: a.direction.clone(),
                            alpha,
                            coeff: scale * a.weight * c,
                        });
                    }
                    return;
                }
            }
            generic.push((node.clone(), scale));
        }
        Node::OneSided { side, radial } => {
            if let Some((c, e)) = radial.as_power() {
                let alpha = -e - 1.0;
                if alpha > 0.0 && alpha < 2.0 {
                    exact.push(Part::OneSidedStable {
                        dir: vec![side.factor()],
                        alpha,
                        coeff: scale * c,
                    });
                    return;
                }
            }
            generic.push((node.clone(), scale));
        }
        Node::Embed { axis, inner, .. } => {
            let mut inner_exact = Vec::new();
            let mut inner_generic = Vec::new();
            walk(inner, scale, 1, &mut inner_exact, &mut inner_generic);
            for p in inner_exact {
                exact.push(lift_part(p, *axis, dim));
            }
            for (n, s) in inner_generic {
                generic.push((
                    Node::Embed { dim, axis: *axis, inner: Box::new(n) },
                    s,
                ));
            }
        }
        Node::Scale { factor, inner } => walk(inner, scale * factor, dim, exact, generic),
        Node::Sum { terms, .. } => {
            for t in terms {
                walk(t, scale, dim, exact, generic);
            }
        }
        // Restrictions, differences and atoms go through the generic sampler.
        other => generic.push((other.clone(), scale)),
    }
}

fn lift_part(p: Part, axis: usize, dim: usize) -> Part {
    let lift = |dir: Vec<f64>| -> Vec<f64> {
        let mut out = vec![0.0; dim];
        out[axis] = dir[0];
        out
    };
    match p {
        Part::SymmetricStable { dir, alpha, coeff } => Part::SymmetricStable {
            dir: lift(dir),
            alpha,
            coeff,
        },
        Part::OneSidedStable { dir, alpha, coeff } => Part::OneSidedStable {
            dir: lift(dir),
            alpha,
            coeff,
        },
        other => other,
    }
}

impl IncrementSampler {
    pub fn new(t: &GeneratingTriplet, config: SamplerConfig) -> Result<Self> {
        let dim = t.dim();
        let mut parts = Vec::new();
        if !t.gaussian().is_zero() {
            let m = t.gaussian().sqrt_factor();
            parts.push(Part::Gaussian {
                factor: m.iter().copied().collect(),
                dim,
            });
        }
        if t.drift().iter().any(|b| *b != 0.0) {
            parts.push(Part::Drift { dir: t.drift().to_vec() });
        }
        let mut exact = Vec::new();
        let mut generic_nodes = Vec::new();
        walk(t.levy().node(), 1.0, dim, &mut exact, &mut generic_nodes);
        parts.extend(exact);

        if !generic_nodes.is_empty() {
            let eps = config.epsilon;
            let mut intensity = 0.0;
            let mut mixture = Vec::new();
            let mut sigma2 = vec![0.0; dim * dim];
            let mut compensator = vec![0.0; dim];
            for (node, scale) in &generic_nodes {
                let tail = node.partial_moment(eps, f64::INFINITY, 0.0)? * scale;
                if tail > 0.0 {
                    mixture.push((tail, jump_sampler_for(node, eps)?));
                    intensity += tail;
                }
                let sm = node.second_moment_matrix(0.0, eps)?;
                for (acc, v) in sigma2.iter_mut().zip(sm) {
                    *acc += scale * v;
                }
                if eps < 1.0 {
                    let mv = node.moment_vector(eps, 1.0)?;
                    for (acc, v) in compensator.iter_mut().zip(mv) {
                        *acc -= scale * v;
                    }
                }
            }
            let trace: f64 = (0..dim).map(|i| sigma2[i * dim + i]).sum();
            let sigma = trace.sqrt();
            if config.policy == SmallJumpPolicy::GaussianSubstitute
                && sigma / eps < SUBSTITUTE_THRESHOLD
            {
                return Err(LevyError::CutoffTooCoarse {
                    ratio: sigma / eps,
                    threshold: SUBSTITUTE_THRESHOLD,
                });
            }
            let small_factor = match config.policy {
                SmallJumpPolicy::GaussianSubstitute => {
                    let m = crate::measure::SymmetricMatrix::new(dim, &sigma2)?;
                    m.sqrt_factor().iter().copied().collect()
                }
                SmallJumpPolicy::DriftOnly => vec![0.0; dim * dim],
            };
            parts.push(Part::Generic {
                intensity,
                jump: JumpSampler::Mixture(mixture),
                small_factor,
                compensator,
                dim,
            });
        }
        Ok(IncrementSampler { parts, dim, config })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    /// RNG for one path, keyed by (seed, path index).
    pub fn rng_for_path(&self, path: u64) -> ChaCha8Rng {
        let mut rng = ChaCha8Rng::seed_from_u64(self.config.seed);
        rng.set_stream(path);
        rng
    }

    /// Draws one increment of length `time` into `out` (accumulates).
    pub fn add_increment(&self, time: f64, rng: &mut ChaCha8Rng, out: &mut [f64]) {
        for part in &self.parts {
            match part {
                Part::Gaussian { factor, dim } => {
                    let scale = (2.0 * time).sqrt();
                    let z: Vec<f64> = (0..*dim).map(|_| standard_normal(rng)).collect();
                    for i in 0..*dim {
                        let mut acc = 0.0;
                        for (j, zj) in z.iter().enumerate() {
                            acc += factor[i * dim + j] * zj;
                        }
                        out[i] += scale * acc;
                    }
                }
                Part::Drift { dir } => {
                    for (o, b) in out.iter_mut().zip(dir) {
                        *o += time * b;
                    }
                }
                Part::SymmetricStable { dir, alpha, coeff } => {
                    let s = (coeff * time).powf(1.0 / alpha) * sample_symmetric_stable(rng, *alpha);
                    for (o, d) in out.iter_mut().zip(dir) {
                        *o += s * d;
                    }
                }
                Part::IsotropicStable { dim, alpha, coeff } => {
                    // Subordination: X = √S·Z with S = 2·(coeff·t)^{2/α}·S⁺_{α/2}.
                    let s_pos = sample_positive_stable(rng, alpha / 2.0);
                    let s = 2.0 * (coeff * time).powf(2.0 / alpha) * s_pos;
                    let root = s.sqrt();
                    for o in out.iter_mut().take(*dim) {
                        *o += root * standard_normal(rng);
                    }
                }
                Part::OneSidedStable { dir, alpha, coeff } => {
                    let s = sample_one_sided_value(rng, time, *alpha, *coeff);
                    for (o, d) in out.iter_mut().zip(dir) {
                        *o += s * d;
                    }
                }
                Part::Generic {
                    intensity,
                    jump,
                    small_factor,
                    compensator,
                    dim,
                } => {
                    let n = sample_poisson(rng, intensity * time);
                    let mut z = vec![0.0; *dim];
                    for _ in 0..n {
                        jump.sample(rng, &mut z);
                        for (o, v) in out.iter_mut().zip(&z) {
                            *o += v;
                        }
                    }
                    for (o, c) in out.iter_mut().zip(compensator) {
                        *o += time * c;
                    }
                    let scale = time.sqrt();
                    let zs: Vec<f64> = (0..*dim).map(|_| standard_normal(rng)).collect();
                    for i in 0..*dim {
                        let mut acc = 0.0;
                        for (j, zj) in zs.iter().enumerate() {
                            acc += small_factor[i * dim + j] * zj;
                        }
                        out[i] += scale * acc;
                    }
                }
            }
        }
    }

    /// Samples `paths` independent increments of length `time`.
    pub fn sample_increments(&self, time: f64) -> Vec<Vec<f64>> {
        (0..self.config.paths as u64)
            .into_par_iter()
            .map(|p| {
                let mut rng = self.rng_for_path(p);
                let mut out = vec![0.0; self.dim];
                self.add_increment(time, &mut rng, &mut out);
                out
            })
            .collect()
    }

    /// Empirical characteristic function over the configured paths.
    pub fn empirical_cf(&self, time: f64, freqs: &[Vec<f64>]) -> Vec<Complex64> {
        let sums: Vec<Complex64> = (0..self.config.paths as u64)
            .into_par_iter()
            .map(|p| {
                let mut rng = self.rng_for_path(p);
                let mut y = vec![0.0; self.dim];
                self.add_increment(time, &mut rng, &mut y);
                freqs
                    .iter()
                    .map(|x| {
                        let s: f64 = x.iter().zip(&y).map(|(a, b)| a * b).sum();
                        Complex64::new(s.cos(), s.sin())
                    })
                    .collect::<Vec<Complex64>>()
            })
            .reduce(
                || vec![Complex64::new(0.0, 0.0); freqs.len()],
                |mut a, b| {
                    for (x, y) in a.iter_mut().zip(b) {
                        *x += y;
                    }
                    a
                },
            );
        sums.into_iter()
            .map(|s| s / self.config.paths as f64)
            .collect()
    }
}

/// One-sided stable increment matching the compensated exponent of the
/// node c·u^{-1-α} du on a half-line (the value returned is the signed
/// coordinate along the half-line's direction).
fn sample_one_sided_value(rng: &mut ChaCha8Rng, time: f64, alpha: f64, coeff: f64) -> f64 {
    if (alpha - 1.0).abs() < 1e-12 {
        return sample_one_sided_unit_cauchy(rng, time, coeff);
    }
    if alpha < 1.0 {
        // Raw subordinator (c Γ(1-α)/α · t)^{1/α} S⁺ minus compensation
        // drift t·c/(1-α).
        let g = statrs::function::gamma::gamma(1.0 - alpha);
        let raw = (coeff * g / alpha * time).powf(1.0 / alpha) * sample_positive_stable(rng, alpha);
        raw - time * coeff / (1.0 - alpha)
    } else {
        // (σ^α t)^{1/α}·S_{α,β=1} with σ^α = -c·Γ(-α)·cos(πα/2) > 0, plus
        // the drift t·c/(α-1) from re-compensating at the unit radius.
        let g = statrs::function::gamma::gamma(-alpha);
        let sigma_alpha = -coeff * g * (PI * alpha / 2.0).cos();
        (sigma_alpha * time).powf(1.0 / alpha) * sample_skewed_stable(rng, alpha)
            + time * coeff / (alpha - 1.0)
    }
}

fn jump_sampler_for(node: &Node, eps: f64) -> Result<JumpSampler> {
    match node {
        Node::Radial { dim, density } => {
            if let Some((_, e)) = density.as_power() {
                let alpha = -e - *dim as f64;
                if alpha > 0.0 {
                    return Ok(JumpSampler::ParetoSphere {
                        dim: *dim,
                        alpha,
                        lo: eps,
                        hi: f64::INFINITY,
                    });
                }
            }
            table_sampler(node, density, eps, f64::INFINITY, None)
        }
        Node::OneSided { side, radial } => {
            if let Some((_, e)) = radial.as_power() {
                let alpha = -e - 1.0;
                if alpha > 0.0 {
                    return Ok(JumpSampler::ParetoRay {
                        dir: vec![side.factor()],
                        alpha,
                        lo: eps,
                        hi: f64::INFINITY,
                    });
                }
            }
            table_sampler(node, radial, eps, f64::INFINITY, Some(vec![side.factor()]))
        }
        Node::Spherical { atoms, radial, .. } => {
            let mut mix = Vec::new();
            for a in atoms {
                let sub = if let Some((_, e)) = radial.as_power() {
                    let alpha = -e - 1.0;
                    JumpSampler::ParetoRay {
                        dir: a.direction.clone(),
                        alpha,
                        lo: eps,
                        hi: f64::INFINITY,
                    }
                } else {
                    table_sampler(node, radial, eps, f64::INFINITY, Some(a.direction.clone()))?
                };
                mix.push((a.weight, sub));
            }
            Ok(JumpSampler::Mixture(mix))
        }
        Node::Atoms { points, .. } => {
            let mix = points
                .iter()
                .filter(|(z, _)| z.iter().map(|x| x * x).sum::<f64>().sqrt() >= eps)
                .map(|(z, w)| (*w, JumpSampler::Atom(z.clone())))
                .collect::<Vec<_>>();
            Ok(JumpSampler::Mixture(mix))
        }
        Node::Embed { axis, dim, inner } => {
            let inner_sampler = jump_sampler_for(inner, eps)?;
            Ok(lift_jump(inner_sampler, *axis, *dim))
        }
        Node::Scale { inner, .. } => jump_sampler_for(inner, eps),
        Node::Sum { terms, .. } => {
            let mut mix = Vec::new();
            for t in terms {
                let w = t.partial_moment(eps, f64::INFINITY, 0.0)?;
                if w > 0.0 {
                    mix.push((w, jump_sampler_for(t, eps)?));
                }
            }
            Ok(JumpSampler::Mixture(mix))
        }
        Node::Restrict { lo, hi, inner } => {
            // Restrict the radius window of the inner sampler.
            restricted_sampler(inner, eps.max(*lo), *hi)
        }
        Node::Difference { .. } => Err(LevyError::BadParameter(
            "difference measures are not samplable directly; sample the parts".into(),
        )),
        Node::Zero { .. } => Ok(JumpSampler::Mixture(vec![])),
    }
}

fn restricted_sampler(node: &Node, lo: f64, hi: f64) -> Result<JumpSampler> {
    match node {
        Node::Radial { dim, density } => {
            if let Some((_, e)) = density.as_power() {
                let alpha = -e - *dim as f64;
                if alpha > 0.0 {
                    return Ok(JumpSampler::ParetoSphere { dim: *dim, alpha, lo, hi });
                }
            }
            table_sampler(node, density, lo, hi, None)
        }
        Node::OneSided { side, radial } => {
            if let Some((_, e)) = radial.as_power() {
                let alpha = -e - 1.0;
                if alpha > 0.0 {
                    return Ok(JumpSampler::ParetoRay {
                        dir: vec![side.factor()],
                        alpha,
                        lo,
                        hi,
                    });
                }
            }
            table_sampler(node, radial, lo, hi, Some(vec![side.factor()]))
        }
        Node::Spherical { atoms, radial, .. } => {
            let mut mix = Vec::new();
            for a in atoms {
                let sub = if let Some((_, e)) = radial.as_power() {
                    JumpSampler::ParetoRay {
                        dir: a.direction.clone(),
                        alpha: -e - 1.0,
                        lo,
                        hi,
                    }
                } else {
                    table_sampler(node, radial, lo, hi, Some(a.direction.clone()))?
                };
                mix.push((a.weight, sub));
            }
            Ok(JumpSampler::Mixture(mix))
        }
        Node::Scale { inner, .. } => restricted_sampler(inner, lo, hi),
        Node::Sum { terms, .. } => {
            let mut mix = Vec::new();
            for t in terms {
                let w = t.partial_moment(lo, hi, 0.0)?;
                if w > 0.0 {
                    mix.push((w, restricted_sampler(t, lo, hi)?));
                }
            }
            Ok(JumpSampler::Mixture(mix))
        }
        Node::Restrict { lo: l2, hi: h2, inner } => restricted_sampler(inner, lo.max(*l2), hi.min(*h2)),
        other => jump_sampler_for(other, lo),
    }
}

/// Tabulated inverse radial CDF for functional profiles.
fn table_sampler(
    _node: &Node,
    profile: &RadialProfile,
    lo: f64,
    hi: f64,
    dir: Option<Vec<f64>>,
) -> Result<JumpSampler> {
    let hi_eff = if hi.is_finite() {
        hi
    } else {
        // Extend until the tail is negligible.
        let mut h = lo * 2.0;
        let total = profile.moment(lo, f64::INFINITY, 0.0)?;
        for _ in 0..200 {
            if profile.moment(h, f64::INFINITY, 0.0)? < 1e-9 * total {
                break;
            }
            h *= 2.0;
        }
        h
    };
    let n = 512;
    let total = profile.moment(lo, hi_eff, 0.0)?;
    let mut knots = Vec::with_capacity(n + 1);
    for k in 0..=n {
        let r = lo * (hi_eff / lo).powf(k as f64 / n as f64);
        let c = profile.moment(lo, r, 0.0)? / total;
        knots.push((c, r));
    }
    let dir = dir.unwrap_or_else(|| vec![1.0]);
    Ok(JumpSampler::TableRay { dir, knots })
}

fn lift_jump(s: JumpSampler, axis: usize, dim: usize) -> JumpSampler {
    let lift = |dir: Vec<f64>| -> Vec<f64> {
        let mut out = vec![0.0; dim];
        out[axis] = dir[0];
        out
    };
    match s {
        JumpSampler::ParetoRay { dir, alpha, lo, hi } => JumpSampler::ParetoRay {
            dir: lift(dir),
            alpha,
            lo,
            hi,
        },
        JumpSampler::TableRay { dir, knots } => JumpSampler::TableRay { dir: lift(dir), knots },
        JumpSampler::Atom(z) => {
            let mut out = vec![0.0; dim];
            out[axis] = z[0];
            JumpSampler::Atom(out)
        }
        JumpSampler::Mixture(parts) => JumpSampler::Mixture(
            parts
                .into_iter()
                .map(|(w, p)| (w, lift_jump(p, axis, dim)))
                .collect(),
        ),
        JumpSampler::ParetoSphere { alpha, lo, hi, .. } => {
            // A 1-d sphere is ±1; encode as a two-atom mixture of rays.
            JumpSampler::Mixture(vec![
                (
                    0.5,
                    JumpSampler::ParetoRay { dir: lift(vec![1.0]), alpha, lo, hi },
                ),
                (
                    0.5,
                    JumpSampler::ParetoRay { dir: lift(vec![-1.0]), alpha, lo, hi },
                ),
            ])
        }
    }
}

fn sample_poisson(rng: &mut ChaCha8Rng, mean: f64) -> usize {
    if mean <= 0.0 {
        return 0;
    }
    if mean < 30.0 {
        // Knuth inversion.
        let l = (-mean).exp();
        let mut k = 0usize;
        let mut p = 1.0;
        loop {
            p *= rng.gen::<f64>();
            if p <= l {
                return k;
            }
            k += 1;
            if k > 10_000 {
                return k;
            }
        }
    }
    // Normal approximation with continuity correction for large means.
    let v = mean + mean.sqrt() * standard_normal(rng) + 0.5;
    v.max(0.0) as usize
}

/// Monte Carlo estimate with a 95% confidence interval.
#[derive(Debug, Clone, serde::Serialize)]
pub struct Estimate {
    pub value: f64,
    pub ci_half_width: f64,
    pub paths: usize,
}

/// Mean exit time of {|Y_s - s·b_r| > r}, reported as E[S(r)]·h(r).
pub struct ExitTimeEstimate {
    pub mean_exit: Estimate,
    pub product_with_h: Estimate,
    pub step: f64,
}

/// Estimates E[S(r)] by Euler stepping (with a Brownian-bridge crossing
/// test when a Gaussian part drives d = 1).
pub fn exit_time(t: &GeneratingTriplet, r: f64, cfg: &SamplerConfig) -> Result<ExitTimeEstimate> {
    assert!(r > 0.0);
    let sampler = IncrementSampler::new(t, cfg.clone())?;
    let c = ConcentrationFn::new(t)?;
    let h_r = c.h(r)?;
    let has_gaussian = !t.gaussian().is_zero();
    let dt = if has_gaussian { 0.004 / h_r } else { 0.01 / h_r };
    let b_r = t.effective_drift(r)?;
    let d = t.dim();
    let sigma = if has_gaussian && d == 1 {
        (2.0 * t.gaussian().norm()).sqrt()
    } else {
        0.0
    };
    let horizon_steps = (200.0 / (h_r * dt)).ceil() as usize;

    let exits: Vec<f64> = (0..cfg.paths as u64)
        .into_par_iter()
        .map(|p| {
            let mut rng = sampler.rng_for_path(p);
            let mut y = vec![0.0; d];
            let mut s = 0.0f64;
            for _ in 0..horizon_steps {
                let prev = y.clone();
                sampler.add_increment(dt, &mut rng, &mut y);
                s += dt;
                // Centered position relative to s·b_r.
                let dist2: f64 = y
                    .iter()
                    .zip(&b_r)
                    .map(|(v, b)| (v - s * b) * (v - s * b))
                    .sum();
                if dist2 > r * r {
                    return s;
                }
                if sigma > 0.0 {
                    // Brownian-bridge crossing test for both barriers
                    // (positions relative to the drifting center).
                    let x0 = prev[0] - (s - dt) * b_r[0];
                    let x1 = y[0] - s * b_r[0];
                    for barrier in [r, -r] {
                        let a0 = barrier - x0;
                        let a1 = barrier - x1;
                        if a0 * a1 > 0.0 {
                            let p_cross = (-2.0 * a0 * a1 / (sigma * sigma * dt)).exp();
                            if rng.gen::<f64>() < p_cross {
                                return s - dt * 0.5;
                            }
                        }
                    }
                }
            }
            200.0 / h_r
        })
        .collect();

    let n = exits.len() as f64;
    let mean: f64 = exits.iter().sum::<f64>() / n;
    let var: f64 = exits.iter().map(|x| (x - mean) * (x - mean)).sum::<f64>() / (n - 1.0);
    let ci = 1.96 * (var / n).sqrt();
    Ok(ExitTimeEstimate {
        mean_exit: Estimate { value: mean, ci_half_width: ci, paths: cfg.paths },
        product_with_h: Estimate {
            value: mean * h_r,
            ci_half_width: ci * h_r,
            paths: cfg.paths,
        },
        step: dt,
    })
}

/// P(X_t ∈ O·C_λ) where C_λ = {x : x_d > λ|x̃|}; `rotation` is a row-major
/// orthogonal matrix (identity when None).
pub fn cone_probability(
    t: &GeneratingTriplet,
    time: f64,
    lambda: f64,
    rotation: Option<&[f64]>,
    cfg: &SamplerConfig,
) -> Result<Estimate> {
    let sampler = IncrementSampler::new(t, cfg.clone())?;
    let d = t.dim();
    let hits: usize = (0..cfg.paths as u64)
        .into_par_iter()
        .map(|p| {
            let mut rng = sampler.rng_for_path(p);
            let mut y = vec![0.0; d];
            sampler.add_increment(time, &mut rng, &mut y);
            // Un-rotate: X ∈ O·C ⟺ Oᵀ X ∈ C.
            let v = match rotation {
                Some(o) => {
                    let mut out = vec![0.0; d];
                    for i in 0..d {
                        for j in 0..d {
                            out[i] += o[j * d + i] * y[j];
                        }
                    }
                    out
                }
                None => y,
            };
            let tilde: f64 = v[..d - 1].iter().map(|x| x * x).sum::<f64>().sqrt();
            usize::from(v[d - 1] > lambda * tilde)
        })
        .sum();
    let p = hits as f64 / cfg.paths as f64;
    Ok(Estimate {
        value: p,
        ci_half_width: 1.96 * (p * (1.0 - p) / cfg.paths as f64).sqrt(),
        paths: cfg.paths,
    })
}

/// P(Y_t < 0) in d = 1.
pub fn half_line_probability(
    t: &GeneratingTriplet,
    time: f64,
    cfg: &SamplerConfig,
) -> Result<Estimate> {
    assert_eq!(t.dim(), 1, "half-line probabilities are one-dimensional");
    let sampler = IncrementSampler::new(t, cfg.clone())?;
    let hits: usize = (0..cfg.paths as u64)
        .into_par_iter()
        .map(|p| {
            let mut rng = sampler.rng_for_path(p);
            let mut y = [0.0];
            sampler.add_increment(time, &mut rng, &mut y);
            usize::from(y[0] < 0.0)
        })
        .sum();
    let p = hits as f64 / cfg.paths as f64;
    Ok(Estimate {
        value: p,
        ci_half_width: 1.96 * (p * (1.0 - p) / cfg.paths as f64).sqrt(),
        paths: cfg.paths,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::exponent::CharExponent;
    use crate::measure::zoo;
    use crate::measure::SymmetricMatrix;

    fn cfg(paths: usize, seed: u64) -> SamplerConfig {
        SamplerConfig { epsilon: 0.05, policy: SmallJumpPolicy::GaussianSubstitute, seed, paths }
    }

    fn check_ecf(member: &zoo::ZooMember, time: f64, paths: usize) {
        let sampler = IncrementSampler::new(&member.triplet, cfg(paths, 7)).unwrap();
        let e = CharExponent::new(&member.triplet);
        let d = member.triplet.dim();
        let freqs: Vec<Vec<f64>> = (1..=8)
            .map(|k| {
                (0..d)
                    .map(|a| 0.5 * k as f64 * if a % 2 == 0 { 1.0 } else { -0.7 })
                    .collect()
            })
            .collect();
        let ecf = sampler.empirical_cf(time, &freqs);
        let tol = 4.0 / (paths as f64).sqrt();
        for (x, emp) in freqs.iter().zip(ecf) {
            let want = (-(time) * e.psi(x).unwrap()).exp();
            let err = (emp - want).norm();
            assert!(
                err < tol,
                "{} at {x:?}: emp {emp} vs {want} (err {err}, tol {tol})",
                member.name
            );
        }
    }

    #[test]
    fn sampler_law_gaussian() {
        check_ecf(&zoo::gaussian(SymmetricMatrix::scaled_identity(1, 0.5)), 1.0, 40_000);
    }

    #[test]
    fn sampler_law_cauchy() {
        check_ecf(&zoo::isotropic_stable(1, 1.0).unwrap(), 1.0, 40_000);
    }

    #[test]
    fn sampler_law_isotropic_d2() {
        check_ecf(&zoo::isotropic_stable(2, 1.5).unwrap(), 0.5, 40_000);
    }

    #[test]
    fn sampler_law_one_sided() {
        check_ecf(&zoo::one_sided_1_stable(), 0.5, 40_000);
    }

    #[test]
    fn sampler_law_subordinator() {
        check_ecf(&zoo::stable_subordinator(0.5).unwrap(), 1.0, 40_000);
    }

    #[test]
    fn sampler_law_mixed_atoms() {
        check_ecf(&zoo::mixed_stable_with_atoms(1.5).unwrap(), 0.25, 40_000);
    }

    #[test]
    fn sampler_law_product() {
        check_ecf(&zoo::product_stable([0.5, 1.0, 1.5]).unwrap(), 0.5, 40_000);
    }

    #[test]
    fn reproducible_streams() {
        let m = zoo::isotropic_stable(1, 1.2).unwrap();
        let s1 = IncrementSampler::new(&m.triplet, cfg(64, 42)).unwrap();
        let s2 = IncrementSampler::new(&m.triplet, cfg(64, 42)).unwrap();
        assert_eq!(s1.sample_increments(0.7), s2.sample_increments(0.7));
    }

    #[test]
    fn gaussian_exit_time() {
        // Standard BM exits (-1,1) at mean time 1; h(1) = 1/2.
        let m = zoo::gaussian(SymmetricMatrix::scaled_identity(1, 0.5));
        let est = exit_time(&m.triplet, 1.0, &cfg(30_000, 3)).unwrap();
        let product = est.product_with_h.value;
        let ci = est.product_with_h.ci_half_width;
        assert!(
            (product - 0.5).abs() < ci + 0.01,
            "product {product} ± {ci}"
        );
    }

    #[test]
    fn cauchy_cone_quarter_plane() {
        let m = zoo::isotropic_stable(2, 1.0).unwrap();
        let est = cone_probability(&m.triplet, 0.5, 1.0, None, &cfg(100_000, 11)).unwrap();
        assert!(
            (est.value - 0.25).abs() < est.ci_half_width + 0.005,
            "{} ± {}",
            est.value,
            est.ci_half_width
        );
        // Any rotation gives the same probability.
        let th = 0.83f64;
        let rot = [th.cos(), -th.sin(), th.sin(), th.cos()];
        let est2 = cone_probability(&m.triplet, 0.5, 1.0, Some(&rot), &cfg(100_000, 12)).unwrap();
        assert!((est2.value - 0.25).abs() < est2.ci_half_width + 0.005);
    }

    #[test]
    fn half_line_symmetric_is_half() {
        let m = zoo::isotropic_stable(1, 1.0).unwrap();
        let est = half_line_probability(&m.triplet, 0.25, &cfg(100_000, 5)).unwrap();
        assert!((est.value - 0.5).abs() < est.ci_half_width + 0.003);
    }

    #[test]
    fn half_line_one_sided_decreases() {
        let m = zoo::one_sided_1_stable();
        let mut prev = 1.0;
        for t in [0.25, 0.0625, 0.015625] {
            let est = half_line_probability(&m.triplet, t, &cfg(100_000, 9)).unwrap();
            assert!(est.value < prev, "t={t}: {} vs prev {prev}", est.value);
            prev = est.value;
        }
    }

    #[test]
    fn cutoff_too_coarse_detected() {
        // A tempered profile with tiny small-jump variance under a huge ε.
        let n = crate::measure::LevyMeasure::radial(
            1,
            RadialProfile::func(|r: f64| (-r).exp() * r.powf(-1.1), -1.1),
        );
        let t = GeneratingTriplet::new(SymmetricMatrix::zero(1), n, vec![0.0]).unwrap();
        let mut c = cfg(10, 1);
        c.epsilon = 3.0;
        assert!(matches!(
            IncrementSampler::new(&t, c),
            Err(LevyError::CutoffTooCoarse { .. })
        ));
    }
}
