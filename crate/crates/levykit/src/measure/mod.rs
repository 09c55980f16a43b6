//! Generating triplets `(A, N, b)` and compositional Lévy measures.

mod node;
mod profile;
pub mod zoo;

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use crate::error::{LevyError, Result};

pub use node::{Kernel, Node, Side, SphereAtom};
pub use profile::RadialProfile;

/// Symmetric non-negative definite matrix (the Gaussian part).
#[derive(Debug, Clone)]
pub struct SymmetricMatrix {
    dim: usize,
    entries: DMatrix<f64>,
    eigenvalues: Vec<f64>,
    eigenvectors: DMatrix<f64>,
}

impl SymmetricMatrix {
    /// Builds from row-major entries, checking symmetry and definiteness.
    pub fn new(dim: usize, rows: &[f64]) -> Result<Self> {
        assert_eq!(rows.len(), dim * dim, "entry count must be dim²");
        let m = DMatrix::from_row_slice(dim, dim, rows);
        let scale = m.iter().fold(0.0f64, |a, x| a.max(x.abs())).max(1.0);
        for i in 0..dim {
            for j in (i + 1)..dim {
                let delta = (m[(i, j)] - m[(j, i)]).abs();
                if delta > 1e-12 * scale {
                    return Err(LevyError::NonSymmetricMatrix { i, j, delta });
                }
            }
        }
        let sym = (m.clone() + m.transpose()) * 0.5;
        let eig = sym.clone().symmetric_eigen();
        let norm = eig.eigenvalues.iter().fold(0.0f64, |a, x| a.max(x.abs()));
        for &ev in eig.eigenvalues.iter() {
            if ev < -1e-12 * norm.max(1.0) {
                return Err(LevyError::NegativeDefinite { eigenvalue: ev });
            }
        }
        Ok(SymmetricMatrix {
            dim,
            entries: sym,
            eigenvalues: eig.eigenvalues.iter().copied().collect(),
            eigenvectors: eig.eigenvectors,
        })
    }

    pub fn zero(dim: usize) -> Self {
        Self::new(dim, &vec![0.0; dim * dim]).unwrap()
    }

    /// c·I in dimension `dim`.
    pub fn scaled_identity(dim: usize, c: f64) -> Self {
        let mut rows = vec![0.0; dim * dim];
        for i in 0..dim {
            rows[i * dim + i] = c;
        }
        Self::new(dim, &rows).unwrap()
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    /// Operator norm ‖A‖ (largest eigenvalue).
    pub fn norm(&self) -> f64 {
        self.eigenvalues.iter().fold(0.0f64, |a, x| a.max(*x))
    }

    pub fn is_zero(&self) -> bool {
        self.norm() == 0.0
    }

    pub fn entry(&self, i: usize, j: usize) -> f64 {
        self.entries[(i, j)]
    }

    pub fn rows_row_major(&self) -> Vec<f64> {
        let mut out = Vec::with_capacity(self.dim * self.dim);
        for i in 0..self.dim {
            for j in 0..self.dim {
                out.push(self.entries[(i, j)]);
            }
        }
        out
    }

    /// ⟨x, Ax⟩.
    pub fn quadratic_form(&self, x: &[f64]) -> f64 {
        let mut acc = 0.0;
        for i in 0..self.dim {
            for j in 0..self.dim {
                acc += x[i] * self.entries[(i, j)] * x[j];
            }
        }
        acc
    }

    pub fn eigenvalues(&self) -> &[f64] {
        &self.eigenvalues
    }

    pub fn determinant(&self) -> f64 {
        self.eigenvalues.iter().product()
    }

    /// S with S·Sᵀ = A (symmetric square root).
    pub fn sqrt_factor(&self) -> DMatrix<f64> {
        let d = DMatrix::from_diagonal(&nalgebra::DVector::from_iterator(
            self.dim,
            self.eigenvalues.iter().map(|e| e.max(0.0).sqrt()),
        ));
        &self.eigenvectors * d * self.eigenvectors.transpose()
    }

    /// ⟨x, A⁻¹x⟩ on the range of A; `None` if A is singular.
    pub fn inverse_quadratic_form(&self, x: &[f64]) -> Option<f64> {
        if self.eigenvalues.iter().any(|e| *e <= 0.0) {
            return None;
        }
        let xv = nalgebra::DVector::from_column_slice(x);
        let y = self.eigenvectors.transpose() * xv;
        Some(
            y.iter()
                .zip(&self.eigenvalues)
                .map(|(c, e)| c * c / e)
                .sum(),
        )
    }
}

/// Compositional Lévy measure.
#[derive(Debug, Clone)]
pub struct LevyMeasure {
    node: Node,
}

impl LevyMeasure {
    pub fn from_node(node: Node) -> Self {
        LevyMeasure { node }
    }

    pub fn node(&self) -> &Node {
        &self.node
    }

    pub fn zero(dim: usize) -> Self {
        Self::from_node(Node::Zero { dim })
    }

    /// Isotropic density j(|z|) dz given as a radial profile.
    pub fn radial(dim: usize, density: RadialProfile) -> Self {
        Self::from_node(Node::Radial { dim, density })
    }

    /// Finite sphere measure (atoms) × radial density k(r) dr.
    pub fn spherical(dim: usize, atoms: Vec<SphereAtom>, radial: RadialProfile) -> Self {
        Self::from_node(Node::Spherical { dim, atoms, radial })
    }

    /// d = 1 density on a half-line.
    pub fn one_sided(side: Side, radial: RadialProfile) -> Self {
        Self::from_node(Node::OneSided { side, radial })
    }

    pub fn atoms(dim: usize, points: Vec<(Vec<f64>, f64)>) -> Self {
        Self::from_node(Node::Atoms { dim, points })
    }

    /// Per-axis one-dimensional measures (cylindrical measure).
    pub fn cylindrical(axes: Vec<LevyMeasure>) -> Self {
        let dim = axes.len();
        let terms = axes
            .into_iter()
            .enumerate()
            .map(|(axis, m)| {
                assert_eq!(m.dim(), 1, "cylindrical axes must be one-dimensional");
                Node::Embed { dim, axis, inner: Box::new(m.node) }
            })
            .collect();
        Self::from_node(Node::Sum { dim, terms })
    }

    pub fn sum(terms: Vec<LevyMeasure>) -> Self {
        assert!(!terms.is_empty());
        let dim = terms[0].dim();
        Self::from_node(node::sum_of(terms.into_iter().map(|m| m.node).collect(), dim))
    }

    pub fn scaled(self, factor: f64) -> Self {
        assert!(factor >= 0.0, "measure scale must be non-negative");
        Self::from_node(Node::Scale { factor, inner: Box::new(self.node) })
    }

    /// Restriction to the ball B_λ.
    pub fn restricted_to_ball(self, lambda: f64) -> Self {
        Self::from_node(Node::Restrict { lo: 0.0, hi: lambda, inner: Box::new(self.node) })
    }

    /// Restriction to the complement of B_λ.
    pub fn restricted_to_complement(self, lambda: f64) -> Self {
        Self::from_node(Node::Restrict { lo: lambda, hi: f64::INFINITY, inner: Box::new(self.node) })
    }

    /// minuend − subtrahend as a measure (checked lazily on queries).
    pub fn difference(minuend: LevyMeasure, subtrahend: LevyMeasure) -> Self {
        Self::from_node(Node::Difference {
            minuend: Box::new(minuend.node),
            subtrahend: Box::new(subtrahend.node),
        })
    }

    pub fn dim(&self) -> usize {
        self.node.dim()
    }

    pub fn is_symmetric(&self) -> bool {
        self.node.is_symmetric()
    }

    /// N({|z| ≥ r}).
    pub fn tail_mass(&self, r: f64) -> Result<f64> {
        assert!(r > 0.0);
        self.node.partial_moment(r, f64::INFINITY, 0.0)
    }

    /// ∫_{|z|<r} |z|² N(dz).
    pub fn truncated_second_moment(&self, r: f64) -> Result<f64> {
        assert!(r > 0.0);
        self.node.partial_moment(0.0, r, 2.0)
    }

    /// ∫_{r1 ≤ |z| < r2} |z| N(dz).
    pub fn annulus_first_moment(&self, r1: f64, r2: f64) -> Result<f64> {
        assert!(r1 > 0.0 && r1 < r2);
        self.node
            .partial_moment(r1, r2, 1.0)
            .map_err(|_| LevyError::NonIntegrableAnnulus)
    }

    /// ∫_{lo ≤ |z| < hi} |z|^q N(dz).
    pub fn partial_moment(&self, lo: f64, hi: f64, q: f64) -> Result<f64> {
        self.node.partial_moment(lo, hi, q)
    }

    /// Total mass N(ℝᵈ \ {0}); `∞` for infinite-activity measures.
    pub fn total_mass(&self) -> Result<f64> {
        self.node.partial_moment(0.0, f64::INFINITY, 0.0)
    }

    /// ∫ (1 ∧ |z|²) N(dz): the Lévy-measure integrability functional.
    pub fn levy_integrability(&self) -> Result<f64> {
        Ok(self.node.partial_moment(0.0, 1.0, 2.0)? + self.node.partial_moment(1.0, f64::INFINITY, 0.0)?)
    }

    /// ∫_{lo≤|z|<hi} f(|z|) N(dz) by quadrature.
    pub fn radial_integral(
        &self,
        lo: f64,
        hi: f64,
        f: &(dyn Fn(f64) -> f64 + Sync),
        breaks: &[f64],
        nonneg: bool,
    ) -> Result<f64> {
        self.node.radial_integral(lo, hi, f, breaks, nonneg)
    }

    /// ∫_{lo≤|z|<hi} kernel(⟨dir,z⟩) N(dz).
    pub fn directional_integral(
        &self,
        dir: &[f64],
        kernel: &Kernel,
        lo: f64,
        hi: f64,
    ) -> Result<f64> {
        self.node.directional_integral(dir, kernel, lo, hi)
    }

    /// ∫_{lo≤|z|<hi} z N(dz).
    pub fn moment_vector(&self, lo: f64, hi: f64) -> Result<Vec<f64>> {
        self.node.moment_vector(lo, hi)
    }

    /// ∫_{lo≤|z|<hi} z zᵀ N(dz), row-major.
    pub fn second_moment_matrix(&self, lo: f64, hi: f64) -> Result<Vec<f64>> {
        self.node.second_moment_matrix(lo, hi)
    }

    /// Exact pushforward under z ↦ ⟨v,z⟩ with the atom at 0 removed.
    pub fn project(&self, v: &[f64]) -> Result<LevyMeasure> {
        Ok(LevyMeasure::from_node(self.node.project(v, 0.0, f64::INFINITY)?))
    }
}

/// The generating triplet (A, N, b) of a Lévy process.
#[derive(Debug, Clone)]
pub struct GeneratingTriplet {
    a: SymmetricMatrix,
    n: LevyMeasure,
    b: Vec<f64>,
}

impl GeneratingTriplet {
    /// Validates dimensions and the standing assumption h(0⁺) = ∞
    /// (compound Poisson triplets are rejected).
    pub fn new(a: SymmetricMatrix, n: LevyMeasure, b: Vec<f64>) -> Result<Self> {
        assert_eq!(a.dim(), n.dim(), "Gaussian part and measure dimension differ");
        assert_eq!(a.dim(), b.len(), "drift dimension mismatch");
        let t = GeneratingTriplet { a, n, b };
        if t.a.norm() == 0.0 {
            let mass = t.n.total_mass()?;
            if mass.is_finite() {
                let h1 = t.h_raw(1e-8)?;
                return Err(LevyError::CompoundPoisson { h_bound: h1 });
            }
        }
        Ok(t)
    }

    /// Builds without the h(0⁺) check (used by internal decompositions,
    /// whose small-jump parts may be deliberately finite).
    pub fn new_unchecked(a: SymmetricMatrix, n: LevyMeasure, b: Vec<f64>) -> Self {
        assert_eq!(a.dim(), n.dim());
        assert_eq!(a.dim(), b.len());
        GeneratingTriplet { a, n, b }
    }

    pub fn dim(&self) -> usize {
        self.a.dim()
    }

    pub fn gaussian(&self) -> &SymmetricMatrix {
        &self.a
    }

    pub fn levy(&self) -> &LevyMeasure {
        &self.n
    }

    pub fn drift(&self) -> &[f64] {
        &self.b
    }

    pub fn is_symmetric(&self) -> bool {
        self.b.iter().all(|x| *x == 0.0) && self.n.is_symmetric()
    }

    /// h(r) evaluated from the definition (no caching).
    pub fn h_raw(&self, r: f64) -> Result<f64> {
        assert!(r > 0.0);
        Ok(self.a.norm() / (r * r)
            + self.n.truncated_second_moment(r)? / (r * r)
            + self.n.tail_mass(r)?)
    }

    /// K(r) from the definition.
    pub fn k_raw(&self, r: f64) -> Result<f64> {
        assert!(r > 0.0);
        Ok(self.a.norm() / (r * r) + self.n.truncated_second_moment(r)? / (r * r))
    }

    /// Effective drift b_r = b + ∫ z (1_{|z|<r} − 1_{|z|<1}) N(dz).
    ///
    /// Exact (no quadrature) for symmetric measures and power-law nodes.
    pub fn effective_drift(&self, r: f64) -> Result<Vec<f64>> {
        assert!(r > 0.0);
        if self.n.is_symmetric() {
            return Ok(self.b.clone());
        }
        let mut out = self.b.clone();
        if r == 1.0 {
            return Ok(out);
        }
        let (mv, sign) = if r > 1.0 {
            (self.n.moment_vector(1.0, r)?, 1.0)
        } else {
            (self.n.moment_vector(r, 1.0)?, -1.0)
        };
        for (o, m) in out.iter_mut().zip(mv) {
            *o += sign * m;
        }
        Ok(out)
    }

    /// Triplet of the projected process ⟨v, Y⟩ for a unit vector v.
    pub fn project(&self, v: &[f64]) -> Result<GeneratingTriplet> {
        let norm: f64 = v.iter().map(|x| x * x).sum::<f64>().sqrt();
        if (norm - 1.0).abs() > 1e-9 {
            return Err(LevyError::NonUnitDirection { norm });
        }
        let a1 = SymmetricMatrix::new(1, &[self.a.quadratic_form(v)])?;
        let n1 = self.n.node().project(v, 0.0, f64::INFINITY)?;
        // b₁ = ⟨v,b⟩ + ∫ ⟨v,z⟩ (1_{|⟨v,z⟩|<1} − 1_{|z|<1}) N(dz); the integrand
        // vanishes on |z| < 1 because |⟨v,z⟩| ≤ |z|.
        let mut b1: f64 = v.iter().zip(&self.b).map(|(x, y)| x * y).sum();
        let outer = self.n.node().project(v, 1.0, f64::INFINITY)?;
        b1 += outer.line_integral(1.0, &Kernel::Linear, 0.0, 1.0)?;
        Ok(GeneratingTriplet::new_unchecked(a1, LevyMeasure::from_node(n1), vec![b1]))
    }
}

/// Outcome of `validate_triplet`.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ValidationReport {
    pub dim: usize,
    pub gaussian_norm: f64,
    pub min_eigenvalue: f64,
    pub levy_integrability: f64,
    pub total_mass_finite: bool,
    /// h sampled at r = 10^{-1} … 10^{-8}.
    pub h_probe: Vec<(f64, f64)>,
    pub h_unbounded: bool,
    pub valid: bool,
    pub notes: Vec<String>,
}

/// Checks symmetry/definiteness of A, integrability of N and the standing
/// assumption h(0⁺) = ∞.
pub fn validate_triplet(t: &GeneratingTriplet) -> Result<ValidationReport> {
    let integ = t.n.levy_integrability()?;
    if !integ.is_finite() {
        return Err(LevyError::NonIntegrableMeasure { estimate: integ });
    }
    let mass = t.n.total_mass()?;
    let mut probe = Vec::new();
    for k in 1..=8 {
        let r = 10f64.powi(-k);
        probe.push((r, t.h_raw(r)?));
    }
    // Growth test: h must keep rising as r ↓ 0 unless exact divergence is known.
    let h_unbounded = t.a.norm() > 0.0
        || mass.is_infinite()
        || probe.last().unwrap().1 > 1e6 * probe.first().unwrap().1.max(1.0);
    let mut notes = Vec::new();
    if t.a.norm() == 0.0 && mass.is_finite() && !h_unbounded {
        return Err(LevyError::CompoundPoisson { h_bound: probe.last().unwrap().1 });
    }
    if t.n.is_symmetric() {
        notes.push("measure is symmetric".to_string());
    }
    Ok(ValidationReport {
        dim: t.dim(),
        gaussian_norm: t.a.norm(),
        min_eigenvalue: t.a.eigenvalues().iter().fold(f64::INFINITY, |a, x| a.min(*x)),
        levy_integrability: integ,
        total_mass_finite: mass.is_finite(),
        h_probe: probe,
        h_unbounded,
        valid: true,
        notes,
    })
}

/// The diagnostic family on which minorizations a1·ν ≤ N are certified:
/// dyadic annuli crossed with per-axis half-space sectors.
pub fn minorization_diagnostic_sets(dim: usize) -> Vec<(f64, f64, Option<(usize, bool)>)> {
    let mut sets = Vec::new();
    for k in -10..=10 {
        let lo = 2f64.powi(k);
        let hi = 2f64.powi(k + 1);
        sets.push((lo, hi, None));
        for axis in 0..dim {
            sets.push((lo, hi, Some((axis, true))));
            sets.push((lo, hi, Some((axis, false))));
        }
    }
    sets
}

fn diagnostic_mass(n: &LevyMeasure, set: &(f64, f64, Option<(usize, bool)>)) -> Result<f64> {
    let (lo, hi, sector) = set;
    match sector {
        None => n.partial_moment(*lo, *hi, 0.0),
        Some((axis, positive)) => {
            let mut dir = vec![0.0; n.dim()];
            dir[*axis] = if *positive { 1.0 } else { -1.0 };
            n.directional_integral(&dir, &Kernel::PositiveSide, *lo, *hi)
        }
    }
}

/// Splits Y into Z^{1.λ} = (0, N − (a1/2)·ν|_{B_λ}, b) and
/// Z^{2.λ} = (0, (a1/2)·ν|_{B_λ}, 0), after certifying a1·ν ≤ N on the
/// diagnostic family.
pub fn decompose_levy(
    t: &GeneratingTriplet,
    nu: &LevyMeasure,
    a1: f64,
    lambda: f64,
) -> Result<(GeneratingTriplet, GeneratingTriplet)> {
    assert!(a1 > 0.0 && a1 <= 1.0, "a1 must lie in (0,1]");
    assert!(lambda > 0.0);
    assert_eq!(t.dim(), nu.dim());
    for set in minorization_diagnostic_sets(t.dim()) {
        let lhs = a1 * diagnostic_mass(nu, &set)?;
        let rhs = diagnostic_mass(t.levy(), &set)?;
        if lhs > rhs + 1e-9 * (rhs.abs() + 1.0) {
            return Err(LevyError::MinorizationViolated {
                set: format!("annulus [{}, {}), sector {:?}", set.0, set.1, set.2),
                lhs,
                rhs,
            });
        }
    }
    let small = nu.clone().scaled(a1 / 2.0).restricted_to_ball(lambda);
    let big = LevyMeasure::difference(t.levy().clone(), small.clone());
    let z1 = GeneratingTriplet::new_unchecked(
        SymmetricMatrix::zero(t.dim()),
        big,
        t.drift().to_vec(),
    );
    let z2 = GeneratingTriplet::new_unchecked(
        SymmetricMatrix::zero(t.dim()),
        small,
        vec![0.0; t.dim()],
    );
    Ok((z1, z2))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::measure::zoo;

    #[test]
    fn validate_gaussian_only() {
        let t = zoo::gaussian(SymmetricMatrix::scaled_identity(1, 0.5));
        let r = validate_triplet(&t.triplet).unwrap();
        assert!(r.valid && r.h_unbounded);
        assert!(r.levy_integrability == 0.0);
    }

    #[test]
    fn validate_one_sided() {
        let t = zoo::one_sided_1_stable();
        let r = validate_triplet(&t.triplet).unwrap();
        // ∫(1∧x²) x^{-2} 1_{x<0} dx = 2, with infinite total mass.
        assert!((r.levy_integrability - 2.0).abs() < 1e-12);
        assert!(!r.total_mass_finite);
    }

    #[test]
    fn compound_poisson_rejected() {
        let atoms = LevyMeasure::atoms(1, vec![(vec![1.0], 1.0)]);
        let err = GeneratingTriplet::new(SymmetricMatrix::zero(1), atoms, vec![0.0]);
        assert!(matches!(err, Err(LevyError::CompoundPoisson { .. })));
    }

    #[test]
    fn effective_drift_one_sided() {
        let t = zoo::one_sided_1_stable();
        let b_half = t.triplet.effective_drift(0.5).unwrap();
        assert!((b_half[0] - 2.0f64.ln()).abs() < 1e-12, "got {b_half:?}");
        let b_e = t.triplet.effective_drift(std::f64::consts::E).unwrap();
        assert!((b_e[0] + 1.0).abs() < 1e-12, "got {b_e:?}");
    }

    #[test]
    fn effective_drift_symmetric_is_exact() {
        let t = zoo::isotropic_stable(2, 1.3).unwrap();
        for r in [0.25, 1.0, 7.0] {
            assert_eq!(t.triplet.effective_drift(r).unwrap(), vec![0.0, 0.0]);
        }
    }

    #[test]
    fn projection_is_direction_free_for_isotropic() {
        let t = zoo::isotropic_stable(2, 1.0).unwrap();
        let p1 = t.triplet.project(&[1.0, 0.0]).unwrap();
        let p2 = t.triplet.project(&[0.6, 0.8]).unwrap();
        for r in [0.5, 1.0, 2.0] {
            let a = p1.levy().tail_mass(r).unwrap();
            let b = p2.levy().tail_mass(r).unwrap();
            assert!((a - b).abs() < 1e-10 * (1.0 + a));
        }
    }

    #[test]
    fn decompose_reconstructs_tail_mass() {
        let t = zoo::isotropic_stable(1, 1.5).unwrap();
        let nu = t.triplet.levy().clone();
        let (z1, z2) = decompose_levy(&t.triplet, &nu, 1.0, 1.0).unwrap();
        for k in -6..6 {
            let r = 2f64.powi(k);
            let total = t.triplet.levy().tail_mass(r).unwrap();
            let sum = z1.levy().tail_mass(r).unwrap() + z2.levy().tail_mass(r).unwrap();
            assert!(
                (total - sum).abs() <= 1e-10 * total.max(1e-300),
                "r={r}: {total} vs {sum}"
            );
        }
    }

    #[test]
    fn minorization_violation_detected() {
        let t = zoo::isotropic_stable(1, 1.5).unwrap();
        let too_big = t.triplet.levy().clone().scaled(3.0);
        assert!(matches!(
            decompose_levy(&t.triplet, &too_big, 1.0, 1.0),
            Err(LevyError::MinorizationViolated { .. })
        ));
    }
}
