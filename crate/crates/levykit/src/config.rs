//! Structured text configuration for generating triplets.
//!
//! The schema mirrors the measure node tree: matrix entries row-major,
//! drift vector, and a tagged measure tree. Unknown keys are rejected.
//!
//! ```toml
//! dim = 2
//! drift = [0.0, 0.0]
//! gaussian = [[0.5, 0.0], [0.0, 0.5]]
//!
//! [measure]
//! kind = "sum"
//! [[measure.terms]]
//! kind = "isotropic_stable"
//! alpha = 1.0
//! [[measure.terms]]
//! kind = "spherical_stable"
//! alpha = 1.0
//! atoms = [{ direction = [0.6, 0.8], weight = 0.5 }]
//! ```

use serde::{Deserialize, Serialize};

use crate::error::{LevyError, Result};
use crate::measure::{
    GeneratingTriplet, LevyMeasure, Node, RadialProfile, Side, SphereAtom, SymmetricMatrix,
};
use crate::numeric::special::stable_density_constant;

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TripletConfig {
    pub dim: usize,
    pub drift: Vec<f64>,
    /// Row-major rows of the Gaussian matrix A.
    pub gaussian: Vec<Vec<f64>>,
    pub measure: MeasureConfig,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum MeasureConfig {
    Zero,
    /// Isotropic density coeff·|z|^{-d-alpha}.
    RadialPower { coeff: f64, alpha: f64 },
    /// Isotropic α-stable with the exact normalization (ψ = |x|^α).
    IsotropicStable { alpha: f64 },
    /// Atomic sphere measure × r^{-1-alpha} dr.
    SphericalStable { alpha: f64, atoms: Vec<AtomConfig> },
    /// d = 1 density coeff·r^{-1-alpha} on one half-line.
    OneSidedPower { side: SideConfig, coeff: f64, alpha: f64 },
    /// Per-axis one-dimensional measures.
    Cylindrical { axes: Vec<MeasureConfig> },
    Atoms { points: Vec<PointConfig> },
    Scale { factor: f64, inner: Box<MeasureConfig> },
    RestrictBall { radius: f64, inner: Box<MeasureConfig> },
    RestrictComplement { radius: f64, inner: Box<MeasureConfig> },
    Sum { terms: Vec<MeasureConfig> },
    Difference { minuend: Box<MeasureConfig>, subtrahend: Box<MeasureConfig> },
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AtomConfig {
    pub direction: Vec<f64>,
    pub weight: f64,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PointConfig {
    pub at: Vec<f64>,
    pub weight: f64,
}

#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SideConfig {
    Neg,
    Pos,
}

impl From<SideConfig> for Side {
    fn from(s: SideConfig) -> Side {
        match s {
            SideConfig::Neg => Side::Neg,
            SideConfig::Pos => Side::Pos,
        }
    }
}

impl MeasureConfig {
    fn build(&self, dim: usize) -> Result<Node> {
        Ok(match self {
            MeasureConfig::Zero => Node::Zero { dim },
            MeasureConfig::RadialPower { coeff, alpha } => Node::Radial {
                dim,
                density: RadialProfile::power(*coeff, -(dim as f64) - alpha),
            },
            MeasureConfig::IsotropicStable { alpha } => Node::Radial {
                dim,
                density: RadialProfile::power(
                    stable_density_constant(dim, *alpha),
                    -(dim as f64) - alpha,
                ),
            },
            MeasureConfig::SphericalStable { alpha, atoms } => Node::Spherical {
                dim,
                atoms: atoms
                    .iter()
                    .map(|a| SphereAtom { direction: a.direction.clone(), weight: a.weight })
                    .collect(),
                radial: RadialProfile::power(1.0, -1.0 - alpha),
            },
            MeasureConfig::OneSidedPower { side, coeff, alpha } => {
                if dim != 1 {
                    return Err(LevyError::InvalidConfig(
                        "one_sided_power requires dim = 1".into(),
                    ));
                }
                Node::OneSided {
                    side: (*side).into(),
                    radial: RadialProfile::power(*coeff, -1.0 - alpha),
                }
            }
            MeasureConfig::Cylindrical { axes } => {
                if axes.len() != dim {
                    return Err(LevyError::InvalidConfig(format!(
                        "cylindrical needs {dim} axes, got {}",
                        axes.len()
                    )));
                }
                Node::Sum {
                    dim,
                    terms: axes
                        .iter()
                        .enumerate()
                        .map(|(axis, m)| {
                            Ok(Node::Embed { dim, axis, inner: Box::new(m.build(1)?) })
                        })
                        .collect::<Result<Vec<_>>>()?,
                }
            }
            MeasureConfig::Atoms { points } => Node::Atoms {
                dim,
                points: points.iter().map(|p| (p.at.clone(), p.weight)).collect(),
            },
            MeasureConfig::Scale { factor, inner } => Node::Scale {
                factor: *factor,
                inner: Box::new(inner.build(dim)?),
            },
            MeasureConfig::RestrictBall { radius, inner } => Node::Restrict {
                lo: 0.0,
                hi: *radius,
                inner: Box::new(inner.build(dim)?),
            },
            MeasureConfig::RestrictComplement { radius, inner } => Node::Restrict {
                lo: *radius,
                hi: f64::INFINITY,
                inner: Box::new(inner.build(dim)?),
            },
            MeasureConfig::Sum { terms } => Node::Sum {
                dim,
                terms: terms
                    .iter()
                    .map(|t| t.build(dim))
                    .collect::<Result<Vec<_>>>()?,
            },
            MeasureConfig::Difference { minuend, subtrahend } => Node::Difference {
                minuend: Box::new(minuend.build(dim)?),
                subtrahend: Box::new(subtrahend.build(dim)?),
            },
        })
    }

    fn from_node(node: &Node) -> Result<MeasureConfig> {
        Ok(match node {
            Node::Zero { .. } => MeasureConfig::Zero,
            Node::Radial { dim, density } => {
                let (coeff, exponent) = density.as_power().ok_or_else(func_err)?;
                MeasureConfig::RadialPower { coeff, alpha: -exponent - *dim as f64 }
            }
            Node::Spherical { atoms, radial, .. } => {
                let (coeff, exponent) = radial.as_power().ok_or_else(func_err)?;
                if (coeff - 1.0).abs() > 1e-12 {
                    return Err(LevyError::InvalidConfig(
                        "spherical radial profiles serialize with unit coefficient; fold the \
                         coefficient into the atom weights"
                            .into(),
                    ));
                }
                MeasureConfig::SphericalStable {
                    alpha: -exponent - 1.0,
                    atoms: atoms
                        .iter()
                        .map(|a| AtomConfig { direction: a.direction.clone(), weight: a.weight })
                        .collect(),
                }
            }
            Node::OneSided { side, radial } => {
                let (coeff, exponent) = radial.as_power().ok_or_else(func_err)?;
                MeasureConfig::OneSidedPower {
                    side: match side {
                        Side::Neg => SideConfig::Neg,
                        Side::Pos => SideConfig::Pos,
                    },
                    coeff,
                    alpha: -exponent - 1.0,
                }
            }
            Node::Atoms { points, .. } => MeasureConfig::Atoms {
                points: points
                    .iter()
                    .map(|(z, w)| PointConfig { at: z.clone(), weight: *w })
                    .collect(),
            },
            Node::Embed { .. } => {
                return Err(LevyError::InvalidConfig(
                    "lone embedded axes serialize through `cylindrical`".into(),
                ))
            }
            Node::Scale { factor, inner } => MeasureConfig::Scale {
                factor: *factor,
                inner: Box::new(Self::from_node(inner)?),
            },
            Node::Restrict { lo, hi, inner } => {
                if *lo == 0.0 {
                    MeasureConfig::RestrictBall {
                        radius: *hi,
                        inner: Box::new(Self::from_node(inner)?),
                    }
                } else if hi.is_infinite() {
                    MeasureConfig::RestrictComplement {
                        radius: *lo,
                        inner: Box::new(Self::from_node(inner)?),
                    }
                } else {
                    MeasureConfig::RestrictBall {
                        radius: *hi,
                        inner: Box::new(MeasureConfig::RestrictComplement {
                            radius: *lo,
                            inner: Box::new(Self::from_node(inner)?),
                        }),
                    }
                }
            }
            Node::Sum { terms, .. } => {
                // Cylindrical sums (all embeds) round-trip as `cylindrical`.
                if !terms.is_empty()
                    && terms.iter().all(|t| matches!(t, Node::Embed { .. }))
                {
                    let dim = node.dim();
                    let mut axes = vec![MeasureConfig::Zero; dim];
                    for t in terms {
                        if let Node::Embed { axis, inner, .. } = t {
                            axes[*axis] = Self::from_node(inner)?;
                        }
                    }
                    MeasureConfig::Cylindrical { axes }
                } else {
                    MeasureConfig::Sum {
                        terms: terms
                            .iter()
                            .map(Self::from_node)
                            .collect::<Result<Vec<_>>>()?,
                    }
                }
            }
            Node::Difference { minuend, subtrahend } => MeasureConfig::Difference {
                minuend: Box::new(Self::from_node(minuend)?),
                subtrahend: Box::new(Self::from_node(subtrahend)?),
            },
        })
    }
}

fn func_err() -> LevyError {
    LevyError::InvalidConfig(
        "functional radial profiles have no text representation; only power-law \
         profiles serialize"
            .into(),
    )
}

impl TripletConfig {
    pub fn build(&self) -> Result<GeneratingTriplet> {
        if self.drift.len() != self.dim {
            return Err(LevyError::InvalidConfig(format!(
                "drift has {} entries, dim = {}",
                self.drift.len(),
                self.dim
            )));
        }
        if self.gaussian.len() != self.dim
            || self.gaussian.iter().any(|row| row.len() != self.dim)
        {
            return Err(LevyError::InvalidConfig("gaussian must be a dim×dim matrix".into()));
        }
        let rows: Vec<f64> = self.gaussian.iter().flatten().copied().collect();
        let a = SymmetricMatrix::new(self.dim, &rows)?;
        let node = self.measure.build(self.dim)?;
        GeneratingTriplet::new(a, LevyMeasure::from_node(node), self.drift.clone())
    }

    pub fn from_triplet(t: &GeneratingTriplet) -> Result<TripletConfig> {
        let dim = t.dim();
        let gaussian: Vec<Vec<f64>> = (0..dim)
            .map(|i| (0..dim).map(|j| t.gaussian().entry(i, j)).collect())
            .collect();
        Ok(TripletConfig {
            dim,
            drift: t.drift().to_vec(),
            gaussian,
            measure: MeasureConfig::from_node(t.levy().node())?,
        })
    }

    pub fn to_toml(&self) -> Result<String> {
        toml::to_string_pretty(self)
            .map_err(|e| LevyError::InvalidConfig(format!("serialization failed: {e}")))
    }

    pub fn from_toml(text: &str) -> Result<TripletConfig> {
        toml::from_str(text).map_err(|e| LevyError::InvalidConfig(format!("{e}")))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::exponent::CharExponent;
    use crate::measure::zoo;

    #[test]
    fn round_trip_mixed_member() {
        let m = zoo::mixed_stable_with_atoms(1.0).unwrap();
        let cfg = TripletConfig::from_triplet(&m.triplet).unwrap();
        let text = cfg.to_toml().unwrap();
        let back = TripletConfig::from_toml(&text).unwrap().build().unwrap();
        let e1 = CharExponent::new(&m.triplet);
        let e2 = CharExponent::new(&back);
        for x in [[0.3, 1.0], [-2.0, 0.7]] {
            let a = e1.psi(&x).unwrap();
            let b = e2.psi(&x).unwrap();
            assert!((a - b).norm() < 1e-12 * (1.0 + a.norm()));
        }
    }

    #[test]
    fn unknown_keys_rejected() {
        let text = r#"
dim = 1
drift = [0.0]
gaussian = [[0.5]]
bogus = 3

[measure]
kind = "zero"
"#;
        assert!(TripletConfig::from_toml(text).is_err());
    }

    #[test]
    fn parse_documented_example() {
        let text = r#"
dim = 2
drift = [0.0, 0.0]
gaussian = [[0.0, 0.0], [0.0, 0.0]]

[measure]
kind = "sum"

[[measure.terms]]
kind = "isotropic_stable"
alpha = 1.0

[[measure.terms]]
kind = "spherical_stable"
alpha = 1.0
atoms = [{ direction = [0.6, 0.8], weight = 0.5 }]
"#;
        let t = TripletConfig::from_toml(text).unwrap().build().unwrap();
        assert_eq!(t.dim(), 2);
        let e = CharExponent::new(&t);
        assert!(e.has_closed_form());
    }

    #[test]
    fn functional_profile_not_serializable() {
        let n = crate::measure::LevyMeasure::radial(
            1,
            crate::measure::RadialProfile::func(|r: f64| (-r).exp() * r.powf(-2.0), -2.0),
        );
        let t = GeneratingTriplet::new(SymmetricMatrix::zero(1), n, vec![0.0]).unwrap();
        assert!(matches!(
            TripletConfig::from_triplet(&t),
            Err(LevyError::InvalidConfig(_))
        ));
    }
}
