//! Closed-form geometry of the analytic targets.
//!
//! Two targets are supported: the complement of the closed unit ball in
//! `R^m` and the upper half-space `{y_m > 0}`. For both, the signed distance
//! `rho`, the nearest-point projection `Pi`, the inward normal `nu` and the
//! Hessian of `rho` on the boundary are available in closed form, so the
//! identity `y = Pi(y) + rho(y) nu(Pi(y))` holds to rounding error.

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum TargetKind {
    /// `M = R^m \ closed unit ball`.
    #[serde(rename = "sphere-complement")]
    SphereExteriorComplement,
    /// `M = {y_m > 0}`.
    #[serde(rename = "half-space")]
    HalfSpace,
}

impl TargetKind {
    pub fn parse(name: &str) -> Result<Self> {
        match name {
            "sphere-complement" => Ok(TargetKind::SphereExteriorComplement),
            "half-space" => Ok(TargetKind::HalfSpace),
            other => Err(Error::InvalidArgument(format!("unknown target '{other}'"))),
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            TargetKind::SphereExteriorComplement => "sphere-complement",
            TargetKind::HalfSpace => "half-space",
        }
    }
}

/// Half-width used for the half-space, where the projection is global.
pub const HALF_SPACE_HALFWIDTH: f64 = 1.0e6;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TargetManifold {
    pub kind: TargetKind,
    pub ambient_dim: usize,
    pub tubular_halfwidth: f64,
}

/// A point written as `projected + distance * normal`.
#[derive(Debug, Clone, PartialEq)]
pub struct DecomposedPoint {
    pub projected: Vec<f64>,
    pub distance: f64,
    pub normal: Vec<f64>,
}

impl DecomposedPoint {
    pub fn reconstruct(&self) -> Vec<f64> {
        self.projected
            .iter()
            .zip(&self.normal)
            .map(|(p, n)| p + self.distance * n)
            .collect()
    }
}

/// `Hess rho` on the boundary together with its symmetric square root.
#[derive(Debug, Clone, PartialEq)]
pub struct ShapeOperator {
    pub hess_rho: DMatrix<f64>,
    pub beta: DMatrix<f64>,
}

fn norm(p: &[f64]) -> f64 {
    p.iter().map(|x| x * x).sum::<f64>().sqrt()
}

impl TargetManifold {
    pub fn new(kind: TargetKind, ambient_dim: usize, tubular_halfwidth: f64) -> Result<Self> {
        if ambient_dim < 2 {
            return Err(Error::InvalidArgument(format!(
                "ambient dimension must be at least 2, got {ambient_dim}"
            )));
        }
        if !(tubular_halfwidth > 0.0) {
            return Err(Error::InvalidArgument(
                "tubular half-width must be positive".into(),
            ));
        }
        if kind == TargetKind::SphereExteriorComplement && tubular_halfwidth >= 1.0 {
            return Err(Error::InvalidArgument(
                "sphere target needs tubular half-width < 1".into(),
            ));
        }
        Ok(TargetManifold {
            kind,
            ambient_dim,
            tubular_halfwidth,
        })
    }

    /// Sphere complement with the default half-width 0.5.
    pub fn sphere(ambient_dim: usize) -> Self {
        TargetManifold {
            kind: TargetKind::SphereExteriorComplement,
            ambient_dim,
            tubular_halfwidth: 0.5,
        }
    }

    pub fn half_space(ambient_dim: usize) -> Self {
        TargetManifold {
            kind: TargetKind::HalfSpace,
            ambient_dim,
            tubular_halfwidth: HALF_SPACE_HALFWIDTH,
        }
    }

    /// Default target of the given kind.
    pub fn with_kind(kind: TargetKind, ambient_dim: usize) -> Self {
        match kind {
            TargetKind::SphereExteriorComplement => Self::sphere(ambient_dim),
            TargetKind::HalfSpace => Self::half_space(ambient_dim),
        }
    }

    fn check_dim(&self, p: &[f64]) -> Result<()> {
        if p.len() != self.ambient_dim {
            return Err(Error::InvalidArgument(format!(
                "expected a {}-vector, got length {}",
                self.ambient_dim,
                p.len()
            )));
        }
        Ok(())
    }

    /// Signed distance: positive in `M`, zero on the boundary, negative outside.
    pub fn signed_distance(&self, p: &[f64]) -> Result<f64> {
        self.check_dim(p)?;
        match self.kind {
            TargetKind::SphereExteriorComplement => {
                let r = norm(p);
                if r == 0.0 {
                    return Err(Error::DegeneratePoint);
                }
                Ok(r - 1.0)
            }
            TargetKind::HalfSpace => Ok(p[self.ambient_dim - 1]),
        }
    }

    pub fn project(&self, p: &[f64]) -> Result<DecomposedPoint> {
        let distance = self.signed_distance(p)?;
        if distance.abs() > self.tubular_halfwidth {
            return Err(Error::OutsideTubularNeighborhood {
                distance,
                halfwidth: self.tubular_halfwidth,
            });
        }
        Ok(self.decompose_unchecked(p, distance))
    }

    fn decompose_unchecked(&self, p: &[f64], distance: f64) -> DecomposedPoint {
        match self.kind {
            TargetKind::SphereExteriorComplement => {
                let r = distance + 1.0;
                let normal: Vec<f64> = p.iter().map(|x| x / r).collect();
                DecomposedPoint {
                    projected: normal.clone(),
                    distance,
                    normal,
                }
            }
            TargetKind::HalfSpace => {
                let m = self.ambient_dim;
                let mut projected = p.to_vec();
                projected[m - 1] = 0.0;
                let mut normal = vec![0.0; m];
                normal[m - 1] = 1.0;
                DecomposedPoint {
                    projected,
                    distance,
                    normal,
                }
            }
        }
    }

    /// Inward unit normal at a boundary point (no boundary check).
    pub fn normal_at(&self, boundary_point: &[f64]) -> Vec<f64> {
        match self.kind {
            TargetKind::SphereExteriorComplement => {
                let r = norm(boundary_point);
                boundary_point.iter().map(|x| x / r).collect()
            }
            TargetKind::HalfSpace => {
                let mut n = vec![0.0; self.ambient_dim];
                n[self.ambient_dim - 1] = 1.0;
                n
            }
        }
    }

    /// Nearest point of the closed target `closure(M)`; identity on `closure(M)`.
    /// Writes into `p` and returns whether it moved. Leaves the sphere center
    /// untouched (no unique nearest point).
    pub fn clamp_to_closure(&self, p: &mut [f64]) -> bool {
        match self.kind {
            TargetKind::SphereExteriorComplement => {
                let r = norm(p);
                if r < 1.0 && r > 0.0 {
                    p.iter_mut().for_each(|x| *x /= r);
                    true
                } else {
                    false
                }
            }
            TargetKind::HalfSpace => {
                let last = p.len() - 1;
                if p[last] < 0.0 {
                    p[last] = 0.0;
                    true
                } else {
                    false
                }
            }
        }
    }

    pub fn shape_operator(&self, boundary_point: &[f64]) -> Result<ShapeOperator> {
        let d = self.signed_distance(boundary_point)?;
        if d.abs() > 1e-10 {
            return Err(Error::NotOnBoundary { distance: d });
        }
        let m = self.ambient_dim;
        let hess = match self.kind {
            TargetKind::SphereExteriorComplement => {
                let n = self.normal_at(boundary_point);
                DMatrix::from_fn(m, m, |i, j| if i == j { 1.0 } else { 0.0 } - n[i] * n[j])
            }
            TargetKind::HalfSpace => DMatrix::zeros(m, m),
        };
        // Both Hessians are orthogonal projections (or zero), so they are their
        // own square roots.
        Ok(ShapeOperator {
            beta: hess.clone(),
            hess_rho: hess,
        })
    }

    /// Supremum of the operator norm of `beta` over the boundary.
    pub fn beta_sup(&self) -> f64 {
        match self.kind {
            TargetKind::SphereExteriorComplement => 1.0,
            TargetKind::HalfSpace => 0.0,
        }
    }

    /// Second fundamental form contracted with the normal: `A_p(xi, xi)` as an
    /// m-vector, for tangent or general `xi` (the tangential part is used).
    /// Equals `-Hess rho(xi, xi) nu`.
    pub fn second_fundamental(&self, boundary_point: &[f64], xi: &[f64]) -> Vec<f64> {
        match self.kind {
            TargetKind::SphereExteriorComplement => {
                let n = self.normal_at(boundary_point);
                let dot: f64 = xi.iter().zip(&n).map(|(a, b)| a * b).sum();
                let tang2: f64 = xi.iter().map(|x| x * x).sum::<f64>() - dot * dot;
                n.iter().map(|ni| -tang2 * ni).collect()
            }
            TargetKind::HalfSpace => vec![0.0; self.ambient_dim],
        }
    }

    /// `Hess Pi^i (p)[xi, xi]` for `xi` tangent at `Pi(p)`, all components.
    pub fn projection_hessian_tangent(&self, p: &[f64], xi: &[f64]) -> Vec<f64> {
        match self.kind {
            TargetKind::SphereExteriorComplement => {
                let r = norm(p);
                let xi2: f64 = xi.iter().map(|x| x * x).sum();
                p.iter().map(|pi| -xi2 * pi / (r * r * r)).collect()
            }
            TargetKind::HalfSpace => vec![0.0; self.ambient_dim],
        }
    }
}
