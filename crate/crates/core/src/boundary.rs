//! Fields on balls: tangential projection onto the boundary sphere, the
//! angle `α` between `n` and the outward normal, boundary zeros of `φ∥`, and
//! the index theorem with a boundary term.

use std::f64::consts::PI;
use std::sync::Arc;

use nalgebra::DMatrix;
use serde::Serialize;

use crate::domain::{ChartDomain, SphereAtlas};
use crate::error::{Error, Result};
use crate::field::VectorField;
use crate::numeric::{compensated_sum, distance, dot, gauss_legendre_interval, norm};
use crate::quadrature::SphereQuadrature;
use crate::topology::catalog_chi;
use crate::winding::ZERO_ON_SPHERE_THRESHOLD;
use crate::zeros::{find_zeros, sphere_zeros, ZeroRecord, ZeroSearch};

/// Distance from the sphere within which a point counts as on `∂M`.
pub const ON_BOUNDARY_TOL: f64 = 1e-10;

/// `|sin α|` below which the field is treated as normal to `∂M`.
const TRANSVERSAL_TOL: f64 = 1e-9;

/// The ball `‖x − center‖ ≤ radius`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BoundedDomain {
    pub center: Vec<f64>,
    pub radius: f64,
}

impl BoundedDomain {
    pub fn new(center: Vec<f64>, radius: f64) -> Result<Self> {
        if center.len() < 2 || !(radius > 0.0) {
            return Err(Error::InvalidInput("ball needs dimension >= 2 and positive radius".into()));
        }
        Ok(Self { center, radius })
    }

    pub fn unit_ball(dim: usize) -> Self {
        Self {
            center: vec![0.0; dim],
            radius: 1.0,
        }
    }

    pub fn dim(&self) -> usize {
        self.center.len()
    }

    /// Collar coordinate `v`: signed distance to `∂M`, negative inside.
    pub fn collar(&self, x: &[f64]) -> f64 {
        distance(x, &self.center) - self.radius
    }

    /// Outward unit normal `m⊥` at `p`.
    pub fn outward_normal(&self, p: &[f64]) -> Vec<f64> {
        let r = distance(p, &self.center);
        p.iter().zip(&self.center).map(|(a, c)| (a - c) / r).collect()
    }

    pub fn check_on_boundary(&self, p: &[f64]) -> Result<()> {
        if p.len() != self.dim() {
            return Err(Error::DimensionMismatch {
                left: p.len(),
                right: self.dim(),
            });
        }
        let v = self.collar(p);
        if v.abs() > ON_BOUNDARY_TOL * self.radius.max(1.0) {
            return Err(Error::NotOnBoundary {
                point: p.to_vec(),
                distance: v.abs(),
            });
        }
        Ok(())
    }

    pub fn chart_domain(&self) -> ChartDomain {
        ChartDomain::Ball {
            center: self.center.clone(),
            radius: self.radius,
        }
    }

    /// Stereographic pair on `∂M`.
    pub fn boundary_atlas(&self) -> SphereAtlas {
        SphereAtlas::new(self.center.clone(), self.radius)
    }

    /// Catalog triangulation of the ball.
    pub fn catalog_name(&self) -> Result<&'static str> {
        match self.dim() {
            2 => Ok("B2"),
            4 => Ok("B4"),
            n => Err(Error::UnsupportedDimension(n)),
        }
    }
}

/// `φ∥ = φ − m⊥ (φ·m⊥)` at a boundary point.
pub fn project_tangential<F: VectorField + ?Sized>(field: &F, d: &BoundedDomain, p: &[f64]) -> Result<Vec<f64>> {
    d.check_on_boundary(p)?;
    let phi = field.eval(p);
    let m = d.outward_normal(p);
    let along = dot(&phi, &m);
    Ok(phi.iter().zip(&m).map(|(a, b)| a - along * b).collect())
}

/// `α = arccos(n·m⊥) ∈ [0, π]`.
pub fn alpha_angle<F: VectorField + ?Sized>(field: &F, d: &BoundedDomain, p: &[f64]) -> Result<f64> {
    d.check_on_boundary(p)?;
    let phi = field.eval(p);
    let len = norm(&phi);
    if len < 1e-12 {
        return Err(Error::ZeroField {
            point: p.to_vec(),
            norm: len,
        });
    }
    Ok(angle_to_normal(&phi, &d.outward_normal(p)))
}

/// `atan2(‖φ∥‖, φ·m⊥)`, accurate near `α = 0` and `α = π` where `arccos`
/// loses half the digits.
fn angle_to_normal(phi: &[f64], m: &[f64]) -> f64 {
    let along = dot(phi, m);
    let tangential: Vec<f64> = phi.iter().zip(m).map(|(a, b)| a - along * b).collect();
    norm(&tangential).atan2(along)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BoundaryZeroRecord {
    pub location: Vec<f64>,
    pub alpha: f64,
    pub eta_par: i8,
    pub beta_par: u32,
    pub winding_par: i64,
    /// `φ·m⊥ < 0`, the `α = π` side.
    pub inward: bool,
    pub chart: usize,
    pub chart_record: ZeroRecord,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BoundaryScan {
    pub zeros: Vec<BoundaryZeroRecord>,
    /// `φ∥ ≡ 0`: the field is normal to `∂M` everywhere.
    pub transversal: bool,
    /// `α` is the same at every sampled boundary point.
    pub constant_alpha: bool,
    pub alpha_min: f64,
    pub alpha_max: f64,
    pub min_field_norm: f64,
    /// `Σ W(φ∥)` over all boundary zeros.
    pub winding_sum: i64,
    pub seam_attempts: usize,
}

fn boundary_samples(d: &BoundedDomain, scale: f64) -> Vec<Vec<f64>> {
    let n = d.dim();
    let q = if n == 2 {
        SphereQuadrature::new(2, 1, ((256.0 * scale).round() as usize).max(16))
    } else {
        let k = ((12.0 * scale).round() as usize).max(4);
        SphereQuadrature::new(n, k, 2 * k)
    };
    q.nodes()
        .map(|node| {
            d.center
                .iter()
                .zip(&node.point)
                .map(|(c, s)| c + d.radius * s)
                .collect()
        })
        .collect()
}

/// Zeros of `φ∥` on `∂M`, found in the stereographic charts of the boundary
/// sphere as zeros of an `(N−1)`-dimensional field.
pub fn boundary_zeros(field: Arc<dyn VectorField>, d: &BoundedDomain, scale: f64) -> Result<BoundaryScan> {
    if field.dim() != d.dim() {
        return Err(Error::DimensionMismatch {
            left: field.dim(),
            right: d.dim(),
        });
    }
    let mut alpha_min = f64::INFINITY;
    let mut alpha_max = f64::NEG_INFINITY;
    let mut min_field_norm = f64::INFINITY;
    let mut max_sin = 0.0f64;
    for p in boundary_samples(d, scale) {
        let phi = field.eval(&p);
        let len = norm(&phi);
        if len < ZERO_ON_SPHERE_THRESHOLD {
            return Err(Error::ZeroOnBoundary { point: p });
        }
        min_field_norm = min_field_norm.min(len);
        let alpha = angle_to_normal(&phi, &d.outward_normal(&p));
        alpha_min = alpha_min.min(alpha);
        alpha_max = alpha_max.max(alpha);
        max_sin = max_sin.max(alpha.sin());
    }
    let transversal = max_sin < TRANSVERSAL_TOL;
    let constant_alpha = alpha_max - alpha_min < TRANSVERSAL_TOL;
    if transversal {
        return Ok(BoundaryScan {
            zeros: Vec::new(),
            transversal,
            constant_alpha,
            alpha_min,
            alpha_max,
            min_field_norm,
            winding_sum: 0,
            seam_attempts: 0,
        });
    }

    let search = ZeroSearch::for_dim(d.dim() - 1, scale);
    let (found, seam_attempts) = match sphere_zeros(field.clone(), &d.boundary_atlas(), &search) {
        Err(Error::ZerosTooClose { .. }) => return Err(Error::NonIsolatedBoundaryZeros),
        other => other?,
    };
    let mut zeros = Vec::with_capacity(found.len());
    for z in found {
        let phi = field.eval(&z.point);
        let len = norm(&phi);
        if len < ZERO_ON_SPHERE_THRESHOLD {
            return Err(Error::ZeroOnBoundary { point: z.point });
        }
        let m = d.outward_normal(&z.point);
        let along = dot(&phi, &m);
        let r = &z.record;
        zeros.push(BoundaryZeroRecord {
            alpha: angle_to_normal(&phi, &m),
            eta_par: r.eta,
            beta_par: r.beta,
            winding_par: r.winding,
            inward: along < 0.0,
            chart: z.chart,
            location: z.point,
            chart_record: z.record,
        });
    }
    let winding_sum = zeros.iter().map(|z| z.winding_par).sum();
    Ok(BoundaryScan {
        zeros,
        transversal,
        constant_alpha,
        alpha_min,
        alpha_max,
        min_field_norm,
        winding_sum,
        seam_attempts,
    })
}

/// All variants of `χ` for a field on a ball, side by side.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BoundaryTheorem {
    pub interior: Vec<ZeroRecord>,
    pub interior_sum: i64,
    pub boundary: BoundaryScan,
    /// `½ Σ β(φ∥) η(φ∥)` over all boundary zeros.
    pub boundary_all_half: f64,
    /// `Σ W(φ∥)` over the inward-side boundary zeros.
    pub boundary_inward: i64,
    pub chi_paper: f64,
    pub chi_morse: i64,
    /// The interior sum alone, set when `α` is constant on `∂M`.
    pub chi_transversal: Option<i64>,
    pub chi_oracle: i64,
    /// The field is transversal or has constant `α`, so the half-sum formula
    /// is applicable as derived.
    pub paper_hypotheses: bool,
    pub paper_agrees: bool,
    pub morse_agrees: bool,
    pub flags: Vec<String>,
}

pub fn chi_with_boundary(field: Arc<dyn VectorField>, d: &BoundedDomain, scale: f64) -> Result<BoundaryTheorem> {
    let chi_oracle = catalog_chi(d.catalog_name()?)?;
    let interior = find_zeros(field.as_ref(), &d.chart_domain(), &ZeroSearch::for_dim(d.dim(), scale))?;
    let interior_sum: i64 = interior.iter().map(|z| z.beta as i64 * z.eta as i64).sum();
    let boundary = boundary_zeros(field, d, scale)?;

    let all: i64 = boundary.zeros.iter().map(|z| z.beta_par as i64 * z.eta_par as i64).sum();
    let boundary_all_half = 0.5 * all as f64;
    let boundary_inward: i64 = boundary.zeros.iter().filter(|z| z.inward).map(|z| z.winding_par).sum();
    let chi_paper = interior_sum as f64 + boundary_all_half;
    let chi_morse = interior_sum + boundary_inward;
    let paper_hypotheses = boundary.transversal || boundary.constant_alpha;
    let chi_transversal = paper_hypotheses.then_some(interior_sum);
    let paper_agrees = chi_paper == chi_oracle as f64;
    let morse_agrees = chi_morse == chi_oracle;

    let mut flags = Vec::new();
    if boundary.transversal {
        flags.push("transversal".to_string());
    }
    if boundary.constant_alpha {
        flags.push("constant-alpha".to_string());
    }
    if !paper_hypotheses {
        flags.push("varying-alpha".to_string());
    }
    if !paper_agrees {
        flags.push("paper-disagrees".to_string());
    }
    if !morse_agrees {
        flags.push("morse-disagrees".to_string());
    }
    // ∂B^N is an odd-dimensional sphere, χ = 0
    if boundary.winding_sum != 0 {
        flags.push("boundary-sum-nonzero".to_string());
    }
    if interior.iter().any(|z| z.flagged) || boundary.zeros.iter().any(|z| z.chart_record.flagged) {
        flags.push("zero-with-vanishing-index".to_string());
    }
    Ok(BoundaryTheorem {
        interior,
        interior_sum,
        boundary,
        boundary_all_half,
        boundary_inward,
        chi_paper,
        chi_morse,
        chi_transversal,
        chi_oracle,
        paper_hypotheses,
        paper_agrees,
        morse_agrees,
        flags,
    })
}

/// Integrals of `sin^{N−1}α · cos α` over geodesic caps of the given radii
/// about the boundary point `p`.
pub fn rho1_cap_integrals<F: VectorField + ?Sized>(
    field: &F,
    d: &BoundedDomain,
    p: &[f64],
    radii: &[f64],
) -> Result<Vec<f64>> {
    d.check_on_boundary(p)?;
    let n = d.dim();
    let m0 = d.outward_normal(p);
    let mut basis = DMatrix::identity(n, n);
    basis.set_column(0, &nalgebra::DVector::from_column_slice(&m0));
    let q = basis.qr().q();
    let tangent: Vec<Vec<f64>> = (1..n).map(|j| q.column(j).iter().copied().collect()).collect();
    // directions on S^{N−2} with their weights
    let directions: Vec<(Vec<f64>, f64)> = if n == 2 {
        vec![(tangent[0].clone(), 1.0), (tangent[0].iter().map(|v| -v).collect(), 1.0)]
    } else {
        SphereQuadrature::new(n - 1, 16, 32)
            .nodes()
            .map(|node| {
                let w = (0..n)
                    .map(|i| (0..n - 1).map(|k| node.point[k] * tangent[k][i]).sum())
                    .collect();
                (w, node.weight)
            })
            .collect()
    };
    radii
        .iter()
        .map(|&r| {
            let s_max = r / d.radius;
            if !(s_max > 0.0 && s_max < PI) {
                return Err(Error::InvalidInput(format!("cap radius {r} out of range")));
            }
            let (nodes, weights) = gauss_legendre_interval(24, 0.0, s_max);
            let mut terms = Vec::with_capacity(nodes.len() * directions.len());
            for (s, ws) in nodes.iter().zip(&weights) {
                let jac = d.radius.powi(n as i32 - 1) * s.sin().powi(n as i32 - 2);
                for (w, ww) in &directions {
                    let x: Vec<f64> = (0..n)
                        .map(|i| d.center[i] + d.radius * (s.cos() * m0[i] + s.sin() * w[i]))
                        .collect();
                    let alpha = alpha_angle(field, d, &x)?;
                    terms.push(ws * ww * jac * alpha.sin().powi(n as i32 - 1) * alpha.cos());
                }
            }
            Ok(compensated_sum(terms))
        })
        .collect()
}
