//! Computational domains: flat charts, closed manifolds, and stereographic
//! atlases on round spheres.

use std::f64::consts::PI;
use std::sync::Arc;

use nalgebra::DMatrix;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::field::{FnField, VectorField};
use crate::numeric::{distance, dot, norm};

/// A flat region of `R^N` on which zeros are searched.
#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum ChartDomain {
    Box { lo: Vec<f64>, hi: Vec<f64> },
    Ball { center: Vec<f64>, radius: f64 },
}

impl ChartDomain {
    pub fn unit_ball(dim: usize) -> Self {
        Self::Ball {
            center: vec![0.0; dim],
            radius: 1.0,
        }
    }

    pub fn dim(&self) -> usize {
        match self {
            Self::Box { lo, .. } => lo.len(),
            Self::Ball { center, .. } => center.len(),
        }
    }

    pub fn bounding_box(&self) -> (Vec<f64>, Vec<f64>) {
        match self {
            Self::Box { lo, hi } => (lo.clone(), hi.clone()),
            Self::Ball { center, radius } => (
                center.iter().map(|c| c - radius).collect(),
                center.iter().map(|c| c + radius).collect(),
            ),
        }
    }

    /// Signed distance to the boundary, positive inside.
    pub fn depth(&self, x: &[f64]) -> f64 {
        match self {
            Self::Box { lo, hi } => x
                .iter()
                .zip(lo.iter().zip(hi))
                .map(|(v, (l, h))| (v - l).min(h - v))
                .fold(f64::INFINITY, f64::min),
            Self::Ball { center, radius } => radius - distance(x, center),
        }
    }

    pub fn validate(&self) -> Result<()> {
        match self {
            Self::Box { lo, hi } => {
                if lo.len() != hi.len() || lo.is_empty() {
                    return Err(Error::InvalidInput("box corners must have equal, non-zero length".into()));
                }
                if lo.iter().zip(hi).any(|(l, h)| !(l < h)) {
                    return Err(Error::InvalidInput("box must have lo < hi on every axis".into()));
                }
            }
            Self::Ball { center, radius } => {
                if center.is_empty() || !(*radius > 0.0) {
                    return Err(Error::InvalidInput("ball needs a centre and positive radius".into()));
                }
            }
        }
        Ok(())
    }
}

/// Closed manifolds handled by the index-sum pipeline.
#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum ClosedManifold {
    /// Unit sphere in `R³`; fields are ambient and projected tangentially.
    Sphere2,
    /// `R² / (2π Z)²`; fields are given in the periodic chart.
    FlatTorus,
    /// Torus of revolution with radii `major > minor`, chart `(u, v)`.
    EmbeddedTorus { major: f64, minor: f64 },
}

impl ClosedManifold {
    /// Name of the matching triangulation in the topology catalog.
    pub fn catalog_name(&self) -> &'static str {
        match self {
            Self::Sphere2 => "S2",
            Self::FlatTorus | Self::EmbeddedTorus { .. } => "T2",
        }
    }

    /// Dimension of the vectors the field must produce.
    pub fn field_dim(&self) -> usize {
        match self {
            Self::Sphere2 => 3,
            _ => 2,
        }
    }
}

/// Stereographic pair on the sphere `‖x − center‖ = radius` in `R^{d+1}`.
///
/// Chart 0 projects from the "north" pole `center + radius·R e_d` and covers
/// the southern hemisphere inside `‖y‖ ≤ 1`; chart 1 projects from the south
/// pole. `rotation` turns the whole atlas.
#[derive(Debug, Clone, PartialEq)]
pub struct SphereAtlas {
    pub center: Vec<f64>,
    pub radius: f64,
    pub rotation: DMatrix<f64>,
}

impl SphereAtlas {
    pub fn new(center: Vec<f64>, radius: f64) -> Self {
        let n = center.len();
        Self {
            center,
            radius,
            rotation: DMatrix::identity(n, n),
        }
    }

    /// The same sphere with the atlas turned by a seeded random rotation.
    pub fn rotated(&self, seed: u64) -> Self {
        let n = self.center.len();
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let m = DMatrix::from_fn(n, n, |_, _| rng.gen_range(-1.0..1.0));
        let qr = m.qr();
        let mut q = qr.q();
        if q.determinant() < 0.0 {
            let col = -q.column(0).clone_owned();
            q.set_column(0, &col);
        }
        Self {
            center: self.center.clone(),
            radius: self.radius,
            rotation: q,
        }
    }

    /// Dimension of the sphere (chart dimension).
    pub fn chart_dim(&self) -> usize {
        self.center.len() - 1
    }

    fn pole_sign(chart: usize) -> f64 {
        if chart == 0 {
            1.0
        } else {
            -1.0
        }
    }

    /// Unit-sphere point in the unrotated frame, and its Jacobian columns.
    fn unit_point(chart: usize, y: &[f64]) -> (Vec<f64>, Vec<Vec<f64>>) {
        let d = y.len();
        let r2: f64 = y.iter().map(|v| v * v).sum();
        let denom = 1.0 + r2;
        let s = Self::pole_sign(chart);
        let mut point: Vec<f64> = y.iter().map(|v| 2.0 * v / denom).collect();
        point.push(s * (r2 - 1.0) / denom);
        let columns = (0..d)
            .map(|j| {
                let mut col: Vec<f64> = (0..d)
                    .map(|i| {
                        let delta = if i == j { 2.0 / denom } else { 0.0 };
                        delta - 4.0 * y[i] * y[j] / (denom * denom)
                    })
                    .collect();
                col.push(s * 4.0 * y[j] / (denom * denom));
                col
            })
            .collect();
        (point, columns)
    }

    pub fn to_ambient(&self, chart: usize, y: &[f64]) -> Vec<f64> {
        let (u, _) = Self::unit_point(chart, y);
        let ru = &self.rotation * nalgebra::DVector::from_vec(u);
        self.center
            .iter()
            .zip(ru.iter())
            .map(|(c, v)| c + self.radius * v)
            .collect()
    }

    /// Tangent vectors `∂x/∂y_j`.
    pub fn tangents(&self, chart: usize, y: &[f64]) -> Vec<Vec<f64>> {
        let (_, cols) = Self::unit_point(chart, y);
        cols.into_iter()
            .map(|c| {
                let rc = &self.rotation * nalgebra::DVector::from_vec(c);
                rc.iter().map(|v| self.radius * v).collect()
            })
            .collect()
    }

    pub fn to_chart(&self, chart: usize, x: &[f64]) -> Vec<f64> {
        let rel = nalgebra::DVector::from_iterator(
            x.len(),
            x.iter().zip(&self.center).map(|(a, c)| (a - c) / self.radius),
        );
        let u = self.rotation.transpose() * rel;
        let d = self.chart_dim();
        let s = Self::pole_sign(chart);
        let denom = 1.0 - s * u[d];
        (0..d).map(|i| u[i] / denom).collect()
    }

    /// Coordinate of a sphere point along the rotated pole axis, in units of
    /// the radius: negative where chart 0 is the more central chart, and zero
    /// on the equator where both charts have `‖y‖ = 1`.
    pub fn height(&self, x: &[f64]) -> f64 {
        let d = self.chart_dim();
        (0..=d)
            .map(|i| self.rotation[(i, d)] * (x[i] - self.center[i]))
            .sum::<f64>()
            / self.radius
    }

    /// Outward unit normal at an ambient point.
    pub fn normal(&self, x: &[f64]) -> Vec<f64> {
        let rel: Vec<f64> = x.iter().zip(&self.center).map(|(a, c)| a - c).collect();
        let r = norm(&rel);
        rel.into_iter().map(|v| v / r).collect()
    }

    /// Coordinates of the tangential part of `field` in chart `chart`:
    /// `c = Dgᵀ φ∥ / (ρλ)²` on the conformal chart.
    pub fn chart_field(&self, chart: usize, field: Arc<dyn VectorField>) -> FnField {
        let atlas = self.clone();
        FnField::new(self.chart_dim(), move |y| {
            let x = atlas.to_ambient(chart, y);
            let phi = field.eval(&x);
            let m = atlas.normal(&x);
            let along = dot(&phi, &m);
            let tangential: Vec<f64> = phi.iter().zip(&m).map(|(p, n)| p - along * n).collect();
            atlas
                .tangents(chart, y)
                .iter()
                .map(|t| dot(t, &tangential) / dot(t, t))
                .collect()
        })
    }
}

/// The periodic chart `[seam, seam + 2π)²` of a torus.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TorusChart {
    pub seam: f64,
}

impl TorusChart {
    pub const PERIOD: f64 = 2.0 * PI;

    pub fn wrap(&self, x: &[f64]) -> Vec<f64> {
        x.iter()
            .map(|v| self.seam + (v - self.seam).rem_euclid(Self::PERIOD))
            .collect()
    }
}

/// Checks `φ(x + 2π e_μ) = φ(x)` at a few points.
pub fn check_periodic<F: VectorField + ?Sized>(field: &F) -> Result<()> {
    let probes = [[0.3, 1.7], [2.9, -0.4], [-1.2, 4.4]];
    for p in probes {
        let base = field.eval(&p);
        for mu in 0..2 {
            let mut q = p;
            q[mu] += TorusChart::PERIOD;
            let shifted = field.eval(&q);
            let scale = norm(&base).max(1.0);
            if distance(&base, &shifted) > 1e-9 * scale {
                return Err(Error::InvalidInput(
                    "torus field is not 2π-periodic in the chart coordinates".into(),
                ));
            }
        }
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::field::PolynomialField;

    #[test]
    fn atlas_round_trip_and_conformality() {
        let atlas = SphereAtlas::new(vec![0.5, -1.0, 2.0], 2.0).rotated(7);
        for chart in 0..2 {
            let y = [0.3, -0.8];
            let x = atlas.to_ambient(chart, &y);
            assert!((distance(&x, &atlas.center) - 2.0).abs() < 1e-13);
            let back = atlas.to_chart(chart, &x);
            assert!(distance(&back, &y) < 1e-13);
            let t = atlas.tangents(chart, &y);
            assert!(dot(&t[0], &t[1]).abs() < 1e-13);
            assert!((dot(&t[0], &t[0]) - dot(&t[1], &t[1])).abs() < 1e-13);
            // tangents really are derivatives of the chart map
            let mut yp = y;
            yp[0] += 1e-6;
            let xp = atlas.to_ambient(chart, &yp);
            for i in 0..3 {
                assert!(((xp[i] - x[i]) / 1e-6 - t[0][i]).abs() < 1e-5);
            }
        }
    }

    #[test]
    fn charts_cover_opposite_hemispheres() {
        let atlas = SphereAtlas::new(vec![0.0; 3], 1.0);
        assert_eq!(atlas.to_ambient(0, &[0.0, 0.0]), vec![0.0, 0.0, -1.0]);
        assert_eq!(atlas.to_ambient(1, &[0.0, 0.0]), vec![0.0, 0.0, 1.0]);
    }

    #[test]
    fn chart_field_reproduces_tangential_part() {
        let atlas = SphereAtlas::new(vec![0.0; 3], 1.0);
        let field: Arc<dyn VectorField> = Arc::new(PolynomialField::constant(&[0.0, 0.0, 1.0]));
        let cf = atlas.chart_field(0, field);
        let y = [0.4, 0.1];
        let c = cf.eval(&y);
        let t = atlas.tangents(0, &y);
        let x = atlas.to_ambient(0, &y);
        let pushed: Vec<f64> = (0..3).map(|i| c[0] * t[0][i] + c[1] * t[1][i]).collect();
        let expected: Vec<f64> = (0..3).map(|i| [0.0, 0.0, 1.0][i] - x[2] * x[i]).collect();
        assert!(distance(&pushed, &expected) < 1e-14);
    }

    #[test]
    fn domain_depth() {
        let ball = ChartDomain::unit_ball(2);
        assert!((ball.depth(&[0.5, 0.0]) - 0.5).abs() < 1e-15);
        assert!(ball.depth(&[2.0, 0.0]) < 0.0);
        let b = ChartDomain::Box {
            lo: vec![0.0, 0.0],
            hi: vec![2.0, 1.0],
        };
        assert!((b.depth(&[1.0, 0.25]) - 0.25).abs() < 1e-15);
    }

    #[test]
    fn periodicity_check() {
        assert!(check_periodic(&FnField::torus_gradient()).is_ok());
        assert!(check_periodic(&PolynomialField::identity(2)).is_err());
    }
}
