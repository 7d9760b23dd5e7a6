//! Product quadrature on unit spheres `S^{N-1}` in hyperspherical angles.
//!
//! Angles `θ_1 … θ_{N-2} ∈ [0, π]` use Gauss–Legendre, the azimuth
//! `θ_{N-1} ∈ [0, 2π)` uses the trapezoid rule. A point is
//!
//! ```text
//! s_i     = sin θ_1 ⋯ sin θ_i · cos θ_{i+1}   (i < N-1)
//! s_{N-1} = sin θ_1 ⋯ sin θ_{N-1}
//! ```

use std::f64::consts::PI;

use crate::numeric::{det, gauss_legendre_interval, unit_sphere_area};

#[derive(Debug, Clone, PartialEq)]
pub struct SphereQuadrature {
    dim: usize,
    polar: Vec<(Vec<f64>, Vec<f64>)>,
    azimuth: usize,
}

/// A node with its area weight and an orthonormal tangent basis, oriented so
/// that `det[s, e_1, …, e_{N-1}] > 0` (outward normal first).
#[derive(Debug, Clone, PartialEq)]
pub struct SphereNode {
    pub point: Vec<f64>,
    pub weight: f64,
    pub tangents: Vec<Vec<f64>>,
}

impl SphereQuadrature {
    /// Sphere `S^{dim-1}` in `R^dim` with `polar` Gauss–Legendre nodes per
    /// polar angle and `azimuth` trapezoid nodes.
    pub fn new(dim: usize, polar: usize, azimuth: usize) -> Self {
        assert!(dim >= 2, "sphere quadrature needs dim >= 2");
        assert!(polar >= 1 && azimuth >= 3, "degenerate sphere quadrature");
        let polar = (0..dim - 2)
            .map(|_| gauss_legendre_interval(polar, 0.0, PI))
            .collect();
        Self {
            dim,
            polar,
            azimuth,
        }
    }

    /// Defaults: 512 trapezoid nodes on the circle, 48 × 96 on `S²`,
    /// 48 × 48 × 96 on `S³`, scaled by `scale`.
    pub fn default_for(dim: usize, scale: f64) -> Self {
        let s = |n: f64| ((n * scale).round() as usize).max(4);
        match dim {
            2 => Self::new(2, 1, s(512.0)),
            _ => Self::new(dim, s(48.0), s(96.0)),
        }
    }

    /// Same layout with `factor` times as many nodes per angle.
    pub fn refined(&self, factor: usize) -> Self {
        let polar = self.polar.first().map_or(1, |p| p.0.len() * factor);
        Self::new(self.dim, polar, self.azimuth * factor)
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn len(&self) -> usize {
        self.polar.iter().map(|p| p.0.len()).product::<usize>() * self.azimuth
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn scheme(&self) -> String {
        let mut parts: Vec<String> = self.polar.iter().map(|p| format!("GL{}", p.0.len())).collect();
        parts.push(format!("T{}", self.azimuth));
        parts.join("x")
    }

    /// The area `2π^{N/2}/Γ(N/2)` the weights should reproduce.
    pub fn exact_area(&self) -> f64 {
        unit_sphere_area(self.dim)
    }

    /// Hyperspherical angles of node `index` and its weight in angle space
    /// (without the area element).
    pub fn angles(&self, index: usize) -> (Vec<f64>, f64) {
        let mut rest = index;
        let mut angles = Vec::with_capacity(self.dim - 1);
        let mut weight = 1.0;
        for (nodes, weights) in &self.polar {
            let k = rest % nodes.len();
            rest /= nodes.len();
            angles.push(nodes[k]);
            weight *= weights[k];
        }
        let k = rest % self.azimuth;
        angles.push(2.0 * PI * k as f64 / self.azimuth as f64);
        weight *= 2.0 * PI / self.azimuth as f64;
        (angles, weight)
    }

    pub fn node(&self, index: usize) -> SphereNode {
        let (angles, mut weight) = self.angles(index);
        let point = hyperspherical_point(&angles);
        let mut tangents = Vec::with_capacity(self.dim - 1);
        for j in 0..self.dim - 1 {
            let t = hyperspherical_derivative(&angles, j);
            let len = t.iter().map(|x| x * x).sum::<f64>().sqrt();
            weight *= len;
            tangents.push(t.into_iter().map(|x| x / len).collect::<Vec<_>>());
        }
        let mut rows = vec![point.clone()];
        rows.extend(tangents.iter().cloned());
        if det(&rows) < 0.0 {
            for x in tangents[0].iter_mut() {
                *x = -*x;
            }
        }
        SphereNode {
            point,
            weight,
            tangents,
        }
    }

    pub fn nodes(&self) -> impl Iterator<Item = SphereNode> + '_ {
        (0..self.len()).map(move |k| self.node(k))
    }
}

pub fn hyperspherical_point(angles: &[f64]) -> Vec<f64> {
    let n = angles.len() + 1;
    let mut s = vec![0.0; n];
    let mut prod = 1.0;
    for i in 0..n - 1 {
        s[i] = prod * angles[i].cos();
        prod *= angles[i].sin();
    }
    s[n - 1] = prod;
    s
}

/// `∂s/∂θ_j`.
pub fn hyperspherical_derivative(angles: &[f64], j: usize) -> Vec<f64> {
    let n = angles.len() + 1;
    let mut d = vec![0.0; n];
    let mut prod = 1.0;
    for i in 0..n {
        let last = i == n - 1;
        let tail = if last { 1.0 } else { angles[i].cos() };
        let dtail = if last { 0.0 } else { -angles[i].sin() };
        if i < j {
            d[i] = 0.0;
        } else if i == j {
            d[i] = prod * dtail;
        } else {
            // product contains sin θ_j, replaced by cos θ_j
            let mut p = 1.0;
            for (k, &a) in angles.iter().enumerate().take(i) {
                p *= if k == j { a.cos() } else { a.sin() };
            }
            d[i] = p * tail;
        }
        if !last {
            prod *= angles[i].sin();
        }
    }
    d
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::numeric::compensated_sum;

    #[test]
    fn weights_sum_to_area() {
        for (dim, q) in [
            (2, SphereQuadrature::new(2, 1, 64)),
            (3, SphereQuadrature::new(3, 24, 48)),
            (4, SphereQuadrature::new(4, 16, 16, )),
            (5, SphereQuadrature::new(5, 12, 12)),
        ] {
            let total = compensated_sum(q.nodes().map(|n| n.weight));
            assert!(
                (total - unit_sphere_area(dim)).abs() < 1e-10,
                "dim {dim}: {total}"
            );
        }
    }

    #[test]
    fn linear_functions_integrate_to_zero() {
        for q in [SphereQuadrature::new(3, 24, 48), SphereQuadrature::new(4, 16, 32)] {
            for axis in 0..q.dim() {
                let s = compensated_sum(q.nodes().map(|n| n.weight * n.point[axis]));
                assert!(s.abs() < 1e-8);
            }
        }
    }

    #[test]
    fn nodes_are_unit_with_oriented_orthonormal_tangents() {
        let q = SphereQuadrature::new(4, 5, 7);
        for node in q.nodes() {
            assert!((crate::numeric::norm(&node.point) - 1.0).abs() < 1e-14);
            let mut rows = vec![node.point.clone()];
            rows.extend(node.tangents.iter().cloned());
            assert!((det(&rows) - 1.0).abs() < 1e-12);
        }
    }

    #[test]
    fn derivative_matches_finite_difference() {
        let angles = [0.4, 1.9, 2.7];
        for j in 0..3 {
            let mut p = angles;
            let mut m = angles;
            p[j] += 1e-6;
            m[j] -= 1e-6;
            let (sp, sm) = (hyperspherical_point(&p), hyperspherical_point(&m));
            let d = hyperspherical_derivative(&angles, j);
            for i in 0..4 {
                assert!(((sp[i] - sm[i]) / 2e-6 - d[i]).abs() < 1e-8);
            }
        }
    }
}
