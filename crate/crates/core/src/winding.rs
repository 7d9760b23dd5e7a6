//! Winding numbers as integrals of the unit-vector Chern form
//!
//! ```text
//! Ω = 1/((N−1)! A(S^{N−1})) ε_{a_1…a_N} n_{a_1} dn_{a_2} ∧ ⋯ ∧ dn_{a_N},   n = φ/‖φ‖
//! ```
//!
//! over spheres, plus two brute-force degree oracles that never touch `Ω`.

use std::f64::consts::PI;

use nalgebra::{DMatrix, DVector};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::field::VectorField;
use crate::numeric::{compensated_sum, norm, unit_sphere_area};
use crate::quadrature::SphereQuadrature;

/// Minimum of `‖φ‖` on a sphere below which the form is considered singular.
pub const ZERO_ON_SPHERE_THRESHOLD: f64 = 1e-8;

/// Largest accepted distance between the raw integral and its rounding.
pub const QUANTIZATION_THRESHOLD: f64 = 0.1;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct WindingResult {
    pub raw: f64,
    pub rounded: i64,
    pub residual: f64,
    pub center: Vec<f64>,
    pub radius: f64,
}

/// `dn·t = (I − n nᵀ) J t / ‖φ‖`.
fn unit_differential(n: &DVector<f64>, jac: &DMatrix<f64>, norm_phi: f64, t: &[f64]) -> DVector<f64> {
    let jt = jac * DVector::from_column_slice(t);
    let along = n.dot(&jt);
    (jt - n * along) / norm_phi
}

/// Value of `Ω` at `x` on the ordered tangent vectors `tangents`.
///
/// Contracting the ε-symbol against the wedge reduces the form to
/// `det[n, dn·t_1, …, dn·t_{N−1}] / A(S^{N−1})`.
pub fn chern_form_value<F: VectorField + ?Sized>(field: &F, x: &[f64], tangents: &[Vec<f64>]) -> Result<f64> {
    let dim = field.dim();
    if x.len() != dim {
        return Err(Error::DimensionMismatch { left: x.len(), right: dim });
    }
    if tangents.len() + 1 != dim {
        return Err(Error::DimensionMismatch {
            left: tangents.len(),
            right: dim - 1,
        });
    }
    let phi = field.eval(x);
    let norm_phi = norm(&phi);
    if norm_phi < 1e-12 {
        return Err(Error::ZeroField {
            point: x.to_vec(),
            norm: norm_phi,
        });
    }
    let jac = field.jacobian(x);
    Ok(form_on_frame(&phi, norm_phi, &jac, tangents) / unit_sphere_area(dim))
}

fn form_on_frame(phi: &[f64], norm_phi: f64, jac: &DMatrix<f64>, tangents: &[Vec<f64>]) -> f64 {
    let dim = phi.len();
    let n = DVector::from_iterator(dim, phi.iter().map(|p| p / norm_phi));
    let mut m = DMatrix::zeros(dim, dim);
    m.set_column(0, &n);
    for (j, t) in tangents.iter().enumerate() {
        m.set_column(j + 1, &unit_differential(&n, jac, norm_phi, t));
    }
    m.determinant()
}

/// Integrates `Ω` over the sphere `‖x − center‖ = radius` (outward orientation)
/// and certifies the result as an integer.
pub fn winding_number<F: VectorField + ?Sized>(
    field: &F,
    center: &[f64],
    radius: f64,
    quadrature: &SphereQuadrature,
) -> Result<WindingResult> {
    let raw = winding_integral(field, center, radius, quadrature)?;
    let rounded = raw.round();
    let residual = (raw - rounded).abs();
    if residual >= QUANTIZATION_THRESHOLD {
        return Err(Error::NotQuantized { raw, residual });
    }
    Ok(WindingResult {
        raw,
        rounded: rounded as i64,
        residual,
        center: center.to_vec(),
        radius,
    })
}

/// The raw (unrounded) value of the sphere integral of `Ω`.
pub fn winding_integral<F: VectorField + ?Sized>(
    field: &F,
    center: &[f64],
    radius: f64,
    quadrature: &SphereQuadrature,
) -> Result<f64> {
    let dim = field.dim();
    if center.len() != dim || quadrature.dim() != dim {
        return Err(Error::DimensionMismatch {
            left: center.len().max(quadrature.dim()),
            right: dim,
        });
    }
    if !(radius > 0.0) {
        return Err(Error::InvalidInput(format!("sphere radius must be positive, got {radius}")));
    }
    let scale = radius.powi(dim as i32 - 1);
    let contributions: Vec<(f64, f64)> = (0..quadrature.len())
        .into_par_iter()
        .map(|k| {
            let node = quadrature.node(k);
            let x: Vec<f64> = center
                .iter()
                .zip(&node.point)
                .map(|(c, s)| c + radius * s)
                .collect();
            let phi = field.eval(&x);
            let norm_phi = norm(&phi);
            if norm_phi < ZERO_ON_SPHERE_THRESHOLD {
                return (0.0, norm_phi);
            }
            let jac = field.jacobian(&x);
            let value = form_on_frame(&phi, norm_phi, &jac, &node.tangents);
            (node.weight * scale * value, norm_phi)
        })
        .collect();
    let min_norm = contributions.iter().map(|c| c.1).fold(f64::INFINITY, f64::min);
    if min_norm < ZERO_ON_SPHERE_THRESHOLD {
        return Err(Error::ZeroOnSphere { min_norm });
    }
    Ok(compensated_sum(contributions.iter().map(|c| c.0)) / unit_sphere_area(dim))
}

/// Like [`winding_number`], but only accepts a result that survives one
/// refinement (4× nodes on the circle, 2× per angle otherwise) with the same
/// integer; refines up to three times before giving up.
pub fn winding_number_refining<F: VectorField + ?Sized>(
    field: &F,
    center: &[f64],
    radius: f64,
    quadrature: &SphereQuadrature,
) -> Result<WindingResult> {
    let factor = if quadrature.dim() == 2 { 4 } else { 2 };
    let mut q = quadrature.clone();
    let mut last = winding_number(field, center, radius, &q);
    for _ in 0..3 {
        let finer = q.refined(factor);
        let next = winding_number(field, center, radius, &finer);
        match (&last, &next) {
            (Ok(a), Ok(b)) if a.rounded == b.rounded => return next,
            (_, Err(Error::ZeroOnSphere { .. })) => return next,
            _ => {}
        }
        q = finer;
        last = next;
    }
    last
}

/// Planar degree by summing branch-corrected increments of `atan2(φ², φ¹)`.
pub fn oracle_degree_anglesum<F: VectorField + ?Sized>(
    field: &F,
    center: &[f64],
    radius: f64,
    samples: usize,
) -> Result<i64> {
    if field.dim() != 2 || center.len() != 2 {
        return Err(Error::DimensionMismatch {
            left: field.dim(),
            right: 2,
        });
    }
    if samples < 3 {
        return Err(Error::InvalidInput("angle-sum oracle needs at least 3 samples".into()));
    }
    let angle_at = |k: usize| -> Result<f64> {
        let t = 2.0 * PI * k as f64 / samples as f64;
        let p = [center[0] + radius * t.cos(), center[1] + radius * t.sin()];
        let v = field.eval(&p);
        let r = norm(&v);
        if r < ZERO_ON_SPHERE_THRESHOLD {
            return Err(Error::ZeroOnSphere { min_norm: r });
        }
        Ok(v[1].atan2(v[0]))
    };
    let first = angle_at(0)?;
    let mut prev = first;
    let mut total = 0.0;
    for k in 1..=samples {
        let a = if k == samples { first } else { angle_at(k)? };
        let mut d = a - prev;
        while d > PI {
            d -= 2.0 * PI;
        }
        while d <= -PI {
            d += 2.0 * PI;
        }
        if d.abs() > PI / 2.0 {
            return Err(Error::Undersampled { jump: d });
        }
        total += d;
        prev = a;
    }
    Ok((total / (2.0 * PI)).round() as i64)
}

/// Degree of `n` restricted to a sphere as the signed count of preimages of a
/// regular value `direction`.
///
/// The sphere is triangulated by radially projecting the surface of the cube
/// `[−1, 1]^N`, each facet split into `mesh^{N−1}` cells and each cell into
/// `(N−1)!` Kuhn simplices. A simplex whose image cone contains `direction`
/// contributes the product of the orientation signs of the simplex and of its
/// image.
pub fn oracle_degree_preimage<F: VectorField + ?Sized>(
    field: &F,
    center: &[f64],
    radius: f64,
    direction: &[f64],
    mesh: usize,
) -> Result<i64> {
    let dim = field.dim();
    if center.len() != dim || direction.len() != dim {
        return Err(Error::DimensionMismatch {
            left: center.len(),
            right: dim,
        });
    }
    if mesh == 0 {
        return Err(Error::InvalidInput("preimage oracle needs mesh >= 1".into()));
    }
    let simplices = cube_surface_simplices(dim, mesh);
    let images: Vec<Vec<Vec<f64>>> = simplices
        .par_iter()
        .map(|simplex| {
            simplex
                .iter()
                .map(|v| {
                    let len = norm(v);
                    let x: Vec<f64> = center.iter().zip(v).map(|(c, vi)| c + radius * vi / len).collect();
                    let phi = field.eval(&x);
                    let r = norm(&phi);
                    if r < ZERO_ON_SPHERE_THRESHOLD {
                        Err(Error::ZeroOnSphere { min_norm: r })
                    } else {
                        Ok(phi.iter().map(|p| p / r).collect())
                    }
                })
                .collect::<Result<Vec<Vec<f64>>>>()
        })
        .collect::<Result<_>>()?;

    let mut rng = ChaCha8Rng::seed_from_u64(0x5eed);
    let attempts = 5;
    let mut dir = normalized(direction)?;
    for _ in 0..attempts {
        if let Some(deg) = count_preimages(&simplices, &images, &dir) {
            return Ok(deg);
        }
        let perturbed: Vec<f64> = (0..dim).map(|_| rng.gen_range(-1.0..1.0)).collect();
        dir = normalized(&perturbed)?;
    }
    Err(Error::NoRegularDirection { attempts })
}

fn normalized(v: &[f64]) -> Result<Vec<f64>> {
    let r = norm(v);
    if r == 0.0 {
        return Err(Error::InvalidInput("direction must be non-zero".into()));
    }
    Ok(v.iter().map(|x| x / r).collect())
}

/// Returns `None` if `direction` lies on the boundary of some image cone.
fn count_preimages(simplices: &[Vec<Vec<f64>>], images: &[Vec<Vec<f64>>], direction: &[f64]) -> Option<i64> {
    let dim = direction.len();
    let d = DVector::from_column_slice(direction);
    let mut degree = 0i64;
    for (simplex, image) in simplices.iter().zip(images) {
        let m = DMatrix::from_fn(dim, dim, |a, k| image[k][a]);
        let det_image = m.determinant();
        if det_image.abs() < 1e-300 {
            continue;
        }
        let Some(lambda) = m.lu().solve(&d) else {
            continue;
        };
        let scale = lambda.iter().map(|l| l.abs()).sum::<f64>();
        if lambda.iter().any(|l| l.abs() <= 1e-12 * scale) {
            // direction on a cone face: only matters if the other weights are positive
            if lambda.iter().all(|&l| l >= -1e-12 * scale) {
                return None;
            }
            continue;
        }
        if lambda.iter().all(|&l| l > 0.0) {
            let dom = DMatrix::from_fn(dim, dim, |a, k| simplex[k][a]);
            let s_dom = dom.determinant().signum();
            degree += (s_dom * det_image.signum()) as i64;
        }
    }
    Some(degree)
}

/// Kuhn triangulation of the surface of `[−1, 1]^dim`.
fn cube_surface_simplices(dim: usize, mesh: usize) -> Vec<Vec<Vec<f64>>> {
    let free = dim - 1;
    let perms = permutations(free);
    let step = 2.0 / mesh as f64;
    let mut out = Vec::new();
    for axis in 0..dim {
        for sign in [-1.0, 1.0] {
            let free_axes: Vec<usize> = (0..dim).filter(|&a| a != axis).collect();
            let cells = mesh.pow(free as u32);
            for cell in 0..cells {
                let mut idx = cell;
                let mut corner = vec![0.0; dim];
                corner[axis] = sign;
                for &fa in &free_axes {
                    corner[fa] = -1.0 + step * (idx % mesh) as f64;
                    idx /= mesh;
                }
                for perm in &perms {
                    let mut v = corner.clone();
                    let mut simplex = vec![v.clone()];
                    for &p in perm {
                        v[free_axes[p]] += step;
                        simplex.push(v.clone());
                    }
                    out.push(simplex);
                }
            }
        }
    }
    out
}

fn permutations(n: usize) -> Vec<Vec<usize>> {
    if n == 0 {
        return vec![vec![]];
    }
    let mut out = Vec::new();
    for p in permutations(n - 1) {
        for pos in 0..=p.len() {
            let mut q = p.clone();
            q.insert(pos, n - 1);
            out.push(q);
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::field::{ComplexFactor, FnField, PolynomialField};

    fn square() -> PolynomialField {
        PolynomialField::complex_product(&[
            ComplexFactor::Holomorphic((0.0, 0.0)),
            ComplexFactor::Holomorphic((0.0, 0.0)),
        ])
    }

    #[test]
    fn chern_form_of_identity_on_unit_circle() {
        let f = PolynomialField::identity(2);
        let t = 0.9f64;
        let v = chern_form_value(&f, &[t.cos(), t.sin()], &[vec![-t.sin(), t.cos()]]).unwrap();
        assert!((v - 1.0 / (2.0 * PI)).abs() < 1e-15);
    }

    #[test]
    fn chern_form_of_square_field() {
        // n has angle 2θ, so dn·t = 2·(unit tangent to n) and Ω(t) = 2/(2π)
        let t = 0.3f64;
        let v = chern_form_value(&square(), &[t.cos(), t.sin()], &[vec![-t.sin(), t.cos()]]).unwrap();
        assert!((v - 1.0 / PI).abs() < 1e-14);
    }

    #[test]
    fn chern_form_vanishes_on_repeated_tangent() {
        let f = PolynomialField::quaternion_square();
        let t = vec![0.1, 0.2, -0.3, 0.5];
        let v = chern_form_value(&f, &[0.3, 0.4, 0.5, 0.6], &[t.clone(), t, vec![1.0, 0.0, 0.0, 0.0]]).unwrap();
        assert!(v.abs() < 1e-15);
    }

    #[test]
    fn chern_form_rejects_zero() {
        let f = PolynomialField::identity(2);
        assert!(matches!(
            chern_form_value(&f, &[0.0, 0.0], &[vec![1.0, 0.0]]),
            Err(Error::ZeroField { .. })
        ));
    }

    #[test]
    fn identity_winds_once() {
        for dim in [2, 4] {
            let q = SphereQuadrature::default_for(dim, if dim == 4 { 0.25 } else { 1.0 });
            let w = winding_number(&PolynomialField::identity(dim), &vec![0.0; dim], 1.0, &q).unwrap();
            assert_eq!(w.rounded, 1);
            assert!(w.residual < 1e-6);
        }
    }

    #[test]
    fn square_winds_twice_and_constant_never() {
        let q = SphereQuadrature::default_for(2, 1.0);
        assert_eq!(winding_number(&square(), &[0.0, 0.0], 1.0, &q).unwrap().rounded, 2);
        let c = PolynomialField::constant(&[1.0, 0.0]);
        assert_eq!(winding_number(&c, &[0.3, 0.1], 2.0, &q).unwrap().rounded, 0);
    }

    #[test]
    fn zero_on_sphere_is_rejected() {
        let q = SphereQuadrature::default_for(2, 1.0);
        let f = PolynomialField::identity(2);
        assert!(matches!(
            winding_number(&f, &[1.0, 0.0], 1.0, &q),
            Err(Error::ZeroOnSphere { .. })
        ));
    }

    #[test]
    fn coarse_quadrature_is_refused() {
        // high-frequency field that a 4-node rule cannot resolve
        let f = PolynomialField::complex_product(&[ComplexFactor::Holomorphic((0.9, 0.0))]);
        let q = SphereQuadrature::new(2, 1, 4);
        match winding_number(&f, &[0.0, 0.0], 1.0, &q) {
            Err(Error::NotQuantized { .. }) => {}
            Ok(w) => assert!(w.residual < QUANTIZATION_THRESHOLD),
            Err(e) => panic!("unexpected error {e}"),
        }
        let w = winding_number_refining(&f, &[0.0, 0.0], 1.0, &q).unwrap();
        assert_eq!(w.rounded, 1);
    }

    #[test]
    fn anglesum_oracle_examples() {
        assert_eq!(oracle_degree_anglesum(&PolynomialField::identity(2), &[0.0, 0.0], 1.0, 1024).unwrap(), 1);
        assert_eq!(oracle_degree_anglesum(&square(), &[0.0, 0.0], 1.0, 1024).unwrap(), 2);
        let saddle = PolynomialField::linear(&DMatrix::from_row_slice(2, 2, &[1.0, 0.0, 0.0, -1.0]));
        assert_eq!(oracle_degree_anglesum(&saddle, &[0.0, 0.0], 1.0, 1024).unwrap(), -1);
    }

    #[test]
    fn anglesum_detects_undersampling() {
        let f = PolynomialField::complex_product(&[ComplexFactor::Holomorphic((0.0, 0.0)); 5]);
        assert!(matches!(
            oracle_degree_anglesum(&f, &[0.0, 0.0], 1.0, 8),
            Err(Error::Undersampled { .. })
        ));
    }

    #[test]
    fn preimage_oracle_examples() {
        let dir2 = [0.6, 0.8];
        assert_eq!(oracle_degree_preimage(&PolynomialField::identity(2), &[0.0, 0.0], 1.0, &dir2, 64).unwrap(), 1);
        assert_eq!(oracle_degree_preimage(&square(), &[0.0, 0.0], 1.0, &dir2, 64).unwrap(), 2);
        let dir4 = [0.3, -0.5, 0.7, 0.4];
        assert_eq!(
            oracle_degree_preimage(&PolynomialField::identity(4), &[0.0; 4], 1.0, &dir4, 4).unwrap(),
            1
        );
        assert_eq!(
            oracle_degree_preimage(&PolynomialField::constant(&[1.0, 0.0, 0.0, 0.0]), &[0.0; 4], 1.0, &dir4, 4).unwrap(),
            0
        );
    }

    #[test]
    fn quaternion_square_has_degree_two_at_two_resolutions() {
        let f = PolynomialField::quaternion_square();
        let dir = [0.3, -0.5, 0.7, 0.4];
        for mesh in [6, 10] {
            assert_eq!(oracle_degree_preimage(&f, &[0.0; 4], 1.0, &dir, mesh).unwrap(), 2);
        }
    }

    #[test]
    fn constant_field_has_no_preimages_of_its_own_value() {
        let f = PolynomialField::constant(&[1.0, 0.0]);
        assert_eq!(oracle_degree_preimage(&f, &[0.0, 0.0], 1.0, &[1.0, 0.0], 8).unwrap(), 0);
    }

    #[test]
    fn finite_difference_fallback_agrees() {
        let f = FnField::new(2, |x| vec![x[0] * x[0] - x[1] * x[1], 2.0 * x[0] * x[1]]);
        let q = SphereQuadrature::default_for(2, 1.0);
        let w = winding_number(&f, &[0.0, 0.0], 0.5, &q).unwrap();
        assert_eq!(w.rounded, 2);
        assert!(w.residual < 1e-6);
    }
}
