//! The Euler density `Λ = Pf(Ω/2π)` from closed-form curvature, and its
//! integral over the catalog manifolds.
//!
//! Curvature is stored as `R^{ab}_{cd} = Ω^{ab}(e_c, e_d)` in an orthonormal
//! frame. The top-degree part of `Pf(Ω)` is assembled from ordinary
//! Pfaffians: for each perfect matching `{c_1 d_1, …, c_m d_m}` of the frame
//! indices, the multilinear part of `Pf(Σ t_k R_{c_k d_k})` is extracted by
//! polarization and weighted by the sign of the matching.

use std::f64::consts::PI;

use nalgebra::DMatrix;
use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::numeric::compensated_sum;
use crate::quadrature::SphereQuadrature;

pub const MAX_PFAFFIAN_SIZE: usize = 8;

/// Pfaffian by expansion along the first row, `Pf([[0, a], [−a, 0]]) = a`.
pub fn pfaffian(a: &DMatrix<f64>) -> Result<f64> {
    let n = a.nrows();
    if a.ncols() != n {
        return Err(Error::DimensionMismatch { left: n, right: a.ncols() });
    }
    if n % 2 == 1 {
        return Err(Error::OddSize(n));
    }
    if n > MAX_PFAFFIAN_SIZE {
        return Err(Error::UnsupportedDimension(n));
    }
    let scale = a.amax().max(1.0);
    let asym = (a + a.transpose()).amax();
    if asym > 1e-12 * scale {
        return Err(Error::NotAntisymmetric(asym));
    }
    let idx: Vec<usize> = (0..n).collect();
    Ok(pf_rec(a, &idx))
}

fn pf_rec(a: &DMatrix<f64>, idx: &[usize]) -> f64 {
    if idx.is_empty() {
        return 1.0;
    }
    let first = idx[0];
    let mut total = 0.0;
    for j in 1..idx.len() {
        let entry = a[(first, idx[j])];
        if entry == 0.0 {
            continue;
        }
        let rest: Vec<usize> = idx[1..].iter().enumerate().filter(|(k, _)| k + 1 != j).map(|(_, v)| *v).collect();
        let sign = if j % 2 == 1 { 1.0 } else { -1.0 };
        total += sign * entry * pf_rec(a, &rest);
    }
    total
}

/// Perfect matchings of `0..n` as ordered pair lists, with the sign of the
/// permutation `(c_1 d_1 c_2 d_2 …)`.
fn matchings(n: usize) -> Vec<(Vec<(usize, usize)>, f64)> {
    fn go(rest: &[usize], acc: &mut Vec<(usize, usize)>, out: &mut Vec<Vec<(usize, usize)>>) {
        if rest.is_empty() {
            out.push(acc.clone());
            return;
        }
        for j in 1..rest.len() {
            acc.push((rest[0], rest[j]));
            let remaining: Vec<usize> = rest[1..].iter().enumerate().filter(|(k, _)| k + 1 != j).map(|(_, v)| *v).collect();
            go(&remaining, acc, out);
            acc.pop();
        }
    }
    let mut out = Vec::new();
    go(&(0..n).collect::<Vec<_>>(), &mut Vec::new(), &mut out);
    out.into_iter()
        .map(|m| {
            let perm: Vec<usize> = m.iter().flat_map(|(c, d)| [*c, *d]).collect();
            (m, permutation_sign(&perm))
        })
        .collect()
}

fn permutation_sign(perm: &[usize]) -> f64 {
    let mut inversions = 0;
    for i in 0..perm.len() {
        for j in i + 1..perm.len() {
            if perm[i] > perm[j] {
                inversions += 1;
            }
        }
    }
    if inversions % 2 == 0 {
        1.0
    } else {
        -1.0
    }
}

/// Orthonormal-frame curvature `R^{ab}_{cd}` at one point.
#[derive(Debug, Clone, PartialEq)]
pub struct Curvature {
    dim: usize,
    values: Vec<f64>,
}

impl Curvature {
    pub fn zero(dim: usize) -> Self {
        Self {
            dim,
            values: vec![0.0; dim.pow(4)],
        }
    }

    /// `R^{ab}_{cd} = k (δ_ac δ_bd − δ_ad δ_bc)`, constant sectional curvature `k`.
    pub fn constant(dim: usize, k: f64) -> Self {
        let mut c = Self::zero(dim);
        for a in 0..dim {
            for b in 0..dim {
                if a != b {
                    c.set(a, b, a, b, k);
                }
            }
        }
        c
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    fn offset(&self, a: usize, b: usize, c: usize, d: usize) -> usize {
        ((a * self.dim + b) * self.dim + c) * self.dim + d
    }

    pub fn get(&self, a: usize, b: usize, c: usize, d: usize) -> f64 {
        self.values[self.offset(a, b, c, d)]
    }

    /// Sets `R^{ab}_{cd}` together with the three entries antisymmetry implies.
    pub fn set(&mut self, a: usize, b: usize, c: usize, d: usize, v: f64) {
        for (i, j, k, l, s) in [(a, b, c, d, v), (b, a, c, d, -v), (a, b, d, c, -v), (b, a, d, c, v)] {
            let o = self.offset(i, j, k, l);
            self.values[o] = s;
        }
    }

    /// The `so(N)` matrix `R^{··}_{cd}`.
    pub fn plane(&self, c: usize, d: usize) -> DMatrix<f64> {
        DMatrix::from_fn(self.dim, self.dim, |a, b| self.get(a, b, c, d))
    }

    /// Largest violation of `R^{ab}_{cd} = −R^{ba}_{cd} = −R^{ab}_{dc}`.
    pub fn antisymmetry_defect(&self) -> f64 {
        let n = self.dim;
        let mut worst = 0.0f64;
        for a in 0..n {
            for b in 0..n {
                for c in 0..n {
                    for d in 0..n {
                        let v = self.get(a, b, c, d);
                        worst = worst.max((v + self.get(b, a, c, d)).abs()).max((v + self.get(a, b, d, c)).abs());
                    }
                }
            }
        }
        worst
    }

    /// `Pf(Ω)` evaluated on the frame `(e_1, …, e_N)`.
    pub fn pfaffian_form(&self) -> Result<f64> {
        let n = self.dim;
        if n % 2 == 1 {
            return Err(Error::OddSize(n));
        }
        let m = n / 2;
        let mut total = 0.0;
        for (pairs, sign) in matchings(n) {
            let planes: Vec<DMatrix<f64>> = pairs.iter().map(|(c, d)| self.plane(*c, *d)).collect();
            let mut multilinear = 0.0;
            for subset in 1usize..(1 << m) {
                let mut sum = DMatrix::zeros(n, n);
                for (k, p) in planes.iter().enumerate() {
                    if subset >> k & 1 == 1 {
                        sum += p;
                    }
                }
                let parity = if (m - subset.count_ones() as usize).is_multiple_of(2) { 1.0 } else { -1.0 };
                multilinear += parity * pfaffian(&sum)?;
            }
            total += sign * multilinear;
        }
        Ok(total)
    }
}

/// Closed manifolds with closed-form curvature.
#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum CurvedManifold {
    /// Round `S^dim` of radius `radius`, chart: hyperspherical angles.
    Sphere { dim: usize, radius: f64 },
    /// `R² / (2π Z)²`, chart `(u, v)`.
    FlatTorus,
    /// Torus of revolution, chart `(u, v)`, `v` the angle around the tube.
    EmbeddedTorus { major: f64, minor: f64 },
}

impl CurvedManifold {
    pub fn dim(&self) -> usize {
        match self {
            Self::Sphere { dim, .. } => *dim,
            _ => 2,
        }
    }

    pub fn catalog_name(&self) -> Result<&'static str> {
        match self {
            Self::Sphere { dim: 2, .. } => Ok("S2"),
            Self::Sphere { dim: 4, .. } => Ok("S4"),
            Self::Sphere { dim, .. } => Err(Error::UnsupportedDimension(*dim)),
            _ => Ok("T2"),
        }
    }

    pub fn validate(&self) -> Result<()> {
        match self {
            Self::Sphere { dim, radius } => {
                if *dim < 2 || dim % 2 == 1 || *dim > MAX_PFAFFIAN_SIZE {
                    return Err(Error::UnsupportedDimension(*dim));
                }
                if !(*radius > 0.0) {
                    return Err(Error::InvalidInput("sphere radius must be positive".into()));
                }
            }
            Self::EmbeddedTorus { major, minor } => {
                if !(*minor > 0.0 && major > minor) {
                    return Err(Error::InvalidInput("embedded torus needs major > minor > 0".into()));
                }
            }
            Self::FlatTorus => {}
        }
        Ok(())
    }

    fn check_chart(&self, x: &[f64]) -> Result<()> {
        if x.len() != self.dim() {
            return Err(Error::DimensionMismatch {
                left: x.len(),
                right: self.dim(),
            });
        }
        if let Self::Sphere { dim, .. } = self {
            let polar_ok = x[..dim - 1].iter().all(|t| *t > 0.0 && *t < PI);
            let azimuth_ok = (0.0..2.0 * PI).contains(&x[dim - 1]);
            if !(polar_ok && azimuth_ok) {
                return Err(Error::OutsideChart { point: x.to_vec() });
            }
        }
        Ok(())
    }

    /// Curvature at chart point `x`.
    pub fn curvature(&self, x: &[f64]) -> Result<Curvature> {
        self.check_chart(x)?;
        Ok(match self {
            Self::Sphere { dim, radius } => Curvature::constant(*dim, 1.0 / (radius * radius)),
            Self::FlatTorus => Curvature::zero(2),
            Self::EmbeddedTorus { major, minor } => {
                let v = x[1];
                Curvature::constant(2, v.cos() / (minor * (major + minor * v.cos())))
            }
        })
    }

    /// `√g` of the chart at `x`.
    pub fn volume_element(&self, x: &[f64]) -> Result<f64> {
        self.check_chart(x)?;
        Ok(match self {
            Self::Sphere { dim, radius } => {
                let angular: f64 = x[..dim - 1]
                    .iter()
                    .enumerate()
                    .map(|(j, t)| t.sin().powi((dim - 1 - j) as i32))
                    .product();
                radius.powi(*dim as i32) * angular
            }
            Self::FlatTorus => 1.0,
            Self::EmbeddedTorus { major, minor } => minor * (major + minor * x[1].cos()),
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct EulerDensity {
    /// `Λ` per unit Riemannian volume.
    pub density: f64,
    /// `√g` of the chart.
    pub volume_element: f64,
}

impl EulerDensity {
    /// `Λ` per unit chart-coordinate volume.
    pub fn chart_density(&self) -> f64 {
        self.density * self.volume_element
    }
}

pub fn euler_density(m: &CurvedManifold, x: &[f64]) -> Result<EulerDensity> {
    let n = m.dim();
    let pf = m.curvature(x)?.pfaffian_form()?;
    Ok(EulerDensity {
        density: pf / (2.0 * PI).powi(n as i32 / 2),
        volume_element: m.volume_element(x)?,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct GbcResult {
    pub raw: f64,
    pub rounded: i64,
    pub residual: f64,
    pub nodes: usize,
    pub scheme: String,
}

/// Default resolutions: `S²` 48 × 96, `S⁴` 24³ × 48, tori 96 × 96.
pub fn integrate_euler(m: &CurvedManifold, scale: f64) -> Result<GbcResult> {
    m.validate()?;
    let s = |n: f64| ((n * scale).round() as usize).max(4);
    let (raw, nodes, scheme) = match m {
        CurvedManifold::Sphere { dim, .. } => {
            let polar = if *dim == 2 { s(48.0) } else { s(24.0) };
            let q = SphereQuadrature::new(dim + 1, polar, 2 * polar);
            let terms: Vec<f64> = (0..q.len())
                .into_par_iter()
                .map(|k| {
                    let (angles, weight) = q.angles(k);
                    Ok(euler_density(m, &angles)?.chart_density() * weight)
                })
                .collect::<Result<_>>()?;
            (compensated_sum(terms), q.len(), q.scheme())
        }
        CurvedManifold::FlatTorus | CurvedManifold::EmbeddedTorus { .. } => {
            let n = s(96.0);
            let h = 2.0 * PI / n as f64;
            let terms: Vec<f64> = (0..n * n)
                .into_par_iter()
                .map(|k| {
                    let x = [(k % n) as f64 * h, (k / n) as f64 * h];
                    Ok(euler_density(m, &x)?.chart_density() * h * h)
                })
                .collect::<Result<_>>()?;
            (compensated_sum(terms), n * n, format!("T{n}xT{n}"))
        }
    };
    let rounded = raw.round();
    let residual = (raw - rounded).abs();
    if residual >= 0.1 {
        return Err(Error::ResidualTooLarge { raw });
    }
    Ok(GbcResult {
        raw,
        rounded: rounded as i64,
        residual,
        nodes,
        scheme,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn random_antisymmetric(n: usize, rng: &mut ChaCha8Rng) -> DMatrix<f64> {
        let mut a = DMatrix::zeros(n, n);
        for i in 0..n {
            for j in i + 1..n {
                let v = rng.gen_range(-1.0..1.0);
                a[(i, j)] = v;
                a[(j, i)] = -v;
            }
        }
        a
    }

    #[test]
    fn pfaffian_examples() {
        let a = DMatrix::from_row_slice(2, 2, &[0.0, 3.0, -3.0, 0.0]);
        assert_eq!(pfaffian(&a).unwrap(), 3.0);
        let mut b = DMatrix::zeros(4, 4);
        b[(0, 1)] = 2.0;
        b[(1, 0)] = -2.0;
        b[(2, 3)] = 5.0;
        b[(3, 2)] = -5.0;
        assert_eq!(pfaffian(&b).unwrap(), 10.0);
        let mut rng = ChaCha8Rng::seed_from_u64(6);
        let c = random_antisymmetric(6, &mut rng);
        let pf = pfaffian(&c).unwrap();
        let det = c.determinant();
        assert!((pf * pf - det).abs() <= 1e-9 * det.abs().max(1.0));
    }

    #[test]
    fn pfaffian_rejects_bad_input() {
        assert!(matches!(pfaffian(&DMatrix::zeros(3, 3)), Err(Error::OddSize(3))));
        let sym = DMatrix::from_row_slice(2, 2, &[0.0, 1.0, 1.0, 0.0]);
        assert!(matches!(pfaffian(&sym), Err(Error::NotAntisymmetric(_))));
        assert!(pfaffian(&DMatrix::zeros(10, 10)).is_err());
    }

    /// `(1/(2^m m! 2^m)) Σ ε_a ε_c Π R^{a a'}_{c c'}` written out directly.
    fn epsilon_sum(r: &Curvature) -> f64 {
        let n = r.dim();
        let m = n / 2;
        let perms = permutations(n);
        let mut total = 0.0;
        for a in &perms {
            for c in &perms {
                let mut prod = permutation_sign(a) * permutation_sign(c);
                for k in 0..m {
                    prod *= r.get(a[2 * k], a[2 * k + 1], c[2 * k], c[2 * k + 1]);
                }
                total += prod;
            }
        }
        let fact: f64 = (1..=m).map(|k| k as f64).product();
        total / (4f64.powi(m as i32) * fact)
    }

    fn permutations(n: usize) -> Vec<Vec<usize>> {
        if n == 0 {
            return vec![vec![]];
        }
        let mut out = Vec::new();
        for p in permutations(n - 1) {
            for i in 0..=p.len() {
                let mut q = p.clone();
                q.insert(i, n - 1);
                out.push(q);
            }
        }
        out
    }

    #[test]
    fn polarized_pfaffian_matches_epsilon_sum() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for n in [2, 4] {
            let mut r = Curvature::zero(n);
            for a in 0..n {
                for b in a + 1..n {
                    for c in 0..n {
                        for d in c + 1..n {
                            r.set(a, b, c, d, rng.gen_range(-1.0..1.0));
                        }
                    }
                }
            }
            assert!(r.antisymmetry_defect() == 0.0);
            let direct = epsilon_sum(&r);
            assert!((r.pfaffian_form().unwrap() - direct).abs() < 1e-12, "N={n}");
        }
    }

    #[test]
    fn densities() {
        let s2 = CurvedManifold::Sphere { dim: 2, radius: 2.0 };
        let e = euler_density(&s2, &[1.0, 0.5]).unwrap();
        assert!((e.density - 1.0 / (2.0 * PI * 4.0)).abs() < 1e-15);
        let t = euler_density(&CurvedManifold::FlatTorus, &[0.1, 0.2]).unwrap();
        assert_eq!(t.density, 0.0);
        let s4 = CurvedManifold::Sphere { dim: 4, radius: 1.0 };
        let e4 = euler_density(&s4, &[1.0, 1.0, 1.0, 1.0]).unwrap();
        assert!((e4.density - 3.0 / (4.0 * PI * PI)).abs() < 1e-14);
        assert!(matches!(euler_density(&s2, &[0.0, 1.0]), Err(Error::OutsideChart { .. })));
    }

    #[test]
    fn integrals() {
        for r in [0.5, 1.0, 3.0] {
            let g = integrate_euler(&CurvedManifold::Sphere { dim: 2, radius: r }, 1.0).unwrap();
            assert!((g.raw - 2.0).abs() < 1e-6, "{r}: {}", g.raw);
        }
        let flat = integrate_euler(&CurvedManifold::FlatTorus, 1.0).unwrap();
        assert!(flat.raw.abs() < 1e-8);
        let emb = integrate_euler(&CurvedManifold::EmbeddedTorus { major: 2.0, minor: 1.0 }, 1.0).unwrap();
        assert!(emb.raw.abs() < 1e-8);
        let s4 = integrate_euler(&CurvedManifold::Sphere { dim: 4, radius: 1.0 }, 1.0).unwrap();
        assert!((s4.raw - 2.0).abs() < 1e-4, "{}", s4.raw);
    }
}
