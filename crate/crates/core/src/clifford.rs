//! Real Clifford algebra Cl(N) with Euclidean signature.
//!
//! Multivectors are stored densely: coefficient `k` belongs to the blade whose
//! bitmask is `k`, where bit `a` set means `γ_{a+1}` is a factor. Basis
//! vectors are addressed with 0-based indices throughout the crate.

use std::fmt;
use std::ops::{Add, AddAssign, Mul, Neg, Sub};

use crate::error::{Error, Result};

/// Largest supported algebra dimension (256 coefficients).
pub const MAX_DIM: usize = 8;

/// Sign of the product of the blades `a` and `b`, counting the transpositions
/// needed to bring the concatenated index list into canonical order.
pub fn blade_sign(a: usize, b: usize) -> f64 {
    let mut a = a >> 1;
    let mut swaps = 0u32;
    while a != 0 {
        swaps += (a & b).count_ones();
        a >>= 1;
    }
    if swaps.is_multiple_of(2) {
        1.0
    } else {
        -1.0
    }
}

#[inline]
pub fn blade_grade(blade: usize) -> usize {
    blade.count_ones() as usize
}

#[derive(Clone, PartialEq)]
pub struct Multivector {
    dim: usize,
    coeffs: Vec<f64>,
}

impl Multivector {
    pub fn zero(dim: usize) -> Result<Self> {
        if dim == 0 || dim > MAX_DIM {
            return Err(Error::UnsupportedDimension(dim));
        }
        Ok(Self {
            dim,
            coeffs: vec![0.0; 1 << dim],
        })
    }

    pub fn scalar(dim: usize, value: f64) -> Result<Self> {
        let mut m = Self::zero(dim)?;
        m.coeffs[0] = value;
        Ok(m)
    }

    /// The basis vector `γ_{index+1}`.
    pub fn basis_vector(dim: usize, index: usize) -> Result<Self> {
        let mut m = Self::zero(dim)?;
        if index >= dim {
            return Err(Error::IndexOutOfRange { index, dim });
        }
        m.coeffs[1 << index] = 1.0;
        Ok(m)
    }

    /// Grade-1 element with the given components.
    pub fn vector(components: &[f64]) -> Result<Self> {
        let mut m = Self::zero(components.len())?;
        for (a, &c) in components.iter().enumerate() {
            m.coeffs[1 << a] = c;
        }
        Ok(m)
    }

    pub fn from_coeffs(dim: usize, coeffs: Vec<f64>) -> Result<Self> {
        if dim == 0 || dim > MAX_DIM {
            return Err(Error::UnsupportedDimension(dim));
        }
        if coeffs.len() != 1 << dim {
            return Err(Error::DimensionMismatch {
                left: coeffs.len(),
                right: 1 << dim,
            });
        }
        Ok(Self { dim, coeffs })
    }

    /// The unit pseudoscalar `γ_1 γ_2 ⋯ γ_N`.
    pub fn pseudoscalar(dim: usize) -> Result<Self> {
        let mut m = Self::zero(dim)?;
        m.coeffs[(1 << dim) - 1] = 1.0;
        Ok(m)
    }

    /// Rotor turning `γ_i` towards `γ_j` by `angle`:
    /// `cos(θ/2) + sin(θ/2) γ_j γ_i`.
    pub fn plane_rotor(dim: usize, i: usize, j: usize, angle: f64) -> Result<Self> {
        let bivector = plane_bivector(dim, i, j)?;
        let (s, c) = (0.5 * angle).sin_cos();
        Ok(Self::scalar(dim, c)? + bivector.scale(s))
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn coeffs(&self) -> &[f64] {
        &self.coeffs
    }

    pub fn coeff(&self, blade: usize) -> f64 {
        self.coeffs[blade]
    }

    pub fn set_coeff(&mut self, blade: usize, value: f64) {
        self.coeffs[blade] = value;
    }

    pub fn scalar_part(&self) -> f64 {
        self.coeffs[0]
    }

    /// Grade-1 components, or the coefficients of `γ_1 … γ_N`.
    pub fn vector_part(&self) -> Vec<f64> {
        (0..self.dim).map(|a| self.coeffs[1 << a]).collect()
    }

    pub fn geometric_product(&self, other: &Self) -> Result<Self> {
        if self.dim != other.dim {
            return Err(Error::DimensionMismatch {
                left: self.dim,
                right: other.dim,
            });
        }
        let mut out = vec![0.0; self.coeffs.len()];
        for (a, &x) in self.coeffs.iter().enumerate() {
            if x == 0.0 {
                continue;
            }
            for (b, &y) in other.coeffs.iter().enumerate() {
                if y == 0.0 {
                    continue;
                }
                out[a ^ b] += blade_sign(a, b) * x * y;
            }
        }
        Ok(Self {
            dim: self.dim,
            coeffs: out,
        })
    }

    pub fn grade_project(&self, grade: usize) -> Result<Self> {
        if grade > self.dim {
            return Err(Error::GradeOutOfRange {
                grade,
                dim: self.dim,
            });
        }
        Ok(self.grade_part(grade))
    }

    pub(crate) fn grade_part(&self, grade: usize) -> Self {
        let coeffs = self
            .coeffs
            .iter()
            .enumerate()
            .map(|(b, &c)| if blade_grade(b) == grade { c } else { 0.0 })
            .collect();
        Self {
            dim: self.dim,
            coeffs,
        }
    }

    /// Reversion `A^†`: a grade-r blade picks up `(-1)^{r(r-1)/2}`.
    pub fn reverse(&self) -> Self {
        let coeffs = self
            .coeffs
            .iter()
            .enumerate()
            .map(|(b, &c)| {
                let r = blade_grade(b);
                if (r * r.saturating_sub(1) / 2).is_multiple_of(2) {
                    c
                } else {
                    -c
                }
            })
            .collect();
        Self {
            dim: self.dim,
            coeffs,
        }
    }

    pub fn scale(&self, factor: f64) -> Self {
        Self {
            dim: self.dim,
            coeffs: self.coeffs.iter().map(|c| c * factor).collect(),
        }
    }

    /// Largest absolute coefficient.
    pub fn max_norm(&self) -> f64 {
        self.coeffs.iter().fold(0.0, |m, c| m.max(c.abs()))
    }

    /// Largest absolute coefficient outside the given grade.
    pub fn leakage_outside(&self, grade: usize) -> f64 {
        self.coeffs
            .iter()
            .enumerate()
            .filter(|(b, _)| blade_grade(*b) != grade)
            .fold(0.0, |m, (_, c)| m.max(c.abs()))
    }

    /// Returns the single grade present (relative tolerance 1e-12), or `None`
    /// for mixed-grade elements. The zero multivector counts as grade 0.
    pub fn homogeneous_grade(&self) -> Option<usize> {
        let scale = self.max_norm();
        if scale == 0.0 {
            return Some(0);
        }
        let mut found = None;
        for r in 0..=self.dim {
            let present = self
                .coeffs
                .iter()
                .enumerate()
                .any(|(b, c)| blade_grade(b) == r && c.abs() > 1e-12 * scale);
            if present {
                if found.is_some() {
                    return None;
                }
                found = Some(r);
            }
        }
        found
    }

    /// Commutator `ab - ba`.
    pub fn commutator(&self, other: &Self) -> Result<Self> {
        Ok(self.geometric_product(other)? - other.geometric_product(self)?)
    }

    pub fn max_abs_diff(&self, other: &Self) -> f64 {
        self.coeffs
            .iter()
            .zip(&other.coeffs)
            .fold(0.0, |m, (a, b)| m.max((a - b).abs()))
    }
}

impl fmt::Debug for Multivector {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Multivector(N={}", self.dim)?;
        for (b, &c) in self.coeffs.iter().enumerate() {
            if c != 0.0 {
                write!(f, " {:+}{}", c, blade_label(b))?;
            }
        }
        write!(f, ")")
    }
}

fn blade_label(blade: usize) -> String {
    if blade == 0 {
        return String::new();
    }
    let idx: Vec<String> = (0..MAX_DIM)
        .filter(|a| blade & (1 << a) != 0)
        .map(|a| (a + 1).to_string())
        .collect();
    format!("·γ{}", idx.join(""))
}

impl Add for Multivector {
    type Output = Multivector;
    fn add(mut self, rhs: Multivector) -> Multivector {
        self += rhs;
        self
    }
}

impl AddAssign for Multivector {
    fn add_assign(&mut self, rhs: Multivector) {
        assert_eq!(self.dim, rhs.dim, "multivector dimension mismatch");
        for (a, b) in self.coeffs.iter_mut().zip(rhs.coeffs) {
            *a += b;
        }
    }
}

impl Sub for Multivector {
    type Output = Multivector;
    fn sub(mut self, rhs: Multivector) -> Multivector {
        assert_eq!(self.dim, rhs.dim, "multivector dimension mismatch");
        for (a, b) in self.coeffs.iter_mut().zip(rhs.coeffs) {
            *a -= b;
        }
        self
    }
}

impl Neg for Multivector {
    type Output = Multivector;
    fn neg(self) -> Multivector {
        self.scale(-1.0)
    }
}

/// Geometric product; panics on dimension mismatch; use
/// [`Multivector::geometric_product`] for a checked variant.
impl Mul for &Multivector {
    type Output = Multivector;
    fn mul(self, rhs: &Multivector) -> Multivector {
        self.geometric_product(rhs)
            .expect("multivector dimension mismatch")
    }
}

impl Mul<f64> for Multivector {
    type Output = Multivector;
    fn mul(self, rhs: f64) -> Multivector {
        self.scale(rhs)
    }
}

/// Unit bivector `γ_j γ_i` (squares to -1).
pub fn plane_bivector(dim: usize, i: usize, j: usize) -> Result<Multivector> {
    if i >= dim {
        return Err(Error::IndexOutOfRange { index: i, dim });
    }
    if j >= dim {
        return Err(Error::IndexOutOfRange { index: j, dim });
    }
    if i == j {
        return Err(Error::InvalidInput(format!("degenerate rotation plane ({i}, {i})")));
    }
    let gi = Multivector::basis_vector(dim, i)?;
    let gj = Multivector::basis_vector(dim, j)?;
    gj.geometric_product(&gi)
}

/// Spin generator `I_ab = ¼(γ_a γ_b − γ_b γ_a)`.
pub fn generator(a: usize, b: usize, dim: usize) -> Result<Multivector> {
    let ga = Multivector::basis_vector(dim, a)?;
    let gb = Multivector::basis_vector(dim, b)?;
    Ok(ga.commutator(&gb)?.scale(0.25))
}

/// N orthonormal grade-1 vectors.
#[derive(Debug, Clone, PartialEq)]
pub struct Frame {
    vectors: Vec<Multivector>,
}

impl Frame {
    /// The standard basis `γ_1 … γ_N`.
    pub fn standard(dim: usize) -> Result<Self> {
        let vectors = (0..dim)
            .map(|a| Multivector::basis_vector(dim, a))
            .collect::<Result<_>>()?;
        Ok(Self { vectors })
    }

    /// Wraps vectors without checking orthonormality.
    pub fn from_vectors_unchecked(vectors: Vec<Multivector>) -> Self {
        Self { vectors }
    }

    pub fn dim(&self) -> usize {
        self.vectors.len()
    }

    pub fn vectors(&self) -> &[Multivector] {
        &self.vectors
    }

    /// Max over `i, j` of `|u_i u_j + u_j u_i − 2δ_ij|`.
    pub fn orthonormality_defect(&self) -> f64 {
        let n = self.vectors.len();
        let mut worst: f64 = 0.0;
        for i in 0..n {
            for j in i..n {
                let anti = &self.vectors[i] * &self.vectors[j] + &self.vectors[j] * &self.vectors[i];
                let mut expected = Multivector::zero(anti.dim()).expect("valid dimension");
                if i == j {
                    expected.coeffs[0] = 2.0;
                }
                worst = worst.max(anti.max_abs_diff(&expected));
            }
        }
        worst
    }

    /// The `N × N` matrix of components, `u_i^a` at row `i`, column `a`.
    pub fn components(&self) -> Vec<Vec<f64>> {
        self.vectors.iter().map(Multivector::vector_part).collect()
    }
}

/// `u_i = U γ_i U^†` for an even unit versor `U`.
pub fn versor_frame(versor: &Multivector) -> Result<Frame> {
    let dim = versor.dim();
    let odd_norm = (0..=dim)
        .filter(|r| r % 2 == 1)
        .map(|r| versor.grade_part(r).max_norm())
        .fold(0.0, f64::max);
    if odd_norm > 1e-12 {
        return Err(Error::OddVersor { odd_norm });
    }
    let rev = versor.reverse();
    let unit = versor * &rev;
    let deviation = unit.max_abs_diff(&Multivector::scalar(dim, 1.0)?);
    if deviation > 1e-12 {
        return Err(Error::NonUnitVersor { deviation });
    }
    Ok(sandwich_frame(versor, &rev))
}

pub(crate) fn sandwich_frame(versor: &Multivector, rev: &Multivector) -> Frame {
    let dim = versor.dim();
    let vectors = (0..dim)
        .map(|a| {
            let g = Multivector::basis_vector(dim, a).expect("valid index");
            // exact arithmetic keeps only grade 1; drop rounding residue elsewhere
            (&(versor * &g) * rev).grade_part(1)
        })
        .collect();
    Frame { vectors }
}

/// `Σ_i u_i A u_i` for a grade-homogeneous `A`.
pub fn sandwich_sum(a: &Multivector, frame: &Frame) -> Result<Multivector> {
    if a.dim() != frame.dim() {
        return Err(Error::DimensionMismatch {
            left: a.dim(),
            right: frame.dim(),
        });
    }
    if a.homogeneous_grade().is_none() {
        return Err(Error::NotHomogeneous);
    }
    let mut acc = Multivector::zero(a.dim())?;
    for u in frame.vectors() {
        acc += &(u * a) * u;
    }
    Ok(acc)
}

/// `(−1)^r (N − 2r)`, the eigenvalue of the frame sandwich on grade `r`.
pub fn sandwich_eigenvalue(dim: usize, grade: usize) -> f64 {
    let sign = if grade.is_multiple_of(2) { 1.0 } else { -1.0 };
    sign * (dim as f64 - 2.0 * grade as f64)
}

/// Product of plane rotors over all planes `(i, j)`, `i < j`, in lexicographic
/// order; `angles` has one entry per plane.
pub fn rotor_from_plane_angles(dim: usize, angles: &[f64]) -> Result<Multivector> {
    let planes = rotation_planes(dim);
    if angles.len() != planes.len() {
        return Err(Error::DimensionMismatch {
            left: angles.len(),
            right: planes.len(),
        });
    }
    let mut rotor = Multivector::scalar(dim, 1.0)?;
    for (&(i, j), &theta) in planes.iter().zip(angles) {
        rotor = &rotor * &Multivector::plane_rotor(dim, i, j, theta)?;
    }
    Ok(rotor)
}

/// The `N(N−1)/2` coordinate planes `(i, j)` with `i < j`.
pub fn rotation_planes(dim: usize) -> Vec<(usize, usize)> {
    let mut planes = Vec::with_capacity(dim * dim.saturating_sub(1) / 2);
    for i in 0..dim {
        for j in i + 1..dim {
            planes.push((i, j));
        }
    }
    planes
}
