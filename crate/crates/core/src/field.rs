//! Vector fields `φ: R^N → R^N` on coordinate charts.

use std::collections::BTreeMap;
use std::fmt;
use std::sync::Arc;

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub trait VectorField: Send + Sync {
    fn dim(&self) -> usize;

    fn eval(&self, x: &[f64]) -> Vec<f64>;

    /// `∂φ^a/∂x^μ` at row `a`, column `μ`. Defaults to central differences.
    fn jacobian(&self, x: &[f64]) -> DMatrix<f64> {
        central_difference_jacobian(self, x, 1e-6)
    }
}

pub fn central_difference_jacobian<F: VectorField + ?Sized>(
    field: &F,
    x: &[f64],
    step: f64,
) -> DMatrix<f64> {
    let n = field.dim();
    let mut jac = DMatrix::zeros(n, n);
    let mut xp = x.to_vec();
    for mu in 0..n {
        let h = step * x[mu].abs().max(1.0);
        xp[mu] = x[mu] + h;
        let fp = field.eval(&xp);
        xp[mu] = x[mu] - h;
        let fm = field.eval(&xp);
        xp[mu] = x[mu];
        for a in 0..n {
            jac[(a, mu)] = (fp[a] - fm[a]) / (2.0 * h);
        }
    }
    jac
}

/// One monomial `c · Π x_μ^{e_μ}`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Monomial(pub Vec<u32>, pub f64);

/// Polynomial field with per-component monomial lists; Jacobian is exact.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PolynomialField {
    pub vars: usize,
    pub components: Vec<Vec<Monomial>>,
}

impl PolynomialField {
    pub fn new(vars: usize, components: Vec<Vec<Monomial>>) -> Result<Self> {
        let field = Self { vars, components };
        field.validate()?;
        Ok(field)
    }

    pub fn validate(&self) -> Result<()> {
        if self.vars == 0 {
            return Err(Error::InvalidInput("polynomial field with zero variables".into()));
        }
        if self.components.len() != self.vars {
            return Err(Error::DimensionMismatch {
                left: self.components.len(),
                right: self.vars,
            });
        }
        for comp in &self.components {
            for Monomial(exps, c) in comp {
                if exps.len() != self.vars {
                    return Err(Error::InvalidInput(format!(
                        "exponent tuple {exps:?} has length {} but the field has {} variables",
                        exps.len(),
                        self.vars
                    )));
                }
                if !c.is_finite() {
                    return Err(Error::InvalidInput(format!("non-finite coefficient {c}")));
                }
            }
        }
        Ok(())
    }

    /// `φ(x) = x`.
    pub fn identity(n: usize) -> Self {
        Self::linear(&DMatrix::identity(n, n))
    }

    pub fn linear(matrix: &DMatrix<f64>) -> Self {
        let n = matrix.nrows();
        let components = (0..n)
            .map(|a| {
                (0..n)
                    .filter(|&mu| matrix[(a, mu)] != 0.0)
                    .map(|mu| {
                        let mut e = vec![0; n];
                        e[mu] = 1;
                        Monomial(e, matrix[(a, mu)])
                    })
                    .collect()
            })
            .collect();
        Self { vars: n, components }
    }

    pub fn constant(value: &[f64]) -> Self {
        let n = value.len();
        let components = value
            .iter()
            .map(|&c| {
                if c == 0.0 {
                    vec![]
                } else {
                    vec![Monomial(vec![0; n], c)]
                }
            })
            .collect();
        Self { vars: n, components }
    }

    /// Rotation in the planes `(x_1, x_2), (x_3, x_4), …`: `(−x_2, x_1, −x_4, x_3, …)`.
    pub fn pair_rotation(n: usize) -> Result<Self> {
        if !n.is_multiple_of(2) {
            return Err(Error::InvalidInput(format!("pair rotation needs even dimension, got {n}")));
        }
        let mut m = DMatrix::zeros(n, n);
        for k in (0..n).step_by(2) {
            m[(k, k + 1)] = -1.0;
            m[(k + 1, k)] = 1.0;
        }
        Ok(Self::linear(&m))
    }

    /// `q ↦ q²` on quaternions `q = x_1 + x_2 i + x_3 j + x_4 k`.
    pub fn quaternion_square() -> Self {
        let e = |a: usize, b: usize| {
            let mut v = vec![0u32; 4];
            v[a] += 1;
            v[b] += 1;
            v
        };
        Self {
            vars: 4,
            components: vec![
                vec![
                    Monomial(e(0, 0), 1.0),
                    Monomial(e(1, 1), -1.0),
                    Monomial(e(2, 2), -1.0),
                    Monomial(e(3, 3), -1.0),
                ],
                vec![Monomial(e(0, 1), 2.0)],
                vec![Monomial(e(0, 2), 2.0)],
                vec![Monomial(e(0, 3), 2.0)],
            ],
        }
    }

    /// Planar field given as a product of complex linear factors in `z = x + iy`:
    /// each factor is `(z − r)` or `conj(z − r)`, so the field has a zero of
    /// index `+1` at every holomorphic root and `−1` at every conjugate root.
    pub fn complex_product(factors: &[ComplexFactor]) -> Self {
        // exponent (i, j) of x^i y^j ↦ complex coefficient
        let mut poly: BTreeMap<(u32, u32), (f64, f64)> = BTreeMap::new();
        poly.insert((0, 0), (1.0, 0.0));
        for f in factors {
            let (root, conj) = match *f {
                ComplexFactor::Holomorphic(r) => (r, false),
                ComplexFactor::Conjugate(r) => (r, true),
            };
            // factor = x ± i y − r̃ with r̃ = r or conj(r)
            let y_coeff = if conj { -1.0 } else { 1.0 };
            let shift = if conj { (root.0, -root.1) } else { root };
            let mut next: BTreeMap<(u32, u32), (f64, f64)> = BTreeMap::new();
            for (&(i, j), &(re, im)) in &poly {
                add_complex(&mut next, (i + 1, j), (re, im));
                add_complex(&mut next, (i, j + 1), (-im * y_coeff, re * y_coeff));
                let prod = (re * shift.0 - im * shift.1, re * shift.1 + im * shift.0);
                add_complex(&mut next, (i, j), (-prod.0, -prod.1));
            }
            poly = next;
        }
        let mut re = Vec::new();
        let mut im = Vec::new();
        for (&(i, j), &(a, b)) in &poly {
            if a != 0.0 {
                re.push(Monomial(vec![i, j], a));
            }
            if b != 0.0 {
                im.push(Monomial(vec![i, j], b));
            }
        }
        Self {
            vars: 2,
            components: vec![re, im],
        }
    }

    pub fn negated(&self) -> Self {
        Self {
            vars: self.vars,
            components: self
                .components
                .iter()
                .map(|c| c.iter().map(|Monomial(e, v)| Monomial(e.clone(), -v)).collect())
                .collect(),
        }
    }

    pub fn max_degree(&self) -> u32 {
        self.components
            .iter()
            .flatten()
            .map(|Monomial(e, _)| e.iter().sum())
            .max()
            .unwrap_or(0)
    }
}

fn add_complex(map: &mut BTreeMap<(u32, u32), (f64, f64)>, key: (u32, u32), v: (f64, f64)) {
    let e = map.entry(key).or_insert((0.0, 0.0));
    e.0 += v.0;
    e.1 += v.1;
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum ComplexFactor {
    Holomorphic((f64, f64)),
    Conjugate((f64, f64)),
}

fn monomial_value(exps: &[u32], x: &[f64]) -> f64 {
    exps.iter()
        .zip(x)
        .fold(1.0, |acc, (&e, &xi)| acc * xi.powi(e as i32))
}

impl VectorField for PolynomialField {
    fn dim(&self) -> usize {
        self.vars
    }

    fn eval(&self, x: &[f64]) -> Vec<f64> {
        self.components
            .iter()
            .map(|comp| {
                comp.iter()
                    .map(|Monomial(e, c)| c * monomial_value(e, x))
                    .sum()
            })
            .collect()
    }

    fn jacobian(&self, x: &[f64]) -> DMatrix<f64> {
        let n = self.vars;
        let mut jac = DMatrix::zeros(n, n);
        for (a, comp) in self.components.iter().enumerate() {
            for Monomial(e, c) in comp {
                for mu in 0..n {
                    if e[mu] == 0 {
                        continue;
                    }
                    let mut d = c * e[mu] as f64;
                    for (nu, (&k, &xi)) in e.iter().zip(x).enumerate() {
                        let power = if nu == mu { k - 1 } else { k };
                        d *= xi.powi(power as i32);
                    }
                    jac[(a, mu)] += d;
                }
            }
        }
        jac
    }
}

type EvalFn = dyn Fn(&[f64]) -> Vec<f64> + Send + Sync;
type JacFn = dyn Fn(&[f64]) -> DMatrix<f64> + Send + Sync;

/// Field backed by closures; used for analytic built-ins and chart pullbacks.
#[derive(Clone)]
pub struct FnField {
    dim: usize,
    eval: Arc<EvalFn>,
    jacobian: Option<Arc<JacFn>>,
}

impl FnField {
    pub fn new(dim: usize, eval: impl Fn(&[f64]) -> Vec<f64> + Send + Sync + 'static) -> Self {
        Self {
            dim,
            eval: Arc::new(eval),
            jacobian: None,
        }
    }

    pub fn with_jacobian(
        mut self,
        jacobian: impl Fn(&[f64]) -> DMatrix<f64> + Send + Sync + 'static,
    ) -> Self {
        self.jacobian = Some(Arc::new(jacobian));
        self
    }

    /// Gradient of `cos u + cos v` on the flat torus chart: `(−sin u, −sin v)`.
    pub fn torus_gradient() -> Self {
        Self::new(2, |x| vec![-x[0].sin(), -x[1].sin()]).with_jacobian(|x| {
            DMatrix::from_row_slice(2, 2, &[-x[0].cos(), 0.0, 0.0, -x[1].cos()])
        })
    }

    /// Wraps any field as a shared trait object.
    pub fn from_field(field: Arc<dyn VectorField>) -> Self {
        let dim = field.dim();
        let f1 = field.clone();
        Self::new(dim, move |x| f1.eval(x)).with_jacobian(move |x| field.jacobian(x))
    }
}

impl fmt::Debug for FnField {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("FnField")
            .field("dim", &self.dim)
            .field("analytic_jacobian", &self.jacobian.is_some())
            .finish()
    }
}

impl VectorField for FnField {
    fn dim(&self) -> usize {
        self.dim
    }

    fn eval(&self, x: &[f64]) -> Vec<f64> {
        (self.eval)(x)
    }

    fn jacobian(&self, x: &[f64]) -> DMatrix<f64> {
        match &self.jacobian {
            Some(j) => j(x),
            None => central_difference_jacobian(self, x, 1e-6),
        }
    }
}

impl<F: VectorField + ?Sized> VectorField for Arc<F> {
    fn dim(&self) -> usize {
        (**self).dim()
    }
    fn eval(&self, x: &[f64]) -> Vec<f64> {
        (**self).eval(x)
    }
    fn jacobian(&self, x: &[f64]) -> DMatrix<f64> {
        (**self).jacobian(x)
    }
}

impl<F: VectorField + ?Sized> VectorField for &F {
    fn dim(&self) -> usize {
        (**self).dim()
    }
    fn eval(&self, x: &[f64]) -> Vec<f64> {
        (**self).eval(x)
    }
    fn jacobian(&self, x: &[f64]) -> DMatrix<f64> {
        (**self).jacobian(x)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn complex_square_matches_closed_form() {
        let f = PolynomialField::complex_product(&[
            ComplexFactor::Holomorphic((0.0, 0.0)),
            ComplexFactor::Holomorphic((0.0, 0.0)),
        ]);
        let v = f.eval(&[0.3, -1.1]);
        assert!((v[0] - (0.09 - 1.21)).abs() < 1e-15);
        assert!((v[1] - 2.0 * 0.3 * -1.1).abs() < 1e-15);
    }

    #[test]
    fn conjugate_factor_is_reflection() {
        let f = PolynomialField::complex_product(&[ComplexFactor::Conjugate((1.0, 2.0))]);
        // conj(z − r) = (x − 1, −(y − 2))
        assert_eq!(f.eval(&[3.0, 5.0]), vec![2.0, -3.0]);
    }

    #[test]
    fn polynomial_jacobian_matches_finite_differences() {
        let fields = [
            PolynomialField::quaternion_square(),
            PolynomialField::complex_product(&[
                ComplexFactor::Holomorphic((0.5, 0.0)),
                ComplexFactor::Conjugate((-0.5, 0.2)),
                ComplexFactor::Holomorphic((0.0, -0.4)),
            ]),
            PolynomialField::pair_rotation(4).unwrap(),
        ];
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for f in &fields {
            for _ in 0..20 {
                let x: Vec<f64> = (0..f.dim()).map(|_| rng.gen_range(-1.5..1.5)).collect();
                let exact = f.jacobian(&x);
                let fd = central_difference_jacobian(f, &x, 1e-6);
                assert!((exact - fd).amax() < 1e-6);
            }
        }
    }

    #[test]
    fn validation_rejects_bad_shapes() {
        let bad = PolynomialField {
            vars: 2,
            components: vec![vec![Monomial(vec![1], 1.0)], vec![]],
        };
        assert!(bad.validate().is_err());
        let bad = PolynomialField {
            vars: 2,
            components: vec![vec![]],
        };
        assert!(bad.validate().is_err());
    }
}
