//! Clifford-valued connection and curvature forms sampled by finite differences.
//!
//! A frame field `u_i(x) = U(x) γ_i U(x)^†` defines the pseudo-flat connection
//! `ω₀ = ¼ Σ_i du_i u_i`. Its curvature `F = dω − ω∧ω` vanishes wherever the
//! frame is smooth; the singular points carry quantized holonomy.

use std::f64::consts::PI;
use std::fmt;
use std::sync::Arc;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;

use crate::clifford::{plane_bivector, rotation_planes, sandwich_frame, Frame, Multivector};
use crate::error::{Error, Result};
use crate::field::VectorField;
use crate::numeric::{compensated_sum, distance};

/// Default central-difference step.
pub const DEFAULT_STEP: f64 = 1e-4;

/// Axis-aligned chart region.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ChartBox {
    pub lo: Vec<f64>,
    pub hi: Vec<f64>,
}

impl ChartBox {
    pub fn cube(dim: usize, half_width: f64) -> Self {
        Self {
            lo: vec![-half_width; dim],
            hi: vec![half_width; dim],
        }
    }

    pub fn contains(&self, x: &[f64]) -> bool {
        x.iter()
            .zip(self.lo.iter().zip(&self.hi))
            .all(|(v, (lo, hi))| *v >= *lo && *v <= *hi)
    }
}

pub trait FrameField: Send + Sync {
    fn dim(&self) -> usize;

    fn chart(&self) -> &ChartBox;

    /// Declared points where the frame is undefined.
    fn singular_points(&self) -> &[Vec<f64>];

    fn frame(&self, x: &[f64]) -> Frame;

    /// Exact `∂_μ u_i` for every `i`, when the field can supply it.
    fn frame_derivative(&self, _x: &[f64], _mu: usize) -> Option<Vec<Multivector>> {
        None
    }
}

type AnglesFn = dyn Fn(&[f64]) -> Vec<f64> + Send + Sync;
type GradientsFn = dyn Fn(&[f64]) -> Vec<Vec<f64>> + Send + Sync;

/// Frame field generated by the rotor `U(x) = Π_k exp(½ θ_k(x) γ_j γ_i)`
/// over the coordinate planes `(i, j)` in lexicographic order.
#[derive(Clone)]
pub struct RotorFrameField {
    dim: usize,
    chart: ChartBox,
    singular: Vec<Vec<f64>>,
    angles: Arc<AnglesFn>,
    gradients: Option<Arc<GradientsFn>>,
}

impl RotorFrameField {
    /// `angles(x)` returns one angle per plane; `gradients(x)[k][μ]` is
    /// `∂_μ θ_k` when supplied.
    pub fn new(
        dim: usize,
        chart: ChartBox,
        singular: Vec<Vec<f64>>,
        angles: impl Fn(&[f64]) -> Vec<f64> + Send + Sync + 'static,
    ) -> Self {
        Self {
            dim,
            chart,
            singular,
            angles: Arc::new(angles),
            gradients: None,
        }
    }

    pub fn with_gradients(mut self, gradients: impl Fn(&[f64]) -> Vec<Vec<f64>> + Send + Sync + 'static) -> Self {
        self.gradients = Some(Arc::new(gradients));
        self
    }

    /// Planar frame `u_1 = cos(kφ) γ_1 + sin(kφ) γ_2` with `φ` the polar angle
    /// about `center`; singular at `center`.
    pub fn hedgehog(winding: i32, center: [f64; 2], half_width: f64) -> Self {
        let k = winding as f64;
        let chart = ChartBox {
            lo: vec![center[0] - half_width, center[1] - half_width],
            hi: vec![center[0] + half_width, center[1] + half_width],
        };
        Self::new(2, chart, vec![center.to_vec()], move |x| {
            vec![k * (x[1] - center[1]).atan2(x[0] - center[0])]
        })
        .with_gradients(move |x| {
            let (dx, dy) = (x[0] - center[0], x[1] - center[1]);
            let r2 = dx * dx + dy * dy;
            vec![vec![-k * dy / r2, k * dx / r2]]
        })
    }

    /// Frame of a fixed rotor.
    pub fn constant(dim: usize, angles: Vec<f64>, half_width: f64) -> Self {
        let planes = angles.len();
        Self::new(dim, ChartBox::cube(dim, half_width), vec![], move |_| angles.clone())
            .with_gradients(move |_| vec![vec![0.0; dim]; planes])
    }

    /// Smooth frame with angles `θ_k(x) = a_k + Σ_μ b_kμ sin(c_kμ x_μ + d_kμ)`
    /// drawn from a seeded generator; no singular points.
    pub fn random_trigonometric(dim: usize, seed: u64, half_width: f64) -> Self {
        let planes = dim * (dim - 1) / 2;
        let coeffs = TrigCoefficients::random(planes, dim, seed);
        let grad = coeffs.clone();
        Self::new(dim, ChartBox::cube(dim, half_width), vec![], move |x| coeffs.values(x))
            .with_gradients(move |x| grad.gradients(x))
    }

    pub fn rotor(&self, x: &[f64]) -> Multivector {
        crate::clifford::rotor_from_plane_angles(self.dim, &(self.angles)(x)).expect("angle count matches planes")
    }

    fn plane_factors(&self, angles: &[f64]) -> Vec<(Multivector, Multivector)> {
        rotation_planes(self.dim)
            .into_iter()
            .zip(angles)
            .map(|((i, j), &theta)| {
                let rotor = Multivector::plane_rotor(self.dim, i, j, theta).expect("valid plane");
                let bivector = plane_bivector(self.dim, i, j).expect("valid plane");
                (rotor, bivector)
            })
            .collect()
    }
}

impl fmt::Debug for RotorFrameField {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("RotorFrameField")
            .field("dim", &self.dim)
            .field("chart", &self.chart)
            .field("singular", &self.singular)
            .finish()
    }
}

impl FrameField for RotorFrameField {
    fn dim(&self) -> usize {
        self.dim
    }

    fn chart(&self) -> &ChartBox {
        &self.chart
    }

    fn singular_points(&self) -> &[Vec<f64>] {
        &self.singular
    }

    fn frame(&self, x: &[f64]) -> Frame {
        let u = self.rotor(x);
        sandwich_frame(&u, &u.reverse())
    }

    fn frame_derivative(&self, x: &[f64], mu: usize) -> Option<Vec<Multivector>> {
        let gradients = self.gradients.as_ref()?(x);
        let angles = (self.angles)(x);
        let factors = self.plane_factors(&angles);
        let one = Multivector::scalar(self.dim, 1.0).expect("valid dimension");
        // dU = Σ_k ∂θ_k · R_1 ⋯ (½ B_k R_k) ⋯ R_m
        let mut rotor = one.clone();
        let mut d_rotor = Multivector::zero(self.dim).expect("valid dimension");
        for (k, (r, b)) in factors.iter().enumerate() {
            let dr = (b * r).scale(0.5 * gradients[k][mu]);
            d_rotor = &d_rotor * r + &rotor * &dr;
            rotor = &rotor * r;
        }
        let rev = rotor.reverse();
        let d_rev = d_rotor.reverse();
        let derivs = (0..self.dim)
            .map(|a| {
                let g = Multivector::basis_vector(self.dim, a).expect("valid index");
                (&(&d_rotor * &g) * &rev + &(&rotor * &g) * &d_rev).grade_part(1)
            })
            .collect();
        Some(derivs)
    }
}

/// Coefficients of `f_k(x) = a_k + Σ_μ b_kμ sin(c_kμ x_μ + d_kμ)`.
#[derive(Debug, Clone, PartialEq)]
pub struct TrigCoefficients {
    offset: Vec<f64>,
    amplitude: Vec<Vec<f64>>,
    frequency: Vec<Vec<f64>>,
    phase: Vec<Vec<f64>>,
}

impl TrigCoefficients {
    pub fn random(count: usize, dim: usize, seed: u64) -> Self {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut table = |lo: f64, hi: f64| -> Vec<Vec<f64>> {
            (0..count)
                .map(|_| (0..dim).map(|_| rng.gen_range(lo..hi)).collect())
                .collect()
        };
        let amplitude = table(-1.0, 1.0);
        let frequency = table(0.5, 2.0);
        let phase = table(0.0, 2.0 * PI);
        let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 0x9e37_79b9);
        let offset = (0..count).map(|_| rng.gen_range(-PI..PI)).collect();
        Self {
            offset,
            amplitude,
            frequency,
            phase,
        }
    }

    pub fn values(&self, x: &[f64]) -> Vec<f64> {
        (0..self.offset.len())
            .map(|k| {
                self.offset[k]
                    + (0..x.len())
                        .map(|mu| self.amplitude[k][mu] * (self.frequency[k][mu] * x[mu] + self.phase[k][mu]).sin())
                        .sum::<f64>()
            })
            .collect()
    }

    pub fn gradients(&self, x: &[f64]) -> Vec<Vec<f64>> {
        (0..self.offset.len())
            .map(|k| {
                (0..x.len())
                    .map(|mu| {
                        let c = self.frequency[k][mu];
                        self.amplitude[k][mu] * c * (c * x[mu] + self.phase[k][mu]).cos()
                    })
                    .collect()
            })
            .collect()
    }
}

/// Smooth grade-2 connection `ω_μ(x) = Σ_{a<b} f_{μab}(x) γ_a γ_b`.
#[derive(Debug, Clone, PartialEq)]
pub struct TrigConnection {
    dim: usize,
    coeffs: TrigCoefficients,
}

impl TrigConnection {
    pub fn random(dim: usize, seed: u64) -> Self {
        let planes = dim * (dim - 1) / 2;
        Self {
            dim,
            coeffs: TrigCoefficients::random(planes * dim, dim, seed),
        }
    }

    pub fn sample(&self, x: &[f64], step: f64) -> ConnectionSample {
        let values = self.coeffs.values(x);
        let planes = rotation_planes(self.dim);
        let omega = (0..self.dim)
            .map(|mu| {
                let mut w = Multivector::zero(self.dim).expect("valid dimension");
                for (p, &(a, b)) in planes.iter().enumerate() {
                    w.set_coeff((1 << a) | (1 << b), values[mu * planes.len() + p]);
                }
                w
            })
            .collect();
        ConnectionSample {
            point: x.to_vec(),
            omega,
            step,
            truncation_defect: 0.0,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ConnectionSample {
    pub point: Vec<f64>,
    /// `ω_μ` for each coordinate direction.
    pub omega: Vec<Multivector>,
    pub step: f64,
    /// Largest non-bivector coefficient discarded from the raw difference
    /// quotient (`du_i · u_i` vanishes for unit vectors up to truncation).
    pub truncation_defect: f64,
}

impl ConnectionSample {
    /// Largest non-grade-2 coefficient across components.
    pub fn grade_leakage(&self) -> f64 {
        self.omega.iter().map(|w| w.leakage_outside(2)).fold(0.0, f64::max)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct CurvatureSample {
    pub point: Vec<f64>,
    /// `F_{μν}`, antisymmetric by construction.
    pub components: Vec<Vec<Multivector>>,
    pub step: f64,
}

impl CurvatureSample {
    pub fn max_norm(&self) -> f64 {
        self.components
            .iter()
            .flatten()
            .map(Multivector::max_norm)
            .fold(0.0, f64::max)
    }

    pub fn grade_leakage(&self) -> f64 {
        self.components
            .iter()
            .flatten()
            .map(|f| f.leakage_outside(2))
            .fold(0.0, f64::max)
    }
}

fn check_stencil<F: FrameField + ?Sized>(ff: &F, x: &[f64], h: f64, reach: f64) -> Result<()> {
    if x.len() != ff.dim() {
        return Err(Error::DimensionMismatch {
            left: x.len(),
            right: ff.dim(),
        });
    }
    if !(h > 0.0) {
        return Err(Error::InvalidInput(format!("finite-difference step must be positive, got {h}")));
    }
    for (index, z) in ff.singular_points().iter().enumerate() {
        let d = distance(x, z);
        if d <= 2.0 * reach {
            return Err(Error::NearSingularity {
                index,
                distance: d,
                required: 2.0 * reach,
            });
        }
    }
    let chart = ff.chart();
    for (mu, &xm) in x.iter().enumerate() {
        if xm - reach < chart.lo[mu] || xm + reach > chart.hi[mu] {
            return Err(Error::OutsideChart { point: x.to_vec() });
        }
    }
    Ok(())
}

fn shifted(x: &[f64], mu: usize, delta: f64) -> Vec<f64> {
    let mut y = x.to_vec();
    y[mu] += delta;
    y
}

/// Second-order central difference of every frame vector along `μ`.
fn frame_difference<F: FrameField + ?Sized>(ff: &F, x: &[f64], mu: usize, h: f64) -> Vec<Multivector> {
    let plus = ff.frame(&shifted(x, mu, h));
    let minus = ff.frame(&shifted(x, mu, -h));
    plus.vectors()
        .iter()
        .zip(minus.vectors())
        .map(|(p, m)| (p.clone() - m.clone()).scale(0.5 / h))
        .collect()
}

/// Fourth-order five-point difference, used when no exact derivative exists.
fn frame_difference_4th<F: FrameField + ?Sized>(ff: &F, x: &[f64], mu: usize, h: f64) -> Vec<Multivector> {
    let p1 = ff.frame(&shifted(x, mu, h));
    let m1 = ff.frame(&shifted(x, mu, -h));
    let p2 = ff.frame(&shifted(x, mu, 2.0 * h));
    let m2 = ff.frame(&shifted(x, mu, -2.0 * h));
    (0..ff.dim())
        .map(|i| {
            let a = (p1.vectors()[i].clone() - m1.vectors()[i].clone()).scale(8.0);
            let b = p2.vectors()[i].clone() - m2.vectors()[i].clone();
            (a - b).scale(1.0 / (12.0 * h))
        })
        .collect()
}

/// `ω₀_μ(x) = ¼ Σ_i (∂_μ u_i) u_i` with central differences of step `h`.
pub fn pseudo_flat_connection<F: FrameField + ?Sized>(ff: &F, x: &[f64], h: f64) -> Result<ConnectionSample> {
    check_stencil(ff, x, h, h)?;
    let frame = ff.frame(x);
    let mut truncation_defect: f64 = 0.0;
    let omega = (0..ff.dim())
        .map(|mu| {
            let du = frame_difference(ff, x, mu, h);
            let mut acc = Multivector::zero(ff.dim()).expect("valid dimension");
            for (d, u) in du.iter().zip(frame.vectors()) {
                acc += d * u;
            }
            let acc = acc.scale(0.25);
            truncation_defect = truncation_defect.max(acc.leakage_outside(2));
            acc.grade_part(2)
        })
        .collect();
    Ok(ConnectionSample {
        point: x.to_vec(),
        omega,
        step: h,
        truncation_defect,
    })
}

/// `Du_i = ∂u_i − [ω, u_i]` per direction: `result[μ][i]`. The frame
/// derivative is exact when available, otherwise a fourth-order stencil.
pub fn covariant_derivative<F: FrameField + ?Sized>(
    ff: &F,
    omega: &ConnectionSample,
    h: f64,
) -> Result<Vec<Vec<Multivector>>> {
    let x = &omega.point;
    check_stencil(ff, x, h, 2.0 * h)?;
    if omega.omega.len() != ff.dim() {
        return Err(Error::DimensionMismatch {
            left: omega.omega.len(),
            right: ff.dim(),
        });
    }
    let frame = ff.frame(x);
    (0..ff.dim())
        .map(|mu| {
            let du = ff
                .frame_derivative(x, mu)
                .unwrap_or_else(|| frame_difference_4th(ff, x, mu, h));
            du.iter()
                .zip(frame.vectors())
                .map(|(d, u)| Ok(d.clone() - omega.omega[mu].commutator(u)?))
                .collect()
        })
        .collect()
}

/// Reconstructs `ω` as `¼ Σ_i (du_i u_i − Du_i u_i)` and returns the largest
/// coefficient deviation from the supplied sample.
///
/// `du_i` is the second-order difference with step `h`; `Du_i` comes from
/// [`covariant_derivative`], so the residual measures the `O(h²)` truncation.
pub fn decompose_check<F: FrameField + ?Sized>(ff: &F, omega: &ConnectionSample, h: f64) -> Result<f64> {
    let x = &omega.point;
    let cov = covariant_derivative(ff, omega, h)?;
    let frame = ff.frame(x);
    let mut residual: f64 = 0.0;
    for mu in 0..ff.dim() {
        let du = frame_difference(ff, x, mu, h);
        let mut acc = Multivector::zero(ff.dim())?;
        for ((d, cd), u) in du.iter().zip(&cov[mu]).zip(frame.vectors()) {
            acc += d * u - cd * u;
        }
        residual = residual.max(acc.scale(0.25).max_abs_diff(&omega.omega[mu]));
    }
    Ok(residual)
}

/// `F_{μν} = ∂_μ ω_ν − ∂_ν ω_μ − (ω_μ ω_ν − ω_ν ω_μ)` with central differences
/// of the connection sampled by `conn`.
pub fn curvature<C>(conn: C, x: &[f64], h: f64) -> Result<CurvatureSample>
where
    C: Fn(&[f64]) -> Result<ConnectionSample>,
{
    let here = conn(x)?;
    let dim = here.omega.len();
    let mut derivative = vec![Vec::with_capacity(dim); dim];
    for (mu, row) in derivative.iter_mut().enumerate() {
        let plus = conn(&shifted(x, mu, h))?;
        let minus = conn(&shifted(x, mu, -h))?;
        for nu in 0..dim {
            row.push((plus.omega[nu].clone() - minus.omega[nu].clone()).scale(0.5 / h));
        }
    }
    let zero = Multivector::zero(here.omega[0].dim())?;
    let mut components = vec![vec![zero; dim]; dim];
    for mu in 0..dim {
        for nu in mu + 1..dim {
            let d = derivative[mu][nu].clone() - derivative[nu][mu].clone();
            let wedge = here.omega[mu].commutator(&here.omega[nu])?;
            let f = d - wedge;
            components[nu][mu] = -f.clone();
            components[mu][nu] = f;
        }
    }
    Ok(CurvatureSample {
        point: x.to_vec(),
        components,
        step: h,
    })
}

/// Curvature of the pseudo-flat connection of `ff` at `x`.
pub fn pseudo_flat_curvature<F: FrameField + ?Sized>(ff: &F, x: &[f64], h: f64) -> Result<CurvatureSample> {
    check_stencil(ff, x, h, 2.0 * h)?;
    curvature(|y| pseudo_flat_connection(ff, y, h), x, h)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SingularFlux {
    pub point: Vec<f64>,
    pub loop_radius: f64,
    /// `∮ ω^{21}`: the total turning angle of the frame around the point.
    pub flux: f64,
    pub flux_over_2pi: f64,
    /// Turning number of `u_1` from the angle-sum oracle.
    pub oracle_turns: Option<i64>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct FlatnessReport {
    pub max_offsingular_norm: f64,
    pub max_grade_leakage: f64,
    pub samples: usize,
    pub singular_flux: Vec<SingularFlux>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct FlatnessScan {
    /// Sample points per axis over the chart box.
    pub grid: usize,
    pub step: f64,
    /// Points closer than this to a singular point are skipped.
    pub exclusion_radius: f64,
    pub loop_radius: f64,
    pub loop_samples: usize,
}

impl Default for FlatnessScan {
    fn default() -> Self {
        Self {
            grid: 24,
            step: DEFAULT_STEP,
            exclusion_radius: 0.5,
            loop_radius: 1.0,
            loop_samples: 256,
        }
    }
}

/// Samples `‖F(ω₀)‖` over the chart away from the singular set and measures
/// the holonomy around each singular point (planar frames only).
pub fn flatness_scan<F: FrameField + ?Sized>(ff: &F, scan: &FlatnessScan) -> Result<FlatnessReport> {
    let dim = ff.dim();
    let chart = ff.chart();
    let h = scan.step;
    let margin = 3.0 * h;
    let exclusion = scan.exclusion_radius.max(2.0 * h);
    let total = scan.grid.pow(dim as u32);
    let points: Vec<Vec<f64>> = (0..total)
        .map(|k| {
            let mut idx = k;
            (0..dim)
                .map(|mu| {
                    let i = idx % scan.grid;
                    idx /= scan.grid;
                    let t = if scan.grid == 1 { 0.5 } else { i as f64 / (scan.grid - 1) as f64 };
                    chart.lo[mu] + margin + t * (chart.hi[mu] - chart.lo[mu] - 2.0 * margin)
                })
                .collect()
        })
        .filter(|p: &Vec<f64>| ff.singular_points().iter().all(|z| distance(p, z) > exclusion))
        .collect();
    let samples: Vec<(f64, f64)> = points
        .par_iter()
        .map(|p| pseudo_flat_curvature(ff, p, h).map(|f| (f.max_norm(), f.grade_leakage())))
        .collect::<Result<_>>()?;
    let max_offsingular_norm = samples.iter().map(|s| s.0).fold(0.0, f64::max);
    let max_grade_leakage = samples.iter().map(|s| s.1).fold(0.0, f64::max);

    let singular_flux = if dim == 2 {
        ff.singular_points()
            .iter()
            .map(|z| singular_flux(ff, z, scan.loop_radius, scan.loop_samples, h))
            .collect::<Result<_>>()?
    } else {
        Vec::new()
    };
    Ok(FlatnessReport {
        max_offsingular_norm,
        max_grade_leakage,
        samples: samples.len(),
        singular_flux,
    })
}

/// `∮ ω^{21}` around `center` for a planar frame field, where
/// `ω = ½ ω^{ab} I_ab` gives `ω^{21} = −2 ⟨ω⟩_{γ1γ2}`.
pub fn singular_flux<F: FrameField + ?Sized>(
    ff: &F,
    center: &[f64],
    radius: f64,
    samples: usize,
    h: f64,
) -> Result<SingularFlux> {
    if ff.dim() != 2 {
        return Err(Error::DimensionMismatch { left: ff.dim(), right: 2 });
    }
    let dt = 2.0 * PI / samples as f64;
    let terms = (0..samples)
        .map(|k| {
            let t = k as f64 * dt;
            let p = [center[0] + radius * t.cos(), center[1] + radius * t.sin()];
            let tangent = [-radius * t.sin(), radius * t.cos()];
            let w = pseudo_flat_connection(ff, &p, h)?;
            let g12 = tangent[0] * w.omega[0].coeff(0b11) + tangent[1] * w.omega[1].coeff(0b11);
            Ok(-2.0 * g12 * dt)
        })
        .collect::<Result<Vec<f64>>>()?;
    let flux = compensated_sum(terms);
    let u1 = FrameVectorField {
        frame_field: ff,
        index: 0,
    };
    let oracle_turns = crate::winding::oracle_degree_anglesum(&u1, center, radius, samples.max(64)).ok();
    Ok(SingularFlux {
        point: center.to_vec(),
        loop_radius: radius,
        flux,
        flux_over_2pi: flux / (2.0 * PI),
        oracle_turns,
    })
}

/// Frame vector `u_i` viewed as an ordinary vector field, for degree oracles.
pub struct FrameVectorField<'a, F: ?Sized> {
    pub frame_field: &'a F,
    pub index: usize,
}

impl<F: FrameField + ?Sized> VectorField for FrameVectorField<'_, F> {
    fn dim(&self) -> usize {
        self.frame_field.dim()
    }

    fn eval(&self, x: &[f64]) -> Vec<f64> {
        self.frame_field.frame(x).vectors()[self.index].vector_part()
    }
}
