//! Isolated zeros of vector fields: grid scan, damped Newton, and the local
//! index `W = βη` of each zero; index sums over closed manifolds.

use std::sync::Arc;

use nalgebra::{DMatrix, DVector};
use rayon::prelude::*;
use serde::Serialize;

use crate::domain::{check_periodic, ChartDomain, ClosedManifold, SphereAtlas, TorusChart};
use crate::error::{Error, Result};
use crate::field::VectorField;
use crate::numeric::{distance, norm};
use crate::quadrature::SphereQuadrature;
use crate::winding::{winding_number_refining, WindingResult, ZERO_ON_SPHERE_THRESHOLD};

pub const NEWTON_TOL: f64 = 1e-12;
pub const MAX_NEWTON_ITERATIONS: usize = 50;

/// A zero counts as regular when `σ_min(J) > REGULAR_SIGMA · max(1, σ_max(J))`.
pub const REGULAR_SIGMA: f64 = 1e-6;

/// Atlas rotations / seam shifts tried before giving up on a seam zero.
pub const SEAM_ATTEMPTS: usize = 3;

/// Half-width of the chart boxes used on stereographic charts.
const STEREO_HALF_WIDTH: f64 = 1.3;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ZeroSearch {
    pub grid: usize,
    pub tol: f64,
    pub max_iterations: usize,
    pub quadrature_scale: f64,
}

impl ZeroSearch {
    /// Default grids: 256 cells in 1-D, 64² in 2-D, 24³ in 3-D, 12⁴ above.
    /// The cell count is kept even so symmetric boxes never put a cell
    /// centre on a coordinate hyperplane.
    pub fn for_dim(dim: usize, scale: f64) -> Self {
        let base = match dim {
            1 => 256.0,
            2 => 64.0,
            3 => 24.0,
            _ => 12.0,
        };
        let mut grid = ((base * scale).round() as usize).max(2);
        grid += grid % 2;
        Self {
            grid,
            tol: NEWTON_TOL,
            max_iterations: MAX_NEWTON_ITERATIONS,
            quadrature_scale: scale,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ZeroRecord {
    pub location: Vec<f64>,
    pub jac_det: f64,
    pub eta: i8,
    pub beta: u32,
    pub winding: i64,
    pub regular: bool,
    /// Set when the winding number is 0 (`β·η = 0`).
    pub flagged: bool,
    pub isolation_radius: f64,
    pub winding_residual: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct NewtonOutcome {
    pub point: Vec<f64>,
    pub residual: f64,
    pub converged: bool,
    pub iterations: usize,
}

/// Damped Newton with pseudo-inverse steps. Keeps iterating past `tol` while
/// the residual still drops, so multiple zeros are pinned down tightly too.
pub fn newton<F: VectorField + ?Sized>(field: &F, start: &[f64], tol: f64, max_iterations: usize) -> NewtonOutcome {
    let mut x = start.to_vec();
    let mut fx = field.eval(&x);
    let mut r = norm(&fx);
    let mut iterations = 0;
    while iterations < max_iterations && r > 0.0 && r.is_finite() {
        iterations += 1;
        let jac = field.jacobian(&x);
        let svd = jac.svd(true, true);
        let cutoff = 1e-14 * svd.singular_values.max().max(f64::MIN_POSITIVE);
        let Ok(step) = svd.solve(&DVector::from_column_slice(&fx), cutoff) else {
            break;
        };
        let mut t = 1.0;
        let mut accepted = false;
        for _ in 0..30 {
            let cand: Vec<f64> = x.iter().zip(step.iter()).map(|(a, d)| a - t * d).collect();
            let fc = field.eval(&cand);
            let rc = norm(&fc);
            if rc < r {
                x = cand;
                fx = fc;
                r = rc;
                accepted = true;
                break;
            }
            t *= 0.5;
        }
        if !accepted {
            break;
        }
    }
    NewtonOutcome {
        point: x,
        residual: r,
        converged: r < tol,
        iterations,
    }
}

fn cell_widths(lo: &[f64], hi: &[f64], grid: usize) -> Vec<f64> {
    lo.iter().zip(hi).map(|(l, h)| (h - l) / grid as f64).collect()
}

/// Centres of cells whose corner values bracket zero in every component.
fn candidate_cells<F: VectorField + ?Sized>(
    field: &F,
    lo: &[f64],
    hi: &[f64],
    grid: usize,
    keep: &(dyn Fn(&[f64]) -> bool + Sync),
) -> Vec<Vec<f64>> {
    let dim = lo.len();
    let side = grid + 1;
    let width = cell_widths(lo, hi, grid);
    let index_to_point = |mut k: usize, offset: f64| -> Vec<f64> {
        (0..dim)
            .map(|mu| {
                let i = k % side;
                k /= side;
                lo[mu] + (i as f64 + offset) * width[mu]
            })
            .collect()
    };
    let vertex_count = side.pow(dim as u32);
    let values: Vec<Vec<f64>> = (0..vertex_count)
        .into_par_iter()
        .map(|k| field.eval(&index_to_point(k, 0.0)))
        .collect();
    let cell_count = grid.pow(dim as u32);
    (0..cell_count)
        .into_par_iter()
        .filter_map(|c| {
            let mut rest = c;
            let mut base = 0;
            let mut stride = 1;
            let mut centre = Vec::with_capacity(dim);
            for mu in 0..dim {
                let i = rest % grid;
                rest /= grid;
                base += i * stride;
                stride *= side;
                centre.push(lo[mu] + (i as f64 + 0.5) * width[mu]);
            }
            if !keep(&centre) {
                return None;
            }
            let mut lo_v = vec![f64::INFINITY; dim];
            let mut hi_v = vec![f64::NEG_INFINITY; dim];
            for corner in 0..(1usize << dim) {
                let mut k = base;
                let mut stride = 1;
                for mu in 0..dim {
                    if corner >> mu & 1 == 1 {
                        k += stride;
                    }
                    stride *= side;
                }
                for (a, v) in values[k].iter().enumerate() {
                    lo_v[a] = lo_v[a].min(*v);
                    hi_v[a] = hi_v[a].max(*v);
                }
            }
            let brackets = lo_v.iter().zip(&hi_v).all(|(l, h)| *l <= 0.0 && *h >= 0.0);
            brackets.then_some(centre)
        })
        .collect()
}

/// Distinct zeros reachable by Newton from the candidate cells of a box,
/// sorted lexicographically. Zeros closer than two cell widths are refused.
fn locate<F: VectorField + ?Sized>(
    field: &F,
    lo: &[f64],
    hi: &[f64],
    search: &ZeroSearch,
    keep: &(dyn Fn(&[f64]) -> bool + Sync),
) -> Result<(Vec<Vec<f64>>, f64)> {
    let width = cell_widths(lo, hi, search.grid);
    let min_width = width.iter().cloned().fold(f64::INFINITY, f64::min);
    let diag = norm(&width);
    let starts = candidate_cells(field, lo, hi, search.grid, keep);
    let outcomes: Vec<(Vec<f64>, NewtonOutcome)> = starts
        .into_par_iter()
        .map(|s| {
            let out = newton(field, &s, search.tol, search.max_iterations);
            (s, out)
        })
        .collect();

    let mut found: Vec<Vec<f64>> = Vec::new();
    for (start, out) in outcomes {
        if out.converged {
            found.push(out.point);
        } else if out.residual < search.tol.sqrt() && distance(&out.point, &start) < 2.0 * diag {
            return Err(Error::NewtonNonConvergence {
                cell: start,
                residual: out.residual,
            });
        }
    }
    found.sort_by(|a, b| a.partial_cmp(b).expect("finite zero coordinates"));

    let merge = 1e-3 * min_width;
    let mut distinct: Vec<Vec<f64>> = Vec::new();
    for p in found {
        if let Some(q) = distinct.iter().find(|q| distance(q, &p) < 2.0 * min_width) {
            if distance(q, &p) >= merge {
                return Err(Error::ZerosTooClose {
                    a: q.clone(),
                    b: p,
                    radius: 2.0 * min_width,
                });
            }
            continue;
        }
        distinct.push(p);
    }
    Ok((distinct, min_width))
}

/// Local index on the sphere of radius `radius` about `z`. In one dimension
/// the sphere is the two points `z ± radius`.
pub fn local_winding<F: VectorField + ?Sized>(field: &F, z: &[f64], radius: f64, scale: f64) -> Result<WindingResult> {
    if field.dim() == 1 {
        let right = field.eval(&[z[0] + radius])[0];
        let left = field.eval(&[z[0] - radius])[0];
        let min_norm = right.abs().min(left.abs());
        if min_norm < ZERO_ON_SPHERE_THRESHOLD {
            return Err(Error::ZeroOnSphere { min_norm });
        }
        let raw = (right.signum() - left.signum()) / 2.0;
        return Ok(WindingResult {
            raw,
            rounded: raw as i64,
            residual: 0.0,
            center: z.to_vec(),
            radius,
        });
    }
    let q = SphereQuadrature::default_for(field.dim(), scale);
    winding_number_refining(field, z, radius, &q)
}

fn singular_values(jac: &DMatrix<f64>) -> (f64, f64) {
    let sv = jac.clone().singular_values();
    (sv.min(), sv.max())
}

/// Index data of the zero at `z`, with the winding taken on a sphere of
/// radius `radius`.
pub fn classify_zero<F: VectorField + ?Sized>(field: &F, z: &[f64], radius: f64, scale: f64) -> Result<ZeroRecord> {
    let jac = field.jacobian(z);
    let jac_det = jac.determinant();
    let (smin, smax) = singular_values(&jac);
    let nondegenerate = smin > REGULAR_SIGMA * smax.max(1.0);
    let w = local_winding(field, z, radius, scale)?;
    let winding = w.rounded;
    let det_sign: i8 = if jac_det < 0.0 { -1 } else { 1 };
    if nondegenerate && winding != det_sign as i64 {
        return Err(Error::IndexMismatch {
            point: z.to_vec(),
            eta: det_sign,
            winding,
        });
    }
    let eta = match winding.signum() {
        0 => det_sign,
        s => s as i8,
    };
    Ok(ZeroRecord {
        location: z.to_vec(),
        jac_det,
        eta,
        beta: winding.unsigned_abs() as u32,
        winding,
        regular: nondegenerate,
        flagged: winding == 0,
        isolation_radius: radius,
        winding_residual: w.residual,
    })
}

fn nearest(p: &[f64], others: &[Vec<f64>]) -> f64 {
    others
        .iter()
        .map(|q| distance(p, q))
        .filter(|d| *d > 0.0)
        .fold(f64::INFINITY, f64::min)
}

/// Zeros of `field` strictly inside `domain`.
pub fn find_zeros<F: VectorField + ?Sized>(
    field: &F,
    domain: &ChartDomain,
    search: &ZeroSearch,
) -> Result<Vec<ZeroRecord>> {
    domain.validate()?;
    if field.dim() != domain.dim() {
        return Err(Error::DimensionMismatch {
            left: field.dim(),
            right: domain.dim(),
        });
    }
    let (lo, hi) = domain.bounding_box();
    let reach = 0.5 * norm(&cell_widths(&lo, &hi, search.grid));
    let keep = |c: &[f64]| domain.depth(c) > -reach;
    let (all, cell) = locate(field, &lo, &hi, search, &keep)?;
    let boundary_tol = 1e-9 * lo.iter().chain(&hi).fold(1.0f64, |m, v| m.max(v.abs()));
    let mut records = Vec::new();
    for z in &all {
        let depth = domain.depth(z);
        if depth.abs() <= boundary_tol {
            return Err(Error::ZeroOnBoundary { point: z.clone() });
        }
        if depth < 0.0 {
            continue;
        }
        let radius = cell.min(0.45 * nearest(z, &all)).min(0.9 * depth);
        records.push(classify_zero(field, z, radius, search.quadrature_scale)?);
    }
    Ok(records)
}

/// A zero on a closed manifold, classified in the chart where it is most
/// central.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ManifoldZero {
    pub chart: usize,
    /// Ambient point for spheres, wrapped chart coordinates for tori.
    pub point: Vec<f64>,
    pub record: ZeroRecord,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct IndexSum {
    pub zeros: Vec<ManifoldZero>,
    /// `Σ βᵢ ηᵢ`.
    pub sum: i64,
    /// `deg φ = Σ W`; equals `sum` by construction, kept for the report.
    pub degree: i64,
    pub seam_attempts: usize,
}

impl IndexSum {
    fn assemble(zeros: Vec<ManifoldZero>, seam_attempts: usize) -> Self {
        let sum = zeros
            .iter()
            .map(|z| z.record.beta as i64 * z.record.eta as i64)
            .sum();
        let degree = zeros.iter().map(|z| z.record.winding).sum();
        Self {
            zeros,
            sum,
            degree,
            seam_attempts,
        }
    }
}

/// `χ(M) = Σ βᵢ ηᵢ` over the zeros of `field` on a closed manifold.
///
/// On `S²` the field is ambient and only its tangential part counts; on tori
/// it is given in the periodic chart.
pub fn total_index(field: Arc<dyn VectorField>, m: &ClosedManifold, search: &ZeroSearch) -> Result<IndexSum> {
    if field.dim() != m.field_dim() {
        return Err(Error::DimensionMismatch {
            left: field.dim(),
            right: m.field_dim(),
        });
    }
    match m {
        ClosedManifold::Sphere2 => sphere_index(field, &SphereAtlas::new(vec![0.0; 3], 1.0), search),
        ClosedManifold::FlatTorus | ClosedManifold::EmbeddedTorus { .. } => torus_index(field.as_ref(), search),
    }
}

const SEAM_BAND: f64 = 1e-3;

fn sphere_index(field: Arc<dyn VectorField>, base: &SphereAtlas, search: &ZeroSearch) -> Result<IndexSum> {
    let (zeros, attempts) = sphere_zeros(field, base, search)?;
    Ok(IndexSum::assemble(zeros, attempts))
}

/// Zeros of the tangential part of an ambient field on a round sphere of any
/// dimension, with the atlas rotated off zeros that land on its equator.
pub(crate) fn sphere_zeros(
    field: Arc<dyn VectorField>,
    base: &SphereAtlas,
    search: &ZeroSearch,
) -> Result<(Vec<ManifoldZero>, usize)> {
    let mut last_seam = Vec::new();
    for attempt in 0..SEAM_ATTEMPTS {
        let atlas = if attempt == 0 {
            base.clone()
        } else {
            base.rotated(attempt as u64)
        };
        match sphere_index_in(field.clone(), &atlas, search) {
            Ok(zeros) => return Ok((zeros, attempt + 1)),
            Err(Error::SeamGuard { point }) => last_seam = point,
            Err(e) => return Err(e),
        }
    }
    Err(Error::SeamGuard { point: last_seam })
}

fn sphere_index_in(field: Arc<dyn VectorField>, atlas: &SphereAtlas, search: &ZeroSearch) -> Result<Vec<ManifoldZero>> {
    let d = atlas.chart_dim();
    let lo = vec![-STEREO_HALF_WIDTH; d];
    let hi = vec![STEREO_HALF_WIDTH; d];
    let charts = [atlas.chart_field(0, field.clone()), atlas.chart_field(1, field)];
    let mut ambient: Vec<Vec<f64>> = Vec::new();
    let mut cell = f64::INFINITY;
    for (k, cf) in charts.iter().enumerate() {
        let (zs, w) = locate(cf, &lo, &hi, search, &|_| true)?;
        cell = cell.min(w);
        ambient.extend(zs.iter().map(|y| atlas.to_ambient(k, y)));
    }
    // chart conformal factor is at least ρ on ‖y‖ ≤ 1
    let merge = 1e-3 * cell * atlas.radius;
    ambient.sort_by(|a, b| a.partial_cmp(b).expect("finite zero coordinates"));
    let mut distinct: Vec<Vec<f64>> = Vec::new();
    for p in ambient {
        if !distinct.iter().any(|q| distance(q, &p) < merge) {
            distinct.push(p);
        }
    }
    let mut zeros = Vec::new();
    for x in &distinct {
        let height = atlas.height(x);
        if height.abs() < SEAM_BAND {
            return Err(Error::SeamGuard { point: x.clone() });
        }
        let chart = if height < 0.0 { 0 } else { 1 };
        let y = &atlas.to_chart(chart, x);
        let others: Vec<Vec<f64>> = distinct
            .iter()
            .filter(|q| *q != x)
            .map(|q| atlas.to_chart(chart, q))
            .filter(|q| q.iter().all(|v| v.is_finite()))
            .collect();
        let radius = cell.min(0.45 * nearest(y, &others));
        let record = classify_zero(&charts[chart], y, radius, search.quadrature_scale)?;
        zeros.push(ManifoldZero {
            chart,
            point: x.clone(),
            record,
        });
    }
    Ok(zeros)
}

fn torus_index<F: VectorField + ?Sized>(field: &F, search: &ZeroSearch) -> Result<IndexSum> {
    check_periodic(field)?;
    // irrational fractions of the period so a zero sits on at most one seam
    let seams = [0.0, 0.381_966_011_250_105 * TorusChart::PERIOD, 0.723_606_797_749_979 * TorusChart::PERIOD];
    let mut last_seam = Vec::new();
    for (attempt, &seam) in seams.iter().enumerate().take(SEAM_ATTEMPTS) {
        let chart = TorusChart { seam };
        match torus_index_in(field, chart, search) {
            Ok(zeros) => return Ok(IndexSum::assemble(zeros, attempt + 1)),
            Err(Error::SeamGuard { point }) => last_seam = point,
            Err(e) => return Err(e),
        }
    }
    Err(Error::SeamGuard { point: last_seam })
}

fn torus_index_in<F: VectorField + ?Sized>(field: &F, chart: TorusChart, search: &ZeroSearch) -> Result<Vec<ManifoldZero>> {
    let lo = vec![chart.seam; 2];
    let hi = vec![chart.seam + TorusChart::PERIOD; 2];
    let (found, cell) = locate(field, &lo, &hi, search, &|_| true)?;
    let band = SEAM_BAND * TorusChart::PERIOD;
    let mut wrapped: Vec<Vec<f64>> = Vec::new();
    for z in found {
        let w = chart.wrap(&z);
        if w.iter().any(|v| v - chart.seam < band || chart.seam + TorusChart::PERIOD - v < band) {
            return Err(Error::SeamGuard { point: w });
        }
        if !wrapped.iter().any(|q| distance(q, &w) < 1e-3 * cell) {
            wrapped.push(w);
        }
    }
    wrapped.sort_by(|a, b| a.partial_cmp(b).expect("finite zero coordinates"));
    let mut zeros = Vec::new();
    for z in &wrapped {
        let radius = cell.min(0.45 * nearest(z, &wrapped));
        let record = classify_zero(field, z, radius, search.quadrature_scale)?;
        zeros.push(ManifoldZero {
            chart: 0,
            point: z.clone(),
            record,
        });
    }
    Ok(zeros)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RegularityReport {
    pub condition_number: f64,
    pub sigma_min: f64,
    pub sigma_max: f64,
    pub singular_jacobian: bool,
    pub isolation_radius: f64,
    pub winding_residual: f64,
}

pub fn regularity_report<F: VectorField + ?Sized>(field: &F, zero: &ZeroRecord) -> RegularityReport {
    let jac = field.jacobian(&zero.location);
    let (sigma_min, sigma_max) = singular_values(&jac);
    RegularityReport {
        condition_number: if sigma_min > 0.0 { sigma_max / sigma_min } else { f64::INFINITY },
        sigma_min,
        sigma_max,
        singular_jacobian: sigma_min <= REGULAR_SIGMA * sigma_max.max(1.0),
        isolation_radius: zero.isolation_radius,
        winding_residual: zero.winding_residual,
    }
}
