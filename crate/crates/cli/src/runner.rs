//! Executes the methods of a scenario and assembles its report.

use eulerdeg::boundary::chi_with_boundary;
use eulerdeg::connection::{flatness_scan, FlatnessScan};
use eulerdeg::gbc::integrate_euler;
use eulerdeg::quadrature::SphereQuadrature;
use eulerdeg::topology::catalog_chi;
use eulerdeg::winding::winding_number_refining;
use eulerdeg::zeros::{find_zeros, total_index, ManifoldZero, ZeroSearch};
use std::f64::consts::PI;

use crate::error::CliError;
use crate::report::{BoundarySection, ChiReport, FlatnessSection, GbcSection, IndexSumSection, MethodRow};
use crate::scenario::{FieldSpec, Method, Scenario};

/// Largest off-singular curvature norm accepted by the flatness scan.
pub const FLATNESS_TOL: f64 = 1e-6;
/// Accepted distance of the holonomy flux from `2πk`.
pub const FLUX_TOL: f64 = 1e-4;

#[derive(Debug, Clone, PartialEq)]
pub struct RunOptions {
    pub resolution_scale: f64,
    pub assert_paper_boundary: bool,
}

impl Default for RunOptions {
    fn default() -> Self {
        Self {
            resolution_scale: 1.0,
            assert_paper_boundary: false,
        }
    }
}

pub fn run_scenario(s: &Scenario, opts: &RunOptions) -> Result<ChiReport, CliError> {
    s.validate()?;
    let scale = s.resolutions.scale * opts.resolution_scale;
    let mut report = ChiReport::new(&s.name, &s.description, scale);
    let mut methods = s.methods.clone();
    methods.sort();
    methods.dedup();
    for m in methods {
        let context = |e: CliError| match e {
            CliError::Compute(err) => CliError::Scenario(format!("{} / {m}: {err}", s.name)),
            other => other,
        };
        match m {
            Method::IndexSum => index_sum(s, scale, &mut report).map_err(context)?,
            Method::BoundaryTheorem => boundary(s, scale, opts, &mut report).map_err(context)?,
            Method::GbcIntegral => gbc(s, scale, &mut report).map_err(context)?,
            Method::FlatnessScan => flatness(s, scale, &mut report).map_err(context)?,
        }
    }
    Ok(report)
}

fn field_spec(s: &Scenario) -> Result<&FieldSpec, CliError> {
    s.field
        .as_ref()
        .ok_or_else(|| CliError::Scenario(format!("{}: no field given", s.name)))
}

fn index_sum(s: &Scenario, scale: f64, report: &mut ChiReport) -> Result<(), CliError> {
    let field = field_spec(s)?.vector_field()?;
    let section = if let Some(m) = s.domain.closed_manifold() {
        let sum = total_index(field, &m, &ZeroSearch::for_dim(2, scale))?;
        let name = m.catalog_name();
        IndexSumSection {
            manifold: name.to_string(),
            sum: sum.sum,
            degree: sum.degree,
            oracle: catalog_chi(name)?,
            oracle_kind: format!("triangulation {name}"),
            seam_attempts: sum.seam_attempts,
            zeros: sum.zeros,
        }
    } else {
        let ball = s.domain.ball()?.expect("validated: index-sum needs a closed manifold or a ball");
        let zeros = find_zeros(field.as_ref(), &ball.chart_domain(), &ZeroSearch::for_dim(ball.dim(), scale))?;
        let q = SphereQuadrature::default_for(ball.dim(), scale);
        let outer = winding_number_refining(field.as_ref(), &ball.center, ball.radius, &q)?;
        let sum: i64 = zeros.iter().map(|z| z.beta as i64 * z.eta as i64).sum();
        IndexSumSection {
            manifold: format!("B{}", ball.dim()),
            sum,
            degree: zeros.iter().map(|z| z.winding).sum(),
            oracle: outer.rounded,
            oracle_kind: "winding on the boundary sphere".into(),
            seam_attempts: 0,
            zeros: zeros
                .into_iter()
                .map(|z| ManifoldZero {
                    chart: 0,
                    point: z.location.clone(),
                    record: z,
                })
                .collect(),
        }
    };
    let residual = section
        .zeros
        .iter()
        .map(|z| z.record.winding_residual)
        .fold(0.0, f64::max);
    report.push_row(MethodRow {
        method: "index-sum".into(),
        raw: section.sum as f64,
        rounded: Some(section.sum),
        oracle: Some(section.oracle),
        residual,
        agree: section.sum == section.oracle && section.degree == section.sum,
        asserted: true,
    });
    report.index_sum = Some(section);
    Ok(())
}

fn boundary(s: &Scenario, scale: f64, opts: &RunOptions, report: &mut ChiReport) -> Result<(), CliError> {
    let field = field_spec(s)?.vector_field()?;
    let ball = s.domain.ball()?.expect("validated: boundary-theorem needs a ball");
    let t = chi_with_boundary(field, &ball, scale)?;
    let paper_asserted = opts.assert_paper_boundary || t.paper_hypotheses;
    report.push_row(MethodRow {
        method: "boundary-morse".into(),
        raw: t.chi_morse as f64,
        rounded: Some(t.chi_morse),
        oracle: Some(t.chi_oracle),
        residual: 0.0,
        agree: t.morse_agrees,
        asserted: true,
    });
    report.push_row(MethodRow {
        method: "boundary-paper".into(),
        raw: t.chi_paper,
        rounded: Some(t.chi_paper.round() as i64),
        oracle: Some(t.chi_oracle),
        residual: (t.chi_paper - t.chi_oracle as f64).abs(),
        agree: t.paper_agrees,
        asserted: paper_asserted,
    });
    // ∂B^N is an odd-dimensional sphere
    report.push_row(MethodRow {
        method: "boundary-sum".into(),
        raw: t.boundary.winding_sum as f64,
        rounded: Some(t.boundary.winding_sum),
        oracle: Some(0),
        residual: 0.0,
        agree: t.boundary.winding_sum == 0,
        asserted: true,
    });
    if let Some(chi) = t.chi_transversal {
        report.push_row(MethodRow {
            method: "boundary-transversal".into(),
            raw: chi as f64,
            rounded: Some(chi),
            oracle: Some(t.chi_oracle),
            residual: 0.0,
            agree: chi == t.chi_oracle,
            asserted: true,
        });
    }
    report.boundary = Some(BoundarySection::new(t, paper_asserted));
    Ok(())
}

fn gbc(s: &Scenario, scale: f64, report: &mut ChiReport) -> Result<(), CliError> {
    let m = s.domain.curved_manifold().expect("validated: gbc-integral needs a catalog manifold");
    let oracle = catalog_chi(m.catalog_name()?)?;
    let result = integrate_euler(&m, scale)?;
    report.push_row(MethodRow {
        method: "gbc-integral".into(),
        raw: result.raw,
        rounded: Some(result.rounded),
        oracle: Some(oracle),
        residual: result.residual,
        agree: result.rounded == oracle,
        asserted: true,
    });
    report.gbc = Some(GbcSection {
        manifold: m,
        oracle,
        result,
    });
    Ok(())
}

fn flatness(s: &Scenario, scale: f64, report: &mut ChiReport) -> Result<(), CliError> {
    let Some(FieldSpec::HedgehogFrame { winding }) = s.field else {
        return Err(CliError::Scenario(format!("{}: flatness-scan needs a hedgehog-frame field", s.name)));
    };
    let ff = s.frame_field().expect("validated: square box with hedgehog frame");
    let defaults = FlatnessScan::default();
    let scan = FlatnessScan {
        grid: ((defaults.grid as f64 * scale).round() as usize).max(4),
        loop_samples: ((defaults.loop_samples as f64 * scale).round() as usize).max(16),
        ..defaults
    };
    let r = flatness_scan(&ff, &scan)?;
    report.push_row(MethodRow {
        method: "flatness-curvature".into(),
        raw: r.max_offsingular_norm,
        rounded: None,
        oracle: Some(0),
        residual: r.max_offsingular_norm,
        agree: r.max_offsingular_norm < FLATNESS_TOL,
        asserted: true,
    });
    for flux in &r.singular_flux {
        let residual = (flux.flux - 2.0 * PI * winding as f64).abs();
        report.push_row(MethodRow {
            method: "holonomy-flux".into(),
            raw: flux.flux_over_2pi,
            rounded: Some(flux.flux_over_2pi.round() as i64),
            oracle: flux.oracle_turns,
            residual,
            agree: residual < FLUX_TOL && flux.oracle_turns == Some(winding as i64),
            asserted: true,
        });
    }
    report.flatness = Some(FlatnessSection { winding, report: r });
    Ok(())
}
