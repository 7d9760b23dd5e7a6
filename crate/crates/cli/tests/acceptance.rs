//! One pass/fail line per acceptance criterion.

use std::f64::consts::PI;
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::path::Path;
use std::process::{Command, ExitCode};
use std::sync::Arc;

use eulerdeg::boundary::{chi_with_boundary, BoundedDomain};
use eulerdeg::clifford::{
    blade_grade, rotor_from_plane_angles, rotation_planes, sandwich_eigenvalue, sandwich_sum, versor_frame, Multivector,
};
use eulerdeg::connection::{decompose_check, flatness_scan, FlatnessScan, RotorFrameField, TrigConnection};
use eulerdeg::domain::{ChartDomain, ClosedManifold};
use eulerdeg::field::{ComplexFactor, FnField, PolynomialField, VectorField};
use eulerdeg::gbc::{integrate_euler, CurvedManifold};
use eulerdeg::quadrature::SphereQuadrature;
use eulerdeg::topology::catalog_chi;
use eulerdeg::winding::{oracle_degree_anglesum, oracle_degree_preimage, winding_number_refining};
use eulerdeg::zeros::{find_zeros, total_index, ZeroSearch};
use nalgebra::DMatrix;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

type Outcome = Result<String, String>;

fn check(ok: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if ok {
        Ok(())
    } else {
        Err(msg())
    }
}

fn clifford_identities() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    let mut worst: f64 = 0.0;
    for n in 2..=6 {
        for a in 0..n {
            for b in 0..n {
                let ga = Multivector::basis_vector(n, a).map_err(|e| e.to_string())?;
                let gb = Multivector::basis_vector(n, b).map_err(|e| e.to_string())?;
                let anti = &ga * &gb + &gb * &ga;
                let expected = Multivector::scalar(n, if a == b { 2.0 } else { 0.0 }).map_err(|e| e.to_string())?;
                check(anti == expected, || format!("anticommutator of γ{a}, γ{b} at N={n} is {anti:?}"))?;
            }
        }
        for _ in 0..100 {
            let angles: Vec<f64> = (0..rotation_planes(n).len()).map(|_| rng.gen_range(-PI..PI)).collect();
            let rotor = rotor_from_plane_angles(n, &angles).map_err(|e| e.to_string())?;
            let frame = versor_frame(&rotor).map_err(|e| e.to_string())?;
            for r in 0..=n {
                let coeffs: Vec<f64> = (0..1usize << n)
                    .map(|blade| if blade_grade(blade) == r { rng.gen_range(-1.0..1.0) } else { 0.0 })
                    .collect();
                let a = Multivector::from_coeffs(n, coeffs).map_err(|e| e.to_string())?;
                let lhs = sandwich_sum(&a, &frame).map_err(|e| e.to_string())?;
                worst = worst.max(lhs.max_abs_diff(&a.scale(sandwich_eigenvalue(n, r))));
            }
        }
    }
    check(worst < 1e-10, || format!("sandwich deviation {worst:e}"))?;
    Ok(format!("N=2..6, 100 rotors each, all grades, max deviation {worst:.2e}"))
}

fn decomposition_order() -> Outcome {
    let hs = [1e-2, 1e-3, 1e-4];
    let mut rng = ChaCha8Rng::seed_from_u64(2);
    let (mut lo, mut hi) = (f64::INFINITY, f64::NEG_INFINITY);
    for n in [2, 4] {
        for seed in 0..20u64 {
            let ff = RotorFrameField::random_trigonometric(n, seed, 2.0);
            let conn = TrigConnection::random(n, 1000 + seed);
            let x: Vec<f64> = (0..n).map(|_| rng.gen_range(-0.5..0.5)).collect();
            let logs: Vec<(f64, f64)> = hs
                .iter()
                .map(|&h| {
                    let r = decompose_check(&ff, &conn.sample(&x, h), h).map_err(|e| e.to_string())?;
                    Ok((h.log10(), r.log10()))
                })
                .collect::<Result<_, String>>()?;
            let mx = logs.iter().map(|p| p.0).sum::<f64>() / 3.0;
            let my = logs.iter().map(|p| p.1).sum::<f64>() / 3.0;
            let slope = logs.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum::<f64>()
                / logs.iter().map(|p| (p.0 - mx).powi(2)).sum::<f64>();
            check((slope - 2.0).abs() <= 0.2, || format!("N={n} seed {seed}: slope {slope:.3}"))?;
            lo = lo.min(slope);
            hi = hi.max(slope);
        }
    }
    Ok(format!("40 pairs at N=2,4, log-log slopes in [{lo:.3}, {hi:.3}]"))
}

fn pseudo_flat_dichotomy() -> Outcome {
    let mut parts = Vec::new();
    for k in [1, 2] {
        let ff = RotorFrameField::hedgehog(k, [0.0, 0.0], 2.0);
        let scan = FlatnessScan::default();
        let r = flatness_scan(&ff, &scan).map_err(|e| e.to_string())?;
        check(r.max_offsingular_norm < 1e-6, || format!("k={k}: |F| = {:e}", r.max_offsingular_norm))?;
        let flux = r.singular_flux.first().ok_or("no singular point found")?;
        let err = (flux.flux - 2.0 * PI * k as f64).abs();
        check(err < 1e-4, || format!("k={k}: flux {} off by {err:e}", flux.flux))?;
        parts.push(format!("k={k}: |F| {:.1e}, flux error {err:.1e}", r.max_offsingular_norm));
    }
    Ok(parts.join("; "))
}

fn winding_catalog() -> Outcome {
    use ComplexFactor::{Conjugate, Holomorphic};
    let c = |fs: &[ComplexFactor]| PolynomialField::complex_product(fs);
    let planar: Vec<(&str, i64, PolynomialField)> = vec![
        ("conj^2", -2, c(&[Conjugate((0.1, 0.0)), Conjugate((-0.2, 0.1))])),
        ("conj", -1, c(&[Conjugate((0.0, 0.3))])),
        ("saddle", -1, PolynomialField::linear(&DMatrix::from_row_slice(2, 2, &[1.0, 0.0, 0.0, -1.0]))),
        ("constant", 0, PolynomialField::constant(&[0.3, -0.7])),
        ("identity", 1, PolynomialField::identity(2)),
        ("rotation", 1, PolynomialField::pair_rotation(2).map_err(|e| e.to_string())?),
        ("z^2", 2, c(&[Holomorphic((0.2, 0.2)), Holomorphic((-0.3, 0.0))])),
        ("z^3", 3, c(&[Holomorphic((0.0, 0.0)), Holomorphic((0.4, 0.1)), Holomorphic((-0.1, -0.5))])),
    ];
    let four: Vec<(&str, i64, PolynomialField)> = vec![
        ("identity", 1, PolynomialField::identity(4)),
        ("constant", 0, PolynomialField::constant(&[1.0, 0.0, 0.0, 0.0])),
        ("quaternion-square", 2, PolynomialField::quaternion_square()),
        ("pair-rotation", 1, PolynomialField::pair_rotation(4).map_err(|e| e.to_string())?),
    ];
    let mut worst2: f64 = 0.0;
    let mut worst4: f64 = 0.0;
    for (name, deg, f) in &planar {
        let w = winding_number_refining(f, &[0.0, 0.0], 1.0, &SphereQuadrature::default_for(2, 1.0))
            .map_err(|e| format!("{name}: {e}"))?;
        let angle = oracle_degree_anglesum(f, &[0.0, 0.0], 1.0, 1024).map_err(|e| format!("{name}: {e}"))?;
        let pre = oracle_degree_preimage(f, &[0.0, 0.0], 1.0, &[0.6, 0.8], 64).map_err(|e| format!("{name}: {e}"))?;
        check(w.residual < 1e-6, || format!("N=2 {name}: residual {:e}", w.residual))?;
        check([w.rounded, angle, pre] == [*deg; 3], || {
            format!("N=2 {name}: winding {}, angle-sum {angle}, preimage {pre}, expected {deg}", w.rounded)
        })?;
        worst2 = worst2.max(w.residual);
    }
    for (name, deg, f) in &four {
        let w = winding_number_refining(f, &[0.0; 4], 1.0, &SphereQuadrature::default_for(4, 1.0))
            .map_err(|e| format!("{name}: {e}"))?;
        let a = oracle_degree_preimage(f, &[0.0; 4], 1.0, &[0.3, -0.5, 0.7, 0.4], 6).map_err(|e| format!("{name}: {e}"))?;
        let b = oracle_degree_preimage(f, &[0.0; 4], 1.0, &[-0.6, 0.2, 0.1, 0.75], 8).map_err(|e| format!("{name}: {e}"))?;
        check(w.residual < 1e-3, || format!("N=4 {name}: residual {:e}", w.residual))?;
        check([w.rounded, a, b] == [*deg; 3], || {
            format!("N=4 {name}: winding {}, preimage {a} / {b}, expected {deg}", w.rounded)
        })?;
        worst4 = worst4.max(w.residual);
    }
    Ok(format!(
        "12 fields, residual max {worst2:.1e} (N=2) / {worst4:.1e} (N=4), oracles agree"
    ))
}

fn excision() -> Outcome {
    use ComplexFactor::{Conjugate, Holomorphic};
    let f = PolynomialField::complex_product(&[
        Holomorphic((0.4, 0.1)),
        Conjugate((-0.5, 0.0)),
        Holomorphic((0.0, -0.45)),
        Holomorphic((0.0, -0.45)),
    ]);
    let zeros = find_zeros(&f, &ChartDomain::unit_ball(2), &ZeroSearch::for_dim(2, 1.0)).map_err(|e| e.to_string())?;
    let mut windings: Vec<i64> = zeros.iter().map(|z| z.winding).collect();
    windings.sort();
    check(windings == [-1, 1, 2], || format!("per-zero windings {windings:?}"))?;
    let big = winding_number_refining(&f, &[0.0, 0.0], 1.0, &SphereQuadrature::default_for(2, 1.0))
        .map_err(|e| e.to_string())?;
    let sum: i64 = windings.iter().sum();
    check(big.rounded == 2 && sum == 2, || format!("big sphere {}, sum {sum}", big.rounded))?;
    Ok(format!("zeros {windings:?}, sum {sum}, big-sphere winding {}", big.rounded))
}

fn hopf() -> Outcome {
    let rotation = PolynomialField::linear(&DMatrix::from_row_slice(3, 3, &[0.0, -1.0, 0.0, 1.0, 0.0, 0.0, 0.0, 0.0, 0.0]));
    let cases: Vec<(&str, Arc<dyn VectorField>, ClosedManifold)> = vec![
        ("S2 rotation", Arc::new(rotation), ClosedManifold::Sphere2),
        ("S2 height", Arc::new(PolynomialField::constant(&[0.0, 0.0, 1.0])), ClosedManifold::Sphere2),
        ("T2 constant", Arc::new(PolynomialField::constant(&[1.0, 0.0])), ClosedManifold::FlatTorus),
        (
            "T2 gradient",
            Arc::new(FnField::torus_gradient()),
            ClosedManifold::EmbeddedTorus { major: 2.0, minor: 1.0 },
        ),
    ];
    let mut parts = Vec::new();
    for (name, field, m) in cases {
        let s = total_index(field, &m, &ZeroSearch::for_dim(2, 1.0)).map_err(|e| format!("{name}: {e}"))?;
        let oracle = catalog_chi(m.catalog_name()).map_err(|e| e.to_string())?;
        check(s.sum == oracle && s.degree == oracle, || {
            format!("{name}: index sum {}, degree {}, oracle {oracle}", s.sum, s.degree)
        })?;
        parts.push(format!("{name} {}", s.sum));
    }
    Ok(parts.join(", "))
}

fn gauss_bonnet_chern() -> Outcome {
    let mut parts = Vec::new();
    let mut run = |m: CurvedManifold, target: f64, tol: f64, label: String| -> Result<(), String> {
        let r = integrate_euler(&m, 1.0).map_err(|e| format!("{label}: {e}"))?;
        let err = (r.raw - target).abs();
        check(err <= tol, || format!("{label}: {} (error {err:e})", r.raw))?;
        parts.push(format!("{label} {err:.0e}"));
        Ok(())
    };
    for r in [0.5, 1.0, 3.0] {
        run(CurvedManifold::Sphere { dim: 2, radius: r }, 2.0, 1e-6, format!("S2(r={r})"))?;
    }
    run(CurvedManifold::FlatTorus, 0.0, 1e-8, "flat T2".into())?;
    run(CurvedManifold::EmbeddedTorus { major: 2.0, minor: 1.0 }, 0.0, 1e-8, "embedded T2".into())?;
    run(CurvedManifold::Sphere { dim: 4, radius: 1.0 }, 2.0, 1e-4, "S4".into())?;
    Ok(format!("errors: {}", parts.join(", ")))
}

fn boundary_endorsed() -> Outcome {
    let mut count = 0;
    for n in [2, 4] {
        let neg = PolynomialField::linear(&(DMatrix::identity(n, n) * -1.0));
        let cases: Vec<(&str, Arc<dyn VectorField>)> = vec![
            ("outward", Arc::new(PolynomialField::identity(n))),
            ("inward", Arc::new(neg)),
            ("rotation", Arc::new(PolynomialField::pair_rotation(n).map_err(|e| e.to_string())?)),
        ];
        for (name, f) in cases {
            let t = chi_with_boundary(f, &BoundedDomain::unit_ball(n), 1.0).map_err(|e| format!("B{n} {name}: {e}"))?;
            let flagged = t.flags.iter().any(|f| f == "transversal" || f == "constant-alpha");
            check(
                t.chi_transversal == Some(1)
                    && t.chi_morse == 1
                    && t.chi_paper == 1.0
                    && t.chi_oracle == 1
                    && t.boundary_all_half == 0.0
                    && flagged,
                || {
                    format!(
                        "B{n} {name}: transversal {:?}, morse {}, chi_paper {}, oracle {}, boundary {}, flags {:?}",
                        t.chi_transversal, t.chi_morse, t.chi_paper, t.chi_oracle, t.boundary_all_half, t.flags
                    )
                },
            )?;
            count += 1;
        }
    }
    Ok(format!("{count} fields on B2 and B4 give 1 with vanishing boundary term"))
}

fn boundary_consistency() -> Outcome {
    let cases: Vec<(&str, Arc<dyn VectorField>)> = vec![
        ("constant", Arc::new(PolynomialField::constant(&[1.0, 0.0]))),
        (
            "saddle",
            Arc::new(PolynomialField::linear(&DMatrix::from_row_slice(2, 2, &[1.0, 0.0, 0.0, -1.0]))),
        ),
    ];
    let mut parts = Vec::new();
    for (name, f) in cases {
        let t = chi_with_boundary(f, &BoundedDomain::unit_ball(2), 1.0).map_err(|e| format!("{name}: {e}"))?;
        let flagged = t.flags.iter().any(|f| f == "paper-disagrees");
        check(
            t.boundary.winding_sum == 0
                && t.chi_morse == 1
                && t.chi_oracle == 1
                && flagged == (t.chi_paper != t.chi_oracle as f64),
            || {
                format!(
                    "{name}: boundary sum {}, morse {}, oracle {}, chi_paper {}, flags {:?}",
                    t.boundary.winding_sum, t.chi_morse, t.chi_oracle, t.chi_paper, t.flags
                )
            },
        )?;
        parts.push(format!(
            "{name}: {} boundary zeros summing to 0, morse 1, chi_paper {}{}",
            t.boundary.zeros.len(),
            t.chi_paper,
            if flagged { " (flagged)" } else { "" }
        ));
    }
    Ok(parts.join("; "))
}

fn determinism() -> Outcome {
    let dirs = [tempfile::tempdir().map_err(|e| e.to_string())?, tempfile::tempdir().map_err(|e| e.to_string())?];
    let children: Vec<_> = dirs
        .iter()
        .map(|d| {
            Command::new(env!("CARGO_BIN_EXE_eulerdeg"))
                .args(["run", "--bundled", "--out"])
                .arg(d.path())
                .output()
        })
        .collect();
    for c in children {
        let out = c.map_err(|e| e.to_string())?;
        check(out.status.success(), || format!("bundled run exited with {:?}", out.status.code()))?;
    }
    let list = |p: &Path| -> Result<Vec<String>, String> {
        let mut names: Vec<String> = std::fs::read_dir(p)
            .map_err(|e| e.to_string())?
            .map(|e| e.map(|e| e.file_name().to_string_lossy().into_owned()).map_err(|e| e.to_string()))
            .collect::<Result<_, _>>()?;
        names.sort();
        Ok(names)
    };
    let names = list(dirs[0].path())?;
    check(names == list(dirs[1].path())?, || "report file sets differ".into())?;
    for n in &names {
        let a = std::fs::read(dirs[0].path().join(n)).map_err(|e| e.to_string())?;
        let b = std::fs::read(dirs[1].path().join(n)).map_err(|e| e.to_string())?;
        check(a == b, || format!("{n} differs between runs"))?;
    }
    Ok(format!("{} report files byte-identical across two runs", names.len()))
}

fn main() -> ExitCode {
    let criteria: [(&str, fn() -> Outcome); 10] = [
        ("clifford identities", clifford_identities),
        ("decomposition O(h^2)", decomposition_order),
        ("pseudo-flat dichotomy", pseudo_flat_dichotomy),
        ("winding quantization and oracles", winding_catalog),
        ("excision", excision),
        ("Hopf index sums", hopf),
        ("Gauss-Bonnet-Chern integrals", gauss_bonnet_chern),
        ("boundary, endorsed cases", boundary_endorsed),
        ("boundary consistency", boundary_consistency),
        ("determinism", determinism),
    ];
    let mut failed = 0;
    for (i, (name, f)) in criteria.iter().enumerate() {
        let start = std::time::Instant::now();
        let outcome = catch_unwind(AssertUnwindSafe(f)).unwrap_or_else(|_| Err("panicked".into()));
        let secs = start.elapsed().as_secs_f64();
        match outcome {
            Ok(detail) => println!("criterion {:>2} PASS  {name}: {detail} [{secs:.1}s]", i + 1),
            Err(why) => {
                failed += 1;
                println!("criterion {:>2} FAIL  {name}: {why} [{secs:.1}s]", i + 1);
            }
        }
    }
    println!("acceptance: {} passed, {failed} failed", criteria.len() - failed);
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
