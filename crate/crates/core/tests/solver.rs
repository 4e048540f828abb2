use std::f64::consts::PI;
use std::sync::Arc;

use cloak_core::farfield::{kirchhoff_farfield, mie_farfield, DiskKind, MieSeries};
use cloak_core::geometry::AxisBox;
use cloak_core::materials::{MaterialField, MaterialSample, ObstacleKind, ObstacleSpec, Scenario, Shape};
use cloak_core::solver::*;
use num_complex::Complex64;

const K: f64 = PI;

fn square(half: f64, delta: f64) -> Grid {
    Grid::uniform(AxisBox { lo: [-half; 2], hi: [half; 2] }, delta, PmlSpec::one_wavelength(K, delta)).unwrap()
}

fn hard_disk() -> Scenario<2> {
    Scenario::uncloaked(MaterialField::background(), vec![ObstacleSpec::sound_hard(Shape::Disk { center: [0.0; 2], radius: 1.0 })], None)
}

fn rel_l2(a: &[Complex64], b: &[Complex64]) -> f64 {
    let num: f64 = a.iter().zip(b).map(|(x, y)| (x - y).norm_sqr()).sum();
    let den: f64 = b.iter().map(|y| y.norm_sqr()).sum();
    (num / den).sqrt()
}

#[test]
fn free_space_scatters_nothing() {
    let wave = IncidentWave::from_angle(K, 0.3).unwrap();
    let (f, rep) = assemble_and_solve(&Scenario::free_space(), wave, &square(1.0, 0.1)).unwrap();
    assert!(f.max_abs() <= 1e-6, "{}", f.max_abs());
    assert!(rep.warnings.is_empty());
    assert_eq!(f.kind, FieldKind::Scattered);
}

#[test]
fn hard_disk_near_and_far_field_match_the_series() {
    let wave = IncidentWave::new(K, [1.0, 0.0]).unwrap();
    let (f, rep) = assemble_and_solve(&hard_disk(), wave, &square(2.4, 0.1)).unwrap();
    assert!(rep.residuals[0] < 1e-10);
    let mie = MieSeries::new(DiskKind::Hard, 1.0, K, wave.d).unwrap();
    assert!(mie.modes() >= 20);
    let exact = mie.circle_samples(2.0, 256).unwrap();
    let got = extract_circle(&f, &wave, 2.0, 256).unwrap();
    let ev = rel_l2(&got.values, &exact.values);
    let ed = rel_l2(&got.normal_derivs, &exact.normal_derivs);
    assert!(ev <= 0.02, "values {ev}");
    assert!(ed <= 0.02, "normal derivatives {ed}");
    let ff = kirchhoff_farfield(&extract_circle(&f, &wave, 1.3, 512).unwrap(), K, wave.d, 100).unwrap();
    let reference = mie_farfield(DiskKind::Hard, 1.0, K, wave.d, 100).unwrap();
    assert!(ff.relative_linf(&reference).unwrap() <= 0.03);
}

#[test]
fn soft_disk_far_field_matches_the_series() {
    let sc = Scenario::uncloaked(MaterialField::background(), vec![ObstacleSpec::sound_soft(Shape::Disk { center: [0.0; 2], radius: 1.0 })], None);
    let wave = IncidentWave::new(K, [0.0, 1.0]).unwrap();
    let (f, _) = assemble_and_solve(&sc, wave, &square(1.6, 0.05)).unwrap();
    let ff = kirchhoff_farfield(&extract_circle(&f, &wave, 1.3, 512).unwrap(), K, wave.d, 100).unwrap();
    let reference = mie_farfield(DiskKind::Soft, 1.0, K, wave.d, 100).unwrap();
    let err = ff.relative_linf(&reference).unwrap();
    assert!(err <= 0.05, "{err}");
}

#[test]
fn extraction_of_a_planted_plane_wave() {
    let wave = IncidentWave::from_angle(K, 0.7).unwrap();
    let g = square(1.5, 0.1);
    let planted = DiscreteField { kind: FieldKind::Scattered, ..DiscreteField::incident(&g, wave) };
    let s = extract_circle(&planted, &wave, 1.0, 200).unwrap();
    let mut worst: f64 = 0.0;
    for (m, v) in s.values.iter().enumerate() {
        let th = 2.0 * PI * m as f64 / 200.0;
        worst = worst.max((v - wave.value(&[th.cos(), th.sin()])).norm());
    }
    assert!(worst <= 1e-3, "{worst}");
    let zero = DiscreteField { values: vec![Complex64::new(0.0, 0.0); g.n_cells()], ..planted.clone() };
    let s = extract_circle(&zero, &wave, 1.0, 32).unwrap();
    assert!(s.values.iter().chain(&s.normal_derivs).all(|v| v.norm() == 0.0));
    // A total field gives back its scattered part.
    let total = DiscreteField { kind: FieldKind::Total, ..planted };
    let s = extract_circle(&total, &wave, 1.0, 32).unwrap();
    assert!(s.values.iter().all(|v| v.norm() < 1e-3));
}

#[test]
fn extraction_rejects_circles_in_the_scatterer_or_pml() {
    let wave = IncidentWave::new(K, [1.0, 0.0]).unwrap();
    let (f, _) = assemble_and_solve(&hard_disk(), wave, &square(1.6, 0.1)).unwrap();
    assert!(matches!(extract_circle(&f, &wave, 1.1, 64), Err(SolveError::Extraction(_))));
    assert!(matches!(extract_circle(&f, &wave, 1.7, 64), Err(SolveError::Extraction(_))));
    assert!(extract_circle(&f, &wave, 1.3, 64).is_ok());
}

#[test]
fn pml_reflection_is_small() {
    // Same penetrable box on a small and a large domain; differences come
    // only from what the nearer PML sends back.
    let m = MaterialField::from_fn("box", Some(AxisBox { lo: [-0.3; 2], hi: [0.3; 2] }), |x| {
        let inside = x[0].abs() <= 0.3 && x[1].abs() <= 0.3;
        let q = if inside { Complex64::new(3.0, 0.0) } else { Complex64::new(1.0, 0.0) };
        Ok(MaterialSample { sigma: [[1.0, 0.0], [0.0, 1.0]], q })
    });
    let sc = Scenario::uncloaked(m, Vec::new(), None);
    let wave = IncidentWave::from_angle(K, 0.4).unwrap();
    let d = 0.05;
    let (small, _) = assemble_and_solve(&sc, wave, &square(1.0, d)).unwrap();
    let (large, _) = assemble_and_solve(&sc, wave, &square(2.5, d)).unwrap();
    let mut worst: f64 = 0.0;
    for probe in [[0.6, 0.2], [-0.5, -0.7], [0.0, 0.8], [0.9, 0.9]] {
        let (a, _) = extract::interpolate(&small, &probe).unwrap();
        let (b, _) = extract::interpolate(&large, &probe).unwrap();
        worst = worst.max((a - b).norm() / b.norm());
    }
    assert!(worst <= 1e-4, "{worst}");
}

#[test]
fn lossy_medium_absorbs() {
    let m = MaterialField::from_fn("lossy", Some(AxisBox { lo: [-0.5; 2], hi: [0.5; 2] }), |x| {
        let q = if x[0].hypot(x[1]) < 0.5 { Complex64::new(1.5, 0.8) } else { Complex64::new(1.0, 0.0) };
        Ok(MaterialSample { sigma: [[1.0, 0.0], [0.0, 1.0]], q })
    });
    let sc = Scenario::uncloaked(m, Vec::new(), None);
    let g = square(1.0, 0.05);
    let wave = IncidentWave::new(K, [1.0, 0.0]).unwrap();
    let (f, _) = assemble_and_solve(&sc, wave, &g).unwrap();
    let r = rasterize(&sc, &g, K, &RasterOptions::default()).unwrap();
    let p = absorbed_power(&r, &f.total());
    assert!(p > 0.0, "{p}");
}

#[test]
fn impedance_obstacles_are_unsupported() {
    let ob = ObstacleSpec { kind: ObstacleKind::Impedance(Arc::new(|_| Complex64::new(0.0, 1.0))), shape: Shape::Disk { center: [0.0; 2], radius: 0.5 } };
    let sc = Scenario::uncloaked(MaterialField::background(), vec![ob], None);
    let wave = IncidentWave::new(K, [1.0, 0.0]).unwrap();
    assert!(matches!(assemble_and_solve(&sc, wave, &square(1.0, 0.1)), Err(SolveError::Unsupported(_))));
}

#[test]
fn waves_are_validated() {
    assert!(IncidentWave::new(K, [1.0, 1.0]).is_err());
    assert!(IncidentWave::new(-1.0, [1.0, 0.0]).is_err());
    let g = square(1.0, 0.1);
    let waves = [IncidentWave::new(K, [1.0, 0.0]).unwrap(), IncidentWave::new(2.0, [1.0, 0.0]).unwrap()];
    assert!(assemble_and_solve_with(&Scenario::free_space(), &waves, &g, &SolverOptions::default()).is_err());
}

#[test]
fn field_dump_round_trip() {
    let wave = IncidentWave::from_angle(K, 1.0).unwrap();
    let (f, _) = assemble_and_solve(&hard_disk(), wave, &square(1.4, 0.1)).unwrap();
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("u.cfld");
    write_cfld(&path, &f).unwrap();
    let (h, values) = read_cfld(&path).unwrap();
    assert_eq!((h.nx, h.ny, h.kind), (f.grid.nx, f.grid.ny, FieldKind::Scattered));
    assert_eq!(h.origin, f.grid.origin);
    assert_eq!(values, f.values);
    std::fs::write(&path, b"{\"format\":\"cfld\"}\n").unwrap();
    assert!(read_cfld(&path).is_err());
}
