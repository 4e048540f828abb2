//! Property checks that need no PDE solve.

use std::f64::consts::PI;
use std::time::Instant;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::farfield::{bessel_jy, kirchhoff_farfield, DiskKind, MieSeries};
use crate::geometry::{AbcGeometry, AxisBox, GeometryKind, LpExponent, ShapeFamily, ShapeParams};
use crate::linalg::{self, Point};
use crate::materials::{push_forward_sample, validate_layer_conditions, AssumptionParams, LayerVariant, LossyLayerSpec, MaterialSample};
use crate::transforms::{build_abc_map_for, finite_difference_jacobian, PiecewiseMap};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Check {
    pub name: String,
    pub pass: bool,
    pub detail: String,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SelftestReport {
    pub checks: Vec<Check>,
    pub pass: bool,
    pub seconds: f64,
}

type Outcome = Result<String, String>;

fn check(name: &str, f: impl FnOnce() -> Outcome) -> Check {
    let (pass, detail) = match f() {
        Ok(d) => (true, d),
        Err(d) => (false, d),
    };
    Check { name: name.into(), pass, detail }
}

struct MapCase<const N: usize> {
    label: &'static str,
    map: PiecewiseMap<N>,
    outer: AbcGeometry<N>,
}

fn map_case<const N: usize>(label: &'static str, kind: GeometryKind, shape: ShapeParams, eps: f64) -> Result<MapCase<N>, String>
where
    AbcGeometry<N>: ShapeFamily,
{
    let map = build_abc_map_for::<N>(kind, &shape, 1.0, 2.0, eps).map_err(|e| format!("{label}: {e}"))?;
    let outer = AbcGeometry::<N>::family(kind, &shape, 2.0).map_err(|e| format!("{label}: {e}"))?;
    Ok(MapCase { label, map, outer })
}

fn cases2() -> Result<Vec<MapCase<2>>, String> {
    let p = |p| ShapeParams { p, ..ShapeParams::default() };
    Ok(vec![
        map_case("full 2D", GeometryKind::PointNbhd, ShapeParams::default(), 0.04)?,
        map_case("C l2", GeometryKind::C, ShapeParams::default(), 0.02)?,
        map_case("C l1", GeometryKind::C, p(LpExponent::One), 0.02)?,
        map_case("C linf", GeometryKind::C, p(LpExponent::Inf), 0.02)?,
    ])
}

fn cases3() -> Result<Vec<MapCase<3>>, String> {
    Ok(vec![
        map_case("D slender", GeometryKind::D, ShapeParams::default(), 0.04)?,
        map_case("E cushion", GeometryKind::E, ShapeParams { a: 1.0, b: 0.5, ..ShapeParams::default() }, 0.04)?,
    ])
}

fn random_point<const N: usize>(rng: &mut ChaCha8Rng, b: &AxisBox<N>) -> Point<N> {
    std::array::from_fn(|l| rng.random_range(b.lo[l]..b.hi[l]))
}

fn round_trip<const N: usize>(cases: &[MapCase<N>], rng: &mut ChaCha8Rng) -> Result<f64, String> {
    let mut worst = 0.0f64;
    for c in cases {
        let b = c.outer.bounding_box().inflate(0.2);
        for _ in 0..2000 {
            let x = random_point(rng, &b);
            let y = c.map.eval(&x).map_err(|e| format!("{}: {e}", c.label))?;
            let back = c.map.eval_inverse(&y).map_err(|e| format!("{}: {e}", c.label))?;
            let err = linalg::norm2(&linalg::sub(&back, &x));
            if err > 1e-9 {
                return Err(format!("{}: round trip error {err:e} at {x:?}", c.label));
            }
            worst = worst.max(err);
        }
    }
    Ok(worst)
}

/// Bisection along rays from the bounding-box centre to the level ρ = r.
fn boundary_points<const N: usize>(g: &AbcGeometry<N>, r: f64, rng: &mut ChaCha8Rng, n: usize) -> Result<Vec<Point<N>>, String> {
    let b = g.bounding_box();
    let c: Point<N> = std::array::from_fn(|l| 0.5 * (b.lo[l] + b.hi[l]));
    let reach = 2.0 * linalg::norm2(&linalg::sub(&b.hi, &b.lo)) + 1.0;
    let mut out = Vec::with_capacity(n);
    while out.len() < n {
        let dir: Point<N> = std::array::from_fn(|_| rng.random_range(-1.0..1.0));
        let len = linalg::norm2(&dir);
        if len < 0.1 {
            continue;
        }
        let at = |t: f64| -> Point<N> { std::array::from_fn(|l| c[l] + t * dir[l] / len) };
        let rho = |t: f64| g.region_distance(&at(t)).map_err(|e| e.to_string());
        let (mut lo, mut hi) = (0.0, reach);
        if rho(lo)? > r || rho(hi)? < r {
            continue;
        }
        for _ in 0..80 {
            let m = 0.5 * (lo + hi);
            if rho(m)? < r {
                lo = m;
            } else {
                hi = m;
            }
        }
        out.push(at(0.5 * (lo + hi)));
    }
    Ok(out)
}

fn boundary_identity<const N: usize>(cases: &[MapCase<N>], rng: &mut ChaCha8Rng) -> Result<f64, String> {
    let mut worst = 0.0f64;
    for c in cases {
        for x in boundary_points(&c.outer, 2.0, rng, 200)? {
            let y = c.map.eval(&x).map_err(|e| format!("{}: {e}", c.label))?;
            let err = linalg::norm2(&linalg::sub(&y, &x));
            if err > 1e-9 {
                return Err(format!("{}: F moves the outer boundary by {err:e} at {x:?}", c.label));
            }
            worst = worst.max(err);
        }
    }
    Ok(worst)
}

/// Analytic against central-difference Jacobians where the whole stencil
/// stays inside one smooth piece.
fn jacobian_fd<const N: usize>(cases: &[MapCase<N>], rng: &mut ChaCha8Rng) -> Result<(f64, usize), String> {
    let h = 1e-6;
    let (mut worst, mut used) = (0.0f64, 0usize);
    for c in cases {
        let b = c.outer.bounding_box().inflate(0.1);
        for _ in 0..1500 {
            let x = random_point(rng, &b);
            let piece = c.map.locate(&x);
            let same = (0..N).all(|l| {
                [h, -h].iter().all(|s| {
                    let mut z = x;
                    z[l] += 4.0 * s;
                    c.map.locate(&z) == piece
                })
            });
            if !same {
                continue;
            }
            let j = c.map.jacobian(&x).map_err(|e| e.to_string())?;
            let fd = finite_difference_jacobian(|z| c.map.eval(z), &x, h).map_err(|e| e.to_string())?;
            let scale = j.iter().flatten().fold(1.0f64, |m, v| m.max(v.abs()));
            let err = linalg::max_abs_diff(&j, &fd) / scale;
            if err > 1e-5 {
                return Err(format!("{}: Jacobian differs from finite differences by {err:e} at {x:?}", c.label));
            }
            worst = worst.max(err);
            used += 1;
        }
    }
    Ok((worst, used))
}

/// ∫ q̃ and ∫ σ̃∇ũ·∇ũ over the physical shell against ∫ q and ∫ |∇u|² over the
/// virtual shell, for u(x) = x₀ + x₁²/2 and ũ = u∘F⁻¹.
fn conserved_integrals(c: &MapCase<2>, n: usize) -> Result<(f64, f64), String> {
    let b = c.outer.bounding_box().inflate(0.05);
    let grad = |x: &Point<2>| [1.0, x[1]];
    let (hx, hy) = ((b.hi[0] - b.lo[0]) / n as f64, (b.hi[1] - b.lo[1]) / n as f64);
    let is_shell = |i: Option<usize>| i.is_some_and(|i| c.map.pieces()[i].name.starts_with("shell"));
    let (mut q_phys, mut e_phys, mut q_virt, mut e_virt) = (0.0, 0.0, 0.0, 0.0);
    let bg = MaterialSample::<2>::background();
    for a in 0..n {
        for bb in 0..n {
            let p = [b.lo[0] + (a as f64 + 0.5) * hx, b.lo[1] + (bb as f64 + 0.5) * hy];
            if is_shell(c.map.locate(&p)) {
                q_virt += 1.0;
                let g = grad(&p);
                e_virt += linalg::dot(&g, &g);
            }
            if is_shell(c.map.locate_image(&p)) {
                let (x, j) = c.map.jacobian_at_image(&p).map_err(|e| e.to_string())?;
                let m = push_forward_sample(&j, linalg::det(&j), &bg);
                let jinv = linalg::inverse(&j).ok_or("singular Jacobian")?;
                let gt = linalg::mat_vec(&linalg::transpose(&jinv), &grad(&x));
                q_phys += m.q.re;
                e_phys += linalg::dot(&linalg::mat_vec(&m.sigma, &gt), &gt);
            }
        }
    }
    let rel = |a: f64, b: f64| (a - b).abs() / b.abs();
    Ok((rel(q_phys, q_virt), rel(e_phys, e_virt)))
}

fn assumption_suite() -> Result<String, String> {
    let eps_list = [0.08, 0.04, 0.02, 0.01];
    let mut out = Vec::new();
    let mut run = |label: &str, pass: bool| {
        out.push(format!("{label} {}", if pass { "ok" } else { "FAIL" }));
        pass
    };
    let shape = ShapeParams::default();
    let mut ok = true;
    for (label, kind, variant) in [("FullCloak", GeometryKind::PointNbhd, LayerVariant::FullCloak), ("CLayer", GeometryKind::C, LayerVariant::CLayer)] {
        let g = AbcGeometry::<2>::family(kind, &shape, 0.08).map_err(|e| e.to_string())?;
        let spec = LossyLayerSpec::constant(variant, [1.0; 4], 0.08);
        let rep = validate_layer_conditions(&spec, &g, &AssumptionParams::defaults_for(&spec, &g), &eps_list).map_err(|e| e.to_string())?;
        ok &= run(label, rep.pass);
    }
    let cushion = ShapeParams { a: 1.0, b: 0.5, ..ShapeParams::default() };
    for (label, kind, variant, sh) in [("DLayer", GeometryKind::D, LayerVariant::DLayer, &shape), ("ELayer", GeometryKind::E, LayerVariant::ELayer, &cushion)] {
        let g = AbcGeometry::<3>::family(kind, sh, 0.08).map_err(|e| e.to_string())?;
        let spec = LossyLayerSpec::constant(variant, [1.0; 4], 0.08);
        let rep = validate_layer_conditions(&spec, &g, &AssumptionParams::defaults_for(&spec, &g), &eps_list).map_err(|e| e.to_string())?;
        ok &= run(label, rep.pass);
    }
    let s = out.join(", ");
    if ok {
        Ok(s)
    } else {
        Err(s)
    }
}

fn wronskian(rng: &mut ChaCha8Rng) -> Outcome {
    let mut worst = 0.0f64;
    for _ in 0..500 {
        let x = rng.random_range(0.1..100.0);
        let t = bessel_jy(40, x).map_err(|e| e.to_string())?;
        worst = worst.max(t.wronskian_defect());
    }
    if worst <= 1e-10 {
        Ok(format!("worst relative defect {worst:.2e} over 500 arguments, orders 0..40"))
    } else {
        Err(format!("relative Wronskian defect {worst:e}"))
    }
}

fn kirchhoff_radius() -> Outcome {
    let k = PI;
    let mie = MieSeries::new(DiskKind::Hard, 1.0, k, [1.0, 0.0]).map_err(|e| e.to_string())?;
    let pats = [1.3, 2.0, 3.5]
        .iter()
        .map(|&r| kirchhoff_farfield(&mie.circle_samples(r, 256).map_err(|e| e.to_string())?, k, [1.0, 0.0], 100).map_err(|e| e.to_string()))
        .collect::<Result<Vec<_>, _>>()?;
    let d = pats[1..].iter().map(|p| p.relative_linf(&pats[0])).collect::<Result<Vec<_>, _>>().map_err(|e| e.to_string())?;
    let worst = d.iter().copied().fold(0.0, f64::max);
    let exact = mie.pattern(&pats[0].angles);
    let vs_series = pats[0].relative_linf(&exact).map_err(|e| e.to_string())?;
    if worst <= 1e-8 && vs_series <= 1e-8 {
        Ok(format!("radii 1.3, 2, 3.5 agree to {worst:.1e}; series {vs_series:.1e}"))
    } else {
        Err(format!("radius spread {worst:e}, series distance {vs_series:e}"))
    }
}

pub fn run_selftest() -> SelftestReport {
    let t0 = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(0xc10a);
    let maps = cases2().and_then(|a| cases3().map(|b| (a, b)));
    let mut checks = Vec::new();
    match &maps {
        Err(e) => checks.push(Check { name: "maps".into(), pass: false, detail: e.clone() }),
        Ok((m2, m3)) => {
            checks.push(check("map round trips", || {
                let w = round_trip(m2, &mut rng)?.max(round_trip(m3, &mut rng)?);
                Ok(format!("worst |F⁻¹(F(x)) − x| = {w:.1e} over 12000 points"))
            }));
            checks.push(check("boundary identity", || {
                let w = boundary_identity(m2, &mut rng)?.max(boundary_identity(m3, &mut rng)?);
                Ok(format!("worst |F(x) − x| on ∂K_r2 = {w:.1e}"))
            }));
            checks.push(check("Jacobian vs finite differences", || {
                let (a, na) = jacobian_fd(m2, &mut rng)?;
                let (b, nb) = jacobian_fd(m3, &mut rng)?;
                Ok(format!("worst relative difference {:.1e} at {} points", a.max(b), na + nb))
            }));
            checks.push(check("push-forward conserved integrals", || {
                let mut parts = Vec::new();
                for c in m2.iter().take(2) {
                    let (q, e) = conserved_integrals(c, 900)?;
                    if q > 1e-2 || e > 1e-2 {
                        return Err(format!("{}: ∫q differs by {q:.2e}, energy by {e:.2e}", c.label));
                    }
                    parts.push(format!("{}: {q:.1e}/{e:.1e}", c.label));
                }
                Ok(format!("relative differences ∫q / energy: {}", parts.join(", ")))
            }));
        }
    }
    checks.push(check("lossy-layer conditions", assumption_suite));
    checks.push(check("Bessel Wronskian", || wronskian(&mut rng)));
    checks.push(check("Kirchhoff radius independence", kirchhoff_radius));
    let pass = checks.iter().all(|c| c.pass);
    SelftestReport { checks, pass, seconds: t0.elapsed().as_secs_f64() }
}
