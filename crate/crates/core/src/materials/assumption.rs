//! Numerical checks of the lossy-layer compatibility conditions.
//!
//! Shell integrals use a midpoint rule on a grid fitted to each component:
//! x = c + (s/g(e))·e with s ∈ [ε/2, ε] the level of d̃, e a Euclidean unit
//! direction over the active axes and g(e) its weighted norm. The volume
//! element is s^{m−1}/g^m ds dS(e) for m active axes.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::lossy::{build_lossy_layer, LayerVariant, LossyLayerSpec};
use super::{MaterialError, MaterialField};
use crate::geometry::{AbcGeometry, Component, LpBallSpec, LpExponent};
use crate::linalg::{self, Point};

/// ω₁(ε) = ε^α.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub enum Modulus {
    Power(f64),
}

impl Modulus {
    pub fn eval(&self, eps: f64) -> f64 {
        match self {
            Modulus::Power(a) => eps.powf(*a),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct AssumptionParams {
    pub omega1: Modulus,
    pub e1: f64,
    pub e1_prime: f64,
    pub big_lambda: f64,
    pub e2: f64,
    /// Bound on sup q₁ / inf q₂ over the cloaked contents, if one is imposed.
    pub e3: Option<f64>,
}

impl AssumptionParams {
    /// ω₁ matches the exponent of q in the layer; E₁ = Λ₀, E₁′ = λ₀, Λ = Λ₀ and
    /// E₂ = Λ₀·sup|∇d̃|².
    pub fn defaults_for<const N: usize>(spec: &LossyLayerSpec<N>, geom: &AbcGeometry<N>) -> Self {
        let alpha = match spec.variant {
            LayerVariant::FullCloak => (N - 1) as f64,
            _ => 0.5,
        };
        let grad2 = if geom.p() == LpExponent::One || geom.p_right() == LpExponent::One { N as f64 } else { 1.0 };
        Self {
            omega1: Modulus::Power(alpha),
            e1: spec.big_lambda0,
            e1_prime: spec.lambda0,
            big_lambda: spec.big_lambda0,
            e2: spec.big_lambda0 * grad2,
            e3: None,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EpsilonRow {
    pub eps: f64,
    pub omega1: f64,
    pub inf_q1: f64,
    pub sup_q1_omega: f64,
    pub inf_q2_omega: f64,
    pub sup_sigma_eig: f64,
    pub sup_normal_sigma: f64,
    pub normal_sigma_integral: f64,
    pub q_integral: f64,
    pub shell_measure: f64,
    pub pass_q_bounds: bool,
    pub pass_sigma: bool,
    pub pass_normal: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct AssumptionReport {
    pub params: AssumptionParams,
    pub rows: Vec<EpsilonRow>,
    pub q_integral_decays: bool,
    pub normal_integral_decays: bool,
    pub pass: bool,
}

/// Midpoint nodes and weights on the shell {ε/2 ≤ d̃ ≤ ε} of `geom`.
pub fn shell_quadrature<const N: usize>(geom: &AbcGeometry<N>, eps: f64, n_radial: usize, n_angular: usize, n_extrusion: usize) -> Vec<(Point<N>, f64)> {
    let mut out = Vec::new();
    let ds = 0.5 * eps / n_radial as f64;
    for comp in geom.components() {
        let Component::Ball(ball) = comp else { continue };
        let m = ball.active_count();
        let dirs = directions(ball, n_angular);
        let ext = extrusion_nodes(ball, n_extrusion);
        for (e, dw) in &dirs {
            let g = ball.p.combine((0..N).filter(|&l| ball.extrusion[l].is_none()).map(|l| ball.w.entries()[l] * e[l]));
            for i in 0..n_radial {
                let s = 0.5 * eps + (i as f64 + 0.5) * ds;
                let w_rad = s.powi(m as i32 - 1) / g.powi(m as i32) * ds * dw;
                for (xe, we) in &ext {
                    let mut x = *xe;
                    for l in 0..N {
                        if ball.extrusion[l].is_none() {
                            x[l] = ball.center[l] + s / g * e[l];
                        }
                    }
                    out.push((x, w_rad * we));
                }
            }
        }
    }
    out
}

/// Unit directions over the active axes with surface weights, restricted to
/// the component's halfspaces.
fn directions<const N: usize>(ball: &LpBallSpec<N>, n_angular: usize) -> Vec<(Point<N>, f64)> {
    let axes: Vec<usize> = (0..N).filter(|&l| ball.extrusion[l].is_none()).collect();
    let mut raw: Vec<(Point<N>, f64)> = Vec::new();
    match axes.len() {
        1 => {
            for sgn in [1.0, -1.0] {
                let mut e = [0.0; N];
                e[axes[0]] = sgn;
                raw.push((e, 1.0));
            }
        }
        2 => {
            let n = 4 * n_angular.div_ceil(4);
            let dt = std::f64::consts::TAU / n as f64;
            for i in 0..n {
                let t = (i as f64 + 0.5) * dt;
                let mut e = [0.0; N];
                e[axes[0]] = t.cos();
                e[axes[1]] = t.sin();
                raw.push((e, dt));
            }
        }
        _ => {
            let nphi = 4 * n_angular.div_ceil(4);
            let nu = 2 * (n_angular / 2).max(1);
            let dphi = std::f64::consts::TAU / nphi as f64;
            let du = 2.0 / nu as f64;
            for j in 0..nu {
                let u = -1.0 + (j as f64 + 0.5) * du;
                let st = (1.0 - u * u).sqrt();
                for i in 0..nphi {
                    let phi = (i as f64 + 0.5) * dphi;
                    let mut e = [0.0; N];
                    e[axes[0]] = st * phi.cos();
                    e[axes[1]] = st * phi.sin();
                    e[axes[2]] = u;
                    raw.push((e, dphi * du));
                }
            }
        }
    }
    raw.retain(|(e, _)| ball.halfspaces.iter().all(|h| h.side.sign() * e[h.axis] >= 0.0));
    raw
}

fn extrusion_nodes<const N: usize>(ball: &LpBallSpec<N>, n: usize) -> Vec<(Point<N>, f64)> {
    let mut nodes = vec![([0.0; N], 1.0)];
    for l in 0..N {
        if let Some(hw) = ball.extrusion[l] {
            let h = 2.0 * hw / n as f64;
            nodes = nodes
                .into_iter()
                .flat_map(|(p, w)| {
                    (0..n).map(move |i| {
                        let mut q = p;
                        q[l] = ball.center[l] - hw + (i as f64 + 0.5) * h;
                        (q, w * h)
                    })
                })
                .collect();
        }
    }
    nodes
}

/// Random points in the shell, spread evenly over components.
pub fn shell_samples<const N: usize>(geom: &AbcGeometry<N>, eps: f64, n: usize, seed: u64) -> Vec<Point<N>> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let balls: Vec<&LpBallSpec<N>> = geom
        .components()
        .iter()
        .filter_map(|c| match c {
            Component::Ball(b) => Some(b),
            Component::Box(_) => None,
        })
        .collect();
    let mut out = Vec::with_capacity(n);
    if balls.is_empty() {
        return out;
    }
    while out.len() < n {
        let ball = balls[out.len() % balls.len()];
        let mut e = [0.0; N];
        let mut norm = 0.0;
        while norm < 1e-8 {
            for l in 0..N {
                e[l] = if ball.extrusion[l].is_none() { rng.random::<f64>() * 2.0 - 1.0 } else { 0.0 };
            }
            norm = linalg::norm2(&e);
            if norm > 1.0 {
                norm = 0.0;
            }
        }
        let e = e.map(|v| v / norm);
        if !ball.halfspaces.iter().all(|h| h.side.sign() * e[h.axis] >= 0.0) {
            continue;
        }
        let g = ball.p.combine((0..N).filter(|&l| ball.extrusion[l].is_none()).map(|l| ball.w.entries()[l] * e[l]));
        let s = eps * (0.5 + 0.5 * rng.random::<f64>());
        let mut x = [0.0; N];
        for l in 0..N {
            x[l] = match ball.extrusion[l] {
                Some(hw) => ball.center[l] + hw * (2.0 * rng.random::<f64>() - 1.0),
                None => ball.center[l] + s / g * e[l],
            };
        }
        out.push(x);
    }
    out
}

struct Accum {
    inf_q1: f64,
    sup_q1: f64,
    inf_q2: f64,
    sup_eig: f64,
    sup_normal: f64,
}

fn pointwise<const N: usize>(layer: &MaterialField<N>, geom: &AbcGeometry<N>, x: &Point<N>, acc: &mut Accum, eps: f64) -> Result<(f64, f64), MaterialError> {
    let m = layer.sample(x)?;
    let g = geom.region_distance_gradient(x)?;
    let normal = linalg::dot(&linalg::mat_vec(&m.sigma, &g), &g) / (eps * eps);
    acc.inf_q1 = acc.inf_q1.min(m.q.re);
    acc.sup_q1 = acc.sup_q1.max(m.q.re);
    acc.inf_q2 = acc.inf_q2.min(m.q.im);
    acc.sup_eig = acc.sup_eig.max(linalg::sym_eigenvalues(&m.sigma)[N - 1]);
    acc.sup_normal = acc.sup_normal.max(normal);
    Ok((m.q.norm(), normal))
}

/// Evaluates the layer conditions for each ε (given in decreasing order).
/// An integral "decays" when each entry is at least 1% below the previous.
/// `geom` fixes the family; its thickness is replaced by each ε.
pub fn validate_layer_conditions<const N: usize>(
    spec: &LossyLayerSpec<N>,
    geom: &AbcGeometry<N>,
    params: &AssumptionParams,
    eps_list: &[f64],
) -> Result<AssumptionReport, MaterialError> {
    let (n_ang, n_ext) = if N == 2 { (256, 64) } else { (48, 24) };
    let tol = 1e-9;
    let mut rows = Vec::with_capacity(eps_list.len());
    for &eps in eps_list {
        let k_eps = geom.with_radius(eps)?;
        let layer = build_lossy_layer(&spec.with_eps(eps), &k_eps)?;
        let mut acc = Accum { inf_q1: f64::INFINITY, sup_q1: f64::NEG_INFINITY, inf_q2: f64::INFINITY, sup_eig: 0.0, sup_normal: 0.0 };
        let (mut q_int, mut n_int, mut meas) = (0.0, 0.0, 0.0);
        for (x, w) in shell_quadrature(&k_eps, eps, 64, n_ang, n_ext) {
            let (qa, na) = pointwise(&layer, &k_eps, &x, &mut acc, eps)?;
            q_int += qa * w;
            n_int += na * w;
            meas += w;
        }
        for x in shell_samples(&k_eps, eps, 20_000, 0x5eed ^ eps.to_bits()) {
            pointwise(&layer, &k_eps, &x, &mut acc, eps)?;
        }
        let om = params.omega1.eval(eps);
        let row = EpsilonRow {
            eps,
            omega1: om,
            inf_q1: acc.inf_q1,
            sup_q1_omega: acc.sup_q1 * om,
            inf_q2_omega: acc.inf_q2 * om,
            sup_sigma_eig: acc.sup_eig,
            sup_normal_sigma: acc.sup_normal,
            normal_sigma_integral: n_int,
            q_integral: q_int,
            shell_measure: meas,
            pass_q_bounds: acc.inf_q1 > 0.0 && acc.sup_q1 * om <= params.e1 * (1.0 + tol) && acc.inf_q2 * om >= params.e1_prime * (1.0 - tol),
            pass_sigma: acc.sup_eig <= params.big_lambda * (1.0 + tol),
            pass_normal: acc.sup_normal <= params.e2 * (1.0 + tol),
        };
        rows.push(row);
    }
    let decays = |f: &dyn Fn(&EpsilonRow) -> f64| rows.windows(2).all(|w| f(&w[1]) < 0.99 * f(&w[0]));
    let q_integral_decays = decays(&|r| r.q_integral);
    let normal_integral_decays = decays(&|r| r.normal_sigma_integral);
    let pass = !rows.is_empty() && q_integral_decays && rows.iter().all(|r| r.pass_q_bounds && r.pass_sigma && (r.pass_normal || normal_integral_decays));
    Ok(AssumptionReport { params: params.clone(), rows, q_integral_decays, normal_integral_decays, pass })
}

/// sup q₁ / inf q₂ of a medium over points satisfying `inside`; `None` when
/// inf q₂ vanishes.
pub fn content_ratio<const N: usize>(medium: &MaterialField<N>, points: &[Point<N>], inside: impl Fn(&Point<N>) -> bool) -> Result<Option<f64>, MaterialError> {
    let (mut sup1, mut inf2) = (f64::NEG_INFINITY, f64::INFINITY);
    for x in points.iter().filter(|x| inside(x)) {
        let m = medium.sample(x)?;
        sup1 = sup1.max(m.q.re);
        inf2 = inf2.min(m.q.im);
    }
    Ok(if inf2 > 0.0 && sup1.is_finite() { Some(sup1 / inf2) } else { None })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::{Side, WeightVector};
    use crate::materials::MaterialSample;
    use std::sync::Arc;

    fn disk(eps: f64) -> AbcGeometry<2> {
        AbcGeometry::point_ball(WeightVector::uniform(), LpExponent::Two, eps, [0.0; 2]).unwrap()
    }

    #[test]
    fn quadrature_measures_known_shells() {
        let eps = 0.1;
        let area: f64 = shell_quadrature(&disk(eps), eps, 64, 256, 64).iter().map(|p| p.1).sum();
        let exact = std::f64::consts::PI * (eps * eps - 0.25 * eps * eps);
        assert!((area - exact).abs() < 1e-10 * exact, "{area} vs {exact}");
        // Capsule: two half-annuli plus two strips of length 2a.
        let c = AbcGeometry::capsule(WeightVector::uniform(), LpExponent::Two, LpExponent::Two, eps, 1.0).unwrap();
        let area: f64 = shell_quadrature(&c, eps, 64, 256, 64).iter().map(|p| p.1).sum();
        let exact = exact + 2.0 * 2.0 * 0.5 * eps;
        assert!((area - exact).abs() < 1e-10 * exact, "{area} vs {exact}");
        // l^1 cap: diamond shell area 2(ε² − ε²/4) for the full diamond.
        let d = AbcGeometry::point_ball(WeightVector::uniform(), LpExponent::One, eps, [0.0; 2]).unwrap();
        let area: f64 = shell_quadrature(&d, eps, 64, 256, 64).iter().map(|p| p.1).sum();
        assert!((area - 1.5 * eps * eps).abs() < 1e-3 * eps * eps, "{area}");
    }

    #[test]
    fn quadrature_nodes_lie_in_the_shell() {
        let g = AbcGeometry::cushion(LpExponent::Two, 0.05, 1.0, 1.0).unwrap();
        let nodes = shell_quadrature(&g, 0.05, 8, 8, 4);
        assert!(!nodes.is_empty());
        for (x, _) in nodes {
            let d = g.region_distance(&x).unwrap();
            assert!(d >= 0.025 - 1e-12 && d <= 0.05 + 1e-12, "{x:?} {d}");
        }
        let vol: f64 = shell_quadrature(&g, 0.05, 16, 48, 24).iter().map(|p| p.1).sum();
        // Slab part 2·(2a)(2b)·ε/2 plus edge cylinders plus corner balls.
        let e = 0.05_f64;
        let pi = std::f64::consts::PI;
        let exact = 2.0 * 4.0 * 0.5 * e + pi * 0.75 * e * e * 4.0 + 4.0 / 3.0 * pi * 0.875 * e.powi(3);
        assert!((vol - exact).abs() < 2e-3 * exact, "{vol} vs {exact}");
        let _ = Side::Plus;
    }

    #[test]
    fn full_cloak_layer_passes() {
        let spec = LossyLayerSpec::constant(LayerVariant::FullCloak, [1.0; 4], 0.08);
        let g = disk(0.08);
        let params = AssumptionParams::defaults_for(&spec, &g);
        let rep = validate_layer_conditions(&spec, &g, &params, &[0.08, 0.04, 0.02, 0.01]).unwrap();
        assert!(rep.pass, "{rep:?}");
        for r in &rep.rows {
            assert!((r.inf_q2_omega - 1.0).abs() < 1e-12);
            // √2 ε⁻¹ times the shell area 3πε²/4.
            let expect = 2f64.sqrt() / r.eps * 0.75 * std::f64::consts::PI * r.eps * r.eps;
            assert!((r.q_integral - expect).abs() < 1e-9 * expect);
        }
    }

    #[test]
    fn c_layer_normal_term_is_c2() {
        let eps = 0.02;
        let spec = LossyLayerSpec::constant(LayerVariant::CLayer, [1.0, 0.7, 1.0, 1.0], eps);
        let g = AbcGeometry::capsule(WeightVector::uniform(), LpExponent::Two, LpExponent::Two, eps, 1.0).unwrap();
        let params = AssumptionParams::defaults_for(&spec, &g);
        let rep = validate_layer_conditions(&spec, &g, &params, &[0.08, 0.04, 0.02, 0.01]).unwrap();
        assert!(rep.pass, "{rep:?}");
        for r in &rep.rows {
            assert!((r.sup_normal_sigma - 0.7).abs() < 1e-9, "{}", r.sup_normal_sigma);
        }
    }

    #[test]
    fn conductive_layer_fails() {
        let eps = 0.04;
        let mut spec = LossyLayerSpec::constant(LayerVariant::Custom, [1.0; 4], eps);
        spec.custom = Some(Arc::new(|_, e: f64| MaterialSample { sigma: linalg::identity(), q: num_complex::Complex64::new(1.0, 1.0) / e.sqrt() }));
        let g = disk(eps);
        let params = AssumptionParams { omega1: Modulus::Power(0.5), e1: 1.0, e1_prime: 1.0, big_lambda: 1.0, e2: 1.0, e3: None };
        let rep = validate_layer_conditions(&spec, &g, &params, &[0.04, 0.02]).unwrap();
        assert!(!rep.pass);
        assert!(!rep.rows[0].pass_normal);
        assert!((rep.rows[0].sup_normal_sigma - 1.0 / (eps * eps)).abs() < 1e-6 / (eps * eps));
    }
}
