//! Far-field patterns: Kirchhoff–Helmholtz transform on a circle, the
//! partial-wave series for disks, and dB norms.

pub mod bessel;

use std::f64::consts::PI;
use std::io::Write;

use num_complex::Complex64;
use thiserror::Error;

use crate::geometry::{in_aperture, ApertureSpec};

pub use bessel::{bessel_j_all, bessel_jy, CylinderModeTable};

#[derive(Debug, Error)]
pub enum FarFieldError {
    #[error("invalid argument: {0}")]
    InvalidArgument(String),
    #[error("sample count mismatch: {values} values, {derivs} normal derivatives")]
    SampleMismatch { values: usize, derivs: usize },
    #[error("io: {0}")]
    Io(#[from] std::io::Error),
}

/// u_∞(x̂, d) sampled at directions `angles` (radians).
#[derive(Clone, Debug, PartialEq)]
pub struct FarFieldPattern {
    pub k: f64,
    pub d: [f64; 2],
    pub angles: Vec<f64>,
    pub values: Vec<Complex64>,
}

pub fn equispaced_angles(n: usize) -> Vec<f64> {
    (0..n).map(|j| 2.0 * PI * j as f64 / n as f64).collect()
}

pub fn unit(angle: f64) -> [f64; 2] {
    [angle.cos(), angle.sin()]
}

pub fn amplitude_db(a: f64) -> f64 {
    20.0 * a.log10()
}

impl FarFieldPattern {
    pub fn max_abs(&self) -> f64 {
        self.values.iter().map(|v| v.norm()).fold(0.0, f64::max)
    }

    /// Relative L^∞ distance max|self − other| / max|other|.
    pub fn relative_linf(&self, reference: &FarFieldPattern) -> Result<f64, FarFieldError> {
        if self.values.len() != reference.values.len() {
            return Err(FarFieldError::SampleMismatch { values: self.values.len(), derivs: reference.values.len() });
        }
        let diff = self.values.iter().zip(&reference.values).map(|(a, b)| (a - b).norm()).fold(0.0, f64::max);
        Ok(diff / reference.max_abs())
    }

    /// Writes `angle_rad,re,im,abs,db` rows with a header line.
    pub fn write_csv<W: Write>(&self, mut w: W) -> Result<(), FarFieldError> {
        w.write_all(b"angle_rad,re,im,abs,db\n")?;
        for (a, v) in self.angles.iter().zip(&self.values) {
            writeln!(w, "{},{},{},{},{}", a, v.re, v.im, v.norm(), amplitude_db(v.norm()))?;
        }
        Ok(())
    }
}

/// (max |u_∞|, 20·log10 max |u_∞|).
pub fn sup_norm_db(p: &FarFieldPattern) -> (f64, f64) {
    let m = p.max_abs();
    (m, amplitude_db(m))
}

/// Sup norm over observation directions inside the aperture.
pub fn sup_norm_in_aperture(p: &FarFieldPattern, ap: &ApertureSpec) -> Option<(f64, f64)> {
    let m = p
        .angles
        .iter()
        .zip(&p.values)
        .filter(|(a, _)| in_aperture(&unit(**a), ap))
        .map(|(_, v)| v.norm())
        .fold(None, |acc: Option<f64>, v| Some(acc.map_or(v, |a| a.max(v))));
    m.map(|m| (m, amplitude_db(m)))
}

/// Scattered field and its outward normal derivative at equispaced points of a
/// circle of radius `radius` centred at the origin.
#[derive(Clone, Debug, PartialEq)]
pub struct CircleSamples {
    pub radius: f64,
    pub values: Vec<Complex64>,
    pub normal_derivs: Vec<Complex64>,
}

/// Normalization e^{iπ/4}/√(8πk) from the large-argument form of (i/4)H_0.
pub fn kirchhoff_constant(k: f64) -> Complex64 {
    Complex64::from_polar(1.0 / (8.0 * PI * k).sqrt(), PI / 4.0)
}

pub fn kirchhoff_farfield_at(s: &CircleSamples, k: f64, d: [f64; 2], angles: &[f64]) -> Result<FarFieldPattern, FarFieldError> {
    let n = s.values.len();
    if n != s.normal_derivs.len() {
        return Err(FarFieldError::SampleMismatch { values: n, derivs: s.normal_derivs.len() });
    }
    if n == 0 || !(k > 0.0) {
        return Err(FarFieldError::InvalidArgument("need samples and k > 0".into()));
    }
    let gamma = kirchhoff_constant(k);
    let ds = 2.0 * PI * s.radius / n as f64;
    let nodes: Vec<[f64; 2]> = (0..n).map(|j| unit(2.0 * PI * j as f64 / n as f64)).collect();
    let values = angles
        .iter()
        .map(|&a| {
            let xh = unit(a);
            let mut acc = Complex64::new(0.0, 0.0);
            for (j, nu) in nodes.iter().enumerate() {
                let xdy = s.radius * (xh[0] * nu[0] + xh[1] * nu[1]);
                let e = Complex64::from_polar(1.0, -k * xdy);
                let de = Complex64::new(0.0, -k * (xh[0] * nu[0] + xh[1] * nu[1])) * e;
                acc += s.values[j] * de - s.normal_derivs[j] * e;
            }
            gamma * acc * ds
        })
        .collect();
    Ok(FarFieldPattern { k, d, angles: angles.to_vec(), values })
}

/// Far field at `n_dirs` equispaced directions.
pub fn kirchhoff_farfield(s: &CircleSamples, k: f64, d: [f64; 2], n_dirs: usize) -> Result<FarFieldPattern, FarFieldError> {
    kirchhoff_farfield_at(s, k, d, &equispaced_angles(n_dirs))
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum DiskKind {
    Hard,
    Soft,
}

/// Partial-wave solution for plane-wave scattering by a centred disk.
#[derive(Clone, Debug)]
pub struct MieSeries {
    pub kind: DiskKind,
    pub radius: f64,
    pub k: f64,
    pub d: [f64; 2],
    /// a_0..a_M; a_{−n} = a_n.
    pub coeffs: Vec<Complex64>,
    /// Sum of |a_n| over the ten orders past the truncation.
    pub tail_bound: f64,
}

impl MieSeries {
    pub fn new(kind: DiskKind, radius: f64, k: f64, d: [f64; 2]) -> Result<Self, FarFieldError> {
        let kr = k * radius;
        if !(kr > 0.0) || kr > 100.0 {
            return Err(FarFieldError::InvalidArgument(format!("need 0 < kR ≤ 100, got {kr}")));
        }
        let m = kr.ceil() as usize + 20;
        Self::with_modes(kind, radius, k, d, m)
    }

    pub fn with_modes(kind: DiskKind, radius: f64, k: f64, d: [f64; 2], m: usize) -> Result<Self, FarFieldError> {
        let t = bessel_jy(m + 10, k * radius)?;
        let all: Vec<Complex64> = (0..=m + 10)
            .map(|n| match kind {
                DiskKind::Hard => -Complex64::new(t.jp[n], 0.0) / t.hankel_prime(n),
                DiskKind::Soft => -Complex64::new(t.j[n], 0.0) / t.hankel(n),
            })
            .collect();
        let tail_bound = all[m + 1..].iter().map(|c| c.norm()).sum();
        Ok(Self { kind, radius, k, d, coeffs: all[..=m].to_vec(), tail_bound })
    }

    pub fn modes(&self) -> usize {
        self.coeffs.len() - 1
    }

    fn angular_sum(&self, theta: f64, radial: impl Fn(usize) -> Complex64) -> Complex64 {
        let td = self.d[1].atan2(self.d[0]);
        let mut s = self.coeffs[0] * radial(0);
        for n in 1..self.coeffs.len() {
            s += self.coeffs[n] * radial(n) * 2.0 * (n as f64 * (theta - td)).cos();
        }
        s
    }

    pub fn farfield_at(&self, theta: f64) -> Complex64 {
        let c = Complex64::from_polar((2.0 / (PI * self.k)).sqrt(), -PI / 4.0);
        c * self.angular_sum(theta, |_| Complex64::new(1.0, 0.0))
    }

    pub fn pattern(&self, angles: &[f64]) -> FarFieldPattern {
        FarFieldPattern { k: self.k, d: self.d, angles: angles.to_vec(), values: angles.iter().map(|&a| self.farfield_at(a)).collect() }
    }

    /// Scattered field and its radial derivative at polar point (r, θ), r > 0.
    pub fn near_field(&self, r: f64, theta: f64) -> Result<(Complex64, Complex64), FarFieldError> {
        let t = bessel_jy(self.modes(), self.k * r)?;
        let i_pow = |n: usize| Complex64::i().powu(n as u32);
        let u = self.angular_sum(theta, |n| i_pow(n) * t.hankel(n));
        let du = self.angular_sum(theta, |n| i_pow(n) * t.hankel_prime(n) * self.k);
        Ok((u, du))
    }

    pub fn circle_samples(&self, radius: f64, n: usize) -> Result<CircleSamples, FarFieldError> {
        let mut values = Vec::with_capacity(n);
        let mut normal_derivs = Vec::with_capacity(n);
        for a in equispaced_angles(n) {
            let (u, du) = self.near_field(radius, a)?;
            values.push(u);
            normal_derivs.push(du);
        }
        Ok(CircleSamples { radius, values, normal_derivs })
    }
}

/// Mie far field at `n_dirs` equispaced directions.
pub fn mie_farfield(kind: DiskKind, radius: f64, k: f64, d: [f64; 2], n_dirs: usize) -> Result<FarFieldPattern, FarFieldError> {
    Ok(MieSeries::new(kind, radius, k, d)?.pattern(&equispaced_angles(n_dirs)))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn db_examples() {
        let p = FarFieldPattern { k: 1.0, d: [1.0, 0.0], angles: vec![0.0, 1.0], values: vec![Complex64::new(1.0, 0.0); 2] };
        assert_eq!(sup_norm_db(&p), (1.0, 0.0));
        let q = FarFieldPattern { values: vec![Complex64::new(0.01, 0.0); 2], ..p };
        let (m, db) = sup_norm_db(&q);
        assert_eq!(m, 0.01);
        assert!((db + 40.0).abs() < 1e-12);
    }

    #[test]
    fn zero_samples_give_zero_pattern() {
        let s = CircleSamples { radius: 2.0, values: vec![Complex64::new(0.0, 0.0); 32], normal_derivs: vec![Complex64::new(0.0, 0.0); 32] };
        let p = kirchhoff_farfield(&s, 3.0, [1.0, 0.0], 100).unwrap();
        assert!(p.values.iter().all(|v| v.norm() == 0.0));
        let bad = CircleSamples { normal_derivs: vec![Complex64::new(0.0, 0.0); 31], ..s };
        assert!(kirchhoff_farfield(&bad, 3.0, [1.0, 0.0], 100).is_err());
    }

    #[test]
    fn hankel_source_has_known_farfield() {
        let k = PI;
        let rho = 2.0;
        let t = bessel_jy(1, k * rho).unwrap();
        let n = 64;
        let s = CircleSamples { radius: rho, values: vec![t.hankel(0); n], normal_derivs: vec![t.hankel_prime(0) * k; n] };
        let p = kirchhoff_farfield(&s, k, [1.0, 0.0], 100).unwrap();
        let expected = Complex64::from_polar((2.0 / (PI * k)).sqrt(), -PI / 4.0);
        for v in &p.values {
            assert!((v - expected).norm() < 1e-12 * expected.norm(), "{v} vs {expected}");
        }
        // large-argument asymptotic at r = 1000 wavelengths
        let r = 2000.0;
        let big = bessel_jy(0, k * r).unwrap().hankel(0);
        let asym = expected * Complex64::from_polar(1.0, k * r) / r.sqrt();
        assert!((big - asym).norm() < 1e-4 * asym.norm());
    }

    #[test]
    fn kirchhoff_of_mie_field_matches_series() {
        let m = MieSeries::new(DiskKind::Hard, 1.0, PI, [1.0, 0.0]).unwrap();
        let s = m.circle_samples(2.0, 128).unwrap();
        let p = kirchhoff_farfield(&s, PI, [1.0, 0.0], 100).unwrap();
        let exact = m.pattern(&equispaced_angles(100));
        assert!(p.relative_linf(&exact).unwrap() < 1e-3);
    }

    #[test]
    fn tiny_disk_scatters_nothing() {
        let p = mie_farfield(DiskKind::Hard, 1e-4 / PI, PI, [1.0, 0.0], 100).unwrap();
        assert!(p.max_abs() <= 1e-3);
    }

    #[test]
    fn series_is_converged_and_symmetric() {
        let a = MieSeries::new(DiskKind::Hard, 1.0, PI, [1.0, 0.0]).unwrap();
        let b = MieSeries::with_modes(DiskKind::Hard, 1.0, PI, [1.0, 0.0], a.modes() + 10).unwrap();
        let angles = equispaced_angles(100);
        let (pa, pb) = (a.pattern(&angles), b.pattern(&angles));
        let change = pa.values.iter().zip(&pb.values).map(|(x, y)| (x - y).norm()).fold(0.0, f64::max);
        assert!(change <= 1e-10);
        for j in 1..50 {
            assert!((pa.values[j].norm() - pa.values[100 - j].norm()).abs() < 1e-13);
        }
        assert!(a.tail_bound < 1e-10);
    }

    #[test]
    fn csv_format() {
        let p = FarFieldPattern { k: 1.0, d: [1.0, 0.0], angles: vec![0.0], values: vec![Complex64::new(0.5, -0.5)] };
        let mut buf = Vec::new();
        p.write_csv(&mut buf).unwrap();
        let s = String::from_utf8(buf).unwrap();
        let mut lines = s.lines();
        assert_eq!(lines.next(), Some("angle_rad,re,im,abs,db"));
        let cols: Vec<&str> = lines.next().unwrap().split(',').collect();
        assert_eq!(cols.len(), 5);
        assert!(!s.contains('\r'));
    }
}
