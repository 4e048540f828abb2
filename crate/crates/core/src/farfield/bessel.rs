//! Integer-order Bessel functions of the first and second kind for real x > 0.
//!
//! J_n comes from Miller's downward recurrence normalized with
//! J_0 + 2ΣJ_{2k} = 1. Y_0 and Y_1 use Neumann series in those J values and
//! Y_n follows by upward recurrence, which is stable for Y.

use num_complex::Complex64;

use super::FarFieldError;

const EULER_GAMMA: f64 = 0.577_215_664_901_532_9;
pub const MAX_ORDER: usize = 200;

/// J_n, Y_n and their derivatives for n = 0..=M at one argument.
#[derive(Clone, Debug, PartialEq)]
pub struct CylinderModeTable {
    pub x: f64,
    pub j: Vec<f64>,
    pub y: Vec<f64>,
    pub jp: Vec<f64>,
    pub yp: Vec<f64>,
}

impl CylinderModeTable {
    pub fn order(&self) -> usize {
        self.j.len() - 1
    }

    /// H_n^{(1)} = J_n + iY_n.
    pub fn hankel(&self, n: usize) -> Complex64 {
        Complex64::new(self.j[n], self.y[n])
    }

    pub fn hankel_prime(&self, n: usize) -> Complex64 {
        Complex64::new(self.jp[n], self.yp[n])
    }

    /// Relative Wronskian defect |J Y′ − J′ Y − 2/(πx)| / (2/(πx)), worst over n.
    pub fn wronskian_defect(&self) -> f64 {
        let target = 2.0 / (std::f64::consts::PI * self.x);
        (0..=self.order())
            .map(|n| {
                let w = self.j[n] * self.yp[n] - self.jp[n] * self.y[n];
                (w - target).abs() / target
            })
            .fold(0.0, f64::max)
    }
}

/// J_0..J_m at x > 0 (also valid as x → 0⁺).
pub fn bessel_j_all(m: usize, x: f64) -> Vec<f64> {
    let mut out = vec![0.0; m + 1];
    if x == 0.0 {
        out[0] = 1.0;
        return out;
    }
    let big = m.max(x.ceil() as usize);
    let mut start = big + 30 + (50.0 * big as f64).sqrt() as usize;
    start += start % 2;
    let mut j_next = 0.0;
    let mut j_cur = 1e-300_f64.sqrt();
    let mut norm = 0.0;
    for n in (1..=start).rev() {
        let j_prev = 2.0 * n as f64 / x * j_cur - j_next;
        if n <= m {
            out[n] = j_cur;
        }
        if n % 2 == 0 {
            norm += 2.0 * j_cur;
        }
        j_next = j_cur;
        j_cur = j_prev;
        if j_cur.abs() > 1e250 {
            let s = 1e-250;
            j_cur *= s;
            j_next *= s;
            norm *= s;
            for v in out.iter_mut() {
                *v *= s;
            }
        }
    }
    out[0] = j_cur;
    norm += j_cur;
    for v in out.iter_mut() {
        *v /= norm;
    }
    out
}

/// Table of J_n, Y_n, J_n′, Y_n′ for n = 0..=m.
pub fn bessel_jy(m: usize, x: f64) -> Result<CylinderModeTable, FarFieldError> {
    if !(x > 0.0) || !x.is_finite() {
        return Err(FarFieldError::InvalidArgument(format!("Bessel argument must be positive, got {x}")));
    }
    if m > MAX_ORDER {
        return Err(FarFieldError::InvalidArgument(format!("order {m} exceeds {MAX_ORDER}")));
    }
    let mm = m.max(1);
    let kmax = (x.ceil() as usize + 60 + (50.0 * x).sqrt() as usize) / 2 + 2;
    let jall = bessel_j_all(2 * kmax + 1, x);
    let pi = std::f64::consts::PI;
    let l = (x / 2.0).ln() + EULER_GAMMA;
    let mut s0 = 0.0;
    let mut s1 = 0.0;
    for k in 1..=kmax {
        let sign = if k % 2 == 0 { 1.0 } else { -1.0 };
        s0 += sign * jall[2 * k] / k as f64;
        s1 += sign * (jall[2 * k - 1] - jall[2 * k + 1]) / k as f64;
    }
    let y0 = 2.0 / pi * l * jall[0] - 4.0 / pi * s0;
    let y1 = 2.0 / pi * (l * jall[1] - jall[0] / x) + 2.0 / pi * s1;

    let j: Vec<f64> = if mm + 1 < jall.len() { jall[..=mm].to_vec() } else { bessel_j_all(mm, x) };
    let mut y = vec![0.0; mm + 1];
    y[0] = y0;
    y[1] = y1;
    for n in 1..mm {
        y[n + 1] = 2.0 * n as f64 / x * y[n] - y[n - 1];
    }
    let mut jp = vec![0.0; mm + 1];
    let mut yp = vec![0.0; mm + 1];
    jp[0] = -j[1];
    yp[0] = -y[1];
    for n in 1..=mm {
        jp[n] = j[n - 1] - n as f64 / x * j[n];
        yp[n] = y[n - 1] - n as f64 / x * y[n];
    }
    let mut t = CylinderModeTable { x, j, y, jp, yp };
    t.j.truncate(m + 1);
    t.y.truncate(m + 1);
    t.jp.truncate(m + 1);
    t.yp.truncate(m + 1);
    Ok(t)
}

#[cfg(test)]
mod tests {
    use super::*;

    /// Independent oracle: power series Σ (−1)^k (x/2)^{2k+n} / (k!(k+n)!).
    fn j_series(n: usize, x: f64) -> f64 {
        let mut term = (x / 2.0).powi(n as i32) / (1..=n).map(|v| v as f64).product::<f64>();
        let mut sum = term;
        for k in 1..30 {
            term *= -(x / 2.0).powi(2) / (k as f64 * (k + n) as f64);
            sum += term;
        }
        sum
    }

    #[test]
    fn j1_of_one_matches_series() {
        let t = bessel_jy(5, 1.0).unwrap();
        assert!((t.j[1] - j_series(1, 1.0)).abs() < 1e-12);
        assert!((t.j[0] - j_series(0, 1.0)).abs() < 1e-12);
        assert!((t.j[4] - j_series(4, 1.0)).abs() < 1e-15);
    }

    #[test]
    fn known_values() {
        let t = bessel_jy(2, 1.0).unwrap();
        assert!((t.y[0] - 0.088_256_964_215_676_96).abs() < 1e-14);
        assert!((t.y[1] + 0.781_212_821_300_288_7).abs() < 1e-14);
        let t = bessel_jy(1, 10.0).unwrap();
        assert!((t.j[0] + 0.245_935_764_451_348_3).abs() < 1e-14);
        assert!((t.y[0] - 0.055_671_167_283_599_39).abs() < 1e-14);
    }

    #[test]
    fn small_argument_limit() {
        let j = bessel_j_all(3, 0.0);
        assert_eq!(j[0], 1.0);
        let t = bessel_jy(3, 1e-8).unwrap();
        assert!((t.j[0] - 1.0).abs() < 1e-15);
        assert!(bessel_jy(3, 0.0).is_err());
        assert!(bessel_jy(3, -1.0).is_err());
    }

    #[test]
    fn wronskian_at_3_7() {
        let t = bessel_jy(40, 3.7).unwrap();
        assert!(t.wronskian_defect() < 1e-10, "{}", t.wronskian_defect());
    }
}
