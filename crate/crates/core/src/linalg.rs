//! Small fixed-size dense helpers for points and N×N matrices (N = 2 or 3).

pub type Point<const N: usize> = [f64; N];
pub type Mat<const N: usize> = [[f64; N]; N];

pub fn identity<const N: usize>() -> Mat<N> {
    let mut m = [[0.0; N]; N];
    for (i, row) in m.iter_mut().enumerate() {
        row[i] = 1.0;
    }
    m
}

pub fn diag<const N: usize>(d: [f64; N]) -> Mat<N> {
    let mut m = [[0.0; N]; N];
    for i in 0..N {
        m[i][i] = d[i];
    }
    m
}

pub fn scale_mat<const N: usize>(m: &Mat<N>, s: f64) -> Mat<N> {
    let mut out = *m;
    out.iter_mut().flatten().for_each(|v| *v *= s);
    out
}

pub fn add_mat<const N: usize>(a: &Mat<N>, b: &Mat<N>) -> Mat<N> {
    let mut out = *a;
    for i in 0..N {
        for j in 0..N {
            out[i][j] += b[i][j];
        }
    }
    out
}

pub fn mat_mul<const N: usize>(a: &Mat<N>, b: &Mat<N>) -> Mat<N> {
    let mut out = [[0.0; N]; N];
    for i in 0..N {
        for j in 0..N {
            out[i][j] = (0..N).map(|k| a[i][k] * b[k][j]).sum();
        }
    }
    out
}

pub fn mat_vec<const N: usize>(a: &Mat<N>, x: &Point<N>) -> Point<N> {
    let mut out = [0.0; N];
    for i in 0..N {
        out[i] = (0..N).map(|k| a[i][k] * x[k]).sum();
    }
    out
}

pub fn transpose<const N: usize>(a: &Mat<N>) -> Mat<N> {
    let mut out = [[0.0; N]; N];
    for i in 0..N {
        for j in 0..N {
            out[j][i] = a[i][j];
        }
    }
    out
}

pub fn outer<const N: usize>(u: &Point<N>, v: &Point<N>) -> Mat<N> {
    let mut out = [[0.0; N]; N];
    for i in 0..N {
        for j in 0..N {
            out[i][j] = u[i] * v[j];
        }
    }
    out
}

pub fn det<const N: usize>(a: &Mat<N>) -> f64 {
    match N {
        1 => a[0][0],
        2 => a[0][0] * a[1][1] - a[0][1] * a[1][0],
        3 => {
            a[0][0] * (a[1][1] * a[2][2] - a[1][2] * a[2][1]) - a[0][1] * (a[1][0] * a[2][2] - a[1][2] * a[2][0])
                + a[0][2] * (a[1][0] * a[2][1] - a[1][1] * a[2][0])
        }
        _ => lu_det(a),
    }
}

fn lu_det<const N: usize>(a: &Mat<N>) -> f64 {
    let mut m = *a;
    let mut d = 1.0;
    for c in 0..N {
        let piv = (c..N).max_by(|&i, &j| m[i][c].abs().total_cmp(&m[j][c].abs())).unwrap_or(c);
        if m[piv][c] == 0.0 {
            return 0.0;
        }
        if piv != c {
            m.swap(piv, c);
            d = -d;
        }
        d *= m[c][c];
        for r in c + 1..N {
            let f = m[r][c] / m[c][c];
            for k in c..N {
                m[r][k] -= f * m[c][k];
            }
        }
    }
    d
}

/// Gauss-Jordan inverse with partial pivoting. `None` when singular.
pub fn inverse<const N: usize>(a: &Mat<N>) -> Option<Mat<N>> {
    let mut m = *a;
    let mut inv = identity::<N>();
    for c in 0..N {
        let piv = (c..N).max_by(|&i, &j| m[i][c].abs().total_cmp(&m[j][c].abs()))?;
        if m[piv][c].abs() < 1e-300 {
            return None;
        }
        m.swap(piv, c);
        inv.swap(piv, c);
        let p = m[c][c];
        for k in 0..N {
            m[c][k] /= p;
            inv[c][k] /= p;
        }
        for r in 0..N {
            if r != c {
                let f = m[r][c];
                if f != 0.0 {
                    for k in 0..N {
                        m[r][k] -= f * m[c][k];
                        inv[r][k] -= f * inv[c][k];
                    }
                }
            }
        }
    }
    Some(inv)
}

/// Congruence `J σ Jᵀ`.
pub fn congruence<const N: usize>(j: &Mat<N>, s: &Mat<N>) -> Mat<N> {
    mat_mul(&mat_mul(j, s), &transpose(j))
}

pub fn is_symmetric<const N: usize>(a: &Mat<N>, tol: f64) -> bool {
    let scale = a.iter().flatten().fold(0.0_f64, |m, v| m.max(v.abs())).max(1e-300);
    (0..N).all(|i| (0..N).all(|j| (a[i][j] - a[j][i]).abs() <= tol * scale))
}

/// Eigenvalues of a symmetric matrix in ascending order (cyclic Jacobi).
pub fn sym_eigenvalues<const N: usize>(a: &Mat<N>) -> [f64; N] {
    let mut m = *a;
    for _ in 0..64 {
        let off: f64 = (0..N).flat_map(|i| (0..N).filter(move |&j| j != i).map(move |j| (i, j))).map(|(i, j)| m[i][j] * m[i][j]).sum();
        if off < 1e-30 * (1.0 + (0..N).map(|i| m[i][i] * m[i][i]).sum::<f64>()) {
            break;
        }
        for p in 0..N {
            for q in p + 1..N {
                if m[p][q] == 0.0 {
                    continue;
                }
                let theta = (m[q][q] - m[p][p]) / (2.0 * m[p][q]);
                let t = theta.signum() / (theta.abs() + (theta * theta + 1.0).sqrt());
                let t = if theta == 0.0 { 1.0 } else { t };
                let c = 1.0 / (t * t + 1.0).sqrt();
                let s = t * c;
                let mut rot = identity::<N>();
                rot[p][p] = c;
                rot[q][q] = c;
                rot[p][q] = s;
                rot[q][p] = -s;
                m = mat_mul(&transpose(&rot), &mat_mul(&m, &rot));
            }
        }
    }
    let mut ev = [0.0; N];
    for i in 0..N {
        ev[i] = m[i][i];
    }
    ev.sort_by(f64::total_cmp);
    ev
}

pub fn dot<const N: usize>(a: &Point<N>, b: &Point<N>) -> f64 {
    (0..N).map(|i| a[i] * b[i]).sum()
}

pub fn norm2<const N: usize>(a: &Point<N>) -> f64 {
    dot(a, a).sqrt()
}

pub fn sub<const N: usize>(a: &Point<N>, b: &Point<N>) -> Point<N> {
    let mut out = *a;
    for i in 0..N {
        out[i] -= b[i];
    }
    out
}

pub fn add<const N: usize>(a: &Point<N>, b: &Point<N>) -> Point<N> {
    let mut out = *a;
    for i in 0..N {
        out[i] += b[i];
    }
    out
}

pub fn max_abs_diff<const N: usize>(a: &Mat<N>, b: &Mat<N>) -> f64 {
    (0..N).flat_map(|i| (0..N).map(move |j| (i, j))).map(|(i, j)| (a[i][j] - b[i][j]).abs()).fold(0.0, f64::max)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn inverse_roundtrip() {
        let a = [[2.0, 1.0, 0.5], [0.3, 3.0, -1.0], [0.0, 0.7, 1.5]];
        let inv = inverse(&a).unwrap();
        let p = mat_mul(&a, &inv);
        assert!(max_abs_diff(&p, &identity()) < 1e-14);
        assert!((det(&a) * det(&inv) - 1.0).abs() < 1e-14);
    }

    #[test]
    fn singular_has_no_inverse() {
        assert!(inverse(&[[1.0, 2.0], [2.0, 4.0]]).is_none());
    }

    #[test]
    fn jacobi_eigenvalues() {
        let ev = sym_eigenvalues(&[[2.0, 1.0], [1.0, 2.0]]);
        assert!((ev[0] - 1.0).abs() < 1e-13 && (ev[1] - 3.0).abs() < 1e-13);
        let ev3 = sym_eigenvalues(&[[4.0, 1.0, 0.0], [1.0, 4.0, 0.0], [0.0, 0.0, 7.0]]);
        assert!((ev3[0] - 3.0).abs() < 1e-12 && (ev3[1] - 5.0).abs() < 1e-12);
        assert!((ev3[2] - 7.0).abs() < 1e-12);
    }
}
