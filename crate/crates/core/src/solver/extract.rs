//! Sampling discrete fields on circles, and `.cfld` field dumps.
//!
//! Values come from tensor-product cubic Lagrange interpolation of the
//! cell-centred data in computational coordinates; gradients from the
//! derivative of the same interpolant mapped back through the stretch.

use std::f64::consts::PI;
use std::fs::File;
use std::io::{BufRead, BufReader, BufWriter, Read, Write};
use std::path::Path;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use super::{DiscreteField, FieldKind, IncidentWave, SolveError};
use crate::farfield::CircleSamples;
use crate::linalg::Point;

/// Cubic Lagrange weights and their derivatives on nodes −1, 0, 1, 2 at s ∈ [0, 1).
fn lagrange4(s: f64) -> ([f64; 4], [f64; 4]) {
    let w = [-s * (s - 1.0) * (s - 2.0) / 6.0, (s + 1.0) * (s - 1.0) * (s - 2.0) / 2.0, -(s + 1.0) * s * (s - 2.0) / 2.0, (s + 1.0) * s * (s - 1.0) / 6.0];
    let dw = [-(3.0 * s * s - 6.0 * s + 2.0) / 6.0, (3.0 * s * s - 4.0 * s - 1.0) / 2.0, -(3.0 * s * s - 2.0 * s - 2.0) / 2.0, (3.0 * s * s - 1.0) / 6.0];
    (w, dw)
}

/// Interpolated value and physical gradient at physical point `x`. `None`
/// when the stencil would reach into the PML.
pub fn interpolate(field: &DiscreteField, x: &Point<2>) -> Option<(Complex64, [Complex64; 2])> {
    let g = &field.grid;
    let t = g.stretch.to_computational(x);
    let mut base = [0usize; 2];
    let mut w = [[0.0; 4]; 2];
    let mut dw = [[0.0; 4]; 2];
    let dims = g.dims();
    for l in 0..2 {
        let f = (t[l] - g.origin[l]) / g.delta - 0.5;
        let fl = f.floor();
        let lo = fl as isize - 1;
        if lo < g.pml.cells as isize || lo + 3 >= (dims[l] - g.pml.cells) as isize {
            return None;
        }
        base[l] = lo as usize;
        (w[l], dw[l]) = lagrange4(f - fl);
    }
    let (mut v, mut gx, mut gy) = (Complex64::new(0.0, 0.0), Complex64::new(0.0, 0.0), Complex64::new(0.0, 0.0));
    for b in 0..4 {
        for a in 0..4 {
            let u = field.values[g.idx(base[0] + a, base[1] + b)];
            v += u * (w[0][a] * w[1][b]);
            gx += u * (dw[0][a] * w[1][b]);
            gy += u * (w[0][a] * dw[1][b]);
        }
    }
    let jd = g.stretch.jacobian_diag(x);
    Some((v, [gx * (jd[0] / g.delta), gy * (jd[1] / g.delta)]))
}

/// u^s and ∂u^s/∂ν at `n` equispaced points of the circle |x| = radius.
pub fn extract_circle(field: &DiscreteField, inc: &IncidentWave, radius: f64, n: usize) -> Result<CircleSamples, SolveError> {
    if n == 0 || !(radius > 0.0) {
        return Err(SolveError::Extraction(format!("need n > 0 and radius > 0, got {n}, {radius}")));
    }
    if let Some(reach) = field.scatterer_radius {
        if radius < reach + 2.0 * field.grid.delta {
            return Err(SolveError::Extraction(format!("circle radius {radius} is within 2Δ of the scatterer (reach {reach:.4})")));
        }
    }
    let mut values = Vec::with_capacity(n);
    let mut normal_derivs = Vec::with_capacity(n);
    for m in 0..n {
        let th = 2.0 * PI * m as f64 / n as f64;
        let nu = [th.cos(), th.sin()];
        let x = [radius * nu[0], radius * nu[1]];
        let (mut v, mut gr) = interpolate(field, &x).ok_or_else(|| SolveError::Extraction(format!("circle of radius {radius} reaches the PML")))?;
        match field.kind {
            FieldKind::Scattered => {}
            FieldKind::Total | FieldKind::Incident => {
                let gi = inc.gradient(&x);
                v -= inc.value(&x);
                gr = [gr[0] - gi[0], gr[1] - gi[1]];
            }
        }
        values.push(v);
        normal_derivs.push(gr[0] * nu[0] + gr[1] * nu[1]);
    }
    Ok(CircleSamples { radius, values, normal_derivs })
}

/// Metadata line of a `.cfld` file.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CfldHeader {
    pub format: String,
    pub version: u32,
    pub kind: FieldKind,
    pub nx: usize,
    pub ny: usize,
    pub delta: f64,
    /// Computational coordinates of the lower-left grid corner.
    pub origin: [f64; 2],
    pub pml_cells: usize,
    pub stretched: bool,
    pub k: f64,
    pub d: [f64; 2],
}

/// One JSON header line, then `nx·ny` little-endian (re, im) f64 pairs, row-major.
pub fn write_cfld(path: &Path, field: &DiscreteField) -> Result<(), SolveError> {
    let g = &field.grid;
    let header = CfldHeader {
        format: "cfld".into(),
        version: 1,
        kind: field.kind,
        nx: g.nx,
        ny: g.ny,
        delta: g.delta,
        origin: g.origin,
        pml_cells: g.pml.cells,
        stretched: !g.stretch.is_uniform(),
        k: field.wave.k,
        d: field.wave.d,
    };
    let mut w = BufWriter::new(File::create(path)?);
    serde_json::to_writer(&mut w, &header).map_err(|e| SolveError::Format(e.to_string()))?;
    w.write_all(b"\n")?;
    for v in &field.values {
        w.write_all(&v.re.to_le_bytes())?;
        w.write_all(&v.im.to_le_bytes())?;
    }
    w.flush()?;
    Ok(())
}

pub fn read_cfld(path: &Path) -> Result<(CfldHeader, Vec<Complex64>), SolveError> {
    let mut r = BufReader::new(File::open(path)?);
    let mut line = String::new();
    r.read_line(&mut line)?;
    let header: CfldHeader = serde_json::from_str(line.trim_end()).map_err(|e| SolveError::Format(e.to_string()))?;
    if header.format != "cfld" {
        return Err(SolveError::Format(format!("unexpected format {}", header.format)));
    }
    let mut bytes = Vec::new();
    r.read_to_end(&mut bytes)?;
    let n = header.nx * header.ny;
    if bytes.len() != 16 * n {
        return Err(SolveError::Format(format!("expected {} bytes of data, found {}", 16 * n, bytes.len())));
    }
    let f = |c: &[u8]| f64::from_le_bytes(c.try_into().expect("8 bytes"));
    let values = bytes.chunks_exact(16).map(|c| Complex64::new(f(&c[..8]), f(&c[8..]))).collect();
    Ok((header, values))
}
