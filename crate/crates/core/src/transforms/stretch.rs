//! Separable grid-refinement maps x ↦ t. A uniform grid of spacing Δ in t has
//! physical spacing h(x) = Δ/t'(x), which is piecewise linear in x: fine
//! inside each refinement zone and growing geometrically back to Δ outside.

use super::{SmoothMap, TransformError};
use crate::linalg::{self, Mat, Point};

/// Spacing `h` on `[lo, hi]`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct RefineZone {
    pub lo: f64,
    pub hi: f64,
    pub h: f64,
}

#[derive(Clone, Debug, PartialEq)]
pub struct AxisStretch {
    delta: f64,
    xs: Vec<f64>,
    hs: Vec<f64>,
    ts: Vec<f64>,
}

#[derive(Clone, Copy)]
struct Seg {
    x0: f64,
    x1: f64,
    h0: f64,
    slope: f64,
}

impl Seg {
    fn at(&self, x: f64) -> f64 {
        self.h0 + self.slope * (x - self.x0)
    }
}

impl AxisStretch {
    pub fn uniform(delta: f64) -> Self {
        Self { delta, xs: Vec::new(), hs: Vec::new(), ts: Vec::new() }
    }

    /// `growth` is the ratio of neighbouring cell sizes in the transition (> 1).
    pub fn new(delta: f64, zones: &[RefineZone], growth: f64) -> Result<Self, TransformError> {
        if !(delta > 0.0) || !(growth > 1.0) {
            return Err(TransformError::InvalidParameters(format!("stretch needs Δ > 0 and growth > 1, got {delta}, {growth}")));
        }
        let kappa = growth - 1.0;
        let mut segs = Vec::new();
        for z in zones {
            if !(z.lo <= z.hi) || !(z.h > 0.0) {
                return Err(TransformError::InvalidParameters(format!("bad refinement zone {z:?}")));
            }
            let h = z.h.min(delta);
            let ramp = (delta - h) / kappa;
            segs.push(Seg { x0: z.lo - ramp, x1: z.lo, h0: delta, slope: -kappa });
            segs.push(Seg { x0: z.lo, x1: z.hi, h0: h, slope: 0.0 });
            segs.push(Seg { x0: z.hi, x1: z.hi + ramp, h0: h, slope: kappa });
        }
        if segs.is_empty() {
            return Ok(Self::uniform(delta));
        }
        let mut cand: Vec<f64> = segs.iter().flat_map(|s| [s.x0, s.x1]).collect();
        for (i, a) in segs.iter().enumerate() {
            for b in segs.iter().skip(i + 1) {
                if (a.slope - b.slope).abs() < 1e-300 {
                    continue;
                }
                // a.h0 + a.s (x - a.x0) = b.h0 + b.s (x - b.x0)
                let x = (b.h0 - a.h0 + a.slope * a.x0 - b.slope * b.x0) / (a.slope - b.slope);
                if x >= a.x0.max(b.x0) && x <= a.x1.min(b.x1) {
                    cand.push(x);
                }
            }
        }
        cand.sort_by(f64::total_cmp);
        cand.dedup_by(|a, b| (*a - *b).abs() <= 1e-14 * (1.0 + b.abs()));
        let env = |x: f64| segs.iter().filter(|s| x >= s.x0 && x <= s.x1).map(|s| s.at(x)).fold(delta, f64::min);
        let xs = cand;
        let hs: Vec<f64> = xs.iter().map(|&x| env(x)).collect();
        let mut ts = Vec::with_capacity(xs.len());
        ts.push(xs[0]);
        for i in 1..xs.len() {
            let dt = segment_dt(delta, xs[i - 1], xs[i], hs[i - 1], hs[i]);
            ts.push(ts[i - 1] + dt);
        }
        Ok(Self { delta, xs, hs, ts })
    }

    pub fn delta(&self) -> f64 {
        self.delta
    }

    pub fn is_uniform(&self) -> bool {
        self.xs.is_empty()
    }

    /// Physical spacing h(x).
    pub fn spacing(&self, x: f64) -> f64 {
        if self.xs.is_empty() || x <= self.xs[0] || x >= *self.xs.last().unwrap() {
            return self.delta;
        }
        let i = self.xs.partition_point(|&v| v <= x) - 1;
        let f = (x - self.xs[i]) / (self.xs[i + 1] - self.xs[i]);
        self.hs[i] + f * (self.hs[i + 1] - self.hs[i])
    }

    /// Smallest physical spacing.
    pub fn min_spacing(&self) -> f64 {
        self.hs.iter().copied().fold(self.delta, f64::min)
    }

    pub fn forward(&self, x: f64) -> f64 {
        if self.xs.is_empty() || x <= self.xs[0] {
            return x;
        }
        let last = self.xs.len() - 1;
        if x >= self.xs[last] {
            return self.ts[last] + (x - self.xs[last]);
        }
        let i = self.xs.partition_point(|&v| v <= x) - 1;
        self.ts[i] + segment_dt(self.delta, self.xs[i], x, self.hs[i], self.spacing(x))
    }

    pub fn inverse(&self, t: f64) -> f64 {
        if self.xs.is_empty() || t <= self.ts[0] {
            return t;
        }
        let last = self.xs.len() - 1;
        if t >= self.ts[last] {
            return self.xs[last] + (t - self.ts[last]);
        }
        let i = self.ts.partition_point(|&v| v <= t) - 1;
        let (x0, h0) = (self.xs[i], self.hs[i]);
        let s = (self.hs[i + 1] - h0) / (self.xs[i + 1] - x0);
        let u = (t - self.ts[i]) / self.delta;
        if s.abs() < 1e-12 {
            x0 + h0 * u
        } else {
            x0 + h0 / s * (s * u).exp_m1()
        }
    }

    /// dt/dx.
    pub fn derivative(&self, x: f64) -> f64 {
        self.delta / self.spacing(x)
    }
}

fn segment_dt(delta: f64, x0: f64, x1: f64, h0: f64, h1: f64) -> f64 {
    let len = x1 - x0;
    if len <= 0.0 {
        return 0.0;
    }
    let s = (h1 - h0) / len;
    if s.abs() < 1e-12 {
        delta * len / h0
    } else {
        delta / s * (h1 / h0).ln()
    }
}

/// Product of per-axis stretches, as a map from physical x to computational t.
#[derive(Clone, Debug, PartialEq)]
pub struct SeparableStretch<const N: usize> {
    pub axes: [AxisStretch; N],
}

impl<const N: usize> SeparableStretch<N> {
    pub fn uniform(delta: f64) -> Self {
        Self { axes: std::array::from_fn(|_| AxisStretch::uniform(delta)) }
    }

    pub fn is_uniform(&self) -> bool {
        self.axes.iter().all(AxisStretch::is_uniform)
    }

    pub fn jacobian_diag(&self, x: &Point<N>) -> [f64; N] {
        std::array::from_fn(|l| self.axes[l].derivative(x[l]))
    }

    pub fn to_computational(&self, x: &Point<N>) -> Point<N> {
        std::array::from_fn(|l| self.axes[l].forward(x[l]))
    }

    pub fn to_physical(&self, t: &Point<N>) -> Point<N> {
        std::array::from_fn(|l| self.axes[l].inverse(t[l]))
    }
}

impl<const N: usize> SmoothMap<N> for SeparableStretch<N> {
    fn apply(&self, x: &Point<N>) -> Result<Point<N>, TransformError> {
        Ok(self.to_computational(x))
    }
    fn apply_inverse(&self, y: &Point<N>) -> Result<Point<N>, TransformError> {
        Ok(self.to_physical(y))
    }
    fn jacobian(&self, x: &Point<N>) -> Result<Mat<N>, TransformError> {
        Ok(linalg::diag(self.jacobian_diag(x)))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn uniform_is_identity() {
        let s = AxisStretch::uniform(0.1);
        assert_eq!(s.forward(1.234), 1.234);
        assert_eq!(s.inverse(1.234), 1.234);
        assert_eq!(s.derivative(0.0), 1.0);
    }

    #[test]
    fn spacing_profile() {
        let s = AxisStretch::new(0.1, &[RefineZone { lo: -0.02, hi: 0.02, h: 0.002 }], 1.1).unwrap();
        assert!((s.spacing(0.0) - 0.002).abs() < 1e-15);
        assert!((s.spacing(0.12) - 0.012).abs() < 1e-12);
        assert_eq!(s.spacing(5.0), 0.1);
        assert!((s.min_spacing() - 0.002).abs() < 1e-15);
    }

    #[test]
    fn roundtrip_and_derivative() {
        let zones = [RefineZone { lo: -1.02, hi: -0.98, h: 0.001 }, RefineZone { lo: 0.98, hi: 1.02, h: 0.001 }, RefineZone { lo: -0.5, hi: 0.5, h: 0.004 }];
        let s = AxisStretch::new(0.05, &zones, 1.08).unwrap();
        for i in 0..4001 {
            let x = -3.0 + 6.0 * i as f64 / 4000.0;
            let t = s.forward(x);
            assert!((s.inverse(t) - x).abs() < 1e-11, "x={x}");
            let h = 1e-7;
            let fd = (s.forward(x + h) - s.forward(x - h)) / (2.0 * h);
            assert!((fd - s.derivative(x)).abs() < 1e-5 * s.derivative(x), "x={x}: {fd} vs {}", s.derivative(x));
        }
        for w in s.xs.windows(2) {
            assert!(w[1] > w[0]);
        }
    }

    #[test]
    fn overlapping_zones_take_the_finer_spacing() {
        let s = AxisStretch::new(0.1, &[RefineZone { lo: -0.1, hi: 0.1, h: 0.01 }, RefineZone { lo: 0.0, hi: 0.05, h: 0.002 }], 1.1).unwrap();
        assert!((s.spacing(0.03) - 0.002).abs() < 1e-14);
        assert!((s.spacing(-0.09) - 0.01).abs() < 1e-14);
        assert!((s.spacing(-0.05) - 0.007).abs() < 1e-14);
    }
}
