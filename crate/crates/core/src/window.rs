//! Weight windows on R^4: smooth bumps, annular bumps concentrated near the
//! unit level set of a form, indicator boxes, and metric-ball indicators used
//! by the discrepancy machinery. Windows may be translated by a fixed real
//! 4x4 matrix acting on points laid out as 2x2 matrices.

use crate::error::{Error, Result};
use crate::forms::QuaternaryForm;

/// C^infty bump: exp(1 - 1/(1-t^2)) for |t| < 1, else 0. Value 1 at t = 0.
pub fn bump(t: f64) -> f64 {
    if t.abs() >= 1.0 {
        0.0
    } else {
        (1.0 - 1.0 / (1.0 - t * t)).exp()
    }
}

#[derive(Debug, Clone)]
pub enum WindowKind {
    /// bump(|x|/r): radial, supported in the euclidean ball of radius r.
    RadialBump { r: f64 },
    /// bump(|x|/r) * bump((Q(x)-1)/eta): concentrates mass near {Q = 1}.
    AnnularBump { r: f64, eta: f64 },
    /// Indicator of the product of closed intervals [lo_i, hi_i].
    IndicatorBox { lo: [f64; 4], hi: [f64; 4] },
    /// Indicator of the metric ball B(e, r) in SL2(R); see `discrepancy`.
    MetricBall { r: f64 },
}

#[derive(Debug, Clone)]
pub struct Window {
    kind: WindowKind,
    /// Optional translate g: the window evaluates w(g^{-1} x).
    translate: Option<Translate>,
}

#[derive(Debug, Clone)]
struct Translate {
    g: [[f64; 4]; 4],
    g_inv: [[f64; 4]; 4],
}

impl Window {
    pub fn radial_bump(r: f64) -> Result<Self> {
        if !(r > 0.0) {
            return Err(Error::InvalidInput(format!("radius must be positive, got {r}")));
        }
        Ok(Self { kind: WindowKind::RadialBump { r }, translate: None })
    }

    pub fn annular_bump(r: f64, eta: f64) -> Result<Self> {
        if !(r > 0.0 && eta > 0.0) {
            return Err(Error::InvalidInput(format!("need r, eta > 0, got r={r}, eta={eta}")));
        }
        Ok(Self { kind: WindowKind::AnnularBump { r, eta }, translate: None })
    }

    pub fn indicator_box(lo: [f64; 4], hi: [f64; 4]) -> Result<Self> {
        if (0..4).any(|i| !(lo[i] <= hi[i])) {
            return Err(Error::InvalidInput("box has empty side".into()));
        }
        Ok(Self { kind: WindowKind::IndicatorBox { lo, hi }, translate: None })
    }

    pub fn metric_ball(r: f64) -> Result<Self> {
        if !(r > 0.0) {
            return Err(Error::InvalidInput(format!("radius must be positive, got {r}")));
        }
        Ok(Self { kind: WindowKind::MetricBall { r }, translate: None })
    }

    pub fn kind(&self) -> &WindowKind {
        &self.kind
    }

    /// Replace the window by x -> w(g^{-1} x).
    pub fn translated(mut self, g: [[f64; 4]; 4]) -> Result<Self> {
        let g_inv = invert4(&g).ok_or_else(|| Error::InvalidInput("translate matrix is singular".into()))?;
        self.translate = Some(Translate { g, g_inv });
        Ok(self)
    }

    pub fn translate_matrix(&self) -> Option<&[[f64; 4]; 4]> {
        self.translate.as_ref().map(|t| &t.g)
    }

    pub fn is_smooth(&self) -> bool {
        matches!(self.kind, WindowKind::RadialBump { .. } | WindowKind::AnnularBump { .. })
    }

    /// Evaluate at an f64 point. `form` is consulted only by AnnularBump
    /// (for the level-set factor) and MetricBall (which requires det4-shaped
    /// coordinates and tests membership in the SL2(R) ball).
    pub fn value(&self, form: &QuaternaryForm, x: &[f64; 4]) -> f64 {
        let y = match &self.translate {
            None => *x,
            Some(t) => apply4(&t.g_inv, x),
        };
        match &self.kind {
            WindowKind::RadialBump { r } => bump(norm2(&y).sqrt() / r),
            WindowKind::AnnularBump { r, eta } => {
                let radial = bump(norm2(&y).sqrt() / r);
                if radial == 0.0 {
                    0.0
                } else {
                    radial * bump((form.evaluate_f64(&y) - 1.0) / eta)
                }
            }
            WindowKind::IndicatorBox { lo, hi } => {
                if (0..4).all(|i| lo[i] <= y[i] && y[i] <= hi[i]) {
                    1.0
                } else {
                    0.0
                }
            }
            WindowKind::MetricBall { r } => {
                match crate::discrepancy::metric_distance_from_identity(&y) {
                    Some(d) if d <= *r => 1.0,
                    _ => 0.0,
                }
            }
        }
    }

    pub fn value_at_int(&self, form: &QuaternaryForm, x: &[i64; 4]) -> f64 {
        let xf = std::array::from_fn(|i| x[i] as f64);
        self.value(form, &xf)
    }

    /// Axis-aligned box containing the support (of the untranslated kernel,
    /// then mapped through the translate by interval arithmetic on corners).
    pub fn bounding_box(&self) -> [(f64, f64); 4] {
        let base: [(f64, f64); 4] = match &self.kind {
            WindowKind::RadialBump { r } | WindowKind::AnnularBump { r, .. } => [(-r, *r); 4],
            WindowKind::IndicatorBox { lo, hi } => std::array::from_fn(|i| (lo[i], hi[i])),
            WindowKind::MetricBall { r } => {
                // |entries of exp X| <= exp(|X|_F) and |X|_F <= sqrt(2) r for
                // our metric; crude but safe.
                let b = ((2.0f64).sqrt() * r).exp() + 1.0;
                [(-b, b); 4]
            }
        };
        match &self.translate {
            None => base,
            Some(t) => {
                // image of the base box under g: take extremes over corners
                let mut out = [(f64::INFINITY, f64::NEG_INFINITY); 4];
                for mask in 0..16u32 {
                    let corner: [f64; 4] = std::array::from_fn(|i| {
                        if mask >> i & 1 == 0 {
                            base[i].0
                        } else {
                            base[i].1
                        }
                    });
                    let img = apply4(&t.g, &corner);
                    for i in 0..4 {
                        out[i].0 = out[i].0.min(img[i]);
                        out[i].1 = out[i].1.max(img[i]);
                    }
                }
                out
            }
        }
    }
}

fn norm2(x: &[f64; 4]) -> f64 {
    x.iter().map(|v| v * v).sum()
}

fn apply4(m: &[[f64; 4]; 4], x: &[f64; 4]) -> [f64; 4] {
    std::array::from_fn(|i| (0..4).map(|j| m[i][j] * x[j]).sum())
}

fn invert4(m: &[[f64; 4]; 4]) -> Option<[[f64; 4]; 4]> {
    let mut a = *m;
    let mut inv = [[0.0; 4]; 4];
    for (i, row) in inv.iter_mut().enumerate() {
        row[i] = 1.0;
    }
    for col in 0..4 {
        let pivot = (col..4).max_by(|&r, &s| a[r][col].abs().total_cmp(&a[s][col].abs()))?;
        if a[pivot][col].abs() < 1e-14 {
            return None;
        }
        a.swap(col, pivot);
        inv.swap(col, pivot);
        let p = a[col][col];
        for k in 0..4 {
            a[col][k] /= p;
            inv[col][k] /= p;
        }
        for r in 0..4 {
            if r == col {
                continue;
            }
            let f = a[r][col];
            if f == 0.0 {
                continue;
            }
            for k in 0..4 {
                a[r][k] -= f * a[col][k];
                inv[r][k] -= f * inv[col][k];
            }
        }
    }
    Some(inv)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn bump_values() {
        assert_eq!(bump(0.0), 1.0);
        assert_eq!(bump(1.0), 0.0);
        assert_eq!(bump(-1.0), 0.0);
        assert_eq!(bump(2.5), 0.0);
        assert!((bump(0.5) - (1.0f64 - 1.0 / 0.75).exp()).abs() < 1e-15);
        // even
        for t in [0.1, 0.3, 0.77, 0.999] {
            assert_eq!(bump(t), bump(-t));
        }
    }

    #[test]
    fn radial_bump_support() {
        let f = QuaternaryForm::det4();
        let w = Window::radial_bump(2.0).unwrap();
        assert_eq!(w.value(&f, &[0.0, 0.0, 0.0, 0.0]), 1.0);
        assert_eq!(w.value(&f, &[2.0, 0.0, 0.0, 0.0]), 0.0);
        assert!(w.value(&f, &[1.0, 0.0, 0.0, 0.0]) > 0.0);
        assert_eq!(w.value(&f, &[3.0, 3.0, 0.0, 0.0]), 0.0);
    }

    #[test]
    fn annular_bump_tracks_level_set() {
        let f = QuaternaryForm::det4();
        let w = Window::annular_bump(3.0, 0.5).unwrap();
        // on the level set, small radius: positive
        assert!(w.value(&f, &[1.0, 0.0, 0.0, 1.0]) > 0.0);
        // far from the level set: zero
        assert_eq!(w.value(&f, &[2.0, 0.0, 0.0, 2.0]), 0.0);
    }

    #[test]
    fn box_window() {
        let f = QuaternaryForm::det4();
        let w = Window::indicator_box([-1.0; 4], [1.0; 4]).unwrap();
        assert_eq!(w.value(&f, &[1.0, 1.0, 1.0, 1.0]), 1.0);
        assert_eq!(w.value(&f, &[1.0, 1.0, 1.0, 1.1]), 0.0);
        assert!(Window::indicator_box([1.0; 4], [0.0; 4]).is_err());
    }

    #[test]
    fn translated_window() {
        let f = QuaternaryForm::det4();
        let mut g = [[0.0; 4]; 4];
        for (i, row) in g.iter_mut().enumerate() {
            row[i] = 2.0;
        }
        let w = Window::radial_bump(1.0).unwrap().translated(g).unwrap();
        // w(g^{-1} x) with g = 2I: support radius doubles
        assert!(w.value(&f, &[1.5, 0.0, 0.0, 0.0]) > 0.0);
        assert_eq!(w.value(&f, &[2.0, 0.0, 0.0, 0.0]), 0.0);
        let bb = w.bounding_box();
        for side in bb {
            assert_eq!(side, (-2.0, 2.0));
        }
    }

    #[test]
    fn bounding_box_contains_support_samples() {
        let f = QuaternaryForm::det4();
        let w = Window::annular_bump(2.5, 0.3).unwrap();
        let bb = w.bounding_box();
        let mut state = 11u64;
        let mut next = move || {
            state = state.wrapping_mul(6364136223846793005).wrapping_add(7);
            (state >> 33) as f64 / (1u64 << 31) as f64 * 8.0 - 4.0
        };
        for _ in 0..500 {
            let x: [f64; 4] = std::array::from_fn(|_| next());
            if w.value(&f, &x) > 0.0 {
                for i in 0..4 {
                    assert!(bb[i].0 <= x[i] && x[i] <= bb[i].1);
                }
            }
        }
    }
}
