//! Gauss-Legendre nodes/weights (Newton iteration on Legendre polynomials)
//! and small interval-set helpers shared by the density integrators.

/// Nodes and weights on [-1, 1].
pub fn gauss_legendre(n: usize) -> (Vec<f64>, Vec<f64>) {
    assert!(n >= 1);
    let mut nodes = vec![0.0; n];
    let mut weights = vec![0.0; n];
    let m = n.div_ceil(2);
    for i in 0..m {
        // Chebyshev-like initial guess
        let mut x = (std::f64::consts::PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
        let mut dp = 0.0;
        for _ in 0..100 {
            // evaluate P_n and P_n' by recurrence
            let mut p0 = 1.0;
            let mut p1 = x;
            for k in 2..=n {
                let kf = k as f64;
                let p2 = ((2.0 * kf - 1.0) * x * p1 - (kf - 1.0) * p0) / kf;
                p0 = p1;
                p1 = p2;
            }
            dp = n as f64 * (x * p1 - p0) / (x * x - 1.0);
            let dx = p1 / dp;
            x -= dx;
            if dx.abs() < 1e-15 {
                break;
            }
        }
        nodes[i] = -x;
        nodes[n - 1 - i] = x;
        let w = 2.0 / ((1.0 - x * x) * dp * dp);
        weights[i] = w;
        weights[n - 1 - i] = w;
    }
    if n % 2 == 1 {
        nodes[n / 2] = 0.0;
    }
    (nodes, weights)
}

/// Nodes/weights mapped to [a, b].
pub fn gauss_legendre_on(n: usize, a: f64, b: f64) -> (Vec<f64>, Vec<f64>) {
    let (x, w) = gauss_legendre(n);
    let mid = 0.5 * (a + b);
    let half = 0.5 * (b - a);
    (
        x.iter().map(|t| mid + half * t).collect(),
        w.iter().map(|v| v * half).collect(),
    )
}

/// Adaptive Simpson integration; `tol` is an absolute target for the whole
/// interval, refinement stops at `max_depth` (integrable endpoint or fold
/// singularities then contribute their truncation, which shrinks with depth).
pub fn adaptive_simpson<F: FnMut(f64) -> f64>(g: &mut F, a: f64, b: f64, tol: f64, max_depth: u32) -> f64 {
    fn simpson(fa: f64, fm: f64, fb: f64, a: f64, b: f64) -> f64 {
        (b - a) / 6.0 * (fa + 4.0 * fm + fb)
    }
    fn rec<F: FnMut(f64) -> f64>(
        g: &mut F,
        a: f64,
        b: f64,
        fa: f64,
        fm: f64,
        fb: f64,
        whole: f64,
        tol: f64,
        depth: u32,
    ) -> f64 {
        let m = 0.5 * (a + b);
        let lm = 0.5 * (a + m);
        let rm = 0.5 * (m + b);
        let flm = g(lm);
        let frm = g(rm);
        let left = simpson(fa, flm, fm, a, m);
        let right = simpson(fm, frm, fb, m, b);
        let delta = left + right - whole;
        if depth == 0 || delta.abs() <= 15.0 * tol {
            return left + right + delta / 15.0;
        }
        rec(g, a, m, fa, flm, fm, left, 0.5 * tol, depth - 1)
            + rec(g, m, b, fm, frm, fb, right, 0.5 * tol, depth - 1)
    }
    let m = 0.5 * (a + b);
    let (fa, fm, fb) = (g(a), g(m), g(b));
    let whole = simpson(fa, fm, fb, a, b);
    rec(g, a, b, fa, fm, fb, whole, tol, max_depth)
}

/// The set {x : a x^2 + b x + c <= 0} as a union of at most 2 closed
/// intervals, using +-inf endpoints for unbounded pieces.
fn solve_le(a: f64, b: f64, c: f64) -> Vec<(f64, f64)> {
    const INF: f64 = f64::INFINITY;
    if a == 0.0 {
        if b == 0.0 {
            return if c <= 0.0 { vec![(-INF, INF)] } else { vec![] };
        }
        let r = -c / b;
        return if b > 0.0 { vec![(-INF, r)] } else { vec![(r, INF)] };
    }
    let disc = b * b - 4.0 * a * c;
    if disc < 0.0 {
        return if a < 0.0 { vec![(-INF, INF)] } else { vec![] };
    }
    let sq = disc.sqrt();
    let (r1, r2) = {
        let ra = (-b - sq) / (2.0 * a);
        let rb = (-b + sq) / (2.0 * a);
        (ra.min(rb), ra.max(rb))
    };
    if a > 0.0 {
        vec![(r1, r2)]
    } else {
        vec![(-INF, r1), (r2, INF)]
    }
}

fn intersect(u: &[(f64, f64)], v: &[(f64, f64)]) -> Vec<(f64, f64)> {
    let mut out = Vec::new();
    for &(a1, b1) in u {
        for &(a2, b2) in v {
            let lo = a1.max(a2);
            let hi = b1.min(b2);
            if lo < hi {
                out.push((lo, hi));
            }
        }
    }
    out
}

/// The set {x in [box_lo, box_hi] : lo <= a x^2 + b x + c <= hi} as disjoint
/// intervals.
pub fn quadratic_band_intervals(
    a: f64,
    b: f64,
    c: f64,
    lo: f64,
    hi: f64,
    box_lo: f64,
    box_hi: f64,
) -> Vec<(f64, f64)> {
    let le_hi = solve_le(a, b, c - hi);
    let ge_lo = solve_le(-a, -b, lo - c);
    let band = intersect(&le_hi, &ge_lo);
    intersect(&band, &[(box_lo, box_hi)])
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn gl_integrates_polynomials_exactly() {
        for n in [2usize, 5, 16, 48] {
            let (x, w) = gauss_legendre(n);
            // degree 2n-1 exactness; check x^2 and x^4 on small rules
            let s2: f64 = x.iter().zip(&w).map(|(t, v)| t * t * v).sum();
            assert!((s2 - 2.0 / 3.0).abs() < 1e-13, "n={n}");
            let s0: f64 = w.iter().sum();
            assert!((s0 - 2.0).abs() < 1e-13);
        }
        let (x, w) = gauss_legendre_on(24, 0.0, 2.0);
        let s: f64 = x.iter().zip(&w).map(|(t, v)| t.exp() * v).sum();
        assert!((s - (2.0f64.exp() - 1.0)).abs() < 1e-12);
    }

    #[test]
    fn band_intervals_cases() {
        // x^2 in [1, 4] within [-3, 3]: [-2,-1] u [1,2]
        let iv = quadratic_band_intervals(1.0, 0.0, 0.0, 1.0, 4.0, -3.0, 3.0);
        assert_eq!(iv.len(), 2);
        assert!((iv[0].0 + 2.0).abs() < 1e-12 && (iv[0].1 + 1.0).abs() < 1e-12);
        assert!((iv[1].0 - 1.0).abs() < 1e-12 && (iv[1].1 - 2.0).abs() < 1e-12);
        // linear: 2x in [0, 1] within [-3, 3]
        let iv = quadratic_band_intervals(0.0, 2.0, 0.0, 0.0, 1.0, -3.0, 3.0);
        assert_eq!(iv.len(), 1);
        assert!((iv[0].0).abs() < 1e-12 && (iv[0].1 - 0.5).abs() < 1e-12);
        // constant inside band: whole box
        let iv = quadratic_band_intervals(0.0, 0.0, 0.5, 0.0, 1.0, -1.0, 1.0);
        assert_eq!(iv, vec![(-1.0, 1.0)]);
        // constant outside band: empty
        let iv = quadratic_band_intervals(0.0, 0.0, 5.0, 0.0, 1.0, -1.0, 1.0);
        assert!(iv.is_empty());
        // concave: -x^2 + 2 in [1,3] within [-5,5]: [-1, 1]
        let iv = quadratic_band_intervals(-1.0, 0.0, 2.0, 1.0, 3.0, -5.0, 5.0);
        assert_eq!(iv.len(), 1);
        assert!((iv[0].0 + 1.0).abs() < 1e-12 && (iv[0].1 - 1.0).abs() < 1e-12);
    }
}
