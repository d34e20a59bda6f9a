//! Empirical discrepancy for SL2(Z[1/p]) acting at level l: window counts
//! against the product main term, a mean-square Monte-Carlo estimator, the
//! averaged-operator bound it feeds, and a smooth-proxy decay fit.
//!
//! Coordinates: a 4-vector packs a 2x2 matrix as (x1 x2; x3 x4), so det is
//! the det4 catalog form. Archimedean balls are exp-images of Euclidean
//! balls in the Lie algebra with |(a b; c -a)|^2 = a^2 + b^2 + c^2.

use crate::densities::{least_squares_slope, sigma_finite, sigma_infinity_parametric};
use crate::error::{Error, Result};
use crate::forms::{CongruenceClass, QuaternaryForm};
use crate::quadrature::gauss_legendre;
use crate::quadric::{enumerate_solutions, weighted_count};
use crate::spectral::ball_volume;
use crate::window::Window;
use num_traits::ToPrimitive;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

const ZETA2: f64 = std::f64::consts::PI * std::f64::consts::PI / 6.0;
const BOUNDARY_TOL: f64 = 1e-12;

/// Distance d(e, M) in the left-invariant metric: the algebra norm of
/// log M. None when M is outside the exponential image (trace <= -2) or
/// not unimodular.
pub fn metric_distance_from_identity(x: &[f64; 4]) -> Option<f64> {
    let det = x[0] * x[3] - x[1] * x[2];
    if (det - 1.0).abs() > 1e-9 {
        return None;
    }
    let t = 0.5 * (x[0] + x[3]);
    // M = cosh(l) I + (sinh(l)/l) X with l^2 = a^2 + bc; recover the
    // scale factor l / sinh(l) branch by branch
    let factor = if t > 1.0 + 1e-13 {
        let l = t.acosh();
        l / (t * t - 1.0).sqrt()
    } else if t > -1.0 + 1e-13 {
        if (t - 1.0).abs() <= 1e-13 {
            1.0
        } else {
            let th = t.acos();
            th / th.sin()
        }
    } else {
        return None;
    };
    let a = 0.5 * (x[0] - x[3]) * factor;
    let b = x[1] * factor;
    let c = x[2] * factor;
    Some((a * a + b * b + c * c).sqrt())
}

/// exp of (a b; c -a), packed as a 4-vector.
pub fn exp_from_algebra(a: f64, b: f64, c: f64) -> [f64; 4] {
    let mu = a * a + b * c; // l^2, either sign
    let (ch, sh) = if mu > 1e-30 {
        let l = mu.sqrt();
        (l.cosh(), l.sinh() / l)
    } else if mu < -1e-30 {
        let th = (-mu).sqrt();
        (th.cos(), th.sin() / th)
    } else {
        (1.0, 1.0)
    };
    [ch + sh * a, sh * b, sh * c, ch - sh * a]
}

/// Haar volume of B(e, r), Tamagawa-normalized (covolume zeta(2)): the
/// exp-chart Jacobian sinh^2(l)/l^2 integrated over the algebra ball.
pub fn haar_ball_volume(r: f64) -> Result<f64> {
    if !(r > 0.0 && r <= 1.0) {
        return Err(Error::InvalidInput(format!("radius {r} outside the chart range (0, 1]")));
    }
    // jac depends only on mu = l^2 = rho^2 (a^2 + bc) on the direction sphere
    let jac = |mu: f64| -> f64 {
        if mu > 1e-30 {
            let l = mu.sqrt();
            (l.sinh() / l).powi(2)
        } else if mu < -1e-30 {
            let th = (-mu).sqrt();
            (th.sin() / th).powi(2)
        } else {
            1.0
        }
    };
    let (cn, cw) = gauss_legendre(24); // cos(theta) on [-1, 1]
    let (rn, rw) = gauss_legendre(24); // rho, mapped to [0, r]
    let n_phi = 48;
    let mut total = 0.0;
    for (ci, &cth) in cn.iter().enumerate() {
        let sth = (1.0 - cth * cth).sqrt();
        for k in 0..n_phi {
            let phi = 2.0 * std::f64::consts::PI * k as f64 / n_phi as f64;
            let (a, b, c) = (cth, sth * phi.cos(), sth * phi.sin());
            let g = a * a + b * c;
            for (ri, &t) in rn.iter().enumerate() {
                let rho = 0.5 * r * (t + 1.0);
                let wgt = cw[ci] * (2.0 * std::f64::consts::PI / n_phi as f64) * rw[ri] * 0.5 * r;
                total += wgt * rho * rho * jac(rho * rho * g);
            }
        }
    }
    Ok(total / ZETA2)
}

/// |SL2(Z/l)| = l^3 prod_{p | l} (1 - p^-2).
pub fn congruence_index(l: u64) -> u64 {
    let mut n = l;
    let mut out: u64 = 1;
    let mut p = 2u64;
    while p * p <= n {
        if n % p == 0 {
            let mut pe: u64 = 1;
            while n % p == 0 {
                n /= p;
                pe *= p;
            }
            out *= pe * pe * pe / (p * p) * (p * p - 1);
        }
        p += 1;
    }
    if n > 1 {
        out *= n * n * n / (n * n) * (n * n - 1);
    }
    out
}

/// The 4x4 matrix of left multiplication M -> g M on packed 2x2 matrices.
pub fn left_mul_matrix(g: &[f64; 4]) -> [[f64; 4]; 4] {
    [
        [g[0], 0.0, g[1], 0.0],
        [0.0, g[0], 0.0, g[1]],
        [g[2], 0.0, g[3], 0.0],
        [0.0, g[2], 0.0, g[3]],
    ]
}

fn mat_mul(a: &[f64; 4], b: &[f64; 4]) -> [f64; 4] {
    [
        a[0] * b[0] + a[1] * b[2],
        a[0] * b[1] + a[1] * b[3],
        a[2] * b[0] + a[3] * b[2],
        a[2] * b[1] + a[3] * b[3],
    ]
}

fn sl2_inverse(x: &[f64; 4]) -> [f64; 4] {
    [x[3], -x[1], -x[2], x[0]]
}

#[derive(Debug, Clone, Copy)]
pub struct CountOutcome {
    pub count: u64,
    /// solutions within tolerance of the ball boundary, counted in `count`
    /// but reported so the caller can see the count both ways
    pub boundary: u64,
}

/// |{ y integer matrix : det y = h^2, y = hI (mod l), h^{-1} y in B(x,r) }|
/// for h = p^s, by direct metric membership per enumerated solution.
pub fn count_in_window(
    p: u64,
    s: u32,
    l: i64,
    x: &[f64; 4],
    r: f64,
    work_bound: u64,
) -> Result<CountOutcome> {
    let h = (p as i64).pow(s);
    let f = QuaternaryForm::det4();
    let cc = CongruenceClass::scalar_matrix(l, h)?;
    let x_inv = sl2_inverse(x);
    // support box: entries of x exp(ball) are bounded by |x| e^{sqrt 2 r}
    let xm = x.iter().fold(0.0f64, |m, v| m.max(v.abs()));
    let bound = 2.0 * xm * ((2.0f64).sqrt() * r).exp() + 1.0;
    let hb = h as f64 * bound;
    let sols = enumerate_solutions(&f, h, &cc, &[(-hb, hb); 4], work_bound)?;
    let mut count = 0u64;
    let mut boundary = 0u64;
    for y in &sols.solutions {
        let m: [f64; 4] = std::array::from_fn(|i| y[i] as f64 / h as f64);
        if let Some(d) = metric_distance_from_identity(&mat_mul(&x_inv, &m)) {
            if d <= r {
                count += 1;
                if (d - r).abs() <= BOUNDARY_TOL {
                    boundary += 1;
                }
            } else if (d - r).abs() <= BOUNDARY_TOL {
                boundary += 1;
            }
        }
    }
    Ok(CountOutcome { count, boundary })
}

/// D(x) = | count / m_p(B_h) - m_oo(B(e,r)) / [Gamma : Gamma_l] |.
pub fn discrepancy_at(
    p: u64,
    s: u32,
    l: i64,
    x: &[f64; 4],
    r: f64,
    work_bound: u64,
) -> Result<f64> {
    let c = count_in_window(p, s, l, x, r, work_bound)?;
    let m_p = ball_volume(p, s).total.to_f64().unwrap();
    let main = haar_ball_volume(r)? / congruence_index(l as u64) as f64;
    Ok((c.count as f64 / m_p - main).abs())
}

/// Integer lifts of SL2(Z/l) representatives, found by a small search
/// around each residue matrix.
fn coset_lifts(l: i64) -> Result<Vec<[i64; 4]>> {
    let mut out = Vec::new();
    let range = |v: i64| -> Vec<i64> { (-2..=2).map(|k| v + k * l).collect() };
    for a in 0..l {
        for b in 0..l {
            for c in 0..l {
                'res: for d in 0..l {
                    if (a * d - b * c).rem_euclid(l) != 1 % l {
                        continue;
                    }
                    for aa in range(a) {
                        for bb in range(b) {
                            for cc in range(c) {
                                for dd in range(d) {
                                    if aa * dd - bb * cc == 1 {
                                        out.push([aa, bb, cc, dd]);
                                        continue 'res;
                                    }
                                }
                            }
                        }
                    }
                    return Err(Error::InvalidInput(format!(
                        "no integer lift found for a residue matrix mod {l}"
                    )));
                }
            }
        }
    }
    Ok(out)
}

/// Draws from the invariant probability measure on Gamma_l \ SL2(R):
/// Iwasawa n(u) a(v) k(theta) with (u, v) rejection-sampled from the
/// standard modular domain and a uniform coset representative.
pub struct DomainSampler {
    lifts: Vec<[i64; 4]>,
    rng: ChaCha8Rng,
}

impl DomainSampler {
    pub fn new(l: i64, seed: u64) -> Result<Self> {
        if l < 1 {
            return Err(Error::InvalidInput(format!("level must be >= 1, got {l}")));
        }
        Ok(Self { lifts: coset_lifts(l)?, rng: ChaCha8Rng::seed_from_u64(seed) })
    }

    /// The upper-half-plane part (u + iv in the standard domain).
    pub fn sample_point(&mut self) -> (f64, f64) {
        let y0 = 3.0f64.sqrt() / 2.0;
        loop {
            let u: f64 = self.rng.gen_range(-0.5..0.5);
            // v from density 1/v^2 on [y0, oo): inverse CDF
            let t: f64 = self.rng.gen_range(0.0..1.0);
            let v = y0 / (1.0 - t);
            if u * u + v * v >= 1.0 {
                return (u, v);
            }
        }
    }

    pub fn sample_matrix(&mut self) -> [f64; 4] {
        let (u, v) = self.sample_point();
        let theta: f64 = self.rng.gen_range(0.0..2.0 * std::f64::consts::PI);
        let sq = v.sqrt();
        let na = [sq, u / sq, 0.0, 1.0 / sq];
        let k = [theta.cos(), -theta.sin(), theta.sin(), theta.cos()];
        let g = mat_mul(&na, &k);
        let rep = self.lifts[self.rng.gen_range(0..self.lifts.len())];
        let repf: [f64; 4] = std::array::from_fn(|i| rep[i] as f64);
        mat_mul(&repf, &g)
    }
}

#[derive(Debug, Clone)]
pub struct MeanSquareReport {
    pub e: f64,
    pub ci_lo: f64,
    pub ci_hi: f64,
    pub samples: usize,
}

/// sqrt of the Monte-Carlo mean of D^2, with a normal-theory confidence
/// interval on the mean square. Deterministic for a fixed seed.
pub fn mean_square_discrepancy(
    p: u64,
    s: u32,
    l: i64,
    r: f64,
    n_samples: usize,
    seed: u64,
    work_bound: u64,
) -> Result<MeanSquareReport> {
    if n_samples == 0 {
        return Err(Error::InvalidInput("need at least one sample".into()));
    }
    let mut sampler = DomainSampler::new(l, seed)?;
    let mut sq = Vec::with_capacity(n_samples);
    for _ in 0..n_samples {
        let x = sampler.sample_matrix();
        let d = discrepancy_at(p, s, l, &x, r, work_bound)?;
        sq.push(d * d);
    }
    let mean = sq.iter().sum::<f64>() / n_samples as f64;
    let var = sq.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / n_samples.max(2) as f64;
    let se = (var / n_samples as f64).sqrt();
    Ok(MeanSquareReport {
        e: mean.sqrt(),
        ci_lo: (mean - 1.96 * se).max(0.0).sqrt(),
        ci_hi: (mean + 1.96 * se).sqrt(),
        samples: n_samples,
    })
}

/// 2 [Gamma : Gamma_l] m_oo(B(e,r))^{-1} E — the averaged-operator norm
/// bound; conditional on the representation being discretely embedded,
/// which is not checkable here.
pub fn spectral_gap_bound(l: i64, r: f64, e: f64) -> Result<f64> {
    if e < 0.0 {
        return Err(Error::InvalidInput("E must be nonnegative".into()));
    }
    Ok(2.0 * congruence_index(l as u64) as f64 * e / haar_ball_volume(r)?)
}

#[derive(Debug, Clone)]
pub struct ProxyReport {
    /// rows (s, m_p(B_h), rms deviation)
    pub rows: Vec<(u32, f64, f64)>,
    /// least-squares slope of -log rms against log m_p(B_h)
    pub sigma: f64,
}

/// Decay fit for the smooth-window deviation: for h = p^s along the
/// ladder, the L^2 average over sampled x of
/// (N_h(w_x) - sigma_oo sigma_f h^2 / l^4) / m_p(B_h); reported against
/// the non-effective reference exponent 1/16 without asserting it.
pub fn smooth_proxy_decay(
    p: u64,
    l: i64,
    w: &Window,
    s_ladder: &[u32],
    n_samples: usize,
    seed: u64,
    work_bound: u64,
) -> Result<ProxyReport> {
    if !w.is_smooth() {
        return Err(Error::InvalidInput("proxy needs a smooth window".into()));
    }
    if s_ladder.len() < 2 {
        return Err(Error::InvalidInput("ladder needs at least two heights".into()));
    }
    let f = QuaternaryForm::det4();
    let sigma_inf = sigma_infinity_parametric(w, 120)?;
    let mut rows = Vec::new();
    for &s in s_ladder {
        let h = (p as i64).pow(s);
        let cc = CongruenceClass::scalar_matrix(l, h)?;
        let q_max = 50 * l.max(2);
        let sf = sigma_finite(&f, &cc, h, q_max, 10 + 2 * h.ilog2(), work_bound)?;
        let main = sigma_inf * sf.value * (h * h) as f64 / (l as f64).powi(4);
        let m_p = ball_volume(p, s).total.to_f64().unwrap();
        let mut sampler = DomainSampler::new(l, seed.wrapping_add(s as u64))?;
        let mut acc = 0.0;
        for _ in 0..n_samples {
            let x = sampler.sample_matrix();
            let wx = w.clone().translated(left_mul_matrix(&x))?;
            let n = weighted_count(&f, h, &cc, &wx, work_bound)?;
            acc += ((n - main) / m_p).powi(2);
        }
        rows.push((s, m_p, (acc / n_samples as f64).sqrt()));
    }
    let pts: Vec<(f64, f64)> =
        rows.iter().map(|&(_, m, rms)| (m.ln(), -(rms.max(1e-300)).ln())).collect();
    Ok(ProxyReport { sigma: least_squares_slope(&pts), rows })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::default_work_bound;

    #[test]
    fn metric_round_trip() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        for _ in 0..200 {
            let a = rng.gen_range(-0.8..0.8);
            let b = rng.gen_range(-0.8..0.8);
            let c = rng.gen_range(-0.8..0.8);
            let m = exp_from_algebra(a, b, c);
            let det = m[0] * m[3] - m[1] * m[2];
            assert!((det - 1.0).abs() < 1e-12);
            let d = metric_distance_from_identity(&m).unwrap();
            let expect = (a * a + b * b + c * c).sqrt();
            // exp is injective on this range except for elliptic wrap,
            // which |X| < pi rules out
            assert!((d - expect).abs() < 1e-9, "got {d} vs {expect}");
        }
        assert_eq!(metric_distance_from_identity(&[1.0, 0.0, 0.0, 1.0]), Some(0.0));
        assert_eq!(metric_distance_from_identity(&[-1.0, 0.0, 0.0, -1.0]), None);
        assert_eq!(metric_distance_from_identity(&[2.0, 0.0, 0.0, 2.0]), None);
    }

    #[test]
    fn haar_volume_small_r_asymptotics() {
        let mut prev = 0.0;
        for r in [0.02f64, 0.1, 0.3, 0.6, 1.0] {
            let v = haar_ball_volume(r).unwrap();
            assert!(v > prev);
            prev = v;
        }
        let r = 0.01;
        let v = haar_ball_volume(r).unwrap();
        let euclid = 4.0 / 3.0 * std::f64::consts::PI * r.powi(3) / ZETA2;
        assert!((v / euclid - 1.0).abs() < 1e-3, "ratio {}", v / euclid);
        assert!(haar_ball_volume(1.5).is_err());
    }

    #[test]
    fn congruence_indices() {
        assert_eq!(congruence_index(1), 1);
        assert_eq!(congruence_index(2), 6);
        assert_eq!(congruence_index(3), 24);
        assert_eq!(congruence_index(4), 48);
        assert_eq!(congruence_index(6), 144);
        // enumeration oracle for small moduli
        for l in 2..=6u64 {
            let mut n = 0u64;
            for a in 0..l {
                for b in 0..l {
                    for c in 0..l {
                        for d in 0..l {
                            if (a * d + l * l - b * c % (l * l)) % l == 1 % l {
                                n += 1;
                            }
                        }
                    }
                }
            }
            assert_eq!(congruence_index(l), n, "l={l}");
        }
    }

    #[test]
    fn counts_at_identity() {
        let wb = default_work_bound();
        let e = [1.0, 0.0, 0.0, 1.0];
        // s=0: only the identity inside a small ball
        assert_eq!(count_in_window(2, 0, 1, &e, 0.2, wb).unwrap().count, 1);
        assert_eq!(count_in_window(2, 0, 2, &e, 0.2, wb).unwrap().count, 1);
        // s=0, l=1, bigger ball still only e below the injectivity radius
        assert_eq!(count_in_window(3, 0, 1, &e, 0.5, wb).unwrap().count, 1);
        let d = discrepancy_at(2, 0, 1, &e, 0.3, wb).unwrap();
        let expect = (1.0 - haar_ball_volume(0.3).unwrap()).abs();
        assert!((d - expect).abs() < 1e-12);
    }

    #[test]
    fn count_matches_weighted_count() {
        let wb = default_work_bound();
        let mut sampler = DomainSampler::new(2, 11).unwrap();
        let f = QuaternaryForm::det4();
        for trial in 0..40 {
            let x = sampler.sample_matrix();
            let (p, s, l, r) = (2u64, 1 + trial % 3, 1 + (trial as i64) % 2, 0.4);
            let h = (p as i64).pow(s);
            let cc = CongruenceClass::scalar_matrix(l, h).unwrap();
            let direct = count_in_window(p, s, l, &x, r, wb).unwrap();
            let w = Window::metric_ball(r).unwrap().translated(left_mul_matrix(&x)).unwrap();
            let via_window = weighted_count(&f, h, &cc, &w, wb).unwrap();
            assert_eq!(direct.count as f64, via_window, "trial {trial}");
        }
    }

    #[test]
    fn discrepancy_right_invariance() {
        let wb = default_work_bound();
        let mut sampler = DomainSampler::new(1, 3).unwrap();
        // gamma in Gamma_2 (= I mod 2): counts biject under y -> gamma^{-1} y,
        // so D is invariant under left translation x -> gamma x
        let gamma = [3.0, 2.0, 4.0, 3.0];
        for _ in 0..10 {
            let x = sampler.sample_matrix();
            let xg = mat_mul(&gamma, &x);
            let a = discrepancy_at(2, 1, 2, &x, 0.4, wb).unwrap();
            let b = discrepancy_at(2, 1, 2, &xg, 0.4, wb).unwrap();
            assert!((a - b).abs() < 1e-12);
        }
    }

    #[test]
    fn sampler_measures_reference_set() {
        let mut sampler = DomainSampler::new(1, 9).unwrap();
        let n = 20000;
        let t = 2.0;
        let mut hits = 0;
        for _ in 0..n {
            let (_, v) = sampler.sample_point();
            if v >= t {
                hits += 1;
            }
        }
        let expect = (1.0 / t) / (std::f64::consts::PI / 3.0);
        let got = hits as f64 / n as f64;
        assert!((got - expect).abs() < 0.02, "got {got} vs {expect}");
    }

    #[test]
    fn mean_square_seeds_and_bound() {
        let wb = default_work_bound();
        let a = mean_square_discrepancy(2, 1, 1, 0.4, 150, 1, wb).unwrap();
        let b = mean_square_discrepancy(2, 1, 1, 0.4, 150, 2, wb).unwrap();
        assert!(a.e >= 0.0 && a.ci_lo <= a.e && a.e <= a.ci_hi);
        // independent seeds agree within combined CI widths
        assert!((a.e - b.e).abs() <= (a.ci_hi - a.ci_lo) + (b.ci_hi - b.ci_lo) + 1e-9);
        // determinism
        let a2 = mean_square_discrepancy(2, 1, 1, 0.4, 150, 1, wb).unwrap();
        assert_eq!(a.e, a2.e);
        // gap bound arithmetic
        assert_eq!(spectral_gap_bound(1, 0.4, 0.0).unwrap(), 0.0);
        let one = spectral_gap_bound(2, 0.4, 0.01).unwrap();
        let two = spectral_gap_bound(2, 0.4, 0.02).unwrap();
        assert!((two - 2.0 * one).abs() < 1e-12);
    }

    #[test]
    fn proxy_decay_runs() {
        let wb = default_work_bound();
        let w = Window::annular_bump(2.0, 0.4).unwrap();
        let rep = smooth_proxy_decay(2, 1, &w, &[1, 2, 3], 12, 4, wb).unwrap();
        assert_eq!(rep.rows.len(), 3);
        for (_, m, rms) in &rep.rows {
            assert!(*m >= 1.0 && *rms >= 0.0);
        }
    }
}
