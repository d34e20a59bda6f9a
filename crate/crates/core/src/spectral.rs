//! Height balls in SL2(Q_p) via the (p+1)-regular tree, radial spherical
//! functions of the complementary series, and the derived operator norms.
//!
//! Normalization: m_p of the maximal compact is 1, so the ball of height
//! p^s has volume = number of K-cosets it meets = 1 + sum of the shell
//! sizes (p+1)p^{2j-1} for 1 <= j <= s.

use crate::error::{Error, Result};
use crate::{rat, rat_int, Rat};
use num_traits::{One, ToPrimitive, Zero};

#[derive(Debug, Clone)]
pub struct TreeBallProfile {
    pub p: u64,
    pub s: u32,
    /// shell volumes vol_j for j = 0..=s
    pub shells: Vec<Rat>,
    pub total: Rat,
}

pub fn ball_volume(p: u64, s: u32) -> TreeBallProfile {
    let mut shells = vec![Rat::one()];
    for j in 1..=s {
        shells.push(rat_int(((p + 1) as i64) * (p as i64).pow(2 * j - 1)));
    }
    let total = shells.iter().fold(Rat::zero(), |a, b| a + b);
    TreeBallProfile { p, s, shells, total }
}

/// Hecke eigenvalue of the distance-2 averaging operator on the
/// complementary-series radial function with decay exponent 1 - s.
pub fn hecke_eigenvalue(p: u64, s: f64) -> f64 {
    let pf = p as f64;
    (pf.powf(1.0 - s) + pf.powf(1.0 + s) + pf - 1.0) / (pf * pf + pf)
}

/// Radial values f(2j) for j = 0..=j_max: f(0)=1, f(2)=lambda, and
/// p^2 f(2j+2) = (p^2+p) lambda f(2j) - (p-1) f(2j) - f(2j-2).
pub fn spherical_values(p: u64, s: f64, j_max: u32) -> Result<Vec<f64>> {
    if !(0.0..1.0).contains(&s) {
        return Err(Error::InvalidInput(format!("spectral parameter {s} outside [0,1)")));
    }
    let lam = hecke_eigenvalue(p, s);
    let pf = p as f64;
    let mut f = vec![1.0, lam];
    while f.len() <= j_max as usize {
        let j = f.len() - 1;
        let next = ((pf * pf + pf) * lam * f[j] - (pf - 1.0) * f[j] - f[j - 1]) / (pf * pf);
        f.push(next);
    }
    f.truncate(j_max as usize + 1);
    Ok(f)
}

pub fn spherical_value(p: u64, s: f64, j: u32) -> Result<f64> {
    Ok(spherical_values(p, s, j)?[j as usize])
}

/// Exact-rational radial values for t = p^s rational (e.g. s with
/// p^s an integer root works out whenever t is rational); the recursion
/// and eigenvalue lambda = (p/t + p t + p - 1)/(p^2 + p) stay in Q.
pub fn spherical_values_exact(p: u64, t: &Rat, j_max: u32) -> Result<Vec<Rat>> {
    if t <= &Rat::zero() {
        return Err(Error::InvalidInput("t = p^s must be positive".into()));
    }
    let pr = rat_int(p as i64);
    let lam = (&pr / t + &pr * t + &pr - Rat::one()) / (&pr * &pr + &pr);
    let p2 = &pr * &pr;
    let mut f = vec![Rat::one(), lam.clone()];
    while f.len() <= j_max as usize {
        let j = f.len() - 1;
        let next = ((&p2 + &pr) * &lam * &f[j] - (&pr - Rat::one()) * &f[j] - &f[j - 1]) / &p2;
        f.push(next);
    }
    f.truncate(j_max as usize + 1);
    Ok(f)
}

/// |sum_j vol_j f(2j)| / m_p(B_h), h = p^{s_height}: the averaging-operator
/// norm on the complementary series with parameter s.
pub fn operator_norm_complementary(p: u64, s: f64, s_height: u32) -> Result<f64> {
    let ball = ball_volume(p, s_height);
    let f = spherical_values(p, s, s_height)?;
    let num: f64 = ball
        .shells
        .iter()
        .zip(&f)
        .map(|(v, fv)| v.to_f64().unwrap() * fv)
        .sum();
    Ok(num.abs() / ball.total.to_f64().unwrap())
}

/// m(B_h)^{-1} sum_j vol_j p^{-j}: the Harish-Chandra delta^{1/2} average
/// over the ball, exact.
pub fn weak_lower_average(p: u64, s_height: u32) -> Rat {
    let ball = ball_volume(p, s_height);
    let num: Rat = ball
        .shells
        .iter()
        .enumerate()
        .map(|(j, v)| v * rat(1, (p as i64).pow(j as u32)))
        .fold(Rat::zero(), |a, b| a + b);
    num / ball.total
}

/// Comparison curve mB^{-1/2 + eps} for a tempered representation.
pub fn tempered_reference(m_b: f64, eps: f64) -> f64 {
    m_b.powf(-0.5 + eps)
}

#[derive(Debug, Clone)]
pub struct SpectralRow {
    pub s_height: u32,
    pub m_b: Rat,
    pub norm: f64,
    pub norm_scaled: f64,
    pub tempered_ref: f64,
    pub weak_avg: f64,
}

pub fn spectral_sweep(p: u64, s: f64, height_max: u32) -> Result<Vec<SpectralRow>> {
    let mut rows = Vec::new();
    for sh in 0..=height_max {
        let ball = ball_volume(p, sh);
        let m_b = ball.total.to_f64().unwrap();
        let norm = operator_norm_complementary(p, s, sh)?;
        rows.push(SpectralRow {
            s_height: sh,
            m_b: ball.total,
            norm,
            norm_scaled: norm * m_b.powf((1.0 - s) / 2.0),
            tempered_ref: tempered_reference(m_b, 0.0),
            weak_avg: weak_lower_average(p, sh).to_f64().unwrap(),
        });
    }
    Ok(rows)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn ball_volumes_small() {
        assert_eq!(ball_volume(2, 0).total, rat_int(1));
        assert_eq!(ball_volume(2, 1).total, rat_int(7));
        assert_eq!(ball_volume(3, 2).total, rat_int(121));
        // doubling: consecutive ratio at most p^2 + p, tending to p^2
        for p in [2u64, 3, 5] {
            let mut prev = ball_volume(p, 1).total;
            for s in 2..=8 {
                let cur = ball_volume(p, s).total;
                let ratio = &cur / &prev;
                assert!(ratio <= rat_int((p * p + p) as i64));
                prev = cur;
            }
            let r8 = ball_volume(p, 9).total / ball_volume(p, 8).total;
            assert!((r8.to_f64().unwrap() - (p * p) as f64).abs() < 1.0);
        }
    }

    #[test]
    fn spherical_recursion_consistency() {
        for p in [2u64, 3] {
            for s in [0.0, 0.3, 0.7, 0.95] {
                let f = spherical_values(p, s, 12).unwrap();
                let lam = hecke_eigenvalue(p, s);
                let pf = p as f64;
                for j in 1..=11usize {
                    let avg = (f[j - 1] + (pf - 1.0) * f[j] + pf * pf * f[j + 1]) / (pf * pf + pf);
                    assert!((avg - lam * f[j]).abs() < 1e-12);
                }
                assert_eq!(f[0], 1.0);
                assert!((f[1] - lam).abs() < 1e-15);
                for v in &f {
                    assert!(v.abs() <= 1.0 + 1e-12);
                    if s > 0.0 {
                        assert!(*v > 0.0);
                    }
                }
            }
        }
    }

    #[test]
    fn spherical_decay_matches_exponent() {
        // c1 <= f(2j) p^{j(1-s)} <= c2 (1+j) on the computed range
        for (p, s) in [(2u64, 0.3), (2, 0.6), (3, 0.5)] {
            let f = spherical_values(p, s, 20).unwrap();
            for (j, v) in f.iter().enumerate().skip(1) {
                let scaled = v * (p as f64).powf(j as f64 * (1.0 - s));
                assert!(scaled > 0.05, "p={p} s={s} j={j} scaled={scaled}");
                assert!(scaled < 10.0 * (1.0 + j as f64), "p={p} s={s} j={j} scaled={scaled}");
            }
        }
    }

    #[test]
    fn exact_mode_agrees_with_float() {
        // t = p^1 (s = 1 is the trivial rep boundary; use t = p^0 = 1 for
        // the tempered endpoint instead, where s = 0 exactly)
        let ex = spherical_values_exact(2, &rat_int(1), 10).unwrap();
        let fl = spherical_values(2, 0.0, 10).unwrap();
        for (e, f) in ex.iter().zip(&fl) {
            assert!((e.to_f64().unwrap() - f).abs() < 1e-12);
        }
    }

    #[test]
    fn trivial_rep_is_constant() {
        // lambda(s -> 1) = 1 and the constant vector solves the recursion
        let ex = spherical_values_exact(2, &rat_int(2), 10).unwrap();
        for v in &ex {
            assert_eq!(v, &Rat::one());
        }
        let n = {
            let f = spherical_values(3, 0.999999, 8).unwrap();
            f[8]
        };
        assert!((n - 1.0).abs() < 1e-3);
    }

    #[test]
    fn operator_norm_bands() {
        assert_eq!(operator_norm_complementary(2, 0.5, 0).unwrap(), 1.0);
        for p in [2u64, 3] {
            for s in [0.2, 0.5, 0.8] {
                let rows = spectral_sweep(p, s, 10).unwrap();
                let scaled: Vec<f64> = rows.iter().skip(1).map(|r| r.norm_scaled).collect();
                let lo = scaled.iter().cloned().fold(f64::INFINITY, f64::min);
                let hi = scaled.iter().cloned().fold(0.0f64, f64::max);
                assert!(lo > 0.0 && hi / lo < 10.0, "p={p} s={s} band [{lo},{hi}]");
            }
        }
    }

    #[test]
    fn weak_average_scaling() {
        let mut prev = Rat::one() + Rat::one();
        for sh in 0..=10 {
            let v = weak_lower_average(2, sh);
            assert!(v < prev, "not strictly decreasing at {sh}");
            let mb = ball_volume(2, sh).total.to_f64().unwrap();
            let scaled = v.to_f64().unwrap() * mb.sqrt();
            assert!(scaled >= 0.5 && scaled <= 2.0 * (1.0 + sh as f64 * (2.0f64).ln()));
            prev = v;
        }
        assert_eq!(weak_lower_average(2, 0), Rat::one());
    }

    #[test]
    fn tempered_curve() {
        assert_eq!(tempered_reference(1.0, 0.3), 1.0);
        assert_eq!(tempered_reference(4.0, 0.0), 0.5);
        assert!((tempered_reference(100.0, 0.1) - 100.0f64.powf(-0.4)).abs() < 1e-15);
    }
}
