//! Volume exponents of height balls from root-datum polytopes.
//!
//! Coordinates are a positively scaled fundamental-coweight basis of the
//! dominant cone, chosen so all weight pairings and the modular vector are
//! integers; the linear program value max m.t over
//! D_1 = { t >= 0 : n(chi).t <= 1 } is invariant under that scaling.

use crate::error::{Error, Result};
use crate::{rat_int, Rat};
use num_bigint::BigInt;
use num_traits::{One, ToPrimitive, Zero};

#[derive(Debug, Clone)]
pub struct RootDatum {
    pub name: String,
    pub rank: usize,
    /// weight rows n(chi), one per weight of the defining representation
    pub weights: Vec<Vec<i64>>,
    /// modular vector m with delta(a) = q^{m.t}
    pub modular: Vec<i64>,
}

impl RootDatum {
    /// A_{n-1} = SL_n, rank n-1; basis = n * fundamental coweights.
    pub fn sl(n: usize) -> Result<Self> {
        if n < 2 {
            return Err(Error::InvalidInput("sl(n) needs n >= 2".into()));
        }
        let r = n - 1;
        let ni = n as i64;
        let weights = (1..=n)
            .map(|j| (1..=r).map(|i| if j <= i { ni - i as i64 } else { -(i as i64) }).collect())
            .collect();
        let modular = (1..=r).map(|i| ni * i as i64 * (ni - i as i64)).collect();
        Ok(RootDatum { name: format!("sl{n}"), rank: r, weights, modular })
    }

    /// C_n = Sp_{2n}; coweight basis e_1 + ... + e_i is already integral.
    pub fn sp(n: usize) -> Result<Self> {
        if n < 1 {
            return Err(Error::InvalidInput("sp(n) needs n >= 1".into()));
        }
        let mut weights = Vec::new();
        for j in 1..=n {
            let row: Vec<i64> = (1..=n).map(|i| i64::from(j <= i)).collect();
            weights.push(row.iter().map(|v| -v).collect());
            weights.push(row);
        }
        let modular = (1..=n).map(|i| i as i64 * (2 * n as i64 + 1 - i as i64)).collect();
        Ok(RootDatum { name: format!("sp{n}"), rank: n, weights, modular })
    }

    /// SO_n: type B_m for n = 2m+1, type D_m for n = 2m (scaled basis in
    /// the last two coordinates for D).
    pub fn so(n: usize) -> Result<Self> {
        if n < 3 {
            return Err(Error::InvalidInput("so(n) needs n >= 3".into()));
        }
        let m = n / 2;
        let mut weights: Vec<Vec<i64>> = Vec::new();
        let row = |j: usize| -> Vec<i64> {
            if n % 2 == 1 {
                (1..=m).map(|i| i64::from(j <= i)).collect()
            } else {
                (1..=m)
                    .map(|i| {
                        if i <= m - 2 {
                            i64::from(j <= i)
                        } else if i == m - 1 {
                            if j < m { 1 } else { -1 }
                        } else {
                            1
                        }
                    })
                    .collect()
            }
        };
        for j in 1..=m {
            let r = row(j);
            weights.push(r.iter().map(|v| -v).collect());
            weights.push(r);
        }
        if n % 2 == 1 {
            weights.push(vec![0; m]);
        }
        let modular = if n % 2 == 1 {
            (1..=m).map(|i| i as i64 * (2 * m as i64 - i as i64)).collect()
        } else {
            (1..=m)
                .map(|i| {
                    if i <= m - 2 {
                        i as i64 * (2 * m as i64 - i as i64 - 1)
                    } else {
                        m as i64 * (m as i64 - 1)
                    }
                })
                .collect()
        };
        Ok(RootDatum { name: format!("so{n}"), rank: m, weights, modular })
    }

    pub fn by_family(family: &str, n: usize) -> Result<Self> {
        match family {
            "sl" => Self::sl(n),
            "sp" => Self::sp(n),
            "so" => Self::so(n),
            other => Err(Error::InvalidInput(format!("unknown family {other}"))),
        }
    }
}

/// Solve the square rational system rows.t = rhs by Gaussian elimination;
/// None if singular.
fn solve_exact(rows: &[Vec<Rat>], rhs: &[Rat]) -> Option<Vec<Rat>> {
    let r = rows.len();
    let mut a: Vec<Vec<Rat>> = rows
        .iter()
        .zip(rhs)
        .map(|(row, b)| {
            let mut v = row.clone();
            v.push(b.clone());
            v
        })
        .collect();
    for col in 0..r {
        let piv = (col..r).find(|&i| !a[i][col].is_zero())?;
        a.swap(col, piv);
        let p = a[col][col].clone();
        for e in a[col].iter_mut() {
            *e /= &p;
        }
        for i in 0..r {
            if i != col && !a[i][col].is_zero() {
                let f = a[i][col].clone();
                for c in col..=r {
                    let sub = &f * &a[col][c];
                    a[i][c] -= sub;
                }
            }
        }
    }
    Some(a.into_iter().map(|row| row[r].clone()).collect())
}

/// Exact maximum of m.t over D_1 by vertex enumeration; a large synthetic
/// box certifies boundedness (the optimum must not touch it).
pub fn volume_exponent(rd: &RootDatum) -> Result<Rat> {
    let r = rd.rank;
    let big = rat_int(1_000_000);
    // constraints g.t <= c: weights (c=1), -t_i <= 0, t_i <= big
    let mut cons: Vec<(Vec<Rat>, Rat)> = rd
        .weights
        .iter()
        .map(|w| (w.iter().map(|&v| rat_int(v)).collect(), Rat::one()))
        .collect();
    for i in 0..r {
        let mut g = vec![Rat::zero(); r];
        g[i] = -Rat::one();
        cons.push((g, Rat::zero()));
    }
    // the box rows certifying boundedness go last so their index range is known
    for i in 0..r {
        let mut g = vec![Rat::zero(); r];
        g[i] = Rat::one();
        cons.push((g, big.clone()));
    }
    let n_cons = cons.len();
    let mut best: Option<(Rat, bool)> = None; // (value, touches box)
    let mut idx = vec![0usize; r];
    // iterate r-subsets of constraint indices
    fn subsets(n: usize, k: usize, start: usize, idx: &mut Vec<usize>, pos: usize, f: &mut impl FnMut(&[usize])) {
        if pos == k {
            f(idx);
            return;
        }
        for i in start..n {
            idx[pos] = i;
            subsets(n, k, i + 1, idx, pos + 1, f);
        }
    }
    let obj: Vec<Rat> = rd.modular.iter().map(|&v| rat_int(v)).collect();
    let box_start = n_cons - r; // the t_i <= big constraints are the last r
    subsets(n_cons, r, 0, &mut idx, 0, &mut |sel: &[usize]| {
        let rows: Vec<Vec<Rat>> = sel.iter().map(|&i| cons[i].0.clone()).collect();
        let rhs: Vec<Rat> = sel.iter().map(|&i| cons[i].1.clone()).collect();
        let Some(t) = solve_exact(&rows, &rhs) else { return };
        // feasibility
        for (g, c) in &cons {
            let dot: Rat = g.iter().zip(&t).map(|(a, b)| a * b).fold(Rat::zero(), |x, y| x + y);
            if dot > *c {
                return;
            }
        }
        let val: Rat = obj.iter().zip(&t).map(|(a, b)| a * b).fold(Rat::zero(), |x, y| x + y);
        let touches = sel.iter().any(|&i| i >= box_start);
        match &best {
            Some((b, _)) if *b >= val => {}
            _ => best = Some((val, touches)),
        }
    });
    match best {
        Some((_, true)) => Err(Error::InvalidInput(format!("{}: domain unbounded", rd.name))),
        Some((v, false)) => Ok(v),
        None => Err(Error::InvalidInput(format!("{}: empty domain", rd.name))),
    }
}

#[derive(Debug, Clone)]
pub struct ExponentReport {
    pub alpha_g: Rat,
    pub alpha_l: Rat,
    /// exponent of m(B_h) in the lower bound: alpha_l/alpha_g - 1
    pub exponent: Rat,
}

pub fn norm_lower_exponent(g: &RootDatum, l: &RootDatum) -> Result<ExponentReport> {
    let alpha_g = volume_exponent(g)?;
    let alpha_l = volume_exponent(l)?;
    if alpha_g.is_zero() {
        return Err(Error::InvalidInput("alpha_G = 0".into()));
    }
    let exponent = &alpha_l / &alpha_g - Rat::one();
    Ok(ExponentReport { alpha_g, alpha_l, exponent })
}

/// Exact sum of q^{m.t} over integer points of D_h = h-dilated D_1,
/// h = q^s.
pub fn volume_lattice_sum(rd: &RootDatum, q: u64, s: u32, work_bound: u64) -> Result<BigInt> {
    let r = rd.rank;
    // per-coordinate integer caps from s * (max of t_i over D_1)
    let mut caps = vec![0i64; r];
    let mut work: u64 = 1;
    for i in 0..r {
        let mut probe = rd.clone();
        probe.modular = vec![0; r];
        probe.modular[i] = 1;
        let mx = volume_exponent(&probe)?;
        let cap = (mx * rat_int(s as i64)).floor().to_integer().to_i64().unwrap_or(i64::MAX);
        caps[i] = cap.max(0);
        work = work.saturating_mul(caps[i] as u64 + 1);
    }
    if work > work_bound {
        return Err(Error::WorkBoundExceeded(format!(
            "lattice sum grid {work} exceeds bound {work_bound}"
        )));
    }
    let qb = BigInt::from(q);
    let mut total = BigInt::zero();
    let mut t = vec![0i64; r];
    'outer: loop {
        let feasible = rd
            .weights
            .iter()
            .all(|w| w.iter().zip(&t).map(|(a, b)| a * b).sum::<i64>() <= s as i64);
        if feasible {
            let e: i64 = rd.modular.iter().zip(&t).map(|(a, b)| a * b).sum();
            debug_assert!(e >= 0);
            total += qb.pow(e as u32);
        }
        // odometer
        for i in 0..r {
            if t[i] < caps[i] {
                t[i] += 1;
                continue 'outer;
            }
            t[i] = 0;
        }
        break;
    }
    Ok(total)
}

/// Maximum consecutive ratio V(q^{s+1})/V(q^s) for s < s_max.
pub fn doubling_check(rd: &RootDatum, q: u64, s_max: u32, work_bound: u64) -> Result<f64> {
    let mut prev = volume_lattice_sum(rd, q, 0, work_bound)?;
    let mut worst = 0.0f64;
    for s in 1..=s_max {
        let cur = volume_lattice_sum(rd, q, s, work_bound)?;
        let ratio = big_to_f64(&cur) / big_to_f64(&prev);
        worst = worst.max(ratio);
        prev = cur;
    }
    Ok(worst)
}

pub fn big_to_f64(v: &BigInt) -> f64 {
    v.to_f64().unwrap_or(f64::INFINITY)
}
