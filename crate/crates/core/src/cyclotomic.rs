//! Exact arithmetic in Z[zeta_n], zeta_n = e^{2 pi i / n}.
//!
//! Elements are stored in the group-ring presentation: an integer coefficient
//! for each power zeta_n^j, j mod n. Addition and multiplication (cyclic
//! convolution) are obvious there; the presentation is redundant, so equality
//! goes through reduction modulo the n-th cyclotomic polynomial, which gives
//! a canonical form of length phi(n). A floating shadow is available for
//! magnitude checks.

use num_bigint::BigInt;
use num_complex::Complex64;
use num_traits::{One, Zero};
use std::collections::HashMap;
use std::f64::consts::TAU;
use std::sync::Mutex;
use std::sync::OnceLock;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Cyclo {
    n: u64,
    /// coefficient of zeta_n^j at index j; length n
    coeffs: Vec<i128>,
}

impl Cyclo {
    pub fn zero(n: u64) -> Self {
        assert!(n >= 1);
        Self { n, coeffs: vec![0; n as usize] }
    }

    pub fn integer(n: u64, v: i128) -> Self {
        let mut c = Self::zero(n);
        c.coeffs[0] = v;
        c
    }

    /// zeta_n^j
    pub fn zeta_pow(n: u64, j: i64) -> Self {
        let mut c = Self::zero(n);
        let idx = j.rem_euclid(n as i64) as usize;
        c.coeffs[idx] = 1;
        c
    }

    pub fn order(&self) -> u64 {
        self.n
    }

    pub fn add_zeta_pow(&mut self, j: i64, v: i128) {
        let idx = j.rem_euclid(self.n as i64) as usize;
        self.coeffs[idx] += v;
    }

    pub fn add(&self, other: &Self) -> Self {
        assert_eq!(self.n, other.n, "mismatched cyclotomic orders");
        let coeffs = self.coeffs.iter().zip(&other.coeffs).map(|(a, b)| a + b).collect();
        Self { n: self.n, coeffs }
    }

    pub fn scale(&self, v: i128) -> Self {
        Self { n: self.n, coeffs: self.coeffs.iter().map(|a| a * v).collect() }
    }

    /// Cyclic convolution; O(t1 * t2) over the nonzero terms.
    pub fn mul(&self, other: &Self) -> Self {
        assert_eq!(self.n, other.n, "mismatched cyclotomic orders");
        let n = self.n as usize;
        let mut out = vec![0i128; n];
        for (i, &a) in self.coeffs.iter().enumerate() {
            if a == 0 {
                continue;
            }
            for (j, &b) in other.coeffs.iter().enumerate() {
                if b == 0 {
                    continue;
                }
                let k = (i + j) % n;
                out[k] += a * b;
            }
        }
        Self { n: self.n, coeffs: out }
    }

    /// Complex conjugation: zeta^j -> zeta^{-j}.
    pub fn conj(&self) -> Self {
        let n = self.n as usize;
        let mut out = vec![0i128; n];
        for (j, &a) in self.coeffs.iter().enumerate() {
            out[(n - j) % n] = a;
        }
        Self { n: self.n, coeffs: out }
    }

    /// Re-express in Z[zeta_m] for n | m via zeta_n = zeta_m^{m/n}.
    pub fn embed(&self, m: u64) -> Self {
        assert_eq!(m % self.n, 0, "target order must be a multiple");
        let stride = (m / self.n) as usize;
        let mut out = vec![0i128; m as usize];
        for (j, &a) in self.coeffs.iter().enumerate() {
            out[j * stride] = a;
        }
        Self { n: m, coeffs: out }
    }

    /// Canonical form: the remainder of sum c_j x^j modulo Phi_n(x), as
    /// phi(n) coefficients. Two elements are equal iff canonical forms agree.
    pub fn canonical(&self) -> Vec<BigInt> {
        let phi = cyclotomic_polynomial(self.n);
        let mut rem: Vec<BigInt> = self.coeffs.iter().map(|&c| BigInt::from(c)).collect();
        poly_rem_monic(&mut rem, &phi);
        rem.truncate(phi.len() - 1);
        while rem.len() < phi.len() - 1 {
            rem.push(BigInt::zero());
        }
        rem
    }

    pub fn is_zero(&self) -> bool {
        if self.coeffs.iter().all(|c| c.is_zero()) {
            return true;
        }
        self.canonical().iter().all(|c| c.is_zero())
    }

    pub fn eq_exact(&self, other: &Self) -> bool {
        let m = lcm(self.n, other.n);
        let a = if self.n == m { self.clone() } else { self.embed(m) };
        let b = if other.n == m { other.clone() } else { other.embed(m) };
        a.canonical() == b.canonical()
    }

    /// True when the element equals the stated rational integer.
    pub fn eq_integer(&self, v: i128) -> bool {
        self.eq_exact(&Self::integer(self.n, v))
    }

    pub fn to_c64(&self) -> Complex64 {
        let mut acc = Complex64::new(0.0, 0.0);
        for (j, &a) in self.coeffs.iter().enumerate() {
            if a == 0 {
                continue;
            }
            let th = TAU * j as f64 / self.n as f64;
            acc += Complex64::new(th.cos(), th.sin()) * a as f64;
        }
        acc
    }
}

fn lcm(a: u64, b: u64) -> u64 {
    a / gcd(a, b) * b
}

pub fn gcd(a: u64, b: u64) -> u64 {
    if b == 0 {
        a
    } else {
        gcd(b, a % b)
    }
}

/// Coefficients of Phi_n, ascending degree, monic. Memoized.
pub fn cyclotomic_polynomial(n: u64) -> Vec<BigInt> {
    static CACHE: OnceLock<Mutex<HashMap<u64, Vec<BigInt>>>> = OnceLock::new();
    let cache = CACHE.get_or_init(|| Mutex::new(HashMap::new()));
    if let Some(p) = cache.lock().unwrap().get(&n) {
        return p.clone();
    }
    // x^n - 1 divided by Phi_d for every proper divisor d | n
    let mut poly = vec![BigInt::zero(); n as usize + 1];
    poly[0] = BigInt::from(-1);
    poly[n as usize] = BigInt::one();
    for d in 1..n {
        if n % d == 0 {
            let phi_d = cyclotomic_polynomial(d);
            poly = poly_div_exact(&poly, &phi_d);
        }
    }
    cache.lock().unwrap().insert(n, poly.clone());
    poly
}

/// Exact division of polynomials (ascending coefficients), divisor monic.
fn poly_div_exact(num: &[BigInt], den: &[BigInt]) -> Vec<BigInt> {
    let mut rem: Vec<BigInt> = num.to_vec();
    let dn = den.len() - 1;
    let qn = rem.len() - 1 - dn;
    let mut quot = vec![BigInt::zero(); qn + 1];
    for k in (0..=qn).rev() {
        let c = rem[k + dn].clone();
        if !c.is_zero() {
            for (i, d) in den.iter().enumerate() {
                let sub = &c * d;
                rem[k + i] -= sub;
            }
        }
        quot[k] = c;
    }
    debug_assert!(rem.iter().all(|c| c.is_zero()), "non-exact polynomial division");
    quot
}

/// In-place remainder of `poly` modulo the monic `modulus` (ascending).
fn poly_rem_monic(poly: &mut Vec<BigInt>, modulus: &[BigInt]) {
    let dn = modulus.len() - 1;
    while poly.len() > dn {
        let k = poly.len() - 1;
        let c = poly[k].clone();
        if !c.is_zero() {
            for (i, d) in modulus.iter().enumerate().take(dn) {
                let sub = &c * d;
                poly[k - dn + i] -= sub;
            }
        }
        poly.pop();
    }
}

pub fn euler_phi(mut n: u64) -> u64 {
    let mut result = n;
    let mut p = 2;
    while p * p <= n {
        if n % p == 0 {
            while n % p == 0 {
                n /= p;
            }
            result -= result / p;
        }
        p += 1;
    }
    if n > 1 {
        result -= result / n;
    }
    result
}
