//! Integral quaternary quadratic forms (quaternion norm forms), exact Gram
//! data, and p-adic max-norms on points of Z[1/p]^4.
//!
//! A form is stored by its ten integer coefficients c_ij (i <= j) of
//! Q(x) = sum c_ij x_i x_j. The Gram matrix A with Q(x) = x^t A x is half
//! integral: we keep 2A as an integer matrix so all downstream arithmetic
//! stays exact.

use crate::error::{Error, Result};
use crate::{rat_int, Rat};
use num_bigint::BigInt;
use num_traits::Zero;

/// Index of coefficient c_ij (i <= j) inside the 10-vector.
fn coeff_index(i: usize, j: usize) -> usize {
    debug_assert!(i <= j && j < 4);
    // (0,0)(0,1)(0,2)(0,3)(1,1)(1,2)(1,3)(2,2)(2,3)(3,3)
    match (i, j) {
        (0, j) => j,
        (1, j) => 3 + j,
        (2, j) => 5 + j,
        (3, 3) => 9,
        _ => unreachable!(),
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct QuaternaryForm {
    name: String,
    coeffs: [i64; 10],
    /// 2A, integer symmetric: diagonal 2*c_ii, off-diagonal c_ij.
    two_a: [[i64; 4]; 4],
    det_two_a: i64,
    iso_real: bool,
    iso_rational: bool,
}

impl QuaternaryForm {
    pub fn from_coeffs(name: &str, coeffs: [i64; 10], iso_real: bool, iso_rational: bool) -> Result<Self> {
        let mut two_a = [[0i64; 4]; 4];
        for i in 0..4 {
            for j in i..4 {
                let c = coeffs[coeff_index(i, j)];
                if i == j {
                    two_a[i][i] = 2 * c;
                } else {
                    two_a[i][j] = c;
                    two_a[j][i] = c;
                }
            }
        }
        let det_two_a = det4_i64(&two_a);
        if det_two_a == 0 {
            return Err(Error::InvalidInput(format!("form {name} is degenerate (det A = 0)")));
        }
        Ok(Self { name: name.to_string(), coeffs, two_a, det_two_a, iso_real, iso_rational })
    }

    /// The determinant form N(x) = x1 x4 - x2 x3 on 2x2 matrices: the norm
    /// form of M2(Q) with respect to the maximal order M2(Z).
    pub fn det4() -> Self {
        let mut c = [0i64; 10];
        c[coeff_index(0, 3)] = 1;
        c[coeff_index(1, 2)] = -1;
        Self::from_coeffs("det4", c, true, true).unwrap()
    }

    /// The sum of four squares (Hamilton quaternion norm), definite.
    pub fn sq4() -> Self {
        let mut c = [0i64; 10];
        for i in 0..4 {
            c[coeff_index(i, i)] = 1;
        }
        Self::from_coeffs("sq4", c, false, false).unwrap()
    }

    /// x1^2 - 2 x2^2 - 3 x3^2 + 6 x4^2: norm form of the quaternion algebra
    /// (2,3)/Q, indefinite over R but anisotropic over Q.
    pub fn indef_2_3() -> Self {
        let mut c = [0i64; 10];
        c[coeff_index(0, 0)] = 1;
        c[coeff_index(1, 1)] = -2;
        c[coeff_index(2, 2)] = -3;
        c[coeff_index(3, 3)] = 6;
        Self::from_coeffs("indef-2-3", c, true, false).unwrap()
    }

    /// Look up a form by catalog key, or parse a comma-separated list of the
    /// ten coefficients c11,c12,c13,c14,c22,c23,c24,c33,c34,c44.
    pub fn by_key(key: &str) -> Result<Self> {
        match key {
            "det4" => Ok(Self::det4()),
            "sq4" => Ok(Self::sq4()),
            "indef-2-3" => Ok(Self::indef_2_3()),
            _ => {
                let parts: Vec<i64> = key
                    .split(',')
                    .map(|s| s.trim().parse::<i64>())
                    .collect::<std::result::Result<_, _>>()
                    .map_err(|_| Error::InvalidInput(format!("unknown form key {key:?}")))?;
                if parts.len() != 10 {
                    return Err(Error::InvalidInput(format!(
                        "explicit form needs 10 coefficients, got {}",
                        parts.len()
                    )));
                }
                let mut c = [0i64; 10];
                c.copy_from_slice(&parts);
                // Isotropy flags are unknown for ad-hoc forms; leave conservative.
                Self::from_coeffs("custom", c, false, false)
            }
        }
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn coeffs(&self) -> &[i64; 10] {
        &self.coeffs
    }

    pub fn coeff(&self, i: usize, j: usize) -> i64 {
        self.coeffs[coeff_index(i.min(j), i.max(j))]
    }

    /// The integer matrix 2A.
    pub fn two_gram(&self) -> &[[i64; 4]; 4] {
        &self.two_a
    }

    pub fn det_two_gram(&self) -> i64 {
        self.det_two_a
    }

    /// det(A) = det(2A)/16, exact.
    pub fn disc(&self) -> Rat {
        rat_int(self.det_two_a) / rat_int(16)
    }

    pub fn iso_real(&self) -> bool {
        self.iso_real
    }

    pub fn iso_rational(&self) -> bool {
        self.iso_rational
    }

    /// Q(x), exactly.
    pub fn evaluate(&self, x: &[i64; 4]) -> i64 {
        let mut acc: i128 = 0;
        for i in 0..4 {
            for j in i..4 {
                acc += self.coeffs[coeff_index(i, j)] as i128 * x[i] as i128 * x[j] as i128;
            }
        }
        i64::try_from(acc).expect("form value overflows i64")
    }

    pub fn evaluate_f64(&self, x: &[f64; 4]) -> f64 {
        let mut acc = 0.0;
        for i in 0..4 {
            for j in i..4 {
                acc += self.coeffs[coeff_index(i, j)] as f64 * x[i] * x[j];
            }
        }
        acc
    }

    /// F_h(x) = Q(x) - h^2.
    pub fn f_h(&self, x: &[i64; 4], h: i64) -> i64 {
        self.evaluate(x) - h * h
    }

    /// The bilinear pairing x^t (2A) y, exact.
    pub fn two_bilinear(&self, x: &[i64; 4], y: &[i64; 4]) -> i64 {
        let mut acc: i128 = 0;
        for i in 0..4 {
            for j in 0..4 {
                acc += self.two_a[i][j] as i128 * x[i] as i128 * y[j] as i128;
            }
        }
        i64::try_from(acc).expect("bilinear value overflows i64")
    }

    /// Exact A^{-1} c, solving (2A) y = 2c by rational Gaussian elimination.
    pub fn gram_inverse_times(&self, c: &[i64; 4]) -> [Rat; 4] {
        let mut m: Vec<Vec<Rat>> = (0..4)
            .map(|i| {
                let mut row: Vec<Rat> = (0..4).map(|j| rat_int(self.two_a[i][j])).collect();
                row.push(rat_int(2 * c[i]));
                row
            })
            .collect();
        // forward elimination with partial (nonzero) pivoting
        for col in 0..4 {
            let pivot = (col..4)
                .find(|&r| !m[r][col].is_zero())
                .expect("2A is invertible");
            m.swap(col, pivot);
            let p = m[col][col].clone();
            for r in 0..4 {
                if r == col {
                    continue;
                }
                if m[r][col].is_zero() {
                    continue;
                }
                let f = &m[r][col] / &p;
                for k in col..5 {
                    let sub = &f * &m[col][k];
                    m[r][k] = &m[r][k] - sub;
                }
            }
        }
        std::array::from_fn(|i| &m[i][4] / &m[i][i])
    }

    /// det(2A) * A^{-1} c as an integer vector (denominators cleared); used
    /// for gcd conditions on c without touching rationals.
    pub fn scaled_gram_inverse_times(&self, c: &[i64; 4]) -> [BigInt; 4] {
        let y = self.gram_inverse_times(c);
        // y = 2 (2A)^{-1} c, and det(2A) (2A)^{-1} is the integral adjugate,
        // so (det(2A)/2) y is integral.
        let scale = rat_int(self.det_two_a) / rat_int(2);
        std::array::from_fn(|i| {
            let v = &y[i] * &scale;
            debug_assert!(v.is_integer(), "scaled inverse not integral");
            v.to_integer()
        })
    }
}

fn det4_i64(m: &[[i64; 4]; 4]) -> i64 {
    // cofactor expansion via 3x3 minors, i128 internally
    let mut det: i128 = 0;
    for col in 0..4 {
        let mut minor = [[0i128; 3]; 3];
        for (ri, r) in (1..4).enumerate() {
            let mut cj = 0;
            for c in 0..4 {
                if c == col {
                    continue;
                }
                minor[ri][cj] = m[r][c] as i128;
                cj += 1;
            }
        }
        let d3 = minor[0][0] * (minor[1][1] * minor[2][2] - minor[1][2] * minor[2][1])
            - minor[0][1] * (minor[1][0] * minor[2][2] - minor[1][2] * minor[2][0])
            + minor[0][2] * (minor[1][0] * minor[2][1] - minor[1][1] * minor[2][0]);
        let sign = if col % 2 == 0 { 1 } else { -1 };
        det += sign * m[0][col] as i128 * d3;
    }
    i64::try_from(det).expect("det(2A) overflows i64")
}

/// Residue class constraint x = residue (mod modulus); modulus 1 means none.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CongruenceClass {
    modulus: i64,
    residue: [i64; 4],
}

impl CongruenceClass {
    pub fn new(modulus: i64, residue: [i64; 4]) -> Result<Self> {
        if modulus < 1 {
            return Err(Error::InvalidInput(format!("modulus must be positive, got {modulus}")));
        }
        let residue = std::array::from_fn(|i| residue[i].rem_euclid(modulus));
        Ok(Self { modulus, residue })
    }

    pub fn trivial() -> Self {
        Self { modulus: 1, residue: [0; 4] }
    }

    /// The class h*I in M2(Z)/l, i.e. residue (h,0,0,h).
    pub fn scalar_matrix(modulus: i64, h: i64) -> Result<Self> {
        Self::new(modulus, [h, 0, 0, h])
    }

    pub fn modulus(&self) -> i64 {
        self.modulus
    }

    pub fn residue(&self) -> &[i64; 4] {
        &self.residue
    }

    pub fn contains(&self, x: &[i64; 4]) -> bool {
        (0..4).all(|i| (x[i] - self.residue[i]).rem_euclid(self.modulus) == 0)
    }

    /// Reduce this class modulo a divisor d of the modulus.
    pub fn reduce_mod(&self, d: i64) -> Self {
        Self {
            modulus: d,
            residue: std::array::from_fn(|i| self.residue[i].rem_euclid(d)),
        }
    }

    /// Iterate over all classes mod l in lexicographic order.
    pub fn all_classes(modulus: i64) -> impl Iterator<Item = CongruenceClass> {
        let l = modulus;
        let total = (l as u64).pow(4);
        (0..total).map(move |idx| {
            let mut r = [0i64; 4];
            let mut rem = idx;
            for i in (0..4).rev() {
                r[i] = (rem % l as u64) as i64;
                rem /= l as u64;
            }
            CongruenceClass { modulus: l, residue: r }
        })
    }
}

/// A point p^{-s} * num with num in Z^4, in canonical form: if s > 0 then not
/// every numerator entry is divisible by p.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PAdicPoint {
    p: i64,
    num: [i64; 4],
    s: u32,
}

impl PAdicPoint {
    pub fn new(p: i64, num: [i64; 4], s: u32) -> Result<Self> {
        if p < 2 {
            return Err(Error::InvalidInput(format!("p must be a prime >= 2, got {p}")));
        }
        if num.iter().all(|&v| v == 0) {
            return Err(Error::InvalidInput("zero vector has no p-adic height".into()));
        }
        if s > 0 && num.iter().all(|&v| v % p == 0) {
            return Err(Error::InvalidInput(
                "non-canonical representation: all numerator entries divisible by p".into(),
            ));
        }
        Ok(Self { p, num, s })
    }

    pub fn p(&self) -> i64 {
        self.p
    }

    /// Exponent e with max-norm ||x||_p = p^e, namely s - min_i v_p(num_i)
    /// over the nonzero entries.
    pub fn height_exponent(&self) -> i64 {
        let min_val = self
            .num
            .iter()
            .filter(|&&v| v != 0)
            .map(|&v| padic_valuation(self.p, v))
            .min()
            .expect("nonzero vector");
        self.s as i64 - min_val
    }
}

pub fn padic_valuation(p: i64, mut v: i64) -> i64 {
    assert!(v != 0);
    v = v.abs();
    let mut e = 0;
    while v % p == 0 {
        v /= p;
        e += 1;
    }
    e
}

/// 2x2 matrix product on points laid out as (x1,x2;x3,x4); the p-adic
/// max-norm is submultiplicative for this shape.
pub fn matrix_mul_points(a: &PAdicPoint, b: &PAdicPoint) -> Result<PAdicPoint> {
    assert_eq!(a.p, b.p);
    let (x, y) = (&a.num, &b.num);
    let raw = [
        x[0] * y[0] + x[1] * y[2],
        x[0] * y[1] + x[1] * y[3],
        x[2] * y[0] + x[3] * y[2],
        x[2] * y[1] + x[3] * y[3],
    ];
    // canonicalize
    let mut s = a.s + b.s;
    let mut num = raw;
    if num.iter().all(|&v| v == 0) {
        return Err(Error::InvalidInput("product is the zero matrix".into()));
    }
    while s > 0 && num.iter().all(|&v| v % a.p == 0) {
        for v in num.iter_mut() {
            *v /= a.p;
        }
        s -= 1;
    }
    PAdicPoint::new(a.p, num, s)
}
