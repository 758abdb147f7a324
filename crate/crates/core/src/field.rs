//! Finite fields `F_{p^e}` with a fixed power basis.
//!
//! Elements are stored as their coordinate vector packed into an integer,
//! `c_0 + c_1 p + ... + c_{e-1} p^{e-1}`, where `c_i` is the coefficient of
//! `w^i` and `w` is the class of the variable modulo the defining polynomial.
//! Multiplication goes through discrete-log tables, Frobenius through a
//! precomputed permutation.

use serde::Serialize;

use crate::error::{Error, Result};

/// Largest field order supported by the table-driven arithmetic.
pub const MAX_ORDER: u32 = 1 << 12;

/// An element of `F_q`, packed. Only meaningful together with its [`Fq`].
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Default, Serialize)]
pub struct FieldElem(pub u32);

impl FieldElem {
    pub const ZERO: FieldElem = FieldElem(0);
    pub const ONE: FieldElem = FieldElem(1);

    pub fn is_zero(self) -> bool {
        self.0 == 0
    }
}

/// The field `F_{p^e}` together with its arithmetic tables.
#[derive(Debug, Clone)]
pub struct Fq {
    p: u32,
    e: u32,
    q: u32,
    /// Monic modulus, coefficients from the constant term up; length `e + 1`.
    modulus: Vec<u32>,
    log: Vec<u32>,
    exp: Vec<u32>,
    frob: Vec<u32>,
    frob_inv: Vec<u32>,
}

impl PartialEq for Fq {
    fn eq(&self, other: &Self) -> bool {
        self.p == other.p && self.e == other.e && self.modulus == other.modulus
    }
}

impl Eq for Fq {}

pub fn is_prime(n: u32) -> bool {
    if n < 2 {
        return false;
    }
    let mut d = 2;
    while d * d <= n {
        if n.is_multiple_of(d) {
            return false;
        }
        d += 1;
    }
    true
}

fn poly_rem(mut a: Vec<u32>, b: &[u32], p: u32) -> Vec<u32> {
    // b monic
    let db = b.len() - 1;
    while a.len() > db {
        let lead = *a.last().unwrap();
        let shift = a.len() - 1 - db;
        if lead != 0 {
            for (i, &bc) in b.iter().enumerate() {
                let idx = shift + i;
                a[idx] = (a[idx] + p * p - (lead * bc) % p) % p;
            }
        }
        a.pop();
    }
    a
}

fn is_irreducible(f: &[u32], p: u32) -> bool {
    let deg = f.len() - 1;
    if deg <= 1 {
        return deg == 1;
    }
    // trial division by every monic polynomial of degree 1..=deg/2
    for d in 1..=deg / 2 {
        let count = p.pow(d as u32);
        for code in 0..count {
            let mut g = Vec::with_capacity(d + 1);
            let mut c = code;
            for _ in 0..d {
                g.push(c % p);
                c /= p;
            }
            g.push(1);
            if poly_rem(f.to_vec(), &g, p).iter().all(|&x| x == 0) {
                return false;
            }
        }
    }
    true
}

impl Fq {
    /// Builds `F_{p^e}` from the lexicographically smallest monic irreducible
    /// polynomial of degree `e` (coefficients read as base-`p` digits,
    /// constant term least significant).
    pub fn new(p: u32, e: u32) -> Result<Fq> {
        if !is_prime(p) {
            return Err(Error::Field(format!("{p} is not prime")));
        }
        if e == 0 {
            return Err(Error::Field("extension degree must be at least 1".into()));
        }
        let q = p
            .checked_pow(e)
            .filter(|&q| q <= MAX_ORDER)
            .ok_or_else(|| Error::Field(format!("F_{p}^{e} exceeds the supported order {MAX_ORDER}")))?;
        let count = q;
        for code in 0..count {
            let mut f = Vec::with_capacity(e as usize + 1);
            let mut c = code;
            for _ in 0..e {
                f.push(c % p);
                c /= p;
            }
            f.push(1);
            if is_irreducible(&f, p) {
                return Fq::with_modulus(p, f);
            }
        }
        unreachable!("an irreducible polynomial of every degree exists")
    }

    /// Builds `F_p[w]/(modulus)`; the modulus must be monic and irreducible.
    pub fn with_modulus(p: u32, modulus: Vec<u32>) -> Result<Fq> {
        if !is_prime(p) {
            return Err(Error::Field(format!("{p} is not prime")));
        }
        if modulus.len() < 2 || *modulus.last().unwrap() != 1 {
            return Err(Error::Field("modulus must be monic of degree >= 1".into()));
        }
        if modulus.iter().any(|&c| c >= p) {
            return Err(Error::Field("modulus coefficients must be reduced mod p".into()));
        }
        if !is_irreducible(&modulus, p) {
            return Err(Error::Field("modulus is reducible".into()));
        }
        let e = (modulus.len() - 1) as u32;
        let q = p
            .checked_pow(e)
            .filter(|&q| q <= MAX_ORDER)
            .ok_or_else(|| Error::Field("field order too large".into()))?;
        let mut fq = Fq { p, e, q, modulus, log: vec![], exp: vec![], frob: vec![], frob_inv: vec![] };
        fq.build_tables();
        Ok(fq)
    }

    fn digits(&self, a: u32) -> Vec<u32> {
        let mut v = Vec::with_capacity(self.e as usize);
        let mut c = a;
        for _ in 0..self.e {
            v.push(c % self.p);
            c /= self.p;
        }
        v
    }

    fn pack(&self, d: &[u32]) -> u32 {
        d.iter().rev().fold(0, |acc, &c| acc * self.p + c)
    }

    fn slow_mul(&self, a: u32, b: u32) -> u32 {
        let da = self.digits(a);
        let db = self.digits(b);
        let mut prod = vec![0u32; da.len() + db.len()];
        for (i, &x) in da.iter().enumerate() {
            for (j, &y) in db.iter().enumerate() {
                prod[i + j] = (prod[i + j] + x * y) % self.p;
            }
        }
        let r = poly_rem(prod, &self.modulus, self.p);
        let mut d = r;
        d.resize(self.e as usize, 0);
        self.pack(&d)
    }

    fn build_tables(&mut self) {
        let q = self.q;
        let order = q - 1;
        // find a primitive element
        let mut gen = 0;
        'search: for cand in 1..q {
            let mut x = 1;
            for k in 1..=order {
                x = self.slow_mul(x, cand);
                if x == 1 {
                    if k == order {
                        gen = cand;
                        break 'search;
                    }
                    break;
                }
            }
        }
        debug_assert!(gen != 0 || q == 2);
        if q == 2 {
            gen = 1;
        }
        let mut exp = vec![0u32; 2 * order as usize];
        let mut log = vec![0u32; q as usize];
        let mut x = 1;
        for k in 0..order {
            exp[k as usize] = x;
            log[x as usize] = k;
            x = self.slow_mul(x, gen);
        }
        for k in order..2 * order {
            exp[k as usize] = exp[(k - order) as usize];
        }
        self.exp = exp;
        self.log = log;
        let mut frob = vec![0u32; q as usize];
        let mut frob_inv = vec![0u32; q as usize];
        for a in 0..q {
            let ap = self.pow(FieldElem(a), self.p as u64).0;
            frob[a as usize] = ap;
            frob_inv[ap as usize] = a;
        }
        self.frob = frob;
        self.frob_inv = frob_inv;
    }

    pub fn p(&self) -> u32 {
        self.p
    }

    pub fn e(&self) -> u32 {
        self.e
    }

    pub fn q(&self) -> u32 {
        self.q
    }

    pub fn modulus(&self) -> &[u32] {
        &self.modulus
    }

    /// Validates a packed element against this field.
    pub fn check(&self, a: FieldElem) -> Result<FieldElem> {
        if a.0 < self.q {
            Ok(a)
        } else {
            Err(Error::FieldMismatch { q: self.q })
        }
    }

    /// Element from its coordinates in the power basis.
    pub fn from_coords(&self, coords: &[u32]) -> Result<FieldElem> {
        if coords.len() != self.e as usize {
            return Err(Error::Dimension { expected: self.e as usize, got: coords.len() });
        }
        if coords.iter().any(|&c| c >= self.p) {
            return Err(Error::FieldMismatch { q: self.q });
        }
        Ok(FieldElem(self.pack(coords)))
    }

    pub fn coords(&self, a: FieldElem) -> Vec<u32> {
        self.digits(a.0)
    }

    pub fn from_int(&self, n: i64) -> FieldElem {
        FieldElem(n.rem_euclid(self.p as i64) as u32)
    }

    /// The power-basis generator `w`. In a prime field this is the root of
    /// the degree-one modulus.
    pub fn generator(&self) -> FieldElem {
        if self.e == 1 {
            FieldElem((self.p - self.modulus[0]) % self.p)
        } else {
            FieldElem(self.p)
        }
    }

    pub fn elements(&self) -> impl Iterator<Item = FieldElem> {
        (0..self.q).map(FieldElem)
    }

    /// The F_p-basis `1, w, ..., w^{e-1}`.
    pub fn fp_basis(&self) -> Vec<FieldElem> {
        (0..self.e).map(|i| FieldElem(self.p.pow(i))).collect()
    }

    pub fn add(&self, a: FieldElem, b: FieldElem) -> FieldElem {
        if self.p == 2 {
            return FieldElem(a.0 ^ b.0);
        }
        if self.e == 1 {
            return FieldElem((a.0 + b.0) % self.p);
        }
        let (mut x, mut y) = (a.0, b.0);
        let mut out = 0;
        let mut place = 1;
        while x > 0 || y > 0 {
            out += ((x % self.p + y % self.p) % self.p) * place;
            x /= self.p;
            y /= self.p;
            place *= self.p;
        }
        FieldElem(out)
    }

    pub fn neg(&self, a: FieldElem) -> FieldElem {
        if self.p == 2 {
            return a;
        }
        let mut x = a.0;
        let mut out = 0;
        let mut place = 1;
        while x > 0 {
            out += ((self.p - x % self.p) % self.p) * place;
            x /= self.p;
            place *= self.p;
        }
        FieldElem(out)
    }

    pub fn sub(&self, a: FieldElem, b: FieldElem) -> FieldElem {
        self.add(a, self.neg(b))
    }

    pub fn mul(&self, a: FieldElem, b: FieldElem) -> FieldElem {
        if a.0 == 0 || b.0 == 0 {
            return FieldElem::ZERO;
        }
        let k = self.log[a.0 as usize] + self.log[b.0 as usize];
        FieldElem(self.exp[k as usize])
    }

    /// Multiplication by an integer (element of the prime field).
    pub fn scale(&self, c: u32, a: FieldElem) -> FieldElem {
        self.mul(self.from_int(c as i64), a)
    }

    pub fn inv(&self, a: FieldElem) -> Option<FieldElem> {
        if a.0 == 0 {
            return None;
        }
        let order = self.q - 1;
        let k = (order - self.log[a.0 as usize]) % order;
        Some(FieldElem(self.exp[k as usize]))
    }

    pub fn pow(&self, a: FieldElem, n: u64) -> FieldElem {
        if n == 0 {
            return FieldElem::ONE;
        }
        if a.0 == 0 {
            return FieldElem::ZERO;
        }
        let order = (self.q - 1) as u64;
        if self.log.is_empty() {
            // tables under construction
            let mut r = 1;
            let mut base = a.0;
            let mut m = n;
            while m > 0 {
                if m & 1 == 1 {
                    r = self.slow_mul(r, base);
                }
                base = self.slow_mul(base, base);
                m >>= 1;
            }
            return FieldElem(r);
        }
        let k = (self.log[a.0 as usize] as u64 * (n % order)) % order;
        FieldElem(self.exp[k as usize])
    }

    /// The absolute Frobenius `a -> a^p`.
    pub fn frobenius(&self, a: FieldElem) -> FieldElem {
        FieldElem(self.frob[a.0 as usize])
    }

    /// Checked Frobenius: rejects elements outside this field.
    pub fn frobenius_checked(&self, a: FieldElem) -> Result<FieldElem> {
        self.check(a).map(|a| self.frobenius(a))
    }

    /// The unique `b` with `b^p = a`.
    pub fn frobenius_inv(&self, a: FieldElem) -> FieldElem {
        FieldElem(self.frob_inv[a.0 as usize])
    }

    /// `a^{p^k}`, with negative `k` meaning the inverse power.
    pub fn frobenius_pow(&self, a: FieldElem, k: i64) -> FieldElem {
        let k = k.rem_euclid(self.e as i64);
        (0..k).fold(a, |x, _| self.frobenius(x))
    }

    pub fn is_prime_field_elem(&self, a: FieldElem) -> bool {
        a.0 < self.p
    }

    /// Human-readable form in the power basis, e.g. `w + 1`.
    pub fn display(&self, a: FieldElem) -> String {
        if a.0 == 0 {
            return "0".into();
        }
        let d = self.digits(a.0);
        let mut parts = Vec::new();
        for (i, &c) in d.iter().enumerate().rev() {
            if c == 0 {
                continue;
            }
            let mon = match i {
                0 => String::new(),
                1 => "w".to_string(),
                _ => format!("w^{i}"),
            };
            parts.push(match (c, mon.is_empty()) {
                (_, true) => c.to_string(),
                (1, false) => mon,
                (_, false) => format!("{c}*{mon}"),
            });
        }
        parts.join(" + ")
    }

    /// Whether a packed element needs parentheses when used as a coefficient.
    pub fn is_compound(&self, a: FieldElem) -> bool {
        self.digits(a.0).iter().filter(|&&c| c != 0).count() > 1
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn frobenius_on_small_fields() {
        let f2 = Fq::new(2, 1).unwrap();
        assert_eq!(f2.frobenius(FieldElem::ONE), FieldElem::ONE);
        let f3 = Fq::new(3, 1).unwrap();
        assert_eq!(f3.frobenius(FieldElem(2)), FieldElem(2));
        let f4 = Fq::new(2, 2).unwrap();
        assert_eq!(f4.modulus(), &[1, 1, 1]);
        let w = f4.generator();
        assert_eq!(f4.frobenius(w), f4.add(w, FieldElem::ONE));
    }

    #[test]
    fn frobenius_has_order_e() {
        for (p, e) in [(2, 3), (3, 2), (5, 2), (2, 4), (3, 3)] {
            let f = Fq::new(p, e).unwrap();
            for a in f.elements() {
                assert_eq!(f.frobenius_pow(a, e as i64), a);
                assert_eq!(f.frobenius(f.frobenius_inv(a)), a);
            }
            let fixed = f.elements().filter(|&a| f.frobenius(a) == a).count();
            assert_eq!(fixed as u32, p);
        }
    }

    #[test]
    fn conway_style_moduli() {
        assert_eq!(Fq::new(2, 3).unwrap().modulus(), &[1, 1, 0, 1]);
        assert_eq!(Fq::new(3, 2).unwrap().modulus(), &[1, 0, 1]);
        assert!(Fq::with_modulus(2, vec![1, 0, 1]).is_err());
        assert!(Fq::new(4, 1).is_err());
        assert!(Fq::new(2, 0).is_err());
    }

    #[test]
    fn inverse_and_mismatch() {
        let f = Fq::new(3, 2).unwrap();
        for a in f.elements().skip(1) {
            assert_eq!(f.mul(a, f.inv(a).unwrap()), FieldElem::ONE);
        }
        assert!(f.frobenius_checked(FieldElem(9)).is_err());
        assert_eq!(f.from_coords(&[1, 2]).unwrap(), FieldElem(7));
        assert_eq!(f.coords(FieldElem(7)), vec![1, 2]);
    }
}
