//! The injective hull `E = lim_n R/(x_1^n, ..., x_d^n)` of the residue field,
//! in the level calculus `(r; x_1^n, ..., x_d^n)`.
//!
//! The transition from level `n` to level `m >= n` multiplies the numerator
//! by `(x_1 ... x_d)^{m-n}`. Canonical elements have minimal level; zero has
//! level 0.

use crate::error::{Error, Result};
use crate::field::FieldElem;
use crate::poly::{Monomial, MultiPoly, PolyRing};
use crate::semilinear::SparseVec;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct EElem {
    level: u32,
    num: MultiPoly,
}

impl EElem {
    pub fn level(&self) -> u32 {
        self.level
    }

    pub fn numerator(&self) -> &MultiPoly {
        &self.num
    }

    pub fn is_zero(&self) -> bool {
        self.num.is_zero()
    }
}

/// Arithmetic in `E` over a fixed polynomial ring with `d >= 1`.
#[derive(Debug, Clone)]
pub struct InjectiveHull {
    ring: PolyRing,
}

impl InjectiveHull {
    pub fn new(ring: PolyRing) -> Result<Self> {
        if ring.nvars() == 0 {
            return Err(Error::Invalid("the injective hull needs at least one variable".into()));
        }
        Ok(InjectiveHull { ring })
    }

    pub fn ring(&self) -> &PolyRing {
        &self.ring
    }

    fn truncate(&self, f: &MultiPoly, n: u32) -> MultiPoly {
        MultiPoly { terms: f.terms.iter().filter(|(m, _)| m.0.iter().all(|&e| e < n)).map(|(m, &c)| (m.clone(), c)).collect() }
    }

    pub fn zero(&self) -> EElem {
        EElem { level: 0, num: self.ring.zero() }
    }

    /// `(r; x_1^n, ..., x_d^n)`, normalized.
    pub fn elem(&self, r: &MultiPoly, n: u32) -> EElem {
        self.normalize(EElem { level: n, num: self.truncate(r, n) })
    }

    /// Raw, possibly non-minimal representative (numerator reduced only).
    pub fn raw(&self, r: &MultiPoly, n: u32) -> EElem {
        EElem { level: n, num: self.truncate(r, n) }
    }

    /// The socle element `(lambda; x_1, ..., x_d)`.
    pub fn socle(&self, lambda: FieldElem) -> EElem {
        self.elem(&self.ring.constant(lambda), 1)
    }

    /// Minimal-level representative. While every monomial of the numerator is
    /// divisible by `x_1 ... x_d`, divide and drop one level.
    pub fn normalize(&self, z: EElem) -> EElem {
        let EElem { mut level, num } = z;
        let mut num = self.truncate(&num, level);
        loop {
            if num.is_zero() {
                return self.zero();
            }
            if num.terms.keys().all(|m| m.0.iter().all(|&e| e >= 1)) {
                num = MultiPoly {
                    terms: num.terms.into_iter().map(|(m, c)| (Monomial(m.0.iter().map(|e| e - 1).collect()), c)).collect(),
                };
                level -= 1;
            } else {
                return EElem { level, num };
            }
        }
    }

    pub fn is_canonical(&self, z: &EElem) -> bool {
        self.normalize(z.clone()) == *z
    }

    /// Numerator of `z` transported to level `m >= level(z)`.
    pub fn numerator_at(&self, z: &EElem, m: u32) -> MultiPoly {
        assert!(m >= z.level, "cannot lower the level of an element");
        let shift = Monomial(vec![m - z.level; self.ring.nvars()]);
        self.ring.mul_monomial(&z.num, &shift)
    }

    pub fn add(&self, a: &EElem, b: &EElem) -> EElem {
        let n = a.level.max(b.level);
        let s = self.ring.add(&self.numerator_at(a, n), &self.numerator_at(b, n));
        self.normalize(EElem { level: n, num: s })
    }

    pub fn neg(&self, a: &EElem) -> EElem {
        EElem { level: a.level, num: self.ring.neg(&a.num) }
    }

    pub fn sub(&self, a: &EElem, b: &EElem) -> EElem {
        self.add(a, &self.neg(b))
    }

    pub fn scale(&self, c: FieldElem, a: &EElem) -> EElem {
        self.normalize(EElem { level: a.level, num: self.ring.scale(c, &a.num) })
    }

    /// `f . z`.
    pub fn act(&self, f: &MultiPoly, z: &EElem) -> EElem {
        self.normalize(EElem { level: z.level, num: self.ring.mul(f, &z.num) })
    }

    /// `(r; x^n) -> (r^p; x^{np})`, the p-power of the standard structure.
    pub fn pth_power(&self, z: &EElem) -> EElem {
        let p = self.ring.p();
        self.normalize(EElem { level: z.level * p, num: self.ring.frobenius(&z.num) })
    }

    /// Whether `z` is killed by every variable.
    pub fn in_socle(&self, z: &EElem) -> bool {
        (0..self.ring.nvars()).all(|i| self.act(&self.ring.var(i), z).is_zero())
    }

    /// `F_p` coordinates of `z` viewed at level `n`, labelled `prefix ++ exps ++ [k]`.
    pub fn flatten_at(&self, out: &mut SparseVec, prefix: &[i64], z: &EElem, n: u32) {
        let num = self.numerator_at(z, n);
        self.ring.flatten_into(out, prefix, &num);
    }

    /// `F_p`-basis of the elements of level `<= n`, written at level `n`.
    pub fn fp_basis_up_to(&self, n: u32) -> Vec<EElem> {
        let exps = crate::poly::box_exponents(&vec![n; self.ring.nvars()]);
        self.ring.fp_basis_on(&exps).into_iter().map(|f| EElem { level: n, num: f }).collect()
    }

    pub fn display(&self, z: &EElem) -> String {
        if z.is_zero() {
            return "0".into();
        }
        let dens: Vec<String> = self.ring.names().iter().map(|v| if z.level == 1 { v.clone() } else { format!("{v}^{}", z.level) }).collect();
        format!("({}; {})", self.ring.display(&z.num), dens.join(", "))
    }

    /// Parses `(r; n)` or `(r; x1^n, ..., xd^n)`, or `0`.
    pub fn parse(&self, s: &str) -> Result<EElem> {
        let t = s.trim();
        if t == "0" {
            return Ok(self.zero());
        }
        let inner = t
            .strip_prefix('(')
            .and_then(|x| x.strip_suffix(')'))
            .ok_or(Error::Parse { col: 1, msg: "expected `(numerator; level)`".into() })?;
        let (num, den) = inner.split_once(';').ok_or(Error::Parse { col: 2, msg: "expected `;`".into() })?;
        let col = num.len() + 3;
        let r = self.ring.parse(num).map_err(|e| match e {
            Error::Parse { col, msg } => Error::Parse { col: col + 1, msg },
            e => e,
        })?;
        let den = den.trim();
        let level = if let Ok(n) = den.parse::<u32>() {
            n
        } else {
            let mut levels = Vec::new();
            for (i, part) in den.split(',').enumerate() {
                let part = part.trim();
                let (v, e) = part.split_once('^').unwrap_or((part, "1"));
                if self.ring.names().get(i).map(String::as_str) != Some(v.trim()) {
                    return Err(Error::Parse { col, msg: format!("expected variable {} in the denominator", i + 1) });
                }
                levels.push(e.trim().parse::<u32>().map_err(|_| Error::Parse { col, msg: "bad exponent".into() })?);
            }
            if levels.len() != self.ring.nvars() || levels.iter().any(|&l| l != levels[0]) {
                return Err(Error::Parse { col, msg: "denominator must be x_1^n, ..., x_d^n with a common n".into() });
            }
            levels[0]
        };
        Ok(self.elem(&r, level))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::field::Fq;
    use std::sync::Arc;

    fn hull(p: u32, e: u32, d: usize) -> InjectiveHull {
        InjectiveHull::new(PolyRing::new(Arc::new(Fq::new(p, e).unwrap()), d)).unwrap()
    }

    #[test]
    fn normalize_examples() {
        let e = hull(2, 1, 2);
        let r = e.ring().clone();
        let z = e.elem(&r.parse("x1*x2").unwrap(), 2);
        assert_eq!(z, e.elem(&r.one(), 1));
        assert_eq!(z.level(), 1);
        let z = e.elem(&r.parse("x1^2*(x2 + 1)").unwrap(), 2);
        assert!(z.is_zero());
        let e1 = hull(2, 1, 1);
        let z = e1.elem(&e1.ring().one(), 2);
        assert_eq!(z.level(), 2);
    }

    #[test]
    fn pth_power_examples() {
        let e = hull(2, 1, 1);
        let u = e.socle(FieldElem::ONE);
        let up = e.pth_power(&u);
        assert_eq!(up.level(), 2);
        assert_eq!(up, e.elem(&e.ring().one(), 2));
        assert!(e.pth_power(&e.zero()).is_zero());
        let e4 = hull(2, 2, 2);
        let w = e4.ring().fq().generator();
        let z = e4.socle(w);
        let zp = e4.pth_power(&z);
        assert_eq!(zp, e4.elem(&e4.ring().constant(e4.ring().fq().frobenius(w)), 2));
    }

    #[test]
    fn parse_display() {
        let e = hull(3, 1, 2);
        let z = e.parse("(x1 + 2; x1^3, x2^3)").unwrap();
        assert_eq!(z.level(), 3);
        assert_eq!(e.parse(&e.display(&z)).unwrap(), z);
        assert_eq!(e.parse("(x1 + 2; 3)").unwrap(), z);
        assert!(e.parse("(1; x1^2, x2^3)").is_err());
        assert!(e.in_socle(&e.parse("(2; 1)").unwrap()));
    }
}
