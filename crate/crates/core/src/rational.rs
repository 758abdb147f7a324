//! Univariate polynomials over `F_q` and bounded spaces of rational functions
//! `P(t) + Q(t)/D(t)^N` with `deg P <= B` and `deg Q < N deg D`.

use std::sync::Arc;

use crate::error::{Error, Result};
use crate::field::{FieldElem, Fq};
use crate::linalg::FpMatrix;
use crate::semilinear::{columns_to_matrix, Flattener, SparseVec};

/// Dense univariate polynomial, coefficients from degree 0 upwards, no
/// trailing zeros.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct UPoly(pub Vec<FieldElem>);

impl UPoly {
    pub fn zero() -> Self {
        UPoly(Vec::new())
    }

    pub fn constant(c: FieldElem) -> Self {
        Self::trimmed(vec![c])
    }

    /// `t - a`.
    pub fn linear(fq: &Fq, a: FieldElem) -> Self {
        UPoly(vec![fq.neg(a), FieldElem::ONE])
    }

    pub fn trimmed(mut c: Vec<FieldElem>) -> Self {
        while c.last() == Some(&FieldElem::ZERO) {
            c.pop();
        }
        UPoly(c)
    }

    pub fn is_zero(&self) -> bool {
        self.0.is_empty()
    }

    pub fn degree(&self) -> Option<usize> {
        self.0.len().checked_sub(1)
    }

    pub fn coeff(&self, i: usize) -> FieldElem {
        self.0.get(i).copied().unwrap_or(FieldElem::ZERO)
    }

    pub fn lead(&self) -> FieldElem {
        self.0.last().copied().unwrap_or(FieldElem::ZERO)
    }

    pub fn add(&self, fq: &Fq, o: &UPoly) -> UPoly {
        let n = self.0.len().max(o.0.len());
        Self::trimmed((0..n).map(|i| fq.add(self.coeff(i), o.coeff(i))).collect())
    }

    pub fn neg(&self, fq: &Fq) -> UPoly {
        UPoly(self.0.iter().map(|&c| fq.neg(c)).collect())
    }

    pub fn sub(&self, fq: &Fq, o: &UPoly) -> UPoly {
        self.add(fq, &o.neg(fq))
    }

    pub fn scale(&self, fq: &Fq, c: FieldElem) -> UPoly {
        Self::trimmed(self.0.iter().map(|&a| fq.mul(a, c)).collect())
    }

    pub fn mul(&self, fq: &Fq, o: &UPoly) -> UPoly {
        if self.is_zero() || o.is_zero() {
            return UPoly::zero();
        }
        let mut out = vec![FieldElem::ZERO; self.0.len() + o.0.len() - 1];
        for (i, &a) in self.0.iter().enumerate() {
            for (j, &b) in o.0.iter().enumerate() {
                out[i + j] = fq.add(out[i + j], fq.mul(a, b));
            }
        }
        Self::trimmed(out)
    }

    pub fn pow(&self, fq: &Fq, n: u32) -> UPoly {
        (0..n).fold(UPoly::constant(FieldElem::ONE), |acc, _| acc.mul(fq, self))
    }

    /// `f^p`: Frobenius on coefficients, exponents times `p`.
    pub fn frobenius(&self, fq: &Fq) -> UPoly {
        let p = fq.p() as usize;
        let mut out = vec![FieldElem::ZERO; self.0.len().saturating_sub(1) * p + 1];
        for (i, &c) in self.0.iter().enumerate() {
            out[i * p] = fq.frobenius(c);
        }
        Self::trimmed(out)
    }

    pub fn derivative(&self, fq: &Fq) -> UPoly {
        Self::trimmed(self.0.iter().enumerate().skip(1).map(|(i, &c)| fq.mul(fq.from_int(i as i64), c)).collect())
    }

    pub fn divrem(&self, fq: &Fq, d: &UPoly) -> Result<(UPoly, UPoly)> {
        let dd = d.degree().ok_or_else(|| Error::Invalid("division by the zero polynomial".into()))?;
        let inv = fq.inv(d.lead()).ok_or_else(|| Error::Invalid("zero leading coefficient".into()))?;
        let mut r = self.0.clone();
        let mut q = vec![FieldElem::ZERO; self.0.len().saturating_sub(dd).max(1)];
        while r.len() > dd && !r.is_empty() {
            let k = r.len() - 1 - dd;
            let c = fq.mul(*r.last().unwrap(), inv);
            q[k] = c;
            for (i, &di) in d.0.iter().enumerate() {
                r[k + i] = fq.sub(r[k + i], fq.mul(c, di));
            }
            while r.last() == Some(&FieldElem::ZERO) {
                r.pop();
            }
        }
        Ok((Self::trimmed(q), Self::trimmed(r)))
    }

    pub fn divides(&self, fq: &Fq, f: &UPoly) -> Result<bool> {
        Ok(f.divrem(fq, self)?.1.is_zero())
    }

    /// Monic gcd.
    pub fn gcd(fq: &Fq, a: &UPoly, b: &UPoly) -> UPoly {
        let (mut a, mut b) = (a.clone(), b.clone());
        while !b.is_zero() {
            let r = a.divrem(fq, &b).expect("nonzero divisor").1;
            a = b;
            b = r;
        }
        if a.is_zero() {
            return a;
        }
        let inv = fq.inv(a.lead()).expect("nonzero leading coefficient");
        a.scale(fq, inv)
    }

    pub fn is_squarefree(&self, fq: &Fq) -> bool {
        !self.is_zero() && UPoly::gcd(fq, self, &self.derivative(fq)).degree() == Some(0)
    }

    /// All monic polynomials of the given degree.
    pub fn monics_of_degree(fq: &Fq, deg: usize) -> Vec<UPoly> {
        let mut out = vec![Vec::new()];
        for _ in 0..deg {
            out = out.into_iter().flat_map(|c: Vec<FieldElem>| fq.elements().map(move |a| [c.clone(), vec![a]].concat())).collect();
        }
        out.into_iter()
            .map(|mut c| {
                c.push(FieldElem::ONE);
                UPoly(c)
            })
            .collect()
    }

    pub fn display(&self, fq: &Fq, var: &str) -> String {
        if self.is_zero() {
            return "0".into();
        }
        let mut parts = Vec::new();
        for (i, &c) in self.0.iter().enumerate().rev() {
            if c == FieldElem::ZERO {
                continue;
            }
            let mon = match i {
                0 => String::new(),
                1 => var.to_string(),
                _ => format!("{var}^{i}"),
            };
            let coef = fq.display(c);
            let coef = if fq.is_compound(c) { format!("({coef})") } else { coef };
            parts.push(match (mon.is_empty(), c == FieldElem::ONE) {
                (true, _) => coef,
                (false, true) => mon,
                (false, false) => format!("{coef}*{mon}"),
            });
        }
        parts.join(" + ")
    }
}

/// Element `P + Q / D^N` of a [`BoundedRationalSpace`].
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RatElem {
    pub poly: UPoly,
    pub num: UPoly,
}

/// The `F_q`-space `{ P + Q/D^N : deg P <= B, deg Q < N deg D }`. It equals the
/// span of `t^i` (`i <= B`) and `t^i / D^j` (`i < j deg D`, `1 <= j <= N`).
#[derive(Debug, Clone)]
pub struct BoundedRationalSpace {
    fq: Arc<Fq>,
    den: UPoly,
    n: u32,
    b: u32,
}

impl BoundedRationalSpace {
    pub fn new(fq: Arc<Fq>, den: UPoly, n: u32, b: u32) -> Result<Self> {
        if den.degree().unwrap_or(0) == 0 || den.lead() != FieldElem::ONE {
            return Err(Error::Invalid("denominator must be monic of positive degree".into()));
        }
        if !den.is_squarefree(&fq) {
            return Err(Error::NotSquarefree);
        }
        Ok(BoundedRationalSpace { fq, den, n, b })
    }

    pub fn fq(&self) -> &Fq {
        &self.fq
    }

    pub fn denominator(&self) -> &UPoly {
        &self.den
    }

    pub fn pole_bound(&self) -> u32 {
        self.n
    }

    pub fn degree_bound(&self) -> u32 {
        self.b
    }

    fn num_len(&self) -> usize {
        self.n as usize * self.den.degree().unwrap()
    }

    /// `F_q`-dimension.
    pub fn dim(&self) -> usize {
        self.b as usize + 1 + self.num_len()
    }

    /// The space with parameters `(pB, pN)` that receives `z^p - z`.
    pub fn target(&self) -> BoundedRationalSpace {
        let p = self.fq.p();
        BoundedRationalSpace { fq: self.fq.clone(), den: self.den.clone(), n: self.n * p, b: self.b * p }
    }

    pub fn contains(&self, z: &RatElem) -> bool {
        z.poly.degree().is_none_or(|d| d <= self.b as usize) && z.num.degree().is_none_or(|d| d < self.num_len())
    }

    /// Normalizes `f / D^j` with `j <= N` into the space (polynomial part split off).
    pub fn from_fraction(&self, f: &UPoly, j: u32) -> Result<RatElem> {
        if j > self.n {
            return Err(Error::Bound(format!("pole order {j} exceeds {}", self.n)));
        }
        let fq = &*self.fq;
        let lifted = f.mul(fq, &self.den.pow(fq, self.n - j));
        let dn = self.den.pow(fq, self.n);
        let (q, r) = lifted.divrem(fq, &dn)?;
        let z = RatElem { poly: q, num: r };
        if !self.contains(&z) {
            return Err(Error::Bound("polynomial part exceeds the degree bound".into()));
        }
        Ok(z)
    }

    /// `(numerator, denominator)` with denominator `D^N`.
    pub fn as_fraction(&self, z: &RatElem) -> (UPoly, UPoly) {
        let fq = &*self.fq;
        let dn = self.den.pow(fq, self.n);
        (z.poly.mul(fq, &dn).add(fq, &z.num), dn)
    }

    /// `F_q`-basis `t^i` then `t^i / D^N`.
    pub fn basis(&self) -> Vec<RatElem> {
        let mono = |i: usize| {
            let mut c = vec![FieldElem::ZERO; i + 1];
            c[i] = FieldElem::ONE;
            UPoly(c)
        };
        let mut out: Vec<RatElem> = (0..=self.b as usize).map(|i| RatElem { poly: mono(i), num: UPoly::zero() }).collect();
        out.extend((0..self.num_len()).map(|i| RatElem { poly: UPoly::zero(), num: mono(i) }));
        out
    }

    pub fn fp_basis(&self) -> Vec<RatElem> {
        let fq = &*self.fq;
        self.basis()
            .into_iter()
            .flat_map(|z| {
                fq.fp_basis().into_iter().map(move |c| RatElem { poly: z.poly.scale(fq, c), num: z.num.scale(fq, c) })
            })
            .collect()
    }

    pub fn flatten(&self, z: &RatElem) -> SparseVec {
        let mut v = SparseVec::new();
        for (i, &c) in z.poly.0.iter().enumerate() {
            v.push_field(&self.fq, &[0, i as i64], c);
        }
        for (i, &c) in z.num.0.iter().enumerate() {
            v.push_field(&self.fq, &[1, i as i64], c);
        }
        v
    }

    pub fn add(&self, a: &RatElem, b: &RatElem) -> RatElem {
        RatElem { poly: a.poly.add(&self.fq, &b.poly), num: a.num.add(&self.fq, &b.num) }
    }

    /// `z^p - z`, as an element of [`Self::target`]:
    /// `P^p - P + (Q^p - Q D^{(p-1)N}) / D^{pN}`.
    pub fn wp(&self, z: &RatElem) -> RatElem {
        let fq = &*self.fq;
        let p = fq.p();
        let poly = z.poly.frobenius(fq).sub(fq, &z.poly);
        let num = z.num.frobenius(fq).sub(fq, &z.num.mul(fq, &self.den.pow(fq, (p - 1) * self.n)));
        RatElem { poly, num }
    }

    /// Matrix of `z -> z^p - z` on the flattened `F_p`-basis, with the row
    /// index of the target space.
    pub fn wp_matrix(&self) -> (FpMatrix, Flattener) {
        let cols: Vec<SparseVec> = self.fp_basis().iter().map(|z| self.target().flatten(&self.wp(z))).collect();
        columns_to_matrix(self.fq.p(), &cols, &[])
    }

    pub fn display(&self, z: &RatElem) -> String {
        let fq = &*self.fq;
        let mut parts = Vec::new();
        if !z.poly.is_zero() {
            parts.push(z.poly.display(fq, "t"));
        }
        if !z.num.is_zero() {
            parts.push(format!("({}) / ({})^{}", z.num.display(fq, "t"), self.den.display(fq, "t"), self.n));
        }
        if parts.is_empty() {
            "0".into()
        } else {
            parts.join(" + ")
        }
    }
}
