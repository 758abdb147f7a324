//! Finite-dimensional modules over `F_q[x_1, ..., x_d]`: monomial quotients
//! `R/(x_1^{a_1}, ..., x_d^{a_d})` and general modules given by commuting
//! variable-action matrices.

use crate::error::{Error, Result};
use crate::field::{FieldElem, Fq};
use crate::poly::{box_exponents, Monomial, MultiPoly, PolyRing};
use crate::semilinear::SparseVec;

/// Dense matrix over `F_q`, row-major.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FqMat {
    pub rows: usize,
    pub cols: usize,
    pub data: Vec<FieldElem>,
}

impl FqMat {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        FqMat { rows, cols, data: vec![FieldElem::ZERO; rows * cols] }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n, n);
        for i in 0..n {
            m.set(i, i, FieldElem::ONE);
        }
        m
    }

    pub fn get(&self, i: usize, j: usize) -> FieldElem {
        self.data[i * self.cols + j]
    }

    pub fn set(&mut self, i: usize, j: usize, v: FieldElem) {
        self.data[i * self.cols + j] = v;
    }

    pub fn from_columns(rows: usize, cols: &[Vec<FieldElem>]) -> Self {
        let mut m = Self::zeros(rows, cols.len());
        for (j, c) in cols.iter().enumerate() {
            for (i, &v) in c.iter().enumerate() {
                m.set(i, j, v);
            }
        }
        m
    }

    pub fn column(&self, j: usize) -> Vec<FieldElem> {
        (0..self.rows).map(|i| self.get(i, j)).collect()
    }

    pub fn mul_vec(&self, fq: &Fq, v: &[FieldElem]) -> Vec<FieldElem> {
        (0..self.rows)
            .map(|i| (0..self.cols).fold(FieldElem::ZERO, |acc, j| fq.add(acc, fq.mul(self.get(i, j), v[j]))))
            .collect()
    }

    pub fn mul(&self, fq: &Fq, other: &FqMat) -> FqMat {
        let cols: Vec<Vec<FieldElem>> = (0..other.cols).map(|j| self.mul_vec(fq, &other.column(j))).collect();
        FqMat::from_columns(self.rows, &cols)
    }

    pub fn is_zero(&self) -> bool {
        self.data.iter().all(|v| v.is_zero())
    }
}

pub fn vec_add(fq: &Fq, a: &[FieldElem], b: &[FieldElem]) -> Vec<FieldElem> {
    a.iter().zip(b).map(|(&x, &y)| fq.add(x, y)).collect()
}

pub fn vec_sub(fq: &Fq, a: &[FieldElem], b: &[FieldElem]) -> Vec<FieldElem> {
    a.iter().zip(b).map(|(&x, &y)| fq.sub(x, y)).collect()
}

pub fn vec_scale(fq: &Fq, c: FieldElem, a: &[FieldElem]) -> Vec<FieldElem> {
    a.iter().map(|&x| fq.mul(c, x)).collect()
}

pub fn vec_is_zero(a: &[FieldElem]) -> bool {
    a.iter().all(|x| x.is_zero())
}

/// `R/(x_1^{a_1}, ..., x_d^{a_d})` with its monomial basis.
#[derive(Debug, Clone)]
pub struct ArtinianAlgebra {
    ring: PolyRing,
    exps: Vec<u32>,
    basis: Vec<Vec<u32>>,
}

impl ArtinianAlgebra {
    pub fn new(ring: PolyRing, exps: Vec<u32>) -> Result<Self> {
        if exps.len() != ring.nvars() {
            return Err(Error::Dimension { expected: ring.nvars(), got: exps.len() });
        }
        if exps.contains(&0) {
            return Err(Error::Invalid("Artinian exponents must be >= 1".into()));
        }
        let basis = box_exponents(&exps);
        Ok(ArtinianAlgebra { ring, exps, basis })
    }

    pub fn ring(&self) -> &PolyRing {
        &self.ring
    }

    pub fn exps(&self) -> &[u32] {
        &self.exps
    }

    pub fn dim(&self) -> usize {
        self.basis.len()
    }

    pub fn basis(&self) -> &[Vec<u32>] {
        &self.basis
    }

    /// Position of a basis monomial, or `None` if it vanishes in the quotient.
    pub fn index_of(&self, m: &[u32]) -> Option<usize> {
        let mut idx = 0;
        for (&e, &a) in m.iter().zip(&self.exps) {
            if e >= a {
                return None;
            }
            idx = idx * a as usize + e as usize;
        }
        Some(idx)
    }

    pub fn reduce(&self, f: &MultiPoly) -> Vec<FieldElem> {
        let fq = self.ring.fq();
        let mut v = vec![FieldElem::ZERO; self.dim()];
        for (m, &c) in &f.terms {
            if let Some(i) = self.index_of(&m.0) {
                v[i] = fq.add(v[i], c);
            }
        }
        v
    }

    pub fn to_poly(&self, v: &[FieldElem]) -> MultiPoly {
        let mut f = self.ring.zero();
        for (i, &c) in v.iter().enumerate() {
            if !c.is_zero() {
                f.terms.insert(Monomial(self.basis[i].clone()), c);
            }
        }
        f
    }

    pub fn mul(&self, a: &[FieldElem], b: &[FieldElem]) -> Vec<FieldElem> {
        self.reduce(&self.ring.mul(&self.to_poly(a), &self.to_poly(b)))
    }

    pub fn action_matrix(&self, var: usize) -> FqMat {
        let x = self.ring.var(var);
        let cols: Vec<Vec<FieldElem>> =
            self.basis.iter().map(|m| self.reduce(&self.ring.mul(&x, &self.ring.monomial(m)))).collect();
        FqMat::from_columns(self.dim(), &cols)
    }

    /// The algebra as a module over itself.
    pub fn regular_module(&self) -> FinModule {
        let actions = (0..self.ring.nvars()).map(|i| self.action_matrix(i)).collect();
        FinModule { ring: self.ring.clone(), dim: self.dim(), actions }
    }
}

/// A finite-dimensional `F_q`-space with commuting actions of the variables.
#[derive(Debug, Clone)]
pub struct FinModule {
    ring: PolyRing,
    dim: usize,
    actions: Vec<FqMat>,
}

impl FinModule {
    pub fn new(ring: PolyRing, dim: usize, actions: Vec<FqMat>) -> Result<Self> {
        if actions.len() != ring.nvars() {
            return Err(Error::Dimension { expected: ring.nvars(), got: actions.len() });
        }
        if actions.iter().any(|a| a.rows != dim || a.cols != dim) {
            return Err(Error::Invalid("action matrices must be square of the module dimension".into()));
        }
        let m = FinModule { ring, dim, actions };
        let fq = m.ring.fq();
        for i in 0..m.actions.len() {
            for j in i + 1..m.actions.len() {
                if m.actions[i].mul(fq, &m.actions[j]) != m.actions[j].mul(fq, &m.actions[i]) {
                    return Err(Error::Structural(format!("actions of variables {i} and {j} do not commute")));
                }
            }
        }
        Ok(m)
    }

    pub fn zero(ring: PolyRing) -> Self {
        let d = ring.nvars();
        FinModule { ring, dim: 0, actions: vec![FqMat::zeros(0, 0); d] }
    }

    pub fn ring(&self) -> &PolyRing {
        &self.ring
    }

    pub fn fq(&self) -> &Fq {
        self.ring.fq()
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    /// Dimension over the prime field.
    pub fn fp_dim(&self) -> usize {
        self.dim * self.fq().e() as usize
    }

    pub fn actions(&self) -> &[FqMat] {
        &self.actions
    }

    pub fn zero_elem(&self) -> Vec<FieldElem> {
        vec![FieldElem::ZERO; self.dim]
    }

    pub fn unit(&self, i: usize) -> Vec<FieldElem> {
        let mut v = self.zero_elem();
        v[i] = FieldElem::ONE;
        v
    }

    pub fn act_var(&self, i: usize, v: &[FieldElem]) -> Vec<FieldElem> {
        self.actions[i].mul_vec(self.fq(), v)
    }

    pub fn act_monomial(&self, m: &[u32], v: &[FieldElem]) -> Vec<FieldElem> {
        let mut out = v.to_vec();
        for (i, &e) in m.iter().enumerate() {
            for _ in 0..e {
                if vec_is_zero(&out) {
                    return out;
                }
                out = self.act_var(i, &out);
            }
        }
        out
    }

    /// `f . v`.
    pub fn act(&self, f: &MultiPoly, v: &[FieldElem]) -> Vec<FieldElem> {
        let fq = self.fq();
        let mut acc = self.zero_elem();
        for (m, &c) in &f.terms {
            let mv = self.act_monomial(&m.0, v);
            acc = vec_add(fq, &acc, &vec_scale(fq, c, &mv));
        }
        acc
    }

    pub fn flatten_into(&self, out: &mut SparseVec, prefix: &[i64], v: &[FieldElem]) {
        let mut key = prefix.to_vec();
        key.push(0);
        for (i, &c) in v.iter().enumerate() {
            *key.last_mut().unwrap() = i as i64;
            out.push_field(self.fq(), &key, c);
        }
    }

    /// `F_p`-basis `w^k e_i`.
    pub fn fp_basis(&self) -> Vec<Vec<FieldElem>> {
        let fq = self.fq();
        let mut out = Vec::new();
        for i in 0..self.dim {
            for c in fq.fp_basis() {
                let mut v = self.zero_elem();
                v[i] = c;
                out.push(v);
            }
        }
        out
    }

    /// Element from dense `F_p` coordinates in the order of [`Self::fp_basis`].
    pub fn from_fp(&self, coords: &[u32]) -> Vec<FieldElem> {
        let fq = self.fq();
        coords.chunks(fq.e() as usize).map(|c| fq.from_coords(c).expect("valid coordinates")).collect()
    }

    pub fn to_fp(&self, v: &[FieldElem]) -> Vec<u32> {
        v.iter().flat_map(|&a| self.fq().coords(a)).collect()
    }

    pub fn direct_sum(&self, other: &FinModule) -> FinModule {
        let n = self.dim + other.dim;
        let actions = self
            .actions
            .iter()
            .zip(&other.actions)
            .map(|(a, b)| {
                let mut m = FqMat::zeros(n, n);
                for i in 0..a.rows {
                    for j in 0..a.cols {
                        m.set(i, j, a.get(i, j));
                    }
                }
                for i in 0..b.rows {
                    for j in 0..b.cols {
                        m.set(self.dim + i, self.dim + j, b.get(i, j));
                    }
                }
                m
            })
            .collect();
        FinModule { ring: self.ring.clone(), dim: n, actions }
    }

    /// Checks every action is nilpotent (the module is supported at the origin).
    pub fn is_nilpotent(&self) -> bool {
        self.actions.iter().all(|a| {
            let mut m = a.clone();
            for _ in 0..self.dim {
                m = m.mul(self.fq(), a);
            }
            self.dim == 0 || m.is_zero()
        })
    }
}
