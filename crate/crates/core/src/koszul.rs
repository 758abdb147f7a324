//! Koszul complexes of homogeneous sequences, with graded-piece homology.

use crate::error::{Error, Result};
use crate::poly::{exponents_up_to_degree, MultiPoly, PolyRing};
use crate::semilinear::{sparse_rank, SparseVec};

/// Matrix with polynomial entries, acting on column vectors.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PolyMat {
    pub rows: usize,
    pub cols: usize,
    pub entries: Vec<MultiPoly>,
}

impl PolyMat {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        PolyMat { rows, cols, entries: vec![MultiPoly::default(); rows * cols] }
    }

    pub fn get(&self, i: usize, j: usize) -> &MultiPoly {
        &self.entries[i * self.cols + j]
    }

    pub fn set(&mut self, i: usize, j: usize, f: MultiPoly) {
        self.entries[i * self.cols + j] = f;
    }

    pub fn apply(&self, ring: &PolyRing, v: &[MultiPoly]) -> Vec<MultiPoly> {
        (0..self.rows)
            .map(|i| {
                let mut acc = ring.zero();
                for (j, vj) in v.iter().enumerate() {
                    if !vj.is_zero() && !self.get(i, j).is_zero() {
                        acc = ring.add(&acc, &ring.mul(self.get(i, j), vj));
                    }
                }
                acc
            })
            .collect()
    }

    pub fn mul(&self, ring: &PolyRing, other: &PolyMat) -> PolyMat {
        let mut out = PolyMat::zeros(self.rows, other.cols);
        for j in 0..other.cols {
            let col: Vec<MultiPoly> = (0..other.rows).map(|k| other.get(k, j).clone()).collect();
            for (i, f) in self.apply(ring, &col).into_iter().enumerate() {
                out.set(i, j, f);
            }
        }
        out
    }

    pub fn is_zero(&self) -> bool {
        self.entries.iter().all(MultiPoly::is_zero)
    }

    pub fn display(&self, ring: &PolyRing) -> Vec<Vec<String>> {
        (0..self.rows).map(|i| (0..self.cols).map(|j| ring.display(self.get(i, j))).collect()).collect()
    }
}

/// `K_i = wedge^i R^k` with basis the `i`-subsets of `{0..k}` in lex order and
/// `d(e_S) = sum_j (-1)^j f_{s_j} e_{S \ s_j}`.
#[derive(Debug, Clone)]
pub struct KoszulComplex {
    ring: PolyRing,
    gens: Vec<MultiPoly>,
    subsets: Vec<Vec<Vec<usize>>>,
    /// `diffs[i-1]` is `d_i: K_i -> K_{i-1}`.
    diffs: Vec<PolyMat>,
}

fn subsets_of_size(k: usize, i: usize) -> Vec<Vec<usize>> {
    fn rec(start: usize, k: usize, left: usize, cur: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
        if left == 0 {
            out.push(cur.clone());
            return;
        }
        for s in start..k {
            cur.push(s);
            rec(s + 1, k, left - 1, cur, out);
            cur.pop();
        }
    }
    let mut out = Vec::new();
    rec(0, k, i, &mut Vec::new(), &mut out);
    out
}

pub fn is_homogeneous(f: &MultiPoly) -> bool {
    let mut degs = f.terms.keys().map(|m| m.degree());
    match degs.next() {
        Some(d) => degs.all(|e| e == d),
        None => true,
    }
}

impl KoszulComplex {
    /// Builds the complex after checking the sequence is regular.
    pub fn new(ring: PolyRing, gens: Vec<MultiPoly>) -> Result<Self> {
        let kc = Self::unchecked(ring, gens)?;
        kc.check_regular()?;
        Ok(kc)
    }

    /// Builds the complex without the regularity check.
    pub fn unchecked(ring: PolyRing, gens: Vec<MultiPoly>) -> Result<Self> {
        for (i, f) in gens.iter().enumerate() {
            if f.is_zero() || !is_homogeneous(f) {
                return Err(Error::NotRegular(format!("generator {} must be a nonzero homogeneous polynomial", i + 1)));
            }
            if f.degree() == Some(0) {
                return Err(Error::NotRegular(format!("generator {} is a unit", i + 1)));
            }
        }
        let k = gens.len();
        let subsets: Vec<Vec<Vec<usize>>> = (0..=k).map(|i| subsets_of_size(k, i)).collect();
        let mut diffs = Vec::new();
        for i in 1..=k {
            let src = &subsets[i];
            let dst = &subsets[i - 1];
            let mut m = PolyMat::zeros(dst.len(), src.len());
            for (c, s) in src.iter().enumerate() {
                for (j, &sj) in s.iter().enumerate() {
                    let rest: Vec<usize> = s.iter().copied().filter(|&x| x != sj).collect();
                    let r = dst.iter().position(|t| *t == rest).unwrap();
                    let f = if j % 2 == 0 { gens[sj].clone() } else { ring.neg(&gens[sj]) };
                    m.set(r, c, f);
                }
            }
            diffs.push(m);
        }
        Ok(KoszulComplex { ring, gens, subsets, diffs })
    }

    pub fn ring(&self) -> &PolyRing {
        &self.ring
    }

    pub fn gens(&self) -> &[MultiPoly] {
        &self.gens
    }

    pub fn length(&self) -> usize {
        self.gens.len()
    }

    pub fn rank(&self, i: usize) -> usize {
        self.subsets.get(i).map_or(0, Vec::len)
    }

    pub fn basis(&self, i: usize) -> &[Vec<usize>] {
        &self.subsets[i]
    }

    /// `d_i: K_i -> K_{i-1}` for `1 <= i <= k`.
    pub fn differential(&self, i: usize) -> &PolyMat {
        &self.diffs[i - 1]
    }

    pub fn check_d_squared(&self) -> bool {
        (2..=self.length()).all(|i| self.differential(i - 1).mul(&self.ring, self.differential(i)).is_zero())
    }

    fn gen_degrees(&self) -> Vec<u32> {
        self.gens.iter().map(|f| f.degree().unwrap()).collect()
    }

    /// Degree-`deg` piece of `K_i`, as an `F_p`-spanning set of vectors.
    fn graded_basis(&self, i: usize, deg: u32) -> Vec<Vec<MultiPoly>> {
        let degs = self.gen_degrees();
        let n = self.ring.nvars();
        let mut out = Vec::new();
        for (pos, s) in self.subsets[i].iter().enumerate() {
            let ds: u32 = s.iter().map(|&j| degs[j]).sum();
            if ds > deg {
                continue;
            }
            let mons: Vec<Vec<u32>> =
                exponents_up_to_degree(n, deg - ds).into_iter().filter(|m| m.iter().sum::<u32>() == deg - ds).collect();
            for f in self.ring.fp_basis_on(&mons) {
                let mut v = vec![self.ring.zero(); self.rank(i)];
                v[pos] = f;
                out.push(v);
            }
        }
        out
    }

    fn flatten_vec(&self, v: &[MultiPoly]) -> SparseVec {
        let mut s = SparseVec::new();
        for (j, f) in v.iter().enumerate() {
            self.ring.flatten_into(&mut s, &[j as i64], f);
        }
        s
    }

    /// `F_p`-dimensions of `H_i(K)` in internal degree `deg`, for `i = 0..=k`.
    pub fn homology_in_degree(&self, deg: u32) -> Vec<usize> {
        let p = self.ring.p();
        let k = self.length();
        let mut ranks = vec![0usize; k + 2];
        let mut dims = vec![0usize; k + 1];
        for i in 0..=k {
            let basis = self.graded_basis(i, deg);
            dims[i] = basis.len();
            if i >= 1 {
                let imgs: Vec<SparseVec> =
                    basis.iter().map(|v| self.flatten_vec(&self.differential(i).apply(&self.ring, v))).collect();
                ranks[i] = sparse_rank(p, &imgs);
            }
        }
        (0..=k).map(|i| dims[i] - ranks[i] - ranks[i + 1]).collect()
    }

    /// Dimension count: `dim (R/(f))_D` must match the coefficients of
    /// `prod (1 - t^{deg f_i}) / (1 - t)^d` for `D` up to `sum deg f_i + 1`.
    pub fn check_regular(&self) -> Result<()> {
        let e = self.ring.fq().e() as usize;
        let degs = self.gen_degrees();
        let n = self.ring.nvars();
        let top: u32 = degs.iter().sum::<u32>() + 1;
        // Hilbert series coefficients
        let mut num = vec![0i64; top as usize + 1];
        num[0] = 1;
        for &d in &degs {
            let mut next = num.clone();
            for t in (d as usize)..=top as usize {
                next[t] -= num[t - d as usize];
            }
            num = next;
        }
        let binom = |a: u64, b: u64| -> i64 {
            let mut r = 1i64;
            for i in 0..b {
                r = r * (a - i) as i64 / (i + 1) as i64;
            }
            r
        };
        for deg in 0..=top {
            let expected: i64 = (0..=deg as usize)
                .map(|t| {
                    let rest = deg as u64 - t as u64;
                    let hr = if n == 0 { i64::from(rest == 0) } else { binom(rest + n as u64 - 1, n as u64 - 1) };
                    num[t] * hr
                })
                .sum();
            let h0 = self.homology_in_degree(deg)[0] / e;
            if h0 as i64 != expected {
                return Err(Error::NotRegular(format!(
                    "dim (R/(f))_{deg} = {h0}, a regular sequence would give {expected}"
                )));
            }
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::field::Fq;
    use std::sync::Arc;

    fn ring(p: u32, d: usize) -> PolyRing {
        PolyRing::new(Arc::new(Fq::new(p, 1).unwrap()), d)
    }

    #[test]
    fn length_one() {
        let r = ring(2, 1);
        let k = KoszulComplex::new(r.clone(), vec![r.var(0)]).unwrap();
        assert_eq!(k.rank(0), 1);
        assert_eq!(k.rank(1), 1);
        assert_eq!(k.differential(1).get(0, 0), &r.var(0));
    }

    #[test]
    fn length_two_signs_and_d_squared() {
        let r = ring(3, 2);
        let k = KoszulComplex::new(r.clone(), vec![r.var(0), r.var(1)]).unwrap();
        assert_eq!((k.rank(0), k.rank(1), k.rank(2)), (1, 2, 1));
        let d2 = k.differential(2);
        assert_eq!(d2.get(0, 0), &r.neg(&r.var(1)));
        assert_eq!(d2.get(1, 0), &r.var(0));
        assert!(k.check_d_squared());
    }

    #[test]
    fn acyclic_in_positive_degrees() {
        for d in 1..=2 {
            let r = ring(2, d);
            let gens = (0..d).map(|i| r.var(i)).collect();
            let k = KoszulComplex::new(r, gens).unwrap();
            for deg in 0..=4 {
                let h = k.homology_in_degree(deg);
                assert!(h[1..].iter().all(|&x| x == 0), "deg {deg}: {h:?}");
                assert_eq!(h[0], usize::from(deg == 0));
            }
        }
    }

    #[test]
    fn non_regular_rejected() {
        let r = ring(2, 2);
        let x = r.var(0);
        let xy = r.mul(&r.var(0), &r.var(1));
        assert!(matches!(KoszulComplex::new(r.clone(), vec![x.clone(), xy]), Err(Error::NotRegular(_))));
        assert!(KoszulComplex::new(r.clone(), vec![x.clone(), x]).is_err());
        let sq = r.parse("x1^2").unwrap();
        assert!(KoszulComplex::new(r.clone(), vec![sq, r.var(1)]).is_ok());
    }
}
