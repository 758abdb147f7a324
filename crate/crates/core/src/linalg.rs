//! Dense linear algebra over a prime field `F_p`.
//!
//! Everything semilinear in the crate is flattened to an [`FpMatrix`] and
//! solved here. Row reduction always produces the reduced row echelon form
//! with leftmost pivots, so results are deterministic and the packed `p = 2`
//! path agrees bit for bit with the generic one.

use serde::Serialize;

use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FpMatrix {
    p: u32,
    rows: usize,
    cols: usize,
    data: Vec<u32>,
}

/// Reduced row echelon form together with its pivot columns.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Rref {
    pub matrix: FpMatrix,
    pub pivots: Vec<usize>,
}

/// Outcome of [`FpMatrix::solve`].
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub enum Solve {
    Sat(Vec<u32>),
    /// A functional `y` with `y A = 0` and `y . b = 1`.
    Unsat { certificate: Vec<u32> },
}

impl Solve {
    pub fn is_sat(&self) -> bool {
        matches!(self, Solve::Sat(_))
    }
}

pub(crate) fn inv_mod(a: u32, p: u32) -> u32 {
    debug_assert!(!a.is_multiple_of(p));
    let mut r = 1u64;
    let mut b = a as u64 % p as u64;
    let mut n = p - 2;
    while n > 0 {
        if n & 1 == 1 {
            r = r * b % p as u64;
        }
        b = b * b % p as u64;
        n >>= 1;
    }
    r as u32
}

pub fn dot(p: u32, a: &[u32], b: &[u32]) -> u32 {
    (a.iter().zip(b).map(|(&x, &y)| x as u64 * y as u64).sum::<u64>() % p as u64) as u32
}

impl FpMatrix {
    pub fn zeros(p: u32, rows: usize, cols: usize) -> Self {
        FpMatrix { p, rows, cols, data: vec![0; rows * cols] }
    }

    pub fn identity(p: u32, n: usize) -> Self {
        let mut m = Self::zeros(p, n, n);
        for i in 0..n {
            m.set(i, i, 1);
        }
        m
    }

    pub fn from_rows(p: u32, cols: usize, rows: &[Vec<u32>]) -> Self {
        let mut m = Self::zeros(p, rows.len(), cols);
        for (i, r) in rows.iter().enumerate() {
            assert_eq!(r.len(), cols);
            for (j, &v) in r.iter().enumerate() {
                m.set(i, j, v % p);
            }
        }
        m
    }

    pub fn from_columns(p: u32, rows: usize, columns: &[Vec<u32>]) -> Self {
        let mut m = Self::zeros(p, rows, columns.len());
        for (j, c) in columns.iter().enumerate() {
            assert_eq!(c.len(), rows);
            for (i, &v) in c.iter().enumerate() {
                m.set(i, j, v % p);
            }
        }
        m
    }

    pub fn p(&self) -> u32 {
        self.p
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> u32 {
        self.data[i * self.cols + j]
    }

    #[inline]
    pub fn set(&mut self, i: usize, j: usize, v: u32) {
        self.data[i * self.cols + j] = v;
    }

    pub fn row(&self, i: usize) -> &[u32] {
        &self.data[i * self.cols..(i + 1) * self.cols]
    }

    pub fn column(&self, j: usize) -> Vec<u32> {
        (0..self.rows).map(|i| self.get(i, j)).collect()
    }

    pub fn is_zero(&self) -> bool {
        self.data.iter().all(|&v| v == 0)
    }

    pub fn transpose(&self) -> FpMatrix {
        let mut t = FpMatrix::zeros(self.p, self.cols, self.rows);
        for i in 0..self.rows {
            for j in 0..self.cols {
                t.set(j, i, self.get(i, j));
            }
        }
        t
    }

    pub fn mul_vec(&self, x: &[u32]) -> Result<Vec<u32>> {
        if x.len() != self.cols {
            return Err(Error::Dimension { expected: self.cols, got: x.len() });
        }
        Ok((0..self.rows).map(|i| dot(self.p, self.row(i), x)).collect())
    }

    pub fn mul(&self, other: &FpMatrix) -> Result<FpMatrix> {
        if self.cols != other.rows {
            return Err(Error::Dimension { expected: self.cols, got: other.rows });
        }
        let p = self.p as u64;
        let mut out = FpMatrix::zeros(self.p, self.rows, other.cols);
        for i in 0..self.rows {
            let mut acc = vec![0u64; other.cols];
            for k in 0..self.cols {
                let a = self.get(i, k) as u64;
                if a == 0 {
                    continue;
                }
                for (j, slot) in acc.iter_mut().enumerate() {
                    *slot += a * other.get(k, j) as u64;
                }
                if k % 1024 == 1023 {
                    acc.iter_mut().for_each(|s| *s %= p);
                }
            }
            for (j, s) in acc.into_iter().enumerate() {
                out.set(i, j, (s % p) as u32);
            }
        }
        Ok(out)
    }

    /// Horizontal concatenation `[self | other]`.
    pub fn hcat(&self, other: &FpMatrix) -> Result<FpMatrix> {
        if self.rows != other.rows {
            return Err(Error::Dimension { expected: self.rows, got: other.rows });
        }
        let mut m = FpMatrix::zeros(self.p, self.rows, self.cols + other.cols);
        for i in 0..self.rows {
            for j in 0..self.cols {
                m.set(i, j, self.get(i, j));
            }
            for j in 0..other.cols {
                m.set(i, self.cols + j, other.get(i, j));
            }
        }
        Ok(m)
    }

    /// Reduced row echelon form; dispatches to the packed path for `p = 2`.
    pub fn rref(&self) -> Rref {
        if self.p == 2 {
            self.rref_gf2()
        } else {
            self.rref_generic()
        }
    }

    /// Generic elimination, valid for every prime including 2.
    pub fn rref_generic(&self) -> Rref {
        let p = self.p as u64;
        let mut m = self.clone();
        let mut pivots = Vec::new();
        let mut r = 0;
        for c in 0..m.cols {
            if r == m.rows {
                break;
            }
            let Some(piv) = (r..m.rows).find(|&i| m.get(i, c) != 0) else { continue };
            if piv != r {
                for j in 0..m.cols {
                    m.data.swap(piv * m.cols + j, r * m.cols + j);
                }
            }
            let inv = inv_mod(m.get(r, c), self.p) as u64;
            for j in c..m.cols {
                let v = m.get(r, j) as u64 * inv % p;
                m.set(r, j, v as u32);
            }
            for i in 0..m.rows {
                if i == r {
                    continue;
                }
                let f = m.get(i, c) as u64;
                if f == 0 {
                    continue;
                }
                for j in c..m.cols {
                    let v = (m.get(i, j) as u64 + (p - f) * m.get(r, j) as u64) % p;
                    m.set(i, j, v as u32);
                }
            }
            pivots.push(c);
            r += 1;
        }
        Rref { matrix: m, pivots }
    }

    /// Bit-packed elimination over `F_2`.
    pub fn rref_gf2(&self) -> Rref {
        assert_eq!(self.p, 2);
        let words = self.cols.div_ceil(64).max(1);
        let mut rows: Vec<Vec<u64>> = (0..self.rows)
            .map(|i| {
                let mut w = vec![0u64; words];
                for j in 0..self.cols {
                    if self.get(i, j) & 1 == 1 {
                        w[j / 64] |= 1 << (j % 64);
                    }
                }
                w
            })
            .collect();
        let mut pivots = Vec::new();
        let mut r = 0;
        for c in 0..self.cols {
            if r == rows.len() {
                break;
            }
            let (wi, bit) = (c / 64, 1u64 << (c % 64));
            let Some(piv) = (r..rows.len()).find(|&i| rows[i][wi] & bit != 0) else { continue };
            rows.swap(piv, r);
            let pivot_row = rows[r].clone();
            for (i, row) in rows.iter_mut().enumerate() {
                if i != r && row[wi] & bit != 0 {
                    for (a, b) in row.iter_mut().zip(&pivot_row).skip(wi) {
                        *a ^= b;
                    }
                }
            }
            pivots.push(c);
            r += 1;
        }
        let mut m = FpMatrix::zeros(2, self.rows, self.cols);
        for (i, row) in rows.iter().enumerate() {
            for j in 0..self.cols {
                if row[j / 64] >> (j % 64) & 1 == 1 {
                    m.set(i, j, 1);
                }
            }
        }
        Rref { matrix: m, pivots }
    }

    pub fn rank(&self) -> usize {
        self.rref().pivots.len()
    }

    /// Basis of the null space, one vector per free column (free entry 1).
    pub fn kernel_basis(&self) -> Vec<Vec<u32>> {
        let Rref { matrix, pivots } = self.rref();
        let p = self.p;
        let mut is_pivot = vec![false; self.cols];
        for &c in &pivots {
            is_pivot[c] = true;
        }
        let mut basis = Vec::new();
        for free in (0..self.cols).filter(|&c| !is_pivot[c]) {
            let mut v = vec![0u32; self.cols];
            v[free] = 1;
            for (r, &pc) in pivots.iter().enumerate() {
                let a = matrix.get(r, free);
                v[pc] = (p - a) % p;
            }
            basis.push(v);
        }
        basis
    }

    /// Columns of `self` at the pivot positions: a basis of the column space.
    pub fn image_basis(&self) -> Vec<Vec<u32>> {
        self.rref().pivots.iter().map(|&c| self.column(c)).collect()
    }

    /// Finds some `x` with `self x = b`, or a cokernel certificate.
    pub fn solve(&self, b: &[u32]) -> Result<Solve> {
        if b.len() != self.rows {
            return Err(Error::Dimension { expected: self.rows, got: b.len() });
        }
        let aug = self.hcat(&FpMatrix::from_columns(self.p, self.rows, &[b.to_vec()]))?;
        let Rref { matrix, pivots } = aug.rref();
        if pivots.last() == Some(&self.cols) {
            let p = self.p;
            let y = self
                .transpose()
                .kernel_basis()
                .into_iter()
                .find(|y| dot(p, y, b) != 0)
                .expect("inconsistent system has a separating functional");
            let s = inv_mod(dot(p, &y, b), p) as u64;
            let certificate = y.iter().map(|&v| (v as u64 * s % p as u64) as u32).collect();
            return Ok(Solve::Unsat { certificate });
        }
        let mut x = vec![0u32; self.cols];
        for (r, &pc) in pivots.iter().enumerate() {
            x[pc] = matrix.get(r, self.cols);
        }
        Ok(Solve::Sat(x))
    }
}

/// Rank of the span of `vecs` inside `F_p^dim`.
pub fn span_rank(p: u32, dim: usize, vecs: &[Vec<u32>]) -> usize {
    if vecs.is_empty() {
        return 0;
    }
    FpMatrix::from_columns(p, dim, vecs).rank()
}

/// `dim(ambient) - dim(image)` for spanning sets of subspaces of `F_p^dim`,
/// after checking `image` lies inside `ambient`.
pub fn subquotient_dim(p: u32, dim: usize, image: &[Vec<u32>], ambient: &[Vec<u32>]) -> Result<usize> {
    for v in image.iter().chain(ambient) {
        if v.len() != dim {
            return Err(Error::Dimension { expected: dim, got: v.len() });
        }
    }
    let ra = span_rank(p, dim, ambient);
    let both: Vec<Vec<u32>> = ambient.iter().chain(image).cloned().collect();
    if span_rank(p, dim, &both) != ra {
        return Err(Error::NotContained);
    }
    Ok(ra - span_rank(p, dim, image))
}

/// Matrix of `x -> x^p - x` on an `F_p`-space of dimension `dim`, given the
/// p-power map on coordinate vectors. Additivity is checked on all pairs of
/// basis vectors and on `F_p`-multiples of each basis vector.
pub fn artin_schreier_map(p: u32, dim: usize, pth_power: impl Fn(&[u32]) -> Vec<u32>) -> Result<FpMatrix> {
    let unit = |i: usize| {
        let mut v = vec![0u32; dim];
        v[i] = 1;
        v
    };
    let images: Vec<Vec<u32>> = (0..dim).map(|i| pth_power(&unit(i))).collect();
    for img in &images {
        if img.len() != dim {
            return Err(Error::Dimension { expected: dim, got: img.len() });
        }
    }
    if pth_power(&vec![0; dim]).iter().any(|&c| c != 0) {
        return Err(Error::Structural("p-power map does not fix 0".into()));
    }
    for i in 0..dim {
        for j in i + 1..dim {
            let mut s = unit(i);
            s[j] = 1;
            let lhs = pth_power(&s);
            let rhs: Vec<u32> = images[i].iter().zip(&images[j]).map(|(a, b)| (a + b) % p).collect();
            if lhs != rhs {
                return Err(Error::Structural(format!("p-power map is not additive on basis pair ({i}, {j})")));
            }
        }
        for c in 2..p {
            let mut s = vec![0u32; dim];
            s[i] = c;
            let rhs: Vec<u32> = images[i].iter().map(|&a| a * c % p).collect();
            if pth_power(&s) != rhs {
                return Err(Error::Structural(format!("p-power map is not F_p-homogeneous on basis vector {i}")));
            }
        }
    }
    let cols: Vec<Vec<u32>> = images
        .into_iter()
        .enumerate()
        .map(|(i, mut img)| {
            img[i] = (img[i] + p - 1) % p;
            img
        })
        .collect();
    Ok(FpMatrix::from_columns(p, dim, &cols))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn identity_solve() {
        let id = FpMatrix::identity(2, 3);
        assert_eq!(id.solve(&[1, 0, 1]).unwrap(), Solve::Sat(vec![1, 0, 1]));
    }

    #[test]
    fn unsat_certificate_separates() {
        // x -> 0 on F_2, b = 1
        let zero = FpMatrix::zeros(2, 1, 1);
        match zero.solve(&[1]).unwrap() {
            Solve::Unsat { certificate } => assert_eq!(certificate, vec![1]),
            s => panic!("{s:?}"),
        }
        let a = FpMatrix::from_rows(3, 2, &[vec![1, 2], vec![2, 1]]);
        let b = [1, 1];
        match a.solve(&b).unwrap() {
            Solve::Unsat { certificate } => {
                assert_eq!(dot(3, &certificate, &b), 1);
                let ya = a.transpose().mul_vec(&certificate).unwrap();
                assert!(ya.iter().all(|&v| v == 0));
            }
            s => panic!("{s:?}"),
        }
    }

    #[test]
    fn dimension_errors() {
        let a = FpMatrix::identity(2, 2);
        assert!(a.solve(&[1]).is_err());
        assert_eq!(subquotient_dim(2, 2, &[vec![1, 0]], &[vec![0, 1]]), Err(Error::NotContained));
    }

    #[test]
    fn subquotient_examples() {
        assert_eq!(subquotient_dim(2, 2, &[vec![1, 0], vec![0, 1]], &[vec![1, 0], vec![0, 1]]).unwrap(), 0);
        assert_eq!(subquotient_dim(2, 1, &[vec![0]], &[vec![1]]).unwrap(), 1);
    }

    #[test]
    fn kernel_rank_nullity() {
        let a = FpMatrix::from_rows(5, 4, &[vec![1, 2, 3, 4], vec![2, 4, 1, 3], vec![3, 1, 4, 2]]);
        let k = a.kernel_basis();
        assert_eq!(a.rank() + k.len(), 4);
        for v in k {
            assert!(a.mul_vec(&v).unwrap().iter().all(|&x| x == 0));
        }
    }
}
