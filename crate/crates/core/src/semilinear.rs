//! Weil restriction of `F_q`-valued data to sparse `F_p`-coordinate vectors,
//! and the bookkeeping that turns lists of such vectors into [`FpMatrix`]
//! columns with a shared row index.

use std::collections::{BTreeMap, HashMap};

use crate::error::Result;
use crate::field::{FieldElem, Fq};
use crate::linalg::{artin_schreier_map, FpMatrix, Solve};

/// Coordinate label: a structural prefix (component, index, exponent vector)
/// followed by the position in the `F_p`-basis of `F_q`.
pub type Key = Vec<i64>;

/// Sparse `F_p`-vector with labelled coordinates. Zero entries are never stored.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct SparseVec(pub BTreeMap<Key, u32>);

impl SparseVec {
    pub fn new() -> Self {
        SparseVec(BTreeMap::new())
    }

    pub fn add_entry(&mut self, p: u32, key: Key, v: u32) {
        let v = v % p;
        if v == 0 {
            return;
        }
        let slot = self.0.entry(key.clone()).or_insert(0);
        *slot = (*slot + v) % p;
        if *slot == 0 {
            self.0.remove(&key);
        }
    }

    /// Appends the Weil restriction of `a`, labelled `prefix ++ [k]`.
    pub fn push_field(&mut self, fq: &Fq, prefix: &[i64], a: FieldElem) {
        for (k, c) in fq.coords(a).into_iter().enumerate() {
            if c != 0 {
                let mut key = prefix.to_vec();
                key.push(k as i64);
                self.add_entry(fq.p(), key, c);
            }
        }
    }

    pub fn add(&mut self, p: u32, other: &SparseVec) {
        for (k, &v) in &other.0 {
            self.add_entry(p, k.clone(), v);
        }
    }

    pub fn is_zero(&self) -> bool {
        self.0.is_empty()
    }
}

/// Assigns dense row numbers to coordinate labels on first sight.
#[derive(Debug, Clone, Default)]
pub struct Flattener {
    index: HashMap<Key, usize>,
    keys: Vec<Key>,
}

impl Flattener {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn register(&mut self, v: &SparseVec) {
        for k in v.0.keys() {
            if !self.index.contains_key(k) {
                self.index.insert(k.clone(), self.keys.len());
                self.keys.push(k.clone());
            }
        }
    }

    pub fn len(&self) -> usize {
        self.keys.len()
    }

    pub fn is_empty(&self) -> bool {
        self.keys.is_empty()
    }

    pub fn keys(&self) -> &[Key] {
        &self.keys
    }

    pub fn position(&self, k: &Key) -> Option<usize> {
        self.index.get(k).copied()
    }

    /// Dense vector; every label of `v` must already be registered.
    pub fn dense(&self, v: &SparseVec) -> Vec<u32> {
        let mut out = vec![0u32; self.keys.len()];
        for (k, &c) in &v.0 {
            out[self.index[k]] = c;
        }
        out
    }

    pub fn sparse(&self, dense: &[u32]) -> SparseVec {
        SparseVec(
            dense
                .iter()
                .enumerate()
                .filter(|(_, &c)| c != 0)
                .map(|(i, &c)| (self.keys[i].clone(), c))
                .collect(),
        )
    }
}

/// Matrix whose columns are the given sparse vectors, plus the row index.
pub fn columns_to_matrix(p: u32, columns: &[SparseVec], extra: &[&SparseVec]) -> (FpMatrix, Flattener) {
    let mut fl = Flattener::new();
    for c in columns {
        fl.register(c);
    }
    for e in extra {
        fl.register(e);
    }
    let dense: Vec<Vec<u32>> = columns.iter().map(|c| fl.dense(c)).collect();
    let m = if dense.is_empty() { FpMatrix::zeros(p, fl.len(), 0) } else { FpMatrix::from_columns(p, fl.len(), &dense) };
    (m, fl)
}

/// Solves `sum_i x_i columns[i] = target` over `F_p`.
pub fn solve_columns(p: u32, columns: &[SparseVec], target: &SparseVec) -> Result<(Solve, Flattener)> {
    let (m, fl) = columns_to_matrix(p, columns, &[target]);
    let b = fl.dense(target);
    Ok((m.solve(&b)?, fl))
}

/// Rank of the span of sparse vectors.
pub fn sparse_rank(p: u32, vecs: &[SparseVec]) -> usize {
    if vecs.is_empty() {
        return 0;
    }
    columns_to_matrix(p, vecs, &[]).0.rank()
}

/// Dimension of `span(vecs) ∩ T`, where `T` is the coordinate subspace of
/// labels satisfying `inside`.
pub fn span_meet_coordinate_subspace(p: u32, vecs: &[SparseVec], inside: impl Fn(&Key) -> bool) -> usize {
    let total = sparse_rank(p, vecs);
    let projected: Vec<SparseVec> =
        vecs.iter().map(|v| SparseVec(v.0.iter().filter(|(k, _)| !inside(k)).map(|(k, &c)| (k.clone(), c)).collect())).collect();
    total - sparse_rank(p, &projected)
}

/// Coordinates of `a` in the `F_p`-basis `1, w, ..., w^{e-1}`.
pub fn weil_restrict(fq: &Fq, v: &[FieldElem]) -> Vec<u32> {
    v.iter().flat_map(|&a| fq.coords(a)).collect()
}

pub fn weil_lift(fq: &Fq, coords: &[u32]) -> Vec<FieldElem> {
    coords.chunks(fq.e() as usize).map(|c| fq.from_coords(c).expect("valid coordinates")).collect()
}

/// The Artin-Schreier map `a -> a^p - a` on `F_q`, as an `F_p`-matrix of size `e x e`.
pub fn field_artin_schreier(fq: &Fq) -> Result<FpMatrix> {
    let e = fq.e() as usize;
    artin_schreier_map(fq.p(), e, |c| {
        let a = fq.from_coords(c).expect("coordinate vector of the right length");
        fq.coords(fq.frobenius(a))
    })
}

/// Number of classes in `F_q / {a^p - a}`, i.e. `p^{dim coker}`.
pub fn field_as_class_count(fq: &Fq) -> Result<u64> {
    let m = field_artin_schreier(fq)?;
    let coker = fq.e() as usize - m.rank();
    Ok((fq.p() as u64).pow(coker as u32))
}
