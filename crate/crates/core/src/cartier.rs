//! Cartier structures `phi(r^p m) = r phi(m)` on finite-dimensional modules,
//! the twisted structure on monomial complete intersections, the adjoint
//! `tau: M -> F^! M` and its unitalization.

use rand::Rng;

use crate::artinian::{vec_add, vec_is_zero, vec_sub, ArtinianAlgebra, FinModule, FqMat};
use crate::error::{Error, Result};
use crate::field::{FieldElem, Fq};
use crate::poly::{box_exponents, MultiPoly, PolyRing};
use crate::semilinear::{columns_to_matrix, SparseVec};

/// Applies `sigma^k` (coefficientwise Frobenius power) to a vector.
pub fn vec_frob(fq: &Fq, v: &[FieldElem], k: i64) -> Vec<FieldElem> {
    v.iter().map(|&a| fq.frobenius_pow(a, k)).collect()
}

pub fn mat_frob(fq: &Fq, m: &FqMat, k: i64) -> FqMat {
    FqMat { rows: m.rows, cols: m.cols, data: vec_frob(fq, &m.data, k) }
}

/// A finite-dimensional module with a `p^{-1}`-linear structure map, stored as
/// an `F_q`-matrix `A` with `phi(v) = A sigma^{-1}(v)`.
#[derive(Debug, Clone)]
pub struct CartierModule {
    module: FinModule,
    phi: FqMat,
}

impl CartierModule {
    /// Checks the twist condition before accepting `phi`.
    pub fn new(module: FinModule, phi: FqMat) -> Result<Self> {
        let cm = Self::unchecked(module, phi)?;
        cm.check_twist()?;
        Ok(cm)
    }

    pub fn unchecked(module: FinModule, phi: FqMat) -> Result<Self> {
        let n = module.dim();
        if phi.rows != n || phi.cols != n {
            return Err(Error::Dimension { expected: n, got: phi.rows.max(phi.cols) });
        }
        Ok(CartierModule { module, phi })
    }

    /// The zero structure map.
    pub fn trivial(module: FinModule) -> Self {
        let n = module.dim();
        CartierModule { module, phi: FqMat::zeros(n, n) }
    }

    pub fn zero(ring: PolyRing) -> Self {
        Self::trivial(FinModule::zero(ring))
    }

    pub fn module(&self) -> &FinModule {
        &self.module
    }

    pub fn ring(&self) -> &PolyRing {
        self.module.ring()
    }

    pub fn fq(&self) -> &Fq {
        self.module.fq()
    }

    pub fn dim(&self) -> usize {
        self.module.dim()
    }

    pub fn phi_matrix(&self) -> &FqMat {
        &self.phi
    }

    pub fn is_trivial(&self) -> bool {
        self.phi.is_zero()
    }

    pub fn apply(&self, v: &[FieldElem]) -> Vec<FieldElem> {
        self.phi.mul_vec(self.fq(), &vec_frob(self.fq(), v, -1))
    }

    pub fn apply_pow(&self, v: &[FieldElem], k: u32) -> Vec<FieldElem> {
        (0..k).fold(v.to_vec(), |acc, _| self.apply(&acc))
    }

    /// `phi(x_i^p e_k) = x_i phi(e_k)` for every variable and basis vector, and
    /// `phi(c^p e_k) = c phi(e_k)` for `c` in the `F_p`-basis of `F_q`.
    pub fn check_twist(&self) -> Result<()> {
        let fq = self.fq();
        let p = fq.p();
        let m = &self.module;
        for k in 0..m.dim() {
            let ek = m.unit(k);
            let phik = self.apply(&ek);
            for i in 0..m.ring().nvars() {
                let mut xp = ek.clone();
                for _ in 0..p {
                    xp = m.act_var(i, &xp);
                }
                if self.apply(&xp) != m.act_var(i, &phik) {
                    return Err(Error::Structural(format!(
                        "phi(x{}^p e{k}) differs from x{} phi(e{k})",
                        i + 1,
                        i + 1
                    )));
                }
            }
            for c in fq.fp_basis() {
                let lhs = self.apply(&ek.iter().map(|&a| fq.mul(fq.frobenius(c), a)).collect::<Vec<_>>());
                let rhs: Vec<FieldElem> = phik.iter().map(|&a| fq.mul(c, a)).collect();
                if lhs != rhs {
                    return Err(Error::Structural(format!("phi is not p^-1-linear on e{k}")));
                }
            }
        }
        Ok(())
    }

    pub fn direct_sum(&self, other: &CartierModule) -> CartierModule {
        let n = self.dim();
        let m = other.dim();
        let mut phi = FqMat::zeros(n + m, n + m);
        for i in 0..n {
            for j in 0..n {
                phi.set(i, j, self.phi.get(i, j));
            }
        }
        for i in 0..m {
            for j in 0..m {
                phi.set(n + i, n + j, other.phi.get(i, j));
            }
        }
        CartierModule { module: self.module.direct_sum(&other.module), phi }
    }

    /// `F_p`-basis of all structure matrices satisfying the twist condition.
    pub fn structure_space(module: &FinModule) -> Vec<FqMat> {
        let fq = module.fq();
        let p = fq.p();
        let n = module.dim();
        let d = module.ring().nvars();
        // sigma^{-1}(X_i^p)
        let xps: Vec<FqMat> = module
            .actions()
            .iter()
            .map(|x| {
                let mut m = FqMat::identity(n);
                for _ in 0..p {
                    m = m.mul(fq, x);
                }
                mat_frob(fq, &m, -1)
            })
            .collect();
        let mut unknowns = Vec::new();
        let mut cols = Vec::new();
        for r in 0..n {
            for s in 0..n {
                for c in fq.fp_basis() {
                    let mut a = FqMat::zeros(n, n);
                    a.set(r, s, c);
                    let mut v = SparseVec::new();
                    for (i, xp) in xps.iter().enumerate().take(d) {
                        let lhs = a.mul(fq, xp);
                        let rhs = module.actions()[i].mul(fq, &a);
                        for k in 0..n {
                            for row in 0..n {
                                let diff = fq.sub(lhs.get(row, k), rhs.get(row, k));
                                v.push_field(fq, &[i as i64, k as i64, row as i64], diff);
                            }
                        }
                    }
                    unknowns.push(a);
                    cols.push(v);
                }
            }
        }
        if unknowns.is_empty() {
            return Vec::new();
        }
        let (m, _) = columns_to_matrix(p, &cols, &[]);
        let kernel = if m.rows() == 0 { identity_basis(unknowns.len()) } else { m.kernel_basis() };
        kernel
            .into_iter()
            .map(|coeffs| {
                let mut acc = FqMat::zeros(n, n);
                for (c, a) in coeffs.iter().zip(&unknowns) {
                    for _ in 0..*c {
                        acc.data = vec_add(fq, &acc.data, &a.data);
                    }
                }
                acc
            })
            .collect()
    }

    /// A uniformly random structure map.
    pub fn random<R: Rng>(module: FinModule, rng: &mut R) -> CartierModule {
        let fq = module.fq().clone();
        let basis = Self::structure_space(&module);
        let n = module.dim();
        let mut phi = FqMat::zeros(n, n);
        for b in &basis {
            for _ in 0..rng.gen_range(0..fq.p()) {
                phi.data = vec_add(&fq, &phi.data, &b.data);
            }
        }
        CartierModule { module, phi }
    }

    /// A copy whose structure matrix has one extra entry added, usually breaking
    /// compatibility with anything built from the original.
    pub fn perturbed(&self, row: usize, col: usize) -> CartierModule {
        let mut phi = self.phi.clone();
        phi.set(row, col, self.fq().add(phi.get(row, col), FieldElem::ONE));
        CartierModule { module: self.module.clone(), phi }
    }
}

fn identity_basis(n: usize) -> Vec<Vec<u32>> {
    (0..n)
        .map(|i| {
            let mut v = vec![0; n];
            v[i] = 1;
            v
        })
        .collect()
}

/// `R/(x_1^{a_1}, ..., x_d^{a_d})` with structure `Phi(c g . -)` where
/// `g = prod x_i^{(p-1) a_i}` and `c` is a nonzero scalar (normally 1).
#[derive(Debug, Clone)]
pub struct TwistedQuotient {
    pub algebra: ArtinianAlgebra,
    pub module: CartierModule,
    /// The generators `x_i^{a_i}`.
    pub gens: Vec<MultiPoly>,
    /// The multiplier `c g` lifted to `R`; zero for the trivial structure.
    pub multiplier: MultiPoly,
}

/// Reads `f_i = c_i x_i^{a_i}` and returns the exponents.
pub fn monomial_exponents(ring: &PolyRing, gens: &[MultiPoly]) -> Result<Vec<u32>> {
    let d = ring.nvars();
    if gens.len() != d {
        return Err(Error::Unsupported(format!("expected {d} generators, one per variable, got {}", gens.len())));
    }
    let mut exps = Vec::with_capacity(d);
    for (i, f) in gens.iter().enumerate() {
        let bad = || Error::Unsupported(format!("generator {} must be a nonzero multiple of a power of x{}", i + 1, i + 1));
        if f.terms.len() != 1 {
            return Err(bad());
        }
        let (m, _) = f.terms.iter().next().unwrap();
        if m.0.iter().enumerate().any(|(j, &e)| (j == i) != (e > 0)) {
            return Err(bad());
        }
        exps.push(m.0[i]);
    }
    Ok(exps)
}

impl TwistedQuotient {
    /// The twisted structure `Phi((f_1 ... f_d)^{p-1} . -)` on `R/(f)`, with the
    /// descent condition `Phi(g f_i x^a) in (f)` checked for all `a in [0,p)^d`.
    pub fn new(ring: &PolyRing, gens: &[MultiPoly]) -> Result<Self> {
        Self::with_scalar(ring, gens, FieldElem::ONE)
    }

    pub fn with_scalar(ring: &PolyRing, gens: &[MultiPoly], c: FieldElem) -> Result<Self> {
        let p = ring.p();
        let exps = monomial_exponents(ring, gens)?;
        let g = ring.scale(c, &ring.monomial(&exps.iter().map(|a| (p - 1) * a).collect::<Vec<_>>()));
        Self::build(ring, exps, g)
    }

    /// `R/(f)` with the zero structure.
    pub fn trivial(ring: &PolyRing, gens: &[MultiPoly]) -> Result<Self> {
        let exps = monomial_exponents(ring, gens)?;
        Self::build(ring, exps, ring.zero())
    }

    fn build(ring: &PolyRing, exps: Vec<u32>, g: MultiPoly) -> Result<Self> {
        let alg = ArtinianAlgebra::new(ring.clone(), exps.clone())?;
        let gens: Vec<MultiPoly> = (0..ring.nvars())
            .map(|i| {
                let mut e = vec![0; ring.nvars()];
                e[i] = exps[i];
                ring.monomial(&e)
            })
            .collect();
        for (i, f) in gens.iter().enumerate() {
            for a in ring.frobenius_basis() {
                let h = ring.mul(&ring.mul(&g, f), &ring.monomial(&a));
                if !vec_is_zero(&alg.reduce(&ring.cartier(&h))) {
                    return Err(Error::Descent(format!("Phi(g f{} x^{a:?}) is not in the ideal", i + 1)));
                }
            }
        }
        let cols: Vec<Vec<FieldElem>> =
            alg.basis().iter().map(|b| alg.reduce(&ring.cartier(&ring.mul(&g, &ring.monomial(b))))).collect();
        let phi = FqMat::from_columns(alg.dim(), &cols);
        let module = CartierModule::new(alg.regular_module(), phi)?;
        Ok(TwistedQuotient { algebra: alg, module, gens, multiplier: g })
    }
}

/// `F^! M = Hom_R(R^{(1)}, M)` in the coordinates `v_a = sigma(G(x^a))`,
/// `a in [0,p)^d` ordered as [`PolyRing::frobenius_basis`].
pub fn upper_shriek(module: &FinModule) -> FinModule {
    let ring = module.ring();
    let fq = ring.fq();
    let p = ring.p();
    let n = module.dim();
    let fb = ring.frobenius_basis();
    let pos = |a: &[u32]| fb.iter().position(|b| b.as_slice() == a).unwrap();
    let big = fb.len() * n;
    let actions = (0..ring.nvars())
        .map(|i| {
            let xs = mat_frob(fq, &module.actions()[i], 1);
            let mut m = FqMat::zeros(big, big);
            for (ai, a) in fb.iter().enumerate() {
                let mut b = a.clone();
                if a[i] + 1 < p {
                    b[i] += 1;
                    let bi = pos(&b);
                    for k in 0..n {
                        m.set(ai * n + k, bi * n + k, FieldElem::ONE);
                    }
                } else {
                    b[i] = 0;
                    let bi = pos(&b);
                    for r in 0..n {
                        for c in 0..n {
                            m.set(ai * n + r, bi * n + c, xs.get(r, c));
                        }
                    }
                }
            }
            m
        })
        .collect();
    FinModule::new(ring.clone(), big, actions).expect("commuting actions")
}

/// The adjoint `tau(m) = (sigma(phi(x^a m)))_a` as an `F_q`-matrix `M -> F^! M`.
pub fn unit_transpose(cm: &CartierModule) -> FqMat {
    let fq = cm.fq();
    let m = cm.module();
    let fb = cm.ring().frobenius_basis();
    let n = m.dim();
    let cols: Vec<Vec<FieldElem>> = (0..n)
        .map(|k| {
            let ek = m.unit(k);
            fb.iter().flat_map(|a| vec_frob(fq, &cm.apply(&m.act_monomial(a, &ek)), 1)).collect()
        })
        .collect();
    FqMat::from_columns(fb.len() * n, &cols)
}

/// Recovers `phi(m) = G(1)` from `tau`.
pub fn unit_transpose_inverse(module: FinModule, tau: &FqMat) -> Result<CartierModule> {
    let fq = module.fq().clone();
    let n = module.dim();
    let mut top = FqMat::zeros(n, n);
    for r in 0..n {
        for c in 0..n {
            top.set(r, c, tau.get(r, c));
        }
    }
    CartierModule::new(module, mat_frob(&fq, &top, -1))
}

/// Checks that `tau` is `R`-linear into [`upper_shriek`].
pub fn check_transpose_linear(cm: &CartierModule, tau: &FqMat) -> bool {
    let fq = cm.fq();
    let up = upper_shriek(cm.module());
    (0..cm.ring().nvars()).all(|i| tau.mul(fq, &cm.module().actions()[i]) == up.actions()[i].mul(fq, tau))
}

/// One level of the directed system `M -> F^! M -> (F^!)^2 M -> ...`.
#[derive(Debug, Clone)]
pub struct UnitalizationLevel {
    pub dim: usize,
    /// Rank of the transition into the next level.
    pub transition_rank: usize,
    /// Dimension of the image of `M` in this level.
    pub image_of_base: usize,
}

fn fq_rank(fq: &Fq, m: &FqMat) -> usize {
    // the F_p-rank of an F_q-linear map is e times its F_q-rank
    let e = fq.e() as usize;
    let cols: Vec<SparseVec> = (0..m.cols)
        .flat_map(|j| {
            let col = m.column(j);
            fq.fp_basis().into_iter().map(move |c| {
                let mut v = SparseVec::new();
                for (i, &a) in col.iter().enumerate() {
                    v.push_field(fq, &[i as i64], fq.mul(c, a));
                }
                v
            })
        })
        .collect();
    crate::semilinear::sparse_rank(fq.p(), &cols) / e
}

/// `(F^!)(f)` for an `R`-linear `f`: blockwise `sigma(f)`.
fn shriek_map(fq: &Fq, f: &FqMat, blocks: usize) -> FqMat {
    let fs = mat_frob(fq, f, 1);
    let mut out = FqMat::zeros(blocks * f.rows, blocks * f.cols);
    for b in 0..blocks {
        for r in 0..f.rows {
            for c in 0..f.cols {
                out.set(b * f.rows + r, b * f.cols + c, fs.get(r, c));
            }
        }
    }
    out
}

/// Levels `0..=levels` of the unitalization, with `F_q`-dimensions, transition
/// ranks and the image of the base module.
pub fn unitalize(cm: &CartierModule, levels: u32) -> Result<Vec<UnitalizationLevel>> {
    if levels == 0 {
        return Err(Error::Invalid("at least one level is required".into()));
    }
    let fq = cm.fq();
    let pd = cm.ring().frobenius_basis().len();
    let mut modules = vec![cm.module().clone()];
    let mut transitions = vec![unit_transpose(cm)];
    for e in 1..=levels as usize {
        modules.push(upper_shriek(&modules[e - 1]));
        if e < levels as usize {
            transitions.push(shriek_map(fq, &transitions[e - 1], pd));
        }
    }
    let mut composite = FqMat::identity(cm.dim());
    let mut out = Vec::new();
    for (e, m) in modules.iter().enumerate() {
        if e > 0 {
            composite = transitions[e - 1].mul(fq, &composite);
        }
        out.push(UnitalizationLevel {
            dim: m.dim(),
            transition_rank: transitions.get(e).map_or(0, |t| fq_rank(fq, t)),
            image_of_base: fq_rank(fq, &composite),
        });
    }
    Ok(out)
}

/// The structure `Phi(g . -)` on the free module `R` of rank one.
#[derive(Debug, Clone)]
pub struct FreeRankOne {
    pub ring: PolyRing,
    pub g: MultiPoly,
}

impl FreeRankOne {
    pub fn standard(ring: &PolyRing) -> Self {
        FreeRankOne { ring: ring.clone(), g: ring.one() }
    }

    pub fn apply(&self, f: &MultiPoly) -> MultiPoly {
        self.ring.cartier(&self.ring.mul(&self.g, f))
    }

    /// `tau(r) = (phi(x^a r))_a`.
    pub fn transpose(&self, r: &MultiPoly) -> Vec<MultiPoly> {
        self.ring.frobenius_basis().iter().map(|a| self.apply(&self.ring.mul(&self.ring.monomial(a), r))).collect()
    }

    /// For `g = 1`: the preimage of `G` under `tau`, `r = sum_b G(x^{p-1-b})^p x^b`.
    pub fn transpose_inverse(&self, big: &[MultiPoly]) -> MultiPoly {
        let ring = &self.ring;
        let p = ring.p();
        let fb = ring.frobenius_basis();
        let mut r = ring.zero();
        for b in &fb {
            let comp: Vec<u32> = b.iter().map(|&x| p - 1 - x).collect();
            let idx = fb.iter().position(|a| *a == comp).unwrap();
            r = ring.add(&r, &ring.mul(&ring.frobenius(&big[idx]), &ring.monomial(b)));
        }
        r
    }

    /// The level-`e` transition of the unitalization in the coordinates of
    /// `(F^!)^e R = R`: multiplication by `g^{p^e}` (identity for `g = 1`).
    pub fn transition(&self, e: u32, r: &MultiPoly) -> MultiPoly {
        self.ring.mul(&self.ring.frobenius_pow(&self.g, e), r)
    }
}

/// Structure matrix equality `phi == phi'` read off from two transposes.
pub fn transpose_roundtrip(cm: &CartierModule) -> Result<bool> {
    let tau = unit_transpose(cm);
    let back = unit_transpose_inverse(cm.module().clone(), &tau)?;
    Ok(back.phi_matrix() == cm.phi_matrix())
}

/// Frobenius-twisted box: exponents of `R/(x^a)` read through `r . m = r^p m`
/// split into the summands `R/(x_i^{ceil((a_i - b_i)/p)})`, `b in [0,p)^d`.
pub fn frobenius_pushforward_exponents(p: u32, exps: &[u32]) -> Vec<(Vec<u32>, Vec<u32>)> {
    box_exponents(&vec![p; exps.len()])
        .into_iter()
        .map(|b| {
            let c = exps.iter().zip(&b).map(|(&a, &bi)| if a > bi { (a - bi).div_ceil(p) } else { 0 }).collect();
            (b, c)
        })
        .collect()
}

/// Difference of two structure maps applied to `v`, used in diagnostics.
pub fn phi_difference(a: &CartierModule, b: &CartierModule, v: &[FieldElem]) -> Vec<FieldElem> {
    vec_sub(a.fq(), &a.apply(v), &b.apply(v))
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;
    use std::sync::Arc;

    fn ring(p: u32, e: u32, d: usize) -> PolyRing {
        PolyRing::new(Arc::new(Fq::new(p, e).unwrap()), d)
    }

    #[test]
    fn twisted_residue_field_is_identity() {
        let r = ring(2, 1, 1);
        let tq = TwistedQuotient::new(&r, &[r.var(0)]).unwrap();
        assert_eq!(tq.module.dim(), 1);
        assert_eq!(tq.module.apply(&[FieldElem::ONE]), vec![FieldElem::ONE]);
        assert_eq!(tq.module.apply(&[FieldElem::ZERO]), vec![FieldElem::ZERO]);
    }

    #[test]
    fn twisted_x_squared() {
        let r = ring(2, 1, 1);
        let tq = TwistedQuotient::new(&r, &[r.parse("x^2").unwrap()]).unwrap();
        // phi(1) = Phi(x^2) = 0 and phi(x) = Phi(x^3) = x
        assert_eq!(tq.module.apply(&[FieldElem::ONE, FieldElem::ZERO]), vec![FieldElem::ZERO, FieldElem::ZERO]);
        assert_eq!(tq.module.apply(&[FieldElem::ZERO, FieldElem::ONE]), vec![FieldElem::ZERO, FieldElem::ONE]);
    }

    #[test]
    fn non_monomial_generators_rejected() {
        let r = ring(2, 1, 2);
        let gens = [r.parse("x1 + x2").unwrap(), r.var(1)];
        assert!(matches!(TwistedQuotient::new(&r, &gens), Err(Error::Unsupported(_))));
    }

    #[test]
    fn broken_structure_rejected() {
        let r = ring(3, 1, 1);
        let alg = ArtinianAlgebra::new(r, vec![4]).unwrap();
        let mut phi = FqMat::zeros(4, 4);
        phi.set(0, 0, FieldElem::ONE); // phi(1) = 1 forces phi(x^3) = x
        assert!(CartierModule::new(alg.regular_module(), phi).is_err());
    }

    #[test]
    fn structure_space_contains_twisted_and_random_ones_pass() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        for (p, e, a) in [(2, 1, 2), (3, 1, 4), (2, 2, 3)] {
            let r = ring(p, e, 1);
            let alg = ArtinianAlgebra::new(r.clone(), vec![a]).unwrap();
            for _ in 0..5 {
                let cm = CartierModule::random(alg.regular_module(), &mut rng);
                cm.check_twist().unwrap();
                assert!(transpose_roundtrip(&cm).unwrap());
                assert!(check_transpose_linear(&cm, &unit_transpose(&cm)));
            }
        }
    }

    #[test]
    fn transpose_of_zero_is_zero() {
        let r = ring(2, 1, 1);
        let alg = ArtinianAlgebra::new(r, vec![2]).unwrap();
        let cm = CartierModule::trivial(alg.regular_module());
        assert!(unit_transpose(&cm).is_zero());
    }

    #[test]
    fn free_rank_one_transpose_is_invertible() {
        for (p, d) in [(2, 1), (3, 1), (2, 2)] {
            let r = ring(p, 1, d);
            let fr = FreeRankOne::standard(&r);
            for s in ["1", "x1 + 1", "x1^3 + x1*x1 + 2"] {
                let s = if d == 1 { s.replace("x1", "x") } else { s.to_string() };
                let f = r.parse(&s).unwrap();
                assert_eq!(fr.transpose_inverse(&fr.transpose(&f)), f);
            }
        }
    }

    #[test]
    fn unitalize_residue_field() {
        let r = ring(2, 1, 1);
        let tq = TwistedQuotient::new(&r, &[r.var(0)]).unwrap();
        let lv = unitalize(&tq.module, 3).unwrap();
        let dims: Vec<usize> = lv.iter().map(|l| l.dim).collect();
        assert_eq!(dims, vec![1, 2, 4, 8]);
        assert!(lv.iter().all(|l| l.image_of_base == 1));
    }

    #[test]
    fn pushforward_exponents() {
        // F_*(R/(x)) over F_2[x] is R/(x)
        let s = frobenius_pushforward_exponents(2, &[1]);
        assert_eq!(s, vec![(vec![0], vec![1]), (vec![1], vec![0])]);
        let s = frobenius_pushforward_exponents(3, &[4]);
        assert_eq!(s, vec![(vec![0], vec![2]), (vec![1], vec![1]), (vec![2], vec![1])]);
    }
}
