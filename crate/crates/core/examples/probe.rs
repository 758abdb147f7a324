use frobext_core::resolution::*;
use frobext_core::*;
use std::sync::Arc;
fn main() {
    for (p, d) in [(2u32, 1usize), (2, 2), (3, 1), (3, 2)] {
        let r = PolyRing::new(Arc::new(Fq::new(p, 1).unwrap()), d);
        let t = std::time::Instant::now();
        let cone = residue_field_cone(&r, true).unwrap();
        let rep = cone.check_acyclic(2, 3);
        println!("p={p} d={d} dd={} acyc={} {:?} {:?}", cone.check_d_squared(), rep.acyclic, rep.degrees, t.elapsed());
        let n = resolution::FreeCoefficients { ring: r.clone(), g: r.one() };
        let c = ExtComplex::new(&cone, &n);
        for j in 0..=d + 1 { println!("  ext^{j}(k,R) = {:?}", c.dim(j, 2)); }
        println!("  t={:?}", t.elapsed());
    }
}
