use std::sync::Arc;

use algrep::algrp::AlgebraGroup;
use algrep::gf::{embedding, make_field, FieldDescriptor, FieldElement};
use algrep::k1norm::{dieudonne_det, Extension, HullElement, HullMatrix};
use algrep::linalg::{Subspace, Vector};
use algrep::nilalg::{builtin_algebra, BuiltinKind};
use proptest::prelude::*;

const FIELDS: [(u32, u32); 10] = [(2, 1), (2, 2), (2, 3), (2, 4), (3, 1), (3, 2), (3, 3), (5, 1), (5, 2), (7, 1)];

fn field(i: usize) -> Arc<FieldDescriptor> {
    let (p, m) = FIELDS[i];
    make_field(p, m, None).unwrap()
}

fn group(kind: BuiltinKind, p: u32, m: u32) -> Arc<AlgebraGroup> {
    let f = make_field(p, m, None).unwrap();
    AlgebraGroup::new(Arc::new(builtin_algebra(&kind, &f).unwrap())).unwrap()
}

fn u4(q_index: usize) -> Arc<AlgebraGroup> {
    let (p, m) = [(2, 1), (3, 1), (2, 2)][q_index];
    group(BuiltinKind::UpperTriangular(4), p, m)
}

/// 4×4 unipotent matrix product with the field's own arithmetic; the basis
/// order is e12 e23 e34 e13 e24 e14.
fn u4_matrix_mul(f: &FieldDescriptor, x: &[FieldElement], y: &[FieldElement]) -> Vector {
    const POS: [(usize, usize); 6] = [(0, 1), (1, 2), (2, 3), (0, 2), (1, 3), (0, 3)];
    let mut a = [[FieldElement::ZERO; 4]; 4];
    let mut b = [[FieldElement::ZERO; 4]; 4];
    for i in 0..4 {
        a[i][i] = FieldElement::ONE;
        b[i][i] = FieldElement::ONE;
    }
    for (k, &(i, j)) in POS.iter().enumerate() {
        a[i][j] = x[k];
        b[i][j] = y[k];
    }
    POS.iter()
        .map(|&(i, j)| (0..4).fold(FieldElement::ZERO, |acc, l| f.add(acc, f.mul(a[i][l], b[l][j]))))
        .collect()
}

proptest! {
    #[test]
    fn field_axioms(i in 0..FIELDS.len(), a in any::<u32>(), b in any::<u32>(), c in any::<u32>()) {
        let f = field(i);
        let q = f.size();
        let (a, b, c) = (FieldElement(a % q), FieldElement(b % q), FieldElement(c % q));
        prop_assert_eq!(f.add(f.add(a, b), c), f.add(a, f.add(b, c)));
        prop_assert_eq!(f.mul(f.mul(a, b), c), f.mul(a, f.mul(b, c)));
        prop_assert_eq!(f.mul(a, b), f.mul(b, a));
        prop_assert_eq!(f.mul(a, f.add(b, c)), f.add(f.mul(a, b), f.mul(a, c)));
        prop_assert_eq!(f.add(a, f.neg(a)), FieldElement::ZERO);
        prop_assert_eq!(f.sub(f.add(a, b), b), a);
        if a.is_zero() {
            prop_assert!(f.inv(a).is_err());
        } else {
            prop_assert_eq!(f.mul(a, f.inv(a).unwrap()), FieldElement::ONE);
            prop_assert_eq!(f.pow(a, q as u64 - 1), FieldElement::ONE);
        }
    }

    #[test]
    fn frobenius_is_an_automorphism(i in 0..FIELDS.len(), a in any::<u32>(), b in any::<u32>()) {
        let f = field(i);
        let (p, q) = (f.p() as u64, f.size());
        let (a, b) = (FieldElement(a % q), FieldElement(b % q));
        let fr = |x| f.frobenius(x, p).unwrap();
        prop_assert_eq!(fr(f.add(a, b)), f.add(fr(a), fr(b)));
        prop_assert_eq!(fr(f.mul(a, b)), f.mul(fr(a), fr(b)));
        prop_assert_eq!(f.frobenius_inv(fr(a), p).unwrap(), a);
        let mut x = a;
        for _ in 0..f.m() {
            x = fr(x);
        }
        prop_assert_eq!(x, a);
    }

    #[test]
    fn embeddings_are_ring_maps(p in prop::sample::select(vec![2u32, 3]), m in 1u32..3, n in 2u32..4, a in any::<u32>(), b in any::<u32>()) {
        let small = make_field(p, m, None).unwrap();
        let big = make_field(p, m * n, None).unwrap();
        let e = embedding(&small, &big).unwrap();
        let q = small.size();
        let (a, b) = (FieldElement(a % q), FieldElement(b % q));
        prop_assert_eq!(e.apply(small.add(a, b)), big.add(e.apply(a), e.apply(b)));
        prop_assert_eq!(e.apply(small.mul(a, b)), big.mul(e.apply(a), e.apply(b)));
        prop_assert_eq!(e.apply(FieldElement::ONE), FieldElement::ONE);
        // the image is fixed by x ↦ x^q
        prop_assert_eq!(big.frobenius(e.apply(a), q as u64).unwrap(), e.apply(a));
    }

    #[test]
    fn trace_and_norm_land_in_the_subfield(n in 2u32..4, x in any::<u32>()) {
        let big = make_field(2, 2 * n, None).unwrap();
        let x = FieldElement(x % big.size());
        prop_assert!(big.is_in_subfield(big.trace_to_subfield(x, 2).unwrap(), 2));
        prop_assert!(big.is_in_subfield(big.norm_to_subfield(x, 2).unwrap(), 2));
    }

    #[test]
    fn u4_group_law_is_matrix_multiplication(qi in 0usize..3, x in any::<u32>(), y in any::<u32>()) {
        let g = u4(qi);
        let (x, y) = (x % g.order(), y % g.order());
        let prod = u4_matrix_mul(g.field(), &g.decode(x), &g.decode(y));
        prop_assert_eq!(g.mul(x, y), g.encode(&prod));
    }

    #[test]
    fn group_axioms(qi in 0usize..3, x in any::<u32>(), y in any::<u32>(), z in any::<u32>()) {
        let g = u4(qi);
        let n = g.order();
        let (x, y, z) = (x % n, y % n, z % n);
        prop_assert_eq!(g.mul(g.mul(x, y), z), g.mul(x, g.mul(y, z)));
        prop_assert_eq!(g.mul(x, g.inv(x)), 0);
        prop_assert_eq!(g.mul(0, x), x);
        prop_assert_eq!(g.pow(x, g.element_order(x) as u64), 0);
        let ab = g.abelianization();
        prop_assert!(ab.is_derived(g.commutator(x, y)));
        prop_assert_eq!(ab.coset(g.mul(x, y)), ab.coset(g.mul(y, x)));
    }

    #[test]
    fn frobenius_on_the_extended_group(x in any::<u32>(), y in any::<u32>()) {
        let g = group(BuiltinKind::UpperTriangular(3), 2, 1);
        let ext = Extension::new(g, 2).unwrap();
        let gp = &ext.ext;
        let (x, y) = (x % gp.order(), y % gp.order());
        prop_assert_eq!(ext.frobenius(gp.mul(x, y)), gp.mul(ext.frobenius(x), ext.frobenius(y)));
        prop_assert_eq!(ext.frobenius_inv(ext.frobenius(x)), x);
        prop_assert_eq!(ext.frobenius(ext.frobenius(x)), x);
    }

    #[test]
    fn norms_are_multiplicative(x in any::<u32>(), y in any::<u32>()) {
        let g = group(BuiltinKind::UpperTriangular(3), 2, 1);
        let ext = Extension::new(g.clone(), 2).unwrap();
        let t = ext.norm_table(&Subspace::full(3)).unwrap();
        let gp = &ext.ext;
        let (x, y) = (x % gp.order(), y % gp.order());
        let lhs = t.apply(gp.mul(x, y));
        let ab = g.abelianization();
        let rhs = ab.coset(g.mul(ab.coset_rep(t.apply(x)), ab.coset_rep(t.apply(y))));
        prop_assert_eq!(lhs, rhs);
    }

    #[test]
    fn transvections_have_trivial_determinant(a in any::<u32>(), s in 1u32..4) {
        let g = group(BuiltinKind::UpperTriangular(3), 2, 2);
        let d = g.dim();
        let x = g.decode(a % g.order());
        let lam = FieldElement(s);
        let u = HullElement { scalar: lam, nil: x.clone() };
        // diag(u, 1) ↦ class of u; [[1, u], [0, 1]] ↦ 1
        let diag: HullMatrix = vec![vec![u.clone(), HullElement::zero(d)], vec![HullElement::zero(d), HullElement::one(d)]];
        let det = dieudonne_det(&g, &diag).unwrap();
        prop_assert_eq!(det.scalar, lam);
        let li = g.field().inv(lam).unwrap();
        let unip: Vector = x.iter().map(|&c| g.field().mul(li, c)).collect();
        let ab = g.abelianization();
        prop_assert_eq!(ab.coset_of_log(&det.unipotent), ab.coset(g.encode(&unip)));
        let tv: HullMatrix = vec![vec![HullElement::one(d), u.clone()], vec![HullElement::zero(d), HullElement::one(d)]];
        let det = dieudonne_det(&g, &tv).unwrap();
        prop_assert_eq!(det.scalar, FieldElement::ONE);
        prop_assert!(det.unipotent.iter().all(|&e| e == 0));
    }

    #[test]
    fn subspace_form_is_canonical(seed in any::<u64>()) {
        use rand::{seq::SliceRandom, Rng, SeedableRng};
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
        let f = make_field(3, 1, None).unwrap();
        let vs: Vec<Vector> = (0..3).map(|_| (0..5).map(|_| FieldElement(rng.gen_range(0..3))).collect()).collect();
        let a = Subspace::span(&f, 5, vs.clone());
        let mut shuffled = vs.clone();
        shuffled.shuffle(&mut rng);
        // add a combination, which spans nothing new
        let extra: Vector = vs[0].iter().zip(&vs[1]).map(|(&x, &y)| f.add(x, f.mul(FieldElement(2), y))).collect();
        shuffled.push(extra);
        prop_assert_eq!(&Subspace::span(&f, 5, shuffled), &a);
        for v in &vs {
            prop_assert!(a.contains(&f, v));
            let c = a.coordinates(&f, v).unwrap();
            prop_assert_eq!(&a.combine(&f, &c), v);
        }
    }
}
