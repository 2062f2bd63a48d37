//! The unital hull R = k ⊕ A, Dieudonné determinants over R, and the norm
//! maps N_{k'/k}: (1+A')^ab → (1+A)^ab.

use std::collections::HashMap;
use std::sync::{Arc, Mutex};

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::algrp::{AbelianQuotient, AlgebraGroup, LinearCharacter, Subgroup};
use crate::error::{Error, Result};
use crate::gf::{embedding, Embedding, FieldElement, RelativeBasis};
use crate::linalg::{add_vec, is_zero_vec, rref, scale_vec, sub_vec, zero_vector, Subspace, Vector};
use crate::nilalg::NilpotentAlgebra;

/// λ + a with λ ∈ k and a ∈ A.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct HullElement {
    pub scalar: FieldElement,
    pub nil: Vector,
}

impl HullElement {
    pub fn zero(d: usize) -> Self {
        HullElement {
            scalar: FieldElement::ZERO,
            nil: zero_vector(d),
        }
    }

    pub fn one(d: usize) -> Self {
        HullElement {
            scalar: FieldElement::ONE,
            nil: zero_vector(d),
        }
    }

    pub fn scalar(d: usize, lambda: FieldElement) -> Self {
        HullElement {
            scalar: lambda,
            nil: zero_vector(d),
        }
    }

    pub fn is_unit(&self) -> bool {
        !self.scalar.is_zero()
    }

    pub fn add(&self, alg: &NilpotentAlgebra, o: &Self) -> Self {
        let f = alg.field();
        HullElement {
            scalar: f.add(self.scalar, o.scalar),
            nil: add_vec(f, &self.nil, &o.nil),
        }
    }

    pub fn sub(&self, alg: &NilpotentAlgebra, o: &Self) -> Self {
        let f = alg.field();
        HullElement {
            scalar: f.sub(self.scalar, o.scalar),
            nil: sub_vec(f, &self.nil, &o.nil),
        }
    }

    /// (λ + a)(μ + b) = λμ + (λb + μa + ab)
    pub fn mul(&self, alg: &NilpotentAlgebra, o: &Self) -> Self {
        let f = alg.field();
        let mut nil = alg.mul(&self.nil, &o.nil);
        for ((x, &a), &b) in nil.iter_mut().zip(&self.nil).zip(&o.nil) {
            *x = f.add(*x, f.add(f.mul(self.scalar, b), f.mul(o.scalar, a)));
        }
        HullElement {
            scalar: f.mul(self.scalar, o.scalar),
            nil,
        }
    }

    /// λ(1 + λ⁻¹a) has inverse λ⁻¹(1 + λ⁻¹a)⁻¹.
    pub fn inv(&self, alg: &NilpotentAlgebra) -> Result<Self> {
        let f = alg.field();
        let li = f.inv(self.scalar).map_err(|_| Error::NotInvertible)?;
        let x = scale_vec(f, li, &self.nil);
        let inv_unip = unipotent_inverse(alg, &x);
        Ok(HullElement {
            scalar: li,
            nil: scale_vec(f, li, &inv_unip),
        })
    }
}

// (1+x)⁻¹ − 1 = −x + x² − ...
fn unipotent_inverse(alg: &NilpotentAlgebra, x: &[FieldElement]) -> Vector {
    let f = alg.field();
    let neg: Vector = x.iter().map(|&c| f.neg(c)).collect();
    let mut sum = neg.clone();
    let mut term = neg.clone();
    loop {
        term = alg.mul(&term, &neg);
        if is_zero_vec(&term) {
            return sum;
        }
        sum = add_vec(f, &sum, &term);
    }
}

/// The class of a unit of R in (R^×)^ab = k^× × G^ab.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct UnitClass {
    pub scalar: FieldElement,
    pub unipotent: Vec<u32>,
}

impl UnitClass {
    pub fn one(q: &AbelianQuotient) -> UnitClass {
        UnitClass {
            scalar: FieldElement::ONE,
            unipotent: vec![0; q.rank()],
        }
    }

    pub fn mul(&self, g: &AlgebraGroup, o: &UnitClass) -> UnitClass {
        let q = g.abelianization();
        UnitClass {
            scalar: g.field().mul(self.scalar, o.scalar),
            unipotent: q.add_logs(&self.unipotent, &o.unipotent),
        }
    }

    /// u = λ(1 + λ⁻¹a) ↦ (λ, log(1 + λ⁻¹a)).
    pub fn of_unit(g: &AlgebraGroup, u: &HullElement) -> Result<UnitClass> {
        let f = g.field();
        let li = f.inv(u.scalar).map_err(|_| Error::NotInvertible)?;
        let code = g.encode(&scale_vec(f, li, &u.nil));
        Ok(UnitClass {
            scalar: u.scalar,
            unipotent: g.abelianization().log(code).to_vec(),
        })
    }
}

pub type HullMatrix = Vec<Vec<HullElement>>;

/// Which eligible row becomes the pivot in each column.
#[derive(Clone, Copy, Debug)]
pub enum PivotRule {
    First,
    Random(u64),
}

/// Is M invertible modulo the radical A?
pub fn is_invertible(g: &AlgebraGroup, m: &HullMatrix) -> bool {
    let n = m.len();
    let rows: Vec<Vector> = m.iter().map(|r| r.iter().map(|x| x.scalar).collect()).collect();
    rref(g.field(), rows, n).0.len() == n
}

pub fn dieudonne_det(g: &AlgebraGroup, m: &HullMatrix) -> Result<UnitClass> {
    dieudonne_det_with(g, m, PivotRule::First)
}

/// Unit-pivot elimination: each row swap contributes the class of −1,
/// transvections contribute nothing, and the result is the product of the
/// diagonal classes.
pub fn dieudonne_det_with(g: &AlgebraGroup, m: &HullMatrix, rule: PivotRule) -> Result<UnitClass> {
    let alg = g.algebra();
    let f = g.field();
    let n = m.len();
    if m.iter().any(|r| r.len() != n) {
        return Err(Error::BadParameter("matrix is not square".into()));
    }
    if !is_invertible(g, m) {
        return Err(Error::NotInvertible);
    }
    let mut rng = match rule {
        PivotRule::Random(seed) => Some(ChaCha8Rng::seed_from_u64(seed)),
        PivotRule::First => None,
    };
    let mut m = m.clone();
    let mut swaps = 0u32;
    let q = g.abelianization();
    let mut acc = UnitClass::one(&q);
    for c in 0..n {
        let eligible: Vec<usize> = (c..n).filter(|&r| m[r][c].is_unit()).collect();
        let r = match rng.as_mut() {
            Some(rng) => *eligible.choose(rng).ok_or(Error::NotInvertible)?,
            None => *eligible.first().ok_or(Error::NotInvertible)?,
        };
        if r != c {
            m.swap(r, c);
            swaps += 1;
        }
        let pinv = m[c][c].inv(alg)?;
        for i in c + 1..n {
            if m[i][c].scalar.is_zero() && is_zero_vec(&m[i][c].nil) {
                continue;
            }
            let factor = m[i][c].mul(alg, &pinv);
            for j in c..n {
                let t = factor.mul(alg, &m[c][j]);
                m[i][j] = m[i][j].sub(alg, &t);
            }
        }
        acc = acc.mul(g, &UnitClass::of_unit(g, &m[c][c])?);
    }
    if swaps % 2 == 1 {
        acc.scalar = f.neg(acc.scalar);
    }
    Ok(acc)
}

/// Data for N_{k'/k} on one algebra: the group over k, the group of the
/// scalar extension over k', and the relative basis 1, t, ..., t^{n-1}.
pub struct NormContext {
    pub base: Arc<AlgebraGroup>,
    pub ext: Arc<AlgebraGroup>,
    pub basis: RelativeBasis,
}

impl NormContext {
    /// `ext` must carry the structure constants of `base` pushed into k'.
    pub fn new(base: Arc<AlgebraGroup>, ext: Arc<AlgebraGroup>) -> Result<NormContext> {
        let (a, a2) = (base.algebra(), ext.algebra());
        let e = embedding(a.field(), a2.field())?;
        let pushed: Vec<FieldElement> = a.structure_constants().iter().map(|&c| e.apply(c)).collect();
        if a.dim() != a2.dim() || pushed != a2.structure_constants() {
            return Err(Error::BadParameter("algebras are not related by scalar extension".into()));
        }
        let basis = RelativeBasis::new(a.field().clone(), a2.field().clone())?;
        Ok(NormContext { base, ext, basis })
    }

    pub fn degree(&self) -> usize {
        self.basis.degree
    }

    /// Matrix over R of x ↦ g·x on R' in the basis t^j, columns as images.
    pub fn multiplication_matrix(&self, g: u32) -> HullMatrix {
        let alg = self.base.algebra();
        let d = alg.dim();
        let n = self.degree();
        let a = self.ext.decode(g);
        // g = Σ_i t^i g_i
        let mut parts: Vec<HullElement> = (0..n).map(|_| HullElement::zero(d)).collect();
        parts[0].scalar = FieldElement::ONE;
        for (l, &alpha) in a.iter().enumerate() {
            for (i, &c) in self.basis.coordinates(alpha).iter().enumerate() {
                parts[i].nil[l] = FieldElement(c);
            }
        }
        let powers: Vec<Vector> = (0..2 * n).map(|e| self.basis.power_coordinates(e)).collect();
        let f = alg.field();
        let mut m: HullMatrix = vec![vec![HullElement::zero(d); n]; n];
        for j in 0..n {
            for (i, gi) in parts.iter().enumerate() {
                for (l, &c) in powers[i + j].iter().enumerate() {
                    if !c.is_zero() {
                        let term = HullElement {
                            scalar: f.mul(c, gi.scalar),
                            nil: scale_vec(f, c, &gi.nil),
                        };
                        m[l][j] = m[l][j].add(alg, &term);
                    }
                }
            }
        }
        m
    }

    /// N(g) as a coset id of G^ab.
    pub fn norm_of(&self, g: u32) -> Result<u32> {
        let m = self.multiplication_matrix(g);
        let class = dieudonne_det(&self.base, &m)?;
        if class.scalar != FieldElement::ONE {
            return Err(Error::Inconsistent(format!(
                "norm of a unipotent element has scalar part {:?}",
                class.scalar
            )));
        }
        Ok(self.base.abelianization().coset_of_log(&class.unipotent))
    }
}

/// N_{k'/k} tabulated on abelianizations, as a map of coset ids.
pub struct NormTable {
    pub src: Arc<AbelianQuotient>,
    pub dst: Arc<AbelianQuotient>,
    pub degree: usize,
    table: Vec<u32>,
}

impl NormTable {
    pub fn apply_coset(&self, c: u32) -> u32 {
        self.table[c as usize]
    }

    /// Image of an element of G' as a coset id of G^ab.
    pub fn apply(&self, g: u32) -> u32 {
        self.table[self.src.coset(g) as usize]
    }

    pub fn apply_log(&self, l: &[u32]) -> Vec<u32> {
        let c = self.apply_coset(self.src.coset_of_log(l));
        self.dst.log_of_coset(c).to_vec()
    }

    pub fn image_size(&self) -> usize {
        let mut seen = vec![false; self.dst.size() as usize];
        for &c in &self.table {
            seen[c as usize] = true;
        }
        seen.iter().filter(|&&b| b).count()
    }

    pub fn is_surjective(&self) -> bool {
        self.image_size() == self.dst.size() as usize
    }

    /// Pairs (src log, dst log) in src coset order.
    pub fn pairs(&self) -> Vec<(Vec<u32>, Vec<u32>)> {
        (0..self.src.size())
            .map(|c| {
                (
                    self.src.log_of_coset(c).to_vec(),
                    self.dst.log_of_coset(self.table[c as usize]).to_vec(),
                )
            })
            .collect()
    }
}

/// Tabulates N on every element of G', asserting constancy on derived
/// cosets and the homomorphism property.
pub fn norm_map(ctx: &NormContext) -> Result<NormTable> {
    let src = ctx.ext.abelianization();
    let dst = ctx.base.abelianization();
    let mut table = vec![u32::MAX; src.size() as usize];
    for g in ctx.ext.elements() {
        let v = ctx.norm_of(g)?;
        let c = src.coset(g) as usize;
        if table[c] == u32::MAX {
            table[c] = v;
        } else if table[c] != v {
            return Err(Error::NotConstantOnCosets(codes_of(&ctx.ext, g)));
        }
    }
    let nt = NormTable {
        src: src.clone(),
        dst: dst.clone(),
        degree: ctx.degree(),
        table,
    };
    // f(g_i x) = f(g_i) + f(x) on generators suffices
    for &gen in &src.generators {
        let ng = dst.log_of_coset(nt.apply(gen)).to_vec();
        for c in 0..src.size() {
            let x = src.coset_rep(c);
            let lhs = nt.apply(ctx.ext.mul(gen, x));
            let rhs = dst.coset_of_log(&dst.add_logs(&ng, dst.log_of_coset(nt.apply_coset(c))));
            if lhs != rhs {
                return Err(Error::NotAHomomorphism(codes_of(&ctx.ext, x)));
            }
        }
    }
    Ok(nt)
}

pub fn codes_of(g: &AlgebraGroup, x: u32) -> Vec<u32> {
    g.decode(x).iter().map(|c| c.0).collect()
}

/// Coordinatewise Frobenius x ↦ x^q on group codes.
pub fn frobenius_code(g: &AlgebraGroup, q: u32, x: u32) -> Result<u32> {
    Ok(g.encode(&g.algebra().frobenius(q, &g.decode(x))?))
}

/// G = 1+A over k together with G' = 1+A' over k', and the norm tables of
/// the algebra subgroups 1+U' → 1+U, built on demand.
pub struct Extension {
    pub base: Arc<AlgebraGroup>,
    pub ext: Arc<AlgebraGroup>,
    pub embedding: Arc<Embedding>,
    pub degree: u32,
    norms: Mutex<HashMap<Subspace, Arc<NormTable>>>,
}

impl Extension {
    pub fn new(base: Arc<AlgebraGroup>, n: u32) -> Result<Extension> {
        let alg = base.algebra().extend_scalars(n)?;
        let ext = AlgebraGroup::new(Arc::new(alg))?;
        Extension::between(base, ext)
    }

    /// `ext` must be a scalar extension of `base`.
    pub fn between(base: Arc<AlgebraGroup>, ext: Arc<AlgebraGroup>) -> Result<Extension> {
        let ctx = NormContext::new(base.clone(), ext.clone())?;
        let embedding = embedding(base.field(), ext.field())?;
        Ok(Extension {
            base,
            ext,
            embedding,
            degree: ctx.degree() as u32,
            norms: Mutex::new(HashMap::new()),
        })
    }

    /// U' = k' ⊗ U.
    pub fn lift(&self, u: &Subspace) -> Subspace {
        u.embed(&self.embedding)
    }

    /// 1+U and 1+U' as subgroups of G and G'.
    pub fn subgroups(&self, u: &Subspace) -> Result<(Arc<Subgroup>, Arc<Subgroup>)> {
        Ok((self.base.subgroup(u)?, self.ext.subgroup(&self.lift(u))?))
    }

    /// N_{k'/k}: (1+U')^ab → (1+U)^ab.
    pub fn norm_table(&self, u: &Subspace) -> Result<Arc<NormTable>> {
        if let Some(t) = self.norms.lock().unwrap().get(u) {
            return Ok(t.clone());
        }
        let (bs, es) = self.subgroups(u)?;
        let table = Arc::new(norm_map(&NormContext::new(bs.group.clone(), es.group.clone())?)?);
        let mut cache = self.norms.lock().unwrap();
        Ok(cache.entry(u.clone()).or_insert(table).clone())
    }

    /// χ ∘ N for a character χ of (1+U)^ab.
    pub fn pullback(&self, u: &Subspace, chi: &LinearCharacter) -> Result<LinearCharacter> {
        let table = self.norm_table(u)?;
        if !Arc::ptr_eq(&table.dst, &chi.quotient) {
            return Err(Error::GroupMismatch);
        }
        let (e_dst, e_src) = (table.dst.exponent as u64, table.src.exponent as u64);
        let mut bad = false;
        let out = table.src.character_from_values(|g| {
            let v = chi.value(table.dst.coset_rep(table.apply(g))) as u64 * e_src;
            if v % e_dst != 0 {
                bad = true;
            }
            (v / e_dst) as u32
        });
        if bad {
            return Err(Error::Inconsistent("pulled-back character has the wrong order".into()));
        }
        Ok(out)
    }

    /// x ↦ x^{|k|} on G'.
    pub fn frobenius(&self, g: u32) -> u32 {
        let q = self.base.field().size() as u64;
        let f = self.ext.field();
        let v: Vector = self.ext.decode(g).iter().map(|&x| f.pow(x, q)).collect();
        self.ext.encode(&v)
    }

    pub fn frobenius_inv(&self, g: u32) -> u32 {
        let q = self.base.field().size() as u64;
        let f = self.ext.field();
        let v: Vector = self
            .ext
            .decode(g)
            .iter()
            .map(|&x| f.frobenius_inv(x, q).expect("k is a subfield of k'"))
            .collect();
        self.ext.encode(&v)
    }

    /// Frobenius on an Fr-stable subgroup of G', in subgroup codes.
    pub fn frobenius_on(&self, sub: &Subgroup, x: u32) -> Option<u32> {
        sub.project(&self.ext, self.frobenius(sub.include(x)))
    }

    /// Is a character of an Fr-stable subgroup of G' fixed by Fr?
    pub fn is_galois_invariant(&self, sub: &Subgroup, chi: &LinearCharacter) -> bool {
        chi.quotient.generators.iter().all(|&x| {
            self.frobenius_on(sub, x)
                .is_some_and(|y| chi.value(y) == chi.value(x))
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::gf::make_field;
    use crate::nilalg::{builtin_algebra, BuiltinKind};

    fn pair(kind: BuiltinKind, p: u32, n: u32) -> NormContext {
        let f = make_field(p, 1, None).unwrap();
        let a = builtin_algebra(&kind, &f).unwrap();
        let ae = a.extend_scalars(n).unwrap();
        let g = AlgebraGroup::new(Arc::new(a)).unwrap();
        let ge = AlgebraGroup::new(Arc::new(ae)).unwrap();
        NormContext::new(g, ge).unwrap()
    }

    fn h(s: u32, nil: &[u32]) -> HullElement {
        HullElement {
            scalar: FieldElement(s),
            nil: nil.iter().map(|&x| FieldElement(x)).collect(),
        }
    }

    #[test]
    fn determinant_examples() {
        let ctx = pair(BuiltinKind::TruncatedPoly(2), 2, 1);
        let g = &ctx.base;
        let q = g.abelianization();
        let u = h(1, &[1]);
        assert_eq!(
            dieudonne_det(g, &vec![vec![u.clone()]]).unwrap(),
            UnitClass {
                scalar: FieldElement::ONE,
                unipotent: vec![1]
            }
        );
        let id = vec![vec![h(1, &[0]), h(0, &[0])], vec![h(0, &[0]), h(1, &[0])]];
        assert_eq!(dieudonne_det(g, &id).unwrap(), UnitClass::one(&q));
        let m = vec![vec![h(1, &[0]), h(0, &[1])], vec![h(0, &[1]), h(1, &[0])]];
        assert_eq!(dieudonne_det(g, &m).unwrap(), UnitClass::one(&q));
        let sing = vec![vec![h(0, &[1])]];
        assert_eq!(dieudonne_det(g, &sing), Err(Error::NotInvertible));
    }

    #[test]
    fn swap_sign_over_f3() {
        let ctx = pair(BuiltinKind::TruncatedPoly(2), 3, 1);
        let g = &ctx.base;
        let m = vec![vec![h(0, &[0]), h(1, &[0])], vec![h(1, &[0]), h(0, &[0])]];
        assert_eq!(dieudonne_det(g, &m).unwrap().scalar, FieldElement(2));
    }

    #[test]
    fn identity_for_trivial_extension() {
        let ctx = pair(BuiltinKind::UpperTriangular(3), 2, 1);
        let t = norm_map(&ctx).unwrap();
        for c in 0..t.src.size() {
            assert_eq!(t.src.log_of_coset(c), t.dst.log_of_coset(t.apply_coset(c)));
        }
    }

    #[test]
    fn x2_norm_is_trace() {
        let ctx = pair(BuiltinKind::TruncatedPoly(2), 2, 2);
        let f4 = ctx.ext.field().clone();
        let t = norm_map(&ctx).unwrap();
        for alpha in f4.elements() {
            let tr = f4.trace_to_subfield(alpha, 1).unwrap();
            let g = ctx.ext.encode(&[alpha]);
            assert_eq!(t.dst.coset_rep(t.apply(g)), tr.0);
        }
        // N(1 + t·b1) = 1 + b1
        assert_eq!(t.dst.coset_rep(t.apply(2)), 1);
    }

    #[test]
    fn u3_norm_surjective() {
        let ctx = pair(BuiltinKind::UpperTriangular(3), 2, 2);
        let t = norm_map(&ctx).unwrap();
        assert_eq!(t.image_size(), 4);
        assert!(t.is_surjective());
    }
}
