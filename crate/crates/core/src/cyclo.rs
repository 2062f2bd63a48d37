//! Exact arithmetic in Z[ζ_{p^e}] and class functions on algebra groups.

use std::fmt;
use std::sync::Arc;

use serde_json::{json, Value};

use crate::algrp::{AlgebraGroup, LinearCharacter, Subgroup};
use crate::error::{Error, Result};

/// An element of Z[ζ_E], E = p^e, in the power basis 1, ζ, ..., ζ^{φ(E)-1}.
#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct CyclotomicInteger {
    p: u32,
    e: u32,
    coeffs: Vec<i64>,
}

impl fmt::Debug for CyclotomicInteger {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Z[ζ_{}]{:?}", self.level(), self.coeffs)
    }
}

pub fn phi_of(p: u32, e: u32) -> usize {
    if e == 0 {
        1
    } else {
        ((p - 1) * p.pow(e - 1)) as usize
    }
}

/// Splits a prime power into (p, e); level 1 is reported with the given p.
pub fn prime_power(level: u32, p: u32) -> Result<(u32, u32)> {
    let mut x = level;
    let mut e = 0;
    while x > 1 && x % p == 0 {
        x /= p;
        e += 1;
    }
    if x != 1 || level == 0 {
        return Err(Error::BadParameter(format!("{level} is not a power of {p}")));
    }
    Ok((p, e))
}

impl CyclotomicInteger {
    pub fn zero(p: u32, e: u32) -> Self {
        CyclotomicInteger {
            p,
            e,
            coeffs: vec![0; phi_of(p, e)],
        }
    }

    pub fn from_int(p: u32, e: u32, n: i64) -> Self {
        let mut z = Self::zero(p, e);
        z.coeffs[0] = n;
        z
    }

    /// ζ_E^k.
    pub fn root(p: u32, e: u32, k: u64) -> Self {
        let mut s = RootSum::new(p, e);
        s.add_root(k, 1);
        s.finish()
    }

    pub fn level(&self) -> u32 {
        self.p.pow(self.e)
    }

    pub fn prime(&self) -> u32 {
        self.p
    }

    pub fn exponent_e(&self) -> u32 {
        self.e
    }

    pub fn coeffs(&self) -> &[i64] {
        &self.coeffs
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.iter().all(|&c| c == 0)
    }

    pub fn as_integer(&self) -> Option<i64> {
        self.coeffs[1..].iter().all(|&c| c == 0).then_some(self.coeffs[0])
    }

    fn check(&self, other: &Self) -> Result<()> {
        if self.p != other.p || self.e != other.e {
            return Err(Error::LevelMismatch(self.level(), other.level()));
        }
        Ok(())
    }

    pub fn add(&self, other: &Self) -> Result<Self> {
        self.check(other)?;
        Ok(CyclotomicInteger {
            p: self.p,
            e: self.e,
            coeffs: self.coeffs.iter().zip(&other.coeffs).map(|(a, b)| a + b).collect(),
        })
    }

    pub fn neg(&self) -> Self {
        CyclotomicInteger {
            p: self.p,
            e: self.e,
            coeffs: self.coeffs.iter().map(|a| -a).collect(),
        }
    }

    pub fn sub(&self, other: &Self) -> Result<Self> {
        self.add(&other.neg())
    }

    pub fn scalar_mul(&self, n: i64) -> Self {
        CyclotomicInteger {
            p: self.p,
            e: self.e,
            coeffs: self.coeffs.iter().map(|a| a * n).collect(),
        }
    }

    pub fn mul(&self, other: &Self) -> Result<Self> {
        self.check(other)?;
        let mut s = RootSum::new(self.p, self.e);
        for (i, &a) in self.coeffs.iter().enumerate() {
            if a == 0 {
                continue;
            }
            for (j, &b) in other.coeffs.iter().enumerate() {
                if b != 0 {
                    s.add_root((i + j) as u64, a * b);
                }
            }
        }
        Ok(s.finish())
    }

    /// Complex conjugation ζ ↦ ζ^{-1}.
    pub fn conj(&self) -> Self {
        let level = self.level() as u64;
        let mut s = RootSum::new(self.p, self.e);
        for (k, &c) in self.coeffs.iter().enumerate() {
            if c != 0 {
                s.add_root((level - k as u64) % level, c);
            }
        }
        s.finish()
    }

    /// The same number at level p^{e2} ≥ p^e, via ζ_{p^e} = ζ_{p^{e2}}^{p^{e2-e}}.
    pub fn raise_level(&self, e2: u32) -> Result<Self> {
        if e2 < self.e {
            return Err(Error::LevelMismatch(self.level(), self.p.pow(e2)));
        }
        let t = self.p.pow(e2 - self.e) as usize;
        let mut out = Self::zero(self.p, e2);
        for (k, &c) in self.coeffs.iter().enumerate() {
            out.coeffs[k * t] = c;
        }
        Ok(out)
    }

    /// Inverse of `raise_level`, when the number lies in the smaller ring.
    pub fn lower_level(&self, e2: u32) -> Option<Self> {
        if e2 > self.e {
            return None;
        }
        let t = self.p.pow(self.e - e2) as usize;
        let mut out = Self::zero(self.p, e2);
        for (k, &c) in self.coeffs.iter().enumerate() {
            if k % t == 0 {
                out.coeffs[k / t] = c;
            } else if c != 0 {
                return None;
            }
        }
        Some(out)
    }

    /// Image in F_ℓ under ζ ↦ w, where w has multiplicative order E.
    pub fn evaluate_mod(&self, w: u64, ell: u64) -> u64 {
        let mut acc = 0u64;
        let mut pw = 1u64;
        for &c in &self.coeffs {
            let cm = c.rem_euclid(ell as i64) as u64;
            acc = (acc + cm * pw) % ell;
            pw = pw * w % ell;
        }
        acc
    }

    pub fn to_json(&self) -> Value {
        json!(self.coeffs)
    }
}

/// Accumulates Σ n_k ζ^k over a full period before a single reduction.
pub struct RootSum {
    p: u32,
    e: u32,
    counts: Vec<i64>,
}

impl RootSum {
    pub fn new(p: u32, e: u32) -> RootSum {
        RootSum {
            p,
            e,
            counts: vec![0; p.pow(e) as usize],
        }
    }

    pub fn add_root(&mut self, k: u64, n: i64) {
        let l = self.counts.len() as u64;
        self.counts[(k % l) as usize] += n;
    }

    pub fn add(&mut self, x: &CyclotomicInteger) {
        debug_assert_eq!((x.p, x.e), (self.p, self.e));
        for (c, &v) in self.counts.iter_mut().zip(&x.coeffs) {
            *c += v;
        }
    }

    /// Reduces modulo Φ_{p^e}(x) = Σ_{j<p} x^{j p^{e-1}}.
    pub fn finish(self) -> CyclotomicInteger {
        let (p, e) = (self.p, self.e);
        let phi = phi_of(p, e);
        let mut coeffs = self.counts;
        if e > 0 {
            let block = p.pow(e - 1) as usize;
            for k in phi..coeffs.len() {
                let c = coeffs[k];
                if c == 0 {
                    continue;
                }
                let r = k - phi;
                for j in 0..(p - 1) as usize {
                    coeffs[j * block + r] -= c;
                }
            }
        }
        coeffs.truncate(phi);
        CyclotomicInteger { p, e, coeffs }
    }
}

/// A class function on an algebra group, one value per conjugacy class, at
/// the level of the group's exponent.
#[derive(Clone)]
pub struct ClassFunction {
    pub group: Arc<AlgebraGroup>,
    pub values: Vec<CyclotomicInteger>,
}

impl PartialEq for ClassFunction {
    fn eq(&self, other: &Self) -> bool {
        Arc::ptr_eq(&self.group, &other.group) && self.values == other.values
    }
}

impl Eq for ClassFunction {}

impl fmt::Debug for ClassFunction {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_list().entries(&self.values).finish()
    }
}

/// (p, e) with p^e the exponent of the group.
pub fn group_level(g: &AlgebraGroup) -> (u32, u32) {
    let p = g.field().p();
    prime_power(g.exponent(), p).expect("exponent of a p-group is a power of p")
}

impl ClassFunction {
    pub fn level(&self) -> u32 {
        self.group.exponent()
    }

    pub fn trivial(g: &Arc<AlgebraGroup>) -> ClassFunction {
        let (p, e) = group_level(g);
        ClassFunction {
            group: g.clone(),
            values: vec![CyclotomicInteger::from_int(p, e, 1); g.num_classes()],
        }
    }

    /// A linear character of the group's own abelianization.
    pub fn from_linear(g: &Arc<AlgebraGroup>, chi: &LinearCharacter) -> Result<ClassFunction> {
        let (p, e) = group_level(g);
        let level = p.pow(e);
        let values = g
            .classes()
            .reps
            .iter()
            .map(|&r| Ok(CyclotomicInteger::root(p, e, chi.value_at_level(r, level)? as u64)))
            .collect::<Result<_>>()?;
        Ok(ClassFunction {
            group: g.clone(),
            values,
        })
    }

    pub fn value_at(&self, g: u32) -> &CyclotomicInteger {
        &self.values[self.group.class_of(g)]
    }

    pub fn degree(&self) -> i64 {
        self.values[0]
            .as_integer()
            .expect("value at the identity is an integer")
    }

    fn check_group(&self, other: &ClassFunction) -> Result<()> {
        if !Arc::ptr_eq(&self.group, &other.group) {
            return Err(Error::GroupMismatch);
        }
        Ok(())
    }

    pub fn add(&self, other: &ClassFunction) -> Result<ClassFunction> {
        self.check_group(other)?;
        Ok(ClassFunction {
            group: self.group.clone(),
            values: self
                .values
                .iter()
                .zip(&other.values)
                .map(|(a, b)| a.add(b))
                .collect::<Result<_>>()?,
        })
    }

    pub fn mul(&self, other: &ClassFunction) -> Result<ClassFunction> {
        self.check_group(other)?;
        Ok(ClassFunction {
            group: self.group.clone(),
            values: self
                .values
                .iter()
                .zip(&other.values)
                .map(|(a, b)| a.mul(b))
                .collect::<Result<_>>()?,
        })
    }

    pub fn conj(&self) -> ClassFunction {
        ClassFunction {
            group: self.group.clone(),
            values: self.values.iter().map(|v| v.conj()).collect(),
        }
    }

    /// ⟨f1, f2⟩ = (1/|G|) Σ_g f1(g) conj(f2(g)), asserted to be an integer.
    pub fn inner_product(&self, other: &ClassFunction) -> Result<i64> {
        self.check_group(other)?;
        let g = &self.group;
        let (p, e) = group_level(g);
        let mut acc = RootSum::new(p, e);
        for ((a, b), &size) in self.values.iter().zip(&other.values).zip(&g.classes().sizes) {
            acc.add(&a.mul(&b.conj())?.scalar_mul(size as i64));
        }
        let total = acc.finish();
        let order = g.order() as i64;
        match total.as_integer() {
            Some(n) if n % order == 0 => Ok(n / order),
            _ => Err(Error::NotAnInteger(format!("{total:?} over |G| = {order}"))),
        }
    }

    pub fn is_irreducible(&self) -> Result<bool> {
        Ok(self.inner_product(self)? == 1)
    }

    /// Restriction to an algebra subgroup.
    pub fn restrict(&self, h: &Subgroup) -> Result<ClassFunction> {
        let (_, eh) = group_level(&h.group);
        let values = h
            .group
            .classes()
            .reps
            .iter()
            .map(|&r| {
                self.value_at(h.include(r))
                    .lower_level(eh)
                    .ok_or_else(|| Error::Inconsistent("restricted value outside the subgroup's ring".into()))
            })
            .collect::<Result<_>>()?;
        Ok(ClassFunction {
            group: h.group.clone(),
            values,
        })
    }

    /// Induction from the subgroup h to `parent` by the coset formula
    /// (Ind f)(g) = Σ_{x ∈ G/H, x⁻¹gx ∈ H} f(x⁻¹gx).
    pub fn induce(&self, h: &Subgroup, parent: &Arc<AlgebraGroup>) -> Result<ClassFunction> {
        if !Arc::ptr_eq(&self.group, &h.group) {
            return Err(Error::NotSubgroup);
        }
        let (p, e) = group_level(parent);
        let lifted: Vec<CyclotomicInteger> = self
            .values
            .iter()
            .map(|v| v.raise_level(e))
            .collect::<Result<_>>()?;
        let transversal = h.transversal(parent);
        let inverses: Vec<u32> = transversal.iter().map(|&x| parent.inv(x)).collect();
        let values = parent
            .classes()
            .reps
            .iter()
            .map(|&g| {
                let mut acc = RootSum::new(p, e);
                for (&x, &xi) in transversal.iter().zip(&inverses) {
                    let y = parent.mul(parent.mul(xi, g), x);
                    if let Some(hy) = h.project(parent, y) {
                        acc.add(&lifted[h.group.class_of(hy)]);
                    }
                }
                acc.finish()
            })
            .collect();
        Ok(ClassFunction {
            group: parent.clone(),
            values,
        })
    }

    pub fn to_json(&self) -> Value {
        let classes: Vec<Value> = self
            .group
            .classes()
            .reps
            .iter()
            .zip(&self.values)
            .map(|(&r, v)| {
                json!({
                    "rep": self.group.decode(r).iter().map(|x| x.0).collect::<Vec<_>>(),
                    "value": v.coeffs,
                })
            })
            .collect();
        json!({"level": self.level(), "classes": classes})
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::gf::make_field;
    use crate::linalg::Subspace;
    use crate::nilalg::{builtin_algebra, BuiltinKind};

    fn group(kind: BuiltinKind, p: u32, m: u32) -> Arc<AlgebraGroup> {
        let f = make_field(p, m, None).unwrap();
        AlgebraGroup::new(Arc::new(builtin_algebra(&kind, &f).unwrap())).unwrap()
    }

    #[test]
    fn arithmetic_examples() {
        let z4 = CyclotomicInteger::root(2, 2, 1);
        assert!(z4.add(&z4.conj()).unwrap().is_zero());
        assert_eq!(z4.mul(&z4).unwrap(), CyclotomicInteger::from_int(2, 2, -1));
        assert_eq!(CyclotomicInteger::root(2, 1, 1), CyclotomicInteger::from_int(2, 1, -1));
        let z3 = CyclotomicInteger::root(3, 1, 1);
        // 1 + ζ_3 + ζ_3² = 0
        let s = CyclotomicInteger::from_int(3, 1, 1)
            .add(&z3)
            .unwrap()
            .add(&z3.mul(&z3).unwrap())
            .unwrap();
        assert!(s.is_zero());
        assert_eq!(z4.add(&z3), Err(Error::LevelMismatch(4, 3)));
        let raised = CyclotomicInteger::root(2, 1, 1).raise_level(2).unwrap();
        assert_eq!(raised, z4.mul(&z4).unwrap());
        assert_eq!(raised.lower_level(1).unwrap(), CyclotomicInteger::root(2, 1, 1));
        assert!(z4.lower_level(1).is_none());
    }

    #[test]
    fn linear_character_values() {
        let x2 = group(BuiltinKind::TruncatedPoly(2), 2, 1);
        let q = x2.abelianization();
        let f = ClassFunction::from_linear(&x2, &q.character_group()[1]).unwrap();
        assert_eq!(f.value_at(1), &CyclotomicInteger::from_int(2, 1, -1));
        let t3 = group(BuiltinKind::TruncatedPoly(3), 2, 1);
        let q = t3.abelianization();
        let f = ClassFunction::from_linear(&t3, &q.character(vec![1]).unwrap()).unwrap();
        assert_eq!(f.value_at(1), &CyclotomicInteger::root(2, 2, 1));
        let triv = ClassFunction::from_linear(&t3, &q.trivial_character()).unwrap();
        assert_eq!(triv, ClassFunction::trivial(&t3));
        assert_eq!(triv.inner_product(&triv).unwrap(), 1);
        assert_eq!(triv.inner_product(&f).unwrap(), 0);
    }

    #[test]
    fn induction_on_u3() {
        let g = group(BuiltinKind::UpperTriangular(3), 2, 1);
        let f2 = g.field().clone();
        let v = |a: &[u32]| a.iter().map(|&x| crate::gf::FieldElement(x)).collect::<Vec<_>>();
        let h = g
            .subgroup(&Subspace::span(&f2, 3, vec![v(&[1, 0, 0]), v(&[0, 0, 1])]))
            .unwrap();
        let hq = h.group.abelianization();
        // sub codes: 1+b1 → 1, 1+b3 → 2
        let lambda = hq
            .character_group()
            .into_iter()
            .find(|c| c.value(2) != 0 && c.value(1) == 0)
            .unwrap();
        let lf = ClassFunction::from_linear(&h.group, &lambda).unwrap();
        let ind = lf.induce(&h, &g).unwrap();
        let ints: Vec<i64> = ind.values.iter().map(|x| x.as_integer().unwrap()).collect();
        // classes in code order: 1, 1+b1, 1+b2, 1+b1+b2, 1+b3
        assert_eq!(ints, vec![2, 0, 0, 0, -2]);
        assert_eq!(ind.inner_product(&ind).unwrap(), 1);
        assert!(ind.is_irreducible().unwrap());
        let triv_h = ClassFunction::trivial(&h.group);
        assert_eq!(triv_h.induce(&h, &g).unwrap().degree(), 2);
        let whole = g.subgroup(&Subspace::full(3)).unwrap();
        let f = ClassFunction::trivial(&whole.group);
        assert_eq!(f.induce(&whole, &g).unwrap().values, ClassFunction::trivial(&g).values);
    }
}
