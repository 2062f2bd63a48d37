//! Irreducible characters through the reduction process, monomial forms,
//! and the base change maps T_k^{k'} on irreducibles.

pub mod experiments;

use std::collections::{HashMap, VecDeque};
use std::sync::atomic::{AtomicU64, Ordering};
use std::sync::{Arc, Mutex};

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde_json::{json, Value};

use crate::algrp::{stabilizer_scan, AlgebraGroup, LinearCharacter, Subgroup};
use crate::cyclo::{group_level, ClassFunction, CyclotomicInteger};
use crate::error::{Error, Result};
use crate::heis::{HeisContext, ShDatum};
use crate::k1norm::Extension;
use crate::linalg::Subspace;

/// How an irreducible was obtained: directly from SH data, or by inducing
/// an irreducible of the stabilizer G^ψ = 1+U of a constituent ψ of the
/// restriction to 1+A².
pub enum Chain {
    Terminal(ShDatum),
    Step {
        stabilizer: Subspace,
        sub: Arc<Subgroup>,
        /// ψ, an irreducible of 1+A² (as its own algebra group).
        psi: Arc<Irrep>,
        /// The irreducible of G^ψ lying over ψ.
        inner: Arc<Irrep>,
    },
}

/// An irreducible character together with its reduction chain.
pub struct Irrep {
    pub group: Arc<AlgebraGroup>,
    pub chain: Chain,
    pub character: ClassFunction,
    pub fdim: u32,
    pub sh: u32,
}

impl std::fmt::Debug for Irrep {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "Irrep(degree={}, sh={})", self.degree(), self.sh)
    }
}

impl Irrep {
    pub fn degree(&self) -> u64 {
        self.character.degree() as u64
    }

    /// The subgroups G_1 ⊋ G_2 ⊋ ... of the chain as subspaces of A, each
    /// with the constituent ψ chosen at that step.
    pub fn steps(&self) -> Vec<(Subspace, Arc<Irrep>)> {
        match &self.chain {
            Chain::Terminal(_) => Vec::new(),
            Chain::Step {
                stabilizer,
                inner,
                psi,
                ..
            } => {
                let alg = self.group.algebra();
                let f = alg.field();
                let mut out = vec![(stabilizer.clone(), psi.clone())];
                for (w, p) in inner.steps() {
                    let rows = w.rows.iter().map(|r| stabilizer.combine(f, r));
                    out.push((Subspace::span(f, alg.dim(), rows), p));
                }
                out
            }
        }
    }

    /// The SH datum at the end of the chain, and the subspace of A carrying it.
    pub fn terminal(&self) -> (&ShDatum, Subspace) {
        match &self.chain {
            Chain::Terminal(d) => (d, Subspace::full(self.group.dim())),
            Chain::Step {
                stabilizer, inner, ..
            } => {
                let (d, w) = inner.terminal();
                let f = self.group.field();
                let rows = w.rows.iter().map(|r| stabilizer.combine(f, r));
                (d, Subspace::span(f, self.group.dim(), rows))
            }
        }
    }

    pub fn to_json(&self) -> Value {
        let steps: Vec<Value> = self
            .steps()
            .iter()
            .map(|(u, psi)| {
                json!({
                    "subgroup": u.to_codes(),
                    "central_char": psi.character.to_json(),
                })
            })
            .collect();
        let (d, w) = self.terminal();
        json!({
            "degree": self.degree(),
            "fdim": self.fdim,
            "sh": self.sh,
            "steps": steps,
            "terminal": {"subgroup": w.to_codes(), "datum": d.to_json()},
            "character": self.character.to_json(),
        })
    }
}

/// log_q(degree), or the Isaacs violation.
pub fn fdim_of(degree: u64, q: u64) -> Result<u32> {
    let mut x = 1u64;
    let mut n = 0;
    while x < degree {
        x *= q;
        n += 1;
    }
    if x == degree {
        Ok(n)
    } else {
        Err(Error::NotAPowerOfQ { degree, q })
    }
}

fn at_level(x: &CyclotomicInteger, e: u32) -> Result<CyclotomicInteger> {
    if e >= x.exponent_e() {
        x.raise_level(e)
    } else {
        x.lower_level(e)
            .ok_or_else(|| Error::Inconsistent("value outside the target cyclotomic ring".into()))
    }
}

/// The class function on `target` given by x ↦ f(to_src(x)).
pub fn transport(
    f: &ClassFunction,
    target: &Arc<AlgebraGroup>,
    to_src: impl Fn(u32) -> u32,
) -> Result<ClassFunction> {
    let (_, e) = group_level(target);
    let values = target
        .classes()
        .reps
        .iter()
        .map(|&r| at_level(f.value_at(to_src(r)), e))
        .collect::<Result<_>>()?;
    Ok(ClassFunction {
        group: target.clone(),
        values,
    })
}

/// The linear character of the group's abelianization with the given
/// degree-one class function.
pub fn linear_of(f: &ClassFunction) -> Result<LinearCharacter> {
    let g = &f.group;
    if f.degree() != 1 {
        return Err(Error::InvariantNotLinear(f.degree() as u64));
    }
    let (p, e) = group_level(g);
    let level = p.pow(e);
    let roots: HashMap<CyclotomicInteger, u32> = (0..level)
        .map(|k| (CyclotomicInteger::root(p, e, k as u64), k))
        .collect();
    let quot = g.abelianization();
    let ex = quot.exponent;
    let mut bad = false;
    let chi = quot.character_from_values(|x| match roots.get(f.value_at(x)) {
        Some(&k) if (k as u64 * ex as u64) % level as u64 == 0 => (k as u64 * ex as u64 / level as u64) as u32,
        _ => {
            bad = true;
            0
        }
    });
    if bad {
        return Err(Error::Inconsistent("degree-one class function is not a character".into()));
    }
    if ClassFunction::from_linear(g, &chi)? != *f {
        return Err(Error::Inconsistent("degree-one class function is not a homomorphism".into()));
    }
    Ok(chi)
}

/// For conjugation by c: class j of H goes to the class of c⁻¹·rep_j·c, so
/// that (ψ^c)(rep_j) = ψ(rep of perm[j]).
fn class_action(g: &AlgebraGroup, h: &Subgroup, c: u32) -> Vec<usize> {
    let ci = g.inv(c);
    h.group
        .classes()
        .reps
        .iter()
        .map(|&r| {
            let y = g.mul(g.mul(ci, h.include(r)), c);
            h.group.class_of(h.project(g, y).expect("normal subgroup"))
        })
        .collect()
}

fn fixes(psi: &ClassFunction, perm: &[usize]) -> bool {
    perm.iter().enumerate().all(|(j, &pj)| psi.values[pj] == psi.values[j])
}

/// Stabilizer in G of an irreducible ψ of the normal subgroup h ⊇ 1+A².
pub fn stabilizer_of(g: &AlgebraGroup, h: &Subgroup, psi: &ClassFunction) -> Result<Subspace> {
    stabilizer_scan(g, |c| fixes(psi, &class_action(g, h, c)))
}

/// Is a class function on G' fixed by x ↦ x^{|k|}?
pub fn is_fr_invariant(ext: &Extension, f: &ClassFunction) -> bool {
    let g = &ext.ext;
    g.classes()
        .reps
        .iter()
        .enumerate()
        .all(|(j, &r)| *f.value_at(ext.frobenius(r)) == f.values[j])
}

/// Fr_q acting on class functions by (Fr·χ)(g) = χ(Fr⁻¹ g).
pub fn frobenius_action(f: &ClassFunction, q: u32) -> Result<ClassFunction> {
    let g = &f.group;
    let alg = g.algebra();
    let values = g
        .classes()
        .reps
        .iter()
        .map(|&r| {
            let x = g.encode(&alg.frobenius_inv(q, &g.decode(r))?);
            Ok(f.value_at(x).clone())
        })
        .collect::<Result<_>>()?;
    Ok(ClassFunction {
        group: g.clone(),
        values,
    })
}

/// The orbit of χ under Fr_q, starting with χ.
pub fn galois_orbit(f: &ClassFunction, q: u32) -> Result<Vec<ClassFunction>> {
    let mut out = vec![f.clone()];
    loop {
        let next = frobenius_action(out.last().unwrap(), q)?;
        if next == out[0] {
            return Ok(out);
        }
        out.push(next);
    }
}

/// Irreducible characters determine isomorphism classes.
pub fn iso_test(a: &Irrep, b: &Irrep) -> bool {
    a.character == b.character
}

/// Σ deg² = |G|, one irreducible per conjugacy class, ⟨χ, χ⟩ = 1 for each
/// and no repeats. The χ are characters by construction, so distinct ones
/// of norm 1 are orthonormal.
pub fn verify_completeness(g: &AlgebraGroup, irreps: &[Arc<Irrep>]) -> Result<()> {
    let got: u64 = irreps.iter().map(|r| r.degree() * r.degree()).sum();
    if got != g.order() as u64 {
        return Err(Error::SumOfSquaresMismatch {
            got,
            expected: g.order() as u64,
        });
    }
    if irreps.len() != g.num_classes() {
        return Err(Error::Inconsistent(format!(
            "{} irreducibles for {} classes",
            irreps.len(),
            g.num_classes()
        )));
    }
    let mut seen = HashMap::new();
    for (i, r) in irreps.iter().enumerate() {
        if let Some(j) = seen.insert(&r.character.values, i) {
            return Err(Error::Inconsistent(format!("χ_{j} = χ_{i}")));
        }
    }
    let bad = irreps.par_iter().enumerate().find_map_first(|(i, r)| match r.character.inner_product(&r.character) {
        Ok(1) => None,
        Ok(v) => Some(Error::Inconsistent(format!("⟨χ_{i}, χ_{i}⟩ = {v}"))),
        Err(e) => Some(e),
    });
    match bad {
        Some(e) => Err(e),
        None => Ok(()),
    }
}

/// Result of the first reduction step applied to an irreducible character.
pub struct Reduction {
    /// G_1 = G^ψ for the least constituent ψ.
    pub stabilizer: Subspace,
    pub psi: Arc<Irrep>,
    /// Constituents of the restriction to 1+A² with multiplicities.
    pub constituents: Vec<(Arc<Irrep>, i64)>,
    pub strongly_heisenberg: bool,
}

type GroupKey = usize;

fn key(g: &Arc<AlgebraGroup>) -> GroupKey {
    Arc::as_ptr(g) as usize
}

/// Enumerates irreducibles recursively, caching per group. With a seed,
/// orbit representatives and isotropic scan orders are randomized.
#[derive(Default)]
pub struct Engine {
    seed: Option<u64>,
    irreps: Mutex<HashMap<GroupKey, (Arc<AlgebraGroup>, Arc<Vec<Arc<Irrep>>>)>>,
    heis: Mutex<HashMap<GroupKey, (Arc<AlgebraGroup>, Arc<HeisContext>)>>,
    /// Number of G-invariant irreducibles of 1+A² met during enumeration.
    pub invariant_checks: AtomicU64,
}

impl Engine {
    pub fn new() -> Engine {
        Engine::default()
    }

    pub fn with_seed(seed: u64) -> Engine {
        Engine {
            seed: Some(seed),
            ..Engine::default()
        }
    }

    fn sub_seed(&self, salt: u64) -> Option<u64> {
        self.seed
            .map(|s| s ^ salt.wrapping_add(1).wrapping_mul(0x9e37_79b9_7f4a_7c15))
    }

    pub fn heis(&self, g: &Arc<AlgebraGroup>) -> Result<Arc<HeisContext>> {
        if let Some((_, c)) = self.heis.lock().unwrap().get(&key(g)) {
            return Ok(c.clone());
        }
        let c = Arc::new(HeisContext::new(g)?);
        let mut cache = self.heis.lock().unwrap();
        Ok(cache.entry(key(g)).or_insert((g.clone(), c)).1.clone())
    }

    fn terminal(&self, ctx: &HeisContext, d: ShDatum, salt: u64) -> Result<Arc<Irrep>> {
        let g = &ctx.group;
        let character = ctx.character_with(&d, self.sub_seed(salt))?;
        let fdim = fdim_of(character.degree() as u64, g.field().size() as u64)?;
        Ok(Arc::new(Irrep {
            group: g.clone(),
            chain: Chain::Terminal(d),
            character,
            fdim,
            sh: 0,
        }))
    }

    /// All irreducibles of G, verified complete and orthonormal.
    pub fn irreps(&self, g: &Arc<AlgebraGroup>) -> Result<Arc<Vec<Arc<Irrep>>>> {
        if let Some((_, v)) = self.irreps.lock().unwrap().get(&key(g)) {
            return Ok(v.clone());
        }
        let out = Arc::new(self.enumerate(g)?);
        let mut cache = self.irreps.lock().unwrap();
        Ok(cache.entry(key(g)).or_insert((g.clone(), out)).1.clone())
    }

    /// Indices of ψ^c for each generator c, over the irreducibles of 1+A².
    fn conjugation_permutations(&self, ctx: &HeisContext, hirr: &[Arc<Irrep>]) -> Result<Vec<Vec<usize>>> {
        let g = &ctx.group;
        let index: HashMap<&[CyclotomicInteger], usize> = hirr
            .iter()
            .enumerate()
            .map(|(i, r)| (r.character.values.as_slice(), i))
            .collect();
        g.generators()
            .iter()
            .map(|&c| {
                let perm = class_action(g, &ctx.h, c);
                hirr.iter()
                    .map(|r| {
                        let moved: Vec<CyclotomicInteger> =
                            perm.iter().map(|&j| r.character.values[j].clone()).collect();
                        index
                            .get(moved.as_slice())
                            .copied()
                            .ok_or_else(|| Error::Inconsistent("conjugate of an irreducible is missing".into()))
                    })
                    .collect()
            })
            .collect()
    }

    fn orbits(perms: &[Vec<usize>], n: usize) -> Vec<Vec<usize>> {
        let mut seen = vec![false; n];
        let mut out = Vec::new();
        for start in 0..n {
            if seen[start] {
                continue;
            }
            seen[start] = true;
            let mut orbit = vec![start];
            let mut queue = VecDeque::from([start]);
            while let Some(i) = queue.pop_front() {
                for p in perms {
                    let j = p[i];
                    if !seen[j] {
                        seen[j] = true;
                        orbit.push(j);
                        queue.push_back(j);
                    }
                }
            }
            orbit.sort_unstable();
            out.push(orbit);
        }
        out
    }

    fn enumerate(&self, g: &Arc<AlgebraGroup>) -> Result<Vec<Arc<Irrep>>> {
        let ctx = self.heis(g)?;
        let mut out = Vec::new();
        if ctx.a2.is_zero() {
            for (i, d) in ctx.classify()?.into_iter().enumerate() {
                out.push(self.terminal(&ctx, d, i as u64)?);
            }
            verify_completeness(g, &out)?;
            return Ok(out);
        }
        let hirr = self.irreps(&ctx.h.group)?;
        let perms = self.conjugation_permutations(&ctx, &hirr)?;
        let full = Subspace::full(g.dim());
        for (oi, orbit) in Self::orbits(&perms, hirr.len()).into_iter().enumerate() {
            let rep = match self.sub_seed(oi as u64 + (g.order() as u64) << 20) {
                Some(s) => *orbit.choose(&mut ChaCha8Rng::seed_from_u64(s)).unwrap(),
                None => orbit[0],
            };
            let psi = &hirr[rep];
            let stab = stabilizer_of(g, &ctx.h, &psi.character)?;
            let sub = g.subgroup(&stab)?;
            if orbit.len() as u32 != sub.index(g) {
                return Err(Error::Inconsistent(format!(
                    "orbit of size {} but stabilizer of index {}",
                    orbit.len(),
                    sub.index(g)
                )));
            }
            if stab == full {
                self.invariant_checks.fetch_add(1, Ordering::Relaxed);
                if psi.degree() != 1 {
                    return Err(Error::InvariantNotLinear(psi.degree()));
                }
                let phi = linear_of(&psi.character)?;
                for (i, d) in ctx.classify_for(&phi)?.into_iter().enumerate() {
                    out.push(self.terminal(&ctx, d, (oi as u64) << 16 | i as u64)?);
                }
            } else {
                for theta in self.lying_over(g, &ctx, &sub, psi)? {
                    out.push(self.induce_step(g, &sub, psi.clone(), theta)?);
                }
            }
        }
        verify_completeness(g, &out)?;
        Ok(out)
    }

    /// 1+A² as a subgroup of the algebra group of 1+U ⊇ 1+A².
    fn a2_inside(&self, g: &AlgebraGroup, ctx: &HeisContext, sub: &Subgroup) -> Result<Arc<Subgroup>> {
        let f = g.field();
        let rows = ctx
            .a2
            .rows
            .iter()
            .map(|r| sub.space.coordinates(f, r).ok_or(Error::NotSubgroup))
            .collect::<Result<Vec<_>>>()?;
        sub.group.subgroup(&Subspace::span(f, sub.space.rank(), rows))
    }

    /// ψ as a class function on 1+A² sitting inside the subgroup `sub`.
    fn psi_inside(&self, g: &AlgebraGroup, ctx: &HeisContext, sub: &Subgroup, hk: &Subgroup, psi: &ClassFunction) -> Result<ClassFunction> {
        transport(psi, &hk.group, |x| {
            ctx.h
                .project(g, sub.include(hk.include(x)))
                .expect("same subgroup 1+A²")
        })
    }

    /// Irreducibles of 1+U lying over ψ.
    fn lying_over(&self, g: &AlgebraGroup, ctx: &HeisContext, sub: &Subgroup, psi: &Irrep) -> Result<Vec<Arc<Irrep>>> {
        let kirr = self.irreps(&sub.group)?;
        let hk = self.a2_inside(g, ctx, sub)?;
        let psi_k = self.psi_inside(g, ctx, sub, &hk, &psi.character)?;
        let mut out = Vec::new();
        for theta in kirr.iter() {
            if theta.character.restrict(&hk)?.inner_product(&psi_k)? != 0 {
                out.push(theta.clone());
            }
        }
        Ok(out)
    }

    fn induce_step(&self, g: &Arc<AlgebraGroup>, sub: &Arc<Subgroup>, psi: Arc<Irrep>, theta: Arc<Irrep>) -> Result<Arc<Irrep>> {
        let character = theta.character.induce(sub, g)?;
        let fdim = fdim_of(character.degree() as u64, g.field().size() as u64)?;
        Ok(Arc::new(Irrep {
            group: g.clone(),
            chain: Chain::Step {
                stabilizer: sub.space.clone(),
                sub: sub.clone(),
                psi,
                inner: theta.clone(),
            },
            character,
            fdim,
            sh: theta.sh + 1,
        }))
    }

    /// The first reduction step at the level of characters.
    pub fn reduction_step(&self, g: &Arc<AlgebraGroup>, chi: &ClassFunction) -> Result<Reduction> {
        if !chi.is_irreducible()? {
            return Err(Error::NotIrreducible);
        }
        let ctx = self.heis(g)?;
        let hirr = self.irreps(&ctx.h.group)?;
        let res = chi.restrict(&ctx.h)?;
        let mut constituents = Vec::new();
        for psi in hirr.iter() {
            let m = res.inner_product(&psi.character)?;
            if m != 0 {
                constituents.push((psi.clone(), m));
            }
        }
        let (psi, m0) = constituents
            .first()
            .cloned()
            .ok_or_else(|| Error::Inconsistent("restriction has no constituents".into()))?;
        if constituents.iter().any(|(_, m)| *m != m0) {
            return Err(Error::Inconsistent("unequal multiplicities in the restriction".into()));
        }
        let stabilizer = stabilizer_of(g, &ctx.h, &psi.character)?;
        let index = g.subgroup(&stabilizer)?.index(g) as usize;
        if index != constituents.len() {
            return Err(Error::Inconsistent("constituents do not form a single orbit".into()));
        }
        // the orbit of ψ must be exactly the constituent set
        for (other, _) in &constituents {
            let conj = g.elements().any(|c| {
                let perm = class_action(g, &ctx.h, c);
                perm.iter()
                    .enumerate()
                    .all(|(j, &pj)| psi.character.values[pj] == other.character.values[j])
            });
            if !conj {
                return Err(Error::Inconsistent("constituents do not form a single orbit".into()));
            }
        }
        Ok(Reduction {
            strongly_heisenberg: constituents.len() == 1 && psi.degree() == 1,
            stabilizer,
            psi,
            constituents,
        })
    }

    /// (B, λ) with ρ = Ind_{1+B}^G λ, checked by comparing characters.
    pub fn monomialize(&self, rho: &Irrep) -> Result<(Subspace, LinearCharacter)> {
        let g = &rho.group;
        let (b, lambda) = self.monomial_data(rho)?;
        let bs = g.subgroup(&b)?;
        if !g.algebra().is_subalgebra(&b) {
            return Err(Error::NotSubgroup);
        }
        let induced = ClassFunction::from_linear(&bs.group, &lambda)?.induce(&bs, g)?;
        if induced != rho.character {
            return Err(Error::Inconsistent("monomial induction does not reproduce ρ".into()));
        }
        Ok((b, lambda))
    }

    fn monomial_data(&self, rho: &Irrep) -> Result<(Subspace, LinearCharacter)> {
        let g = &rho.group;
        match &rho.chain {
            Chain::Terminal(d) => self.heis(g)?.induction_data(d, None),
            Chain::Step { sub, inner, .. } => {
                let (bi, li) = self.monomial_data(inner)?;
                let f = g.field();
                let b = Subspace::span(f, g.dim(), bi.rows.iter().map(|r| sub.space.combine(f, r)));
                let inner_sub = sub.group.subgroup(&bi)?;
                let bs = g.subgroup(&b)?;
                let (eo, ei) = (bs.group.abelianization().exponent as u64, li.quotient.exponent as u64);
                let lambda = bs.group.abelianization().character_from_values(|x| {
                    let in_k = sub.project(g, bs.include(x)).expect("B ⊆ U");
                    let y = inner_sub.project(&sub.group, in_k).expect("same subgroup");
                    (li.value(y) as u64 * eo / ei) as u32
                });
                Ok((b, lambda))
            }
        }
    }

    /// T_k^{k'}(ρ) following the chain: norms on the terminal SH datum,
    /// base change of ψ and of the inner irreducible at every step.
    pub fn base_change(&self, lift: &Lift, rho: &Arc<Irrep>) -> Result<Arc<Irrep>> {
        if !Arc::ptr_eq(&rho.group, &lift.ext.base) {
            return Err(Error::GroupMismatch);
        }
        if let Some((_, img)) = lift.images.lock().unwrap().get(&(Arc::as_ptr(rho) as usize)) {
            return Ok(img.clone());
        }
        let img = self.base_change_uncached(lift, rho)?;
        let mut cache = lift.images.lock().unwrap();
        Ok(cache
            .entry(Arc::as_ptr(rho) as usize)
            .or_insert((rho.clone(), img))
            .1
            .clone())
    }

    fn base_change_uncached(&self, lift: &Lift, rho: &Arc<Irrep>) -> Result<Arc<Irrep>> {
        let ext = &lift.ext;
        let gp = &ext.ext;
        let target = self.heis(gp)?;
        let out = match &rho.chain {
            Chain::Terminal(d) => {
                let base = self.heis(&ext.base)?;
                let d2 = base.base_change(ext, &target, d)?;
                let character = target
                    .character_with(&d2, self.sub_seed(rho.character.degree() as u64))
                    .map_err(|e| match e {
                        Error::NotIrreducible => Error::NotIrreducibleAfterBaseChange,
                        e => e,
                    })?;
                let fdim = fdim_of(character.degree() as u64, gp.field().size() as u64)?;
                Arc::new(Irrep {
                    group: gp.clone(),
                    chain: Chain::Terminal(d2),
                    character,
                    fdim,
                    sh: 0,
                })
            }
            Chain::Step {
                stabilizer,
                psi,
                inner,
                ..
            } => {
                let base = self.heis(&ext.base)?;
                let theta2 = self.base_change(&*lift.sub(stabilizer)?, inner)?;
                let psi2 = self.base_change(&*lift.sub(&base.a2)?, psi)?;
                if !Arc::ptr_eq(&psi2.group, &target.h.group) {
                    return Err(Error::Inconsistent("1+A'² differs from the scalar extension of 1+A²".into()));
                }
                let sub2 = gp.subgroup(&ext.lift(stabilizer))?;
                let irr = self.induce_step(gp, &sub2, psi2.clone(), theta2.clone())?;
                if !irr.character.is_irreducible()? {
                    return Err(Error::NotIrreducibleAfterBaseChange);
                }
                // the image's first reduction step through ψ̃ recovers (G'_1, θ̃)
                if irr.character.restrict(&target.h)?.inner_product(&psi2.character)? == 0 {
                    return Err(Error::ReductionMismatch);
                }
                if stabilizer_of(gp, &target.h, &psi2.character)? != sub2.space {
                    return Err(Error::ReductionMismatch);
                }
                let hk = self.a2_inside(gp, &target, &sub2)?;
                let psi_k = self.psi_inside(gp, &target, &sub2, &hk, &psi2.character)?;
                if theta2.character.restrict(&hk)?.inner_product(&psi_k)? == 0 {
                    return Err(Error::ReductionMismatch);
                }
                irr
            }
        };
        if !is_fr_invariant(ext, &out.character) {
            return Err(Error::NotGaloisInvariant);
        }
        Ok(out)
    }
}

/// An extension k ⊆ k' for one algebra group, with the induced extensions
/// of its algebra subgroups and a cache of computed images.
pub struct Lift {
    pub ext: Arc<Extension>,
    subs: Mutex<HashMap<Subspace, Arc<Lift>>>,
    images: Mutex<HashMap<usize, (Arc<Irrep>, Arc<Irrep>)>>,
}

impl Lift {
    pub fn new(ext: Extension) -> Arc<Lift> {
        Arc::new(Lift {
            ext: Arc::new(ext),
            subs: Mutex::new(HashMap::new()),
            images: Mutex::new(HashMap::new()),
        })
    }

    pub fn of(base: &Arc<AlgebraGroup>, n: u32) -> Result<Arc<Lift>> {
        Ok(Lift::new(Extension::new(base.clone(), n)?))
    }

    /// The extension 1+U ⊆ 1+U'.
    pub fn sub(&self, u: &Subspace) -> Result<Arc<Lift>> {
        if let Some(l) = self.subs.lock().unwrap().get(u) {
            return Ok(l.clone());
        }
        let (bs, es) = self.ext.subgroups(u)?;
        let l = Lift::new(Extension::between(bs.group.clone(), es.group.clone())?);
        let mut cache = self.subs.lock().unwrap();
        Ok(cache.entry(u.clone()).or_insert(l).clone())
    }

    pub fn base(&self) -> &Arc<AlgebraGroup> {
        &self.ext.base
    }

    pub fn target(&self) -> &Arc<AlgebraGroup> {
        &self.ext.ext
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::gf::{make_field, FieldElement};
    use crate::nilalg::{builtin_algebra, BuiltinKind};

    fn group(kind: BuiltinKind, p: u32, m: u32) -> Arc<AlgebraGroup> {
        let f = make_field(p, m, None).unwrap();
        AlgebraGroup::new(Arc::new(builtin_algebra(&kind, &f).unwrap())).unwrap()
    }

    fn degrees(irr: &[Arc<Irrep>]) -> Vec<u64> {
        let mut d: Vec<u64> = irr.iter().map(|r| r.degree()).collect();
        d.sort_unstable();
        d
    }

    #[test]
    fn small_examples() {
        let e = Engine::new();
        let x2 = e.irreps(&group(BuiltinKind::TruncatedPoly(2), 2, 1)).unwrap();
        assert_eq!(degrees(&x2), vec![1, 1]);
        let u3 = e.irreps(&group(BuiltinKind::UpperTriangular(3), 2, 1)).unwrap();
        assert_eq!(degrees(&u3), vec![1, 1, 1, 1, 2]);
        assert!(u3.iter().all(|r| r.sh == 0));
        assert_eq!(u3[4].fdim, 1);
    }

    #[test]
    fn u4_over_f2() {
        let g = group(BuiltinKind::UpperTriangular(4), 2, 1);
        let e = Engine::new();
        let irr = e.irreps(&g).unwrap();
        let sum: u64 = irr.iter().map(|r| r.degree() * r.degree()).sum();
        assert_eq!(sum, 64);
        assert_eq!(irr.len(), g.num_classes());
        // centre of U4(F_2) is 1+F_2 e14, so d² ≤ 32
        assert!(irr.iter().all(|r| r.degree().is_power_of_two() && r.degree() * r.degree() <= 32));
        assert!(irr.iter().any(|r| r.sh >= 1));
        for r in irr.iter() {
            let red = e.reduction_step(&g, &r.character).unwrap();
            assert_eq!(red.strongly_heisenberg, r.sh == 0);
            if let Chain::Step { stabilizer, .. } = &r.chain {
                assert_eq!(&red.stabilizer, stabilizer);
                assert!(red.constituents.len() >= 2);
            }
            let (b, _) = e.monomialize(r).unwrap();
            assert_eq!(g.subgroup(&b).unwrap().index(&g) as u64, r.degree());
        }
    }

    #[test]
    fn u3_monomial_form() {
        let g = group(BuiltinKind::UpperTriangular(3), 2, 1);
        let e = Engine::new();
        let irr = e.irreps(&g).unwrap();
        let (b, lambda) = e.monomialize(&irr[4]).unwrap();
        let f = g.field();
        let one = FieldElement::ONE;
        let zero = FieldElement::ZERO;
        assert_eq!(b, Subspace::span(f, 3, [vec![one, zero, zero], vec![zero, zero, one]]));
        let bs = g.subgroup(&b).unwrap();
        let b1 = bs.project(&g, g.encode(&[one, zero, zero])).unwrap();
        let b3 = bs.project(&g, g.encode(&[zero, zero, one])).unwrap();
        assert_eq!(lambda.value(b1), 0);
        assert_ne!(lambda.value(b3), 0);
        let (b_lin, _) = e.monomialize(&irr[0]).unwrap();
        assert_eq!(b_lin, Subspace::full(3));
    }

    #[test]
    fn seeded_runs_agree() {
        let g = group(BuiltinKind::UpperTriangular(4), 2, 1);
        let base: Vec<ClassFunction> = Engine::new().irreps(&g).unwrap().iter().map(|r| r.character.clone()).collect();
        for seed in 0..3 {
            let other: Vec<ClassFunction> =
                Engine::with_seed(seed).irreps(&g).unwrap().iter().map(|r| r.character.clone()).collect();
            assert_eq!(other.len(), base.len());
            assert!(other.iter().all(|c| base.contains(c)));
        }
    }

    #[test]
    fn u3_base_change() {
        let g = group(BuiltinKind::UpperTriangular(3), 2, 1);
        let e = Engine::new();
        let lift = Lift::of(&g, 2).unwrap();
        let irr = e.irreps(&g).unwrap();
        let images: Vec<Arc<Irrep>> = irr.iter().map(|r| e.base_change(&lift, r).unwrap()).collect();
        assert_eq!(images[4].degree(), 4);
        assert_eq!(images[4].fdim, 1);
        for i in 0..images.len() {
            for j in 0..i {
                assert!(!iso_test(&images[i], &images[j]));
            }
        }
    }

    #[test]
    fn x2_base_change_is_trace_character() {
        let g = group(BuiltinKind::TruncatedPoly(2), 2, 1);
        let e = Engine::new();
        let lift = Lift::of(&g, 2).unwrap();
        let irr = e.irreps(&g).unwrap();
        let nontrivial = irr.iter().find(|r| !r.character.values.iter().all(|v| v.as_integer() == Some(1))).unwrap();
        let img = e.base_change(&lift, nontrivial).unwrap();
        let gp = lift.target();
        let f4 = gp.field();
        for a in f4.elements() {
            let tr = f4.trace_to_subfield(a, 1).unwrap();
            let expected = if tr.is_zero() { 1 } else { -1 };
            assert_eq!(img.character.value_at(gp.encode(&[a])).as_integer(), Some(expected));
        }
        assert_eq!(galois_orbit(&img.character, 2).unwrap().len(), 1);
        // x ↦ (-1)^Tr(ax) is Fr-fixed iff a ∈ F_2; the two with χ(1) = -1 are swapped
        let irr4 = e.irreps(gp).unwrap();
        let moved: Vec<_> = irr4
            .iter()
            .filter(|r| r.character.value_at(gp.encode(&[FieldElement(1)])).as_integer() == Some(-1))
            .collect();
        assert_eq!(moved.len(), 2);
        let orbit = galois_orbit(&moved[0].character, 2).unwrap();
        assert_eq!(orbit.len(), 2);
        assert_eq!(orbit[1], moved[1].character);
    }

    #[test]
    fn fdim_rejects_non_powers() {
        assert_eq!(fdim_of(1, 4), Ok(0));
        assert_eq!(fdim_of(16, 4), Ok(2));
        assert!(matches!(fdim_of(8, 4), Err(Error::NotAPowerOfQ { .. })));
    }
}
