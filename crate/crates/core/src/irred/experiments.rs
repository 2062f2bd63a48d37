//! Exhaustive checks of the norm maps and base change on one algebra, one
//! report record per property instance.

use std::collections::{BTreeMap, HashMap};
use std::str::FromStr;
use std::sync::{Arc, Mutex};

use serde_json::{json, Value};

use super::{fdim_of, frobenius_action, is_fr_invariant, stabilizer_of, Engine, Irrep, Lift};
use crate::algrp::AlgebraGroup;
use crate::cyclo::CyclotomicInteger;
use crate::error::{Error, Result};
use crate::heis::check_balance;
use crate::k1norm::{codes_of, frobenius_code, norm_map, Extension, NormContext, NormTable};
use crate::linalg::{all_subspaces, zero_vector, Subspace};
use crate::report::{timed, Record};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Check {
    Norms,
    Injectivity,
    Transitivity,
    Equivariance,
    Orders,
    Surjectivity,
    Conditional,
    Restriction,
    Isaacs,
    Gutkin,
    Halasi,
    CommutatorBalance,
}

impl Check {
    pub const ALL: [Check; 12] = [
        Check::Norms,
        Check::Injectivity,
        Check::Transitivity,
        Check::Equivariance,
        Check::Orders,
        Check::Surjectivity,
        Check::Conditional,
        Check::Restriction,
        Check::Isaacs,
        Check::Gutkin,
        Check::Halasi,
        Check::CommutatorBalance,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Check::Norms => "norms",
            Check::Injectivity => "injectivity",
            Check::Transitivity => "transitivity",
            Check::Equivariance => "equivariance",
            Check::Orders => "orders",
            Check::Surjectivity => "surjectivity",
            Check::Conditional => "conditional",
            Check::Restriction => "restriction",
            Check::Isaacs => "isaacs",
            Check::Gutkin => "gutkin",
            Check::Halasi => "halasi",
            Check::CommutatorBalance => "commutator-balance",
        }
    }
}

impl FromStr for Check {
    type Err = Error;

    fn from_str(s: &str) -> Result<Check> {
        Check::ALL
            .into_iter()
            .find(|c| c.name() == s)
            .ok_or_else(|| Error::BadParameter(format!("unknown check {s:?}")))
    }
}

/// Parses a comma-separated check list.
pub fn parse_checks(s: &str) -> Result<Vec<Check>> {
    s.split(',').map(|x| x.trim().parse()).collect()
}

/// Size guards. Group orders above a limit produce "skipped: size" records.
#[derive(Clone, Copy, Debug)]
pub struct Limits {
    /// Groups that are only enumerated (abelianizations, norm tables).
    pub max_order: u64,
    /// Groups whose irreducibles are computed one by one: G itself and the
    /// images of base change in G'.
    pub max_irrep_order: u64,
    /// Extended groups G' whose full character table is enumerated.
    pub max_table_order: u64,
    /// Bound on |G'|²·|k'| for the commutator balance check.
    pub max_balance_work: u64,
}

impl Default for Limits {
    fn default() -> Limits {
        Limits {
            max_order: 1 << 20,
            max_irrep_order: 1 << 20,
            max_table_order: 1 << 14,
            max_balance_work: 1 << 25,
        }
    }
}

/// Subspaces U with A² ⊆ U ⊆ A, ordered by the dimension of U/A²; all of
/// them are subalgebras.
pub fn subspaces_over_a2(g: &AlgebraGroup) -> Vec<Subspace> {
    let alg = g.algebra();
    let f = g.field();
    let d = alg.dim();
    let a2 = alg.power_ideal(2);
    let cols = a2.complement_columns();
    all_subspaces(f, cols.len())
        .into_iter()
        .map(|s| {
            let lifted = s.rows.iter().map(|r| {
                let mut v = zero_vector(d);
                for (i, &c) in cols.iter().enumerate() {
                    v[c] = r[i];
                }
                v
            });
            Subspace::span(f, d, lifted.chain(a2.rows.iter().cloned()))
        })
        .collect()
}

type OrdersRow = (Subspace, u32, u32);

/// What the restriction check compares on a subgroup K = 1+U.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum RestrictionMode {
    /// Base change of summands of ρ|_K are summands of T(ρ)|_{K'}.
    Summands,
    /// Gal-invariant irreducibles of G' have a Gal-invariant summand on K'.
    InvariantSummand,
}

impl RestrictionMode {
    pub fn name(self) -> &'static str {
        match self {
            RestrictionMode::Summands => "summands",
            RestrictionMode::InvariantSummand => "invariant-summand",
        }
    }
}

/// All checks for one algebra group and a list of extension degrees.
pub struct Checker {
    pub name: String,
    pub group: Arc<AlgebraGroup>,
    pub exts: Vec<u32>,
    pub limits: Limits,
    engine: Engine,
    lifts: Mutex<HashMap<u32, Arc<Lift>>>,
    norms: Mutex<HashMap<u32, Arc<NormTable>>>,
    orders: Mutex<HashMap<u32, Arc<Vec<OrdersRow>>>>,
}

fn values_key(x: &Irrep) -> Vec<CyclotomicInteger> {
    x.character.values.clone()
}

impl Checker {
    pub fn new(name: &str, group: Arc<AlgebraGroup>, exts: Vec<u32>, limits: Limits) -> Checker {
        Checker {
            name: name.to_string(),
            group,
            exts,
            limits,
            engine: Engine::new(),
            lifts: Mutex::new(HashMap::new()),
            norms: Mutex::new(HashMap::new()),
            orders: Mutex::new(HashMap::new()),
        }
    }

    pub fn engine(&self) -> &Engine {
        &self.engine
    }

    fn record(&self, check: Check, params: Value) -> Record {
        Record::new(check.name(), &self.name, params)
    }

    /// |1+A'| for the extension of degree n.
    pub fn ext_order(&self, n: u32) -> u128 {
        (self.group.field().size() as u128).pow(n * self.group.dim() as u32)
    }

    fn guard(&self, r: Record, n: u32, bound: u64) -> std::result::Result<Record, Record> {
        let order = self.ext_order(n);
        if order > bound as u128 {
            Err(r.skipped("size", json!({"order": order.to_string(), "bound": bound})))
        } else {
            Ok(r)
        }
    }

    pub fn lift(&self, n: u32) -> Result<Arc<Lift>> {
        if n == 0 {
            return Err(Error::BadParameter("extension degree must be positive".into()));
        }
        if let Some(l) = self.lifts.lock().unwrap().get(&n) {
            return Ok(l.clone());
        }
        let l = Lift::of(&self.group, n)?;
        Ok(self.lifts.lock().unwrap().entry(n).or_insert(l).clone())
    }

    /// N: G'^ab → G^ab for the whole group.
    pub fn norm_table(&self, n: u32) -> Result<Arc<NormTable>> {
        if let Some(t) = self.norms.lock().unwrap().get(&n) {
            return Ok(t.clone());
        }
        let lift = self.lift(n)?;
        let t = Arc::new(norm_map(&NormContext::new(self.group.clone(), lift.target().clone())?)?);
        Ok(self.norms.lock().unwrap().entry(n).or_insert(t).clone())
    }

    fn ext_for(&self, n: u32, u: &Subspace) -> Result<Arc<Extension>> {
        let lift = self.lift(n)?;
        if u.rank() == self.group.dim() {
            Ok(lift.ext.clone())
        } else {
            Ok(lift.sub(u)?.ext.clone())
        }
    }

    pub fn irreps(&self) -> Result<Arc<Vec<Arc<Irrep>>>> {
        self.engine.irreps(&self.group)
    }

    pub fn images(&self, n: u32) -> Result<Vec<Arc<Irrep>>> {
        let lift = self.lift(n)?;
        self.irreps()?
            .iter()
            .map(|r| self.engine.base_change(&lift, r))
            .collect()
    }

    /// (U, |(1+U)^ab|, |((1+U')^ab)^Fr|) for every U ⊇ A².
    pub fn orders_table(&self, n: u32) -> Result<Arc<Vec<OrdersRow>>> {
        if let Some(t) = self.orders.lock().unwrap().get(&n) {
            return Ok(t.clone());
        }
        let mut rows = Vec::new();
        for u in subspaces_over_a2(&self.group) {
            let ext = self.ext_for(n, &u)?;
            let lhs = ext.base.abelianization().size();
            let src = ext.ext.abelianization();
            let rhs = (0..src.size())
                .filter(|&c| src.coset(ext.frobenius(src.coset_rep(c))) == c)
                .count() as u32;
            rows.push((u, lhs, rhs));
        }
        let t = Arc::new(rows);
        Ok(self.orders.lock().unwrap().entry(n).or_insert(t).clone())
    }

    fn orders_hold(&self, n: u32) -> Result<bool> {
        Ok(self.orders_table(n)?.iter().all(|(_, a, b)| a == b))
    }

    /// Gal-invariant irreducibles of G' outside the image of base change.
    fn missing_from_image(&self, n: u32) -> Result<(usize, usize, Vec<usize>)> {
        let lift = self.lift(n)?;
        let images: HashMap<Vec<CyclotomicInteger>, usize> = self
            .images(n)?
            .iter()
            .enumerate()
            .map(|(i, r)| (values_key(r), i))
            .collect();
        let irr = self.engine.irreps(lift.target())?;
        let invariant: Vec<usize> = (0..irr.len())
            .filter(|&i| is_fr_invariant(&lift.ext, &irr[i].character))
            .collect();
        let missing = invariant
            .iter()
            .copied()
            .filter(|&i| !images.contains_key(&values_key(&irr[i])))
            .collect();
        Ok((invariant.len(), images.len(), missing))
    }

    pub fn run(&self, checks: &[Check]) -> Vec<Record> {
        checks.iter().flat_map(|&c| self.run_one(c)).collect()
    }

    pub fn run_one(&self, check: Check) -> Vec<Record> {
        match check {
            Check::Isaacs => vec![self.isaacs()],
            Check::Halasi => vec![self.halasi()],
            Check::Gutkin => vec![self.gutkin()],
            Check::CommutatorBalance => self.balance(),
            Check::Norms => self.exts.iter().flat_map(|&n| self.norms(n)).collect(),
            Check::Injectivity => self.exts.iter().flat_map(|&n| self.injectivity(n)).collect(),
            Check::Transitivity => self.transitivity(),
            Check::Equivariance => self.exts.iter().map(|&n| self.equivariance(n)).collect(),
            Check::Orders => self.exts.iter().flat_map(|&n| self.orders(n)).collect(),
            Check::Surjectivity => self.exts.iter().map(|&n| self.surjectivity(n)).collect(),
            Check::Conditional => self.exts.iter().map(|&n| self.conditional(n)).collect(),
            Check::Restriction => self.exts.iter().flat_map(|&n| self.restriction(n)).collect(),
        }
    }

    fn isaacs(&self) -> Record {
        let r = match self.guard(self.record(Check::Isaacs, json!({})), 1, self.limits.max_irrep_order) {
            Ok(r) => r,
            Err(s) => return s,
        };
        timed(r, |r| {
            let irr = self.irreps()?;
            let q = self.group.field().size() as u64;
            let mut degrees = BTreeMap::new();
            for x in irr.iter() {
                *degrees.entry(x.degree()).or_insert(0u32) += 1;
                if let Err(e) = fdim_of(x.degree(), q) {
                    return Ok(r.fail(json!({"degree": x.degree(), "q": q, "error": e.to_string()})));
                }
            }
            let degrees: Vec<[u64; 2]> = degrees.into_iter().map(|(d, c)| [d, c as u64]).collect();
            Ok(r.pass(Some(json!({"irreps": irr.len(), "degree_counts": degrees}))))
        })
    }

    fn halasi(&self) -> Record {
        let r = match self.guard(self.record(Check::Halasi, json!({})), 1, self.limits.max_irrep_order) {
            Ok(r) => r,
            Err(s) => return s,
        };
        timed(r, |r| {
            self.irreps()?;
            let ctx = self.engine.heis(&self.group)?;
            let full = Subspace::full(self.group.dim());
            let mut invariant = 0;
            if !ctx.a2.is_zero() {
                for psi in self.engine.irreps(&ctx.h.group)?.iter() {
                    if stabilizer_of(&self.group, &ctx.h, &psi.character)? == full {
                        invariant += 1;
                        if psi.degree() != 1 {
                            return Ok(r.fail(json!({"psi": psi.character.to_json(), "degree": psi.degree()})));
                        }
                    }
                }
            }
            Ok(r.pass(Some(json!({"invariant_constituents": invariant}))))
        })
    }

    fn gutkin(&self) -> Record {
        let r = match self.guard(self.record(Check::Gutkin, json!({})), 1, self.limits.max_irrep_order) {
            Ok(r) => r,
            Err(s) => return s,
        };
        timed(r, |r| {
            let irr = self.irreps()?;
            let mut dims = Vec::new();
            for x in irr.iter() {
                let (b, _) = self.engine.monomialize(x)?;
                dims.push(b.rank());
            }
            Ok(r.pass(Some(json!({"irreps": irr.len(), "inducing_dims": dims}))))
        })
    }

    fn balance(&self) -> Vec<Record> {
        let mut degrees = vec![1];
        degrees.extend(self.exts.iter().copied().filter(|&n| n != 1));
        degrees
            .into_iter()
            .map(|n| {
                let r = self.record(Check::CommutatorBalance, json!({"ext": n}));
                let order = self.ext_order(n);
                let work = order * order * (self.group.field().size() as u128).pow(n);
                if work > self.limits.max_balance_work as u128 {
                    return r.skipped("size", json!({"order": order.to_string(), "work": work.to_string()}));
                }
                timed(r, |r| {
                    let g = if n == 1 {
                        self.group.clone()
                    } else {
                        self.lift(n)?.target().clone()
                    };
                    let (checked, failure) = check_balance(&*self.engine.heis(&g)?);
                    Ok(match failure {
                        None => r.pass(Some(json!({"triples": checked}))),
                        Some((a, b, l)) => r.fail(json!({
                            "a": codes_of(&g, a),
                            "b": codes_of(&g, b),
                            "lambda": l,
                        })),
                    })
                })
            })
            .collect()
    }

    fn norms(&self, n: u32) -> Vec<Record> {
        let props = ["homomorphism", "surjectivity", "coinvariants", "equivariance", "functoriality"];
        let mut out = Vec::new();
        for p in props {
            let r = self.record(Check::Norms, json!({"ext": n, "property": p}));
            let r = match self.guard(r, n, self.limits.max_order) {
                Ok(r) => r,
                Err(s) => {
                    out.push(s);
                    continue;
                }
            };
            out.push(timed(r, |r| self.norm_property(n, p, r)));
        }
        if self.exts.len() >= 2 && n == self.exts[0] {
            out.push(self.norm_transitivity());
        }
        out
    }

    fn norm_property(&self, n: u32, property: &str, r: Record) -> Result<Record> {
        let t = self.norm_table(n)?;
        let lift = self.lift(n)?;
        let gp = lift.target();
        let g = &self.group;
        let gab = g.abelianization();
        Ok(match property {
            "homomorphism" => r.pass(Some(json!({"src": t.src.size(), "dst": t.dst.size()}))),
            "surjectivity" => r.outcome(
                t.is_surjective(),
                json!({"image": t.image_size(), "target": t.dst.size()}),
            ),
            "coinvariants" => {
                // N(Fr(x)) = N(x): N factors through the Fr-coinvariants
                let bad = (0..t.src.size())
                    .map(|c| t.src.coset_rep(c))
                    .find(|&x| t.apply(lift.ext.frobenius(x)) != t.apply(x));
                match bad {
                    None => r.pass(None),
                    Some(x) => r.fail(json!({"x": codes_of(gp, x)})),
                }
            }
            "equivariance" => match g.algebra().defined_over() {
                Some(q0) if q0 < g.field().size() => {
                    let mut bad = None;
                    for c in 0..t.src.size() {
                        let x = t.src.coset_rep(c);
                        let lhs = t.apply(frobenius_code(gp, q0, x)?);
                        let rhs = gab.coset(frobenius_code(g, q0, t.dst.coset_rep(t.apply_coset(c)))?);
                        if lhs != rhs {
                            bad = Some(x);
                            break;
                        }
                    }
                    match bad {
                        None => r.pass(Some(json!({"q": q0}))),
                        Some(x) => r.fail(json!({"q": q0, "x": codes_of(gp, x)})),
                    }
                }
                _ => r.skipped("not applicable", json!("algebra not defined over a proper subfield")),
            },
            "functoriality" => {
                let mut count = 0;
                for u in subspaces_over_a2(g) {
                    if u.rank() == g.dim() {
                        continue;
                    }
                    let tu = lift.ext.norm_table(&u)?;
                    let (bs, es) = lift.ext.subgroups(&u)?;
                    for c in 0..tu.src.size() {
                        let y = tu.src.coset_rep(c);
                        let lhs = gab.coset(bs.include(tu.dst.coset_rep(tu.apply_coset(c))));
                        let rhs = t.apply(es.include(y));
                        if lhs != rhs {
                            return Ok(r.fail(json!({
                                "subgroup": u.to_codes(),
                                "y": codes_of(&es.group, y),
                            })));
                        }
                    }
                    count += 1;
                }
                r.pass(Some(json!({"subgroups": count})))
            }
            _ => unreachable!(),
        })
    }

    fn tower(&self) -> std::result::Result<(u32, u32), String> {
        match self.exts.as_slice() {
            [a, b, ..] if b % a == 0 && b > a => Ok((*a, *b)),
            [_, _, ..] => Err("degrees do not form a tower".into()),
            _ => Err("needs two extension degrees".into()),
        }
    }

    fn norm_transitivity(&self) -> Record {
        let (n1, n2) = match self.tower() {
            Ok(t) => t,
            Err(e) => {
                return self
                    .record(Check::Norms, json!({"ext": self.exts, "property": "transitivity"}))
                    .skipped("not applicable", json!(e))
            }
        };
        let r = self.record(Check::Norms, json!({"ext": [n1, n2], "property": "transitivity"}));
        let r = match self.guard(r, n2, self.limits.max_order) {
            Ok(r) => r,
            Err(s) => return s,
        };
        timed(r, |r| {
            let t1 = self.norm_table(n1)?;
            let t2 = self.norm_table(n2)?;
            let g1 = self.lift(n1)?.target().clone();
            let g2 = self.lift(n2)?.target().clone();
            let t12 = norm_map(&NormContext::new(g1, g2.clone())?)?;
            for c in 0..t2.src.size() {
                let x = t2.src.coset_rep(c);
                if t2.apply_coset(c) != t1.apply(t12.dst.coset_rep(t12.apply(x))) {
                    return Ok(r.fail(json!({"x": codes_of(&g2, x)})));
                }
            }
            Ok(r.pass(Some(json!({"cosets": t2.src.size()}))))
        })
    }

    fn injectivity(&self, n: u32) -> Vec<Record> {
        let rec = |p: &str| self.record(Check::Injectivity, json!({"ext": n, "property": p}));
        let first = match self.guard(rec("images"), n, self.limits.max_irrep_order) {
            Ok(r) => r,
            Err(s) => return vec![s],
        };
        let mut images = None;
        let head = timed(first, |r| {
            let imgs = self.images(n)?;
            let q = self.lift(n)?.target().field().size() as u64;
            for x in &imgs {
                fdim_of(x.degree(), q)?;
            }
            let count = imgs.len();
            images = Some(imgs);
            Ok(r.pass(Some(json!({"images": count, "irreducible": true, "galois_invariant": true}))))
        });
        let Some(images) = images else {
            return vec![head];
        };
        let irr = match self.irreps() {
            Ok(i) => i,
            Err(e) => return vec![head, rec("injective").error(&e)],
        };
        let mut seen: HashMap<Vec<CyclotomicInteger>, usize> = HashMap::new();
        let mut collision = None;
        for (i, x) in images.iter().enumerate() {
            if let Some(&j) = seen.get(&values_key(x)) {
                collision = Some((j, i));
                break;
            }
            seen.insert(values_key(x), i);
        }
        let injective = rec("injective").outcome(
            collision.is_none(),
            match collision {
                None => json!({"images": images.len()}),
                Some((j, i)) => json!({"irreps": [j, i]}),
            },
        );
        let fdim_bad = (0..irr.len()).find(|&i| images[i].fdim != irr[i].fdim);
        let sh_bad = (0..irr.len()).find(|&i| images[i].sh != irr[i].sh);
        let witness = |bad: Option<usize>, f: &dyn Fn(&Irrep) -> u32| match bad {
            None => json!(null),
            Some(i) => json!({"irrep": i, "before": f(&irr[i]), "after": f(&images[i])}),
        };
        vec![
            head,
            injective,
            rec("fdim").outcome(fdim_bad.is_none(), witness(fdim_bad, &|x| x.fdim)),
            rec("sh").outcome(sh_bad.is_none(), witness(sh_bad, &|x| x.sh)),
        ]
    }

    fn transitivity(&self) -> Vec<Record> {
        let (n1, n2) = match self.tower() {
            Ok(t) => t,
            Err(e) => {
                return vec![self
                    .record(Check::Transitivity, json!({"ext": self.exts}))
                    .skipped("not applicable", json!(e))]
            }
        };
        let r = self.record(Check::Transitivity, json!({"ext": [n1, n2]}));
        let r = match self.guard(r, n2, self.limits.max_irrep_order) {
            Ok(r) => r,
            Err(s) => return vec![s],
        };
        vec![timed(r, |r| {
            let l1 = self.lift(n1)?;
            let l2 = self.lift(n2)?;
            let step = Lift::new(Extension::between(l1.target().clone(), l2.target().clone())?);
            let irr = self.irreps()?;
            for (i, x) in irr.iter().enumerate() {
                let direct = self.engine.base_change(&l2, x)?;
                let composite = self.engine.base_change(&step, &self.engine.base_change(&l1, x)?)?;
                if direct.character != composite.character {
                    return Ok(r.fail(json!({"irrep": i, "degree": x.degree()})));
                }
            }
            Ok(r.pass(Some(json!({"irreps": irr.len()}))))
        })]
    }

    fn equivariance(&self, n: u32) -> Record {
        let r = self.record(Check::Equivariance, json!({"ext": n}));
        let q0 = match self.group.algebra().defined_over() {
            Some(q0) if q0 < self.group.field().size() => q0,
            _ => return r.skipped("not applicable", json!("algebra not defined over a proper subfield")),
        };
        let r = match self.guard(r, n, self.limits.max_irrep_order) {
            Ok(r) => r,
            Err(s) => return s,
        };
        timed(r, |r| {
            let lift = self.lift(n)?;
            let irr = self.irreps()?;
            let index: HashMap<Vec<CyclotomicInteger>, usize> =
                irr.iter().enumerate().map(|(i, x)| (values_key(x), i)).collect();
            for (i, x) in irr.iter().enumerate() {
                let moved = frobenius_action(&x.character, q0)?;
                let j = *index
                    .get(&moved.values)
                    .ok_or_else(|| Error::Inconsistent("Frobenius image is not an irreducible".into()))?;
                let lhs = self.engine.base_change(&lift, &irr[j])?;
                let rhs = frobenius_action(&self.engine.base_change(&lift, x)?.character, q0)?;
                if lhs.character != rhs {
                    return Ok(r.fail(json!({"irrep": i, "q": q0})));
                }
            }
            Ok(r.pass(Some(json!({"q": q0, "irreps": irr.len()}))))
        })
    }

    fn orders(&self, n: u32) -> Vec<Record> {
        let subs = subspaces_over_a2(&self.group);
        let base = |u: &Subspace| self.record(Check::Orders, json!({"ext": n, "subgroup": u.to_codes()}));
        if self.ext_order(n) > self.limits.max_order as u128 {
            return subs
                .iter()
                .map(|u| self.guard(base(u), n, self.limits.max_order).unwrap_err())
                .collect();
        }
        let table = match self.orders_table(n) {
            Ok(t) => t,
            Err(e) => return subs.iter().map(|u| base(u).error(&e)).collect(),
        };
        table
            .iter()
            .map(|(u, lhs, rhs)| {
                timed(base(u), |r| {
                    let surjective = if u.rank() == self.group.dim() {
                        self.norm_table(n)?.is_surjective()
                    } else {
                        self.lift(n)?.ext.norm_table(u)?.is_surjective()
                    };
                    Ok(r.outcome(
                        lhs == rhs,
                        json!({"abelianization": lhs, "galois_fixed": rhs, "norm_surjective": surjective}),
                    ))
                })
            })
            .collect()
    }

    fn surjectivity(&self, n: u32) -> Record {
        let r = self.record(Check::Surjectivity, json!({"ext": n}));
        let r = match self.guard(r, n, self.limits.max_table_order) {
            Ok(r) => r,
            Err(s) => return s,
        };
        timed(r, |r| {
            let (invariant, images, missing) = self.missing_from_image(n)?;
            Ok(r.outcome(
                missing.is_empty(),
                json!({"invariant": invariant, "images": images, "missing": missing}),
            ))
        })
    }

    fn conditional(&self, n: u32) -> Record {
        let r = self.record(Check::Conditional, json!({"ext": n}));
        let r = match self.guard(r, n, self.limits.max_table_order) {
            Ok(r) => r,
            Err(s) => return s,
        };
        timed(r, |r| {
            if !self.orders_hold(n)? {
                return Ok(r.pass(Some(json!({"hypothesis": false}))));
            }
            let (_, _, missing) = self.missing_from_image(n)?;
            Ok(r.outcome(missing.is_empty(), json!({"hypothesis": true, "missing": missing})))
        })
    }

    fn restriction(&self, n: u32) -> Vec<Record> {
        let mut out = self.restriction_records(n, RestrictionMode::Summands);
        out.extend(self.restriction_records(n, RestrictionMode::InvariantSummand));
        out
    }

    /// One record per proper subgroup 1+U ⊇ 1+A².
    pub fn restriction_records(&self, n: u32, mode: RestrictionMode) -> Vec<Record> {
        subspaces_over_a2(&self.group)
            .into_iter()
            .filter(|u| u.rank() < self.group.dim())
            .map(|u| {
                let r = self.record(
                    Check::Restriction,
                    json!({"ext": n, "subgroup": u.to_codes(), "mode": mode.name()}),
                );
                let bound = match mode {
                    RestrictionMode::Summands => self.limits.max_irrep_order,
                    RestrictionMode::InvariantSummand => self.limits.max_table_order,
                };
                match self.guard(r, n, bound) {
                    Ok(r) => timed(r, |r| match mode {
                        RestrictionMode::Summands => self.restriction_summands(n, &u, r),
                        RestrictionMode::InvariantSummand => self.invariant_summand(n, &u, r),
                    }),
                    Err(s) => s,
                }
            })
            .collect()
    }

    /// ψ ⊆ ρ|_K implies T(ψ) ⊆ T(ρ)|_{K'}; for SH ρ every such ψ is SH.
    fn restriction_summands(&self, n: u32, u: &Subspace, r: Record) -> Result<Record> {
        let lift = self.lift(n)?;
        let sub = lift.sub(u)?;
        let k = self.group.subgroup(u)?;
        let kp = lift.target().subgroup(&lift.ext.lift(u))?;
        let kirr = self.engine.irreps(&k.group)?;
        let mut relations = 0;
        for (i, rho) in self.irreps()?.iter().enumerate() {
            let res = rho.character.restrict(&k)?;
            let image = self.engine.base_change(&lift, rho)?;
            let res2 = image.character.restrict(&kp)?;
            for (j, psi) in kirr.iter().enumerate() {
                if res.inner_product(&psi.character)? == 0 {
                    continue;
                }
                relations += 1;
                if rho.sh == 0 && psi.sh != 0 {
                    return Ok(r.fail(json!({"irrep": i, "summand": j, "reason": "summand of SH restriction is not SH"})));
                }
                let psi2 = self.engine.base_change(&sub, psi)?;
                if res2.inner_product(&psi2.character)? == 0 {
                    return Ok(r.fail(json!({"irrep": i, "summand": j})));
                }
            }
        }
        Ok(r.pass(Some(json!({"relations": relations}))))
    }

    /// Each Gal-invariant irreducible of G' has a Gal-invariant summand on
    /// K', where the orders hypothesis holds.
    fn invariant_summand(&self, n: u32, u: &Subspace, r: Record) -> Result<Record> {
        if !self.orders_hold(n)? {
            return Ok(r.skipped("hypothesis", json!("orders equality fails for some subgroup")));
        }
        let lift = self.lift(n)?;
        let sub = lift.sub(u)?;
        let kp = lift.target().subgroup(&lift.ext.lift(u))?;
        let kirr = self.engine.irreps(&kp.group)?;
        let mut checked = 0;
        for (i, phi) in self.engine.irreps(lift.target())?.iter().enumerate() {
            if !is_fr_invariant(&lift.ext, &phi.character) {
                continue;
            }
            checked += 1;
            let res = phi.character.restrict(&kp)?;
            let mut found = false;
            for psi in kirr.iter() {
                if is_fr_invariant(&sub.ext, &psi.character) && res.inner_product(&psi.character)? != 0 {
                    found = true;
                    break;
                }
            }
            if !found {
                return Ok(r.fail(json!({"irrep": i})));
            }
        }
        Ok(r.pass(Some(json!({"invariant_irreps": checked}))))
    }

    /// Re-runs enumeration and base change with randomized choices and
    /// compares the multisets of characters with the canonical run.
    pub fn choice_independence(&self, n: u32, seeds: impl IntoIterator<Item = u64>) -> Result<Option<u64>> {
        let lift = self.lift(n)?;
        let mut base: Vec<Vec<CyclotomicInteger>> = self.irreps()?.iter().map(|x| values_key(x)).collect();
        let mut base_img: Vec<Vec<CyclotomicInteger>> = self.images(n)?.iter().map(|x| values_key(x)).collect();
        base.sort();
        base_img.sort();
        for s in seeds {
            let e = Engine::with_seed(s);
            let irr = e.irreps(&self.group)?;
            let mut chars: Vec<_> = irr.iter().map(|x| values_key(x)).collect();
            let mut imgs = irr
                .iter()
                .map(|x| e.base_change(&lift, x).map(|y| values_key(&y)))
                .collect::<Result<Vec<_>>>()?;
            chars.sort();
            imgs.sort();
            if chars != base || imgs != base_img {
                return Ok(Some(s));
            }
        }
        Ok(None)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::gf::make_field;
    use crate::nilalg::{builtin_algebra, BuiltinKind};
    use crate::report::Status;

    fn checker(kind: BuiltinKind, p: u32, m: u32, exts: Vec<u32>) -> Checker {
        let f = make_field(p, m, None).unwrap();
        let g = AlgebraGroup::new(Arc::new(builtin_algebra(&kind, &f).unwrap())).unwrap();
        Checker::new("t", g, exts, Limits::default())
    }

    fn all_pass(recs: &[Record]) {
        for r in recs {
            assert!(r.passed(), "{}", r.to_json(false));
        }
    }

    #[test]
    fn subspaces_over_a2_of_u3() {
        let c = checker(BuiltinKind::UpperTriangular(3), 2, 1, vec![2]);
        let subs = subspaces_over_a2(&c.group);
        // subspaces of F_2² lifted over A² = span(b3)
        assert_eq!(subs.len(), 5);
        assert!(subs.iter().all(|u| c.group.algebra().is_subalgebra(u)));
        assert_eq!(subs[0].rank(), 1);
        assert_eq!(subs[4].rank(), 3);
    }

    #[test]
    fn u3_all_checks() {
        let c = checker(BuiltinKind::UpperTriangular(3), 2, 1, vec![2]);
        let recs = c.run(&Check::ALL);
        all_pass(&recs);
        let top = recs
            .iter()
            .find(|r| r.check == "orders" && r.params["subgroup"].as_array().unwrap().len() == 3)
            .unwrap();
        assert_eq!(top.witness.as_ref().unwrap()["abelianization"], 4);
        assert_eq!(top.witness.as_ref().unwrap()["galois_fixed"], 4);
    }

    #[test]
    fn x2_tower() {
        let c = checker(BuiltinKind::TruncatedPoly(2), 2, 1, vec![2, 4]);
        let recs = c.run(&[Check::Transitivity, Check::Norms]);
        all_pass(&recs);
        assert!(recs.iter().any(|r| r.check == "transitivity" && r.status == Status::Pass));
        assert_eq!(c.choice_independence(2, 0..3).unwrap(), None);
    }

    #[test]
    fn equivariance_over_f4() {
        let c = checker(BuiltinKind::UpperTriangular(3), 2, 2, vec![2]);
        let recs = c.run(&[Check::Equivariance, Check::Norms]);
        all_pass(&recs);
        assert!(recs.iter().all(|r| r.status == Status::Pass));
    }

    #[test]
    fn size_guard_skips() {
        let mut c = checker(BuiltinKind::UpperTriangular(4), 2, 1, vec![3]);
        c.limits.max_irrep_order = 1 << 10;
        let recs = c.run(&[Check::Surjectivity]);
        assert_eq!(recs[0].status, Status::Skipped);
        assert_eq!(recs[0].witness.as_ref().unwrap()["skipped"], "size");
    }

    #[test]
    fn unknown_check_rejected() {
        assert!(parse_checks("norms,orders").is_ok());
        assert!(parse_checks("norms,bogus").is_err());
    }
}
