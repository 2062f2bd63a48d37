//! The algebra group G = 1 + A.
//!
//! Elements 1+a are encoded as integers `Σ code(a_i) q^i` (first coordinate
//! least significant), so the identity is 0 and code order is the canonical
//! element order used for every deterministic choice.

use std::collections::{HashMap, VecDeque};
use std::fmt;
use std::sync::{Arc, Mutex, OnceLock};

use crate::error::{Error, Result};
use crate::gf::{FieldDescriptor, FieldElement};
use crate::linalg::{is_zero_vec, unit_vector, Subspace, Vector};
use crate::nilalg::NilpotentAlgebra;

/// Largest group that is ever enumerated.
pub const ENUMERATION_BOUND: u64 = 1 << 20;

pub struct AlgebraGroup {
    alg: Arc<NilpotentAlgebra>,
    q: u32,
    order: u32,
    generators: Vec<u32>,
    classes: OnceLock<Classes>,
    abelian: OnceLock<Arc<AbelianQuotient>>,
    exponent: OnceLock<u32>,
    subgroups: Mutex<HashMap<Subspace, Arc<Subgroup>>>,
}

impl fmt::Debug for AlgebraGroup {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "AlgebraGroup(q={}, dim={})", self.q, self.alg.dim())
    }
}

/// Group order q^dim, or `TooLarge` beyond the bound.
pub fn group_order(alg: &NilpotentAlgebra) -> Result<u32> {
    let q = alg.field().size() as u128;
    let order = q.pow(alg.dim() as u32);
    if order > ENUMERATION_BOUND as u128 {
        return Err(Error::TooLarge {
            order,
            bound: ENUMERATION_BOUND,
        });
    }
    Ok(order as u32)
}

impl AlgebraGroup {
    pub fn new(alg: Arc<NilpotentAlgebra>) -> Result<Arc<AlgebraGroup>> {
        let order = group_order(&alg)?;
        let q = alg.field().size();
        let mut g = AlgebraGroup {
            alg,
            q,
            order,
            generators: Vec::new(),
            classes: OnceLock::new(),
            abelian: OnceLock::new(),
            exponent: OnceLock::new(),
            subgroups: Mutex::new(HashMap::new()),
        };
        let f = g.field().clone();
        let mut gens = Vec::new();
        for v in filtration_basis(&g.alg) {
            for e in f_p_basis(&f) {
                let w: Vector = v.iter().map(|&x| f.mul(e, x)).collect();
                gens.push(g.encode(&w));
            }
        }
        g.generators = gens;
        Ok(Arc::new(g))
    }

    pub fn algebra(&self) -> &Arc<NilpotentAlgebra> {
        &self.alg
    }

    pub fn field(&self) -> &Arc<FieldDescriptor> {
        self.alg.field()
    }

    pub fn dim(&self) -> usize {
        self.alg.dim()
    }

    pub fn order(&self) -> u32 {
        self.order
    }

    pub fn elements(&self) -> std::ops::Range<u32> {
        0..self.order
    }

    /// Generators 1 + e·v with e running over an F_p-basis of k and v over a
    /// basis adapted to A ⊃ A² ⊃ ...
    pub fn generators(&self) -> &[u32] {
        &self.generators
    }

    pub fn encode(&self, a: &[FieldElement]) -> u32 {
        a.iter().rev().fold(0, |acc, x| acc * self.q + x.0)
    }

    pub fn decode(&self, mut code: u32) -> Vector {
        (0..self.dim())
            .map(|_| {
                let c = code % self.q;
                code /= self.q;
                FieldElement(c)
            })
            .collect()
    }

    /// (1+a)(1+b) = 1 + a + b + ab
    pub fn mul(&self, g: u32, h: u32) -> u32 {
        if g == 0 {
            return h;
        }
        if h == 0 {
            return g;
        }
        let f = self.field();
        let a = self.decode(g);
        let b = self.decode(h);
        let mut ab = self.alg.mul(&a, &b);
        for ((x, &y), &z) in ab.iter_mut().zip(&a).zip(&b) {
            *x = f.add(*x, f.add(y, z));
        }
        self.encode(&ab)
    }

    /// (1+a)⁻¹ = 1 − a + a² − ...
    pub fn inv(&self, g: u32) -> u32 {
        if g == 0 {
            return 0;
        }
        let f = self.field();
        let neg_a: Vector = self.decode(g).iter().map(|&x| f.neg(x)).collect();
        let mut sum = neg_a.clone();
        let mut term = neg_a.clone();
        loop {
            term = self.alg.mul(&term, &neg_a);
            if is_zero_vec(&term) {
                break;
            }
            for (s, &t) in sum.iter_mut().zip(&term) {
                *s = f.add(*s, t);
            }
        }
        self.encode(&sum)
    }

    /// g h g⁻¹ h⁻¹
    pub fn commutator(&self, g: u32, h: u32) -> u32 {
        let gh = self.mul(g, h);
        let hg = self.mul(h, g);
        self.mul(gh, self.inv(hg))
    }

    /// h g h⁻¹
    pub fn conjugate(&self, g: u32, h: u32) -> u32 {
        self.mul(self.mul(h, g), self.inv(h))
    }

    pub fn pow(&self, g: u32, mut e: u64) -> u32 {
        let mut acc = 0;
        let mut base = g;
        while e > 0 {
            if e & 1 == 1 {
                acc = self.mul(acc, base);
            }
            base = self.mul(base, base);
            e >>= 1;
        }
        acc
    }

    pub fn element_order(&self, g: u32) -> u32 {
        let mut x = g;
        let mut n = 1;
        while x != 0 {
            x = self.mul(x, g);
            n += 1;
        }
        n
    }

    /// Maximal element order, a power of p.
    pub fn exponent(&self) -> u32 {
        *self.exponent.get_or_init(|| {
            // g^(p^j) = 1 + (higher terms); orders of generators do not bound
            // the exponent, so scan everything
            let p = self.field().p();
            let mut e = 1;
            for g in self.elements() {
                let mut x = self.pow(g, e as u64);
                while x != 0 {
                    x = self.pow(x, p as u64);
                    e *= p;
                }
            }
            e
        })
    }

    pub fn classes(&self) -> &Classes {
        self.classes.get_or_init(|| Classes::compute(self))
    }

    pub fn num_classes(&self) -> usize {
        self.classes().reps.len()
    }

    pub fn class_of(&self, g: u32) -> usize {
        self.classes().class_of[g as usize] as usize
    }

    pub fn abelianization(&self) -> Arc<AbelianQuotient> {
        self.abelian
            .get_or_init(|| Arc::new(AbelianQuotient::compute(self)))
            .clone()
    }

    /// Closure of the seeds into the smallest subgroup normalized by the
    /// given conjugators; returned as a sorted element list.
    pub fn normal_closure(&self, seeds: &[u32], conjugators: &[u32]) -> Vec<u32> {
        let mut seen = vec![false; self.order as usize];
        let mut out = vec![0u32];
        seen[0] = true;
        let mut queue = VecDeque::from([0u32]);
        let seeds: Vec<u32> = seeds.iter().copied().filter(|&s| s != 0).collect();
        let conj: Vec<(u32, u32)> = conjugators.iter().map(|&h| (h, self.inv(h))).collect();
        while let Some(x) = queue.pop_front() {
            let next = seeds
                .iter()
                .map(|&s| self.mul(x, s))
                .chain(conj.iter().map(|&(h, hi)| self.mul(self.mul(h, x), hi)));
            for y in next.collect::<Vec<_>>() {
                if !seen[y as usize] {
                    seen[y as usize] = true;
                    out.push(y);
                    queue.push_back(y);
                }
            }
        }
        out.sort_unstable();
        out
    }

    /// (T, S) for algebra subgroups T = 1+U and S = 1+W.
    pub fn commutator_subgroup(&self, u: &Subspace, w: &Subspace) -> Result<Vec<u32>> {
        let t = self.subgroup(u)?;
        let s = self.subgroup(w)?;
        let tg: Vec<u32> = t.group.generators().iter().map(|&x| t.include(x)).collect();
        let sg: Vec<u32> = s.group.generators().iter().map(|&x| s.include(x)).collect();
        let seeds: Vec<u32> = tg
            .iter()
            .flat_map(|&a| sg.iter().map(move |&b| (a, b)))
            .map(|(a, b)| self.commutator(a, b))
            .collect();
        let conj: Vec<u32> = tg.iter().chain(&sg).copied().collect();
        Ok(self.normal_closure(&seeds, &conj))
    }

    /// The algebra subgroup 1+U, built once and cached.
    pub fn subgroup(&self, u: &Subspace) -> Result<Arc<Subgroup>> {
        if let Some(s) = self.subgroups.lock().unwrap().get(u) {
            return Ok(s.clone());
        }
        let s = Arc::new(Subgroup::new(self, u.clone())?);
        let mut cache = self.subgroups.lock().unwrap();
        Ok(cache.entry(u.clone()).or_insert(s).clone())
    }

    /// Does conjugation by every generator preserve 1+U?
    pub fn is_normal(&self, u: &Subspace) -> bool {
        let f = self.field();
        self.generators.iter().all(|&h| {
            let hi = self.inv(h);
            u.rows.iter().all(|r| {
                let g = self.encode(r);
                u.contains(f, &self.decode(self.mul(self.mul(h, g), hi)))
            })
        })
    }
}

// F_p-basis 1, t, ..., t^{m-1} of k
fn f_p_basis(f: &FieldDescriptor) -> Vec<FieldElement> {
    let p = f.p();
    (0..f.m()).map(|i| FieldElement(p.pow(i))).collect()
}

/// A basis of A adapted to the power filtration: unit vectors at the
/// non-pivot columns of A² first, then for each k a complement of A^{k+1}
/// inside A^k chosen greedily among the rows of A^k.
pub fn filtration_basis(alg: &NilpotentAlgebra) -> Vec<Vector> {
    let f = alg.field();
    let d = alg.dim();
    let mut out: Vec<Vector> = alg
        .power_ideal(2)
        .complement_columns()
        .into_iter()
        .map(|c| unit_vector(d, c))
        .collect();
    for k in 2..alg.nclass() {
        let ak = alg.power_ideal(k);
        let mut span = alg.power_ideal(k + 1);
        for r in &ak.rows {
            if !span.contains(f, r) {
                span = Subspace::span(f, d, span.rows.iter().cloned().chain([r.clone()]));
                out.push(r.clone());
            }
        }
    }
    out
}

/// Conjugacy classes, representatives minimal in code order.
pub struct Classes {
    pub reps: Vec<u32>,
    pub sizes: Vec<u32>,
    class_of: Vec<u32>,
}

impl Classes {
    fn compute(g: &AlgebraGroup) -> Classes {
        let n = g.order as usize;
        let mut class_of = vec![u32::MAX; n];
        let mut reps = Vec::new();
        let mut sizes = Vec::new();
        let conj: Vec<(u32, u32)> = g.generators.iter().map(|&h| (h, g.inv(h))).collect();
        for x in 0..n as u32 {
            if class_of[x as usize] != u32::MAX {
                continue;
            }
            let id = reps.len() as u32;
            reps.push(x);
            class_of[x as usize] = id;
            let mut size = 1;
            let mut stack = vec![x];
            while let Some(y) = stack.pop() {
                for &(h, hi) in &conj {
                    let z = g.mul(g.mul(h, y), hi);
                    if class_of[z as usize] == u32::MAX {
                        class_of[z as usize] = id;
                        size += 1;
                        stack.push(z);
                    }
                }
            }
            sizes.push(size);
        }
        Classes {
            reps,
            sizes,
            class_of,
        }
    }

    pub fn class_of(&self, g: u32) -> usize {
        self.class_of[g as usize] as usize
    }
}

/// The algebra subgroup 1+U ⊆ G, realized as the algebra group of U in the
/// basis of U's reduced rows.
pub struct Subgroup {
    pub space: Subspace,
    pub group: Arc<AlgebraGroup>,
    incl: Vec<u32>,
    transversal: OnceLock<Vec<u32>>,
}

impl fmt::Debug for Subgroup {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Subgroup(rank={})", self.space.rank())
    }
}

impl Subgroup {
    fn new(parent: &AlgebraGroup, space: Subspace) -> Result<Subgroup> {
        let alg = parent.algebra();
        if !alg.is_subalgebra(&space) {
            return Err(Error::NotSubgroup);
        }
        let sub = if space.rank() == alg.dim() && space == Subspace::full(alg.dim()) {
            alg.as_ref().clone()
        } else {
            alg.subalgebra(&space)?
        };
        let group = AlgebraGroup::new(Arc::new(sub))?;
        let f = parent.field();
        let incl = group
            .elements()
            .map(|c| parent.encode(&space.combine(f, &group.decode(c))))
            .collect();
        Ok(Subgroup {
            space,
            group,
            incl,
            transversal: OnceLock::new(),
        })
    }

    pub fn include(&self, h: u32) -> u32 {
        self.incl[h as usize]
    }

    pub fn inclusion(&self) -> &[u32] {
        &self.incl
    }

    /// The subgroup code of g, if g ∈ 1+U.
    pub fn project(&self, parent: &AlgebraGroup, g: u32) -> Option<u32> {
        let f = parent.field();
        self.space
            .coordinates(f, &parent.decode(g))
            .map(|c| self.group.encode(&c))
    }

    /// Minimal representatives of the left cosets xH, in code order.
    pub fn transversal(&self, parent: &AlgebraGroup) -> &[u32] {
        self.transversal.get_or_init(|| {
            let mut seen = vec![false; parent.order() as usize];
            let mut reps = Vec::new();
            for x in parent.elements() {
                if seen[x as usize] {
                    continue;
                }
                reps.push(x);
                for &h in &self.incl {
                    seen[parent.mul(x, h) as usize] = true;
                }
            }
            reps
        })
    }

    pub fn index(&self, parent: &AlgebraGroup) -> u32 {
        parent.order() / self.group.order()
    }
}

/// T^ab with a cyclic decomposition ⊕ Z/orders[i] and a log table.
pub struct AbelianQuotient {
    pub group_order: u32,
    /// Element codes whose images generate the cyclic factors.
    pub generators: Vec<u32>,
    pub orders: Vec<u32>,
    /// The derived subgroup, sorted.
    pub derived: Vec<u32>,
    pub exponent: u32,
    coset: Vec<u32>,
    coset_rep: Vec<u32>,
    logs: Vec<u32>,
    // mixed-radix index of a log tuple → coset
    coset_of_index: Vec<u32>,
}

impl fmt::Debug for AbelianQuotient {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "AbelianQuotient(orders={:?})", self.orders)
    }
}

impl AbelianQuotient {
    fn compute(g: &AlgebraGroup) -> AbelianQuotient {
        let seeds: Vec<u32> = g
            .generators
            .iter()
            .flat_map(|&a| g.generators.iter().map(move |&b| (a, b)))
            .map(|(a, b)| g.commutator(a, b))
            .collect();
        let derived = g.normal_closure(&seeds, &g.generators);
        let n = g.order as usize;
        let mut coset = vec![u32::MAX; n];
        let mut coset_rep = Vec::new();
        for x in 0..n as u32 {
            if coset[x as usize] != u32::MAX {
                continue;
            }
            let id = coset_rep.len() as u32;
            coset_rep.push(x);
            for &d in &derived {
                coset[g.mul(x, d) as usize] = id;
            }
        }
        let nq = coset_rep.len();
        let qmul = |a: u32, b: u32| coset[g.mul(coset_rep[a as usize], coset_rep[b as usize]) as usize];

        // greedy splitting; s_log[c] is the log of coset c inside the span so far
        let mut s_log: Vec<Option<Vec<u32>>> = vec![None; nq];
        s_log[0] = Some(Vec::new());
        let mut s_members: Vec<u32> = vec![0];
        let mut generators = Vec::new();
        let mut orders: Vec<u32> = Vec::new();
        while s_members.len() < nq {
            let mut best = (0u32, 0u32);
            for c in 0..nq as u32 {
                if s_log[c as usize].is_some() {
                    continue;
                }
                let mut o = 1;
                let mut x = c;
                while s_log[x as usize].is_none() {
                    x = qmul(x, c);
                    o += 1;
                }
                if o > best.1 {
                    best = (c, o);
                }
            }
            let (c, o) = best;
            // c^o lies in S; divide its log by o to correct the lift
            let mut x = c;
            for _ in 1..o {
                x = qmul(x, c);
            }
            let s = s_log[x as usize].clone().unwrap();
            let mut lifted = coset_rep[c as usize];
            for (i, (&si, &gi)) in s.iter().zip(&generators).enumerate() {
                assert!(si % o == 0, "greedy lift not divisible at factor {i}");
                let e = (orders[i] - si / o) % orders[i];
                lifted = g.mul(lifted, g.pow(gi, e as u64));
            }
            let lc = coset[lifted as usize];
            let mut y = lc;
            for _ in 1..o {
                y = qmul(y, lc);
            }
            assert_eq!(y, 0, "lifted generator has the wrong order");
            let old: Vec<(u32, Vec<u32>)> = s_members
                .iter()
                .map(|&m| (m, s_log[m as usize].clone().unwrap()))
                .collect();
            let mut power = 0u32; // coset of lc^j
            for j in 0..o {
                if j > 0 {
                    power = qmul(power, lc);
                }
                for (m, lm) in &old {
                    let e = qmul(*m, power);
                    let mut l = lm.clone();
                    l.push(j);
                    if j > 0 {
                        s_members.push(e);
                    }
                    s_log[e as usize] = Some(l);
                }
            }
            generators.push(lifted);
            orders.push(o);
        }
        let r = orders.len();
        let mut logs = Vec::with_capacity(nq * r);
        let mut coset_of_index = vec![0u32; nq];
        for (c, l) in s_log.into_iter().enumerate() {
            let mut l = l.unwrap();
            l.resize(r, 0);
            coset_of_index[mixed_radix_index(&l, &orders)] = c as u32;
            logs.extend(l);
        }
        let exponent = orders.iter().copied().max().unwrap_or(1);
        AbelianQuotient {
            group_order: g.order,
            generators,
            orders,
            derived,
            exponent,
            coset,
            coset_rep,
            logs,
            coset_of_index,
        }
    }

    pub fn size(&self) -> u32 {
        self.coset_rep.len() as u32
    }

    pub fn rank(&self) -> usize {
        self.orders.len()
    }

    pub fn coset(&self, g: u32) -> u32 {
        self.coset[g as usize]
    }

    /// Minimal element of the coset with the given id.
    pub fn coset_rep(&self, c: u32) -> u32 {
        self.coset_rep[c as usize]
    }

    pub fn log(&self, g: u32) -> &[u32] {
        let r = self.orders.len();
        let c = self.coset[g as usize] as usize;
        &self.logs[c * r..(c + 1) * r]
    }

    pub fn log_of_coset(&self, c: u32) -> &[u32] {
        let r = self.orders.len();
        &self.logs[c as usize * r..(c as usize + 1) * r]
    }

    /// Index of a log tuple, little-endian mixed radix.
    pub fn index_of_log(&self, l: &[u32]) -> usize {
        mixed_radix_index(l, &self.orders)
    }

    pub fn log_of_index(&self, i: usize) -> Vec<u32> {
        mixed_radix_digits(i, &self.orders)
    }

    pub fn coset_of_log(&self, l: &[u32]) -> u32 {
        self.coset_of_index[self.index_of_log(l)]
    }

    pub fn is_derived(&self, g: u32) -> bool {
        self.coset[g as usize] == 0
    }

    pub fn add_logs(&self, a: &[u32], b: &[u32]) -> Vec<u32> {
        a.iter()
            .zip(b)
            .zip(&self.orders)
            .map(|((&x, &y), &o)| (x + y) % o)
            .collect()
    }

    /// All |T^ab| characters, indexed by the little-endian mixed radix order.
    pub fn character_group(self: &Arc<Self>) -> Vec<LinearCharacter> {
        (0..self.size() as usize)
            .map(|i| LinearCharacter {
                quotient: self.clone(),
                exponents: mixed_radix_digits(i, &self.orders),
            })
            .collect()
    }

    pub fn trivial_character(self: &Arc<Self>) -> LinearCharacter {
        LinearCharacter {
            quotient: self.clone(),
            exponents: vec![0; self.orders.len()],
        }
    }

    pub fn character(self: &Arc<Self>, exponents: Vec<u32>) -> Result<LinearCharacter> {
        if exponents.len() != self.orders.len() || exponents.iter().zip(&self.orders).any(|(&e, &o)| e >= o) {
            return Err(Error::BadParameter(format!(
                "exponents {exponents:?} do not fit orders {:?}",
                self.orders
            )));
        }
        Ok(LinearCharacter {
            quotient: self.clone(),
            exponents,
        })
    }

    /// The character g ↦ ζ_E^{value(g)} with value a homomorphism to Z/E
    /// (E = exponent), recovered by evaluation on the generators.
    pub fn character_from_values(self: &Arc<Self>, mut value: impl FnMut(u32) -> u32) -> LinearCharacter {
        let e = self.exponent;
        let exponents = self
            .generators
            .iter()
            .zip(&self.orders)
            .map(|(&g, &o)| {
                let v = value(g) % e;
                // v = exps·(E/o)
                debug_assert_eq!(v % (e / o), 0);
                v / (e / o)
            })
            .collect();
        LinearCharacter {
            quotient: self.clone(),
            exponents,
        }
    }
}

fn mixed_radix_index(l: &[u32], radices: &[u32]) -> usize {
    l.iter()
        .zip(radices)
        .rev()
        .fold(0usize, |acc, (&x, &o)| acc * o as usize + x as usize)
}

fn mixed_radix_digits(mut i: usize, radices: &[u32]) -> Vec<u32> {
    radices
        .iter()
        .map(|&o| {
            let d = (i % o as usize) as u32;
            i /= o as usize;
            d
        })
        .collect()
}

/// A homomorphism T → C^× given by exponents on the cyclic factors of T^ab.
#[derive(Clone)]
pub struct LinearCharacter {
    pub quotient: Arc<AbelianQuotient>,
    pub exponents: Vec<u32>,
}

impl PartialEq for LinearCharacter {
    fn eq(&self, other: &Self) -> bool {
        Arc::ptr_eq(&self.quotient, &other.quotient) && self.exponents == other.exponents
    }
}

impl Eq for LinearCharacter {}

impl fmt::Debug for LinearCharacter {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "χ{:?}", self.exponents)
    }
}

impl LinearCharacter {
    /// χ(g) = ζ_E^{value(g)} with E the exponent of the quotient.
    pub fn value(&self, g: u32) -> u32 {
        let q = &self.quotient;
        let e = q.exponent as u64;
        let s: u64 = self
            .exponents
            .iter()
            .zip(q.log(g))
            .zip(&q.orders)
            .map(|((&x, &l), &o)| x as u64 * l as u64 * (e / o as u64))
            .sum();
        (s % e) as u32
    }

    /// The value as an exponent of ζ_level; `level` must be a multiple of E.
    pub fn value_at_level(&self, g: u32, level: u32) -> Result<u32> {
        let e = self.quotient.exponent;
        if level % e != 0 {
            return Err(Error::LevelTooSmall { level, needed: e });
        }
        Ok(self.value(g) * (level / e))
    }

    pub fn is_trivial(&self) -> bool {
        self.exponents.iter().all(|&x| x == 0)
    }

    /// Order of χ in the character group.
    pub fn order(&self) -> u32 {
        let q = &self.quotient;
        self.exponents
            .iter()
            .zip(&q.orders)
            .map(|(&x, &o)| if x == 0 { 1 } else { o / gcd(x, o) })
            .max()
            .unwrap_or(1)
    }

    pub fn mul(&self, other: &LinearCharacter) -> LinearCharacter {
        LinearCharacter {
            quotient: self.quotient.clone(),
            exponents: self.quotient.add_logs(&self.exponents, &other.exponents),
        }
    }

    pub fn index(&self) -> usize {
        self.quotient.index_of_log(&self.exponents)
    }
}

pub fn gcd(a: u32, b: u32) -> u32 {
    if b == 0 {
        a
    } else {
        gcd(b, a % b)
    }
}

/// Stabilizer in G of a linear character χ of a normal T = 1+U with A² ⊆ U.
///
/// Returns the subspace B with stabilizer 1+B. The scan runs over the lifts
/// of A/A², since 1+A² fixes every such χ; the returned subspace is checked
/// to account for exactly the stabilizing elements and to be closed under
/// multiplication.
pub fn stabilizer_of_character(g: &AlgebraGroup, t: &Subgroup, chi: &LinearCharacter) -> Result<Subspace> {
    if !g.is_normal(&t.space) {
        return Err(Error::NotNormal);
    }
    let tgens: Vec<(u32, u32)> = t
        .group
        .generators()
        .iter()
        .map(|&x| (x, t.include(x)))
        .collect();
    stabilizer_scan(g, |h| {
        let hi = g.inv(h);
        tgens.iter().all(|&(x, xi)| {
            let y = g.mul(g.mul(hi, xi), h);
            let ys = t.project(g, y).expect("T is normal");
            chi.value(ys) == chi.value(x)
        })
    })
}

/// Collects {1+v : v ∈ lift of A/A², fixes(1+v)}, adds A², and verifies the
/// result is an algebra subgroup of the expected order.
pub fn stabilizer_scan(g: &AlgebraGroup, fixes: impl Fn(u32) -> bool) -> Result<Subspace> {
    let alg = g.algebra();
    let f = g.field();
    let d = alg.dim();
    let a2 = alg.power_ideal(2);
    let cols = a2.complement_columns();
    let q = f.size() as u64;
    let r = cols.len();
    let mut passing = Vec::new();
    let total = q.pow(r as u32);
    for i in 0..total {
        let mut v = vec![FieldElement::ZERO; d];
        let mut x = i;
        for &c in &cols {
            v[c] = FieldElement((x % q) as u32);
            x /= q;
        }
        if fixes(g.encode(&v)) {
            passing.push(v);
        }
    }
    let count = passing.len();
    let span = Subspace::span(f, d, passing.into_iter().chain(a2.rows.iter().cloned()));
    let expected = q.pow((span.rank() - a2.rank()) as u32);
    if expected != count as u64 || !alg.is_subalgebra(&span) {
        return Err(Error::StabilizerNotAlgebraSubgroup {
            elements: count,
            span_rank: span.rank(),
        });
    }
    Ok(span)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::gf::make_field;
    use crate::nilalg::{builtin_algebra, BuiltinKind};

    fn group(kind: BuiltinKind, p: u32, m: u32) -> Arc<AlgebraGroup> {
        let f = make_field(p, m, None).unwrap();
        AlgebraGroup::new(Arc::new(builtin_algebra(&kind, &f).unwrap())).unwrap()
    }

    fn u3(p: u32, m: u32) -> Arc<AlgebraGroup> {
        group(BuiltinKind::UpperTriangular(3), p, m)
    }

    #[test]
    fn arithmetic_examples() {
        let g = u3(2, 1);
        // codes: 1+b1 = 1, 1+b2 = 2, 1+b3 = 4
        assert_eq!(g.mul(1, 2), 7);
        assert_eq!(g.commutator(1, 2), 4);
        assert_eq!(g.inv(3), 7);
        assert_eq!(g.mul(3, 7), 0);
        assert_eq!(g.conjugate(4, 1), 4);
    }

    #[test]
    fn enumeration_sizes() {
        assert_eq!(group(BuiltinKind::TruncatedPoly(2), 2, 1).order(), 2);
        assert_eq!(u3(2, 1).order(), 8);
        assert_eq!(u3(2, 2).order(), 64);
        let f = make_field(2, 1, None).unwrap();
        let big = builtin_algebra(&BuiltinKind::UpperTriangular(7), &f).unwrap();
        assert!(matches!(AlgebraGroup::new(Arc::new(big)), Err(Error::TooLarge { .. })));
    }

    #[test]
    fn commutator_subgroups() {
        let g = u3(2, 1);
        let full = Subspace::full(3);
        let a2 = g.algebra().power_ideal(2);
        assert_eq!(g.commutator_subgroup(&full, &full).unwrap(), vec![0, 4]);
        assert_eq!(g.commutator_subgroup(&full, &a2).unwrap(), vec![0]);
        let t3 = group(BuiltinKind::TruncatedPoly(3), 2, 1);
        assert_eq!(t3.commutator_subgroup(&Subspace::full(2), &Subspace::full(2)).unwrap(), vec![0]);
    }

    #[test]
    fn abelianization_examples() {
        let q = u3(2, 1).abelianization();
        assert_eq!(q.orders, vec![2, 2]);
        assert_eq!(q.generators, vec![1, 2]);
        assert_eq!(q.derived, vec![0, 4]);
        let t3 = group(BuiltinKind::TruncatedPoly(3), 2, 1).abelianization();
        assert_eq!(t3.orders, vec![4]);
        assert_eq!(t3.generators, vec![1]);
        let x2 = group(BuiltinKind::TruncatedPoly(2), 2, 1).abelianization();
        assert_eq!(x2.orders, vec![2]);
    }

    #[test]
    fn log_is_a_homomorphism() {
        for g in [u3(3, 1), group(BuiltinKind::TruncatedPoly(4), 2, 1), u3(2, 2)] {
            let q = g.abelianization();
            let prod: u32 = q.orders.iter().product();
            assert_eq!(prod as usize * q.derived.len(), g.order() as usize);
            for a in g.elements() {
                assert_eq!(q.log(a).iter().all(|&x| x == 0), q.derived.binary_search(&a).is_ok());
                for b in g.elements().step_by(3) {
                    assert_eq!(q.log(g.mul(a, b)), q.add_logs(q.log(a), q.log(b)).as_slice());
                }
            }
        }
    }

    #[test]
    fn class_examples() {
        let g = u3(2, 1);
        let mut sizes = g.classes().sizes.clone();
        sizes.sort();
        assert_eq!(sizes, vec![1, 1, 2, 2, 2]);
        assert_eq!(group(BuiltinKind::TruncatedPoly(3), 2, 1).num_classes(), 4);
        assert_eq!(group(BuiltinKind::TruncatedPoly(2), 2, 1).num_classes(), 2);
    }

    #[test]
    fn characters_are_multiplicative_and_distinct() {
        let g = group(BuiltinKind::TruncatedPoly(3), 2, 1);
        let q = g.abelianization();
        let chars = q.character_group();
        assert_eq!(chars.len(), 4);
        for chi in &chars {
            for a in g.elements() {
                for b in g.elements() {
                    assert_eq!(chi.value(g.mul(a, b)), (chi.value(a) + chi.value(b)) % q.exponent);
                }
            }
        }
        let tables: std::collections::HashSet<Vec<u32>> =
            chars.iter().map(|c| g.elements().map(|a| c.value(a)).collect()).collect();
        assert_eq!(tables.len(), 4);
        // exponent-1 character sends 1+b1 to ζ_4
        assert_eq!(chars[1].value(1), 1);
    }

    #[test]
    fn stabilizers() {
        let g = u3(2, 1);
        let a2 = g.algebra().power_ideal(2);
        let t = g.subgroup(&a2).unwrap();
        let tq = t.group.abelianization();
        for chi in tq.character_group() {
            assert_eq!(stabilizer_of_character(&g, &t, &chi).unwrap(), Subspace::full(3));
        }
        let u4 = group(BuiltinKind::UpperTriangular(4), 2, 1);
        let a2 = u4.algebra().power_ideal(2);
        let t = u4.subgroup(&a2).unwrap();
        let tq = t.group.abelianization();
        // basis of A: e12 e23 e34 e13 e24 e14; A² = span(e13, e24, e14)
        // in subgroup coordinates: e13, e24, e14 → sub codes 1, 2, 4
        let chi = tq
            .character_group()
            .into_iter()
            .find(|c| c.value(4) != 0 && c.value(1) != 0 && c.value(2) == 0)
            .unwrap();
        let stab = stabilizer_of_character(&u4, &t, &chi).unwrap();
        assert!(stab.rank() < 6);
        let e34 = u4.encode(&unit_vector(6, 2));
        assert!(!stab.contains(u4.field(), &u4.decode(e34)));
    }
}
