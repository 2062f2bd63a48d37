//! Finite fields F_{p^m} given by an explicit irreducible modulus over F_p.
//!
//! An element is stored as its code `c_0 + c_1 p + ... + c_{m-1} p^{m-1}`
//! where `c_i` are the coefficients in the power basis of a root of the
//! modulus. Codes are canonical, so equality of codes is equality of
//! elements, and code order is the canonical element order used everywhere
//! a deterministic scan is needed. Elements carry no reference to their
//! field: every operation goes through a [`FieldDescriptor`].
//!
//! Moduli are written highest degree first, e.g. `[1, 1, 1]` is `x^2+x+1`.

use std::collections::HashMap;
use std::fmt;
use std::sync::{Arc, Mutex, OnceLock};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Upper bound on field sizes handled by the table-driven arithmetic.
pub const MAX_FIELD_SIZE: u64 = 1 << 16;

const ADD_TABLE_LIMIT: u32 = 1024;

#[derive(Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Default, Serialize, Deserialize)]
pub struct FieldElement(pub u32);

impl FieldElement {
    pub const ZERO: FieldElement = FieldElement(0);
    pub const ONE: FieldElement = FieldElement(1);

    #[inline]
    pub fn code(self) -> u32 {
        self.0
    }

    #[inline]
    pub fn is_zero(self) -> bool {
        self.0 == 0
    }
}

impl fmt::Debug for FieldElement {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "#{}", self.0)
    }
}

/// Serialized form of a field: `{"p": int, "m": int, "modulus": [int,...]}`.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct FieldSpec {
    pub p: u32,
    pub m: u32,
    pub modulus: Vec<u32>,
}

pub struct FieldDescriptor {
    p: u32,
    m: u32,
    modulus: Vec<u32>,
    size: u32,
    exp: Vec<u32>,
    log: Vec<u32>,
    neg: Vec<u32>,
    add: Vec<u32>,
}

impl PartialEq for FieldDescriptor {
    fn eq(&self, other: &Self) -> bool {
        self.p == other.p && self.m == other.m && self.modulus == other.modulus
    }
}

impl Eq for FieldDescriptor {}

impl fmt::Debug for FieldDescriptor {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "F_{}[{:?}]", self.size, self.modulus)
    }
}

impl FieldDescriptor {
    pub fn p(&self) -> u32 {
        self.p
    }

    pub fn m(&self) -> u32 {
        self.m
    }

    pub fn size(&self) -> u32 {
        self.size
    }

    /// Modulus coefficients, leading coefficient first.
    pub fn modulus(&self) -> &[u32] {
        &self.modulus
    }

    pub fn spec(&self) -> FieldSpec {
        FieldSpec {
            p: self.p,
            m: self.m,
            modulus: self.modulus.clone(),
        }
    }

    #[inline]
    pub fn zero(&self) -> FieldElement {
        FieldElement::ZERO
    }

    #[inline]
    pub fn one(&self) -> FieldElement {
        FieldElement::ONE
    }

    #[inline]
    pub fn contains(&self, x: FieldElement) -> bool {
        x.0 < self.size
    }

    /// The root of the modulus, i.e. the element with coefficients (0, 1, 0, ...).
    /// For prime fields (modulus `x`) this is zero.
    pub fn generator(&self) -> FieldElement {
        if self.m == 1 {
            FieldElement::ZERO
        } else {
            FieldElement(self.p)
        }
    }

    /// Builds an element from little-endian power-basis coefficients.
    pub fn element(&self, coeffs: &[u32]) -> Result<FieldElement> {
        if coeffs.len() > self.m as usize || coeffs.iter().any(|&c| c >= self.p) {
            return Err(Error::FieldMismatch);
        }
        let mut code = 0u32;
        for &c in coeffs.iter().rev() {
            code = code * self.p + c;
        }
        Ok(FieldElement(code))
    }

    pub fn coefficients(&self, x: FieldElement) -> Vec<u32> {
        let mut out = Vec::with_capacity(self.m as usize);
        let mut c = x.0;
        for _ in 0..self.m {
            out.push(c % self.p);
            c /= self.p;
        }
        out
    }

    /// Image of an integer in the prime field.
    pub fn from_int(&self, n: i64) -> FieldElement {
        FieldElement(n.rem_euclid(self.p as i64) as u32)
    }

    pub fn elements(&self) -> impl Iterator<Item = FieldElement> {
        (0..self.size).map(FieldElement)
    }

    #[inline]
    pub fn add(&self, a: FieldElement, b: FieldElement) -> FieldElement {
        if self.p == 2 {
            FieldElement(a.0 ^ b.0)
        } else if !self.add.is_empty() {
            FieldElement(self.add[(a.0 * self.size + b.0) as usize])
        } else {
            let (mut x, mut y, mut out, mut place) = (a.0, b.0, 0u32, 1u32);
            while x > 0 || y > 0 {
                out += ((x % self.p + y % self.p) % self.p) * place;
                x /= self.p;
                y /= self.p;
                place *= self.p;
            }
            FieldElement(out)
        }
    }

    #[inline]
    pub fn neg(&self, a: FieldElement) -> FieldElement {
        FieldElement(self.neg[a.0 as usize])
    }

    #[inline]
    pub fn sub(&self, a: FieldElement, b: FieldElement) -> FieldElement {
        self.add(a, self.neg(b))
    }

    #[inline]
    pub fn mul(&self, a: FieldElement, b: FieldElement) -> FieldElement {
        if a.0 == 0 || b.0 == 0 {
            return FieldElement::ZERO;
        }
        let n = self.size - 1;
        let e = self.log[a.0 as usize] + self.log[b.0 as usize];
        FieldElement(self.exp[(if e >= n { e - n } else { e }) as usize])
    }

    pub fn inv(&self, a: FieldElement) -> Result<FieldElement> {
        if a.0 == 0 {
            return Err(Error::DivisionByZero);
        }
        let n = self.size - 1;
        let l = self.log[a.0 as usize];
        Ok(FieldElement(self.exp[((n - l) % n) as usize]))
    }

    pub fn div(&self, a: FieldElement, b: FieldElement) -> Result<FieldElement> {
        Ok(self.mul(a, self.inv(b)?))
    }

    pub fn pow(&self, a: FieldElement, e: u64) -> FieldElement {
        if e == 0 {
            return FieldElement::ONE;
        }
        if a.0 == 0 {
            return FieldElement::ZERO;
        }
        let n = (self.size - 1) as u64;
        let l = self.log[a.0 as usize] as u64;
        FieldElement(self.exp[((l * (e % n)) % n) as usize])
    }

    /// Degree s with p^s = sub_size, provided F_{sub_size} is a subfield.
    pub fn subfield_degree(&self, sub_size: u64) -> Result<u32> {
        let mut s = 0;
        let mut acc = 1u64;
        while acc < sub_size {
            acc *= self.p as u64;
            s += 1;
        }
        if acc != sub_size || s == 0 || self.m % s != 0 {
            return Err(Error::NotASubfield {
                sub: sub_size,
                size: self.size as u64,
            });
        }
        Ok(s)
    }

    /// x ↦ x^q for a subfield size q.
    pub fn frobenius(&self, x: FieldElement, q: u64) -> Result<FieldElement> {
        self.subfield_degree(q)?;
        Ok(self.pow(x, q))
    }

    /// Inverse of x ↦ x^q.
    pub fn frobenius_inv(&self, x: FieldElement, q: u64) -> Result<FieldElement> {
        let s = self.subfield_degree(q)?;
        let order = self.m / s;
        let mut y = x;
        for _ in 1..order {
            y = self.pow(y, q);
        }
        Ok(y)
    }

    pub fn is_in_subfield(&self, x: FieldElement, sub_degree: u32) -> bool {
        sub_degree != 0
            && self.m % sub_degree == 0
            && self.pow(x, (self.p as u64).pow(sub_degree)) == x
    }

    /// Tr_{F/F_{p^s}}(x) = Σ_{i<m/s} x^{p^{s i}}, returned inside this field.
    pub fn trace_to_subfield(&self, x: FieldElement, sub_degree: u32) -> Result<FieldElement> {
        let q = self.check_subfield(sub_degree)?;
        let mut acc = FieldElement::ZERO;
        let mut y = x;
        for _ in 0..self.m / sub_degree {
            acc = self.add(acc, y);
            y = self.pow(y, q);
        }
        Ok(acc)
    }

    /// N_{F/F_{p^s}}(x) = Π_{i<m/s} x^{p^{s i}}, returned inside this field.
    pub fn norm_to_subfield(&self, x: FieldElement, sub_degree: u32) -> Result<FieldElement> {
        let q = self.check_subfield(sub_degree)?;
        let mut acc = FieldElement::ONE;
        let mut y = x;
        for _ in 0..self.m / sub_degree {
            acc = self.mul(acc, y);
            y = self.pow(y, q);
        }
        Ok(acc)
    }

    fn check_subfield(&self, sub_degree: u32) -> Result<u64> {
        if sub_degree == 0 || self.m % sub_degree != 0 {
            return Err(Error::NotASubfield {
                sub: (self.p as u64).pow(sub_degree),
                size: self.size as u64,
            });
        }
        Ok((self.p as u64).pow(sub_degree))
    }
}

// ---------------------------------------------------------------------------
// polynomials over F_p, little-endian, used only while building fields

fn trim(v: &mut Vec<u32>) {
    while v.len() > 1 && *v.last().unwrap() == 0 {
        v.pop();
    }
}

fn inv_mod_p(a: u32, p: u32) -> u32 {
    let mut r = 1u64;
    let (mut b, mut e) = (a as u64 % p as u64, p as u64 - 2);
    while e > 0 {
        if e & 1 == 1 {
            r = r * b % p as u64;
        }
        b = b * b % p as u64;
        e >>= 1;
    }
    r as u32
}

fn poly_rem(a: &[u32], f: &[u32], p: u32) -> Vec<u32> {
    let mut r = a.to_vec();
    trim(&mut r);
    let df = f.len() - 1;
    let lead_inv = inv_mod_p(f[df], p) as u64;
    while r.len() > df && !poly_is_zero(&r) {
        let dr = r.len() - 1;
        let c = r[dr] as u64 * lead_inv % p as u64;
        for i in 0..=df {
            let idx = dr - df + i;
            r[idx] = ((r[idx] as u64 + (p as u64 - c) * f[i] as u64) % p as u64) as u32;
        }
        r.pop();
        if r.is_empty() {
            r.push(0);
        }
        trim(&mut r);
    }
    r
}

fn poly_mul(a: &[u32], b: &[u32], p: u32) -> Vec<u32> {
    let mut out = vec![0u64; a.len() + b.len() - 1];
    for (i, &x) in a.iter().enumerate() {
        if x == 0 {
            continue;
        }
        for (j, &y) in b.iter().enumerate() {
            out[i + j] = (out[i + j] + x as u64 * y as u64) % p as u64;
        }
    }
    let mut v: Vec<u32> = out.into_iter().map(|x| x as u32).collect();
    trim(&mut v);
    v
}

fn poly_mulmod(a: &[u32], b: &[u32], f: &[u32], p: u32) -> Vec<u32> {
    poly_rem(&poly_mul(a, b, p), f, p)
}

fn poly_powmod(a: &[u32], mut e: u64, f: &[u32], p: u32) -> Vec<u32> {
    let mut base = poly_rem(a, f, p);
    let mut acc = vec![1u32];
    while e > 0 {
        if e & 1 == 1 {
            acc = poly_mulmod(&acc, &base, f, p);
        }
        base = poly_mulmod(&base, &base, f, p);
        e >>= 1;
    }
    acc
}

fn poly_is_zero(a: &[u32]) -> bool {
    a.iter().all(|&c| c == 0)
}

fn poly_gcd(a: &[u32], b: &[u32], p: u32) -> Vec<u32> {
    let mut x = a.to_vec();
    let mut y = b.to_vec();
    trim(&mut x);
    trim(&mut y);
    while !poly_is_zero(&y) {
        let r = poly_rem(&x, &y, p);
        x = y;
        y = r;
    }
    x
}

fn poly_sub(a: &[u32], b: &[u32], p: u32) -> Vec<u32> {
    let n = a.len().max(b.len());
    let mut out: Vec<u32> = (0..n)
        .map(|i| {
            let x = *a.get(i).unwrap_or(&0);
            let y = *b.get(i).unwrap_or(&0);
            (x + p - y) % p
        })
        .collect();
    trim(&mut out);
    out
}

fn is_prime(p: u32) -> bool {
    if p < 2 {
        return false;
    }
    let mut d = 2u32;
    while d as u64 * d as u64 <= p as u64 {
        if p % d == 0 {
            return false;
        }
        d += 1;
    }
    true
}

fn prime_factors(mut n: u64) -> Vec<u64> {
    let mut out = Vec::new();
    let mut d = 2;
    while d * d <= n {
        if n % d == 0 {
            out.push(d);
            while n % d == 0 {
                n /= d;
            }
        }
        d += 1;
    }
    if n > 1 {
        out.push(n);
    }
    out
}

/// Irreducibility over F_p: no factor of degree ≤ deg/2, tested by
/// gcd(f, x^{p^i} - x) = 1 for i ≤ deg/2. `f` is little-endian.
pub fn is_irreducible(f: &[u32], p: u32) -> bool {
    let deg = f.len() - 1;
    if deg == 0 {
        return false;
    }
    let x = vec![0u32, 1];
    let mut h = x.clone();
    for _ in 1..=deg / 2 {
        h = poly_powmod(&h, p as u64, f, p);
        let g = poly_gcd(f, &poly_sub(&h, &x, p), p);
        if g.len() > 1 {
            return false;
        }
    }
    true
}

fn digits(code: u32, p: u32, m: u32) -> Vec<u32> {
    let mut out = Vec::with_capacity(m as usize);
    let mut c = code;
    for _ in 0..m {
        out.push(c % p);
        c /= p;
    }
    out
}

fn undigits(d: &[u32], p: u32) -> u32 {
    d.iter().rev().fold(0, |acc, &c| acc * p + c)
}

fn build(p: u32, m: u32, modulus: Vec<u32>) -> FieldDescriptor {
    let size = p.pow(m);
    let poly: Vec<u32> = modulus.iter().rev().copied().collect();
    let slow_mul = |a: u32, b: u32| -> u32 {
        let r = poly_mulmod(&digits(a, p, m), &digits(b, p, m), &poly, p);
        undigits(&r, p)
    };
    let n = (size - 1) as u64;
    let factors = prime_factors(n);
    let slow_pow = |a: u32, e: u64| -> u32 { undigits(&poly_powmod(&digits(a, p, m), e, &poly, p), p) };
    let primitive = (1..size)
        .find(|&g| factors.iter().all(|&r| slow_pow(g, n / r) != 1))
        .expect("multiplicative group of a finite field is cyclic");
    let mut exp = Vec::with_capacity(n as usize);
    let mut log = vec![0u32; size as usize];
    let mut x = 1u32;
    for i in 0..n as u32 {
        exp.push(x);
        log[x as usize] = i;
        x = slow_mul(x, primitive);
    }
    let neg: Vec<u32> = (0..size)
        .map(|c| {
            let d: Vec<u32> = digits(c, p, m).iter().map(|&x| (p - x) % p).collect();
            undigits(&d, p)
        })
        .collect();
    let add = if p != 2 && size <= ADD_TABLE_LIMIT {
        let mut t = vec![0u32; (size * size) as usize];
        for a in 0..size {
            let da = digits(a, p, m);
            for b in 0..size {
                let db = digits(b, p, m);
                let s: Vec<u32> = da.iter().zip(&db).map(|(x, y)| (x + y) % p).collect();
                t[(a * size + b) as usize] = undigits(&s, p);
            }
        }
        t
    } else {
        Vec::new()
    };
    FieldDescriptor {
        p,
        m,
        modulus,
        size,
        exp,
        log,
        neg,
        add,
    }
}

type FieldKey = (u32, u32, Vec<u32>);

fn field_cache() -> &'static Mutex<HashMap<FieldKey, Arc<FieldDescriptor>>> {
    static CACHE: OnceLock<Mutex<HashMap<FieldKey, Arc<FieldDescriptor>>>> = OnceLock::new();
    CACHE.get_or_init(|| Mutex::new(HashMap::new()))
}

fn canonical_cache() -> &'static Mutex<HashMap<(u32, u32), Vec<u32>>> {
    static CACHE: OnceLock<Mutex<HashMap<(u32, u32), Vec<u32>>>> = OnceLock::new();
    CACHE.get_or_init(|| Mutex::new(HashMap::new()))
}

/// Lexicographically smallest monic irreducible of degree m over F_p,
/// leading coefficient first.
pub fn canonical_modulus(p: u32, m: u32) -> Vec<u32> {
    if let Some(v) = canonical_cache().lock().unwrap().get(&(p, m)) {
        return v.clone();
    }
    let count = (p as u64).pow(m);
    let found = (0..count)
        .map(|k| {
            // big-endian digits of k give c_{m-1}, ..., c_0
            let mut tail = vec![0u32; m as usize];
            let mut r = k;
            for i in (0..m as usize).rev() {
                tail[i] = (r % p as u64) as u32;
                r /= p as u64;
            }
            let mut modulus = vec![1u32];
            modulus.extend(tail);
            modulus
        })
        .find(|modulus| {
            let le: Vec<u32> = modulus.iter().rev().copied().collect();
            is_irreducible(&le, p)
        })
        .expect("irreducible polynomials exist in every degree");
    canonical_cache().lock().unwrap().insert((p, m), found.clone());
    found
}

/// Validates (or chooses) a modulus and returns the shared descriptor of F_{p^m}.
pub fn make_field(p: u32, m: u32, modulus: Option<&[u32]>) -> Result<Arc<FieldDescriptor>> {
    if !is_prime(p) {
        return Err(Error::NotPrime(p));
    }
    if m == 0 || (p as u64).checked_pow(m).map_or(true, |q| q > MAX_FIELD_SIZE) {
        return Err(Error::DegreeMismatch {
            p,
            m,
            modulus: modulus.map(|x| x.to_vec()).unwrap_or_default(),
        });
    }
    let modulus = match modulus {
        Some(md) => {
            if md.len() != m as usize + 1 || md[0] != 1 || md.iter().any(|&c| c >= p) {
                return Err(Error::DegreeMismatch {
                    p,
                    m,
                    modulus: md.to_vec(),
                });
            }
            let le: Vec<u32> = md.iter().rev().copied().collect();
            if !is_irreducible(&le, p) {
                return Err(Error::ReducibleModulus {
                    p,
                    modulus: md.to_vec(),
                });
            }
            md.to_vec()
        }
        None => canonical_modulus(p, m),
    };
    let key = (p, m, modulus.clone());
    if let Some(f) = field_cache().lock().unwrap().get(&key) {
        return Ok(f.clone());
    }
    let f = Arc::new(build(p, m, modulus));
    let mut cache = field_cache().lock().unwrap();
    Ok(cache.entry(key).or_insert(f).clone())
}

pub fn field_from_spec(spec: &FieldSpec) -> Result<Arc<FieldDescriptor>> {
    make_field(spec.p, spec.m, Some(&spec.modulus))
}

/// The canonical embedding src ↪ dst as a lookup table on codes.
pub struct Embedding {
    pub image_of_root: FieldElement,
    table: Vec<u32>,
}

impl Embedding {
    #[inline]
    pub fn apply(&self, x: FieldElement) -> FieldElement {
        FieldElement(self.table[x.0 as usize])
    }
}

type EmbeddingKey = (FieldKey, FieldKey);

fn embedding_cache() -> &'static Mutex<HashMap<EmbeddingKey, Arc<Embedding>>> {
    static CACHE: OnceLock<Mutex<HashMap<EmbeddingKey, Arc<Embedding>>>> = OnceLock::new();
    CACHE.get_or_init(|| Mutex::new(HashMap::new()))
}

fn key_of(f: &FieldDescriptor) -> FieldKey {
    (f.p, f.m, f.modulus.clone())
}

/// Canonical embedding: the root of `src`'s modulus goes to the smallest
/// (by code) root of that modulus inside `dst`.
pub fn embedding(src: &FieldDescriptor, dst: &FieldDescriptor) -> Result<Arc<Embedding>> {
    if src.p != dst.p || dst.m % src.m != 0 {
        return Err(Error::NoEmbedding {
            src: src.size as u64,
            dst: dst.size as u64,
        });
    }
    let key = (key_of(src), key_of(dst));
    if let Some(e) = embedding_cache().lock().unwrap().get(&key) {
        return Ok(e.clone());
    }
    let eval = |r: FieldElement| {
        src.modulus
            .iter()
            .fold(FieldElement::ZERO, |acc, &c| dst.add(dst.mul(acc, r), FieldElement(c)))
    };
    let root = dst
        .elements()
        .find(|&r| eval(r).is_zero())
        .expect("an irreducible of degree dividing m splits in F_{p^m}");
    let powers: Vec<FieldElement> = (0..src.m)
        .scan(FieldElement::ONE, |acc, _| {
            let cur = *acc;
            *acc = dst.mul(*acc, root);
            Some(cur)
        })
        .collect();
    let table = (0..src.size)
        .map(|code| {
            digits(code, src.p, src.m)
                .iter()
                .zip(&powers)
                .fold(FieldElement::ZERO, |acc, (&c, &pw)| {
                    dst.add(acc, dst.mul(FieldElement(c), pw))
                })
                .0
        })
        .collect();
    let e = Arc::new(Embedding {
        image_of_root: root,
        table,
    });
    embedding_cache().lock().unwrap().insert(key, e.clone());
    Ok(e)
}

pub fn embed(src: &FieldDescriptor, dst: &FieldDescriptor, x: FieldElement) -> Result<FieldElement> {
    if !src.contains(x) {
        return Err(Error::FieldMismatch);
    }
    Ok(embedding(src, dst)?.apply(x))
}

/// Coordinates of a big field over an embedded subfield in the basis
/// 1, t, ..., t^{n-1}, where t is the root of the big field's modulus.
pub struct RelativeBasis {
    pub small: Arc<FieldDescriptor>,
    pub big: Arc<FieldDescriptor>,
    pub degree: usize,
    pub embedding: Arc<Embedding>,
    // coords[code of big element] = n codes of small elements
    coords: Vec<u32>,
    // t^n expressed in the basis
    pub min_poly_tail: Vec<FieldElement>,
    pub t: FieldElement,
}

impl RelativeBasis {
    pub fn new(small: Arc<FieldDescriptor>, big: Arc<FieldDescriptor>) -> Result<RelativeBasis> {
        let embedding = embedding(&small, &big)?;
        let n = (big.m / small.m) as usize;
        let t = if n == 1 { FieldElement::ONE } else { big.generator() };
        let powers: Vec<FieldElement> = (0..n).map(|i| big.pow(t, i as u64)).collect();
        let q = small.size as usize;
        let mut coords = vec![u32::MAX; big.size as usize * n];
        let mut idx = vec![0usize; n];
        loop {
            let val = idx.iter().zip(&powers).fold(FieldElement::ZERO, |acc, (&c, &pw)| {
                big.add(acc, big.mul(embedding.apply(FieldElement(c as u32)), pw))
            });
            let slot = &mut coords[val.0 as usize * n..(val.0 as usize + 1) * n];
            if slot[0] != u32::MAX {
                return Err(Error::Inconsistent("relative basis is not a basis".into()));
            }
            for (s, &c) in slot.iter_mut().zip(&idx) {
                *s = c as u32;
            }
            let mut i = 0;
            while i < n {
                idx[i] += 1;
                if idx[i] < q {
                    break;
                }
                idx[i] = 0;
                i += 1;
            }
            if i == n {
                break;
            }
        }
        let tn = big.pow(t, n as u64);
        let min_poly_tail = coords[tn.0 as usize * n..(tn.0 as usize + 1) * n]
            .iter()
            .map(|&c| FieldElement(c))
            .collect();
        Ok(RelativeBasis {
            small,
            big,
            degree: n,
            embedding,
            coords,
            min_poly_tail,
            t,
        })
    }

    pub fn coordinates(&self, x: FieldElement) -> &[u32] {
        let n = self.degree;
        &self.coords[x.0 as usize * n..(x.0 as usize + 1) * n]
    }

    /// Coordinates of t^e for any e ≥ 0.
    pub fn power_coordinates(&self, e: usize) -> Vec<FieldElement> {
        let v = self.big.pow(self.t, e as u64);
        self.coordinates(v).iter().map(|&c| FieldElement(c)).collect()
    }

    /// The subfield element if x lies in the image of the embedding.
    pub fn restrict(&self, x: FieldElement) -> Option<FieldElement> {
        let c = self.coordinates(x);
        if c[1..].iter().all(|&v| v == 0) {
            Some(FieldElement(c[0]))
        } else {
            None
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn prime_field_modulus_is_x() {
        let f = make_field(2, 1, None).unwrap();
        assert_eq!(f.modulus(), &[1, 0]);
        assert_eq!(f.size(), 2);
    }

    #[test]
    fn f4_canonical_modulus() {
        let f = make_field(2, 2, None).unwrap();
        assert_eq!(f.modulus(), &[1, 1, 1]);
    }

    #[test]
    fn reducible_modulus_rejected() {
        assert!(matches!(
            make_field(2, 2, Some(&[1, 1, 0])),
            Err(Error::ReducibleModulus { .. })
        ));
        assert!(matches!(make_field(4, 1, None), Err(Error::NotPrime(4))));
        assert!(matches!(
            make_field(2, 2, Some(&[0, 1, 1])),
            Err(Error::DegreeMismatch { .. })
        ));
        assert!(matches!(
            make_field(2, 3, Some(&[1, 1, 1])),
            Err(Error::DegreeMismatch { .. })
        ));
    }

    #[test]
    fn canonical_moduli_small_towers() {
        assert_eq!(canonical_modulus(2, 4), vec![1, 0, 0, 1, 1]);
        assert_eq!(canonical_modulus(3, 2), vec![1, 0, 1]);
        assert_eq!(canonical_modulus(2, 3), vec![1, 0, 1, 1]);
    }

    #[test]
    fn f4_arithmetic_examples() {
        let f = make_field(2, 2, None).unwrap();
        let t = f.element(&[0, 1]).unwrap();
        let t1 = f.element(&[1, 1]).unwrap();
        assert_eq!(f.mul(t, t), t1);
        assert_eq!(f.trace_to_subfield(t, 1).unwrap(), FieldElement::ONE);
        assert_eq!(f.frobenius(t, 2).unwrap(), t1);
        assert_eq!(f.frobenius(t1, 2).unwrap(), t);
        let f2 = make_field(2, 1, None).unwrap();
        assert_eq!(f2.inv(FieldElement::ZERO), Err(Error::DivisionByZero));
        for x in f2.elements() {
            assert_eq!(f2.frobenius(x, 2).unwrap(), x);
        }
    }

    #[test]
    fn frobenius_requires_subfield() {
        let f = make_field(2, 2, None).unwrap();
        assert!(matches!(f.frobenius(FieldElement::ONE, 8), Err(Error::NotASubfield { .. })));
        assert!(matches!(f.trace_to_subfield(FieldElement::ONE, 3), Err(Error::NotASubfield { .. })));
    }

    #[test]
    fn embedding_examples() {
        let f2 = make_field(2, 1, None).unwrap();
        let f4 = make_field(2, 2, None).unwrap();
        assert_eq!(embed(&f2, &f4, FieldElement::ONE).unwrap(), FieldElement::ONE);
        assert_eq!(embed(&f2, &f4, FieldElement::ZERO).unwrap(), FieldElement::ZERO);
        let t = f4.element(&[0, 1]).unwrap();
        assert_eq!(embed(&f4, &f4, t).unwrap(), t);
        let f8 = make_field(2, 3, None).unwrap();
        assert!(matches!(embedding(&f4, &f8), Err(Error::NoEmbedding { .. })));
    }

    #[test]
    fn relative_basis_of_f16_over_f4() {
        let f4 = make_field(2, 2, None).unwrap();
        let f16 = make_field(2, 4, None).unwrap();
        let rb = RelativeBasis::new(f4.clone(), f16.clone()).unwrap();
        assert_eq!(rb.degree, 2);
        let e = rb.embedding.clone();
        for x in f16.elements() {
            let c = rb.coordinates(x);
            let back = f16.add(e.apply(FieldElement(c[0])), f16.mul(e.apply(FieldElement(c[1])), rb.t));
            assert_eq!(back, x);
        }
        for x in f4.elements() {
            assert_eq!(rb.restrict(e.apply(x)), Some(x));
        }
    }
}
