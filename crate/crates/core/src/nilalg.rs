//! Nilpotent associative algebras given by structure constants.

use std::sync::Arc;

use crate::error::{Error, Result};
use crate::gf::{embedding, make_field, FieldDescriptor, FieldElement};
use crate::linalg::{axpy, nullspace, unit_vector, zero_vector, Subspace, Vector};

/// A finite-dimensional nilpotent algebra over k with basis b_1, ..., b_d
/// and b_i b_j = Σ_l c[i][j][l] b_l.
#[derive(Clone, Debug)]
pub struct NilpotentAlgebra {
    field: Arc<FieldDescriptor>,
    dim: usize,
    sc: Vec<FieldElement>,
    // nonzero (l, c[i][j][l]) per (i, j)
    table: Vec<Vec<(usize, FieldElement)>>,
    powers: Vec<Subspace>,
    defined_over: Option<u32>,
}

impl PartialEq for NilpotentAlgebra {
    fn eq(&self, other: &Self) -> bool {
        *self.field == *other.field
            && self.dim == other.dim
            && self.sc == other.sc
            && self.defined_over == other.defined_over
    }
}

impl Eq for NilpotentAlgebra {}

impl NilpotentAlgebra {
    /// Builds and validates an algebra from a flat table indexed `(i*d + j)*d + l`.
    pub fn new(
        field: Arc<FieldDescriptor>,
        dim: usize,
        sc: Vec<FieldElement>,
        defined_over: Option<u32>,
    ) -> Result<NilpotentAlgebra> {
        if sc.len() != dim * dim * dim {
            return Err(Error::BadParameter(format!(
                "expected {} structure constants, got {}",
                dim * dim * dim,
                sc.len()
            )));
        }
        if sc.iter().any(|&c| !field.contains(c)) {
            return Err(Error::FieldMismatch);
        }
        if let Some(q) = defined_over {
            let s = field.subfield_degree(q as u64)?;
            if sc.iter().any(|&c| !field.is_in_subfield(c, s)) {
                return Err(Error::NotDefinedOverSubfield(q));
            }
        }
        let table = (0..dim * dim)
            .map(|ij| {
                (0..dim)
                    .filter_map(|l| {
                        let c = sc[ij * dim + l];
                        (!c.is_zero()).then_some((l, c))
                    })
                    .collect()
            })
            .collect();
        let mut alg = NilpotentAlgebra {
            field,
            dim,
            sc,
            table,
            powers: Vec::new(),
            defined_over,
        };
        alg.check_associative()?;
        alg.powers = alg.compute_powers()?;
        Ok(alg)
    }

    fn check_associative(&self) -> Result<()> {
        let d = self.dim;
        for i in 0..d {
            for j in 0..d {
                let bij = self.basis_product(i, j);
                for l in 0..d {
                    let left = self.mul(&bij, &unit_vector(d, l));
                    let right = self.mul(&unit_vector(d, i), &self.basis_product(j, l));
                    if left != right {
                        return Err(Error::NotAssociative((i, j, l)));
                    }
                }
            }
        }
        Ok(())
    }

    // A^1 = A, A^{k+1} = A^k · A, until zero
    fn compute_powers(&self) -> Result<Vec<Subspace>> {
        let d = self.dim;
        let f = &*self.field;
        let mut powers = vec![Subspace::full(d)];
        loop {
            let last = powers.last().unwrap();
            if last.is_zero() {
                return Ok(powers);
            }
            let next = Subspace::span(
                f,
                d,
                last.rows
                    .iter()
                    .flat_map(|r| (0..d).map(move |j| (r, j)))
                    .map(|(r, j)| self.mul(r, &unit_vector(d, j))),
            );
            if next.rank() == last.rank() {
                let witness = next.rows[0].iter().map(|x| x.0).collect();
                return Err(Error::NotNilpotent { witness });
            }
            powers.push(next);
        }
    }

    pub fn field(&self) -> &Arc<FieldDescriptor> {
        &self.field
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    /// Minimal n with A^n = 0.
    pub fn nclass(&self) -> usize {
        self.powers.len()
    }

    pub fn defined_over(&self) -> Option<u32> {
        self.defined_over
    }

    pub fn structure_constant(&self, i: usize, j: usize, l: usize) -> FieldElement {
        self.sc[(i * self.dim + j) * self.dim + l]
    }

    pub fn structure_constants(&self) -> &[FieldElement] {
        &self.sc
    }

    pub fn basis_product(&self, i: usize, j: usize) -> Vector {
        let mut v = zero_vector(self.dim);
        for &(l, c) in &self.table[i * self.dim + j] {
            v[l] = c;
        }
        v
    }

    pub fn mul(&self, x: &[FieldElement], y: &[FieldElement]) -> Vector {
        let f = &*self.field;
        let d = self.dim;
        let mut out = zero_vector(d);
        for (i, &xi) in x.iter().enumerate() {
            if xi.is_zero() {
                continue;
            }
            for (j, &yj) in y.iter().enumerate() {
                if yj.is_zero() {
                    continue;
                }
                let c = f.mul(xi, yj);
                for &(l, s) in &self.table[i * d + j] {
                    out[l] = f.add(out[l], f.mul(c, s));
                }
            }
        }
        out
    }

    pub fn is_commutative(&self) -> bool {
        let d = self.dim;
        (0..d).all(|i| (0..d).all(|j| self.table[i * d + j] == self.table[j * d + i]))
    }

    /// A^k as a subspace; A^1 = A and A^k = 0 for k ≥ nclass.
    pub fn power_ideal(&self, k: usize) -> Subspace {
        assert!(k >= 1, "power exponent must be at least 1");
        self.powers
            .get(k - 1)
            .cloned()
            .unwrap_or_else(|| Subspace::zero(self.dim))
    }

    /// k' ⊗_k A for [k':k] = n, same basis labels.
    pub fn extend_scalars(&self, n: u32) -> Result<NilpotentAlgebra> {
        if n == 0 {
            return Err(Error::BadParameter("extension degree must be positive".into()));
        }
        let defined_over = Some(self.defined_over.unwrap_or(self.field.size()));
        if n == 1 {
            let mut a = self.clone();
            a.defined_over = defined_over;
            return Ok(a);
        }
        let big = make_field(self.field.p(), self.field.m() * n, None)?;
        let e = embedding(&self.field, &big)?;
        let sc = self.sc.iter().map(|&c| e.apply(c)).collect();
        NilpotentAlgebra::new(big, self.dim, sc, defined_over)
    }

    /// Coordinatewise x ↦ x^q; an automorphism when A is defined over F_q.
    pub fn frobenius(&self, q: u32, v: &[FieldElement]) -> Result<Vector> {
        self.check_frobenius(q)?;
        Ok(v.iter().map(|&x| self.field.pow(x, q as u64)).collect())
    }

    pub fn frobenius_inv(&self, q: u32, v: &[FieldElement]) -> Result<Vector> {
        self.check_frobenius(q)?;
        v.iter()
            .map(|&x| self.field.frobenius_inv(x, q as u64))
            .collect()
    }

    fn check_frobenius(&self, q: u32) -> Result<()> {
        self.field.subfield_degree(q as u64)?;
        let base = self.defined_over.ok_or(Error::NotDefinedOverSubfield(q))?;
        // q must be a power of the defining field size
        let mut acc = base as u64;
        while acc < q as u64 {
            acc *= base as u64;
        }
        if acc != q as u64 {
            return Err(Error::NotDefinedOverSubfield(q));
        }
        Ok(())
    }

    /// Smallest multiplicatively closed subspace containing the vectors.
    pub fn subalgebra_closure(&self, vectors: &[Vector]) -> Subspace {
        let f = &*self.field;
        let mut s = Subspace::span(f, self.dim, vectors.iter().cloned());
        loop {
            let products: Vec<Vector> = s
                .rows
                .iter()
                .flat_map(|x| s.rows.iter().map(move |y| (x, y)))
                .map(|(x, y)| self.mul(x, y))
                .filter(|p| !s.contains(f, p))
                .collect();
            if products.is_empty() {
                return s;
            }
            s = Subspace::span(f, self.dim, s.rows.iter().cloned().chain(products));
        }
    }

    pub fn is_subalgebra(&self, s: &Subspace) -> bool {
        let f = &*self.field;
        s.rows
            .iter()
            .all(|x| s.rows.iter().all(|y| s.contains(f, &self.mul(x, y))))
    }

    /// Is the subspace a two-sided ideal?
    pub fn is_ideal(&self, s: &Subspace) -> bool {
        let f = &*self.field;
        let d = self.dim;
        s.rows.iter().all(|x| {
            (0..d).all(|j| {
                let b = unit_vector(d, j);
                s.contains(f, &self.mul(x, &b)) && s.contains(f, &self.mul(&b, x))
            })
        })
    }

    /// {a : aA = Aa = 0}.
    pub fn annihilator_ideal(&self) -> Subspace {
        let d = self.dim;
        // row (j, side, l), column i: coefficient of b_l in b_i b_j or b_j b_i
        let mut rows = Vec::with_capacity(2 * d * d);
        for j in 0..d {
            for side in 0..2 {
                for l in 0..d {
                    rows.push(
                        (0..d)
                            .map(|i| {
                                if side == 0 {
                                    self.structure_constant(i, j, l)
                                } else {
                                    self.structure_constant(j, i, l)
                                }
                            })
                            .collect(),
                    );
                }
            }
        }
        Subspace::span(&self.field, d, nullspace(&self.field, rows, d))
    }

    /// The algebra structure on a subalgebra S, in the basis of its rows.
    pub fn subalgebra(&self, s: &Subspace) -> Result<NilpotentAlgebra> {
        let f = &*self.field;
        let r = s.rank();
        let mut sc = Vec::with_capacity(r * r * r);
        for x in &s.rows {
            for y in &s.rows {
                let c = s.coordinates(f, &self.mul(x, y)).ok_or(Error::NotSubgroup)?;
                sc.extend(c);
            }
        }
        // the smallest admissible subfield still containing the row entries
        let defined_over = self.defined_over.and_then(|q| {
            let m = self.field.m();
            let s0 = self.field.subfield_degree(q as u64).ok()?;
            (s0..=m)
                .step_by(s0 as usize)
                .filter(|sd| m % sd == 0)
                .find(|&sd| s.rows.iter().all(|row| row.iter().all(|&x| self.field.is_in_subfield(x, sd))))
                .map(|sd| self.field.p().pow(sd))
        });
        NilpotentAlgebra::new(self.field.clone(), r, sc, defined_over)
    }

    /// Coordinates of a sub-vector expressed in the ambient basis.
    pub fn from_sub_coordinates(&self, s: &Subspace, c: &[FieldElement]) -> Vector {
        let mut v = zero_vector(self.dim);
        for (row, &x) in s.rows.iter().zip(c) {
            axpy(&self.field, &mut v, x, row);
        }
        v
    }
}

/// Validates a nested `d × d × d` table.
pub fn algebra_from_constants(
    field: Arc<FieldDescriptor>,
    dim: usize,
    sc: &[Vec<Vec<FieldElement>>],
) -> Result<NilpotentAlgebra> {
    if dim == 0 {
        return Err(Error::BadParameter("dimension must be at least 1".into()));
    }
    if sc.len() != dim || sc.iter().any(|r| r.len() != dim || r.iter().any(|c| c.len() != dim)) {
        return Err(Error::BadParameter(format!("structure constants must have shape {dim}×{dim}×{dim}")));
    }
    let flat = sc.iter().flatten().flatten().copied().collect();
    NilpotentAlgebra::new(field, dim, flat, None)
}

/// Generators of the builtin families.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum BuiltinKind {
    UpperTriangular(usize),
    TruncatedPoly(usize),
    DirectSum(Box<BuiltinKind>, Box<BuiltinKind>),
}

/// Strictly upper triangular matrices use the basis e_{ij} ordered by
/// superdiagonal (j - i) and then by row, so that for n = 3 the basis is
/// e12, e23, e13 and b1 b2 = b3.
pub fn upper_triangular_basis(n: usize) -> Vec<(usize, usize)> {
    (1..n)
        .flat_map(|s| (0..n - s).map(move |i| (i, i + s)))
        .collect()
}

pub fn builtin_algebra(kind: &BuiltinKind, field: &Arc<FieldDescriptor>) -> Result<NilpotentAlgebra> {
    let (dim, sc) = builtin_table(kind)?;
    let sc = sc
        .into_iter()
        .map(|c| if c { FieldElement::ONE } else { FieldElement::ZERO })
        .collect();
    NilpotentAlgebra::new(field.clone(), dim, sc, Some(field.p()))
}

// all builtin structure constants are 0 or 1
fn builtin_table(kind: &BuiltinKind) -> Result<(usize, Vec<bool>)> {
    match kind {
        BuiltinKind::UpperTriangular(n) => {
            if *n < 2 {
                return Err(Error::BadParameter("upper_triangular needs n ≥ 2".into()));
            }
            let basis = upper_triangular_basis(*n);
            let d = basis.len();
            let mut sc = vec![false; d * d * d];
            for (i, &(a, b)) in basis.iter().enumerate() {
                for (j, &(c, e)) in basis.iter().enumerate() {
                    if b == c {
                        let l = basis.iter().position(|&x| x == (a, e)).unwrap();
                        sc[(i * d + j) * d + l] = true;
                    }
                }
            }
            Ok((d, sc))
        }
        BuiltinKind::TruncatedPoly(n) => {
            if *n < 2 {
                return Err(Error::BadParameter("truncated_poly needs n ≥ 2".into()));
            }
            // basis t^1 .. t^{n-1}; b_i = t^{i+1}
            let d = n - 1;
            let mut sc = vec![false; d * d * d];
            for i in 0..d {
                for j in 0..d {
                    let e = i + j + 2;
                    if e < *n {
                        sc[(i * d + j) * d + (e - 1)] = true;
                    }
                }
            }
            Ok((d, sc))
        }
        BuiltinKind::DirectSum(a, b) => {
            let (da, sa) = builtin_table(a)?;
            let (db, sb) = builtin_table(b)?;
            let d = da + db;
            let mut sc = vec![false; d * d * d];
            for i in 0..da {
                for j in 0..da {
                    for l in 0..da {
                        sc[(i * d + j) * d + l] = sa[(i * da + j) * da + l];
                    }
                }
            }
            for i in 0..db {
                for j in 0..db {
                    for l in 0..db {
                        sc[((i + da) * d + j + da) * d + l + da] = sb[(i * db + j) * db + l];
                    }
                }
            }
            Ok((d, sc))
        }
    }
}

/// Direct sum of two algebras over the same field.
pub fn direct_sum(a: &NilpotentAlgebra, b: &NilpotentAlgebra) -> Result<NilpotentAlgebra> {
    if *a.field != *b.field {
        return Err(Error::FieldMismatch);
    }
    let (da, db) = (a.dim, b.dim);
    let d = da + db;
    let mut sc = vec![FieldElement::ZERO; d * d * d];
    for i in 0..da {
        for j in 0..da {
            for l in 0..da {
                sc[(i * d + j) * d + l] = a.structure_constant(i, j, l);
            }
        }
    }
    for i in 0..db {
        for j in 0..db {
            for l in 0..db {
                sc[((i + da) * d + j + da) * d + l + da] = b.structure_constant(i, j, l);
            }
        }
    }
    let defined_over = match (a.defined_over, b.defined_over) {
        (Some(x), Some(y)) => Some(x.max(y)),
        _ => None,
    };
    NilpotentAlgebra::new(a.field.clone(), d, sc, defined_over)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn f(p: u32, m: u32) -> Arc<FieldDescriptor> {
        make_field(p, m, None).unwrap()
    }

    fn v(a: &[u32]) -> Vector {
        a.iter().map(|&x| FieldElement(x)).collect()
    }

    fn u3(field: &Arc<FieldDescriptor>) -> NilpotentAlgebra {
        builtin_algebra(&BuiltinKind::UpperTriangular(3), field).unwrap()
    }

    #[test]
    fn from_constants_examples() {
        let f2 = f(2, 1);
        let z = FieldElement::ZERO;
        let o = FieldElement::ONE;
        let mut sc = vec![vec![vec![z; 3]; 3]; 3];
        sc[0][1][2] = o;
        let a = algebra_from_constants(f2.clone(), 3, &sc).unwrap();
        assert_eq!(a.nclass(), 3);
        assert!(matches!(
            algebra_from_constants(f2.clone(), 1, &[vec![vec![o]]]),
            Err(Error::NotNilpotent { .. })
        ));
        let mut t3 = vec![vec![vec![z; 2]; 2]; 2];
        t3[0][0][1] = o;
        assert_eq!(algebra_from_constants(f2, 2, &t3).unwrap().nclass(), 3);
    }

    #[test]
    fn non_associative_table_rejected() {
        // b1 b2 = b3, b3 b1 = b2: (b1 b2) b1 = b2 but b1 (b2 b1) = 0
        let f2 = f(2, 1);
        let z = FieldElement::ZERO;
        let o = FieldElement::ONE;
        let mut sc = vec![vec![vec![z; 3]; 3]; 3];
        sc[0][1][2] = o;
        sc[2][0][1] = o;
        assert!(matches!(
            algebra_from_constants(f2, 3, &sc),
            Err(Error::NotAssociative(_))
        ));
    }

    #[test]
    fn builtins() {
        let f2 = f(2, 1);
        let a = u3(&f2);
        assert_eq!((a.dim(), a.nclass()), (3, 3));
        assert_eq!(a.mul(&v(&[1, 0, 0]), &v(&[0, 1, 0])), v(&[0, 0, 1]));
        assert_eq!(a.mul(&v(&[0, 1, 0]), &v(&[1, 0, 0])), v(&[0, 0, 0]));
        let x2 = builtin_algebra(&BuiltinKind::TruncatedPoly(2), &f2).unwrap();
        assert_eq!(x2.dim(), 1);
        assert_eq!(x2.mul(&v(&[1]), &v(&[1])), v(&[0]));
        let t3 = builtin_algebra(&BuiltinKind::TruncatedPoly(3), &f2).unwrap();
        assert_eq!(t3.dim(), 2);
        assert!(t3.is_commutative());
        assert!(!a.is_commutative());
        assert!(matches!(
            builtin_algebra(&BuiltinKind::UpperTriangular(1), &f2),
            Err(Error::BadParameter(_))
        ));
        let u4 = builtin_algebra(&BuiltinKind::UpperTriangular(4), &f2).unwrap();
        assert_eq!((u4.dim(), u4.nclass()), (6, 4));
    }

    #[test]
    fn powers() {
        let f2 = f(2, 1);
        let a = u3(&f2);
        assert_eq!(a.power_ideal(1), Subspace::full(3));
        assert_eq!(a.power_ideal(2), Subspace::span(&f2, 3, vec![v(&[0, 0, 1])]));
        assert!(a.power_ideal(3).is_zero());
        let t3 = builtin_algebra(&BuiltinKind::TruncatedPoly(3), &f2).unwrap();
        assert_eq!(t3.power_ideal(2), Subspace::span(&f2, 2, vec![v(&[0, 1])]));
    }

    #[test]
    fn scalar_extension_and_frobenius() {
        let f2 = f(2, 1);
        let x2 = builtin_algebra(&BuiltinKind::TruncatedPoly(2), &f2).unwrap();
        let x2e = x2.extend_scalars(2).unwrap();
        assert_eq!(x2e.field().size(), 4);
        assert_eq!(x2e.defined_over(), Some(2));
        assert_eq!(x2e.frobenius(2, &v(&[2])).unwrap(), v(&[3]));
        assert_eq!(x2.extend_scalars(1).unwrap().defined_over(), Some(2));
        let u3e = u3(&f2).extend_scalars(2).unwrap();
        assert_eq!(u3e.nclass(), 3);
        assert_eq!(u3e.frobenius(2, &v(&[2, 0, 1])).unwrap(), v(&[3, 0, 1]));
        assert_eq!(u3(&f2).frobenius(2, &v(&[1, 1, 0])).unwrap(), v(&[1, 1, 0]));
        let f4 = f(2, 2);
        let plain = algebra_from_constants(f4, 1, &[vec![vec![FieldElement::ZERO]]]).unwrap();
        assert_eq!(plain.frobenius(2, &v(&[2])), Err(Error::NotDefinedOverSubfield(2)));
    }

    #[test]
    fn closure_and_annihilator() {
        let f2 = f(2, 1);
        let a = u3(&f2);
        assert_eq!(
            a.subalgebra_closure(&[v(&[1, 0, 0])]),
            Subspace::span(&f2, 3, vec![v(&[1, 0, 0])])
        );
        assert_eq!(
            a.subalgebra_closure(&[v(&[1, 1, 0])]),
            Subspace::span(&f2, 3, vec![v(&[1, 1, 0]), v(&[0, 0, 1])])
        );
        let s = Subspace::span(&f2, 3, vec![v(&[1, 0, 0]), v(&[0, 1, 0])]);
        assert!(!a.is_subalgebra(&s));
        assert_eq!(a.annihilator_ideal(), Subspace::span(&f2, 3, vec![v(&[0, 0, 1])]));
        let t3 = builtin_algebra(&BuiltinKind::TruncatedPoly(3), &f2).unwrap();
        assert_eq!(t3.annihilator_ideal(), Subspace::span(&f2, 2, vec![v(&[0, 1])]));
        let x2 = builtin_algebra(&BuiltinKind::TruncatedPoly(2), &f2).unwrap();
        assert_eq!(x2.annihilator_ideal(), Subspace::full(1));
    }

    #[test]
    fn subalgebra_structure() {
        let f2 = f(2, 1);
        let a = u3(&f2);
        let s = Subspace::span(&f2, 3, vec![v(&[1, 1, 0]), v(&[0, 0, 1])]);
        let b = a.subalgebra(&s).unwrap();
        assert_eq!(b.dim(), 2);
        assert_eq!(b.mul(&v(&[1, 0]), &v(&[1, 0])), v(&[0, 1]));
        let bad = Subspace::span(&f2, 3, vec![v(&[1, 0, 0]), v(&[0, 1, 0])]);
        assert_eq!(a.subalgebra(&bad), Err(Error::NotSubgroup));
    }

    #[test]
    fn direct_sums() {
        let f3 = f(3, 1);
        let a = builtin_algebra(
            &BuiltinKind::DirectSum(
                Box::new(BuiltinKind::UpperTriangular(3)),
                Box::new(BuiltinKind::TruncatedPoly(2)),
            ),
            &f3,
        )
        .unwrap();
        let b = direct_sum(
            &u3(&f3),
            &builtin_algebra(&BuiltinKind::TruncatedPoly(2), &f3).unwrap(),
        )
        .unwrap();
        assert_eq!(a, b);
        assert_eq!(a.dim(), 4);
        assert_eq!(a.annihilator_ideal().rank(), 2);
    }
}
