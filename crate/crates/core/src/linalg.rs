//! Row-reduced subspaces of k^d.

use serde::{Deserialize, Serialize};

use crate::gf::{Embedding, FieldDescriptor, FieldElement};

pub type Vector = Vec<FieldElement>;

pub fn zero_vector(d: usize) -> Vector {
    vec![FieldElement::ZERO; d]
}

pub fn unit_vector(d: usize, i: usize) -> Vector {
    let mut v = zero_vector(d);
    v[i] = FieldElement::ONE;
    v
}

pub fn add_vec(f: &FieldDescriptor, a: &[FieldElement], b: &[FieldElement]) -> Vector {
    a.iter().zip(b).map(|(&x, &y)| f.add(x, y)).collect()
}

pub fn sub_vec(f: &FieldDescriptor, a: &[FieldElement], b: &[FieldElement]) -> Vector {
    a.iter().zip(b).map(|(&x, &y)| f.sub(x, y)).collect()
}

pub fn scale_vec(f: &FieldDescriptor, c: FieldElement, a: &[FieldElement]) -> Vector {
    a.iter().map(|&x| f.mul(c, x)).collect()
}

/// a += c * b
pub fn axpy(f: &FieldDescriptor, a: &mut [FieldElement], c: FieldElement, b: &[FieldElement]) {
    if c.is_zero() {
        return;
    }
    for (x, &y) in a.iter_mut().zip(b) {
        if !y.is_zero() {
            *x = f.add(*x, f.mul(c, y));
        }
    }
}

pub fn is_zero_vec(a: &[FieldElement]) -> bool {
    a.iter().all(|x| x.is_zero())
}

/// Reduced row echelon form; returns nonzero rows and pivot columns.
pub fn rref(f: &FieldDescriptor, mut rows: Vec<Vector>, ncols: usize) -> (Vec<Vector>, Vec<usize>) {
    let mut pivots = Vec::new();
    let mut r = 0;
    for c in 0..ncols {
        let Some(pr) = (r..rows.len()).find(|&i| !rows[i][c].is_zero()) else {
            continue;
        };
        rows.swap(r, pr);
        let inv = f.inv(rows[r][c]).expect("pivot is nonzero");
        rows[r] = scale_vec(f, inv, &rows[r]);
        let pivot_row = rows[r].clone();
        for (i, row) in rows.iter_mut().enumerate() {
            if i != r && !row[c].is_zero() {
                let coef = f.neg(row[c]);
                axpy(f, row, coef, &pivot_row);
            }
        }
        pivots.push(c);
        r += 1;
        if r == rows.len() {
            break;
        }
    }
    rows.truncate(r);
    (rows, pivots)
}

/// Basis of {x : M x = 0} for an `nrows × ncols` matrix given by rows.
pub fn nullspace(f: &FieldDescriptor, m: Vec<Vector>, ncols: usize) -> Vec<Vector> {
    let (rows, pivots) = rref(f, m, ncols);
    let free: Vec<usize> = (0..ncols).filter(|c| !pivots.contains(c)).collect();
    free.iter()
        .map(|&fc| {
            let mut v = zero_vector(ncols);
            v[fc] = FieldElement::ONE;
            for (row, &pc) in rows.iter().zip(&pivots) {
                v[pc] = f.neg(row[fc]);
            }
            v
        })
        .collect()
}

/// Every subspace of k^r, each in canonical form, ordered by rank and then
/// by the enumeration of free entries.
pub fn all_subspaces(f: &FieldDescriptor, r: usize) -> Vec<Subspace> {
    let q = f.size() as u64;
    let mut out = Vec::new();
    for rank in 0..=r {
        // choose pivot columns, then fill the free entries to the right of pivots
        for pivots in combinations(r, rank) {
            let free: Vec<(usize, usize)> = (0..rank)
                .flat_map(|i| {
                    let pv = pivots.clone();
                    (pv[i] + 1..r)
                        .filter(move |c| !pv.contains(c))
                        .map(move |c| (i, c))
                })
                .collect();
            let count = q.pow(free.len() as u32);
            for idx in 0..count {
                let mut rows: Vec<Vector> = pivots.iter().map(|&pc| unit_vector(r, pc)).collect();
                let mut x = idx;
                for &(i, c) in &free {
                    rows[i][c] = FieldElement((x % q) as u32);
                    x /= q;
                }
                out.push(Subspace {
                    ambient_dim: r,
                    rows,
                    pivots: pivots.clone(),
                });
            }
        }
    }
    out
}

fn combinations(n: usize, k: usize) -> Vec<Vec<usize>> {
    if k == 0 {
        return vec![Vec::new()];
    }
    if n < k {
        return Vec::new();
    }
    let mut out = Vec::new();
    for mut c in combinations(n - 1, k - 1) {
        c.push(n - 1);
        out.push(c);
    }
    out.extend(combinations(n - 1, k));
    out.sort();
    out
}

/// A subspace of k^d in canonical (reduced row echelon) form, so that
/// structural equality is equality of subspaces.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct Subspace {
    pub ambient_dim: usize,
    pub rows: Vec<Vector>,
    pub pivots: Vec<usize>,
}

impl Subspace {
    pub fn zero(d: usize) -> Subspace {
        Subspace {
            ambient_dim: d,
            rows: Vec::new(),
            pivots: Vec::new(),
        }
    }

    pub fn full(d: usize) -> Subspace {
        Subspace {
            ambient_dim: d,
            rows: (0..d).map(|i| unit_vector(d, i)).collect(),
            pivots: (0..d).collect(),
        }
    }

    pub fn span(f: &FieldDescriptor, d: usize, vectors: impl IntoIterator<Item = Vector>) -> Subspace {
        let rows: Vec<Vector> = vectors.into_iter().filter(|v| !is_zero_vec(v)).collect();
        let (rows, pivots) = rref(f, rows, d);
        Subspace {
            ambient_dim: d,
            rows,
            pivots,
        }
    }

    pub fn rank(&self) -> usize {
        self.rows.len()
    }

    pub fn is_zero(&self) -> bool {
        self.rows.is_empty()
    }

    /// v minus its projection along the pivot columns.
    pub fn reduce(&self, f: &FieldDescriptor, v: &[FieldElement]) -> Vector {
        let mut r = v.to_vec();
        for (row, &pc) in self.rows.iter().zip(&self.pivots) {
            let c = r[pc];
            if !c.is_zero() {
                axpy(f, &mut r, f.neg(c), row);
            }
        }
        r
    }

    pub fn contains(&self, f: &FieldDescriptor, v: &[FieldElement]) -> bool {
        is_zero_vec(&self.reduce(f, v))
    }

    /// Coordinates in the row basis (the pivot entries), if v lies in the subspace.
    pub fn coordinates(&self, f: &FieldDescriptor, v: &[FieldElement]) -> Option<Vector> {
        if self.contains(f, v) {
            Some(self.pivots.iter().map(|&c| v[c]).collect())
        } else {
            None
        }
    }

    pub fn combine(&self, f: &FieldDescriptor, coeffs: &[FieldElement]) -> Vector {
        let mut v = zero_vector(self.ambient_dim);
        for (row, &c) in self.rows.iter().zip(coeffs) {
            axpy(f, &mut v, c, row);
        }
        v
    }

    pub fn sum(&self, f: &FieldDescriptor, other: &Subspace) -> Subspace {
        Subspace::span(
            f,
            self.ambient_dim,
            self.rows.iter().chain(&other.rows).cloned(),
        )
    }

    pub fn is_subspace_of(&self, f: &FieldDescriptor, other: &Subspace) -> bool {
        self.rows.iter().all(|r| other.contains(f, r))
    }

    pub fn intersection(&self, f: &FieldDescriptor, other: &Subspace) -> Subspace {
        // Zassenhaus: rows (u, u) and (w, 0); the part with zero left half spans U ∩ W
        let d = self.ambient_dim;
        let mut rows = Vec::new();
        for u in &self.rows {
            let mut r = u.clone();
            r.extend(u.iter().copied());
            rows.push(r);
        }
        for w in &other.rows {
            let mut r = w.clone();
            r.extend(zero_vector(d));
            rows.push(r);
        }
        let (red, pivots) = rref(f, rows, 2 * d);
        let inter = red
            .iter()
            .zip(&pivots)
            .filter(|(_, &pc)| pc >= d)
            .map(|(r, _)| r[d..].to_vec());
        Subspace::span(f, d, inter)
    }

    /// Non-pivot column indices; their unit vectors span a complement.
    pub fn complement_columns(&self) -> Vec<usize> {
        (0..self.ambient_dim)
            .filter(|c| !self.pivots.contains(c))
            .collect()
    }

    /// Image under a field embedding (still in reduced echelon form).
    pub fn embed(&self, e: &Embedding) -> Subspace {
        Subspace {
            ambient_dim: self.ambient_dim,
            rows: self
                .rows
                .iter()
                .map(|r| r.iter().map(|&x| e.apply(x)).collect())
                .collect(),
            pivots: self.pivots.clone(),
        }
    }

    /// Codes of the row entries, the serialized form.
    pub fn to_codes(&self) -> Vec<Vec<u32>> {
        self.rows
            .iter()
            .map(|r| r.iter().map(|x| x.0).collect())
            .collect()
    }
}
