//! Catalog entries: JSON files describing algebras, and the generated
//! builtin family grid.

use std::collections::BTreeMap;
use std::fs;
use std::path::Path;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::algrp::AlgebraGroup;
use crate::error::{Error, Result};
use crate::gf::{make_field, FieldSpec};
use crate::nilalg::{algebra_from_constants, builtin_algebra, BuiltinKind, NilpotentAlgebra};

/// On-disk form. Field elements are little-endian coefficient arrays and
/// `sc[i][j]` is the product b_i b_j.
#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct EntryFile {
    name: String,
    field: FieldSpec,
    dim: usize,
    sc: Vec<Vec<Vec<Vec<u32>>>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    defined_over: Option<u32>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    tags: Vec<String>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct CatalogEntry {
    pub name: String,
    pub algebra: Arc<NilpotentAlgebra>,
    pub tags: Vec<String>,
}

impl CatalogEntry {
    pub fn new(name: &str, algebra: NilpotentAlgebra) -> CatalogEntry {
        let mut tags = vec![if algebra.is_commutative() {
            "commutative".to_string()
        } else {
            "noncommutative".to_string()
        }];
        tags.push(format!("nclass={}", algebra.nclass()));
        CatalogEntry {
            name: name.to_string(),
            algebra: Arc::new(algebra),
            tags,
        }
    }

    pub fn group(&self) -> Result<Arc<AlgebraGroup>> {
        AlgebraGroup::new(self.algebra.clone())
    }

    pub fn to_json_string(&self) -> String {
        let alg = &self.algebra;
        let f = alg.field();
        let d = alg.dim();
        let sc = (0..d)
            .map(|i| {
                (0..d)
                    .map(|j| (0..d).map(|l| f.coefficients(alg.structure_constant(i, j, l))).collect())
                    .collect()
            })
            .collect();
        let file = EntryFile {
            name: self.name.clone(),
            field: f.spec(),
            dim: d,
            sc,
            defined_over: alg.defined_over(),
            tags: self.tags.clone(),
        };
        serde_json::to_string_pretty(&file).expect("serializable")
    }

    pub fn from_json_str(text: &str) -> Result<CatalogEntry> {
        let file: EntryFile = serde_json::from_str(text).map_err(|e| Error::ParseError(e.to_string()))?;
        let name = file.name.clone();
        let wrap = |e: Error| Error::ValidationError {
            name: name.clone(),
            source: Box::new(e),
        };
        let f = make_field(file.field.p, file.field.m, Some(&file.field.modulus)).map_err(wrap)?;
        let sc = file
            .sc
            .iter()
            .map(|row| {
                row.iter()
                    .map(|col| col.iter().map(|c| f.element(c)).collect::<Result<Vec<_>>>())
                    .collect::<Result<Vec<_>>>()
            })
            .collect::<Result<Vec<_>>>()
            .map_err(wrap)?;
        let mut alg = algebra_from_constants(f.clone(), file.dim, &sc).map_err(wrap)?;
        if file.defined_over.is_some() {
            alg = NilpotentAlgebra::new(f, file.dim, alg.structure_constants().to_vec(), file.defined_over)
                .map_err(wrap)?;
        }
        Ok(CatalogEntry {
            name: file.name,
            algebra: Arc::new(alg),
            tags: file.tags,
        })
    }

    pub fn load(path: &Path) -> Result<CatalogEntry> {
        let text = fs::read_to_string(path).map_err(|e| Error::Io(format!("{}: {e}", path.display())))?;
        CatalogEntry::from_json_str(&text).map_err(|e| match e {
            Error::ParseError(m) => Error::ParseError(format!("{}: {m}", path.display())),
            e => e,
        })
    }
}

fn kind_name(k: &BuiltinKind) -> String {
    match k {
        BuiltinKind::UpperTriangular(n) => format!("u{n}"),
        BuiltinKind::TruncatedPoly(n) => format!("x{n}"),
        BuiltinKind::DirectSum(a, b) => format!("{}+{}", kind_name(a), kind_name(b)),
    }
}

/// Upper triangular n ∈ {3, 4} over F_2, F_3, F_4; truncated polynomials
/// n ∈ {2, 3, 4} over F_2, F_3; direct sums of pairs from {x2, x3, u3} over
/// F_2 and F_3. Sorted by name.
pub fn builtin_catalog() -> Result<Vec<CatalogEntry>> {
    let mut grid: Vec<(BuiltinKind, u32, u32)> = Vec::new();
    for n in [3, 4] {
        for (p, m) in [(2, 1), (3, 1), (2, 2)] {
            grid.push((BuiltinKind::UpperTriangular(n), p, m));
        }
    }
    for n in [2, 3, 4] {
        for p in [2, 3] {
            grid.push((BuiltinKind::TruncatedPoly(n), p, 1));
        }
    }
    let small = [
        BuiltinKind::TruncatedPoly(2),
        BuiltinKind::TruncatedPoly(3),
        BuiltinKind::UpperTriangular(3),
    ];
    for i in 0..small.len() {
        for j in i..small.len() {
            for p in [2, 3] {
                let kind = BuiltinKind::DirectSum(Box::new(small[i].clone()), Box::new(small[j].clone()));
                grid.push((kind, p, 1));
            }
        }
    }
    let mut out = Vec::new();
    for (kind, p, m) in grid {
        let f = make_field(p, m, None)?;
        let name = format!("{}_f{}", kind_name(&kind), f.size());
        out.push(CatalogEntry::new(&name, builtin_algebra(&kind, &f)?));
    }
    out.sort_by(|a, b| a.name.cmp(&b.name));
    Ok(out)
}

pub fn builtin(name: &str) -> Result<CatalogEntry> {
    builtin_catalog()?
        .into_iter()
        .find(|e| e.name == name)
        .ok_or_else(|| Error::Io(format!("no catalog file or builtin named {name:?}")))
}

/// Every `*.json` file of a directory, validated, in name order.
pub fn ingest_dir(path: &Path) -> Result<Vec<CatalogEntry>> {
    let rd = fs::read_dir(path).map_err(|e| Error::Io(format!("{}: {e}", path.display())))?;
    let mut files = Vec::new();
    for ent in rd {
        let p = ent.map_err(|e| Error::Io(e.to_string()))?.path();
        if p.extension().is_some_and(|x| x == "json") {
            files.push(p);
        }
    }
    let mut by_name = BTreeMap::new();
    for p in files {
        let e = CatalogEntry::load(&p)?;
        if by_name.contains_key(&e.name) {
            return Err(Error::ParseError(format!("duplicate catalog name {:?}", e.name)));
        }
        by_name.insert(e.name.clone(), e);
    }
    Ok(by_name.into_values().collect())
}

/// `builtin` or a directory.
pub fn ingest(spec: &str) -> Result<Vec<CatalogEntry>> {
    if spec == "builtin" {
        builtin_catalog()
    } else {
        ingest_dir(Path::new(spec))
    }
}

/// A file path, or else a builtin name.
pub fn resolve_entry(spec: &str) -> Result<CatalogEntry> {
    let p = Path::new(spec);
    if p.is_file() {
        CatalogEntry::load(p)
    } else {
        builtin(spec)
    }
}

pub fn write_dir(path: &Path, entries: &[CatalogEntry]) -> Result<()> {
    fs::create_dir_all(path).map_err(|e| Error::Io(e.to_string()))?;
    for e in entries {
        fs::write(path.join(format!("{}.json", e.name)), e.to_json_string() + "\n")
            .map_err(|x| Error::Io(x.to_string()))?;
    }
    Ok(())
}
