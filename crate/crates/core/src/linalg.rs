//! Exact linear algebra over ℚ.
//!
//! Elimination is fraction-free: rows are kept as primitive integer vectors
//! (content divided out after every update), so no rational arithmetic happens
//! during pivoting. Pivots are chosen deterministically by smallest bit-length
//! of the candidate entry, ties broken by row order, which keeps every run of
//! the engine reproducible down to the choice of homology representatives.

use crate::error::{EngineError, Result};
use crate::scalar::Rat;
use num::bigint::BigInt;
use num::{Integer, One, Signed, Zero};
use std::collections::BTreeMap;

/// Sparse vector with rational entries, sorted by coordinate.
pub type SparseVec = Vec<(usize, Rat)>;

pub fn sparse_from_map(m: BTreeMap<usize, Rat>) -> SparseVec {
    m.into_iter().filter(|(_, v)| !v.is_zero()).collect()
}

pub fn sparse_add_scaled(a: &SparseVec, b: &SparseVec, c: &Rat) -> SparseVec {
    let mut out: BTreeMap<usize, Rat> = a.iter().cloned().collect();
    for (i, v) in b {
        let e = out.entry(*i).or_insert_with(Rat::zero);
        *e += v * c;
        if e.is_zero() {
            out.remove(i);
        }
    }
    sparse_from_map(out)
}

/// Scale so the first nonzero coordinate is 1 (no-op on zero vectors).
pub fn sparse_normalize(v: &SparseVec) -> SparseVec {
    match v.first() {
        None => Vec::new(),
        Some((_, lead)) => {
            let inv = Rat::one() / lead.clone();
            v.iter().map(|(i, c)| (*i, c * &inv)).collect()
        }
    }
}

/// One row of primitive integers: content 1, sorted by column.
#[derive(Debug, Clone)]
struct IntRow(Vec<(usize, BigInt)>);

impl IntRow {
    fn from_rational(v: &SparseVec) -> IntRow {
        if v.is_empty() {
            return IntRow(Vec::new());
        }
        let mut lcm = BigInt::one();
        for (_, c) in v {
            lcm = lcm.lcm(c.denom());
        }
        let mut row: Vec<(usize, BigInt)> = v
            .iter()
            .map(|(i, c)| (*i, c.numer() * (&lcm / c.denom())))
            .filter(|(_, n)| !n.is_zero())
            .collect();
        let mut content = BigInt::zero();
        for (_, n) in &row {
            content = content.gcd(n);
        }
        if !content.is_zero() && !content.is_one() {
            for (_, n) in &mut row {
                *n /= &content;
            }
        }
        IntRow(row)
    }

    fn get(&self, col: usize) -> BigInt {
        match self.0.binary_search_by_key(&col, |e| e.0) {
            Ok(k) => self.0[k].1.clone(),
            Err(_) => BigInt::zero(),
        }
    }

    /// self := (a * self - b * other) / content, eliminating `col`.
    fn eliminate(&mut self, other: &IntRow, col: usize) {
        let a = other.get(col);
        let b = self.get(col);
        if b.is_zero() {
            return;
        }
        let mut out: BTreeMap<usize, BigInt> = BTreeMap::new();
        for (i, v) in &self.0 {
            out.insert(*i, v * &a);
        }
        for (i, v) in &other.0 {
            let e = out.entry(*i).or_insert_with(BigInt::zero);
            *e -= v * &b;
        }
        out.retain(|_, v| !v.is_zero());
        let mut content = BigInt::zero();
        for v in out.values() {
            content = content.gcd(v);
        }
        let mut row: Vec<(usize, BigInt)> = out.into_iter().collect();
        if !content.is_zero() && !content.is_one() {
            for (_, v) in &mut row {
                *v /= &content;
            }
        }
        self.0 = row;
    }

    fn to_rational(&self) -> SparseVec {
        self.0
            .iter()
            .map(|(i, n)| (*i, Rat::from_integer(n.clone())))
            .collect()
    }
}

/// A sparse rational matrix given by its rows.
#[derive(Debug, Clone, Default)]
pub struct SparseMat {
    pub ncols: usize,
    pub rows: Vec<SparseVec>,
}

impl SparseMat {
    pub fn new(ncols: usize) -> Self {
        SparseMat { ncols, rows: Vec::new() }
    }

    pub fn push_row(&mut self, row: SparseVec) {
        debug_assert!(row.iter().all(|(i, _)| *i < self.ncols));
        self.rows.push(row);
    }

    pub fn nrows(&self) -> usize {
        self.rows.len()
    }

    /// Apply to a column vector: y = M v.
    pub fn apply(&self, v: &SparseVec) -> SparseVec {
        let dense: BTreeMap<usize, Rat> = v.iter().cloned().collect();
        let mut out = Vec::new();
        for (r, row) in self.rows.iter().enumerate() {
            let mut acc = Rat::zero();
            for (c, val) in row {
                if let Some(x) = dense.get(c) {
                    acc += val * x;
                }
            }
            if !acc.is_zero() {
                out.push((r, acc));
            }
        }
        out
    }
}

/// Reduced echelon form of a row space, kept as primitive integer rows.
#[derive(Debug, Clone)]
pub struct Echelon {
    ncols: usize,
    /// (pivot column, row) sorted by pivot column; each row fully reduced
    /// against all other pivots.
    rows: Vec<(usize, IntRow)>,
}

impl Echelon {
    pub fn new(ncols: usize) -> Self {
        Echelon { ncols, rows: Vec::new() }
    }

    pub fn from_rows<'a>(ncols: usize, rows: impl IntoIterator<Item = &'a SparseVec>) -> Self {
        let mut e = Echelon::new(ncols);
        for r in rows {
            e.insert(r);
        }
        e
    }

    pub fn rank(&self) -> usize {
        self.rows.len()
    }

    pub fn ncols(&self) -> usize {
        self.ncols
    }

    pub fn pivot_cols(&self) -> Vec<usize> {
        self.rows.iter().map(|(c, _)| *c).collect()
    }

    /// Reduce `v` against the echelon; the result has no support on pivot
    /// columns. Returns the (rational) residue.
    pub fn reduce(&self, v: &SparseVec) -> SparseVec {
        let mut acc: BTreeMap<usize, Rat> = v.iter().cloned().collect();
        for (pivot_col, row) in &self.rows {
            let coeff = match acc.get(pivot_col) {
                Some(c) if !c.is_zero() => c.clone(),
                _ => continue,
            };
            let pivot_val = Rat::from_integer(row.get(*pivot_col));
            let factor = coeff / pivot_val;
            for (i, n) in &row.0 {
                let e = acc.entry(*i).or_insert_with(Rat::zero);
                *e -= &factor * &Rat::from_integer(n.clone());
                if e.is_zero() {
                    acc.remove(i);
                }
            }
        }
        sparse_from_map(acc)
    }

    pub fn contains(&self, v: &SparseVec) -> bool {
        self.reduce(v).is_empty()
    }

    /// Insert a vector; returns true if it enlarged the row space.
    pub fn insert(&mut self, v: &SparseVec) -> bool {
        let residue = self.reduce(v);
        if residue.is_empty() {
            return false;
        }
        let mut row = IntRow::from_rational(&residue);
        // choose the pivot: smallest bit-length entry, then smallest column
        let (pivot_col, _) = row
            .0
            .iter()
            .min_by_key(|(c, n)| (n.abs().bits(), *c))
            .map(|(c, n)| (*c, n.clone()))
            .expect("nonzero residue");
        // make the pivot entry positive for determinism
        if row.get(pivot_col).is_negative() {
            for (_, n) in &mut row.0 {
                *n = -std::mem::take(n);
            }
        }
        // back-reduce existing rows against the new pivot
        for (_, existing) in &mut self.rows {
            if !existing.get(pivot_col).is_zero() {
                existing.eliminate(&row, pivot_col);
            }
        }
        self.rows.push((pivot_col, row));
        self.rows.sort_by_key(|(c, _)| *c);
        true
    }

    /// Basis of the row space, each vector normalized to leading coefficient 1.
    pub fn basis(&self) -> Vec<SparseVec> {
        self.rows
            .iter()
            .map(|(_, r)| sparse_normalize(&r.to_rational()))
            .collect()
    }
}

/// Rank of the matrix.
pub fn rank(m: &SparseMat) -> usize {
    Echelon::from_rows(m.ncols, m.rows.iter()).rank()
}

/// Basis of the kernel `{v : M v = 0}`, deterministic, each vector normalized
/// so its first nonzero coordinate is 1. Columns are eliminated left to right;
/// free columns index the basis.
pub fn kernel_basis(m: &SparseMat) -> Vec<SparseVec> {
    let ech = Echelon::from_rows(m.ncols, m.rows.iter());
    kernel_of_echelon(&ech)
}

pub fn kernel_of_echelon(ech: &Echelon) -> Vec<SparseVec> {
    let pivot_cols: std::collections::BTreeSet<usize> = ech.pivot_cols().into_iter().collect();
    let mut basis = Vec::new();
    for free in 0..ech.ncols {
        if pivot_cols.contains(&free) {
            continue;
        }
        // v[free] = 1, pivot coordinates determined by full reduction
        let mut v: BTreeMap<usize, Rat> = BTreeMap::new();
        v.insert(free, Rat::one());
        for (pc, row) in &ech.rows {
            let num = row.get(free);
            if num.is_zero() {
                continue;
            }
            let pivot_val = row.get(*pc);
            v.insert(*pc, -Rat::new(num, pivot_val));
        }
        basis.push(sparse_normalize(&sparse_from_map(v)));
    }
    basis
}

/// Solve for coordinates of `target` in the given (not necessarily
/// independent) spanning set; returns None if the target is outside the span.
/// Deterministic: earlier vectors are preferred.
pub fn express_in_span(span: &[SparseVec], dim: usize, target: &SparseVec) -> Option<Vec<Rat>> {
    // Augment each spanning vector with a coordinate-tracking tail.
    let n = span.len();
    let mut ech = Echelon::new(dim + n);
    let mut kept: Vec<usize> = Vec::new();
    for (k, v) in span.iter().enumerate() {
        let mut aug = v.clone();
        aug.push((dim + k, Rat::one()));
        if ech.insert(&aug) {
            kept.push(k);
        }
    }
    let mut aug_target = target.clone();
    aug_target.sort_by_key(|e| e.0);
    let residue = ech.reduce(&aug_target);
    // the residue must be supported entirely on the tracking tail
    if residue.iter().any(|(i, _)| *i < dim) {
        return None;
    }
    let mut coords = vec![Rat::zero(); n];
    for (i, c) in residue {
        coords[i - dim] = -c;
    }
    Some(coords)
}

/// Solve `A u = b` for the unique solution. Errors if the system is
/// inconsistent or the solution is not unique: both situations mean the
/// caller's structure is not determined by its defining equations, which the
/// engine treats as invalid input rather than guessing.
pub fn solve_unique(a: &SparseMat, b: &[Rat]) -> Result<Vec<Rat>> {
    assert_eq!(a.nrows(), b.len());
    // Kernel of [A | -b]; solutions correspond to kernel vectors with last
    // coordinate 1, free directions to kernel vectors supported before it.
    let mut aug = SparseMat::new(a.ncols + 1);
    for (row, rhs) in a.rows.iter().zip(b.iter()) {
        let mut r = row.clone();
        if !rhs.is_zero() {
            r.push((a.ncols, -rhs.clone()));
        }
        aug.push_row(r);
    }
    let kernel = kernel_basis(&aug);
    let mut solution: Option<Vec<Rat>> = None;
    for kv in &kernel {
        let last = kv
            .iter()
            .find(|(i, _)| *i == a.ncols)
            .map(|(_, c)| c.clone())
            .unwrap_or_else(Rat::zero);
        if last.is_zero() {
            return Err(EngineError::Input(
                "linear system is underdetermined; no unique solution".into(),
            ));
        }
        if solution.is_some() {
            return Err(EngineError::Input(
                "linear system is underdetermined; no unique solution".into(),
            ));
        }
        let mut u = vec![Rat::zero(); a.ncols];
        for (i, c) in kv {
            if *i < a.ncols {
                u[*i] = c / &last;
            }
        }
        solution = Some(u);
    }
    solution.ok_or_else(|| EngineError::Input("linear system is inconsistent".into()))
}

/// Homology bookkeeping for one chain-degree slot.
#[derive(Debug, Clone)]
pub struct HomologySlot {
    pub dim_chains: usize,
    pub rank_out: usize,
    pub rank_in: usize,
    pub betti: usize,
    /// Cycle representatives spanning the homology, in ambient coordinates.
    pub representatives: Vec<SparseVec>,
}

/// Homology at a slot: `ker(out) / im(in_rows)`, where `out` maps this slot
/// forward and `in_rows` are images of the incoming differential expressed in
/// this slot's coordinates. Asserts `im ⊆ ker` exactly.
pub fn homology_slot(
    dim_chains: usize,
    out: &SparseMat,
    in_images: &[SparseVec],
) -> Result<HomologySlot> {
    let ech_out = Echelon::from_rows(out.ncols, out.rows.iter());
    let kernel = kernel_of_echelon(&ech_out);
    let mut im_ech = Echelon::new(dim_chains);
    for v in in_images {
        // d² = 0 means every incoming image is a cycle
        if !out.apply(v).is_empty() {
            return Err(EngineError::Internal(
                "incoming boundary is not a cycle (d² ≠ 0)".into(),
            ));
        }
        im_ech.insert(v);
    }
    let rank_in = im_ech.rank();
    let mut h_ech = im_ech.clone();
    let mut reps = Vec::new();
    for v in &kernel {
        if h_ech.insert(v) {
            reps.push(sparse_normalize(v));
        }
    }
    Ok(HomologySlot {
        dim_chains,
        rank_out: ech_out.rank(),
        rank_in,
        betti: kernel.len() - rank_in,
        representatives: reps,
    })
}

/// CSV export: one `row,col,value` line per nonzero entry.
pub fn matrix_to_csv(m: &SparseMat) -> String {
    let mut out = String::from("row,col,value\n");
    for (r, row) in m.rows.iter().enumerate() {
        for (c, v) in row {
            out.push_str(&format!("{},{},{}\n", r, c, v));
        }
    }
    out
}
