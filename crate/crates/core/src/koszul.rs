//! Quadratic duality: weight truncations of quadratic algebras, the dual
//! coalgebra computed by exact subspace intersections, the two-sided
//! differential pairing them, an acyclicity report, the cobar construction,
//! and iterated reduced coproducts.

use crate::error::{EngineError, Result};
use crate::linalg::{
    express_in_span, homology_slot, kernel_basis, Echelon, SparseMat, SparseVec,
};
use crate::presentations::{CoalgebraPresentation, QuadraticPresentation};
use crate::scalar::{sign_pow, GradedSymbol, Rat};
use num::{One, Zero};
use std::collections::BTreeMap;

/// A word in the generators, stored as generator indices. Weight-0 classes
/// (vertex idempotents) are handled separately wherever they occur.
pub type Word = Vec<usize>;

/// Enumerate composable generator words of each weight 1..=max_weight, in
/// lexicographic order per weight.
fn enumerate_words(p: &QuadraticPresentation, max_weight: usize) -> Vec<Vec<Word>> {
    let mut words: Vec<Vec<Word>> = vec![Vec::new(); max_weight + 1];
    if max_weight == 0 {
        return words;
    }
    words[1] = (0..p.dim()).map(|i| vec![i]).collect();
    for w in 2..=max_weight {
        let mut next = Vec::new();
        for word in &words[w - 1] {
            let last = *word.last().unwrap();
            for j in 0..p.dim() {
                if p.tail[j] == p.head[last] {
                    let mut nw = word.clone();
                    nw.push(j);
                    next.push(nw);
                }
            }
        }
        words[w] = next;
    }
    words
}

fn word_degree(p: &QuadraticPresentation, word: &[usize]) -> i64 {
    word.iter().map(|&i| p.generators[i].degree).sum()
}

/// A quadratic algebra truncated at a weight bound: normal-form bases per
/// weight and exact multiplication between them.
#[derive(Debug, Clone)]
pub struct AlgebraTruncation {
    pub pres: QuadraticPresentation,
    pub max_weight: usize,
    words: Vec<Vec<Word>>,
    index: Vec<BTreeMap<Word, usize>>,
    ideal: Vec<Echelon>,
    /// word columns surviving the relation quotient, per weight
    basis_cols: Vec<Vec<usize>>,
    basis_pos: Vec<BTreeMap<usize, usize>>,
}

impl AlgebraTruncation {
    pub fn new(p: &QuadraticPresentation, max_weight: usize) -> Result<Self> {
        p.validate()?;
        let words = enumerate_words(p, max_weight);
        let index: Vec<BTreeMap<Word, usize>> = words
            .iter()
            .map(|ws| {
                ws.iter()
                    .enumerate()
                    .map(|(i, w)| (w.clone(), i))
                    .collect()
            })
            .collect();

        // two-sided ideal of the relations, weight by weight:
        // I_w = V·I_{w−1} + R·V^{⊗(w−2)}
        let mut ideal: Vec<Echelon> = Vec::with_capacity(max_weight + 1);
        for w in 0..=max_weight {
            let mut ech = Echelon::new(words[w].len());
            if w >= 2 {
                let mut rows: Vec<SparseVec> = Vec::new();
                for prev in ideal[w - 1].basis() {
                    for g in 0..p.dim() {
                        let mut row: BTreeMap<usize, Rat> = BTreeMap::new();
                        for (col, c) in &prev {
                            let old = &words[w - 1][*col];
                            if p.head[g] == p.tail[old[0]] {
                                let mut nw = vec![g];
                                nw.extend_from_slice(old);
                                *row.entry(index[w][&nw]).or_insert_with(Rat::zero) +=
                                    c.clone();
                            }
                        }
                        if !row.is_empty() {
                            rows.push(row.into_iter().collect());
                        }
                    }
                }
                let tails: Vec<Word> = if w == 2 {
                    vec![Vec::new()]
                } else {
                    words[w - 2].clone()
                };
                for rel in &p.relations {
                    for tailword in &tails {
                        let mut row: BTreeMap<usize, Rat> = BTreeMap::new();
                        for ((x, y), c) in rel {
                            if let Some(first) = tailword.first() {
                                if p.head[*y] != p.tail[*first] {
                                    continue;
                                }
                            }
                            let mut nw = vec![*x, *y];
                            nw.extend_from_slice(tailword);
                            *row.entry(index[w][&nw]).or_insert_with(Rat::zero) += c;
                        }
                        if !row.is_empty() {
                            rows.push(row.into_iter().collect());
                        }
                    }
                }
                for row in &rows {
                    ech.insert(row);
                }
            }
            ideal.push(ech);
        }

        let mut basis_cols = Vec::new();
        let mut basis_pos = Vec::new();
        for w in 0..=max_weight {
            let pivots: std::collections::BTreeSet<usize> =
                ideal[w].pivot_cols().into_iter().collect();
            let cols: Vec<usize> =
                (0..words[w].len()).filter(|c| !pivots.contains(c)).collect();
            let pos: BTreeMap<usize, usize> =
                cols.iter().enumerate().map(|(i, &c)| (c, i)).collect();
            basis_cols.push(cols);
            basis_pos.push(pos);
        }

        Ok(AlgebraTruncation {
            pres: p.clone(),
            max_weight,
            words,
            index,
            ideal,
            basis_cols,
            basis_pos,
        })
    }

    /// Dimension of the weight-w component.
    pub fn dim(&self, w: usize) -> usize {
        if w == 0 {
            self.pres.vertices.len()
        } else {
            self.basis_cols[w].len()
        }
    }

    /// The representative word of a weight-w basis class (w ≥ 1).
    pub fn basis_word(&self, w: usize, i: usize) -> &Word {
        &self.words[w][self.basis_cols[w][i]]
    }

    pub fn basis_label(&self, w: usize, i: usize) -> String {
        if w == 0 {
            if self.pres.vertices.len() == 1 {
                "1".to_string()
            } else {
                format!("1_{}", self.pres.vertices[i])
            }
        } else {
            self.basis_word(w, i)
                .iter()
                .map(|&g| self.pres.generators[g].name.clone())
                .collect::<Vec<_>>()
                .join("·")
        }
    }

    pub fn class_tail(&self, w: usize, i: usize) -> usize {
        if w == 0 {
            i
        } else {
            self.pres.tail[self.basis_word(w, i)[0]]
        }
    }

    pub fn class_head(&self, w: usize, i: usize) -> usize {
        if w == 0 {
            i
        } else {
            self.pres.head[*self.basis_word(w, i).last().unwrap()]
        }
    }

    pub fn class_degree(&self, w: usize, i: usize) -> i64 {
        if w == 0 {
            0
        } else {
            word_degree(&self.pres, self.basis_word(w, i))
        }
    }

    /// Reduce a raw word-coefficient vector to normal-form basis coordinates.
    pub fn reduce_raw(&self, w: usize, raw: &SparseVec) -> SparseVec {
        let mut v = raw.clone();
        v.sort_by_key(|e| e.0);
        let reduced = self.ideal[w].reduce(&v);
        reduced
            .into_iter()
            .map(|(col, c)| (self.basis_pos[w][&col], c))
            .collect()
    }

    /// Multiply two elements given in basis coordinates; weights add.
    pub fn multiply(
        &self,
        w1: usize,
        v1: &SparseVec,
        w2: usize,
        v2: &SparseVec,
    ) -> Result<SparseVec> {
        if w1 + w2 > self.max_weight {
            return Err(EngineError::Truncation(format!(
                "product weight {} exceeds the truncation bound {}",
                w1 + w2,
                self.max_weight
            )));
        }
        // vertex idempotents act by endpoint filtering
        if w1 == 0 {
            let verts: BTreeMap<usize, Rat> = v1.iter().cloned().collect();
            return Ok(v2
                .iter()
                .filter_map(|(i, c)| {
                    verts
                        .get(&self.class_tail(w2, *i))
                        .map(|s| (*i, s * c))
                })
                .filter(|(_, c)| !c.is_zero())
                .collect());
        }
        if w2 == 0 {
            let verts: BTreeMap<usize, Rat> = v2.iter().cloned().collect();
            return Ok(v1
                .iter()
                .filter_map(|(i, c)| {
                    verts.get(&self.class_head(w1, *i)).map(|s| (*i, c * s))
                })
                .filter(|(_, c)| !c.is_zero())
                .collect());
        }
        let mut raw: BTreeMap<usize, Rat> = BTreeMap::new();
        for (i1, c1) in v1 {
            let word1 = self.basis_word(w1, *i1);
            for (i2, c2) in v2 {
                let word2 = self.basis_word(w2, *i2);
                if self.pres.head[*word1.last().unwrap()] != self.pres.tail[word2[0]] {
                    continue;
                }
                let mut nw = word1.clone();
                nw.extend_from_slice(word2);
                *raw.entry(self.index[w1 + w2][&nw]).or_insert_with(Rat::zero) += c1 * c2;
            }
        }
        let raw: SparseVec = raw.into_iter().filter(|(_, c)| !c.is_zero()).collect();
        Ok(self.reduce_raw(w1 + w2, &raw))
    }
}

/// The dual coalgebra of a quadratic presentation, with the word-level
/// realization of each basis vector retained for differential computations.
#[derive(Debug, Clone)]
pub struct KoszulDual {
    pub coalgebra: CoalgebraPresentation,
    pub max_weight: usize,
    words: Vec<Vec<Word>>,
    vectors: Vec<Vec<SparseVec>>,
    offsets: Vec<usize>,
    gen_count: usize,
}

impl KoszulDual {
    /// Dimension of the weight-w component.
    pub fn dim(&self, w: usize) -> usize {
        if w > self.max_weight {
            0
        } else if w == 0 {
            self.coalgebra.vertices.len()
        } else {
            self.vectors[w].len()
        }
    }

    /// Index into `coalgebra.basis` for the i-th weight-w element.
    pub fn global_index(&self, w: usize, i: usize) -> usize {
        self.offsets[w] + i
    }

    pub fn vector(&self, w: usize, i: usize) -> &SparseVec {
        &self.vectors[w][i]
    }

    /// Express a raw word-coefficient vector in the weight-w dual basis.
    pub fn express(&self, w: usize, raw: &SparseVec) -> Result<SparseVec> {
        let mut t = raw.clone();
        t.sort_by_key(|e| e.0);
        let coords = express_in_span(&self.vectors[w], self.words[w].len(), &t)
            .ok_or_else(|| {
                EngineError::Internal(
                    "vector does not lie in the dual coalgebra component".into(),
                )
            })?;
        Ok(coords
            .into_iter()
            .enumerate()
            .filter(|(_, c)| !c.is_zero())
            .collect())
    }

    /// Remove a leading letter: the weight-w basis element i contracted
    /// against generator g, returned in weight-(w−1) dual coordinates.
    pub fn contract_first(&self, w: usize, i: usize, g: usize) -> Result<SparseVec> {
        assert!(w >= 1);
        let mut raw: BTreeMap<usize, Rat> = BTreeMap::new();
        for (col, c) in &self.vectors[w][i] {
            let word = &self.words[w][*col];
            if word[0] != g {
                continue;
            }
            if w == 1 {
                // contraction to weight 0 is handled by the caller (it is a
                // vertex class, not a word)
                continue;
            }
            let rest = word[1..].to_vec();
            let pos = self.words[w - 1].iter().position(|x| *x == rest).unwrap();
            *raw.entry(pos).or_insert_with(Rat::zero) += c.clone();
        }
        let raw: SparseVec = raw.into_iter().filter(|(_, c)| !c.is_zero()).collect();
        if raw.is_empty() {
            return Ok(Vec::new());
        }
        self.express(w - 1, &raw)
    }

    /// Coefficient of the single-letter word [g] after contracting the
    /// weight-1 element i against g (the weight-0 part of the contraction).
    pub fn contract_to_unit(&self, i: usize, g: usize) -> Rat {
        for (col, c) in &self.vectors[1][i] {
            if self.words[1][*col][0] == g {
                return c.clone();
            }
        }
        Rat::zero()
    }

    pub fn generator_count(&self) -> usize {
        self.gen_count
    }
}

/// Compute the quadratic dual coalgebra up to a weight bound. The weight-m
/// component is the intersection of all subspaces (word-prefix ⊗ suspended
/// relations ⊗ word-suffix), realized as the kernel of stacked
/// orthogonal-complement constraints, one endpoint block at a time.
pub fn koszul_dual(p: &QuadraticPresentation, max_weight: usize) -> Result<KoszulDual> {
    p.validate()?;
    if max_weight < 2 {
        return Err(EngineError::Input(
            "dual computation needs max_weight ≥ 2".into(),
        ));
    }
    for (r, rel) in p.relations.iter().enumerate() {
        let mut ends: Option<(usize, usize)> = None;
        for ((x, y), _) in rel {
            let e = (p.tail[*x], p.head[*y]);
            match ends {
                None => ends = Some(e),
                Some(prev) if prev != e => {
                    return Err(EngineError::Input(format!(
                        "relation #{} mixes endpoint blocks; its dual basis would be ill-defined",
                        r
                    )))
                }
                _ => {}
            }
        }
    }
    let words = enumerate_words(p, max_weight);
    let nv = p.vertices.len();
    let single = nv == 1;

    // suspended relations: s²(x⊗y) = (−1)^{|x|} sx⊗sy
    let srelations: Vec<Vec<((usize, usize), Rat)>> = p
        .relations
        .iter()
        .map(|rel| {
            rel.iter()
                .map(|((x, y), c)| {
                    ((*x, *y), c * sign_pow(p.generators[*x].degree))
                })
                .collect()
        })
        .collect();

    let mut vectors: Vec<Vec<SparseVec>> = Vec::with_capacity(max_weight + 1);
    vectors.push(Vec::new()); // weight 0 handled as vertex grouplikes
    vectors.push((0..p.dim()).map(|i| vec![(i, Rat::one())]).collect());
    for w in 2..=max_weight {
        let mut found: Vec<SparseVec> = Vec::new();
        // endpoint blocks in a fixed order
        let mut blocks: BTreeMap<(usize, usize), Vec<usize>> = BTreeMap::new();
        for (col, word) in words[w].iter().enumerate() {
            let key = (p.tail[word[0]], p.head[*word.last().unwrap()]);
            blocks.entry(key).or_default().push(col);
        }
        for cols in blocks.values() {
            let local: BTreeMap<usize, usize> =
                cols.iter().enumerate().map(|(l, &c)| (c, l)).collect();
            let mut constraints = SparseMat::new(cols.len());
            for i in 0..=(w - 2) {
                let j = w - 2 - i;
                // spanning vectors of prefix ⊗ s²R ⊗ suffix inside this block
                let mut span = SparseMat::new(cols.len());
                let prefixes: Vec<Word> = if i == 0 {
                    vec![Vec::new()]
                } else {
                    words[i].clone()
                };
                let suffixes: Vec<Word> = if j == 0 {
                    vec![Vec::new()]
                } else {
                    words[j].clone()
                };
                for pre in &prefixes {
                    for rel in &srelations {
                        for suf in &suffixes {
                            let mut row: BTreeMap<usize, Rat> = BTreeMap::new();
                            for ((x, y), c) in rel {
                                if let Some(last) = pre.last() {
                                    if p.head[*last] != p.tail[*x] {
                                        continue;
                                    }
                                }
                                if let Some(first) = suf.first() {
                                    if p.head[*y] != p.tail[*first] {
                                        continue;
                                    }
                                }
                                let mut nw = pre.clone();
                                nw.push(*x);
                                nw.push(*y);
                                nw.extend_from_slice(suf);
                                let col = words[w].iter().position(|z| *z == nw).unwrap();
                                if let Some(l) = local.get(&col) {
                                    *row.entry(*l).or_insert_with(Rat::zero) += c;
                                }
                            }
                            let row: SparseVec =
                                row.into_iter().filter(|(_, c)| !c.is_zero()).collect();
                            if !row.is_empty() {
                                span.push_row(row);
                            }
                        }
                    }
                }
                for phi in kernel_basis(&span) {
                    constraints.push_row(phi);
                }
            }
            for v in kernel_basis(&constraints) {
                let global: SparseVec =
                    v.into_iter().map(|(l, c)| (cols[l], c)).collect();
                found.push(global);
            }
        }
        vectors.push(found);
    }

    // assemble the coalgebra presentation
    let mut basis: Vec<GradedSymbol> = Vec::new();
    let mut tail = Vec::new();
    let mut head = Vec::new();
    let mut offsets = vec![0usize; max_weight + 1];
    for v in 0..nv {
        let name = if single { "1".into() } else { format!("1_{}", p.vertices[v]) };
        basis.push(GradedSymbol::new(name, 0, 0));
        tail.push(v);
        head.push(v);
    }
    offsets[1] = basis.len();
    for (g, sym) in p.generators.iter().enumerate() {
        basis.push(GradedSymbol::new(
            format!("s{}", sym.name),
            sym.degree + 1,
            1,
        ));
        tail.push(p.tail[g]);
        head.push(p.head[g]);
    }
    for w in 2..=max_weight {
        offsets[w] = basis.len();
        for (n, vec) in vectors[w].iter().enumerate() {
            let lead = &words[w][vec[0].0];
            let degree: i64 = lead.iter().map(|&g| p.generators[g].degree + 1).sum();
            for (col, _) in vec {
                let d: i64 = words[w][*col]
                    .iter()
                    .map(|&g| p.generators[g].degree + 1)
                    .sum();
                if d != degree {
                    return Err(EngineError::Input(format!(
                        "dual basis vector at weight {} mixes degrees",
                        w
                    )));
                }
            }
            basis.push(GradedSymbol::new(format!("c{}_{}", w, n), degree, w as u32));
            tail.push(p.tail[lead[0]]);
            head.push(p.head[*lead.last().unwrap()]);
        }
    }

    let dim = basis.len();
    let mut coproduct: Vec<Vec<((usize, usize), Rat)>> = vec![Vec::new(); dim];
    let mut counit = vec![Rat::zero(); dim];
    for v in 0..nv {
        coproduct[v] = vec![((v, v), Rat::one())];
        counit[v] = Rat::one();
    }
    for w in 1..=max_weight {
        for (i, vec) in vectors[w].iter().enumerate() {
            let gi = offsets[w] + i;
            let mut terms: Vec<((usize, usize), Rat)> =
                vec![((tail[gi], gi), Rat::one())];
            for k in 1..w {
                // deconcatenation at position k, expressed in dual bases
                let ncols_suffix = words[w - k].len();
                let mut tensor: BTreeMap<usize, Rat> = BTreeMap::new();
                for (col, c) in vec {
                    let word = &words[w][*col];
                    let pre = word[..k].to_vec();
                    let suf = word[k..].to_vec();
                    let pi = words[k].iter().position(|z| *z == pre).unwrap();
                    let si = words[w - k].iter().position(|z| *z == suf).unwrap();
                    *tensor
                        .entry(pi * ncols_suffix + si)
                        .or_insert_with(Rat::zero) += c.clone();
                }
                let target: SparseVec =
                    tensor.into_iter().filter(|(_, c)| !c.is_zero()).collect();
                if target.is_empty() {
                    continue;
                }
                // span of basis ⊗ basis at the matching weights
                let mut span: Vec<SparseVec> = Vec::new();
                let mut labels: Vec<(usize, usize)> = Vec::new();
                for (a, va) in vectors[k].iter().enumerate() {
                    for (b, vb) in vectors[w - k].iter().enumerate() {
                        let mut prod: SparseVec = Vec::new();
                        for (ca, xa) in va {
                            for (cb, xb) in vb {
                                prod.push((ca * ncols_suffix + cb, xa * xb));
                            }
                        }
                        prod.sort_by_key(|e| e.0);
                        span.push(prod);
                        labels.push((offsets[k] + a, offsets[w - k] + b));
                    }
                }
                let coords = express_in_span(&span, words[k].len() * ncols_suffix, &target)
                    .ok_or_else(|| {
                        EngineError::Internal(
                            "deconcatenation left the dual coalgebra".into(),
                        )
                    })?;
                for (n, c) in coords.into_iter().enumerate() {
                    if !c.is_zero() {
                        terms.push(((labels[n].0, labels[n].1), c));
                    }
                }
            }
            terms.push(((gi, head[gi]), Rat::one()));
            terms.sort_by_key(|(ij, _)| *ij);
            coproduct[gi] = terms;
        }
    }

    let coalgebra = CoalgebraPresentation {
        name: format!("dual({})", p.name),
        vertices: p.vertices.clone(),
        basis,
        tail,
        head,
        coproduct,
        counit,
        pairing: None,
    };
    coalgebra.validate()?;
    Ok(KoszulDual {
        coalgebra,
        max_weight,
        words,
        vectors,
        offsets,
        gen_count: p.dim(),
    })
}

/// An element of the two-sided complex A ⊗ A^¡, keyed by
/// (algebra weight, algebra basis index, dual weight, dual basis index).
pub type MixedElement = BTreeMap<(usize, usize, usize, usize), Rat>;

pub fn mixed_single(wa: usize, ai: usize, wd: usize, fi: usize) -> MixedElement {
    [((wa, ai, wd, fi), Rat::one())].into_iter().collect()
}

fn mixed_insert(out: &mut MixedElement, key: (usize, usize, usize, usize), c: Rat) {
    let e = out.entry(key).or_insert_with(Rat::zero);
    *e += c;
    if e.is_zero() {
        out.remove(&key);
    }
}

/// One step of the two-sided differential: d(a⊗f) = Σ_g (a·g) ⊗ (g ⌟ f),
/// with the Koszul sign from moving the desuspended contraction past a.
pub fn koszul_differential(
    trunc: &AlgebraTruncation,
    dual: &KoszulDual,
    x: &MixedElement,
) -> Result<MixedElement> {
    let mut out = MixedElement::new();
    for ((wa, ai, wd, fi), c) in x {
        if *wd == 0 {
            continue;
        }
        let a_vec: SparseVec = vec![(*ai, Rat::one())];
        for g in 0..dual.generator_count() {
            let sign = sign_pow((trunc.pres.generators[g].degree + 1)
                * trunc.class_degree(*wa, *ai));
            let gv: SparseVec = {
                // the single-letter word [g] survives as a weight-1 class
                let pos = trunc
                    .basis_pos_of_generator(g)
                    .ok_or_else(|| EngineError::Internal("generator class missing".into()))?;
                vec![(pos, Rat::one())]
            };
            let prod = trunc.multiply(*wa, &a_vec, 1, &gv)?;
            if prod.is_empty() {
                continue;
            }
            if *wd == 1 {
                let unit_c = dual.contract_to_unit(*fi, g);
                if unit_c.is_zero() {
                    continue;
                }
                // the weight-0 dual class at the generator's head vertex
                let v = trunc.pres.head[g];
                for (pi, pc) in &prod {
                    mixed_insert(
                        &mut out,
                        (*wa + 1, *pi, 0, v),
                        c * pc * &unit_c * &sign,
                    );
                }
            } else {
                let rest = dual.contract_first(*wd, *fi, g)?;
                for (ri, rc) in &rest {
                    for (pi, pc) in &prod {
                        mixed_insert(
                            &mut out,
                            (*wa + 1, *pi, *wd - 1, *ri),
                            c * pc * rc * &sign,
                        );
                    }
                }
            }
        }
    }
    Ok(out)
}

impl AlgebraTruncation {
    /// Basis position of the single-letter class [g] in weight 1.
    pub fn basis_pos_of_generator(&self, g: usize) -> Option<usize> {
        let col = self.index[1].get(&vec![g])?;
        self.basis_pos[1].get(col).copied()
    }
}

/// Homology dimensions of the two-sided complex, per total weight and
/// per dual-weight position.
#[derive(Debug, Clone)]
pub struct AcyclicityReport {
    pub max_weight: usize,
    /// homology[w] = list of (dual weight, betti) for total weight w ≥ 1
    pub homology: BTreeMap<usize, Vec<(usize, usize)>>,
}

impl AcyclicityReport {
    pub fn is_acyclic(&self) -> bool {
        self.homology
            .values()
            .all(|slots| slots.iter().all(|(_, b)| *b == 0))
    }
}

/// Basis of the total-weight-w part of A ⊗ A^¡ at dual weight m:
/// composable pairs of basis classes.
fn mixed_basis(
    trunc: &AlgebraTruncation,
    dual: &KoszulDual,
    w: usize,
    m: usize,
) -> Vec<(usize, usize)> {
    let wa = w - m;
    let mut out = Vec::new();
    for ai in 0..trunc.dim(wa) {
        for fi in 0..dual.dim(m) {
            let ft = if m == 0 {
                fi
            } else {
                dual.coalgebra.tail[dual.global_index(m, fi)]
            };
            if trunc.class_head(wa, ai) == ft {
                out.push((ai, fi));
            }
        }
    }
    out
}

/// Compute homology of the two-sided complex weight by weight. A quadratic
/// algebra whose report is empty in every positive weight is Koszul within
/// the truncation.
pub fn koszul_acyclicity_check(
    p: &QuadraticPresentation,
    max_weight: usize,
) -> Result<AcyclicityReport> {
    let trunc = AlgebraTruncation::new(p, max_weight)?;
    let dual = koszul_dual(p, max_weight.max(2))?;
    let mut homology = BTreeMap::new();
    for w in 1..=max_weight {
        let top = w.min(dual.max_weight);
        let bases: Vec<Vec<(usize, usize)>> =
            (0..=top).map(|m| mixed_basis(&trunc, &dual, w, m)).collect();
        // differential matrices: columns at m map into slot m−1
        let mut images: Vec<Vec<SparseVec>> = Vec::new();
        for m in 0..=top {
            let mut cols = Vec::new();
            if m >= 1 {
                let target_index: BTreeMap<(usize, usize), usize> = bases[m - 1]
                    .iter()
                    .enumerate()
                    .map(|(i, p)| (*p, i))
                    .collect();
                for &(ai, fi) in &bases[m] {
                    let d = koszul_differential(
                        &trunc,
                        &dual,
                        &mixed_single(w - m, ai, m, fi),
                    )?;
                    let col: SparseVec = d
                        .into_iter()
                        .map(|((_, pi, _, ri), c)| (target_index[&(pi, ri)], c))
                        .collect();
                    cols.push(col);
                }
            }
            images.push(cols);
        }
        let mut slots = Vec::new();
        for m in 0..=top {
            let dim = bases[m].len();
            // outgoing matrix in row form: rows indexed by slot m−1
            let out_rows = if m >= 1 { bases[m - 1].len() } else { 0 };
            let mut out_mat = SparseMat::new(dim);
            let mut rows: Vec<BTreeMap<usize, Rat>> = vec![BTreeMap::new(); out_rows];
            for (colidx, col) in images[m].iter().enumerate() {
                for (r, c) in col {
                    rows[*r].insert(colidx, c.clone());
                }
            }
            for row in rows {
                out_mat.push_row(row.into_iter().collect());
            }
            let incoming: &[SparseVec] = if m + 1 <= top { &images[m + 1] } else { &[] };
            let slot = homology_slot(dim, &out_mat, incoming)?;
            if dim > 0 {
                slots.push((m, slot.betti));
            }
        }
        let nonzero: Vec<(usize, usize)> =
            slots.into_iter().filter(|(_, b)| *b > 0).collect();
        homology.insert(w, nonzero);
    }
    Ok(AcyclicityReport { max_weight, homology })
}

/// A quasi-free differential graded algebra: free on generators, with the
/// differential recorded on generators as two-letter words.
#[derive(Debug, Clone)]
pub struct DGAlgebraPresentation {
    pub name: String,
    pub vertices: Vec<String>,
    pub generators: Vec<GradedSymbol>,
    pub tail: Vec<usize>,
    pub head: Vec<usize>,
    pub differential: Vec<Vec<((usize, usize), Rat)>>,
}

/// The cobar construction on the reduced part of a conilpotent coalgebra:
/// generators are desuspended positive-weight basis elements, and
/// d(s⁻¹c) = −Σ (−1)^{|c′|} s⁻¹c′ · s⁻¹c″ over the reduced coproduct.
pub fn cobar(c: &CoalgebraPresentation, weight_bound: u32) -> Result<DGAlgebraPresentation> {
    c.validate()?;
    let mut gen_of: BTreeMap<usize, usize> = BTreeMap::new();
    let mut generators = Vec::new();
    let mut tail = Vec::new();
    let mut head = Vec::new();
    for i in 0..c.dim() {
        let w = c.weight(i);
        if w == 0 || w > weight_bound {
            continue;
        }
        gen_of.insert(i, generators.len());
        generators.push(GradedSymbol::new(
            c.basis[i].name.clone(),
            c.degree(i) - 1,
            w,
        ));
        tail.push(c.tail[i]);
        head.push(c.head[i]);
    }
    let mut differential = vec![Vec::new(); generators.len()];
    for (&i, &g) in &gen_of {
        let mut terms: BTreeMap<(usize, usize), Rat> = BTreeMap::new();
        for ((a, b), coeff) in c.delta_reduced(i) {
            let (ga, gb) = match (gen_of.get(&a), gen_of.get(&b)) {
                (Some(x), Some(y)) => (*x, *y),
                _ => {
                    return Err(EngineError::Truncation(format!(
                        "coproduct of '{}' leaves the weight bound {}",
                        c.basis[i].name, weight_bound
                    )))
                }
            };
            let sign = -sign_pow(c.degree(a));
            *terms.entry((ga, gb)).or_insert_with(Rat::zero) += coeff * sign;
        }
        differential[g] = terms
            .into_iter()
            .filter(|(_, c)| !c.is_zero())
            .collect();
    }

    // d² = 0 on generators, expanding d as a degree −1 derivation
    for g in 0..generators.len() {
        let mut acc: BTreeMap<(usize, usize, usize), Rat> = BTreeMap::new();
        for ((u, v), cv) in &differential[g] {
            for ((x, y), e) in &differential[*u] {
                let k = acc.entry((*x, *y, *v)).or_insert_with(Rat::zero);
                *k += cv * e;
            }
            let pass = sign_pow(generators[*u].degree);
            for ((x, y), e) in &differential[*v] {
                let k = acc.entry((*u, *x, *y)).or_insert_with(Rat::zero);
                *k += cv * e * &pass;
            }
        }
        acc.retain(|_, v| !v.is_zero());
        if !acc.is_empty() {
            return Err(EngineError::Internal(format!(
                "cobar differential does not square to zero on '{}'",
                generators[g].name
            )));
        }
    }

    Ok(DGAlgebraPresentation {
        name: format!("cobar({})", c.name),
        vertices: c.vertices.clone(),
        generators,
        tail,
        head,
        differential,
    })
}

/// The sum of iterated reduced coproducts ι(x) = x + Δ̄(x) + Δ̄²(x) + ⋯,
/// complete once the depth reaches the weight of x.
pub fn iota(
    c: &CoalgebraPresentation,
    x: usize,
    depth: usize,
) -> Result<Vec<(Vec<usize>, Rat)>> {
    if depth < c.weight(x) as usize {
        return Err(EngineError::Input(format!(
            "depth {} is below the weight {} of '{}'; the sum would be incomplete",
            depth,
            c.weight(x),
            c.basis[x].name
        )));
    }
    let mut out: BTreeMap<Vec<usize>, Rat> = BTreeMap::new();
    let mut state: BTreeMap<Vec<usize>, Rat> =
        [(vec![x], Rat::one())].into_iter().collect();
    out.insert(vec![x], Rat::one());
    for _ in 1..=depth {
        let mut next: BTreeMap<Vec<usize>, Rat> = BTreeMap::new();
        for (word, coeff) in &state {
            for ((a, b), d) in c.delta_reduced(word[0]) {
                let mut nw = vec![a, b];
                nw.extend_from_slice(&word[1..]);
                *next.entry(nw).or_insert_with(Rat::zero) += coeff * &d;
            }
        }
        next.retain(|_, v| !v.is_zero());
        if next.is_empty() {
            break;
        }
        for (w, c) in &next {
            *out.entry(w.clone()).or_insert_with(Rat::zero) += c;
        }
        state = next;
    }
    Ok(out.into_iter().filter(|(_, c)| !c.is_zero()).collect())
}
