//! Finite presentations: quadratic algebras, coalgebras with explicit
//! coproduct tables, pairings, and quivers.
//!
//! Everything downstream (dual computation, cyclic complexes, brackets,
//! quantization) consumes the two presentation types defined here, so this
//! module is strict: every presentation is validated on construction and all
//! structural axioms are checked exactly over ℚ.
//!
//! Multi-vertex inputs work over the semisimple ring spanned by the vertex
//! idempotents. Tensor products over that ring are implemented as head/tail
//! matching filters on words: a pair (x, y) exists only when head(x) = tail(y).

use crate::error::{EngineError, Result};
use crate::linalg::{solve_unique, Echelon, SparseMat, SparseVec};
use crate::scalar::{GradedSymbol, Rat};
use num::{One, Zero};
use serde::Deserialize;
use std::collections::{BTreeMap, BTreeSet};
use std::str::FromStr;

/// A quadratic presentation A = T(V)/⟨R⟩ with R ⊆ V⊗V, over a vertex base.
#[derive(Debug, Clone)]
pub struct QuadraticPresentation {
    pub name: String,
    pub vertices: Vec<String>,
    /// Generating space V; each generator carries weight 1.
    pub generators: Vec<GradedSymbol>,
    /// Tail/head vertex index per generator.
    pub tail: Vec<usize>,
    pub head: Vec<usize>,
    /// Each relation is a rational combination of composable generator pairs.
    pub relations: Vec<Vec<((usize, usize), Rat)>>,
}

impl QuadraticPresentation {
    pub fn dim(&self) -> usize {
        self.generators.len()
    }

    pub fn find(&self, name: &str) -> Option<usize> {
        self.generators.iter().position(|g| g.name == name)
    }

    /// Index map for the space of composable generator pairs.
    pub fn pair_space(&self) -> BTreeMap<(usize, usize), usize> {
        let mut map = BTreeMap::new();
        for i in 0..self.dim() {
            for j in 0..self.dim() {
                if self.head[i] == self.tail[j] {
                    let next = map.len();
                    map.insert((i, j), next);
                }
            }
        }
        map
    }

    pub fn validate(&self) -> Result<()> {
        let mut seen = BTreeSet::new();
        for g in &self.generators {
            if !seen.insert(g.name.clone()) {
                return Err(EngineError::Input(format!(
                    "duplicate generator name '{}'",
                    g.name
                )));
            }
        }
        if self.tail.len() != self.dim() || self.head.len() != self.dim() {
            return Err(EngineError::Input(
                "generator endpoint tables have wrong length".into(),
            ));
        }
        for (k, (&t, &h)) in self.tail.iter().zip(self.head.iter()).enumerate() {
            if t >= self.vertices.len() || h >= self.vertices.len() {
                return Err(EngineError::Input(format!(
                    "generator '{}' has an endpoint outside the vertex set",
                    self.generators[k].name
                )));
            }
        }
        let pairs = self.pair_space();
        let mut ech = Echelon::new(pairs.len());
        for (r, rel) in self.relations.iter().enumerate() {
            if rel.iter().all(|(_, c)| c.is_zero()) {
                return Err(EngineError::Input(format!("relation #{} is zero", r)));
            }
            let mut vec: BTreeMap<usize, Rat> = BTreeMap::new();
            let mut total_degree: Option<i64> = None;
            for ((i, j), c) in rel {
                if *i >= self.dim() || *j >= self.dim() {
                    return Err(EngineError::Input(format!(
                        "relation #{} refers to a generator outside the presentation",
                        r
                    )));
                }
                let col = match pairs.get(&(*i, *j)) {
                    Some(col) => *col,
                    None => {
                        return Err(EngineError::Input(format!(
                            "relation #{} contains the non-composable pair ({}, {})",
                            r, self.generators[*i].name, self.generators[*j].name
                        )))
                    }
                };
                let d = self.generators[*i].degree + self.generators[*j].degree;
                match total_degree {
                    None => total_degree = Some(d),
                    Some(prev) if prev != d => {
                        return Err(EngineError::Input(format!(
                            "relation #{} is not degree-homogeneous",
                            r
                        )))
                    }
                    _ => {}
                }
                *vec.entry(col).or_insert_with(Rat::zero) += c;
            }
            let sv: SparseVec = vec.into_iter().filter(|(_, c)| !c.is_zero()).collect();
            if sv.is_empty() || !ech.insert(&sv) {
                return Err(EngineError::Input(format!(
                    "relation #{} is linearly dependent on earlier relations",
                    r
                )));
            }
        }
        Ok(())
    }
}

/// Pairing table ⟨−,−⟩ of a fixed degree; dense on basis × basis.
#[derive(Debug, Clone)]
pub struct PairingTable {
    pub degree: i64,
    pub entries: Vec<Vec<Rat>>,
}

impl PairingTable {
    pub fn value(&self, i: usize, j: usize) -> &Rat {
        &self.entries[i][j]
    }
}

/// A coalgebra with an explicit basis, coproduct and counit tables, and an
/// optional pairing.
#[derive(Debug, Clone)]
pub struct CoalgebraPresentation {
    pub name: String,
    pub vertices: Vec<String>,
    pub basis: Vec<GradedSymbol>,
    pub tail: Vec<usize>,
    pub head: Vec<usize>,
    /// coproduct[k] = Δ(c_k) as a sorted list of ((i, j), coefficient).
    pub coproduct: Vec<Vec<((usize, usize), Rat)>>,
    pub counit: Vec<Rat>,
    pub pairing: Option<PairingTable>,
}

impl CoalgebraPresentation {
    pub fn dim(&self) -> usize {
        self.basis.len()
    }

    pub fn find(&self, name: &str) -> Option<usize> {
        self.basis.iter().position(|g| g.name == name)
    }

    pub fn degree(&self, i: usize) -> i64 {
        self.basis[i].degree
    }

    pub fn weight(&self, i: usize) -> u32 {
        self.basis[i].weight
    }

    pub fn max_weight(&self) -> u32 {
        self.basis.iter().map(|b| b.weight).max().unwrap_or(0)
    }

    pub fn delta(&self, i: usize) -> &[((usize, usize), Rat)] {
        &self.coproduct[i]
    }

    /// Reduced coproduct: Δ with both factors projected away from weight 0.
    pub fn delta_reduced(&self, i: usize) -> Vec<((usize, usize), Rat)> {
        self.coproduct[i]
            .iter()
            .filter(|((a, b), _)| self.weight(*a) > 0 && self.weight(*b) > 0)
            .cloned()
            .collect()
    }

    pub fn pairing_value(&self, i: usize, j: usize) -> Rat {
        match &self.pairing {
            Some(p) => p.entries[i][j].clone(),
            None => Rat::zero(),
        }
    }

    /// The weight-0 idempotent sitting at a vertex.
    pub fn unit_at_vertex(&self, v: usize) -> Option<usize> {
        (0..self.dim()).find(|&i| self.weight(i) == 0 && self.tail[i] == v)
    }

    pub fn validate(&self) -> Result<()> {
        let dim = self.dim();
        let mut seen = BTreeSet::new();
        for b in &self.basis {
            if !seen.insert(b.name.clone()) {
                return Err(EngineError::Input(format!(
                    "duplicate basis name '{}'",
                    b.name
                )));
            }
        }
        if self.coproduct.len() != dim || self.counit.len() != dim {
            return Err(EngineError::Input(
                "coproduct/counit tables have wrong length".into(),
            ));
        }
        for (&t, &h) in self.tail.iter().zip(self.head.iter()) {
            if t >= self.vertices.len() || h >= self.vertices.len() {
                return Err(EngineError::Input(
                    "basis element endpoint outside the vertex set".into(),
                ));
            }
        }

        for k in 0..dim {
            let name = &self.basis[k].name;
            for ((i, j), _) in &self.coproduct[k] {
                if *i >= dim || *j >= dim {
                    return Err(EngineError::Input(format!(
                        "coproduct of '{}' refers to an unknown basis element",
                        name
                    )));
                }
                if self.tail[*i] != self.tail[k]
                    || self.head[*i] != self.tail[*j]
                    || self.head[*j] != self.head[k]
                {
                    return Err(EngineError::Input(format!(
                        "coproduct of '{}' contains a non-composable pair ({}, {})",
                        name, self.basis[*i].name, self.basis[*j].name
                    )));
                }
                if self.degree(*i) + self.degree(*j) != self.degree(k)
                    || self.weight(*i) + self.weight(*j) != self.weight(k)
                {
                    return Err(EngineError::Input(format!(
                        "coproduct of '{}' is not homogeneous in degree and weight",
                        name
                    )));
                }
            }
        }

        // coassociativity: (Δ⊗id)Δ = (id⊗Δ)Δ, exactly
        for k in 0..dim {
            let mut left: BTreeMap<(usize, usize, usize), Rat> = BTreeMap::new();
            let mut right: BTreeMap<(usize, usize, usize), Rat> = BTreeMap::new();
            for ((i, j), c) in &self.coproduct[k] {
                for ((p, q), d) in &self.coproduct[*i] {
                    *left.entry((*p, *q, *j)).or_insert_with(Rat::zero) += c * d;
                }
                for ((p, q), d) in &self.coproduct[*j] {
                    *right.entry((*i, *p, *q)).or_insert_with(Rat::zero) += c * d;
                }
            }
            left.retain(|_, v| !v.is_zero());
            right.retain(|_, v| !v.is_zero());
            if left != right {
                return Err(EngineError::Input(format!(
                    "coassociativity fails on basis element '{}'",
                    self.basis[k].name
                )));
            }
        }

        // counit axiom: (ε⊗id)Δ(x) = x = (id⊗ε)Δ(x)
        for k in 0..dim {
            let mut left: BTreeMap<usize, Rat> = BTreeMap::new();
            let mut right: BTreeMap<usize, Rat> = BTreeMap::new();
            for ((i, j), c) in &self.coproduct[k] {
                *left.entry(*j).or_insert_with(Rat::zero) += c * &self.counit[*i];
                *right.entry(*i).or_insert_with(Rat::zero) += c * &self.counit[*j];
            }
            left.retain(|_, v| !v.is_zero());
            right.retain(|_, v| !v.is_zero());
            let expected: BTreeMap<usize, Rat> = [(k, Rat::one())].into_iter().collect();
            if left != expected || right != expected {
                return Err(EngineError::Input(format!(
                    "counit axiom fails on basis element '{}'",
                    self.basis[k].name
                )));
            }
        }

        // weight-0 part: one grouplike idempotent per vertex, counit 1 there
        // and 0 in positive weight
        let mut unit_of_vertex: BTreeMap<usize, usize> = BTreeMap::new();
        for k in 0..dim {
            if self.weight(k) == 0 {
                if self.degree(k) != 0 {
                    return Err(EngineError::Input(format!(
                        "weight-0 element '{}' must have degree 0",
                        self.basis[k].name
                    )));
                }
                if self.tail[k] != self.head[k] {
                    return Err(EngineError::Input(format!(
                        "weight-0 element '{}' must sit at a single vertex",
                        self.basis[k].name
                    )));
                }
                if unit_of_vertex.insert(self.tail[k], k).is_some() {
                    return Err(EngineError::Input(format!(
                        "two weight-0 elements at vertex '{}'",
                        self.vertices[self.tail[k]]
                    )));
                }
                let grouplike = vec![((k, k), Rat::one())];
                if self.coproduct[k] != grouplike || !self.counit[k].is_one() {
                    return Err(EngineError::Input(format!(
                        "weight-0 element '{}' is not grouplike with counit 1",
                        self.basis[k].name
                    )));
                }
            } else if !self.counit[k].is_zero() {
                return Err(EngineError::Input(format!(
                    "counit must vanish on the positive-weight element '{}'",
                    self.basis[k].name
                )));
            }
        }
        for v in 0..self.vertices.len() {
            if !unit_of_vertex.contains_key(&v) {
                return Err(EngineError::Input(format!(
                    "vertex '{}' has no weight-0 idempotent",
                    self.vertices[v]
                )));
            }
        }

        // conilpotence: the iterated reduced coproduct vanishes by the time
        // the word length exceeds the weight
        for k in 0..dim {
            let w = self.weight(k) as usize;
            if w == 0 {
                continue;
            }
            let mut state: BTreeMap<Vec<usize>, Rat> =
                [(vec![k], Rat::one())].into_iter().collect();
            for _ in 0..w {
                let mut next: BTreeMap<Vec<usize>, Rat> = BTreeMap::new();
                for (word, c) in &state {
                    for ((i, j), d) in self.delta_reduced(word[0]) {
                        let mut nw = vec![i, j];
                        nw.extend_from_slice(&word[1..]);
                        let e = next.entry(nw).or_insert_with(Rat::zero);
                        *e += c * &d;
                        if e.is_zero() {
                            next.remove(&vec![i, j]);
                        }
                    }
                }
                next.retain(|_, v| !v.is_zero());
                state = next;
            }
            if !state.is_empty() {
                return Err(EngineError::Input(format!(
                    "conilpotence fails on basis element '{}'",
                    self.basis[k].name
                )));
            }
        }

        if let Some(p) = &self.pairing {
            if p.entries.len() != dim || p.entries.iter().any(|r| r.len() != dim) {
                return Err(EngineError::Input("pairing table has wrong shape".into()));
            }
            for i in 0..dim {
                for j in 0..dim {
                    let v = &p.entries[i][j];
                    if v.is_zero() {
                        continue;
                    }
                    if self.degree(i) + self.degree(j) != p.degree {
                        return Err(EngineError::Input(format!(
                            "pairing ⟨{}, {}⟩ is nonzero outside degree {}",
                            self.basis[i].name, self.basis[j].name, p.degree
                        )));
                    }
                    if self.tail[i] != self.head[j] || self.head[i] != self.tail[j] {
                        return Err(EngineError::Input(format!(
                            "pairing ⟨{}, {}⟩ is nonzero on a non-closing pair",
                            self.basis[i].name, self.basis[j].name
                        )));
                    }
                    let sign = if self.degree(i) * self.degree(j) % 2 != 0 {
                        -Rat::one()
                    } else {
                        Rat::one()
                    };
                    if *v != sign * &p.entries[j][i] {
                        return Err(EngineError::Input(format!(
                            "pairing is not graded-symmetric on ⟨{}, {}⟩",
                            self.basis[i].name, self.basis[j].name
                        )));
                    }
                }
            }
        }
        Ok(())
    }
}

/// A quiver: named vertices and arrows.
#[derive(Debug, Clone)]
pub struct QuiverSpec {
    pub name: String,
    pub vertices: Vec<String>,
    /// (name, tail index, head index)
    pub arrows: Vec<(String, usize, usize)>,
}

impl QuiverSpec {
    pub fn validate(&self) -> Result<()> {
        let mut names = BTreeSet::new();
        for v in &self.vertices {
            if !names.insert(v.clone()) {
                return Err(EngineError::Input(format!("duplicate vertex '{}'", v)));
            }
        }
        let mut arrow_names = BTreeSet::new();
        for (a, t, h) in &self.arrows {
            if a.contains('*') {
                return Err(EngineError::Input(format!(
                    "arrow name '{}' may not contain '*' (reserved for reversed arrows)",
                    a
                )));
            }
            if !arrow_names.insert(a.clone()) {
                return Err(EngineError::Input(format!("duplicate arrow '{}'", a)));
            }
            if *t >= self.vertices.len() || *h >= self.vertices.len() {
                return Err(EngineError::Input(format!(
                    "arrow '{}' has an endpoint outside the vertex set",
                    a
                )));
            }
        }
        Ok(())
    }

    /// Whether any connected component of the underlying graph is an ADE
    /// Dynkin diagram. Loops and parallel edges immediately disqualify a
    /// component (the diagrams are simple graphs).
    pub fn has_dynkin_component(&self) -> bool {
        let n = self.vertices.len();
        let mut adj: Vec<BTreeSet<usize>> = vec![BTreeSet::new(); n];
        let mut edge_count: BTreeMap<(usize, usize), usize> = BTreeMap::new();
        let mut looped: BTreeSet<usize> = BTreeSet::new();
        for (_, t, h) in &self.arrows {
            if t == h {
                looped.insert(*t);
                continue;
            }
            let key = (*t.min(h), *t.max(h));
            *edge_count.entry(key).or_insert(0) += 1;
            adj[*t].insert(*h);
            adj[*h].insert(*t);
        }
        let mut seen = vec![false; n];
        for start in 0..n {
            if seen[start] {
                continue;
            }
            // collect the component
            let mut comp = vec![start];
            seen[start] = true;
            let mut stack = vec![start];
            while let Some(v) = stack.pop() {
                for &w in &adj[v] {
                    if !seen[w] {
                        seen[w] = true;
                        comp.push(w);
                        stack.push(w);
                    }
                }
            }
            if comp.iter().any(|v| looped.contains(v)) {
                continue; // a loop makes the component non-Dynkin
            }
            let comp_set: BTreeSet<usize> = comp.iter().cloned().collect();
            let mut edges = 0usize;
            let mut multi = false;
            for ((a, b), m) in &edge_count {
                if comp_set.contains(a) && comp_set.contains(b) {
                    edges += 1;
                    if *m > 1 {
                        multi = true;
                    }
                }
            }
            if multi || edges + 1 != comp.len() {
                continue; // parallel edges or cycles: not Dynkin
            }
            let degrees: Vec<usize> = comp.iter().map(|&v| adj[v].len()).collect();
            let max_deg = degrees.iter().cloned().max().unwrap_or(0);
            if max_deg <= 2 {
                return true; // a path: type A
            }
            if max_deg > 3 || degrees.iter().filter(|&&d| d == 3).count() != 1 {
                continue;
            }
            // one trivalent vertex: measure the three branch lengths
            let center = comp[degrees.iter().position(|&d| d == 3).unwrap()];
            let mut branches: Vec<usize> = adj[center]
                .iter()
                .map(|&first| {
                    let mut len = 1;
                    let mut prev = center;
                    let mut cur = first;
                    while let Some(&next) = adj[cur].iter().find(|&&w| w != prev) {
                        prev = cur;
                        cur = next;
                        len += 1;
                    }
                    len
                })
                .collect();
            branches.sort_unstable();
            let dynkin = matches!(
                (branches[0], branches[1], branches[2]),
                (1, 1, _) | (1, 2, 2) | (1, 2, 3) | (1, 2, 4)
            );
            if dynkin {
                return true;
            }
        }
        false
    }
}

/// Build the preprojective quadratic presentation and its dual coalgebra for a
/// non-Dynkin quiver: the double quiver with one relation per vertex, and the
/// coalgebra on vertices, doubled arrows, and one degree-2 circle per vertex,
/// together with its degree-2 pairing.
pub fn preprojective_from_quiver(
    q: &QuiverSpec,
) -> Result<(QuadraticPresentation, CoalgebraPresentation)> {
    q.validate()?;
    if q.has_dynkin_component() {
        return Err(EngineError::Dynkin(format!(
            "quiver '{}' contains an ADE component; the construction needs a non-Dynkin quiver",
            q.name
        )));
    }
    let nv = q.vertices.len();
    let single = nv == 1;
    let vname = |stem: &str, v: usize| -> String {
        if single {
            stem.to_string()
        } else {
            format!("{}_{}", stem, q.vertices[v])
        }
    };

    // double quiver generators: a then a* for each arrow
    let mut gens = Vec::new();
    let mut gtail = Vec::new();
    let mut ghead = Vec::new();
    for (name, t, h) in &q.arrows {
        gens.push(GradedSymbol::new(name.clone(), 0, 1));
        gtail.push(*t);
        ghead.push(*h);
        gens.push(GradedSymbol::new(format!("{}*", name), 0, 1));
        gtail.push(*h);
        ghead.push(*t);
    }
    // one relation per vertex: Σ_{tail(x)=v} ε(x)·x⊗x*
    let mut relations = Vec::new();
    for v in 0..nv {
        let mut rel = Vec::new();
        for (k, _) in q.arrows.iter().enumerate() {
            let (a, astar) = (2 * k, 2 * k + 1);
            if gtail[a] == v {
                rel.push(((a, astar), Rat::one()));
            }
            if gtail[astar] == v {
                rel.push(((astar, a), -Rat::one()));
            }
        }
        if !rel.is_empty() {
            relations.push(rel);
        }
    }
    let algebra = QuadraticPresentation {
        name: format!("preprojective({})", q.name),
        vertices: q.vertices.clone(),
        generators: gens,
        tail: gtail.clone(),
        head: ghead.clone(),
        relations,
    };
    algebra.validate()?;

    // dual coalgebra: e_v (wt 0), doubled arrows (wt 1), o_v (wt 2)
    let mut basis = Vec::new();
    let mut tail = Vec::new();
    let mut head = Vec::new();
    for v in 0..nv {
        basis.push(GradedSymbol::new(vname("e", v), 0, 0));
        tail.push(v);
        head.push(v);
    }
    let arrow_offset = basis.len();
    for (k, g) in algebra.generators.iter().enumerate() {
        basis.push(GradedSymbol::new(g.name.clone(), 1, 1));
        tail.push(gtail[k]);
        head.push(ghead[k]);
    }
    let circle_offset = basis.len();
    for v in 0..nv {
        basis.push(GradedSymbol::new(vname("o", v), 2, 2));
        tail.push(v);
        head.push(v);
    }
    let dim = basis.len();

    let star = |i: usize| -> usize {
        // doubled arrows come in adjacent (a, a*) pairs
        let k = i - arrow_offset;
        arrow_offset + if k % 2 == 0 { k + 1 } else { k - 1 }
    };

    let mut coproduct = vec![Vec::new(); dim];
    let mut counit = vec![Rat::zero(); dim];
    for v in 0..nv {
        coproduct[v] = vec![((v, v), Rat::one())];
        counit[v] = Rat::one();
    }
    for i in arrow_offset..circle_offset {
        coproduct[i] = vec![
            ((tail[i], i), Rat::one()),
            ((i, head[i]), Rat::one()),
        ];
    }
    for v in 0..nv {
        let o = circle_offset + v;
        let mut terms = vec![((o, v), Rat::one())];
        for i in arrow_offset..circle_offset {
            if tail[i] == v {
                // mirror the relation's coefficients: +x⊗x* on original
                // arrows, −x⊗x* on reversed ones
                let eps = if (i - arrow_offset) % 2 == 0 {
                    Rat::one()
                } else {
                    -Rat::one()
                };
                terms.push(((i, star(i)), eps));
            }
        }
        terms.push(((v, o), Rat::one()));
        coproduct[o] = terms;
    }

    let mut entries = vec![vec![Rat::zero(); dim]; dim];
    for v in 0..nv {
        entries[v][circle_offset + v] = Rat::one();
        entries[circle_offset + v][v] = Rat::one();
    }
    for i in arrow_offset..circle_offset {
        // ⟨x, x*⟩ = +1 on original arrows, −1 on reversed ones
        let eps = if (i - arrow_offset) % 2 == 0 {
            Rat::one()
        } else {
            -Rat::one()
        };
        entries[i][star(i)] = eps;
    }

    let coalgebra = CoalgebraPresentation {
        name: format!("dual({})", q.name),
        vertices: q.vertices.clone(),
        basis,
        tail,
        head,
        coproduct,
        counit,
        pairing: Some(PairingTable { degree: 2, entries }),
    };
    coalgebra.validate()?;
    Ok((algebra, coalgebra))
}

/// Multiplication table on a coalgebra basis: entry (i, j) lists the
/// components of x_i • x_j.
#[derive(Debug, Clone)]
pub struct ProductTable {
    pub dim: usize,
    pub entries: Vec<Vec<Vec<(usize, Rat)>>>,
}

impl ProductTable {
    pub fn value(&self, i: usize, j: usize) -> &[(usize, Rat)] {
        &self.entries[i][j]
    }

    fn multiply(&self, x: &BTreeMap<usize, Rat>, y: &BTreeMap<usize, Rat>) -> BTreeMap<usize, Rat> {
        let mut out = BTreeMap::new();
        for (i, a) in x {
            for (j, b) in y {
                for (k, c) in &self.entries[*i][*j] {
                    let e = out.entry(*k).or_insert_with(Rat::zero);
                    *e += a * b * c;
                }
            }
        }
        out.retain(|_, v| !v.is_zero());
        out
    }
}

/// Check the pairing is nondegenerate: for every degree d, the block pairing
/// degree d against degree (n − d) must be square and of full rank.
fn check_nondegenerate(c: &CoalgebraPresentation) -> Result<()> {
    let p = c
        .pairing
        .as_ref()
        .ok_or_else(|| EngineError::DegeneratePairing("no pairing on the presentation".into()))?;
    let degrees: BTreeSet<i64> = c.basis.iter().map(|b| b.degree).collect();
    for &d in &degrees {
        let rows: Vec<usize> = (0..c.dim()).filter(|&i| c.degree(i) == d).collect();
        let cols: Vec<usize> = (0..c.dim())
            .filter(|&i| c.degree(i) == p.degree - d)
            .collect();
        if rows.len() != cols.len() {
            return Err(EngineError::DegeneratePairing(format!(
                "degree blocks {} and {} have different dimensions",
                d,
                p.degree - d
            )));
        }
        let mut m = SparseMat::new(cols.len());
        for &i in &rows {
            let row: SparseVec = cols
                .iter()
                .enumerate()
                .filter(|(_, &j)| !p.entries[i][j].is_zero())
                .map(|(cidx, &j)| (cidx, p.entries[i][j].clone()))
                .collect();
            m.push_row(row);
        }
        if crate::linalg::rank(&m) != rows.len() {
            return Err(EngineError::DegeneratePairing(format!(
                "pairing block in degree {} is rank-deficient",
                d
            )));
        }
    }
    Ok(())
}

/// The product induced on a co-Frobenius coalgebra basis.
///
/// The returned table is the unique weight-additive product for which the
/// weight-0 idempotents are local units and the pairing is invariant,
/// ⟨x•y, z⟩ = ⟨x, y•z⟩. Both properties, together with associativity, are
/// re-verified on the result.
///
/// The coproduct-compatibility law Δ(x•y) = x•Δ(y) = Δ(x)•y is additionally
/// verified for the companion product obtained by transporting the
/// convolution product of the dual through the pairing; that is the form in
/// which the law follows from pairing invariance.
pub fn induced_product(c: &CoalgebraPresentation) -> Result<ProductTable> {
    check_nondegenerate(c)?;
    let dim = c.dim();
    let max_wt = c.max_weight();

    // unknown structure constants: (i, j, k) with matching endpoints and
    // additive weight/degree
    let mut unknown: BTreeMap<(usize, usize, usize), usize> = BTreeMap::new();
    let targets = |i: usize, j: usize| -> Vec<usize> {
        if c.head[i] != c.tail[j] || c.weight(i) + c.weight(j) > max_wt {
            return Vec::new();
        }
        (0..dim)
            .filter(|&k| {
                c.weight(k) == c.weight(i) + c.weight(j)
                    && c.degree(k) == c.degree(i) + c.degree(j)
                    && c.tail[k] == c.tail[i]
                    && c.head[k] == c.head[j]
            })
            .collect()
    };
    for i in 0..dim {
        for j in 0..dim {
            for k in targets(i, j) {
                let next = unknown.len();
                unknown.insert((i, j, k), next);
            }
        }
    }

    let mut system = SparseMat::new(unknown.len());
    let mut rhs: Vec<Rat> = Vec::new();
    let push_eq = |row: SparseVec, b: Rat, system: &mut SparseMat, rhs: &mut Vec<Rat>| {
        system.push_row(row);
        rhs.push(b);
    };

    // local unit equations
    for e in 0..dim {
        if c.weight(e) != 0 {
            continue;
        }
        let v = c.tail[e];
        for x in 0..dim {
            if c.tail[x] == v {
                for k in targets(e, x) {
                    let col = unknown[&(e, x, k)];
                    let b = if k == x { Rat::one() } else { Rat::zero() };
                    push_eq(vec![(col, Rat::one())], b, &mut system, &mut rhs);
                }
            }
            if c.head[x] == v {
                for k in targets(x, e) {
                    let col = unknown[&(x, e, k)];
                    let b = if k == x { Rat::one() } else { Rat::zero() };
                    push_eq(vec![(col, Rat::one())], b, &mut system, &mut rhs);
                }
            }
        }
    }

    // pairing invariance: ⟨x_i•x_j, x_k⟩ − ⟨x_i, x_j•x_k⟩ = 0
    for i in 0..dim {
        for j in 0..dim {
            for k in 0..dim {
                let mut row: BTreeMap<usize, Rat> = BTreeMap::new();
                for l in targets(i, j) {
                    let p = c.pairing_value(l, k);
                    if !p.is_zero() {
                        *row.entry(unknown[&(i, j, l)]).or_insert_with(Rat::zero) += p;
                    }
                }
                for l in targets(j, k) {
                    let p = c.pairing_value(i, l);
                    if !p.is_zero() {
                        *row.entry(unknown[&(j, k, l)]).or_insert_with(Rat::zero) -= p;
                    }
                }
                row.retain(|_, v| !v.is_zero());
                if !row.is_empty() {
                    push_eq(row.into_iter().collect(), Rat::zero(), &mut system, &mut rhs);
                }
            }
        }
    }

    let solution = solve_unique(&system, &rhs).map_err(|e| match e {
        EngineError::Input(msg) => {
            EngineError::Input(format!("induced product is not determined: {}", msg))
        }
        other => other,
    })?;

    let mut entries = vec![vec![Vec::new(); dim]; dim];
    for ((i, j, k), col) in &unknown {
        let v = &solution[*col];
        if !v.is_zero() {
            entries[*i][*j].push((*k, v.clone()));
        }
    }
    let table = ProductTable { dim, entries };

    verify_product(c, &table)?;
    verify_coproduct_compatibility(c)?;
    Ok(table)
}

fn verify_product(c: &CoalgebraPresentation, t: &ProductTable) -> Result<()> {
    let dim = c.dim();
    let single = |i: usize| -> BTreeMap<usize, Rat> { [(i, Rat::one())].into_iter().collect() };
    // local units
    for e in 0..dim {
        if c.weight(e) != 0 {
            continue;
        }
        let v = c.tail[e];
        for x in 0..dim {
            if c.tail[x] == v {
                let prod = t.multiply(&single(e), &single(x));
                if prod != single(x) {
                    return Err(EngineError::Verification(format!(
                        "'{}' is not a left unit on '{}'",
                        c.basis[e].name, c.basis[x].name
                    )));
                }
            }
            if c.head[x] == v {
                let prod = t.multiply(&single(x), &single(e));
                if prod != single(x) {
                    return Err(EngineError::Verification(format!(
                        "'{}' is not a right unit on '{}'",
                        c.basis[e].name, c.basis[x].name
                    )));
                }
            }
        }
    }
    // associativity and pairing invariance on all basis triples
    for i in 0..dim {
        for j in 0..dim {
            let ij = t.multiply(&single(i), &single(j));
            for k in 0..dim {
                let left = t.multiply(&ij, &single(k));
                let right = t.multiply(&single(i), &t.multiply(&single(j), &single(k)));
                if left != right {
                    return Err(EngineError::Verification(format!(
                        "product is not associative on ({}, {}, {})",
                        c.basis[i].name, c.basis[j].name, c.basis[k].name
                    )));
                }
                let mut lhs = Rat::zero();
                for (l, v) in &ij {
                    lhs += v * &c.pairing_value(*l, k);
                }
                let mut rhs = Rat::zero();
                for (l, v) in &t.multiply(&single(j), &single(k)) {
                    rhs += &c.pairing_value(i, *l) * v;
                }
                if lhs != rhs {
                    return Err(EngineError::Verification(format!(
                        "pairing invariance fails on ({}, {}, {})",
                        c.basis[i].name, c.basis[j].name, c.basis[k].name
                    )));
                }
            }
        }
    }
    Ok(())
}

/// The convolution product on the dual, transported back through the pairing.
/// Returns the table m_t with m_t(x, y) expressed on the basis.
///
/// The pairing identifies an element supported between vertices (i, j) with a
/// functional on the block between (j, i), so a naive transport composes
/// paths in the reversed order. To keep left-to-right path composition the
/// second argument's functional is applied to the first coproduct slot:
/// ⟨m_t(x, y), c⟩ = Σ ⟨y, c'⟩⟨x, c''⟩.
fn transport_product(c: &CoalgebraPresentation) -> Result<Vec<Vec<BTreeMap<usize, Rat>>>> {
    let dim = c.dim();
    let p = c.pairing.as_ref().expect("pairing checked before");
    let mut table = vec![vec![BTreeMap::new(); dim]; dim];
    // solve Φ(z) = f for each product functional, where Φ(z) = ⟨z, −⟩
    let mut phi_rows = SparseMat::new(dim);
    for k in 0..dim {
        let row: SparseVec = (0..dim)
            .filter(|&l| !p.entries[l][k].is_zero())
            .map(|l| (l, p.entries[l][k].clone()))
            .collect();
        phi_rows.push_row(row);
    }
    for a in 0..dim {
        for b in 0..dim {
            let mut f = vec![Rat::zero(); dim];
            for k in 0..dim {
                let mut acc = Rat::zero();
                for ((i, j), d) in c.delta(k) {
                    let u = &p.entries[b][*i];
                    let v = &p.entries[a][*j];
                    if !u.is_zero() && !v.is_zero() {
                        acc += u * v * d;
                    }
                }
                f[k] = acc;
            }
            let z = solve_unique(&phi_rows, &f)?;
            let mut out = BTreeMap::new();
            for (l, v) in z.into_iter().enumerate() {
                if !v.is_zero() {
                    out.insert(l, v);
                }
            }
            table[a][b] = out;
        }
    }
    Ok(table)
}

/// Verify Δ(x•y) = x•Δ(y) = Δ(x)•y for the pairing-transported product, where
/// x acts on the first tensor factor and y on the second. No Koszul factors
/// appear: the transport orientation keeps the acting operators in place.
fn verify_coproduct_compatibility(c: &CoalgebraPresentation) -> Result<()> {
    let mt = transport_product(c)?;
    let dim = c.dim();
    for x in 0..dim {
        for y in 0..dim {
            // Δ(m_t(x, y))
            let mut lhs: BTreeMap<(usize, usize), Rat> = BTreeMap::new();
            for (z, v) in &mt[x][y] {
                for ((i, j), d) in c.delta(*z) {
                    *lhs.entry((*i, *j)).or_insert_with(Rat::zero) += v * d;
                }
            }
            lhs.retain(|_, v| !v.is_zero());

            // x • Δ(y): multiply into the first factor
            let mut act_left: BTreeMap<(usize, usize), Rat> = BTreeMap::new();
            for ((yp, ys), d) in c.delta(y) {
                for (z, v) in &mt[x][*yp] {
                    *act_left.entry((*z, *ys)).or_insert_with(Rat::zero) += v * d;
                }
            }
            act_left.retain(|_, v| !v.is_zero());

            // Δ(x) • y: multiply into the second factor
            let mut act_right: BTreeMap<(usize, usize), Rat> = BTreeMap::new();
            for ((xp, xs), d) in c.delta(x) {
                for (z, v) in &mt[*xs][y] {
                    *act_right.entry((*xp, *z)).or_insert_with(Rat::zero) += v * d;
                }
            }
            act_right.retain(|_, v| !v.is_zero());

            if lhs != act_left || lhs != act_right {
                return Err(EngineError::Verification(format!(
                    "coproduct compatibility fails on the pair ({}, {})",
                    c.basis[x].name, c.basis[y].name
                )));
            }
        }
    }
    Ok(())
}

// ---------------------------------------------------------------------------
// document loading
// ---------------------------------------------------------------------------

#[derive(Debug)]
pub enum Presentation {
    Algebra(QuadraticPresentation),
    Coalgebra(CoalgebraPresentation),
    Quiver(QuiverSpec),
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawDoc {
    kind: Option<String>,
    name: Option<String>,
    vertices: Option<Vec<String>>,
    #[serde(default)]
    generators: Vec<RawGenerator>,
    #[serde(default)]
    relations: Vec<RawRelation>,
    #[serde(default)]
    basis: Vec<RawBasis>,
    coproduct: Option<BTreeMap<String, Vec<RawTerm>>>,
    counit: Option<BTreeMap<String, String>>,
    pairing: Option<RawPairing>,
    quiver: Option<RawQuiver>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawGenerator {
    name: String,
    degree: i64,
    tail: Option<String>,
    head: Option<String>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawRelation {
    terms: Vec<RawTerm>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawTerm {
    left: String,
    right: String,
    coeff: String,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawBasis {
    name: String,
    degree: i64,
    weight: u32,
    tail: Option<String>,
    head: Option<String>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawPairing {
    degree: i64,
    entries: Vec<RawPairEntry>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawPairEntry {
    left: String,
    right: String,
    value: String,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawQuiver {
    vertices: Vec<String>,
    arrows: Vec<RawArrow>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawArrow {
    name: String,
    tail: String,
    head: String,
}

fn parse_rat(s: &str) -> Result<Rat> {
    Rat::from_str(s.trim())
        .map_err(|_| EngineError::Input(format!("cannot parse rational '{}'", s)))
}

fn vertex_index(vertices: &[String], name: Option<&str>, what: &str) -> Result<usize> {
    match name {
        None if vertices.len() == 1 => Ok(0),
        None => Err(EngineError::Input(format!(
            "{} needs explicit tail/head vertices when there is more than one vertex",
            what
        ))),
        Some(n) => vertices
            .iter()
            .position(|v| v == n)
            .ok_or_else(|| EngineError::Input(format!("unknown vertex '{}' in {}", n, what))),
    }
}

/// Parse and validate a presentation document.
pub fn load_presentation(text: &str) -> Result<Presentation> {
    let raw: RawDoc =
        toml::from_str(text).map_err(|e| EngineError::Input(format!("parse error: {}", e)))?;
    let name = raw.name.clone().unwrap_or_else(|| "unnamed".into());
    let kind = match (&raw.kind, &raw.quiver, !raw.basis.is_empty(), !raw.generators.is_empty()) {
        (Some(k), _, _, _) => k.clone(),
        (None, Some(_), _, _) => "quiver".into(),
        (None, None, true, _) => "coalgebra".into(),
        (None, None, false, true) => "algebra".into(),
        _ => {
            return Err(EngineError::Input(
                "document declares no quiver, basis, or generators".into(),
            ))
        }
    };
    match kind.as_str() {
        "quiver" => {
            let rq = raw
                .quiver
                .ok_or_else(|| EngineError::Input("kind = \"quiver\" needs a [quiver] table".into()))?;
            let vertices = rq.vertices;
            let mut arrows = Vec::new();
            for a in rq.arrows {
                let t = vertex_index(&vertices, Some(&a.tail), &format!("arrow '{}'", a.name))?;
                let h = vertex_index(&vertices, Some(&a.head), &format!("arrow '{}'", a.name))?;
                arrows.push((a.name, t, h));
            }
            let q = QuiverSpec { name, vertices, arrows };
            q.validate()?;
            Ok(Presentation::Quiver(q))
        }
        "algebra" => {
            let vertices = raw.vertices.unwrap_or_else(|| vec!["*".into()]);
            let mut generators = Vec::new();
            let mut tail = Vec::new();
            let mut head = Vec::new();
            for g in &raw.generators {
                generators.push(GradedSymbol::new(g.name.clone(), g.degree, 1));
                tail.push(vertex_index(
                    &vertices,
                    g.tail.as_deref(),
                    &format!("generator '{}'", g.name),
                )?);
                head.push(vertex_index(
                    &vertices,
                    g.head.as_deref(),
                    &format!("generator '{}'", g.name),
                )?);
            }
            let find = |n: &str| -> Result<usize> {
                generators
                    .iter()
                    .position(|g: &GradedSymbol| g.name == n)
                    .ok_or_else(|| EngineError::Input(format!("unknown generator '{}'", n)))
            };
            let mut relations = Vec::new();
            for rel in &raw.relations {
                let mut terms = Vec::new();
                for t in &rel.terms {
                    terms.push(((find(&t.left)?, find(&t.right)?), parse_rat(&t.coeff)?));
                }
                relations.push(terms);
            }
            let p = QuadraticPresentation {
                name,
                vertices,
                generators,
                tail,
                head,
                relations,
            };
            p.validate()?;
            Ok(Presentation::Algebra(p))
        }
        "coalgebra" => {
            let vertices = raw.vertices.unwrap_or_else(|| vec!["*".into()]);
            let mut basis = Vec::new();
            let mut tail = Vec::new();
            let mut head = Vec::new();
            for b in &raw.basis {
                basis.push(GradedSymbol::new(b.name.clone(), b.degree, b.weight));
                tail.push(vertex_index(
                    &vertices,
                    b.tail.as_deref(),
                    &format!("basis element '{}'", b.name),
                )?);
                head.push(vertex_index(
                    &vertices,
                    b.head.as_deref(),
                    &format!("basis element '{}'", b.name),
                )?);
            }
            let find = |n: &str| -> Result<usize> {
                basis
                    .iter()
                    .position(|g: &GradedSymbol| g.name == n)
                    .ok_or_else(|| EngineError::Input(format!("unknown basis element '{}'", n)))
            };
            let dim = basis.len();
            let mut coproduct = vec![Vec::new(); dim];
            for (key, terms) in raw.coproduct.unwrap_or_default() {
                let k = find(&key)?;
                let mut list = Vec::new();
                for t in &terms {
                    list.push(((find(&t.left)?, find(&t.right)?), parse_rat(&t.coeff)?));
                }
                list.sort_by_key(|(ij, _)| *ij);
                coproduct[k] = list;
            }
            let mut counit = vec![Rat::zero(); dim];
            for (key, val) in raw.counit.unwrap_or_default() {
                counit[find(&key)?] = parse_rat(&val)?;
            }
            let pairing = match raw.pairing {
                None => None,
                Some(rp) => {
                    let mut entries = vec![vec![Rat::zero(); dim]; dim];
                    for e in &rp.entries {
                        entries[find(&e.left)?][find(&e.right)?] = parse_rat(&e.value)?;
                    }
                    Some(PairingTable { degree: rp.degree, entries })
                }
            };
            let c = CoalgebraPresentation {
                name,
                vertices,
                basis,
                tail,
                head,
                coproduct,
                counit,
                pairing,
            };
            c.validate()?;
            Ok(Presentation::Coalgebra(c))
        }
        other => Err(EngineError::Input(format!("unknown kind '{}'", other))),
    }
}

// ---------------------------------------------------------------------------
// built-in presentations used by tests and the command line
// ---------------------------------------------------------------------------

/// k[x]: one degree-0 generator, no relations.
pub fn preset_poly1() -> QuadraticPresentation {
    QuadraticPresentation {
        name: "poly1".into(),
        vertices: vec!["*".into()],
        generators: vec![GradedSymbol::new("x", 0, 1)],
        tail: vec![0],
        head: vec![0],
        relations: Vec::new(),
    }
}

/// k[x,y]: two degree-0 generators, one commutation relation.
pub fn preset_poly2() -> QuadraticPresentation {
    QuadraticPresentation {
        name: "poly2".into(),
        vertices: vec!["*".into()],
        generators: vec![GradedSymbol::new("x", 0, 1), GradedSymbol::new("y", 0, 1)],
        tail: vec![0, 0],
        head: vec![0, 0],
        relations: vec![vec![((0, 1), Rat::one()), ((1, 0), -Rat::one())]],
    }
}

/// The dual numbers k[x]/(x²), quadratic with the single relation x⊗x.
pub fn preset_dual_numbers() -> QuadraticPresentation {
    QuadraticPresentation {
        name: "dual-numbers".into(),
        vertices: vec!["*".into()],
        generators: vec![GradedSymbol::new("x", 0, 1)],
        tail: vec![0],
        head: vec![0],
        relations: vec![vec![((0, 0), Rat::one())]],
    }
}

/// One vertex with a single loop.
pub fn preset_jordan_quiver() -> QuiverSpec {
    QuiverSpec {
        name: "jordan".into(),
        vertices: vec!["v".into()],
        arrows: vec![("a".into(), 0, 0)],
    }
}

/// Two vertices joined by two parallel arrows.
pub fn preset_kronecker_quiver() -> QuiverSpec {
    QuiverSpec {
        name: "kronecker".into(),
        vertices: vec!["1".into(), "2".into()],
        arrows: vec![("a".into(), 0, 1), ("b".into(), 0, 1)],
    }
}

/// The two-vertex path quiver (type A₂, rejected by the preprojective
/// pipeline).
pub fn preset_a2_quiver() -> QuiverSpec {
    QuiverSpec {
        name: "a2".into(),
        vertices: vec!["1".into(), "2".into()],
        arrows: vec![("a".into(), 0, 1)],
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scalar::rat_int;

    #[test]
    fn load_algebra_document() {
        let text = r#"
            kind = "algebra"
            name = "poly2"

            [[generators]]
            name = "x"
            degree = 0

            [[generators]]
            name = "y"
            degree = 0

            [[relations]]
            terms = [
                { left = "x", right = "y", coeff = "1" },
                { left = "y", right = "x", coeff = "-1" },
            ]
        "#;
        match load_presentation(text).unwrap() {
            Presentation::Algebra(p) => {
                assert_eq!(p.dim(), 2);
                assert_eq!(p.relations.len(), 1);
            }
            _ => panic!("expected an algebra"),
        }
    }

    #[test]
    fn load_quiver_document() {
        let text = r#"
            name = "jordan"
            [quiver]
            vertices = ["v"]
            arrows = [ { name = "a", tail = "v", head = "v" } ]
        "#;
        match load_presentation(text).unwrap() {
            Presentation::Quiver(q) => {
                assert_eq!(q.vertices.len(), 1);
                assert_eq!(q.arrows.len(), 1);
            }
            _ => panic!("expected a quiver"),
        }
    }

    #[test]
    fn broken_coassociativity_is_reported_with_the_element_name() {
        // drop one term from the degree-2 coproduct: coassociativity breaks on o
        let text = r#"
            kind = "coalgebra"
            name = "broken"

            [[basis]]
            name = "e"
            degree = 0
            weight = 0

            [[basis]]
            name = "a"
            degree = 1
            weight = 1

            [[basis]]
            name = "o"
            degree = 2
            weight = 2

            [coproduct]
            e = [ { left = "e", right = "e", coeff = "1" } ]
            a = [
                { left = "e", right = "a", coeff = "1" },
                { left = "a", right = "e", coeff = "1" },
            ]
            o = [
                { left = "o", right = "e", coeff = "1" },
                { left = "a", right = "a", coeff = "1" },
            ]

            [counit]
            e = "1"
        "#;
        let err = load_presentation(text).unwrap_err();
        let msg = err.to_string();
        assert!(msg.contains("counit") || msg.contains("coassociativity"), "{}", msg);
        assert!(msg.contains("'o'"), "{}", msg);
    }

    #[test]
    fn duplicate_relations_are_rejected() {
        let mut p = preset_poly2();
        p.relations.push(p.relations[0].clone());
        assert!(p.validate().is_err());
    }

    #[test]
    fn jordan_preprojective_tables() {
        let (alg, co) = preprojective_from_quiver(&preset_jordan_quiver()).unwrap();
        assert_eq!(alg.dim(), 2);
        assert_eq!(alg.relations.len(), 1);
        // basis e, a, a*, o with the four-term degree-2 coproduct
        assert_eq!(co.dim(), 4);
        let e = co.find("e").unwrap();
        let a = co.find("a").unwrap();
        let astar = co.find("a*").unwrap();
        let o = co.find("o").unwrap();
        let expected = vec![
            ((o, e), rat_int(1)),
            ((a, astar), rat_int(1)),
            ((astar, a), rat_int(-1)),
            ((e, o), rat_int(1)),
        ];
        assert_eq!(co.delta(o), &expected[..]);
        let p = co.pairing.as_ref().unwrap();
        assert_eq!(p.degree, 2);
        assert_eq!(p.entries[a][astar], rat_int(1));
        assert_eq!(p.entries[astar][a], rat_int(-1));
        assert_eq!(p.entries[e][o], rat_int(1));
    }

    #[test]
    fn kronecker_component_sizes() {
        let (_, co) = preprojective_from_quiver(&preset_kronecker_quiver()).unwrap();
        let by_weight = |w: u32| co.basis.iter().filter(|b| b.weight == w).count();
        assert_eq!(by_weight(0), 2);
        assert_eq!(by_weight(1), 4);
        assert_eq!(by_weight(2), 2);
        assert_eq!(co.dim(), 8);
    }

    #[test]
    fn dynkin_quivers_are_rejected() {
        assert!(matches!(
            preprojective_from_quiver(&preset_a2_quiver()),
            Err(EngineError::Dynkin(_))
        ));
        // D4: star with three length-1 branches
        let d4 = QuiverSpec {
            name: "d4".into(),
            vertices: vec!["c".into(), "1".into(), "2".into(), "3".into()],
            arrows: vec![
                ("a".into(), 0, 1),
                ("b".into(), 0, 2),
                ("c".into(), 0, 3),
            ],
        };
        assert!(d4.has_dynkin_component());
        // a 5-cycle is affine-like, not Dynkin
        let cycle = QuiverSpec {
            name: "c5".into(),
            vertices: (0..5).map(|i| i.to_string()).collect(),
            arrows: (0..5).map(|i| (format!("a{}", i), i, (i + 1) % 5)).collect(),
        };
        assert!(!cycle.has_dynkin_component());
        assert!(preprojective_from_quiver(&cycle).is_ok());
        // loops and parallel edges are never Dynkin
        assert!(!preset_jordan_quiver().has_dynkin_component());
        assert!(!preset_kronecker_quiver().has_dynkin_component());
    }

    #[test]
    fn jordan_induced_product() {
        let (_, co) = preprojective_from_quiver(&preset_jordan_quiver()).unwrap();
        let t = induced_product(&co).unwrap();
        let e = co.find("e").unwrap();
        let a = co.find("a").unwrap();
        let astar = co.find("a*").unwrap();
        let o = co.find("o").unwrap();
        for x in 0..co.dim() {
            assert_eq!(t.value(e, x), &[(x, rat_int(1))][..], "e is a left unit");
            assert_eq!(t.value(x, e), &[(x, rat_int(1))][..], "e is a right unit");
        }
        assert!(t.value(a, a).is_empty());
        assert!(t.value(astar, astar).is_empty());
        assert_eq!(t.value(a, astar), &[(o, rat_int(1))][..]);
        assert_eq!(t.value(astar, a), &[(o, rat_int(-1))][..]);
        assert!(t.value(o, o).is_empty());
    }

    #[test]
    fn kronecker_induced_product() {
        let (_, co) = preprojective_from_quiver(&preset_kronecker_quiver()).unwrap();
        let t = induced_product(&co).unwrap();
        let a = co.find("a").unwrap();
        let astar = co.find("a*").unwrap();
        let bstar = co.find("b*").unwrap();
        let o1 = co.find("o_1").unwrap();
        // a composes with b* but the product vanishes; a•a* is the circle
        assert!(t.value(a, bstar).is_empty());
        assert_eq!(t.value(a, astar), &[(o1, rat_int(1))][..]);
    }

    #[test]
    fn degenerate_pairing_is_rejected() {
        let (_, mut co) = preprojective_from_quiver(&preset_jordan_quiver()).unwrap();
        let e = co.find("e").unwrap();
        let o = co.find("o").unwrap();
        let p = co.pairing.as_mut().unwrap();
        p.entries[e][o] = Rat::zero();
        p.entries[o][e] = Rat::zero();
        assert!(matches!(
            induced_product(&co),
            Err(EngineError::DegeneratePairing(_))
        ));
    }

    #[test]
    fn loaded_coalgebra_with_pairing_validates() {
        // a grouplike plus one degree-2 primitive, paired in degree 2
        let text = r#"
            kind = "coalgebra"
            name = "primitive-pair"

            [[basis]]
            name = "1"
            degree = 0
            weight = 0

            [[basis]]
            name = "sx"
            degree = 2
            weight = 1

            [coproduct]
            1 = [ { left = "1", right = "1", coeff = "1" } ]
            sx = [
                { left = "1", right = "sx", coeff = "1" },
                { left = "sx", right = "1", coeff = "1" },
            ]

            [counit]
            1 = "1"

            [pairing]
            degree = 2
            entries = [
                { left = "1", right = "sx", value = "1" },
                { left = "sx", right = "1", value = "1" },
            ]
        "#;
        match load_presentation(text).unwrap() {
            Presentation::Coalgebra(c) => {
                let t = induced_product(&c).unwrap();
                let one = c.find("1").unwrap();
                let sx = c.find("sx").unwrap();
                assert_eq!(t.value(one, sx), &[(sx, rat_int(1))][..]);
                assert!(t.value(sx, sx).is_empty());
            }
            _ => panic!("expected a coalgebra"),
        }
    }
}
