//! Finite element sets with a multiplication oracle: enumeration of the
//! rank-bounded symmetric inverse semigroup, multiplication-closed closures
//! of generating sets, and rank stratification.

use std::collections::{HashMap, HashSet};
use std::fmt;
use std::hash::Hash;

use itertools::Itertools;
use thiserror::Error;

use crate::par;
use crate::pinj::PartialInjection;

/// A finite semigroup given by a total multiplication on its element type.
pub trait Semigroup: Send + Sync {
    type Elem: Clone + Eq + Ord + Hash + Send + Sync + fmt::Display + fmt::Debug;

    fn multiply(&self, a: &Self::Elem, b: &Self::Elem) -> Self::Elem;
}

/// Elements with a rank, used for stratification and rank ideal series.
pub trait Ranked {
    fn rank_of(&self) -> usize;
}

impl Ranked for PartialInjection {
    fn rank_of(&self) -> usize {
        self.rank()
    }
}

/// The symmetric inverse semigroup on `{0, …, m−1}` as a multiplication
/// oracle; `a·b : x ↦ a(b(x))`.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct InjSemigroup {
    pub ground_size: u32,
}

impl Semigroup for InjSemigroup {
    type Elem = PartialInjection;

    fn multiply(&self, a: &PartialInjection, b: &PartialInjection) -> PartialInjection {
        a.compose(b).expect("elements of one set share the ground size")
    }
}

/// A finite semigroup presented by an explicit multiplication table over
/// elements `0..n`. Handy for small hand-built test semigroups.
#[derive(Clone, Debug)]
pub struct TableSemigroup {
    table: Vec<Vec<usize>>,
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum TableError {
    #[error("table row {0} has length {1}, expected {2}")]
    NotSquare(usize, usize, usize),
    #[error("table entry ({0},{1}) = {2} out of range")]
    OutOfRange(usize, usize, usize),
    #[error("multiplication not associative at ({0},{1},{2})")]
    NotAssociative(usize, usize, usize),
}

impl TableSemigroup {
    pub fn new(table: Vec<Vec<usize>>) -> Result<Self, TableError> {
        let n = table.len();
        for (i, row) in table.iter().enumerate() {
            if row.len() != n {
                return Err(TableError::NotSquare(i, row.len(), n));
            }
            for (j, &v) in row.iter().enumerate() {
                if v >= n {
                    return Err(TableError::OutOfRange(i, j, v));
                }
            }
        }
        for a in 0..n {
            for b in 0..n {
                for c in 0..n {
                    if table[table[a][b]][c] != table[a][table[b][c]] {
                        return Err(TableError::NotAssociative(a, b, c));
                    }
                }
            }
        }
        Ok(TableSemigroup { table })
    }

    pub fn len(&self) -> usize {
        self.table.len()
    }

    pub fn is_empty(&self) -> bool {
        self.table.is_empty()
    }

    /// The element set `0..n` over this table.
    pub fn into_element_set(self, label: impl Into<String>) -> ElementSet<TableSemigroup> {
        let elements = (0..self.len()).collect();
        ElementSet::new_unchecked(self, elements, label.into())
    }
}

impl Semigroup for TableSemigroup {
    type Elem = usize;

    fn multiply(&self, a: &usize, b: &usize) -> usize {
        self.table[*a][*b]
    }
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum ElementSetError {
    #[error("duplicate element {0}")]
    Duplicate(String),
    #[error("not closed under multiplication: {a} · {b} = {product} is not in the set")]
    NotClosed { a: String, b: String, product: String },
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum EnumerationError {
    #[error("max rank {rank} exceeds ground size {ground}")]
    InvalidRank { ground: u32, rank: u32 },
    #[error("element budget exceeded: needs {required} elements, budget is {budget}")]
    BudgetExceeded { required: u128, budget: usize },
}

/// Default cap on enumerated or closed element sets.
pub const DEFAULT_ELEMENT_BUDGET: usize = 10_000_000;

/// An enumerated, deduplicated, deterministically ordered collection of
/// semigroup elements, closed under the semigroup's multiplication.
pub struct ElementSet<S: Semigroup> {
    sg: S,
    elements: Vec<S::Elem>,
    index: HashMap<S::Elem, usize>,
    label: String,
}

impl<S: Semigroup> ElementSet<S> {
    /// Builds a set from explicit elements, checking for duplicates and for
    /// closure under multiplication.
    pub fn from_elements(
        sg: S,
        elements: Vec<S::Elem>,
        label: impl Into<String>,
    ) -> Result<Self, ElementSetError> {
        let mut index = HashMap::with_capacity(elements.len());
        for (i, e) in elements.iter().enumerate() {
            if index.insert(e.clone(), i).is_some() {
                return Err(ElementSetError::Duplicate(e.to_string()));
            }
        }
        let set = ElementSet { sg, elements, index, label: label.into() };
        let n = set.len();
        let violation = par::find_map_first_indexed(n * n, |k| {
            let (i, j) = (k / n, k % n);
            let p = set.sg.multiply(&set.elements[i], &set.elements[j]);
            if set.index.contains_key(&p) {
                None
            } else {
                Some(ElementSetError::NotClosed {
                    a: set.elements[i].to_string(),
                    b: set.elements[j].to_string(),
                    product: p.to_string(),
                })
            }
        });
        match violation {
            Some(e) => Err(e),
            None => Ok(set),
        }
    }

    /// Constructor for enumerations whose closure is structural (rank ideals,
    /// cartesian products, fixpoint closures).
    pub(crate) fn new_unchecked(sg: S, elements: Vec<S::Elem>, label: String) -> Self {
        let index: HashMap<S::Elem, usize> =
            elements.iter().enumerate().map(|(i, e)| (e.clone(), i)).collect();
        debug_assert_eq!(index.len(), elements.len(), "duplicate elements");
        ElementSet { sg, elements, index, label }
    }

    pub fn len(&self) -> usize {
        self.elements.len()
    }

    pub fn is_empty(&self) -> bool {
        self.elements.is_empty()
    }

    pub fn label(&self) -> &str {
        &self.label
    }

    pub fn semigroup(&self) -> &S {
        &self.sg
    }

    pub fn elements(&self) -> &[S::Elem] {
        &self.elements
    }

    pub fn get(&self, i: usize) -> &S::Elem {
        &self.elements[i]
    }

    pub fn position(&self, e: &S::Elem) -> Option<usize> {
        self.index.get(e).copied()
    }

    pub fn multiply(&self, a: &S::Elem, b: &S::Elem) -> S::Elem {
        self.sg.multiply(a, b)
    }

    /// Product by element indices; the result index exists by closure.
    pub fn multiply_idx(&self, i: usize, j: usize) -> usize {
        let p = self.sg.multiply(&self.elements[i], &self.elements[j]);
        match self.index.get(&p) {
            Some(&k) => k,
            None => panic!(
                "`{}` broke closure: {} · {} = {} missing",
                self.label, self.elements[i], self.elements[j], p
            ),
        }
    }

    /// Least `y` with `x·y·x = x`, if any.
    pub fn regular_witness(&self, x: usize) -> Option<usize> {
        let xe = &self.elements[x];
        (0..self.len()).find(|&y| {
            let xy = self.sg.multiply(xe, &self.elements[y]);
            self.sg.multiply(&xy, xe) == *xe
        })
    }
}

/// `Σ_{k≤n} C(m,k)² k!`, the cardinality of the rank-`≤ n` ideal of the
/// symmetric inverse semigroup on `m` points. `None` on u128 overflow.
pub fn inverse_semigroup_cardinality(m: u32, n: u32) -> Option<u128> {
    let mut total: u128 = 0;
    for k in 0..=n.min(m) {
        let c = binomial(m as u128, k as u128)?;
        let f = factorial_u128(k as u128)?;
        total = total.checked_add(c.checked_mul(c)?.checked_mul(f)?)?;
    }
    Some(total)
}

fn binomial(m: u128, k: u128) -> Option<u128> {
    if k > m {
        return Some(0);
    }
    let mut acc: u128 = 1;
    for i in 0..k {
        acc = acc.checked_mul(m - i)?;
        acc /= i + 1;
    }
    Some(acc)
}

fn factorial_u128(k: u128) -> Option<u128> {
    let mut acc: u128 = 1;
    for i in 2..=k {
        acc = acc.checked_mul(i)?;
    }
    Some(acc)
}

/// Enumerates every partial injection on `{0, …, m−1}` of rank at most `n`,
/// ordered by rank, then lexicographically by sorted domain, then by the
/// corresponding targets.
pub fn enumerate_inverse_semigroup(
    m: u32,
    n: u32,
) -> Result<ElementSet<InjSemigroup>, EnumerationError> {
    enumerate_inverse_semigroup_bounded(m, n, DEFAULT_ELEMENT_BUDGET)
}

pub fn enumerate_inverse_semigroup_bounded(
    m: u32,
    n: u32,
    budget: usize,
) -> Result<ElementSet<InjSemigroup>, EnumerationError> {
    if n > m {
        return Err(EnumerationError::InvalidRank { ground: m, rank: n });
    }
    let required = inverse_semigroup_cardinality(m, n)
        .ok_or(EnumerationError::BudgetExceeded { required: u128::MAX, budget })?;
    if required > budget as u128 {
        return Err(EnumerationError::BudgetExceeded { required, budget });
    }
    let mut elements = Vec::with_capacity(required as usize);
    visit_injections(m, n, |a| elements.push(a));
    Ok(ElementSet::new_unchecked(
        InjSemigroup { ground_size: m },
        elements,
        format!("I_{m}^{n}"),
    ))
}

/// Streams every partial injection of rank `≤ n` on `{0, …, m−1}` in
/// canonical order without materializing the set.
pub fn visit_injections(m: u32, n: u32, mut f: impl FnMut(PartialInjection)) {
    let ground: Vec<u32> = (0..m).collect();
    for k in 0..=n.min(m) as usize {
        for dom in ground.iter().copied().combinations(k) {
            visit_injections_with_domain(m, &dom, &mut f);
        }
    }
}

/// Streams every partial injection on `{0, …, m−1}` with the given sorted
/// domain, targets in lexicographic order.
pub fn visit_injections_with_domain(m: u32, dom: &[u32], f: &mut impl FnMut(PartialInjection)) {
    for tgt in (0..m).permutations(dom.len()) {
        let a = PartialInjection::from_pairs(m, dom.iter().copied().zip(tgt))
            .expect("generated pairs are injective and in range");
        f(a);
    }
}

/// All sorted domains of size `≤ n` in `{0, …, m−1}`, in enumeration order.
/// Useful for fanning a streamed enumeration out over worker tasks.
pub fn injection_domains(m: u32, n: u32) -> Vec<Vec<u32>> {
    let ground: Vec<u32> = (0..m).collect();
    (0..=n.min(m) as usize)
        .flat_map(|k| ground.iter().copied().combinations(k))
        .collect()
}

/// A rank stratum: the members of an element set with one fixed rank.
#[derive(Clone, Debug)]
pub struct RankStratum {
    pub rank: usize,
    pub members: Vec<usize>,
}

/// Partitions a set of ranked elements into strata by rank, ascending,
/// skipping empty ranks.
pub fn stratify_by_rank<S>(set: &ElementSet<S>) -> Vec<RankStratum>
where
    S: Semigroup,
    S::Elem: Ranked,
{
    let mut by_rank: Vec<(usize, Vec<usize>)> = Vec::new();
    for (i, e) in set.elements().iter().enumerate() {
        let r = e.rank_of();
        match by_rank.binary_search_by_key(&r, |&(rank, _)| rank) {
            Ok(pos) => by_rank[pos].1.push(i),
            Err(pos) => by_rank.insert(pos, (r, vec![i])),
        }
    }
    by_rank
        .into_iter()
        .map(|(rank, members)| RankStratum { rank, members })
        .collect()
}

/// Least multiplication-closed superset of the generators: breadth-first
/// layers, each layer sorted in canonical element order.
pub fn closure_of<S: Semigroup>(
    sg: S,
    generators: impl IntoIterator<Item = S::Elem>,
    budget: usize,
) -> Result<ElementSet<S>, EnumerationError> {
    let mut elements: Vec<S::Elem> = Vec::new();
    let mut seen: HashSet<S::Elem> = HashSet::new();
    for g in generators {
        if seen.insert(g.clone()) {
            elements.push(g);
        }
    }
    let generator_count = elements.len();
    let mut frontier_start = 0;
    while frontier_start < elements.len() {
        let frontier_end = elements.len();
        let mut fresh: Vec<S::Elem> = Vec::new();
        for i in 0..frontier_end {
            for j in 0..frontier_end {
                // only pairs touching the frontier produce unseen products
                if i < frontier_start && j < frontier_start {
                    continue;
                }
                let p = sg.multiply(&elements[i], &elements[j]);
                if seen.insert(p.clone()) {
                    fresh.push(p);
                }
            }
        }
        fresh.sort_unstable();
        if elements.len() + fresh.len() > budget {
            return Err(EnumerationError::BudgetExceeded {
                required: (elements.len() + fresh.len()) as u128,
                budget,
            });
        }
        frontier_start = frontier_end;
        elements.extend(fresh);
    }
    Ok(ElementSet::new_unchecked(
        sg,
        elements,
        format!("closure({generator_count} generators)"),
    ))
}
