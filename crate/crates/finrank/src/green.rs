//! Green's relations on finite element sets, the egg-box summary, and the
//! constructive factorization `c = s·a·t` inside a regular D-class.

use serde::Serialize;
use thiserror::Error;

use crate::par;
use crate::semigroup::{ElementSet, Semigroup};

/// Partitions of an element set into L-, R-, H- and D-classes, with
/// per-element regularity flags. Class ids are assigned in element order,
/// so the whole structure is deterministic.
#[derive(Debug, Clone)]
pub struct GreenStructure {
    pub l_class: Vec<usize>,
    pub r_class: Vec<usize>,
    pub h_class: Vec<usize>,
    pub d_class: Vec<usize>,
    pub l_members: Vec<Vec<usize>>,
    pub r_members: Vec<Vec<usize>>,
    pub h_members: Vec<Vec<usize>>,
    pub d_members: Vec<Vec<usize>>,
    pub regular: Vec<bool>,
    /// A D-class is regular iff it contains a regular element.
    pub d_regular: Vec<bool>,
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum GreenError {
    #[error("element set of size {size} exceeds the budget of {budget} elements")]
    BudgetExceeded { size: usize, budget: usize },
}

/// Default cap on the size of sets fed to the quadratic sweeps.
pub const DEFAULT_GREEN_BUDGET: usize = 20_000;

pub fn compute_green<S: Semigroup>(set: &ElementSet<S>) -> Result<GreenStructure, GreenError> {
    compute_green_bounded(set, DEFAULT_GREEN_BUDGET)
}

pub fn compute_green_bounded<S: Semigroup>(
    set: &ElementSet<S>,
    budget: usize,
) -> Result<GreenStructure, GreenError> {
    let n = set.len();
    if n > budget {
        return Err(GreenError::BudgetExceeded { size: n, budget });
    }

    // principal ideals: S¹x = {x} ∪ Sx, xS¹ = {x} ∪ xS, as bitmasks
    let words = n.div_ceil(64);
    let left_ideals = par::map_indexed(n, |x| {
        let mut mask = vec![0u64; words];
        set_bit(&mut mask, x);
        for u in 0..n {
            set_bit(&mut mask, set.multiply_idx(u, x));
        }
        mask
    });
    let right_ideals = par::map_indexed(n, |x| {
        let mut mask = vec![0u64; words];
        set_bit(&mut mask, x);
        for u in 0..n {
            set_bit(&mut mask, set.multiply_idx(x, u));
        }
        mask
    });

    let l_class = classify_by_key(&left_ideals);
    let r_class = classify_by_key(&right_ideals);
    let h_keys: Vec<(usize, usize)> =
        (0..n).map(|i| (l_class[i], r_class[i])).collect();
    let h_class = classify_by_key(&h_keys);

    // D = join of L and R: connected components when each L- and R-class
    // is collapsed
    let mut dsu = DisjointSets::new(n);
    for members in class_members(&l_class).iter().chain(class_members(&r_class).iter()) {
        for w in members.windows(2) {
            dsu.union(w[0], w[1]);
        }
    }
    let mut d_class = vec![usize::MAX; n];
    let mut next = 0;
    for i in 0..n {
        let root = dsu.find(i);
        if d_class[root] == usize::MAX {
            d_class[root] = next;
            next += 1;
        }
        d_class[i] = d_class[root];
    }

    let regular = par::map_indexed(n, |x| set.regular_witness(x).is_some());
    let d_members = class_members(&d_class);
    let d_regular = d_members
        .iter()
        .map(|members| members.iter().any(|&i| regular[i]))
        .collect();

    Ok(GreenStructure {
        l_members: class_members(&l_class),
        r_members: class_members(&r_class),
        h_members: class_members(&h_class),
        d_members,
        l_class,
        r_class,
        h_class,
        d_class,
        regular,
        d_regular,
    })
}

fn set_bit(mask: &mut [u64], i: usize) {
    mask[i / 64] |= 1 << (i % 64);
}

/// Assigns class ids by equal key, ids in first-occurrence order.
fn classify_by_key<K: Eq + std::hash::Hash>(keys: &[K]) -> Vec<usize> {
    let mut ids = std::collections::HashMap::new();
    keys.iter()
        .map(|k| {
            let next = ids.len();
            *ids.entry(k).or_insert(next)
        })
        .collect()
}

fn class_members(class_of: &[usize]) -> Vec<Vec<usize>> {
    let count = class_of.iter().copied().max().map_or(0, |m| m + 1);
    let mut members = vec![Vec::new(); count];
    for (i, &c) in class_of.iter().enumerate() {
        members[c].push(i);
    }
    members
}

struct DisjointSets {
    parent: Vec<usize>,
}

impl DisjointSets {
    fn new(n: usize) -> Self {
        DisjointSets { parent: (0..n).collect() }
    }

    fn find(&mut self, mut x: usize) -> usize {
        while self.parent[x] != x {
            self.parent[x] = self.parent[self.parent[x]];
            x = self.parent[x];
        }
        x
    }

    fn union(&mut self, a: usize, b: usize) {
        let (ra, rb) = (self.find(a), self.find(b));
        if ra != rb {
            // smaller root wins so representatives are stable
            let (lo, hi) = if ra < rb { (ra, rb) } else { (rb, ra) };
            self.parent[hi] = lo;
        }
    }
}

/// Checks `L∘R = R∘L` as relations, and that both agree with D.
pub fn relational_compositions_agree(g: &GreenStructure) -> bool {
    let n = g.l_class.len();
    let num_l = g.l_members.len();
    let num_r = g.r_members.len();
    let mut occupied = vec![false; num_l * num_r];
    for i in 0..n {
        occupied[g.l_class[i] * num_r + g.r_class[i]] = true;
    }
    for x in 0..n {
        for y in 0..n {
            let l_then_r = occupied[g.l_class[x] * num_r + g.r_class[y]];
            let r_then_l = occupied[g.l_class[y] * num_r + g.r_class[x]];
            let same_d = g.d_class[x] == g.d_class[y];
            if l_then_r != r_then_l || l_then_r != same_d {
                return false;
            }
        }
    }
    true
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum FactorizeError {
    #[error("elements {a} and {c} lie in different D-classes")]
    DifferentDClasses { a: String, c: String },
    #[error("the D-class of {0} is not regular")]
    NotRegularClass(String),
    #[error("element {0} is not in the set")]
    UnknownElement(String),
}

/// Factors `c = s·a·t` with `s, t` in the common regular D-class of `a`
/// and `c`, following the constructive recipe: pick `b` with `a R b` and
/// `b L c`, an idempotent `e` in the R-class of `a`, `u` with `a·u = e`
/// (then `a·u·b = e·b = b`), and symmetrically on the left. All free
/// choices take the least candidate in canonical element order.
pub fn d_class_factorize<S: Semigroup>(
    set: &ElementSet<S>,
    green: &GreenStructure,
    a: &S::Elem,
    c: &S::Elem,
) -> Result<(S::Elem, S::Elem), FactorizeError> {
    let a_idx = set
        .position(a)
        .ok_or_else(|| FactorizeError::UnknownElement(a.to_string()))?;
    let c_idx = set
        .position(c)
        .ok_or_else(|| FactorizeError::UnknownElement(c.to_string()))?;
    let d = green.d_class[a_idx];
    if green.d_class[c_idx] != d {
        return Err(FactorizeError::DifferentDClasses {
            a: a.to_string(),
            c: c.to_string(),
        });
    }
    if !green.d_regular[d] {
        return Err(FactorizeError::NotRegularClass(a.to_string()));
    }

    // b ∈ D with a R b and b L c; exists since D = R∘L
    let b_idx = green.d_members[d]
        .iter()
        .copied()
        .find(|&b| green.r_class[b] == green.r_class[a_idx] && green.l_class[b] == green.l_class[c_idx])
        .expect("D = R∘L on a finite semigroup");

    // idempotent e in the R-class of a, and u with a·u = e
    let (e_idx, u_idx) = green.r_members[green.r_class[a_idx]]
        .iter()
        .copied()
        .filter(|&e| set.multiply_idx(e, e) == e)
        .find_map(|e| {
            (0..set.len())
                .find(|&u| set.multiply_idx(a_idx, u) == e)
                .map(|u| (e, u))
        })
        .expect("every R-class of a regular D-class contains an idempotent");
    debug_assert_eq!(set.multiply_idx(e_idx, b_idx), b_idx, "e is a left identity on its R-class");
    let t_idx = set.multiply_idx(u_idx, b_idx);

    // mirror image: idempotent f in the L-class of b (= L-class of c),
    // v with v·b = f, and s = c·v
    let (f_idx, v_idx) = green.l_members[green.l_class[b_idx]]
        .iter()
        .copied()
        .filter(|&f| set.multiply_idx(f, f) == f)
        .find_map(|f| {
            (0..set.len())
                .find(|&v| set.multiply_idx(v, b_idx) == f)
                .map(|v| (f, v))
        })
        .expect("every L-class of a regular D-class contains an idempotent");
    debug_assert_eq!(set.multiply_idx(c_idx, f_idx), c_idx, "f is a right identity on its L-class");
    let s_idx = set.multiply_idx(c_idx, v_idx);

    let sat = set.multiply_idx(set.multiply_idx(s_idx, a_idx), t_idx);
    debug_assert_eq!(sat, c_idx, "factorization postcondition");
    debug_assert_eq!(green.d_class[s_idx], d);
    debug_assert_eq!(green.d_class[t_idx], d);
    Ok((set.get(s_idx).clone(), set.get(t_idx).clone()))
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum InverseError {
    #[error("element {0} is not regular in the set")]
    NotRegular(String),
    #[error("element {0} is not in the set")]
    UnknownElement(String),
}

/// An inverse of `x`: with `y` the least witness of `x·y·x = x`, returns
/// `x' = y·x·y`, which satisfies both inverse identities.
pub fn find_inverse<S: Semigroup>(
    set: &ElementSet<S>,
    x: &S::Elem,
) -> Result<S::Elem, InverseError> {
    let x_idx = set
        .position(x)
        .ok_or_else(|| InverseError::UnknownElement(x.to_string()))?;
    let y = set
        .regular_witness(x_idx)
        .ok_or_else(|| InverseError::NotRegular(x.to_string()))?;
    let yx = set.multiply_idx(y, x_idx);
    let prime = set.multiply_idx(yx, y);
    debug_assert_eq!(set.multiply_idx(set.multiply_idx(x_idx, prime), x_idx), x_idx);
    debug_assert_eq!(set.multiply_idx(set.multiply_idx(prime, x_idx), prime), prime);
    Ok(set.get(prime).clone())
}

/// One row of the egg-box summary.
#[derive(Debug, Clone, Serialize)]
pub struct DClassSummary {
    pub d_class: usize,
    pub size: usize,
    pub num_l_classes: usize,
    pub num_r_classes: usize,
    pub h_class_size: usize,
    pub regular: bool,
    pub representative: String,
}

pub fn egg_box_summary<S: Semigroup>(
    set: &ElementSet<S>,
    g: &GreenStructure,
) -> Vec<DClassSummary> {
    g.d_members
        .iter()
        .enumerate()
        .map(|(d, members)| {
            let mut ls: Vec<usize> = members.iter().map(|&i| g.l_class[i]).collect();
            ls.sort_unstable();
            ls.dedup();
            let mut rs: Vec<usize> = members.iter().map(|&i| g.r_class[i]).collect();
            rs.sort_unstable();
            rs.dedup();
            let h_sizes: Vec<usize> = members
                .iter()
                .map(|&i| g.h_members[g.h_class[i]].len())
                .collect();
            debug_assert!(h_sizes.windows(2).all(|w| w[0] == w[1]));
            DClassSummary {
                d_class: d,
                size: members.len(),
                num_l_classes: ls.len(),
                num_r_classes: rs.len(),
                h_class_size: h_sizes.first().copied().unwrap_or(0),
                regular: g.d_regular[d],
                representative: set.get(members[0]).to_string(),
            }
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::pinj::PartialInjection;
    use crate::semigroup::{enumerate_inverse_semigroup, TableSemigroup};

    fn pinj(m: u32, pairs: &[(u32, u32)]) -> PartialInjection {
        PartialInjection::from_pairs(m, pairs.iter().copied()).unwrap()
    }

    #[test]
    fn green_classes_on_inverse_semigroup_match_domains_and_ranges() {
        for (m, n) in [(2u32, 2u32), (3, 2), (4, 2), (4, 4)] {
            let set = enumerate_inverse_semigroup(m, n).unwrap();
            let g = compute_green(&set).unwrap();
            for x in 0..set.len() {
                for y in 0..set.len() {
                    let (ex, ey) = (set.get(x), set.get(y));
                    assert_eq!(
                        g.l_class[x] == g.l_class[y],
                        ex.range() == ey.range(),
                        "L ⇔ same range failed at {ex} {ey}"
                    );
                    assert_eq!(
                        g.r_class[x] == g.r_class[y],
                        ex.domain() == ey.domain(),
                        "R ⇔ same domain failed at {ex} {ey}"
                    );
                    assert_eq!(
                        g.d_class[x] == g.d_class[y],
                        ex.rank() == ey.rank(),
                        "D ⇔ same rank failed at {ex} {ey}"
                    );
                }
            }
        }
    }

    #[test]
    fn h_class_sizes_are_factorials() {
        let set = enumerate_inverse_semigroup(4, 3).unwrap();
        let g = compute_green(&set).unwrap();
        for (h, members) in g.h_members.iter().enumerate() {
            let rank = set.get(members[0]).rank();
            let expected: usize = (2..=rank).product();
            assert_eq!(members.len(), expected.max(1), "H-class {h}");
        }
    }

    #[test]
    fn two_element_semilattice_has_singleton_d_classes() {
        // {0, e} with e·e = e and all other products 0
        let sg = TableSemigroup::new(vec![vec![0, 0], vec![0, 1]]).unwrap();
        let set = sg.into_element_set("semilattice {0,e}");
        let g = compute_green(&set).unwrap();
        assert_eq!(g.d_members.len(), 2);
        assert!(g.d_members.iter().all(|m| m.len() == 1));
    }

    #[test]
    fn relational_compositions_agree_on_test_semigroups() {
        for (m, n) in [(3u32, 3u32), (4, 2)] {
            let set = enumerate_inverse_semigroup(m, n).unwrap();
            let g = compute_green(&set).unwrap();
            assert!(relational_compositions_agree(&g));
        }
    }

    #[test]
    fn factorize_within_rank_one_d_class() {
        let set = enumerate_inverse_semigroup(3, 3).unwrap();
        let g = compute_green(&set).unwrap();
        let a = pinj(3, &[(0, 0)]);
        let c = pinj(3, &[(1, 2)]);
        let (s, t) = d_class_factorize(&set, &g, &a, &c).unwrap();
        let sat = s.compose(&a).unwrap().compose(&t).unwrap();
        assert_eq!(sat, c);
        assert_eq!(s.rank(), 1);
        assert_eq!(t.rank(), 1);
    }

    #[test]
    fn factorize_element_through_itself() {
        let set = enumerate_inverse_semigroup(3, 2).unwrap();
        let g = compute_green(&set).unwrap();
        let a = pinj(3, &[(0, 1), (2, 0)]);
        let (s, t) = d_class_factorize(&set, &g, &a, &a).unwrap();
        assert_eq!(s.compose(&a).unwrap().compose(&t).unwrap(), a);
    }

    #[test]
    fn factorize_rejects_cross_class_pairs() {
        let set = enumerate_inverse_semigroup(3, 2).unwrap();
        let g = compute_green(&set).unwrap();
        let a = pinj(3, &[(0, 0)]);
        let c = pinj(3, &[(0, 1), (1, 2)]);
        assert!(matches!(
            d_class_factorize(&set, &g, &a, &c),
            Err(FactorizeError::DifferentDClasses { .. })
        ));
    }

    #[test]
    fn find_inverse_matches_unique_inverse_in_inverse_semigroup() {
        let set = enumerate_inverse_semigroup(3, 2).unwrap();
        for x in set.elements() {
            let found = find_inverse(&set, x).unwrap();
            assert_eq!(found, x.invert(), "unique inverse of {x}");
        }
    }

    #[test]
    fn idempotents_are_their_own_inverse() {
        let set = enumerate_inverse_semigroup(2, 2).unwrap();
        let e = pinj(2, &[(1, 1)]);
        assert_eq!(find_inverse(&set, &e).unwrap(), e);
    }

    #[test]
    fn inverses_stay_in_their_d_class() {
        let set = enumerate_inverse_semigroup(4, 3).unwrap();
        let g = compute_green(&set).unwrap();
        for (i, x) in set.elements().iter().enumerate() {
            let inv = find_inverse(&set, x).unwrap();
            let j = set.position(&inv).unwrap();
            assert_eq!(g.d_class[i], g.d_class[j]);
        }
    }

    #[test]
    fn non_regular_element_is_reported() {
        let sg = TableSemigroup::new(vec![vec![0, 0], vec![0, 0]]).unwrap();
        let set = sg.into_element_set("null pair");
        assert!(matches!(
            find_inverse(&set, &1),
            Err(InverseError::NotRegular(_))
        ));
    }

    #[test]
    fn budget_is_enforced() {
        let set = enumerate_inverse_semigroup(3, 1).unwrap();
        assert!(matches!(
            compute_green_bounded(&set, 5),
            Err(GreenError::BudgetExceeded { size: 10, budget: 5 })
        ));
    }

    #[test]
    fn regular_d_classes_are_all_or_nothing() {
        for (m, n) in [(3u32, 3u32), (4, 2)] {
            let set = enumerate_inverse_semigroup(m, n).unwrap();
            let g = compute_green(&set).unwrap();
            for (d, members) in g.d_members.iter().enumerate() {
                let flags: Vec<bool> = members.iter().map(|&i| g.regular[i]).collect();
                assert!(flags.iter().all(|&f| f == g.d_regular[d]));
            }
        }
    }
}
