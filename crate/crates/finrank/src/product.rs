//! Closure constructions for ideal series: coordinatewise products and
//! pullbacks along finite-fiber surjective homomorphisms.

use std::fmt;
use std::sync::Arc;

use serde::Serialize;
use thiserror::Error;

use crate::ideal::{verify_ideal_series, IdealSeries, SeriesError};
use crate::par;
use crate::semigroup::{ElementSet, Semigroup};

/// An element of a direct product, multiplied coordinatewise.
#[derive(Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Debug)]
pub struct ProductElem<A, B>(pub A, pub B);

impl<A: fmt::Display, B: fmt::Display> fmt::Display for ProductElem<A, B> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({}, {})", self.0, self.1)
    }
}

/// The direct product of two semigroups.
#[derive(Clone, Debug)]
pub struct ProductSemigroup<A: Semigroup, B: Semigroup> {
    pub left: A,
    pub right: B,
}

impl<A: Semigroup, B: Semigroup> Semigroup for ProductSemigroup<A, B>
where
    A: Clone,
    B: Clone,
{
    type Elem = ProductElem<A::Elem, B::Elem>;

    fn multiply(&self, a: &Self::Elem, b: &Self::Elem) -> Self::Elem {
        ProductElem(
            self.left.multiply(&a.0, &b.0),
            self.right.multiply(&a.1, &b.1),
        )
    }
}

/// Cartesian product of two element sets, ordered lexicographically by the
/// factors' element orders.
pub fn product_set<A, B>(
    left: &Arc<ElementSet<A>>,
    right: &Arc<ElementSet<B>>,
) -> Arc<ElementSet<ProductSemigroup<A, B>>>
where
    A: Semigroup + Clone,
    B: Semigroup + Clone,
{
    let sg = ProductSemigroup {
        left: left.semigroup().clone(),
        right: right.semigroup().clone(),
    };
    let mut elements = Vec::with_capacity(left.len() * right.len());
    for a in left.elements() {
        for b in right.elements() {
            elements.push(ProductElem(a.clone(), b.clone()));
        }
    }
    let label = format!("{} x {}", left.label(), right.label());
    Arc::new(ElementSet::new_unchecked(sg, elements, label))
}

/// The product of two verified ideal series over `S` and `T`: the chain
/// `K_i = I_i × J_0` for `0 ≤ i ≤ m` followed by `K_{m+i} = S × J_i` for
/// `1 ≤ i ≤ n`, over `S × T`.
pub fn product_series<A, B>(
    left: &IdealSeries<A>,
    right: &IdealSeries<B>,
) -> Result<IdealSeries<ProductSemigroup<A, B>>, SeriesError>
where
    A: Semigroup + Clone,
    B: Semigroup + Clone,
{
    require_verified(left)?;
    require_verified(right)?;
    let set = product_set(left.ambient(), right.ambient());
    let nb = right.ambient().len();
    let mut levels = Vec::new();
    for i in 0..left.num_levels() {
        let la = left.level_mask(i);
        let j0 = right.level_mask(0);
        levels.push(product_mask(la, j0, nb));
    }
    for j in 1..right.num_levels() {
        let all_left = vec![true; left.ambient().len()];
        levels.push(product_mask(&all_left, right.level_mask(j), nb));
    }
    let label = format!("product series over {}", set.label());
    Ok(IdealSeries::from_masks(set, levels, label))
}

fn product_mask(left: &[bool], right: &[bool], nb: usize) -> Vec<bool> {
    let mut mask = vec![false; left.len() * nb];
    for (ia, &la) in left.iter().enumerate() {
        if !la {
            continue;
        }
        for (ib, &rb) in right.iter().enumerate() {
            if rb {
                mask[ia * nb + ib] = true;
            }
        }
    }
    mask
}

fn require_verified<S: Semigroup>(series: &IdealSeries<S>) -> Result<(), SeriesError> {
    let report = verify_ideal_series(series);
    if report.pass {
        Ok(())
    } else {
        let level = report
            .levels
            .iter()
            .find(|l| !l.is_ideal || !l.includes_previous)
            .map(|l| l.level)
            .unwrap_or(series.num_levels());
        Err(SeriesError::InvalidSeries { level })
    }
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum HomomorphismError {
    #[error("image of {0} is not in the target set")]
    ImageNotInTarget(String),
    #[error("not multiplicative: h({a}·{b}) = {lhs} but h({a})·h({b}) = {rhs}")]
    NotMultiplicative { a: String, b: String, lhs: String, rhs: String },
    #[error("not surjective: target element {0} has empty fiber")]
    NotSurjective(String),
}

/// A total multiplicative surjection between two element sets, checked
/// exhaustively on construction.
pub struct Homomorphism<A: Semigroup, B: Semigroup> {
    source: Arc<ElementSet<A>>,
    target: Arc<ElementSet<B>>,
    map: Vec<usize>,
}

impl<A: Semigroup, B: Semigroup> Homomorphism<A, B> {
    pub fn new(
        source: Arc<ElementSet<A>>,
        target: Arc<ElementSet<B>>,
        f: impl Fn(&A::Elem) -> B::Elem,
    ) -> Result<Self, HomomorphismError> {
        let map = source
            .elements()
            .iter()
            .map(|a| {
                target
                    .position(&f(a))
                    .ok_or_else(|| HomomorphismError::ImageNotInTarget(a.to_string()))
            })
            .collect::<Result<Vec<usize>, _>>()?;
        let n = source.len();
        let violation = par::find_map_first_indexed(n * n, |k| {
            let (i, j) = (k / n, k % n);
            let lhs = map[source.multiply_idx(i, j)];
            let rhs = target.multiply_idx(map[i], map[j]);
            if lhs == rhs {
                None
            } else {
                Some(HomomorphismError::NotMultiplicative {
                    a: source.get(i).to_string(),
                    b: source.get(j).to_string(),
                    lhs: target.get(lhs).to_string(),
                    rhs: target.get(rhs).to_string(),
                })
            }
        });
        if let Some(e) = violation {
            return Err(e);
        }
        let mut hit = vec![false; target.len()];
        for &t in &map {
            hit[t] = true;
        }
        if let Some(missing) = hit.iter().position(|&h| !h) {
            return Err(HomomorphismError::NotSurjective(
                target.get(missing).to_string(),
            ));
        }
        Ok(Homomorphism { source, target, map })
    }

    pub fn source(&self) -> &Arc<ElementSet<A>> {
        &self.source
    }

    pub fn target(&self) -> &Arc<ElementSet<B>> {
        &self.target
    }

    /// Image of the source element at index `i`, as a target index.
    pub fn image_idx(&self, i: usize) -> usize {
        self.map[i]
    }

    pub fn apply(&self, a: &A::Elem) -> Option<&B::Elem> {
        self.source.position(a).map(|i| self.target.get(self.map[i]))
    }
}

/// The pullback `h⁻¹(I_0) ⊆ … ⊆ h⁻¹(I_m)` of an ideal series on the target
/// along a homomorphism.
pub fn pullback_series<A, B>(
    h: &Homomorphism<A, B>,
    series: &IdealSeries<B>,
) -> Result<IdealSeries<A>, SeriesError>
where
    A: Semigroup,
    B: Semigroup,
{
    require_verified(series)?;
    let levels = (0..series.num_levels())
        .map(|k| {
            let target_mask = series.level_mask(k);
            (0..h.source.len())
                .map(|i| target_mask[h.map[i]])
                .collect::<Vec<bool>>()
        })
        .collect();
    let label = format!("pullback of {} to {}", series.label(), h.source.label());
    Ok(IdealSeries::from_masks(Arc::clone(&h.source), levels, label))
}

/// Fiber cardinalities `|h⁻¹(t)|`, indexed like the target's elements.
pub fn fiber_sizes<A, B>(h: &Homomorphism<A, B>) -> Vec<usize>
where
    A: Semigroup,
    B: Semigroup,
{
    let mut sizes = vec![0usize; h.target.len()];
    for &t in &h.map {
        sizes[t] += 1;
    }
    sizes
}

/// Rendered fiber table for reports.
#[derive(Debug, Clone, Serialize)]
pub struct FiberEntry {
    pub target: String,
    pub size: usize,
}

pub fn fiber_table<A, B>(h: &Homomorphism<A, B>) -> Vec<FiberEntry>
where
    A: Semigroup,
    B: Semigroup,
{
    fiber_sizes(h)
        .into_iter()
        .enumerate()
        .map(|(t, size)| FiberEntry { target: h.target.get(t).to_string(), size })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ideal::{inj_rank_series, tightness_report};
    use crate::semigroup::{enumerate_inverse_semigroup, InjSemigroup};

    fn rank_series_of(m: u32, n: u32) -> IdealSeries<InjSemigroup> {
        let set = Arc::new(enumerate_inverse_semigroup(m, n).unwrap());
        inj_rank_series(set)
    }

    #[test]
    fn product_of_two_rank_series_verifies() {
        // I_2^1 × I_2^1: 25 product elements, 3-level chain
        let left = rank_series_of(2, 1);
        let right = rank_series_of(2, 1);
        let product = product_series(&left, &right).unwrap();
        assert_eq!(product.ambient().len(), 25);
        assert_eq!(product.num_levels(), 3);
        let report = verify_ideal_series(&product);
        assert!(report.pass, "{report:?}");
        let sizes: Vec<usize> = report.levels.iter().map(|l| l.size).collect();
        assert_eq!(sizes, vec![1, 5, 25]); // {0}×{0}, I_2^1×{0}, I_2^1×I_2^1
        // maxima are finite and reportable at every level
        let tightness = tightness_report(&product).unwrap();
        assert_eq!(tightness.levels.len(), 2);
    }

    #[test]
    fn degenerate_single_level_factor() {
        let left = rank_series_of(2, 1);
        let trivial_set = Arc::new(enumerate_inverse_semigroup(1, 0).unwrap());
        let trivial = IdealSeries::new(trivial_set, vec![vec![0]], "single level");
        let product = product_series(&left, &trivial).unwrap();
        assert_eq!(product.num_levels(), 2);
        assert!(verify_ideal_series(&product).pass);
    }

    #[test]
    fn mixed_scale_product_verifies() {
        let left = rank_series_of(3, 1);
        let right = rank_series_of(2, 2);
        let product = product_series(&left, &right).unwrap();
        assert_eq!(product.num_levels(), 4);
        assert!(verify_ideal_series(&product).pass);
    }

    #[test]
    fn product_rejects_invalid_inputs() {
        let set = Arc::new(enumerate_inverse_semigroup(2, 1).unwrap());
        let id1 = crate::pinj::PartialInjection::from_pairs(2, [(1, 1)]).unwrap();
        let idx = set.position(&id1).unwrap();
        let all = (0..set.len()).collect();
        let bad = IdealSeries::new(set, vec![vec![idx], all], "bad");
        let good = rank_series_of(2, 1);
        assert!(matches!(
            product_series(&bad, &good),
            Err(SeriesError::InvalidSeries { level: 0 })
        ));
    }

    #[test]
    fn identity_homomorphism_pullback_is_identity() {
        let series = rank_series_of(2, 1);
        let set = Arc::clone(series.ambient());
        let h = Homomorphism::new(Arc::clone(&set), set, |a| a.clone()).unwrap();
        assert!(fiber_sizes(&h).iter().all(|&s| s == 1));
        let pulled = pullback_series(&h, &series).unwrap();
        assert!(verify_ideal_series(&pulled).pass);
        for k in 0..series.num_levels() {
            assert_eq!(pulled.level_indices(k), series.level_indices(k));
        }
    }

    #[test]
    fn projection_collapses_and_pulls_back() {
        // left projection from I_2^1 × I_2^1; fibers all have size 5
        let left = rank_series_of(2, 1);
        let right = rank_series_of(2, 1);
        let prod = product_set(left.ambient(), right.ambient());
        let h = Homomorphism::new(
            Arc::clone(&prod),
            Arc::clone(left.ambient()),
            |p: &ProductElem<_, _>| p.0.clone(),
        )
        .unwrap();
        let sizes = fiber_sizes(&h);
        assert!(sizes.iter().all(|&s| s == 5));
        assert_eq!(sizes.iter().sum::<usize>(), prod.len());
        let pulled = pullback_series(&h, &left).unwrap();
        assert!(verify_ideal_series(&pulled).pass);
    }

    #[test]
    fn non_multiplicative_map_is_rejected() {
        let set = Arc::new(enumerate_inverse_semigroup(2, 1).unwrap());
        // swap 0 and id{0}: breaks multiplicativity
        let zero = crate::pinj::PartialInjection::empty(2);
        let id0 = crate::pinj::PartialInjection::from_pairs(2, [(0, 0)]).unwrap();
        let result = Homomorphism::new(Arc::clone(&set), Arc::clone(&set), |a| {
            if *a == zero {
                id0.clone()
            } else if *a == id0 {
                zero.clone()
            } else {
                a.clone()
            }
        });
        assert!(matches!(result, Err(HomomorphismError::NotMultiplicative { .. })));
    }

    #[test]
    fn fiber_partition_property() {
        let left = rank_series_of(2, 2);
        let right = rank_series_of(2, 1);
        let prod = product_set(left.ambient(), right.ambient());
        let h = Homomorphism::new(
            Arc::clone(&prod),
            Arc::clone(right.ambient()),
            |p: &ProductElem<_, _>| p.1.clone(),
        )
        .unwrap();
        assert_eq!(fiber_sizes(&h).iter().sum::<usize>(), prod.len());
    }
}
