//! Ideal series over finite element sets, with the exact finite certificate
//! for stratum unstability: for an element `a` of a stratum `D`, the
//! stabilizer count `|{b ∈ D : a·b ∈ D and b·a ∈ D}|` compared against a
//! factorial bound. On the top rank stratum of the symmetric inverse
//! semigroup the count is exactly `n!` — the bijections from `ran(a)` onto
//! `dom(a)`.

use std::sync::Arc;

use serde::Serialize;
use thiserror::Error;

use crate::par;
use crate::semigroup::{stratify_by_rank, ElementSet, RankStratum, Ranked, Semigroup};

pub(crate) fn factorial(n: usize) -> u64 {
    (2..=n as u64).product()
}

/// A chain of subsets `I_0 ⊆ I_1 ⊆ … ⊆ I_m` of an ambient element set,
/// intended to be a chain of ideals with `I_m` the whole set. The chain
/// properties are not enforced on construction; `verify_ideal_series`
/// reports on them.
pub struct IdealSeries<S: Semigroup> {
    ambient: Arc<ElementSet<S>>,
    levels: Vec<Vec<bool>>,
    level_bounds: Vec<Option<u64>>,
    label: String,
}

impl<S: Semigroup> IdealSeries<S> {
    /// Builds a series from explicit index sets, one per level.
    pub fn new(
        ambient: Arc<ElementSet<S>>,
        level_indices: Vec<Vec<usize>>,
        label: impl Into<String>,
    ) -> Self {
        let n = ambient.len();
        let levels = level_indices
            .into_iter()
            .map(|idxs| {
                let mut mask = vec![false; n];
                for i in idxs {
                    mask[i] = true;
                }
                mask
            })
            .collect::<Vec<_>>();
        let level_bounds = vec![None; levels.len()];
        IdealSeries { ambient, levels, level_bounds, label: label.into() }
    }

    pub(crate) fn from_masks(
        ambient: Arc<ElementSet<S>>,
        levels: Vec<Vec<bool>>,
        label: impl Into<String>,
    ) -> Self {
        let level_bounds = vec![None; levels.len()];
        IdealSeries { ambient, levels, level_bounds, label: label.into() }
    }

    /// The rank series `I_k = { a : rank(a) ≤ k }`, one level per rank from
    /// 0 to the maximum present.
    pub fn rank_series(ambient: Arc<ElementSet<S>>) -> Self
    where
        S::Elem: Ranked,
    {
        let max_rank =
            ambient.elements().iter().map(Ranked::rank_of).max().unwrap_or(0);
        let levels = (0..=max_rank)
            .map(|k| {
                ambient
                    .elements()
                    .iter()
                    .map(|e| e.rank_of() <= k)
                    .collect::<Vec<bool>>()
            })
            .collect::<Vec<_>>();
        let label = format!("rank series of {}", ambient.label());
        let level_bounds = vec![None; levels.len()];
        IdealSeries { ambient, levels, level_bounds, label }
    }

    /// Attaches the factorial stabilizer bound `k!` to level `k`. Meaningful
    /// for rank series of the symmetric inverse semigroup, where the bound
    /// is attained exactly.
    pub fn with_factorial_bounds(mut self) -> Self {
        self.level_bounds = (0..self.levels.len())
            .map(|k| if k == 0 { None } else { Some(factorial(k)) })
            .collect();
        self
    }

    pub fn ambient(&self) -> &Arc<ElementSet<S>> {
        &self.ambient
    }

    pub fn label(&self) -> &str {
        &self.label
    }

    pub fn num_levels(&self) -> usize {
        self.levels.len()
    }

    pub fn level_mask(&self, k: usize) -> &[bool] {
        &self.levels[k]
    }

    pub fn level_indices(&self, k: usize) -> Vec<usize> {
        mask_indices(&self.levels[k])
    }

    pub fn level_bound(&self, k: usize) -> Option<u64> {
        self.level_bounds.get(k).copied().flatten()
    }

    /// The difference stratum `D_k = I_k ∖ I_{k−1}` (`D_0 = I_0`).
    pub fn difference_stratum(&self, k: usize) -> Vec<usize> {
        let mask = &self.levels[k];
        (0..mask.len())
            .filter(|&i| mask[i] && (k == 0 || !self.levels[k - 1][i]))
            .collect()
    }
}

fn mask_indices(mask: &[bool]) -> Vec<usize> {
    (0..mask.len()).filter(|&i| mask[i]).collect()
}

/// One offending product found while checking that a level is an ideal.
#[derive(Debug, Clone, Serialize, PartialEq, Eq)]
pub struct IdealViolation {
    /// The ambient element multiplied in.
    pub outer: String,
    /// The level member.
    pub member: String,
    /// The escaping product.
    pub product: String,
    /// `"outer-first"` for `s·x`, `"member-first"` for `x·s`.
    pub side: String,
}

#[derive(Debug, Clone, Serialize)]
pub struct LevelCheck {
    pub level: usize,
    pub size: usize,
    pub is_ideal: bool,
    pub includes_previous: bool,
    pub violation: Option<IdealViolation>,
}

#[derive(Debug, Clone, Serialize)]
pub struct SeriesReport {
    pub label: String,
    pub levels: Vec<LevelCheck>,
    /// Whether the last level is the whole ambient set.
    pub top_is_ambient: bool,
    pub pass: bool,
}

/// Checks every level of the series: ideal property against the full
/// ambient set and inclusion in the next level. Failures are report
/// entries with witnesses, not errors.
pub fn verify_ideal_series<S: Semigroup>(series: &IdealSeries<S>) -> SeriesReport {
    let set = series.ambient();
    let n = set.len();
    let mut levels = Vec::with_capacity(series.num_levels());
    for k in 0..series.num_levels() {
        let mask = series.level_mask(k);
        let members = mask_indices(mask);
        let includes_previous = k == 0
            || series.level_mask(k - 1)
                .iter()
                .zip(mask.iter())
                .all(|(&prev, &cur)| !prev || cur);
        let violation = par::find_map_first_indexed(members.len(), |mi| {
            let x = members[mi];
            for s in 0..n {
                let sx = set.multiply_idx(s, x);
                if !mask[sx] {
                    return Some(IdealViolation {
                        outer: set.get(s).to_string(),
                        member: set.get(x).to_string(),
                        product: set.get(sx).to_string(),
                        side: "outer-first".to_string(),
                    });
                }
                let xs = set.multiply_idx(x, s);
                if !mask[xs] {
                    return Some(IdealViolation {
                        outer: set.get(s).to_string(),
                        member: set.get(x).to_string(),
                        product: set.get(xs).to_string(),
                        side: "member-first".to_string(),
                    });
                }
            }
            None
        });
        levels.push(LevelCheck {
            level: k,
            size: members.len(),
            is_ideal: violation.is_none(),
            includes_previous,
            violation,
        });
    }
    let top_is_ambient = series
        .levels
        .last()
        .map(|mask| mask.iter().all(|&b| b))
        .unwrap_or(false);
    let pass = top_is_ambient
        && levels.iter().all(|l| l.is_ideal && l.includes_previous);
    SeriesReport { label: series.label().to_string(), levels, top_is_ambient, pass }
}

/// The finite certificate for one element of a stratum.
#[derive(Debug, Clone, Serialize)]
pub struct UnstabilityCertificate {
    pub element: String,
    pub stratum_rank: usize,
    /// `|{b ∈ D : a·b ∈ D and b·a ∈ D}|`, by exhaustive scan.
    pub stabilizer_count: usize,
    /// The factorial bound for the stratum's rank.
    pub bound: u64,
    /// Indices (into the ambient set) of the stabilizing elements.
    #[serde(skip)]
    pub stabilizers: Vec<usize>,
}

impl UnstabilityCertificate {
    pub fn is_valid(&self) -> bool {
        self.stabilizer_count as u64 <= self.bound
    }
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum CertificateError {
    #[error("element {0} is not a member of the stratum")]
    NotInStratum(String),
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum SeriesError {
    #[error("series failed verification at level {level}")]
    InvalidSeries { level: usize },
}

/// Exhaustively counts the stratum elements `b` with both `a·b` and `b·a`
/// still in the stratum, against the `rank!` bound.
pub fn unstability_certificate<S: Semigroup>(
    set: &ElementSet<S>,
    stratum: &RankStratum,
    a: &S::Elem,
) -> Result<UnstabilityCertificate, CertificateError> {
    let a_idx = set
        .position(a)
        .filter(|i| stratum.members.contains(i))
        .ok_or_else(|| CertificateError::NotInStratum(a.to_string()))?;
    let mask = stratum_mask(set.len(), stratum);
    let flags = par::map_indexed(stratum.members.len(), |mi| {
        let b = stratum.members[mi];
        mask[set.multiply_idx(a_idx, b)] && mask[set.multiply_idx(b, a_idx)]
    });
    let stabilizers: Vec<usize> = stratum
        .members
        .iter()
        .zip(flags.iter())
        .filter(|(_, &keep)| keep)
        .map(|(&b, _)| b)
        .collect();
    Ok(UnstabilityCertificate {
        element: a.to_string(),
        stratum_rank: stratum.rank,
        stabilizer_count: stabilizers.len(),
        bound: factorial(stratum.rank),
        stabilizers,
    })
}

/// True iff some product of `a` with a member of `B` (either order) escapes
/// the stratum. Guaranteed whenever `|B|` exceeds the factorial bound.
pub fn check_unstable_witness<S: Semigroup>(
    set: &ElementSet<S>,
    stratum: &RankStratum,
    a: &S::Elem,
    witnesses: &[S::Elem],
) -> Result<bool, CertificateError> {
    let mask = stratum_mask(set.len(), stratum);
    let a_idx = set
        .position(a)
        .filter(|&i| mask[i])
        .ok_or_else(|| CertificateError::NotInStratum(a.to_string()))?;
    let mut escaped = false;
    for b in witnesses {
        let b_idx = set
            .position(b)
            .filter(|&i| mask[i])
            .ok_or_else(|| CertificateError::NotInStratum(b.to_string()))?;
        if !mask[set.multiply_idx(a_idx, b_idx)] || !mask[set.multiply_idx(b_idx, a_idx)] {
            escaped = true;
        }
    }
    Ok(escaped)
}

fn stratum_mask(len: usize, stratum: &RankStratum) -> Vec<bool> {
    let mut mask = vec![false; len];
    for &i in &stratum.members {
        mask[i] = true;
    }
    mask
}

#[derive(Debug, Clone, Serialize)]
pub struct LevelTightness {
    pub level: usize,
    pub stratum_size: usize,
    /// Exhaustive maximum of the stabilizer count over the stratum.
    pub max_stabilizer_count: usize,
    /// Expected bound, when the series carries one (`k!` for rank series).
    pub bound: Option<u64>,
    pub matches_bound: Option<bool>,
    /// Element attaining the maximum, first in canonical order.
    pub max_witness: Option<String>,
}

#[derive(Debug, Clone, Serialize)]
pub struct TightnessReport {
    pub label: String,
    pub base_level_size: usize,
    pub levels: Vec<LevelTightness>,
    /// `Some(true)` when every level's maximum equals its bound; `None`
    /// when the series carries no bounds (descriptive report only).
    pub finitely_tight: Option<bool>,
    pub note: &'static str,
}

pub const TIGHTNESS_NOTE: &str = "finite-scale certificate: per-level maxima of \
stabilizer counts over each difference stratum, compared against the factorial \
bound where one applies; the defining unstability property quantifies over \
infinite subsets and is replaced here by this exact finite count";

/// Per-level maxima of stabilizer counts over the difference strata
/// `D_k = I_k ∖ I_{k−1}`. Requires the series to verify first.
pub fn tightness_report<S: Semigroup>(
    series: &IdealSeries<S>,
) -> Result<TightnessReport, SeriesError> {
    let verification = verify_ideal_series(series);
    if !verification.pass {
        let level = verification
            .levels
            .iter()
            .find(|l| !l.is_ideal || !l.includes_previous)
            .map(|l| l.level)
            .unwrap_or(series.num_levels());
        return Err(SeriesError::InvalidSeries { level });
    }
    let set = series.ambient();
    let mut levels = Vec::new();
    for k in 1..series.num_levels() {
        let stratum = series.difference_stratum(k);
        let mut mask = vec![false; set.len()];
        for &i in &stratum {
            mask[i] = true;
        }
        let counts = par::map_indexed(stratum.len(), |ai| {
            let a = stratum[ai];
            stratum
                .iter()
                .filter(|&&b| {
                    mask[set.multiply_idx(a, b)] && mask[set.multiply_idx(b, a)]
                })
                .count()
        });
        let best = counts
            .iter()
            .enumerate()
            .max_by(|(i, a), (j, b)| a.cmp(b).then(j.cmp(i)))
            .map(|(i, &c)| (i, c));
        let (max_witness, max_stabilizer_count) = match best {
            Some((i, c)) => (Some(set.get(stratum[i]).to_string()), c),
            None => (None, 0),
        };
        let bound = series.level_bound(k);
        let matches_bound = bound.map(|b| max_stabilizer_count as u64 == b);
        levels.push(LevelTightness {
            level: k,
            stratum_size: stratum.len(),
            max_stabilizer_count,
            bound,
            matches_bound,
            max_witness,
        });
    }
    let has_bounds = levels.iter().any(|l| l.bound.is_some());
    let finitely_tight = if has_bounds {
        Some(levels.iter().all(|l| l.matches_bound != Some(false)))
    } else {
        None
    };
    Ok(TightnessReport {
        label: series.label().to_string(),
        base_level_size: series.level_indices(0).len(),
        levels,
        finitely_tight,
        note: TIGHTNESS_NOTE,
    })
}

/// Rank series of the inverse semigroup with factorial bounds, the standard
/// instance used throughout.
pub fn inj_rank_series(
    set: Arc<ElementSet<crate::semigroup::InjSemigroup>>,
) -> IdealSeries<crate::semigroup::InjSemigroup> {
    IdealSeries::rank_series(set).with_factorial_bounds()
}

/// Convenience for certificate scans: the top stratum of a ranked set.
pub fn top_stratum<S>(set: &ElementSet<S>) -> Option<RankStratum>
where
    S: Semigroup,
    S::Elem: Ranked,
{
    stratify_by_rank(set).into_iter().last()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::pinj::PartialInjection;
    use crate::semigroup::{enumerate_inverse_semigroup, InjSemigroup};

    fn pinj(m: u32, pairs: &[(u32, u32)]) -> PartialInjection {
        PartialInjection::from_pairs(m, pairs.iter().copied()).unwrap()
    }

    fn rank_series_of(m: u32, n: u32) -> IdealSeries<InjSemigroup> {
        let set = Arc::new(enumerate_inverse_semigroup(m, n).unwrap());
        inj_rank_series(set)
    }

    #[test]
    fn rank_series_verifies() {
        let report = verify_ideal_series(&rank_series_of(3, 2));
        assert!(report.pass, "{report:?}");
        assert_eq!(report.levels.len(), 3);
    }

    #[test]
    fn non_ideal_level_is_reported_with_witness() {
        // I_1 = {id{1}} is not an ideal inside I_2^1: (1↦0)·id{1} = (1↦0) ∉ I_1
        let set = Arc::new(enumerate_inverse_semigroup(2, 1).unwrap());
        let id1 = pinj(2, &[(1, 1)]);
        let id1_idx = set.position(&id1).unwrap();
        let all = (0..set.len()).collect();
        let series = IdealSeries::new(set, vec![vec![id1_idx], all], "bad chain");
        let report = verify_ideal_series(&series);
        assert!(!report.pass);
        assert!(!report.levels[0].is_ideal);
        let v = report.levels[0].violation.as_ref().unwrap();
        assert_eq!(v.member, "[1->1]");
    }

    #[test]
    fn single_level_trivial_series_passes() {
        let set = Arc::new(enumerate_inverse_semigroup(1, 0).unwrap());
        let series = IdealSeries::new(set, vec![vec![0]], "trivial");
        assert!(verify_ideal_series(&series).pass);
    }

    #[test]
    fn stabilizer_count_is_factorial_with_structural_set() {
        // m=4, n=2: scan of all 72 rank-2 elements gives exactly 2 = 2!
        let set = enumerate_inverse_semigroup(4, 2).unwrap();
        let top = top_stratum(&set).unwrap();
        assert_eq!(top.rank, 2);
        let a = pinj(4, &[(0, 2), (1, 3)]);
        let cert = unstability_certificate(&set, &top, &a).unwrap();
        assert_eq!(cert.stabilizer_count, 2);
        assert_eq!(cert.bound, 2);
        assert!(cert.is_valid());
        // the stabilizers are exactly the bijections ran(a) → dom(a)
        for &b in &cert.stabilizers {
            let b = set.get(b);
            assert_eq!(b.domain(), a.range());
            assert_eq!(b.range(), a.domain());
        }
    }

    #[test]
    fn rank_one_stabilizer_is_unique() {
        // m=3, n=1, a=(1↦2): only b=(2↦1) keeps both products at rank 1
        let set = enumerate_inverse_semigroup(3, 1).unwrap();
        let top = top_stratum(&set).unwrap();
        let a = pinj(3, &[(1, 2)]);
        let cert = unstability_certificate(&set, &top, &a).unwrap();
        assert_eq!(cert.stabilizer_count, 1);
        assert_eq!(set.get(cert.stabilizers[0]), &pinj(3, &[(2, 1)]));
    }

    #[test]
    fn rank_three_stabilizer_count_is_six_for_every_element() {
        let set = enumerate_inverse_semigroup(5, 3).unwrap();
        let top = top_stratum(&set).unwrap();
        for &i in top.members.iter().step_by(37) {
            let cert = unstability_certificate(&set, &top, set.get(i)).unwrap();
            assert_eq!(cert.stabilizer_count, 6, "a = {}", set.get(i));
        }
    }

    #[test]
    fn certificate_requires_stratum_membership() {
        let set = enumerate_inverse_semigroup(3, 2).unwrap();
        let top = top_stratum(&set).unwrap();
        let low_rank = pinj(3, &[(0, 1)]);
        assert!(matches!(
            unstability_certificate(&set, &top, &low_rank),
            Err(CertificateError::NotInStratum(_))
        ));
    }

    #[test]
    fn witness_check_examples() {
        let set = enumerate_inverse_semigroup(4, 2).unwrap();
        let top = top_stratum(&set).unwrap();
        let a = pinj(4, &[(0, 2), (1, 3)]);
        // B of size 3 must force an escape (3 > 2!)
        let b_large = vec![
            pinj(4, &[(2, 0), (3, 1)]),
            pinj(4, &[(2, 1), (3, 0)]),
            pinj(4, &[(0, 1), (1, 2)]),
        ];
        assert!(check_unstable_witness(&set, &top, &a, &b_large).unwrap());
        // the two actual stabilizers never escape
        let b_small = vec![pinj(4, &[(2, 0), (3, 1)])];
        assert!(!check_unstable_witness(&set, &top, &a, &b_small).unwrap());
        // empty B vacuously false
        assert!(!check_unstable_witness(&set, &top, &a, &[]).unwrap());
    }

    #[test]
    fn tightness_maxima_equal_factorials() {
        let report = tightness_report(&rank_series_of(4, 2)).unwrap();
        let maxima: Vec<usize> =
            report.levels.iter().map(|l| l.max_stabilizer_count).collect();
        assert_eq!(maxima, vec![1, 2]);
        assert_eq!(report.finitely_tight, Some(true));

        let report = tightness_report(&rank_series_of(3, 3)).unwrap();
        let maxima: Vec<usize> =
            report.levels.iter().map(|l| l.max_stabilizer_count).collect();
        assert_eq!(maxima, vec![1, 2, 6]);
    }

    #[test]
    fn tightness_requires_verified_series() {
        let set = Arc::new(enumerate_inverse_semigroup(2, 1).unwrap());
        let id1 = pinj(2, &[(1, 1)]);
        let idx = set.position(&id1).unwrap();
        let all = (0..set.len()).collect();
        let series = IdealSeries::new(set, vec![vec![idx], all], "bad chain");
        assert!(matches!(
            tightness_report(&series),
            Err(SeriesError::InvalidSeries { level: 0 })
        ));
    }

    #[test]
    fn descriptive_report_for_unbounded_series() {
        // null pair {0, a} with every product 0: the chain verifies but the
        // report carries no bound and therefore makes no tightness claim
        let table =
            crate::semigroup::TableSemigroup::new(vec![vec![0, 0], vec![0, 0]]).unwrap();
        let set = Arc::new(table.into_element_set("null pair"));
        let series = IdealSeries::new(set, vec![vec![0], vec![0, 1]], "null chain");
        assert!(verify_ideal_series(&series).pass);
        let report = tightness_report(&series).unwrap();
        assert_eq!(report.finitely_tight, None);
        assert_eq!(report.levels[0].max_stabilizer_count, 0);
    }
}
