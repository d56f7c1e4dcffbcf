//! Partial one-to-one transformations on a finite ground set `{0, …, m−1}`.
//!
//! Composition is `a·b : x ↦ a(b(x))`, defined exactly where both steps are:
//! the right factor acts first. The empty transformation (written `0`) is an
//! ordinary value with an empty pair list.

use std::cmp::Ordering;
use std::fmt;

use serde::Serialize;
use thiserror::Error;

/// Index into the ground set `{0, …, m−1}`.
#[derive(Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize)]
#[serde(transparent)]
pub struct Point(pub u32);

impl Point {
    pub fn index(self) -> usize {
        self.0 as usize
    }
}

impl fmt::Display for Point {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

impl fmt::Debug for Point {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

/// Sorted, duplicate-free set of points inside a fixed ground set.
#[derive(Clone, PartialEq, Eq, Hash, Debug)]
pub struct PointSet {
    ground_size: u32,
    members: Vec<Point>,
}

impl PointSet {
    /// Builds a point set, sorting and deduplicating the input.
    pub fn new(
        ground_size: u32,
        points: impl IntoIterator<Item = Point>,
    ) -> Result<Self, InjectionError> {
        let mut members: Vec<Point> = points.into_iter().collect();
        members.sort_unstable();
        members.dedup();
        if let Some(&p) = members.iter().find(|p| p.0 >= ground_size) {
            return Err(InjectionError::OutOfRange { point: p, ground_size });
        }
        Ok(PointSet { ground_size, members })
    }

    pub fn empty(ground_size: u32) -> Self {
        PointSet { ground_size, members: Vec::new() }
    }

    /// Every point of the ground set.
    pub fn full(ground_size: u32) -> Self {
        PointSet { ground_size, members: (0..ground_size).map(Point).collect() }
    }

    pub fn ground_size(&self) -> u32 {
        self.ground_size
    }

    pub fn len(&self) -> usize {
        self.members.len()
    }

    pub fn is_empty(&self) -> bool {
        self.members.is_empty()
    }

    pub fn contains(&self, p: Point) -> bool {
        self.members.binary_search(&p).is_ok()
    }

    pub fn iter(&self) -> impl Iterator<Item = Point> + '_ {
        self.members.iter().copied()
    }

    pub fn union(&self, other: &PointSet) -> PointSet {
        debug_assert_eq!(self.ground_size, other.ground_size);
        let mut members: Vec<Point> =
            self.members.iter().chain(other.members.iter()).copied().collect();
        members.sort_unstable();
        members.dedup();
        PointSet { ground_size: self.ground_size, members }
    }

    /// Points of the ground set not in `self`, in ascending order.
    pub fn complement(&self) -> PointSet {
        let members =
            (0..self.ground_size).map(Point).filter(|p| !self.contains(*p)).collect();
        PointSet { ground_size: self.ground_size, members }
    }
}

/// Construction and composition errors for partial injections.
#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum InjectionError {
    #[error("point {point} out of range for ground size {ground_size}")]
    OutOfRange { point: Point, ground_size: u32 },
    #[error("duplicate source point {0}")]
    DuplicateSource(Point),
    #[error("duplicate target point {0}")]
    DuplicateTarget(Point),
    #[error("ground size mismatch: {left} vs {right}")]
    GroundMismatch { left: u32, right: u32 },
}

/// A finite injective partial map on `{0, …, m−1}`.
///
/// Pairs are kept sorted by source, so structural equality coincides with
/// extensional equality and hashing is stable across runs.
#[derive(Clone, PartialEq, Eq, Hash, Serialize)]
pub struct PartialInjection {
    ground_size: u32,
    pairs: Vec<(Point, Point)>,
}

impl PartialInjection {
    /// The empty transformation `0` on a ground set of size `m`.
    pub fn empty(ground_size: u32) -> Self {
        PartialInjection { ground_size, pairs: Vec::new() }
    }

    /// Builds a partial injection from `(source, target)` pairs.
    pub fn from_pairs(
        ground_size: u32,
        pairs: impl IntoIterator<Item = (u32, u32)>,
    ) -> Result<Self, InjectionError> {
        let mut pairs: Vec<(Point, Point)> =
            pairs.into_iter().map(|(s, t)| (Point(s), Point(t))).collect();
        pairs.sort_unstable_by_key(|&(s, _)| s);
        for &(s, t) in &pairs {
            for p in [s, t] {
                if p.0 >= ground_size {
                    return Err(InjectionError::OutOfRange { point: p, ground_size });
                }
            }
        }
        for w in pairs.windows(2) {
            if w[0].0 == w[1].0 {
                return Err(InjectionError::DuplicateSource(w[0].0));
            }
        }
        let mut targets: Vec<Point> = pairs.iter().map(|&(_, t)| t).collect();
        targets.sort_unstable();
        for w in targets.windows(2) {
            if w[0] == w[1] {
                return Err(InjectionError::DuplicateTarget(w[0]));
            }
        }
        Ok(PartialInjection { ground_size, pairs })
    }

    /// The partial identity fixing exactly the points of `s`.
    pub fn identity_on(s: &PointSet) -> Self {
        PartialInjection {
            ground_size: s.ground_size(),
            pairs: s.iter().map(|p| (p, p)).collect(),
        }
    }

    /// The full identity on the ground set.
    pub fn identity(ground_size: u32) -> Self {
        Self::identity_on(&PointSet::full(ground_size))
    }

    pub fn ground_size(&self) -> u32 {
        self.ground_size
    }

    /// Cardinality of the domain (equivalently of the range).
    pub fn rank(&self) -> usize {
        self.pairs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.pairs.is_empty()
    }

    /// Pairs sorted ascending by source.
    pub fn pairs(&self) -> &[(Point, Point)] {
        &self.pairs
    }

    pub fn apply(&self, x: Point) -> Option<Point> {
        self.pairs
            .binary_search_by_key(&x, |&(s, _)| s)
            .ok()
            .map(|i| self.pairs[i].1)
    }

    pub fn domain(&self) -> PointSet {
        PointSet {
            ground_size: self.ground_size,
            members: self.pairs.iter().map(|&(s, _)| s).collect(),
        }
    }

    pub fn range(&self) -> PointSet {
        let mut members: Vec<Point> = self.pairs.iter().map(|&(_, t)| t).collect();
        members.sort_unstable();
        PointSet { ground_size: self.ground_size, members }
    }

    /// `self·other : x ↦ self(other(x))`, defined where both steps are.
    pub fn compose(&self, other: &PartialInjection) -> Result<PartialInjection, InjectionError> {
        if self.ground_size != other.ground_size {
            return Err(InjectionError::GroundMismatch {
                left: self.ground_size,
                right: other.ground_size,
            });
        }
        let pairs = other
            .pairs
            .iter()
            .filter_map(|&(x, y)| self.apply(y).map(|z| (x, z)))
            .collect();
        Ok(PartialInjection { ground_size: self.ground_size, pairs })
    }

    /// The unique inverse: each pair `(s, t)` becomes `(t, s)`.
    pub fn invert(&self) -> PartialInjection {
        let mut pairs: Vec<(Point, Point)> =
            self.pairs.iter().map(|&(s, t)| (t, s)).collect();
        pairs.sort_unstable_by_key(|&(s, _)| s);
        PartialInjection { ground_size: self.ground_size, pairs }
    }

    /// True iff `self·self = self`; for partial injections exactly the
    /// partial identities.
    pub fn is_idempotent(&self) -> bool {
        self.pairs.iter().all(|&(s, t)| s == t)
    }

    /// The natural partial order: `self ≤ other` iff every pair of `self`
    /// is a pair of `other` (restriction order).
    pub fn natural_leq(&self, other: &PartialInjection) -> bool {
        assert_eq!(
            self.ground_size, other.ground_size,
            "natural_leq compares elements of the same ground set"
        );
        if self.pairs.len() > other.pairs.len() {
            return false;
        }
        self.pairs.iter().all(|&(s, t)| other.apply(s) == Some(t))
    }

    /// Copies the mapping onto a larger ground set.
    pub fn on_ground(&self, ground_size: u32) -> Result<PartialInjection, InjectionError> {
        if let Some(&(s, t)) = self
            .pairs
            .iter()
            .find(|&&(s, t)| s.0 >= ground_size || t.0 >= ground_size)
        {
            let point = if s.0 >= ground_size { s } else { t };
            return Err(InjectionError::OutOfRange { point, ground_size });
        }
        Ok(PartialInjection { ground_size, pairs: self.pairs.clone() })
    }

    /// Parses the text grammar `[s1->t1, s2->t2, ...]` or `0`.
    pub fn parse(text: &str, ground_size: u32) -> Result<Self, ParseError> {
        let raw = parse_pairs(text)?;
        Self::from_pairs(ground_size, raw).map_err(|e| match e {
            InjectionError::OutOfRange { point, ground_size } => {
                ParseError::OutOfRange { token: point.to_string(), ground_size }
            }
            InjectionError::DuplicateSource(p) => ParseError::DuplicateSource(p),
            InjectionError::DuplicateTarget(p) => ParseError::DuplicateTarget(p),
            InjectionError::GroundMismatch { .. } => unreachable!("single ground size"),
        })
    }
}

/// Syntax-only half of the parser: extracts `(source, target)` pairs without
/// range checks, so callers with shifted coordinate conventions can reuse it.
pub fn parse_pairs(text: &str) -> Result<Vec<(u32, u32)>, ParseError> {
    let text = text.trim();
    if text == "0" {
        return Ok(Vec::new());
    }
    let inner = text
        .strip_prefix('[')
        .and_then(|t| t.strip_suffix(']'))
        .ok_or_else(|| ParseError::Malformed(text.to_string()))?;
    let inner = inner.trim();
    if inner.is_empty() {
        return Ok(Vec::new());
    }
    let mut pairs = Vec::new();
    for item in inner.split(',') {
        let item = item.trim();
        let (s, t) = item
            .split_once("->")
            .ok_or_else(|| ParseError::Malformed(item.to_string()))?;
        let s: u32 = s.trim().parse().map_err(|_| ParseError::Malformed(item.to_string()))?;
        let t: u32 = t.trim().parse().map_err(|_| ParseError::Malformed(item.to_string()))?;
        pairs.push((s, t));
    }
    Ok(pairs)
}

/// Errors from the element literal grammar.
#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum ParseError {
    #[error("malformed element literal near `{0}`")]
    Malformed(String),
    #[error("point `{token}` out of range for ground size {ground_size}")]
    OutOfRange { token: String, ground_size: u32 },
    #[error("duplicate source point {0}")]
    DuplicateSource(Point),
    #[error("duplicate target point {0}")]
    DuplicateTarget(Point),
}

impl fmt::Display for PartialInjection {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.pairs.is_empty() {
            return write!(f, "0");
        }
        write!(f, "[")?;
        for (i, (s, t)) in self.pairs.iter().enumerate() {
            if i > 0 {
                write!(f, ", ")?;
            }
            write!(f, "{s}->{t}")?;
        }
        write!(f, "]")
    }
}

impl fmt::Debug for PartialInjection {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{self}@{}", self.ground_size)
    }
}

impl PartialOrd for PartialInjection {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

/// Canonical order: ground size, then rank, then the sorted domain, then the
/// corresponding targets. This is the enumeration order of element sets.
impl Ord for PartialInjection {
    fn cmp(&self, other: &Self) -> Ordering {
        self.ground_size
            .cmp(&other.ground_size)
            .then_with(|| self.pairs.len().cmp(&other.pairs.len()))
            .then_with(|| {
                self.pairs
                    .iter()
                    .map(|&(s, _)| s)
                    .cmp(other.pairs.iter().map(|&(s, _)| s))
            })
            .then_with(|| {
                self.pairs
                    .iter()
                    .map(|&(_, t)| t)
                    .cmp(other.pairs.iter().map(|&(_, t)| t))
            })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn pinj(m: u32, pairs: &[(u32, u32)]) -> PartialInjection {
        PartialInjection::from_pairs(m, pairs.iter().copied()).unwrap()
    }

    /// Pointwise evaluation oracle for composition: apply `b` then `a` at
    /// every ground point, independent of the pair-merge implementation.
    fn compose_oracle(a: &PartialInjection, b: &PartialInjection) -> PartialInjection {
        let m = a.ground_size();
        let pairs = (0..m).filter_map(|x| {
            let y = b.apply(Point(x))?;
            let z = a.apply(y)?;
            Some((x, z.0))
        });
        PartialInjection::from_pairs(m, pairs).unwrap()
    }

    #[test]
    fn compose_follows_right_then_left() {
        let a = pinj(6, &[(2, 5)]);
        let b = pinj(6, &[(1, 2)]);
        let ab = a.compose(&b).unwrap();
        assert_eq!(ab, pinj(6, &[(1, 5)]));
        assert_eq!(ab, compose_oracle(&a, &b));
    }

    #[test]
    fn compose_disjoint_gives_empty() {
        let a = pinj(5, &[(1, 2)]);
        let b = pinj(5, &[(3, 4)]);
        assert_eq!(a.compose(&b).unwrap(), PartialInjection::empty(5));
    }

    #[test]
    fn identity_absorbs() {
        let id = PartialInjection::identity_on(&PointSet::new(3, [Point(1), Point(2)]).unwrap());
        let b = pinj(3, &[(1, 2), (2, 1)]);
        assert_eq!(id.compose(&b).unwrap(), b);
        assert_eq!(b.compose(&id).unwrap(), b);
    }

    #[test]
    fn compose_ground_mismatch_is_an_error() {
        let a = pinj(3, &[(1, 2)]);
        let b = pinj(4, &[(1, 2)]);
        assert!(matches!(
            a.compose(&b),
            Err(InjectionError::GroundMismatch { left: 3, right: 4 })
        ));
    }

    #[test]
    fn invert_swaps_pairs() {
        let a = pinj(5, &[(1, 3), (2, 4)]);
        assert_eq!(a.invert(), pinj(5, &[(3, 1), (4, 2)]));
        assert_eq!(PartialInjection::empty(5).invert(), PartialInjection::empty(5));
        let e = pinj(6, &[(5, 5)]);
        assert_eq!(e.invert(), e);
    }

    #[test]
    fn inverse_axioms() {
        let a = pinj(5, &[(0, 3), (2, 4), (4, 1)]);
        let inv = a.invert();
        assert_eq!(a.compose(&inv.compose(&a).unwrap()).unwrap(), a);
        assert_eq!(inv.compose(&a.compose(&inv).unwrap()).unwrap(), inv);
    }

    #[test]
    fn idempotents_are_partial_identities() {
        let id12 = PartialInjection::identity_on(&PointSet::new(3, [Point(1), Point(2)]).unwrap());
        assert!(id12.is_idempotent());
        assert!(PartialInjection::empty(3).is_idempotent());
        let a = pinj(3, &[(1, 2)]);
        assert!(!a.is_idempotent());
        // compose oracle: (1↦2)·(1↦2) = 0 ≠ (1↦2)
        assert_eq!(a.compose(&a).unwrap(), PartialInjection::empty(3));
    }

    #[test]
    fn natural_order_is_pair_inclusion() {
        let id1 = pinj(4, &[(1, 1)]);
        let id12 = pinj(4, &[(1, 1), (2, 2)]);
        assert!(id1.natural_leq(&id12));
        assert!(!id12.natural_leq(&id1));
        assert!(pinj(4, &[(1, 2)]).natural_leq(&pinj(4, &[(1, 2), (3, 0)])));
    }

    #[test]
    fn natural_order_on_idempotents_matches_products() {
        // on idempotents ε ≤ φ coincides with ε = εφ = φε
        let eps = pinj(4, &[(1, 1)]);
        let phi = pinj(4, &[(1, 1), (2, 2)]);
        assert_eq!(eps.compose(&phi).unwrap(), eps);
        assert_eq!(phi.compose(&eps).unwrap(), eps);
    }

    #[test]
    fn rank_counts_pairs() {
        assert_eq!(PartialInjection::empty(3).rank(), 0);
        assert_eq!(pinj(3, &[(1, 2)]).rank(), 1);
        assert_eq!(pinj(5, &[(1, 3), (2, 4)]).rank(), 2);
    }

    #[test]
    fn duplicate_sources_and_targets_rejected() {
        assert_eq!(
            PartialInjection::from_pairs(5, [(1, 3), (1, 4)]),
            Err(InjectionError::DuplicateSource(Point(1)))
        );
        assert_eq!(
            PartialInjection::from_pairs(5, [(1, 3), (2, 3)]),
            Err(InjectionError::DuplicateTarget(Point(3)))
        );
    }

    #[test]
    fn parse_and_render_round_trip() {
        let a = PartialInjection::parse("[1->3, 2->4]", 5).unwrap();
        assert_eq!(a, pinj(5, &[(1, 3), (2, 4)]));
        assert_eq!(a.to_string(), "[1->3, 2->4]");
        assert_eq!(PartialInjection::parse("0", 5).unwrap(), PartialInjection::empty(5));
        assert_eq!(PartialInjection::empty(5).to_string(), "0");
    }

    #[test]
    fn parse_errors_name_the_offender() {
        assert_eq!(
            PartialInjection::parse("[1->3, 1->4]", 5),
            Err(ParseError::DuplicateSource(Point(1)))
        );
        assert!(matches!(
            PartialInjection::parse("[1->3, 9->4]", 5),
            Err(ParseError::OutOfRange { token, .. }) if token == "9"
        ));
        assert!(matches!(
            PartialInjection::parse("[1=>3]", 5),
            Err(ParseError::Malformed(_))
        ));
        assert!(matches!(
            PartialInjection::parse("1->3", 5),
            Err(ParseError::Malformed(_))
        ));
    }

    #[test]
    fn json_rendering_has_pairs_and_ground_size() {
        let a = pinj(3, &[(0, 2), (1, 0)]);
        let json = serde_json::to_string(&a).unwrap();
        assert_eq!(json, r#"{"ground_size":3,"pairs":[[0,2],[1,0]]}"#);
    }

    #[test]
    fn canonical_order_sorts_by_rank_then_domain_then_targets() {
        let zero = PartialInjection::empty(3);
        let a = pinj(3, &[(0, 1)]);
        let b = pinj(3, &[(0, 2)]);
        let c = pinj(3, &[(1, 0)]);
        let d = pinj(3, &[(0, 1), (1, 2)]);
        let mut v = vec![d.clone(), c.clone(), a.clone(), zero.clone(), b.clone()];
        v.sort();
        assert_eq!(v, vec![zero, a, b, c, d]);
    }
}
