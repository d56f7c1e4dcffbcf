//! Block-respecting partial functions: for pairwise disjoint finite blocks
//! `X_i` indexed by `I`, the semigroup of partial functions `f` on
//! `X = ∪ X_i` whose index action `α` is a partial injection on `I` and
//! which satisfy `x ∈ X_i ⟹ f(x) ∈ X_{α(i)}`. Rank is the rank of `α`.
//! Per-block functions are total on their block and need not be injective.

use std::fmt;
use std::sync::Arc;

use serde::Serialize;
use thiserror::Error;

use crate::pinj::{PartialInjection, Point};
use crate::product::{Homomorphism, HomomorphismError};
use crate::semigroup::{
    enumerate_inverse_semigroup, enumerate_inverse_semigroup_bounded, ElementSet,
    EnumerationError, InjSemigroup, Ranked, Semigroup, DEFAULT_ELEMENT_BUDGET,
};

/// Block sizes per index; points of the carrier are (block, offset) pairs,
/// which makes disjointness structural.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct BlockStructure {
    block_sizes: Vec<u32>,
}

impl BlockStructure {
    pub fn new(block_sizes: Vec<u32>) -> Result<Self, BlockMapError> {
        if block_sizes.is_empty() || block_sizes.iter().any(|&s| s == 0) {
            return Err(BlockMapError::EmptyBlock);
        }
        Ok(BlockStructure { block_sizes })
    }

    pub fn index_count(&self) -> u32 {
        self.block_sizes.len() as u32
    }

    pub fn block_size(&self, i: u32) -> u32 {
        self.block_sizes[i as usize]
    }

    pub fn block_sizes(&self) -> &[u32] {
        &self.block_sizes
    }
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum BlockMapError {
    #[error("blocks must be non-empty")]
    EmptyBlock,
    #[error("index map ground size {got} does not match index count {expected}")]
    IndexGroundMismatch { got: u32, expected: u32 },
    #[error("block function {position} has length {got}, expected the size {expected} of its source block")]
    FunctionLength { position: usize, got: usize, expected: usize },
    #[error("block function {position} maps offset {offset} to {value}, outside its target block of size {size}")]
    FunctionRange { position: usize, offset: usize, value: u32, size: u32 },
}

/// An element of the block semigroup: the index injection `alpha` together
/// with one total function per mapped block, aligned with `alpha`'s pairs.
#[derive(Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Debug)]
pub struct BlockMap {
    alpha: PartialInjection,
    maps: Vec<Vec<u32>>,
}

impl BlockMap {
    pub fn new(
        structure: &BlockStructure,
        alpha: PartialInjection,
        maps: Vec<Vec<u32>>,
    ) -> Result<Self, BlockMapError> {
        if alpha.ground_size() != structure.index_count() {
            return Err(BlockMapError::IndexGroundMismatch {
                got: alpha.ground_size(),
                expected: structure.index_count(),
            });
        }
        if maps.len() != alpha.rank() {
            return Err(BlockMapError::FunctionLength {
                position: maps.len().min(alpha.rank()),
                got: maps.len(),
                expected: alpha.rank(),
            });
        }
        for (position, (&(src, dst), f)) in alpha.pairs().iter().zip(&maps).enumerate() {
            let src_size = structure.block_size(src.0) as usize;
            if f.len() != src_size {
                return Err(BlockMapError::FunctionLength {
                    position,
                    got: f.len(),
                    expected: src_size,
                });
            }
            let dst_size = structure.block_size(dst.0);
            for (offset, &value) in f.iter().enumerate() {
                if value >= dst_size {
                    return Err(BlockMapError::FunctionRange {
                        position,
                        offset,
                        value,
                        size: dst_size,
                    });
                }
            }
        }
        Ok(BlockMap { alpha, maps })
    }

    /// The empty block map.
    pub fn empty(structure: &BlockStructure) -> Self {
        BlockMap {
            alpha: PartialInjection::empty(structure.index_count()),
            maps: Vec::new(),
        }
    }

    /// The identity: `alpha` fixes every index, every block function is the
    /// identity on its block.
    pub fn identity(structure: &BlockStructure) -> Self {
        let alpha = PartialInjection::identity(structure.index_count());
        let maps = (0..structure.index_count())
            .map(|i| (0..structure.block_size(i)).collect())
            .collect();
        BlockMap { alpha, maps }
    }

    pub fn alpha(&self) -> &PartialInjection {
        &self.alpha
    }

    pub fn rank(&self) -> usize {
        self.alpha.rank()
    }

    /// Image of the carrier point `(block, offset)`, if the block is mapped.
    pub fn apply(&self, block: u32, offset: u32) -> Option<(u32, u32)> {
        let pos = self
            .alpha
            .pairs()
            .binary_search_by_key(&Point(block), |&(s, _)| s)
            .ok()?;
        let (_, target) = self.alpha.pairs()[pos];
        Some((target.0, self.maps[pos][offset as usize]))
    }

    /// `self·other`: apply `other`, then `self`, where defined.
    pub fn compose(&self, other: &BlockMap) -> BlockMap {
        let alpha = self
            .alpha
            .compose(&other.alpha)
            .expect("block maps over one structure share the index ground");
        let maps = alpha
            .pairs()
            .iter()
            .map(|&(src, _)| {
                let mid = other.alpha.apply(src).expect("src is in dom(other.alpha)");
                let other_pos = other
                    .alpha
                    .pairs()
                    .binary_search_by_key(&src, |&(s, _)| s)
                    .expect("src is in dom(other.alpha)");
                let self_pos = self
                    .alpha
                    .pairs()
                    .binary_search_by_key(&mid, |&(s, _)| s)
                    .expect("mid is in dom(self.alpha)");
                other.maps[other_pos]
                    .iter()
                    .map(|&y| self.maps[self_pos][y as usize])
                    .collect()
            })
            .collect();
        BlockMap { alpha, maps }
    }
}

impl Ranked for BlockMap {
    fn rank_of(&self) -> usize {
        self.rank()
    }
}

impl fmt::Display for BlockMap {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.alpha.is_empty() {
            return write!(f, "0");
        }
        write!(f, "[")?;
        for (i, (&(s, t), blockfn)) in self.alpha.pairs().iter().zip(&self.maps).enumerate() {
            if i > 0 {
                write!(f, ", ")?;
            }
            write!(f, "{s}->{t}:")?;
            for (j, v) in blockfn.iter().enumerate() {
                if j > 0 {
                    write!(f, " ")?;
                }
                write!(f, "{v}")?;
            }
        }
        write!(f, "]")
    }
}

/// The block semigroup as a multiplication oracle.
#[derive(Clone, Debug)]
pub struct PtSemigroup {
    pub structure: BlockStructure,
}

impl Semigroup for PtSemigroup {
    type Elem = BlockMap;

    fn multiply(&self, a: &BlockMap, b: &BlockMap) -> BlockMap {
        a.compose(b)
    }
}

/// Number of block maps over a fixed `alpha`:
/// `Π_{i ∈ dom α} |X_{α(i)}|^{|X_i|}`.
pub fn fiber_size_formula(structure: &BlockStructure, alpha: &PartialInjection) -> u128 {
    alpha
        .pairs()
        .iter()
        .map(|&(src, dst)| {
            (structure.block_size(dst.0) as u128).pow(structure.block_size(src.0))
        })
        .product()
}

/// Enumerates every block map of rank `≤ n`, ordered by `alpha` in canonical
/// order, then lexicographically by the tuple of block functions.
pub fn enumerate_pt(
    structure: &BlockStructure,
    n: u32,
) -> Result<ElementSet<PtSemigroup>, EnumerationError> {
    enumerate_pt_bounded(structure, n, DEFAULT_ELEMENT_BUDGET)
}

pub fn enumerate_pt_bounded(
    structure: &BlockStructure,
    n: u32,
    budget: usize,
) -> Result<ElementSet<PtSemigroup>, EnumerationError> {
    let index_set = enumerate_inverse_semigroup_bounded(structure.index_count(), n, budget)?;
    let mut required: u128 = 0;
    for alpha in index_set.elements() {
        required += fiber_size_formula(structure, alpha);
        if required > budget as u128 {
            return Err(EnumerationError::BudgetExceeded { required, budget });
        }
    }
    let mut elements = Vec::with_capacity(required as usize);
    for alpha in index_set.elements() {
        visit_fiber(structure, alpha, &mut |maps| {
            elements.push(BlockMap { alpha: alpha.clone(), maps })
        });
    }
    let label = format!("PT(blocks {:?})^{n}", structure.block_sizes());
    Ok(ElementSet::new_unchecked(
        PtSemigroup { structure: structure.clone() },
        elements,
        label,
    ))
}

/// Calls `f` with every tuple of block functions compatible with `alpha`,
/// in lexicographic order.
fn visit_fiber(
    structure: &BlockStructure,
    alpha: &PartialInjection,
    f: &mut impl FnMut(Vec<Vec<u32>>),
) {
    let shapes: Vec<(u32, u32)> = alpha
        .pairs()
        .iter()
        .map(|&(src, dst)| (structure.block_size(src.0), structure.block_size(dst.0)))
        .collect();
    let mut maps: Vec<Vec<u32>> =
        shapes.iter().map(|&(src_size, _)| vec![0; src_size as usize]).collect();
    loop {
        f(maps.clone());
        // odometer over the concatenated digits, last digit fastest
        let mut pos = None;
        'outer: for bi in (0..maps.len()).rev() {
            for di in (0..maps[bi].len()).rev() {
                if maps[bi][di] + 1 < shapes[bi].1 {
                    pos = Some((bi, di));
                    break 'outer;
                }
                maps[bi][di] = 0;
            }
        }
        match pos {
            Some((bi, di)) => maps[bi][di] += 1,
            None => break,
        }
    }
}

/// The index homomorphism `h : PT(X,I)^n → I_{|I|}^n`, `h(f) = α`; checked
/// multiplicative and surjective on construction, with finite fibers.
pub fn index_homomorphism(
    structure: &BlockStructure,
    n: u32,
) -> Result<Homomorphism<PtSemigroup, InjSemigroup>, IndexHomError> {
    let source = Arc::new(enumerate_pt(structure, n)?);
    let target = Arc::new(enumerate_inverse_semigroup(structure.index_count(), n)?);
    let h = Homomorphism::new(source, target, |bm: &BlockMap| bm.alpha().clone())?;
    Ok(h)
}

#[derive(Debug, Error)]
pub enum IndexHomError {
    #[error(transparent)]
    Enumeration(#[from] EnumerationError),
    #[error(transparent)]
    Homomorphism(#[from] HomomorphismError),
}

/// Exhaustive regularity check: for each `x` searches some `y` with
/// `x·y·x = x` and lists the elements with no such witness.
#[derive(Debug, Clone, Serialize)]
pub struct RegularityReport {
    pub label: String,
    pub checked: usize,
    pub non_regular: Vec<String>,
    pub pass: bool,
}

pub fn check_regular<S: Semigroup>(set: &ElementSet<S>) -> RegularityReport {
    let flags = crate::par::map_indexed(set.len(), |x| set.regular_witness(x).is_none());
    let non_regular: Vec<String> = flags
        .iter()
        .enumerate()
        .filter(|(_, &bad)| bad)
        .map(|(i, _)| set.get(i).to_string())
        .collect();
    RegularityReport {
        label: set.label().to_string(),
        checked: set.len(),
        pass: non_regular.is_empty(),
        non_regular,
    }
}
