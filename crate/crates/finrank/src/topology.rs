//! Symbolic verification of neighborhood-base identities over truncated
//! countable carriers: a zero-adjoined carrier whose base at the extra point
//! is the family `U_n = {a} ∪ {(2l−1 ↦ 2l) : l ≥ n}`, an identity-adjoined
//! carrier whose base at the identity is `U_ε = {ι} ∪ {χ : εχ = χε = ε}`,
//! and the clopen cover built from the left-stabilizer sets
//! `U_l(ε_k) = {β : βε_k = ε_k}` of a strictly increasing idempotent chain.
//!
//! Points in this module are numbered from 1, so the pair families land on
//! odd points and their successors; they are shifted down by one at the
//! boundary to the 0-based core. Infinite carriers are modeled by a ground
//! truncation `N`; every verifier can be re-run at `2N` and compared, which
//! guards against truncation artifacts without deciding infinite statements.

use serde::Serialize;
use thiserror::Error;

use crate::pinj::{parse_pairs, ParseError, PartialInjection, PointSet};
use crate::semigroup::{injection_domains, visit_injections, visit_injections_with_domain};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum TopologyError {
    #[error("truncation {got} too small; need at least {required}")]
    TruncationTooSmall { got: u32, required: u32 },
    #[error("chain length {chain} exceeds truncation {ground}")]
    ChainTooLong { chain: u32, ground: u32 },
    #[error("rank must be positive")]
    ZeroRank,
    #[error("element has ground size {got}, expected the truncation {expected}")]
    GroundMismatch { got: u32, expected: u32 },
}

/// Parses an element literal with 1-based points (`[1->2]`) onto the ground
/// `{0, …, n−1}` of a truncation `n`.
pub fn parse_one_based(text: &str, truncation: u32) -> Result<PartialInjection, ParseError> {
    let raw = parse_pairs(text)?;
    for &(s, t) in &raw {
        for p in [s, t] {
            if p == 0 || p > truncation {
                return Err(ParseError::OutOfRange {
                    token: p.to_string(),
                    ground_size: truncation,
                });
            }
        }
    }
    PartialInjection::from_pairs(truncation, raw.into_iter().map(|(s, t)| (s - 1, t - 1)))
        .map_err(|e| match e {
            crate::pinj::InjectionError::DuplicateSource(p) => {
                ParseError::DuplicateSource(crate::pinj::Point(p.0 + 1))
            }
            crate::pinj::InjectionError::DuplicateTarget(p) => {
                ParseError::DuplicateTarget(crate::pinj::Point(p.0 + 1))
            }
            other => ParseError::Malformed(other.to_string()),
        })
}

/// Renders an element with points shifted back to the 1-based convention.
pub fn render_one_based(a: &PartialInjection) -> String {
    if a.is_empty() {
        return "0".to_string();
    }
    let body = a
        .pairs()
        .iter()
        .map(|&(s, t)| format!("{}->{}", s.0 + 1, t.0 + 1))
        .collect::<Vec<_>>()
        .join(", ");
    format!("[{body}]")
}

/// The rank-one pair `(2l−1 ↦ 2l)` in 1-based points, on ground `n`.
fn pair_link(truncation: u32, l: u32) -> PartialInjection {
    debug_assert!(2 * l <= truncation);
    PartialInjection::from_pairs(truncation, [(2 * l - 2, 2 * l - 1)])
        .expect("link points are in range")
}

/// Largest 1-based coordinate appearing in the element (0 for the empty one).
fn max_coordinate(a: &PartialInjection) -> u32 {
    a.pairs()
        .iter()
        .map(|&(s, t)| s.0.max(t.0) + 1)
        .max()
        .unwrap_or(0)
}

/// One named verification with its exhaustive count and first witness of
/// failure, if any.
#[derive(Debug, Clone, Serialize, PartialEq, Eq)]
pub struct CheckOutcome {
    pub name: &'static str,
    pub pass: bool,
    pub checked: u64,
    pub witness: Option<String>,
}

impl CheckOutcome {
    fn merge(name: &'static str, parts: Vec<(u64, Option<String>)>) -> Self {
        let checked = parts.iter().map(|(c, _)| c).sum();
        let witness = parts.into_iter().find_map(|(_, w)| w);
        CheckOutcome { name, pass: witness.is_none(), checked, witness }
    }
}

#[cfg(feature = "parallel")]
use rayon::prelude::*;

fn sweep_domains<T, F>(ground: u32, max_rank: u32, per_domain: F) -> Vec<T>
where
    T: Send,
    F: Fn(&[u32]) -> T + Sync + Send,
{
    let domains = injection_domains(ground, max_rank);
    #[cfg(feature = "parallel")]
    {
        domains.par_iter().map(|d| per_domain(d)).collect()
    }
    #[cfg(not(feature = "parallel"))]
    {
        domains.iter().map(|d| per_domain(d)).collect()
    }
}

// ---------------------------------------------------------------------------
// Zero-adjoined carrier: S = (rank ≤ k elements) ∪ {a}, a·a = a·x = x·a = 0.
// ---------------------------------------------------------------------------

#[derive(Debug, Clone, Serialize)]
pub struct ZeroModelReport {
    pub truncation: u32,
    pub rank: u32,
    /// Largest base parameter exercised; elements with coordinates above it
    /// have no applicable parameter and are skipped.
    pub n_max: u32,
    pub checks: Vec<CheckOutcome>,
    pub pass: bool,
}

impl ZeroModelReport {
    pub fn verdict(&self) -> Vec<bool> {
        self.checks.iter().map(|c| c.pass).collect()
    }
}

/// Verifies, exhaustively at the truncation, that every element annihilates
/// every base set with parameter at or above its coordinates (products in
/// both orders are the empty transformation), and that all pairwise products
/// within a base set are the empty transformation.
///
/// Checking the links `l ≥ max coordinate of x` certifies every parameter
/// `n ≥ max coordinate at once, since the base set at parameter n contains
/// exactly the links with l ≥ n.
pub fn verify_example5(
    truncation: u32,
    rank: u32,
    n_max: u32,
) -> Result<ZeroModelReport, TopologyError> {
    if rank == 0 {
        return Err(TopologyError::ZeroRank);
    }
    if truncation < 2 * n_max {
        return Err(TopologyError::TruncationTooSmall {
            got: truncation,
            required: 2 * n_max,
        });
    }
    let links = truncation / 2;
    let zero = PartialInjection::empty(truncation);

    // item a: x · U_n = U_n · x = {0} for all n ≥ max coordinate of x
    let annihilation = CheckOutcome::merge(
        "element-annihilates-tail-base",
        sweep_domains(n_max, rank, |dom| {
            let mut checked = 0u64;
            let mut witness = None;
            visit_injections_with_domain(n_max, dom, &mut |x| {
                if witness.is_some() {
                    return;
                }
                let x = x.on_ground(truncation).expect("n_max ≤ truncation");
                let mc = max_coordinate(&x);
                // products with the adjoined symbol are zero by the carrier rule
                checked += 2;
                for l in mc.max(1)..=links {
                    let e = pair_link(truncation, l);
                    let xe = x.compose(&e).expect("same ground");
                    let ex = e.compose(&x).expect("same ground");
                    checked += 2;
                    if !xe.is_empty() || !ex.is_empty() {
                        witness = Some(format!(
                            "x = {}, link {} gives {} / {}",
                            render_one_based(&x),
                            render_one_based(&e),
                            render_one_based(&xe),
                            render_one_based(&ex),
                        ));
                        return;
                    }
                }
            });
            (checked, witness)
        }),
    );

    // item b: all pairwise products within the widest base set are zero,
    // including products with the empty transformation
    let mut members = vec![None::<PartialInjection>]; // the adjoined symbol
    members.extend((1..=links).map(|l| Some(pair_link(truncation, l))));
    let mut checked = 0u64;
    let mut witness = None;
    for u in &members {
        for v in &members {
            let product = match (u, v) {
                (None, _) | (_, None) => zero.clone(),
                (Some(u), Some(v)) => u.compose(v).expect("same ground"),
            };
            checked += 1;
            if !product.is_empty() && witness.is_none() {
                witness = Some(format!(
                    "{} · {}",
                    u.as_ref().map_or("a".into(), render_one_based),
                    v.as_ref().map_or("a".into(), render_one_based),
                ));
            }
        }
        if let Some(u) = u {
            checked += 2;
            let uz = u.compose(&zero).expect("same ground");
            let zu = zero.compose(u).expect("same ground");
            if (!uz.is_empty() || !zu.is_empty()) && witness.is_none() {
                witness = Some(render_one_based(u));
            }
        }
    }
    let square_zero = CheckOutcome {
        name: "base-squares-to-zero",
        pass: witness.is_none(),
        checked,
        witness,
    };

    // every base member on the carrier side has rank one
    let all_rank_one = (1..=links).all(|l| pair_link(truncation, l).rank() == 1);
    let rank_one = CheckOutcome {
        name: "base-members-have-rank-one",
        pass: all_rank_one,
        checked: u64::from(links),
        witness: None,
    };

    let checks = vec![annihilation, square_zero, rank_one];
    let pass = checks.iter().all(|c| c.pass);
    Ok(ZeroModelReport { truncation, rank, n_max, checks, pass })
}

/// A base member other than the adjoined point, witnessing that every base
/// neighborhood meets the carrier: the least link with parameter ≥ n.
pub fn density_witness_example5(
    truncation: u32,
    rank: u32,
    n: u32,
) -> Result<PartialInjection, TopologyError> {
    if rank == 0 || n == 0 {
        return Err(TopologyError::ZeroRank);
    }
    if truncation < 2 * n + 2 {
        return Err(TopologyError::TruncationTooSmall {
            got: truncation,
            required: 2 * n + 2,
        });
    }
    Ok(pair_link(truncation, n))
}

// ---------------------------------------------------------------------------
// Identity-adjoined carrier: base at ι is {ι} ∪ M(ε), M(ε) = {χ : εχ = χε = ε}.
// ---------------------------------------------------------------------------

#[derive(Debug, Clone, Serialize)]
pub struct IdentityModelReport {
    pub truncation: u32,
    pub chi: String,
    pub fixed_set: Vec<u32>,
    pub epsilon: String,
    /// Members of `M(ε)` enumerated at the truncation (the adjoined identity
    /// is handled symbolically on top of these).
    pub base_members: usize,
    pub rank_headroom: u32,
    pub checks: Vec<CheckOutcome>,
    pub note: &'static str,
    pub pass: bool,
}

impl IdentityModelReport {
    pub fn verdict(&self) -> Vec<bool> {
        self.checks.iter().map(|c| c.pass).collect()
    }
}

pub const IDENTITY_MODEL_NOTE: &str = "the one-sided base identity is checked on \
both sides (U·χ and χ·U); membership in M(ε) is the exact pointwise test \
ε ≤ χ in the natural order";

/// Builds `K` (the coordinates of `χ`), `ε = identity on K`, and verifies at
/// the truncation: `εχ = χε = χ`, `U·χ = χ·U = {χ}`, `U·U ⊆ U`, and
/// `U⁻¹ = U`, where `U = {ι} ∪ M(ε)` and `M(ε)` is enumerated up to rank
/// `|K| + rank_headroom`.
pub fn verify_example6(
    truncation: u32,
    chi: &PartialInjection,
    rank_headroom: u32,
) -> Result<IdentityModelReport, TopologyError> {
    if chi.ground_size() != truncation {
        return Err(TopologyError::GroundMismatch {
            got: chi.ground_size(),
            expected: truncation,
        });
    }
    let fixed = chi.domain().union(&chi.range());
    let eps = PartialInjection::identity_on(&fixed);

    // εχ = χε = χ
    let left = eps.compose(chi).expect("same ground");
    let right = chi.compose(&eps).expect("same ground");
    let idempotent_identity = CheckOutcome {
        name: "epsilon-fixes-chi",
        pass: left == *chi && right == *chi,
        checked: 2,
        witness: (left != *chi || right != *chi).then(|| {
            format!("εχ = {}, χε = {}", render_one_based(&left), render_one_based(&right))
        }),
    };

    // M(ε) ∩ (rank ≤ |K| + headroom): ε extended by injections on the
    // complement of K
    let complement: Vec<u32> = fixed.complement().iter().map(|p| p.0).collect();
    let mut base: Vec<PartialInjection> = Vec::new();
    visit_injections(complement.len() as u32, rank_headroom.min(complement.len() as u32), |beta| {
        let pairs = eps
            .pairs()
            .iter()
            .map(|&(s, t)| (s.0, t.0))
            .chain(beta.pairs().iter().map(|&(s, t)| {
                (complement[s.index()], complement[t.index()])
            }));
        base.push(
            PartialInjection::from_pairs(truncation, pairs)
                .expect("ε and the complement extension are disjoint"),
        );
    });

    let in_base = |x: &PartialInjection| eps.natural_leq(x);
    for u in &base {
        debug_assert!(in_base(u));
    }

    // U·χ = {χ} and χ·U = {χ}; the adjoined identity contributes ι·χ = χ
    let check_products = |name: &'static str, left_side: bool| {
        let mut witness = None;
        for u in &base {
            let p = if left_side {
                u.compose(chi).expect("same ground")
            } else {
                chi.compose(u).expect("same ground")
            };
            if p != *chi && witness.is_none() {
                witness = Some(format!(
                    "{} gives {}",
                    render_one_based(u),
                    render_one_based(&p)
                ));
            }
        }
        CheckOutcome {
            name,
            pass: witness.is_none(),
            checked: base.len() as u64 + 1,
            witness,
        }
    };
    let left_products = check_products("base-times-chi-is-chi", true);
    let right_products = check_products("chi-times-base-is-chi", false);

    // U·U ⊆ U: symbol products are immediate, carrier products must stay
    // above ε
    let mut witness = None;
    let mut checked = (2 * base.len() + 1) as u64; // ι·ι, ι·u, u·ι
    for u in &base {
        for v in &base {
            let p = u.compose(v).expect("same ground");
            checked += 1;
            if !in_base(&p) && witness.is_none() {
                witness = Some(format!(
                    "{} · {} = {}",
                    render_one_based(u),
                    render_one_based(v),
                    render_one_based(&p)
                ));
            }
        }
    }
    let closed = CheckOutcome { name: "base-product-closed", pass: witness.is_none(), checked, witness };

    // U⁻¹ = U: inversion fixes ι and permutes M(ε) (rank is preserved, so
    // the truncated slice maps onto itself)
    let mut witness = None;
    for u in &base {
        let inv = u.invert();
        if !in_base(&inv) && witness.is_none() {
            witness = Some(render_one_based(u));
        }
    }
    let inverse_closed = CheckOutcome {
        name: "base-inverse-closed",
        pass: witness.is_none(),
        checked: base.len() as u64 + 1,
        witness,
    };

    let checks = vec![idempotent_identity, left_products, right_products, closed, inverse_closed];
    let pass = checks.iter().all(|c| c.pass);
    Ok(IdentityModelReport {
        truncation,
        chi: render_one_based(chi),
        fixed_set: fixed.iter().map(|p| p.0 + 1).collect(),
        epsilon: render_one_based(&eps),
        base_members: base.len(),
        rank_headroom,
        checks,
        note: IDENTITY_MODEL_NOTE,
        pass,
    })
}

/// Membership in `M(ε)`: both products with `ε` equal `ε`.
pub fn in_stabilizer_base(eps: &PartialInjection, chi: &PartialInjection) -> bool {
    eps.compose(chi).map(|p| p == *eps).unwrap_or(false)
        && chi.compose(eps).map(|p| p == *eps).unwrap_or(false)
}

// ---------------------------------------------------------------------------
// Clopen cover from the left-stabilizer sets of an idempotent chain.
// ---------------------------------------------------------------------------

#[derive(Debug, Clone, Serialize)]
pub struct CoverReport {
    pub truncation: u32,
    pub rank_cap: u32,
    pub chain_length: u32,
    /// The idempotents `ε_1 < ε_2 < …`, rendered 1-based.
    pub chain: Vec<String>,
    pub chain_strictly_increasing: bool,
    /// `|O_k|` for `k = 1..=chain_length` over the truncated universe.
    pub piece_sizes: Vec<u64>,
    /// Elements of the truncated universe left in the final stabilizer set.
    pub residual_size: u64,
    pub universe_size: u64,
    /// Every element lands in exactly one piece (stabilizer sets are nested).
    pub partition_ok: bool,
    pub partition_witness: Option<String>,
    pub subfamilies_checked: u32,
    /// Subfamilies whose uncovered witness verified.
    pub subfamilies_uncovered_ok: u32,
    pub pass: bool,
}

impl CoverReport {
    pub fn verdict(&self) -> Vec<bool> {
        vec![
            self.chain_strictly_increasing,
            self.partition_ok,
            self.subfamilies_checked == self.subfamilies_uncovered_ok,
        ]
    }
}

/// Builds the chain `ε_k = identity on {1..k}`, the stabilizer sets
/// `U_k = {β : βε_k = ε_k}` (left action, taken literally), and the pieces
/// `O_1 = universe ∖ U_1`, `O_k = U_{k−1} ∖ U_k`. Classifies the whole
/// truncated universe of rank ≤ `rank_cap` and checks an uncovered witness
/// for every nonempty subfamily of pieces.
pub fn build_cover_theorem12(
    truncation: u32,
    chain_length: u32,
    rank_cap: u32,
) -> Result<CoverReport, TopologyError> {
    if chain_length == 0 {
        return Err(TopologyError::ZeroRank);
    }
    if chain_length > truncation {
        return Err(TopologyError::ChainTooLong { chain: chain_length, ground: truncation });
    }
    if chain_length > 31 {
        // subfamily sweep is exponential in the chain length
        return Err(TopologyError::ChainTooLong { chain: chain_length, ground: 31 });
    }
    let chain: Vec<PartialInjection> = (1..=chain_length)
        .map(|k| {
            let set = PointSet::new(truncation, (0..k).map(crate::pinj::Point))
                .expect("chain fits the truncation");
            PartialInjection::identity_on(&set)
        })
        .collect();

    let mut chain_strictly_increasing = !chain.is_empty() && !chain[0].is_empty();
    for w in chain.windows(2) {
        chain_strictly_increasing &= w[0].natural_leq(&w[1]) && w[0] != w[1];
    }

    let stabilized = |beta: &PartialInjection, eps: &PartialInjection| {
        beta.compose(eps).expect("same ground") == *eps
    };

    // classify every element of the truncated universe by the length of its
    // initial run of stabilized chain entries
    let sweeps = sweep_domains(truncation, rank_cap.min(truncation), |dom| {
        let mut tallies = vec![0u64; chain.len() + 1];
        let mut bad = None;
        visit_injections_with_domain(truncation, dom, &mut |beta| {
            let membership: Vec<bool> = chain.iter().map(|e| stabilized(&beta, e)).collect();
            let prefix = membership.iter().take_while(|&&m| m).count();
            if membership[prefix..].iter().any(|&m| m) && bad.is_none() {
                bad = Some(render_one_based(&beta));
            }
            tallies[prefix] += 1;
        });
        (tallies, bad)
    });
    let mut tallies = vec![0u64; chain.len() + 1];
    let mut partition_witness = None;
    for (local, bad) in sweeps {
        for (t, l) in tallies.iter_mut().zip(local) {
            *t += l;
        }
        if partition_witness.is_none() {
            partition_witness = bad;
        }
    }
    let partition_ok = partition_witness.is_none();
    let residual_size = tallies[chain.len()];
    let piece_sizes: Vec<u64> = tallies[..chain.len()].to_vec();
    let universe_size: u64 = tallies.iter().sum();

    // for every nonempty subfamily F of pieces, ε_j with j = max F is left
    // uncovered: it stabilizes every chain entry up to j, so it lies in no
    // O_i with i ≤ j
    let subfamilies_checked = (1u32 << chain_length) - 1;
    let mut subfamilies_uncovered_ok = 0u32;
    for family in 1..=subfamilies_checked {
        let top = 32 - family.leading_zeros(); // max piece index in F
        let witness = &chain[(top - 1) as usize];
        let in_u = |k: usize| {
            if k == 0 {
                true
            } else {
                stabilized(witness, &chain[k - 1])
            }
        };
        let escapes_every_piece = (1..=chain_length)
            .filter(|i| family >> (i - 1) & 1 == 1)
            .all(|i| !(in_u(i as usize - 1) && !in_u(i as usize)));
        if escapes_every_piece {
            subfamilies_uncovered_ok += 1;
        }
    }

    let pass = chain_strictly_increasing
        && partition_ok
        && subfamilies_checked == subfamilies_uncovered_ok;
    Ok(CoverReport {
        truncation,
        rank_cap,
        chain_length,
        chain: chain.iter().map(render_one_based).collect(),
        chain_strictly_increasing,
        piece_sizes,
        residual_size,
        universe_size,
        partition_ok,
        partition_witness,
        subfamilies_checked,
        subfamilies_uncovered_ok,
        pass,
    })
}

// ---------------------------------------------------------------------------
// Truncation-stability wrappers: run at N and 2N, compare verdicts.
// ---------------------------------------------------------------------------

#[derive(Debug, Clone, Serialize)]
pub struct Stability<R: Serialize> {
    pub at_truncation: R,
    pub at_doubled: R,
    /// Identical verdicts at both truncations.
    pub stable: bool,
}

pub fn verify_example5_stable(
    truncation: u32,
    rank: u32,
) -> Result<Stability<ZeroModelReport>, TopologyError> {
    let at_truncation = verify_example5(truncation, rank, truncation / 2)?;
    let at_doubled = verify_example5(truncation * 2, rank, truncation)?;
    let stable = at_truncation.verdict() == at_doubled.verdict();
    Ok(Stability { at_truncation, at_doubled, stable })
}

pub fn verify_example6_stable(
    truncation: u32,
    chi: &PartialInjection,
    rank_headroom: u32,
) -> Result<Stability<IdentityModelReport>, TopologyError> {
    let at_truncation = verify_example6(truncation, chi, rank_headroom)?;
    let doubled_chi = chi
        .on_ground(truncation * 2)
        .expect("doubling the ground keeps points in range");
    let at_doubled = verify_example6(truncation * 2, &doubled_chi, rank_headroom)?;
    let stable = at_truncation.verdict() == at_doubled.verdict();
    Ok(Stability { at_truncation, at_doubled, stable })
}

pub fn build_cover_theorem12_stable(
    truncation: u32,
    chain_length: u32,
    rank_cap: u32,
) -> Result<Stability<CoverReport>, TopologyError> {
    let at_truncation = build_cover_theorem12(truncation, chain_length, rank_cap)?;
    let at_doubled = build_cover_theorem12(truncation * 2, chain_length, rank_cap)?;
    let stable = at_truncation.verdict() == at_doubled.verdict();
    Ok(Stability { at_truncation, at_doubled, stable })
}
