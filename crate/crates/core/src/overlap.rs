//! Patterns without self-overlaps and substitution of marked occurrences.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};
use crate::group::{FiniteSet, GroupElement, GroupSpec};
use crate::language::{language, support_csp};
use crate::par;
use crate::pattern::Pattern;
use crate::periodic::kernel_of;
use crate::sft::SftSpec;
use crate::subgroup::Subgroup;

/// Does w agree with itself shifted by v, i.e. w_u = w_{u+v} whenever both sites lie in the support?
pub fn has_self_overlap(spec: &GroupSpec, w: &Pattern, v: &GroupElement) -> bool {
    w.iter().all(|(u, s)| w.get(&spec.add(u, v)).map_or(true, |t| t == s))
}

/// All v ∈ `range` at which `w` has a self-overlap.
pub fn self_overlaps(spec: &GroupSpec, w: &Pattern, range: &FiniteSet) -> FiniteSet {
    let hits = par::map(range.as_slice(), |v| has_self_overlap(spec, w, v));
    FiniteSet::new(range.iter().zip(hits).filter(|(_, h)| *h).map(|(v, _)| v.clone()))
}

/// Self-overlaps of `w` in B_n that are neither 0 nor in `kernel`.
pub fn overlap_violations(spec: &GroupSpec, w: &Pattern, n: i64, kernel: &Subgroup) -> Result<FiniteSet> {
    let ball = spec.make_box(n)?;
    let found = self_overlaps(spec, w, &ball);
    Ok(FiniteSet::new(found.iter().filter(|v| !v.is_zero() && !kernel.contains(v)).cloned()))
}

/// A Q_n-pattern certified free of self-overlaps in B_n outside the kernel.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct OverlapFreePattern {
    pub n: i64,
    pub pattern: Pattern,
    pub kernel: Subgroup,
    pub seed: u64,
    /// Index of the successful attempt, counted from 0.
    pub attempt: usize,
    pub block_radius: i64,
    pub net: FiniteSet,
}

pub const MAX_ATTEMPTS: usize = 4096;
const BATCH: usize = 64;
const SAMPLE_STEPS: usize = 1 << 16;

/// Sites v of `q` with v + B_m ⊆ q, chosen greedily in canonical order so the blocks are disjoint.
fn planting_net(spec: &GroupSpec, q: &FiniteSet, m: i64) -> Result<FiniteSet> {
    let block = spec.make_box(m)?;
    let mut used = FiniteSet::empty();
    let mut net = Vec::new();
    for v in q {
        let b = block.translate(spec, v);
        if b.is_subset(q) && b.intersection(&used).is_empty() {
            used = used.union(&b);
            net.push(v.clone());
        }
    }
    Ok(FiniteSet::new(net))
}

/// Randomized block planting on Q_n with deterministic verification.
///
/// Attempt `i` draws from a ChaCha stream keyed by (`seed`, `i`); attempts run
/// in parallel batches and the least successful index wins.
pub fn find_overlap_free_pattern(y: &SftSpec, n: i64, seed: u64) -> Result<OverlapFreePattern> {
    let spec = y.group();
    if spec.rank() == 0 {
        return Err(Error::Unsupported("Q_n is empty for a finite group".into()));
    }
    if n < 1 {
        return invalid(format!("annulus radius {n} must be positive"));
    }
    let symbols = language(y, &FiniteSet::new([spec.zero()]))?;
    if symbols.is_empty() {
        return Err(Error::Precondition("the subshift is empty".into()));
    }
    if symbols.len() == 1 {
        return Err(Error::Precondition(
            "the subshift is a single fixed point, so every pattern overlaps itself at every shift".into(),
        ));
    }
    let kernel = kernel_of(y, n)?.kernel;
    let q = spec.make_annulus(n)?;
    let m = (n / 4).clamp(1, 2);
    let net = planting_net(spec, &q, m)?;
    let block = spec.make_box(m)?;
    let blocks = language(y, &block)?;
    if blocks.is_empty() {
        return Err(Error::Precondition("the subshift has no admissible blocks".into()));
    }
    let base = support_csp(y, &q);

    let attempt = |i: usize| -> Option<Pattern> {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        rng.set_stream(i as u64);
        let mut csp = base.clone();
        for v in &net {
            let row = blocks.table.row(rng.gen_range(0..blocks.len()));
            for (b, &s) in block.iter().zip(row) {
                let site = q.index_of(&spec.add(v, b)).expect("net blocks lie in Q_n");
                csp.restrict_domain(site, vec![s]);
            }
        }
        let values = csp.sample(&mut rng, SAMPLE_STEPS)?;
        let w = Pattern::new(q.clone(), values).ok()?;
        match overlap_violations(spec, &w, n, &kernel) {
            Ok(bad) if bad.is_empty() => Some(w),
            _ => None,
        }
    };

    let mut start = 0;
    while start < MAX_ATTEMPTS {
        let len = BATCH.min(MAX_ATTEMPTS - start);
        if let Some((j, w)) = par::find_first(len, |j| attempt(start + j)) {
            return Ok(OverlapFreePattern {
                n,
                pattern: w,
                kernel,
                seed,
                attempt: start + j,
                block_radius: m,
                net,
            });
        }
        start += len;
    }
    Err(Error::Exhausted { attempts: MAX_ATTEMPTS })
}

/// Independent re-check of a search result: support, admissibility and overlaps.
pub fn verify_overlap_free(y: &SftSpec, r: &OverlapFreePattern) -> Result<bool> {
    let spec = y.group();
    Ok(r.pattern.support() == &spec.make_annulus(r.n)?
        && y.is_locally_admissible(&r.pattern)?
        && overlap_violations(spec, &r.pattern, r.n, &r.kernel)?.is_empty())
}

/// Positions t with `y` restricted to t + supp(w) equal to w moved to t.
pub fn occurrences(spec: &GroupSpec, y: &Pattern, w: &Pattern) -> Vec<GroupElement> {
    let Some(s0) = w.support().first() else { return Vec::new() };
    y.support()
        .iter()
        .map(|site| spec.sub(site, s0))
        .filter(|t| w.iter().all(|(u, s)| y.get(&spec.add(t, u)) == Some(s)))
        .collect()
}

/// Replaces every occurrence of `w_from` at a position t with z_t = 1 by `w_to`.
pub fn substitute_at_marks(
    spec: &GroupSpec,
    y: &Pattern,
    z: &Pattern,
    w_from: &Pattern,
    w_to: &Pattern,
) -> Result<Pattern> {
    if w_from.support() != w_to.support() {
        return invalid("substituted patterns must share a support");
    }
    let marked: Vec<GroupElement> =
        occurrences(spec, y, w_from).into_iter().filter(|t| z.get(t) == Some(1)).collect();
    let mut covered = FiniteSet::empty();
    for t in &marked {
        let s = w_from.support().translate(spec, t);
        if !s.intersection(&covered).is_empty() {
            return Err(Error::Precondition(format!("marked occurrence at {t} overlaps another one")));
        }
        covered = covered.union(&s);
    }
    let mut values = y.values().to_vec();
    for t in &marked {
        for (u, s) in w_to.iter() {
            let i = y.support().index_of(&spec.add(t, u)).expect("occurrence lies in the window");
            values[i] = s;
        }
    }
    Pattern::new(y.support().clone(), values)
}
