//! Retractions onto SFTs, freeness witnesses and padded supershifts.

use std::collections::BTreeSet;
use std::sync::Arc;

use serde::Serialize;

use crate::clopen::ClopenSet;
use crate::error::{invalid, Error, Result};
use crate::group::{FiniteSet, GroupElement, GroupSpec};
use crate::language::{language, Exactness};
use crate::markers::{marker_lemma_windows, MarkerChain};
use crate::pattern::{Alphabet, Pattern};
use crate::periodic::torus_csp;
use crate::sft::SftSpec;
use crate::subgroup::{enumerate_subgroups, Subgroup};

fn check_symbol(x: &SftSpec, a: u8) -> Result<()> {
    if a as usize >= x.alphabet_size() {
        return invalid(format!("symbol index {a} is outside the alphabet"));
    }
    Ok(())
}

/// Whether writing `a` at any single site of any point of X stays in X.
///
/// A violation must create an occurrence of some forbidden p through a site u
/// with p_u = a, so it suffices that p[u ← b] is inadmissible for every b ≠ a.
/// Admissibility uses the exact language in rank ≤ 1 and local admissibility
/// in rank 2, which can only turn a true answer into a false one.
pub fn is_safe_symbol(x: &SftSpec, a: u8) -> Result<bool> {
    check_symbol(x, a)?;
    for p in x.forbidden() {
        let lang = language(x, p.support())?;
        for (i, &s) in p.values().iter().enumerate() {
            if s != a {
                continue;
            }
            for b in (0..x.alphabet_size() as u8).filter(|&b| b != a) {
                let mut vals = p.values().to_vec();
                vals[i] = b;
                if lang.table.contains(&vals) {
                    return Ok(false);
                }
            }
        }
    }
    Ok(true)
}

/// A retraction evaluated on a finite input: values where the context
/// determines them, and the sites that lacked context.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct RetractOutput {
    pub pattern: Pattern,
    pub omitted: Vec<GroupElement>,
}

/// r(y)_v = a if some forbidden occurrence covers v, else y_v.
pub fn safe_symbol_retract(x: &SftSpec, a: u8, p: &Pattern) -> Result<RetractOutput> {
    if !is_safe_symbol(x, a)? {
        return Err(Error::Precondition(format!("{} is not a safe symbol", x.alphabet().name(a))));
    }
    if let Some(&s) = p.values().iter().find(|&&s| s as usize >= x.alphabet_size()) {
        return invalid(format!("symbol index {s} is outside the alphabet"));
    }
    let spec = x.group();
    // Offsets t - v of every occurrence position t that could cover v.
    let reach: FiniteSet = FiniteSet::new(x.forbidden().iter().flat_map(|q| q.support().neg(spec).as_slice().to_vec()));
    let covered: BTreeSet<GroupElement> = x
        .occurrences(p)
        .into_iter()
        .flat_map(|(t, gi)| x.compiled()[gi].support.iter().map(|s| spec.add(&t, s)).collect::<Vec<_>>())
        .collect();
    let mut pairs = Vec::new();
    let mut omitted = Vec::new();
    for (v, s) in p.iter() {
        let full = reach.iter().all(|r| {
            let t = spec.add(v, r);
            x.window().iter().all(|w| p.get(&spec.add(&t, w)).is_some())
        });
        if !full {
            omitted.push(v.clone());
        } else if covered.contains(v) {
            pairs.push((v.clone(), a));
        } else {
            pairs.push((v.clone(), s));
        }
    }
    Ok(RetractOutput { pattern: Pattern::from_pairs(pairs)?, omitted })
}

/// Proper k-colorings for the symmetric offsets F: x_γ ≠ x_{γ+v} for v ∈ F.
pub fn coloring_shift(k: usize, f: &FiniteSet, spec: &GroupSpec) -> Result<SftSpec> {
    crate::markers::check_offsets(spec, f)?;
    if k == 0 || k > u8::MAX as usize {
        return invalid("number of colors must be between 1 and 255");
    }
    let window = f.union(&FiniteSet::new([spec.zero()]));
    let mut forbidden = Vec::new();
    for v in f {
        for c in 0..k as u8 {
            forbidden.push(Pattern::from_pairs([(spec.zero(), c), (v.clone(), c)])?);
        }
    }
    SftSpec::new(spec.clone(), Alphabet::one_based(k), window, forbidden)
}

/// A subgroup of 𝒢 with a symmetric generating set.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct FamilyMember {
    pub subgroup: Subgroup,
    pub generators: FiniteSet,
}

impl FamilyMember {
    pub fn new(spec: &GroupSpec, generators: &FiniteSet) -> Result<Self> {
        if !generators.is_symmetric(spec) {
            return invalid("generating set must be symmetric");
        }
        let subgroup = Subgroup::canonicalize(spec, generators.as_slice())?;
        Ok(FamilyMember { subgroup, generators: generators.clone() })
    }

    /// ⟨v⟩ with generators {v, −v}.
    pub fn cyclic(spec: &GroupSpec, v: &GroupElement) -> Result<Self> {
        FamilyMember::new(spec, &FiniteSet::new([v.clone(), spec.neg(v)]))
    }

    /// Generators of the subgroup's canonical form, closed under negation.
    pub fn from_subgroup(h: &Subgroup) -> Result<Self> {
        let spec = h.spec();
        let gens: Vec<GroupElement> = h.generators().into_iter().flat_map(|g| [spec.neg(&g), g]).collect();
        FamilyMember::new(spec, &FiniteSet::new(gens))
    }

    /// Some generator γ and u ∈ K with u + γ ∈ K and w_u ≠ w_{u+γ}.
    pub fn broken_by(&self, spec: &GroupSpec, k: &FiniteSet, w: &[u8]) -> bool {
        self.generators.iter().any(|g| {
            k.iter().enumerate().any(|(i, u)| k.index_of(&spec.add(u, g)).is_some_and(|j| w[i] != w[j]))
        })
    }
}

/// Result of searching for a window that witnesses 𝒢-freeness.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub enum GFreeVerdict {
    /// Every admissible pattern on the window breaks every member.
    Free { window: FiniteSet, exactness: Exactness },
    /// A pattern on the largest window tried that no generator of `member`
    /// breaks. `genuine` is set when X has a point fixed by that subgroup.
    Periodic { member: usize, pattern: Pattern, genuine: bool },
}

/// Whether X has a point fixed by Γ0, through finite-index subgroups
/// Γ0 + nZ^d with n ≤ 3.
fn has_periodic_point(x: &SftSpec, h: &Subgroup) -> Result<bool> {
    let spec = x.group();
    for n in 1..=3 {
        let mut gens = h.generators();
        gens.extend((0..spec.rank()).map(|i| spec.scale(n, &spec.unit(i))));
        let k = Subgroup::canonicalize(spec, &gens)?;
        if torus_csp(x, &k)?.first().is_some() {
            return Ok(true);
        }
    }
    Ok(false)
}

/// Smallest box {0..m}^d × G (m ≤ `max_window`) witnessing 𝒢-freeness.
pub fn gfree_witness(x: &SftSpec, family: &[FamilyMember], max_window: i64) -> Result<GFreeVerdict> {
    let spec = x.group();
    for m in family {
        if m.subgroup.spec() != spec {
            return invalid("family member lives in a different group");
        }
    }
    let mut survivor = None;
    for size in 0..=max_window {
        let k = spec.corner_box(size);
        let lang = language(x, &k)?;
        let rows: Vec<&[u8]> = lang.table.rows().collect();
        let found = crate::par::find_first(rows.len(), |i| {
            family.iter().position(|m| !m.broken_by(spec, &k, rows[i])).map(|mi| (mi, rows[i].to_vec()))
        });
        match found {
            None => return Ok(GFreeVerdict::Free { window: k, exactness: lang.exactness }),
            Some((_, (mi, w))) => survivor = Some((mi, Pattern::new(k, w)?)),
        }
    }
    let Some((member, pattern)) = survivor else {
        return invalid("window size must be nonnegative");
    };
    let genuine = has_periodic_point(x, &family[member].subgroup)?;
    Ok(GFreeVerdict::Periodic { member, pattern, genuine })
}

/// Upper bound on enumerated (K + D)-patterns in [`build_padded`].
pub const PADDED_BUDGET: u128 = 1 << 20;

/// Y^(K,D): a (K + D)-pattern is forbidden iff none of its D-translated
/// K-subpatterns is in 𝓛_K(Y).
pub fn build_padded(y: &SftSpec, k: &FiniteSet, d: &FiniteSet) -> Result<(SftSpec, Exactness)> {
    if k.is_empty() || d.is_empty() {
        return invalid("K and D must be nonempty");
    }
    let spec = y.group();
    let window = k.sum(spec, d);
    let alpha = y.alphabet_size();
    let total = (alpha as u128).checked_pow(window.len() as u32).unwrap_or(u128::MAX);
    if total > PADDED_BUDGET {
        return Err(Error::Budget(format!("{total} patterns on K + D")));
    }
    let lang = language(y, k)?;
    let index: Vec<Vec<usize>> = d
        .iter()
        .map(|w| k.iter().map(|u| window.index_of(&spec.add(u, w)).expect("in K + D")).collect())
        .collect();
    let forbidden_rows: Vec<Vec<u8>> = crate::par::map_range(total as usize, |mut c| {
        let mut word = vec![0u8; window.len()];
        for s in word.iter_mut().rev() {
            *s = (c % alpha) as u8;
            c /= alpha;
        }
        let ok = index.iter().any(|idx| {
            let sub: Vec<u8> = idx.iter().map(|&i| word[i]).collect();
            lang.table.contains(&sub)
        });
        (!ok).then_some(word)
    })
    .into_iter()
    .flatten()
    .collect();
    let forbidden = forbidden_rows.into_iter().map(|r| Pattern::new(window.clone(), r)).collect::<Result<Vec<_>>>()?;
    Ok((SftSpec::new(spec.clone(), y.alphabet().clone(), window, forbidden)?, lang.exactness))
}

/// One row of the stabilizer-compatibility table.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct SquigRow {
    pub subgroup: Subgroup,
    pub source_nonempty: bool,
    pub target_nonempty: bool,
}

impl SquigRow {
    pub fn passed(&self) -> bool {
        !self.source_nonempty || self.target_nonempty
    }
}

/// For every Γ0 of index ≤ `max_index` with X_[Γ0] ≠ ∅, whether Y_[Γ0] ≠ ∅.
/// A necessary condition only.
pub fn squig_check(x: &SftSpec, y: &SftSpec, max_index: u64) -> Result<Vec<SquigRow>> {
    if x.group() != y.group() {
        return invalid("source and target live on different groups");
    }
    if x.group().rank() > 2 {
        return Err(Error::Unsupported("compatibility tables need rank ≤ 2".into()));
    }
    let subs = enumerate_subgroups(max_index, x.group())?;
    crate::par::map(&subs, |h| {
        Ok(SquigRow {
            subgroup: h.clone(),
            source_nonempty: torus_csp(x, h)?.first().is_some(),
            target_nonempty: torus_csp(y, h)?.first().is_some(),
        })
    })
    .into_iter()
    .collect()
}

/// Candidate marker windows for P: {0} ∪ P⁺ (the elements above 0), {0} ∪ P,
/// then boxes of growing radius.
pub fn marker_windows(spec: &GroupSpec, p: &FiniteSet, max_radius: i64) -> Result<Vec<FiniteSet>> {
    let zero = spec.zero();
    let mut out = vec![
        FiniteSet::new(std::iter::once(zero.clone()).chain(p.iter().filter(|g| **g > zero).cloned())),
        p.union(&FiniteSet::new([zero])),
    ];
    for m in 1..=max_radius {
        out.push(spec.make_box(m)?);
    }
    Ok(out)
}

/// The k-coloring retraction r = r̃^(|F|) ∘ … ∘ r̃^(0) built on a marker set
/// for P = F in a 𝒢-free superset X of the proper colorings.
#[derive(Clone, Debug)]
pub struct ColoringRetraction {
    pub k: usize,
    pub offsets: FiniteSet,
    /// F ∪ {0} in canonical order: v_0, …, v_|F|.
    pub order: Vec<GroupElement>,
    pub chain: MarkerChain,
    pub freeness: FiniteSet,
}

impl ColoringRetraction {
    /// Checks k > |F|, X_{k,F} ⊆ X and 𝒢-freeness, then builds the markers.
    pub fn new(k: usize, f: &FiniteSet, x: Arc<SftSpec>, max_window: i64) -> Result<Self> {
        let spec = x.group().clone();
        crate::markers::check_offsets(&spec, f)?;
        if k <= f.len() {
            return Err(Error::Precondition(format!("k = {k} must exceed |F| = {}", f.len())));
        }
        if x.alphabet_size() < k {
            return Err(Error::Precondition("the superset needs the k colors as its first symbols".into()));
        }
        let target = coloring_shift(k, f, &spec)?;
        for q in x.forbidden() {
            // With k > |F| greedy filling extends every locally proper pattern,
            // so this is exactly "q occurs in no proper coloring".
            let proper = q.values().iter().all(|&s| (s as usize) < k) && target.is_locally_admissible(q)?;
            if proper {
                return Err(Error::Precondition(format!("forbidden pattern {q} occurs in a proper coloring")));
            }
        }
        let family: Vec<FamilyMember> =
            f.iter().filter(|v| **v > spec.zero()).map(|v| FamilyMember::cyclic(&spec, v)).collect::<Result<_>>()?;
        let freeness = match gfree_witness(&x, &family, max_window)? {
            GFreeVerdict::Free { window, .. } => window,
            GFreeVerdict::Periodic { member, pattern, .. } => {
                return Err(Error::Witness {
                    reason: format!("the superset is not free for {}", family[member].subgroup),
                    pattern,
                })
            }
        };
        let whole = ClopenSet::whole(x)?;
        let chain = marker_lemma_windows(&whole, f, &marker_windows(&spec, f, max_window)?)?;
        let mut order: Vec<GroupElement> = f.iter().cloned().collect();
        order.push(spec.zero());
        order.sort();
        Ok(ColoringRetraction { k, offsets: f.clone(), order, chain, freeness })
    }

    /// Evaluates r on a finite input; sites whose value depends on symbols
    /// outside the input are omitted.
    pub fn apply(&self, p: &Pattern) -> Result<RetractOutput> {
        let spec = self.chain.ambient.group();
        let sites = p.support();
        let marks = self.chain.marks_on(p);
        let mark_at = |g: &GroupElement| sites.index_of(g).and_then(|i| marks[i]);
        let mut t: Vec<Option<usize>> = Vec::with_capacity(sites.len());
        for v in sites {
            let mut tv = None;
            for (j, vj) in self.order.iter().enumerate() {
                match mark_at(&spec.add(v, vj)) {
                    None => break,
                    Some(true) => {
                        tv = Some(j);
                        break;
                    }
                    Some(false) if j + 1 == self.order.len() => {
                        return Err(Error::Inconclusive(format!("site {v} is not covered by the markers")));
                    }
                    Some(false) => {}
                }
            }
            t.push(tv);
        }
        let neighbours: Vec<Vec<Option<usize>>> =
            sites.iter().map(|v| self.offsets.iter().map(|f| sites.index_of(&spec.add(v, f))).collect()).collect();
        let mut values: Vec<Option<u8>> =
            p.values().iter().zip(&t).map(|(&s, tv)| tv.map(|_| s)).collect();
        for j in 0..self.order.len() {
            let snapshot = values.clone();
            for i in 0..sites.len() {
                let (Some(c), Some(tj)) = (snapshot[i], t[i]) else { continue };
                if tj != j {
                    continue;
                }
                let seen: Option<Vec<u8>> = neighbours[i].iter().map(|n| n.and_then(|n| snapshot[n])).collect();
                values[i] = seen.map(|b| {
                    if (c as usize) < self.k && !b.contains(&c) {
                        c
                    } else {
                        (0..self.k as u8).find(|s| !b.contains(s)).expect("k exceeds |F|")
                    }
                });
            }
        }
        let mut pairs = Vec::new();
        let mut omitted = Vec::new();
        for (v, val) in sites.iter().zip(values) {
            match val {
                Some(s) => pairs.push((v.clone(), s)),
                None => omitted.push(v.clone()),
            }
        }
        Ok(RetractOutput { pattern: Pattern::from_pairs(pairs)?, omitted })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::sft::library::*;

    fn pm1() -> FiniteSet {
        FiniteSet::from_ints([-1, 1])
    }

    /// Z, k symbols, no symbol three times in a row.
    fn no_triples(k: usize) -> SftSpec {
        let forbidden = (0..k as u8).map(|c| Pattern::word(0, &[c, c, c])).collect();
        SftSpec::new(GroupSpec::free(1), Alphabet::one_based(k), FiniteSet::from_ints(0..3), forbidden).unwrap()
    }

    #[test]
    fn safe_symbols() {
        assert!(is_safe_symbol(&hard_square(), 0).unwrap());
        assert!(!is_safe_symbol(&hard_square(), 1).unwrap());
        assert!(!is_safe_symbol(&golden_mean(), 1).unwrap());
        assert!(is_safe_symbol(&golden_mean(), 0).unwrap());
        assert!(is_safe_symbol(&full_shift(1, 3), 2).unwrap());
        assert!(is_safe_symbol(&golden_mean(), 2).is_err());
    }

    #[test]
    fn safe_retract_examples() {
        let out = safe_symbol_retract(&golden_mean(), 0, &Pattern::digits(0, "0110")).unwrap();
        assert_eq!(out.pattern, Pattern::digits(1, "00"));
        let out = safe_symbol_retract(&golden_mean(), 0, &Pattern::digits(0, "01001")).unwrap();
        assert_eq!(out.pattern, Pattern::digits(1, "100"));
        let ones = Pattern::grid(&["111", "111", "111"]);
        let out = safe_symbol_retract(&hard_square(), 0, &ones).unwrap();
        assert_eq!(out.pattern.values(), &[0]);
        assert_eq!(out.omitted.len(), 8);
    }

    #[test]
    fn coloring_shift_counts() {
        let x = coloring_shift(3, &pm1(), &GroupSpec::free(1)).unwrap();
        assert_eq!(language(&x, &FiniteSet::from_ints([0, 1])).unwrap().len(), 6);
        let x = coloring_shift(1, &pm1(), &GroupSpec::free(1)).unwrap();
        assert!(language(&x, &FiniteSet::from_ints([0])).unwrap().is_empty());
        assert!(coloring_shift(3, &FiniteSet::from_ints([1]), &GroupSpec::free(1)).is_err());
    }

    #[test]
    fn gfree_examples() {
        let z = GroupSpec::free(1);
        let one = [FamilyMember::cyclic(&z, &z.unit(0)).unwrap()];
        let col = coloring_shift(3, &pm1(), &z).unwrap();
        assert_eq!(
            gfree_witness(&col, &one, 4).unwrap(),
            GFreeVerdict::Free { window: FiniteSet::from_ints([0, 1]), exactness: Exactness::Exact }
        );
        match gfree_witness(&golden_mean(), &one, 4).unwrap() {
            GFreeVerdict::Periodic { pattern, genuine, .. } => {
                assert!(genuine && pattern.values().iter().all(|&s| s == 0))
            }
            v => panic!("{v:?}"),
        }
        let z2 = GroupSpec::free(2);
        let e1 = [FamilyMember::cyclic(&z2, &z2.unit(0)).unwrap()];
        match gfree_witness(&hard_square(), &e1, 2).unwrap() {
            GFreeVerdict::Periodic { pattern, genuine, .. } => {
                assert!(genuine && pattern.values().iter().all(|&s| s == 0))
            }
            v => panic!("{v:?}"),
        }
    }

    #[test]
    fn padded_golden_mean() {
        let k = FiniteSet::from_ints([0, 1]);
        let (padded, _) = build_padded(&golden_mean(), &k, &k).unwrap();
        let w = FiniteSet::from_ints(0..4);
        assert!(language(&padded, &w).unwrap().table.contains(&[0, 1, 1, 0]));
        assert!(!language(&golden_mean(), &w).unwrap().table.contains(&[0, 1, 1, 0]));
        let (same, _) = build_padded(&golden_mean(), &k, &FiniteSet::from_ints([0])).unwrap();
        assert_eq!(language(&same, &k).unwrap().table, language(&golden_mean(), &k).unwrap().table);
        let fs = full_shift(1, 2);
        let (p, _) = build_padded(&fs, &k, &k).unwrap();
        assert!(p.forbidden().is_empty());
    }

    #[test]
    fn squig_tables() {
        let rows = squig_check(&golden_mean(), &full_shift(1, 2), 4).unwrap();
        assert!(rows.iter().all(SquigRow::passed));
        let col = coloring_shift(3, &pm1(), &GroupSpec::free(1)).unwrap();
        let rows = squig_check(&golden_mean(), &col, 4).unwrap();
        let z = Subgroup::whole(&GroupSpec::free(1));
        assert!(!rows.iter().find(|r| r.subgroup == z).unwrap().passed());
    }

    #[test]
    fn coloring_retraction_1d() {
        let r = ColoringRetraction::new(3, &pm1(), Arc::new(no_triples(3)), 3).unwrap();
        let proper = Pattern::digits(0, "010101010101010101010101");
        let out = r.apply(&proper).unwrap();
        assert!(!out.pattern.is_empty());
        assert_eq!(out.pattern, proper.restrict(out.pattern.support()).unwrap());
        let messy = Pattern::digits(0, "0110210011022001120221100");
        let out = r.apply(&messy).unwrap();
        let target = coloring_shift(3, &pm1(), &GroupSpec::free(1)).unwrap();
        assert!(!out.pattern.is_empty() && target.is_locally_admissible(&out.pattern).unwrap());
        let again = r.apply(&out.pattern).unwrap();
        assert_eq!(again.pattern, out.pattern.restrict(again.pattern.support()).unwrap());
        assert!(matches!(
            ColoringRetraction::new(2, &pm1(), Arc::new(no_triples(3)), 3),
            Err(Error::Precondition(_))
        ));
    }
}
