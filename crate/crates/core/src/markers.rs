//! Marker sets: merging clopen P-markers and the marker lemma.
//!
//! The lemma covers V by cylinders [p] over one window K, each a P-marker, and
//! merges them in pattern order with C ← C ∪ (D \ ⋃_{γ∈P} σ_γ(C)). Cylinders
//! over one window are disjoint, so along an orbit the merges amount to a
//! greedy choice: a site with pattern p_j is marked iff no site at offset in P
//! carrying an earlier pattern was marked. [`MarkerChain`] evaluates exactly
//! that rule; [`MarkerChain::materialize`] performs the merges as clopen sets.

use std::collections::HashMap;
use std::sync::Arc;

use serde::Serialize;

use crate::clopen::ClopenSet;
use crate::error::{invalid, Error, Result};
use crate::group::{FiniteSet, GroupElement, GroupSpec};
use crate::language::language;
use crate::pattern::{Pattern, PatternTable};
use crate::sft::SftSpec;

/// Rejects offset sets that are not symmetric or contain 0.
pub fn check_offsets(spec: &GroupSpec, p: &FiniteSet) -> Result<()> {
    for g in p {
        spec.check(g)?;
    }
    if p.contains(&spec.zero()) {
        return invalid("offset set contains 0");
    }
    if !p.is_symmetric(spec) {
        return invalid("offset set is not symmetric");
    }
    Ok(())
}

/// A ∩ σ_γ(A) = ∅ for every γ ∈ P.
pub fn is_marker(a: &ClopenSet, p: &FiniteSet) -> Result<bool> {
    for g in p {
        if !a.intersection(&a.shift(g))?.is_empty() {
            return Ok(false);
        }
    }
    Ok(true)
}

/// ⋃_{γ ∈ P} σ_γ(A).
pub fn shifted_union(a: &ClopenSet, p: &FiniteSet) -> Result<ClopenSet> {
    let mut acc = ClopenSet::empty(a.ambient().clone());
    for g in p {
        acc = acc.union(&a.shift(g))?;
    }
    Ok(acc)
}

/// C = A ∪ (B \ ⋃_{γ∈P} σ_γ(A)), with every postcondition re-checked.
pub fn merge_markers(a: &ClopenSet, b: &ClopenSet, p: &FiniteSet) -> Result<ClopenSet> {
    check_offsets(a.ambient().group(), p)?;
    if !is_marker(a, p)? {
        return Err(Error::Precondition("first set is not a P-marker".into()));
    }
    if !is_marker(b, p)? {
        return Err(Error::Precondition("second set is not a P-marker".into()));
    }
    let c = a.union(&b.difference(&shifted_union(a, p)?)?)?;
    let c_cover = c.union(&shifted_union(&c, p)?)?;
    let ok = is_marker(&c, p)? && a.is_subset(&c)? && b.is_subset(&c_cover)? && c.is_subset(&a.union(b)?)?;
    if !ok {
        return Err(Error::Inconclusive("merged set failed a postcondition".into()));
    }
    Ok(c)
}

/// Cylinders of the lemma's cover, in merge order.
#[derive(Clone, Debug, Serialize)]
pub struct MarkerChain {
    #[serde(skip)]
    pub ambient: Arc<SftSpec>,
    pub window: FiniteSet,
    pub patterns: PatternTable,
    pub offsets: FiniteSet,
}

/// Three-valued answer to "is this site marked": `None` when the available
/// context does not determine it.
pub type Mark = Option<bool>;

impl MarkerChain {
    fn index_at(&self, lookup: &dyn Fn(&GroupElement) -> Option<u8>, v: &GroupElement) -> Option<Option<usize>> {
        let spec = self.ambient.group();
        let mut word = Vec::with_capacity(self.window.len());
        for w in &self.window {
            word.push(lookup(&spec.add(v, w))?);
        }
        Some(self.patterns.position(&word))
    }

    fn marked(
        &self,
        lookup: &dyn Fn(&GroupElement) -> Option<u8>,
        v: &GroupElement,
        memo: &mut HashMap<GroupElement, Mark>,
    ) -> Mark {
        if let Some(&m) = memo.get(v) {
            return m;
        }
        let spec = self.ambient.group();
        let result = match self.index_at(lookup, v) {
            None => None,
            Some(None) => Some(false),
            Some(Some(j)) => {
                let mut unknown = false;
                let mut blocked = false;
                for g in &self.offsets {
                    let u = spec.add(v, g);
                    match self.index_at(lookup, &u) {
                        None => unknown = true,
                        Some(Some(i)) if i < j => match self.marked(lookup, &u, memo) {
                            Some(true) => {
                                blocked = true;
                                break;
                            }
                            Some(false) => {}
                            None => unknown = true,
                        },
                        Some(_) => {}
                    }
                }
                if blocked {
                    Some(false)
                } else if unknown {
                    None
                } else {
                    Some(true)
                }
            }
        };
        memo.insert(v.clone(), result);
        result
    }

    /// α at each site of `sites` for the configuration read through `lookup`.
    pub fn marks(&self, lookup: &dyn Fn(&GroupElement) -> Option<u8>, sites: &FiniteSet) -> Vec<Mark> {
        let mut memo = HashMap::new();
        sites.iter().map(|v| self.marked(lookup, v, &mut memo)).collect()
    }

    /// Marks at the sites of a finite pattern.
    pub fn marks_on(&self, p: &Pattern) -> Vec<Mark> {
        self.marks(&|g| p.get(g), p.support())
    }

    /// Runs the merges explicitly, returning C as a clopen set.
    pub fn materialize(&self) -> Result<ClopenSet> {
        let mut c = ClopenSet::empty(self.ambient.clone());
        for row in self.patterns.rows() {
            let d = ClopenSet::from_patterns(self.ambient.clone(), self.window.clone(), [row.to_vec()])?;
            c = merge_markers(&c, &d, &self.offsets)?;
        }
        Ok(c)
    }
}

/// Builds the cylinder cover of V and the chain of merges, with windows
/// K = window(V) ∪ B_m for m = 0..=`max_radius`.
pub fn marker_lemma(v: &ClopenSet, p: &FiniteSet, max_radius: i64) -> Result<MarkerChain> {
    let spec = v.ambient().group();
    let windows = (0..=max_radius).map(|m| spec.make_box(m)).collect::<Result<Vec<_>>>()?;
    marker_lemma_windows(v, p, &windows)
}

/// As [`marker_lemma`] over the windows K = window(V) ∪ S for S in `windows`.
///
/// The first K on which no V-pattern is consistent with its own γ-shift for
/// any γ ∈ P is used; otherwise such a pattern from the last K is returned as
/// the witness of a P-periodic point.
pub fn marker_lemma_windows(v: &ClopenSet, p: &FiniteSet, windows: &[FiniteSet]) -> Result<MarkerChain> {
    let x = v.ambient().clone();
    let spec = x.group().clone();
    check_offsets(&spec, p)?;
    let mut witness: Option<(Pattern, GroupElement)> = None;
    for s in windows {
        let k = v.window().union(s);
        let vk = v.refine(&k)?;
        let mut bad: Vec<(Vec<u8>, GroupElement)> = Vec::new();
        for g in p {
            let shifted = k.translate(&spec, &spec.neg(g));
            let joint = k.union(&shifted);
            let lang = language(&x, &joint)?;
            let on_k: Vec<usize> = k.iter().map(|s| joint.index_of(s).expect("in joint")).collect();
            // σ_γ[p] asks for value p_s at s − γ.
            let on_shift: Vec<usize> =
                k.iter().map(|s| joint.index_of(&spec.sub(s, g)).expect("in joint")).collect();
            for r in lang.table.rows() {
                let a: Vec<u8> = on_k.iter().map(|&i| r[i]).collect();
                if on_shift.iter().zip(&a).all(|(&i, &s)| r[i] == s) && vk.allowed().contains(&a) {
                    bad.push((a, g.clone()));
                }
            }
        }
        if bad.is_empty() {
            return Ok(MarkerChain { ambient: x, window: k, patterns: vk.allowed().clone(), offsets: p.clone() });
        }
        bad.sort();
        let (vals, g) = bad.swap_remove(0);
        witness = Some((Pattern::new(k, vals)?, g));
    }
    let Some((pattern, g)) = witness else {
        return invalid("no marker windows given");
    };
    Err(Error::Witness { reason: format!("V contains a pattern fixed by the shift {g}"), pattern })
}

/// Outcome of checking a marker chain on every pattern of a window.
#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize)]
pub struct MarkerWindowReport {
    pub patterns_checked: usize,
    pub sites_decided: usize,
    pub separation_violations: usize,
    pub covering_violations: usize,
    pub outside_v_marks: usize,
}

impl MarkerWindowReport {
    pub fn passed(&self) -> bool {
        self.separation_violations == 0 && self.covering_violations == 0 && self.outside_v_marks == 0
    }
}

/// Exhaustive check on all language patterns of `window`: no two decided marks
/// differ by an element of P, marks lie in V, and every decided V-site has a
/// decided mark in its (P ∪ {0})-neighbourhood.
pub fn verify_marker_window(chain: &MarkerChain, v: &ClopenSet, window: &FiniteSet) -> Result<MarkerWindowReport> {
    let x = chain.ambient.clone();
    let spec = x.group();
    let lang = language(&x, window)?;
    let rows: Vec<&[u8]> = lang.table.rows().collect();
    let per_row: Vec<MarkerWindowReport> = crate::par::map(&rows, |r| {
        let lookup = |g: &GroupElement| window.index_of(g).map(|i| r[i]);
        let marks = chain.marks(&lookup, window);
        let mut rep = MarkerWindowReport { patterns_checked: 1, ..Default::default() };
        let mark_of = |g: &GroupElement| window.index_of(g).and_then(|i| marks[i]);
        for (i, s) in window.iter().enumerate() {
            if marks[i].is_some() {
                rep.sites_decided += 1;
            }
            let in_v = v.contains_at(|w| lookup(&spec.add(s, w)));
            if marks[i] == Some(true) {
                if in_v == Some(false) {
                    rep.outside_v_marks += 1;
                }
                for g in &chain.offsets {
                    if mark_of(&spec.add(s, g)) == Some(true) {
                        rep.separation_violations += 1;
                    }
                }
            }
            if in_v == Some(true) {
                let hood: Vec<Mark> =
                    std::iter::once(marks[i]).chain(chain.offsets.iter().map(|g| mark_of(&spec.add(s, g)))).collect();
                if hood.iter().all(|m| m.is_some()) && !hood.contains(&Some(true)) {
                    rep.covering_violations += 1;
                }
            }
        }
        rep
    });
    Ok(per_row.into_iter().fold(MarkerWindowReport::default(), |a, b| MarkerWindowReport {
        patterns_checked: a.patterns_checked + b.patterns_checked,
        sites_decided: a.sites_decided + b.sites_decided,
        separation_violations: a.separation_violations + b.separation_violations,
        covering_violations: a.covering_violations + b.covering_violations,
        outside_v_marks: a.outside_v_marks + b.outside_v_marks,
    }))
}

/// Both conclusions of the lemma for a materialized C, via the clopen algebra:
/// C ⊆ V, C ∩ σ_γ(C) = ∅ for γ ∈ P, and V ⊆ C ∪ ⋃ σ_γ(C).
pub fn verify_marker_set(c: &ClopenSet, v: &ClopenSet, p: &FiniteSet) -> Result<bool> {
    let cover = c.union(&shifted_union(c, p)?)?;
    Ok(c.is_subset(v)? && is_marker(c, p)? && v.is_subset(&cover)?)
}
