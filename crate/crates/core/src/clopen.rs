//! Clopen subsets of an SFT as unions of cylinders over a common window.
//!
//! Emptiness and inclusion are decided on the computed language: exactly for
//! rank ≤ 1, and on locally admissible patterns otherwise, where "empty" is
//! still sound but "nonempty" may be an artifact of the approximation.

use std::sync::Arc;

use crate::error::{invalid, Result};
use crate::group::{FiniteSet, GroupElement};
use crate::language::{language, Exactness};
use crate::pattern::{Pattern, PatternTable};
use crate::sft::SftSpec;

#[derive(Clone, Debug)]
pub struct ClopenSet {
    ambient: Arc<SftSpec>,
    window: FiniteSet,
    allowed: PatternTable,
    exactness: Exactness,
}

/// Row permutation mapping values on `from` to values on `to`, where
/// `to[i] + offset` is an element of `from`.
fn reindex(from: &FiniteSet, to: &FiniteSet, spec: &crate::group::GroupSpec, offset: &GroupElement) -> Vec<usize> {
    to.iter().map(|s| from.index_of(&spec.add(s, offset)).expect("translated site")).collect()
}

impl ClopenSet {
    /// The union of cylinders [p] for p in `patterns`, all supported on `window`.
    pub fn from_patterns(
        ambient: Arc<SftSpec>,
        window: FiniteSet,
        patterns: impl IntoIterator<Item = Vec<u8>>,
    ) -> Result<Self> {
        for g in &window {
            ambient.group().check(g)?;
        }
        let lang = language(&ambient, &window)?;
        let rows: Vec<Vec<u8>> = patterns.into_iter().filter(|r| lang.table.contains(r)).collect();
        let allowed = PatternTable::from_rows(window.len(), rows);
        Ok(ClopenSet { ambient, window, allowed, exactness: lang.exactness })
    }

    pub fn cylinder(ambient: Arc<SftSpec>, p: &Pattern) -> Result<Self> {
        ClopenSet::from_patterns(ambient, p.support().clone(), [p.values().to_vec()])
    }

    pub fn whole(ambient: Arc<SftSpec>) -> Result<Self> {
        let window = FiniteSet::new([ambient.group().zero()]);
        let lang = language(&ambient, &window)?;
        Ok(ClopenSet { ambient, window, allowed: lang.table, exactness: lang.exactness })
    }

    pub fn empty(ambient: Arc<SftSpec>) -> Self {
        let window = FiniteSet::new([ambient.group().zero()]);
        ClopenSet { ambient, window, allowed: PatternTable::new(1), exactness: Exactness::Exact }
    }

    pub fn ambient(&self) -> &Arc<SftSpec> {
        &self.ambient
    }

    pub fn window(&self) -> &FiniteSet {
        &self.window
    }

    pub fn allowed(&self) -> &PatternTable {
        &self.allowed
    }

    pub fn exactness(&self) -> Exactness {
        self.exactness
    }

    pub fn patterns(&self) -> impl Iterator<Item = Pattern> + '_ {
        self.allowed.rows().map(|r| Pattern::new(self.window.clone(), r.to_vec()).expect("row width"))
    }

    fn check_ambient(&self, other: &ClopenSet) -> Result<()> {
        if Arc::ptr_eq(&self.ambient, &other.ambient) || *self.ambient == *other.ambient {
            Ok(())
        } else {
            invalid("clopen sets live in different subshifts")
        }
    }

    /// The same set presented over a window containing the current one.
    pub fn refine(&self, window: &FiniteSet) -> Result<ClopenSet> {
        if !self.window.is_subset(window) {
            return invalid("refinement window must contain the current window");
        }
        if window == &self.window {
            return Ok(self.clone());
        }
        let lang = language(&self.ambient, window)?;
        let idx: Vec<usize> = self.window.iter().map(|g| window.index_of(g).expect("subset")).collect();
        let mut buf = Vec::with_capacity(idx.len());
        let rows: Vec<Vec<u8>> = lang
            .table
            .rows()
            .filter(|r| {
                buf.clear();
                buf.extend(idx.iter().map(|&i| r[i]));
                self.allowed.contains(&buf)
            })
            .map(<[u8]>::to_vec)
            .collect();
        Ok(ClopenSet {
            ambient: self.ambient.clone(),
            window: window.clone(),
            allowed: PatternTable::from_rows(window.len(), rows),
            exactness: self.exactness.and(lang.exactness),
        })
    }

    fn common(&self, other: &ClopenSet) -> Result<(ClopenSet, ClopenSet)> {
        self.check_ambient(other)?;
        let w = self.window.union(&other.window);
        Ok((self.refine(&w)?, other.refine(&w)?))
    }

    fn combine(&self, other: &ClopenSet, keep: impl Fn(bool, bool) -> bool) -> Result<ClopenSet> {
        let (a, b) = self.common(other)?;
        let lang = language(&self.ambient, &a.window)?;
        let rows: Vec<Vec<u8>> = lang
            .table
            .rows()
            .filter(|r| keep(a.allowed.contains(r), b.allowed.contains(r)))
            .map(<[u8]>::to_vec)
            .collect();
        Ok(ClopenSet {
            ambient: self.ambient.clone(),
            allowed: PatternTable::from_rows(a.window.len(), rows),
            window: a.window,
            exactness: a.exactness.and(b.exactness).and(lang.exactness),
        })
    }

    pub fn union(&self, other: &ClopenSet) -> Result<ClopenSet> {
        self.combine(other, |a, b| a || b)
    }

    pub fn intersection(&self, other: &ClopenSet) -> Result<ClopenSet> {
        self.combine(other, |a, b| a && b)
    }

    pub fn difference(&self, other: &ClopenSet) -> Result<ClopenSet> {
        self.combine(other, |a, b| a && !b)
    }

    pub fn complement(&self) -> Result<ClopenSet> {
        let lang = language(&self.ambient, &self.window)?;
        let rows: Vec<Vec<u8>> =
            lang.table.rows().filter(|r| !self.allowed.contains(r)).map(<[u8]>::to_vec).collect();
        Ok(ClopenSet {
            ambient: self.ambient.clone(),
            window: self.window.clone(),
            allowed: PatternTable::from_rows(self.window.len(), rows),
            exactness: self.exactness.and(lang.exactness),
        })
    }

    /// σ_γ(C) = {σ_γ(x) : x ∈ C}; since σ_γ(x)_u = x_{u+γ}, the window moves by −γ.
    pub fn shift(&self, gamma: &GroupElement) -> ClopenSet {
        let spec = self.ambient.group();
        let window = self.window.translate(spec, &spec.neg(gamma));
        let perm = reindex(&self.window, &window, spec, gamma);
        let rows = self.allowed.rows().map(|r| perm.iter().map(|&i| r[i]).collect::<Vec<u8>>());
        ClopenSet {
            ambient: self.ambient.clone(),
            allowed: PatternTable::from_rows(window.len(), rows),
            window,
            exactness: self.exactness,
        }
    }

    pub fn is_empty(&self) -> bool {
        self.allowed.is_empty()
    }

    pub fn is_subset(&self, other: &ClopenSet) -> Result<bool> {
        Ok(self.difference(other)?.is_empty())
    }

    pub fn same_set(&self, other: &ClopenSet) -> Result<bool> {
        Ok(self.is_subset(other)? && other.is_subset(self)?)
    }

    /// Whether a point with the given values around the origin lies in the set.
    /// Returns `None` when `lookup` cannot supply some window site.
    pub fn contains_at(&self, lookup: impl Fn(&GroupElement) -> Option<u8>) -> Option<bool> {
        let mut vals = Vec::with_capacity(self.window.len());
        for g in &self.window {
            vals.push(lookup(g)?);
        }
        Some(self.allowed.contains(&vals))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::sft::library::*;

    fn gm() -> Arc<SftSpec> {
        Arc::new(golden_mean())
    }

    #[test]
    fn shifted_ones_do_not_meet() {
        let x = gm();
        let a = ClopenSet::cylinder(x.clone(), &Pattern::digits(0, "1")).unwrap();
        let one = x.group().free_element(&[1]);
        assert!(a.intersection(&a.shift(&one)).unwrap().is_empty());
        let fs = Arc::new(full_shift(1, 2));
        let b = ClopenSet::cylinder(fs, &Pattern::digits(0, "1")).unwrap();
        let meet = b.intersection(&b.shift(&one)).unwrap();
        assert_eq!(meet.allowed().len(), 1);
        assert_eq!(meet.patterns().next().unwrap().digit_string(), "11");
    }

    #[test]
    fn boolean_identities() {
        let x = gm();
        let a = ClopenSet::cylinder(x.clone(), &Pattern::digits(0, "1")).unwrap();
        let b = ClopenSet::cylinder(x.clone(), &Pattern::digits(0, "0")).unwrap();
        assert!(a.complement().unwrap().complement().unwrap().same_set(&a).unwrap());
        assert!(a.union(&b).unwrap().same_set(&ClopenSet::whole(x).unwrap()).unwrap());
    }
}
