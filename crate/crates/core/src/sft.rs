//! Subshifts of finite type presented by a window and forbidden patterns.

use std::collections::BTreeMap;

use crate::error::{invalid, Result};
use crate::group::{FiniteSet, GroupElement, GroupSpec};
use crate::pattern::{Alphabet, Pattern, ValueSet};

/// Forbidden patterns sharing one support, compiled for fast lookup.
#[derive(Clone, Debug)]
pub struct ForbiddenGroup {
    pub support: FiniteSet,
    pub set: ValueSet,
}

/// An SFT: every forbidden pattern has support inside the window W, and 0 ∈ W.
///
/// Forbidden patterns keep their own supports; an occurrence is tested only
/// where the pattern's support fits, which is what makes the usual two-pattern
/// hard-square presentation yield the independent-set counts.
#[derive(Clone, Debug)]
pub struct SftSpec {
    group: GroupSpec,
    alphabet: Alphabet,
    window: FiniteSet,
    forbidden: Vec<Pattern>,
    compiled: Vec<ForbiddenGroup>,
}

impl PartialEq for SftSpec {
    fn eq(&self, other: &Self) -> bool {
        self.group == other.group
            && self.alphabet == other.alphabet
            && self.window == other.window
            && self.forbidden == other.forbidden
    }
}

impl SftSpec {
    /// Validates and canonicalizes. If 0 ∉ W everything is translated by −min W.
    pub fn new(group: GroupSpec, alphabet: Alphabet, window: FiniteSet, forbidden: Vec<Pattern>) -> Result<Self> {
        if window.is_empty() {
            return invalid("window is empty");
        }
        for g in &window {
            group.check(g)?;
        }
        let k = alphabet.len() as u8;
        for p in &forbidden {
            if !p.support().is_subset(&window) {
                return invalid(format!("forbidden pattern {p} is not supported inside the window {window}"));
            }
            if let Some(&s) = p.values().iter().find(|&&s| s >= k) {
                return invalid(format!("forbidden pattern {p} uses symbol index {s} outside the alphabet"));
            }
        }
        let (window, forbidden) = if window.contains(&group.zero()) {
            (window, forbidden)
        } else {
            let shift = group.neg(window.first().expect("nonempty"));
            let w = window.translate(&group, &shift);
            let f = forbidden.iter().map(|p| p.translate(&group, &shift)).collect();
            (w, f)
        };
        let mut forbidden = forbidden;
        forbidden.retain(|p| !p.is_empty());
        forbidden.sort();
        forbidden.dedup();
        let compiled = compile(&alphabet, &forbidden);
        Ok(SftSpec { group, alphabet, window, forbidden, compiled })
    }

    /// The full shift A^Γ.
    pub fn full_shift(group: GroupSpec, alphabet: Alphabet) -> Self {
        let window = FiniteSet::new([group.zero()]);
        SftSpec::new(group, alphabet, window, Vec::new()).expect("full shift is valid")
    }

    pub fn group(&self) -> &GroupSpec {
        &self.group
    }

    pub fn alphabet(&self) -> &Alphabet {
        &self.alphabet
    }

    pub fn window(&self) -> &FiniteSet {
        &self.window
    }

    pub fn forbidden(&self) -> &[Pattern] {
        &self.forbidden
    }

    pub fn compiled(&self) -> &[ForbiddenGroup] {
        &self.compiled
    }

    pub fn alphabet_size(&self) -> usize {
        self.alphabet.len()
    }

    pub fn is_full_shift(&self) -> bool {
        self.forbidden.is_empty()
    }

    /// Every occurrence of a forbidden pattern inside `p`, as (translate, group index).
    pub fn occurrences(&self, p: &Pattern) -> Vec<(GroupElement, usize)> {
        let mut out = Vec::new();
        let supp = p.support();
        for (gi, grp) in self.compiled.iter().enumerate() {
            let s0 = &grp.support.as_slice()[0];
            let mut vals = Vec::with_capacity(grp.support.len());
            for x in supp {
                let t = self.group.sub(x, s0);
                vals.clear();
                let mut inside = true;
                for s in &grp.support {
                    match p.get(&self.group.add(&t, s)) {
                        Some(v) => vals.push(v),
                        None => {
                            inside = false;
                            break;
                        }
                    }
                }
                if inside && grp.set.contains(&vals) {
                    out.push((t, gi));
                }
            }
        }
        out.sort();
        out
    }

    /// True iff no translate of a forbidden pattern inside `p`'s support matches `p`.
    pub fn is_locally_admissible(&self, p: &Pattern) -> Result<bool> {
        let k = self.alphabet.len() as u8;
        if let Some(&s) = p.values().iter().find(|&&s| s >= k) {
            return invalid(format!("symbol index {s} is outside the alphabet"));
        }
        for g in p.support() {
            self.group.check(g)?;
        }
        Ok(self.occurrences(p).is_empty())
    }

    /// Presents {x ∈ X : no translate of w occurs}.
    pub fn forbid_pattern(&self, w: &Pattern) -> Result<SftSpec> {
        for g in w.support() {
            self.group.check(g)?;
        }
        let k = self.alphabet.len() as u8;
        if w.values().iter().any(|&s| s >= k) {
            return invalid("pattern uses a symbol outside the alphabet");
        }
        let window = self.window.union(w.support());
        let mut forbidden = self.forbidden.clone();
        forbidden.push(w.clone());
        SftSpec::new(self.group.clone(), self.alphabet.clone(), window, forbidden)
    }

    /// A symbol that occurs in no forbidden pattern, if any. Filling with such a
    /// symbol never creates an occurrence, so locally admissible patterns extend
    /// to points and local languages are exact.
    pub fn free_symbol(&self) -> Option<u8> {
        (0..self.alphabet.len() as u8).find(|&a| self.forbidden.iter().all(|p| !p.values().contains(&a)))
    }
}

fn compile(alphabet: &Alphabet, forbidden: &[Pattern]) -> Vec<ForbiddenGroup> {
    let mut by_support: BTreeMap<&FiniteSet, Vec<Vec<u8>>> = BTreeMap::new();
    for p in forbidden {
        by_support.entry(p.support()).or_default().push(p.values().to_vec());
    }
    by_support
        .into_iter()
        .map(|(support, rows)| ForbiddenGroup {
            support: support.clone(),
            set: ValueSet::new(alphabet.len(), support.len(), rows),
        })
        .collect()
}

/// Standard presentations used throughout tests, examples and the CLI.
pub mod library {
    use super::*;

    /// Z, {0,1}, forbid "11".
    pub fn golden_mean() -> SftSpec {
        let g = GroupSpec::free(1);
        SftSpec::new(g, Alphabet::numeric(2), FiniteSet::from_ints([0, 1]), vec![Pattern::digits(0, "11")])
            .expect("golden mean")
    }

    /// Full shift on `k` symbols over Z^d.
    pub fn full_shift(d: usize, k: usize) -> SftSpec {
        SftSpec::full_shift(GroupSpec::free(d), Alphabet::numeric(k))
    }

    /// Z², {0,1}, no two horizontally or vertically adjacent 1s.
    pub fn hard_square() -> SftSpec {
        let g = GroupSpec::free(2);
        let o = g.free_element(&[0, 0]);
        let e1 = g.free_element(&[1, 0]);
        let e2 = g.free_element(&[0, 1]);
        let window = FiniteSet::new([o.clone(), e1.clone(), e2.clone()]);
        let h = Pattern::from_pairs([(o.clone(), 1), (e1, 1)]).expect("pattern");
        let v = Pattern::from_pairs([(o, 1), (e2, 1)]).expect("pattern");
        SftSpec::new(g, Alphabet::numeric(2), window, vec![h, v]).expect("hard square")
    }

    /// Z, two fixed points 0^∞ and 1^∞ (forbid "01" and "10").
    pub fn two_fixed_points() -> SftSpec {
        let g = GroupSpec::free(1);
        SftSpec::new(
            g,
            Alphabet::numeric(2),
            FiniteSet::from_ints([0, 1]),
            vec![Pattern::digits(0, "01"), Pattern::digits(0, "10")],
        )
        .expect("two fixed points")
    }

    /// Z, only 0^∞ (forbid the symbol 1).
    pub fn single_fixed_point() -> SftSpec {
        let g = GroupSpec::free(1);
        SftSpec::new(g, Alphabet::numeric(2), FiniteSet::from_ints([0]), vec![Pattern::digits(0, "1")])
            .expect("single fixed point")
    }
}
