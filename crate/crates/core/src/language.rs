//! Languages of SFTs on finite supports.

use serde::{Deserialize, Serialize};

use crate::enumerate::Csp;
use crate::error::{Error, Result};
use crate::group::{FiniteSet, GroupSpec};
use crate::oned::BlockGraph;
use crate::pattern::{Pattern, PatternTable};
use crate::sft::SftSpec;

/// Largest number of patterns any language enumeration may return.
pub const LANGUAGE_BUDGET: usize = 1 << 24;

/// How a computed language relates to the true language 𝓛_F(X).
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Exactness {
    /// Equal to 𝓛_F(X).
    #[serde(rename = "EXACT")]
    Exact,
    /// Locally admissible patterns; a superset of 𝓛_F(X).
    #[serde(rename = "LOCAL-UPPER")]
    LocalUpper,
}

impl Exactness {
    pub fn tag(self) -> &'static str {
        match self {
            Exactness::Exact => "EXACT",
            Exactness::LocalUpper => "LOCAL-UPPER",
        }
    }

    pub fn and(self, other: Exactness) -> Exactness {
        if self == Exactness::Exact && other == Exactness::Exact {
            Exactness::Exact
        } else {
            Exactness::LocalUpper
        }
    }
}

/// A set of patterns on a common support.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Language {
    pub support: FiniteSet,
    pub table: PatternTable,
    pub exactness: Exactness,
}

impl Language {
    pub fn len(&self) -> usize {
        self.table.len()
    }

    pub fn is_empty(&self) -> bool {
        self.table.is_empty()
    }

    pub fn contains(&self, p: &Pattern) -> bool {
        p.support() == &self.support && self.table.contains(p.values())
    }

    pub fn patterns(&self) -> impl Iterator<Item = Pattern> + '_ {
        self.table.rows().map(|r| Pattern::new(self.support.clone(), r.to_vec()).expect("row width"))
    }

    /// Projection onto a subset of the support.
    pub fn restrict(&self, f: &FiniteSet) -> Result<Language> {
        let idx: Vec<usize> = f
            .iter()
            .map(|g| self.support.index_of(g).ok_or_else(|| Error::Invalid(format!("{g} is outside the support"))))
            .collect::<Result<_>>()?;
        let table = PatternTable::from_rows(f.len(), self.table.rows().map(|r| idx.iter().map(|&i| r[i]).collect()));
        Ok(Language { support: f.clone(), table, exactness: self.exactness })
    }
}

/// Constraint system whose solutions are the locally admissible F-patterns.
pub fn support_csp<'a>(x: &'a SftSpec, f: &FiniteSet) -> Csp<'a> {
    let g = x.group();
    let mut csp = Csp::uniform(f.len(), x.alphabet_size());
    for grp in x.compiled() {
        let h = csp.add_set(&grp.set);
        let s0 = &grp.support.as_slice()[0];
        for site in f {
            let t = g.sub(site, s0);
            let sites: Option<Vec<usize>> = grp.support.iter().map(|s| f.index_of(&g.add(&t, s))).collect();
            if let Some(sites) = sites {
                csp.forbid(h, sites);
            }
        }
    }
    csp
}

fn local_tag(x: &SftSpec) -> Exactness {
    if x.free_symbol().is_some() {
        Exactness::Exact
    } else {
        Exactness::LocalUpper
    }
}

/// All locally admissible F-patterns, a superset of 𝓛_F(X).
///
/// Tagged EXACT when some symbol occurs in no forbidden pattern (then every
/// locally admissible pattern extends by filling with that symbol).
pub fn local_language(x: &SftSpec, f: &FiniteSet) -> Result<Language> {
    for el in f {
        x.group().check(el)?;
    }
    let table = support_csp(x, f).solutions(LANGUAGE_BUDGET)?;
    Ok(Language { support: f.clone(), table, exactness: local_tag(x) })
}

/// |local_language(X, F)| without storing the patterns.
pub fn local_count(x: &SftSpec, f: &FiniteSet) -> u64 {
    support_csp(x, f).count()
}

/// The globally admissible F-patterns of a rank-1 SFT.
pub fn exact_language_1d(x: &SftSpec, f: &FiniteSet) -> Result<Language> {
    if x.group().rank() != 1 {
        return Err(Error::Unsupported("exact languages need a rank-1 group".into()));
    }
    let graph = BlockGraph::build(x)?;
    graph.language_on(x.group(), f)
}

/// Exact language of a finite group Γ = G: project the configurations of G.
fn exact_language_finite(x: &SftSpec, f: &FiniteSet) -> Result<Language> {
    let whole = torus_support(x.group());
    let all = crate::periodic::torus_csp(x, &crate::subgroup::Subgroup::trivial(x.group()))?
        .solutions(LANGUAGE_BUDGET)?;
    let full = Language { support: whole, table: all, exactness: Exactness::Exact };
    full.restrict(f)
}

fn torus_support(spec: &GroupSpec) -> FiniteSet {
    spec.free_box(&[], &[])
}

/// The best available language: exact for rank ≤ 1, locally admissible otherwise.
pub fn language(x: &SftSpec, f: &FiniteSet) -> Result<Language> {
    match x.group().rank() {
        0 => exact_language_finite(x, f),
        1 => exact_language_1d(x, f),
        _ => local_language(x, f),
    }
}
