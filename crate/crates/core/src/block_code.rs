//! Sliding block codes Φ: A^{W₀} → B and their local application.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};
use crate::group::{FiniteSet, GroupElement, GroupSpec};
use crate::pattern::{Alphabet, Pattern};
use crate::subgroup::Subgroup;

/// ρ(x)_v = Φ(σ_v(x)_{W₀}), with Φ given by an explicit table.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct SlidingBlockCode {
    pub group: GroupSpec,
    pub source: Alphabet,
    pub target: Alphabet,
    pub window: FiniteSet,
    pub table: BTreeMap<Vec<u8>, u8>,
}

impl SlidingBlockCode {
    pub fn new(
        group: GroupSpec,
        source: Alphabet,
        target: Alphabet,
        window: FiniteSet,
        table: BTreeMap<Vec<u8>, u8>,
    ) -> Result<Self> {
        if window.is_empty() {
            return invalid("block code window is empty");
        }
        for g in &window {
            group.check(g)?;
        }
        for (k, &v) in &table {
            if k.len() != window.len() || k.iter().any(|&s| s as usize >= source.len()) {
                return invalid("block code table key does not match the window or source alphabet");
            }
            if v as usize >= target.len() {
                return invalid("block code output outside the target alphabet");
            }
        }
        Ok(SlidingBlockCode { group, source, target, window, table })
    }

    /// Tabulates `f` on every word of the full source alphabet over `window`.
    pub fn from_fn(
        group: GroupSpec,
        source: Alphabet,
        target: Alphabet,
        window: FiniteSet,
        f: impl Fn(&[u8]) -> u8,
    ) -> Result<Self> {
        let k = source.len();
        let n = window.len();
        let total = (k as u128).pow(n as u32);
        if total > 1 << 22 {
            return Err(Error::Budget(format!("{total} table entries")));
        }
        let mut table = BTreeMap::new();
        let mut word = vec![0u8; n];
        for _ in 0..total {
            table.insert(word.clone(), f(&word));
            for s in word.iter_mut().rev() {
                *s += 1;
                if (*s as usize) < k {
                    break;
                }
                *s = 0;
            }
        }
        SlidingBlockCode::new(group, source, target, window, table)
    }

    pub fn identity(group: GroupSpec, alphabet: Alphabet) -> Self {
        let w = FiniteSet::new([group.zero()]);
        SlidingBlockCode::from_fn(group, alphabet.clone(), alphabet, w, |v| v[0]).expect("identity code")
    }

    /// x_0 XOR x_1 on Z.
    pub fn xor() -> Self {
        SlidingBlockCode::from_fn(
            GroupSpec::free(1),
            Alphabet::numeric(2),
            Alphabet::numeric(2),
            FiniteSet::from_ints([0, 1]),
            |v| v[0] ^ v[1],
        )
        .expect("xor code")
    }

    pub fn lookup(&self, word: &[u8]) -> Option<u8> {
        self.table.get(word).copied()
    }

    /// Output at site v of a configuration given by `value`.
    pub fn output_at(&self, v: &GroupElement, value: impl Fn(&GroupElement) -> Option<u8>) -> Result<u8> {
        let mut word = Vec::with_capacity(self.window.len());
        for w in &self.window {
            let site = self.group.add(v, w);
            word.push(value(&site).ok_or_else(|| Error::Invalid(format!("site {site} is outside the input")))?);
        }
        self.lookup(&word).ok_or_else(|| Error::Invalid(format!("block code has no entry for {word:?}")))
    }

    /// Images of a Γ0-periodic configuration, on the same fundamental domain.
    pub fn apply_periodic(&self, h: &Subgroup, domain: &FiniteSet, config: &[u8]) -> Result<Vec<u8>> {
        domain
            .iter()
            .map(|v| self.output_at(v, |s| Some(crate::periodic::periodic_value(h, domain, config, s))))
            .collect()
    }
}

/// Φ^E(p)_v = Φ(σ_v(p)_{W₀}) for v ∈ E; requires E + W₀ ⊆ support(p).
pub fn apply_block_code(code: &SlidingBlockCode, p: &Pattern, e: &FiniteSet) -> Result<Pattern> {
    let values = e.iter().map(|v| code.output_at(v, |s| p.get(s))).collect::<Result<Vec<u8>>>()?;
    Pattern::new(e.clone(), values)
}
