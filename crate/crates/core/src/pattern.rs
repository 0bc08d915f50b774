//! Alphabets, patterns, and sets of patterns sharing a support.

use std::collections::HashSet;
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{invalid, Result};
use crate::group::{FiniteSet, GroupElement, GroupSpec};

/// Ordered list of distinct symbol names; symbols are referred to by index.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Alphabet {
    names: Vec<String>,
}

impl Alphabet {
    pub fn new(names: Vec<String>) -> Result<Self> {
        if names.is_empty() {
            return invalid("alphabet is empty");
        }
        if names.len() > 250 {
            return invalid("alphabet has more than 250 symbols");
        }
        let mut seen = HashSet::new();
        for n in &names {
            if n.is_empty() || !seen.insert(n.as_str()) {
                return invalid(format!("alphabet symbol '{n}' is empty or repeated"));
            }
        }
        Ok(Alphabet { names })
    }

    /// Symbols named `0..k`.
    pub fn numeric(k: usize) -> Self {
        Alphabet::new((0..k).map(|i| i.to_string()).collect()).expect("numeric alphabet")
    }

    /// Symbols named `1..=k`, as used for colorings.
    pub fn one_based(k: usize) -> Self {
        Alphabet::new((1..=k).map(|i| i.to_string()).collect()).expect("numeric alphabet")
    }

    pub fn len(&self) -> usize {
        self.names.len()
    }

    pub fn is_empty(&self) -> bool {
        self.names.is_empty()
    }

    pub fn names(&self) -> &[String] {
        &self.names
    }

    pub fn name(&self, s: u8) -> &str {
        &self.names[s as usize]
    }

    pub fn index(&self, name: &str) -> Option<u8> {
        self.names.iter().position(|n| n == name).map(|i| i as u8)
    }
}

/// A finite configuration: values indexed like the support's canonical order.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct Pattern {
    support: FiniteSet,
    values: Vec<u8>,
}

impl Pattern {
    pub fn new(support: FiniteSet, values: Vec<u8>) -> Result<Self> {
        if support.len() != values.len() {
            return invalid(format!(
                "pattern has {} values for a support of size {}",
                values.len(),
                support.len()
            ));
        }
        Ok(Pattern { support, values })
    }

    /// Builds a pattern from (site, symbol) pairs in any order.
    pub fn from_pairs(pairs: impl IntoIterator<Item = (GroupElement, u8)>) -> Result<Self> {
        let mut pairs: Vec<_> = pairs.into_iter().collect();
        pairs.sort_by(|a, b| a.0.cmp(&b.0));
        if pairs.windows(2).any(|w| w[0].0 == w[1].0) {
            return invalid("pattern assigns a site twice");
        }
        let (elems, values): (Vec<_>, Vec<_>) = pairs.into_iter().unzip();
        Ok(Pattern { support: FiniteSet::from_sorted(elems), values })
    }

    /// A word on {start, start+1, ...} ⊂ Z.
    pub fn word(start: i64, symbols: &[u8]) -> Pattern {
        let support = FiniteSet::from_ints(start..start + symbols.len() as i64);
        Pattern { support, values: symbols.to_vec() }
    }

    /// A word given as digits, e.g. "0110".
    pub fn digits(start: i64, text: &str) -> Pattern {
        let symbols: Vec<u8> = text.bytes().map(|b| b - b'0').collect();
        Pattern::word(start, &symbols)
    }

    /// A 2D block from rows of digits; `rows[j][i]` sits at (i, j).
    pub fn grid(rows: &[&str]) -> Pattern {
        let spec = GroupSpec::free(2);
        let mut pairs = Vec::new();
        for (j, row) in rows.iter().enumerate() {
            for (i, b) in row.bytes().enumerate() {
                pairs.push((spec.free_element(&[i as i64, j as i64]), b - b'0'));
            }
        }
        Pattern::from_pairs(pairs).expect("distinct grid sites")
    }

    pub fn support(&self) -> &FiniteSet {
        &self.support
    }

    pub fn values(&self) -> &[u8] {
        &self.values
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn get(&self, g: &GroupElement) -> Option<u8> {
        self.support.index_of(g).map(|i| self.values[i])
    }

    pub fn iter(&self) -> impl Iterator<Item = (&GroupElement, u8)> {
        self.support.iter().zip(self.values.iter().copied())
    }

    /// The pattern moved so that it occupies `support + v`.
    pub fn translate(&self, spec: &GroupSpec, v: &GroupElement) -> Pattern {
        Pattern::from_pairs(self.iter().map(|(g, s)| (spec.add(g, v), s))).expect("translation is injective")
    }

    /// σ_v(p), with (σ_v p)_u = p_{u+v}.
    pub fn shifted(&self, spec: &GroupSpec, v: &GroupElement) -> Pattern {
        self.translate(spec, &spec.neg(v))
    }

    pub fn restrict(&self, f: &FiniteSet) -> Result<Pattern> {
        let mut values = Vec::with_capacity(f.len());
        for g in f {
            match self.get(g) {
                Some(s) => values.push(s),
                None => return invalid(format!("site {g} is outside the pattern support")),
            }
        }
        Ok(Pattern { support: f.clone(), values })
    }

    /// Symbols as a digit string (for small alphabets in tests and messages).
    pub fn digit_string(&self) -> String {
        self.values.iter().map(|&v| char::from_digit(v as u32, 36).unwrap_or('?')).collect()
    }
}

impl fmt::Display for Pattern {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{{")?;
        for (i, (g, s)) in self.iter().enumerate() {
            if i > 0 {
                write!(f, ", ")?;
            }
            write!(f, "{g}:{s}")?;
        }
        write!(f, "}}")
    }
}

/// Membership structure for value vectors of a fixed width.
#[derive(Clone, Debug)]
pub enum ValueSet {
    Dense { base: u64, bits: Vec<u64> },
    Hashed(HashSet<Vec<u8>>),
}

const DENSE_LIMIT: u64 = 1 << 24;

impl ValueSet {
    pub fn new(alphabet: usize, width: usize, rows: impl IntoIterator<Item = Vec<u8>>) -> Self {
        let base = alphabet as u64;
        let size = (base as u128).checked_pow(width as u32);
        match size {
            Some(n) if n <= DENSE_LIMIT as u128 => {
                let mut bits = vec![0u64; (n as usize).div_ceil(64).max(1)];
                for r in rows {
                    let c = code(base, &r);
                    bits[(c / 64) as usize] |= 1 << (c % 64);
                }
                ValueSet::Dense { base, bits }
            }
            _ => ValueSet::Hashed(rows.into_iter().collect()),
        }
    }

    pub fn contains(&self, values: &[u8]) -> bool {
        match self {
            ValueSet::Dense { base, bits } => {
                let c = code(*base, values);
                bits[(c / 64) as usize] >> (c % 64) & 1 == 1
            }
            ValueSet::Hashed(set) => set.contains(values),
        }
    }
}

fn code(base: u64, values: &[u8]) -> u64 {
    values.iter().rev().fold(0u64, |acc, &v| acc * base + v as u64)
}

/// A sorted, deduplicated set of value rows of a common width.
#[derive(Clone, Debug, Default, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct PatternTable {
    width: usize,
    len: usize,
    data: Vec<u8>,
}

impl PatternTable {
    pub fn new(width: usize) -> Self {
        PatternTable { width, len: 0, data: Vec::new() }
    }

    /// From `len` rows already sorted and distinct.
    pub fn from_sorted_flat(width: usize, len: usize, data: Vec<u8>) -> Self {
        debug_assert_eq!(width * len, data.len());
        let t = PatternTable { width, len, data };
        debug_assert!(t.is_strictly_sorted());
        t
    }

    pub fn from_rows(width: usize, rows: impl IntoIterator<Item = Vec<u8>>) -> Self {
        let mut rows: Vec<Vec<u8>> = rows.into_iter().collect();
        rows.sort();
        rows.dedup();
        let len = rows.len();
        let mut data = Vec::with_capacity(len * width);
        for r in rows {
            debug_assert_eq!(r.len(), width);
            data.extend_from_slice(&r);
        }
        PatternTable { width, len, data }
    }

    fn is_strictly_sorted(&self) -> bool {
        (1..self.len).all(|i| self.row(i - 1) < self.row(i))
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn len(&self) -> usize {
        self.len
    }

    pub fn is_empty(&self) -> bool {
        self.len == 0
    }

    pub fn row(&self, i: usize) -> &[u8] {
        &self.data[i * self.width..(i + 1) * self.width]
    }

    pub fn rows(&self) -> impl Iterator<Item = &[u8]> + '_ {
        (0..self.len).map(move |i| self.row(i))
    }

    pub fn position(&self, values: &[u8]) -> Option<usize> {
        let (mut lo, mut hi) = (0, self.len);
        while lo < hi {
            let mid = (lo + hi) / 2;
            match self.row(mid).cmp(values) {
                std::cmp::Ordering::Less => lo = mid + 1,
                std::cmp::Ordering::Greater => hi = mid,
                std::cmp::Ordering::Equal => return Some(mid),
            }
        }
        None
    }

    pub fn contains(&self, values: &[u8]) -> bool {
        self.position(values).is_some()
    }
}
