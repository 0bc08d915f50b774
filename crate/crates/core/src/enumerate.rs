//! Backtracking enumeration of assignments avoiding forbidden value sets.
//!
//! Sites are assigned in index order; each constraint is checked as soon as
//! its largest site is assigned. Parallel runs split the search on a short
//! prefix and concatenate results in prefix order, so output is always in
//! lexicographic order of the site values.

use std::sync::atomic::{AtomicBool, AtomicUsize, Ordering};

use rand::seq::SliceRandom;
use rand::Rng;

use crate::error::{Error, Result};
use crate::par;
use crate::pattern::{PatternTable, ValueSet};

#[derive(Clone, Debug)]
struct Constraint {
    sites: Vec<usize>,
    set: usize,
}

/// A finite constraint system over per-site symbol domains.
#[derive(Clone, Debug)]
pub struct Csp<'a> {
    domains: Vec<Vec<u8>>,
    sets: Vec<&'a ValueSet>,
    by_last: Vec<Vec<Constraint>>,
}

const PREFIX_TARGET: usize = 256;

impl<'a> Csp<'a> {
    pub fn new(domains: Vec<Vec<u8>>) -> Self {
        let n = domains.len();
        Csp { domains, sets: Vec::new(), by_last: vec![Vec::new(); n] }
    }

    /// `n` sites, each ranging over `0..k`.
    pub fn uniform(n: usize, k: usize) -> Self {
        Csp::new(vec![(0..k as u8).collect(); n])
    }

    pub fn len(&self) -> usize {
        self.domains.len()
    }

    pub fn is_empty(&self) -> bool {
        self.domains.is_empty()
    }

    /// Registers a forbidden value set and returns its handle.
    pub fn add_set(&mut self, set: &'a ValueSet) -> usize {
        self.sets.push(set);
        self.sets.len() - 1
    }

    /// Forbids the values read at `sites` (in order) from lying in set `set`.
    pub fn forbid(&mut self, set: usize, sites: Vec<usize>) {
        if let Some(&last) = sites.iter().max() {
            self.by_last[last].push(Constraint { sites, set });
        }
    }

    pub fn restrict_domain(&mut self, site: usize, allowed: Vec<u8>) {
        self.domains[site] = allowed;
    }

    fn ok(&self, i: usize, assign: &[u8], buf: &mut Vec<u8>) -> bool {
        for c in &self.by_last[i] {
            buf.clear();
            buf.extend(c.sites.iter().map(|&s| assign[s]));
            if self.sets[c.set].contains(buf) {
                return false;
            }
        }
        true
    }

    /// Whether a full assignment satisfies every constraint.
    pub fn accepts(&self, assign: &[u8]) -> bool {
        let mut buf = Vec::new();
        (0..self.len()).all(|i| self.domains[i].contains(&assign[i]) && self.ok(i, assign, &mut buf))
    }

    /// Depth-first search extending `prefix` to sites `..end`; `visit` returns
    /// false to stop. Returns false iff stopped.
    fn run(&self, prefix: &[u8], end: usize, visit: &mut dyn FnMut(&[u8]) -> bool) -> bool {
        let start = prefix.len();
        let mut assign = prefix.to_vec();
        assign.resize(end, 0);
        if start == end {
            return visit(&assign);
        }
        let mut buf = Vec::new();
        let mut idx = vec![0usize; end];
        let mut i = start;
        loop {
            let dom = &self.domains[i];
            let mut placed = false;
            while idx[i] < dom.len() {
                assign[i] = dom[idx[i]];
                idx[i] += 1;
                if self.ok(i, &assign, &mut buf) {
                    placed = true;
                    break;
                }
            }
            if placed {
                if i + 1 == end {
                    if !visit(&assign) {
                        return false;
                    }
                } else {
                    i += 1;
                    idx[i] = 0;
                }
            } else {
                if i == start {
                    return true;
                }
                i -= 1;
            }
        }
    }

    fn prefixes(&self) -> (usize, Vec<Vec<u8>>) {
        let mut depth = 0;
        let mut width = 1usize;
        while depth < self.len() && width < PREFIX_TARGET {
            width = width.saturating_mul(self.domains[depth].len().max(1));
            depth += 1;
        }
        let mut out = Vec::new();
        self.run(&[], depth, &mut |a| {
            out.push(a.to_vec());
            true
        });
        (depth, out)
    }

    /// Number of satisfying assignments.
    pub fn count(&self) -> u64 {
        let (_, prefixes) = self.prefixes();
        let n = self.len();
        par::sum_u64(prefixes.len(), |i| {
            let mut c = 0u64;
            self.run(&prefixes[i], n, &mut |_| {
                c += 1;
                true
            });
            c
        })
    }

    /// All satisfying assignments in lexicographic order; fails past `budget`.
    pub fn solutions(&self, budget: usize) -> Result<PatternTable> {
        let (_, prefixes) = self.prefixes();
        let n = self.len();
        let total = AtomicUsize::new(0);
        let over = AtomicBool::new(false);
        let chunks: Vec<(usize, Vec<u8>)> = par::map(&prefixes, |p| {
            let mut data = Vec::new();
            let mut count = 0usize;
            self.run(p, n, &mut |a| {
                if over.load(Ordering::Relaxed) {
                    return false;
                }
                data.extend_from_slice(a);
                count += 1;
                if total.fetch_add(1, Ordering::Relaxed) + 1 > budget {
                    over.store(true, Ordering::Relaxed);
                    return false;
                }
                true
            });
            (count, data)
        });
        if over.load(Ordering::Relaxed) {
            return Err(Error::Budget(format!("more than {budget} patterns on {n} sites")));
        }
        let len = chunks.iter().map(|c| c.0).sum();
        let mut data = Vec::with_capacity(len * n);
        for (_, d) in chunks {
            data.extend_from_slice(&d);
        }
        Ok(PatternTable::from_sorted_flat(n, len, data))
    }

    /// The lexicographically least satisfying assignment.
    pub fn first(&self) -> Option<Vec<u8>> {
        let mut found = None;
        self.run(&[], self.len(), &mut |a| {
            found = Some(a.to_vec());
            false
        });
        found
    }

    /// A satisfying assignment found by depth-first search with randomly
    /// ordered domains, giving up after `max_steps` placements.
    pub fn sample<R: Rng>(&self, rng: &mut R, max_steps: usize) -> Option<Vec<u8>> {
        let n = self.len();
        if n == 0 {
            return Some(Vec::new());
        }
        let mut assign = vec![0u8; n];
        let mut orders: Vec<Vec<u8>> = vec![Vec::new(); n];
        let mut idx = vec![0usize; n];
        let mut buf = Vec::new();
        let mut i = 0;
        orders[0] = self.domains[0].clone();
        orders[0].shuffle(rng);
        let mut steps = 0;
        loop {
            let mut placed = false;
            while idx[i] < orders[i].len() {
                assign[i] = orders[i][idx[i]];
                idx[i] += 1;
                steps += 1;
                if self.ok(i, &assign, &mut buf) {
                    placed = true;
                    break;
                }
            }
            if steps > max_steps {
                return None;
            }
            if placed {
                if i + 1 == n {
                    return Some(assign);
                }
                i += 1;
                idx[i] = 0;
                orders[i] = self.domains[i].clone();
                orders[i].shuffle(rng);
            } else {
                if i == 0 {
                    return None;
                }
                i -= 1;
            }
        }
    }
}
