//! Rank-one SFTs as trimmed graphs of blocks.
//!
//! For Γ = Z × G a configuration is a bi-infinite sequence of fibers
//! (configurations on {n} × G). With window hull of free width m, the states
//! are admissible blocks of max(m, 1) fibers and edges are admissible blocks
//! one fiber longer. After removing states that lie on no bi-infinite path,
//! paths read off exactly the globally admissible patterns.

use crate::error::{Error, Result};
use crate::group::{FiniteSet, GroupElement, GroupSpec};
use crate::language::{local_language, Exactness, Language, LANGUAGE_BUDGET};
use crate::pattern::PatternTable;
use crate::sft::SftSpec;

#[derive(Clone, Debug)]
pub struct BlockGraph {
    /// Cells per fiber (|G|).
    pub fiber: usize,
    /// Fibers per state.
    pub span: usize,
    /// States in lexicographic order; each row holds `span * fiber` symbols.
    pub states: PatternTable,
    /// Sorted successor lists.
    pub succ: Vec<Vec<u32>>,
}

/// Position of a torsion residue vector in the canonical enumeration of G.
pub(crate) fn torsion_rank(spec: &GroupSpec, t: &[u32]) -> usize {
    t.iter().zip(spec.moduli()).fold(0usize, |acc, (&r, &m)| acc * m as usize + r as usize)
}

impl BlockGraph {
    pub fn build(x: &SftSpec) -> Result<BlockGraph> {
        let spec = x.group();
        if spec.rank() != 1 {
            return Err(Error::Unsupported("block graphs need a rank-1 group".into()));
        }
        let h = spec.torsion_order();
        let (lo, hi) = x.window().free_bounds().expect("window nonempty");
        let m = (hi[0] - lo[0]) as usize;
        let (span, states, edges) = if m == 0 {
            let fiber = spec.free_box(&[0], &[0]);
            let lang = local_language(x, &fiber)?;
            let n = lang.len();
            let edges: Vec<(usize, usize)> = (0..n).flat_map(|i| (0..n).map(move |j| (i, j))).collect();
            (1, lang.table, edges)
        } else {
            let slab = spec.free_box(&[0], &[m as i64]);
            let lang = local_language(x, &slab)?;
            let w = m * h;
            let mut rows: Vec<Vec<u8>> = Vec::with_capacity(2 * lang.len());
            for r in lang.table.rows() {
                rows.push(r[..w].to_vec());
                rows.push(r[h..].to_vec());
            }
            let states = PatternTable::from_rows(w, rows);
            let edges = lang
                .table
                .rows()
                .map(|r| {
                    (
                        states.position(&r[..w]).expect("left block is a state"),
                        states.position(&r[h..]).expect("right block is a state"),
                    )
                })
                .collect();
            (m, states, edges)
        };
        let mut succ = vec![Vec::new(); states.len()];
        for (a, b) in edges {
            succ[a].push(b as u32);
        }
        for s in &mut succ {
            s.sort_unstable();
            s.dedup();
        }
        Ok(BlockGraph { fiber: h, span, states, succ }.trimmed())
    }

    /// Removes states without predecessors or successors until none remain.
    fn trimmed(self) -> BlockGraph {
        let n = self.states.len();
        let mut indeg = vec![0usize; n];
        for s in &self.succ {
            for &t in s {
                indeg[t as usize] += 1;
            }
        }
        let mut pred: Vec<Vec<u32>> = vec![Vec::new(); n];
        for (a, s) in self.succ.iter().enumerate() {
            for &t in s {
                pred[t as usize].push(a as u32);
            }
        }
        let mut outdeg: Vec<usize> = self.succ.iter().map(Vec::len).collect();
        let mut alive = vec![true; n];
        let mut stack: Vec<usize> = (0..n).filter(|&i| indeg[i] == 0 || outdeg[i] == 0).collect();
        while let Some(v) = stack.pop() {
            if !alive[v] {
                continue;
            }
            alive[v] = false;
            for &t in &self.succ[v] {
                let t = t as usize;
                if alive[t] {
                    indeg[t] -= 1;
                    if indeg[t] == 0 {
                        stack.push(t);
                    }
                }
            }
            for &p in &pred[v] {
                let p = p as usize;
                if alive[p] {
                    outdeg[p] -= 1;
                    if outdeg[p] == 0 {
                        stack.push(p);
                    }
                }
            }
        }
        let mut remap = vec![u32::MAX; n];
        let mut rows = Vec::new();
        for i in 0..n {
            if alive[i] {
                remap[i] = (rows.len() / self.states.width().max(1)) as u32;
                rows.extend_from_slice(self.states.row(i));
            }
        }
        let kept = alive.iter().filter(|&&a| a).count();
        let states = PatternTable::from_sorted_flat(self.states.width(), kept, rows);
        let succ = (0..n)
            .filter(|&i| alive[i])
            .map(|i| self.succ[i].iter().filter(|&&t| alive[t as usize]).map(|&t| remap[t as usize]).collect())
            .collect();
        BlockGraph { fiber: self.fiber, span: self.span, states, succ }
    }

    pub fn num_states(&self) -> usize {
        self.states.len()
    }

    pub fn is_empty(&self) -> bool {
        self.states.is_empty()
    }

    pub fn num_edges(&self) -> usize {
        self.succ.iter().map(Vec::len).sum()
    }

    /// Number of admissible words of `n` fibers (saturating).
    pub fn count_words(&self, n: usize) -> u128 {
        if self.is_empty() {
            return 0;
        }
        if n < self.span {
            return self.prefix_table(n).len() as u128;
        }
        let mut counts = vec![1u128; self.num_states()];
        for _ in 0..n - self.span {
            let mut next = vec![0u128; counts.len()];
            for (a, s) in self.succ.iter().enumerate() {
                for &t in s {
                    next[t as usize] = next[t as usize].saturating_add(counts[a]);
                }
            }
            counts = next;
        }
        counts.iter().fold(0u128, |a, &b| a.saturating_add(b))
    }

    fn prefix_table(&self, n: usize) -> PatternTable {
        let w = n * self.fiber;
        PatternTable::from_rows(w, self.states.rows().map(|r| r[..w].to_vec()))
    }

    /// Every admissible word of `n` fibers, in lexicographic order.
    pub fn words(&self, n: usize) -> Result<PatternTable> {
        let total = self.count_words(n);
        if total > LANGUAGE_BUDGET as u128 {
            return Err(Error::Budget(format!("{total} words of length {n}")));
        }
        if n < self.span {
            return Ok(self.prefix_table(n));
        }
        let h = self.fiber;
        let w = n * h;
        let steps = n - self.span;
        let per_state: Vec<(usize, Vec<u8>)> = crate::par::map_range(self.num_states(), |s0| {
            let mut data = Vec::new();
            let mut count = 0usize;
            let mut word: Vec<u8> = self.states.row(s0).to_vec();
            let mut path: Vec<(u32, usize)> = vec![(s0 as u32, 0)];
            if steps == 0 {
                return (1, word);
            }
            while let Some(&mut (s, ref mut next)) = path.last_mut() {
                let succ = &self.succ[s as usize];
                if *next >= succ.len() {
                    path.pop();
                    if !path.is_empty() {
                        word.truncate(word.len() - h);
                    }
                    continue;
                }
                let t = succ[*next];
                *next += 1;
                let row = self.states.row(t as usize);
                word.extend_from_slice(&row[row.len() - h..]);
                if path.len() == steps {
                    data.extend_from_slice(&word);
                    count += 1;
                    word.truncate(word.len() - h);
                } else {
                    path.push((t, 0));
                }
            }
            (count, data)
        });
        let len = per_state.iter().map(|p| p.0).sum();
        let mut data = Vec::with_capacity(len * w);
        for (_, d) in per_state {
            data.extend_from_slice(&d);
        }
        Ok(PatternTable::from_sorted_flat(w, len, data))
    }

    /// The exact language on a finite F ⊂ Z × G.
    pub fn language_on(&self, spec: &GroupSpec, f: &FiniteSet) -> Result<Language> {
        for g in f {
            spec.check(g)?;
        }
        let Some((lo, hi)) = f.free_bounds() else {
            let table = if self.is_empty() { PatternTable::new(0) } else { PatternTable::from_rows(0, [Vec::new()]) };
            return Ok(Language { support: f.clone(), table, exactness: Exactness::Exact });
        };
        let n = (hi[0] - lo[0] + 1) as usize;
        let words = self.words(n)?;
        let idx: Vec<usize> = f.iter().map(|g| self.cell_index(spec, g, lo[0])).collect();
        let table = if idx.len() == n * self.fiber {
            words
        } else {
            PatternTable::from_rows(f.len(), words.rows().map(|r| idx.iter().map(|&i| r[i]).collect()))
        };
        Ok(Language { support: f.clone(), table, exactness: Exactness::Exact })
    }

    fn cell_index(&self, spec: &GroupSpec, g: &GroupElement, lo: i64) -> usize {
        (g.free[0] - lo) as usize * self.fiber + torsion_rank(spec, &g.torsion)
    }
}
