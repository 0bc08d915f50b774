//! Subgroups of Γ = Z^d × G in a unique canonical form.
//!
//! A subgroup H is stored as Hermite-normal-form rows `(b_i; g_i)` generating
//! the free projection of H, each carrying a torsion lift, together with the
//! finite part T = H ∩ ({0} × G). Lifts are reduced to the least
//! representative of their T-coset, which makes the form unique even for
//! subgroups such as ⟨(1;1)⟩ ≤ Z × Z/2 that are not products.

use std::collections::{BTreeSet, VecDeque};
use std::fmt;

use num_integer::Integer;
use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};
use crate::group::{FiniteSet, GroupElement, GroupSpec};

#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct Subgroup {
    spec: GroupSpec,
    /// Echelon rows; row i has its pivot in column `pivots[i]`.
    rows: Vec<GroupElement>,
    pivots: Vec<usize>,
    /// Elements of H ∩ ({0} × G), sorted.
    torsion: Vec<Vec<u32>>,
}

/// Subgroup of G generated by the given residues, as a sorted element list.
pub(crate) fn torsion_closure(spec: &GroupSpec, gens: &[Vec<u32>]) -> Vec<Vec<u32>> {
    let zero = vec![0u32; spec.moduli().len()];
    let mut seen: BTreeSet<Vec<u32>> = BTreeSet::new();
    seen.insert(zero.clone());
    let mut queue = VecDeque::from([zero]);
    while let Some(x) = queue.pop_front() {
        for g in gens {
            let y = spec.add_torsion(&x, g);
            if seen.insert(y.clone()) {
                queue.push_back(y);
            }
        }
    }
    seen.into_iter().collect()
}

/// Least element of the coset t + T.
fn coset_min(spec: &GroupSpec, t: &[u32], sub: &[Vec<u32>]) -> Vec<u32> {
    sub.iter().map(|s| spec.add_torsion(t, s)).min().expect("subgroup contains zero")
}

impl Subgroup {
    /// Canonical form of the subgroup generated by `gens`.
    pub fn canonicalize(spec: &GroupSpec, gens: &[GroupElement]) -> Result<Subgroup> {
        for g in gens {
            spec.check(g)?;
        }
        let d = spec.rank();
        let mut rows: Vec<GroupElement> = gens.to_vec();
        let mut pivots = Vec::new();
        let mut r = 0;
        for col in 0..d {
            // Euclid on column `col` among rows r.. until a single nonzero remains.
            loop {
                let nonzero: Vec<usize> = (r..rows.len()).filter(|&i| rows[i].free[col] != 0).collect();
                if nonzero.len() <= 1 {
                    break;
                }
                let p = *nonzero.iter().min_by_key(|&&i| rows[i].free[col].abs()).unwrap();
                for &i in &nonzero {
                    if i != p {
                        let q = Integer::div_floor(&rows[i].free[col], &rows[p].free[col]);
                        rows[i] = spec.sub(&rows[i], &spec.scale(q, &rows[p]));
                    }
                }
            }
            if let Some(i) = (r..rows.len()).find(|&i| rows[i].free[col] != 0) {
                rows.swap(r, i);
                if rows[r].free[col] < 0 {
                    rows[r] = spec.neg(&rows[r]);
                }
                pivots.push(col);
                r += 1;
            }
        }
        let torsion_gens: Vec<Vec<u32>> = rows[r..].iter().map(|g| g.torsion.clone()).collect();
        let torsion = torsion_closure(spec, &torsion_gens);
        rows.truncate(r);
        // Reduce entries above each pivot into [0, pivot).
        for i in 0..r {
            let c = pivots[i];
            for k in 0..i {
                let q = Integer::div_floor(&rows[k].free[c], &rows[i].free[c]);
                if q != 0 {
                    rows[k] = spec.sub(&rows[k], &spec.scale(q, &rows[i]));
                }
            }
        }
        for row in rows.iter_mut() {
            row.torsion = coset_min(spec, &row.torsion, &torsion);
        }
        Ok(Subgroup { spec: spec.clone(), rows, pivots, torsion })
    }

    /// The whole group Γ.
    pub fn whole(spec: &GroupSpec) -> Subgroup {
        let gens: Vec<GroupElement> = (0..spec.rank()).map(|i| spec.unit(i)).collect();
        let mut sub = Subgroup::canonicalize(spec, &gens).expect("unit vectors are valid");
        sub.torsion = spec.torsion_elements();
        sub
    }

    /// The trivial subgroup {0}.
    pub fn trivial(spec: &GroupSpec) -> Subgroup {
        Subgroup::canonicalize(spec, &[]).expect("empty generator list")
    }

    /// Parses rows such as `2,0;0,2` (torsion residues after `/`, e.g. `2/1`).
    pub fn parse(spec: &GroupSpec, text: &str) -> Result<Subgroup> {
        let mut gens = Vec::new();
        for row in text.split(';').map(str::trim).filter(|s| !s.is_empty()) {
            let (free_txt, tors_txt) = match row.split_once('/') {
                Some((a, b)) => (a, b),
                None => (row, ""),
            };
            let parse_list = |s: &str| -> Result<Vec<i64>> {
                s.split(',')
                    .map(str::trim)
                    .filter(|t| !t.is_empty())
                    .map(|t| t.parse::<i64>().map_err(|_| Error::Invalid(format!("bad integer '{t}' in subgroup"))))
                    .collect()
            };
            let free = parse_list(free_txt)?;
            let mut tors = parse_list(tors_txt)?;
            if tors.is_empty() {
                tors = vec![0; spec.moduli().len()];
            }
            gens.push(spec.element(free, tors)?);
        }
        Subgroup::canonicalize(spec, &gens)
    }

    pub fn spec(&self) -> &GroupSpec {
        &self.spec
    }

    /// HNF rows with their torsion lifts.
    pub fn rows(&self) -> &[GroupElement] {
        &self.rows
    }

    /// Elements of H ∩ ({0} × G).
    pub fn torsion_part(&self) -> &[Vec<u32>] {
        &self.torsion
    }

    pub fn free_rank(&self) -> usize {
        self.rows.len()
    }

    /// A generating set: the HNF rows plus generators of the torsion part.
    pub fn generators(&self) -> Vec<GroupElement> {
        let mut out = self.rows.clone();
        let zero_free = vec![0i64; self.spec.rank()];
        for t in &self.torsion {
            if t.iter().any(|&x| x != 0) {
                out.push(GroupElement { free: zero_free.clone(), torsion: t.clone() });
            }
        }
        out
    }

    /// [Γ : H], or `None` when infinite.
    pub fn index(&self) -> Option<u64> {
        if self.rows.len() < self.spec.rank() {
            return None;
        }
        let det: u64 = self.rows.iter().zip(&self.pivots).map(|(r, &c)| r.free[c] as u64).product();
        Some(det * (self.spec.torsion_order() / self.torsion.len()) as u64)
    }

    /// Least representative of g modulo the rows (free coordinates in [0, pivot)
    /// at pivot columns) and modulo T on the torsion part.
    pub fn reduce(&self, g: &GroupElement) -> GroupElement {
        let mut v = g.clone();
        for (row, &c) in self.rows.iter().zip(&self.pivots) {
            let q = Integer::div_floor(&v.free[c], &row.free[c]);
            if q != 0 {
                v = self.spec.sub(&v, &self.spec.scale(q, row));
            }
        }
        v.torsion = coset_min(&self.spec, &v.torsion, &self.torsion);
        v
    }

    pub fn contains(&self, g: &GroupElement) -> bool {
        let mut v = g.clone();
        for (row, &c) in self.rows.iter().zip(&self.pivots) {
            if v.free[..c].iter().any(|&x| x != 0) {
                return false;
            }
            let (q, rem) = v.free[c].div_rem(&row.free[c]);
            if rem != 0 {
                return false;
            }
            v = self.spec.sub(&v, &self.spec.scale(q, row));
        }
        v.free_is_zero() && self.torsion.binary_search(&v.torsion).is_ok()
    }

    pub fn contains_subgroup(&self, other: &Subgroup) -> bool {
        other.generators().iter().all(|g| self.contains(g))
    }

    /// D with Γ = D ⊕ H, in canonical order; |D| = index.
    pub fn fundamental_domain(&self) -> Result<FiniteSet> {
        if self.index().is_none() {
            return invalid("fundamental domain requested for an infinite-index subgroup");
        }
        let d = self.spec.rank();
        let mut hi = vec![0i64; d];
        for (row, &c) in self.rows.iter().zip(&self.pivots) {
            hi[c] = row.free[c] - 1;
        }
        let lo = vec![0i64; d];
        let frees = self.spec.free_box(&lo, &hi);
        let reps: BTreeSet<Vec<u32>> =
            self.spec.torsion_elements().iter().map(|t| coset_min(&self.spec, t, &self.torsion)).collect();
        Ok(FiniteSet::new(
            frees.iter().filter(|g| reps.contains(&g.torsion)).cloned(),
        ))
    }

    /// All subgroups containing this one, for finite index; includes itself.
    pub fn overgroups(&self) -> Result<Vec<Subgroup>> {
        let dom = self.fundamental_domain()?;
        let mut seen: BTreeSet<Subgroup> = BTreeSet::new();
        seen.insert(self.clone());
        let mut queue = VecDeque::from([self.clone()]);
        while let Some(h) = queue.pop_front() {
            for g in &dom {
                if h.contains(g) {
                    continue;
                }
                let mut gens = h.generators();
                gens.push(g.clone());
                let k = Subgroup::canonicalize(&self.spec, &gens)?;
                if seen.insert(k.clone()) {
                    queue.push_back(k);
                }
            }
        }
        Ok(seen.into_iter().collect())
    }
}

impl fmt::Display for Subgroup {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let gens = self.generators();
        write!(f, "<")?;
        for (i, g) in gens.iter().enumerate() {
            if i > 0 {
                write!(f, ", ")?;
            }
            write!(f, "{g}")?;
        }
        write!(f, ">")
    }
}

/// All subgroups of G, each as a sorted element list, in canonical order.
pub fn torsion_subgroups(spec: &GroupSpec) -> Vec<Vec<Vec<u32>>> {
    let elems = spec.torsion_elements();
    let trivial = torsion_closure(spec, &[]);
    let mut seen: BTreeSet<Vec<Vec<u32>>> = BTreeSet::new();
    seen.insert(trivial.clone());
    let mut queue = VecDeque::from([trivial]);
    while let Some(h) = queue.pop_front() {
        for g in &elems {
            if h.binary_search(g).is_ok() {
                continue;
            }
            let mut gens = h.clone();
            gens.push(g.clone());
            let k = torsion_closure(spec, &gens);
            if seen.insert(k.clone()) {
                queue.push_back(k);
            }
        }
    }
    seen.into_iter().collect()
}

/// Every subgroup of index at most `max_index`, each once, sorted by index then form.
pub fn enumerate_subgroups(max_index: u64, spec: &GroupSpec) -> Result<Vec<Subgroup>> {
    let d = spec.rank();
    if d > 2 {
        return Err(Error::Unsupported(format!("subgroup enumeration needs rank at most 2, got {d}")));
    }
    let g_order = spec.torsion_order() as u64;
    let mut out = Vec::new();
    for t in torsion_subgroups(spec) {
        let quot = g_order / t.len() as u64;
        if quot > max_index {
            continue;
        }
        let lifts: Vec<Vec<u32>> = {
            let set: BTreeSet<Vec<u32>> =
                spec.torsion_elements().iter().map(|x| coset_min(spec, x, &t)).collect();
            set.into_iter().collect()
        };
        let free_budget = max_index / quot;
        for lattice in hnf_lattices(d, free_budget) {
            // Assign every combination of torsion lifts to the rows.
            let mut combos: Vec<Vec<Vec<u32>>> = vec![Vec::new()];
            for _ in 0..lattice.len() {
                combos = combos
                    .into_iter()
                    .flat_map(|c| {
                        lifts.iter().map(move |l| {
                            let mut c2 = c.clone();
                            c2.push(l.clone());
                            c2
                        })
                    })
                    .collect();
            }
            for combo in combos {
                let rows: Vec<GroupElement> = lattice
                    .iter()
                    .zip(&combo)
                    .map(|(f, l)| GroupElement { free: f.clone(), torsion: l.clone() })
                    .collect();
                out.push(Subgroup {
                    spec: spec.clone(),
                    pivots: (0..d).collect(),
                    rows,
                    torsion: t.clone(),
                });
            }
        }
    }
    out.sort_by(|a, b| a.index().cmp(&b.index()).then_with(|| a.cmp(b)));
    Ok(out)
}

/// Upper-triangular HNF matrices (rank d ≤ 2) with determinant at most `bound`.
fn hnf_lattices(d: usize, bound: u64) -> Vec<Vec<Vec<i64>>> {
    let bound = bound as i64;
    match d {
        0 => vec![Vec::new()],
        1 => (1..=bound).map(|a| vec![vec![a]]).collect(),
        _ => {
            let mut out = Vec::new();
            for a in 1..=bound {
                for c in 1..=bound / a {
                    for b in 0..c {
                        out.push(vec![vec![a, b], vec![0, c]]);
                    }
                }
            }
            out
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn z2() -> GroupSpec {
        GroupSpec::free(2)
    }

    #[test]
    fn hnf_examples() {
        let s = z2();
        let h = Subgroup::canonicalize(&s, &[s.free_element(&[2, 0]), s.free_element(&[0, 2])]).unwrap();
        assert_eq!(h.index(), Some(4));
        let h = Subgroup::canonicalize(&s, &[s.free_element(&[1, 1]), s.free_element(&[2, 0])]).unwrap();
        assert_eq!(h.rows(), &[s.free_element(&[1, 1]), s.free_element(&[0, 2])]);
        assert_eq!(h.index(), Some(2));
        let z = GroupSpec::free(1);
        assert_eq!(Subgroup::canonicalize(&z, &[z.free_element(&[3])]).unwrap().index(), Some(3));
        assert_eq!(Subgroup::canonicalize(&s, &[s.free_element(&[1, 0])]).unwrap().index(), None);
    }

    #[test]
    fn mixed_subgroup_is_not_a_product() {
        let s = GroupSpec::new(1, vec![2]).unwrap();
        let g = s.element(vec![1], vec![1]).unwrap();
        let h = Subgroup::canonicalize(&s, &[g.clone()]).unwrap();
        assert_eq!(h.index(), Some(2));
        assert!(h.contains(&g));
        assert!(!h.contains(&s.element(vec![1], vec![0]).unwrap()));
        assert!(h.contains(&s.element(vec![2], vec![0]).unwrap()));
        assert_eq!(h.fundamental_domain().unwrap().len(), 2);
    }

    #[test]
    fn fundamental_domains() {
        let z = GroupSpec::free(1);
        let h = Subgroup::canonicalize(&z, &[z.free_element(&[3])]).unwrap();
        assert_eq!(h.fundamental_domain().unwrap(), FiniteSet::from_ints(0..3));
        let s = z2();
        let h = Subgroup::parse(&s, "1,1;0,2").unwrap();
        assert_eq!(h.fundamental_domain().unwrap(), FiniteSet::from_free(&s, &[&[0, 0], &[0, 1]]));
        let h = Subgroup::parse(&s, "2,0;0,2").unwrap();
        assert_eq!(h.fundamental_domain().unwrap(), s.corner_box(1));
        assert!(Subgroup::parse(&s, "1,0").unwrap().fundamental_domain().is_err());
    }

    #[test]
    fn subgroup_counts() {
        let s = z2();
        let subs = enumerate_subgroups(4, &s).unwrap();
        let count = |n| subs.iter().filter(|h| h.index() == Some(n)).count();
        assert_eq!(count(2), 3);
        assert_eq!(count(4), 7);
        let z = GroupSpec::free(1);
        let subs = enumerate_subgroups(3, &z).unwrap();
        assert_eq!(subs.iter().map(|h| h.index().unwrap()).collect::<Vec<_>>(), vec![1, 2, 3]);
        assert!(enumerate_subgroups(2, &GroupSpec::free(3)).is_err());
    }

    #[test]
    fn torsion_group_subgroups() {
        // Z/2 × Z/2 has five subgroups; Z/4 has three.
        assert_eq!(torsion_subgroups(&GroupSpec::new(0, vec![2, 2]).unwrap()).len(), 5);
        assert_eq!(torsion_subgroups(&GroupSpec::new(0, vec![4]).unwrap()).len(), 3);
    }
}
