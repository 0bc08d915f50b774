//! Elements, finite sets and exact geometry of Γ = Z^d × G.

use std::cmp::Ordering;
use std::fmt;

use num_integer::Integer;
use num_rational::Ratio;
use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};

/// Shape of Γ: the free rank and the moduli of the finite factor.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct GroupSpec {
    rank: usize,
    moduli: Vec<u32>,
}

/// An element of Γ. The derived order is the fixed total order used for
/// tie-breaking: lexicographic on the free part, then on the torsion residues.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct GroupElement {
    pub free: Vec<i64>,
    pub torsion: Vec<u32>,
}

impl GroupSpec {
    pub fn new(rank: usize, moduli: Vec<u32>) -> Result<Self> {
        if let Some(m) = moduli.iter().find(|&&m| m < 2) {
            return invalid(format!("torsion modulus {m} must be at least 2"));
        }
        Ok(GroupSpec { rank, moduli })
    }

    /// Z^d with trivial finite factor.
    pub fn free(rank: usize) -> Self {
        GroupSpec { rank, moduli: Vec::new() }
    }

    pub fn rank(&self) -> usize {
        self.rank
    }

    pub fn moduli(&self) -> &[u32] {
        &self.moduli
    }

    /// |G|.
    pub fn torsion_order(&self) -> usize {
        self.moduli.iter().map(|&m| m as usize).product()
    }

    pub fn zero(&self) -> GroupElement {
        GroupElement { free: vec![0; self.rank], torsion: vec![0; self.moduli.len()] }
    }

    /// Builds an element, reducing residues; fails on a shape mismatch.
    pub fn element(&self, free: Vec<i64>, torsion: Vec<i64>) -> Result<GroupElement> {
        if free.len() != self.rank || torsion.len() != self.moduli.len() {
            return invalid(format!(
                "element has shape ({}; {}) but the group has rank {} and {} torsion factors",
                free.len(),
                torsion.len(),
                self.rank,
                self.moduli.len()
            ));
        }
        let torsion =
            torsion.iter().zip(&self.moduli).map(|(&t, &m)| t.mod_floor(&(m as i64)) as u32).collect();
        Ok(GroupElement { free, torsion })
    }

    /// Element with zero torsion part.
    pub fn free_element(&self, free: &[i64]) -> GroupElement {
        debug_assert_eq!(free.len(), self.rank);
        GroupElement { free: free.to_vec(), torsion: vec![0; self.moduli.len()] }
    }

    pub fn check(&self, g: &GroupElement) -> Result<()> {
        if g.free.len() != self.rank || g.torsion.len() != self.moduli.len() {
            return invalid(format!("element {g} does not belong to the group"));
        }
        if g.torsion.iter().zip(&self.moduli).any(|(&t, &m)| t >= m) {
            return invalid(format!("element {g} has unreduced residues"));
        }
        Ok(())
    }

    pub fn add(&self, a: &GroupElement, b: &GroupElement) -> GroupElement {
        GroupElement {
            free: a.free.iter().zip(&b.free).map(|(x, y)| x + y).collect(),
            torsion: self.add_torsion(&a.torsion, &b.torsion),
        }
    }

    pub fn sub(&self, a: &GroupElement, b: &GroupElement) -> GroupElement {
        self.add(a, &self.neg(b))
    }

    pub fn neg(&self, a: &GroupElement) -> GroupElement {
        GroupElement {
            free: a.free.iter().map(|x| -x).collect(),
            torsion: self.neg_torsion(&a.torsion),
        }
    }

    /// `k·a`.
    pub fn scale(&self, k: i64, a: &GroupElement) -> GroupElement {
        GroupElement {
            free: a.free.iter().map(|x| k * x).collect(),
            torsion: a
                .torsion
                .iter()
                .zip(&self.moduli)
                .map(|(&t, &m)| (k * t as i64).mod_floor(&(m as i64)) as u32)
                .collect(),
        }
    }

    pub fn add_torsion(&self, a: &[u32], b: &[u32]) -> Vec<u32> {
        a.iter().zip(b).zip(&self.moduli).map(|((&x, &y), &m)| (x + y) % m).collect()
    }

    pub fn neg_torsion(&self, a: &[u32]) -> Vec<u32> {
        a.iter().zip(&self.moduli).map(|(&x, &m)| (m - x) % m).collect()
    }

    /// All elements of G in the canonical (lexicographic) enumeration.
    pub fn torsion_elements(&self) -> Vec<Vec<u32>> {
        let mut out = vec![Vec::new()];
        for &m in &self.moduli {
            out = out
                .into_iter()
                .flat_map(|prefix| {
                    (0..m).map(move |r| {
                        let mut v = prefix.clone();
                        v.push(r);
                        v
                    })
                })
                .collect();
        }
        out
    }

    /// Unit vector e_i of the free part.
    pub fn unit(&self, i: usize) -> GroupElement {
        let mut g = self.zero();
        g.free[i] = 1;
        g
    }

    /// Product of free intervals `lo_i..=hi_i` with all of G.
    pub fn free_box(&self, lo: &[i64], hi: &[i64]) -> FiniteSet {
        let mut frees: Vec<Vec<i64>> = vec![Vec::new()];
        for i in 0..self.rank {
            frees = frees
                .into_iter()
                .flat_map(|p| {
                    (lo[i]..=hi[i]).map(move |c| {
                        let mut v = p.clone();
                        v.push(c);
                        v
                    })
                })
                .collect();
        }
        let tors = self.torsion_elements();
        let mut elems = Vec::with_capacity(frees.len() * tors.len());
        for f in &frees {
            for t in &tors {
                elems.push(GroupElement { free: f.clone(), torsion: t.clone() });
            }
        }
        FiniteSet::from_sorted(elems)
    }

    /// B_k = {-k..k}^d × G.
    pub fn make_box(&self, k: i64) -> Result<FiniteSet> {
        if k < 0 {
            return invalid(format!("box radius {k} is negative"));
        }
        Ok(self.free_box(&vec![-k; self.rank], &vec![k; self.rank]))
    }

    /// {0..m}^d × G.
    pub fn corner_box(&self, m: i64) -> FiniteSet {
        self.free_box(&vec![0; self.rank], &vec![m; self.rank])
    }

    /// Q_n = B_n \ B_{⌊n/10⌋}.
    pub fn make_annulus(&self, n: i64) -> Result<FiniteSet> {
        let outer = self.make_box(n)?;
        let inner = self.make_box(n / 10)?;
        Ok(outer.minus(&inner))
    }

    /// Squared Euclidean norm of the free part.
    pub fn norm2(&self, a: &GroupElement) -> i128 {
        a.free.iter().map(|&x| (x as i128) * (x as i128)).sum()
    }

    /// dist_Γ(a, b) = |free(a-b)| + [a ≠ b], as an exact value.
    pub fn dist(&self, a: &GroupElement, b: &GroupElement) -> MetricValue {
        let sq = a.free.iter().zip(&b.free).map(|(&x, &y)| ((x - y) as i128).pow(2)).sum();
        MetricValue { squared_euclidean: sq, torsion_delta: u8::from(a != b) }
    }

    /// Metric value between two elements together with their order.
    pub fn metric_and_order(&self, a: &GroupElement, b: &GroupElement) -> (MetricValue, Ordering) {
        (self.dist(a, b), a.cmp(b))
    }
}

impl GroupElement {
    pub fn is_zero(&self) -> bool {
        self.free.iter().all(|&x| x == 0) && self.torsion.iter().all(|&t| t == 0)
    }

    pub fn free_is_zero(&self) -> bool {
        self.free.iter().all(|&x| x == 0)
    }
}

impl fmt::Display for GroupElement {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "(")?;
        for (i, x) in self.free.iter().enumerate() {
            if i > 0 {
                write!(f, ",")?;
            }
            write!(f, "{x}")?;
        }
        if !self.torsion.is_empty() {
            write!(f, ";")?;
            for (i, t) in self.torsion.iter().enumerate() {
                if i > 0 {
                    write!(f, ",")?;
                }
                write!(f, "{t}")?;
            }
        }
        write!(f, ")")
    }
}

/// A value √a + δ with a a nonnegative integer and δ ∈ {0, 1}. Ordering is exact.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct MetricValue {
    pub squared_euclidean: i128,
    pub torsion_delta: u8,
}

impl MetricValue {
    pub fn as_f64(&self) -> f64 {
        (self.squared_euclidean as f64).sqrt() + self.torsion_delta as f64
    }
}

/// Compares √a + 1 against √b.
fn cmp_sqrt_plus_one(a: i128, b: i128) -> Ordering {
    // √a + 1 < √b  ⇔  b - a - 1 > 2√a  ⇔  t > 0 and t² > 4a with t = b - a - 1.
    let t = b - a - 1;
    if t < 0 {
        return Ordering::Greater;
    }
    match (t * t).cmp(&(4 * a)) {
        Ordering::Greater => Ordering::Less,
        Ordering::Equal => Ordering::Equal,
        Ordering::Less => Ordering::Greater,
    }
}

impl Ord for MetricValue {
    fn cmp(&self, other: &Self) -> Ordering {
        let (a, b) = (self.squared_euclidean, other.squared_euclidean);
        match (self.torsion_delta, other.torsion_delta) {
            (x, y) if x == y => a.cmp(&b),
            (1, 0) => cmp_sqrt_plus_one(a, b),
            _ => cmp_sqrt_plus_one(b, a).reverse(),
        }
    }
}

impl PartialOrd for MetricValue {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

/// A finite subset of Γ, strictly sorted in the canonical order.
#[derive(Clone, Debug, Default, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct FiniteSet {
    elems: Vec<GroupElement>,
}

impl FiniteSet {
    pub fn new(elems: impl IntoIterator<Item = GroupElement>) -> Self {
        let mut elems: Vec<_> = elems.into_iter().collect();
        elems.sort();
        elems.dedup();
        FiniteSet { elems }
    }

    pub(crate) fn from_sorted(elems: Vec<GroupElement>) -> Self {
        debug_assert!(elems.windows(2).all(|w| w[0] < w[1]));
        FiniteSet { elems }
    }

    pub fn empty() -> Self {
        FiniteSet { elems: Vec::new() }
    }

    /// Convenience constructor for subsets of Z^d given by free coordinates.
    pub fn from_free(spec: &GroupSpec, points: &[&[i64]]) -> Self {
        FiniteSet::new(points.iter().map(|p| spec.free_element(p)))
    }

    /// Subset of Z given by integers.
    pub fn from_ints(points: impl IntoIterator<Item = i64>) -> Self {
        FiniteSet::new(points.into_iter().map(|x| GroupElement { free: vec![x], torsion: vec![] }))
    }

    pub fn len(&self) -> usize {
        self.elems.len()
    }

    pub fn is_empty(&self) -> bool {
        self.elems.is_empty()
    }

    pub fn iter(&self) -> std::slice::Iter<'_, GroupElement> {
        self.elems.iter()
    }

    pub fn as_slice(&self) -> &[GroupElement] {
        &self.elems
    }

    pub fn contains(&self, g: &GroupElement) -> bool {
        self.elems.binary_search(g).is_ok()
    }

    /// Position of `g` in the canonical order.
    pub fn index_of(&self, g: &GroupElement) -> Option<usize> {
        self.elems.binary_search(g).ok()
    }

    pub fn translate(&self, spec: &GroupSpec, v: &GroupElement) -> FiniteSet {
        FiniteSet::new(self.elems.iter().map(|g| spec.add(g, v)))
    }

    pub fn neg(&self, spec: &GroupSpec) -> FiniteSet {
        FiniteSet::new(self.elems.iter().map(|g| spec.neg(g)))
    }

    /// Minkowski sum A + B.
    pub fn sum(&self, spec: &GroupSpec, other: &FiniteSet) -> FiniteSet {
        FiniteSet::new(self.elems.iter().flat_map(|a| other.elems.iter().map(move |b| spec.add(a, b))))
    }

    /// Difference set A − A.
    pub fn differences(&self, spec: &GroupSpec) -> FiniteSet {
        self.sum(spec, &self.neg(spec))
    }

    pub fn union(&self, other: &FiniteSet) -> FiniteSet {
        FiniteSet::new(self.elems.iter().chain(other.elems.iter()).cloned())
    }

    pub fn intersection(&self, other: &FiniteSet) -> FiniteSet {
        FiniteSet::from_sorted(self.elems.iter().filter(|g| other.contains(g)).cloned().collect())
    }

    pub fn minus(&self, other: &FiniteSet) -> FiniteSet {
        FiniteSet::from_sorted(self.elems.iter().filter(|g| !other.contains(g)).cloned().collect())
    }

    pub fn is_subset(&self, other: &FiniteSet) -> bool {
        self.elems.iter().all(|g| other.contains(g))
    }

    pub fn is_symmetric(&self, spec: &GroupSpec) -> bool {
        self.elems.iter().all(|g| self.contains(&spec.neg(g)))
    }

    pub fn first(&self) -> Option<&GroupElement> {
        self.elems.first()
    }

    /// Componentwise bounds of the free parts.
    pub fn free_bounds(&self) -> Option<(Vec<i64>, Vec<i64>)> {
        let first = self.elems.first()?;
        let mut lo = first.free.clone();
        let mut hi = first.free.clone();
        for g in &self.elems {
            for (i, &x) in g.free.iter().enumerate() {
                lo[i] = lo[i].min(x);
                hi[i] = hi[i].max(x);
            }
        }
        Some((lo, hi))
    }
}

impl<'a> IntoIterator for &'a FiniteSet {
    type Item = &'a GroupElement;
    type IntoIter = std::slice::Iter<'a, GroupElement>;
    fn into_iter(self) -> Self::IntoIter {
        self.elems.iter()
    }
}

impl fmt::Display for FiniteSet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "[")?;
        for (i, g) in self.elems.iter().enumerate() {
            if i > 0 {
                write!(f, ", ")?;
            }
            write!(f, "{g}")?;
        }
        write!(f, "]")
    }
}

/// ∂_K F = {γ : (γ+K) meets F and is not contained in F}.
pub fn k_boundary(spec: &GroupSpec, k: &FiniteSet, f: &FiniteSet) -> Result<FiniteSet> {
    if k.is_empty() {
        return invalid("K must be nonempty");
    }
    // Candidates γ with (γ+K) ∩ F ≠ ∅ are exactly F − K.
    let candidates = f.sum(spec, &k.neg(spec));
    let out = candidates
        .iter()
        .filter(|g| k.iter().any(|w| !f.contains(&spec.add(g, w))))
        .cloned()
        .collect::<Vec<_>>();
    Ok(FiniteSet::from_sorted(out))
}

/// |∂_K F| < ε·|F| with exact rational ε.
pub fn is_invariant(spec: &GroupSpec, k: &FiniteSet, eps: Ratio<u64>, f: &FiniteSet) -> Result<bool> {
    if f.is_empty() {
        return invalid("F must be nonempty");
    }
    if *eps.numer() == 0 {
        return invalid("epsilon must be positive");
    }
    let b = k_boundary(spec, k, f)?.len() as u128;
    Ok(b * (*eps.denom() as u128) < (*eps.numer() as u128) * f.len() as u128)
}

/// Translates a + B (a ∈ A) pairwise disjoint, via (A−A) ∩ (B−B) ⊆ {0}.
pub fn is_separated(spec: &GroupSpec, a: &FiniteSet, b: &FiniteSet) -> bool {
    if a.is_empty() || b.is_empty() {
        return true;
    }
    let da = a.differences(spec);
    let db = b.differences(spec);
    da.iter().all(|g| g.is_zero() || !db.contains(g))
}

/// Where a maximal separated set is sought.
#[derive(Clone, Debug)]
pub enum SeparationDomain<'a> {
    Finite(&'a FiniteSet),
    /// The finite quotient Γ/Γ0, represented by the fundamental domain.
    Quotient(&'a crate::subgroup::Subgroup),
}

/// Greedy maximal K-separated subset of the domain, scanned in canonical order.
pub fn maximal_separated(spec: &GroupSpec, k: &FiniteSet, domain: SeparationDomain<'_>) -> Result<FiniteSet> {
    let diffs = k.differences(spec);
    match domain {
        SeparationDomain::Finite(d) => {
            let mut chosen: Vec<GroupElement> = Vec::new();
            for g in d {
                if chosen.iter().all(|c| !diffs.contains(&spec.sub(g, c))) {
                    chosen.push(g.clone());
                }
            }
            Ok(FiniteSet::new(chosen))
        }
        SeparationDomain::Quotient(sub) => {
            if sub.spec() != spec {
                return Err(Error::Invalid("subgroup lives in a different group".into()));
            }
            let dom = sub.fundamental_domain()?;
            let reduced_diffs: Vec<GroupElement> = diffs.iter().map(|g| sub.reduce(g)).collect();
            let bad = FiniteSet::new(reduced_diffs);
            let mut chosen: Vec<GroupElement> = Vec::new();
            for g in &dom {
                if chosen.iter().all(|c| !bad.contains(&sub.reduce(&spec.sub(g, c)))) {
                    chosen.push(g.clone());
                }
            }
            Ok(FiniteSet::new(chosen))
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn z() -> GroupSpec {
        GroupSpec::free(1)
    }

    #[test]
    fn box_sizes() {
        assert_eq!(z().make_box(2).unwrap().len(), 5);
        let g = GroupSpec::new(2, vec![2]).unwrap();
        assert_eq!(g.make_box(1).unwrap().len(), 18);
        let q = z().make_annulus(5).unwrap();
        assert_eq!(q.len(), 10);
        assert!(!q.contains(&z().zero()));
        assert!(z().make_box(-1).is_err());
    }

    #[test]
    fn boundary_examples() {
        let s = z();
        let k = FiniteSet::from_ints([0, 1]);
        let f = FiniteSet::from_ints(0..=4);
        assert_eq!(k_boundary(&s, &k, &f).unwrap(), FiniteSet::from_ints([-1, 4]));
        assert!(k_boundary(&s, &FiniteSet::from_ints([0]), &f).unwrap().is_empty());
        let k3 = FiniteSet::from_ints([-1, 0, 1]);
        assert_eq!(k_boundary(&s, &k3, &FiniteSet::from_ints([0])).unwrap(), FiniteSet::from_ints([-1, 0, 1]));
        assert!(is_invariant(&s, &k, Ratio::new(1, 2), &f).unwrap());
        assert!(!is_invariant(&s, &k, Ratio::new(2, 5), &f).unwrap());
        assert!(k_boundary(&s, &FiniteSet::empty(), &f).is_err());
        assert!(is_invariant(&s, &k, Ratio::new(1, 2), &FiniteSet::empty()).is_err());
    }

    #[test]
    fn separation_examples() {
        let s = z();
        let b = FiniteSet::from_ints(0..=2);
        assert!(is_separated(&s, &FiniteSet::from_ints([0, 5]), &b));
        assert!(!is_separated(&s, &FiniteSet::from_ints([0, 2]), &b));
        let zero = FiniteSet::from_ints([0]);
        assert!(is_separated(&s, &zero, &zero));
        let k = FiniteSet::from_ints([-1, 0, 1]);
        let dom = FiniteSet::from_ints(0..=6);
        assert_eq!(
            maximal_separated(&s, &k, SeparationDomain::Finite(&dom)).unwrap(),
            FiniteSet::from_ints([0, 3, 6])
        );
        let dom5 = FiniteSet::from_ints(0..=4);
        assert_eq!(maximal_separated(&s, &zero, SeparationDomain::Finite(&dom5)).unwrap(), dom5);
    }

    #[test]
    fn metric_examples() {
        let s = GroupSpec::new(1, vec![2]).unwrap();
        let a = s.element(vec![0], vec![0]).unwrap();
        let b = s.element(vec![3], vec![1]).unwrap();
        let d = s.dist(&a, &b);
        assert_eq!(d, MetricValue { squared_euclidean: 9, torsion_delta: 1 });
        assert_eq!(d.as_f64(), 4.0);
        assert_eq!(s.dist(&a, &a).as_f64(), 0.0);
        let z1 = z();
        let p = z1.free_element(&[5]);
        let m = z1.free_element(&[-5]);
        assert_eq!(z1.dist(&p, &z1.zero()), z1.dist(&m, &z1.zero()));
        assert_eq!(z1.metric_and_order(&m, &p).1, Ordering::Less);
    }

    #[test]
    fn mixed_metric_comparison_matches_floats() {
        for a in 0..60i128 {
            for b in 0..60i128 {
                for (da, db) in [(0u8, 1u8), (1, 0), (0, 0), (1, 1)] {
                    let x = MetricValue { squared_euclidean: a, torsion_delta: da };
                    let y = MetricValue { squared_euclidean: b, torsion_delta: db };
                    let (fx, fy) = (x.as_f64(), y.as_f64());
                    if (fx - fy).abs() > 1e-9 {
                        assert_eq!(x.cmp(&y), fx.partial_cmp(&fy).unwrap(), "{a} {da} vs {b} {db}");
                    } else {
                        assert_eq!(x.cmp(&y), Ordering::Equal, "{a} {da} vs {b} {db}");
                    }
                }
            }
        }
    }
}
