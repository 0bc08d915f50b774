//! Embedding conditions into full shifts, conjugacy of finite periodic sets,
//! and a small one-dimensional embedding constructor with replayable certificates.

use std::collections::{BTreeMap, BTreeSet, HashMap};

use num_integer::Integer;
use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::block_code::SlidingBlockCode;
use crate::entropy::{entropy_exact_1d, entropy_upper_bound, periodic_lower_bound, strip_entropy, EntropyEstimate};
use crate::error::{Error, Result};
use crate::group::{FiniteSet, GroupElement, GroupSpec};
use crate::language::language;
use crate::oned::BlockGraph;
use crate::par;
use crate::pattern::Alphabet;
use crate::periodic::{
    least_period_counts, periodic_points, periodic_value, stabilizer, stabilizer_census, PeriodicPointSet,
};
use crate::perron::strongly_connected;
use crate::sft::SftSpec;
use crate::subgroup::{enumerate_subgroups, Subgroup};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum Branch {
    #[serde(rename = "ENTROPY-STRICT")]
    EntropyStrict,
    #[serde(rename = "CONJUGATE-FINITE")]
    Conjugate,
    #[serde(rename = "UNDECIDED")]
    Undecided,
}

impl Branch {
    pub fn tag(self) -> &'static str {
        match self {
            Branch::EntropyStrict => "ENTROPY-STRICT",
            Branch::Conjugate => "CONJUGATE-FINITE",
            Branch::Undecided => "UNDECIDED",
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum RowStatus {
    Pass,
    Fail,
    Undecided,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub enum Evidence {
    /// Certified enclosure of h against the target value ln|A| (or h(Y)).
    Entropy { source: EntropyEstimate, target_lower: f64, target_upper: f64 },
    /// Point counts, source against target.
    Counts { source: u128, target: u128 },
    /// q_n(X) ≤ s·λⁿ ≤ bⁿ − 2b^{n/2} ≤ q_n(Bᶻ) for every n ≥ n0.
    Tail { n0: u64, states: usize, lambda_upper: f64, alphabet: usize },
    /// Source and target are the same full shift.
    Identity,
    Note(String),
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ConditionRow {
    pub label: String,
    pub subgroup: Option<Subgroup>,
    pub branch: Branch,
    pub evidence: Evidence,
    pub status: RowStatus,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum Verdict {
    Yes,
    /// Index of the first failing row.
    No { row: usize },
    Inconclusive,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EmbedConditionReport {
    pub rows: Vec<ConditionRow>,
    pub verdict: Verdict,
    /// The quantifier bounds the rows were checked under.
    pub bounds: String,
}

impl EmbedConditionReport {
    fn conclude(rows: Vec<ConditionRow>, bounds: String) -> Self {
        let verdict = if let Some(i) = rows.iter().position(|r| r.status == RowStatus::Fail) {
            Verdict::No { row: i }
        } else if rows.iter().any(|r| r.status == RowStatus::Undecided) {
            Verdict::Inconclusive
        } else {
            Verdict::Yes
        };
        EmbedConditionReport { rows, verdict, bounds }
    }

    pub fn witness(&self) -> Option<&ConditionRow> {
        match self.verdict {
            Verdict::No { row } => self.rows.get(row),
            _ => None,
        }
    }
}

fn entropy_row(label: &str, source: EntropyEstimate, lo: f64, hi: f64) -> ConditionRow {
    let status = if source.upper < lo {
        RowStatus::Pass
    } else if source.lower > hi {
        RowStatus::Fail
    } else {
        RowStatus::Undecided
    };
    let branch = if status == RowStatus::Undecided { Branch::Undecided } else { Branch::EntropyStrict };
    ConditionRow {
        label: label.to_string(),
        subgroup: None,
        branch,
        evidence: Evidence::Entropy { source, target_lower: lo, target_upper: hi },
        status,
    }
}

fn count_row(label: String, subgroup: Option<Subgroup>, source: u128, target: u128) -> ConditionRow {
    ConditionRow {
        label,
        subgroup,
        branch: Branch::EntropyStrict,
        evidence: Evidence::Counts { source, target },
        status: if source <= target { RowStatus::Pass } else { RowStatus::Fail },
    }
}

fn identity_report(bounds: String) -> EmbedConditionReport {
    let row = ConditionRow {
        label: "conjugacy".into(),
        subgroup: None,
        branch: Branch::Conjugate,
        evidence: Evidence::Identity,
        status: RowStatus::Pass,
    };
    EmbedConditionReport::conclude(vec![row], bounds)
}

/// Irreducible and aperiodic trimmed block graph.
pub fn is_mixing(graph: &BlockGraph) -> bool {
    let n = graph.num_states();
    if n == 0 {
        return false;
    }
    let comps = strongly_connected(&graph.succ);
    if comps.len() != 1 || comps[0].len() != n {
        return false;
    }
    let mut level = vec![usize::MAX; n];
    level[0] = 0;
    let mut queue = std::collections::VecDeque::from([0usize]);
    let mut period = 0usize;
    while let Some(u) = queue.pop_front() {
        for &v in &graph.succ[u] {
            let v = v as usize;
            if level[v] == usize::MAX {
                level[v] = level[u] + 1;
                queue.push_back(v);
            } else {
                period = period.gcd(&(level[u] + 1).abs_diff(level[v]));
            }
        }
    }
    period == 1
}

/// Least n0 with s·(λ/b)ⁿ + 2·b^{−n/2} < 1, which then holds for all larger n.
fn tail_start(states: usize, lambda: f64, b: usize) -> Option<u64> {
    let b = b as f64;
    (1..=400u64).find(|&n| {
        let n = n as f64;
        states as f64 * (lambda / b).powf(n) + 2.0 * b.powf(-n / 2.0) < 1.0 - 1e-9
    })
}

/// Largest n with bⁿ representable in u128.
fn max_exact_period(b: usize) -> usize {
    let mut n = 0usize;
    let mut v: u128 = 1;
    while let Some(next) = v.checked_mul(b as u128) {
        v = next;
        n += 1;
    }
    n
}

/// Embedding conditions for a Z-SFT into a mixing Z-SFT.
///
/// YES is reported only for full-shift targets, where the tail bound turns
/// finitely many period checks into a statement about every n.
pub fn krieger_check(x: &SftSpec, y: &SftSpec, max_n: usize) -> Result<EmbedConditionReport> {
    let z = GroupSpec::free(1);
    if x.group() != &z || y.group() != &z {
        return Err(Error::Unsupported("the period-count criterion needs Z-subshifts".into()));
    }
    let bounds = format!("least periods n ≤ {max_n}");
    let gy = BlockGraph::build(y)?;
    if !is_mixing(&gy) {
        return Err(Error::Precondition("the target is not a mixing SFT".into()));
    }
    let b = y.alphabet_size();
    if x.is_full_shift() && y.is_full_shift() && x.alphabet_size() == b {
        return Ok(identity_report(bounds));
    }
    let hx = entropy_exact_1d(x)?;
    let hy = entropy_exact_1d(y)?;
    let mut rows = vec![entropy_row("h(X) < h(Y)", hx.clone(), hy.lower, hy.upper)];

    let target_full = y.is_full_shift();
    let gx = BlockGraph::build(x)?;
    let mut check_to = max_n;
    if target_full && rows[0].status == RowStatus::Pass {
        match tail_start(gx.num_states(), hx.upper.exp(), b) {
            Some(n0) => {
                rows.push(ConditionRow {
                    label: "period tail".into(),
                    subgroup: None,
                    branch: Branch::EntropyStrict,
                    evidence: Evidence::Tail {
                        n0,
                        states: gx.num_states(),
                        lambda_upper: hx.upper.exp(),
                        alphabet: b,
                    },
                    status: RowStatus::Pass,
                });
                check_to = check_to.max(n0.saturating_sub(1) as usize);
            }
            None => rows.push(ConditionRow {
                label: "period tail".into(),
                subgroup: None,
                branch: Branch::Undecided,
                evidence: Evidence::Note("entropy gap too small for the tail bound".into()),
                status: RowStatus::Undecided,
            }),
        }
    }
    if target_full && check_to > max_exact_period(b) {
        return Err(Error::Budget(format!("least periods up to {check_to} overflow exact counts")));
    }
    let qx = least_period_counts(x, check_to)?;
    let qy = least_period_counts(y, check_to)?;
    for n in 1..=check_to {
        rows.push(count_row(format!("q_{n}"), None, qx[n - 1], qy[n - 1]));
    }
    if !target_full {
        rows.push(ConditionRow {
            label: "period tail".into(),
            subgroup: None,
            branch: Branch::Undecided,
            evidence: Evidence::Note("no tail bound for targets other than full shifts".into()),
            status: RowStatus::Undecided,
        });
    }
    let bounds = format!("least periods n ≤ {check_to}, beyond by the tail bound");
    Ok(EmbedConditionReport::conclude(rows, bounds))
}

/// Primitive vectors of Z² with max-norm ≤ `bound`, one from each ± pair.
pub fn primitive_vectors(bound: i64) -> Vec<[i64; 2]> {
    let mut out = Vec::new();
    for a in 0..=bound {
        for b in -bound..=bound {
            if (a == 0 && b <= 0) || a.gcd(&b) != 1 {
                continue;
            }
            out.push([a, b]);
        }
    }
    out
}

/// |A^{Z^d}_H| (stabilizer exactly H) by inclusion–exclusion over overgroups.
pub fn full_shift_exact_count(a: usize, h: &Subgroup) -> Result<u128> {
    let overs = h.overgroups()?;
    let mut order: Vec<usize> = (0..overs.len()).collect();
    order.sort_by_key(|&i| overs[i].index());
    let mut exact: HashMap<usize, u128> = HashMap::new();
    for &i in &order {
        let idx = overs[i].index().ok_or_else(|| Error::Invalid("subgroup of infinite index".into()))?;
        let fixed = (a as u128)
            .checked_pow(idx as u32)
            .ok_or_else(|| Error::Overflow(format!("{a}^{idx}")))?;
        let above: u128 = order
            .iter()
            .filter(|&&j| j != i && overs[j].contains_subgroup(&overs[i]))
            .map(|j| exact[j])
            .sum();
        exact.insert(i, fixed - above);
    }
    let me = overs.iter().position(|k| k == h).expect("a subgroup is its own overgroup");
    Ok(exact[&me])
}

/// Largest box side tried when bounding h(X) from above.
const MAX_BOX_SIDE: i64 = 4;

/// Necessary-and-sufficient conditions for embedding a Z²-SFT into A^{Z²},
/// checked on finitely many rows.
pub fn z2_fullshift_check(
    x: &SftSpec,
    a: usize,
    max_index: u64,
    max_prim_norm: i64,
    max_n: u32,
) -> Result<EmbedConditionReport> {
    let spec = GroupSpec::free(2);
    if x.group() != &spec {
        return Err(Error::Unsupported("expected a Z²-subshift".into()));
    }
    let bounds = format!(
        "primitive v with max-norm ≤ {max_prim_norm}, n ≤ {max_n}; finite-index subgroups of index ≤ {max_index}"
    );
    if x.is_full_shift() && x.alphabet_size() == a {
        return Ok(identity_report(bounds));
    }
    let ln_a = (a as f64).ln();
    let mut rows = Vec::new();

    // Global entropy: certified lower bound first (for NO), then box upper bounds.
    let lower = periodic_lower_bound(x, 1).ok();
    let mut entropy = match lower {
        Some(l) if l.strictly_above(ln_a) => entropy_row("h(X) < ln|A|", l, ln_a, ln_a),
        _ => {
            let mut best = None;
            for m in 1..=MAX_BOX_SIDE {
                let e = entropy_upper_bound(x, &spec.corner_box(m - 1))?;
                let done = e.strictly_below(ln_a);
                best = Some(e);
                if done {
                    break;
                }
            }
            entropy_row("h(X) < ln|A|", best.expect("at least one box"), ln_a, ln_a)
        }
    };
    entropy.subgroup = None;
    rows.push(entropy);

    let strips: Vec<([i64; 2], u32)> =
        primitive_vectors(max_prim_norm).into_iter().flat_map(|v| (1..=max_n).map(move |n| (v, n))).collect();
    let strip_rows: Vec<Result<ConditionRow>> = par::map(&strips, |&(v, n)| {
        let e = strip_entropy(x, v, n)?;
        let mut row = entropy_row(&format!("h(X_{{{n}·({},{})}}) < ln|A|", v[0], v[1]), e, ln_a, ln_a);
        row.subgroup = Some(Subgroup::canonicalize(&spec, &[spec.free_element(&[n as i64 * v[0], n as i64 * v[1]])])?);
        Ok(row)
    });
    for r in strip_rows {
        rows.push(r?);
    }

    let subgroups: Vec<Subgroup> =
        enumerate_subgroups(max_index, &spec)?.into_iter().filter(|h| h.index().is_some()).collect();
    let torus_rows: Vec<Result<ConditionRow>> = par::map(&subgroups, |h| {
        let census = stabilizer_census(x, h)?;
        let source = census.get(h).expect("census row for the subgroup").exact as u128;
        let target = full_shift_exact_count(a, h)?;
        Ok(count_row(format!("|X_H| ≤ |A_H| for H = {h}"), Some(h.clone()), source, target))
    });
    for r in torus_rows {
        rows.push(r?);
    }
    Ok(EmbedConditionReport::conclude(rows, bounds))
}

/// An orbit of a finite periodic point set: member indices and their common stabilizer.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Orbit {
    pub stabilizer: Subgroup,
    pub members: Vec<usize>,
}

/// Index of σ_γ(config) within `p`, if present.
fn shift_index(p: &PeriodicPointSet, row: usize, gamma: &GroupElement) -> Option<usize> {
    let g = p.subgroup.spec();
    let cfg = p.configs.row(row);
    let moved: Vec<u8> =
        p.domain.iter().map(|d| periodic_value(&p.subgroup, &p.domain, cfg, &g.add(d, gamma))).collect();
    p.configs.position(&moved)
}

/// Orbits of Γ/Γ0 on the set, in order of their least member.
pub fn orbits(p: &PeriodicPointSet) -> Result<Vec<Orbit>> {
    let mut seen = vec![false; p.len()];
    let mut out = Vec::new();
    for i in 0..p.len() {
        if seen[i] {
            continue;
        }
        let mut members = BTreeSet::new();
        for d in &p.domain {
            let j = shift_index(p, i, d)
                .ok_or_else(|| Error::Invalid("periodic point set is not shift-invariant".into()))?;
            members.insert(j);
            seen[j] = true;
        }
        let stab = stabilizer(&p.subgroup, &p.domain, p.configs.row(i));
        out.push(Orbit { stabilizer: stab, members: members.into_iter().collect() });
    }
    Ok(out)
}

/// An equivariant bijection between two finite periodic point sets.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct FiniteConjugacy {
    pub conjugate: bool,
    /// Orbit counts per stabilizer, for each side.
    pub census: Vec<(Subgroup, usize, usize)>,
    /// Row of P ↦ row of Q, when conjugate.
    pub matching: Option<Vec<usize>>,
}

/// Decides conjugacy of X_Γ0-type sets by orbit types and builds a matching.
pub fn finite_conjugacy(p: &PeriodicPointSet, q: &PeriodicPointSet) -> Result<FiniteConjugacy> {
    if p.subgroup != q.subgroup {
        return Err(Error::Invalid("periodic point sets over different subgroups".into()));
    }
    let op = orbits(p)?;
    let oq = orbits(q)?;
    let mut by_type: BTreeMap<Subgroup, (Vec<&Orbit>, Vec<&Orbit>)> = BTreeMap::new();
    for o in &op {
        by_type.entry(o.stabilizer.clone()).or_default().0.push(o);
    }
    for o in &oq {
        by_type.entry(o.stabilizer.clone()).or_default().1.push(o);
    }
    let census: Vec<(Subgroup, usize, usize)> =
        by_type.iter().map(|(h, (a, b))| (h.clone(), a.len(), b.len())).collect();
    let conjugate = census.iter().all(|(_, a, b)| a == b);
    if !conjugate {
        return Ok(FiniteConjugacy { conjugate, census, matching: None });
    }
    let mut matching = vec![usize::MAX; p.len()];
    for (src, dst) in by_type.values() {
        for (a, b) in src.iter().zip(dst) {
            let (ra, rb) = (a.members[0], b.members[0]);
            for d in &p.domain {
                let i = shift_index(p, ra, d).expect("orbit member");
                let j = shift_index(q, rb, d).expect("orbit member");
                matching[i] = j;
            }
        }
    }
    Ok(FiniteConjugacy { conjugate, census, matching: Some(matching) })
}

/// Checks that `matching` is a bijection commuting with every shift.
pub fn verify_matching(p: &PeriodicPointSet, q: &PeriodicPointSet, matching: &[usize]) -> bool {
    if matching.len() != p.len() || p.len() != q.len() {
        return false;
    }
    let image: BTreeSet<usize> = matching.iter().copied().collect();
    if image.len() != q.len() || image.iter().any(|&j| j >= q.len()) {
        return false;
    }
    (0..p.len()).all(|i| {
        p.domain.iter().all(|d| match (shift_index(p, i, d), shift_index(q, matching[i], d)) {
            (Some(a), Some(b)) => matching[a] == b,
            _ => false,
        })
    })
}

/// One point of least period n, given by its word on {0..n−1}.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct PeriodicWord {
    pub period: u64,
    pub word: Vec<u8>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum InjectivityResult {
    /// Φ(x) on `window` determines x_0 for every admissible x.
    Window { radius: i64, window: FiniteSet, patterns_checked: u64, images: u64 },
    /// Two distinct points with the same image.
    Collision { left: PeriodicWord, right: PeriodicWord },
    /// No window up to the cap; the last conflicting pair of local patterns.
    Inconclusive { max_radius: i64, left: Vec<u8>, right: Vec<u8> },
}

/// Points of least period n ≤ `bound` of a Z-SFT.
pub fn least_period_points(x: &SftSpec, bound: u64) -> Result<Vec<PeriodicWord>> {
    let g = x.group();
    let mut out = Vec::new();
    for n in 1..=bound {
        let h = Subgroup::canonicalize(g, &[g.free_element(&[n as i64])])?;
        let set = periodic_points(x, &h, true)?;
        out.extend(set.configs.rows().map(|r| PeriodicWord { period: n, word: r.to_vec() }));
    }
    Ok(out)
}

/// Image of a periodic point under a code, as a word over the same period.
pub fn image_word(code: &SlidingBlockCode, p: &PeriodicWord) -> Result<Vec<u8>> {
    let g = &code.group;
    let h = Subgroup::canonicalize(g, &[g.free_element(&[p.period as i64])])?;
    let dom = h.fundamental_domain()?;
    code.apply_periodic(&h, &dom, &p.word)
}

fn least_period(word: &[u8]) -> u64 {
    let n = word.len();
    (1..=n).find(|&d| n % d == 0 && (0..n).all(|i| word[i] == word[(i + d) % n])).unwrap_or(n) as u64
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct PeriodicCheck {
    pub period_bound: u64,
    pub points_checked: u64,
    /// First pair of distinct points with equal images.
    pub collision: Option<(PeriodicWord, PeriodicWord)>,
    /// First point whose image has a different least period.
    pub stabilizer_change: Option<PeriodicWord>,
}

impl PeriodicCheck {
    pub fn passed(&self) -> bool {
        self.collision.is_none() && self.stabilizer_change.is_none()
    }
}

/// Injectivity and stabilizer preservation on all points of least period ≤ `bound`.
pub fn check_periodic_injectivity(x: &SftSpec, code: &SlidingBlockCode, bound: u64) -> Result<PeriodicCheck> {
    let points = least_period_points(x, bound)?;
    let images: Vec<Result<Vec<u8>>> = par::map(&points, |p| image_word(code, p));
    let mut seen: HashMap<(u64, Vec<u8>), usize> = HashMap::new();
    let mut collision = None;
    let mut stabilizer_change = None;
    for (i, img) in images.into_iter().enumerate() {
        let img = img?;
        let p = &points[i];
        if stabilizer_change.is_none() && least_period(&img) != p.period {
            stabilizer_change = Some(p.clone());
        }
        if let Some(&j) = seen.get(&(p.period, img.clone())) {
            collision.get_or_insert_with(|| (points[j].clone(), p.clone()));
        } else {
            seen.insert((p.period, img), i);
        }
    }
    Ok(PeriodicCheck { period_bound: bound, points_checked: points.len() as u64, collision, stabilizer_change })
}

/// Period bound used to look for global collisions before the window search.
const COLLISION_PERIODS: u64 = 6;

/// The least box B_r (r ≤ `max_radius`) on which Φ(x) determines x_0.
///
/// Exhaustive over the admissible (B_r + W₀)-patterns, exact in rank 1.
pub fn verify_injectivity(x: &SftSpec, code: &SlidingBlockCode, max_radius: i64) -> Result<InjectivityResult> {
    let g = x.group();
    if &code.group != g {
        return Err(Error::Invalid("code and subshift live on different groups".into()));
    }
    if g.rank() == 1 && g.torsion_order() == 1 {
        let check = check_periodic_injectivity(x, code, COLLISION_PERIODS)?;
        if let Some((left, right)) = check.collision {
            return Ok(InjectivityResult::Collision { left, right });
        }
    }
    let mut last = (Vec::new(), Vec::new());
    for r in 0..=max_radius {
        let w = g.make_box(r)?;
        let joint = w.sum(g, &code.window);
        let lang = language(x, &joint)?;
        let pos: Vec<Vec<usize>> = w
            .iter()
            .map(|v| code.window.iter().map(|u| joint.index_of(&g.add(v, u)).expect("in joint window")).collect())
            .collect();
        let centre = joint.index_of(&g.zero()).expect("zero in joint window");
        let mut by_image: HashMap<Vec<u8>, usize> = HashMap::with_capacity(lang.len());
        let mut conflict = None;
        for i in 0..lang.len() {
            let row = lang.table.row(i);
            let mut img = Vec::with_capacity(pos.len());
            for sites in &pos {
                let word: Vec<u8> = sites.iter().map(|&s| row[s]).collect();
                img.push(code.lookup(&word).ok_or_else(|| {
                    Error::Precondition(format!("the code is undefined on the admissible word {word:?}"))
                })?);
            }
            match by_image.get(&img) {
                Some(&j) if lang.table.row(j)[centre] != row[centre] => {
                    conflict = Some((lang.table.row(j).to_vec(), row.to_vec()));
                    break;
                }
                Some(_) => {}
                None => {
                    by_image.insert(img, i);
                }
            }
        }
        match conflict {
            None => {
                return Ok(InjectivityResult::Window {
                    radius: r,
                    window: w,
                    patterns_checked: lang.len() as u64,
                    images: by_image.len() as u64,
                })
            }
            Some(c) => last = c,
        }
    }
    Ok(InjectivityResult::Inconclusive { max_radius, left: last.0, right: last.1 })
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum Stage {
    /// Injective relabelling of the symbols that occur in X.
    SymbolInjection,
    /// A k-block code injective on the followers and on the predecessors of every (k−1)-block.
    ResolvingBlock { k: usize, attempt: usize },
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Transcript {
    pub stage: Stage,
    pub periodic: PeriodicCheck,
    pub injectivity: InjectivityResult,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct EmbeddingArtifact {
    pub code: SlidingBlockCode,
    pub injectivity_window: FiniteSet,
    pub transcript: Transcript,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct EmbeddingParams {
    pub period_bound: u64,
    /// Largest injectivity box radius tried.
    pub max_radius: i64,
    /// Largest block length for resolving codes.
    pub max_block: usize,
    pub attempts: usize,
    pub seed: u64,
}

impl Default for EmbeddingParams {
    fn default() -> Self {
        EmbeddingParams { period_bound: 8, max_radius: 9, max_block: 4, attempts: 32, seed: 7 }
    }
}

fn symbol_injection(x: &SftSpec, b: usize) -> Result<Option<SlidingBlockCode>> {
    let g = x.group();
    let used = language(x, &FiniteSet::new([g.zero()]))?;
    if used.len() > b {
        return Ok(None);
    }
    let mut map: BTreeMap<u8, u8> = BTreeMap::new();
    for (i, r) in used.table.rows().enumerate() {
        map.insert(r[0], i as u8);
    }
    let table = map.into_iter().map(|(s, t)| (vec![s], t)).collect();
    Ok(Some(SlidingBlockCode::new(
        g.clone(),
        x.alphabet().clone(),
        Alphabet::numeric(b),
        FiniteSet::new([g.zero()]),
        table,
    )?))
}

/// Colors the admissible k-blocks so that blocks sharing their first k−1 or
/// their last k−1 symbols get distinct colors; greedy in a seeded random order.
fn resolving_coloring(blocks: &[Vec<u8>], b: usize, rng: &mut ChaCha8Rng) -> Option<Vec<u8>> {
    let k = blocks.first()?.len();
    let mut order: Vec<usize> = (0..blocks.len()).collect();
    order.shuffle(rng);
    let mut colors = vec![u8::MAX; blocks.len()];
    let mut out_used: HashMap<&[u8], Vec<bool>> = HashMap::new();
    let mut in_used: HashMap<&[u8], Vec<bool>> = HashMap::new();
    for i in order {
        let head = &blocks[i][..k - 1];
        let tail = &blocks[i][1..];
        let ou = out_used.entry(head).or_insert_with(|| vec![false; b]);
        let iu = in_used.entry(tail).or_insert_with(|| vec![false; b]);
        let c = (0..b).find(|&c| !ou[c] && !iu[c])?;
        ou[c] = true;
        iu[c] = true;
        colors[i] = c as u8;
    }
    Some(colors)
}

fn certify(
    x: &SftSpec,
    code: SlidingBlockCode,
    stage: Stage,
    params: &EmbeddingParams,
) -> Result<std::result::Result<EmbeddingArtifact, String>> {
    let periodic = check_periodic_injectivity(x, &code, params.period_bound)?;
    if !periodic.passed() {
        return Ok(Err(format!("{stage:?}: periodic points collide or change period")));
    }
    let injectivity = verify_injectivity(x, &code, params.max_radius)?;
    match &injectivity {
        InjectivityResult::Window { window, .. } => {
            let window = window.clone();
            Ok(Ok(EmbeddingArtifact { code, injectivity_window: window, transcript: Transcript { stage, periodic, injectivity } }))
        }
        InjectivityResult::Collision { left, right } => {
            Ok(Err(format!("{stage:?}: {:?} and {:?} share an image", left.word, right.word)))
        }
        InjectivityResult::Inconclusive { max_radius, .. } => {
            Ok(Err(format!("{stage:?}: no injectivity window up to radius {max_radius}")))
        }
    }
}

/// Builds and certifies an embedding of a Z-SFT into the full shift on `b` symbols.
pub fn construct_embedding_1d(x: &SftSpec, b: usize, params: &EmbeddingParams) -> Result<EmbeddingArtifact> {
    let g = GroupSpec::free(1);
    if x.group() != &g {
        return Err(Error::Unsupported("the constructor handles Z-subshifts".into()));
    }
    let target = SftSpec::full_shift(g.clone(), Alphabet::numeric(b));
    let report = krieger_check(x, &target, params.period_bound as usize)?;
    if report.verdict != Verdict::Yes {
        return Err(Error::Precondition(format!("embedding conditions do not hold: {:?}", report.verdict)));
    }
    let mut obstructions = Vec::new();
    if let Some(code) = symbol_injection(x, b)? {
        match certify(x, code, Stage::SymbolInjection, params)? {
            Ok(a) => return Ok(a),
            Err(e) => obstructions.push(e),
        }
    }
    for k in 2..=params.max_block {
        let window = FiniteSet::from_ints(0..k as i64);
        let lang = language(x, &window)?;
        let blocks: Vec<Vec<u8>> = lang.table.rows().map(<[u8]>::to_vec).collect();
        let mut tried = BTreeSet::new();
        for attempt in 0..params.attempts {
            let mut rng = ChaCha8Rng::seed_from_u64(params.seed);
            rng.set_stream((k * params.attempts + attempt) as u64);
            let Some(colors) = resolving_coloring(&blocks, b, &mut rng) else { continue };
            if !tried.insert(colors.clone()) {
                continue;
            }
            // Words outside the language never occur; send them to symbol 0.
            let code = SlidingBlockCode::from_fn(
                g.clone(),
                x.alphabet().clone(),
                Alphabet::numeric(b),
                window.clone(),
                |w| lang.table.position(w).map_or(0, |i| colors[i]),
            )?;
            match certify(x, code, Stage::ResolvingBlock { k, attempt }, params)? {
                Ok(a) => return Ok(a),
                Err(e) => obstructions.push(e),
            }
        }
    }
    Err(Error::Inconclusive(if obstructions.is_empty() {
        "no construction stage applies at these window sizes".into()
    } else {
        obstructions.join("; ")
    }))
}

/// Recomputes an artifact's certificate and compares it with the stored one.
pub fn replay_certificate(x: &SftSpec, artifact: &EmbeddingArtifact) -> Result<bool> {
    let t = &artifact.transcript;
    let periodic = check_periodic_injectivity(x, &artifact.code, t.periodic.period_bound)?;
    let radius = match &t.injectivity {
        InjectivityResult::Window { radius, .. } => *radius,
        _ => return Ok(false),
    };
    let injectivity = verify_injectivity(x, &artifact.code, radius)?;
    Ok(periodic == t.periodic
        && injectivity == t.injectivity
        && matches!(&injectivity, InjectivityResult::Window { window, .. } if window == &artifact.injectivity_window))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::sft::library::*;

    fn two() -> SftSpec {
        full_shift(1, 2)
    }

    #[test]
    fn krieger_golden_into_two_shift() {
        let r = krieger_check(&golden_mean(), &two(), 6).unwrap();
        assert_eq!(r.verdict, Verdict::Yes);
        let counts: Vec<(u128, u128)> = r
            .rows
            .iter()
            .filter_map(|row| match row.evidence {
                Evidence::Counts { source, target } => Some((source, target)),
                _ => None,
            })
            .take(6)
            .collect();
        assert_eq!(counts, vec![(1, 2), (2, 2), (3, 6), (4, 12), (10, 30), (12, 54)]);
    }

    #[test]
    fn krieger_rejections() {
        let r = krieger_check(&two(), &golden_mean(), 6).unwrap();
        assert_eq!(r.verdict, Verdict::No { row: 0 });
        assert!(matches!(r.witness().unwrap().evidence, Evidence::Entropy { .. }));
        let r = krieger_check(&two_fixed_points(), &golden_mean(), 6).unwrap();
        let w = r.witness().unwrap();
        assert_eq!(w.label, "q_1");
        assert_eq!(w.evidence, Evidence::Counts { source: 2, target: 1 });
        assert_eq!(krieger_check(&two(), &two(), 6).unwrap().verdict, Verdict::Yes);
    }

    #[test]
    fn non_mixing_target_is_rejected() {
        assert!(krieger_check(&golden_mean(), &two_fixed_points(), 4).is_err());
    }

    #[test]
    fn exact_counts_partition_the_torus() {
        let spec = GroupSpec::free(2);
        for h in enumerate_subgroups(6, &spec).unwrap() {
            let idx = h.index().unwrap();
            let total: u128 = h.overgroups().unwrap().iter().map(|k| full_shift_exact_count(2, k).unwrap()).sum();
            assert_eq!(total, 2u128.pow(idx as u32), "{h}");
        }
    }

    #[test]
    fn three_shift_does_not_embed_in_the_plane() {
        let r = z2_fullshift_check(&full_shift(2, 3), 2, 2, 1, 1).unwrap();
        assert_eq!(r.verdict, Verdict::No { row: 0 });
        assert_eq!(z2_fullshift_check(&full_shift(2, 2), 2, 6, 3, 4).unwrap().verdict, Verdict::Yes);
    }

    #[test]
    fn hard_square_battery() {
        let t = std::time::Instant::now();
        let r = z2_fullshift_check(&hard_square(), 2, 6, 3, 4).unwrap();
        eprintln!("{} rows in {:?}", r.rows.len(), t.elapsed());
        assert_eq!(r.verdict, Verdict::Yes, "{:?}", r.rows.iter().find(|r| r.status != RowStatus::Pass));
    }

    #[test]
    fn torus_conjugacy() {
        let spec = GroupSpec::free(2);
        let h = Subgroup::parse(&spec, "2,0;0,2").unwrap();
        let p = periodic_points(&hard_square(), &h, true).unwrap();
        let q = periodic_points(&full_shift(2, 2), &h, true).unwrap();
        assert_eq!((p.len(), q.len()), (4, 8));
        assert!(!finite_conjugacy(&p, &q).unwrap().conjugate);
        let same = finite_conjugacy(&p, &p).unwrap();
        assert!(same.conjugate);
        assert!(verify_matching(&p, &p, same.matching.as_ref().unwrap()));
        let z = GroupSpec::free(1);
        let one = Subgroup::parse(&z, "1").unwrap();
        let a = periodic_points(&single_fixed_point(), &one, true).unwrap();
        let b = periodic_points(&golden_mean(), &one, true).unwrap();
        assert!(finite_conjugacy(&a, &b).unwrap().conjugate);
    }

    #[test]
    fn injectivity_examples() {
        let id = SlidingBlockCode::identity(GroupSpec::free(1), Alphabet::numeric(2));
        match verify_injectivity(&two(), &id, 3).unwrap() {
            InjectivityResult::Window { radius, .. } => assert_eq!(radius, 0),
            other => panic!("{other:?}"),
        }
        match verify_injectivity(&two(), &SlidingBlockCode::xor(), 3).unwrap() {
            InjectivityResult::Collision { left, right } => {
                assert_eq!((left.word, right.word), (vec![0], vec![1]));
            }
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn trivial_artifacts() {
        let p = EmbeddingParams::default();
        let a = construct_embedding_1d(&two(), 2, &p).unwrap();
        assert_eq!(a.code, SlidingBlockCode::identity(GroupSpec::free(1), Alphabet::numeric(2)));
        assert!(replay_certificate(&two(), &a).unwrap());
        let f = single_fixed_point();
        let a = construct_embedding_1d(&f, 2, &p).unwrap();
        assert_eq!(a.code.lookup(&[0]), Some(0));
        assert!(replay_certificate(&f, &a).unwrap());
    }

    /// Z on {0,1,2}: 0 → 0 or 1, 1 → 2, 2 → 0. Three symbols but entropy below ln 2.
    fn three_symbol_loop() -> SftSpec {
        let z = GroupSpec::free(1);
        let mut forbidden = Vec::new();
        for (a, b) in [(0, 2), (1, 0), (1, 1), (2, 1), (2, 2)] {
            forbidden.push(crate::pattern::Pattern::word(0, &[a, b]));
        }
        SftSpec::new(z, Alphabet::numeric(3), FiniteSet::from_ints([0, 1]), forbidden).unwrap()
    }

    #[test]
    fn resolving_stage_embeds_three_symbols_into_two() {
        let x = three_symbol_loop();
        let a = construct_embedding_1d(&x, 2, &EmbeddingParams::default()).unwrap();
        assert!(matches!(a.transcript.stage, Stage::ResolvingBlock { .. }));
        assert!(replay_certificate(&x, &a).unwrap());
    }
}
