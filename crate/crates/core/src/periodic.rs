//! Periodic points over the subgroup lattice, least-period tables and kernels.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::enumerate::Csp;
use crate::error::{Error, Result};
use crate::group::{FiniteSet, GroupElement};
use crate::language::{language, Exactness};
use crate::oned::BlockGraph;
use crate::pattern::{Pattern, PatternTable};
use crate::sft::SftSpec;
use crate::subgroup::{enumerate_subgroups, Subgroup};

/// Largest fundamental domain a torus enumeration accepts.
pub const TORUS_SITE_LIMIT: u64 = 4096;
/// Largest number of torus configurations materialized at once.
pub const TORUS_BUDGET: usize = 1 << 22;

/// Constraint system of Γ0-periodic configurations, indexed by the canonical
/// fundamental domain of Γ0.
pub fn torus_csp<'a>(x: &'a SftSpec, h: &Subgroup) -> Result<Csp<'a>> {
    let index = h.index().ok_or_else(|| Error::Invalid(format!("{h} has infinite index")))?;
    if index > TORUS_SITE_LIMIT {
        return Err(Error::Budget(format!("fundamental domain of {index} sites")));
    }
    let dom = h.fundamental_domain()?;
    let g = x.group();
    let mut csp = Csp::uniform(dom.len(), x.alphabet_size());
    for grp in x.compiled() {
        let handle = csp.add_set(&grp.set);
        for t in &dom {
            let sites = grp
                .support
                .iter()
                .map(|s| dom.index_of(&h.reduce(&g.add(t, s))).expect("reduced element lies in the domain"))
                .collect();
            csp.forbid(handle, sites);
        }
    }
    Ok(csp)
}

/// Configurations of X fixed by Γ0, read on its fundamental domain.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct PeriodicPointSet {
    pub subgroup: Subgroup,
    /// True when only configurations with stabilizer exactly Γ0 are listed.
    pub exact_stabilizer: bool,
    pub domain: FiniteSet,
    pub configs: PatternTable,
}

impl PeriodicPointSet {
    pub fn len(&self) -> usize {
        self.configs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.configs.is_empty()
    }

    pub fn patterns(&self) -> impl Iterator<Item = Pattern> + '_ {
        self.configs.rows().map(|r| Pattern::new(self.domain.clone(), r.to_vec()).expect("row width"))
    }
}

/// Value of a Γ0-periodic configuration at an arbitrary site.
pub fn periodic_value(h: &Subgroup, domain: &FiniteSet, config: &[u8], site: &GroupElement) -> u8 {
    config[domain.index_of(&h.reduce(site)).expect("reduced element lies in the domain")]
}

/// Whether σ_γ fixes the Γ0-periodic configuration.
pub fn fixed_by(h: &Subgroup, domain: &FiniteSet, config: &[u8], gamma: &GroupElement) -> bool {
    let g = h.spec();
    domain.iter().zip(config).all(|(d, &v)| periodic_value(h, domain, config, &g.add(d, gamma)) == v)
}

/// The stabilizer of a Γ0-periodic configuration.
pub fn stabilizer(h: &Subgroup, domain: &FiniteSet, config: &[u8]) -> Subgroup {
    let mut gens = h.generators();
    gens.extend(domain.iter().filter(|d| !d.is_zero() && fixed_by(h, domain, config, d)).cloned());
    Subgroup::canonicalize(h.spec(), &gens).expect("elements of the group")
}

/// X_[Γ0] (all Γ0-fixed points) or, with `exact_stabilizer`, X_Γ0.
pub fn periodic_points(x: &SftSpec, h: &Subgroup, exact_stabilizer: bool) -> Result<PeriodicPointSet> {
    if h.spec() != x.group() {
        return Err(Error::Invalid("subgroup lives in a different group".into()));
    }
    let domain = h.fundamental_domain()?;
    let all = torus_csp(x, h)?.solutions(TORUS_BUDGET)?;
    let configs = if exact_stabilizer {
        let gens: Vec<GroupElement> = domain.iter().filter(|d| !d.is_zero()).cloned().collect();
        let keep: Vec<bool> =
            crate::par::map_range(all.len(), |i| gens.iter().all(|g| !fixed_by(h, &domain, all.row(i), g)));
        let rows: Vec<u8> = all.rows().zip(&keep).filter(|(_, &k)| k).flat_map(|(r, _)| r.to_vec()).collect();
        let n = keep.iter().filter(|&&k| k).count();
        PatternTable::from_sorted_flat(domain.len(), n, rows)
    } else {
        all
    };
    Ok(PeriodicPointSet { subgroup: h.clone(), exact_stabilizer, domain, configs })
}

/// |X_[H]| for H = Γ0 and every overgroup, and |X_H| for each by the
/// recursion |X_H| = |X_[H]| − Σ_{K ⊋ H} |X_K|.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct StabilizerCensus {
    pub rows: Vec<CensusRow>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct CensusRow {
    pub subgroup: Subgroup,
    pub fixed: u64,
    pub exact: u64,
}

impl StabilizerCensus {
    pub fn get(&self, h: &Subgroup) -> Option<&CensusRow> {
        self.rows.iter().find(|r| &r.subgroup == h)
    }
}

pub fn stabilizer_census(x: &SftSpec, h: &Subgroup) -> Result<StabilizerCensus> {
    let overs = h.overgroups()?;
    let counts: Vec<Result<u64>> = crate::par::map(&overs, |k| Ok(torus_csp(x, k)?.count()));
    let mut fixed = Vec::with_capacity(overs.len());
    for c in counts {
        fixed.push(c?);
    }
    // Larger subgroups have smaller index; process them first.
    let mut order: Vec<usize> = (0..overs.len()).collect();
    order.sort_by_key(|&i| overs[i].index());
    let mut exact: BTreeMap<usize, u64> = BTreeMap::new();
    for &i in &order {
        let above: u64 = order
            .iter()
            .filter(|&&j| j != i && overs[j].contains_subgroup(&overs[i]))
            .map(|j| exact[j])
            .sum();
        exact.insert(i, fixed[i] - above);
    }
    let mut rows: Vec<CensusRow> = (0..overs.len())
        .map(|i| CensusRow { subgroup: overs[i].clone(), fixed: fixed[i], exact: exact[&i] })
        .collect();
    rows.sort_by(|a, b| a.subgroup.index().cmp(&b.subgroup.index()).reverse().then(a.subgroup.cmp(&b.subgroup)));
    Ok(StabilizerCensus { rows })
}

/// tr(A^n) for n = 1..=max_n, with checked arithmetic.
pub fn traces(graph: &BlockGraph, max_n: usize) -> Result<Vec<u128>> {
    let s = graph.num_states();
    let mut out = Vec::with_capacity(max_n);
    if s == 0 {
        return Ok(vec![0; max_n]);
    }
    // Walk counts from each start state, one row of A^n per state.
    let rows: Vec<Result<Vec<u128>>> = crate::par::map_range(s, |start| {
        let mut v = vec![0u128; s];
        v[start] = 1;
        let mut diag = Vec::with_capacity(max_n);
        for _ in 0..max_n {
            let mut next = vec![0u128; s];
            for (a, succ) in graph.succ.iter().enumerate() {
                if v[a] == 0 {
                    continue;
                }
                for &t in succ {
                    let t = t as usize;
                    next[t] = next[t].checked_add(v[a]).ok_or(Error::Overflow("trace".into()))?;
                }
            }
            v = next;
            diag.push(v[start]);
        }
        Ok(diag)
    });
    let mut diags = Vec::with_capacity(s);
    for r in rows {
        diags.push(r?);
    }
    for n in 0..max_n {
        let mut t = 0u128;
        for d in &diags {
            t = t.checked_add(d[n]).ok_or(Error::Overflow("trace".into()))?;
        }
        out.push(t);
    }
    Ok(out)
}

/// Least-period counts q_1..q_n from fixed-point counts p_1..p_n.
pub fn sieve_least_periods(fixed: &[u128]) -> Vec<u128> {
    let mut q: Vec<u128> = Vec::with_capacity(fixed.len());
    for n in 1..=fixed.len() {
        let lower: u128 = (1..n).filter(|d| n % d == 0).map(|d| q[d - 1]).sum();
        q.push(fixed[n - 1] - lower);
    }
    q
}

/// q_n, the number of points of least period n under the Z-shift, for n ≤ max_n.
pub fn least_period_counts(x: &SftSpec, max_n: usize) -> Result<Vec<u128>> {
    let graph = BlockGraph::build(x)?;
    Ok(sieve_least_periods(&traces(&graph, max_n)?))
}

/// Evidence about one candidate kernel element.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum KernelEvidence {
    /// A Γ0-periodic point moved by σ_γ.
    Excluded { subgroup: Subgroup, config: Vec<u8> },
    /// Every pattern on `window` in the computed language agrees at 0 and γ.
    Implied { window: FiniteSet, exactness: Exactness },
    Undetermined,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct KernelCertificate {
    pub candidates: Vec<(GroupElement, KernelEvidence)>,
    /// The subgroup generated by candidates with implied membership.
    pub kernel: Subgroup,
}

fn exclusion_index(rank: usize) -> u64 {
    match rank {
        0 => 1,
        1 => 8,
        _ => 4,
    }
}

/// Decides membership of each nonzero γ ∈ B_bound in Ker(X).
pub fn kernel_of(x: &SftSpec, bound: i64) -> Result<KernelCertificate> {
    let g = x.group();
    let subgroups = if g.rank() == 0 {
        vec![Subgroup::trivial(g)]
    } else {
        enumerate_subgroups(exclusion_index(g.rank()), g)?
    };
    let mut points: Vec<PeriodicPointSet> = Vec::new();
    for h in subgroups {
        points.push(periodic_points(x, &h, false)?);
    }
    let candidates: Vec<GroupElement> = g.make_box(bound)?.iter().filter(|c| !c.is_zero()).cloned().collect();
    let evidence: Vec<Result<KernelEvidence>> = crate::par::map(&candidates, |c| {
        for p in &points {
            for row in p.configs.rows() {
                if !fixed_by(&p.subgroup, &p.domain, row, c) {
                    return Ok(KernelEvidence::Excluded { subgroup: p.subgroup.clone(), config: row.to_vec() });
                }
            }
        }
        implied_by_window(x, c)
    });
    let mut out = Vec::with_capacity(candidates.len());
    let mut members = Vec::new();
    for (c, e) in candidates.into_iter().zip(evidence) {
        let e = e?;
        if matches!(e, KernelEvidence::Implied { .. }) {
            members.push(c.clone());
        }
        out.push((c, e));
    }
    let kernel = Subgroup::canonicalize(g, &members)?;
    Ok(KernelCertificate { candidates: out, kernel })
}

fn implied_by_window(x: &SftSpec, gamma: &GroupElement) -> Result<KernelEvidence> {
    let g = x.group();
    let pair = FiniteSet::new([g.zero(), gamma.clone()]);
    let (lo, hi) = pair.free_bounds().unwrap_or_default();
    for m in 0..3i64 {
        let lo: Vec<i64> = lo.iter().map(|v| v - m).collect();
        let hi: Vec<i64> = hi.iter().map(|v| v + m).collect();
        let window = g.free_box(&lo, &hi);
        let lang = match language(x, &window) {
            Ok(l) => l,
            Err(Error::Budget(_)) => break,
            Err(e) => return Err(e),
        };
        let i0 = window.index_of(&g.zero()).expect("zero in window");
        let i1 = window.index_of(gamma).expect("gamma in window");
        if lang.table.rows().all(|r| r[i0] == r[i1]) {
            return Ok(KernelEvidence::Implied { window, exactness: lang.exactness });
        }
        if lang.exactness == Exactness::Exact {
            break;
        }
    }
    Ok(KernelEvidence::Undetermined)
}

/// Re-checks a certificate entry from scratch.
pub fn replay_kernel_evidence(x: &SftSpec, gamma: &GroupElement, e: &KernelEvidence) -> Result<bool> {
    match e {
        KernelEvidence::Excluded { subgroup, config } => {
            let dom = subgroup.fundamental_domain()?;
            Ok(torus_csp(x, subgroup)?.accepts(config) && !fixed_by(subgroup, &dom, config, gamma))
        }
        KernelEvidence::Implied { window, .. } => {
            let i0 = window.index_of(&x.group().zero());
            let i1 = window.index_of(gamma);
            let (Some(i0), Some(i1)) = (i0, i1) else { return Ok(false) };
            let lang = language(x, window)?;
            let agree = lang.table.rows().all(|r| r[i0] == r[i1]);
            Ok(agree)
        }
        KernelEvidence::Undetermined => Ok(false),
    }
}
