//! Finite-scale verification of contraction homotopies ψ(z, y⁰, y¹).
//!
//! ψ is a sliding block code over triples: the source symbol for
//! (z, y⁰, y¹) is z·|A|² + y⁰·|A| + y¹.

use serde::Serialize;

use crate::block_code::SlidingBlockCode;
use crate::error::{invalid, Error, Result};
use crate::group::{FiniteSet, GroupElement, GroupSpec};
use crate::language::language;
use crate::pattern::{Alphabet, Pattern};
use crate::periodic::{periodic_points, periodic_value};
use crate::sft::SftSpec;
use crate::subgroup::enumerate_subgroups;

/// Largest number of window triples enumerated by the image check.
pub const TRIPLE_BUDGET: u128 = 1 << 26;

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct HomotopyCandidate {
    pub code: SlidingBlockCode,
    /// Also require ψ(z, y, y) = y.
    pub strong: bool,
}

pub fn encode(k: usize, z: u8, y0: u8, y1: u8) -> u8 {
    (z as usize * k * k + y0 as usize * k + y1 as usize) as u8
}

pub fn decode(k: usize, s: u8) -> (u8, u8, u8) {
    let s = s as usize;
    ((s / (k * k)) as u8, (s / k % k) as u8, (s % k) as u8)
}

/// Alphabet {0,1} × A × A in encoding order.
pub fn triple_alphabet(a: &Alphabet) -> Result<Alphabet> {
    let k = a.len();
    if 2 * k * k > 256 {
        return invalid("alphabet too large for triple encoding");
    }
    let mut names = Vec::with_capacity(2 * k * k);
    for z in 0..2 {
        for y0 in a.names() {
            for y1 in a.names() {
                names.push(format!("{z}|{y0}|{y1}"));
            }
        }
    }
    Alphabet::new(names)
}

impl HomotopyCandidate {
    pub fn new(code: SlidingBlockCode, alphabet: &Alphabet, strong: bool) -> Result<Self> {
        if code.source != triple_alphabet(alphabet)? || &code.target != alphabet {
            return invalid("homotopy code must map {0,1} × A × A to A");
        }
        Ok(HomotopyCandidate { code, strong })
    }

    /// Output y¹_v if z_v = 1, else y⁰_v.
    pub fn pointwise_selector(group: GroupSpec, alphabet: &Alphabet) -> Result<Self> {
        let k = alphabet.len();
        let w = FiniteSet::new([group.zero()]);
        let code = SlidingBlockCode::from_fn(group, triple_alphabet(alphabet)?, alphabet.clone(), w, |v| {
            let (z, y0, y1) = decode(k, v[0]);
            if z == 1 {
                y1
            } else {
                y0
            }
        })?;
        Ok(HomotopyCandidate { code, strong: true })
    }

    /// ψ(z, y⁰, y¹) = y⁰.
    pub fn first_projection(group: GroupSpec, alphabet: &Alphabet) -> Result<Self> {
        let k = alphabet.len();
        let w = FiniteSet::new([group.zero()]);
        let code = SlidingBlockCode::from_fn(group, triple_alphabet(alphabet)?, alphabet.clone(), w, |v| {
            decode(k, v[0]).1
        })?;
        Ok(HomotopyCandidate { code, strong: true })
    }
}

/// Inputs on which a check failed, with the offending output.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct HomotopyCounterexample {
    pub z: Pattern,
    pub y0: Pattern,
    pub y1: Pattern,
    pub output: Pattern,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct CheckResult {
    pub checked: u64,
    pub counterexample: Option<HomotopyCounterexample>,
}

impl CheckResult {
    pub fn passed(&self) -> bool {
        self.counterexample.is_none()
    }
}

/// (a) image in Y, (b) ψ(0̄, y⁰, y¹) = y⁰ and ψ(1̄, y⁰, y¹) = y¹ on periodic
/// points, (c) ψ(z, y, y) = y when the candidate is strong.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct HomotopyReport {
    pub image: CheckResult,
    pub zero_end: CheckResult,
    pub one_end: CheckResult,
    pub strong: Option<CheckResult>,
    pub period_bound: u64,
}

impl HomotopyReport {
    /// Every check passed at the scale examined; not a proof.
    pub fn passed(&self) -> bool {
        self.image.passed()
            && self.zero_end.passed()
            && self.one_end.passed()
            && self.strong.as_ref().is_none_or(CheckResult::passed)
    }
}

fn output_on(
    code: &SlidingBlockCode,
    sites: &FiniteSet,
    input: impl Fn(&GroupElement) -> Option<u8>,
) -> Result<Vec<u8>> {
    sites.iter().map(|v| code.output_at(v, &input)).collect()
}

fn check_image(y: &SftSpec, psi: &HomotopyCandidate) -> Result<CheckResult> {
    let spec = y.group();
    let k = y.alphabet_size();
    let code = &psi.code;
    let mut checked = 0u64;
    for q in y.forbidden() {
        let e = q.support().sum(spec, &code.window);
        let lang = language(y, &e)?;
        let n = lang.len();
        let zs = 1u128 << e.len().min(127);
        let total = (n as u128) * (n as u128) * zs;
        if total > TRIPLE_BUDGET {
            return Err(Error::Budget(format!("{total} window triples")));
        }
        let rows: Vec<&[u8]> = lang.table.rows().collect();
        let found = crate::par::find_first(n, |i| -> Option<Result<HomotopyCounterexample>> {
            for r1 in &rows {
                for zc in 0..zs as u64 {
                    let z: Vec<u8> = (0..e.len()).map(|b| ((zc >> (e.len() - 1 - b)) & 1) as u8).collect();
                    let input = |g: &GroupElement| {
                        e.index_of(g).map(|j| encode(k, z[j], rows[i][j], r1[j]))
                    };
                    let out = match output_on(code, q.support(), input) {
                        Ok(o) => o,
                        Err(err) => return Some(Err(err)),
                    };
                    if out == q.values() {
                        return Some((|| {
                            Ok(HomotopyCounterexample {
                                z: Pattern::new(e.clone(), z)?,
                                y0: Pattern::new(e.clone(), rows[i].to_vec())?,
                                y1: Pattern::new(e.clone(), r1.to_vec())?,
                                output: q.clone(),
                            })
                        })());
                    }
                }
            }
            None
        });
        checked += total as u64;
        if let Some((_, c)) = found {
            return Ok(CheckResult { checked, counterexample: Some(c?) });
        }
    }
    Ok(CheckResult { checked, counterexample: None })
}

fn check_periodic(y: &SftSpec, psi: &HomotopyCandidate, period_bound: u64) -> Result<[CheckResult; 3]> {
    let spec = y.group();
    let k = y.alphabet_size();
    let code = &psi.code;
    let mut results = [(); 3].map(|_| CheckResult { checked: 0, counterexample: None });
    for h in enumerate_subgroups(period_bound, spec)? {
        let pts = periodic_points(y, &h, false)?;
        let dom = &pts.domain;
        let configs: Vec<&[u8]> = pts.configs.rows().collect();
        let at = |c: &[u8], g: &GroupElement| periodic_value(&h, dom, c, g);
        // Endpoint checks over all pairs.
        for (end, z) in [(0usize, 0u8), (1, 1)] {
            if results[end].counterexample.is_some() {
                continue;
            }
            let found = crate::par::find_first(configs.len(), |i| -> Option<Result<HomotopyCounterexample>> {
                for c1 in &configs {
                    let input = |g: &GroupElement| Some(encode(k, z, at(configs[i], g), at(c1, g)));
                    let out = match output_on(code, dom, input) {
                        Ok(o) => o,
                        Err(err) => return Some(Err(err)),
                    };
                    let want: &[u8] = if z == 0 { configs[i] } else { c1 };
                    if out != want {
                        return Some((|| {
                            Ok(HomotopyCounterexample {
                                z: Pattern::new(dom.clone(), vec![z; dom.len()])?,
                                y0: Pattern::new(dom.clone(), configs[i].to_vec())?,
                                y1: Pattern::new(dom.clone(), c1.to_vec())?,
                                output: Pattern::new(dom.clone(), out)?,
                            })
                        })());
                    }
                }
                None
            });
            results[end].checked += (configs.len() * configs.len()) as u64;
            if let Some((_, c)) = found {
                results[end].counterexample = Some(c?);
            }
        }
        if !psi.strong || results[2].counterexample.is_some() {
            continue;
        }
        let w = &code.window;
        let zs = 1u64 << w.len().min(63);
        let found = crate::par::find_first(configs.len(), |i| -> Option<Result<HomotopyCounterexample>> {
            let c = configs[i];
            for v in dom {
                let sites = w.translate(spec, v);
                for zc in 0..zs {
                    let z: Vec<u8> = (0..w.len()).map(|b| ((zc >> (w.len() - 1 - b)) & 1) as u8).collect();
                    let input = |g: &GroupElement| {
                        let zi = sites.index_of(g).map_or(0, |j| z[j]);
                        let s = at(c, g);
                        Some(encode(k, zi, s, s))
                    };
                    let out = match code.output_at(v, input) {
                        Ok(o) => o,
                        Err(err) => return Some(Err(err)),
                    };
                    if out != at(c, v) {
                        return Some((|| {
                            let yv = Pattern::new(dom.clone(), c.to_vec())?;
                            Ok(HomotopyCounterexample {
                                z: Pattern::new(sites.clone(), z)?,
                                y0: yv.clone(),
                                y1: yv,
                                output: Pattern::new(FiniteSet::new([v.clone()]), vec![out])?,
                            })
                        })());
                    }
                }
            }
            None
        });
        results[2].checked += configs.len() as u64 * dom.len() as u64 * zs;
        if let Some((_, c)) = found {
            results[2].counterexample = Some(c?);
        }
    }
    Ok(results)
}

/// Runs all checks; a PASS means "verified at scale".
pub fn verify_homotopy(y: &SftSpec, psi: &HomotopyCandidate, period_bound: u64) -> Result<HomotopyReport> {
    if psi.code.group != *y.group() {
        return invalid("homotopy code lives on a different group");
    }
    if psi.code.source != triple_alphabet(y.alphabet())? || &psi.code.target != y.alphabet() {
        return invalid("homotopy code must map {0,1} × A × A to A");
    }
    let image = check_image(y, psi)?;
    let [zero_end, one_end, strong] = check_periodic(y, psi, period_bound)?;
    Ok(HomotopyReport { image, zero_end, one_end, strong: psi.strong.then_some(strong), period_bound })
}
