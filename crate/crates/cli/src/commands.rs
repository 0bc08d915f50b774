use std::path::Path;
use std::sync::Arc;

use anyhow::{anyhow, Context};
use num_rational::Ratio;
use serde_json::{json, Value};
use subshift::block_code::SlidingBlockCode;
use subshift::clopen::ClopenSet;
use subshift::embed::{
    construct_embedding_1d, krieger_check, replay_certificate, z2_fullshift_check, EmbedConditionReport,
    EmbeddingParams, Evidence, InjectivityResult, PeriodicWord, Verdict,
};
use subshift::entropy::{entropy_exact_1d, entropy_upper_bound, periodic_lower_bound, strip_entropy, EntropyEstimate};
use subshift::format::{format_pattern, parse_offsets, parse_pattern, parse_spec};
use subshift::homotopy::{verify_homotopy, CheckResult, HomotopyCandidate};
use subshift::language::language;
use subshift::markers::{marker_lemma, verify_marker_window};
use subshift::overlap::{find_overlap_free_pattern, verify_overlap_free};
use subshift::periodic::{least_period_counts, periodic_points, traces};
use subshift::retract::{gfree_witness, GFreeVerdict, safe_symbol_retract, ColoringRetraction, FamilyMember};
use subshift::tiling::{disjointified_voronoi, tiling_diagnostics};
use subshift::{Alphabet, Error, Exactness, FiniteSet, GroupSpec, Pattern, SftSpec, Subgroup};

use crate::report::{fixed9, Status};
use crate::Command;

#[derive(Clone, Copy, Debug, PartialEq, Eq, clap::ValueEnum)]
pub enum RetractMode {
    Safe,
    Coloring,
}

type Outcome = anyhow::Result<(Status, Value)>;

fn read(path: &Path) -> anyhow::Result<String> {
    std::fs::read_to_string(path).with_context(|| format!("cannot read {}", path.display()))
}

fn load_spec(path: &Path) -> anyhow::Result<SftSpec> {
    parse_spec(&read(path)?).with_context(|| format!("in {}", path.display()))
}

/// Offsets as `(a,b),(c,d)` or, on Z, a bare integer list such as `-1,1`.
fn offsets(text: &str, spec: &GroupSpec) -> anyhow::Result<FiniteSet> {
    if text.contains('(') {
        return Ok(parse_offsets(text, spec)?);
    }
    if spec.rank() != 1 || !spec.moduli().is_empty() {
        return Err(anyhow!("bare integer offsets need the group Z"));
    }
    let ints = text
        .split(',')
        .map(str::trim)
        .filter(|t| !t.is_empty())
        .map(|t| t.parse::<i64>().with_context(|| format!("bad offset '{t}'")))
        .collect::<anyhow::Result<Vec<i64>>>()?;
    Ok(FiniteSet::from_ints(ints))
}

fn big(n: u128) -> Value {
    u64::try_from(n).map_or_else(|_| Value::String(n.to_string()), Value::from)
}

fn set_text(s: &FiniteSet) -> Vec<String> {
    s.iter().map(ToString::to_string).collect()
}

fn entropy_payload(e: &EntropyEstimate, exact: bool) -> Value {
    let mut v = json!({
        "method": e.method.tag(),
        "exactness": e.exactness.tag(),
        "h_upper": fixed9(e.upper),
        "parameters": e.parameters,
    });
    // A box count alone gives no lower bound; -inf is reserved for the empty shift.
    if exact || e.lower > f64::NEG_INFINITY || e.upper == f64::NEG_INFINITY {
        v["h_lower"] = fixed9(e.lower);
    }
    if exact {
        v["h"] = fixed9(e.midpoint());
    }
    v
}

fn evidence(e: &Evidence) -> Value {
    match e {
        Evidence::Entropy { source, target_lower, target_upper } => json!({
            "source": entropy_payload(source, source.exactness == Exactness::Exact),
            "target_lower": fixed9(*target_lower),
            "target_upper": fixed9(*target_upper),
        }),
        Evidence::Counts { source, target } => json!({ "source": big(*source), "target": big(*target) }),
        Evidence::Tail { n0, states, lambda_upper, alphabet } => json!({
            "n0": n0,
            "states": states,
            "lambda_upper": fixed9(*lambda_upper),
            "alphabet": alphabet,
        }),
        Evidence::Identity => json!("identity"),
        Evidence::Note(n) => json!(n),
    }
}

fn periodic_word(p: &PeriodicWord, a: &Alphabet) -> Value {
    let w: Vec<&str> = p.word.iter().map(|&c| a.name(c)).collect();
    json!({ "period": p.period, "word": w.join(" ") })
}

fn injectivity(r: &InjectivityResult, a: &Alphabet) -> Value {
    match r {
        InjectivityResult::Window { radius, window, patterns_checked, images } => json!({
            "kind": "WINDOW",
            "radius": radius,
            "window": set_text(window),
            "patterns_checked": patterns_checked,
            "images": images,
        }),
        InjectivityResult::Collision { left, right } => json!({
            "kind": "COLLISION",
            "left": periodic_word(left, a),
            "right": periodic_word(right, a),
        }),
        InjectivityResult::Inconclusive { max_radius, left, right } => json!({
            "kind": "INCONCLUSIVE",
            "max_radius": max_radius,
            "left": left,
            "right": right,
        }),
    }
}

fn embed_payload(r: &EmbedConditionReport) -> anyhow::Result<(Status, Value)> {
    let rows: Vec<Value> = r
        .rows
        .iter()
        .map(|row| {
            Ok(json!({
                "label": row.label,
                "branch": row.branch.tag(),
                "status": format!("{:?}", row.status).to_uppercase(),
                "evidence": evidence(&row.evidence),
            }))
        })
        .collect::<anyhow::Result<_>>()?;
    let (status, verdict) = match r.verdict {
        Verdict::Yes => (Status::Verdict, "YES".to_string()),
        Verdict::No { row } => (Status::Verdict, format!("NO (row {row}: {})", r.rows[row].label)),
        Verdict::Inconclusive => (Status::Inconclusive, "INCONCLUSIVE".to_string()),
    };
    Ok((status, json!({ "verdict": verdict, "bounds": r.bounds, "rows": rows })))
}

pub fn run(cmd: &Command, seed: u64) -> Outcome {
    match cmd {
        Command::Entropy { spec, r#box, strip, n, periodic_side } => {
            let x = load_spec(&spec.spec)?;
            let (e, exact) = if let Some(v) = strip {
                let v: Vec<i64> = v
                    .split(',')
                    .map(|t| t.trim().parse::<i64>().with_context(|| format!("bad strip coordinate '{t}'")))
                    .collect::<anyhow::Result<_>>()?;
                let v: [i64; 2] = v.try_into().map_err(|_| anyhow!("--strip needs two coordinates"))?;
                (strip_entropy(&x, v, *n)?, true)
            } else if let Some(side) = periodic_side {
                (periodic_lower_bound(&x, *side)?, false)
            } else if let Some(b) = r#box {
                if *b < 1 {
                    return Err(anyhow!("--box must be positive"));
                }
                (entropy_upper_bound(&x, &x.group().corner_box(b - 1))?, false)
            } else if x.group().rank() == 1 {
                (entropy_exact_1d(&x)?, true)
            } else {
                return Err(anyhow!("give --box, --strip or --periodic-side for rank {}", x.group().rank()));
            };
            Ok((Status::Verdict, entropy_payload(&e, exact)))
        }
        Command::Language { spec, r#box, list } => {
            let x = load_spec(&spec.spec)?;
            if *r#box < 1 {
                return Err(anyhow!("--box must be positive"));
            }
            let f = x.group().corner_box(r#box - 1);
            let lang = language(&x, &f)?;
            let mut v = json!({ "sites": f.len(), "count": lang.len(), "exactness": lang.exactness.tag() });
            if *list {
                let pats: Vec<String> = lang.patterns().map(|p| format_pattern(&p, x.alphabet())).collect();
                v["patterns"] = json!(pats);
            }
            Ok((Status::Verdict, v))
        }
        Command::Periodic { spec, subgroup, exact_stab, list } => {
            let x = load_spec(&spec.spec)?;
            let h = Subgroup::parse(x.group(), subgroup)?;
            let set = periodic_points(&x, &h, *exact_stab)?;
            let mut v = json!({
                "subgroup": h.to_string(),
                "index": h.index(),
                "exact_stabilizer": exact_stab,
                "count": set.len(),
                "domain": set_text(&set.domain),
            });
            if *list {
                let pts: Vec<String> = set.patterns().map(|p| format_pattern(&p, x.alphabet())).collect();
                v["points"] = json!(pts);
            }
            Ok((Status::Verdict, v))
        }
        Command::LeastPeriods { spec, max } => {
            let x = load_spec(&spec.spec)?;
            let q = least_period_counts(&x, *max)?;
            let t = traces(&subshift::oned::BlockGraph::build(&x)?, *max)?;
            Ok((
                Status::Verdict,
                json!({
                    "least_periods": q.iter().map(|&c| big(c)).collect::<Vec<_>>(),
                    "fixed_points": t.iter().map(|&c| big(c)).collect::<Vec<_>>(),
                }),
            ))
        }
        Command::Voronoi { centers, radius2, dim, torsion } => {
            let moduli: Vec<u32> = torsion
                .split(',')
                .map(str::trim)
                .filter(|t| !t.is_empty())
                .map(|t| t.parse::<u32>().with_context(|| format!("bad modulus '{t}'")))
                .collect::<anyhow::Result<_>>()?;
            let g = GroupSpec::new(*dim, moduli)?;
            let c = parse_offsets(&read(centers)?, &g)?;
            let tau = disjointified_voronoi(&g, &c, *radius2)?;
            let zero = FiniteSet::new([g.zero()]);
            let one = Ratio::new(1, 1);
            let diag = tiling_diagnostics(&g, &tau, &zero, &zero, one, one, Some((&c, *radius2)))?;
            let tiles: Vec<Value> = tau
                .tiles
                .iter()
                .enumerate()
                .map(|(i, t)| {
                    json!({
                        "center": tau.centers.as_ref().map(|cs| cs[i].to_string()),
                        "cells": set_text(t),
                        "convex": diag.tiles[i].convex,
                    })
                })
                .collect();
            Ok((Status::Verdict, json!({ "tiles": tiles, "coverage": diag.coverage })))
        }
        Command::MarkerLemma { spec, p, v, max_radius, verify_radius } => {
            let x = Arc::new(load_spec(&spec.spec)?);
            let g = x.group().clone();
            let p = offsets(p, &g)?;
            let vset = match v {
                Some(path) => {
                    let pat = parse_pattern(&read(path)?, &g, x.alphabet())?;
                    ClopenSet::cylinder(x.clone(), &pat)?
                }
                None => ClopenSet::whole(x.clone())?,
            };
            let chain = marker_lemma(&vset, &p, *max_radius)?;
            let check = verify_marker_window(&chain, &vset, &g.make_box(*verify_radius)?)?;
            let status = if check.passed() { Status::Verdict } else { Status::Inconclusive };
            Ok((
                status,
                json!({
                    "window": set_text(&chain.window),
                    "patterns": chain.patterns.len(),
                    "verification": serde_json::to_value(&check)?,
                    "verified": check.passed(),
                }),
            ))
        }
        Command::FindMarker { spec, n } => {
            let y = load_spec(&spec.spec)?;
            let r = find_overlap_free_pattern(&y, *n, seed)?;
            let ok = verify_overlap_free(&y, &r)?;
            Ok((
                Status::Verdict,
                json!({
                    "pattern": format_pattern(&r.pattern, y.alphabet()),
                    "cells": r.pattern.len(),
                    "kernel": r.kernel.to_string(),
                    "attempt": r.attempt,
                    "verified": ok,
                }),
            ))
        }
        Command::Retract { mode, spec, input, symbol, k, f, max_window } => {
            let x = load_spec(&spec.spec)?;
            let g = x.group().clone();
            let out = match mode {
                RetractMode::Safe => {
                    let name = symbol.as_deref().ok_or_else(|| anyhow!("safe mode needs --symbol"))?;
                    let a = x.alphabet().index(name).ok_or_else(|| anyhow!("symbol '{name}' is not in the alphabet"))?;
                    let p = parse_pattern(&read(input)?, &g, x.alphabet())?;
                    safe_symbol_retract(&x, a, &p)?
                }
                RetractMode::Coloring => {
                    let k = k.ok_or_else(|| anyhow!("coloring mode needs --k"))?;
                    let f = offsets(f.as_deref().ok_or_else(|| anyhow!("coloring mode needs --f"))?, &g)?;
                    let p = parse_pattern(&read(input)?, &g, x.alphabet())?;
                    ColoringRetraction::new(k, &f, Arc::new(x.clone()), *max_window)?.apply(&p)?
                }
            };
            Ok((
                Status::Verdict,
                json!({
                    "pattern": format_pattern(&out.pattern, x.alphabet()),
                    "omitted": set_text(&FiniteSet::new(out.omitted.iter().cloned())),
                }),
            ))
        }
        Command::VerifyHomotopy { spec, psi, period_bound, strong } => {
            let y = load_spec(&spec.spec)?;
            let g = y.group().clone();
            let mut cand = match psi.as_str() {
                "selector" => HomotopyCandidate::pointwise_selector(g, y.alphabet())?,
                "projection" => HomotopyCandidate::first_projection(g, y.alphabet())?,
                path => {
                    let code: SlidingBlockCode = serde_json::from_str(&read(Path::new(path))?)
                        .with_context(|| format!("{path} is not a sliding block code"))?;
                    HomotopyCandidate::new(code, y.alphabet(), *strong)?
                }
            };
            cand.strong = *strong || cand.strong;
            let r = verify_homotopy(&y, &cand, *period_bound)?;
            let check = |c: &CheckResult| {
                let cx = c.counterexample.as_ref().map(|e| {
                    let a = y.alphabet();
                    json!({
                        "z": e.z.to_string(),
                        "y0": format_pattern(&e.y0, a),
                        "y1": format_pattern(&e.y1, a),
                        "output": e.output.to_string(),
                    })
                });
                json!({ "checked": c.checked, "passed": c.passed(), "counterexample": cx })
            };
            Ok((
                Status::Verdict,
                json!({
                    "passed": r.passed(),
                    "period_bound": r.period_bound,
                    "image": check(&r.image),
                    "zero_end": check(&r.zero_end),
                    "one_end": check(&r.one_end),
                    "strong": r.strong.as_ref().map(check),
                }),
            ))
        }
        Command::Gfree { spec, groups, max_window } => {
            let x = load_spec(&spec.spec)?;
            let family = groups
                .split('|')
                .map(str::trim)
                .filter(|t| !t.is_empty())
                .map(|t| FamilyMember::from_subgroup(&Subgroup::parse(x.group(), t)?))
                .collect::<subshift::Result<Vec<_>>>()?;
            let v = match gfree_witness(&x, &family, *max_window)? {
                GFreeVerdict::Free { window, exactness } => json!({
                    "free": true,
                    "window": set_text(&window),
                    "exactness": exactness.tag(),
                }),
                GFreeVerdict::Periodic { member, pattern, genuine } => json!({
                    "free": false,
                    "member": member,
                    "subgroup": family[member].subgroup.to_string(),
                    "pattern": format_pattern(&pattern, x.alphabet()),
                    "genuine": genuine,
                }),
            };
            Ok((Status::Verdict, v))
        }
        Command::CheckEmbed { x, y_full_alphabet, y, dim, max_period, max_index, max_prim_norm, max_n } => {
            let xs = load_spec(x)?;
            if xs.group().rank() != *dim {
                return Err(anyhow!("--dim {dim} does not match the rank {} of X", xs.group().rank()));
            }
            let report = match (dim, y, y_full_alphabet) {
                (1, Some(path), _) => krieger_check(&xs, &load_spec(path)?, *max_period)?,
                (1, None, Some(a)) => {
                    let target = SftSpec::full_shift(GroupSpec::free(1), Alphabet::numeric(*a));
                    krieger_check(&xs, &target, *max_period)?
                }
                (2, _, Some(a)) => z2_fullshift_check(&xs, *a, *max_index, *max_prim_norm, *max_n)?,
                _ => return Err(anyhow!("give --y-full-alphabet (or --y for dim 1); dim must be 1 or 2")),
            };
            embed_payload(&report)
        }
        Command::BuildEmbedding { x, target, period_bound, max_radius } => {
            let xs = load_spec(x)?;
            let params = EmbeddingParams { period_bound: *period_bound, max_radius: *max_radius, seed, ..Default::default() };
            let a = construct_embedding_1d(&xs, *target, &params)?;
            let replay = replay_certificate(&xs, &a)?;
            let (al, pc) = (xs.alphabet(), &a.transcript.periodic);
            let table: Vec<Value> = a
                .code
                .table
                .iter()
                .map(|(w, s)| {
                    let word: Vec<&str> = w.iter().map(|&c| xs.alphabet().name(c)).collect();
                    json!([word.join(" "), a.code.target.name(*s)])
                })
                .collect();
            Ok((
                Status::Verdict,
                json!({
                    "stage": serde_json::to_value(&a.transcript.stage)?,
                    "code_window": set_text(&a.code.window),
                    "table": table,
                    "injectivity_window": set_text(&a.injectivity_window),
                    "periodic_check": {
                        "period_bound": pc.period_bound,
                        "points_checked": pc.points_checked,
                        "collision": pc.collision.as_ref().map(|(l, r)| json!([periodic_word(l, al), periodic_word(r, al)])),
                        "stabilizer_change": pc.stabilizer_change.as_ref().map(|w| periodic_word(w, al)),
                    },
                    "injectivity": injectivity(&a.transcript.injectivity, al),
                    "replay": replay,
                }),
            ))
        }
    }
}

pub fn classify(e: &anyhow::Error) -> Status {
    match e.downcast_ref::<Error>() {
        Some(Error::Budget(_) | Error::Inconclusive(_) | Error::Exhausted { .. } | Error::Overflow(_)) => {
            Status::Inconclusive
        }
        Some(Error::Precondition(_) | Error::Witness { .. }) => Status::Verdict,
        _ => Status::InputError,
    }
}

pub fn error_payload(e: &anyhow::Error) -> Value {
    let mut v = json!({ "error": format!("{e:#}") });
    match e.downcast_ref::<Error>() {
        Some(Error::Witness { reason, pattern }) => {
            v["verdict"] = json!("PRECONDITION-FAILED");
            v["precondition"] = json!(reason);
            v["witness"] = json!(pattern_text(pattern));
        }
        Some(Error::Precondition(reason)) => {
            v["verdict"] = json!("PRECONDITION-FAILED");
            v["precondition"] = json!(reason);
        }
        _ => {}
    }
    v
}

fn pattern_text(p: &Pattern) -> String {
    p.to_string()
}
