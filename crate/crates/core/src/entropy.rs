//! Entropy bounds and exact values.

use num_integer::Integer;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::group::{FiniteSet, GroupElement, GroupSpec};
use crate::language::{language, local_count, Exactness};
use crate::oned::BlockGraph;
use crate::pattern::Pattern;
use crate::perron::spectral_radius;
use crate::sft::SftSpec;

/// Which procedure produced an estimate.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Method {
    #[serde(rename = "BOX-UPPER")]
    BoxUpper,
    #[serde(rename = "TRANSFER-EXACT")]
    TransferExact,
    #[serde(rename = "STRIP-EXACT")]
    StripExact,
    #[serde(rename = "PERIODIC-LOWER")]
    PeriodicLower,
}

impl Method {
    pub fn tag(self) -> &'static str {
        match self {
            Method::BoxUpper => "BOX-UPPER",
            Method::TransferExact => "TRANSFER-EXACT",
            Method::StripExact => "STRIP-EXACT",
            Method::PeriodicLower => "PERIODIC-LOWER",
        }
    }
}

/// An enclosure lower ≤ h ≤ upper in nats per site; −∞ encodes h(∅).
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EntropyEstimate {
    pub lower: f64,
    pub upper: f64,
    pub method: Method,
    pub exactness: Exactness,
    pub parameters: String,
}

/// Relative width targeted by transfer-matrix enclosures.
pub const TRANSFER_TOLERANCE: f64 = 1e-13;

impl EntropyEstimate {
    pub fn midpoint(&self) -> f64 {
        if self.upper == f64::NEG_INFINITY {
            f64::NEG_INFINITY
        } else if self.lower == f64::NEG_INFINITY {
            self.upper
        } else {
            (self.lower + self.upper) / 2.0
        }
    }

    /// Certified h < c.
    pub fn strictly_below(&self, c: f64) -> bool {
        self.upper < c
    }

    /// Certified h > c.
    pub fn strictly_above(&self, c: f64) -> bool {
        self.lower > c
    }
}

fn ln_count(count: u64, sites: usize) -> f64 {
    if count == 0 {
        f64::NEG_INFINITY
    } else {
        (count as f64).ln() / sites as f64
    }
}

/// (1/|F|)·ln|local language on F|, an upper bound on h(X).
pub fn entropy_upper_bound(x: &SftSpec, f: &FiniteSet) -> Result<EntropyEstimate> {
    if f.is_empty() {
        return Err(Error::Invalid("entropy window is empty".into()));
    }
    for g in f {
        x.group().check(g)?;
    }
    let count = local_count(x, f);
    let upper = ln_count(count, f.len());
    // The logarithm is rounded; nudge up so the bound stays an upper bound.
    let upper = if upper.is_finite() { upper + upper.abs() * 4.0 * f64::EPSILON } else { upper };
    let exactness = if x.free_symbol().is_some() { Exactness::Exact } else { Exactness::LocalUpper };
    Ok(EntropyEstimate {
        lower: f64::NEG_INFINITY,
        upper,
        method: Method::BoxUpper,
        exactness,
        parameters: format!("window of {} sites, {count} patterns", f.len()),
    })
}

/// h of a block graph's edge shift, per cell of Z × G.
fn graph_entropy(graph: &BlockGraph, cells: usize) -> (f64, f64) {
    if graph.is_empty() {
        return (f64::NEG_INFINITY, f64::NEG_INFINITY);
    }
    let (lo, hi) = spectral_radius(&graph.succ, TRANSFER_TOLERANCE).ln();
    (lo / cells as f64, hi / cells as f64)
}

/// h(X) for rank 1 via the Perron root of the trimmed block graph.
pub fn entropy_exact_1d(x: &SftSpec) -> Result<EntropyEstimate> {
    let graph = BlockGraph::build(x)?;
    let (lower, upper) = graph_entropy(&graph, x.group().torsion_order());
    Ok(EntropyEstimate {
        lower,
        upper,
        method: Method::TransferExact,
        exactness: Exactness::Exact,
        parameters: format!("{} states, {} edges", graph.num_states(), graph.num_edges()),
    })
}

/// Coordinates of Z²/⟨n·v⟩ ≅ Z × Z/n for primitive v.
#[derive(Clone, Debug)]
pub struct StripCoordinates {
    v: [i64; 2],
    p: [i64; 2],
    n: u32,
}

impl StripCoordinates {
    pub fn new(v: [i64; 2], n: u32) -> Result<Self> {
        if n == 0 {
            return Err(Error::Invalid("strip period must be positive".into()));
        }
        let e = v[0].extended_gcd(&v[1]);
        if e.gcd.abs() != 1 {
            return Err(Error::Invalid(format!("({}, {}) is not primitive", v[0], v[1])));
        }
        let s = e.gcd.signum();
        Ok(StripCoordinates { v, p: [e.x * s, e.y * s], n })
    }

    /// The quotient group Z × Z/n × G (the Z/n factor omitted when n = 1).
    pub fn quotient_group(&self, spec: &GroupSpec) -> Result<GroupSpec> {
        let mut moduli = Vec::new();
        if self.n > 1 {
            moduli.push(self.n);
        }
        moduli.extend_from_slice(spec.moduli());
        GroupSpec::new(1, moduli)
    }

    /// Image of g: a = det(g, v), b = ⟨p, g⟩ mod n, torsion unchanged.
    pub fn project(&self, q: &GroupSpec, g: &GroupElement) -> GroupElement {
        let a = g.free[0] * self.v[1] - g.free[1] * self.v[0];
        let b = self.p[0] * g.free[0] + self.p[1] * g.free[1];
        let mut torsion: Vec<i64> = Vec::new();
        if self.n > 1 {
            torsion.push(b);
        }
        torsion.extend(g.torsion.iter().map(|&t| t as i64));
        q.element(vec![a], torsion).expect("residues reduce")
    }
}

/// The SFT on Z²/⟨n·v⟩ whose points are the ⟨n·v⟩-periodic points of X.
///
/// Patterns whose sites collide with conflicting symbols can never occur and
/// are dropped; consistent collisions are merged.
pub fn strip_quotient(x: &SftSpec, v: [i64; 2], n: u32) -> Result<SftSpec> {
    let spec = x.group();
    if spec.rank() != 2 {
        return Err(Error::Unsupported("strip quotients need a rank-2 group".into()));
    }
    let coords = StripCoordinates::new(v, n)?;
    let q = coords.quotient_group(spec)?;
    let window = FiniteSet::new(x.window().iter().map(|g| coords.project(&q, g)));
    let mut forbidden = Vec::new();
    'patterns: for p in x.forbidden() {
        let mut pairs: Vec<(GroupElement, u8)> = Vec::new();
        for (g, s) in p.iter() {
            let img = coords.project(&q, g);
            match pairs.iter().find(|(h, _)| *h == img) {
                Some((_, t)) if *t != s => continue 'patterns,
                Some(_) => {}
                None => pairs.push((img, s)),
            }
        }
        forbidden.push(Pattern::from_pairs(pairs)?);
    }
    SftSpec::new(q, x.alphabet().clone(), window, forbidden)
}

/// Entropy of the ⟨n·v⟩-periodic points as a Z-system, per site of the strip.
pub fn strip_entropy(x: &SftSpec, v: [i64; 2], n: u32) -> Result<EntropyEstimate> {
    let quotient = strip_quotient(x, v, n)?;
    let graph = BlockGraph::build(&quotient)?;
    let (lower, upper) = graph_entropy(&graph, quotient.group().torsion_order());
    Ok(EntropyEstimate {
        lower,
        upper,
        method: Method::StripExact,
        exactness: Exactness::Exact,
        parameters: format!("v=({},{}), n={n}, {} states", v[0], v[1], graph.num_states()),
    })
}

/// Lower bound from gluing admissible boxes with corridors of a safe symbol.
///
/// Boxes of side `side` separated by gaps of the window diameter never share
/// a forbidden occurrence, so every choice of box patterns is a point of X.
pub fn periodic_lower_bound(x: &SftSpec, side: i64) -> Result<EntropyEstimate> {
    if side < 1 {
        return Err(Error::Invalid("box side must be positive".into()));
    }
    let spec = x.group();
    let Some(a) = (0..x.alphabet_size() as u8).find(|&a| crate::retract::is_safe_symbol(x, a).unwrap_or(false))
    else {
        return Err(Error::Precondition("no safe symbol".into()));
    };
    let bx = spec.corner_box(side - 1);
    let lang = language(x, &bx)?;
    if lang.exactness != Exactness::Exact {
        return Err(Error::Precondition("box language is not certified exact".into()));
    }
    let (lo, hi) = x.window().free_bounds().expect("window nonempty");
    let diam = lo.iter().zip(&hi).map(|(l, h)| h - l).max().unwrap_or(0);
    let cell = (side + diam).pow(spec.rank() as u32) as usize * spec.torsion_order();
    let lower = if lang.is_empty() { f64::NEG_INFINITY } else { (lang.len() as f64).ln() / cell as f64 };
    let lower = if lower.is_finite() { lower - lower.abs() * 4.0 * f64::EPSILON } else { lower };
    let upper = entropy_upper_bound(x, &bx)?.upper;
    Ok(EntropyEstimate {
        lower,
        upper,
        method: Method::PeriodicLower,
        exactness: Exactness::Exact,
        parameters: format!("side {side}, corridor {diam}, safe symbol {}", x.alphabet().name(a)),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::sft::library::*;

    #[test]
    fn golden_mean_exact() {
        let e = entropy_exact_1d(&golden_mean()).unwrap();
        let h = ((1.0 + 5f64.sqrt()) / 2.0).ln();
        assert!(e.lower <= h && h <= e.upper && e.upper - e.lower < 1e-12);
    }

    #[test]
    fn box_bounds() {
        let e = entropy_upper_bound(&golden_mean(), &FiniteSet::from_ints(0..3)).unwrap();
        assert!((e.upper - 5f64.ln() / 3.0).abs() < 1e-12);
        let e = entropy_upper_bound(&hard_square(), &GroupSpec::free(2).corner_box(3)).unwrap();
        assert!((e.upper - 1234f64.ln() / 16.0).abs() < 1e-12);
    }

    #[test]
    fn strips_of_hard_square() {
        let e = strip_entropy(&hard_square(), [0, 1], 1).unwrap();
        assert_eq!((e.lower, e.upper), (0.0, 0.0));
        let e = strip_entropy(&hard_square(), [0, 1], 2).unwrap();
        let h = (1.0 + 2f64.sqrt()).ln() / 2.0;
        assert!(e.lower <= h && h <= e.upper && e.upper - e.lower < 1e-12);
    }

    #[test]
    fn empty_shift_has_minus_infinity() {
        let x = two_fixed_points().forbid_pattern(&Pattern::digits(0, "0")).unwrap();
        let x = x.forbid_pattern(&Pattern::digits(0, "1")).unwrap();
        let e = entropy_exact_1d(&x).unwrap();
        assert_eq!(e.upper, f64::NEG_INFINITY);
    }

    #[test]
    fn hard_square_lower_bound_below_upper() {
        let e = periodic_lower_bound(&hard_square(), 3).unwrap();
        assert!(e.lower > 0.0 && e.lower < e.upper);
    }
}
