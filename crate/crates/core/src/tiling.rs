//! Disjointified truncated Voronoi tilings, their diagnostics, and the
//! marker-to-tiling pipeline on finitely presented points.

use std::collections::BTreeMap;
use std::sync::Arc;

use num_integer::Roots;
use num_rational::Ratio;
use serde::Serialize;

use crate::clopen::ClopenSet;
use crate::error::{invalid, Error, Result};
use crate::group::{k_boundary, FiniteSet, GroupElement, GroupSpec};
use crate::language::language;
use crate::markers::marker_lemma;
use crate::pattern::Pattern;
use crate::periodic::periodic_value;
use crate::sft::SftSpec;
use crate::subgroup::Subgroup;

/// Pairwise disjoint finite tiles, optionally pointed by one center each.
#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize)]
pub struct PartialTiling {
    pub tiles: Vec<FiniteSet>,
    pub centers: Option<Vec<GroupElement>>,
}

impl PartialTiling {
    pub fn new(tiles: Vec<FiniteSet>, centers: Option<Vec<GroupElement>>) -> Result<Self> {
        if let Some(c) = &centers {
            if c.len() != tiles.len() {
                return invalid("one center per tile required");
            }
            if let Some((t, c)) = tiles.iter().zip(c).find(|(t, c)| !t.contains(c)) {
                return invalid(format!("center {c} lies outside its tile {t}"));
            }
        }
        let mut seen = std::collections::BTreeSet::new();
        for t in &tiles {
            for g in t {
                if !seen.insert(g.clone()) {
                    return invalid(format!("site {g} lies in two tiles"));
                }
            }
        }
        Ok(PartialTiling { tiles, centers })
    }

    pub fn len(&self) -> usize {
        self.tiles.len()
    }

    pub fn is_empty(&self) -> bool {
        self.tiles.is_empty()
    }

    pub fn union(&self) -> FiniteSet {
        FiniteSet::new(self.tiles.iter().flat_map(|t| t.iter().cloned()))
    }

    /// The tiling moved by v.
    pub fn translate(&self, spec: &GroupSpec, v: &GroupElement) -> PartialTiling {
        PartialTiling {
            tiles: self.tiles.iter().map(|t| t.translate(spec, v)).collect(),
            centers: self.centers.as_ref().map(|c| c.iter().map(|g| spec.add(g, v)).collect()),
        }
    }
}

/// Free-part ball {γ : |free(γ)|² ≤ radius2} around c.
fn ball_around(spec: &GroupSpec, c: &GroupElement, radius2: i128) -> FiniteSet {
    let r = radius2.max(0).sqrt() as i64;
    let lo: Vec<i64> = c.free.iter().map(|x| x - r).collect();
    let hi: Vec<i64> = c.free.iter().map(|x| x + r).collect();
    FiniteSet::new(
        spec.free_box(&lo, &hi).iter().filter(|g| spec.norm2(&spec.sub(g, c)) <= radius2).cloned(),
    )
}

/// The center that γ is assigned to: a closest center, ties going to the c
/// with γ − c least in the canonical order.
pub fn voronoi_owner<'a>(spec: &GroupSpec, centers: &'a FiniteSet, g: &GroupElement) -> Option<&'a GroupElement> {
    centers.iter().min_by(|a, b| {
        spec.dist(g, a).cmp(&spec.dist(g, b)).then_with(|| spec.sub(g, a).cmp(&spec.sub(g, b)))
    })
}

/// Disjointified R-truncated Voronoi diagram, R² = `radius2`, pointed by its centers.
pub fn disjointified_voronoi(spec: &GroupSpec, centers: &FiniteSet, radius2: i128) -> Result<PartialTiling> {
    if radius2 < 0 {
        return invalid("radius must be nonnegative");
    }
    for c in centers {
        spec.check(c)?;
    }
    let sites = FiniteSet::new(centers.iter().flat_map(|c| ball_around(spec, c, radius2).as_slice().to_vec()));
    let owners: Vec<Option<GroupElement>> = crate::par::map(sites.as_slice(), |g| {
        let c = voronoi_owner(spec, centers, g).expect("at least one center");
        (spec.norm2(&spec.sub(g, c)) <= radius2).then(|| c.clone())
    });
    let mut by_center: BTreeMap<GroupElement, Vec<GroupElement>> =
        centers.iter().map(|c| (c.clone(), Vec::new())).collect();
    for (g, o) in sites.iter().zip(owners) {
        if let Some(c) = o {
            by_center.get_mut(&c).expect("center").push(g.clone());
        }
    }
    let (cs, tiles): (Vec<GroupElement>, Vec<FiniteSet>) =
        by_center.into_iter().map(|(c, t)| (c, FiniteSet::new(t))).unzip();
    PartialTiling::new(tiles, Some(cs))
}

/// ∂^τ_W T = {v : (v+W) meets T and (v+W) ⊄ ⋃τ}.
pub fn exterior_boundary(spec: &GroupSpec, w: &FiniteSet, tile: &FiniteSet, cover: &FiniteSet) -> FiniteSet {
    let candidates = tile.sum(spec, &w.neg(spec));
    FiniteSet::new(candidates.iter().filter(|v| w.iter().any(|u| !cover.contains(&spec.add(v, u)))).cloned())
}

/// Whether T = (conv(free(T)) ∩ Z^d) × G; `None` for rank above 2.
pub fn is_convex_tile(spec: &GroupSpec, tile: &FiniteSet) -> Option<bool> {
    let frees: std::collections::BTreeSet<Vec<i64>> = tile.iter().map(|g| g.free.clone()).collect();
    if frees.len() * spec.torsion_order() != tile.len() {
        return Some(false);
    }
    match spec.rank() {
        0 => Some(true),
        1 => {
            let lo = frees.first()?[0];
            let hi = frees.last()?[0];
            Some((hi - lo + 1) as usize == frees.len())
        }
        2 => {
            let pts: Vec<(i64, i64)> = frees.iter().map(|v| (v[0], v[1])).collect();
            let hull = convex_hull(&pts);
            let (lo, hi) = tile.free_bounds()?;
            for x in lo[0]..=hi[0] {
                for y in lo[1]..=hi[1] {
                    if in_hull(&hull, (x, y)) && !frees.contains(&vec![x, y]) {
                        return Some(false);
                    }
                }
            }
            Some(true)
        }
        _ => None,
    }
}

fn cross(o: (i64, i64), a: (i64, i64), b: (i64, i64)) -> i128 {
    (a.0 - o.0) as i128 * (b.1 - o.1) as i128 - (a.1 - o.1) as i128 * (b.0 - o.0) as i128
}

/// Counter-clockwise hull without collinear points (monotone chain).
fn convex_hull(points: &[(i64, i64)]) -> Vec<(i64, i64)> {
    let mut pts = points.to_vec();
    pts.sort_unstable();
    pts.dedup();
    if pts.len() <= 2 {
        return pts;
    }
    let mut hull: Vec<(i64, i64)> = Vec::with_capacity(2 * pts.len());
    for pass in 0..2 {
        let start = hull.len();
        let iter: Box<dyn Iterator<Item = &(i64, i64)>> =
            if pass == 0 { Box::new(pts.iter()) } else { Box::new(pts.iter().rev()) };
        for &p in iter {
            while hull.len() >= start + 2 && cross(hull[hull.len() - 2], hull[hull.len() - 1], p) <= 0 {
                hull.pop();
            }
            hull.push(p);
        }
        hull.pop();
    }
    hull
}

fn in_hull(hull: &[(i64, i64)], p: (i64, i64)) -> bool {
    match hull.len() {
        0 => false,
        1 => hull[0] == p,
        2 => {
            let (a, b) = (hull[0], hull[1]);
            cross(a, b, p) == 0 && p.0 >= a.0.min(b.0) && p.0 <= a.0.max(b.0) && p.1 >= a.1.min(b.1) && p.1 <= a.1.max(b.1)
        }
        n => (0..n).all(|i| cross(hull[i], hull[(i + 1) % n], p) >= 0),
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct TileReport {
    pub center: Option<GroupElement>,
    pub size: usize,
    pub k_boundary: usize,
    pub exterior_boundary: usize,
    /// |∂_K T| < ε|T|.
    pub invariant: bool,
    /// |∂^τ_W T| ≤ ε₁|T|.
    pub small_exterior: bool,
    pub convex: Option<bool>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct TilingDiagnostics {
    pub tiles: Vec<TileReport>,
    /// C + B_R ⊆ ⋃τ, when the tiling came from Voronoi data.
    pub coverage: Option<bool>,
}

impl TilingDiagnostics {
    pub fn all_invariant(&self) -> bool {
        self.tiles.iter().all(|t| t.invariant)
    }

    pub fn all_small_exterior(&self) -> bool {
        self.tiles.iter().all(|t| t.small_exterior)
    }
}

fn less_than(count: usize, eps: Ratio<u64>, size: usize) -> bool {
    (count as u128) * (*eps.denom() as u128) < (*eps.numer() as u128) * size as u128
}

fn at_most(count: usize, eps: Ratio<u64>, size: usize) -> bool {
    (count as u128) * (*eps.denom() as u128) <= (*eps.numer() as u128) * size as u128
}

/// Per-tile boundary sizes and verdicts. With `voronoi = Some((C, R²))` the
/// coverage C + B_R ⊆ ⋃τ is checked too, and tiles are tested for convexity
/// when the centers have distinct free parts.
pub fn tiling_diagnostics(
    spec: &GroupSpec,
    tau: &PartialTiling,
    k: &FiniteSet,
    w: &FiniteSet,
    eps: Ratio<u64>,
    eps1: Ratio<u64>,
    voronoi: Option<(&FiniteSet, i128)>,
) -> Result<TilingDiagnostics> {
    if k.is_empty() || w.is_empty() {
        return invalid("K and W must be nonempty");
    }
    let cover = tau.union();
    let separated = voronoi.is_some_and(|(c, _)| {
        let frees: std::collections::BTreeSet<&Vec<i64>> = c.iter().map(|g| &g.free).collect();
        frees.len() == c.len()
    });
    let reports: Vec<Result<TileReport>> = crate::par::map_range(tau.tiles.len(), |i| {
        let t = &tau.tiles[i];
        let kb = k_boundary(spec, k, t)?.len();
        let eb = exterior_boundary(spec, w, t, &cover).len();
        Ok(TileReport {
            center: tau.centers.as_ref().map(|c| c[i].clone()),
            size: t.len(),
            k_boundary: kb,
            exterior_boundary: eb,
            invariant: less_than(kb, eps, t.len()),
            small_exterior: at_most(eb, eps1, t.len()),
            convex: if separated { is_convex_tile(spec, t) } else { None },
        })
    });
    let tiles = reports.into_iter().collect::<Result<Vec<_>>>()?;
    let coverage = voronoi.map(|(c, r2)| c.iter().all(|x| ball_around(spec, x, r2).is_subset(&cover)));
    Ok(TilingDiagnostics { tiles, coverage })
}

/// The W-patterns of X that agree with their own γ-shift on the overlap for
/// some γ in `periods`: the natural 𝓕 for the pipeline.
pub fn periodic_patterns(x: &SftSpec, w: &FiniteSet, periods: &FiniteSet) -> Result<Vec<Vec<u8>>> {
    let spec = x.group();
    let lang = language(x, w)?;
    let pairs: Vec<Vec<(usize, usize)>> = periods
        .iter()
        .map(|g| {
            w.iter()
                .enumerate()
                .filter_map(|(i, u)| w.index_of(&spec.add(u, g)).map(|j| (i, j)))
                .collect()
        })
        .collect();
    Ok(lang
        .table
        .rows()
        .filter(|r| pairs.iter().any(|ps| ps.iter().all(|&(i, j)| r[i] == r[j])))
        .map(<[u8]>::to_vec)
        .collect())
}

/// A point of X given on the fundamental domain of a finite-index subgroup.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct PeriodicConfig {
    pub subgroup: Subgroup,
    pub domain: FiniteSet,
    pub config: Vec<u8>,
}

impl PeriodicConfig {
    pub fn new(subgroup: Subgroup, config: Vec<u8>) -> Result<Self> {
        let domain = subgroup.fundamental_domain()?;
        if domain.len() != config.len() {
            return invalid(format!("expected {} symbols, got {}", domain.len(), config.len()));
        }
        Ok(PeriodicConfig { subgroup, domain, config })
    }

    /// x = w^∞ on Z.
    pub fn word(word: &[u8]) -> Result<Self> {
        let spec = GroupSpec::free(1);
        let h = Subgroup::canonicalize(&spec, &[spec.free_element(&[word.len() as i64])])?;
        PeriodicConfig::new(h, word.to_vec())
    }

    pub fn value(&self, g: &GroupElement) -> u8 {
        periodic_value(&self.subgroup, &self.domain, &self.config, g)
    }

    pub fn window(&self, at: &GroupElement, w: &FiniteSet) -> Vec<u8> {
        let spec = self.subgroup.spec();
        w.iter().map(|u| self.value(&spec.add(at, u))).collect()
    }
}

#[derive(Clone, Debug)]
pub struct PipelineParams {
    pub k: FiniteSet,
    pub eps: Ratio<u64>,
    pub w: FiniteSet,
    pub eps1: Ratio<u64>,
    /// 𝓕 as rows over `w`.
    pub forbidden: Vec<Vec<u8>>,
    /// Largest marker separation radius r tried (P = B_2r \ {0}).
    pub max_r: i64,
}

#[derive(Clone, Debug, Serialize)]
pub struct PipelineResult {
    pub r: i64,
    pub radius2: i128,
    /// α(x) on the view window.
    pub alpha: Pattern,
    /// Tiles of τ(α(x)) meeting the view window.
    pub tiling: PartialTiling,
    pub diagnostics: TilingDiagnostics,
    /// Uncovered view sites carry 𝓕-patterns.
    pub uncovered_in_f: bool,
    /// Marked view sites avoid 𝓕 and have v + K inside their tile.
    pub centers_ok: bool,
    pub exterior_ok: bool,
    pub invariant_ok: bool,
}

impl PipelineResult {
    pub fn passed(&self) -> bool {
        self.uncovered_in_f && self.centers_ok && self.exterior_ok && self.invariant_ok
    }
}

fn expand(spec: &GroupSpec, view: &FiniteSet, by: i64) -> FiniteSet {
    let (lo, hi) = view.free_bounds().expect("nonempty view");
    let lo: Vec<i64> = lo.iter().map(|x| x - by).collect();
    let hi: Vec<i64> = hi.iter().map(|x| x + by).collect();
    spec.free_box(&lo, &hi)
}

fn diameter(f: &FiniteSet) -> i64 {
    f.free_bounds().map_or(0, |(lo, hi)| lo.iter().zip(&hi).map(|(l, h)| h - l).max().unwrap_or(0))
}

/// α from the marker lemma on V = X \ ⋃[𝓕] with P = B_2r \ {0}, τ the
/// disjointified Voronoi diagram of α at radius R; r and R are doubled until
/// the tiles meeting the view window pass the diagnostics.
pub fn marker_tiling_pipeline(
    x: Arc<SftSpec>,
    params: &PipelineParams,
    point: &PeriodicConfig,
    view: &FiniteSet,
) -> Result<PipelineResult> {
    let spec = x.group().clone();
    if point.subgroup.spec() != &spec {
        return invalid("point lives on a different group");
    }
    if view.is_empty() {
        return invalid("view window is empty");
    }
    let lw = language(&x, &params.w)?;
    if let Some(r) = params.forbidden.iter().find(|r| !lw.table.contains(r)) {
        return invalid(format!("pattern {r:?} of 𝓕 is not in the W-language"));
    }
    let keep: Vec<Vec<u8>> = lw.table.rows().filter(|r| !params.forbidden.iter().any(|f| f == r)).map(<[u8]>::to_vec).collect();
    let v_set = ClopenSet::from_patterns(x.clone(), params.w.clone(), keep)?;
    let kmax2 = params.k.iter().map(|g| spec.norm2(g)).max().unwrap_or(0);
    // B_r must contain the Euclidean ball of radius 2·max|K|.
    let mut r = (4 * kmax2).sqrt() as i64;
    if r * r < 4 * kmax2 as i64 {
        r += 1;
    }
    let mut r = r.max(1);
    let wdiam = diameter(&params.w);
    let in_f = |at: &GroupElement| {
        let win = point.window(at, &params.w);
        params.forbidden.iter().any(|f| *f == win)
    };
    let mut last = None;
    while r <= params.max_r {
        let p = spec.make_box(2 * r)?.minus(&FiniteSet::new([spec.zero()]));
        let chain = marker_lemma(&v_set, &p, 2 * r + wdiam)?;
        for big_r in [2 * r, 4 * r, 8 * r] {
            let radius2 = (big_r as i128).pow(2);
            let region = expand(&spec, view, 3 * big_r + wdiam + 2);
            let lookup = |g: &GroupElement| Some(point.value(g));
            let marks = chain.marks(&lookup, &region);
            let centers = FiniteSet::new(
                region.iter().zip(&marks).filter(|(_, m)| **m == Some(true)).map(|(g, _)| g.clone()),
            );
            let full = disjointified_voronoi(&spec, &centers, radius2)?;
            let cover = full.union();
            let near: Vec<usize> =
                (0..full.len()).filter(|&i| full.tiles[i].iter().any(|g| view.contains(g))).collect();
            let tiling = PartialTiling {
                tiles: near.iter().map(|&i| full.tiles[i].clone()).collect(),
                centers: full.centers.as_ref().map(|c| near.iter().map(|&i| c[i].clone()).collect()),
            };
            // Exterior boundaries use the whole computed union.
            let mut diagnostics =
                tiling_diagnostics(&spec, &tiling, &params.k, &params.w, params.eps, params.eps1, None)?;
            for (rep, t) in diagnostics.tiles.iter_mut().zip(&tiling.tiles) {
                rep.exterior_boundary = exterior_boundary(&spec, &params.w, t, &cover).len();
                rep.small_exterior = at_most(rep.exterior_boundary, params.eps1, t.len());
            }
            let alpha_vals: Vec<u8> = view.iter().map(|g| u8::from(centers.contains(g))).collect();
            let uncovered_in_f = view.iter().filter(|g| !cover.contains(g)).all(|g| in_f(g));
            let centers_ok = tiling.centers.iter().flatten().zip(&tiling.tiles).filter(|(c, _)| view.contains(c)).all(
                |(c, t)| !in_f(c) && params.k.iter().all(|u| t.contains(&spec.add(c, u))),
            );
            let result = PipelineResult {
                r,
                radius2,
                alpha: Pattern::new(view.clone(), alpha_vals)?,
                invariant_ok: diagnostics.all_invariant(),
                exterior_ok: diagnostics.all_small_exterior(),
                tiling,
                diagnostics,
                uncovered_in_f,
                centers_ok,
            };
            if result.passed() {
                return Ok(result);
            }
            last = Some(result);
        }
        r *= 2;
    }
    last.ok_or_else(|| Error::Invalid(format!("max_r = {} is below the starting radius", params.max_r)))
}
