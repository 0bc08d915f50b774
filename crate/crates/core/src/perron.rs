//! Certified enclosures of the spectral radius of a nonnegative integer matrix.
//!
//! The radius is the maximum over strongly connected components. On an
//! irreducible component, any positive vector w gives the Collatz–Wielandt
//! enclosure min_i (Aw)_i / w_i ≤ ρ(A) ≤ max_i (Aw)_i / w_i. The vector comes
//! from power iteration on A + I (primitive, so it converges); the ratios are
//! evaluated exactly on an integer rescaling of it.

/// Closed interval [lo, hi] containing ρ(A).
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct RadiusBounds {
    pub lo: f64,
    pub hi: f64,
}

impl RadiusBounds {
    pub fn width(&self) -> f64 {
        self.hi - self.lo
    }

    /// Enclosure of ln ρ, widened by a few ulps to absorb libm rounding.
    pub fn ln(&self) -> (f64, f64) {
        if self.hi <= 0.0 {
            return (f64::NEG_INFINITY, f64::NEG_INFINITY);
        }
        let lo = if self.lo <= 0.0 { f64::NEG_INFINITY } else { self.lo.ln() };
        let hi = self.hi.ln();
        if self.lo == self.hi && self.lo == 1.0 {
            return (0.0, 0.0);
        }
        (widen_down(lo), widen_up(hi))
    }
}

const ULP_SLACK: f64 = 8.0 * f64::EPSILON;

fn widen_down(x: f64) -> f64 {
    if x.is_infinite() {
        x
    } else {
        x - x.abs() * ULP_SLACK - f64::MIN_POSITIVE
    }
}

fn widen_up(x: f64) -> f64 {
    if x.is_infinite() {
        x
    } else {
        x + x.abs() * ULP_SLACK + f64::MIN_POSITIVE
    }
}

/// Strongly connected components of a digraph given by successor lists.
pub fn strongly_connected(succ: &[Vec<u32>]) -> Vec<Vec<usize>> {
    let n = succ.len();
    let mut index = vec![usize::MAX; n];
    let mut low = vec![0usize; n];
    let mut on_stack = vec![false; n];
    let mut stack = Vec::new();
    let mut comps = Vec::new();
    let mut counter = 0;
    for root in 0..n {
        if index[root] != usize::MAX {
            continue;
        }
        let mut call: Vec<(usize, usize)> = vec![(root, 0)];
        index[root] = counter;
        low[root] = counter;
        counter += 1;
        stack.push(root);
        on_stack[root] = true;
        while let Some(&mut (v, ref mut next)) = call.last_mut() {
            if *next < succ[v].len() {
                let w = succ[v][*next] as usize;
                *next += 1;
                if index[w] == usize::MAX {
                    index[w] = counter;
                    low[w] = counter;
                    counter += 1;
                    stack.push(w);
                    on_stack[w] = true;
                    call.push((w, 0));
                } else if on_stack[w] {
                    low[v] = low[v].min(index[w]);
                }
            } else {
                call.pop();
                if let Some(&(parent, _)) = call.last() {
                    low[parent] = low[parent].min(low[v]);
                }
                if low[v] == index[v] {
                    let mut comp = Vec::new();
                    loop {
                        let w = stack.pop().expect("tarjan stack");
                        on_stack[w] = false;
                        comp.push(w);
                        if w == v {
                            break;
                        }
                    }
                    comp.sort_unstable();
                    comps.push(comp);
                }
            }
        }
    }
    comps
}

/// Encloses ρ of the 0/1 adjacency matrix given by `succ` to relative width `tol`.
pub fn spectral_radius(succ: &[Vec<u32>], tol: f64) -> RadiusBounds {
    let mut best = RadiusBounds { lo: 0.0, hi: 0.0 };
    for comp in strongly_connected(succ) {
        let mut pos = vec![usize::MAX; succ.len()];
        for (i, &v) in comp.iter().enumerate() {
            pos[v] = i;
        }
        let local: Vec<Vec<usize>> = comp
            .iter()
            .map(|&v| succ[v].iter().map(|&t| pos[t as usize]).filter(|&p| p != usize::MAX).collect())
            .collect();
        if local.iter().all(Vec::is_empty) {
            continue;
        }
        let b = irreducible_radius(&local, tol);
        best.lo = best.lo.max(b.lo);
        best.hi = best.hi.max(b.hi);
    }
    best
}

const SCALE_BITS: u32 = 52;
const MAX_ITERS: usize = 20_000;

fn irreducible_radius(adj: &[Vec<usize>], tol: f64) -> RadiusBounds {
    let n = adj.len();
    let mut v = vec![1.0f64; n];
    let mut best = exact_bounds(adj, &v);
    let mut iter = 0;
    while best.width() > tol * best.hi && iter < MAX_ITERS {
        for _ in 0..16 {
            let mut next = v.clone();
            for (i, row) in adj.iter().enumerate() {
                for &j in row {
                    next[i] += v[j];
                }
            }
            let m = next.iter().cloned().fold(0.0, f64::max);
            v = next.into_iter().map(|x| x / m).collect();
        }
        iter += 16;
        let b = exact_bounds(adj, &v);
        best.lo = best.lo.max(b.lo);
        best.hi = best.hi.min(b.hi);
    }
    best
}

/// Collatz–Wielandt bounds from an integer rescaling of `v`.
fn exact_bounds(adj: &[Vec<usize>], v: &[f64]) -> RadiusBounds {
    let m = v.iter().cloned().fold(0.0, f64::max);
    let w: Vec<u128> = v.iter().map(|&x| ((x / m) * (1u64 << SCALE_BITS) as f64) as u128 + 1).collect();
    let mut lo: Option<(u128, u128)> = None;
    let mut hi: Option<(u128, u128)> = None;
    for (i, row) in adj.iter().enumerate() {
        let aw: u128 = row.iter().map(|&j| w[j]).sum();
        let r = (aw, w[i]);
        // a/b < c/d  ⇔  a·d < c·b; products stay below 2^128 for under 2^23 states.
        if lo.is_none_or(|(a, b)| r.0 * b < a * r.1) {
            lo = Some(r);
        }
        if hi.is_none_or(|(a, b)| r.0 * b > a * r.1) {
            hi = Some(r);
        }
    }
    let (la, lb) = lo.expect("nonempty component");
    let (ha, hb) = hi.expect("nonempty component");
    if la * hb == ha * lb && la % lb == 0 {
        let exact = (la / lb) as f64;
        return RadiusBounds { lo: exact, hi: exact };
    }
    RadiusBounds { lo: widen_down(la as f64 / lb as f64), hi: widen_up(ha as f64 / hb as f64) }
}
