//! Axes of strongly contracting elements, nearest-point projections onto
//! their orbits, and measurement of the contraction and bounded geodesic
//! image constants.
//!
//! An axis `g·ℰ` is the orbit `{g·c₀^k.o}` of the root `c₀`. Because `c₀` is
//! cyclically reduced (componentwise for products), `d(g c₀^i, g c₀^j) =
//! |i − j|·τ` with `τ = |c₀|`, so a set of axis points is determined by an
//! index interval and its diameter is `(hi − lo)·τ`.

use std::collections::HashMap;
use std::hash::{Hash, Hasher};

use rand::seq::IndexedRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::group::{Element, Group, GroupKind};
use crate::word::{Letter, Word};

/// Nearest axis points `rep·c₀^k`, `lo ≤ k ≤ hi`, at distance `dist`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize)]
pub struct Projection {
    pub lo: i64,
    pub hi: i64,
    pub dist: u32,
}

impl Projection {
    pub fn union(self, other: Projection) -> Projection {
        Projection {
            lo: self.lo.min(other.lo),
            hi: self.hi.max(other.hi),
            dist: self.dist.min(other.dist),
        }
    }

    pub fn shift(self, by: i64) -> Projection {
        Projection {
            lo: self.lo + by,
            hi: self.hi + by,
            dist: self.dist,
        }
    }
}

/// Primitive root of a cyclically reduced nontrivial free word.
pub fn primitive_root(c: &Word) -> Word {
    let n = c.len();
    for p in 1..=n {
        if n.is_multiple_of(p) && (p..n).all(|i| c[i] == c[i - p]) {
            return Word::reduce(c[..p].iter().copied());
        }
    }
    c.clone()
}

/// The root `c₀` with `c = c₀^m` generating `E(c)` in a free group.
pub fn elementary_closure_root(group: &Group, c: &Element) -> Result<Element> {
    group.check_element(c)?;
    let w = match c {
        Element::Free(w) => w,
        _ => {
            return Err(Error::unsupported(format!(
                "elementary closures are only computed in free groups, not {}",
                group.kind().name()
            )))
        }
    };
    if w.is_identity() {
        return Err(Error::usage("the identity has no elementary closure"));
    }
    if !w.is_cyclically_reduced() {
        return Err(Error::usage(format!("{} is not cyclically reduced", w)));
    }
    Ok(Element::Free(primitive_root(w)))
}

/// Position of `y` relative to the bi-infinite line through the powers of
/// the cyclically reduced word `root`: the signed distance `t` along the
/// line of the branch point and the height `h` of `y` above it.
fn line_position(y: &[Letter], root: &[Letter]) -> (i64, u32) {
    let l = root.len();
    let plus = y.iter().enumerate().take_while(|&(i, &x)| x == root[i % l]).count();
    let t = if plus > 0 {
        plus as i64
    } else {
        let minus = y
            .iter()
            .enumerate()
            .take_while(|&(i, &x)| x == root[l - 1 - i % l].inverse())
            .count();
        -(minus as i64)
    };
    (t, (y.len() as i64 - t.abs()) as u32)
}

/// Exact projection of `y` onto `{root^k}` in a free group.
pub fn project_free(root: &Word, y: &Word) -> Projection {
    let l = root.len() as i64;
    let (t, h) = line_position(y, root);
    let q = t.div_euclid(l);
    let r = t.rem_euclid(l);
    let (lo, hi, off) = if r == 0 {
        (q, q, 0)
    } else if 2 * r < l {
        (q, q, r)
    } else if 2 * r > l {
        (q + 1, q + 1, l - r)
    } else {
        (q, q + 1, r)
    };
    Projection {
        lo,
        hi,
        dist: h + off as u32,
    }
}

/// A translate `g·ℰ` of the orbit of `E(c)`, identified by the
/// shortlex-least element of the coset `g·⟨c₀⟩`.
#[derive(Clone, Debug)]
pub struct Axis {
    root: Element,
    rep: Element,
    step: u32,
    window: u32,
}

impl PartialEq for Axis {
    fn eq(&self, other: &Self) -> bool {
        self.rep == other.rep && self.root == other.root
    }
}

impl Eq for Axis {}

impl Hash for Axis {
    fn hash<H: Hasher>(&self, state: &mut H) {
        self.rep.hash(state);
    }
}

impl Axis {
    /// The axis `ℰ` of `c`. In free groups `c` must be cyclically reduced
    /// and the orbit is that of its primitive root; in direct products each
    /// component must be cyclically reduced and the orbit is `⟨c⟩.o`.
    pub fn new(group: &Group, c: &Element) -> Result<Axis> {
        group.check_element(c)?;
        let root = match group.kind() {
            GroupKind::Free => elementary_closure_root(group, c)?,
            GroupKind::DirectProductOfFree => {
                if c.is_identity() {
                    return Err(Error::usage("the identity has no axis"));
                }
                if !c.factor_words().all(|w| w.is_cyclically_reduced()) {
                    return Err(Error::usage(format!("{} is not cyclically reduced", c)));
                }
                c.clone()
            }
            GroupKind::FinitelyPresented => {
                return Err(Error::unsupported("axes need a free or direct-product backend"))
            }
        };
        let step = root.norm();
        let window = (2 * group.radius_bound()).div_ceil(step) + 2;
        Ok(Axis {
            rep: group.identity(),
            root,
            step,
            window,
        })
    }

    /// Largest `|k|` scanned when projections are found by search.
    pub fn with_window(mut self, window: u32) -> Axis {
        self.window = window;
        self
    }

    /// Window certifying nearest points for elements of norm at most `radius`.
    pub fn window_for_radius(&self, radius: u32) -> u32 {
        (2 * radius).div_ceil(self.step) + 2
    }

    pub fn root(&self) -> &Element {
        &self.root
    }

    pub fn coset_rep(&self) -> &Element {
        &self.rep
    }

    /// `τ = |c₀|`, the spacing of consecutive orbit points.
    pub fn step(&self) -> u32 {
        self.step
    }

    pub fn window(&self) -> u32 {
        self.window
    }

    fn root_power(&self, group: &Group, k: i64) -> Element {
        let ws: Vec<Word> = self.root.factor_words().map(|w| w.pow(k)).collect();
        group.from_words(ws).expect("root belongs to the group")
    }

    /// The orbit point `rep·c₀^k`.
    pub fn point(&self, group: &Group, k: i64) -> Element {
        group
            .multiply(&self.rep, &self.root_power(group, k))
            .expect("axis belongs to the group")
    }

    /// `g·self`, with the canonical coset representative.
    pub fn translate(&self, group: &Group, g: &Element) -> Result<Axis> {
        let raw = Axis {
            rep: group.multiply(g, &self.rep)?,
            ..self.clone()
        };
        raw.canonical(group)
    }

    fn canonical(mut self, group: &Group) -> Result<Axis> {
        let p = self.project(group, &group.identity())?;
        let best = (p.lo..=p.hi)
            .map(|k| self.point(group, k))
            .min()
            .expect("projection is nonempty");
        self.rep = best;
        Ok(self)
    }

    /// Axis points nearest to `x`.
    pub fn project(&self, group: &Group, x: &Element) -> Result<Projection> {
        let y = group.multiply(&group.inverse(&self.rep), x)?;
        match (&y, &self.root) {
            (Element::Free(yw), Element::Free(root)) => Ok(project_free(root, yw)),
            _ => self.project_by_search(group, &y),
        }
    }

    /// Scans `|k| ≤ ⌈2|y|/τ⌉ + 1`; beyond that `|c₀^k| − |y| > |y| = d(y, o)`.
    fn project_by_search(&self, group: &Group, y: &Element) -> Result<Projection> {
        let w = (2 * y.norm()).div_ceil(self.step) as i64 + 1;
        if w > self.window as i64 {
            return Err(Error::resource(format!(
                "axis window {} is too small to certify the projection of {} (needs {})",
                self.window, y, w
            )));
        }
        let step_inv = group.inverse(&self.root);
        let mut z = group.multiply(&self.root_power(group, w), y)?;
        let mut best = Projection {
            lo: 0,
            hi: 0,
            dist: u32::MAX,
        };
        for k in -w..=w {
            let d = z.norm();
            if d < best.dist {
                best = Projection { lo: k, hi: k, dist: d };
            } else if d == best.dist {
                best.hi = k;
            }
            z = group.multiply(&step_inv, &z)?;
        }
        Ok(best)
    }

    /// Projection of a finite point set.
    pub fn project_set(&self, group: &Group, xs: &[Element]) -> Result<Projection> {
        let mut it = xs.iter();
        let first = it
            .next()
            .ok_or_else(|| Error::usage("cannot project an empty set"))?;
        let mut p = self.project(group, first)?;
        for x in it {
            p = p.union(self.project(group, x)?);
        }
        Ok(p)
    }

    /// Diameter of a set of axis points given by an index interval.
    pub fn diam(&self, p: Projection) -> u32 {
        ((p.hi - p.lo) as u32) * self.step
    }

    /// `d^π(A, B) = diam π(A) ∪ π(B)`.
    pub fn proj_distance(&self, group: &Group, a: &[Element], b: &[Element]) -> Result<u32> {
        Ok(self.diam(self.project_set(group, a)?.union(self.project_set(group, b)?)))
    }

    /// Projection of the whole orbit of `other`, a different axis. The
    /// orbit is walked outward from its representative in both directions
    /// until three consecutive points project to the same interval at
    /// increasing distance.
    pub fn project_axis(&self, group: &Group, other: &Axis) -> Result<Projection> {
        if self == other {
            return Err(Error::usage("an axis does not project onto itself"));
        }
        let limit = other
            .window
            .max(other.window_for_radius(self.rep.norm() + other.rep.norm())) as u64;
        let mut acc = self.project(group, &other.point(group, 0))?;
        for dir in [1i64, -1] {
            let mut prev: Option<Projection> = None;
            let mut stable = 0;
            let mut j = dir;
            loop {
                if j.unsigned_abs() > limit {
                    return Err(Error::resource(format!(
                        "projection of axis {} onto {} did not stabilize within the window",
                        other.rep, self.rep
                    )));
                }
                let p = self.project(group, &other.point(group, j))?;
                acc = acc.union(p);
                match prev {
                    Some(q) if q.lo == p.lo && q.hi == p.hi && p.dist > q.dist => stable += 1,
                    _ => stable = 0,
                }
                if stable >= 2 {
                    break;
                }
                prev = Some(p);
                j += dir;
            }
        }
        Ok(acc)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Provenance {
    Measured,
    Asserted,
    /// Computed from other constants by a closed formula.
    Derived,
    /// Taken from user input.
    Configured,
}

#[derive(Clone, Debug, Serialize)]
pub struct ProjectionConstants {
    pub c: u32,
    pub c_prime: u32,
    pub measurement_radius: u32,
    pub provenance: Provenance,
}

#[derive(Clone, Debug, Serialize)]
pub struct ContractionReport {
    pub c: u32,
    /// `C(r)` for `r = 0..=radius`.
    pub by_radius: Vec<u32>,
    /// Set when `C` still grew over the last two radius increments.
    pub failure: bool,
    pub pairs_checked: u64,
    pub exhaustive: bool,
    /// A pair realizing `C`.
    pub witness: Option<(String, String)>,
}

#[derive(Clone, Debug, Serialize)]
pub struct BgiReport {
    pub c_prime: u32,
    pub geodesics_checked: u64,
    pub exhaustive: bool,
    /// Values of `C′` rejected because a corollary claim failed.
    pub corollary_bumps: u32,
    pub failure: bool,
}

/// Limits on the number of pairs scanned before sampling kicks in.
#[derive(Clone, Copy, Debug)]
pub struct ScanBudget {
    pub max_pairs: u64,
    pub seed: u64,
}

impl Default for ScanBudget {
    fn default() -> Self {
        ScanBudget {
            max_pairs: 4_000_000,
            seed: 0x5eed,
        }
    }
}

fn ball_with_projections(
    group: &Group,
    axis: &Axis,
    radius: u32,
) -> Result<(Vec<Element>, Vec<usize>, HashMap<Element, Projection>)> {
    let ball = group.enumerate_ball(radius)?;
    let mut ends = Vec::with_capacity(radius as usize + 1);
    for r in 0..=radius {
        ends.push(ball.partition_point(|x| x.norm() <= r));
    }
    let axis = axis.clone().with_window(axis.window.max(axis.window_for_radius(radius)));
    let projs: Vec<Projection> = ball
        .par_iter()
        .map(|x| axis.project(group, x))
        .collect::<Result<_>>()?;
    let map = ball.iter().cloned().zip(projs).collect();
    Ok((ball, ends, map))
}

/// Measures `C(r)`, the largest `diam π(x) ∪ π(x′)` over `x, x′ ∈ B_r` with
/// `d(x, x′) ≤ d(x, axis)`, for `r ≤ radius`.
pub fn measure_contraction(
    group: &Group,
    axis: &Axis,
    radius: u32,
    budget: ScanBudget,
) -> Result<ContractionReport> {
    let (ball, ends, projs) = ball_with_projections(group, axis, radius)?;
    let total: u64 = ball
        .iter()
        .map(|x| ends[projs[x].dist.min(radius) as usize] as u64)
        .sum();
    let exhaustive = total <= budget.max_pairs;
    let per_x = (budget.max_pairs / ball.len() as u64).max(1) as usize;
    let r = radius as usize;

    let (best, witness, pairs) = ball
        .par_iter()
        .enumerate()
        .map(|(i, x)| {
            let px = projs[x];
            let d = px.dist.min(radius) as usize;
            let ys = &ball[..ends[d]];
            let mut best = vec![0u32; r + 1];
            let mut witness: Option<(u32, Element, Element)> = None;
            let mut pairs = 0u64;
            let mut visit = |y: &Element| {
                let x2 = group.multiply(x, y).expect("same backend");
                if let Some(p2) = projs.get(&x2) {
                    pairs += 1;
                    let diam = axis.diam(px.union(*p2));
                    let at = x.norm().max(x2.norm()) as usize;
                    if diam > best[at] {
                        best[at] = diam;
                    }
                    if witness.as_ref().is_none_or(|w| diam > w.0) {
                        witness = Some((diam, x.clone(), x2));
                    }
                }
            };
            if exhaustive {
                ys.iter().for_each(&mut visit);
            } else {
                let mut rng = ChaCha8Rng::seed_from_u64(budget.seed ^ (i as u64).wrapping_mul(0x9e37_79b9));
                visit(&ys[0]);
                for y in ys.choose_multiple(&mut rng, per_x.min(ys.len())) {
                    visit(y);
                }
            }
            (best, witness, pairs)
        })
        .reduce(
            || (vec![0u32; r + 1], None, 0u64),
            |(mut a, wa, pa), (b, wb, pb)| {
                for (x, y) in a.iter_mut().zip(&b) {
                    *x = (*x).max(*y);
                }
                let w = match (wa, wb) {
                    (Some(x), Some(y)) => Some(if y.0 > x.0 || (y.0 == x.0 && (&y.1, &y.2) < (&x.1, &x.2)) { y } else { x }),
                    (x, None) => x,
                    (None, y) => y,
                };
                (a, w, pa + pb)
            },
        );
    let mut by_radius = best;
    for k in 1..by_radius.len() {
        by_radius[k] = by_radius[k].max(by_radius[k - 1]);
    }
    let n = by_radius.len();
    let failure = n >= 3 && by_radius[n - 1] > by_radius[n - 2] && by_radius[n - 2] > by_radius[n - 3];
    Ok(ContractionReport {
        c: by_radius[n - 1],
        by_radius,
        failure,
        pairs_checked: pairs,
        exhaustive,
        witness: witness.map(|(_, a, b)| (a.to_string(), b.to_string())),
    })
}

struct GeodesicData {
    /// Distance of each vertex to the axis.
    dists: Vec<u32>,
    projs: Vec<Projection>,
    vertices: Vec<Element>,
}

impl GeodesicData {
    fn min_dist(&self) -> u32 {
        *self.dists.iter().min().expect("nonempty geodesic")
    }

    fn diam(&self, axis: &Axis, range: std::ops::Range<usize>) -> u32 {
        self.projs[range]
            .iter()
            .copied()
            .reduce(Projection::union)
            .map_or(0, |p| axis.diam(p))
    }

    /// Checks the entry/exit claims of the bounded geodesic image corollary
    /// for the constant `cp`.
    fn corollary_holds(&self, group: &Group, axis: &Axis, cp: u32) -> bool {
        let n = self.dists.len();
        let Some(t0) = self.dists.iter().position(|&d| d < cp) else {
            return self.diam(axis, 0..n) <= cp;
        };
        let t1 = self.dists.iter().rposition(|&d| d < cp).expect("t0 exists");
        if self.diam(axis, 0..t0) > cp || self.diam(axis, t1 + 1..n) > cp {
            return false;
        }
        if self.dists[t0..=t1].iter().any(|&d| d > 3 * cp) {
            return false;
        }
        let ends = self.projs[0].union(self.projs[n - 1]);
        if axis.diam(ends) > cp {
            let near = |p: Projection, v: &Element| {
                (p.lo..=p.hi).all(|k| {
                    group
                        .distance(&axis.point(group, k), v)
                        .is_ok_and(|d| d <= 2 * cp)
                })
            };
            if !near(self.projs[0], &self.vertices[t0]) || !near(self.projs[n - 1], &self.vertices[t1]) {
                return false;
            }
        }
        true
    }
}

/// Measures the bounded geodesic image constant `C′ ≥ c` over geodesics
/// joining points of `B_radius`, and checks the corollary's entry/exit
/// claims, raising `C′` until they hold.
pub fn measure_bgi(
    group: &Group,
    axis: &Axis,
    radius: u32,
    c: u32,
    budget: ScanBudget,
) -> Result<BgiReport> {
    let (ball, _, projs) = ball_with_projections(group, axis, radius)?;
    let n = ball.len() as u64;
    let total = n * (n + 1) / 2;
    let exhaustive = total <= budget.max_pairs;
    let pairs: Vec<(usize, usize)> = if exhaustive {
        (0..ball.len())
            .flat_map(|i| (i..ball.len()).map(move |j| (i, j)))
            .collect()
    } else {
        let mut rng = ChaCha8Rng::seed_from_u64(budget.seed);
        (0..budget.max_pairs)
            .map(|_| {
                use rand::Rng;
                (rng.random_range(0..ball.len()), rng.random_range(0..ball.len()))
            })
            .collect()
    };
    let data: Vec<GeodesicData> = pairs
        .par_iter()
        .map(|&(i, j)| {
            let path = group.geodesic(&ball[i], &ball[j])?;
            let mut ps = Vec::with_capacity(path.len());
            for v in &path {
                ps.push(match projs.get(v) {
                    Some(p) => *p,
                    None => axis.project(group, v)?,
                });
            }
            Ok(GeodesicData {
                dists: ps.iter().map(|p| p.dist).collect(),
                projs: ps,
                vertices: path,
            })
        })
        .collect::<Result<_>>()?;

    // Smallest C′ ≥ c with diam π(γ) ≤ C′ whenever γ avoids the open C′-ball.
    let max_m = data.iter().map(|g| g.min_dist()).max().unwrap_or(0);
    let mut worst = vec![0u32; max_m as usize + 2];
    for g in &data {
        let m = g.min_dist() as usize;
        let d = g.diam(axis, 0..g.projs.len());
        worst[m] = worst[m].max(d);
    }
    for m in (0..worst.len() - 1).rev() {
        worst[m] = worst[m].max(worst[m + 1]);
    }
    let mut cp = c;
    while (cp as usize) < worst.len() && worst[cp as usize] > cp {
        cp += 1;
    }
    let mut bumps = 0;
    while cp <= max_m && !data.par_iter().all(|g| g.corollary_holds(group, axis, cp)) {
        cp += 1;
        bumps += 1;
    }
    Ok(BgiReport {
        c_prime: cp,
        geodesics_checked: data.len() as u64,
        exhaustive,
        corollary_bumps: bumps,
        failure: cp > max_m,
    })
}

/// Measures `C` and `C′` at the given radius.
pub fn measure_constants(
    group: &Group,
    axis: &Axis,
    radius: u32,
    budget: ScanBudget,
) -> Result<(ProjectionConstants, ContractionReport, BgiReport)> {
    let contraction = measure_contraction(group, axis, radius, budget)?;
    if contraction.failure {
        return Err(Error::diagnostic(format!(
            "axis of {} shows no finite contraction constant up to radius {} (C(r) = {:?})",
            axis.root, radius, contraction.by_radius
        )));
    }
    let bgi = measure_bgi(group, axis, radius, contraction.c, budget)?;
    if bgi.failure {
        return Err(Error::diagnostic(format!(
            "no bounded geodesic image constant found for the axis of {} at radius {}",
            axis.root, radius
        )));
    }
    Ok((
        ProjectionConstants {
            c: contraction.c,
            c_prime: bgi.c_prime,
            measurement_radius: radius,
            provenance: Provenance::Measured,
        },
        contraction,
        bgi,
    ))
}
