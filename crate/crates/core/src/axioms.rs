//! Projection axioms (P0), (P1), (SP3), (SP4) on a finite family of axis
//! translates, and the total order on intervals `𝐘[𝒳, 𝒵]`.
//!
//! `d_𝒴` is realized as `d^π_𝒴`; thresholds of (SP3) and of the interval
//! membership are widened by the `2θ` slack between the two.

use std::collections::HashMap;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::geometry::{Axis, Projection};
use crate::group::{Element, Group};

/// Finite set of distinct axes with all pairwise axis-onto-axis projections.
#[derive(Clone, Debug)]
pub struct AxisFamily {
    axes: Vec<Axis>,
    index: HashMap<Axis, usize>,
    /// `proj[y * n + x]` is `π_y(x)`; `None` on the diagonal.
    proj: Vec<Option<Projection>>,
}

impl AxisFamily {
    pub fn new(group: &Group, axes: Vec<Axis>) -> Result<AxisFamily> {
        let mut axes = axes;
        axes.sort_by(|a, b| a.coset_rep().cmp(b.coset_rep()));
        axes.dedup();
        let n = axes.len();
        let proj = (0..n * n)
            .into_par_iter()
            .map(|i| {
                let (y, x) = (i / n, i % n);
                if x == y {
                    Ok(None)
                } else {
                    axes[y].project_axis(group, &axes[x]).map(Some)
                }
            })
            .collect::<Result<Vec<_>>>()?;
        let index = axes.iter().cloned().enumerate().map(|(i, a)| (a, i)).collect();
        Ok(AxisFamily { axes, index, proj })
    }

    /// Translates `g·base` for all `g` in the ball of the given radius.
    pub fn from_ball(group: &Group, base: &Axis, radius: u32) -> Result<AxisFamily> {
        let axes = group
            .enumerate_ball(radius)?
            .iter()
            .map(|g| base.translate(group, g))
            .collect::<Result<Vec<_>>>()?;
        AxisFamily::new(group, axes)
    }

    /// Translates `v·base` for every vertex `v` of the geodesic from `from`
    /// to `to`, together with the given extra axes.
    pub fn along_geodesic(
        group: &Group,
        base: &Axis,
        from: &Element,
        to: &Element,
        extra: &[Axis],
    ) -> Result<AxisFamily> {
        let mut axes = group
            .geodesic(from, to)?
            .iter()
            .map(|v| base.translate(group, v))
            .collect::<Result<Vec<_>>>()?;
        axes.extend_from_slice(extra);
        AxisFamily::new(group, axes)
    }

    pub fn len(&self) -> usize {
        self.axes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.axes.is_empty()
    }

    pub fn axes(&self) -> &[Axis] {
        &self.axes
    }

    pub fn index_of(&self, axis: &Axis) -> Option<usize> {
        self.index.get(axis).copied()
    }

    /// `π_y(x)` for distinct members.
    pub fn projection(&self, y: usize, x: usize) -> Projection {
        self.proj[y * self.axes.len() + x].expect("distinct axes")
    }

    /// `d^π_y(x, z)`; `x` and `z` must differ from `y`.
    pub fn dpi(&self, y: usize, x: usize, z: usize) -> u32 {
        self.axes[y].diam(self.projection(y, x).union(self.projection(y, z)))
    }

    fn name(&self, i: usize) -> String {
        format!("{}E", self.axes[i].coset_rep())
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct Violation {
    pub axiom: String,
    /// Coset representatives of the axes involved, written `gE`.
    pub axes: Vec<String>,
    pub detail: String,
}

#[derive(Clone, Debug, Serialize)]
pub struct AxiomReport {
    pub axiom: String,
    pub theta: u32,
    pub theta_prime: u32,
    pub violations: Vec<Violation>,
    pub sample_size: u64,
    /// Checks whose premise held, so the conclusion was actually tested.
    pub nonvacuous: u64,
    pub exhaustive: bool,
    pub maximizer: Option<Vec<String>>,
}

impl AxiomReport {
    pub fn passed(&self) -> bool {
        self.violations.is_empty()
    }

    fn new(axiom: &str, theta: u32) -> AxiomReport {
        AxiomReport {
            axiom: axiom.into(),
            theta,
            theta_prime: 11 * theta,
            violations: vec![],
            sample_size: 0,
            nonvacuous: 0,
            exhaustive: true,
            maximizer: None,
        }
    }
}

/// `θ = max diam π_𝒴(𝒳)` over ordered pairs of distinct axes.
pub fn check_p0(family: &AxisFamily) -> AxiomReport {
    let n = family.len();
    let mut best: Option<(u32, usize, usize)> = None;
    for y in 0..n {
        for x in 0..n {
            if x != y {
                let d = family.dpi(y, x, x);
                if best.is_none_or(|b| d > b.0) {
                    best = Some((d, y, x));
                }
            }
        }
    }
    let mut rep = AxiomReport::new("P0", best.map_or(0, |b| b.0));
    rep.sample_size = (n * n.saturating_sub(1)) as u64;
    rep.maximizer = best.map(|(_, y, x)| vec![family.name(y), family.name(x)]);
    rep
}

/// Distinct triples: all of them when there are at most `samples`,
/// otherwise `samples` drawn with a seeded generator.
fn triples(n: usize, samples: u64, seed: u64) -> (Vec<[usize; 3]>, bool) {
    let total = (n as u64) * (n as u64).saturating_sub(1) * (n as u64).saturating_sub(2);
    if total <= samples {
        let mut out = Vec::new();
        for a in 0..n {
            for b in 0..n {
                for c in 0..n {
                    if a != b && b != c && a != c {
                        out.push([a, b, c]);
                    }
                }
            }
        }
        return (out, true);
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut out = Vec::with_capacity(samples as usize);
    while (out.len() as u64) < samples {
        let t = [rng.random_range(0..n), rng.random_range(0..n), rng.random_range(0..n)];
        if t[0] != t[1] && t[1] != t[2] && t[0] != t[2] {
            out.push(t);
        }
    }
    (out, false)
}

/// (P1): never both `d^π_𝒴(𝒳,𝒵) > θ` and `d^π_𝒳(𝒴,𝒵) > θ`. Every
/// sampled triple is tested in all six role assignments.
pub fn check_p1(family: &AxisFamily, theta: u32, samples: u64, seed: u64) -> AxiomReport {
    let (ts, exhaustive) = triples(family.len(), samples, seed);
    let mut rep = AxiomReport::new("P1", theta);
    rep.exhaustive = exhaustive;
    rep.sample_size = ts.len() as u64;
    let perms = [[0, 1, 2], [0, 2, 1], [1, 0, 2], [1, 2, 0], [2, 0, 1], [2, 1, 0]];
    for t in ts {
        for p in perms {
            let (x, y, z) = (t[p[0]], t[p[1]], t[p[2]]);
            let dy = family.dpi(y, x, z);
            if dy > theta {
                rep.nonvacuous += 1;
                let dx = family.dpi(x, y, z);
                if dx > theta {
                    rep.violations.push(Violation {
                        axiom: "P1".into(),
                        axes: vec![family.name(x), family.name(y), family.name(z)],
                        detail: format!("d_Y(X,Z) = {} and d_X(Y,Z) = {} both exceed {}", dy, dx, theta),
                    });
                }
            }
        }
    }
    rep
}

/// (SP4) as `d^π_𝒴(𝒳,𝒳) ≤ θ′` on all pairs, and (SP3) as
/// `|d^π_𝒵(𝒳,𝒲) − d^π_𝒵(𝒴,𝒲)| ≤ 4θ` whenever `d^π_𝒴(𝒳,𝒵) > θ′ + 2θ`, for
/// every `𝒲 ≠ 𝒵` in the family.
pub fn check_sp(family: &AxisFamily, theta: u32, samples: u64, seed: u64) -> AxiomReport {
    let n = family.len();
    let mut rep = AxiomReport::new("SP", theta);
    let tp = rep.theta_prime;
    for y in 0..n {
        for x in 0..n {
            if x != y && family.dpi(y, x, x) > tp {
                rep.violations.push(Violation {
                    axiom: "SP4".into(),
                    axes: vec![family.name(x), family.name(y)],
                    detail: format!("d_Y(X,X) = {} exceeds {}", family.dpi(y, x, x), tp),
                });
            }
        }
    }
    let (ts, exhaustive) = triples(n, samples, seed);
    rep.exhaustive = exhaustive;
    rep.sample_size = ts.len() as u64;
    let found: Vec<(u64, Vec<Violation>)> = ts
        .par_iter()
        .map(|&[x, y, z]| {
            let d = family.dpi(y, x, z);
            if d <= tp + 2 * theta {
                return (0, vec![]);
            }
            let mut v = vec![];
            let mut checks = 0;
            for w in (0..n).filter(|&w| w != z) {
                checks += 1;
                let a = family.dpi(z, x, w);
                let b = family.dpi(z, y, w);
                if a.abs_diff(b) > 4 * theta {
                    v.push(Violation {
                        axiom: "SP3".into(),
                        axes: vec![family.name(x), family.name(y), family.name(z), family.name(w)],
                        detail: format!(
                            "d_Y(X,Z) = {} but d_Z(X,W) = {} and d_Z(Y,W) = {}",
                            d, a, b
                        ),
                    });
                }
            }
            (checks, v)
        })
        .collect();
    for (c, v) in found {
        rep.nonvacuous += c;
        rep.violations.extend(v);
    }
    rep
}

/// The interval `𝐘[𝒳, 𝒵]` sorted by `⊏`.
#[derive(Clone, Debug, Serialize)]
pub struct OrderedInterval {
    /// `𝒳`, the middle axes in order, then `𝒵`; as `gE` names.
    pub chain: Vec<String>,
    #[serde(skip)]
    pub indices: Vec<usize>,
    pub violations: Vec<Violation>,
}

impl OrderedInterval {
    pub fn passed(&self) -> bool {
        self.violations.is_empty()
    }

    /// Position of a family member in the chain.
    pub fn position(&self, i: usize) -> Option<usize> {
        self.indices.iter().position(|&j| j == i)
    }
}

/// Extracts `𝐘(𝒳,𝒵) = {𝒴 : d^π_𝒴(𝒳,𝒵) > 2θ′ + 2θ}` from the family and
/// orders it by `𝒴₀ ⊏ 𝒴₁ ⟺ d_{𝒴₀}(𝒳,𝒴₁) > θ′`. Disagreement among the four
/// defining conditions, failure of antisymmetry or transitivity, and
/// failure of `d_{𝒴₁}(𝒴₀,𝒴₂) = d_{𝒴₁}(𝒳,𝒵)` within `4θ` are reported as
/// violations; the order is never repaired.
pub fn order_interval(family: &AxisFamily, x: &Axis, z: &Axis, theta: u32) -> Result<OrderedInterval> {
    let xi = family
        .index_of(x)
        .ok_or_else(|| Error::usage("interval endpoint is not in the family"))?;
    let zi = family
        .index_of(z)
        .ok_or_else(|| Error::usage("interval endpoint is not in the family"))?;
    if xi == zi {
        return Err(Error::usage("interval endpoints must differ"));
    }
    let tp = 11 * theta;
    let middle: Vec<usize> = (0..family.len())
        .filter(|&y| y != xi && y != zi && family.dpi(y, xi, zi) > 2 * tp + 2 * theta)
        .collect();
    let before = |a: usize, b: usize| family.dpi(a, xi, b) > tp;
    let mut violations = Vec::new();

    for &a in &middle {
        for &b in &middle {
            if a == b {
                continue;
            }
            let conds = [
                family.dpi(a, xi, b) > tp,
                family.dpi(b, xi, a) <= tp,
                family.dpi(b, a, zi) > tp,
                family.dpi(a, b, zi) <= tp,
            ];
            if conds.iter().any(|&c| c != conds[0]) {
                violations.push(Violation {
                    axiom: "order-conditions".into(),
                    axes: vec![family.name(a), family.name(b)],
                    detail: format!("the four conditions disagree: {:?}", conds),
                });
            }
            if before(a, b) == before(b, a) {
                violations.push(Violation {
                    axiom: "order-antisymmetry".into(),
                    axes: vec![family.name(a), family.name(b)],
                    detail: "exactly one of Y0 < Y1, Y1 < Y0 must hold".into(),
                });
            }
        }
    }
    for &a in &middle {
        for &b in &middle {
            for &c in &middle {
                if a != b && b != c && a != c && before(a, b) && before(b, c) && !before(a, c) {
                    violations.push(Violation {
                        axiom: "order-transitivity".into(),
                        axes: vec![family.name(a), family.name(b), family.name(c)],
                        detail: "Y0 < Y1 < Y2 but not Y0 < Y2".into(),
                    });
                }
            }
        }
    }

    let mut scored: Vec<(usize, usize)> = middle
        .iter()
        .map(|&a| (middle.iter().filter(|&&b| b != a && before(b, a)).count(), a))
        .collect();
    scored.sort();
    let mut chain = vec![xi];
    chain.extend(scored.iter().map(|&(_, a)| a));
    chain.push(zi);

    let target = |y: usize| family.dpi(y, xi, zi);
    for i in 1..chain.len().saturating_sub(1) {
        for j in 0..i {
            for k in i + 1..chain.len() {
                let (a, b, c) = (chain[j], chain[i], chain[k]);
                let got = family.dpi(b, a, c);
                if got.abs_diff(target(b)) > 4 * theta {
                    violations.push(Violation {
                        axiom: "order-monotone".into(),
                        axes: vec![family.name(a), family.name(b), family.name(c)],
                        detail: format!(
                            "d_Y1(Y0,Y2) = {} differs from d_Y1(X,Z) = {} by more than {}",
                            got,
                            target(b),
                            4 * theta
                        ),
                    });
                }
            }
        }
    }
    Ok(OrderedInterval {
        chain: chain.iter().map(|&i| family.name(i)).collect(),
        indices: chain,
        violations,
    })
}

/// Axes `c^(j·m)·h·ℰ` for `|j| ≤ reach` and each `h`, which give triples
/// with large projections and make (SP3) nonvacuous.
pub fn chain_axes(group: &Group, base: &Axis, hs: &[Element], m: i64, reach: i64) -> Result<Vec<Axis>> {
    let mut out = Vec::new();
    for j in -reach..=reach {
        let shift = base.point(group, j * m);
        for h in hs {
            out.push(base.translate(group, &group.multiply(&shift, h)?)?);
        }
    }
    Ok(out)
}

#[derive(Clone, Copy, Debug)]
pub struct SuiteParams {
    /// Radius of the ball of translates.
    pub radius: u32,
    /// Triples sampled for (P1) and (SP3).
    pub samples: u64,
    /// Zig-zag chains sampled for the order check.
    pub chains: u64,
    pub seed: u64,
}

#[derive(Clone, Debug, Serialize)]
pub struct OrderReport {
    pub chains: u64,
    pub comparable_pairs: u64,
    /// Chains whose interval came out as `ℰ ⊏ g⁻¹ℰ ⊏ 𝒴₂ ⊏ 𝒵`.
    pub in_expected_order: u64,
    pub violations: Vec<Violation>,
}

#[derive(Clone, Debug, Serialize)]
pub struct AxiomSuite {
    pub c: String,
    pub radius: u32,
    pub family_size: u64,
    pub theta: u32,
    pub theta_prime: u32,
    pub p0: AxiomReport,
    pub p1: AxiomReport,
    pub sp: AxiomReport,
    /// (SP3), (SP4) on the chains and `B₁ℰ` alone, where the premise of
    /// (SP3) holds often.
    pub sp_chains: AxiomReport,
    pub order: OrderReport,
}

impl AxiomSuite {
    pub fn passed(&self) -> bool {
        self.p0.passed()
            && self.p1.passed()
            && self.sp.passed()
            && self.sp_chains.passed()
            && self.order.violations.is_empty()
            && self.order.in_expected_order == self.order.chains
    }
}

const VIOLATION_LIMIT: usize = 32;

/// (P0), (P1), (SP3), (SP4) on the translates of `ℰ` by a ball together
/// with chains `c^(jm)hℰ`, then the order on sampled zig-zag chains
/// `ℰ, g⁻¹ℰ, g⁻¹cᴹg·h⁻¹ℰ, g⁻¹cᴹg·h⁻¹cᴹhℰ` with `g, h, gh⁻¹ ∉ E(c)`.
pub fn axiom_suite(group: &Group, c: &Element, params: SuiteParams) -> Result<AxiomSuite> {
    let base = Axis::new(group, c)?;
    let ball = group.enumerate_ball(params.radius)?;
    let off: Vec<Element> = ball
        .iter()
        .filter(|g| base.translate(group, g).is_ok_and(|a| a != base))
        .cloned()
        .collect();
    let tau = base.step() as i64;
    let mut axes = ball
        .iter()
        .map(|g| base.translate(group, g))
        .collect::<Result<Vec<_>>>()?;
    let probe = AxisFamily::new(group, axes.clone())?;
    let p0_ball = check_p0(&probe);
    let (theta, tp) = (p0_ball.theta as i64, p0_ball.theta_prime as i64);
    let short: Vec<Element> = off.iter().filter(|g| g.norm() <= 2).cloned().collect();
    let m = (tp + 2 * theta) / tau + 1;
    let chains = chain_axes(group, &base, &short, m, 2)?;
    let mut small = chains.clone();
    for g in ball.iter().filter(|g| g.norm() <= 1) {
        small.push(base.translate(group, g)?);
    }
    axes.extend(chains);
    let family = AxisFamily::new(group, axes)?;
    let p0 = check_p0(&family);
    let theta = p0.theta;
    let p1 = check_p1(&family, theta, params.samples, params.seed);
    let sp = check_sp(&family, theta, params.samples, params.seed);
    let sp_chains = check_sp(&AxisFamily::new(group, small)?, theta, params.samples, params.seed);

    let power = (2 * p0.theta_prime as i64 + 6 * theta as i64 + 4 * params.radius as i64) / tau + 1;
    let cm = base.point(group, power);
    let mut rng = ChaCha8Rng::seed_from_u64(params.seed);
    let picks: Vec<(usize, usize)> = if off.is_empty() {
        Vec::new()
    } else {
        let mut out = Vec::with_capacity(params.chains as usize);
        while (out.len() as u64) < params.chains {
            let (i, j) = (rng.random_range(0..off.len()), rng.random_range(0..off.len()));
            // g·h⁻¹ ∈ E(c) collapses the two middle axes
            let q = group.multiply(&off[i], &group.inverse(&off[j]))?;
            if base.translate(group, &q)? != base {
                out.push((i, j));
            }
        }
        out
    };
    let outcomes: Vec<Result<(u64, bool, Vec<Violation>)>> = picks
        .par_iter()
        .map(|&(i, j)| {
            let (g, h) = (&off[i], &off[j]);
            let gi = group.inverse(g);
            let hi = group.inverse(h);
            let x = group.multiply(&gi, &group.multiply(&cm, g)?)?;
            let y = group.multiply(&hi, &group.multiply(&cm, h)?)?;
            let chain = [
                base.clone(),
                base.translate(group, &gi)?,
                base.translate(group, &group.multiply(&x, &hi)?)?,
                base.translate(group, &group.multiply(&x, &y)?)?,
            ];
            let fam = AxisFamily::new(group, chain.to_vec())?;
            let iv = order_interval(&fam, &chain[0], &chain[3], theta)?;
            let mid = iv.indices.len().saturating_sub(2) as u64;
            let expected: Vec<usize> = chain.iter().map(|a| fam.index_of(a).expect("member")).collect();
            Ok((mid * mid.saturating_sub(1) / 2, iv.indices == expected, iv.violations))
        })
        .collect();
    let mut order = OrderReport {
        chains: picks.len() as u64,
        comparable_pairs: 0,
        in_expected_order: 0,
        violations: Vec::new(),
    };
    for o in outcomes {
        let (pairs, ok, v) = o?;
        order.comparable_pairs += pairs;
        order.in_expected_order += ok as u64;
        order.violations.extend(v);
    }
    order.violations.truncate(VIOLATION_LIMIT);
    Ok(AxiomSuite {
        c: c.to_string(),
        radius: params.radius,
        family_size: family.len() as u64,
        theta,
        theta_prime: p0.theta_prime,
        p0,
        p1,
        sp,
        sp_chains,
        order,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn setup() -> (Group, Axis) {
        let g = Group::free(2);
        let c = g.parse_element("ab").unwrap();
        let axis = Axis::new(&g, &c).unwrap();
        (g, axis)
    }

    #[test]
    fn p0_on_small_family() {
        let (g, e) = setup();
        let fam = AxisFamily::from_ball(&g, &e, 3).unwrap();
        let rep = check_p0(&fam);
        assert_eq!(rep.theta, 2);
        assert_eq!(rep.theta_prime, 22);
        let be = e.translate(&g, &g.parse_element("b").unwrap()).unwrap();
        let (i, j) = (fam.index_of(&e).unwrap(), fam.index_of(&be).unwrap());
        assert!(fam.dpi(i, j, j) <= 2);
    }

    #[test]
    fn p1_and_sp_pass() {
        let (g, e) = setup();
        let fam = AxisFamily::from_ball(&g, &e, 3).unwrap();
        let theta = check_p0(&fam).theta;
        let p1 = check_p1(&fam, theta, 20_000, 7);
        assert!(p1.passed(), "{:?}", p1.violations.first());
        assert!(p1.nonvacuous > 0);
        let sp = check_sp(&fam, theta, 50_000, 7);
        assert!(sp.passed(), "{:?}", sp.violations.first());
    }

    #[test]
    fn empty_interval_is_just_the_endpoints() {
        let (g, e) = setup();
        let fam = AxisFamily::from_ball(&g, &e, 2).unwrap();
        let be = e.translate(&g, &g.parse_element("b").unwrap()).unwrap();
        let iv = order_interval(&fam, &e, &be, 2).unwrap();
        assert_eq!(iv.chain, ["1E", "AE"]);
        assert!(iv.passed());
    }

    #[test]
    fn suite_on_a_small_ball() {
        let (g, _) = setup();
        let c = g.parse_element("ab").unwrap();
        let params = SuiteParams {
            radius: 2,
            samples: 2000,
            chains: 50,
            seed: 3,
        };
        let s = axiom_suite(&g, &c, params).unwrap();
        assert!(s.passed(), "{:?}", s.order);
        assert_eq!(s.theta, 2);
        assert!(s.sp_chains.nonvacuous > 0);
        assert_eq!(s.order.comparable_pairs, 50);
        assert_eq!(s.order.in_expected_order, 50);
    }
}
