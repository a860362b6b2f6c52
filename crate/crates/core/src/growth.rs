//! Shell censuses, growth-rate estimators, Poincaré series and the
//! purely-exponential-growth check.

use std::collections::HashMap;

use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::group::{Element, Group, GroupKind, NormalSubgroupOracle, QuotientValue};
use crate::word::Letter;

/// Counts of a set `Y` by norm, grouped into shells of width `Δ`.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ShellCensus {
    pub delta_step: u32,
    /// `counts[i] = #{y : Δi ≤ |y| < Δ(i+1)}`, complete shells only.
    pub counts: Vec<u64>,
    /// `cumulative[i] = #{y : |y| ≤ Δi}`.
    pub cumulative: Vec<u64>,
    pub label: String,
    /// `radius_counts[r] = #{y : |y| = r}`.
    pub radius_counts: Vec<u64>,
}

impl ShellCensus {
    /// Groups an exact per-radius histogram into shells of width `delta`,
    /// dropping a trailing shell that the histogram only partly covers.
    pub fn from_radius_counts(radius_counts: Vec<u64>, delta: u32, label: impl Into<String>) -> ShellCensus {
        let delta = delta.max(1) as usize;
        let n = (radius_counts.len() / delta).max(1);
        let mut counts = vec![0u64; n];
        for (r, &c) in radius_counts.iter().enumerate().take(n * delta) {
            counts[r / delta] += c;
        }
        let mut cumulative = Vec::with_capacity(n);
        let mut running = 0u64;
        let mut r = 0usize;
        for i in 0..n {
            while r < radius_counts.len() && r <= delta * i {
                running += radius_counts[r];
                r += 1;
            }
            cumulative.push(running);
        }
        ShellCensus {
            delta_step: delta as u32,
            counts,
            cumulative,
            label: label.into(),
            radius_counts,
        }
    }

    pub fn max_radius(&self) -> u32 {
        self.radius_counts.len().saturating_sub(1) as u32
    }

    pub fn total(&self) -> u64 {
        self.radius_counts.iter().sum()
    }

    pub fn is_empty(&self) -> bool {
        self.total() == 0
    }

    /// CSV with header `radius,count,cumulative`, one row per shell.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("radius,count,cumulative\n");
        for (i, (c, cum)) in self.counts.iter().zip(&self.cumulative).enumerate() {
            out.push_str(&format!("{},{},{}\n", i as u64 * self.delta_step as u64, c, cum));
        }
        out
    }
}

/// Exact census of `group` (or of the kernel of `oracle`) up to `r_max`.
pub fn shell_census(
    group: &Group,
    r_max: u32,
    delta: u32,
    oracle: Option<&NormalSubgroupOracle>,
) -> Result<ShellCensus> {
    if r_max > group.radius_bound() {
        return Err(Error::resource(format!(
            "radius {} exceeds the declared radius bound {}",
            r_max,
            group.radius_bound()
        )));
    }
    if let Some(o) = oracle {
        o.validate(group)?;
    }
    let counts = match (group.kind(), oracle) {
        (GroupKind::Free, None) => free_counts(group.factor_ranks()[0], r_max, None, 0),
        (GroupKind::Free, Some(o)) => free_counts(group.factor_ranks()[0], r_max, Some(o), 0),
        (GroupKind::DirectProductOfFree, _) => product_counts(group, r_max, oracle),
        (GroupKind::FinitelyPresented, _) => {
            let mut counts = vec![0u64; r_max as usize + 1];
            for r in 0..=r_max {
                group.for_each_in_shell(r, |x| {
                    if oracle.is_none_or(|o| o.contains(group, x).unwrap_or(false)) {
                        counts[r as usize] += 1;
                    }
                })?;
            }
            counts
        }
    };
    let label = match oracle {
        Some(o) => format!("{} in {}", o.description(), group.describe()),
        None => group.describe(),
    };
    Ok(ShellCensus::from_radius_counts(counts, delta, label))
}

/// Counts reduced words by length, keeping those whose image under the
/// oracle (on direct factor `factor`) is trivial. The search is split over
/// the first letter.
fn free_counts(rank: usize, r_max: u32, oracle: Option<&NormalSubgroupOracle>, factor: usize) -> Vec<u64> {
    let r = r_max as usize;
    let mut counts = vec![0u64; r + 1];
    counts[0] = 1;
    if r == 0 {
        return counts;
    }
    let parts: Vec<Vec<u64>> = Letter::alphabet(rank)
        .collect::<Vec<_>>()
        .into_par_iter()
        .map(|first| {
            let mut local = vec![0u64; r + 1];
            match oracle {
                None => {
                    // Unfiltered: every reduced word counts; close form per first letter.
                    let mut n = 1u64;
                    for len in 1..=r {
                        local[len] = n;
                        n = n.saturating_mul(2 * rank as u64 - 1);
                    }
                }
                Some(o) => {
                    let mut states: Vec<QuotientValue> = Vec::with_capacity(r + 1);
                    let mut s = o.identity();
                    o.apply(&mut s, factor, first);
                    states.push(s);
                    filtered_dfs(rank, r, o, factor, first, &mut states, &mut local);
                }
            }
            local
        })
        .collect();
    for p in parts {
        for (c, x) in counts.iter_mut().zip(p) {
            *c += x;
        }
    }
    counts
}

fn filtered_dfs(
    rank: usize,
    r: usize,
    o: &NormalSubgroupOracle,
    factor: usize,
    last: Letter,
    states: &mut Vec<QuotientValue>,
    counts: &mut [u64],
) {
    let depth = states.len();
    if o.is_trivial(states.last().expect("nonempty")) {
        counts[depth] += 1;
    }
    if depth == r {
        return;
    }
    for l in Letter::alphabet(rank) {
        if l == last.inverse() {
            continue;
        }
        let mut s = states[depth - 1].clone();
        o.apply(&mut s, factor, l);
        states.push(s);
        filtered_dfs(rank, r, o, factor, l, states, counts);
        states.pop();
    }
}

/// Per-factor `(length, image)` counts, combined over the max-norm of the
/// direct product.
fn product_counts(group: &Group, r_max: u32, oracle: Option<&NormalSubgroupOracle>) -> Vec<u64> {
    let r = r_max as usize;
    let ranks = group.factor_ranks();
    let Some(o) = oracle else {
        let spheres: Vec<Vec<u64>> = ranks.iter().map(|&k| free_counts(k, r_max, None, 0)).collect();
        let mut acc = vec![0u64; r + 1];
        acc[0] = 1;
        for s in &spheres {
            let mut next = vec![0u64; r + 1];
            for (a, &x) in acc.iter().enumerate() {
                for (b, &y) in s.iter().enumerate() {
                    next[a.max(b)] += x * y;
                }
            }
            acc = next;
        }
        return acc;
    };
    let tables: Vec<HashMap<(usize, QuotientValue), u64>> = ranks
        .iter()
        .enumerate()
        .map(|(f, &k)| factor_states(k, r, o, f))
        .collect();
    let mut acc: HashMap<(usize, QuotientValue), u64> = HashMap::new();
    acc.insert((0, o.identity()), 1);
    let last = tables.len() - 1;
    for table in &tables[..last] {
        let mut next: HashMap<(usize, QuotientValue), u64> = HashMap::new();
        for ((a, s), x) in &acc {
            for ((b, t), y) in table {
                *next.entry(((*a).max(*b), o.mul(s, t))).or_insert(0) += x * y;
            }
        }
        acc = next;
    }
    let mut by_state: HashMap<&QuotientValue, Vec<(usize, u64)>> = HashMap::new();
    for ((b, t), y) in &tables[last] {
        by_state.entry(t).or_default().push((*b, *y));
    }
    let mut counts = vec![0u64; r + 1];
    for ((a, s), x) in &acc {
        if let Some(list) = by_state.get(&o.inverse(s)) {
            for (b, y) in list {
                counts[(*a).max(*b)] += x * y;
            }
        }
    }
    counts
}

fn factor_states(rank: usize, r: usize, o: &NormalSubgroupOracle, factor: usize) -> HashMap<(usize, QuotientValue), u64> {
    fn go(
        rank: usize,
        r: usize,
        o: &NormalSubgroupOracle,
        factor: usize,
        last: Option<Letter>,
        depth: usize,
        state: &QuotientValue,
        out: &mut HashMap<(usize, QuotientValue), u64>,
    ) {
        *out.entry((depth, state.clone())).or_insert(0) += 1;
        if depth == r {
            return;
        }
        for l in Letter::alphabet(rank) {
            if Some(l.inverse()) == last {
                continue;
            }
            let mut s = state.clone();
            o.apply(&mut s, factor, l);
            go(rank, r, o, factor, Some(l), depth + 1, &s, out);
        }
    }
    let mut out = HashMap::new();
    go(rank, r, o, factor, None, 0, &o.identity(), &mut out);
    out
}

/// Census of an explicit list of elements.
pub fn census_of(elements: &[Element], delta: u32, label: impl Into<String>) -> ShellCensus {
    let max = elements.iter().map(|x| x.norm()).max().unwrap_or(0) as usize;
    let mut counts = vec![0u64; if elements.is_empty() { 0 } else { max + 1 }];
    for x in elements {
        counts[x.norm() as usize] += 1;
    }
    ShellCensus::from_radius_counts(counts, delta, label)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Estimator {
    SlopeRegression,
    ShellRatio,
}

#[derive(Clone, Debug, Serialize)]
pub struct GrowthEstimate {
    pub delta: f64,
    pub estimator: Estimator,
    /// Inclusive radius range used by the fit.
    pub window: (u32, u32),
    /// Root-mean-square residual of the fit.
    pub residual: f64,
    pub pure_exp_constant: Option<f64>,
}

/// Both estimators. `shell_ratio` is the primary one; it is exact on
/// geometric censuses and reports 0 on linear ones.
#[derive(Clone, Debug, Serialize)]
pub struct GrowthReport {
    pub delta: f64,
    pub slope_regression: GrowthEstimate,
    pub shell_ratio: GrowthEstimate,
}

fn nonzero_shells(census: &ShellCensus) -> Vec<(u32, f64)> {
    census
        .counts
        .iter()
        .enumerate()
        .filter(|(_, &c)| c > 0)
        .map(|(i, &c)| (i as u32, c as f64))
        .collect()
}

pub fn growth_rate(census: &ShellCensus) -> Result<GrowthReport> {
    let shells = nonzero_shells(census);
    if shells.len() < 4 {
        return Err(Error::diagnostic(format!(
            "growth rate needs at least 4 nonzero shells, {} has {}",
            census.label,
            shells.len()
        )));
    }
    let step = census.delta_step as f64;

    // log cumulative against radius over the top half of the window
    let last = census.counts.len() - 1;
    let first = last / 2;
    let pts: Vec<(f64, f64)> = (first..=last)
        .filter(|&i| census.cumulative[i] > 0)
        .map(|i| (i as f64 * step, (census.cumulative[i] as f64).ln()))
        .collect();
    let (slope, residual) = fit_line(&pts);
    let regression = GrowthEstimate {
        delta: slope.max(0.0),
        estimator: Estimator::SlopeRegression,
        window: ((first as f64 * step) as u32, (last as f64 * step) as u32),
        residual,
        pure_exp_constant: None,
    };

    // mean log-ratio of consecutive nonzero shells over the top half
    let half = &shells[shells.len() / 2 - 1..];
    let rates: Vec<f64> = half
        .windows(2)
        .map(|w| (w[1].1 / w[0].1).ln() / (step * (w[1].0 - w[0].0) as f64))
        .collect();
    let mean = rates.iter().sum::<f64>() / rates.len() as f64;
    let spread = (rates.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / rates.len() as f64).sqrt();
    let ratio = GrowthEstimate {
        delta: mean.max(0.0),
        estimator: Estimator::ShellRatio,
        window: (half[0].0 * census.delta_step, half[half.len() - 1].0 * census.delta_step),
        residual: spread,
        pure_exp_constant: None,
    };
    Ok(GrowthReport {
        delta: ratio.delta,
        slope_regression: regression,
        shell_ratio: ratio,
    })
}

/// Least-squares slope and RMS residual.
fn fit_line(pts: &[(f64, f64)]) -> (f64, f64) {
    let n = pts.len() as f64;
    if pts.len() < 2 {
        return (0.0, 0.0);
    }
    let mx = pts.iter().map(|p| p.0).sum::<f64>() / n;
    let my = pts.iter().map(|p| p.1).sum::<f64>() / n;
    let sxx: f64 = pts.iter().map(|p| (p.0 - mx).powi(2)).sum();
    let sxy: f64 = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    let slope = sxy / sxx;
    let rss: f64 = pts
        .iter()
        .map(|p| (p.1 - (my + slope * (p.0 - mx))).powi(2))
        .sum();
    (slope, (rss / n).sqrt())
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum SeriesVariant {
    Point,
    Shell,
    Ball,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Verdict {
    Converging,
    Diverging,
    Inconclusive,
}

#[derive(Clone, Debug, Serialize)]
pub struct PoincareSeries {
    pub s: f64,
    pub variant: SeriesVariant,
    pub terms: Vec<f64>,
    pub partial_sums: Vec<f64>,
    /// Fitted per-step ratio of the nonzero tail terms.
    pub tail_ratio: Option<f64>,
    pub verdict: Verdict,
}

/// Ratio threshold separating the two verdicts; a geometric tail with
/// ratio 1 (bounded increments) counts as diverging.
const RATIO_TOLERANCE: f64 = 1e-9;

/// Partial sums of `Θ(s)` (per radius), `Θ^{S,Δ}(s)` or `Θ^{B,Δ}(s)` over
/// the first `terms` terms.
pub fn poincare_partial(census: &ShellCensus, s: f64, variant: SeriesVariant, terms: usize) -> PoincareSeries {
    let step = census.delta_step as f64;
    let raw: Vec<(f64, f64)> = match variant {
        SeriesVariant::Point => census
            .radius_counts
            .iter()
            .enumerate()
            .map(|(r, &c)| (r as f64, c as f64))
            .collect(),
        SeriesVariant::Shell => census
            .counts
            .iter()
            .enumerate()
            .map(|(i, &c)| (i as f64 * step, c as f64))
            .collect(),
        SeriesVariant::Ball => census
            .cumulative
            .iter()
            .enumerate()
            .map(|(i, &c)| (i as f64 * step, c as f64))
            .collect(),
    };
    let terms_v: Vec<f64> = raw.iter().take(terms).map(|&(r, c)| c * (-s * r).exp()).collect();
    let mut partial_sums = Vec::with_capacity(terms_v.len());
    let mut acc = 0.0;
    for t in &terms_v {
        acc += t;
        partial_sums.push(acc);
    }
    let nz: Vec<(usize, f64)> = terms_v
        .iter()
        .enumerate()
        .filter(|(_, &t)| t > 0.0)
        .map(|(i, &t)| (i, t))
        .collect();
    let (tail_ratio, verdict) = if nz.is_empty() {
        (None, Verdict::Converging)
    } else if nz.len() < 3 {
        (None, Verdict::Inconclusive)
    } else {
        let tail = &nz[nz.len() / 2 - 1..];
        let logs: Vec<f64> = tail
            .windows(2)
            .map(|w| (w[1].1.ln() - w[0].1.ln()) / (w[1].0 - w[0].0) as f64)
            .collect();
        let rho = (logs.iter().sum::<f64>() / logs.len() as f64).exp();
        let v = if rho < 1.0 - RATIO_TOLERANCE {
            Verdict::Converging
        } else {
            Verdict::Diverging
        };
        (Some(rho), v)
    };
    PoincareSeries {
        s,
        variant,
        terms: terms_v,
        partial_sums,
        tail_ratio,
        verdict,
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct PureExpCheck {
    /// Smallest `C` with `e^{δr}/C ≤ count ≤ C e^{δr}` on the nonzero shells.
    pub constant: f64,
    /// Set when the per-shell constant increases strictly over the top half.
    pub failure: bool,
    /// `count / e^{δr}` per nonzero shell, keyed by shell radius.
    pub ratios: Vec<(u32, f64)>,
}

pub fn purely_exponential_check(census: &ShellCensus, delta: f64) -> PureExpCheck {
    let step = census.delta_step as f64;
    let ratios: Vec<(u32, f64)> = nonzero_shells(census)
        .into_iter()
        .map(|(i, c)| (i * census.delta_step, c / (delta * i as f64 * step).exp()))
        .collect();
    let implied: Vec<f64> = ratios.iter().map(|&(_, q)| q.max(1.0 / q)).collect();
    let constant = implied.iter().copied().fold(1.0, f64::max);
    let top = &implied[implied.len() / 2..];
    let failure = top.len() >= 3 && top.windows(2).all(|w| w[1] > w[0] * (1.0 + 1e-12));
    PureExpCheck {
        constant,
        failure,
        ratios,
    }
}

/// The cogrowth ratio `δ_N / δ_G` from censuses of `N` and `G` at the same
/// radius.
#[derive(Clone, Debug, Serialize)]
pub struct CogrowthEstimate {
    pub ratio: f64,
    pub delta_n: GrowthReport,
    pub delta_g: GrowthReport,
    pub census_n: ShellCensus,
    pub census_g: ShellCensus,
}

pub fn cogrowth_ratio(group: &Group, oracle: &NormalSubgroupOracle, r_max: u32, delta: u32) -> Result<CogrowthEstimate> {
    let census_n = shell_census(group, r_max, delta, Some(oracle))?;
    let census_g = shell_census(group, r_max, delta, None)?;
    let delta_n = growth_rate(&census_n)?;
    let delta_g = growth_rate(&census_g)?;
    if delta_g.delta <= 0.0 {
        return Err(Error::diagnostic("the ambient group has zero measured growth"));
    }
    Ok(CogrowthEstimate {
        ratio: delta_n.delta / delta_g.delta,
        delta_n,
        delta_g,
        census_n,
        census_g,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::group::GroupSpec;

    #[test]
    fn free_census() {
        let g = Group::free(2);
        let c = shell_census(&g, 3, 1, None).unwrap();
        assert_eq!(c.counts, [1, 4, 12, 36]);
        assert_eq!(c.cumulative, [1, 5, 17, 53]);
        let wide = shell_census(&g, 5, 2, None).unwrap();
        assert_eq!(wide.counts, [5, 48, 432]);
        assert_eq!(wide.cumulative, [1, 17, 161]);
    }

    #[test]
    fn parity_kernel_census() {
        let g = Group::free(2);
        let o = NormalSubgroupOracle::parse("quotient=finite_permutation\nimages=a:(1 2),b:(1 2)\n", &g).unwrap();
        assert_eq!(shell_census(&g, 2, 1, Some(&o)).unwrap().counts, [1, 0, 12]);
    }

    #[test]
    fn empty_filter() {
        let c = ShellCensus::from_radius_counts(vec![0; 6], 1, "empty");
        assert!(c.is_empty());
        let s = poincare_partial(&c, 1.0, SeriesVariant::Point, 6);
        assert_eq!(s.verdict, Verdict::Converging);
        assert!(s.partial_sums.iter().all(|&x| x == 0.0));
        assert!(growth_rate(&c).is_err());
    }

    #[test]
    fn growth_of_free_groups() {
        let g = Group::free(2);
        let rep = growth_rate(&shell_census(&g, 10, 1, None).unwrap()).unwrap();
        assert!((rep.delta - 3f64.ln()).abs() < 1e-9);
        let z = Group::free(1);
        let rep = growth_rate(&shell_census(&z, 10, 1, None).unwrap()).unwrap();
        assert_eq!(rep.delta, 0.0);
    }

    #[test]
    fn product_census_matches_enumeration() {
        let h = Group::new(GroupSpec::direct_product(vec![2, 2])).unwrap();
        let c = shell_census(&h, 3, 1, None).unwrap();
        assert_eq!(c.cumulative, [1, 25, 289, 2809]);
        let o = NormalSubgroupOracle::parse(
            "quotient=free_product\norders=0,0\nimages=a:e,b:e;a:0,b:1\n",
            &h,
        )
        .unwrap();
        let k = shell_census(&h, 3, 1, Some(&o)).unwrap();
        let mut brute = vec![0u64; 4];
        for x in h.enumerate_ball(3).unwrap() {
            if o.contains(&h, &x).unwrap() {
                brute[x.norm() as usize] += 1;
            }
        }
        assert_eq!(k.radius_counts, brute);
        assert_eq!(brute, [1, 4, 12, 36]);
    }

    #[test]
    fn series_verdicts() {
        let g = Group::free(2);
        let c = shell_census(&g, 12, 1, None).unwrap();
        let at = poincare_partial(&c, 3f64.ln(), SeriesVariant::Shell, 13);
        assert!((at.terms[5] - 4.0 / 3.0).abs() < 1e-12);
        assert_eq!(at.verdict, Verdict::Diverging);
        assert_eq!(poincare_partial(&c, 1.2, SeriesVariant::Shell, 13).verdict, Verdict::Converging);
    }

    #[test]
    fn pure_exp() {
        let g = Group::free(2);
        let c = shell_census(&g, 10, 1, None).unwrap();
        let p = purely_exponential_check(&c, 3f64.ln());
        assert!((p.constant - 4.0 / 3.0).abs() < 1e-9);
        assert!(!p.failure);
        let z = shell_census(&Group::free(1), 10, 1, None).unwrap();
        let p = purely_exponential_check(&z, 0.0);
        assert_eq!(p.constant, 2.0);
        assert!(!p.failure);
    }
}
