//! `G₁ = {g : d^π_ℰ(o, g.o) ≤ 2K, d^π_{gℰ}(o, g.o) ≤ 2K, gℰ ≠ ℰ}` and
//! the at-most-4-to-1 map `φ₀` onto it.

use std::collections::HashMap;

use rayon::prelude::*;
use serde::Serialize;

use super::constants::{end_diam, on_axis};
use crate::word::{for_each_reduced_word, Word};

#[derive(Clone, Copy, Debug)]
pub struct G1Rule<'a> {
    pub root: &'a Word,
    pub two_k: u64,
}

impl G1Rule<'_> {
    pub fn contains(&self, g: &Word) -> bool {
        !on_axis(self.root, g)
            && end_diam(self.root, g) <= self.two_k
            && end_diam(self.root, &g.inverse()) <= self.two_k
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct Phi0Report {
    pub domain_radius: u32,
    pub domain_size: u64,
    pub fixed_points: u64,
    pub image_size: u64,
    pub max_fiber: u32,
    /// Largest `||φ₀(g)| − |g||`.
    pub max_displacement: u32,
    /// Elements where none of `g, f₀g, gf₀, f₀gf₀` lies in `G₁`.
    pub lemma_failures: Vec<String>,
    pub displacement_failures: Vec<String>,
}

impl Phi0Report {
    pub fn passed(&self) -> bool {
        self.lemma_failures.is_empty() && self.displacement_failures.is_empty() && self.max_fiber <= 4
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct G1Report {
    pub radius: u32,
    pub size: u64,
    pub ball_size: u64,
    pub inverse_closed: bool,
    pub inverse_failures: Vec<String>,
    pub phi0: Phi0Report,
}

pub struct G1Stage {
    /// `G₁ ∩ B_radius` in shortlex order.
    pub elements: Vec<Word>,
    pub report: G1Report,
}

fn ball(rank: usize, radius: u32) -> Vec<Word> {
    let mut out = Vec::new();
    for len in 0..=radius as usize {
        for_each_reduced_word(rank, len, |w| out.push(Word::reduce(w.iter().copied())));
    }
    out
}

const WITNESS_LIMIT: usize = 16;

fn witnesses<I: IntoIterator<Item = String>>(it: I) -> Vec<String> {
    it.into_iter().take(WITNESS_LIMIT).collect()
}

pub fn build_g1(rank: usize, rule: G1Rule<'_>, f0: &Word, radius: u32) -> G1Stage {
    let all = ball(rank, radius);
    let ball_size = all.len() as u64;
    let elements: Vec<Word> = all.into_par_iter().filter(|g| rule.contains(g)).collect();
    let inverse_failures = witnesses(
        elements
            .par_iter()
            .filter(|g| !rule.contains(&g.inverse()))
            .map(|g| g.to_string())
            .collect::<Vec<_>>(),
    );

    let domain_radius = radius.saturating_sub(2 * f0.len() as u32);
    let domain = ball(rank, domain_radius);
    let images: Vec<Option<Word>> = domain
        .par_iter()
        .map(|g| {
            [g.clone(), f0.mul(g), g.mul(f0), f0.mul(g).mul(f0)]
                .into_iter()
                .filter(|x| rule.contains(x))
                .min_by(|a, b| a.shortlex_cmp(b))
        })
        .collect();
    let mut fibers: HashMap<&Word, u32> = HashMap::new();
    let mut lemma_failures = Vec::new();
    let mut displacement_failures = Vec::new();
    let mut fixed_points = 0;
    let mut max_displacement = 0;
    for (g, img) in domain.iter().zip(&images) {
        match img {
            None => lemma_failures.push(g.to_string()),
            Some(x) => {
                *fibers.entry(x).or_default() += 1;
                if x == g {
                    fixed_points += 1;
                }
                let disp = x.len().abs_diff(g.len()) as u32;
                max_displacement = max_displacement.max(disp);
                if disp as usize > 2 * f0.len() {
                    displacement_failures.push(format!("{} -> {}", g, x));
                }
            }
        }
    }
    let phi0 = Phi0Report {
        domain_radius,
        domain_size: domain.len() as u64,
        fixed_points,
        image_size: fibers.len() as u64,
        max_fiber: fibers.values().copied().max().unwrap_or(0),
        max_displacement,
        lemma_failures: witnesses(lemma_failures),
        displacement_failures: witnesses(displacement_failures),
    };
    G1Stage {
        report: G1Report {
            radius,
            size: elements.len() as u64,
            ball_size,
            inverse_closed: inverse_failures.is_empty(),
            inverse_failures,
            phi0,
        },
        elements,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn w(s: &str) -> Word {
        Word::parse(s, 2).unwrap()
    }

    #[test]
    fn membership_examples() {
        let root = w("ab");
        let rule = G1Rule { root: &root, two_k: 6 };
        assert!(!rule.contains(&w("1")));
        assert!(!rule.contains(&w("abab")));
        assert!(rule.contains(&w("b")));
        assert!(rule.contains(&w("a")));
        // d^π_ℰ(o, (ab)^4 b) = 8 > 2K
        assert!(!rule.contains(&w("ababababb")));
    }

    #[test]
    fn g1_by_brute_force() {
        let root = w("ab");
        let rule = G1Rule { root: &root, two_k: 6 };
        let st = build_g1(2, rule, &w("a"), 6);
        // oracle: projections onto the axis by scanning its points
        let proj = |g: &Word| {
            let ds: Vec<(i64, usize)> = (-10..=10).map(|k| (k, root.pow(k).inverse().mul(g).len())).collect();
            let m = ds.iter().map(|d| d.1).min().unwrap();
            let ks: Vec<i64> = ds.iter().filter(|d| d.1 == m).map(|d| d.0).collect();
            (ks[0].min(0), ks[ks.len() - 1].max(0), m)
        };
        let mut expect = Vec::new();
        for g in ball(2, 6) {
            let (lo, hi, m) = proj(&g);
            let (lo2, hi2, _) = proj(&g.inverse());
            if m > 0 && (hi - lo) * 2 <= 6 && (hi2 - lo2) * 2 <= 6 {
                expect.push(g);
            }
        }
        assert_eq!(st.elements, expect);
        assert!(st.report.inverse_closed);
        assert!(st.report.phi0.passed(), "{:?}", st.report.phi0);
        assert!(st.elements.contains(&w("b")));
    }

    #[test]
    fn phi0_of_identity_is_f0() {
        let root = w("ab");
        let rule = G1Rule { root: &root, two_k: 28 };
        let st = build_g1(2, rule, &w("a"), 2);
        assert_eq!(st.report.phi0.domain_radius, 0);
        assert_eq!(st.report.phi0.image_size, 1);
        assert!(rule.contains(&w("a")));
    }
}
