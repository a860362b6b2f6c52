//! `G₃,p`: a maximal `(6K+1)`-separated subset of `G₂,p`, built greedily in
//! shortlex order, with the nearest-point map `φ₂,p`, the eq. (6) bound and
//! the same-axis-same-element check.
//!
//! Two points at distance at most `R = 6K` share a prefix of length at
//! least `min|x| − 3K`, so candidates are bucketed by that prefix and all
//! comparisons are exact within a bucket.

use std::cmp::Ordering;
use std::collections::HashMap;

use rayon::prelude::*;
use serde::Serialize;

use super::conj::{Conj, ConjShape, Hash2};
use super::constants::end_diam;
use crate::geometry::project_free;

#[derive(Clone, Debug, Serialize)]
pub struct G3Report {
    pub size: u64,
    pub separation: u64,
    pub prefix_len: u64,
    pub buckets: u64,
    pub largest_bucket: u64,
    /// Pairs of accepted points compared for separation.
    pub pairs_checked: u64,
    pub separation_failures: Vec<String>,
    pub max_displacement: u64,
    pub max_fiber: u64,
    /// Largest `d^π_{xℰ}(o, x.o)`; eq. (6) requires it below `3K`.
    pub eq6_max: u64,
    pub eq6_failures: Vec<String>,
    pub same_axis_failures: Vec<String>,
}

impl G3Report {
    pub fn passed(&self) -> bool {
        self.separation_failures.is_empty() && self.eq6_failures.is_empty() && self.same_axis_failures.is_empty()
    }
}

pub struct G3Stage {
    /// Indices into `G₂` of the accepted elements, ascending.
    pub accepted: Vec<u32>,
    /// For each element of `G₂`, the index into `G₂` of its image under `φ₂,p`.
    pub phi2: Vec<u32>,
    pub report: G3Report,
}

const WITNESS_LIMIT: usize = 16;

fn cmp_in<'a>(g2: &'a [Conj], shape: &'a ConjShape) -> impl Fn(&u32, &u32) -> Ordering + 'a {
    move |a, b| g2[*a as usize].shortlex_cmp(&g2[*b as usize], shape)
}

pub fn build_g3(g2: &[Conj], shape: &ConjShape, k: u64) -> G3Stage {
    let radius = 6 * k as usize;
    let min_norm = g2.iter().map(|x| x.len(shape)).min().unwrap_or(0);
    let prefix_len = min_norm.saturating_sub(3 * k as usize);

    let keys: Vec<Hash2> = g2
        .par_iter()
        .map(|x| Hash2::of((0..prefix_len).map(|i| x.letter(shape, i))))
        .collect();
    let mut map: HashMap<Hash2, Vec<u32>> = HashMap::new();
    for (i, key) in keys.iter().enumerate() {
        map.entry(*key).or_default().push(i as u32);
    }
    let mut buckets: Vec<Vec<u32>> = map.into_values().collect();
    buckets.sort_by_key(|b| b[0]);

    // (accepted, (element, image, distance) for rejected, pairs, failures)
    type Outcome = (Vec<u32>, Vec<(u32, u32, usize)>, u64, Vec<String>);
    let outcomes: Vec<Outcome> = buckets
        .par_iter_mut()
        .map(|bucket| {
            bucket.sort_by(cmp_in(g2, shape));
            let mut acc: Vec<u32> = Vec::new();
            let mut rejected = Vec::new();
            for &i in bucket.iter() {
                let x = &g2[i as usize];
                let nearest = acc
                    .iter()
                    .map(|&j| (x.distance(&g2[j as usize], shape), j))
                    .min_by(|a, b| a.0.cmp(&b.0).then_with(|| cmp_in(g2, shape)(&a.1, &b.1)));
                match nearest {
                    Some((d, j)) if d <= radius => rejected.push((i, j, d)),
                    _ => acc.push(i),
                }
            }
            let mut pairs = 0;
            let mut failures = Vec::new();
            for (a, &i) in acc.iter().enumerate() {
                for &j in &acc[a + 1..] {
                    pairs += 1;
                    let d = g2[i as usize].distance(&g2[j as usize], shape);
                    if d <= radius && failures.len() < WITNESS_LIMIT {
                        failures.push(format!("accepted #{} and #{} at distance {}", i, j, d));
                    }
                }
            }
            (acc, rejected, pairs, failures)
        })
        .collect();

    let mut phi2: Vec<u32> = (0..g2.len() as u32).collect();
    let mut accepted = Vec::new();
    let mut fiber: HashMap<u32, u64> = HashMap::new();
    let mut pairs_checked = 0;
    let mut separation_failures = Vec::new();
    let mut max_displacement = 0;
    for (acc, rejected, pairs, failures) in outcomes {
        accepted.extend_from_slice(&acc);
        for (i, j, d) in rejected {
            phi2[i as usize] = j;
            *fiber.entry(j).or_default() += 1;
            max_displacement = max_displacement.max(d as u64);
        }
        pairs_checked += pairs;
        separation_failures.extend(failures);
    }
    separation_failures.truncate(WITNESS_LIMIT);
    accepted.sort_unstable();

    let root = &shape.root;
    let axis_data: Vec<(u64, Hash2, usize)> = accepted
        .par_iter()
        .map(|&i| {
            let x = g2[i as usize].to_word(shape);
            let inv = x.inverse();
            let p = project_free(root, &inv);
            let rep = (p.lo..=p.hi)
                .map(|j| x.mul(&root.pow(j)))
                .min_by(|a, b| a.shortlex_cmp(b))
                .expect("nonempty projection");
            (end_diam(root, &inv), Hash2::of(rep.letters().iter().copied()), rep.len())
        })
        .collect();
    let eq6_max = axis_data.iter().map(|a| a.0).max().unwrap_or(0);
    let eq6_failures: Vec<String> = accepted
        .iter()
        .zip(&axis_data)
        .filter(|(_, a)| a.0 >= 3 * k)
        .take(WITNESS_LIMIT)
        .map(|(i, a)| format!("#{}: d^π = {} ≥ 3K", i, a.0))
        .collect();
    let mut axes: HashMap<(Hash2, usize), u32> = HashMap::with_capacity(accepted.len());
    let mut same_axis_failures = Vec::new();
    for (&i, a) in accepted.iter().zip(&axis_data) {
        if let Some(&j) = axes.get(&(a.1, a.2)) {
            let (x, y) = (g2[i as usize].to_word(shape), g2[j as usize].to_word(shape));
            let q = x.inverse().mul(&y);
            if project_free(root, &q).dist == 0 && same_axis_failures.len() < WITNESS_LIMIT {
                same_axis_failures.push(format!("#{} and #{} span the same axis", j, i));
            }
        } else {
            axes.insert((a.1, a.2), i);
        }
    }

    G3Stage {
        report: G3Report {
            size: accepted.len() as u64,
            separation: radius as u64 + 1,
            prefix_len: prefix_len as u64,
            buckets: buckets.len() as u64,
            largest_bucket: buckets.iter().map(|b| b.len() as u64).max().unwrap_or(0),
            pairs_checked,
            separation_failures,
            max_displacement,
            max_fiber: fiber.values().map(|v| v + 1).max().unwrap_or(1),
            eq6_max,
            eq6_failures,
            same_axis_failures,
        },
        accepted,
        phi2,
    }
}
