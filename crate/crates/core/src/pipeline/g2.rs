//! `G₂,p = {g⁻¹cᵖg : g ∈ G₁}` with the norm sandwich, the fiber bound of
//! `φ₁,p` and the order `ℰ ⊏ g⁻¹ℰ ⊏ g⁻¹cᵖgℰ`.

use std::collections::HashMap;

use rayon::prelude::*;
use serde::Serialize;

use super::conj::{Conj, ConjShape};
use super::constants::on_axis;
use crate::axioms::{order_interval, AxisFamily};
use crate::error::Result;
use crate::geometry::{project_free, Axis};
use crate::group::{Element, Group};
use crate::word::Word;

#[derive(Clone, Debug, Serialize)]
pub struct OrderCheck {
    pub radius: u32,
    pub checked: u64,
    /// Families along the whole geodesic from `o` to `g⁻¹cᵖg.o`.
    pub full_families: u64,
    pub failures: Vec<String>,
}

#[derive(Clone, Debug, Serialize)]
pub struct G2Report {
    pub size: u64,
    pub norm_range: (u64, u64),
    pub sandwich_checked: u64,
    pub sandwich_failures: Vec<String>,
    pub max_fiber: u64,
    /// Largest `|gh⁻¹|` within a fiber of `φ₁,p`; at most `4K`.
    pub max_fiber_spread: u64,
    pub fiber_failures: Vec<String>,
    pub order: OrderCheck,
}

impl G2Report {
    pub fn passed(&self) -> bool {
        self.sandwich_failures.is_empty() && self.fiber_failures.is_empty() && self.order.failures.is_empty()
    }
}

pub struct G2Stage {
    pub elements: Vec<Conj>,
    /// Index into `G₁` of the shortlex-least preimage.
    pub provenance: Vec<u32>,
    pub report: G2Report,
}

pub struct G2Params<'a> {
    pub shape: &'a ConjShape,
    pub c_prime: u64,
    pub k: u64,
    pub theta: u32,
    pub order_radius: u32,
    pub full_families: usize,
}

const WITNESS_LIMIT: usize = 16;

pub fn build_g2(group: &Group, g1: &[Word], params: &G2Params<'_>) -> Result<G2Stage> {
    let shape = params.shape;
    let root = &shape.root;
    let tau = root.len() as u64;
    let cp = shape.middle_len() as i64;
    let conjs: Vec<Conj> = g1.par_iter().map(|g| Conj::of(shape, g)).collect();

    let slack = 8 * (params.c_prime + params.k) as i64;
    let mut sandwich_failures = Vec::new();
    for (g, x) in g1.iter().zip(&conjs) {
        let n = x.len(shape) as i64;
        let top = 2 * g.len() as i64 + cp;
        if (n > top || n < top - slack) && sandwich_failures.len() < WITNESS_LIMIT {
            sandwich_failures.push(format!("g = {}: |φ1(g)| = {} outside [{}, {}]", g, n, top - slack, top));
        }
    }

    let mut index: HashMap<&Conj, usize> = HashMap::with_capacity(conjs.len());
    let mut elements = Vec::new();
    let mut provenance = Vec::new();
    // per fiber: size, smallest and largest k with g = c₀^k·preimage
    let mut fibers: Vec<(u64, i64, i64)> = Vec::new();
    let mut fiber_failures = Vec::new();
    for (i, x) in conjs.iter().enumerate() {
        match index.get(x) {
            None => {
                index.insert(x, elements.len());
                elements.push(x.clone());
                provenance.push(i as u32);
                fibers.push((1, 0, 0));
            }
            Some(&j) => {
                let h = &g1[provenance[j] as usize];
                let q = g1[i].mul(&h.inverse());
                let f = &mut fibers[j];
                f.0 += 1;
                if on_axis(root, &q) {
                    let k = project_free(root, &q).lo;
                    f.1 = f.1.min(k);
                    f.2 = f.2.max(k);
                } else if fiber_failures.len() < WITNESS_LIMIT {
                    fiber_failures.push(format!("{} and {} share an image but gh^-1 = {} is off the axis", g1[i], h, q));
                }
            }
        }
    }
    let max_fiber_spread = fibers.iter().map(|f| (f.2 - f.1) as u64 * tau).max().unwrap_or(0);
    if max_fiber_spread > 4 * params.k {
        fiber_failures.push(format!("a fiber of φ1 spreads {} > 4K = {}", max_fiber_spread, 4 * params.k));
    }

    let order = check_order(group, g1, params)?;
    let norms = elements.iter().map(|x| x.len(shape) as u64);
    let norm_range = (norms.clone().min().unwrap_or(0), norms.max().unwrap_or(0));
    Ok(G2Stage {
        report: G2Report {
            size: elements.len() as u64,
            norm_range,
            sandwich_checked: g1.len() as u64,
            sandwich_failures,
            max_fiber: fibers.iter().map(|f| f.0).max().unwrap_or(0),
            max_fiber_spread,
            fiber_failures,
            order,
        },
        elements,
        provenance,
    })
}

/// `g⁻¹ℰ` must lie strictly inside `𝐘[ℰ, g⁻¹cᵖgℰ]` for every `g ∈ G₁` of
/// norm at most `order_radius`: in the three-axis family for all of them and
/// in the family of translates along the geodesic for the first few.
pub fn check_order(group: &Group, g1: &[Word], params: &G2Params<'_>) -> Result<OrderCheck> {
    let shape = params.shape;
    let base = Axis::new(group, &Element::Free(shape.root.clone()))?;
    let cp = shape.root.pow(shape.periods as i64);
    let sample: Vec<&Word> = g1.iter().filter(|g| g.len() <= params.order_radius as usize).collect();
    let full = params.full_families;
    let results: Vec<Result<Option<String>>> = sample
        .par_iter()
        .enumerate()
        .map(|(i, g)| {
            let gi = Element::Free(g.inverse());
            let x = Element::Free(cp.conjugate_by(g));
            let mid = base.translate(group, &gi)?;
            let end = base.translate(group, &x)?;
            let mut families = vec![AxisFamily::new(group, vec![base.clone(), mid.clone(), end.clone()])?];
            if i < full {
                families.push(AxisFamily::along_geodesic(
                    group,
                    &base,
                    &group.identity(),
                    &x,
                    std::slice::from_ref(&mid),
                )?);
            }
            for fam in &families {
                let iv = order_interval(fam, &base, &end, params.theta)?;
                let m = fam.index_of(&mid).expect("member");
                let pos = iv.position(m);
                if !iv.passed() || pos.is_none_or(|p| p == 0 || p + 1 == iv.indices.len()) {
                    return Ok(Some(format!(
                        "g = {}: chain {:?}, {} violations",
                        g,
                        iv.chain,
                        iv.violations.len()
                    )));
                }
            }
            Ok(None)
        })
        .collect();
    let mut failures = Vec::new();
    for r in results {
        if let Some(f) = r? {
            if failures.len() < WITNESS_LIMIT {
                failures.push(f);
            }
        }
    }
    Ok(OrderCheck {
        radius: params.order_radius,
        checked: sample.len() as u64,
        full_families: sample.len().min(full) as u64,
        failures,
    })
}
