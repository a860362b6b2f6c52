//! Lower bounds for the cogrowth exponent from the free semigroup
//! generated by `{x·c²ᵖ : x ∈ G₄}`.
//!
//! That semigroup injects into `N`, so its Poincaré series diverges at `s`
//! whenever `Σ_r w_r e^{−s r} ≥ e^{s |c²ᵖ|}`, where `w_r` counts generators
//! `x` of norm `r`. The largest such `s` is a lower bound for `δ_N`.

use serde::Serialize;

use crate::growth::ShellCensus;

pub const GRID_STEP: f64 = 0.005;
pub const GRID_MAX: f64 = 0.2;
const BISECTIONS: u32 = 60;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum CertificateStatus {
    /// `δ_N ≥ δ + ε` with `ε > 0`.
    Certified,
    /// The condition fails already at `ε = 0`.
    Inconclusive,
    /// The condition still holds at the end of the grid.
    Capped,
}

#[derive(Clone, Debug, Serialize)]
pub struct Certificate {
    pub delta: f64,
    pub c2p_norm: u64,
    pub epsilon: f64,
    pub status: CertificateStatus,
    /// `ln Σ w_r e^{−δr} − δ|c²ᵖ|`; positive exactly when some `ε > 0` works.
    pub margin_at_zero: f64,
}

/// `ln Σ w_r e^{−sr} − s·c`, decreasing in `s`.
fn margin(weights: &[f64], s: f64, c: f64) -> f64 {
    let logs: Vec<f64> = weights
        .iter()
        .enumerate()
        .filter(|(_, &w)| w > 0.0)
        .map(|(r, &w)| w.ln() - s * r as f64)
        .collect();
    let Some(top) = logs.iter().copied().reduce(f64::max) else {
        return f64::NEG_INFINITY;
    };
    top + logs.iter().map(|l| (l - top).exp()).sum::<f64>().ln() - s * c
}

/// Largest `ε ∈ [0, GRID_MAX]` with `Σ w_r e^{−(δ+ε)r} > e^{(δ+ε)c}`, found
/// on a grid of step [`GRID_STEP`] and refined by bisection.
pub fn lower_bound_from_weights(weights: &[f64], delta: f64, c2p_norm: u64) -> Certificate {
    let c = c2p_norm as f64;
    let f = |e: f64| margin(weights, delta + e, c);
    let m0 = f(0.0);
    let done = |epsilon, status| Certificate {
        delta,
        c2p_norm,
        epsilon,
        status,
        margin_at_zero: m0,
    };
    if m0 <= 0.0 {
        return done(0.0, CertificateStatus::Inconclusive);
    }
    let steps = (GRID_MAX / GRID_STEP).round() as u32;
    let mut lo = 0.0;
    let Some(hi) = (1..=steps).map(|i| i as f64 * GRID_STEP).find(|&e| {
        let holds = f(e) > 0.0;
        if holds {
            lo = e;
        }
        !holds
    }) else {
        return done(GRID_MAX, CertificateStatus::Capped);
    };
    let mut hi = hi;
    for _ in 0..BISECTIONS {
        let mid = 0.5 * (lo + hi);
        if f(mid) > 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    done(lo, CertificateStatus::Certified)
}

/// The bound for `δ = δ_G / 2` with weights taken from a unit-shell census.
pub fn cogrowth_lower_bound(census: &ShellCensus, delta_g: f64, c2p_norm: u64) -> Certificate {
    let weights: Vec<f64> = census.radius_counts.iter().map(|&n| n as f64).collect();
    lower_bound_from_weights(&weights, delta_g / 2.0, c2p_norm)
}
