//! The constants ledger and the checklist that must pass before any stage
//! runs, plus the choice of `f₀`.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::geometry::{project_free, Provenance};
use crate::word::{for_each_reduced_word, Word};

/// A length together with where it came from.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub struct Constant {
    pub value: u64,
    pub provenance: Provenance,
}

impl Constant {
    pub fn measured(value: u64) -> Constant {
        Constant {
            value,
            provenance: Provenance::Measured,
        }
    }

    pub fn derived(value: u64) -> Constant {
        Constant {
            value,
            provenance: Provenance::Derived,
        }
    }

    pub fn configured(value: u64) -> Constant {
        Constant {
            value,
            provenance: Provenance::Configured,
        }
    }
}

/// `auto` or an explicit value for a configurable constant.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Setting {
    Auto,
    Fixed(u64),
}

impl Setting {
    pub fn parse(text: &str) -> Result<Setting> {
        match text.trim() {
            "auto" => Ok(Setting::Auto),
            t => t
                .parse()
                .map(Setting::Fixed)
                .map_err(|_| Error::parse(format!("expected \"auto\" or a nonnegative integer, got {:?}", t))),
        }
    }
}

/// Inputs measured before the ledger is filled in.
#[derive(Clone, Copy, Debug)]
pub struct MeasuredInputs {
    pub c: u64,
    pub c_prime: u64,
    pub theta: u64,
    pub theta_prime: u64,
    /// `|c|`, with `c` cyclically reduced.
    pub c_norm: u64,
    /// `|c₀|`, the step between consecutive axis points.
    pub tau: u64,
    pub f0_norm: u64,
}

#[derive(Clone, Debug, Serialize)]
pub struct PipelineConstants {
    pub c: Constant,
    pub c_prime: Constant,
    pub theta: Constant,
    pub theta_prime: Constant,
    pub k: Constant,
    /// Shell width of the purely exponential growth of `G`.
    pub delta: Constant,
    pub p: Constant,
    pub d: Constant,
    pub f0_norm: Constant,
    pub e: Constant,
    pub delta_prime: Constant,
    pub tau: Constant,
    pub c_norm: Constant,
    /// `|c^p|`.
    pub c_power_norm: Constant,
}

#[derive(Clone, Debug, Serialize)]
pub struct ChecklistItem {
    pub name: String,
    pub lhs: u64,
    pub rhs: u64,
    pub holds: bool,
}

impl PipelineConstants {
    /// Fills in `K`, `D` and `p` (when `auto`), then `E` and `Δ′`.
    pub fn derive(m: MeasuredInputs, k: Setting, d: Setting, p: Setting) -> PipelineConstants {
        let k = match k {
            Setting::Fixed(v) => Constant::configured(v),
            Setting::Auto => Constant::derived((m.c + 1).max((2 * m.theta + m.theta_prime) / 2 + 1)),
        };
        let kv = k.value;
        let d = match d {
            Setting::Fixed(v) => Constant::configured(v),
            Setting::Auto => Constant::derived(7 * kv + 2 * m.c_prime),
        };
        let p = match p {
            Setting::Fixed(v) => Constant::configured(v),
            Setting::Auto => {
                let need = power_thresholds(kv, m.c_prime, d.value)
                    .iter()
                    .map(|t| t.1)
                    .max()
                    .unwrap_or(0);
                Constant::derived(need / m.c_norm.max(1) + 1)
            }
        };
        let delta = Constant::derived(1);
        let e = 4 * m.f0_norm + 4 * m.c_prime + 10 * kv + 1;
        PipelineConstants {
            c: Constant::measured(m.c),
            c_prime: Constant::measured(m.c_prime),
            theta: Constant::measured(m.theta),
            theta_prime: Constant::derived(m.theta_prime),
            k,
            delta,
            p,
            d,
            f0_norm: Constant::derived(m.f0_norm),
            e: Constant::derived(e),
            delta_prime: Constant::derived(2 * (delta.value + e)),
            tau: Constant::measured(m.tau),
            c_norm: Constant::measured(m.c_norm),
            c_power_norm: Constant::derived(p.value * m.c_norm),
        }
    }

    /// Every inequality the later stages rely on.
    pub fn checklist(&self) -> Vec<ChecklistItem> {
        let (c, cp, theta, tp) = (self.c.value, self.c_prime.value, self.theta.value, self.theta_prime.value);
        let (k, d, n) = (self.k.value, self.d.value, self.c_power_norm.value);
        let mut out = vec![
            item("K > C", k, c, k > c),
            item("2K > 2θ + θ′", 2 * k, 2 * theta + tp, 2 * k > 2 * theta + tp),
            item("D ≥ 7K + 2C′", d, 7 * k + 2 * cp, d >= 7 * k + 2 * cp),
        ];
        for (name, rhs) in power_thresholds(k, cp, d) {
            out.push(item(&format!("|c^p| > {}", name), n, rhs, n > rhs));
        }
        out
    }

    pub fn checklist_passes(&self) -> bool {
        self.checklist().iter().all(|i| i.holds)
    }
}

fn item(name: &str, lhs: u64, rhs: u64, holds: bool) -> ChecklistItem {
    ChecklistItem {
        name: name.into(),
        lhs,
        rhs,
        holds,
    }
}

fn power_thresholds(k: u64, c_prime: u64, d: u64) -> [(&'static str, u64); 4] {
    [
        ("10K", 10 * k),
        ("8C′ + 8K", 8 * c_prime + 8 * k),
        ("6K + 1", 6 * k + 1),
        ("2D + 3K + 2C′", 2 * d + 3 * k + 2 * c_prime),
    ]
}

/// `diam({0} ∪ π_ℰ(g))` in letters, i.e. `d^π_ℰ(o, g.o)`.
pub(crate) fn end_diam(root: &Word, g: &Word) -> u64 {
    let p = project_free(root, g);
    ((p.hi.max(0) - p.lo.min(0)) as u64) * root.len() as u64
}

/// Whether `g ∈ ⟨root⟩`.
pub(crate) fn on_axis(root: &Word, g: &Word) -> bool {
    let p = project_free(root, g);
    p.dist == 0
}

#[derive(Clone, Debug, Serialize)]
pub struct F0Choice {
    pub f0: String,
    #[serde(skip)]
    pub word: Word,
    /// `diam π_{f₀ℰ}(o)` and `diam π_ℰ(f₀.o)`, both bounded by `C` in eq. (3).
    pub eq3: (u64, u64),
    pub via_fallback: bool,
}

fn f0_conditions(root: &Word, g: &Word) -> bool {
    if g.is_identity() || on_axis(root, g) {
        return false;
    }
    let a = project_free(root, g);
    let b = project_free(root, &g.inverse());
    a.lo <= 0 && 0 <= a.hi && b.lo <= 0 && 0 <= b.hi
}

fn f0_choice(root: &Word, w: Word, via_fallback: bool) -> F0Choice {
    let diam = |p: crate::geometry::Projection| ((p.hi - p.lo) as u64) * root.len() as u64;
    F0Choice {
        f0: w.to_string(),
        eq3: (diam(project_free(root, &w.inverse())), diam(project_free(root, &w))),
        word: w,
        via_fallback,
    }
}

/// The shortlex-least `f₀ ∈ B_radius` with `f₀ℰ ∩ ℰ = ∅`, `o ∈ π_ℰ(f₀.o)`
/// and `f₀.o ∈ π_{f₀ℰ}(o)`. If the ball has none, `f₀ = f₁⁻¹f₂` for a pair
/// realizing the distance from `ℰ` to `gℰ`, `g` the first element off `ℰ`.
pub fn find_f0(rank: usize, root: &Word, radius: u32) -> Result<F0Choice> {
    if root.is_identity() {
        return Err(Error::usage("the identity is not of infinite order"));
    }
    for len in 1..=radius as usize {
        let mut found = None;
        for_each_reduced_word(rank, len, |w| {
            if found.is_none() {
                let w = Word::reduce(w.iter().copied());
                if f0_conditions(root, &w) {
                    found = Some(w);
                }
            }
        });
        if let Some(w) = found {
            return Ok(f0_choice(root, w, false));
        }
    }
    let g = crate::word::Letter::alphabet(rank)
        .map(Word::letter)
        .find(|w| !on_axis(root, w))
        .ok_or_else(|| Error::resource("every generator lies on the axis"))?;
    let tau = root.len() as i64;
    let reach = 2 * (g.len() as i64) / tau + 2;
    let (_, f2) = (-reach..=reach)
        .map(|j| {
            let x = g.mul(&root.pow(j));
            (project_free(root, &x).dist, x)
        })
        .min_by(|a, b| a.0.cmp(&b.0).then_with(|| a.1.cmp(&b.1)))
        .expect("nonempty range");
    let f1 = root.pow(project_free(root, &f2).lo);
    let w = f1.inverse().mul(&f2);
    if f0_conditions(root, &w) {
        Ok(f0_choice(root, w, true))
    } else {
        Err(Error::resource(format!(
            "no f0 found in the ball of radius {} and the fallback {} fails",
            radius, w
        )))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn w(s: &str) -> Word {
        Word::parse(s, 2).unwrap()
    }

    fn inputs(c: u64, c_prime: u64, theta: u64, c_norm: u64) -> MeasuredInputs {
        MeasuredInputs {
            c,
            c_prime,
            theta,
            theta_prime: 11 * theta,
            c_norm,
            tau: c_norm,
            f0_norm: 1,
        }
    }

    #[test]
    fn ledger_for_ab() {
        let k = PipelineConstants::derive(inputs(2, 2, 2, 2), Setting::Auto, Setting::Auto, Setting::Auto);
        assert_eq!((k.k.value, k.d.value, k.p.value), (14, 102, 126));
        assert_eq!(k.c_power_norm.value, 252);
        assert_eq!(k.e.value, 153);
        assert_eq!(k.delta_prime.value, 308);
        assert!(k.checklist_passes());
    }

    #[test]
    fn ledger_for_a() {
        let k = PipelineConstants::derive(inputs(0, 1, 0, 1), Setting::Auto, Setting::Auto, Setting::Auto);
        assert_eq!((k.k.value, k.d.value, k.p.value), (1, 9, 24));
        assert!(k.checklist_passes());
    }

    #[test]
    fn small_powers_fail_the_checklist() {
        for p in [1, 4] {
            let k = PipelineConstants::derive(inputs(2, 2, 2, 2), Setting::Auto, Setting::Auto, Setting::Fixed(p));
            assert!(!k.checklist_passes());
        }
        let k = PipelineConstants::derive(inputs(2, 2, 2, 2), Setting::Auto, Setting::Fixed(0), Setting::Auto);
        let failed: Vec<_> = k.checklist().into_iter().filter(|i| !i.holds).map(|i| i.name).collect();
        assert_eq!(failed, ["D ≥ 7K + 2C′"]);
    }

    #[test]
    fn f0_for_ab_and_a() {
        let f = find_f0(2, &w("ab"), 4).unwrap();
        assert_eq!(f.f0, "a");
        assert_eq!(f.eq3, (0, 2));
        // b qualifies as well
        assert!(f0_conditions(&w("ab"), &w("b")));
        let f = find_f0(2, &w("a"), 4).unwrap();
        assert_eq!(f.f0, "b");
        assert_eq!(f.eq3, (0, 0));
        assert!(!f0_conditions(&w("a"), &w("a")));
    }

    #[test]
    fn fallback_produces_a_valid_f0() {
        let f = find_f0(2, &w("ab"), 0).unwrap();
        assert!(f.via_fallback);
        assert!(f0_conditions(&w("ab"), &f.word));
    }
}
