//! Injectivity of `(x₁, …, x_k) ↦ x₁c²ᵖ ⋯ x_kc²ᵖ` on tuples of `G₄`, and
//! the zig-zag projection bounds of eq. (13) on sampled tuples.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;

use super::conj::{Conj, ConjShape, Hash2, Powers};
use crate::error::{Error, Result};
use crate::geometry::Axis;
use crate::group::{Element, Group};
use crate::word::{Letter, Word};

pub const MAX_TUPLE: usize = 4;
const ENTRY_LIMIT: usize = 20_000_000;
const WITNESS_LIMIT: usize = 16;

#[derive(Clone, Debug, Serialize)]
pub struct InjectionReport {
    pub k_max: u32,
    pub norm_budget: u32,
    /// Elements of `G₄` whose `G₁` preimage fits the budget.
    pub alphabet: u64,
    /// Tuples scanned, by length.
    pub tuples: Vec<u64>,
    pub hash_collisions: u64,
    pub collisions: Vec<String>,
}

impl InjectionReport {
    pub fn passed(&self) -> bool {
        self.collisions.is_empty()
    }
}

struct Factor {
    letters: Vec<Letter>,
    hash: Hash2,
    cost: u32,
    source: u32,
}

type Entry = (u32, Hash2, [u32; MAX_TUPLE]);

struct Scan<'a> {
    factors: &'a [Factor],
    powers: &'a Powers,
    k_max: usize,
    budget: u32,
}

impl Scan<'_> {
    fn visit(
        &self,
        stack: &mut Vec<Letter>,
        hashes: &mut Vec<Hash2>,
        tuple: &mut [u32; MAX_TUPLE],
        depth: usize,
        left: u32,
        out: &mut Vec<Entry>,
    ) -> Result<()> {
        for (i, f) in self.factors.iter().enumerate() {
            if f.cost > left {
                break;
            }
            tuple[depth] = i as u32;
            let n = stack.len();
            let mut head = Hash2::default();
            let mut t = 0;
            while t < n.min(f.letters.len()) && stack[n - 1 - t] == f.letters[t].inverse() {
                head = head.push(f.letters[t]);
                t += 1;
            }
            let rest = f.letters.len() - t;
            let tail = f.hash.strip_prefix(head, rest, self.powers);
            let hash = hashes[n - t].concat(tail, rest, self.powers);
            let mut key = [u32::MAX; MAX_TUPLE];
            key[..=depth].copy_from_slice(&tuple[..=depth]);
            out.push(((n - t + rest) as u32, hash, key));
            if out.len() > ENTRY_LIMIT {
                return Err(Error::resource("injectivity scan exceeds its memory budget; lower k_max or norm_budget"));
            }
            if depth + 1 < self.k_max {
                let popped: Vec<Letter> = stack[n - t..].to_vec();
                stack.truncate(n - t);
                hashes.truncate(n - t + 1);
                for &l in &f.letters[t..] {
                    stack.push(l);
                    hashes.push(hashes[hashes.len() - 1].push(l));
                }
                self.visit(stack, hashes, tuple, depth + 1, left - f.cost, out)?;
                stack.truncate(n - t);
                hashes.truncate(n - t + 1);
                for l in popped {
                    stack.push(l);
                    hashes.push(hashes[hashes.len() - 1].push(l));
                }
            }
        }
        Ok(())
    }
}

fn product(factors: &[Factor], key: &[u32; MAX_TUPLE]) -> Word {
    key.iter()
        .take_while(|&&i| i != u32::MAX)
        .fold(Word::identity(), |acc, &i| {
            acc.mul(&Word::reduce(factors[i as usize].letters.iter().copied()))
        })
}

fn describe(factors: &[Factor], key: &[u32; MAX_TUPLE]) -> String {
    let ids: Vec<String> = key
        .iter()
        .take_while(|&&i| i != u32::MAX)
        .map(|&i| format!("#{}", factors[i as usize].source))
        .collect();
    format!("({})", ids.join(", "))
}

/// `elements` are indices into `g2` and `costs[i]` is the norm of the `G₁`
/// preimage of `g2[i]`.
pub fn injection_scan(
    g2: &[Conj],
    elements: &[u32],
    costs: &[u32],
    shape: &ConjShape,
    k_max: u32,
    norm_budget: u32,
) -> Result<InjectionReport> {
    let k = k_max as usize;
    if k > MAX_TUPLE {
        return Err(Error::usage(format!("k_max is at most {}", MAX_TUPLE)));
    }
    let c2p = shape.root.pow(2 * shape.periods as i64);
    let mut factors: Vec<Factor> = elements
        .iter()
        .filter(|&&i| costs[i as usize] <= norm_budget)
        .map(|&i| {
            let y = g2[i as usize].to_word(shape).mul(&c2p);
            Factor {
                hash: Hash2::of(y.iter().copied()),
                letters: y.letters().to_vec(),
                cost: costs[i as usize],
                source: i,
            }
        })
        .collect();
    factors.sort_by_key(|f| f.cost);
    let longest = factors.iter().map(|f| f.letters.len()).max().unwrap_or(0);
    let powers = Powers::new(longest * k + 1);
    let scan = Scan {
        factors: &factors,
        powers: &powers,
        k_max: k,
        budget: norm_budget,
    };

    let mut entries: Vec<Entry> = if k == 0 {
        Vec::new()
    } else {
        factors
            .par_iter()
            .enumerate()
            .map(|(i, f)| {
                let mut out = vec![(f.letters.len() as u32, f.hash, {
                    let mut key = [u32::MAX; MAX_TUPLE];
                    key[0] = i as u32;
                    key
                })];
                if k > 1 && f.cost <= scan.budget {
                    let mut stack = f.letters.clone();
                    let mut hashes = Vec::with_capacity(stack.len() + 1);
                    hashes.push(Hash2::default());
                    for &l in &stack {
                        hashes.push(hashes[hashes.len() - 1].push(l));
                    }
                    let mut tuple = [u32::MAX; MAX_TUPLE];
                    tuple[0] = i as u32;
                    scan.visit(&mut stack, &mut hashes, &mut tuple, 1, scan.budget - f.cost, &mut out)?;
                }
                Ok(out)
            })
            .collect::<Result<Vec<_>>>()?
            .into_iter()
            .flatten()
            .collect()
    };
    let mut tuples = vec![0u64; k];
    for e in &entries {
        tuples[e.2.iter().filter(|&&i| i != u32::MAX).count() - 1] += 1;
    }
    entries.par_sort_unstable_by_key(|e| (e.0, e.1));

    let mut hash_collisions = 0;
    let mut collisions = Vec::new();
    for w in entries.windows(2) {
        if (w[0].0, w[0].1) == (w[1].0, w[1].1) {
            hash_collisions += 1;
            if product(&factors, &w[0].2) == product(&factors, &w[1].2) && collisions.len() < WITNESS_LIMIT {
                collisions.push(format!(
                    "{} and {} have the same image",
                    describe(&factors, &w[0].2),
                    describe(&factors, &w[1].2)
                ));
            }
        }
    }
    Ok(InjectionReport {
        k_max,
        norm_budget,
        alphabet: factors.len() as u64,
        tuples,
        hash_collisions,
        collisions,
    })
}

#[derive(Clone, Debug, Serialize)]
pub struct ZigzagReport {
    pub samples: u64,
    pub tuple_len: u32,
    pub pairs_checked: u64,
    /// Largest projection over consecutive pairs; eq. (13) needs `< 3K`.
    pub max_consecutive: u64,
    /// Largest projection over the other pairs; eq. (13) needs `< 5K`.
    pub max_far: u64,
    pub failures: Vec<String>,
}

impl ZigzagReport {
    pub fn passed(&self) -> bool {
        self.failures.is_empty()
    }
}

struct Zig {
    axis: Axis,
    z: Element,
    z_prime: Element,
}

fn zigzag(group: &Group, base: &Axis, shape: &ConjShape, tuple: &[(&Conj, &Word)]) -> Result<Vec<Zig>> {
    let c2p = shape.root.pow(2 * shape.periods as i64);
    let cp = shape.root.pow(shape.periods as i64);
    let free = |w: Word| Element::Free(w);
    let even = |p: &Word| -> Result<Zig> {
        Ok(Zig {
            axis: base.translate(group, &free(p.clone()))?,
            z: free(p.mul(&c2p.inverse())),
            z_prime: free(p.clone()),
        })
    };
    let mut p = Word::identity();
    let mut out = vec![even(&p)?];
    for (x, e) in tuple {
        let q = p.mul(&e.inverse());
        out.push(Zig {
            axis: base.translate(group, &free(q.clone()))?,
            z: free(q.clone()),
            z_prime: free(q.mul(&cp)),
        });
        p = p.mul(&x.to_word(shape)).mul(&c2p);
        out.push(even(&p)?);
    }
    Ok(out)
}

/// `d^π_A(x, B)`.
fn proj(group: &Group, a: &Axis, x: &Element, b: &Axis) -> Result<Option<u64>> {
    if a == b {
        return Ok(None);
    }
    let p = a.project(group, x)?.union(a.project_axis(group, b)?);
    Ok(Some(a.diam(p) as u64))
}

pub struct ZigzagParams {
    pub samples: u32,
    pub tuple_len: u32,
    pub k: u64,
    pub seed: u64,
}

/// `elements` are indices into `g2`; `preimages[i]` is the `G₁` element
/// whose conjugate is `g2[i]`.
pub fn zigzag_check(
    group: &Group,
    g2: &[Conj],
    elements: &[u32],
    preimages: &[Word],
    shape: &ConjShape,
    params: &ZigzagParams,
) -> Result<ZigzagReport> {
    let base = Axis::new(group, &Element::Free(shape.root.pow(shape.periods as i64)))?;
    let mut rng = ChaCha8Rng::seed_from_u64(params.seed);
    let draws: Vec<Vec<u32>> = if elements.is_empty() {
        Vec::new()
    } else {
        (0..params.samples)
            .map(|_| {
                (0..params.tuple_len)
                    .map(|_| elements[rng.random_range(0..elements.len())])
                    .collect()
            })
            .collect()
    };
    let (k3, k5) = (3 * params.k, 5 * params.k);
    let results: Vec<Result<(u64, u64, u64, Vec<String>)>> = draws
        .par_iter()
        .map(|draw| {
            let tuple: Vec<(&Conj, &Word)> = draw
                .iter()
                .map(|&i| (&g2[i as usize], &preimages[i as usize]))
                .collect();
            let zs = zigzag(group, &base, shape, &tuple)?;
            let (mut pairs, mut near, mut far) = (0, 0, 0);
            let mut failures = Vec::new();
            for i in 0..zs.len() {
                for j in i + 1..zs.len() {
                    pairs += 1;
                    let bound = if j == i + 1 { k3 } else { k5 };
                    let a = proj(group, &zs[i].axis, &zs[i].z_prime, &zs[j].axis)?;
                    let b = proj(group, &zs[j].axis, &zs[j].z, &zs[i].axis)?;
                    let (Some(a), Some(b)) = (a, b) else {
                        failures.push(format!("tuple {:?}: Z_{} = Z_{}", draw, i, j));
                        continue;
                    };
                    let m = a.max(b);
                    if j == i + 1 {
                        near = near.max(m);
                    } else {
                        far = far.max(m);
                    }
                    if m >= bound {
                        failures.push(format!("tuple {:?}: pair ({}, {}) projects to {} ≥ {}", draw, i, j, m, bound));
                    }
                }
            }
            Ok((pairs, near, far, failures))
        })
        .collect();
    let mut report = ZigzagReport {
        samples: draws.len() as u64,
        tuple_len: params.tuple_len,
        pairs_checked: 0,
        max_consecutive: 0,
        max_far: 0,
        failures: Vec::new(),
    };
    for r in results {
        let (pairs, near, far, failures) = r?;
        report.pairs_checked += pairs;
        report.max_consecutive = report.max_consecutive.max(near);
        report.max_far = report.max_far.max(far);
        report.failures.extend(failures);
    }
    report.failures.truncate(WITNESS_LIMIT);
    Ok(report)
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::collections::HashMap;

    fn w(s: &str) -> Word {
        Word::parse(s, 2).unwrap()
    }

    fn family(sh: &ConjShape, gs: &[&str]) -> (Vec<Conj>, Vec<Word>) {
        gs.iter().map(|g| (Conj::of(sh, &w(g)), w(g))).unzip()
    }

    #[test]
    fn scan_matches_materialized_products() {
        let sh = ConjShape { root: w("ab"), periods: 3 };
        let (g2, pre) = family(&sh, &["a", "b", "A", "ba", "bb", "aB", "Ab"]);
        assert!((0..7).all(|i| (0..i).all(|j| g2[i] != g2[j])));
        let costs: Vec<u32> = pre.iter().map(|g| g.len() as u32).collect();
        let all: Vec<u32> = (0..g2.len() as u32).collect();
        let r = injection_scan(&g2, &all, &costs, &sh, 3, 5).unwrap();
        assert!(r.passed(), "{:?}", r);
        // oracle: enumerate the same tuples and multiply out
        let c2p = w("ab").pow(6);
        let ys: Vec<Word> = g2.iter().map(|x| x.to_word(&sh).mul(&c2p)).collect();
        let mut images: HashMap<Word, usize> = HashMap::new();
        let mut counts = [0u64; 3];
        for a in 0..7 {
            for t in [vec![a]].into_iter().chain((0..7).map(|b| vec![a, b])).chain(
                (0..7).flat_map(|b| (0..7).map(move |c| vec![a, b, c])),
            ) {
                if t.iter().map(|&i| costs[i]).sum::<u32>() <= 5 {
                    counts[t.len() - 1] += 1;
                    let img = t.iter().fold(Word::identity(), |acc, &i| acc.mul(&ys[i]));
                    *images.entry(img).or_default() += 1;
                }
            }
        }
        assert_eq!(r.tuples, counts);
        assert!(images.values().all(|&n| n == 1));
    }

    #[test]
    fn scan_reports_a_genuine_collision() {
        let sh = ConjShape { root: w("ab"), periods: 2 };
        let (g2, _) = family(&sh, &["a", "B"]);
        assert_eq!(g2[0], g2[1]);
        let r = injection_scan(&g2, &[0, 1], &[1, 1], &sh, 2, 2).unwrap();
        assert_eq!(r.tuples, [2, 4]);
        assert!(r.hash_collisions >= 1);
        assert!(!r.passed());
    }

    #[test]
    fn k_max_is_capped() {
        let sh = ConjShape { root: w("ab"), periods: 1 };
        assert!(injection_scan(&[], &[], &[], &sh, 5, 1).is_err());
    }

    #[test]
    fn zigzag_on_small_tuples() {
        let g = Group::free(2);
        let sh = ConjShape { root: w("ab"), periods: 20 };
        let (g2, pre) = family(&sh, &["a", "b", "ba", "bb"]);
        let params = ZigzagParams {
            samples: 20,
            tuple_len: 2,
            k: 3,
            seed: 7,
        };
        let r = zigzag_check(&g, &g2, &[0, 1, 2, 3], &pre, &sh, &params).unwrap();
        assert_eq!(r.samples, 20);
        assert_eq!(r.pairs_checked, 20 * 10);
        assert!(r.passed(), "{:?}", r);
        let again = zigzag_check(&g, &g2, &[0, 1, 2, 3], &pre, &sh, &params).unwrap();
        assert_eq!(format!("{:?}", r), format!("{:?}", again));
    }
}
