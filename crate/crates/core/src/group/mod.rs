//! Group backends: free groups, direct products of free groups with the
//! `(S ∪ 1) × (S ∪ 1)` generating set, and finite groups given by a
//! presentation.

pub mod oracle;
pub mod presented;

use std::cmp::Ordering;
use std::collections::HashMap;
use std::fmt;
use std::sync::Arc;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::keyvalue::KeyValues;
use crate::word::{for_each_reduced_word, Letter, Word, MAX_RANK};

pub use oracle::{NormalSubgroupOracle, OracleKind, QuotientValue};
pub use presented::CosetTable;

pub const DEFAULT_RADIUS_BOUND: u32 = 32;
pub const DEFAULT_COSET_LIMIT: usize = 100_000;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum GroupKind {
    Free,
    DirectProductOfFree,
    FinitelyPresented,
}

impl GroupKind {
    pub fn name(self) -> &'static str {
        match self {
            GroupKind::Free => "free",
            GroupKind::DirectProductOfFree => "direct_product_of_free",
            GroupKind::FinitelyPresented => "finitely_presented",
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct GroupSpec {
    pub kind: GroupKind,
    /// One rank per direct factor; a single entry for the other kinds.
    pub ranks: Vec<usize>,
    pub relators: Vec<Word>,
    pub radius_bound: u32,
    pub coset_limit: usize,
}

impl GroupSpec {
    pub fn free(rank: usize) -> GroupSpec {
        GroupSpec {
            kind: GroupKind::Free,
            ranks: vec![rank],
            relators: vec![],
            radius_bound: DEFAULT_RADIUS_BOUND,
            coset_limit: DEFAULT_COSET_LIMIT,
        }
    }

    pub fn direct_product(ranks: Vec<usize>) -> GroupSpec {
        GroupSpec {
            kind: GroupKind::DirectProductOfFree,
            ranks,
            ..GroupSpec::free(1)
        }
    }

    pub fn presented(rank: usize, relators: Vec<Word>) -> GroupSpec {
        GroupSpec {
            kind: GroupKind::FinitelyPresented,
            relators,
            ..GroupSpec::free(rank)
        }
    }

    pub fn with_radius_bound(mut self, r: u32) -> GroupSpec {
        self.radius_bound = r;
        self
    }

    /// Parses a group file such as
    ///
    /// ```text
    /// kind=direct_product_of_free
    /// ranks=2,2
    /// radius_bound=8
    /// ```
    pub fn parse(text: &str) -> Result<GroupSpec> {
        let kv = KeyValues::parse(text)?;
        let kind = match kv.require("kind")? {
            "free" => GroupKind::Free,
            "direct_product_of_free" => GroupKind::DirectProductOfFree,
            "finitely_presented" => GroupKind::FinitelyPresented,
            other => return Err(Error::parse(format!("unknown group kind {:?}", other))),
        };
        let common = ["kind", "radius_bound"];
        let allowed: Vec<&str> = match kind {
            GroupKind::Free => [&common[..], &["rank"]].concat(),
            GroupKind::DirectProductOfFree => [&common[..], &["ranks"]].concat(),
            GroupKind::FinitelyPresented => {
                [&common[..], &["rank", "relators", "coset_limit"]].concat()
            }
        };
        kv.check_keys(&allowed)?;
        let ranks = match kind {
            GroupKind::DirectProductOfFree => kv
                .require("ranks")?
                .split(',')
                .map(|s| {
                    s.trim()
                        .parse::<usize>()
                        .map_err(|_| Error::parse(format!("bad rank {:?}", s)))
                })
                .collect::<Result<Vec<_>>>()?,
            _ => vec![kv
                .parse_num::<usize>("rank")?
                .ok_or_else(|| Error::parse("missing key \"rank\""))?],
        };
        let relators = match kv.get("relators") {
            Some(list) => list
                .split(',')
                .filter(|s| !s.trim().is_empty())
                .map(|s| Word::parse(s, ranks[0]))
                .collect::<Result<Vec<_>>>()?,
            None => vec![],
        };
        let spec = GroupSpec {
            kind,
            ranks,
            relators,
            radius_bound: kv.parse_num("radius_bound")?.unwrap_or(DEFAULT_RADIUS_BOUND),
            coset_limit: kv.parse_num("coset_limit")?.unwrap_or(DEFAULT_COSET_LIMIT),
        };
        spec.validate()?;
        Ok(spec)
    }

    fn validate(&self) -> Result<()> {
        if self.ranks.is_empty() {
            return Err(Error::parse("at least one rank is required"));
        }
        if self.kind != GroupKind::DirectProductOfFree && self.ranks.len() != 1 {
            return Err(Error::parse("only direct products take several ranks"));
        }
        for &r in &self.ranks {
            if r == 0 || r > MAX_RANK {
                return Err(Error::parse(format!("rank must be in 1..={}, got {}", MAX_RANK, r)));
            }
        }
        Ok(())
    }
}

/// A group element in canonical form.
#[derive(Clone, PartialEq, Eq, Hash)]
pub enum Element {
    /// Freely reduced word.
    Free(Word),
    /// One reduced word per direct factor.
    Product(Box<[Word]>),
    /// Coset of the trivial subgroup, with its shortlex-least geodesic word.
    Presented { coset: u32, word: Word },
}

impl Element {
    pub fn norm(&self) -> u32 {
        match self {
            Element::Free(w) | Element::Presented { word: w, .. } => w.len() as u32,
            Element::Product(ws) => ws.iter().map(|w| w.len() as u32).max().unwrap_or(0),
        }
    }

    pub fn is_identity(&self) -> bool {
        self.factor_words().all(|w| w.is_identity())
    }

    /// The words making up the canonical form, one per direct factor.
    pub fn factor_words(&self) -> impl Iterator<Item = &Word> {
        let s: &[Word] = match self {
            Element::Free(w) | Element::Presented { word: w, .. } => std::slice::from_ref(w),
            Element::Product(ws) => ws,
        };
        s.iter()
    }

    pub fn as_free(&self) -> Option<&Word> {
        match self {
            Element::Free(w) => Some(w),
            _ => None,
        }
    }

    fn variant(&self) -> u8 {
        match self {
            Element::Free(_) => 0,
            Element::Product(_) => 1,
            Element::Presented { .. } => 2,
        }
    }
}

/// Shortlex: norm first, then componentwise shortlex on the canonical words.
impl Ord for Element {
    fn cmp(&self, other: &Self) -> Ordering {
        self.variant()
            .cmp(&other.variant())
            .then_with(|| self.norm().cmp(&other.norm()))
            .then_with(|| self.factor_words().cmp(other.factor_words()))
    }
}

impl PartialOrd for Element {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl fmt::Display for Element {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Element::Free(w) | Element::Presented { word: w, .. } => write!(f, "{}", w),
            Element::Product(ws) => {
                f.write_str("(")?;
                for (i, w) in ws.iter().enumerate() {
                    if i > 0 {
                        f.write_str(",")?;
                    }
                    write!(f, "{}", w)?;
                }
                f.write_str(")")
            }
        }
    }
}

impl fmt::Debug for Element {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Element({})", self)
    }
}

#[derive(Clone, Debug)]
pub struct Group {
    spec: GroupSpec,
    table: Option<Arc<CosetTable>>,
}

impl Group {
    pub fn new(spec: GroupSpec) -> Result<Group> {
        spec.validate()?;
        let table = match spec.kind {
            GroupKind::FinitelyPresented => Some(Arc::new(CosetTable::enumerate(
                spec.ranks[0],
                &spec.relators,
                spec.coset_limit,
            )?)),
            _ => None,
        };
        Ok(Group { spec, table })
    }

    pub fn parse(text: &str) -> Result<Group> {
        Group::new(GroupSpec::parse(text)?)
    }

    pub fn free(rank: usize) -> Group {
        Group::new(GroupSpec::free(rank)).expect("valid free rank")
    }

    pub fn spec(&self) -> &GroupSpec {
        &self.spec
    }

    pub fn kind(&self) -> GroupKind {
        self.spec.kind
    }

    pub fn radius_bound(&self) -> u32 {
        self.spec.radius_bound
    }

    pub fn factor_ranks(&self) -> Vec<usize> {
        self.spec.ranks.clone()
    }

    pub fn is_free(&self) -> bool {
        self.spec.kind == GroupKind::Free
    }

    pub fn describe(&self) -> String {
        match self.spec.kind {
            GroupKind::Free => format!("F{}", self.spec.ranks[0]),
            GroupKind::DirectProductOfFree => self
                .spec
                .ranks
                .iter()
                .map(|r| format!("F{}", r))
                .collect::<Vec<_>>()
                .join("x"),
            GroupKind::FinitelyPresented => {
                let rels: Vec<String> = self.spec.relators.iter().map(|r| r.to_string()).collect();
                format!("<{} gens | {}>", self.spec.ranks[0], rels.join(", "))
            }
        }
    }

    pub fn identity(&self) -> Element {
        match self.spec.kind {
            GroupKind::Free => Element::Free(Word::identity()),
            GroupKind::DirectProductOfFree => {
                Element::Product(vec![Word::identity(); self.spec.ranks.len()].into())
            }
            GroupKind::FinitelyPresented => Element::Presented {
                coset: 0,
                word: Word::identity(),
            },
        }
    }

    /// Element of a free or presented group represented by `w`.
    pub fn from_word(&self, w: &Word) -> Result<Element> {
        if w.rank_used() > self.spec.ranks[0] {
            return Err(Error::usage(format!("word {} uses too many generators", w)));
        }
        match self.spec.kind {
            GroupKind::Free => Ok(Element::Free(w.clone())),
            GroupKind::FinitelyPresented => Ok(self.presented_from_coset(self.table().walk(0, w))),
            GroupKind::DirectProductOfFree => {
                Err(Error::usage("product elements need one word per factor"))
            }
        }
    }

    pub fn from_words(&self, ws: Vec<Word>) -> Result<Element> {
        if self.spec.kind != GroupKind::DirectProductOfFree {
            return match <[Word; 1]>::try_from(ws) {
                Ok([w]) => self.from_word(&w),
                Err(_) => Err(Error::usage("expected a single word")),
            };
        }
        if ws.len() != self.spec.ranks.len() {
            return Err(Error::usage(format!(
                "expected {} factor words, got {}",
                self.spec.ranks.len(),
                ws.len()
            )));
        }
        for (w, &r) in ws.iter().zip(&self.spec.ranks) {
            if w.rank_used() > r {
                return Err(Error::usage(format!("word {} uses too many generators", w)));
            }
        }
        Ok(Element::Product(ws.into()))
    }

    fn table(&self) -> &CosetTable {
        self.table.as_ref().expect("presented backend has a coset table")
    }

    pub fn coset_table(&self) -> Option<&CosetTable> {
        self.table.as_deref()
    }

    fn presented_from_coset(&self, coset: u32) -> Element {
        Element::Presented {
            coset,
            word: self.table().canonical_word(coset).clone(),
        }
    }

    /// Parses `abA`, `a^2B`, `1`, or `(ab,B)` for products.
    pub fn parse_element(&self, text: &str) -> Result<Element> {
        let t = text.trim();
        match self.spec.kind {
            GroupKind::DirectProductOfFree => {
                let inner = t
                    .strip_prefix('(')
                    .and_then(|s| s.strip_suffix(')'))
                    .ok_or_else(|| Error::parse(format!("product element {:?} must look like (w1,w2)", t)))?;
                let parts: Vec<&str> = inner.split(',').collect();
                if parts.len() != self.spec.ranks.len() {
                    return Err(Error::parse(format!(
                        "product element {:?} needs {} components",
                        t,
                        self.spec.ranks.len()
                    )));
                }
                let ws = parts
                    .iter()
                    .zip(&self.spec.ranks)
                    .map(|(p, &r)| Word::parse(p, r))
                    .collect::<Result<Vec<_>>>()?;
                Ok(Element::Product(ws.into()))
            }
            _ => {
                let w = Word::parse(t, self.spec.ranks[0])?;
                self.from_word(&w)
            }
        }
    }

    /// Fails unless `g` belongs to this backend.
    pub fn check_element(&self, g: &Element) -> Result<()> {
        let ok = match (self.spec.kind, g) {
            (GroupKind::Free, Element::Free(w)) => w.rank_used() <= self.spec.ranks[0],
            (GroupKind::DirectProductOfFree, Element::Product(ws)) => {
                ws.len() == self.spec.ranks.len()
                    && ws.iter().zip(&self.spec.ranks).all(|(w, &r)| w.rank_used() <= r)
            }
            (GroupKind::FinitelyPresented, Element::Presented { coset, .. }) => {
                (*coset as usize) < self.table().order()
            }
            _ => false,
        };
        if ok {
            Ok(())
        } else {
            Err(Error::usage(format!(
                "element {} does not belong to the {} backend",
                g,
                self.spec.kind.name()
            )))
        }
    }

    pub fn multiply(&self, a: &Element, b: &Element) -> Result<Element> {
        self.check_element(a)?;
        self.check_element(b)?;
        Ok(match (a, b) {
            (Element::Free(x), Element::Free(y)) => Element::Free(x.mul(y)),
            (Element::Product(xs), Element::Product(ys)) => {
                Element::Product(xs.iter().zip(ys.iter()).map(|(x, y)| x.mul(y)).collect())
            }
            (Element::Presented { coset, .. }, Element::Presented { word, .. }) => {
                self.presented_from_coset(self.table().walk(*coset, word))
            }
            _ => unreachable!("checked above"),
        })
    }

    pub fn inverse(&self, a: &Element) -> Element {
        match a {
            Element::Free(w) => Element::Free(w.inverse()),
            Element::Product(ws) => Element::Product(ws.iter().map(|w| w.inverse()).collect()),
            Element::Presented { word, .. } => {
                self.presented_from_coset(self.table().walk(0, &word.inverse()))
            }
        }
    }

    pub fn norm(&self, a: &Element) -> u32 {
        a.norm()
    }

    /// `d(a, b) = |a⁻¹ b|`.
    pub fn distance(&self, a: &Element, b: &Element) -> Result<u32> {
        Ok(self.multiply(&self.inverse(a), b)?.norm())
    }

    /// Symmetric generating set defining the word metric.
    pub fn metric_generators(&self) -> Vec<Element> {
        match self.spec.kind {
            GroupKind::Free => Letter::alphabet(self.spec.ranks[0])
                .map(|l| Element::Free(Word::letter(l)))
                .collect(),
            GroupKind::FinitelyPresented => {
                let mut out: Vec<Element> = Letter::alphabet(self.spec.ranks[0])
                    .map(|l| self.presented_from_coset(self.table().act(0, l)))
                    .filter(|e| !e.is_identity())
                    .collect();
                out.sort();
                out.dedup();
                out
            }
            GroupKind::DirectProductOfFree => {
                let choices: Vec<Vec<Word>> = self
                    .spec
                    .ranks
                    .iter()
                    .map(|&r| {
                        std::iter::once(Word::identity())
                            .chain(Letter::alphabet(r).map(Word::letter))
                            .collect()
                    })
                    .collect();
                let mut out = Vec::new();
                let mut idx = vec![0usize; choices.len()];
                loop {
                    let ws: Vec<Word> = idx.iter().zip(&choices).map(|(&i, c)| c[i].clone()).collect();
                    if ws.iter().any(|w| !w.is_identity()) {
                        out.push(Element::Product(ws.into()));
                    }
                    let mut k = 0;
                    loop {
                        if k == idx.len() {
                            out.sort();
                            return out;
                        }
                        idx[k] += 1;
                        if idx[k] < choices[k].len() {
                            break;
                        }
                        idx[k] = 0;
                        k += 1;
                    }
                }
            }
        }
    }

    /// Deterministic geodesic from `a` to `b`. In free groups this is the
    /// unique tree path; in direct products each factor waits until it must
    /// move (identity steps come first in the generator order); in presented
    /// groups it follows the shortlex-least geodesic word of `a⁻¹b`.
    pub fn geodesic(&self, a: &Element, b: &Element) -> Result<Vec<Element>> {
        let y = self.multiply(&self.inverse(a), b)?;
        let n = y.norm() as usize;
        let mut path = Vec::with_capacity(n + 1);
        match &y {
            Element::Free(w) | Element::Presented { word: w, .. } => {
                for t in 0..=n {
                    let step = self.from_word(&Word::from_reduced_unchecked(&w[..t]))?;
                    path.push(self.multiply(a, &step)?);
                }
            }
            Element::Product(ws) => {
                for t in 0..=n {
                    let step: Vec<Word> = ws
                        .iter()
                        .map(|w| {
                            let k = w.len().saturating_sub(n - t);
                            Word::from_reduced_unchecked(&w[..k])
                        })
                        .collect();
                    path.push(self.multiply(a, &Element::Product(step.into()))?);
                }
            }
        }
        Ok(path)
    }

    fn check_radius(&self, r: u32) -> Result<()> {
        if r > self.spec.radius_bound {
            return Err(Error::resource(format!(
                "radius {} exceeds the declared radius bound {}",
                r, self.spec.radius_bound
            )));
        }
        Ok(())
    }

    /// Visits every element of norm exactly `r`, in shortlex order.
    pub fn for_each_in_shell<F: FnMut(&Element)>(&self, r: u32, mut visit: F) -> Result<()> {
        self.check_radius(r)?;
        match self.spec.kind {
            GroupKind::Free => {
                for_each_reduced_word(self.spec.ranks[0], r as usize, |s| {
                    visit(&Element::Free(Word::from_reduced_unchecked(s)))
                });
            }
            GroupKind::FinitelyPresented => {
                let t = self.table();
                for &c in t.shortlex_order() {
                    if t.distance(c) == r {
                        visit(&self.presented_from_coset(c));
                    }
                }
            }
            GroupKind::DirectProductOfFree => {
                let lists: Vec<Vec<Word>> = self
                    .spec
                    .ranks
                    .iter()
                    .map(|&rank| {
                        let mut v = Vec::new();
                        for len in 0..=r as usize {
                            for_each_reduced_word(rank, len, |s| {
                                v.push(Word::from_reduced_unchecked(s))
                            });
                        }
                        v
                    })
                    .collect();
                let mut cur = Vec::with_capacity(lists.len());
                product_shell(&lists, r as usize, false, &mut cur, &mut visit);
            }
        }
        Ok(())
    }

    /// Every element of norm at most `r`, shell by shell, shortlex within
    /// each shell.
    pub fn enumerate_ball(&self, r: u32) -> Result<Vec<Element>> {
        self.check_radius(r)?;
        let mut out = Vec::new();
        for k in 0..=r {
            self.for_each_in_shell(k, |g| out.push(g.clone()))?;
        }
        Ok(out)
    }

    /// Number of elements in each shell `0..=r`.
    pub fn shell_sizes(&self, r: u32) -> Result<Vec<u64>> {
        (0..=r)
            .map(|k| {
                let mut n = 0u64;
                self.for_each_in_shell(k, |_| n += 1)?;
                Ok(n)
            })
            .collect()
    }

    /// Raw breadth-first search in the Cayley graph of the metric
    /// generators, independent of the canonical-form norm. Returns each
    /// element with its graph distance from the identity.
    pub fn bfs_ball(&self, r: u32) -> Result<HashMap<Element, u32>> {
        self.check_radius(r)?;
        let gens = self.metric_generators();
        let mut dist = HashMap::new();
        let id = self.identity();
        dist.insert(id.clone(), 0);
        let mut frontier = vec![id];
        for d in 1..=r {
            let mut next = Vec::new();
            for g in &frontier {
                for s in &gens {
                    let h = self.multiply(g, s)?;
                    if !dist.contains_key(&h) {
                        dist.insert(h.clone(), d);
                        next.push(h);
                    }
                }
            }
            frontier = next;
        }
        Ok(dist)
    }
}

fn product_shell<F: FnMut(&Element)>(
    lists: &[Vec<Word>],
    r: usize,
    hit: bool,
    cur: &mut Vec<Word>,
    visit: &mut F,
) {
    let k = cur.len();
    if k == lists.len() {
        if hit {
            visit(&Element::Product(cur.clone().into()));
        }
        return;
    }
    let last = k + 1 == lists.len();
    for w in &lists[k] {
        let h = hit || w.len() == r;
        if last && !h {
            continue;
        }
        cur.push(w.clone());
        product_shell(lists, r, h, cur, visit);
        cur.pop();
    }
}
