//! Normal subgroups given as kernels of maps to computable quotients.

use std::fmt;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::keyvalue::KeyValues;
use crate::word::Letter;

use super::{Element, Group, GroupKind};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum OracleKind {
    FiniteQuotientKernel,
    IntegerHomomorphismKernel,
    FreeProductQuotientKernel,
    CommutatorSubgroup,
}

/// Image of a group element in the quotient.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub enum QuotientValue {
    /// Permutation of `0..degree`, acting on the right.
    Perm(Box<[u16]>),
    /// Element of `Z^n`.
    Vector(Box<[i64]>),
    /// Reduced syllables `(factor, exponent)` of a free product of cyclic groups.
    FreeProduct(Vec<(u16, i64)>),
}

/// Kernel of a homomorphism from the group onto a quotient with a solvable
/// word problem. Images are stored per factor and per letter code.
#[derive(Clone, Debug)]
pub struct NormalSubgroupOracle {
    kind: OracleKind,
    /// `images[factor][letter code]`.
    images: Vec<Vec<QuotientValue>>,
    identity: QuotientValue,
    /// Orders of the free product factors, 0 for infinite cyclic.
    orders: Vec<u64>,
    description: String,
}

impl NormalSubgroupOracle {
    pub fn kind(&self) -> OracleKind {
        self.kind
    }

    pub fn description(&self) -> &str {
        &self.description
    }

    pub fn identity(&self) -> QuotientValue {
        self.identity.clone()
    }

    pub fn letter_image(&self, factor: usize, l: Letter) -> &QuotientValue {
        &self.images[factor][l.code() as usize]
    }

    pub fn is_trivial(&self, v: &QuotientValue) -> bool {
        *v == self.identity
    }

    /// `v * letter`, in place.
    pub fn apply(&self, v: &mut QuotientValue, factor: usize, l: Letter) {
        let img = &self.images[factor][l.code() as usize];
        self.mul_assign(v, img);
    }

    pub fn mul(&self, a: &QuotientValue, b: &QuotientValue) -> QuotientValue {
        let mut out = a.clone();
        self.mul_assign(&mut out, b);
        out
    }

    pub fn inverse(&self, v: &QuotientValue) -> QuotientValue {
        match v {
            QuotientValue::Perm(p) => {
                let mut inv = vec![0u16; p.len()];
                for (x, &y) in p.iter().enumerate() {
                    inv[y as usize] = x as u16;
                }
                QuotientValue::Perm(inv.into())
            }
            QuotientValue::Vector(u) => QuotientValue::Vector(u.iter().map(|x| -x).collect()),
            QuotientValue::FreeProduct(s) => {
                let mut out = Vec::with_capacity(s.len());
                for &(f, e) in s.iter().rev() {
                    push_syllable(&mut out, f, -e, &self.orders);
                }
                QuotientValue::FreeProduct(out)
            }
        }
    }

    fn mul_assign(&self, a: &mut QuotientValue, b: &QuotientValue) {
        match (a, b) {
            (QuotientValue::Perm(p), QuotientValue::Perm(q)) => {
                for x in p.iter_mut() {
                    *x = q[*x as usize];
                }
            }
            (QuotientValue::Vector(u), QuotientValue::Vector(v)) => {
                for (x, y) in u.iter_mut().zip(v.iter()) {
                    *x += *y;
                }
            }
            (QuotientValue::FreeProduct(s), QuotientValue::FreeProduct(t)) => {
                for &(f, e) in t {
                    push_syllable(s, f, e, &self.orders);
                }
            }
            _ => unreachable!("quotient values of mixed kinds"),
        }
    }

    /// True iff the image of `g` in the quotient is trivial.
    pub fn contains(&self, group: &Group, g: &Element) -> Result<bool> {
        Ok(self.is_trivial(&self.image(group, g)?))
    }

    pub fn image(&self, group: &Group, g: &Element) -> Result<QuotientValue> {
        group.check_element(g)?;
        let mut v = self.identity();
        for (factor, word) in g.factor_words().enumerate() {
            for &l in word.iter() {
                self.apply(&mut v, factor, l);
            }
        }
        Ok(v)
    }

    /// Parses an oracle file against the group it will be used with.
    pub fn parse(text: &str, group: &Group) -> Result<NormalSubgroupOracle> {
        let kv = KeyValues::parse(text)?;
        kv.check_keys(&["quotient", "images", "orders"])?;
        let ranks = group.factor_ranks();
        let quotient = kv.require("quotient")?;
        let oracle = match quotient {
            "commutator" => {
                if kv.get("images").is_some() || kv.get("orders").is_some() {
                    return Err(Error::parse("quotient=commutator takes no images or orders"));
                }
                NormalSubgroupOracle::commutator(&ranks)
            }
            "integer" => {
                let images = parse_image_lists(kv.require("images")?, &ranks)?;
                let mut per_factor = Vec::new();
                for list in images {
                    let mut v = Vec::new();
                    for s in list {
                        v.push(s.parse::<i64>().map_err(|_| {
                            Error::parse(format!("integer image {:?} is not an integer", s))
                        })?);
                    }
                    per_factor.push(v);
                }
                NormalSubgroupOracle::integer(per_factor)
            }
            "finite_permutation" => {
                let images = parse_image_lists(kv.require("images")?, &ranks)?;
                let mut cycles = Vec::new();
                for list in images {
                    let mut v = Vec::new();
                    for s in list {
                        v.push(parse_cycles(&s)?);
                    }
                    cycles.push(v);
                }
                NormalSubgroupOracle::permutation(cycles)?
            }
            "free_product" => {
                let orders: Vec<u64> = kv
                    .require("orders")?
                    .split(',')
                    .map(|s| {
                        s.trim()
                            .parse::<u64>()
                            .map_err(|_| Error::parse(format!("bad order {:?}", s)))
                    })
                    .collect::<Result<_>>()?;
                let images = parse_image_lists(kv.require("images")?, &ranks)?;
                let mut per_factor = Vec::new();
                for list in images {
                    let mut v = Vec::new();
                    for s in list {
                        v.push(parse_free_product_image(&s, orders.len())?);
                    }
                    per_factor.push(v);
                }
                NormalSubgroupOracle::free_product(orders, per_factor)?
            }
            other => return Err(Error::parse(format!("unknown quotient {:?}", other))),
        };
        oracle.validate(group)?;
        Ok(oracle)
    }

    /// Abelianization map to `Z^(total rank)`.
    pub fn commutator(ranks: &[usize]) -> NormalSubgroupOracle {
        let dim: usize = ranks.iter().sum();
        let mut offset = 0;
        let mut images = Vec::new();
        for &r in ranks {
            let mut f = Vec::new();
            for l in Letter::alphabet(r) {
                let mut v = vec![0i64; dim];
                v[offset + l.index()] = if l.is_inverse() { -1 } else { 1 };
                f.push(QuotientValue::Vector(v.into()));
            }
            offset += r;
            images.push(f);
        }
        NormalSubgroupOracle {
            kind: OracleKind::CommutatorSubgroup,
            images,
            identity: QuotientValue::Vector(vec![0; dim].into()),
            orders: vec![],
            description: "commutator subgroup".into(),
        }
    }

    /// Kernel of the map to `Z` sending generator `i` of each factor to
    /// `images[factor][i]`.
    pub fn integer(images: Vec<Vec<i64>>) -> NormalSubgroupOracle {
        let table = images
            .iter()
            .map(|f| {
                let mut out = Vec::new();
                for &x in f {
                    out.push(QuotientValue::Vector(vec![x].into()));
                    out.push(QuotientValue::Vector(vec![-x].into()));
                }
                out
            })
            .collect();
        NormalSubgroupOracle {
            kind: OracleKind::IntegerHomomorphismKernel,
            images: table,
            identity: QuotientValue::Vector(vec![0].into()),
            orders: vec![],
            description: format!("kernel of the map to Z with images {:?}", images),
        }
    }

    /// Kernel of the map to a permutation group. Points are 1-based in the
    /// cycle lists, as in `(1 2)(3 4)`.
    pub fn permutation(cycles: Vec<Vec<Vec<Vec<u16>>>>) -> Result<NormalSubgroupOracle> {
        let degree = cycles
            .iter()
            .flatten()
            .flatten()
            .flatten()
            .copied()
            .max()
            .unwrap_or(1) as usize;
        let mut table = Vec::new();
        for f in &cycles {
            let mut out = Vec::new();
            for gen in f {
                let mut p: Vec<u16> = (0..degree as u16).collect();
                for cyc in gen {
                    let mut sorted = cyc.clone();
                    sorted.sort_unstable();
                    sorted.dedup();
                    if sorted.len() != cyc.len() {
                        return Err(Error::parse("a cycle repeats a point"));
                    }
                    for (i, &x) in cyc.iter().enumerate() {
                        if x == 0 {
                            return Err(Error::parse("permutation points are 1-based"));
                        }
                        let y = cyc[(i + 1) % cyc.len()];
                        p[x as usize - 1] = y - 1;
                    }
                }
                let mut seen = vec![false; degree];
                for &y in &p {
                    if std::mem::replace(&mut seen[y as usize], true) {
                        return Err(Error::parse("cycles do not define a permutation"));
                    }
                }
                let mut inv = vec![0u16; degree];
                for (x, &y) in p.iter().enumerate() {
                    inv[y as usize] = x as u16;
                }
                out.push(QuotientValue::Perm(p.into()));
                out.push(QuotientValue::Perm(inv.into()));
            }
            table.push(out);
        }
        Ok(NormalSubgroupOracle {
            kind: OracleKind::FiniteQuotientKernel,
            images: table,
            identity: QuotientValue::Perm((0..degree as u16).collect()),
            orders: vec![],
            description: format!("kernel of a permutation representation of degree {}", degree),
        })
    }

    /// Kernel of the map to the free product of cyclic groups of the given
    /// orders (0 = infinite). Each generator maps to `factor^exponent`, or to
    /// the identity when `None`.
    pub fn free_product(
        orders: Vec<u64>,
        images: Vec<Vec<Option<(u16, i64)>>>,
    ) -> Result<NormalSubgroupOracle> {
        if orders.is_empty() {
            return Err(Error::parse("free product needs at least one factor"));
        }
        let mut table = Vec::new();
        for f in &images {
            let mut out = Vec::new();
            for img in f {
                let (fwd, inv) = match *img {
                    None => (vec![], vec![]),
                    Some((factor, e)) => {
                        if factor as usize >= orders.len() {
                            return Err(Error::parse(format!("no free product factor {}", factor)));
                        }
                        let mut a = vec![];
                        push_syllable(&mut a, factor, e, &orders);
                        let mut b = vec![];
                        push_syllable(&mut b, factor, -e, &orders);
                        (a, b)
                    }
                };
                out.push(QuotientValue::FreeProduct(fwd));
                out.push(QuotientValue::FreeProduct(inv));
            }
            table.push(out);
        }
        let desc = format!(
            "kernel of the map to the free product of cyclic groups of orders {:?}",
            orders
        );
        Ok(NormalSubgroupOracle {
            kind: OracleKind::FreeProductQuotientKernel,
            images: table,
            identity: QuotientValue::FreeProduct(vec![]),
            orders,
            description: desc,
        })
    }

    /// Checks the images define a homomorphism on this group: one image
    /// list per factor with one image per generator, images of different
    /// direct factors commute, and relators map to the identity.
    pub fn validate(&self, group: &Group) -> Result<()> {
        let ranks = group.factor_ranks();
        if self.images.len() != ranks.len() {
            return Err(Error::parse(format!(
                "oracle has {} image lists, group has {} factors",
                self.images.len(),
                ranks.len()
            )));
        }
        for (f, (imgs, &r)) in self.images.iter().zip(&ranks).enumerate() {
            if imgs.len() != 2 * r {
                return Err(Error::parse(format!(
                    "factor {}: expected {} generator images, got {}",
                    f,
                    r,
                    imgs.len() / 2
                )));
            }
        }
        for f1 in 0..self.images.len() {
            for f2 in f1 + 1..self.images.len() {
                for x in &self.images[f1] {
                    for y in &self.images[f2] {
                        if self.mul(x, y) != self.mul(y, x) {
                            return Err(Error::parse(
                                "images of different direct factors must commute",
                            ));
                        }
                    }
                }
            }
        }
        if group.kind() == GroupKind::FinitelyPresented {
            for rel in group.spec().relators.iter() {
                let mut v = self.identity();
                for &l in rel.iter() {
                    self.apply(&mut v, 0, l);
                }
                if !self.is_trivial(&v) {
                    return Err(Error::parse(format!(
                        "relator {} does not map to the identity",
                        rel
                    )));
                }
            }
        }
        Ok(())
    }
}

impl fmt::Display for NormalSubgroupOracle {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.description)
    }
}

fn push_syllable(s: &mut Vec<(u16, i64)>, factor: u16, e: i64, orders: &[u64]) {
    let order = orders[factor as usize] as i64;
    let norm = |x: i64| if order > 0 { x.rem_euclid(order) } else { x };
    match s.last_mut() {
        Some((f, x)) if *f == factor => {
            let y = norm(*x + e);
            if y == 0 {
                s.pop();
            } else {
                *x = y;
            }
        }
        _ => {
            let y = norm(e);
            if y != 0 {
                s.push((factor, y));
            }
        }
    }
}

/// Splits `a:x,b:y;a:z,b:w` into per-factor lists ordered by generator.
fn parse_image_lists(text: &str, ranks: &[usize]) -> Result<Vec<Vec<String>>> {
    let factors: Vec<&str> = text.split(';').collect();
    if factors.len() != ranks.len() {
        return Err(Error::parse(format!(
            "expected {} ';'-separated image lists, got {}",
            ranks.len(),
            factors.len()
        )));
    }
    let mut out = Vec::new();
    for (part, &rank) in factors.iter().zip(ranks) {
        let mut slots: Vec<Option<String>> = vec![None; rank];
        for item in split_top_level(part) {
            let (name, value) = item
                .split_once(':')
                .ok_or_else(|| Error::parse(format!("image {:?} is not gen:value", item)))?;
            let l = name
                .trim()
                .chars()
                .next()
                .and_then(Letter::from_char)
                .filter(|l| !l.is_inverse() && l.index() < rank && name.trim().len() == 1)
                .ok_or_else(|| Error::parse(format!("unknown generator {:?}", name)))?;
            if slots[l.index()].replace(value.trim().to_string()).is_some() {
                return Err(Error::parse(format!("generator {:?} given twice", name)));
            }
        }
        let list = slots
            .into_iter()
            .enumerate()
            .map(|(i, s)| {
                s.ok_or_else(|| {
                    Error::parse(format!("missing image for {}", Letter::generator(i).to_char()))
                })
            })
            .collect::<Result<Vec<_>>>()?;
        out.push(list);
    }
    Ok(out)
}

fn split_top_level(s: &str) -> Vec<String> {
    let mut out = Vec::new();
    let mut depth = 0i32;
    let mut cur = String::new();
    for c in s.chars() {
        match c {
            '(' => depth += 1,
            ')' => depth -= 1,
            ',' if depth == 0 => {
                out.push(std::mem::take(&mut cur));
                continue;
            }
            _ => {}
        }
        cur.push(c);
    }
    if !cur.trim().is_empty() {
        out.push(cur);
    }
    out
}

fn parse_cycles(s: &str) -> Result<Vec<Vec<u16>>> {
    let s = s.trim();
    let mut cycles = Vec::new();
    let mut rest = s;
    while !rest.is_empty() {
        let body = rest
            .strip_prefix('(')
            .ok_or_else(|| Error::parse(format!("bad cycle notation {:?}", s)))?;
        let end = body
            .find(')')
            .ok_or_else(|| Error::parse(format!("unclosed cycle in {:?}", s)))?;
        let points: Vec<u16> = body[..end]
            .split_whitespace()
            .map(|p| p.parse::<u16>().map_err(|_| Error::parse(format!("bad point {:?}", p))))
            .collect::<Result<_>>()?;
        if !points.is_empty() {
            cycles.push(points);
        }
        rest = body[end + 1..].trim_start();
    }
    Ok(cycles)
}

fn parse_free_product_image(s: &str, factors: usize) -> Result<Option<(u16, i64)>> {
    let s = s.trim();
    if s == "e" {
        return Ok(None);
    }
    let (f, e) = match s.split_once('^') {
        Some((f, e)) => (f, e.parse::<i64>().map_err(|_| Error::parse(format!("bad exponent in {:?}", s)))?),
        None => (s, 1),
    };
    let f: u16 = f
        .parse()
        .map_err(|_| Error::parse(format!("bad free product image {:?}", s)))?;
    if f as usize >= factors {
        return Err(Error::parse(format!("free product image {:?} names a missing factor", s)));
    }
    Ok(Some((f, e)))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::group::GroupSpec;

    fn f2() -> Group {
        Group::new(GroupSpec::free(2)).unwrap()
    }

    fn el(g: &Group, s: &str) -> Element {
        g.parse_element(s).unwrap()
    }

    #[test]
    fn parity_kernel() {
        let g = f2();
        let o = NormalSubgroupOracle::parse("quotient=finite_permutation\nimages=a:(1 2),b:(1 2)\n", &g)
            .unwrap();
        assert!(o.contains(&g, &el(&g, "ab")).unwrap());
        assert!(!o.contains(&g, &el(&g, "a")).unwrap());
    }

    #[test]
    fn integer_kernel() {
        let g = f2();
        let o = NormalSubgroupOracle::parse("quotient=integer\nimages=a:1,b:0\n", &g).unwrap();
        assert!(!o.contains(&g, &el(&g, "a")).unwrap());
        assert!(o.contains(&g, &el(&g, "b")).unwrap());
        assert!(o.contains(&g, &el(&g, "abA")).unwrap());
    }

    #[test]
    fn commutator_kernel() {
        let g = f2();
        let o = NormalSubgroupOracle::parse("quotient=commutator\n", &g).unwrap();
        assert!(o.contains(&g, &el(&g, "abAB")).unwrap());
        assert!(!o.contains(&g, &el(&g, "ab")).unwrap());
    }

    #[test]
    fn modular_group_kernel() {
        let g = f2();
        let o =
            NormalSubgroupOracle::parse("quotient=free_product\norders=2,3\nimages=a:0,b:1\n", &g).unwrap();
        assert!(o.contains(&g, &el(&g, "aa")).unwrap());
        assert!(o.contains(&g, &el(&g, "bbb")).unwrap());
        assert!(o.contains(&g, &el(&g, "ab^3A")).unwrap());
        assert!(o.contains(&g, &el(&g, "aBBBA")).unwrap());
        assert!(!o.contains(&g, &el(&g, "ab")).unwrap());
        assert!(!o.contains(&g, &el(&g, "abab")).unwrap());
    }

    #[test]
    fn factor_kernel_in_product() {
        let g = Group::new(GroupSpec::direct_product(vec![2, 2])).unwrap();
        let o = NormalSubgroupOracle::parse(
            "quotient=free_product\norders=0,0\nimages=a:e,b:e;a:0,b:1\n",
            &g,
        )
        .unwrap();
        assert!(o.contains(&g, &el(&g, "(abA,1)")).unwrap());
        assert!(!o.contains(&g, &el(&g, "(1,b)")).unwrap());
        let bad = NormalSubgroupOracle::parse(
            "quotient=free_product\norders=0,0\nimages=a:0,b:1;a:0,b:1\n",
            &g,
        );
        assert!(bad.is_err());
    }

    #[test]
    fn rejects_malformed_files() {
        let g = f2();
        for text in [
            "quotient=integer\nimages=a:1\n",
            "quotient=integer\nimages=a:1,b:x\n",
            "quotient=integer\nimages=a:1,b:0\nfoo=1\n",
            "quotient=finite_permutation\nimages=a:(1 2,b:(2 3)\n",
            "quotient=finite_permutation\nimages=a:(1 1),b:()\n",
            "quotient=cyclic\n",
        ] {
            assert!(NormalSubgroupOracle::parse(text, &g).is_err(), "{}", text);
        }
    }
}
