//! Compact conjugates `u⁻¹·ρ·u`, where `ρ` is the rotation by `s` letters of
//! `c₀^m`. These are the elements of `G₂,p` and later stages; at ledger `p`
//! they are hundreds of letters long, so letters are produced on demand.

use std::cmp::Ordering;

use crate::word::{Letter, Word};

/// Shared shape of every conjugate in a run: the root and the number of
/// root periods in `c^p`.
#[derive(Clone, Debug)]
pub struct ConjShape {
    pub root: Word,
    pub periods: usize,
}

impl ConjShape {
    pub fn middle_len(&self) -> usize {
        self.root.len() * self.periods
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Conj {
    pub u: Word,
    pub rot: u8,
}

impl Conj {
    /// The conjugate `g⁻¹·c₀^periods·g` in reduced form.
    pub fn of(shape: &ConjShape, g: &Word) -> Conj {
        let tau = shape.root.len();
        let m = 2 * g.len() / tau + 3;
        let y = shape.root.pow(m as i64).conjugate_by(g);
        let (t, core) = y.cyclic_reduction();
        let rot = (0..tau)
            .find(|&s| (0..tau).all(|i| core[i] == shape.root[(i + s) % tau]))
            .expect("the core is a rotation of a root power");
        Conj {
            u: t.inverse(),
            rot: rot as u8,
        }
    }

    pub fn len(&self, shape: &ConjShape) -> usize {
        2 * self.u.len() + shape.middle_len()
    }

    #[inline]
    pub fn letter(&self, shape: &ConjShape, i: usize) -> Letter {
        let n = self.u.len();
        let mid = shape.middle_len();
        if i < n {
            self.u[n - 1 - i].inverse()
        } else if i < n + mid {
            let tau = shape.root.len();
            shape.root[(i - n + self.rot as usize) % tau]
        } else {
            self.u[i - n - mid]
        }
    }

    pub fn letters<'a>(&'a self, shape: &'a ConjShape) -> impl Iterator<Item = Letter> + 'a {
        (0..self.len(shape)).map(move |i| self.letter(shape, i))
    }

    pub fn to_word(&self, shape: &ConjShape) -> Word {
        Word::reduce(self.letters(shape))
    }

    /// Length of the longest common prefix of the two words.
    pub fn common_prefix(&self, other: &Conj, shape: &ConjShape) -> usize {
        let n = self.len(shape).min(other.len(shape));
        (0..n)
            .take_while(|&i| self.letter(shape, i) == other.letter(shape, i))
            .count()
    }

    /// Tree distance `|x⁻¹y| = |x| + |y| − 2·lcp(x, y)`.
    pub fn distance(&self, other: &Conj, shape: &ConjShape) -> usize {
        self.len(shape) + other.len(shape) - 2 * self.common_prefix(other, shape)
    }

    pub fn shortlex_cmp(&self, other: &Conj, shape: &ConjShape) -> Ordering {
        self.len(shape).cmp(&other.len(shape)).then_with(|| {
            let n = self.len(shape);
            (0..n)
                .map(|i| self.letter(shape, i).cmp(&other.letter(shape, i)))
                .find(|o| o.is_ne())
                .unwrap_or(Ordering::Equal)
        })
    }
}

/// Polynomial hashing of letter sequences modulo `2⁶⁴` with two bases.
/// Equal sequences always hash equally; matches are confirmed by callers
/// before they are reported.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Hash2(pub u64, pub u64);

pub const BASES: (u64, u64) = (0x9e37_79b9_7f4a_7c15, 0xc2b2_ae3d_27d4_eb4f);

impl Hash2 {
    #[inline]
    pub fn push(self, l: Letter) -> Hash2 {
        let x = l.code() as u64 + 1;
        Hash2(
            self.0.wrapping_mul(BASES.0).wrapping_add(x),
            self.1.wrapping_mul(BASES.1).wrapping_add(x),
        )
    }

    pub fn of<I: IntoIterator<Item = Letter>>(letters: I) -> Hash2 {
        letters.into_iter().fold(Hash2::default(), Hash2::push)
    }

    /// `H(a ++ b)` from `H(a)`, `H(b)` and `|b|`.
    #[inline]
    pub fn concat(self, tail: Hash2, tail_len: usize, powers: &Powers) -> Hash2 {
        let (p0, p1) = powers.get(tail_len);
        Hash2(
            self.0.wrapping_mul(p0).wrapping_add(tail.0),
            self.1.wrapping_mul(p1).wrapping_add(tail.1),
        )
    }

    /// `H(b)` from `H(a ++ b)`, `H(a)` and `|b|`.
    #[inline]
    pub fn strip_prefix(self, head: Hash2, tail_len: usize, powers: &Powers) -> Hash2 {
        let (p0, p1) = powers.get(tail_len);
        Hash2(
            self.0.wrapping_sub(head.0.wrapping_mul(p0)),
            self.1.wrapping_sub(head.1.wrapping_mul(p1)),
        )
    }
}

/// Table of `BASES^n`.
pub struct Powers(Vec<(u64, u64)>);

impl Powers {
    pub fn new(n: usize) -> Powers {
        let mut v = Vec::with_capacity(n + 1);
        let mut cur = (1u64, 1u64);
        for _ in 0..=n {
            v.push(cur);
            cur = (cur.0.wrapping_mul(BASES.0), cur.1.wrapping_mul(BASES.1));
        }
        Powers(v)
    }

    #[inline]
    pub fn get(&self, n: usize) -> (u64, u64) {
        self.0[n]
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn w(s: &str) -> Word {
        Word::parse(s, 2).unwrap()
    }

    fn shape(root: &str, periods: usize) -> ConjShape {
        ConjShape {
            root: w(root),
            periods,
        }
    }

    #[test]
    fn matches_free_reduction() {
        let sh = shape("ab", 5);
        let c = w("ab").pow(5);
        for g in ["1", "a", "b", "B", "ba", "abab", "Ab", "bbA", "abB"] {
            let g = w(g);
            let x = Conj::of(&sh, &g);
            assert_eq!(x.to_word(&sh), c.conjugate_by(&g), "g = {}", g);
            assert_eq!(x.to_word(&sh).len(), x.len(&sh));
        }
    }

    #[test]
    fn conjugates_by_root_powers_coincide() {
        let sh = shape("ab", 6);
        let g = w("b");
        let h = w("ab").pow(2).mul(&g);
        assert_eq!(Conj::of(&sh, &g), Conj::of(&sh, &h));
        assert_eq!(Conj::of(&sh, &w("1")), Conj::of(&sh, &w("ab")));
    }

    #[test]
    fn distance_is_the_word_metric() {
        let sh = shape("ab", 4);
        let xs: Vec<Conj> = ["a", "b", "BA", "bb"].iter().map(|g| Conj::of(&sh, &w(g))).collect();
        for x in &xs {
            for y in &xs {
                let d = x.to_word(&sh).inverse().mul(&y.to_word(&sh)).len();
                assert_eq!(x.distance(y, &sh), d);
                assert_eq!(x.shortlex_cmp(y, &sh), x.to_word(&sh).shortlex_cmp(&y.to_word(&sh)));
            }
        }
    }

    #[test]
    fn hash_concat_and_strip() {
        let pw = Powers::new(16);
        let a = w("abaB");
        let a = a.letters();
        let (x, y) = (&a[..2], &a[2..]);
        let hx = Hash2::of(x.iter().copied());
        let hy = Hash2::of(y.iter().copied());
        let hxy = Hash2::of(a.iter().copied());
        assert_eq!(hx.concat(hy, y.len(), &pw), hxy);
        assert_eq!(hxy.strip_prefix(hx, y.len(), &pw), hy);
    }
}
