//! Letters and freely reduced words over a finite alphabet of generators.
//!
//! A letter is stored as `2 * generator + inverse_bit`, so that the natural
//! byte order is the shortlex letter order `a < A < b < B < ...` (uppercase
//! denotes the inverse generator). Comparing two words by length and then
//! lexicographically on the raw letters is therefore shortlex order.

use std::cmp::Ordering;
use std::fmt;
use std::ops::Deref;

use smallvec::SmallVec;

use crate::error::{Error, Result};

/// Largest supported free rank; generators are named `a` through `z`.
pub const MAX_RANK: usize = 26;

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Letter(u8);

impl Letter {
    pub fn generator(index: usize) -> Letter {
        debug_assert!(index < MAX_RANK);
        Letter((index as u8) << 1)
    }

    pub fn from_code(code: u8) -> Letter {
        Letter(code)
    }

    pub fn code(self) -> u8 {
        self.0
    }

    pub fn index(self) -> usize {
        (self.0 >> 1) as usize
    }

    pub fn is_inverse(self) -> bool {
        self.0 & 1 == 1
    }

    #[inline]
    pub fn inverse(self) -> Letter {
        Letter(self.0 ^ 1)
    }

    /// All `2 * rank` letters in shortlex order.
    pub fn alphabet(rank: usize) -> impl Iterator<Item = Letter> + Clone {
        (0..(2 * rank) as u8).map(Letter)
    }

    pub fn to_char(self) -> char {
        let base = if self.is_inverse() { b'A' } else { b'a' };
        (base + self.index() as u8) as char
    }

    pub fn from_char(c: char) -> Option<Letter> {
        match c {
            'a'..='z' => Some(Letter::generator(c as usize - 'a' as usize)),
            'A'..='Z' => Some(Letter::generator(c as usize - 'A' as usize).inverse()),
            _ => None,
        }
    }
}

/// A freely reduced word. All constructors reduce; the invariant is that no
/// letter is followed by its inverse.
#[derive(Clone, Default, PartialEq, Eq, Hash)]
pub struct Word(SmallVec<[Letter; 16]>);

impl Word {
    pub fn identity() -> Word {
        Word(SmallVec::new())
    }

    pub fn letter(l: Letter) -> Word {
        let mut w = Word::identity();
        w.0.push(l);
        w
    }

    /// Reduces an arbitrary letter sequence.
    pub fn reduce<I: IntoIterator<Item = Letter>>(letters: I) -> Word {
        let mut w = Word::identity();
        for l in letters {
            w.push(l);
        }
        w
    }

    /// Wraps letters that the caller guarantees are already reduced.
    pub(crate) fn from_reduced_unchecked(letters: &[Letter]) -> Word {
        debug_assert!(letters.windows(2).all(|p| p[1] != p[0].inverse()));
        Word(SmallVec::from_slice(letters))
    }

    pub fn is_identity(&self) -> bool {
        self.0.is_empty()
    }

    /// Appends a letter, cancelling against the last letter if needed.
    #[inline]
    pub fn push(&mut self, l: Letter) {
        if self.0.last() == Some(&l.inverse()) {
            self.0.pop();
        } else {
            self.0.push(l);
        }
    }

    pub fn pop(&mut self) -> Option<Letter> {
        self.0.pop()
    }

    pub fn inverse(&self) -> Word {
        Word(self.0.iter().rev().map(|l| l.inverse()).collect())
    }

    pub fn mul(&self, other: &Word) -> Word {
        let cancel = self
            .0
            .iter()
            .rev()
            .zip(other.0.iter())
            .take_while(|(x, y)| **x == y.inverse())
            .count();
        let mut out = SmallVec::with_capacity(self.len() + other.len() - 2 * cancel);
        out.extend_from_slice(&self.0[..self.len() - cancel]);
        out.extend_from_slice(&other.0[cancel..]);
        Word(out)
    }

    /// `self^n` for any integer `n`.
    pub fn pow(&self, n: i64) -> Word {
        let base = if n < 0 { self.inverse() } else { self.clone() };
        let mut out = Word::identity();
        for _ in 0..n.unsigned_abs() {
            out = out.mul(&base);
        }
        out
    }

    pub fn conjugate_by(&self, g: &Word) -> Word {
        g.inverse().mul(self).mul(g)
    }

    pub fn letters(&self) -> &[Letter] {
        &self.0
    }

    /// Length of the longest common prefix.
    pub fn common_prefix(&self, other: &[Letter]) -> usize {
        self.0.iter().zip(other).take_while(|(x, y)| x == y).count()
    }

    pub fn is_cyclically_reduced(&self) -> bool {
        match (self.0.first(), self.0.last()) {
            (Some(f), Some(l)) => self.len() == 1 || *f != l.inverse(),
            _ => true,
        }
    }

    /// Splits `self = t * core * t^-1` with `core` cyclically reduced.
    pub fn cyclic_reduction(&self) -> (Word, Word) {
        let n = self.len();
        let mut k = 0;
        while 2 * k + 1 < n && self.0[k] == self.0[n - 1 - k].inverse() {
            k += 1;
        }
        (
            Word::from_reduced_unchecked(&self.0[..k]),
            Word::from_reduced_unchecked(&self.0[k..n - k]),
        )
    }

    /// Largest index of a generator used, plus one.
    pub fn rank_used(&self) -> usize {
        self.0.iter().map(|l| l.index() + 1).max().unwrap_or(0)
    }

    pub fn shortlex_cmp(&self, other: &Word) -> Ordering {
        self.len().cmp(&other.len()).then_with(|| self.0.cmp(&other.0))
    }

    /// Parses `aB`, `a^3b^-2`, `1` or `e` (identity, only when `e` is not a
    /// generator of the given rank).
    pub fn parse(text: &str, rank: usize) -> Result<Word> {
        let t = text.trim();
        if t.is_empty() || t == "1" || (t == "e" && rank < 5) {
            return Ok(Word::identity());
        }
        let mut out = Word::identity();
        let chars: Vec<char> = t.chars().filter(|c| !c.is_whitespace()).collect();
        let mut i = 0;
        while i < chars.len() {
            let l = Letter::from_char(chars[i])
                .filter(|l| l.index() < rank)
                .ok_or_else(|| Error::parse(format!("bad letter {:?} in word {:?}", chars[i], t)))?;
            i += 1;
            let mut exp: i64 = 1;
            if i < chars.len() && chars[i] == '^' {
                let start = i + 1;
                let mut end = start;
                while end < chars.len() && (chars[end] == '-' || chars[end].is_ascii_digit()) {
                    end += 1;
                }
                let s: String = chars[start..end].iter().collect();
                exp = s
                    .parse()
                    .map_err(|_| Error::parse(format!("bad exponent {:?} in word {:?}", s, t)))?;
                i = end;
            }
            let l = if exp < 0 { l.inverse() } else { l };
            for _ in 0..exp.unsigned_abs() {
                out.push(l);
            }
        }
        Ok(out)
    }
}

impl Deref for Word {
    type Target = [Letter];
    fn deref(&self) -> &[Letter] {
        &self.0
    }
}

impl PartialOrd for Word {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

/// Shortlex order.
impl Ord for Word {
    fn cmp(&self, other: &Self) -> Ordering {
        self.shortlex_cmp(other)
    }
}

impl fmt::Display for Word {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.0.is_empty() {
            return f.write_str("1");
        }
        for l in &self.0 {
            write!(f, "{}", l.to_char())?;
        }
        Ok(())
    }
}

impl fmt::Debug for Word {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Word({})", self)
    }
}

/// Calls `visit` on every reduced word of exactly `length` letters over the
/// first `rank` generators, in lexicographic (hence shortlex) order. The
/// word is passed as a slice that is only valid during the call.
pub fn for_each_reduced_word<F: FnMut(&[Letter])>(rank: usize, length: usize, mut visit: F) {
    let mut stack: Vec<Letter> = Vec::with_capacity(length);
    fn go<F: FnMut(&[Letter])>(rank: usize, length: usize, stack: &mut Vec<Letter>, visit: &mut F) {
        if stack.len() == length {
            visit(stack);
            return;
        }
        let last = stack.last().copied();
        for l in Letter::alphabet(rank) {
            if Some(l.inverse()) == last {
                continue;
            }
            stack.push(l);
            go(rank, length, stack, visit);
            stack.pop();
        }
    }
    go(rank, length, &mut stack, &mut visit);
}

/// Number of reduced words of length exactly `n` in a free group of the
/// given rank, saturating.
pub fn free_sphere_size(rank: usize, n: u32) -> u128 {
    if n == 0 {
        return 1;
    }
    let r = rank as u128;
    let mut s = 2 * r;
    for _ in 1..n {
        s = s.saturating_mul(2 * r - 1);
    }
    s
}

pub fn free_ball_size(rank: usize, n: u32) -> u128 {
    (0..=n).fold(0u128, |acc, k| acc.saturating_add(free_sphere_size(rank, k)))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn w(s: &str) -> Word {
        Word::parse(s, 2).unwrap()
    }

    #[test]
    fn letter_order_is_shortlex() {
        let chars: String = Letter::alphabet(2).map(|l| l.to_char()).collect();
        assert_eq!(chars, "aAbB");
    }

    #[test]
    fn free_reduction() {
        assert_eq!(w("ab").mul(&w("Ba")), w("aa"));
        assert_eq!(w("ab").mul(&w("ab").inverse()), Word::identity());
        assert_eq!(w("aAbB"), Word::identity());
        assert_eq!(w("a^3b^-2").to_string(), "aaaBB");
    }

    #[test]
    fn cyclic_reduction_splits() {
        let (t, core) = w("bAabaB").cyclic_reduction();
        // bAabaB reduces to bbaB
        assert_eq!(t, w("b"));
        assert_eq!(core, w("ba"));
        assert_eq!(core.conjugate_by(&t.inverse()), w("bbaB"));
        assert!(w("ab").is_cyclically_reduced());
        assert!(!w("abA").is_cyclically_reduced());
    }

    #[test]
    fn parse_errors() {
        assert!(Word::parse("ac", 2).is_err());
        assert!(Word::parse("a^x", 2).is_err());
        assert_eq!(Word::parse("e", 2).unwrap(), Word::identity());
    }

    #[test]
    fn enumerated_shells_match_closed_form() {
        for n in 0..7u32 {
            let mut count = 0u128;
            let mut prev: Option<Word> = None;
            for_each_reduced_word(2, n as usize, |s| {
                let cur = Word::from_reduced_unchecked(s);
                if let Some(p) = &prev {
                    assert!(p < &cur);
                }
                prev = Some(cur);
                count += 1;
            });
            assert_eq!(count, free_sphere_size(2, n));
        }
        assert_eq!(free_ball_size(2, 2), 17);
    }

    proptest::proptest! {
        #[test]
        fn reduce_is_idempotent(codes in proptest::collection::vec(0u8..4, 0..12)) {
            let raw: Vec<Letter> = codes.into_iter().map(Letter::from_code).collect();
            let once = Word::reduce(raw.iter().copied());
            let twice = Word::reduce(once.iter().copied());
            proptest::prop_assert_eq!(&once, &twice);
            proptest::prop_assert!(once.windows(2).all(|p| p[1] != p[0].inverse()));
        }
    }
}
