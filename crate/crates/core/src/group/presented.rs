//! Finite groups given by a presentation, decided by Todd–Coxeter (HLT)
//! coset enumeration over the trivial subgroup.

use crate::error::{Error, Result};
use crate::word::{Letter, Word};

const NONE: u32 = u32::MAX;

/// Completed coset table of a finite group, with BFS distances and the
/// shortlex-least geodesic word reaching each coset.
#[derive(Debug, Clone)]
pub struct CosetTable {
    rank: usize,
    table: Vec<Vec<u32>>,
    dist: Vec<u32>,
    canon: Vec<Word>,
    /// Cosets sorted by shortlex order of their canonical words.
    order: Vec<u32>,
}

struct Enumerator {
    cols: usize,
    table: Vec<Vec<u32>>,
    parent: Vec<u32>,
    limit: usize,
}

impl Enumerator {
    fn rep(&mut self, mut c: u32) -> u32 {
        let mut root = c;
        while self.parent[root as usize] != root {
            root = self.parent[root as usize];
        }
        while self.parent[c as usize] != root {
            let next = self.parent[c as usize];
            self.parent[c as usize] = root;
            c = next;
        }
        root
    }

    fn live(&self, c: u32) -> bool {
        self.parent[c as usize] == c
    }

    fn define(&mut self, c: u32, x: usize) -> Result<u32> {
        if self.table.len() >= self.limit {
            return Err(Error::resource(format!(
                "coset enumeration exceeded the limit of {} cosets",
                self.limit
            )));
        }
        let d = self.table.len() as u32;
        self.table.push(vec![NONE; self.cols]);
        self.parent.push(d);
        self.table[c as usize][x] = d;
        self.table[d as usize][x ^ 1] = c;
        Ok(d)
    }

    fn merge(&mut self, a: u32, b: u32, queue: &mut Vec<u32>) {
        let (a, b) = (self.rep(a), self.rep(b));
        if a == b {
            return;
        }
        let (keep, drop) = if a < b { (a, b) } else { (b, a) };
        self.parent[drop as usize] = keep;
        queue.push(drop);
    }

    fn coincidence(&mut self, a: u32, b: u32) {
        let mut queue = Vec::new();
        self.merge(a, b, &mut queue);
        let mut i = 0;
        while i < queue.len() {
            let e = queue[i];
            i += 1;
            for x in 0..self.cols {
                let f = self.table[e as usize][x];
                if f == NONE {
                    continue;
                }
                if self.table[f as usize][x ^ 1] == e {
                    self.table[f as usize][x ^ 1] = NONE;
                }
                let e1 = self.rep(e);
                let f1 = self.rep(f);
                let ex = self.table[e1 as usize][x];
                if ex != NONE {
                    self.merge(f1, ex, &mut queue);
                } else {
                    let fx = self.table[f1 as usize][x ^ 1];
                    if fx != NONE {
                        self.merge(e1, fx, &mut queue);
                    } else {
                        self.table[e1 as usize][x] = f1;
                        self.table[f1 as usize][x ^ 1] = e1;
                    }
                }
            }
        }
    }

    fn scan_and_fill(&mut self, c: u32, rel: &[usize]) -> Result<()> {
        if rel.is_empty() {
            return Ok(());
        }
        let mut f = c;
        let mut b = c;
        let mut i = 0usize;
        let mut j = rel.len() as isize - 1;
        loop {
            while (i as isize) <= j && self.table[f as usize][rel[i]] != NONE {
                f = self.table[f as usize][rel[i]];
                i += 1;
            }
            if (i as isize) > j {
                if f != b {
                    self.coincidence(f, b);
                }
                return Ok(());
            }
            while j >= i as isize && self.table[b as usize][rel[j as usize] ^ 1] != NONE {
                b = self.table[b as usize][rel[j as usize] ^ 1];
                j -= 1;
            }
            if j < i as isize {
                self.coincidence(f, b);
                return Ok(());
            }
            if j == i as isize {
                self.table[f as usize][rel[i]] = b;
                self.table[b as usize][rel[i] ^ 1] = f;
                return Ok(());
            }
            self.define(f, rel[i])?;
        }
    }
}

impl CosetTable {
    pub fn enumerate(rank: usize, relators: &[Word], coset_limit: usize) -> Result<CosetTable> {
        let cols = 2 * rank;
        let mut en = Enumerator {
            cols,
            table: vec![vec![NONE; cols]],
            parent: vec![0],
            limit: coset_limit.max(1),
        };
        let rels: Vec<Vec<usize>> = relators
            .iter()
            .map(|r| r.iter().map(|l| l.code() as usize).collect())
            .collect();
        let mut c = 0u32;
        while (c as usize) < en.table.len() {
            for rel in &rels {
                if !en.live(c) {
                    break;
                }
                en.scan_and_fill(c, rel)?;
            }
            for x in 0..cols {
                if !en.live(c) {
                    break;
                }
                if en.table[c as usize][x] == NONE {
                    en.define(c, x)?;
                }
            }
            c += 1;
        }

        // Compact the live cosets.
        let n = en.table.len();
        let mut new_id = vec![NONE; n];
        let mut live = Vec::new();
        for c in 0..n as u32 {
            if en.live(c) {
                new_id[c as usize] = live.len() as u32;
                live.push(c);
            }
        }
        let mut table = Vec::with_capacity(live.len());
        for &c in &live {
            let mut row = Vec::with_capacity(cols);
            for x in 0..cols {
                let t = en.table[c as usize][x];
                if t == NONE {
                    return Err(Error::resource("coset table incomplete after enumeration"));
                }
                let r = en.rep(t);
                row.push(new_id[r as usize]);
            }
            table.push(row);
        }

        // BFS in letter order: first discovery is by the shortlex-least word.
        let m = table.len();
        let mut dist = vec![u32::MAX; m];
        let mut canon = vec![Word::identity(); m];
        let mut order = Vec::with_capacity(m);
        dist[0] = 0;
        order.push(0u32);
        let mut head = 0;
        while head < order.len() {
            let c = order[head] as usize;
            head += 1;
            for x in 0..cols {
                let d = table[c][x] as usize;
                if dist[d] == u32::MAX {
                    dist[d] = dist[c] + 1;
                    let mut w = canon[c].clone();
                    w.push(Letter::from_code(x as u8));
                    canon[d] = w;
                    order.push(d as u32);
                }
            }
        }
        Ok(CosetTable {
            rank,
            table,
            dist,
            canon,
            order,
        })
    }

    pub fn rank(&self) -> usize {
        self.rank
    }

    pub fn order(&self) -> usize {
        self.table.len()
    }

    pub fn act(&self, coset: u32, l: Letter) -> u32 {
        self.table[coset as usize][l.code() as usize]
    }

    pub fn walk(&self, start: u32, letters: &[Letter]) -> u32 {
        letters.iter().fold(start, |c, &l| self.act(c, l))
    }

    pub fn distance(&self, coset: u32) -> u32 {
        self.dist[coset as usize]
    }

    pub fn canonical_word(&self, coset: u32) -> &Word {
        &self.canon[coset as usize]
    }

    /// Cosets in shortlex order of their canonical words.
    pub fn shortlex_order(&self) -> &[u32] {
        &self.order
    }
}
