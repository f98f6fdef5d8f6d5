//! The free group F_k acting on its Cayley tree.
//!
//! Vertices of the tree are freely reduced words; the group acts by left
//! multiplication and the word metric is the path metric of the tree, so every
//! quantity here is an exact integer or rational.

use std::fmt;

use num_rational::Ratio;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{GeomError, Result};

/// A generator or inverse generator. Code `2i` is `g_i`, `2i + 1` is `g_i^{-1}`.
#[derive(Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Debug, Serialize, Deserialize)]
pub struct Letter(u8);

impl Letter {
    pub fn generator(i: usize) -> Self {
        Letter((2 * i) as u8)
    }

    pub fn inverse_generator(i: usize) -> Self {
        Letter((2 * i + 1) as u8)
    }

    pub fn from_code(code: usize) -> Self {
        Letter(code as u8)
    }

    pub fn code(self) -> usize {
        self.0 as usize
    }

    pub fn generator_index(self) -> usize {
        (self.0 / 2) as usize
    }

    pub fn is_inverse(self) -> bool {
        self.0 % 2 == 1
    }

    pub fn inverse(self) -> Self {
        Letter(self.0 ^ 1)
    }

    /// Lowercase for generators, uppercase for inverses: `a`, `A`, `b`, `B`, ...
    pub fn to_char(self) -> char {
        let c = (b'a' + self.generator_index() as u8) as char;
        if self.is_inverse() {
            c.to_ascii_uppercase()
        } else {
            c
        }
    }

    pub fn from_char(c: char, rank: usize) -> Result<Self> {
        if !c.is_ascii_alphabetic() {
            return Err(GeomError::InvalidLetter(c, rank));
        }
        let i = (c.to_ascii_lowercase() as u8 - b'a') as usize;
        if i >= rank {
            return Err(GeomError::InvalidLetter(c, rank));
        }
        Ok(if c.is_ascii_uppercase() {
            Letter::inverse_generator(i)
        } else {
            Letter::generator(i)
        })
    }

    pub fn all(rank: usize) -> impl Iterator<Item = Letter> {
        (0..2 * rank).map(Letter::from_code)
    }
}

fn letters_to_string(letters: &[Letter]) -> String {
    letters.iter().map(|l| l.to_char()).collect()
}

fn parse_letters(s: &str, rank: usize) -> Result<Vec<Letter>> {
    s.chars()
        .filter(|c| !c.is_whitespace())
        .map(|c| Letter::from_char(c, rank))
        .collect()
}

pub(crate) fn is_reduced(letters: &[Letter]) -> bool {
    letters.windows(2).all(|w| w[1] != w[0].inverse())
}

/// A freely reduced word; also a vertex of the Cayley tree.
#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Debug, Default, Serialize, Deserialize)]
pub struct Word(Vec<Letter>);

impl Word {
    pub fn identity() -> Self {
        Word(Vec::new())
    }

    /// Parses an already reduced word. `"e"` and `""` denote the identity.
    pub fn parse(s: &str, rank: usize) -> Result<Self> {
        if s == "e" || s == "ε" {
            return Ok(Word::identity());
        }
        let letters = parse_letters(s, rank)?;
        if !is_reduced(&letters) {
            return Err(GeomError::Unreduced(s.to_string()));
        }
        Ok(Word(letters))
    }

    pub fn letters(&self) -> &[Letter] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn first(&self) -> Option<Letter> {
        self.0.first().copied()
    }

    pub fn last(&self) -> Option<Letter> {
        self.0.last().copied()
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
            .take_while(|(a, b)| **b == a.inverse())
            .count();
        let mut out = Vec::with_capacity(self.len() + other.len() - 2 * cancel);
        out.extend_from_slice(&self.0[..self.len() - cancel]);
        out.extend_from_slice(&other.0[cancel..]);
        Word(out)
    }

    pub fn push(&self, l: Letter) -> Word {
        self.mul(&Word(vec![l]))
    }

    pub fn prefix(&self, n: usize) -> Word {
        Word(self.0[..n.min(self.len())].to_vec())
    }

    pub fn starts_with(&self, other: &Word) -> bool {
        self.0.starts_with(&other.0)
    }

    pub fn pow(&self, n: usize) -> Word {
        (0..n).fold(Word::identity(), |acc, _| acc.mul(self))
    }

    /// Length of the longest common prefix.
    pub fn lcp(&self, other: &Word) -> usize {
        self.0
            .iter()
            .zip(other.0.iter())
            .take_while(|(a, b)| a == b)
            .count()
    }

    /// Tree distance `|u| + |v| - 2 lcp(u, v)`.
    pub fn dist(&self, other: &Word) -> u64 {
        (self.len() + other.len() - 2 * self.lcp(other)) as u64
    }
}

impl fmt::Display for Word {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.0.is_empty() {
            write!(f, "e")
        } else {
            write!(f, "{}", letters_to_string(&self.0))
        }
    }
}

/// Free reduction by a single stack pass.
pub fn reduce(letters: &[Letter]) -> Word {
    let mut out: Vec<Letter> = Vec::with_capacity(letters.len());
    for &l in letters {
        if out.last() == Some(&l.inverse()) {
            out.pop();
        } else {
            out.push(l);
        }
    }
    Word(out)
}

pub fn reduce_str(s: &str, rank: usize) -> Result<Word> {
    Ok(reduce(&parse_letters(s, rank)?))
}

fn least_rotation(letters: &[Letter]) -> Vec<Letter> {
    let n = letters.len();
    (0..n)
        .map(|r| {
            let mut v = letters[r..].to_vec();
            v.extend_from_slice(&letters[..r]);
            v
        })
        .min()
        .unwrap_or_default()
}

/// Smallest period `p | n` with `w` invariant under rotation by `p`.
fn primitive_period(letters: &[Letter]) -> usize {
    let n = letters.len();
    (1..=n)
        .find(|&p| n % p == 0 && (0..n).all(|i| letters[i] == letters[(i + p) % n]))
        .unwrap_or(n)
}

/// A conjugacy class of a non-trivial element: a cyclically reduced word up
/// to rotation, stored as its lexicographically least rotation.
#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Debug, Serialize, Deserialize)]
pub struct CyclicWord(Vec<Letter>);

impl CyclicWord {
    pub fn new(w: &Word) -> Result<Self> {
        if w.is_empty() {
            return Err(GeomError::Degenerate("identity has no conjugacy axis".into()));
        }
        if w.first() == w.last().map(Letter::inverse) {
            return Err(GeomError::Precondition(format!("{w} is not cyclically reduced")));
        }
        Ok(CyclicWord(least_rotation(w.letters())))
    }

    pub fn letters(&self) -> &[Letter] {
        &self.0
    }

    /// Translation length of the class.
    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn as_word(&self) -> Word {
        Word(self.0.clone())
    }

    /// Not a proper power `u^m`, `m >= 2`.
    pub fn is_primitive(&self) -> bool {
        primitive_period(&self.0) == self.0.len()
    }

    pub fn inverse(&self) -> CyclicWord {
        CyclicWord(least_rotation(self.as_word().inverse().letters()))
    }
}

impl fmt::Display for CyclicWord {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({})", letters_to_string(&self.0))
    }
}

/// Splits `w = c · u · c^{-1}` with `u` cyclically reduced. The translation
/// length of `w` on the tree is `|u|`.
pub fn cyclic_reduce(w: &Word) -> Result<(CyclicWord, Word)> {
    if w.is_empty() {
        return Err(GeomError::Degenerate("identity has no axis (translation length 0)".into()));
    }
    let l = w.letters();
    let n = l.len();
    let mut c = 0;
    while 2 * c + 1 < n && l[n - 1 - c] == l[c].inverse() {
        c += 1;
    }
    let core = Word(l[c..n - c].to_vec());
    Ok((CyclicWord::new(&core)?, Word(l[..c].to_vec())))
}

pub fn translation_length(w: &Word) -> usize {
    cyclic_reduce(w).map(|(c, _)| c.len()).unwrap_or(0)
}

/// `|S_n| = 2k (2k-1)^{n-1}` for `n >= 1`.
pub fn sphere_size(rank: usize, n: usize) -> u64 {
    if n == 0 {
        1
    } else {
        2 * rank as u64 * (2 * rank as u64 - 1).pow(n as u32 - 1)
    }
}

pub fn ball_size(rank: usize, r: usize) -> u64 {
    (0..=r).map(|n| sphere_size(rank, n)).sum()
}

fn first_valid(rank: usize, prev: Option<Letter>, from: usize) -> Option<Letter> {
    (from..2 * rank)
        .map(Letter::from_code)
        .find(|l| prev != Some(l.inverse()))
}

/// Streams all reduced words of length `<= radius`, each once, in
/// length-then-lexicographic order (letter order `a < A < b < B < ...`).
pub struct BallIter {
    rank: usize,
    radius: usize,
    current: Option<Vec<Letter>>,
}

impl BallIter {
    fn min_word(rank: usize, n: usize) -> Vec<Letter> {
        let mut v: Vec<Letter> = Vec::with_capacity(n);
        for _ in 0..n {
            let prev = v.last().copied();
            v.push(first_valid(rank, prev, 0).expect("rank >= 1"));
        }
        v
    }

    fn advance(&self, cur: &[Letter]) -> Option<Vec<Letter>> {
        let n = cur.len();
        let mut v = cur.to_vec();
        for pos in (0..n).rev() {
            let prev = if pos == 0 { None } else { Some(v[pos - 1]) };
            if let Some(next) = first_valid(self.rank, prev, v[pos].code() + 1) {
                v[pos] = next;
                for j in pos + 1..n {
                    v[j] = first_valid(self.rank, Some(v[j - 1]), 0).expect("rank >= 1");
                }
                return Some(v);
            }
        }
        if n < self.radius {
            Some(Self::min_word(self.rank, n + 1))
        } else {
            None
        }
    }
}

impl Iterator for BallIter {
    type Item = Word;

    fn next(&mut self) -> Option<Word> {
        let cur = self.current.take()?;
        self.current = self.advance(&cur);
        Some(Word(cur))
    }
}

pub fn ball_enumerate(rank: usize, radius: usize) -> BallIter {
    assert!(rank >= 1, "free group rank must be positive");
    BallIter { rank, radius, current: Some(Vec::new()) }
}

/// Depth-first visit of every reduced word extending `prefix` up to total
/// length `max_len` (prefix included).
pub fn visit_extensions<F: FnMut(&[Letter])>(rank: usize, prefix: &[Letter], max_len: usize, f: &mut F) {
    let mut buf = prefix.to_vec();
    fn rec<F: FnMut(&[Letter])>(rank: usize, buf: &mut Vec<Letter>, max_len: usize, f: &mut F) {
        f(buf);
        if buf.len() == max_len {
            return;
        }
        let prev = buf.last().copied();
        for l in Letter::all(rank) {
            if prev == Some(l.inverse()) {
                continue;
            }
            buf.push(l);
            rec(rank, buf, max_len, f);
            buf.pop();
        }
    }
    rec(rank, &mut buf, max_len, f);
}

/// Sphere counts `|S_0|, ..., |S_R|` by streamed enumeration, partitioned by
/// first letter across the rayon pool and merged by summation.
pub fn sphere_counts_streamed(rank: usize, radius: usize) -> Vec<u64> {
    let mut counts = vec![0u64; radius + 1];
    counts[0] = 1;
    if radius == 0 {
        return counts;
    }
    let partial: Vec<Vec<u64>> = Letter::all(rank)
        .collect::<Vec<_>>()
        .into_par_iter()
        .map(|l| {
            let mut c = vec![0u64; radius + 1];
            visit_extensions(rank, &[l], radius, &mut |w| c[w.len()] += 1);
            c
        })
        .collect();
    for c in partial {
        for (acc, v) in counts.iter_mut().zip(c) {
            *acc += v;
        }
    }
    counts
}

/// An eventually periodic infinite reduced word `prefix · cycle^∞`: a point of
/// the tree boundary seen from the identity.
#[derive(Clone, PartialEq, Eq, Hash, Debug, Serialize, Deserialize)]
pub struct TreeEnd {
    prefix: Vec<Letter>,
    cycle: Vec<Letter>,
}

impl TreeEnd {
    pub fn new(prefix: Vec<Letter>, cycle: Vec<Letter>) -> Result<Self> {
        if cycle.is_empty() {
            return Err(GeomError::Degenerate("empty continuation cycle".into()));
        }
        let mut doubled = cycle.clone();
        doubled.extend_from_slice(&cycle);
        if !is_reduced(&doubled) {
            return Err(GeomError::Unreduced(format!("cycle {}", letters_to_string(&cycle))));
        }
        let mut joined = prefix.clone();
        joined.push(cycle[0]);
        if !is_reduced(&joined) {
            return Err(GeomError::Unreduced(format!(
                "{}({})",
                letters_to_string(&prefix),
                letters_to_string(&cycle)
            )));
        }
        let mut end = TreeEnd { prefix, cycle };
        end.normalize();
        Ok(end)
    }

    /// Parses `"ab(a)"` as `a b a a a ...`; `"(Ab)"` is purely periodic.
    pub fn parse(s: &str, rank: usize) -> Result<Self> {
        let open = s.find('(').ok_or_else(|| GeomError::Degenerate(format!("missing cycle in {s}")))?;
        let close = s.rfind(')').ok_or_else(|| GeomError::Degenerate(format!("missing ')' in {s}")))?;
        let prefix = parse_letters(&s[..open], rank)?;
        let cycle = parse_letters(&s[open + 1..close], rank)?;
        if !is_reduced(&prefix) {
            return Err(GeomError::Unreduced(s.to_string()));
        }
        TreeEnd::new(prefix, cycle)
    }

    /// `w · x^∞` for the smallest letter `x` that does not cancel against `w`.
    pub fn continuing(w: &Word, rank: usize) -> TreeEnd {
        let x = first_valid(rank, w.last(), 0).expect("rank >= 1");
        TreeEnd::new(w.letters().to_vec(), vec![x]).expect("non-cancelling continuation")
    }

    fn normalize(&mut self) {
        let p = primitive_period(&self.cycle);
        self.cycle.truncate(p);
        while let Some(&last) = self.prefix.last() {
            if last != *self.cycle.last().unwrap() {
                break;
            }
            self.prefix.pop();
            self.cycle.rotate_right(1);
        }
    }

    pub fn letter(&self, i: usize) -> Letter {
        if i < self.prefix.len() {
            self.prefix[i]
        } else {
            self.cycle[(i - self.prefix.len()) % self.cycle.len()]
        }
    }

    pub fn take(&self, n: usize) -> Word {
        Word((0..n).map(|i| self.letter(i)).collect())
    }

    fn agreement_horizon(&self, other: &TreeEnd) -> usize {
        self.prefix.len().max(other.prefix.len()) + self.cycle.len() * other.cycle.len()
    }

    /// Longest common prefix with another end; `None` when they are equal.
    pub fn lcp(&self, other: &TreeEnd) -> Option<usize> {
        let horizon = self.agreement_horizon(other);
        (0..horizon).find(|&i| self.letter(i) != other.letter(i))
    }

    pub fn lcp_word(&self, w: &Word) -> usize {
        w.letters()
            .iter()
            .enumerate()
            .take_while(|(i, l)| self.letter(*i) == **l)
            .count()
    }

    /// The end `g · ξ`.
    pub fn left_mul(&self, g: &Word) -> TreeEnd {
        let head = self.take(self.prefix.len() + g.len() + 1);
        let phase = head.len() - self.prefix.len();
        let mut cycle = self.cycle.clone();
        cycle.rotate_left(phase % self.cycle.len());
        let moved = g.mul(&head);
        TreeEnd::new(moved.0, cycle).expect("cancellation never reaches the cycle")
    }

    pub fn prefix_letters(&self) -> &[Letter] {
        &self.prefix
    }

    pub fn cycle_letters(&self) -> &[Letter] {
        &self.cycle
    }

    pub fn in_cylinder(&self, u: &Word) -> bool {
        self.lcp_word(u) == u.len()
    }
}

impl fmt::Display for TreeEnd {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}({})", letters_to_string(&self.prefix), letters_to_string(&self.cycle))
    }
}

/// Exact rational arithmetic used by the tree oracles.
pub type Rational = Ratio<i128>;

/// Limiting visual measure of the cylinder of ends starting with `prefix`,
/// seen from the identity: `(1/2k) (1/(2k-1))^{|prefix|-1}`.
pub fn boundary_cylinder_measure(rank: usize, prefix: &Word) -> Result<Rational> {
    if prefix.is_empty() {
        return Err(GeomError::Precondition("cylinder prefix must be non-empty".into()));
    }
    if let Some(l) = prefix.letters().iter().find(|l| l.generator_index() >= rank) {
        return Err(GeomError::InvalidLetter(l.to_char(), rank));
    }
    let q = 2 * rank as i128 - 1;
    Ok(Rational::new(1, 2 * rank as i128 * q.pow(prefix.len() as u32 - 1)))
}

/// All cylinders of a fixed depth: they partition the boundary.
pub fn cylinders(rank: usize, depth: usize) -> Vec<Word> {
    let mut out = Vec::with_capacity(sphere_size(rank, depth) as usize);
    for l in Letter::all(rank) {
        visit_extensions(rank, &[l], depth, &mut |w| {
            if w.len() == depth {
                out.push(Word(w.to_vec()));
            }
        });
    }
    out
}

pub fn children(rank: usize, u: &Word) -> Vec<Word> {
    Letter::all(rank)
        .filter(|l| u.last() != Some(l.inverse()))
        .map(|l| u.push(l))
        .collect()
}

/// Busemann function `b_p(q, ξ) = lim d(q, z) - d(p, z)` as `z → ξ`.
pub fn busemann(q: &Word, p: &Word, xi: &TreeEnd) -> i64 {
    let side = |w: &Word| w.len() as i64 - 2 * xi.lcp_word(w) as i64;
    side(q) - side(p)
}

/// Direction of travel out of a vertex: finite (segment) or an end (ray).
#[derive(Clone, PartialEq, Eq, Debug, Serialize, Deserialize)]
pub enum Heading {
    Finite(Word),
    Infinite(TreeEnd),
}

impl Heading {
    fn letter(&self, i: usize) -> Option<Letter> {
        match self {
            Heading::Finite(w) => w.letters().get(i).copied(),
            Heading::Infinite(e) => Some(e.letter(i)),
        }
    }

    fn take(&self, n: usize) -> Result<Word> {
        match self {
            Heading::Finite(w) if n <= w.len() => Ok(w.prefix(n)),
            Heading::Finite(w) => Err(GeomError::OutsideDomain { t: n as f64, lo: 0.0, hi: w.len() as f64 }),
            Heading::Infinite(e) => Ok(e.take(n)),
        }
    }

    fn extent(&self) -> f64 {
        match self {
            Heading::Finite(w) => w.len() as f64,
            Heading::Infinite(_) => f64::INFINITY,
        }
    }
}

/// Unit-speed tree geodesic through `origin` at time 0, running along
/// `forward` for `t > 0` and along `backward` for `t < 0`.
#[derive(Clone, PartialEq, Eq, Debug, Serialize, Deserialize)]
pub struct TreeGeodesic {
    pub origin: Word,
    pub forward: Heading,
    pub backward: Heading,
}

impl TreeGeodesic {
    pub fn segment(p: &Word, q: &Word) -> TreeGeodesic {
        TreeGeodesic {
            origin: p.clone(),
            forward: Heading::Finite(p.inverse().mul(q)),
            backward: Heading::Finite(Word::identity()),
        }
    }

    pub fn ray(p: &Word, xi: &TreeEnd) -> TreeGeodesic {
        TreeGeodesic {
            origin: p.clone(),
            forward: Heading::Infinite(xi.left_mul(&p.inverse())),
            backward: Heading::Finite(Word::identity()),
        }
    }

    pub fn line(xi: &TreeEnd, eta: &TreeEnd) -> Result<TreeGeodesic> {
        let m = xi.lcp(eta).ok_or(GeomError::SameEndpoints)?;
        let origin = xi.take(m);
        let inv = origin.inverse();
        Ok(TreeGeodesic {
            origin,
            forward: Heading::Infinite(eta.left_mul(&inv)),
            backward: Heading::Infinite(xi.left_mul(&inv)),
        })
    }

    pub fn domain(&self) -> (f64, f64) {
        (-self.backward.extent(), self.forward.extent())
    }

    pub fn at(&self, t: i64) -> Result<Word> {
        if t >= 0 {
            Ok(self.origin.mul(&self.forward.take(t as usize)?))
        } else {
            Ok(self.origin.mul(&self.backward.take((-t) as usize)?))
        }
    }

    pub fn point(&self, t: f64) -> Result<Word> {
        if t.fract() != 0.0 {
            return Err(GeomError::NonIntegerTime(t));
        }
        self.at(t as i64)
    }

    /// Time-`s` reparametrisation `t ↦ c(t + s)`.
    pub fn shifted(&self, s: i64) -> Result<TreeGeodesic> {
        if s == 0 {
            return Ok(self.clone());
        }
        let origin = self.at(s)?;
        let step = |h: &Heading, from: usize| -> Heading {
            match h {
                Heading::Finite(w) => Heading::Finite(Word(w.letters()[from..].to_vec())),
                Heading::Infinite(e) => Heading::Infinite(e.left_mul(&e.take(from).inverse())),
            }
        };
        let reverse_then = |walked: Word, rest: &Heading| -> Heading {
            let back = walked.inverse();
            match rest {
                Heading::Finite(w) => Heading::Finite(back.mul(w)),
                Heading::Infinite(e) => Heading::Infinite(e.left_mul(&back)),
            }
        };
        if s > 0 {
            let walked = self.forward.take(s as usize)?;
            Ok(TreeGeodesic {
                origin,
                forward: step(&self.forward, s as usize),
                backward: reverse_then(walked, &self.backward),
            })
        } else {
            let walked = self.backward.take((-s) as usize)?;
            Ok(TreeGeodesic {
                origin,
                forward: reverse_then(walked, &self.forward),
                backward: step(&self.backward, (-s) as usize),
            })
        }
    }

    /// Letter of the forward heading at step `i` (0-based), if any.
    pub fn forward_letter(&self, i: usize) -> Option<Letter> {
        self.forward.letter(i)
    }

    pub fn backward_letter(&self, i: usize) -> Option<Letter> {
        self.backward.letter(i)
    }
}

/// Every primitive conjugacy class of translation length `<= max_len`, as
/// canonical cyclic words sorted by `(length, letters)`. Classes are oriented:
/// `w` and `w^{-1}` are counted separately.
pub fn primitive_classes(rank: usize, max_len: usize) -> Vec<CyclicWord> {
    let firsts: Vec<Letter> = Letter::all(rank).collect();
    let mut out: Vec<CyclicWord> = firsts
        .into_par_iter()
        .flat_map_iter(|l| {
            let mut found = Vec::new();
            visit_extensions(rank, &[l], max_len, &mut |w| {
                let cyclic_ok = w.len() == 1 || w[w.len() - 1] != w[0].inverse();
                if cyclic_ok && is_least_rotation(w) && primitive_period(w) == w.len() {
                    found.push(CyclicWord(w.to_vec()));
                }
            });
            found
        })
        .collect();
    out.sort_by(|a, b| (a.len(), &a.0).cmp(&(b.len(), &b.0)));
    out
}

fn is_least_rotation(w: &[Letter]) -> bool {
    let n = w.len();
    (1..n).all(|r| {
        for i in 0..n {
            let x = w[(i + r) % n];
            if x != w[i] {
                return x > w[i];
            }
        }
        true
    })
}
