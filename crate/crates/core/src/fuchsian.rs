//! Fuchsian groups acting on the upper half-plane, with exact integer
//! arithmetic for the modular group PSL(2, ℤ).

use std::cmp::Reverse;
use std::collections::{BTreeMap, BinaryHeap, HashMap, HashSet};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{GeomError, Result};
use crate::plane::{Mobius, PlaneGeodesic, PlanePoint};

/// Integer matrix of determinant 1 up to sign, with the first non-zero entry positive.
#[derive(Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Debug, Serialize, Deserialize)]
pub struct IntMat {
    pub a: i64,
    pub b: i64,
    pub c: i64,
    pub d: i64,
}

impl IntMat {
    pub const IDENTITY: IntMat = IntMat { a: 1, b: 0, c: 0, d: 1 };
    pub const S: IntMat = IntMat { a: 0, b: 1, c: -1, d: 0 };
    pub const T: IntMat = IntMat { a: 1, b: 1, c: 0, d: 1 };
    pub const R: IntMat = IntMat { a: 1, b: 1, c: 0, d: 1 };
    pub const L: IntMat = IntMat { a: 1, b: 0, c: 1, d: 1 };

    pub fn new(a: i64, b: i64, c: i64, d: i64) -> Result<IntMat> {
        if a * d - b * c != 1 {
            return Err(GeomError::Degenerate(format!("det of [[{a},{b}],[{c},{d}]] is not 1")));
        }
        Ok(IntMat { a, b, c, d }.canonical())
    }

    fn canonical(self) -> IntMat {
        let first = [self.a, self.b, self.c, self.d].into_iter().find(|v| *v != 0).unwrap_or(1);
        if first < 0 {
            IntMat { a: -self.a, b: -self.b, c: -self.c, d: -self.d }
        } else {
            self
        }
    }

    pub fn mul(&self, o: &IntMat) -> IntMat {
        IntMat {
            a: self.a * o.a + self.b * o.c,
            b: self.a * o.b + self.b * o.d,
            c: self.c * o.a + self.d * o.c,
            d: self.c * o.b + self.d * o.d,
        }
        .canonical()
    }

    /// Raw product without sign normalisation, for the positive monoid.
    fn mul_raw(&self, o: &IntMat) -> IntMat {
        IntMat {
            a: self.a * o.a + self.b * o.c,
            b: self.a * o.b + self.b * o.d,
            c: self.c * o.a + self.d * o.c,
            d: self.c * o.b + self.d * o.d,
        }
    }

    pub fn inverse(&self) -> IntMat {
        IntMat { a: self.d, b: -self.b, c: -self.c, d: self.a }.canonical()
    }

    pub fn trace(&self) -> i64 {
        self.a + self.d
    }

    pub fn to_mobius(&self) -> Mobius {
        Mobius::new(self.a as f64, self.b as f64, self.c as f64, self.d as f64).expect("det 1")
    }

    pub fn is_nonnegative(&self) -> bool {
        self.a >= 0 && self.b >= 0 && self.c >= 0 && self.d >= 0
    }

    /// The unique word in `R`, `L` for a non-negative matrix other than the identity.
    pub fn rl_word(&self) -> Option<String> {
        let mut m = if self.a < 0 || self.d < 0 { IntMat { a: -self.a, b: -self.b, c: -self.c, d: -self.d } } else { *self };
        if !m.is_nonnegative() {
            return None;
        }
        let mut word = String::new();
        while m != IntMat::IDENTITY {
            if m.a >= m.c && m.b >= m.d && (m.c, m.d) != (0, 0) && (m.a, m.b) != (m.c, m.d) {
                m = IntMat { a: m.a - m.c, b: m.b - m.d, c: m.c, d: m.d };
                word.push('R');
            } else if m.c >= m.a && m.d >= m.b {
                m = IntMat { a: m.a, b: m.b, c: m.c - m.a, d: m.d - m.b };
                word.push('L');
            } else {
                return None;
            }
        }
        Some(word)
    }
}

pub fn rl_product(word: &str) -> IntMat {
    word.chars().fold(IntMat::IDENTITY, |m, ch| m.mul_raw(if ch == 'R' { &IntMat::R } else { &IntMat::L }))
}

#[derive(Clone, Copy, PartialEq, Eq, Debug, Serialize, Deserialize)]
pub enum ElementType {
    Hyperbolic,
    Parabolic,
    Elliptic,
}

/// Translation length with the isometry type; `2 arccosh(|tr|/2)` for hyperbolic elements.
pub fn translation_length(m: &Mobius, eps_id: f64) -> Result<(f64, ElementType)> {
    if (m.a - 1.0).abs() < eps_id && m.b.abs() < eps_id && m.c.abs() < eps_id && (m.d - 1.0).abs() < eps_id {
        return Err(GeomError::Degenerate("identity has no translation length".into()));
    }
    let t = m.trace().abs();
    Ok(if (t - 2.0).abs() <= eps_id {
        (0.0, ElementType::Parabolic)
    } else if t < 2.0 {
        (0.0, ElementType::Elliptic)
    } else {
        (2.0 * (t / 2.0).acosh(), ElementType::Hyperbolic)
    })
}

/// Displacement `d(p, γ p)` from `‖A⁻¹ γ A‖_F² = 2 cosh d` with `A(i) = p`.
pub fn displacement_int(g: &IntMat, p: &PlanePoint) -> f64 {
    let (x, y) = (p.x, p.y);
    let (a, b, c, d) = (g.a as f64, g.b as f64, g.c as f64, g.d as f64);
    let m11 = a - x * c;
    let m12 = ((a * x + b) - x * (c * x + d)) / y;
    let m21 = y * c;
    let m22 = c * x + d;
    let f2 = m11 * m11 + m12 * m12 + m21 * m21 + m22 * m22;
    (f2 / 2.0).max(1.0).acosh()
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct FuchsianGroup {
    pub name: String,
    pub generators: Vec<Mobius>,
    pub dedup_tol: f64,
    /// Exact generators when the group is a subgroup of PSL(2, ℤ).
    pub integer_generators: Option<Vec<IntMat>>,
}

impl FuchsianGroup {
    pub fn modular() -> FuchsianGroup {
        let ints = vec![IntMat::S, IntMat::T];
        FuchsianGroup {
            name: "modular".into(),
            generators: ints.iter().map(IntMat::to_mobius).collect(),
            dedup_tol: 1e-9,
            integer_generators: Some(ints),
        }
    }

    pub fn from_generators(gens: &[[f64; 4]], dedup_tol: f64) -> Result<FuchsianGroup> {
        let generators: Vec<Mobius> = gens.iter().map(|g| Mobius::new(g[0], g[1], g[2], g[3])).collect::<Result<_>>()?;
        for (i, g) in generators.iter().enumerate() {
            for h in &generators[..i] {
                if mobius_key(g, dedup_tol) == mobius_key(h, dedup_tol) {
                    return Err(GeomError::Precondition("generators coincide within the dedup tolerance".into()));
                }
            }
        }
        let integral = gens.iter().all(|g| g.iter().all(|v| v.fract() == 0.0));
        let integer_generators = if integral {
            Some(gens.iter().map(|g| IntMat::new(g[0] as i64, g[1] as i64, g[2] as i64, g[3] as i64)).collect::<Result<_>>()?)
        } else {
            None
        };
        Ok(FuchsianGroup { name: "custom".into(), generators, dedup_tol, integer_generators })
    }

    fn symmetric_generators(&self) -> Vec<Mobius> {
        let mut out: Vec<Mobius> = Vec::new();
        for g in &self.generators {
            for h in [*g, g.inverse()] {
                if !out.iter().any(|o| mobius_key(o, self.dedup_tol) == mobius_key(&h, self.dedup_tol)) {
                    out.push(h);
                }
            }
        }
        out
    }
}

fn mobius_key(m: &Mobius, tol: f64) -> [i64; 4] {
    [m.a, m.b, m.c, m.d].map(|v| (v / tol).round() as i64)
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct GroupBall {
    pub elements: Vec<Mobius>,
    pub displacements: Vec<f64>,
    pub complete: bool,
    /// How completeness was decided.
    pub certificate: String,
}

impl GroupBall {
    pub fn len(&self) -> usize {
        self.elements.len()
    }

    pub fn is_empty(&self) -> bool {
        self.elements.is_empty()
    }
}

/// Elements with `d(p, γ p) <= radius` reachable by words of length
/// `<= max_word_len`, deduplicated by canonical matrix key.
pub fn group_ball(g: &FuchsianGroup, p: &PlanePoint, radius: f64, max_word_len: usize) -> Result<GroupBall> {
    if !(radius > 0.0) {
        return Err(GeomError::Precondition("ball radius must be positive".into()));
    }
    let gens = g.symmetric_generators();
    let mut seen: HashSet<[i64; 4]> = HashSet::new();
    seen.insert(mobius_key(&Mobius::IDENTITY, g.dedup_tol));
    let mut frontier = vec![Mobius::IDENTITY];
    let mut inside: BTreeMap<[i64; 4], (Mobius, f64)> = BTreeMap::new();
    inside.insert(mobius_key(&Mobius::IDENTITY, g.dedup_tol), (Mobius::IDENTITY, 0.0));
    let mut last_layer_added = 1usize;
    for _ in 0..max_word_len {
        let mut next = Vec::new();
        last_layer_added = 0;
        for m in &frontier {
            for s in &gens {
                let h = m.mul(s);
                let key = mobius_key(&h, g.dedup_tol);
                if seen.insert(key) {
                    let d = p.dist(&h.apply(p));
                    if d <= radius {
                        inside.insert(key, (h, d));
                        last_layer_added += 1;
                    }
                    next.push(h);
                }
            }
        }
        frontier = next;
    }
    let (complete, certificate) = match &g.integer_generators {
        Some(_) if g.name == "modular" => {
            let exact = lattice_ball(p, radius).len();
            (exact == inside.len(), format!("compared with exact lattice enumeration ({exact} elements)"))
        }
        _ => (
            last_layer_added == 0,
            "heuristic: last word-length layer added no element inside the ball".to_string(),
        ),
    };
    let (elements, displacements) = inside.into_values().unzip();
    Ok(GroupBall { elements, displacements, complete, certificate })
}

fn ext_gcd(a: i64, b: i64) -> (i64, i64, i64) {
    if b == 0 {
        (a, 1, 0)
    } else {
        let (g, x, y) = ext_gcd(b, a % b);
        (g, y, x - (a / b) * y)
    }
}

/// Every element of PSL(2, ℤ) with `d(p, γ p) <= radius`, with its
/// displacement, found by solving `‖A⁻¹ γ A‖_F² <= 2 cosh R` over the
/// integer lattice. Sorted by matrix for determinism.
pub fn lattice_ball(p: &PlanePoint, radius: f64) -> Vec<(IntMat, f64)> {
    let k = 2.0 * radius.cosh() * (1.0 + 1e-12);
    let sk = k.sqrt();
    let (x, y) = (p.x, p.y);
    let c_max = (sk / y).floor() as i64;
    let mut out: Vec<(IntMat, f64)> = (0..=c_max)
        .into_par_iter()
        .flat_map_iter(|c| {
            let mut found = Vec::new();
            let cf = c as f64;
            if c == 0 {
                // γ = [[1, b], [0, 1]]: ‖·‖² = 2 + (b/y)²
                let b_max = (y * (k - 2.0).max(0.0).sqrt()).floor() as i64;
                for b in -b_max..=b_max {
                    let g = IntMat { a: 1, b, c: 0, d: 1 }.canonical();
                    let d = displacement_int(&g, p);
                    if d <= radius {
                        found.push((g, d));
                    }
                }
                return found;
            }
            let rest = k - (y * cf).powi(2);
            if rest < 0.0 {
                return found;
            }
            let sr = rest.sqrt();
            let d_lo = (-cf * x - sr).ceil() as i64;
            let d_hi = (-cf * x + sr).floor() as i64;
            for d in d_lo..=d_hi {
                let (gcd, inv, _) = ext_gcd(d.rem_euclid(c), c);
                if gcd != 1 && c != 1 {
                    continue;
                }
                // a ≡ d⁻¹ (mod c); with c = 1 every a works
                let a0 = if c == 1 { 0 } else { inv.rem_euclid(c) };
                let rest_a = rest - (cf * x + d as f64).powi(2);
                if rest_a < 0.0 {
                    continue;
                }
                let sa = rest_a.sqrt();
                let a_lo = (x * cf - sa).ceil() as i64;
                let a_hi = (x * cf + sa).floor() as i64;
                let mut a = a_lo + (a0 - a_lo).rem_euclid(c);
                while a <= a_hi {
                    let b = (a * d - 1) / c;
                    let g = IntMat { a, b, c, d }.canonical();
                    let disp = displacement_int(&g, p);
                    if disp <= radius {
                        found.push((g, disp));
                    }
                    a += c;
                }
            }
            found
        })
        .collect();
    out.sort_by(|u, v| u.0.cmp(&v.0));
    out
}

/// A primitive hyperbolic conjugacy class of PSL(2, ℤ).
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ConjClass {
    /// Rotation-minimal cyclic word in `L < R`.
    pub word: String,
    pub matrix: IntMat,
    pub trace: i64,
    pub length: f64,
    pub primitive: bool,
}

fn is_least_rotation(w: &[u8]) -> bool {
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

fn is_primitive_block(w: &[u8]) -> bool {
    let n = w.len();
    !(1..n).any(|p| n % p == 0 && (0..n).all(|i| w[i] == w[(i + p) % n]))
}

pub fn trace_bound(t: f64) -> i64 {
    (2.0 * (t / 2.0).cosh() + 1e-9).floor() as i64
}

/// Primitive hyperbolic classes with `ℓ <= t`, as rotation-canonical cyclic
/// words in `L`, `R` containing both letters, sorted by `(ℓ, word)`.
pub fn enumerate_conj_classes_modular(t: f64) -> Vec<ConjClass> {
    let bound = trace_bound(t);
    let mut out = Vec::new();
    let mut word = vec![b'L'];
    fn rec(word: &mut Vec<u8>, m: IntMat, bound: i64, out: &mut Vec<ConjClass>) {
        let has_r = word.contains(&b'R');
        let lower = if has_r { m.trace() } else { m.mul_raw(&IntMat::R).trace() };
        if lower > bound {
            return;
        }
        if has_r && is_least_rotation(word) && is_primitive_block(word) {
            let tr = m.trace();
            out.push(ConjClass {
                word: String::from_utf8(word.clone()).unwrap(),
                matrix: m,
                trace: tr,
                length: 2.0 * (tr as f64 / 2.0).acosh(),
                primitive: true,
            });
        }
        for (ch, g) in [(b'L', IntMat::L), (b'R', IntMat::R)] {
            word.push(ch);
            rec(word, m.mul_raw(&g), bound, out);
            word.pop();
        }
    }
    rec(&mut word, IntMat::L, bound, &mut out);
    out.retain(|c| c.length <= t);
    out.sort_by(|a, b| (a.trace, &a.word).cmp(&(b.trace, &b.word)));
    out
}

fn swap_sign_positive_trace(m: IntMat) -> IntMat {
    if m.trace() < 0 {
        IntMat { a: -m.a, b: -m.b, c: -m.c, d: -m.d }
    } else {
        m
    }
}

/// A conjugate of a hyperbolic element with non-negative entries, found by
/// best-first search over conjugation by `S` and `T^{±1}`.
pub fn positive_conjugate(m: &IntMat) -> Result<IntMat> {
    if m.trace().abs() <= 2 {
        return Err(GeomError::Precondition("element is not hyperbolic".into()));
    }
    let start = swap_sign_positive_trace(*m);
    let size = |x: &IntMat| x.a.abs() + x.b.abs() + x.c.abs() + x.d.abs();
    let mut heap = BinaryHeap::new();
    let mut seen = HashSet::new();
    heap.push(Reverse((size(&start), start)));
    seen.insert(start);
    let conj = [IntMat::S, IntMat::T, IntMat::T.inverse()];
    while let Some(Reverse((_, x))) = heap.pop() {
        if x.is_nonnegative() {
            return Ok(x);
        }
        if seen.len() > 200_000 {
            break;
        }
        for g in &conj {
            let raw = g.mul_raw(&x).mul_raw(&g.inverse());
            let y = swap_sign_positive_trace(raw);
            if seen.insert(y) {
                heap.push(Reverse((size(&y), y)));
            }
        }
    }
    Err(GeomError::Incomplete("no non-negative conjugate found".into()))
}

/// Primitivity through the cyclic `R`/`L` word of a positive conjugate.
pub fn is_primitive_modular(m: &IntMat) -> Result<bool> {
    let p = positive_conjugate(m)?;
    let w = p.rl_word().ok_or_else(|| GeomError::Degenerate("positive matrix without RL word".into()))?;
    Ok(is_primitive_block(w.as_bytes()))
}

/// Axis of a hyperbolic element as a line from its repelling to its
/// attracting fixed point, with the translation length as period.
pub fn closed_geodesic(m: &Mobius) -> Result<(PlaneGeodesic, f64)> {
    let (len, kind) = translation_length(m, 1e-9)?;
    if kind != ElementType::Hyperbolic {
        return Err(GeomError::Precondition(format!("{kind:?} element has no axis")));
    }
    let (rep, att) = m.hyperbolic_fixed_points()?;
    Ok((PlaneGeodesic::line(&rep, &att)?, len))
}

/// Matrix-level census: orbits of non-negative matrices under the rotation
/// `M = X N ↦ N X`, grouped with a union-find. Returns per-trace counts of
/// primitive classes. Used as an oracle for the word census.
pub fn matrix_class_census(max_trace: i64) -> BTreeMap<i64, usize> {
    let mut mats = Vec::new();
    for t in 3..=max_trace {
        for a in 0..=t {
            let d = t - a;
            let bc = a * d - 1;
            if bc < 0 {
                continue;
            }
            for b in 0..=bc.max(0) {
                if b == 0 {
                    continue;
                }
                if bc % b == 0 {
                    mats.push(IntMat { a, b, c: bc / b, d });
                }
            }
        }
    }
    let index: HashMap<IntMat, usize> = mats.iter().enumerate().map(|(i, m)| (*m, i)).collect();
    let mut parent: Vec<usize> = (0..mats.len()).collect();
    fn find(p: &mut [usize], i: usize) -> usize {
        let mut r = i;
        while p[r] != r {
            r = p[r];
        }
        let mut j = i;
        while p[j] != r {
            let n = p[j];
            p[j] = r;
            j = n;
        }
        r
    }
    let mut letters = vec![0usize; mats.len()];
    for (i, m) in mats.iter().enumerate() {
        let (first, rest) = if m.a >= m.c && m.b >= m.d {
            (IntMat::R, IntMat { a: m.a - m.c, b: m.b - m.d, c: m.c, d: m.d })
        } else {
            (IntMat::L, IntMat { a: m.a, b: m.b, c: m.c - m.a, d: m.d - m.b })
        };
        let rotated = rest.mul_raw(&first);
        let j = index[&rotated];
        let (ri, rj) = (find(&mut parent, i), find(&mut parent, j));
        parent[ri] = rj;
        letters[i] = rl_product_len(m);
    }
    let mut orbit_size: HashMap<usize, (usize, usize, i64)> = HashMap::new();
    for i in 0..mats.len() {
        let r = find(&mut parent, i);
        let e = orbit_size.entry(r).or_insert((0, letters[i], mats[i].trace()));
        e.0 += 1;
    }
    let mut out = BTreeMap::new();
    for (size, len, tr) in orbit_size.into_values() {
        if size == len {
            *out.entry(tr).or_insert(0) += 1;
        }
    }
    out
}

fn rl_product_len(m: &IntMat) -> usize {
    let mut m = *m;
    let mut n = 0;
    while m != IntMat::IDENTITY {
        if m.a >= m.c && m.b >= m.d && (m.a, m.b) != (m.c, m.d) && m.c + m.d > 0 {
            m = IntMat { a: m.a - m.c, b: m.b - m.d, c: m.c, d: m.d };
        } else {
            m = IntMat { a: m.a, b: m.b, c: m.c - m.a, d: m.d - m.b };
        }
        n += 1;
    }
    n
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn translation_length_examples() {
        let m = Mobius::new(2.0, 1.0, 1.0, 1.0).unwrap();
        let (l, k) = translation_length(&m, 1e-9).unwrap();
        assert_abs_diff_eq!(l, 1.9248473002384139, epsilon = 1e-14);
        assert_eq!(k, ElementType::Hyperbolic);
        let t = Mobius::new(1.0, 1.0, 0.0, 1.0).unwrap();
        assert_eq!(translation_length(&t, 1e-9).unwrap(), (0.0, ElementType::Parabolic));
        assert!(translation_length(&Mobius::IDENTITY, 1e-9).is_err());
    }

    /// ℓ(m) against the infimum of d(x, m x) over a fine grid around the axis.
    #[test]
    fn translation_length_matches_grid_infimum() {
        let mut rng = ChaCha8Rng::seed_from_u64(21);
        for _ in 0..10 {
            let m = Mobius::new(rng.gen_range(1.0..4.0), rng.gen_range(-2.0..2.0), rng.gen_range(-2.0..2.0), rng.gen_range(1.0..3.0));
            let Ok(m) = m else { continue };
            let Ok((l, ElementType::Hyperbolic)) = translation_length(&m, 1e-9) else { continue };
            let (axis, _) = closed_geodesic(&m).unwrap();
            let centre = axis.point_unchecked(0.0);
            let mut best = f64::INFINITY;
            for i in -200..=200 {
                for j in -200..=200 {
                    let z = PlanePoint { x: centre.x + i as f64 * 1e-3 * centre.y, y: centre.y * (j as f64 * 1e-3).exp() };
                    best = best.min(z.dist(&m.apply(&z)));
                }
            }
            assert!((best - l).abs() < 1e-4, "{best} vs {l}");
        }
    }

    #[test]
    fn apply_is_an_isometry() {
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        for _ in 0..10_000 {
            let m = Mobius::new(rng.gen_range(-3.0..3.0), rng.gen_range(-3.0..3.0), rng.gen_range(-3.0..3.0), rng.gen_range(-3.0..3.0));
            let Ok(m) = m else { continue };
            let p = crate::plane::sample_in_ball(&mut rng, 3.0);
            let q = crate::plane::sample_in_ball(&mut rng, 3.0);
            assert!((m.apply(&p).dist(&m.apply(&q)) - p.dist(&q)).abs() < 1e-9);
        }
    }

    #[test]
    fn integer_conjugation_preserves_trace() {
        let m = IntMat::new(2, 1, 1, 1).unwrap();
        for (g, _) in lattice_ball(&PlanePoint { x: 0.0, y: 2.0 }, 5.0) {
            let c = g.mul(&m).mul(&g.inverse());
            assert_eq!(c.trace().abs(), 3);
        }
    }

    #[test]
    fn conj_class_examples() {
        assert!(enumerate_conj_classes_modular(1.9).is_empty());
        let two = enumerate_conj_classes_modular(2.0);
        assert_eq!(two.len(), 1);
        assert_eq!(two[0].word, "LR");
        assert_eq!(two[0].trace, 3);
        let c4 = enumerate_conj_classes_modular(4.0);
        assert!(c4.windows(2).all(|w| w[0].length <= w[1].length));
    }

    #[test]
    fn census_matches_matrix_oracle() {
        let t = 6.0;
        let classes = enumerate_conj_classes_modular(t);
        let oracle = matrix_class_census(trace_bound(t));
        let mut by_trace: BTreeMap<i64, usize> = BTreeMap::new();
        for c in &classes {
            *by_trace.entry(c.trace).or_insert(0) += 1;
        }
        assert_eq!(by_trace, oracle);
        // length cut-off coincides with the trace cut-off here
        assert_eq!(classes.len(), oracle.values().sum::<usize>());
    }

    #[test]
    fn census_is_stable_under_larger_bound() {
        let small = enumerate_conj_classes_modular(5.0);
        let large: Vec<ConjClass> = enumerate_conj_classes_modular(10.0).into_iter().filter(|c| c.length <= 5.0).collect();
        assert_eq!(small, large);
    }

    #[test]
    fn no_class_is_a_power_of_another() {
        let classes = enumerate_conj_classes_modular(7.0);
        for c in &classes {
            assert!(is_primitive_block(c.word.as_bytes()));
            assert_eq!(rl_product(&c.word), c.matrix);
        }
        let words: HashSet<&str> = classes.iter().map(|c| c.word.as_str()).collect();
        for c in &classes {
            for k in 2..4 {
                let p = c.word.repeat(k);
                assert!(!words.contains(p.as_str()));
            }
        }
    }

    #[test]
    fn primitivity_of_matrices() {
        let m = IntMat::new(2, 1, 1, 1).unwrap();
        assert_eq!(m.mul(&m), IntMat::new(5, 3, 3, 2).unwrap());
        assert!(!is_primitive_modular(&IntMat::new(5, 3, 3, 2).unwrap()).unwrap());
        assert!(is_primitive_modular(&m).unwrap());
        // a conjugate that is not itself non-negative
        let g = IntMat::S.mul(&IntMat::T);
        let conj = g.mul(&m.mul(&m)).mul(&g.inverse());
        assert!(!is_primitive_modular(&conj).unwrap());
    }

    #[test]
    fn closed_geodesic_examples() {
        let m = Mobius::new(2.0, 1.0, 1.0, 1.0).unwrap();
        let (axis, period) = closed_geodesic(&m).unwrap();
        assert_abs_diff_eq!(period, 1.9248473002384139, epsilon = 1e-12);
        for k in 0..10 {
            let t = -3.0 + 0.7 * k as f64;
            let moved = m.apply(&axis.point_unchecked(t));
            assert!(moved.dist(&axis.point_unchecked(t + period)) < 1e-8);
        }
        let r2l = rl_product("RRL");
        assert_eq!(r2l.trace(), 4);
        let (_, p) = closed_geodesic(&r2l.to_mobius()).unwrap();
        assert_abs_diff_eq!(p, 2.0 * 2f64.acosh(), epsilon = 1e-12);
        assert!(closed_geodesic(&IntMat::T.to_mobius()).is_err());
    }

    #[test]
    fn lattice_ball_matches_brute_force() {
        let p = PlanePoint { x: 0.0, y: 2.0 };
        let r = 4.0;
        let mut brute = Vec::new();
        for a in -40i64..=40 {
            for b in -40i64..=40 {
                for c in -40i64..=40 {
                    for d in -40i64..=40 {
                        if a * d - b * c != 1 {
                            continue;
                        }
                        let g = IntMat { a, b, c, d };
                        if g.canonical() != g {
                            continue;
                        }
                        if displacement_int(&g, &p) <= r {
                            brute.push(g);
                        }
                    }
                }
            }
        }
        brute.sort();
        let fast: Vec<IntMat> = lattice_ball(&p, r).into_iter().map(|x| x.0).collect();
        assert_eq!(fast, brute);
    }

    #[test]
    fn displacement_matches_direct_distance() {
        let p = PlanePoint { x: 0.3, y: 1.7 };
        for (g, d) in lattice_ball(&p, 5.0) {
            let direct = p.dist(&g.to_mobius().apply(&p));
            assert!((direct - d).abs() < 1e-9);
        }
    }

    #[test]
    fn word_ball_caps_agree_at_radius_two() {
        let g = FuchsianGroup::modular();
        let p = PlanePoint { x: 0.0, y: 2.0 };
        let b12 = group_ball(&g, &p, 2.0, 12).unwrap();
        let b16 = group_ball(&g, &p, 2.0, 16).unwrap();
        assert_eq!(b12.len(), b16.len());
        assert!(b16.complete);
        let tiny = group_ball(&g, &p, 0.1, 6).unwrap();
        assert_eq!(tiny.len(), 1);
    }
}
