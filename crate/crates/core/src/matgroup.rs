//! Exhaustive group theory inside `GL_2(F_ℓ)` for small `ℓ`.
//!
//! Everything here enumerates group elements explicitly, so the supported
//! primes are `3 <= ℓ <= 13` (`|GL_2(F_13)| = 26208`).

use std::collections::VecDeque;
use std::fmt;

use serde::{Serialize, Serializer};

use crate::error::{Error, Result};
use crate::primes::{is_prime, mod_pow};
use crate::traces::legendre;
use crate::Rational;

pub const MAX_ELL: u32 = 13;
/// Largest group the cocycle solver accepts.
pub const COCYCLE_BUDGET: usize = 2500;

/// `[[a, b], [c, d]]` with entries reduced mod ℓ. Ordering is lexicographic
/// on `(a, b, c, d)`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Mat2 {
    pub a: u32,
    pub b: u32,
    pub c: u32,
    pub d: u32,
}

impl Serialize for Mat2 {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        [[self.a, self.b], [self.c, self.d]].serialize(s)
    }
}

impl fmt::Display for Mat2 {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "[[{},{}],[{},{}]]", self.a, self.b, self.c, self.d)
    }
}

#[inline]
fn red(x: i64, ell: u32) -> u32 {
    x.rem_euclid(ell as i64) as u32
}

fn inv_mod(x: u32, ell: u32) -> u32 {
    mod_pow(x as u64, ell as u64 - 2, ell as u64) as u32
}

impl Mat2 {
    pub fn new(a: i64, b: i64, c: i64, d: i64, ell: u32) -> Self {
        Self {
            a: red(a, ell),
            b: red(b, ell),
            c: red(c, ell),
            d: red(d, ell),
        }
    }

    pub fn identity() -> Self {
        Self { a: 1, b: 0, c: 0, d: 1 }
    }

    pub fn scalar(k: i64, ell: u32) -> Self {
        Self::new(k, 0, 0, k, ell)
    }

    pub fn mul(&self, o: &Mat2, ell: u32) -> Mat2 {
        let m = ell as u64;
        let (a, b, c, d) = (self.a as u64, self.b as u64, self.c as u64, self.d as u64);
        let (e, f, g, h) = (o.a as u64, o.b as u64, o.c as u64, o.d as u64);
        Mat2 {
            a: ((a * e + b * g) % m) as u32,
            b: ((a * f + b * h) % m) as u32,
            c: ((c * e + d * g) % m) as u32,
            d: ((c * f + d * h) % m) as u32,
        }
    }

    pub fn det(&self, ell: u32) -> u32 {
        red(self.a as i64 * self.d as i64 - self.b as i64 * self.c as i64, ell)
    }

    pub fn trace(&self, ell: u32) -> u32 {
        (self.a + self.d) % ell
    }

    pub fn inverse(&self, ell: u32) -> Option<Mat2> {
        let det = self.det(ell);
        if det == 0 {
            return None;
        }
        let k = inv_mod(det, ell) as i64;
        Some(Mat2::new(
            self.d as i64 * k,
            -(self.b as i64) * k,
            -(self.c as i64) * k,
            self.a as i64 * k,
            ell,
        ))
    }

    pub fn minus_identity(&self, ell: u32) -> Mat2 {
        Mat2::new(self.a as i64 - 1, self.b as i64, self.c as i64, self.d as i64 - 1, ell)
    }

    pub fn apply(&self, v: [u32; 2], ell: u32) -> [u32; 2] {
        let m = ell as u64;
        [
            ((self.a as u64 * v[0] as u64 + self.b as u64 * v[1] as u64) % m) as u32,
            ((self.c as u64 * v[0] as u64 + self.d as u64 * v[1] as u64) % m) as u32,
        ]
    }

    /// Rank of the matrix over `F_ℓ` (0, 1 or 2).
    pub fn rank(&self, ell: u32) -> u8 {
        if self.det(ell) != 0 {
            2
        } else if self.a | self.b | self.c | self.d != 0 {
            1
        } else {
            0
        }
    }

    #[inline]
    fn encode(&self, ell: u32) -> usize {
        let l = ell as usize;
        ((self.a as usize * l + self.b as usize) * l + self.c as usize) * l + self.d as usize
    }

    fn decode(mut code: usize, ell: u32) -> Mat2 {
        let l = ell as usize;
        let d = (code % l) as u32;
        code /= l;
        let c = (code % l) as u32;
        code /= l;
        let b = (code % l) as u32;
        Mat2 {
            a: (code / l) as u32,
            b,
            c,
            d,
        }
    }
}

fn check_ell(ell: u32) -> Result<()> {
    if !is_prime(ell as u64) || ell < 3 {
        return Err(Error::UnsupportedPrime(ell as u64));
    }
    if ell > MAX_ELL {
        return Err(Error::BudgetExceeded(format!(
            "exhaustive GL_2 enumeration needs ell <= {MAX_ELL}, got {ell}"
        )));
    }
    Ok(())
}

pub fn gl2_order(ell: u64) -> u64 {
    (ell * ell - 1) * (ell * ell - ell)
}

pub fn sl2_order(ell: u64) -> u64 {
    ell * (ell * ell - 1)
}

/// Smallest generator of `F_ℓ^×`.
pub fn primitive_root(ell: u32) -> u32 {
    let n = ell as u64 - 1;
    let factors = crate::primes::factorize(n);
    (2..ell)
        .find(|&g| factors.iter().all(|&(q, _)| mod_pow(g as u64, n / q, ell as u64) != 1))
        .unwrap_or(1)
}

/// A subgroup of `GL_2(F_ℓ)` with its elements enumerated.
#[derive(Clone)]
pub struct MatGroup {
    ell: u32,
    generators: Vec<Mat2>,
    elements: Vec<Mat2>,
    member: Vec<bool>,
}

impl fmt::Debug for MatGroup {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("MatGroup")
            .field("ell", &self.ell)
            .field("order", &self.elements.len())
            .field("generators", &self.generators)
            .finish()
    }
}

impl MatGroup {
    pub fn ell(&self) -> u32 {
        self.ell
    }

    pub fn order(&self) -> usize {
        self.elements.len()
    }

    pub fn generators(&self) -> &[Mat2] {
        &self.generators
    }

    /// Elements in lexicographic order.
    pub fn elements(&self) -> &[Mat2] {
        &self.elements
    }

    pub fn contains(&self, m: &Mat2) -> bool {
        self.member[m.encode(self.ell)]
    }

    pub fn contains_minus_identity(&self) -> bool {
        self.contains(&Mat2::scalar(-1, self.ell))
    }
}

/// Breadth-first closure of the generators.
pub fn generate_subgroup(gens: &[Mat2], ell: u32) -> Result<MatGroup> {
    check_ell(ell)?;
    let generators: Vec<Mat2> = gens
        .iter()
        .map(|g| Mat2::new(g.a as i64, g.b as i64, g.c as i64, g.d as i64, ell))
        .collect();
    if generators.iter().any(|g| g.det(ell) == 0) {
        return Err(Error::NotInvertible(ell));
    }
    let l = ell as usize;
    let mut member = vec![false; l * l * l * l];
    let id = Mat2::identity();
    member[id.encode(ell)] = true;
    let mut queue = VecDeque::from([id]);
    let budget = gl2_order(ell as u64) as usize;
    let mut count = 1usize;
    while let Some(h) = queue.pop_front() {
        for g in &generators {
            let gh = g.mul(&h, ell);
            let code = gh.encode(ell);
            if !member[code] {
                member[code] = true;
                count += 1;
                if count > budget {
                    return Err(Error::BudgetExceeded("subgroup closure".into()));
                }
                queue.push_back(gh);
            }
        }
    }
    let elements = member
        .iter()
        .enumerate()
        .filter(|(_, &m)| m)
        .map(|(code, _)| Mat2::decode(code, ell))
        .collect();
    Ok(MatGroup {
        ell,
        generators,
        elements,
        member,
    })
}

pub fn sl2_generators(ell: u32) -> Vec<Mat2> {
    vec![Mat2::new(1, 1, 0, 1, ell), Mat2::new(0, -1, 1, 0, ell)]
}

pub fn gl2_generators(ell: u32) -> Vec<Mat2> {
    let mut gens = sl2_generators(ell);
    gens.push(Mat2::new(primitive_root(ell) as i64, 0, 0, 1, ell));
    gens
}

pub fn sl2(ell: u32) -> Result<MatGroup> {
    generate_subgroup(&sl2_generators(ell), ell)
}

pub fn gl2(ell: u32) -> Result<MatGroup> {
    generate_subgroup(&gl2_generators(ell), ell)
}

/// Quadratic character of `m` mod ℓ.
pub fn kronecker_mod_ell(m: i64, ell: u64) -> i8 {
    legendre(m, ell)
}

/// `δ(t, d, ℓ) = (ℓ + χ)/(ℓ^2 - 1)` with `χ = ((t^2 - 4d)/ℓ)`: the share of
/// the determinant-`d` coset of `SL_2(F_ℓ)` having trace `t`.
pub fn delta_density(t: u64, d: u64, ell: u64) -> Result<Rational> {
    if ell < 5 || !is_prime(ell) {
        return Err(Error::UnsupportedPrime(ell));
    }
    if d.is_multiple_of(ell) {
        return Err(Error::ZeroResidue(d as i64));
    }
    let (t, d) = ((t % ell) as i64, (d % ell) as i64);
    let chi = kronecker_mod_ell(t * t - 4 * d, ell) as i64;
    let l = ell as i64;
    Ok(Rational::new(l + chi, l * l - 1))
}

/// Brute-force `#{g ∈ GL_2(F_ℓ) : tr g = t, det g = d}`.
pub fn count_trace_det(t: u64, d: u64, ell: u64) -> Result<u64> {
    check_ell(ell as u32)?;
    if d.is_multiple_of(ell) {
        return Err(Error::ZeroResidue(d as i64));
    }
    let (t, d) = (t % ell, d % ell);
    let mut count = 0;
    for a in 0..ell {
        for dd in 0..ell {
            if (a + dd) % ell != t {
                continue;
            }
            for b in 0..ell {
                for c in 0..ell {
                    if (a * dd + ell * ell - b * c % ell) % ell == d {
                        count += 1;
                    }
                }
            }
        }
    }
    Ok(count)
}

/// `(t1, t2, d, ℓ)` together with `δ = δ(t1,d,ℓ)·δ(t2,d,ℓ)`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub struct DensityParams {
    pub t1: u64,
    pub t2: u64,
    pub d: u64,
    pub ell: u64,
    #[serde(serialize_with = "crate::serialize_ratio")]
    pub delta: Rational,
}

impl DensityParams {
    pub fn new(t1: u64, t2: u64, d: u64, ell: u64) -> Result<Self> {
        let delta = delta_density(t1, d, ell)? * delta_density(t2, d, ell)?;
        Ok(Self {
            t1: t1 % ell,
            t2: t2 % ell,
            d: d % ell,
            ell,
            delta,
        })
    }
}

/// True iff no line of `F_ℓ^2` is fixed by every generator.
pub fn is_irreducible(g: &MatGroup) -> bool {
    let ell = g.ell;
    let lines = (0..ell).map(|m| [1, m]).chain(std::iter::once([0, 1]));
    for v in lines {
        let stable = g.generators.iter().all(|s| {
            let w = s.apply(v, ell);
            red(w[0] as i64 * v[1] as i64 - w[1] as i64 * v[0] as i64, ell) == 0
        });
        if stable {
            return false;
        }
    }
    true
}

/// Incremental row echelon form over `F_ℓ`.
pub(crate) struct Echelon {
    ell: u32,
    rows: Vec<(usize, Vec<u32>)>,
}

impl Echelon {
    pub(crate) fn new(ell: u32) -> Self {
        Self { ell, rows: Vec::new() }
    }

    pub(crate) fn rank(&self) -> usize {
        self.rows.len()
    }

    /// Adds a row; returns whether the rank grew.
    pub(crate) fn insert(&mut self, mut row: Vec<u32>) -> bool {
        let m = self.ell as u64;
        for (pivot, basis) in &self.rows {
            let k = row[*pivot];
            if k == 0 {
                continue;
            }
            let k = m - k as u64;
            for (x, &y) in row.iter_mut().zip(basis) {
                *x = ((*x as u64 + k * y as u64) % m) as u32;
            }
        }
        let Some(pivot) = row.iter().position(|&x| x != 0) else {
            return false;
        };
        let inv = inv_mod(row[pivot], self.ell) as u64;
        for x in row.iter_mut() {
            *x = (*x as u64 * inv % m) as u32;
        }
        self.rows.push((pivot, row));
        true
    }
}

/// `dim H^1(G, F_ℓ^2)` by direct linear algebra on cocycles.
///
/// A cocycle is fixed by its values on the generators, so those `2k` values
/// are the unknowns. Walking a breadth-first spanning tree of the Cayley
/// graph expresses every `c(h)` linearly in them via
/// `c(s·h) = c(s) + s·c(h)`; each non-tree edge contributes two linear
/// constraints. Coboundaries `g ↦ (g - 1)v` span `2 - dim V^G` dimensions.
pub fn h1_dimension(g: &MatGroup) -> Result<usize> {
    if g.order() > COCYCLE_BUDGET {
        return Err(Error::BudgetExceeded(format!(
            "cocycle solver limited to |G| <= {COCYCLE_BUDGET}, got {}",
            g.order()
        )));
    }
    let ell = g.ell;
    let m = ell as u64;
    let gens = &g.generators;
    let width = 2 * gens.len();
    if width == 0 {
        return Ok(0);
    }

    // c(h) as a 2 × width matrix over F_ℓ, flattened row-major.
    let l = ell as usize;
    let mut value: Vec<Option<Vec<u32>>> = vec![None; l * l * l * l];
    let id = Mat2::identity();
    value[id.encode(ell)] = Some(vec![0; 2 * width]);
    let mut queue = VecDeque::from([id]);
    let mut constraints = Echelon::new(ell);

    while let Some(h) = queue.pop_front() {
        let ch = value[h.encode(ell)].clone().expect("visited");
        for (i, s) in gens.iter().enumerate() {
            // E_i + s·c(h)
            let mut cand = vec![0u32; 2 * width];
            for col in 0..width {
                let x = ch[col] as u64;
                let y = ch[width + col] as u64;
                cand[col] = ((s.a as u64 * x + s.b as u64 * y) % m) as u32;
                cand[width + col] = ((s.c as u64 * x + s.d as u64 * y) % m) as u32;
            }
            cand[2 * i] = (cand[2 * i] + 1) % ell;
            cand[width + 2 * i + 1] = (cand[width + 2 * i + 1] + 1) % ell;

            let sh = s.mul(&h, ell);
            match &value[sh.encode(ell)] {
                None => {
                    value[sh.encode(ell)] = Some(cand);
                    queue.push_back(sh);
                }
                Some(existing) => {
                    for row in 0..2 {
                        let diff: Vec<u32> = (0..width)
                            .map(|col| {
                                let idx = row * width + col;
                                ((cand[idx] + ell - existing[idx]) % ell) as u32
                            })
                            .collect();
                        constraints.insert(diff);
                    }
                }
            }
        }
    }
    let cocycles = width - constraints.rank();

    let mut fixed = Echelon::new(ell);
    for s in gens {
        let n = s.minus_identity(ell);
        fixed.insert(vec![n.a, n.b]);
        fixed.insert(vec![n.c, n.d]);
    }
    let coboundaries = fixed.rank();
    Ok(cocycles - coboundaries)
}

/// `H^1(G, F_ℓ^2) = 0`? Returns immediately when `-1 ∈ G`: `⟨-1⟩` is a
/// normal subgroup of order prime to ℓ with no fixed vectors, so
/// inflation-restriction kills `H^1`.
pub fn h1_vanishes(g: &MatGroup) -> Result<bool> {
    if g.contains_minus_identity() {
        return Ok(true);
    }
    Ok(h1_dimension(g)? == 0)
}

/// The `-1 ∈ G` shortcut alone; `None` when it does not apply.
pub fn h1_fast_path(g: &MatGroup) -> Option<bool> {
    g.contains_minus_identity().then_some(true)
}

/// Commutator subgroup, as the normal closure of commutators of generators.
pub fn derived_subgroup(h: &MatGroup) -> Result<MatGroup> {
    let ell = h.ell;
    let inv: Vec<Mat2> = h
        .generators
        .iter()
        .map(|s| s.inverse(ell).expect("invertible"))
        .collect();
    let mut gens = Vec::new();
    for (i, s) in h.generators.iter().enumerate() {
        for (j, t) in h.generators.iter().enumerate() {
            if i < j {
                let c = s.mul(t, ell).mul(&inv[i], ell).mul(&inv[j], ell);
                if c != Mat2::identity() {
                    gens.push(c);
                }
            }
        }
    }
    let mut n = generate_subgroup(&gens, ell)?;
    loop {
        let mut extra = Vec::new();
        for (s, s_inv) in h.generators.iter().zip(&inv) {
            for x in &n.generators {
                let conj = s.mul(x, ell).mul(s_inv, ell);
                if !n.contains(&conj) && !extra.contains(&conj) {
                    extra.push(conj);
                }
            }
        }
        if extra.is_empty() {
            return Ok(n);
        }
        let mut all = n.generators.clone();
        all.extend(extra);
        n = generate_subgroup(&all, ell)?;
    }
}

/// True iff `H` has no quotient cyclic of order ℓ, i.e. `ℓ ∤ |H/[H,H]|`.
pub fn no_abelian_ell_quotient(h: &MatGroup) -> Result<bool> {
    let derived = derived_subgroup(h)?;
    let index = h.order() / derived.order();
    Ok(!index.is_multiple_of(h.ell as usize))
}

/// First element (lexicographically) without eigenvalue 1.
pub fn find_tau0(h: &MatGroup) -> Option<Mat2> {
    let ell = h.ell;
    h.elements.iter().copied().find(|m| m.minus_identity(ell).det(ell) != 0)
}

/// First element (lexicographically) with `rank(h - 1) = 1`.
pub fn find_tau1(h: &MatGroup) -> Option<Mat2> {
    let ell = h.ell;
    h.elements
        .iter()
        .copied()
        .find(|m| m.minus_identity(ell).rank(ell) == 1)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn cyclic(m: Mat2, ell: u32) -> MatGroup {
        generate_subgroup(&[m], ell).unwrap()
    }

    /// Cocycle space from the full multiplication table: unknowns are all
    /// `c(g)`, one constraint block per pair `(g, h)`.
    fn h1_dimension_full_table(g: &MatGroup) -> usize {
        let ell = g.ell;
        let n = g.order();
        let index = |m: &Mat2| g.elements.binary_search(m).unwrap();
        let mut ech = Echelon::new(ell);
        for (i, x) in g.elements.iter().enumerate() {
            for (j, y) in g.elements.iter().enumerate() {
                let k = index(&x.mul(y, ell));
                // c(xy) - c(x) - x·c(y) = 0
                for row in 0..2 {
                    let mut r = vec![0u32; 2 * n];
                    r[2 * k + row] = (r[2 * k + row] + 1) % ell;
                    r[2 * i + row] = (r[2 * i + row] + ell - 1) % ell;
                    let (p0, p1) = if row == 0 { (x.a, x.b) } else { (x.c, x.d) };
                    r[2 * j] = (r[2 * j] + ell - p0) % ell;
                    r[2 * j + 1] = (r[2 * j + 1] + ell - p1) % ell;
                    ech.insert(r);
                }
            }
        }
        let cocycles = 2 * n - ech.rank();
        let mut cob = Echelon::new(ell);
        for x in &g.elements {
            let m = x.minus_identity(ell);
            cob.insert(vec![m.a, m.b]);
            cob.insert(vec![m.c, m.d]);
        }
        cocycles - cob.rank()
    }

    #[test]
    fn kronecker_examples() {
        assert_eq!(kronecker_mod_ell(-4, 5), 1);
        assert_eq!(kronecker_mod_ell(0, 5), 0);
        assert_eq!(kronecker_mod_ell(-3, 5), -1);
    }

    #[test]
    fn delta_examples() {
        assert_eq!(delta_density(0, 1, 5).unwrap(), Rational::new(1, 4));
        assert_eq!(delta_density(1, 1, 5).unwrap(), Rational::new(1, 6));
        for d in 1..5 {
            let total: Rational = (0..5).map(|t| delta_density(t, d, 5).unwrap()).sum();
            assert_eq!(total, Rational::from_integer(1));
        }
        assert!(matches!(delta_density(1, 0, 5), Err(Error::ZeroResidue(_))));
    }

    #[test]
    fn count_examples() {
        assert_eq!(count_trace_det(0, 1, 5).unwrap(), 30);
        assert_eq!(count_trace_det(1, 1, 5).unwrap(), 20);
        assert_eq!((0..5).map(|t| count_trace_det(t, 1, 5).unwrap()).sum::<u64>(), 120);
        assert!(matches!(count_trace_det(0, 1, 17), Err(Error::BudgetExceeded(_))));
    }

    #[test]
    fn group_orders() {
        assert_eq!(generate_subgroup(&[], 5).unwrap().order(), 1);
        assert_eq!(sl2(5).unwrap().order(), 120);
        let gens = [
            Mat2::new(1, 1, 0, 1, 5),
            Mat2::new(2, 0, 0, 3, 5),
            Mat2::new(0, -1, 1, 0, 5),
            Mat2::new(2, 0, 0, 1, 5),
        ];
        assert_eq!(generate_subgroup(&gens, 5).unwrap().order(), 480);
        for ell in [3u32, 5, 7, 11, 13] {
            assert_eq!(gl2(ell).unwrap().order() as u64, gl2_order(ell as u64));
            assert_eq!(sl2(ell).unwrap().order() as u64, sl2_order(ell as u64));
        }
        assert!(matches!(
            generate_subgroup(&[Mat2::new(1, 1, 1, 1, 5)], 5),
            Err(Error::NotInvertible(5))
        ));
        assert!(matches!(gl2(17), Err(Error::BudgetExceeded(_))));
    }

    #[test]
    fn elements_sorted_and_closed() {
        let g = cyclic(Mat2::new(1, 2, 3, 4, 7), 7);
        assert!(g.elements().windows(2).all(|w| w[0] < w[1]));
        for x in g.elements() {
            assert!(g.contains(&x.inverse(7).unwrap()));
            for y in g.elements() {
                assert!(g.contains(&x.mul(y, 7)));
            }
        }
    }

    #[test]
    fn irreducibility_examples() {
        assert!(is_irreducible(&sl2(5).unwrap()));
        let borel = generate_subgroup(
            &[
                Mat2::new(1, 1, 0, 1, 5),
                Mat2::new(2, 0, 0, 1, 5),
                Mat2::new(1, 0, 0, 3, 5),
            ],
            5,
        )
        .unwrap();
        assert_eq!(borel.order(), 80);
        assert!(!is_irreducible(&borel));
        assert!(!is_irreducible(&generate_subgroup(&[], 5).unwrap()));
    }

    #[test]
    fn h1_examples() {
        let g = gl2(5).unwrap();
        assert_eq!(h1_fast_path(&g), Some(true));
        assert_eq!(h1_dimension(&g).unwrap(), 0);
        assert!(h1_vanishes(&generate_subgroup(&[], 5).unwrap()).unwrap());
        let u = cyclic(Mat2::new(1, 1, 0, 1, 5), 5);
        assert_eq!(u.order(), 5);
        assert_eq!(h1_dimension(&u).unwrap(), 1);
        assert!(!h1_vanishes(&u).unwrap());
    }

    #[test]
    fn h1_solver_matches_full_table() {
        let ell = 5;
        let cases = [
            vec![],
            vec![Mat2::new(1, 1, 0, 1, ell)],
            vec![Mat2::scalar(-1, ell)],
            vec![Mat2::new(2, 0, 0, 1, ell)],
            vec![Mat2::new(1, 1, 0, 1, ell), Mat2::new(2, 0, 0, 1, ell)],
            vec![Mat2::new(0, 1, 1, 0, ell)],
            vec![Mat2::new(0, -1, 1, 0, ell)],
            vec![Mat2::new(1, 1, 0, 2, ell)],
            vec![Mat2::new(2, 0, 0, 3, ell), Mat2::new(0, 1, 1, 0, ell)],
        ];
        for gens in cases {
            let g = generate_subgroup(&gens, ell).unwrap();
            assert!(g.order() <= 100);
            assert_eq!(h1_dimension(&g).unwrap(), h1_dimension_full_table(&g), "{g:?}");
        }
    }

    #[test]
    fn abelian_quotient_examples() {
        assert!(no_abelian_ell_quotient(&sl2(5).unwrap()).unwrap());
        assert!(!no_abelian_ell_quotient(&cyclic(Mat2::new(1, 1, 0, 1, 5), 5)).unwrap());
        assert!(no_abelian_ell_quotient(&cyclic(Mat2::scalar(-1, 5), 5)).unwrap());
        assert_eq!(derived_subgroup(&gl2(5).unwrap()).unwrap().order(), 120);
        assert_eq!(derived_subgroup(&sl2(7).unwrap()).unwrap().order(), 336);
    }

    #[test]
    fn tau_examples() {
        let h = sl2(5).unwrap();
        let t0 = find_tau0(&h).unwrap();
        assert_ne!(t0.minus_identity(5).det(5), 0);
        let d = Mat2::new(2, 0, 0, 3, 5);
        assert!(h.contains(&d) && d.minus_identity(5).det(5) == 2);
        let t1 = find_tau1(&h).unwrap();
        assert_eq!(t1.minus_identity(5).rank(5), 1);
        // witnesses are the lexicographically first candidates
        assert!(h
            .elements()
            .iter()
            .take_while(|m| **m < t1)
            .all(|m| m.minus_identity(5).rank(5) != 1));

        assert_eq!(find_tau0(&cyclic(Mat2::new(1, 1, 0, 1, 5), 5)), None);
        let minus = cyclic(Mat2::scalar(-1, 5), 5);
        assert_eq!(find_tau0(&minus), Some(Mat2::scalar(-1, 5)));
        assert_eq!(find_tau1(&minus), None);
        assert_eq!(find_tau1(&generate_subgroup(&[], 5).unwrap()), None);
    }
}
