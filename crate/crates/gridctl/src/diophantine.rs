//! Exact decision procedure for vanishing sums of four cosines at rational
//! multiples of pi, and enumeration of eigenvalue coincidences of product
//! graphs.
//!
//! Every rational solution of
//! `cos(f1*pi) + cos(f2*pi) + cos(f3*pi) + cos(f4*pi) = 0` with all
//! `f_j` in `[0, 1]` falls into one of three shapes:
//!
//! - two pairs each summing to 1 ([`SolutionClass::FamilyPairs`]),
//! - `{theta, 2/3 - theta, 2/3 + theta, 1/2}` for rational
//!   `theta` in `(0, 1/3)` ([`SolutionClass::FamilyTwoThirds`]),
//! - one of twelve sporadic quadruples ([`SolutionClass::Sporadic`]).
//!
//! Classification runs entirely in integer arithmetic, so equality of
//! Laplacian eigenvalues of grid and cylinder-grid graphs is decided
//! exactly, never by floating-point comparison.

use serde::{Serialize, Serializer};

use crate::graphs::GraphSpec;
use crate::{Error, Result};

/// Angle `p*pi/q` with `gcd(p, q) = 1` and `0 <= p/q <= 1`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct RationalAngle {
    p: i64,
    q: i64,
}

fn gcd(a: i64, b: i64) -> i64 {
    let (mut a, mut b) = (a.abs(), b.abs());
    while b != 0 {
        (a, b) = (b, a % b);
    }
    a
}

impl RationalAngle {
    pub const ZERO: RationalAngle = RationalAngle { p: 0, q: 1 };
    pub const HALF: RationalAngle = RationalAngle { p: 1, q: 2 };
    pub const ONE: RationalAngle = RationalAngle { p: 1, q: 1 };

    /// Reduced angle `p*pi/q`; rejects values outside `[0, 1]`.
    pub fn new(p: i64, q: i64) -> Result<Self> {
        if q == 0 {
            return Err(Error::Contract("angle denominator is zero".into()));
        }
        let (p, q) = if q < 0 { (-p, -q) } else { (p, q) };
        if p < 0 || p > q {
            return Err(Error::Contract(format!(
                "angle {p}/{q} outside [0, 1]"
            )));
        }
        let g = gcd(p, q).max(1);
        Ok(RationalAngle { p: p / g, q: q / g })
    }

    /// Fold an arbitrary fraction into `[0, 1]` using the period-2 and
    /// evenness symmetries of `cos(x*pi)`.
    pub fn folded(p: i64, q: i64) -> Result<Self> {
        if q == 0 {
            return Err(Error::Contract("angle denominator is zero".into()));
        }
        let (mut p, q) = if q < 0 { (-p, -q) } else { (p, q) };
        p = p.rem_euclid(2 * q); // now p/q in [0, 2)
        if p > q {
            p = 2 * q - p;
        }
        RationalAngle::new(p, q)
    }

    pub fn numer(&self) -> i64 {
        self.p
    }

    pub fn denom(&self) -> i64 {
        self.q
    }

    /// The complementary angle `1 - p/q`, satisfying
    /// `cos((1 - x)*pi) = -cos(x*pi)`.
    pub fn complement(&self) -> Self {
        RationalAngle {
            p: self.q - self.p,
            q: self.q,
        }
    }

    pub fn value(&self) -> f64 {
        self.p as f64 / self.q as f64
    }

    pub fn cos_pi(&self) -> f64 {
        (std::f64::consts::PI * self.p as f64 / self.q as f64).cos()
    }

    fn is_zero(&self) -> bool {
        self.p == 0
    }

    /// `self + other == 1`, exactly.
    fn sums_to_one_with(&self, other: &Self) -> bool {
        self.p as i128 * other.q as i128 + other.p as i128 * self.q as i128
            == self.q as i128 * other.q as i128
    }

    /// `self + other == 2/3`, exactly.
    fn sums_to_two_thirds_with(&self, other: &Self) -> bool {
        3 * (self.p as i128 * other.q as i128 + other.p as i128 * self.q as i128)
            == 2 * self.q as i128 * other.q as i128
    }

    /// `self == 2/3 + other`, exactly.
    fn is_two_thirds_plus(&self, other: &Self) -> bool {
        3 * (self.p as i128 * other.q as i128 - other.p as i128 * self.q as i128)
            == 2 * self.q as i128 * other.q as i128
    }

    /// `self < 1/3`, exactly.
    fn below_one_third(&self) -> bool {
        3 * self.p < self.q
    }
}

impl PartialOrd for RationalAngle {
    fn partial_cmp(&self, other: &Self) -> Option<std::cmp::Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for RationalAngle {
    fn cmp(&self, other: &Self) -> std::cmp::Ordering {
        (self.p as i128 * other.q as i128).cmp(&(other.p as i128 * self.q as i128))
    }
}

impl std::fmt::Display for RationalAngle {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "{}/{}", self.p, self.q)
    }
}

impl Serialize for RationalAngle {
    fn serialize<S: Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        serializer.collect_str(self)
    }
}

impl std::str::FromStr for RationalAngle {
    type Err = Error;

    /// Parse `"p/q"` or a bare integer (`"1"`, `"0"`).
    fn from_str(s: &str) -> Result<Self> {
        let parse_int = |t: &str| {
            t.trim()
                .parse::<i64>()
                .map_err(|_| Error::Usage(format!("invalid fraction component {t:?}")))
        };
        match s.split_once('/') {
            Some((num, den)) => RationalAngle::new(parse_int(num)?, parse_int(den)?),
            None => RationalAngle::new(parse_int(s)?, 1),
        }
    }
}

/// Unordered multiset of four angles, stored sorted.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Quadruple {
    angles: [RationalAngle; 4],
}

impl Quadruple {
    pub fn new(mut angles: [RationalAngle; 4]) -> Self {
        angles.sort();
        Quadruple { angles }
    }

    pub fn angles(&self) -> &[RationalAngle; 4] {
        &self.angles
    }

    /// Floating-point value of the cosine sum (oracle use only).
    pub fn cos_sum(&self) -> f64 {
        self.angles.iter().map(|a| a.cos_pi()).sum()
    }
}

/// Which family of the vanishing-sum classification a quadruple falls in.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum SolutionClass {
    NotASolution,
    /// `{gamma, 1-gamma, delta, 1-delta}` with `0 <= gamma <= delta <= 1/2`.
    FamilyPairs {
        gamma: RationalAngle,
        delta: RationalAngle,
    },
    /// `{theta, 2/3-theta, 2/3+theta, 1/2}` with `theta` in `(0, 1/3)`.
    FamilyTwoThirds { theta: RationalAngle },
    /// One of the twelve isolated quadruples; `id` is 1-based.
    Sporadic { id: u8 },
}

impl SolutionClass {
    pub fn is_solution(&self) -> bool {
        !matches!(self, SolutionClass::NotASolution)
    }
}

/// The twelve sporadic vanishing quadruples, as fractions of pi,
/// each stored sorted.
const SPORADIC: [[(i64, i64); 4]; 12] = [
    [(1, 3), (1, 3), (1, 2), (1, 1)],
    [(0, 1), (1, 2), (2, 3), (2, 3)],
    [(1, 3), (2, 5), (1, 2), (4, 5)],
    [(1, 5), (1, 2), (3, 5), (2, 3)],
    [(1, 5), (1, 3), (3, 5), (1, 1)],
    [(0, 1), (2, 5), (2, 3), (4, 5)],
    [(1, 3), (2, 5), (7, 15), (13, 15)],
    [(2, 15), (8, 15), (3, 5), (2, 3)],
    [(1, 15), (1, 3), (11, 15), (4, 5)],
    [(1, 5), (4, 15), (2, 3), (14, 15)],
    [(2, 7), (1, 3), (4, 7), (6, 7)],
    [(1, 7), (3, 7), (2, 3), (5, 7)],
];

/// Decide whether the four cosines sum to exactly zero and name the family.
///
/// Families are tried in a fixed order — pairs, then the two-thirds family,
/// then the sporadic table — and the first match wins; the order is part of
/// the contract. The result is `NotASolution` if and only if the cosine sum
/// is nonzero.
pub fn classify_quadruple(quad: &Quadruple) -> SolutionClass {
    let a = quad.angles();

    // Two pairs each summing to 1. With a sorted quadruple [w, x, y, z]
    // only three pairings exist.
    for [(i, j), (k, l)] in [[(0, 1), (2, 3)], [(0, 2), (1, 3)], [(0, 3), (1, 2)]] {
        if a[i].sums_to_one_with(&a[j]) && a[k].sums_to_one_with(&a[l]) {
            let mut gamma = a[i].min(a[j]);
            let mut delta = a[k].min(a[l]);
            if delta < gamma {
                std::mem::swap(&mut gamma, &mut delta);
            }
            return SolutionClass::FamilyPairs { gamma, delta };
        }
    }

    // {theta, 2/3 - theta, 2/3 + theta, 1/2}. Ascending order of the three
    // non-1/2 entries is theta < 2/3 - theta < 2/3 + theta for theta in
    // (0, 1/3), so after removing one 1/2 a sorted triple can be matched
    // directly.
    if let Some(pos) = a.iter().position(|x| *x == RationalAngle::HALF) {
        let mut rest = Vec::with_capacity(3);
        for (i, x) in a.iter().enumerate() {
            if i != pos {
                rest.push(*x);
            }
        }
        let (x, y, z) = (rest[0], rest[1], rest[2]);
        if !x.is_zero()
            && x.below_one_third()
            && x.sums_to_two_thirds_with(&y)
            && z.is_two_thirds_plus(&x)
        {
            return SolutionClass::FamilyTwoThirds { theta: x };
        }
    }

    for (idx, spor) in SPORADIC.iter().enumerate() {
        if spor
            .iter()
            .zip(a.iter())
            .all(|(&(p, q), x)| x.numer() == p && x.denom() == q)
        {
            return SolutionClass::Sporadic { id: idx as u8 + 1 };
        }
    }

    SolutionClass::NotASolution
}

/// Exact test of `cos(a1*pi) + cos(b1*pi) == cos(a2*pi) + cos(b2*pi)`.
///
/// Rewritten with `cos(pi - x) = -cos(x)` this is a four-cosine vanishing
/// sum on `{a1, b1, 1-a2, 1-b2}`; the trivial identity `{a1, b1} = {a2, b2}`
/// is short-circuited.
pub fn characteristic_parts_equal(
    a1: RationalAngle,
    b1: RationalAngle,
    a2: RationalAngle,
    b2: RationalAngle,
) -> bool {
    if (a1 == a2 && b1 == b2) || (a1 == b2 && b1 == a2) {
        return true;
    }
    let quad = Quadruple::new([a1, b1, a2.complement(), b2.complement()]);
    classify_quadruple(&quad).is_solution()
}

/// The `(alpha, beta)` spectral angles of a product graph.
///
/// Grid: `alpha/m` and `beta/n` with `alpha` in `0..m`, `beta` in `0..n`.
/// Cylinder: `2*alpha/m` folded into `[0, 1]` with `alpha` in `1..=m`.
pub(crate) fn spectral_angles(spec: &GraphSpec) -> Result<Vec<((usize, usize), (RationalAngle, RationalAngle))>> {
    spec.validate()?;
    let (m, n) = spec.factor_sizes();
    let mut out = Vec::with_capacity(m * n);
    if spec.first_factor_is_cycle() {
        for alpha in 1..=m {
            let a = RationalAngle::folded(2 * alpha as i64, m as i64)?;
            for beta in 0..n {
                let b = RationalAngle::new(beta as i64, n as i64)?;
                out.push(((alpha, beta), (a, b)));
            }
        }
    } else {
        for alpha in 0..m {
            let a = RationalAngle::new(alpha as i64, m as i64)?;
            for beta in 0..n {
                let b = RationalAngle::new(beta as i64, n as i64)?;
                out.push(((alpha, beta), (a, b)));
            }
        }
    }
    Ok(out)
}

struct UnionFind {
    parent: Vec<usize>,
}

impl UnionFind {
    fn new(n: usize) -> Self {
        UnionFind {
            parent: (0..n).collect(),
        }
    }

    fn find(&mut self, mut i: usize) -> usize {
        while self.parent[i] != i {
            self.parent[i] = self.parent[self.parent[i]];
            i = self.parent[i];
        }
        i
    }

    fn union(&mut self, i: usize, j: usize) {
        let (ri, rj) = (self.find(i), self.find(j));
        if ri != rj {
            self.parent[rj] = ri;
        }
    }
}

/// Partition all `(alpha, beta)` index pairs of a grid or cylinder-grid
/// spectrum into classes of exactly equal eigenvalues.
///
/// Class sizes are the exact eigenvalue multiplicities. Classes are ordered
/// by first member; members keep enumeration order.
pub fn enumerate_coincidences(spec: &GraphSpec) -> Result<Vec<Vec<(usize, usize)>>> {
    if !spec.is_product() {
        return Err(Error::Usage(format!(
            "enumerate_coincidences expects a product graph, got {spec}; use the factor spectra instead"
        )));
    }
    let angles = spectral_angles(spec)?;
    let n_pairs = angles.len();
    let mut uf = UnionFind::new(n_pairs);
    for i in 0..n_pairs {
        for j in (i + 1)..n_pairs {
            if uf.find(i) == uf.find(j) {
                continue;
            }
            let (a1, b1) = angles[i].1;
            let (a2, b2) = angles[j].1;
            if characteristic_parts_equal(a1, b1, a2, b2) {
                uf.union(i, j);
            }
        }
    }
    let mut class_of_root: Vec<Option<usize>> = vec![None; n_pairs];
    let mut classes: Vec<Vec<(usize, usize)>> = Vec::new();
    for i in 0..n_pairs {
        let root = uf.find(i);
        let class_id = *class_of_root[root].get_or_insert_with(|| {
            classes.push(Vec::new());
            classes.len() - 1
        });
        classes[class_id].push(angles[i].0);
    }
    Ok(classes)
}
