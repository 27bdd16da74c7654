//! Connectedness probability `P(x,y,z)` of a class representative, and the
//! bounds used to compare classes along a fixed `x + y`.

use std::collections::HashMap;
use std::sync::Mutex;

use num_bigint::BigInt;
use num_traits::{One, Zero};
use serde::Serialize;

use crate::counting::{boundary_count, Triplet};
use crate::engine::{prob_all_connected_dp, Limits};
use crate::error::{Error, Result};
use crate::graph::{EdgeProbabilityVector, Network, OriginalGraph};
use crate::rational::{check_probability, pow, rat, Rational};

/// Connected-labeled-graph counts `a(0..=10)` (OEIS A001187).
pub const CONNECTED_LABELED_GRAPHS: [u64; 11] =
    [1, 1, 1, 4, 38, 728, 26704, 1866256, 251548592, 66296291072, 29184353055900];

/// The canonical member of `G_{x,y,z}`: a bottom clique on columns `0..x`, a
/// top clique on columns `0..z` and `x..x+y-z`, and vertical edges on the
/// first `z` columns. Bottom vertices come first, so `u` is vertex 0.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CanonicalClassGraph {
    triplet: Triplet,
    n: u32,
    columns: Vec<usize>,
    edges: Vec<(usize, usize)>,
}

impl CanonicalClassGraph {
    pub fn triplet(&self) -> Triplet {
        self.triplet
    }

    pub fn n(&self) -> u32 {
        self.n
    }

    /// Original column of every vertex.
    pub fn columns(&self) -> &[usize] {
        &self.columns
    }

    pub fn bottom_count(&self) -> usize {
        self.triplet.x as usize
    }
}

impl Network for CanonicalClassGraph {
    fn vertex_count(&self) -> usize {
        self.columns.len()
    }

    fn edges(&self) -> &[(usize, usize)] {
        &self.edges
    }
}

pub fn canonical_graph(n: u32, t: Triplet) -> Result<CanonicalClassGraph> {
    t.validate(n)?;
    let (x, y, z) = (t.x as usize, t.y as usize, t.z as usize);
    let mut columns: Vec<usize> = (0..x).collect();
    columns.extend(0..z);
    columns.extend(x..x + y - z);
    let mut edges = Vec::new();
    for a in 0..x {
        for b in a + 1..x {
            edges.push((a, b));
        }
    }
    for a in x..x + y {
        for b in a + 1..x + y {
            edges.push((a, b));
        }
    }
    for c in 0..z {
        edges.push((c, x + c));
    }
    Ok(CanonicalClassGraph { triplet: t, n, columns, edges })
}

/// Connectedness probability of K_m at constant `p`; `m <= 1` gives 1.
pub fn clique_connectivity(m: usize, p: &Rational, limits: &Limits) -> Result<Rational> {
    if m <= 1 {
        return Ok(Rational::one());
    }
    let k = OriginalGraph::complete(m)?;
    let pv = EdgeProbabilityVector::constant(k.edge_count(), p.clone())?;
    prob_all_connected_dp(&k, &pv, limits)
}

/// `P(x,y,z)`: probability that the class representative is connected at
/// constant parameter `p`.
pub fn prob_connected_xyz(n: u32, t: Triplet, p: &Rational, limits: &Limits) -> Result<Rational> {
    let g = canonical_graph(n, t)?;
    check_probability(p)?;
    if t.y >= 1 && t.z == 0 {
        return Ok(Rational::zero());
    }
    let pv = EdgeProbabilityVector::constant(g.edge_count(), p.clone())?;
    prob_all_connected_dp(&g, &pv, limits)
}

/// Memoised `P(x,y,z)` at one parameter value. `P` does not depend on `n`
/// and is symmetric in its first two coordinates.
#[derive(Debug)]
pub struct ClassProbabilities {
    p: Rational,
    limits: Limits,
    cache: Mutex<HashMap<Triplet, Rational>>,
}

impl ClassProbabilities {
    pub fn new(p: Rational, limits: Limits) -> Result<Self> {
        check_probability(&p)?;
        Ok(Self { p, limits, cache: Mutex::new(HashMap::new()) })
    }

    pub fn p(&self) -> &Rational {
        &self.p
    }

    pub fn limits(&self) -> &Limits {
        &self.limits
    }

    pub fn get(&self, n: u32, t: Triplet) -> Result<Rational> {
        t.validate(n)?;
        let key = if t.y >= 1 && t.y > t.x { t.mirrored() } else { t };
        if let Some(v) = self.cache.lock().unwrap().get(&key) {
            return Ok(v.clone());
        }
        // The representative only needs x + y - z columns.
        let v = prob_connected_xyz(key.x + key.y - key.z, key, &self.p, &self.limits)?;
        self.cache.lock().unwrap().insert(key, v.clone());
        Ok(v)
    }

    /// `(1-p)^B(x,y,z) * P(x,y,z)` for the K_n bunkbed.
    pub fn weighted(&self, n: u32, t: Triplet) -> Result<Rational> {
        let b = boundary_count(n, t)?;
        Ok(pow(&(Rational::one() - &self.p), b) * self.get(n, t)?)
    }
}

/// `1 - (1-p)^z`: at least one vertical edge of the class is open.
pub fn vertical_upper_bound(t: Triplet, p: &Rational) -> Result<Rational> {
    check_probability(p)?;
    Ok(Rational::one() - pow(&(Rational::one() - p), t.z as u64))
}

/// `P(x,0,0) * P(0,y,0) * (1 - (1-p)^z)`, with `P(0,y,0)` the connectedness
/// of the top clique alone and `P(0,0,0) = 1`.
pub fn product_lower_bound(n: u32, t: Triplet, p: &Rational, limits: &Limits) -> Result<Rational> {
    t.validate(n)?;
    let bottom = clique_connectivity(t.x as usize, p, limits)?;
    let top = clique_connectivity(t.y as usize, p, limits)?;
    Ok(bottom * top * vertical_upper_bound(t, p)?)
}

/// `2 - (1 + (1-p)^{floor(n/2)})^n`, a lower bound on `P(n,0,0)`. For odd
/// `n` the floored exponent keeps the value rational and only weakens it.
pub fn kn_lower_bound(n: u32, p: &Rational) -> Result<Rational> {
    check_probability(p)?;
    if n < 2 {
        return Err(Error::InvalidParameter(format!("K_n bound needs n >= 2, got {n}")));
    }
    if *p < rat(1, 2) {
        return Err(Error::InvalidParameter(format!("K_n bound is stated for p >= 1/2, got {p}")));
    }
    let inner = Rational::one() + pow(&(Rational::one() - p), (n / 2) as u64);
    Ok(Rational::from_integer(BigInt::from(2)) - pow(&inner, n as u64))
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct OeisCheck {
    pub n: u32,
    pub dp_value: String,
    pub table_value: String,
    pub matches: bool,
    pub at_least_half: bool,
}

impl OeisCheck {
    pub fn passed(&self) -> bool {
        self.matches && (self.n < 2 || self.at_least_half)
    }
}

/// Compares `P(n,0,0)` at `p = 1/2` with `a(n) / 2^{C(n,2)}`.
pub fn oeis_connected_check(n: u32, limits: &Limits) -> Result<OeisCheck> {
    if !(1..=10).contains(&n) {
        return Err(Error::InvalidParameter(format!("table covers 1 <= n <= 10, got {n}")));
    }
    let half = rat(1, 2);
    let dp = clique_connectivity(n as usize, &half, limits)?;
    let pairs = n as usize * (n as usize - 1) / 2;
    let table =
        Rational::new(BigInt::from(CONNECTED_LABELED_GRAPHS[n as usize]), num_traits::pow(BigInt::from(2), pairs));
    Ok(OeisCheck {
        n,
        matches: dp == table,
        at_least_half: dp >= half,
        dp_value: dp.to_string(),
        table_value: table.to_string(),
    })
}

/// Same-sum class comparison: if `|x-y| > |x'-y'|` then
/// `(1-p)^B P` at `t` is at least its value at `t'` (and symmetrically).
pub fn check_same_sum_order(n: u32, classes: &ClassProbabilities, t: Triplet, t2: Triplet) -> Result<bool> {
    t.validate(n)?;
    t2.validate(n)?;
    if t.x + t.y != t2.x + t2.y || t.z != t2.z {
        return Err(Error::InvalidParameter(format!("{t} and {t2} must share x + y and z")));
    }
    let spread = |s: &Triplet| s.x.abs_diff(s.y);
    let (wide, narrow) = match spread(&t).cmp(&spread(&t2)) {
        std::cmp::Ordering::Greater => (t, t2),
        std::cmp::Ordering::Less => (t2, t),
        std::cmp::Ordering::Equal => return Ok(true),
    };
    Ok(classes.weighted(n, wide)? >= classes.weighted(n, narrow)?)
}

/// `P(x+1,y,z) >= (1-p)^2 P(x,y+1,z)` for `x > y >= z`.
pub fn check_recurrence(n: u32, t: Triplet, classes: &ClassProbabilities) -> Result<bool> {
    if !(t.x > t.y && t.y >= t.z) {
        return Err(Error::InvalidParameter(format!("recurrence needs x > y >= z, got {t}")));
    }
    let up = Triplet::new(t.x + 1, t.y, t.z);
    let side = Triplet::new(t.x, t.y + 1, t.z);
    up.validate(n)?;
    side.validate(n)?;
    let q = Rational::one() - classes.p();
    Ok(classes.get(n, up)? >= &q * &q * classes.get(n, side)?)
}
