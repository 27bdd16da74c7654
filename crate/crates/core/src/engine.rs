//! Exact connection probabilities.
//!
//! Two independent routes:
//!
//! * a subset dynamic program over vertex sets containing the source, which
//!   computes the probability that each induced subgraph is internally
//!   connected and from it the law of the source's main component, in
//!   `O(3^|V|)` subset pairs;
//! * a full enumeration of the `2^|E|` configurations with a union-find per
//!   configuration, used as the oracle.
//!
//! Both routes work over a common denominator: with `D` the lcm of all edge
//! probability denominators, every `p_e = P_e / D` and `1 - p_e = Q_e / D`,
//! so the connectedness probability of a vertex set `S` times `D^{e(S)}` is
//! an integer (`e(S)` = number of edges inside `S`). The inner loops are pure
//! big-integer arithmetic; the single division happens at the end.

use std::collections::BTreeMap;

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Zero};
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::graph::{Configuration, EdgeProbabilityVector, Network};
use crate::rational::Rational;
use crate::unionfind::UnionFind;

/// Capacity limits of the exact routes.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Limits {
    /// Largest vertex count accepted by the subset DP.
    pub dp_vertices: usize,
    /// Largest edge count accepted by the enumeration oracle.
    pub enum_edges: usize,
}

impl Limits {
    pub const DEFAULT_DP_VERTICES: usize = 20;
    pub const DEFAULT_ENUM_EDGES: usize = 25;
    /// Masks are `u64` and the DP tables are indexed by mask.
    pub const HARD_DP_VERTICES: usize = 24;
}

impl Default for Limits {
    fn default() -> Self {
        Self { dp_vertices: Self::DEFAULT_DP_VERTICES, enum_edges: Self::DEFAULT_ENUM_EDGES }
    }
}

/// Law of the main component of `source`: every vertex set containing the
/// source (as a bitmask), mapped to the probability that it is exactly the
/// set of vertices joined to the source by open paths. Sets that can never be
/// the main component are present with mass zero.
#[derive(Debug, Clone, PartialEq)]
pub struct ComponentDistribution {
    source: usize,
    entries: BTreeMap<u64, Rational>,
}

impl ComponentDistribution {
    pub fn source(&self) -> usize {
        self.source
    }

    pub fn entries(&self) -> &BTreeMap<u64, Rational> {
        &self.entries
    }

    pub fn mass(&self, set: u64) -> Rational {
        self.entries.get(&set).cloned().unwrap_or_else(Rational::zero)
    }

    pub fn total(&self) -> Rational {
        self.entries.values().fold(Rational::zero(), |acc, v| acc + v)
    }

    /// ℙ(source ↔ b).
    pub fn mass_containing(&self, b: usize) -> Rational {
        self.entries.iter().filter(|(s, _)| *s >> b & 1 == 1).fold(Rational::zero(), |acc, (_, v)| acc + v)
    }

    /// Sets carrying positive mass.
    pub fn support(&self) -> impl Iterator<Item = (&u64, &Rational)> {
        self.entries.iter().filter(|(_, v)| !v.is_zero())
    }
}

/// Integer numerators of the edge probabilities over a common denominator.
#[derive(Debug, Clone)]
struct CommonDenominator {
    denom: BigInt,
    open: Vec<BigInt>,
    closed: Vec<BigInt>,
}

impl CommonDenominator {
    fn new(p: &EdgeProbabilityVector) -> Self {
        let denom = p.values().iter().fold(BigInt::one(), |acc, v| acc.lcm(v.denom()));
        let open: Vec<BigInt> = p.values().iter().map(|v| v.numer() * (&denom / v.denom())).collect();
        let closed = open.iter().map(|o| &denom - o).collect();
        Self { denom, open, closed }
    }

    fn denom_pow(&self, k: usize) -> BigInt {
        num_traits::pow(self.denom.clone(), k)
    }
}

/// Edges grouped by their closed numerator `Q_e`, with per-class inner edge
/// counts for every vertex mask so that cut sizes are O(1) lookups.
struct ClosedClass {
    powers: Vec<BigInt>,
    inner: Vec<u16>,
}

struct SubsetDp {
    n: usize,
    full: u64,
    edge_total: usize,
    inner_all: Vec<u16>,
    classes: Vec<ClosedClass>,
    denom_powers: Vec<BigInt>,
}

fn inner_counts(n: usize, edges: impl Iterator<Item = (usize, usize)>) -> Vec<u16> {
    let mut adj = vec![0u64; n];
    for (a, b) in edges {
        adj[a] |= 1 << b;
        adj[b] |= 1 << a;
    }
    let size = 1usize << n;
    let mut inner = vec![0u16; size];
    for mask in 1..size {
        let v = mask.trailing_zeros() as usize;
        let rest = mask & (mask - 1);
        inner[mask] = inner[rest] + (adj[v] & rest as u64).count_ones() as u16;
    }
    inner
}

impl SubsetDp {
    fn new(net: &impl Network, p: &EdgeProbabilityVector, limits: &Limits) -> Result<Self> {
        p.check_size(net)?;
        let n = net.vertex_count();
        let limit = limits.dp_vertices.min(Limits::HARD_DP_VERTICES);
        if n > limit {
            return Err(Error::Capacity { what: "subset DP vertex count", size: n, limit });
        }
        let weights = CommonDenominator::new(p);
        let edges = net.edges();

        let mut by_closed: BTreeMap<&BigInt, Vec<usize>> = BTreeMap::new();
        for (e, q) in weights.closed.iter().enumerate() {
            by_closed.entry(q).or_default().push(e);
        }
        let inner_all = inner_counts(n, edges.iter().copied());
        let classes = by_closed
            .into_iter()
            .map(|(q, members)| {
                let mut powers = Vec::with_capacity(members.len() + 1);
                let mut acc = BigInt::one();
                for _ in 0..=members.len() {
                    powers.push(acc.clone());
                    acc *= q;
                }
                let inner = if members.len() == edges.len() {
                    inner_all.clone()
                } else {
                    inner_counts(n, members.iter().map(|&e| edges[e]))
                };
                ClosedClass { powers, inner }
            })
            .collect();
        let denom_powers = (0..=edges.len()).map(|k| weights.denom_pow(k)).collect();
        Ok(Self {
            n,
            full: if n == 64 { u64::MAX } else { (1u64 << n) - 1 },
            edge_total: edges.len(),
            inner_all,
            classes,
            denom_powers,
        })
    }

    fn inner(&self, mask: u64) -> usize {
        self.inner_all[mask as usize] as usize
    }

    /// Product of `Q_e` over edges between the disjoint sets `a` and `b`.
    fn closed_cut(&self, a: u64, b: u64) -> BigInt {
        let union = (a | b) as usize;
        let mut acc: Option<BigInt> = None;
        for class in &self.classes {
            let k = (class.inner[union] - class.inner[a as usize] - class.inner[b as usize]) as usize;
            if k == 0 {
                continue;
            }
            let f = &class.powers[k];
            acc = Some(match acc {
                None => f.clone(),
                Some(x) => x * f,
            });
        }
        acc.unwrap_or_else(BigInt::one)
    }

    /// `conn(S) * D^{e(S)}` for every mask `S` containing `anchor`; entries
    /// for masks without the anchor are zero.
    fn connected_numerators(&self, anchor: usize) -> Vec<BigInt> {
        let abit = 1u64 << anchor;
        let others = self.full & !abit;
        let mut by_size: Vec<Vec<u64>> = vec![Vec::new(); self.n];
        let mut rest = others;
        loop {
            by_size[rest.count_ones() as usize].push(rest | abit);
            if rest == 0 {
                break;
            }
            rest = (rest - 1) & others;
        }
        let mut table = vec![BigInt::zero(); 1usize << self.n];
        for layer in by_size {
            let computed: Vec<(u64, BigInt)> =
                layer.par_iter().map(|&s| (s, self.connected_numerator(s, abit, &table))).collect();
            for (s, v) in computed {
                table[s as usize] = v;
            }
        }
        table
    }

    fn connected_numerator(&self, s: u64, abit: u64, table: &[BigInt]) -> BigInt {
        let rest = s & !abit;
        let mut disconnected = BigInt::zero();
        if rest != 0 {
            // Proper subsets T of S containing the anchor: T = sub | anchor, sub ⊊ rest.
            let mut sub = (rest - 1) & rest;
            loop {
                let t = sub | abit;
                let nt = &table[t as usize];
                if !nt.is_zero() {
                    let r = rest & !sub;
                    let mut term = nt * &self.denom_powers[self.inner(r)];
                    term *= self.closed_cut(t, r);
                    disconnected += term;
                }
                if sub == 0 {
                    break;
                }
                sub = (sub - 1) & rest;
            }
        }
        &self.denom_powers[self.inner(s)] - disconnected
    }

    /// Numerator (over `D^{|E|}`) of ℙ(main component of anchor = S).
    fn component_numerator(&self, s: u64, conn: &[BigInt]) -> BigInt {
        let c = &conn[s as usize];
        if c.is_zero() {
            return BigInt::zero();
        }
        let outside = self.full & !s;
        c * &self.denom_powers[self.inner(outside)] * self.closed_cut(s, outside)
    }

    fn total_denominator(&self) -> BigInt {
        self.denom_powers[self.edge_total].clone()
    }

    fn masks_containing(&self, anchor: usize) -> impl Iterator<Item = u64> + '_ {
        let abit = 1u64 << anchor;
        (0..=self.full).filter(move |s| s & abit != 0)
    }
}

fn check_vertex(net: &impl Network, v: usize) -> Result<()> {
    if v >= net.vertex_count() {
        return Err(Error::InvalidVertex { index: v, count: net.vertex_count() });
    }
    Ok(())
}

/// ℙ(a ↔ b) by the subset DP.
pub fn prob_connected_dp(
    net: &impl Network,
    p: &EdgeProbabilityVector,
    a: usize,
    b: usize,
    limits: &Limits,
) -> Result<Rational> {
    check_vertex(net, a)?;
    check_vertex(net, b)?;
    p.check_size(net)?;
    if a == b {
        return Ok(Rational::one());
    }
    Ok(main_component_distribution(net, p, a, limits)?.mass_containing(b))
}

/// Law of the main component of `source` by the subset DP.
pub fn main_component_distribution(
    net: &impl Network,
    p: &EdgeProbabilityVector,
    source: usize,
    limits: &Limits,
) -> Result<ComponentDistribution> {
    check_vertex(net, source)?;
    let dp = SubsetDp::new(net, p, limits)?;
    let conn = dp.connected_numerators(source);
    let denom = dp.total_denominator();
    let masks: Vec<u64> = dp.masks_containing(source).collect();
    let entries =
        masks.par_iter().map(|&s| (s, Rational::new(dp.component_numerator(s, &conn), denom.clone()))).collect();
    Ok(ComponentDistribution { source, entries })
}

/// Probability that the whole vertex set of `net` is connected through open
/// edges (for `net` with one vertex this is 1).
pub fn prob_all_connected_dp(net: &impl Network, p: &EdgeProbabilityVector, limits: &Limits) -> Result<Rational> {
    if net.vertex_count() == 0 {
        return Ok(Rational::one());
    }
    let dp = SubsetDp::new(net, p, limits)?;
    let conn = dp.connected_numerators(0);
    Ok(Rational::new(conn[dp.full as usize].clone(), dp.total_denominator()))
}

/// Probability of an event on the pair of main components of `a` and `b`.
///
/// `event(ca, cb)` receives the vertex masks of both components (equal when
/// `a ↔ b`). Computed by the subset DP: given that the component of `a` is
/// `S`, the edges outside `S` and its boundary are independent of that event,
/// so the component of `b` follows the DP law of the graph induced on the
/// complement.
pub fn prob_component_pair_event_dp<F>(
    net: &impl Network,
    p: &EdgeProbabilityVector,
    a: usize,
    b: usize,
    limits: &Limits,
    event: F,
) -> Result<Rational>
where
    F: Fn(u64, u64) -> bool + Sync,
{
    check_vertex(net, a)?;
    check_vertex(net, b)?;
    let dp = SubsetDp::new(net, p, limits)?;
    let conn_a = dp.connected_numerators(a);
    let conn_b = if a == b { conn_a.clone() } else { dp.connected_numerators(b) };
    let bbit = 1u64 << b;
    let masks: Vec<u64> = dp.masks_containing(a).collect();
    let total = masks
        .par_iter()
        .map(|&s| {
            if conn_a[s as usize].is_zero() {
                return BigInt::zero();
            }
            if s & bbit != 0 {
                return if event(s, s) { dp.component_numerator(s, &conn_a) } else { BigInt::zero() };
            }
            let outside = dp.full & !s;
            let mut inner_sum = BigInt::zero();
            let others = outside & !bbit;
            let mut sub = others;
            loop {
                let sb = sub | bbit;
                let nb = &conn_b[sb as usize];
                if !nb.is_zero() && event(s, sb) {
                    let rest = outside & !sb;
                    inner_sum += nb * &dp.denom_powers[dp.inner(rest)] * dp.closed_cut(sb, rest);
                }
                if sub == 0 {
                    break;
                }
                sub = (sub - 1) & others;
            }
            if inner_sum.is_zero() {
                return inner_sum;
            }
            &conn_a[s as usize] * dp.closed_cut(s, outside) * inner_sum
        })
        .reduce(BigInt::zero, |x, y| x + y);
    Ok(Rational::new(total, dp.total_denominator()))
}

/// One enumerated configuration together with its cluster labels.
pub struct Outcome<'a> {
    config: Configuration,
    labels: &'a [u32],
}

impl Outcome<'_> {
    pub fn configuration(&self) -> &Configuration {
        &self.config
    }

    pub fn connected(&self, a: usize, b: usize) -> bool {
        self.labels[a] == self.labels[b]
    }

    /// Cluster representative of every vertex.
    pub fn labels(&self) -> &[u32] {
        self.labels
    }
}

/// Exact probability of an event by enumerating every configuration.
pub fn prob_event_enum<F>(net: &impl Network, p: &EdgeProbabilityVector, limits: &Limits, event: F) -> Result<Rational>
where
    F: Fn(&Outcome<'_>) -> bool + Sync,
{
    accumulate_enum(net, p, limits, |o, w, acc| {
        if event(o) {
            *acc += w;
        }
    })
}

/// Exact expectation of an integer-valued functional of the configuration.
pub fn expectation_enum<F>(net: &impl Network, p: &EdgeProbabilityVector, limits: &Limits, value: F) -> Result<Rational>
where
    F: Fn(&Outcome<'_>) -> BigInt + Sync,
{
    accumulate_enum(net, p, limits, |o, w, acc| {
        let v = value(o);
        if !v.is_zero() {
            *acc += v * w;
        }
    })
}

fn accumulate_enum<F>(net: &impl Network, p: &EdgeProbabilityVector, limits: &Limits, visit: F) -> Result<Rational>
where
    F: Fn(&Outcome<'_>, &BigInt, &mut BigInt) + Sync,
{
    p.check_size(net)?;
    let m = net.edge_count();
    let limit = limits.enum_edges.min(Configuration::MAX_WIDTH - 1);
    if m > limit {
        return Err(Error::Capacity { what: "enumeration edge count", size: m, limit });
    }
    let weights = CommonDenominator::new(p);
    let edges = net.edges();
    let n = net.vertex_count();
    let low_bits = m.div_ceil(2);
    let high_bits = m - low_bits;

    let half_weights = |offset: usize, bits: usize| -> Vec<BigInt> {
        let mut w = vec![BigInt::one()];
        for j in 0..bits {
            let e = offset + j;
            let closed: Vec<BigInt> = w.iter().map(|x| x * &weights.closed[e]).collect();
            let open: Vec<BigInt> = w.iter().map(|x| x * &weights.open[e]).collect();
            w = closed;
            w.extend(open);
        }
        w
    };
    let low_w = half_weights(0, low_bits);
    let high_w = half_weights(low_bits, high_bits);

    let total = (0u64..1 << high_bits)
        .into_par_iter()
        .map_init(
            || (UnionFind::new(n), UnionFind::new(n), vec![0u32; n]),
            |(base, work, labels), high| {
                if high_w[high as usize].is_zero() {
                    return BigInt::zero();
                }
                base.reset();
                for j in 0..high_bits {
                    if high >> j & 1 == 1 {
                        let (x, y) = edges[low_bits + j];
                        base.union(x, y);
                    }
                }
                let mut acc = BigInt::zero();
                for low in 0u64..1 << low_bits {
                    let w = &low_w[low as usize];
                    if w.is_zero() {
                        continue;
                    }
                    work.copy_from(base);
                    for (j, &(x, y)) in edges.iter().enumerate().take(low_bits) {
                        if low >> j & 1 == 1 {
                            work.union(x, y);
                        }
                    }
                    work.labels_into(labels);
                    let config = Configuration::from_mask_unchecked(low | high << low_bits, m);
                    visit(&Outcome { config, labels }, w, &mut acc);
                }
                acc * &high_w[high as usize]
            },
        )
        .reduce(BigInt::zero, |x, y| x + y);
    Ok(Rational::new(total, weights.denom_pow(m)))
}

/// ℙ(a ↔ b) by full enumeration.
pub fn prob_connected_enum(
    net: &impl Network,
    p: &EdgeProbabilityVector,
    a: usize,
    b: usize,
    limits: &Limits,
) -> Result<Rational> {
    check_vertex(net, a)?;
    check_vertex(net, b)?;
    prob_event_enum(net, p, limits, |o| o.connected(a, b))
}

/// Probability of a single configuration.
pub fn configuration_probability(p: &EdgeProbabilityVector, config: &Configuration) -> Result<Rational> {
    if config.width() != p.len() {
        return Err(Error::SizeMismatch { expected: config.width(), got: p.len() });
    }
    Ok(p.values().iter().enumerate().fold(Rational::one(), |acc, (e, pe)| {
        if config.is_open(e) {
            acc * pe
        } else {
            acc * (Rational::one() - pe)
        }
    }))
}

/// Cluster labels of a configuration.
pub fn cluster_labels(net: &impl Network, config: &Configuration) -> Result<Vec<u32>> {
    if config.width() != net.edge_count() {
        return Err(Error::SizeMismatch { expected: net.edge_count(), got: config.width() });
    }
    let mut uf = UnionFind::new(net.vertex_count());
    for e in config.open_edges() {
        let (x, y) = net.edges()[e];
        uf.union(x, y);
    }
    let mut labels = vec![0; net.vertex_count()];
    uf.labels_into(&mut labels);
    Ok(labels)
}
