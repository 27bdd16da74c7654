//! Class decomposition of ℙ(u ↔ v) and ℙ(u ↔ v') on the K_n bunkbed, the
//! regrouped difference, the partition of unity, the per-row sign/weight
//! comparisons, and an exploratory threshold search.
//!
//! `u` and `v` are bottom columns 0 and 1.

use num_bigint::BigInt;
use num_traits::{One, Signed, Zero};
use rayon::prelude::*;
use serde::Serialize;

use crate::component::ClassProbabilities;
use crate::counting::{
    boundary_count, c1_raw, c2_raw, cdiff_raw, cdiff_sign, count_cdiff, count_total, find_i0, sign_of, Triplet,
};
use crate::engine::{main_component_distribution, Limits};
use crate::error::{Error, Result};
use crate::graph::{BunkbedGraph, EdgeProbabilityVector, Network};
use crate::rational::{grid, pow, rat, Rational};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum Target {
    /// `v`, bottom column 1.
    V,
    /// `v'`, top column 1.
    VPrime,
}

#[derive(Debug, Clone, PartialEq)]
pub struct DecompositionRow {
    pub triplet: Triplet,
    pub c1: BigInt,
    pub c2: BigInt,
    /// `P(x,y,z)`.
    pub connected: Rational,
    /// `B(x,y,z)`.
    pub boundary: u64,
    /// `(C1 - C2) * P * (1-p)^B`, the row's share of the difference.
    pub term: Rational,
    pub term_v: Rational,
    pub term_v_prime: Rational,
}

pub const CSV_HEADER: [&str; 13] =
    ["n", "p_num", "p_den", "x", "y", "z", "C1", "C2", "P_num", "P_den", "B", "term_num", "term_den"];

impl DecompositionRow {
    pub fn csv_record(&self, n: u32, p: &Rational) -> Vec<String> {
        vec![
            n.to_string(),
            p.numer().to_string(),
            p.denom().to_string(),
            self.triplet.x.to_string(),
            self.triplet.y.to_string(),
            self.triplet.z.to_string(),
            self.c1.to_string(),
            self.c2.to_string(),
            self.connected.numer().to_string(),
            self.connected.denom().to_string(),
            self.boundary.to_string(),
            self.term.numer().to_string(),
            self.term.denom().to_string(),
        ]
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct DecompositionReport {
    pub n: u32,
    pub p: Rational,
    pub target: Target,
    /// Engine value of ℙ(u ↔ target).
    pub lhs_direct: Rational,
    /// Class sum for the target.
    pub lhs_decomposed: Rational,
    pub direct_v: Rational,
    pub direct_v_prime: Rational,
    pub decomposed_v: Rational,
    pub decomposed_v_prime: Rational,
    /// `decomposed_v - decomposed_v_prime`.
    pub difference: Rational,
    /// The same difference regrouped over `(z, k, i, eps)` with `C_diff`.
    pub regrouped_difference: Rational,
    /// `z = 0` classes with a nonzero `C2 * P` (must stay empty).
    pub zero_z_violations: Vec<Triplet>,
    pub rows: Vec<DecompositionRow>,
}

impl DecompositionReport {
    pub fn holds(&self) -> bool {
        self.direct_v == self.decomposed_v
            && self.direct_v_prime == self.decomposed_v_prime
            && self.regrouped_difference == self.difference
            && self.zero_z_violations.is_empty()
    }

    pub fn direct_difference(&self) -> Rational {
        &self.direct_v - &self.direct_v_prime
    }
}

/// `(x, y)` pairs with `x >= y` in `(k, i, eps)` order: `x = k + i + eps`,
/// `y = k - i`, for `x + y <= 2n`.
fn regrouped_pairs(n: u32) -> Vec<(u32, u32, u32, u32, u32)> {
    let mut out = Vec::new();
    for k in 0..=n {
        for i in 0..=k {
            for eps in 0..=1 {
                out.push((k, i, eps, k + i + eps, k - i));
            }
        }
    }
    out
}

/// Triplets ordered `z` outer, then `(k, i, eps)`, each `x != y` class
/// followed by its mirror.
pub fn decomposition_order(n: u32) -> Vec<Triplet> {
    let mut out = Vec::new();
    for z in 0..=n {
        for &(_, _, _, x, y) in &regrouped_pairs(n) {
            let t = Triplet::new(x, y, z);
            if t.is_valid(n) {
                out.push(t);
            }
            if x != y && t.mirrored().is_valid(n) {
                out.push(t.mirrored());
            }
        }
    }
    out
}

fn bunkbed_for(n: u32, limits: &Limits) -> Result<BunkbedGraph> {
    let vertices = 2 * n as usize;
    if vertices > limits.dp_vertices {
        return Err(Error::Capacity { what: "K_n bunkbed vertex count", size: vertices, limit: limits.dp_vertices });
    }
    BunkbedGraph::complete(n as usize)
}

/// ℙ(u ↔ v) and ℙ(u ↔ v') on the K_n bunkbed by the subset DP.
pub fn direct_probabilities(n: u32, p: &Rational, limits: &Limits) -> Result<(Rational, Rational)> {
    if n < 2 {
        return Err(Error::InvalidParameter(format!("need n >= 2 for u != v, got {n}")));
    }
    let g = bunkbed_for(n, limits)?;
    let pv = EdgeProbabilityVector::constant(g.edge_count(), p.clone())?;
    let law = main_component_distribution(&g, &pv, 0, limits)?;
    Ok((law.mass_containing(1), law.mass_containing(n as usize + 1)))
}

fn prefetch(n: u32, classes: &ClassProbabilities) -> Result<()> {
    Triplet::all(n).par_iter().try_for_each(|&t| classes.get(n, t).map(|_| ()))
}

pub fn decompose(n: u32, classes: &ClassProbabilities, target: Target) -> Result<DecompositionReport> {
    let limits = *classes.limits();
    let p = classes.p().clone();
    let (direct_v, direct_v_prime) = direct_probabilities(n, &p, &limits)?;
    prefetch(n, classes)?;
    let closed = Rational::one() - &p;

    let mut rows = Vec::new();
    let mut zero_z_violations = Vec::new();
    for t in decomposition_order(n) {
        let connected = classes.get(n, t)?;
        let boundary = boundary_count(n, t)?;
        let weight = pow(&closed, boundary) * &connected;
        let c1 = c1_raw(n, t);
        let c2 = c2_raw(n, t);
        let term_v = Rational::from_integer(c1.clone()) * &weight;
        let term_v_prime = Rational::from_integer(c2.clone()) * &weight;
        if t.z == 0 && !term_v_prime.is_zero() {
            zero_z_violations.push(t);
        }
        rows.push(DecompositionRow {
            triplet: t,
            term: &term_v - &term_v_prime,
            c1,
            c2,
            connected,
            boundary,
            term_v,
            term_v_prime,
        });
    }
    let sum = |f: fn(&DecompositionRow) -> &Rational| rows.iter().fold(Rational::zero(), |acc, r| acc + f(r));
    let decomposed_v = sum(|r| &r.term_v);
    let decomposed_v_prime = sum(|r| &r.term_v_prime);

    let mut regrouped_difference = Rational::zero();
    for z in 0..=n {
        for &(_, _, _, x, y) in &regrouped_pairs(n) {
            let t = Triplet::new(x, y, z);
            if !t.is_valid(n) {
                continue;
            }
            let cd = cdiff_raw(n, t);
            if cd.is_zero() {
                continue;
            }
            regrouped_difference += Rational::from_integer(cd) * classes.weighted(n, t)?;
        }
    }

    let (lhs_direct, lhs_decomposed) = match target {
        Target::V => (direct_v.clone(), decomposed_v.clone()),
        Target::VPrime => (direct_v_prime.clone(), decomposed_v_prime.clone()),
    };
    Ok(DecompositionReport {
        n,
        p,
        target,
        lhs_direct,
        lhs_decomposed,
        difference: &decomposed_v - &decomposed_v_prime,
        direct_v,
        direct_v_prime,
        decomposed_v,
        decomposed_v_prime,
        regrouped_difference,
        zero_z_violations,
        rows,
    })
}

#[derive(Debug, Clone, PartialEq)]
pub struct TheoremPoint {
    pub p: Rational,
    pub prob_v: Rational,
    pub prob_v_prime: Rational,
    pub difference: Rational,
    /// Decomposition equalities held at this point.
    pub decomposition_holds: bool,
    /// Only asserted for `p >= 1/2`.
    pub in_scope: bool,
}

impl TheoremPoint {
    pub fn passed(&self) -> bool {
        self.decomposition_holds && (!self.in_scope || !self.difference.is_negative())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct TheoremCheck {
    pub n: u32,
    pub points: Vec<TheoremPoint>,
    /// CSV records, one per class and parameter value.
    pub rows: Vec<Vec<String>>,
}

impl TheoremCheck {
    pub fn passed(&self) -> bool {
        self.points.iter().all(TheoremPoint::passed)
    }

    pub fn counterexamples(&self) -> impl Iterator<Item = &TheoremPoint> {
        self.points.iter().filter(|pt| !pt.passed())
    }
}

pub fn theorem_check(n: u32, p_list: &[Rational], limits: &Limits) -> Result<TheoremCheck> {
    let half = rat(1, 2);
    let mut points = Vec::with_capacity(p_list.len());
    let mut rows = Vec::new();
    for p in p_list {
        let classes = ClassProbabilities::new(p.clone(), *limits)?;
        let report = decompose(n, &classes, Target::V)?;
        rows.extend(report.rows.iter().map(|r| r.csv_record(n, p)));
        points.push(TheoremPoint {
            p: p.clone(),
            difference: report.direct_difference(),
            decomposition_holds: report.holds(),
            prob_v: report.direct_v,
            prob_v_prime: report.direct_v_prime,
            in_scope: *p >= half,
        });
    }
    Ok(TheoremCheck { n, points, rows })
}

/// `sum_t |G_t| * P(t) * (1-p)^B(t)`; equals 1 because the main component of
/// `u` is exactly one member of exactly one class.
pub fn partition_sum(n: u32, classes: &ClassProbabilities) -> Result<Rational> {
    if n == 0 {
        return Err(Error::InvalidParameter("n must be at least 1".into()));
    }
    prefetch(n, classes)?;
    Triplet::all(n).iter().try_fold(Rational::zero(), |acc, &t| {
        Ok(acc + Rational::from_integer(count_total(n, t)?) * classes.weighted(n, t)?)
    })
}

pub fn partition_check(n: u32, classes: &ClassProbabilities) -> Result<bool> {
    Ok(partition_sum(n, classes)?.is_one())
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub enum RowClaim {
    /// `C_diff < 0` expected below `i0`.
    NegativeBelowAnchor,
    /// `C_diff >= 0` expected from `i0` on.
    NonNegativeFromAnchor,
    /// Sign from the integer polynomial disagrees with the exact count.
    SignMismatch,
    /// `(1-p)^B P` at `i < i0` exceeds its value at `i0`.
    WeightAboveAnchor,
    /// `(1-p)^B P` at `i >= i0` is below its value at `i0`.
    WeightBelowAnchor,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct RowViolation {
    pub k: u32,
    pub z: u32,
    pub eps: u32,
    pub i: u32,
    pub i0: u32,
    pub claim: RowClaim,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct RowReport {
    pub n: u32,
    pub p: String,
    pub rows: usize,
    pub comparisons: usize,
    /// Comparisons with `i < i0`, where `C_diff` is negative.
    pub below_anchor: usize,
    pub violations: Vec<RowViolation>,
    /// Instances where the first displayed comparison fails when read
    /// literally as `(1-p) * P` at the anchor instead of `(1-p)^B * P`.
    /// Informational; the `(1-p)^B` reading is the one checked.
    pub literal_factor_failures: usize,
}

impl RowReport {
    pub fn passed(&self) -> bool {
        self.violations.is_empty()
    }
}

/// For every row `(k, z >= 1, eps)` valid for `n`, checks that `C_diff` is
/// negative exactly below the row's anchor `i0` and that `(1-p)^B P` is at
/// most its anchor value below `i0` and at least it from `i0` on.
pub fn row_check(n: u32, classes: &ClassProbabilities) -> Result<RowReport> {
    if n < 2 {
        return Err(Error::InvalidParameter(format!("need n >= 2, got {n}")));
    }
    prefetch(n, classes)?;
    let closed = Rational::one() - classes.p();
    let mut report = RowReport {
        n,
        p: classes.p().to_string(),
        rows: 0,
        comparisons: 0,
        below_anchor: 0,
        violations: Vec::new(),
        literal_factor_failures: 0,
    };
    for z in 1..=n {
        for eps in 0..=1u32 {
            for k in z..=n {
                if 2 * k + eps - z > n {
                    continue;
                }
                report.rows += 1;
                let i0 = find_i0(k, eps, z)?;
                let anchor = Triplet::new(k + i0 + eps, k - i0, z);
                let anchor_weight = classes.weighted(n, anchor)?;
                let anchor_literal = &closed * classes.get(n, anchor)?;
                for i in 0..=k - z {
                    let t = Triplet::new(k + i + eps, k - i, z);
                    let sign = cdiff_sign(n, k, i, eps, z)?;
                    let exact = sign_of(&count_cdiff(n, k, i, eps, z)?);
                    let weight = classes.weighted(n, t)?;
                    report.comparisons += 1;
                    let mut flag = |claim| {
                        report.violations.push(RowViolation { k, z, eps, i, i0, claim });
                    };
                    if sign != exact {
                        flag(RowClaim::SignMismatch);
                    }
                    if i < i0 {
                        report.below_anchor += 1;
                        if sign >= 0 {
                            flag(RowClaim::NegativeBelowAnchor);
                        }
                        if weight > anchor_weight {
                            flag(RowClaim::WeightAboveAnchor);
                        }
                        if weight > anchor_literal {
                            report.literal_factor_failures += 1;
                        }
                    } else {
                        if sign < 0 {
                            flag(RowClaim::NonNegativeFromAnchor);
                        }
                        if weight < anchor_weight {
                            flag(RowClaim::WeightBelowAnchor);
                        }
                    }
                }
            }
        }
    }
    Ok(report)
}

#[derive(Debug, Clone, PartialEq)]
pub struct ThresholdPoint {
    pub p: Rational,
    pub rows_hold: bool,
    pub difference: Rational,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ThresholdReport {
    pub n: u32,
    pub step: Rational,
    /// Smallest grid value from which the row comparisons hold at every grid
    /// value up to 1.
    pub row_threshold: Option<Rational>,
    /// Smallest grid value from which the difference is non-negative at
    /// every grid value up to 1.
    pub difference_threshold: Option<Rational>,
    pub points: Vec<ThresholdPoint>,
}

fn upward_threshold(points: &[ThresholdPoint], ok: impl Fn(&ThresholdPoint) -> bool) -> Option<Rational> {
    let mut threshold = None;
    for pt in points.iter().rev() {
        if !ok(pt) {
            break;
        }
        threshold = Some(pt.p.clone());
    }
    threshold
}

pub fn threshold_search(n: u32, step: &Rational, limits: &Limits) -> Result<ThresholdReport> {
    let ps = grid(&Rational::zero(), &Rational::one(), step)?;
    let points = ps
        .into_iter()
        .map(|p| {
            let classes = ClassProbabilities::new(p.clone(), *limits)?;
            let rows_hold = row_check(n, &classes)?.passed();
            let (v, vp) = direct_probabilities(n, &p, limits)?;
            Ok(ThresholdPoint { p, rows_hold, difference: v - vp })
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(ThresholdReport {
        n,
        step: step.clone(),
        row_threshold: upward_threshold(&points, |pt| pt.rows_hold),
        difference_threshold: upward_threshold(&points, |pt| !pt.difference.is_negative()),
        points,
    })
}
