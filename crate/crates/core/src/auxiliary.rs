//! The averaged inequality and its per-configuration cluster identity, the
//! separation upper bound on |ℙ(u ↔ v) − ℙ(u ↔ v')|, and the line-segment
//! closed form.

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Signed, Zero};
use serde::Serialize;

use crate::engine::{
    cluster_labels, expectation_enum, main_component_distribution, prob_component_pair_event_dp, prob_event_enum,
    Limits,
};
use crate::error::{Error, Result};
use crate::graph::{BunkbedGraph, Configuration, EdgeProbabilityVector, Level, Network, OriginalGraph};
use crate::rational::{pow, Rational};

/// A law on the columns of a bunkbed graph, read as a law on bottom vertices.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BottomDistribution {
    weights: Vec<Rational>,
}

impl BottomDistribution {
    pub fn new(weights: Vec<Rational>) -> Result<Self> {
        if weights.is_empty() {
            return Err(Error::MalformedDistribution("no weights".into()));
        }
        if let Some(w) = weights.iter().find(|w| w.is_negative()) {
            return Err(Error::MalformedDistribution(format!("negative weight {w}")));
        }
        let total: Rational = weights.iter().sum();
        if !total.is_one() {
            return Err(Error::MalformedDistribution(format!("weights sum to {total}")));
        }
        Ok(Self { weights })
    }

    pub fn uniform(columns: usize) -> Result<Self> {
        if columns == 0 {
            return Err(Error::MalformedDistribution("no weights".into()));
        }
        Self::new(vec![Rational::new(BigInt::one(), BigInt::from(columns)); columns])
    }

    pub fn point(columns: usize, column: usize) -> Result<Self> {
        if column >= columns {
            return Err(Error::InvalidVertex { index: column, count: columns });
        }
        let mut w = vec![Rational::zero(); columns];
        w[column] = Rational::one();
        Self::new(w)
    }

    pub fn weights(&self) -> &[Rational] {
        &self.weights
    }

    pub fn len(&self) -> usize {
        self.weights.len()
    }

    pub fn is_empty(&self) -> bool {
        self.weights.is_empty()
    }

    fn check_columns(&self, g: &BunkbedGraph) -> Result<()> {
        if self.len() != g.columns() {
            return Err(Error::MalformedDistribution(format!("{} weights for {} columns", self.len(), g.columns())));
        }
        Ok(())
    }

    /// Common denominator of the weights together with the scaled integer
    /// weights.
    fn scaled(&self) -> (BigInt, Vec<BigInt>) {
        let l = self.weights.iter().fold(BigInt::one(), |acc, w| acc.lcm(w.denom()));
        let ints = self.weights.iter().map(|w| w.numer() * (&l / w.denom())).collect();
        (l, ints)
    }
}

/// Columns of one cluster, split by level.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct ClusterSlices {
    pub bottom: Vec<usize>,
    pub top: Vec<usize>,
}

impl ClusterSlices {
    fn masses(&self, w: &[BigInt]) -> (BigInt, BigInt) {
        let sum = |cols: &[usize]| cols.iter().map(|&c| &w[c]).sum::<BigInt>();
        (sum(&self.bottom), sum(&self.top))
    }
}

/// Clusters of `labels` as column slices, in order of first vertex.
pub fn cluster_slices(g: &BunkbedGraph, labels: &[u32]) -> Vec<ClusterSlices> {
    let n = g.columns();
    let mut index = vec![usize::MAX; labels.len()];
    let mut out: Vec<ClusterSlices> = Vec::new();
    for (v, &root) in labels.iter().enumerate() {
        let slot = &mut index[root as usize];
        if *slot == usize::MAX {
            *slot = out.len();
            out.push(ClusterSlices::default());
        }
        let c = &mut out[*slot];
        if v < n {
            c.bottom.push(v);
        } else {
            c.top.push(v - n);
        }
    }
    out
}

/// `sum_C (a_C - b_C)^2` with masses scaled by the distribution's common
/// denominator.
fn scaled_identity(g: &BunkbedGraph, labels: &[u32], w: &[BigInt]) -> BigInt {
    cluster_slices(g, labels)
        .iter()
        .map(|c| {
            let (a, b) = c.masses(w);
            let d = a - b;
            &d * &d
        })
        .sum()
}

/// `E[1{X↔Y} + 1{X'↔Y'}] - E[1{X↔Y'} + 1{X'↔Y}]` in the configuration `config`
/// for `X`, `Y` independent with law `d`. Verified against the sum of squared
/// slice-mass differences over clusters.
pub fn mean_identity_check(g: &BunkbedGraph, config: &Configuration, d: &BottomDistribution) -> Result<Rational> {
    d.check_columns(g)?;
    let labels = cluster_labels(g, config)?;
    let n = g.columns();
    let conn = |a: usize, b: usize| labels[a] == labels[b];
    let mut direct = Rational::zero();
    for x in 0..n {
        for y in 0..n {
            let (xt, yt) = (g.vertex(x, Level::Top), g.vertex(y, Level::Top));
            let score = conn(x, y) as i32 + conn(xt, yt) as i32 - conn(x, yt) as i32 - conn(xt, y) as i32;
            if score != 0 {
                direct += &d.weights[x] * &d.weights[y] * Rational::from_integer(score.into());
            }
        }
    }
    let (l, w) = d.scaled();
    let squares = Rational::new(scaled_identity(g, &labels, &w), &l * &l);
    if squares != direct {
        return Err(Error::IdentityMismatch(format!(
            "configuration {config}: pair sum {direct}, cluster sum {squares}"
        )));
    }
    Ok(direct)
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct MeanInequalityReport {
    /// `E[ℙ(X ↔ Y)] - E[ℙ(X ↔ Y')]` from pairwise connection probabilities.
    pub difference: Rational,
    /// Half the expected cluster identity over all configurations.
    pub via_identity: Rational,
}

impl MeanInequalityReport {
    pub fn passed(&self) -> bool {
        self.difference == self.via_identity && !self.difference.is_negative()
    }
}

/// The averaged inequality for a constrained vector, computed both from the
/// component laws of each bottom vertex and by enumerating the cluster
/// identity.
pub fn mean_inequality_check(
    g: &BunkbedGraph,
    p: &EdgeProbabilityVector,
    d: &BottomDistribution,
    limits: &Limits,
) -> Result<MeanInequalityReport> {
    d.check_columns(g)?;
    if !g.validate_constrained(p)? {
        return Err(Error::Unconstrained);
    }
    let n = g.columns();
    let mut difference = Rational::zero();
    for x in 0..n {
        if d.weights[x].is_zero() {
            continue;
        }
        let law = main_component_distribution(g, p, x, limits)?;
        for y in 0..n {
            let gap = law.mass_containing(y) - law.mass_containing(g.vertex(y, Level::Top));
            difference += &d.weights[x] * &d.weights[y] * gap;
        }
    }
    let (l, w) = d.scaled();
    let expected = expectation_enum(g, p, limits, |o| scaled_identity(g, o.labels(), &w))?;
    let via_identity = expected / Rational::from_integer(&l * &l * 2);
    Ok(MeanInequalityReport { difference, via_identity })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum Route {
    Enumeration,
    ComponentDp,
}

#[derive(Debug, Clone, PartialEq)]
pub struct UpperBoundReport {
    pub route: Route,
    pub prob_v: Rational,
    pub prob_v_prime: Rational,
    /// ℙ(u ↮ u' ∩ v ↮ v').
    pub separation: Rational,
    /// ℙ(u ↮ u').
    pub u_separation: Rational,
    /// `(1-p)(1-p^3)^(n-1)` for K_n with a constant parameter.
    pub chain_bound: Option<Rational>,
}

impl UpperBoundReport {
    pub fn difference(&self) -> Rational {
        &self.prob_v - &self.prob_v_prime
    }

    pub fn inequality_holds(&self) -> bool {
        self.difference().abs() <= self.separation
    }

    pub fn chain_holds(&self) -> bool {
        match &self.chain_bound {
            Some(b) => self.separation <= self.u_separation && self.u_separation <= *b,
            None => true,
        }
    }

    pub fn passed(&self) -> bool {
        self.inequality_holds() && self.chain_holds()
    }
}

fn is_complete(g: &OriginalGraph) -> bool {
    let n = g.n_vertices();
    g.edge_count() == n * (n - 1) / 2
}

/// Checks `|ℙ(u ↔ v) - ℙ(u ↔ v')| <= ℙ(u ↮ u' ∩ v ↮ v')`. Uses the subset DP
/// when the vertex count allows it and full enumeration otherwise.
pub fn upper_bound_check(
    g: &BunkbedGraph,
    p: &EdgeProbabilityVector,
    u: usize,
    v: usize,
    limits: &Limits,
) -> Result<UpperBoundReport> {
    p.check_size(g)?;
    let (up, vp) = (g.symmetric_vertex(u)?, g.symmetric_vertex(v)?);
    let (route, prob_v, prob_v_prime, separation, u_separation) = if g.vertex_count() <= limits.dp_vertices {
        let law = main_component_distribution(g, p, u, limits)?;
        let (ub, vb) = (1u64 << up, 1u64 << vp);
        let separation = prob_component_pair_event_dp(g, p, u, v, limits, |a, b| a & ub == 0 && b & vb == 0)?;
        let u_separation = Rational::one() - law.mass_containing(up);
        (Route::ComponentDp, law.mass_containing(v), law.mass_containing(vp), separation, u_separation)
    } else {
        let pr = |f: &(dyn Fn(&crate::engine::Outcome<'_>) -> bool + Sync)| prob_event_enum(g, p, limits, f);
        (
            Route::Enumeration,
            pr(&|o| o.connected(u, v))?,
            pr(&|o| o.connected(u, vp))?,
            pr(&|o| !o.connected(u, up) && !o.connected(v, vp))?,
            pr(&|o| !o.connected(u, up))?,
        )
    };
    let chain_bound = match p.as_constant() {
        Some(q) if is_complete(g.original()) => {
            let closed = Rational::one() - q;
            Some(&closed * pow(&(Rational::one() - pow(q, 3)), g.columns() as u64 - 1))
        }
        _ => None,
    };
    Ok(UpperBoundReport { route, prob_v, prob_v_prime, separation, u_separation, chain_bound })
}

#[derive(Debug, Clone, PartialEq)]
pub struct SegmentReport {
    pub n: usize,
    /// Every vertical closed and every bottom edge open.
    pub closed_form: Rational,
    /// The same product with the last vertical factor dropped.
    pub short_form: Rational,
    /// ℙ(u ↔ v) - ℙ(u ↔ v') from the engine.
    pub engine: Rational,
    pub route: Route,
}

impl SegmentReport {
    pub fn closed_form_matches(&self) -> bool {
        self.closed_form == self.engine
    }

    pub fn short_form_matches(&self) -> bool {
        self.short_form == self.engine
    }
}

fn is_path(g: &OriginalGraph) -> bool {
    g.edges().iter().enumerate().all(|(i, &(a, b))| (a, b) == (i, i + 1) || (a, b) == (i + 1, i))
        && g.edge_count() + 1 == g.n_vertices()
}

/// ℙ(u ↔ v ∩ no vertical open) on the line-segment bunkbed, with `u` and `v`
/// the bottom endpoints, compared with the engine difference. Enumerates when
/// the edge count allows it.
pub fn segment_difference(g: &BunkbedGraph, p: &EdgeProbabilityVector, limits: &Limits) -> Result<SegmentReport> {
    if !is_path(g.original()) {
        return Err(Error::InvalidGraph("expected the bunkbed graph of a line segment".into()));
    }
    if !g.validate_constrained(p)? {
        return Err(Error::Unconstrained);
    }
    let n = g.columns();
    let closed = |c: usize| Rational::one() - p.get(g.vertical_edge(c));
    let bottom: Rational = (0..n - 1).map(|e| p.get(e).clone()).product();
    let verticals: Vec<Rational> = (0..n).map(closed).collect();
    let closed_form = verticals.iter().product::<Rational>() * &bottom;
    let short_form = verticals[..n - 1].iter().product::<Rational>() * &bottom;

    let (u, v, vp) = (0, n - 1, g.vertex(n - 1, Level::Top));
    let (engine, route) = if g.edge_count() <= limits.enum_edges {
        let d = prob_event_enum(g, p, limits, |o| o.connected(u, v))?
            - prob_event_enum(g, p, limits, |o| o.connected(u, vp))?;
        (d, Route::Enumeration)
    } else {
        let law = main_component_distribution(g, p, u, limits)?;
        (law.mass_containing(v) - law.mass_containing(vp), Route::ComponentDp)
    };
    Ok(SegmentReport { n, closed_form, short_form, engine, route })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rational::{int, rat};

    fn constant(g: &BunkbedGraph, p: Rational) -> EdgeProbabilityVector {
        EdgeProbabilityVector::constant(g.edge_count(), p).unwrap()
    }

    #[test]
    fn identity_examples() {
        let g = BunkbedGraph::complete(2).unwrap();
        let d = BottomDistribution::uniform(2).unwrap();
        let closed = Configuration::all_closed(g.edge_count()).unwrap();
        assert_eq!(mean_identity_check(&g, &closed, &d).unwrap(), int(1));
        let open = Configuration::all_open(g.edge_count()).unwrap();
        assert_eq!(mean_identity_check(&g, &open, &d).unwrap(), int(0));
        let one = Configuration::from_open_edges(g.edge_count(), [g.vertical_edge(0)]).unwrap();
        let point = BottomDistribution::point(2, 0).unwrap();
        assert_eq!(mean_identity_check(&g, &one, &point).unwrap(), int(0));
    }

    #[test]
    fn malformed_distributions() {
        assert!(matches!(BottomDistribution::new(vec![rat(1, 2)]), Err(Error::MalformedDistribution(_))));
        assert!(matches!(BottomDistribution::new(vec![rat(3, 2), rat(-1, 2)]), Err(Error::MalformedDistribution(_))));
        let g = BunkbedGraph::complete(3).unwrap();
        let d = BottomDistribution::uniform(2).unwrap();
        let c = Configuration::all_closed(g.edge_count()).unwrap();
        assert!(mean_identity_check(&g, &c, &d).is_err());
    }

    #[test]
    fn mean_inequality_examples() {
        let l = Limits::default();
        let g = BunkbedGraph::complete(2).unwrap();
        let r =
            mean_inequality_check(&g, &constant(&g, rat(1, 2)), &BottomDistribution::uniform(2).unwrap(), &l).unwrap();
        assert!(r.passed());
        let p = constant(&g, rat(1, 2));
        let r = mean_inequality_check(&g, &p, &BottomDistribution::point(2, 0).unwrap(), &l).unwrap();
        let law = main_component_distribution(&g, &p, 0, &l).unwrap();
        assert_eq!(r.difference, Rational::one() - law.mass_containing(2));
        assert!(r.passed());
    }

    #[test]
    fn mean_inequality_rejects_unconstrained() {
        let g = BunkbedGraph::complete(2).unwrap();
        let mut v = vec![rat(1, 2); g.edge_count()];
        v[0] = rat(1, 3);
        let p = EdgeProbabilityVector::new(v).unwrap();
        let d = BottomDistribution::uniform(2).unwrap();
        assert_eq!(mean_inequality_check(&g, &p, &d, &Limits::default()), Err(Error::Unconstrained));
    }

    #[test]
    fn upper_bound_square() {
        let g = BunkbedGraph::complete(2).unwrap();
        let l = Limits::default();
        let r = upper_bound_check(&g, &constant(&g, rat(1, 2)), 0, 1, &l).unwrap();
        assert_eq!(r.difference(), rat(1, 8));
        assert_eq!(r.chain_bound, Some(rat(7, 16)));
        assert!(r.passed());
        let r = upper_bound_check(&g, &constant(&g, int(1)), 0, 1, &l).unwrap();
        assert_eq!(r.separation, int(0));
        assert!(r.passed());
        let r = upper_bound_check(&g, &constant(&g, int(0)), 0, 1, &l).unwrap();
        assert_eq!(r.separation, int(1));
        assert!(r.passed());
    }

    #[test]
    fn upper_bound_routes_agree() {
        let g = BunkbedGraph::complete(3).unwrap();
        let p = constant(&g, rat(3, 5));
        let dp = upper_bound_check(&g, &p, 0, 1, &Limits::default()).unwrap();
        let en = upper_bound_check(&g, &p, 0, 1, &Limits { dp_vertices: 2, ..Limits::default() }).unwrap();
        assert_eq!(dp.route, Route::ComponentDp);
        assert_eq!(en.route, Route::Enumeration);
        assert_eq!(dp.separation, en.separation);
        assert_eq!(dp.u_separation, en.u_separation);
        assert_eq!(dp.difference(), en.difference());
    }

    #[test]
    fn segment_examples() {
        let l = Limits::default();
        let g = BunkbedGraph::path(2).unwrap();
        let r = segment_difference(&g, &constant(&g, rat(1, 2)), &l).unwrap();
        assert_eq!(r.closed_form, rat(1, 8));
        assert!(r.closed_form_matches());
        assert_eq!(r.short_form, rat(1, 4));
        assert!(!r.short_form_matches());
        let g = BunkbedGraph::path(3).unwrap();
        let r = segment_difference(&g, &constant(&g, rat(1, 2)), &l).unwrap();
        assert_eq!(r.closed_form, rat(1, 32));
        assert!(r.closed_form_matches());
    }

    #[test]
    fn segment_with_closed_bottom_edge() {
        let g = BunkbedGraph::path(4).unwrap();
        let p = EdgeProbabilityVector::from_levels(&g, &[rat(1, 2), int(0), rat(1, 3)], &vec![rat(1, 4); 4]).unwrap();
        let r = segment_difference(&g, &p, &Limits::default()).unwrap();
        assert_eq!(r.closed_form, int(0));
        assert!(r.closed_form_matches());
    }

    #[test]
    fn segment_rejects_other_graphs() {
        let g = BunkbedGraph::complete(3).unwrap();
        let p = constant(&g, rat(1, 2));
        assert!(matches!(segment_difference(&g, &p, &Limits::default()), Err(Error::InvalidGraph(_))));
    }
}
