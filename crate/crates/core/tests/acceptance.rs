//! Acceptance suite. Runs every criterion at its pinned tolerance, prints one
//! PASS/FAIL line per criterion, and exits non-zero if any fails.

use std::process::ExitCode;
use std::time::{Duration, Instant};

use bunkbed::auxiliary::{
    mean_identity_check, mean_inequality_check, segment_difference, upper_bound_check, BottomDistribution,
};
use bunkbed::component::{kn_lower_bound, oeis_connected_check, ClassProbabilities};
use bunkbed::counting::{
    boundary_count, brute, check_identity_even, check_identity_odd, count_c1, count_c2, count_total, Triplet,
};
use bunkbed::engine::{prob_connected_enum, Limits};
use bunkbed::montecarlo::estimate_connection;
use bunkbed::rational::{grid, int, rat};
use bunkbed::verifier::{decompose, partition_check, row_check, theorem_check, Target};
use bunkbed::{BunkbedGraph, Configuration, EdgeProbabilityVector, Network, Rational};
use num_bigint::BigInt;
use num_traits::Signed;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

type Outcome = Result<String, String>;
type Criterion = (&'static str, fn() -> Outcome);

fn ensure(ok: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if ok {
        Ok(())
    } else {
        Err(msg())
    }
}

fn e(err: bunkbed::Error) -> String {
    err.to_string()
}

fn constant(g: &impl Network, p: &Rational) -> EdgeProbabilityVector {
    EdgeProbabilityVector::constant(g.edge_count(), p.clone()).unwrap()
}

fn random_probability(rng: &mut ChaCha8Rng) -> Rational {
    let den: i64 = rng.gen_range(1..=12);
    rat(rng.gen_range(0..=den), den)
}

fn random_constrained(g: &BunkbedGraph, rng: &mut ChaCha8Rng) -> EdgeProbabilityVector {
    let h: Vec<Rational> = (0..g.original().edge_count()).map(|_| random_probability(rng)).collect();
    let v: Vec<Rational> = (0..g.columns()).map(|_| random_probability(rng)).collect();
    EdgeProbabilityVector::from_levels(g, &h, &v).unwrap()
}

fn random_distribution(columns: usize, rng: &mut ChaCha8Rng) -> BottomDistribution {
    let raw: Vec<i64> = (0..columns).map(|_| rng.gen_range(0..=9)).collect();
    let total: i64 = raw.iter().sum();
    if total == 0 {
        return BottomDistribution::uniform(columns).unwrap();
    }
    BottomDistribution::new(raw.iter().map(|&w| rat(w, total)).collect()).unwrap()
}

fn theorem_grid() -> Vec<Rational> {
    grid(&rat(1, 2), &int(1), &rat(1, 20)).unwrap()
}

fn decomposition_equality() -> Outcome {
    let limits = Limits::default();
    let ps = [rat(1, 7), rat(1, 2), rat(3, 5), rat(9, 10), int(1)];
    let mut cases = 0;
    for n in 2..=5u32 {
        let g = BunkbedGraph::complete(n as usize).map_err(e)?;
        for p in &ps {
            let classes = ClassProbabilities::new(p.clone(), limits).map_err(e)?;
            for target in [Target::V, Target::VPrime] {
                let r = decompose(n, &classes, target).map_err(e)?;
                ensure(r.lhs_direct == r.lhs_decomposed, || {
                    format!("n={n} p={p} {target:?}: engine {} vs classes {}", r.lhs_direct, r.lhs_decomposed)
                })?;
                if n <= 4 {
                    let b = if target == Target::V { 1 } else { n as usize + 1 };
                    let en = prob_connected_enum(&g, &constant(&g, p), 0, b, &limits).map_err(e)?;
                    ensure(en == r.lhs_direct, || format!("n={n} p={p} {target:?}: enumeration {en}"))?;
                }
                cases += 1;
            }
        }
    }
    Ok(format!("{cases} exact equalities, n = 2..5"))
}

fn theorem_sweep() -> Outcome {
    let limits = Limits::default();
    let ps = theorem_grid();
    let mut min: Option<Rational> = None;
    for n in 2..=6u32 {
        let t = theorem_check(n, &ps, &limits).map_err(e)?;
        if let Some(pt) = t.counterexamples().next() {
            return Err(format!("n={n} p={}: difference {}", pt.p, pt.difference));
        }
        for pt in &t.points {
            if min.as_ref().is_none_or(|m| pt.difference < *m) {
                min = Some(pt.difference.clone());
            }
        }
    }
    let sq = theorem_check(2, &[rat(1, 2)], &limits).map_err(e)?;
    ensure(sq.points[0].difference == rat(1, 8), || format!("square difference {}", sq.points[0].difference))?;
    Ok(format!("{} points per n, n = 2..6, min difference {}; square 1/8", ps.len(), min.unwrap()))
}

fn identities() -> Outcome {
    let start = Instant::now();
    let mut cells = 0;
    for k in 1..=60u32 {
        for z in 1..=k {
            ensure(check_identity_even(k, z).map_err(e)?, || format!("even identity fails at k={k} z={z}"))?;
            ensure(check_identity_odd(k, z).map_err(e)?, || format!("odd identity fails at k={k} z={z}"))?;
            cells += 1;
        }
    }
    let took = start.elapsed();
    ensure(cells == 1830, || format!("{cells} cells"))?;
    ensure(took < Duration::from_secs(10), || format!("took {took:?}"))?;
    Ok(format!("{cells} cells each, {:.2}s", took.as_secs_f64()))
}

fn counting_oracle() -> Outcome {
    let mut checked = 0;
    for n in 2..=6u32 {
        let tally = brute::tally(n).map_err(e)?;
        for t in Triplet::all(n) {
            let got = tally.get(&t).cloned().unwrap_or_default();
            ensure(count_c1(n, t).map_err(e)? == BigInt::from(got.with_v), || format!("C1 n={n} {t}"))?;
            ensure(count_c2(n, t).map_err(e)? == BigInt::from(got.with_v_prime), || format!("C2 n={n} {t}"))?;
            ensure(count_total(n, t).map_err(e)? == BigInt::from(got.total), || format!("total n={n} {t}"))?;
            let b = boundary_count(n, t).map_err(e)?;
            ensure(got.cut_sizes == [b], || format!("B n={n} {t}: {b} vs {:?}", got.cut_sizes))?;
            checked += 1;
        }
        ensure(tally.keys().all(|t| t.is_valid(n)), || format!("enumeration produced an invalid class at n={n}"))?;
    }
    Ok(format!("{checked} classes, zero mismatches"))
}

fn row_comparisons() -> Outcome {
    let limits = Limits::default();
    let mut comparisons = 0;
    for n in 4..=6u32 {
        for p in [rat(1, 2), rat(3, 5), rat(3, 4), int(1)] {
            let classes = ClassProbabilities::new(p.clone(), limits).map_err(e)?;
            let r = row_check(n, &classes).map_err(e)?;
            ensure(r.passed(), || format!("n={n} p={p}: {:?}", r.violations.first()))?;
            comparisons += r.comparisons;
        }
    }
    Ok(format!("{comparisons} comparisons, zero violations"))
}

fn partition() -> Outcome {
    let limits = Limits::default();
    let mut cases = 0;
    for n in 1..=6u32 {
        for p in [rat(1, 7), rat(1, 2), rat(9, 10)] {
            let classes = ClassProbabilities::new(p.clone(), limits).map_err(e)?;
            ensure(partition_check(n, &classes).map_err(e)?, || format!("n={n} p={p}"))?;
            cases += 1;
        }
    }
    Ok(format!("{cases} exact sums equal to 1"))
}

fn averaged_inequality() -> Outcome {
    let limits = Limits::default();
    let mut rng = ChaCha8Rng::seed_from_u64(23);
    let (mut configs, mut expectations) = (0u64, 0);
    for n in [2usize, 3] {
        let g = BunkbedGraph::complete(n).map_err(e)?;
        let m = g.edge_count();
        let dists: Vec<BottomDistribution> = (0..5).map(|_| random_distribution(n, &mut rng)).collect();
        for d in &dists {
            for mask in 0u64..1 << m {
                let c = Configuration::new(mask, m).map_err(e)?;
                let v = mean_identity_check(&g, &c, d).map_err(e)?;
                ensure(!v.is_negative(), || format!("negative identity on K_{n}, {c}"))?;
                configs += 1;
            }
        }
        for _ in 0..20 {
            let p = random_constrained(&g, &mut rng);
            for d in &dists {
                let r = mean_inequality_check(&g, &p, d, &limits).map_err(e)?;
                ensure(r.passed(), || format!("K_{n}: {} vs {}", r.difference, r.via_identity))?;
                expectations += 1;
            }
        }
    }
    Ok(format!("{configs} configuration identities, {expectations} expectations"))
}

fn separation_bound() -> Outcome {
    let limits = Limits::default();
    let mut cases = 0;
    for n in 2..=6usize {
        let g = BunkbedGraph::complete(n).map_err(e)?;
        for p in theorem_grid() {
            let r = upper_bound_check(&g, &constant(&g, &p), 0, 1, &limits).map_err(e)?;
            ensure(r.inequality_holds(), || format!("n={n} p={p}: {} vs {}", r.difference(), r.separation))?;
            ensure(r.chain_bound.is_some() && r.chain_holds(), || format!("chain fails at n={n} p={p}"))?;
            cases += 1;
        }
    }
    let g = BunkbedGraph::complete(3).map_err(e)?;
    let en = Limits { dp_vertices: 0, ..limits };
    for p in [rat(1, 2), rat(4, 5)] {
        let (a, b) = (
            upper_bound_check(&g, &constant(&g, &p), 0, 1, &limits).map_err(e)?,
            upper_bound_check(&g, &constant(&g, &p), 0, 1, &en).map_err(e)?,
        );
        ensure(a.separation == b.separation, || format!("routes disagree at p={p}"))?;
    }
    Ok(format!("{cases} instances, inequality and chain exact"))
}

fn line_segment() -> Outcome {
    let limits = Limits::default();
    let mut rng = ChaCha8Rng::seed_from_u64(31);
    let (mut cases, mut short_hits) = (0, 0);
    for n in 2..=6usize {
        let g = BunkbedGraph::path(n).map_err(e)?;
        for _ in 0..6 {
            let r = segment_difference(&g, &random_constrained(&g, &mut rng), &limits).map_err(e)?;
            ensure(r.closed_form_matches(), || format!("n={n}: {} vs {}", r.closed_form, r.engine))?;
            short_hits += r.short_form_matches() as usize;
            cases += 1;
        }
    }
    let g = BunkbedGraph::path(2).map_err(e)?;
    let r = segment_difference(&g, &constant(&g, &rat(1, 2)), &limits).map_err(e)?;
    ensure(r.closed_form == rat(1, 8) && r.engine == rat(1, 8), || format!("square {} {}", r.closed_form, r.engine))?;
    ensure(!r.short_form_matches(), || "n-1 factor form matched the square".into())?;
    Ok(format!(
        "{cases} random vectors match; n-1 vertical factor form gives {} on the square and matches {short_hits}/{cases}",
        r.short_form
    ))
}

fn connectivity_bound() -> Outcome {
    let b = kn_lower_bound(10, &rat(1, 2)).map_err(e)?;
    ensure(b >= rat(3, 5), || format!("bound {b}"))?;
    let limits = Limits::default();
    for n in 2..=9 {
        let c = oeis_connected_check(n, &limits).map_err(e)?;
        ensure(c.passed(), || format!("n={n}: {} vs {}", c.dp_value, c.table_value))?;
    }
    Ok(format!("bound at n=10 is {:.4}; connected counts match for n = 2..9", bunkbed::rational::to_f64(&b)))
}

fn monte_carlo() -> Outcome {
    let g = BunkbedGraph::complete(2).map_err(e)?;
    let p = constant(&g, &rat(1, 2));
    let exact = 9.0 / 16.0;
    let mut covered = 0;
    for seed in 0..100u64 {
        let est = estimate_connection(&g, &p, 0, 1, 100_000, seed).map_err(e)?;
        covered += est.covers(exact, 2.0) as u32;
    }
    ensure(covered >= 90, || format!("{covered}/100 intervals cover 9/16"))?;
    let a = estimate_connection(&g, &p, 0, 1, 100_000, 42).map_err(e)?;
    let b = estimate_connection(&g, &p, 0, 1, 100_000, 42).map_err(e)?;
    let single = rayon::ThreadPoolBuilder::new()
        .num_threads(1)
        .build()
        .map_err(|x| x.to_string())?
        .install(|| estimate_connection(&g, &p, 0, 1, 100_000, 42))
        .map_err(e)?;
    ensure(a.estimate.to_bits() == b.estimate.to_bits() && a == single, || "reruns differ".into())?;
    Ok(format!("{covered}/100 intervals cover 9/16; reruns bit-identical"))
}

fn main() -> ExitCode {
    let criteria: [Criterion; 11] = [
        ("decomposition equality", decomposition_equality),
        ("inequality on K_2..K_6", theorem_sweep),
        ("factorial identities", identities),
        ("class counts vs enumeration", counting_oracle),
        ("row sign and weight comparisons", row_comparisons),
        ("partition of unity", partition),
        ("averaged inequality", averaged_inequality),
        ("separation upper bound", separation_bound),
        ("line segment closed form", line_segment),
        ("K_n connectivity bound", connectivity_bound),
        ("Monte Carlo calibration", monte_carlo),
    ];
    let mut failed = 0;
    for (i, (name, run)) in criteria.iter().enumerate() {
        let start = Instant::now();
        let outcome = run();
        let secs = start.elapsed().as_secs_f64();
        match outcome {
            Ok(msg) => println!("PASS {:>2} {name}: {msg} [{secs:.2}s]", i + 1),
            Err(msg) => {
                failed += 1;
                println!("FAIL {:>2} {name}: {msg} [{secs:.2}s]", i + 1);
            }
        }
    }
    println!("acceptance: {} passed, {failed} failed", criteria.len() - failed);
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
