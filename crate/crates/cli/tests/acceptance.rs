//! Acceptance suite: one test per criterion, each printing a PASS line.
//! Run with `cargo test -p crp-cli --test acceptance -- --nocapture`.

use std::collections::BTreeMap;
use std::time::Instant;

use crp_core::C64;
use crp_core::basis::{Monomial, enumerate};
use crp_core::operator::{Truncation, col_norm_sq, row_norm_sq};
use crp_core::pick::{
    PickProblem, Point, TargetShape, build_compression, corollary_trace, pick_min_norm,
    sample_node,
};
use crp_core::randmult::{
    CoefficientLaw, RandomMultiplierModel, Side, max_entrywise_deviation,
};
use crp_core::search::{SearchConfig, SearchMode};
use crp_core::space::{CommitteeSpace, Polynomial, certified_truncation_degree};
use rand::{Rng, RngExt, SeedableRng};
use rand_chacha::ChaCha12Rng;

fn builtins_with_fock() -> Vec<CommitteeSpace> {
    vec![
        CommitteeSpace::hardy(),
        CommitteeSpace::dirichlet(),
        CommitteeSpace::drury_arveson(2).unwrap(),
        CommitteeSpace::drury_arveson(3).unwrap(),
        CommitteeSpace::fock(2).unwrap(),
    ]
}

fn steinhaus_polynomial<R: Rng + ?Sized>(
    space: &CommitteeSpace,
    max_degree: usize,
    rng: &mut R,
) -> Polynomial {
    let monomials =
        enumerate(space.commutative(), space.variable_count(), max_degree).unwrap();
    Polynomial::from_coeffs(
        space,
        monomials.into_iter().map(|m| {
            let theta = std::f64::consts::TAU * rng.random::<f64>();
            (m, C64::new(theta.cos(), theta.sin()))
        }),
    )
    .unwrap()
}

fn uniform_model(space: &CommitteeSpace, max_degree: usize) -> RandomMultiplierModel {
    let support = enumerate(space.commutative(), space.variable_count(), max_degree).unwrap();
    let w = 1.0 / support.len() as f64;
    RandomMultiplierModel::new(
        space,
        support.into_iter().map(|m| (m, w)).collect(),
        CoefficientLaw::Steinhaus,
    )
    .unwrap()
}

/// Criterion 1: the committee inequality holds exhaustively at N = 12 for
/// the built-in spaces, and the constructed failing custom space exits 1.
#[test]
fn criterion_01_committee_inequality() {
    let started = Instant::now();
    let spaces = vec![
        CommitteeSpace::hardy(),
        CommitteeSpace::dirichlet(),
        CommitteeSpace::drury_arveson(1).unwrap(),
        CommitteeSpace::drury_arveson(2).unwrap(),
        CommitteeSpace::drury_arveson(3).unwrap(),
        CommitteeSpace::fock(2).unwrap(),
    ];
    for space in &spaces {
        let report = space.check_committee(12).unwrap();
        assert!(report.passed(), "{space} violated the committee inequality");
    }

    let cfg_path = std::env::temp_dir().join(format!("crp_acc1_{}.json", std::process::id()));
    std::fs::write(
        &cfg_path,
        r#"{"space":{"kind":"custom","d":1,"commutative":true,
            "weights":{"(0)":1.0,"(1)":1.0,"(2)":4.0}},"N":2}"#,
    )
    .unwrap();
    let out = std::process::Command::new(env!("CARGO_BIN_EXE_crp"))
        .args(["check-space", "--config", cfg_path.to_str().unwrap()])
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(1), "failing custom space must exit 1");
    assert!(String::from_utf8(out.stdout).unwrap().contains("violation_margin"));

    let elapsed = started.elapsed().as_secs_f64();
    assert!(elapsed < 5.0, "criterion 1 took {elapsed:.1} s");
    println!("[criterion 1] committee inequality at N=12 + exit-1 flagging: PASS ({elapsed:.2} s)");
}

/// Criterion 2: the truncated norm chain is ordered with slack 1e-12 over
/// 100 fuzzed models per built-in space at N = 8, and the column maximum
/// sits at the empty monomial.
#[test]
fn criterion_02_norm_chain_fuzz() {
    let started = Instant::now();
    let n = 8;
    for space in builtins_with_fock() {
        let all = enumerate(space.commutative(), space.variable_count(), 3).unwrap();
        let mut rng = ChaCha12Rng::seed_from_u64(0x5eed);
        for trial in 0..100 {
            let mut weights = BTreeMap::new();
            while weights.is_empty() {
                for m in &all {
                    if rng.random::<f64>() < 0.3 {
                        weights.insert(m.clone(), 0.1 + 1.9 * rng.random::<f64>());
                    }
                }
            }
            let model =
                RandomMultiplierModel::new(&space, weights, CoefficientLaw::Steinhaus).unwrap();
            let chain = model.bound_chain(n).unwrap();
            assert!(
                chain.chain_ok(1e-12),
                "{space} trial {trial}: chain ({}, {}, {}, {})",
                chain.row_norm,
                chain.sup_bound,
                chain.sum_bound,
                chain.col_norm
            );
            let col = model.expected_col_diag(n).unwrap();
            let max = col.iter().cloned().fold(0.0, f64::max);
            assert!(col[0] >= max - 1e-12, "{space} trial {trial}: column max displaced");
        }
    }
    let elapsed = started.elapsed().as_secs_f64();
    assert!(elapsed < 60.0, "criterion 2 took {elapsed:.1} s");
    println!("[criterion 2] norm chain over 500 fuzzed models at N=8: PASS ({elapsed:.2} s)");
}

/// Criterion 3: closed-form expectation values match exactly.
#[test]
fn criterion_03_closed_form_values() {
    let da2 = CommitteeSpace::drury_arveson(2).unwrap();
    let model = RandomMultiplierModel::new(
        &da2,
        BTreeMap::from([
            (Monomial::Commutative(vec![1, 0]), 0.5),
            (Monomial::Commutative(vec![0, 1]), 0.5),
        ]),
        CoefficientLaw::Steinhaus,
    )
    .unwrap();
    let chain = model.bound_chain(6).unwrap();
    assert!((chain.row_norm - 0.5).abs() <= 1e-12, "row {}", chain.row_norm);
    assert!((chain.col_norm - 1.0).abs() <= 1e-12, "col {}", chain.col_norm);

    let hardy = CommitteeSpace::hardy();
    let model = RandomMultiplierModel::new(
        &hardy,
        (0..=3u32)
            .map(|k| (Monomial::Commutative(vec![k]), 0.5f64.powi(k as i32)))
            .collect(),
        CoefficientLaw::Steinhaus,
    )
    .unwrap();
    let chain = model.bound_chain(3).unwrap();
    assert!((chain.row_norm - 1.875).abs() <= 1e-12);
    assert!((chain.col_norm - 1.875).abs() <= 1e-12);
    println!("[criterion 3] closed-form values (0.5, 1.0) and 1.875: PASS");
}

/// Criterion 4: the Drury-Arveson coordinate tuple has squared row norm 1
/// and squared column norm d for d = 2, 3 at every N <= 8.
#[test]
fn criterion_04_coordinate_tuple_norms() {
    for d in [2usize, 3] {
        let space = CommitteeSpace::drury_arveson(d).unwrap();
        let fs: Vec<Polynomial> = (0..d)
            .map(|i| {
                Polynomial::monomial(
                    &space,
                    Monomial::variable(true, d, i).unwrap(),
                    C64::new(1.0, 0.0),
                )
                .unwrap()
            })
            .collect();
        for n in 1..=8usize {
            let row = row_norm_sq(&fs, n).unwrap();
            let col = col_norm_sq(&fs, n).unwrap();
            assert!((row - 1.0).abs() <= 1e-10, "d={d} N={n}: row {row}");
            assert!((col - d as f64).abs() <= 1e-10, "d={d} N={n}: col {col}");
        }
    }
    println!("[criterion 4] coordinate tuple row=1, col=d for d=2,3, N<=8: PASS");
}

/// Criterion 5: the adjoint shift formula, exhaustively to degree 6 in every
/// built-in space.
#[test]
fn criterion_05_adjoint_formula() {
    for space in builtins_with_fock() {
        let tr = Truncation::new(&space, 6).unwrap();
        for gamma in tr.basis().monomials() {
            let mono = Polynomial::monomial(&space, gamma.clone(), C64::new(1.0, 0.0)).unwrap();
            let adjoint = tr.mult(&mono).unwrap().gram_adjoint();
            for (ai, alpha) in tr.basis().monomials().iter().enumerate() {
                let got = adjoint.column_image_norm(ai);
                let want = match alpha.left_quotient(gamma) {
                    Some(beta) => {
                        space.norm_sq(alpha).unwrap() / space.norm_sq(&beta).unwrap().sqrt()
                    }
                    None => 0.0,
                };
                assert!(
                    (got - want).abs() <= 1e-12 * want.max(1.0),
                    "{space}: gamma={gamma} alpha={alpha}: {got} vs {want}"
                );
            }
        }
    }
    println!("[criterion 5] adjoint formula exhaustive to degree 6: PASS");
}

/// Criterion 6: Monte Carlo concentration at N = 5 for the Drury-Arveson(2)
/// Steinhaus model: deviation < 5e-2 at 1e4 samples, and quadrupling the
/// samples shrinks the deviation to <= 0.75x (median over 10 seeds).
#[test]
fn criterion_06_monte_carlo_concentration() {
    let started = Instant::now();
    let da2 = CommitteeSpace::drury_arveson(2).unwrap();
    let model = uniform_model(&da2, 2);
    let n = 5;
    for side in [Side::Row, Side::Col] {
        let mc = model.monte_carlo(10_000, n, side, 1).unwrap();
        let diag = model.closed_form_diag(n, side).unwrap();
        let dev = max_entrywise_deviation(&mc, &diag);
        assert!(dev < 5e-2, "{side:?}: deviation {dev}");
    }
    let diag = model.closed_form_diag(n, Side::Row).unwrap();
    let mut shrink = Vec::new();
    for seed in 0..10u64 {
        let small = max_entrywise_deviation(
            &model.monte_carlo(10_000, n, Side::Row, 100 + seed).unwrap(),
            &diag,
        );
        let large = max_entrywise_deviation(
            &model.monte_carlo(40_000, n, Side::Row, 200 + seed).unwrap(),
            &diag,
        );
        shrink.push(large / small);
    }
    shrink.sort_by(|a, b| a.partial_cmp(b).unwrap());
    let median = shrink[shrink.len() / 2];
    assert!(median <= 0.75, "median shrink {median}");
    let elapsed = started.elapsed().as_secs_f64();
    assert!(elapsed < 300.0, "criterion 6 took {elapsed:.1} s");
    println!("[criterion 6] Monte Carlo concentration (median shrink {median:.3}): PASS ({elapsed:.1} s)");
}

/// Criterion 7: the Pick-matrix bisection and the compressed norms agree to
/// 1e-6 over 50 randomized instances in both shapes.
#[test]
fn criterion_07_oracle_equivalence() {
    let hardy = CommitteeSpace::hardy();
    let da2 = CommitteeSpace::drury_arveson(2).unwrap();
    for seed in 0..50u64 {
        let space = if seed % 2 == 0 { &hardy } else { &da2 };
        let mut rng = ChaCha12Rng::seed_from_u64(700 + seed);
        let node_count = 2 + (seed as usize % 3);
        let m = 1 + (seed as usize % 3);
        let nodes = sample_node(space, node_count, 0.55, 1, &mut rng).unwrap();
        let max_radius = nodes.iter().map(|n| n.radius()).fold(0.0, f64::max);
        let n_prime = certified_truncation_degree(space, max_radius).unwrap();
        let basis = build_compression(space, &nodes, n_prime).unwrap();
        let fs: Vec<Polynomial> =
            (0..m).map(|_| steinhaus_polynomial(space, 2, &mut rng)).collect();
        let targets: Vec<Vec<C64>> = nodes
            .iter()
            .map(|node| {
                let Point::Scalar(x) = node.point() else { panic!() };
                fs.iter().map(|f| f.eval_scalar(x).unwrap()).collect()
            })
            .collect();
        let comp_col = basis.compressed_col_norm_sq(&fs).unwrap();
        let comp_row = basis.compressed_row_norm_sq(&fs).unwrap();
        let t_col = pick_min_norm(
            &PickProblem::new(space, nodes.clone(), targets.clone(), TargetShape::Column)
                .unwrap(),
        )
        .unwrap();
        let t_row = pick_min_norm(
            &PickProblem::new(space, nodes, targets, TargetShape::Row).unwrap(),
        )
        .unwrap();
        assert!(
            (t_col * t_col - comp_col).abs() <= 1e-6,
            "seed {seed} column: {} vs {comp_col}",
            t_col * t_col
        );
        assert!(
            (t_row * t_row - comp_row).abs() <= 1e-6,
            "seed {seed} row: {} vs {comp_row}",
            t_row * t_row
        );
    }
    println!("[criterion 7] Pick bisection vs compressed norms, 50 instances: PASS");
}

/// Criterion 8: the trace sequence is nondecreasing and saturates to within
/// 1% once the node count passes the truncated dimension (100 seeded runs),
/// and compressed expectation norms never exceed the free ones (slack 1e-9,
/// 100 further runs at moderate Gram conditioning).
#[test]
fn criterion_08_corollary_trace() {
    let hardy = CommitteeSpace::hardy();
    let da2 = CommitteeSpace::drury_arveson(2).unwrap();

    // saturating runs: node count >= truncated dimension
    for seed in 0..100u64 {
        let (space, support_degree) = if seed % 2 == 0 { (&hardy, 2) } else { (&da2, 1) };
        let model = uniform_model(space, support_degree);
        let n_prime = certified_truncation_degree(space, 0.4).unwrap();
        let dim = space.basis(n_prime).unwrap().len();
        let mut rng = ChaCha12Rng::seed_from_u64(800 + seed);
        let nodes = sample_node(space, dim + 3, 0.4, 1, &mut rng).unwrap();
        let trace = corollary_trace(&model, &nodes, n_prime).unwrap();
        for w in trace.values.windows(2) {
            assert!(w[1] >= w[0] - 1e-10, "seed {seed}: trace decreased");
        }
        let last = *trace.values.last().unwrap();
        assert!(
            (last - trace.upper_bound).abs() <= 0.01 * trace.upper_bound,
            "seed {seed}: {last} vs bound {}",
            trace.upper_bound
        );
    }

    // domination runs, kept at moderate conditioning so the 1e-9 slack is
    // meaningful
    for seed in 0..100u64 {
        let (space, support_degree) = if seed % 2 == 0 { (&hardy, 2) } else { (&da2, 2) };
        let model = uniform_model(space, support_degree);
        let mut rng = ChaCha12Rng::seed_from_u64(900 + seed);
        let nodes = sample_node(space, 4, 0.5, 1, &mut rng).unwrap();
        let max_radius = nodes.iter().map(|n| n.radius()).fold(0.0, f64::max);
        let n_prime = certified_truncation_degree(space, max_radius).unwrap();
        let basis = build_compression(space, &nodes, n_prime).unwrap();
        let level = model.max_degree() + n_prime;
        let free_row =
            model.expected_row_diag(level).unwrap().into_iter().fold(0.0, f64::max);
        let free_col =
            model.expected_col_diag(level).unwrap().into_iter().fold(0.0, f64::max);
        let (_, comp_row) = basis.compressed_expected(&model, Side::Row).unwrap();
        let (_, comp_col) = basis.compressed_expected(&model, Side::Col).unwrap();
        assert!(comp_row <= free_row + 1e-9, "seed {seed}: row {comp_row} vs {free_row}");
        assert!(comp_col <= free_col + 1e-9, "seed {seed}: col {comp_col} vs {free_col}");
    }
    println!("[criterion 8] trace saturation + expectation domination, 200 runs: PASS");
}

/// Criterion 9: the two-variable word-space replication. One random 2x2
/// node at sampling radius 0.9, column length 2, 1000 trials with hill
/// climbing: the best ratio lies in [1.0, 1.1], some trial exceeds 1.0001,
/// and the run is seed-reproducible.
#[test]
fn criterion_09_word_space_replication() {
    let started = Instant::now();
    let fock = CommitteeSpace::fock(2).unwrap();
    let mut rng = ChaCha12Rng::seed_from_u64(1);
    rng.set_stream(0);
    let nodes = sample_node(&fock, 1, 0.9, 2, &mut rng).unwrap();
    let n_prime = certified_truncation_degree(&fock, 0.9).unwrap();
    let cfg = SearchConfig {
        space: fock,
        mode: SearchMode::Compressed { nodes, n_prime },
        m: 2,
        max_degree: 2,
        trials: 1000,
        climb_steps: 25,
        step_size: 0.05,
        seed: 1,
    };
    let report = crp_core::search::run(&cfg).unwrap();
    let best = report.best.as_ref().unwrap().ratio;
    assert!((1.0..=1.1).contains(&best), "best ratio {best} outside [1.0, 1.1]");
    let above = report.ratios.iter().filter(|&&r| r > 1.0001).count();
    assert!(above > 0, "no trial exceeded 1.0001");
    let again = crp_core::search::run(&cfg).unwrap();
    assert_eq!(report.to_json(), again.to_json(), "run is not seed-reproducible");
    let elapsed = started.elapsed().as_secs_f64();
    assert!(elapsed < 600.0, "criterion 9 took {elapsed:.1} s");
    println!(
        "[criterion 9] replication: best ratio {best:.4}, {above}/1000 trials above 1.0001: PASS ({elapsed:.1} s)"
    );
}

/// Criterion 10: with a single scalar node the compressed ratio is exactly 1
/// for every trial, at any column length.
#[test]
fn criterion_10_single_node_degeneracy() {
    let hardy = CommitteeSpace::hardy();
    let da2 = CommitteeSpace::drury_arveson(2).unwrap();
    for (space, seed) in [(&hardy, 10u64), (&da2, 11u64)] {
        let mut rng = ChaCha12Rng::seed_from_u64(seed);
        let nodes = sample_node(space, 1, 0.6, 1, &mut rng).unwrap();
        let n_prime = certified_truncation_degree(space, nodes[0].radius()).unwrap();
        for m in 1..=3usize {
            let cfg = SearchConfig {
                space: space.clone(),
                mode: SearchMode::Compressed { nodes: nodes.clone(), n_prime },
                m,
                max_degree: 2,
                trials: 30,
                climb_steps: 0,
                step_size: 0.0,
                seed: seed + m as u64,
            };
            let report = crp_core::search::run(&cfg).unwrap();
            for (i, &ratio) in report.ratios.iter().enumerate() {
                assert!(
                    (ratio - 1.0).abs() <= 1e-12,
                    "{space} m={m} trial {i}: ratio {ratio}"
                );
            }
        }
    }
    println!("[criterion 10] single-node compressed ratio = 1 for m = 1..3: PASS");
}
