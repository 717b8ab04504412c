//! Experiment execution: one function per command, all returning report
//! records plus a violation flag that drives the exit code.

use rand::SeedableRng;
use rand_chacha::ChaCha12Rng;

use crp_core::error::Error;
use crp_core::pick::{
    self, CompressionBasis, Node, PickProblem, TargetShape, build_compression, corollary_trace,
    pick_min_norm, sample_matrix_node_with_radius, sample_node,
};
use crp_core::randmult::{RandomMultiplierModel, Side, model_from_spec};
use crp_core::search::{SearchConfig, SearchMode};
use crp_core::space::CommitteeSpace;
use crp_core::C64;

use crate::config::{Command, ExperimentConfig};
use crate::report::{Record, to_csv, to_json};

/// Failure before or during computation; carries the exit code.
#[derive(Debug)]
pub struct Failure {
    pub exit_code: i32,
    pub message: String,
}

impl Failure {
    fn config(message: impl Into<String>) -> Failure {
        Failure { exit_code: 2, message: message.into() }
    }
}

fn from_core(e: Error) -> Failure {
    let exit_code = match e {
        Error::Numerical(_) | Error::Conditioning(_) => 3,
        _ => 2,
    };
    Failure { exit_code, message: e.to_string() }
}

pub struct Outcome {
    /// Serialized report in the requested format.
    pub payload: String,
    /// A checked mathematical property failed (exit 1).
    pub violation: bool,
    /// Human note for stderr, e.g. "no data".
    pub note: Option<String>,
}

pub fn run_experiment(command: Command, cfg: &ExperimentConfig) -> Result<Outcome, Failure> {
    let space = crp_core::space::space_from_spec(&cfg.space).map_err(from_core)?;
    match command {
        Command::CheckSpace => check_space(cfg, &space),
        Command::Theorem1 => theorem1(cfg, &space),
        Command::MonteCarlo => montecarlo(cfg, &space),
        Command::Np => np(cfg, &space),
        Command::Search => search(cfg, &space),
    }
}

fn require_n(cfg: &ExperimentConfig) -> Result<usize, Failure> {
    cfg.n.ok_or_else(|| Failure::config("N is required for this command"))
}

fn require_model(
    cfg: &ExperimentConfig,
    space: &CommitteeSpace,
) -> Result<RandomMultiplierModel, Failure> {
    let spec = cfg
        .model
        .as_ref()
        .ok_or_else(|| Failure::config("model is required for this command"))?;
    model_from_spec(space, spec).map_err(from_core)
}

fn finish(
    cfg: &ExperimentConfig,
    command: Command,
    space: &CommitteeSpace,
    level: i64,
    mut records: Vec<Record>,
    violation: bool,
) -> Outcome {
    records.push(Record::new(
        command.name(),
        &space.name(),
        space.variable_count(),
        level,
        cfg.seed,
        "config_echo",
        0.0,
        cfg.echo(),
    ));
    let payload = if cfg.format == "json" { to_json(&records) } else { to_csv(&records) };
    Outcome { payload, violation, note: None }
}

fn check_space(cfg: &ExperimentConfig, space: &CommitteeSpace) -> Result<Outcome, Failure> {
    let n = require_n(cfg)?;
    let report = space.check_committee(n).map_err(from_core)?;
    let name = space.name();
    let d = space.variable_count();
    let mut records = vec![
        Record::new("check-space", &name, d, n as i64, cfg.seed, "pairs_checked", report.pairs_checked as f64, ""),
        Record::new("check-space", &name, d, n as i64, cfg.seed, "violations", report.violations.len() as f64, ""),
    ];
    for v in report.violations.iter().take(100) {
        records.push(Record::new(
            "check-space",
            &name,
            d,
            n as i64,
            cfg.seed,
            "violation_margin",
            v.product - v.combined,
            format!("alpha={} beta={}", v.alpha, v.beta),
        ));
    }
    let violation = !report.passed();
    Ok(finish(cfg, Command::CheckSpace, space, n as i64, records, violation))
}

fn theorem1(cfg: &ExperimentConfig, space: &CommitteeSpace) -> Result<Outcome, Failure> {
    let n = require_n(cfg)?;
    let model = require_model(cfg, space)?;
    let chain = model.bound_chain(n).map_err(from_core)?;
    let name = space.name();
    let d = space.variable_count();
    let mk = |metric: &str, value: f64, detail: &str| {
        Record::new("theorem1", &name, d, n as i64, cfg.seed, metric, value, detail)
    };
    let mut records = vec![
        mk("row_norm", chain.row_norm, ""),
        mk("sup_bound", chain.sup_bound, ""),
        mk("sum_bound", chain.sum_bound, ""),
        mk("col_norm", chain.col_norm, ""),
        mk("bound_c", model.bound_c(), "reported a.s. multiplier bound"),
    ];
    // sparsity heuristic: average divisor fraction per degree
    let basis = space.basis(n).map_err(from_core)?;
    let mut by_degree: Vec<(f64, usize)> = vec![(0.0, 0); n + 1];
    for (i, m) in basis.monomials().iter().enumerate() {
        let (sum, count) = &mut by_degree[m.degree()];
        *sum += chain.decomposition_stats[i];
        *count += 1;
    }
    for (deg, (sum, count)) in by_degree.iter().enumerate() {
        records.push(mk(
            "divisor_fraction_mean",
            sum / *count as f64,
            &format!("degree={deg}"),
        ));
    }
    let col_diag = model.expected_col_diag(n).map_err(from_core)?;
    let col_max = col_diag.iter().cloned().fold(0.0, f64::max);
    let max_at_empty = col_diag[0] >= col_max - 1e-12;
    records.push(mk("col_max_at_empty", max_at_empty as i64 as f64, ""));
    let violation = !chain.chain_ok(1e-12) || !max_at_empty;
    Ok(finish(cfg, Command::Theorem1, space, n as i64, records, violation))
}

fn montecarlo(cfg: &ExperimentConfig, space: &CommitteeSpace) -> Result<Outcome, Failure> {
    let n = require_n(cfg)?;
    let model = require_model(cfg, space)?;
    let samples = cfg.samples.ok_or_else(|| Failure::config("samples is required"))?;
    let sides: Vec<Side> = match cfg.side.as_deref() {
        None | Some("both") => vec![Side::Row, Side::Col],
        Some("row") => vec![Side::Row],
        Some("col") => vec![Side::Col],
        Some(other) => {
            return Err(Failure::config(format!("side: expected row|col|both, got {other:?}")));
        }
    };
    let name = space.name();
    let d = space.variable_count();
    let mut records = Vec::new();
    for side in sides {
        let label = match side {
            Side::Row => "row",
            Side::Col => "col",
        };
        let mc = model.monte_carlo(samples, n, side, cfg.seed).map_err(from_core)?;
        let diag = model.closed_form_diag(n, side).map_err(from_core)?;
        let deviation = crp_core::randmult::max_entrywise_deviation(&mc, &diag);
        let mass = crp_core::randmult::offdiag_mass(&mc);
        let closed_norm = diag.iter().cloned().fold(0.0, f64::max);
        let mk = |metric: &str, value: f64| {
            Record::new(
                "montecarlo",
                &name,
                d,
                n as i64,
                cfg.seed,
                metric,
                value,
                format!("side={label} samples={samples}"),
            )
        };
        records.push(mk("max_entrywise_deviation", deviation));
        records.push(mk("offdiag_mass", mass));
        records.push(mk("closed_form_norm", closed_norm));
    }
    Ok(finish(cfg, Command::MonteCarlo, space, n as i64, records, false))
}

/// Resolve the node set: inline points, a node file, or seeded sampling
/// (stream 0 of the master seed).
fn resolve_nodes(cfg: &ExperimentConfig, space: &CommitteeSpace) -> Result<Vec<Node>, Failure> {
    let spec = cfg
        .nodes
        .as_ref()
        .ok_or_else(|| Failure::config("nodes are required for this command"))?;
    if let Some(points) = &spec.points {
        let text = serde_json::to_string(points).expect("nodes serialize");
        return pick::nodes_from_json(space, &text).map_err(from_core);
    }
    if let Some(path) = &spec.file {
        let text = std::fs::read_to_string(path)
            .map_err(|e| Failure::config(format!("nodes.file {path:?}: {e}")))?;
        return pick::nodes_from_json(space, &text).map_err(from_core);
    }
    let count = spec.count.ok_or_else(|| Failure::config("nodes.count is required"))?;
    let radius = spec.radius.ok_or_else(|| Failure::config("nodes.radius is required"))?;
    let matrix_size = spec.matrix_size.unwrap_or(1);
    let mut rng = ChaCha12Rng::seed_from_u64(cfg.seed);
    rng.set_stream(0);
    if spec.exact_radius.unwrap_or(false) {
        if space.commutative() {
            return Err(Failure::config("exact_radius only applies to matrix nodes"));
        }
        (0..count)
            .map(|_| {
                sample_matrix_node_with_radius(space.variable_count(), matrix_size, radius, &mut rng)
                    .map_err(from_core)
            })
            .collect()
    } else {
        sample_node(space, count, radius, matrix_size, &mut rng).map_err(from_core)
    }
}

fn default_n_prime(space: &CommitteeSpace, nodes: &[Node]) -> Result<usize, Failure> {
    let max_radius = nodes.iter().map(|n| n.radius()).fold(0.0, f64::max);
    crp_core::space::certified_truncation_degree(space, max_radius).map_err(from_core)
}

/// Truncation level at which the free expectation norms are compared: deep
/// enough to dominate the compressions. Word-space diagonals only involve
/// prefixes of support monomials, so they stabilize by twice the support
/// degree; commutative spaces use max support degree + n_prime.
fn comparison_level(space: &CommitteeSpace, model: &RandomMultiplierModel, n_prime: usize) -> usize {
    if space.commutative() {
        model.max_degree() + n_prime
    } else {
        2 * model.max_degree() + 2
    }
}

fn np(cfg: &ExperimentConfig, space: &CommitteeSpace) -> Result<Outcome, Failure> {
    let model = require_model(cfg, space)?;
    let nodes = resolve_nodes(cfg, space)?;
    if nodes.is_empty() {
        return Err(Failure::config("np needs at least one node"));
    }
    let n_prime = match cfg.n_prime {
        Some(v) => v,
        None => default_n_prime(space, &nodes)?,
    };
    let name = space.name();
    let d = space.variable_count();
    let mk = |metric: &str, value: f64, detail: String| {
        Record::new("np", &name, d, n_prime as i64, cfg.seed, metric, value, detail)
    };
    let mut records = Vec::new();
    let mut violation = false;

    // nested-prefix trace
    let trace = corollary_trace(&model, &nodes, n_prime).map_err(from_core)?;
    for (i, (&v, &k)) in trace.values.iter().zip(&trace.kept_counts).enumerate() {
        records.push(mk("trace_value", v, format!("nodes={}", i + 1)));
        records.push(mk("kept_count", k as f64, format!("nodes={}", i + 1)));
    }
    records.push(mk("trace_upper_bound", trace.upper_bound, String::new()));
    for w in trace.values.windows(2) {
        if w[1] < w[0] - 1e-10 {
            violation = true;
        }
    }
    if let Some(&last) = trace.values.last()
        && last > trace.upper_bound * (1.0 + 1e-8) + 1e-12
    {
        violation = true;
    }

    // full compression and expectation bounds
    let basis = build_compression(space, &nodes, n_prime).map_err(from_core)?;
    records.push(mk("gram_cond", basis.gram_cond(), String::new()));
    records.push(mk("pruned_count", basis.pruned_count() as f64, String::new()));
    let level = comparison_level(space, &model, n_prime);
    let free_row = model
        .expected_row_diag(level)
        .map_err(from_core)?
        .into_iter()
        .fold(0.0, f64::max);
    let free_col = model
        .expected_col_diag(level)
        .map_err(from_core)?
        .into_iter()
        .fold(0.0, f64::max);
    let (_, comp_row) = basis.compressed_expected(&model, Side::Row).map_err(from_core)?;
    let (_, comp_col) = basis.compressed_expected(&model, Side::Col).map_err(from_core)?;
    records.push(mk("compressed_expected_row_norm", comp_row, String::new()));
    records.push(mk("free_row_norm", free_row, format!("N={level}")));
    records.push(mk("compressed_expected_col_norm", comp_col, String::new()));
    records.push(mk("free_col_norm", free_col, format!("N={level}")));
    if comp_row > free_row + 1e-9 || comp_col > free_col + 1e-9 {
        violation = true;
    }

    // oracle cross-check where the Pick matrix test is available
    match oracle_check(cfg, space, &basis, &nodes) {
        Ok(Some((row_diff, col_diff))) => {
            records.push(mk("oracle_row_diff", row_diff, String::new()));
            records.push(mk("oracle_col_diff", col_diff, String::new()));
            if row_diff > 1e-6 || col_diff > 1e-6 {
                violation = true;
            }
        }
        Ok(None) => {
            records.push(mk("oracle_skipped", 0.0, format!("not offered for {name}")));
        }
        Err(f) => return Err(f),
    }
    Ok(finish(cfg, Command::Np, space, n_prime as i64, records, violation))
}

fn oracle_check(
    cfg: &ExperimentConfig,
    space: &CommitteeSpace,
    basis: &CompressionBasis,
    nodes: &[Node],
) -> Result<Option<(f64, f64)>, Failure> {
    use crp_core::space::SpaceKind;
    if !matches!(space.kind(), SpaceKind::Hardy | SpaceKind::DruryArveson) {
        return Ok(None);
    }
    let np_spec = cfg.np.clone().unwrap_or_default();
    let mut rng = ChaCha12Rng::seed_from_u64(cfg.seed);
    rng.set_stream(1);
    let monomials = crp_core::basis::enumerate(
        space.commutative(),
        space.variable_count(),
        np_spec.max_degree,
    )
    .map_err(from_core)?;
    let fs: Vec<crp_core::space::Polynomial> = (0..np_spec.m)
        .map(|_| {
            use rand::RngExt;
            crp_core::space::Polynomial::from_coeffs(
                space,
                monomials.iter().map(|m| {
                    let theta = std::f64::consts::TAU * rng.random::<f64>();
                    (m.clone(), C64::new(theta.cos(), theta.sin()))
                }),
            )
            .map_err(from_core)
        })
        .collect::<Result<_, Failure>>()?;
    let targets: Vec<Vec<C64>> = nodes
        .iter()
        .map(|node| {
            let pick::Point::Scalar(x) = node.point() else {
                unreachable!("commutative spaces have scalar nodes")
            };
            fs.iter()
                .map(|f| f.eval_scalar(x).map_err(from_core))
                .collect::<Result<Vec<_>, Failure>>()
        })
        .collect::<Result<_, Failure>>()?;
    let comp_col = basis.compressed_col_norm_sq(&fs).map_err(from_core)?;
    let comp_row = basis.compressed_row_norm_sq(&fs).map_err(from_core)?;
    let col_problem =
        PickProblem::new(space, nodes.to_vec(), targets.clone(), TargetShape::Column)
            .map_err(from_core)?;
    let t_col = pick_min_norm(&col_problem).map_err(from_core)?;
    let row_problem =
        PickProblem::new(space, nodes.to_vec(), targets, TargetShape::Row).map_err(from_core)?;
    let t_row = pick_min_norm(&row_problem).map_err(from_core)?;
    Ok(Some(((t_row * t_row - comp_row).abs(), (t_col * t_col - comp_col).abs())))
}

fn search(cfg: &ExperimentConfig, space: &CommitteeSpace) -> Result<Outcome, Failure> {
    let spec = cfg
        .search
        .as_ref()
        .ok_or_else(|| Failure::config("search spec is required"))?;
    let mode = match spec.mode.as_str() {
        "free" => SearchMode::Free { n: require_n(cfg)? },
        "compressed" => {
            let nodes = resolve_nodes(cfg, space)?;
            let n_prime = match cfg.n_prime {
                Some(v) => v,
                None => default_n_prime(space, &nodes)?,
            };
            SearchMode::Compressed { nodes, n_prime }
        }
        other => {
            return Err(Failure::config(format!(
                "search.mode: expected free|compressed, got {other:?}"
            )));
        }
    };
    let search_cfg = SearchConfig {
        space: space.clone(),
        mode,
        m: spec.m,
        max_degree: spec.max_degree,
        trials: spec.trials,
        climb_steps: spec.climb_steps,
        step_size: spec.step_size,
        seed: cfg.seed,
    };
    search_cfg.validate().map_err(from_core)?;
    let report = crp_core::search::run(&search_cfg).map_err(from_core)?;
    let note = if spec.trials == 0 { Some("no data".to_string()) } else { None };
    if cfg.format == "json" {
        return Ok(Outcome {
            payload: report.to_json_with_echo(&cfg.echo()),
            violation: false,
            note,
        });
    }
    let name = space.name();
    let d = space.variable_count();
    let level = match &search_cfg.mode {
        SearchMode::Free { n } => *n as i64,
        SearchMode::Compressed { n_prime, .. } => *n_prime as i64,
    };
    let mk = |metric: &str, value: f64, detail: String| {
        Record::new("search", &name, d, level, cfg.seed, metric, value, detail)
    };
    let mut records = Vec::new();
    if let Some(best) = &report.best {
        records.push(mk("best_ratio", best.ratio, "coefficients in json format".into()));
        records.push(mk("best_row_norm_sq", best.row_norm_sq, String::new()));
        records.push(mk("best_col_norm_sq", best.col_norm_sq, String::new()));
        if let Some(cond) = best.gram_cond {
            records.push(mk("gram_cond", cond, String::new()));
        }
        records.push(mk("ratio_gt_one_fraction", report.ratio_gt_one_fraction, String::new()));
        records.push(mk("trials", report.ratios.len() as f64, String::new()));
        for bin in &report.histogram {
            records.push(mk(
                "histogram_bin",
                bin.count as f64,
                format!("[{:.6e},{:.6e})", bin.lo, bin.hi),
            ));
        }
    }
    if records.is_empty() {
        // header-only report for trials = 0
        let payload =
            if cfg.format == "json" { to_json(&records) } else { to_csv(&records) };
        return Ok(Outcome { payload, violation: false, note });
    }
    Ok(Outcome { payload: finish(cfg, Command::Search, space, level, records, false).payload, violation: false, note })
}
