//! Randomized search for column-row ratio violations.
//!
//! Each trial draws m polynomials of degree <= D with independent Steinhaus
//! coefficients, evaluates the ratio sqrt(row / col) of the squared row and
//! column norms of the tuple (free truncation or node compression), and then
//! hill-climbs: Gaussian perturbations of all coefficients, keeping a step
//! only when the ratio increases, halving the step after 20 consecutive
//! rejections. Trials run on independent seed streams so reports are
//! byte-identical for any worker count.

use std::fmt::Write as _;
use std::time::Instant;

use rand::{Rng, RngExt, SeedableRng};
use rand_chacha::ChaCha12Rng;
use rayon::prelude::*;

use crate::basis::Monomial;
use crate::error::{Error, Result};
use crate::operator::Truncation;
use crate::pick::{CompressionBasis, Node, build_compression};
use crate::randmult::standard_complex_gaussian;
use crate::space::{CommitteeSpace, Polynomial};
use crate::C64;

/// Where the ratio is evaluated: on the degree-<= N coordinate truncation, or
/// compressed to an interpolation node set.
#[derive(Clone, Debug)]
pub enum SearchMode {
    Free { n: usize },
    Compressed { nodes: Vec<Node>, n_prime: usize },
}

#[derive(Clone, Debug)]
pub struct SearchConfig {
    pub space: CommitteeSpace,
    pub mode: SearchMode,
    /// Column length m.
    pub m: usize,
    /// Maximum multiplier degree D.
    pub max_degree: usize,
    pub trials: usize,
    pub climb_steps: usize,
    pub step_size: f64,
    pub seed: u64,
}

impl SearchConfig {
    pub fn validate(&self) -> Result<()> {
        if self.m == 0 {
            return Err(Error::InvalidArgument("column length m must be >= 1".into()));
        }
        if !(self.step_size >= 0.0) {
            return Err(Error::InvalidArgument("step_size must be >= 0".into()));
        }
        match &self.mode {
            SearchMode::Free { n } => {
                // row and column compressions of the same tuple differ
                // spuriously near the truncation boundary; keep a margin
                if self.max_degree * 2 > *n {
                    return Err(Error::InvalidArgument(format!(
                        "free mode requires D <= N/2 (D = {}, N = {n})",
                        self.max_degree
                    )));
                }
            }
            SearchMode::Compressed { nodes, .. } => {
                if nodes.is_empty() {
                    return Err(Error::InvalidArgument("compressed mode needs nodes".into()));
                }
            }
        }
        Ok(())
    }
}

/// One evaluated coefficient tuple.
#[derive(Clone, Debug)]
pub struct TrialResult {
    pub ratio: f64,
    pub row_norm_sq: f64,
    pub col_norm_sq: f64,
    pub coefficients: Vec<Polynomial>,
    pub gram_cond: Option<f64>,
}

enum Evaluator {
    Free(Truncation),
    Compressed(Box<CompressionBasis>),
}

impl Evaluator {
    fn new(cfg: &SearchConfig) -> Result<Evaluator> {
        Ok(match &cfg.mode {
            SearchMode::Free { n } => Evaluator::Free(Truncation::new(&cfg.space, *n)?),
            SearchMode::Compressed { nodes, n_prime } => {
                Evaluator::Compressed(Box::new(build_compression(&cfg.space, nodes, *n_prime)?))
            }
        })
    }

    fn norms(&self, fs: &[Polynomial]) -> Result<(f64, f64)> {
        match self {
            Evaluator::Free(tr) => Ok((tr.row_norm_sq(fs)?, tr.col_norm_sq(fs)?)),
            Evaluator::Compressed(basis) => {
                Ok((basis.compressed_row_norm_sq(fs)?, basis.compressed_col_norm_sq(fs)?))
            }
        }
    }

    fn gram_cond(&self) -> Option<f64> {
        match self {
            Evaluator::Free(_) => None,
            Evaluator::Compressed(basis) => Some(basis.gram_cond()),
        }
    }
}

/// Coefficient state of a trial: one dense vector per polynomial over the
/// degree-<= D monomials.
struct TrialState<'a> {
    monomials: &'a [Monomial],
    coeffs: Vec<Vec<C64>>,
}

impl<'a> TrialState<'a> {
    fn to_polynomials(&self, space: &CommitteeSpace) -> Result<Vec<Polynomial>> {
        self.coeffs
            .iter()
            .map(|cs| {
                Polynomial::from_coeffs(
                    space,
                    self.monomials.iter().cloned().zip(cs.iter().copied()),
                )
            })
            .collect()
    }
}

fn evaluate(
    cfg: &SearchConfig,
    evaluator: &Evaluator,
    state: &TrialState<'_>,
) -> Result<TrialResult> {
    let fs = state.to_polynomials(&cfg.space)?;
    let (row, col) = evaluator.norms(&fs)?;
    if col <= 1e-300 {
        return Err(Error::Numerical("column norm vanished".into()));
    }
    Ok(TrialResult {
        ratio: (row / col).sqrt(),
        row_norm_sq: row,
        col_norm_sq: col,
        coefficients: fs,
        gram_cond: evaluator.gram_cond(),
    })
}

fn random_state<'a, R: Rng + ?Sized>(monomials: &'a [Monomial], m: usize, rng: &mut R) -> TrialState<'a> {
    let coeffs = (0..m)
        .map(|_| {
            monomials
                .iter()
                .map(|_| {
                    let theta = std::f64::consts::TAU * rng.random::<f64>();
                    C64::new(theta.cos(), theta.sin())
                })
                .collect()
        })
        .collect();
    TrialState { monomials, coeffs }
}

/// Draw a Steinhaus coefficient tuple and evaluate it. An all-zero column
/// norm (probability zero) is retried once.
pub fn random_trial<R: Rng + ?Sized>(cfg: &SearchConfig, rng: &mut R) -> Result<TrialResult> {
    cfg.validate()?;
    let evaluator = Evaluator::new(cfg)?;
    let monomials =
        crate::basis::enumerate(cfg.space.commutative(), cfg.space.variable_count(), cfg.max_degree)?;
    random_trial_inner(cfg, &evaluator, &monomials, rng)
}

fn random_trial_inner<R: Rng + ?Sized>(
    cfg: &SearchConfig,
    evaluator: &Evaluator,
    monomials: &[Monomial],
    rng: &mut R,
) -> Result<TrialResult> {
    let state = random_state(monomials, cfg.m, rng);
    match evaluate(cfg, evaluator, &state) {
        Ok(result) => Ok(result),
        Err(Error::Numerical(_)) => {
            let retry = random_state(monomials, cfg.m, rng);
            evaluate(cfg, evaluator, &retry)
        }
        Err(e) => Err(e),
    }
}

/// Local refinement: perturb every coefficient by a complex Gaussian of the
/// configured scale, accept only ratio increases. Never returns a ratio
/// below the start's.
pub fn hill_climb<R: Rng + ?Sized>(
    cfg: &SearchConfig,
    start: TrialResult,
    rng: &mut R,
) -> Result<TrialResult> {
    cfg.validate()?;
    let evaluator = Evaluator::new(cfg)?;
    let monomials =
        crate::basis::enumerate(cfg.space.commutative(), cfg.space.variable_count(), cfg.max_degree)?;
    hill_climb_inner(cfg, &evaluator, &monomials, start, rng)
}

fn hill_climb_inner<R: Rng + ?Sized>(
    cfg: &SearchConfig,
    evaluator: &Evaluator,
    monomials: &[Monomial],
    start: TrialResult,
    rng: &mut R,
) -> Result<TrialResult> {
    let mut current_coeffs: Vec<Vec<C64>> = start
        .coefficients
        .iter()
        .map(|f| monomials.iter().map(|m| f.coeff(m)).collect())
        .collect();
    let mut best = start;
    let mut step = cfg.step_size;
    let mut consecutive_rejects = 0usize;
    for _ in 0..cfg.climb_steps {
        let perturbed: Vec<Vec<C64>> = current_coeffs
            .iter()
            .map(|cs| {
                cs.iter()
                    .map(|c| c + standard_complex_gaussian(rng) * step)
                    .collect()
            })
            .collect();
        let state = TrialState { monomials, coeffs: perturbed };
        let candidate = match evaluate(cfg, evaluator, &state) {
            Ok(c) => c,
            Err(Error::Numerical(_)) => continue,
            Err(e) => return Err(e),
        };
        if candidate.ratio > best.ratio {
            current_coeffs = state.coeffs;
            best = candidate;
            consecutive_rejects = 0;
        } else {
            consecutive_rejects += 1;
            if consecutive_rejects >= 20 {
                step *= 0.5;
                consecutive_rejects = 0;
            }
        }
    }
    Ok(best)
}

#[derive(Clone, Debug)]
pub struct HistogramBin {
    pub lo: f64,
    pub hi: f64,
    pub count: usize,
}

/// Aggregate of a full run. The wall clock is informational and deliberately
/// left out of the serialized report, which must be byte-identical across
/// reruns of the same (config, seed).
#[derive(Clone, Debug)]
pub struct SearchReport {
    pub best: Option<TrialResult>,
    pub ratios: Vec<f64>,
    pub histogram: Vec<HistogramBin>,
    pub ratio_gt_one_fraction: f64,
    pub seed: u64,
    pub wall_clock_secs: f64,
    config_echo: String,
}

/// Run `trials` independent (random trial + hill climb) pairs on seed
/// streams derived from the master seed by trial index.
pub fn run(cfg: &SearchConfig) -> Result<SearchReport> {
    cfg.validate()?;
    let started = Instant::now();
    let evaluator = Evaluator::new(cfg)?;
    let monomials =
        crate::basis::enumerate(cfg.space.commutative(), cfg.space.variable_count(), cfg.max_degree)?;
    let results: Vec<Result<TrialResult>> = (0..cfg.trials)
        .into_par_iter()
        .map(|trial| {
            let mut rng = ChaCha12Rng::seed_from_u64(cfg.seed);
            rng.set_stream(trial as u64 + 1);
            let start = random_trial_inner(cfg, &evaluator, &monomials, &mut rng)?;
            hill_climb_inner(cfg, &evaluator, &monomials, start, &mut rng)
        })
        .collect();
    let mut trials = Vec::with_capacity(cfg.trials);
    for r in results {
        trials.push(r?);
    }
    let ratios: Vec<f64> = trials.iter().map(|t| t.ratio).collect();
    let best = trials
        .iter()
        .enumerate()
        .max_by(|(i, a), (j, b)| {
            a.ratio.partial_cmp(&b.ratio).unwrap().then(j.cmp(i))
        })
        .map(|(_, t)| t.clone());
    let histogram = build_histogram(&ratios, 40);
    let gt_one = ratios.iter().filter(|&&r| r > 1.0).count();
    let fraction = if ratios.is_empty() { 0.0 } else { gt_one as f64 / ratios.len() as f64 };
    Ok(SearchReport {
        best,
        histogram,
        ratio_gt_one_fraction: fraction,
        seed: cfg.seed,
        wall_clock_secs: started.elapsed().as_secs_f64(),
        config_echo: config_echo(cfg),
        ratios,
    })
}

fn build_histogram(ratios: &[f64], bins: usize) -> Vec<HistogramBin> {
    if ratios.is_empty() {
        return Vec::new();
    }
    let lo = ratios.iter().cloned().fold(f64::INFINITY, f64::min);
    let hi = ratios.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    if hi <= lo {
        return vec![HistogramBin { lo, hi, count: ratios.len() }];
    }
    let width = (hi - lo) / bins as f64;
    let mut counts = vec![0usize; bins];
    for &r in ratios {
        let mut k = ((r - lo) / width) as usize;
        if k >= bins {
            k = bins - 1;
        }
        counts[k] += 1;
    }
    counts
        .into_iter()
        .enumerate()
        .map(|(k, count)| HistogramBin {
            lo: lo + k as f64 * width,
            hi: lo + (k + 1) as f64 * width,
            count,
        })
        .collect()
}

fn config_echo(cfg: &SearchConfig) -> String {
    let mut s = String::new();
    let _ = write!(
        s,
        "{{\"space\":\"{}\",\"mode\":{},\"m\":{},\"max_degree\":{},\"trials\":{},\"climb_steps\":{},\"step_size\":{}}}",
        cfg.space.name(),
        match &cfg.mode {
            SearchMode::Free { n } => format!("{{\"free\":{{\"N\":{n}}}}}"),
            SearchMode::Compressed { nodes, n_prime } => format!(
                "{{\"compressed\":{{\"nodes\":{},\"n_prime\":{}}}}}",
                nodes.len(),
                n_prime
            ),
        },
        cfg.m,
        cfg.max_degree,
        cfg.trials,
        cfg.climb_steps,
        fmt_f64(cfg.step_size),
    );
    s
}

fn fmt_f64(v: f64) -> String {
    format!("{v:.16e}")
}

impl SearchReport {
    /// As `to_json`, but with a caller-supplied config echo (a JSON value)
    /// replacing the built-in one, for embedding a fuller experiment record.
    pub fn to_json_with_echo(&self, echo: &str) -> String {
        let mut copy = self.clone();
        copy.config_echo = echo.to_string();
        copy.to_json()
    }

    /// Serialized report: best ratio and coefficients, the fraction of trials
    /// exceeding ratio 1, the histogram, a config echo, and the seed.
    pub fn to_json(&self) -> String {
        let mut s = String::from("{");
        match &self.best {
            Some(best) => {
                let _ = write!(s, "\"best_ratio\":{},", fmt_f64(best.ratio));
                s.push_str("\"best_coefficients\":{");
                for (k, f) in best.coefficients.iter().enumerate() {
                    if k > 0 {
                        s.push(',');
                    }
                    let _ = write!(s, "\"f{}\":{{", k + 1);
                    for (j, (m, c)) in f.coeffs().enumerate() {
                        if j > 0 {
                            s.push(',');
                        }
                        let _ = write!(s, "\"{m}\":[{},{}]", fmt_f64(c.re), fmt_f64(c.im));
                    }
                    s.push('}');
                }
                s.push_str("},");
            }
            None => {
                s.push_str("\"best_ratio\":null,\"best_coefficients\":null,");
            }
        }
        let _ = write!(s, "\"ratio_gt_one_fraction\":{},", fmt_f64(self.ratio_gt_one_fraction));
        s.push_str("\"histogram\":[");
        for (k, bin) in self.histogram.iter().enumerate() {
            if k > 0 {
                s.push(',');
            }
            let _ = write!(s, "[{},{},{}]", fmt_f64(bin.lo), fmt_f64(bin.hi), bin.count);
        }
        let _ = write!(s, "],\"config_echo\":{},", self.config_echo);
        let _ = write!(s, "\"seed\":{}}}", self.seed);
        s
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::pick::sample_node;

    fn hardy_free_cfg(m: usize, trials: usize) -> SearchConfig {
        SearchConfig {
            space: CommitteeSpace::hardy(),
            mode: SearchMode::Free { n: 8 },
            m,
            max_degree: 3,
            trials,
            climb_steps: 10,
            step_size: 0.1,
            seed: 11,
        }
    }

    #[test]
    fn single_operator_free_ratio_stays_at_one() {
        let cfg = hardy_free_cfg(1, 0);
        let mut rng = ChaCha12Rng::seed_from_u64(3);
        for _ in 0..10 {
            let trial = random_trial(&cfg, &mut rng).unwrap();
            assert!(trial.ratio <= 1.0 + 1e-9, "ratio {}", trial.ratio);
        }
    }

    #[test]
    fn single_scalar_node_ratio_is_exactly_one() {
        let hardy = CommitteeSpace::hardy();
        let mut rng = ChaCha12Rng::seed_from_u64(8);
        let nodes = sample_node(&hardy, 1, 0.6, 1, &mut rng).unwrap();
        let cfg = SearchConfig {
            space: hardy,
            mode: SearchMode::Compressed { nodes, n_prime: 40 },
            m: 3,
            max_degree: 2,
            trials: 0,
            climb_steps: 0,
            step_size: 0.0,
            seed: 0,
        };
        for _ in 0..25 {
            let trial = random_trial(&cfg, &mut rng).unwrap();
            assert!((trial.ratio - 1.0).abs() < 1e-12);
        }
    }

    #[test]
    fn hill_climb_is_monotone_and_degenerate_cases_return_start() {
        let cfg = hardy_free_cfg(2, 0);
        let mut rng = ChaCha12Rng::seed_from_u64(5);
        let start = random_trial(&cfg, &mut rng).unwrap();

        // zero steps
        let mut cfg0 = cfg.clone();
        cfg0.climb_steps = 0;
        let out = hill_climb(&cfg0, start.clone(), &mut rng).unwrap();
        assert_eq!(out.ratio, start.ratio);

        // zero step size: perturbations vanish and ratio never strictly
        // increases, so the start survives
        let mut cfg2 = cfg.clone();
        cfg2.climb_steps = 15;
        cfg2.step_size = 0.0;
        let out = hill_climb(&cfg2, start.clone(), &mut rng).unwrap();
        assert_eq!(out.ratio, start.ratio);

        // general monotonicity over seeds
        let mut cfg3 = cfg;
        cfg3.climb_steps = 25;
        for seed in 0..20 {
            let mut rng = ChaCha12Rng::seed_from_u64(seed);
            let start = random_trial(&cfg3, &mut rng).unwrap();
            let end = hill_climb(&cfg3, start.clone(), &mut rng).unwrap();
            assert!(end.ratio >= start.ratio);
        }
    }

    #[test]
    fn run_is_reproducible_and_reports_fraction() {
        let mut cfg = hardy_free_cfg(2, 12);
        cfg.climb_steps = 5;
        let a = run(&cfg).unwrap();
        let b = run(&cfg).unwrap();
        assert_eq!(a.to_json(), b.to_json());
        assert_eq!(a.ratios.len(), 12);
        let frac = a.ratios.iter().filter(|&&r| r > 1.0).count() as f64 / 12.0;
        assert_eq!(a.ratio_gt_one_fraction, frac);
        let bins: usize = a.histogram.iter().map(|b| b.count).sum();
        assert_eq!(bins, 12);
    }

    #[test]
    fn empty_run_yields_empty_report() {
        let cfg = hardy_free_cfg(2, 0);
        let report = run(&cfg).unwrap();
        assert!(report.best.is_none());
        assert!(report.histogram.is_empty());
        assert_eq!(report.ratio_gt_one_fraction, 0.0);
        let json = report.to_json();
        assert!(json.contains("\"best_ratio\":null"));
    }

    #[test]
    fn free_mode_requires_degree_margin() {
        let mut cfg = hardy_free_cfg(1, 1);
        cfg.max_degree = 5; // 2 * 5 > 8
        assert!(run(&cfg).is_err());
    }
}
