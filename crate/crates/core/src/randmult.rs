//! Random multiplier models: finitely supported variance weights w_gamma and
//! a mean-zero coefficient law with unit second moment.
//!
//! For such a model the expectation operators R_v = E(M_f M_f^*) and
//! C_v = E(M_f^* M_f) are diagonal in the monomial basis, with closed-form
//! entries driven by the decompositions gamma + beta = alpha:
//!
//! ```text
//! diag R_v at alpha = sum over gamma + beta = alpha of w_gamma ||z^alpha||^2 / ||z^beta||^2
//! diag C_v at alpha = sum over gamma of w_gamma ||z^(gamma+alpha)||^2 / ||z^alpha||^2
//! ```
//!
//! `bound_chain` evaluates the norm chain
//! row <= sup_alpha sum ||z^gamma||^2 w_gamma <= sum ||z^gamma||^2 w_gamma = col
//! at a truncation level, and `monte_carlo` estimates the expectations by
//! sample averages for cross-checking.

use std::collections::BTreeMap;

use nalgebra::DMatrix;
use rand::{Rng, RngExt, SeedableRng};
use rand_chacha::ChaCha12Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::basis::Monomial;
use crate::error::{Error, Result};
use crate::operator::Truncation;
use crate::space::{CommitteeSpace, Polynomial};
use crate::C64;

/// Distribution of the unit-variance coefficient factors.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum CoefficientLaw {
    /// +1 or -1 with equal probability.
    Rademacher,
    /// Uniform on the complex unit circle.
    Steinhaus,
    /// Complex Gaussian conditioned on modulus <= radius, rescaled so the
    /// second moment is exactly one. Restores the almost-sure bound that a
    /// plain Gaussian lacks.
    TruncatedGaussian { radius: f64 },
}

impl CoefficientLaw {
    /// Largest modulus the unit-variance factor can attain.
    pub fn max_modulus(&self) -> f64 {
        match self {
            CoefficientLaw::Rademacher | CoefficientLaw::Steinhaus => 1.0,
            CoefficientLaw::TruncatedGaussian { radius } => {
                radius * truncated_gaussian_rescale(*radius)
            }
        }
    }

    fn sample_unit<R: Rng + ?Sized>(&self, rng: &mut R) -> C64 {
        match self {
            CoefficientLaw::Rademacher => {
                if rng.random::<bool>() {
                    C64::new(1.0, 0.0)
                } else {
                    C64::new(-1.0, 0.0)
                }
            }
            CoefficientLaw::Steinhaus => {
                let theta = std::f64::consts::TAU * rng.random::<f64>();
                C64::new(theta.cos(), theta.sin())
            }
            CoefficientLaw::TruncatedGaussian { radius } => {
                let k = truncated_gaussian_rescale(*radius);
                loop {
                    let g = standard_complex_gaussian(rng);
                    if g.norm() <= *radius {
                        return g * k;
                    }
                }
            }
        }
    }
}

/// A standard complex Gaussian with E|g|^2 = 1.
pub(crate) fn standard_complex_gaussian<R: Rng + ?Sized>(rng: &mut R) -> C64 {
    C64::new(standard_normal(rng), standard_normal(rng)) / C64::new(2f64.sqrt(), 0.0)
}

pub(crate) fn standard_normal<R: Rng + ?Sized>(rng: &mut R) -> f64 {
    // Box-Muller; 1 - u keeps the logarithm away from zero
    let u1: f64 = 1.0 - rng.random::<f64>();
    let u2: f64 = rng.random::<f64>();
    (-2.0 * u1.ln()).sqrt() * (std::f64::consts::TAU * u2).cos()
}

/// Factor that restores unit variance after conditioning |g| <= radius:
/// |g|^2 is Exp(1), so E(|g|^2 | |g| <= r) = (1 - e^(-r^2)(1 + r^2)) / (1 - e^(-r^2)).
fn truncated_gaussian_rescale(radius: f64) -> f64 {
    let r2 = radius * radius;
    let conditional_second_moment = (1.0 - (-r2).exp() * (1.0 + r2)) / (1.0 - (-r2).exp());
    1.0 / conditional_second_moment.sqrt()
}

/// Which side of the product to average.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Side {
    /// M_f M_f^*
    Row,
    /// M_f^* M_f
    Col,
}

/// Finitely supported variance weights plus a coefficient law.
#[derive(Clone, Debug)]
pub struct RandomMultiplierModel {
    space: CommitteeSpace,
    weights: BTreeMap<Monomial, f64>,
    law: CoefficientLaw,
    bound_c: f64,
}

impl RandomMultiplierModel {
    pub fn new(
        space: &CommitteeSpace,
        weights: BTreeMap<Monomial, f64>,
        law: CoefficientLaw,
    ) -> Result<RandomMultiplierModel> {
        if let CoefficientLaw::TruncatedGaussian { radius } = law
            && (!(radius > 0.0) || !radius.is_finite())
        {
            return Err(Error::InvalidArgument(format!(
                "truncated gaussian radius must be positive, got {radius}"
            )));
        }
        let mut max_degree = 0usize;
        for (m, &w) in &weights {
            if !(w > 0.0) || !w.is_finite() {
                return Err(Error::InvalidArgument(format!("variance weight at {m} must be positive")));
            }
            space.norm_sq(m)?; // validates kind, d, and custom degree coverage
            max_degree = max_degree.max(m.degree());
        }
        // reported almost-sure multiplier bound: sum sqrt(w) * law_max * ||M_{z^gamma}||
        let mut bound_c = 0.0;
        for (m, &w) in &weights {
            let mut shift = None;
            let mut n_ref = max_degree + 8;
            while n_ref >= m.degree() {
                match space.shift_norm(m, n_ref) {
                    Ok(sn) => {
                        shift = Some(sn.value);
                        break;
                    }
                    Err(_) if n_ref > m.degree() => n_ref -= 1,
                    Err(e) => return Err(e),
                }
            }
            let shift = shift.ok_or_else(|| {
                Error::InvalidArgument(format!("cannot bound the shift norm of {m} on {space}"))
            })?;
            bound_c += w.sqrt() * law.max_modulus() * shift;
        }
        Ok(RandomMultiplierModel { space: space.clone(), weights, law, bound_c })
    }

    pub fn space(&self) -> &CommitteeSpace {
        &self.space
    }

    pub fn weights(&self) -> &BTreeMap<Monomial, f64> {
        &self.weights
    }

    pub fn law(&self) -> CoefficientLaw {
        self.law
    }

    /// Reported almost-sure bound on the sampled multiplier norm.
    pub fn bound_c(&self) -> f64 {
        self.bound_c
    }

    pub fn max_degree(&self) -> usize {
        self.weights.keys().map(|m| m.degree()).max().unwrap_or(0)
    }

    fn check_truncation(&self, n: usize) -> Result<()> {
        if self.max_degree() > n {
            return Err(Error::InvalidArgument(format!(
                "support degree {} exceeds truncation {n}",
                self.max_degree()
            )));
        }
        Ok(())
    }

    /// Draw f_v = sum v_gamma z^gamma with v_gamma = sqrt(w_gamma) * unit law.
    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> Polynomial {
        let coeffs: Vec<(Monomial, C64)> = self
            .weights
            .iter()
            .map(|(m, &w)| (m.clone(), self.law.sample_unit(rng) * w.sqrt()))
            .collect();
        Polynomial::from_coeffs(&self.space, coeffs).expect("support validated at construction")
    }

    /// Diagonal of R_v compressed to degree <= n, over the graded basis.
    pub fn expected_row_diag(&self, n: usize) -> Result<Vec<f64>> {
        self.check_truncation(n)?;
        let basis = self.space.basis(n)?;
        let mut diag = vec![0.0; basis.len()];
        for (i, alpha) in basis.monomials().iter().enumerate() {
            let ns_alpha = self.space.norm_sq(alpha)?;
            for (gamma, &w) in &self.weights {
                if let Some(beta) = alpha.left_quotient(gamma) {
                    diag[i] += w * ns_alpha / self.space.norm_sq(&beta)?;
                }
            }
        }
        Ok(diag)
    }

    /// Diagonal of C_v compressed to degree <= n; only gamma with
    /// deg(gamma + alpha) <= n contribute, so the top rows feel the cut.
    pub fn expected_col_diag(&self, n: usize) -> Result<Vec<f64>> {
        self.check_truncation(n)?;
        let basis = self.space.basis(n)?;
        let mut diag = vec![0.0; basis.len()];
        for (i, alpha) in basis.monomials().iter().enumerate() {
            let ns_alpha = self.space.norm_sq(alpha)?;
            for (gamma, &w) in &self.weights {
                if gamma.degree() + alpha.degree() <= n {
                    let shifted = gamma.combine(alpha)?;
                    diag[i] += w * self.space.norm_sq(&shifted)? / ns_alpha;
                }
            }
        }
        Ok(diag)
    }

    /// Evaluate the truncated norm chain
    /// row_norm <= sup_bound <= sum_bound = col_norm
    /// together with the per-monomial decomposition sparsity fractions.
    pub fn bound_chain(&self, n: usize) -> Result<BoundChain> {
        self.check_truncation(n)?;
        let basis = self.space.basis(n)?;
        let row_diag = self.expected_row_diag(n)?;
        let col_diag = self.expected_col_diag(n)?;
        let row_norm = row_diag.iter().cloned().fold(0.0, f64::max);
        let col_norm = col_diag.iter().cloned().fold(0.0, f64::max);
        let mut sum_bound = 0.0;
        for (gamma, &w) in &self.weights {
            sum_bound += self.space.norm_sq(gamma)? * w;
        }
        let mut sup_bound = 0.0f64;
        let mut stats = vec![0.0; basis.len()];
        for (i, alpha) in basis.monomials().iter().enumerate() {
            let mut s = 0.0;
            let mut hits = 0usize;
            for (gamma, &w) in &self.weights {
                if alpha.left_quotient(gamma).is_some() {
                    s += self.space.norm_sq(gamma)? * w;
                    hits += 1;
                }
            }
            sup_bound = sup_bound.max(s);
            if !self.weights.is_empty() {
                stats[i] = hits as f64 / self.weights.len() as f64;
            }
        }
        Ok(BoundChain { row_norm, sup_bound, sum_bound, col_norm, decomposition_stats: stats })
    }

    /// Sample average of M_f M_f^* (row) or M_f^* M_f (col) over n_samples
    /// draws, on the degree-<= n coordinate basis. Sample i uses the ChaCha
    /// stream i + 1 of `master_seed`, and partial sums are reduced in fixed
    /// chunk order, so the result is identical for any worker count.
    pub fn monte_carlo(
        &self,
        n_samples: usize,
        n: usize,
        side: Side,
        master_seed: u64,
    ) -> Result<DMatrix<C64>> {
        if n_samples == 0 {
            return Err(Error::InvalidArgument("n_samples must be >= 1".into()));
        }
        self.check_truncation(n)?;
        let truncation = Truncation::new(&self.space, n)?;
        let dim = truncation.dim();
        const CHUNK: usize = 512;
        let starts: Vec<usize> = (0..n_samples).step_by(CHUNK).collect();
        let partials: Vec<Result<DMatrix<C64>>> = starts
            .par_iter()
            .map(|&start| {
                let mut acc = DMatrix::<C64>::zeros(dim, dim);
                for i in start..(start + CHUNK).min(n_samples) {
                    let mut rng = ChaCha12Rng::seed_from_u64(master_seed);
                    rng.set_stream(i as u64 + 1);
                    let f = self.sample(&mut rng);
                    let t = truncation.mult(&f)?;
                    let adj = t.gram_adjoint();
                    match side {
                        Side::Row => acc += t.entries() * adj.entries(),
                        Side::Col => acc += adj.entries() * t.entries(),
                    }
                }
                Ok(acc)
            })
            .collect();
        let mut total = DMatrix::<C64>::zeros(dim, dim);
        for p in partials {
            total += p?;
        }
        Ok(total / C64::new(n_samples as f64, 0.0))
    }

    /// Closed-form diagonal matching `monte_carlo(side)`.
    pub fn closed_form_diag(&self, n: usize, side: Side) -> Result<Vec<f64>> {
        match side {
            Side::Row => self.expected_row_diag(n),
            Side::Col => self.expected_col_diag(n),
        }
    }
}

/// The four values of the truncated norm chain, in the order they bound each
/// other, plus the fraction of support monomials dividing (or prefixing) each
/// basis monomial.
#[derive(Clone, Debug)]
pub struct BoundChain {
    pub row_norm: f64,
    pub sup_bound: f64,
    pub sum_bound: f64,
    pub col_norm: f64,
    pub decomposition_stats: Vec<f64>,
}

impl BoundChain {
    /// row <= sup <= sum = col within the stated slack.
    pub fn chain_ok(&self, tol: f64) -> bool {
        self.row_norm <= self.sup_bound + tol
            && self.sup_bound <= self.sum_bound + tol
            && (self.sum_bound - self.col_norm).abs() <= tol
    }
}

/// Largest |entry - closed_form| over the matrix, treating the closed form as
/// a diagonal.
pub fn max_entrywise_deviation(matrix: &DMatrix<C64>, diag: &[f64]) -> f64 {
    let mut worst = 0.0f64;
    for i in 0..matrix.nrows() {
        for j in 0..matrix.ncols() {
            let target = if i == j { C64::new(diag[i], 0.0) } else { C64::new(0.0, 0.0) };
            worst = worst.max((matrix[(i, j)] - target).norm());
        }
    }
    worst
}

/// Off-diagonal energy per dimension: sum of |entries|^2 off the diagonal,
/// divided by the dimension.
pub fn offdiag_mass(matrix: &DMatrix<C64>) -> f64 {
    let mut acc = 0.0;
    for i in 0..matrix.nrows() {
        for j in 0..matrix.ncols() {
            if i != j {
                acc += matrix[(i, j)].norm_sqr();
            }
        }
    }
    acc / matrix.nrows() as f64
}

/// JSON description of a model:
/// `{"support":["(1,0)","(0,1)"],"weights":"uniform","law":"steinhaus"}` or
/// `{"support":{"max_degree":2},"weights":{"(0)":1.0,...},"law":"truncated_gaussian","gaussian_radius":2.0}`.
#[derive(Clone, Debug, Deserialize, Serialize)]
#[serde(deny_unknown_fields)]
pub struct ModelSpec {
    pub support: SupportSpec,
    pub weights: WeightsSpec,
    pub law: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub gaussian_radius: Option<f64>,
}

#[derive(Clone, Debug, Deserialize, Serialize)]
#[serde(untagged)]
pub enum SupportSpec {
    List(Vec<String>),
    UpToDegree { max_degree: usize },
}

#[derive(Clone, Debug, Deserialize, Serialize)]
#[serde(untagged)]
pub enum WeightsSpec {
    Keyword(String),
    Map(BTreeMap<String, f64>),
}

pub fn model_from_spec(space: &CommitteeSpace, spec: &ModelSpec) -> Result<RandomMultiplierModel> {
    let support: Vec<Monomial> = match &spec.support {
        SupportSpec::List(texts) => texts
            .iter()
            .map(|t| Monomial::parse(t, space.commutative(), space.variable_count()))
            .collect::<Result<_>>()?,
        SupportSpec::UpToDegree { max_degree } => {
            crate::basis::enumerate(space.commutative(), space.variable_count(), *max_degree)?
        }
    };
    if support.is_empty() {
        return Err(Error::InvalidArgument("model support is empty".into()));
    }
    let weights: BTreeMap<Monomial, f64> = match &spec.weights {
        WeightsSpec::Keyword(k) if k == "uniform" => {
            let w = 1.0 / support.len() as f64;
            support.iter().map(|m| (m.clone(), w)).collect()
        }
        WeightsSpec::Keyword(other) => {
            return Err(Error::InvalidArgument(format!(
                "weights: expected \"uniform\" or a map, got {other:?}"
            )));
        }
        WeightsSpec::Map(map) => {
            let mut out = BTreeMap::new();
            for (text, &w) in map {
                let m = Monomial::parse(text, space.commutative(), space.variable_count())?;
                if !support.contains(&m) {
                    return Err(Error::InvalidArgument(format!(
                        "weight key {m} is not in the support"
                    )));
                }
                out.insert(m, w);
            }
            if out.len() != support.len() {
                return Err(Error::InvalidArgument(
                    "weights must cover the whole support".into(),
                ));
            }
            out
        }
    };
    let law = match spec.law.as_str() {
        "rademacher" => {
            reject_radius(spec)?;
            CoefficientLaw::Rademacher
        }
        "steinhaus" => {
            reject_radius(spec)?;
            CoefficientLaw::Steinhaus
        }
        "truncated_gaussian" => CoefficientLaw::TruncatedGaussian {
            radius: spec.gaussian_radius.ok_or_else(|| {
                Error::InvalidArgument("gaussian_radius is required for truncated_gaussian".into())
            })?,
        },
        other => {
            return Err(Error::InvalidArgument(format!("law: unknown law {other:?}")));
        }
    };
    RandomMultiplierModel::new(space, weights, law)
}

fn reject_radius(spec: &ModelSpec) -> Result<()> {
    if spec.gaussian_radius.is_some() {
        return Err(Error::InvalidArgument(format!(
            "gaussian_radius only applies to truncated_gaussian, not {:?}",
            spec.law
        )));
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::operator::TruncatedOperator;

    fn cm(e: &[u32]) -> Monomial {
        Monomial::Commutative(e.to_vec())
    }

    fn hardy_geometric() -> RandomMultiplierModel {
        let hardy = CommitteeSpace::hardy();
        let weights = BTreeMap::from([
            (cm(&[0]), 1.0),
            (cm(&[1]), 0.5),
            (cm(&[2]), 0.25),
            (cm(&[3]), 0.125),
        ]);
        RandomMultiplierModel::new(&hardy, weights, CoefficientLaw::Steinhaus).unwrap()
    }

    fn da2_uniform_degree_one() -> RandomMultiplierModel {
        let da2 = CommitteeSpace::drury_arveson(2).unwrap();
        let weights = BTreeMap::from([(cm(&[1, 0]), 0.5), (cm(&[0, 1]), 0.5)]);
        RandomMultiplierModel::new(&da2, weights, CoefficientLaw::Steinhaus).unwrap()
    }

    #[test]
    fn row_diag_examples() {
        let diag = hardy_geometric().expected_row_diag(3).unwrap();
        assert!((diag[3] - 1.875).abs() < 1e-15);

        let model = da2_uniform_degree_one();
        let diag = model.expected_row_diag(4).unwrap();
        let basis = model.space().basis(4).unwrap();
        for (i, alpha) in basis.monomials().iter().enumerate() {
            let want = if alpha.is_one() { 0.0 } else { 0.5 };
            assert!((diag[i] - want).abs() < 1e-15, "at {alpha}");
        }

        let empty = RandomMultiplierModel::new(
            &CommitteeSpace::hardy(),
            BTreeMap::new(),
            CoefficientLaw::Rademacher,
        )
        .unwrap();
        assert!(empty.expected_row_diag(3).unwrap().iter().all(|&v| v == 0.0));
    }

    #[test]
    fn col_diag_examples() {
        let diag = hardy_geometric().expected_col_diag(3).unwrap();
        assert!((diag[0] - 1.875).abs() < 1e-15);
        assert!(diag.iter().all(|&v| v <= diag[0]));

        let diag = da2_uniform_degree_one().expected_col_diag(4).unwrap();
        assert!((diag[0] - 1.0).abs() < 1e-15);

        let dir = CommitteeSpace::dirichlet();
        let model = RandomMultiplierModel::new(
            &dir,
            BTreeMap::from([(cm(&[1]), 1.0)]),
            CoefficientLaw::Rademacher,
        )
        .unwrap();
        let diag = model.expected_col_diag(2).unwrap();
        assert!((diag[0] - 2.0).abs() < 1e-15);
    }

    #[test]
    fn bound_chain_examples() {
        let chain = hardy_geometric().bound_chain(3).unwrap();
        assert!((chain.row_norm - 1.875).abs() < 1e-15);
        assert!((chain.col_norm - 1.875).abs() < 1e-15);
        assert!(chain.chain_ok(1e-12));

        let chain = da2_uniform_degree_one().bound_chain(6).unwrap();
        assert!((chain.row_norm - 0.5).abs() < 1e-15);
        assert!((chain.sup_bound - 1.0).abs() < 1e-15);
        assert!((chain.sum_bound - 1.0).abs() < 1e-15);
        assert!((chain.col_norm - 1.0).abs() < 1e-15);
        assert!(chain.chain_ok(1e-12));

        // single atom: row = c * max ratio <= c * ||z^g||^2 = col
        let dir = CommitteeSpace::dirichlet();
        let model = RandomMultiplierModel::new(
            &dir,
            BTreeMap::from([(cm(&[2]), 0.7)]),
            CoefficientLaw::Rademacher,
        )
        .unwrap();
        let chain = model.bound_chain(5).unwrap();
        assert!(chain.chain_ok(1e-12));
        assert!((chain.col_norm - 0.7 * 3.0).abs() < 1e-15);
    }

    #[test]
    fn decomposition_stats_count_divisors() {
        let model = da2_uniform_degree_one();
        let chain = model.bound_chain(2).unwrap();
        let basis = model.space().basis(2).unwrap();
        let idx = |e: &[u32]| basis.index_of(&cm(e)).unwrap();
        assert_eq!(chain.decomposition_stats[idx(&[0, 0])], 0.0);
        assert_eq!(chain.decomposition_stats[idx(&[1, 0])], 0.5);
        assert_eq!(chain.decomposition_stats[idx(&[1, 1])], 1.0);
        assert_eq!(chain.decomposition_stats[idx(&[2, 0])], 0.5);
    }

    #[test]
    fn sample_moments() {
        let model = hardy_geometric();
        let mut rng = ChaCha12Rng::seed_from_u64(42);
        let n = 10_000usize;
        let mut mean = BTreeMap::new();
        let mut second = BTreeMap::new();
        for _ in 0..n {
            let f = model.sample(&mut rng);
            for (m, c) in f.coeffs() {
                *mean.entry(m.clone()).or_insert(C64::new(0.0, 0.0)) += c;
                *second.entry(m.clone()).or_insert(0.0) += c.norm_sqr();
            }
        }
        for (m, &w) in model.weights() {
            let avg = mean[m] / C64::new(n as f64, 0.0);
            assert!(
                avg.norm() <= 3.0 * (w / n as f64).sqrt(),
                "mean of v at {m} too large: {avg}"
            );
            let var = second[m] / n as f64;
            assert!((var - w).abs() <= 0.05 * w, "second moment at {m}: {var} vs {w}");
        }
    }

    #[test]
    fn truncated_gaussian_law_is_bounded_with_unit_variance() {
        let law = CoefficientLaw::TruncatedGaussian { radius: 1.5 };
        let mut rng = ChaCha12Rng::seed_from_u64(7);
        let cap = law.max_modulus();
        let mut second = 0.0;
        let n = 20_000;
        for _ in 0..n {
            let v = law.sample_unit(&mut rng);
            assert!(v.norm() <= cap + 1e-12);
            second += v.norm_sqr();
        }
        assert!((second / n as f64 - 1.0).abs() < 0.03);
    }

    #[test]
    fn rademacher_support_z() {
        let hardy = CommitteeSpace::hardy();
        let model = RandomMultiplierModel::new(
            &hardy,
            BTreeMap::from([(cm(&[1]), 1.0)]),
            CoefficientLaw::Rademacher,
        )
        .unwrap();
        let mut rng = ChaCha12Rng::seed_from_u64(1);
        for _ in 0..20 {
            let f = model.sample(&mut rng);
            let c = f.coeff(&cm(&[1]));
            assert!(c == C64::new(1.0, 0.0) || c == C64::new(-1.0, 0.0));
        }
        // sign-invariant product: a single rademacher sample gives exactly
        // mult(z) gram_adjoint(mult(z))
        let mc = model.monte_carlo(1, 3, Side::Row, 9).unwrap();
        let z = Polynomial::monomial(&hardy, cm(&[1]), C64::new(1.0, 0.0)).unwrap();
        let t = TruncatedOperator::mult_op(&z, 3).unwrap();
        let exact = t.entries() * t.gram_adjoint().entries();
        assert!((mc - exact).map(|c| c.norm()).max() < 1e-15);
    }

    #[test]
    fn monte_carlo_deterministic_across_chunking() {
        let model = da2_uniform_degree_one();
        let a = model.monte_carlo(700, 3, Side::Col, 5).unwrap();
        let b = model.monte_carlo(700, 3, Side::Col, 5).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn model_spec_parsing() {
        let da2 = CommitteeSpace::drury_arveson(2).unwrap();
        let spec: ModelSpec = serde_json::from_str(
            r#"{"support":["(1,0)","(0,1)"],"weights":"uniform","law":"steinhaus"}"#,
        )
        .unwrap();
        let model = model_from_spec(&da2, &spec).unwrap();
        assert_eq!(model.weights().len(), 2);
        assert!((model.weights()[&cm(&[1, 0])] - 0.5).abs() < 1e-15);

        let spec: ModelSpec = serde_json::from_str(
            r#"{"support":{"max_degree":1},"weights":{"(0,0)":1.0,"(1,0)":0.5,"(0,1)":0.25},"law":"truncated_gaussian","gaussian_radius":2.0}"#,
        )
        .unwrap();
        let model = model_from_spec(&da2, &spec).unwrap();
        assert_eq!(model.weights().len(), 3);

        let bad: ModelSpec = serde_json::from_str(
            r#"{"support":["(1,0)"],"weights":"uniform","law":"gaussian"}"#,
        )
        .unwrap();
        assert!(model_from_spec(&da2, &bad).is_err());

        let bad: ModelSpec = serde_json::from_str(
            r#"{"support":["(1,0)"],"weights":{"(0,1)":1.0},"law":"steinhaus"}"#,
        )
        .unwrap();
        assert!(model_from_spec(&da2, &bad).is_err());
    }

    #[test]
    fn bound_c_is_reported() {
        let model = hardy_geometric();
        // Hardy shifts have norm one, so the bound is sum sqrt(w)
        let want: f64 = [1.0f64, 0.5, 0.25, 0.125].iter().map(|w| w.sqrt()).sum();
        assert!((model.bound_c() - want).abs() < 1e-12);
    }
}
