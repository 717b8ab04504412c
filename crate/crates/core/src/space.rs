//! Weighted power-series Hilbert spaces with orthogonal monomials.
//!
//! A space is described by the weight map alpha -> ||z^alpha||^2. The defining
//! inequality ||z^alpha|| ||z^beta|| >= ||z^(alpha+beta)|| makes every monomial
//! shift bounded; `check_committee` verifies it exhaustively up to a degree
//! cap, and the built-in spaces (Hardy, Drury-Arveson, Fock, Dirichlet) are
//! known to satisfy it at every degree.

use std::collections::{BTreeMap, HashMap};
use std::fmt;
use std::sync::Arc;

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use crate::basis::{Basis, Monomial, enumerate};
use crate::error::{Error, Result};
use crate::C64;

const COMMITTEE_REL_TOL: f64 = 1e-12;
const TAIL_TOL: f64 = 1e-10;

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum SpaceKind {
    Hardy,
    DruryArveson,
    Fock,
    Dirichlet,
    Custom,
}

#[derive(Debug)]
struct CustomWeights {
    max_degree: usize,
    weights: HashMap<Monomial, f64>,
}

/// A committee space: variable count, commutativity flag, and the weight map
/// `norm_sq`. Immutable after construction and cheap to clone.
#[derive(Clone, Debug)]
pub struct CommitteeSpace {
    kind: SpaceKind,
    d: usize,
    commutative: bool,
    custom: Option<Arc<CustomWeights>>,
}

impl PartialEq for CommitteeSpace {
    fn eq(&self, other: &Self) -> bool {
        self.kind == other.kind
            && self.d == other.d
            && self.commutative == other.commutative
            && match (&self.custom, &other.custom) {
                (None, None) => true,
                (Some(a), Some(b)) => {
                    a.max_degree == b.max_degree && a.weights == b.weights
                }
                _ => false,
            }
    }
}

impl fmt::Display for CommitteeSpace {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.kind {
            SpaceKind::Hardy => write!(f, "hardy"),
            SpaceKind::DruryArveson => write!(f, "drury_arveson({})", self.d),
            SpaceKind::Fock => write!(f, "fock({})", self.d),
            SpaceKind::Dirichlet => write!(f, "dirichlet"),
            SpaceKind::Custom => write!(f, "custom(d={})", self.d),
        }
    }
}

impl CommitteeSpace {
    /// One-variable space with every monomial of norm one.
    pub fn hardy() -> CommitteeSpace {
        CommitteeSpace { kind: SpaceKind::Hardy, d: 1, commutative: true, custom: None }
    }

    /// d-variable commutative space with ||z^alpha||^2 = 1 / multinomial(|alpha|; alpha).
    pub fn drury_arveson(d: usize) -> Result<CommitteeSpace> {
        if d == 0 {
            return Err(Error::InvalidArgument("drury_arveson requires d >= 1".into()));
        }
        Ok(CommitteeSpace { kind: SpaceKind::DruryArveson, d, commutative: true, custom: None })
    }

    /// Noncommutative space with every word of norm one.
    pub fn fock(d: usize) -> Result<CommitteeSpace> {
        if d == 0 {
            return Err(Error::InvalidArgument("fock requires d >= 1".into()));
        }
        Ok(CommitteeSpace { kind: SpaceKind::Fock, d, commutative: false, custom: None })
    }

    /// One-variable space with <z^n, z^n> = n + 1.
    pub fn dirichlet() -> CommitteeSpace {
        CommitteeSpace { kind: SpaceKind::Dirichlet, d: 1, commutative: true, custom: None }
    }

    /// User-supplied weights, stated for every monomial up to some maximum
    /// degree. Requires weight 1 on the empty monomial and strictly positive
    /// weights throughout; evaluation beyond the stated degree is an error.
    pub fn custom(
        d: usize,
        commutative: bool,
        weights: BTreeMap<Monomial, f64>,
    ) -> Result<CommitteeSpace> {
        if d == 0 {
            return Err(Error::InvalidArgument("custom space requires d >= 1".into()));
        }
        let mut max_degree = 0usize;
        for (m, &w) in &weights {
            if m.is_commutative() != commutative || m.variable_count() != d {
                return Err(Error::InvalidArgument(format!(
                    "weight key {m} does not match d = {d}, commutative = {commutative}"
                )));
            }
            if !(w > 0.0) || !w.is_finite() {
                return Err(Error::InvalidArgument(format!("nonpositive weight at {m}")));
            }
            max_degree = max_degree.max(m.degree());
        }
        let all = enumerate(commutative, d, max_degree)?;
        for m in &all {
            if !weights.contains_key(m) {
                return Err(Error::InvalidArgument(format!(
                    "custom weights must cover every monomial of degree <= {max_degree}; missing {m}"
                )));
            }
        }
        let empty = if commutative { Monomial::one_commutative(d) } else { Monomial::one_word(d) };
        let w0 = *weights.get(&empty).ok_or_else(|| {
            Error::InvalidArgument("custom weights must include the empty monomial".into())
        })?;
        if (w0 - 1.0).abs() > 1e-14 {
            return Err(Error::InvalidArgument(format!(
                "weight of the constant must be 1 (got {w0})"
            )));
        }
        Ok(CommitteeSpace {
            kind: SpaceKind::Custom,
            d,
            commutative,
            custom: Some(Arc::new(CustomWeights {
                max_degree,
                weights: weights.into_iter().collect(),
            })),
        })
    }

    pub fn kind(&self) -> &SpaceKind {
        &self.kind
    }

    pub fn variable_count(&self) -> usize {
        self.d
    }

    pub fn commutative(&self) -> bool {
        self.commutative
    }

    /// Largest degree at which `norm_sq` is defined (custom spaces only).
    pub fn max_weight_degree(&self) -> Option<usize> {
        self.custom.as_ref().map(|c| c.max_degree)
    }

    pub fn name(&self) -> String {
        self.to_string()
    }

    fn check_monomial(&self, m: &Monomial) -> Result<()> {
        if m.is_commutative() != self.commutative || m.variable_count() != self.d {
            return Err(Error::InvalidArgument(format!(
                "monomial {m} does not belong to {self}"
            )));
        }
        Ok(())
    }

    /// The squared monomial norm ||z^m||^2.
    pub fn norm_sq(&self, m: &Monomial) -> Result<f64> {
        self.check_monomial(m)?;
        match self.kind {
            SpaceKind::Hardy | SpaceKind::Fock => Ok(1.0),
            SpaceKind::Dirichlet => Ok(m.degree() as f64 + 1.0),
            SpaceKind::DruryArveson => {
                let Monomial::Commutative(e) = m else { unreachable!() };
                Ok(1.0 / multinomial(e)? as f64)
            }
            SpaceKind::Custom => {
                let cw = self.custom.as_ref().unwrap();
                cw.weights.get(m).copied().ok_or_else(|| {
                    Error::InvalidArgument(format!(
                        "degree {} beyond the stated max degree {} of this custom space",
                        m.degree(),
                        cw.max_degree
                    ))
                })
            }
        }
    }

    /// Weight vector over a coordinate basis.
    pub fn norms_on(&self, basis: &Basis) -> Result<Vec<f64>> {
        basis.monomials().iter().map(|m| self.norm_sq(m)).collect()
    }

    pub fn basis(&self, max_degree: usize) -> Result<Basis> {
        Basis::new(self.commutative, self.d, max_degree)
    }

    /// The empty monomial of this space.
    pub fn one(&self) -> Monomial {
        if self.commutative {
            Monomial::one_commutative(self.d)
        } else {
            Monomial::one_word(self.d)
        }
    }

    /// Exhaustively check ||z^a||^2 ||z^b||^2 >= ||z^(a+b)||^2 over all pairs
    /// with deg a + deg b <= n, up to relative slack 1e-12. Violations are
    /// data, not errors.
    pub fn check_committee(&self, n: usize) -> Result<CommitteeReport> {
        let basis = self.basis(n)?;
        let norms = self.norms_on(&basis)?;
        let mut by_degree: Vec<Vec<usize>> = vec![Vec::new(); n + 1];
        for (i, m) in basis.monomials().iter().enumerate() {
            by_degree[m.degree()].push(i);
        }
        let mut violations = Vec::new();
        let mut pairs = 0usize;
        for da in 0..=n {
            for db in 0..=(n - da) {
                for &ia in &by_degree[da] {
                    for &ib in &by_degree[db] {
                        pairs += 1;
                        let a = basis.monomial(ia);
                        let b = basis.monomial(ib);
                        let ab = a.combine(b)?;
                        let product = norms[ia] * norms[ib];
                        let combined = norms[basis.index_of(&ab)?];
                        if product < combined * (1.0 - COMMITTEE_REL_TOL) {
                            violations.push(CommitteeViolation {
                                alpha: a.clone(),
                                beta: b.clone(),
                                product,
                                combined,
                            });
                        }
                    }
                }
            }
        }
        Ok(CommitteeReport { degree_cap: n, pairs_checked: pairs, violations })
    }

    /// max over deg(alpha) <= n of ||z^(gamma+alpha)|| / ||z^alpha||, the
    /// degree-capped value of the shift norm ||M_{z^gamma}||. Also reports
    /// whether the maximum is attained at the empty monomial.
    pub fn shift_norm(&self, gamma: &Monomial, n: usize) -> Result<ShiftNorm> {
        self.check_monomial(gamma)?;
        if gamma.degree() > n {
            return Err(Error::InvalidArgument(format!(
                "deg(gamma) = {} exceeds n = {n}",
                gamma.degree()
            )));
        }
        let basis = self.basis(n)?;
        let mut best = f64::NEG_INFINITY;
        let mut at_empty = 0.0f64;
        for alpha in basis.monomials() {
            let shifted = gamma.combine(alpha)?;
            let ratio_sq = self.norm_sq(&shifted)? / self.norm_sq(alpha)?;
            if alpha.is_one() {
                at_empty = ratio_sq;
            }
            best = best.max(ratio_sq);
        }
        let value = best.sqrt();
        if self.kind != SpaceKind::Custom {
            // built-ins satisfy the committee inequality at every degree
            debug_assert!(value <= self.norm_sq(gamma)?.sqrt() + 1e-12);
        }
        Ok(ShiftNorm { value, attained_at_empty: at_empty >= best * (1.0 - 1e-12) })
    }
}

/// Exact multinomial coefficient (a_1 + ... + a_d)! / (a_1! ... a_d!).
pub fn multinomial(exponents: &[u32]) -> Result<u128> {
    let mut total = 0u64;
    let mut result = 1u128;
    for &e in exponents {
        total += e as u64;
        result = result
            .checked_mul(binomial(total, e as u64)?)
            .ok_or_else(|| Error::Numerical("multinomial overflow; degree too large".into()))?;
    }
    Ok(result)
}

fn binomial(n: u64, k: u64) -> Result<u128> {
    let k = k.min(n - k);
    let mut result = 1u128;
    for i in 1..=k {
        result = result
            .checked_mul((n - k + i) as u128)
            .ok_or_else(|| Error::Numerical("binomial overflow; degree too large".into()))?;
        result /= i as u128; // exact: result is C(n-k+i, i) at each step
    }
    Ok(result)
}

#[derive(Clone, Debug)]
pub struct CommitteeViolation {
    pub alpha: Monomial,
    pub beta: Monomial,
    /// ||z^alpha||^2 ||z^beta||^2
    pub product: f64,
    /// ||z^(alpha+beta)||^2
    pub combined: f64,
}

#[derive(Clone, Debug)]
pub struct CommitteeReport {
    pub degree_cap: usize,
    pub pairs_checked: usize,
    pub violations: Vec<CommitteeViolation>,
}

impl CommitteeReport {
    pub fn passed(&self) -> bool {
        self.violations.is_empty()
    }
}

#[derive(Clone, Copy, Debug)]
pub struct ShiftNorm {
    pub value: f64,
    pub attained_at_empty: bool,
}

/// A finitely supported power series with coefficients in the given space.
#[derive(Clone, Debug, PartialEq)]
pub struct Polynomial {
    space: CommitteeSpace,
    coeffs: BTreeMap<Monomial, C64>,
}

impl Polynomial {
    pub fn zero(space: &CommitteeSpace) -> Polynomial {
        Polynomial { space: space.clone(), coeffs: BTreeMap::new() }
    }

    pub fn monomial(space: &CommitteeSpace, m: Monomial, coeff: C64) -> Result<Polynomial> {
        Polynomial::from_coeffs(space, [(m, coeff)])
    }

    pub fn from_coeffs(
        space: &CommitteeSpace,
        coeffs: impl IntoIterator<Item = (Monomial, C64)>,
    ) -> Result<Polynomial> {
        let mut map = BTreeMap::new();
        for (m, c) in coeffs {
            space.check_monomial(&m)?;
            if c != C64::new(0.0, 0.0) {
                *map.entry(m).or_insert(C64::new(0.0, 0.0)) += c;
            }
        }
        map.retain(|_, c| *c != C64::new(0.0, 0.0));
        Ok(Polynomial { space: space.clone(), coeffs: map })
    }

    pub fn space(&self) -> &CommitteeSpace {
        &self.space
    }

    pub fn coeffs(&self) -> impl Iterator<Item = (&Monomial, &C64)> {
        self.coeffs.iter()
    }

    pub fn coeff(&self, m: &Monomial) -> C64 {
        self.coeffs.get(m).copied().unwrap_or_else(|| C64::new(0.0, 0.0))
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.is_empty()
    }

    pub fn degree(&self) -> usize {
        self.coeffs.keys().map(|m| m.degree()).max().unwrap_or(0)
    }

    pub fn support_len(&self) -> usize {
        self.coeffs.len()
    }

    /// Weighted inner product <p, q> = sum_gamma p_gamma conj(q_gamma) ||z^gamma||^2.
    pub fn inner(&self, other: &Polynomial) -> Result<C64> {
        if self.space != other.space {
            return Err(Error::InvalidArgument("inner product across different spaces".into()));
        }
        let mut acc = C64::new(0.0, 0.0);
        for (m, c) in &self.coeffs {
            let oc = other.coeffs.get(m);
            if let Some(oc) = oc {
                acc += c * oc.conj() * self.space.norm_sq(m)?;
            }
        }
        Ok(acc)
    }

    pub fn norm_sq(&self) -> Result<f64> {
        Ok(self.inner(self)?.re)
    }

    /// Evaluate at a scalar point of C^d (commutative spaces).
    pub fn eval_scalar(&self, x: &[C64]) -> Result<C64> {
        if !self.space.commutative {
            return Err(Error::InvalidArgument(
                "scalar evaluation requires a commutative space".into(),
            ));
        }
        if x.len() != self.space.d {
            return Err(Error::InvalidArgument(format!(
                "point has {} coordinates, space has {}",
                x.len(),
                self.space.d
            )));
        }
        let mut acc = C64::new(0.0, 0.0);
        for (m, c) in &self.coeffs {
            acc += c * scalar_monomial_value(m, x);
        }
        Ok(acc)
    }

    /// Evaluate at a tuple of square matrices (word spaces): words become
    /// ordered matrix products.
    pub fn eval_matrix(&self, x: &[DMatrix<C64>]) -> Result<DMatrix<C64>> {
        let s = check_matrix_point(self.space.d, self.space.commutative, x)?;
        let mut acc = DMatrix::<C64>::zeros(s, s);
        for (m, c) in &self.coeffs {
            acc += matrix_word_value(m, x, s) * *c;
        }
        Ok(acc)
    }
}

pub(crate) fn scalar_monomial_value(m: &Monomial, x: &[C64]) -> C64 {
    match m {
        Monomial::Commutative(e) => {
            let mut v = C64::new(1.0, 0.0);
            for (xi, &ei) in x.iter().zip(e) {
                v *= xi.powu(ei);
            }
            v
        }
        Monomial::Word { letters, .. } => {
            // scalar values commute, so the product collapses
            let mut v = C64::new(1.0, 0.0);
            for &l in letters {
                v *= x[l as usize - 1];
            }
            v
        }
    }
}

pub(crate) fn matrix_word_value(m: &Monomial, x: &[DMatrix<C64>], s: usize) -> DMatrix<C64> {
    let Monomial::Word { letters, .. } = m else {
        panic!("matrix evaluation is only defined for words");
    };
    let mut v = DMatrix::<C64>::identity(s, s);
    for &l in letters {
        v *= &x[l as usize - 1];
    }
    v
}

pub(crate) fn check_matrix_point(
    d: usize,
    commutative: bool,
    x: &[DMatrix<C64>],
) -> Result<usize> {
    if commutative {
        return Err(Error::InvalidArgument(
            "matrix evaluation requires a noncommutative space".into(),
        ));
    }
    if x.len() != d {
        return Err(Error::InvalidArgument(format!(
            "point has {} matrices, space has d = {d}",
            x.len()
        )));
    }
    let s = x[0].nrows();
    for xi in x {
        if xi.nrows() != s || xi.ncols() != s {
            return Err(Error::InvalidArgument("matrix point entries must be square and equally sized".into()));
        }
    }
    Ok(s)
}

/// Operator norm of the row [x_1 ... x_d]; for scalar points this is the
/// Euclidean norm of the coordinate vector.
pub fn row_operator_norm(x: &[DMatrix<C64>]) -> f64 {
    let s = x[0].nrows();
    let d = x.len();
    let mut row = DMatrix::<C64>::zeros(s, s * d);
    for (i, xi) in x.iter().enumerate() {
        row.view_mut((0, i * s), (s, s)).copy_from(xi);
    }
    row.singular_values().max()
}

/// A bounded evaluation functional: a scalar point of C^d, or one entry of a
/// matrix-point evaluation.
#[derive(Clone, Debug)]
pub enum EvalFunctional {
    Scalar(Vec<C64>),
    MatrixEntry { point: Vec<DMatrix<C64>>, row: usize, col: usize },
}

impl EvalFunctional {
    /// Row operator norm of the underlying point.
    pub fn radius(&self) -> f64 {
        match self {
            EvalFunctional::Scalar(x) => x.iter().map(|c| c.norm_sqr()).sum::<f64>().sqrt(),
            EvalFunctional::MatrixEntry { point, .. } => row_operator_norm(point),
        }
    }

    /// Apply the functional to a polynomial.
    pub fn apply(&self, p: &Polynomial) -> Result<C64> {
        match self {
            EvalFunctional::Scalar(x) => p.eval_scalar(x),
            EvalFunctional::MatrixEntry { point, row, col } => {
                Ok(p.eval_matrix(point)?[(*row, *col)])
            }
        }
    }

    /// Apply the functional to a single monomial z^m.
    pub fn apply_monomial(&self, m: &Monomial) -> Result<C64> {
        match self {
            EvalFunctional::Scalar(x) => {
                if m.is_commutative() && m.variable_count() == x.len() {
                    Ok(scalar_monomial_value(m, x))
                } else {
                    Err(Error::InvalidArgument("monomial does not match scalar point".into()))
                }
            }
            EvalFunctional::MatrixEntry { point, row, col } => {
                if m.is_commutative() || m.variable_count() != point.len() {
                    return Err(Error::InvalidArgument("monomial does not match matrix point".into()));
                }
                let s = point[0].nrows();
                Ok(matrix_word_value(m, point, s)[(*row, *col)])
            }
        }
    }
}

/// Representer of an evaluation functional, truncated to degree <= n_prime:
/// coefficients conj(x^alpha) / ||z^alpha||^2 (entrywise for matrix points).
/// Satisfies <p, representer> = p(x) for every p of degree <= n_prime.
pub fn kernel_representer(
    space: &CommitteeSpace,
    functional: &EvalFunctional,
    n_prime: usize,
) -> Result<Polynomial> {
    let r = functional.radius();
    if r >= 1.0 {
        return Err(Error::Domain(format!(
            "point radius {r} is outside the admissible open unit ball"
        )));
    }
    match functional {
        EvalFunctional::Scalar(x) => {
            if !space.commutative || x.len() != space.d {
                return Err(Error::InvalidArgument(
                    "scalar representer requires a commutative space of matching d".into(),
                ));
            }
        }
        EvalFunctional::MatrixEntry { point, row, col } => {
            let s = check_matrix_point(space.d, space.commutative, point)?;
            if *row >= s || *col >= s {
                return Err(Error::InvalidArgument("entry index outside the matrix point".into()));
            }
        }
    }
    let basis = space.basis(n_prime)?;
    let mut coeffs = Vec::with_capacity(basis.len());
    for m in basis.monomials() {
        let value = functional.apply_monomial(m)?;
        coeffs.push((m.clone(), value.conj() / C64::new(space.norm_sq(m)?, 0.0)));
    }
    Polynomial::from_coeffs(space, coeffs)
}

/// Least degree at which the discarded representer tail is certified below
/// 1e-10 for the built-in spaces: the tail is dominated by the geometric
/// series sum_{L > n} r^(2L).
pub fn certified_truncation_degree(space: &CommitteeSpace, radius: f64) -> Result<usize> {
    if space.kind == SpaceKind::Custom {
        return Err(Error::InvalidArgument(
            "custom spaces have no certified tail; choose a truncation within the stated degree".into(),
        ));
    }
    if !(0.0..1.0).contains(&radius) {
        return Err(Error::Domain(format!("radius {radius} must lie in [0, 1)")));
    }
    let t = radius * radius;
    if t == 0.0 {
        return Ok(0);
    }
    let mut tail = t / (1.0 - t); // tail after degree 0
    let mut n = 0usize;
    while tail >= TAIL_TOL {
        tail *= t;
        n += 1;
        if n > 100_000 {
            return Err(Error::Domain(format!("radius {radius} too close to 1 to certify")));
        }
    }
    Ok(n)
}

/// JSON description of a space, e.g.
/// `{"kind":"drury_arveson","d":2}` or
/// `{"kind":"custom","d":1,"commutative":true,"weights":{"(0)":1.0,"(1)":1.0,"(2)":4.0}}`.
#[derive(Clone, Debug, Deserialize, Serialize)]
#[serde(deny_unknown_fields)]
pub struct SpaceSpec {
    pub kind: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub d: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub commutative: Option<bool>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub weights: Option<BTreeMap<String, f64>>,
}

pub fn space_from_spec(spec: &SpaceSpec) -> Result<CommitteeSpace> {
    let bad_field = |what: &str| Error::InvalidArgument(format!("space.{what}"));
    match spec.kind.as_str() {
        "hardy" => {
            if spec.d.unwrap_or(1) != 1 {
                return Err(bad_field("d: hardy is a one-variable space"));
            }
            Ok(CommitteeSpace::hardy())
        }
        "dirichlet" => {
            if spec.d.unwrap_or(1) != 1 {
                return Err(bad_field("d: dirichlet is a one-variable space"));
            }
            Ok(CommitteeSpace::dirichlet())
        }
        "drury_arveson" => CommitteeSpace::drury_arveson(
            spec.d.ok_or_else(|| bad_field("d is required for drury_arveson"))?,
        ),
        "fock" => CommitteeSpace::fock(spec.d.ok_or_else(|| bad_field("d is required for fock"))?),
        "custom" => {
            let d = spec.d.ok_or_else(|| bad_field("d is required for custom"))?;
            let commutative = spec
                .commutative
                .ok_or_else(|| bad_field("commutative is required for custom"))?;
            let raw = spec
                .weights
                .as_ref()
                .ok_or_else(|| bad_field("weights are required for custom"))?;
            let mut weights = BTreeMap::new();
            for (text, &w) in raw {
                weights.insert(Monomial::parse(text, commutative, d)?, w);
            }
            CommitteeSpace::custom(d, commutative, weights)
        }
        other => Err(Error::InvalidArgument(format!("space.kind: unknown kind {other:?}"))),
    }
}

pub fn space_from_json(text: &str) -> Result<CommitteeSpace> {
    let spec: SpaceSpec = serde_json::from_str(text)
        .map_err(|e| Error::InvalidArgument(format!("space spec: {e}")))?;
    space_from_spec(&spec)
}
