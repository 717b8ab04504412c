//! Interpolation-node compressions.
//!
//! For a node set X the projection P_X onto the span of the evaluation
//! representers is co-invariant for multiplication operators, so compressed
//! adjoints act on the representer basis by closed forms: at a scalar node
//! the representer is scaled by conj(f(x)), and at a matrix node the s^2
//! entry representers mix through conj(f(x)) on the row index. Norms are
//! taken in the representer Gram metric.
//!
//! Representers are never materialized as coefficient lists here; Gram
//! entries are summed degree by degree with a certified geometric tail,
//! which stays exact (to tolerance) even at matrix nodes where the word
//! count per degree grows exponentially.

use nalgebra::DMatrix;
use rand::{Rng, RngExt};
use serde::{Deserialize, Serialize};

use crate::basis::Monomial;
use crate::error::{Error, Result};
use crate::linalg;
use crate::randmult::{RandomMultiplierModel, Side, standard_complex_gaussian};
use crate::space::{
    CommitteeSpace, EvalFunctional, Polynomial, SpaceKind, certified_truncation_degree,
    row_operator_norm,
};
use crate::C64;

/// Series tail target for Gram entries. Kept near machine precision: the
/// error of compressed norms grows like cond(G) times the entry error, and
/// the 1e-9 domination contracts need headroom at conditioning up to ~1e6.
const SERIES_TOL: f64 = 1e-15;
/// Relative Gram-Schmidt residual below which a representer is pruned.
const PRUNE_REL_TOL: f64 = 1e-10;
/// Nodes closer than this in domain distance are rejected at sampling.
const MIN_NODE_SEPARATION: f64 = 1e-6;

/// A point of the natural domain: a scalar tuple in the open unit ball, or a
/// matrix tuple with row operator norm below one.
#[derive(Clone, Debug)]
pub enum Point {
    Scalar(Vec<C64>),
    Matrix(Vec<DMatrix<C64>>),
}

/// An interpolation node together with its certified radius (the operator
/// norm of the row [x_1 ... x_d]).
#[derive(Clone, Debug)]
pub struct Node {
    point: Point,
    radius: f64,
}

impl Node {
    pub fn scalar(coords: Vec<C64>) -> Result<Node> {
        if coords.is_empty() {
            return Err(Error::InvalidArgument("scalar node needs at least one coordinate".into()));
        }
        let radius = coords.iter().map(|c| c.norm_sqr()).sum::<f64>().sqrt();
        if radius >= 1.0 {
            return Err(Error::Domain(format!("node radius {radius} is not < 1")));
        }
        Ok(Node { point: Point::Scalar(coords), radius })
    }

    pub fn matrix(mats: Vec<DMatrix<C64>>) -> Result<Node> {
        if mats.is_empty() {
            return Err(Error::InvalidArgument("matrix node needs at least one matrix".into()));
        }
        let s = mats[0].nrows();
        if s == 0 || mats.iter().any(|m| m.nrows() != s || m.ncols() != s) {
            return Err(Error::InvalidArgument(
                "matrix node entries must be square and equally sized".into(),
            ));
        }
        let radius = row_operator_norm(&mats);
        if radius >= 1.0 {
            return Err(Error::Domain(format!("node radius {radius} is not < 1")));
        }
        Ok(Node { point: Point::Matrix(mats), radius })
    }

    pub fn point(&self) -> &Point {
        &self.point
    }

    pub fn radius(&self) -> f64 {
        self.radius
    }

    pub fn matrix_size(&self) -> usize {
        match &self.point {
            Point::Scalar(_) => 1,
            Point::Matrix(m) => m[0].nrows(),
        }
    }

    /// Number of evaluation functionals the node contributes: 1 for a scalar
    /// node, s^2 for an s x s matrix node.
    pub fn functional_count(&self) -> usize {
        match &self.point {
            Point::Scalar(_) => 1,
            Point::Matrix(m) => m[0].nrows() * m[0].nrows(),
        }
    }

    /// The node's evaluation functionals, entry-major for matrix nodes.
    pub fn functionals(&self) -> Vec<EvalFunctional> {
        match &self.point {
            Point::Scalar(x) => vec![EvalFunctional::Scalar(x.clone())],
            Point::Matrix(m) => {
                let s = m[0].nrows();
                let mut out = Vec::with_capacity(s * s);
                for row in 0..s {
                    for col in 0..s {
                        out.push(EvalFunctional::MatrixEntry { point: m.clone(), row, col });
                    }
                }
                out
            }
        }
    }

    /// Euclidean distance between the stacked coordinates; infinite when the
    /// shapes differ.
    pub fn domain_distance(&self, other: &Node) -> f64 {
        match (&self.point, &other.point) {
            (Point::Scalar(a), Point::Scalar(b)) if a.len() == b.len() => {
                a.iter().zip(b).map(|(x, y)| (x - y).norm_sqr()).sum::<f64>().sqrt()
            }
            (Point::Matrix(a), Point::Matrix(b))
                if a.len() == b.len() && a[0].nrows() == b[0].nrows() =>
            {
                a.iter()
                    .zip(b)
                    .map(|(x, y)| (x - y).map(|c| c.norm_sqr()).sum())
                    .sum::<f64>()
                    .sqrt()
            }
            _ => f64::INFINITY,
        }
    }

    fn check_space(&self, space: &CommitteeSpace) -> Result<()> {
        match &self.point {
            Point::Scalar(x) => {
                if !space.commutative() || x.len() != space.variable_count() {
                    return Err(Error::InvalidArgument(format!(
                        "scalar node with {} coordinates does not match {space}",
                        x.len()
                    )));
                }
            }
            Point::Matrix(m) => {
                if space.commutative() || m.len() != space.variable_count() {
                    return Err(Error::InvalidArgument(format!(
                        "matrix node with {} matrices does not match {space}",
                        m.len()
                    )));
                }
            }
        }
        Ok(())
    }
}

/// Draw `count` nodes: scalar points uniform in the radius-r ball for
/// commutative spaces (`matrix_size` must be 1), matrix tuples with
/// Gaussian entries rescaled so the row norm is uniform on (0, r] for word
/// spaces. Nodes closer than 1e-6 to an earlier one are resampled.
pub fn sample_node<R: Rng + ?Sized>(
    space: &CommitteeSpace,
    count: usize,
    radius: f64,
    matrix_size: usize,
    rng: &mut R,
) -> Result<Vec<Node>> {
    if !(0.0 < radius && radius < 1.0) {
        return Err(Error::Domain(format!("sampling radius {radius} must lie in (0, 1)")));
    }
    if space.commutative() && matrix_size != 1 {
        return Err(Error::InvalidArgument(
            "matrix nodes only exist for noncommutative spaces".into(),
        ));
    }
    if matrix_size == 0 {
        return Err(Error::InvalidArgument("matrix_size must be >= 1".into()));
    }
    let d = space.variable_count();
    let mut nodes: Vec<Node> = Vec::with_capacity(count);
    while nodes.len() < count {
        let mut attempts = 0;
        let node = loop {
            let candidate = if space.commutative() {
                sample_ball_point(d, radius, rng)?
            } else {
                sample_matrix_point(d, matrix_size, radius, rng)?
            };
            if nodes.iter().all(|n| n.domain_distance(&candidate) >= MIN_NODE_SEPARATION) {
                break candidate;
            }
            attempts += 1;
            if attempts > 1000 {
                return Err(Error::Numerical(
                    "could not sample a node 1e-6 away from the existing ones".into(),
                ));
            }
        };
        nodes.push(node);
    }
    Ok(nodes)
}

fn sample_ball_point<R: Rng + ?Sized>(d: usize, radius: f64, rng: &mut R) -> Result<Node> {
    // gaussian direction + radial law u^(1/2d) is uniform in the real 2d-ball
    let mut coords: Vec<C64> = (0..d).map(|_| standard_complex_gaussian(rng)).collect();
    let norm = coords.iter().map(|c| c.norm_sqr()).sum::<f64>().sqrt();
    if norm == 0.0 {
        return sample_ball_point(d, radius, rng);
    }
    let u: f64 = 1.0 - rng.random::<f64>();
    let scale = radius * u.powf(1.0 / (2.0 * d as f64)) / norm;
    for c in &mut coords {
        *c *= scale;
    }
    Node::scalar(coords)
}

fn sample_matrix_point<R: Rng + ?Sized>(
    d: usize,
    s: usize,
    radius: f64,
    rng: &mut R,
) -> Result<Node> {
    let target = radius * (1.0 - rng.random::<f64>());
    sample_matrix_node_with_radius(d, s, target, rng)
}

/// A Gaussian-direction matrix node rescaled so the row operator norm equals
/// `radius` exactly. Still a continuous distribution, so the random-point
/// condition holds; useful when the experiment should sit at the edge of the
/// sampling ball instead of uniformly inside it.
pub fn sample_matrix_node_with_radius<R: Rng + ?Sized>(
    d: usize,
    s: usize,
    radius: f64,
    rng: &mut R,
) -> Result<Node> {
    if !(0.0 < radius && radius < 1.0) {
        return Err(Error::Domain(format!("node radius {radius} must lie in (0, 1)")));
    }
    let mats: Vec<DMatrix<C64>> = (0..d)
        .map(|_| DMatrix::from_fn(s, s, |_, _| standard_complex_gaussian(rng)))
        .collect();
    let norm = row_operator_norm(&mats);
    if norm == 0.0 {
        return sample_matrix_node_with_radius(d, s, radius, rng);
    }
    let scale = C64::new(radius / norm, 0.0);
    Node::matrix(mats.into_iter().map(|m| m * scale).collect())
}

/// Gram entry G[row, col] = <kappa_col, kappa_row>, summed degree by degree
/// with a certified tail below 1e-13.
pub fn gram_entry(
    space: &CommitteeSpace,
    f_row: &EvalFunctional,
    f_col: &EvalFunctional,
) -> Result<C64> {
    match (f_row, f_col) {
        (EvalFunctional::Scalar(x), EvalFunctional::Scalar(y)) => {
            scalar_gram_entry(space, x, y)
        }
        (
            EvalFunctional::MatrixEntry { point: px, row: a, col: b },
            EvalFunctional::MatrixEntry { point: py, row: c, col: dd },
        ) => {
            let block = matrix_gram_block(space, px, py)?;
            let sy = py[0].nrows();
            Ok(block[(a * sy + c, b * sy + dd)])
        }
        _ => Err(Error::InvalidArgument("cannot mix scalar and matrix representers".into())),
    }
}

fn scalar_gram_entry(space: &CommitteeSpace, x: &[C64], y: &[C64]) -> Result<C64> {
    if !space.commutative() || x.len() != space.variable_count() || y.len() != x.len() {
        return Err(Error::InvalidArgument("scalar representers need a commutative space".into()));
    }
    let t: C64 = x.iter().zip(y).map(|(a, b)| a * b.conj()).sum();
    match space.kind() {
        SpaceKind::Hardy | SpaceKind::DruryArveson => geometric_series(t, |_| 1.0),
        SpaceKind::Dirichlet => geometric_series(t, |l| 1.0 / (l as f64 + 1.0)),
        SpaceKind::Fock => unreachable!("fock is noncommutative"),
        SpaceKind::Custom => {
            // weights are only stated up to a max degree; the representers are
            // truncated there, so the finite sum is the exact Gram entry
            let cap = space.max_weight_degree().unwrap();
            let basis = space.basis(cap)?;
            let mut acc = C64::new(0.0, 0.0);
            for m in basis.monomials() {
                let vx = crate::space::scalar_monomial_value(m, x);
                let vy = crate::space::scalar_monomial_value(m, y);
                acc += vx * vy.conj() / C64::new(space.norm_sq(m)?, 0.0);
            }
            Ok(acc)
        }
    }
}

/// sum over L >= 0 of coeff(L) t^L with coeff <= 1, certified against the
/// geometric tail |t|^L / (1 - |t|).
fn geometric_series(t: C64, coeff: impl Fn(usize) -> f64) -> Result<C64> {
    let rho = t.norm();
    if rho >= 1.0 {
        return Err(Error::Domain(format!("series ratio {rho} is not < 1")));
    }
    let mut acc = C64::new(0.0, 0.0);
    let mut power = C64::new(1.0, 0.0);
    let mut level = 0usize;
    loop {
        acc += power * coeff(level);
        power *= t;
        level += 1;
        if rho == 0.0 || power.norm() / (1.0 - rho) < SERIES_TOL {
            return Ok(acc);
        }
        if level > 1_000_000 {
            return Err(Error::Numerical("gram series did not certify".into()));
        }
    }
}

/// Full s_x^2 by s_y^2 block of Gram entries between two matrix nodes:
/// Q = sum over words w of x^w (tensor) conj(y^w) / ||z^w||^2, summed degree
/// by degree. For Fock weights the degree-L slab is A^L with
/// A = sum_i x_i (tensor) conj(y_i), whose norm is at most (r_x r_y)^L.
fn matrix_gram_block(
    space: &CommitteeSpace,
    x: &[DMatrix<C64>],
    y: &[DMatrix<C64>],
) -> Result<DMatrix<C64>> {
    if space.commutative() || x.len() != space.variable_count() || y.len() != x.len() {
        return Err(Error::InvalidArgument("matrix representers need a word space".into()));
    }
    match space.kind() {
        SpaceKind::Fock => {
            let rx = row_operator_norm(x);
            let ry = row_operator_norm(y);
            let rho = rx * ry;
            if rho >= 1.0 {
                return Err(Error::Domain(format!("node radius product {rho} is not < 1")));
            }
            let sx = x[0].nrows();
            let sy = y[0].nrows();
            let dim = sx * sy;
            let mut step = DMatrix::<C64>::zeros(dim, dim);
            for (xi, yi) in x.iter().zip(y) {
                step += xi.kronecker(&yi.map(|c| c.conj()));
            }
            let mut acc = DMatrix::<C64>::identity(dim, dim);
            let mut power = DMatrix::<C64>::identity(dim, dim);
            let mut bound = 1.0f64;
            loop {
                power = &step * power;
                bound *= rho;
                acc += &power;
                if rho == 0.0 || bound / (1.0 - rho) < SERIES_TOL {
                    return Ok(acc);
                }
                if bound.is_nan() {
                    return Err(Error::Numerical("gram block series diverged".into()));
                }
            }
        }
        SpaceKind::Custom => {
            let cap = space.max_weight_degree().unwrap();
            let basis = space.basis(cap)?;
            let sx = x[0].nrows();
            let sy = y[0].nrows();
            let mut acc = DMatrix::<C64>::zeros(sx * sy, sx * sy);
            for m in basis.monomials() {
                let vx = crate::space::matrix_word_value(m, x, sx);
                let vy = crate::space::matrix_word_value(m, y, sy);
                acc += vx.kronecker(&vy.map(|c| c.conj())) / C64::new(space.norm_sq(m)?, 0.0);
            }
            Ok(acc)
        }
        _ => Err(Error::InvalidArgument(format!("{space} has no matrix points"))),
    }
}

/// Incremental Cholesky factor over a stream of representers, pruning those
/// whose Gram-Schmidt residual against the earlier span falls below the
/// relative threshold.
struct SequentialCholesky {
    /// Row m holds L[m][0..=m] with a real positive diagonal last.
    rows: Vec<Vec<C64>>,
}

impl SequentialCholesky {
    fn new() -> SequentialCholesky {
        SequentialCholesky { rows: Vec::new() }
    }

    fn kept(&self) -> usize {
        self.rows.len()
    }

    /// `column[i] = G[kept_i, new]` against the kept representers and
    /// `diag = G[new, new]`. Returns the new factor row (off-diagonal part
    /// followed by the real diagonal) unless the representer is pruned.
    fn try_row(&self, column: &[C64], diag: f64) -> Option<Vec<C64>> {
        let w = self.solve_lower(column);
        let residual = diag - w.iter().map(|c| c.norm_sqr()).sum::<f64>();
        if residual < PRUNE_REL_TOL * diag + 1e-300 {
            return None;
        }
        let mut row: Vec<C64> = w.iter().map(|c| c.conj()).collect();
        row.push(C64::new(residual.sqrt(), 0.0));
        Some(row)
    }

    fn push_row(&mut self, row: Vec<C64>) {
        self.rows.push(row);
    }

    /// Solve L w = rhs by forward substitution over the kept rows.
    fn solve_lower(&self, rhs: &[C64]) -> Vec<C64> {
        let m = self.rows.len();
        debug_assert_eq!(rhs.len(), m);
        let mut w = vec![C64::new(0.0, 0.0); m];
        for i in 0..m {
            let mut acc = rhs[i];
            for (k, wk) in w.iter().enumerate().take(i) {
                acc -= self.rows[i][k] * wk;
            }
            w[i] = acc / self.rows[i][i];
        }
        w
    }

    fn lower_matrix(&self) -> DMatrix<C64> {
        let m = self.rows.len();
        DMatrix::from_fn(m, m, |i, j| {
            if j <= i { self.rows[i][j] } else { C64::new(0.0, 0.0) }
        })
    }
}

/// The span of the evaluation representers at a node set, with its Gram
/// metric: the concrete form of the projection P_X.
#[derive(Clone, Debug)]
pub struct CompressionBasis {
    space: CommitteeSpace,
    nodes: Vec<Node>,
    functionals: Vec<EvalFunctional>,
    kept: Vec<usize>,
    pruned: Vec<usize>,
    gram_full: DMatrix<C64>,
    gram_kept: DMatrix<C64>,
    chol_l: DMatrix<C64>,
    cond: f64,
    n_prime: usize,
}

/// Assemble the representer basis at the given nodes. Representers whose
/// relative residual against the span of earlier ones is below 1e-10 are
/// pruned; the Gram matrix, its Cholesky factor, and its condition number
/// are retained. `n_prime` must dominate the certified truncation degree of
/// the space at the largest node radius.
pub fn build_compression(
    space: &CommitteeSpace,
    nodes: &[Node],
    n_prime: usize,
) -> Result<CompressionBasis> {
    if nodes.is_empty() {
        return Err(Error::InvalidArgument("at least one node is required".into()));
    }
    for node in nodes {
        node.check_space(space)?;
    }
    let max_radius = nodes.iter().map(|n| n.radius).fold(0.0, f64::max);
    check_n_prime(space, max_radius, n_prime)?;
    let functionals: Vec<EvalFunctional> = nodes.iter().flat_map(|n| n.functionals()).collect();
    let m = functionals.len();
    let mut gram_full = DMatrix::<C64>::zeros(m, m);
    for i in 0..m {
        for j in 0..=i {
            let g = gram_entry(space, &functionals[i], &functionals[j])?;
            gram_full[(i, j)] = g;
            gram_full[(j, i)] = g.conj();
        }
    }
    let mut chol = SequentialCholesky::new();
    let mut kept: Vec<usize> = Vec::new();
    let mut pruned: Vec<usize> = Vec::new();
    for j in 0..m {
        let column: Vec<C64> = kept.iter().map(|&i| gram_full[(i, j)]).collect();
        if let Some(row) = chol.try_row(&column, gram_full[(j, j)].re) {
            chol.push_row(row);
            kept.push(j);
        } else {
            pruned.push(j);
        }
    }
    if kept.is_empty() {
        return Err(Error::Conditioning("every representer was pruned".into()));
    }
    let k = kept.len();
    let gram_kept = DMatrix::from_fn(k, k, |i, j| gram_full[(kept[i], kept[j])]);
    let (lo, hi) = linalg::hermitian_eigen_range(&gram_kept)?;
    if !(lo > 0.0) || !lo.is_finite() || !hi.is_finite() {
        return Err(Error::Conditioning(format!(
            "gram matrix numerically singular after pruning (eigen range {lo}..{hi})"
        )));
    }
    Ok(CompressionBasis {
        space: space.clone(),
        nodes: nodes.to_vec(),
        functionals,
        kept,
        pruned,
        gram_full,
        gram_kept,
        chol_l: chol.lower_matrix(),
        cond: hi / lo,
        n_prime,
    })
}

fn check_n_prime(space: &CommitteeSpace, max_radius: f64, n_prime: usize) -> Result<()> {
    if let Some(cap) = space.max_weight_degree() {
        if n_prime > cap {
            return Err(Error::InvalidArgument(format!(
                "n_prime = {n_prime} exceeds the stated degree {cap} of this custom space"
            )));
        }
        return Ok(());
    }
    let needed = certified_truncation_degree(space, max_radius)?;
    if n_prime < needed {
        return Err(Error::InvalidArgument(format!(
            "n_prime = {n_prime} below the certified truncation degree {needed} at radius {max_radius}"
        )));
    }
    Ok(())
}

impl CompressionBasis {
    pub fn space(&self) -> &CommitteeSpace {
        &self.space
    }

    pub fn nodes(&self) -> &[Node] {
        &self.nodes
    }

    pub fn n_prime(&self) -> usize {
        self.n_prime
    }

    /// Representers surviving the pruning pass.
    pub fn kept_len(&self) -> usize {
        self.kept.len()
    }

    pub fn pruned_count(&self) -> usize {
        self.pruned.len()
    }

    /// Condition number of the pruned Gram matrix.
    pub fn gram_cond(&self) -> f64 {
        self.cond
    }

    pub fn gram(&self) -> &DMatrix<C64> {
        &self.gram_kept
    }

    /// Matrix of the compressed adjoint P_X M_f^* P_X on the kept representer
    /// basis. Scalar nodes contribute diag(conj(f(x))); an s x s matrix node
    /// contributes the block conj-transpose(f(x)) (tensor) I_s. Columns of
    /// pruned representers are re-expressed through the kept span.
    pub fn compressed_adjoint_action(&self, f: &Polynomial) -> Result<DMatrix<C64>> {
        if f.space() != &self.space {
            return Err(Error::InvalidArgument("polynomial belongs to a different space".into()));
        }
        let m = self.functionals.len();
        let mut full = DMatrix::<C64>::zeros(m, m);
        let mut offset = 0usize;
        for node in &self.nodes {
            match &node.point {
                Point::Scalar(x) => {
                    full[(offset, offset)] = f.eval_scalar(x)?.conj();
                    offset += 1;
                }
                Point::Matrix(mats) => {
                    let s = mats[0].nrows();
                    let value = f.eval_matrix(mats)?;
                    let block = value.adjoint().kronecker(&DMatrix::<C64>::identity(s, s));
                    full.view_mut((offset, offset), (s * s, s * s)).copy_from(&block);
                    offset += s * s;
                }
            }
        }
        let k = self.kept.len();
        let mut action = DMatrix::<C64>::from_fn(k, k, |i, j| {
            full[(self.kept[i], self.kept[j])]
        });
        if !self.pruned.is_empty() {
            // kappa_pruned = sum E[i][p] kappa_kept_i with G_kk E = G_kp
            let g_kp = DMatrix::<C64>::from_fn(k, self.pruned.len(), |i, p| {
                self.gram_full[(self.kept[i], self.pruned[p])]
            });
            let e = self.gram_solve(&g_kp);
            let c_pk = DMatrix::<C64>::from_fn(self.pruned.len(), k, |p, j| {
                full[(self.pruned[p], self.kept[j])]
            });
            action += e * c_pk;
        }
        Ok(action)
    }

    /// Solve G x = rhs through the Cholesky factor.
    fn gram_solve(&self, rhs: &DMatrix<C64>) -> DMatrix<C64> {
        let y = self
            .chol_l
            .solve_lower_triangular(rhs)
            .expect("cholesky factor has positive diagonal");
        self.chol_l
            .adjoint()
            .solve_upper_triangular(&y)
            .expect("cholesky factor has positive diagonal")
    }

    /// Adjoint of an operator on the representer span, in the Gram metric:
    /// G^-1 A^H G.
    pub fn gram_adjoint_of(&self, a: &DMatrix<C64>) -> DMatrix<C64> {
        self.gram_solve(&(a.adjoint() * &self.gram_kept))
    }

    /// Operator norm on the representer span in the Gram metric: the largest
    /// singular value of L^H A L^-H (computed through its adjoint
    /// L^-1 (L^H A)^H, which shares the singular values).
    pub fn gram_norm(&self, a: &DMatrix<C64>) -> Result<f64> {
        let b = self.chol_l.adjoint() * a;
        let xh = self
            .chol_l
            .solve_lower_triangular(&b.adjoint())
            .ok_or_else(|| Error::Conditioning("cholesky solve failed".into()))?;
        linalg::spectral_norm(&xh)
    }

    /// Squared norm of the compressed column [P M_k P]: the Gram-metric norm
    /// of sum_k A_k A_k^dagger.
    pub fn compressed_col_norm_sq(&self, fs: &[Polynomial]) -> Result<f64> {
        self.compressed_norm_sq(fs, Side::Col)
    }

    /// Squared norm of the compressed row, sum_k A_k^dagger A_k.
    pub fn compressed_row_norm_sq(&self, fs: &[Polynomial]) -> Result<f64> {
        self.compressed_norm_sq(fs, Side::Row)
    }

    fn compressed_norm_sq(&self, fs: &[Polynomial], side: Side) -> Result<f64> {
        if fs.is_empty() {
            return Err(Error::InvalidArgument("tuple of multipliers is empty".into()));
        }
        let k = self.kept.len();
        let mut acc = DMatrix::<C64>::zeros(k, k);
        for f in fs {
            let a = self.compressed_adjoint_action(f)?;
            let adj = self.gram_adjoint_of(&a);
            match side {
                Side::Col => acc += &a * &adj,
                Side::Row => acc += &adj * &a,
            }
        }
        self.gram_norm(&acc)
    }

    /// Expectation of the compressed products over a random multiplier model:
    /// side = row gives sum w_gamma A_gamma^dagger A_gamma, side = col the
    /// reversed order. Returns the matrix and its Gram-metric norm.
    pub fn compressed_expected(
        &self,
        model: &RandomMultiplierModel,
        side: Side,
    ) -> Result<(DMatrix<C64>, f64)> {
        if model.space() != &self.space {
            return Err(Error::InvalidArgument("model belongs to a different space".into()));
        }
        let k = self.kept.len();
        let mut acc = DMatrix::<C64>::zeros(k, k);
        for (gamma, &w) in model.weights() {
            let mono = Polynomial::monomial(&self.space, gamma.clone(), C64::new(1.0, 0.0))?;
            let a = self.compressed_adjoint_action(&mono)?;
            let adj = self.gram_adjoint_of(&a);
            let w = C64::new(w, 0.0);
            match side {
                Side::Row => acc += (&adj * &a) * w,
                Side::Col => acc += (&a * &adj) * w,
            }
        }
        let norm = self.gram_norm(&acc)?;
        Ok((acc, norm))
    }

    /// ||P_X z^gamma||^2 via the Gram projection.
    pub fn project_monomial_norm_sq(&self, gamma: &Monomial) -> Result<f64> {
        let b: Vec<C64> = self
            .kept
            .iter()
            .map(|&i| self.functionals[i].apply_monomial(gamma))
            .collect::<Result<_>>()?;
        let rhs = DMatrix::<C64>::from_fn(self.kept.len(), 1, |i, _| b[i]);
        let t = self
            .chol_l
            .solve_lower_triangular(&rhs)
            .ok_or_else(|| Error::Conditioning("cholesky solve failed".into()))?;
        Ok(t.map(|c| c.norm_sqr()).sum())
    }
}

/// The nondecreasing trace <C^X_n 1, 1> = sum w_gamma ||P_X_n z^gamma||^2
/// along nested node prefixes, plus the kept-representer counts and the
/// limiting value sum w_gamma ||z^gamma||^2.
#[derive(Clone, Debug)]
pub struct CorollaryTrace {
    pub values: Vec<f64>,
    pub kept_counts: Vec<usize>,
    pub upper_bound: f64,
}

/// Follow the projections along the node prefixes X_1 c X_2 c ... computing
/// the trace incrementally: each new kept representer appends one coordinate
/// to every solved system, so the sequence is nondecreasing by construction.
pub fn corollary_trace(
    model: &RandomMultiplierModel,
    nodes: &[Node],
    n_prime: usize,
) -> Result<CorollaryTrace> {
    let space = model.space().clone();
    for node in nodes {
        node.check_space(&space)?;
    }
    let max_radius = nodes.iter().map(|n| n.radius).fold(0.0, f64::max);
    if !nodes.is_empty() {
        check_n_prime(&space, max_radius, n_prime)?;
    }
    let mut upper_bound = 0.0;
    for (gamma, &w) in model.weights() {
        upper_bound += w * space.norm_sq(gamma)?;
    }
    let support: Vec<(Monomial, f64)> =
        model.weights().iter().map(|(m, &w)| (m.clone(), w)).collect();
    let mut chol = SequentialCholesky::new();
    let mut kept_funcs: Vec<EvalFunctional> = Vec::new();
    // per support monomial: solved coordinates' accumulated square norm
    let mut sq: Vec<f64> = vec![0.0; support.len()];
    let mut t: Vec<Vec<C64>> = vec![Vec::new(); support.len()];
    let mut values = Vec::with_capacity(nodes.len());
    let mut kept_counts = Vec::with_capacity(nodes.len());
    for node in nodes {
        for phi in node.functionals() {
            let column: Vec<C64> = kept_funcs
                .iter()
                .map(|psi| gram_entry(&space, psi, &phi))
                .collect::<Result<_>>()?;
            let diag = gram_entry(&space, &phi, &phi)?.re;
            let Some(row) = chol.try_row(&column, diag) else {
                continue;
            };
            let m = chol.kept();
            for (g, (gamma, _)) in support.iter().enumerate() {
                let b = phi.apply_monomial(gamma)?;
                let mut acc = b;
                for k in 0..m {
                    acc -= row[k] * t[g][k];
                }
                let coord = acc / C64::new(row[m].re, 0.0);
                t[g].push(coord);
                sq[g] += coord.norm_sqr();
            }
            chol.push_row(row);
            kept_funcs.push(phi);
        }
        values.push(support.iter().zip(&sq).map(|((_, w), s)| w * s).sum());
        kept_counts.push(chol.kept());
    }
    Ok(CorollaryTrace { values, kept_counts, upper_bound })
}

/// Row or column reading of the target data.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum TargetShape {
    Row,
    Column,
}

/// A Nevanlinna-Pick problem: scalar nodes with an m-vector of target values
/// at each, read as a row or a column.
#[derive(Clone, Debug)]
pub struct PickProblem {
    space: CommitteeSpace,
    nodes: Vec<Node>,
    targets: Vec<Vec<C64>>,
    shape: TargetShape,
}

impl PickProblem {
    pub fn new(
        space: &CommitteeSpace,
        nodes: Vec<Node>,
        targets: Vec<Vec<C64>>,
        shape: TargetShape,
    ) -> Result<PickProblem> {
        if !matches!(space.kind(), SpaceKind::Hardy | SpaceKind::DruryArveson) {
            return Err(Error::InvalidArgument(format!(
                "the Pick-matrix test is only offered for hardy and drury_arveson, not {space}"
            )));
        }
        if nodes.is_empty() || nodes.len() != targets.len() {
            return Err(Error::InvalidArgument("need one target vector per node".into()));
        }
        let m = targets[0].len();
        if m == 0 || targets.iter().any(|t| t.len() != m) {
            return Err(Error::InvalidArgument("target vectors must share a positive length".into()));
        }
        for node in &nodes {
            node.check_space(space)?;
            if !matches!(node.point, Point::Scalar(_)) {
                return Err(Error::InvalidArgument("pick_min_norm takes scalar nodes".into()));
            }
        }
        Ok(PickProblem { space: space.clone(), nodes, targets, shape })
    }
}

/// Minimal multiplier norm t* of the interpolation problem, located by
/// bisection on the positive semidefiniteness of the Pick matrix, to absolute
/// tolerance 1e-8.
pub fn pick_min_norm(problem: &PickProblem) -> Result<f64> {
    // merge coincident nodes; conflicting targets make the problem infeasible
    let mut nodes: Vec<&Node> = Vec::new();
    let mut targets: Vec<&Vec<C64>> = Vec::new();
    for (node, target) in problem.nodes.iter().zip(&problem.targets) {
        if let Some(pos) = nodes.iter().position(|n| n.domain_distance(node) < MIN_NODE_SEPARATION)
        {
            let same = targets[pos]
                .iter()
                .zip(target)
                .all(|(a, b)| (a - b).norm() < 1e-9);
            if !same {
                return Err(Error::Infeasible(
                    "coincident nodes carry conflicting target values".into(),
                ));
            }
            continue;
        }
        nodes.push(node);
        targets.push(target);
    }
    let n = nodes.len();
    let funcs: Vec<EvalFunctional> = nodes
        .iter()
        .map(|node| match &node.point {
            Point::Scalar(x) => EvalFunctional::Scalar(x.clone()),
            Point::Matrix(_) => unreachable!("validated at construction"),
        })
        .collect();
    let mut kernel = DMatrix::<C64>::zeros(n, n);
    for i in 0..n {
        for j in 0..=i {
            let g = gram_entry(&problem.space, &funcs[i], &funcs[j])?;
            kernel[(i, j)] = g;
            kernel[(j, i)] = g.conj();
        }
    }
    let feasible = |t: f64| -> Result<bool> {
        let pick = match problem.shape {
            TargetShape::Row => DMatrix::<C64>::from_fn(n, n, |i, j| {
                let dot: C64 = targets[i].iter().zip(targets[j]).map(|(a, b)| a * b.conj()).sum();
                (C64::new(t * t, 0.0) - dot) * kernel[(i, j)]
            }),
            TargetShape::Column => {
                let m = targets[0].len();
                let mut pick = DMatrix::<C64>::zeros(n * m, n * m);
                for i in 0..n {
                    for j in 0..n {
                        for a in 0..m {
                            for b in 0..m {
                                let eye = if a == b { C64::new(t * t, 0.0) } else { C64::new(0.0, 0.0) };
                                pick[(i * m + a, j * m + b)] =
                                    (eye - targets[i][a] * targets[j][b].conj()) * kernel[(i, j)];
                            }
                        }
                    }
                }
                pick
            }
        };
        let (lo, _) = linalg::hermitian_eigen_range(&pick)?;
        let dim = pick.nrows() as f64;
        let scale = (pick.diagonal().iter().map(|c| c.re).sum::<f64>() / dim).abs().max(1.0);
        Ok(lo >= -1e-12 * scale)
    };
    let mut hi = targets
        .iter()
        .map(|t| t.iter().map(|c| c.norm_sqr()).sum::<f64>().sqrt())
        .fold(0.0, f64::max)
        .max(1e-12);
    if feasible(0.0)? {
        return Ok(0.0);
    }
    let mut grow = 0;
    while !feasible(hi)? {
        hi *= 2.0;
        grow += 1;
        if grow > 60 {
            return Err(Error::Infeasible("no finite-norm solution found".into()));
        }
    }
    let mut lo = 0.0f64;
    while hi - lo > 1e-8 {
        let mid = 0.5 * (lo + hi);
        if feasible(mid)? {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    Ok(hi)
}

/// JSON node list: each element either a scalar point (d pairs [re, im]) or a
/// matrix point (d matrices given as s rows of s pairs).
#[derive(Clone, Debug, Deserialize, Serialize)]
#[serde(untagged)]
pub enum NodeJson {
    Scalar(Vec<[f64; 2]>),
    Matrix(Vec<Vec<Vec<[f64; 2]>>>),
}

pub fn nodes_from_json(space: &CommitteeSpace, text: &str) -> Result<Vec<Node>> {
    let raw: Vec<NodeJson> = serde_json::from_str(text)
        .map_err(|e| Error::InvalidArgument(format!("node list: {e}")))?;
    raw.iter()
        .map(|nj| {
            let node = match nj {
                NodeJson::Scalar(coords) => {
                    Node::scalar(coords.iter().map(|[re, im]| C64::new(*re, *im)).collect())?
                }
                NodeJson::Matrix(mats) => {
                    let built: Vec<DMatrix<C64>> = mats
                        .iter()
                        .map(|rows| {
                            let s = rows.len();
                            if rows.iter().any(|r| r.len() != s) {
                                return Err(Error::InvalidArgument(
                                    "matrix point rows must be square".into(),
                                ));
                            }
                            Ok(DMatrix::from_fn(s, s, |i, j| {
                                C64::new(rows[i][j][0], rows[i][j][1])
                            }))
                        })
                        .collect::<Result<_>>()?;
                    Node::matrix(built)?
                }
            };
            node.check_space(space)?;
            Ok(node)
        })
        .collect()
}
