//! Truncated multiplication operators on the degree-capped coordinate basis.
//!
//! An operator is a dense square matrix over the graded monomial basis
//! together with the diagonal Gram weights W = diag(||z^alpha||^2). Adjoints
//! and norms are taken in the weighted inner product: the adjoint is
//! W^-1 T^H W and the norm is the largest singular value of
//! W^(1/2) T W^(-1/2). Multiplication always compresses back to degree <= N.

use std::sync::Arc;

use nalgebra::DMatrix;

use crate::basis::Basis;
use crate::error::{Error, Result};
use crate::linalg;
use crate::space::{CommitteeSpace, Polynomial};
use crate::C64;

/// A degree truncation: the coordinate basis of a space at degree <= N plus
/// the Gram weights, shared by every operator built on it.
#[derive(Clone, Debug)]
pub struct Truncation {
    space: CommitteeSpace,
    basis: Arc<Basis>,
    weights: Arc<Vec<f64>>,
}

impl Truncation {
    pub fn new(space: &CommitteeSpace, n: usize) -> Result<Truncation> {
        let basis = space.basis(n)?;
        let weights = space.norms_on(&basis)?;
        Ok(Truncation {
            space: space.clone(),
            basis: Arc::new(basis),
            weights: Arc::new(weights),
        })
    }

    pub fn space(&self) -> &CommitteeSpace {
        &self.space
    }

    pub fn basis(&self) -> &Basis {
        &self.basis
    }

    pub fn degree(&self) -> usize {
        self.basis.max_degree()
    }

    pub fn dim(&self) -> usize {
        self.basis.len()
    }

    pub fn identity(&self) -> TruncatedOperator {
        TruncatedOperator {
            truncation: self.clone(),
            entries: DMatrix::identity(self.dim(), self.dim()),
        }
    }

    /// Squared norm of the compressed row multiplier over this truncation.
    pub fn row_norm_sq(&self, fs: &[Polynomial]) -> Result<f64> {
        self.norm_sq_of_sum(fs, true)
    }

    /// Squared norm of the compressed column multiplier.
    pub fn col_norm_sq(&self, fs: &[Polynomial]) -> Result<f64> {
        self.norm_sq_of_sum(fs, false)
    }

    fn norm_sq_of_sum(&self, fs: &[Polynomial], row: bool) -> Result<f64> {
        if fs.is_empty() {
            return Ok(0.0);
        }
        let dim = self.dim();
        let mut acc = DMatrix::<C64>::zeros(dim, dim);
        for f in fs {
            let t = self.mult(f)?;
            let adj = t.gram_adjoint();
            if row {
                acc += t.entries() * adj.entries();
            } else {
                acc += adj.entries() * t.entries();
            }
        }
        TruncatedOperator { truncation: self.clone(), entries: acc }.op_norm()
    }

    /// The compression P_N M_f P_N of multiplication by `f`: the column at
    /// basis monomial beta holds the coefficients of the degree-capped
    /// product f * z^beta.
    pub fn mult(&self, f: &Polynomial) -> Result<TruncatedOperator> {
        if f.space() != &self.space {
            return Err(Error::InvalidArgument("polynomial belongs to a different space".into()));
        }
        if !f.is_zero() && f.degree() > self.degree() {
            return Err(Error::InvalidArgument(format!(
                "deg f = {} exceeds truncation {}",
                f.degree(),
                self.degree()
            )));
        }
        let dim = self.dim();
        let mut entries = DMatrix::<C64>::zeros(dim, dim);
        for (bi, beta) in self.basis.monomials().iter().enumerate() {
            for (gamma, &c) in f.coeffs() {
                let target = gamma.combine(beta)?;
                if target.degree() <= self.degree() {
                    entries[(self.basis.index_of(&target)?, bi)] += c;
                }
            }
        }
        Ok(TruncatedOperator { truncation: self.clone(), entries })
    }
}

/// A square matrix acting on the coefficient coordinates of the degree-<= N
/// space, carrying the weighted metric.
#[derive(Clone, Debug)]
pub struct TruncatedOperator {
    truncation: Truncation,
    entries: DMatrix<C64>,
}

impl TruncatedOperator {
    /// Convenience constructor; builds the truncation on the fly.
    pub fn mult_op(f: &Polynomial, n: usize) -> Result<TruncatedOperator> {
        Truncation::new(f.space(), n)?.mult(f)
    }

    pub fn truncation(&self) -> &Truncation {
        &self.truncation
    }

    pub fn entries(&self) -> &DMatrix<C64> {
        &self.entries
    }

    pub fn dim(&self) -> usize {
        self.entries.nrows()
    }

    fn compatible(&self, other: &TruncatedOperator) -> Result<()> {
        if self.truncation.space != other.truncation.space
            || self.truncation.degree() != other.truncation.degree()
        {
            return Err(Error::InvalidArgument(
                "operators live on different truncations".into(),
            ));
        }
        Ok(())
    }

    /// Adjoint in the weighted inner product: W^-1 T^H W, so that
    /// <T p, q> = <p, adjoint(T) q> exactly at the linear-algebra level.
    pub fn gram_adjoint(&self) -> TruncatedOperator {
        let w = &*self.truncation.weights;
        let dim = self.dim();
        let mut entries = DMatrix::<C64>::zeros(dim, dim);
        for i in 0..dim {
            for j in 0..dim {
                entries[(i, j)] = self.entries[(j, i)].conj() * (w[j] / w[i]);
            }
        }
        TruncatedOperator { truncation: self.truncation.clone(), entries }
    }

    /// Operator norm with respect to the weighted inner product: the largest
    /// singular value of W^(1/2) T W^(-1/2). Dense SVD up to dimension 3000,
    /// power iteration beyond.
    pub fn op_norm(&self) -> Result<f64> {
        linalg::spectral_norm(&self.conjugated_matrix())
    }

    /// W^(1/2) T W^(-1/2): the same operator expressed on an orthonormal
    /// coordinate system.
    pub fn conjugated_matrix(&self) -> DMatrix<C64> {
        let w = &*self.truncation.weights;
        let dim = self.dim();
        DMatrix::from_fn(dim, dim, |i, j| {
            self.entries[(i, j)] * (w[i].sqrt() / w[j].sqrt())
        })
    }

    pub fn compose(&self, other: &TruncatedOperator) -> Result<TruncatedOperator> {
        self.compatible(other)?;
        Ok(TruncatedOperator {
            truncation: self.truncation.clone(),
            entries: &self.entries * &other.entries,
        })
    }

    pub fn add(&self, other: &TruncatedOperator) -> Result<TruncatedOperator> {
        self.compatible(other)?;
        Ok(TruncatedOperator {
            truncation: self.truncation.clone(),
            entries: &self.entries + &other.entries,
        })
    }

    /// Weighted norm of the image of the basis monomial at `column`:
    /// ||T z^alpha|| in the space metric.
    pub fn column_image_norm(&self, column: usize) -> f64 {
        let w = &*self.truncation.weights;
        let mut acc = 0.0;
        for (i, wi) in w.iter().enumerate() {
            acc += self.entries[(i, column)].norm_sqr() * wi;
        }
        acc.sqrt()
    }
}

/// Squared norm of the row multiplier [M_{f_1} ... M_{f_m}] compressed to
/// degree <= n: the weighted operator norm of sum_i T_i T_i^dagger.
pub fn row_norm_sq(fs: &[Polynomial], n: usize) -> Result<f64> {
    let Some(first) = fs.first() else {
        return Ok(0.0);
    };
    Truncation::new(first.space(), n)?.row_norm_sq(fs)
}

/// Squared norm of the column multiplier, with the factor order reversed:
/// sum_i T_i^dagger T_i.
pub fn col_norm_sq(fs: &[Polynomial], n: usize) -> Result<f64> {
    let Some(first) = fs.first() else {
        return Ok(0.0);
    };
    Truncation::new(first.space(), n)?.col_norm_sq(fs)
}
