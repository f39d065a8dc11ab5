use crate::compression::{CompressionError, ProjectorPair};
use crate::linalg::{DenseMatrix, FactorPair, MatrixOperand};

/// The projected data `X̂ = LᵀX` (q×n) and `X̌ = XRᵀ` (d×q), computed once
/// per run together with the projectors that produced them.
#[derive(Debug, Clone)]
pub struct CompressedData<'p> {
    projectors: &'p ProjectorPair,
    left: DenseMatrix,
    right: DenseMatrix,
}

impl<'p> CompressedData<'p> {
    pub fn new<X: MatrixOperand + ?Sized>(
        x: &X,
        projectors: &'p ProjectorPair,
    ) -> Result<Self, CompressionError> {
        Ok(Self {
            projectors,
            left: projectors.compress_left(x)?,
            right: projectors.compress_right(x)?,
        })
    }

    pub fn projectors(&self) -> &'p ProjectorPair {
        self.projectors
    }

    /// `X̂ = LᵀX`.
    pub fn left(&self) -> &DenseMatrix {
        &self.left
    }

    /// `X̌ = XRᵀ`.
    pub fn right(&self) -> &DenseMatrix {
        &self.right
    }
}

/// `Â = LᵀA` and `B̌ = RB`.
#[derive(Debug, Clone, PartialEq)]
pub struct ProjectedFactors {
    pub a_hat: DenseMatrix,
    pub b_check: DenseMatrix,
}

impl ProjectedFactors {
    pub fn compute(
        projectors: &ProjectorPair,
        factors: &FactorPair,
    ) -> Result<Self, CompressionError> {
        Ok(Self {
            a_hat: projectors.compress_factor_a(&factors.a)?,
            b_check: projectors.compress_factor_b(&factors.b)?,
        })
    }

    pub(crate) fn refresh_a(&mut self, projectors: &ProjectorPair, a: &DenseMatrix) {
        self.a_hat = projectors
            .compress_factor_a(a)
            .expect("projector and factor shapes fixed at construction");
    }

    pub(crate) fn refresh_b(&mut self, projectors: &ProjectorPair, b: &DenseMatrix) {
        self.b_check = projectors
            .compress_factor_b(b)
            .expect("projector and factor shapes fixed at construction");
    }
}
