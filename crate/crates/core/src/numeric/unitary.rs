use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use rand::Rng;
use rand_distr::StandardNormal;

use crate::error::{Error, Result};

/// Largest allowed deviation `max |U^H U - I|` for a user-supplied matrix.
pub const UNITARITY_TOLERANCE: f64 = 1e-10;

/// A dense square matrix checked to be unitary at construction.
#[derive(Debug, Clone, PartialEq)]
pub struct Unitary {
    matrix: DMatrix<Complex64>,
}

impl Unitary {
    pub fn new(matrix: DMatrix<Complex64>) -> Result<Self> {
        if !matrix.is_square() {
            return Err(Error::MatrixShape {
                rows: matrix.nrows(),
                cols: matrix.ncols(),
                dim: matrix.nrows(),
            });
        }
        let deviation = unitarity_deviation(&matrix);
        if deviation.is_nan() || deviation >= UNITARITY_TOLERANCE {
            return Err(Error::NotUnitary { deviation });
        }
        Ok(Unitary { matrix })
    }

    pub fn identity(dim: usize) -> Self {
        Unitary {
            matrix: DMatrix::identity(dim, dim),
        }
    }

    /// The permutation sending basis label `k` to `perm[k]`.
    pub fn permutation(perm: &[usize]) -> Result<Self> {
        let dim = perm.len();
        let mut matrix = DMatrix::zeros(dim, dim);
        for (from, &to) in perm.iter().enumerate() {
            if to >= dim {
                return Err(Error::LabelOutOfRange { k: to, dim });
            }
            matrix[(to, from)] = Complex64::new(1.0, 0.0);
        }
        Unitary::new(matrix)
    }

    /// Haar-distributed unitary: QR of a complex Gaussian matrix with the
    /// phases of `R`'s diagonal folded back into `Q`.
    pub fn random<R: Rng + ?Sized>(dim: usize, rng: &mut R) -> Self {
        let ginibre = DMatrix::from_fn(dim, dim, |_, _| {
            Complex64::new(rng.sample(StandardNormal), rng.sample(StandardNormal))
        });
        let (mut q, r) = ginibre.qr().unpack();
        for j in 0..dim {
            let d = r[(j, j)];
            let phase = if d.norm() > 0.0 { d / d.norm() } else { Complex64::new(1.0, 0.0) };
            for i in 0..dim {
                q[(i, j)] *= phase;
            }
        }
        Unitary { matrix: q }
    }

    pub fn dim(&self) -> usize {
        self.matrix.nrows()
    }

    pub fn matrix(&self) -> &DMatrix<Complex64> {
        &self.matrix
    }

    pub fn adjoint(&self) -> Unitary {
        Unitary {
            matrix: self.matrix.adjoint(),
        }
    }

    /// `U v` for a vector of matching length.
    pub fn apply(&self, v: &[Complex64]) -> Vec<Complex64> {
        debug_assert_eq!(v.len(), self.dim());
        (&self.matrix * DVector::from_column_slice(v)).data.into()
    }
}

/// `max |U^H U - I|` over all entries.
pub fn unitarity_deviation(matrix: &DMatrix<Complex64>) -> f64 {
    let product = matrix.adjoint() * matrix;
    let mut worst = 0.0f64;
    for i in 0..product.nrows() {
        for j in 0..product.ncols() {
            let expected = if i == j { 1.0 } else { 0.0 };
            worst = worst.max((product[(i, j)] - expected).norm());
        }
    }
    worst
}
