//! Seeded fixtures shared by the kernel benchmarks.

use phycrypt::numerics::Matrix;
use phycrypt::{LatticeBasis, SeededRng};

/// `rows × cols` matrix of standard normal entries.
pub fn gaussian_matrix(rows: usize, cols: usize, seed: u64) -> Matrix {
    let mut rng = SeededRng::new(seed, 0);
    Matrix::from_fn(rows, cols, |_, _| rng.standard_normal())
}

/// Full-rank integer basis with entries in `[-bound, bound]`.
pub fn integer_basis(n: usize, bound: u64, seed: u64) -> LatticeBasis {
    let mut rng = SeededRng::new(seed, 0);
    loop {
        let cols: Vec<Vec<f64>> = (0..n)
            .map(|_| (0..n).map(|_| rng.uniform_int(0, 2 * bound + 1) as f64 - bound as f64).collect())
            .collect();
        if let Ok(b) = LatticeBasis::from_columns(&cols) {
            if b.abs_determinant() > 0.5 {
                return b;
            }
        }
    }
}

pub fn random_bits(len: usize, seed: u64) -> Vec<bool> {
    let mut rng = SeededRng::new(seed, 0);
    (0..len).map(|_| rng.bit()).collect()
}
