//! Small dense linear-algebra helpers for the statistics: Hermitian
//! eigenvalues via the real symmetric embedding, and the largest
//! singular value via power iteration on `M^dagger M`.

use nalgebra::DMatrix;
use num_complex::Complex64;

/// Eigenvalues of a Hermitian matrix given row-major as `dim x dim`
/// complex entries. Embeds `H = A + iB` into the real symmetric
/// `[[A, -B], [B, A]]`, whose spectrum is that of `H` doubled.
pub fn hermitian_eigenvalues(h: &[Complex64], dim: usize) -> Vec<f64> {
    assert_eq!(h.len(), dim * dim);
    let mut m = DMatrix::<f64>::zeros(2 * dim, 2 * dim);
    for r in 0..dim {
        for c in 0..dim {
            let z = h[r * dim + c];
            m[(r, c)] = z.re;
            m[(r, c + dim)] = -z.im;
            m[(r + dim, c)] = z.im;
            m[(r + dim, c + dim)] = z.re;
        }
    }
    let mut eig: Vec<f64> = m.symmetric_eigenvalues().iter().copied().collect();
    eig.sort_by(|a, b| a.partial_cmp(b).unwrap());
    // Each eigenvalue of H appears twice in the embedding.
    eig.chunks_exact(2).map(|pair| 0.5 * (pair[0] + pair[1])).collect()
}

/// Largest singular value of a complex matrix (row-major `dim x dim`)
/// via the SVD of the real embedding `[[Re, -Im], [Im, Re]]`, whose
/// singular values are those of the complex matrix, doubled.
pub fn operator_norm(m: &[Complex64], dim: usize) -> f64 {
    assert_eq!(m.len(), dim * dim);
    let mut embed = DMatrix::<f64>::zeros(2 * dim, 2 * dim);
    for r in 0..dim {
        for c in 0..dim {
            let z = m[r * dim + c];
            embed[(r, c)] = z.re;
            embed[(r, c + dim)] = -z.im;
            embed[(r + dim, c)] = z.im;
            embed[(r + dim, c + dim)] = z.re;
        }
    }
    embed.singular_values().max()
}
