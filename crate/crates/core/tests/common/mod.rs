//! Shared oracle helpers for the integration tests.

// Plane rotations touch paired rows and columns; index loops keep the
// symmetry of the updates visible.
#![allow(clippy::needless_range_loop)]

use ka_solve::numerics::DenseMatrix;

/// Eigenvalues of a symmetric matrix by cyclic Jacobi rotations,
/// ascending. Deliberately independent of the library's linear algebra
/// paths so it can judge them.
pub fn symmetric_eigenvalues(matrix: &DenseMatrix) -> Vec<f64> {
    let n = matrix.rows();
    assert_eq!(n, matrix.cols(), "eigenvalues need a square matrix");
    let mut a = vec![vec![0.0; n]; n];
    let mut scale = 0.0f64;
    for i in 0..n {
        for j in 0..n {
            let gap = (matrix[(i, j)] - matrix[(j, i)]).abs();
            assert!(
                gap <= 1e-12 * (1.0 + matrix[(i, j)].abs()),
                "matrix is not symmetric at ({i}, {j}): gap {gap}"
            );
            a[i][j] = matrix[(i, j)];
            scale += a[i][j] * a[i][j];
        }
    }
    let scale = scale.sqrt().max(1e-300);

    for _sweep in 0..60 {
        let mut off = 0.0;
        for i in 0..n {
            for j in (i + 1)..n {
                off += a[i][j] * a[i][j];
            }
        }
        if off.sqrt() <= 1e-15 * scale {
            break;
        }
        for p in 0..n {
            for q in (p + 1)..n {
                let apq = a[p][q];
                if apq == 0.0 {
                    continue;
                }
                let theta = (a[q][q] - a[p][p]) / (2.0 * apq);
                let t = theta.signum() / (theta.abs() + (theta * theta + 1.0).sqrt());
                let c = 1.0 / (t * t + 1.0).sqrt();
                let s = t * c;
                for k in 0..n {
                    if k == p || k == q {
                        continue;
                    }
                    let akp = a[k][p];
                    let akq = a[k][q];
                    a[k][p] = c * akp - s * akq;
                    a[p][k] = a[k][p];
                    a[k][q] = s * akp + c * akq;
                    a[q][k] = a[k][q];
                }
                let app = a[p][p];
                let aqq = a[q][q];
                a[p][p] = c * c * app - 2.0 * s * c * apq + s * s * aqq;
                a[q][q] = s * s * app + 2.0 * s * c * apq + c * c * aqq;
                a[p][q] = 0.0;
                a[q][p] = 0.0;
            }
        }
    }

    let mut off = 0.0;
    for i in 0..n {
        for j in (i + 1)..n {
            off += a[i][j] * a[i][j];
        }
    }
    assert!(
        off.sqrt() <= 1e-12 * scale,
        "Jacobi sweeps failed to converge: off-diagonal norm {}",
        off.sqrt()
    );

    let mut eigs: Vec<f64> = (0..n).map(|i| a[i][i]).collect();
    eigs.sort_by(|x, y| x.partial_cmp(y).expect("finite eigenvalues"));
    eigs
}

/// Sanity-checks the Jacobi oracle against hand-computed spectra before
/// it is trusted to judge anything else.
pub fn verify_jacobi_oracle() {
    let m = DenseMatrix::new(2, 2, vec![2.0, 1.0, 1.0, 2.0]).unwrap();
    let eigs = symmetric_eigenvalues(&m);
    assert!(
        (eigs[0] - 1.0).abs() <= 1e-13 && (eigs[1] - 3.0).abs() <= 1e-13,
        "2x2 spectrum should be (1, 3), got {eigs:?}"
    );

    // second-difference matrix: spectrum 2 - sqrt(2), 2, 2 + sqrt(2)
    let m = DenseMatrix::new(3, 3, vec![2.0, -1.0, 0.0, -1.0, 2.0, -1.0, 0.0, -1.0, 2.0]).unwrap();
    let eigs = symmetric_eigenvalues(&m);
    let expected = [2.0 - 2.0f64.sqrt(), 2.0, 2.0 + 2.0f64.sqrt()];
    for (i, want) in expected.iter().enumerate() {
        assert!(
            (eigs[i] - want).abs() <= 1e-13,
            "3x3 spectrum mismatch at {i}: {} vs {want}",
            eigs[i]
        );
    }

    let m = DenseMatrix::new(1, 1, vec![-4.5]).unwrap();
    assert_eq!(symmetric_eigenvalues(&m), vec![-4.5]);
}
