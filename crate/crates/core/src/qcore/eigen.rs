//! Cyclic Jacobi eigendecomposition for complex Hermitian matrices.
//!
//! Self-contained and deterministic: fixed sweep order, a fixed off-diagonal
//! stopping threshold relative to the input norm, and a phase convention that
//! makes the first significant component of every eigenvector real positive.
//! Accuracy is ample for the dimensions this crate targets (a few dozen).

use num_complex::Complex64;

use super::projector::Projector;
use super::{CMatrix, QcoreError};

/// Default eigenvalue clustering tolerance, relative to the spectral radius.
pub const DEFAULT_CLUSTER_TOL: f64 = 1e-8;

/// Sweep cap; non-convergence within this many sweeps signals ill-conditioned
/// input rather than a tolerance problem.
const MAX_SWEEPS: usize = 100;

/// Convergence threshold on the off-diagonal Frobenius norm, relative to the
/// Frobenius norm of the input.
const OFF_DIAG_REL_THRESHOLD: f64 = 1e-14;

/// Eigenvalues, eigenvectors and the grouping of (near-)degenerate
/// eigenvalues of a Hermitian matrix.
#[derive(Clone, Debug)]
pub struct SpectralDecomposition {
    eigenvalues: Vec<f64>,
    eigenvectors: CMatrix,
    clusters: Vec<Vec<usize>>,
}

impl SpectralDecomposition {
    /// Eigenvalues in ascending order.
    pub fn eigenvalues(&self) -> &[f64] {
        &self.eigenvalues
    }

    /// Unitary matrix whose k-th column is the eigenvector of the k-th
    /// eigenvalue.
    pub fn eigenvectors(&self) -> &CMatrix {
        &self.eigenvectors
    }

    /// Index groups of eigenvalues that agree within the clustering
    /// tolerance. Groups are contiguous in the sorted order.
    pub fn clusters(&self) -> &[Vec<usize>] {
        &self.clusters
    }

    pub fn dim(&self) -> usize {
        self.eigenvalues.len()
    }

    pub fn eigenvector(&self, k: usize) -> Vec<Complex64> {
        self.eigenvectors.column(k)
    }

    /// Mean eigenvalue of a cluster; the representative outcome value of the
    /// eigenspace.
    pub fn cluster_value(&self, cluster: usize) -> f64 {
        let ids = &self.clusters[cluster];
        ids.iter().map(|&k| self.eigenvalues[k]).sum::<f64>() / ids.len() as f64
    }

    /// Projector onto the eigenspace spanned by one cluster.
    pub fn cluster_projector(&self, cluster: usize) -> Projector {
        let columns: Vec<Vec<Complex64>> = self.clusters[cluster]
            .iter()
            .map(|&k| self.eigenvector(k))
            .collect();
        Projector::from_orthonormal_columns(self.dim(), &columns)
    }

    /// One projector per cluster; together they resolve the identity.
    pub fn projectors(&self) -> Vec<Projector> {
        (0..self.clusters.len())
            .map(|c| self.cluster_projector(c))
            .collect()
    }

    /// `V diag(eigenvalues) V†` — should reproduce the input.
    pub fn reconstruct(&self) -> CMatrix {
        let dim = self.dim();
        let v = &self.eigenvectors;
        CMatrix::from_fn(dim, |i, j| {
            (0..dim)
                .map(|k| v.at(i, k) * self.eigenvalues[k] * v.at(j, k).conj())
                .sum()
        })
    }
}

/// Diagonalizes a Hermitian matrix.
///
/// The input is symmetrized as `(H + H†)/2` before iterating, so mild
/// non-Hermiticity from roundoff is tolerated silently; validating hermiticity
/// of externally supplied observables happens in [`super::Observable::new`].
///
/// `cluster_tol` groups eigenvalues that agree within
/// `cluster_tol * max(spectral radius, 1)` into degenerate eigenspaces.
pub fn hermitian_eigen(h: &CMatrix, cluster_tol: f64) -> Result<SpectralDecomposition, QcoreError> {
    if !h.is_finite() {
        return Err(QcoreError::NonFiniteEntries);
    }
    let dim = h.dim();
    if dim == 0 {
        return Err(QcoreError::Empty);
    }

    let mut a = h.hermitized();
    let mut v = CMatrix::identity(dim);
    let norm = a.frobenius_norm();
    let threshold = OFF_DIAG_REL_THRESHOLD * norm;

    let mut converged = norm == 0.0 || dim == 1;
    let mut sweeps = 0;
    while !converged && sweeps < MAX_SWEEPS {
        for p in 0..dim {
            for q in (p + 1)..dim {
                rotate(&mut a, &mut v, p, q);
            }
        }
        sweeps += 1;
        converged = off_diagonal_norm(&a) <= threshold;
    }
    if !converged {
        return Err(QcoreError::NoConvergence {
            sweeps,
            off_norm: off_diagonal_norm(&a),
        });
    }

    // Sort ascending; the permutation is stable, so ties keep sweep order and
    // the output stays deterministic.
    let mut order: Vec<usize> = (0..dim).collect();
    order.sort_by(|&i, &j| {
        a.at(i, i)
            .re
            .partial_cmp(&a.at(j, j).re)
            .expect("eigenvalues are finite")
    });
    let eigenvalues: Vec<f64> = order.iter().map(|&k| a.at(k, k).re).collect();
    let mut eigenvectors = CMatrix::from_fn(dim, |i, j| v.at(i, order[j]));
    fix_phases(&mut eigenvectors);

    let clusters = cluster_eigenvalues(&eigenvalues, cluster_tol);
    Ok(SpectralDecomposition {
        eigenvalues,
        eigenvectors,
        clusters,
    })
}

/// One complex Jacobi rotation annihilating the (p, q) entry.
fn rotate(a: &mut CMatrix, v: &mut CMatrix, p: usize, q: usize) {
    let apq = a.at(p, q);
    let r = apq.norm();
    if r == 0.0 {
        return;
    }
    let phase = apq / r; // e^{i arg(a_pq)}
    let app = a.at(p, p).re;
    let aqq = a.at(q, q).re;
    let tau = (aqq - app) / (2.0 * r);
    // Smaller-magnitude root of  r t^2 - (aqq - app) t - r = 0.
    let sign = if tau < 0.0 { -1.0 } else { 1.0 };
    let t = -sign / (tau.abs() + (1.0 + tau * tau).sqrt());
    let c = 1.0 / (1.0 + t * t).sqrt();
    let s = c * t;

    let dim = a.dim();
    // Right-multiply by V: columns p, q mix.
    for k in 0..dim {
        let akp = a.at(k, p);
        let akq = a.at(k, q);
        a.set(k, p, akp * c + akq * s * phase.conj());
        a.set(k, q, akq * c - akp * s * phase);
    }
    // Left-multiply by V†: rows p, q mix.
    for k in 0..dim {
        let apk = a.at(p, k);
        let aqk = a.at(q, k);
        a.set(p, k, apk * c + aqk * s * phase);
        a.set(q, k, aqk * c - apk * s * phase.conj());
    }
    // Pin the algebraically exact entries.
    a.set(p, q, Complex64::ZERO);
    a.set(q, p, Complex64::ZERO);
    let app_new = c * c * app + 2.0 * r * s * c + s * s * aqq;
    let aqq_new = s * s * app - 2.0 * r * s * c + c * c * aqq;
    a.set(p, p, Complex64::new(app_new, 0.0));
    a.set(q, q, Complex64::new(aqq_new, 0.0));

    // Accumulate eigenvectors.
    for k in 0..dim {
        let vkp = v.at(k, p);
        let vkq = v.at(k, q);
        v.set(k, p, vkp * c + vkq * s * phase.conj());
        v.set(k, q, vkq * c - vkp * s * phase);
    }
}

fn off_diagonal_norm(a: &CMatrix) -> f64 {
    let dim = a.dim();
    let mut sum = 0.0;
    for i in 0..dim {
        for j in 0..dim {
            if i != j {
                sum += a.at(i, j).norm_sqr();
            }
        }
    }
    sum.sqrt()
}

/// Multiplies each column by a unit phase so its first component of
/// significant magnitude becomes real positive.
fn fix_phases(v: &mut CMatrix) {
    let dim = v.dim();
    for j in 0..dim {
        let col = v.column(j);
        let max_abs = col.iter().map(|z| z.norm()).fold(0.0, f64::max);
        if max_abs == 0.0 {
            continue;
        }
        let lead = col
            .iter()
            .find(|z| z.norm() > 1e-8 * max_abs)
            .copied()
            .unwrap_or(Complex64::ONE);
        let phase = lead / lead.norm();
        for i in 0..dim {
            let z = v.at(i, j);
            v.set(i, j, z * phase.conj());
        }
    }
}

fn cluster_eigenvalues(eigenvalues: &[f64], cluster_tol: f64) -> Vec<Vec<usize>> {
    let radius = eigenvalues.iter().map(|x| x.abs()).fold(0.0_f64, f64::max);
    let gap = cluster_tol * radius.max(1.0);
    let mut clusters: Vec<Vec<usize>> = Vec::new();
    for k in 0..eigenvalues.len() {
        match clusters.last_mut() {
            Some(current) if eigenvalues[k] - eigenvalues[*current.last().unwrap()] <= gap => {
                current.push(k);
            }
            _ => clusters.push(vec![k]),
        }
    }
    clusters
}
