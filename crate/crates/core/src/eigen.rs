//! Numerical eigendecomposition of a level-shift matrix, independent of the
//! closed forms in [`crate::resonance`].
//!
//! The matrix is split into the connected components of its nonzero pattern,
//! each component is reduced by a complex Schur factorization, and
//! eigenvectors follow by back substitution. Left vectors are the conjugated
//! rows of `V⁻¹`, which makes the pair biorthonormal by construction.

use nalgebra::DMatrix;
use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::model::SystemVector;
use crate::resonance::{overlapping_energies, LevelShiftMatrix, Matrix4, ResonanceSet};

/// Relative size below which two eigenvalues of one block count as equal.
const EIGEN_COINCIDENCE: f64 = 1e-8;
/// Assignment costs within this of the optimum count as ties.
const TIE_TOL: f64 = 1e-9;

struct Eigenpair {
    block: usize,
    value: Complex64,
    right: SystemVector,
    left: SystemVector,
}

fn components(m: &Matrix4) -> Vec<Vec<usize>> {
    let mut label = [usize::MAX; 4];
    let mut blocks = Vec::new();
    for start in 0..4 {
        if label[start] != usize::MAX {
            continue;
        }
        let id = blocks.len();
        let mut members = vec![start];
        label[start] = id;
        let mut k = 0;
        while k < members.len() {
            let a = members[k];
            for b in 0..4 {
                if label[b] == usize::MAX && (m[a][b] != Complex64::default() || m[b][a] != Complex64::default()) {
                    label[b] = id;
                    members.push(b);
                }
            }
            k += 1;
        }
        members.sort_unstable();
        blocks.push(members);
    }
    blocks
}

fn block_eigenpairs(m: &Matrix4, idx: &[usize], block: usize) -> Result<Vec<Eigenpair>> {
    let n = idx.len();
    let sub = DMatrix::from_fn(n, n, |i, j| m[idx[i]][idx[j]]);
    let scale = sub.iter().map(|z| z.norm()).fold(0.0f64, f64::max).max(f64::MIN_POSITIVE);
    let schur = sub
        .clone()
        .try_schur(f64::EPSILON, 10_000)
        .ok_or_else(|| Error::numeric("Schur factorization did not converge", f64::NAN))?;
    let (q, t) = schur.unpack();
    // Upper-triangular back substitution, column k solves (T − t_kk)x = 0.
    let mut x = DMatrix::<Complex64>::zeros(n, n);
    for k in 0..n {
        x[(k, k)] = Complex64::new(1.0, 0.0);
        for i in (0..k).rev() {
            let mut acc = Complex64::default();
            for j in i + 1..=k {
                acc += t[(i, j)] * x[(j, k)];
            }
            let d = t[(i, i)] - t[(k, k)];
            if d.norm() <= EIGEN_COINCIDENCE * scale {
                if acc.norm() <= EIGEN_COINCIDENCE * scale {
                    x[(i, k)] = Complex64::default();
                } else {
                    return Err(Error::Degenerate(format!(
                        "eigenvalue {} is defective (|Δε| = {:.3e})",
                        t[(k, k)],
                        d.norm()
                    )));
                }
            } else {
                x[(i, k)] = -acc / d;
            }
        }
    }
    let v = &q * &x;
    let vinv = v.clone().try_inverse().ok_or_else(|| Error::Degenerate("eigenvector matrix is singular".into()))?;
    let mut out = Vec::with_capacity(n);
    for k in 0..n {
        let mut right = SystemVector::ZERO;
        let mut left = SystemVector::ZERO;
        for (i, &g) in idx.iter().enumerate() {
            right[g] = v[(i, k)];
            left[g] = vinv[(k, i)].conj();
        }
        out.push(Eigenpair { block, value: t[(k, k)], right, left });
    }
    Ok(out)
}

fn permutations() -> Vec<[usize; 4]> {
    let mut out = Vec::with_capacity(24);
    for a in 0..4 {
        for b in 0..4 {
            for c in 0..4 {
                for d in 0..4 {
                    let p = [a, b, c, d];
                    let mut seen = [false; 4];
                    if p.iter().all(|&i| !std::mem::replace(&mut seen[i], true)) {
                        out.push(p);
                    }
                }
            }
        }
    }
    out
}

/// Eigenvalues and biorthonormal eigenvectors of `m.m`, labelled by matching
/// against the closed-form energies.
///
/// Candidates are ordered by `(block, Re ε, Im ε)`; the assignment minimising
/// the summed distance wins and ties go to the lexicographically first one.
pub fn numeric_eigendecomposition(m: &LevelShiftMatrix) -> Result<ResonanceSet> {
    let mut pairs = Vec::with_capacity(4);
    for (b, idx) in components(&m.m).iter().enumerate() {
        pairs.extend(block_eigenpairs(&m.m, idx, b)?);
    }
    pairs.sort_by(|p, q| {
        p.block
            .cmp(&q.block)
            .then(p.value.re.total_cmp(&q.value.re))
            .then(p.value.im.total_cmp(&q.value.im))
    });
    let reference = overlapping_energies(m.sigma, m.delta);
    let costs: Vec<([usize; 4], f64)> = permutations()
        .into_iter()
        .map(|p| (p, (0..4).map(|r| (pairs[p[r]].value - reference[r]).norm()).sum()))
        .collect();
    let best = costs.iter().map(|c| c.1).fold(f64::INFINITY, f64::min);
    let scale = 1.0 + m.sigma.abs() + m.delta.abs();
    let (perm, _) = costs.iter().find(|c| c.1 <= best + TIE_TOL * scale).expect("24 permutations");
    let pick = |r: usize| &pairs[perm[r]];
    Ok(ResonanceSet {
        energies: [0, 1, 2, 3].map(|r| pick(r).value),
        right: [0, 1, 2, 3].map(|r| pick(r).right),
        left: [0, 1, 2, 3].map(|r| pick(r).left),
        regime: m.regime,
        segment_index: 0,
    })
}

/// Largest entrywise difference between the rank-one projectors of two sets.
pub fn projector_distance(a: &ResonanceSet, b: &ResonanceSet) -> f64 {
    let mut worst = 0.0f64;
    for r in 0..4 {
        let (p, q) = (a.projector(r), b.projector(r));
        for i in 0..4 {
            for j in 0..4 {
                worst = worst.max((p[i][j] - q[i][j]).norm());
            }
        }
    }
    worst
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::resonance::{level_shift_overlapping, resonances_overlapping};

    #[test]
    fn blocks_of_the_level_shift_matrix() {
        let l = level_shift_overlapping(1.0, 0.3);
        assert_eq!(components(&l.m), vec![vec![0, 3], vec![1, 2]]);
        let free = level_shift_overlapping(0.0, 0.3);
        assert_eq!(components(&free.m).len(), 4);
    }

    #[test]
    fn separated_eigenvalues() {
        let set = numeric_eigendecomposition(&level_shift_overlapping(1.0, 2.0)).unwrap();
        let s3 = 3f64.sqrt();
        let expected = [Complex64::default(), Complex64::new(0.0, 2.0), Complex64::new(s3, 1.0), Complex64::new(-s3, 1.0)];
        for r in 0..4 {
            assert!((set.energies[r] - expected[r]).norm() < 1e-12, "{r}: {}", set.energies[r]);
        }
        assert!(set.biorthonormality_residual() < 1e-12);
    }

    #[test]
    fn projectors_match_closed_form_inside_band() {
        let closed = resonances_overlapping(1.0, 0.5).unwrap();
        let numeric = numeric_eigendecomposition(&level_shift_overlapping(1.0, 0.5)).unwrap();
        assert!(projector_distance(&closed, &numeric) < 1e-10);
    }

    #[test]
    fn crossing_instant_has_cross_block_ties() {
        let closed = resonances_overlapping(2.0, 0.0).unwrap();
        let numeric = numeric_eigendecomposition(&level_shift_overlapping(2.0, 0.0)).unwrap();
        assert!(projector_distance(&closed, &numeric) < 1e-10);
    }

    #[test]
    fn free_spectrum_is_real() {
        let set = numeric_eigendecomposition(&level_shift_overlapping(0.0, 0.4)).unwrap();
        let mut re: Vec<f64> = set.energies.iter().map(|e| e.re).collect();
        re.sort_by(f64::total_cmp);
        assert_eq!(re, vec![-0.4, 0.0, 0.0, 0.4]);
        assert!(set.energies.iter().all(|e| e.im == 0.0));
    }

    #[test]
    fn defective_matrix_is_degenerate() {
        let l = level_shift_overlapping(1.0, 1.0);
        assert!(matches!(numeric_eigendecomposition(&l), Err(Error::Degenerate(_))));
    }

    #[test]
    fn permutation_count() {
        let p = permutations();
        assert_eq!(p.len(), 24);
        assert_eq!(p[0], [0, 1, 2, 3]);
    }
}
