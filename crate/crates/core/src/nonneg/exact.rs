use crate::error::{Error, Result};
use crate::linalg::{c, numerical_rank, numerical_rank_real, svd_split, to_complex, CMat, RMat, C64};

use super::{FactorCertificate, FactorKind, FactorPayload, NonnegMatrix};

/// Default cap on the number of enumerated sign patterns (`2^20`).
pub const DEFAULT_SIGN_BUDGET: u128 = 1 << 20;

/// Symmetry tolerance (relative to `max|M|`) for symmetric inputs.
const SYM_TOL: f64 = 1e-10;

/// `M = A B` with `A` having `rank(M)` columns, from the real SVD.
pub fn minimal_factorization(m: &NonnegMatrix, rel_tol: f64) -> FactorCertificate {
    let split = svd_split(&m.to_complex(), rel_tol);
    FactorCertificate::new(
        FactorKind::Minimal,
        split.rank,
        FactorPayload::Pair {
            a: split.left,
            b: split.right,
        },
        m.data(),
    )
}

/// Complex symmetric factorization `S = A A^T` with `rank(S)` columns.
///
/// Symmetric rank-one deflation: pick `x` with `pi = x^T S x` large, then
/// `S <- S - w w^T / pi` with `w = S x` removes one unit of rank and
/// contributes the column `w / sqrt(pi)`. The pivot is a diagonal entry when
/// one is comparable to the largest off-diagonal entry, otherwise
/// `e_p + c e_q` with `c` in `{1, -1, i, -i}`.
pub fn symmetric_factor(s: &CMat, rel_tol: f64) -> Result<CMat> {
    let n = s.nrows();
    if s.ncols() != n {
        return Err(Error::Shape("symmetric factorization needs a square matrix".into()));
    }
    let scale = s.iter().fold(0.0, |a: f64, z| a.max(z.norm()));
    let defect = (s - s.transpose()).iter().fold(0.0, |a: f64, z| a.max(z.norm()));
    if defect > SYM_TOL * scale {
        return Err(Error::NotSymmetric { defect });
    }
    let r = numerical_rank(s, rel_tol);
    let mut work = (s + s.transpose()) * c(0.5, 0.0);
    let mut a = CMat::zeros(n, r);
    for k in 0..r {
        let (mut p, mut dmax) = (0, -1.0);
        for i in 0..n {
            if work[(i, i)].norm() > dmax {
                dmax = work[(i, i)].norm();
                p = i;
            }
        }
        let (mut op, mut oq, mut omax) = (0, 0, -1.0);
        for i in 0..n {
            for j in i + 1..n {
                if work[(i, j)].norm() > omax {
                    omax = work[(i, j)].norm();
                    op = i;
                    oq = j;
                }
            }
        }
        let mut x = CMat::zeros(n, 1);
        if dmax >= 0.5 * omax {
            x[(p, 0)] = c(1.0, 0.0);
        } else {
            let choices = [c(1.0, 0.0), c(-1.0, 0.0), c(0.0, 1.0), c(0.0, -1.0)];
            let value = |cc: C64| work[(op, op)] + cc * work[(op, oq)] * 2.0 + cc * cc * work[(oq, oq)];
            let best = choices
                .iter()
                .copied()
                .max_by(|&u, &v| value(u).norm().total_cmp(&value(v).norm()))
                .expect("four choices");
            x[(op, 0)] = c(1.0, 0.0);
            x[(oq, 0)] = best;
        }
        let w = &work * &x;
        let pi = (x.transpose() * &w)[(0, 0)];
        if pi.norm() <= f64::EPSILON * scale {
            return Err(Error::Numerical(format!(
                "symmetric elimination broke down at step {k} of {r}"
            )));
        }
        a.set_column(k, &(&w / pi.sqrt()).column(0));
        work -= (&w * w.transpose()) / pi;
    }
    Ok(a)
}

/// `M = A A^T` over the complex numbers with exactly `rank(M)` columns.
pub fn symmetric_factorization(m: &NonnegMatrix, rel_tol: f64) -> Result<FactorCertificate> {
    let sym = m.symmetrized(SYM_TOL)?;
    let a = symmetric_factor(&sym.to_complex(), rel_tol)?;
    Ok(FactorCertificate::new(
        FactorKind::Symmetric,
        a.ncols(),
        FactorPayload::Single { a },
        m.data(),
    ))
}

/// Square root rank with the sign pattern and root achieving it.
#[derive(Debug, Clone, PartialEq)]
pub struct SqrtRank {
    pub rank: usize,
    /// Signs on the nonzero entries in row-major order (the first is always `+1`).
    pub signs: Vec<i8>,
    pub root: RMat,
}

impl SqrtRank {
    pub fn certificate(&self, m: &NonnegMatrix) -> FactorCertificate {
        FactorCertificate::new(
            FactorKind::HadamardRoot,
            self.rank,
            FactorPayload::HadamardRoot {
                signs: self.signs.clone(),
                root: self.root.clone(),
            },
            m.data(),
        )
    }
}

fn signs_from_mask(mask: u64, len: usize) -> Vec<i8> {
    // first entry fixed to +1, the remaining len-1 bits select -1, first free entry most significant
    (0..len)
        .map(|k| {
            if k == 0 {
                1
            } else if (mask >> (len - 1 - k)) & 1 == 1 {
                -1
            } else {
                1
            }
        })
        .collect()
}

fn check_budget(free: usize, budget: u128) -> Result<()> {
    let needed = if free >= 127 { u128::MAX } else { 1u128 << free };
    if needed > budget || free > 63 {
        return Err(Error::BudgetExceeded { needed, cap: budget });
    }
    Ok(())
}

/// `min { rank(N) : N o N = M }` by enumerating signs on the nonzero entries.
/// One sign is fixed since `-N` has the same rank; ties go to the first pattern
/// in lexicographic order (`+1` before `-1`).
pub fn sqrt_rank(m: &NonnegMatrix, sign_budget: u128, rel_tol: f64) -> Result<SqrtRank> {
    let (p, q) = (m.rows(), m.cols());
    let nonzero: Vec<(usize, usize)> = (0..p)
        .flat_map(|i| (0..q).map(move |j| (i, j)))
        .filter(|&(i, j)| m.get(i, j) > 0.0)
        .collect();
    let k = nonzero.len();
    if k == 0 {
        return Ok(SqrtRank {
            rank: 0,
            signs: Vec::new(),
            root: RMat::zeros(p, q),
        });
    }
    check_budget(k - 1, sign_budget)?;
    let base = m.data().map(f64::sqrt);
    let build = |signs: &[i8]| {
        let mut n = base.clone();
        for (&(i, j), &s) in nonzero.iter().zip(signs) {
            n[(i, j)] *= f64::from(s);
        }
        n
    };
    let mut best: Option<(usize, Vec<i8>)> = None;
    for mask in 0..1u64 << (k - 1) {
        let signs = signs_from_mask(mask, k);
        let r = numerical_rank_real(&build(&signs), rel_tol);
        if best.as_ref().is_none_or(|(br, _)| r < *br) {
            best = Some((r, signs));
        }
    }
    let (rank, signs) = best.expect("at least one pattern");
    let root = build(&signs);
    Ok(SqrtRank { rank, signs, root })
}

/// Symmetric Hadamard root of smallest rank found within the sign budget.
/// Falls back to the entrywise nonnegative root when the budget is too small.
fn best_symmetric_root(m: &NonnegMatrix, sign_budget: u128, rel_tol: f64) -> (RMat, usize) {
    let n = m.rows();
    let upper: Vec<(usize, usize)> = (0..n)
        .flat_map(|i| (i..n).map(move |j| (i, j)))
        .filter(|&(i, j)| m.get(i, j) > 0.0)
        .collect();
    let base = m.data().map(f64::sqrt);
    let build = |signs: &[i8]| {
        let mut r = base.clone();
        for (&(i, j), &s) in upper.iter().zip(signs) {
            r[(i, j)] *= f64::from(s);
            if i != j {
                r[(j, i)] *= f64::from(s);
            }
        }
        r
    };
    let k = upper.len();
    if k == 0 || check_budget(k - 1, sign_budget).is_err() {
        let r = numerical_rank_real(&base, rel_tol);
        return (base, r);
    }
    let mut best: Option<(usize, RMat)> = None;
    for mask in 0..1u64 << (k - 1) {
        let root = build(&signs_from_mask(mask, k));
        let r = numerical_rank_real(&root, rel_tol);
        if best.as_ref().is_none_or(|(br, _)| r < *br) {
            best = Some((r, root));
        }
    }
    let (r, root) = best.expect("at least one pattern");
    (root, r)
}

/// Complex cpsdt factorization `M_ij = tr(E_i E_j^T)` of a symmetric
/// nonnegative matrix.
///
/// With a symmetric Hadamard root `N = A A^T` (`A` from [`symmetric_factor`]),
/// `E_i = a_i a_i^dagger` for the rows `a_i` of `A` gives
/// `tr(E_i E_j^T) = |a_i^T a_j|^2 = N_ij^2 = M_ij`. The size is `rank(N)`.
pub fn cpsdt_construct(m: &NonnegMatrix, sign_budget: u128, rel_tol: f64) -> Result<FactorCertificate> {
    let sym = m.symmetrized(SYM_TOL)?;
    let (root, _) = best_symmetric_root(&sym, sign_budget, rel_tol);
    let a = symmetric_factor(&to_complex(&root), rel_tol)?;
    let r = a.ncols();
    let e: Vec<CMat> = (0..a.nrows())
        .map(|i| {
            let col = a.row(i).transpose();
            &col * col.adjoint()
        })
        .collect();
    Ok(FactorCertificate::new(
        FactorKind::Cpsdt,
        r,
        FactorPayload::PsdTuples { f: e.clone(), e },
        m.data(),
    ))
}
