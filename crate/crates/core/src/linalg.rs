//! Dense linear-algebra helpers on top of `nalgebra`.
//!
//! Everything here works on complex matrices. Inputs whose imaginary parts are
//! exactly zero are routed through the real kernels so that real data stays real
//! (the factors of a real matrix come back with zero imaginary parts).

use nalgebra::{DMatrix, DVector, Schur, SymmetricEigen};
use num_complex::Complex64;

use crate::error::{Error, Result};

pub type C64 = Complex64;
pub type CMat = DMatrix<C64>;
pub type RMat = DMatrix<f64>;

/// Default relative threshold for numerical rank decisions.
pub const DEFAULT_REL_TOL: f64 = 1e-10;

pub const ZERO: C64 = C64 { re: 0.0, im: 0.0 };
pub const ONE: C64 = C64 { re: 1.0, im: 0.0 };

pub fn c(re: f64, im: f64) -> C64 {
    C64::new(re, im)
}

pub fn to_complex(m: &RMat) -> CMat {
    m.map(|x| C64::new(x, 0.0))
}

pub fn is_real(m: &CMat) -> bool {
    m.iter().all(|z| z.im == 0.0)
}

pub fn real_part(m: &CMat) -> RMat {
    m.map(|z| z.re)
}

pub fn frobenius(m: &CMat) -> f64 {
    m.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
}

pub fn max_abs(m: &CMat) -> f64 {
    m.iter().map(|z| z.norm()).fold(0.0, f64::max)
}

pub fn max_abs_real(m: &RMat) -> f64 {
    m.iter().map(|x| x.abs()).fold(0.0, f64::max)
}

pub fn kron(a: &CMat, b: &CMat) -> CMat {
    a.kronecker(b)
}

/// Kronecker product of the factors in list order.
pub fn kron_chain(factors: &[CMat]) -> Result<CMat> {
    let (first, rest) = factors
        .split_first()
        .ok_or_else(|| Error::Usage("kron_chain needs at least one factor".into()))?;
    Ok(rest.iter().fold(first.clone(), |acc, f| acc.kronecker(f)))
}

/// Thin SVD with singular values sorted in descending order.
pub struct ThinSvd {
    pub u: CMat,
    pub s: Vec<f64>,
    pub v_t: CMat,
}

pub fn thin_svd(m: &CMat) -> ThinSvd {
    let (p, q) = m.shape();
    let k = p.min(q);
    if k == 0 {
        return ThinSvd {
            u: CMat::zeros(p, 0),
            s: Vec::new(),
            v_t: CMat::zeros(0, q),
        };
    }
    let (u, s, v_t) = if is_real(m) {
        let svd = real_part(m).svd(true, true);
        (
            to_complex(&svd.u.expect("u requested")),
            svd.singular_values.iter().copied().collect::<Vec<_>>(),
            to_complex(&svd.v_t.expect("v_t requested")),
        )
    } else {
        let svd = m.clone().svd(true, true);
        (
            svd.u.expect("u requested"),
            svd.singular_values.iter().copied().collect::<Vec<_>>(),
            svd.v_t.expect("v_t requested"),
        )
    };
    let mut order: Vec<usize> = (0..s.len()).collect();
    order.sort_by(|&a, &b| s[b].total_cmp(&s[a]));
    let u = CMat::from_fn(p, k, |r, c| u[(r, order[c])]);
    let v_t = CMat::from_fn(k, q, |r, c| v_t[(order[r], c)]);
    let s = order.iter().map(|&i| s[i]).collect();
    ThinSvd { u, s, v_t }
}

pub fn singular_values(m: &CMat) -> Vec<f64> {
    if m.nrows() == 0 || m.ncols() == 0 {
        return Vec::new();
    }
    let mut s: Vec<f64> = if is_real(m) {
        real_part(m).singular_values().iter().copied().collect()
    } else {
        m.singular_values().iter().copied().collect()
    };
    s.sort_by(|a, b| b.total_cmp(a));
    s
}

fn rank_from_singular_values(s: &[f64], rel_tol: f64) -> usize {
    match s.first() {
        Some(&top) if top > 0.0 => s.iter().filter(|&&x| x > rel_tol * top).count(),
        _ => 0,
    }
}

/// Number of singular values above `rel_tol * sigma_max`; zero for the zero matrix.
pub fn numerical_rank(m: &CMat, rel_tol: f64) -> usize {
    rank_from_singular_values(&singular_values(m), rel_tol)
}

pub fn numerical_rank_real(m: &RMat, rel_tol: f64) -> usize {
    if m.nrows() == 0 || m.ncols() == 0 {
        return 0;
    }
    let mut s: Vec<f64> = m.singular_values().iter().copied().collect();
    s.sort_by(|a, b| b.total_cmp(a));
    rank_from_singular_values(&s, rel_tol)
}

/// One split step `m ~ left * right` with the singular values absorbed on the left.
#[derive(Debug, Clone)]
pub struct SvdSplit {
    pub left: CMat,
    pub right: CMat,
    pub rank: usize,
}

pub fn svd_split(m: &CMat, rel_tol: f64) -> SvdSplit {
    let svd = thin_svd(m);
    let rank = rank_from_singular_values(&svd.s, rel_tol);
    let (p, q) = m.shape();
    let left = CMat::from_fn(p, rank, |r, c| svd.u[(r, c)] * svd.s[c]);
    let right = svd.v_t.rows(0, rank).into_owned();
    debug_assert_eq!(right.shape(), (rank, q));
    SvdSplit { left, right, rank }
}

/// Spectral decomposition of a Hermitian matrix, eigenvalues in descending order.
pub struct HermitianEigen {
    pub values: Vec<f64>,
    /// Eigenvectors as columns, aligned with `values`.
    pub vectors: CMat,
}

pub fn hermitian_eigen(m: &CMat) -> HermitianEigen {
    let n = m.nrows();
    if n == 0 {
        return HermitianEigen {
            values: Vec::new(),
            vectors: CMat::zeros(0, 0),
        };
    }
    let (values, vectors): (Vec<f64>, CMat) = if is_real(m) {
        let e = SymmetricEigen::new(real_part(m));
        (e.eigenvalues.iter().copied().collect(), to_complex(&e.eigenvectors))
    } else {
        let e = SymmetricEigen::new(m.clone());
        (e.eigenvalues.iter().copied().collect(), e.eigenvectors)
    };
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| values[b].total_cmp(&values[a]));
    HermitianEigen {
        values: order.iter().map(|&i| values[i]).collect(),
        vectors: CMat::from_fn(n, n, |r, c| vectors[(r, order[c])]),
    }
}

/// Smallest eigenvalue of a Hermitian matrix (0 for the empty matrix).
pub fn min_eigenvalue(m: &CMat) -> f64 {
    hermitian_eigen(m).values.last().copied().unwrap_or(0.0)
}

/// Largest absolute eigenvalue of a Hermitian matrix.
pub fn max_abs_eigenvalue(m: &CMat) -> f64 {
    hermitian_eigen(m)
        .values
        .iter()
        .map(|v| v.abs())
        .fold(0.0, f64::max)
}

/// `true` when the Hermitian matrix has min eigenvalue >= -rel_tol * (largest |eigenvalue|).
pub fn is_psd(m: &CMat, rel_tol: f64) -> bool {
    let e = hermitian_eigen(m);
    let scale = e.values.iter().map(|v| v.abs()).fold(0.0, f64::max);
    e.values.last().is_none_or(|&lo| lo >= -rel_tol * scale)
}

/// psd square root, clipping eigenvalues in `[-psd_tol * lambda_max, 0)` to zero.
pub fn psd_sqrt(m: &CMat, psd_tol: f64) -> Result<CMat> {
    let e = hermitian_eigen(m);
    let top = e.values.first().copied().unwrap_or(0.0).max(0.0);
    if let Some(&lo) = e.values.last() {
        if lo < -psd_tol * top {
            return Err(Error::Domain(format!(
                "matrix is not psd: eigenvalue {lo:.3e} below tolerance"
            )));
        }
    }
    let n = m.nrows();
    let mut out = CMat::zeros(n, n);
    for (k, &lam) in e.values.iter().enumerate() {
        if lam <= 0.0 {
            continue;
        }
        let v = e.vectors.column(k);
        out += (v * v.adjoint()) * C64::new(lam.sqrt(), 0.0);
    }
    Ok(out)
}

/// Eigenvalues of a general square matrix.
pub fn eigenvalues(m: &CMat) -> Result<Vec<C64>> {
    let n = m.nrows();
    if n == 0 {
        return Ok(Vec::new());
    }
    if is_real(m) {
        let schur = Schur::try_new(real_part(m), f64::EPSILON, 10_000 * n)
            .ok_or_else(|| Error::Numerical("Schur iteration did not converge".into()))?;
        return Ok(schur.complex_eigenvalues().iter().copied().collect());
    }
    let schur = Schur::try_new(m.clone(), f64::EPSILON, 10_000 * n)
        .ok_or_else(|| Error::Numerical("Schur iteration did not converge".into()))?;
    let (_, t) = schur.unpack();
    Ok((0..n).map(|i| t[(i, i)]).collect())
}

pub fn column_vector(values: &[C64]) -> CMat {
    CMat::from_column_slice(values.len(), 1, values)
}

pub fn diag(values: &[C64]) -> CMat {
    CMat::from_diagonal(&DVector::from_column_slice(values))
}

pub fn hermitian_defect(m: &CMat) -> f64 {
    frobenius(&(m - m.adjoint()))
}
