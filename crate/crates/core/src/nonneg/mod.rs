//! Factorizations of nonnegative matrices: exact minimal and symmetric
//! factorizations, square root rank by enumeration, heuristic searches for
//! nonnegative, psd and cp factorizations, and the cpsdt construction.

mod check;
mod exact;
mod search;
mod slack;

pub use check::{check_certificate, CheckReport};
pub use exact::{
    cpsdt_construct, minimal_factorization, sqrt_rank, symmetric_factor, symmetric_factorization,
    SqrtRank, DEFAULT_SIGN_BUDGET,
};
pub use search::{
    cp_factorization_search, nonneg_factorization_search, nonneg_rank_bounds,
    psd_factorization_search, psd_rank_lower_bound, NonnegRankBounds, SearchOutcome, SearchParams,
};
pub use slack::slack_matrix_tgon;

use std::fmt;
use std::str::FromStr;

use crate::error::{Error, Result};
use crate::linalg::{to_complex, CMat, RMat};

/// Entries in `[-CLIP_TOL, 0)` are treated as round-off and set to zero.
pub const CLIP_TOL: f64 = 1e-12;

/// A real matrix with nonnegative entries.
#[derive(Debug, Clone, PartialEq)]
pub struct NonnegMatrix {
    m: RMat,
}

impl NonnegMatrix {
    pub fn new(mut m: RMat) -> Result<Self> {
        let rows = m.nrows().max(1);
        for (k, x) in m.iter_mut().enumerate() {
            let (i, j) = (k % rows, k / rows);
            if !x.is_finite() {
                return Err(Error::Domain(format!("entry ({i},{j}) is not finite")));
            }
            if *x < 0.0 {
                if *x < -CLIP_TOL {
                    return Err(Error::Domain(format!("entry ({i},{j}) is negative: {x:.3e}")));
                }
                *x = 0.0;
            }
        }
        Ok(Self { m })
    }

    pub fn from_rows(rows: &[Vec<f64>]) -> Result<Self> {
        let p = rows.len();
        let q = rows.first().map_or(0, Vec::len);
        if rows.iter().any(|r| r.len() != q) {
            return Err(Error::Shape("rows have different lengths".into()));
        }
        Self::new(RMat::from_fn(p, q, |i, j| rows[i][j]))
    }

    pub fn identity(n: usize) -> Self {
        Self { m: RMat::identity(n, n) }
    }

    pub fn ones(p: usize, q: usize) -> Self {
        Self { m: RMat::from_element(p, q, 1.0) }
    }

    pub fn rows(&self) -> usize {
        self.m.nrows()
    }

    pub fn cols(&self) -> usize {
        self.m.ncols()
    }

    pub fn data(&self) -> &RMat {
        &self.m
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.m[(i, j)]
    }

    pub fn max_abs(&self) -> f64 {
        self.m.iter().fold(0.0, |a, &x| a.max(x.abs()))
    }

    pub fn to_complex(&self) -> CMat {
        to_complex(&self.m)
    }

    pub fn is_square(&self) -> bool {
        self.rows() == self.cols()
    }

    /// `max |M - M^T|`; infinite for non-square matrices.
    pub fn symmetry_defect(&self) -> f64 {
        if !self.is_square() {
            return f64::INFINITY;
        }
        (&self.m - self.m.transpose()).iter().fold(0.0, |a, &x| a.max(x.abs()))
    }

    /// Symmetric within `rel_tol * max|M|`.
    pub fn is_symmetric(&self, rel_tol: f64) -> bool {
        self.symmetry_defect() <= rel_tol * self.max_abs()
    }

    /// Errors unless symmetric within `rel_tol`; returns the symmetrized matrix.
    pub fn symmetrized(&self, rel_tol: f64) -> Result<NonnegMatrix> {
        if !self.is_symmetric(rel_tol) {
            return Err(Error::NotSymmetric {
                defect: self.symmetry_defect(),
            });
        }
        Ok(Self {
            m: (&self.m + self.m.transpose()) * 0.5,
        })
    }
}

/// The kinds of factorization a certificate can hold.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum FactorKind {
    Minimal,
    Nonnegative,
    Psd,
    Symmetric,
    Cp,
    Cpsdt,
    HadamardRoot,
}

impl FactorKind {
    pub const ALL: [FactorKind; 7] = [
        FactorKind::Minimal,
        FactorKind::Nonnegative,
        FactorKind::Psd,
        FactorKind::Symmetric,
        FactorKind::Cp,
        FactorKind::Cpsdt,
        FactorKind::HadamardRoot,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            FactorKind::Minimal => "minimal",
            FactorKind::Nonnegative => "nonneg",
            FactorKind::Psd => "psd",
            FactorKind::Symmetric => "symmetric",
            FactorKind::Cp => "cp",
            FactorKind::Cpsdt => "cpsdt",
            FactorKind::HadamardRoot => "sqrt",
        }
    }
}

impl fmt::Display for FactorKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for FactorKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "minimal" => Ok(FactorKind::Minimal),
            "nonneg" | "nonnegative" => Ok(FactorKind::Nonnegative),
            "psd" => Ok(FactorKind::Psd),
            "symmetric" => Ok(FactorKind::Symmetric),
            "cp" => Ok(FactorKind::Cp),
            "cpsdt" => Ok(FactorKind::Cpsdt),
            "sqrt" | "hadamard-root" => Ok(FactorKind::HadamardRoot),
            other => Err(Error::Usage(format!("unknown factorization kind '{other}'"))),
        }
    }
}

/// Kind-dependent factor data.
#[derive(Debug, Clone, PartialEq)]
pub enum FactorPayload {
    /// `M = A B`.
    Pair { a: CMat, b: CMat },
    /// `M_ij = tr(E_i F_j^T)`.
    PsdTuples { e: Vec<CMat>, f: Vec<CMat> },
    /// `M = A A^T` (no conjugation).
    Single { a: CMat },
    /// `N o N = M` with `signs` on the nonzero entries in row-major order.
    HadamardRoot { signs: Vec<i8>, root: RMat },
}

/// A factorization of a nonnegative matrix together with its size and
/// max-abs reconstruction error.
#[derive(Debug, Clone, PartialEq)]
pub struct FactorCertificate {
    pub kind: FactorKind,
    pub inner_dim: usize,
    pub payload: FactorPayload,
    pub residual: f64,
}

impl FactorCertificate {
    /// Wraps a payload, measuring its max-abs reconstruction error against `m`.
    pub fn new(kind: FactorKind, inner_dim: usize, payload: FactorPayload, m: &RMat) -> Self {
        let residual = max_abs_diff(m, &reconstruct_payload(&payload));
        Self {
            kind,
            inner_dim,
            payload,
            residual,
        }
    }

    /// Reconstructs the matrix the payload encodes (complex in general).
    pub fn reconstruct(&self) -> CMat {
        reconstruct_payload(&self.payload)
    }
}

pub(crate) fn reconstruct_payload(payload: &FactorPayload) -> CMat {
    match payload {
        FactorPayload::Pair { a, b } => a * b,
        FactorPayload::Single { a } => a * a.transpose(),
        FactorPayload::PsdTuples { e, f } => {
            CMat::from_fn(e.len(), f.len(), |i, j| (&e[i] * f[j].transpose()).trace())
        }
        FactorPayload::HadamardRoot { root, .. } => to_complex(&root.component_mul(root)),
    }
}

pub(crate) fn max_abs_diff(target: &RMat, got: &CMat) -> f64 {
    if target.shape() != got.shape() {
        return f64::INFINITY;
    }
    target
        .iter()
        .zip(got.iter())
        .fold(0.0, |acc, (&t, g)| acc.max((g - crate::linalg::c(t, 0.0)).norm()))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn clips_round_off() {
        let m = NonnegMatrix::from_rows(&[vec![1.0, -1e-13], vec![0.0, 2.0]]).unwrap();
        assert_eq!(m.get(0, 1), 0.0);
        assert!(NonnegMatrix::from_rows(&[vec![1.0, -1e-6]]).is_err());
        assert!(NonnegMatrix::from_rows(&[vec![f64::NAN]]).is_err());
    }

    #[test]
    fn kind_names_round_trip() {
        for k in FactorKind::ALL {
            assert_eq!(k.as_str().parse::<FactorKind>().unwrap(), k);
        }
        assert!("bogus".parse::<FactorKind>().is_err());
    }

    #[test]
    fn symmetry() {
        let m = NonnegMatrix::from_rows(&[vec![1.0, 2.0], vec![2.0, 1.0]]).unwrap();
        assert!(m.is_symmetric(1e-10));
        let n = NonnegMatrix::from_rows(&[vec![1.0, 2.0], vec![3.0, 1.0]]).unwrap();
        assert!(matches!(n.symmetrized(1e-10), Err(Error::NotSymmetric { .. })));
    }
}
