//! Certificate checker written directly against nalgebra so it shares no code
//! with the constructions and searches it verifies.

use nalgebra::{DMatrix, SymmetricEigen};
use num_complex::Complex64;

use super::{FactorCertificate, FactorKind, FactorPayload, NonnegMatrix};

/// Reconstruction error bar relative to `max|M|` for searched kinds.
const SEARCH_BAR: f64 = 1e-6;
/// Reconstruction error bar relative to `max|M|` for exact kinds.
const EXACT_BAR: f64 = 1e-8;
/// Relative eigenvalue tolerance for psd factor matrices.
const PSD_BAR: f64 = 1e-10;

#[derive(Debug, Clone, PartialEq)]
pub struct CheckReport {
    pub feasible: bool,
    /// Recomputed max-abs reconstruction error.
    pub residual: f64,
    pub problems: Vec<String>,
}

fn hermitian_min_max(m: &DMatrix<Complex64>) -> (f64, f64) {
    let n = m.nrows();
    if n == 0 {
        return (0.0, 0.0);
    }
    let h = (m + m.adjoint()).map(|z| z * 0.5);
    let values = SymmetricEigen::new(h).eigenvalues;
    let lo = values.iter().copied().fold(f64::INFINITY, f64::min);
    let hi = values.iter().map(|v| v.abs()).fold(0.0, f64::max);
    (lo, hi)
}

fn psd_ok(m: &DMatrix<Complex64>) -> bool {
    if !m.is_square() {
        return false;
    }
    let scale = m.iter().map(|z| z.norm()).fold(0.0, f64::max);
    let herm = (m - m.adjoint()).iter().map(|z| z.norm()).fold(0.0, f64::max);
    let (lo, hi) = hermitian_min_max(m);
    herm <= PSD_BAR * scale.max(f64::MIN_POSITIVE) && lo >= -PSD_BAR * hi
}

fn entrywise_nonneg_real(m: &DMatrix<Complex64>) -> bool {
    m.iter().all(|z| z.im == 0.0 && z.re >= 0.0)
}

/// Verifies kind-specific feasibility and recomputes the reconstruction error.
pub fn check_certificate(cert: &FactorCertificate, m: &NonnegMatrix) -> CheckReport {
    let target = m.data();
    let (p, q) = target.shape();
    let mut problems = Vec::new();
    let recon: Option<DMatrix<Complex64>> = match (&cert.payload, cert.kind) {
        (FactorPayload::Pair { a, b }, FactorKind::Minimal | FactorKind::Nonnegative) => {
            if a.ncols() != cert.inner_dim || b.nrows() != cert.inner_dim {
                problems.push("factor sizes differ from the inner dimension".to_string());
            }
            if cert.kind == FactorKind::Nonnegative && !(entrywise_nonneg_real(a) && entrywise_nonneg_real(b)) {
                problems.push("factors are not entrywise nonnegative".to_string());
            }
            (a.ncols() == b.nrows()).then(|| a * b)
        }
        (FactorPayload::Single { a }, FactorKind::Symmetric | FactorKind::Cp) => {
            if a.ncols() != cert.inner_dim {
                problems.push("factor has the wrong number of columns".to_string());
            }
            if cert.kind == FactorKind::Cp && !entrywise_nonneg_real(a) {
                problems.push("cp factor is not real nonnegative".to_string());
            }
            Some(a * a.transpose())
        }
        (FactorPayload::PsdTuples { e, f }, FactorKind::Psd | FactorKind::Cpsdt) => {
            let sized = |x: &DMatrix<Complex64>| x.nrows() == cert.inner_dim && x.ncols() == cert.inner_dim;
            if !e.iter().chain(f).all(sized) {
                problems.push("factor matrices have the wrong size".to_string());
            }
            if !e.iter().chain(f).all(psd_ok) {
                problems.push("a factor matrix is not psd".to_string());
            }
            if cert.kind == FactorKind::Cpsdt && e != f {
                problems.push("cpsdt tuples must coincide".to_string());
            }
            (e.len() == p && f.len() == q && e.iter().chain(f).all(sized)).then(|| {
                DMatrix::from_fn(p, q, |i, j| {
                    let mut acc = Complex64::new(0.0, 0.0);
                    for a in 0..cert.inner_dim {
                        for b in 0..cert.inner_dim {
                            acc += e[i][(a, b)] * f[j][(a, b)];
                        }
                    }
                    acc
                })
            })
        }
        (FactorPayload::HadamardRoot { root, .. }, FactorKind::HadamardRoot) => {
            Some(root.map(|x| Complex64::new(x * x, 0.0)))
        }
        _ => {
            problems.push(format!("payload does not match kind {}", cert.kind));
            None
        }
    };
    let residual = match &recon {
        Some(r) if r.shape() == (p, q) => r
            .iter()
            .zip(target.iter())
            .map(|(z, &t)| (z - Complex64::new(t, 0.0)).norm())
            .fold(0.0, f64::max),
        _ => {
            problems.push("reconstruction has the wrong shape".to_string());
            f64::INFINITY
        }
    };
    let bar = match cert.kind {
        FactorKind::Nonnegative | FactorKind::Psd | FactorKind::Cp => SEARCH_BAR,
        _ => EXACT_BAR,
    };
    let scale = target.iter().fold(0.0, |a: f64, &x| a.max(x.abs()));
    if residual > bar * scale {
        problems.push(format!("reconstruction error {residual:.3e} exceeds {:.1e} * max|M|", bar));
    }
    CheckReport {
        feasible: problems.is_empty(),
        residual,
        problems,
    }
}
