//! Builders and rank computations for decompositions of multi-site psd operators.

mod bounds;
mod mpdo;
mod purification;
mod qsqrt;
mod separable;
mod ti;
mod wstate;

pub use bounds::{
    ceil_sqrt, distinct_eigenvalue_count, physical_dimension_bound, puri_interval,
    q_sqrt_power_bound, RankInterval,
};
pub use mpdo::{cut_ranks, mpo_train_form, operator_schmidt_rank};
pub use purification::{
    local_purification_spectral, purification_from_separable, PurificationCertificate,
};
pub use qsqrt::{q_sqrt_rank, SignVector, DEFAULT_MAX_ENUM_RANK};
pub use separable::{xx_pair_separable, SeparableCertificate};
pub use ti::{
    make_translation_invariant, periodicity_lower_bound, transfer_matrix, PeriodicityCheck,
    PERIODICITY_TOL, TI_TOL,
};
pub use wstate::{mixed_w_generator, w_state_generators, w_state_vector, WStateGenerators};

use crate::linalg::{hermitian_eigen, CMat};
use crate::tensor::{PsdOperator, PSD_TOL};
use crate::{Error, Result};

/// Eigenpairs of a psd operator with eigenvalues in `[-psd_tol * lambda_max, 0)`
/// clipped to zero; only eigenvalues above `rel_tol * lambda_max` are kept.
///
/// Diagonal operators use the computational basis directly so that degenerate
/// eigenvalues keep basis eigenvectors.
pub(crate) fn psd_spectrum(rho: &PsdOperator, rel_tol: f64) -> Result<Vec<(f64, CMat)>> {
    let data = rho.data();
    let n = data.nrows();
    let (values, vectors): (Vec<f64>, Vec<CMat>) = if rho.operator().off_diagonal_mass() == 0.0 {
        let mut order: Vec<usize> = (0..n).collect();
        order.sort_by(|&a, &b| data[(b, b)].re.total_cmp(&data[(a, a)].re));
        order
            .into_iter()
            .map(|k| {
                let mut v = CMat::zeros(n, 1);
                v[(k, 0)] = crate::linalg::ONE;
                (data[(k, k)].re, v)
            })
            .unzip()
    } else {
        let e = hermitian_eigen(data);
        let vecs = (0..n).map(|k| e.vectors.columns(k, 1).into_owned()).collect();
        (e.values, vecs)
    };
    let top = values.first().copied().unwrap_or(0.0).max(0.0);
    if let Some(&lo) = values.last() {
        if lo < -PSD_TOL * top {
            return Err(Error::Domain(format!(
                "operator is not psd: eigenvalue {lo:.3e} with largest {top:.3e}"
            )));
        }
    }
    Ok(values
        .into_iter()
        .zip(vectors)
        .filter(|(lam, _)| top > 0.0 && *lam > rel_tol * top)
        .collect())
}
