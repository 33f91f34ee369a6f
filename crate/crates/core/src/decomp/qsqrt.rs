use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::linalg::{c, CMat};
use crate::tensor::{Operator, PsdOperator};

use super::mpdo::cut_ranks;
use super::psd_spectrum;

/// Default cap on the spectral rank for sign enumeration (`2^16` sign vectors).
pub const DEFAULT_MAX_ENUM_RANK: usize = 16;

/// Signs chosen for the square roots of the nonzero eigenvalues, in
/// descending eigenvalue order.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SignVector {
    pub signs: Vec<i8>,
}

impl SignVector {
    /// Sign vector number `mask` in lexicographic order, `+1` before `-1`;
    /// the first entry is the most significant bit.
    pub fn from_mask(mask: u64, len: usize) -> Self {
        let signs = (0..len)
            .map(|k| if (mask >> (len - 1 - k)) & 1 == 1 { -1 } else { 1 })
            .collect();
        Self { signs }
    }

    pub fn len(&self) -> usize {
        self.signs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.signs.is_empty()
    }
}

/// Quantum square root rank: the smallest operator Schmidt rank of
/// `U D^{1/2} U^dagger` over all sign choices on the nonzero eigenvalues.
///
/// Enumerates all `2^rank` sign vectors; the first minimizer in lexicographic
/// order (all `+1` first) wins regardless of how the work is scheduled.
pub fn q_sqrt_rank(
    rho: &PsdOperator,
    max_enum_rank: usize,
    rel_tol: f64,
) -> Result<(usize, SignVector)> {
    let spectrum = psd_spectrum(rho, rel_tol)?;
    let k = spectrum.len();
    if k > max_enum_rank || k > 63 {
        return Err(Error::BudgetExceeded {
            needed: 1u128 << k.min(127),
            cap: 1u128 << max_enum_rank.min(127),
        });
    }
    if k == 0 {
        return Ok((0, SignVector { signs: Vec::new() }));
    }
    let dims = rho.sites().dims().to_vec();
    let projectors: Vec<CMat> = spectrum
        .iter()
        .map(|(lam, v)| (v * v.adjoint()) * c(lam.sqrt(), 0.0))
        .collect();
    let eval = |mask: u64| -> Result<(usize, u64)> {
        let signs = SignVector::from_mask(mask, k);
        let mut root = CMat::zeros(projectors[0].nrows(), projectors[0].ncols());
        for (p, &s) in projectors.iter().zip(&signs.signs) {
            if s > 0 {
                root += p;
            } else {
                root -= p;
            }
        }
        let op = Operator::new(dims.clone(), dims.clone(), root)?;
        let osr = if dims.len() == 1 {
            usize::from(op.frobenius_norm() > 0.0)
        } else {
            cut_ranks(&op, rel_tol)?.into_iter().max().unwrap_or(0)
        };
        Ok((osr, mask))
    };
    let (best, mask) = (0..1u64 << k)
        .into_par_iter()
        .map(eval)
        .try_reduce(
            || (usize::MAX, u64::MAX),
            |a, b| Ok(if b < a { b } else { a }),
        )?;
    Ok((best, SignVector::from_mask(mask, k)))
}
