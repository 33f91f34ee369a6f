use crate::error::{Error, Result};
use crate::linalg::{c, hermitian_defect, hermitian_eigen, CMat};
use crate::tensor::{contract_train, Core, MpoTrain, Operator};

/// Relative eigenvalue tolerance for the psd check on each local matrix.
const LOCAL_PSD_TOL: f64 = 1e-10;

/// An MPDO form whose local matrices `chi^[l]_{alpha,beta}` are all psd.
#[derive(Debug, Clone, PartialEq)]
pub struct SeparableCertificate {
    train: MpoTrain,
}

impl SeparableCertificate {
    /// Validates that every local matrix is square and psd within tolerance.
    pub fn new(train: MpoTrain) -> Result<Self> {
        for (l, core) in train.cores().iter().enumerate() {
            if core.out_dim() != core.in_dim() {
                return Err(Error::Shape(format!("core {l} is not square")));
            }
            for a in 0..core.left_dim() {
                for b in 0..core.right_dim() {
                    let m = core.local_matrix(a, b);
                    let e = hermitian_eigen(&((&m + m.adjoint()) * c(0.5, 0.0)));
                    let top = e.values.first().copied().unwrap_or(0.0).max(0.0);
                    let lo = e.values.last().copied().unwrap_or(0.0);
                    let herm = hermitian_defect(&m);
                    if lo < -LOCAL_PSD_TOL * top || herm > LOCAL_PSD_TOL * m.norm().max(f64::MIN_POSITIVE) {
                        return Err(Error::Domain(format!(
                            "local matrix ({a},{b}) of core {l} is not psd (min eigenvalue {lo:.3e})"
                        )));
                    }
                }
            }
        }
        Ok(Self { train })
    }

    pub fn train(&self) -> &MpoTrain {
        &self.train
    }

    pub fn into_train(self) -> MpoTrain {
        self.train
    }

    /// The bond dimension `D` of the decomposition.
    pub fn inner_dim(&self) -> usize {
        self.train.max_bond()
    }

    pub fn contract(&self) -> Result<Operator> {
        contract_train(&self.train)
    }

    /// `||C - rho||_F / ||rho||_F` for the contraction `C`.
    pub fn residual(&self, rho: &Operator) -> Result<f64> {
        Ok(self.contract()?.relative_distance(rho))
    }

    /// Residual after rescaling the contraction to the trace of `rho`, for
    /// decompositions stated up to normalization.
    pub fn trace_matched_residual(&self, rho: &Operator) -> Result<f64> {
        let cop = self.contract()?;
        let tc: f64 = cop.data().diagonal().iter().map(|z| z.re).sum();
        let tr: f64 = rho.data().diagonal().iter().map(|z| z.re).sum();
        if tc <= 0.0 {
            return Ok(if rho.frobenius_norm() == 0.0 { 0.0 } else { 1.0 });
        }
        Ok(cop.scale(c(tr / tc, 0.0)).relative_distance(rho))
    }
}

/// `|++><++| + |--><--|`, a bond-2 separable form equal to `(I(x)I + X(x)X) / 2`.
pub fn xx_pair_separable() -> SeparableCertificate {
    let h = c(0.5, 0.0);
    let plus = CMat::from_row_slice(2, 2, &[h, h, h, h]);
    let minus = CMat::from_row_slice(2, 2, &[h, -h, -h, h]);
    let pick = |k: usize| if k == 0 { plus.clone() } else { minus.clone() };
    let first = Core::from_local_matrices(1, 2, 2, 2, |_, b| pick(b)).expect("2x2 blocks");
    let second = Core::from_local_matrices(2, 1, 2, 2, |a, _| pick(a)).expect("2x2 blocks");
    SeparableCertificate::new(MpoTrain::new(vec![first, second]).expect("bonds match"))
        .expect("projectors are psd")
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::{ONE, ZERO};

    #[test]
    fn xx_pair_contracts_to_half_ii_plus_xx() {
        let cert = xx_pair_separable();
        assert_eq!(cert.inner_dim(), 2);
        let x = CMat::from_row_slice(2, 2, &[ZERO, ONE, ONE, ZERO]);
        let expected = (CMat::identity(4, 4) + x.kronecker(&x)) * c(0.5, 0.0);
        assert!((cert.contract().unwrap().data() - expected).norm() < 1e-14);
    }

    #[test]
    fn rejects_non_psd_local_matrix() {
        let x = CMat::from_row_slice(2, 2, &[ZERO, ONE, ONE, ZERO]);
        let core = Core::from_local_matrices(1, 1, 2, 2, |_, _| x.clone()).unwrap();
        let train = MpoTrain::new(vec![core]).unwrap();
        assert!(matches!(SeparableCertificate::new(train), Err(Error::Domain(_))));
    }
}
