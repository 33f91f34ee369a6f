use crate::error::{Error, Result};
use crate::linalg::{c, psd_sqrt, CMat, ZERO};
use crate::tensor::{contract_train, Core, MpoTrain, Operator, PsdOperator, PSD_TOL};

use super::mpdo::{mpo_train_form, operator_schmidt_rank};
use super::psd_spectrum;
use super::separable::SeparableCertificate;

/// A local purification `rho = L L^dagger` with `L` in MPO form.
#[derive(Debug, Clone, PartialEq)]
pub struct PurificationCertificate {
    pub l: MpoTrain,
    /// Operator Schmidt rank of the contracted `L`, an upper bound on the purification rank.
    pub osr_l: usize,
    /// `||L L^dagger - rho||_F / ||rho||_F`.
    pub residual: f64,
}

impl PurificationCertificate {
    /// Measures `osr_l` and the residual of `l` against `rho`.
    pub fn from_train(l: MpoTrain, rho: &Operator, rel_tol: f64) -> Result<Self> {
        let dense = contract_train(&l)?;
        let osr_l = operator_schmidt_rank(&dense, rel_tol)?;
        let residual = purification_residual(&dense, rho)?;
        Ok(Self { l, osr_l, residual })
    }

    /// The dense `L L^dagger`.
    pub fn reconstruct(&self) -> Result<Operator> {
        let l = contract_train(&self.l)?;
        l.compose(&l.adjoint())
    }

    pub fn aux_dims(&self) -> Vec<usize> {
        self.l.in_dims()
    }
}

fn purification_residual(l: &Operator, rho: &Operator) -> Result<f64> {
    Ok(l.compose(&l.adjoint())?.relative_distance(rho))
}

/// Spectral purification with the computational basis as auxiliary basis.
///
/// Two candidates are built and the one with the smaller operator Schmidt rank
/// is returned (ties go to the first): `L_0 = sum_j sqrt(lambda_j) |psi_j><j|`
/// with the whole auxiliary index on site 1, and the psd root `sqrt(rho)` with
/// auxiliary dimensions equal to the physical ones.
pub fn local_purification_spectral(rho: &PsdOperator, rel_tol: f64) -> Result<PurificationCertificate> {
    let dims = rho.sites().dims().to_vec();
    let n = dims.len();
    let total = rho.sites().total_dim();
    let spectrum = psd_spectrum(rho, rel_tol)?;
    let k = spectrum.len();

    let mut l0 = CMat::zeros(total, k.max(1));
    for (j, (lam, v)) in spectrum.iter().enumerate() {
        l0.set_column(j, &(v.column(0) * c(lam.sqrt(), 0.0)));
    }
    let mut aux = vec![1; n];
    aux[0] = k.max(1);
    let cand_a = Operator::new(dims.clone(), aux, l0)?;
    let (train_a, osr_a) = mpo_train_form(&cand_a, rel_tol)?;

    let root = psd_sqrt(rho.data(), PSD_TOL)?;
    let cand_b = Operator::new(dims.clone(), dims, root)?;
    let (train_b, osr_b) = mpo_train_form(&cand_b, rel_tol)?;

    let (train, dense, osr_l) = if osr_b < osr_a {
        (train_b, cand_b, osr_b)
    } else {
        (train_a, cand_a, osr_a)
    };
    let residual = purification_residual(&dense, rho.operator())?;
    Ok(PurificationCertificate {
        l: train,
        osr_l,
        residual,
    })
}

/// Purification from a separable decomposition: each psd local matrix is
/// replaced by its root tensored with a bra recording the right bond index,
///
/// `L^[l]_{a,b} = sqrt(chi^[l]_{a,b}) (x) <b|` for `l < n`, `L^[n]_a = sqrt(chi^[n]_a)`,
///
/// so cross terms between different bond configurations cancel in `L L^dagger`.
/// The bond dimension of `L` equals that of the certificate.
pub fn purification_from_separable(
    cert: &SeparableCertificate,
    rel_tol: f64,
) -> Result<PurificationCertificate> {
    let cores = cert.train().cores();
    let n = cores.len();
    let mut out = Vec::with_capacity(n);
    for (l, core) in cores.iter().enumerate() {
        let (left, right, d) = (core.left_dim(), core.right_dim(), core.out_dim());
        let last = l + 1 == n;
        let aux = if last { d } else { d * right };
        let mut roots = Vec::with_capacity(left * right);
        for a in 0..left {
            for b in 0..right {
                let m = core.local_matrix(a, b);
                let herm = (&m + m.adjoint()) * c(0.5, 0.0);
                roots.push(psd_sqrt(&herm, PSD_TOL).map_err(|e| {
                    Error::Domain(format!("core {l} local matrix ({a},{b}): {e}"))
                })?);
            }
        }
        let lc = Core::from_local_matrices(left, right, d, aux, |a, b| {
            let r = &roots[a * right + b];
            if last {
                return r.clone();
            }
            let mut m = CMat::from_element(d, aux, ZERO);
            for i in 0..d {
                for j in 0..d {
                    m[(i, j * right + b)] = r[(i, j)];
                }
            }
            m
        })?;
        out.push(lc);
    }
    let l = MpoTrain::new(out)?;
    PurificationCertificate::from_train(l, &cert.contract()?, rel_tol)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::decomp::separable::xx_pair_separable;
    use crate::decomp::wstate::mixed_w_generator;
    use crate::linalg::{kron_chain, DEFAULT_REL_TOL};
    use crate::sampling;
    use crate::tensor::SiteSpec;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn pure_state_squares_osr() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for n in 2..=3 {
            let sites = SiteSpec::uniform(2, n).unwrap();
            let psi = sampling::random_complex(&mut rng, sites.total_dim(), 1);
            let rho = PsdOperator::new(sites.clone(), &psi * psi.adjoint()).unwrap();
            let cert = local_purification_spectral(&rho, DEFAULT_REL_TOL).unwrap();
            let osr = operator_schmidt_rank(rho.operator(), DEFAULT_REL_TOL).unwrap();
            assert_eq!(cert.osr_l * cert.osr_l, osr);
            assert!(cert.residual <= 1e-8);
        }
    }

    #[test]
    fn diag_identity_gives_osr_two() {
        let mut d = CMat::zeros(4, 4);
        d[(0, 0)] = c(1.0, 0.0);
        d[(3, 3)] = c(1.0, 0.0);
        let rho = PsdOperator::new(SiteSpec::uniform(2, 2).unwrap(), d).unwrap();
        let cert = local_purification_spectral(&rho, DEFAULT_REL_TOL).unwrap();
        assert_eq!(cert.osr_l, 2);
        assert!(cert.residual <= 1e-12);
    }

    #[test]
    fn product_state_gives_osr_one() {
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        let sites = SiteSpec::uniform(2, 3).unwrap();
        let rho = sampling::random_product_psd(&mut rng, &sites);
        let cert = local_purification_spectral(&rho, DEFAULT_REL_TOL).unwrap();
        assert_eq!(cert.osr_l, 1);
        assert!(cert.residual <= 1e-8);
    }

    #[test]
    fn rejects_non_psd() {
        let d = CMat::from_diagonal(&nalgebra::DVector::from_vec(vec![
            c(1.0, 0.0),
            c(-0.5, 0.0),
            c(0.0, 0.0),
            c(0.0, 0.0),
        ]));
        let rho = PsdOperator::new(SiteSpec::uniform(2, 2).unwrap(), d).unwrap();
        assert!(matches!(
            local_purification_spectral(&rho, DEFAULT_REL_TOL),
            Err(Error::Domain(_))
        ));
    }

    #[test]
    fn separable_pair_purifies_with_bond_two() {
        let cert = xx_pair_separable();
        let p = purification_from_separable(&cert, DEFAULT_REL_TOL).unwrap();
        assert!(p.osr_l <= 2);
        assert!(p.residual <= 1e-12);
    }

    #[test]
    fn product_certificate_purifies_with_bond_one() {
        let mut rng = ChaCha8Rng::seed_from_u64(6);
        let a = sampling::random_local_psd(&mut rng, 2, 2);
        let b = sampling::random_local_psd(&mut rng, 3, 3);
        let ca = Core::from_local_matrices(1, 1, 2, 2, |_, _| a.clone()).unwrap();
        let cb = Core::from_local_matrices(1, 1, 3, 3, |_, _| b.clone()).unwrap();
        let cert = SeparableCertificate::new(MpoTrain::new(vec![ca, cb]).unwrap()).unwrap();
        let p = purification_from_separable(&cert, DEFAULT_REL_TOL).unwrap();
        assert_eq!(p.osr_l, 1);
        assert!(p.residual <= 1e-12);
        let expected = kron_chain(&[a, b]).unwrap();
        assert!((p.reconstruct().unwrap().data() - expected).norm() < 1e-10);
    }

    #[test]
    fn mixed_w_purification() {
        let (_, cert) = mixed_w_generator(4).unwrap();
        let p = purification_from_separable(&cert, DEFAULT_REL_TOL).unwrap();
        assert!(p.residual <= 1e-8);
        assert!(p.osr_l <= 2);
    }
}
