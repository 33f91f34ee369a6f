use std::f64::consts::PI;

use crate::error::{Error, Result};
use crate::linalg::{c, eigenvalues, CMat, C64};
use crate::tensor::{contract_train, translation_defect, Core, MpoTrain, TiSiteTensor};

use super::bounds::ceil_sqrt;

/// Relative shift defect above which an operator is not considered t.i.
pub const TI_TOL: f64 = 1e-10;
/// Default distance for matching roots of unity against the transfer spectrum.
pub const PERIODICITY_TOL: f64 = 1e-8;

/// Translation-invariant site tensor for a t.i. operator given in open MPO form.
///
/// Every core is zero-padded to the common bond `D` (the first core in row 0,
/// the last in column 0) and placed on the block cyclic superdiagonal of an
/// `nD x nD` tensor scaled by `n^{-1/n}`.
pub fn make_translation_invariant(train: &MpoTrain) -> Result<TiSiteTensor> {
    let n = train.n_sites();
    let cores = train.cores();
    let (d_out, d_in) = (cores[0].out_dim(), cores[0].in_dim());
    if cores.iter().any(|c| c.out_dim() != d_out || c.in_dim() != d_in) {
        return Err(Error::Shape("all sites must share the same physical dimensions".into()));
    }
    let dense = contract_train(train)?;
    if dense.frobenius_norm() > 0.0 {
        let defect = translation_defect(&dense)?;
        if defect > TI_TOL {
            return Err(Error::NotTranslationInvariant { defect });
        }
    }
    let bond = train.max_bond().max(1);
    let big = n * bond;
    let scale = c((n as f64).powf(-1.0 / n as f64), 0.0);
    let mut out = Core::zeros(big, d_out, d_in, big);
    for (k, core) in cores.iter().enumerate() {
        let next = (k + 1) % n;
        for a in 0..core.left_dim() {
            for b in 0..core.right_dim() {
                for i in 0..d_out {
                    for j in 0..d_in {
                        let v = core.get(a, i, j, b) * scale;
                        out.set(k * bond + a, i, j, next * bond + b, v);
                    }
                }
            }
        }
    }
    TiSiteTensor::new(out)
}

/// `E = sum_{i,j} C^{ij} (x) conj(C^{ij})`, a `D^2 x D^2` matrix.
pub fn transfer_matrix(site: &TiSiteTensor) -> CMat {
    let core = site.core();
    let d = site.bond_dim();
    let mut e = CMat::zeros(d * d, d * d);
    for i in 0..site.out_dim() {
        for j in 0..site.in_dim() {
            let m = core.local_matrix_bond(i, j);
            e += m.kronecker(&m.map(|z| z.conj()));
        }
    }
    e
}

/// Result of the periodicity test on a transfer matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct PeriodicityCheck {
    /// Every `n`-th root of unity lies within tolerance of the normalized spectrum.
    pub holds: bool,
    /// `ceil(sqrt(n))` when the test holds, otherwise the trivial bound 1.
    pub lower_bound: usize,
    pub spectral_radius: f64,
    /// Largest distance from a root of unity to its nearest normalized eigenvalue.
    pub max_root_distance: f64,
}

/// Checks that the transfer spectrum, divided by its spectral radius, contains
/// every `n`-th root of unity. When it does, a t.i. representation needs
/// `D^2 >= n`, i.e. bond at least `ceil(sqrt(n))`.
pub fn periodicity_lower_bound(site: &TiSiteTensor, n: usize, tol: f64) -> Result<PeriodicityCheck> {
    if n == 0 {
        return Err(Error::Usage("period must be at least 1".into()));
    }
    let spectrum = eigenvalues(&transfer_matrix(site))?;
    let radius = spectrum.iter().map(|z| z.norm()).fold(0.0, f64::max);
    if radius == 0.0 {
        return Ok(PeriodicityCheck {
            holds: false,
            lower_bound: 1,
            spectral_radius: 0.0,
            max_root_distance: f64::INFINITY,
        });
    }
    let normalized: Vec<C64> = spectrum.iter().map(|z| z / radius).collect();
    let max_root_distance = (0..n)
        .map(|r| {
            let root = C64::from_polar(1.0, 2.0 * PI * r as f64 / n as f64);
            normalized
                .iter()
                .map(|z| (z - root).norm())
                .fold(f64::INFINITY, f64::min)
        })
        .fold(0.0, f64::max);
    // a single root (n = 1) says nothing about periodicity
    let holds = n > 1 && max_root_distance <= tol;
    Ok(PeriodicityCheck {
        holds,
        lower_bound: if holds { ceil_sqrt(n) } else { 1 },
        spectral_radius: radius,
        max_root_distance,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::kron_chain;
    use crate::sampling;
    use crate::tensor::contract_cyclic;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn product_train_round_trip() {
        let mut rng = ChaCha8Rng::seed_from_u64(21);
        let a = sampling::random_complex(&mut rng, 2, 2);
        let core = Core::from_local_matrices(1, 1, 2, 2, |_, _| a.clone()).unwrap();
        let train = MpoTrain::new(vec![core.clone(), core.clone(), core]).unwrap();
        let site = make_translation_invariant(&train).unwrap();
        assert_eq!(site.bond_dim(), 3);
        let back = contract_cyclic(&site, 3).unwrap();
        let expected = kron_chain(&[a.clone(), a.clone(), a]).unwrap();
        assert!((back.data() - &expected).norm() <= 1e-9 * expected.norm());
    }

    #[test]
    fn random_diagonal_ti_round_trip() {
        use crate::decomp::mpdo::mpo_train_form;
        use crate::tensor::{cyclic_shift, Operator, SiteSpec};
        let mut rng = ChaCha8Rng::seed_from_u64(22);
        let sites = SiteSpec::uniform(2, 3).unwrap();
        let v = sampling::random_uniform(&mut rng, 8, 1);
        let d = CMat::from_fn(8, 8, |r, col| if r == col { c(v[(r, 0)], 0.0) } else { c(0.0, 0.0) });
        let op = Operator::square(&sites, d).unwrap();
        // symmetrize over the cyclic group
        let s1 = cyclic_shift(&op).unwrap();
        let s2 = cyclic_shift(&s1).unwrap();
        let sym = op.add(&s1).unwrap().add(&s2).unwrap();
        let (train, _) = mpo_train_form(&sym, 1e-12).unwrap();
        let site = make_translation_invariant(&train).unwrap();
        let back = contract_cyclic(&site, 3).unwrap();
        assert!(back.relative_distance(&sym) <= 1e-9);
    }

    #[test]
    fn rejects_non_ti() {
        let a = CMat::identity(2, 2);
        let mut b = CMat::zeros(2, 2);
        b[(0, 0)] = c(1.0, 0.0);
        let ca = Core::from_local_matrices(1, 1, 2, 2, |_, _| a.clone()).unwrap();
        let cb = Core::from_local_matrices(1, 1, 2, 2, |_, _| b.clone()).unwrap();
        let train = MpoTrain::new(vec![ca, cb]).unwrap();
        assert!(matches!(
            make_translation_invariant(&train),
            Err(Error::NotTranslationInvariant { .. })
        ));
    }

    #[test]
    fn bond_one_transfer_is_norm_squared() {
        let v = CMat::from_column_slice(2, 1, &[c(1.0, 1.0), c(2.0, 0.0)]);
        let core = Core::from_local_matrices(1, 1, 2, 1, |_, _| v.clone()).unwrap();
        let e = transfer_matrix(&TiSiteTensor::new(core).unwrap());
        assert_eq!(e.shape(), (1, 1));
        assert!((e[(0, 0)] - c(6.0, 0.0)).norm() < 1e-14);
    }

    #[test]
    fn product_tensor_is_not_periodic() {
        let a = CMat::from_column_slice(2, 1, &[c(1.0, 0.0), c(0.5, 0.0)]);
        let core = Core::from_local_matrices(1, 1, 2, 1, |_, _| a.clone()).unwrap();
        let check = periodicity_lower_bound(&TiSiteTensor::new(core).unwrap(), 3, PERIODICITY_TOL).unwrap();
        assert!(!check.holds);
        assert_eq!(check.lower_bound, 1);
    }
}
