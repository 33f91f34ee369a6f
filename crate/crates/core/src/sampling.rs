//! Random instance generators shared by tests, experiments and the CLI.

use rand::Rng;
use rand_distr::StandardNormal;

use crate::decomp::SeparableCertificate;
use crate::linalg::{kron_chain, CMat, RMat, C64};
use crate::nonneg::NonnegMatrix;
use crate::tensor::{Core, MpoTrain, PsdOperator, SiteSpec};

pub fn random_complex<R: Rng + ?Sized>(rng: &mut R, rows: usize, cols: usize) -> CMat {
    CMat::from_fn(rows, cols, |_, _| {
        C64::new(rng.sample(StandardNormal), rng.sample(StandardNormal))
    })
}

pub fn random_real<R: Rng + ?Sized>(rng: &mut R, rows: usize, cols: usize) -> RMat {
    RMat::from_fn(rows, cols, |_, _| rng.sample(StandardNormal))
}

pub fn random_uniform<R: Rng + ?Sized>(rng: &mut R, rows: usize, cols: usize) -> RMat {
    RMat::from_fn(rows, cols, |_, _| rng.random::<f64>())
}

/// `G G^dagger` with `G` a `N x rank` complex Gaussian matrix.
pub fn random_psd<R: Rng + ?Sized>(rng: &mut R, sites: &SiteSpec, rank: usize) -> PsdOperator {
    let n = sites.total_dim();
    let g = random_complex(rng, n, rank);
    PsdOperator::new(sites.clone(), &g * g.adjoint()).expect("shape is consistent")
}

/// Random psd matrix of side `d` and the given rank (local factor).
pub fn random_local_psd<R: Rng + ?Sized>(rng: &mut R, d: usize, rank: usize) -> CMat {
    let g = random_complex(rng, d, rank);
    &g * g.adjoint()
}

/// Tensor product of independent random local psd matrices.
pub fn random_product_psd<R: Rng + ?Sized>(rng: &mut R, sites: &SiteSpec) -> PsdOperator {
    let factors: Vec<CMat> = sites
        .dims()
        .iter()
        .map(|&d| random_local_psd(rng, d, d))
        .collect();
    PsdOperator::new(sites.clone(), kron_chain(&factors).expect("nonempty")).expect("shape")
}

/// Sum of `terms` random product psd operators; separable with osr at most `terms`.
pub fn random_separable<R: Rng + ?Sized>(
    rng: &mut R,
    sites: &SiteSpec,
    terms: usize,
) -> PsdOperator {
    let n = sites.total_dim();
    let mut acc = CMat::zeros(n, n);
    for _ in 0..terms {
        acc += random_product_psd(rng, sites).data();
    }
    PsdOperator::new(sites.clone(), acc).expect("shape")
}

/// Separable certificate with `terms` random product terms, written as a
/// bond-`terms` train whose inner cores are diagonal in the bond indices.
pub fn random_separable_certificate<R: Rng + ?Sized>(
    rng: &mut R,
    sites: &SiteSpec,
    terms: usize,
) -> SeparableCertificate {
    let dims = sites.dims();
    let n = dims.len();
    let locals: Vec<Vec<CMat>> = (0..terms)
        .map(|_| {
            dims.iter()
                .map(|&d| {
                    let rank = rng.random_range(1..=d);
                    random_local_psd(rng, d, rank)
                })
                .collect()
        })
        .collect();
    let cores = (0..n)
        .map(|l| {
            let d = dims[l];
            let left = if l == 0 { 1 } else { terms };
            let right = if l == n - 1 { 1 } else { terms };
            Core::from_local_matrices(left, right, d, d, |a, b| match (l == 0, l == n - 1) {
                (true, true) => locals.iter().map(|t| &t[0]).sum(),
                (true, false) => locals[b][l].clone(),
                (false, true) => locals[a][l].clone(),
                _ if a == b => locals[a][l].clone(),
                _ => CMat::zeros(d, d),
            })
            .expect("local matrices have the site shape")
        })
        .collect();
    let train = MpoTrain::new(cores).expect("bonds match by construction");
    SeparableCertificate::new(train).expect("product terms are psd")
}

/// Uniform `[0, 1)` nonnegative matrix.
pub fn random_nonneg<R: Rng + ?Sized>(rng: &mut R, rows: usize, cols: usize) -> NonnegMatrix {
    NonnegMatrix::new(random_uniform(rng, rows, cols)).expect("entries are nonnegative")
}

/// `A B` with uniform nonnegative `A` (rows x r) and `B` (r x cols).
pub fn planted_nonneg<R: Rng + ?Sized>(
    rng: &mut R,
    rows: usize,
    cols: usize,
    r: usize,
) -> NonnegMatrix {
    let a = random_uniform(rng, rows, r);
    let b = random_uniform(rng, r, cols);
    NonnegMatrix::new(a * b).expect("product of nonnegative factors")
}

/// Symmetric `A A^T` with uniform nonnegative `A` (side x r).
pub fn planted_cp<R: Rng + ?Sized>(rng: &mut R, side: usize, r: usize) -> NonnegMatrix {
    let a = random_uniform(rng, side, r);
    NonnegMatrix::new(&a * a.transpose()).expect("product of nonnegative factors")
}

/// Random symmetric matrix with uniform `[0,1)` entries.
pub fn random_symmetric_nonneg<R: Rng + ?Sized>(rng: &mut R, side: usize) -> NonnegMatrix {
    let mut m = RMat::zeros(side, side);
    for i in 0..side {
        for j in i..side {
            let v = rng.random::<f64>();
            m[(i, j)] = v;
            m[(j, i)] = v;
        }
    }
    NonnegMatrix::new(m).expect("entries are nonnegative")
}

/// Planted psd factorization data: random size-`r` psd tuples and `M_ij = tr(E_i F_j^T)`.
pub struct PlantedPsd {
    pub e: Vec<CMat>,
    pub f: Vec<CMat>,
    pub m: NonnegMatrix,
}

pub fn planted_psd<R: Rng + ?Sized>(rng: &mut R, rows: usize, cols: usize, r: usize) -> PlantedPsd {
    let e: Vec<CMat> = (0..rows).map(|_| random_local_psd(rng, r, r)).collect();
    let f: Vec<CMat> = (0..cols).map(|_| random_local_psd(rng, r, r)).collect();
    let m = RMat::from_fn(rows, cols, |i, j| (&e[i] * f[j].transpose()).trace().re);
    PlantedPsd {
        e,
        f,
        m: NonnegMatrix::new(m).expect("trace of a product of psd matrices is nonnegative"),
    }
}

/// Haar-ish random unitary from the QR decomposition of a Gaussian matrix.
pub fn random_unitary<R: Rng + ?Sized>(rng: &mut R, n: usize) -> CMat {
    let g = random_complex(rng, n, n);
    g.qr().q()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::tensor::contract_train;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn separable_certificate_matches_explicit_sum() {
        let mut rng = ChaCha8Rng::seed_from_u64(60);
        for dims in [vec![2], vec![2, 3], vec![2, 2, 2]] {
            let sites = SiteSpec::new(dims).unwrap();
            let cert = random_separable_certificate(&mut rng, &sites, 3);
            assert_eq!(cert.inner_dim(), if sites.n_sites() == 1 { 1 } else { 3 });
            let op = contract_train(cert.train()).unwrap();
            let rho = PsdOperator::from_operator(op).unwrap();
            assert!(rho.is_psd(1e-10));
        }
    }
}
