use crate::error::{Error, Result};
use crate::linalg::{c, CMat, ONE, ZERO};
use crate::tensor::{Core, MpoTrain, Operator, PsdOperator, SiteSpec, TiSiteTensor};

use super::separable::SeparableCertificate;

/// The W state family: the state vector, the bond-2 matrices `A^0, A^1, B`,
/// the open bond-2 train and the bond-`2n` cyclic tensor `C`.
#[derive(Debug, Clone)]
pub struct WStateGenerators {
    pub vector: Operator,
    pub a0: CMat,
    pub a1: CMat,
    pub b: CMat,
    /// `n^{-1/2} <0| A^{i_1} ... A^{i_n} |1>`, which equals `n^{-1/2} tr(B A^{i_1} ... A^{i_n})`.
    pub open: MpoTrain,
    pub ti: TiSiteTensor,
}

/// `n^{-1/2} sum_j X_j |0...0>` as a column operator on `n` qubits.
pub fn w_state_vector(n: usize) -> Result<Operator> {
    if n < 1 {
        return Err(Error::Usage("the W state needs at least one site".into()));
    }
    let dim = 1usize << n;
    let mut amps = vec![ZERO; dim];
    let s = c(1.0 / (n as f64).sqrt(), 0.0);
    for k in 0..n {
        amps[1 << k] = s;
    }
    Operator::column(vec![2; n], amps)
}

fn w_matrices() -> (CMat, CMat, CMat) {
    let a0 = CMat::identity(2, 2);
    let a1 = CMat::from_row_slice(2, 2, &[ZERO, ONE, ZERO, ZERO]);
    let b = CMat::from_row_slice(2, 2, &[ZERO, ZERO, ONE, ZERO]);
    (a0, a1, b)
}

/// Column core with local "matrices" `m(i)` (a 2x1 column of bond maps).
fn column_core(left: usize, right: usize, m: impl Fn(usize) -> CMat) -> Core {
    let mut core = Core::zeros(left, 2, 1, right);
    for i in 0..2 {
        let bm = m(i);
        for a in 0..left {
            for b in 0..right {
                core.set(a, i, 0, b, bm[(a, b)]);
            }
        }
    }
    core
}

pub fn w_state_generators(n: usize) -> Result<WStateGenerators> {
    if n < 2 {
        return Err(Error::Usage("the W state generators need n >= 2".into()));
    }
    let (a0, a1, b) = w_matrices();
    let amat = |i: usize| if i == 0 { a0.clone() } else { a1.clone() };
    let norm = c(1.0 / (n as f64).sqrt(), 0.0);

    let mut cores = Vec::with_capacity(n);
    cores.push(column_core(1, 2, |i| amat(i).rows(0, 1) * norm));
    for _ in 1..n - 1 {
        cores.push(column_core(2, 2, &amat));
    }
    cores.push(column_core(2, 1, |i| amat(i).columns(1, 1).into_owned()));
    let open = MpoTrain::new(cores)?;

    // block cyclic C^i: block (0,1) = B A^i, blocks (k,k+1) = A^i, block (n-1,0) = A^i,
    // overall factor n^{-1/n}; the B A^i block carries an extra n^{-1/2} so that
    // the cyclic contraction gives the normalized state.
    let scale = (n as f64).powf(-1.0 / n as f64);
    let big = 2 * n;
    let ti_core = column_core(big, big, |i| {
        let mut m = CMat::zeros(big, big);
        for k in 0..n {
            let next = (k + 1) % n;
            let block: CMat = if k == 0 { &b * amat(i) * norm } else { amat(i) };
            m.view_mut((2 * k, 2 * next), (2, 2)).copy_from(&(block * c(scale, 0.0)));
        }
        m
    });
    Ok(WStateGenerators {
        vector: w_state_vector(n)?,
        a0,
        a1,
        b,
        open,
        ti: TiSiteTensor::new(ti_core)?,
    })
}

/// Mixed W state `rho = (1/n) sum_i X_i |0..0><0..0| X_i` with the bond-2
/// separable decomposition `chi^{00} = A^0`, `chi^{11} = A^1`.
///
/// The certificate closes the chain with `<0|` on the left and `|1>` on the
/// right (the trace against `B`), so it contracts to `n * rho`, the scale at
/// which the decomposition is usually written.
pub fn mixed_w_generator(n: usize) -> Result<(PsdOperator, SeparableCertificate)> {
    if n < 2 {
        return Err(Error::Usage("the mixed W state needs n >= 2".into()));
    }
    let dim = 1usize << n;
    let mut diag = vec![ZERO; dim];
    for k in 0..n {
        diag[1 << k] = c(1.0 / n as f64, 0.0);
    }
    let rho = PsdOperator::new(
        SiteSpec::uniform(2, n)?,
        CMat::from_diagonal(&nalgebra::DVector::from_vec(diag)),
    )?;

    let (a0, a1, _) = w_matrices();
    // chi_{ab} = sum_i (A^i)_{ab} |i><i|
    let chi = |a: usize, b: usize| -> CMat {
        let mut m = CMat::zeros(2, 2);
        m[(0, 0)] = a0[(a, b)];
        m[(1, 1)] = a1[(a, b)];
        m
    };
    let mut cores = Vec::with_capacity(n);
    cores.push(Core::from_local_matrices(1, 2, 2, 2, |_, b| chi(0, b))?);
    for _ in 1..n - 1 {
        cores.push(Core::from_local_matrices(2, 2, 2, 2, chi)?);
    }
    cores.push(Core::from_local_matrices(2, 1, 2, 2, |a, _| chi(a, 1))?);
    let cert = SeparableCertificate::new(MpoTrain::new(cores)?)?;
    Ok((rho, cert))
}


#[cfg(test)]
mod tests {
    use super::*;
    use crate::decomp::mpdo::operator_schmidt_rank;
    use crate::decomp::ti::{make_translation_invariant, periodicity_lower_bound, transfer_matrix, PERIODICITY_TOL};
    use crate::linalg::DEFAULT_REL_TOL;
    use crate::tensor::{contract_cyclic, contract_train, translation_defect};

    #[test]
    fn three_site_vector() {
        let w = w_state_vector(3).unwrap();
        let s = 1.0 / 3f64.sqrt();
        for (k, z) in w.data().iter().enumerate() {
            let expected = if [1, 2, 4].contains(&k) { s } else { 0.0 };
            assert!((z - c(expected, 0.0)).norm() < 1e-15);
        }
    }

    #[test]
    fn trace_identities() {
        let (a0, a1, b) = w_matrices();
        assert_eq!((&b * &a1 * &a0 * &a0).trace(), ONE);
        assert_eq!((&b * &a0 * &a0 * &a0).trace(), ZERO);
    }

    #[test]
    fn generators_agree() {
        for n in 2..=6 {
            let g = w_state_generators(n).unwrap();
            assert_eq!(g.ti.bond_dim(), 2 * n);
            assert_eq!(g.open.max_bond(), 2);
            let open = contract_train(&g.open).unwrap();
            let cyc = contract_cyclic(&g.ti, n).unwrap();
            assert!(open.relative_distance(&g.vector) < 1e-12);
            assert!(cyc.relative_distance(&g.vector) < 1e-12);
        }
    }

    #[test]
    fn w_column_osr_two() {
        let w = w_state_vector(3).unwrap();
        assert_eq!(operator_schmidt_rank(&w, DEFAULT_REL_TOL).unwrap(), 2);
    }

    #[test]
    fn transfer_shape_and_roots() {
        let g = w_state_generators(5).unwrap();
        assert_eq!(transfer_matrix(&g.ti).shape(), (100, 100));
        let check = periodicity_lower_bound(&g.ti, 5, PERIODICITY_TOL).unwrap();
        assert!(check.holds);
        assert_eq!(check.lower_bound, 3);
        let g9 = w_state_generators(9).unwrap();
        let check9 = periodicity_lower_bound(&g9.ti, 9, PERIODICITY_TOL).unwrap();
        assert!(check9.holds, "distance {}", check9.max_root_distance);
        assert_eq!(check9.lower_bound, 3);
    }

    #[test]
    fn padded_w_train_reproduces_state() {
        let g = w_state_generators(4).unwrap();
        let site = make_translation_invariant(&g.open).unwrap();
        assert_eq!(site.bond_dim(), 8);
        let back = contract_cyclic(&site, 4).unwrap();
        assert!(back.relative_distance(&g.vector) <= 1e-9);
    }

    #[test]
    fn mixed_w_two_sites() {
        let (rho, cert) = mixed_w_generator(2).unwrap();
        let mut expected = CMat::zeros(4, 4);
        expected[(1, 1)] = c(0.5, 0.0);
        expected[(2, 2)] = c(0.5, 0.0);
        assert!((rho.data() - expected).norm() < 1e-15);
        assert_eq!(cert.inner_dim(), 2);
        assert!(cert.trace_matched_residual(rho.operator()).unwrap() <= 1e-10);
        let scaled = cert.contract().unwrap();
        assert!((scaled.data() - rho.data() * c(2.0, 0.0)).norm() < 1e-14);
    }

    #[test]
    fn mixed_w_properties() {
        for n in 2..=6 {
            let (rho, cert) = mixed_w_generator(n).unwrap();
            assert!(rho.is_diagonal(0.0));
            assert!(translation_defect(rho.operator()).unwrap() <= 1e-12);
            assert!(cert.trace_matched_residual(rho.operator()).unwrap() <= 1e-10);
            let nonzero: Vec<f64> = rho.data().diagonal().iter().map(|z| z.re).filter(|&x| x != 0.0).collect();
            assert_eq!(nonzero.len(), n);
            assert!(nonzero.iter().all(|&x| (x - 1.0 / n as f64).abs() < 1e-15));
            let site = make_translation_invariant(cert.train()).unwrap();
            let check = periodicity_lower_bound(&site, n, PERIODICITY_TOL).unwrap();
            assert!(check.holds, "n = {n}, distance {}", check.max_root_distance);
        }
    }
}
