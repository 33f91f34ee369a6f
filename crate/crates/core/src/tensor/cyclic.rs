use crate::error::{Error, Result};
use crate::linalg::{C64, ZERO};

use super::{Core, Operator};

/// Single site tensor `A^{i,j}_{alpha,beta}` of a translation-invariant cyclic network.
#[derive(Debug, Clone, PartialEq)]
pub struct TiSiteTensor {
    core: Core,
}

impl TiSiteTensor {
    pub fn new(core: Core) -> Result<Self> {
        if core.left_dim() != core.right_dim() {
            return Err(Error::Shape(format!(
                "cyclic site tensor needs equal bond legs, got {} and {}",
                core.left_dim(),
                core.right_dim()
            )));
        }
        Ok(Self { core })
    }

    pub fn core(&self) -> &Core {
        &self.core
    }

    pub fn bond_dim(&self) -> usize {
        self.core.left_dim()
    }

    pub fn out_dim(&self) -> usize {
        self.core.out_dim()
    }

    pub fn in_dim(&self) -> usize {
        self.core.in_dim()
    }
}

/// `sum_{alpha} A_{a1 a2} (x) A_{a2 a3} (x) ... (x) A_{an a1}` as a dense operator.
pub fn contract_cyclic(site: &TiSiteTensor, n: usize) -> Result<Operator> {
    if n == 0 {
        return Err(Error::Usage("cyclic contraction needs n >= 1".into()));
    }
    let core = site.core();
    let d = site.bond_dim();
    let (o, i_dim) = (core.out_dim(), core.in_dim());
    let phys = o * i_dim;

    // acc[(prefix, a0, b)]: open string of matrices starting at bond a0, ending at b.
    let mut prefix = 1usize;
    let mut acc = vec![ZERO; d * d];
    for a in 0..d {
        acc[a * d + a] = C64::new(1.0, 0.0);
    }
    for _ in 0..n {
        let mut next = vec![ZERO; prefix * phys * d * d];
        for p in 0..prefix {
            for a0 in 0..d {
                for b in 0..d {
                    let w = acc[(p * d + a0) * d + b];
                    if w == ZERO {
                        continue;
                    }
                    for i in 0..o {
                        for j in 0..i_dim {
                            let s = i * i_dim + j;
                            let base = ((p * phys + s) * d + a0) * d;
                            for c in 0..d {
                                next[base + c] += w * core.get(b, i, j, c);
                            }
                        }
                    }
                }
            }
        }
        acc = next;
        prefix *= phys;
    }
    let values: Vec<C64> = (0..prefix)
        .map(|p| (0..d).map(|a| acc[(p * d + a) * d + a]).sum())
        .collect();
    Operator::from_site_major(vec![o; n], vec![i_dim; n], &values)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::{kron_chain, CMat};
    use crate::sampling;
    use crate::tensor::translation_defect;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn bond_one_gives_tensor_power() {
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        let a = sampling::random_complex(&mut rng, 2, 2);
        let ac = a.clone();
        let core = Core::from_local_matrices(1, 1, 2, 2, move |_, _| ac.clone()).unwrap();
        let site = TiSiteTensor::new(core).unwrap();
        let op = contract_cyclic(&site, 3).unwrap();
        let expected = kron_chain(&[a.clone(), a.clone(), a]).unwrap();
        assert!((op.data() - expected).norm() < 1e-12);
    }

    #[test]
    fn random_cyclic_network_is_translation_invariant() {
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        for n in 2..5 {
            let core = Core::from_local_matrices(3, 3, 2, 2, |_, _| CMat::zeros(2, 2)).unwrap();
            let mut core = core;
            for a in 0..3 {
                for b in 0..3 {
                    let m = sampling::random_complex(&mut rng, 2, 2);
                    for i in 0..2 {
                        for j in 0..2 {
                            core.set(a, i, j, b, m[(i, j)]);
                        }
                    }
                }
            }
            let op = contract_cyclic(&TiSiteTensor::new(core).unwrap(), n).unwrap();
            assert!(translation_defect(&op).unwrap() <= 1e-12);
        }
    }

    #[test]
    fn unequal_bonds_rejected() {
        assert!(TiSiteTensor::new(Core::zeros(2, 2, 2, 3)).is_err());
    }
}
