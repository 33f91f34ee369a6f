use crate::error::{Error, Result};
use crate::linalg::{CMat, C64, ZERO};

use super::Operator;

/// A 4-leg site tensor with legs `(left bond, phys-out, phys-in, right bond)`,
/// stored row-major in that leg order.
#[derive(Debug, Clone, PartialEq)]
pub struct Core {
    left: usize,
    out: usize,
    inp: usize,
    right: usize,
    data: Vec<C64>,
}

impl Core {
    pub fn zeros(left: usize, out: usize, inp: usize, right: usize) -> Self {
        Self {
            left,
            out,
            inp,
            right,
            data: vec![ZERO; left * out * inp * right],
        }
    }

    pub fn from_vec(left: usize, out: usize, inp: usize, right: usize, data: Vec<C64>) -> Result<Self> {
        if data.len() != left * out * inp * right {
            return Err(Error::Shape(format!(
                "core data has {} entries, legs ({left},{out},{inp},{right}) need {}",
                data.len(),
                left * out * inp * right
            )));
        }
        Ok(Self {
            left,
            out,
            inp,
            right,
            data,
        })
    }

    /// Core whose `(alpha, beta)` slot holds the local matrix `f(alpha, beta)` (out x in).
    pub fn from_local_matrices(
        left: usize,
        right: usize,
        out: usize,
        inp: usize,
        f: impl Fn(usize, usize) -> CMat,
    ) -> Result<Self> {
        let mut core = Self::zeros(left, out, inp, right);
        for a in 0..left {
            for b in 0..right {
                let m = f(a, b);
                if m.shape() != (out, inp) {
                    return Err(Error::Shape("local matrix has the wrong shape".into()));
                }
                for i in 0..out {
                    for j in 0..inp {
                        core.set(a, i, j, b, m[(i, j)]);
                    }
                }
            }
        }
        Ok(core)
    }

    #[inline]
    fn offset(&self, a: usize, i: usize, j: usize, b: usize) -> usize {
        ((a * self.out + i) * self.inp + j) * self.right + b
    }

    #[inline]
    pub fn get(&self, a: usize, i: usize, j: usize, b: usize) -> C64 {
        self.data[self.offset(a, i, j, b)]
    }

    #[inline]
    pub fn set(&mut self, a: usize, i: usize, j: usize, b: usize, value: C64) {
        let k = self.offset(a, i, j, b);
        self.data[k] = value;
    }

    pub fn left_dim(&self) -> usize {
        self.left
    }
    pub fn right_dim(&self) -> usize {
        self.right
    }
    pub fn out_dim(&self) -> usize {
        self.out
    }
    pub fn in_dim(&self) -> usize {
        self.inp
    }

    pub fn data(&self) -> &[C64] {
        &self.data
    }

    /// The physical matrix (out x in) sitting at bond indices `(a, b)`.
    pub fn local_matrix(&self, a: usize, b: usize) -> CMat {
        CMat::from_fn(self.out, self.inp, |i, j| self.get(a, i, j, b))
    }

    /// The bond matrix (left x right) at physical indices `(i, j)`.
    pub fn local_matrix_bond(&self, i: usize, j: usize) -> CMat {
        CMat::from_fn(self.left, self.right, |a, b| self.get(a, i, j, b))
    }

    pub fn scaled(&self, factor: C64) -> Core {
        Core {
            data: self.data.iter().map(|z| z * factor).collect(),
            ..self.clone()
        }
    }
}

/// Open-boundary tensor train `sum_{alpha} A^[1]_{alpha_1} (x) A^[2]_{alpha_1 alpha_2} (x) ...`.
#[derive(Debug, Clone, PartialEq)]
pub struct MpoTrain {
    cores: Vec<Core>,
}

impl MpoTrain {
    pub fn new(cores: Vec<Core>) -> Result<Self> {
        let n = cores.len();
        if n == 0 {
            return Err(Error::Usage("a train needs at least one core".into()));
        }
        if cores[0].left_dim() != 1 || cores[n - 1].right_dim() != 1 {
            return Err(Error::Shape("boundary bond dimensions must be 1".into()));
        }
        for l in 0..n - 1 {
            if cores[l].right_dim() != cores[l + 1].left_dim() {
                return Err(Error::BondMismatch {
                    left: l,
                    right: l + 1,
                    left_dim: cores[l].right_dim(),
                    right_dim: cores[l + 1].left_dim(),
                });
            }
        }
        Ok(Self { cores })
    }

    pub fn cores(&self) -> &[Core] {
        &self.cores
    }

    pub fn n_sites(&self) -> usize {
        self.cores.len()
    }

    /// The `n - 1` internal bond dimensions.
    pub fn bond_dims(&self) -> Vec<usize> {
        self.cores[..self.cores.len() - 1]
            .iter()
            .map(Core::right_dim)
            .collect()
    }

    /// Largest internal bond (1 for a single site).
    pub fn max_bond(&self) -> usize {
        self.bond_dims().into_iter().max().unwrap_or(1)
    }

    pub fn out_dims(&self) -> Vec<usize> {
        self.cores.iter().map(Core::out_dim).collect()
    }

    pub fn in_dims(&self) -> Vec<usize> {
        self.cores.iter().map(Core::in_dim).collect()
    }
}

/// Evaluates the open-boundary sum left to right; the intermediate object is
/// a (prefix physical index) x (current bond) array, never the full bond sum.
pub fn contract_train(train: &MpoTrain) -> Result<Operator> {
    let mut acc: Vec<C64> = vec![C64::new(1.0, 0.0)];
    let mut prefix = 1usize;
    let mut bond = 1usize;
    for core in train.cores() {
        if core.left_dim() != bond {
            return Err(Error::Shape("bond mismatch during contraction".into()));
        }
        let phys = core.out_dim() * core.in_dim();
        let next_bond = core.right_dim();
        let mut next = vec![ZERO; prefix * phys * next_bond];
        for p in 0..prefix {
            for a in 0..bond {
                let w = acc[p * bond + a];
                if w == ZERO {
                    continue;
                }
                for i in 0..core.out_dim() {
                    for j in 0..core.in_dim() {
                        let s = i * core.in_dim() + j;
                        let base = (p * phys + s) * next_bond;
                        for b in 0..next_bond {
                            next[base + b] += w * core.get(a, i, j, b);
                        }
                    }
                }
            }
        }
        acc = next;
        prefix *= phys;
        bond = next_bond;
    }
    Operator::from_site_major(train.out_dims(), train.in_dims(), &acc)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::ONE;

    #[test]
    fn identity_train_contracts_to_identity() {
        let id = Core::from_local_matrices(1, 1, 2, 2, |_, _| CMat::identity(2, 2)).unwrap();
        let train = MpoTrain::new(vec![id.clone(), id.clone(), id]).unwrap();
        let op = contract_train(&train).unwrap();
        assert_eq!(op.data(), &CMat::identity(8, 8));
    }

    #[test]
    fn rejects_mismatched_bonds() {
        let a = Core::zeros(1, 2, 2, 2);
        let b = Core::zeros(3, 2, 2, 1);
        assert!(matches!(
            MpoTrain::new(vec![a, b]),
            Err(Error::BondMismatch { .. })
        ));
    }

    #[test]
    fn rejects_open_boundary() {
        let a = Core::zeros(2, 2, 2, 1);
        assert!(MpoTrain::new(vec![a]).is_err());
    }

    #[test]
    fn two_site_bond_two_sum() {
        // I (x) I + X (x) X as a bond-2 train
        let x = CMat::from_row_slice(2, 2, &[ZERO, ONE, ONE, ZERO]);
        let id = CMat::identity(2, 2);
        let xl = x.clone();
        let first = Core::from_local_matrices(1, 2, 2, 2, |_, b| if b == 0 { id.clone() } else { xl.clone() })
            .unwrap();
        let second = Core::from_local_matrices(2, 1, 2, 2, |a, _| {
            if a == 0 {
                CMat::identity(2, 2)
            } else {
                x.clone()
            }
        })
        .unwrap();
        let op = contract_train(&MpoTrain::new(vec![first, second]).unwrap()).unwrap();
        let expected = CMat::identity(4, 4) + x.kronecker(&x);
        assert_eq!(op.data(), &expected);
    }
}
