use crate::error::Result;
use crate::linalg::{numerical_rank, svd_split, CMat};
use crate::tensor::{matricize, Core, MpoTrain, Operator};

/// MPO form of `op` by successive SVDs, together with its operator Schmidt rank.
///
/// The sweep runs from the last site to the first. Each split keeps the
/// orthonormal right factor as the core and passes the left factor (which
/// carries the singular values) on, so every bond equals the numerical rank
/// of the corresponding matricization. Works for rectangular operators and
/// column vectors.
pub fn mpo_train_form(op: &Operator, rel_tol: f64) -> Result<(MpoTrain, usize)> {
    let n = op.n_sites();
    let outs = op.out_dims();
    let ins = op.in_dims();
    let phys: Vec<usize> = (0..n).map(|l| outs[l] * ins[l]).collect();
    let values = op.to_site_major();

    let mut prefix: usize = phys.iter().product();
    let mut bond = 1usize;
    // rows: physical prefix of sites 1..=l, columns: (phys_{l}, bond)
    let mut rest = CMat::from_row_slice(prefix, 1, &values);
    let mut cores = Vec::with_capacity(n);
    for l in (1..n).rev() {
        prefix /= phys[l];
        let m = CMat::from_fn(prefix, phys[l] * bond, |p, c| rest[(p * phys[l] + c / bond, c % bond)]);
        let split = svd_split(&m, rel_tol);
        cores.push(core_from_rows(&split.right, outs[l], ins[l], bond)?);
        rest = split.left;
        bond = split.rank;
    }
    let first = CMat::from_fn(1, phys[0] * bond, |_, c| rest[(c / bond, c % bond)]);
    cores.push(core_from_rows(&first, outs[0], ins[0], bond)?);
    cores.reverse();
    let train = MpoTrain::new(cores)?;
    let osr = if n == 1 {
        usize::from(op.frobenius_norm() > 0.0)
    } else {
        train.bond_dims().into_iter().max().unwrap_or(0)
    };
    Ok((train, osr))
}

/// Core with left bond = `rows.nrows()`, columns of `rows` indexed by `(i, j, right)`.
fn core_from_rows(rows: &CMat, out: usize, inp: usize, right: usize) -> Result<Core> {
    let left = rows.nrows();
    let mut data = Vec::with_capacity(rows.len());
    for a in 0..left {
        for c in 0..rows.ncols() {
            data.push(rows[(a, c)]);
        }
    }
    Core::from_vec(left, out, inp, right, data)
}

/// Operator Schmidt rank: the largest bond of the SVD train form.
pub fn operator_schmidt_rank(op: &Operator, rel_tol: f64) -> Result<usize> {
    Ok(mpo_train_form(op, rel_tol)?.1)
}

/// Numerical rank of the matricization across each of the `n - 1` cuts.
pub fn cut_ranks(op: &Operator, rel_tol: f64) -> Result<Vec<usize>> {
    (1..op.n_sites())
        .map(|cut| Ok(numerical_rank(&matricize(op, cut)?, rel_tol)))
        .collect()
}
