//! Dense multi-site operators, matricization across cuts, and contraction of
//! open (train) and cyclic tensor networks back to dense form.
//!
//! Index convention: the dense row index is lexicographic over the out-indices
//! `(i_1, ..., i_n)` with site 1 most significant; the column index is the same
//! over the in-indices `(j_1, ..., j_n)`.

mod cyclic;
mod train;

pub use cyclic::{contract_cyclic, TiSiteTensor};
pub use train::{contract_train, Core, MpoTrain};

use crate::error::{Error, Result};
use crate::linalg::{frobenius, hermitian_defect, CMat, C64};

/// Relative Hermiticity tolerance used when ingesting psd operators.
pub const HERM_TOL: f64 = 1e-10;
/// Relative tolerance below which negative eigenvalues count as round-off.
pub const PSD_TOL: f64 = 1e-10;

/// Per-site physical dimensions of a square multi-site operator.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct SiteSpec {
    dims: Vec<usize>,
}

impl SiteSpec {
    pub fn new(dims: Vec<usize>) -> Result<Self> {
        if dims.is_empty() {
            return Err(Error::Usage("a site specification needs at least one site".into()));
        }
        if dims.contains(&0) {
            return Err(Error::Usage("site dimensions must be at least 1".into()));
        }
        Ok(Self { dims })
    }

    pub fn uniform(d: usize, n: usize) -> Result<Self> {
        Self::new(vec![d; n])
    }

    pub fn dims(&self) -> &[usize] {
        &self.dims
    }

    pub fn n_sites(&self) -> usize {
        self.dims.len()
    }

    /// Side length of the dense operator, the product of the site dimensions.
    pub fn total_dim(&self) -> usize {
        self.dims.iter().product()
    }
}

/// Mixed-radix encoding with the first digit most significant.
pub fn encode(digits: &[usize], radices: &[usize]) -> usize {
    digits
        .iter()
        .zip(radices)
        .fold(0, |acc, (&d, &r)| acc * r + d)
}

pub fn decode(mut index: usize, radices: &[usize]) -> Vec<usize> {
    let mut digits = vec![0; radices.len()];
    for (slot, &r) in digits.iter_mut().zip(radices).rev() {
        *slot = index % r;
        index /= r;
    }
    digits
}

/// A dense, possibly rectangular operator on an ordered chain of sites.
#[derive(Debug, Clone, PartialEq)]
pub struct Operator {
    out_dims: Vec<usize>,
    in_dims: Vec<usize>,
    data: CMat,
}

impl Operator {
    pub fn new(out_dims: Vec<usize>, in_dims: Vec<usize>, data: CMat) -> Result<Self> {
        if out_dims.is_empty() || out_dims.len() != in_dims.len() {
            return Err(Error::Shape(format!(
                "out/in site lists must be nonempty and of equal length ({} vs {})",
                out_dims.len(),
                in_dims.len()
            )));
        }
        if out_dims.contains(&0) || in_dims.contains(&0) {
            return Err(Error::Shape("site dimensions must be at least 1".into()));
        }
        let rows: usize = out_dims.iter().product();
        let cols: usize = in_dims.iter().product();
        if data.shape() != (rows, cols) {
            return Err(Error::Shape(format!(
                "data is {}x{}, site dimensions require {rows}x{cols}",
                data.nrows(),
                data.ncols()
            )));
        }
        Ok(Self {
            out_dims,
            in_dims,
            data,
        })
    }

    pub fn square(sites: &SiteSpec, data: CMat) -> Result<Self> {
        Self::new(sites.dims().to_vec(), sites.dims().to_vec(), data)
    }

    /// A column vector on the given sites (in-dimension 1 everywhere).
    pub fn column(dims: Vec<usize>, amplitudes: Vec<C64>) -> Result<Self> {
        let n = dims.len();
        let len = amplitudes.len();
        Self::new(dims, vec![1; n], CMat::from_vec(len, 1, amplitudes))
    }

    pub fn out_dims(&self) -> &[usize] {
        &self.out_dims
    }

    pub fn in_dims(&self) -> &[usize] {
        &self.in_dims
    }

    pub fn n_sites(&self) -> usize {
        self.out_dims.len()
    }

    pub fn data(&self) -> &CMat {
        &self.data
    }

    pub fn into_data(self) -> CMat {
        self.data
    }

    pub fn frobenius_norm(&self) -> f64 {
        frobenius(&self.data)
    }

    pub fn is_square_sites(&self) -> bool {
        self.out_dims == self.in_dims
    }

    pub fn adjoint(&self) -> Operator {
        Operator {
            out_dims: self.in_dims.clone(),
            in_dims: self.out_dims.clone(),
            data: self.data.adjoint(),
        }
    }

    /// Operator product `self * other`, site structure `self.out` x `other.in`.
    pub fn compose(&self, other: &Operator) -> Result<Operator> {
        if self.in_dims != other.out_dims {
            return Err(Error::Shape("incompatible site dimensions for product".into()));
        }
        Operator::new(
            self.out_dims.clone(),
            other.in_dims.clone(),
            &self.data * &other.data,
        )
    }

    pub fn add(&self, other: &Operator) -> Result<Operator> {
        if self.out_dims != other.out_dims || self.in_dims != other.in_dims {
            return Err(Error::Shape("incompatible site dimensions for sum".into()));
        }
        Operator::new(
            self.out_dims.clone(),
            self.in_dims.clone(),
            &self.data + &other.data,
        )
    }

    pub fn scale(&self, factor: C64) -> Operator {
        Operator {
            out_dims: self.out_dims.clone(),
            in_dims: self.in_dims.clone(),
            data: &self.data * factor,
        }
    }

    /// Relative Frobenius distance `||self - other|| / ||other||` (absolute if `other` is zero).
    pub fn relative_distance(&self, other: &Operator) -> f64 {
        let diff = frobenius(&(&self.data - &other.data));
        let norm = other.frobenius_norm();
        if norm > 0.0 {
            diff / norm
        } else {
            diff
        }
    }

    /// Flatten to a site-major vector indexed by `(i_1 j_1, i_2 j_2, ..., i_n j_n)`.
    pub fn to_site_major(&self) -> Vec<C64> {
        let n = self.n_sites();
        let radices: Vec<usize> = (0..n)
            .flat_map(|l| [self.out_dims[l], self.in_dims[l]])
            .collect();
        let mut out = vec![C64::new(0.0, 0.0); self.data.len()];
        let mut digits = vec![0; 2 * n];
        for r in 0..self.data.nrows() {
            let i = decode(r, &self.out_dims);
            for cidx in 0..self.data.ncols() {
                let j = decode(cidx, &self.in_dims);
                for l in 0..n {
                    digits[2 * l] = i[l];
                    digits[2 * l + 1] = j[l];
                }
                out[encode(&digits, &radices)] = self.data[(r, cidx)];
            }
        }
        out
    }

    pub fn from_site_major(
        out_dims: Vec<usize>,
        in_dims: Vec<usize>,
        values: &[C64],
    ) -> Result<Operator> {
        let n = out_dims.len();
        let rows: usize = out_dims.iter().product();
        let cols: usize = in_dims.iter().product();
        if values.len() != rows * cols || in_dims.len() != n {
            return Err(Error::Shape("site-major vector has the wrong length".into()));
        }
        let radices: Vec<usize> = (0..n).flat_map(|l| [out_dims[l], in_dims[l]]).collect();
        let mut data = CMat::zeros(rows, cols);
        let mut digits = vec![0; 2 * n];
        for r in 0..rows {
            let i = decode(r, &out_dims);
            for cidx in 0..cols {
                let j = decode(cidx, &in_dims);
                for l in 0..n {
                    digits[2 * l] = i[l];
                    digits[2 * l + 1] = j[l];
                }
                data[(r, cidx)] = values[encode(&digits, &radices)];
            }
        }
        Operator::new(out_dims, in_dims, data)
    }

    /// Off-diagonal Frobenius mass relative to the total norm.
    pub fn off_diagonal_mass(&self) -> f64 {
        let total = self.frobenius_norm();
        let mut off = 0.0;
        for cidx in 0..self.data.ncols() {
            for r in (0..self.data.nrows()).filter(|&r| r != cidx) {
                off += self.data[(r, cidx)].norm_sqr();
            }
        }
        if total > 0.0 {
            off.sqrt() / total
        } else {
            0.0
        }
    }
}

/// A Hermitian operator on square sites that is asserted to be psd.
#[derive(Debug, Clone, PartialEq)]
pub struct PsdOperator {
    sites: SiteSpec,
    op: Operator,
}

impl PsdOperator {
    /// Ingests `data`, symmetrizing it to `(X + X^dagger)/2`. A Hermiticity defect
    /// above [`HERM_TOL`] (relative) is logged but not rejected.
    pub fn new(sites: SiteSpec, data: CMat) -> Result<Self> {
        let op = Operator::square(&sites, data)?;
        let norm = op.frobenius_norm();
        let defect = hermitian_defect(op.data());
        if norm > 0.0 && defect > HERM_TOL * norm {
            log::warn!(
                "operator is not Hermitian (relative defect {:.3e}); symmetrizing",
                defect / norm
            );
        }
        let sym = (op.data() + op.data().adjoint()) * C64::new(0.5, 0.0);
        Ok(Self {
            op: Operator::square(&sites, sym)?,
            sites,
        })
    }

    /// Like [`PsdOperator::new`] but rejects materially non-psd input.
    pub fn checked(sites: SiteSpec, data: CMat, psd_tol: f64) -> Result<Self> {
        let rho = Self::new(sites, data)?;
        if !rho.is_psd(psd_tol) {
            return Err(Error::Domain("operator has a materially negative eigenvalue".into()));
        }
        Ok(rho)
    }

    pub fn from_operator(op: Operator) -> Result<Self> {
        if !op.is_square_sites() {
            return Err(Error::Shape("psd operators need equal in/out site dimensions".into()));
        }
        let sites = SiteSpec::new(op.out_dims().to_vec())?;
        Self::new(sites, op.into_data())
    }

    pub fn sites(&self) -> &SiteSpec {
        &self.sites
    }

    pub fn operator(&self) -> &Operator {
        &self.op
    }

    pub fn data(&self) -> &CMat {
        self.op.data()
    }

    pub fn is_psd(&self, psd_tol: f64) -> bool {
        crate::linalg::is_psd(self.op.data(), psd_tol)
    }

    pub fn is_diagonal(&self, rel_tol: f64) -> bool {
        self.op.off_diagonal_mass() <= rel_tol
    }

    pub fn trace(&self) -> f64 {
        self.op.data().diagonal().iter().map(|z| z.re).sum()
    }
}

/// Matricization across the cut after site `cut` (1-based, `1 <= cut < n`).
///
/// Rows are indexed by `(i_1..i_cut, j_1..j_cut)`, columns by
/// `(i_{cut+1}..i_n, j_{cut+1}..j_n)`, out-indices before in-indices.
pub fn matricize(op: &Operator, cut: usize) -> Result<CMat> {
    let n = op.n_sites();
    if cut == 0 || cut >= n {
        return Err(Error::Usage(format!("cut {cut} out of range 1..{n}")));
    }
    let (row_radices, col_radices) = cut_radices(op.out_dims(), op.in_dims(), cut);
    let rows: usize = row_radices.iter().product();
    let cols: usize = col_radices.iter().product();
    let mut out = CMat::zeros(rows, cols);
    for r in 0..op.data().nrows() {
        let i = decode(r, op.out_dims());
        for cidx in 0..op.data().ncols() {
            let j = decode(cidx, op.in_dims());
            let (mr, mc) = cut_indices(&i, &j, cut, &row_radices, &col_radices);
            out[(mr, mc)] = op.data()[(r, cidx)];
        }
    }
    Ok(out)
}

/// Inverse of [`matricize`].
pub fn unmatricize(
    m: &CMat,
    out_dims: &[usize],
    in_dims: &[usize],
    cut: usize,
) -> Result<Operator> {
    let n = out_dims.len();
    if cut == 0 || cut >= n || in_dims.len() != n {
        return Err(Error::Usage(format!("cut {cut} out of range 1..{n}")));
    }
    let (row_radices, col_radices) = cut_radices(out_dims, in_dims, cut);
    let rows: usize = out_dims.iter().product();
    let cols: usize = in_dims.iter().product();
    if m.shape() != (row_radices.iter().product(), col_radices.iter().product()) {
        return Err(Error::Shape("matricization has the wrong shape".into()));
    }
    let mut data = CMat::zeros(rows, cols);
    for r in 0..rows {
        let i = decode(r, out_dims);
        for cidx in 0..cols {
            let j = decode(cidx, in_dims);
            let (mr, mc) = cut_indices(&i, &j, cut, &row_radices, &col_radices);
            data[(r, cidx)] = m[(mr, mc)];
        }
    }
    Operator::new(out_dims.to_vec(), in_dims.to_vec(), data)
}

fn cut_radices(out_dims: &[usize], in_dims: &[usize], cut: usize) -> (Vec<usize>, Vec<usize>) {
    let rows = out_dims[..cut].iter().chain(&in_dims[..cut]).copied().collect();
    let cols = out_dims[cut..].iter().chain(&in_dims[cut..]).copied().collect();
    (rows, cols)
}

fn cut_indices(
    i: &[usize],
    j: &[usize],
    cut: usize,
    row_radices: &[usize],
    col_radices: &[usize],
) -> (usize, usize) {
    let row_digits: Vec<usize> = i[..cut].iter().chain(&j[..cut]).copied().collect();
    let col_digits: Vec<usize> = i[cut..].iter().chain(&j[cut..]).copied().collect();
    (
        encode(&row_digits, row_radices),
        encode(&col_digits, col_radices),
    )
}

/// `T op T^dagger` for the cyclic translation `T|i_1,...,i_n> = |i_2,...,i_n,i_1>`.
/// All sites must share the same out dimension and the same in dimension.
pub fn cyclic_shift(op: &Operator) -> Result<Operator> {
    let uniform = |d: &[usize]| d.windows(2).all(|w| w[0] == w[1]);
    if !uniform(op.out_dims()) || !uniform(op.in_dims()) {
        return Err(Error::Shape("cyclic shift needs equal dimensions on every site".into()));
    }
    let shift = |digits: &[usize]| -> Vec<usize> {
        let mut s = digits[1..].to_vec();
        s.push(digits[0]);
        s
    };
    let data = op.data();
    let mut out = CMat::zeros(data.nrows(), data.ncols());
    for r in 0..data.nrows() {
        let i = decode(r, op.out_dims());
        let rs = encode(&shift(&i), op.out_dims());
        for cidx in 0..data.ncols() {
            let j = decode(cidx, op.in_dims());
            let cs = encode(&shift(&j), op.in_dims());
            out[(rs, cs)] = data[(r, cidx)];
        }
    }
    Operator::new(op.out_dims().to_vec(), op.in_dims().to_vec(), out)
}

/// `||T op T^dagger - op||_F / ||op||_F`.
pub fn translation_defect(op: &Operator) -> Result<f64> {
    Ok(cyclic_shift(op)?.relative_distance(op))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::{kron, numerical_rank, DEFAULT_REL_TOL, ONE, ZERO};
    use crate::sampling;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn encode_decode_inverse() {
        let radices = [2, 3, 4];
        for k in 0..24 {
            assert_eq!(encode(&decode(k, &radices), &radices), k);
        }
    }

    #[test]
    fn matricize_product_operator_has_rank_one() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let a = sampling::random_complex(&mut rng, 2, 2);
        let b = sampling::random_complex(&mut rng, 3, 3);
        let op = Operator::new(vec![2, 3], vec![2, 3], kron(&a, &b)).unwrap();
        let m = matricize(&op, 1).unwrap();
        assert_eq!(m.shape(), (4, 9));
        assert_eq!(numerical_rank(&m, DEFAULT_REL_TOL), 1);
    }

    #[test]
    fn matricize_round_trip_is_exact() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let sites = SiteSpec::uniform(2, 3).unwrap();
        let rho = sampling::random_psd(&mut rng, &sites, 8);
        for cut in 1..3 {
            let m = matricize(rho.operator(), cut).unwrap();
            let back = unmatricize(&m, &[2, 2, 2], &[2, 2, 2], cut).unwrap();
            assert_eq!(&back, rho.operator());
        }
    }

    #[test]
    fn matricize_rejects_bad_cut() {
        let op = Operator::new(vec![2, 2], vec![2, 2], CMat::identity(4, 4)).unwrap();
        assert!(matricize(&op, 0).is_err());
        assert!(matricize(&op, 2).is_err());
    }

    #[test]
    fn site_major_round_trip() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let data = sampling::random_complex(&mut rng, 6, 4);
        let op = Operator::new(vec![2, 3], vec![2, 2], data).unwrap();
        let v = op.to_site_major();
        let back = Operator::from_site_major(vec![2, 3], vec![2, 2], &v).unwrap();
        assert_eq!(back, op);
    }

    #[test]
    fn shift_moves_first_factor_last() {
        let p0 = crate::linalg::diag(&[ONE, ZERO]);
        let p1 = crate::linalg::diag(&[ZERO, ONE]);
        let op = Operator::new(vec![2, 2, 2], vec![2, 2, 2], kron(&kron(&p0, &p1), &p1)).unwrap();
        let shifted = cyclic_shift(&op).unwrap();
        let expected = kron(&kron(&p1, &p1), &p0);
        assert_eq!(shifted.data(), &expected);
    }

    #[test]
    fn psd_operator_symmetrizes_input() {
        let sites = SiteSpec::new(vec![2]).unwrap();
        let data = CMat::from_row_slice(2, 2, &[ONE, ONE, ZERO, ONE]);
        let rho = PsdOperator::new(sites, data).unwrap();
        assert_eq!(rho.data()[(0, 1)], rho.data()[(1, 0)]);
    }
}
