use std::f64::consts::PI;

use nalgebra::DMatrix;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::decomp::ceil_sqrt;
use crate::linalg::{c, is_psd, numerical_rank_real, to_complex, CMat, RMat, DEFAULT_REL_TOL};
use crate::sampling::{random_complex, random_uniform};

use super::{FactorCertificate, FactorKind, FactorPayload, NonnegMatrix};

/// Acceptance bar for search results, relative to `max|M|`.
pub const ACCEPT_TOL: f64 = 1e-6;
/// Added to multiplicative-update denominators.
const MU_EPS: f64 = 1e-12;
/// Repeated updates of one factor before switching to the other.
const MU_INNER: usize = 3;
const CHECK_EVERY: usize = 10;

/// Budget and seed of a restarted search at inner dimension `r`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct SearchParams {
    pub r: usize,
    pub restarts: usize,
    pub iters: usize,
    pub seed: u64,
}

impl SearchParams {
    pub fn new(r: usize) -> Self {
        Self {
            r,
            restarts: 50,
            iters: 5000,
            seed: 0,
        }
    }

    pub fn with_restarts(mut self, restarts: usize) -> Self {
        self.restarts = restarts;
        self
    }

    pub fn with_iters(mut self, iters: usize) -> Self {
        self.iters = iters;
        self
    }

    pub fn with_seed(mut self, seed: u64) -> Self {
        self.seed = seed;
        self
    }
}

/// Outcome of a search that can also refuse its input.
#[derive(Debug, Clone, PartialEq)]
pub enum SearchOutcome {
    Found(FactorCertificate),
    /// No certificate within the budget; says nothing about the true rank.
    Exhausted,
    /// A necessary condition fails, so no factorization of any size exists.
    Rejected(String),
}

impl SearchOutcome {
    pub fn certificate(&self) -> Option<&FactorCertificate> {
        match self {
            SearchOutcome::Found(c) => Some(c),
            _ => None,
        }
    }
}

/// Independent stream per restart so the outcome does not depend on scheduling.
fn restart_rng(seed: u64, restart: usize) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(restart as u64);
    rng
}

fn run_restarts<T: Send>(params: &SearchParams, f: impl Fn(&mut ChaCha8Rng) -> Option<T> + Sync) -> Option<T> {
    (0..params.restarts)
        .into_par_iter()
        .find_map_first(|k| f(&mut restart_rng(params.seed, k)))
}

fn mean(m: &RMat) -> f64 {
    if m.is_empty() {
        0.0
    } else {
        m.sum() / m.len() as f64
    }
}

fn max_abs(m: &RMat) -> f64 {
    m.iter().fold(0.0, |a, &x| a.max(x.abs()))
}

fn mu_restart(m: &RMat, r: usize, iters: usize, rng: &mut ChaCha8Rng) -> Option<(RMat, RMat)> {
    let (p, q) = m.shape();
    let target = ACCEPT_TOL * max_abs(m);
    let mut a = random_uniform(rng, p, r);
    let mut b = random_uniform(rng, r, q);
    let model = mean(&(&a * &b));
    if model > 0.0 && mean(m) > 0.0 {
        let s = (mean(m) / model).sqrt();
        a *= s;
        b *= s;
    }
    for it in 0..iters {
        for _ in 0..MU_INNER {
            let num = a.transpose() * m;
            let den = (a.transpose() * &a) * &b;
            b.zip_zip_apply(&num, &den, |x, n, d| *x *= n / (d + MU_EPS));
        }
        for _ in 0..MU_INNER {
            let num = m * b.transpose();
            let den = &a * (&b * b.transpose());
            a.zip_zip_apply(&num, &den, |x, n, d| *x *= n / (d + MU_EPS));
        }
        if (it % CHECK_EVERY == 0 || it + 1 == iters) && max_abs(&(m - &a * &b)) <= target {
            return Some((a, b));
        }
    }
    None
}

/// Multiplicative-update search for `M = A B` with `A, B >= 0` and inner dimension `r`.
pub fn nonneg_factorization_search(m: &NonnegMatrix, params: &SearchParams) -> Option<FactorCertificate> {
    if params.r == 0 {
        return None;
    }
    let data = m.data();
    let (a, b) = run_restarts(params, |rng| mu_restart(data, params.r, params.iters, rng))?;
    Some(FactorCertificate::new(
        FactorKind::Nonnegative,
        params.r,
        FactorPayload::Pair {
            a: to_complex(&a),
            b: to_complex(&b),
        },
        data,
    ))
}

/// Interval for the nonnegative rank and the certificate attaining the upper end.
#[derive(Debug, Clone, PartialEq)]
pub struct NonnegRankBounds {
    pub lower: usize,
    pub upper: usize,
    pub certificate: FactorCertificate,
}

/// `lower = rank(M)`; `upper` is the smallest `r` at which the search succeeds,
/// falling back to the trivial factorization of size `min(p, q)`.
pub fn nonneg_rank_bounds(m: &NonnegMatrix, budget: &SearchParams) -> NonnegRankBounds {
    let lower = numerical_rank_real(m.data(), DEFAULT_REL_TOL);
    let (p, q) = (m.rows(), m.cols());
    let cap = p.min(q);
    for r in lower.max(1)..cap {
        if let Some(cert) = nonneg_factorization_search(m, &SearchParams { r, ..*budget }) {
            return NonnegRankBounds {
                lower,
                upper: r,
                certificate: cert,
            };
        }
    }
    let (a, b) = if q <= p {
        (m.data().clone(), RMat::identity(q, q))
    } else {
        (RMat::identity(p, p), m.data().clone())
    };
    NonnegRankBounds {
        lower,
        upper: cap,
        certificate: FactorCertificate::new(
            FactorKind::Nonnegative,
            cap,
            FactorPayload::Pair {
                a: to_complex(&a),
                b: to_complex(&b),
            },
            m.data(),
        ),
    }
}

/// Damped Gauss-Newton fit of `G` in `tr(G^dagger K_j G) = t_j`.
fn fit_gram(g: &mut CMat, ks: &[CMat], targets: &[f64], steps: usize) {
    let r = g.nrows();
    let nv = 2 * r * r;
    let residuals = |g: &CMat| -> Vec<f64> {
        ks.iter()
            .zip(targets)
            .map(|(k, &t)| (g.adjoint() * k * g).trace().re - t)
            .collect()
    };
    let cost = |f: &[f64]| f.iter().map(|x| x * x).sum::<f64>();
    let mut f = residuals(g);
    let mut current = cost(&f);
    let mut mu = -1.0;
    for _ in 0..steps {
        let mut jac = RMat::zeros(ks.len(), nv);
        for (row, k) in ks.iter().enumerate() {
            let kg = k * &*g;
            for a in 0..r {
                for b in 0..r {
                    let z = kg[(a, b)];
                    jac[(row, a * r + b)] = 2.0 * z.re;
                    jac[(row, r * r + a * r + b)] = 2.0 * z.im;
                }
            }
        }
        let jtj = jac.transpose() * &jac;
        let jtf = jac.transpose() * nalgebra::DVector::from_column_slice(&f);
        if mu < 0.0 {
            mu = 1e-3 * jtj.diagonal().max().max(1e-12);
        }
        let mut improved = false;
        for _ in 0..8 {
            let mut lhs = jtj.clone();
            for d in 0..nv {
                lhs[(d, d)] += mu;
            }
            let Some(chol) = lhs.cholesky() else {
                mu *= 4.0;
                continue;
            };
            let delta = chol.solve(&(-&jtf));
            let trial = CMat::from_fn(r, r, |a, b| g[(a, b)] + c(delta[a * r + b], delta[r * r + a * r + b]));
            let ft = residuals(&trial);
            let ct = cost(&ft);
            if ct < current {
                *g = trial;
                f = ft;
                current = ct;
                mu = (mu / 3.0).max(1e-15);
                improved = true;
                break;
            }
            mu *= 4.0;
        }
        if !improved || current == 0.0 {
            break;
        }
    }
}

fn psd_restart(m: &RMat, r: usize, iters: usize, rng: &mut ChaCha8Rng) -> Option<(Vec<CMat>, Vec<CMat>)> {
    let (p, q) = m.shape();
    let target = ACCEPT_TOL * max_abs(m);
    let mut g: Vec<CMat> = (0..p).map(|_| random_complex(rng, r, r)).collect();
    let mut h: Vec<CMat> = (0..q).map(|_| random_complex(rng, r, r)).collect();
    let gram = |x: &CMat| x * x.adjoint();
    let model = |g: &[CMat], h: &[CMat]| -> RMat {
        let e: Vec<CMat> = g.iter().map(gram).collect();
        let f: Vec<CMat> = h.iter().map(gram).collect();
        RMat::from_fn(p, q, |i, j| (&e[i] * f[j].transpose()).trace().re)
    };
    let init = mean(&model(&g, &h));
    if init > 0.0 && mean(m) > 0.0 {
        let s = c((mean(m) / init).powf(0.25), 0.0);
        g.iter_mut().for_each(|x| *x *= s);
        h.iter_mut().for_each(|x| *x *= s);
    }
    for _ in 0..iters {
        let kf: Vec<CMat> = h.iter().map(|x| gram(x).transpose()).collect();
        for (i, gi) in g.iter_mut().enumerate() {
            let t: Vec<f64> = (0..q).map(|j| m[(i, j)]).collect();
            fit_gram(gi, &kf, &t, 2);
        }
        let ke: Vec<CMat> = g.iter().map(|x| gram(x).transpose()).collect();
        for (j, hj) in h.iter_mut().enumerate() {
            let t: Vec<f64> = (0..p).map(|i| m[(i, j)]).collect();
            fit_gram(hj, &ke, &t, 2);
        }
        if max_abs(&(m - model(&g, &h))) <= target {
            return Some((g.iter().map(gram).collect(), h.iter().map(gram).collect()));
        }
    }
    None
}

/// Search for `M_ij = tr(E_i F_j^T)` with complex psd `E_i = G_i G_i^dagger`,
/// `F_j = H_j H_j^dagger` of size `r`, alternating damped Gauss-Newton fits of
/// the Gram factors of each side.
pub fn psd_factorization_search(m: &NonnegMatrix, params: &SearchParams) -> Option<FactorCertificate> {
    if params.r == 0 {
        return None;
    }
    let data = m.data();
    let (e, f) = run_restarts(params, |rng| psd_restart(data, params.r, params.iters, rng))?;
    Some(FactorCertificate::new(
        FactorKind::Psd,
        params.r,
        FactorPayload::PsdTuples { e, f },
        data,
    ))
}

/// `ceil(sqrt(rank M))`, valid for complex psd factorizations.
pub fn psd_rank_lower_bound(m: &NonnegMatrix) -> usize {
    ceil_sqrt(numerical_rank_real(m.data(), DEFAULT_REL_TOL))
}

/// Real roots of `x^3 + p x + q = 0`.
fn depressed_cubic_roots(p: f64, q: f64) -> Vec<f64> {
    let disc = q * q / 4.0 + p * p * p / 27.0;
    if disc > 0.0 {
        let s = disc.sqrt();
        vec![(-q / 2.0 + s).cbrt() + (-q / 2.0 - s).cbrt()]
    } else if p == 0.0 {
        vec![0.0]
    } else {
        let m = 2.0 * (-p / 3.0).sqrt();
        let arg = ((3.0 * q) / (p * m)).clamp(-1.0, 1.0);
        let theta = arg.acos() / 3.0;
        (0..3).map(|k| m * (theta - 2.0 * PI * k as f64 / 3.0).cos()).collect()
    }
}

/// Exact minimization over `x >= 0` of `x^4/4 + p x^2/2 + q x`.
fn best_nonneg_coordinate(p: f64, q: f64) -> f64 {
    let g = |x: f64| x.powi(4) / 4.0 + p * x * x / 2.0 + q * x;
    depressed_cubic_roots(p, q)
        .into_iter()
        .filter(|&x| x > 0.0)
        .fold(0.0, |best, x| if g(x) < g(best) { x } else { best })
}

fn cp_restart(m: &RMat, r: usize, iters: usize, rng: &mut ChaCha8Rng) -> Option<RMat> {
    let n = m.nrows();
    let target = ACCEPT_TOL * max_abs(m);
    let mut a = random_uniform(rng, n, r);
    let model = mean(&(&a * a.transpose()));
    if model > 0.0 && mean(m) > 0.0 {
        a *= (mean(m) / model).sqrt();
    }
    let mut res = m - &a * a.transpose();
    for _ in 0..iters {
        for k in 0..r {
            for i in 0..n {
                let vi = a[(i, k)];
                let mut p = -(res[(i, i)] + vi * vi);
                let mut q = 0.0;
                for j in (0..n).filter(|&j| j != i) {
                    let vj = a[(j, k)];
                    p += vj * vj;
                    q -= vj * (res[(i, j)] + vi * vj);
                }
                let x = best_nonneg_coordinate(p, q);
                let delta = x - vi;
                if delta == 0.0 {
                    continue;
                }
                for j in (0..n).filter(|&j| j != i) {
                    let d = delta * a[(j, k)];
                    res[(i, j)] -= d;
                    res[(j, i)] -= d;
                }
                res[(i, i)] -= x * x - vi * vi;
                a[(i, k)] = x;
            }
        }
        if max_abs(&res) <= target {
            // recompute to shed accumulated update error
            if max_abs(&(m - &a * a.transpose())) <= target {
                return Some(a);
            }
            res = m - &a * a.transpose();
        }
    }
    None
}

/// Search for `M = A A^T` with real `A >= 0` of `r` columns, by exact
/// coordinate descent on `||M - A A^T||_F^2` over the nonnegative orthant.
///
/// Inputs that are not symmetric or not psd are rejected, since every cp
/// matrix is both.
pub fn cp_factorization_search(m: &NonnegMatrix, params: &SearchParams) -> SearchOutcome {
    if !m.is_square() || !m.is_symmetric(1e-10) {
        return SearchOutcome::Rejected("not symmetric".into());
    }
    let data = (m.data() + m.data().transpose()) * 0.5;
    if !is_psd(&to_complex(&data), 1e-10) {
        return SearchOutcome::Rejected("not psd".into());
    }
    if params.r == 0 {
        return SearchOutcome::Exhausted;
    }
    let n = m.rows();
    let is_diagonal = (0..n).all(|i| (0..n).all(|j| i == j || data[(i, j)] == 0.0));
    let support: Vec<usize> = (0..n).filter(|&i| data[(i, i)] > 0.0).collect();
    if is_diagonal && support.len() <= params.r {
        let mut a = RMat::zeros(n, params.r);
        for (k, &i) in support.iter().enumerate() {
            a[(i, k)] = data[(i, i)].sqrt();
        }
        return found_cp(a, params.r, m.data());
    }
    match run_restarts(params, |rng| cp_restart(&data, params.r, params.iters, rng)) {
        Some(a) => found_cp(a, params.r, m.data()),
        None => SearchOutcome::Exhausted,
    }
}

fn found_cp(a: DMatrix<f64>, r: usize, m: &RMat) -> SearchOutcome {
    SearchOutcome::Found(FactorCertificate::new(
        FactorKind::Cp,
        r,
        FactorPayload::Single { a: to_complex(&a) },
        m,
    ))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::nonneg::check_certificate;
    use crate::sampling;
    use rand::SeedableRng;

    fn mat(rows: &[&[f64]]) -> NonnegMatrix {
        NonnegMatrix::from_rows(&rows.iter().map(|r| r.to_vec()).collect::<Vec<_>>()).unwrap()
    }

    #[test]
    fn cubic_roots() {
        let mut roots = depressed_cubic_roots(-7.0, 6.0);
        roots.sort_by(f64::total_cmp);
        for (r, e) in roots.iter().zip([-3.0, 1.0, 2.0]) {
            assert!((r - e).abs() < 1e-12);
        }
        let single = depressed_cubic_roots(1.0, -2.0);
        assert_eq!(single.len(), 1);
        assert!((single[0] - 1.0).abs() < 1e-12);
    }

    #[test]
    fn coordinate_minimizer() {
        // x^4/4 - x^2/2: minimum at x = 1
        assert!((best_nonneg_coordinate(-1.0, 0.0) - 1.0).abs() < 1e-12);
        // increasing on x >= 0
        assert_eq!(best_nonneg_coordinate(1.0, 1.0), 0.0);
    }

    #[test]
    fn nonneg_all_ones_rank_one() {
        let cert = nonneg_factorization_search(&NonnegMatrix::ones(4, 4), &SearchParams::new(1)).unwrap();
        assert!(check_certificate(&cert, &NonnegMatrix::ones(4, 4)).feasible);
    }

    #[test]
    fn nonneg_identity_fails_below_rank() {
        let params = SearchParams::new(2).with_restarts(5).with_iters(500);
        assert!(nonneg_factorization_search(&NonnegMatrix::identity(3), &params).is_none());
    }

    #[test]
    fn nonneg_planted() {
        let mut rng = ChaCha8Rng::seed_from_u64(40);
        let m = sampling::planted_nonneg(&mut rng, 8, 8, 3);
        let cert = nonneg_factorization_search(&m, &SearchParams::new(3).with_seed(1)).unwrap();
        assert!(cert.residual <= 1e-6 * m.max_abs());
        assert!(check_certificate(&cert, &m).feasible);
    }

    #[test]
    fn rank_bounds() {
        let budget = SearchParams::new(1).with_restarts(10).with_iters(2000);
        let b = nonneg_rank_bounds(&NonnegMatrix::identity(4), &budget);
        assert_eq!((b.lower, b.upper), (4, 4));
        let b = nonneg_rank_bounds(&NonnegMatrix::ones(3, 5), &budget);
        assert_eq!((b.lower, b.upper), (1, 1));
        let circ = mat(&[
            &[1.0, 1.0, 0.0, 0.0],
            &[0.0, 1.0, 1.0, 0.0],
            &[0.0, 0.0, 1.0, 1.0],
            &[1.0, 0.0, 0.0, 1.0],
        ]);
        let b = nonneg_rank_bounds(&circ, &budget);
        assert_eq!((b.lower, b.upper), (3, 4));
        assert!(check_certificate(&b.certificate, &circ).feasible);
    }

    #[test]
    fn psd_examples() {
        let ones = NonnegMatrix::ones(3, 3);
        let cert = psd_factorization_search(&ones, &SearchParams::new(1).with_iters(200)).unwrap();
        assert!(check_certificate(&cert, &ones).feasible);
        let id = NonnegMatrix::identity(2);
        let cert = psd_factorization_search(&id, &SearchParams::new(2).with_iters(200)).unwrap();
        assert!(check_certificate(&cert, &id).feasible);
    }

    #[test]
    fn psd_planted() {
        let mut rng = ChaCha8Rng::seed_from_u64(41);
        let planted = sampling::planted_psd(&mut rng, 4, 5, 2);
        let cert = psd_factorization_search(&planted.m, &SearchParams::new(2).with_iters(500)).unwrap();
        assert!(check_certificate(&cert, &planted.m).feasible);
    }

    #[test]
    fn psd_lower_bounds() {
        assert_eq!(psd_rank_lower_bound(&NonnegMatrix::ones(3, 3)), 1);
        assert_eq!(psd_rank_lower_bound(&NonnegMatrix::identity(4)), 2);
    }

    #[test]
    fn cp_examples() {
        let d = mat(&[&[2.0, 0.0], &[0.0, 3.0]]);
        let SearchOutcome::Found(cert) = cp_factorization_search(&d, &SearchParams::new(2)) else {
            panic!("diagonal matrix is cp")
        };
        let FactorPayload::Single { a } = &cert.payload else { panic!() };
        assert!((a[(0, 0)].re - 2f64.sqrt()).abs() < 1e-15);
        assert!((a[(1, 1)].re - 3f64.sqrt()).abs() < 1e-15);

        let swap = mat(&[&[0.0, 1.0], &[1.0, 0.0]]);
        assert_eq!(
            cp_factorization_search(&swap, &SearchParams::new(2)),
            SearchOutcome::Rejected("not psd".into())
        );
        let asym = mat(&[&[1.0, 1.0], &[0.0, 1.0]]);
        assert_eq!(
            cp_factorization_search(&asym, &SearchParams::new(2)),
            SearchOutcome::Rejected("not symmetric".into())
        );
    }

    #[test]
    fn cp_planted() {
        let mut rng = ChaCha8Rng::seed_from_u64(42);
        let m = sampling::planted_cp(&mut rng, 5, 3);
        let outcome = cp_factorization_search(&m, &SearchParams::new(3));
        let cert = outcome.certificate().expect("planted instance is recovered");
        assert!(check_certificate(cert, &m).feasible);
    }
}
