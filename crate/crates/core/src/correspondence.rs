//! Converters between decompositions of bipartite diagonal psd operators
//! `sigma = sum_ij m_ij |i,j><i,j|` and factorizations of the nonnegative
//! matrix `M = (m_ij)`, one pair per factorization kind.

use std::fmt;
use std::str::FromStr;

use crate::decomp::{
    ceil_sqrt, local_purification_spectral, operator_schmidt_rank, q_sqrt_rank,
    PurificationCertificate, RankInterval, SeparableCertificate, DEFAULT_MAX_ENUM_RANK,
};
use crate::error::{Error, Result};
use crate::linalg::{c, diag, hermitian_eigen, numerical_rank_real, CMat, RMat, C64, DEFAULT_REL_TOL};
use crate::nonneg::{
    check_certificate, cp_factorization_search, cpsdt_construct, minimal_factorization,
    nonneg_rank_bounds, psd_factorization_search, psd_rank_lower_bound, sqrt_rank,
    symmetric_factorization, FactorCertificate, FactorKind, FactorPayload, NonnegMatrix,
    SearchOutcome, SearchParams, DEFAULT_SIGN_BUDGET,
};
use crate::tensor::{contract_train, Core, MpoTrain, Operator, PsdOperator, SiteSpec};

/// Relative off-diagonal mass tolerated when reading a diagonal operator.
pub const DIAG_TOL: f64 = 1e-10;
/// Acceptance bar for certificates handed to the converters, relative to `max|M|`.
const INPUT_BAR: f64 = 1e-6;

/// A bipartite diagonal operator described by its matrix of diagonal entries.
#[derive(Debug, Clone, PartialEq)]
pub struct DiagBipartite {
    m: NonnegMatrix,
}

impl DiagBipartite {
    pub fn new(m: NonnegMatrix) -> Self {
        Self { m }
    }

    pub fn matrix(&self) -> &NonnegMatrix {
        &self.m
    }

    pub fn d1(&self) -> usize {
        self.m.rows()
    }

    pub fn d2(&self) -> usize {
        self.m.cols()
    }

    pub fn sigma(&self) -> PsdOperator {
        diag_embed(&self.m)
    }
}

/// `sigma = sum_ij m_ij |i,j><i,j|` on sites `(p, q)`.
pub fn diag_embed(m: &NonnegMatrix) -> PsdOperator {
    let (p, q) = (m.rows(), m.cols());
    let mut data = CMat::zeros(p * q, p * q);
    for i in 0..p {
        for j in 0..q {
            data[(i * q + j, i * q + j)] = c(m.get(i, j), 0.0);
        }
    }
    let sites = SiteSpec::new(vec![p, q]).expect("matrix dimensions are positive");
    PsdOperator::new(sites, data).expect("diagonal operator matches its sites")
}

/// The matrix of diagonal entries of a bipartite diagonal operator.
pub fn diag_extract(sigma: &PsdOperator) -> Result<NonnegMatrix> {
    let dims = sigma.sites().dims();
    if dims.len() != 2 {
        return Err(Error::Shape(format!(
            "expected a bipartite operator, got {} sites",
            dims.len()
        )));
    }
    let mass = sigma.operator().off_diagonal_mass();
    if mass > DIAG_TOL {
        return Err(Error::NotDiagonal { mass });
    }
    let (p, q) = (dims[0], dims[1]);
    let data = sigma.data();
    NonnegMatrix::new(RMat::from_fn(p, q, |i, j| data[(i * q + j, i * q + j)].re))
}

/// The seven items of the correspondence.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum CorrespondenceKind {
    /// rank vs operator Schmidt rank.
    I,
    /// nonnegative rank vs separable rank.
    II,
    /// psd rank vs purification rank.
    III,
    /// symmetric rank vs symmetric MPO form.
    IV,
    /// cp rank vs symmetric separable form.
    V,
    /// cpsdt rank vs symmetric purification.
    VI,
    /// square root rank vs quantum square root rank.
    VII,
}

impl CorrespondenceKind {
    pub const ALL: [CorrespondenceKind; 7] = [
        CorrespondenceKind::I,
        CorrespondenceKind::II,
        CorrespondenceKind::III,
        CorrespondenceKind::IV,
        CorrespondenceKind::V,
        CorrespondenceKind::VI,
        CorrespondenceKind::VII,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            CorrespondenceKind::I => "i",
            CorrespondenceKind::II => "ii",
            CorrespondenceKind::III => "iii",
            CorrespondenceKind::IV => "iv",
            CorrespondenceKind::V => "v",
            CorrespondenceKind::VI => "vi",
            CorrespondenceKind::VII => "vii",
        }
    }

    /// The factorization kind on the matrix side.
    pub fn factor_kind(self) -> FactorKind {
        match self {
            CorrespondenceKind::I => FactorKind::Minimal,
            CorrespondenceKind::II => FactorKind::Nonnegative,
            CorrespondenceKind::III => FactorKind::Psd,
            CorrespondenceKind::IV => FactorKind::Symmetric,
            CorrespondenceKind::V => FactorKind::Cp,
            CorrespondenceKind::VI => FactorKind::Cpsdt,
            CorrespondenceKind::VII => FactorKind::HadamardRoot,
        }
    }

    pub fn is_symmetric(self) -> bool {
        matches!(
            self,
            CorrespondenceKind::IV | CorrespondenceKind::V | CorrespondenceKind::VI
        )
    }

    /// Both ranks are computed exactly for these kinds.
    pub fn is_exact(self) -> bool {
        matches!(
            self,
            CorrespondenceKind::I | CorrespondenceKind::IV | CorrespondenceKind::VII
        )
    }
}

impl fmt::Display for CorrespondenceKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for CorrespondenceKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        CorrespondenceKind::ALL
            .into_iter()
            .find(|k| k.as_str() == s)
            .ok_or_else(|| Error::Usage(format!("unknown correspondence kind '{s}'")))
    }
}

/// State-side certificate produced from (or consumed by) a factorization.
#[derive(Debug, Clone, PartialEq)]
pub enum StateCertificate {
    /// Two-site MPO form of `sigma`.
    Mpo(MpoTrain),
    Separable(SeparableCertificate),
    Purification(PurificationCertificate),
    /// `sigma = sum_a A_a (x) A_a` with the local matrices `A_a`.
    SymmetricForm { locals: Vec<CMat>, psd: bool },
    /// `L = sum_k L_k (x) L_k` with `sigma = L L^dagger`.
    SymmetricPurification { locals: Vec<CMat> },
    /// Hermitian `tau` with `tau^2 = sigma`.
    HermitianRoot(Operator),
}

impl StateCertificate {
    pub fn name(&self) -> &'static str {
        match self {
            StateCertificate::Mpo(_) => "mpo",
            StateCertificate::Separable(_) => "separable",
            StateCertificate::Purification(_) => "purification",
            StateCertificate::SymmetricForm { psd: false, .. } => "symmetric-form",
            StateCertificate::SymmetricForm { psd: true, .. } => "symmetric-separable",
            StateCertificate::SymmetricPurification { .. } => "symmetric-purification",
            StateCertificate::HermitianRoot(_) => "hermitian-root",
        }
    }

    /// Bond dimension of the decomposition, or `osr(tau)` for a Hermitian root.
    pub fn inner_dim(&self) -> Result<usize> {
        Ok(match self {
            StateCertificate::Mpo(t) => t.max_bond(),
            StateCertificate::Separable(s) => s.inner_dim(),
            StateCertificate::Purification(p) => p.l.max_bond(),
            StateCertificate::SymmetricForm { locals, .. } => locals.len(),
            StateCertificate::SymmetricPurification { locals } => locals.len(),
            StateCertificate::HermitianRoot(tau) => operator_schmidt_rank(tau, DEFAULT_REL_TOL)?,
        })
    }

    /// The operator `sigma` the certificate represents.
    pub fn reconstruct(&self) -> Result<Operator> {
        match self {
            StateCertificate::Mpo(t) => contract_train(t),
            StateCertificate::Separable(s) => s.contract(),
            StateCertificate::Purification(p) => p.reconstruct(),
            StateCertificate::SymmetricForm { locals, .. } => {
                let (p, _) = locals.first().map_or((0, 0), |m| m.shape());
                let mut acc = CMat::zeros(p * p, p * p);
                for a in locals {
                    acc += a.kronecker(a);
                }
                Operator::new(vec![p, p], vec![p, p], acc)
            }
            StateCertificate::SymmetricPurification { locals } => {
                let (p, aux) = locals.first().map_or((0, 0), |m| m.shape());
                let mut l = CMat::zeros(p * p, aux * aux);
                for a in locals {
                    l += a.kronecker(a);
                }
                let l = Operator::new(vec![p, p], vec![aux, aux], l)?;
                l.compose(&l.adjoint())
            }
            StateCertificate::HermitianRoot(tau) => tau.compose(tau),
        }
    }
}

fn diag_matrix(values: impl Iterator<Item = C64>) -> CMat {
    diag(&values.collect::<Vec<_>>())
}

fn require_symmetric(kind: CorrespondenceKind, m: &NonnegMatrix) -> Result<()> {
    if kind.is_symmetric() && !m.is_symmetric(1e-10) {
        return Err(Error::NotSymmetric {
            defect: m.symmetry_defect(),
        });
    }
    Ok(())
}

/// `X` with `E = X^dagger X`, from the spectral decomposition (`X = Lambda^{1/2} U^dagger`).
fn gram_root(e: &CMat) -> CMat {
    let h = (e + e.adjoint()) * c(0.5, 0.0);
    let eig = hermitian_eigen(&h);
    let r = e.nrows();
    CMat::from_fn(r, r, |t, k| {
        c(eig.values[t].max(0.0).sqrt(), 0.0) * eig.vectors[(k, t)].conj()
    })
}

/// Local matrices `L_k` (`d x d r`) with `L_k[i, (i, t)] = conj(X_i[t, k])`,
/// so that `sum_s (L_k)_{is} conj((L_l)_{is}) = E_i[k, l]`.
fn gram_locals(es: &[CMat], r: usize) -> Vec<CMat> {
    let d = es.len();
    let roots: Vec<CMat> = es.iter().map(gram_root).collect();
    (0..r)
        .map(|k| {
            let mut m = CMat::zeros(d, d * r);
            for (i, x) in roots.iter().enumerate() {
                for t in 0..r {
                    m[(i, i * r + t)] = x[(t, k)].conj();
                }
            }
            m
        })
        .collect()
}

/// Gram matrices `E_i[k, l] = sum_s (L_k)_{is} conj((L_l)_{is})`.
fn gram_from_locals(locals: &[CMat]) -> Vec<CMat> {
    let r = locals.len();
    let d = locals.first().map_or(0, |m| m.nrows());
    (0..d)
        .map(|i| {
            CMat::from_fn(r, r, |k, l| {
                locals[k]
                    .row(i)
                    .iter()
                    .zip(locals[l].row(i).iter())
                    .map(|(a, b)| a * b.conj())
                    .sum()
            })
        })
        .collect()
}

fn two_site_train(first: Vec<CMat>, second: Vec<CMat>) -> Result<MpoTrain> {
    let r = first.len();
    let (o1, i1) = first.first().map_or((1, 1), |m| m.shape());
    let (o2, i2) = second.first().map_or((1, 1), |m| m.shape());
    let c1 = Core::from_local_matrices(1, r, o1, i1, |_, k| first[k].clone())?;
    let c2 = Core::from_local_matrices(r, 1, o2, i2, |k, _| second[k].clone())?;
    MpoTrain::new(vec![c1, c2])
}

/// Builds the state-side certificate for `sigma = diag_embed(M)` from a
/// factorization of `M`.
pub fn factorization_to_decomposition(
    kind: CorrespondenceKind,
    cert: &FactorCertificate,
    target: &DiagBipartite,
) -> Result<StateCertificate> {
    if cert.kind != kind.factor_kind() {
        return Err(Error::KindMismatch {
            expected: kind.factor_kind().to_string(),
            found: cert.kind.to_string(),
        });
    }
    let m = target.matrix();
    require_symmetric(kind, m)?;
    if cert.residual > INPUT_BAR * m.max_abs() {
        return Err(Error::Domain(format!(
            "certificate does not reproduce the matrix (error {:.3e})",
            cert.residual
        )));
    }
    let (p, q) = (m.rows(), m.cols());
    let r = cert.inner_dim;
    match (kind, &cert.payload) {
        (CorrespondenceKind::I | CorrespondenceKind::II, FactorPayload::Pair { a, b }) => {
            let first = (0..r).map(|k| diag_matrix((0..p).map(|i| a[(i, k)]))).collect();
            let second = (0..r).map(|k| diag_matrix((0..q).map(|j| b[(k, j)]))).collect();
            let train = two_site_train(first, second)?;
            if kind == CorrespondenceKind::I {
                Ok(StateCertificate::Mpo(train))
            } else {
                Ok(StateCertificate::Separable(SeparableCertificate::new(train)?))
            }
        }
        (CorrespondenceKind::III, FactorPayload::PsdTuples { e, f }) => {
            let train = two_site_train(gram_locals(e, r), gram_locals(f, r))?;
            let sigma = target.sigma();
            Ok(StateCertificate::Purification(PurificationCertificate::from_train(
                train,
                sigma.operator(),
                DEFAULT_REL_TOL,
            )?))
        }
        (CorrespondenceKind::IV | CorrespondenceKind::V, FactorPayload::Single { a }) => {
            let locals = (0..r).map(|k| diag_matrix((0..p).map(|i| a[(i, k)]))).collect();
            Ok(StateCertificate::SymmetricForm {
                locals,
                psd: kind == CorrespondenceKind::V,
            })
        }
        (CorrespondenceKind::VI, FactorPayload::PsdTuples { e, .. }) => {
            Ok(StateCertificate::SymmetricPurification {
                locals: gram_locals(e, r),
            })
        }
        (CorrespondenceKind::VII, FactorPayload::HadamardRoot { root, .. }) => {
            let entries: Vec<C64> = (0..p)
                .flat_map(|i| (0..q).map(move |j| (i, j)))
                .map(|(i, j)| c(root[(i, j)], 0.0))
                .collect();
            Ok(StateCertificate::HermitianRoot(Operator::new(
                vec![p, q],
                vec![p, q],
                diag(&entries),
            )?))
        }
        _ => Err(Error::KindMismatch {
            expected: kind.factor_kind().to_string(),
            found: "payload of another shape".into(),
        }),
    }
}

fn diagonal_of(m: &CMat) -> Vec<C64> {
    (0..m.nrows().min(m.ncols())).map(|i| m[(i, i)]).collect()
}

/// Reads a factorization of `M` off a decomposition of the diagonal
/// bipartite operator `sigma` it represents.
pub fn decomposition_to_factorization(
    kind: CorrespondenceKind,
    state: &StateCertificate,
) -> Result<FactorCertificate> {
    let sigma = PsdOperator::from_operator(state.reconstruct()?)?;
    let m = diag_extract(&sigma)?;
    require_symmetric(kind, &m)?;
    let (p, q) = (m.rows(), m.cols());
    let mismatch = || Error::KindMismatch {
        expected: kind.to_string(),
        found: state.name().to_string(),
    };
    let two_site = |t: &MpoTrain| -> Result<(Vec<CMat>, Vec<CMat>)> {
        if t.n_sites() != 2 {
            return Err(Error::Shape("expected a two-site train".into()));
        }
        let r = t.bond_dims()[0];
        let first = (0..r).map(|k| t.cores()[0].local_matrix(0, k)).collect();
        let second = (0..r).map(|k| t.cores()[1].local_matrix(k, 0)).collect();
        Ok((first, second))
    };
    let nonneg = |z: C64| c(z.re.max(0.0), 0.0);
    let (payload, r) = match (kind, state) {
        (CorrespondenceKind::I, StateCertificate::Mpo(train)) => {
            let (first, second) = two_site(train)?;
            let r = first.len();
            let a = CMat::from_fn(p, r, |i, k| diagonal_of(&first[k])[i]);
            let b = CMat::from_fn(r, q, |k, j| diagonal_of(&second[k])[j]);
            (FactorPayload::Pair { a, b }, r)
        }
        (CorrespondenceKind::II, StateCertificate::Separable(s)) => {
            let (first, second) = two_site(s.train())?;
            let r = first.len();
            let a = CMat::from_fn(p, r, |i, k| nonneg(diagonal_of(&first[k])[i]));
            let b = CMat::from_fn(r, q, |k, j| nonneg(diagonal_of(&second[k])[j]));
            (FactorPayload::Pair { a, b }, r)
        }
        (CorrespondenceKind::III, StateCertificate::Purification(pc)) => {
            let (first, second) = two_site(&pc.l)?;
            let r = first.len();
            (
                FactorPayload::PsdTuples {
                    e: gram_from_locals(&first),
                    f: gram_from_locals(&second),
                },
                r,
            )
        }
        (
            CorrespondenceKind::IV | CorrespondenceKind::V,
            StateCertificate::SymmetricForm { locals, .. },
        ) => {
            let r = locals.len();
            let a = CMat::from_fn(p, r, |i, k| locals[k][(i, i)]);
            let a = if kind == CorrespondenceKind::V { a.map(nonneg) } else { a };
            (FactorPayload::Single { a }, r)
        }
        (CorrespondenceKind::VI, StateCertificate::SymmetricPurification { locals }) => {
            let e = gram_from_locals(locals);
            (FactorPayload::PsdTuples { f: e.clone(), e }, locals.len())
        }
        (CorrespondenceKind::VII, StateCertificate::HermitianRoot(tau)) => {
            let tau = PsdOperator::from_operator(tau.clone()).map(|t| t.operator().clone())?;
            if tau.off_diagonal_mass() > DIAG_TOL {
                return Err(Error::NotDiagonal {
                    mass: tau.off_diagonal_mass(),
                });
            }
            let root = RMat::from_fn(p, q, |i, j| tau.data()[(i * q + j, i * q + j)].re);
            let signs = root
                .transpose()
                .iter()
                .filter(|x| **x != 0.0)
                .map(|&x| if x > 0.0 { 1 } else { -1 })
                .collect();
            let r = numerical_rank_real(&root, DEFAULT_REL_TOL);
            (FactorPayload::HadamardRoot { signs, root }, r)
        }
        _ => return Err(mismatch()),
    };
    Ok(FactorCertificate::new(kind.factor_kind(), r, payload, m.data()))
}

/// Outcome of comparing the two sides of one correspondence item.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Verdict {
    ExactMatch,
    IntervalsConsistent,
    Violation,
    Skipped,
}

impl Verdict {
    pub fn as_str(self) -> &'static str {
        match self {
            Verdict::ExactMatch => "exact-match",
            Verdict::IntervalsConsistent => "intervals-consistent",
            Verdict::Violation => "violation",
            Verdict::Skipped => "skipped",
        }
    }
}

impl fmt::Display for Verdict {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

/// Search and enumeration budgets for [`verify_correspondence`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct VerifyBudget {
    pub search: SearchParams,
    pub sign_budget: u128,
    pub max_enum_rank: usize,
    pub rel_tol: f64,
}

impl Default for VerifyBudget {
    fn default() -> Self {
        Self {
            search: SearchParams::new(1).with_restarts(20).with_iters(2000),
            sign_budget: DEFAULT_SIGN_BUDGET,
            max_enum_rank: DEFAULT_MAX_ENUM_RANK,
            rel_tol: DEFAULT_REL_TOL,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct CorrespondenceReport {
    pub kind: CorrespondenceKind,
    pub matrix_side: Option<RankInterval>,
    pub state_side: Option<RankInterval>,
    pub verdict: Verdict,
    /// Inner dimension preserved through matrix -> state -> matrix.
    pub round_trip: Option<bool>,
    pub notes: Vec<String>,
    /// The matrix-side certificate used for the bridge, when one was found.
    pub factor: Option<FactorCertificate>,
    /// The state-side certificate built from it.
    pub state: Option<StateCertificate>,
}

impl CorrespondenceReport {
    fn skipped(kind: CorrespondenceKind, note: String) -> Self {
        Self {
            kind,
            matrix_side: None,
            state_side: None,
            verdict: Verdict::Skipped,
            round_trip: None,
            notes: vec![note],
            factor: None,
            state: None,
        }
    }
}

struct Bridge {
    state: StateCertificate,
    preserved: bool,
    feasible: bool,
}

fn bridge(kind: CorrespondenceKind, cert: &FactorCertificate, target: &DiagBipartite) -> Result<Bridge> {
    let state = factorization_to_decomposition(kind, cert, target)?;
    let back = decomposition_to_factorization(kind, &state)?;
    let preserved = state.inner_dim()? == cert.inner_dim && back.inner_dim == cert.inner_dim;
    let feasible = check_certificate(&back, target.matrix()).feasible;
    Ok(Bridge {
        state,
        preserved,
        feasible,
    })
}

/// Drives both converters for one item and compares the two sides: exact
/// values for items (i), (iv), (vii); interval consistency otherwise.
pub fn verify_correspondence(
    kind: CorrespondenceKind,
    m: &NonnegMatrix,
    budget: &VerifyBudget,
) -> Result<CorrespondenceReport> {
    require_symmetric(kind, m)?;
    let target = DiagBipartite::new(m.clone());
    let sigma = target.sigma();
    let tol = budget.rel_tol;
    let osr = operator_schmidt_rank(sigma.operator(), tol)?;
    let rank = numerical_rank_real(m.data(), tol);
    let mut notes = Vec::new();

    let (matrix_side, factor): (RankInterval, Option<FactorCertificate>) = match kind {
        CorrespondenceKind::I => {
            let cert = minimal_factorization(m, tol);
            (RankInterval::exact(cert.inner_dim), Some(cert))
        }
        CorrespondenceKind::II => {
            let b = nonneg_rank_bounds(m, &budget.search);
            (RankInterval::new(b.lower, b.upper), Some(b.certificate))
        }
        CorrespondenceKind::III => {
            let lower = psd_rank_lower_bound(m);
            let cap = m.rows().min(m.cols());
            let found = (lower.max(1)..=cap)
                .find_map(|r| psd_factorization_search(m, &SearchParams { r, ..budget.search }));
            match found {
                Some(cert) => (RankInterval::new(lower, cert.inner_dim), Some(cert)),
                None => {
                    notes.push("psd search found no certificate up to min(p, q)".into());
                    (RankInterval::new(lower, cap), None)
                }
            }
        }
        CorrespondenceKind::IV => {
            let cert = symmetric_factorization(m, tol)?;
            (RankInterval::exact(cert.inner_dim), Some(cert))
        }
        CorrespondenceKind::V => {
            let n = m.rows();
            let mut found = None;
            for r in rank.max(1)..=n.max(rank) {
                match cp_factorization_search(m, &SearchParams { r, ..budget.search }) {
                    SearchOutcome::Found(cert) => {
                        found = Some(cert);
                        break;
                    }
                    SearchOutcome::Rejected(reason) => {
                        return Ok(CorrespondenceReport::skipped(kind, format!("cp pre-screen: {reason}")));
                    }
                    SearchOutcome::Exhausted => {}
                }
            }
            match found {
                Some(cert) => (RankInterval::new(rank, cert.inner_dim), Some(cert)),
                None => {
                    return Ok(CorrespondenceReport::skipped(
                        kind,
                        "cp search found no certificate within budget".into(),
                    ))
                }
            }
        }
        CorrespondenceKind::VI => {
            let cert = cpsdt_construct(m, budget.sign_budget, tol)?;
            let lower = psd_rank_lower_bound(m);
            (RankInterval::new(lower, cert.inner_dim.max(lower)), Some(cert))
        }
        CorrespondenceKind::VII => match sqrt_rank(m, budget.sign_budget, tol) {
            Ok(s) => (RankInterval::exact(s.rank), Some(s.certificate(m))),
            Err(Error::BudgetExceeded { needed, cap }) => {
                return Ok(CorrespondenceReport::skipped(
                    kind,
                    format!("sign enumeration needs {needed} patterns, budget {cap}"),
                ))
            }
            Err(e) => return Err(e),
        },
    };

    let mut round_trip = None;
    let mut state = None;
    let mut bridged_upper = None;
    if let Some(cert) = &factor {
        let b = bridge(kind, cert, &target)?;
        round_trip = Some(b.preserved);
        if !b.feasible {
            notes.push("certificate read back from the state side failed the checker".into());
        }
        if kind == CorrespondenceKind::III {
            if let StateCertificate::Purification(pc) = &b.state {
                // the diagonal of L L^dagger is the certificate's reconstruction of M
                let (p, q) = (m.rows(), m.cols());
                let allowed = 1e-8 + ((p * q) as f64).sqrt() * cert.residual / m.data().norm().max(f64::MIN_POSITIVE);
                if pc.residual > allowed {
                    notes.push(format!("purification residual {:.3e} exceeds {allowed:.3e}", pc.residual));
                }
            }
        }
        bridged_upper = Some(b.state.inner_dim()?);
        state = Some(b.state);
    }

    let state_side = match kind {
        CorrespondenceKind::I | CorrespondenceKind::IV => RankInterval::exact(osr),
        CorrespondenceKind::VII => match q_sqrt_rank(&sigma, budget.max_enum_rank, tol) {
            Ok((v, _)) => RankInterval::exact(v),
            Err(Error::BudgetExceeded { needed, cap }) => {
                return Ok(CorrespondenceReport::skipped(
                    kind,
                    format!("spectral sign enumeration needs {needed} patterns, budget {cap}"),
                ))
            }
            Err(e) => return Err(e),
        },
        CorrespondenceKind::II | CorrespondenceKind::V => {
            let upper = bridged_upper.unwrap_or(matrix_side.upper).max(osr);
            RankInterval::new(osr, upper)
        }
        CorrespondenceKind::III | CorrespondenceKind::VI => {
            let lower = ceil_sqrt(osr);
            let mut upper = bridged_upper.unwrap_or(matrix_side.upper);
            if kind == CorrespondenceKind::III {
                upper = upper.min(local_purification_spectral(&sigma, tol)?.osr_l);
            }
            RankInterval::new(lower, upper.max(lower))
        }
    };

    let consistent = matrix_side.consistent_with(&state_side)
        && round_trip.unwrap_or(true)
        && !notes.iter().any(|n| n.contains("failed the checker") || n.contains("residual"));
    let verdict = if !consistent {
        Verdict::Violation
    } else if kind.is_exact() {
        if matrix_side == state_side && matrix_side.is_closed() {
            Verdict::ExactMatch
        } else {
            Verdict::Violation
        }
    } else {
        Verdict::IntervalsConsistent
    };
    Ok(CorrespondenceReport {
        kind,
        matrix_side: Some(matrix_side),
        state_side: Some(state_side),
        verdict,
        round_trip,
        notes,
        factor,
        state,
    })
}
