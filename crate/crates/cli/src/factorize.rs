use std::path::PathBuf;

use clap::Args;
use mpdo_core::decomp::RankInterval;
use mpdo_core::linalg::{numerical_rank_real, DEFAULT_REL_TOL};
use mpdo_core::nonneg::{
    check_certificate, cp_factorization_search, cpsdt_construct, minimal_factorization,
    nonneg_factorization_search, nonneg_rank_bounds, psd_factorization_search,
    psd_rank_lower_bound, sqrt_rank, symmetric_factorization, FactorCertificate, FactorKind,
    SearchOutcome, SearchParams, DEFAULT_SIGN_BUDGET,
};
use mpdo_core::{Error, NonnegMatrix};
use serde_json::json;

use crate::error::{CliError, CliResult};
use crate::input::{load_matrix, to_nonneg};
use crate::report::{self, Quantity, Report};

#[derive(Debug, Args)]
pub struct FactorizeArgs {
    /// Nonnegative matrix (JSON or CSV).
    pub path: PathBuf,
    /// One of minimal, nonneg, psd, symmetric, cp, cpsdt, sqrt.
    #[arg(long)]
    pub kind: FactorKind,
    /// Inner dimension for the searched kinds; scans upward from a lower bound when omitted.
    #[arg(long)]
    pub r: Option<usize>,
    #[arg(long, default_value_t = 50)]
    pub restarts: usize,
    #[arg(long, default_value_t = 5000)]
    pub iters: usize,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long, default_value_t = DEFAULT_REL_TOL)]
    pub tol: f64,
    /// Largest number of sign patterns enumerated by the exact square-root kinds.
    #[arg(long, default_value_t = DEFAULT_SIGN_BUDGET)]
    pub sign_budget: u128,
}

/// Result of one factorization attempt before it is written into a report.
pub enum Found {
    /// An exact rank with its certificate.
    Exact(FactorCertificate),
    /// A certificate of size `upper` and a proven lower bound.
    Bounds(RankInterval, FactorCertificate),
}

fn params(args: &FactorizeArgs, r: usize) -> SearchParams {
    SearchParams::new(r)
        .with_restarts(args.restarts)
        .with_iters(args.iters)
        .with_seed(args.seed)
}

fn scan(
    lower: usize,
    upper: usize,
    mut attempt: impl FnMut(usize) -> CliResult<Option<FactorCertificate>>,
) -> CliResult<Option<FactorCertificate>> {
    for r in lower.max(1)..=upper {
        if let Some(cert) = attempt(r)? {
            return Ok(Some(cert));
        }
    }
    Ok(None)
}

fn exhausted(kind: FactorKind, r: Option<usize>) -> CliError {
    match r {
        Some(r) => CliError::Exhausted(format!("no {kind} factorization of size {r} found within budget")),
        None => CliError::Exhausted(format!("no {kind} factorization found within budget")),
    }
}

pub fn factorize(m: &NonnegMatrix, args: &FactorizeArgs) -> CliResult<Found> {
    let tol = args.tol;
    let kind = args.kind;
    let square = || {
        if m.is_square() {
            Ok(())
        } else {
            Err(CliError::Rejected(format!("{kind} factorizations need a square matrix")))
        }
    };
    let symmetric = |r: Result<FactorCertificate, Error>| match r {
        Err(Error::NotSymmetric { defect }) => Err(CliError::Rejected(format!(
            "not symmetric (defect {defect:.3e})"
        ))),
        other => other.map_err(CliError::from),
    };
    match kind {
        FactorKind::Minimal => Ok(Found::Exact(minimal_factorization(m, tol))),
        FactorKind::Nonnegative => match args.r {
            Some(r) => nonneg_factorization_search(m, &params(args, r))
                .map(|c| Found::Bounds(RankInterval::new(numerical_rank_real(m.data(), tol), r), c))
                .ok_or_else(|| exhausted(kind, Some(r))),
            None => {
                let b = nonneg_rank_bounds(m, &params(args, 1));
                Ok(Found::Bounds(RankInterval::new(b.lower, b.upper), b.certificate))
            }
        },
        FactorKind::Psd => {
            let lower = psd_rank_lower_bound(m);
            let (from, to) = args.r.map_or((lower, m.rows().min(m.cols())), |r| (r, r));
            scan(from, to, |r| Ok(psd_factorization_search(m, &params(args, r))))?
                .map(|c| Found::Bounds(RankInterval::new(lower.min(c.inner_dim), c.inner_dim), c))
                .ok_or_else(|| exhausted(kind, args.r))
        }
        FactorKind::Symmetric => {
            square()?;
            symmetric(symmetric_factorization(m, tol)).map(Found::Exact)
        }
        FactorKind::Cp => {
            square()?;
            let lower = numerical_rank_real(m.data(), tol);
            let (from, to) = args.r.map_or((lower, m.rows()), |r| (r, r));
            scan(from, to, |r| match cp_factorization_search(m, &params(args, r)) {
                SearchOutcome::Found(c) => Ok(Some(c)),
                SearchOutcome::Exhausted => Ok(None),
                SearchOutcome::Rejected(reason) => Err(CliError::Rejected(reason)),
            })?
            .map(|c| Found::Bounds(RankInterval::new(lower.min(c.inner_dim), c.inner_dim), c))
            .ok_or_else(|| exhausted(kind, args.r))
        }
        FactorKind::Cpsdt => {
            square()?;
            let cert = symmetric(cpsdt_construct(m, args.sign_budget, tol))?;
            let lower = psd_rank_lower_bound(m).min(cert.inner_dim);
            Ok(Found::Bounds(RankInterval::new(lower, cert.inner_dim), cert))
        }
        FactorKind::HadamardRoot => {
            let s = sqrt_rank(m, args.sign_budget, tol)?;
            Ok(Found::Exact(s.certificate(m)))
        }
    }
}

pub fn run(args: &FactorizeArgs) -> CliResult<Report> {
    let loaded = load_matrix(&args.path)?;
    let m = to_nonneg(&loaded.data)?;
    let mut rep = Report::new(
        "factorize",
        json!({ "path": loaded.path, "format": loaded.format.to_string(), "rows": m.rows(), "cols": m.cols() }),
        json!({
            "kind": args.kind.as_str(),
            "r": args.r,
            "restarts": args.restarts,
            "iters": args.iters,
            "tol": args.tol,
            "sign_budget": args.sign_budget.to_string(),
        }),
        Some(args.seed),
    );
    let name = format!("{}_rank", args.kind.as_str());
    let cert = match factorize(&m, args)? {
        Found::Exact(cert) => {
            rep.quantities.push(
                Quantity::exact(&name, cert.inner_dim, "factor").with_residual(cert.residual),
            );
            cert
        }
        Found::Bounds(interval, cert) => {
            rep.quantities.push(
                Quantity::interval(&name, interval)
                    .with_certificate("factor")
                    .with_residual(cert.residual),
            );
            cert
        }
    };
    let check = check_certificate(&cert, &m);
    rep.check(
        "independent certificate check",
        check.feasible,
        if check.problems.is_empty() {
            format!("residual {:.3e}", check.residual)
        } else {
            check.problems.join("; ")
        },
    );
    rep.certificates.insert("factor".into(), report::factor_certificate(&cert));
    Ok(rep)
}
