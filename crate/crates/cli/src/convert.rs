use std::path::PathBuf;

use clap::{Args, ValueEnum};
use mpdo_core::correspondence::{
    decomposition_to_factorization, diag_extract, factorization_to_decomposition, verify_correspondence,
    CorrespondenceKind, CorrespondenceReport, DiagBipartite, StateCertificate, Verdict, VerifyBudget,
};
use mpdo_core::decomp::{local_purification_spectral, mpo_train_form, DEFAULT_MAX_ENUM_RANK};
use mpdo_core::linalg::DEFAULT_REL_TOL;
use mpdo_core::nonneg::{
    check_certificate, FactorCertificate, FactorKind, FactorPayload, SearchParams, DEFAULT_SIGN_BUDGET,
};
use mpdo_core::tensor::PSD_TOL;
use mpdo_core::{NonnegMatrix, PsdOperator, SiteSpec};
use serde_json::{json, Value};

use crate::error::{CliError, CliResult};
use crate::input::{load_json, load_matrix, matrix_from_value, parse_sites, to_nonneg};
use crate::report::{self, Quantity, Report};

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Direction {
    /// Nonnegative matrix (or its factorization) to a decomposition of the diagonal operator.
    MatrixToState,
    /// Diagonal bipartite operator to a factorization of its diagonal matrix.
    StateToMatrix,
}

#[derive(Debug, Args)]
pub struct ConvertArgs {
    /// Nonnegative matrix, or the square operator for `state-to-matrix` (JSON or CSV).
    pub path: PathBuf,
    /// Correspondence item: i, ii, iii, iv, v, vi or vii.
    #[arg(long)]
    pub kind: CorrespondenceKind,
    #[arg(long, value_enum, default_value_t = Direction::MatrixToState)]
    pub direction: Direction,
    /// Factorization to convert (a `factorize --json` report or a bare certificate).
    #[arg(long)]
    pub factor: Option<PathBuf>,
    /// Local dimensions `p,q` of the operator; defaults to two equal sites.
    #[arg(long)]
    pub sites: Option<String>,
    #[arg(long, default_value_t = 20)]
    pub restarts: usize,
    #[arg(long, default_value_t = 2000)]
    pub iters: usize,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long, default_value_t = DEFAULT_REL_TOL)]
    pub tol: f64,
}

fn budget(args: &ConvertArgs) -> VerifyBudget {
    VerifyBudget {
        search: SearchParams::new(1)
            .with_restarts(args.restarts)
            .with_iters(args.iters)
            .with_seed(args.seed),
        sign_budget: DEFAULT_SIGN_BUDGET,
        max_enum_rank: DEFAULT_MAX_ENUM_RANK,
        rel_tol: args.tol,
    }
}

fn field<'a>(v: &'a Value, key: &str) -> CliResult<&'a Value> {
    v.get(key)
        .ok_or_else(|| CliError::Usage(format!("certificate is missing '{key}'")))
}

fn matrices(v: &Value) -> CliResult<Vec<mpdo_core::linalg::CMat>> {
    v.as_array()
        .ok_or_else(|| CliError::Usage("expected a list of matrices".into()))?
        .iter()
        .map(matrix_from_value)
        .collect()
}

/// Reads a factorization certificate written by `factorize --json`; the
/// residual is recomputed against `m`.
pub fn parse_factor(doc: &Value, m: &NonnegMatrix) -> CliResult<FactorCertificate> {
    let v = doc.pointer("/certificates/factor").unwrap_or(doc);
    let kind: FactorKind = field(v, "kind")?
        .as_str()
        .ok_or_else(|| CliError::Usage("certificate kind must be a string".into()))?
        .parse()?;
    let inner_dim = field(v, "inner_dim")?
        .as_u64()
        .ok_or_else(|| CliError::Usage("inner_dim must be a count".into()))? as usize;
    let p = field(v, "payload")?;
    let payload = match kind {
        FactorKind::Minimal | FactorKind::Nonnegative => FactorPayload::Pair {
            a: matrix_from_value(field(p, "a")?)?,
            b: matrix_from_value(field(p, "b")?)?,
        },
        FactorKind::Psd | FactorKind::Cpsdt => FactorPayload::PsdTuples {
            e: matrices(field(p, "e")?)?,
            f: matrices(field(p, "f")?)?,
        },
        FactorKind::Symmetric | FactorKind::Cp => FactorPayload::Single {
            a: matrix_from_value(field(p, "a")?)?,
        },
        FactorKind::HadamardRoot => {
            let signs = field(p, "signs")?
                .as_array()
                .ok_or_else(|| CliError::Usage("signs must be a list".into()))?
                .iter()
                .map(|s| match s.as_i64() {
                    Some(1) => Ok(1i8),
                    Some(-1) => Ok(-1i8),
                    _ => Err(CliError::Usage("signs must be +1 or -1".into())),
                })
                .collect::<CliResult<Vec<i8>>>()?;
            let root = matrix_from_value(field(p, "root")?)?.map(|z| z.re);
            FactorPayload::HadamardRoot { signs, root }
        }
    };
    check_payload_shape(&payload, inner_dim, m)?;
    Ok(FactorCertificate::new(kind, inner_dim, payload, m.data()))
}

fn check_payload_shape(payload: &FactorPayload, r: usize, m: &NonnegMatrix) -> CliResult<()> {
    let (p, q) = (m.rows(), m.cols());
    let ok = match payload {
        FactorPayload::Pair { a, b } => a.shape() == (p, r) && b.shape() == (r, q),
        FactorPayload::PsdTuples { e, f } => {
            e.len() == p && f.len() == q && e.iter().chain(f).all(|x| x.shape() == (r, r))
        }
        FactorPayload::Single { a } => a.shape() == (p, r),
        FactorPayload::HadamardRoot { root, .. } => root.shape() == (p, q),
    };
    if ok {
        Ok(())
    } else {
        Err(CliError::Usage("certificate shapes do not match the matrix".into()))
    }
}

fn interval_value(i: Option<mpdo_core::decomp::RankInterval>) -> Value {
    i.map_or(Value::Null, |i| json!([i.lower, i.upper]))
}

fn record_verification(rep: &mut Report, v: &CorrespondenceReport) {
    rep.quantities.push(Quantity::measured("matrix_side", interval_value(v.matrix_side)));
    rep.quantities.push(Quantity::measured("state_side", interval_value(v.state_side)));
    if let Some(rt) = v.round_trip {
        rep.check("inner dimension preserved both ways", rt, "matrix -> state -> matrix");
    }
    rep.verdict = Some(v.verdict.to_string());
    rep.notes.extend(v.notes.iter().cloned());
    rep.status = match v.verdict {
        Verdict::ExactMatch | Verdict::IntervalsConsistent => "ok",
        Verdict::Violation => "violation",
        Verdict::Skipped if v.notes.iter().any(|n| n.starts_with("cp pre-screen")) => "rejected",
        Verdict::Skipped => "exhausted",
    }
    .into();
}

fn matrix_to_state(args: &ConvertArgs, rep: &mut Report) -> CliResult<()> {
    let loaded = load_matrix(&args.path)?;
    let m = to_nonneg(&loaded.data)?;
    rep.input = json!({
        "path": loaded.path,
        "format": loaded.format.to_string(),
        "rows": m.rows(),
        "cols": m.cols(),
    });
    let verification = verify_correspondence(args.kind, &m, &budget(args))?;
    let (factor, state) = match &args.factor {
        Some(path) => {
            let cert = parse_factor(&load_json(path)?, &m)?;
            let state = factorization_to_decomposition(args.kind, &cert, &DiagBipartite::new(m.clone()))?;
            (Some(cert), Some(state))
        }
        None => (verification.factor.clone(), verification.state.clone()),
    };
    if let (Some(factor), Some(state)) = (&factor, &state) {
        let back = decomposition_to_factorization(args.kind, state)?;
        let inner = state.inner_dim()?;
        rep.quantities.push(
            Quantity::exact("state_inner_dim", inner, "state").with_residual(state_residual(state, &m)?),
        );
        rep.check(
            "converted certificate has the factorization's inner dimension",
            inner == factor.inner_dim && back.inner_dim == factor.inner_dim,
            format!("{} -> {inner} -> {}", factor.inner_dim, back.inner_dim),
        );
        rep.certificates.insert("factor".into(), report::factor_certificate(factor));
        rep.certificates.insert("state".into(), report::state_certificate(state));
    }
    record_verification(rep, &verification);
    Ok(())
}

fn state_residual(state: &StateCertificate, m: &NonnegMatrix) -> CliResult<f64> {
    let sigma = DiagBipartite::new(m.clone()).sigma();
    Ok(state.reconstruct()?.relative_distance(sigma.operator()))
}

fn state_to_matrix(args: &ConvertArgs, rep: &mut Report) -> CliResult<()> {
    let loaded = load_matrix(&args.path)?;
    let n = loaded.data.nrows();
    if loaded.data.ncols() != n {
        return Err(CliError::Usage("operator must be square".into()));
    }
    let dims = match &args.sites {
        Some(s) => parse_sites(s)?,
        None => {
            let d = (1..=n).find(|d| d * d >= n).unwrap_or(1);
            if d * d != n {
                return Err(CliError::Usage(format!(
                    "operator of size {n} is not two equal sites; pass --sites p,q"
                )));
            }
            vec![d, d]
        }
    };
    if dims.len() != 2 || dims.iter().product::<usize>() != n {
        return Err(CliError::Usage(format!("sites {dims:?} do not describe a bipartite operator of size {n}")));
    }
    let sigma = PsdOperator::checked(SiteSpec::new(dims.clone())?, loaded.data, PSD_TOL)?;
    let m = diag_extract(&sigma)?;
    rep.input = json!({ "path": loaded.path, "format": loaded.format.to_string(), "sites": dims });
    let verification = verify_correspondence(args.kind, &m, &budget(args))?;
    // native state-side constructions where one exists, otherwise the bridged certificate
    let state = match args.kind {
        CorrespondenceKind::I => Some(StateCertificate::Mpo(mpo_train_form(sigma.operator(), args.tol)?.0)),
        CorrespondenceKind::III => Some(StateCertificate::Purification(local_purification_spectral(
            &sigma, args.tol,
        )?)),
        _ => verification.state.clone(),
    };
    if let Some(state) = &state {
        let cert = decomposition_to_factorization(args.kind, state)?;
        let check = check_certificate(&cert, &m);
        rep.quantities.push(
            Quantity::exact("factor_inner_dim", cert.inner_dim, "factor").with_residual(cert.residual),
        );
        rep.check(
            "independent certificate check",
            check.feasible,
            if check.problems.is_empty() {
                format!("residual {:.3e}", check.residual)
            } else {
                check.problems.join("; ")
            },
        );
        rep.certificates.insert("state".into(), report::state_certificate(state));
        rep.certificates.insert("factor".into(), report::factor_certificate(&cert));
    }
    rep.certificates.insert("matrix".into(), report::real_matrix(m.data()));
    record_verification(rep, &verification);
    Ok(())
}

pub fn run(args: &ConvertArgs) -> CliResult<Report> {
    let mut rep = Report::new(
        "convert",
        Value::Null,
        json!({
            "kind": args.kind.as_str(),
            "direction": match args.direction {
                Direction::MatrixToState => "matrix-to-state",
                Direction::StateToMatrix => "state-to-matrix",
            },
            "restarts": args.restarts,
            "iters": args.iters,
            "tol": args.tol,
        }),
        Some(args.seed),
    );
    match args.direction {
        Direction::MatrixToState => matrix_to_state(args, &mut rep)?,
        Direction::StateToMatrix => state_to_matrix(args, &mut rep)?,
    }
    Ok(rep)
}
