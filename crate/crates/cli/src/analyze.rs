use std::path::PathBuf;

use clap::Args;
use mpdo_core::correspondence::{diag_extract, factorization_to_decomposition, CorrespondenceKind, DiagBipartite};
use mpdo_core::decomp::{
    cut_ranks, distinct_eigenvalue_count, local_purification_spectral, mpo_train_form,
    physical_dimension_bound, puri_interval, q_sqrt_power_bound, q_sqrt_rank, RankInterval,
    DEFAULT_MAX_ENUM_RANK,
};
use mpdo_core::linalg::{hermitian_eigen, DEFAULT_REL_TOL};
use mpdo_core::nonneg::{nonneg_rank_bounds, SearchParams};
use mpdo_core::tensor::PSD_TOL;
use mpdo_core::{Error, PsdOperator, SiteSpec};
use serde_json::json;

use crate::error::{CliError, CliResult};
use crate::input::{load_matrix, parse_sites};
use crate::report::{self, Quantity, Report};

#[derive(Debug, Args)]
pub struct AnalyzeArgs {
    /// Square matrix of the operator (JSON or CSV).
    pub path: PathBuf,
    /// Local dimensions `d1,d2,...`; defaults to qubits when the size is a power of two.
    #[arg(long)]
    pub sites: Option<String>,
    /// Relative rank tolerance.
    #[arg(long, default_value_t = DEFAULT_REL_TOL)]
    pub tol: f64,
    /// Largest number of eigenvalues whose signs are enumerated.
    #[arg(long, default_value_t = DEFAULT_MAX_ENUM_RANK)]
    pub max_enum_rank: usize,
    /// Seed for the separable-rank search on bipartite diagonal inputs.
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
}

fn default_sites(n: usize) -> CliResult<Vec<usize>> {
    if n >= 4 && n.is_power_of_two() {
        Ok(vec![2; n.trailing_zeros() as usize])
    } else {
        Err(CliError::Usage(format!(
            "operator of size {n} is not a qubit register; pass --sites"
        )))
    }
}

pub fn run(args: &AnalyzeArgs) -> CliResult<Report> {
    let loaded = load_matrix(&args.path)?;
    let n = loaded.data.nrows();
    if loaded.data.ncols() != n {
        return Err(CliError::Usage(format!(
            "operator must be square, got {}x{}",
            n,
            loaded.data.ncols()
        )));
    }
    let dims = match &args.sites {
        Some(s) => parse_sites(s)?,
        None => default_sites(n)?,
    };
    let sites = SiteSpec::new(dims.clone())?;
    if sites.total_dim() != n {
        return Err(CliError::Usage(format!(
            "sites {dims:?} describe dimension {}, operator has {n}",
            sites.total_dim()
        )));
    }
    let rho = PsdOperator::checked(sites, loaded.data, PSD_TOL)?;
    let tol = args.tol;

    let mut rep = Report::new(
        "analyze",
        json!({ "path": loaded.path, "format": loaded.format.to_string(), "sites": dims }),
        json!({ "tol": tol, "max_enum_rank": args.max_enum_rank }),
        Some(args.seed),
    );

    let (train, osr) = mpo_train_form(rho.operator(), tol)?;
    rep.quantities.push(Quantity::exact("osr", osr, "mpo"));
    rep.quantities.push(Quantity::measured("cut_ranks", cut_ranks(rho.operator(), tol)?));
    rep.certificates.insert("mpo".into(), report::train(&train));

    let pur = local_purification_spectral(&rho, tol)?;
    let puri = puri_interval(osr, pur.osr_l);
    rep.quantities.push(
        Quantity::interval("puri_rank", puri)
            .with_certificate("purification")
            .with_residual(pur.residual),
    );
    rep.certificates.insert(
        "purification".into(),
        json!({ "train": report::train(&pur.l), "osr_l": pur.osr_l, "residual": pur.residual }),
    );

    let q_sqrt = match q_sqrt_rank(&rho, args.max_enum_rank, tol) {
        Ok((q, signs)) => {
            rep.quantities.push(Quantity::exact("q_sqrt_rank", q, "sign_vector"));
            rep.certificates.insert("sign_vector".into(), json!(signs.signs));
            Some(q)
        }
        Err(Error::BudgetExceeded { needed, cap }) => {
            rep.quantities.push(Quantity::skipped(
                "q_sqrt_rank",
                format!("needs {needed} sign patterns, budget {cap}"),
            ));
            None
        }
        Err(e) => return Err(e.into()),
    };

    let diagonal = rho.operator().off_diagonal_mass() == 0.0;
    if diagonal {
        let sep = if dims.len() == 2 {
            let m = diag_extract(&rho)?;
            let b = nonneg_rank_bounds(&m, &SearchParams::new(1).with_seed(args.seed));
            let cert = factorization_to_decomposition(CorrespondenceKind::II, &b.certificate, &DiagBipartite::new(m))?;
            rep.certificates.insert("separable".into(), report::state_certificate(&cert));
            RankInterval::new(b.lower.max(osr), b.upper)
        } else {
            let support = rho.data().diagonal().iter().filter(|z| z.re > 0.0).count();
            RankInterval::new(osr, support.max(osr))
        };
        let mut q = Quantity::interval("sep_rank", sep).with_note("separable: diagonal in the product basis");
        if dims.len() == 2 {
            q = q.with_certificate("separable");
        }
        rep.quantities.push(q);
    } else if osr == 1 {
        rep.quantities.push(
            Quantity::exact("sep_rank", 1, "mpo").with_note("psd product operator"),
        );
    } else {
        rep.quantities.push(Quantity::skipped(
            "sep_rank",
            "not diagonal; separability undetermined",
        ));
    }

    let phys = physical_dimension_bound(&dims);
    rep.check(
        "osr <= physical dimension bound",
        osr as u128 <= phys,
        format!("{osr} <= {phys}"),
    );
    rep.check(
        "osr <= puri^2",
        osr <= pur.osr_l * pur.osr_l,
        format!("{osr} <= {}^2", pur.osr_l),
    );
    if let Some(q) = q_sqrt {
        rep.check(
            "puri lower bound <= q_sqrt",
            puri.lower <= q,
            format!("{} <= {q}", puri.lower),
        );
        let eig = hermitian_eigen(rho.data());
        let m = distinct_eigenvalue_count(&eig.values);
        let bound = q_sqrt_power_bound(osr, m);
        rep.check(
            "q_sqrt <= (osr^m - 1)/(osr - 1)",
            q as u128 <= bound,
            format!("{q} <= {bound} with m = {m} distinct eigenvalues"),
        );
    }
    Ok(rep)
}
