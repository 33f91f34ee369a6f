use clap::Args;
use mpdo_core::decomp::{
    ceil_sqrt, distinct_eigenvalue_count, local_purification_spectral, make_translation_invariant,
    mixed_w_generator, operator_schmidt_rank, periodicity_lower_bound, physical_dimension_bound,
    purification_from_separable, q_sqrt_power_bound, q_sqrt_rank, w_state_generators,
    DEFAULT_MAX_ENUM_RANK, PERIODICITY_TOL,
};
use mpdo_core::linalg::{hermitian_eigen, numerical_rank_real, DEFAULT_REL_TOL};
use mpdo_core::nonneg::{psd_rank_lower_bound, slack_matrix_tgon};
use mpdo_core::sampling;
use mpdo_core::tensor::{contract_cyclic, contract_train, translation_defect};
use mpdo_core::{Operator, SiteSpec};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde_json::{json, Value};

use crate::error::{CliError, CliResult};
use crate::input::parse_range;
use crate::report::{Quantity, Report, Table};

pub const EXPERIMENTS: [&str; 4] = ["wstate", "tgon", "mixedw", "bounds"];

#[derive(Debug, Args)]
pub struct ExperimentArgs {
    /// One of wstate, tgon, mixedw, bounds.
    pub name: String,
    /// Site counts `a..b` (wstate: 3..10, mixedw: 2..6, bounds: 2..3).
    #[arg(long)]
    pub n: Option<String>,
    /// Polygon sizes `a..b` for tgon (default 3..20).
    #[arg(long)]
    pub t: Option<String>,
    /// Random instances per site count for bounds.
    #[arg(long, default_value_t = 50)]
    pub samples: usize,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long, default_value_t = DEFAULT_REL_TOL)]
    pub tol: f64,
}

fn range_or(arg: &Option<String>, default: (usize, usize), min: usize, max: usize, flag: &str) -> CliResult<(usize, usize)> {
    let (lo, hi) = match arg {
        Some(s) => parse_range(s)?,
        None => default,
    };
    if lo < min || hi > max {
        return Err(CliError::Usage(format!("--{flag} must lie in {min}..{max}")));
    }
    Ok((lo, hi))
}

fn table(columns: &[&str], rows: Vec<Vec<Value>>) -> Table {
    Table {
        columns: columns.iter().map(|c| c.to_string()).collect(),
        rows,
    }
}

fn wstate(args: &ExperimentArgs, rep: &mut Report) -> CliResult<()> {
    let (lo, hi) = range_or(&args.n, (3, 10), 2, 12, "n")?;
    let mut rows = Vec::new();
    let mut all_ok = true;
    for n in lo..=hi {
        let g = w_state_generators(n)?;
        let open = contract_train(&g.open)?;
        let cyc = contract_cyclic(&g.ti, n)?;
        let e_open = (open.data() - g.vector.data()).norm();
        let e_cyc = (cyc.data() - g.vector.data()).norm();
        let check = periodicity_lower_bound(&g.ti, n, PERIODICITY_TOL)?;
        all_ok &= e_open <= 1e-12 && e_cyc <= 1e-12 && check.holds;
        rows.push(vec![
            json!(n),
            json!(g.open.max_bond()),
            json!(e_open),
            json!(g.ti.bond_dim()),
            json!(e_cyc),
            json!(check.holds),
            json!(check.max_root_distance),
            json!(check.lower_bound),
        ]);
    }
    rep.table = Some(table(
        &["n", "open_bond", "open_residual", "cyclic_bond", "cyclic_residual", "periodic", "root_distance", "ti_lower_bound"],
        rows,
    ));
    rep.check(
        "residuals <= 1e-12 and periodicity certified",
        all_ok,
        format!("n = {lo}..{hi}"),
    );
    Ok(())
}

fn tgon(args: &ExperimentArgs, rep: &mut Report) -> CliResult<()> {
    let (lo, hi) = range_or(&args.t, (3, 20), 3, 200, "t")?;
    let mut rows = Vec::new();
    let mut all_three = true;
    for t in lo..=hi {
        let s = slack_matrix_tgon(t)?;
        let rank = numerical_rank_real(s.data(), args.tol);
        let two_zeros = (0..t).all(|i| (0..t).filter(|&j| s.get(i, j) == 0.0).count() == 2);
        all_three &= rank == 3;
        rows.push(vec![json!(t), json!(rank), json!(two_zeros), json!(psd_rank_lower_bound(&s))]);
    }
    rep.table = Some(table(&["t", "rank", "two_zeros_per_row", "psd_rank_lower_bound"], rows));
    rep.check("rank 3 for every t", all_three, format!("t = {lo}..{hi}"));
    Ok(())
}

fn mixedw(args: &ExperimentArgs, rep: &mut Report) -> CliResult<()> {
    let (lo, hi) = range_or(&args.n, (2, 6), 2, 10, "n")?;
    let mut rows = Vec::new();
    let mut all_ok = true;
    for n in lo..=hi {
        let (rho, cert) = mixed_w_generator(n)?;
        let diagonal = rho.operator().off_diagonal_mass() == 0.0;
        let defect = translation_defect(rho.operator())?;
        let contracted = cert.contract()?;
        let scale = contracted.data().trace().re / rho.trace();
        let residual = cert.trace_matched_residual(rho.operator())?;
        let ti = make_translation_invariant(cert.train())?;
        let check = periodicity_lower_bound(&ti, n, PERIODICITY_TOL)?;
        all_ok &= diagonal && defect <= 1e-12 && residual <= 1e-10 && check.holds;
        rows.push(vec![
            json!(n),
            json!(diagonal),
            json!(defect),
            json!(cert.inner_dim()),
            json!(scale),
            json!(residual),
            json!(check.holds),
            json!(check.lower_bound),
        ]);
    }
    rep.table = Some(table(
        &["n", "diagonal", "shift_defect", "sep_bond", "certificate_scale", "trace_matched_residual", "periodic", "ti_lower_bound"],
        rows,
    ));
    rep.check("diagonal, t.i., certified", all_ok, format!("n = {lo}..{hi}"));
    Ok(())
}

#[derive(Default)]
struct Violations {
    subadditive: usize,
    submultiplicative: usize,
    purification: usize,
    separable: usize,
    q_sqrt_lower: usize,
    q_sqrt_power: usize,
    physical: usize,
}

impl Violations {
    fn total(&self) -> usize {
        self.subadditive
            + self.submultiplicative
            + self.purification
            + self.separable
            + self.q_sqrt_lower
            + self.q_sqrt_power
            + self.physical
    }
}

fn sweep(n: usize, samples: usize, rng: &mut ChaCha8Rng, tol: f64) -> CliResult<Violations> {
    let sites = SiteSpec::uniform(2, n)?;
    let dim = sites.total_dim();
    let phys = physical_dimension_bound(sites.dims());
    let osr = |op: &Operator| operator_schmidt_rank(op, tol);
    let mut v = Violations::default();
    for _ in 0..samples {
        let (r1, r2) = (rng.random_range(1..=dim.min(8)), rng.random_range(1..=dim.min(8)));
        let rho = sampling::random_psd(rng, &sites, r1);
        let tau = sampling::random_psd(rng, &sites, r2);
        let (o_rho, o_tau) = (osr(rho.operator())?, osr(tau.operator())?);
        v.subadditive += usize::from(osr(&rho.operator().add(tau.operator())?)? > o_rho + o_tau);
        v.submultiplicative += usize::from(osr(&rho.operator().compose(tau.operator())?)? > o_rho * o_tau);
        let pur = local_purification_spectral(&rho, tol)?;
        v.purification += usize::from(o_rho > pur.osr_l * pur.osr_l);
        v.physical += usize::from(o_rho as u128 > phys);

        let terms = rng.random_range(1..=3);
        let cert = sampling::random_separable_certificate(rng, &sites, terms);
        let from_sep = purification_from_separable(&cert, tol)?;
        let o_sep = osr(&cert.contract()?)?;
        v.separable += usize::from(from_sep.osr_l > cert.inner_dim() || o_sep > from_sep.osr_l * from_sep.osr_l);

        let (q, _) = q_sqrt_rank(&rho, DEFAULT_MAX_ENUM_RANK, tol)?;
        v.q_sqrt_lower += usize::from(q < ceil_sqrt(o_rho));
        let m = distinct_eigenvalue_count(&hermitian_eigen(rho.data()).values);
        v.q_sqrt_power += usize::from(q as u128 > q_sqrt_power_bound(o_rho, m));
    }
    Ok(v)
}

fn bounds(args: &ExperimentArgs, rep: &mut Report) -> CliResult<()> {
    let (lo, hi) = range_or(&args.n, (2, 3), 2, 4, "n")?;
    let mut rows = Vec::new();
    let mut total = 0;
    for n in lo..=hi {
        let mut rng = ChaCha8Rng::seed_from_u64(args.seed);
        rng.set_stream(n as u64);
        let v = sweep(n, args.samples, &mut rng, args.tol)?;
        total += v.total();
        rows.push(vec![
            json!(n),
            json!(args.samples),
            json!(v.subadditive),
            json!(v.submultiplicative),
            json!(v.purification),
            json!(v.separable),
            json!(v.q_sqrt_lower),
            json!(v.q_sqrt_power),
            json!(v.physical),
        ]);
    }
    rep.table = Some(table(
        &[
            "n",
            "samples",
            "osr_sum",
            "osr_product",
            "osr_vs_purification",
            "separable_purification",
            "q_sqrt_lower",
            "q_sqrt_power",
            "physical_dimension",
        ],
        rows,
    ));
    rep.quantities.push(Quantity::measured("violations", total));
    rep.check("no inequality violated", total == 0, format!("{total} violations"));
    Ok(())
}

pub fn run(args: &ExperimentArgs) -> CliResult<Report> {
    if !EXPERIMENTS.contains(&args.name.as_str()) {
        return Err(CliError::Usage(format!(
            "unknown experiment '{}', expected one of {}",
            args.name,
            EXPERIMENTS.join(", ")
        )));
    }
    let mut rep = Report::new(
        "experiment",
        json!({ "name": args.name }),
        json!({ "n": args.n, "t": args.t, "samples": args.samples, "tol": args.tol }),
        Some(args.seed),
    );
    match args.name.as_str() {
        "wstate" => wstate(args, &mut rep)?,
        "tgon" => tgon(args, &mut rep)?,
        "mixedw" => mixedw(args, &mut rep)?,
        _ => bounds(args, &mut rep)?,
    }
    Ok(rep)
}
