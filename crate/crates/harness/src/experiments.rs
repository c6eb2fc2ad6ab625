//! The experiment catalogue: parameter extraction, orchestration of the
//! core modules, and report/CSV/SVG assembly.

use crate::config::{Config, ConfigError};
use crate::report::{csv_header, CheckLine, Outcome, Report};
use crate::svg;
use aniso_core::cutoff::{build_cutoff, cutoff_energy_bound};
use aniso_core::energy::{
    comparability_ratio, log_inequality_check, poincare_constant, random_test_function,
    sobolev_check, GridFunction, WeightFunction,
};
use aniso_core::geometry::{AnisoBox, ExponentVector};
use aniso_core::inequalities::{
    bombieri_giusti_check, moser_exponent_sums, moser_product_bound, sweep_inequality,
    BgExponent, BgParams, MoserScheduleNeg, MoserSchedulePos,
};
use aniso_core::kernels::{axes_tail_exact, cusp_params, tail_mass, JumpMeasure, TailRegion};
use aniso_core::spectral::{axes_matched_coefficients, SemigroupSolution, SpectralField};
use aniso_core::geometry::Cylinder;
use aniso_core::stochastic::{estimate_solution, harnack_ratio, holder_quotient, oscillation_decay};

/// Builds a jump measure from the config params when a `family` key is
/// present: `axes`, `double-exponent` (with `betas`), `product-stable`
/// (with `alpha`, `beta`) or `cusp` (with `alphas` as the pair), plus an
/// optional `coefficient` of `one`, a constant in [1/2, 1], or `cosine`.
pub fn measure_from_config(cfg: &Config) -> Result<Option<JumpMeasure>, HarnessError> {
    let family = match cfg.params.get("family") {
        None => return Ok(None),
        Some(toml::Value::String(s)) => s.clone(),
        Some(other) => {
            return Err(ConfigError::Field {
                field: "family".into(),
                reason: format!("expected a string, got {other}"),
            }
            .into())
        }
    };
    let alpha0 = cfg.f64_or("alpha0", 0.4)?;
    let alphas = cfg.alphas_or("alphas", &[1.0, 1.0])?;
    let mut mu = match family.as_str() {
        "axes" => JumpMeasure::axes(&ExponentVector::new(&alphas, alpha0)?),
        "double-exponent" => {
            let betas = cfg.alphas_or("betas", &alphas)?;
            JumpMeasure::double_exponent(&alphas, &betas, alpha0)?
        }
        "product-stable" => {
            let alpha = cfg.f64_or("alpha", 1.0)?;
            let beta = cfg.f64_or("beta", 1.5)?;
            JumpMeasure::product_stable(alpha, beta, alpha0)?
        }
        "cusp" => {
            if alphas.len() != 2 {
                return Err(ConfigError::Field {
                    field: "alphas".into(),
                    reason: "cusp family needs an exponent pair".into(),
                }
                .into());
            }
            JumpMeasure::cusp(alphas[0], alphas[1], alpha0)?
        }
        other => {
            return Err(ConfigError::Field {
                field: "family".into(),
                reason: format!("unknown family `{other}`"),
            }
            .into())
        }
    };
    match cfg.params.get("coefficient") {
        None => {}
        Some(toml::Value::String(s)) if s == "one" => {}
        Some(toml::Value::String(s)) if s == "cosine" => {
            mu = mu.with_coefficient(aniso_core::kernels::CoefficientField::TimeCosine);
        }
        Some(toml::Value::Float(c)) => {
            mu = mu.with_coefficient(aniso_core::kernels::CoefficientField::constant(*c)?);
        }
        Some(other) => {
            return Err(ConfigError::Field {
                field: "coefficient".into(),
                reason: format!("expected `one`, `cosine` or a number, got {other}"),
            }
            .into())
        }
    }
    Ok(Some(mu))
}

/// The experiment names accepted by `run`.
pub const EXPERIMENTS: &[&str] = &[
    "tail-check",
    "comparability",
    "poincare",
    "sobolev",
    "cutoff",
    "log-estimate",
    "guelle",
    "moser",
    "bombieri-giusti",
    "harnack",
    "oscillation",
    "cusp-plot",
    "mc-vs-spectral",
];

#[derive(Debug, thiserror::Error)]
pub enum HarnessError {
    #[error(transparent)]
    Config(#[from] ConfigError),
    #[error("core failure: {0}")]
    Core(#[from] aniso_core::Error),
    #[error("thread pool: {0}")]
    Threads(String),
}

type RunResult = Result<Outcome, HarnessError>;

/// Dispatches the named experiment inside a worker pool of the configured
/// size. Identical configurations and seeds produce byte-identical reports
/// for every pool size.
pub fn run(cfg: &Config) -> RunResult {
    if !EXPERIMENTS.contains(&cfg.experiment.as_str()) {
        return Err(ConfigError::UnknownExperiment(cfg.experiment.clone()).into());
    }
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(cfg.threads)
        .build()
        .map_err(|e| HarnessError::Threads(e.to_string()))?;
    pool.install(|| dispatch(cfg))
}

fn dispatch(cfg: &Config) -> RunResult {
    match cfg.experiment.as_str() {
        "tail-check" => tail_check(cfg),
        "comparability" => comparability(cfg),
        "poincare" => poincare(cfg),
        "sobolev" => sobolev(cfg),
        "cutoff" => cutoff_experiment(cfg),
        "log-estimate" => log_estimate(cfg),
        "guelle" => guelle(cfg),
        "moser" => moser(cfg),
        "bombieri-giusti" => bombieri_giusti(cfg),
        "harnack" => harnack(cfg),
        "oscillation" => oscillation(cfg),
        "cusp-plot" => cusp_plot(cfg),
        "mc-vs-spectral" => mc_vs_spectral(cfg),
        other => Err(ConfigError::UnknownExperiment(other.into()).into()),
    }
}

fn new_report(cfg: &Config) -> Report {
    Report::new(&cfg.experiment, cfg.seed, cfg.echo())
}

fn tail_check(cfg: &Config) -> RunResult {
    let tol = cfg.f64_or("tolerance", 1e-6)?;
    let mut report = new_report(cfg);
    let mut csv = csv_header("tail-check", "dim,alphas,rho,exact,numeric,rel_error");
    let families: Vec<Vec<f64>> = vec![
        vec![1.0],
        vec![0.5],
        vec![1.9],
        vec![1.0, 1.0],
        vec![0.6, 1.7],
        vec![1.99, 1.99],
        vec![1.0, 1.0, 1.0],
        vec![0.8, 1.2, 1.8],
        vec![1.5, 1.9, 0.7],
    ];
    for alphas in &families {
        let alpha0 = alphas.iter().cloned().fold(2.0, f64::min).min(0.5);
        let ev = ExponentVector::new(alphas, alpha0)?;
        let mu = JumpMeasure::axes(&ev);
        for rho in [0.25, 1.0, 2.0] {
            let exact = axes_tail_exact(&ev, rho)?;
            let numeric =
                tail_mass(&mu, &vec![0.0; ev.dim()], rho, TailRegion::BoxComplement)?.value;
            let rel = (numeric - exact).abs() / exact;
            csv.push_str(&format!(
                "{},{},{rho},{exact:.12e},{numeric:.12e},{rel:.3e}\n",
                ev.dim(),
                alphas
                    .iter()
                    .map(|a| a.to_string())
                    .collect::<Vec<_>>()
                    .join("/")
            ));
            report.push(
                CheckLine::new(
                    format!("tail d={} alphas={alphas:?} rho={rho}", ev.dim()),
                    rel < tol,
                )
                .with("exact", exact)
                .with("numeric", numeric)
                .with("rel_error", rel)
                .tolerance(tol),
            );
        }
    }
    // A configured family adds its slab-escape boundedness check.
    if let Some(mu) = measure_from_config(cfg)? {
        let ev = mu.exponents().clone();
        for k in 0..ev.dim() {
            let mut bounded = true;
            let mut worst = 0.0f64;
            let mut rho = 0.25;
            while rho <= 2.0 {
                let mass = tail_mass(&mu, &vec![0.0; ev.dim()], rho, TailRegion::SlabComplement(k))?;
                let ratio =
                    mass.value / ((2.0 - ev.alpha(k)) * rho.powf(-ev.alpha_max()));
                bounded &= ratio.is_finite() && ratio > 0.0;
                worst = worst.max(ratio);
                rho *= 2.0;
            }
            report.push(
                CheckLine::new(format!("configured family slab tail, axis {k}"), bounded)
                    .with("worst_ratio", worst),
            );
        }
    }

    // The flagship exact value: unit orders in the plane at unit radius.
    let ev = ExponentVector::isotropic(2, 1.0)?;
    let exact = axes_tail_exact(&ev, 1.0)?;
    report.push(
        CheckLine::new("exact value 4 at unit radius", (exact - 4.0).abs() < 1e-12)
            .with("value", exact)
            .tolerance(1e-12),
    );
    let mut outcome = Outcome::new(report);
    outcome.csv_files.push(("tail_check.csv".into(), csv));
    Ok(outcome)
}

fn comparability(cfg: &Config) -> RunResult {
    let functions = cfg.usize_or("functions", 100)?;
    let base = cfg.usize_or("base_resolution", 64)?;
    let fine = cfg.usize_or("fine_resolution", 128)?;
    let mut report = new_report(cfg);
    let mut csv = csv_header(
        "comparability",
        "alpha1,alpha2,resolution,min_ratio,max_ratio,skipped",
    );
    for (a1, a2) in [(1.0, 1.0), (1.5, 1.9), (0.5, 1.5)] {
        let mu = JumpMeasure::cusp(a1, a2, 0.4)?;
        let ev = mu.exponents().clone();
        let omega = AnisoBox::centered(1.0, &ev)?;
        let coarse = comparability_ratio(&mu, &omega, &[base, base], functions, cfg.seed)?;
        let refined = comparability_ratio(&mu, &omega, &[fine, fine], functions, cfg.seed)?;
        for (res, rep) in [(base, &coarse), (fine, &refined)] {
            csv.push_str(&format!(
                "{a1},{a2},{res},{:.12e},{:.12e},{}\n",
                rep.min_ratio, rep.max_ratio, rep.skipped
            ));
        }
        let finite = coarse.min_ratio > 0.0
            && coarse.max_ratio.is_finite()
            && refined.min_ratio > 0.0
            && refined.max_ratio.is_finite();
        let max_move = (refined.max_ratio / coarse.max_ratio)
            .max(coarse.max_ratio / refined.max_ratio);
        let min_move = (refined.min_ratio / coarse.min_ratio)
            .max(coarse.min_ratio / refined.min_ratio);
        report.push(
            CheckLine::new(
                format!("cusp ({a1},{a2}) ratios finite and refinement-stable"),
                finite && max_move < 2.0 && min_move < 2.0,
            )
            .with("min_ratio", refined.min_ratio)
            .with("max_ratio", refined.max_ratio)
            .with("max_endpoint_move", max_move)
            .with("min_endpoint_move", min_move)
            .tolerance(2.0),
        );
    }
    let mut outcome = Outcome::new(report);
    outcome.csv_files.push(("comparability.csv".into(), csv));
    Ok(outcome)
}

fn poincare(cfg: &Config) -> RunResult {
    let budget = cfg.usize_or("budget", 2000)?;
    let res = cfg.usize_or("resolution", 33)?;
    let mut report = new_report(cfg);
    let mut csv = csv_header("poincare", "alpha,pair_constant,robust_constant,evaluations");
    let mut constants = Vec::new();
    for alpha in [1.0, 1.5, 1.9, 1.99] {
        let ev = ExponentVector::isotropic(2, alpha)?;
        let omega = AnisoBox::centered(1.0, &ev)?;
        let rep = poincare_constant(&ev, &omega, &[res, res], budget, cfg.seed)?;
        csv.push_str(&format!(
            "{alpha},{:.12e},{:.12e},{}\n",
            rep.constant, rep.robust_constant, rep.evaluations
        ));
        report.push(
            CheckLine::new(
                format!("rayleigh constant alpha={alpha}"),
                rep.constant > 0.0 && rep.robust_constant > 0.0,
            )
            .with("pair_constant", rep.constant)
            .with("robust_constant", rep.robust_constant)
            .with("evaluations", rep.evaluations as f64),
        );
        constants.push(rep.robust_constant);
    }
    // The sub-cell-completed quotient carries the below-grid energy mass,
    // so its spread measures the genuine dependence on the orders.
    let max = constants.iter().cloned().fold(f64::MIN, f64::max);
    let min = constants.iter().cloned().fold(f64::MAX, f64::min);
    report.push(
        CheckLine::new("no blow-up towards order two", max / min < 10.0)
            .with("spread", max / min)
            .tolerance(10.0),
    );
    let mut outcome = Outcome::new(report);
    outcome.csv_files.push(("poincare.csv".into(), csv));
    Ok(outcome)
}

fn sobolev(cfg: &Config) -> RunResult {
    let mut report = new_report(cfg);
    let ev = ExponentVector::isotropic(2, 1.0)?;
    let (r, lambda) = (0.5, 2.0);
    let omega = AnisoBox::centered(lambda * r, &ev)?;
    let mut worst = 0.0f64;
    for s in 0..10u64 {
        let u = random_test_function(&omega, &[24, 24], cfg.seed, 2 * s)?;
        let rep = sobolev_check(&ev, &u, r, lambda, &[0.0, 0.0])?;
        worst = worst.max(rep.ratio);
        if s == 0 {
            report.push(
                CheckLine::new("norm exponent", (rep.exponent - 4.0).abs() < 1e-12)
                    .with("exponent", rep.exponent),
            );
        }
    }
    report.push(
        CheckLine::new("ratios finite over the test library", worst.is_finite() && worst > 0.0)
            .with("max_ratio", worst),
    );
    // Refinement stability.
    let mut prev = None;
    let mut stable = true;
    let mut ratios = Vec::new();
    for n in [16usize, 32] {
        let u = GridFunction::from_fn(&omega, &[n, n], |x| (3.0 * x[0] + 1.0).sin() + x[1] * x[1])?;
        let rep = sobolev_check(&ev, &u, r, lambda, &[0.0, 0.0])?;
        if let Some(p) = prev {
            stable = rep.ratio / p < 2.0 && p / rep.ratio < 2.0;
        }
        ratios.push(rep.ratio);
        prev = Some(rep.ratio);
    }
    report.push(
        CheckLine::new("ratio stable under refinement", stable)
            .with("coarse", ratios[0])
            .with("fine", ratios[1])
            .tolerance(2.0),
    );
    Ok(Outcome::new(report))
}

fn cutoff_experiment(cfg: &Config) -> RunResult {
    let points = cfg.usize_or("points_per_axis", 33)?;
    let mut report = new_report(cfg);
    let ev = ExponentVector::isotropic(2, 1.0)?;
    let mu = JumpMeasure::axes(&ev);
    let tau = build_cutoff(&[0.0, 0.0], 1.0, 2.0, &ev)?;
    let rep = cutoff_energy_bound(&tau, &mu, points)?;
    report.push(
        CheckLine::new("energy supremum finite", rep.supremum.is_finite() && rep.supremum > 0.0)
            .with("supremum", rep.supremum)
            .with("bound", rep.bound)
            .with("empirical_c1", rep.empirical_c1),
    );
    // Monotone in the inflation factor.
    let mut prev = f64::MAX;
    let mut monotone = true;
    for lambda in [1.25, 1.5, 2.0] {
        let tau = build_cutoff(&[0.0, 0.0], 0.9, lambda, &ev)?;
        let r = cutoff_energy_bound(&tau, &mu, 21)?;
        monotone &= r.supremum <= prev * (1.0 + 1e-9);
        prev = r.supremum;
    }
    report.push(CheckLine::new("supremum nonincreasing in lambda", monotone));
    // Robustness towards order two.
    let mut c1 = Vec::new();
    for alpha in [1.0, 1.99] {
        let ev = ExponentVector::isotropic(2, alpha)?;
        let mu = JumpMeasure::axes(&ev);
        let tau = build_cutoff(&[0.0, 0.0], 1.0, 2.0, &ev)?;
        c1.push(cutoff_energy_bound(&tau, &mu, 21)?.empirical_c1);
    }
    let spread = c1[0].max(c1[1]) / c1[0].min(c1[1]);
    report.push(
        CheckLine::new("constant robust towards order two", spread < 4.0)
            .with("c1_at_1", c1[0])
            .with("c1_at_199", c1[1])
            .with("spread", spread)
            .tolerance(4.0),
    );
    Ok(Outcome::new(report))
}

fn log_estimate(cfg: &Config) -> RunResult {
    use rand::Rng;
    let trials = cfg.usize_or("trials", 50)?;
    let mut report = new_report(cfg);
    let ev = ExponentVector::new(&[1.2, 0.9], 0.5)?;
    let mu = JumpMeasure::axes(&ev);
    let omega = AnisoBox::centered(1.5, &ev)?;
    let psi = WeightFunction::weighted_poincare(&ev);
    let mut all_hold = true;
    let mut min_slack = f64::INFINITY;
    for s in 0..trials as u64 {
        let mut rng = aniso_core::rng::substream(cfg.seed, s);
        let w = GridFunction::from_fn(&omega, &[11, 11], |_| {
            rng.random_range(-1.0..1.0f64).exp()
        })?;
        let rep = log_inequality_check(&mu, &w, &psi, 0.0)?;
        all_hold &= rep.holds;
        min_slack = min_slack.min(rep.lhs - (rep.middle - rep.penalty));
    }
    report.push(
        CheckLine::new("random positive samples satisfy the estimate", all_hold)
            .with("trials", trials as f64)
            .with("min_slack", min_slack),
    );
    // Matched weight: the logarithmic term vanishes.
    let w = GridFunction::from_fn(&omega, &[15, 15], |x| psi.eval(x).max(1e-300))?;
    let rep = log_inequality_check(&mu, &w, &psi, 0.0)?;
    report.push(
        CheckLine::new(
            "matched weight collapses the logarithmic term",
            rep.holds && rep.middle.abs() < 1e-14,
        )
        .with("middle", rep.middle)
        .with("lhs", rep.lhs),
    );
    // A time-dependent coefficient field changes nothing structural.
    let mu_t = JumpMeasure::axes(&ev)
        .with_coefficient(aniso_core::kernels::CoefficientField::TimeCosine);
    let mut rng = aniso_core::rng::substream(cfg.seed, 0xc0);
    let w = GridFunction::from_fn(&omega, &[11, 11], |_| rng.random_range(-1.0..1.0f64).exp())?;
    let rep = log_inequality_check(&mu_t, &w, &psi, 0.7)?;
    report.push(CheckLine::new("holds under the stock coefficient", rep.holds));
    Ok(Outcome::new(report))
}

fn guelle(cfg: &Config) -> RunResult {
    let samples = cfg.usize_or("samples", 1_000_000)?;
    let mut report = new_report(cfg);
    let neg = sweep_inequality(true, samples, cfg.seed);
    report.push(
        CheckLine::new("negative-exponent inequality sweep", neg.violations == 0)
            .with("samples", neg.samples as f64)
            .with("violations", neg.violations as f64)
            .with("worst_relative_slack", neg.worst_relative_slack),
    );
    let pos = sweep_inequality(false, samples, cfg.seed ^ 0x5a5a);
    report.push(
        CheckLine::new("positive-exponent inequality sweep", pos.violations == 0)
            .with("samples", pos.samples as f64)
            .with("violations", pos.violations as f64)
            .with("worst_relative_slack", pos.worst_relative_slack),
    );
    Ok(Outcome::new(report))
}

fn moser(cfg: &Config) -> RunResult {
    let mut report = new_report(cfg);
    let ev = ExponentVector::isotropic(2, 1.0)?;
    let schedule = MoserScheduleNeg::new(&ev, 0.5, 1.0, 1.0)?;
    let rep = moser_product_bound(&schedule, 1.0)?;
    // Doubling the depth must leave the product untouched.
    let kappa = schedule.kappa();
    let mut long = 0.0;
    for j in 0..(2 * rep.truncation_depth) {
        long += schedule.amplification(j, 1.0).ln() / kappa.powi(j as i32);
    }
    let drift = (rep.product - long.exp()).abs() / rep.product;
    report.push(
        CheckLine::new(
            "amplification product converges",
            rep.product.is_finite() && drift < 1e-12,
        )
        .with("product", rep.product)
        .with("c3", rep.c3)
        .with("truncation_drift", drift)
        .tolerance(1e-12),
    );
    // Exponent-sum identity for every reachable depth up to 30 (depth 1 is
    // the scalar identity kappa = (beta + 1)(kappa - 1)).
    let algebra = (kappa - (ev.beta() + 1.0) * (kappa - 1.0)).abs() < 1e-12;
    let mut all = algebra;
    for n in 2..=30u32 {
        let p = kappa.powi(-(n as i32)) * 1.0000001;
        let s = MoserSchedulePos::new(&ev, p)?;
        let sums = moser_exponent_sums(&s);
        all &= s.depth() == n && sums.identity_holds && sums.bound_holds;
    }
    report.push(CheckLine::new("exponent-sum identity depths 1..30", all));
    Ok(Outcome::new(report))
}

fn bombieri_giusti(cfg: &Config) -> RunResult {
    let mut report = new_report(cfg);
    let ev = ExponentVector::isotropic(2, 1.0)?;
    let params = BgParams {
        m: 3.0,
        c0: 2.0,
        theta: 0.5,
        eta: 0.5,
        p0: BgExponent::Sup,
    };
    let unit = bombieri_giusti_check(&|_, _| 1.0, &ev, &[17, 17], 8, &params)?;
    report.push(
        CheckLine::new(
            "unit function passes with constant one",
            unit.hypothesis1_ok
                && unit.hypothesis2_ok
                && (unit.conclusion_constant - 1.0).abs() < 1e-12,
        )
        .with("conclusion_constant", unit.conclusion_constant)
        .with("normalized_constant", unit.normalized_constant),
    );
    let spike = bombieri_giusti_check(
        &|_t, x: &[f64]| 1.0 + 2.0 * (-20.0 * (x[0] * x[0] + x[1] * x[1])).exp(),
        &ev,
        &[17, 17],
        8,
        &params,
    )?;
    report.push(
        CheckLine::new(
            "mild spike reported with finite constants",
            spike.conclusion_constant.is_finite() && spike.conclusion_constant > 1.0,
        )
        .with("conclusion_constant", spike.conclusion_constant)
        .with("normalized_constant", spike.normalized_constant),
    );
    let tight = BgParams { c0: 1.0, ..params };
    let plateau = bombieri_giusti_check(
        &|_t, x: &[f64]| if x[0] > 0.0 { 22026.465794806718 } else { 1.0 },
        &ev,
        &[16, 16],
        6,
        &tight,
    )?;
    report.push(
        CheckLine::new(
            "constructed superlevel plateau is flagged",
            !plateau.hypothesis1_ok && !plateau.h1_violations.is_empty(),
        )
        .with("violation_count", plateau.h1_violations.len() as f64),
    );
    // Scale invariance of the normalized constant over constant fields.
    let mut values = Vec::new();
    for scale in [0.5f64, 1.0, 7.0] {
        let rep = bombieri_giusti_check(&|_, _| scale, &ev, &[13, 13], 6, &params)?;
        values.push(rep.normalized_constant);
    }
    let invariant = values
        .windows(2)
        .all(|w| (w[0] - w[1]).abs() < 1e-9 * w[0].abs());
    report.push(
        CheckLine::new("normalized constant scale-invariant", invariant)
            .with("value", values[0]),
    );
    Ok(Outcome::new(report))
}

/// Shared construction of the manufactured nonnegative solution ensemble.
fn harnack_ensemble(
    cfg: &Config,
    ev: &ExponentVector,
    count: usize,
) -> Result<Vec<SemigroupSolution>, HarnessError> {
    let k_max = cfg.usize_or("k_max", 64)?;
    let band = cfg.usize_or("data_band", 16)?;
    let period = cfg.f64_or("period", 16.0)?;
    let coeffs = axes_matched_coefficients(ev);
    let mut out = Vec::with_capacity(count);
    for s in 0..count as u64 {
        let field = SpectralField::random_nonnegative(
            period,
            k_max,
            band,
            ev,
            &coeffs,
            cfg.seed.wrapping_add(s),
            0.01,
        )?;
        out.push(SemigroupSolution::new(field, -1.0));
    }
    Ok(out)
}

fn harnack(cfg: &Config) -> RunResult {
    let count = cfg.usize_or("solutions", 50)?;
    let res = cfg.usize_or("resolution", 16)?;
    let steps = cfg.usize_or("time_steps", 6)?;
    let alphas = cfg.alphas_or("alphas", &[1.0, 1.5])?;
    let ev = ExponentVector::new(&alphas, 0.4)?;
    let mut report = new_report(cfg);
    let mut csv = csv_header("harnack", "solution,resolution,l1_early,inf_late,ratio");
    let ensemble = harnack_ensemble(cfg, &ev, count)?;
    let mut max_base = 0.0f64;
    let mut max_fine = 0.0f64;
    let mut all_finite = true;
    for (i, sol) in ensemble.iter().enumerate() {
        let base = harnack_ratio(sol, 0.0, &ev, &[res, res], steps)?;
        let fine = harnack_ratio(sol, 0.0, &ev, &[2 * res, 2 * res], 2 * steps)?;
        all_finite &= base.ratio.is_finite() && fine.ratio.is_finite();
        max_base = max_base.max(base.ratio);
        max_fine = max_fine.max(fine.ratio);
        csv.push_str(&format!(
            "{i},{res},{:.12e},{:.12e},{:.12e}\n",
            base.l1_early, base.inf_late, base.ratio
        ));
        csv.push_str(&format!(
            "{i},{},{:.12e},{:.12e},{:.12e}\n",
            2 * res,
            fine.l1_early,
            fine.inf_late,
            fine.ratio
        ));
    }
    report.push(
        CheckLine::new("all window ratios finite", all_finite)
            .with("solutions", count as f64)
            .with("max_ratio", max_fine),
    );
    let movement = (max_fine / max_base).max(max_base / max_fine);
    report.push(
        CheckLine::new("ensemble maximum stable under refinement", movement < 2.0)
            .with("max_coarse", max_base)
            .with("max_fine", max_fine)
            .with("movement", movement)
            .tolerance(2.0),
    );
    let mut outcome = Outcome::new(report);
    outcome.csv_files.push(("harnack.csv".into(), csv));
    Ok(outcome)
}

fn oscillation(cfg: &Config) -> RunResult {
    let count = cfg.usize_or("solutions", 20)?;
    let k_max = cfg.usize_or("k_max", 24)?;
    let res = cfg.usize_or("resolution", 13)?;
    let steps = cfg.usize_or("time_steps", 5)?;
    let nu_max = cfg.usize_or("nu_max", 3)?;
    let alphas = cfg.alphas_or("alphas", &[1.0, 1.5])?;
    let ev = ExponentVector::new(&alphas, 0.4)?;
    let coeffs = axes_matched_coefficients(&ev);
    let mut report = new_report(cfg);
    let mut csv = csv_header("oscillation", "solution,nu,oscillation,fitted_gamma");
    let mut series = Vec::new();
    let mut all_monotone = true;
    let mut all_positive = true;
    let mut min_gamma = f64::INFINITY;
    for s in 0..count as u64 {
        // Rough random-sign data: full band up to the truncation.
        let field = SpectralField::random_real(
            16.0,
            k_max,
            k_max,
            &ev,
            &coeffs,
            cfg.seed.wrapping_add(s),
        )?;
        let sol = SemigroupSolution::new(field, -2.0);
        let rep = oscillation_decay(&sol, &ev, nu_max, &[res, res], steps)?;
        all_monotone &= rep.monotone;
        let gamma = rep.fitted_gamma.unwrap_or(0.0);
        all_positive &= gamma > 0.0;
        min_gamma = min_gamma.min(gamma);
        for (nu, osc) in rep.oscillations.iter().enumerate() {
            csv.push_str(&format!("{s},{nu},{osc:.12e},{gamma:.12e}\n"));
        }
        series.push((format!("solution {s}"), rep.oscillations.clone()));
    }
    report.push(
        CheckLine::new("oscillations nonincreasing for every solution", all_monotone)
            .with("solutions", count as f64),
    );
    report.push(
        CheckLine::new("fitted decay exponent positive for every solution", all_positive)
            .with("min_gamma", min_gamma),
    );
    // Space-time difference quotient of the first solution at the median
    // fitted exponent, over a window inside its domain.
    let field = SpectralField::random_real(16.0, k_max, k_max, &ev, &coeffs, cfg.seed)?;
    let sol = SemigroupSolution::new(field, -2.0);
    let sup = sol.sup_bound(96)?;
    let gamma = min_gamma.clamp(0.05, 1.0);
    let window = Cylinder::osc_domain(0.5, &ev)?;
    let hq = holder_quotient(
        &sol,
        &ev,
        &window,
        gamma,
        10_000,
        &[res, res],
        steps,
        sup,
        cfg.seed,
    )?;
    report.push(
        CheckLine::new(
            "difference quotient finite at the fitted exponent",
            hq.max_quotient.is_finite() && hq.eta.is_finite() && hq.eta > 0.0,
        )
        .with("max_quotient", hq.max_quotient)
        .with("eta", hq.eta)
        .with("gamma", hq.gamma),
    );
    let mut outcome = Outcome::new(report);
    outcome.csv_files.push(("oscillation.csv".into(), csv));
    outcome
        .svg_files
        .push(("oscillation.svg".into(), svg::oscillation_plot_svg(&series)));
    Ok(outcome)
}

fn cusp_plot(cfg: &Config) -> RunResult {
    let samples = cfg.usize_or("samples_per_axis", 192)?;
    let mut report = new_report(cfg);
    let mut outcome_svgs = Vec::new();
    // Parameter algebra pinned to the documented exponent pairs.
    let strong = cusp_params(0.1, 1.9, 0.1)?;
    report.push(
        CheckLine::new("gamma for (0.1, 1.9)", (strong.gamma - 19.9).abs() < 1e-12)
            .with("gamma", strong.gamma)
            .tolerance(1e-12),
    );
    let moderate = cusp_params(1.97, 1.48, 0.5)?;
    report.push(
        CheckLine::new("gamma for (1.97, 1.48)", (moderate.gamma - 2.30).abs() < 0.01)
            .with("gamma", moderate.gamma)
            .tolerance(0.01),
    );
    let iso = cusp_params(1.3, 1.3, 0.5)?;
    report.push(
        CheckLine::new(
            "isotropic pair degenerates",
            (iso.gamma - 1.3).abs() < 1e-12 && (iso.b1 - 1.0).abs() < 1e-12,
        )
        .with("gamma", iso.gamma)
        .with("b1", iso.b1),
    );
    // Region figures and their qualitative checks.
    let iso_fill = svg::gamma_fill_fraction(&iso, samples);
    report.push(
        CheckLine::new("isotropic region fills the square", iso_fill == 1.0)
            .with("fraction", iso_fill),
    );
    let strong_fill = svg::gamma_fill_fraction(&strong, samples);
    report.push(
        CheckLine::new(
            "strong anisotropy pinches the region",
            strong_fill > 0.0 && strong_fill < 0.2,
        )
        .with("fraction", strong_fill)
        .tolerance(0.2),
    );
    outcome_svgs.push((
        "gamma_region_strong.svg".into(),
        svg::gamma_region_svg(&strong, samples),
    ));
    outcome_svgs.push((
        "gamma_region_moderate.svg".into(),
        svg::gamma_region_svg(&moderate, samples),
    ));
    outcome_svgs.push((
        "gamma_region_isotropic.svg".into(),
        svg::gamma_region_svg(&iso, samples),
    ));
    let mid = cusp_params(0.5, 1.5, 0.5)?;
    let ev = ExponentVector::new(&[0.5, 1.5], 0.4)?;
    let view = AnisoBox::centered(0.9, &ev)?;
    outcome_svgs.push((
        "ab_decomposition.svg".into(),
        svg::ab_decomposition_svg(&mid, &view, &[-0.2, -0.2], samples),
    ));
    let mut outcome = Outcome::new(report);
    outcome.svg_files = outcome_svgs;
    Ok(outcome)
}

fn mc_vs_spectral(cfg: &Config) -> RunResult {
    use rand::Rng;
    let paths = cfg.usize_or("paths", 100_000)?;
    let probes_n = cfg.usize_or("probes", 20)?;
    let mut report = new_report(cfg);
    let mut csv = csv_header("mc-vs-spectral", "x1,x2,t,estimate,stderr,spectral,n,seed");
    for (family, alphas) in [
        (0u64, vec![1.0, 1.0]),
        (1, vec![0.5, 1.5]),
        (2, vec![1.9, 1.9]),
    ] {
        let ev = ExponentVector::new(&alphas, 0.4)?;
        let coeffs = axes_matched_coefficients(&ev);
        let field = SpectralField::random_real(
            16.0,
            6,
            4,
            &ev,
            &coeffs,
            cfg.seed.wrapping_add(1000 + family),
        )?;
        let mut rng = aniso_core::rng::substream(cfg.seed.wrapping_add(2000 + family), 0);
        let probes: Vec<Vec<f64>> = (0..probes_n)
            .map(|_| (0..2).map(|_| rng.random_range(-2.0..2.0)).collect())
            .collect();
        for t in [0.1, 1.0] {
            let exact = field.evolve(t)?;
            let estimates = estimate_solution(
                &|x| field.eval_at(x),
                &ev,
                &coeffs,
                t,
                &probes,
                paths,
                cfg.seed.wrapping_add(3000 + family),
            )?;
            let mut worst_sigmas = 0.0f64;
            for (e, x) in estimates.iter().zip(&probes) {
                let reference = exact.eval_at(x);
                let sigmas = (e.value - reference).abs() / e.std_error.max(1e-12);
                worst_sigmas = worst_sigmas.max(sigmas);
                csv.push_str(&format!(
                    "{:.6},{:.6},{t},{:.12e},{:.3e},{:.12e},{paths},{}\n",
                    x[0], x[1], e.value, e.std_error, reference, cfg.seed
                ));
            }
            report.push(
                CheckLine::new(
                    format!("agreement alphas={alphas:?} t={t}"),
                    worst_sigmas < 3.0,
                )
                .with("worst_sigmas", worst_sigmas)
                .tolerance(3.0),
            );
        }
    }
    let mut outcome = Outcome::new(report);
    outcome.csv_files.push(("mc_vs_spectral.csv".into(), csv));
    Ok(outcome)
}
