use std::fs;

use clap::{Args, ValueEnum};
use serde_json::{json, Value};

use mdthresh::calibration::{calibration_table, display_p, lindley_report, parity_row, round_to};
use mdthresh::lab::{bic_gap_limit, bic_sweep, dawid_check};
use mdthresh::risk::{
    chernoff_information, default_grid, efron_truax_error, efron_truax_log_error, risk_curve,
};
use mdthresh::tails::{classify_regime, mc_tail, tail_moderate_deviation, ScaleRule};
use mdthresh::thresholds::{
    expfam_threshold, gaussian_threshold, horseshoe_threshold, numeric_threshold, rs_threshold_t,
};
use mdthresh::{ModelFamily, PriorSpec, TestProblem, ThresholdResult};

use crate::output::{num, opt, Format, Report};
use crate::{Cli, CliError, Command};

type Res<T> = Result<T, CliError>;

/// `a:b` with both parts positive, e.g. prior odds `1:1`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Ratio(pub f64, pub f64);

impl std::str::FromStr for Ratio {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        let (a, b) = s
            .split_once(':')
            .ok_or_else(|| format!("expected a:b, got {s:?}"))?;
        let parse = |v: &str| {
            v.trim()
                .parse::<f64>()
                .map_err(|e| format!("bad number {v:?}: {e}"))
        };
        let (a, b) = (parse(a)?, parse(b)?);
        if !(a > 0.0 && b > 0.0 && a.is_finite() && b.is_finite()) {
            return Err(format!("both parts must be positive and finite, got {s:?}"));
        }
        Ok(Ratio(a, b))
    }
}

fn parse_prior(s: &str) -> Result<PriorSpec, String> {
    s.parse::<PriorSpec>().map_err(|e| e.to_string())
}

#[derive(Debug, Clone, Args)]
pub struct ProblemArgs {
    /// Prior on the alternative: cauchy:loc,scale | gaussian:mu,tau |
    /// student_t:loc,scale,df | flat:c | horseshoe:scale.
    #[arg(long, default_value = "cauchy:0,1", value_parser = parse_prior)]
    pub prior: PriorSpec,
    /// Known sampling standard deviation.
    #[arg(long, default_value_t = 1.0)]
    pub sigma: f64,
    /// Prior odds π₀:π_a.
    #[arg(long, default_value = "1:1")]
    pub odds: Ratio,
    /// Null value θ₀.
    #[arg(long, default_value_t = 0.0, allow_negative_numbers = true)]
    pub theta0: f64,
}

impl ProblemArgs {
    fn problem(&self, losses: Ratio) -> Res<TestProblem> {
        Ok(TestProblem::gaussian(self.theta0, self.sigma, self.prior)?
            .with_odds(self.odds.0, self.odds.1)?
            .with_losses(losses.0, losses.1)?)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum MethodArg {
    Thm1,
    Thm2,
    Numeric,
    Horseshoe,
    Rs,
}

#[derive(Debug, Clone, Args)]
pub struct ThresholdArgs {
    #[arg(long)]
    pub n: u64,
    #[command(flatten)]
    pub problem: ProblemArgs,
    /// Fisher information per observation; selects the exponential-family formula.
    #[arg(long)]
    pub fisher: Option<f64>,
    /// Losses L₀:L₁ for a false rejection and a false acceptance.
    #[arg(long, default_value = "1:1")]
    pub losses: Ratio,
    #[arg(long, value_enum)]
    pub method: Option<MethodArg>,
    /// Number of tested parameters (rs method).
    #[arg(long, default_value_t = 1)]
    pub k: u64,
    /// Exponent λ of the rs boundary.
    #[arg(long, default_value_t = 0.0, allow_negative_numbers = true)]
    pub lambda_exp: f64,
    /// Nuisance dimension (rs method); does not change the boundary.
    #[arg(long)]
    pub m: Option<u64>,
}

#[derive(Debug, Clone, Args)]
pub struct TableArgs {
    #[arg(long, value_delimiter = ',', default_value = "5,10,100,1000,100000")]
    pub n: Vec<u64>,
    #[command(flatten)]
    pub problem: ProblemArgs,
    /// Level for the fixed-level and e-value columns.
    #[arg(long, default_value_t = 0.05)]
    pub alpha: f64,
}

#[derive(Debug, Clone, Args)]
pub struct RiskCurveArgs {
    #[arg(long)]
    pub n: u64,
    #[command(flatten)]
    pub problem: ProblemArgs,
    #[arg(long, default_value = "1:1")]
    pub losses: Ratio,
    /// Grid size on [0, √(6 log n)].
    #[arg(long, default_value_t = 121)]
    pub points: usize,
    /// Write the grid to this file; stdout then carries only the optimum.
    #[arg(long, value_name = "PATH")]
    pub out: Option<String>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum FamilyArg {
    Gaussian,
    Bernoulli,
}

#[derive(Debug, Clone, Args)]
#[command(group(clap::ArgGroup::new("scale").args(["a", "c_root", "lambda"])))]
pub struct TailsArgs {
    #[arg(long)]
    pub n: u64,
    /// λₙ = a·√(log n / n).
    #[arg(long)]
    pub a: Option<f64>,
    /// λₙ = c/√n.
    #[arg(long)]
    pub c_root: Option<f64>,
    /// Fixed λ.
    #[arg(long)]
    pub lambda: Option<f64>,
    #[arg(long, value_enum, default_value = "gaussian")]
    pub family: FamilyArg,
    #[arg(long, default_value_t = 1.0)]
    pub sigma: f64,
    /// Success probability under the null (bernoulli).
    #[arg(long, default_value_t = 0.5)]
    pub p0: f64,
    /// Add a Monte Carlo estimate.
    #[arg(long)]
    pub mc: bool,
    #[arg(long, default_value_t = 1_000_000)]
    pub reps: u64,
}

#[derive(Debug, Clone, Args)]
pub struct ChernoffArgs {
    #[arg(long, value_enum, default_value = "gaussian")]
    pub family: FamilyArg,
    /// Null parameter: mean (gaussian) or success probability (bernoulli).
    #[arg(long, allow_negative_numbers = true)]
    pub theta0: f64,
    #[arg(long, allow_negative_numbers = true)]
    pub theta1: f64,
    #[arg(long, default_value_t = 1.0)]
    pub sigma: f64,
    /// Sample size for the Efron–Truax error comparison (gaussian).
    #[arg(long)]
    pub n: Option<u64>,
}

#[derive(Debug, Clone, Args)]
pub struct LindleyArgs {
    #[arg(long)]
    pub n: u64,
    /// Observed standardized statistic.
    #[arg(long, allow_negative_numbers = true)]
    pub t: f64,
    #[command(flatten)]
    pub problem: ProblemArgs,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Experiment {
    Dawid,
    Bic,
}

#[derive(Debug, Clone, Args)]
pub struct LabArgs {
    #[arg(long, value_enum)]
    pub experiment: Experiment,
    /// Sample size (dawid).
    #[arg(long, default_value_t = 10_000)]
    pub n: u64,
    /// Replications (dawid).
    #[arg(long, default_value_t = 2000)]
    pub reps: u64,
    /// Prior scale of the N(0, τ²) alternative.
    #[arg(long, default_value_t = 1.0)]
    pub tau: f64,
    /// Sample sizes (bic).
    #[arg(
        long,
        value_delimiter = ',',
        default_value = "100,1000,10000,100000,1000000"
    )]
    pub n_list: Vec<u64>,
    /// True mean of the simulated data (bic).
    #[arg(long, default_value_t = 0.5, allow_negative_numbers = true)]
    pub theta: f64,
    /// Include the per-replication statistics (dawid, json).
    #[arg(long)]
    pub samples: bool,
}

pub fn dispatch(cli: &Cli) -> Res<String> {
    let (report, default) = match &cli.command {
        Command::Threshold(a) => (threshold(a, cli.paper_parity)?, Format::Json),
        Command::Table(a) => (table(a, cli.paper_parity)?, Format::Csv),
        Command::RiskCurve(a) => (risk(a, cli.format.unwrap_or(Format::Csv))?, Format::Csv),
        Command::Tails(a) => (tails(a, cli.seed)?, Format::Json),
        Command::Chernoff(a) => (chernoff(a)?, Format::Json),
        Command::Lindley(a) => (lindley(a, cli.paper_parity)?, Format::Json),
        Command::Lab(a) => (lab(a, cli.seed)?, Format::Json),
    };
    Ok(report.render(cli.format.unwrap_or(default)))
}

fn finite(what: &str, x: f64) -> Res<f64> {
    if x.is_finite() {
        Ok(x)
    } else {
        Err(CliError::Numeric(format!("{what} is not finite ({x})")))
    }
}

fn threshold(a: &ThresholdArgs, parity: bool) -> Res<Report> {
    let p = &a.problem;
    let problem = p.problem(a.losses)?;
    let method = a.method.unwrap_or(if a.fisher.is_some() {
        MethodArg::Thm2
    } else {
        MethodArg::Thm1
    });
    if a.m.is_some() {
        eprintln!("note: --m is accepted but does not enter the boundary");
    }
    let (w0, wa) = (problem.pi0 * problem.loss0, problem.pia * problem.loss1);
    let th: ThresholdResult = match method {
        MethodArg::Thm1 => {
            if a.fisher.is_some() {
                return Err(CliError::Usage("--fisher needs --method thm2".into()));
            }
            gaussian_threshold(a.n, p.sigma, problem.c_pi()?, w0, wa)?
        }
        MethodArg::Thm2 => {
            let fisher = a.fisher.unwrap_or(1.0 / (p.sigma * p.sigma));
            expfam_threshold(a.n, fisher, problem.c_pi()?, w0, wa)?
        }
        MethodArg::Numeric => numeric_threshold(&problem, a.n)?,
        MethodArg::Horseshoe => horseshoe_threshold(a.n)?,
        MethodArg::Rs => rs_threshold_t(a.n, a.k, a.lambda_exp, p.sigma)?,
    };
    finite("t_crit_sq", th.t_crit_sq)?;
    let t_crit = th.t_crit.map(|t| if parity { round_to(t, 2) } else { t });
    let mut json = serde_json::to_value(th).expect("threshold serializes");
    json["t_crit"] = json!(t_crit);
    json["prior"] = json!(p.prior.to_string());
    json["sigma"] = json!(p.sigma);
    if let Some(f) = a.fisher {
        json["fisher"] = json!(f);
    }
    let terms = th.terms;
    let header = [
        "n",
        "method",
        "t_crit_sq",
        "t_crit",
        "log_n",
        "prior_term",
        "info_term",
        "odds_term",
        "remainder",
        "assumed_constant",
    ];
    let row = vec![
        th.n.to_string(),
        th.method.as_str().to_string(),
        num(th.t_crit_sq),
        if parity {
            t_crit.map(|t| format!("{t:.2}")).unwrap_or_default()
        } else {
            opt(t_crit)
        },
        opt(terms.map(|t| t.log_n)),
        opt(terms.map(|t| t.prior_term)),
        opt(terms.map(|t| t.info_term)),
        opt(terms.map(|t| t.odds_term)),
        th.remainder.to_string(),
        opt(th.assumed_constant),
    ];
    Ok(Report::new(&header, json).row(row))
}

fn table(a: &TableArgs, parity: bool) -> Res<Report> {
    if a.n.is_empty() {
        return Err(CliError::Usage("--n needs at least one sample size".into()));
    }
    let problem = a.problem.problem(Ratio(1.0, 1.0))?;
    let rows = calibration_table(&problem, &a.n, a.alpha)?;
    for r in &rows {
        finite("t_rs", r.t_rs)?;
    }
    if parity {
        let mut rep = Report::new(&["n", "t_rs", "p_at_rs"], Value::Null);
        let mut json = Vec::new();
        for r in &rows {
            let (t, p) = parity_row(r);
            json.push(json!({ "n": r.n, "t_rs": t, "p_at_rs": p }));
            rep = rep.row(vec![r.n.to_string(), t, p]);
        }
        rep.json = Value::Array(json);
        return Ok(rep);
    }
    let json = serde_json::to_value(&rows).expect("rows serialize");
    let mut rep = Report::new(&["n", "t_rs", "t_np", "t_ev", "p_at_rs"], json);
    for r in &rows {
        rep = rep.row(vec![
            r.n.to_string(),
            num(r.t_rs),
            num(r.t_np),
            num(r.t_ev),
            num(r.p_at_rs),
        ]);
    }
    Ok(rep)
}

fn risk(a: &RiskCurveArgs, format: Format) -> Res<Report> {
    if a.points < 2 {
        return Err(CliError::Usage("--points must be at least 2".into()));
    }
    let problem = a.problem.problem(a.losses)?;
    if a.n < 2 {
        return Err(CliError::Usage("--n must be at least 2".into()));
    }
    let grid = default_grid::<f64>(a.n, a.points);
    let curve = risk_curve(&problem, a.n, &grid)?;
    finite("c_star", curve.c_star)?;
    finite("r_star", curve.r_star)?;
    let summary = format!("c_star={} r_star={}", curve.c_star, curve.r_star);
    let mut full = Report::new(
        &["c", "alpha", "beta", "total"],
        serde_json::to_value(&curve).expect("curve serializes"),
    );
    for i in 0..curve.grid.len() {
        full = full.row(vec![
            num(curve.grid[i]),
            num(curve.alpha[i]),
            num(curve.beta[i]),
            num(curve.total[i]),
        ]);
    }
    full.trailer = Some(summary);
    let Some(path) = &a.out else {
        return Ok(full);
    };
    fs::write(path, full.render(format))
        .map_err(|e| CliError::Usage(format!("cannot write {path}: {e}")))?;
    eprintln!("wrote {} grid points to {path}", curve.grid.len());
    let json = json!({ "n": curve.n, "c_star": curve.c_star, "r_star": curve.r_star, "out": path });
    Ok(Report::new(&["n", "c_star", "r_star"], json).row(vec![
        curve.n.to_string(),
        num(curve.c_star),
        num(curve.r_star),
    ]))
}

fn tails(a: &TailsArgs, seed: u64) -> Res<Report> {
    let (family, sigma) = match a.family {
        FamilyArg::Gaussian => (ModelFamily::gaussian(0.0, a.sigma)?, a.sigma),
        FamilyArg::Bernoulli => {
            let f = ModelFamily::bernoulli(a.p0)?;
            let sd = f.variance().sqrt();
            (f, sd)
        }
    };
    let rule = match (a.a, a.c_root, a.lambda) {
        (_, Some(c), _) => ScaleRule::COverSqrtN(c),
        (_, _, Some(l)) => ScaleRule::Fixed(l),
        (a, _, _) => ScaleRule::RsBoundary(a.unwrap_or(1.0)),
    };
    let regime = classify_regime(rule, a.n, sigma)?;
    let md_approx = match rule {
        ScaleRule::RsBoundary(c) => Some(tail_moderate_deviation(a.n, c, sigma)?.value),
        _ => None,
    };
    let exact = family.exact_tail(a.n, regime.lambda);
    let mc = if a.mc {
        Some(mc_tail(&family, a.n, regime.lambda, a.reps, seed)?)
    } else {
        None
    };
    let json = json!({
        "n": a.n,
        "family": family.name(),
        "sigma": sigma,
        "regime": regime.label.to_string(),
        "lambda": regime.lambda,
        "z": regime.z,
        "md_approx": md_approx,
        "exact": exact,
        "mc": mc.map(|m| m.value),
        "mc_se": mc.map(|m| m.se),
        "reps": mc.map(|_| a.reps),
        "seed": mc.map(|_| seed),
    });
    let row = vec![
        a.n.to_string(),
        regime.label.to_string(),
        num(regime.lambda),
        num(regime.z),
        opt(md_approx),
        opt(exact),
        opt(mc.map(|m| m.value)),
        opt(mc.map(|m| m.se)),
    ];
    Ok(Report::new(
        &[
            "n", "regime", "lambda", "z", "md_approx", "exact", "mc", "mc_se",
        ],
        json,
    )
    .row(row))
}

fn chernoff(a: &ChernoffArgs) -> Res<Report> {
    let (f0, f1) = match a.family {
        FamilyArg::Gaussian => (
            ModelFamily::gaussian(a.theta0, a.sigma)?,
            ModelFamily::gaussian(a.theta1, a.sigma)?,
        ),
        FamilyArg::Bernoulli => (
            ModelFamily::bernoulli(a.theta0)?,
            ModelFamily::bernoulli(a.theta1)?,
        ),
    };
    let c = chernoff_information(&f0, &f1)?;
    let mut json = json!({
        "family": f0.name(),
        "theta0": a.theta0,
        "theta1": a.theta1,
        "d_c": c.d_c,
        "s_star": c.s_star,
    });
    let mut header = vec!["d_c", "s_star"];
    let mut row = vec![num(c.d_c), num(c.s_star)];
    if let Some(n) = a.n {
        if a.family != FamilyArg::Gaussian {
            return Err(CliError::Usage(
                "--n is only supported for the gaussian family".into(),
            ));
        }
        let delta = (a.theta1 - a.theta0).abs();
        let et = efron_truax_error(n, delta, a.sigma)?;
        let (log_pre, log_exact) = efron_truax_log_error(n, delta, a.sigma)?;
        let ratio = (log_pre - log_exact).exp();
        json["n"] = json!(n);
        json["prefactor_error"] = json!(et.prefactor_error);
        json["exact_error"] = json!(et.exact_error);
        json["log_prefactor_error"] = json!(log_pre);
        json["log_exact_error"] = json!(log_exact);
        json["ratio"] = json!(finite("error ratio", ratio)?);
        header.extend(["n", "prefactor_error", "exact_error", "ratio"]);
        row.extend([
            n.to_string(),
            opt(et.prefactor_error),
            opt(et.exact_error),
            num(ratio),
        ]);
    }
    Ok(Report::new(&header, json).row(row))
}

fn lindley(a: &LindleyArgs, parity: bool) -> Res<Report> {
    let problem = a.problem.problem(Ratio(1.0, 1.0))?;
    let r = lindley_report(&problem, a.n, a.t)?;
    finite("bf01", r.bf01)?;
    let (bf01, t_crit, post) = if parity {
        (
            round_to(r.bf01, 1),
            round_to(r.t_crit, 2),
            round_to(r.post_h0, 3),
        )
    } else {
        (r.bf01, r.t_crit, r.post_h0)
    };
    let p_value = if parity {
        json!(display_p(r.p_value))
    } else {
        json!(r.p_value)
    };
    let json = json!({
        "n": r.n,
        "t": r.t,
        "bf01": bf01,
        "bf01_leading": r.bf01_leading,
        "post_h0": post,
        "t_crit": t_crit,
        "p_value": p_value,
        "verdict": r.verdict.as_str(),
    });
    let row = vec![
        r.n.to_string(),
        num(r.t),
        num(bf01),
        num(r.bf01_leading),
        num(post),
        num(t_crit),
        if parity {
            display_p(r.p_value)
        } else {
            num(r.p_value)
        },
        r.verdict.as_str().to_string(),
    ];
    Ok(Report::new(
        &[
            "n",
            "t",
            "bf01",
            "bf01_leading",
            "post_h0",
            "t_crit",
            "p_value",
            "verdict",
        ],
        json,
    )
    .row(row))
}

fn lab(a: &LabArgs, seed: u64) -> Res<Report> {
    match a.experiment {
        Experiment::Dawid => {
            let r = dawid_check(a.n, a.reps, seed, a.tau)?;
            if let Some(w) = &r.warning {
                eprintln!("warning: {w}");
            }
            let mut json = serde_json::to_value(&r).expect("report serializes");
            if !a.samples {
                json.as_object_mut()
                    .expect("object")
                    .remove("statistic_samples");
            }
            let row = vec![
                r.n.to_string(),
                r.reps.to_string(),
                r.seed.to_string(),
                num(r.tau),
                num(r.ks_stat),
                num(r.ks_p),
                r.pass.to_string(),
                num(r.mean_d),
                num(r.se_mean_d),
            ];
            Ok(Report::new(
                &[
                    "n",
                    "reps",
                    "seed",
                    "tau",
                    "ks_stat",
                    "ks_p",
                    "pass",
                    "mean_d",
                    "se_mean_d",
                ],
                json,
            )
            .row(row))
        }
        Experiment::Bic => {
            let pts = bic_sweep(&a.n_list, a.theta, a.tau, seed)?;
            let (lo, hi) = pts
                .iter()
                .fold((f64::INFINITY, f64::NEG_INFINITY), |(l, h), p| {
                    (l.min(p.gap), h.max(p.gap))
                });
            let limit = bic_gap_limit(a.theta, a.tau);
            let json = json!({
                "theta": a.theta,
                "tau": a.tau,
                "seed": seed,
                "limit": limit,
                "band_width": hi - lo,
                "points": pts,
            });
            let mut rep = Report::new(&["n", "log_marginal", "loglik_mle", "gap"], json);
            for p in &pts {
                rep = rep.row(vec![
                    p.n.to_string(),
                    num(p.log_marginal),
                    num(p.loglik_mle),
                    num(p.gap),
                ]);
            }
            rep.trailer = Some(format!("band_width={} limit={limit}", hi - lo));
            Ok(rep)
        }
    }
}
