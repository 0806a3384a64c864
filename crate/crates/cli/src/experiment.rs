//! Experiment orchestration: seeded trials run in parallel, exact results
//! collected in seed order, CSV and text reports written serially.

use std::fs;
use std::path::PathBuf;

use anyhow::{Context, Result};
use rayon::prelude::*;

use persuasion_core::environment::{Environment, OracleMode, RoundOracle};
use persuasion_core::exactnum::{format_rational, to_f64, Rational};
use persuasion_core::learner::{
    find_polytopes, run_regret, ConstantProfile, RegretConfig, RegretTrace, SearchSpace,
};
use persuasion_core::model::{compute_opt, sender_expected_utility, Instance};
use persuasion_core::pac::{run_pac, run_pac_known_prior, PacConfig};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ProfileKind {
    Practical,
    Theoretical,
}

impl ProfileKind {
    pub fn build(self, inst: &Instance) -> ConstantProfile {
        match self {
            ProfileKind::Practical => ConstantProfile::practical(inst.bit_complexity_b()),
            ProfileKind::Theoretical => ConstantProfile::theoretical(inst.bit_complexity_b()),
        }
    }
}

#[derive(Debug, Clone)]
pub enum Mode {
    Regret {
        /// One sweep entry per horizon; every seed runs every horizon.
        horizons: Vec<usize>,
        resolve_stride: usize,
        epsilon_override: Option<Rational>,
        t1_override: Option<usize>,
    },
    Pac {
        gamma: Rational,
        eta: Rational,
    },
    PacKnown {
        gamma: Rational,
        eta: Rational,
    },
    /// Region learning only, on the true prior with free queries.
    GeometryOnly {
        epsilon: Rational,
        zeta: Rational,
    },
}

#[derive(Debug, Clone)]
pub struct ExperimentConfig {
    pub mode: Mode,
    pub instance: Instance,
    pub seeds: Vec<u64>,
    pub profile: ProfileKind,
    pub oracle: OracleMode,
    /// Where to write CSVs and the text summary; `None` keeps everything
    /// in memory.
    pub out_dir: Option<PathBuf>,
}

#[derive(Debug)]
pub struct RegretTrial {
    pub seed: u64,
    pub trace: RegretTrace,
}

#[derive(Debug)]
pub struct PacTrial {
    pub seed: u64,
    pub rounds_used: usize,
    pub achieved: Rational,
    pub success: bool,
    pub abort: Option<String>,
}

#[derive(Debug)]
pub struct GeometryTrial {
    pub seed: u64,
    pub closed_regions: usize,
    pub hyperplanes: usize,
    pub rounds: usize,
    pub abort: Option<String>,
}

#[derive(Debug)]
pub enum ExperimentReport {
    Regret {
        opt: Rational,
        trials: Vec<RegretTrial>,
        summary: String,
    },
    Pac {
        opt: Rational,
        gamma: Rational,
        eta: Rational,
        trials: Vec<PacTrial>,
        success_rate: f64,
        summary: String,
    },
    Geometry {
        trials: Vec<GeometryTrial>,
        summary: String,
    },
}

impl ExperimentReport {
    pub fn any_abort(&self) -> bool {
        match self {
            ExperimentReport::Regret { trials, .. } => {
                trials.iter().any(|t| t.trace.abort.is_some())
            }
            ExperimentReport::Pac { trials, .. } => trials.iter().any(|t| t.abort.is_some()),
            ExperimentReport::Geometry { trials, .. } => trials.iter().any(|t| t.abort.is_some()),
        }
    }

    pub fn summary_text(&self) -> &str {
        match self {
            ExperimentReport::Regret { summary, .. }
            | ExperimentReport::Pac { summary, .. }
            | ExperimentReport::Geometry { summary, .. } => summary,
        }
    }
}

/// Sample mean and a 95% normal-approximation confidence half-width.
fn mean_ci(vals: &[f64]) -> (f64, f64) {
    let n = vals.len() as f64;
    if vals.is_empty() {
        return (0.0, 0.0);
    }
    let mean = vals.iter().sum::<f64>() / n;
    if vals.len() < 2 {
        return (mean, 0.0);
    }
    let var = vals.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (n - 1.0);
    (mean, 1.96 * (var / n).sqrt())
}

pub fn run_experiment(cfg: &ExperimentConfig) -> Result<ExperimentReport> {
    let report = match &cfg.mode {
        Mode::Regret {
            horizons,
            resolve_stride,
            epsilon_override,
            t1_override,
        } => run_regret_mode(cfg, horizons, *resolve_stride, epsilon_override, t1_override),
        Mode::Pac { gamma, eta } => run_pac_mode(cfg, gamma, eta, false),
        Mode::PacKnown { gamma, eta } => run_pac_mode(cfg, gamma, eta, true),
        Mode::GeometryOnly { epsilon, zeta } => run_geometry_mode(cfg, epsilon, zeta),
    };
    let report = report?;
    if let Some(dir) = &cfg.out_dir {
        fs::create_dir_all(dir).with_context(|| format!("creating {}", dir.display()))?;
        write_report(dir, &report)?;
    }
    Ok(report)
}

fn run_regret_mode(
    cfg: &ExperimentConfig,
    horizons: &[usize],
    stride: usize,
    epsilon_override: &Option<Rational>,
    t1_override: &Option<usize>,
) -> Result<ExperimentReport> {
    anyhow::ensure!(!horizons.is_empty(), "regret mode needs at least one horizon");
    let profile = cfg.profile.build(&cfg.instance);
    let jobs: Vec<(usize, u64)> = horizons
        .iter()
        .flat_map(|&t| cfg.seeds.iter().map(move |&s| (t, s)))
        .collect();
    let trials: Vec<RegretTrial> = jobs
        .par_iter()
        .map(|&(horizon, seed)| {
            let mut env = Environment::new(cfg.instance.clone(), seed, cfg.oracle);
            let mut rc = RegretConfig::new(horizon, profile);
            rc.learner_seed = seed;
            rc.resolve_stride = stride;
            rc.epsilon_override = epsilon_override.clone();
            rc.t1_override = *t1_override;
            let trace = run_regret(&mut env, &rc);
            RegretTrial { seed, trace }
        })
        .collect();
    let opt = trials[0].trace.opt.clone();

    let mut summary = String::new();
    for &t in horizons {
        let totals: Vec<f64> = trials
            .iter()
            .filter(|tr| tr.trace.horizon == t)
            .map(|tr| to_f64(&tr.trace.total_regret()))
            .collect();
        let (mean, ci) = mean_ci(&totals);
        summary.push_str(&format!(
            "T={t}: mean R_T = {mean:.4} ± {ci:.4} (95% CI, {} seeds), R_T/T = {:.6}\n",
            totals.len(),
            mean / t as f64
        ));
    }
    for w in horizons.windows(2) {
        let mean_at = |t: usize| {
            let totals: Vec<f64> = trials
                .iter()
                .filter(|tr| tr.trace.horizon == t)
                .map(|tr| to_f64(&tr.trace.total_regret()))
                .collect();
            mean_ci(&totals).0
        };
        let (a, b) = (mean_at(w[0]), mean_at(w[1]));
        summary.push_str(&format!(
            "sublinearity ratio R_{}/R_{} = {:.4}\n",
            w[1],
            w[0],
            if a.abs() > f64::EPSILON { b / a } else { f64::NAN }
        ));
    }
    let aborts = trials.iter().filter(|t| t.trace.abort.is_some()).count();
    summary.push_str(&format!("aborted trials: {aborts}/{}\n", trials.len()));
    Ok(ExperimentReport::Regret {
        opt,
        trials,
        summary,
    })
}

fn run_pac_mode(
    cfg: &ExperimentConfig,
    gamma: &Rational,
    eta: &Rational,
    known_prior: bool,
) -> Result<ExperimentReport> {
    let profile = cfg.profile.build(&cfg.instance);
    let (opt, _) = compute_opt(&cfg.instance);
    let trials: Vec<PacTrial> = cfg
        .seeds
        .par_iter()
        .map(|&seed| {
            let mut env = if known_prior {
                Environment::with_exposed_prior(cfg.instance.clone(), seed, cfg.oracle)
            } else {
                Environment::new(cfg.instance.clone(), seed, cfg.oracle)
            };
            env.set_recording(false);
            let mut pc = PacConfig::new(gamma.clone(), eta.clone(), profile);
            pc.learner_seed = seed;
            let outcome = if known_prior {
                run_pac_known_prior(&mut env, &pc)
            } else {
                run_pac(&mut env, &pc)
            };
            match outcome {
                Ok(out) => {
                    let achieved = sender_expected_utility(&cfg.instance, &out.scheme);
                    let success = &opt - &achieved <= *gamma;
                    PacTrial {
                        seed,
                        rounds_used: out.rounds_used,
                        achieved,
                        success,
                        abort: None,
                    }
                }
                Err(a) => PacTrial {
                    seed,
                    rounds_used: env.round() - 1,
                    achieved: Rational::new(0.into(), 1.into()),
                    success: false,
                    abort: Some(a.to_string()),
                },
            }
        })
        .collect();
    let successes = trials.iter().filter(|t| t.success).count();
    let success_rate = successes as f64 / trials.len().max(1) as f64;
    let rounds: Vec<f64> = trials.iter().map(|t| t.rounds_used as f64).collect();
    let (mean_rounds, ci_rounds) = mean_ci(&rounds);
    let summary = format!(
        "PAC γ={gamma} η={eta} ({} mode): success rate {successes}/{} = {success_rate:.3}\n\
         mean rounds used = {mean_rounds:.1} ± {ci_rounds:.1} (95% CI)\nOPT = {}\n",
        if known_prior { "known-prior" } else { "unknown-prior" },
        trials.len(),
        format_rational(&opt),
    );
    Ok(ExperimentReport::Pac {
        opt,
        gamma: gamma.clone(),
        eta: eta.clone(),
        trials,
        success_rate,
        summary,
    })
}

fn run_geometry_mode(
    cfg: &ExperimentConfig,
    epsilon: &Rational,
    zeta: &Rational,
) -> Result<ExperimentReport> {
    let profile = cfg.profile.build(&cfg.instance);
    let trials: Vec<GeometryTrial> = cfg
        .seeds
        .par_iter()
        .map(|&seed| {
            let mut env = Environment::new(cfg.instance.clone(), seed, cfg.oracle);
            env.set_recording(false);
            let trial = SearchSpace::from_prior(cfg.instance.prior.clone(), epsilon)
                .map_err(Into::into)
                .and_then(|space| {
                    find_polytopes(&mut env, &space, zeta, profile, seed, None)
                });
            match trial {
                Ok(regions) => GeometryTrial {
                    seed,
                    closed_regions: regions.closed.len(),
                    hyperplanes: regions.hyperplanes.len(),
                    rounds: env.round() - 1,
                    abort: None,
                },
                Err(stop) => GeometryTrial {
                    seed,
                    closed_regions: 0,
                    hyperplanes: 0,
                    rounds: env.round() - 1,
                    abort: Some(format!("{stop:?}")),
                },
            }
        })
        .collect();
    let aborts = trials.iter().filter(|t| t.abort.is_some()).count();
    let summary = format!(
        "geometry: {} trials, {aborts} aborted, mean hyperplanes {:.2}, mean rounds {:.1}\n",
        trials.len(),
        trials.iter().map(|t| t.hyperplanes as f64).sum::<f64>() / trials.len().max(1) as f64,
        trials.iter().map(|t| t.rounds as f64).sum::<f64>() / trials.len().max(1) as f64,
    );
    Ok(ExperimentReport::Geometry { trials, summary })
}

fn write_report(dir: &PathBuf, report: &ExperimentReport) -> Result<()> {
    match report {
        ExperimentReport::Regret { trials, .. } => {
            for trial in trials {
                let path = dir.join(format!(
                    "trace_T{}_seed{}.csv",
                    trial.trace.horizon, trial.seed
                ));
                let mut w = csv::Writer::from_path(&path)?;
                w.write_record([
                    "t",
                    "phase",
                    "expected_utility",
                    "realized",
                    "cum_regret",
                    "cum_regret_float",
                ])?;
                let expected = trial.trace.expected_per_round();
                let mut cum = Rational::new(0.into(), 1.into());
                for (i, e) in expected.iter().enumerate() {
                    let t = i + 1;
                    cum += &trial.trace.opt - e;
                    let realized = trial
                        .trace
                        .realized
                        .get(i)
                        .map(format_rational)
                        .unwrap_or_default();
                    w.write_record([
                        t.to_string(),
                        trial.trace.phase(t).to_string(),
                        format_rational(e),
                        realized,
                        format_rational(&cum),
                        format!("{:.9}", to_f64(&cum)),
                    ])?;
                }
                w.flush()?;
            }
            let mut w = csv::Writer::from_path(dir.join("summary.csv"))?;
            w.write_record([
                "seed",
                "horizon",
                "t1",
                "phase2_end",
                "epsilon",
                "opt",
                "total_regret",
                "total_regret_float",
                "abort",
            ])?;
            for trial in trials {
                let tr = &trial.trace;
                let total = tr.total_regret();
                w.write_record([
                    trial.seed.to_string(),
                    tr.horizon.to_string(),
                    tr.t1.to_string(),
                    tr.phase2_end.to_string(),
                    format_rational(&tr.epsilon),
                    format_rational(&tr.opt),
                    format_rational(&total),
                    format!("{:.9}", to_f64(&total)),
                    tr.abort.as_ref().map(|a| a.to_string()).unwrap_or_default(),
                ])?;
            }
            w.flush()?;
        }
        ExperimentReport::Pac {
            opt,
            gamma,
            eta,
            trials,
            ..
        } => {
            let mut w = csv::Writer::from_path(dir.join("results.csv"))?;
            w.write_record([
                "seed",
                "gamma",
                "eta",
                "rounds_used",
                "opt",
                "achieved",
                "gap",
                "success",
                "abort_reason",
            ])?;
            for t in trials {
                let gap = opt - &t.achieved;
                w.write_record([
                    t.seed.to_string(),
                    format_rational(gamma),
                    format_rational(eta),
                    t.rounds_used.to_string(),
                    format_rational(opt),
                    format_rational(&t.achieved),
                    format_rational(&gap),
                    t.success.to_string(),
                    t.abort.clone().unwrap_or_default(),
                ])?;
            }
            w.flush()?;
        }
        ExperimentReport::Geometry { trials, .. } => {
            let mut w = csv::Writer::from_path(dir.join("geometry.csv"))?;
            w.write_record(["seed", "closed_regions", "hyperplanes", "rounds", "abort"])?;
            for t in trials {
                w.write_record([
                    t.seed.to_string(),
                    t.closed_regions.to_string(),
                    t.hyperplanes.to_string(),
                    t.rounds.to_string(),
                    t.abort.clone().unwrap_or_default(),
                ])?;
            }
            w.flush()?;
        }
    }
    fs::write(dir.join("summary.txt"), report.summary_text())?;
    Ok(())
}
