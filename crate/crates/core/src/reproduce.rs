//! Named experiments: the default configuration plus one deviation,
//! run over the default seeds and written out as plot-ready CSV.

use std::fmt;
use std::path::Path;
use std::str::FromStr;

use crate::engine::Trajectory;
use crate::error::{Error, Result};
use crate::experiments::{
    default_seeds, result_from_trajectories, run_replicates, series_band, sweep, Axis, SweepResult,
    SweepSpec, BOOTSTRAP_SEED,
};
use crate::io::{
    emit_run_csv, write_decomposition_csv, write_histogram_csv, write_intervals_csv,
    write_series_bands_csv, write_sweep_csv, RunManifest, SweepDescriptor,
};
use crate::metrics::MetricSnapshot;
use crate::model::{AgentMode, ModelConfig, Variant};
use crate::rng::{Distribution, RandomStream};

/// Bin width of the homogeneous-mode citation histogram.
pub const HISTOGRAM_BIN: u32 = 50;

/// Stream ids for series bands start here so they never meet the sweep
/// interval streams.
const SERIES_STREAM_BASE: u64 = 1 << 32;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Experiment {
    Fig2,
    Fig3,
    Fig4,
    Fig5,
    S2,
    S3,
    S4,
    S5,
    S6,
    S7,
    S8,
    S9,
    S10,
    S11Alpha0,
    S11Beta,
    S12S13Homogeneous,
}

impl Experiment {
    pub const ALL: [Experiment; 16] = [
        Experiment::Fig2,
        Experiment::Fig3,
        Experiment::Fig4,
        Experiment::Fig5,
        Experiment::S2,
        Experiment::S3,
        Experiment::S4,
        Experiment::S5,
        Experiment::S6,
        Experiment::S7,
        Experiment::S8,
        Experiment::S9,
        Experiment::S10,
        Experiment::S11Alpha0,
        Experiment::S11Beta,
        Experiment::S12S13Homogeneous,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Experiment::Fig2 => "fig2",
            Experiment::Fig3 => "fig3",
            Experiment::Fig4 => "fig4",
            Experiment::Fig5 => "fig5",
            Experiment::S2 => "s2",
            Experiment::S3 => "s3",
            Experiment::S4 => "s4",
            Experiment::S5 => "s5",
            Experiment::S6 => "s6",
            Experiment::S7 => "s7",
            Experiment::S8 => "s8",
            Experiment::S9 => "s9",
            Experiment::S10 => "s10",
            Experiment::S11Alpha0 => "s11_alpha0",
            Experiment::S11Beta => "s11_beta",
            Experiment::S12S13Homogeneous => "s12_s13_homogeneous",
        }
    }

    pub fn names() -> Vec<&'static str> {
        Self::ALL.iter().map(|e| e.name()).collect()
    }

    /// The experiment's configuration, before anything is run.
    pub fn plan(self, seeds: &[u64]) -> Plan {
        let defaults = ModelConfig::default();
        let with = |f: &dyn Fn(&mut ModelConfig)| {
            let mut c = defaults.clone();
            f(&mut c);
            c
        };
        let all = Variant::ALL.to_vec();
        let study =
            |label: &str, base: ModelConfig, axis, values: Vec<f64>, variants: Vec<Variant>| {
                Study {
                    label: label.to_string(),
                    spec: SweepSpec {
                        base,
                        axis,
                        values,
                        seeds: seeds.to_vec(),
                        variants,
                    },
                }
            };
        let citing = |base: ModelConfig| {
            vec![study(
                "citing_budget",
                base,
                Axis::CitingBudget,
                grid(20.0, 100.0, 10.0),
                all.clone(),
            )]
        };
        let at_defaults = |base: ModelConfig| {
            let n = base.citing_budget as f64;
            vec![study(
                "defaults",
                base,
                Axis::CitingBudget,
                vec![n],
                all.clone(),
            )]
        };
        let truncated = |mu, sd| Distribution::Normal {
            mu,
            sd,
            truncate: Some((0.0, 1.0)),
        };

        let (base, studies, output) = match self {
            Experiment::Fig2 => (
                defaults.clone(),
                at_defaults(defaults.clone()),
                Output::Series,
            ),
            Experiment::Fig3 => (defaults.clone(), citing(defaults.clone()), Output::Sweep),
            Experiment::Fig4 => (
                defaults.clone(),
                vec![study(
                    "reading_budget",
                    defaults.clone(),
                    Axis::ReadingBudget,
                    grid(50.0, 150.0, 10.0),
                    all.clone(),
                )],
                Output::Sweep,
            ),
            Experiment::Fig5 => (
                defaults.clone(),
                vec![study(
                    "literature_size",
                    defaults.clone(),
                    Axis::LiteratureSize,
                    grid(200.0, 800.0, 100.0),
                    all.clone(),
                )],
                Output::Sweep,
            ),
            Experiment::S2 | Experiment::S3 => {
                let w = if self == Experiment::S2 { 4.0 } else { 8.0 };
                let c = with(&|c| {
                    c.quality_dist = Distribution::BetaOneW { w };
                    c.rhetorical_dist = Distribution::BetaOneW { w };
                });
                (c.clone(), citing(c), Output::Sweep)
            }
            Experiment::S4 => {
                let c = with(&|c| {
                    c.quality_dist = truncated(0.5, 0.1);
                    c.rhetorical_dist = truncated(0.5, 0.1);
                });
                (c.clone(), citing(c), Output::Sweep)
            }
            Experiment::S5 => {
                let c = with(&|c| c.threshold_dist = truncated(0.5, 0.2));
                (c.clone(), citing(c), Output::Sweep)
            }
            Experiment::S6 => {
                let c = with(&|c| c.error_sd = 0.1);
                (c.clone(), citing(c), Output::Sweep)
            }
            Experiment::S7 => {
                let c = with(&|c| c.error_sd = 0.02);
                (c.clone(), citing(c), Output::Sweep)
            }
            Experiment::S8 => {
                let c = with(&|c| c.fit_halfwidth = 0.05);
                (c.clone(), citing(c), Output::Sweep)
            }
            Experiment::S9 => {
                let c = with(&|c| c.fit_halfwidth = 0.2);
                (c.clone(), citing(c), Output::Sweep)
            }
            Experiment::S10 => {
                let c = with(&|c| c.alpha = 0.0);
                (c.clone(), citing(c), Output::Sweep)
            }
            Experiment::S11Alpha0 => {
                let c = with(&|c| c.alpha = 0.002);
                (c.clone(), citing(c), Output::Sweep)
            }
            Experiment::S11Beta => {
                let betas = [0.0, 0.3, 1.0];
                let mut studies = vec![study(
                    "beta_reinforce",
                    defaults.clone(),
                    Axis::BetaReinforce,
                    betas.to_vec(),
                    vec![Variant::Full],
                )];
                for b in betas {
                    studies.push(study(
                        &format!("citing_budget_beta{b}"),
                        with(&|c| c.beta_reinforce = b),
                        Axis::CitingBudget,
                        grid(20.0, 100.0, 10.0),
                        vec![Variant::Full],
                    ));
                }
                (defaults.clone(), studies, Output::Sweep)
            }
            Experiment::S12S13Homogeneous => {
                let c = with(&|c| c.agent_mode = AgentMode::Homogeneous);
                (c.clone(), at_defaults(c), Output::SeriesWithHistogram)
            }
        };
        Plan {
            experiment: self,
            base,
            seeds: seeds.to_vec(),
            studies,
            output,
        }
    }
}

impl fmt::Display for Experiment {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Experiment {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Self::ALL
            .into_iter()
            .find(|e| e.name() == s)
            .ok_or_else(|| {
                Error::Usage(format!(
                    "unknown experiment `{s}`; expected one of {}",
                    Self::names().join(", ")
                ))
            })
    }
}

/// Inclusive arithmetic grid `lo, lo+step, ..., hi`.
pub fn grid(lo: f64, hi: f64, step: f64) -> Vec<f64> {
    let n = ((hi - lo) / step).round() as usize;
    (0..=n).map(|i| lo + step * i as f64).collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Output {
    /// Sweep summaries and intervals only.
    Sweep,
    /// Also per-run and seed-averaged per-timestep series.
    Series,
    /// Series plus a citation-count histogram.
    SeriesWithHistogram,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Study {
    pub label: String,
    pub spec: SweepSpec,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Plan {
    pub experiment: Experiment,
    pub base: ModelConfig,
    pub seeds: Vec<u64>,
    pub studies: Vec<Study>,
    pub output: Output,
}

impl Plan {
    pub fn manifest(&self) -> RunManifest {
        let mut m = RunManifest::new(self.base.clone(), self.seeds.clone());
        m.experiment = Some(self.experiment.name().to_string());
        m.sweeps = self
            .studies
            .iter()
            .map(|s| SweepDescriptor {
                label: s.label.clone(),
                axis: s.spec.axis.name().to_string(),
                values: s.spec.values.clone(),
                variants: s.spec.variants.clone(),
                base: Some(s.spec.base.clone()),
            })
            .collect();
        m
    }
}

pub struct Reproduction {
    pub plan: Plan,
    pub results: Vec<(String, SweepResult)>,
    /// Replicate trajectories per variant, for series experiments.
    pub series: Vec<(Variant, Vec<Trajectory>)>,
}

impl Reproduction {
    pub fn result(&self, label: &str) -> Option<&SweepResult> {
        self.results
            .iter()
            .find(|(l, _)| l == label)
            .map(|(_, r)| r)
    }
}

pub fn reproduce_named(name: &str, seeds: Option<&[u64]>) -> Result<Reproduction> {
    let experiment: Experiment = name.parse()?;
    let seeds = seeds.map(<[u64]>::to_vec).unwrap_or_else(default_seeds);
    run_plan(experiment.plan(&seeds))
}

pub fn run_plan(plan: Plan) -> Result<Reproduction> {
    let mut results = Vec::new();
    let mut series = Vec::new();
    for study in &plan.studies {
        let result = if plan.output == Output::Sweep {
            sweep(&study.spec)?
        } else {
            let spec = &study.spec;
            spec.validate()?;
            let value = spec.values[0];
            let mut runs = Vec::new();
            for &variant in &spec.variants {
                let config = spec.axis.apply(
                    &ModelConfig {
                        variant,
                        ..spec.base.clone()
                    },
                    value,
                )?;
                runs.push((variant, run_replicates(&config, &spec.seeds)?));
            }
            let result = result_from_trajectories(spec.axis, value, &runs)?;
            series.extend(runs);
            result
        };
        results.push((study.label.clone(), result));
    }
    Ok(Reproduction {
        plan,
        results,
        series,
    })
}

type Pick = fn(&MetricSnapshot) -> Option<f64>;

const SERIES_METRICS: [(&str, Pick); 3] = [
    ("correlation", |s| s.correlation),
    ("churn", |s| s.churn.map(|c| c as f64)),
    ("gini", |s| Some(s.gini)),
];

/// Writes every output file plus `manifest.json` under `dir`.
pub fn write_reproduction(rep: &Reproduction, dir: &Path) -> Result<RunManifest> {
    let mut outputs = Vec::new();
    for (label, result) in &rep.results {
        for (suffix, write) in [
            (
                "sweep",
                write_sweep_csv as fn(&SweepResult, &Path) -> Result<()>,
            ),
            ("intervals", write_intervals_csv),
            ("decomposition", write_decomposition_csv),
        ] {
            let name = format!("{label}.{suffix}.csv");
            write(result, &dir.join(&name))?;
            outputs.push(name);
        }
    }

    if !rep.series.is_empty() {
        for (variant, runs) in &rep.series {
            for t in runs {
                let name = format!("series/{}_seed{}.csv", variant.name(), t.config.seed);
                emit_run_csv(t, &dir.join(&name))?;
                outputs.push(format!("{name}.counts.csv"));
                outputs.push(name);
            }
        }
        let mut bands = Vec::new();
        let mut stream_id = SERIES_STREAM_BASE;
        for (variant, runs) in &rep.series {
            for (metric, pick) in SERIES_METRICS {
                let mut stream = RandomStream::new(BOOTSTRAP_SEED, stream_id);
                stream_id += 1;
                bands.push((*variant, metric, series_band(runs, pick, &mut stream)?));
            }
        }
        write_series_bands_csv(&bands, &dir.join("series_bands.csv"))?;
        outputs.push("series_bands.csv".into());
    }

    if rep.plan.output == Output::SeriesWithHistogram {
        let runs: Vec<(Variant, &Trajectory)> = rep
            .series
            .iter()
            .flat_map(|(v, ts)| ts.iter().map(move |t| (*v, t)))
            .collect();
        write_histogram_csv(&runs, HISTOGRAM_BIN, &dir.join("histogram.csv"))?;
        outputs.push("histogram.csv".into());
    }

    let mut manifest = rep.plan.manifest();
    outputs.push("manifest.json".into());
    outputs.sort();
    manifest.outputs = outputs;
    manifest.write(&dir.join("manifest.json"))?;
    Ok(manifest)
}
