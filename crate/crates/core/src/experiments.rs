//! Replicates, one-axis parameter sweeps, and percentile-bootstrap intervals.

use std::fmt;
use std::str::FromStr;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::engine::{run_simulation, Trajectory};
use crate::error::{Error, Result};
use crate::metrics::{slot_decomposition, SlotDecomposition};
use crate::model::{ModelConfig, Variant};
use crate::rng::{Distribution, RandomStream};

pub const DEFAULT_RESAMPLES: usize = 1000;
pub const DEFAULT_LEVEL: f64 = 0.95;
/// Base seed of the streams used for bootstrap resampling.
pub const BOOTSTRAP_SEED: u64 = 0xB007_5EED;

pub fn default_seeds() -> Vec<u64> {
    (0..10).collect()
}

/// One trajectory per seed, in seed order.
pub fn run_replicates(config: &ModelConfig, seeds: &[u64]) -> Result<Vec<Trajectory>> {
    if seeds.is_empty() {
        return Err(Error::InvalidInput("at least one seed is required".into()));
    }
    seeds
        .par_iter()
        .map(|&seed| {
            run_simulation(&ModelConfig {
                seed,
                ..config.clone()
            })
        })
        .collect()
}

/// Percentile bootstrap interval for the mean of `samples`.
pub fn bootstrap_ci(
    samples: &[f64],
    level: f64,
    resamples: usize,
    stream: &mut RandomStream,
) -> Result<(f64, f64)> {
    if samples.is_empty() {
        return Err(Error::InvalidInput("bootstrap of an empty sample".into()));
    }
    if !(level > 0.0 && level < 1.0) {
        return Err(Error::InvalidParameter(format!(
            "confidence level must be in (0, 1), got {level}"
        )));
    }
    if resamples == 0 {
        return Err(Error::InvalidParameter("resamples must be >= 1".into()));
    }
    let n = samples.len();
    let mut means: Vec<f64> = (0..resamples)
        .map(|_| (0..n).map(|_| samples[stream.index(n)]).sum::<f64>() / n as f64)
        .collect();
    means.sort_by(f64::total_cmp);
    let tail = (1.0 - level) / 2.0;
    Ok((quantile(&means, tail), quantile(&means, 1.0 - tail)))
}

/// Linearly interpolated quantile of ascending `sorted`.
fn quantile(sorted: &[f64], p: f64) -> f64 {
    let pos = p * (sorted.len() - 1) as f64;
    let lo = pos.floor() as usize;
    let hi = pos.ceil() as usize;
    sorted[lo] + (sorted[hi] - sorted[lo]) * (pos - lo as f64)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Axis {
    CitingBudget,
    ReadingBudget,
    LiteratureSize,
    Alpha,
    BetaReinforce,
    ErrorSd,
    FitHalfwidth,
    /// Shape `w` of Beta(1, w), applied to both quality and rhetorical value.
    QualityW,
}

impl Axis {
    pub const ALL: [Axis; 8] = [
        Axis::CitingBudget,
        Axis::ReadingBudget,
        Axis::LiteratureSize,
        Axis::Alpha,
        Axis::BetaReinforce,
        Axis::ErrorSd,
        Axis::FitHalfwidth,
        Axis::QualityW,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Axis::CitingBudget => "citing_budget",
            Axis::ReadingBudget => "reading_budget",
            Axis::LiteratureSize => "literature_size",
            Axis::Alpha => "alpha",
            Axis::BetaReinforce => "beta_reinforce",
            Axis::ErrorSd => "error_sd",
            Axis::FitHalfwidth => "fit_halfwidth",
            Axis::QualityW => "quality_w",
        }
    }

    fn is_integral(self) -> bool {
        matches!(
            self,
            Axis::CitingBudget | Axis::ReadingBudget | Axis::LiteratureSize
        )
    }

    /// `base` with this axis set to `value`, validated.
    pub fn apply(self, base: &ModelConfig, value: f64) -> Result<ModelConfig> {
        if !value.is_finite() {
            return Err(Error::config(
                self.name(),
                format!("non-finite value {value}"),
            ));
        }
        if self.is_integral() && (value < 0.0 || value.fract() != 0.0) {
            return Err(Error::config(
                self.name(),
                format!("needs a nonnegative integer, got {value}"),
            ));
        }
        let mut c = base.clone();
        match self {
            Axis::CitingBudget => c.citing_budget = value as usize,
            Axis::ReadingBudget => c.reading_budget = value as usize,
            Axis::LiteratureSize => c.literature_size = value as usize,
            Axis::Alpha => c.alpha = value,
            Axis::BetaReinforce => c.beta_reinforce = value,
            Axis::ErrorSd => c.error_sd = value,
            Axis::FitHalfwidth => c.fit_halfwidth = value,
            Axis::QualityW => {
                c.quality_dist = Distribution::BetaOneW { w: value };
                c.rhetorical_dist = Distribution::BetaOneW { w: value };
            }
        }
        c.validate()?;
        Ok(c)
    }
}

impl fmt::Display for Axis {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Axis {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Axis::ALL
            .into_iter()
            .find(|a| a.name() == s)
            .ok_or_else(|| {
                let names: Vec<&str> = Axis::ALL.iter().map(|a| a.name()).collect();
                Error::Usage(format!(
                    "unknown axis `{s}`; expected one of {}",
                    names.join(", ")
                ))
            })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepSpec {
    pub base: ModelConfig,
    pub axis: Axis,
    pub values: Vec<f64>,
    pub seeds: Vec<u64>,
    pub variants: Vec<Variant>,
}

impl SweepSpec {
    pub fn validate(&self) -> Result<()> {
        if self.values.is_empty() {
            return Err(Error::InvalidInput("sweep needs at least one value".into()));
        }
        let increasing = self.values.windows(2).all(|w| w[0] < w[1]);
        let decreasing = self.values.windows(2).all(|w| w[0] > w[1]);
        if !(increasing || decreasing) {
            return Err(Error::InvalidInput(
                "sweep values must be strictly monotone".into(),
            ));
        }
        if self.seeds.is_empty() {
            return Err(Error::InvalidInput("sweep needs at least one seed".into()));
        }
        if self.variants.is_empty() {
            return Err(Error::InvalidInput(
                "sweep needs at least one variant".into(),
            ));
        }
        Ok(())
    }

    fn cell_config(&self, variant: Variant, value: f64) -> Result<ModelConfig> {
        let base = ModelConfig {
            variant,
            ..self.base.clone()
        };
        self.axis.apply(&base, value).map_err(|e| match e {
            Error::Config { field, reason } => Error::Config {
                field,
                reason: format!(
                    "{reason} (sweep cell {}={value}, variant {})",
                    self.axis,
                    variant.name()
                ),
            },
            other => other,
        })
    }
}

/// End-of-run summary of one trajectory.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct RunSummary {
    pub end_correlation: Option<f64>,
    pub mean_churn: Option<f64>,
    pub end_gini: f64,
    pub decomposition: SlotDecomposition,
}

impl RunSummary {
    pub fn of(trajectory: &Trajectory) -> Self {
        Self {
            end_correlation: trajectory.end_correlation(),
            mean_churn: trajectory.mean_churn(),
            end_gini: trajectory.end_gini(),
            decomposition: slot_decomposition(trajectory, &trajectory.qualities),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SweepRow {
    pub variant: Variant,
    pub value: f64,
    pub seed: u64,
    pub summary: RunSummary,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Metric {
    EndCorrelation,
    MeanChurn,
    EndGini,
}

impl Metric {
    pub const ALL: [Metric; 3] = [Metric::EndCorrelation, Metric::MeanChurn, Metric::EndGini];

    pub fn name(self) -> &'static str {
        match self {
            Metric::EndCorrelation => "end_correlation",
            Metric::MeanChurn => "mean_churn",
            Metric::EndGini => "end_gini",
        }
    }

    pub fn of(self, s: &RunSummary) -> Option<f64> {
        match self {
            Metric::EndCorrelation => s.end_correlation,
            Metric::MeanChurn => s.mean_churn,
            Metric::EndGini => Some(s.end_gini),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Interval {
    pub variant: Variant,
    pub value: f64,
    pub metric: Metric,
    pub mean: f64,
    pub ci_lo: f64,
    pub ci_hi: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SweepResult {
    pub axis: Axis,
    pub rows: Vec<SweepRow>,
    pub intervals: Vec<Interval>,
}

impl SweepResult {
    /// Rows of one (variant, value) cell in seed order.
    pub fn cell(&self, variant: Variant, value: f64) -> impl Iterator<Item = &SweepRow> {
        self.rows
            .iter()
            .filter(move |r| r.variant == variant && r.value == value)
    }

    /// Seed-averaged metric for one cell, ignoring undefined values.
    pub fn cell_mean(&self, variant: Variant, value: f64, metric: Metric) -> Option<f64> {
        let xs: Vec<f64> = self
            .cell(variant, value)
            .filter_map(|r| metric.of(&r.summary))
            .collect();
        (!xs.is_empty()).then(|| xs.iter().sum::<f64>() / xs.len() as f64)
    }

    pub fn interval(&self, variant: Variant, value: f64, metric: Metric) -> Option<&Interval> {
        self.intervals
            .iter()
            .find(|i| i.variant == variant && i.value == value && i.metric == metric)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Schedule {
    Serial,
    Parallel,
}

pub fn sweep(spec: &SweepSpec) -> Result<SweepResult> {
    sweep_with(spec, Schedule::Parallel)
}

pub fn sweep_with(spec: &SweepSpec, schedule: Schedule) -> Result<SweepResult> {
    spec.validate()?;
    // resolve every cell before running anything so a bad cell fails fast
    let mut jobs = Vec::new();
    for &variant in &spec.variants {
        for &value in &spec.values {
            let config = spec.cell_config(variant, value)?;
            for &seed in &spec.seeds {
                jobs.push((
                    variant,
                    value,
                    ModelConfig {
                        seed,
                        ..config.clone()
                    },
                ));
            }
        }
    }
    let run = |(variant, value, config): &(Variant, f64, ModelConfig)| -> Result<SweepRow> {
        let trajectory = run_simulation(config)?;
        Ok(SweepRow {
            variant: *variant,
            value: *value,
            seed: config.seed,
            summary: RunSummary::of(&trajectory),
        })
    };
    let rows: Vec<SweepRow> = match schedule {
        Schedule::Serial => jobs.iter().map(run).collect::<Result<_>>()?,
        Schedule::Parallel => jobs.par_iter().map(run).collect::<Result<_>>()?,
    };

    collect_result(spec.axis, &spec.variants, &spec.values, rows)
}

/// Sweep result for a single axis value from trajectories that were
/// already run, grouped by variant.
pub fn result_from_trajectories(
    axis: Axis,
    value: f64,
    runs: &[(Variant, Vec<Trajectory>)],
) -> Result<SweepResult> {
    let rows = runs
        .iter()
        .flat_map(|(variant, trajectories)| {
            trajectories.iter().map(move |t| SweepRow {
                variant: *variant,
                value,
                seed: t.config.seed,
                summary: RunSummary::of(t),
            })
        })
        .collect();
    let variants: Vec<Variant> = runs.iter().map(|(v, _)| *v).collect();
    collect_result(axis, &variants, &[value], rows)
}

fn collect_result(
    axis: Axis,
    variants: &[Variant],
    values: &[f64],
    rows: Vec<SweepRow>,
) -> Result<SweepResult> {
    let mut intervals = Vec::new();
    let mut cell_index = 0u64;
    for &variant in variants {
        for &value in values {
            for metric in Metric::ALL {
                let samples: Vec<f64> = rows
                    .iter()
                    .filter(|r| r.variant == variant && r.value == value)
                    .filter_map(|r| metric.of(&r.summary))
                    .collect();
                let stream_id = cell_index;
                cell_index += 1;
                if samples.is_empty() {
                    continue;
                }
                let mean = samples.iter().sum::<f64>() / samples.len() as f64;
                let mut stream = RandomStream::new(BOOTSTRAP_SEED, stream_id);
                let (ci_lo, ci_hi) =
                    bootstrap_ci(&samples, DEFAULT_LEVEL, DEFAULT_RESAMPLES, &mut stream)?;
                intervals.push(Interval {
                    variant,
                    value,
                    metric,
                    mean,
                    ci_lo,
                    ci_hi,
                });
            }
        }
    }
    Ok(SweepResult {
        axis,
        rows,
        intervals,
    })
}

/// Per-timestep mean and bootstrap interval of one metric across replicates.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SeriesPoint {
    pub t: usize,
    pub mean: Option<f64>,
    pub ci_lo: Option<f64>,
    pub ci_hi: Option<f64>,
}

pub fn series_band(
    trajectories: &[Trajectory],
    pick: impl Fn(&crate::metrics::MetricSnapshot) -> Option<f64>,
    stream: &mut RandomStream,
) -> Result<Vec<SeriesPoint>> {
    let steps = trajectories
        .iter()
        .map(|t| t.records.len())
        .min()
        .unwrap_or(0);
    (0..steps)
        .map(|t| {
            let xs: Vec<f64> = trajectories
                .iter()
                .filter_map(|tr| pick(&tr.records[t].snapshot))
                .collect();
            if xs.is_empty() {
                return Ok(SeriesPoint {
                    t,
                    mean: None,
                    ci_lo: None,
                    ci_hi: None,
                });
            }
            let mean = xs.iter().sum::<f64>() / xs.len() as f64;
            let (lo, hi) = bootstrap_ci(&xs, DEFAULT_LEVEL, DEFAULT_RESAMPLES, stream)?;
            Ok(SeriesPoint {
                t,
                mean: Some(mean),
                ci_lo: Some(lo),
                ci_hi: Some(hi),
            })
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn small() -> ModelConfig {
        ModelConfig {
            literature_size: 60,
            reading_budget: 12,
            citing_budget: 4,
            timesteps: 40,
            ..Default::default()
        }
    }

    #[test]
    fn bootstrap_constant_and_two_point() {
        let mut s = RandomStream::new(1, 0);
        assert_eq!(
            bootstrap_ci(&[2.5, 2.5, 2.5], 0.95, 500, &mut s).unwrap(),
            (2.5, 2.5)
        );
        let (lo, hi) = bootstrap_ci(&[0.0, 1.0], 0.95, 5000, &mut s).unwrap();
        assert!(
            0.0 <= lo && lo <= 0.5 && 0.5 <= hi && hi <= 1.0,
            "{lo} {hi}"
        );
        assert!(bootstrap_ci(&[], 0.95, 10, &mut s).is_err());
        assert!(bootstrap_ci(&[1.0], 1.0, 10, &mut s).is_err());
        assert!(bootstrap_ci(&[1.0], 0.9, 0, &mut s).is_err());
    }

    #[test]
    fn bootstrap_matches_direct_resampling() {
        // independent replay: same stream, hand-written resampling loop
        let xs = [0.3, 1.7, 2.2, 5.0, 0.1, 0.9];
        let (lo, hi) = bootstrap_ci(&xs, 0.9, 200, &mut RandomStream::new(8, 3)).unwrap();
        let mut s = RandomStream::new(8, 3);
        let mut means = Vec::new();
        for _ in 0..200 {
            let mut acc = 0.0;
            for _ in 0..xs.len() {
                acc += xs[s.index(xs.len())];
            }
            means.push(acc / xs.len() as f64);
        }
        means.sort_by(|a, b| a.partial_cmp(b).unwrap());
        let at = |p: f64| {
            let pos = p * 199.0;
            let (i, f) = (pos.floor() as usize, pos.fract());
            means[i] * (1.0 - f) + means[(i + 1).min(199)] * f
        };
        assert!((lo - at(0.05)).abs() < 1e-12);
        assert!((hi - at(0.95)).abs() < 1e-12);
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(64))]
        #[test]
        fn bootstrap_brackets_mean(xs in prop::collection::vec(-100.0f64..100.0, 2..30), seed in any::<u64>()) {
            let mut s = RandomStream::new(seed, 0);
            let (lo, hi) = bootstrap_ci(&xs, 0.95, 1000, &mut s).unwrap();
            let mean = xs.iter().sum::<f64>() / xs.len() as f64;
            prop_assert!(lo <= hi);
            prop_assert!(lo <= mean + 1e-9 && mean - 1e-9 <= hi);
        }
    }

    #[test]
    fn replicates_match_single_runs() {
        let c = small();
        let reps = run_replicates(&c, &[5]).unwrap();
        assert_eq!(reps.len(), 1);
        assert_eq!(
            reps[0],
            run_simulation(&ModelConfig {
                seed: 5,
                ..c.clone()
            })
            .unwrap()
        );
        assert_eq!(
            run_replicates(&c, &[1, 2, 3]).unwrap(),
            run_replicates(&c, &[1, 2, 3]).unwrap()
        );
        assert!(run_replicates(&c, &[]).is_err());
    }

    #[test]
    fn degenerate_sweep_is_a_single_run() {
        let c = small();
        let spec = SweepSpec {
            base: c.clone(),
            axis: Axis::CitingBudget,
            values: vec![4.0],
            seeds: vec![9],
            variants: vec![Variant::Full],
        };
        let r = sweep(&spec).unwrap();
        assert_eq!(r.rows.len(), 1);
        let direct = run_simulation(&ModelConfig { seed: 9, ..c }).unwrap();
        assert_eq!(r.rows[0].summary, RunSummary::of(&direct));
    }

    #[test]
    fn serial_and_parallel_agree() {
        let spec = SweepSpec {
            base: small(),
            axis: Axis::ReadingBudget,
            values: vec![6.0, 12.0, 24.0],
            seeds: vec![0, 1, 2],
            variants: Variant::ALL.to_vec(),
        };
        let a = sweep_with(&spec, Schedule::Serial).unwrap();
        let b = sweep_with(&spec, Schedule::Parallel).unwrap();
        assert_eq!(a, b);
        assert_eq!(a.rows.len(), 27);
        for i in &a.intervals {
            assert!(i.ci_lo <= i.mean && i.mean <= i.ci_hi, "{i:?}");
        }
    }

    #[test]
    fn bad_cell_is_named() {
        let spec = SweepSpec {
            base: small(),
            axis: Axis::ReadingBudget,
            values: vec![12.0, 100.0],
            seeds: vec![0],
            variants: vec![Variant::Full],
        };
        let err = sweep(&spec).unwrap_err().to_string();
        assert!(err.contains("reading_budget=100"), "{err}");
    }

    #[test]
    fn spec_validation() {
        let mut spec = SweepSpec {
            base: small(),
            axis: Axis::Alpha,
            values: vec![0.0, 0.001, 0.001],
            seeds: vec![0],
            variants: vec![Variant::Full],
        };
        assert!(spec.validate().is_err());
        spec.values = vec![0.002, 0.0];
        assert!(spec.validate().is_ok());
        spec.seeds.clear();
        assert!(spec.validate().is_err());
        assert!(Axis::CitingBudget.apply(&small(), 2.5).is_err());
        assert_eq!("quality_w".parse::<Axis>().unwrap(), Axis::QualityW);
        assert!(matches!("nope".parse::<Axis>(), Err(Error::Usage(_))));
    }

    #[test]
    fn intervals_narrow_with_more_seeds() {
        let base = ModelConfig {
            literature_size: 100,
            reading_budget: 20,
            citing_budget: 8,
            timesteps: 60,
            ..Default::default()
        };
        let width = |seeds: Vec<u64>| {
            let spec = SweepSpec {
                base: base.clone(),
                axis: Axis::CitingBudget,
                values: vec![8.0],
                seeds,
                variants: vec![Variant::Full],
            };
            let r = sweep(&spec).unwrap();
            let i = r.interval(Variant::Full, 8.0, Metric::EndGini).unwrap();
            i.ci_hi - i.ci_lo
        };
        let (mut narrow, mut wide) = (0.0, 0.0);
        for rep in 0..20u64 {
            wide += width((rep * 100..rep * 100 + 10).collect());
            narrow += width((rep * 100..rep * 100 + 40).collect());
        }
        assert!(narrow < wide, "40 seeds {narrow} vs 10 seeds {wide}");
    }
}
