//! Configuration documents, run manifests, and CSV outputs.

use std::fs::{self, File};
use std::io::BufWriter;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::engine::Trajectory;
use crate::error::{Error, Result};
use crate::experiments::{SeriesPoint, SweepResult};
use crate::model::{ModelConfig, Variant, CONFIG_KEYS};

pub const ARTIFACT_VERSION: &str = env!("CARGO_PKG_VERSION");

/// Parses and validates a JSON configuration. Absent keys take defaults.
pub fn parse_config(text: &str) -> Result<ModelConfig> {
    let value: serde_json::Value = serde_json::from_str(text).map_err(parse_error)?;
    let object = value.as_object().ok_or_else(|| Error::Parse {
        line: 1,
        column: 1,
        message: "configuration must be a JSON object".into(),
    })?;
    if let Some(key) = object.keys().find(|k| !CONFIG_KEYS.contains(&k.as_str())) {
        return Err(Error::UnknownKey(key.clone()));
    }
    // second pass over the text keeps line/column on type errors
    let config: ModelConfig = serde_json::from_str(text).map_err(parse_error)?;
    config.validate()?;
    Ok(config)
}

fn parse_error(e: serde_json::Error) -> Error {
    Error::Parse {
        line: e.line(),
        column: e.column(),
        message: e.to_string(),
    }
}

pub fn load_config(path: &Path) -> Result<ModelConfig> {
    let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    parse_config(&text)
}

pub fn config_to_json(config: &ModelConfig) -> String {
    serde_json::to_string_pretty(config).expect("config always serializes")
}

/// Everything needed to rerun an output directory bit-identically.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunManifest {
    pub version: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub experiment: Option<String>,
    pub config: ModelConfig,
    pub seeds: Vec<u64>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub sweeps: Vec<SweepDescriptor>,
    pub outputs: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepDescriptor {
    pub label: String,
    pub axis: String,
    pub values: Vec<f64>,
    pub variants: Vec<Variant>,
    /// Complete base configuration of this sweep.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub base: Option<ModelConfig>,
}

impl RunManifest {
    pub fn new(config: ModelConfig, seeds: Vec<u64>) -> Self {
        Self {
            version: ARTIFACT_VERSION.to_string(),
            experiment: None,
            config,
            seeds,
            sweeps: Vec::new(),
            outputs: Vec::new(),
        }
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("manifest always serializes")
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let manifest: RunManifest = serde_json::from_str(text).map_err(parse_error)?;
        // the embedded config goes through the same checks as a config file
        parse_config(&serde_json::to_string(&manifest.config).expect("serializes"))?;
        Ok(manifest)
    }

    pub fn write(&self, path: &Path) -> Result<()> {
        write_text(path, &(self.to_json() + "\n"))
    }
}

pub fn write_text(path: &Path, text: &str) -> Result<()> {
    if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
        fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
    }
    fs::write(path, text).map_err(|e| Error::io(path, e))
}

fn fmt_opt<T: ToString>(v: Option<T>) -> String {
    v.map(|x| x.to_string()).unwrap_or_default()
}

struct CsvOut {
    path: PathBuf,
    writer: csv::Writer<BufWriter<File>>,
}

impl CsvOut {
    fn create(path: &Path) -> Result<Self> {
        if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
            fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
        }
        let file = File::create(path).map_err(|e| Error::io(path, e))?;
        Ok(Self {
            path: path.to_path_buf(),
            writer: csv::Writer::from_writer(BufWriter::new(file)),
        })
    }

    fn row<I, S>(&mut self, fields: I) -> Result<()>
    where
        I: IntoIterator<Item = S>,
        S: AsRef<[u8]>,
    {
        self.writer.write_record(fields).map_err(|e| Error::Csv {
            path: self.path.clone(),
            source: e,
        })
    }

    fn finish(mut self) -> Result<()> {
        self.writer.flush().map_err(|e| Error::io(&self.path, e))
    }
}

/// Path of the per-paper counts file written next to a series file.
pub fn counts_path(series: &Path) -> PathBuf {
    let mut s = series.as_os_str().to_owned();
    s.push(".counts.csv");
    PathBuf::from(s)
}

/// Writes the per-timestep series to `path` and final per-paper counts to
/// `<path>.counts.csv`. Undefined values are empty fields.
pub fn emit_run_csv(trajectory: &Trajectory, path: &Path) -> Result<()> {
    let mut out = CsvOut::create(path)?;
    out.row(["t", "correlation", "churn", "gini"])?;
    for r in &trajectory.records {
        let s = &r.snapshot;
        out.row([
            r.t.to_string(),
            fmt_opt(s.correlation),
            fmt_opt(s.churn),
            s.gini.to_string(),
        ])?;
    }
    out.finish()?;

    let mut out = CsvOut::create(&counts_path(path))?;
    out.row(["paper_id", "quality", "citations"])?;
    for (id, (q, c)) in trajectory
        .qualities
        .iter()
        .zip(&trajectory.citations)
        .enumerate()
    {
        out.row([id.to_string(), q.to_string(), c.to_string()])?;
    }
    out.finish()
}

#[derive(Debug, Clone, PartialEq)]
pub struct CountsRow {
    pub paper_id: usize,
    pub quality: f64,
    pub citations: u32,
}

pub fn read_counts_csv(path: &Path) -> Result<Vec<CountsRow>> {
    let csv_err = |e: csv::Error| Error::Csv {
        path: path.to_path_buf(),
        source: e,
    };
    let mut reader = csv::Reader::from_path(path).map_err(csv_err)?;
    let mut rows = Vec::new();
    for record in reader.records() {
        let record = record.map_err(csv_err)?;
        let field = |i: usize| record.get(i).unwrap_or("");
        let bad = |what: &str| Error::InvalidInput(format!("{}: bad {what}", path.display()));
        rows.push(CountsRow {
            paper_id: field(0).parse().map_err(|_| bad("paper_id"))?,
            quality: field(1).parse().map_err(|_| bad("quality"))?,
            citations: field(2).parse().map_err(|_| bad("citations"))?,
        });
    }
    Ok(rows)
}

/// `variant,axis,value,seed,end_correlation,mean_churn,end_gini`
pub fn write_sweep_csv(result: &SweepResult, path: &Path) -> Result<()> {
    let mut out = CsvOut::create(path)?;
    out.row([
        "variant",
        "axis",
        "value",
        "seed",
        "end_correlation",
        "mean_churn",
        "end_gini",
    ])?;
    for r in &result.rows {
        out.row([
            r.variant.name().to_string(),
            result.axis.name().to_string(),
            r.value.to_string(),
            r.seed.to_string(),
            fmt_opt(r.summary.end_correlation),
            fmt_opt(r.summary.mean_churn),
            r.summary.end_gini.to_string(),
        ])?;
    }
    out.finish()
}

/// `variant,axis,value,metric,mean,ci_lo,ci_hi`
pub fn write_intervals_csv(result: &SweepResult, path: &Path) -> Result<()> {
    let mut out = CsvOut::create(path)?;
    out.row([
        "variant", "axis", "value", "metric", "mean", "ci_lo", "ci_hi",
    ])?;
    for i in &result.intervals {
        out.row([
            i.variant.name().to_string(),
            result.axis.name().to_string(),
            i.value.to_string(),
            i.metric.name().to_string(),
            i.mean.to_string(),
            i.ci_lo.to_string(),
            i.ci_hi.to_string(),
        ])?;
    }
    out.finish()
}

pub fn write_decomposition_csv(result: &SweepResult, path: &Path) -> Result<()> {
    let mut out = CsvOut::create(path)?;
    out.row([
        "variant",
        "axis",
        "value",
        "seed",
        "frac_substantive_top40",
        "frac_substantive_41_150",
        "frac_rhetorical_top40",
        "frac_rhetorical_41_150",
        "frac_other",
    ])?;
    for r in &result.rows {
        let d = &r.summary.decomposition;
        out.row([
            r.variant.name().to_string(),
            result.axis.name().to_string(),
            r.value.to_string(),
            r.seed.to_string(),
            d.frac_substantive_top40.to_string(),
            d.frac_substantive_41_150.to_string(),
            d.frac_rhetorical_top40.to_string(),
            d.frac_rhetorical_41_150.to_string(),
            d.frac_other.to_string(),
        ])?;
    }
    out.finish()
}

/// Long-format seed-averaged series: `variant,metric,t,mean,ci_lo,ci_hi`.
pub fn write_series_bands_csv(
    bands: &[(Variant, &str, Vec<SeriesPoint>)],
    path: &Path,
) -> Result<()> {
    let mut out = CsvOut::create(path)?;
    out.row(["variant", "metric", "t", "mean", "ci_lo", "ci_hi"])?;
    for (variant, metric, points) in bands {
        for p in points {
            out.row([
                variant.name().to_string(),
                metric.to_string(),
                p.t.to_string(),
                fmt_opt(p.mean),
                fmt_opt(p.ci_lo),
                fmt_opt(p.ci_hi),
            ])?;
        }
    }
    out.finish()
}

/// Citation histogram: `variant,seed,bin_lo,bin_hi,papers` with bins of
/// `width` citations covering `[0, max]`.
pub fn write_histogram_csv(runs: &[(Variant, &Trajectory)], width: u32, path: &Path) -> Result<()> {
    let mut out = CsvOut::create(path)?;
    out.row(["variant", "seed", "bin_lo", "bin_hi", "papers"])?;
    for (variant, t) in runs {
        let max = t.config.timesteps as u32;
        let bins = max / width + 1;
        let mut counts = vec![0usize; bins as usize];
        for &c in &t.citations {
            counts[(c / width).min(bins - 1) as usize] += 1;
        }
        for (b, n) in counts.into_iter().enumerate() {
            let lo = b as u32 * width;
            out.row([
                variant.name().to_string(),
                t.config.seed.to_string(),
                lo.to_string(),
                (lo + width - 1).to_string(),
                n.to_string(),
            ])?;
        }
    }
    out.finish()
}
