//! Command-line front end.

use std::ffi::OsString;
use std::path::{Path, PathBuf};

use clap::error::ErrorKind;
use clap::{Parser, Subcommand};

use crate::engine::run_simulation;
use crate::error::{Error, Result};
use crate::experiments::{default_seeds, sweep, Axis, SweepSpec};
use crate::io::{
    emit_run_csv, load_config, write_decomposition_csv, write_intervals_csv, write_sweep_csv,
    RunManifest, SweepDescriptor,
};
use crate::model::Variant;
use crate::reproduce::{reproduce_named, write_reproduction};

#[derive(Debug, Parser)]
#[command(
    name = "citesim",
    version,
    about = "Simulate substantive and rhetorical citing"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Run one trajectory and write its series and counts.
    Run {
        #[arg(long)]
        config: PathBuf,
        /// Overrides the seed in the config file.
        #[arg(long)]
        seed: Option<u64>,
        #[arg(long)]
        out: PathBuf,
    },
    /// Sweep one parameter over seeds and variants.
    Sweep {
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        axis: String,
        /// `a,b,c` or an inclusive range `lo..hi:step`.
        #[arg(long)]
        values: String,
        /// `0..9` (inclusive) or a comma list.
        #[arg(long, default_value = "0..9")]
        seeds: String,
        /// Comma list of variants; all three by default.
        #[arg(long)]
        variants: Option<String>,
        #[arg(long)]
        out: PathBuf,
    },
    /// Run a named experiment (fig2, s11_beta, ...).
    Reproduce {
        name: String,
        #[arg(long)]
        out: PathBuf,
        #[arg(long)]
        seeds: Option<String>,
    },
    /// Parse a config and print the resolved manifest.
    Validate {
        #[arg(long)]
        config: PathBuf,
    },
}

/// Runs the CLI on `args` (program name first) and returns the exit status.
pub fn cli_main<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            if matches!(e.kind(), ErrorKind::DisplayHelp | ErrorKind::DisplayVersion) {
                print!("{e}");
                return 0;
            }
            let rendered = e.to_string();
            let line = rendered.lines().next().unwrap_or("usage error");
            eprintln!("{line} (see --help)");
            return 1;
        }
    };
    match dispatch(cli.command) {
        Ok(()) => 0,
        Err(e) => {
            eprintln!("error: {e}");
            e.exit_code()
        }
    }
}

fn dispatch(command: Command) -> Result<()> {
    match command {
        Command::Run { config, seed, out } => {
            let mut config = load_config(&config)?;
            if let Some(seed) = seed {
                config.seed = seed;
            }
            let trajectory = run_simulation(&config)?;
            emit_run_csv(&trajectory, &out.join("series.csv"))?;
            let mut manifest = RunManifest::new(config.clone(), vec![config.seed]);
            manifest.outputs = vec![
                "manifest.json".into(),
                "series.csv".into(),
                "series.csv.counts.csv".into(),
            ];
            manifest.write(&out.join("manifest.json"))
        }
        Command::Sweep {
            config,
            axis,
            values,
            seeds,
            variants,
            out,
        } => {
            let spec = SweepSpec {
                base: load_config(&config)?,
                axis: axis.parse::<Axis>()?,
                values: parse_values(&values)?,
                seeds: parse_seeds(&seeds)?,
                variants: match variants {
                    Some(v) => parse_variants(&v)?,
                    None => Variant::ALL.to_vec(),
                },
            };
            let result = sweep(&spec)?;
            write_sweep_csv(&result, &out.join("sweep.csv"))?;
            write_intervals_csv(&result, &out.join("intervals.csv"))?;
            write_decomposition_csv(&result, &out.join("decomposition.csv"))?;
            let mut manifest = RunManifest::new(spec.base.clone(), spec.seeds.clone());
            manifest.sweeps = vec![SweepDescriptor {
                label: "sweep".into(),
                axis: spec.axis.name().into(),
                values: spec.values.clone(),
                variants: spec.variants.clone(),
                base: None,
            }];
            manifest.outputs = [
                "decomposition.csv",
                "intervals.csv",
                "manifest.json",
                "sweep.csv",
            ]
            .map(String::from)
            .to_vec();
            manifest.write(&out.join("manifest.json"))
        }
        Command::Reproduce { name, out, seeds } => {
            let seeds = seeds.as_deref().map(parse_seeds).transpose()?;
            let rep = reproduce_named(&name, seeds.as_deref())?;
            write_reproduction(&rep, &out)?;
            Ok(())
        }
        Command::Validate { config } => {
            let config = load_config(Path::new(&config))?;
            let manifest = RunManifest::new(config, default_seeds());
            println!("{}", manifest.to_json());
            Ok(())
        }
    }
}

fn usage(msg: String) -> Error {
    Error::Usage(msg)
}

fn parse_number(s: &str) -> Result<f64> {
    s.trim()
        .parse::<f64>()
        .ok()
        .filter(|x| x.is_finite())
        .ok_or_else(|| usage(format!("`{s}` is not a number")))
}

/// `a,b,c` or `lo..hi:step` with both ends included.
pub fn parse_values(s: &str) -> Result<Vec<f64>> {
    if let Some((range, step)) = s.split_once(':') {
        let (lo, hi) = range
            .split_once("..")
            .ok_or_else(|| usage(format!("range `{s}` must look like lo..hi:step")))?;
        let (lo, hi, step) = (parse_number(lo)?, parse_number(hi)?, parse_number(step)?);
        if step <= 0.0 || hi < lo {
            return Err(usage(format!("range `{s}` needs lo <= hi and step > 0")));
        }
        let n = ((hi - lo) / step + 1e-9).floor() as usize;
        return Ok((0..=n).map(|i| lo + step * i as f64).collect());
    }
    s.split(',').map(parse_number).collect()
}

/// `a..b` (inclusive) or `a,b,c`.
pub fn parse_seeds(s: &str) -> Result<Vec<u64>> {
    let seed = |x: &str| {
        x.trim()
            .parse::<u64>()
            .map_err(|_| usage(format!("`{x}` is not a seed")))
    };
    if let Some((lo, hi)) = s.split_once("..") {
        let (lo, hi) = (seed(lo)?, seed(hi)?);
        if hi < lo {
            return Err(usage(format!("empty seed range `{s}`")));
        }
        return Ok((lo..=hi).collect());
    }
    s.split(',').map(seed).collect()
}

fn parse_variants(s: &str) -> Result<Vec<Variant>> {
    s.split(',')
        .map(|v| {
            Variant::from_name(v.trim()).ok_or_else(|| {
                let names: Vec<&str> = Variant::ALL.iter().map(|v| v.name()).collect();
                usage(format!(
                    "unknown variant `{v}`; expected one of {}",
                    names.join(", ")
                ))
            })
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn values_lists_and_ranges() {
        assert_eq!(parse_values("1,2.5,4").unwrap(), vec![1.0, 2.5, 4.0]);
        assert_eq!(parse_values("20..100:10").unwrap().len(), 9);
        assert_eq!(
            parse_values("0..1:0.25").unwrap(),
            vec![0.0, 0.25, 0.5, 0.75, 1.0]
        );
        assert_eq!(parse_values("0..1:0.3").unwrap().len(), 4);
        assert!(parse_values("1,x").is_err());
        assert!(parse_values("5..1:1").is_err());
        assert!(parse_values("1..5:0").is_err());
    }

    #[test]
    fn seeds_ranges_are_inclusive() {
        assert_eq!(parse_seeds("0..9").unwrap(), (0..10).collect::<Vec<_>>());
        assert_eq!(parse_seeds("3,7").unwrap(), vec![3, 7]);
        assert_eq!(parse_seeds("4..4").unwrap(), vec![4]);
        assert!(parse_seeds("9..0").is_err());
        assert!(parse_seeds("-1").is_err());
    }

    #[test]
    fn variants_parse() {
        assert_eq!(
            parse_variants("full, null_fixed_threshold").unwrap(),
            vec![Variant::Full, Variant::NullFixedThreshold]
        );
        assert_eq!(parse_variants("nope").unwrap_err().exit_code(), 1);
    }

    #[test]
    fn usage_errors_exit_one() {
        assert_eq!(cli_main(["citesim", "frobnicate"]), 1);
        assert_eq!(cli_main(["citesim", "run", "--bogus"]), 1);
        assert_eq!(cli_main(["citesim"]), 1);
        assert_eq!(cli_main(["citesim", "--help"]), 0);
    }
}
