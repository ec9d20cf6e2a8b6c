//! `bff` command line.
//!
//! Exit codes: 0 success, 1 compute or output failure, 2 usage or input error.

use std::ffi::OsString;
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};

use crate::bff_engine::{combine, evaluate_bff, BffCurve, Combined, EffectCurve, EffectGrid, Study};
use crate::closed_form::{OddsValue, TestStatistic};
use crate::effect_map::StudyDesign;
use crate::error::Error;
use crate::io::{emit, read_study_file, CurveExport, Format};
use crate::oracle::Oracle;

pub const EXIT_OK: i32 = 0;
pub const EXIT_COMPUTE: i32 = 1;
pub const EXIT_USAGE: i32 = 2;

#[derive(Debug, Parser)]
#[command(name = "bff", version, about = "Bayes factor functions from reported test statistics")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// z statistic
    Z {
        #[arg(long, allow_hyphen_values = true)]
        stat: f64,
        #[command(flatten)]
        sizes: ScalarSizes,
        #[command(flatten)]
        common: Common,
    },
    /// t statistic
    T {
        #[arg(long, allow_hyphen_values = true)]
        stat: f64,
        #[arg(long)]
        df: u32,
        #[command(flatten)]
        sizes: ScalarSizes,
        #[command(flatten)]
        common: Common,
    },
    /// chi-squared statistic
    Chisq {
        #[arg(long)]
        stat: f64,
        #[arg(long)]
        df: u32,
        #[arg(long)]
        n: u32,
        #[arg(long, value_enum)]
        mapping: ChisqMapping,
        #[command(flatten)]
        common: Common,
    },
    /// F statistic from a linear model
    F {
        #[arg(long)]
        stat: f64,
        #[arg(long)]
        df1: u32,
        #[arg(long)]
        df2: u32,
        #[arg(long)]
        n: u32,
        #[arg(long, value_enum, default_value = "linear")]
        mapping: FMapping,
        #[command(flatten)]
        common: Common,
    },
    /// Combine independent studies listed in a JSON study file
    Combine {
        #[arg(long)]
        studies: PathBuf,
        /// Also export each study's own curve
        #[arg(long)]
        per_study: bool,
        #[command(flatten)]
        common: Common,
    },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum ChisqMapping {
    Multinomial,
    Lrt,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum FMapping {
    Linear,
}

/// One-sample (`--n`) or two-sample (`--n1 --n2`) sizes.
#[derive(Debug, Args)]
pub struct ScalarSizes {
    #[arg(long, conflicts_with_all = ["n1", "n2"], required_unless_present_all = ["n1", "n2"])]
    n: Option<u32>,
    #[arg(long, requires = "n2")]
    n1: Option<u32>,
    #[arg(long, requires = "n1")]
    n2: Option<u32>,
}

#[derive(Debug, Args)]
pub struct Common {
    #[arg(long)]
    omega_min: Option<f64>,
    #[arg(long)]
    omega_max: Option<f64>,
    #[arg(long)]
    steps: Option<usize>,
    #[arg(long, value_enum, default_value = "csv")]
    format: Format,
    /// Write the export here; without it only the summary is printed
    #[arg(long)]
    out: Option<PathBuf>,
    /// BF values whose crossings are reported (repeatable)
    #[arg(long = "threshold", default_values_t = [0.2, 2.0])]
    thresholds: Vec<f64>,
    /// Recompute every grid point by quadrature and report the discrepancy
    #[arg(long, hide = true)]
    oracle: bool,
}

#[derive(Debug)]
enum Failure {
    Usage(String),
    Compute(String),
}

impl Failure {
    fn usage(e: Error) -> Self {
        Failure::Usage(e.to_string())
    }

    fn compute(e: Error) -> Self {
        Failure::Compute(e.to_string())
    }
}

fn grid_from(common: &Common, base: EffectGrid) -> Result<EffectGrid, Failure> {
    EffectGrid::new(
        common.omega_min.unwrap_or(base.min()),
        common.omega_max.unwrap_or(base.max()),
        common.steps.unwrap_or(base.steps()),
    )
    .map_err(Failure::usage)
}

fn scalar_design(sizes: &ScalarSizes, z: bool) -> Result<StudyDesign, Failure> {
    match (sizes.n, sizes.n1, sizes.n2) {
        (Some(n), _, _) => Ok(if z {
            StudyDesign::OneSampleZ { n }
        } else {
            StudyDesign::OneSampleT { n }
        }),
        (_, Some(n1), Some(n2)) => Ok(if z {
            StudyDesign::TwoSampleZ { n1, n2 }
        } else {
            StudyDesign::TwoSampleT { n1, n2 }
        }),
        _ => Err(Failure::Usage("give either --n or both --n1 and --n2".into())),
    }
}

fn print_crossings(label: &str, omegas: &[f64]) {
    if omegas.is_empty() {
        println!("{label} crossings: none");
    } else {
        let list: Vec<String> = omegas.iter().map(|w| format!("{w:.5}")).collect();
        println!("{label} crossings: {}", list.join(", "));
    }
}

/// Human-readable odds for a Bayes factor.
pub fn format_odds(log_bf10: f64) -> String {
    match OddsValue::from_log(log_bf10) {
        Ok(o) if o.log_bf10() >= 0.0 => format!("{:.2}:1 for H1", o.bf10()),
        Ok(o) => format!("1:{:.2} against H1", 1.0 / o.bf10()),
        Err(_) => "undefined".into(),
    }
}

fn print_summary(export: &CurveExport) {
    let s = &export.summary;
    println!("max BF {:.2} at omega {:.3}", s.max_bf, s.argmax_omega);
    println!("odds {}", format_odds(s.max_log_bf));
    print_crossings("BF=1", &s.crossings);
    for t in &s.threshold_crossings {
        print_crossings(&format!("BF={}", t.bf), &t.omegas);
    }
}

fn oracle_discrepancy(studies: &[Study], curve: &BffCurve) -> Result<f64, Failure> {
    let oracle = Oracle::default();
    let mut worst = 0.0f64;
    for p in &curve.points {
        let mut total = 0.0;
        for s in studies {
            let tau2 = s.tau2_at(p.omega).map_err(Failure::compute)?;
            if tau2 > 0.0 {
                total += oracle
                    .log_bf_quadrature(s.statistic(), tau2)
                    .map_err(Failure::compute)?;
            }
        }
        worst = worst.max((total - p.log_bf10).abs());
    }
    Ok(worst)
}

fn finish<C>(
    curve: &BffCurve,
    source: &C,
    common: &Common,
    per_study: &[(String, BffCurve)],
    studies: &[Study],
) -> Result<CurveExport, Failure>
where
    C: EffectCurve + ?Sized,
{
    let export = CurveExport::new(curve, source, &common.thresholds)
        .and_then(|e| e.with_per_study(per_study))
        .map_err(Failure::compute)?;
    print_summary(&export);
    if common.oracle {
        let d = oracle_discrepancy(studies, curve)?;
        println!("oracle max |log BF discrepancy| {d:.3e}");
    }
    if let Some(path) = &common.out {
        emit(&export, common.format, path).map_err(Failure::compute)?;
    }
    Ok(export)
}

fn single_study(command: &Command) -> Result<(Study, &Common), Failure> {
    let (statistic, design, common) = match command {
        Command::Z { stat, sizes, common } => (
            TestStatistic::Z { z: *stat },
            scalar_design(sizes, true)?,
            common,
        ),
        Command::T {
            stat,
            df,
            sizes,
            common,
        } => (
            TestStatistic::T { t: *stat, nu: *df },
            scalar_design(sizes, false)?,
            common,
        ),
        Command::Chisq {
            stat,
            df,
            n,
            mapping,
            common,
        } => {
            let design = match mapping {
                ChisqMapping::Multinomial => StudyDesign::MultinomialChiSq { n: *n, k: *df },
                ChisqMapping::Lrt => StudyDesign::LikelihoodRatioChiSq { n: *n, k: *df },
            };
            (TestStatistic::ChiSq { h: *stat, k: *df }, design, common)
        }
        Command::F {
            stat,
            df1,
            df2,
            n,
            mapping: FMapping::Linear,
            common,
        } => (
            TestStatistic::F {
                f: *stat,
                k: *df1,
                m: *df2,
            },
            StudyDesign::LinearModelF { n: *n, k: *df1 },
            common,
        ),
        Command::Combine { .. } => unreachable!("combine is not a single-study command"),
    };
    let study = Study::new(statistic, design, "study").map_err(Failure::usage)?;
    Ok((study, common))
}

fn run_single(command: &Command) -> Result<CurveExport, Failure> {
    let (study, common) = single_study(command)?;
    let grid = grid_from(common, EffectGrid::default())?;
    let curve = evaluate_bff(&study, &grid).map_err(Failure::compute)?;
    finish(&curve, &study, common, &[], std::slice::from_ref(&study))
}

fn run_combine(studies_path: &std::path::Path, per_study: bool, common: &Common) -> Result<CurveExport, Failure> {
    let file = read_study_file(studies_path).map_err(Failure::usage)?;
    let grid = grid_from(common, file.grid)?;
    let studies = file.studies;
    let first = studies[0].design().kind();
    if studies.iter().any(|s| s.design().kind() != first) {
        eprintln!("warning: studies use different designs; combining assumes they share one effect size");
    }
    let curve = combine(&studies, &grid).map_err(Failure::compute)?;
    let per: Vec<(String, BffCurve)> = if per_study {
        studies
            .iter()
            .map(|s| evaluate_bff(s, &grid).map(|c| (s.label().to_string(), c)))
            .collect::<crate::error::Result<_>>()
            .map_err(Failure::compute)?
    } else {
        Vec::new()
    };
    finish(&curve, &Combined(&studies), common, &per, &studies)
}

/// Run the CLI on `args` (including the program name) and return the exit code.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { EXIT_USAGE } else { EXIT_OK };
        }
    };
    let result = match &cli.command {
        Command::Combine {
            studies,
            per_study,
            common,
        } => run_combine(studies, *per_study, common),
        other => run_single(other),
    };
    match result {
        Ok(_) => EXIT_OK,
        Err(Failure::Usage(msg)) => {
            eprintln!("error: {msg}");
            EXIT_USAGE
        }
        Err(Failure::Compute(msg)) => {
            eprintln!("error: {msg}");
            EXIT_COMPUTE
        }
    }
}
