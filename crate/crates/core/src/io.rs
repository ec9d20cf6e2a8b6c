//! Study files in, curve exports out.
//!
//! A study file is JSON:
//!
//! ```json
//! {
//!   "studies": [
//!     {"family": "f", "value": 4.05, "df1": 2, "df2": 82,
//!      "design": "linear_model_f", "n": 85, "label": "original"}
//!   ],
//!   "grid": {"min": 0.0, "max": 0.5, "steps": 501}
//! }
//! ```
//!
//! `k` defaults to `df1` for vector designs. Every number in an export is
//! written with 17 significant digits so that parsing it back yields the
//! same `f64`.

use std::fmt::Write as _;
use std::path::Path;
use std::str::FromStr;

use serde::Deserialize;
use serde_json::{Map, Number, Value};

use crate::bff_engine::{find_crossings, BffCurve, EffectCurve, EffectGrid, Study};
use crate::closed_form::{Family, TestStatistic};
use crate::effect_map::{classify_zone, DesignKind, EffectSize, StudyDesign, Zone};
use crate::error::{Error, Result};

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawStudyFile {
    studies: Vec<RawStudy>,
    #[serde(default)]
    grid: Option<RawGrid>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawStudy {
    family: Family,
    value: f64,
    df1: Option<u32>,
    df2: Option<u32>,
    design: DesignKind,
    n: Option<u32>,
    n1: Option<u32>,
    n2: Option<u32>,
    k: Option<u32>,
    label: Option<String>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawGrid {
    min: f64,
    max: f64,
    steps: usize,
}

/// Parsed and validated study file.
#[derive(Debug, Clone, PartialEq)]
pub struct StudyFile {
    pub studies: Vec<Study>,
    /// The file's grid, or the engine default when the file has none.
    pub grid: EffectGrid,
    pub grid_from_file: bool,
}

pub fn parse_study_file(text: &str) -> Result<StudyFile> {
    let raw: RawStudyFile = serde_json::from_str(text).map_err(|e| {
        Error::Parse(format!("study file line {}, column {}: {e}", e.line(), e.column()))
    })?;
    if raw.studies.is_empty() {
        return Err(Error::Parse("study file has an empty `studies` list".into()));
    }
    let studies = raw
        .studies
        .into_iter()
        .enumerate()
        .map(|(i, s)| {
            let label = s.label.unwrap_or_else(|| format!("study {}", i + 1));
            let k = match s.design {
                DesignKind::MultinomialChisq | DesignKind::LikelihoodRatioChisq | DesignKind::LinearModelF => {
                    s.k.or(s.df1)
                }
                _ => s.k,
            };
            let context = |e: Error| Error::Parse(format!("studies[{i}] ('{label}'): {e}"));
            let statistic = TestStatistic::from_parts(s.family, s.value, s.df1, s.df2).map_err(context)?;
            let design = StudyDesign::from_parts(s.design, s.n, s.n1, s.n2, k).map_err(context)?;
            Study::new(statistic, design, label.clone()).map_err(context)
        })
        .collect::<Result<Vec<_>>>()?;
    let (grid, grid_from_file) = match raw.grid {
        Some(g) => (
            EffectGrid::new(g.min, g.max, g.steps)
                .map_err(|e| Error::Parse(format!("grid: {e}")))?,
            true,
        ),
        None => (EffectGrid::default(), false),
    };
    Ok(StudyFile {
        studies,
        grid,
        grid_from_file,
    })
}

pub fn read_study_file(path: &Path) -> Result<StudyFile> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| Error::Io(format!("{}: {e}", path.display())))?;
    parse_study_file(&text)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ExportRow {
    pub omega: f64,
    pub bf10: f64,
    pub log_bf10: f64,
    pub zone: Zone,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ThresholdCrossing {
    pub bf: f64,
    pub omegas: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ExportSummary {
    pub max_bf: f64,
    pub max_log_bf: f64,
    pub argmax_omega: f64,
    /// BF = 1 crossings.
    pub crossings: Vec<f64>,
    pub threshold_crossings: Vec<ThresholdCrossing>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct LabeledRows {
    pub label: String,
    pub points: Vec<ExportRow>,
}

/// A curve ready for serialization.
#[derive(Debug, Clone, PartialEq)]
pub struct CurveExport {
    pub points: Vec<ExportRow>,
    pub summary: ExportSummary,
    /// Individual study curves behind a combined curve; JSON and SVG only.
    pub per_study: Vec<LabeledRows>,
}

fn rows_of(curve: &BffCurve) -> Result<Vec<ExportRow>> {
    curve
        .points
        .iter()
        .map(|p| {
            Ok(ExportRow {
                omega: p.omega,
                bf10: p.log_bf10.exp(),
                log_bf10: p.log_bf10,
                zone: classify_zone(EffectSize::new(p.omega)?),
            })
        })
        .collect()
}

impl CurveExport {
    /// Build an export from an evaluated curve. `source` is re-evaluated to
    /// refine the `thresholds` (BF values) crossings.
    pub fn new<C>(curve: &BffCurve, source: &C, thresholds: &[f64]) -> Result<Self>
    where
        C: EffectCurve + ?Sized,
    {
        let threshold_crossings = thresholds
            .iter()
            .map(|&bf| {
                if !(bf > 0.0) || !bf.is_finite() {
                    return Err(Error::domain("BF threshold must be finite and > 0", bf));
                }
                Ok(ThresholdCrossing {
                    bf,
                    omegas: find_crossings(&curve.points, bf.ln(), source)?,
                })
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(Self {
            points: rows_of(curve)?,
            summary: ExportSummary {
                max_bf: curve.max_bf(),
                max_log_bf: curve.max_log_bf,
                argmax_omega: curve.argmax_omega,
                crossings: curve.crossings.clone(),
                threshold_crossings,
            },
            per_study: Vec::new(),
        })
    }

    pub fn with_per_study(mut self, curves: &[(String, BffCurve)]) -> Result<Self> {
        self.per_study = curves
            .iter()
            .map(|(label, c)| {
                Ok(LabeledRows {
                    label: label.clone(),
                    points: rows_of(c)?,
                })
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(self)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, clap::ValueEnum)]
pub enum Format {
    Csv,
    Json,
    Svg,
}

impl FromStr for Format {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "csv" => Ok(Format::Csv),
            "json" => Ok(Format::Json),
            "svg" => Ok(Format::Svg),
            other => Err(Error::invalid(format!("unknown format '{other}'"))),
        }
    }
}

/// 17 significant digits with a signed exponent, round-trip exact.
pub fn fmt_num(x: f64) -> String {
    let s = format!("{x:.16e}");
    match s.split_once('e') {
        Some((m, e)) if !e.starts_with('-') => format!("{m}e+{e}"),
        _ => s,
    }
}

fn join_nums(xs: &[f64]) -> String {
    xs.iter().map(|&x| fmt_num(x)).collect::<Vec<_>>().join(";")
}

pub fn render(export: &CurveExport, format: Format) -> Result<String> {
    match format {
        Format::Csv => to_csv(export),
        Format::Json => to_json(export),
        Format::Svg => Ok(to_svg(export)),
    }
}

pub fn emit(export: &CurveExport, format: Format, path: &Path) -> Result<()> {
    let text = render(export, format)?;
    std::fs::write(path, text).map_err(|e| Error::Io(format!("{}: {e}", path.display())))
}

pub fn to_csv(export: &CurveExport) -> Result<String> {
    let mut w = csv::Writer::from_writer(Vec::new());
    let csv_err = |e: csv::Error| Error::Io(e.to_string());
    w.write_record(["omega", "bf10", "log_bf10", "zone"]).map_err(csv_err)?;
    for r in &export.points {
        w.write_record([
            fmt_num(r.omega),
            fmt_num(r.bf10),
            fmt_num(r.log_bf10),
            r.zone.as_str().to_string(),
        ])
        .map_err(csv_err)?;
    }
    let bytes = w.into_inner().map_err(|e| Error::Io(e.to_string()))?;
    let mut out = String::from_utf8(bytes).map_err(|e| Error::Io(e.to_string()))?;
    let s = &export.summary;
    let _ = writeln!(out, "# max_bf={}", fmt_num(s.max_bf));
    let _ = writeln!(out, "# max_log_bf={}", fmt_num(s.max_log_bf));
    let _ = writeln!(out, "# argmax_omega={}", fmt_num(s.argmax_omega));
    let _ = writeln!(out, "# crossings={}", join_nums(&s.crossings));
    for t in &s.threshold_crossings {
        let _ = writeln!(out, "# threshold bf={} omegas={}", fmt_num(t.bf), join_nums(&t.omegas));
    }
    Ok(out)
}

fn parse_num(s: &str, what: &str) -> Result<f64> {
    s.trim()
        .parse::<f64>()
        .map_err(|_| Error::Parse(format!("{what}: not a number: '{s}'")))
}

fn parse_list(s: &str, what: &str) -> Result<Vec<f64>> {
    if s.is_empty() {
        return Ok(Vec::new());
    }
    s.split(';').map(|x| parse_num(x, what)).collect()
}

/// Parse a CSV export back. Per-study curves are not part of the CSV shape.
pub fn parse_csv(text: &str) -> Result<CurveExport> {
    let mut rdr = csv::ReaderBuilder::new()
        .comment(Some(b'#'))
        .from_reader(text.as_bytes());
    let header = rdr.headers().map_err(|e| Error::Parse(e.to_string()))?;
    if header != vec!["omega", "bf10", "log_bf10", "zone"] {
        return Err(Error::Parse(format!("unexpected CSV header {header:?}")));
    }
    let mut points = Vec::new();
    for rec in rdr.records() {
        let rec = rec.map_err(|e| Error::Parse(e.to_string()))?;
        let zone = Zone::parse(&rec[3]).ok_or_else(|| Error::Parse(format!("unknown zone '{}'", &rec[3])))?;
        points.push(ExportRow {
            omega: parse_num(&rec[0], "omega")?,
            bf10: parse_num(&rec[1], "bf10")?,
            log_bf10: parse_num(&rec[2], "log_bf10")?,
            zone,
        });
    }

    let mut max_bf = None;
    let mut max_log_bf = None;
    let mut argmax_omega = None;
    let mut crossings = None;
    let mut threshold_crossings = Vec::new();
    for line in text.lines().filter_map(|l| l.strip_prefix("# ")) {
        if let Some(v) = line.strip_prefix("max_bf=") {
            max_bf = Some(parse_num(v, "max_bf")?);
        } else if let Some(v) = line.strip_prefix("max_log_bf=") {
            max_log_bf = Some(parse_num(v, "max_log_bf")?);
        } else if let Some(v) = line.strip_prefix("argmax_omega=") {
            argmax_omega = Some(parse_num(v, "argmax_omega")?);
        } else if let Some(v) = line.strip_prefix("crossings=") {
            crossings = Some(parse_list(v, "crossings")?);
        } else if let Some(v) = line.strip_prefix("threshold bf=") {
            let (bf, omegas) = v
                .split_once(" omegas=")
                .ok_or_else(|| Error::Parse(format!("malformed threshold line '{line}'")))?;
            threshold_crossings.push(ThresholdCrossing {
                bf: parse_num(bf, "threshold bf")?,
                omegas: parse_list(omegas, "threshold omegas")?,
            });
        } else {
            return Err(Error::Parse(format!("unknown summary line '{line}'")));
        }
    }
    let missing = |f: &str| Error::Parse(format!("CSV summary is missing {f}"));
    Ok(CurveExport {
        points,
        summary: ExportSummary {
            max_bf: max_bf.ok_or_else(|| missing("max_bf"))?,
            max_log_bf: max_log_bf.ok_or_else(|| missing("max_log_bf"))?,
            argmax_omega: argmax_omega.ok_or_else(|| missing("argmax_omega"))?,
            crossings: crossings.ok_or_else(|| missing("crossings"))?,
            threshold_crossings,
        },
        per_study: Vec::new(),
    })
}

fn json_num(x: f64) -> Value {
    if !x.is_finite() {
        return Value::Null;
    }
    // arbitrary_precision keeps the digits exactly as formatted
    Value::Number(Number::from_str(&fmt_num(x)).expect("formatted float is valid JSON"))
}

fn json_nums(xs: &[f64]) -> Value {
    Value::Array(xs.iter().map(|&x| json_num(x)).collect())
}

fn json_rows(rows: &[ExportRow]) -> Value {
    Value::Array(
        rows.iter()
            .map(|r| {
                let mut m = Map::new();
                m.insert("omega".into(), json_num(r.omega));
                m.insert("bf10".into(), json_num(r.bf10));
                m.insert("log_bf10".into(), json_num(r.log_bf10));
                m.insert("zone".into(), Value::String(r.zone.as_str().into()));
                Value::Object(m)
            })
            .collect(),
    )
}

pub fn to_json(export: &CurveExport) -> Result<String> {
    let s = &export.summary;
    let mut summary = Map::new();
    summary.insert("max_bf".into(), json_num(s.max_bf));
    summary.insert("max_log_bf".into(), json_num(s.max_log_bf));
    summary.insert("argmax_omega".into(), json_num(s.argmax_omega));
    summary.insert("crossings".into(), json_nums(&s.crossings));
    summary.insert(
        "threshold_crossings".into(),
        Value::Array(
            s.threshold_crossings
                .iter()
                .map(|t| {
                    let mut m = Map::new();
                    m.insert("bf".into(), json_num(t.bf));
                    m.insert("omegas".into(), json_nums(&t.omegas));
                    Value::Object(m)
                })
                .collect(),
        ),
    );
    let mut root = Map::new();
    root.insert("points".into(), json_rows(&export.points));
    root.insert("summary".into(), Value::Object(summary));
    if !export.per_study.is_empty() {
        root.insert(
            "per_study".into(),
            Value::Array(
                export
                    .per_study
                    .iter()
                    .map(|c| {
                        let mut m = Map::new();
                        m.insert("label".into(), Value::String(c.label.clone()));
                        m.insert("points".into(), json_rows(&c.points));
                        Value::Object(m)
                    })
                    .collect(),
            ),
        );
    }
    let mut text = serde_json::to_string_pretty(&Value::Object(root)).map_err(|e| Error::Io(e.to_string()))?;
    text.push('\n');
    Ok(text)
}

// ---- SVG ----

const WIDTH: f64 = 800.0;
const HEIGHT: f64 = 600.0;
const LEFT: f64 = 80.0;
const RIGHT: f64 = 20.0;
const TOP: f64 = 30.0;
const BOTTOM: f64 = 60.0;
/// Lowest decade drawn below the top of the curve.
const MAX_DECADES: f64 = 12.0;

const STUDY_COLORS: [&str; 6] = ["#444444", "#8c564b", "#9467bd", "#17becf", "#bcbd22", "#e377c2"];

struct Frame {
    x0: f64,
    x1: f64,
    y0: f64,
    y1: f64,
}

impl Frame {
    fn px(&self, omega: f64) -> f64 {
        LEFT + (omega - self.x0) / (self.x1 - self.x0) * (WIDTH - LEFT - RIGHT)
    }

    /// `log10_bf` clamped to the plotted decades.
    fn py(&self, log10_bf: f64) -> f64 {
        let v = log10_bf.clamp(self.y0, self.y1);
        TOP + (self.y1 - v) / (self.y1 - self.y0) * (HEIGHT - TOP - BOTTOM)
    }
}

fn decade_label(d: i32) -> String {
    match d {
        0 => "1".into(),
        1..=3 => format!("{}", 10i64.pow(d as u32)),
        -3..=-1 => format!("{}", 10f64.powi(d)),
        _ => format!("1e{d}"),
    }
}

fn nice_step(span: f64) -> f64 {
    let raw = span / 10.0;
    let mag = 10f64.powf(raw.log10().floor());
    let r = raw / mag;
    let nice = if r <= 1.0 {
        1.0
    } else if r <= 2.0 {
        2.0
    } else if r <= 5.0 {
        5.0
    } else {
        10.0
    };
    nice * mag
}

fn polyline(frame: &Frame, rows: &[ExportRow]) -> String {
    let mut pts = String::new();
    for r in rows {
        if !r.log_bf10.is_finite() {
            continue;
        }
        if !pts.is_empty() {
            pts.push(' ');
        }
        let _ = write!(pts, "{:.2},{:.2}", frame.px(r.omega), frame.py(r.log_bf10 / std::f64::consts::LN_10));
    }
    pts
}

/// Line plot of the curve: log-scale BF axis, shaded effect-size zones,
/// a BF = 1 reference line, the maximum and BF = 1 crossings marked.
pub fn to_svg(export: &CurveExport) -> String {
    let all_rows = export
        .points
        .iter()
        .chain(export.per_study.iter().flat_map(|c| c.points.iter()));
    let (mut lo, mut hi) = (f64::INFINITY, f64::NEG_INFINITY);
    let (mut x0, mut x1) = (f64::INFINITY, f64::NEG_INFINITY);
    for r in all_rows {
        x0 = x0.min(r.omega);
        x1 = x1.max(r.omega);
        if r.log_bf10.is_finite() {
            let v = r.log_bf10 / std::f64::consts::LN_10;
            lo = lo.min(v);
            hi = hi.max(v);
        }
    }
    if !(x1 > x0) {
        x0 = 0.0;
        x1 = 1.0;
    }
    if !lo.is_finite() {
        lo = 0.0;
        hi = 0.0;
    }
    let mut y1 = hi.max(0.0).ceil();
    let mut y0 = lo.min(0.0).floor().max(y1 - MAX_DECADES);
    if y1 - y0 < 1.0 {
        y1 = y0 + 1.0;
    }
    if y1 == y0 {
        y0 -= 1.0;
    }
    let frame = Frame { x0, x1, y0, y1 };
    let (plot_top, plot_bottom) = (TOP, HEIGHT - BOTTOM);
    let (plot_left, plot_right) = (LEFT, WIDTH - RIGHT);

    let mut s = String::new();
    let _ = writeln!(
        s,
        r#"<svg xmlns="http://www.w3.org/2000/svg" viewBox="0 0 {WIDTH} {HEIGHT}" width="{WIDTH}" height="{HEIGHT}" font-family="sans-serif" font-size="12">"#
    );
    let _ = writeln!(s, r#"<rect x="0" y="0" width="{WIDTH}" height="{HEIGHT}" fill="white"/>"#);

    for (i, zone) in Zone::ALL.iter().enumerate() {
        let lower = zone.lower().max(x0);
        let upper = Zone::ALL.get(i + 1).map_or(x1, |z| z.lower()).min(x1);
        if upper <= lower {
            continue;
        }
        let (a, b) = (frame.px(lower), frame.px(upper));
        let _ = writeln!(
            s,
            r#"<rect class="zone {}" x="{a:.2}" y="{plot_top:.2}" width="{:.2}" height="{:.2}" fill="{}" fill-opacity="0.15"/>"#,
            zone.as_str(),
            b - a,
            plot_bottom - plot_top,
            zone.color()
        );
    }

    let _ = writeln!(
        s,
        r#"<rect x="{plot_left:.2}" y="{plot_top:.2}" width="{:.2}" height="{:.2}" fill="none" stroke="black"/>"#,
        plot_right - plot_left,
        plot_bottom - plot_top
    );

    for d in (y0 as i32)..=(y1 as i32) {
        let y = frame.py(f64::from(d));
        let _ = writeln!(
            s,
            r#"<line x1="{:.2}" y1="{y:.2}" x2="{plot_left:.2}" y2="{y:.2}" stroke="black"/>"#,
            plot_left - 5.0
        );
        let _ = writeln!(
            s,
            r#"<text x="{:.2}" y="{:.2}" text-anchor="end">{}</text>"#,
            plot_left - 8.0,
            y + 4.0,
            decade_label(d)
        );
    }

    let step = nice_step(x1 - x0);
    let first = (x0 / step).ceil() as i64;
    let last = (x1 / step + 1e-9).floor() as i64;
    for i in first..=last {
        let w = i as f64 * step;
        let x = frame.px(w);
        let _ = writeln!(
            s,
            r#"<line x1="{x:.2}" y1="{plot_bottom:.2}" x2="{x:.2}" y2="{:.2}" stroke="black"/>"#,
            plot_bottom + 5.0
        );
        let _ = writeln!(
            s,
            r#"<text x="{x:.2}" y="{:.2}" text-anchor="middle">{}</text>"#,
            plot_bottom + 20.0,
            format!("{:.3}", w).trim_end_matches('0').trim_end_matches('.')
        );
    }
    let _ = writeln!(
        s,
        r#"<text x="{:.2}" y="{:.2}" text-anchor="middle">effect size</text>"#,
        0.5 * (plot_left + plot_right),
        HEIGHT - 15.0
    );
    let _ = writeln!(
        s,
        r#"<text x="20" y="{:.2}" text-anchor="middle" transform="rotate(-90 20 {:.2})">BF10</text>"#,
        0.5 * (plot_top + plot_bottom),
        0.5 * (plot_top + plot_bottom)
    );

    let y_one = frame.py(0.0);
    let _ = writeln!(
        s,
        r#"<line class="reference" x1="{plot_left:.2}" y1="{y_one:.2}" x2="{plot_right:.2}" y2="{y_one:.2}" stroke="gray" stroke-dasharray="6,4"/>"#
    );

    for (i, c) in export.per_study.iter().enumerate() {
        let _ = writeln!(
            s,
            r#"<polyline class="study" data-label="{}" points="{}" fill="none" stroke="{}" stroke-width="1.5" stroke-dasharray="2,3"/>"#,
            xml_escape(&c.label),
            polyline(&frame, &c.points),
            STUDY_COLORS[i % STUDY_COLORS.len()]
        );
    }
    let _ = writeln!(
        s,
        r#"<polyline class="bff" points="{}" fill="none" stroke="black" stroke-width="2"/>"#,
        polyline(&frame, &export.points)
    );

    let sm = &export.summary;
    if sm.max_log_bf.is_finite() && sm.argmax_omega >= x0 && sm.argmax_omega <= x1 {
        let x = frame.px(sm.argmax_omega);
        let y = frame.py(sm.max_log_bf / std::f64::consts::LN_10);
        let _ = writeln!(
            s,
            r#"<line class="argmax" x1="{x:.2}" y1="{plot_bottom:.2}" x2="{x:.2}" y2="{y:.2}" stroke="black" stroke-dasharray="1,3"/>"#
        );
        let _ = writeln!(s, r#"<circle class="argmax" cx="{x:.2}" cy="{y:.2}" r="4" fill="black"/>"#);
        let _ = writeln!(
            s,
            r#"<text x="{:.2}" y="{:.2}">{:.2} at {:.3}</text>"#,
            x + 6.0,
            y - 6.0,
            sm.max_bf,
            sm.argmax_omega
        );
    }
    for &w in &sm.crossings {
        let _ = writeln!(
            s,
            r#"<circle class="crossing" cx="{:.2}" cy="{y_one:.2}" r="3" fill="white" stroke="black"/>"#,
            frame.px(w)
        );
    }
    s.push_str("</svg>\n");
    s
}

fn xml_escape(s: &str) -> String {
    s.replace('&', "&amp;")
        .replace('<', "&lt;")
        .replace('>', "&gt;")
        .replace('"', "&quot;")
}
