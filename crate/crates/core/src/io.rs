//! Result export: CSV and JSON with every float written to 17 significant
//! digits, and two-column `.dat` files for gnuplot.

use std::fs;
use std::io::{self, Read, Write};
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use serde_json::ser::{Formatter, PrettyFormatter};

use crate::error::{Error, Result};
use crate::scenario::TrendResult;
use crate::{GainMatrix, LinkReport, Wavelength};

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum OutputFormat {
    Csv,
    Json,
    #[default]
    Both,
}

impl OutputFormat {
    pub fn csv(self) -> bool {
        matches!(self, OutputFormat::Csv | OutputFormat::Both)
    }

    pub fn json(self) -> bool {
        matches!(self, OutputFormat::Json | OutputFormat::Both)
    }
}

impl std::str::FromStr for OutputFormat {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "csv" => Ok(OutputFormat::Csv),
            "json" => Ok(OutputFormat::Json),
            "both" => Ok(OutputFormat::Both),
            other => Err(Error::Config(format!("unknown output format '{other}'"))),
        }
    }
}

/// Scientific notation with 17 significant digits; parses back to the same `f64`.
pub fn fmt_float(x: f64) -> String {
    if x.is_finite() {
        format!("{x:.16e}")
    } else if x.is_nan() {
        "NaN".into()
    } else if x > 0.0 {
        "inf".into()
    } else {
        "-inf".into()
    }
}

/// Pretty JSON whose numbers use [`fmt_float`].
struct FixedDigits(PrettyFormatter<'static>);

impl Formatter for FixedDigits {
    fn write_f64<W: ?Sized + Write>(&mut self, w: &mut W, value: f64) -> io::Result<()> {
        w.write_all(fmt_float(value).as_bytes())
    }
    fn write_f32<W: ?Sized + Write>(&mut self, w: &mut W, value: f32) -> io::Result<()> {
        w.write_all(format!("{value:.8e}").as_bytes())
    }
    fn begin_array<W: ?Sized + Write>(&mut self, w: &mut W) -> io::Result<()> {
        self.0.begin_array(w)
    }
    fn end_array<W: ?Sized + Write>(&mut self, w: &mut W) -> io::Result<()> {
        self.0.end_array(w)
    }
    fn begin_array_value<W: ?Sized + Write>(&mut self, w: &mut W, first: bool) -> io::Result<()> {
        self.0.begin_array_value(w, first)
    }
    fn end_array_value<W: ?Sized + Write>(&mut self, w: &mut W) -> io::Result<()> {
        self.0.end_array_value(w)
    }
    fn begin_object<W: ?Sized + Write>(&mut self, w: &mut W) -> io::Result<()> {
        self.0.begin_object(w)
    }
    fn end_object<W: ?Sized + Write>(&mut self, w: &mut W) -> io::Result<()> {
        self.0.end_object(w)
    }
    fn begin_object_key<W: ?Sized + Write>(&mut self, w: &mut W, first: bool) -> io::Result<()> {
        self.0.begin_object_key(w, first)
    }
    fn begin_object_value<W: ?Sized + Write>(&mut self, w: &mut W) -> io::Result<()> {
        self.0.begin_object_value(w)
    }
    fn end_object_value<W: ?Sized + Write>(&mut self, w: &mut W) -> io::Result<()> {
        self.0.end_object_value(w)
    }
}

pub fn to_json<T: Serialize + ?Sized>(value: &T) -> Result<String> {
    let mut out = Vec::new();
    let mut ser = serde_json::Serializer::with_formatter(&mut out, FixedDigits(PrettyFormatter::new()));
    value.serialize(&mut ser)?;
    out.push(b'\n');
    Ok(String::from_utf8(out).expect("serde_json emits UTF-8"))
}

fn csv_writer<W: Write>(w: W) -> csv::Writer<W> {
    csv::WriterBuilder::new().terminator(csv::Terminator::Any(b'\n')).from_writer(w)
}

pub fn write_links_csv<W: Write>(w: W, links: &[LinkReport]) -> Result<()> {
    let mut out = csv_writer(w);
    out.write_record([
        "user",
        "luminaire",
        "wavelength",
        "signal_sq",
        "interference_sq",
        "sigma_bn_sq",
        "sigma_s_sq",
        "sigma_pr_sq",
        "noise_var",
        "sinr",
        "sinr_db",
        "achievable_rate_bps",
    ])?;
    for l in links {
        let mut row = vec![l.user.to_string(), l.luminaire.to_string(), l.wavelength.name().to_string()];
        row.extend(
            [
                l.signal_sq,
                l.interference_sq,
                l.sigma_bn_sq,
                l.sigma_s_sq,
                l.sigma_pr_sq,
                l.noise_var,
                l.sinr,
                l.sinr_db,
                l.achievable_rate,
            ]
            .map(fmt_float),
        );
        out.write_record(&row)?;
    }
    out.flush().map_err(|e| Error::Csv(e.into()))?;
    Ok(())
}

/// One row per user: gain to every luminaire.
pub fn write_gains_csv<W: Write>(w: W, gains: &GainMatrix) -> Result<()> {
    let mut out = csv_writer(w);
    let mut header = vec!["user".to_string()];
    header.extend((0..gains.n_luminaires).map(|a| format!("h_{a}")));
    out.write_record(&header)?;
    for u in 0..gains.n_users {
        let mut row = vec![u.to_string()];
        row.extend(gains.row(u).iter().map(|&h| fmt_float(h)));
        out.write_record(&row)?;
    }
    out.flush().map_err(|e| Error::Csv(e.into()))?;
    Ok(())
}

/// Flat per-trial view of a [`TrendResult`].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrendRow {
    pub n: usize,
    pub trial: usize,
    pub seed: u64,
    pub throughput_bps: f64,
    pub mean_sinr_db_all: f64,
    pub mean_sinr_db_served: Option<f64>,
    pub red: usize,
    pub yellow: usize,
    pub green: usize,
    pub blue: usize,
}

pub fn trend_rows(trend: &TrendResult) -> Vec<TrendRow> {
    trend
        .trials()
        .map(|t| TrendRow {
            n: t.n,
            trial: t.trial,
            seed: t.seed,
            throughput_bps: t.throughput_bps,
            mean_sinr_db_all: t.mean_sinr_db_all,
            mean_sinr_db_served: t.mean_sinr_db_served,
            red: t.wavelength_usage[Wavelength::Red.index()],
            yellow: t.wavelength_usage[Wavelength::Yellow.index()],
            green: t.wavelength_usage[Wavelength::Green.index()],
            blue: t.wavelength_usage[Wavelength::Blue.index()],
        })
        .collect()
}

pub fn write_trend_csv<W: Write>(w: W, trend: &TrendResult) -> Result<()> {
    write_trend_rows(w, &trend_rows(trend))
}

pub fn write_trend_rows<W: Write>(w: W, rows: &[TrendRow]) -> Result<()> {
    let mut out = csv_writer(w);
    out.write_record([
        "n",
        "trial",
        "seed",
        "throughput_bps",
        "mean_sinr_db_all",
        "mean_sinr_db_served",
        "red",
        "yellow",
        "green",
        "blue",
    ])?;
    for r in rows {
        out.write_record([
            r.n.to_string(),
            r.trial.to_string(),
            r.seed.to_string(),
            fmt_float(r.throughput_bps),
            fmt_float(r.mean_sinr_db_all),
            r.mean_sinr_db_served.map(fmt_float).unwrap_or_default(),
            r.red.to_string(),
            r.yellow.to_string(),
            r.green.to_string(),
            r.blue.to_string(),
        ])?;
    }
    out.flush().map_err(|e| Error::Csv(e.into()))?;
    Ok(())
}

pub fn read_trend_csv<R: Read>(r: R) -> Result<Vec<TrendRow>> {
    csv::Reader::from_reader(r)
        .deserialize()
        .map(|row| row.map_err(Error::from))
        .collect()
}

/// Per-count means.
pub fn write_summary_csv<W: Write>(w: W, trend: &TrendResult) -> Result<()> {
    let mut out = csv_writer(w);
    out.write_record(["n", "trials", "mean_throughput_bps", "mean_sinr_db_all", "mean_sinr_db_served"])?;
    for p in &trend.points {
        out.write_record([
            p.n.to_string(),
            p.trials.len().to_string(),
            fmt_float(p.mean_throughput_bps),
            fmt_float(p.mean_sinr_db_all),
            p.mean_sinr_db_served.map(fmt_float).unwrap_or_default(),
        ])?;
    }
    out.flush().map_err(|e| Error::Csv(e.into()))?;
    Ok(())
}

/// Two whitespace-separated columns with a `#` header line.
pub fn write_dat<W: Write>(mut w: W, columns: [&str; 2], points: &[(f64, f64)]) -> io::Result<()> {
    writeln!(w, "# {} {}", columns[0], columns[1])?;
    for &(x, y) in points {
        writeln!(w, "{} {}", fmt_float(x), fmt_float(y))?;
    }
    Ok(())
}

fn io_err(path: &Path) -> impl FnOnce(io::Error) -> Error + '_ {
    move |source| Error::Io {
        path: path.display().to_string(),
        source,
    }
}

pub fn create_dir(dir: &Path) -> Result<()> {
    fs::create_dir_all(dir).map_err(io_err(dir))
}

pub fn write_file(path: &Path, contents: &[u8]) -> Result<()> {
    fs::write(path, contents).map_err(io_err(path))
}

/// Renders with `f` and writes to `path`.
pub fn write_with(path: &Path, f: impl FnOnce(&mut Vec<u8>) -> Result<()>) -> Result<()> {
    let mut buf = Vec::new();
    f(&mut buf)?;
    write_file(path, &buf)
}

/// Writes the trend tables, the full JSON dump and the plot files into `dir`.
/// Returns the paths written, in order.
pub fn write_trend_outputs(dir: &Path, trend: &TrendResult, format: OutputFormat) -> Result<Vec<PathBuf>> {
    create_dir(dir)?;
    let mut written = Vec::new();
    if format.csv() {
        let path = dir.join("trend.csv");
        write_with(&path, |b| write_trend_csv(b, trend))?;
        written.push(path);
        let path = dir.join("summary.csv");
        write_with(&path, |b| write_summary_csv(b, trend))?;
        written.push(path);
    }
    if format.json() {
        let path = dir.join("trend.json");
        write_file(&path, to_json(trend)?.as_bytes())?;
        written.push(path);
    }
    let throughput: Vec<_> = trend
        .points
        .iter()
        .map(|p| (p.n as f64, p.mean_throughput_bps / 1e9))
        .collect();
    let sinr: Vec<_> = trend.points.iter().map(|p| (p.n as f64, p.mean_sinr_db_all)).collect();
    let served: Vec<_> = trend
        .points
        .iter()
        .filter_map(|p| p.mean_sinr_db_served.map(|s| (p.n as f64, s)))
        .collect();
    for (name, cols, pts) in [
        ("throughput.dat", ["users", "throughput_gbps"], &throughput),
        ("sinr.dat", ["users", "mean_sinr_db"], &sinr),
        ("sinr_served.dat", ["users", "mean_sinr_db_served"], &served),
    ] {
        let path = dir.join(name);
        write_with(&path, |b| write_dat(b, cols, pts).map_err(io_err(&path)))?;
        written.push(path);
    }
    Ok(written)
}
