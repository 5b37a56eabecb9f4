//! Report rendering: tab-separated tables, JSON, and plot data.

use std::fmt::Write as _;
use std::path::Path;
use std::str::FromStr;

use super::{io_err, PipelineError, ResultRecord};
use crate::metrics::Diameter;

pub const TABULAR_SCHEMA: u32 = 1;
pub const PLOTDATA_SCHEMA: u32 = 1;

const COLUMNS: [&str; 11] = [
    "ell",
    "n",
    "r",
    "lambda1",
    "residual",
    "diam",
    "perfect",
    "order_ell_gen",
    "genus",
    "dsc_pass",
    "interlace_pass",
];

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ReportFormat {
    Tabular,
    Structured,
    Plotdata,
}

impl FromStr for ReportFormat {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        match s {
            "tabular" => Ok(ReportFormat::Tabular),
            "structured" => Ok(ReportFormat::Structured),
            "plotdata" => Ok(ReportFormat::Plotdata),
            other => Err(format!(
                "unknown format `{other}` (expected tabular, structured or plotdata)"
            )),
        }
    }
}

impl ReportFormat {
    pub fn extension(self) -> &'static str {
        match self {
            ReportFormat::Tabular | ReportFormat::Plotdata => "tsv",
            ReportFormat::Structured => "json",
        }
    }
}

fn opt<T: ToString>(v: Option<T>) -> String {
    v.map_or_else(|| "NA".into(), |v| v.to_string())
}

/// Shortest round-trip form, in exponent notation outside `[1e-4, 1e6)`.
fn num(x: f64) -> String {
    let a = x.abs();
    if a != 0.0 && !(1e-4..1e6).contains(&a) {
        format!("{x:e}")
    } else {
        x.to_string()
    }
}

fn tabular(rec: &ResultRecord) -> String {
    let mut out = format!("# esperanto-tabular schema {TABULAR_SCHEMA}\n");
    out.push_str(&COLUMNS.join("\t"));
    out.push('\n');
    for m in &rec.body.members {
        let Some(x) = &m.metrics else { continue };
        let diam = x.diameter.map(|d| match d {
            Diameter::Exact(d) => d.to_string(),
            Diameter::Bracket { lower, upper } => format!("{lower}:{}", opt(upper)),
        });
        let p = x.predicates.as_ref();
        let row = [
            m.ell.to_string(),
            x.n.to_string(),
            x.degree.to_string(),
            opt(x.spectral.as_ref().map(|s| num(s.lambda1))),
            opt(x.spectral.as_ref().map(|s| num(s.residual))),
            opt(diam),
            opt(p.map(|p| p.perfect)),
            opt(p.and_then(|p| p.order_ell_generated)),
            opt(x.genus.map(|g| g.genus)),
            opt(x.dsc.map(|d| d.pass)),
            opt(x.interlacing.map(|i| i.pass)),
        ];
        out.push_str(&row.join("\t"));
        out.push('\n');
    }
    out
}

/// Points `(ln 2n, ln λ₁)` and, for every fitted exponent, the reference
/// line `y = ln c − A·ln x` evaluated at the same abscissae.
fn plotdata(rec: &ResultRecord) -> String {
    let mut out = format!("# esperanto-plotdata schema {PLOTDATA_SCHEMA}\nseries\tx\ty\n");
    let points: Vec<(f64, f64)> = rec
        .body
        .members
        .iter()
        .filter_map(|m| {
            let x = m.metrics.as_ref()?;
            let lam = x.lambda1()?;
            Some(((2.0 * x.n as f64).ln(), lam.ln()))
        })
        .collect();
    for (x, y) in &points {
        let _ = writeln!(out, "points\t{x}\t{y}");
    }
    if let Some(fit) = &rec.body.fit {
        for row in &fit.rows {
            for (x, _) in &points {
                let y = row.c.ln() - row.exponent * x.ln();
                let _ = writeln!(out, "reference:A={}\t{x}\t{y}", row.exponent);
            }
        }
    }
    out
}

pub fn render_report(rec: &ResultRecord, format: ReportFormat) -> String {
    match format {
        ReportFormat::Tabular => tabular(rec),
        ReportFormat::Structured => {
            let mut s = serde_json::to_string_pretty(rec).expect("record serializes");
            s.push('\n');
            s
        }
        ReportFormat::Plotdata => plotdata(rec),
    }
}

pub fn emit_report(
    rec: &ResultRecord,
    format: ReportFormat,
    path: &Path,
) -> Result<(), PipelineError> {
    std::fs::write(path, render_report(rec, format))
        .map_err(io_err(format!("writing {}", path.display())))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::pipeline::{summarize, ExperimentConfig, MemberMetrics, MemberRecord, RunInfo};
    use crate::spectral::{Method, SpectralReport};

    fn synthetic(ns: &[usize], lambda: impl Fn(usize) -> f64) -> ResultRecord {
        let cfg = ExperimentConfig::parse("[family]\ncatalog = \"sl2-elementary\"\nells = [3]\n")
            .unwrap();
        let members = ns
            .iter()
            .enumerate()
            .map(|(i, &n)| MemberRecord {
                ell: i as u32,
                cache_key: None,
                metrics: Some(MemberMetrics {
                    n,
                    degree: 4,
                    action: "synthetic".into(),
                    generators: "synthetic".into(),
                    connected: true,
                    components: 1,
                    spectral: Some(SpectralReport {
                        lambda1: lambda(n),
                        method: Method::Dense,
                        residual: 0.0,
                        iterations: 1,
                        tolerance: 1e-9,
                        connected: true,
                        converged: true,
                        loop_convention: crate::LOOP_CONVENTION.into(),
                        eigenvector: None,
                    }),
                    diameter: None,
                    diameter_profile: None,
                    dsc: None,
                    predicates: None,
                    genus: None,
                    interlacing: None,
                    notes: vec![],
                }),
                error: None,
            })
            .collect();
        ResultRecord {
            body: summarize(&cfg, members),
            run: RunInfo::default(),
        }
    }

    #[test]
    fn tabular_has_header_and_rows() {
        let rec = synthetic(&[10, 20, 40], |_| 0.5);
        let text = render_report(&rec, ReportFormat::Tabular);
        let lines: Vec<&str> = text.lines().collect();
        assert_eq!(lines.len(), 2 + 3);
        assert_eq!(lines[0], "# esperanto-tabular schema 1");
        assert_eq!(lines[1].split('\t').count(), 11);
        assert!(lines[2].starts_with("0\t10\t4\t0.5\t0\tNA"));

        let empty = synthetic(&[], |_| 0.5);
        assert_eq!(
            render_report(&empty, ReportFormat::Tabular).lines().count(),
            2
        );
    }

    #[test]
    fn inverse_log_points_sit_on_the_unit_reference_line() {
        let ns = [8, 64, 512, 4096];
        let rec = synthetic(&ns, |n| 1.0 / (2.0 * n as f64).ln());
        let fit = rec.body.fit.as_ref().unwrap();
        assert_eq!(fit.exponent, 1.0);
        let text = render_report(&rec, ReportFormat::Plotdata);
        let rows: Vec<Vec<&str>> = text
            .lines()
            .skip(2)
            .map(|l| l.split('\t').collect())
            .collect();
        let points: Vec<f64> = rows
            .iter()
            .filter(|r| r[0] == "points")
            .map(|r| r[2].parse().unwrap())
            .collect();
        let reference: Vec<f64> = rows
            .iter()
            .filter(|r| r[0] == "reference:A=1")
            .map(|r| r[2].parse().unwrap())
            .collect();
        assert_eq!(points.len(), ns.len());
        assert_eq!(reference.len(), ns.len());
        for (p, r) in points.iter().zip(&reference) {
            assert!((p - r).abs() < 1e-10);
        }
    }

    #[test]
    fn formats_parse() {
        assert_eq!(
            "tabular".parse::<ReportFormat>().unwrap(),
            ReportFormat::Tabular
        );
        assert_eq!(
            "plotdata".parse::<ReportFormat>().unwrap().extension(),
            "tsv"
        );
        assert!("xml".parse::<ReportFormat>().is_err());
    }

    #[test]
    fn structured_round_trips() {
        let rec = synthetic(&[10, 20, 40], |n| 1.0 / n as f64);
        let text = render_report(&rec, ReportFormat::Structured);
        let back: ResultRecord = serde_json::from_str(&text).unwrap();
        assert_eq!(back, rec);
    }
}
