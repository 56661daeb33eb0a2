//! CSV tables and SVG scatter plots from an audit report.

use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use crate::diagnostics::{ExperimentResult, WordRecord};
use crate::error::{Error, Result};
use crate::report::{write_atomic, AuditReport};

const MALE_COLOR: &str = "#1f77b4";
const FEMALE_COLOR: &str = "#d62728";
const PANEL_W: f64 = 420.0;
const PANEL_H: f64 = 380.0;
const MARGIN: f64 = 50.0;

#[derive(Debug, Clone, Copy, PartialEq, Eq, clap::ValueEnum)]
pub enum PlotKind {
    /// Most biased words in 2-D, colored by original gender.
    Cluster,
    /// Male-neighbor counts of professions against their original bias.
    Professions,
}

impl PlotKind {
    pub fn name(self) -> &'static str {
        match self {
            PlotKind::Cluster => "cluster",
            PlotKind::Professions => "professions",
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct PlotData {
    pub csv: String,
    pub svg: String,
}

struct Panel<'a> {
    title: &'a str,
    x_label: &'a str,
    y_label: &'a str,
    points: Vec<(f64, f64, bool)>,
}

fn gender(rec: &WordRecord) -> &'static str {
    if rec.original_bias > 0.0 {
        "male"
    } else {
        "female"
    }
}

fn csv_field(s: &str) -> String {
    if s.contains([',', '"', '\n']) {
        format!("\"{}\"", s.replace('"', "\"\""))
    } else {
        s.to_string()
    }
}

fn metric(result: &ExperimentResult, rec: &WordRecord, key: &str) -> Result<f64> {
    rec.metrics.get(key).copied().ok_or_else(|| {
        Error::Report(format!(
            "{} block: word {} has no {key}",
            result.name, rec.word
        ))
    })
}

fn table(result: &ExperimentResult, columns: &[&str], with_gender: bool) -> Result<String> {
    let mut out = String::from("word,original_bias");
    for c in columns {
        out.push(',');
        out.push_str(c);
    }
    if with_gender {
        out.push_str(",gender");
    }
    out.push('\n');
    for rec in &result.per_word {
        write!(out, "{},{}", csv_field(&rec.word), rec.original_bias).unwrap();
        for c in columns {
            write!(out, ",{}", metric(result, rec, c)?).unwrap();
        }
        if with_gender {
            write!(out, ",{}", gender(rec)).unwrap();
        }
        out.push('\n');
    }
    Ok(out)
}

fn panel_points(
    result: &ExperimentResult,
    x: Option<&str>,
    y: &str,
) -> Result<Vec<(f64, f64, bool)>> {
    result
        .per_word
        .iter()
        .map(|rec| {
            let xv = match x {
                Some(k) => metric(result, rec, k)?,
                None => rec.original_bias,
            };
            Ok((xv, metric(result, rec, y)?, rec.original_bias > 0.0))
        })
        .collect()
}

fn range(values: impl Iterator<Item = f64>) -> (f64, f64) {
    let (lo, hi) = values.fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), v| {
        (lo.min(v), hi.max(v))
    });
    if !lo.is_finite() {
        return (0.0, 1.0);
    }
    if hi - lo < 1e-12 {
        (lo - 0.5, hi + 0.5)
    } else {
        let pad = (hi - lo) * 0.05;
        (lo - pad, hi + pad)
    }
}

fn escape(s: &str) -> String {
    s.replace('&', "&amp;")
        .replace('<', "&lt;")
        .replace('>', "&gt;")
}

fn svg(title: &str, panels: &[Panel<'_>]) -> String {
    let width = PANEL_W * panels.len() as f64;
    let height = PANEL_H + 40.0;
    let mut s = String::new();
    writeln!(
        s,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{width}" height="{height}" viewBox="0 0 {width} {height}" font-family="sans-serif" font-size="12">"#
    )
    .unwrap();
    writeln!(
        s,
        r#"<rect width="{width}" height="{height}" fill="white"/>"#
    )
    .unwrap();
    writeln!(
        s,
        r#"<text x="{}" y="20" text-anchor="middle" font-size="15">{}</text>"#,
        width / 2.0,
        escape(title)
    )
    .unwrap();
    for (i, p) in panels.iter().enumerate() {
        let ox = i as f64 * PANEL_W;
        let oy = 40.0;
        let (x0, x1) = range(p.points.iter().map(|q| q.0));
        let (y0, y1) = range(p.points.iter().map(|q| q.1));
        let left = ox + MARGIN;
        let right = ox + PANEL_W - 15.0;
        let top = oy + 25.0;
        let bottom = oy + PANEL_H - MARGIN;
        let sx = |v: f64| left + (v - x0) / (x1 - x0) * (right - left);
        let sy = |v: f64| bottom - (v - y0) / (y1 - y0) * (bottom - top);
        writeln!(s, r#"<g>"#).unwrap();
        writeln!(
            s,
            r#"<text x="{:.2}" y="{:.2}" text-anchor="middle" font-size="13">{}</text>"#,
            (left + right) / 2.0,
            oy + 15.0,
            escape(p.title)
        )
        .unwrap();
        writeln!(
            s,
            r#"<rect x="{left:.2}" y="{top:.2}" width="{:.2}" height="{:.2}" fill="none" stroke="black"/>"#,
            right - left,
            bottom - top
        )
        .unwrap();
        for (v, anchor_x) in [(x0, left), (x1, right)] {
            writeln!(s, r#"<text x="{anchor_x:.2}" y="{:.2}" text-anchor="middle" font-size="10">{v:.3}</text>"#, bottom + 14.0).unwrap();
        }
        for (v, anchor_y) in [(y0, bottom), (y1, top)] {
            writeln!(s, r#"<text x="{:.2}" y="{anchor_y:.2}" text-anchor="end" font-size="10">{v:.3}</text>"#, left - 4.0).unwrap();
        }
        writeln!(
            s,
            r#"<text x="{:.2}" y="{:.2}" text-anchor="middle">{}</text>"#,
            (left + right) / 2.0,
            bottom + 32.0,
            escape(p.x_label)
        )
        .unwrap();
        let cy = (top + bottom) / 2.0;
        writeln!(
            s,
            r#"<text x="{:.2}" y="{cy:.2}" text-anchor="middle" transform="rotate(-90 {:.2} {cy:.2})">{}</text>"#,
            ox + 14.0,
            ox + 14.0,
            escape(p.y_label)
        )
        .unwrap();
        for &(x, y, male) in &p.points {
            let color = if male { MALE_COLOR } else { FEMALE_COLOR };
            writeln!(
                s,
                r#"<circle cx="{:.2}" cy="{:.2}" r="2.5" fill="{color}" fill-opacity="0.7"/>"#,
                sx(x),
                sy(y)
            )
            .unwrap();
        }
        writeln!(s, "</g>").unwrap();
    }
    let ly = height - 8.0;
    writeln!(s, r#"<circle cx="20" cy="{:.2}" r="4" fill="{MALE_COLOR}"/><text x="28" y="{ly:.2}">male</text>"#, ly - 4.0).unwrap();
    writeln!(s, r#"<circle cx="80" cy="{:.2}" r="4" fill="{FEMALE_COLOR}"/><text x="88" y="{ly:.2}">female</text>"#, ly - 4.0).unwrap();
    s.push_str("</svg>\n");
    s
}

/// CSV and SVG for one experiment block of `report`.
pub fn plot_data(report: &AuditReport, which: PlotKind) -> Result<PlotData> {
    let result = report
        .result(which.name())
        .ok_or_else(|| Error::Report(format!("report has no {} block", which.name())))?;
    if result.per_word.is_empty() {
        return Err(Error::Report(format!(
            "{} block has no per-word records",
            which.name()
        )));
    }
    match which {
        PlotKind::Cluster => {
            let has_tsne = result.per_word[0].metrics.contains_key("tsne_after_x");
            let mut columns = vec!["cluster_before", "cluster_after"];
            if has_tsne {
                columns.extend([
                    "tsne_before_x",
                    "tsne_before_y",
                    "tsne_after_x",
                    "tsne_after_y",
                ]);
            }
            let csv = table(result, &columns, true)?;
            let panels = if has_tsne {
                vec![
                    Panel {
                        title: "before debiasing",
                        x_label: "t-SNE 1",
                        y_label: "t-SNE 2",
                        points: panel_points(result, Some("tsne_before_x"), "tsne_before_y")?,
                    },
                    Panel {
                        title: "after debiasing",
                        x_label: "t-SNE 1",
                        y_label: "t-SNE 2",
                        points: panel_points(result, Some("tsne_after_x"), "tsne_after_y")?,
                    },
                ]
            } else {
                vec![Panel {
                    title: "k-means cluster after debiasing",
                    x_label: "original bias",
                    y_label: "cluster",
                    points: panel_points(result, None, "cluster_after")?,
                }]
            };
            Ok(PlotData {
                csv,
                svg: svg("Most biased words", &panels),
            })
        }
        PlotKind::Professions => {
            let csv = table(
                result,
                &["male_neighbors_before", "male_neighbors_after"],
                false,
            )?;
            let panels = [
                Panel {
                    title: "before debiasing",
                    x_label: "original bias",
                    y_label: "male neighbors",
                    points: panel_points(result, None, "male_neighbors_before")?,
                },
                Panel {
                    title: "after debiasing",
                    x_label: "original bias",
                    y_label: "male neighbors",
                    points: panel_points(result, None, "male_neighbors_after")?,
                },
            ];
            Ok(PlotData {
                csv,
                svg: svg("Male neighbors of professions", &panels),
            })
        }
    }
}

/// Writes `<which>.csv` and `<which>.svg` into `dir`.
pub fn write_plot_data(
    report: &AuditReport,
    which: PlotKind,
    dir: &Path,
) -> Result<(PathBuf, PathBuf)> {
    let data = plot_data(report, which)?;
    std::fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
    let csv = dir.join(format!("{}.csv", which.name()));
    let svg = dir.join(format!("{}.svg", which.name()));
    write_atomic(&csv, data.csv.as_bytes())?;
    write_atomic(&svg, data.svg.as_bytes())?;
    Ok((csv, svg))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn csv_quoting() {
        assert_eq!(csv_field("nurse"), "nurse");
        assert_eq!(csv_field("a,b"), "\"a,b\"");
        assert_eq!(csv_field("say \"hi\""), "\"say \"\"hi\"\"\"");
    }

    #[test]
    fn flat_range_is_widened() {
        assert_eq!(range([2.0, 2.0].into_iter()), (1.5, 2.5));
        assert_eq!(range(std::iter::empty()), (0.0, 1.0));
    }
}
