//! Presentation of a finished pipeline run: a structured JSON report, an
//! SVG pie chart of the category distribution, and a plain-text summary.
//!
//! Structured output is fully deterministic — field order is fixed, config
//! is a sorted map, and no wall-clock value is ever written (the optional
//! `generated_at` stamp is copied from configuration when provided) — so
//! rerunning a pipeline on the same inputs reproduces every output file
//! byte for byte.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::path::Path;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::reputation::{round_half_away, CategoryShare};

#[derive(Debug, Error)]
pub enum ReportError {
    #[error("cannot write {path}: {source}")]
    Write {
        path: String,
        source: std::io::Error,
    },
    #[error("cannot read {path}: {source}")]
    Read {
        path: String,
        source: std::io::Error,
    },
    #[error("{path}: invalid report file: {source}")]
    InvalidJson {
        path: String,
        source: serde_json::Error,
    },
    #[error("cannot chart an empty category distribution")]
    NoData,
}

/// Per-review score components as surfaced in the report. Components the
/// active pipeline does not compute stay `null` in the JSON.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Components {
    #[serde(rename = "H")]
    pub helpfulness: Option<f64>,
    #[serde(rename = "T")]
    pub time: Option<f64>,
    #[serde(rename = "S")]
    pub sentiment: Option<f64>,
    #[serde(rename = "C")]
    pub credibility: Option<f64>,
}

/// One entry of a top-k review list.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TopReview {
    pub review_id: String,
    pub text: String,
    pub rating: f64,
    /// The score the review was ranked by.
    pub review_score: f64,
    pub components: Components,
}

/// The structured result of one pipeline run over one entity.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReputationReport {
    pub entity_id: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub entity_name: Option<String>,
    pub pipeline: String,
    pub reputation: f64,
    pub scale_max: u32,
    pub categories: Vec<CategoryShare>,
    pub top_positive: Vec<TopReview>,
    pub top_negative: Vec<TopReview>,
    /// The effective configuration of the run, sorted by key.
    pub config: BTreeMap<String, serde_json::Value>,
    /// Copied verbatim from configuration when supplied; never a clock
    /// reading, so reruns stay byte-identical.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub generated_at: Option<String>,
}

/// Writes the report as pretty-printed JSON with a trailing newline.
pub fn emit_structured(report: &ReputationReport, path: &Path) -> Result<(), ReportError> {
    let json = serde_json::to_string_pretty(report).expect("reports serialize");
    std::fs::write(path, json + "\n").map_err(|source| ReportError::Write {
        path: path.display().to_string(),
        source,
    })
}

/// Reads a report previously written by [`emit_structured`].
pub fn load_structured(path: &Path) -> Result<ReputationReport, ReportError> {
    let path_str = path.display().to_string();
    let content = std::fs::read_to_string(path).map_err(|source| ReportError::Read {
        path: path_str.clone(),
        source,
    })?;
    serde_json::from_str(&content).map_err(|source| ReportError::InvalidJson {
        path: path_str,
        source,
    })
}

/// Slice colors, aligned with the category order (most negative first).
const PALETTE: [&str; 5] = ["#d73027", "#fc8d59", "#fee08b", "#91cf60", "#1a9850"];

const PIE_CENTER: f64 = 200.0;
const PIE_RADIUS: f64 = 150.0;
/// A slice covering at least this share of the circle is drawn as a full
/// circle — an arc cannot span the whole turn.
const FULL_CIRCLE_SHARE: f64 = 0.99999;

fn polar(angle_degrees: f64) -> (f64, f64) {
    let radians = angle_degrees.to_radians();
    (
        PIE_CENTER + PIE_RADIUS * radians.cos(),
        PIE_CENTER + PIE_RADIUS * radians.sin(),
    )
}

/// Renders the category distribution as a pie chart. Slices start at
/// twelve o'clock and run clockwise in category order; categories with no
/// reviews draw nothing. Each slice carries `data-label`, `data-percent`,
/// and `data-angle` attributes for machine checking.
pub fn render_pie_svg(categories: &[CategoryShare]) -> Result<String, ReportError> {
    let total: u64 = categories.iter().map(|c| c.count).sum();
    if total == 0 {
        return Err(ReportError::NoData);
    }
    let mut svg = String::new();
    svg.push_str(concat!(
        "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"560\" height=\"400\" ",
        "viewBox=\"0 0 560 400\" role=\"img\">\n",
    ));

    let mut start = -90.0f64;
    for (i, share) in categories.iter().enumerate() {
        if share.count == 0 {
            continue;
        }
        let fraction = share.count as f64 / total as f64;
        let angle = 360.0 * fraction;
        let color = PALETTE[i.min(PALETTE.len() - 1)];
        let attrs = format!(
            "fill=\"{color}\" data-label=\"{}\" data-percent=\"{:.2}\" data-angle=\"{angle:.4}\"",
            share.label, share.percent
        );
        if fraction >= FULL_CIRCLE_SHARE {
            writeln!(
                svg,
                "  <circle cx=\"{PIE_CENTER}\" cy=\"{PIE_CENTER}\" r=\"{PIE_RADIUS}\" {attrs}/>"
            )
            .expect("writing to a string");
        } else {
            let (x0, y0) = polar(start);
            let (x1, y1) = polar(start + angle);
            let large_arc = i32::from(angle > 180.0);
            writeln!(
                svg,
                "  <path d=\"M {PIE_CENTER} {PIE_CENTER} L {x0:.4} {y0:.4} \
                 A {PIE_RADIUS} {PIE_RADIUS} 0 {large_arc} 1 {x1:.4} {y1:.4} Z\" {attrs}/>"
            )
            .expect("writing to a string");
        }
        start += angle;
    }

    // Legend, one row per category, zero or not.
    for (i, share) in categories.iter().enumerate() {
        let y = 60.0 + 36.0 * i as f64;
        let color = PALETTE[i.min(PALETTE.len() - 1)];
        writeln!(
            svg,
            "  <rect x=\"400\" y=\"{y}\" width=\"18\" height=\"18\" fill=\"{color}\"/>"
        )
        .expect("writing to a string");
        writeln!(
            svg,
            "  <text x=\"426\" y=\"{:.0}\" font-family=\"sans-serif\" font-size=\"14\">{} \
             {:.2}% ({})</text>",
            y + 14.0,
            share.label,
            share.percent,
            share.count
        )
        .expect("writing to a string");
    }
    svg.push_str("</svg>\n");
    Ok(svg)
}

/// Writes the pie chart next to the structured report.
pub fn emit_pie_svg(categories: &[CategoryShare], path: &Path) -> Result<(), ReportError> {
    let svg = render_pie_svg(categories)?;
    std::fs::write(path, svg).map_err(|source| ReportError::Write {
        path: path.display().to_string(),
        source,
    })
}

const SUMMARY_TEXT_WIDTH: usize = 120;

fn clipped(text: &str) -> String {
    if text.chars().count() <= SUMMARY_TEXT_WIDTH {
        return text.to_string();
    }
    let mut cut: String = text.chars().take(SUMMARY_TEXT_WIDTH - 1).collect();
    cut.push('…');
    cut
}

fn push_top_list(out: &mut String, heading: &str, reviews: &[TopReview]) {
    out.push_str(heading);
    out.push('\n');
    if reviews.is_empty() {
        out.push_str("  (none)\n");
        return;
    }
    for (i, review) in reviews.iter().enumerate() {
        writeln!(
            out,
            "  {}. {} score={:.4} rating={} \"{}\"",
            i + 1,
            review.review_id,
            round_half_away(review.review_score, 4),
            review.rating,
            clipped(&review.text)
        )
        .expect("writing to a string");
    }
}

/// Renders the human-readable summary: reputation to two decimals, review
/// scores to four. The top-review sections disappear entirely when both
/// lists are empty (a k=0 run).
pub fn render_text_summary(report: &ReputationReport) -> String {
    let mut out = String::new();
    match &report.entity_name {
        Some(name) => writeln!(out, "Reputation report for {} ({name})", report.entity_id),
        None => writeln!(out, "Reputation report for {}", report.entity_id),
    }
    .expect("writing to a string");
    writeln!(out, "Pipeline: {}", report.pipeline).expect("writing to a string");
    writeln!(
        out,
        "Reputation: {:.2} (scale 1-{})",
        round_half_away(report.reputation, 2),
        report.scale_max
    )
    .expect("writing to a string");
    out.push_str("Categories:\n");
    for share in &report.categories {
        writeln!(
            out,
            "  {:<9} {:>6.2}% ({})",
            share.label, share.percent, share.count
        )
        .expect("writing to a string");
    }
    if !(report.top_positive.is_empty() && report.top_negative.is_empty()) {
        push_top_list(&mut out, "Top positive reviews:", &report.top_positive);
        push_top_list(&mut out, "Top negative reviews:", &report.top_negative);
    }
    if let Some(stamp) = &report.generated_at {
        writeln!(out, "Generated at: {stamp}").expect("writing to a string");
    }
    out
}

/// Writes the text summary to a file.
pub fn emit_text_summary(report: &ReputationReport, path: &Path) -> Result<(), ReportError> {
    std::fs::write(path, render_text_summary(report)).map_err(|source| ReportError::Write {
        path: path.display().to_string(),
        source,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use tempfile::tempdir;

    fn shares(counts: [u64; 5]) -> Vec<CategoryShare> {
        let labels = crate::reputation::CATEGORY_LABELS;
        let total: u64 = counts.iter().sum();
        labels
            .iter()
            .zip(counts)
            .map(|(label, count)| CategoryShare {
                label: label.to_string(),
                count,
                percent: round_half_away(100.0 * count as f64 / total as f64, 2),
            })
            .collect()
    }

    fn sample_report() -> ReputationReport {
        let mut config = BTreeMap::new();
        config.insert("t0".to_string(), serde_json::json!(0.85));
        config.insert("top_k".to_string(), serde_json::json!(2));
        ReputationReport {
            entity_id: "hotel-17".to_string(),
            entity_name: Some("Harbor View".to_string()),
            pipeline: "attribute-aggregation".to_string(),
            reputation: 9.4767,
            scale_max: 10,
            categories: shares([1, 0, 1, 1, 2]),
            top_positive: vec![TopReview {
                review_id: "r1".to_string(),
                text: "Spotless rooms and a stunning view.".to_string(),
                rating: 10.0,
                review_score: 0.9988,
                components: Components {
                    helpfulness: Some(1.0),
                    time: Some(0.998),
                    sentiment: Some(0.9976),
                    credibility: None,
                },
            }],
            top_negative: vec![],
            config,
            generated_at: None,
        }
    }

    #[test]
    fn structured_report_round_trips_losslessly() {
        let report = sample_report();
        let dir = tempdir().unwrap();
        let path = dir.path().join("report.json");
        emit_structured(&report, &path).unwrap();
        let loaded = load_structured(&path).unwrap();
        assert_eq!(loaded, report);
    }

    #[test]
    fn structured_output_is_byte_identical_across_reruns() {
        let report = sample_report();
        let dir = tempdir().unwrap();
        let first = dir.path().join("a.json");
        let second = dir.path().join("b.json");
        emit_structured(&report, &first).unwrap();
        emit_structured(&report, &second).unwrap();
        assert_eq!(
            std::fs::read(&first).unwrap(),
            std::fs::read(&second).unwrap()
        );
    }

    #[test]
    fn field_order_is_fixed_in_the_json() {
        let report = sample_report();
        let json = serde_json::to_string(&report).unwrap();
        let order = [
            "entity_id",
            "entity_name",
            "pipeline",
            "\"reputation\"",
            "scale_max",
            "categories",
            "top_positive",
            "top_negative",
            "config",
        ];
        let positions: Vec<usize> = order
            .iter()
            .map(|key| json.find(key).unwrap_or_else(|| panic!("missing {key}")))
            .collect();
        assert!(positions.windows(2).all(|w| w[0] < w[1]), "{json}");
        // Absent optional fields leave no key behind.
        assert!(!json.contains("generated_at"));
    }

    #[test]
    fn missing_components_serialize_as_null() {
        let report = sample_report();
        let json = serde_json::to_string(&report).unwrap();
        assert!(json.contains("\"C\":null"), "{json}");
        assert!(json.contains("\"H\":1.0"), "{json}");
    }

    fn angles_of(svg: &str) -> Vec<f64> {
        svg.match_indices("data-angle=\"")
            .map(|(i, _)| {
                let rest = &svg[i + "data-angle=\"".len()..];
                let end = rest.find('"').unwrap();
                rest[..end].parse::<f64>().unwrap()
            })
            .collect()
    }

    #[test]
    fn pie_slices_cover_the_full_circle() {
        let svg = render_pie_svg(&shares([1, 0, 1, 1, 2])).unwrap();
        let angles = angles_of(&svg);
        assert_eq!(angles.len(), 4);
        let total: f64 = angles.iter().sum();
        assert!((total - 360.0).abs() <= 0.01, "angles sum to {total}");
    }

    #[test]
    fn three_way_split_renders_three_slices() {
        // 40/29/31 across very good / good / neutral.
        let svg = render_pie_svg(&shares([0, 0, 31, 29, 40])).unwrap();
        assert_eq!(svg.matches("<path").count(), 3);
        assert!(svg.contains("data-percent=\"40.00\""), "{svg}");
        assert!(svg.contains("data-percent=\"29.00\""), "{svg}");
        assert!(svg.contains("data-percent=\"31.00\""), "{svg}");
        let total: f64 = angles_of(&svg).iter().sum();
        assert!((total - 360.0).abs() <= 0.01);
    }

    #[test]
    fn single_category_becomes_a_full_circle() {
        let svg = render_pie_svg(&shares([0, 0, 0, 0, 7])).unwrap();
        assert_eq!(svg.matches("<path").count(), 0);
        assert!(svg.contains("<circle"), "{svg}");
        assert!(svg.contains("data-percent=\"100.00\""), "{svg}");
    }

    #[test]
    fn empty_distribution_cannot_be_charted() {
        let all_zero: Vec<CategoryShare> = crate::reputation::CATEGORY_LABELS
            .iter()
            .map(|label| CategoryShare {
                label: label.to_string(),
                count: 0,
                percent: 0.0,
            })
            .collect();
        assert!(matches!(render_pie_svg(&all_zero), Err(ReportError::NoData)));
    }

    #[test]
    fn text_summary_rounds_and_lists() {
        let report = sample_report();
        let text = render_text_summary(&report);
        assert!(text.contains("Reputation: 9.48 (scale 1-10)"), "{text}");
        assert!(text.contains("score=0.9988"), "{text}");
        assert!(text.contains("Top negative reviews:\n  (none)"), "{text}");
        assert!(text.contains("Harbor View"), "{text}");
    }

    #[test]
    fn zero_k_run_omits_the_top_sections() {
        let mut report = sample_report();
        report.top_positive.clear();
        report.top_negative.clear();
        let text = render_text_summary(&report);
        assert!(!text.contains("Top positive"), "{text}");
        assert!(!text.contains("Top negative"), "{text}");
    }

    #[test]
    fn malformed_report_files_are_reported_as_such() {
        let dir = tempdir().unwrap();
        let path = dir.path().join("broken.json");
        std::fs::write(&path, "{ not json").unwrap();
        assert!(matches!(
            load_structured(&path),
            Err(ReportError::InvalidJson { .. })
        ));
    }
}
