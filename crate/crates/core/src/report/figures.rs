use serde::{Deserialize, Serialize};

use super::histogram::{equal_width_edges, histogram, Bins, HistogramSpec};
use super::svg::{lerp_color, Anchor, Svg};
use crate::analysis::AnalysisBundle;
use crate::error::ReportError;
use crate::grading::{Arm, StudyResults};
use crate::stats::METRICS;

pub const HISTOGRAM_BINS: usize = 20;
pub const NEG_LOG10_CAP: f64 = 10.0;
/// Heatmap ramp endpoints, p = 1 to p ≤ 1e-10.
pub const RAMP_LOW: [u8; 3] = [0xf7, 0xfb, 0xff];
pub const RAMP_HIGH: [u8; 3] = [0x08, 0x30, 0x6b];

const ARM_COLORS: [(Arm, &str); 2] = [(Arm::Original, "#9e9e9e"), (Arm::Generated, "#2b8cbe")];
const SCORE_COLORS: [&str; 3] = ["#d7301f", "#fdbb84", "#31a354"];

fn arm_name(arm: Arm) -> &'static str {
    match arm {
        Arm::Original => "original",
        Arm::Generated => "generated",
    }
}

fn edge_label(x: f64) -> String {
    format!("{x:.1}")
}

/// Both arms of a metric share one set of edges spanning their union.
pub fn histogram_specs(bundle: &AnalysisBundle, bins: usize) -> Result<Vec<HistogramSpec>, ReportError> {
    let mut specs = Vec::new();
    for metric in METRICS {
        let o = bundle.scores.original.by_metric(metric);
        let g = bundle.scores.generated.by_metric(metric);
        let all = || o.iter().chain(g).copied();
        if o.is_empty() || g.is_empty() {
            return Err(ReportError::EmptyHistogram);
        }
        let lo = all().fold(f64::INFINITY, f64::min);
        let hi = all().fold(f64::NEG_INFINITY, f64::max);
        let edges = equal_width_edges(lo, hi, bins)?;
        for (arm, values) in [(Arm::Original, o), (Arm::Generated, g)] {
            let h = histogram(values, Bins::Edges(edges.clone()))?;
            specs.push(HistogramSpec { metric: metric.to_string(), arm, bin_edges: h.edges, counts: h.counts });
        }
    }
    Ok(specs)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HistogramRow {
    pub metric: String,
    pub arm: Arm,
    pub bin: usize,
    pub lower: f64,
    pub upper: f64,
    pub count: usize,
    pub lower_label: String,
    pub upper_label: String,
}

pub fn histogram_rows(specs: &[HistogramSpec]) -> Vec<HistogramRow> {
    specs
        .iter()
        .flat_map(|s| {
            s.counts.iter().enumerate().map(move |(bin, &count)| HistogramRow {
                metric: s.metric.clone(),
                arm: s.arm,
                bin,
                lower: s.bin_edges[bin],
                upper: s.bin_edges[bin + 1],
                count,
                lower_label: edge_label(s.bin_edges[bin]),
                upper_label: edge_label(s.bin_edges[bin + 1]),
            })
        })
        .collect()
}

pub fn render_histograms(rows: &[HistogramRow]) -> String {
    let metrics = ordered(rows.iter().map(|r| r.metric.as_str()));
    let (panel_w, panel_h, margin) = (640.0, 180.0, 50.0);
    let mut svg = Svg::new(panel_w + 2.0 * margin, 50.0 + metrics.len() as f64 * (panel_h + 60.0));
    svg.text(margin, 24.0, 16.0, Anchor::Start, "#000000", "Readability score distributions");
    for (i, (arm, color)) in ARM_COLORS.iter().enumerate() {
        let x = margin + 380.0 + i as f64 * 130.0;
        svg.rect(x, 12.0, 12.0, 12.0, color);
        svg.text(x + 16.0, 22.0, 11.0, Anchor::Start, "#000000", arm_name(*arm));
    }
    for (p, metric) in metrics.iter().enumerate() {
        let top = 50.0 + p as f64 * (panel_h + 60.0);
        let panel: Vec<&HistogramRow> = rows.iter().filter(|r| r.metric == *metric).collect();
        let n_bins = panel.iter().map(|r| r.bin + 1).max().unwrap_or(1);
        let max_count = panel.iter().map(|r| r.count).max().unwrap_or(0);
        let bin_w = panel_w / n_bins as f64;
        svg.text(margin, top + 12.0, 13.0, Anchor::Start, "#000000", metric);
        svg.outline(margin, top + 20.0, panel_w, panel_h);
        for (a, (arm, color)) in ARM_COLORS.iter().enumerate() {
            for r in panel.iter().filter(|r| r.arm == *arm) {
                let h = if max_count == 0 { 0.0 } else { panel_h * r.count as f64 / max_count as f64 };
                let x = margin + r.bin as f64 * bin_w + a as f64 * bin_w / 2.0;
                svg.rect(x + 1.0, top + 20.0 + panel_h - h, bin_w / 2.0 - 2.0, h, color);
            }
        }
        if let Some(first) = panel.iter().find(|r| r.bin == 0) {
            svg.text(margin, top + panel_h + 34.0, 10.0, Anchor::Start, "#000000", &first.lower_label);
        }
        if let Some(last) = panel.iter().find(|r| r.bin + 1 == n_bins) {
            svg.text(margin + panel_w, top + panel_h + 34.0, 10.0, Anchor::End, "#000000", &last.upper_label);
        }
        svg.text(margin - 4.0, top + 30.0, 10.0, Anchor::End, "#000000", &max_count.to_string());
    }
    svg.finish()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PValueRow {
    pub metric: String,
    pub test: String,
    pub p_value: f64,
    pub p_label: String,
    pub neg_log10: f64,
    pub color: String,
}

pub fn p_label(p: f64) -> String {
    if p >= 0.001 {
        format!("{p:.3}")
    } else {
        format!("{p:.2e}")
    }
}

/// −log10(p), clamped to `[0, NEG_LOG10_CAP]`; p = 0 maps to the cap.
pub fn neg_log10(p: f64) -> f64 {
    if p <= 0.0 {
        NEG_LOG10_CAP
    } else {
        (-p.log10()).clamp(0.0, NEG_LOG10_CAP)
    }
}

pub fn pvalue_rows(bundle: &AnalysisBundle) -> Vec<PValueRow> {
    let m = &bundle.pvalue_matrix;
    let mut rows = Vec::with_capacity(m.rows.len() * m.columns.len());
    for (metric, cells) in m.rows.iter().zip(&m.cells) {
        for (test, cell) in m.columns.iter().zip(cells) {
            let nl = neg_log10(cell.p_value);
            rows.push(PValueRow {
                metric: metric.clone(),
                test: test.clone(),
                p_value: cell.p_value,
                p_label: p_label(cell.p_value),
                neg_log10: nl,
                color: lerp_color(RAMP_LOW, RAMP_HIGH, nl / NEG_LOG10_CAP),
            });
        }
    }
    rows
}

fn ordered<'a>(items: impl Iterator<Item = &'a str>) -> Vec<&'a str> {
    let mut out: Vec<&str> = Vec::new();
    for s in items {
        if !out.contains(&s) {
            out.push(s);
        }
    }
    out
}

pub fn render_pvalues(rows: &[PValueRow]) -> String {
    let metrics = ordered(rows.iter().map(|r| r.metric.as_str()));
    let tests = ordered(rows.iter().map(|r| r.test.as_str()));
    let (cell_w, cell_h, left, top) = (130.0, 60.0, 70.0, 70.0);
    let mut svg = Svg::new(left + tests.len() as f64 * cell_w + 20.0, top + metrics.len() as f64 * cell_h + 20.0);
    svg.text(left, 24.0, 16.0, Anchor::Start, "#000000", "P-values by metric and test");
    for (c, t) in tests.iter().enumerate() {
        svg.text(left + (c as f64 + 0.5) * cell_w, top - 10.0, 12.0, Anchor::Middle, "#000000", t);
    }
    for (r, m) in metrics.iter().enumerate() {
        let y = top + r as f64 * cell_h;
        svg.text(left - 8.0, y + cell_h / 2.0 + 4.0, 12.0, Anchor::End, "#000000", m);
        for (c, t) in tests.iter().enumerate() {
            let Some(row) = rows.iter().find(|x| x.metric == *m && x.test == *t) else { continue };
            let x = left + c as f64 * cell_w;
            svg.rect(x, y, cell_w, cell_h, &row.color);
            let ink = if row.neg_log10 > NEG_LOG10_CAP / 2.0 { "#ffffff" } else { "#000000" };
            svg.text(x + cell_w / 2.0, y + cell_h / 2.0 + 4.0, 12.0, Anchor::Middle, ink, &row.p_label);
        }
    }
    svg.finish()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Segment {
    pub arm: Arm,
    pub score: u8,
    pub label: String,
    pub count: usize,
    pub proportion: f64,
    pub percent_label: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PairAgreement {
    pub pair: String,
    /// Percentage in [0, 100].
    pub percent: Option<f64>,
    pub percent_label: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReliabilityFigure {
    pub study_id: String,
    pub graders: Vec<String>,
    pub n_items: usize,
    pub segments: Vec<Segment>,
    pub agreement: Vec<PairAgreement>,
}

fn percent_label(fraction: Option<f64>) -> String {
    fraction.map_or_else(|| "n/a".to_string(), |f| format!("{:.1}%", 100.0 * f))
}

fn pairs(graders: &[String]) -> impl Iterator<Item = (usize, usize)> + '_ {
    (0..graders.len()).flat_map(move |i| (i + 1..graders.len()).map(move |j| (i, j)))
}

pub fn reliability_figure(results: &StudyResults) -> ReliabilityFigure {
    let segments = results
        .arm_distributions
        .iter()
        .flat_map(|d| {
            (0..3).map(move |s| Segment {
                arm: d.arm,
                score: s as u8,
                label: results.rubric.label(s as u8).to_string(),
                count: d.counts[s],
                proportion: d.proportions[s],
                percent_label: percent_label(Some(d.proportions[s])),
            })
        })
        .collect();
    let agreement = pairs(&results.graders)
        .map(|(i, j)| {
            let f = results.percent_agreement[i][j];
            PairAgreement {
                pair: format!("{}-{}", results.graders[i], results.graders[j]),
                percent: f.map(|f| 100.0 * f),
                percent_label: percent_label(f),
            }
        })
        .collect();
    ReliabilityFigure {
        study_id: results.study_id.clone(),
        graders: results.graders.clone(),
        n_items: results.n_items,
        segments,
        agreement,
    }
}

pub fn render_reliability(fig: &ReliabilityFigure) -> String {
    let (bar_w, bar_h, left) = (560.0, 40.0, 40.0);
    let arms = ordered(fig.segments.iter().map(|s| arm_name(s.arm)));
    let bars_top = 90.0;
    let agree_top = bars_top + arms.len() as f64 * (bar_h + 40.0) + 40.0;
    let height = agree_top + fig.agreement.len() as f64 * 28.0 + 30.0;
    let mut svg = Svg::new(bar_w + 2.0 * left + 80.0, height);
    svg.text(left, 24.0, 16.0, Anchor::Start, "#000000", "Reliability of generated summaries");
    let mut seen = Vec::new();
    for s in &fig.segments {
        if !seen.contains(&s.score) {
            let x = left + seen.len() as f64 * 170.0;
            svg.rect(x, 40.0, 12.0, 12.0, SCORE_COLORS[s.score as usize % 3]);
            svg.text(x + 16.0, 50.0, 11.0, Anchor::Start, "#000000", &s.label);
            seen.push(s.score);
        }
    }
    for (a, arm) in arms.iter().enumerate() {
        let y = bars_top + a as f64 * (bar_h + 40.0);
        svg.text(left, y - 6.0, 12.0, Anchor::Start, "#000000", arm);
        let mut x = left;
        for s in fig.segments.iter().filter(|s| arm_name(s.arm) == *arm) {
            let w = bar_w * s.proportion;
            svg.rect(x, y, w, bar_h, SCORE_COLORS[s.score as usize % 3]);
            if s.count > 0 {
                svg.text(x + w / 2.0, y + bar_h + 14.0, 10.0, Anchor::Middle, "#000000", &s.percent_label);
            }
            x += w;
        }
        svg.outline(left, y, bar_w, bar_h);
    }
    if !fig.agreement.is_empty() {
        svg.text(left, agree_top - 12.0, 13.0, Anchor::Start, "#000000", "Percent agreement between graders");
    }
    for (k, p) in fig.agreement.iter().enumerate() {
        let y = agree_top + k as f64 * 28.0;
        svg.text(left + 60.0, y + 14.0, 11.0, Anchor::End, "#000000", &p.pair);
        let w = (bar_w - 80.0) * p.percent.unwrap_or(0.0) / 100.0;
        svg.rect(left + 70.0, y, w, 20.0, "#6baed6");
        svg.text(left + 76.0 + w, y + 14.0, 11.0, Anchor::Start, "#000000", &p.percent_label);
    }
    svg.finish()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GraderBar {
    pub grader: String,
    pub arm: Arm,
    pub label: String,
    pub counts: [usize; 3],
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GridLine {
    pub item_id: String,
    pub arm: Arm,
    pub scores: Vec<Option<u8>>,
    pub mean: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct KappaCell {
    pub row: String,
    pub col: String,
    pub value: Option<f64>,
    pub label: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct UnderstandabilityFigure {
    pub study_id: String,
    pub graders: Vec<String>,
    pub labels: Vec<String>,
    pub grader_bars: Vec<GraderBar>,
    /// Original arm first, then ascending mean.
    pub grid: Vec<GridLine>,
    pub kappa: Vec<KappaCell>,
    pub mann_whitney_p: Option<f64>,
    pub mann_whitney_label: String,
}

pub fn understandability_figure(results: &StudyResults) -> UnderstandabilityFigure {
    let kappa = (0..results.graders.len())
        .flat_map(|i| (0..results.graders.len()).map(move |j| (i, j)))
        .map(|(i, j)| {
            let value = results.kappa[i][j];
            KappaCell {
                row: results.graders[i].clone(),
                col: results.graders[j].clone(),
                value,
                label: value.map_or_else(|| "n/a".to_string(), |k| format!("{k:.2}")),
            }
        })
        .collect();
    let mw = results.mann_whitney.as_ref().map(|t| t.p_value);
    UnderstandabilityFigure {
        study_id: results.study_id.clone(),
        graders: results.graders.clone(),
        labels: results.rubric.labels.iter().map(|l| l.label.clone()).collect(),
        grader_bars: results
            .grader_distributions
            .iter()
            .map(|d| GraderBar {
                grader: d.grader.clone(),
                arm: d.arm,
                label: format!("{} {}", d.grader, arm_name(d.arm)),
                counts: d.counts,
            })
            .collect(),
        grid: results
            .grid
            .iter()
            .map(|r| GridLine { item_id: r.item_id.clone(), arm: r.arm, scores: r.scores.clone(), mean: r.mean })
            .collect(),
        kappa,
        mann_whitney_p: mw,
        mann_whitney_label: mw.map_or_else(|| "Mann-Whitney U: n/a".to_string(), |p| format!("Mann-Whitney U p = {}", p_label(p))),
    }
}

pub fn render_understandability(fig: &UnderstandabilityFigure) -> String {
    let k = fig.graders.len();
    let left = 40.0;
    let bar_unit = 300.0;
    let bars_top = 90.0;
    let grid_top = bars_top + fig.grader_bars.len() as f64 * 30.0 + 50.0;
    let cell = 18.0;
    let row_h = if fig.grid.len() > 60 { 4.0 } else { 8.0 };
    let kappa_left = left + k as f64 * cell + 120.0;
    let height = (grid_top + fig.grid.len() as f64 * row_h).max(grid_top + k as f64 * 40.0 + 40.0) + 40.0;
    let mut svg = Svg::new((kappa_left + k as f64 * 60.0 + 60.0).max(left + bar_unit + 240.0), height);
    svg.text(left, 24.0, 16.0, Anchor::Start, "#000000", "Understandability by grader");
    for (s, label) in fig.labels.iter().enumerate() {
        let x = left + s as f64 * 190.0;
        svg.rect(x, 40.0, 12.0, 12.0, SCORE_COLORS[s % 3]);
        svg.text(x + 16.0, 50.0, 11.0, Anchor::Start, "#000000", label);
    }
    svg.text(left, 74.0, 12.0, Anchor::Start, "#000000", &fig.mann_whitney_label);

    for (b, bar) in fig.grader_bars.iter().enumerate() {
        let y = bars_top + b as f64 * 30.0;
        svg.text(left + 110.0, y + 14.0, 11.0, Anchor::End, "#000000", &bar.label);
        let total: usize = bar.counts.iter().sum();
        let mut x = left + 120.0;
        for (s, &c) in bar.counts.iter().enumerate() {
            let w = if total == 0 { 0.0 } else { bar_unit * c as f64 / total as f64 };
            svg.rect(x, y, w, 20.0, SCORE_COLORS[s]);
            if c > 0 {
                svg.text(x + w / 2.0, y + 14.0, 10.0, Anchor::Middle, "#000000", &c.to_string());
            }
            x += w;
        }
    }

    svg.text(left, grid_top - 24.0, 13.0, Anchor::Start, "#000000", "Scores per item");
    for (g, name) in fig.graders.iter().enumerate() {
        svg.text(left + (g as f64 + 0.5) * cell, grid_top - 6.0, 10.0, Anchor::Middle, "#000000", name);
    }
    for (r, line) in fig.grid.iter().enumerate() {
        let y = grid_top + r as f64 * row_h;
        for (g, s) in line.scores.iter().enumerate() {
            let fill = s.map_or("#eeeeee", |s| SCORE_COLORS[s as usize % 3]);
            svg.rect(left + g as f64 * cell, y, cell - 1.0, row_h, fill);
        }
        if r == 0 || fig.grid[r - 1].arm != line.arm {
            svg.text(left + k as f64 * cell + 6.0, y + 9.0, 10.0, Anchor::Start, "#000000", arm_name(line.arm));
        }
    }

    svg.text(kappa_left, grid_top - 24.0, 13.0, Anchor::Start, "#000000", "Cohen's kappa");
    for (g, name) in fig.graders.iter().enumerate() {
        svg.text(kappa_left + 40.0 + (g as f64 + 0.5) * 50.0, grid_top - 6.0, 10.0, Anchor::Middle, "#000000", name);
        svg.text(kappa_left + 34.0, grid_top + g as f64 * 40.0 + 24.0, 10.0, Anchor::End, "#000000", name);
    }
    for (n, c) in fig.kappa.iter().enumerate() {
        let (i, j) = (n / k.max(1), n % k.max(1));
        let (x, y) = (kappa_left + 40.0 + j as f64 * 50.0, grid_top + i as f64 * 40.0);
        let fill = c.value.map_or("#eeeeee".to_string(), |v| lerp_color(RAMP_LOW, RAMP_HIGH, v.max(0.0)));
        svg.rect(x, y, 49.0, 39.0, &fill);
        let ink = if c.value.is_some_and(|v| v > 0.5) { "#ffffff" } else { "#000000" };
        svg.text(x + 25.0, y + 24.0, 11.0, Anchor::Middle, ink, &c.label);
    }
    svg.finish()
}
