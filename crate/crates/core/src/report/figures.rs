//! Figure construction from an analysis output.
//!
//! Each figure is a pure function onto a [`Canvas`]; rendering to files
//! happens in the parent module. Figures degrade to a labeled empty frame
//! when their data is missing so the file set is always complete.

use super::canvas::{Anchor, Canvas, BLACK, BLUE, GRAY, RED};
use crate::pipeline::AnalysisOutput;
use crate::stats::{MovingAverageSeries, FOUR_FIFTHS};

pub const WIDTH: u32 = 840;
pub const HEIGHT: u32 = 520;

const MARGIN_LEFT: f64 = 80.0;
const MARGIN_RIGHT: f64 = 40.0;
const MARGIN_TOP: f64 = 50.0;
const MARGIN_BOTTOM: f64 = 60.0;

struct Frame {
    x0: f64,
    x1: f64,
    y0: f64,
    y1: f64,
}

fn frame() -> Frame {
    Frame {
        x0: MARGIN_LEFT,
        x1: WIDTH as f64 - MARGIN_RIGHT,
        y0: MARGIN_TOP,
        y1: HEIGHT as f64 - MARGIN_BOTTOM,
    }
}

/// Map `v` from [lo, hi] onto [a, b].
fn scale(v: f64, lo: f64, hi: f64, a: f64, b: f64) -> f64 {
    if hi == lo {
        return (a + b) / 2.0;
    }
    a + (v - lo) / (hi - lo) * (b - a)
}

fn titled_canvas(title: &str) -> Canvas {
    let mut canvas = Canvas::new(WIDTH, HEIGHT);
    canvas.text(WIDTH as f64 / 2.0, 16.0, title, BLACK, 2, Anchor::Middle);
    canvas
}

fn empty_note(canvas: &mut Canvas, note: &str) {
    canvas.text(
        WIDTH as f64 / 2.0,
        HEIGHT as f64 / 2.0,
        note,
        GRAY,
        2,
        Anchor::Middle,
    );
}

/// Bars of the average rank gap (male minus female) per industry.
pub fn rank_gap_figure(analysis: &AnalysisOutput) -> Canvas {
    let mut canvas = titled_canvas("AVERAGE RANK GAP (MALE - FEMALE)");
    let Some(headline) = &analysis.headline else {
        empty_note(&mut canvas, "NO FULL-TEXT DATA");
        return canvas;
    };
    let f = frame();
    let gaps: Vec<(String, f64)> = headline
        .per_industry
        .iter()
        .map(|c| (c.industry.clone(), c.mean_rank_male - c.mean_rank_female))
        .collect();
    let extent = gaps
        .iter()
        .map(|(_, g)| g.abs())
        .fold(0.25f64, f64::max)
        * 1.15;
    let zero = scale(0.0, -extent, extent, f.y1, f.y0);
    canvas.line(f.x0, zero, f.x1, zero, BLACK, false);
    canvas.text(f.x0 - 8.0, zero - 4.0, "0", BLACK, 1, Anchor::End);

    let n = gaps.len().max(1) as f64;
    let slot = (f.x1 - f.x0) / n;
    for (i, (industry, gap)) in gaps.iter().enumerate() {
        let cx = f.x0 + slot * (i as f64 + 0.5);
        let top = scale(*gap, -extent, extent, f.y1, f.y0);
        let (y, h) = if *gap >= 0.0 {
            (top, zero - top)
        } else {
            (zero, top - zero)
        };
        canvas.rect(cx - slot * 0.3, y, slot * 0.6, h, BLUE, true);
        canvas.text(cx, f.y1 + 10.0, industry, BLACK, 1, Anchor::Middle);
        canvas.text(
            cx,
            (y - 12.0).min(zero - 12.0).max(f.y0),
            &format!("{gap:.3}"),
            BLACK,
            1,
            Anchor::Middle,
        );
    }
    canvas
}

/// Preference-case histogram mirrored about zero: female-preferred counts
/// extend upward, male-preferred counts downward.
pub fn case_frequency_figure(analysis: &AnalysisOutput) -> Canvas {
    let mut canvas = titled_canvas("PREFERENCE CASES (F UP / M DOWN)");
    let Some(headline) = &analysis.headline else {
        empty_note(&mut canvas, "NO FULL-TEXT DATA");
        return canvas;
    };
    let f = frame();
    let count = |name: &str| {
        headline
            .case_frequencies
            .iter()
            .find(|c| c.case == name)
            .map(|c| c.count)
            .unwrap_or(0)
    };
    // Mirrored pairs, strongest preference first.
    let pairs = [
        ("MOST", count("most_biased_f"), count("most_biased_m")),
        ("CLEARLY", count("clearly_biased_f"), count("clearly_biased_m")),
        ("MILDLY", count("mildly_biased_f"), count("mildly_biased_m")),
    ];
    let ties = count("tie");
    let peak = pairs
        .iter()
        .flat_map(|&(_, up, down)| [up, down])
        .max()
        .unwrap_or(0)
        .max(1) as f64
        * 1.15;

    let zero = scale(0.0, -peak, peak, f.y1, f.y0);
    canvas.line(f.x0, zero, f.x1, zero, BLACK, false);
    canvas.text(f.x0 - 8.0, zero - 4.0, "0", BLACK, 1, Anchor::End);
    canvas.text(f.x0 - 8.0, f.y0, "F", BLUE, 2, Anchor::End);
    canvas.text(f.x0 - 8.0, f.y1 - 14.0, "M", RED, 2, Anchor::End);

    let slot = (f.x1 - f.x0) / pairs.len() as f64;
    for (i, (label, up, down)) in pairs.iter().enumerate() {
        let cx = f.x0 + slot * (i as f64 + 0.5);
        let top = scale(*up as f64, -peak, peak, f.y1, f.y0);
        canvas.rect(cx - slot * 0.25, top, slot * 0.5, zero - top, BLUE, true);
        let bottom = scale(-(*down as f64), -peak, peak, f.y1, f.y0);
        canvas.rect(cx - slot * 0.25, zero, slot * 0.5, bottom - zero, RED, true);
        canvas.text(cx, f.y1 + 10.0, label, BLACK, 1, Anchor::Middle);
        if *up > 0 {
            canvas.text(cx, top - 12.0, &up.to_string(), BLUE, 1, Anchor::Middle);
        }
        if *down > 0 {
            canvas.text(cx, bottom + 4.0, &down.to_string(), RED, 1, Anchor::Middle);
        }
    }
    canvas.text(
        f.x1,
        f.y0,
        &format!("TIES: {ties}"),
        GRAY,
        1,
        Anchor::End,
    );
    canvas
}

/// Impact ratios under both selection rules with the four-fifths rule line.
pub fn impact_ratio_figure(analysis: &AnalysisOutput) -> Canvas {
    let mut canvas = titled_canvas("IMPACT RATIO AND THE 0.8 RULE");
    let Some(headline) = &analysis.headline else {
        empty_note(&mut canvas, "NO FULL-TEXT DATA");
        return canvas;
    };
    let f = frame();
    let mut bars: Vec<(String, f64)> = Vec::new();
    if let Some(r) = &headline.impact_ras {
        bars.push(("RANK M".to_string(), r.impact_ratio_male));
        bars.push(("RANK F".to_string(), r.impact_ratio_female));
    }
    if let Some(r) = &headline.impact_score {
        bars.push(("SCORE M".to_string(), r.impact_ratio_male));
        bars.push(("SCORE F".to_string(), r.impact_ratio_female));
    }
    if bars.is_empty() {
        empty_note(&mut canvas, "NO IMPACT RATIOS");
        return canvas;
    }
    let top = 1.05f64;
    canvas.line(f.x0, f.y1, f.x1, f.y1, BLACK, false);
    canvas.line(f.x0, f.y1, f.x0, f.y0, BLACK, false);
    for tick in [0.0, 0.5, 1.0] {
        let y = scale(tick, 0.0, top, f.y1, f.y0);
        canvas.text(f.x0 - 8.0, y - 4.0, &format!("{tick:.1}"), BLACK, 1, Anchor::End);
    }

    let slot = (f.x1 - f.x0) / bars.len() as f64;
    for (i, (label, ratio)) in bars.iter().enumerate() {
        let cx = f.x0 + slot * (i as f64 + 0.5);
        let y = scale(*ratio, 0.0, top, f.y1, f.y0);
        let color = if *ratio < FOUR_FIFTHS { RED } else { BLUE };
        canvas.rect(cx - slot * 0.3, y, slot * 0.6, f.y1 - y, color, true);
        canvas.text(cx, f.y1 + 10.0, label, BLACK, 1, Anchor::Middle);
        canvas.text(cx, y - 12.0, &format!("{ratio:.3}"), BLACK, 1, Anchor::Middle);
    }

    // The four-fifths reference rule, dashed all the way across.
    let rule_y = scale(FOUR_FIFTHS, 0.0, top, f.y1, f.y0);
    canvas.line(f.x0, rule_y, f.x1, rule_y, BLACK, true);
    canvas.text(f.x1, rule_y - 12.0, "0.8", BLACK, 1, Anchor::End);
    canvas
}

/// Windowed mean gap against retained words, one curve.
pub fn moving_average_figure(
    series: Option<&MovingAverageSeries>,
    title: &str,
    gap_label: &str,
) -> Canvas {
    let mut canvas = titled_canvas(title);
    let Some(series) = series else {
        empty_note(&mut canvas, "NO SERIES");
        return canvas;
    };
    if series.points.is_empty() {
        empty_note(&mut canvas, "NO SERIES");
        return canvas;
    }
    let f = frame();
    let (mut x_lo, mut x_hi) = (f64::INFINITY, f64::NEG_INFINITY);
    let (mut y_lo, mut y_hi) = (f64::INFINITY, f64::NEG_INFINITY);
    for p in &series.points {
        x_lo = x_lo.min(p.mean_words);
        x_hi = x_hi.max(p.mean_words);
        y_lo = y_lo.min(p.mean_gap);
        y_hi = y_hi.max(p.mean_gap);
    }
    // Pad the value range so a flat series still sits mid-frame.
    let pad = ((y_hi - y_lo).abs() * 0.15).max(0.05);
    y_lo -= pad;
    y_hi += pad;

    canvas.line(f.x0, f.y1, f.x1, f.y1, BLACK, false);
    canvas.line(f.x0, f.y1, f.x0, f.y0, BLACK, false);
    if y_lo < 0.0 && y_hi > 0.0 {
        let zero = scale(0.0, y_lo, y_hi, f.y1, f.y0);
        canvas.line(f.x0, zero, f.x1, zero, GRAY, true);
    }
    canvas.text(f.x0 - 8.0, f.y0 - 4.0, &format!("{y_hi:.2}"), BLACK, 1, Anchor::End);
    canvas.text(f.x0 - 8.0, f.y1 - 4.0, &format!("{y_lo:.2}"), BLACK, 1, Anchor::End);
    canvas.text(f.x0, f.y1 + 10.0, &format!("{x_lo:.0}"), BLACK, 1, Anchor::Start);
    canvas.text(f.x1, f.y1 + 10.0, &format!("{x_hi:.0}"), BLACK, 1, Anchor::End);
    canvas.text(
        (f.x0 + f.x1) / 2.0,
        f.y1 + 24.0,
        "RETAINED WORDS",
        BLACK,
        1,
        Anchor::Middle,
    );
    canvas.text(f.x0 + 4.0, f.y0, gap_label, BLACK, 1, Anchor::Start);

    let points: Vec<(f64, f64)> = series
        .points
        .iter()
        .map(|p| {
            (
                scale(p.mean_words, x_lo, x_hi, f.x0, f.x1),
                scale(p.mean_gap, y_lo, y_hi, f.y1, f.y0),
            )
        })
        .collect();
    if points.len() == 1 {
        let (x, y) = points[0];
        canvas.rect(x - 2.0, y - 2.0, 4.0, 4.0, BLUE, true);
    } else {
        canvas.polyline(points, BLUE);
    }
    canvas
}

/// The full figure set, in output order with their base filenames.
pub fn build_figures(analysis: &AnalysisOutput) -> Vec<(String, Canvas)> {
    vec![
        ("rank_gap".to_string(), rank_gap_figure(analysis)),
        (
            "case_frequencies".to_string(),
            case_frequency_figure(analysis),
        ),
        ("impact_ratio".to_string(), impact_ratio_figure(analysis)),
        (
            "moving_average_rank".to_string(),
            moving_average_figure(
                analysis.moving_average_rank.as_ref(),
                "MOVING AVERAGE RANK GAP (MALE - FEMALE)",
                "RANK GAP",
            ),
        ),
        (
            "moving_average_score".to_string(),
            moving_average_figure(
                analysis.moving_average_score.as_ref(),
                "MOVING AVERAGE SCORE GAP (MALE - FEMALE)",
                "SCORE GAP",
            ),
        ),
    ]
}
