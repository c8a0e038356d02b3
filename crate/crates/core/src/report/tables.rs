//! CSV table builders.
//!
//! Human-readable tables: five decimal places, a trailing star on p-values
//! significant at the corrected level, industry-regression p-values in
//! brackets under their coefficients. Full-precision values live in the
//! summary JSON, which is the machine-readable source of truth; these files
//! are for reading.

use crate::pipeline::AnalysisOutput;
use crate::stats::TestResult;

/// The fixed table set; every name is always emitted, empty ones as a
/// header-only file.
pub const TABLE_NAMES: [&str; 6] = [
    "levels_spread",
    "scores_levels_spread",
    "fixed_effects",
    "industry_effects",
    "impact_ratios",
    "case_frequencies",
];

#[derive(Debug, Clone, PartialEq)]
pub struct NamedTable {
    pub name: String,
    pub csv: String,
}

fn five(v: f64) -> String {
    format!("{v:.5}")
}

/// p-value cell: five decimals, starred when significant.
fn p_cell(test: &TestResult) -> String {
    if test.significant {
        format!("{}*", five(test.p_value))
    } else {
        five(test.p_value)
    }
}

fn p_cell_opt(test: &Option<TestResult>) -> String {
    test.as_ref().map(p_cell).unwrap_or_default()
}

/// Bracketed p-value cell for coefficient tables.
fn bracket_p(p: f64, significant: bool) -> String {
    if significant {
        format!("({})*", five(p))
    } else {
        format!("({})", five(p))
    }
}

fn to_csv(header: &[&str], rows: &[Vec<String>]) -> String {
    let mut writer = csv::WriterBuilder::new().from_writer(Vec::new());
    writer
        .write_record(header)
        .expect("writing to memory cannot fail");
    for row in rows {
        writer.write_record(row).expect("writing to memory cannot fail");
    }
    String::from_utf8(writer.into_inner().expect("flushed")).expect("csv output is utf-8")
}

pub fn build_tables(analysis: &AnalysisOutput) -> Vec<NamedTable> {
    vec![
        levels_spread(analysis),
        scores_levels_spread(analysis),
        fixed_effects(analysis),
        industry_effects(analysis),
        impact_ratios(analysis),
        case_frequencies(analysis),
    ]
}

/// Average rank per arm and industry with location/dispersion p-values.
fn levels_spread(analysis: &AnalysisOutput) -> NamedTable {
    let header = [
        "model",
        "industry",
        "avg_rank_neutral",
        "avg_rank_male",
        "avg_rank_female",
        "p_level",
        "p_spread",
    ];
    let mut rows = Vec::new();
    if let Some(headline) = &analysis.headline {
        for cell in &headline.per_industry {
            rows.push(vec![
                analysis.model_id.clone(),
                cell.industry.clone(),
                five(cell.mean_rank_neutral),
                five(cell.mean_rank_male),
                five(cell.mean_rank_female),
                p_cell_opt(&cell.rank_level),
                p_cell_opt(&cell.rank_spread),
            ]);
        }
    }
    NamedTable {
        name: "levels_spread".to_string(),
        csv: to_csv(&header, &rows),
    }
}

/// The same layout over raw scores; the level test is the paired t-test.
fn scores_levels_spread(analysis: &AnalysisOutput) -> NamedTable {
    let header = [
        "model",
        "industry",
        "avg_score_neutral",
        "avg_score_male",
        "avg_score_female",
        "p_level",
        "p_spread",
    ];
    let mut rows = Vec::new();
    if let Some(headline) = &analysis.headline {
        for cell in &headline.per_industry {
            rows.push(vec![
                analysis.model_id.clone(),
                cell.industry.clone(),
                five(cell.mean_score_neutral),
                five(cell.mean_score_male),
                five(cell.mean_score_female),
                p_cell_opt(&cell.score_level),
                p_cell_opt(&cell.score_spread),
            ]);
        }
    }
    NamedTable {
        name: "scores_levels_spread".to_string(),
        csv: to_csv(&header, &rows),
    }
}

/// Panel decomposition: mean fixed effect and the retained-length slope.
fn fixed_effects(analysis: &AnalysisOutput) -> NamedTable {
    let header = ["model", "alpha", "beta", "p_beta"];
    let mut rows = Vec::new();
    if let Some(fit) = &analysis.fixed_effects {
        let starred = fit.p_value_beta < analysis.corrected_alpha;
        let p = if starred {
            format!("{}*", five(fit.p_value_beta))
        } else {
            five(fit.p_value_beta)
        };
        rows.push(vec![
            analysis.model_id.clone(),
            five(fit.alpha_mean),
            five(fit.beta),
            p,
        ]);
    }
    NamedTable {
        name: "fixed_effects".to_string(),
        csv: to_csv(&header, &rows),
    }
}

/// Sector-baseline regression, p-values bracketed beneath each coefficient
/// in the same cell.
fn industry_effects(analysis: &AnalysisOutput) -> NamedTable {
    let header = ["model", "gamma0", "gamma1", "gamma2"];
    let mut rows = Vec::new();
    if let Some(fit) = analysis.headline.as_ref().and_then(|h| h.industry_fit.as_ref()) {
        let cell = |coef: f64, p: f64| {
            format!(
                "{} {}",
                five(coef),
                bracket_p(p, p < analysis.corrected_alpha)
            )
        };
        rows.push(vec![
            analysis.model_id.clone(),
            cell(fit.gamma0, fit.p_gamma0),
            cell(fit.gamma1, fit.p_gamma1),
            cell(fit.gamma2, fit.p_gamma2),
        ]);
    }
    NamedTable {
        name: "industry_effects".to_string(),
        csv: to_csv(&header, &rows),
    }
}

/// Selection ratios under both selection rules, with the four-fifths
/// verdicts.
fn impact_ratios(analysis: &AnalysisOutput) -> NamedTable {
    let header = [
        "model",
        "method",
        "selected_male",
        "selected_female",
        "impact_ratio_male",
        "impact_ratio_female",
        "passes_four_fifths_male",
        "passes_four_fifths_female",
    ];
    let mut rows = Vec::new();
    if let Some(headline) = &analysis.headline {
        for (method, result) in [
            ("rank", &headline.impact_ras),
            ("score_mean_cutoff", &headline.impact_score),
        ] {
            if let Some(r) = result {
                rows.push(vec![
                    analysis.model_id.clone(),
                    method.to_string(),
                    r.selection_count_male.to_string(),
                    r.selection_count_female.to_string(),
                    five(r.impact_ratio_male),
                    five(r.impact_ratio_female),
                    r.passes_four_fifths_male.to_string(),
                    r.passes_four_fifths_female.to_string(),
                ]);
            }
        }
    }
    NamedTable {
        name: "impact_ratios".to_string(),
        csv: to_csv(&header, &rows),
    }
}

/// Histogram of preference-strength cases at the full proportion.
fn case_frequencies(analysis: &AnalysisOutput) -> NamedTable {
    let header = ["model", "case", "favored", "count"];
    let mut rows = Vec::new();
    if let Some(headline) = &analysis.headline {
        for case in &headline.case_frequencies {
            rows.push(vec![
                analysis.model_id.clone(),
                case.case.clone(),
                case.favored.clone(),
                case.count.to_string(),
            ]);
        }
    }
    NamedTable {
        name: "case_frequencies".to_string(),
        csv: to_csv(&header, &rows),
    }
}
