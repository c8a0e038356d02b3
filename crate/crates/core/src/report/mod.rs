//! Report stage: CSV tables, figures, and the machine-readable summary.
//!
//! The report reads a finished analysis and lays it out for people. Tables
//! round to five decimals and star significant tests; `summary.json` keeps
//! the same numbers at full precision and is the file downstream tooling
//! should trust. Figures are rendered twice, raster and vector, from one
//! shared draw list so the two always agree.

mod canvas;
mod figures;
mod tables;

pub use canvas::{text_width, Anchor, Canvas, Color, DrawOp, BLACK, BLUE, GRAY, RED, WHITE};
pub use figures::build_figures;
pub use tables::{build_tables, NamedTable, TABLE_NAMES};

use std::fs;
use std::path::{Path, PathBuf};

use serde::Serialize;

use crate::config::RunConfig;
use crate::pipeline::{self, AnalysisOutput, PipelineError};

pub const SUMMARY_FILE: &str = "summary.json";

/// Files written for one run's report, all paths absolute.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ReportOutput {
    pub run_id: String,
    pub dir: PathBuf,
    pub tables: Vec<PathBuf>,
    pub figures: Vec<PathBuf>,
    pub summary: PathBuf,
}

fn write_bytes(path: &Path, bytes: &[u8]) -> Result<(), PipelineError> {
    if let Some(parent) = path.parent() {
        fs::create_dir_all(parent).map_err(|source| PipelineError::Io {
            path: parent.to_path_buf(),
            source,
        })?;
    }
    fs::write(path, bytes).map_err(|source| PipelineError::Io {
        path: path.to_path_buf(),
        source,
    })
}

/// Lay a finished analysis out under `dir`: `tables/<name>.csv`,
/// `figures/<name>.png` and `.svg`, and `summary.json`. Every file is a pure
/// function of the analysis, so writing twice produces identical bytes.
pub fn write_report(analysis: &AnalysisOutput, dir: &Path) -> Result<ReportOutput, PipelineError> {
    let mut output = ReportOutput {
        run_id: analysis.run_id.clone(),
        dir: dir.to_path_buf(),
        tables: Vec::new(),
        figures: Vec::new(),
        summary: dir.join(SUMMARY_FILE),
    };
    for table in build_tables(analysis) {
        let path = dir.join("tables").join(format!("{}.csv", table.name));
        write_bytes(&path, table.csv.as_bytes())?;
        output.tables.push(path);
    }
    for (name, canvas) in build_figures(analysis) {
        let png = dir.join("figures").join(format!("{name}.png"));
        write_bytes(&png, &canvas.to_png())?;
        output.figures.push(png);
        let svg = dir.join("figures").join(format!("{name}.svg"));
        write_bytes(&svg, canvas.to_svg().as_bytes())?;
        output.figures.push(svg);
    }
    pipeline::write_json(&output.summary, analysis)?;
    Ok(output)
}

/// Load the stored analysis for `run_id` and write its report under the
/// configured reports directory.
pub fn stage_report(config: &RunConfig, run_id: &str) -> Result<ReportOutput, PipelineError> {
    config.validate()?;
    let analysis = pipeline::load_analysis(config, run_id)?;
    write_report(&analysis, &pipeline::reports_dir(config, run_id))
}
