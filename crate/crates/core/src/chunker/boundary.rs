//! Offline structural splitter: blank lines, section headers, and bullet
//! items delimit elements. Line-based and fully deterministic, so it needs no
//! external service and never fails.

use crate::corpus::Resume;

use super::{BackendKind, ChunkSet};

const BULLET_PREFIXES: &[&str] = &["- ", "* ", "• ", "– "];

fn is_bullet(trimmed: &str) -> bool {
    BULLET_PREFIXES.iter().any(|p| trimmed.starts_with(p)) || trimmed == "-" || trimmed == "*"
}

/// A short standalone label line: either "Something:" or an all-caps run like
/// "EDUCATION". Checked after the bullet test so "- NOTE:" stays a bullet.
fn is_header(trimmed: &str) -> bool {
    if trimmed.is_empty() || trimmed.len() > 80 {
        return false;
    }
    if trimmed.ends_with(':') {
        return true;
    }
    let has_alpha = trimmed.chars().any(|c| c.is_alphabetic());
    let has_lower = trimmed.chars().any(|c| c.is_lowercase());
    has_alpha && !has_lower
}

/// Splits on blank lines, then starts a fresh element at each bullet or
/// header line; continuation lines attach to the element they follow. Every
/// non-blank line of the source appears in exactly one element, right-trimmed
/// and in order.
pub fn chunk_boundary(resume: &Resume) -> ChunkSet {
    let mut elements: Vec<String> = Vec::new();
    let mut current: Vec<&str> = Vec::new();
    let flush = |current: &mut Vec<&str>, elements: &mut Vec<String>| {
        if !current.is_empty() {
            elements.push(current.join("\n"));
            current.clear();
        }
    };
    for raw_line in resume.text.lines() {
        let line = raw_line.trim_end();
        let trimmed = line.trim_start();
        if trimmed.is_empty() {
            flush(&mut current, &mut elements);
            continue;
        }
        if is_bullet(trimmed) || is_header(trimmed) {
            flush(&mut current, &mut elements);
        }
        current.push(line);
    }
    flush(&mut current, &mut elements);
    ChunkSet {
        resume_id: resume.id.clone(),
        elements,
        backend: BackendKind::Boundary,
    }
}
