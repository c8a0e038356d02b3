//! Within-resume fixed-effects regression of rank gaps on log retained
//! words, with standard errors that are robust to arbitrary correlation
//! inside each resume's observations.
//!
//! The model is `gap = alpha_resume + beta * ln(retained_words) + error`,
//! estimated by demeaning both sides within each resume so the per-resume
//! intercepts drop out. A trend in `beta` means the gap moves as resumes are
//! truncated, which separates information-driven scoring changes from a
//! fixed preference.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use super::{degenerate_t, two_sided_t_p, StatsError};

/// One scored observation in the panel: a resume at one truncation level.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PanelRow {
    pub resume_id: String,
    pub proportion: f64,
    /// Rank gap for this resume at this truncation level.
    pub gap: f64,
    pub retained_words: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FixedEffectsFit {
    /// Slope on ln(retained words).
    pub beta: f64,
    /// Cluster-robust standard error of the slope, clustered by resume.
    pub se_beta_cluster: f64,
    /// Two-sided p-value for the slope, using G - 1 degrees of freedom
    /// where G is the number of clusters.
    pub p_value_beta: f64,
    /// Recovered per-resume intercepts.
    pub alpha_by_resume: BTreeMap<String, f64>,
    /// Unweighted mean of the per-resume intercepts.
    pub alpha_mean: f64,
    pub n_obs: usize,
    pub n_clusters: usize,
    /// Resumes excluded for having a single usable observation.
    pub dropped_resumes: Vec<String>,
}

/// Slope parameters estimated beyond the absorbed intercepts.
const K_SLOPES: usize = 1;

pub fn fit_fixed_effects(rows: &[PanelRow]) -> Result<FixedEffectsFit, StatsError> {
    if rows.is_empty() {
        return Err(StatsError::EmptyInput);
    }
    for row in rows {
        if row.retained_words == 0 {
            return Err(StatsError::InvalidWordCount {
                resume_id: row.resume_id.clone(),
            });
        }
    }

    let mut groups: BTreeMap<&str, Vec<(f64, f64)>> = BTreeMap::new();
    for row in rows {
        let x = (row.retained_words as f64).ln();
        groups
            .entry(row.resume_id.as_str())
            .or_default()
            .push((x, row.gap));
    }

    let mut dropped_resumes = Vec::new();
    groups.retain(|id, obs| {
        let keep = obs.len() >= 2;
        if !keep {
            dropped_resumes.push((*id).to_string());
        }
        keep
    });
    if groups.is_empty() {
        return Err(StatsError::AllSingleObservation);
    }

    // Within transformation: subtract each resume's own means.
    let mut means: BTreeMap<&str, (f64, f64)> = BTreeMap::new();
    let mut sxx = 0.0;
    let mut sxd = 0.0;
    let mut n_obs = 0usize;
    for (id, obs) in &groups {
        let len = obs.len() as f64;
        let x_bar = obs.iter().map(|(x, _)| x).sum::<f64>() / len;
        let d_bar = obs.iter().map(|(_, d)| d).sum::<f64>() / len;
        means.insert(*id, (x_bar, d_bar));
        for &(x, d) in obs {
            sxx += (x - x_bar) * (x - x_bar);
            sxd += (x - x_bar) * (d - d_bar);
        }
        n_obs += obs.len();
    }
    if sxx <= 1e-12 {
        return Err(StatsError::ZeroWithinVariance);
    }
    let beta = sxd / sxx;

    let n_clusters = groups.len();
    if n_clusters < 2 {
        return Err(StatsError::TooFewObservations {
            have: n_clusters,
            need: 2,
        });
    }

    let mut alpha_by_resume = BTreeMap::new();
    for (id, &(x_bar, d_bar)) in &means {
        alpha_by_resume.insert((*id).to_string(), d_bar - beta * x_bar);
    }
    let alpha_mean = alpha_by_resume.values().sum::<f64>() / n_clusters as f64;

    // Sandwich variance with per-cluster score sums. The finite-sample
    // factor counts only the explicit slope; the absorbed intercepts are
    // not charged against the degrees of freedom.
    let g = n_clusters as f64;
    let n = n_obs as f64;
    let correction = (g / (g - 1.0)) * ((n - 1.0) / (n - K_SLOPES as f64));
    let mut meat = 0.0;
    for (id, obs) in &groups {
        let (x_bar, d_bar) = means[*id];
        let mut cluster_score = 0.0;
        for &(x, d) in obs {
            let x_c = x - x_bar;
            let residual = (d - d_bar) - beta * x_c;
            cluster_score += x_c * residual;
        }
        meat += cluster_score * cluster_score;
    }
    let variance = correction * meat / (sxx * sxx);
    let se_beta_cluster = variance.sqrt();

    let p_value_beta = if se_beta_cluster == 0.0 {
        degenerate_t(beta).1
    } else {
        two_sided_t_p(beta / se_beta_cluster, g - 1.0)
    };

    Ok(FixedEffectsFit {
        beta,
        se_beta_cluster,
        p_value_beta,
        alpha_by_resume,
        alpha_mean,
        n_obs,
        n_clusters,
        dropped_resumes,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use nalgebra::{DMatrix, DVector};

    fn row(id: &str, proportion: f64, gap: f64, words: usize) -> PanelRow {
        PanelRow {
            resume_id: id.to_string(),
            proportion,
            gap,
            retained_words: words,
        }
    }

    /// Independent route: ordinary least squares with one explicit dummy
    /// column per resume, solved by a different library's QR factorization.
    fn dummy_variable_ols(rows: &[PanelRow]) -> (f64, BTreeMap<String, f64>) {
        let mut ids: Vec<String> = rows.iter().map(|r| r.resume_id.clone()).collect();
        ids.sort();
        ids.dedup();
        let n = rows.len();
        let k = 1 + ids.len();
        let mut design = DMatrix::zeros(n, k);
        let mut outcome = DVector::zeros(n);
        for (i, r) in rows.iter().enumerate() {
            design[(i, 0)] = (r.retained_words as f64).ln();
            let j = ids.iter().position(|id| *id == r.resume_id).unwrap();
            design[(i, 1 + j)] = 1.0;
            outcome[i] = r.gap;
        }
        let solution = (design.transpose() * &design)
            .qr()
            .solve(&(design.transpose() * outcome))
            .expect("full-rank design");
        let beta = solution[0];
        let alphas = ids
            .into_iter()
            .enumerate()
            .map(|(j, id)| (id, solution[1 + j]))
            .collect();
        (beta, alphas)
    }

    #[test]
    fn noiseless_panel_recovers_slope_and_intercepts() {
        let beta = 0.0383;
        let alphas = [("a", 0.5), ("b", -0.2), ("c", 0.1)];
        let mut rows = Vec::new();
        for (id, alpha) in alphas {
            for words in [60usize, 240, 360, 600] {
                let gap = alpha + beta * (words as f64).ln();
                rows.push(row(id, words as f64 / 600.0, gap, words));
            }
        }
        let fit = fit_fixed_effects(&rows).unwrap();
        assert!((fit.beta - beta).abs() < 1e-10, "beta = {}", fit.beta);
        for (id, alpha) in alphas {
            assert!((fit.alpha_by_resume[id] - alpha).abs() < 1e-10);
        }
        assert!((fit.alpha_mean - 0.4 / 3.0).abs() < 1e-10);
        assert_eq!(fit.n_obs, 12);
        assert_eq!(fit.n_clusters, 3);
        assert!(fit.dropped_resumes.is_empty());
        // Perfect fit: residuals at rounding noise collapse the standard
        // error, so the slope is detected at any level.
        assert!(fit.se_beta_cluster < 1e-12);
        assert!(fit.p_value_beta < 1e-300);
    }

    #[test]
    fn flat_gaps_give_zero_slope_and_p_one() {
        let mut rows = Vec::new();
        for id in ["a", "b"] {
            for words in [100usize, 200, 400] {
                rows.push(row(id, 1.0, 0.75, words));
            }
        }
        let fit = fit_fixed_effects(&rows).unwrap();
        assert_eq!(fit.beta, 0.0);
        assert_eq!(fit.p_value_beta, 1.0);
        assert!((fit.alpha_by_resume["a"] - 0.75).abs() < 1e-12);
    }

    #[test]
    fn matches_dummy_variable_regression() {
        // Noisy panel with deterministic pseudo-noise, unbalanced groups.
        let mut rows = Vec::new();
        let mut wobble = 0.13f64;
        for (gi, id) in ["r01", "r02", "r03", "r04", "r05"].iter().enumerate() {
            let sizes: &[usize] = if gi % 2 == 0 {
                &[80, 150, 420, 610]
            } else {
                &[95, 310, 560]
            };
            for &words in sizes {
                wobble = (wobble * 997.0).fract();
                let gap = 0.3 - 0.05 * gi as f64 + 0.04 * (words as f64).ln() + (wobble - 0.5) * 0.2;
                rows.push(row(id, words as f64 / 610.0, gap, words));
            }
        }
        let fit = fit_fixed_effects(&rows).unwrap();
        let (beta_ols, alphas_ols) = dummy_variable_ols(&rows);
        assert!(
            (fit.beta - beta_ols).abs() < 1e-8,
            "within {} vs dummy {}",
            fit.beta,
            beta_ols
        );
        for (id, alpha) in &alphas_ols {
            assert!((fit.alpha_by_resume[id] - alpha).abs() < 1e-8, "{id}");
        }
    }

    #[test]
    fn cluster_sandwich_matches_flat_arithmetic() {
        // Two clusters, two observations each, computed with test-local
        // scalar arithmetic rather than the estimator's accumulators.
        let rows = vec![
            row("a", 0.5, 1.0, 100),
            row("a", 1.0, 2.0, 200),
            row("b", 0.5, 0.2, 100),
            row("b", 1.0, 1.7, 400),
        ];
        let fit = fit_fixed_effects(&rows).unwrap();

        let l = |w: f64| w.ln();
        // Demeaned x per cluster: a -> +-ln(2)/2, b -> +-ln(4)/2.
        let xa = (l(200.0) - l(100.0)) / 2.0;
        let xb = (l(400.0) - l(100.0)) / 2.0;
        // Demeaned gaps: a -> +-0.5, b -> +-0.75.
        let sxx = 2.0 * xa * xa + 2.0 * xb * xb;
        let sxd = 2.0 * xa * 0.5 + 2.0 * xb * 0.75;
        let beta = sxd / sxx;
        assert!((fit.beta - beta).abs() < 1e-12);

        let score_a = xa * (0.5 - beta * xa) * 2.0;
        let score_b = xb * (0.75 - beta * xb) * 2.0;
        let correction = (2.0 / 1.0) * (3.0 / 3.0);
        let variance = correction * (score_a * score_a + score_b * score_b) / (sxx * sxx);
        assert!(
            (fit.se_beta_cluster - variance.sqrt()).abs() < 1e-12,
            "impl {} vs flat {}",
            fit.se_beta_cluster,
            variance.sqrt()
        );
    }

    #[test]
    fn single_observation_resumes_are_dropped_and_reported() {
        let rows = vec![
            row("a", 1.0, 0.5, 100),
            row("a", 0.5, 0.4, 50),
            row("b", 1.0, 0.9, 300),
            row("c", 1.0, 0.1, 200),
            row("c", 0.5, 0.2, 100),
        ];
        let fit = fit_fixed_effects(&rows).unwrap();
        assert_eq!(fit.dropped_resumes, vec!["b".to_string()]);
        assert_eq!(fit.n_clusters, 2);
        assert_eq!(fit.n_obs, 4);
        assert!(!fit.alpha_by_resume.contains_key("b"));
    }

    #[test]
    fn degenerate_inputs_error() {
        assert!(matches!(
            fit_fixed_effects(&[]),
            Err(StatsError::EmptyInput)
        ));
        assert!(matches!(
            fit_fixed_effects(&[row("a", 1.0, 0.5, 0), row("a", 0.5, 0.4, 10)]),
            Err(StatsError::InvalidWordCount { .. })
        ));
        // Only single-observation groups.
        assert!(matches!(
            fit_fixed_effects(&[row("a", 1.0, 0.5, 100), row("b", 1.0, 0.4, 100)]),
            Err(StatsError::AllSingleObservation)
        ));
        // Same word count within every group: x is collinear with the
        // fixed effects.
        assert!(matches!(
            fit_fixed_effects(&[
                row("a", 0.5, 0.5, 100),
                row("a", 1.0, 0.6, 100),
                row("b", 0.5, 0.1, 200),
                row("b", 1.0, 0.2, 200),
            ]),
            Err(StatsError::ZeroWithinVariance)
        ));
        // A lone usable cluster cannot support clustered inference.
        assert!(matches!(
            fit_fixed_effects(&[
                row("a", 0.5, 0.5, 100),
                row("a", 1.0, 0.6, 200),
                row("b", 1.0, 0.4, 100),
            ]),
            Err(StatsError::TooFewObservations { have: 1, need: 2 })
        ));
    }
}
