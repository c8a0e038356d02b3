//! Moving averages of gaps over resume length, for trend figures.

use serde::{Deserialize, Serialize};

use super::StatsError;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MovingAveragePoint {
    /// Mean retained word count inside the window.
    pub mean_words: f64,
    /// Mean gap inside the window.
    pub mean_gap: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MovingAverageSeries {
    pub window: usize,
    pub points: Vec<MovingAveragePoint>,
    /// Set when fewer observations than the window were available and the
    /// series collapsed to a single whole-sample point.
    pub truncated: bool,
}

/// Sliding-window means over observations sorted by word count. Input pairs
/// are `(retained_words, gap)`; ties in word count keep their input order so
/// repeated runs see the same windows.
pub fn moving_average_gap(
    records: &[(usize, f64)],
    window: usize,
) -> Result<MovingAverageSeries, StatsError> {
    if window == 0 {
        return Err(StatsError::ZeroWindow);
    }
    if records.is_empty() {
        return Err(StatsError::EmptyInput);
    }
    let mut sorted = records.to_vec();
    sorted.sort_by_key(|&(words, _)| words);

    let n = sorted.len();
    if n < window {
        let mean_words = sorted.iter().map(|&(w, _)| w as f64).sum::<f64>() / n as f64;
        let mean_gap = sorted.iter().map(|&(_, g)| g).sum::<f64>() / n as f64;
        return Ok(MovingAverageSeries {
            window,
            points: vec![MovingAveragePoint { mean_words, mean_gap }],
            truncated: true,
        });
    }

    let mut word_sum: f64 = sorted[..window].iter().map(|&(w, _)| w as f64).sum();
    let mut gap_sum: f64 = sorted[..window].iter().map(|&(_, g)| g).sum();
    let mut points = Vec::with_capacity(n - window + 1);
    let w = window as f64;
    points.push(MovingAveragePoint {
        mean_words: word_sum / w,
        mean_gap: gap_sum / w,
    });
    for i in window..n {
        word_sum += sorted[i].0 as f64 - sorted[i - window].0 as f64;
        gap_sum += sorted[i].1 - sorted[i - window].1;
        points.push(MovingAveragePoint {
            mean_words: word_sum / w,
            mean_gap: gap_sum / w,
        });
    }
    Ok(MovingAverageSeries {
        window,
        points,
        truncated: false,
    })
}
