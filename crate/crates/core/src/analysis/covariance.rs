use super::AnalysisError;
use crate::dynamics::Trajectory;

pub const DEFAULT_BAND_THRESHOLD: f64 = 0.8;

/// A pair of series whose correlation exceeds the band threshold.
#[derive(Debug, Clone, PartialEq)]
pub struct CouplingBand {
    pub a: String,
    pub b: String,
    pub correlation: f64,
}

/// Population covariance (divisor N) and Pearson correlation across series.
#[derive(Debug, Clone, PartialEq)]
pub struct CovarianceReport {
    pub ids: Vec<String>,
    pub covariance: Vec<Vec<f64>>,
    pub correlation: Vec<Vec<f64>>,
    /// Constant series. Their correlations are reported as 0.
    pub degenerate: Vec<String>,
    pub coupled_bands: Vec<CouplingBand>,
}

impl CovarianceReport {
    fn index(&self, id: &str) -> Option<usize> {
        self.ids.iter().position(|x| x == id)
    }

    pub fn covariance_of(&self, a: &str, b: &str) -> Option<f64> {
        Some(self.covariance[self.index(a)?][self.index(b)?])
    }

    pub fn correlation_of(&self, a: &str, b: &str) -> Option<f64> {
        Some(self.correlation[self.index(a)?][self.index(b)?])
    }
}

/// Streaming co-moment update, so long runs are accumulated in one pass
/// without the cancellation of the sum-of-squares form.
pub fn response_covariance(series: &[&Trajectory], band_threshold: f64) -> Result<CovarianceReport, AnalysisError> {
    if series.len() < 2 {
        return Err(AnalysisError::InvalidParameter(format!(
            "need at least two series, got {}",
            series.len()
        )));
    }
    let first = series[0];
    if first.is_empty() {
        return Err(AnalysisError::EmptyTrajectory);
    }
    for s in series {
        let same = s.len() == first.len()
            && (s.t0 - first.t0).abs() <= 1e-12
            && (s.step - first.step).abs() <= 1e-12 * first.step.abs().max(1.0);
        if !same {
            return Err(AnalysisError::GridMismatch(s.node_id.clone()));
        }
    }

    let m = series.len();
    let mut mean = vec![0.0; m];
    let mut co = vec![vec![0.0; m]; m];
    let mut delta = vec![0.0; m];
    for k in 0..first.len() {
        let n = (k + 1) as f64;
        for i in 0..m {
            delta[i] = series[i].values[k] - mean[i];
            mean[i] += delta[i] / n;
        }
        for i in 0..m {
            for j in i..m {
                co[i][j] += delta[i] * (series[j].values[k] - mean[j]);
            }
        }
    }
    let n = first.len() as f64;
    let mut covariance = vec![vec![0.0; m]; m];
    for i in 0..m {
        for j in i..m {
            covariance[i][j] = co[i][j] / n;
            covariance[j][i] = covariance[i][j];
        }
    }

    // A series counts as constant when every sample equals the first.
    let flat: Vec<bool> = series.iter().map(|s| s.values.iter().all(|&v| v == s.values[0])).collect();
    let mut correlation = vec![vec![0.0; m]; m];
    for i in 0..m {
        for j in 0..m {
            if flat[i] || flat[j] {
                continue;
            }
            let denom = (covariance[i][i] * covariance[j][j]).sqrt();
            correlation[i][j] = if denom > 0.0 {
                (covariance[i][j] / denom).clamp(-1.0, 1.0)
            } else {
                0.0
            };
        }
    }

    let ids: Vec<String> = series.iter().map(|s| s.node_id.clone()).collect();
    let mut coupled_bands = Vec::new();
    for i in 0..m {
        for j in i + 1..m {
            if correlation[i][j] > band_threshold {
                coupled_bands.push(CouplingBand {
                    a: ids[i].clone(),
                    b: ids[j].clone(),
                    correlation: correlation[i][j],
                });
            }
        }
    }
    Ok(CovarianceReport {
        degenerate: ids.iter().zip(&flat).filter(|(_, f)| **f).map(|(id, _)| id.clone()).collect(),
        ids,
        covariance,
        correlation,
        coupled_bands,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::TimeGrid;

    fn series(id: &str, values: Vec<f64>) -> Trajectory {
        Trajectory::new(id, &TimeGrid::covering(0.0, (values.len() - 1) as f64, 1.0), values)
    }

    fn two_pass(a: &[f64], b: &[f64]) -> f64 {
        let n = a.len() as f64;
        let ma = a.iter().sum::<f64>() / n;
        let mb = b.iter().sum::<f64>() / n;
        a.iter().zip(b).map(|(x, y)| (x - ma) * (y - mb)).sum::<f64>() / n
    }

    #[test]
    fn identical_series_correlate_fully() {
        let a = series("A", vec![1.0, 0.8, 0.5, 0.2]);
        let b = series("B", vec![1.0, 0.8, 0.5, 0.2]);
        let r = response_covariance(&[&a, &b], 0.8).unwrap();
        assert!((r.correlation_of("A", "B").unwrap() - 1.0).abs() < 1e-12);
        assert_eq!(r.coupled_bands.len(), 1);
    }

    #[test]
    fn constant_series_is_degenerate() {
        let a = series("A", vec![0.5; 5]);
        let b = series("B", vec![1.0, 0.9, 0.7, 0.6, 0.1]);
        let r = response_covariance(&[&a, &b], 0.8).unwrap();
        assert_eq!(r.degenerate, ["A"]);
        assert_eq!(r.correlation_of("A", "B"), Some(0.0));
        assert_eq!(r.covariance_of("A", "A"), Some(0.0));
        assert!(r.coupled_bands.is_empty());
    }

    #[test]
    fn anti_correlated() {
        let a = series("A", vec![0.0, 1.0, 2.0, 3.0]);
        let b = series("B", vec![3.0, 2.0, 1.0, 0.0]);
        let r = response_covariance(&[&a, &b], 0.8).unwrap();
        assert!((r.correlation_of("A", "B").unwrap() + 1.0).abs() < 1e-12);
        assert!(r.coupled_bands.is_empty());
    }

    #[test]
    fn matches_two_pass_oracle() {
        let a: Vec<f64> = (0..200).map(|k| (k as f64 * 0.1).sin()).collect();
        let b: Vec<f64> = (0..200).map(|k| (k as f64 * 0.07).cos() + 1e6).collect();
        let ra = series("A", a.clone());
        let rb = series("B", b.clone());
        let r = response_covariance(&[&ra, &rb], 0.8).unwrap();
        assert!((r.covariance_of("A", "B").unwrap() - two_pass(&a, &b)).abs() < 1e-9);
        assert!((r.covariance_of("B", "B").unwrap() - two_pass(&b, &b)).abs() < 1e-9);
    }

    #[test]
    fn grid_mismatch_and_arity() {
        let a = series("A", vec![1.0, 0.5, 0.2]);
        let b = series("B", vec![1.0, 0.5]);
        assert_eq!(response_covariance(&[&a, &b], 0.8), Err(AnalysisError::GridMismatch("B".into())));
        assert!(matches!(response_covariance(&[&a], 0.8), Err(AnalysisError::InvalidParameter(_))));
    }
}
