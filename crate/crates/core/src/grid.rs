/// A uniform time grid `t_k = t0 + k·step`, `k = 0..len`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TimeGrid {
    pub t0: f64,
    pub step: f64,
    pub len: usize,
}

impl TimeGrid {
    /// Grid covering `[t0, t_end]`; the point count is `floor((t_end − t0)/step) + 1`.
    pub fn covering(t0: f64, t_end: f64, step: f64) -> Self {
        let span = ((t_end - t0) / step).max(0.0);
        // Tolerate representation error such as 12.0 / 0.01 = 1199.9999999999998.
        let len = (span + 1e-9).floor() as usize + 1;
        Self { t0, step, len }
    }

    pub fn t(&self, k: usize) -> f64 {
        self.t0 + k as f64 * self.step
    }

    pub fn end(&self) -> f64 {
        self.t(self.len.saturating_sub(1))
    }

    pub fn times(&self) -> impl Iterator<Item = f64> + '_ {
        (0..self.len).map(|k| self.t(k))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn point_counts() {
        assert_eq!(TimeGrid::covering(0.0, 1.0, 0.5).len, 3);
        assert_eq!(TimeGrid::covering(0.0, 12.0, 0.01).len, 1201);
        assert_eq!(TimeGrid::covering(0.0, 1.0, 0.3).len, 4);
        assert_eq!(TimeGrid::covering(0.0, 0.0, 0.1).len, 1);
    }

    #[test]
    fn times_are_multiples_of_step() {
        let g = TimeGrid::covering(0.0, 20.0, 0.01);
        assert_eq!(g.t(1000), 1000.0 * 0.01);
        assert!((g.end() - 20.0).abs() < 1e-12);
    }
}
