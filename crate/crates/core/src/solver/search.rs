//! One-dimensional search machinery for the per-carrier inner problem.

const INV_PHI: f64 = 0.618_033_988_749_894_9;

/// Lower end of the geometric part of the grid, relative to `p_max`.
pub const GRID_SPAN: f64 = 1e-6;
/// The geometric part never starts above this power, so features near
/// unit SNR stay resolved when `p_max` is huge.
pub const GRID_FLOOR: f64 = 1e-4;

/// Search grid `{0} ∪ geometric(min(p_max·GRID_SPAN, GRID_FLOOR) .. p_max)`.
///
/// Rate curves change on a logarithmic power scale, so a geometric grid
/// gives the same relative resolution near the origin and at the tail.
#[derive(Debug, Clone, PartialEq)]
pub struct InnerGrid {
    points: Vec<f64>,
}

impl InnerGrid {
    pub fn new(p_max: f64, n_points: usize) -> Self {
        assert!(p_max > 0.0 && n_points >= 3);
        let lo = (p_max * GRID_SPAN).min(GRID_FLOOR).ln();
        let hi = p_max.ln();
        let m = n_points - 1;
        let mut points = Vec::with_capacity(n_points);
        points.push(0.0);
        points.extend((0..m).map(|i| (lo + (hi - lo) * i as f64 / (m - 1) as f64).exp()));
        *points.last_mut().unwrap() = p_max;
        Self { points }
    }

    pub fn points(&self) -> &[f64] {
        &self.points
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn p_max(&self) -> f64 {
        *self.points.last().unwrap()
    }

    /// Relative spacing of consecutive geometric points.
    pub fn ratio(&self) -> f64 {
        self.points[2] / self.points[1]
    }

    /// Largest grid index whose point is strictly below `p`.
    pub fn index_below(&self, p: f64) -> Option<usize> {
        match self.points.partition_point(|&q| q < p) {
            0 => None,
            k => Some(k - 1),
        }
    }
}

/// Golden-section search for the maximum of `f` on `[a, b]`.
///
/// Returns `(x, f(x))` for the best point evaluated.
pub fn golden_section_maximize<F>(mut f: F, mut a: f64, mut b: f64, iters: usize) -> (f64, f64)
where
    F: FnMut(f64) -> f64,
{
    let mut x1 = b - INV_PHI * (b - a);
    let mut x2 = a + INV_PHI * (b - a);
    let mut f1 = f(x1);
    let mut f2 = f(x2);
    for _ in 0..iters {
        if f1 >= f2 {
            b = x2;
            x2 = x1;
            f2 = f1;
            x1 = b - INV_PHI * (b - a);
            f1 = f(x1);
        } else {
            a = x1;
            x1 = x2;
            f1 = f2;
            x2 = a + INV_PHI * (b - a);
            f2 = f(x2);
        }
    }
    if f1 >= f2 {
        (x1, f1)
    } else {
        (x2, f2)
    }
}
