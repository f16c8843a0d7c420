/// Three-point first-derivative stencil over strictly increasing nodes.
///
/// Interior nodes use the centred quadratic through their neighbours,
/// the two end nodes use the one-sided quadratic through the first (last)
/// three nodes. On uniform grids this is the classic `(y[i+1]-y[i-1])/2h`
/// with `(-3, 4, -1)/2h` at the ends; every row is second-order accurate.
#[derive(Clone, Debug)]
pub struct DiffStencil {
    rows: Vec<Row>,
}

#[derive(Clone, Copy, Debug)]
struct Row {
    start: usize,
    weights: [f64; 3],
}

impl DiffStencil {
    /// Panics when fewer than three nodes are given; callers validate first.
    pub fn new(xs: &[f64]) -> Self {
        let n = xs.len();
        assert!(n >= 3, "derivative stencil needs at least 3 nodes");
        let rows = (0..n)
            .map(|i| {
                let start = i.saturating_sub(1).min(n - 3);
                let pts = [xs[start], xs[start + 1], xs[start + 2]];
                Row {
                    start,
                    weights: quadratic_derivative_weights(pts, xs[i]),
                }
            })
            .collect();
        Self { rows }
    }

    pub fn len(&self) -> usize {
        self.rows.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rows.is_empty()
    }

    /// Derivative of the sampled values at every node.
    pub fn apply(&self, ys: &[f64]) -> Vec<f64> {
        assert_eq!(ys.len(), self.rows.len());
        (0..self.rows.len()).map(|i| self.at(i, ys)).collect()
    }

    /// Derivative at node `i` only.
    pub fn at(&self, i: usize, ys: &[f64]) -> f64 {
        let row = &self.rows[i];
        row.weights[0] * ys[row.start]
            + row.weights[1] * ys[row.start + 1]
            + row.weights[2] * ys[row.start + 2]
    }

    /// The nodes and weights contributing to the derivative at node `i`.
    pub fn row(&self, i: usize) -> impl Iterator<Item = (usize, f64)> + '_ {
        let row = &self.rows[i];
        (0..3).map(move |k| (row.start + k, row.weights[k]))
    }
}

/// Weights `w` with `p'(at) = sum w_k y_k` for the quadratic through `(pts_k, y_k)`.
fn quadratic_derivative_weights(pts: [f64; 3], at: f64) -> [f64; 3] {
    let mut w = [0.0; 3];
    for k in 0..3 {
        let mut acc = 0.0;
        for m in 0..3 {
            if m == k {
                continue;
            }
            let mut term = 1.0 / (pts[k] - pts[m]);
            for l in 0..3 {
                if l != k && l != m {
                    term *= (at - pts[l]) / (pts[k] - pts[l]);
                }
            }
            acc += term;
        }
        w[k] = acc;
    }
    w
}

/// Composite trapezoid rule over the sampled values.
pub fn trapezoid(xs: &[f64], ys: &[f64]) -> f64 {
    xs.windows(2)
        .zip(ys.windows(2))
        .map(|(x, y)| 0.5 * (x[1] - x[0]) * (y[0] + y[1]))
        .sum()
}

/// Derivative of `ys` over a node range that may have fewer than three
/// points: two points use the secant, a single point gets zero.
pub(crate) fn derivative_short(xs: &[f64], ys: &[f64]) -> Vec<f64> {
    match xs.len() {
        0 => Vec::new(),
        1 => vec![0.0],
        2 => {
            let s = (ys[1] - ys[0]) / (xs[1] - xs[0]);
            vec![s, s]
        }
        _ => DiffStencil::new(xs).apply(ys),
    }
}
