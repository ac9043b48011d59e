//! Reference implementations written directly from the model equations,
//! sharing no code with the library.

use nalgebra::{DMatrix, DVector};

/// Triangular memberships on `h` uniformly spaced centers in `[0, 1]`.
pub fn memberships(h: usize, x: f64) -> Vec<f64> {
    let x = x.clamp(0.0, 1.0);
    let step = 1.0 / (h - 1) as f64;
    (0..h)
        .map(|l| {
            let c = l as f64 * step;
            (1.0 - (x - c).abs() / step).max(0.0)
        })
        .collect()
}

/// Concatenated per-input membership blocks.
pub fn regressor(h: usize, x: &[f64]) -> Vec<f64> {
    x.iter().flat_map(|&v| memberships(h, v)).collect()
}

/// Ridge least squares `argmin_W sum |y - W mu|^2 + |W|^2 / p0` in closed form.
pub fn ridge_weights(mus: &[Vec<f64>], ys: &[Vec<f64>], p0: f64) -> DMatrix<f64> {
    let p = mus[0].len();
    let g = ys[0].len();
    let mut a = DMatrix::<f64>::identity(p, p) / p0;
    let mut b = DMatrix::<f64>::zeros(p, g);
    for (mu, y) in mus.iter().zip(ys) {
        let mu = DVector::from_column_slice(mu);
        let y = DVector::from_column_slice(y);
        a += &mu * mu.transpose();
        b += &mu * y.transpose();
    }
    let x = a
        .cholesky()
        .expect("ridge system is positive definite")
        .solve(&b);
    x.transpose()
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

/// Single-output exponentially weighted RLS.
pub struct ScalarRls {
    pub w: Vec<f64>,
    p: Vec<Vec<f64>>,
    alpha: f64,
}

impl ScalarRls {
    pub fn new(len: usize, p0: f64, alpha: f64) -> Self {
        let mut p = vec![vec![0.0; len]; len];
        for (i, row) in p.iter_mut().enumerate() {
            row[i] = p0;
        }
        Self {
            w: vec![0.0; len],
            p,
            alpha,
        }
    }

    pub fn update(&mut self, mu: &[f64], y: f64) {
        let pm: Vec<f64> = self.p.iter().map(|row| dot(row, mu)).collect();
        let den = self.alpha + dot(mu, &pm);
        let e = y - dot(&self.w, mu);
        for (w, g) in self.w.iter_mut().zip(&pm) {
            *w += g * e / den;
        }
        for (i, row) in self.p.iter_mut().enumerate() {
            for (j, v) in row.iter_mut().enumerate() {
                *v = (*v - pm[i] * pm[j] / den) / self.alpha;
            }
        }
    }
}

/// Single-output gradient learner normalized by a discounted regressor energy.
pub struct ScalarGradient {
    pub w: Vec<f64>,
    r: f64,
    alpha: f64,
}

impl ScalarGradient {
    pub fn new(len: usize, r0: f64, alpha: f64) -> Self {
        Self {
            w: vec![0.0; len],
            r: r0,
            alpha,
        }
    }

    pub fn update(&mut self, mu: &[f64], y: f64) {
        self.r = self.alpha * self.r + dot(mu, mu);
        let e = y - dot(&self.w, mu);
        for (w, m) in self.w.iter_mut().zip(mu) {
            *w += e * m / self.r;
        }
    }
}

/// `c^T R c`.
pub fn quadratic(r: &DMatrix<f64>, c: &[f64]) -> f64 {
    let c = DVector::from_column_slice(c);
    (c.transpose() * r * &c)[(0, 0)]
}

/// Minimum of `c^T R c` over `sum c = 1` by grid search on the free
/// coordinates: a 0.01 grid over `[-span, span]`, refined to 0.001 around the
/// coarse winner.
pub fn grid_minimum(r: &DMatrix<f64>, span: f64) -> f64 {
    let q = r.nrows();
    assert!((2..=3).contains(&q));
    let mut m = [[0.0; 3]; 3];
    for i in 0..q {
        for j in 0..q {
            m[i][j] = r[(i, j)];
        }
    }
    let eval = |a: f64, b: f64| {
        let c = if q == 2 {
            [a, 1.0 - a, 0.0]
        } else {
            [a, b, 1.0 - a - b]
        };
        let mut v = 0.0;
        for i in 0..q {
            for j in 0..q {
                v += c[i] * m[i][j] * c[j];
            }
        }
        v
    };
    let search = |centre: (f64, f64), step: f64, n: i64| {
        let mut best = (f64::INFINITY, centre);
        let js = if q == 2 { 0..=0 } else { -n..=n };
        for i in -n..=n {
            for j in js.clone() {
                let point = (centre.0 + i as f64 * step, centre.1 + j as f64 * step);
                let v = eval(point.0, point.1);
                if v < best.0 {
                    best = (v, point);
                }
            }
        }
        best
    };
    let coarse = search((0.0, 0.0), 0.01, (span / 0.01).round() as i64);
    search(coarse.1, 0.001, 20).0.min(coarse.0)
}

/// Explicit Euler integration of the Lorenz system.
pub fn lorenz_euler(
    sigma: f64,
    r: f64,
    b: f64,
    dt: f64,
    start: [f64; 3],
    n: usize,
) -> Vec<[f64; 3]> {
    let mut out = Vec::with_capacity(n);
    let [mut x, mut y, mut z] = start;
    for _ in 0..n {
        out.push([x, y, z]);
        let dx = sigma * (y - x);
        let dy = x * (r - z) - y;
        let dz = x * y - b * z;
        x += dx * dt;
        y += dy * dt;
        z += dz * dt;
    }
    out
}

/// Per-column min-max scaling to `[0, 1]`.
pub fn min_max(series: &[[f64; 3]]) -> Vec<[f64; 3]> {
    let mut lo = [f64::INFINITY; 3];
    let mut hi = [f64::NEG_INFINITY; 3];
    for s in series {
        for d in 0..3 {
            lo[d] = lo[d].min(s[d]);
            hi[d] = hi[d].max(s[d]);
        }
    }
    series
        .iter()
        .map(|s| std::array::from_fn(|d| (s[d] - lo[d]) / (hi[d] - lo[d])))
        .collect()
}

/// Mean squared error of predicting `s[k + 1]` by `s[k]` over `k in range`.
pub fn persistence_mse(s: &[[f64; 3]], range: std::ops::Range<usize>) -> f64 {
    let mut sum = 0.0;
    let mut count = 0;
    for k in range {
        for (next, now) in s[k + 1].iter().zip(&s[k]) {
            sum += (next - now).powi(2);
            count += 1;
        }
    }
    sum / count as f64
}

pub fn smape_term(y: f64, yhat: f64) -> f64 {
    if y.abs() < 1e-12 && yhat.abs() < 1e-12 {
        0.0
    } else {
        2.0 * (y - yhat).abs() / (y.abs() + yhat.abs())
    }
}

/// Cumulative mean SMAPE after each pair.
pub fn cumulative_smape(targets: &[Vec<f64>], preds: &[Vec<f64>]) -> Vec<f64> {
    let mut sum = 0.0;
    let mut count = 0usize;
    targets
        .iter()
        .zip(preds)
        .map(|(t, p)| {
            for (a, b) in t.iter().zip(p) {
                sum += smape_term(*a, *b);
                count += 1;
            }
            sum / count as f64
        })
        .collect()
}
