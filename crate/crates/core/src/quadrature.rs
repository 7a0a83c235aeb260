//! Quadrature rules and smooth cutoff functions.

use crate::scalar::Real;

/// Gauss–Legendre nodes and weights on `[-1, 1]`, computed by Newton
/// iteration on the Legendre recurrence.
pub fn gauss_legendre(n: usize) -> (Vec<f64>, Vec<f64>) {
    assert!(n >= 1);
    let mut nodes = vec![0.0; n];
    let mut weights = vec![0.0; n];
    let nf = n as f64;
    for i in 0..n.div_ceil(2) {
        let mut x = (std::f64::consts::PI * (i as f64 + 0.75) / (nf + 0.5)).cos();
        let mut dp = 0.0;
        for _ in 0..100 {
            let (mut p0, mut p1) = (1.0, x);
            for k in 2..=n {
                let kf = k as f64;
                let p2 = ((2.0 * kf - 1.0) * x * p1 - (kf - 1.0) * p0) / kf;
                p0 = p1;
                p1 = p2;
            }
            let p = if n == 1 { x } else { p1 };
            let pm1 = if n == 1 { 1.0 } else { p0 };
            dp = nf * (x * p - pm1) / (x * x - 1.0);
            let dx = p / dp;
            x -= dx;
            if dx.abs() < 1e-16 {
                break;
            }
        }
        nodes[i] = -x;
        nodes[n - 1 - i] = x;
        let w = 2.0 / ((1.0 - x * x) * dp * dp);
        weights[i] = w;
        weights[n - 1 - i] = w;
    }
    (nodes, weights)
}

/// Composite Gauss–Legendre rule on `[a, b]` with `panels` equal panels.
#[derive(Debug, Clone)]
pub struct CompositeRule {
    pub nodes: Vec<f64>,
    pub weights: Vec<f64>,
}

impl CompositeRule {
    pub fn new(a: f64, b: f64, panels: usize, order: usize) -> Self {
        let (x, w) = gauss_legendre(order);
        let h = (b - a) / panels as f64;
        let mut nodes = Vec::with_capacity(panels * order);
        let mut weights = Vec::with_capacity(panels * order);
        for p in 0..panels {
            let lo = a + h * p as f64;
            for (xi, wi) in x.iter().zip(&w) {
                nodes.push(lo + 0.5 * h * (xi + 1.0));
                weights.push(0.5 * h * wi);
            }
        }
        Self { nodes, weights }
    }

    /// Panels with edges at the given breakpoints.
    pub fn with_breaks(breaks: &[f64], order: usize) -> Self {
        let (x, w) = gauss_legendre(order);
        let mut nodes = Vec::new();
        let mut weights = Vec::new();
        for win in breaks.windows(2) {
            let (lo, hi) = (win[0], win[1]);
            let h = hi - lo;
            for (xi, wi) in x.iter().zip(&w) {
                nodes.push(lo + 0.5 * h * (xi + 1.0));
                weights.push(0.5 * h * wi);
            }
        }
        Self { nodes, weights }
    }

    pub fn integrate<F: FnMut(f64) -> f64>(&self, mut f: F) -> f64 {
        self.nodes.iter().zip(&self.weights).map(|(&x, &w)| w * f(x)).sum()
    }
}

/// Trapezoid weights for a uniform grid of `n` nodes and spacing `h`.
pub fn trapezoid_weights<T: Real>(n: usize, h: T) -> Vec<T> {
    let mut w = vec![h; n];
    if n > 0 {
        w[0] = h / T::lit(2.0);
        w[n - 1] = h / T::lit(2.0);
    }
    w
}

/// Composite Simpson weights (n odd); falls back to trapezoid for even n.
pub fn simpson_weights<T: Real>(n: usize, h: T) -> Vec<T> {
    if n < 3 || n.is_multiple_of(2) {
        return trapezoid_weights(n, h);
    }
    let third = h / T::lit(3.0);
    (0..n)
        .map(|i| {
            if i == 0 || i == n - 1 {
                third
            } else if i % 2 == 1 {
                third * T::lit(4.0)
            } else {
                third * T::lit(2.0)
            }
        })
        .collect()
}

/// Septic smoothstep `35y^4 - 84y^5 + 70y^6 - 20y^7`, clamped to `[0, 1]`.
/// C³ at both ends.
pub fn smoothstep7<T: Real>(y: T) -> T {
    if y <= T::zero() {
        return T::zero();
    }
    if y >= T::one() {
        return T::one();
    }
    let y4 = y * y * y * y;
    y4 * (T::lit(35.0) + y * (T::lit(-84.0) + y * (T::lit(70.0) + y * T::lit(-20.0))))
}

/// Cutoff equal to 1 on `[0, t1]`, 0 beyond `t2`, septic smoothstep between.
#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct Cutoff {
    pub t1: f64,
    pub t2: f64,
}

impl Default for Cutoff {
    fn default() -> Self {
        Self { t1: 0.5, t2: 1.0 }
    }
}

impl Cutoff {
    pub fn eval<T: Real>(&self, t: T) -> T {
        let t1 = T::lit(self.t1);
        let t2 = T::lit(self.t2);
        T::one() - smoothstep7((t - t1) / (t2 - t1))
    }

    /// Coefficients (ascending powers of `y = (t - t1)/(t2 - t1)`) of the
    /// polynomial `eta` on the transition interval.
    pub fn transition_poly(&self) -> [f64; 8] {
        [1.0, 0.0, 0.0, 0.0, -35.0, 84.0, -70.0, 20.0]
    }

    pub fn dilated(&self, factor: f64) -> Self {
        Self { t1: self.t1 * factor, t2: self.t2 * factor }
    }
}

/// C^∞ transition: 0 for y ≤ 0, 1 for y ≥ 1.
pub fn smooth_transition<T: Real>(y: T) -> T {
    let f = |v: T| {
        if v <= T::zero() {
            T::zero()
        } else {
            (-T::one() / v).exp()
        }
    };
    let a = f(y);
    let b = f(T::one() - y);
    if a + b == T::zero() {
        return if y > T::lit(0.5) { T::one() } else { T::zero() };
    }
    a / (a + b)
}

/// `cos²` bump supported on `[-half_width, half_width]`, equal to 1 at 0.
pub fn cos2_bump<T: Real>(y: T, half_width: T) -> T {
    if y.abs() >= half_width {
        return T::zero();
    }
    let c = (T::FRAC_PI_2() * y / half_width).cos();
    c * c
}

/// Least-squares slope and intercept of `y` against `x`.
pub fn linear_fit(x: &[f64], y: &[f64]) -> (f64, f64) {
    let n = x.len() as f64;
    let mx = x.iter().sum::<f64>() / n;
    let my = y.iter().sum::<f64>() / n;
    let sxy: f64 = x.iter().zip(y).map(|(a, b)| (a - mx) * (b - my)).sum();
    let sxx: f64 = x.iter().map(|a| (a - mx) * (a - mx)).sum();
    let slope = sxy / sxx;
    (slope, my - slope * mx)
}
