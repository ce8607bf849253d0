//! Natural cubic spline on a uniform grid, extended linearly past the ends.

#[derive(Clone, Debug)]
pub struct UniformSpline {
    u0: f64,
    h: f64,
    y: Vec<f64>,
    // second derivatives at the knots
    m: Vec<f64>,
}

impl UniformSpline {
    pub fn new(u0: f64, h: f64, y: Vec<f64>) -> Self {
        let n = y.len();
        assert!(n >= 2 && h > 0.0);
        let mut m = vec![0.0; n];
        if n > 2 {
            // Thomas algorithm for the interior system (1,4,1) m = 6/h² Δ²y
            let k = n - 2;
            let mut c = vec![0.0; k];
            let mut d = vec![0.0; k];
            let s = 6.0 / (h * h);
            for i in 0..k {
                let rhs = s * (y[i] - 2.0 * y[i + 1] + y[i + 2]);
                let denom = if i == 0 { 4.0 } else { 4.0 - c[i - 1] };
                c[i] = 1.0 / denom;
                d[i] = if i == 0 { rhs / denom } else { (rhs - d[i - 1]) / denom };
            }
            m[k] = d[k - 1];
            for i in (0..k - 1).rev() {
                m[i + 1] = d[i] - c[i] * m[i + 2];
            }
        }
        Self { u0, h, y, m }
    }

    fn locate(&self, u: f64) -> (usize, f64) {
        let n = self.y.len();
        let s = (u - self.u0) / self.h;
        let i = (s.floor().max(0.0) as usize).min(n - 2);
        (i, s - i as f64)
    }

    fn end_slopes(&self) -> (f64, f64) {
        let n = self.y.len();
        let h = self.h;
        let left = (self.y[1] - self.y[0]) / h - h * (2.0 * self.m[0] + self.m[1]) / 6.0;
        let right = (self.y[n - 1] - self.y[n - 2]) / h + h * (self.m[n - 2] + 2.0 * self.m[n - 1]) / 6.0;
        (left, right)
    }

    pub fn u_max(&self) -> f64 {
        self.u0 + self.h * (self.y.len() - 1) as f64
    }

    pub fn eval(&self, u: f64) -> f64 {
        let n = self.y.len();
        if u < self.u0 {
            return self.y[0] + self.end_slopes().0 * (u - self.u0);
        }
        if u > self.u_max() {
            return self.y[n - 1] + self.end_slopes().1 * (u - self.u_max());
        }
        let (i, t) = self.locate(u);
        let h2 = self.h * self.h;
        let a = 1.0 - t;
        a * self.y[i] + t * self.y[i + 1] + h2 / 6.0 * ((a * a * a - a) * self.m[i] + (t * t * t - t) * self.m[i + 1])
    }

    pub fn deriv(&self, u: f64) -> f64 {
        if u < self.u0 {
            return self.end_slopes().0;
        }
        if u > self.u_max() {
            return self.end_slopes().1;
        }
        let (i, t) = self.locate(u);
        let h = self.h;
        let a = 1.0 - t;
        (self.y[i + 1] - self.y[i]) / h + h / 6.0 * (-(3.0 * a * a - 1.0) * self.m[i] + (3.0 * t * t - 1.0) * self.m[i + 1])
    }

    pub fn knots(&self) -> &[f64] {
        &self.y
    }
}
