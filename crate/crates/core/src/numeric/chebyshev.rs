/// Chebyshev interpolant of a function on `[a, b]`.
#[derive(Debug, Clone)]
pub struct Chebyshev {
    a: f64,
    b: f64,
    coeffs: Vec<f64>,
}

impl Chebyshev {
    /// Nodes at which a degree `n-1` interpolant samples its function.
    pub fn nodes(a: f64, b: f64, n: usize) -> Vec<f64> {
        (0..n)
            .map(|k| {
                let t = (std::f64::consts::PI * (k as f64 + 0.5) / n as f64).cos();
                0.5 * (a + b) + 0.5 * (b - a) * t
            })
            .collect()
    }

    /// Builds the interpolant from samples taken at [`Chebyshev::nodes`].
    pub fn from_samples(a: f64, b: f64, samples: &[f64]) -> Self {
        let n = samples.len();
        let coeffs = (0..n)
            .map(|j| {
                let s: f64 = samples
                    .iter()
                    .enumerate()
                    .map(|(k, &f)| {
                        f * (std::f64::consts::PI * j as f64 * (k as f64 + 0.5) / n as f64).cos()
                    })
                    .sum();
                2.0 * s / n as f64
            })
            .collect();
        Chebyshev { a, b, coeffs }
    }

    pub fn fit<F: FnMut(f64) -> f64>(a: f64, b: f64, n: usize, f: F) -> Self {
        let samples: Vec<f64> = Self::nodes(a, b, n).into_iter().map(f).collect();
        Self::from_samples(a, b, &samples)
    }

    pub fn eval(&self, x: f64) -> f64 {
        let t = (2.0 * x - self.a - self.b) / (self.b - self.a);
        let mut d = 0.0;
        let mut dd = 0.0;
        for &c in self.coeffs.iter().skip(1).rev() {
            let tmp = d;
            d = 2.0 * t * d - dd + c;
            dd = tmp;
        }
        t * d - dd + 0.5 * self.coeffs[0]
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn reproduces_smooth_function() {
        let c = Chebyshev::fit(0.0, 2.0, 24, |x| (-x).exp() * x.sin());
        for i in 0..=50 {
            let x = 2.0 * i as f64 / 50.0;
            assert!((c.eval(x) - (-x).exp() * x.sin()).abs() < 1e-12);
        }
    }
}
