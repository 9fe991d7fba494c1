//! Fixed-step fourth-order Runge-Kutta integration backward in time, with
//! cubic Hermite interpolation of the stored solution.

/// Default number of integration steps per unit of time.
pub const DEFAULT_STEPS_PER_YEAR: usize = 2000;

/// Solution of an ODE on `[start, end]` sampled at uniform nodes.
#[derive(Debug, Clone)]
pub struct HermiteTable {
    start: f64,
    end: f64,
    values: Vec<Vec<f64>>,
    derivs: Vec<Vec<f64>>,
}

fn axpy(y: &[f64], h: f64, k: &[f64]) -> Vec<f64> {
    y.iter().zip(k).map(|(a, b)| a + h * b).collect()
}

/// Integrates `y' = f(t, y)` from `end` (where `y = y_end`) back to `start`
/// using `steps` RK4 steps. Requires `start <= end` and `steps >= 1`.
pub fn integrate_backward<F>(start: f64, end: f64, steps: usize, y_end: Vec<f64>, f: F) -> HermiteTable
where
    F: Fn(f64, &[f64]) -> Vec<f64>,
{
    let steps = steps.max(1);
    let h = (end - start) / steps as f64;
    let mut values = vec![Vec::new(); steps + 1];
    let mut derivs = vec![Vec::new(); steps + 1];
    let mut y = y_end;
    values[steps] = y.clone();
    derivs[steps] = f(end, &y);
    for i in (0..steps).rev() {
        let t = start + (i + 1) as f64 * h;
        // Step of size -h.
        let k1 = f(t, &y);
        let k2 = f(t - 0.5 * h, &axpy(&y, -0.5 * h, &k1));
        let k3 = f(t - 0.5 * h, &axpy(&y, -0.5 * h, &k2));
        let k4 = f(t - h, &axpy(&y, -h, &k3));
        y = y
            .iter()
            .enumerate()
            .map(|(j, v)| v - h / 6.0 * (k1[j] + 2.0 * k2[j] + 2.0 * k3[j] + k4[j]))
            .collect();
        let ti = if i == 0 { start } else { start + i as f64 * h };
        derivs[i] = f(ti, &y);
        values[i] = y.clone();
    }
    HermiteTable { start, end, values, derivs }
}

impl HermiteTable {
    pub fn start(&self) -> f64 {
        self.start
    }
    pub fn end(&self) -> f64 {
        self.end
    }
    pub fn steps(&self) -> usize {
        self.values.len() - 1
    }
    pub fn node_time(&self, i: usize) -> f64 {
        if i == self.steps() {
            self.end
        } else {
            self.start + i as f64 * (self.end - self.start) / self.steps() as f64
        }
    }
    pub fn node_value(&self, i: usize) -> &[f64] {
        &self.values[i]
    }
    pub fn value_at_start(&self) -> &[f64] {
        &self.values[0]
    }

    /// Interpolated solution; `t` is clamped to `[start, end]`.
    pub fn eval(&self, t: f64) -> Vec<f64> {
        let n = self.steps();
        let span = self.end - self.start;
        if span <= 0.0 {
            return self.values[n].clone();
        }
        let h = span / n as f64;
        let t = t.clamp(self.start, self.end);
        let i = (((t - self.start) / h).floor() as usize).min(n - 1);
        let t0 = self.node_time(i);
        let t1 = self.node_time(i + 1);
        let dt = t1 - t0;
        let s = ((t - t0) / dt).clamp(0.0, 1.0);
        let s2 = s * s;
        let s3 = s2 * s;
        let h00 = 2.0 * s3 - 3.0 * s2 + 1.0;
        let h10 = s3 - 2.0 * s2 + s;
        let h01 = -2.0 * s3 + 3.0 * s2;
        let h11 = s3 - s2;
        let (y0, y1, d0, d1) = (&self.values[i], &self.values[i + 1], &self.derivs[i], &self.derivs[i + 1]);
        (0..y0.len())
            .map(|j| h00 * y0[j] + h10 * dt * d0[j] + h01 * y1[j] + h11 * dt * d1[j])
            .collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn exponential_decay_backward() {
        // y' = -y, y(1) = 1  =>  y(t) = e^{1-t}
        let tab = integrate_backward(0.0, 1.0, 200, vec![1.0], |_, y| vec![-y[0]]);
        assert!((tab.value_at_start()[0] - 1f64.exp()).abs() < 1e-10);
        for t in [0.0, 0.123, 0.5, 0.999, 1.0] {
            assert!((tab.eval(t)[0] - (1.0 - t).exp()).abs() < 1e-10);
        }
    }

    #[test]
    fn time_dependent_rhs() {
        // y' = 3t², y(2) = 8  =>  y = t³
        let tab = integrate_backward(0.5, 2.0, 10, vec![8.0], |t, _| vec![3.0 * t * t]);
        for t in [0.5, 0.77, 1.3, 2.0] {
            assert!((tab.eval(t)[0] - t * t * t).abs() < 1e-12);
        }
    }

    #[test]
    fn zero_length_interval() {
        let tab = integrate_backward(1.0, 1.0, 5, vec![2.0, 3.0], |_, y| y.to_vec());
        assert_eq!(tab.eval(1.0), vec![2.0, 3.0]);
    }
}
