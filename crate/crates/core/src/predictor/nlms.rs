use super::{dot, Fnv, History, Predictor};

/// Normalized least-mean-squares adaptive FIR predictor.
///
/// With one variable this is a plain order-`k` linear predictor over the last
/// `k` reconstructions. With `v` variables each target variable `j` owns `k`
/// weights applied to a concatenated window: `k / v` of the newest values of
/// every variable, plus the `k % v` remainder taps for `j` itself. Blocks are
/// laid out variable-major, newest value last. Variables before `j` contribute
/// values from the current timestep, the rest stop at the previous one.
///
/// All arithmetic is `f32` with a fixed left-to-right order so that encoder
/// and decoder stay bit-identical.
#[derive(Debug, Clone)]
pub struct NlmsPredictor {
    k: usize,
    mu: f32,
    reg: f32,
    taps_per_var: usize,
    remainder: usize,
    histories: Vec<History>,
    weights: Vec<Vec<f32>>,
    window: Vec<f32>,
    scratch: Vec<f32>,
    filter_out: f32,
    steps: u64,
}

impl NlmsPredictor {
    pub fn new(k: usize, vars: usize, mu: f32, reg: f32) -> Self {
        assert!(k > 0 && vars > 0);
        let taps_per_var = k / vars;
        let remainder = k % vars;
        Self {
            k,
            mu,
            reg,
            taps_per_var,
            remainder,
            histories: (0..vars)
                .map(|_| History::new(taps_per_var + remainder))
                .collect(),
            weights: vec![vec![0.0; k]; vars],
            window: vec![0.0; k],
            scratch: vec![0.0; k],
            filter_out: 0.0,
            steps: 0,
        }
    }

    pub fn univariate(k: usize, mu: f32, reg: f32) -> Self {
        Self::new(k, 1, mu, reg)
    }

    pub fn weights(&self, var: usize) -> &[f32] {
        &self.weights[var]
    }

    pub fn set_weights(&mut self, var: usize, weights: &[f32]) {
        self.weights[var].copy_from_slice(weights);
    }

    /// The window the last `predict(var)` call used.
    pub fn window(&self) -> &[f32] {
        &self.window
    }

    /// Number of completed timesteps.
    pub fn steps(&self) -> u64 {
        self.steps
    }

    fn fill_window(&mut self, target: usize) {
        let mut pos = 0;
        for (i, h) in self.histories.iter().enumerate() {
            let m = if i == target {
                self.taps_per_var + self.remainder
            } else {
                self.taps_per_var
            };
            self.window[pos..pos + m].copy_from_slice(h.latest(m));
            pos += m;
        }
        debug_assert_eq!(pos, self.k);
    }
}

impl Predictor for NlmsPredictor {
    fn predict(&mut self, var: usize) -> f32 {
        self.fill_window(var);
        self.filter_out = dot(&self.weights[var], &self.window);
        let warm = self.steps >= self.k as u64;
        if warm && self.filter_out.is_finite() {
            self.filter_out
        } else {
            self.histories[var].last()
        }
    }

    fn update(&mut self, var: usize, reconstructed: f32) {
        if reconstructed.is_finite() {
            let e = reconstructed - self.filter_out;
            let energy = dot(&self.window, &self.window);
            let scale = self.mu * e / (self.reg + energy);
            let w = &self.weights[var];
            let mut finite = scale.is_finite();
            for ((s, &wi), &xi) in self.scratch.iter_mut().zip(w).zip(&self.window) {
                *s = wi + scale * xi;
                finite &= s.is_finite();
            }
            // A non-finite update is dropped on both sides alike.
            if finite {
                self.weights[var].copy_from_slice(&self.scratch);
            }
        }
        let h = &mut self.histories[var];
        let stored = if reconstructed.is_finite() {
            reconstructed
        } else {
            h.last()
        };
        h.push(stored);
        if var + 1 == self.histories.len() {
            self.steps += 1;
        }
    }

    fn digest(&self) -> u64 {
        let mut h = Fnv::new();
        for w in &self.weights {
            h.floats(w);
        }
        for hist in &self.histories {
            h.floats(hist.latest(hist.capacity()));
        }
        h.word(self.filter_out.to_bits());
        h.word(self.steps as u32);
        h.word((self.steps >> 32) as u32);
        h.finish()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn warm(p: &mut NlmsPredictor, values: &[f32]) {
        for &x in values {
            p.predict(0);
            p.update(0, x);
        }
    }

    #[test]
    fn zero_weights_predict_zero() {
        let mut p = NlmsPredictor::univariate(4, 0.5, 1.0);
        p.steps = 4;
        for x in [1.0, -2.0, 3.0, 7.5] {
            p.histories[0].push(x);
        }
        assert_eq!(p.predict(0), 0.0);
    }

    #[test]
    fn dot_product_after_warmup() {
        let mut p = NlmsPredictor::univariate(2, 0.5, 1.0);
        warm(&mut p, &[2.0, 4.0]);
        p.set_weights(0, &[0.5, 0.5]);
        assert_eq!(p.predict(0), 3.0);
    }

    #[test]
    fn warmup_returns_previous_reconstruction() {
        let mut p = NlmsPredictor::univariate(3, 0.5, 1.0);
        assert_eq!(p.predict(0), 0.0);
        p.update(0, 5.0);
        assert_eq!(p.predict(0), 5.0);
        p.update(0, 6.0);
        assert_eq!(p.predict(0), 6.0);
        p.update(0, 7.0);
        // Window is full now; the filter output takes over.
        assert_eq!(p.predict(0), dot(p.weights(0), &[5.0, 6.0, 7.0]));
    }

    #[test]
    fn zero_window_update_uses_regularizer() {
        let mut p = NlmsPredictor::univariate(4, 0.5, 1.0);
        p.predict(0);
        p.update(0, 2.0);
        // Window was all zeros: the weights cannot move, but nothing blows up.
        assert_eq!(p.weights(0), &[0.0; 4]);
        p.predict(0);
        p.update(0, 2.0);
        // e = 2, energy = 4, scale = 0.5 * 2 / 5 = 0.2; only the newest tap is non-zero.
        assert_eq!(p.weights(0), &[0.0, 0.0, 0.0, 0.4]);
    }

    #[test]
    fn zero_error_keeps_weights() {
        let mut p = NlmsPredictor::univariate(2, 0.5, 1.0);
        warm(&mut p, &[1.0, 1.0]);
        p.set_weights(0, &[0.25, 0.75]);
        let y = p.predict(0);
        p.update(0, y);
        assert_eq!(p.weights(0), &[0.25, 0.75]);
    }

    #[test]
    fn non_finite_input_keeps_state_finite() {
        let mut p = NlmsPredictor::univariate(4, 0.5, 1.0);
        warm(&mut p, &[1.0, 2.0, 3.0, 4.0, 5.0]);
        let before = p.weights(0).to_vec();
        p.predict(0);
        p.update(0, f32::NAN);
        assert_eq!(p.weights(0), &before[..]);
        assert_eq!(p.histories[0].last(), 5.0);
        warm(&mut p, &[1e30, -1e30, 3e38, f32::INFINITY]);
        assert!(p.weights(0).iter().all(|w| w.is_finite()));
        assert!(p.predict(0).is_finite());
    }

    #[test]
    fn multivariate_window_layout() {
        // k = 5, v = 2: two taps per variable, the target gets the spare one.
        let mut p = NlmsPredictor::new(5, 2, 0.5, 1.0);
        for t in 1..=3 {
            p.predict(0);
            p.update(0, t as f32);
            p.predict(1);
            p.update(1, 10.0 * t as f32);
        }
        p.predict(0);
        assert_eq!(p.window(), &[1.0, 2.0, 3.0, 20.0, 30.0]);
        p.update(0, 4.0);
        p.predict(1);
        // Variable 0 already has its value for the current timestep.
        assert_eq!(p.window(), &[3.0, 4.0, 10.0, 20.0, 30.0]);
    }

    #[test]
    fn single_variable_matches_univariate_bits() {
        let mut a = NlmsPredictor::univariate(8, 0.5, 1.0);
        let mut b = NlmsPredictor::new(8, 1, 0.5, 1.0);
        for t in 0..500 {
            let x = (t as f32 * 0.05).sin() * 3.0;
            assert_eq!(a.predict(0).to_bits(), b.predict(0).to_bits());
            a.update(0, x);
            b.update(0, x);
        }
        assert_eq!(a.digest(), b.digest());
    }
}
