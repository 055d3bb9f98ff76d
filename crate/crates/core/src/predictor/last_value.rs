use super::{Fnv, Predictor};

/// Predicts the previous reconstruction of the same variable (`0.0` first).
#[derive(Debug, Clone)]
pub struct LastValuePredictor {
    last: Vec<f32>,
}

impl LastValuePredictor {
    pub fn new(vars: usize) -> Self {
        Self {
            last: vec![0.0; vars],
        }
    }
}

impl Predictor for LastValuePredictor {
    fn predict(&mut self, var: usize) -> f32 {
        self.last[var]
    }

    fn update(&mut self, var: usize, reconstructed: f32) {
        if reconstructed.is_finite() {
            self.last[var] = reconstructed;
        }
    }

    fn digest(&self) -> u64 {
        let mut h = Fnv::new();
        h.floats(&self.last);
        h.finish()
    }
}
