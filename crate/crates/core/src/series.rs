use crate::error::{Error, Result};

/// A dense `n x v` matrix of `f32` samples stored row-major: timestep `t`,
/// variable `j` lives at `values[t * v + j]`.
///
/// Non-finite samples are allowed; the codec stores them verbatim.
#[derive(Debug, Clone, PartialEq)]
pub struct TimeSeries {
    values: Vec<f32>,
    vars: usize,
}

impl TimeSeries {
    pub fn new(values: Vec<f32>, vars: usize) -> Result<Self> {
        if vars == 0 {
            return Err(Error::Shape("a series needs at least one variable".into()));
        }
        if !values.len().is_multiple_of(vars) {
            return Err(Error::Shape(format!(
                "{} values do not divide into {} variables",
                values.len(),
                vars
            )));
        }
        Ok(Self { values, vars })
    }

    pub fn univariate(values: Vec<f32>) -> Self {
        Self { values, vars: 1 }
    }

    /// Builds a series from one vector per variable. All columns must have the same length.
    pub fn from_columns(columns: &[Vec<f32>]) -> Result<Self> {
        let vars = columns.len();
        if vars == 0 {
            return Err(Error::Shape("a series needs at least one variable".into()));
        }
        let n = columns[0].len();
        if columns.iter().any(|c| c.len() != n) {
            return Err(Error::Shape("columns have different lengths".into()));
        }
        let mut values = Vec::with_capacity(n * vars);
        for t in 0..n {
            values.extend(columns.iter().map(|c| c[t]));
        }
        Ok(Self { values, vars })
    }

    pub fn empty(vars: usize) -> Result<Self> {
        Self::new(Vec::new(), vars)
    }

    /// Number of timesteps.
    pub fn len(&self) -> usize {
        self.values.len() / self.vars
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    /// Number of variables per timestep.
    pub fn vars(&self) -> usize {
        self.vars
    }

    pub fn values(&self) -> &[f32] {
        &self.values
    }

    pub fn into_values(self) -> Vec<f32> {
        self.values
    }

    pub fn get(&self, t: usize, var: usize) -> f32 {
        self.values[t * self.vars + var]
    }

    pub fn column(&self, var: usize) -> Vec<f32> {
        self.values
            .iter()
            .skip(var)
            .step_by(self.vars)
            .copied()
            .collect()
    }

    /// Keeps only the listed variables, in the listed order.
    pub fn select(&self, columns: &[usize]) -> Result<Self> {
        if let Some(&bad) = columns.iter().find(|&&c| c >= self.vars) {
            return Err(Error::Shape(format!(
                "column {bad} out of range for {} variables",
                self.vars
            )));
        }
        let cols: Vec<Vec<f32>> = columns.iter().map(|&c| self.column(c)).collect();
        Self::from_columns(&cols)
    }

    /// Bitwise equality, so that NaN payloads compare as stored.
    pub fn bit_eq(&self, other: &Self) -> bool {
        self.vars == other.vars
            && self.values.len() == other.values.len()
            && self
                .values
                .iter()
                .zip(&other.values)
                .all(|(a, b)| a.to_bits() == b.to_bits())
    }
}
