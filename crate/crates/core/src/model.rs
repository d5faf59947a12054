//! Reference/alternative model pairs.
//!
//! Models receive the design point and a parameter vector. The reference
//! model's parameters are fixed when the pair is built; the alternative's are
//! the ones being fitted. Single-response models can use the scalar path,
//! which evaluates the squared distance without any buffers.

use std::fmt;
use std::sync::Arc;

use crate::design::{DesignPoint, ParameterSpace};
use crate::error::{Error, Result};

/// Failure inside a model evaluation, e.g. a diverging ODE.
#[derive(Clone, Debug, PartialEq)]
pub struct ModelError(pub String);

impl fmt::Display for ModelError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

impl std::error::Error for ModelError {}

impl From<Error> for ModelError {
    fn from(e: Error) -> Self {
        ModelError(e.to_string())
    }
}

pub trait ScalarModel: Send + Sync {
    fn eval(&self, x: &[f64], theta: &[f64]) -> std::result::Result<f64, ModelError>;
}

impl<F> ScalarModel for F
where
    F: Fn(&[f64], &[f64]) -> f64 + Send + Sync,
{
    fn eval(&self, x: &[f64], theta: &[f64]) -> std::result::Result<f64, ModelError> {
        Ok(self(x, theta))
    }
}

pub trait VectorModel: Send + Sync {
    fn response_dim(&self) -> usize;

    /// Writes the `response_dim()` outputs into `out`.
    fn eval_into(
        &self,
        x: &[f64],
        theta: &[f64],
        out: &mut [f64],
    ) -> std::result::Result<(), ModelError>;
}

/// Presents a scalar model as a one-component vector model.
pub struct Vectorized<M>(pub M);

impl<M: ScalarModel> VectorModel for Vectorized<M> {
    fn response_dim(&self) -> usize {
        1
    }

    fn eval_into(
        &self,
        x: &[f64],
        theta: &[f64],
        out: &mut [f64],
    ) -> std::result::Result<(), ModelError> {
        out[0] = self.0.eval(x, theta)?;
        Ok(())
    }
}

#[derive(Clone)]
enum Responses {
    Scalar {
        reference: Arc<dyn ScalarModel>,
        alternative: Arc<dyn ScalarModel>,
    },
    Vector {
        reference: Arc<dyn VectorModel>,
        alternative: Arc<dyn VectorModel>,
        dim: usize,
    },
}

/// The true model `f1` (parameters fixed) and the rival `f2(., theta)`.
#[derive(Clone)]
pub struct ModelPair {
    responses: Responses,
    reference_params: Vec<f64>,
    parameter_space: ParameterSpace,
}

impl fmt::Debug for ModelPair {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("ModelPair")
            .field("response_dim", &self.response_dim())
            .field("reference_params", &self.reference_params)
            .field("parameter_space", &self.parameter_space)
            .finish()
    }
}

impl ModelPair {
    pub fn scalar(
        reference: impl ScalarModel + 'static,
        reference_params: Vec<f64>,
        alternative: impl ScalarModel + 'static,
        parameter_space: ParameterSpace,
    ) -> Self {
        Self {
            responses: Responses::Scalar {
                reference: Arc::new(reference),
                alternative: Arc::new(alternative),
            },
            reference_params,
            parameter_space,
        }
    }

    pub fn vector(
        reference: impl VectorModel + 'static,
        reference_params: Vec<f64>,
        alternative: impl VectorModel + 'static,
        parameter_space: ParameterSpace,
    ) -> Result<Self> {
        let dim = reference.response_dim();
        if dim == 0 || alternative.response_dim() != dim {
            return Err(Error::Dimension(format!(
                "reference returns {dim} responses but alternative returns {}",
                alternative.response_dim()
            )));
        }
        Ok(Self {
            responses: Responses::Vector {
                reference: Arc::new(reference),
                alternative: Arc::new(alternative),
                dim,
            },
            reference_params,
            parameter_space,
        })
    }

    pub fn response_dim(&self) -> usize {
        match &self.responses {
            Responses::Scalar { .. } => 1,
            Responses::Vector { dim, .. } => *dim,
        }
    }

    pub fn parameter_space(&self) -> &ParameterSpace {
        &self.parameter_space
    }

    pub fn reference_params(&self) -> &[f64] {
        &self.reference_params
    }

    pub fn with_parameter_space(mut self, space: ParameterSpace) -> Result<Self> {
        if space.dim() != self.parameter_space.dim() {
            return Err(Error::Dimension(format!(
                "parameter space override has dimension {} but the model has {}",
                space.dim(),
                self.parameter_space.dim()
            )));
        }
        self.parameter_space = space;
        Ok(self)
    }

    fn eval_error(x: &[f64], theta: &[f64], reason: impl Into<String>) -> Error {
        Error::Evaluation {
            x: x.to_vec(),
            theta: theta.to_vec(),
            reason: reason.into(),
        }
    }

    fn check_finite(x: &[f64], theta: &[f64], out: &[f64]) -> Result<()> {
        if out.iter().all(|v| v.is_finite()) {
            Ok(())
        } else {
            Err(Self::eval_error(x, theta, "model returned a non-finite value"))
        }
    }

    /// `f1(x)` into `out` (length `response_dim()`).
    pub fn reference_into(&self, x: &[f64], out: &mut [f64]) -> Result<()> {
        let theta = &self.reference_params;
        match &self.responses {
            Responses::Scalar { reference, .. } => {
                out[0] = reference
                    .eval(x, theta)
                    .map_err(|e| Self::eval_error(x, theta, e.0))?;
            }
            Responses::Vector { reference, .. } => reference
                .eval_into(x, theta, out)
                .map_err(|e| Self::eval_error(x, theta, e.0))?,
        }
        Self::check_finite(x, theta, out)
    }

    /// `f2(x, theta)` into `out` (length `response_dim()`).
    pub fn alternative_into(&self, x: &[f64], theta: &[f64], out: &mut [f64]) -> Result<()> {
        match &self.responses {
            Responses::Scalar { alternative, .. } => {
                out[0] = alternative
                    .eval(x, theta)
                    .map_err(|e| Self::eval_error(x, theta, e.0))?;
            }
            Responses::Vector { alternative, .. } => alternative
                .eval_into(x, theta, out)
                .map_err(|e| Self::eval_error(x, theta, e.0))?,
        }
        Self::check_finite(x, theta, out)
    }

    pub fn reference(&self, x: &DesignPoint) -> Result<Vec<f64>> {
        let mut out = vec![0.0; self.response_dim()];
        self.reference_into(x.coords(), &mut out)?;
        Ok(out)
    }

    /// Squared distance given a precomputed reference response.
    pub fn squared_distance_to(
        &self,
        reference: &[f64],
        x: &DesignPoint,
        theta: &[f64],
    ) -> Result<f64> {
        let x = x.coords();
        match &self.responses {
            Responses::Scalar { alternative, .. } => {
                let b = alternative
                    .eval(x, theta)
                    .map_err(|e| Self::eval_error(x, theta, e.0))?;
                Self::check_finite(x, theta, &[b])?;
                let d = reference[0] - b;
                Ok(d * d)
            }
            Responses::Vector { dim, .. } => {
                let mut alt = vec![0.0; *dim];
                self.alternative_into(x, theta, &mut alt)?;
                Ok(sum_sq_diff(reference, &alt))
            }
        }
    }

    /// `||f1(x) - f2(x, theta)||^2`.
    pub fn squared_distance(&self, x: &DesignPoint, theta: &[f64]) -> Result<f64> {
        let xc = x.coords();
        match &self.responses {
            Responses::Scalar {
                reference,
                alternative,
            } => {
                let a = reference
                    .eval(xc, &self.reference_params)
                    .map_err(|e| Self::eval_error(xc, &self.reference_params, e.0))?;
                let b = alternative
                    .eval(xc, theta)
                    .map_err(|e| Self::eval_error(xc, theta, e.0))?;
                Self::check_finite(xc, theta, &[a, b])?;
                let d = a - b;
                Ok(d * d)
            }
            Responses::Vector { dim, .. } => {
                let mut refv = vec![0.0; *dim];
                self.reference_into(xc, &mut refv)?;
                self.squared_distance_to(&refv, x, theta)
            }
        }
    }
}

fn sum_sq_diff(a: &[f64], b: &[f64]) -> f64 {
    let mut s = 0.0;
    for (x, y) in a.iter().zip(b) {
        let d = x - y;
        s += d * d;
    }
    s
}
