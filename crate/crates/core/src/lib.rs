//! Max-min neural network operators with sigmoidal bell kernels.
//!
//! The crate implements three max-min operator families (sampling,
//! Kantorovich and Durrmeyer) together with their linear counterparts,
//! the kernel machinery they are built from, quantitative error bounds,
//! and the signal handling needed for denoising experiments.
//!
//! ```
//! use maxmin_core::prelude::*;
//!
//! let bell = BellKernel::new(Sigmoid::logistic(1.0), 1.0);
//! let cfg = OperatorConfig::new(Family::MaxMinDurrmeyer, 50, bell)
//!     .with_chi(ChiKernel::rational(1.0));
//! let f = Signal::sine_wave(0.0, 1.0, 0.45, 0.25, 4.0).unwrap();
//! let ys = evaluate(&cfg, &f, &[0.25, 0.5]).unwrap();
//! assert!(ys.iter().all(|y| (0.0..=1.0).contains(y)));
//! ```

pub mod algebra;
pub mod cli;
pub mod error;
pub mod estimates;
pub mod kernels;
pub mod operators;
pub mod quadrature;
pub mod signal;

pub use error::{Error, Result};

pub mod prelude {
    pub use crate::error::{Error, Result};
    pub use crate::estimates::{
        convergence_study, modulus_of_continuity, sup_error_bound, BoundInputs, BoundSettings,
        ConvergenceRow,
    };
    pub use crate::kernels::{
        BellKernel, ChiKernel, ChiKind, KernelConstants, Moment, Sigmoid, SigmoidKind,
    };
    pub use crate::operators::{
        coefficients, complement_double_pass, denoise, evaluate, CoefficientVector, EvalStrategy,
        Family, OperatorConfig,
    };
    pub use crate::quadrature::{integrate_adaptive, QuadratureConfig};
    pub use crate::signal::{
        add_noise, error_report, metric_grid, normalize_unit, AffineMap, ErrorReport,
        Interpolation, NoiseKind, NoiseSpec, Signal,
    };
}
