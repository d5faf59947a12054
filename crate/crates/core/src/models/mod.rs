//! Built-in model pairs and the registry that names them.

pub mod kinetics;
pub mod michaelis_menten;
pub mod ode;
pub mod registry;

pub use kinetics::{integrate_kinetics, kinetics_pair, KineticsInput, KineticsParams};
pub use michaelis_menten::{mm_eval, mm_pair, modmm_eval};
pub use ode::IntegratorTol;
pub use registry::{registry_lookup, ModelParams, Registry, KINETICS_REV_VS_IRREV, MM_VS_MODMM};
