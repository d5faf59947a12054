//! Lookup of model pairs by name, with reference parameters from a key-value map.

use std::collections::BTreeMap;
use std::sync::Arc;

use super::kinetics::{kinetics_pair, KineticsParams};
use super::michaelis_menten::mm_pair;
use super::ode::IntegratorTol;
use crate::error::{Error, Result};
use crate::model::ModelPair;

pub type ModelParams = BTreeMap<String, f64>;

pub type ModelBuilder = Arc<dyn Fn(&ModelParams) -> Result<ModelPair> + Send + Sync>;

pub const MM_VS_MODMM: &str = "mm_vs_modmm";
pub const KINETICS_REV_VS_IRREV: &str = "kinetics_rev_vs_irrev";

/// Reads the allowed keys from `params`, falling back to the defaults, and
/// rejects anything else.
fn take(params: &ModelParams, allowed: &[(&str, f64)]) -> Result<Vec<f64>> {
    if let Some(key) = params.keys().find(|k| !allowed.iter().any(|(a, _)| a == k)) {
        let names: Vec<&str> = allowed.iter().map(|(a, _)| *a).collect();
        return Err(Error::InvalidParameter {
            name: key.clone(),
            reason: format!("not a parameter of this model (expected one of {})", names.join(", ")),
        });
    }
    allowed
        .iter()
        .map(|(name, default)| {
            let v = params.get(*name).copied().unwrap_or(*default);
            if v.is_finite() {
                Ok(v)
            } else {
                Err(Error::InvalidParameter { name: (*name).into(), reason: "not finite".into() })
            }
        })
        .collect()
}

fn build_mm(params: &ModelParams) -> Result<ModelPair> {
    let p = take(params, &[("V", 1.0), ("K", 1.0), ("F", 0.1)])?;
    mm_pair(p[0], p[1], p[2])
}

fn build_kinetics(params: &ModelParams) -> Result<ModelPair> {
    let r = KineticsParams::REFERENCE;
    let d = IntegratorTol::default();
    let p = take(
        params,
        &[
            ("k1", r.k1),
            ("k2", r.k2),
            ("k3", r.k3),
            ("n1", r.n1),
            ("n2", r.n2),
            ("n3", r.n3),
            ("ode_rtol", d.rel),
            ("ode_atol", d.abs),
        ],
    )?;
    for (name, v) in [("ode_rtol", p[6]), ("ode_atol", p[7])] {
        if v <= 0.0 {
            return Err(Error::InvalidParameter { name: name.into(), reason: "must be positive".into() });
        }
    }
    let reference = KineticsParams { k1: p[0], k2: p[1], k3: p[2], n1: p[3], n2: p[4], n3: p[5] };
    kinetics_pair(reference, IntegratorTol { rel: p[6], abs: p[7] })
}

/// Named model pairs. Starts with the two built-in pairs.
#[derive(Clone)]
pub struct Registry {
    builders: BTreeMap<String, ModelBuilder>,
}

impl Default for Registry {
    fn default() -> Self {
        let mut r = Self { builders: BTreeMap::new() };
        r.register(MM_VS_MODMM, build_mm);
        r.register(KINETICS_REV_VS_IRREV, build_kinetics);
        r
    }
}

impl Registry {
    /// Adds or replaces a model pair under `name`.
    pub fn register<F>(&mut self, name: &str, builder: F)
    where
        F: Fn(&ModelParams) -> Result<ModelPair> + Send + Sync + 'static,
    {
        self.builders.insert(name.to_string(), Arc::new(builder));
    }

    pub fn names(&self) -> impl Iterator<Item = &str> {
        self.builders.keys().map(String::as_str)
    }

    pub fn lookup(&self, name: &str, params: &ModelParams) -> Result<ModelPair> {
        let builder = self
            .builders
            .get(name)
            .ok_or_else(|| Error::UnknownModel(name.to_string()))?;
        builder(params)
    }
}

/// Looks up one of the built-in model pairs.
pub fn registry_lookup(name: &str, params: &ModelParams) -> Result<ModelPair> {
    Registry::default().lookup(name, params)
}
