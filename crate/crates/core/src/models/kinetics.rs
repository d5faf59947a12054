//! Consecutive reaction A -> B -> C with an optional reverse step B -> A,
//! all rates in power-law form. The design point is `(a0, b0, c0, t)` and the
//! response is the three concentrations at time `t`.

use super::ode::{integrate, IntegratorTol};
use crate::design::ParameterSpace;
use crate::error::{Error, Result};
use crate::model::{ModelError, ModelPair, VectorModel};

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct KineticsParams {
    pub k1: f64,
    pub k2: f64,
    pub k3: f64,
    pub n1: f64,
    pub n2: f64,
    pub n3: f64,
}

impl KineticsParams {
    pub const REFERENCE: KineticsParams = KineticsParams {
        k1: 0.7,
        k2: 0.2,
        k3: 0.1,
        n1: 2.0,
        n2: 2.0,
        n3: 1.0,
    };

    fn validate(&self) -> Result<()> {
        let named = [
            ("k1", self.k1),
            ("k2", self.k2),
            ("k3", self.k3),
            ("n1", self.n1),
            ("n2", self.n2),
            ("n3", self.n3),
        ];
        for (name, v) in named {
            if !v.is_finite() {
                return Err(Error::InvalidParameter { name: name.into(), reason: "not finite".into() });
            }
        }
        for (name, v) in &named[..3] {
            if *v < 0.0 {
                return Err(Error::InvalidParameter { name: (*name).into(), reason: "rate constants must be nonnegative".into() });
            }
        }
        for (name, v) in &named[3..] {
            if *v <= 0.0 {
                return Err(Error::InvalidParameter { name: (*name).into(), reason: "reaction orders must be positive".into() });
            }
        }
        Ok(())
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct KineticsInput {
    pub a0: f64,
    pub b0: f64,
    pub c0: f64,
    pub t: f64,
}

impl KineticsInput {
    pub fn from_coords(x: &[f64]) -> Self {
        Self { a0: x[0], b0: x[1], c0: x[2], t: x[3] }
    }
}

fn pow_rate(c: f64, n: f64) -> f64 {
    let c = c.max(0.0);
    if n == 1.0 {
        c
    } else if n == 2.0 {
        c * c
    } else {
        c.powf(n)
    }
}

/// Concentrations `(a, b, c)` at `input.t`, clamped at zero.
pub fn integrate_kinetics(
    params: &KineticsParams,
    input: &KineticsInput,
    tol: IntegratorTol,
) -> Result<[f64; 3]> {
    let p = *params;
    let rhs = move |_t: f64, y: &[f64], dy: &mut [f64]| {
        let r1 = p.k1 * pow_rate(y[0], p.n1);
        let r2 = p.k2 * pow_rate(y[1], p.n2);
        let r3 = if p.k3 == 0.0 { 0.0 } else { p.k3 * pow_rate(y[1], p.n3) };
        dy[0] = -r1 + r3;
        dy[1] = r1 - r2 - r3;
        dy[2] = r2;
    };
    let y = integrate(rhs, &[input.a0, input.b0, input.c0], input.t, tol)?;
    Ok([y[0].max(0.0), y[1].max(0.0), y[2].max(0.0)])
}

/// Reversible model: parameters `(k1, k2, k3, n1, n2, n3)`.
#[derive(Clone, Copy, Debug)]
pub struct ReversibleKinetics {
    pub tol: IntegratorTol,
}

/// Irreversible model (`k3 = 0`): parameters `(k1, k2, n1, n2)`.
#[derive(Clone, Copy, Debug)]
pub struct IrreversibleKinetics {
    pub tol: IntegratorTol,
}

fn write_out(r: Result<[f64; 3]>, out: &mut [f64]) -> std::result::Result<(), ModelError> {
    out.copy_from_slice(&r?);
    Ok(())
}

impl VectorModel for ReversibleKinetics {
    fn response_dim(&self) -> usize {
        3
    }

    fn eval_into(&self, x: &[f64], p: &[f64], out: &mut [f64]) -> std::result::Result<(), ModelError> {
        let params = KineticsParams { k1: p[0], k2: p[1], k3: p[2], n1: p[3], n2: p[4], n3: p[5] };
        write_out(integrate_kinetics(&params, &KineticsInput::from_coords(x), self.tol), out)
    }
}

impl VectorModel for IrreversibleKinetics {
    fn response_dim(&self) -> usize {
        3
    }

    fn eval_into(&self, x: &[f64], p: &[f64], out: &mut [f64]) -> std::result::Result<(), ModelError> {
        let params = KineticsParams { k1: p[0], k2: p[1], k3: 0.0, n1: p[2], n2: p[3], n3: 1.0 };
        write_out(integrate_kinetics(&params, &KineticsInput::from_coords(x), self.tol), out)
    }
}

pub const DEFAULT_THETA_LOWER: [f64; 4] = [0.5, 0.05, 1.5, 1.5];
pub const DEFAULT_THETA_UPPER: [f64; 4] = [1.0, 0.5, 3.5, 3.0];

/// Levels of the bundled design lattice over `(a0, b0, c0, t)`.
pub fn default_lattice_levels() -> Vec<Vec<f64>> {
    vec![
        vec![0.5, 0.7, 0.9],
        vec![0.1, 0.2, 0.3],
        vec![0.0, 0.15, 0.3],
        vec![2.0, 4.0, 6.0, 8.0, 10.0],
    ]
}

pub fn kinetics_pair(reference: KineticsParams, tol: IntegratorTol) -> Result<ModelPair> {
    reference.validate()?;
    let space = ParameterSpace::new(DEFAULT_THETA_LOWER.to_vec(), DEFAULT_THETA_UPPER.to_vec())?;
    let r = reference;
    ModelPair::vector(
        ReversibleKinetics { tol },
        vec![r.k1, r.k2, r.k3, r.n1, r.n2, r.n3],
        IrreversibleKinetics { tol },
        space,
    )
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::design::{DesignPoint, DesignSpace};

    fn linear_chain(k1: f64, k2: f64, x: KineticsInput) -> [f64; 3] {
        let KineticsInput { a0, b0, c0, t } = x;
        let a = a0 * (-k1 * t).exp();
        let b = b0 * (-k2 * t).exp() + a0 * k1 / (k2 - k1) * ((-k1 * t).exp() - (-k2 * t).exp());
        [a, b, a0 + b0 + c0 - a - b]
    }

    #[test]
    fn linear_chain_matches_closed_form() {
        let params = KineticsParams { k1: 0.7, k2: 0.2, k3: 0.0, n1: 1.0, n2: 1.0, n3: 1.0 };
        for x in [
            KineticsInput { a0: 0.5, b0: 0.1, c0: 0.0, t: 10.0 },
            KineticsInput { a0: 0.9, b0: 0.3, c0: 0.3, t: 2.0 },
            KineticsInput { a0: 0.7, b0: 0.0, c0: 0.15, t: 6.5 },
        ] {
            let got = integrate_kinetics(&params, &x, IntegratorTol::default()).unwrap();
            let want = linear_chain(0.7, 0.2, x);
            for i in 0..3 {
                assert!((got[i] - want[i]).abs() < 1e-7, "{got:?} vs {want:?}");
            }
        }
    }

    #[test]
    fn tiny_time_returns_initial_state() {
        let x = KineticsInput { a0: 0.5, b0: 0.1, c0: 0.3, t: 1e-12 };
        let y = integrate_kinetics(&KineticsParams::REFERENCE, &x, IntegratorTol::default()).unwrap();
        assert!((y[0] - 0.5).abs() < 1e-11 && (y[1] - 0.1).abs() < 1e-11 && (y[2] - 0.3).abs() < 1e-11);
    }

    #[test]
    fn mass_is_conserved() {
        let x = KineticsInput { a0: 0.5, b0: 0.1, c0: 0.0, t: 10.0 };
        let y = integrate_kinetics(&KineticsParams::REFERENCE, &x, IntegratorTol::default()).unwrap();
        assert!((y.iter().sum::<f64>() - 0.6).abs() < 1e-8);
        assert!(y.iter().all(|v| *v >= 0.0));
    }

    #[test]
    fn halving_tolerance_changes_little() {
        let lattice = DesignSpace::new_lattice(default_lattice_levels()).unwrap();
        let coarse = IntegratorTol::default();
        let fine = IntegratorTol { rel: coarse.rel / 2.0, abs: coarse.abs };
        for p in lattice.lattice_points() {
            let x = KineticsInput::from_coords(p.coords());
            let a = integrate_kinetics(&KineticsParams::REFERENCE, &x, coarse).unwrap();
            let b = integrate_kinetics(&KineticsParams::REFERENCE, &x, fine).unwrap();
            for i in 0..3 {
                assert!((a[i] - b[i]).abs() < coarse.rel, "{p}: {a:?} vs {b:?}");
            }
        }
    }

    #[test]
    fn pair_shape() {
        let pair = kinetics_pair(KineticsParams::REFERENCE, IntegratorTol::default()).unwrap();
        assert_eq!(pair.response_dim(), 3);
        assert_eq!(pair.parameter_space().dim(), 4);
        let x = DesignPoint::new(vec![0.5, 0.1, 0.0, 2.0]).unwrap();
        assert!(pair.squared_distance(&x, &[0.7, 0.2, 2.0, 2.0]).unwrap() > 0.0);
    }

    #[test]
    fn rejects_negative_rates() {
        let bad = KineticsParams { k1: -0.1, ..KineticsParams::REFERENCE };
        assert!(matches!(
            kinetics_pair(bad, IntegratorTol::default()),
            Err(Error::InvalidParameter { .. })
        ));
    }
}
