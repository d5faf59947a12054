//! Cached matrix of squared distances over candidates x parameter cuts.

use rayon::prelude::*;

use crate::design::DesignPoint;
use crate::error::{Error, Result};
use crate::lp::WeightLpInstance;
use crate::model::ModelPair;

pub(crate) struct PhiTable<'a> {
    pair: &'a ModelPair,
    candidates: Vec<DesignPoint>,
    references: Vec<Vec<f64>>,
    thetas: Vec<Vec<f64>>,
    /// `phi[i][j] = phi(candidates[i], thetas[j])`.
    phi: Vec<Vec<f64>>,
}

impl<'a> PhiTable<'a> {
    pub fn new(pair: &'a ModelPair, candidates: &[DesignPoint]) -> Result<Self> {
        if candidates.is_empty() {
            return Err(Error::InvalidDesign("candidate set is empty".into()));
        }
        let mut table = Self {
            pair,
            candidates: Vec::new(),
            references: Vec::new(),
            thetas: Vec::new(),
            phi: Vec::new(),
        };
        for x in candidates {
            if table.contains(x) {
                return Err(Error::InvalidDesign(format!("candidate {x} appears twice")));
            }
            table.add_candidate(x.clone())?;
        }
        Ok(table)
    }

    pub fn pair(&self) -> &'a ModelPair {
        self.pair
    }

    pub fn candidates(&self) -> &[DesignPoint] {
        &self.candidates
    }

    pub fn thetas(&self) -> &[Vec<f64>] {
        &self.thetas
    }

    pub fn contains(&self, x: &DesignPoint) -> bool {
        self.candidates.iter().any(|c| c.same_as(x))
    }

    pub fn add_candidate(&mut self, x: DesignPoint) -> Result<()> {
        let reference = self.pair.reference(&x)?;
        let row = self
            .thetas
            .par_iter()
            .map(|th| self.pair.squared_distance_to(&reference, &x, th))
            .collect::<Result<Vec<_>>>()?;
        self.candidates.push(x);
        self.references.push(reference);
        self.phi.push(row);
        Ok(())
    }

    fn add_theta(&mut self, theta: Vec<f64>) -> Result<()> {
        let column = self
            .candidates
            .par_iter()
            .zip(&self.references)
            .map(|(x, r)| self.pair.squared_distance_to(r, x, &theta))
            .collect::<Result<Vec<_>>>()?;
        for (row, v) in self.phi.iter_mut().zip(column) {
            row.push(v);
        }
        self.thetas.push(theta);
        Ok(())
    }

    /// Makes the columns match `thetas`, which must extend the current list.
    pub fn sync_thetas(&mut self, thetas: &[Vec<f64>]) -> Result<()> {
        if thetas.len() < self.thetas.len() || thetas[..self.thetas.len()] != self.thetas[..] {
            self.thetas.clear();
            self.phi.iter_mut().for_each(Vec::clear);
        }
        for th in &thetas[self.thetas.len()..] {
            self.add_theta(th.clone())?;
        }
        Ok(())
    }

    pub fn lp_instance(&self) -> Result<WeightLpInstance> {
        WeightLpInstance::new(self.phi.clone())
    }
}
