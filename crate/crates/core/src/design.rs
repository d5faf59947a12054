//! Designs, design spaces and parameter spaces.
//!
//! A [`Design`] is a discrete probability measure over design points. Points
//! are compared after canonical rounding to 12 significant digits, so the same
//! experiment reached through different arithmetic paths is merged instead of
//! appearing twice.

use std::cmp::Ordering;
use std::fmt;

use crate::error::{Error, Result};

/// Absolute tolerance on the sum of design weights.
pub const WEIGHT_SUM_TOL: f64 = 1e-12;

/// Default threshold below which [`prune_design`] drops a point.
pub const DEFAULT_PRUNE_THRESHOLD: f64 = 1e-6;

/// Rounds to 12 significant digits. Used only for identity checks.
pub fn canonical(v: f64) -> f64 {
    if v == 0.0 || !v.is_finite() {
        return v + 0.0;
    }
    format!("{v:.11e}").parse::<f64>().unwrap_or(v) + 0.0
}

/// A single experiment: one coordinate per design variable.
#[derive(Clone, Debug, PartialEq)]
pub struct DesignPoint(Vec<f64>);

impl DesignPoint {
    pub fn new(coords: Vec<f64>) -> Result<Self> {
        if coords.is_empty() {
            return Err(Error::InvalidDesign("design point has no coordinates".into()));
        }
        if let Some(c) = coords.iter().find(|c| !c.is_finite()) {
            return Err(Error::InvalidDesign(format!(
                "design point coordinate {c} is not finite"
            )));
        }
        Ok(Self(coords))
    }

    pub fn scalar(x: f64) -> Self {
        Self(vec![x])
    }

    pub fn coords(&self) -> &[f64] {
        &self.0
    }

    pub fn dim(&self) -> usize {
        self.0.len()
    }

    pub fn into_inner(self) -> Vec<f64> {
        self.0
    }

    /// Identity key: coordinates after canonical rounding.
    pub fn key(&self) -> Vec<u64> {
        self.0.iter().map(|&c| canonical(c).to_bits()).collect()
    }

    pub fn same_as(&self, other: &DesignPoint) -> bool {
        self.dim() == other.dim() && self.key() == other.key()
    }

    /// Lexicographic order on coordinates, used for deterministic tie-breaks.
    pub fn lex_cmp(&self, other: &DesignPoint) -> Ordering {
        lex_cmp(&self.0, &other.0)
    }
}

pub(crate) fn lex_cmp(a: &[f64], b: &[f64]) -> Ordering {
    for (x, y) in a.iter().zip(b) {
        match x.partial_cmp(y) {
            Some(Ordering::Equal) | None => continue,
            Some(ord) => return ord,
        }
    }
    a.len().cmp(&b.len())
}

impl From<f64> for DesignPoint {
    fn from(x: f64) -> Self {
        Self::scalar(x)
    }
}

impl fmt::Display for DesignPoint {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "(")?;
        for (i, c) in self.0.iter().enumerate() {
            if i > 0 {
                write!(f, ", ")?;
            }
            write!(f, "{c}")?;
        }
        write!(f, ")")
    }
}

/// Discrete design: points with nonnegative weights summing to one.
///
/// Zero weights are allowed; such points are candidates but not part of the
/// support. Duplicate points are merged on construction.
#[derive(Clone, Debug, PartialEq)]
pub struct Design {
    points: Vec<DesignPoint>,
    weights: Vec<f64>,
}

impl Design {
    pub fn new(points: Vec<DesignPoint>, weights: Vec<f64>) -> Result<Self> {
        if points.is_empty() {
            return Err(Error::InvalidDesign("design has no points".into()));
        }
        if points.len() != weights.len() {
            return Err(Error::InvalidDesign(format!(
                "{} points but {} weights",
                points.len(),
                weights.len()
            )));
        }
        let dim = points[0].dim();
        if let Some(p) = points.iter().find(|p| p.dim() != dim) {
            return Err(Error::Dimension(format!(
                "design mixes point dimensions {dim} and {}",
                p.dim()
            )));
        }
        if let Some(w) = weights.iter().find(|w| !w.is_finite() || **w < 0.0) {
            return Err(Error::InvalidDesign(format!("weight {w} is negative or not finite")));
        }
        let sum: f64 = weights.iter().sum();
        if (sum - 1.0).abs() > WEIGHT_SUM_TOL {
            return Err(Error::InvalidDesign(format!("weights sum to {sum}, expected 1")));
        }
        Ok(Self::merged(points, weights))
    }

    /// Builds a design from nonnegative weights with a positive sum, rescaling
    /// them onto the simplex.
    pub fn normalized(points: Vec<DesignPoint>, weights: Vec<f64>) -> Result<Self> {
        let sum: f64 = weights.iter().filter(|w| w.is_finite()).sum();
        if !(sum > 0.0) {
            return Err(Error::InvalidDesign("weights have no positive mass".into()));
        }
        let scaled = weights.iter().map(|w| w / sum).collect::<Vec<_>>();
        let scaled_sum: f64 = scaled.iter().sum();
        let scaled = scaled.into_iter().map(|w| w / scaled_sum).collect();
        Self::new(points, scaled)
    }

    pub fn uniform(points: Vec<DesignPoint>) -> Result<Self> {
        let n = points.len().max(1);
        Self::normalized(points, vec![1.0 / n as f64; n])
    }

    pub fn point_mass(point: DesignPoint) -> Self {
        Self {
            points: vec![point],
            weights: vec![1.0],
        }
    }

    fn merged(points: Vec<DesignPoint>, weights: Vec<f64>) -> Self {
        let mut out_points: Vec<DesignPoint> = Vec::with_capacity(points.len());
        let mut out_weights: Vec<f64> = Vec::with_capacity(points.len());
        let mut keys: Vec<Vec<u64>> = Vec::with_capacity(points.len());
        for (p, w) in points.into_iter().zip(weights) {
            let key = p.key();
            match keys.iter().position(|k| *k == key) {
                Some(i) => out_weights[i] += w,
                None => {
                    keys.push(key);
                    out_points.push(p);
                    out_weights.push(w);
                }
            }
        }
        Self {
            points: out_points,
            weights: out_weights,
        }
    }

    pub fn points(&self) -> &[DesignPoint] {
        &self.points
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn dim(&self) -> usize {
        self.points[0].dim()
    }

    pub fn iter(&self) -> impl Iterator<Item = (&DesignPoint, f64)> {
        self.points.iter().zip(self.weights.iter().copied())
    }

    /// Points carrying strictly positive weight.
    pub fn support(&self) -> impl Iterator<Item = (&DesignPoint, f64)> {
        self.iter().filter(|(_, w)| *w > 0.0)
    }

    pub fn support_size(&self) -> usize {
        self.weights.iter().filter(|w| **w > 0.0).count()
    }

    pub fn contains_point(&self, point: &DesignPoint) -> bool {
        let key = point.key();
        self.points.iter().any(|p| p.key() == key)
    }
}

impl fmt::Display for Design {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{{")?;
        for (i, (p, w)) in self.iter().enumerate() {
            if i > 0 {
                write!(f, ", ")?;
            }
            write!(f, "{p}: {w:.4}")?;
        }
        write!(f, "}}")
    }
}

/// Convex combination `(1 - alpha) * a + alpha * b`, keeping only points with
/// positive resulting weight.
pub fn mix_designs(a: &Design, b: &Design, alpha: f64) -> Result<Design> {
    if !(0.0..=1.0).contains(&alpha) {
        return Err(Error::InvalidDesign(format!("mixing weight {alpha} outside [0, 1]")));
    }
    if a.dim() != b.dim() {
        return Err(Error::Dimension(format!(
            "cannot mix designs of dimension {} and {}",
            a.dim(),
            b.dim()
        )));
    }
    let mut points = Vec::with_capacity(a.len() + b.len());
    let mut weights = Vec::with_capacity(a.len() + b.len());
    for (p, w) in a.iter() {
        points.push(p.clone());
        weights.push((1.0 - alpha) * w);
    }
    for (p, w) in b.iter() {
        points.push(p.clone());
        weights.push(alpha * w);
    }
    let merged = Design::merged(points, weights);
    let (points, weights): (Vec<_>, Vec<_>) = merged
        .points
        .into_iter()
        .zip(merged.weights)
        .filter(|(_, w)| *w > 0.0)
        .unzip();
    Design::normalized(points, weights)
}

/// Drops points with weight below `threshold` and renormalizes. If nothing
/// survives, the heaviest point (first on ties) is kept with weight one.
pub fn prune_design(design: &Design, threshold: f64) -> Design {
    let (points, weights): (Vec<_>, Vec<_>) = design
        .iter()
        .filter(|(_, w)| *w >= threshold && *w > 0.0)
        .map(|(p, w)| (p.clone(), w))
        .unzip();
    if points.is_empty() {
        let mut best = 0;
        for (i, &w) in design.weights.iter().enumerate() {
            if w > design.weights[best] {
                best = i;
            }
        }
        return Design::point_mass(design.points[best].clone());
    }
    Design::normalized(points, weights).expect("surviving weights are positive")
}

/// Box of candidate parameters for the alternative model.
#[derive(Clone, Debug, PartialEq)]
pub struct ParameterSpace {
    lower: Vec<f64>,
    upper: Vec<f64>,
}

impl ParameterSpace {
    pub fn new(lower: Vec<f64>, upper: Vec<f64>) -> Result<Self> {
        check_bounds(&lower, &upper).map_err(Error::InvalidSpace)?;
        Ok(Self { lower, upper })
    }

    pub fn lower(&self) -> &[f64] {
        &self.lower
    }

    pub fn upper(&self) -> &[f64] {
        &self.upper
    }

    pub fn dim(&self) -> usize {
        self.lower.len()
    }

    pub fn contains(&self, theta: &[f64]) -> bool {
        theta.len() == self.dim()
            && theta
                .iter()
                .zip(self.lower.iter().zip(&self.upper))
                .all(|(t, (l, u))| *t >= *l && *t <= *u)
    }

    pub fn clamp(&self, theta: &mut [f64]) {
        for (t, (l, u)) in theta.iter_mut().zip(self.lower.iter().zip(&self.upper)) {
            *t = t.clamp(*l, *u);
        }
    }

    /// Maps a point of the unit cube affinely into the box.
    pub fn from_unit(&self, unit: &[f64]) -> Vec<f64> {
        unit.iter()
            .zip(self.lower.iter().zip(&self.upper))
            .map(|(u, (l, h))| l + u * (h - l))
            .collect()
    }
}

fn check_bounds(lower: &[f64], upper: &[f64]) -> std::result::Result<(), String> {
    if lower.is_empty() {
        return Err("bounds are empty".into());
    }
    if lower.len() != upper.len() {
        return Err(format!(
            "lower has {} entries but upper has {}",
            lower.len(),
            upper.len()
        ));
    }
    for (i, (l, u)) in lower.iter().zip(upper).enumerate() {
        if !l.is_finite() || !u.is_finite() {
            return Err(format!("bound {i} is not finite"));
        }
        if l > u {
            return Err(format!("lower bound {l} exceeds upper bound {u} in dimension {i}"));
        }
    }
    Ok(())
}

/// Set of admissible experiments.
#[derive(Clone, Debug, PartialEq)]
pub enum DesignSpace {
    Box { lower: Vec<f64>, upper: Vec<f64> },
    /// Cross product of per-dimension level lists.
    Lattice { levels: Vec<Vec<f64>> },
}

impl DesignSpace {
    pub fn new_box(lower: Vec<f64>, upper: Vec<f64>) -> Result<Self> {
        check_bounds(&lower, &upper).map_err(Error::InvalidSpace)?;
        Ok(Self::Box { lower, upper })
    }

    pub fn new_lattice(levels: Vec<Vec<f64>>) -> Result<Self> {
        if levels.is_empty() {
            return Err(Error::InvalidSpace("lattice has no dimensions".into()));
        }
        for (i, lv) in levels.iter().enumerate() {
            if lv.is_empty() {
                return Err(Error::InvalidSpace(format!("lattice dimension {i} has no levels")));
            }
            if lv.iter().any(|v| !v.is_finite()) {
                return Err(Error::InvalidSpace(format!(
                    "lattice dimension {i} has a non-finite level"
                )));
            }
            if lv.windows(2).any(|w| w[0] >= w[1]) {
                return Err(Error::InvalidSpace(format!(
                    "lattice dimension {i} levels are not strictly increasing"
                )));
            }
        }
        Ok(Self::Lattice { levels })
    }

    pub fn dim(&self) -> usize {
        match self {
            Self::Box { lower, .. } => lower.len(),
            Self::Lattice { levels } => levels.len(),
        }
    }

    pub fn is_lattice(&self) -> bool {
        matches!(self, Self::Lattice { .. })
    }

    pub fn contains(&self, x: &DesignPoint) -> bool {
        if x.dim() != self.dim() {
            return false;
        }
        match self {
            Self::Box { lower, upper } => x
                .coords()
                .iter()
                .zip(lower.iter().zip(upper))
                .all(|(c, (l, u))| *c >= *l && *c <= *u),
            Self::Lattice { levels } => x
                .coords()
                .iter()
                .zip(levels)
                .all(|(c, lv)| lv.iter().any(|v| canonical(*v) == canonical(*c))),
        }
    }

    /// Number of lattice points; `None` for a box.
    pub fn lattice_size(&self) -> Option<usize> {
        match self {
            Self::Box { .. } => None,
            Self::Lattice { levels } => Some(levels.iter().map(Vec::len).product()),
        }
    }

    /// All lattice points in lexicographic order (last coordinate fastest).
    /// Empty for a box.
    pub fn lattice_points(&self) -> Vec<DesignPoint> {
        let Self::Lattice { levels } = self else {
            return Vec::new();
        };
        let total: usize = levels.iter().map(Vec::len).product();
        let mut out = Vec::with_capacity(total);
        let mut idx = vec![0usize; levels.len()];
        for _ in 0..total {
            out.push(DesignPoint(
                idx.iter().zip(levels).map(|(&i, lv)| lv[i]).collect(),
            ));
            for d in (0..levels.len()).rev() {
                idx[d] += 1;
                if idx[d] < levels[d].len() {
                    break;
                }
                idx[d] = 0;
            }
        }
        out
    }

    pub fn check_design(&self, design: &Design) -> Result<()> {
        for (p, _) in design.iter() {
            if p.dim() != self.dim() {
                return Err(Error::Dimension(format!(
                    "design point {p} has dimension {} but the design space has {}",
                    p.dim(),
                    self.dim()
                )));
            }
            if !self.contains(p) {
                return Err(Error::InvalidDesign(format!(
                    "design point {p} lies outside the design space"
                )));
            }
        }
        Ok(())
    }
}
