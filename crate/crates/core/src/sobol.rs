//! Unscrambled Sobol sequence (Gray-code order) with Joe–Kuo direction numbers.
//!
//! Matches the reference generator point for point, including the initial
//! all-zeros point, which [`sobol_points`] skips.

use crate::design::ParameterSpace;
use crate::error::{Error, Result};

const BITS: usize = 32;

/// Primitive polynomial (leading and trailing coefficients included) and
/// initial direction numbers for each dimension, from new-joe-kuo-6.21201.
const DIRECTIONS: &[(u32, &[u32])] = &[
    (1, &[]),
    (3, &[1]),
    (7, &[1, 3]),
    (11, &[1, 3, 1]),
    (13, &[1, 1, 1]),
    (19, &[1, 1, 3, 3]),
    (25, &[1, 3, 5, 13]),
    (37, &[1, 1, 5, 5, 17]),
    (41, &[1, 1, 5, 5, 5]),
    (47, &[1, 1, 7, 11, 19]),
    (55, &[1, 1, 5, 1, 1]),
    (59, &[1, 1, 1, 3, 11]),
    (61, &[1, 3, 5, 5, 31]),
    (67, &[1, 3, 3, 9, 7, 49]),
    (91, &[1, 1, 1, 15, 21, 21]),
    (97, &[1, 3, 1, 13, 27, 49]),
    (103, &[1, 1, 1, 15, 7, 5]),
    (109, &[1, 3, 1, 15, 13, 25]),
    (115, &[1, 1, 5, 5, 19, 61]),
    (131, &[1, 3, 7, 11, 23, 15, 103]),
    (137, &[1, 3, 7, 13, 13, 15, 69]),
];

pub const MAX_DIM: usize = DIRECTIONS.len();

fn direction_vector(poly: u32, init: &[u32]) -> [u32; BITS] {
    let mut v = [0u32; BITS];
    if poly == 1 {
        for (i, vi) in v.iter_mut().enumerate() {
            *vi = 1 << (BITS - 1 - i);
        }
        return v;
    }
    let degree = (32 - poly.leading_zeros() - 1) as usize;
    for (i, m) in init.iter().enumerate() {
        v[i] = m << (BITS - 1 - i);
    }
    for i in degree..BITS {
        let mut vi = v[i - degree] ^ (v[i - degree] >> degree);
        for k in 1..degree {
            if (poly >> (degree - k)) & 1 == 1 {
                vi ^= v[i - k];
            }
        }
        v[i] = vi;
    }
    v
}

/// Iterator over points of the unit cube, starting with the origin.
pub struct Sobol {
    directions: Vec<[u32; BITS]>,
    state: Vec<u32>,
    index: u64,
}

impl Sobol {
    pub fn new(dim: usize) -> Result<Self> {
        if dim == 0 || dim > MAX_DIM {
            return Err(Error::SobolDimension {
                requested: dim,
                max: MAX_DIM,
            });
        }
        Ok(Self {
            directions: DIRECTIONS[..dim]
                .iter()
                .map(|(p, m)| direction_vector(*p, m))
                .collect(),
            state: vec![0; dim],
            index: 0,
        })
    }
}

impl Iterator for Sobol {
    type Item = Vec<f64>;

    fn next(&mut self) -> Option<Vec<f64>> {
        if self.index >= 1 << BITS {
            return None;
        }
        let point = self
            .state
            .iter()
            .map(|&s| s as f64 / (1u64 << BITS) as f64)
            .collect();
        let bit = self.index.trailing_ones() as usize;
        if bit < BITS {
            for (s, v) in self.state.iter_mut().zip(&self.directions) {
                *s ^= v[bit];
            }
        }
        self.index += 1;
        Some(point)
    }
}

/// First `n` post-origin Sobol points mapped into `space`.
pub fn sobol_points(dim: usize, n: usize, space: &ParameterSpace) -> Result<Vec<Vec<f64>>> {
    if dim != space.dim() {
        return Err(Error::Dimension(format!(
            "Sobol dimension {dim} does not match the {}-dimensional box",
            space.dim()
        )));
    }
    Ok(Sobol::new(dim)?
        .skip(1)
        .take(n)
        .map(|u| space.from_unit(&u))
        .collect())
}
