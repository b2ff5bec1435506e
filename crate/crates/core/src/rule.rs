//! The heat-bath update rule and its split into oblivious and branching parts.
//!
//! The unit mark `u` of an update at a site of degree `d` is read as:
//!
//! * `u < θ` with `θ = 1 − tanh(βd)`: oblivious; plus iff `u < θ/2`.
//! * otherwise: plus iff `u − θ < ½(tanh(βσ) + tanh(βd))`, where `σ` is the
//!   current sum of the neighbor spins.
//!
//! The plus probability is `½(1 + tanh(βσ))` either way. Forward and backward
//! simulation both go through [`HeatBathRule`], so they agree path by path.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::graph::Graph;

pub type Spin = i8;

/// Assignment of ±1 spins to vertices.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct SpinConfig(Vec<Spin>);

impl SpinConfig {
    pub fn new(spins: Vec<Spin>) -> Result<Self> {
        if let Some(s) = spins.iter().find(|&&s| s != 1 && s != -1) {
            return Err(Error::InvalidArgument(format!("spin value {s} is not ±1")));
        }
        Ok(Self(spins))
    }

    pub fn all_plus(n: usize) -> Self {
        Self(vec![1; n])
    }

    pub fn all_minus(n: usize) -> Self {
        Self(vec![-1; n])
    }

    /// Configuration whose bit `i` of `index` gives the spin of vertex `i`
    /// (set bit = plus).
    pub fn from_index(index: usize, n: usize) -> Self {
        Self((0..n).map(|i| if index >> i & 1 == 1 { 1 } else { -1 }).collect())
    }

    pub fn to_index(&self) -> usize {
        self.0
            .iter()
            .enumerate()
            .fold(0, |acc, (i, &s)| if s > 0 { acc | 1 << i } else { acc })
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn spins(&self) -> &[Spin] {
        &self.0
    }

    pub fn get(&self, v: usize) -> Spin {
        self.0[v]
    }

    pub fn set(&mut self, v: usize, s: Spin) {
        debug_assert!(s == 1 || s == -1);
        self.0[v] = s;
    }

    pub fn flipped(&self) -> Self {
        Self(self.0.iter().map(|&s| -s).collect())
    }

    pub fn magnetization_sum(&self) -> i64 {
        self.0.iter().map(|&s| s as i64).sum()
    }

    /// Coordinatewise `self ≤ other`.
    pub fn le(&self, other: &SpinConfig) -> bool {
        self.0.iter().zip(&other.0).all(|(a, b)| a <= b)
    }
}

/// Plus-probability of a heat-bath update, `½(1 + tanh(βσ))`.
pub fn heat_bath_threshold(beta: f64, sigma_sum: i32, degree: usize) -> Result<f64> {
    if !(beta >= 0.0) || !beta.is_finite() {
        return Err(Error::InvalidArgument(format!("beta must be finite and ≥ 0, got {beta}")));
    }
    if sigma_sum.unsigned_abs() as usize > degree {
        return Err(Error::InvalidArgument(format!(
            "neighbor sum {sigma_sum} exceeds degree {degree}"
        )));
    }
    Ok(0.5 * (1.0 + (beta * sigma_sum as f64).tanh()))
}

/// Oblivious-update probability `θ = 1 − tanh(βd)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Theta(f64);

impl Theta {
    pub fn new(beta: f64, degree: usize) -> Self {
        Self(1.0 - (beta * degree as f64).tanh())
    }

    pub fn value(self) -> f64 {
        self.0
    }
}

#[derive(Debug, Clone)]
struct DegreeTable {
    theta: f64,
    half_theta: f64,
    /// `½(tanh(βσ) + tanh(βd))` indexed by `(σ + d) / 2`.
    upper: Vec<f64>,
}

/// Precomputed thresholds for every degree present in a graph.
#[derive(Debug, Clone)]
pub struct HeatBathRule {
    beta: f64,
    tables: Vec<DegreeTable>,
    local_degrees: bool,
}

impl HeatBathRule {
    pub fn new(beta: f64, g: &Graph) -> Result<Self> {
        if !(beta >= 0.0) || !beta.is_finite() {
            return Err(Error::InvalidArgument(format!("beta must be finite and ≥ 0, got {beta}")));
        }
        let tables = (0..=g.max_degree())
            .map(|d| {
                let td = (beta * d as f64).tanh();
                let theta = 1.0 - td;
                DegreeTable {
                    theta,
                    half_theta: theta / 2.0,
                    upper: (0..=d)
                        .map(|j| {
                            let sigma = 2 * j as i32 - d as i32;
                            0.5 * ((beta * sigma as f64).tanh() + td)
                        })
                        .collect(),
                }
            })
            .collect();
        Ok(Self {
            beta,
            tables,
            local_degrees: !g.is_regular(),
        })
    }

    pub fn beta(&self) -> f64 {
        self.beta
    }

    /// True when sites of different degree use different θ (non-regular graph).
    pub fn uses_local_degrees(&self) -> bool {
        self.local_degrees
    }

    #[inline]
    pub fn theta(&self, degree: usize) -> f64 {
        self.tables[degree].theta
    }

    #[inline]
    pub fn is_oblivious(&self, degree: usize, u: f64) -> bool {
        u < self.tables[degree].theta
    }

    #[inline]
    pub fn oblivious_spin(&self, degree: usize, u: f64) -> Spin {
        if u < self.tables[degree].half_theta {
            1
        } else {
            -1
        }
    }

    #[inline]
    pub fn branch_spin(&self, degree: usize, u: f64, sigma: i32) -> Spin {
        let t = &self.tables[degree];
        let j = ((sigma + degree as i32) / 2) as usize;
        if u - t.theta < t.upper[j] {
            1
        } else {
            -1
        }
    }

    /// Full update: new spin given the mark and the neighbor sum.
    #[inline]
    pub fn update(&self, degree: usize, u: f64, sigma: i32) -> Spin {
        if self.is_oblivious(degree, u) {
            self.oblivious_spin(degree, u)
        } else {
            self.branch_spin(degree, u, sigma)
        }
    }
}
