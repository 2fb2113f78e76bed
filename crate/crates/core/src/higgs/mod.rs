//! Gauge fields coupled to a Higgs field valued in a cyclic quotient `H/H_t`.
//!
//! `large` holds the Hamiltonian, phase boundaries and the vortex swap used at
//! large κ; `small` holds the random-current expansion used at small κ.

mod large;
mod small;

pub use large::{capped_configs, HiggsConfig, HiggsModel};
pub use small::{capped_reduced, poisson_tail_bound, CurrentModel, ReducedConfig};

use num_complex::Complex;
use thiserror::Error;

use crate::group::{Element, GaugeGroup};
use crate::scalar::Real;
use crate::swap::SwapError;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum HiggsError {
    #[error("H/H_t is trivial: every element of H is a scalar ρ(g)")]
    DegenerateQuotient,
    #[error("H must be a nontrivial cyclic group, got order {0}")]
    BadOrder(usize),
    #[error("key property fails at φ_x = {x}, φ_y = {y}, σ = {g}")]
    KeyPropertyFails { x: usize, y: usize, g: Element },
    #[error("the swap is only defined for a two-element quotient, got {0}")]
    NotBinary(usize),
    #[error("selected edges are not a union of whole phase boundaries")]
    NotWholeBoundaries,
    #[error("rectangle is not contained in a single {0}")]
    Scattered(&'static str),
    #[error("both rectangles lie in the same {0}")]
    SameComponent(&'static str),
    #[error("star of vertex {0} meets several knots")]
    SplitStar(usize),
    #[error("current weight is not positive on edge {0}")]
    NonPositiveCurrent(usize),
    #[error("enumeration needs {needed} terms, cap is {cap}")]
    CapExceeded { needed: f64, cap: u64 },
    #[error("field lengths do not match the lattice")]
    Shape,
    #[error(transparent)]
    Swap(#[from] SwapError),
}

/// `H = Z_h` inside U(1) modulo the scalars `H_t` realized by ρ.
///
/// Coset `k` is represented by `e^{2πik/h}`, `k < order()`, so products are
/// indices added modulo `order()`.
#[derive(Clone, Debug)]
pub struct HiggsQuotient<F> {
    h_order: usize,
    ht_order: usize,
    values: Vec<Complex<F>>,
}

impl<F: Real> HiggsQuotient<F> {
    pub fn new(group: &GaugeGroup<F>, h_order: usize) -> Result<Self, HiggsError> {
        if h_order < 2 {
            return Err(HiggsError::BadOrder(h_order));
        }
        let d = group.rep.dim();
        let tol = F::lit(1e-9);
        let root = |k: usize| Complex::from_polar(F::one(), F::TAU() * F::lit(k as f64) / F::lit(h_order as f64));
        let ht_order = (0..h_order)
            .filter(|&k| {
                let z = root(k);
                group.table.elements().any(|g| {
                    let m = group.rep.matrix(g);
                    (0..d).all(|i| {
                        (0..d).all(|j| {
                            let want = if i == j { z } else { Complex::new(F::zero(), F::zero()) };
                            (m[i * d + j] - want).norm() < tol
                        })
                    })
                })
            })
            .count();
        let q = h_order / ht_order;
        if q < 2 {
            return Err(HiggsError::DegenerateQuotient);
        }
        let quotient = HiggsQuotient { h_order, ht_order, values: (0..q).map(root).collect() };
        quotient.check_key_property(group)?;
        Ok(quotient)
    }

    pub fn h_order(&self) -> usize {
        self.h_order
    }

    pub fn ht_order(&self) -> usize {
        self.ht_order
    }

    pub fn order(&self) -> usize {
        self.values.len()
    }

    #[inline]
    pub fn value(&self, k: u16) -> Complex<F> {
        self.values[k as usize]
    }

    /// Index of `φ_x φ_y⁻¹`.
    #[inline]
    pub fn ratio(&self, x: u16, y: u16) -> u16 {
        let q = self.order() as u16;
        (x + q - y) % q
    }

    /// `φ_x χ(g) φ_y⁻¹ = d` forces `φ_x = φ_y` and `g = 1`.
    pub fn check_key_property(&self, group: &GaugeGroup<F>) -> Result<(), HiggsError> {
        let d = F::lit(group.rep.dim() as f64);
        for x in 0..self.order() {
            for y in 0..self.order() {
                for g in group.table.elements() {
                    let v = self.value(x as u16) * group.rep.chi(g) * self.value(y as u16).conj();
                    let hit = (v - Complex::new(d, F::zero())).norm() < F::lit(1e-9);
                    if hit && (x != y || !g.is_identity()) {
                        return Err(HiggsError::KeyPropertyFails { x, y, g });
                    }
                }
            }
        }
        Ok(())
    }

    /// `Re[a χ(b)]` over `(a, b) ≠ (1, 1)`, maximized.
    pub fn max_off_identity(&self, group: &GaugeGroup<F>) -> F {
        let mut best = F::neg_infinity();
        for a in 0..self.order() {
            for b in group.table.elements() {
                if a == 0 && b.is_identity() {
                    continue;
                }
                best = best.max((self.value(a as u16) * group.rep.chi(b)).re);
            }
        }
        best
    }
}
