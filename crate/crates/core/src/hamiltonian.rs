//! Energy densities and the discrete Hamiltonian of an element.
//!
//! On an element of width `h`, with local coordinate `t = (z - a)/h`, the
//! energy variables are expanded as
//!
//! ```text
//! p_ab = p_am ω_am^p + p_mb ω_mb^p      (density 2 p_s / h on each half)
//! q_ab = q_am ω_am^q + q_mb ω_mb^q      (density (q_am (3-4t) + q_mb (4t-1)) / h)
//! ```
//!
//! The p-part of the energy is integrated exactly; the q-part uses
//! Gauss–Legendre quadrature on each half of the element.

use alloc::string::String;
use alloc::sync::Arc;
use alloc::vec::Vec;
use core::fmt;

use nalgebra::{DVector, Matrix4, Vector4};

use crate::error::{Error, Result};
use crate::mesh::{Element, Mesh};
use crate::quadrature::GaussLegendre;

/// Gauss–Legendre points per half-element unless stated otherwise.
pub const DEFAULT_QUAD_ORDER: usize = 5;

pub type ScalarFn = Arc<dyn Fn(f64) -> f64 + Send + Sync>;

/// Energy per unit length `Ĥ(ρ)` as a function of the scalar density `ρ` of
/// an energy one-form, with its first and second derivatives.
///
/// Missing derivatives fall back to central finite differences; such
/// densities report `is_finite_difference() == true`.
#[derive(Clone)]
pub struct EnergyDensity {
    label: String,
    value: ScalarFn,
    derivative: Option<ScalarFn>,
    curvature: Option<ScalarFn>,
}

impl fmt::Debug for EnergyDensity {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("EnergyDensity")
            .field("label", &self.label)
            .field("finite_difference", &self.is_finite_difference())
            .finish()
    }
}

impl EnergyDensity {
    pub fn new(label: impl Into<String>, value: impl Fn(f64) -> f64 + Send + Sync + 'static) -> Self {
        Self {
            label: label.into(),
            value: Arc::new(value),
            derivative: None,
            curvature: None,
        }
    }

    pub fn with_derivative(mut self, d: impl Fn(f64) -> f64 + Send + Sync + 'static) -> Self {
        self.derivative = Some(Arc::new(d));
        self
    }

    pub fn with_curvature(mut self, d2: impl Fn(f64) -> f64 + Send + Sync + 'static) -> Self {
        self.curvature = Some(Arc::new(d2));
        self
    }

    pub fn label(&self) -> &str {
        &self.label
    }

    pub fn is_finite_difference(&self) -> bool {
        self.derivative.is_none()
    }

    pub fn value(&self, rho: f64) -> f64 {
        (self.value)(rho)
    }

    pub fn derivative(&self, rho: f64) -> f64 {
        match &self.derivative {
            Some(d) => d(rho),
            None => {
                let eps = 1e-6 * (1.0 + rho.abs());
                (self.value(rho + eps) - self.value(rho - eps)) / (2.0 * eps)
            }
        }
    }

    pub fn curvature(&self, rho: f64) -> f64 {
        match &self.curvature {
            Some(d2) => d2(rho),
            None => {
                let eps = 1e-5 * (1.0 + rho.abs());
                (self.derivative(rho + eps) - self.derivative(rho - eps)) / (2.0 * eps)
            }
        }
    }
}

/// `Ĥ(ρ) = ρ² / (2c)`; `c` is an inductance or capacitance per unit length.
pub fn quadratic_density(coefficient: f64) -> Result<EnergyDensity> {
    if !(coefficient.is_finite() && coefficient > 0.0) {
        return Err(Error::InvalidCoefficient(coefficient));
    }
    let c = coefficient;
    Ok(
        EnergyDensity::new(alloc::format!("quadratic:{c}"), move |r| r * r / (2.0 * c))
            .with_derivative(move |r| r / c)
            .with_curvature(move |_| 1.0 / c),
    )
}

/// `Ĥ(ρ) = k ρ⁴ / 4`.
pub fn quartic_density(k: f64) -> Result<EnergyDensity> {
    if !(k.is_finite() && k > 0.0) {
        return Err(Error::InvalidCoefficient(k));
    }
    Ok(
        EnergyDensity::new(alloc::format!("quartic:{k}"), move |r| k * r * r * r * r / 4.0)
            .with_derivative(move |r| k * r * r * r)
            .with_curvature(move |r| 3.0 * k * r * r),
    )
}

/// Energy coefficients of one element.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct ElementState {
    pub p_am: f64,
    pub p_mb: f64,
    pub q_am: f64,
    pub q_mb: f64,
}

impl ElementState {
    pub fn new(p_am: f64, p_mb: f64, q_am: f64, q_mb: f64) -> Self {
        Self { p_am, p_mb, q_am, q_mb }
    }

    pub fn from_slice(x: &[f64]) -> Self {
        Self {
            p_am: x[0],
            p_mb: x[1],
            q_am: x[2],
            q_mb: x[3],
        }
    }

    pub fn to_vector(self) -> Vector4<f64> {
        Vector4::new(self.p_am, self.p_mb, self.q_am, self.q_mb)
    }

    pub fn is_finite(&self) -> bool {
        self.to_vector().iter().all(|v| v.is_finite())
    }

    /// Density of `p_ab` at local coordinate `t`.
    pub fn p_density(&self, h: f64, t: f64) -> f64 {
        2.0 * if t <= 0.5 { self.p_am } else { self.p_mb } / h
    }

    /// Density of `q_ab` at local coordinate `t`.
    pub fn q_density(&self, h: f64, t: f64) -> f64 {
        (self.q_am * (3.0 - 4.0 * t) + self.q_mb * (4.0 * t - 1.0)) / h
    }
}

/// Local q one-form densities `(ω_am^q, ω_mb^q)` times `h`.
fn q_weights(t: f64) -> [f64; 2] {
    [3.0 - 4.0 * t, 4.0 * t - 1.0]
}

fn halves(rule: &GaussLegendre) -> impl Iterator<Item = (f64, f64)> + '_ {
    rule.mapped(0.0, 0.5).chain(rule.mapped(0.5, 1.0))
}

fn finite(v: f64) -> Result<f64> {
    if v.is_finite() {
        Ok(v)
    } else {
        Err(Error::NonFiniteDensity)
    }
}

fn rule_for(quad_order: usize) -> Result<GaussLegendre> {
    GaussLegendre::new(quad_order)
}

fn hamiltonian_with(
    element: &Element,
    dens_p: &EnergyDensity,
    dens_q: &EnergyDensity,
    state: &ElementState,
    rule: &GaussLegendre,
) -> Result<f64> {
    let h = element.h;
    let hp = 0.5 * h * (dens_p.value(2.0 * state.p_am / h) + dens_p.value(2.0 * state.p_mb / h));
    let hq: f64 = halves(rule)
        .map(|(t, w)| w * dens_q.value(state.q_density(h, t)))
        .sum::<f64>()
        * h;
    finite(hp + hq)
}

fn gradient_with(
    element: &Element,
    dens_p: &EnergyDensity,
    dens_q: &EnergyDensity,
    state: &ElementState,
    rule: &GaussLegendre,
) -> Result<Vector4<f64>> {
    let h = element.h;
    let mut g = Vector4::new(
        dens_p.derivative(2.0 * state.p_am / h),
        dens_p.derivative(2.0 * state.p_mb / h),
        0.0,
        0.0,
    );
    for (t, w) in halves(rule) {
        let d = w * dens_q.derivative(state.q_density(h, t));
        let ws = q_weights(t);
        g[2] += d * ws[0];
        g[3] += d * ws[1];
    }
    for v in g.iter() {
        finite(*v)?;
    }
    Ok(g)
}

fn hessian_with(
    element: &Element,
    dens_p: &EnergyDensity,
    dens_q: &EnergyDensity,
    state: &ElementState,
    rule: &GaussLegendre,
) -> Result<Matrix4<f64>> {
    let h = element.h;
    let mut m = Matrix4::zeros();
    m[(0, 0)] = 2.0 / h * dens_p.curvature(2.0 * state.p_am / h);
    m[(1, 1)] = 2.0 / h * dens_p.curvature(2.0 * state.p_mb / h);
    for (t, w) in halves(rule) {
        let c = w * dens_q.curvature(state.q_density(h, t)) / h;
        let ws = q_weights(t);
        for i in 0..2 {
            for j in 0..2 {
                m[(2 + i, 2 + j)] += c * ws[i] * ws[j];
            }
        }
    }
    for v in m.iter() {
        finite(*v)?;
    }
    Ok(m)
}

/// `H_ab = H_ab^p + H_ab^q` for one element.
pub fn element_hamiltonian(
    element: &Element,
    dens_p: &EnergyDensity,
    dens_q: &EnergyDensity,
    state: &ElementState,
    quad_order: usize,
) -> Result<f64> {
    hamiltonian_with(element, dens_p, dens_q, state, &rule_for(quad_order)?)
}

/// `∂H_ab/∂(p_am, p_mb, q_am, q_mb)`.
pub fn element_gradient(
    element: &Element,
    dens_p: &EnergyDensity,
    dens_q: &EnergyDensity,
    state: &ElementState,
    quad_order: usize,
) -> Result<Vector4<f64>> {
    gradient_with(element, dens_p, dens_q, state, &rule_for(quad_order)?)
}

/// Second derivatives of `H_ab`; block diagonal in `(p, q)`.
pub fn element_hessian(
    element: &Element,
    dens_p: &EnergyDensity,
    dens_q: &EnergyDensity,
    state: &ElementState,
    quad_order: usize,
) -> Result<Matrix4<f64>> {
    hessian_with(element, dens_p, dens_q, state, &rule_for(quad_order)?)
}

/// Discrete Hamiltonian `H_N = Σ H_ab,i` over a mesh, state ordered
/// element-major as `(p_am, p_mb, q_am, q_mb)`.
#[derive(Debug, Clone)]
pub struct Hamiltonian {
    elements: Vec<Element>,
    densities: Vec<(EnergyDensity, EnergyDensity)>,
    rule: GaussLegendre,
}

impl Hamiltonian {
    /// Same densities on every element.
    pub fn new(mesh: &Mesh, dens_p: EnergyDensity, dens_q: EnergyDensity, quad_order: usize) -> Result<Self> {
        let densities = (0..mesh.n_elements())
            .map(|_| (dens_p.clone(), dens_q.clone()))
            .collect();
        Self::per_element(mesh, densities, quad_order)
    }

    pub fn per_element(mesh: &Mesh, densities: Vec<(EnergyDensity, EnergyDensity)>, quad_order: usize) -> Result<Self> {
        if densities.len() != mesh.n_elements() {
            return Err(Error::Dimension {
                expected: mesh.n_elements(),
                got: densities.len(),
            });
        }
        Ok(Self {
            elements: mesh.elements().collect(),
            densities,
            rule: rule_for(quad_order)?,
        })
    }

    pub fn n_elements(&self) -> usize {
        self.elements.len()
    }

    pub fn state_dim(&self) -> usize {
        4 * self.elements.len()
    }

    pub fn quad_order(&self) -> usize {
        self.rule.order()
    }

    pub fn uses_finite_differences(&self) -> bool {
        self.densities
            .iter()
            .any(|(p, q)| p.is_finite_difference() || q.is_finite_difference())
    }

    fn check(&self, x: &[f64]) -> Result<()> {
        if x.len() != self.state_dim() {
            return Err(Error::Dimension {
                expected: self.state_dim(),
                got: x.len(),
            });
        }
        Ok(())
    }

    fn parts<'a>(
        &'a self,
        x: &'a [f64],
    ) -> impl Iterator<Item = (&'a Element, &'a (EnergyDensity, EnergyDensity), ElementState)> {
        self.elements
            .iter()
            .zip(&self.densities)
            .zip(x.chunks_exact(4))
            .map(|((e, d), xi)| (e, d, ElementState::from_slice(xi)))
    }

    pub fn value(&self, x: &[f64]) -> Result<f64> {
        self.check(x)?;
        let mut total = 0.0;
        for (e, (dp, dq), s) in self.parts(x) {
            total += hamiltonian_with(e, dp, dq, &s, &self.rule)?;
        }
        Ok(total)
    }

    pub fn element_values(&self, x: &[f64]) -> Result<Vec<f64>> {
        self.check(x)?;
        self.parts(x)
            .map(|(e, (dp, dq), s)| hamiltonian_with(e, dp, dq, &s, &self.rule))
            .collect()
    }

    /// Stacked element gradients `∂H_N/∂x`.
    pub fn gradient(&self, x: &[f64]) -> Result<DVector<f64>> {
        self.check(x)?;
        let mut g = DVector::zeros(x.len());
        for (i, (e, (dp, dq), s)) in self.parts(x).enumerate() {
            g.fixed_rows_mut::<4>(4 * i)
                .copy_from(&gradient_with(e, dp, dq, &s, &self.rule)?);
        }
        Ok(g)
    }

    /// Diagonal 4×4 blocks of the Hessian, one per element.
    pub fn hessian_blocks(&self, x: &[f64]) -> Result<Vec<Matrix4<f64>>> {
        self.check(x)?;
        self.parts(x)
            .map(|(e, (dp, dq), s)| hessian_with(e, dp, dq, &s, &self.rule))
            .collect()
    }
}

/// Concatenated element gradients over the mesh.
pub fn gradient_stack(
    mesh: &Mesh,
    dens_p: &EnergyDensity,
    dens_q: &EnergyDensity,
    x: &[f64],
    quad_order: usize,
) -> Result<DVector<f64>> {
    Hamiltonian::new(mesh, dens_p.clone(), dens_q.clone(), quad_order)?.gradient(x)
}
