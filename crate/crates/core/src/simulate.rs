//! Time integration of `ẋ = A_N ∂H(x) + B_N u(t)`, `y = C_N ∂H(x) + D_N u(t)`
//! with energy and power diagnostics.

use alloc::sync::Arc;
use alloc::vec::Vec;
use core::fmt;
use core::str::FromStr;

use nalgebra::{DMatrix, DVector, Matrix4, Vector2};

use crate::assembly::AggregateModel;
use crate::error::{Error, Result};
use crate::hamiltonian::Hamiltonian;

/// Newton tolerance on the midpoint stage residual, relative to `1 + ‖x‖∞`.
pub const NEWTON_TOL: f64 = 1e-10;
pub const NEWTON_MAX_ITER: usize = 50;

/// A scalar input channel `t ↦ u(t)`.
#[derive(Clone)]
pub enum Signal {
    Zero,
    Constant(f64),
    /// One period of `amplitude · sin(2πt/duration)` on `[0, duration]`, zero after.
    SinePulse {
        amplitude: f64,
        duration: f64,
    },
    Custom(Arc<dyn Fn(f64) -> f64 + Send + Sync>),
}

impl fmt::Debug for Signal {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Signal::Zero => write!(f, "Zero"),
            Signal::Constant(c) => write!(f, "Constant({c})"),
            Signal::SinePulse { amplitude, duration } => {
                write!(f, "SinePulse {{ amplitude: {amplitude}, duration: {duration} }}")
            }
            Signal::Custom(_) => write!(f, "Custom(..)"),
        }
    }
}

impl Signal {
    /// The unit-amplitude pulse `sin(πt)` on `[0, 2]`.
    pub fn sine_pulse() -> Self {
        Signal::SinePulse {
            amplitude: 1.0,
            duration: 2.0,
        }
    }

    pub fn eval(&self, t: f64) -> f64 {
        match self {
            Signal::Zero => 0.0,
            Signal::Constant(c) => *c,
            Signal::SinePulse { amplitude, duration } => {
                if (0.0..=*duration).contains(&t) {
                    amplitude * libm::sin(2.0 * core::f64::consts::PI * t / duration)
                } else {
                    0.0
                }
            }
            Signal::Custom(f) => f(t),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Integrator {
    Rk4,
    #[default]
    ImplicitMidpoint,
}

impl Integrator {
    pub fn name(self) -> &'static str {
        match self {
            Integrator::Rk4 => "rk4",
            Integrator::ImplicitMidpoint => "implicit-midpoint",
        }
    }
}

impl FromStr for Integrator {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "rk4" => Ok(Integrator::Rk4),
            "implicit-midpoint" | "midpoint" => Ok(Integrator::ImplicitMidpoint),
            _ => Err(Error::InvalidScenario("unknown integrator")),
        }
    }
}

#[derive(Debug, Clone)]
pub struct Scenario {
    model: AggregateModel,
    hamiltonian: Hamiltonian,
    inputs: [Signal; 2],
    integrator: Integrator,
    dt: f64,
    t_end: f64,
    initial_state: DVector<f64>,
}

impl Scenario {
    /// A zero initial state is used when `initial_state` is `None`.
    pub fn new(
        model: AggregateModel,
        hamiltonian: Hamiltonian,
        inputs: [Signal; 2],
        integrator: Integrator,
        dt: f64,
        t_end: f64,
        initial_state: Option<DVector<f64>>,
    ) -> Result<Self> {
        let n = model.state_dim();
        if hamiltonian.state_dim() != n {
            return Err(Error::Dimension {
                expected: n,
                got: hamiltonian.state_dim(),
            });
        }
        if !(dt.is_finite() && t_end.is_finite() && dt > 0.0 && dt <= t_end) {
            return Err(Error::InvalidScenario("need 0 < dt <= t_end"));
        }
        let initial_state = initial_state.unwrap_or_else(|| DVector::zeros(n));
        if initial_state.len() != n {
            return Err(Error::Dimension {
                expected: n,
                got: initial_state.len(),
            });
        }
        if !initial_state.iter().all(|v| v.is_finite()) {
            return Err(Error::InvalidScenario("initial state must be finite"));
        }
        Ok(Self {
            model,
            hamiltonian,
            inputs,
            integrator,
            dt,
            t_end,
            initial_state,
        })
    }

    pub fn model(&self) -> &AggregateModel {
        &self.model
    }

    pub fn hamiltonian(&self) -> &Hamiltonian {
        &self.hamiltonian
    }

    pub fn integrator(&self) -> Integrator {
        self.integrator
    }

    pub fn dt(&self) -> f64 {
        self.dt
    }

    pub fn t_end(&self) -> f64 {
        self.t_end
    }

    pub fn initial_state(&self) -> &DVector<f64> {
        &self.initial_state
    }

    /// Number of grid points, `floor(t_end/dt) + 1`.
    pub fn n_points(&self) -> usize {
        let ratio = self.t_end / self.dt;
        let r = libm::round(ratio);
        let steps = if (ratio - r).abs() <= 1e-9 * r.max(1.0) {
            r
        } else {
            libm::floor(ratio)
        };
        steps as usize + 1
    }

    pub fn input(&self, t: f64) -> Vector2<f64> {
        Vector2::new(self.inputs[0].eval(t), self.inputs[1].eval(t))
    }

    pub fn rhs(&self, t: f64, x: &DVector<f64>) -> Result<DVector<f64>> {
        let g = self.hamiltonian.gradient(x.as_slice())?;
        Ok(self.model.evaluate(&g, &self.input(t)).0)
    }

    /// `y(t)` at state `x`.
    pub fn output(&self, t: f64, x: &DVector<f64>) -> Result<Vector2<f64>> {
        let g = self.hamiltonian.gradient(x.as_slice())?;
        Ok(self.model.evaluate(&g, &self.input(t)).1)
    }
}

type DenseLu = nalgebra::LU<f64, nalgebra::Dyn, nalgebra::Dyn>;

/// Integrator state, caching the midpoint Jacobian factorization while the
/// Hessian of `H` is unchanged.
#[derive(Debug)]
pub struct Stepper<'a> {
    scenario: &'a Scenario,
    a_dense: DMatrix<f64>,
    cache: Option<(Vec<Matrix4<f64>>, DenseLu)>,
}

impl<'a> Stepper<'a> {
    pub fn new(scenario: &'a Scenario) -> Self {
        Self {
            scenario,
            a_dense: scenario.model.a.to_dense(),
            cache: None,
        }
    }

    pub fn step(&mut self, t: f64, x: &DVector<f64>) -> Result<DVector<f64>> {
        match self.scenario.integrator {
            Integrator::Rk4 => self.rk4(t, x),
            Integrator::ImplicitMidpoint => self.midpoint(t, x),
        }
    }

    fn rk4(&self, t: f64, x: &DVector<f64>) -> Result<DVector<f64>> {
        let s = self.scenario;
        let dt = s.dt;
        let k1 = s.rhs(t, x)?;
        let k2 = s.rhs(t + 0.5 * dt, &(x + &k1 * (0.5 * dt)))?;
        let k3 = s.rhs(t + 0.5 * dt, &(x + &k2 * (0.5 * dt)))?;
        let k4 = s.rhs(t + dt, &(x + &k3 * dt))?;
        Ok(x + (k1 + k2 * 2.0 + k3 * 2.0 + k4) * (dt / 6.0))
    }

    fn jacobian(&mut self, xm: &DVector<f64>) -> Result<()> {
        let blocks = self.scenario.hamiltonian.hessian_blocks(xm.as_slice())?;
        if let Some((cached, _)) = &self.cache {
            if *cached == blocks {
                return Ok(());
            }
        }
        let n = xm.len();
        let half = 0.5 * self.scenario.dt;
        let mut j = DMatrix::identity(n, n);
        // A_N · blockdiag(Hess), column block by column block
        for (e, blk) in blocks.iter().enumerate() {
            let prod = self.a_dense.columns(4 * e, 4) * blk;
            let mut cols = j.columns_mut(4 * e, 4);
            cols -= prod * half;
        }
        self.cache = Some((blocks, j.lu()));
        Ok(())
    }

    fn midpoint(&mut self, t: f64, x: &DVector<f64>) -> Result<DVector<f64>> {
        let s = self.scenario;
        let half = 0.5 * s.dt;
        let tm = t + half;
        let tol = NEWTON_TOL * (1.0 + x.amax());
        let stage = |xm: &DVector<f64>| -> Result<DVector<f64>> { Ok(xm - x - s.rhs(tm, xm)? * half) };
        // explicit predictor
        let mut xm = x + s.rhs(t, x)? * half;
        let mut res = stage(&xm)?;
        let mut norm = res.amax();
        let mut iter = 0;
        while norm > tol {
            if iter == NEWTON_MAX_ITER {
                return Err(Error::NoConvergence {
                    residual: norm,
                    iterations: iter,
                });
            }
            self.jacobian(&xm)?;
            let delta = self.cache.as_ref().and_then(|(_, lu)| lu.solve(&res));
            let delta = delta.ok_or(Error::IllConditioned(f64::INFINITY))?;
            let mut lambda = 1.0;
            loop {
                let trial = &xm - &delta * lambda;
                let trial_res = stage(&trial)?;
                let trial_norm = trial_res.amax();
                if trial_norm < norm || lambda < 1e-3 {
                    xm = trial;
                    res = trial_res;
                    norm = trial_norm;
                    break;
                }
                lambda *= 0.5;
            }
            iter += 1;
        }
        Ok(xm * 2.0 - x)
    }
}

/// One step of the scenario's integrator from `(t, x)`.
pub fn step(scenario: &Scenario, t: f64, x: &DVector<f64>) -> Result<DVector<f64>> {
    Stepper::new(scenario).step(t, x)
}

#[derive(Debug, Clone, PartialEq)]
pub struct SimulationResult {
    pub times: Vec<f64>,
    pub states: Vec<DVector<f64>>,
    pub inputs: Vec<Vector2<f64>>,
    pub outputs: Vec<Vector2<f64>>,
    /// `H(x(t))`.
    pub hamiltonian: Vec<f64>,
    /// Supplied power `yᵀu`.
    pub power: Vec<f64>,
    /// Second-order finite-difference estimate of `dH/dt`.
    pub dh_dt: Vec<f64>,
    /// `|ΔH/Δt - yᵀu|` with central differences; `NaN` at the endpoints.
    pub power_residual: Vec<f64>,
    /// `|gᵀẋ - yᵀu|` at every grid state.
    pub storage_balance: Vec<f64>,
    /// Per step: `(H_{k+1} - H_k)/dt - y(x_m)ᵀu(t_m)` at the midpoint
    /// `x_m = (x_k + x_{k+1})/2`.
    pub midpoint_balance: Vec<f64>,
}

impl SimulationResult {
    pub fn len(&self) -> usize {
        self.times.len()
    }

    pub fn is_empty(&self) -> bool {
        self.times.is_empty()
    }

    pub fn max_power(&self) -> f64 {
        self.power.iter().fold(0.0, |m, p| m.max(p.abs()))
    }

    /// Maximum of `power_residual` over the interior grid points.
    pub fn max_power_residual(&self) -> f64 {
        self.power_residual
            .iter()
            .filter(|r| !r.is_nan())
            .fold(0.0, |m, r| m.max(*r))
    }

    pub fn max_storage_balance(&self) -> f64 {
        self.storage_balance.iter().fold(0.0, |m, r| m.max(*r))
    }

    pub fn max_midpoint_balance(&self) -> f64 {
        self.midpoint_balance.iter().fold(0.0, |m, r| m.max(r.abs()))
    }

    /// `(max H - min H) / max |H|` over grid points with `t0 <= t <= t1`.
    pub fn energy_drift(&self, t0: f64, t1: f64) -> f64 {
        let window = self
            .times
            .iter()
            .zip(&self.hamiltonian)
            .filter(|(t, _)| **t >= t0 - 1e-12 && **t <= t1 + 1e-12)
            .map(|(_, h)| *h);
        let (lo, hi, scale) = window.fold((f64::INFINITY, f64::NEG_INFINITY, 0.0_f64), |(lo, hi, s), h| {
            (lo.min(h), hi.max(h), s.max(h.abs()))
        });
        if scale == 0.0 {
            0.0
        } else {
            (hi - lo) / scale
        }
    }
}

/// Integrate the scenario over its full time grid.
pub fn run(scenario: &Scenario) -> Result<SimulationResult> {
    let n = scenario.n_points();
    let dt = scenario.dt;
    let model = &scenario.model;
    let ham = &scenario.hamiltonian;
    let mut stepper = Stepper::new(scenario);

    let mut times = Vec::with_capacity(n);
    let mut states = Vec::with_capacity(n);
    let mut x = scenario.initial_state.clone();
    for k in 0..n {
        let t = k as f64 * dt;
        times.push(t);
        if k + 1 < n {
            let next = stepper.step(t, &x)?;
            states.push(core::mem::replace(&mut x, next));
        } else {
            states.push(x.clone());
        }
    }

    let mut inputs = Vec::with_capacity(n);
    let mut outputs = Vec::with_capacity(n);
    let mut hamiltonian = Vec::with_capacity(n);
    let mut power = Vec::with_capacity(n);
    let mut storage_balance = Vec::with_capacity(n);
    for (t, x) in times.iter().zip(&states) {
        let u = scenario.input(*t);
        let g = ham.gradient(x.as_slice())?;
        let (xdot, y) = model.evaluate(&g, &u);
        let p = y.dot(&u);
        inputs.push(u);
        outputs.push(y);
        hamiltonian.push(ham.value(x.as_slice())?);
        power.push(p);
        storage_balance.push((g.dot(&xdot) - p).abs());
    }

    let dh_dt = differentiate(&hamiltonian, dt);
    let power_residual = (0..n)
        .map(|k| {
            if k == 0 || k + 1 == n {
                f64::NAN
            } else {
                (dh_dt[k] - power[k]).abs()
            }
        })
        .collect();

    let mut midpoint_balance = Vec::with_capacity(n.saturating_sub(1));
    for k in 0..n.saturating_sub(1) {
        let tm = times[k] + 0.5 * dt;
        let xm = (&states[k] + &states[k + 1]) * 0.5;
        let u = scenario.input(tm);
        let y = scenario.output(tm, &xm)?;
        midpoint_balance.push((hamiltonian[k + 1] - hamiltonian[k]) / dt - y.dot(&u));
    }

    Ok(SimulationResult {
        times,
        states,
        inputs,
        outputs,
        hamiltonian,
        power,
        dh_dt,
        power_residual,
        storage_balance,
        midpoint_balance,
    })
}

/// Central differences inside, one-sided second-order differences at the ends.
fn differentiate(h: &[f64], dt: f64) -> Vec<f64> {
    let n = h.len();
    match n {
        0 => Vec::new(),
        1 => alloc::vec![0.0],
        2 => alloc::vec![(h[1] - h[0]) / dt; 2],
        _ => (0..n)
            .map(|k| {
                if k == 0 {
                    (-3.0 * h[0] + 4.0 * h[1] - h[2]) / (2.0 * dt)
                } else if k + 1 == n {
                    (3.0 * h[k] - 4.0 * h[k - 1] + h[k - 2]) / (2.0 * dt)
                } else {
                    (h[k + 1] - h[k - 1]) / (2.0 * dt)
                }
            })
            .collect(),
    }
}
