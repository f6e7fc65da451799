//! Independent oracles shared by the integration tests.
#![allow(dead_code)]

use nalgebra::{DMatrix, DVector, SymmetricEigen, Vector2, Vector4};
use phdisc_core::{
    build_uniform_mesh, compose_chain, quadratic_density, AggregateModel, Domain, ElementModel, Hamiltonian,
    Integrator, Mesh, Scenario, Signal,
};
use rand::rngs::StdRng;
use rand::SeedableRng;

pub fn rng(seed: u64) -> StdRng {
    StdRng::seed_from_u64(seed)
}

/// Gauss–Legendre rule from the eigen-decomposition of the Jacobi matrix.
pub fn golub_welsch(n: usize) -> (Vec<f64>, Vec<f64>) {
    let mut j = DMatrix::zeros(n, n);
    for k in 1..n {
        let kf = k as f64;
        let beta = kf / (4.0 * kf * kf - 1.0).sqrt();
        j[(k - 1, k)] = beta;
        j[(k, k - 1)] = beta;
    }
    let eig = SymmetricEigen::new(j);
    let mut pairs: Vec<(f64, f64)> = (0..n)
        .map(|i| (eig.eigenvalues[i], 2.0 * eig.eigenvectors[(0, i)].powi(2)))
        .collect();
    pairs.sort_by(|a, b| a.0.partial_cmp(&b.0).unwrap());
    pairs.into_iter().unzip()
}

/// `∫_lo^hi f` with an `n`-point Golub–Welsch rule.
pub fn integrate(n: usize, lo: f64, hi: f64, f: impl Fn(f64) -> f64) -> f64 {
    let (x, w) = golub_welsch(n);
    let (half, mid) = (0.5 * (hi - lo), 0.5 * (hi + lo));
    x.iter().zip(&w).map(|(xi, wi)| half * wi * f(mid + half * xi)).sum()
}

/// Order-20 quadrature split at the midpoint of `[a, b]`.
pub fn integrate_element(a: f64, b: f64, f: impl Fn(f64) -> f64) -> f64 {
    let m = 0.5 * (a + b);
    integrate(20, a, m, &f) + integrate(20, m, b, &f)
}

pub fn central_difference(f: impl Fn(f64) -> f64, x: f64, eps: f64) -> f64 {
    (f(x + eps) - f(x - eps)) / (2.0 * eps)
}

/// Shape functions written directly in the global coordinate `z`.
/// One-forms are returned as their `dz` coefficient.
#[derive(Clone, Copy, Debug)]
pub struct ZShapes {
    pub a: f64,
    pub b: f64,
}

impl ZShapes {
    pub fn m(&self) -> f64 {
        0.5 * (self.a + self.b)
    }

    pub fn h(&self) -> f64 {
        self.b - self.a
    }

    fn hh(&self) -> f64 {
        (self.a - self.b).powi(2)
    }

    /// `ω_am^p`, `ω_mb^p`.
    pub fn p_one(&self, s: usize, z: f64) -> f64 {
        let left = z <= self.m();
        if (s == 0) == left {
            2.0 / self.h()
        } else {
            0.0
        }
    }

    /// `ω_a^q`, `ω_m^q`, `ω_b^q`.
    pub fn q_zero(&self, l: usize, z: f64) -> f64 {
        let (a, b) = (self.a, self.b);
        match l {
            0 => -(z - b) / (b - a),
            1 => {
                if z <= self.m() {
                    -2.0 / (a - b) * z + 2.0 * a / (a - b)
                } else {
                    2.0 * (b - z) / (b - a)
                }
            }
            _ => (z - a) / (b - a),
        }
    }

    pub fn q_zero_derivative(&self, l: usize, z: f64) -> f64 {
        let h = self.h();
        match l {
            0 => -1.0 / h,
            1 => {
                if z <= self.m() {
                    2.0 / h
                } else {
                    -2.0 / h
                }
            }
            _ => 1.0 / h,
        }
    }

    /// `ω_am^q`, `ω_mb^q`.
    pub fn q_one(&self, s: usize, z: f64) -> f64 {
        let (a, b) = (self.a, self.b);
        if s == 0 {
            (-4.0 * z + a + 3.0 * b) / self.hh()
        } else {
            (4.0 * z - 3.0 * a - b) / self.hh()
        }
    }

    /// `ω_a^p`, `ω_m^p`, `ω_b^p`.
    pub fn p_zero(&self, l: usize, z: f64) -> f64 {
        let (a, b) = (self.a, self.b);
        match l {
            0 => (z * z - 2.0 * b * z + b * b) / self.hh(),
            1 => (-4.0 * z * z + 4.0 * (a + b) * z - 4.0 * a * b) / self.hh(),
            _ => (z * z - 2.0 * a * z + a * a) / self.hh(),
        }
    }

    pub fn p_zero_derivative(&self, l: usize, z: f64) -> f64 {
        let (a, b) = (self.a, self.b);
        match l {
            0 => (2.0 * z - 2.0 * b) / self.hh(),
            1 => (-8.0 * z + 4.0 * (a + b)) / self.hh(),
            _ => (2.0 * z - 2.0 * a) / self.hh(),
        }
    }

    pub fn segment(&self, s: usize) -> (f64, f64) {
        if s == 0 {
            (self.a, self.m())
        } else {
            (self.m(), self.b)
        }
    }
}

pub const LINE_LENGTH: f64 = 10.0;
pub const LINE_L: f64 = 1.0;
pub const LINE_C: f64 = 1e-2;
pub const LINE_N: usize = 20;

pub fn line_mesh(n: usize) -> Mesh {
    build_uniform_mesh(Domain::new(0.0, LINE_LENGTH).unwrap(), n).unwrap()
}

pub fn line_model(n: usize) -> AggregateModel {
    compose_chain(&line_mesh(n), &[0.0]).unwrap()
}

/// Lossless line driven by one voltage period at the left end, open at the right.
pub fn line_scenario(integrator: Integrator, dt: f64, t_end: f64) -> Scenario {
    let mesh = line_mesh(LINE_N);
    let model = compose_chain(&mesh, &[0.0]).unwrap();
    let ham = Hamiltonian::new(
        &mesh,
        quadratic_density(LINE_L).unwrap(),
        quadratic_density(LINE_C).unwrap(),
        5,
    )
    .unwrap();
    Scenario::new(
        model,
        ham,
        [Signal::sine_pulse(), Signal::Zero],
        integrator,
        dt,
        t_end,
        None,
    )
    .unwrap()
}

pub fn random_vector(rng: &mut StdRng, n: usize) -> DVector<f64> {
    use rand::Rng;
    DVector::from_fn(n, |_, _| rng.gen_range(-1.0..1.0))
}

/// Explicit aggregate dynamics from the element state-space models, solving
/// the interior coupling conditions as a dense linear system in the unknown
/// interior flows `(f^e_{i,2}, f^e_{i+1,1})`.
pub fn brute_force(model: &AggregateModel, g: &DVector<f64>, u: &Vector2<f64>) -> (DVector<f64>, Vector2<f64>) {
    let els: Vec<ElementModel> = model
        .elements()
        .iter()
        .zip(model.sigma())
        .map(|(e, s)| ElementModel::for_element(e, *s).unwrap())
        .collect();
    let n = els.len();
    let es: Vec<Vector4<f64>> = (0..n).map(|i| g.fixed_rows::<4>(4 * i).into_owned()).collect();
    let assemble_fe = |z: &DVector<f64>| -> Vec<Vector2<f64>> {
        (0..n)
            .map(|i| {
                let left = if i == 0 { -u[0] } else { z[2 * (i - 1) + 1] };
                let right = if i == n - 1 { u[1] } else { z[2 * i] };
                Vector2::new(left, right)
            })
            .collect()
    };
    // coupling residual is affine in z: evaluate at zero and unit vectors
    let residual = |z: &DVector<f64>| -> DVector<f64> {
        let fe = assemble_fe(z);
        let ee: Vec<Vector2<f64>> = (0..n).map(|i| els[i].evaluate(&es[i], &fe[i]).1).collect();
        let mut r = DVector::zeros(2 * (n - 1));
        for i in 0..n - 1 {
            r[2 * i] = fe[i][1] + ee[i + 1][0];
            r[2 * i + 1] = ee[i][1] - fe[i + 1][0];
        }
        r
    };
    let k = 2 * (n - 1);
    let z = if k == 0 {
        DVector::zeros(0)
    } else {
        let r0 = residual(&DVector::zeros(k));
        let mut jac = DMatrix::zeros(k, k);
        for j in 0..k {
            let mut e = DVector::zeros(k);
            e[j] = 1.0;
            jac.set_column(j, &(residual(&e) - &r0));
        }
        jac.lu().solve(&(-r0)).unwrap()
    };
    let fe = assemble_fe(&z);
    let mut xdot = DVector::zeros(4 * n);
    let mut y = Vector2::zeros();
    for i in 0..n {
        let (fs, ee) = els[i].evaluate(&es[i], &fe[i]);
        xdot.fixed_rows_mut::<4>(4 * i).copy_from(&(-fs));
        if i == 0 {
            y[0] = -ee[0];
        }
        if i == n - 1 {
            y[1] = ee[1];
        }
    }
    (xdot, y)
}
