//! Composition of the element chain into the aggregate model `Σ_N`.
//!
//! The stacked coefficient vector `w = (v_1, …, v_N)` is fixed by `6N`
//! linear equations: four effort-matching rows per element, two boundary
//! rows carrying the inputs and two coupling rows per interior point.
//! Rows are ordered so that the system matrix `G` has bandwidth 6:
//!
//! ```text
//! row 0              (M_u v_1)_1                 = s_1 u_1
//! rows 6i+1..6i+4    M_e v_i                     = e^s_i
//! row  6i+5          (M_u v_i)_2 + (M_y v_i+1)_1 = 0      (e^p continuous)
//! row  6i+6          (M_y v_i)_2 - (M_u v_i+1)_1 = 0      (e^q continuous)
//! row  6N-1          (M_u v_N)_2                 = s_2 u_2
//! ```
//!
//! Solving `G w = rhs` for unit right-hand sides and applying
//! `ẋ = -blockdiag(M_f) w` gives the explicit sparse model
//! `ẋ = A_N g + B_N u`, `y = C_N g + D_N u` with `g = ∂H_N/∂x`.

use alloc::format;
use alloc::string::String;
use alloc::vec::Vec;
use core::fmt;

use nalgebra::{DMatrix, DVector, Matrix2, Vector2, Vector6};

use crate::banded::{BandedLu, BandedMatrix};
use crate::element::{build_dirac_pair, compute_matrices, DiracPair, PortValues, MAX_CONDITION};
use crate::error::{Error, Result};
use crate::linalg;
use crate::mesh::{Element, Mesh};
use crate::sparse::CsrMatrix;

/// Entries below this magnitude are dropped from the eliminated matrices.
pub const PRUNE_THRESHOLD: f64 = 1e-12;

/// Zero fraction of `A_N` for the 20-element transmission line as
/// published (4720 zeros out of 6400 entries).
pub const REFERENCE_ZERO_FRACTION: f64 = 0.7375;

/// Signs relating the physical boundary variables to the element ports.
///
/// `f^e_{1,1} = input_signs[0] u_1`, `f^e_{N,2} = input_signs[1] u_2`,
/// `y_1 = output_signs[0] e^e_{1,1}`, `y_2 = output_signs[1] e^e_{N,2}`.
/// With `input_signs == output_signs` the supplied power is
/// `yᵀu = e^e_{1,1} f^e_{1,1} + e^e_{N,2} f^e_{N,2}`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct IoMap {
    pub input_signs: [f64; 2],
    pub output_signs: [f64; 2],
}

impl Default for IoMap {
    /// `u = (V(z_start), I(z_end))`, `y = (I(z_start), -V(z_end))`.
    fn default() -> Self {
        Self {
            input_signs: [-1.0, 1.0],
            output_signs: [-1.0, 1.0],
        }
    }
}

impl IoMap {
    pub fn input_matrix(&self) -> Matrix2<f64> {
        Matrix2::new(self.input_signs[0], 0.0, 0.0, self.input_signs[1])
    }

    pub fn output_matrix(&self) -> Matrix2<f64> {
        Matrix2::new(self.output_signs[0], 0.0, 0.0, self.output_signs[1])
    }

    /// Sign conventions in words, for transmission-line variables
    /// `e^p = I` and `e^q = V`.
    pub fn describe(&self) -> String {
        let sign = |s: f64| if s < 0.0 { "-" } else { "" };
        let [i1, i2] = self.input_signs;
        let [o1, o2] = self.output_signs;
        // f^e_1 = -e^q(a) = -V, f^e_2 = e^p(b) = I, e^e_1 = -e^p(a) = -I, e^e_2 = -e^q(b) = -V
        format!(
            "u1 = V(z_start) enters as (M_u v_1)_1 = {}u1 (f^e_1 = -e^q(a))\n\
             u2 = I(z_end) enters as (M_u v_N)_2 = {}u2 (f^e_2 = e^p(b))\n\
             y1 = {}I(z_start) = {}(M_y v_1)_1 (e^e_1 = -e^p(a))\n\
             y2 = {}V(z_end) = {}(M_y v_N)_2 (e^e_2 = -e^q(b))\n",
            sign(i1),
            sign(i2),
            sign(-o1),
            sign(o1),
            sign(-o2),
            sign(o2),
        )
    }
}

/// The banded system `G w = rhs(e^s, u)`.
#[derive(Debug, Clone)]
pub struct InterconnectionSystem {
    n_elements: usize,
    g: BandedMatrix,
    lu: BandedLu,
    condition: f64,
    io_map: IoMap,
}

impl InterconnectionSystem {
    pub fn new(pairs: &[DiracPair], io_map: IoMap) -> Result<Self> {
        let n = pairs.len();
        if n == 0 {
            return Err(Error::NoElements);
        }
        let mut g = BandedMatrix::zeros(6 * n, 6, 6);
        let mut put = |row: usize, col0: usize, coeffs: &nalgebra::RowVector6<f64>, scale: f64| {
            for (k, c) in coeffs.iter().enumerate() {
                if *c != 0.0 {
                    g.set(row, col0 + k, scale * c);
                }
            }
        };
        put(0, 0, &pairs[0].m_u.row(0).into_owned(), 1.0);
        for (i, pair) in pairs.iter().enumerate() {
            let base = 1 + 6 * i;
            for r in 0..4 {
                put(base + r, 6 * i, &pair.m_e.row(r).into_owned(), 1.0);
            }
            if let Some(next) = pairs.get(i + 1) {
                put(base + 4, 6 * i, &pair.m_u.row(1).into_owned(), 1.0);
                put(base + 4, 6 * (i + 1), &next.m_y.row(0).into_owned(), 1.0);
                put(base + 5, 6 * i, &pair.m_y.row(1).into_owned(), 1.0);
                put(base + 5, 6 * (i + 1), &next.m_u.row(0).into_owned(), -1.0);
            } else {
                put(base + 4, 6 * i, &pair.m_u.row(1).into_owned(), 1.0);
            }
        }
        let lu = g.lu()?;
        let condition = lu.condition_estimate();
        if condition.is_nan() || condition >= MAX_CONDITION {
            return Err(Error::IllConditioned(condition));
        }
        Ok(Self {
            n_elements: n,
            g,
            lu,
            condition,
            io_map,
        })
    }

    pub fn n_elements(&self) -> usize {
        self.n_elements
    }

    /// 1-norm condition estimate of `G`.
    pub fn condition(&self) -> f64 {
        self.condition
    }

    pub fn matrix(&self) -> &BandedMatrix {
        &self.g
    }

    pub fn dense_matrix(&self) -> DMatrix<f64> {
        self.g.to_dense()
    }

    /// Right-hand side for stacked storage efforts `e_s` (length `4N`) and
    /// inputs `u`.
    pub fn rhs(&self, e_s: &DVector<f64>, u: &Vector2<f64>) -> DVector<f64> {
        let n = self.n_elements;
        let mut r = DVector::zeros(6 * n);
        r[0] = self.io_map.input_signs[0] * u[0];
        for i in 0..n {
            r.rows_mut(1 + 6 * i, 4).copy_from(&e_s.rows(4 * i, 4));
        }
        r[6 * n - 1] = self.io_map.input_signs[1] * u[1];
        r
    }

    pub fn solve(&self, e_s: &DVector<f64>, u: &Vector2<f64>) -> Result<DVector<f64>> {
        if e_s.len() != 4 * self.n_elements {
            return Err(Error::Dimension {
                expected: 4 * self.n_elements,
                got: e_s.len(),
            });
        }
        Ok(self.lu.solve(&self.rhs(e_s, u)))
    }
}

/// Aggregate kernel representation: block-diagonal element `F` and `E`.
#[derive(Debug, Clone, PartialEq)]
pub struct Kernel {
    pub f: CsrMatrix,
    pub e: CsrMatrix,
}

/// The eliminated `4N`-th order model.
#[derive(Debug, Clone)]
pub struct AggregateModel {
    pub a: CsrMatrix,
    pub b: CsrMatrix,
    pub c: CsrMatrix,
    pub d: Matrix2<f64>,
    pub io_map: IoMap,
    pub kernel: Kernel,
    elements: Vec<Element>,
    sigma: Vec<f64>,
    pairs: Vec<DiracPair>,
    system: InterconnectionSystem,
}

/// Join the elements of `mesh` into one model. `sigma` holds one
/// dissipation coefficient per element, or a single value for all.
pub fn compose_chain(mesh: &Mesh, sigma: &[f64]) -> Result<AggregateModel> {
    compose_chain_with(mesh, sigma, IoMap::default())
}

pub fn compose_chain_with(mesh: &Mesh, sigma: &[f64], io_map: IoMap) -> Result<AggregateModel> {
    let n = mesh.n_elements();
    let sigma: Vec<f64> = match sigma.len() {
        1 => alloc::vec![sigma[0]; n],
        len if len == n => sigma.to_vec(),
        got => return Err(Error::SigmaCount { expected: n, got }),
    };
    let elements: Vec<Element> = mesh.elements().collect();
    let pairs = elements
        .iter()
        .zip(&sigma)
        .map(|(el, s)| build_dirac_pair(&compute_matrices(el, *s)?))
        .collect::<Result<Vec<_>>>()?;
    let system = InterconnectionSystem::new(&pairs, io_map)?;

    let dim = 4 * n;
    let mut a = DMatrix::zeros(dim, dim);
    let mut b = DMatrix::zeros(dim, 2);
    let mut c = DMatrix::zeros(2, dim);
    let mut d = Matrix2::zeros();
    let mut e_s = DVector::zeros(dim);
    let zero_u = Vector2::zeros();
    for j in 0..dim + 2 {
        let mut u = zero_u;
        if j < dim {
            e_s[j] = 1.0;
        } else {
            u[j - dim] = 1.0;
        }
        let w = system.solve(&e_s, &u)?;
        let (xdot, y) = outputs(&pairs, &io_map, &w);
        if j < dim {
            a.set_column(j, &xdot);
            c.set_column(j, &y);
            e_s[j] = 0.0;
        } else {
            b.set_column(j - dim, &xdot);
            d.set_column(j - dim, &y);
        }
    }
    d.iter_mut()
        .filter(|v| v.abs() < PRUNE_THRESHOLD)
        .for_each(|v| *v = 0.0);

    let mut f_n = DMatrix::zeros(6 * n, 6 * n);
    let mut e_n = DMatrix::zeros(6 * n, 6 * n);
    for (i, p) in pairs.iter().enumerate() {
        f_n.view_mut((6 * i, 6 * i), (6, 6)).copy_from(&p.f);
        e_n.view_mut((6 * i, 6 * i), (6, 6)).copy_from(&p.e);
    }
    Ok(AggregateModel {
        a: CsrMatrix::from_dense(&a, PRUNE_THRESHOLD),
        b: CsrMatrix::from_dense(&b, PRUNE_THRESHOLD),
        c: CsrMatrix::from_dense(&c, PRUNE_THRESHOLD),
        d,
        io_map,
        kernel: Kernel {
            f: CsrMatrix::from_dense(&f_n, PRUNE_THRESHOLD),
            e: CsrMatrix::from_dense(&e_n, PRUNE_THRESHOLD),
        },
        elements,
        sigma,
        pairs,
        system,
    })
}

/// `ẋ = -blockdiag(M_f) w` and the boundary outputs.
fn outputs(pairs: &[DiracPair], io_map: &IoMap, w: &DVector<f64>) -> (DVector<f64>, Vector2<f64>) {
    let n = pairs.len();
    let mut xdot = DVector::zeros(4 * n);
    for (i, p) in pairs.iter().enumerate() {
        let v: Vector6<f64> = w.fixed_rows::<6>(6 * i).into_owned();
        xdot.fixed_rows_mut::<4>(4 * i).copy_from(&-(p.m_f * v));
    }
    let first: Vector6<f64> = w.fixed_rows::<6>(0).into_owned();
    let last: Vector6<f64> = w.fixed_rows::<6>(6 * (n - 1)).into_owned();
    let y = Vector2::new(
        io_map.output_signs[0] * (pairs[0].m_y * first)[0],
        io_map.output_signs[1] * (pairs[n - 1].m_y * last)[1],
    );
    (xdot, y)
}

impl AggregateModel {
    pub fn n_elements(&self) -> usize {
        self.elements.len()
    }

    pub fn state_dim(&self) -> usize {
        4 * self.elements.len()
    }

    pub fn elements(&self) -> &[Element] {
        &self.elements
    }

    pub fn sigma(&self) -> &[f64] {
        &self.sigma
    }

    pub fn pairs(&self) -> &[DiracPair] {
        &self.pairs
    }

    pub fn interconnection(&self) -> &InterconnectionSystem {
        &self.system
    }

    /// `(ẋ, y)` from the explicit matrices.
    pub fn evaluate(&self, g: &DVector<f64>, u: &Vector2<f64>) -> (DVector<f64>, Vector2<f64>) {
        let xdot = self.a.mul_vec(g) + self.b.mul_vec(&DVector::from_column_slice(u.as_slice()));
        let cg = self.c.mul_vec(g);
        let y = Vector2::new(cg[0], cg[1]) + self.d * u;
        (xdot, y)
    }

    /// Coefficients `w` from a direct solve of the interconnection system.
    pub fn solve_interconnection(&self, g: &DVector<f64>, u: &Vector2<f64>) -> Result<DVector<f64>> {
        self.system.solve(g, u)
    }

    /// `(ẋ, y)` through the interconnection system instead of the eliminated
    /// matrices.
    pub fn evaluate_implicit(&self, g: &DVector<f64>, u: &Vector2<f64>) -> Result<(DVector<f64>, Vector2<f64>)> {
        let w = self.solve_interconnection(g, u)?;
        Ok(outputs(&self.pairs, &self.io_map, &w))
    }

    /// Port values of every element for the coefficients `w`.
    pub fn port_values(&self, w: &DVector<f64>) -> Vec<PortValues> {
        self.pairs
            .iter()
            .enumerate()
            .map(|(i, p)| p.ports(&w.fixed_rows::<6>(6 * i).into_owned()))
            .collect()
    }

    /// Largest of `max|A+Aᵀ|`, `max|C-Bᵀ|`, `max|D+Dᵀ|`.
    pub fn conservative_residual(&self) -> f64 {
        let a = self.a.to_dense();
        let b = self.b.to_dense();
        let c = self.c.to_dense();
        linalg::max_abs(&(&a + a.transpose()))
            .max(linalg::max_abs(&(c - b.transpose())))
            .max(linalg::max_abs(&(self.d + self.d.transpose())))
    }

    /// `R = [-A-Aᵀ, Cᵀ-B; C-Bᵀ, D+Dᵀ]`.
    pub fn dissipation_matrix(&self) -> DMatrix<f64> {
        let n = self.state_dim();
        let a = self.a.to_dense();
        let b = self.b.to_dense();
        let c = self.c.to_dense();
        let mut r = DMatrix::zeros(n + 2, n + 2);
        r.view_mut((0, 0), (n, n)).copy_from(&(-&a - a.transpose()));
        r.view_mut((0, n), (n, 2)).copy_from(&(c.transpose() - &b));
        r.view_mut((n, 0), (2, n)).copy_from(&(&c - b.transpose()));
        r.view_mut((n, n), (2, 2)).copy_from(&(self.d + self.d.transpose()));
        r
    }

    pub fn min_dissipation_eigenvalue(&self) -> f64 {
        linalg::min_symmetric_eigenvalue(&self.dissipation_matrix())
    }

    pub fn io_map_description(&self) -> String {
        self.io_map.describe()
    }
}

pub fn io_map_description(model: &AggregateModel) -> String {
    model.io_map_description()
}

/// Entry counts of one matrix.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MatrixSparsity {
    pub rows: usize,
    pub cols: usize,
    pub nonzeros: usize,
}

impl MatrixSparsity {
    fn of(m: &CsrMatrix, threshold: f64) -> Self {
        Self {
            rows: m.nrows(),
            cols: m.ncols(),
            nonzeros: m.count_above(threshold),
        }
    }

    pub fn entries(&self) -> usize {
        self.rows * self.cols
    }

    pub fn zeros(&self) -> usize {
        self.entries() - self.nonzeros
    }

    pub fn zero_fraction(&self) -> f64 {
        self.zeros() as f64 / self.entries() as f64
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SparsityReport {
    pub threshold: f64,
    pub n_elements: usize,
    pub a: MatrixSparsity,
    pub b: MatrixSparsity,
    pub c: MatrixSparsity,
    pub d: MatrixSparsity,
    /// `[F_N | E_N]` of the block-diagonal kernel representation.
    pub kernel: MatrixSparsity,
    /// `1 - 6/(6N - 2)`.
    pub kernel_bound: f64,
    pub reference_zero_fraction: f64,
}

/// Nonzero counts at `threshold`. Entries below [`PRUNE_THRESHOLD`] are
/// never stored, so smaller thresholds count as the pruning level.
pub fn sparsity_report(model: &AggregateModel, threshold: f64) -> SparsityReport {
    let n = model.n_elements();
    let d = CsrMatrix::from_dense(&DMatrix::from_column_slice(2, 2, model.d.as_slice()), 0.0);
    let kernel = MatrixSparsity {
        rows: 6 * n,
        cols: 12 * n,
        nonzeros: model.kernel.f.count_above(threshold) + model.kernel.e.count_above(threshold),
    };
    SparsityReport {
        threshold,
        n_elements: n,
        a: MatrixSparsity::of(&model.a, threshold),
        b: MatrixSparsity::of(&model.b, threshold),
        c: MatrixSparsity::of(&model.c, threshold),
        d: MatrixSparsity::of(&d, threshold),
        kernel,
        kernel_bound: 1.0 - 6.0 / (6.0 * n as f64 - 2.0),
        reference_zero_fraction: REFERENCE_ZERO_FRACTION,
    }
}

impl fmt::Display for SparsityReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "threshold {:e}, N = {}", self.threshold, self.n_elements)?;
        for (name, m) in [
            ("A", &self.a),
            ("B", &self.b),
            ("C", &self.c),
            ("D", &self.d),
            ("[F|E]", &self.kernel),
        ] {
            writeln!(
                f,
                "{name:>5}: {}x{}, nonzeros {}, zeros {}, zero fraction {:.6}",
                m.rows,
                m.cols,
                m.nonzeros,
                m.zeros(),
                m.zero_fraction()
            )?;
        }
        writeln!(f, "kernel bound 1 - 6/(6N-2) = {:.6}", self.kernel_bound)?;
        write!(
            f,
            "reference zero fraction of A for N = 20: {:.4}",
            self.reference_zero_fraction
        )
    }
}
