//! Element matrices, the element Dirac pair and the element state space.
//!
//! With the effort coefficients `v = (e_a^p, e_m^p, e_b^p, e_a^q, e_m^q, e_b^q)`
//! every port variable of an element is linear in `v`:
//!
//! ```text
//! [f^s; e^e] = [M_f; M_y] v = Eᵀ v        [e^s; f^e] = [M_e; M_u] v = Fᵀ v
//! ```
//!
//! `F` is invertible, so eliminating `v` gives the explicit element model
//! `[-A -B; C D] = Eᵀ F⁻ᵀ`.

use nalgebra::{DMatrix, Matrix2x6, Matrix4x6, SMatrix, Vector2, Vector4, Vector6};

use crate::error::{Error, Result};
use crate::linalg;
use crate::mesh::Element;
use crate::shape::{Node, Segment, ShapeKind, ShapeSet};

pub type Mat23 = SMatrix<f64, 2, 3>;
pub type Mat33 = SMatrix<f64, 3, 3>;
pub type Mat66 = SMatrix<f64, 6, 6>;
pub type Mat44 = SMatrix<f64, 4, 4>;
pub type Mat42 = SMatrix<f64, 4, 2>;
pub type Mat24 = SMatrix<f64, 2, 4>;
pub type Mat22 = SMatrix<f64, 2, 2>;

/// Element matrices at or above this 1-norm condition number are rejected.
pub const MAX_CONDITION: f64 = 1e12;

/// `M1`..`M6` of one element.
///
/// Rows of `M1`..`M5` are indexed by the half-interval (`am`, `mb`),
/// columns by the nodal function (`a`, `m`, `b`). `M6` has q zero-forms on
/// rows and p zero-forms on columns.
#[derive(Debug, Clone, PartialEq)]
pub struct ElementMatrices {
    /// Dissipation block: `σ ∫_{Z_s} ω_l^p dz`.
    pub m1: Mat23,
    /// Boundary differences of the q zero-forms over each half.
    pub m2: Mat23,
    /// Boundary differences of the p zero-forms over each half.
    pub m3: Mat23,
    /// `∫ ω_l^p ∧ ω_s^p`.
    pub m4: Mat23,
    /// `∫ ω_l^q ∧ ω_s^q`.
    pub m5: Mat23,
    /// Boundary outer product `ω_i^q ω_j^p |_b - ω_i^q ω_j^p |_a`.
    pub m6: Mat33,
    pub sigma: f64,
    pub h: f64,
}

/// Compute all element matrices by exact polynomial integration.
pub fn compute_matrices(element: &Element, sigma: f64) -> Result<ElementMatrices> {
    if !(sigma.is_finite() && sigma >= 0.0) {
        return Err(Error::InvalidSigma(sigma));
    }
    let shapes = ShapeSet::new(*element);
    let h = element.h;
    let pz = |l: Node| shapes.local(ShapeKind::PZeroForm(l));
    let qz = |l: Node| shapes.local(ShapeKind::QZeroForm(l));

    let mut m1 = Mat23::zeros();
    let mut m2 = Mat23::zeros();
    let mut m3 = Mat23::zeros();
    let mut m4 = Mat23::zeros();
    let mut m5 = Mat23::zeros();
    for s in Segment::ALL {
        let (t0, t1) = s.local_range();
        let p_one = shapes.local(ShapeKind::POneForm(s));
        let q_one = shapes.local(ShapeKind::QOneForm(s));
        for l in Node::ALL {
            let (i, j) = (s.index(), l.index());
            // ∫ σ ⋆ω over the half, with dz = h dt
            m1[(i, j)] = sigma * h * pz(l).integral(t0, t1);
            // boundary integral of a zero-form: right end minus left end
            m2[(i, j)] = qz(l).eval(t1) - qz(l).eval(t0);
            m3[(i, j)] = pz(l).eval(t1) - pz(l).eval(t0);
            m4[(i, j)] = pz(l).product_integral(p_one, 0.0, 1.0);
            m5[(i, j)] = qz(l).product_integral(q_one, 0.0, 1.0);
        }
    }
    let mut m6 = Mat33::zeros();
    for lq in Node::ALL {
        for lp in Node::ALL {
            m6[(lq.index(), lp.index())] = qz(lq).eval(1.0) * pz(lp).eval(1.0) - qz(lq).eval(0.0) * pz(lp).eval(0.0);
        }
    }
    Ok(ElementMatrices {
        m1,
        m2,
        m3,
        m4,
        m5,
        m6,
        sigma,
        h,
    })
}

impl ElementMatrices {
    /// `M4ᵀM2 + M3ᵀM5 + M6ᵀ diag(-1, 0, -1)`, which vanishes for a valid
    /// choice of shape functions.
    pub fn power_identity(&self) -> Mat33 {
        let flip = Mat33::from_diagonal(&nalgebra::Vector3::new(-1.0, 0.0, -1.0));
        self.m4.transpose() * self.m2 + self.m3.transpose() * self.m5 + self.m6.transpose() * flip
    }

    /// `M_f = [M1 M2; M3 0]`.
    pub fn m_f(&self) -> Matrix4x6<f64> {
        let mut out = Matrix4x6::zeros();
        out.fixed_view_mut::<2, 3>(0, 0).copy_from(&self.m1);
        out.fixed_view_mut::<2, 3>(0, 3).copy_from(&self.m2);
        out.fixed_view_mut::<2, 3>(2, 0).copy_from(&self.m3);
        out
    }

    /// `M_e = blockdiag(M4, M5)`.
    pub fn m_e(&self) -> Matrix4x6<f64> {
        let mut out = Matrix4x6::zeros();
        out.fixed_view_mut::<2, 3>(0, 0).copy_from(&self.m4);
        out.fixed_view_mut::<2, 3>(2, 3).copy_from(&self.m5);
        out
    }

    fn boundary_lift(&self) -> Mat66 {
        let mut out = Mat66::identity();
        out.fixed_view_mut::<3, 3>(0, 0).copy_from(&self.m6);
        out
    }

    /// `M_u`: `f^e = (-e_a^q, e_b^p)`.
    pub fn m_u(&self) -> Matrix2x6<f64> {
        let sel = Matrix2x6::from_row_slice(&[
            0.0, 0.0, 0.0, -1.0, 0.0, 0.0, //
            0.0, 0.0, 1.0, 0.0, 0.0, 0.0,
        ]);
        sel * self.boundary_lift()
    }

    /// `M_y`: `e^e = (-e_a^p, -e_b^q)`.
    pub fn m_y(&self) -> Matrix2x6<f64> {
        let sel = Matrix2x6::from_row_slice(&[
            1.0, 0.0, 0.0, 0.0, 0.0, 0.0, //
            0.0, 0.0, 0.0, 0.0, 0.0, -1.0,
        ]);
        sel * self.boundary_lift()
    }
}

/// Port variables of an element expressed through the coefficients `v`.
#[derive(Debug, Clone, PartialEq)]
pub struct DiracPair {
    /// `E = [M_f; M_y]ᵀ`.
    pub e: Mat66,
    /// `F = [M_e; M_u]ᵀ`.
    pub f: Mat66,
    pub m_f: Matrix4x6<f64>,
    pub m_e: Matrix4x6<f64>,
    pub m_u: Matrix2x6<f64>,
    pub m_y: Matrix2x6<f64>,
    /// 1-norm condition number of `F`.
    pub condition: f64,
    pub sigma: f64,
    pub h: f64,
}

/// All port variables for one coefficient vector.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PortValues {
    pub f_s: Vector4<f64>,
    pub e_s: Vector4<f64>,
    pub f_e: Vector2<f64>,
    pub e_e: Vector2<f64>,
}

pub fn build_dirac_pair(matrices: &ElementMatrices) -> Result<DiracPair> {
    let m_f = matrices.m_f();
    let m_e = matrices.m_e();
    let m_u = matrices.m_u();
    let m_y = matrices.m_y();
    let mut e_t = Mat66::zeros();
    e_t.fixed_view_mut::<4, 6>(0, 0).copy_from(&m_f);
    e_t.fixed_view_mut::<2, 6>(4, 0).copy_from(&m_y);
    let mut f_t = Mat66::zeros();
    f_t.fixed_view_mut::<4, 6>(0, 0).copy_from(&m_e);
    f_t.fixed_view_mut::<2, 6>(4, 0).copy_from(&m_u);

    let condition = linalg::cond1(&DMatrix::from_iterator(6, 6, f_t.iter().cloned()));
    if condition.is_nan() || condition >= MAX_CONDITION {
        return Err(Error::IllConditioned(condition));
    }
    Ok(DiracPair {
        e: e_t.transpose(),
        f: f_t.transpose(),
        m_f,
        m_e,
        m_u,
        m_y,
        condition,
        sigma: matrices.sigma,
        h: matrices.h,
    })
}

impl DiracPair {
    /// `max |F Eᵀ + E Fᵀ|`; zero for a Dirac structure.
    pub fn skew_residual(&self) -> f64 {
        linalg::max_abs(&(self.f * self.e.transpose() + self.e * self.f.transpose()))
    }

    /// Rank of `[F | E]`.
    pub fn rank(&self) -> usize {
        let mut fe = DMatrix::zeros(6, 12);
        fe.view_mut((0, 0), (6, 6)).copy_from(&self.f);
        fe.view_mut((0, 6), (6, 6)).copy_from(&self.e);
        linalg::rank(&fe, 1e-10)
    }

    pub fn ports(&self, v: &Vector6<f64>) -> PortValues {
        PortValues {
            f_s: self.m_f * v,
            e_s: self.m_e * v,
            f_e: self.m_u * v,
            e_e: self.m_y * v,
        }
    }
}

/// Explicit input-state-output form of one element.
#[derive(Debug, Clone, PartialEq)]
pub struct ElementModel {
    pub a: Mat44,
    pub b: Mat42,
    pub c: Mat24,
    pub d: Mat22,
    /// `[-A-Aᵀ, Cᵀ-B; C-Bᵀ, D+Dᵀ]`, positive semidefinite for a passive element.
    pub r: Mat66,
    pub sigma: f64,
    pub h: f64,
}

pub fn element_state_space(pair: &DiracPair) -> Result<ElementModel> {
    let f_t = pair.f.transpose();
    let inv = f_t.try_inverse().ok_or(Error::IllConditioned(f64::INFINITY))?;
    // [-A -B; C D] = Eᵀ F⁻ᵀ
    let k = pair.e.transpose() * inv;
    let a: Mat44 = -k.fixed_view::<4, 4>(0, 0);
    let b: Mat42 = -k.fixed_view::<4, 2>(0, 4);
    let c: Mat24 = k.fixed_view::<2, 4>(4, 0).into_owned();
    let d: Mat22 = k.fixed_view::<2, 2>(4, 4).into_owned();
    let mut r = Mat66::zeros();
    r.fixed_view_mut::<4, 4>(0, 0).copy_from(&(-a - a.transpose()));
    r.fixed_view_mut::<4, 2>(0, 4).copy_from(&(c.transpose() - b));
    r.fixed_view_mut::<2, 4>(4, 0).copy_from(&(c - b.transpose()));
    r.fixed_view_mut::<2, 2>(4, 4).copy_from(&(d + d.transpose()));
    Ok(ElementModel {
        a,
        b,
        c,
        d,
        r,
        sigma: pair.sigma,
        h: pair.h,
    })
}

impl ElementModel {
    /// Matrices, Dirac pair and state space of `element` in one go.
    pub fn for_element(element: &Element, sigma: f64) -> Result<Self> {
        element_state_space(&build_dirac_pair(&compute_matrices(element, sigma)?)?)
    }

    /// Largest of `max|A+Aᵀ|`, `max|C-Bᵀ|`, `max|D+Dᵀ|`.
    pub fn conservative_residual(&self) -> f64 {
        linalg::max_abs(&(self.a + self.a.transpose()))
            .max(linalg::max_abs(&(self.c - self.b.transpose())))
            .max(linalg::max_abs(&(self.d + self.d.transpose())))
    }

    pub fn min_dissipation_eigenvalue(&self) -> f64 {
        linalg::min_symmetric_eigenvalue(&DMatrix::from_iterator(6, 6, self.r.iter().cloned()))
    }

    /// `(f^s, e^e)` for given storage efforts and external flows.
    pub fn evaluate(&self, e_s: &Vector4<f64>, f_e: &Vector2<f64>) -> (Vector4<f64>, Vector2<f64>) {
        (-self.a * e_s - self.b * f_e, self.c * e_s + self.d * f_e)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use nalgebra::Vector6;

    fn unit() -> Element {
        Element::new(0.0, 1.0).unwrap()
    }

    fn close23(m: &Mat23, rows: [[f64; 3]; 2], tol: f64) -> bool {
        (0..2).all(|i| (0..3).all(|j| (m[(i, j)] - rows[i][j]).abs() <= tol))
    }

    #[test]
    fn rational_tables() {
        for el in [unit(), Element::new(-3.0, 4.5).unwrap()] {
            let m = compute_matrices(&el, 0.0).unwrap();
            assert_eq!(m.m1, Mat23::zeros());
            assert!(close23(&m.m2, [[-0.5, 1.0, 0.5], [-0.5, -1.0, 0.5]], 1e-15));
            assert!(close23(&m.m3, [[-0.75, 1.0, 0.25], [-0.25, -1.0, 0.75]], 1e-15));
            assert!(close23(
                &m.m4,
                [[7.0 / 12.0, 2.0 / 3.0, 1.0 / 12.0], [1.0 / 12.0, 2.0 / 3.0, 7.0 / 12.0]],
                1e-15
            ));
            assert!(close23(
                &m.m5,
                [[5.0 / 6.0, 0.5, 1.0 / 6.0], [1.0 / 6.0, 0.5, 5.0 / 6.0]],
                1e-15
            ));
            let m6 = Mat33::from_row_slice(&[-1.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 1.0]);
            assert_eq!(m.m6, m6);
        }
    }

    #[test]
    fn dissipation_block_on_unit_element() {
        let m = compute_matrices(&unit(), 2.0).unwrap();
        assert!(close23(
            &m.m1,
            [[7.0 / 12.0, 2.0 / 3.0, 1.0 / 12.0], [1.0 / 12.0, 2.0 / 3.0, 7.0 / 12.0]],
            1e-15
        ));
    }

    #[test]
    fn negative_sigma_rejected() {
        assert_eq!(compute_matrices(&unit(), -0.1), Err(Error::InvalidSigma(-0.1)));
        assert!(compute_matrices(&unit(), f64::NAN).is_err());
    }

    #[test]
    fn power_identity_vanishes() {
        let m = compute_matrices(&Element::new(0.3, 0.9).unwrap(), 0.0).unwrap();
        assert!(linalg::max_abs(&m.power_identity()) <= 1e-15);
        // the two halves of the identity separately
        let flip = Mat33::from_diagonal(&nalgebra::Vector3::new(-1.0, 0.0, -1.0));
        let expected = Mat33::from_row_slice(&[1.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0, -1.0]);
        assert_eq!(m.m6.transpose() * flip, expected);
    }

    #[test]
    fn conservative_dirac_pair() {
        let pair = build_dirac_pair(&compute_matrices(&unit(), 0.0).unwrap()).unwrap();
        assert!(pair.skew_residual() <= 1e-12);
        assert_eq!(pair.rank(), 6);
        assert!(pair.condition < 10.0);
        let v = Vector6::new(0.0, 0.0, 0.0, 1.0, 0.0, 0.0);
        assert_eq!(pair.ports(&v).f_e, Vector2::new(-1.0, 0.0));
    }

    #[test]
    fn external_port_selectors() {
        let pair = build_dirac_pair(&compute_matrices(&unit(), 0.0).unwrap()).unwrap();
        let f_e = pair.ports(&Vector6::new(0.0, 0.0, 1.0, 0.0, 0.0, 0.0)).f_e;
        assert_eq!(f_e, Vector2::new(0.0, 1.0));
        let e_e = pair.ports(&Vector6::new(1.0, 0.0, 0.0, 0.0, 0.0, 0.0)).e_e;
        assert_eq!(e_e, Vector2::new(-1.0, 0.0));
    }

    #[test]
    fn conservative_element_model() {
        let model = ElementModel::for_element(&unit(), 0.0).unwrap();
        assert!(model.conservative_residual() <= 1e-12);
        assert!(linalg::max_abs(&model.r) <= 1e-12);
        let e_s = Vector4::new(0.3, -1.2, 0.7, 2.0);
        let f_e = Vector2::new(-0.4, 0.9);
        let (f_s, e_e) = model.evaluate(&e_s, &f_e);
        assert!((e_s.dot(&f_s) + e_e.dot(&f_e)).abs() <= 1e-12);
    }

    #[test]
    fn dissipative_element_is_passive() {
        let model = ElementModel::for_element(&Element::new(0.0, 0.5).unwrap(), 0.5).unwrap();
        assert!(model.min_dissipation_eigenvalue() >= -1e-10);
        assert!(linalg::max_abs(&model.r) > 1e-3);
    }
}
