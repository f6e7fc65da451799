//! The ten closed-form shape functions of an element.
//!
//! Every function is stored as a piecewise quadratic in the local
//! coordinate `t = (z - a) / h`, split at the midpoint `t = 1/2`.
//! One-forms are stored through their local density `g(t)`, so that the
//! form itself is `g(t) / h dz`; integrals of a one-form over a piece of
//! the element are then integrals of `g` in `t`, independent of `h`.
//!
//! | family      | functions                     | shape                    |
//! |-------------|-------------------------------|--------------------------|
//! | p one-forms | `ω_am^p`, `ω_mb^p`            | `2/h` on one half, else 0 |
//! | q zero-forms| `ω_a^q`, `ω_m^q`, `ω_b^q`     | affine / hat             |
//! | q one-forms | `ω_am^q`, `ω_mb^q`            | affine densities         |
//! | p zero-forms| `ω_a^p`, `ω_m^p`, `ω_b^p`     | quadratic                |
//!
//! The middle q zero-form is the hat `2t` on `[0, 1/2]` and `2(1 - t)` on
//! `[1/2, 1]`, which satisfies all three nodal conditions.

use crate::error::{Error, Result};
use crate::mesh::Element;

/// Half-interval of an element: `[a, m]` or `[m, b]`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Segment {
    Am,
    Mb,
}

/// Nodal point of an element.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Node {
    A,
    M,
    B,
}

impl Segment {
    pub const ALL: [Segment; 2] = [Segment::Am, Segment::Mb];

    /// Local `t` range of the segment.
    pub fn local_range(self) -> (f64, f64) {
        match self {
            Segment::Am => (0.0, 0.5),
            Segment::Mb => (0.5, 1.0),
        }
    }

    pub(crate) fn index(self) -> usize {
        self as usize
    }
}

impl Node {
    pub const ALL: [Node; 3] = [Node::A, Node::M, Node::B];

    pub fn local(self) -> f64 {
        match self {
            Node::A => 0.0,
            Node::M => 0.5,
            Node::B => 1.0,
        }
    }

    pub(crate) fn index(self) -> usize {
        self as usize
    }
}

/// Identifies one of the ten shape functions.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum ShapeKind {
    /// `ω_s^p`: piecewise-constant one-form expanding `f^p` and `p`.
    POneForm(Segment),
    /// `ω_l^q`: affine zero-form expanding `e^q`.
    QZeroForm(Node),
    /// `ω_s^q`: affine one-form expanding `f^q` and `q`.
    QOneForm(Segment),
    /// `ω_l^p`: quadratic zero-form expanding `e^p`.
    PZeroForm(Node),
}

impl ShapeKind {
    pub const ALL: [ShapeKind; 10] = [
        ShapeKind::POneForm(Segment::Am),
        ShapeKind::POneForm(Segment::Mb),
        ShapeKind::QZeroForm(Node::A),
        ShapeKind::QZeroForm(Node::M),
        ShapeKind::QZeroForm(Node::B),
        ShapeKind::QOneForm(Segment::Am),
        ShapeKind::QOneForm(Segment::Mb),
        ShapeKind::PZeroForm(Node::A),
        ShapeKind::PZeroForm(Node::M),
        ShapeKind::PZeroForm(Node::B),
    ];

    pub fn is_one_form(self) -> bool {
        matches!(self, ShapeKind::POneForm(_) | ShapeKind::QOneForm(_))
    }

    fn index(self) -> usize {
        match self {
            ShapeKind::POneForm(s) => s.index(),
            ShapeKind::QZeroForm(l) => 2 + l.index(),
            ShapeKind::QOneForm(s) => 5 + s.index(),
            ShapeKind::PZeroForm(l) => 7 + l.index(),
        }
    }
}

/// Piecewise quadratic in the local coordinate, with coefficients
/// `[c0, c1, c2]` of `c0 + c1 t + c2 t^2` on each half.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LocalPoly {
    pub left: [f64; 3],
    pub right: [f64; 3],
}

impl LocalPoly {
    const fn whole(c: [f64; 3]) -> Self {
        Self { left: c, right: c }
    }

    const fn split(left: [f64; 3], right: [f64; 3]) -> Self {
        Self { left, right }
    }

    /// Value at local `t`; at `t = 1/2` the left branch is used.
    pub fn eval(&self, t: f64) -> f64 {
        let c = if t <= 0.5 { &self.left } else { &self.right };
        c[0] + t * (c[1] + t * c[2])
    }

    /// Derivative with respect to `t`.
    pub fn eval_derivative(&self, t: f64) -> f64 {
        let c = if t <= 0.5 { &self.left } else { &self.right };
        c[1] + 2.0 * t * c[2]
    }

    /// Exact integral over `[t0, t1]` with `0 <= t0 <= t1 <= 1`.
    pub fn integral(&self, t0: f64, t1: f64) -> f64 {
        self.product_integral(&ONE, t0, t1)
    }

    /// Exact integral of the product of two piecewise quadratics over
    /// `[t0, t1]`.
    pub fn product_integral(&self, other: &LocalPoly, t0: f64, t1: f64) -> f64 {
        let mut total = 0.0;
        if t0 < 0.5 {
            total += poly_product_integral(&self.left, &other.left, t0, t1.min(0.5));
        }
        if t1 > 0.5 {
            total += poly_product_integral(&self.right, &other.right, t0.max(0.5), t1);
        }
        total
    }
}

const ONE: LocalPoly = LocalPoly::whole([1.0, 0.0, 0.0]);

fn poly_product_integral(p: &[f64; 3], q: &[f64; 3], t0: f64, t1: f64) -> f64 {
    let mut prod = [0.0; 5];
    for (i, pi) in p.iter().enumerate() {
        for (j, qj) in q.iter().enumerate() {
            prod[i + j] += pi * qj;
        }
    }
    // Horner form of the antiderivative.
    let anti = |t: f64| {
        prod.iter()
            .enumerate()
            .rev()
            .fold(0.0, |acc, (k, c)| acc * t + c / (k as f64 + 1.0))
            * t
    };
    anti(t1) - anti(t0)
}

const fn local_poly(kind: ShapeKind) -> LocalPoly {
    match kind {
        ShapeKind::POneForm(Segment::Am) => LocalPoly::split([2.0, 0.0, 0.0], [0.0, 0.0, 0.0]),
        ShapeKind::POneForm(Segment::Mb) => LocalPoly::split([0.0, 0.0, 0.0], [2.0, 0.0, 0.0]),
        ShapeKind::QZeroForm(Node::A) => LocalPoly::whole([1.0, -1.0, 0.0]),
        ShapeKind::QZeroForm(Node::M) => LocalPoly::split([0.0, 2.0, 0.0], [2.0, -2.0, 0.0]),
        ShapeKind::QZeroForm(Node::B) => LocalPoly::whole([0.0, 1.0, 0.0]),
        ShapeKind::QOneForm(Segment::Am) => LocalPoly::whole([3.0, -4.0, 0.0]),
        ShapeKind::QOneForm(Segment::Mb) => LocalPoly::whole([-1.0, 4.0, 0.0]),
        ShapeKind::PZeroForm(Node::A) => LocalPoly::whole([1.0, -2.0, 1.0]),
        ShapeKind::PZeroForm(Node::M) => LocalPoly::whole([0.0, 4.0, -4.0]),
        ShapeKind::PZeroForm(Node::B) => LocalPoly::whole([0.0, 0.0, 1.0]),
    }
}

/// All ten shape functions instantiated on one element.
#[derive(Debug, Clone, PartialEq)]
pub struct ShapeSet {
    element: Element,
    shapes: [LocalPoly; 10],
}

/// Largest violation of the normalization conditions.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NormalizationReport {
    pub max_residual: f64,
    pub conditions: usize,
}

pub fn build_shape_set(element: Element) -> ShapeSet {
    ShapeSet::new(element)
}

impl ShapeSet {
    pub fn new(element: Element) -> Self {
        let shapes = ShapeKind::ALL.map(local_poly);
        Self { element, shapes }
    }

    pub fn element(&self) -> &Element {
        &self.element
    }

    /// Closed-form record of `kind` in local coordinates.
    pub fn local(&self, kind: ShapeKind) -> &LocalPoly {
        &self.shapes[kind.index()]
    }

    /// Value at physical `z`. One-forms return their density with respect
    /// to `dz`.
    pub fn eval(&self, kind: ShapeKind, z: f64) -> Result<f64> {
        let e = &self.element;
        if !e.contains(z) {
            return Err(Error::OutsideElement { z, a: e.a, b: e.b });
        }
        let t = e.local(z).clamp(0.0, 1.0);
        let value = self.local(kind).eval(t);
        Ok(if kind.is_one_form() { value / e.h } else { value })
    }

    /// Checks every one-form and zero-form normalization condition in
    /// physical coordinates and reports the worst residual.
    pub fn normalization_report(&self) -> NormalizationReport {
        let e = self.element;
        let mut max_residual: f64 = 0.0;
        let mut conditions = 0;
        let mut check = |got: f64, want: f64| {
            max_residual = max_residual.max((got - want).abs());
            conditions += 1;
        };
        let eval = |kind, z| self.eval(kind, z).unwrap_or(f64::NAN);

        // Two-point Gauss is exact for the (at most affine) one-form
        // densities on each half.
        let segment_integral = |kind: ShapeKind, seg: Segment| {
            let (z0, z1) = match seg {
                Segment::Am => (e.a, e.m),
                Segment::Mb => (e.m, e.b),
            };
            let c = 0.5 * (z0 + z1);
            let r = 0.5 * (z1 - z0) / libm::sqrt(3.0);
            0.5 * (z1 - z0) * (eval(kind, c - r) + eval(kind, c + r))
        };
        for s1 in Segment::ALL {
            for s2 in Segment::ALL {
                let want = if s1 == s2 { 1.0 } else { 0.0 };
                check(segment_integral(ShapeKind::POneForm(s2), s1), want);
                check(segment_integral(ShapeKind::QOneForm(s2), s1), want);
            }
        }

        let nodes = [(Node::A, e.a), (Node::M, e.m), (Node::B, e.b)];
        for family in [ShapeKind::QZeroForm as fn(Node) -> ShapeKind, ShapeKind::PZeroForm] {
            for (l, _) in nodes {
                for (at, z) in nodes {
                    // The end functions are only pinned at the ends.
                    if l != Node::M && at == Node::M {
                        continue;
                    }
                    let want = if l == at { 1.0 } else { 0.0 };
                    check(eval(family(l), z), want);
                }
            }
        }

        check(eval(ShapeKind::PZeroForm(Node::A), e.m), 0.25);
        check(eval(ShapeKind::PZeroForm(Node::B), e.m), 0.25);

        NormalizationReport {
            max_residual,
            conditions,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn set(a: f64, b: f64) -> ShapeSet {
        ShapeSet::new(Element::new(a, b).unwrap())
    }

    #[test]
    fn quarter_at_midpoint() {
        let s = set(0.0, 1.0);
        assert!((s.eval(ShapeKind::PZeroForm(Node::A), 0.5).unwrap() - 0.25).abs() < 1e-15);
        assert!((s.eval(ShapeKind::PZeroForm(Node::B), 0.5).unwrap() - 0.25).abs() < 1e-15);
    }

    #[test]
    fn p_one_form_normalized() {
        let s = set(0.0, 1.0);
        let am = s.local(ShapeKind::POneForm(Segment::Am));
        assert!((am.integral(0.0, 0.5) - 1.0).abs() < 1e-15);
        assert!(am.integral(0.5, 1.0).abs() < 1e-15);
    }

    #[test]
    fn hat_function_nodal_values() {
        let s = set(2.0, 4.0);
        let k = ShapeKind::QZeroForm(Node::M);
        assert_eq!(s.eval(k, 3.0).unwrap(), 1.0);
        assert_eq!(s.eval(k, 2.0).unwrap(), 0.0);
        assert_eq!(s.eval(k, 4.0).unwrap(), 0.0);
    }

    #[test]
    fn point_values_on_unit_element() {
        let s = set(0.0, 1.0);
        assert_eq!(s.eval(ShapeKind::POneForm(Segment::Am), 0.2).unwrap(), 2.0);
        assert_eq!(s.eval(ShapeKind::QZeroForm(Node::A), 0.25).unwrap(), 0.75);
        assert_eq!(s.eval(ShapeKind::QOneForm(Segment::Mb), 1.0).unwrap(), 3.0);
    }

    #[test]
    fn densities_match_printed_formulas() {
        // (−4z + a + 3b)/h² and (4z − 3a − b)/h² on a shifted element
        let (a, b) = (1.5, 4.0);
        let s = set(a, b);
        let h = b - a;
        for z in [1.5, 2.0, 2.75, 3.3, 4.0] {
            let am = (-4.0 * z + a + 3.0 * b) / (h * h);
            let mb = (4.0 * z - 3.0 * a - b) / (h * h);
            assert!((s.eval(ShapeKind::QOneForm(Segment::Am), z).unwrap() - am).abs() < 1e-14);
            assert!((s.eval(ShapeKind::QOneForm(Segment::Mb), z).unwrap() - mb).abs() < 1e-14);
            let pa = (z - b) * (z - b) / (h * h);
            let pm = -4.0 * (z - a) * (z - b) / (h * h);
            assert!((s.eval(ShapeKind::PZeroForm(Node::A), z).unwrap() - pa).abs() < 1e-14);
            assert!((s.eval(ShapeKind::PZeroForm(Node::M), z).unwrap() - pm).abs() < 1e-14);
        }
    }

    #[test]
    fn outside_element_is_an_error() {
        let s = set(0.0, 1.0);
        assert!(matches!(
            s.eval(ShapeKind::QZeroForm(Node::A), 1.5),
            Err(Error::OutsideElement { .. })
        ));
    }

    #[test]
    fn normalization_residuals() {
        assert!(set(0.0, 1.0).normalization_report().max_residual <= 1e-13);
        assert!(set(0.0, 1e-6).normalization_report().max_residual <= 1e-10);
        let r = set(-5.0, 7.0).normalization_report();
        assert!(r.max_residual <= 1e-12);
        assert_eq!(r.conditions, 8 + 14 + 2);
    }

    #[test]
    fn product_integral_matches_expansion() {
        let p = LocalPoly::whole([1.0, -2.0, 1.0]);
        // ∫_0^1 (1-t)^4 dt = 1/5
        assert!((p.product_integral(&p, 0.0, 1.0) - 0.2).abs() < 1e-15);
        // ∫_0^{1/2} (1-t)^2 dt = 7/24
        assert!((p.integral(0.0, 0.5) - 7.0 / 24.0).abs() < 1e-15);
    }
}
