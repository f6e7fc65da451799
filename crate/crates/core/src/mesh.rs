//! Spatial domain and its partition into elements.

use alloc::vec::Vec;

use crate::error::{Error, Result};

/// Smallest admissible element width, relative to the domain length.
pub const MIN_RELATIVE_WIDTH: f64 = 1e-12;

/// The interval `[z_start, z_end]`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Domain {
    pub z_start: f64,
    pub z_end: f64,
}

impl Domain {
    pub fn new(z_start: f64, z_end: f64) -> Result<Self> {
        if !(z_start.is_finite() && z_end.is_finite() && z_start < z_end) {
            return Err(Error::InvalidDomain {
                start: z_start,
                end: z_end,
            });
        }
        Ok(Self { z_start, z_end })
    }

    pub fn length(&self) -> f64 {
        self.z_end - self.z_start
    }
}

/// One mesh cell `[a, b]` with its interior midpoint `m`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Element {
    pub a: f64,
    pub m: f64,
    pub b: f64,
    pub h: f64,
}

impl Element {
    pub fn new(a: f64, b: f64) -> Result<Self> {
        let h = b - a;
        if !(a.is_finite() && b.is_finite() && h > 0.0) {
            return Err(Error::InvalidElement { a, b });
        }
        let m = 0.5 * (a + b);
        if !(a < m && m < b) {
            return Err(Error::InvalidElement { a, b });
        }
        Ok(Self { a, m, b, h })
    }

    /// Local coordinate `t = (z - a) / h` in `[0, 1]`.
    #[inline]
    pub fn local(&self, z: f64) -> f64 {
        (z - self.a) / self.h
    }

    pub fn contains(&self, z: f64) -> bool {
        self.a <= z && z <= self.b
    }
}

/// Ordered partition of a [`Domain`] into `N >= 1` elements.
#[derive(Debug, Clone, PartialEq)]
pub struct Mesh {
    domain: Domain,
    breakpoints: Vec<f64>,
}

impl Mesh {
    pub fn uniform(domain: Domain, n: usize) -> Result<Self> {
        build_uniform_mesh(domain, n)
    }

    pub fn domain(&self) -> Domain {
        self.domain
    }

    pub fn breakpoints(&self) -> &[f64] {
        &self.breakpoints
    }

    pub fn n_elements(&self) -> usize {
        self.breakpoints.len() - 1
    }

    /// Element `i`, counted from 1.
    pub fn element_of(&self, i: usize) -> Result<Element> {
        let count = self.n_elements();
        if i == 0 || i > count {
            return Err(Error::ElementIndex { index: i, count });
        }
        Element::new(self.breakpoints[i - 1], self.breakpoints[i])
    }

    pub fn elements(&self) -> impl ExactSizeIterator<Item = Element> + '_ {
        self.breakpoints.windows(2).map(|w| Element {
            a: w[0],
            m: 0.5 * (w[0] + w[1]),
            b: w[1],
            h: w[1] - w[0],
        })
    }

    pub fn widths(&self) -> impl Iterator<Item = f64> + '_ {
        self.breakpoints.windows(2).map(|w| w[1] - w[0])
    }
}

/// Partition `domain` into `n` elements of equal width.
pub fn build_uniform_mesh(domain: Domain, n: usize) -> Result<Mesh> {
    let domain = Domain::new(domain.z_start, domain.z_end)?;
    if n == 0 {
        return Err(Error::NoElements);
    }
    let len = domain.length();
    let mut breakpoints: Vec<f64> = (0..=n)
        .map(|i| domain.z_start + len * (i as f64) / (n as f64))
        .collect();
    breakpoints[n] = domain.z_end;
    build_mesh(domain, breakpoints)
}

/// Build a mesh from explicit breakpoints, which must run strictly
/// increasing from `z_start` to `z_end`.
pub fn build_mesh(domain: Domain, breakpoints: Vec<f64>) -> Result<Mesh> {
    let domain = Domain::new(domain.z_start, domain.z_end)?;
    if breakpoints.len() < 2 {
        return Err(Error::NoElements);
    }
    if breakpoints[0] != domain.z_start || breakpoints[breakpoints.len() - 1] != domain.z_end {
        return Err(Error::EndpointMismatch {
            start: domain.z_start,
            end: domain.z_end,
        });
    }
    let min = MIN_RELATIVE_WIDTH * domain.length();
    for (i, w) in breakpoints.windows(2).enumerate() {
        if !(w[0].is_finite() && w[1].is_finite() && w[0] < w[1]) {
            return Err(Error::UnsortedBreakpoints { index: i + 1 });
        }
        let width = w[1] - w[0];
        if width < min {
            return Err(Error::DegenerateElement {
                index: i + 1,
                width,
                min,
            });
        }
    }
    Ok(Mesh { domain, breakpoints })
}

#[cfg(test)]
mod tests {
    use super::*;
    use alloc::vec;

    fn unit() -> Domain {
        Domain::new(0.0, 1.0).unwrap()
    }

    #[test]
    fn uniform_twenty_on_ten() {
        let mesh = build_uniform_mesh(Domain::new(0.0, 10.0).unwrap(), 20).unwrap();
        assert_eq!(mesh.n_elements(), 20);
        for (i, z) in mesh.breakpoints().iter().enumerate() {
            assert!((z - 0.5 * i as f64).abs() < 1e-14);
        }
        assert_eq!(mesh.breakpoints()[20], 10.0);
    }

    #[test]
    fn single_element() {
        let mesh = build_uniform_mesh(unit(), 1).unwrap();
        assert_eq!(mesh.breakpoints(), &[0.0, 1.0]);
    }

    #[test]
    fn uniform_widths() {
        let mesh = build_uniform_mesh(Domain::new(0.0, 3.0).unwrap(), 3).unwrap();
        assert!(mesh.widths().all(|w| (w - 1.0).abs() < 1e-15));
    }

    #[test]
    fn zero_elements_rejected() {
        assert_eq!(build_uniform_mesh(unit(), 0), Err(Error::NoElements));
    }

    #[test]
    fn degenerate_domain_rejected() {
        assert!(Domain::new(1.0, 1.0).is_err());
        assert!(Domain::new(2.0, 1.0).is_err());
        assert!(Domain::new(0.0, f64::NAN).is_err());
    }

    #[test]
    fn explicit_breakpoints() {
        let mesh = build_mesh(unit(), vec![0.0, 0.3, 1.0]).unwrap();
        let w: Vec<f64> = mesh.widths().collect();
        assert!((w[0] - 0.3).abs() < 1e-15 && (w[1] - 0.7).abs() < 1e-15);
        assert_eq!(build_mesh(unit(), vec![0.0, 1.0]).unwrap().n_elements(), 1);
    }

    #[test]
    fn duplicate_breakpoint_rejected() {
        assert_eq!(
            build_mesh(unit(), vec![0.0, 0.5, 0.5, 1.0]),
            Err(Error::UnsortedBreakpoints { index: 2 })
        );
    }

    #[test]
    fn endpoint_mismatch_rejected() {
        assert!(matches!(
            build_mesh(unit(), vec![0.1, 1.0]),
            Err(Error::EndpointMismatch { .. })
        ));
    }

    #[test]
    fn near_degenerate_element_rejected() {
        assert!(matches!(
            build_mesh(unit(), vec![0.0, 0.5, 0.5 + 1e-14, 1.0]),
            Err(Error::DegenerateElement { index: 2, .. })
        ));
    }

    #[test]
    fn element_lookup() {
        let mesh = build_mesh(unit(), vec![0.0, 0.5, 1.0]).unwrap();
        let e1 = mesh.element_of(1).unwrap();
        assert_eq!((e1.a, e1.m, e1.b), (0.0, 0.25, 0.5));
        let e2 = mesh.element_of(2).unwrap();
        assert_eq!((e2.a, e2.m, e2.b), (0.5, 0.75, 1.0));
        let single = build_mesh(unit(), vec![0.0, 1.0]).unwrap();
        assert_eq!(single.element_of(2), Err(Error::ElementIndex { index: 2, count: 1 }));
        assert!(single.element_of(0).is_err());
    }
}
