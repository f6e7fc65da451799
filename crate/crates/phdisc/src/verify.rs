//! Invariant checks run by the `verify` subcommand.

use std::fmt;

use phdisc_core::element::{build_dirac_pair, compute_matrices, element_state_space};
use phdisc_core::linalg::max_abs;
use phdisc_core::{build_shape_set, compose_chain, Mesh};

pub const TOL_NORMALIZATION: f64 = 1e-12;
pub const TOL_IDENTITY: f64 = 1e-12;
pub const TOL_SKEW: f64 = 1e-12;
pub const TOL_ELEMENT_CONSERVATIVE: f64 = 1e-12;
pub const TOL_AGGREGATE_CONSERVATIVE: f64 = 1e-10;
pub const TOL_PASSIVE_ELEMENT: f64 = -1e-10;
pub const TOL_PASSIVE_AGGREGATE: f64 = -1e-8;
pub const MAX_CONDITION: f64 = 1e12;

#[derive(Debug, Clone, PartialEq)]
pub struct Check {
    pub name: &'static str,
    pub value: f64,
    pub limit: f64,
    /// `true`: pass when `value <= limit`; `false`: when `value >= limit`.
    pub upper: bool,
}

impl Check {
    fn at_most(name: &'static str, value: f64, limit: f64) -> Self {
        Self {
            name,
            value,
            limit,
            upper: true,
        }
    }

    fn at_least(name: &'static str, value: f64, limit: f64) -> Self {
        Self {
            name,
            value,
            limit,
            upper: false,
        }
    }

    pub fn passed(&self) -> bool {
        if self.upper {
            self.value <= self.limit
        } else {
            self.value >= self.limit
        }
    }
}

impl fmt::Display for Check {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let verdict = if self.passed() { "PASS" } else { "FAIL" };
        let rel = if self.upper { "≤" } else { "≥" };
        write!(f, "{verdict} {} = {:.3e} {rel} {:e}", self.name, self.value, self.limit)
    }
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct Report {
    pub checks: Vec<Check>,
}

impl Report {
    pub fn passed(&self) -> bool {
        self.checks.iter().all(Check::passed)
    }
}

impl fmt::Display for Report {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for c in &self.checks {
            writeln!(f, "{c}")?;
        }
        Ok(())
    }
}

/// Element and aggregate invariants over `mesh`, worst case per check.
pub fn run_suite(mesh: &Mesh, sigma: &[f64]) -> phdisc_core::Result<Report> {
    let sigma_of = |i: usize| if sigma.len() == 1 { sigma[0] } else { sigma[i] };
    let (mut norm, mut ident, mut skew, mut cons, mut cond) = (0.0_f64, 0.0_f64, 0.0_f64, 0.0_f64, 0.0_f64);
    let mut min_eig = f64::INFINITY;
    let mut min_rank = usize::MAX;
    for (i, el) in mesh.elements().enumerate() {
        norm = norm.max(build_shape_set(el).normalization_report().max_residual);
        let lossless = compute_matrices(&el, 0.0)?;
        ident = ident.max(max_abs(&lossless.power_identity()));
        let pair = build_dirac_pair(&lossless)?;
        skew = skew.max(pair.skew_residual());
        min_rank = min_rank.min(pair.rank());
        cond = cond.max(pair.condition);
        cons = cons.max(element_state_space(&pair)?.conservative_residual());
        let model = element_state_space(&build_dirac_pair(&compute_matrices(&el, sigma_of(i))?)?)?;
        min_eig = min_eig.min(model.min_dissipation_eigenvalue());
    }
    let mut checks = vec![
        Check::at_most("max shape normalization residual", norm, TOL_NORMALIZATION),
        Check::at_most("max |M4ᵀM2 + M3ᵀM5 + M6ᵀdiag(-1,0,-1)|", ident, TOL_IDENTITY),
        Check::at_most("max |FEᵀ+EFᵀ|", skew, TOL_SKEW),
        Check::at_least("min rank[F|E]", min_rank as f64, 6.0),
        Check::at_most("max cond(F)", cond, MAX_CONDITION),
        Check::at_most(
            "max element conservative residual (σ=0)",
            cons,
            TOL_ELEMENT_CONSERVATIVE,
        ),
        Check::at_least("min eigenvalue of element R", min_eig, TOL_PASSIVE_ELEMENT),
    ];
    let lossless = compose_chain(mesh, &[0.0])?;
    checks.push(Check::at_most(
        "aggregate conservative residual (σ=0)",
        lossless.conservative_residual(),
        TOL_AGGREGATE_CONSERVATIVE,
    ));
    checks.push(Check::at_most(
        "cond estimate of G",
        lossless.interconnection().condition(),
        MAX_CONDITION,
    ));
    if sigma.iter().any(|s| *s != 0.0) {
        let model = compose_chain(mesh, sigma)?;
        checks.push(Check::at_least(
            "min eigenvalue of aggregate R",
            model.min_dissipation_eigenvalue(),
            TOL_PASSIVE_AGGREGATE,
        ));
    }
    Ok(Report { checks })
}
