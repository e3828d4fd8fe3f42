//! Null-field checks: plane-strain conditions, traction-free boundary and equilibrium.

use serde::{Deserialize, Serialize};

use crate::cosine::CosinePotential;
use crate::error::Result;
use crate::field::{
    divergence_fd, hooke_strain_from_stress, traction_on_boundary, ElasticConstants, Grid3, SymTensorField3,
};
use crate::trig::Axis;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Tolerances {
    pub eps22: f64,
    pub eps33: f64,
    pub traction: f64,
    /// Bound on the analytic divergence at the nodes (series input only).
    pub div_analytic: f64,
    /// Optional bound on the finite-difference divergence, which is only
    /// second-order small and so unchecked by default.
    pub div_fd: Option<f64>,
}

impl Default for Tolerances {
    fn default() -> Self {
        Tolerances { eps22: 1e-10, eps33: 1e-10, traction: 1e-10, div_analytic: 1e-12, div_fd: None }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Check {
    pub name: String,
    pub value: f64,
    pub tol: Option<f64>,
    pub pass: bool,
}

/// Maxima over the grid nodes.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Diagnostics {
    pub m: usize,
    pub max_eps22: f64,
    pub max_eps33: f64,
    pub max_traction: f64,
    pub max_div_fd: f64,
    pub max_div_analytic: Option<f64>,
}

impl Diagnostics {
    pub fn checks(&self, tol: &Tolerances) -> Vec<Check> {
        let check = |name: &str, value: f64, tol: Option<f64>| Check {
            name: name.into(),
            value,
            tol,
            pass: tol.is_none_or(|t| value <= t) && value.is_finite(),
        };
        let mut out = vec![
            check("eps22", self.max_eps22, Some(tol.eps22)),
            check("eps33", self.max_eps33, Some(tol.eps33)),
            check("traction", self.max_traction, Some(tol.traction)),
            check("div_fd", self.max_div_fd, tol.div_fd),
        ];
        if let Some(v) = self.max_div_analytic {
            out.push(check("div_analytic", v, Some(tol.div_analytic)));
        }
        out
    }

    pub fn passes(&self, tol: &Tolerances) -> bool {
        self.checks(tol).iter().all(|c| c.pass)
    }
}

/// Diagnostics of a sampled stress field (finite-difference divergence only).
pub fn diagnose_field(sigma: &SymTensorField3, c: &ElasticConstants) -> Result<Diagnostics> {
    let strain = hooke_strain_from_stress(sigma, c)?;
    Ok(Diagnostics {
        m: sigma.grid.m(),
        max_eps22: strain.max_abs(1),
        max_eps33: strain.max_abs(2),
        max_traction: traction_on_boundary(sigma).max_abs(),
        max_div_fd: divergence_fd(sigma)?.max_abs(),
        max_div_analytic: None,
    })
}

/// Diagnostics of a cosine potential's stress, adding the analytic divergence.
pub fn diagnose_potential(p: &CosinePotential, grid: Grid3, c: &ElasticConstants) -> Result<Diagnostics> {
    p.validate()?;
    let series = p.stress_series();
    let mut d = diagnose_field(&series.eval(grid), c)?;
    let div = series
        .divergence()
        .iter()
        .flat_map(|f| f.eval_on([Axis::Closed(grid.m()); 3]))
        .fold(0.0f64, |a, v| a.max(v.abs()));
    d.max_div_analytic = Some(div);
    Ok(d)
}
