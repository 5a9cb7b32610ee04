use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::field::{radial_gauge_potential, ModelField, TaylorField};
use crate::spectral::{
    sparse_lowest_eigs, Boundary, Grid2D, HermitianGridOperator, OperatorBuilder,
};

/// Direction of a grid link.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Axis {
    S,
    T,
}

/// Oriented link from node `(i_s, i_t)` to its `+axis` neighbour. On a
/// periodic axis the last node links to the first; `to` then holds the
/// unwrapped coordinates (one period beyond the first node).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Link {
    pub from: (usize, usize),
    pub axis: Axis,
    pub from_coords: (f64, f64),
    pub to_coords: (f64, f64),
    pub wraps: bool,
}

/// Link-phase operator `Σ |u_y − e^{(i/h)∫ₓʸA} u_x|² h²/Δ²`, given the line
/// integral of `A` over every link.
///
/// Off-diagonal entries are `−(h²/Δ²) e^{−(i/h)∫ₓʸA}`; every node keeps the
/// full diagonal `2h²/Δs² + 2h²/Δt²`, so nodes next to a Dirichlet side see
/// a zero ghost value. Bloch angles of the boundary multiply wrap links by
/// `e^{iθ}`.
pub fn assemble_from_links(
    grid: &Grid2D,
    h: f64,
    boundary: Boundary,
    integral: impl Fn(&Link) -> f64,
) -> Result<HermitianGridOperator> {
    if !(h > 0.0 && h.is_finite()) {
        return Err(Error::param(format!("h must be positive, got {h}")));
    }
    let (theta_s, theta_t) = match boundary {
        Boundary::Dirichlet => {
            if grid.s.is_periodic() || grid.t.is_periodic() {
                return Err(Error::param("Dirichlet realisation needs Dirichlet grids on both axes"));
            }
            (0.0, 0.0)
        }
        Boundary::PeriodicS { theta_s } => {
            if !grid.s.is_periodic() || grid.t.is_periodic() {
                return Err(Error::param("periodic-s realisation needs a periodic s-grid and a Dirichlet t-grid"));
            }
            (theta_s, 0.0)
        }
        Boundary::Torus { theta } => {
            if !grid.s.is_periodic() || !grid.t.is_periodic() {
                return Err(Error::param("torus realisation needs periodic grids on both axes"));
            }
            (theta[0], theta[1])
        }
    };
    let (ns, nt) = (grid.s.points(), grid.t.points());
    let (ds, dt) = (grid.s.spacing(), grid.t.spacing());
    let (cs, ct) = (h * h / (ds * ds), h * h / (dt * dt));
    let mut builder = OperatorBuilder::new(grid.len());
    for is in 0..ns {
        for it in 0..nt {
            let x = grid.index(is, it);
            builder.add_diagonal(x, 2.0 * cs + 2.0 * ct);
            let here = (grid.s.node(is), grid.t.node(it));
            let s_wraps = is + 1 == ns;
            if !s_wraps || grid.s.is_periodic() {
                let link = Link {
                    from: (is, it),
                    axis: Axis::S,
                    from_coords: here,
                    to_coords: (here.0 + ds, here.1),
                    wraps: s_wraps,
                };
                let mut value = -cs * Complex64::from_polar(1.0, -integral(&link) / h);
                if s_wraps {
                    value *= Complex64::from_polar(1.0, theta_s);
                }
                let y = grid.index((is + 1) % ns, it);
                if y != x {
                    builder.add_link(x, y, value);
                } else {
                    builder.add_diagonal(x, 2.0 * value.re);
                }
            }
            let t_wraps = it + 1 == nt;
            if !t_wraps || grid.t.is_periodic() {
                let link = Link {
                    from: (is, it),
                    axis: Axis::T,
                    from_coords: here,
                    to_coords: (here.0, here.1 + dt),
                    wraps: t_wraps,
                };
                let mut value = -ct * Complex64::from_polar(1.0, -integral(&link) / h);
                if t_wraps {
                    value *= Complex64::from_polar(1.0, theta_t);
                }
                let y = grid.index(is, (it + 1) % nt);
                if y != x {
                    builder.add_link(x, y, value);
                } else {
                    builder.add_diagonal(x, 2.0 * value.re);
                }
            }
        }
    }
    Ok(builder.build(boundary))
}

/// Link integrals of `A = (A₁, A₂)` by the midpoint rule.
pub fn assemble_with_potential(
    grid: &Grid2D,
    h: f64,
    boundary: Boundary,
    potential: impl Fn(f64, f64) -> (f64, f64),
) -> Result<HermitianGridOperator> {
    assemble_from_links(grid, h, boundary, |link| midpoint(link, &potential))
}

fn midpoint(link: &Link, potential: &impl Fn(f64, f64) -> (f64, f64)) -> f64 {
    let (s0, t0) = link.from_coords;
    let (s1, t1) = link.to_coords;
    let (a1, a2) = potential(0.5 * (s0 + s1), 0.5 * (t0 + t1));
    match link.axis {
        Axis::S => a1 * (s1 - s0),
        Axis::T => a2 * (t1 - t0),
    }
}

fn strip_half_width(grid: &Grid2D) -> f64 {
    grid.t.lower().abs().max(grid.t.upper().abs())
}

/// `H` for a model field with the normal-gauge potential shifted by the
/// constant `shift` (a pure gauge change on Dirichlet domains). Link
/// phases use the exact integrals of `A₁`.
pub(crate) fn assemble_model(
    field: &ModelField,
    h: f64,
    grid: &Grid2D,
    boundary: Boundary,
    shift: f64,
) -> Result<HermitianGridOperator> {
    field.check_extent(strip_half_width(grid))?;
    assemble_from_links(grid, h, boundary, |link| model_link_integral(field, link, shift))
}

/// Exact link integral of the normal-gauge potential minus `shift` along `s`.
pub(crate) fn model_link_integral(field: &ModelField, link: &Link, shift: f64) -> f64 {
    match link.axis {
        Axis::S => {
            let (s0, t) = link.from_coords;
            let s1 = link.to_coords.0;
            field.a1_integral(s0, s1, t) - shift * (s1 - s0)
        }
        Axis::T => 0.0,
    }
}

/// Dirichlet one-well operator on a rectangle `[s₀, s₁] × [−T, T]`.
pub fn assemble_h_dirichlet(field: &ModelField, h: f64, grid: &Grid2D) -> Result<HermitianGridOperator> {
    if grid.periodic_s() {
        return Err(Error::param("the Dirichlet operator needs a Dirichlet s-grid"));
    }
    assemble_model(field, h, grid, Boundary::Dirichlet, 0.0)
}

/// Half-cylinder operator: periodic in `s`, Dirichlet at `t = ±T`.
pub fn assemble_h0(field: &ModelField, h: f64, grid: &Grid2D) -> Result<HermitianGridOperator> {
    if !grid.periodic_s() {
        return Err(Error::param("the cylinder operator needs a periodic s-grid"));
    }
    assemble_model(field, h, grid, Boundary::PeriodicS { theta_s: 0.0 }, 0.0)
}

/// `K^h = (ih d + A⁰)*(ih d + A⁰)` with the radial gauge, Dirichlet on the
/// grid rectangle (axis 1 = `s`, axis 2 = `t`).
pub fn assemble_k(field: &TaylorField, h: f64, grid: &Grid2D) -> Result<HermitianGridOperator> {
    let potential = radial_gauge_potential(field);
    assemble_with_potential(grid, h, Boundary::Dirichlet, |x1, x2| potential.eval(x1, x2))
}

/// Residual tolerance used for the model operators.
pub(crate) fn model_tol(op: &HermitianGridOperator) -> f64 {
    1e-10 * op.norm_bound().max(1e-300)
}

/// The `count` lowest eigenvalues, shift 0; round-off negatives within the
/// solver tolerance are reported as 0.
pub fn lowest_eigs_model(op: &HermitianGridOperator, count: usize) -> Result<Vec<f64>> {
    let tol = model_tol(op);
    let values = sparse_lowest_eigs(op, count, 0.0, tol)?;
    Ok(values
        .into_iter()
        .map(|v| if v < 0.0 && v >= -tol { 0.0 } else { v })
        .collect())
}
