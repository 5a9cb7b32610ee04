use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// How the nodes of a [`Grid1D`] sit inside `[lower, upper]`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum GridKind {
    /// `points` interior nodes, homogeneous Dirichlet values at both ends.
    Dirichlet,
    /// `points` nodes covering one period; `upper` is identified with `lower`.
    Periodic,
}

/// Uniform one-dimensional grid.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Grid1D {
    lower: f64,
    upper: f64,
    points: usize,
    kind: GridKind,
}

impl Grid1D {
    /// Dirichlet grid with `points` interior nodes, spacing
    /// `(upper − lower)/(points + 1)`.
    pub fn new(lower: f64, upper: f64, points: usize) -> Result<Self> {
        Self::with_kind(lower, upper, points, GridKind::Dirichlet)
    }

    /// Periodic grid with `points` nodes, spacing `(upper − lower)/points`.
    pub fn periodic(lower: f64, upper: f64, points: usize) -> Result<Self> {
        Self::with_kind(lower, upper, points, GridKind::Periodic)
    }

    /// Dirichlet grid on `[−half_width, half_width]`.
    pub fn symmetric(half_width: f64, points: usize) -> Result<Self> {
        Self::new(-half_width, half_width, points)
    }

    fn with_kind(lower: f64, upper: f64, points: usize, kind: GridKind) -> Result<Self> {
        if !(lower.is_finite() && upper.is_finite()) || lower >= upper {
            return Err(Error::param(format!(
                "grid bounds must satisfy lower < upper, got [{lower}, {upper}]"
            )));
        }
        if points == 0 {
            return Err(Error::param("grid needs at least one node"));
        }
        Ok(Grid1D {
            lower,
            upper,
            points,
            kind,
        })
    }

    pub fn lower(&self) -> f64 {
        self.lower
    }

    pub fn upper(&self) -> f64 {
        self.upper
    }

    pub fn points(&self) -> usize {
        self.points
    }

    pub fn kind(&self) -> GridKind {
        self.kind
    }

    pub fn is_periodic(&self) -> bool {
        self.kind == GridKind::Periodic
    }

    pub fn spacing(&self) -> f64 {
        match self.kind {
            GridKind::Dirichlet => (self.upper - self.lower) / (self.points + 1) as f64,
            GridKind::Periodic => (self.upper - self.lower) / self.points as f64,
        }
    }

    pub fn node(&self, i: usize) -> f64 {
        match self.kind {
            GridKind::Dirichlet => self.lower + (i + 1) as f64 * self.spacing(),
            GridKind::Periodic => self.lower + i as f64 * self.spacing(),
        }
    }

    pub fn nodes(&self) -> Vec<f64> {
        (0..self.points).map(|i| self.node(i)).collect()
    }

    /// Same interval with the spacing halved.
    pub fn refined(&self) -> Self {
        let points = match self.kind {
            GridKind::Dirichlet => 2 * self.points + 1,
            GridKind::Periodic => 2 * self.points,
        };
        Grid1D { points, ..*self }
    }

    /// True when the nodes are placed symmetrically about zero.
    pub fn is_symmetric(&self) -> bool {
        self.kind == GridKind::Dirichlet
            && (self.lower + self.upper).abs() <= 1e-14 * self.upper.abs().max(1.0)
    }
}

/// Tensor grid in the `(s, t)` plane; `s` runs along the zero curve of the
/// field and `t` is the normal coordinate. Unknowns are stored with `t`
/// fastest: index `i_s * t.points() + i_t`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Grid2D {
    pub s: Grid1D,
    pub t: Grid1D,
}

impl Grid2D {
    pub fn new(s: Grid1D, t: Grid1D) -> Self {
        Grid2D { s, t }
    }

    pub fn periodic_s(&self) -> bool {
        self.s.is_periodic()
    }

    pub fn len(&self) -> usize {
        self.s.points() * self.t.points()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    #[inline]
    pub fn index(&self, i_s: usize, i_t: usize) -> usize {
        i_s * self.t.points() + i_t
    }

    /// Both axes refined by a factor of two.
    pub fn refined(&self) -> Self {
        Grid2D {
            s: self.s.refined(),
            t: self.t.refined(),
        }
    }

    /// Area element `Δs·Δt`.
    pub fn cell_area(&self) -> f64 {
        self.s.spacing() * self.t.spacing()
    }
}
