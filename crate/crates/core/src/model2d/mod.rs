//! Link-phase discretisations of the two-dimensional model operators and
//! the scaling studies built on them.

mod assemble;
mod study;

pub use assemble::{
    assemble_from_links, assemble_h0, assemble_h_dirichlet, assemble_k, assemble_with_potential,
    lowest_eigs_model, Axis, Link,
};
pub use study::{
    conjecture_study, default_t_extent, dilation_study, dirichlet_grid, DilationStudy, transverse_length, GridPolicy, ScalingStudy,
};

#[cfg(test)]
mod tests {
    use super::*;
    use crate::field::{ModelField, Profile, TaylorField};
    use crate::spectral::{Boundary, Grid1D, Grid2D};
    use num_complex::Complex64;
    use std::f64::consts::PI;

    fn small_grid(periodic: bool) -> Grid2D {
        let s = if periodic {
            Grid1D::periodic(0.0, 2.0 * PI, 12).unwrap()
        } else {
            Grid1D::new(0.0, 2.0 * PI, 11).unwrap()
        };
        Grid2D::new(s, Grid1D::symmetric(1.0, 9).unwrap())
    }

    #[test]
    fn zero_potential_gives_the_scaled_laplacian() {
        let grid = small_grid(false);
        let h = 0.3;
        let op = assemble_with_potential(&grid, h, Boundary::Dirichlet, |_, _| (0.0, 0.0)).unwrap();
        assert!(op.is_hermitian());
        assert!(op.entries().all(|(_, _, v)| v.im == 0.0));
        let (ds, dt) = (grid.s.spacing(), grid.t.spacing());
        let mode = |n: usize, d: f64, l: f64| 4.0 / (d * d) * (n as f64 * PI * d / (2.0 * l)).sin().powi(2);
        let expected = h * h * (mode(1, ds, 2.0 * PI) + mode(1, dt, 2.0));
        let got = lowest_eigs_model(&op, 1).unwrap()[0];
        assert!((got - expected).abs() < 1e-10 * expected.max(1.0), "{got} vs {expected}");
    }

    #[test]
    fn periodic_laplacian_bottom_is_first_t_mode() {
        let grid = small_grid(true);
        let field_free =
            assemble_with_potential(&grid, 1.0, Boundary::PeriodicS { theta_s: 0.0 }, |_, _| (0.0, 0.0)).unwrap();
        let dt = grid.t.spacing();
        let expected = 4.0 / (dt * dt) * (PI * dt / 4.0).sin().powi(2);
        let got = lowest_eigs_model(&field_free, 1).unwrap()[0];
        assert!((got - expected).abs() < 1e-10);
        // continuum limit (π/(2T))² with T = 1
        assert!((expected - (PI / 2.0).powi(2)).abs() < 0.05);
    }

    #[test]
    fn constant_potential_is_a_gauge_on_dirichlet_domains() {
        let grid = small_grid(false);
        let h = 0.2;
        let c = 0.37;
        let plain = assemble_with_potential(&grid, h, Boundary::Dirichlet, |_, _| (0.0, 0.0)).unwrap();
        let shifted = assemble_with_potential(&grid, h, Boundary::Dirichlet, |_, _| (c, 0.0)).unwrap();
        let a = plain.dense_spectrum();
        let b = shifted.dense_spectrum();
        for (x, y) in a.iter().zip(&b) {
            assert!((x - y).abs() < 1e-11);
        }
        // on the cylinder the same constant changes the spectrum
        let pg = small_grid(true);
        let p0 = assemble_with_potential(&pg, h, Boundary::PeriodicS { theta_s: 0.0 }, |_, _| (0.0, 0.0)).unwrap();
        let p1 = assemble_with_potential(&pg, h, Boundary::PeriodicS { theta_s: 0.0 }, |_, _| (c, 0.0)).unwrap();
        assert!((p0.dense_spectrum()[0] - p1.dense_spectrum()[0]).abs() > 1e-6);
    }

    #[test]
    fn discrete_gauge_transform_conjugates_the_matrix() {
        let grid = small_grid(true);
        let field = ModelField::new(1, Profile::cosine_bump(1.0, 0.5, 0.0), Profile::constant(0.2)).unwrap();
        let h = 0.25;
        let base = assemble_h0(&field, h, &grid).unwrap();
        let phi = |is: usize, it: usize| 0.3 * (is as f64).sin() + 0.1 * (it as f64) * (is as f64).cos();
        let gauged = assemble_from_links(&grid, h, Boundary::PeriodicS { theta_s: 0.0 }, |link| {
            let (is, it) = link.from;
            let (js, jt) = match link.axis {
                Axis::S => ((is + 1) % grid.s.points(), it),
                Axis::T => (is, it + 1),
            };
            let exact = match link.axis {
                Axis::S => field.a1_integral(link.from_coords.0, link.to_coords.0, link.from_coords.1),
                Axis::T => 0.0,
            };
            exact + phi(js, jt) - phi(is, it)
        })
        .unwrap();
        for (x, y, v) in base.entries() {
            let (xs, xt) = (x / grid.t.points(), x % grid.t.points());
            let (ys, yt) = (y / grid.t.points(), y % grid.t.points());
            let conj = Complex64::from_polar(1.0, (phi(xs, xt) - phi(ys, yt)) / h);
            let w = gauged.entry(x, y);
            assert!((w - v * conj).norm() <= 1e-12 * v.norm().max(1.0));
        }
        let a = base.dense_spectrum();
        let b = gauged.dense_spectrum();
        for (x, y) in a.iter().zip(&b) {
            assert!((x - y).abs() < 1e-10);
        }
    }

    #[test]
    fn cylinder_bottom_is_below_dirichlet_bottom() {
        let field = ModelField::uniform(1, 1.0).unwrap();
        let h = 0.5;
        let t = Grid1D::symmetric(1.5, 15).unwrap();
        let dirichlet = Grid2D::new(Grid1D::new(0.0, 2.0 * PI, 23).unwrap(), t);
        let periodic = Grid2D::new(Grid1D::periodic(0.0, 2.0 * PI, 24).unwrap(), t);
        let d = lowest_eigs_model(&assemble_h_dirichlet(&field, h, &dirichlet).unwrap(), 1).unwrap()[0];
        let p = lowest_eigs_model(&assemble_h0(&field, h, &periodic).unwrap(), 1).unwrap()[0];
        assert!(p <= d + 1e-10, "{p} > {d}");
    }

    #[test]
    fn strip_outside_validity_is_rejected() {
        let field = ModelField::uniform(1, 1.0).unwrap();
        let grid = Grid2D::new(Grid1D::new(0.0, 2.0 * PI, 7).unwrap(), Grid1D::symmetric(5.0, 7).unwrap());
        assert!(assemble_h_dirichlet(&field, 0.1, &grid).is_err());
        assert!(assemble_h0(&field, 0.1, &grid).is_err());
    }

    #[test]
    fn eigenvalues_are_nonnegative() {
        let f = TaylorField::new(2, &[((2, 0), 1.0), ((0, 2), 1.0)]).unwrap();
        let g = Grid1D::symmetric(3.0, 19).unwrap();
        let op = assemble_k(&f, 1.0, &Grid2D::new(g, g)).unwrap();
        assert!(op.is_hermitian());
        let eigs = lowest_eigs_model(&op, 3).unwrap();
        assert!(eigs[0] >= 0.0 && eigs.windows(2).all(|w| w[0] <= w[1]));
    }

    #[test]
    fn discrete_dilation_is_exact_on_scaled_grids() {
        let f = TaylorField::new(2, &[((2, 0), 1.0), ((0, 2), 0.5)]).unwrap();
        let study = dilation_study(&f, &[0.5, 0.25], 2, 3.0, 15).unwrap();
        assert!(study.max_relative_error() < 1e-8, "{}", study.max_relative_error());
        assert_eq!(study.to_csv().lines().count(), 1 + 2 * 2);
        assert!(dilation_study(&f, &[], 2, 3.0, 15).is_err());
    }

    #[test]
    fn policy_rejects_increasing_h() {
        let field = ModelField::uniform(1, 1.0).unwrap();
        assert!(conjecture_study(&field, &[0.05, 0.1], &GridPolicy::default()).is_err());
        assert!(conjecture_study(&field, &[], &GridPolicy::default()).is_err());
    }
}
