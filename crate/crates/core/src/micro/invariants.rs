use num_complex::Complex64;
use serde::Serialize;

use super::rhs::MicroSystem;
use super::state::{dot, spin, MicroField, MicroState};
use crate::error::Result;
use crate::models::MicroModelSpec;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct MicroInvariants {
    pub energy: f64,
    /// `None` for the AF chain.
    pub momentum: Option<f64>,
}

/// Conserved energy and momentum of the rescaled flow.
///
/// GP: `E = int eps^2/4 |u_x|^2 + V(u)`, `P = int <u, i u_x>`.
/// LL: `E = int eps^2/2 |G_x|^2 + 2 V(G)`, `P = int (G_3 - cos theta0) psi_x`.
/// AF: `E = int eps^2/4 (|u_x|^2 + |v_x|^2) + |u + v|^2 - eps u . v_x`.
pub fn micro_invariants(spec: &MicroModelSpec, s: &MicroState) -> Result<MicroInvariants> {
    let sys = MicroSystem::new(spec, *s.grid(), s.eps())?;
    let grid = *s.grid();
    let sp = sys.spectral();
    let e = s.eps();
    let e2 = e * e;
    match s.field() {
        MicroField::Gp(u) => {
            let ux = sp.derivative(u, 1);
            let d = u.dim();
            let mut dens = vec![0.0; u.len()];
            let mut mom = vec![0.0; u.len()];
            let mut amps = vec![0.0; d];
            for j in 0..u.len() {
                let mut kin = 0.0;
                for k in 0..d {
                    let z = u.at(k, j);
                    let zx = ux.at(k, j);
                    amps[k] = z.norm();
                    kin += zx.norm_sqr();
                    mom[j] += (z.conj() * Complex64::i() * zx).re;
                }
                dens[j] = 0.25 * e2 * kin + sys.gp_potential(&amps);
            }
            Ok(MicroInvariants {
                energy: grid.integrate(&dens),
                momentum: Some(grid.integrate(&mom)),
            })
        }
        MicroField::Spins(f) => {
            let fx = sp.derivative(f, 1);
            let mut dens = vec![0.0; f.len()];
            match spec {
                MicroModelSpec::AfChain => {
                    for (j, dj) in dens.iter_mut().enumerate() {
                        let (u, v) = (spin(f, 0, j), spin(f, 1, j));
                        let (ux, vx) = (spin(&fx, 0, j), spin(&fx, 1, j));
                        let w = [u[0] + v[0], u[1] + v[1], u[2] + v[2]];
                        *dj = 0.25 * e2 * (dot(ux, ux) + dot(vx, vx)) + dot(w, w) - e * dot(u, vx);
                    }
                    Ok(MicroInvariants {
                        energy: grid.integrate(&dens),
                        momentum: None,
                    })
                }
                _ => {
                    let g0 = match *spec {
                        MicroModelSpec::LlEasyCone { theta0, .. } => theta0.cos(),
                        _ => 0.0,
                    };
                    let mut mom = vec![0.0; f.len()];
                    for j in 0..f.len() {
                        let g = spin(f, 0, j);
                        let gx = spin(&fx, 0, j);
                        dens[j] = 0.5 * e2 * dot(gx, gx) + 2.0 * sys.ll_potential(g[2]);
                        let rho2 = g[0] * g[0] + g[1] * g[1];
                        if rho2 > 0.0 {
                            mom[j] = (g[2] - g0) * (g[0] * gx[1] - g[1] * gx[0]) / rho2;
                        }
                    }
                    Ok(MicroInvariants {
                        energy: grid.integrate(&dens),
                        momentum: Some(grid.integrate(&mom)),
                    })
                }
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::micro::{evolve_micro, GpScheme, MicroRunOptions};
    use crate::spectral::{ComplexField, Grid, RealField};
    use std::f64::consts::PI;

    #[test]
    fn ground_state_has_zero_invariants() {
        let grid = Grid::new(32, 2.0 * PI).unwrap();
        let s = MicroState::ground(&MicroModelSpec::GpScalar, grid, 0.3).unwrap();
        let inv = micro_invariants(&MicroModelSpec::GpScalar, &s).unwrap();
        assert_eq!(inv.energy, 0.0);
        assert_eq!(inv.momentum, Some(0.0));
    }

    #[test]
    fn easy_plane_in_plane_twist() {
        let grid = Grid::new(64, 2.0 * PI).unwrap();
        let spec = MicroModelSpec::LlEasyPlane { k: 1.0 };
        let f = RealField::from_fn(grid, 3, |c, x| {
            let a = 0.1 * x.sin();
            [a.cos(), a.sin(), 0.0][c]
        });
        let s = MicroState::new(&spec, 1.0, MicroField::Spins(f)).unwrap();
        let inv = micro_invariants(&spec, &s).unwrap();
        assert!((inv.energy - 0.005 * PI).abs() < 1e-14);
        assert!(inv.momentum.unwrap().abs() < 1e-15);
    }

    fn drift(spec: &MicroModelSpec, s0: &MicroState, opts: &MicroRunOptions) -> (f64, f64) {
        let tr = evolve_micro(spec, s0, opts).unwrap();
        assert!(tr.completed());
        let a = micro_invariants(spec, &tr.states[0]).unwrap();
        let b = micro_invariants(spec, tr.last()).unwrap();
        let dp = match (a.momentum, b.momentum) {
            (Some(p), Some(q)) => (p - q).abs(),
            _ => 0.0,
        };
        ((a.energy - b.energy).abs() / a.energy.abs(), dp)
    }

    #[test]
    fn gp_energy_is_conserved() {
        let eps = 0.3;
        let grid = Grid::new(64, 4.0 * PI).unwrap();
        let spec = MicroModelSpec::GpScalar;
        let u = ComplexField::from_fn(grid, 1, |_, x| {
            let y = x / 2.0;
            Complex64::from_polar(1.0 + eps * eps * 0.2 * y.cos(), eps * 0.3 * y.sin())
        });
        let s0 = MicroState::new(&spec, eps, MicroField::Gp(u)).unwrap();
        let opts = MicroRunOptions::new(0.2).dt(eps * eps / 40.0).scheme(GpScheme::Yoshida4);
        let (de, dp) = drift(&spec, &s0, &opts);
        assert!(de < 1e-6, "energy drift {de}");
        assert!(dp < 1e-8, "momentum drift {dp}");
    }

    #[test]
    fn spin_energies_are_conserved() {
        let eps = 0.5;
        let grid = Grid::new(32, 2.0 * PI).unwrap();
        let ll = MicroModelSpec::LlEasyCone { alpha: 1.0, beta: 0.4, theta0: 1.2 };
        let f = RealField::from_fn(grid, 3, |c, x| {
            let th = 1.2 + 0.05 * x.cos();
            let ps = 0.2 * x.sin();
            [th.sin() * ps.cos(), th.sin() * ps.sin(), th.cos()][c]
        });
        let s0 = MicroState::new(&ll, eps, MicroField::Spins(f)).unwrap();
        let (de, dp) = drift(&ll, &s0, &MicroRunOptions::new(0.2).dt(2e-4));
        assert!(de < 1e-6, "LL energy drift {de}");
        assert!(dp < 1e-8, "LL momentum drift {dp}");

        let af = MicroModelSpec::AfChain;
        let f = RealField::from_fn(grid, 6, |c, x| {
            let a = 0.1 * x.sin();
            let b = 0.05 * x.cos();
            // u = (cos a, sin a, 0) tilted by b, v = -(cos a, sin a, 0) tilted by b.
            let u = [a.cos() * b.cos(), a.sin() * b.cos(), b.sin()];
            let v = [-a.cos() * b.cos(), -a.sin() * b.cos(), b.sin()];
            if c < 3 { u[c] } else { v[c - 3] }
        });
        let s0 = MicroState::new(&af, eps, MicroField::Spins(f)).unwrap();
        let (de, _) = drift(&af, &s0, &MicroRunOptions::new(0.2).dt(2e-4));
        assert!(de < 1e-6, "AF energy drift {de}");
    }
}
