use std::f64::consts::{PI, SQRT_2};

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::micro::{cross, dot, set_spin, spin, MicroField, MicroState, GP_AMPLITUDE_WINDOW};
use crate::models::MicroModelSpec;
use crate::spectral::{ComplexField, Grid, RealField};

/// Chart coordinates `u = Psi(Phi(eps phi), eps^2 n)` of a microscopic state.
#[derive(Debug, Clone, PartialEq)]
pub struct HydroState {
    pub spec: MicroModelSpec,
    pub eps: f64,
    /// Tangent coordinate, continuous along the grid.
    pub phi: RealField,
    /// Normal coordinate in the transported normal frame.
    pub n: RealField,
    pub valid: bool,
    /// First chart problem found, with its grid index.
    pub issue: Option<(usize, String)>,
}

impl HydroState {
    pub fn grid(&self) -> &Grid {
        self.phi.grid()
    }

    pub fn dim(&self) -> usize {
        self.phi.dim()
    }

    /// `eps |phi|_inf` (pointwise Euclidean norm).
    pub fn eps_phi_linf(&self) -> f64 {
        let mut m = 0.0f64;
        for j in 0..self.phi.len() {
            m = m.max(self.phi.pointwise_norm_sqr(j).sqrt());
        }
        self.eps * m
    }

    fn flag(&mut self, j: usize, reason: String) {
        self.valid = false;
        if self.issue.is_none() {
            self.issue = Some((j, reason));
        }
    }

    /// Returns an error describing the first chart problem, if any.
    pub fn require_valid(&self) -> Result<()> {
        match &self.issue {
            None => Ok(()),
            Some((j, reason)) => Err(Error::ChartBreakdown {
                index: *j,
                x: self.grid().x(*j),
                reason: reason.clone(),
            }),
        }
    }
}

fn wrap(a: f64) -> f64 {
    let mut a = (a + PI).rem_euclid(2.0 * PI) - PI;
    if a == -PI {
        a = PI;
    }
    a
}

/// Nearest-branch unwrap along the grid. Returns the net winding.
fn unwrap_along_grid(raw: &[f64]) -> (Vec<f64>, f64) {
    let mut out = Vec::with_capacity(raw.len());
    let mut acc = raw[0];
    out.push(acc);
    for w in raw.windows(2) {
        acc += wrap(w[1] - w[0]);
        out.push(acc);
    }
    let close = acc + wrap(raw[0] - raw[raw.len() - 1]);
    (out, close - raw[0])
}

fn angles_to_phi(raw: &[f64], scale: f64, eps: f64) -> (Vec<f64>, f64) {
    let (un, winding) = unwrap_along_grid(raw);
    (un.into_iter().map(|a| scale * a / eps).collect(), winding)
}

// Rotation taking `w` to `e1` (minimal, about `w x e1`).
fn to_e1(w: [f64; 3], x: [f64; 3]) -> [f64; 3] {
    rotate(w[0], cross(w, [1.0, 0.0, 0.0]), x)
}

fn from_e1(w: [f64; 3], x: [f64; 3]) -> [f64; 3] {
    let a = cross(w, [1.0, 0.0, 0.0]);
    rotate(w[0], [-a[0], -a[1], -a[2]], x)
}

fn rotate(c: f64, a: [f64; 3], x: [f64; 3]) -> [f64; 3] {
    let ax = cross(a, x);
    let ad = dot(a, x) / (1.0 + c);
    [0, 1, 2].map(|m| c * x[m] + ax[m] + a[m] * ad)
}

fn sphere_log(p: [f64; 3], q: [f64; 3]) -> [f64; 3] {
    let c = dot(p, q);
    let t = [0, 1, 2].map(|m| q[m] - c * p[m]);
    let s = dot(t, t).sqrt();
    if s < 1e-300 {
        return [0.0; 3];
    }
    let ang = s.atan2(c);
    t.map(|v| v * ang / s)
}

fn sphere_exp(p: [f64; 3], x: [f64; 3]) -> [f64; 3] {
    let r = dot(x, x).sqrt();
    if r < 1e-300 {
        return p;
    }
    let (s, c) = r.sin_cos();
    [0, 1, 2].map(|m| c * p[m] + s * x[m] / r)
}

/// `D Phi_{eps phi}(w)` in the frame transported from the base point.
/// Flat for every preset except the AF chain, whose submanifold is a
/// sphere of radius `sqrt 2`.
pub fn dphi(spec: &MicroModelSpec, eps_phi: &[f64], w: &[f64]) -> Vec<f64> {
    jacobi(spec, eps_phi, w, false)
}

/// Inverse of [`dphi`].
pub fn dphi_inverse(spec: &MicroModelSpec, eps_phi: &[f64], y: &[f64]) -> Vec<f64> {
    jacobi(spec, eps_phi, y, true)
}

fn jacobi(spec: &MicroModelSpec, p: &[f64], w: &[f64], inverse: bool) -> Vec<f64> {
    if !matches!(spec, MicroModelSpec::AfChain) {
        return w.to_vec();
    }
    let r = (p[0] * p[0] + p[1] * p[1]).sqrt();
    if r < 1e-12 {
        return w.to_vec();
    }
    let s = r / SQRT_2;
    let f = s.sin() / s;
    let f = if inverse { 1.0 / f } else { f };
    let rh = [p[0] / r, p[1] / r];
    let wr = w[0] * rh[0] + w[1] * rh[1];
    (0..2).map(|a| wr * rh[a] + f * (w[a] - wr * rh[a])).collect()
}

/// `D Phi d_x phi` at every grid point.
pub fn dphi_field(h: &HydroState, phi_x: &RealField) -> RealField {
    if !matches!(h.spec, MicroModelSpec::AfChain) {
        return phi_x.clone();
    }
    let mut out = phi_x.clone();
    for j in 0..phi_x.len() {
        let p = [h.eps * h.phi.at(0, j), h.eps * h.phi.at(1, j)];
        let v = dphi(&h.spec, &p, &phi_x.vector_at(j));
        for a in 0..2 {
            out.component_mut(a)[j] = v[a];
        }
    }
    out
}

/// Chart coordinates of a microscopic state (spatial unwrap only).
pub fn extract_hydro(spec: &MicroModelSpec, s: &MicroState) -> Result<HydroState> {
    extract(spec, s, None)
}

/// As [`extract_hydro`], choosing the `2 pi / eps` branch of each phase
/// closest (in mean) to `prev`.
pub fn extract_hydro_after(spec: &MicroModelSpec, s: &MicroState, prev: &HydroState) -> Result<HydroState> {
    extract(spec, s, Some(prev))
}

fn extract(spec: &MicroModelSpec, s: &MicroState, prev: Option<&HydroState>) -> Result<HydroState> {
    let eps = s.eps();
    let grid = *s.grid();
    let n_pts = grid.n_points();
    let e2 = eps * eps;
    let radius = spec.chart_radius();
    let (phi_comps, n_comps, issues, periods): (Vec<Vec<f64>>, Vec<Vec<f64>>, Vec<(usize, String)>, Vec<f64>) =
        match (spec, s.field()) {
            (MicroModelSpec::GpScalar | MicroModelSpec::GpCoupled { .. }, MicroField::Gp(u)) => {
                let (lo, hi) = GP_AMPLITUDE_WINDOW;
                let mut phis = Vec::new();
                let mut ns = Vec::new();
                let mut issues = Vec::new();
                for k in 0..u.dim() {
                    let raw: Vec<f64> = u.component(k).iter().map(|z| z.arg()).collect();
                    let (phi, winding) = angles_to_phi(&raw, 1.0, eps);
                    if winding.abs() > 1.0 {
                        issues.push((0, format!("phase of component {k} winds by {winding:.3}")));
                    }
                    let mut n = Vec::with_capacity(n_pts);
                    for (j, z) in u.component(k).iter().enumerate() {
                        let a = z.norm();
                        if !(lo..=hi).contains(&a) {
                            issues.push((j, format!("|u_{k}| = {a:.4} outside [{lo}, {hi}]")));
                        }
                        n.push((a - 1.0) / e2);
                    }
                    phis.push(phi);
                    ns.push(n);
                }
                let d = u.dim();
                (phis, ns, issues, vec![2.0 * PI / eps; d])
            }
            (MicroModelSpec::LlEasyPlane { .. }, MicroField::Spins(f)) => {
                let raw: Vec<f64> = (0..n_pts).map(|j| f.at(1, j).atan2(f.at(0, j))).collect();
                let (phi, winding) = angles_to_phi(&raw, 1.0, eps);
                let mut issues = Vec::new();
                if winding.abs() > 1.0 {
                    issues.push((0, format!("azimuth winds by {winding:.3}")));
                }
                let n: Vec<f64> = (0..n_pts).map(|j| f.at(2, j).clamp(-1.0, 1.0).asin() / e2).collect();
                if let Some(j) = (0..n_pts).find(|&j| f.at(2, j).abs() >= 1.0 - 1e-12) {
                    issues.push((j, "spin at a pole".into()));
                }
                (vec![phi], vec![n], issues, vec![2.0 * PI / eps])
            }
            (&MicroModelSpec::LlEasyCone { theta0, .. }, MicroField::Spins(f)) => {
                let s0 = theta0.sin();
                let raw: Vec<f64> = (0..n_pts).map(|j| f.at(1, j).atan2(f.at(0, j))).collect();
                let (phi, winding) = angles_to_phi(&raw, -s0, eps);
                let mut issues = Vec::new();
                if winding.abs() > 1.0 {
                    issues.push((0, format!("azimuth winds by {winding:.3}")));
                }
                let n: Vec<f64> = (0..n_pts)
                    .map(|j| (f.at(2, j).clamp(-1.0, 1.0).acos() - theta0) / e2)
                    .collect();
                if let Some(j) = (0..n_pts).find(|&j| f.at(2, j).abs() >= 1.0 - 1e-12) {
                    issues.push((j, "spin at a pole".into()));
                }
                (vec![phi], vec![n], issues, vec![2.0 * PI * s0 / eps])
            }
            (MicroModelSpec::AfChain, MicroField::Spins(f)) => {
                let mut phi = vec![vec![0.0; n_pts]; 2];
                let mut n = vec![vec![0.0; n_pts]; 2];
                let mut issues = Vec::new();
                for j in 0..n_pts {
                    let (u, v) = (spin(f, 0, j), spin(f, 1, j));
                    let w = [u[0] - v[0], u[1] - v[1], u[2] - v[2]];
                    let wn = dot(w, w).sqrt();
                    if wn < 1e-12 {
                        issues.push((j, "u = v: no base point".into()));
                        continue;
                    }
                    let om = w.map(|a| a / wn);
                    if om[0] <= -1.0 + 1e-12 {
                        issues.push((j, "base point antipodal to the chart center".into()));
                        continue;
                    }
                    let y = sphere_log([1.0, 0.0, 0.0], om);
                    phi[0][j] = SQRT_2 * y[1] / eps;
                    phi[1][j] = SQRT_2 * y[2] / eps;
                    let x = sphere_log(om, u);
                    if dot(x, x).sqrt() >= PI / 2.0 - 1e-12 {
                        issues.push((j, "normal displacement beyond pi/2".into()));
                    }
                    let x0 = to_e1(om, x);
                    n[0][j] = SQRT_2 * x0[2] / e2;
                    n[1][j] = -SQRT_2 * x0[1] / e2;
                }
                (phi, n, issues, vec![f64::INFINITY; 2])
            }
            _ => return Err(Error::param("state", format!("field flavor does not match {}", spec.name()))),
        };

    let mut phi_comps = phi_comps;
    if let Some(p) = prev {
        if p.phi.dim() != phi_comps.len() || p.grid() != &grid {
            return Err(Error::GridMismatch);
        }
        for (k, comp) in phi_comps.iter_mut().enumerate() {
            let period = periods[k];
            if !period.is_finite() {
                continue;
            }
            let mean_prev: f64 = p.phi.component(k).iter().sum::<f64>() / n_pts as f64;
            let mean_now: f64 = comp.iter().sum::<f64>() / n_pts as f64;
            let m = ((mean_prev - mean_now) / period).round();
            comp.iter_mut().for_each(|v| *v += m * period);
        }
    }

    let mut h = HydroState {
        spec: spec.clone(),
        eps,
        phi: RealField::new(grid, phi_comps)?,
        n: RealField::new(grid, n_comps)?,
        valid: true,
        issue: None,
    };
    for (j, reason) in issues {
        h.flag(j, reason);
    }
    for j in 0..n_pts {
        let r = eps * h.phi.pointwise_norm_sqr(j).sqrt();
        if r >= radius {
            h.flag(j, format!("eps |phi| = {r:.4} reached the chart radius {radius:.4}"));
            break;
        }
    }
    Ok(h)
}

/// Inverse of [`extract_hydro`].
pub fn reconstruct_micro(h: &HydroState) -> Result<MicroState> {
    let spec = &h.spec;
    let eps = h.eps;
    let e2 = eps * eps;
    let grid = *h.grid();
    let n_pts = grid.n_points();
    let want = match spec {
        MicroModelSpec::AfChain => 2,
        _ => spec.field_count(),
    };
    if h.dim() != want || h.n.dim() != want {
        return Err(Error::DimMismatch { expected: want, got: h.dim() });
    }
    let field = match *spec {
        MicroModelSpec::GpScalar | MicroModelSpec::GpCoupled { .. } => {
            let comps = (0..h.dim())
                .map(|k| {
                    (0..n_pts)
                        .map(|j| Complex64::from_polar(1.0 + e2 * h.n.at(k, j), eps * h.phi.at(k, j)))
                        .collect()
                })
                .collect();
            MicroField::Gp(ComplexField::new(grid, comps)?)
        }
        MicroModelSpec::LlEasyPlane { .. } => MicroField::Spins(RealField::zeros(grid, 3)).map_spins(|f| {
            for j in 0..n_pts {
                let (th, nn) = (eps * h.phi.at(0, j), e2 * h.n.at(0, j));
                set_spin(f, 0, j, [nn.cos() * th.cos(), nn.cos() * th.sin(), nn.sin()]);
            }
        }),
        MicroModelSpec::LlEasyCone { theta0, .. } => {
            let s0 = theta0.sin();
            MicroField::Spins(RealField::zeros(grid, 3)).map_spins(|f| {
                for j in 0..n_pts {
                    let psi = -eps * h.phi.at(0, j) / s0;
                    let th = theta0 + e2 * h.n.at(0, j);
                    set_spin(f, 0, j, [th.sin() * psi.cos(), th.sin() * psi.sin(), th.cos()]);
                }
            })
        }
        MicroModelSpec::AfChain => MicroField::Spins(RealField::zeros(grid, 6)).map_spins(|f| {
            for j in 0..n_pts {
                let y = [0.0, eps * h.phi.at(0, j) / SQRT_2, eps * h.phi.at(1, j) / SQRT_2];
                let om = sphere_exp([1.0, 0.0, 0.0], y);
                let m = [e2 * h.n.at(0, j), e2 * h.n.at(1, j)];
                let x0 = [0.0, -m[1] / SQRT_2, m[0] / SQRT_2];
                let x = from_e1(om, x0);
                let u = sphere_exp(om, x);
                let v = sphere_exp(om, x.map(|a| -a)).map(|a| -a);
                set_spin(f, 0, j, u);
                set_spin(f, 1, j, v);
            }
        }),
    };
    MicroState::new(spec, eps, field)
}

trait MapSpins {
    fn map_spins(self, f: impl FnOnce(&mut RealField)) -> Self;
}

impl MapSpins for MicroField {
    fn map_spins(mut self, f: impl FnOnce(&mut RealField)) -> Self {
        if let MicroField::Spins(ref mut r) = self {
            f(r);
        }
        self
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn grid() -> Grid {
        Grid::new(64, 20.0).unwrap()
    }

    #[test]
    fn gp_chart_values() {
        let spec = MicroModelSpec::GpScalar;
        let s = MicroState::ground(&spec, grid(), 0.1).unwrap();
        let h = extract_hydro(&spec, &s).unwrap();
        assert!(h.valid && h.phi.linf_norm() == 0.0 && h.n.linf_norm() == 0.0);

        let eps: f64 = 0.1;
        let z = Complex64::from_polar(1.0 + eps * eps * 0.2, eps * 0.5);
        let u = ComplexField::from_fn(grid(), 1, |_, _| z);
        let s = MicroState::new(&spec, eps, MicroField::Gp(u)).unwrap();
        let h = extract_hydro(&spec, &s).unwrap();
        assert!((h.phi.at(0, 7) - 0.5).abs() < 1e-12);
        assert!((h.n.at(0, 7) - 0.2).abs() < 1e-12);
    }

    #[test]
    fn easy_plane_pure_azimuth() {
        let spec = MicroModelSpec::LlEasyPlane { k: 1.0 };
        let f = RealField::from_fn(grid(), 3, |c, _| [0.3f64.cos(), 0.3f64.sin(), 0.0][c]);
        let s = MicroState::new(&spec, 0.1, MicroField::Spins(f)).unwrap();
        let h = extract_hydro(&spec, &s).unwrap();
        assert!((h.phi.at(0, 0) - 3.0).abs() < 1e-12);
        assert!(h.n.linf_norm() < 1e-15);
    }

    fn smooth(c: usize, x: f64) -> f64 {
        let y = 2.0 * PI * x / 20.0;
        [0.7 * y.sin() + 0.2, -0.4 * (2.0 * y).cos()][c]
    }

    #[test]
    fn round_trips_for_every_preset() {
        let eps = 0.3;
        for spec in [
            MicroModelSpec::GpScalar,
            MicroModelSpec::GpCoupled { lambda: 1.3, f: vec![vec![vec![0.0; 2]; 2]; 2] },
            MicroModelSpec::LlEasyPlane { k: 1.0 },
            MicroModelSpec::LlEasyCone { alpha: 1.0, beta: 0.2, theta0: 1.1 },
            MicroModelSpec::AfChain,
        ] {
            let d = if matches!(spec, MicroModelSpec::AfChain) { 2 } else { spec.field_count() };
            let h = HydroState {
                spec: spec.clone(),
                eps,
                phi: RealField::from_fn(grid(), d, |c, x| 2.0 * smooth(c, x)),
                n: RealField::from_fn(grid(), d, |c, x| smooth(1 - c.min(1), x)),
                valid: true,
                issue: None,
            };
            let s = reconstruct_micro(&h).unwrap();
            let back = extract_hydro(&spec, &s).unwrap();
            assert!(back.valid, "{}: {:?}", spec.name(), back.issue);
            assert!(back.phi.max_abs_diff(&h.phi) < 1e-10, "{} phi", spec.name());
            assert!(back.n.max_abs_diff(&h.n) < 1e-10, "{} n", spec.name());
            let again = reconstruct_micro(&back).unwrap();
            assert!(again.field().l2_distance(s.field()).unwrap() < 1e-12);
        }
    }

    #[test]
    fn temporal_unwrap_follows_previous_branch() {
        let spec = MicroModelSpec::GpScalar;
        let eps = 0.5;
        let h0 = HydroState {
            spec: spec.clone(),
            eps,
            phi: RealField::from_fn(grid(), 1, |_, _| 2.0 * PI / eps + 0.1),
            n: RealField::zeros(grid(), 1),
            valid: true,
            issue: None,
        };
        let s = reconstruct_micro(&h0).unwrap();
        let plain = extract_hydro(&spec, &s).unwrap();
        assert!((plain.phi.at(0, 0) - 0.1 / 1.0).abs() < 1e-12);
        let cont = extract_hydro_after(&spec, &s, &h0).unwrap();
        assert!(cont.phi.max_abs_diff(&h0.phi) < 1e-12);
    }

    #[test]
    fn af_dphi_inverse_and_geodesic_growth() {
        let spec = MicroModelSpec::AfChain;
        let p = [0.8, -0.5];
        let w = [0.3, 0.9];
        let y = dphi(&spec, &p, &w);
        let back = dphi_inverse(&spec, &p, &y);
        assert!((back[0] - w[0]).abs() < 1e-15 && (back[1] - w[1]).abs() < 1e-15);
        // Oracle: finite difference of the base point on the sphere of radius sqrt 2.
        let h = 1e-6;
        let base = |q: [f64; 2]| {
            let y = [0.0, q[0] / SQRT_2, q[1] / SQRT_2];
            sphere_exp([1.0, 0.0, 0.0], y)
        };
        let plus = base([p[0] + h * w[0], p[1] + h * w[1]]);
        let minus = base([p[0] - h * w[0], p[1] - h * w[1]]);
        let vel: Vec<f64> = (0..3).map(|m| SQRT_2 * (plus[m] - minus[m]) / (2.0 * h)).collect();
        let speed = vel.iter().map(|v| v * v).sum::<f64>().sqrt();
        let want = (y[0] * y[0] + y[1] * y[1]).sqrt();
        assert!((speed - want).abs() < 1e-8, "{speed} vs {want}");
    }

    #[test]
    fn chart_breakdown_is_flagged() {
        let spec = MicroModelSpec::LlEasyPlane { k: 1.0 };
        let f = RealField::from_fn(grid(), 3, |c, x| {
            let a = 2.0 * PI * x / 20.0;
            [a.cos(), a.sin(), 0.0][c]
        });
        let s = MicroState::new(&spec, 0.1, MicroField::Spins(f)).unwrap();
        let h = extract_hydro(&spec, &s).unwrap();
        assert!(!h.valid);
        assert!(h.require_valid().is_err());
    }
}
