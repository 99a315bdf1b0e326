//! Position-space realization on the well `(0, pi a)`.
//!
//! In position space the Hamiltonian is `-d^2/dx^2 + V(x)` and its eigenvalues
//! are `e_n / a^2`; the Fock-space modules work with `e_n` directly.

use crate::error::{domain, Result};
use crate::operators::{PotentialParams, StateVector, TAIL_WARN};
use crate::quadrature::GaussLegendre;
use crate::specfun::{jacobi_poly, jacobi_poly_all, log_gamma};
use num_complex::Complex64 as C64;
use serde::{Deserialize, Serialize};
use std::f64::consts::PI;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum QuadratureRule {
    GaussLegendre,
    CompositeSimpson,
}

/// Nodes strictly inside `(0, pi a)` with weights summing to `pi a`.
#[derive(Clone, Debug, PartialEq)]
pub struct PositionGrid {
    pub nodes: Vec<f64>,
    pub weights: Vec<f64>,
    pub rule: QuadratureRule,
}

impl PositionGrid {
    pub fn gauss_legendre(params: &PotentialParams, n: usize) -> Result<Self> {
        let (nodes, weights) = GaussLegendre::new(n)?.mapped(0.0, PI * params.a);
        Ok(PositionGrid { nodes, weights, rule: QuadratureRule::GaussLegendre })
    }

    /// Composite Simpson on `panels` (even) intervals. The two endpoint nodes
    /// are dropped and their weights moved to the neighbouring nodes; every
    /// integrand used here vanishes at the walls.
    pub fn composite_simpson(params: &PotentialParams, panels: usize) -> Result<Self> {
        if panels < 4 || panels % 2 == 1 {
            return domain(format!("Simpson grid needs an even panel count >= 4, got {panels}"));
        }
        let len = PI * params.a;
        let h = len / panels as f64;
        let mut nodes = Vec::with_capacity(panels - 1);
        let mut weights = Vec::with_capacity(panels - 1);
        for k in 1..panels {
            nodes.push(k as f64 * h);
            weights.push(if k % 2 == 1 { 4.0 * h / 3.0 } else { 2.0 * h / 3.0 });
        }
        weights[0] += h / 3.0;
        weights[panels - 2] += h / 3.0;
        Ok(PositionGrid { nodes, weights, rule: QuadratureRule::CompositeSimpson })
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    pub fn integrate(&self, values: impl IntoIterator<Item = f64>) -> f64 {
        self.weights.iter().zip(values).map(|(w, v)| w * v).sum()
    }
}

fn check_inside(params: &PotentialParams, x: f64) -> Result<()> {
    if !(x > 0.0 && x < PI * params.a) {
        return domain(format!("x = {x} lies outside the open well (0, {})", PI * params.a));
    }
    Ok(())
}

/// `V(x) = [k(k-1)/sin^2(x/2a) + k'(k'-1)/cos^2(x/2a)] / 4a^2 - (k+k')^2 / 4a^2`.
pub fn potential(params: &PotentialParams, x: f64) -> Result<f64> {
    check_inside(params, x)?;
    let (k, kp, a) = (params.kappa, params.kappap, params.a);
    let (sn, cs) = (x / (2.0 * a)).sin_cos();
    let s = params.s();
    Ok((k * (k - 1.0) / (sn * sn) + kp * (kp - 1.0) / (cs * cs) - s * s) / (4.0 * a * a))
}

/// `W(x) = [k cot(x/2a) - k' tan(x/2a)] / 2a`.
pub fn superpotential(params: &PotentialParams, x: f64) -> Result<f64> {
    check_inside(params, x)?;
    let (sn, cs) = (x / (2.0 * params.a)).sin_cos();
    Ok((params.kappa * cs / sn - params.kappap * sn / cs) / (2.0 * params.a))
}

fn jacobi_indices(params: &PotentialParams) -> (f64, f64) {
    (params.kappa - 0.5, params.kappap - 0.5)
}

/// `c_n` from the Jacobi orthogonality norm: `a 2^{-(k+k')} h_n^{(k-1/2, k'-1/2)}`.
pub fn norm_constant(params: &PotentialParams, n: usize) -> Result<f64> {
    let (al, be) = jacobi_indices(params);
    let nf = n as f64;
    // h_n = 2^{al+be+1} Gamma(n+al+1) Gamma(n+be+1) / ((2n+al+be+1) n! Gamma(n+al+be+1))
    let ln_h = (al + be + 1.0) * 2f64.ln() - (2.0 * nf + al + be + 1.0).ln() + log_gamma(nf + al + 1.0)? + log_gamma(nf + be + 1.0)?
        - log_gamma(nf + 1.0)?
        - log_gamma(nf + al + be + 1.0)?;
    Ok(params.a * (ln_h - params.s() * 2f64.ln()).exp())
}

/// `int |cos^{k'}(x/2a) sin^k(x/2a) P_n(cos(x/a))|^2 dx` on a grid; the
/// ground truth that [`norm_constant`] must reproduce.
pub fn norm_constant_quadrature(params: &PotentialParams, n: usize, grid: &PositionGrid) -> Result<f64> {
    let (al, be) = jacobi_indices(params);
    let mut total = 0.0;
    for (x, w) in grid.nodes.iter().zip(&grid.weights) {
        let v = envelope(params, *x) * jacobi_poly(n, al, be, (x / params.a).cos().clamp(-1.0, 1.0))?;
        total += w * v * v;
    }
    Ok(total)
}

fn envelope(params: &PotentialParams, x: f64) -> f64 {
    let (sn, cs) = (x / (2.0 * params.a)).sin_cos();
    cs.powf(params.kappap) * sn.powf(params.kappa)
}

/// Normalized eigenfunction `psi_n(x)`.
pub fn eigenfunction(params: &PotentialParams, n: usize, x: f64) -> Result<f64> {
    check_inside(params, x)?;
    let (al, be) = jacobi_indices(params);
    let p = jacobi_poly(n, al, be, (x / params.a).cos().clamp(-1.0, 1.0))?;
    Ok(envelope(params, x) * p / norm_constant(params, n)?.sqrt())
}

/// `[psi_0(x), ..., psi_nmax(x)]` with one Jacobi recurrence.
pub fn eigenfunctions_at(params: &PotentialParams, nmax: usize, x: f64) -> Result<Vec<f64>> {
    check_inside(params, x)?;
    let (al, be) = jacobi_indices(params);
    let env = envelope(params, x);
    let polys = jacobi_poly_all(nmax, al, be, (x / params.a).cos().clamp(-1.0, 1.0))?;
    polys.iter().enumerate().map(|(n, p)| Ok(env * p / norm_constant(params, n)?.sqrt())).collect()
}

/// `Psi(x_j)` on a grid with its integrated density.
#[derive(Clone, Debug, PartialEq)]
pub struct Wavefunction {
    pub values: Vec<C64>,
    /// `int |Psi|^2` by the grid rule.
    pub norm: f64,
    pub warning: Option<String>,
}

impl Wavefunction {
    pub fn density(&self) -> impl Iterator<Item = f64> + '_ {
        self.values.iter().map(|v| v.norm_sqr())
    }
}

/// `Psi(x) = sum_n c_n psi_n(x)`.
pub fn wavefunction(params: &PotentialParams, state: &StateVector, grid: &PositionGrid) -> Result<Wavefunction> {
    let dim = state.dim();
    let mut values = Vec::with_capacity(grid.len());
    for &x in &grid.nodes {
        let psi = eigenfunctions_at(params, dim - 1, x)?;
        values.push(state.coeffs.iter().zip(&psi).map(|(c, p)| c * p).sum());
    }
    let norm = grid.integrate(values.iter().map(|v: &C64| v.norm_sqr()));
    let warning = (!(state.tail_bound <= TAIL_WARN)).then(|| format!("state tail bound {:e} exceeds {:e}", state.tail_bound, TAIL_WARN));
    Ok(Wavefunction { values, norm, warning })
}

/// Lowering operator in position space, `(a- f)(x) = f'(x) - W(x) f(x)`.
///
/// This is the sign for which `a- psi_0 = 0` with `psi_0 ~ cos^{k'} sin^k`.
pub fn lower(params: &PotentialParams, f: impl Fn(f64) -> f64, x: f64) -> Result<f64> {
    let h = stencil_step_at(params, x);
    Ok(derivative5(&f, x, h) - superpotential(params, x)? * f(x))
}

/// Raising operator in position space, `(a+ f)(x) = -f'(x) - W(x) f(x)`.
pub fn raise(params: &PotentialParams, f: impl Fn(f64) -> f64, x: f64) -> Result<f64> {
    let h = stencil_step_at(params, x);
    Ok(-derivative5(&f, x, h) - superpotential(params, x)? * f(x))
}

/// Five-point central first derivative.
pub fn derivative5(f: impl Fn(f64) -> f64, x: f64, h: f64) -> f64 {
    (f(x - 2.0 * h) - 8.0 * f(x - h) + 8.0 * f(x + h) - f(x + 2.0 * h)) / (12.0 * h)
}

/// Five-point central second derivative.
pub fn second_derivative5(f: impl Fn(f64) -> f64, x: f64, h: f64) -> f64 {
    (-f(x - 2.0 * h) + 16.0 * f(x - h) - 30.0 * f(x) + 16.0 * f(x + h) - f(x + 2.0 * h)) / (12.0 * h * h)
}

/// Stencil spacing for derivative checks, `pi a / 4096`.
pub fn stencil_step(params: &PotentialParams) -> f64 {
    PI * params.a / 4096.0
}

/// [`stencil_step`], shrunk near the walls to `1/64` of the distance to the
/// nearer wall. Near a wall `psi ~ d^kappa` with non-integer `kappa`, so the
/// stencil has to stay small relative to `d`, not just inside the well.
pub fn stencil_step_at(params: &PotentialParams, x: f64) -> f64 {
    let wall = x.min(PI * params.a - x);
    stencil_step(params).min(wall / 64.0)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn pp(k: f64, kp: f64) -> PotentialParams {
        PotentialParams::new(k, kp, 1.0, 0.0).unwrap()
    }

    #[test]
    fn grids_cover_the_well() {
        let p = PotentialParams::new(2.0, 3.0, 1.3, 0.0).unwrap();
        for g in [PositionGrid::gauss_legendre(&p, 400).unwrap(), PositionGrid::composite_simpson(&p, 400).unwrap()] {
            let total: f64 = g.weights.iter().sum();
            assert!(((total - PI * 1.3) / (PI * 1.3)).abs() < 1e-12);
            assert!(g.nodes.iter().all(|x| *x > 0.0 && *x < PI * 1.3));
        }
        assert!(PositionGrid::composite_simpson(&p, 7).is_err());
    }

    #[test]
    fn potential_values() {
        let p = pp(2.0, 2.0);
        assert!((potential(&p, PI / 2.0).unwrap() + 2.0).abs() < 1e-13);
        for x in [0.1, 0.7, 1.3] {
            assert!((potential(&p, x).unwrap() - potential(&p, PI - x).unwrap()).abs() < 1e-10);
        }
        assert!(potential(&p, 0.0).is_err());
        assert!(potential(&p, PI).is_err());
        assert!(superpotential(&p, -0.1).is_err());
    }

    #[test]
    fn factorization_identity() {
        // H = a+ a- with a- = d/dx - W, a+ = -d/dx - W gives V = W^2 + W'
        let p = pp(2.3, 1.6);
        let h = 1e-4;
        for x in [0.2, 0.9, 1.7, 2.6] {
            let w = superpotential(&p, x).unwrap();
            let dw = derivative5(|y| superpotential(&p, y).unwrap(), x, h);
            assert!((potential(&p, x).unwrap() - (w * w + dw)).abs() < 1e-8, "x={x}");
            // the other sign would put k(k+1) in the numerators
            assert!((potential(&p, x).unwrap() - (w * w - dw)).abs() > 1e-2);
        }
    }

    #[test]
    fn superpotential_shape() {
        let p = pp(2.0, 2.0);
        assert!(superpotential(&p, PI / 2.0).unwrap().abs() < 1e-15);
        let seq: Vec<f64> = [0.5, 0.1, 0.01, 0.001].iter().map(|x| superpotential(&p, *x).unwrap()).collect();
        assert!(seq.windows(2).all(|w| w[1] > w[0]));
    }

    #[test]
    fn norm_constant_matches_quadrature() {
        for p in [pp(2.0, 2.0), pp(1.5, 2.5), PotentialParams::new(3.2, 1.4, 0.7, 0.0).unwrap()] {
            let grid = PositionGrid::gauss_legendre(&p, 400).unwrap();
            for n in 0..=12 {
                let closed = norm_constant(&p, n).unwrap();
                let quad = norm_constant_quadrature(&p, n, &grid).unwrap();
                assert!(closed > 0.0);
                assert!(((closed - quad) / quad).abs() < 1e-10, "n={n}: {closed} vs {quad}");
            }
        }
        // kappa = kappa' = 2: c_0 = int cos^4(x/2) sin^4(x/2) dx = 3 pi / 128
        assert!((norm_constant(&pp(2.0, 2.0), 0).unwrap() - 3.0 * PI / 128.0).abs() < 1e-14);
    }

    #[test]
    fn sign_changes_follow_sturm() {
        let p = pp(2.0, 2.5);
        let grid = PositionGrid::gauss_legendre(&p, 400).unwrap();
        for n in 0..8 {
            let vals: Vec<f64> = grid.nodes.iter().map(|x| eigenfunction(&p, n, *x).unwrap()).collect();
            let changes = vals.windows(2).filter(|w| w[0] * w[1] < 0.0).count();
            assert_eq!(changes, n);
        }
    }

    #[test]
    fn batch_matches_single() {
        let p = pp(1.8, 2.2);
        let all = eigenfunctions_at(&p, 6, 1.1).unwrap();
        for (n, v) in all.iter().enumerate() {
            assert!((v - eigenfunction(&p, n, 1.1).unwrap()).abs() < 1e-13);
        }
    }

    #[test]
    fn basis_state_wavefunction_is_eigenfunction() {
        let p = pp(2.0, 2.0);
        let grid = PositionGrid::gauss_legendre(&p, 100).unwrap();
        let s = StateVector::basis(p, 3, 6).unwrap();
        let wf = wavefunction(&p, &s, &grid).unwrap();
        for (x, v) in grid.nodes.iter().zip(&wf.values) {
            assert!((v.re - eigenfunction(&p, 3, *x).unwrap()).abs() < 1e-13);
            assert_eq!(v.im, 0.0);
        }
        assert!((wf.norm - 1.0).abs() < 1e-10);
    }
}
