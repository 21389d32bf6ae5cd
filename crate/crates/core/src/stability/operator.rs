//! Linearizations in the reduced chart (last probability of every simplex
//! block eliminated; unconstrained domains use all coordinates).

use nalgebra::{DMatrix, DVector};

use crate::dynamics::{DynamicsConfig, DynamicsState, Method, Stepper};
use crate::error::{check_len, Error, Result};
use crate::game::Game;
use crate::simplex::Domain;

/// Smallest coordinate of a point treated as interior.
pub const INTERIOR_TOL: f64 = 1e-6;

/// Chart matrices: `B` maps reduced tangents to full ones, `C` drops the last
/// coordinate of each block, `P` is the blockwise centering projector.
pub(crate) struct Chart {
    pub b: DMatrix<f64>,
    pub c: DMatrix<f64>,
    pub p: DMatrix<f64>,
}

impl Chart {
    pub fn new(domain: &Domain) -> Self {
        let d = domain.dim();
        if domain.is_unconstrained() {
            let i = DMatrix::identity(d, d);
            return Self { b: i.clone(), c: i.clone(), p: i };
        }
        let r = domain.reduced_dim();
        let mut b = DMatrix::zeros(d, r);
        let mut c = DMatrix::zeros(r, d);
        let mut p = DMatrix::zeros(d, d);
        let mut col = 0;
        for (off, len) in domain.blocks() {
            for j in 0..len - 1 {
                b[(off + j, col + j)] = 1.0;
                b[(off + len - 1, col + j)] = -1.0;
                c[(col + j, off + j)] = 1.0;
            }
            for i in 0..len {
                for j in 0..len {
                    p[(off + i, off + j)] = f64::from(u8::from(i == j)) - 1.0 / len as f64;
                }
            }
            col += len - 1;
        }
        Self { b, c, p }
    }
}

fn signs_matrix<G: Game + ?Sized>(game: &G) -> DMatrix<f64> {
    DMatrix::from_diagonal(&DVector::from_vec(game.coordinate_signs()))
}

pub(crate) fn require_interior<G: Game + ?Sized>(game: &G, z: &[f64]) -> Result<Domain> {
    let domain = game.domain();
    check_len("point", z.len(), domain.dim())?;
    if !domain.contains(z, 1e-9) {
        return Err(Error::Domain("point is not feasible".into()));
    }
    if !domain.is_interior(z, INTERIOR_TOL) {
        return Err(Error::Domain(format!(
            "point is on the boundary (a coordinate is below {INTERIOR_TOL})"
        )));
    }
    Ok(domain)
}

/// Game operator `H = [[-∇²ₓₓU, -∇²ₓᵧU], [∇²ᵧₓU, ∇²ᵧᵧU]]`, with the Hessian
/// taken in the reduced chart.
pub fn game_operator<G: Game + ?Sized>(game: &G, z: &[f64]) -> Result<DMatrix<f64>> {
    let domain = require_interior(game, z)?;
    let chart = Chart::new(&domain);
    let reduced_hessian = chart.b.transpose() * game.hessian(z) * &chart.b;
    let signs = chart.c.clone() * signs_matrix(game) * chart.b.clone();
    // C S B is diagonal with the team sign of every free coordinate
    Ok(signs * reduced_hessian)
}

/// Jacobian, in the reduced chart, of the projected signed field that the
/// dynamics actually follow: `C P S ∇²U B`.
///
/// A full-coordinate projected step moves a two-strategy player by half of
/// the reduced-chart gradient, so for binary players this is exactly `H / 2`.
pub fn field_operator<G: Game + ?Sized>(game: &G, z: &[f64]) -> Result<DMatrix<f64>> {
    let domain = require_interior(game, z)?;
    Ok(field_operator_unchecked(game, &domain, z))
}

fn field_operator_unchecked<G: Game + ?Sized>(game: &G, domain: &Domain, z: &[f64]) -> DMatrix<f64> {
    let chart = Chart::new(domain);
    &chart.c * &chart.p * signs_matrix(game) * game.hessian(z) * &chart.b
}

/// `I + ηA`.
pub fn gda_jacobian(op: &DMatrix<f64>, eta: f64) -> DMatrix<f64> {
    DMatrix::identity(op.nrows(), op.ncols()) + op * eta
}

/// Companion form `[[I + 2ηA, -ηA], [I, 0]]` on `(z_t, z_{t-1})`.
pub fn ogda_jacobian(op: &DMatrix<f64>, eta: f64) -> DMatrix<f64> {
    let n = op.nrows();
    let mut j = DMatrix::zeros(2 * n, 2 * n);
    j.view_mut((0, 0), (n, n)).copy_from(&(DMatrix::identity(n, n) + op * (2.0 * eta)));
    j.view_mut((0, n), (n, n)).copy_from(&(op * -eta));
    j.view_mut((n, 0), (n, n)).fill_with_identity();
    j
}

/// `I + ηA + η²A²`, the extra-gradient Jacobian at a fixed point.
pub fn eg_jacobian(op: &DMatrix<f64>, eta: f64) -> DMatrix<f64> {
    let a = op * eta;
    DMatrix::identity(op.nrows(), op.ncols()) + &a + &a * &a
}

/// `[[I + ηA + ηkI, -ηkI], [ηpI, (1 - ηp)I]]` on `(z, θ)`.
pub fn kpv_jacobian(op: &DMatrix<f64>, eta: f64, k: f64, p: f64) -> DMatrix<f64> {
    let n = op.nrows();
    let id = DMatrix::<f64>::identity(n, n);
    let mut j = DMatrix::zeros(2 * n, 2 * n);
    j.view_mut((0, 0), (n, n)).copy_from(&(&id * (1.0 + eta * k) + op * eta));
    j.view_mut((0, n), (n, n)).copy_from(&(&id * (-eta * k)));
    j.view_mut((n, 0), (n, n)).copy_from(&(&id * (eta * p)));
    j.view_mut((n, n), (n, n)).copy_from(&(&id * (1.0 - eta * p)));
    j
}

/// Exact Jacobian of one step of `method` at an interior point, in the
/// reduced chart. Optimistic methods and KPV use the companion layout
/// (current, previous) and (z, θ) with the history equal to `z`.
pub fn dynamics_jacobian<G: Game + ?Sized>(
    method: Method,
    game: &G,
    z: &[f64],
    eta: f64,
    k: f64,
    p: f64,
) -> Result<DMatrix<f64>> {
    let domain = require_interior(game, z)?;
    let g = field_operator_unchecked(game, &domain, z);
    Ok(match method {
        Method::Gda => gda_jacobian(&g, eta),
        Method::Ogda => ogda_jacobian(&g, eta),
        Method::Kpv => kpv_jacobian(&g, eta, k, p),
        Method::Eg => {
            // chain rule through the half step: I + ηG(z½) (I + ηG(z))
            let mut half: Vec<f64> = game.gradient(z);
            let signs = game.coordinate_signs();
            for ((h, s), zi) in half.iter_mut().zip(&signs).zip(z) {
                *h = zi + eta * s * *h;
            }
            let half = domain.project_profile(&half)?;
            require_interior(game, &half)?;
            let g_half = field_operator_unchecked(game, &domain, &half);
            let n = g.nrows();
            DMatrix::identity(n, n) + g_half * eta * (DMatrix::identity(n, n) + g * eta)
        }
        Method::Omwu => omwu_jacobian(game, &domain, z, eta)?,
    })
}

/// OMWU on `(z_t, z_{t-1})`: per block `dx' = (diag x' − x'x'ᵀ)(dx / x + ds)`
/// with `s = σ(2η∇U(z_t) − η∇U(z_{t-1}))`.
fn omwu_jacobian<G: Game + ?Sized>(
    game: &G,
    domain: &Domain,
    z: &[f64],
    eta: f64,
) -> Result<DMatrix<f64>> {
    if domain.is_unconstrained() {
        return Err(Error::Domain("OMWU needs a product of simplices".into()));
    }
    let state = DynamicsState::new(game, Method::Omwu, z.to_vec())?;
    let mut next = state.clone();
    Stepper::new(game).step(&DynamicsConfig::new(Method::Omwu, eta), &mut next)?;
    let x1 = &next.z;
    let d = domain.dim();
    let mut dmat = DMatrix::zeros(d, d);
    for (off, len) in domain.blocks() {
        for i in off..off + len {
            for j in off..off + len {
                dmat[(i, j)] = f64::from(u8::from(i == j)) * x1[i] - x1[i] * x1[j];
            }
        }
    }
    let chart = Chart::new(domain);
    let inv_x = DMatrix::from_diagonal(&DVector::from_iterator(d, z.iter().map(|q| 1.0 / q)));
    let sh = signs_matrix(game) * game.hessian(z);
    let cd = &chart.c * &dmat;
    let current = &cd * (inv_x + &sh * (2.0 * eta)) * &chart.b;
    let previous = &cd * (&sh * -eta) * &chart.b;
    let n = current.nrows();
    let mut j = DMatrix::zeros(2 * n, 2 * n);
    j.view_mut((0, 0), (n, n)).copy_from(&current);
    j.view_mut((0, n), (n, n)).copy_from(&previous);
    j.view_mut((n, 0), (n, n)).fill_with_identity();
    Ok(j)
}
