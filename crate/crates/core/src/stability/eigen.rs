use nalgebra::linalg::balancing::balance_parlett_reinsch;
use nalgebra::{DMatrix, Schur};
use num_complex::Complex64;

use crate::error::{Error, Result};

/// Largest matrix the dense solver accepts.
pub const MAX_DIM: usize = 64;

/// All eigenvalues of a real square matrix with algebraic multiplicity,
/// sorted by real part then imaginary part.
///
/// Parlett–Reinsch balancing, Hessenberg reduction and shifted QR (via
/// nalgebra's real Schur form), capped at `100 d²` sweeps.
pub fn eigenvalues(m: &DMatrix<f64>) -> Result<Vec<Complex64>> {
    let (r, c) = m.shape();
    if r != c {
        return Err(Error::Dimension(format!("eigenvalues of a {r}x{c} matrix")));
    }
    if r > MAX_DIM {
        return Err(Error::Capability(format!("{r}x{r} exceeds the {MAX_DIM}x{MAX_DIM} limit")));
    }
    if m.iter().any(|x| !x.is_finite()) {
        return Err(Error::Numeric("non-finite matrix entry".into()));
    }
    if r == 0 {
        return Ok(Vec::new());
    }
    if m.iter().all(|&x| x == 0.0) {
        return Ok(vec![Complex64::new(0.0, 0.0); r]);
    }
    let mut b = m.clone();
    balance_parlett_reinsch(&mut b);
    if b.iter().any(|x| !x.is_finite()) {
        b.copy_from(m);
    }
    let schur = Schur::try_new(b, f64::EPSILON, 100 * r * r)
        .ok_or_else(|| Error::Numeric("QR iteration did not converge".into()))?;
    let mut ev: Vec<Complex64> = schur.complex_eigenvalues().iter().copied().collect();
    ev.sort_by(|a, b| a.re.total_cmp(&b.re).then(a.im.total_cmp(&b.im)));
    Ok(ev)
}

/// `max |λ|` over the spectrum.
pub fn spectral_radius(m: &DMatrix<f64>) -> Result<f64> {
    Ok(eigenvalues(m)?.iter().map(|z| z.norm()).fold(0.0, f64::max))
}
