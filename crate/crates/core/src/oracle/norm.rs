//! Matrix-free 2→2 norm of channel differences via power iteration.

use faer::Mat;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha12Rng;

use crate::{Error, Result};

use super::channel::ProtocolChannel;

#[derive(Clone, Copy, Debug)]
pub struct PowerIterOptions {
    /// Relative tolerance on the converged norm.
    pub tol: f64,
    pub max_iter: usize,
    /// Seed of the deterministic start vector.
    pub seed: u64,
}

impl Default for PowerIterOptions {
    fn default() -> Self {
        PowerIterOptions { tol: 1e-10, max_iter: 20_000, seed: 7 }
    }
}

/// ‖proto - reference‖_{2→2}: the spectral norm of the difference
/// superoperator, computed by power iteration on DᵀD where
/// D(X) = proto(X) - reference(X). Both channels map real operators to
/// real operators, so iteration runs in real arithmetic; the supremum over
/// complex inputs equals the largest singular value either way.
pub fn norm_2to2_diff(
    proto: &ProtocolChannel,
    reference: &ProtocolChannel,
    opts: PowerIterOptions,
) -> Result<f64> {
    if proto.layout != reference.layout {
        return Err(Error::Domain("channel layouts differ".into()));
    }
    if !(opts.tol > 1e-12 && opts.tol < 1e-2) {
        return Err(Error::Domain(format!("tol {} outside (1e-12, 1e-2)", opts.tol)));
    }
    let n = proto.layout.total_dim();
    let mut rng = ChaCha12Rng::seed_from_u64(opts.seed);
    let mut x = Mat::<f64>::from_fn(n, n, |_, _| rng.gen::<f64>() - 0.5);
    normalize(&mut x)?;

    let d_apply = |v: &Mat<f64>| -> Mat<f64> { proto.apply(v) - reference.apply(v) };
    let dt_apply = |v: &Mat<f64>| -> Mat<f64> { proto.apply_adjoint(v) - reference.apply_adjoint(v) };

    let mut lambda_prev = f64::INFINITY;
    let mut stable = 0usize;
    for it in 0..opts.max_iter {
        let y = d_apply(&x);
        let z = dt_apply(&y);
        // Rayleigh quotient of S = DᵀD at the unit vector x
        let lambda = inner(&x, &z);
        let znorm = z.norm_l2();
        if znorm <= f64::MIN_POSITIVE.sqrt() || lambda <= 1e-28 {
            // difference operator is numerically zero on the iterate and,
            // given a dense random start, zero overall
            return Ok(lambda.max(0.0).sqrt());
        }
        let rel_change = (lambda - lambda_prev).abs() / lambda.max(1e-300);
        // tolerance applies to the norm (sqrt of lambda): track 2x in lambda
        if rel_change <= 2.0 * opts.tol {
            stable += 1;
            if stable >= 3 {
                return Ok(lambda.max(0.0).sqrt());
            }
        } else {
            stable = 0;
        }
        lambda_prev = lambda;
        x = z;
        let s = 1.0 / znorm;
        let _ = it;
        scale(&mut x, s);
    }
    Err(Error::Numeric(format!(
        "power iteration did not converge in {} iterations; Ritz estimate {}",
        opts.max_iter,
        lambda_prev.max(0.0).sqrt()
    )))
}

fn inner(a: &Mat<f64>, b: &Mat<f64>) -> f64 {
    let mut acc = 0.0;
    for j in 0..a.ncols() {
        for i in 0..a.nrows() {
            acc += a[(i, j)] * b[(i, j)];
        }
    }
    acc
}

fn scale(m: &mut Mat<f64>, s: f64) {
    for j in 0..m.ncols() {
        for i in 0..m.nrows() {
            m[(i, j)] *= s;
        }
    }
}

fn normalize(m: &mut Mat<f64>) -> Result<()> {
    let n = m.norm_l2();
    if n == 0.0 {
        return Err(Error::Numeric("zero start vector".into()));
    }
    scale(m, 1.0 / n);
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::angle::ProtocolParams;

    #[test]
    fn identical_channels_have_zero_distance() {
        let params = ProtocolParams::crosstwirl(2, 2, 1, 1).unwrap();
        let a = ProtocolChannel::full_twirl(&params).unwrap();
        let b = ProtocolChannel::full_twirl(&params).unwrap();
        let d = norm_2to2_diff(&a, &b, PowerIterOptions::default()).unwrap();
        assert!(d <= 1e-10, "distance {d}");
    }

    #[test]
    fn tol_range_enforced() {
        let params = ProtocolParams::crosstwirl(2, 2, 1, 1).unwrap();
        let a = ProtocolChannel::full_twirl(&params).unwrap();
        let b = ProtocolChannel::full_twirl(&params).unwrap();
        let bad = PowerIterOptions { tol: 0.5, ..Default::default() };
        assert!(norm_2to2_diff(&a, &b, bad).is_err());
    }
}
