//! Choi operators and relative-error measurement.

use faer::Mat;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::{Error, Result};

use super::channel::ProtocolChannel;

/// Cap on the global Hilbert dimension for Choi assembly (J is N²×N²).
pub const MAX_CHOI_DIM: usize = 64;

/// Measured two-sided relative error of a channel against a reference.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct RelativeErrorReport {
    /// Smallest ε with (1+ε)·J_ref - J_Φ ⪰ 0 on the support of J_ref.
    pub eps_plus: f64,
    /// Smallest ε with J_Φ - (1-ε)·J_ref ⪰ 0 on that support.
    pub eps_minus: f64,
    /// False when J_Φ carries weight outside the support of J_ref beyond
    /// 1e-10 relative, in which case no finite ε exists.
    pub support_ok: bool,
    /// Dimension of the support of J_ref.
    pub support_dim: usize,
}

impl RelativeErrorReport {
    /// The two-sided error: max(ε₊, ε₋), infinite when off-support.
    pub fn eps(&self) -> f64 {
        if self.support_ok {
            self.eps_plus.max(self.eps_minus)
        } else {
            f64::INFINITY
        }
    }
}

/// Dense Choi matrix of a channel: J[(x,i),(y,j)] = Φ(E_ij)[x,y], with row
/// index x·N + i. Assembly is parallel over basis columns; every entry is
/// written exactly once, so the result is thread-count independent.
pub fn choi_matrix(ch: &ProtocolChannel) -> Result<Mat<f64>> {
    let n = ch.layout.total_dim();
    if n > MAX_CHOI_DIM {
        return Err(Error::Capacity(format!(
            "global Hilbert dimension {n} exceeds Choi cap {MAX_CHOI_DIM}"
        )));
    }
    let cols: Vec<Vec<f64>> = (0..n * n)
        .into_par_iter()
        .map(|c| {
            let (i, j) = (c / n, c % n);
            let mut e = Mat::<f64>::zeros(n, n);
            e[(i, j)] = 1.0;
            let out = ch.apply(&e);
            let mut col = vec![0.0; n * n];
            for x in 0..n {
                for y in 0..n {
                    // entry (row = x·N + i, col = y·N + j)
                    let _ = y;
                    col[x * n + y] = out[(x, y)];
                }
            }
            col
        })
        .collect();
    let nn = n * n;
    let mut jmat = Mat::<f64>::zeros(nn, nn);
    for c in 0..nn {
        let (i, j) = (c / n, c % n);
        for x in 0..n {
            for y in 0..n {
                jmat[(x * n + i, y * n + j)] = cols[c][x * n + y];
            }
        }
    }
    Ok(jmat)
}

/// Measures ε± of `proto` against `reference` through their Choi
/// operators: generalized extremal eigenvalues of J_Φ against J_ref on the
/// support of J_ref, with an off-support weight check.
pub fn choi_relative_error(
    proto: &ProtocolChannel,
    reference: &ProtocolChannel,
) -> Result<RelativeErrorReport> {
    if proto.layout != reference.layout {
        return Err(Error::Domain("channel layouts differ".into()));
    }
    let j_phi = choi_matrix(proto)?;
    let j_ref = choi_matrix(reference)?;
    let nn = j_ref.nrows();

    let evd = j_ref
        .self_adjoint_eigen(faer::Side::Lower)
        .map_err(|e| Error::Numeric(format!("J_ref eigensolve failed: {e:?}")))?;
    let s = evd.S();
    let u = evd.U();
    let smax = s[nn - 1].max(0.0);
    if smax <= 0.0 {
        return Err(Error::Numeric("reference Choi operator is zero".into()));
    }
    let cut = smax * 1e-12;
    let kept: Vec<usize> = (0..nn).filter(|&c| s[c] > cut).collect();
    let r = kept.len();

    // support residual: ‖J_Φ - Π J_Φ Π‖_F relative to ‖J_Φ‖_F
    let mut u_plus = Mat::<f64>::zeros(nn, r);
    for (cc, &c) in kept.iter().enumerate() {
        for i in 0..nn {
            u_plus[(i, cc)] = u[(i, c)];
        }
    }
    let inner_block = u_plus.transpose() * &j_phi * &u_plus; // r×r
    let projected = &u_plus * &inner_block * u_plus.transpose();
    let phi_norm = j_phi.norm_l2();
    let residual = (&j_phi - &projected).norm_l2();
    let support_ok = residual <= 1e-10 * phi_norm.max(1e-300);

    // T = Λ^{-1/2} Uᵀ J_Φ U Λ^{-1/2} on the support
    let mut t = Mat::<f64>::zeros(r, r);
    for a in 0..r {
        for b in 0..r {
            t[(a, b)] = inner_block[(a, b)] / (s[kept[a]].sqrt() * s[kept[b]].sqrt());
        }
    }
    let t = Mat::<f64>::from_fn(r, r, |i, j| 0.5 * (t[(i, j)] + t[(j, i)]));
    let evd_t = t
        .self_adjoint_eigen(faer::Side::Lower)
        .map_err(|e| Error::Numeric(format!("pencil eigensolve failed: {e:?}")))?;
    let st = evd_t.S();
    let (lo, hi) = (st[0], st[r - 1]);
    let clamp = |v: f64| -> Result<f64> {
        if v < -1e-10 {
            return Err(Error::Inconsistency(format!("relative error {v} below -1e-10 clamp")));
        }
        Ok(v.max(0.0))
    };
    Ok(RelativeErrorReport {
        eps_plus: clamp(hi - 1.0)?,
        eps_minus: clamp(1.0 - lo)?,
        support_ok,
        support_dim: r,
    })
}
