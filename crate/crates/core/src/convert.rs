//! Von Neumann index bounds and TPE → relative-error conversion.
//!
//! A 2→2-norm distance γ between a trace-symmetric channel and the full
//! twirl upgrades to a two-sided multiplicative-error bound ε = γ·C, where
//! C is the complete Pimsner-Popa index of the local-twirl fixed-point
//! algebra over the global one. The index is bounded coarsely from the
//! subsystem dimensions alone, and exactly from Schur-Weyl block data when
//! the dimensions are small enough to enumerate partitions.

use num::ToPrimitive;
use serde::{Deserialize, Serialize};

use crate::logdomain::{ln_factorial, LogReal};
use crate::symgroup::{partitions, sym_irrep_dim, unitary_irrep_dim};
use crate::{Error, Result};

/// Cap on subsystem dimension for the exact Schur-Weyl index variant.
pub const EXACT_INDEX_DIM_CAP: u64 = 4096;
/// Cap on copies for the exact Schur-Weyl index variant.
pub const EXACT_INDEX_K_CAP: usize = 6;
/// Cap on the number of block tuples enumerated by the exact variant.
pub const EXACT_INDEX_TUPLE_CAP: u64 = 1_000_000;

/// Index bound C_cb for the inclusion of the global-twirl algebra inside
/// the product of local-twirl algebras on subsystems of the given sizes.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct IndexBound {
    /// ln of each subsystem dimension |A_n| (one copy).
    pub ln_dims: Vec<f64>,
    pub k: usize,
    /// k!^r ∏_n min{(1 - k²/|A_n|)^(-1), |A_n|^k / k!}; the first branch
    /// counts as +∞ when |A_n| ≤ k².
    pub coarse: LogReal,
    /// Variant with |A_n|^k replaced by |A_n|^(2k), as it appears at the
    /// end of the derivation; recorded for visibility, never used for ε.
    pub proof_display_variant: LogReal,
    /// |A|^k · max over block tuples of ∏ d_λ / ∏ m_λ, with exact irrep
    /// dimensions; present when all dims are small integers.
    pub exact_schur_weyl: Option<LogReal>,
}

impl IndexBound {
    /// The tightest available bound.
    pub fn best(&self) -> LogReal {
        match self.exact_schur_weyl {
            Some(e) if e.ln() < self.coarse.ln() => e,
            _ => self.coarse,
        }
    }
}

fn coarse_branches(ln_dim: f64, k: usize, double_power: bool) -> LogReal {
    let k2 = 2.0 * (k as f64).ln();
    // (1 - k²/|A|)^{-1}, infinite when |A| ≤ k²
    let first = if k2 < ln_dim {
        LogReal::from_ln(-(-(k2 - ln_dim).exp()).ln_1p())
    } else {
        LogReal::INFINITY
    };
    let pow = if double_power { 2.0 } else { 1.0 };
    let second = LogReal::from_ln(pow * k as f64 * ln_dim - ln_factorial(k as u64));
    if first.ln() <= second.ln() {
        first
    } else {
        second
    }
}

/// Coarse and (when cheap) exact index bounds from subsystem log-dims.
pub fn cb_index_bound(ln_dims: &[f64], k: usize) -> Result<IndexBound> {
    if ln_dims.is_empty() {
        return Err(Error::Domain("need at least one subsystem".into()));
    }
    if k == 0 {
        return Err(Error::Domain("k must be >= 1".into()));
    }
    let r = ln_dims.len();
    let ln_kf = ln_factorial(k as u64);
    let mut coarse = LogReal::from_ln(r as f64 * ln_kf);
    let mut proof_variant = coarse;
    for &ld in ln_dims {
        coarse = coarse.mul(coarse_branches(ld, k, false));
        proof_variant = proof_variant.mul(coarse_branches(ld, k, true));
    }
    if k == 1 {
        // The 1-fold twirl algebra is trivial: each block is A_λ = C with
        // multiplicity |A_n|, so the index is exactly 1 and the k-fold
        // min-branches are needlessly loose.
        coarse = LogReal::ONE;
        proof_variant = LogReal::ONE;
    }

    let exact = exact_schur_weyl_bound(ln_dims, k);

    Ok(IndexBound {
        ln_dims: ln_dims.to_vec(),
        k,
        coarse,
        proof_display_variant: proof_variant,
        exact_schur_weyl: exact,
    })
}

/// Convenience constructor from integer subsystem dimensions.
pub fn cb_index_bound_dims(dims: &[u64], k: usize) -> Result<IndexBound> {
    let ln_dims: Vec<f64> = dims.iter().map(|&d| (d as f64).ln()).collect();
    cb_index_bound(&ln_dims, k)
}

/// |A|^k · max_λ⃗ ∏_n d_{λ_n} / m_{λ_n}, enumerating per-party partition
/// tuples; None when out of the exact regime.
fn exact_schur_weyl_bound(ln_dims: &[f64], k: usize) -> Option<LogReal> {
    if k > EXACT_INDEX_K_CAP {
        return None;
    }
    let mut dims = Vec::with_capacity(ln_dims.len());
    for &ld in ln_dims {
        let d = ld.exp();
        let di = d.round();
        if !(1.0..=EXACT_INDEX_DIM_CAP as f64).contains(&di) || (d - di).abs() > 1e-6 * di {
            return None;
        }
        dims.push(di as u64);
    }
    // per-party options: ln d_λ - ln m_λ^d for each admissible λ
    let mut per_party: Vec<Vec<f64>> = Vec::with_capacity(dims.len());
    let mut tuples: u64 = 1;
    for &d in &dims {
        let opts: Vec<f64> = partitions(k as u64, (k as u64).min(d))
            .iter()
            .map(|lam| {
                let dl = sym_irrep_dim(lam).to_f64().expect("small");
                let ml = unitary_irrep_dim(lam, d).expect("parts <= d").to_f64().expect("small");
                dl.ln() - ml.ln()
            })
            .collect();
        tuples = tuples.saturating_mul(opts.len() as u64);
        if tuples > EXACT_INDEX_TUPLE_CAP {
            return None;
        }
        per_party.push(opts);
    }
    // max over tuples of a sum of independent terms = sum of per-party maxima
    let best: f64 = per_party
        .iter()
        .map(|opts| opts.iter().cloned().fold(f64::NEG_INFINITY, f64::max))
        .sum();
    let ln_total_dim: f64 = ln_dims.iter().sum();
    Some(LogReal::from_ln(k as f64 * ln_total_dim + best))
}

/// Outcome of a TPE → relative-error conversion.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct ConversionReport {
    pub gamma: f64,
    pub index: IndexBound,
    /// ε = γ·C with the coarse index (the single-iteration path).
    pub epsilon: LogReal,
    /// ε with the exact Schur-Weyl index, when available.
    pub epsilon_exact: Option<LogReal>,
    /// True iff ε < 1, i.e. the single iteration already certifies a
    /// relative-error design.
    pub valid: bool,
    /// Smallest iteration count n with γⁿ·C < 1 (so the n-fold channel
    /// satisfies the sandwich); None when γ ≥ 1.
    pub n_required: Option<u64>,
}

/// Converts a 2→2 distance γ into a relative error via the index bound.
pub fn tpe_to_relative(gamma: f64, index: &IndexBound) -> Result<ConversionReport> {
    if !(gamma >= 0.0) {
        return Err(Error::Domain(format!("gamma must be >= 0, got {gamma}")));
    }
    let gamma_log = LogReal::from_value(gamma);
    let epsilon = gamma_log.mul(index.coarse);
    let epsilon_exact = index.exact_schur_weyl.map(|e| gamma_log.mul(e));
    let n_required = if gamma == 0.0 {
        Some(1)
    } else if gamma < 1.0 {
        // smallest n ≥ ln C / ln(1/γ), at least 1
        let ratio = index.coarse.ln() / -gamma.ln();
        Some((ratio.ceil().max(1.0)) as u64)
    } else {
        None
    };
    Ok(ConversionReport {
        gamma,
        index: index.clone(),
        epsilon,
        epsilon_exact,
        valid: epsilon.ln() < 0.0,
        n_required,
    })
}

/// Design width for the twirl-swap-twirl theorem.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct SwapDesignEll {
    /// Smallest integer ℓ satisfying the theorem inequality.
    pub ell: u64,
    /// The real-valued right-hand side it must meet.
    pub rhs: f64,
    /// Whether ℓ ≤ m/2 holds, i.e. the block is wide enough.
    pub feasible: bool,
}

/// Smallest ℓ with ℓ ≥ (7/2)log_q k! + log_q(1/ε) - 4log_q(1 - k²/q^m)
/// + log_q 4, under the theorem hypothesis k² < 2q^m.
pub fn swap_design_ell(k: u64, q: u64, m: u64, eps: f64) -> Result<SwapDesignEll> {
    if q < 2 || k == 0 || m == 0 {
        return Err(Error::Domain("need q >= 2, k >= 1, m >= 1".into()));
    }
    if !(eps > 0.0) {
        return Err(Error::Domain(format!("eps must be > 0, got {eps}")));
    }
    let lnq = (q as f64).ln();
    let ln_k2_over = 2.0 * (k as f64).ln() - 2f64.ln() - m as f64 * lnq;
    if ln_k2_over >= 0.0 {
        return Err(Error::Domain(format!("theorem hypothesis k^2 < 2q^m fails (k={k}, q={q}, m={m})")));
    }
    // 1 - k²/q^m in log1p form; the hypothesis k² < 2q^m does not by itself
    // keep this positive, so guard separately.
    let x = (2.0 * (k as f64).ln() - m as f64 * lnq).exp();
    if x >= 1.0 {
        return Err(Error::Domain(format!("k^2 >= q^m leaves the log term undefined (k={k}, m={m})")));
    }
    let rhs = (3.5 * ln_factorial(k) - eps.ln() - 4.0 * (-x).ln_1p() + 4f64.ln()) / lnq;
    let ell = rhs.ceil().max(0.0) as u64;
    Ok(SwapDesignEll { ell, rhs, feasible: 2 * ell <= m })
}

/// Relative-error width for the multipartite crosstwirl theorem.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct CrosstwirlDesignEps {
    /// ε = 25·K!^(2P)·K·sqrt(Σ_p q^(-2ℓ_p)).
    pub eps: LogReal,
    pub valid: bool,
    pub preconditions: Vec<crate::angle::PrecondFlag>,
    /// Quantum communication per party: 2ℓ_p qudits.
    pub comm_qudits_per_party: Vec<u64>,
    /// Entanglement generated per party from a product state: 2ℓ_p·log2(q).
    pub ebits_per_party: Vec<f64>,
}

/// Evaluates the crosstwirl relative-error theorem for per-party (m_p, ℓ_p).
pub fn crosstwirl_design_eps(
    q: u64,
    k: u64,
    parties: &[(u64, u64)],
) -> Result<CrosstwirlDesignEps> {
    if q < 2 || k == 0 || parties.is_empty() {
        return Err(Error::Domain("need q >= 2, k >= 1, parties >= 1".into()));
    }
    if parties.iter().any(|&(m, l)| l == 0 || l > m) {
        return Err(Error::Domain("each party needs 0 < ell_p <= m_p".into()));
    }
    let lnq = (q as f64).ln();
    let p_count = parties.len() as f64;
    let sum_2neg = LogReal::sum(
        &parties.iter().map(|&(_, l)| LogReal::from_ln(-2.0 * l as f64 * lnq)).collect::<Vec<_>>(),
    );
    let eps = LogReal::from_ln(
        25f64.ln() + 2.0 * p_count * ln_factorial(k) + (k as f64).ln() + sum_2neg.sqrt().ln(),
    );
    let sum_neg: f64 = parties.iter().map(|&(_, l)| (-(l as f64) * lnq).exp()).sum();
    let preconditions = vec![
        crate::angle::PrecondFlag {
            name: "4k^2_sum_qinv_ell_le_1".into(),
            ok: 4.0 * (k * k) as f64 * sum_neg <= 1.0,
        },
        crate::angle::PrecondFlag {
            name: "m_p_ge_3ell_p".into(),
            ok: parties.iter().all(|&(m, l)| m >= 3 * l),
        },
    ];
    Ok(CrosstwirlDesignEps {
        eps,
        valid: eps.ln() < 0.0,
        preconditions,
        comm_qudits_per_party: parties.iter().map(|&(_, l)| 2 * l).collect(),
        ebits_per_party: parties.iter().map(|&(_, l)| 2.0 * l as f64 * (q as f64).log2()).collect(),
    })
}

/// Composes relative errors multiplicatively:
/// (1 + base)·∏(1 + ε_n) - 1, accumulated in log1p form.
pub fn compose_errors(eps_list: &[f64], base_eps: f64) -> Result<f64> {
    if eps_list.iter().chain([&base_eps]).any(|&e| e < 0.0) {
        return Err(Error::Domain("relative errors must be >= 0".into()));
    }
    let sum: f64 = eps_list.iter().map(|&e| e.ln_1p()).sum::<f64>() + base_eps.ln_1p();
    Ok(sum.exp_m1())
}
