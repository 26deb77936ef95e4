//! Gram matrices of permutation operators under the normalized Frobenius
//! inner product, plus their spectral utilities and the combinatorial
//! identities used to evaluate row sums in closed form.

use faer::Mat;
use num::bigint::BigUint;
use num::rational::BigRational;
use num::{BigInt, One, ToPrimitive};

use crate::logdomain::ln_factorial;
use crate::symgroup::CycleTable;
use crate::{Error, Result};

/// Dense k!×k! Gram matrix with entries `dim^(c(σ⁻¹τ) - k)`, indexed by
/// lexicographic permutation rank. `dim` is the effective Hilbert dimension
/// of the twirled system (q^m for composite systems), carried as ln(dim) so
/// that entries stay well-defined far beyond f64 range.
pub struct GramMatrix {
    pub k: usize,
    pub ln_dim: f64,
    pub entries: Mat<f64>,
}

impl GramMatrix {
    pub fn order(&self) -> usize {
        self.entries.nrows()
    }
}

/// Builds the Gram matrix for degree k at dimension `dim ≥ 1`.
pub fn gram_matrix(k: usize, dim: f64) -> Result<GramMatrix> {
    if !(dim >= 1.0) {
        return Err(Error::Domain(format!("dim must be >= 1, got {dim}")));
    }
    gram_matrix_ln(k, dim.ln())
}

/// Same as [`gram_matrix`] but takes ln(dim) directly, for dimensions
/// beyond f64 range.
pub fn gram_matrix_ln(k: usize, ln_dim: f64) -> Result<GramMatrix> {
    if ln_dim < 0.0 {
        return Err(Error::Domain(format!("ln_dim must be >= 0, got {ln_dim}")));
    }
    let ct = CycleTable::new(k)?;
    let kf = ct.group_order();
    let mut entries = Mat::<f64>::zeros(kf, kf);
    for s in 0..kf {
        for t in 0..kf {
            let c = ct.rel_cycles(s, t) as f64;
            entries[(s, t)] = ((c - k as f64) * ln_dim).exp();
        }
    }
    Ok(GramMatrix { k, ln_dim, entries })
}

/// Builds a Gram matrix reusing a precomputed cycle table.
pub fn gram_from_table(ct: &CycleTable, ln_dim: f64) -> GramMatrix {
    let kf = ct.group_order();
    let mut entries = Mat::<f64>::zeros(kf, kf);
    for s in 0..kf {
        for t in 0..kf {
            let c = ct.rel_cycles(s, t) as f64;
            entries[(s, t)] = ((c - ct.k as f64) * ln_dim).exp();
        }
    }
    GramMatrix { k: ct.k, ln_dim, entries }
}

/// Extremal eigenvalues (λmin, λmax) of a Gram matrix.
pub fn gram_extremal_eigs(g: &GramMatrix) -> Result<(f64, f64)> {
    let evd = g
        .entries
        .self_adjoint_eigen(faer::Side::Lower)
        .map_err(|e| Error::Numeric(format!("gram eigensolve failed: {e:?}")))?;
    let s = evd.S();
    let n = g.order();
    // faer returns eigenvalues in ascending order.
    Ok((s[0], s[n - 1]))
}

/// Exact value of Σ_{ω ∈ S_k} dim^(c(ω)) = k!·C(dim + k - 1, k).
pub fn cycle_sum(k: usize, dim: u64) -> Result<BigUint> {
    let ct = CycleTable::new(k)?;
    let mut acc = BigUint::ZERO;
    let id = 0usize; // identity has rank 0
    for t in 0..ct.group_order() {
        acc += BigUint::from(dim).pow(ct.rel_cycles(id, t) as u32);
    }
    Ok(acc)
}

/// Closed-form right-hand side k!·C(dim + k - 1, k), exact.
pub fn cycle_sum_closed_form(k: u64, dim: u64) -> BigUint {
    // k! · C(dim+k-1, k) = ∏_{j=1..k} (dim + j - 1)
    let mut acc = BigUint::one();
    for j in 1..=k {
        acc *= dim + j - 1;
    }
    acc
}

/// Sandwich around the normalized cycle sum.
#[derive(Clone, Copy, Debug)]
pub struct CancelBounds {
    /// 1 + k(k-1)/(2 q^m)
    pub lower: f64,
    /// q^(-mk) · k! · C(q^m + k - 1, k)
    pub value: f64,
    /// exp(k(k-1)/(2 q^m))
    pub upper: f64,
}

/// Evaluates the cancellation sandwich for `q^(-mk) k! C(q^m+k-1, k)`.
///
/// For q^m within u64 range the central value is computed as an exact
/// rational and then converted; beyond that, the telescoped product
/// ∏_{j=1..k} (1 + (j-1) q^(-m)) is used, which is the same quantity after
/// the factorials cancel.
pub fn cancel_bounds(k: u64, q: u64, m: u64) -> Result<CancelBounds> {
    if k == 0 || q < 2 {
        return Err(Error::Domain(format!("need k >= 1 and q >= 2, got k={k}, q={q}")));
    }
    if k > 8 {
        return Err(Error::Capacity(format!("k = {k} exceeds cap 8")));
    }
    let ln_qm = m as f64 * (q as f64).ln();
    let x = k as f64 * (k - 1) as f64 / 2.0 * (-ln_qm).exp();
    let lower = 1.0 + x;
    let upper = x.exp();

    let value = if (m as f64) * (q as f64).log2() <= 62.0 {
        let qm = q.checked_pow(m as u32).expect("within u64 by guard");
        let num = BigRational::from_integer(BigInt::from(cycle_sum_closed_form(k, qm)));
        let den = BigRational::from_integer(BigInt::from(qm).pow(k as u32));
        (num / den).to_f64().ok_or_else(|| Error::Numeric("rational to f64".into()))?
    } else {
        let qminv = (-ln_qm).exp();
        let mut acc = 1.0f64;
        for j in 1..=k {
            acc *= 1.0 + (j - 1) as f64 * qminv;
        }
        acc
    };

    if !(lower <= value * (1.0 + 1e-12) && value <= upper * (1.0 + 1e-12)) {
        return Err(Error::Inconsistency(format!(
            "cancellation sandwich violated: {lower} <= {value} <= {upper} (k={k}, q={q}, m={m})"
        )));
    }
    Ok(CancelBounds { lower, value, upper })
}

/// ln of the normalized cycle sum q^(-mk)·k!·C(q^m+k-1,k); used by the
/// bound evaluators in log domain.
pub fn ln_normalized_cycle_sum(ln_dim: f64, k: u64) -> f64 {
    ln_factorial(k) + crate::logdomain::ln_binom_shifted(ln_dim, k) - k as f64 * ln_dim
}

/// Serializes a Gram matrix as CSV with a header row of permutation ranks.
pub fn gram_to_csv(g: &GramMatrix) -> String {
    let n = g.order();
    let mut out = String::new();
    out.push_str("rank");
    for j in 0..n {
        out.push_str(&format!(",{j}"));
    }
    out.push('\n');
    for i in 0..n {
        out.push_str(&format!("{i}"));
        for j in 0..n {
            out.push_str(&format!(",{:e}", g.entries[(i, j)]));
        }
        out.push('\n');
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use num::ToPrimitive;

    #[test]
    fn gram_small_examples() {
        let g = gram_matrix(2, 2.0).unwrap();
        assert_eq!(g.order(), 2);
        assert_eq!(g.entries[(0, 0)], 1.0);
        assert_eq!(g.entries[(0, 1)], 0.5);
        assert_eq!(g.entries[(1, 0)], 0.5);

        let g1 = gram_matrix(1, 7.5).unwrap();
        assert_eq!(g1.order(), 1);
        assert_eq!(g1.entries[(0, 0)], 1.0);

        // entry(identity, 3-cycle) at k=3, dim=4 is 4^(1-3) = 1/16
        let g3 = gram_matrix(3, 4.0).unwrap();
        let perms = crate::symgroup::enumerate_group(3).unwrap();
        let three_cycle = perms.iter().position(|p| p.cycle_count() == 1).unwrap();
        assert!((g3.entries[(0, three_cycle)] - 1.0 / 16.0).abs() < 1e-15);
    }

    #[test]
    fn gram_diagonal_and_symmetry() {
        for k in 1..=4 {
            for dim in [2.0, 3.0, 16.0] {
                let g = gram_matrix(k, dim).unwrap();
                for i in 0..g.order() {
                    assert_eq!(g.entries[(i, i)], 1.0);
                    for j in 0..g.order() {
                        assert_eq!(g.entries[(i, j)], g.entries[(j, i)]);
                        assert!(g.entries[(i, j)] > 0.0 && g.entries[(i, j)] <= 1.0);
                        if i != j && dim > 1.0 {
                            assert!(g.entries[(i, j)] < 1.0);
                        }
                    }
                }
            }
        }
    }

    #[test]
    fn extremal_eigs_examples() {
        let g = gram_matrix(2, 2.0).unwrap();
        let (lo, hi) = gram_extremal_eigs(&g).unwrap();
        assert!((lo - 0.5).abs() < 1e-12 && (hi - 1.5).abs() < 1e-12);

        let g = gram_matrix(1, 9.0).unwrap();
        let (lo, hi) = gram_extremal_eigs(&g).unwrap();
        assert!((lo - 1.0).abs() < 1e-12 && (hi - 1.0).abs() < 1e-12);

        let g = gram_matrix(2, 4.0).unwrap();
        let (lo, hi) = gram_extremal_eigs(&g).unwrap();
        assert!((lo - 0.75).abs() < 1e-12 && (hi - 1.25).abs() < 1e-12);
    }

    #[test]
    fn spectral_bounds_sweep() {
        // λmin ≥ 1 - k²/(2 dim), λmax ≤ exp(k²/(2 dim)) whenever k ≤ dim.
        for k in 2..=5usize {
            for dim in [k as f64, k as f64 + 1.0, 2.0 * k as f64, 4.0 * k as f64, 16.0, 64.0] {
                if (k as f64) > dim {
                    continue;
                }
                let g = gram_matrix(k, dim).unwrap();
                let (lo, hi) = gram_extremal_eigs(&g).unwrap();
                let eps = (k * k) as f64 / (2.0 * dim);
                assert!(lo > 0.0, "k={k} dim={dim}: not PD (λmin={lo})");
                assert!(lo >= 1.0 - eps - 1e-9, "k={k} dim={dim}: λmin={lo}");
                assert!(hi <= eps.exp() + 1e-9, "k={k} dim={dim}: λmax={hi}");
            }
        }
    }

    #[test]
    fn cycle_sum_examples_and_identity() {
        assert_eq!(cycle_sum(2, 2).unwrap().to_u64().unwrap(), 6);
        assert_eq!(cycle_sum(3, 2).unwrap().to_u64().unwrap(), 24);
        assert_eq!(cycle_sum(1, 17).unwrap().to_u64().unwrap(), 17);
        for k in 1..=6usize {
            for dim in 1..=16u64 {
                assert_eq!(
                    cycle_sum(k, dim).unwrap(),
                    cycle_sum_closed_form(k as u64, dim),
                    "k={k} dim={dim}"
                );
            }
        }
    }

    #[test]
    fn row_sums_match_cycle_sum() {
        // each row of G is a bijective relabeling of dim^(c(ω)-k)
        for k in 2..=5usize {
            for dim in [2u64, 3, 7] {
                let g = gram_matrix(k, dim as f64).unwrap();
                let expected = cycle_sum(k, dim).unwrap().to_f64().unwrap()
                    / (dim as f64).powi(k as i32);
                for i in 0..g.order() {
                    let row: f64 = (0..g.order()).map(|j| g.entries[(i, j)]).sum();
                    assert!((row - expected).abs() <= 1e-12 * expected, "k={k} dim={dim}");
                }
            }
        }
    }

    #[test]
    fn cancel_bounds_examples() {
        let cb = cancel_bounds(1, 2, 3).unwrap();
        assert_eq!((cb.lower, cb.value, cb.upper), (1.0, 1.0, 1.0));

        let cb = cancel_bounds(2, 2, 2).unwrap();
        assert!((cb.lower - 1.25).abs() < 1e-15);
        assert!((cb.value - 1.25).abs() < 1e-15);
        assert!((cb.upper - 0.25f64.exp()).abs() < 1e-15);

        let cb = cancel_bounds(3, 2, 3).unwrap();
        assert!((cb.lower - 1.375).abs() < 1e-15);
        assert!((cb.value - 1.40625).abs() < 1e-12);
        assert!((cb.upper - 0.375f64.exp()).abs() < 1e-15);
    }

    #[test]
    fn cancel_bounds_huge_m_path() {
        // beyond u64: product form; sandwich still asserted internally
        let cb = cancel_bounds(4, 2, 400).unwrap();
        assert!(cb.lower <= cb.value && cb.value <= cb.upper);
        assert!((cb.value - 1.0).abs() < 1e-12);
    }

    #[test]
    fn ln_normalized_cycle_sum_matches_exact() {
        for k in 1..=5u64 {
            for (q, m) in [(2u64, 2u64), (2, 5), (3, 3)] {
                let cb = cancel_bounds(k, q, m).unwrap();
                let ln = ln_normalized_cycle_sum(m as f64 * (q as f64).ln(), k);
                assert!((ln - cb.value.ln()).abs() < 1e-12, "k={k} q={q} m={m}");
            }
        }
    }

    #[test]
    fn csv_dump_shape() {
        let g = gram_matrix(2, 2.0).unwrap();
        let csv = gram_to_csv(&g);
        let lines: Vec<&str> = csv.lines().collect();
        assert_eq!(lines.len(), 3);
        assert_eq!(lines[0], "rank,0,1");
        assert!(lines[1].starts_with("0,1e0,"));
    }
}
