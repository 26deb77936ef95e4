//! Protocol matrices and subspace angles.
//!
//! The convergence rate of an alternating twirl protocol is the subspace
//! angle between the images of two orthogonal projections, equal to the
//! largest generalized eigenvalue of a pencil built from permutation Gram
//! matrices. This module assembles those matrices, solves the pencil
//! exactly at desk scale, and evaluates every closed-form bound.
//!
//! Matrix index conventions: single permutations are indexed by
//! lexicographic rank; P-tuples are flattened big-endian in party order,
//! `index(σ⃗) = Σ_p rank(σ^p)·k!^(P-1-p)`.

use faer::Mat;
use serde::{Deserialize, Serialize};

use crate::gram::{gram_from_table, ln_normalized_cycle_sum};
use crate::logdomain::{ln_factorial, LogReal};
use crate::symgroup::{factorial_usize, CycleTable};
use crate::{Error, Result};

/// Dense cap: pencil sides never exceed this many indices (k!² for swap,
/// k!^P for crosstwirls).
pub const DENSE_INDEX_CAP: usize = 14_400;
/// Degree cap for exact-angle computations.
pub const MAX_ANGLE_DEGREE: usize = 5;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ProtocolKind {
    Swap,
    Crosstwirl,
    MultiCrosstwirl,
}

/// One party's block: m qudits per copy, of which ell participate in the
/// swap/crosstwirl.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Party {
    pub m: u64,
    pub ell: u64,
}

/// Scalar data of a protocol instance.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ProtocolParams {
    pub q: u64,
    pub k: usize,
    pub parties: Vec<Party>,
    pub kind: ProtocolKind,
}

/// A named precondition check. Failures do not abort closed-form
/// evaluations; they are carried in reports.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct PrecondFlag {
    pub name: String,
    pub ok: bool,
}

fn flag(name: &str, ok: bool) -> PrecondFlag {
    PrecondFlag { name: name.to_string(), ok }
}

pub fn all_ok(flags: &[PrecondFlag]) -> bool {
    flags.iter().all(|f| f.ok)
}

impl ProtocolParams {
    pub fn swap(q: u64, k: usize, m: u64, ell: u64) -> Result<ProtocolParams> {
        Self::new(q, k, vec![Party { m, ell }, Party { m, ell }], ProtocolKind::Swap)
    }

    pub fn crosstwirl(q: u64, k: usize, m: u64, ell: u64) -> Result<ProtocolParams> {
        Self::new(q, k, vec![Party { m, ell }, Party { m, ell }], ProtocolKind::Crosstwirl)
    }

    pub fn multi(q: u64, k: usize, parties: Vec<Party>) -> Result<ProtocolParams> {
        Self::new(q, k, parties, ProtocolKind::MultiCrosstwirl)
    }

    pub fn new(q: u64, k: usize, parties: Vec<Party>, kind: ProtocolKind) -> Result<ProtocolParams> {
        if q < 2 {
            return Err(Error::Domain(format!("local dimension q must be >= 2, got {q}")));
        }
        if k == 0 {
            return Err(Error::Domain("copy count k must be >= 1".into()));
        }
        if parties.is_empty() || parties.iter().any(|p| p.m == 0) {
            return Err(Error::Domain("need at least one party with m >= 1".into()));
        }
        match kind {
            ProtocolKind::Swap | ProtocolKind::Crosstwirl => {
                if parties.len() != 2 || parties[0] != parties[1] {
                    return Err(Error::Domain(format!(
                        "{kind:?} requires two identical parties, got {parties:?}"
                    )));
                }
            }
            ProtocolKind::MultiCrosstwirl => {
                if parties.len() < 2 {
                    return Err(Error::Domain("multi-crosstwirl requires P >= 2 parties".into()));
                }
            }
        }
        if parties.iter().any(|p| p.ell > p.m) {
            return Err(Error::Domain("ell_p cannot exceed m_p".into()));
        }
        Ok(ProtocolParams { q, k, parties, kind })
    }

    pub fn num_parties(&self) -> usize {
        self.parties.len()
    }

    /// Total block width M = Σ m_p.
    pub fn total_m(&self) -> u64 {
        self.parties.iter().map(|p| p.m).sum()
    }

    /// Total crosstwirl width L = Σ ℓ_p.
    pub fn total_l(&self) -> u64 {
        self.parties.iter().map(|p| p.ell).sum()
    }

    pub fn ln_q(&self) -> f64 {
        (self.q as f64).ln()
    }

    /// Structural preconditions of the matching proposition.
    pub fn preconditions(&self) -> Vec<PrecondFlag> {
        let k = self.k as f64;
        let lnq = self.ln_q();
        let mut out = Vec::new();
        match self.kind {
            ProtocolKind::Swap => {
                let p = &self.parties[0];
                out.push(flag("ell_le_half_m", 2 * p.ell <= p.m));
                out.push(flag("k_le_q^m", k.ln() <= p.m as f64 * lnq + 1e-12));
                out.push(flag("k^2_lt_2q^m", 2.0 * k.ln() < 2f64.ln() + p.m as f64 * lnq));
            }
            ProtocolKind::Crosstwirl => {
                let p = &self.parties[0];
                out.push(flag("ell_lt_m", p.ell < p.m));
                out.push(flag("k_le_q^2l", k.ln() <= 2.0 * p.ell as f64 * lnq + 1e-12));
                out.push(flag("k_le_q^m", k.ln() <= p.m as f64 * lnq + 1e-12));
                out.push(flag("k^2_lt_2q^2l", 2.0 * k.ln() < 2f64.ln() + 2.0 * p.ell as f64 * lnq));
            }
            ProtocolKind::MultiCrosstwirl => {
                let l_tot = self.total_l() as f64;
                out.push(flag("ell_p_positive", self.parties.iter().all(|p| p.ell >= 1)));
                out.push(flag(
                    "k_le_q^mp_all",
                    self.parties.iter().all(|p| k.ln() <= p.m as f64 * lnq + 1e-12),
                ));
                out.push(flag("k_le_q^L", k.ln() <= l_tot * lnq + 1e-12));
                out.push(flag("k^2_lt_2q^L", 2.0 * k.ln() < 2f64.ln() + l_tot * lnq));
            }
        }
        out
    }

    fn check_dense_cap(&self) -> Result<()> {
        if self.k > MAX_ANGLE_DEGREE {
            return Err(Error::Capacity(format!(
                "k = {} exceeds exact-solve degree cap {MAX_ANGLE_DEGREE}",
                self.k
            )));
        }
        let kf = factorial_usize(self.k);
        let mut idx: usize = 1;
        for _ in 0..self.num_parties() {
            idx = idx.checked_mul(kf).filter(|&v| v <= DENSE_INDEX_CAP).ok_or_else(|| {
                Error::Capacity(format!(
                    "k!^P = {kf}^{} exceeds dense index cap {DENSE_INDEX_CAP}",
                    self.num_parties()
                ))
            })?;
        }
        Ok(())
    }
}

/// Walks a flattened tuple index back to per-party ranks (big-endian).
fn unflatten(mut idx: usize, kf: usize, parties: usize) -> Vec<usize> {
    let mut out = vec![0usize; parties];
    for p in (0..parties).rev() {
        out[p] = idx % kf;
        idx /= kf;
    }
    out
}

/// Generic weighted product matrix over P-tuples:
/// entry(π⃗, σ⃗) = q^(Σ_p w_p (c(π^p⁻¹ σ^p) - k)). With w_p = m_p this is
/// ⊗_p G_{A_p}; with w_p = m_p - ℓ_p it is the Hadamard Gram factor.
fn tuple_product_matrix(ct: &CycleTable, weights: &[u64], ln_q: f64) -> Mat<f64> {
    let kf = ct.group_order();
    let parties = weights.len();
    let n = kf.pow(parties as u32);
    let k = ct.k as i64;
    Mat::<f64>::from_fn(n, n, |i, j| {
        let pi = unflatten(i, kf, parties);
        let sj = unflatten(j, kf, parties);
        let mut e = 0i64;
        for p in 0..parties {
            e += weights[p] as i64 * (ct.rel_cycles(pi[p], sj[p]) as i64 - k);
        }
        (e as f64 * ln_q).exp()
    })
}

/// Generic joint-versus-product matrix (k! × k!^P):
/// entry(π, σ⃗) = q^(Σ_p w_p (c(π⁻¹ σ^p) - k)).
fn joint_product_matrix(ct: &CycleTable, weights: &[u64], ln_q: f64) -> Mat<f64> {
    let kf = ct.group_order();
    let parties = weights.len();
    let cols = kf.pow(parties as u32);
    let k = ct.k as i64;
    Mat::<f64>::from_fn(kf, cols, |pi, j| {
        let sj = unflatten(j, kf, parties);
        let mut e = 0i64;
        for p in 0..parties {
            e += weights[p] as i64 * (ct.rel_cycles(pi, sj[p]) as i64 - k);
        }
        (e as f64 * ln_q).exp()
    })
}

/// The swap-protocol matrix M (k!² × k!²):
/// entry((π,ρ),(ω,χ)) = ⟨π_A, χ_{A^ℓ} ⊗ ω_{A^{m-ℓ}}⟩⟨ρ_B, ω_{B^ℓ} ⊗ χ_{B^{m-ℓ}}⟩.
pub fn build_m(params: &ProtocolParams) -> Result<Mat<f64>> {
    if params.kind != ProtocolKind::Swap {
        return Err(Error::Domain("M is defined for the swap protocol".into()));
    }
    params.check_dense_cap()?;
    let ct = CycleTable::new(params.k)?;
    let kf = ct.group_order();
    let n = kf * kf;
    let (m, ell) = (params.parties[0].m as i64, params.parties[0].ell as i64);
    let k = params.k as i64;
    let lnq = params.ln_q();
    Ok(Mat::<f64>::from_fn(n, n, |i, j| {
        let (pi, rho) = (i / kf, i % kf);
        let (om, chi) = (j / kf, j % kf);
        let e = ell * (ct.rel_cycles(pi, chi) as i64 - k)
            + (m - ell) * (ct.rel_cycles(pi, om) as i64 - k)
            + ell * (ct.rel_cycles(rho, om) as i64 - k)
            + (m - ell) * (ct.rel_cycles(rho, chi) as i64 - k);
        (e as f64 * lnq).exp()
    }))
}

/// N (k! × k!^P): entry(π, σ⃗) = ∏_p q^(m_p (c(π⁻¹σ^p) - k)).
pub fn build_n(params: &ProtocolParams) -> Result<Mat<f64>> {
    params.check_dense_cap()?;
    let ct = CycleTable::new(params.k)?;
    let w: Vec<u64> = params.parties.iter().map(|p| p.m).collect();
    Ok(joint_product_matrix(&ct, &w, params.ln_q()))
}

/// N_ℓ (k! × k!^P): entry(π, σ⃗) = ∏_p q^(ℓ_p (c(π⁻¹σ^p) - k)).
pub fn build_n_ell(params: &ProtocolParams) -> Result<Mat<f64>> {
    params.check_dense_cap()?;
    let ct = CycleTable::new(params.k)?;
    let w: Vec<u64> = params.parties.iter().map(|p| p.ell).collect();
    Ok(joint_product_matrix(&ct, &w, params.ln_q()))
}

/// Symmetric pseudo-inverse through an eigendecomposition, cutting
/// eigenvalues below `rel_cut · λmax`. Returns the pinv and the kept rank.
fn sym_pinv(g: &Mat<f64>, rel_cut: f64) -> Result<(Mat<f64>, usize)> {
    let n = g.nrows();
    let evd = g
        .self_adjoint_eigen(faer::Side::Lower)
        .map_err(|e| Error::Numeric(format!("eigensolve failed: {e:?}")))?;
    let s = evd.S();
    let u = evd.U();
    let smax = s[n - 1].max(0.0);
    let cut = smax * rel_cut;
    let mut rank = 0usize;
    let mut pinv = Mat::<f64>::zeros(n, n);
    for c in 0..n {
        if s[c] > cut {
            rank += 1;
            let w = 1.0 / s[c];
            for i in 0..n {
                for j in 0..n {
                    pinv[(i, j)] += w * u[(i, c)] * u[(j, c)];
                }
            }
        }
    }
    Ok((pinv, rank))
}

fn kron(a: &Mat<f64>, b: &Mat<f64>) -> Mat<f64> {
    let (ac, br, bc) = (a.ncols(), b.nrows(), b.ncols());
    Mat::<f64>::from_fn(a.nrows() * br, ac * bc, |i, j| a[(i / br, j / bc)] * b[(i % br, j % bc)])
}

/// Solution of the symmetric semidefinite pencil A x = λ B x restricted to
/// the range of B.
#[derive(Clone, Copy, Debug, Serialize, Deserialize)]
pub struct PencilSolution {
    /// Largest eigenvalue clamped to [0, ∞).
    pub lambda_max: f64,
    /// Raw extremal eigenvalues before clamping, for diagnostics.
    pub lambda_max_raw: f64,
    pub lambda_min_raw: f64,
    /// Rank of B actually used (equals the side when B is positive definite).
    pub b_rank: usize,
    pub b_size: usize,
}

/// Solves the pencil by factoring B = U Λ Uᵀ, transforming A on the kept
/// spectral subspace, and running a dense symmetric eigensolve there.
/// Eigenvalues below -1e-10 (relative) trip an internal-consistency error:
/// the pencil is PSD by theorem, so larger violations indicate a bad build.
pub fn solve_pencil(a: &Mat<f64>, b: &Mat<f64>) -> Result<PencilSolution> {
    let n = b.nrows();
    let evd = b
        .self_adjoint_eigen(faer::Side::Lower)
        .map_err(|e| Error::Numeric(format!("B eigensolve failed: {e:?}")))?;
    let s = evd.S();
    let u = evd.U();
    let smax = s[n - 1].max(0.0);
    if smax <= 0.0 {
        return Err(Error::Numeric("B has no positive spectrum".into()));
    }
    let cut = smax * 1e-9;
    let kept: Vec<usize> = (0..n).filter(|&c| s[c] > cut).collect();
    let r = kept.len();
    // W = U_kept Λ_kept^{-1/2}
    let mut w = Mat::<f64>::zeros(n, r);
    for (cc, &c) in kept.iter().enumerate() {
        let inv_sqrt = 1.0 / s[c].sqrt();
        for i in 0..n {
            w[(i, cc)] = u[(i, c)] * inv_sqrt;
        }
    }
    let t = w.transpose() * a * &w;
    // symmetrize to kill roundoff skew before the eigensolve
    let t = Mat::<f64>::from_fn(r, r, |i, j| 0.5 * (t[(i, j)] + t[(j, i)]));
    let evd_t = t
        .self_adjoint_eigen(faer::Side::Lower)
        .map_err(|e| Error::Numeric(format!("pencil eigensolve failed: {e:?}")))?;
    let st = evd_t.S();
    let (lo, hi) = (st[0], st[r - 1]);
    let tolerance = 1e-10 * hi.abs().max(1e-2);
    if lo < -tolerance {
        return Err(Error::Inconsistency(format!(
            "pencil has eigenvalue {lo} below PSD clamp threshold -{tolerance}"
        )));
    }
    Ok(PencilSolution {
        lambda_max: hi.max(0.0),
        lambda_max_raw: hi,
        lambda_min_raw: lo,
        b_rank: r,
        b_size: n,
    })
}

/// Constants of the angle bounds, kept in log domain. For the swap
/// protocol c = g = 1. `theorem_a` is the loosened (1 - k²/q^m)^(-2) used
/// in the design-size theorem.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct BoundConstants {
    pub a: LogReal,
    pub b: LogReal,
    pub c: LogReal,
    pub g: LogReal,
    pub theorem_a: Option<LogReal>,
    /// All constants finite and well-defined.
    pub valid: bool,
}

/// ln((1-x)^{-1}) for x = exp(ln_x), or None when x >= 1.
fn ln_inv_one_minus(ln_x: f64) -> Option<f64> {
    if ln_x >= 0.0 {
        return None;
    }
    Some(-(-ln_x.exp()).ln_1p())
}

pub fn constants(params: &ProtocolParams) -> BoundConstants {
    let k2 = 2.0 * (params.k as f64).ln();
    let lnq = params.ln_q();
    let ln2 = 2f64.ln();
    let m_tot = params.total_m() as f64;
    let l_tot = params.total_l() as f64;
    let invalid = BoundConstants {
        a: LogReal::INFINITY,
        b: LogReal::ZERO,
        c: LogReal::INFINITY,
        g: LogReal::INFINITY,
        theorem_a: None,
        valid: false,
    };
    match params.kind {
        ProtocolKind::Swap => {
            let m = params.parties[0].m as f64;
            // a = (1 - k²/(2 q^m))^{-2}
            let Some(ln_inv) = ln_inv_one_minus(k2 - ln2 - m * lnq) else {
                return invalid;
            };
            let theorem_a = ln_inv_one_minus(k2 - m * lnq).map(|l| LogReal::from_ln(2.0 * l));
            let b = LogReal::from_ln(-(k2 - ln2 - 2.0 * m * lnq).exp());
            BoundConstants {
                a: LogReal::from_ln(2.0 * ln_inv),
                b,
                c: LogReal::ONE,
                g: LogReal::ONE,
                theorem_a,
                valid: true,
            }
        }
        ProtocolKind::Crosstwirl => {
            let m = params.parties[0].m as f64;
            let ell = params.parties[0].ell as f64;
            let (Some(ln_a1), Some(ln_c)) = (
                ln_inv_one_minus(k2 - ln2 - m * lnq),
                ln_inv_one_minus(k2 - ln2 - 2.0 * ell * lnq),
            ) else {
                return invalid;
            };
            let b = LogReal::from_ln(-(k2 - ln2 - 2.0 * m * lnq).exp());
            let g = LogReal::from_ln((k2 - (m - ell) * lnq).exp());
            BoundConstants {
                a: LogReal::from_ln(2.0 * ln_a1),
                b,
                c: LogReal::from_ln(ln_c),
                g,
                theorem_a: None,
                valid: true,
            }
        }
        ProtocolKind::MultiCrosstwirl => {
            let mut ln_a = 0.0;
            for p in &params.parties {
                match ln_inv_one_minus(k2 - ln2 - p.m as f64 * lnq) {
                    Some(l) => ln_a += l,
                    None => return invalid,
                }
            }
            let Some(ln_c) = ln_inv_one_minus(k2 - ln2 - l_tot * lnq) else {
                return invalid;
            };
            let b = LogReal::from_ln(-(k2 - ln2 - m_tot * lnq).exp());
            let ln_g: f64 = params
                .parties
                .iter()
                .map(|p| (k2 - ln2 - (p.m - p.ell) as f64 * lnq).exp())
                .sum();
            BoundConstants {
                a: LogReal::from_ln(ln_a),
                b,
                c: LogReal::from_ln(ln_c),
                g: LogReal::from_ln(ln_g),
                theorem_a: None,
                valid: true,
            }
        }
    }
}

/// Closed-form angle bound for the swap protocol:
/// sqrt(9ak²q^(-m) + 4a²k!³q^(-2ℓ) + 2a²k!⁵q^(-4ℓ)).
/// Returns +∞ when the constants are undefined.
pub fn bound_swap(params: &ProtocolParams) -> Result<LogReal> {
    if params.kind != ProtocolKind::Swap {
        return Err(Error::Domain("bound_swap needs swap params".into()));
    }
    let cst = constants(params);
    if !cst.valid {
        return Ok(LogReal::INFINITY);
    }
    let lnq = params.ln_q();
    let (m, ell) = (params.parties[0].m as f64, params.parties[0].ell as f64);
    let ln_kf = ln_factorial(params.k as u64);
    let ln_a = cst.a.ln();
    let t1 = LogReal::from_ln(9f64.ln() + ln_a + 2.0 * (params.k as f64).ln() - m * lnq);
    let t2 = LogReal::from_ln(4f64.ln() + 2.0 * ln_a + 3.0 * ln_kf - 2.0 * ell * lnq);
    let t3 = LogReal::from_ln(2f64.ln() + 2.0 * ln_a + 5.0 * ln_kf - 4.0 * ell * lnq);
    Ok(t1.add(t2).add(t3).sqrt())
}

/// The three c² terms shared by the crosstwirl bounds, as
/// (positive₁, subtracted, positive₂): c² ≤ t1 - 2·t2 + t3.
fn crosstwirl_sq_terms(params: &ProtocolParams, cst: &BoundConstants) -> (LogReal, LogReal, LogReal) {
    let lnq = params.ln_q();
    let k = params.k as u64;
    // t1 = acg ∏_p nrm(2ℓ_p); t2 = ab ∏_p nrm(2m_p); t3 = ab ∏_p nrm(m_p)²,
    // where nrm(w) = q^{-wk} k! C(q^w + k - 1, k). The bipartite statement
    // with its explicit k!-powers and binomials is this with P = 2.
    let mut s1 = 0.0;
    let mut s2 = 0.0;
    let mut s3 = 0.0;
    for p in &params.parties {
        s1 += ln_normalized_cycle_sum(2.0 * p.ell as f64 * lnq, k);
        s2 += ln_normalized_cycle_sum(2.0 * p.m as f64 * lnq, k);
        s3 += 2.0 * ln_normalized_cycle_sum(p.m as f64 * lnq, k);
    }
    let acg = cst.a.mul(cst.c).mul(cst.g);
    let ab = cst.a.mul(cst.b);
    (
        acg.mul(LogReal::from_ln(s1)),
        ab.mul(LogReal::from_ln(s2)),
        ab.mul(LogReal::from_ln(s3)),
    )
}

/// Bipartite crosstwirl angle bound (the three-term c² expression with
/// explicit binomials), clamped at zero before the square root.
pub fn bound_crosstwirl(params: &ProtocolParams) -> Result<LogReal> {
    if params.kind != ProtocolKind::Crosstwirl {
        return Err(Error::Domain("bound_crosstwirl needs crosstwirl params".into()));
    }
    let cst = constants(params);
    if !cst.valid {
        return Ok(LogReal::INFINITY);
    }
    let lnq = params.ln_q();
    let k = params.k as u64;
    let (m, ell) = (params.parties[0].m as f64, params.parties[0].ell as f64);
    let ln_kf = ln_factorial(k);
    let lb = |w: f64| crate::logdomain::ln_binom_shifted(w * lnq, k);
    // acg q^{-4ℓk} k!² C(q^{2ℓ}+k-1,k)²
    let t1 = cst.a.mul(cst.c).mul(cst.g).mul(LogReal::from_ln(
        -4.0 * ell * k as f64 * lnq + 2.0 * ln_kf + 2.0 * lb(2.0 * ell),
    ));
    // ab q^{-4mk} k!² C(q^{2m}+k-1,k)²
    let t2 = cst.a.mul(cst.b).mul(LogReal::from_ln(
        -4.0 * m * k as f64 * lnq + 2.0 * ln_kf + 2.0 * lb(2.0 * m),
    ));
    // ab q^{-4mk} k!⁴ C(q^m+k-1,k)⁴
    let t3 = cst.a.mul(cst.b).mul(LogReal::from_ln(
        -4.0 * m * k as f64 * lnq + 4.0 * ln_kf + 4.0 * lb(m),
    ));
    Ok(t1.add(t3).sub_clamped(t2.mul(LogReal::from_value(2.0))).sqrt())
}

/// Multipartite crosstwirl angle bound (per-party product form).
pub fn bound_multi_crosstwirl(params: &ProtocolParams) -> Result<LogReal> {
    if params.kind == ProtocolKind::Swap {
        return Err(Error::Domain("bound_multi_crosstwirl needs crosstwirl params".into()));
    }
    let cst = constants(params);
    if !cst.valid {
        return Ok(LogReal::INFINITY);
    }
    let (t1, t2, t3) = crosstwirl_sq_terms(params, &cst);
    Ok(t1.add(t3).sub_clamped(t2.mul(LogReal::from_value(2.0))).sqrt())
}

/// Report of the TPE corollary evaluation.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct TpeBoundReport {
    /// 5K sqrt(Σ_p q^(-2ℓ_p)).
    pub bound: LogReal,
    pub preconditions: Vec<PrecondFlag>,
}

/// TPE bound 5K·sqrt(Σ_p q^(-2ℓ_p)) of the multipartite corollary.
///
/// The corollary's precondition is printed in the source with a positive
/// exponent (`K² Σ_p q^{ℓ_p} ≤ 1`), which is unsatisfiable for q ≥ 2; the
/// implemented condition uses the negative exponent, and both raw readings
/// plus the theorem-level variant are evaluated and reported instead of
/// silently reconciling them.
pub fn tpe_bound_multict(params: &ProtocolParams) -> Result<TpeBoundReport> {
    if params.kind == ProtocolKind::Swap {
        return Err(Error::Domain("tpe_bound_multict needs crosstwirl params".into()));
    }
    let k = params.k as f64;
    let lnq = params.ln_q();
    let sum_neg: f64 = params.parties.iter().map(|p| (-(p.ell as f64) * lnq).exp()).sum();
    let sum_pos = LogReal::sum(
        &params.parties.iter().map(|p| LogReal::from_ln(p.ell as f64 * lnq)).collect::<Vec<_>>(),
    );
    let sum_2neg = LogReal::sum(
        &params
            .parties
            .iter()
            .map(|p| LogReal::from_ln(-2.0 * p.ell as f64 * lnq))
            .collect::<Vec<_>>(),
    );
    let bound = LogReal::from_value(5.0 * k).mul(sum_2neg.sqrt());
    let preconditions = vec![
        flag("k^2_sum_qinv_ell_le_1", k * k * sum_neg <= 1.0),
        // evaluated literally as printed; cannot hold for q >= 2
        flag("as_printed_k^2_sum_q^ell_le_1", k * k * sum_pos.value() <= 1.0),
        flag("theorem_4k^2_sum_qinv_ell_le_1", 4.0 * k * k * sum_neg <= 1.0),
        flag("m_p_ge_3ell_p", params.parties.iter().all(|p| p.m >= 3 * p.ell)),
    ];
    // Dominance over the proposition-level bound is a theorem under the
    // implemented preconditions; a violation means a broken formula.
    let implemented_ok = preconditions[0].ok && preconditions[3].ok;
    if implemented_ok {
        let prop = bound_multi_crosstwirl(params)?;
        let prop_ok = all_ok(&params.preconditions());
        if prop_ok && !prop.is_infinite() && bound.ln() < prop.ln() - 1e-12 {
            return Err(Error::Inconsistency(format!(
                "TPE corollary bound {} fell below proposition bound {}",
                bound.value(),
                prop.value()
            )));
        }
    }
    Ok(TpeBoundReport { bound, preconditions })
}

/// Exact subspace angle and bound for one protocol instance.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct AngleReport {
    pub params: ProtocolParams,
    /// sqrt(λmax) of the pencil; present whenever the dense cap allows the
    /// solve. When Gram positive-definiteness fails the value is computed
    /// through range-restricted pseudo-solves and the flag records it.
    pub exact_angle: Option<f64>,
    pub pencil: Option<PencilSolution>,
    pub analytic_bound: LogReal,
    pub constants: BoundConstants,
    pub preconditions_met: Vec<PrecondFlag>,
    pub tpe_bound: Option<LogReal>,
}

/// Assembles the pencil (A, B) for the instance. B is the coefficient Gram
/// ⊗_p G_{A_p}; A is the protocol's bracketed operator on im P.
fn assemble_pencil(params: &ProtocolParams) -> Result<(Mat<f64>, Mat<f64>)> {
    params.check_dense_cap()?;
    let ct = CycleTable::new(params.k)?;
    let lnq = params.ln_q();
    let w_m: Vec<u64> = params.parties.iter().map(|p| p.m).collect();
    let b = tuple_product_matrix(&ct, &w_m, lnq);
    let n_mat = build_n(params)?;
    let g_m = gram_from_table(&ct, params.total_m() as f64 * lnq);
    let (g_m_pinv, _) = sym_pinv(&g_m.entries, 1e-12)?;
    let r_term = n_mat.transpose() * g_m_pinv * &n_mat;
    let a = match params.kind {
        ProtocolKind::Swap => {
            let m_mat = build_m(params)?;
            let g_a = gram_from_table(&ct, params.parties[0].m as f64 * lnq);
            let (ga_pinv, _) = sym_pinv(&g_a.entries, 1e-12)?;
            let big_pinv = kron(&ga_pinv, &ga_pinv);
            &m_mat * big_pinv * &m_mat - r_term
        }
        ProtocolKind::Crosstwirl | ProtocolKind::MultiCrosstwirl => {
            let n_ell = build_n_ell(params)?;
            let g_l = gram_from_table(&ct, params.total_l() as f64 * lnq);
            let (gl_pinv, _) = sym_pinv(&g_l.entries, 1e-12)?;
            let inner = n_ell.transpose() * gl_pinv * &n_ell;
            let w_rest: Vec<u64> = params.parties.iter().map(|p| p.m - p.ell).collect();
            let had = tuple_product_matrix(&ct, &w_rest, lnq);
            let n = inner.nrows();
            Mat::<f64>::from_fn(n, n, |i, j| had[(i, j)] * inner[(i, j)]) - r_term
        }
    };
    Ok((a, b))
}

/// Dispatches to the protocol's analytic bound.
pub fn analytic_bound(params: &ProtocolParams) -> Result<LogReal> {
    match params.kind {
        ProtocolKind::Swap => bound_swap(params),
        ProtocolKind::Crosstwirl => bound_crosstwirl(params),
        ProtocolKind::MultiCrosstwirl => bound_multi_crosstwirl(params),
    }
}

/// Computes the exact subspace angle via the generalized eigenproblem and
/// pairs it with the analytic bound and precondition flags.
pub fn exact_angle(params: &ProtocolParams) -> Result<AngleReport> {
    let mut preconditions_met = params.preconditions();
    let bound = analytic_bound(params)?;
    let cst = constants(params);
    let tpe = match params.kind {
        ProtocolKind::Swap => None,
        _ => Some(tpe_bound_multict(params)?.bound),
    };

    let (a, b) = assemble_pencil(params)?;
    let sol = solve_pencil(&a, &b)?;
    preconditions_met.push(flag("gram_positive_definite", sol.b_rank == sol.b_size));
    let mut angle = sol.lambda_max.sqrt();
    if angle > 1.0 {
        if angle > 1.0 + 1e-8 {
            return Err(Error::Inconsistency(format!(
                "subspace angle {angle} exceeds 1 beyond tolerance"
            )));
        }
        angle = 1.0;
    }
    Ok(AngleReport {
        params: params.clone(),
        exact_angle: Some(angle),
        pencil: Some(sol),
        analytic_bound: bound,
        constants: cst,
        preconditions_met,
        tpe_bound: tpe,
    })
}

/// Bound-only report (no eigensolve), for instances beyond the dense cap.
pub fn bound_report(params: &ProtocolParams) -> Result<AngleReport> {
    let preconditions_met = params.preconditions();
    let bound = analytic_bound(params)?;
    let cst = constants(params);
    let tpe = match params.kind {
        ProtocolKind::Swap => None,
        _ => Some(tpe_bound_multict(params)?.bound),
    };
    Ok(AngleReport {
        params: params.clone(),
        exact_angle: None,
        pencil: None,
        analytic_bound: bound,
        constants: cst,
        preconditions_met,
        tpe_bound: tpe,
    })
}

/// Spectral norms of the open-question matrices together with the
/// diagonal/off-diagonal split of Y.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct OpenQuestionNorms {
    /// ‖a M² - b NᵀN‖ for swap parameters.
    pub norm_x: Option<f64>,
    /// ‖cg·1 ⊙ N_ℓᵀN_ℓ - b NᵀN‖ for crosstwirl parameters.
    pub norm_y: Option<f64>,
    /// ‖D‖ and ‖K‖ of the diagonal/off-diagonal split of Y.
    pub norm_d: Option<f64>,
    pub norm_k: Option<f64>,
}

fn spectral_norm_sym(m: &Mat<f64>) -> Result<f64> {
    let n = m.nrows();
    let evd = m
        .self_adjoint_eigen(faer::Side::Lower)
        .map_err(|e| Error::Numeric(format!("eigensolve failed: {e:?}")))?;
    let s = evd.S();
    Ok(s[0].abs().max(s[n - 1].abs()))
}

/// Exact spectral norms of X = aM² - bNᵀN (swap params) or
/// Y = cg·1 ⊙ N_ℓᵀN_ℓ - bNᵀN (crosstwirl params), for empirical study of
/// the open problem on sharper angle bounds.
pub fn open_question_norms(params: &ProtocolParams) -> Result<OpenQuestionNorms> {
    params.check_dense_cap()?;
    let cst = constants(params);
    if !cst.valid {
        return Err(Error::Domain("constants undefined for these parameters".into()));
    }
    let n_mat = build_n(params)?;
    let ntn = n_mat.transpose() * &n_mat;
    let b_lin = cst.b.value();
    match params.kind {
        ProtocolKind::Swap => {
            let m_mat = build_m(params)?;
            let a_lin = cst.a.value();
            let x = &m_mat * &m_mat * faer::Scale(a_lin) - &ntn * faer::Scale(b_lin);
            Ok(OpenQuestionNorms {
                norm_x: Some(spectral_norm_sym(&x)?),
                norm_y: None,
                norm_d: None,
                norm_k: None,
            })
        }
        _ => {
            let n_ell = build_n_ell(params)?;
            let nltn = n_ell.transpose() * &n_ell;
            let cg = cst.c.mul(cst.g).value();
            let n = ntn.nrows();
            let y = Mat::<f64>::from_fn(n, n, |i, j| {
                let diag = if i == j { cg * nltn[(i, i)] } else { 0.0 };
                diag - b_lin * ntn[(i, j)]
            });
            // D: diagonal of Y; K: off-diagonal part of bNᵀN (Y = D - K)
            let d = Mat::<f64>::from_fn(n, n, |i, j| if i == j { y[(i, i)] } else { 0.0 });
            let kmat =
                Mat::<f64>::from_fn(n, n, |i, j| if i == j { 0.0 } else { b_lin * ntn[(i, j)] });
            Ok(OpenQuestionNorms {
                norm_x: None,
                norm_y: Some(spectral_norm_sym(&y)?),
                norm_d: Some(spectral_norm_sym(&d)?),
                norm_k: Some(spectral_norm_sym(&kmat)?),
            })
        }
    }
}

/// CSV dump (header row of flattened tuple indices) for protocol matrices.
pub fn matrix_to_csv(m: &Mat<f64>) -> String {
    let mut out = String::new();
    out.push_str("row");
    for j in 0..m.ncols() {
        out.push_str(&format!(",{j}"));
    }
    out.push('\n');
    for i in 0..m.nrows() {
        out.push_str(&format!("{i}"));
        for j in 0..m.ncols() {
            out.push_str(&format!(",{:e}", m[(i, j)]));
        }
        out.push('\n');
    }
    out
}
