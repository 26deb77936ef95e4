//! Exact Haar twirls and swap conjugations on the full Hilbert space.

use faer::Mat;

use crate::symgroup::{enumerate_group, Perm};
use crate::{Error, Result};

use super::channel::SiteLayout;

/// Hard cap on the global Hilbert dimension for exact twirl application.
pub const MAX_ORACLE_DIM: usize = 4096;
/// Degree cap for the oracle (k! partial traces per twirl application).
pub const MAX_ORACLE_K: usize = 3;

/// The exact k-fold Haar twirl over a subset of sites, acting on operators
/// of the full space. Precomputes the index bookkeeping and the Gram
/// pseudo-inverse once; each application is two passes of partial inner
/// products plus a k!×k! solve.
pub struct TwirlOp {
    pub support: Vec<usize>,
    kf: usize,
    n_sup: usize,
    n_rest: usize,
    /// (a, r) -> global index, as a·n_rest + r.
    combine: Vec<u32>,
    /// per permutation rank: a -> image of a under the copy permutation.
    perm_on_sup: Vec<Vec<u32>>,
    /// Pseudo-inverse of the k!×k! Gram at the supported dimension.
    gram_pinv: Mat<f64>,
    /// Rank of that Gram (k! iff |X| ≥ k).
    pub gram_rank: usize,
    inv_n_sup: f64,
}

/// Decomposes each global basis index into (supported, rest) parts.
///
/// Axis order of the global space is copy-major: all sites of copy 0, then
/// copy 1, and so on. The supported part `a` is itself copy-major over the
/// supported sites.
fn index_tables(layout: &SiteLayout, support: &[usize]) -> (Vec<u32>, Vec<u32>, Vec<u32>, usize, usize) {
    let n = layout.total_dim();
    let k = layout.k;
    let s = layout.site_dims.len();
    let sup_set: Vec<bool> = {
        let mut v = vec![false; s];
        for &t in support {
            v[t] = true;
        }
        v
    };
    // per-copy dims in axis order
    let mut n_sup = 1usize;
    let mut n_rest = 1usize;
    for _ in 0..k {
        for t in 0..s {
            let d = layout.site_dims[t] as usize;
            if sup_set[t] {
                n_sup *= d;
            } else {
                n_rest *= d;
            }
        }
    }
    let mut sup_of = vec![0u32; n];
    let mut rest_of = vec![0u32; n];
    let mut combine = vec![0u32; n];
    // axis list is copy-major with site order inside each copy
    let radices: Vec<usize> =
        (0..k).flat_map(|_| layout.site_dims.iter().map(|&d| d as usize)).collect();
    for i in 0..n {
        let mut digits = vec![0usize; radices.len()];
        let mut rem = i;
        for ax in (0..radices.len()).rev() {
            digits[ax] = rem % radices[ax];
            rem /= radices[ax];
        }
        let mut a = 0usize;
        let mut r = 0usize;
        for (axis, &digit) in digits.iter().enumerate() {
            let t = axis % s;
            if sup_set[t] {
                a = a * radices[axis] + digit;
            } else {
                r = r * radices[axis] + digit;
            }
        }
        sup_of[i] = a as u32;
        rest_of[i] = r as u32;
        combine[a * n_rest + r] = i as u32;
    }
    (sup_of, rest_of, combine, n_sup, n_rest)
}

impl TwirlOp {
    pub fn new(layout: &SiteLayout, support: &[usize]) -> Result<TwirlOp> {
        if support.is_empty() {
            return Err(Error::Domain("twirl support must be nonempty".into()));
        }
        let n = layout.total_dim();
        if n > MAX_ORACLE_DIM {
            return Err(Error::Capacity(format!(
                "global Hilbert dimension {n} exceeds oracle cap {MAX_ORACLE_DIM}"
            )));
        }
        if layout.k > MAX_ORACLE_K {
            return Err(Error::Capacity(format!(
                "k = {} exceeds oracle degree cap {MAX_ORACLE_K}",
                layout.k
            )));
        }
        let mut support = support.to_vec();
        support.sort_unstable();
        support.dedup();
        if support.iter().any(|&t| t >= layout.site_dims.len()) {
            return Err(Error::Domain("twirl support site out of range".into()));
        }
        let dim_sup: u64 = support.iter().map(|&t| layout.site_dims[t]).product();
        if dim_sup < 2 {
            return Err(Error::Domain("twirl support must have dimension >= 2".into()));
        }
        let (_sup_of, _rest_of, combine, n_sup, n_rest) = index_tables(layout, &support);

        let perms = enumerate_group(layout.k)?;
        let kf = perms.len();
        // action of φ(π) on supported multi-indices: digit blocks per copy
        // move from copy c to copy π(c)
        let sup_per_copy = n_sup_per_copy(n_sup, layout.k);
        let perm_on_sup: Vec<Vec<u32>> = perms
            .iter()
            .map(|p| permutation_on_copies(p, sup_per_copy, layout.k))
            .collect();

        // Gram and its pseudo-inverse at the supported per-copy dimension
        let g = crate::gram::gram_matrix(layout.k, dim_sup as f64)?;
        let (gram_pinv, gram_rank) = pinv_sym(&g.entries)?;

        Ok(TwirlOp {
            support,
            kf,
            n_sup,
            n_rest,
            combine,
            perm_on_sup,
            gram_pinv,
            gram_rank,
            inv_n_sup: 1.0 / n_sup as f64,
        })
    }

    /// Applies the twirl to a dense operator.
    pub fn apply(&self, m: &Mat<f64>) -> Mat<f64> {
        let n = m.nrows();
        let (ns, nr) = (self.n_sup, self.n_rest);
        // Y_τ[r, r'] = |X|^{-k} Σ_a M[(τ·a, r), (a, r')]
        let mut y = vec![Mat::<f64>::zeros(nr, nr); self.kf];
        for (t, yt) in y.iter_mut().enumerate() {
            let tperm = &self.perm_on_sup[t];
            for a in 0..ns {
                let ta = tperm[a] as usize;
                for r in 0..nr {
                    let row = self.combine[ta * nr + r] as usize;
                    for rp in 0..nr {
                        let col = self.combine[a * nr + rp] as usize;
                        yt[(r, rp)] += m[(row, col)];
                    }
                }
            }
            for r in 0..nr {
                for rp in 0..nr {
                    yt[(r, rp)] *= self.inv_n_sup;
                }
            }
        }
        // Z = G⁺ Y (k!-vector of rest-space blocks)
        let mut out = Mat::<f64>::zeros(n, n);
        for s in 0..self.kf {
            let mut z = Mat::<f64>::zeros(nr, nr);
            for t in 0..self.kf {
                let w = self.gram_pinv[(s, t)];
                if w != 0.0 {
                    for r in 0..nr {
                        for rp in 0..nr {
                            z[(r, rp)] += w * y[t][(r, rp)];
                        }
                    }
                }
            }
            // accumulate σ ⊗ Z_σ
            let sperm = &self.perm_on_sup[s];
            for b in 0..ns {
                let sb = sperm[b] as usize;
                for r in 0..nr {
                    let row = self.combine[sb * nr + r] as usize;
                    for rp in 0..nr {
                        let col = self.combine[b * nr + rp] as usize;
                        out[(row, col)] += z[(r, rp)];
                    }
                }
            }
        }
        out
    }

    /// Index data shared with the Haar sampler: (combine, n_sup, n_rest).
    pub(super) fn index_data(&self) -> (&[u32], usize, usize) {
        (&self.combine, self.n_sup, self.n_rest)
    }

}

fn n_sup_per_copy(n_sup: usize, k: usize) -> usize {
    let per = (n_sup as f64).powf(1.0 / k as f64).round() as usize;
    debug_assert_eq!(per.pow(k as u32), n_sup);
    per
}

/// Image table of the copy-permutation action on supported multi-indices:
/// the output digit of copy c is the input digit of copy π⁻¹(c).
fn permutation_on_copies(p: &Perm, per_copy: usize, k: usize) -> Vec<u32> {
    let n = per_copy.pow(k as u32);
    let pinv = p.inverse();
    (0..n)
        .map(|a| {
            // digits, copy 0 most significant
            let mut digits = vec![0usize; k];
            let mut rem = a;
            for c in (0..k).rev() {
                digits[c] = rem % per_copy;
                rem /= per_copy;
            }
            let mut out = 0usize;
            for c in 0..k {
                out = out * per_copy + digits[pinv.apply(c)];
            }
            out as u32
        })
        .collect()
}

fn pinv_sym(g: &Mat<f64>) -> Result<(Mat<f64>, usize)> {
    let n = g.nrows();
    let evd = g
        .self_adjoint_eigen(faer::Side::Lower)
        .map_err(|e| Error::Numeric(format!("gram eigensolve failed: {e:?}")))?;
    let s = evd.S();
    let u = evd.U();
    let cut = s[n - 1].max(0.0) * 1e-12;
    let mut rank = 0;
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

/// Conjugation by the ℓ-qudit exchange: in every copy, site pairs
/// (left[i], right[i]) swap their contents.
pub struct SwapOp {
    /// Global basis permutation: SWAP|x⟩ = |perm[x]⟩ (an involution).
    perm: Vec<u32>,
}

impl SwapOp {
    pub fn new(layout: &SiteLayout, pairs: &[(usize, usize)]) -> Result<SwapOp> {
        let n = layout.total_dim();
        if n > MAX_ORACLE_DIM {
            return Err(Error::Capacity(format!(
                "global Hilbert dimension {n} exceeds oracle cap {MAX_ORACLE_DIM}"
            )));
        }
        let s = layout.site_dims.len();
        for &(a, b) in pairs {
            if a >= s || b >= s || a == b {
                return Err(Error::Domain(format!("bad swap pair ({a}, {b})")));
            }
            if layout.site_dims[a] != layout.site_dims[b] {
                return Err(Error::Domain("swapped sites must have equal dimension".into()));
            }
        }
        // axis permutation on (copy, site) digits
        let mut site_map: Vec<usize> = (0..s).collect();
        for &(a, b) in pairs {
            site_map.swap(a, b);
        }
        let k = layout.k;
        let mut perm = vec![0u32; n];
        let radices: Vec<usize> =
            (0..k).flat_map(|_| layout.site_dims.iter().map(|&d| d as usize)).collect();
        for (i, pi) in perm.iter_mut().enumerate() {
            // digits of i, most significant first
            let mut digits = vec![0usize; radices.len()];
            let mut rem = i;
            for ax in (0..radices.len()).rev() {
                digits[ax] = rem % radices[ax];
                rem /= radices[ax];
            }
            // move digit of (c, site_map[t]) into (c, t)
            let mut out = 0usize;
            for c in 0..k {
                for t in 0..s {
                    let src = c * s + site_map[t];
                    out = out * radices[c * s + t] + digits[src];
                }
            }
            *pi = out as u32;
        }
        Ok(SwapOp { perm })
    }

    /// SWAP · M · SWAP (the swap is an involution, so this is conjugation).
    pub fn apply(&self, m: &Mat<f64>) -> Mat<f64> {
        let n = m.nrows();
        Mat::<f64>::from_fn(n, n, |i, j| {
            m[(self.perm[i] as usize, self.perm[j] as usize)]
        })
    }

    pub(super) fn basis_perm(&self) -> &[u32] {
        &self.perm
    }
}
