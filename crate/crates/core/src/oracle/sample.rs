//! Monte Carlo replacement of exact twirls by empirical Haar averages.

use faer::c64;
use faer::Mat;
use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha12Rng;
use rand_distr::StandardNormal;

use crate::{Error, Result};

use super::channel::{ProtocolChannel, SiteLayout};
use super::twirl::TwirlOp;

/// Haar-random unitary of the given dimension: QR of a complex Gaussian
/// matrix with the R-diagonal phases absorbed into Q.
pub fn sample_haar_unitary(dim: usize, rng: &mut impl Rng) -> Mat<c64> {
    let g = Mat::<c64>::from_fn(dim, dim, |_, _| {
        let re: f64 = rng.sample(StandardNormal);
        let im: f64 = rng.sample(StandardNormal);
        c64::new(re / 2f64.sqrt(), im / 2f64.sqrt())
    });
    let qr = g.qr();
    let q = qr.compute_Q();
    let r = qr.R().to_owned();
    Mat::<c64>::from_fn(dim, dim, |i, j| {
        let rj = r[(j, j)];
        let phase = rj / c64::new(rj.norm(), 0.0);
        q[(i, j)] * phase
    })
}

enum SampledLayer {
    /// Empirical twirl: average of U^{⊗k}·(·)·U^{⊗k}† over fresh samples.
    Twirl { op: TwirlOp, layer_idx: u64, per_copy_dim: usize },
    /// Exact swap conjugation (a basis permutation).
    Swap { perm: Vec<u32> },
}

/// A channel whose twirl layers are replaced by empirical averages over
/// `n_samples` Haar unitaries each. Sample i of layer l draws from the
/// ChaCha substream `l·2^40 + i` of the seed, so results are bit-identical
/// for a fixed (seed, n_samples) regardless of evaluation order.
pub struct SampledChannel {
    pub layout: SiteLayout,
    pub n_samples: u64,
    pub seed: u64,
    layers: Vec<SampledLayer>,
}

impl SampledChannel {
    pub fn from_channel(ch: &ProtocolChannel, n_samples: u64, seed: u64) -> Result<SampledChannel> {
        if n_samples == 0 {
            return Err(Error::Domain("need n_samples >= 1".into()));
        }
        let mut layers = Vec::new();
        for (idx, support) in ch.layer_supports().into_iter().enumerate() {
            match support {
                Some(sites) => {
                    let op = TwirlOp::new(&ch.layout, &sites)?;
                    let per_copy_dim: u64 =
                        sites.iter().map(|&t| ch.layout.site_dims[t]).product();
                    layers.push(SampledLayer::Twirl {
                        op,
                        layer_idx: idx as u64,
                        per_copy_dim: per_copy_dim as usize,
                    });
                }
                None => {
                    let sw = ch.swap_at(idx).expect("non-twirl layer is a swap");
                    layers.push(SampledLayer::Swap { perm: sw.basis_perm().to_vec() });
                }
            }
        }
        Ok(SampledChannel { layout: ch.layout.clone(), n_samples, seed, layers })
    }

    fn rng_for(&self, layer_idx: u64, sample: u64) -> ChaCha12Rng {
        let mut rng = ChaCha12Rng::seed_from_u64(self.seed);
        rng.set_stream((layer_idx << 40) | sample);
        rng
    }

    /// Applies the sampled channel to a complex operator.
    pub fn apply(&self, m: &Mat<c64>) -> Mat<c64> {
        let n = self.layout.total_dim();
        let mut cur = m.to_owned();
        for layer in &self.layers {
            match layer {
                SampledLayer::Swap { perm } => {
                    cur = Mat::<c64>::from_fn(n, n, |i, j| {
                        cur[(perm[i] as usize, perm[j] as usize)]
                    });
                }
                SampledLayer::Twirl { op, layer_idx, per_copy_dim } => {
                    let (combine, n_sup, n_rest) = op.index_data();
                    let k = self.layout.k;
                    let mut acc = Mat::<c64>::zeros(n, n);
                    for i in 0..self.n_samples {
                        let mut rng = self.rng_for(*layer_idx, i);
                        let u = sample_haar_unitary(*per_copy_dim, &mut rng);
                        let uk = kron_power(&u, k);
                        conjugate_on_support(&mut acc, &cur, &uk, combine, n_sup, n_rest);
                    }
                    let scale = c64::new(1.0 / self.n_samples as f64, 0.0);
                    cur = Mat::<c64>::from_fn(n, n, |i, j| acc[(i, j)] * scale);
                }
            }
        }
        cur
    }

    /// Dense Choi matrix by applying the channel to every basis operator.
    /// Row index is x·N + i for J[(x,i),(y,j)] = Φ(E_ij)[x,y].
    pub fn choi(&self) -> Mat<c64> {
        let n = self.layout.total_dim();
        let nn = n * n;
        let mut j = Mat::<c64>::zeros(nn, nn);
        for col in 0..nn {
            let (bi, bj) = (col / n, col % n);
            let mut e = Mat::<c64>::zeros(n, n);
            e[(bi, bj)] = c64::new(1.0, 0.0);
            let out = self.apply(&e);
            for x in 0..n {
                for y in 0..n {
                    j[(x * n + bi, y * n + bj)] = out[(x, y)];
                }
            }
        }
        j
    }
}

/// U^{⊗k} as a dense matrix.
fn kron_power(u: &Mat<c64>, k: usize) -> Mat<c64> {
    let d = u.nrows();
    let mut out = Mat::<c64>::from_fn(1, 1, |_, _| c64::new(1.0, 0.0));
    for _ in 0..k {
        let n0 = out.nrows();
        out = Mat::<c64>::from_fn(n0 * d, n0 * d, |i, j| {
            out[(i / d, j / d)] * u[(i % d, j % d)]
        });
    }
    out
}

/// acc += (W ⊗ 1_rest)·M·(W ⊗ 1_rest)† where W acts on the supported part
/// through the (a, r) index split.
fn conjugate_on_support(
    acc: &mut Mat<c64>,
    m: &Mat<c64>,
    w: &Mat<c64>,
    combine: &[u32],
    n_sup: usize,
    n_rest: usize,
) {
    // tmp[(a,r),(b',r')] = Σ_{a'} W[a,a'] M[(a',r),(b',r')]
    let n = m.nrows();
    let mut tmp = Mat::<c64>::zeros(n, n);
    for a in 0..n_sup {
        for r in 0..n_rest {
            let row_out = combine[a * n_rest + r] as usize;
            for ap in 0..n_sup {
                let wval = w[(a, ap)];
                if wval == c64::new(0.0, 0.0) {
                    continue;
                }
                let row_in = combine[ap * n_rest + r] as usize;
                for col in 0..n {
                    tmp[(row_out, col)] += wval * m[(row_in, col)];
                }
            }
        }
    }
    // acc[(a,r),(b,r')] += Σ_{b'} tmp[(a,r),(b',r')] conj(W[b,b'])
    for b in 0..n_sup {
        for rp in 0..n_rest {
            let col_out = combine[b * n_rest + rp] as usize;
            for bp in 0..n_sup {
                let wconj = w[(b, bp)].conj();
                if wconj == c64::new(0.0, 0.0) {
                    continue;
                }
                let col_in = combine[bp * n_rest + rp] as usize;
                for row in 0..n {
                    acc[(row, col_out)] += tmp[(row, col_in)] * wconj;
                }
            }
        }
    }
}
