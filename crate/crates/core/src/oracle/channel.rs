//! Protocol channels as ordered layer lists over a fixed site layout.

use faer::Mat;

use crate::angle::{ProtocolKind, ProtocolParams};
use crate::{Error, Result};

use super::twirl::{SwapOp, TwirlOp};

/// Site layout of one copy of the system plus the copy count. The global
/// Hilbert space is the k-fold tensor power, with copy-major axis order.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SiteLayout {
    pub site_dims: Vec<u64>,
    pub k: usize,
}

impl SiteLayout {
    pub fn new(site_dims: Vec<u64>, k: usize) -> Result<SiteLayout> {
        if site_dims.is_empty() || site_dims.iter().any(|&d| d < 2) {
            return Err(Error::Domain("need at least one site of dimension >= 2".into()));
        }
        if k == 0 {
            return Err(Error::Domain("k must be >= 1".into()));
        }
        Ok(SiteLayout { site_dims, k })
    }

    /// Per-party layout for protocol parameters: party p contributes m_p
    /// sites of dimension q, in party order.
    pub fn for_params(params: &ProtocolParams) -> Result<SiteLayout> {
        let dims: Vec<u64> = params
            .parties
            .iter()
            .flat_map(|p| std::iter::repeat(params.q).take(p.m as usize))
            .collect();
        SiteLayout::new(dims, params.k)
    }

    pub fn total_dim(&self) -> usize {
        let per_copy: u64 = self.site_dims.iter().product();
        per_copy.pow(self.k as u32) as usize
    }
}

/// Site index ranges of each party within [`SiteLayout::for_params`].
fn party_sites(params: &ProtocolParams) -> Vec<Vec<usize>> {
    let mut out = Vec::with_capacity(params.num_parties());
    let mut next = 0usize;
    for p in &params.parties {
        out.push((next..next + p.m as usize).collect());
        next += p.m as usize;
    }
    out
}

/// The first ℓ_p sites of each party (the crosstwirled/swapped qudits).
fn ell_sites(params: &ProtocolParams) -> Vec<usize> {
    let mut out = Vec::new();
    let mut next = 0usize;
    for p in &params.parties {
        out.extend(next..next + p.ell as usize);
        next += p.m as usize;
    }
    out
}

enum Layer {
    Twirl(TwirlOp),
    Swap(SwapOp),
}

/// An ordered composition of twirl and swap layers. Layers apply in list
/// order; every layer is self-adjoint in the trace pairing, so the adjoint
/// channel is the reversed composition. Layers are reference-counted so
/// that repeated protocols reuse the precomputed twirl tables.
pub struct ProtocolChannel {
    pub layout: SiteLayout,
    layers: Vec<std::sync::Arc<Layer>>,
}

fn lift(l: Layer) -> std::sync::Arc<Layer> {
    std::sync::Arc::new(l)
}

impl ProtocolChannel {
    /// P = ⊗_p T_{A_p}: one twirl layer per party (disjoint supports).
    pub fn local_twirls(params: &ProtocolParams) -> Result<ProtocolChannel> {
        let layout = SiteLayout::for_params(params)?;
        let mut layers = Vec::new();
        for sites in party_sites(params) {
            layers.push(lift(Layer::Twirl(TwirlOp::new(&layout, &sites)?)));
        }
        Ok(ProtocolChannel { layout, layers })
    }

    /// The crosstwirl Q: a joint twirl over the first ℓ_p sites of every
    /// party.
    pub fn crosstwirl(params: &ProtocolParams) -> Result<ProtocolChannel> {
        let layout = SiteLayout::for_params(params)?;
        let support = ell_sites(params);
        let layers = vec![lift(Layer::Twirl(TwirlOp::new(&layout, &support)?))];
        Ok(ProtocolChannel { layout, layers })
    }

    /// The swapped projection Q_sw = SWAP_ℓ ∘ P ∘ SWAP_ℓ.
    pub fn swapped_twirl(params: &ProtocolParams) -> Result<ProtocolChannel> {
        if params.kind != ProtocolKind::Swap {
            return Err(Error::Domain("swapped_twirl needs swap params".into()));
        }
        let layout = SiteLayout::for_params(params)?;
        let (m, ell) = (params.parties[0].m as usize, params.parties[0].ell as usize);
        let pairs: Vec<(usize, usize)> = (0..ell).map(|t| (t, m + t)).collect();
        let swap = lift(Layer::Swap(SwapOp::new(&layout, &pairs)?));
        let mut layers = vec![std::sync::Arc::clone(&swap)];
        for sites in party_sites(params) {
            layers.push(lift(Layer::Twirl(TwirlOp::new(&layout, &sites)?)));
        }
        layers.push(swap);
        Ok(ProtocolChannel { layout, layers })
    }

    /// R = T over all sites: the full twirl.
    pub fn full_twirl(params: &ProtocolParams) -> Result<ProtocolChannel> {
        let layout = SiteLayout::for_params(params)?;
        let all: Vec<usize> = (0..layout.site_dims.len()).collect();
        let layers = vec![lift(Layer::Twirl(TwirlOp::new(&layout, &all)?))];
        Ok(ProtocolChannel { layout, layers })
    }

    /// A single twirl over an arbitrary site subset of an explicit layout.
    pub fn from_single_twirl(layout: SiteLayout, support: &[usize]) -> Result<ProtocolChannel> {
        let layers = vec![lift(Layer::Twirl(TwirlOp::new(&layout, support)?))];
        Ok(ProtocolChannel { layout, layers })
    }

    /// The projection Q of the parameter kind (swapped twirl or crosstwirl).
    pub fn q_projection(params: &ProtocolParams) -> Result<ProtocolChannel> {
        match params.kind {
            ProtocolKind::Swap => Self::swapped_twirl(params),
            _ => Self::crosstwirl(params),
        }
    }

    /// The single protocol round Q∘P (P first).
    pub fn protocol_round(params: &ProtocolParams) -> Result<ProtocolChannel> {
        Self::protocol_rounds(params, 1)
    }

    /// n repetitions of Q∘P, sharing the layer tables across rounds.
    pub fn protocol_rounds(params: &ProtocolParams, n: usize) -> Result<ProtocolChannel> {
        if n == 0 {
            return Err(Error::Domain("need n >= 1 rounds".into()));
        }
        let p = Self::local_twirls(params)?;
        let q = Self::q_projection(params)?;
        let layout = p.layout.clone();
        let round: Vec<std::sync::Arc<Layer>> =
            p.layers.iter().chain(q.layers.iter()).map(std::sync::Arc::clone).collect();
        let mut layers = Vec::with_capacity(round.len() * n);
        for _ in 0..n {
            layers.extend(round.iter().map(std::sync::Arc::clone));
        }
        Ok(ProtocolChannel { layout, layers })
    }

    /// The symmetric sandwich P∘Q∘P (trace-symmetric by construction).
    pub fn twirl_q_twirl(params: &ProtocolParams) -> Result<ProtocolChannel> {
        let p = Self::local_twirls(params)?;
        let q = Self::q_projection(params)?;
        let layout = p.layout.clone();
        let mut layers: Vec<std::sync::Arc<Layer>> =
            p.layers.iter().map(std::sync::Arc::clone).collect();
        layers.extend(q.layers);
        layers.extend(p.layers);
        Ok(ProtocolChannel { layout, layers })
    }

    /// n-fold composition of self (layer tables shared).
    pub fn repeat(self, n: usize) -> Result<ProtocolChannel> {
        if n == 0 {
            return Err(Error::Domain("need n >= 1 repetitions".into()));
        }
        let mut layers = Vec::with_capacity(self.layers.len() * n);
        for _ in 0..n {
            layers.extend(self.layers.iter().map(std::sync::Arc::clone));
        }
        Ok(ProtocolChannel { layout: self.layout, layers })
    }

    /// Applies the channel (layers in order).
    pub fn apply(&self, m: &Mat<f64>) -> Mat<f64> {
        let mut cur = m.to_owned();
        for l in &self.layers {
            cur = match l.as_ref() {
                Layer::Twirl(t) => t.apply(&cur),
                Layer::Swap(s) => s.apply(&cur),
            };
        }
        cur
    }

    /// Applies the adjoint channel (reverse layer order; each layer is
    /// self-adjoint).
    pub fn apply_adjoint(&self, m: &Mat<f64>) -> Mat<f64> {
        let mut cur = m.to_owned();
        for l in self.layers.iter().rev() {
            cur = match l.as_ref() {
                Layer::Twirl(t) => t.apply(&cur),
                Layer::Swap(s) => s.apply(&cur),
            };
        }
        cur
    }

    pub fn num_layers(&self) -> usize {
        self.layers.len()
    }

    /// Twirl supports of each layer, for the Haar sampler (None for swaps).
    pub(super) fn layer_supports(&self) -> Vec<Option<Vec<usize>>> {
        self.layers
            .iter()
            .map(|l| match l.as_ref() {
                Layer::Twirl(t) => Some(t.support.clone()),
                Layer::Swap(_) => None,
            })
            .collect()
    }

    pub(super) fn swap_at(&self, idx: usize) -> Option<&SwapOp> {
        match self.layers[idx].as_ref() {
            Layer::Swap(s) => Some(s),
            _ => None,
        }
    }
}
