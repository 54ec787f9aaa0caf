//! Shared feed-forward machinery for the actor and the critic.
//!
//! A `MoeNet` is a router over `n_experts` two-layer ReLU experts whose
//! 32-wide features are fused by renormalized top-k gate weights into a
//! trunk, followed by a shared linear head (`Features` fusion), or whose
//! per-expert affine outputs are fused directly (`Means` fusion). The MLP
//! baseline is the degenerate case: no router, a single always-selected
//! expert. Backward passes are exact reverse-mode differentiation of the
//! executed graph; the discrete top-k selection is treated as constant.

use rand::Rng;
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use super::init::orthogonal;
use super::params::{ParamGroup, ParamStore};
use crate::error::NnetError;

/// Network family, shared by actor and critic.
#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum NetKind {
    Mlp,
    Moe,
    Smoe,
    Pemamoe,
}

impl NetKind {
    pub const ALL: [NetKind; 4] = [NetKind::Mlp, NetKind::Moe, NetKind::Smoe, NetKind::Pemamoe];

    pub fn name(self) -> &'static str {
        match self {
            NetKind::Mlp => "mlp",
            NetKind::Moe => "moe",
            NetKind::Smoe => "smoe",
            NetKind::Pemamoe => "pemamoe",
        }
    }

    pub fn parse(s: &str) -> Option<Self> {
        match s {
            "mlp" => Some(NetKind::Mlp),
            "moe" => Some(NetKind::Moe),
            "smoe" => Some(NetKind::Smoe),
            "pemamoe" => Some(NetKind::Pemamoe),
            _ => None,
        }
    }
}

/// How expert outputs are combined.
#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum FusionMode {
    /// Fuse 32-wide expert features, then apply a shared linear head.
    Features,
    /// Each expert maps the input straight to the output; fuse the outputs.
    Means,
}

/// Structural configuration of one network (actor or critic).
#[derive(Debug, Clone, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct NetConfig {
    pub kind: NetKind,
    pub input_dim: usize,
    pub n_experts: usize,
    pub top_k: usize,
    pub hidden: usize,
    pub out_dim: usize,
    pub gate_noise: bool,
    pub fusion: FusionMode,
    pub head_gain: f64,
}

impl NetConfig {
    /// Actor-side configuration for a network family.
    pub fn actor(kind: NetKind, obs_dim: usize, action_dim: usize, n_experts: usize, hidden: usize) -> Self {
        let (n_experts, top_k, gate_noise) = match kind {
            NetKind::Mlp => (1, 1, false),
            NetKind::Moe => (n_experts, n_experts, false),
            NetKind::Smoe | NetKind::Pemamoe => (n_experts, 1, true),
        };
        Self {
            kind,
            input_dim: obs_dim,
            n_experts,
            top_k,
            hidden,
            out_dim: action_dim,
            gate_noise,
            fusion: FusionMode::Features,
            head_gain: 0.01,
        }
    }

    /// Critic-side configuration: same routing structure, scalar head, no
    /// gate noise (values stay deterministic).
    pub fn critic(kind: NetKind, state_dim: usize, n_experts: usize, hidden: usize) -> Self {
        let (n_experts, top_k) = match kind {
            NetKind::Mlp => (1, 1),
            NetKind::Moe => (n_experts, n_experts),
            NetKind::Smoe | NetKind::Pemamoe => (n_experts, 1),
        };
        Self {
            kind,
            input_dim: state_dim,
            n_experts,
            top_k,
            hidden,
            out_dim: 1,
            gate_noise: false,
            fusion: FusionMode::Features,
            head_gain: 1.0,
        }
    }

    pub fn has_router(&self) -> bool {
        self.kind != NetKind::Mlp
    }

    fn validate(&self) -> Result<(), NnetError> {
        if self.n_experts == 0 || self.top_k == 0 || self.top_k > self.n_experts {
            return Err(NnetError::BadCheckpoint(format!(
                "invalid routing: top_k={} over {} experts",
                self.top_k, self.n_experts
            )));
        }
        Ok(())
    }
}

/// Which group tags a net assigns to its tensors.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum GroupScheme {
    Actor,
    Critic,
}

impl GroupScheme {
    fn router(self) -> ParamGroup {
        match self {
            GroupScheme::Actor => ParamGroup::Router,
            GroupScheme::Critic => ParamGroup::Critic,
        }
    }

    fn expert(self, j: usize) -> ParamGroup {
        match self {
            GroupScheme::Actor => ParamGroup::Expert(j),
            GroupScheme::Critic => ParamGroup::Critic,
        }
    }

    fn head(self) -> ParamGroup {
        match self {
            GroupScheme::Actor => ParamGroup::Head,
            GroupScheme::Critic => ParamGroup::Critic,
        }
    }
}

/// Resolved location of one tensor in the flat store.
#[derive(Debug, Clone, Copy)]
pub(crate) struct Tensor {
    pub off: usize,
    pub len: usize,
}

#[derive(Debug, Clone)]
struct ExpertLayout {
    w1: Tensor,
    b1: Tensor,
    w2: Tensor,
    b2: Tensor,
}

#[derive(Debug, Clone)]
struct MeansExpertLayout {
    wm: Tensor,
    bm: Tensor,
}

/// A router-plus-experts network bound to offsets in a `ParamStore`.
#[derive(Debug, Clone)]
pub struct MoeNet {
    prefix: String,
    pub cfg: NetConfig,
    router_w: Option<Tensor>,
    router_b: Option<Tensor>,
    noise_w: Option<Tensor>,
    noise_b: Option<Tensor>,
    experts: Vec<ExpertLayout>,
    means_experts: Vec<MeansExpertLayout>,
    head_w: Option<Tensor>,
    head_b: Option<Tensor>,
}

fn tensor(store: &ParamStore, name: &str) -> Result<Tensor, NnetError> {
    let e = store.entry(name)?;
    Ok(Tensor { off: e.offset, len: e.len })
}

/// Numerically stable softplus.
fn softplus(x: f64) -> f64 {
    if x > 30.0 {
        x
    } else if x < -30.0 {
        x.exp()
    } else {
        x.exp().ln_1p()
    }
}

impl MoeNet {
    /// Register freshly initialized parameters and bind their offsets.
    pub fn register(
        prefix: &str,
        cfg: NetConfig,
        scheme: GroupScheme,
        store: &mut ParamStore,
        rng: &mut ChaCha8Rng,
    ) -> Result<Self, NnetError> {
        cfg.validate()?;
        let (ind, h, e, out) = (cfg.input_dim, cfg.hidden, cfg.n_experts, cfg.out_dim);
        if cfg.has_router() {
            store.register(
                &format!("{prefix}.router.w"),
                &[e, ind],
                scheme.router(),
                orthogonal(e, ind, 1.0, rng),
            )?;
            store.register(&format!("{prefix}.router.b"), &[e], scheme.router(), vec![0.0; e])?;
            if cfg.gate_noise {
                // Zero init: the softplus gives a constant ln(2) noise scale.
                store.register(
                    &format!("{prefix}.noise.w"),
                    &[e, ind],
                    scheme.router(),
                    vec![0.0; e * ind],
                )?;
                store.register(&format!("{prefix}.noise.b"), &[e], scheme.router(), vec![0.0; e])?;
            }
        }
        match cfg.fusion {
            FusionMode::Features => {
                for j in 0..e {
                    store.register(
                        &format!("{prefix}.expert{j}.w1"),
                        &[h, ind],
                        scheme.expert(j),
                        orthogonal(h, ind, std::f64::consts::SQRT_2, rng),
                    )?;
                    store.register(&format!("{prefix}.expert{j}.b1"), &[h], scheme.expert(j), vec![0.0; h])?;
                    store.register(
                        &format!("{prefix}.expert{j}.w2"),
                        &[h, h],
                        scheme.expert(j),
                        orthogonal(h, h, std::f64::consts::SQRT_2, rng),
                    )?;
                    store.register(&format!("{prefix}.expert{j}.b2"), &[h], scheme.expert(j), vec![0.0; h])?;
                }
                store.register(
                    &format!("{prefix}.head.w"),
                    &[out, h],
                    scheme.head(),
                    orthogonal(out, h, cfg.head_gain, rng),
                )?;
                store.register(&format!("{prefix}.head.b"), &[out], scheme.head(), vec![0.0; out])?;
            }
            FusionMode::Means => {
                for j in 0..e {
                    store.register(
                        &format!("{prefix}.expert{j}.wm"),
                        &[out, ind],
                        scheme.expert(j),
                        orthogonal(out, ind, cfg.head_gain, rng),
                    )?;
                    store.register(&format!("{prefix}.expert{j}.bm"), &[out], scheme.expert(j), vec![0.0; out])?;
                }
            }
        }
        Self::attach(prefix, cfg, store)
    }

    /// Bind to parameters already present in the store (e.g. a checkpoint).
    pub fn attach(prefix: &str, cfg: NetConfig, store: &ParamStore) -> Result<Self, NnetError> {
        cfg.validate()?;
        let has_router = cfg.has_router();
        let mut experts = Vec::new();
        let mut means_experts = Vec::new();
        match cfg.fusion {
            FusionMode::Features => {
                for j in 0..cfg.n_experts {
                    experts.push(ExpertLayout {
                        w1: tensor(store, &format!("{prefix}.expert{j}.w1"))?,
                        b1: tensor(store, &format!("{prefix}.expert{j}.b1"))?,
                        w2: tensor(store, &format!("{prefix}.expert{j}.w2"))?,
                        b2: tensor(store, &format!("{prefix}.expert{j}.b2"))?,
                    });
                }
            }
            FusionMode::Means => {
                for j in 0..cfg.n_experts {
                    means_experts.push(MeansExpertLayout {
                        wm: tensor(store, &format!("{prefix}.expert{j}.wm"))?,
                        bm: tensor(store, &format!("{prefix}.expert{j}.bm"))?,
                    });
                }
            }
        }
        Ok(Self {
            prefix: prefix.to_string(),
            router_w: has_router.then(|| tensor(store, &format!("{prefix}.router.w"))).transpose()?,
            router_b: has_router.then(|| tensor(store, &format!("{prefix}.router.b"))).transpose()?,
            noise_w: (has_router && cfg.gate_noise)
                .then(|| tensor(store, &format!("{prefix}.noise.w")))
                .transpose()?,
            noise_b: (has_router && cfg.gate_noise)
                .then(|| tensor(store, &format!("{prefix}.noise.b")))
                .transpose()?,
            head_w: matches!(cfg.fusion, FusionMode::Features)
                .then(|| tensor(store, &format!("{prefix}.head.w")))
                .transpose()?,
            head_b: matches!(cfg.fusion, FusionMode::Features)
                .then(|| tensor(store, &format!("{prefix}.head.b")))
                .transpose()?,
            experts,
            means_experts,
            cfg,
        })
    }

    pub fn prefix(&self) -> &str {
        &self.prefix
    }
}

/// Cached intermediates of one forward pass, consumed by `backward`.
#[derive(Debug, Clone)]
pub struct NetCache {
    x: Vec<f64>,
    gate: Vec<f64>,
    selected: Vec<usize>,
    mixw_sel: Vec<f64>,
    tau: f64,
    h1_pre: Vec<Vec<f64>>,
    h1: Vec<Vec<f64>>,
    h2_pre: Vec<Vec<f64>>,
    feat: Vec<Vec<f64>>,
    mu_j: Vec<Vec<f64>>,
    trunk: Vec<f64>,
    macs: u64,
    consumed: bool,
}

impl NetCache {
    pub fn selected(&self) -> &[usize] {
        &self.selected
    }

    pub fn gate(&self) -> &[f64] {
        &self.gate
    }

    /// Mix weight of the idx-th selected expert.
    pub fn mixw_sel_at(&self, idx: usize) -> f64 {
        self.mixw_sel[idx]
    }

    /// Multiply-accumulate count of the forward pass.
    pub fn macs(&self) -> u64 {
        self.macs
    }
}

fn affine(data: &[f64], w: Tensor, b: Tensor, x: &[f64], out_dim: usize) -> Vec<f64> {
    let in_dim = x.len();
    let w = &data[w.off..w.off + w.len];
    let b = &data[b.off..b.off + b.len];
    let mut y = Vec::with_capacity(out_dim);
    for o in 0..out_dim {
        let row = &w[o * in_dim..(o + 1) * in_dim];
        let mut acc = b[o];
        for (wi, xi) in row.iter().zip(x) {
            acc += wi * xi;
        }
        y.push(acc);
    }
    y
}

/// Accumulate dW += d_y (x) x, db += d_y, and return d_x = W^T d_y.
fn affine_backward(
    data: &[f64],
    grads: &mut [f64],
    w: Tensor,
    b: Tensor,
    x: &[f64],
    d_y: &[f64],
    want_dx: bool,
) -> Vec<f64> {
    let in_dim = x.len();
    let out_dim = d_y.len();
    let wv = &data[w.off..w.off + w.len];
    let mut d_x = if want_dx { vec![0.0; in_dim] } else { Vec::new() };
    for o in 0..out_dim {
        let dy = d_y[o];
        if dy == 0.0 {
            continue;
        }
        let grow = &mut grads[w.off + o * in_dim..w.off + (o + 1) * in_dim];
        for (g, xi) in grow.iter_mut().zip(x) {
            *g += dy * xi;
        }
        grads[b.off + o] += dy;
        if want_dx {
            let wrow = &wv[o * in_dim..(o + 1) * in_dim];
            for (dx, wi) in d_x.iter_mut().zip(wrow) {
                *dx += dy * wi;
            }
        }
    }
    d_x
}

/// Top-k indices by gate value, ties broken toward the lower index; the
/// returned set is sorted ascending.
fn top_k_indices(gate: &[f64], k: usize) -> Vec<usize> {
    let mut order: Vec<usize> = (0..gate.len()).collect();
    order.sort_by(|&a, &b| {
        gate[b].partial_cmp(&gate[a]).expect("finite gates").then(a.cmp(&b))
    });
    let mut sel: Vec<usize> = order.into_iter().take(k).collect();
    sel.sort_unstable();
    sel
}

impl MoeNet {
    /// Router pass: gate probabilities, selected experts, renormalized mix
    /// weights (aligned with `selected`). With gate noise enabled and an RNG
    /// supplied, softplus-scaled Gaussian noise perturbs the logits before
    /// the temperature softmax (exploration only; never differentiated).
    pub fn route(
        &self,
        data: &[f64],
        x: &[f64],
        tau: f64,
        mut rng: Option<&mut ChaCha8Rng>,
        macs: &mut u64,
    ) -> (Vec<f64>, Vec<usize>, Vec<f64>) {
        let e = self.cfg.n_experts;
        if !self.cfg.has_router() {
            return (Vec::new(), vec![0], vec![1.0]);
        }
        let mut z = affine(
            data,
            self.router_w.expect("router bound"),
            self.router_b.expect("router bound"),
            x,
            e,
        );
        *macs += (e * x.len()) as u64;
        if self.cfg.gate_noise {
            if let Some(rng) = rng.as_deref_mut() {
                let scale = affine(
                    data,
                    self.noise_w.expect("noise net bound"),
                    self.noise_b.expect("noise net bound"),
                    x,
                    e,
                );
                *macs += (e * x.len()) as u64;
                for (zi, s) in z.iter_mut().zip(&scale) {
                    let xi: f64 = rng.sample(StandardNormal);
                    *zi += softplus(*s) * xi;
                }
            }
        }
        // Temperature softmax, max-shifted for stability.
        let m = z.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
        let mut gate: Vec<f64> = z.iter().map(|zi| ((zi - m) / tau).exp()).collect();
        let sum: f64 = gate.iter().sum();
        for g in gate.iter_mut() {
            *g /= sum;
        }
        let selected = top_k_indices(&gate, self.cfg.top_k);
        let ssum: f64 = selected.iter().map(|&j| gate[j]).sum();
        let mixw_sel: Vec<f64> = selected.iter().map(|&j| gate[j] / ssum).collect();
        (gate, selected, mixw_sel)
    }

    /// Full forward pass. Returns the output vector and the cache needed by
    /// `backward`. Gate noise is drawn only when `rng` is supplied.
    pub fn forward(
        &self,
        data: &[f64],
        x: &[f64],
        tau: f64,
        rng: Option<&mut ChaCha8Rng>,
    ) -> (Vec<f64>, NetCache) {
        let mut macs = 0u64;
        let (gate, selected, mixw_sel) = self.route(data, x, tau, rng, &mut macs);
        let mut cache = NetCache {
            x: x.to_vec(),
            gate,
            selected,
            mixw_sel,
            tau,
            h1_pre: Vec::new(),
            h1: Vec::new(),
            h2_pre: Vec::new(),
            feat: Vec::new(),
            mu_j: Vec::new(),
            trunk: Vec::new(),
            macs,
            consumed: false,
        };
        let out = match self.cfg.fusion {
            FusionMode::Features => {
                let h = self.cfg.hidden;
                let mut trunk = vec![0.0; h];
                for (idx, &j) in cache.selected.iter().enumerate() {
                    let ex = &self.experts[j];
                    let h1_pre = affine(data, ex.w1, ex.b1, x, h);
                    let h1: Vec<f64> = h1_pre.iter().map(|v| v.max(0.0)).collect();
                    let h2_pre = affine(data, ex.w2, ex.b2, &h1, h);
                    let feat: Vec<f64> = h2_pre.iter().map(|v| v.max(0.0)).collect();
                    cache.macs += (h * x.len() + h * h) as u64;
                    let w = cache.mixw_sel[idx];
                    for (t, f) in trunk.iter_mut().zip(&feat) {
                        *t += w * f;
                    }
                    cache.h1_pre.push(h1_pre);
                    cache.h1.push(h1);
                    cache.h2_pre.push(h2_pre);
                    cache.feat.push(feat);
                }
                let out = affine(
                    data,
                    self.head_w.expect("head bound"),
                    self.head_b.expect("head bound"),
                    &trunk,
                    self.cfg.out_dim,
                );
                cache.macs += (self.cfg.out_dim * h) as u64;
                cache.trunk = trunk;
                out
            }
            FusionMode::Means => {
                let mut out = vec![0.0; self.cfg.out_dim];
                for (idx, &j) in cache.selected.iter().enumerate() {
                    let ex = &self.means_experts[j];
                    let mu = affine(data, ex.wm, ex.bm, x, self.cfg.out_dim);
                    cache.macs += (self.cfg.out_dim * x.len()) as u64;
                    let w = cache.mixw_sel[idx];
                    for (o, m) in out.iter_mut().zip(&mu) {
                        *o += w * m;
                    }
                    cache.mu_j.push(mu);
                }
                out
            }
        };
        (out, cache)
    }

    /// Forward pass with a forced expert selection and uniform-renormalized
    /// gate weights over it. Diagnostics and tests only.
    pub fn forward_routed(&self, data: &[f64], x: &[f64], selected: &[usize]) -> Vec<f64> {
        assert!(matches!(self.cfg.fusion, FusionMode::Features));
        let h = self.cfg.hidden;
        let w = 1.0 / selected.len() as f64;
        let mut trunk = vec![0.0; h];
        for &j in selected {
            let f = self.expert_features(data, x, j).2;
            for (t, fi) in trunk.iter_mut().zip(&f) {
                *t += w * fi;
            }
        }
        affine(
            data,
            self.head_w.expect("head bound"),
            self.head_b.expect("head bound"),
            &trunk,
            self.cfg.out_dim,
        )
    }

    /// Pre-activations and features of a single expert: (h1_pre, h2_pre,
    /// features). Used by plasticity diagnostics.
    pub fn expert_features(&self, data: &[f64], x: &[f64], j: usize) -> (Vec<f64>, Vec<f64>, Vec<f64>) {
        assert!(matches!(self.cfg.fusion, FusionMode::Features));
        let h = self.cfg.hidden;
        let ex = &self.experts[j];
        let h1_pre = affine(data, ex.w1, ex.b1, x, h);
        let h1: Vec<f64> = h1_pre.iter().map(|v| v.max(0.0)).collect();
        let h2_pre = affine(data, ex.w2, ex.b2, &h1, h);
        let feat: Vec<f64> = h2_pre.iter().map(|v| v.max(0.0)).collect();
        (h1_pre, h2_pre, feat)
    }

    /// Exact reverse pass for one cached forward; accumulates into `grads`.
    ///
    /// Gradients flow through the head, the selected experts, the mix
    /// weights, and the router softmax. The cache is consumed: a second call
    /// errors.
    pub fn backward(
        &self,
        data: &[f64],
        cache: &mut NetCache,
        d_out: &[f64],
        grads: &mut [f64],
    ) -> Result<(), NnetError> {
        if cache.consumed {
            return Err(NnetError::GraphConsumed);
        }
        cache.consumed = true;
        assert_eq!(d_out.len(), self.cfg.out_dim);

        // d wrt the mix weights, aligned with cache.selected.
        let mut d_mixw = vec![0.0; cache.selected.len()];

        match self.cfg.fusion {
            FusionMode::Features => {
                let d_trunk = affine_backward(
                    data,
                    grads,
                    self.head_w.expect("head bound"),
                    self.head_b.expect("head bound"),
                    &cache.trunk,
                    d_out,
                    true,
                );
                for (idx, &j) in cache.selected.iter().enumerate() {
                    let ex = &self.experts[j];
                    let w = cache.mixw_sel[idx];
                    d_mixw[idx] =
                        cache.feat[idx].iter().zip(&d_trunk).map(|(f, d)| f * d).sum();
                    let d_h2_pre: Vec<f64> = cache.h2_pre[idx]
                        .iter()
                        .zip(&d_trunk)
                        .map(|(pre, d)| if *pre > 0.0 { w * d } else { 0.0 })
                        .collect();
                    let d_h1 = affine_backward(
                        data, grads, ex.w2, ex.b2, &cache.h1[idx], &d_h2_pre, true,
                    );
                    let d_h1_pre: Vec<f64> = cache.h1_pre[idx]
                        .iter()
                        .zip(&d_h1)
                        .map(|(pre, d)| if *pre > 0.0 { *d } else { 0.0 })
                        .collect();
                    affine_backward(data, grads, ex.w1, ex.b1, &cache.x, &d_h1_pre, false);
                }
            }
            FusionMode::Means => {
                for (idx, &j) in cache.selected.iter().enumerate() {
                    let ex = &self.means_experts[j];
                    let w = cache.mixw_sel[idx];
                    d_mixw[idx] = cache.mu_j[idx].iter().zip(d_out).map(|(m, d)| m * d).sum();
                    let d_mu: Vec<f64> = d_out.iter().map(|d| w * d).collect();
                    affine_backward(data, grads, ex.wm, ex.bm, &cache.x, &d_mu, false);
                }
            }
        }

        if !self.cfg.has_router() {
            return Ok(());
        }

        // Renormalized mixing: w_j = g_j / sum_sel g.
        let ssum: f64 = cache.selected.iter().map(|&j| cache.gate[j]).sum();
        let dot: f64 = d_mixw
            .iter()
            .zip(cache.selected.iter())
            .map(|(d, &j)| d * cache.gate[j])
            .sum();
        let mut d_gate = vec![0.0; self.cfg.n_experts];
        for (idx, &j) in cache.selected.iter().enumerate() {
            d_gate[j] = d_mixw[idx] / ssum - dot / (ssum * ssum);
        }

        // Temperature softmax jacobian. The gate values already encode the
        // realized logits (including any exploration noise), and noise is
        // additive in the router output, so router gradients stay exact.
        let gdot: f64 = d_gate.iter().zip(&cache.gate).map(|(d, g)| d * g).sum();
        let d_z: Vec<f64> = cache
            .gate
            .iter()
            .zip(&d_gate)
            .map(|(g, d)| g * (d - gdot) / cache.tau)
            .collect();
        affine_backward(
            data,
            grads,
            self.router_w.expect("router bound"),
            self.router_b.expect("router bound"),
            &cache.x,
            &d_z,
            false,
        );
        Ok(())
    }
}
