//! Shared-trunk actor-critic multilayer perceptron with hand-written
//! backpropagation.
//!
//! Two hidden ReLU layers feed a categorical logits head and a scalar value
//! head; optionally the value head reads a second trunk of the same shape.
//! Parameters live in one flat vector so the optimizer and the
//! checkpoint see a single buffer. Weight matrices are stored input-major
//! (`w[j * out + i]` connects input `j` to output `i`) so the forward pass is
//! a sequence of contiguous axpy updates.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
struct TrunkLayout {
    w1: usize,
    b1: usize,
    w2: usize,
    b2: usize,
    end: usize,
}

impl TrunkLayout {
    fn at(start: usize, input: usize, hidden: usize) -> Self {
        let w1 = start;
        let b1 = w1 + input * hidden;
        let w2 = b1 + hidden;
        let b2 = w2 + hidden * hidden;
        Self {
            w1,
            b1,
            w2,
            b2,
            end: b2 + hidden,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
struct Layout {
    trunk: TrunkLayout,
    wp: usize,
    bp: usize,
    /// Present when the value head has its own trunk.
    critic: Option<TrunkLayout>,
    wv: usize,
    bv: usize,
    len: usize,
}

impl Layout {
    fn new(input: usize, hidden: usize, actions: usize, separate_critic: bool) -> Self {
        let trunk = TrunkLayout::at(0, input, hidden);
        let wp = trunk.end;
        let bp = wp + hidden * actions;
        let mut next = bp + actions;
        let critic = separate_critic.then(|| {
            let c = TrunkLayout::at(next, input, hidden);
            next = c.end;
            c
        });
        let wv = next;
        let bv = wv + hidden;
        Self {
            trunk,
            wp,
            bp,
            critic,
            wv,
            bv,
            len: bv + 1,
        }
    }
}

/// Actor-critic MLP. By default both heads read one shared trunk; with
/// `separate_critic` the value head gets a trunk of its own.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PolicyNetwork {
    input: usize,
    hidden: usize,
    actions: usize,
    #[serde(default)]
    separate_critic: bool,
    params: Vec<f64>,
}

#[derive(Debug, Clone, Default)]
struct TrunkCache {
    z1: Vec<f64>,
    a1: Vec<f64>,
    z2: Vec<f64>,
    a2: Vec<f64>,
}

impl TrunkCache {
    fn new(hidden: usize) -> Self {
        Self {
            z1: vec![0.0; hidden],
            a1: vec![0.0; hidden],
            z2: vec![0.0; hidden],
            a2: vec![0.0; hidden],
        }
    }
}

/// Intermediate activations kept for the backward pass.
#[derive(Debug, Clone, Default)]
pub struct ForwardCache {
    actor: TrunkCache,
    critic: Option<TrunkCache>,
    pub logits: Vec<f64>,
    pub value: f64,
}

pub const DEFAULT_HIDDEN: usize = 64;

#[inline]
fn axpy(y: &mut [f64], a: f64, x: &[f64]) {
    for (yi, xi) in y.iter_mut().zip(x) {
        *yi += a * xi;
    }
}

#[inline]
fn dot(a: &[f64], b: &[f64]) -> f64 {
    // four partial sums so the loop can vectorise
    let mut acc = [0.0; 4];
    let chunks = a.len() / 4;
    for c in 0..chunks {
        for l in 0..4 {
            acc[l] += a[4 * c + l] * b[4 * c + l];
        }
    }
    let mut tail = 0.0;
    for i in 4 * chunks..a.len() {
        tail += a[i] * b[i];
    }
    (acc[0] + acc[1]) + (acc[2] + acc[3]) + tail
}

fn trunk_forward(p: &[f64], l: &TrunkLayout, h: usize, x: &[f64], c: &mut TrunkCache) {
    c.z1.copy_from_slice(&p[l.b1..l.b1 + h]);
    for (j, &xj) in x.iter().enumerate() {
        axpy(&mut c.z1, xj, &p[l.w1 + j * h..l.w1 + (j + 1) * h]);
    }
    for (ai, &zi) in c.a1.iter_mut().zip(&c.z1) {
        *ai = zi.max(0.0);
    }
    c.z2.copy_from_slice(&p[l.b2..l.b2 + h]);
    for j in 0..h {
        let aj = c.a1[j];
        if aj != 0.0 {
            axpy(&mut c.z2, aj, &p[l.w2 + j * h..l.w2 + (j + 1) * h]);
        }
    }
    for (ai, &zi) in c.a2.iter_mut().zip(&c.z2) {
        *ai = zi.max(0.0);
    }
}

/// `d_a2` holds the loss derivative with respect to the trunk output and is
/// overwritten; `d_a1` is scratch of the same length.
#[allow(clippy::too_many_arguments)]
fn trunk_backward(
    p: &[f64],
    l: &TrunkLayout,
    h: usize,
    x: &[f64],
    c: &TrunkCache,
    d_a2: &mut [f64],
    d_a1: &mut [f64],
    grad: &mut [f64],
) {
    for (d, &z) in d_a2.iter_mut().zip(&c.z2) {
        if z <= 0.0 {
            *d = 0.0;
        }
    }
    let d_z2: &[f64] = d_a2;
    for j in 0..h {
        let aj = c.a1[j];
        let row = l.w2 + j * h..l.w2 + (j + 1) * h;
        d_a1[j] = if c.z1[j] > 0.0 { dot(&p[row.clone()], d_z2) } else { 0.0 };
        if aj != 0.0 {
            axpy(&mut grad[row], aj, d_z2);
        }
    }
    axpy(&mut grad[l.b2..l.b2 + h], 1.0, d_z2);
    let d_z1: &[f64] = d_a1;
    for (j, &xj) in x.iter().enumerate() {
        if xj != 0.0 {
            axpy(&mut grad[l.w1 + j * h..l.w1 + (j + 1) * h], xj, d_z1);
        }
    }
    axpy(&mut grad[l.b1..l.b1 + h], 1.0, d_z1);
}

impl PolicyNetwork {
    /// Shared-trunk network with randomly initialised parameters.
    pub fn new(input: usize, hidden: usize, actions: usize, seed: u64) -> Self {
        Self::with_critic(input, hidden, actions, false, seed)
    }

    /// Hidden weights are uniform in `±sqrt(6/fan_in)` and biases in
    /// `±1/sqrt(fan_in)`; the policy head is
    /// scaled down by 100 so the initial policy is close to uniform.
    pub fn with_critic(input: usize, hidden: usize, actions: usize, separate_critic: bool, seed: u64) -> Self {
        assert!(input > 0 && hidden > 0 && actions > 0);
        let layout = Layout::new(input, hidden, actions, separate_critic);
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut params = vec![0.0; layout.len];
        let mut fill = |range: std::ops::Range<usize>, bound: f64, rng: &mut ChaCha8Rng| {
            for p in &mut params[range] {
                *p = rng.random_range(-bound..bound);
            }
        };
        let b_in = (6.0 / input as f64).sqrt();
        let b_hid = (6.0 / hidden as f64).sqrt();
        let b_head = 1.0 / (hidden as f64).sqrt();
        for t in std::iter::once(layout.trunk).chain(layout.critic) {
            fill(t.w1..t.b1, b_in, &mut rng);
            fill(t.b1..t.w2, 1.0 / (input as f64).sqrt(), &mut rng);
            fill(t.w2..t.b2, b_hid, &mut rng);
            fill(t.b2..t.end, b_head, &mut rng);
        }
        fill(layout.wp..layout.bp, 0.01 * b_head, &mut rng);
        fill(layout.wv..layout.bv, b_head, &mut rng);
        Self {
            input,
            hidden,
            actions,
            separate_critic,
            params,
        }
    }

    pub fn input_len(&self) -> usize {
        self.input
    }

    pub fn hidden(&self) -> usize {
        self.hidden
    }

    pub fn actions(&self) -> usize {
        self.actions
    }

    pub fn separate_critic(&self) -> bool {
        self.separate_critic
    }

    pub fn params(&self) -> &[f64] {
        &self.params
    }

    pub fn params_mut(&mut self) -> &mut [f64] {
        &mut self.params
    }

    pub fn param_count(&self) -> usize {
        self.params.len()
    }

    /// Parameter count implied by the shape, for validating loaded weights.
    pub fn expected_param_count(&self) -> usize {
        self.layout().len
    }

    fn layout(&self) -> Layout {
        Layout::new(self.input, self.hidden, self.actions, self.separate_critic)
    }

    pub fn new_cache(&self) -> ForwardCache {
        ForwardCache {
            actor: TrunkCache::new(self.hidden),
            critic: self.separate_critic.then(|| TrunkCache::new(self.hidden)),
            logits: vec![0.0; self.actions],
            value: 0.0,
        }
    }

    pub fn forward_into(&self, x: &[f64], cache: &mut ForwardCache) {
        assert_eq!(x.len(), self.input, "observation width mismatch");
        let l = self.layout();
        let (h, a) = (self.hidden, self.actions);
        let p = &self.params;

        trunk_forward(p, &l.trunk, h, x, &mut cache.actor);
        cache.logits.copy_from_slice(&p[l.bp..l.bp + a]);
        for j in 0..h {
            let aj = cache.actor.a2[j];
            if aj != 0.0 {
                axpy(&mut cache.logits, aj, &p[l.wp + j * a..l.wp + (j + 1) * a]);
            }
        }
        let features = match (&l.critic, cache.critic.as_mut()) {
            (Some(ct), Some(cc)) => {
                trunk_forward(p, ct, h, x, cc);
                &cc.a2
            }
            _ => &cache.actor.a2,
        };
        cache.value = p[l.bv] + dot(features, &p[l.wv..l.wv + h]);
    }

    /// Logits and value for one observation.
    pub fn forward(&self, x: &[f64]) -> (Vec<f64>, f64) {
        let mut cache = self.new_cache();
        self.forward_into(x, &mut cache);
        (cache.logits, cache.value)
    }

    pub fn action_probabilities(&self, x: &[f64]) -> Vec<f64> {
        softmax(&self.forward(x).0)
    }

    /// Accumulates into `grad` the gradient of a loss whose derivatives with
    /// respect to the logits and value of the cached forward pass are
    /// `d_logits` and `d_value`.
    pub fn backward(
        &self,
        x: &[f64],
        cache: &ForwardCache,
        d_logits: &[f64],
        d_value: f64,
        grad: &mut [f64],
        scratch: &mut Vec<f64>,
    ) {
        let l = self.layout();
        let (h, a) = (self.hidden, self.actions);
        let p = &self.params;
        scratch.clear();
        scratch.resize(4 * h, 0.0);
        let (actor_s, critic_s) = scratch.split_at_mut(2 * h);
        let (d_a2, d_a1) = actor_s.split_at_mut(h);
        let (dc_a2, dc_a1) = critic_s.split_at_mut(h);

        let critic_features = cache.critic.as_ref().map_or(&cache.actor.a2, |c| &c.a2);
        for j in 0..h {
            let aj = cache.actor.a2[j];
            d_a2[j] = dot(&p[l.wp + j * a..l.wp + (j + 1) * a], d_logits);
            if aj != 0.0 {
                axpy(&mut grad[l.wp + j * a..l.wp + (j + 1) * a], aj, d_logits);
            }
            let d_feature = p[l.wv + j] * d_value;
            if l.critic.is_some() {
                dc_a2[j] = d_feature;
            } else {
                d_a2[j] += d_feature;
            }
            grad[l.wv + j] += critic_features[j] * d_value;
        }
        axpy(&mut grad[l.bp..l.bp + a], 1.0, d_logits);
        grad[l.bv] += d_value;

        trunk_backward(p, &l.trunk, h, x, &cache.actor, d_a2, d_a1, grad);
        if let (Some(ct), Some(cc)) = (&l.critic, &cache.critic) {
            trunk_backward(p, ct, h, x, cc, dc_a2, dc_a1, grad);
        }
    }
}

pub fn log_softmax(logits: &[f64]) -> Vec<f64> {
    let max = logits.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let lse = max + logits.iter().map(|z| (z - max).exp()).sum::<f64>().ln();
    logits.iter().map(|z| z - lse).collect()
}

pub fn softmax(logits: &[f64]) -> Vec<f64> {
    log_softmax(logits).into_iter().map(f64::exp).collect()
}

/// Index of the largest entry; ties go to the lowest index.
pub fn argmax(values: &[f64]) -> usize {
    let mut best = 0;
    for (i, v) in values.iter().enumerate().skip(1) {
        if *v > values[best] {
            best = i;
        }
    }
    best
}

/// Draws an index from a probability vector.
pub fn sample_categorical(probs: &[f64], rng: &mut impl Rng) -> usize {
    let u: f64 = rng.random();
    let mut acc = 0.0;
    for (i, p) in probs.iter().enumerate() {
        acc += p;
        if u < acc {
            return i;
        }
    }
    probs.len() - 1
}
