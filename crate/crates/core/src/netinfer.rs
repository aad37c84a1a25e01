//! Forward inference of the fully convolutional path predictor.
//!
//! The network is a stack of `conv → batch-norm → ReLU` layers followed by a
//! `transposed conv → batch-norm → sigmoid` head. Every layer uses stride 1
//! and zero padding `(k - 1) / 2`, so an `n × n` input yields an `n × n`
//! value map for any `n`.
//!
//! Conventions baked into the FCNW format:
//!
//! * conv kernels are applied as cross-correlation (no flip);
//! * the transposed-conv head is stored `[out][in][kh][kw]` and evaluated as a
//!   cross-correlation with the spatially flipped kernel, which is what a
//!   stride-1 same-size transposed convolution computes;
//! * sums run over input channels ascending and, within a channel, over the
//!   kernel window row-major, accumulated in `f64`; activations are stored
//!   as `f32` between layers.
//!
//! Dropout after the head is a training-time operation and has no effect here.
//!
//! # FCNW layout (little-endian)
//!
//! ```text
//! "FCNW" u8 version=1 u32 layer_count
//! per layer: u8 kind (0 conv+bn+relu, 1 deconv+bn+sigmoid)
//!            u32 in_ch u32 out_ch u32 kh u32 kw f32 bn_eps
//!            f32 kernel[out][in][kh][kw] f32 bias[out]
//!            f32 gamma[out] f32 beta[out] f32 mean[out] f32 var[out]
//! u32 crc32 of every preceding byte
//! ```

use std::io::{Read, Write};

use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::gridworld::{GridMap, ProblemMaps};

pub const FCNW_MAGIC: &[u8; 4] = b"FCNW";
pub const FCNW_VERSION: u8 = 1;

/// Depth and width of the reference architecture.
pub const REFERENCE_CONV_LAYERS: usize = 20;
pub const REFERENCE_CHANNELS: usize = 64;
/// Dropout rate applied after the head during training only.
pub const HEAD_DROPOUT: f32 = 0.1;

#[derive(Debug, Error)]
pub enum NetError {
    #[error("format error: {0}")]
    Format(String),
    #[error("checksum mismatch: stored {stored:#010x}, computed {computed:#010x}")]
    Checksum { stored: u32, computed: u32 },
    #[error("shape error: {0}")]
    Shape(String),
    #[error("value error: {0}")]
    Value(String),
    #[error("size mismatch: {0}")]
    SizeMismatch(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum LayerKind {
    ConvBnRelu,
    DeconvBnSigmoid,
}

impl LayerKind {
    fn code(self) -> u8 {
        match self {
            LayerKind::ConvBnRelu => 0,
            LayerKind::DeconvBnSigmoid => 1,
        }
    }

    fn from_code(code: u8) -> Result<Self, NetError> {
        match code {
            0 => Ok(LayerKind::ConvBnRelu),
            1 => Ok(LayerKind::DeconvBnSigmoid),
            other => Err(NetError::Format(format!("unknown layer kind {other}"))),
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct Layer {
    pub kind: LayerKind,
    pub in_channels: usize,
    pub out_channels: usize,
    pub kernel_h: usize,
    pub kernel_w: usize,
    /// `[out][in][kh][kw]`, row-major.
    pub kernel: Vec<f32>,
    pub bias: Vec<f32>,
    pub gamma: Vec<f32>,
    pub beta: Vec<f32>,
    pub mean: Vec<f32>,
    pub var: Vec<f32>,
    pub bn_eps: f32,
    /// Batch-norm already absorbed into `kernel`/`bias`.
    pub folded: bool,
}

impl Layer {
    /// Layer with identity batch-norm (`γ=1, β=0, μ=0, σ²=1, ε=0`).
    pub fn new(kind: LayerKind, in_channels: usize, out_channels: usize, kernel_h: usize, kernel_w: usize) -> Self {
        Layer {
            kind,
            in_channels,
            out_channels,
            kernel_h,
            kernel_w,
            kernel: vec![0.0; out_channels * in_channels * kernel_h * kernel_w],
            bias: vec![0.0; out_channels],
            gamma: vec![1.0; out_channels],
            beta: vec![0.0; out_channels],
            mean: vec![0.0; out_channels],
            var: vec![1.0; out_channels],
            bn_eps: 0.0,
            folded: false,
        }
    }

    /// Random kernels and batch-norm statistics; handy for fixtures.
    pub fn random<R: Rng + ?Sized>(
        kind: LayerKind,
        in_channels: usize,
        out_channels: usize,
        kernel: usize,
        rng: &mut R,
    ) -> Self {
        let mut layer = Layer::new(kind, in_channels, out_channels, kernel, kernel);
        let fan_in = (in_channels * kernel * kernel) as f32;
        let scale = (2.0 / fan_in).sqrt();
        for w in &mut layer.kernel {
            *w = rng.gen_range(-1.0f32..1.0) * scale;
        }
        for o in 0..out_channels {
            layer.bias[o] = rng.gen_range(-0.1f32..0.1);
            layer.gamma[o] = rng.gen_range(0.5f32..1.5);
            layer.beta[o] = rng.gen_range(-0.2f32..0.2);
            layer.mean[o] = rng.gen_range(-0.2f32..0.2);
            layer.var[o] = rng.gen_range(0.5f32..2.0);
        }
        layer.bn_eps = 1e-5;
        layer
    }

    #[inline]
    fn kernel_index(&self, o: usize, c: usize, ky: usize, kx: usize) -> usize {
        ((o * self.in_channels + c) * self.kernel_h + ky) * self.kernel_w + kx
    }

    fn validate(&self) -> Result<(), NetError> {
        let (o, i, kh, kw) = (self.out_channels, self.in_channels, self.kernel_h, self.kernel_w);
        if o == 0 || i == 0 || kh == 0 || kw == 0 {
            return Err(NetError::Shape(format!("zero dimension in layer {i}->{o} {kh}x{kw}")));
        }
        if kh % 2 == 0 || kw % 2 == 0 {
            return Err(NetError::Shape(format!("kernel {kh}x{kw} must have odd sides for same-size output")));
        }
        if self.kernel.len() != o * i * kh * kw {
            return Err(NetError::Shape(format!("kernel has {} values, expected {}", self.kernel.len(), o * i * kh * kw)));
        }
        for (name, v) in [
            ("bias", &self.bias),
            ("gamma", &self.gamma),
            ("beta", &self.beta),
            ("mean", &self.mean),
            ("var", &self.var),
        ] {
            if v.len() != o {
                return Err(NetError::Shape(format!("{name} has {} values, expected {o}", v.len())));
            }
        }
        if !(self.bn_eps >= 0.0) {
            return Err(NetError::Value(format!("bn epsilon {} is negative", self.bn_eps)));
        }
        if let Some(v) = self.var.iter().find(|&&v| !(v > 0.0)) {
            return Err(NetError::Value(format!("running variance {v} is not positive")));
        }
        Ok(())
    }
}

/// Ordered layer list of a network.
#[derive(Clone, Debug, PartialEq)]
pub struct NetworkWeights {
    pub layers: Vec<Layer>,
}

impl NetworkWeights {
    pub fn new(layers: Vec<Layer>) -> Result<Self, NetError> {
        let w = NetworkWeights { layers };
        w.validate(false)?;
        Ok(w)
    }

    /// Checks per-layer shapes and chaining. `strict` additionally requires
    /// the reference architecture: 3 input channels, twenty 3×3 conv layers
    /// of width 64 and a single-channel transposed-conv head.
    pub fn validate(&self, strict: bool) -> Result<(), NetError> {
        let last = self.layers.last().ok_or_else(|| NetError::Shape("network has no layers".into()))?;
        for l in &self.layers {
            l.validate()?;
        }
        if self.layers[0].in_channels != 3 {
            return Err(NetError::Shape(format!(
                "first layer takes {} channels, expected 3",
                self.layers[0].in_channels
            )));
        }
        for (i, pair) in self.layers.windows(2).enumerate() {
            if pair[0].out_channels != pair[1].in_channels {
                return Err(NetError::Shape(format!(
                    "layer {i} emits {} channels but layer {} takes {}",
                    pair[0].out_channels,
                    i + 1,
                    pair[1].in_channels
                )));
            }
        }
        if last.kind != LayerKind::DeconvBnSigmoid || last.out_channels != 1 {
            return Err(NetError::Shape("last layer must be a single-channel deconv+bn+sigmoid head".into()));
        }
        if self.layers[..self.layers.len() - 1].iter().any(|l| l.kind != LayerKind::ConvBnRelu) {
            return Err(NetError::Shape("only the last layer may be a deconv head".into()));
        }
        if strict {
            let body = &self.layers[..self.layers.len() - 1];
            if body.len() != REFERENCE_CONV_LAYERS {
                return Err(NetError::Shape(format!("{} conv layers, expected {REFERENCE_CONV_LAYERS}", body.len())));
            }
            if self
                .layers
                .iter()
                .any(|l| l.kernel_h != 3 || l.kernel_w != 3)
                || body.iter().any(|l| l.out_channels != REFERENCE_CHANNELS)
            {
                return Err(NetError::Shape(format!("layers must be 3x3 with {REFERENCE_CHANNELS} channels")));
            }
        }
        Ok(())
    }

    /// Random network with `depth` conv layers of `width` channels and a
    /// `kernel × kernel` window everywhere.
    pub fn random<R: Rng + ?Sized>(depth: usize, width: usize, kernel: usize, rng: &mut R) -> Self {
        let mut layers = Vec::with_capacity(depth + 1);
        let mut in_ch = 3;
        for _ in 0..depth {
            layers.push(Layer::random(LayerKind::ConvBnRelu, in_ch, width, kernel, rng));
            in_ch = width;
        }
        layers.push(Layer::random(LayerKind::DeconvBnSigmoid, in_ch, 1, kernel, rng));
        NetworkWeights { layers }
    }

    /// Randomly initialised reference architecture.
    pub fn random_reference<R: Rng + ?Sized>(rng: &mut R) -> Self {
        Self::random(REFERENCE_CONV_LAYERS, REFERENCE_CHANNELS, 3, rng)
    }

    pub fn parameter_count(&self) -> usize {
        self.layers.iter().map(|l| l.kernel.len() + 5 * l.out_channels).sum()
    }

    pub fn is_folded(&self) -> bool {
        self.layers.iter().all(|l| l.folded)
    }

    pub fn save<W: Write>(&self, mut out: W) -> Result<(), NetError> {
        out.write_all(&self.to_bytes())?;
        Ok(())
    }

    pub fn to_bytes(&self) -> Vec<u8> {
        let mut buf = Vec::new();
        buf.extend_from_slice(FCNW_MAGIC);
        buf.push(FCNW_VERSION);
        buf.extend_from_slice(&(self.layers.len() as u32).to_le_bytes());
        for l in &self.layers {
            buf.push(l.kind.code());
            for d in [l.in_channels, l.out_channels, l.kernel_h, l.kernel_w] {
                buf.extend_from_slice(&(d as u32).to_le_bytes());
            }
            buf.extend_from_slice(&l.bn_eps.to_le_bytes());
            for arr in [&l.kernel, &l.bias, &l.gamma, &l.beta, &l.mean, &l.var] {
                for v in arr.iter() {
                    buf.extend_from_slice(&v.to_le_bytes());
                }
            }
        }
        let crc = crc32fast::hash(&buf);
        buf.extend_from_slice(&crc.to_le_bytes());
        buf
    }

    pub fn from_bytes(bytes: &[u8]) -> Result<Self, NetError> {
        if bytes.len() < FCNW_MAGIC.len() + 1 + 4 + 4 {
            return Err(NetError::Format(format!("file too short ({} bytes)", bytes.len())));
        }
        let (payload, tail) = bytes.split_at(bytes.len() - 4);
        let stored = u32::from_le_bytes(tail.try_into().unwrap());
        let computed = crc32fast::hash(payload);
        if stored != computed {
            return Err(NetError::Checksum { stored, computed });
        }
        let mut r = Cursor { buf: payload, pos: 0 };
        if r.take(4)? != FCNW_MAGIC {
            return Err(NetError::Format("bad magic".into()));
        }
        let version = r.u8()?;
        if version != FCNW_VERSION {
            return Err(NetError::Format(format!("unsupported version {version}")));
        }
        let count = r.u32()? as usize;
        let mut layers = Vec::with_capacity(count.min(1024));
        for _ in 0..count {
            let kind = LayerKind::from_code(r.u8()?)?;
            let in_channels = r.u32()? as usize;
            let out_channels = r.u32()? as usize;
            let kernel_h = r.u32()? as usize;
            let kernel_w = r.u32()? as usize;
            let bn_eps = r.f32()?;
            let kernel_len = out_channels
                .checked_mul(in_channels)
                .and_then(|v| v.checked_mul(kernel_h))
                .and_then(|v| v.checked_mul(kernel_w))
                .ok_or_else(|| NetError::Shape("kernel dimensions overflow".into()))?;
            let kernel = r.f32s(kernel_len)?;
            let bias = r.f32s(out_channels)?;
            let gamma = r.f32s(out_channels)?;
            let beta = r.f32s(out_channels)?;
            let mean = r.f32s(out_channels)?;
            let var = r.f32s(out_channels)?;
            layers.push(Layer {
                kind,
                in_channels,
                out_channels,
                kernel_h,
                kernel_w,
                kernel,
                bias,
                gamma,
                beta,
                mean,
                var,
                bn_eps,
                folded: false,
            });
        }
        if r.pos != payload.len() {
            return Err(NetError::Format(format!("{} trailing bytes after last layer", payload.len() - r.pos)));
        }
        NetworkWeights::new(layers)
    }
}

struct Cursor<'a> {
    buf: &'a [u8],
    pos: usize,
}

impl<'a> Cursor<'a> {
    fn take(&mut self, len: usize) -> Result<&'a [u8], NetError> {
        let end = self
            .pos
            .checked_add(len)
            .filter(|&e| e <= self.buf.len())
            .ok_or_else(|| NetError::Format("unexpected end of file".into()))?;
        let s = &self.buf[self.pos..end];
        self.pos = end;
        Ok(s)
    }

    fn u8(&mut self) -> Result<u8, NetError> {
        Ok(self.take(1)?[0])
    }

    fn u32(&mut self) -> Result<u32, NetError> {
        Ok(u32::from_le_bytes(self.take(4)?.try_into().unwrap()))
    }

    fn f32(&mut self) -> Result<f32, NetError> {
        Ok(f32::from_le_bytes(self.take(4)?.try_into().unwrap()))
    }

    fn f32s(&mut self, len: usize) -> Result<Vec<f32>, NetError> {
        let bytes = self.take(len.checked_mul(4).ok_or_else(|| NetError::Format("length overflow".into()))?)?;
        Ok(bytes.chunks_exact(4).map(|c| f32::from_le_bytes(c.try_into().unwrap())).collect())
    }
}

/// Reads and validates an FCNW stream.
pub fn load_weights<R: Read>(mut input: R) -> Result<NetworkWeights, NetError> {
    let mut bytes = Vec::new();
    input.read_to_end(&mut bytes)?;
    NetworkWeights::from_bytes(&bytes)
}

pub fn save_weights<W: Write>(weights: &NetworkWeights, out: W) -> Result<(), NetError> {
    weights.save(out)
}

/// Absorbs each layer's batch-norm into its kernel and bias:
/// `k' = k·γ/√(σ²+ε)`, `b' = γ(b−μ)/√(σ²+ε) + β`. The batch-norm fields become
/// the identity.
pub fn fold_batchnorm(weights: &NetworkWeights) -> NetworkWeights {
    let layers = weights
        .layers
        .iter()
        .map(|l| {
            if l.folded {
                return l.clone();
            }
            let mut f = l.clone();
            let per_out = l.in_channels * l.kernel_h * l.kernel_w;
            for o in 0..l.out_channels {
                let scale = l.gamma[o] as f64 / (l.var[o] as f64 + l.bn_eps as f64).sqrt();
                for w in &mut f.kernel[o * per_out..(o + 1) * per_out] {
                    *w = (*w as f64 * scale) as f32;
                }
                f.bias[o] = ((l.bias[o] as f64 - l.mean[o] as f64) * scale + l.beta[o] as f64) as f32;
                f.gamma[o] = 1.0;
                f.beta[o] = 0.0;
                f.mean[o] = 0.0;
                f.var[o] = 1.0;
            }
            f.bn_eps = 0.0;
            f.folded = true;
            f
        })
        .collect();
    NetworkWeights { layers }
}

/// Real-valued `n × n` map, row-major.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ValueMap {
    n: usize,
    values: Vec<f32>,
}

impl ValueMap {
    pub fn new(n: usize, values: Vec<f32>) -> Self {
        assert_eq!(values.len(), n * n, "value map must hold n*n values");
        ValueMap { n, values }
    }

    pub fn zeros(n: usize) -> Self {
        ValueMap { n, values: vec![0.0; n * n] }
    }

    /// Binary map from a 0/1 mask.
    pub fn from_mask(n: usize, mask: &[u8]) -> Self {
        ValueMap::new(n, mask.iter().map(|&m| if m != 0 { 1.0 } else { 0.0 }).collect())
    }

    pub fn size(&self) -> usize {
        self.n
    }

    pub fn values(&self) -> &[f32] {
        &self.values
    }

    pub fn values_mut(&mut self) -> &mut [f32] {
        &mut self.values
    }

    pub fn get(&self, row: usize, col: usize) -> f32 {
        self.values[row * self.n + col]
    }

    pub fn set(&mut self, row: usize, col: usize, v: f32) {
        self.values[row * self.n + col] = v;
    }
}

/// One layer over `in_channels` planes of `n × n`. See the module docs for
/// the accumulation order.
fn apply_layer(layer: &Layer, input: &[f32], n: usize) -> Vec<f32> {
    let plane = n * n;
    let (kh, kw) = (layer.kernel_h, layer.kernel_w);
    let (ph, pw) = ((kh / 2) as isize, (kw / 2) as isize);
    let flip = layer.kind == LayerKind::DeconvBnSigmoid;
    let ni = n as isize;

    let compute_channel = |o: usize| -> Vec<f32> {
        let mut acc = vec![0f64; plane];
        for c in 0..layer.in_channels {
            let src = &input[c * plane..(c + 1) * plane];
            for ky in 0..kh {
                for kx in 0..kw {
                    let w = if flip {
                        layer.kernel[layer.kernel_index(o, c, kh - 1 - ky, kw - 1 - kx)]
                    } else {
                        layer.kernel[layer.kernel_index(o, c, ky, kx)]
                    } as f64;
                    if w == 0.0 {
                        continue;
                    }
                    let dy = ky as isize - ph;
                    let dx = kx as isize - pw;
                    let y0 = (-dy).max(0) as usize;
                    let y1 = (ni - dy).min(ni).max(0) as usize;
                    let x0 = (-dx).max(0) as usize;
                    let x1 = (ni - dx).min(ni).max(0) as usize;
                    for y in y0..y1 {
                        let sy = (y as isize + dy) as usize;
                        let row = &src[sy * n..sy * n + n];
                        let out = &mut acc[y * n..y * n + n];
                        for x in x0..x1 {
                            out[x] += w * row[(x as isize + dx) as usize] as f64;
                        }
                    }
                }
            }
        }
        let scale = layer.gamma[o] as f64 / (layer.var[o] as f64 + layer.bn_eps as f64).sqrt();
        let shift = layer.beta[o] as f64 - layer.mean[o] as f64 * scale;
        let bias = layer.bias[o] as f64;
        acc.into_iter()
            .map(|s| {
                let z = (s + bias) * scale + shift;
                match layer.kind {
                    LayerKind::ConvBnRelu => z.max(0.0) as f32,
                    LayerKind::DeconvBnSigmoid => sigmoid(z) as f32,
                }
            })
            .collect()
    };

    let channels: Vec<Vec<f32>> = if layer.out_channels >= 8 && plane >= 64 {
        (0..layer.out_channels).into_par_iter().map(compute_channel).collect()
    } else {
        (0..layer.out_channels).map(compute_channel).collect()
    };
    channels.concat()
}

fn sigmoid(z: f64) -> f64 {
    if z >= 0.0 {
        1.0 / (1.0 + (-z).exp())
    } else {
        let e = z.exp();
        e / (1.0 + e)
    }
}

/// Runs the network on stacked `[env, start, goal]` planes.
pub fn forward_planes(weights: &NetworkWeights, n: usize, planes: [&[f32]; 3]) -> Result<ValueMap, NetError> {
    if n == 0 {
        return Err(NetError::SizeMismatch("empty input".into()));
    }
    for (name, p) in ["environment", "start", "goal"].iter().zip(planes.iter()) {
        if p.len() != n * n {
            return Err(NetError::SizeMismatch(format!("{name} plane has {} values, expected {}", p.len(), n * n)));
        }
    }
    let first = weights.layers.first().ok_or_else(|| NetError::Shape("network has no layers".into()))?;
    if first.in_channels != 3 {
        return Err(NetError::Shape(format!("first layer takes {} channels, expected 3", first.in_channels)));
    }
    let mut x: Vec<f32> = planes.concat();
    for layer in &weights.layers {
        x = apply_layer(layer, &x, n);
    }
    if x.len() != n * n {
        return Err(NetError::Shape(format!("network emits {} planes, expected 1", x.len() / (n * n))));
    }
    Ok(ValueMap::new(n, x))
}

/// Value map for an environment with its start and goal maps.
pub fn forward(weights: &NetworkWeights, env: &GridMap, starts: &[u8], goal: &[u8]) -> Result<ValueMap, NetError> {
    let n = env.size();
    if starts.len() != n * n || goal.len() != n * n {
        return Err(NetError::SizeMismatch(format!(
            "start/goal maps have {}/{} cells, grid has {}",
            starts.len(),
            goal.len(),
            n * n
        )));
    }
    let env_plane: Vec<f32> = env.cells().iter().map(|&o| o as u8 as f32).collect();
    let s: Vec<f32> = starts.iter().map(|&v| v as f32).collect();
    let g: Vec<f32> = goal.iter().map(|&v| v as f32).collect();
    forward_planes(weights, n, [&env_plane, &s, &g])
}

/// Convenience wrapper over [`forward`] for [`ProblemMaps`].
pub fn forward_maps(weights: &NetworkWeights, maps: &ProblemMaps) -> Result<ValueMap, NetError> {
    let [e, s, g] = maps.channels();
    forward_planes(weights, maps.n, [&e, &s, &g])
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn tiny() -> NetworkWeights {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        NetworkWeights::random(1, 4, 3, &mut rng)
    }

    #[test]
    fn bytes_round_trip() {
        let w = tiny();
        let back = NetworkWeights::from_bytes(&w.to_bytes()).unwrap();
        assert_eq!(back, w);
        assert_eq!(back.layers.len(), 2);
    }

    #[test]
    fn truncated_is_format_error() {
        let bytes = tiny().to_bytes();
        let err = NetworkWeights::from_bytes(&bytes[..7]).unwrap_err();
        assert!(matches!(err, NetError::Format(_)), "{err}");
        // valid crc over a truncated payload
        let mut cut = bytes[..bytes.len() - 40].to_vec();
        let crc = crc32fast::hash(&cut);
        cut.extend_from_slice(&crc.to_le_bytes());
        assert!(matches!(NetworkWeights::from_bytes(&cut), Err(NetError::Format(_))));
    }

    #[test]
    fn zero_variance_is_value_error() {
        let mut w = tiny();
        w.layers[0].var[2] = 0.0;
        let err = NetworkWeights::from_bytes(&w.to_bytes()).unwrap_err();
        assert!(matches!(err, NetError::Value(_)), "{err}");
    }

    #[test]
    fn bad_magic_and_version() {
        let mut bytes = tiny().to_bytes();
        bytes[4] = 2;
        let len = bytes.len();
        let crc = crc32fast::hash(&bytes[..len - 4]);
        bytes[len - 4..].copy_from_slice(&crc.to_le_bytes());
        assert!(matches!(NetworkWeights::from_bytes(&bytes), Err(NetError::Format(_))));
    }

    #[test]
    fn shape_mismatch_between_layers() {
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        let layers = vec![
            Layer::random(LayerKind::ConvBnRelu, 3, 4, 3, &mut rng),
            Layer::random(LayerKind::DeconvBnSigmoid, 5, 1, 3, &mut rng),
        ];
        let w = NetworkWeights { layers };
        assert!(matches!(NetworkWeights::from_bytes(&w.to_bytes()), Err(NetError::Shape(_))));
    }

    #[test]
    fn strict_mode_checks_reference_architecture() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let reference = NetworkWeights::random_reference(&mut rng);
        reference.validate(true).unwrap();
        assert_eq!(reference.layers.len(), 21);
        assert!(tiny().validate(true).is_err());
        tiny().validate(false).unwrap();
    }

    #[test]
    fn identity_bn_fold_is_noop() {
        let mut w = tiny();
        for l in &mut w.layers {
            l.gamma.fill(1.0);
            l.beta.fill(0.0);
            l.mean.fill(0.0);
            l.var.fill(1.0);
            l.bn_eps = 0.0;
        }
        let f = fold_batchnorm(&w);
        for (a, b) in w.layers.iter().zip(&f.layers) {
            assert_eq!(a.kernel, b.kernel);
            assert_eq!(a.bias, b.bias);
            assert!(b.folded);
        }
    }

    #[test]
    fn beta_only_shifts_bias() {
        let mut w = tiny();
        for l in &mut w.layers {
            l.gamma.fill(1.0);
            l.mean.fill(0.0);
            l.var.fill(1.0);
            l.bn_eps = 0.0;
        }
        let f = fold_batchnorm(&w);
        for (a, b) in w.layers.iter().zip(&f.layers) {
            for o in 0..a.out_channels {
                assert_eq!(b.bias[o], a.bias[o] + a.beta[o]);
            }
        }
    }

    #[test]
    fn output_strictly_inside_unit_interval_and_same_size() {
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        let w = NetworkWeights::random(3, 6, 3, &mut rng);
        for n in [3, 5, 9] {
            let planes: Vec<Vec<f32>> = (0..3).map(|_| (0..n * n).map(|_| rng.gen_range(0.0..1.0)).collect()).collect();
            let out = forward_planes(&w, n, [&planes[0], &planes[1], &planes[2]]).unwrap();
            assert_eq!(out.size(), n);
            assert!(out.values().iter().all(|&v| v > 0.0 && v < 1.0));
        }
    }

    #[test]
    fn size_mismatch() {
        let w = tiny();
        let g = GridMap::empty(5);
        let err = forward(&w, &g, &[0; 16], &[0; 25]).unwrap_err();
        assert!(matches!(err, NetError::SizeMismatch(_)));
    }

    #[test]
    fn forward_is_deterministic() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let w = NetworkWeights::random(2, 16, 3, &mut rng);
        let planes: Vec<Vec<f32>> = (0..3).map(|_| (0..100).map(|_| rng.gen_range(0.0..1.0)).collect()).collect();
        let a = forward_planes(&w, 10, [&planes[0], &planes[1], &planes[2]]).unwrap();
        let b = forward_planes(&w, 10, [&planes[0], &planes[1], &planes[2]]).unwrap();
        assert_eq!(
            a.values().iter().map(|v| v.to_bits()).collect::<Vec<_>>(),
            b.values().iter().map(|v| v.to_bits()).collect::<Vec<_>>()
        );
    }
}
