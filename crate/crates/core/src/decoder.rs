//! Recursive decoding of RM(r, m) along the Pascal triangle.
//!
//! At a node `(j, s)` with likelihoods `g` of length `2^j`:
//!
//! 1. V-descent: the spread of `v = z' + z''` is the pairwise product
//!    `h*_i = h_{2i} h_{2i+1}`; decode `v` in `(j-1, s-1)`.
//! 2. U-descent: flip the sign of `g_{2i+1}` wherever `v_i = 1` and add the
//!    pair, `g*_i = g_{2i} ± g_{2i+1}`; decode `u` in `(j-1, s)`.
//! 3. Reassemble `z = (u, u + v)` on adjacent pairs, info = `I_V ∥ I_U`.
//!
//! Recursion stops at first-order nodes `(j, 1)`, decoded by maximum
//! correlation through the fast Hadamard transform, and at single parity
//! check nodes `(j, j-1)`, decoded with the Wagner rule. Both are exact ML.
//!
//! Likelihoods are the state carried down the tree; spreads are formed on
//! the fly for each V-descent and mapped back with `g = 2 artanh(h)`.

use std::collections::BTreeSet;

use crate::channel::{bsc_metrics, hard_decision, ChannelModel, MetricVector, G_MAX};
use crate::rm_code::{
    dimension, info_layout, interleave, CodeParams, Codeword, Encoder, InfoLayout, NodeKind,
    NodePath, BRUTE_FORCE_MAX_K,
};
use crate::{Error, Result};

/// End nodes whose information bits are fixed to zero.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct FrozenSpec {
    pub paths: BTreeSet<NodePath>,
}

impl FrozenSpec {
    pub fn none() -> Self {
        Self::default()
    }

    pub fn from_paths<I: IntoIterator<Item = NodePath>>(paths: I) -> Self {
        Self {
            paths: paths.into_iter().collect(),
        }
    }

    /// The leftmost end node `(m-r+1, 1)` and, with `count >= 2`, the first
    /// `(m-r, 1)` node in layout order.
    pub fn leftmost(params: &CodeParams, count: usize) -> Self {
        let layout = info_layout(params);
        let mut paths = BTreeSet::new();
        if count >= 1 {
            if let Some(first) = layout.nodes.first() {
                paths.insert(first.path.clone());
            }
        }
        if count >= 2 && params.m > params.r {
            let target = params.m - params.r;
            if let Some(node) = layout.nodes.iter().find(|n| {
                n.kind == NodeKind::FirstOrder && n.j == target && !paths.contains(&n.path)
            }) {
                paths.insert(node.path.clone());
            }
        }
        Self { paths }
    }

    pub fn is_empty(&self) -> bool {
        self.paths.is_empty()
    }

    /// Per-end-node mask in layout order.
    pub fn mask(&self, layout: &InfoLayout) -> Result<Vec<bool>> {
        let mut mask = vec![false; layout.len()];
        for path in &self.paths {
            let idx = layout
                .position(path)
                .ok_or_else(|| Error::InvalidFrozenPath(path.to_string()))?;
            mask[idx] = true;
        }
        Ok(mask)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct DecodeResult {
    pub codeword: Codeword,
    pub info: Vec<u8>,
    pub node_outputs: Vec<(NodePath, Vec<u8>)>,
}

#[derive(Debug, Clone)]
struct Level {
    g: Vec<f64>,
    v: Vec<u8>,
    u: Vec<u8>,
}

struct Ctx<'a> {
    frozen: &'a [bool],
    node: usize,
    fht: &'a mut [f64],
    min_margin: f64,
}

/// Decoder with preallocated per-level scratch. One instance per worker.
#[derive(Debug, Clone)]
pub struct Decoder {
    params: CodeParams,
    layout: InfoLayout,
    frozen_mask: Vec<bool>,
    // levels[l] serves nodes of length 2^l.
    levels: Vec<Level>,
    fht: Vec<f64>,
    last_margin: f64,
}

impl Decoder {
    pub fn new(params: CodeParams, frozen: &FrozenSpec) -> Result<Self> {
        let layout = info_layout(&params);
        let frozen_mask = frozen.mask(&layout)?;
        let levels = (0..params.m)
            .map(|l| Level {
                g: vec![0.0; 1 << l],
                v: vec![0; 1 << l],
                u: vec![0; 1 << l],
            })
            .collect();
        Ok(Self {
            params,
            layout,
            frozen_mask,
            levels,
            fht: vec![0.0; params.n],
            last_margin: f64::INFINITY,
        })
    }

    pub fn params(&self) -> &CodeParams {
        &self.params
    }

    pub fn layout(&self) -> &InfoLayout {
        &self.layout
    }

    pub fn frozen_mask(&self) -> &[bool] {
        &self.frozen_mask
    }

    /// Smallest end-node decision margin seen in the last decode. Zero means
    /// some end node had to break a tie.
    pub fn last_margin(&self) -> f64 {
        self.last_margin
    }

    /// Decode likelihoods into caller-provided buffers. Does not allocate.
    pub fn decode_into(&mut self, g: &[f64], codeword: &mut [u8], info: &mut [u8]) -> Result<()> {
        let CodeParams { m, r, n, k, .. } = self.params;
        if g.len() != n {
            return Err(Error::LengthMismatch {
                expected: n,
                got: g.len(),
            });
        }
        if codeword.len() != n {
            return Err(Error::LengthMismatch {
                expected: n,
                got: codeword.len(),
            });
        }
        if info.len() != k {
            return Err(Error::LengthMismatch {
                expected: k,
                got: info.len(),
            });
        }
        let mut ctx = Ctx {
            frozen: &self.frozen_mask,
            node: 0,
            fht: &mut self.fht,
            min_margin: f64::INFINITY,
        };
        descend(&mut self.levels, m, r, g, codeword, info, &mut ctx);
        debug_assert_eq!(ctx.node, self.layout.len());
        self.last_margin = ctx.min_margin;
        Ok(())
    }

    pub fn decode_likelihoods(&mut self, g: &[f64]) -> Result<DecodeResult> {
        let mut codeword = vec![0u8; self.params.n];
        let mut info = vec![0u8; self.params.k];
        self.decode_into(g, &mut codeword, &mut info)?;
        Ok(self.result(codeword, info))
    }

    pub fn decode(&mut self, y: &MetricVector, channel: &ChannelModel) -> Result<DecodeResult> {
        if y.len() != self.params.n {
            return Err(Error::LengthMismatch {
                expected: self.params.n,
                got: y.len(),
            });
        }
        let g = y.to_likelihoods(channel)?;
        self.decode_likelihoods(&g)
    }

    pub fn decode_hard(&mut self, received: &Codeword, p: f64) -> Result<DecodeResult> {
        if received.len() != self.params.n {
            return Err(Error::LengthMismatch {
                expected: self.params.n,
                got: received.len(),
            });
        }
        let metrics = bsc_metrics(received, p)?;
        self.decode_likelihoods(&metrics.values)
    }

    fn result(&self, codeword: Vec<u8>, info: Vec<u8>) -> DecodeResult {
        let node_outputs = self
            .layout
            .nodes
            .iter()
            .map(|node| (node.path.clone(), info[node.range()].to_vec()))
            .collect();
        DecodeResult {
            codeword: Codeword(codeword),
            info,
            node_outputs,
        }
    }
}

fn descend(
    levels: &mut [Level],
    j: usize,
    s: usize,
    g: &[f64],
    cw: &mut [u8],
    info: &mut [u8],
    ctx: &mut Ctx<'_>,
) {
    if let Some(kind) = crate::rm_code::terminal_kind(j, s) {
        let frozen = ctx.frozen[ctx.node];
        ctx.node += 1;
        if frozen {
            cw.fill(0);
            info.fill(0);
            return;
        }
        let margin = match kind {
            NodeKind::FirstOrder => first_order_ml(j, g, &mut ctx.fht[..g.len()], cw, info),
            NodeKind::ParityCheck => spc_ml(g, cw, info),
            NodeKind::Repetition => repetition_ml(g, cw, info),
            NodeKind::Full => full_ml(g, cw, info),
        };
        ctx.min_margin = ctx.min_margin.min(margin);
        return;
    }

    let half = g.len() / 2;
    let kv = dimension(j - 1, s - 1);
    let (below, rest) = levels.split_at_mut(j - 1);
    let child = &mut rest[0];

    for (out, pair) in child.g.iter_mut().zip(g.chunks_exact(2)) {
        *out = combine_pair(pair[0], pair[1]);
    }
    descend(
        below,
        j - 1,
        s - 1,
        &child.g,
        &mut child.v,
        &mut info[..kv],
        ctx,
    );

    for ((out, pair), &v) in child.g.iter_mut().zip(g.chunks_exact(2)).zip(&child.v) {
        *out = if v == 0 {
            pair[0] + pair[1]
        } else {
            pair[0] - pair[1]
        };
    }
    descend(
        below,
        j - 1,
        s,
        &child.g,
        &mut child.u,
        &mut info[kv..],
        ctx,
    );

    interleave(&child.u[..half], &child.v[..half], cw);
}

/// Likelihood of `a ⊕ b` from the likelihoods of `a` and `b`, i.e.
/// `2 artanh(tanh(a/2) tanh(b/2))`, rewritten without hyperbolic functions so
/// it stays finite for any input magnitude.
#[inline]
fn combine_pair(a: f64, b: f64) -> f64 {
    let (p, q) = (a.abs(), b.abs());
    let mag = p.min(q) + ((1.0 + (-(p + q)).exp()) / (1.0 + (-(p - q).abs()).exp())).ln();
    let mag = mag.min(G_MAX);
    if (a < 0.0) != (b < 0.0) {
        -mag
    } else {
        mag
    }
}

/// In-place unnormalised Walsh-Hadamard transform:
/// `out[a] = sum_t (-1)^{popcount(a & t)} x[t]`.
pub fn fht_in_place(x: &mut [f64]) {
    let n = x.len();
    debug_assert!(n.is_power_of_two());
    let mut h = 1;
    while h < n {
        for block in x.chunks_exact_mut(2 * h) {
            let (lo, hi) = block.split_at_mut(h);
            for (a, b) in lo.iter_mut().zip(hi.iter_mut()) {
                let (p, q) = (*a, *b);
                *a = p + q;
                *b = p - q;
            }
        }
        h *= 2;
    }
}

/// Returns the gap between the best and second-best correlation.
fn first_order_ml(
    j: usize,
    g: &[f64],
    spectrum: &mut [f64],
    cw: &mut [u8],
    info: &mut [u8],
) -> f64 {
    spectrum.copy_from_slice(g);
    fht_in_place(spectrum);
    let mut best = 0usize;
    let mut best_abs = spectrum[0].abs();
    let mut second = f64::NEG_INFINITY;
    for (a, &f) in spectrum.iter().enumerate().skip(1) {
        let fa = f.abs();
        if fa > best_abs {
            second = best_abs;
            best_abs = fa;
            best = a;
        } else if fa > second {
            second = fa;
        }
    }
    // The complement of the winner correlates at -best_abs; the runner-up
    // is either that or the next largest magnitude.
    let margin = (best_abs - second.max(-best_abs)).min(2.0 * best_abs);
    let a0 = u8::from(spectrum[best] < 0.0);
    info[0] = a0;
    for (i, bit) in info[1..=j].iter_mut().enumerate() {
        *bit = ((best >> i) & 1) as u8;
    }
    for (t, z) in cw.iter_mut().enumerate() {
        *z = a0 ^ ((t & best).count_ones() & 1) as u8;
    }
    margin
}

/// Wagner rule. Returns the cost gap to the runner-up even-weight word.
fn spc_ml(g: &[f64], cw: &mut [u8], info: &mut [u8]) -> f64 {
    let mut parity = 0u8;
    let mut weakest = 0usize;
    let mut weakest_abs = f64::INFINITY;
    let mut second_abs = f64::INFINITY;
    for (i, (&gi, z)) in g.iter().zip(cw.iter_mut()).enumerate() {
        *z = hard_decision(gi);
        parity ^= *z;
        let a = gi.abs();
        if a < weakest_abs {
            second_abs = weakest_abs;
            weakest_abs = a;
            weakest = i;
        } else if a < second_abs {
            second_abs = a;
        }
    }
    let margin = if parity == 1 {
        cw[weakest] ^= 1;
        2.0 * (second_abs - weakest_abs)
    } else {
        2.0 * (weakest_abs + second_abs)
    };
    let last = cw.len() - 1;
    info.copy_from_slice(&cw[..last]);
    margin
}

fn repetition_ml(g: &[f64], cw: &mut [u8], info: &mut [u8]) -> f64 {
    let total: f64 = g.iter().sum();
    let bit = hard_decision(total);
    cw.fill(bit);
    info[0] = bit;
    2.0 * total.abs()
}

fn full_ml(g: &[f64], cw: &mut [u8], info: &mut [u8]) -> f64 {
    let mut margin = f64::INFINITY;
    for (&gi, z) in g.iter().zip(cw.iter_mut()) {
        *z = hard_decision(gi);
        margin = margin.min(2.0 * gi.abs());
    }
    info.copy_from_slice(cw);
    margin
}

pub fn decode(
    params: &CodeParams,
    y: &MetricVector,
    channel: &ChannelModel,
    frozen: &FrozenSpec,
) -> Result<DecodeResult> {
    Decoder::new(*params, frozen)?.decode(y, channel)
}

pub fn decode_hard(
    params: &CodeParams,
    received: &Codeword,
    p: f64,
    frozen: &FrozenSpec,
) -> Result<DecodeResult> {
    Decoder::new(*params, frozen)?.decode_hard(received, p)
}

/// Spread of the pairwise sums: `h*_i = h_{2i} h_{2i+1}`.
pub fn spread_combine(h: &[f64]) -> Vec<f64> {
    h.chunks_exact(2).map(|p| p[0] * p[1]).collect()
}

/// Likelihoods of `u` given `(u, u+v)` likelihoods and a decoded `v`.
pub fn likelihood_fold(g: &[f64], v: &[u8]) -> Result<Vec<f64>> {
    if g.len() != 2 * v.len() {
        return Err(Error::LengthMismatch {
            expected: 2 * v.len(),
            got: g.len(),
        });
    }
    Ok(g.chunks_exact(2)
        .zip(v)
        .map(|(p, &vi)| if vi == 0 { p[0] + p[1] } else { p[0] - p[1] })
        .collect())
}

/// ML decoding of RM(1, j). Info bits are `(a0, a1, ..., aj)`.
pub fn decode_first_order(j: usize, g: &[f64]) -> Result<(Codeword, Vec<u8>)> {
    if g.len() != 1 << j {
        return Err(Error::LengthMismatch {
            expected: 1 << j,
            got: g.len(),
        });
    }
    let mut spectrum = vec![0.0; g.len()];
    let mut cw = vec![0u8; g.len()];
    let mut info = vec![0u8; j + 1];
    first_order_ml(j, g, &mut spectrum, &mut cw, &mut info);
    Ok((Codeword(cw), info))
}

/// ML decoding of the length-`2^j` single-parity-check code.
pub fn decode_spc(j: usize, g: &[f64]) -> Result<(Codeword, Vec<u8>)> {
    if g.len() != 1 << j || j == 0 {
        return Err(Error::LengthMismatch {
            expected: 1 << j,
            got: g.len(),
        });
    }
    let mut cw = vec![0u8; g.len()];
    let mut info = vec![0u8; g.len() - 1];
    spc_ml(g, &mut cw, &mut info);
    Ok((Codeword(cw), info))
}

/// Exhaustive minimiser of `sum_{z_i != a_i} |g_i|`, `a` the hard decisions.
pub fn brute_force_ml(params: &CodeParams, g: &[f64]) -> Result<Codeword> {
    brute_force_ml_with_margin(params, g).map(|(cw, _)| cw)
}

/// Same as [`brute_force_ml`], also returning the cost gap to the runner-up.
/// Ties go to the smallest information vector read as a binary number with
/// the first bit most significant.
pub fn brute_force_ml_with_margin(params: &CodeParams, g: &[f64]) -> Result<(Codeword, f64)> {
    let k = params.k;
    if k > BRUTE_FORCE_MAX_K {
        return Err(Error::TooLarge {
            k,
            max: BRUTE_FORCE_MAX_K,
        });
    }
    if g.len() != params.n {
        return Err(Error::LengthMismatch {
            expected: params.n,
            got: g.len(),
        });
    }
    let hard: Vec<u8> = g.iter().map(|&x| hard_decision(x)).collect();
    let mut encoder = Encoder::new(*params);
    let mut info = vec![0u8; k];
    let mut word = vec![0u8; params.n];
    let mut best = (f64::INFINITY, Vec::new());
    let mut runner_up = f64::INFINITY;
    for idx in 0u32..(1u32 << k) {
        for (i, bit) in info.iter_mut().enumerate() {
            *bit = ((idx >> (k - 1 - i)) & 1) as u8;
        }
        encoder.encode_into(&info, &mut word)?;
        let cost: f64 = word
            .iter()
            .zip(&hard)
            .zip(g)
            .filter(|((z, a), _)| z != a)
            .map(|(_, gi)| gi.abs())
            .sum();
        if cost < best.0 {
            runner_up = best.0;
            best = (cost, word.clone());
        } else if cost < runner_up {
            runner_up = cost;
        }
    }
    Ok((Codeword(best.1), runner_up - best.0))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::channel::{spread, spread_to_likelihood, transmit_bpsk};
    use crate::rm_code::{code_params, encode_recursive};
    use proptest::prelude::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn random_bits(rng: &mut impl Rng, len: usize) -> Vec<u8> {
        (0..len).map(|_| rng.random_range(0..2u8)).collect()
    }

    fn random_g(rng: &mut impl Rng, len: usize, scale: f64) -> Vec<f64> {
        (0..len).map(|_| rng.random_range(-scale..scale)).collect()
    }

    fn sign_image(c: &Codeword) -> Vec<f64> {
        c.bits()
            .iter()
            .map(|&b| if b == 0 { 1.0 } else { -1.0 })
            .collect()
    }

    /// Correlation criterion, independent of the discrepancy form.
    fn best_by_correlation(params: &CodeParams, g: &[f64]) -> Codeword {
        let mut best = (f64::NEG_INFINITY, Codeword::default());
        for idx in 0u32..(1 << params.k) {
            let info: Vec<u8> = (0..params.k)
                .map(|i| ((idx >> (params.k - 1 - i)) & 1) as u8)
                .collect();
            let c = encode_recursive(params, &info).unwrap();
            let corr: f64 = c
                .bits()
                .iter()
                .zip(g)
                .map(|(&b, &x)| if b == 0 { x } else { -x })
                .sum();
            if corr > best.0 {
                best = (corr, c);
            }
        }
        best.1
    }

    #[test]
    fn spread_combine_examples() {
        let h = spread_combine(&[0.5, 0.8, -1.0, 1.0]);
        assert!((h[0] - 0.4).abs() < 1e-15 && h[1] == -1.0);
        assert_eq!(spread_combine(&[1.0; 8]), vec![1.0; 4]);
        assert_eq!(spread_combine(&[0.0, 0.9, 0.3, 0.0]), vec![0.0, 0.0]);
    }

    #[test]
    fn likelihood_fold_examples() {
        assert_eq!(likelihood_fold(&[2.0, 3.0], &[0]).unwrap(), vec![5.0]);
        assert_eq!(likelihood_fold(&[2.0, 3.0], &[1]).unwrap(), vec![-1.0]);
        assert_eq!(likelihood_fold(&[2.0, 0.0], &[1]).unwrap(), vec![2.0]);
        assert_eq!(likelihood_fold(&[2.0, 0.0], &[0]).unwrap(), vec![2.0]);
        assert!(likelihood_fold(&[1.0, 2.0, 3.0], &[0]).is_err());
    }

    #[test]
    fn first_order_examples() {
        let (cw, info) = decode_first_order(2, &[2.0, 2.0, 2.0, -1.0]).unwrap();
        assert_eq!(cw.to_string(), "0000");
        assert_eq!(info, vec![0, 0, 0]);
        let (cw, _) = decode_first_order(4, &[0.3; 16]).unwrap();
        assert_eq!(cw, Codeword::zeros(16));
        let p = code_params(4, 1).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for _ in 0..20 {
            let info = random_bits(&mut rng, 5);
            let c = encode_recursive(&p, &info).unwrap();
            let (dec, dec_info) = decode_first_order(4, &sign_image(&c)).unwrap();
            assert_eq!(dec, c);
            assert_eq!(dec_info, info);
        }
    }

    #[test]
    fn first_order_matches_exhaustive_correlation() {
        let mut rng = ChaCha8Rng::seed_from_u64(12);
        for j in 1..=4 {
            let p = code_params(j, 1).unwrap();
            for _ in 0..200 {
                let g = random_g(&mut rng, 1 << j, 3.0);
                let (cw, _) = decode_first_order(j, &g).unwrap();
                assert_eq!(cw, best_by_correlation(&p, &g));
            }
        }
    }

    #[test]
    fn spc_examples() {
        let (cw, info) = decode_spc(2, &[1.0, -0.5, 0.2, 2.0]).unwrap();
        assert_eq!(cw.to_string(), "0110");
        assert_eq!(info, vec![0, 1, 1]);
        let (cw, _) = decode_spc(3, &[0.4; 8]).unwrap();
        assert_eq!(cw, Codeword::zeros(8));
        let (cw, _) = decode_spc(2, &[-1.0, 1.0, -1.0, 1.0]).unwrap();
        assert_eq!(cw.to_string(), "1010");
    }

    #[test]
    fn spc_matches_exhaustive_even_weight_search() {
        let mut rng = ChaCha8Rng::seed_from_u64(13);
        for j in 1..=4usize {
            let n = 1 << j;
            for _ in 0..50 {
                let g = random_g(&mut rng, n, 2.0);
                let (cw, _) = decode_spc(j, &g).unwrap();
                let mut best = (f64::NEG_INFINITY, 0u32);
                for w in 0u32..(1 << n) {
                    if w.count_ones() % 2 == 1 {
                        continue;
                    }
                    let corr: f64 = (0..n)
                        .map(|i| if (w >> i) & 1 == 0 { g[i] } else { -g[i] })
                        .sum();
                    if corr > best.0 {
                        best = (corr, w);
                    }
                }
                let expect: Vec<u8> = (0..n).map(|i| ((best.1 >> i) & 1) as u8).collect();
                assert_eq!(cw.0, expect);
            }
        }
    }

    #[test]
    fn fht_energy_identity() {
        let mut rng = ChaCha8Rng::seed_from_u64(14);
        for j in 0..=12 {
            let x = random_g(&mut rng, 1 << j, 5.0);
            let mut f = x.clone();
            fht_in_place(&mut f);
            let lhs: f64 = f.iter().map(|v| v * v).sum();
            let rhs: f64 = (1 << j) as f64 * x.iter().map(|v| v * v).sum::<f64>();
            assert!((lhs - rhs).abs() <= 1e-9 * rhs.max(1.0));
        }
    }

    #[test]
    fn noiseless_round_trip_5_2() {
        let p = code_params(5, 2).unwrap();
        let ch = ChannelModel::awgn(0.8).unwrap();
        let mut dec = Decoder::new(p, &FrozenSpec::none()).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(15);
        for _ in 0..100 {
            let info = random_bits(&mut rng, p.k);
            let c = encode_recursive(&p, &info).unwrap();
            let res = dec.decode(&transmit_bpsk(&c), &ch).unwrap();
            assert_eq!(res.codeword, c);
            assert_eq!(res.info, info);
        }
    }

    #[test]
    fn whole_code_first_order_is_exact_ml() {
        let p = code_params(3, 1).unwrap();
        let ch = ChannelModel::awgn(1.0).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(16);
        for _ in 0..500 {
            let y = MetricVector::new(
                crate::channel::MetricForm::ReceivedY,
                random_g(&mut rng, 8, 2.0),
            );
            let res = decode(&p, &y, &ch, &FrozenSpec::none()).unwrap();
            let g = y.to_likelihoods(&ch).unwrap();
            assert_eq!(res.codeword, brute_force_ml(&p, &g).unwrap());
        }
    }

    #[test]
    fn terminal_roots_delegate() {
        let mut rng = ChaCha8Rng::seed_from_u64(17);
        for m in 3..=6 {
            let g = random_g(&mut rng, 1 << m, 2.0);
            let fo = Decoder::new(code_params(m, 1).unwrap(), &FrozenSpec::none())
                .unwrap()
                .decode_likelihoods(&g)
                .unwrap();
            let (cw, info) = decode_first_order(m, &g).unwrap();
            assert_eq!((fo.codeword, fo.info), (cw, info));
            let spc = Decoder::new(code_params(m, m - 1).unwrap(), &FrozenSpec::none())
                .unwrap()
                .decode_likelihoods(&g)
                .unwrap();
            let (cw, info) = decode_spc(m, &g).unwrap();
            assert_eq!((spc.codeword, spc.info), (cw, info));
        }
    }

    #[test]
    fn one_split_for_4_2() {
        // V-child (3,1) then U-child (3,2); both end nodes.
        let p = code_params(4, 2).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(18);
        let g = random_g(&mut rng, 16, 2.0);
        let res = Decoder::new(p, &FrozenSpec::none())
            .unwrap()
            .decode_likelihoods(&g)
            .unwrap();
        let h: Vec<f64> = g.iter().map(|&x| spread(x)).collect();
        let gv: Vec<f64> = spread_combine(&h)
            .iter()
            .map(|&x| spread_to_likelihood(x))
            .collect();
        let (v, iv) = decode_first_order(3, &gv).unwrap();
        let gu = likelihood_fold(&g, v.bits()).unwrap();
        let (u, iu) = decode_spc(3, &gu).unwrap();
        let mut z = vec![0u8; 16];
        interleave(u.bits(), v.bits(), &mut z);
        assert_eq!(res.codeword.0, z);
        assert_eq!(res.info, [iv, iu].concat());
        assert_eq!(res.node_outputs.len(), 2);
    }

    #[test]
    fn boundary_orders_at_root() {
        let rep = code_params(4, 0).unwrap();
        let mut dec = Decoder::new(rep, &FrozenSpec::none()).unwrap();
        let mut g = vec![0.5; 16];
        g[0] = -3.0;
        assert_eq!(dec.decode_likelihoods(&g).unwrap().info, vec![0]);
        g[1] = -3.0;
        g[2] = -3.0;
        assert_eq!(
            dec.decode_likelihoods(&g).unwrap().codeword,
            Codeword(vec![1; 16])
        );

        let full = code_params(2, 2).unwrap();
        let res = Decoder::new(full, &FrozenSpec::none())
            .unwrap()
            .decode_likelihoods(&[1.0, -1.0, -0.1, 0.0])
            .unwrap();
        assert_eq!(res.info, vec![0, 1, 1, 0]);
    }

    #[test]
    fn hard_decoding_corrects_single_errors_on_3_1() {
        let p = code_params(3, 1).unwrap();
        for idx in 0..16u8 {
            let info: Vec<u8> = (0..4).map(|i| (idx >> i) & 1).collect();
            let c = encode_recursive(&p, &info).unwrap();
            assert_eq!(
                decode_hard(&p, &c, 0.05, &FrozenSpec::none())
                    .unwrap()
                    .codeword,
                c
            );
            for pos in 0..8 {
                let mut r = c.clone();
                r.0[pos] ^= 1;
                let res = decode_hard(&p, &r, 0.05, &FrozenSpec::none()).unwrap();
                assert_eq!(res.codeword, c);
                assert_eq!(res.info, info);
            }
        }
    }

    #[test]
    fn brute_force_examples() {
        let p = code_params(4, 2).unwrap();
        assert_eq!(brute_force_ml(&p, &[0.7; 16]).unwrap(), Codeword::zeros(16));
        let c = encode_recursive(&p, &[1, 0, 1, 1, 0, 1, 0, 0, 1, 1, 0]).unwrap();
        assert_eq!(brute_force_ml(&p, &sign_image(&c)).unwrap(), c);
        assert!(brute_force_ml(&code_params(6, 2).unwrap(), &[0.0; 64]).is_err());
        assert!(brute_force_ml(&p, &[0.0; 8]).is_err());
    }

    #[test]
    fn brute_force_criteria_agree() {
        let p = code_params(4, 2).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(19);
        for _ in 0..1000 {
            let g = random_g(&mut rng, 16, 3.0);
            assert_eq!(brute_force_ml(&p, &g).unwrap(), best_by_correlation(&p, &g));
        }
    }

    #[test]
    fn frozen_nodes_decode_to_zero() {
        let p = code_params(7, 3).unwrap();
        let frozen = FrozenSpec::leftmost(&p, 2);
        let paths: Vec<String> = frozen.paths.iter().map(|p| p.to_string()).collect();
        assert_eq!(paths, vec!["VV".to_string(), "VUV".to_string()]);
        let mut dec = Decoder::new(p, &frozen).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(20);
        for _ in 0..50 {
            let g = random_g(&mut rng, p.n, 4.0);
            let res = dec.decode_likelihoods(&g).unwrap();
            for (path, bits) in &res.node_outputs {
                if frozen.paths.contains(path) {
                    assert!(bits.iter().all(|&b| b == 0));
                }
            }
            assert_eq!(encode_recursive(&p, &res.info).unwrap(), res.codeword);
        }
    }

    #[test]
    fn frozen_path_must_be_end_node() {
        let p = code_params(6, 3).unwrap();
        let bad = FrozenSpec::from_paths(["V".parse().unwrap()]);
        assert_eq!(
            Decoder::new(p, &bad).unwrap_err(),
            Error::InvalidFrozenPath("V".into())
        );
    }

    #[test]
    fn length_errors() {
        let p = code_params(4, 2).unwrap();
        let mut dec = Decoder::new(p, &FrozenSpec::none()).unwrap();
        assert!(dec.decode_likelihoods(&[0.0; 8]).is_err());
        assert!(dec.decode_hard(&Codeword::zeros(15), 0.1).is_err());
        assert!(decode_first_order(3, &[0.0; 4]).is_err());
        assert!(decode_spc(3, &[0.0; 4]).is_err());
    }

    fn covariance_holds(p: CodeParams, seed: u64) -> usize {
        let mut dec = Decoder::new(p, &FrozenSpec::none()).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut checked = 0;
        for _ in 0..1000 {
            let g = random_g(&mut rng, p.n, 3.0);
            let c = encode_recursive(&p, &random_bits(&mut rng, p.k)).unwrap();
            let base = dec.decode_likelihoods(&g).unwrap();
            let m1 = dec.last_margin();
            let flipped: Vec<f64> = g
                .iter()
                .zip(c.bits())
                .map(|(&x, &b)| if b == 1 { -x } else { x })
                .collect();
            let moved = dec.decode_likelihoods(&flipped).unwrap();
            if m1 < 1e-9 || dec.last_margin() < 1e-9 {
                continue;
            }
            assert_eq!(moved.codeword, base.codeword.xor(&c));
            checked += 1;
        }
        checked
    }

    #[test]
    fn codeword_translation_covariance() {
        assert!(covariance_holds(code_params(4, 2).unwrap(), 21) > 990);
        assert!(covariance_holds(code_params(5, 2).unwrap(), 22) > 990);
    }

    proptest! {
        #[test]
        fn pair_combine_matches_spread_product(a in -12.0f64..12.0, b in -12.0f64..12.0) {
            let expect = spread_to_likelihood(spread(a) * spread(b));
            let got = combine_pair(a, b);
            prop_assert!((got - expect).abs() < 1e-9 * (1.0 + expect.abs()), "{a} {b}: {got} vs {expect}");
            prop_assert_eq!(combine_pair(a, 0.0), 0.0);
            prop_assert!(combine_pair(1e6, -1e6) == -G_MAX);
            // Far from zero: min(|a|,|b|) - ln(1 + e^-||a|-|b||) up to e^-(|a|+|b|).
            let (x, y) = (a.abs() + 25.0, b.abs() + 25.0);
            let tail = x.min(y) - (-(x - y).abs()).exp().ln_1p();
            prop_assert!((combine_pair(x, -y) + tail.min(G_MAX)).abs() < 1e-12);
        }

        #[test]
        fn decoded_info_reencodes(m in 2usize..=8, r_frac in 0.0f64..=1.0, seed in any::<u64>()) {
            let r = ((m as f64) * r_frac).round() as usize;
            let p = code_params(m, r).unwrap();
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let g = random_g(&mut rng, p.n, 4.0);
            let res = Decoder::new(p, &FrozenSpec::none()).unwrap().decode_likelihoods(&g).unwrap();
            prop_assert_eq!(encode_recursive(&p, &res.info).unwrap(), res.codeword);
            let covered: usize = res.node_outputs.iter().map(|(_, b)| b.len()).sum();
            prop_assert_eq!(covered, p.k);
        }

        #[test]
        fn spread_product_shrinks(h in proptest::collection::vec(-1.0f64..=1.0, 2..64)) {
            let even = &h[..h.len() / 2 * 2];
            let out = spread_combine(even);
            prop_assert_eq!(out.len(), even.len() / 2);
            for (o, pair) in out.iter().zip(even.chunks_exact(2)) {
                prop_assert!(o.abs() <= pair[0].abs().min(pair[1].abs()));
            }
        }
    }
}
