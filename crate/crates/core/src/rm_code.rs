//! Reed-Muller code construction.
//!
//! RM(r, m) has length `n = 2^m`, dimension `k = sum_{i<=r} C(m, i)` and
//! minimum distance `d = 2^(m-r)`. Codewords are built with the Plotkin
//! `(u, u+v)` construction applied to adjacent position pairs: the `u`
//! subcodeword sits on odd positions and `u + v` on even positions
//! (1-based), so `z[2s] = u[s]` and `z[2s+1] = u[s] ^ v[s]` with 0-based
//! indices. `u` belongs to RM(r, m-1) and `v` to RM(r-1, m-1).
//!
//! Splitting stops at first-order nodes `(j, 1)` and single-parity-check
//! nodes `(j, j-1)`. The information vector is the concatenation of the
//! end-node information strings in depth-first order, V-subtree first.

use std::fmt;
use std::str::FromStr;

use itertools::Itertools;
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::{Error, Result};

/// Largest supported number of variables; `2^26` positions per block.
pub const MAX_M: usize = 26;

/// Exhaustive enumeration limit for [`min_distance_bruteforce`].
pub const BRUTE_FORCE_MAX_K: usize = 16;

/// Parameters of RM(r, m).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
pub struct CodeParams {
    pub m: usize,
    pub r: usize,
    pub n: usize,
    pub k: usize,
    pub d: usize,
}

impl CodeParams {
    pub fn new(m: usize, r: usize) -> Result<Self> {
        if m == 0 {
            return Err(Error::InvalidParams {
                m,
                r,
                reason: "m must be at least 1",
            });
        }
        if r > m {
            return Err(Error::InvalidParams {
                m,
                r,
                reason: "order r exceeds m",
            });
        }
        if m > MAX_M {
            return Err(Error::InvalidParams {
                m,
                r,
                reason: "m exceeds the supported maximum of 26",
            });
        }
        Ok(Self {
            m,
            r,
            n: 1 << m,
            k: dimension(m, r),
            d: 1 << (m - r),
        })
    }

    pub fn rate(&self) -> f64 {
        self.k as f64 / self.n as f64
    }
}

/// Shorthand for [`CodeParams::new`].
pub fn code_params(m: usize, r: usize) -> Result<CodeParams> {
    CodeParams::new(m, r)
}

/// `sum_{i=0}^{r} C(m, i)`, clamped to `r <= m`.
pub fn dimension(m: usize, r: usize) -> usize {
    let mut total = 0usize;
    let mut binom = 1usize;
    for i in 0..=r.min(m) {
        total += binom;
        binom = binom * (m - i) / (i + 1);
    }
    total
}

/// One edge of the Plotkin recursion.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Branch {
    /// `(j, s) -> (j-1, s-1)`: the better protected `v` component.
    V,
    /// `(j, s) -> (j-1, s)`: the `u` component.
    U,
}

/// A sequence of branches from the root of the recursion.
#[derive(Debug, Clone, Default, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct NodePath(pub Vec<Branch>);

impl NodePath {
    pub fn root() -> Self {
        Self(Vec::new())
    }

    pub fn child(&self, b: Branch) -> Self {
        let mut steps = self.0.clone();
        steps.push(b);
        Self(steps)
    }

    /// Resolve the `(j, s)` node reached from the root `(m, r)`.
    pub fn resolve(&self, m: usize, r: usize) -> Option<(usize, usize)> {
        let (mut j, mut s) = (m, r);
        for b in &self.0 {
            if j == 0 {
                return None;
            }
            match b {
                Branch::V => {
                    if s == 0 {
                        return None;
                    }
                    j -= 1;
                    s -= 1;
                }
                Branch::U => {
                    if s > j - 1 {
                        return None;
                    }
                    j -= 1;
                }
            }
        }
        Some((j, s))
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }
}

impl fmt::Display for NodePath {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.0.is_empty() {
            return f.write_str("root");
        }
        for b in &self.0 {
            f.write_str(match b {
                Branch::V => "V",
                Branch::U => "U",
            })?;
        }
        Ok(())
    }
}

impl FromStr for NodePath {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let s = s.trim();
        if s.eq_ignore_ascii_case("root") || s.is_empty() {
            return Ok(Self::root());
        }
        s.chars()
            .map(|c| match c {
                'V' | 'v' => Ok(Branch::V),
                'U' | 'u' => Ok(Branch::U),
                other => Err(Error::Parse(format!(
                    "bad branch label {other:?} in node path {s:?}"
                ))),
            })
            .collect::<Result<Vec<_>>>()
            .map(Self)
    }
}

impl Serialize for NodePath {
    fn serialize<S: Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        serializer.collect_str(self)
    }
}

impl<'de> Deserialize<'de> for NodePath {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> std::result::Result<Self, D::Error> {
        let s = String::deserialize(deserializer)?;
        s.parse().map_err(serde::de::Error::custom)
    }
}

/// Which ML decoder (and encoder) handles a terminal node.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum NodeKind {
    /// `(j, 1)`: affine functions of `j` variables, `j + 1` bits.
    FirstOrder,
    /// `(j, j-1)`: even-weight words, `2^j - 1` bits.
    ParityCheck,
    /// `(j, 0)`, only as a root.
    Repetition,
    /// `(j, j)`, only as a root.
    Full,
}

/// Terminal test for node `(j, s)`. `None` means the node is split further.
pub fn terminal_kind(j: usize, s: usize) -> Option<NodeKind> {
    if s == j {
        Some(NodeKind::Full)
    } else if s == 0 {
        Some(NodeKind::Repetition)
    } else if s == 1 {
        Some(NodeKind::FirstOrder)
    } else if s + 1 == j {
        Some(NodeKind::ParityCheck)
    } else {
        None
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct EndNode {
    pub path: NodePath,
    pub j: usize,
    pub s: usize,
    pub kind: NodeKind,
    pub offset: usize,
    pub bit_count: usize,
}

impl EndNode {
    pub fn range(&self) -> std::ops::Range<usize> {
        self.offset..self.offset + self.bit_count
    }
}

/// End nodes in information-vector order.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct InfoLayout {
    pub nodes: Vec<EndNode>,
    pub k: usize,
}

impl InfoLayout {
    pub fn position(&self, path: &NodePath) -> Option<usize> {
        self.nodes.iter().position(|node| &node.path == path)
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }
}

pub fn info_layout(params: &CodeParams) -> InfoLayout {
    fn walk(j: usize, s: usize, path: NodePath, offset: &mut usize, out: &mut Vec<EndNode>) {
        if let Some(kind) = terminal_kind(j, s) {
            let bit_count = dimension(j, s);
            out.push(EndNode {
                path,
                j,
                s,
                kind,
                offset: *offset,
                bit_count,
            });
            *offset += bit_count;
            return;
        }
        walk(j - 1, s - 1, path.child(Branch::V), offset, out);
        walk(j - 1, s, path.child(Branch::U), offset, out);
    }

    let mut nodes = Vec::new();
    let mut offset = 0;
    walk(
        params.m,
        params.r,
        NodePath::root(),
        &mut offset,
        &mut nodes,
    );
    debug_assert_eq!(offset, params.k);
    InfoLayout { nodes, k: offset }
}

/// A binary word, one `0`/`1` byte per position.
#[derive(Debug, Clone, Default, PartialEq, Eq, Hash)]
pub struct Codeword(pub Vec<u8>);

impl Codeword {
    pub fn zeros(n: usize) -> Self {
        Self(vec![0; n])
    }

    pub fn bits(&self) -> &[u8] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn weight(&self) -> usize {
        self.0.iter().filter(|&&b| b != 0).count()
    }

    pub fn xor(&self, other: &Codeword) -> Codeword {
        Codeword(self.0.iter().zip(&other.0).map(|(a, b)| a ^ b).collect())
    }
}

impl From<Vec<u8>> for Codeword {
    fn from(bits: Vec<u8>) -> Self {
        Self(bits)
    }
}

impl fmt::Display for Codeword {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&bits_to_string(&self.0))
    }
}

impl FromStr for Codeword {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        parse_bits(s).map(Self)
    }
}

pub fn bits_to_string(bits: &[u8]) -> String {
    bits.iter()
        .map(|&b| if b == 0 { '0' } else { '1' })
        .collect()
}

/// Parse a `0`/`1` string, position 1 leftmost.
pub fn parse_bits(s: &str) -> Result<Vec<u8>> {
    s.trim()
        .chars()
        .map(|c| match c {
            '0' => Ok(0),
            '1' => Ok(1),
            other => Err(Error::Parse(format!(
                "unexpected character {other:?} in bit string"
            ))),
        })
        .collect()
}

/// Parse a bit file: one word per line, blank lines and `#` comments skipped.
pub fn parse_bit_lines(text: &str) -> Result<Vec<Vec<u8>>> {
    text.lines()
        .map(str::trim)
        .filter(|l| !l.is_empty() && !l.starts_with('#'))
        .map(parse_bits)
        .collect()
}

fn encode_end_node(kind: NodeKind, j: usize, info: &[u8], out: &mut [u8]) {
    match kind {
        NodeKind::FirstOrder => {
            let a0 = info[0] & 1;
            let mask = info[1..=j]
                .iter()
                .enumerate()
                .fold(0usize, |acc, (i, &a)| acc | (((a & 1) as usize) << i));
            for (t, z) in out.iter_mut().enumerate() {
                *z = a0 ^ ((t & mask).count_ones() & 1) as u8;
            }
        }
        NodeKind::ParityCheck => {
            let last = out.len() - 1;
            let mut parity = 0u8;
            for (z, &a) in out[..last].iter_mut().zip(info) {
                *z = a & 1;
                parity ^= *z;
            }
            out[last] = parity;
        }
        NodeKind::Repetition => out.fill(info[0] & 1),
        NodeKind::Full => {
            for (z, &a) in out.iter_mut().zip(info) {
                *z = a & 1;
            }
        }
    }
}

/// `scratch` must be at least as long as `out`.
fn encode_node(j: usize, s: usize, info: &[u8], out: &mut [u8], scratch: &mut [u8]) {
    if let Some(kind) = terminal_kind(j, s) {
        encode_end_node(kind, j, info, out);
        return;
    }
    let half = out.len() / 2;
    let kv = dimension(j - 1, s - 1);
    let (v, u) = scratch[..2 * half].split_at_mut(half);
    {
        let (sv, su) = out.split_at_mut(half);
        encode_node(j - 1, s - 1, &info[..kv], v, sv);
        encode_node(j - 1, s, &info[kv..], u, su);
    }
    interleave(u, v, out);
}

/// `z[2i] = u[i]`, `z[2i+1] = u[i] ^ v[i]`.
pub(crate) fn interleave(u: &[u8], v: &[u8], out: &mut [u8]) {
    for ((pair, &ui), &vi) in out.chunks_exact_mut(2).zip(u).zip(v) {
        pair[0] = ui;
        pair[1] = ui ^ vi;
    }
}

/// Reusable recursive encoder that keeps its scratch buffer between calls.
#[derive(Debug, Clone)]
pub struct Encoder {
    params: CodeParams,
    scratch: Vec<u8>,
}

impl Encoder {
    pub fn new(params: CodeParams) -> Self {
        Self {
            params,
            scratch: vec![0; params.n],
        }
    }

    pub fn params(&self) -> &CodeParams {
        &self.params
    }

    pub fn encode_into(&mut self, info: &[u8], out: &mut [u8]) -> Result<()> {
        if info.len() != self.params.k {
            return Err(Error::LengthMismatch {
                expected: self.params.k,
                got: info.len(),
            });
        }
        if out.len() != self.params.n {
            return Err(Error::LengthMismatch {
                expected: self.params.n,
                got: out.len(),
            });
        }
        encode_node(self.params.m, self.params.r, info, out, &mut self.scratch);
        Ok(())
    }
}

pub fn encode_recursive(params: &CodeParams, info: &[u8]) -> Result<Codeword> {
    let mut out = vec![0u8; params.n];
    Encoder::new(*params).encode_into(info, &mut out)?;
    Ok(Codeword(out))
}

/// Variable masks of all monomials of degree `<= r` in `m` variables,
/// ordered by degree and then lexicographically. Bit `i` of a mask stands
/// for variable `x_{i+1}`.
pub fn monomials(m: usize, r: usize) -> Vec<u32> {
    (0..=r.min(m))
        .flat_map(|deg| {
            (0..m)
                .combinations(deg)
                .map(|vars| vars.iter().fold(0u32, |acc, &v| acc | (1 << v)))
        })
        .collect()
}

/// Evaluate `sum_S coeffs[S] * prod_{i in S} x_i` at every point `t`, where
/// `x_i` is bit `i-1` of `t`.
pub fn encode_monomial(params: &CodeParams, coeffs: &[u8]) -> Result<Codeword> {
    if coeffs.len() != params.k {
        return Err(Error::LengthMismatch {
            expected: params.k,
            got: coeffs.len(),
        });
    }
    let mut out = vec![0u8; params.n];
    for (&mask, _) in monomials(params.m, params.r)
        .iter()
        .zip(coeffs)
        .filter(|(_, &c)| c & 1 == 1)
    {
        let mask = mask as usize;
        for (t, z) in out.iter_mut().enumerate() {
            if t & mask == mask {
                *z ^= 1;
            }
        }
    }
    Ok(Codeword(out))
}

/// Membership test through the dual code RM(m-r-1, m): the word must have
/// even overlap with every monomial of degree `<= m-r-1`.
pub fn dual_check(params: &CodeParams, word: &Codeword) -> bool {
    if word.len() != params.n {
        return false;
    }
    if params.r == params.m {
        return true;
    }
    let max_deg = params.m - params.r - 1;
    // f[S] = xor of word[t] over all t that contain S.
    let mut f: Vec<u8> = word.0.iter().map(|b| b & 1).collect();
    for b in 0..params.m {
        let bit = 1usize << b;
        for t in 0..params.n {
            if t & bit == 0 {
                f[t] ^= f[t | bit];
            }
        }
    }
    f.iter()
        .enumerate()
        .all(|(mask, &x)| x == 0 || mask.count_ones() as usize > max_deg)
}

/// Minimum weight over all nonzero codewords, by exhaustive enumeration.
pub fn min_distance_bruteforce(params: &CodeParams) -> Result<usize> {
    min_distance_exhaustive(params, BRUTE_FORCE_MAX_K)
}

/// Gray-code walk over all `2^k - 1` nonzero information vectors, using
/// linearity of the recursive encoder. `max_k` bounds the work.
pub fn min_distance_exhaustive(params: &CodeParams, max_k: usize) -> Result<usize> {
    let k = params.k;
    if k > max_k || k >= 64 {
        return Err(Error::TooLarge {
            k,
            max: max_k.min(63),
        });
    }
    let words = params.n.div_ceil(64);
    let mut encoder = Encoder::new(*params);
    let mut info = vec![0u8; k];
    let mut bits = vec![0u8; params.n];
    let mut basis = Vec::with_capacity(k);
    for i in 0..k {
        info.fill(0);
        info[i] = 1;
        encoder.encode_into(&info, &mut bits)?;
        let mut packed = vec![0u64; words];
        for (t, &b) in bits.iter().enumerate() {
            packed[t / 64] |= (b as u64) << (t % 64);
        }
        basis.push(packed);
    }

    let mut best = usize::MAX;
    if words == 1 {
        let basis: Vec<u64> = basis.iter().map(|w| w[0]).collect();
        let mut cur = 0u64;
        for step in 1u64..(1u64 << k) {
            cur ^= basis[step.trailing_zeros() as usize];
            best = best.min(cur.count_ones() as usize);
        }
    } else {
        let mut cur = vec![0u64; words];
        for step in 1u64..(1u64 << k) {
            let row = &basis[step.trailing_zeros() as usize];
            let mut weight = 0usize;
            for (c, r) in cur.iter_mut().zip(row) {
                *c ^= r;
                weight += c.count_ones() as usize;
            }
            best = best.min(weight);
        }
    }
    Ok(best)
}
