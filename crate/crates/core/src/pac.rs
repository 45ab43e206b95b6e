//! PAC encoding primitives.
//!
//! A PAC code of length `N = 2^n` is defined by a rate profile (the set of
//! information positions in the data-carrier vector `v`) and a connection
//! polynomial `c(x)`. Encoding is `x = (v T) F^{⊗n}` where `T` is the upper
//! triangular Toeplitz matrix built from `c(x)` and `F = [[1,0],[1,1]]`.
//!
//! Positions are 0-based here; position 0 is the first bit of the block and
//! the most significant bit of the first hex digit of a printed profile.

use std::fmt;
use std::ops::{BitXor, Deref, DerefMut};
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// A fixed-length binary word, one `u8` (0 or 1) per bit.
#[derive(Clone, PartialEq, Eq, Hash, Default)]
pub struct BitWord(Vec<u8>);

impl BitWord {
    pub fn zeros(len: usize) -> Self {
        Self(vec![0; len])
    }

    /// Builds a word from arbitrary bytes, keeping only the low bit of each.
    pub fn from_bits<I: IntoIterator<Item = u8>>(bits: I) -> Self {
        Self(bits.into_iter().map(|b| b & 1).collect())
    }

    pub fn weight(&self) -> usize {
        self.0.iter().map(|&b| b as usize).sum()
    }

    pub fn into_inner(self) -> Vec<u8> {
        self.0
    }
}

impl Deref for BitWord {
    type Target = [u8];
    fn deref(&self) -> &[u8] {
        &self.0
    }
}

impl DerefMut for BitWord {
    fn deref_mut(&mut self) -> &mut [u8] {
        &mut self.0
    }
}

impl From<Vec<u8>> for BitWord {
    fn from(bits: Vec<u8>) -> Self {
        Self::from_bits(bits)
    }
}

impl BitXor for &BitWord {
    type Output = BitWord;
    fn bitxor(self, rhs: &BitWord) -> BitWord {
        assert_eq!(self.len(), rhs.len(), "xor of words with different lengths");
        BitWord(self.0.iter().zip(&rhs.0).map(|(a, b)| a ^ b).collect())
    }
}

impl fmt::Debug for BitWord {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "BitWord({self})")
    }
}

impl fmt::Display for BitWord {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for &b in &self.0 {
            f.write_str(if b == 0 { "0" } else { "1" })?;
        }
        Ok(())
    }
}

impl FromStr for BitWord {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        s.trim()
            .chars()
            .filter(|c| !matches!(c, ',' | ' ' | '_'))
            .map(|c| match c {
                '0' => Ok(0),
                '1' => Ok(1),
                other => Err(Error::Parse(format!("unexpected bit character {other:?}"))),
            })
            .collect::<Result<Vec<u8>>>()
            .map(BitWord)
    }
}

/// The information set of a PAC code as a length-`N` mask.
#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct RateProfile {
    log_len: u32,
    mask: Vec<bool>,
}

impl RateProfile {
    pub fn new(mask: Vec<bool>) -> Result<Self> {
        let len = mask.len();
        if len == 0 || !len.is_power_of_two() {
            return Err(Error::Shape(format!(
                "profile length {len} is not a power of two"
            )));
        }
        Ok(Self {
            log_len: len.trailing_zeros(),
            mask,
        })
    }

    pub fn frozen(len: usize) -> Result<Self> {
        Self::new(vec![false; len])
    }

    pub fn from_positions(len: usize, positions: &[usize]) -> Result<Self> {
        let mut mask = vec![false; len];
        for &p in positions {
            if p >= len {
                return Err(Error::Shape(format!("position {p} outside block of {len}")));
            }
            mask[p] = true;
        }
        Self::new(mask)
    }

    /// Parses a profile printed as hex, most significant bit first.
    pub fn from_hex(s: &str, len: usize) -> Result<Self> {
        let s = s.trim();
        if !len.is_multiple_of(4) || s.len() != len / 4 {
            return Err(Error::Parse(format!(
                "expected {} hex digits for N={len}, got {}",
                len / 4,
                s.len()
            )));
        }
        let mut mask = Vec::with_capacity(len);
        for c in s.chars() {
            let nibble = c
                .to_digit(16)
                .ok_or_else(|| Error::Parse(format!("bad hex digit {c:?}")))?;
            mask.extend((0..4).rev().map(|b| (nibble >> b) & 1 == 1));
        }
        Self::new(mask)
    }

    /// Parses a hex profile, inferring `N = 4 * digits`.
    pub fn parse_hex(s: &str) -> Result<Self> {
        let s = s.trim();
        Self::from_hex(s, 4 * s.len())
    }

    /// Emits the profile as upper-case hex. Lengths below 4 are padded with
    /// frozen positions on the right.
    pub fn to_hex(&self) -> String {
        self.mask
            .chunks(4)
            .map(|chunk| {
                let nibble = (0..4).fold(0u32, |acc, b| {
                    (acc << 1) | chunk.get(b).copied().unwrap_or(false) as u32
                });
                char::from_digit(nibble, 16).unwrap().to_ascii_uppercase()
            })
            .collect()
    }

    pub fn len(&self) -> usize {
        self.mask.len()
    }

    pub fn is_empty(&self) -> bool {
        self.mask.is_empty()
    }

    pub fn log_len(&self) -> u32 {
        self.log_len
    }

    /// Number of information bits `K`.
    pub fn dimension(&self) -> usize {
        self.mask.iter().filter(|&&b| b).count()
    }

    pub fn rate(&self) -> f64 {
        self.dimension() as f64 / self.len() as f64
    }

    pub fn mask(&self) -> &[bool] {
        &self.mask
    }

    pub fn is_info(&self, i: usize) -> bool {
        self.mask[i]
    }

    pub fn info_positions(&self) -> Vec<usize> {
        (0..self.len()).filter(|&i| self.mask[i]).collect()
    }

    pub fn flip(&mut self, i: usize) {
        self.mask[i] = !self.mask[i];
    }

    pub fn set(&mut self, i: usize, info: bool) {
        self.mask[i] = info;
    }

    /// Number of information bits in each of `segments` equal-length blocks.
    pub fn segment_counts(&self, segments: usize) -> Vec<usize> {
        let seg_len = self.len() / segments;
        self.mask
            .chunks(seg_len)
            .map(|c| c.iter().filter(|&&b| b).count())
            .collect()
    }
}

impl fmt::Debug for RateProfile {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "RateProfile(N={}, K={}, {})", self.len(), self.dimension(), self.to_hex())
    }
}

impl Serialize for RateProfile {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.serialize_str(&self.to_hex())
    }
}

impl<'de> Deserialize<'de> for RateProfile {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let s = String::deserialize(d)?;
        RateProfile::parse_hex(&s).map_err(serde::de::Error::custom)
    }
}

/// How the coefficients of `c(x)` fill the first row of the Toeplitz matrix `T`.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Hash)]
pub enum TapOrder {
    /// First row `(c_m, ..., c_1, c_0, 0, ...)`: `u_i = XOR_j c_j v_{i-(m-j)}`.
    /// The bundled profiles were constructed under this order.
    #[default]
    HighFirst,
    /// First row `(c_0, c_1, ..., c_m, 0, ...)`: `u_i = XOR_j c_j v_{i-j}`.
    LowFirst,
}

impl TapOrder {
    fn suffix(self) -> &'static str {
        match self {
            TapOrder::HighFirst => "high-first",
            TapOrder::LowFirst => "low-first",
        }
    }
}

/// Binary connection polynomial `c(x) = c_0 + c_1 x + ... + c_m x^m`.
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct ConnectionPolynomial {
    coeffs: Vec<u8>,
    order: TapOrder,
}

impl ConnectionPolynomial {
    pub fn new(coeffs: Vec<u8>) -> Result<Self> {
        if coeffs.is_empty() {
            return Err(Error::Polynomial("no coefficients".into()));
        }
        if coeffs.iter().any(|&c| c > 1) {
            return Err(Error::Polynomial("coefficients must be 0 or 1".into()));
        }
        if coeffs[0] != 1 || coeffs[coeffs.len() - 1] != 1 {
            return Err(Error::Polynomial("c_0 and c_m must both be 1".into()));
        }
        Ok(Self {
            coeffs,
            order: TapOrder::default(),
        })
    }

    /// Builds `c(x)` from the exponents of its nonzero terms.
    pub fn from_exponents(exponents: &[usize]) -> Result<Self> {
        let degree = exponents.iter().copied().max().unwrap_or(0);
        let mut coeffs = vec![0; degree + 1];
        for &e in exponents {
            coeffs[e] = 1;
        }
        Self::new(coeffs)
    }

    /// `c(x) = 1` (plain polar coding).
    pub fn identity() -> Self {
        Self {
            coeffs: vec![1],
            order: TapOrder::default(),
        }
    }

    pub fn with_order(mut self, order: TapOrder) -> Self {
        self.order = order;
        self
    }

    pub fn order(&self) -> TapOrder {
        self.order
    }

    pub fn degree(&self) -> usize {
        self.coeffs.len() - 1
    }

    pub fn coeffs(&self) -> &[u8] {
        &self.coeffs
    }

    /// `g[k]` multiplies `v_{i-k}` in `u_i`; `g[0] = 1`.
    pub fn delay_weights(&self) -> Vec<u8> {
        match self.order {
            TapOrder::LowFirst => self.coeffs.clone(),
            TapOrder::HighFirst => self.coeffs.iter().rev().copied().collect(),
        }
    }

    /// Delays `k >= 1` with `g[k] = 1`, ascending; the shift-register taps.
    pub fn taps(&self) -> Vec<usize> {
        let g = self.delay_weights();
        (1..g.len()).filter(|&k| g[k] == 1).collect()
    }
}

impl Default for ConnectionPolynomial {
    /// `1 + x^3 + x^7 + x^9 + x^10`.
    fn default() -> Self {
        Self::from_exponents(&[0, 3, 7, 9, 10]).unwrap()
    }
}

impl FromStr for ConnectionPolynomial {
    type Err = Error;
    /// Ascending coefficient string, `c_0` first, optionally followed by
    /// `:high-first` or `:low-first`.
    fn from_str(s: &str) -> Result<Self> {
        let (digits, order) = match s.trim().split_once(':') {
            None => (s.trim(), TapOrder::default()),
            Some((d, "high-first")) => (d, TapOrder::HighFirst),
            Some((d, "low-first")) => (d, TapOrder::LowFirst),
            Some((_, other)) => return Err(Error::Polynomial(format!("unknown tap order {other:?}"))),
        };
        let coeffs = digits
            .chars()
            .map(|c| match c {
                '0' => Ok(0),
                '1' => Ok(1),
                other => Err(Error::Polynomial(format!("unexpected character {other:?}"))),
            })
            .collect::<Result<Vec<u8>>>()?;
        Ok(Self::new(coeffs)?.with_order(order))
    }
}

impl fmt::Display for ConnectionPolynomial {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for &c in &self.coeffs {
            f.write_str(if c == 0 { "0" } else { "1" })?;
        }
        if self.order != TapOrder::default() {
            write!(f, ":{}", self.order.suffix())?;
        }
        Ok(())
    }
}

impl fmt::Debug for ConnectionPolynomial {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "ConnectionPolynomial({self})")
    }
}

impl Serialize for ConnectionPolynomial {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.serialize_str(&self.to_string())
    }
}

impl<'de> Deserialize<'de> for ConnectionPolynomial {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let s = String::deserialize(d)?;
        s.parse().map_err(serde::de::Error::custom)
    }
}

/// Places `data` on the information positions; frozen positions are 0.
pub fn insert_data(data: &[u8], profile: &RateProfile) -> Result<BitWord> {
    let k = profile.dimension();
    if data.len() != k {
        return Err(Error::Shape(format!(
            "data has {} bits but the profile carries {k}",
            data.len()
        )));
    }
    let mut v = BitWord::zeros(profile.len());
    for (pos, &bit) in profile.info_positions().iter().zip(data) {
        v[*pos] = bit & 1;
    }
    Ok(v)
}

/// Extracts the information bits of a data-carrier vector.
pub fn extract_data(v: &[u8], profile: &RateProfile) -> BitWord {
    BitWord::from_bits(profile.info_positions().into_iter().map(|i| v[i]))
}

/// The `T`-matrix pre-transform `u_i = XOR_k g_k v_{i-k}` (see
/// [`ConnectionPolynomial::delay_weights`]), truncated at the block end.
pub fn convolve(v: &[u8], poly: &ConnectionPolynomial) -> BitWord {
    let c = poly.delay_weights();
    BitWord::from_bits((0..v.len()).map(|i| {
        c.iter()
            .take(i + 1)
            .enumerate()
            .fold(0u8, |acc, (j, &cj)| acc ^ (cj & v[i - j]))
    }))
}

/// Inverts [`convolve`] by back-substitution (`c_0 = 1`).
pub fn deconvolve(u: &[u8], poly: &ConnectionPolynomial) -> BitWord {
    let taps = poly.taps();
    let mut v = vec![0u8; u.len()];
    for i in 0..u.len() {
        let mut bit = u[i] & 1;
        for &j in taps.iter().take_while(|&&j| j <= i) {
            bit ^= v[i - j];
        }
        v[i] = bit;
    }
    BitWord(v)
}

/// In-place `x = u F^{⊗n}` over GF(2).
pub fn polar_transform_in_place(bits: &mut [u8]) -> Result<()> {
    let len = bits.len();
    if len == 0 || !len.is_power_of_two() {
        return Err(Error::Shape(format!("length {len} is not a power of two")));
    }
    let mut half = 1;
    while half < len {
        for block in bits.chunks_exact_mut(2 * half) {
            let (lo, hi) = block.split_at_mut(half);
            for (a, b) in lo.iter_mut().zip(hi.iter()) {
                *a ^= *b;
            }
        }
        half *= 2;
    }
    Ok(())
}

pub fn polar_transform(u: &[u8]) -> Result<BitWord> {
    let mut x = BitWord(u.to_vec());
    polar_transform_in_place(&mut x)?;
    Ok(x)
}

/// Full PAC encoding of a `K`-bit data word.
pub fn pac_encode(
    data: &[u8],
    profile: &RateProfile,
    poly: &ConnectionPolynomial,
) -> Result<BitWord> {
    let v = insert_data(data, profile)?;
    let u = convolve(&v, poly);
    polar_transform(&u)
}

/// Re-encodes a full data-carrier vector `v` into its codeword `x = v G`.
pub fn encode_carrier(v: &[u8], poly: &ConnectionPolynomial) -> Result<BitWord> {
    let mut u = convolve(v, poly);
    polar_transform_in_place(&mut u)?;
    Ok(u)
}

/// A PAC code: a rate profile together with its pre-transform.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct PacCode {
    pub profile: RateProfile,
    pub poly: ConnectionPolynomial,
}

impl PacCode {
    pub fn new(profile: RateProfile, poly: ConnectionPolynomial) -> Self {
        Self { profile, poly }
    }

    pub fn len(&self) -> usize {
        self.profile.len()
    }

    pub fn is_empty(&self) -> bool {
        self.profile.is_empty()
    }

    pub fn dimension(&self) -> usize {
        self.profile.dimension()
    }

    pub fn rate(&self) -> f64 {
        self.profile.rate()
    }

    pub fn encode(&self, data: &[u8]) -> Result<BitWord> {
        pac_encode(data, &self.profile, &self.poly)
    }
}
