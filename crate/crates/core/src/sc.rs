//! Successive-cancellation kernels shared by the list and Fano decoders.
//!
//! The decoders walk bits in natural order. For a node covering `2h` bits
//! whose encoding is `(a ^ b, b)`, the left child sees `f(l, r)` and the right
//! child sees `g(l, r, a)` once the left child's re-encoding `a` is known.

/// Check-node update `2 atanh(tanh(a/2) tanh(b/2))`, evaluated as the
/// min-sum value plus its two correction terms so it stays finite for large
/// magnitudes. The corrections break the exact ties min-sum produces on a
/// noiseless input, which matters for the list-based spectrum estimate.
#[inline]
pub fn f(a: f64, b: f64) -> f64 {
    let (x, y) = (a.abs(), b.abs());
    let m = x.min(y) + (-(x + y)).exp().ln_1p() - (-(x - y).abs()).exp().ln_1p();
    if (a < 0.0) != (b < 0.0) {
        -m
    } else {
        m
    }
}

/// Variable-node update given the left partial sum.
#[inline]
pub fn g(a: f64, b: f64, left: u8) -> f64 {
    if left == 0 {
        b + a
    } else {
        b - a
    }
}

/// Path-metric penalty for deciding `u` against the decision LLR.
#[inline]
pub fn penalty(llr: f64, u: u8) -> f64 {
    if (llr < 0.0) != (u == 1) {
        llr.abs()
    } else {
        0.0
    }
}

/// Feedback term of the pre-transform at position `i`: `XOR_{j in taps} v_{i-j}`.
#[inline]
pub fn conv_feedback(v: &[u8], taps: &[usize], i: usize) -> u8 {
    taps.iter()
        .take_while(|&&j| j <= i)
        .fold(0u8, |acc, &j| acc ^ v[i - j])
}

/// Offset of layer `layer` inside a compact per-path buffer of `N - 1` cells
/// (layer `λ` holds the `2^λ` values of the node currently being decoded).
#[inline]
pub fn layer_offset(layer: u32) -> usize {
    (1usize << layer) - 1
}

/// Brings the compact LLR tree up to date for bit `i` and returns its
/// decision LLR. `left` holds the re-encoded left siblings per layer.
pub fn compact_decision_llr(
    tree: &mut [f64],
    left: &[u8],
    channel: &[f64],
    i: usize,
    log_len: u32,
) -> f64 {
    if log_len == 0 {
        return channel[0];
    }
    let start = if i == 0 {
        log_len
    } else {
        let t = i.trailing_zeros();
        let h = 1usize << t;
        let (lower, upper) = tree.split_at_mut(layer_offset(t + 1));
        let parent = if t + 1 == log_len { channel } else { &upper[..2 * h] };
        let dst = &mut lower[layer_offset(t)..layer_offset(t) + h];
        let sums = &left[layer_offset(t)..layer_offset(t) + h];
        for j in 0..h {
            dst[j] = g(parent[j], parent[j + h], sums[j]);
        }
        t
    };
    for layer in (0..start).rev() {
        let h = 1usize << layer;
        let (lower, upper) = tree.split_at_mut(layer_offset(layer + 1));
        let parent = if layer + 1 == log_len { channel } else { &upper[..2 * h] };
        let dst = &mut lower[layer_offset(layer)..layer_offset(layer) + h];
        for j in 0..h {
            dst[j] = f(parent[j], parent[j + h]);
        }
    }
    tree[0]
}

/// Records decision `u` at bit `i`, folding completed right children into
/// their parents until a left child is stored. `scratch` must hold `N` cells.
pub fn compact_push_decision(left: &mut [u8], scratch: &mut [u8], i: usize, u: u8, log_len: u32) {
    scratch[0] = u;
    let mut len = 1usize;
    for layer in 0..log_len {
        let off = layer_offset(layer);
        if (i >> layer) & 1 == 0 {
            left[off..off + len].copy_from_slice(&scratch[..len]);
            return;
        }
        // scratch holds the right child b; the parent is (a ^ b, b)
        scratch.copy_within(0..len, len);
        for j in 0..len {
            scratch[j] = left[off + j] ^ scratch[len + j];
        }
        len *= 2;
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn kernels() {
        let boxplus = |a: f64, b: f64| 2.0 * ((a / 2.0).tanh() * (b / 2.0).tanh()).atanh();
        for (a, b) in [(3.0, -2.0), (-3.0, -2.0), (0.5, 0.25), (8.0, 8.0), (-1.0, 12.0)] {
            assert!((f(a, b) - boxplus(a, b)).abs() < 1e-9, "f({a}, {b})");
        }
        assert!((f(40.0, 40.0) - (40.0 - 2f64.ln())).abs() < 1e-9);
        assert_eq!(f(0.0, 5.0), 0.0);
        assert_eq!(g(3.0, -2.0, 0), 1.0);
        assert_eq!(g(3.0, -2.0, 1), -5.0);
        assert_eq!(penalty(2.0, 0), 0.0);
        assert_eq!(penalty(2.0, 1), 2.0);
        assert_eq!(penalty(-2.0, 0), 2.0);
        assert_eq!(penalty(0.0, 1), 0.0);
    }

    #[test]
    fn feedback_uses_only_past_bits() {
        let v = [1, 0, 1, 1];
        let taps = [1, 3];
        assert_eq!(conv_feedback(&v, &taps, 0), 0);
        assert_eq!(conv_feedback(&v, &taps, 1), 1);
        assert_eq!(conv_feedback(&v, &taps, 3), 0);
    }
}
