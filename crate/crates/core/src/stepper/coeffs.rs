//! Composition coefficients `b_1..b_s` for midpoint sub-steps.
//!
//! Composing the midpoint rule with sub-steps `b_i h` is the diagonally
//! implicit symplectic Runge-Kutta method with `a_ii = b_i / 2` and
//! `a_ij = b_j` below the diagonal.

/// Three-stage fourth-order method.
pub fn disrk4() -> Vec<f64> {
    let c = 2f64.cbrt();
    let b1 = (c + 1.0 / c + 2.0) / 3.0;
    vec![b1, 1.0 - 2.0 * b1, b1]
}

const DISRK6_HALF: [f64; 6] = [
    0.6152247129651358,
    -0.9769283017304923,
    0.7756222228585488,
    1.1870793818191547,
    -1.1292359636503542,
    0.05647589547601459,
];

const C8_HALF: [f64; 8] = [
    0.7416703643506129,
    -0.4091008258000315,
    0.1907547102962383,
    -0.5738624711160822,
    0.2990641813036559,
    0.3346249182452981,
    0.3152930923967665,
    -0.7968879393529163,
];

/// Mirrors `half` around its last entry: `[a, b, c] -> [a, b, c, b, a]`.
pub fn palindrome(half: &[f64]) -> Vec<f64> {
    let mut out = half.to_vec();
    out.extend(half.iter().rev().skip(1));
    out
}

/// Eleven-stage sixth-order method.
pub fn disrk6() -> Vec<f64> {
    palindrome(&DISRK6_HALF)
}

/// Fifteen-stage eighth-order composition.
pub fn c8() -> Vec<f64> {
    palindrome(&C8_HALF)
}

pub fn is_palindromic(b: &[f64]) -> bool {
    b.iter().eq(b.iter().rev())
}
