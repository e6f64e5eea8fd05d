//! Max-min algebra on `[0, 1]`.

/// `a ∧ b`
#[inline]
pub fn meet(a: f64, b: f64) -> f64 {
    a.min(b)
}

/// `a ∨ b`
#[inline]
pub fn join(a: f64, b: f64) -> f64 {
    a.max(b)
}

/// `⋁ x_i`, zero for an empty sequence (the bottom of `[0, inf)`).
pub fn join_all<I: IntoIterator<Item = f64>>(xs: I) -> f64 {
    xs.into_iter().fold(0.0, f64::max)
}

/// `⋀ x_i`, `+inf` for an empty sequence.
pub fn meet_all<I: IntoIterator<Item = f64>>(xs: I) -> f64 {
    xs.into_iter().fold(f64::INFINITY, f64::min)
}

/// `⋁_i (c_i ∧ w_i)`: the max-min inner product.
pub fn max_min_product(coeffs: &[f64], weights: &[f64]) -> f64 {
    debug_assert_eq!(coeffs.len(), weights.len());
    coeffs
        .iter()
        .zip(weights)
        .fold(0.0, |acc, (&c, &w)| acc.max(c.min(w)))
}
