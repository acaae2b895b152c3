/// Keeps the backward contribution strictly inside its bucket.
pub const BUCKET_GUARD: f64 = 1e-6;

/// Index of the precision-sized bucket containing `raw`. Quotients within a
/// relative 1e-9 of an integer snap to it, so e.g. `2.41 / 0.01` lands in
/// bucket 241 rather than 240.
pub fn bucket_index(raw: f64, precision: f64) -> f64 {
    let q = raw / precision;
    let nearest = q.round();
    if (q - nearest).abs() <= 1e-9 * nearest.abs().max(1.0) {
        nearest
    } else {
        q.floor()
    }
}

/// Bucket-interpolation score: the raw objective, quantized to `precision`,
/// dominates; the backward score in `[0, 1]` only ranks within a bucket and
/// can never reach the next bucket boundary.
pub fn effective_score(raw_objective: f64, backward: f64, precision: f64) -> f64 {
    debug_assert!(precision > 0.0);
    let bucket = bucket_index(raw_objective, precision);
    bucket * precision + backward.clamp(0.0, 1.0) * precision * (1.0 - BUCKET_GUARD)
}
