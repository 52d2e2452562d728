//! Small numeric helpers shared across modules.

/// Sum of `terms` with a rounding order that depends only on the multiset of
/// values, not on their positions. Addends are sorted by IEEE total order
/// before accumulation, so relabeling UAV indices cannot change the result
/// bit-for-bit. Every cross-UAV reduction in the crate goes through this.
pub fn canonical_sum(terms: impl IntoIterator<Item = f64>) -> f64 {
    let mut values: Vec<f64> = terms.into_iter().collect();
    values.sort_by(f64::total_cmp);
    values.iter().sum()
}
