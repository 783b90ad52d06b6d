/// Pairwise sum whose bracketing depends only on `values.len()`.
pub fn tree_sum(values: &[f64]) -> f64 {
    match values.len() {
        0 => 0.0,
        1 => values[0],
        2 => values[0] + values[1],
        n => {
            let (lo, hi) = values.split_at(n / 2);
            tree_sum(lo) + tree_sum(hi)
        }
    }
}

/// Sum of a multiset that is bit-identical for every ordering of `values`.
///
/// The values are put in IEEE total order and then reduced with [`tree_sum`], so the only
/// input to the rounding sequence is the multiset itself. `values` is left sorted.
pub fn canonical_sum(values: &mut [f64]) -> f64 {
    values.sort_unstable_by(f64::total_cmp);
    tree_sum(values)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn order_insensitive_bits() {
        let base = [1e16, 1.0, -1e16, 3.5, 1e-3, 7.25, -2.0];
        let mut a = base.to_vec();
        let mut b: Vec<f64> = base.iter().rev().copied().collect();
        assert_eq!(canonical_sum(&mut a).to_bits(), canonical_sum(&mut b).to_bits());
    }

    #[test]
    fn small_cases() {
        assert_eq!(tree_sum(&[]), 0.0);
        assert_eq!(tree_sum(&[2.0]), 2.0);
        assert_eq!(tree_sum(&[1.0, 2.0, 3.0, 4.0, 5.0]), 15.0);
    }
}
