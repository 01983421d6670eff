//! Depths that only look at pairwise distances.
//!
//! Both take the distances from the query to every member (`to_query`) and
//! the member-to-member matrix; `exclude` removes the query itself when it
//! is a population member.

use crate::error::{Error, Result};
use crate::ot::DistanceMatrix;

fn members(to_query: &[f64], among: &DistanceMatrix, exclude: Option<usize>) -> Result<Vec<usize>> {
    if to_query.len() != among.len() {
        return Err(Error::LengthMismatch {
            left: to_query.len(),
            right: among.len(),
        });
    }
    let idx: Vec<usize> = (0..among.len()).filter(|&i| Some(i) != exclude).collect();
    if idx.len() < 2 {
        return Err(Error::TooFewDistributions(idx.len()));
    }
    Ok(idx)
}

/// Fraction of unordered member pairs whose lens contains the query:
/// `W2(P_i, P_j) >= max(W2(P_i, Q), W2(P_j, Q))`, ties included.
pub fn lens_depth(to_query: &[f64], among: &DistanceMatrix, exclude: Option<usize>) -> Result<f64> {
    let idx = members(to_query, among, exclude)?;
    let (mut hits, mut pairs) = (0u64, 0u64);
    for (a, &i) in idx.iter().enumerate() {
        for &j in &idx[a + 1..] {
            pairs += 1;
            if among.get(i, j) >= to_query[i].max(to_query[j]) {
                hits += 1;
            }
        }
    }
    Ok(hits as f64 / pairs as f64)
}

/// Metric spatial depth, in `[0, 2]`. Ordered pairs `i != j`; a pair with a
/// member at distance zero from the query adds nothing but is still counted.
pub fn metric_spatial_depth(
    to_query: &[f64],
    among: &DistanceMatrix,
    exclude: Option<usize>,
) -> Result<f64> {
    let idx = members(to_query, among, exclude)?;
    let mut total = crate::numeric::Neumaier::new();
    for (a, &i) in idx.iter().enumerate() {
        for &j in &idx[a + 1..] {
            let (ri, rj) = (to_query[i], to_query[j]);
            if ri <= 0.0 || rj <= 0.0 {
                continue;
            }
            let dij = among.get(i, j);
            // The summand is symmetric in (i, j); count it for both orders.
            total.add(2.0 * ((ri * ri + rj * rj - dij * dij) / (ri * rj)));
        }
    }
    let n = idx.len() as f64;
    let mean = total.value() / (n * (n - 1.0));
    Ok((1.0 - 0.5 * mean).clamp(0.0, 2.0))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn matrix(n: usize, f: impl Fn(usize, usize) -> f64) -> DistanceMatrix {
        DistanceMatrix::from_fn(n, f)
    }

    #[test]
    fn lens_midpoint_of_two_atoms() {
        // P1 = 0, P2 = 2, Q = 1 on the line.
        let among = matrix(2, |_, _| 2.0);
        assert_eq!(lens_depth(&[1.0, 1.0], &among, None).unwrap(), 1.0);
    }

    #[test]
    fn lens_far_query() {
        let among = matrix(3, |_, _| 1.0);
        assert_eq!(lens_depth(&[10.0, 10.0, 10.0], &among, None).unwrap(), 0.0);
    }

    #[test]
    fn lens_needs_two_members() {
        let among = matrix(2, |_, _| 1.0);
        assert_eq!(
            lens_depth(&[0.0, 1.0], &among, Some(0)),
            Err(Error::TooFewDistributions(1))
        );
    }

    #[test]
    fn metric_spatial_cases() {
        // Identical members away from the query.
        let among = matrix(3, |_, _| 0.0);
        assert_eq!(metric_spatial_depth(&[1.5; 3], &among, None).unwrap(), 0.0);
        // Query at 0 between point masses at +r and -r.
        let r = 0.7;
        let among = matrix(2, |_, _| 2.0 * r);
        assert_eq!(metric_spatial_depth(&[r, r], &among, None).unwrap(), 2.0);
        // Orthogonal configuration: W2^2(P_i, P_j) = W2^2(P_i, Q) + W2^2(P_j, Q).
        let among = matrix(2, |_, _| 2f64.sqrt());
        assert!((metric_spatial_depth(&[1.0, 1.0], &among, None).unwrap() - 1.0).abs() < 1e-15);
    }

    #[test]
    fn zero_distance_pairs_stay_in_the_denominator() {
        // Q coincides with P0; only the (1, 2) pair contributes.
        let among = matrix(3, |i, j| if i == 0 || j == 0 { 1.0 } else { 2.0 });
        let got = metric_spatial_depth(&[0.0, 1.0, 1.0], &among, None).unwrap();
        let summand = (1.0 + 1.0 - 4.0) / 1.0;
        let want = 1.0 - 0.5 * (2.0 * summand) / 6.0;
        assert!((got - want).abs() < 1e-15);
    }
}
