use rand::Rng;

use crate::error::{Error, Result};
use crate::seed;

/// Two distinct views that must agree at one point.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct ConsistencyPair {
    pub view_i: usize,
    pub view_j: usize,
    pub point: usize,
}

/// One ordered view pair per point, drawn uniformly from the `n(n-1)` ordered
/// pairs of distinct views.
pub fn consistency_pairs(num_views: usize, num_points: usize, seed_value: u64) -> Result<Vec<ConsistencyPair>> {
    if num_views < 2 {
        return Err(Error::NeedTwoViews);
    }
    let mut rng = seed::rng(seed_value, 0);
    Ok((0..num_points)
        .map(|point| {
            let view_i = rng.random_range(0..num_views);
            // skip over i so j is uniform on the remaining views
            let mut view_j = rng.random_range(0..num_views - 1);
            if view_j >= view_i {
                view_j += 1;
            }
            ConsistencyPair { view_i, view_j, point }
        })
        .collect())
}
