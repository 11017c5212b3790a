use super::sift::Descriptor;

/// Brute-force nearest-neighbour matching with the ratio test.
///
/// For each descriptor of `da` the two nearest descriptors of `db` are found
/// (ties go to the lower index) and the pair `(i, j)` is kept iff
/// `d₁ / d₂ < ratio`. With a single candidate in `db` there is nothing to
/// compare against and the nearest is kept.
pub fn match_descriptors(da: &[Descriptor], db: &[Descriptor], ratio: f64) -> Vec<(usize, usize)> {
    if db.is_empty() {
        return Vec::new();
    }
    let ratio_sq = ratio * ratio;
    da.iter()
        .enumerate()
        .filter_map(|(i, a)| {
            let (mut best, mut second) = ((usize::MAX, f64::INFINITY), f64::INFINITY);
            for (j, b) in db.iter().enumerate() {
                let d = a.distance_sq(b);
                if d < best.1 {
                    second = best.1;
                    best = (j, d);
                } else if d < second {
                    second = d;
                }
            }
            if db.len() < 2 || best.1 < ratio_sq * second {
                Some((i, best.0))
            } else {
                None
            }
        })
        .collect()
}
