use crate::error::{Error, Result};

/// 1-based ranks of `x` under strict ordering.
///
/// Tied values are an error: the rank likelihood is defined for continuous
/// scores and midranks are not supported.
pub fn ranks(x: &[f64]) -> Result<Vec<usize>> {
    let mut order: Vec<usize> = (0..x.len()).collect();
    order.sort_by(|&i, &j| x[i].total_cmp(&x[j]));
    for pair in order.windows(2) {
        let (i, j) = (pair[0], pair[1]);
        if x[i] == x[j] {
            return Err(Error::Ties {
                first: i.min(j),
                second: i.max(j),
                value: x[i],
            });
        }
    }
    let mut out = vec![0; x.len()];
    for (r, &i) in order.iter().enumerate() {
        out[i] = r + 1;
    }
    Ok(out)
}
