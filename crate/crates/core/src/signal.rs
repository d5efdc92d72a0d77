//! Small signal-processing helpers shared by the fit initialisers and the
//! trace pipelines.

/// Median of a slice (NaNs are not expected).
pub fn median(values: &[f64]) -> f64 {
    if values.is_empty() {
        return f64::NAN;
    }
    let mut v = values.to_vec();
    v.sort_by(|a, b| a.total_cmp(b));
    let n = v.len();
    if n % 2 == 1 {
        v[n / 2]
    } else {
        0.5 * (v[n / 2 - 1] + v[n / 2])
    }
}

/// Median absolute deviation about the median.
pub fn mad(values: &[f64]) -> f64 {
    let m = median(values);
    let dev: Vec<f64> = values.iter().map(|v| (v - m).abs()).collect();
    median(&dev)
}

/// Sample mean and standard deviation (n - 1 denominator; zero for n < 2).
pub fn mean_std(values: &[f64]) -> (f64, f64) {
    let n = values.len();
    if n == 0 {
        return (f64::NAN, f64::NAN);
    }
    let mean = values.iter().sum::<f64>() / n as f64;
    if n < 2 {
        return (mean, 0.0);
    }
    let var = values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (n - 1) as f64;
    (mean, var.sqrt())
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct PeakOptions {
    /// Minimum prominence in units of the signal's median absolute deviation.
    pub mad_factor: f64,
    /// Minimum prominence as a fraction of `max - median`.
    pub min_relative_height: f64,
    /// Peaks closer than this many samples to a more prominent one are dropped.
    pub min_separation: usize,
}

impl Default for PeakOptions {
    fn default() -> Self {
        PeakOptions { mad_factor: 5.0, min_relative_height: 0.1, min_separation: 1 }
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Peak {
    pub index: usize,
    pub height: f64,
    pub prominence: f64,
}

/// Prominence-based local-maximum detection. Returned peaks are sorted by
/// index.
pub fn find_peaks(y: &[f64], opts: &PeakOptions) -> Vec<Peak> {
    let n = y.len();
    if n < 3 {
        return Vec::new();
    }
    let med = median(y);
    let max = y.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    let threshold = (opts.mad_factor * mad(y)).max(opts.min_relative_height * (max - med));

    let mut candidates = Vec::new();
    let mut i = 1;
    while i < n - 1 {
        if y[i] > y[i - 1] {
            // Walk across a flat top.
            let mut j = i;
            while j + 1 < n && y[j + 1] == y[i] {
                j += 1;
            }
            if j + 1 < n && y[j + 1] < y[i] {
                let idx = (i + j) / 2;
                let prom = prominence(y, i, j);
                if prom >= threshold && prom > 0.0 {
                    candidates.push(Peak { index: idx, height: y[idx], prominence: prom });
                }
            }
            i = j + 1;
        } else {
            i += 1;
        }
    }

    if opts.min_separation > 1 {
        let mut order: Vec<usize> = (0..candidates.len()).collect();
        order.sort_by(|&a, &b| candidates[b].prominence.total_cmp(&candidates[a].prominence));
        let mut keep = vec![true; candidates.len()];
        for (pos, &a) in order.iter().enumerate() {
            if !keep[a] {
                continue;
            }
            for &b in &order[pos + 1..] {
                if candidates[a].index.abs_diff(candidates[b].index) < opts.min_separation {
                    keep[b] = false;
                }
            }
        }
        candidates = candidates.into_iter().zip(keep).filter(|(_, k)| *k).map(|(p, _)| p).collect();
    }
    candidates
}

/// Topographic prominence of the plateau `y[lo..=hi]`.
fn prominence(y: &[f64], lo: usize, hi: usize) -> f64 {
    let h = y[lo];
    let mut left_min = h;
    let mut k = lo;
    while k > 0 {
        k -= 1;
        if y[k] > h {
            break;
        }
        left_min = left_min.min(y[k]);
    }
    let mut right_min = h;
    let mut k = hi;
    while k + 1 < y.len() {
        k += 1;
        if y[k] > h {
            break;
        }
        right_min = right_min.min(y[k]);
    }
    h - left_min.max(right_min)
}

/// Full width at half maximum around `peak`, measured above `baseline` by
/// linear interpolation of the half-level crossings. `None` when a side
/// never drops below half height.
pub fn half_max_width(x: &[f64], y: &[f64], peak: usize, baseline: f64) -> Option<f64> {
    let half = baseline + 0.5 * (y[peak] - baseline);
    let mut left = None;
    for k in (0..peak).rev() {
        if y[k] <= half {
            let t = (half - y[k]) / (y[k + 1] - y[k]);
            left = Some(x[k] + t * (x[k + 1] - x[k]));
            break;
        }
    }
    let mut right = None;
    for k in peak + 1..y.len() {
        if y[k] <= half {
            let t = (half - y[k - 1]) / (y[k] - y[k - 1]);
            right = Some(x[k - 1] + t * (x[k] - x[k - 1]));
            break;
        }
    }
    match (left, right) {
        (Some(l), Some(r)) => Some((r - l).abs()),
        _ => None,
    }
}

/// Centred moving average with a window of `2·half + 1` samples, shrinking
/// at the edges.
pub fn moving_average(y: &[f64], half: usize) -> Vec<f64> {
    let n = y.len();
    let mut prefix = vec![0.0; n + 1];
    for i in 0..n {
        prefix[i + 1] = prefix[i] + y[i];
    }
    (0..n)
        .map(|i| {
            let lo = i.saturating_sub(half);
            let hi = (i + half + 1).min(n);
            (prefix[hi] - prefix[lo]) / (hi - lo) as f64
        })
        .collect()
}
