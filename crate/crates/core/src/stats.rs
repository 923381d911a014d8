//! Small statistical checks used by the experiments and tests.

use std::collections::BTreeMap;

/// One-sample Kolmogorov-Smirnov statistic against the uniform law on
/// `[lo, hi)`, with its asymptotic p-value.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct KsResult {
    pub statistic: f64,
    pub p_value: f64,
}

pub fn ks_uniform(samples: &[f64], lo: f64, hi: f64) -> KsResult {
    assert!(hi > lo, "empty interval");
    let n = samples.len();
    if n == 0 {
        return KsResult { statistic: 0.0, p_value: 1.0 };
    }
    let mut u: Vec<f64> = samples.iter().map(|x| ((x - lo) / (hi - lo)).clamp(0.0, 1.0)).collect();
    u.sort_by(f64::total_cmp);
    let nf = n as f64;
    let d = u
        .iter()
        .enumerate()
        .map(|(i, &x)| (((i + 1) as f64 / nf) - x).max(x - i as f64 / nf))
        .fold(0.0, f64::max);
    // Stephens' small-sample correction.
    let lambda = (nf.sqrt() + 0.12 + 0.11 / nf.sqrt()) * d;
    KsResult { statistic: d, p_value: kolmogorov_survival(lambda) }
}

/// `P(K > lambda)` for the Kolmogorov distribution.
pub fn kolmogorov_survival(lambda: f64) -> f64 {
    if lambda < 0.2 {
        return 1.0;
    }
    let mut sum = 0.0;
    for k in 1..=100 {
        let k = k as f64;
        let term = 2.0 * (-1f64).powf(k - 1.0) * (-2.0 * k * k * lambda * lambda).exp();
        sum += term;
        if term.abs() < 1e-16 {
            break;
        }
    }
    sum.clamp(0.0, 1.0)
}

/// Standard deviation of the mean of `n` Bernoulli(`p`) draws.
pub fn binomial_sigma(p: f64, n: usize) -> f64 {
    (p * (1.0 - p) / n as f64).sqrt()
}

/// Whether `successes / n` is within `k` standard deviations of `p`. When
/// `p` is 0 or 1 this demands an exact match.
pub fn within_sigma(successes: usize, n: usize, p: f64, k: f64) -> bool {
    let p = p.clamp(0.0, 1.0);
    let rate = successes as f64 / n as f64;
    (rate - p).abs() <= k * binomial_sigma(p, n) + 1e-12
}

/// Outcome-wise 3σ comparison of observed counts with reference
/// probabilities. Outcomes missing from `reference` have probability 0.
pub fn counts_match(counts: &BTreeMap<String, usize>, reference: &BTreeMap<String, f64>, k: f64) -> bool {
    let n: usize = counts.values().sum();
    if n == 0 {
        return false;
    }
    let keys: std::collections::BTreeSet<&String> = counts.keys().chain(reference.keys()).collect();
    keys.into_iter().all(|key| {
        let c = counts.get(key).copied().unwrap_or(0);
        let p = reference.get(key).copied().unwrap_or(0.0);
        within_sigma(c, n, p, k)
    })
}

/// Total variation distance between two normalised histograms.
pub fn total_variation<K: Ord>(a: &BTreeMap<K, f64>, b: &BTreeMap<K, f64>) -> f64 {
    let keys: std::collections::BTreeSet<&K> = a.keys().chain(b.keys()).collect();
    0.5 * keys
        .into_iter()
        .map(|k| (a.get(k).copied().unwrap_or(0.0) - b.get(k).copied().unwrap_or(0.0)).abs())
        .sum::<f64>()
}

/// Normalises counts to frequencies.
pub fn normalise<K: Ord + Clone>(counts: &BTreeMap<K, usize>) -> BTreeMap<K, f64> {
    let n: usize = counts.values().sum();
    counts.iter().map(|(k, &c)| (k.clone(), c as f64 / n.max(1) as f64)).collect()
}

/// Plug-in mutual information (bits) between two binary variables.
pub fn mutual_information(pairs: &[(u8, u8)]) -> f64 {
    let n = pairs.len() as f64;
    if pairs.is_empty() {
        return 0.0;
    }
    let mut joint = [[0f64; 2]; 2];
    for &(x, y) in pairs {
        joint[x as usize & 1][y as usize & 1] += 1.0;
    }
    let px = [joint[0][0] + joint[0][1], joint[1][0] + joint[1][1]];
    let py = [joint[0][0] + joint[1][0], joint[0][1] + joint[1][1]];
    let mut mi = 0.0;
    for x in 0..2 {
        for y in 0..2 {
            if joint[x][y] > 0.0 {
                mi += joint[x][y] / n * (joint[x][y] * n / (px[x] * py[y])).log2();
            }
        }
    }
    mi.max(0.0)
}
