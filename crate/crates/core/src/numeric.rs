//! Small numeric helpers shared by every module.

/// Neumaier-compensated accumulator. Summation order is the caller's order,
/// so results are reproducible for a fixed input sequence.
#[derive(Clone, Copy, Debug, Default)]
pub struct CompensatedSum {
    sum: f64,
    carry: f64,
}

impl CompensatedSum {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn add(&mut self, x: f64) {
        let t = self.sum + x;
        if self.sum.abs() >= x.abs() {
            self.carry += (self.sum - t) + x;
        } else {
            self.carry += (x - t) + self.sum;
        }
        self.sum = t;
    }

    pub fn value(&self) -> f64 {
        self.sum + self.carry
    }
}

impl FromIterator<f64> for CompensatedSum {
    fn from_iter<I: IntoIterator<Item = f64>>(iter: I) -> Self {
        let mut acc = CompensatedSum::new();
        for x in iter {
            acc.add(x);
        }
        acc
    }
}

pub fn compensated_sum<I: IntoIterator<Item = f64>>(iter: I) -> f64 {
    iter.into_iter().collect::<CompensatedSum>().value()
}

/// `|a - b| <= tol * max(1, |a|, |b|)`.
pub fn close(a: f64, b: f64, tol: f64) -> bool {
    (a - b).abs() <= tol * 1f64.max(a.abs()).max(b.abs())
}

/// Golden-section minimization of `f` on `[lo, hi]`. Returns `(argmin, min)`
/// over all evaluated points, so endpoints are never lost.
pub fn golden_section<F: FnMut(f64) -> f64>(
    mut f: F,
    lo: f64,
    hi: f64,
    rel_tol: f64,
    max_iter: usize,
) -> (f64, f64) {
    const INV_PHI: f64 = 0.618_033_988_749_894_9;
    let (mut a, mut b) = (lo, hi);
    let mut best = (a, f(a));
    let fb = f(b);
    if fb < best.1 {
        best = (b, fb);
    }
    let mut c = b - INV_PHI * (b - a);
    let mut d = a + INV_PHI * (b - a);
    let mut fc = f(c);
    let mut fd = f(d);
    for _ in 0..max_iter {
        if (b - a).abs() <= rel_tol * 1f64.max(a.abs().max(b.abs())) {
            break;
        }
        if fc <= fd {
            b = d;
            d = c;
            fd = fc;
            c = b - INV_PHI * (b - a);
            fc = f(c);
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + INV_PHI * (b - a);
            fd = f(d);
        }
        for (x, fx) in [(c, fc), (d, fd)] {
            if fx < best.1 {
                best = (x, fx);
            }
        }
    }
    best
}

/// Number of strict interior local minima of a sampled sequence (plateaus
/// count once). More than one means the scan is multimodal.
pub fn count_local_minima(values: &[f64]) -> usize {
    let n = values.len();
    if n < 3 {
        return usize::from(n > 0);
    }
    let mut count = 0;
    let mut i = 0;
    while i < n {
        let mut j = i;
        while j + 1 < n && values[j + 1] == values[i] {
            j += 1;
        }
        let left_higher = i == 0 || values[i - 1] > values[i];
        let right_higher = j == n - 1 || values[j + 1] > values[i];
        if left_higher && right_higher {
            count += 1;
        }
        i = j + 1;
    }
    count
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn compensated_sum_recovers_cancelled_terms() {
        let xs = [1e16, 1.0, -1e16, 1.0];
        assert_eq!(compensated_sum(xs), 2.0);
        assert_eq!(xs.iter().sum::<f64>(), 1.0);
    }

    #[test]
    fn golden_section_finds_parabola_vertex() {
        let (x, fx) = golden_section(|x| (x - 0.3) * (x - 0.3) + 1.0, 0.0, 1.0, 1e-12, 200);
        assert!((x - 0.3).abs() < 1e-6);
        assert!((fx - 1.0).abs() < 1e-12);
    }

    #[test]
    fn golden_section_keeps_endpoint_minimum() {
        let (x, _) = golden_section(|x| x, 2.0, 5.0, 1e-12, 200);
        assert_eq!(x, 2.0);
    }

    #[test]
    fn local_minima_counts() {
        assert_eq!(count_local_minima(&[3.0, 2.0, 1.0, 2.0]), 1);
        assert_eq!(count_local_minima(&[1.0, 2.0, 1.0]), 2);
        assert_eq!(count_local_minima(&[1.0, 1.0, 1.0]), 1);
    }
}
