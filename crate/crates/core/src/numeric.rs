//! Scan-and-refine optimizers, bisection and a min segment tree.

const INV_PHI: f64 = 0.618_033_988_749_894_9;

#[inline]
fn sanitize(v: f64) -> f64 {
    if v.is_nan() {
        f64::INFINITY
    } else {
        v
    }
}

/// Golden-section search for a minimum of `f` on `[a, b]`.
///
/// Returns the best point evaluated, so discontinuous objectives still yield
/// a value that was actually attained.
pub(crate) fn golden_min<F: FnMut(f64) -> f64>(mut f: F, a: f64, b: f64, iters: usize) -> (f64, f64) {
    let (mut a, mut b) = if a <= b { (a, b) } else { (b, a) };
    let mut c = b - INV_PHI * (b - a);
    let mut d = a + INV_PHI * (b - a);
    let mut fc = sanitize(f(c));
    let mut fd = sanitize(f(d));
    let mut best = if fc <= fd { (c, fc) } else { (d, fd) };
    for _ in 0..iters {
        if fc <= fd {
            b = d;
            d = c;
            fd = fc;
            c = b - INV_PHI * (b - a);
            fc = sanitize(f(c));
            if fc < best.1 {
                best = (c, fc);
            }
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + INV_PHI * (b - a);
            fd = sanitize(f(d));
            if fd < best.1 {
                best = (d, fd);
            }
        }
        if b - a <= 1e-15 * (1.0 + a.abs().max(b.abs())) {
            break;
        }
    }
    best
}

/// Coarse scan over `points` equally spaced nodes of `[a, b]` followed by a
/// golden-section refinement of the best bracket.
pub(crate) fn scan_refine_min<F: FnMut(f64) -> f64>(mut f: F, a: f64, b: f64, points: usize) -> (f64, f64) {
    if a == b {
        return (a, sanitize(f(a)));
    }
    let points = points.max(3);
    let step = (b - a) / (points - 1) as f64;
    let node = |i: usize| if i == points - 1 { b } else { a + step * i as f64 };
    let mut best_i = 0;
    let mut best = (a, f64::INFINITY);
    for i in 0..points {
        let x = node(i);
        let v = sanitize(f(x));
        if v < best.1 {
            best = (x, v);
            best_i = i;
        }
    }
    let lo = node(best_i.saturating_sub(1));
    let hi = node((best_i + 1).min(points - 1));
    let refined = golden_min(&mut f, lo, hi, 120);
    if refined.1 < best.1 {
        refined
    } else {
        best
    }
}

/// Maximizing counterpart of [`scan_refine_min`].
pub(crate) fn scan_refine_max<F: FnMut(f64) -> f64>(mut f: F, a: f64, b: f64, points: usize) -> (f64, f64) {
    let (x, v) = scan_refine_min(
        |t| {
            let y = f(t);
            if y.is_nan() {
                f64::INFINITY
            } else {
                -y
            }
        },
        a,
        b,
        points,
    );
    (x, -v)
}

/// Shrinks `[lo, hi]` where `pred(lo)` is false and `pred(hi)` is true,
/// returning the final `hi`.
pub(crate) fn bisect_boundary<P: FnMut(f64) -> bool>(pred: P, lo: f64, hi: f64) -> f64 {
    bisect_boundary_to(pred, lo, hi, 1e-14)
}

/// As [`bisect_boundary`], stopping once the bracket is narrower than
/// `rel * (1 + |hi|)`.
pub(crate) fn bisect_boundary_to<P: FnMut(f64) -> bool>(mut pred: P, mut lo: f64, mut hi: f64, rel: f64) -> f64 {
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        if pred(mid) {
            hi = mid;
        } else {
            lo = mid;
        }
        if hi - lo <= rel * (1.0 + hi.abs()) {
            break;
        }
    }
    hi
}

/// Segment tree over `f64` values answering range minima and
/// "first index at or after `start` with value below a threshold".
#[derive(Debug, Clone)]
pub(crate) struct MinTree {
    len: usize,
    size: usize,
    data: Vec<(f64, usize)>,
}

impl MinTree {
    pub(crate) fn new(values: &[f64]) -> Self {
        let len = values.len();
        let size = len.next_power_of_two().max(1);
        let mut data = vec![(f64::INFINITY, usize::MAX); 2 * size];
        for (i, &v) in values.iter().enumerate() {
            data[size + i] = (sanitize(v), i);
        }
        for node in (1..size).rev() {
            let (l, r) = (data[2 * node], data[2 * node + 1]);
            data[node] = if r.0 < l.0 { r } else { l };
        }
        MinTree { len, size, data }
    }

    /// Minimum over the half-open index range `[l, r)`.
    pub(crate) fn range_min(&self, l: usize, r: usize) -> Option<(f64, usize)> {
        if l >= r || l >= self.len {
            return None;
        }
        let (mut l, mut r) = (l + self.size, r.min(self.len) + self.size);
        let mut best = (f64::INFINITY, usize::MAX);
        while l < r {
            if l & 1 == 1 {
                if self.data[l].0 < best.0 || best.1 == usize::MAX {
                    best = self.data[l];
                }
                l += 1;
            }
            if r & 1 == 1 {
                r -= 1;
                if self.data[r].0 < best.0 || best.1 == usize::MAX {
                    best = self.data[r];
                }
            }
            l >>= 1;
            r >>= 1;
        }
        (best.1 != usize::MAX).then_some((best.0, best.1))
    }

    pub(crate) fn first_below(&self, start: usize, threshold: f64) -> Option<usize> {
        if start >= self.len {
            return None;
        }
        self.descend(1, 0, self.size, start, threshold)
    }

    fn descend(&self, node: usize, nl: usize, nr: usize, start: usize, threshold: f64) -> Option<usize> {
        if nr <= start || self.data[node].0 >= threshold {
            return None;
        }
        if nr - nl == 1 {
            return (nl < self.len).then_some(nl);
        }
        let mid = (nl + nr) / 2;
        self.descend(2 * node, nl, mid, start, threshold)
            .or_else(|| self.descend(2 * node + 1, mid, nr, start, threshold))
    }
}
