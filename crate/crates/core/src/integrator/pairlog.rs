//! Continuous branches of `log(z_a(t) − z_b(t))` for two arcs of a frame.
//!
//! Between consecutive vertex altitudes both strands are affine in `t`, so the
//! difference moves along a straight segment avoiding 0 and the principal
//! logarithm of the ratio of its end values is the exact increment.

use num_complex::Complex64;

use super::frame::Frame;

/// Tabulated continuous logarithm of the difference of two arcs.
#[derive(Clone, Debug)]
pub struct PairLog {
    pub a: usize,
    pub b: usize,
    pub lo: f64,
    pub hi: f64,
    /// The arcs meet at the lower (upper) end of their common range.
    pub meets_lo: bool,
    pub meets_hi: bool,
    knots: Vec<f64>,
    deltas: Vec<Complex64>,
    logs: Vec<Complex64>,
}

impl PairLog {
    /// `None` when the arcs share no altitude.
    pub fn new(frame: &Frame, a: usize, b: usize) -> Option<Self> {
        let (lo, hi) = frame.overlap(a, b)?;
        let (arc_a, arc_b) = (&frame.arcs[a], &frame.arcs[b]);
        let mut knots: Vec<f64> = arc_a.altitudes().chain(arc_b.altitudes()).filter(|&t| t > lo && t < hi).collect();
        knots.push(lo);
        knots.push(hi);
        knots.sort_by(f64::total_cmp);
        knots.dedup();
        let deltas: Vec<Complex64> = knots.iter().map(|&t| arc_a.eval(t).z - arc_b.eval(t).z).collect();
        let zero = Complex64::new(0.0, 0.0);
        let meets_lo = deltas[0] == zero;
        let meets_hi = deltas[deltas.len() - 1] == zero;
        let mut logs = vec![Complex64::new(f64::NAN, f64::NAN); knots.len()];
        let start = usize::from(meets_lo);
        logs[start] = deltas[start].ln();
        for k in start + 1..knots.len() {
            if deltas[k] == zero {
                break;
            }
            logs[k] = logs[k - 1] + (deltas[k] / deltas[k - 1]).ln();
        }
        Some(Self { a, b, lo, hi, meets_lo, meets_hi, knots, deltas, logs })
    }

    /// `z_a(t) − z_b(t)` on the tabulated range.
    fn delta(&self, frame: &Frame, t: f64) -> Complex64 {
        frame.arcs[self.a].eval(t).z - frame.arcs[self.b].eval(t).z
    }

    /// The continuous logarithm at `t ∈ [lo, hi]`; `−∞` real part where the
    /// arcs meet.
    pub fn eval(&self, frame: &Frame, t: f64) -> Complex64 {
        let n = self.knots.len();
        let k = (self.knots.partition_point(|&s| s <= t).max(1) - 1).min(n - 2);
        let d = self.delta(frame, t);
        if d == Complex64::new(0.0, 0.0) {
            return Complex64::new(f64::NEG_INFINITY, 0.0);
        }
        let anchor = if self.logs[k].is_nan() { k + 1 } else { k };
        self.logs[anchor] + (d / self.deltas[anchor]).ln()
    }

    /// `∫ d log(z_a − z_b)` from `t0` to `t1` (both inside the range).
    pub fn increment(&self, frame: &Frame, t0: f64, t1: f64) -> Complex64 {
        self.eval(frame, t1) - self.eval(frame, t0)
    }
}

/// Continuous logarithms for every ordered arc pair `a < b` of a frame,
/// indexed by `a * n + b`.
pub struct PairLogs {
    n: usize,
    table: Vec<Option<PairLog>>,
}

impl PairLogs {
    pub fn new(frame: &Frame) -> Self {
        let n = frame.arcs.len();
        let mut table = Vec::with_capacity(n * n);
        for a in 0..n {
            for b in 0..n {
                table.push(if a < b { PairLog::new(frame, a, b) } else { None });
            }
        }
        Self { n, table }
    }

    pub fn get(&self, a: usize, b: usize) -> Option<&PairLog> {
        let (a, b) = (a.min(b), a.max(b));
        self.table[a * self.n + b].as_ref()
    }
}
