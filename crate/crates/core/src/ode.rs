//! Dormand–Prince 5(4) with continuous extension and event location.
//!
//! The right-hand side may refuse a state by returning `None` (e.g. a square
//! root of a negative number); the step is then rejected and retried shorter.

use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Tolerances {
    pub rtol: f64,
    pub atol: f64,
    pub max_step: f64,
}

impl Default for Tolerances {
    fn default() -> Self {
        Tolerances {
            rtol: 1e-10,
            atol: 1e-12,
            max_step: 0.1,
        }
    }
}

/// Why the integration stopped.
#[derive(Debug, Clone, PartialEq)]
pub enum Stop {
    SpanReached,
    /// Event functions (by index) that changed sign, located at `t`.
    Event { t: f64, indices: Vec<usize> },
    StepUnderflow { t: f64 },
}

const C: [f64; 7] = [0.0, 0.2, 0.3, 0.8, 8.0 / 9.0, 1.0, 1.0];
const A: [[f64; 6]; 7] = [
    [0.0; 6],
    [0.2, 0.0, 0.0, 0.0, 0.0, 0.0],
    [3.0 / 40.0, 9.0 / 40.0, 0.0, 0.0, 0.0, 0.0],
    [44.0 / 45.0, -56.0 / 15.0, 32.0 / 9.0, 0.0, 0.0, 0.0],
    [
        19372.0 / 6561.0,
        -25360.0 / 2187.0,
        64448.0 / 6561.0,
        -212.0 / 729.0,
        0.0,
        0.0,
    ],
    [
        9017.0 / 3168.0,
        -355.0 / 33.0,
        46732.0 / 5247.0,
        49.0 / 176.0,
        -5103.0 / 18656.0,
        0.0,
    ],
    [
        35.0 / 384.0,
        0.0,
        500.0 / 1113.0,
        125.0 / 192.0,
        -2187.0 / 6784.0,
        11.0 / 84.0,
    ],
];
/// Fifth minus fourth order weights.
const E: [f64; 7] = [
    71.0 / 57600.0,
    0.0,
    -71.0 / 16695.0,
    71.0 / 1920.0,
    -17253.0 / 339200.0,
    22.0 / 525.0,
    -1.0 / 40.0,
];
/// Continuous extension: `y(t₀ + θh) = y₀ + h Σⱼ kⱼ Σₘ Pⱼₘ θ^{m+1}`.
const P: [[f64; 4]; 7] = [
    [
        1.0,
        -8048581381.0 / 2820520608.0,
        8663915743.0 / 2820520608.0,
        -12715105075.0 / 11282082432.0,
    ],
    [0.0; 4],
    [
        0.0,
        131558114200.0 / 32700410799.0,
        -68118460800.0 / 10900136933.0,
        87487479700.0 / 32700410799.0,
    ],
    [
        0.0,
        -1754552775.0 / 470086768.0,
        14199869525.0 / 1410260304.0,
        -10690763975.0 / 1880347072.0,
    ],
    [
        0.0,
        127303824393.0 / 49829197408.0,
        -318862633887.0 / 49829197408.0,
        701980252875.0 / 199316789632.0,
    ],
    [
        0.0,
        -282668133.0 / 205662961.0,
        2019193451.0 / 616988883.0,
        -1453857185.0 / 822651844.0,
    ],
    [
        0.0,
        40617522.0 / 29380423.0,
        -110615467.0 / 29380423.0,
        69997945.0 / 29380423.0,
    ],
];

/// One accepted step: `y(t₀ + θh) = y₀ + Σₘ qₘ θ^{m+1}`.
#[derive(Debug, Clone)]
struct Segment<const N: usize> {
    t0: f64,
    h: f64,
    y0: [f64; N],
    q: [[f64; N]; 4],
}

impl<const N: usize> Segment<N> {
    fn eval(&self, t: f64) -> [f64; N] {
        let s = (t - self.t0) / self.h;
        std::array::from_fn(|i| {
            let poly = self.q.iter().rev().fold(0.0, |acc, q| (acc + q[i]) * s);
            self.y0[i] + poly
        })
    }

    /// Time derivative of the interpolant.
    fn eval_dt(&self, t: f64) -> [f64; N] {
        let s = (t - self.t0) / self.h;
        std::array::from_fn(|i| {
            let d = (0..4)
                .rev()
                .fold(0.0, |acc, m| acc * s + (m + 1) as f64 * self.q[m][i]);
            d / self.h
        })
    }

    fn contains(&self, t: f64) -> bool {
        let (a, b) = (self.t0, self.t0 + self.h);
        t >= a.min(b) && t <= a.max(b)
    }

    /// The same polynomial re-expressed on `[t₀, t₀ + h]`.
    fn truncated(&self, h: f64) -> Segment<N> {
        let ratio = h / self.h;
        let mut q = self.q;
        for (m, qm) in q.iter_mut().enumerate() {
            let f = ratio.powi(m as i32 + 1);
            qm.iter_mut().for_each(|x| *x *= f);
        }
        Segment {
            t0: self.t0,
            h,
            y0: self.y0,
            q,
        }
    }
}

/// Continuous solution over the integrated interval.
#[derive(Debug, Clone)]
pub struct DenseOutput<const N: usize> {
    segments: Vec<Segment<N>>,
}

impl<const N: usize> DenseOutput<N> {
    fn segment(&self, t: f64) -> Option<&Segment<N>> {
        // segments are monotone in t; binary search on start times
        let dir = self.segments.first()?.h.signum();
        let idx = self
            .segments
            .partition_point(|s| (s.t0 - t) * dir <= 0.0)
            .saturating_sub(1);
        let seg = &self.segments[idx];
        if seg.contains(t) {
            Some(seg)
        } else {
            None
        }
    }

    /// State at `t` (`None` outside the integrated interval).
    pub fn eval(&self, t: f64) -> Option<[f64; N]> {
        self.segment(t).map(|s| s.eval(t))
    }

    /// Time derivative of the interpolant at `t`.
    pub fn eval_dt(&self, t: f64) -> Option<[f64; N]> {
        self.segment(t).map(|s| s.eval_dt(t))
    }

    pub fn t_start(&self) -> Option<f64> {
        self.segments.first().map(|s| s.t0)
    }

    pub fn t_end(&self) -> Option<f64> {
        self.segments.last().map(|s| s.t0 + s.h)
    }
}

/// Output of [`integrate`]: accepted step endpoints plus dense output.
#[derive(Debug, Clone)]
pub struct Solution<const N: usize> {
    pub t: Vec<f64>,
    pub y: Vec<[f64; N]>,
    pub dense: DenseOutput<N>,
    pub stop: Stop,
    pub rejected_steps: usize,
}

/// Event function: the integration stops where one changes sign.
pub type Event<'a, const N: usize> = &'a dyn Fn(f64, &[f64; N]) -> f64;

fn error_norm<const N: usize>(err: &[f64; N], y0: &[f64; N], y1: &[f64; N], tol: &Tolerances) -> f64 {
    let mut acc = 0.0;
    for i in 0..N {
        let sc = tol.atol + tol.rtol * y0[i].abs().max(y1[i].abs());
        acc += (err[i] / sc).powi(2);
    }
    (acc / N as f64).sqrt()
}

/// Bisection on the dense output for the first sign change of `g` in
/// `(a, b]`, to `|g| < 1e−12` or machine resolution in `t`.
fn locate<const N: usize>(seg: &Segment<N>, g: Event<'_, N>, a: f64, b: f64) -> f64 {
    let (mut lo, mut hi) = (a, b);
    let g_lo = g(lo, &seg.eval(lo));
    let mut s_lo = g_lo.signum();
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if mid == lo || mid == hi {
            break;
        }
        let gm = g(mid, &seg.eval(mid));
        if gm.abs() < 1e-12 {
            return mid;
        }
        if gm.signum() == s_lo {
            lo = mid;
            s_lo = gm.signum();
        } else {
            hi = mid;
        }
    }
    hi
}

/// Integrates `y' = rhs(t, y)` from `t0` to `t_end` (either direction),
/// stopping at the first sign change of any event function.
pub fn integrate<const N: usize>(
    rhs: impl Fn(f64, &[f64; N]) -> Option<[f64; N]>,
    t0: f64,
    y0: [f64; N],
    t_end: f64,
    tol: &Tolerances,
    events: &[Event<'_, N>],
) -> Solution<N> {
    let dir = if t_end >= t0 { 1.0 } else { -1.0 };
    let span = (t_end - t0).abs();
    let mut t = t0;
    let mut y = y0;
    let mut ts = vec![t0];
    let mut ys = vec![y0];
    let mut segments = Vec::new();
    let mut rejected = 0;

    let mut g_prev: Vec<f64> = events.iter().map(|g| g(t0, &y0)).collect();

    let mut k1 = match rhs(t, &y) {
        Some(k) => k,
        None => {
            return Solution {
                t: ts,
                y: ys,
                dense: DenseOutput { segments },
                stop: Stop::StepUnderflow { t },
                rejected_steps: 0,
            }
        }
    };
    let mut h = (0.01 * span).min(tol.max_step).max(1e-6 * span.max(1e-300));
    if span == 0.0 {
        return Solution {
            t: ts,
            y: ys,
            dense: DenseOutput { segments },
            stop: Stop::SpanReached,
            rejected_steps: 0,
        };
    }

    loop {
        let remaining = (t_end - t) * dir;
        if remaining <= 0.0 {
            break;
        }
        h = h.min(remaining).min(tol.max_step);
        if h < 1e-14 * t.abs().max(1.0) {
            return Solution {
                t: ts,
                y: ys,
                dense: DenseOutput { segments },
                stop: Stop::StepUnderflow { t },
                rejected_steps: rejected,
            };
        }
        let hs = h * dir;

        // stages
        let mut k = [[0.0; N]; 7];
        k[0] = k1;
        let mut ok = true;
        for s in 1..7 {
            let ys_: [f64; N] = std::array::from_fn(|i| {
                y[i] + hs * (0..s).map(|j| A[s][j] * k[j][i]).sum::<f64>()
            });
            match rhs(t + C[s] * hs, &ys_) {
                Some(v) if v.iter().all(|x| x.is_finite()) => k[s] = v,
                _ => {
                    ok = false;
                    break;
                }
            }
        }
        if !ok {
            rejected += 1;
            h *= 0.25;
            continue;
        }
        let y1: [f64; N] =
            std::array::from_fn(|i| y[i] + hs * (0..6).map(|j| A[6][j] * k[j][i]).sum::<f64>());
        let err: [f64; N] = std::array::from_fn(|i| hs * (0..7).map(|j| E[j] * k[j][i]).sum::<f64>());
        let en = error_norm(&err, &y, &y1, tol);
        if !en.is_finite() || en > 1.0 {
            rejected += 1;
            let fac = if en.is_finite() {
                (0.9 * en.powf(-0.2)).clamp(0.2, 1.0)
            } else {
                0.25
            };
            h *= fac;
            continue;
        }

        let q: [[f64; N]; 4] = std::array::from_fn(|m| {
            std::array::from_fn(|i| hs * (0..7).map(|j| P[j][m] * k[j][i]).sum::<f64>())
        });
        let seg = Segment { t0: t, h: hs, y0: y, q };
        let t1 = t + hs;

        // events
        let g_new: Vec<f64> = events.iter().map(|g| g(t1, &y1)).collect();
        let mut hit: Option<f64> = None;
        let mut fired = Vec::new();
        for (idx, g) in events.iter().enumerate() {
            let crossed = g_new[idx] == 0.0 || g_prev[idx].signum() != g_new[idx].signum();
            if crossed && g_prev[idx] != 0.0 {
                let te = locate(&seg, *g, t, t1);
                fired.push((idx, te));
                hit = Some(match hit {
                    Some(best) if (best - te) * dir <= 0.0 => best,
                    _ => te,
                });
            }
        }
        if let Some(te) = hit {
            let resolution = 1e-10 * (1.0 + te.abs());
            let indices: Vec<usize> = fired
                .iter()
                .filter(|(_, t_i)| (t_i - te).abs() <= resolution)
                .map(|(i, _)| *i)
                .collect();
            let ye = seg.eval(te);
            segments.push(seg.truncated(te - t));
            ts.push(te);
            ys.push(ye);
            return Solution {
                t: ts,
                y: ys,
                dense: DenseOutput { segments },
                stop: Stop::Event { t: te, indices },
                rejected_steps: rejected,
            };
        }
        g_prev = g_new;

        segments.push(seg);
        t = t1;
        y = y1;
        ts.push(t);
        ys.push(y);
        k1 = k[6];

        let fac = if en == 0.0 { 5.0 } else { (0.9 * en.powf(-0.2)).clamp(0.2, 5.0) };
        h *= fac;
    }

    Solution {
        t: ts,
        y: ys,
        dense: DenseOutput { segments },
        stop: Stop::SpanReached,
        rejected_steps: rejected,
    }
}
