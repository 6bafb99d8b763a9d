//! Scalar coordinate-update kernels shared by the centralized sweep and the
//! distributed local/auxiliary phases.
//!
//! Every variance-type update (posterior variances λ and edge auxiliaries φ)
//! reduces to minimizing
//!
//! `f(v) = c_lin·v + c_log·ln(v) + c_inv/v`  over v > 0,
//!
//! whose stationary points solve `c_lin·v² + c_log·v − c_inv = 0`. The
//! admissible root is picked algebraically; when coefficients produced by
//! extreme duals leave no admissible root, a golden-section search over
//! `(floor, 1e6)` takes over and a diagnostic counter is incremented.

/// Upper end of the numeric-fallback search interval for variances.
pub const FALLBACK_VARIANCE_CAP: f64 = 1e6;

/// Returns the root of `a2·x² + a1·x + a0 = 0` that is greater than
/// `floor` and minimizes the supplied 1-D objective; `None` when no
/// admissible root exists (caller falls back to numeric minimization).
///
/// Degenerate `a2 == 0` reduces to the linear root `−a0/a1`.
pub fn solve_stationarity_quadratic<F: Fn(f64) -> f64>(
    a2: f64,
    a1: f64,
    a0: f64,
    floor: f64,
    objective: F,
) -> Option<f64> {
    let mut candidates: [Option<f64>; 2] = [None, None];
    if a2 == 0.0 {
        if a1 == 0.0 {
            return None;
        }
        candidates[0] = Some(-a0 / a1);
    } else {
        let disc = a1 * a1 - 4.0 * a2 * a0;
        if disc < 0.0 {
            return None;
        }
        // Citardauq-stable split: q carries the large-magnitude root.
        let q = -0.5 * (a1 + disc.sqrt().copysign(if a1 == 0.0 { 1.0 } else { a1 }));
        if q == 0.0 {
            candidates[0] = Some(0.0);
        } else {
            candidates[0] = Some(q / a2);
            candidates[1] = Some(a0 / q);
        }
    }
    let mut best: Option<(f64, f64)> = None;
    for root in candidates.into_iter().flatten() {
        if root.is_finite() && root > floor {
            let value = objective(root);
            match best {
                Some((_, best_val)) if value >= best_val => {}
                _ => best = Some((root, value)),
            }
        }
    }
    best.map(|(root, _)| root)
}

/// The 1-D variance objective `c_lin·v + c_log·ln v + c_inv/v`.
#[derive(Debug, Clone, Copy)]
pub struct VarianceObjective {
    pub c_lin: f64,
    pub c_log: f64,
    pub c_inv: f64,
}

impl VarianceObjective {
    pub fn eval(&self, v: f64) -> f64 {
        self.c_lin * v + self.c_log * v.ln() + self.c_inv / v
    }

    /// Solves the stationarity quadratic; on failure falls back to a
    /// golden-section search in log-space. Returns `(minimizer, fell_back)`.
    ///
    /// A subproblem can transiently be unbounded below (net negative linear
    /// coefficient from extreme duals, no real stationary point); the search
    /// then runs into the upper boundary. Propagating the cap would poison
    /// the dual variables, so the coordinate is left at `current` for this
    /// round and the caller's fallback counter still records the event.
    pub fn solve(&self, floor: f64, current: f64) -> (f64, bool) {
        if let Some(root) =
            solve_stationarity_quadratic(self.c_lin, self.c_log, -self.c_inv, floor, |v| {
                self.eval(v)
            })
        {
            (root, false)
        } else {
            let v = golden_section_min(
                |u: f64| self.eval(u.exp()),
                floor.ln(),
                FALLBACK_VARIANCE_CAP.ln(),
                200,
            )
            .exp();
            if v >= 0.5 * FALLBACK_VARIANCE_CAP {
                (current, true)
            } else {
                (v.max(floor), true)
            }
        }
    }
}

/// Plain golden-section minimization on [lo, hi]; assumes unimodality.
pub(crate) fn golden_section_min<F: Fn(f64) -> f64>(f: F, lo: f64, hi: f64, iters: usize) -> f64 {
    let inv_phi = 0.618_033_988_749_894_9_f64;
    let (mut a, mut b) = (lo, hi);
    let mut c = b - inv_phi * (b - a);
    let mut d = a + inv_phi * (b - a);
    let (mut fc, mut fd) = (f(c), f(d));
    for _ in 0..iters {
        if fc < fd {
            b = d;
            d = c;
            fd = fc;
            c = b - inv_phi * (b - a);
            fc = f(c);
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + inv_phi * (b - a);
            fd = f(d);
        }
        if (b - a).abs() < 1e-14 * (1.0 + a.abs() + b.abs()) {
            break;
        }
    }
    0.5 * (a + b)
}
