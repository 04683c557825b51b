//! Real roots of low-degree real polynomials.
//!
//! Closed-form solution of c0 + c1 x + c2 x^2 + c3 x^3 = 0 through the
//! depressed cubic, with a trigonometric branch for three real roots and a
//! Cardano branch for one, followed by Newton polishing on the original
//! coefficients. Degenerate leading coefficients fall through to the
//! quadratic/linear cases.

/// Real roots, sorted ascending, coincident roots reported once.
/// `near_double` is set when two roots nearly coincide (tightly spaced
/// retained roots, or a nearly vanishing derivative at one); callers treat
/// that as a bistability-edge warning.
#[derive(Clone, Debug, PartialEq)]
pub struct RealRoots {
    pub roots: Vec<f64>,
    pub near_double: bool,
}

fn eval(c0: f64, c1: f64, c2: f64, c3: f64, x: f64) -> f64 {
    ((c3 * x + c2) * x + c1) * x + c0
}

fn eval_deriv(c1: f64, c2: f64, c3: f64, x: f64) -> f64 {
    (3.0 * c3 * x + 2.0 * c2) * x + c1
}

fn polish(c0: f64, c1: f64, c2: f64, c3: f64, mut x: f64) -> f64 {
    for _ in 0..3 {
        let f = eval(c0, c1, c2, c3, x);
        let df = eval_deriv(c1, c2, c3, x);
        if df == 0.0 || !f.is_finite() || !df.is_finite() {
            break;
        }
        let step = f / df;
        if !step.is_finite() {
            break;
        }
        x -= step;
    }
    x
}

fn solve_linear(c0: f64, c1: f64) -> RealRoots {
    if c1 == 0.0 {
        // Constant polynomial: no isolated roots (even when identically 0).
        return RealRoots { roots: vec![], near_double: false };
    }
    RealRoots { roots: vec![-c0 / c1], near_double: false }
}

fn solve_quadratic(c0: f64, c1: f64, c2: f64) -> RealRoots {
    if c2 == 0.0 {
        return solve_linear(c0, c1);
    }
    let disc = c1 * c1 - 4.0 * c2 * c0;
    let scale = (c1 * c1).max((4.0 * c2 * c0).abs()).max(f64::MIN_POSITIVE);
    let near_double = disc.abs() <= 1.0e-12 * scale;
    if disc < 0.0 {
        return RealRoots { roots: vec![], near_double };
    }
    // Citardauq pairing avoids cancellation in the smaller root.
    let sq = disc.sqrt();
    let q = -0.5 * (c1 + c1.signum() * sq);
    let mut roots = if q == 0.0 {
        vec![0.0, 0.0]
    } else {
        vec![q / c2, c0 / q]
    };
    roots.iter_mut().for_each(|r| *r = polish(c0, c1, c2, 0.0, *r));
    roots.sort_by(f64::total_cmp);
    RealRoots { roots, near_double }
}

/// All real roots of `c0 + c1 x + c2 x^2 + c3 x^3`, ascending.
pub fn solve_cubic(c0: f64, c1: f64, c2: f64, c3: f64) -> RealRoots {
    if c3 == 0.0 {
        return solve_quadratic(c0, c1, c2);
    }
    // Normalize and depress: x = t - a/3 turns x^3 + a x^2 + b x + c into
    // t^3 + p t + q.
    let a = c2 / c3;
    let b = c1 / c3;
    let c = c0 / c3;
    let shift = a / 3.0;
    let p = b - a * a / 3.0;
    let q = c + a * (2.0 * a * a - 9.0 * b) / 27.0;

    let quarter_q2 = 0.25 * q * q;
    let p3_over_27 = p * p * p / 27.0;
    let disc = quarter_q2 + p3_over_27; // < 0: three real roots

    if !disc.is_finite() || !p.is_finite() || !q.is_finite() {
        // Severely ill-scaled input; fall back to the quadratic sub-problem
        // and let the caller's residual checks reject if inadequate.
        return solve_quadratic(c0, c1, c2);
    }
    let mut candidates = Vec::with_capacity(5);
    if disc <= 0.0 {
        // Three real roots (trigonometric form; p <= 0 here).
        let m = (-p / 3.0).sqrt();
        let arg = if m == 0.0 { 0.0 } else { (1.5 * q / (p * m)).clamp(-1.0, 1.0) };
        let phase = arg.acos() / 3.0;
        for k in 0..3 {
            let t = 2.0 * m * (phase - 2.0 * std::f64::consts::PI * k as f64 / 3.0).cos();
            candidates.push(t - shift);
        }
    } else {
        // One real root (Cardano, cancellation-safe pairing).
        let sq = disc.sqrt();
        let u = if q <= 0.0 { (-0.5 * q + sq).cbrt() } else { (-0.5 * q - sq).cbrt() };
        let t = if u == 0.0 { 0.0 } else { u - p / (3.0 * u) };
        candidates.push(t - shift);
    }
    candidates.iter_mut().for_each(|r| *r = polish(c0, c1, c2, c3, *r));
    candidates.retain(|r| r.is_finite());
    if candidates.is_empty() {
        return solve_quadratic(c0, c1, c2);
    }

    let res_at = |x: f64| eval(c0, c1, c2, c3, x).abs();
    let scale_at = |x: f64| {
        let ax = x.abs();
        (c0.abs() + (c1.abs() + (c2.abs() + c3.abs() * ax) * ax) * ax).max(f64::MIN_POSITIVE)
    };
    let best = candidates
        .iter()
        .copied()
        .min_by(|a, b| res_at(*a).total_cmp(&res_at(*b)))
        .expect("non-empty");

    // Deflate by the most trustworthy root and solve the remaining
    // quadratic on the original coefficients. This recovers roots the
    // depressed form loses to cancellation when the shift c2/(3 c3)
    // dwarfs the roots themselves (nearly quadratic cubics). Synthetic
    // division runs from both ends because the forward direction is only
    // stable when deflating the smallest root, the backward one only when
    // deflating the largest.
    let fwd1 = c2 + c3 * best;
    let fwd0 = c1 + fwd1 * best;
    for extra in solve_quadratic(fwd0, fwd1, c3).roots {
        candidates.push(polish(c0, c1, c2, c3, extra));
    }
    if best != 0.0 {
        let bwd0 = -c0 / best;
        let bwd1 = (bwd0 - c1) / best;
        for extra in solve_quadratic(bwd0, bwd1, c3).roots {
            candidates.push(polish(c0, c1, c2, c3, extra));
        }
    }

    // Keep the best-polished root unconditionally; every other candidate
    // must actually be a root of the original cubic at working precision.
    let mut roots: Vec<f64> = candidates
        .into_iter()
        .filter(|&x| x.is_finite() && (x == best || res_at(x) <= 1.0e-9 * scale_at(x)))
        .collect();
    roots.sort_by(f64::total_cmp);
    roots.dedup_by(|a, b| (*a - *b).abs() <= 1.0e-7 * a.abs().max(b.abs()));

    // Nearly coincident roots are judged on the roots actually found, not
    // on the depressed discriminant, whose natural scale is distorted by
    // the shift: either two retained roots sit close together, or the
    // derivative nearly vanishes at one (a merged double root).
    let deriv_scale = |x: f64| {
        let ax = x.abs();
        (c1.abs() + (2.0 * c2.abs() + 3.0 * c3.abs() * ax) * ax).max(f64::MIN_POSITIVE)
    };
    let near_double = roots
        .windows(2)
        .any(|w| w[1] - w[0] <= 1.0e-5 * w[1].abs().max(w[0].abs()))
        || roots
            .iter()
            .any(|&x| eval_deriv(c1, c2, c3, x).abs() <= 1.0e-5 * deriv_scale(x));
    RealRoots { roots, near_double }
}
