//! Derivative-free minimization: Nelder–Mead with restarts, then
//! coordinate-wise golden-section polishing.

const MAX_RESTARTS: usize = 12;
const MAX_SWEEPS: usize = 64;
const GOLDEN: f64 = 0.618_033_988_749_894_9;

/// Minimize `f` from `x0`; `scale` sets the initial simplex size per
/// coordinate. Non-finite values of `f` are treated as `+inf`.
pub(crate) fn minimize<F: Fn(&[f64]) -> f64>(f: F, x0: &[f64], scale: &[f64]) -> (Vec<f64>, f64) {
    let g = |x: &[f64]| {
        let v = f(x);
        if v.is_nan() {
            f64::INFINITY
        } else {
            v
        }
    };
    let mut x = x0.to_vec();
    let mut fx = g(&x);
    if x.is_empty() {
        return (x, fx);
    }
    let mut step: Vec<f64> = scale.to_vec();
    for _ in 0..MAX_RESTARTS {
        let (nx, nf) = nelder_mead(&g, &x, &step);
        let improved = fx - nf > 1e-15 * (1.0 + fx.abs());
        if nf <= fx {
            x = nx;
            fx = nf;
        }
        if !improved {
            break;
        }
        for s in &mut step {
            *s *= 0.1;
        }
    }
    polish(&g, &mut x, &mut fx);
    (x, fx)
}

fn nelder_mead<F: Fn(&[f64]) -> f64>(f: &F, x0: &[f64], step: &[f64]) -> (Vec<f64>, f64) {
    let d = x0.len();
    let mut simplex: Vec<(Vec<f64>, f64)> = Vec::with_capacity(d + 1);
    simplex.push((x0.to_vec(), f(x0)));
    for i in 0..d {
        let mut p = x0.to_vec();
        p[i] += if step[i] != 0.0 { step[i] } else { 1e-3 };
        let fp = f(&p);
        simplex.push((p, fp));
    }
    let max_iter = 2000 * (d + 1);
    for _ in 0..max_iter {
        simplex.sort_by(|a, b| a.1.total_cmp(&b.1));
        let best = simplex[0].1;
        let worst = simplex[d].1;
        let spread = worst - best;
        let diameter = simplex[1..]
            .iter()
            .flat_map(|(p, _)| {
                p.iter()
                    .zip(&simplex[0].0)
                    .map(|(a, b)| (a - b).abs() / (1.0 + b.abs()))
            })
            .fold(0.0, f64::max);
        if (spread.is_finite() && spread <= 1e-16 * (1.0 + best.abs()) && diameter <= 1e-10) || diameter <= 1e-15 {
            break;
        }
        let mut centroid = vec![0.0; d];
        for (p, _) in &simplex[..d] {
            for (c, v) in centroid.iter_mut().zip(p) {
                *c += v / d as f64;
            }
        }
        let along = |t: f64| -> Vec<f64> {
            centroid
                .iter()
                .zip(&simplex[d].0)
                .map(|(c, w)| c + t * (w - c))
                .collect()
        };
        let xr = along(-1.0);
        let fr = f(&xr);
        if fr < simplex[0].1 {
            let xe = along(-2.0);
            let fe = f(&xe);
            simplex[d] = if fe < fr { (xe, fe) } else { (xr, fr) };
        } else if fr < simplex[d - 1].1 {
            simplex[d] = (xr, fr);
        } else {
            let (xc, fc) = if fr < simplex[d].1 {
                let xc = along(-0.5);
                let fc = f(&xc);
                (xc, fc)
            } else {
                let xc = along(0.5);
                let fc = f(&xc);
                (xc, fc)
            };
            if fc < simplex[d].1.min(fr) {
                simplex[d] = (xc, fc);
            } else {
                let best = simplex[0].0.clone();
                for (p, fp) in simplex.iter_mut().skip(1) {
                    for (v, b) in p.iter_mut().zip(&best) {
                        *v = b + 0.5 * (*v - b);
                    }
                    *fp = f(p);
                }
            }
        }
    }
    simplex.sort_by(|a, b| a.1.total_cmp(&b.1));
    simplex.swap_remove(0)
}

/// Argmin of `g` on `[a, b]` by golden-section search.
fn golden_section<G: Fn(f64) -> f64>(g: &G, mut a: f64, mut b: f64) -> (f64, f64) {
    let mut c = b - GOLDEN * (b - a);
    let mut d = a + GOLDEN * (b - a);
    let mut fc = g(c);
    let mut fd = g(d);
    for _ in 0..200 {
        if (b - a).abs() <= 1e-15 * (1.0 + a.abs().max(b.abs())) {
            break;
        }
        if fc < fd {
            b = d;
            d = c;
            fd = fc;
            c = b - GOLDEN * (b - a);
            fc = g(c);
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + GOLDEN * (b - a);
            fd = g(d);
        }
    }
    if fc < fd {
        (c, fc)
    } else {
        (d, fd)
    }
}

fn polish<F: Fn(&[f64]) -> f64>(f: &F, x: &mut [f64], fx: &mut f64) {
    for _ in 0..MAX_SWEEPS {
        let before = *fx;
        for i in 0..x.len() {
            let base = x.to_vec();
            let line = |t: f64| {
                let mut probe = base.clone();
                probe[i] = t;
                f(&probe)
            };
            let xi = x[i];
            let mut half = 1e-2 * (1.0 + xi.abs());
            let mut best = (xi, *fx);
            for _ in 0..40 {
                let (lo, hi) = (best.0 - half, best.0 + half);
                let (t, ft) = golden_section(&line, lo, hi);
                if ft < best.1 {
                    best = (t, ft);
                }
                let at_edge = (t - lo).abs() < 0.05 * half || (hi - t).abs() < 0.05 * half;
                if !at_edge {
                    break;
                }
                half *= 4.0;
            }
            if best.1 < *fx {
                x[i] = best.0;
                *fx = best.1;
            }
        }
        if before - *fx <= 1e-16 * (1.0 + before.abs()) {
            break;
        }
    }
}
