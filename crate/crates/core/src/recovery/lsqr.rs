//! LSQR (Paige and Saunders) for sparse least squares without forming `AᵀA`,
//! plus singular-value estimates from the same bidiagonalization.

/// Linear operator with its adjoint.
pub trait LinearMap {
    fn nrows(&self) -> usize;
    fn ncols(&self) -> usize;
    /// `y = A x`
    fn apply(&self, x: &[f64]) -> Vec<f64>;
    /// `x = Aᵀ y`
    fn apply_transpose(&self, y: &[f64]) -> Vec<f64>;
}

#[derive(Debug, Clone, Copy)]
pub struct LsqrOptions {
    pub atol: f64,
    pub btol: f64,
    pub conlim: f64,
    pub max_iter: usize,
}

impl Default for LsqrOptions {
    fn default() -> Self {
        LsqrOptions { atol: 1e-10, btol: 1e-10, conlim: 1e12, max_iter: 50_000 }
    }
}

#[derive(Debug, Clone)]
pub struct LsqrOutput {
    pub x: Vec<f64>,
    /// Reason for stopping, numbered as in the original algorithm (0 means `b = 0`, 7 the iteration cap).
    pub istop: u8,
    pub iterations: usize,
    /// `|b - Ax|` estimate.
    pub rnorm: f64,
}

fn norm(v: &[f64]) -> f64 {
    v.iter().map(|x| x * x).sum::<f64>().sqrt()
}

fn scale(v: &mut [f64], s: f64) {
    v.iter_mut().for_each(|x| *x *= s);
}

/// One Golub-Kahan step: `β u = A v - α u`, then `α v = Aᵀ u - β v`.
fn bidiag_step<A: LinearMap>(a: &A, u: &mut [f64], v: &mut [f64], alpha: f64) -> (f64, f64) {
    let av = a.apply(v);
    u.iter_mut().zip(&av).for_each(|(ui, avi)| *ui = avi - alpha * *ui);
    let beta = norm(u);
    if beta == 0.0 {
        return (0.0, alpha);
    }
    scale(u, 1.0 / beta);
    let atu = a.apply_transpose(u);
    v.iter_mut().zip(&atu).for_each(|(vi, ai)| *vi = ai - beta * *vi);
    let alpha = norm(v);
    if alpha > 0.0 {
        scale(v, 1.0 / alpha);
    }
    (beta, alpha)
}

pub fn lsqr<A: LinearMap>(a: &A, b: &[f64], opts: LsqrOptions) -> LsqrOutput {
    let n = a.ncols();
    let mut x = vec![0.0; n];
    let mut u = b.to_vec();
    let mut beta = norm(&u);
    let bnorm = beta;
    if beta == 0.0 {
        return LsqrOutput { x, istop: 0, iterations: 0, rnorm: 0.0 };
    }
    scale(&mut u, 1.0 / beta);
    let mut v = a.apply_transpose(&u);
    let mut alpha = norm(&v);
    if alpha == 0.0 {
        return LsqrOutput { x, istop: 0, iterations: 0, rnorm: bnorm };
    }
    scale(&mut v, 1.0 / alpha);
    let mut w = v.clone();

    let mut phibar = beta;
    let mut rhobar = alpha;
    let mut anorm2 = 0.0f64;
    let mut ddnorm = 0.0f64;
    let mut rnorm = beta;
    let mut istop = 0;
    let mut itn = 0;

    while itn < opts.max_iter {
        itn += 1;
        let alpha_prev = alpha;
        (beta, alpha) = bidiag_step(a, &mut u, &mut v, alpha);
        anorm2 += alpha_prev * alpha_prev + beta * beta;

        // plane rotation eliminating the subdiagonal beta
        let rho = rhobar.hypot(beta);
        let c = rhobar / rho;
        let s = beta / rho;
        let theta = s * alpha;
        rhobar = -c * alpha;
        let phi = c * phibar;
        phibar *= s;

        let t1 = phi / rho;
        let t2 = -theta / rho;
        let mut dk2 = 0.0;
        for ((xi, wi), vi) in x.iter_mut().zip(w.iter_mut()).zip(&v) {
            *xi += t1 * *wi;
            let dk = *wi / rho;
            dk2 += dk * dk;
            *wi = vi + t2 * *wi;
        }
        ddnorm += dk2;

        let anorm = anorm2.sqrt();
        let acond = anorm * ddnorm.sqrt();
        rnorm = phibar;
        let arnorm = alpha * (s * phi).abs();
        let xnorm = norm(&x);

        let test1 = rnorm / bnorm;
        let test2 = if anorm * rnorm > 0.0 { arnorm / (anorm * rnorm) } else { 0.0 };
        let test3 = 1.0 / acond;
        let rtol = opts.btol + opts.atol * anorm * xnorm / bnorm;
        if test3 <= f64::EPSILON {
            istop = 6;
        }
        if test2 <= f64::EPSILON {
            istop = 5;
        }
        if test1 <= f64::EPSILON {
            istop = 4;
        }
        if test3 <= 1.0 / opts.conlim {
            istop = 3;
        }
        if test2 <= opts.atol {
            istop = 2;
        }
        if test1 <= rtol {
            istop = 1;
        }
        if istop != 0 || alpha == 0.0 || beta == 0.0 {
            break;
        }
    }
    if istop == 0 && itn >= opts.max_iter {
        istop = 7;
    }
    LsqrOutput { x, istop, iterations: itn, rnorm }
}

/// Number of eigenvalues below `x` of the symmetric tridiagonal matrix with
/// diagonal `d` and off-diagonal `e` (Sturm sequence).
fn count_below(d: &[f64], e: &[f64], x: f64) -> usize {
    let mut count = 0;
    let mut q = 1.0;
    for i in 0..d.len() {
        let off = if i == 0 { 0.0 } else { e[i - 1] * e[i - 1] };
        q = d[i] - x - if i == 0 { 0.0 } else { off / q };
        if q == 0.0 {
            q = f64::EPSILON * (d[i].abs() + off.sqrt()).max(f64::MIN_POSITIVE);
        }
        if q < 0.0 {
            count += 1;
        }
    }
    count
}

/// Smallest and largest eigenvalue of a symmetric tridiagonal matrix by bisection.
fn tridiagonal_extremes(d: &[f64], e: &[f64]) -> (f64, f64) {
    let k = d.len();
    let radius = |i: usize| if i > 0 { e[i - 1].abs() } else { 0.0 } + if i < e.len() { e[i].abs() } else { 0.0 };
    let lo = (0..k).map(|i| d[i] - radius(i)).fold(f64::INFINITY, f64::min);
    let hi = (0..k).map(|i| d[i] + radius(i)).fold(f64::NEG_INFINITY, f64::max);
    // smallest x with at least `target` eigenvalues below it
    let bisect = |target: usize| {
        let (mut a, mut b) = (lo, hi + f64::EPSILON * hi.abs().max(1.0));
        for _ in 0..200 {
            let mid = 0.5 * (a + b);
            if mid <= a || mid >= b {
                break;
            }
            if count_below(d, e, mid) >= target {
                b = mid;
            } else {
                a = mid;
            }
        }
        0.5 * (a + b)
    };
    (bisect(1).max(0.0), bisect(k))
}

#[derive(Debug, Clone, Copy)]
pub struct SingularValueEstimate {
    pub min: f64,
    pub max: f64,
    pub iterations: usize,
    /// Whether the Ritz values settled before the iteration cap.
    pub converged: bool,
}

/// Extreme singular values of `A` from the Ritz values of a Golub-Kahan
/// bidiagonalization started at `start`.
///
/// The Ritz values bracket from inside (`min` decreases towards `σ_min`,
/// `max` increases towards `σ_max`). Iteration stops once both change by less
/// than `tol` (relative) over a window of `window` steps.
pub fn singular_value_estimate<A: LinearMap>(
    a: &A,
    start: &[f64],
    max_iter: usize,
    window: usize,
    tol: f64,
) -> SingularValueEstimate {
    let mut u = start.to_vec();
    let beta0 = norm(&u);
    if beta0 == 0.0 {
        return SingularValueEstimate { min: 0.0, max: 0.0, iterations: 0, converged: false };
    }
    scale(&mut u, 1.0 / beta0);
    let mut v = a.apply_transpose(&u);
    let mut alpha = norm(&v);
    if alpha == 0.0 {
        return SingularValueEstimate { min: 0.0, max: 0.0, iterations: 0, converged: true };
    }
    scale(&mut v, 1.0 / alpha);

    // B is lower bidiagonal with diagonal alphas and subdiagonal betas, so
    // BᵀB has diagonal α_i² + β_{i+1}² and off-diagonal α_{i+1} β_{i+1}.
    let mut alphas = vec![alpha];
    let mut betas = Vec::new();
    let mut last: Option<(f64, f64)> = None;
    let extremes = |alphas: &[f64], betas: &[f64]| {
        let k = betas.len();
        let d: Vec<f64> = (0..k).map(|i| alphas[i] * alphas[i] + betas[i] * betas[i]).collect();
        let e: Vec<f64> = (0..k.saturating_sub(1)).map(|i| alphas[i + 1] * betas[i]).collect();
        let (lmin, lmax) = tridiagonal_extremes(&d, &e);
        (lmin.sqrt(), lmax.sqrt())
    };
    for it in 1..=max_iter {
        let (beta, next) = bidiag_step(a, &mut u, &mut v, alpha);
        betas.push(beta);
        alpha = next;
        let breakdown = beta == 0.0 || alpha == 0.0;
        if breakdown || it % window == 0 || it == max_iter {
            let (smin, smax) = extremes(&alphas, &betas);
            let settled = last.is_some_and(|(pmin, pmax)| {
                (pmin - smin).abs() <= tol * smin.max(f64::MIN_POSITIVE) && (pmax - smax).abs() <= tol * smax
            });
            if breakdown || settled {
                return SingularValueEstimate { min: smin, max: smax, iterations: it, converged: true };
            }
            if it == max_iter {
                return SingularValueEstimate { min: smin, max: smax, iterations: it, converged: false };
            }
            last = Some((smin, smax));
        }
        alphas.push(alpha);
    }
    unreachable!("loop returns on the last iteration")
}
