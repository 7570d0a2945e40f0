//! Bessel functions of the first kind of real order and their positive zeros.
//!
//! Values come from Miller's backward recurrence normalized with
//! `(x/2)^μ = Σ_k (μ+2k) Γ(μ+k)/k! · J_{μ+2k}(x)`, which yields the whole
//! ladder `J_{μ+n}(x)`, `n = 0..=n_max`, from one pass. Zeros are bracketed by a
//! sign scan over that ladder and polished with bracketed Newton steps.

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::scalar::Real;

const LANCZOS_G: f64 = 7.0;
const LANCZOS: [f64; 9] = [
    0.999_999_999_999_809_9,
    676.520_368_121_885_1,
    -1_259.139_216_722_402_8,
    771.323_428_777_653_1,
    -176.615_029_162_140_6,
    12.507_343_278_686_905,
    -0.138_571_095_265_720_12,
    9.984_369_578_019_572e-6,
    1.505_632_735_149_311_6e-7,
];

/// Γ(z) for `z ≥ 0.5` (Lanczos approximation).
pub fn gamma<T: Real>(z: T) -> T {
    let z = z - T::one();
    let mut acc = T::lit(LANCZOS[0]);
    for (i, &c) in LANCZOS.iter().enumerate().skip(1) {
        acc += T::lit(c) / (z + T::from_count(i));
    }
    let t = z + T::lit(LANCZOS_G + 0.5);
    T::TAU().sqrt() * t.powf(z + T::lit(0.5)) * (-t).exp() * acc
}

/// Grid spacing of the bracketing scan; zeros of `J_ν`, ν ≥ 0, are more than 3 apart.
const SCAN_STEP: f64 = 0.5;

fn rescale_threshold<T: Real>() -> T {
    T::max_value().sqrt().sqrt()
}

/// Ladder `J_{μ+n}(x)` for `n = 0..=n_max`, with `0 ≤ μ < 1` and `x ≥ 0`.
pub fn bessel_j_ladder<T: Real>(mu: T, n_max: usize, x: T) -> Vec<T> {
    let mut out = vec![T::zero(); n_max + 1];
    if x == T::zero() {
        if mu == T::zero() {
            out[0] = T::one();
        }
        return out;
    }
    let xf = x.as_f64();
    let start_extra = 20.0 + 20.0 * xf.cbrt();
    let mut top = (xf.max(n_max as f64) + start_extra).ceil() as usize;
    top += top % 2;

    let big = rescale_threshold::<T>();
    let two = T::lit(2.0);
    let mut above = T::zero(); // f_{k+1}
    let mut cur = T::min_positive_value().sqrt(); // f_k at k = top
    // Weights for the even-index normalization sum, precomputed upwards.
    let weights = normalization_weights(mu, top / 2);
    let mut norm = T::zero();
    let mut k = top;
    loop {
        if k <= n_max {
            out[k] = cur;
        }
        if k % 2 == 0 {
            let w = if k == 0 { T::one() } else { (mu + T::from_count(k)) * weights[k / 2] };
            norm += w * cur;
        }
        if k == 0 {
            break;
        }
        let below = two * (mu + T::from_count(k)) / x * cur - above;
        above = cur;
        cur = below;
        k -= 1;
        if cur.abs() > big {
            let s = big.recip();
            cur *= s;
            above *= s;
            norm *= s;
            for v in out.iter_mut().skip(k + 1) {
                *v *= s;
            }
        }
    }
    let scale = (x * T::lit(0.5)).powf(mu) / (gamma(mu + T::one()) * norm);
    for v in &mut out {
        *v *= scale;
    }
    out
}

/// `h_k = Γ(μ+k) / (k! Γ(μ+1))` for `k = 0..=kmax` (entry 0 unused).
fn normalization_weights<T: Real>(mu: T, kmax: usize) -> Vec<T> {
    let mut w = vec![T::zero(); kmax + 1];
    if kmax >= 1 {
        w[1] = T::one();
    }
    for k in 1..kmax {
        w[k + 1] = w[k] * (mu + T::from_count(k)) / T::from_count(k + 1);
    }
    w
}

/// `J_ν(x)` for `ν ≥ 0`, `x ≥ 0`.
pub fn bessel_j<T: Real>(nu: T, x: T) -> T {
    let (mu, n) = split_order(nu);
    bessel_j_ladder(mu, n, x)[n]
}

/// `ν = μ + n` with integer `n` and `μ ∈ [0, 1)`.
fn split_order<T: Real>(nu: T) -> (T, usize) {
    let n = nu.floor();
    let mut mu = nu - n;
    let mut n = n.to_usize().unwrap_or(0);
    if mu > T::one() - T::epsilon() * T::lit(8.0) * nu.max(T::one()) {
        mu = T::zero();
        n += 1;
    }
    (mu, n)
}

/// First-order McMahon estimate of the `k`-th zero of `J_ν`.
pub fn mcmahon_guess<T: Real>(nu: T, k: usize) -> T {
    let m = T::lit(4.0) * nu * nu;
    let beta = (T::from_count(k) + nu * T::lit(0.5) - T::lit(0.25)) * T::PI();
    let eb = T::lit(8.0) * beta;
    beta - (m - T::one()) / eb - T::lit(4.0) * (m - T::one()) * (T::lit(7.0) * m - T::lit(31.0)) / (T::lit(3.0) * eb.powi(3))
}

fn zero_tol<T: Real>() -> T {
    (T::epsilon() * T::lit(4.0)).max(T::lit(1e-15))
}

/// Polishes a bracketed zero of `J_{μ+n}` on `[lo, hi]`.
fn refine_zero<T: Real>(mu: T, n: usize, mut lo: T, mut hi: T, guess: T) -> Result<T> {
    let eval = |x: T| {
        let ladder = bessel_j_ladder(mu, n + 1, x);
        let nu = mu + T::from_count(n);
        let j = ladder[n];
        (j, nu / x * j - ladder[n + 1])
    };
    let (mut f_lo, _) = eval(lo);
    let mut x = if guess > lo && guess < hi { guess } else { T::lit(0.5) * (lo + hi) };
    let tol = zero_tol::<T>();
    for _ in 0..200 {
        let (f, df) = eval(x);
        if f == T::zero() {
            return Ok(x);
        }
        if (f < T::zero()) == (f_lo < T::zero()) {
            lo = x;
            f_lo = f;
        } else {
            hi = x;
        }
        let newton = x - f / df;
        let next = if df != T::zero() && newton > lo && newton < hi {
            newton
        } else {
            T::lit(0.5) * (lo + hi)
        };
        let step = (next - x).abs();
        x = next;
        if step <= tol * x || hi - lo <= tol * x {
            return Ok(x);
        }
    }
    Err(Error::numeric(
        "Bessel zero refinement",
        format!("order {} did not converge in [{lo}, {hi}]", (mu + T::from_count(n)).as_f64()),
    ))
}

/// Positive zeros below `x_max` of `J_{μ+n}` for every `n ≤ n_max`.
pub fn ladder_zeros_below<T: Real>(mu: T, n_max: usize, x_max: T) -> Result<Vec<Vec<T>>> {
    let mut zeros: Vec<Vec<T>> = vec![Vec::new(); n_max + 1];
    let mut brackets: Vec<(usize, T, T)> = Vec::new();
    let mut prev_sign: Vec<i8> = vec![1; n_max + 1];
    let step = T::lit(SCAN_STEP);
    let mut prev_x = T::zero();
    let mut i = 1usize;
    loop {
        let x = (step * T::from_count(i)).min(x_max);
        // Only orders below x can have a zero in (0, x].
        let active = (x - mu).floor().to_usize().unwrap_or(0).min(n_max);
        let ladder = bessel_j_ladder(mu, active, x);
        for n in 0..=active {
            if mu + T::from_count(n) >= x {
                break;
            }
            let v = ladder[n];
            let s: i8 = if v > T::zero() { 1 } else if v < T::zero() { -1 } else { 0 };
            if s == 0 {
                zeros[n].push(x);
                prev_sign[n] = -prev_sign[n];
            } else if s != prev_sign[n] {
                brackets.push((n, prev_x, x));
                prev_sign[n] = s;
            }
        }
        if x >= x_max {
            break;
        }
        prev_x = x;
        i += 1;
    }
    let refined: Vec<(usize, T)> = brackets
        .par_iter()
        .map(|&(n, lo, hi)| {
            let nu = mu + T::from_count(n);
            let k = {
                // Index of this zero from the McMahon phase, for the initial guess only.
                let beta = (lo + hi) * T::lit(0.5) / T::PI() - nu * T::lit(0.5) + T::lit(0.25);
                beta.round().to_usize().unwrap_or(1).max(1)
            };
            refine_zero(mu, n, lo, hi, mcmahon_guess(nu, k)).map(|z| (n, z))
        })
        .collect::<Result<Vec<_>>>()?;
    for (n, z) in refined {
        if z <= x_max {
            zeros[n].push(z);
        }
    }
    for z in &mut zeros {
        z.sort_by(|a, b| a.partial_cmp(b).expect("finite zeros"));
    }
    Ok(zeros)
}

/// Positive zeros of `J_ν` below `x_max`, ascending.
pub fn bessel_j_zeros_below<T: Real>(nu: T, x_max: T) -> Result<Vec<T>> {
    let (mu, n) = split_order(nu);
    Ok(ladder_zeros_below(mu, n, x_max)?.swap_remove(n))
}

/// The first `count` positive zeros of `J_ν`.
pub fn bessel_j_zeros<T: Real>(nu: T, count: usize) -> Result<Vec<T>> {
    // j_{ν,k} < ν + kπ + π for ν ≥ 0 bounds the scan range generously.
    let x_max = nu + T::PI() * T::from_count(count + 2) + T::lit(10.0) * (nu + T::one()).cbrt();
    let mut z = bessel_j_zeros_below(nu, x_max)?;
    if z.len() < count {
        return Err(Error::numeric("Bessel zeros", format!("found {} of {count} zeros", z.len())));
    }
    z.truncate(count);
    Ok(z)
}

/// Zeros below `x_max` for arbitrary nonnegative orders, grouped internally by
/// fractional part so each group shares one recurrence.
pub fn zeros_for_orders<T: Real>(orders: &[T], x_max: T) -> Result<Vec<Vec<T>>> {
    let split: Vec<(T, usize)> = orders.iter().map(|&nu| split_order(nu)).collect();
    let mut groups: Vec<(T, Vec<usize>)> = Vec::new();
    let same = T::lit(1e-12).max(T::epsilon() * T::lit(64.0));
    for (idx, &(mu, _)) in split.iter().enumerate() {
        match groups.iter_mut().find(|(g, _)| (*g - mu).abs() <= same) {
            Some((_, members)) => members.push(idx),
            None => groups.push((mu, vec![idx])),
        }
    }
    let per_group: Vec<Vec<(usize, Vec<T>)>> = groups
        .par_iter()
        .map(|(mu, members)| {
            let n_max = members.iter().map(|&i| split[i].1).max().unwrap_or(0);
            let table = ladder_zeros_below(*mu, n_max, x_max)?;
            Ok(members.iter().map(|&i| (i, table[split[i].1].clone())).collect())
        })
        .collect::<Result<_>>()?;
    let mut out = vec![Vec::new(); orders.len()];
    for (i, z) in per_group.into_iter().flatten() {
        out[i] = z;
    }
    Ok(out)
}
