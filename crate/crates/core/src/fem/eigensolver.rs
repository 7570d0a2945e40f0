//! Lowest eigenpairs of `K x = λ M x` by spectrum slicing: shift-invert
//! Lanczos with full reorthogonalization and locking inside each slice,
//! and Sylvester inertia counts proving that no eigenvalue was skipped.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use super::assembly::DiscreteOperatorPair;
use super::sparse::{reverse_cuthill_mckee, SkylineLdlt};
use crate::error::{Error, Result};
use crate::linalg::{tridiagonal_eigen, Dense};

pub const DEFAULT_RESIDUAL_TOL: f64 = 1e-8;
pub const DEFAULT_SLICE: usize = 40;
const MAX_ROUNDS: usize = 12;
const CHUNK: usize = 4096;

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct EigenOptions {
    pub count: usize,
    /// Accept a pair when `‖Kx − λMx‖_{M⁻¹} ≤ tol·max(1, λ)` with `‖x‖_M = 1`.
    pub residual_tol: f64,
    pub slice: usize,
    pub seed: u64,
    pub keep_vectors: bool,
}

impl EigenOptions {
    pub fn new(count: usize) -> Self {
        Self { count, residual_tol: DEFAULT_RESIDUAL_TOL, slice: DEFAULT_SLICE, seed: 0x5eed, keep_vectors: false }
    }
}

#[derive(Clone, Debug, Default, PartialEq)]
pub struct SolveDiagnostics {
    pub slices: usize,
    pub factorizations: usize,
    pub lanczos_steps: usize,
    pub profile_size: usize,
}

#[derive(Clone, Debug)]
pub struct EigenSolution {
    pub values: Vec<f64>,
    /// Upper bounds on `‖Kx − λMx‖_{M⁻¹}` for M-normalized `x`.
    pub residuals: Vec<f64>,
    pub vectors: Option<Vec<Vec<f64>>>,
    pub diagnostics: SolveDiagnostics,
}

/// Deterministic parallel dot product (fixed chunking).
fn pdot(a: &[f64], b: &[f64]) -> f64 {
    let partial: Vec<f64> = a.par_chunks(CHUNK).zip(b.par_chunks(CHUNK)).map(|(x, y)| x.iter().zip(y).map(|(u, v)| u * v).sum()).collect();
    partial.iter().sum()
}

fn paxpy(alpha: f64, x: &[f64], y: &mut [f64]) {
    y.par_chunks_mut(CHUNK).zip(x.par_chunks(CHUNK)).for_each(|(yc, xc)| {
        for (u, v) in yc.iter_mut().zip(xc) {
            *u += alpha * v;
        }
    });
}

/// `x_c = Σ_k s[k, c]·q_k` for every candidate column, swept in row
/// blocks so each basis block is read once.
fn ritz_vectors(basis: &[Vec<f64>], s: &Dense<f64>, candidates: &[usize], n: usize) -> Vec<Vec<f64>> {
    const BLOCK: usize = 512;
    let mut out = vec![vec![0.0; n]; candidates.len()];
    let mut blocks: Vec<Vec<&mut [f64]>> = (0..n.div_ceil(BLOCK)).map(|_| Vec::with_capacity(candidates.len())).collect();
    for x in out.iter_mut() {
        for (b, chunk) in x.chunks_mut(BLOCK).enumerate() {
            blocks[b].push(chunk);
        }
    }
    blocks.par_iter_mut().enumerate().for_each(|(b, xs)| {
        let lo = b * BLOCK;
        for (k, q) in basis.iter().enumerate() {
            let qb = &q[lo..(lo + BLOCK).min(n)];
            for (x, &c) in xs.iter_mut().zip(candidates) {
                let coef = s[(k, c)];
                for (u, v) in x.iter_mut().zip(qb) {
                    *u += coef * v;
                }
            }
        }
    });
    out
}

struct Pair {
    value: f64,
    vector: Vec<f64>,
    residual: f64,
}

struct Slicer<'a> {
    ops: &'a DiscreteOperatorPair,
    perm: Vec<usize>,
    options: EigenOptions,
    diag: SolveDiagnostics,
}

impl<'a> Slicer<'a> {
    fn factor_shifted(&mut self, sigma: f64) -> Result<(SkylineLdlt, f64)> {
        let mut s = sigma;
        let mut last_err = None;
        for _ in 0..4 {
            let a = self.ops.stiffness.axpy_same_pattern(-s, &self.ops.mass)?;
            self.diag.factorizations += 1;
            match SkylineLdlt::factor(&a, &self.perm) {
                Ok(f) => {
                    self.diag.profile_size = f.profile_size();
                    return Ok((f, s));
                }
                Err(e) => {
                    last_err = Some(e);
                    s = if s == 0.0 { 1e-8 } else { s * (1.0 + 1e-6) };
                }
            }
        }
        Err(last_err.expect("at least one attempt"))
    }

    fn residual(&self, value: f64, x: &[f64]) -> f64 {
        let kx = self.ops.stiffness.matvec(x);
        let mx = self.ops.mass.matvec(x);
        // M ≥ M_lumped/4 elementwise for P1, so ‖r‖_{M⁻¹} ≤ 2‖r‖_{M_lumped⁻¹}.
        let s: f64 = kx
            .par_chunks(CHUNK)
            .zip(mx.par_chunks(CHUNK))
            .zip(self.ops.lumped_mass.par_chunks(CHUNK))
            .map(|((k, m), l)| k.iter().zip(m).zip(l).map(|((&k, &m), &l)| (k - value * m).powi(2) / l).sum::<f64>())
            .collect::<Vec<f64>>()
            .iter()
            .sum();
        2.0 * s.sqrt()
    }

    /// M-orthogonalizes `w` against `locked` and `basis`, repeating the pass
    /// only when it cancelled most of `w` (DGKS criterion). Returns the
    /// accumulated coefficient on `basis[track]`.
    fn orthogonalize(&self, w: &mut [f64], locked: &[Pair], basis: &[Vec<f64>], track: Option<usize>) -> f64 {
        let mut tracked = 0.0;
        for _ in 0..3 {
            let mw = self.ops.mass.matvec(w);
            let before = pdot(w, &mw);
            let cl: Vec<f64> = locked.iter().map(|p| pdot(&p.vector, &mw)).collect();
            let cb: Vec<f64> = basis.iter().map(|q| pdot(q, &mw)).collect();
            for (p, c) in locked.iter().zip(&cl) {
                paxpy(-c, &p.vector, w);
            }
            for (q, c) in basis.iter().zip(&cb) {
                paxpy(-c, q, w);
            }
            if let Some(i) = track {
                tracked += cb[i];
            }
            let removed: f64 = cl.iter().chain(&cb).map(|c| c * c).sum();
            if removed <= 0.5 * before {
                break;
            }
        }
        tracked
    }

    fn m_norm(&self, x: &[f64]) -> f64 {
        self.ops.mass.inner(x, x).max(0.0).sqrt()
    }

    fn random_start(&self, rng: &mut ChaCha8Rng, locked: &[Pair], basis: &[Vec<f64>]) -> Option<Vec<f64>> {
        let n = self.ops.dim();
        for _ in 0..3 {
            let mut v: Vec<f64> = (0..n).map(|_| rng.gen_range(-1.0..1.0)).collect();
            self.orthogonalize(&mut v, locked, basis, None);
            let norm = self.m_norm(&v);
            if norm > 1e-10 {
                v.iter_mut().for_each(|x| *x /= norm);
                return Some(v);
            }
        }
        None
    }

    /// One Lanczos run on `(K − σM)⁻¹M`, deflated against `locked`;
    /// returns newly converged pairs.
    fn lanczos(&mut self, factor: &SkylineLdlt, sigma: f64, steps: usize, locked: &[Pair], rng: &mut ChaCha8Rng) -> Result<Vec<Pair>> {
        let n = self.ops.dim();
        let steps = steps.min(n.saturating_sub(locked.len()));
        if steps == 0 {
            return Ok(Vec::new());
        }
        let mut basis: Vec<Vec<f64>> = Vec::with_capacity(steps + 1);
        let Some(q0) = self.random_start(rng, locked, &basis) else {
            return Ok(Vec::new());
        };
        basis.push(q0);
        let mut alpha = Vec::with_capacity(steps);
        let mut beta: Vec<f64> = Vec::with_capacity(steps);
        for j in 0..steps {
            let mq = self.ops.mass.matvec(&basis[j]);
            let mut w = factor.solve(&mq);
            self.diag.lanczos_steps += 1;
            if j > 0 {
                paxpy(-beta[j - 1], &basis[j - 1], &mut w);
            }
            let mut a = pdot(&w, &mq);
            paxpy(-a, &basis[j], &mut w);
            a += self.orthogonalize(&mut w, locked, &basis, Some(j));
            alpha.push(a);
            let b = self.m_norm(&w);
            if j + 1 == steps {
                beta.push(b);
                break;
            }
            if b <= 1e-12 * a.abs().max(f64::MIN_POSITIVE) {
                // Invariant subspace: continue from a fresh orthogonal vector.
                match self.random_start(rng, locked, &basis) {
                    Some(q) => {
                        beta.push(0.0);
                        basis.push(q);
                    }
                    None => break,
                }
            } else {
                beta.push(b);
                w.iter_mut().for_each(|x| *x /= b);
                basis.push(w);
            }
        }
        let m = alpha.len();
        let (theta, s) = tridiagonal_eigen(&alpha, &beta[..m - 1], true)?;
        let s = s.expect("vectors requested");
        let beta_m = beta[m - 1];
        let candidates: Vec<usize> = (0..m)
            .filter(|&i| theta[i].abs() >= f64::MIN_POSITIVE && (beta_m * s[(m - 1, i)]).abs() <= 1e-6 * theta[i].abs())
            .collect();
        let vectors = ritz_vectors(&basis[..m], &s, &candidates, n);
        let mut out = Vec::new();
        for (&i, mut x) in candidates.iter().zip(vectors) {
            let value = sigma + 1.0 / theta[i];
            let norm = self.m_norm(&x);
            x.iter_mut().for_each(|v| *v /= norm);
            let residual = self.residual(value, &x);
            if residual <= self.options.residual_tol * value.abs().max(1.0) {
                out.push(Pair { value, vector: x, residual });
            }
        }
        Ok(out)
    }

    fn inertia(&mut self, at: f64) -> Result<usize> {
        let a = self.ops.stiffness.axpy_same_pattern(-at, &self.ops.mass)?;
        self.diag.factorizations += 1;
        Ok(SkylineLdlt::factor(&a, &self.perm)?.negative_pivots())
    }
}

/// The `count` smallest eigenpairs of `(K, M)`, ascending.
pub fn solve_lowest(ops: &DiscreteOperatorPair, options: &EigenOptions) -> Result<EigenSolution> {
    let n = ops.dim();
    if options.count == 0 {
        return Err(Error::Domain("eigenvalue count must be at least 1".into()));
    }
    if options.count >= n {
        return Err(Error::Domain(format!("requested {} eigenvalues of a {n}-dimensional problem; refine the mesh", options.count)));
    }
    let perm = reverse_cuthill_mckee(&ops.stiffness);
    let mut slicer = Slicer { ops, perm, options: *options, diag: SolveDiagnostics::default() };
    let density = ops.area / (4.0 * std::f64::consts::PI);
    let weyl_inverse = |k: f64| {
        // Two-term Weyl: k = |Ω|λ/4π − |∂Ω|√λ/4π, solved for λ.
        let a = density;
        let b = ops.perimeter / (4.0 * std::f64::consts::PI);
        let r = (b + (b * b + 4.0 * a * k).sqrt()) / (2.0 * a);
        r * r
    };

    let mut accepted: Vec<Pair> = Vec::new();
    let mut carried: Vec<Pair> = Vec::new();
    let mut lower = 0.0f64;
    let mut slice_index = 0u64;
    while accepted.len() < options.count {
        slicer.diag.slices += 1;
        slice_index += 1;
        let found = accepted.len();
        let target = options.slice.min(options.count - found);
        let goal = found + target;
        let upper_guess = weyl_inverse(goal as f64 + 0.5).max(lower * 1.01 + 1e-12);
        let sigma0 = if found == 0 { 0.0 } else { 0.5 * (lower + upper_guess) };
        let (factor, sigma) = slicer.factor_shifted(sigma0)?;
        let mut rng = ChaCha8Rng::seed_from_u64(options.seed ^ slice_index.wrapping_mul(0x9E37_79B9_7F4A_7C15));
        let mut locked: Vec<Pair> = std::mem::take(&mut carried);
        let mut upper: Option<(f64, usize)> = None;
        let mut done = false;
        for round in 0..MAX_ROUNDS {
            let steps = 2 * target + 40 + round * target;
            let new = slicer.lanczos(&factor, sigma, steps, &locked, &mut rng)?;
            locked.extend(new);
            locked.sort_by(|a, b| a.value.total_cmp(&b.value));
            let above: Vec<f64> = locked.iter().map(|p| p.value).filter(|&v| v > lower).collect();
            let remaining_space = n - found;
            if upper.is_none() {
                if above.len() > target {
                    // Cut in the widest gap among the last quarter of the slice.
                    let lo = (3 * target / 4).max(1);
                    let k = (lo..=target).max_by(|&i, &j| (above[i] - above[i - 1]).total_cmp(&(above[j] - above[j - 1]))).expect("nonempty range");
                    let cut = 0.5 * (above[k - 1] + above[k]);
                    upper = Some((cut, slicer.inertia(cut)?));
                } else if above.len() == remaining_space {
                    let cut = above.last().copied().unwrap_or(lower) * (1.0 + 1e-9) + 1e-12;
                    upper = Some((cut, slicer.inertia(cut)?));
                } else {
                    continue;
                }
            }
            let (cut, below_cut) = upper.expect("set above");
            let have = above.iter().filter(|&&v| v < cut).count();
            let need = below_cut.checked_sub(found).ok_or_else(|| {
                Error::numeric("spectrum slicing", format!("inertia {below_cut} below {cut:.6e} is less than the {found} eigenvalues already found"))
            })?;
            if have == need {
                let (take, rest): (Vec<Pair>, Vec<Pair>) = locked.into_iter().filter(|p| p.value > lower).partition(|p| p.value < cut);
                accepted.extend(take);
                carried = rest;
                lower = cut;
                done = true;
                break;
            }
            if have > need {
                return Err(Error::numeric(
                    "spectrum slicing",
                    format!("{have} converged pairs in ({lower:.6e}, {cut:.6e}) but inertia counts {need}"),
                ));
            }
        }
        if !done {
            return Err(Error::numeric(
                "shift-invert Lanczos",
                format!(
                    "slice {} around σ = {sigma:.6e} did not converge after {MAX_ROUNDS} rounds ({} Lanczos steps, {} factorizations)",
                    slicer.diag.slices, slicer.diag.lanczos_steps, slicer.diag.factorizations
                ),
            ));
        }
    }
    accepted.truncate(options.count);
    let values = accepted.iter().map(|p| p.value).collect();
    let residuals = accepted.iter().map(|p| p.residual).collect();
    let vectors = options.keep_vectors.then(|| accepted.into_iter().map(|p| p.vector).collect());
    Ok(EigenSolution { values, residuals, vectors, diagnostics: slicer.diag })
}
