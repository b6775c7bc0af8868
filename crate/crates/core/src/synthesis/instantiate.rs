// Licensed under the Apache License, Version 2.0 (the "License"); you may
// not use this file except in compliance with the License. You may obtain
// a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS, WITHOUT
// WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied. See the
// License for the specific language governing permissions and limitations
// under the License.

//! Numerical fitting of template angles to a target unitary.
//!
//! The optimizer minimizes `f = 1 - |Tr(T^dagger U)|^2 / N^2`, which shares
//! its zero set with the HS distance but is smooth at the optimum. Gradients
//! come from one forward pass storing prefix products and one backward pass
//! accumulating suffix products, so a full gradient costs about as much as
//! three unitary evaluations.

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use std::f64::consts::PI;

use super::{target_width, Slot, SynthesisConfig, SynthesisError, Template};
use crate::linalg::Matrix;

type C = Complex64;
const CZERO: C = C::new(0.0, 0.0);

#[derive(Debug, Clone, PartialEq)]
pub struct Instantiation {
    pub params: Vec<f64>,
    pub distance: f64,
}

/// Fits `t` to `target` from `cfg.multistarts` random starts, stopping early
/// once a start reaches the success threshold. `warm` (padded with random
/// angles if short) replaces the first random start.
pub fn instantiate(
    t: &Template,
    target: &Matrix,
    cfg: &SynthesisConfig,
    warm: Option<&[f64]>,
) -> Result<Instantiation, SynthesisError> {
    let width = target_width(target)?;
    if width != t.width() {
        return Err(SynthesisError::Width {
            template: t.width(),
            target: width,
        });
    }
    let mut engine = Engine::new(t, target);
    let np = t.num_params();
    if np == 0 {
        let distance = engine.distance(&[]);
        return Ok(Instantiation {
            params: Vec::new(),
            distance,
        });
    }
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed ^ t.structure_seed());
    let f_stop = 0.1 * cfg.success_threshold;
    let mut best: Option<Instantiation> = None;
    for start in 0..cfg.multistarts.max(1) {
        let mut x0: Vec<f64> = (0..np).map(|_| rng.gen_range(-PI..PI)).collect();
        if start == 0 {
            if let Some(w) = warm {
                let m = w.len().min(np);
                x0[..m].copy_from_slice(&w[..m]);
            }
        }
        let x = bfgs(&mut engine, x0, cfg.optimizer_max_iters, f_stop);
        let distance = engine.distance(&x);
        if !distance.is_finite() {
            continue;
        }
        if best.as_ref().is_none_or(|b| distance < b.distance) {
            best = Some(Instantiation { params: x, distance });
        }
        if best.as_ref().unwrap().distance < cfg.success_threshold {
            break;
        }
    }
    best.ok_or(SynthesisError::NonFinite)
}

/// The instantiation cost `1 - |Tr(T^dag U)|^2 / N^2` of `t` at `params`
/// together with its analytic gradient. Panics if `params` does not have
/// one entry per template parameter.
pub fn cost_and_gradient(
    t: &Template,
    target: &Matrix,
    params: &[f64],
) -> Result<(f64, Vec<f64>), SynthesisError> {
    let width = target_width(target)?;
    if width != t.width() {
        return Err(SynthesisError::Width {
            template: t.width(),
            target: width,
        });
    }
    assert_eq!(params.len(), t.num_params(), "parameter count mismatch");
    let mut engine = Engine::new(t, target);
    let mut grad = vec![0.0; t.num_params()];
    let f = engine.cost_grad(params, &mut grad);
    Ok((f, grad))
}

/// `(theta, phi, lambda)` with `u3(theta, phi, lambda)` equal to `u` up to
/// global phase.
pub fn zyz_angles(u: &Matrix) -> (f64, f64, f64) {
    let (u00, u01, u10, u11) = (u[[0, 0]], u[[0, 1]], u[[1, 0]], u[[1, 1]]);
    let theta = 2.0 * u10.norm().atan2(u00.norm());
    if u00.norm() > 1e-9 {
        let alpha = u00.arg();
        let phi = if u10.norm() > 1e-9 { u10.arg() - alpha } else { 0.0 };
        let lambda = if u10.norm() > 1e-9 {
            (-u01).arg() - alpha
        } else {
            u11.arg() - alpha - phi
        };
        (theta, phi, lambda)
    } else {
        let alpha = u10.arg();
        (theta, 0.0, (-u01).arg() - alpha)
    }
}

fn u3_with_derivs(theta: f64, phi: f64, lambda: f64) -> ([[C; 2]; 2], [[[C; 2]; 2]; 3]) {
    let (s, c) = (theta / 2.0).sin_cos();
    let el = C::from_polar(1.0, lambda);
    let ep = C::from_polar(1.0, phi);
    let epl = ep * el;
    let i = C::new(0.0, 1.0);
    let u = [[C::new(c, 0.0), -el * s], [ep * s, epl * c]];
    let d_theta = [[C::new(-s / 2.0, 0.0), -el * (c / 2.0)], [ep * (c / 2.0), -epl * (s / 2.0)]];
    let d_phi = [[CZERO, CZERO], [i * ep * s, i * epl * c]];
    let d_lambda = [[CZERO, -i * el * s], [CZERO, i * epl * c]];
    (u, [d_theta, d_phi, d_lambda])
}

/// Dense row-major work buffers for one template/target pair.
struct Engine<'a> {
    template: &'a Template,
    n: usize,
    dim: usize,
    target_dag: Vec<C>,
    prefixes: Vec<Vec<C>>,
    current: Vec<C>,
    suffix: Vec<C>,
}

impl<'a> Engine<'a> {
    fn new(template: &'a Template, target: &Matrix) -> Self {
        let dim = target.nrows();
        let mut target_dag = vec![CZERO; dim * dim];
        for r in 0..dim {
            for c in 0..dim {
                target_dag[r * dim + c] = target[[c, r]].conj();
            }
        }
        Engine {
            template,
            n: template.width(),
            dim,
            target_dag,
            prefixes: vec![vec![CZERO; dim * dim]; template.slots().len()],
            current: vec![CZERO; dim * dim],
            suffix: vec![CZERO; dim * dim],
        }
    }


    /// Forward pass filling `prefixes` and `current`; returns `Tr(T^dagger U)`.
    fn forward(&mut self, params: &[f64]) -> C {
        let dim = self.dim;
        self.current.fill(CZERO);
        for i in 0..dim {
            self.current[i * dim + i] = C::new(1.0, 0.0);
        }
        let mut p = 0;
        for (j, slot) in self.template.slots().iter().enumerate() {
            self.prefixes[j].copy_from_slice(&self.current);
            match *slot {
                Slot::U3(q) => {
                    let (u, _) = u3_with_derivs(params[p], params[p + 1], params[p + 2]);
                    p += 3;
                    u3_left(&mut self.current, dim, mask_of(self.n, q), &u);
                }
                Slot::Cnot(a, b) => cnot_left(&mut self.current, dim, mask_of(self.n, a), mask_of(self.n, b)),
            }
        }
        let mut tr = CZERO;
        for x in 0..dim {
            for y in 0..dim {
                tr += self.target_dag[x * dim + y] * self.current[y * dim + x];
            }
        }
        tr
    }

    fn distance(&mut self, params: &[f64]) -> f64 {
        let tr = self.forward(params);
        (1.0 - tr.norm() / self.dim as f64).max(0.0)
    }

    /// Smooth cost and its gradient.
    fn cost_grad(&mut self, params: &[f64], grad: &mut [f64]) -> f64 {
        let dim = self.dim;
        let n2 = (dim * dim) as f64;
        let tr = self.forward(params);
        self.suffix.copy_from_slice(&self.target_dag);
        let mut p = params.len();
        for (j, slot) in self.template.slots().iter().enumerate().rev() {
            match *slot {
                Slot::U3(q) => {
                    p -= 3;
                    let mask = mask_of(self.n, q);
                    let (u, du) = u3_with_derivs(params[p], params[p + 1], params[p + 2]);
                    let env = environment(&self.prefixes[j], &self.suffix, dim, mask);
                    for (k, d) in du.iter().enumerate() {
                        let mut dt = CZERO;
                        for a in 0..2 {
                            for b in 0..2 {
                                dt += d[a][b] * env[a][b];
                            }
                        }
                        grad[p + k] = -2.0 * (tr.conj() * dt).re / n2;
                    }
                    u3_right(&mut self.suffix, dim, mask, &u);
                }
                Slot::Cnot(a, b) => cnot_right(&mut self.suffix, dim, mask_of(self.n, a), mask_of(self.n, b)),
            }
        }
        1.0 - tr.norm_sqr() / n2
    }
}

/// `E[a][b] = sum over rest, z of P[(b, rest)][z] * S[z][(a, rest)]`, so that
/// `Tr(S G P) = sum E[a][b] u[a][b]` for `G = u` embedded at `mask`.
fn environment(prefix: &[C], suffix: &[C], dim: usize, mask: usize) -> [[C; 2]; 2] {
    let mut e = [[CZERO; 2]; 2];
    for rest in (0..dim).filter(|r| r & mask == 0) {
        let idx = [rest, rest | mask];
        for a in 0..2 {
            for b in 0..2 {
                let row = &prefix[idx[b] * dim..(idx[b] + 1) * dim];
                let mut acc = CZERO;
                for (z, pv) in row.iter().enumerate() {
                    acc += pv * suffix[z * dim + idx[a]];
                }
                e[a][b] += acc;
            }
        }
    }
    e
}

fn mask_of(n: usize, q: usize) -> usize {
    1 << (n - 1 - q)
}

fn u3_left(m: &mut [C], dim: usize, mask: usize, u: &[[C; 2]; 2]) {
    for r0 in (0..dim).filter(|r| r & mask == 0) {
        let r1 = r0 | mask;
        for c in 0..dim {
            let a = m[r0 * dim + c];
            let b = m[r1 * dim + c];
            m[r0 * dim + c] = u[0][0] * a + u[0][1] * b;
            m[r1 * dim + c] = u[1][0] * a + u[1][1] * b;
        }
    }
}

fn u3_right(m: &mut [C], dim: usize, mask: usize, u: &[[C; 2]; 2]) {
    for r in 0..dim {
        let row = &mut m[r * dim..(r + 1) * dim];
        for c0 in (0..dim).filter(|c| c & mask == 0) {
            let c1 = c0 | mask;
            let (a, b) = (row[c0], row[c1]);
            row[c0] = a * u[0][0] + b * u[1][0];
            row[c1] = a * u[0][1] + b * u[1][1];
        }
    }
}

fn cnot_left(m: &mut [C], dim: usize, cmask: usize, tmask: usize) {
    for r in (0..dim).filter(|r| r & cmask != 0 && r & tmask == 0) {
        let r1 = r | tmask;
        for c in 0..dim {
            m.swap(r * dim + c, r1 * dim + c);
        }
    }
}

fn cnot_right(m: &mut [C], dim: usize, cmask: usize, tmask: usize) {
    for r in 0..dim {
        for c in (0..dim).filter(|c| c & cmask != 0 && c & tmask == 0) {
            m.swap(r * dim + c, r * dim + (c | tmask));
        }
    }
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

/// BFGS with a strong-Wolfe line search. Stops at `f_stop`, on a vanishing
/// gradient, on stagnation or after `max_iters` iterations.
fn bfgs(engine: &mut Engine<'_>, x0: Vec<f64>, max_iters: usize, f_stop: f64) -> Vec<f64> {
    let d = x0.len();
    let mut x = x0;
    let mut g = vec![0.0; d];
    let mut f = engine.cost_grad(&x, &mut g);
    let mut h = identity(d);
    let mut fresh = true;
    let mut stall = 0;
    for _ in 0..max_iters {
        if !f.is_finite() || f <= f_stop || g.iter().all(|v| v.abs() < 1e-15) {
            break;
        }
        let mut dir: Vec<f64> = (0..d).map(|i| -dot(&h[i * d..(i + 1) * d], &g)).collect();
        if dot(&dir, &g) >= 0.0 {
            h = identity(d);
            fresh = true;
            dir = g.iter().map(|v| -v).collect();
        }
        let Some((alpha, f_new, g_new)) = line_search(engine, &x, f, &g, &dir) else {
            if fresh {
                break;
            }
            h = identity(d);
            fresh = true;
            continue;
        };
        let s: Vec<f64> = dir.iter().map(|v| alpha * v).collect();
        for (xi, si) in x.iter_mut().zip(&s) {
            *xi += si;
        }
        let y: Vec<f64> = g_new.iter().zip(&g).map(|(a, b)| a - b).collect();
        let sy = dot(&s, &y);
        if f - f_new <= 1e-14 * f.abs().max(1e-300) {
            stall += 1;
            if stall >= 5 {
                f = f_new;
                break;
            }
        } else {
            stall = 0;
        }
        f = f_new;
        g = g_new;
        if sy > 1e-300 {
            if fresh {
                let scale = sy / dot(&y, &y);
                h.iter_mut().for_each(|v| *v = 0.0);
                for i in 0..d {
                    h[i * d + i] = scale;
                }
                fresh = false;
            }
            bfgs_update(&mut h, &s, &y, sy, d);
        }
    }
    let _ = f;
    x
}

fn identity(d: usize) -> Vec<f64> {
    let mut h = vec![0.0; d * d];
    for i in 0..d {
        h[i * d + i] = 1.0;
    }
    h
}

/// `H <- (I - rho s y^T) H (I - rho y s^T) + rho s s^T`.
fn bfgs_update(h: &mut [f64], s: &[f64], y: &[f64], sy: f64, d: usize) {
    let rho = 1.0 / sy;
    let hy: Vec<f64> = (0..d).map(|i| dot(&h[i * d..(i + 1) * d], y)).collect();
    let yhy = dot(y, &hy);
    let coef = (1.0 + rho * yhy) * rho;
    for i in 0..d {
        for j in 0..d {
            h[i * d + j] += coef * s[i] * s[j] - rho * (hy[i] * s[j] + s[i] * hy[j]);
        }
    }
}

type Point = (f64, f64, Vec<f64>);

fn line_search(
    engine: &mut Engine<'_>,
    x: &[f64],
    f0: f64,
    g0: &[f64],
    dir: &[f64],
) -> Option<(f64, f64, Vec<f64>)> {
    const C1: f64 = 1e-4;
    const C2: f64 = 0.9;
    let d0 = dot(g0, dir);
    let mut eval = |a: f64| -> Point {
        let xa: Vec<f64> = x.iter().zip(dir).map(|(xi, di)| xi + a * di).collect();
        let mut ga = vec![0.0; x.len()];
        let fa = engine.cost_grad(&xa, &mut ga);
        (a, fa, ga)
    };
    let armijo = |a: f64, fa: f64| fa <= f0 + C1 * a * d0;
    let mut prev: Point = (0.0, f0, g0.to_vec());
    let mut a = 1.0;
    for i in 0..30 {
        let cur = eval(a);
        if !cur.1.is_finite() {
            a *= 0.25;
            continue;
        }
        if !armijo(cur.0, cur.1) || (i > 0 && cur.1 >= prev.1) {
            return zoom(&mut eval, prev, cur, f0, d0, dir);
        }
        let dc = dot(&cur.2, dir);
        if dc.abs() <= -C2 * d0 {
            return Some(cur);
        }
        if dc >= 0.0 {
            return zoom(&mut eval, cur, prev, f0, d0, dir);
        }
        prev = cur;
        a *= 2.0;
    }
    (prev.0 > 0.0).then_some(prev)
}

fn zoom(
    eval: &mut impl FnMut(f64) -> Point,
    mut lo: Point,
    mut hi: Point,
    f0: f64,
    d0: f64,
    dir: &[f64],
) -> Option<Point> {
    const C1: f64 = 1e-4;
    const C2: f64 = 0.9;
    for _ in 0..40 {
        let dlo = dot(&lo.2, dir);
        let width = hi.0 - lo.0;
        // Quadratic through f(lo), f'(lo), f(hi), kept inside the bracket.
        let denom = 2.0 * (hi.1 - lo.1 - dlo * width);
        let mut a = if denom.abs() > 1e-300 {
            lo.0 - dlo * width * width / denom
        } else {
            lo.0 + 0.5 * width
        };
        let (l, r) = (lo.0.min(hi.0), lo.0.max(hi.0));
        let span = r - l;
        if !a.is_finite() || a < l + 0.1 * span || a > r - 0.1 * span {
            a = 0.5 * (lo.0 + hi.0);
        }
        if span < 1e-16 * lo.0.abs().max(1.0) {
            break;
        }
        let cur = eval(a);
        if !cur.1.is_finite() || cur.1 > f0 + C1 * a * d0 || cur.1 >= lo.1 {
            hi = cur;
        } else {
            let dc = dot(&cur.2, dir);
            if dc.abs() <= -C2 * d0 {
                return Some(cur);
            }
            if dc * (hi.0 - lo.0) >= 0.0 {
                hi = lo;
            }
            lo = cur;
        }
    }
    (lo.0 > 0.0 && lo.1 < f0).then_some(lo)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::circuit::Gate;
    use crate::linalg;
    use crate::synthesis::hs_distance;
    use rand::Rng;

    fn random_u3(rng: &mut ChaCha8Rng) -> Matrix {
        Gate::u3(0, rng.gen_range(-PI..PI), rng.gen_range(-PI..PI), rng.gen_range(-PI..PI)).matrix()
    }

    #[test]
    fn gradient_matches_central_differences() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        let t = Template::root(3).with_layer((0, 1)).with_layer((1, 2)).with_layer((0, 2));
        let target = Template::root(3)
            .with_layer((1, 2))
            .unitary(&(0..15).map(|_| rng.gen_range(-PI..PI)).collect::<Vec<_>>());
        let mut engine = Engine::new(&t, &target);
        for _ in 0..20 {
            let x: Vec<f64> = (0..t.num_params()).map(|_| rng.gen_range(-PI..PI)).collect();
            let mut g = vec![0.0; x.len()];
            engine.cost_grad(&x, &mut g);
            let mut scratch = vec![0.0; x.len()];
            for i in 0..x.len() {
                let h = 1e-6;
                let mut xp = x.clone();
                xp[i] += h;
                let mut xm = x.clone();
                xm[i] -= h;
                let fd = (engine.cost_grad(&xp, &mut scratch) - engine.cost_grad(&xm, &mut scratch))
                    / (2.0 * h);
                assert!((fd - g[i]).abs() <= 1e-6 * fd.abs().max(1e-3), "{i}: {fd} vs {}", g[i]);
            }
        }
    }

    #[test]
    fn distance_matches_dense_oracle() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let t = Template::root(2).with_layer((0, 1));
        let target = linalg::kron(&random_u3(&mut rng), &random_u3(&mut rng));
        let x: Vec<f64> = (0..t.num_params()).map(|_| rng.gen_range(-PI..PI)).collect();
        let mut engine = Engine::new(&t, &target);
        let d = engine.distance(&x);
        let oracle = hs_distance(&target, &t.unitary(&x)).unwrap();
        assert!((d - oracle).abs() < 1e-14);
    }

    #[test]
    fn fits_cnot_with_one_layer() {
        let t = Template::root(2).with_layer((0, 1));
        let r = instantiate(&t, &Gate::cnot(0, 1).matrix(), &SynthesisConfig::default(), None).unwrap();
        assert!(r.distance <= 1e-10, "{}", r.distance);
    }

    #[test]
    fn fits_single_qubit_targets() {
        let t = Template::root(1);
        let cfg = SynthesisConfig::default();
        let r = instantiate(&t, &linalg::identity(2), &cfg, None).unwrap();
        assert!(r.distance <= 1e-10);
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for _ in 0..10 {
            let u = random_u3(&mut rng).mapv(|z| z * C::from_polar(1.0, 0.3));
            let r = instantiate(&t, &u, &cfg, None).unwrap();
            assert!(r.distance <= 1e-10);
            let (a, b, c) = zyz_angles(&u);
            assert!(hs_distance(&u, &Gate::u3(0, a, b, c).matrix()).unwrap() < 1e-14);
        }
    }

    #[test]
    fn zyz_handles_diagonal_and_antidiagonal() {
        for g in [Gate::u3(0, 0.0, 0.0, 0.7), Gate::u3(0, PI, 0.2, 0.5)] {
            let u = g.matrix();
            let (a, b, c) = zyz_angles(&u);
            assert!(hs_distance(&u, &Gate::u3(0, a, b, c).matrix()).unwrap() < 1e-14);
        }
    }

    #[test]
    fn rejects_width_mismatch() {
        let t = Template::root(2);
        assert!(matches!(
            instantiate(&t, &linalg::identity(8), &SynthesisConfig::default(), None),
            Err(SynthesisError::Width { .. })
        ));
    }
}
