//! Geometric multigrid preconditioned BiCGSTAB for `(-∇² ⊗ I + D) x = b` on
//! the masked disk lattice, with a dense `nf × nf` block `D` at each node.
//!
//! Vectors are interleaved by node (`x[k * nf + a]`) and hold zeros at every
//! node that is not interior, which encodes homogeneous Dirichlet data.

use crate::surface::{Grid, NodeClass};

const PRE_SWEEPS: usize = 2;
const POST_SWEEPS: usize = 2;

struct Level {
    n: usize,
    side: usize,
    inv_h2: f64,
    interior: Vec<bool>,
    red: Vec<usize>,
    black: Vec<usize>,
    /// `D` blocks, `nf * nf` per node.
    d: Vec<f64>,
    /// Inverses of `4/h² I + D`, `nf * nf` per node.
    block_inv: Vec<f64>,
}

impl Level {
    fn new(n: usize, spacing: f64, interior: Vec<bool>, d: Vec<f64>, nf: usize) -> Option<Self> {
        let side = 2 * n + 1;
        let inv_h2 = 1.0 / (spacing * spacing);
        let mut red = Vec::new();
        let mut black = Vec::new();
        let mut block_inv = vec![0.0; side * side * nf * nf];
        for k in 0..side * side {
            if !interior[k] {
                continue;
            }
            let (i, j) = (k % side, k / side);
            if (i + j) % 2 == 0 {
                red.push(k);
            } else {
                black.push(k);
            }
            let mut m = [[0.0; 2]; 2];
            for a in 0..nf {
                for b in 0..nf {
                    m[a][b] = d[(k * nf + a) * nf + b];
                }
                m[a][a] += 4.0 * inv_h2;
            }
            let inv = invert_block(&m, nf, inv_h2)?;
            for a in 0..nf {
                for b in 0..nf {
                    block_inv[(k * nf + a) * nf + b] = inv[a][b];
                }
            }
        }
        Some(Self {
            n,
            side,
            inv_h2,
            interior,
            red,
            black,
            d,
            block_inv,
        })
    }
}

/// Inverse of the point block; `None` when it is too close to singular for
/// Gauss–Seidel to act as a smoother.
fn invert_block(m: &[[f64; 2]; 2], nf: usize, inv_h2: f64) -> Option<[[f64; 2]; 2]> {
    let floor = inv_h2;
    if nf == 1 {
        if m[0][0] < floor {
            return None;
        }
        return Some([[1.0 / m[0][0], 0.0], [0.0, 0.0]]);
    }
    let det = m[0][0] * m[1][1] - m[0][1] * m[1][0];
    if m[0][0] < floor || m[1][1] < floor || det < floor * floor {
        return None;
    }
    Some([
        [m[1][1] / det, -m[0][1] / det],
        [-m[1][0] / det, m[0][0] / det],
    ])
}

/// The linear operator and its multigrid hierarchy.
pub(crate) struct Operator {
    nf: usize,
    levels: Vec<Level>,
}

impl Operator {
    /// `d` holds the `nf × nf` block of `D` for every lattice node.
    /// Returns `None` if the fine-level point blocks are not usable.
    pub(crate) fn new(grid: &Grid, nf: usize, d: Vec<f64>) -> Option<Self> {
        let interior: Vec<bool> = grid
            .classes()
            .iter()
            .map(|c| *c == NodeClass::Interior)
            .collect();
        let fine = Level::new(grid.n(), grid.spacing(), interior, d, nf)?;
        let mut levels = vec![fine];
        let mut spacing = grid.spacing();
        loop {
            let last = levels.last().expect("at least one level");
            if last.n % 2 != 0 || last.n / 2 < 3 {
                break;
            }
            let nc = last.n / 2;
            spacing *= 2.0;
            match coarsen(last, nc, spacing, nf) {
                Some(level) if !level.red.is_empty() => levels.push(level),
                _ => break,
            }
        }
        Some(Self { nf, levels })
    }

    pub(crate) fn len(&self) -> usize {
        let l = &self.levels[0];
        l.side * l.side * self.nf
    }

    /// `y = A x` on the fine level.
    pub(crate) fn apply(&self, x: &[f64], y: &mut [f64]) {
        apply_level(&self.levels[0], self.nf, x, y);
    }

    /// One V-cycle from a zero initial guess: `x ≈ A⁻¹ b`.
    pub(crate) fn precondition(&self, b: &[f64], x: &mut [f64]) {
        x.iter_mut().for_each(|v| *v = 0.0);
        self.vcycle(0, b, x);
    }

    fn vcycle(&self, l: usize, b: &[f64], x: &mut [f64]) {
        let level = &self.levels[l];
        let nf = self.nf;
        if l + 1 == self.levels.len() {
            let sweeps = (4 * level.n).max(20);
            for _ in 0..sweeps {
                smooth(level, nf, b, x, false);
            }
            for _ in 0..sweeps {
                smooth(level, nf, b, x, true);
            }
            return;
        }
        for _ in 0..PRE_SWEEPS {
            smooth(level, nf, b, x, false);
        }
        let mut r = vec![0.0; x.len()];
        apply_level(level, nf, x, &mut r);
        for (ri, bi) in r.iter_mut().zip(b) {
            *ri = bi - *ri;
        }
        let coarse = &self.levels[l + 1];
        let rc = restrict(level, coarse, nf, &r);
        let mut xc = vec![0.0; rc.len()];
        self.vcycle(l + 1, &rc, &mut xc);
        prolong_add(level, coarse, nf, &xc, x);
        for _ in 0..POST_SWEEPS {
            smooth(level, nf, b, x, true);
        }
    }
}

fn coarsen(fine: &Level, nc: usize, spacing: f64, nf: usize) -> Option<Level> {
    let sc = 2 * nc + 1;
    let sf = fine.side;
    let mut interior = vec![false; sc * sc];
    let mut d = vec![0.0; sc * sc * nf * nf];
    const W: [f64; 3] = [1.0, 2.0, 1.0];
    for jc in 0..sc {
        for ic in 0..sc {
            let kf = (2 * jc) * sf + 2 * ic;
            if !fine.interior[kf] {
                continue;
            }
            let kc = jc * sc + ic;
            interior[kc] = true;
            let mut wsum = 0.0;
            let mut acc = [0.0; 4];
            for (db, wb) in W.iter().enumerate() {
                for (da, wa) in W.iter().enumerate() {
                    let k = kf + db * sf + da - sf - 1;
                    if !fine.interior[k] {
                        continue;
                    }
                    let w = wa * wb;
                    wsum += w;
                    for e in 0..nf * nf {
                        acc[e] += w * fine.d[k * nf * nf + e];
                    }
                }
            }
            for e in 0..nf * nf {
                d[kc * nf * nf + e] = acc[e] / wsum;
            }
        }
    }
    Level::new(nc, spacing, interior, d, nf)
}

fn apply_level(level: &Level, nf: usize, x: &[f64], y: &mut [f64]) {
    let side = level.side;
    let s = level.inv_h2;
    y.iter_mut().for_each(|v| *v = 0.0);
    for k in 0..side * side {
        if !level.interior[k] {
            continue;
        }
        for a in 0..nf {
            let c = x[k * nf + a];
            let nb = (x[(k + 1) * nf + a] - c)
                + (x[(k - 1) * nf + a] - c)
                + (x[(k + side) * nf + a] - c)
                + (x[(k - side) * nf + a] - c);
            let mut v = -s * nb;
            for b in 0..nf {
                v += level.d[(k * nf + a) * nf + b] * x[k * nf + b];
            }
            y[k * nf + a] = v;
        }
    }
}

/// Red–black block Gauss–Seidel sweep; `reverse` visits black first.
fn smooth(level: &Level, nf: usize, b: &[f64], x: &mut [f64], reverse: bool) {
    let side = level.side;
    let s = level.inv_h2;
    let order: [&[usize]; 2] = if reverse {
        [&level.black, &level.red]
    } else {
        [&level.red, &level.black]
    };
    for colour in order {
        for &k in colour {
            let mut rhs = [0.0; 2];
            for a in 0..nf {
                rhs[a] = b[k * nf + a]
                    + s * (x[(k + 1) * nf + a]
                        + x[(k - 1) * nf + a]
                        + x[(k + side) * nf + a]
                        + x[(k - side) * nf + a]);
            }
            for a in 0..nf {
                let mut v = 0.0;
                for c in 0..nf {
                    v += level.block_inv[(k * nf + a) * nf + c] * rhs[c];
                }
                x[k * nf + a] = v;
            }
        }
    }
}

fn restrict(fine: &Level, coarse: &Level, nf: usize, r: &[f64]) -> Vec<f64> {
    let sc = coarse.side;
    let sf = fine.side;
    let mut out = vec![0.0; sc * sc * nf];
    const W: [f64; 3] = [0.25, 0.5, 0.25];
    for kc in 0..sc * sc {
        if !coarse.interior[kc] {
            continue;
        }
        let (ic, jc) = (kc % sc, kc / sc);
        let kf = (2 * jc) * sf + 2 * ic;
        for (db, wb) in W.iter().enumerate() {
            for (da, wa) in W.iter().enumerate() {
                let k = kf + db * sf + da - sf - 1;
                for a in 0..nf {
                    out[kc * nf + a] += wa * wb * r[k * nf + a];
                }
            }
        }
    }
    out
}

fn prolong_add(fine: &Level, coarse: &Level, nf: usize, xc: &[f64], x: &mut [f64]) {
    let sc = coarse.side;
    let sf = fine.side;
    for kf in 0..sf * sf {
        if !fine.interior[kf] {
            continue;
        }
        let (i, j) = (kf % sf, kf / sf);
        let (i0, j0) = (i / 2, j / 2);
        let (i1, j1) = (i0 + i % 2, j0 + j % 2);
        for a in 0..nf {
            let v = 0.25
                * (xc[(j0 * sc + i0) * nf + a]
                    + xc[(j0 * sc + i1) * nf + a]
                    + xc[(j1 * sc + i0) * nf + a]
                    + xc[(j1 * sc + i1) * nf + a]);
            x[kf * nf + a] += v;
        }
    }
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

/// Outcome of a linear solve.
#[derive(Debug, Clone, Copy)]
pub(crate) struct LinearStats {
    pub iterations: usize,
    pub relative_residual: f64,
}

/// Right-preconditioned BiCGSTAB. `x` is the initial guess on entry.
pub(crate) fn bicgstab(
    op: &Operator,
    b: &[f64],
    x: &mut [f64],
    rel_tol: f64,
    max_iter: usize,
) -> LinearStats {
    let n = op.len();
    let bnorm = dot(b, b).sqrt();
    if bnorm == 0.0 {
        x.iter_mut().for_each(|v| *v = 0.0);
        return LinearStats {
            iterations: 0,
            relative_residual: 0.0,
        };
    }
    let mut r = vec![0.0; n];
    op.apply(x, &mut r);
    for (ri, bi) in r.iter_mut().zip(b) {
        *ri = bi - *ri;
    }
    let mut r_hat = r.clone();
    let (mut rho, mut alpha, mut omega) = (1.0, 1.0, 1.0);
    let mut v = vec![0.0; n];
    let mut p = vec![0.0; n];
    let mut y = vec![0.0; n];
    let mut z = vec![0.0; n];
    let mut t = vec![0.0; n];
    let mut rel = dot(&r, &r).sqrt() / bnorm;
    let mut it = 0;
    while it < max_iter && rel > rel_tol {
        it += 1;
        let rho_new = dot(&r_hat, &r);
        if rho_new == 0.0 || omega == 0.0 {
            // Breakdown: restart with the current residual as shadow vector.
            r_hat.copy_from_slice(&r);
            rho = 1.0;
            alpha = 1.0;
            omega = 1.0;
            v.iter_mut().for_each(|e| *e = 0.0);
            p.iter_mut().for_each(|e| *e = 0.0);
            continue;
        }
        let beta = (rho_new / rho) * (alpha / omega);
        rho = rho_new;
        for k in 0..n {
            p[k] = r[k] + beta * (p[k] - omega * v[k]);
        }
        op.precondition(&p, &mut y);
        op.apply(&y, &mut v);
        let rv = dot(&r_hat, &v);
        if rv == 0.0 {
            omega = 0.0;
            continue;
        }
        alpha = rho / rv;
        for k in 0..n {
            r[k] -= alpha * v[k];
            x[k] += alpha * y[k];
        }
        rel = dot(&r, &r).sqrt() / bnorm;
        if rel <= rel_tol {
            break;
        }
        op.precondition(&r, &mut z);
        op.apply(&z, &mut t);
        let tt = dot(&t, &t);
        omega = if tt > 0.0 { dot(&t, &r) / tt } else { 0.0 };
        for k in 0..n {
            x[k] += omega * z[k];
            r[k] -= omega * t[k];
        }
        rel = dot(&r, &r).sqrt() / bnorm;
    }
    LinearStats {
        iterations: it,
        relative_residual: rel,
    }
}
