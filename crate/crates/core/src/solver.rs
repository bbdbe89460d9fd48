//! Damped Newton finite-difference solver for the coupled vortex equations
//!
//! `∇²h_A = -Ω₀ [λ₀ (Qr)_A - λ (QQᵀ e^{2h})_A - Q_{A1} σ] + 2π Σ_r δ(z - Z_r^A)`
//!
//! with one or two Higgs flavours. The delta sources are removed by the
//! splitting `h_A = s_A + v_A`, where `s_A` is an exact sum of logarithms, and
//! Newton iterates on the regular part `v_A` with Dirichlet data from the
//! vacuum (or explicit values) on boundary nodes.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::charge::{vacuum_with_rhs, ChargeData, Mat2, Vec2};
use crate::error::{Result, VortexError};
use crate::multigrid::{bicgstab, Operator};
use crate::surface::{build_grid, Grid, NodeClass, Surface};

const LINE_SEARCH_HALVINGS: usize = 30;
const LINEAR_MAX_ITER: usize = 400;

/// Charges of the Higgs flavours under the gauge group(s).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum Charges {
    /// One flavour of charge `q` under a single U(1) with FI parameter `r`.
    Single { q: f64, r: f64 },
    /// Two flavours under U(1)².
    Pair(ChargeData),
}

impl Charges {
    pub fn flavours(&self) -> usize {
        match self {
            Charges::Single { .. } => 1,
            Charges::Pair(_) => 2,
        }
    }

    /// `Q` padded to 2×2.
    pub fn q(&self) -> Mat2 {
        match self {
            Charges::Single { q, .. } => [[*q, 0.0], [0.0, 0.0]],
            Charges::Pair(cd) => *cd.q(),
        }
    }

    /// `r` padded to length 2.
    pub fn r(&self) -> Vec2 {
        match self {
            Charges::Single { r, .. } => [*r, 0.0],
            Charges::Pair(cd) => *cd.r(),
        }
    }

    /// `(QQᵀ)_{AB}`.
    pub fn gram(&self) -> Mat2 {
        let q = self.q();
        let mut g = [[0.0; 2]; 2];
        for a in 0..2 {
            for b in 0..2 {
                g[a][b] = q[a][0] * q[b][0] + q[a][1] * q[b][1];
            }
        }
        g
    }
}

/// Magnetic impurity `σ`, coupled to the first gauge group.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum ImpuritySpec {
    None,
    Constant(f64),
    /// `σ = (2π/Ω₀) Σ_j α_j δ(z - p_j)` as `(p_j, α_j)` pairs.
    Delta(Vec<(Complex64, f64)>),
    /// Values at every lattice node, row-major.
    Sampled(Vec<f64>),
}

/// Dirichlet data on boundary nodes.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum Boundary {
    Vacuum,
    /// `|φ_A|²` for each flavour.
    Explicit(Vec<f64>),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ProblemSpec {
    pub surface: Surface,
    pub lambda: i8,
    pub charges: Charges,
    /// Vortex centres per flavour; repetition encodes multiplicity.
    pub vortices: Vec<Vec<Complex64>>,
    pub impurity: ImpuritySpec,
    pub grid_n: usize,
    pub boundary: Boundary,
    /// Replaces `λ₀` in the potential while keeping the surface metric.
    pub potential_lambda0: Option<i8>,
}

impl ProblemSpec {
    /// A vortex-free problem with vacuum boundary data.
    pub fn new(surface: Surface, lambda: i8, charges: Charges, grid_n: usize) -> Self {
        let nf = charges.flavours();
        Self {
            surface,
            lambda,
            charges,
            vortices: vec![Vec::new(); nf],
            impurity: ImpuritySpec::None,
            grid_n,
            boundary: Boundary::Vacuum,
            potential_lambda0: None,
        }
    }

    pub fn with_vortices(mut self, flavour: usize, centres: Vec<Complex64>) -> Self {
        if flavour < self.vortices.len() {
            self.vortices[flavour] = centres;
        }
        self
    }

    pub fn with_impurity(mut self, impurity: ImpuritySpec) -> Self {
        self.impurity = impurity;
        self
    }

    pub fn with_boundary(mut self, boundary: Boundary) -> Self {
        self.boundary = boundary;
        self
    }

    pub fn with_potential_lambda0(mut self, lambda0: i8) -> Self {
        self.potential_lambda0 = Some(lambda0);
        self
    }

    pub fn flavours(&self) -> usize {
        self.charges.flavours()
    }

    /// The `λ₀` multiplying the FI term.
    pub fn potential_lambda0(&self) -> f64 {
        f64::from(self.potential_lambda0.unwrap_or(self.surface.lambda0()))
    }

    pub fn grid(&self) -> Result<Grid> {
        build_grid(&self.surface, self.grid_n)
    }

    /// Vacuum `|φ_A|²` with a constant impurity value `sigma`.
    pub fn vacuum(&self, sigma: f64) -> Result<Vec<f64>> {
        let l0 = self.potential_lambda0();
        let lambda = f64::from(self.lambda);
        let v = match &self.charges {
            Charges::Single { q, r } => {
                if lambda == 0.0 {
                    return Err(VortexError::NoVacuum(
                        "λ = 0 leaves the vacuum undetermined".into(),
                    ));
                }
                vec![(l0 * r - sigma) / (lambda * q)]
            }
            Charges::Pair(cd) => {
                let r = cd.r();
                vacuum_with_rhs(cd, lambda, [l0 * r[0] - sigma, l0 * r[1]])?.to_vec()
            }
        };
        if let Some(bad) = v.iter().find(|x| !(**x > 0.0)) {
            return Err(VortexError::NoVacuum(format!(
                "vacuum needs |φ|² = {bad}, which gives no finite Dirichlet data"
            )));
        }
        Ok(v)
    }

    pub fn validate(&self) -> Result<()> {
        if !matches!(self.lambda, -1..=1) {
            return Err(VortexError::Spec(format!("λ must be -1, 0 or 1, got {}", self.lambda)));
        }
        if let Some(l0) = self.potential_lambda0 {
            if !matches!(l0, -1..=1) {
                return Err(VortexError::Spec(format!("potential λ₀ must be -1, 0 or 1, got {l0}")));
            }
        }
        let nf = self.flavours();
        if self.vortices.len() != nf {
            return Err(VortexError::Spec(format!(
                "{} vortex lists for {nf} flavours",
                self.vortices.len()
            )));
        }
        let grid = self.grid().map_err(|e| VortexError::Spec(e.to_string()))?;
        let radius = self.surface.radius_cutoff();
        let strictly_inside = |z: &Complex64| z.re.is_finite() && z.im.is_finite() && z.norm() < radius;
        for (a, list) in self.vortices.iter().enumerate() {
            if let Some(z) = list.iter().find(|z| !strictly_inside(z)) {
                return Err(VortexError::Spec(format!(
                    "vortex {z} of flavour {} is not strictly inside |z| < {radius}",
                    a + 1
                )));
            }
        }
        match &self.impurity {
            ImpuritySpec::None => {}
            ImpuritySpec::Constant(c) => {
                if !c.is_finite() {
                    return Err(VortexError::Spec("impurity constant must be finite".into()));
                }
            }
            ImpuritySpec::Delta(list) => {
                for (p, alpha) in list {
                    if !(alpha.is_finite() && *alpha > 0.0) {
                        return Err(VortexError::Spec(format!(
                            "impurity strength must be positive, got {alpha}"
                        )));
                    }
                    if !strictly_inside(p) {
                        return Err(VortexError::Spec(format!(
                            "impurity at {p} is not strictly inside |z| < {radius}"
                        )));
                    }
                }
            }
            ImpuritySpec::Sampled(values) => {
                if values.len() != grid.len() {
                    return Err(VortexError::Spec(format!(
                        "sampled impurity has {} values, grid has {} nodes",
                        values.len(),
                        grid.len()
                    )));
                }
                if values.iter().any(|v| !v.is_finite()) {
                    return Err(VortexError::Spec("sampled impurity must be finite".into()));
                }
            }
        }
        match &self.boundary {
            Boundary::Vacuum => {
                let sigma = match &self.impurity {
                    ImpuritySpec::Constant(c) => *c,
                    _ => 0.0,
                };
                self.vacuum(sigma)
                    .map_err(|e| VortexError::Spec(format!("vacuum boundary data: {e}")))?;
            }
            Boundary::Explicit(values) => {
                if values.len() != nf || values.iter().any(|v| !(v.is_finite() && *v > 0.0)) {
                    return Err(VortexError::Spec(format!(
                        "explicit boundary needs {nf} positive |φ|² values, got {values:?}"
                    )));
                }
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct NewtonConfig {
    /// Stop when the max-norm residual at interior nodes falls below this.
    pub tol: f64,
    pub max_iter: usize,
    /// Initial step length of each Newton update, in `(0, 1]`.
    pub damping: f64,
    /// Relative residual of the inner linear solves.
    pub linear_tol: f64,
}

impl Default for NewtonConfig {
    fn default() -> Self {
        Self {
            tol: 1e-10,
            max_iter: 50,
            damping: 1.0,
            linear_tol: 1e-12,
        }
    }
}

/// Converged (or imported) grid fields of a problem.
#[derive(Debug, Clone)]
pub struct FieldSet {
    grid: Grid,
    /// Regular parts `v_A`.
    regular: Vec<Vec<f64>>,
    /// Singular parts `s_A`; `-∞` on nodes that coincide with a source.
    singular: Vec<Vec<f64>>,
    divisors: Vec<Vec<(Complex64, usize)>>,
    pub iterations: usize,
    pub residual_history: Vec<f64>,
    pub final_residual: f64,
    pub converged: bool,
    /// Largest `| |φ_A|² - boundary value |` over interior nodes next to the
    /// boundary.
    pub boundary_mismatch: f64,
}

impl FieldSet {
    /// Rebuilds a field set from sampled `h_A` (e.g. read back from disk).
    ///
    /// At vortex centres on nodes `h_A` carries no information about the
    /// regular part; it is recovered from the discrete equation at that node,
    /// which a converged solution satisfies up to the solver tolerance.
    pub fn from_h(spec: &ProblemSpec, h: Vec<Vec<f64>>, converged: bool) -> Result<Self> {
        spec.validate()?;
        let grid = spec.grid()?;
        if h.len() != spec.flavours() || h.iter().any(|f| f.len() != grid.len()) {
            return Err(VortexError::GridMismatch(format!(
                "expected {} fields of {} nodes",
                spec.flavours(),
                grid.len()
            )));
        }
        let singular = build_singular_part(spec)?;
        let mut regular: Vec<Vec<f64>> = h
            .iter()
            .zip(&singular)
            .map(|(hf, sf)| {
                hf.iter()
                    .zip(sf)
                    .map(|(x, s)| if s.is_finite() { x - s } else { f64::NAN })
                    .collect()
            })
            .collect();
        Prepared::new(spec)?.fill_centres(&mut regular);
        Ok(Self {
            grid,
            regular,
            singular,
            divisors: divisors(spec),
            iterations: 0,
            residual_history: Vec::new(),
            final_residual: f64::NAN,
            converged,
            boundary_mismatch: f64::NAN,
        })
    }

    pub fn grid(&self) -> &Grid {
        &self.grid
    }

    pub fn flavours(&self) -> usize {
        self.regular.len()
    }

    pub fn regular(&self, flavour: usize) -> &[f64] {
        &self.regular[flavour]
    }

    pub fn singular(&self, flavour: usize) -> &[f64] {
        &self.singular[flavour]
    }

    pub fn divisors(&self, flavour: usize) -> &[(Complex64, usize)] {
        &self.divisors[flavour]
    }

    /// `h_A = s_A + v_A` at every node (0 at excluded nodes).
    pub fn h(&self, flavour: usize) -> Vec<f64> {
        self.singular[flavour]
            .iter()
            .zip(&self.regular[flavour])
            .map(|(s, v)| if s.is_finite() { s + v } else { f64::NEG_INFINITY })
            .collect()
    }

    /// `|φ_A|² = e^{2h_A}`.
    pub fn phi_sq(&self, flavour: usize) -> Vec<f64> {
        self.h(flavour).iter().map(|h| (2.0 * h).exp()).collect()
    }
}

fn source_log(disk: bool, z: Complex64, centre: Complex64) -> f64 {
    let d = (z - centre).norm();
    if d == 0.0 {
        return f64::NEG_INFINITY;
    }
    if disk {
        d.ln() - (Complex64::new(1.0, 0.0) - centre.conj() * z).norm().ln()
    } else {
        d.ln()
    }
}

/// Per-flavour logarithmic sources `(centre, weight)`.
fn sources(spec: &ProblemSpec) -> Vec<Vec<(Complex64, f64)>> {
    let q = spec.charges.q();
    (0..spec.flavours())
        .map(|a| {
            let mut list: Vec<(Complex64, f64)> =
                spec.vortices[a].iter().map(|z| (*z, 1.0)).collect();
            if let ImpuritySpec::Delta(deltas) = &spec.impurity {
                for (p, alpha) in deltas {
                    if q[a][0] != 0.0 {
                        list.push((*p, alpha * q[a][0]));
                    }
                }
            }
            list
        })
        .collect()
}

fn divisors(spec: &ProblemSpec) -> Vec<Vec<(Complex64, usize)>> {
    spec.vortices
        .iter()
        .map(|list| {
            let mut out: Vec<(Complex64, usize)> = Vec::new();
            for z in list {
                match out.iter_mut().find(|(c, _)| c == z) {
                    Some(entry) => entry.1 += 1,
                    None => out.push((*z, 1)),
                }
            }
            out
        })
        .collect()
}

/// Singular parts `s_A` on the lattice: Blaschke logarithms on the disk
/// (vanishing on `|z| = 1`), plain `log|z - Z|` otherwise. Delta impurities
/// contribute with weight `α Q_{A1}`. Excluded nodes hold 0.
pub fn build_singular_part(spec: &ProblemSpec) -> Result<Vec<Vec<f64>>> {
    let grid = spec.grid()?;
    let disk = spec.surface.is_disk();
    let srcs = sources(spec);
    let out = srcs
        .iter()
        .map(|list| {
            (0..grid.len())
                .map(|k| {
                    if grid.class(k) == NodeClass::Excluded {
                        return 0.0;
                    }
                    let z = grid.point(k);
                    list.iter().map(|(c, w)| w * source_log(disk, z, *c)).sum()
                })
                .collect::<Vec<f64>>()
        })
        .collect::<Vec<_>>();
    for (a, field) in out.iter().enumerate() {
        if grid.boundary_indices().any(|k| !field[k].is_finite()) {
            return Err(VortexError::Spec(format!(
                "a source of flavour {} sits on a boundary node",
                a + 1
            )));
        }
    }
    Ok(out)
}

/// Everything needed to evaluate residuals and Jacobians.
struct Prepared {
    grid: Grid,
    nf: usize,
    omega: Vec<f64>,
    singular: Vec<Vec<f64>>,
    e2s: Vec<Vec<f64>>,
    sigma: Vec<f64>,
    constant: [f64; 2],
    gram: Mat2,
    q1: [f64; 2],
    lambda: f64,
    /// `|φ_A|²` prescribed at each boundary node.
    boundary_phi_sq: Vec<Vec<f64>>,
    interior: Vec<usize>,
}

impl Prepared {
    fn new(spec: &ProblemSpec) -> Result<Self> {
        spec.validate()?;
        let grid = spec.grid()?;
        let nf = spec.flavours();
        let omega: Vec<f64> = (0..grid.len())
            .map(|k| {
                if grid.class(k) == NodeClass::Excluded {
                    0.0
                } else {
                    spec.surface.conformal_factor_unchecked(grid.point(k))
                }
            })
            .collect();
        let singular = build_singular_part(spec)?;
        let e2s = singular
            .iter()
            .map(|f| f.iter().map(|s| (2.0 * s).exp()).collect())
            .collect();
        let sigma = match &spec.impurity {
            ImpuritySpec::Constant(c) => vec![*c; grid.len()],
            ImpuritySpec::Sampled(values) => values.clone(),
            ImpuritySpec::None | ImpuritySpec::Delta(_) => vec![0.0; grid.len()],
        };
        let q = spec.charges.q();
        let r = spec.charges.r();
        let l0 = spec.potential_lambda0();
        let constant = [
            l0 * (q[0][0] * r[0] + q[0][1] * r[1]),
            l0 * (q[1][0] * r[0] + q[1][1] * r[1]),
        ];
        let mut boundary_phi_sq = vec![vec![0.0; grid.len()]; nf];
        for k in grid.boundary_indices() {
            let values = match &spec.boundary {
                Boundary::Explicit(values) => values.clone(),
                Boundary::Vacuum => spec.vacuum(sigma[k]).map_err(|e| {
                    VortexError::Spec(format!("vacuum boundary data at {}: {e}", grid.point(k)))
                })?,
            };
            for a in 0..nf {
                boundary_phi_sq[a][k] = values[a];
            }
        }
        let interior = grid.interior_indices().collect();
        Ok(Self {
            grid,
            nf,
            omega,
            singular,
            e2s,
            sigma,
            constant,
            gram: spec.charges.gram(),
            q1: [q[0][0], q[1][0]],
            lambda: f64::from(spec.lambda),
            boundary_phi_sq,
            interior,
        })
    }

    fn initial_regular(&self) -> Vec<Vec<f64>> {
        (0..self.nf)
            .map(|a| {
                let bnodes: Vec<usize> = self.grid.boundary_indices().collect();
                let mean = bnodes.iter().map(|&k| self.boundary_phi_sq[a][k]).sum::<f64>()
                    / bnodes.len().max(1) as f64;
                let mut v = vec![0.0; self.grid.len()];
                for &k in &self.interior {
                    v[k] = 0.5 * mean.ln();
                }
                for &k in &bnodes {
                    v[k] = 0.5 * self.boundary_phi_sq[a][k].ln() - self.singular[a][k];
                }
                v
            })
            .collect()
    }

    /// `e^{2h_B}` at node `k`.
    #[inline]
    fn weights(&self, v: &[Vec<f64>], k: usize) -> [f64; 2] {
        let mut w = [0.0; 2];
        for b in 0..self.nf {
            w[b] = self.e2s[b][k] * (2.0 * v[b][k]).exp();
        }
        w
    }

    /// Sets `v_A` at nodes where `s_A = -∞` so the residual vanishes there.
    fn fill_centres(&self, v: &mut [Vec<f64>]) {
        let h2 = self.grid.spacing() * self.grid.spacing();
        for &k in &self.interior {
            for a in 0..self.nf {
                if self.e2s[a][k] != 0.0 || v[a][k].is_finite() {
                    continue;
                }
                let mut coupling = 0.0;
                for b in 0..self.nf {
                    let x = v[b][k];
                    if self.e2s[b][k] != 0.0 && x.is_finite() {
                        coupling += self.gram[a][b] * self.e2s[b][k] * (2.0 * x).exp();
                    }
                }
                let source = self.constant[a] - self.lambda * coupling - self.q1[a] * self.sigma[k];
                let sum: f64 = self.grid.neighbours(k).iter().map(|&j| v[a][j]).sum();
                v[a][k] = (sum + h2 * self.omega[k] * source) / 4.0;
            }
        }
    }

    /// Scaled residual `∇²v_A/Ω₀ + λ₀(Qr)_A - λ(QQᵀ e^{2h})_A - Q_{A1}σ`
    /// at interior nodes, 0 elsewhere.
    fn residual(&self, v: &[Vec<f64>]) -> Vec<Vec<f64>> {
        let mut out = vec![vec![0.0; self.grid.len()]; self.nf];
        let inv_h2 = 1.0 / (self.grid.spacing() * self.grid.spacing());
        for &k in &self.interior {
            let w = self.weights(v, k);
            let [e, wst, n, s] = self.grid.neighbours(k);
            for a in 0..self.nf {
                let f = &v[a];
                let c = f[k];
                let lap = ((f[e] - c) + (f[wst] - c) + (f[n] - c) + (f[s] - c)) * inv_h2;
                let mut coupling = 0.0;
                for b in 0..self.nf {
                    coupling += self.gram[a][b] * w[b];
                }
                out[a][k] = lap / self.omega[k] + self.constant[a]
                    - self.lambda * coupling
                    - self.q1[a] * self.sigma[k];
            }
        }
        out
    }

    fn norms(&self, res: &[Vec<f64>]) -> (f64, f64) {
        let mut max = 0.0f64;
        let mut sum = 0.0;
        for f in res {
            for &k in &self.interior {
                let x = f[k];
                if !x.is_finite() {
                    return (f64::INFINITY, f64::INFINITY);
                }
                max = max.max(x.abs());
                sum += x * x;
            }
        }
        (max, sum.sqrt())
    }

    fn boundary_mismatch(&self, v: &[Vec<f64>]) -> f64 {
        let side = self.grid.side();
        let mut worst = 0.0f64;
        for &k in &self.interior {
            let near: Vec<usize> = [k + 1, k - 1, k + side, k - side]
                .into_iter()
                .filter(|&j| self.grid.class(j) == NodeClass::Boundary)
                .collect();
            if near.is_empty() {
                continue;
            }
            let w = self.weights(v, k);
            for a in 0..self.nf {
                let target =
                    near.iter().map(|&j| self.boundary_phi_sq[a][j]).sum::<f64>() / near.len() as f64;
                worst = worst.max((w[a] - target).abs());
            }
        }
        worst
    }

    fn newton(&self, config: &NewtonConfig) -> Result<(Vec<Vec<f64>>, usize, Vec<f64>)> {
        if !(config.damping > 0.0 && config.damping <= 1.0) {
            return Err(VortexError::InvalidInput(format!(
                "damping must lie in (0, 1], got {}",
                config.damping
            )));
        }
        let nf = self.nf;
        let len = self.grid.len();
        let mut v = self.initial_regular();
        let mut res = self.residual(&v);
        let (mut rmax, mut rl2) = self.norms(&res);
        let mut history = vec![rmax];
        let mut iterations = 0;
        let diverged = |iterations: usize, reason: String, history: &[f64]| VortexError::Divergence {
            iterations,
            reason,
            history: history.to_vec(),
        };
        if !rmax.is_finite() {
            return Err(diverged(0, "initial residual is not finite".into(), &history));
        }
        while rmax >= config.tol {
            if iterations == config.max_iter {
                return Err(diverged(
                    iterations,
                    format!("residual {rmax:e} above tolerance {:e}", config.tol),
                    &history,
                ));
            }
            iterations += 1;
            // Jacobian of the Ω₀-multiplied system: -∇² + 2λΩ₀ (QQᵀ)_{AB} e^{2h_B}.
            let mut d = vec![0.0; len * nf * nf];
            let mut b = vec![0.0; len * nf];
            for &k in &self.interior {
                let w = self.weights(&v, k);
                for a in 0..nf {
                    for c in 0..nf {
                        d[(k * nf + a) * nf + c] =
                            2.0 * self.lambda * self.omega[k] * self.gram[a][c] * w[c];
                    }
                    b[k * nf + a] = self.omega[k] * res[a][k];
                }
            }
            let op = Operator::new(&self.grid, nf, d).ok_or_else(|| {
                diverged(
                    iterations,
                    "Jacobian point blocks are not positive; linearization is indefinite".into(),
                    &history,
                )
            })?;
            let mut delta = vec![0.0; len * nf];
            let stats = bicgstab(&op, &b, &mut delta, config.linear_tol, LINEAR_MAX_ITER);
            if !stats.relative_residual.is_finite() || stats.relative_residual > 1e-6 {
                return Err(diverged(
                    iterations,
                    format!(
                        "linear solve stalled at relative residual {:e} after {} iterations",
                        stats.relative_residual, stats.iterations
                    ),
                    &history,
                ));
            }
            let mut step = config.damping;
            let mut accepted = false;
            for _ in 0..LINE_SEARCH_HALVINGS {
                let trial: Vec<Vec<f64>> = (0..nf)
                    .map(|a| {
                        let mut f = v[a].clone();
                        for &k in &self.interior {
                            f[k] += step * delta[k * nf + a];
                        }
                        f
                    })
                    .collect();
                let trial_res = self.residual(&trial);
                let (tmax, tl2) = self.norms(&trial_res);
                if tl2.is_finite() && tl2 < rl2 {
                    v = trial;
                    res = trial_res;
                    rmax = tmax;
                    rl2 = tl2;
                    accepted = true;
                    break;
                }
                step *= 0.5;
            }
            history.push(rmax);
            if !accepted {
                return Err(diverged(
                    iterations,
                    "line search failed to reduce the residual".into(),
                    &history,
                ));
            }
        }
        Ok((v, iterations, history))
    }
}

/// Discrete residual of the regular-part equation in the `Ω₀`-normalized form
/// `∇²v_A/Ω₀ + λ₀(Qr)_A - λ(QQᵀ e^{2h})_A - Q_{A1}σ`, one field per flavour,
/// zero off the interior. Nodes with a NaN regular part yield NaN.
pub fn residual(spec: &ProblemSpec, fields: &FieldSet) -> Result<Vec<Vec<f64>>> {
    let prepared = Prepared::new(spec)?;
    if !prepared.grid.same_lattice(&fields.grid) || fields.flavours() != prepared.nf {
        return Err(VortexError::GridMismatch(
            "fields do not belong to this problem's grid".into(),
        ));
    }
    Ok(prepared.residual(&fields.regular))
}

/// Solves the coupled equations by damped Newton iteration.
pub fn newton_solve(spec: &ProblemSpec, config: &NewtonConfig) -> Result<FieldSet> {
    let prepared = Prepared::new(spec)?;
    let (regular, iterations, history) = prepared.newton(config)?;
    let final_residual = *history.last().expect("history is never empty");
    let boundary_mismatch = prepared.boundary_mismatch(&regular);
    Ok(FieldSet {
        grid: prepared.grid,
        regular,
        singular: prepared.singular,
        divisors: divisors(spec),
        iterations,
        residual_history: history,
        final_residual,
        converged: true,
        boundary_mismatch,
    })
}

/// Single-flavour solve with a magnetic impurity.
pub fn solve_single_with_impurity(spec: &ProblemSpec, config: &NewtonConfig) -> Result<FieldSet> {
    if spec.flavours() != 1 {
        return Err(VortexError::InvalidInput(
            "impurity solve needs a single-flavour problem".into(),
        ));
    }
    newton_solve(spec, config)
}

/// The impurity `σ` induced by freezing flavour 2 and the single-flavour
/// problem for `φ₁` that it defines.
#[derive(Debug, Clone)]
pub struct FreezeResult {
    pub sigma: Vec<f64>,
    pub effective_spec: ProblemSpec,
}

/// Freezes flavour 2 of an upper-triangular coupled solution.
///
/// With `F²/Ω₀ = λ₀r₂ - λ Σ_A |φ_A|² Q_{A2}` and
/// `σ = -Q₁₂ F² / (Q₁₁ Ω₀)`, flavour 1 obeys the single-field impurity
/// equation with charge `Q₁₁`, FI parameter `r₁` and `σ`.
pub fn freeze_transform(coupled: &FieldSet, spec: &ProblemSpec) -> Result<FreezeResult> {
    let cd = match &spec.charges {
        Charges::Pair(cd) => cd,
        Charges::Single { .. } => {
            return Err(VortexError::InvalidInput(
                "freezing needs a two-flavour problem".into(),
            ))
        }
    };
    let q = cd.q();
    if q[1][0] != 0.0 {
        return Err(VortexError::Unsupported(format!(
            "freezing needs Q₂₁ = 0, got {}",
            q[1][0]
        )));
    }
    if q[0][0] == 0.0 {
        return Err(VortexError::InvalidInput("freezing needs Q₁₁ ≠ 0".into()));
    }
    if !matches!(spec.impurity, ImpuritySpec::None) {
        return Err(VortexError::Unsupported(
            "freezing a problem that already carries an impurity".into(),
        ));
    }
    let grid = spec.grid()?;
    if !grid.same_lattice(coupled.grid()) || coupled.flavours() != 2 {
        return Err(VortexError::GridMismatch(
            "coupled fields do not match the problem grid".into(),
        ));
    }
    if !coupled.converged {
        return Err(VortexError::InvalidInput("coupled fields are not converged".into()));
    }
    let l0 = spec.potential_lambda0();
    let lambda = f64::from(spec.lambda);
    let r = cd.r();
    let phi1 = coupled.phi_sq(0);
    let phi2 = coupled.phi_sq(1);
    let ratio = q[0][1] / q[0][0];
    let sigma: Vec<f64> = (0..grid.len())
        .map(|k| {
            if grid.class(k) == NodeClass::Excluded {
                return 0.0;
            }
            let f2 = l0 * r[1] - lambda * (phi1[k] * q[0][1] + phi2[k] * q[1][1]);
            -ratio * f2
        })
        .collect();
    let boundary = match &spec.boundary {
        Boundary::Explicit(values) => vec![values[0]],
        Boundary::Vacuum => vec![spec.vacuum(0.0)?[0]],
    };
    let effective_spec = ProblemSpec {
        surface: spec.surface,
        lambda: spec.lambda,
        charges: Charges::Single { q: q[0][0], r: r[0] },
        vortices: vec![spec.vortices[0].clone()],
        impurity: ImpuritySpec::Sampled(sigma.clone()),
        grid_n: spec.grid_n,
        boundary: Boundary::Explicit(boundary),
        potential_lambda0: spec.potential_lambda0,
    };
    Ok(FreezeResult {
        sigma,
        effective_spec,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::holomorphic::{HoloMap, Poly};
    use crate::integrable::SingleFieldSolution;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    fn unit_disk() -> Surface {
        Surface::with_radius(1, 1.0).unwrap()
    }

    fn taubes(n: usize) -> ProblemSpec {
        ProblemSpec::new(unit_disk(), 1, Charges::Single { q: 1.0, r: 1.0 }, n)
    }

    fn quiver() -> ChargeData {
        ChargeData::new([[1.0, -1.0], [0.0, 1.0]], [1.0, 1.0]).unwrap()
    }

    #[test]
    fn singular_part_examples() {
        let spec = taubes(16).with_vortices(0, vec![c(0.0, 0.0)]);
        let grid = spec.grid().unwrap();
        let s = build_singular_part(&spec).unwrap();
        let k = grid.index(24, 16);
        assert!((grid.point(k) - c(0.5, 0.0)).norm() < 1e-15);
        assert!((s[0][k] - 0.5f64.ln()).abs() < 1e-15);
        assert!(source_log(true, c(0.6, 0.8), c(0.3, -0.2)).abs() < 1e-15);
        let h = 1e-3;
        assert!((source_log(false, c(1.0 + h, 0.0), c(1.0, 0.0)) - h.ln()).abs() < 1e-12);
    }

    /// Discrete flux of `∇s` out of a box of nodes around the centre, which
    /// equals the summed discrete Laplacian times `h²`, is `2π`.
    #[test]
    fn singular_part_flux() {
        let spec = taubes(64).with_vortices(0, vec![c(0.1, -0.2)]);
        let grid = spec.grid().unwrap();
        let s = &build_singular_part(&spec).unwrap()[0];
        for half in [3usize, 6, 10] {
            let (ic, jc) = (64 + 6, 64 - 13);
            let (il, ir, jb, jt) = (ic - half, ic + half, jc - half, jc + half);
            let mut flux = 0.0;
            for j in jb..=jt {
                flux += s[grid.index(ir + 1, j)] - s[grid.index(ir, j)];
                flux += s[grid.index(il - 1, j)] - s[grid.index(il, j)];
            }
            for i in il..=ir {
                flux += s[grid.index(i, jt + 1)] - s[grid.index(i, jt)];
                flux += s[grid.index(i, jb - 1)] - s[grid.index(i, jb)];
            }
            let rel = (flux - 2.0 * std::f64::consts::PI).abs() / (2.0 * std::f64::consts::PI);
            assert!(rel < 0.01, "half {half}: flux {flux}");
        }
    }

    #[test]
    fn vacuum_converges_immediately() {
        let spec = ProblemSpec::new(unit_disk(), 1, Charges::Pair(quiver()), 32);
        let fields = newton_solve(&spec, &NewtonConfig::default()).unwrap();
        assert!(fields.iterations <= 1);
        let grid = fields.grid().clone();
        for k in grid.interior_indices() {
            assert!((fields.h(0)[k] - 0.0).abs() < 1e-12);
            assert!((fields.h(1)[k] - 0.5 * 2f64.ln()).abs() < 1e-12);
        }
        let res = residual(&spec, &fields).unwrap();
        assert!(res.iter().flatten().all(|r| r.abs() < 1e-12));
    }

    #[test]
    fn perturbed_vacuum_residual_sign() {
        let spec = taubes(32);
        let grid = spec.grid().unwrap();
        let h: Vec<f64> = (0..grid.len())
            .map(|k| match grid.class(k) {
                NodeClass::Interior => 0.1,
                _ => 0.0,
            })
            .collect();
        let fields = FieldSet::from_h(&spec, vec![h], true).unwrap();
        let res = &residual(&spec, &fields).unwrap()[0];
        // Deep inside, the Laplacian vanishes and 1 - e^{0.2} < 0.
        let k = grid.index(32, 32);
        assert!(res[k] < 0.0);
        assert!((res[k] - (1.0 - 0.2f64.exp())).abs() < 1e-12);
    }

    #[test]
    fn decoupled_flavour_two_stays_in_vacuum() {
        let spec = ProblemSpec::new(unit_disk(), 1, Charges::Pair(ChargeData::identity([1.0, 1.0])), 64)
            .with_vortices(0, vec![c(0.0, 0.0)]);
        let fields = newton_solve(&spec, &NewtonConfig::default()).unwrap();
        let h2 = fields.h(1);
        assert!(fields.grid().interior_indices().all(|k| h2[k].abs() < 1e-12));
        let closed = SingleFieldSolution::new(unit_disk(), 1, HoloMap::polynomial(Poly::from_real(&[0.0, 0.0, 1.0]))).unwrap();
        let h1 = fields.h(0);
        let err = fields
            .grid()
            .interior_indices()
            .filter(|&k| fields.grid().point(k).norm() > 0.0)
            .map(|k| (h1[k] - closed.eval(fields.grid().point(k)).unwrap().h).abs())
            .fold(0.0, f64::max);
        assert!(err < 2e-3, "err {err}");
    }

    #[test]
    fn reflection_symmetry() {
        let spec = ProblemSpec::new(unit_disk(), 1, Charges::Pair(quiver()), 48)
            .with_vortices(0, vec![c(0.3, 0.1), c(-0.3, -0.1)])
            .with_vortices(1, vec![c(0.0, 0.0)]);
        let fields = newton_solve(&spec, &NewtonConfig::default()).unwrap();
        let len = fields.grid().len();
        for a in 0..2 {
            let v = fields.regular(a);
            for k in fields.grid().interior_indices() {
                assert!((v[k] - v[len - 1 - k]).abs() < 1e-10);
            }
        }
    }

    #[test]
    fn quadratic_tail() {
        let spec = ProblemSpec::new(unit_disk(), 1, Charges::Pair(quiver()), 48)
            .with_vortices(0, vec![c(-0.5, 0.0)])
            .with_vortices(1, vec![c(0.0, 0.0)]);
        let fields = newton_solve(&spec, &NewtonConfig { tol: 1e-12, ..Default::default() }).unwrap();
        let hist = &fields.residual_history;
        for w in hist.windows(2) {
            assert!(w[1] < w[0] || w[1] < 1e-12, "{hist:?}");
        }
        let tail: Vec<f64> = hist
            .windows(2)
            .filter(|w| w[0] < 1e-3 && w[1] > 1e-11)
            .map(|w| w[1] / (w[0] * w[0]))
            .collect();
        assert!(tail.iter().all(|ratio| *ratio < 1e3), "{hist:?}");
    }

    #[test]
    fn spec_validation() {
        let flipped = ProblemSpec::new(unit_disk(), -1, Charges::Pair(quiver()), 32);
        assert!(matches!(flipped.validate(), Err(VortexError::Spec(_))));
        let outside = taubes(32).with_vortices(0, vec![c(1.0, 0.0)]);
        assert!(outside.validate().is_err());
        let bad_sample = taubes(32).with_impurity(ImpuritySpec::Sampled(vec![0.0; 10]));
        assert!(bad_sample.validate().is_err());
        let bad_delta = taubes(32).with_impurity(ImpuritySpec::Delta(vec![(c(0.0, 0.0), -1.0)]));
        assert!(bad_delta.validate().is_err());
    }

    #[test]
    fn freeze_of_diagonal_problem_has_no_impurity() {
        let spec = ProblemSpec::new(unit_disk(), 1, Charges::Pair(ChargeData::identity([1.0, 1.0])), 32)
            .with_vortices(0, vec![c(0.2, 0.0)]);
        let fields = newton_solve(&spec, &NewtonConfig::default()).unwrap();
        let frozen = freeze_transform(&fields, &spec).unwrap();
        assert!(frozen.sigma.iter().all(|s| *s == 0.0));
        let coupled_vacuum = ProblemSpec::new(unit_disk(), 1, Charges::Pair(quiver()), 32);
        let vac = newton_solve(&coupled_vacuum, &NewtonConfig::default()).unwrap();
        let frozen = freeze_transform(&vac, &coupled_vacuum).unwrap();
        assert!(frozen.sigma.iter().all(|s| s.abs() < 1e-12));
        let lower = ProblemSpec::new(unit_disk(), 1, Charges::Pair(ChargeData::new([[1.0, 0.0], [1.0, 1.0]], [1.0, 0.0]).unwrap()), 32);
        assert!(matches!(freeze_transform(&vac, &lower), Err(VortexError::Unsupported(_))));
    }

    #[test]
    fn zero_impurity_equals_plain_solve() {
        let plain = taubes(32).with_vortices(0, vec![c(0.1, 0.2)]);
        let with = plain.clone().with_impurity(ImpuritySpec::Constant(0.0));
        let a = newton_solve(&plain, &NewtonConfig::default()).unwrap();
        let b = solve_single_with_impurity(&with, &NewtonConfig::default()).unwrap();
        assert_eq!(a.regular(0), b.regular(0));
    }

    #[test]
    fn from_h_recovers_centre_nodes() {
        let cd = ChargeData::new([[1.0, -1.0], [0.0, 1.0]], [1.0, 1.0]).unwrap();
        let spec = ProblemSpec::new(unit_disk(), 1, Charges::Pair(cd), 32)
            .with_vortices(0, vec![c(-0.5, 0.0)])
            .with_vortices(1, vec![c(0.0, 0.0)]);
        let fields = newton_solve(&spec, &NewtonConfig::default()).unwrap();
        let h = vec![fields.h(0), fields.h(1)];
        assert_eq!(h[1][fields.grid().index(32, 32)], f64::NEG_INFINITY);
        let back = FieldSet::from_h(&spec, h, true).unwrap();
        let res = residual(&spec, &back).unwrap();
        let max = res.iter().flatten().fold(0.0f64, |m, x| m.max(x.abs()));
        assert!(max < 1e-9, "{max}");
    }
}
