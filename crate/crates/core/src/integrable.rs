//! Closed-form integrable vortex solutions.
//!
//! Single-field `(λ₀, λ)` vortices come from a holomorphic map `f`:
//! `g = -log((1 - λ|f|²)/2) + ½ log|f'|²` solves `4∂∂̄g = λ e^{2g}` away from
//! the ramification points of `f`, and `h = g + log((1 - λ₀|z|²)/2)` is the
//! log-modulus of the Higgs field.
//!
//! The SU(3) Toda pair uses determinants of `M_A† W_A` with
//! `u = (1, f₁, f₂)`, `v = (1, -λf₁, -λf₂)` and
//! `e^{2g_A} = -(2/λ) ∂∂̄ log det(M_A† W_A)`. Determinants are kept as exact
//! bivariate polynomials in `(z, z̄)` so the mixed derivative is analytic.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Result, VortexError};
use crate::holomorphic::{HoloMap, Poly};
use crate::surface::Surface;

/// `|1 - λ|f|²|` below this is treated as the map touching the boundary of
/// the target surface.
const TARGET_SINGULAR_TOL: f64 = 1e-14;

/// The five admissible `(λ₀, λ)` vortex equations.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum VortexKind {
    Taubes,
    Popov,
    JackiwPi,
    AmbjornOlesen,
    Bradlow,
}

impl VortexKind {
    pub const ALL: [VortexKind; 5] = [
        VortexKind::Taubes,
        VortexKind::Popov,
        VortexKind::JackiwPi,
        VortexKind::AmbjornOlesen,
        VortexKind::Bradlow,
    ];

    /// `(λ₀, λ)`.
    pub fn lambdas(self) -> (i8, i8) {
        match self {
            VortexKind::Taubes => (1, 1),
            VortexKind::Popov => (-1, -1),
            VortexKind::JackiwPi => (0, -1),
            VortexKind::AmbjornOlesen => (1, -1),
            VortexKind::Bradlow => (1, 0),
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            VortexKind::Taubes => "taubes",
            VortexKind::Popov => "popov",
            VortexKind::JackiwPi => "jackiw-pi",
            VortexKind::AmbjornOlesen => "ambjorn-olesen",
            VortexKind::Bradlow => "bradlow",
        }
    }

    pub fn from_name(name: &str) -> Option<Self> {
        Self::ALL.into_iter().find(|k| k.name() == name)
    }

    pub fn from_lambdas(lambda0: i8, lambda: i8) -> Option<Self> {
        Self::ALL.into_iter().find(|k| k.lambdas() == (lambda0, lambda))
    }
}

fn check_sign(lambda: i8) -> Result<()> {
    if matches!(lambda, -1..=1) {
        Ok(())
    } else {
        Err(VortexError::InvalidInput(format!(
            "λ must be -1, 0 or 1, got {lambda}"
        )))
    }
}

/// Pointwise values of a single-field solution.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SinglePoint {
    pub g: f64,
    pub h: f64,
    pub phi_norm_sq: f64,
}

/// A `(λ₀, λ)` vortex solution generated by the holomorphic map `f`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SingleFieldSolution {
    surface: Surface,
    lambda: i8,
    map: HoloMap,
}

impl SingleFieldSolution {
    pub fn new(surface: Surface, lambda: i8, map: HoloMap) -> Result<Self> {
        check_sign(lambda)?;
        map.check_domain(&surface)?;
        Ok(Self {
            surface,
            lambda,
            map,
        })
    }

    pub fn surface(&self) -> &Surface {
        &self.surface
    }

    pub fn lambda(&self) -> i8 {
        self.lambda
    }

    pub fn map(&self) -> &HoloMap {
        &self.map
    }

    fn check_point(&self, z: Complex64) -> Result<()> {
        if self.surface.contains(z) {
            Ok(())
        } else {
            Err(VortexError::InvalidInput(format!(
                "z = {z} is outside the model domain"
            )))
        }
    }

    /// `1 - λ|f|²` together with `f` and `f'`.
    fn target_factor(&self, z: Complex64) -> Result<(f64, Complex64, Complex64)> {
        let (f, df) = self.map.eval_with_derivative(z)?;
        let t = 1.0 - f64::from(self.lambda) * f.norm_sqr();
        if t <= TARGET_SINGULAR_TOL {
            return Err(VortexError::SurfaceSingularity {
                re: z.re,
                im: z.im,
                value: t,
            });
        }
        Ok((t, f, df))
    }

    /// `g`, `h` and `|φ|²` at `z`.
    pub fn eval(&self, z: Complex64) -> Result<SinglePoint> {
        self.check_point(z)?;
        let (t, _, df) = self.target_factor(z)?;
        let m = self.surface.metric_factor(z);
        let g = -(t / 2.0).ln() + 0.5 * df.norm_sqr().ln();
        let h = g + (m / 2.0).ln();
        let phi_norm_sq = m * m / (t * t) * df.norm_sqr();
        Ok(SinglePoint { g, h, phi_norm_sq })
    }

    /// Higgs field in unitary gauge, `φ = (1 - λ₀|z|²)/(1 - λ|f|²) · f'`.
    pub fn phi(&self, z: Complex64) -> Result<Complex64> {
        self.check_point(z)?;
        let (t, _, df) = self.target_factor(z)?;
        Ok(df * (self.surface.metric_factor(z) / t))
    }

    /// Gauge potential `A_z̄ = -i ∂_z̄ log((1 - λ₀|z|²)/(1 - λ|f|²))` in
    /// unitary gauge.
    pub fn gauge_potential(&self, z: Complex64) -> Result<Complex64> {
        self.check_point(z)?;
        let (t, f, df) = self.target_factor(z)?;
        let l0 = self.surface.lambda0_f64();
        let l = f64::from(self.lambda);
        let d_metric = -l0 * z / self.surface.metric_factor(z);
        let d_target = -l * f * df.conj() / t;
        Ok(Complex64::new(0.0, -1.0) * (d_metric - d_target))
    }

    /// Vortex centres: ramification points of `f` inside the truncated domain.
    pub fn vortex_divisor(&self) -> Result<Vec<(Complex64, usize)>> {
        self.map
            .ramification_divisor(self.surface.radius_cutoff())
    }
}

/// Higgs field of the `α`-impurity solution built from `f = z^{α+1} f̃`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ImpurityPoint {
    pub phi: Complex64,
    pub phi_norm_sq: f64,
}

/// Evaluates `φ = (1 - λ₀|z|²)/(1 - λ|z|^{2α+2}|f̃|²) · ((α+1) z^α f̃ + z^{α+1} f̃')`.
pub fn eval_impurity_solution(
    surface: &Surface,
    lambda: i8,
    alpha: f64,
    ftilde: &HoloMap,
    z: Complex64,
) -> Result<ImpurityPoint> {
    check_sign(lambda)?;
    if !(alpha.is_finite() && alpha > 0.0) {
        return Err(VortexError::InvalidInput(format!(
            "impurity strength must be positive, got {alpha}"
        )));
    }
    if !surface.contains(z) {
        return Err(VortexError::InvalidInput(format!(
            "z = {z} is outside the model domain"
        )));
    }
    if ftilde.eval(Complex64::new(0.0, 0.0))?.norm() == 0.0 {
        return Err(VortexError::InvalidInput(
            "f̃(0) must be nonzero so the impurity sits at the origin".into(),
        ));
    }
    let (ft, dft) = ftilde.eval_with_derivative(z)?;
    let zero = Complex64::new(0.0, 0.0);
    let (z_alpha, z_alpha1) = if z == zero {
        if alpha.fract() != 0.0 {
            return Err(VortexError::InvalidInput(
                "non-integer impurity strength is branched at z = 0".into(),
            ));
        }
        (zero, zero)
    } else if alpha.fract() == 0.0 && alpha < 64.0 {
        (z.powi(alpha as i32), z.powi(alpha as i32 + 1))
    } else {
        (z.powf(alpha), z.powf(alpha + 1.0))
    };
    let r2 = z.norm_sqr();
    let t = 1.0 - f64::from(lambda) * r2.powf(alpha + 1.0) * ft.norm_sqr();
    if t <= TARGET_SINGULAR_TOL {
        return Err(VortexError::SurfaceSingularity {
            re: z.re,
            im: z.im,
            value: t,
        });
    }
    let phi = (z_alpha * ft * (alpha + 1.0) + z_alpha1 * dft) * (surface.metric_factor(z) / t);
    Ok(ImpurityPoint {
        phi,
        phi_norm_sq: phi.norm_sqr(),
    })
}

/// Phase `|z|^α / z^α` (principal branch) of the singular gauge
/// transformation that turns an `N + α` configuration into an `N`-vortex.
pub fn singular_gauge_phase(alpha: f64, z: Complex64) -> Result<Complex64> {
    if z == Complex64::new(0.0, 0.0) || !z.re.is_finite() || !z.im.is_finite() {
        return Err(VortexError::InvalidInput(
            "singular gauge phase is undefined at z = 0".into(),
        ));
    }
    Ok(Complex64::from_polar(1.0, -alpha * z.arg()))
}

/// `e^{2g} = 4|f'|²`, the `λ = 0` (Bradlow) solution.
pub fn bradlow_eval(surface: &Surface, map: &HoloMap, z: Complex64) -> Result<f64> {
    if !surface.contains(z) {
        return Err(VortexError::InvalidInput(format!(
            "z = {z} is outside the model domain"
        )));
    }
    Ok(4.0 * map.derivative_eval(z)?.norm_sqr())
}

/// Polynomial in `z` and `z̄`: `Σ c[j][k] zʲ z̄ᵏ`.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct BiPoly {
    coeffs: Vec<Vec<Complex64>>,
}

/// Value and first/mixed derivatives of a `BiPoly` at one point.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BiJet {
    pub value: Complex64,
    pub dz: Complex64,
    pub dzbar: Complex64,
    pub dz_dzbar: Complex64,
}

impl BiPoly {
    /// `conj(a)(z̄) · b(z)` for holomorphic polynomials `a`, `b`.
    pub fn hermitian_product(a: &Poly, b: &Poly) -> Self {
        let mut coeffs = vec![vec![Complex64::new(0.0, 0.0); a.coeffs().len()]; b.coeffs().len()];
        for (j, &bj) in b.coeffs().iter().enumerate() {
            for (k, &ak) in a.coeffs().iter().enumerate() {
                coeffs[j][k] = bj * ak.conj();
            }
        }
        Self { coeffs }
    }

    fn get(&self, j: usize, k: usize) -> Complex64 {
        self.coeffs
            .get(j)
            .and_then(|row| row.get(k))
            .copied()
            .unwrap_or(Complex64::new(0.0, 0.0))
    }

    fn dims(&self) -> (usize, usize) {
        let rows = self.coeffs.len();
        let cols = self.coeffs.iter().map(Vec::len).max().unwrap_or(0);
        (rows, cols)
    }

    pub fn add(&self, other: &Self) -> Self {
        let (r1, c1) = self.dims();
        let (r2, c2) = other.dims();
        let (rows, cols) = (r1.max(r2), c1.max(c2));
        Self {
            coeffs: (0..rows)
                .map(|j| (0..cols).map(|k| self.get(j, k) + other.get(j, k)).collect())
                .collect(),
        }
    }

    pub fn scale(&self, c: Complex64) -> Self {
        Self {
            coeffs: self
                .coeffs
                .iter()
                .map(|row| row.iter().map(|&x| x * c).collect())
                .collect(),
        }
    }

    pub fn sub(&self, other: &Self) -> Self {
        self.add(&other.scale(Complex64::new(-1.0, 0.0)))
    }

    pub fn mul(&self, other: &Self) -> Self {
        let (r1, c1) = self.dims();
        let (r2, c2) = other.dims();
        if r1 == 0 || r2 == 0 || c1 == 0 || c2 == 0 {
            return Self::default();
        }
        let mut coeffs = vec![vec![Complex64::new(0.0, 0.0); c1 + c2 - 1]; r1 + r2 - 1];
        for j1 in 0..r1 {
            for k1 in 0..c1 {
                let a = self.get(j1, k1);
                if a == Complex64::new(0.0, 0.0) {
                    continue;
                }
                for j2 in 0..r2 {
                    for k2 in 0..c2 {
                        coeffs[j1 + j2][k1 + k2] += a * other.get(j2, k2);
                    }
                }
            }
        }
        Self { coeffs }
    }

    /// Whether every non-constant coefficient is (numerically) zero.
    pub fn is_constant(&self) -> bool {
        let scale = self
            .coeffs
            .iter()
            .flatten()
            .fold(0.0f64, |m, c| m.max(c.norm()));
        self.coeffs.iter().enumerate().all(|(j, row)| {
            row.iter()
                .enumerate()
                .all(|(k, c)| (j == 0 && k == 0) || c.norm() <= 1e-14 * scale)
        })
    }

    pub fn jet(&self, z: Complex64) -> BiJet {
        let zb = z.conj();
        let (rows, cols) = self.dims();
        let zero = Complex64::new(0.0, 0.0);
        // Powers and their derivatives: zʲ, j zʲ⁻¹.
        let pow = |w: Complex64, n: usize| -> (Vec<Complex64>, Vec<Complex64>) {
            let mut p = vec![Complex64::new(1.0, 0.0); n.max(1)];
            for i in 1..n {
                p[i] = p[i - 1] * w;
            }
            let d = (0..n)
                .map(|i| if i == 0 { zero } else { p[i - 1] * i as f64 })
                .collect();
            (p, d)
        };
        let (pz, dpz) = pow(z, rows);
        let (pb, dpb) = pow(zb, cols);
        let mut jet = BiJet {
            value: zero,
            dz: zero,
            dzbar: zero,
            dz_dzbar: zero,
        };
        for (j, row) in self.coeffs.iter().enumerate() {
            for (k, &c) in row.iter().enumerate() {
                if c == zero {
                    continue;
                }
                jet.value += c * pz[j] * pb[k];
                jet.dz += c * dpz[j] * pb[k];
                jet.dzbar += c * pz[j] * dpb[k];
                jet.dz_dzbar += c * dpz[j] * dpb[k];
            }
        }
        jet
    }
}

/// `∂_z ∂_z̄ log τ` from the jet of a real-valued `τ`.
fn log_mixed_derivative(jet: &BiJet) -> f64 {
    let tau = jet.value.re;
    (tau * jet.dz_dzbar.re - (jet.dz * jet.dzbar).re) / (tau * tau)
}

/// Exponentiated Toda fields `(e^{2g₁}, e^{2g₂})` and the two determinants.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TodaPoint {
    pub e2g: [f64; 2],
    pub det: [f64; 2],
}

impl TodaPoint {
    /// Both `e^{2g_A}` positive, so `g_A` is real.
    pub fn is_physical(&self) -> bool {
        self.e2g.iter().all(|e| *e > 0.0)
    }
}

/// The SU(3) Toda vortex pair generated by polynomials `f₁`, `f₂`.
///
/// For `λ = -1` this is the Kostant–Leznov–Saveliev solution; `λ = +1` uses
/// `v = (1, -f₁, -f₂)` and is a genuine (real) solution only where both
/// `e^{2g_A}` come out positive, see [`TodaPoint::is_physical`].
#[derive(Debug, Clone)]
pub struct TodaSolution {
    f1: Poly,
    f2: Poly,
    lambda: i8,
    dets: [BiPoly; 2],
}

impl TodaSolution {
    pub fn new(f1: &HoloMap, f2: &HoloMap, lambda: i8) -> Result<Self> {
        if lambda.abs() != 1 {
            return Err(VortexError::InvalidInput(format!(
                "Toda solutions need λ = ±1, got {lambda}"
            )));
        }
        let to_poly = |m: &HoloMap| -> Result<Poly> {
            if m.power() != 0.0 || !m.denominator().is_constant() {
                return Err(VortexError::Unsupported(
                    "Toda data must be polynomials without power prefactor".into(),
                ));
            }
            let c = m.denominator().coeffs()[0];
            Ok(m.numerator().scale(Complex64::new(1.0, 0.0) / c))
        };
        let f1 = to_poly(f1)?;
        let f2 = to_poly(f2)?;
        let l = Complex64::new(f64::from(lambda), 0.0);
        let u = [Poly::one(), f1.clone(), f2.clone()];
        let v = [Poly::one(), f1.scale(-l), f2.scale(-l)];
        let du: Vec<Poly> = u.iter().map(Poly::derivative).collect();
        let dv: Vec<Poly> = v.iter().map(Poly::derivative).collect();
        let inner = |a: &[Poly], b: &[Poly]| -> BiPoly {
            a.iter()
                .zip(b)
                .fold(BiPoly::default(), |acc, (x, y)| {
                    acc.add(&BiPoly::hermitian_product(x, y))
                })
        };
        // M₁†W₁ = u†v; M₂†W₂ = [[u†v, u†v'], [u'†v, u'†v']].
        let p00 = inner(&u, &v);
        let p01 = inner(&u, &dv);
        let p10 = inner(&du, &v);
        let p11 = inner(&du, &dv);
        let det2 = p00.mul(&p11).sub(&p01.mul(&p10));
        let dets = [p00, det2];
        for (a, d) in dets.iter().enumerate() {
            if d.is_constant() {
                return Err(VortexError::DegenerateData(format!(
                    "det(M{}†W{}) is constant, e^(2g{}) vanishes identically",
                    a + 1,
                    a + 1,
                    a + 1
                )));
            }
        }
        Ok(Self {
            f1,
            f2,
            lambda,
            dets,
        })
    }

    pub fn lambda(&self) -> i8 {
        self.lambda
    }

    pub fn f1(&self) -> &Poly {
        &self.f1
    }

    pub fn f2(&self) -> &Poly {
        &self.f2
    }

    /// `(e^{2g₁}, e^{2g₂})` and the determinants at `z`.
    pub fn eval(&self, z: Complex64) -> Result<TodaPoint> {
        let mut out = TodaPoint {
            e2g: [0.0; 2],
            det: [0.0; 2],
        };
        for a in 0..2 {
            let jet = self.dets[a].jet(z);
            if jet.value.re == 0.0 {
                return Err(VortexError::InvalidInput(format!(
                    "det(M{}†W{}) vanishes at z = {z}",
                    a + 1,
                    a + 1
                )));
            }
            out.det[a] = jet.value.re;
            out.e2g[a] = -2.0 / f64::from(self.lambda) * log_mixed_derivative(&jet);
        }
        Ok(out)
    }

    /// The holomorphic minors `(f₁', f₂', f₁f₂' - f₂f₁')` of `(u, u')`.
    pub fn minors(&self) -> [Poly; 3] {
        let d1 = self.f1.derivative();
        let d2 = self.f2.derivative();
        let w = self.f1.mul(&d2).sub(&self.f2.mul(&d1));
        [d1, d2, w]
    }

    /// Wronskian `det(u, u', u'') = f₁'f₂'' - f₂'f₁''`.
    pub fn wronskian(&self) -> Poly {
        let d1 = self.f1.derivative();
        let d2 = self.f2.derivative();
        d1.mul(&d2.derivative()).sub(&d2.mul(&d1.derivative()))
    }

    /// Vortex divisor of flavour `flavor` (1 or 2) inside `|z| < radius`.
    ///
    /// Flavour 1 vanishes at the common zeros of the minors of `(u, u')`;
    /// flavour 2 at the zeros of the Wronskian not absorbed by those.
    pub fn vortex_divisor(&self, flavor: usize, radius: f64) -> Result<Vec<(Complex64, usize)>> {
        if !(1..=2).contains(&flavor) {
            return Err(VortexError::InvalidInput(format!(
                "flavour must be 1 or 2, got {flavor}"
            )));
        }
        let minors: Vec<Poly> = self.minors().into_iter().filter(|p| !p.is_zero()).collect();
        let wr = self.wronskian();
        let mut candidates: Vec<Complex64> = Vec::new();
        for p in minors.iter().chain(std::iter::once(&wr)) {
            for (c, _) in p.roots_with_multiplicity() {
                if c.norm() < radius && !candidates.iter().any(|d| (d - c).norm() < 1e-6) {
                    candidates.push(c);
                }
            }
        }
        let mut out = Vec::new();
        for c in candidates {
            let common = minors.iter().map(|p| order_at(p, c)).min().unwrap_or(0);
            let m = if flavor == 1 {
                common as isize
            } else {
                order_at(&wr, c) as isize - 2 * common as isize
            };
            if m > 0 {
                out.push((c, m as usize));
            }
        }
        Ok(out)
    }
}

/// Order of vanishing of `p` at `c`, judged on normalized Taylor coefficients.
fn order_at(p: &Poly, c: Complex64) -> usize {
    if p.is_zero() {
        return usize::MAX;
    }
    let scale = p.coeffs().iter().fold(0.0f64, |m, x| m.max(x.norm())) * (1.0 + c.norm()).powi(p.coeffs().len() as i32);
    let mut q = p.clone();
    let mut factorial = 1.0;
    for k in 0..p.coeffs().len() {
        if k > 0 {
            factorial *= k as f64;
        }
        if (q.eval(c) / factorial).norm() > 1e-8 * scale {
            return k;
        }
        q = q.derivative();
    }
    p.coeffs().len()
}

/// Kostant–Leznov–Saveliev fields from the sum-of-minors (Cauchy–Binet) form
/// of the determinants, `τ = Σ w_k |m_k|²`, with weights
/// `w = η_i η_j`, `η = (1, -λ, -λ)`.
///
/// This is an independent route to [`TodaSolution::eval`]; for `λ = -1` it is
/// the classical Gram-determinant formula `e^{2g_A} = 2 ∂∂̄ log det(M_A† M_A)`.
pub fn kls_from_minors(f1: &Poly, f2: &Poly, lambda: i8, z: Complex64) -> [f64; 2] {
    let l = f64::from(lambda);
    let eta = [1.0, -l, -l];
    let u = [Poly::one(), f1.clone(), f2.clone()];
    let du: Vec<Poly> = u.iter().map(Poly::derivative).collect();
    let first: Vec<(f64, Poly)> = (0..3).map(|i| (eta[i], u[i].clone())).collect();
    let mut second = Vec::new();
    for i in 0..3 {
        for j in (i + 1)..3 {
            let minor = u[i].mul(&du[j]).sub(&u[j].mul(&du[i]));
            second.push((eta[i] * eta[j], minor));
        }
    }
    let eval = |terms: &[(f64, Poly)]| -> f64 {
        let (mut tau, mut tz, mut tzz) = (0.0, Complex64::new(0.0, 0.0), 0.0);
        for (w, m) in terms {
            let val = m.eval(z);
            let d = m.derivative().eval(z);
            tau += w * val.norm_sqr();
            tz += d * val.conj() * *w;
            tzz += w * d.norm_sqr();
        }
        (tau * tzz - tz.norm_sqr()) / (tau * tau)
    };
    [-2.0 / l * eval(&first), -2.0 / l * eval(&second)]
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    fn poly(coeffs: &[f64]) -> HoloMap {
        HoloMap::polynomial(Poly::from_real(coeffs))
    }

    fn single(kind: VortexKind, radius: f64, map: HoloMap) -> SingleFieldSolution {
        let (l0, l) = kind.lambdas();
        SingleFieldSolution::new(Surface::with_radius(l0, radius).unwrap(), l, map).unwrap()
    }

    #[test]
    fn eval_single_examples() {
        let taubes = single(VortexKind::Taubes, 0.95, poly(&[0.0, 0.0, 1.0]));
        assert_relative_eq!(taubes.eval(c(0.5, 0.0)).unwrap().phi_norm_sq, 0.64, max_relative = 1e-14);
        assert_eq!(taubes.eval(c(0.0, 0.0)).unwrap().phi_norm_sq, 0.0);
        let popov = single(VortexKind::Popov, 4.0, poly(&[0.0, 0.0, 1.0]));
        assert_relative_eq!(popov.eval(c(1.0, 0.0)).unwrap().phi_norm_sq, 4.0, max_relative = 1e-14);
    }

    #[test]
    fn h_is_g_plus_metric_log_and_norm_is_jacobian() {
        for kind in VortexKind::ALL {
            let (l0, _) = kind.lambdas();
            let radius = if l0 == 1 { 0.9 } else { 2.0 };
            let sol = single(kind, radius, poly(&[0.0, 0.3, 0.4]));
            for z in [c(0.1, 0.2), c(-0.5, 0.3), c(0.7, -0.1)] {
                let p = sol.eval(z).unwrap();
                let m = sol.surface().metric_factor(z);
                assert_relative_eq!(p.h, p.g + (m / 2.0).ln(), epsilon = 1e-13);
                assert_relative_eq!(p.phi_norm_sq, (2.0 * p.h).exp(), max_relative = 1e-12);
                assert_relative_eq!(sol.phi(z).unwrap().norm_sqr(), p.phi_norm_sq, max_relative = 1e-12);
            }
        }
    }

    #[test]
    fn taubes_blaschke_vacuum_at_boundary() {
        let b = crate::holomorphic::BlaschkeProduct::new(vec![c(0.0, 0.0), c(0.3, 0.2), c(-0.4, 0.0)]).unwrap();
        let sol = single(VortexKind::Taubes, 1.0, b.to_map());
        for k in 0..16 {
            let z = Complex64::from_polar(1.0 - 1e-5, k as f64 * 0.39);
            assert!((sol.eval(z).unwrap().phi_norm_sq - 1.0).abs() < 1e-3);
        }
    }

    #[test]
    fn surface_singularity_is_reported() {
        // |f| = 1 on |z| = 1/2 for f = 2z, which leaves the target disk.
        let sol = single(VortexKind::Taubes, 0.95, poly(&[0.0, 2.0]));
        assert!(matches!(
            sol.eval(c(0.5, 0.0)),
            Err(VortexError::SurfaceSingularity { .. })
        ));
        assert!(matches!(
            sol.eval(c(0.8, 0.0)),
            Err(VortexError::SurfaceSingularity { .. })
        ));
    }

    #[test]
    fn gauge_potential_matches_numerical_derivative() {
        let sol = single(VortexKind::AmbjornOlesen, 0.9, poly(&[0.1, 0.5, 0.3]));
        let z = c(0.3, -0.2);
        let log_ratio = |w: Complex64| {
            let (f, _) = sol.map().eval_with_derivative(w).unwrap();
            (sol.surface().metric_factor(w) / (1.0 + f.norm_sqr())).ln()
        };
        let eps = 1e-5;
        let dx = (log_ratio(z + eps) - log_ratio(z - eps)) / (2.0 * eps);
        let dy = (log_ratio(z + c(0.0, eps)) - log_ratio(z - c(0.0, eps))) / (2.0 * eps);
        // ∂_z̄ = ½(∂ₓ + i∂ᵧ).
        let expected = c(0.0, -1.0) * c(dx / 2.0, dy / 2.0);
        assert!((sol.gauge_potential(z).unwrap() - expected).norm() < 1e-8);
    }

    #[test]
    fn impurity_examples() {
        let disk = Surface::new(1).unwrap();
        let one = poly(&[1.0]);
        let p = eval_impurity_solution(&disk, 1, 1.0, &one, c(0.5, 0.0)).unwrap();
        assert_relative_eq!(p.phi_norm_sq, 0.64, max_relative = 1e-14);
        assert!((p.phi - c(1.0 / 1.25, 0.0)).norm() < 1e-15);
        let origin = eval_impurity_solution(&disk, 1, 1.0, &one, c(0.0, 0.0)).unwrap();
        assert_eq!(origin.phi, c(0.0, 0.0));
        let unit = Surface::with_radius(1, 1.0).unwrap();
        let near = eval_impurity_solution(&unit, 1, 0.5, &one, Complex64::from_polar(1.0 - 1e-7, 0.7)).unwrap();
        assert!((near.phi_norm_sq - 1.0).abs() < 1e-6);
        assert!(eval_impurity_solution(&disk, 1, 0.5, &one, c(0.0, 0.0)).is_err());
        assert!(eval_impurity_solution(&disk, 1, 1.0, &poly(&[0.0, 1.0]), c(0.1, 0.0)).is_err());
    }

    #[test]
    fn impurity_with_integer_alpha_matches_single_field() {
        let disk = Surface::new(1).unwrap();
        let ftilde = HoloMap::rational(Poly::from_real(&[0.5, 0.2]), Poly::from_real(&[1.0, -0.3])).unwrap();
        for alpha in [1.0, 2.0, 3.0] {
            let sol = SingleFieldSolution::new(disk, 1, ftilde.with_extra_power(alpha + 1.0).unwrap()).unwrap();
            for z in [c(0.2, 0.1), c(-0.6, 0.4), c(0.0, -0.85)] {
                let a = eval_impurity_solution(&disk, 1, alpha, &ftilde, z).unwrap();
                let b = sol.eval(z).unwrap();
                assert!((a.phi_norm_sq - b.phi_norm_sq).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn singular_gauge_phase_examples() {
        assert!((singular_gauge_phase(1.0, c(0.0, 1.0)).unwrap() - c(0.0, -1.0)).norm() < 1e-15);
        assert_eq!(singular_gauge_phase(0.0, c(0.3, -2.0)).unwrap(), c(1.0, 0.0));
        assert!((singular_gauge_phase(2.0, c(-1.0, 0.0)).unwrap() - c(1.0, 0.0)).norm() < 1e-14);
        assert!(singular_gauge_phase(1.0, c(0.0, 0.0)).is_err());
    }

    #[test]
    fn bradlow_examples() {
        let flat = Surface::new(1).unwrap();
        assert_relative_eq!(bradlow_eval(&flat, &poly(&[0.0, 0.0, 1.0]), c(0.5, 0.0)).unwrap(), 4.0);
        assert_eq!(bradlow_eval(&flat, &poly(&[0.0, 1.0]), c(0.3, 0.2)).unwrap(), 4.0);
        let cube = poly(&[0.0, 0.0, 0.0, 1.0 / 3.0]);
        let wide = Surface::new(0).unwrap();
        assert_relative_eq!(bradlow_eval(&wide, &cube, c(1.0, 0.0)).unwrap(), 4.0, max_relative = 1e-15);
    }

    #[test]
    fn toda_examples_lambda_minus_one() {
        let sol = TodaSolution::new(&poly(&[0.0, 1.0]), &poly(&[0.0, 0.0, 0.5]), -1).unwrap();
        let p0 = sol.eval(c(0.0, 0.0)).unwrap();
        assert!((p0.e2g[0] - 2.0).abs() < 1e-10 && (p0.e2g[1] - 2.0).abs() < 1e-10);
        let p1 = sol.eval(c(1.0, 0.0)).unwrap();
        assert!((p1.e2g[0] - 8.0 / 9.0).abs() < 1e-12 && (p1.e2g[1] - 8.0 / 9.0).abs() < 1e-12);
    }

    /// With `v = (1, -f₁, -f₂)` the second determinant at the origin is
    /// `-(1 + |z|² - |z|⁴/4)`, giving `e^{2g₂}(0) = -2`: the origin lies
    /// outside the domain where the λ = +1 solution is real.
    #[test]
    fn toda_lambda_plus_one_at_origin() {
        let sol = TodaSolution::new(&poly(&[0.0, 1.0]), &poly(&[0.0, 0.0, 0.5]), 1).unwrap();
        let p = sol.eval(c(0.0, 0.0)).unwrap();
        assert!((p.e2g[0] - 2.0).abs() < 1e-12);
        assert!((p.e2g[1] + 2.0).abs() < 1e-12);
        assert!((p.det[0] - 1.0).abs() < 1e-15 && (p.det[1] + 1.0).abs() < 1e-15);
        assert!(!p.is_physical());
        // On 0.83 < |z|² < 4.83 both fields are positive.
        let q = sol.eval(c(1.3, 0.4)).unwrap();
        assert!(q.is_physical());
    }

    #[test]
    fn toda_routes_agree() {
        let f1 = poly(&[0.2, 1.0, 0.3]);
        let f2 = poly(&[0.0, -0.4, 0.5, 0.1]);
        for lambda in [-1i8, 1] {
            let sol = TodaSolution::new(&f1, &f2, lambda).unwrap();
            for z in [c(0.3, 0.1), c(-1.2, 0.7), c(2.0, -0.5)] {
                let a = sol.eval(z).unwrap().e2g;
                let b = kls_from_minors(sol.f1(), sol.f2(), lambda, z);
                for i in 0..2 {
                    assert!((a[i] - b[i]).abs() <= 1e-10 * (1.0 + b[i].abs()), "λ={lambda} z={z} {a:?} {b:?}");
                }
            }
        }
    }

    #[test]
    fn toda_degenerate_data() {
        // f₁ = z, f₂ = 0: det(M₂†W₂) = |f₁'|² = 1 is constant.
        assert!(matches!(
            TodaSolution::new(&poly(&[0.0, 1.0]), &HoloMap::polynomial(Poly::default()), -1),
            Err(VortexError::DegenerateData(_))
        ));
        assert!(TodaSolution::new(&poly(&[0.0, 1.0]), &poly(&[0.0, 0.0, 1.0]), 0).is_err());
    }

    #[test]
    fn toda_divisors() {
        let smooth = TodaSolution::new(&poly(&[0.0, 1.0]), &poly(&[0.0, 0.0, 0.5]), -1).unwrap();
        assert!(smooth.vortex_divisor(1, 10.0).unwrap().is_empty());
        assert!(smooth.vortex_divisor(2, 10.0).unwrap().is_empty());
        let ramified = TodaSolution::new(&poly(&[0.0, 0.0, 1.0]), &poly(&[0.0, 0.0, 0.0, 1.0 / 3.0]), -1).unwrap();
        let d1 = ramified.vortex_divisor(1, 10.0).unwrap();
        assert_eq!(d1.len(), 1);
        assert!(d1[0].0.norm() < 1e-12 && d1[0].1 == 1);
        assert!(ramified.vortex_divisor(2, 10.0).unwrap().is_empty());
        // Near the flavour-1 vortex e^{2g₁} ≈ 8|z|² while e^{2g₂} ≈ 1/2.
        let p = ramified.eval(c(1e-3, 0.0)).unwrap();
        assert!((p.e2g[0] / 8e-6 - 1.0).abs() < 1e-3, "{p:?}");
        assert!((p.e2g[1] - 0.5).abs() < 1e-3, "{p:?}");
    }

    #[test]
    fn kind_names_round_trip() {
        for k in VortexKind::ALL {
            assert_eq!(VortexKind::from_name(k.name()), Some(k));
            let (a, b) = k.lambdas();
            assert_eq!(VortexKind::from_lambdas(a, b), Some(k));
        }
    }
}
