//! Holomorphic data `f(z) = z^β P(z) / Q(z)` parameterizing integrable vortices.
//!
//! Derivatives are always taken on coefficients (quotient rule plus the power
//! rule for `z^β`), never by finite differences.

use std::fmt;

use nalgebra::{DMatrix, Schur};
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Result, VortexError};
use crate::surface::Surface;

/// Roots closer than this (relative to `max(1, |root|)`) are merged into one
/// root of higher multiplicity.
const ROOT_CLUSTER_RADIUS: f64 = 1e-5;
/// Denominator values below this magnitude count as poles.
const POLE_TOL: f64 = 1e-300;

/// Dense polynomial with complex coefficients, lowest degree first.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct Poly {
    coeffs: Vec<Complex64>,
}

impl Poly {
    pub fn new(coeffs: Vec<Complex64>) -> Self {
        let mut p = Self { coeffs };
        p.trim();
        p
    }

    pub fn from_real(coeffs: &[f64]) -> Self {
        Self::new(coeffs.iter().map(|&c| Complex64::new(c, 0.0)).collect())
    }

    pub fn constant(c: Complex64) -> Self {
        Self::new(vec![c])
    }

    pub fn one() -> Self {
        Self::constant(Complex64::new(1.0, 0.0))
    }

    /// The monomial `c zᵏ`.
    pub fn monomial(c: Complex64, k: usize) -> Self {
        let mut coeffs = vec![Complex64::new(0.0, 0.0); k + 1];
        coeffs[k] = c;
        Self::new(coeffs)
    }

    /// `Π (z - rᵢ)`.
    pub fn from_roots(roots: &[Complex64]) -> Self {
        roots.iter().fold(Self::one(), |acc, &r| {
            acc.mul(&Self::new(vec![-r, Complex64::new(1.0, 0.0)]))
        })
    }

    fn trim(&mut self) {
        while self.coeffs.last().is_some_and(|c| *c == Complex64::new(0.0, 0.0)) {
            self.coeffs.pop();
        }
    }

    pub fn coeffs(&self) -> &[Complex64] {
        &self.coeffs
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.is_empty()
    }

    /// Degree, with the zero polynomial reported as `None`.
    pub fn degree(&self) -> Option<usize> {
        self.coeffs.len().checked_sub(1)
    }

    pub fn is_constant(&self) -> bool {
        self.coeffs.len() <= 1
    }

    #[inline]
    pub fn eval(&self, z: Complex64) -> Complex64 {
        self.coeffs
            .iter()
            .rev()
            .fold(Complex64::new(0.0, 0.0), |acc, &c| acc * z + c)
    }

    pub fn derivative(&self) -> Self {
        Self::new(
            self.coeffs
                .iter()
                .enumerate()
                .skip(1)
                .map(|(k, &c)| c * k as f64)
                .collect(),
        )
    }

    pub fn add(&self, other: &Self) -> Self {
        let n = self.coeffs.len().max(other.coeffs.len());
        let zero = Complex64::new(0.0, 0.0);
        Self::new(
            (0..n)
                .map(|k| {
                    self.coeffs.get(k).copied().unwrap_or(zero)
                        + other.coeffs.get(k).copied().unwrap_or(zero)
                })
                .collect(),
        )
    }

    pub fn sub(&self, other: &Self) -> Self {
        self.add(&other.scale(Complex64::new(-1.0, 0.0)))
    }

    pub fn scale(&self, c: Complex64) -> Self {
        Self::new(self.coeffs.iter().map(|&a| a * c).collect())
    }

    pub fn mul(&self, other: &Self) -> Self {
        if self.is_zero() || other.is_zero() {
            return Self::default();
        }
        let mut out = vec![Complex64::new(0.0, 0.0); self.coeffs.len() + other.coeffs.len() - 1];
        for (i, &a) in self.coeffs.iter().enumerate() {
            for (j, &b) in other.coeffs.iter().enumerate() {
                out[i + j] += a * b;
            }
        }
        Self::new(out)
    }

    /// All complex roots, with multiplicity, as eigenvalues of the companion
    /// matrix followed by one Newton polish on simple roots.
    pub fn roots(&self) -> Vec<Complex64> {
        let Some(deg) = self.degree() else {
            return Vec::new();
        };
        // Exact zeros at the origin first; they make the companion matrix singular.
        let lowest = self.coeffs.iter().position(|c| *c != Complex64::new(0.0, 0.0)).unwrap_or(0);
        let mut roots = vec![Complex64::new(0.0, 0.0); lowest];
        let reduced = &self.coeffs[lowest..];
        let d = deg - lowest;
        if d == 0 {
            return roots;
        }
        let lead = reduced[d];
        let mut companion = DMatrix::<Complex64>::zeros(d, d);
        for i in 1..d {
            companion[(i, i - 1)] = Complex64::new(1.0, 0.0);
        }
        for i in 0..d {
            companion[(i, d - 1)] = -reduced[i] / lead;
        }
        let eig = Schur::new(companion)
            .eigenvalues()
            .expect("complex Schur form is triangular");
        let dp = self.derivative();
        for &r in eig.iter() {
            let slope = dp.eval(r);
            let polished = if slope.norm() > 1e-8 * (1.0 + r.norm()).powi(deg as i32) {
                r - self.eval(r) / slope
            } else {
                r
            };
            roots.push(polished);
        }
        roots
    }

    /// Distinct roots with multiplicities, clustering numerically coincident
    /// eigenvalues.
    pub fn roots_with_multiplicity(&self) -> Vec<(Complex64, usize)> {
        let mut clusters: Vec<(Vec<Complex64>, Complex64)> = Vec::new();
        for r in self.roots() {
            match clusters
                .iter_mut()
                .find(|(_, c)| (*c - r).norm() <= ROOT_CLUSTER_RADIUS * c.norm().max(1.0))
            {
                Some((members, centre)) => {
                    members.push(r);
                    *centre = members.iter().sum::<Complex64>() / members.len() as f64;
                }
                None => clusters.push((vec![r], r)),
            }
        }
        let mut out: Vec<(Complex64, usize)> = clusters
            .into_iter()
            .map(|(members, centre)| (centre, members.len()))
            .collect();
        out.sort_by(|a, b| {
            a.0.re
                .partial_cmp(&b.0.re)
                .unwrap()
                .then(a.0.im.partial_cmp(&b.0.im).unwrap())
        });
        out
    }
}

impl fmt::Display for Poly {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_zero() {
            return write!(f, "0");
        }
        let terms: Vec<String> = self
            .coeffs
            .iter()
            .enumerate()
            .filter(|(_, c)| **c != Complex64::new(0.0, 0.0))
            .map(|(k, c)| match k {
                0 => format!("({c})"),
                1 => format!("({c})z"),
                _ => format!("({c})z^{k}"),
            })
            .collect();
        write!(f, "{}", terms.join(" + "))
    }
}

/// A holomorphic map `f(z) = z^β P(z)/Q(z)`.
///
/// `β = 0` means no prefactor. Non-integer `β` uses the principal branch
/// `arg z ∈ (-π, π]`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HoloMap {
    numerator: Poly,
    denominator: Poly,
    power: f64,
}

impl HoloMap {
    pub fn new(numerator: Poly, denominator: Poly, power: f64) -> Result<Self> {
        if denominator.is_zero() {
            return Err(VortexError::InvalidInput(
                "denominator is identically zero".into(),
            ));
        }
        if !(power.is_finite() && power >= 0.0) {
            return Err(VortexError::InvalidInput(format!(
                "power prefactor must be a finite real >= 0, got {power}"
            )));
        }
        Ok(Self {
            numerator,
            denominator,
            power,
        })
    }

    pub fn polynomial(numerator: Poly) -> Self {
        Self {
            numerator,
            denominator: Poly::one(),
            power: 0.0,
        }
    }

    pub fn rational(numerator: Poly, denominator: Poly) -> Result<Self> {
        Self::new(numerator, denominator, 0.0)
    }

    /// Builds the map and checks that `Q` has no zero inside the truncated
    /// domain of `surface`.
    pub fn on_surface(numerator: Poly, denominator: Poly, power: f64, surface: &Surface) -> Result<Self> {
        let map = Self::new(numerator, denominator, power)?;
        map.check_domain(surface)?;
        Ok(map)
    }

    pub fn check_domain(&self, surface: &Surface) -> Result<()> {
        let r = surface.radius_cutoff();
        if let Some(pole) = self
            .denominator
            .roots()
            .into_iter()
            .find(|p| p.norm() < r)
        {
            return Err(VortexError::Pole(format!(
                "denominator vanishes at {pole}, inside |z| < {r}"
            )));
        }
        Ok(())
    }

    pub fn numerator(&self) -> &Poly {
        &self.numerator
    }

    pub fn denominator(&self) -> &Poly {
        &self.denominator
    }

    pub fn power(&self) -> f64 {
        self.power
    }

    pub fn is_polynomial(&self) -> bool {
        self.denominator.is_constant() && self.power.fract() == 0.0
    }

    /// The map multiplied by `z^β` (adds to the existing prefactor).
    pub fn with_extra_power(&self, beta: f64) -> Result<Self> {
        Self::new(
            self.numerator.clone(),
            self.denominator.clone(),
            self.power + beta,
        )
    }

    fn check_branch(&self, z: Complex64) -> Result<()> {
        if self.power.fract() != 0.0 && z == Complex64::new(0.0, 0.0) {
            return Err(VortexError::InvalidInput(
                "non-integer power prefactor is branched at z = 0".into(),
            ));
        }
        Ok(())
    }

    fn quotient(&self, z: Complex64) -> Result<(Complex64, Complex64)> {
        let q = self.denominator.eval(z);
        if q.norm() <= POLE_TOL {
            return Err(VortexError::Pole(format!("denominator vanishes at z = {z}")));
        }
        Ok((self.numerator.eval(z), q))
    }

    fn pow(&self, z: Complex64, beta: f64) -> Complex64 {
        if beta == 0.0 {
            Complex64::new(1.0, 0.0)
        } else if beta.fract() == 0.0 && beta.abs() < 64.0 {
            z.powi(beta as i32)
        } else {
            z.powf(beta)
        }
    }

    /// `f(z)`.
    pub fn eval(&self, z: Complex64) -> Result<Complex64> {
        self.check_branch(z)?;
        let (p, q) = self.quotient(z)?;
        Ok(self.pow(z, self.power) * p / q)
    }

    /// `f'(z)` from the coefficients.
    pub fn derivative_eval(&self, z: Complex64) -> Result<Complex64> {
        self.check_branch(z)?;
        let (p, q) = self.quotient(z)?;
        let dp = self.numerator.derivative().eval(z);
        let dq = self.denominator.derivative().eval(z);
        let ratio_prime = (dp * q - p * dq) / (q * q);
        if self.power == 0.0 {
            return Ok(ratio_prime);
        }
        let ratio = p / q;
        let zb = self.pow(z, self.power);
        let zb1 = if self.power == 1.0 {
            Complex64::new(1.0, 0.0)
        } else if z == Complex64::new(0.0, 0.0) {
            // Integer β ≥ 2 at the origin.
            Complex64::new(0.0, 0.0)
        } else {
            self.pow(z, self.power - 1.0)
        };
        Ok(self.power * zb1 * ratio + zb * ratio_prime)
    }

    /// `(f(z), f'(z))` in one pass.
    pub fn eval_with_derivative(&self, z: Complex64) -> Result<(Complex64, Complex64)> {
        Ok((self.eval(z)?, self.derivative_eval(z)?))
    }

    /// Numerator polynomial of `f'` written over `Q²`, for integer `β`.
    fn derivative_numerator(&self) -> Result<Poly> {
        if self.power.fract() != 0.0 {
            return Err(VortexError::Unsupported(format!(
                "ramification divisor needs an integer power prefactor, got {}",
                self.power
            )));
        }
        let shifted = self
            .numerator
            .mul(&Poly::monomial(Complex64::new(1.0, 0.0), self.power as usize));
        Ok(shifted
            .derivative()
            .mul(&self.denominator)
            .sub(&shifted.mul(&self.denominator.derivative())))
    }

    /// Zeros of `f'` inside `|z| < search_radius`, with multiplicities.
    ///
    /// These are the vortex centres of the integrable solution built from `f`.
    pub fn ramification_divisor(&self, search_radius: f64) -> Result<Vec<(Complex64, usize)>> {
        let num = self.derivative_numerator()?;
        if num.is_zero() {
            return Err(VortexError::DegenerateData(
                "f is constant, every point is a ramification point".into(),
            ));
        }
        Ok(num
            .roots_with_multiplicity()
            .into_iter()
            .filter(|(z, _)| z.norm() < search_radius)
            .filter(|(z, _)| self.denominator.eval(*z).norm() > 1e-12)
            .collect())
    }
}

/// Finite Blaschke product `Π (z - aᵢ)/(1 - āᵢ z)` with `|aᵢ| < 1`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BlaschkeProduct {
    zeros: Vec<Complex64>,
}

impl BlaschkeProduct {
    pub fn new(zeros: Vec<Complex64>) -> Result<Self> {
        if let Some(a) = zeros.iter().find(|a| !(a.norm() < 1.0)) {
            return Err(VortexError::InvalidInput(format!(
                "Blaschke zero {a} is not inside the unit disk"
            )));
        }
        Ok(Self { zeros })
    }

    pub fn zeros(&self) -> &[Complex64] {
        &self.zeros
    }

    pub fn eval(&self, z: Complex64) -> Complex64 {
        self.zeros
            .iter()
            .map(|&a| (z - a) / (Complex64::new(1.0, 0.0) - a.conj() * z))
            .product()
    }

    /// Product of two Blaschke products: the union of their zeros.
    pub fn combine(&self, other: &Self) -> Self {
        let mut zeros = self.zeros.clone();
        zeros.extend_from_slice(&other.zeros);
        Self { zeros }
    }

    pub fn to_map(&self) -> HoloMap {
        let num = Poly::from_roots(&self.zeros);
        let den = self.zeros.iter().fold(Poly::one(), |acc, &a| {
            acc.mul(&Poly::new(vec![Complex64::new(1.0, 0.0), -a.conj()]))
        });
        HoloMap::new(num, den, 0.0).expect("Blaschke denominator is nonzero")
    }
}
