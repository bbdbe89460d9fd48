//! Run configurations: flat `key = value` text in `[problem]`, `[grid]`,
//! `[solver]` and `[output]` sections.
//!
//! Lists are written as repeated keys and complex numbers as `re+imi`.
//! [`RunConfig::serialize`] and [`RunConfig::parse`] are exact inverses.

use std::fmt::Write as _;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::charge::ChargeData;
use crate::error::{Result, VortexError};
use crate::holomorphic::{HoloMap, Poly};
use crate::solver::{Boundary, Charges, ImpuritySpec, NewtonConfig, ProblemSpec};
use crate::surface::Surface;

/// Analytic solution family for `analytic` runs.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Family {
    SingleField,
    Impurity,
    Toda,
    Bradlow,
}

impl Family {
    pub const ALL: [Family; 4] = [
        Family::SingleField,
        Family::Impurity,
        Family::Toda,
        Family::Bradlow,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Family::SingleField => "single-field",
            Family::Impurity => "impurity",
            Family::Toda => "toda",
            Family::Bradlow => "bradlow",
        }
    }

    pub fn from_name(name: &str) -> Option<Self> {
        Self::ALL.into_iter().find(|f| f.name() == name)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunConfig {
    pub family: Option<Family>,
    pub lambda0: i8,
    pub lambda: i8,
    pub radius: Option<f64>,
    /// One value for a single flavour, four (row-major) for a pair.
    pub q: Vec<f64>,
    pub r: Vec<f64>,
    pub vortex1: Vec<Complex64>,
    pub vortex2: Vec<Complex64>,
    pub sigma: Option<f64>,
    /// Delta impurity positions, paired with `alpha`.
    pub delta: Vec<Complex64>,
    pub alpha: Vec<f64>,
    /// Explicit boundary `|φ_A|²`; empty means vacuum data.
    pub boundary: Vec<f64>,
    pub potential_lambda0: Option<i8>,
    /// Map coefficients, constant term first.
    pub f1: Vec<Complex64>,
    pub f1_den: Vec<Complex64>,
    pub f2: Vec<Complex64>,
    pub f2_den: Vec<Complex64>,
    /// Toda residual nodes need `|det| > min_det`.
    pub min_det: Option<f64>,
    pub grid_n: usize,
    pub tol: f64,
    pub max_iter: usize,
    pub damping: f64,
    pub linear_tol: f64,
    pub dir: Option<String>,
    pub name: String,
    pub fields: Option<String>,
    pub compare: Option<String>,
}

impl Default for RunConfig {
    fn default() -> Self {
        let newton = NewtonConfig::default();
        Self {
            family: None,
            lambda0: 0,
            lambda: 1,
            radius: None,
            q: vec![1.0],
            r: vec![1.0],
            vortex1: Vec::new(),
            vortex2: Vec::new(),
            sigma: None,
            delta: Vec::new(),
            alpha: Vec::new(),
            boundary: Vec::new(),
            potential_lambda0: None,
            f1: Vec::new(),
            f1_den: Vec::new(),
            f2: Vec::new(),
            f2_den: Vec::new(),
            min_det: None,
            grid_n: 128,
            tol: newton.tol,
            max_iter: newton.max_iter,
            damping: newton.damping,
            linear_tol: newton.linear_tol,
            dir: None,
            name: "run".into(),
            fields: None,
            compare: None,
        }
    }
}

#[derive(Clone, Copy, PartialEq, Eq)]
enum Section {
    Problem,
    Grid,
    Solver,
    Output,
}

impl Section {
    fn from_name(name: &str) -> Option<Self> {
        match name {
            "problem" => Some(Section::Problem),
            "grid" => Some(Section::Grid),
            "solver" => Some(Section::Solver),
            "output" => Some(Section::Output),
            _ => None,
        }
    }
}

/// Formats a complex number as `re+imi`.
pub fn format_complex(z: Complex64) -> String {
    let sign = if z.im.is_sign_negative() { '-' } else { '+' };
    format!("{}{}{}i", z.re, sign, z.im.abs())
}

/// Parses `re+imi`, `re-imi`, a bare real or a bare imaginary `imi`.
pub fn parse_complex(text: &str) -> Option<Complex64> {
    let s = text.trim();
    let value = if let Some(body) = s.strip_suffix('i') {
        let bytes = body.as_bytes();
        let split = (1..bytes.len())
            .rev()
            .find(|&k| matches!(bytes[k], b'+' | b'-') && !matches!(bytes[k - 1], b'e' | b'E'));
        match split {
            Some(k) => {
                let re: f64 = body[..k].parse().ok()?;
                let im: f64 = match &body[k..] {
                    "+" => 1.0,
                    "-" => -1.0,
                    t => t.parse().ok()?,
                };
                Complex64::new(re, im)
            }
            None => {
                let im = match body {
                    "" | "+" => 1.0,
                    "-" => -1.0,
                    t => t.parse().ok()?,
                };
                Complex64::new(0.0, im)
            }
        }
    } else {
        Complex64::new(s.parse().ok()?, 0.0)
    };
    (value.re.is_finite() && value.im.is_finite()).then_some(value)
}

fn err(line: usize, key: &str, message: impl Into<String>) -> VortexError {
    VortexError::Config {
        line,
        key: key.to_string(),
        message: message.into(),
    }
}

fn real(line: usize, key: &str, value: &str) -> Result<f64> {
    match value.parse::<f64>() {
        Ok(x) if x.is_finite() => Ok(x),
        _ => Err(err(line, key, format!("expected a finite real, got `{value}`"))),
    }
}

fn sign(line: usize, key: &str, value: &str) -> Result<i8> {
    match value {
        "-1" => Ok(-1),
        "0" => Ok(0),
        "1" | "+1" => Ok(1),
        _ => Err(err(line, key, format!("expected -1, 0 or 1, got `{value}`"))),
    }
}

fn count(line: usize, key: &str, value: &str) -> Result<usize> {
    value
        .parse()
        .map_err(|_| err(line, key, format!("expected a nonnegative integer, got `{value}`")))
}

fn complex(line: usize, key: &str, value: &str) -> Result<Complex64> {
    parse_complex(value).ok_or_else(|| err(line, key, format!("expected `re+imi`, got `{value}`")))
}

impl RunConfig {
    /// Parses configuration text. Unknown sections or keys, repeated scalar
    /// keys and malformed values are errors carrying the line and key.
    pub fn parse(text: &str) -> Result<Self> {
        let mut c = RunConfig::default();
        let mut section = None;
        let mut seen: Vec<&str> = Vec::new();
        let mut lines: Vec<(usize, &str)> = Vec::new();
        for (idx, raw) in text.lines().enumerate() {
            let line = idx + 1;
            let t = raw.trim();
            if t.is_empty() || t.starts_with('#') || t.starts_with(';') {
                continue;
            }
            if let Some(name) = t.strip_prefix('[').and_then(|s| s.strip_suffix(']')) {
                section = Some(
                    Section::from_name(name.trim())
                        .ok_or_else(|| err(line, name, "unknown section"))?,
                );
                continue;
            }
            let Some((key, value)) = t.split_once('=') else {
                return Err(err(line, t, "expected `key = value`"));
            };
            let (key, value) = (key.trim(), value.trim());
            let Some(sec) = section else {
                return Err(err(line, key, "key outside any section"));
            };
            let repeated = matches!(
                key,
                "q" | "r" | "vortex1" | "vortex2" | "delta" | "alpha" | "boundary" | "f1" | "f1_den" | "f2" | "f2_den"
            );
            if !repeated {
                if seen.contains(&key) {
                    return Err(err(line, key, "key given twice"));
                }
                seen.push(key);
            }
            lines.push((line, key));
            match (sec, key) {
                (Section::Problem, "family") => {
                    c.family = Some(Family::from_name(value).ok_or_else(|| {
                        err(line, key, format!("unknown family `{value}`; expected single-field, impurity, toda or bradlow"))
                    })?)
                }
                (Section::Problem, "lambda0") => c.lambda0 = sign(line, key, value)?,
                (Section::Problem, "lambda") => c.lambda = sign(line, key, value)?,
                (Section::Problem, "radius") => c.radius = Some(real(line, key, value)?),
                (Section::Problem, "q") => c.q.push(real(line, key, value)?),
                (Section::Problem, "r") => c.r.push(real(line, key, value)?),
                (Section::Problem, "vortex1") => c.vortex1.push(complex(line, key, value)?),
                (Section::Problem, "vortex2") => c.vortex2.push(complex(line, key, value)?),
                (Section::Problem, "sigma") => c.sigma = Some(real(line, key, value)?),
                (Section::Problem, "delta") => c.delta.push(complex(line, key, value)?),
                (Section::Problem, "alpha") => c.alpha.push(real(line, key, value)?),
                (Section::Problem, "boundary") => c.boundary.push(real(line, key, value)?),
                (Section::Problem, "potential_lambda0") => {
                    c.potential_lambda0 = Some(sign(line, key, value)?)
                }
                (Section::Problem, "f1") => c.f1.push(complex(line, key, value)?),
                (Section::Problem, "f1_den") => c.f1_den.push(complex(line, key, value)?),
                (Section::Problem, "f2") => c.f2.push(complex(line, key, value)?),
                (Section::Problem, "f2_den") => c.f2_den.push(complex(line, key, value)?),
                (Section::Problem, "min_det") => c.min_det = Some(real(line, key, value)?),
                (Section::Grid, "n") => c.grid_n = count(line, key, value)?,
                (Section::Solver, "tol") => c.tol = real(line, key, value)?,
                (Section::Solver, "max_iter") => c.max_iter = count(line, key, value)?,
                (Section::Solver, "damping") => c.damping = real(line, key, value)?,
                (Section::Solver, "linear_tol") => c.linear_tol = real(line, key, value)?,
                (Section::Output, "dir") => c.dir = Some(value.to_string()),
                (Section::Output, "name") => c.name = value.to_string(),
                (Section::Output, "fields") => c.fields = Some(value.to_string()),
                (Section::Output, "compare") => c.compare = Some(value.to_string()),
                _ => return Err(err(line, key, "unknown key for this section")),
            }
        }
        // Defaults for q and r are replaced, not extended, by explicit keys.
        let explicit = |k: &str| lines.iter().any(|(_, key)| *key == k);
        if explicit("q") {
            c.q.remove(0);
        }
        if explicit("r") {
            c.r.remove(0);
        }
        let line_of = |k: &str| lines.iter().find(|(_, key)| *key == k).map_or(0, |(l, _)| *l);
        c.check().map_err(|(key, message)| err(line_of(key), key, message))?;
        Ok(c)
    }

    /// Consistency checks that do not need a solve.
    fn check(&self) -> std::result::Result<(), (&'static str, String)> {
        match (self.q.len(), self.r.len()) {
            (1, 1) | (4, 2) => {}
            (q, r) => {
                return Err(("q", format!("need one q and one r, or four q and two r; got {q} and {r}")))
            }
        }
        if self.q.len() == 1 && !self.vortex2.is_empty() {
            return Err(("vortex2", "a single flavour has no second vortex list".into()));
        }
        if self.delta.len() != self.alpha.len() && !(self.delta.is_empty() && self.family == Some(Family::Impurity)) {
            return Err(("alpha", format!("{} delta positions but {} strengths", self.delta.len(), self.alpha.len())));
        }
        if self.sigma.is_some() && !self.delta.is_empty() {
            return Err(("sigma", "constant and delta impurities are exclusive".into()));
        }
        if !self.boundary.is_empty() && self.boundary.len() != self.q.len().min(2) {
            return Err(("boundary", "one boundary value per flavour".into()));
        }
        if !(self.tol > 0.0) {
            return Err(("tol", "tolerance must be positive".into()));
        }
        if !(self.damping > 0.0 && self.damping <= 1.0) {
            return Err(("damping", "damping must lie in (0, 1]".into()));
        }
        if self.name.is_empty() || self.name.contains(['/', '\\']) {
            return Err(("name", "output name must be a plain file stem".into()));
        }
        Ok(())
    }

    /// Writes the configuration in canonical order with every non-default
    /// optional key present.
    pub fn serialize(&self) -> String {
        let mut s = String::from("[problem]\n");
        let kv = |s: &mut String, k: &str, v: &dyn std::fmt::Display| {
            let _ = writeln!(s, "{k} = {v}");
        };
        if let Some(f) = self.family {
            kv(&mut s, "family", &f.name());
        }
        kv(&mut s, "lambda0", &self.lambda0);
        kv(&mut s, "lambda", &self.lambda);
        if let Some(r) = self.radius {
            kv(&mut s, "radius", &r);
        }
        for x in &self.q {
            kv(&mut s, "q", x);
        }
        for x in &self.r {
            kv(&mut s, "r", x);
        }
        let lists: [(&str, &[Complex64]); 2] = [("vortex1", &self.vortex1), ("vortex2", &self.vortex2)];
        for (k, list) in lists {
            for z in list {
                kv(&mut s, k, &format_complex(*z));
            }
        }
        if let Some(x) = self.sigma {
            kv(&mut s, "sigma", &x);
        }
        for z in &self.delta {
            kv(&mut s, "delta", &format_complex(*z));
        }
        for x in &self.alpha {
            kv(&mut s, "alpha", x);
        }
        for x in &self.boundary {
            kv(&mut s, "boundary", x);
        }
        if let Some(x) = self.potential_lambda0 {
            kv(&mut s, "potential_lambda0", &x);
        }
        let maps: [(&str, &[Complex64]); 4] = [
            ("f1", &self.f1),
            ("f1_den", &self.f1_den),
            ("f2", &self.f2),
            ("f2_den", &self.f2_den),
        ];
        for (k, list) in maps {
            for z in list {
                kv(&mut s, k, &format_complex(*z));
            }
        }
        if let Some(x) = self.min_det {
            kv(&mut s, "min_det", &x);
        }
        s.push_str("\n[grid]\n");
        kv(&mut s, "n", &self.grid_n);
        s.push_str("\n[solver]\n");
        kv(&mut s, "tol", &self.tol);
        kv(&mut s, "max_iter", &self.max_iter);
        kv(&mut s, "damping", &self.damping);
        kv(&mut s, "linear_tol", &self.linear_tol);
        s.push_str("\n[output]\n");
        if let Some(d) = &self.dir {
            kv(&mut s, "dir", d);
        }
        kv(&mut s, "name", &self.name);
        if let Some(f) = &self.fields {
            kv(&mut s, "fields", f);
        }
        if let Some(f) = &self.compare {
            kv(&mut s, "compare", f);
        }
        s
    }

    pub fn surface(&self) -> Result<Surface> {
        match self.radius {
            Some(r) => Surface::with_radius(self.lambda0, r),
            None => Surface::new(self.lambda0),
        }
    }

    pub fn charges(&self) -> Result<Charges> {
        match (self.q.as_slice(), self.r.as_slice()) {
            ([q], [r]) => Ok(Charges::Single { q: *q, r: *r }),
            ([a, b, c, d], [r1, r2]) => Ok(Charges::Pair(ChargeData::new([[*a, *b], [*c, *d]], [*r1, *r2])?)),
            _ => Err(VortexError::Spec("charge data has the wrong shape".into())),
        }
    }

    pub fn newton(&self) -> NewtonConfig {
        NewtonConfig {
            tol: self.tol,
            max_iter: self.max_iter,
            damping: self.damping,
            linear_tol: self.linear_tol,
        }
    }

    /// The solver problem described by the `[problem]` and `[grid]` keys.
    pub fn problem(&self) -> Result<ProblemSpec> {
        let charges = self.charges()?;
        let nf = charges.flavours();
        let mut spec = ProblemSpec::new(self.surface()?, self.lambda, charges, self.grid_n)
            .with_vortices(0, self.vortex1.clone());
        if nf == 2 {
            spec = spec.with_vortices(1, self.vortex2.clone());
        }
        if let Some(s) = self.sigma {
            spec = spec.with_impurity(ImpuritySpec::Constant(s));
        } else if !self.delta.is_empty() {
            spec = spec.with_impurity(ImpuritySpec::Delta(
                self.delta.iter().copied().zip(self.alpha.iter().copied()).collect(),
            ));
        }
        if !self.boundary.is_empty() {
            spec = spec.with_boundary(Boundary::Explicit(self.boundary.clone()));
        }
        if let Some(l0) = self.potential_lambda0 {
            spec = spec.with_potential_lambda0(l0);
        }
        spec.validate()?;
        Ok(spec)
    }

    /// `f1` (or `f2`) as a holomorphic map; `None` when no coefficients are given.
    pub fn map(&self, flavour: usize) -> Result<Option<HoloMap>> {
        let (num, den) = match flavour {
            1 => (&self.f1, &self.f1_den),
            2 => (&self.f2, &self.f2_den),
            _ => return Err(VortexError::InvalidInput(format!("no map for flavour {flavour}"))),
        };
        if num.is_empty() {
            return Ok(None);
        }
        let n = Poly::new(num.clone());
        if den.is_empty() {
            Ok(Some(HoloMap::polynomial(n)))
        } else {
            HoloMap::rational(n, Poly::new(den.clone())).map(Some)
        }
    }
}
