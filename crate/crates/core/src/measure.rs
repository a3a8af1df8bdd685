//! Compactly supported probability measures on the real line: a piecewise-linear
//! density on a grid plus finitely many atoms.

use std::f64::consts::PI;
use std::sync::Arc;

use serde_json::{json, Value};

use crate::error::{Error, Result};
use crate::quad::{chebyshev_grid, Rule};
use crate::transforms::{AnalyticCauchy, AnalyticLaw};

pub const DEFAULT_GRID_SIZE: usize = 4001;

/// Largest relative mass defect accepted from user-supplied data before renormalizing.
const INPUT_MASS_TOL: f64 = 1e-3;

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Atom {
    pub location: f64,
    pub mass: f64,
}

#[derive(Clone, Debug)]
pub struct Measure1D {
    grid: Vec<f64>,
    density: Vec<f64>,
    atoms: Vec<Atom>,
    support: (f64, f64),
    // exact Cauchy transform when one is known; otherwise quadrature on the grid
    source: Option<AnalyticCauchy>,
}

#[derive(Clone, Debug, PartialEq)]
pub enum Family {
    Semicircle { mean: f64, variance: f64 },
    Bernoulli,
    Arcsine { c: f64 },
    Uniform { c: f64 },
    MarchenkoPastur { lambda: f64 },
}

impl Family {
    pub fn build(&self) -> Result<Measure1D> {
        self.build_with_grid(DEFAULT_GRID_SIZE)
    }

    pub fn build_with_grid(&self, n: usize) -> Result<Measure1D> {
        match *self {
            Family::Semicircle { mean, variance } => semicircle_with_grid(mean, variance, n),
            Family::Bernoulli => Ok(bernoulli()),
            Family::Arcsine { c } => arcsine_with_grid(c, n),
            Family::Uniform { c } => uniform_with_grid(c, n),
            Family::MarchenkoPastur { lambda } => marchenko_pastur_with_grid(lambda, n),
        }
    }

    pub fn name(&self) -> &'static str {
        match self {
            Family::Semicircle { .. } => "semicircle",
            Family::Bernoulli => "bernoulli",
            Family::Arcsine { .. } => "arcsine",
            Family::Uniform { .. } => "uniform",
            Family::MarchenkoPastur { .. } => "marchenko_pastur",
        }
    }

    pub fn from_name(name: &str, params: &Value) -> Result<Self> {
        let get = |key: &str, default: Option<f64>| -> Result<f64> {
            match params.get(key) {
                Some(v) => v
                    .as_f64()
                    .ok_or_else(|| Error::Parse(format!("parameter `{key}` must be a number"))),
                None => default.ok_or_else(|| Error::Parse(format!("missing parameter `{key}`"))),
            }
        };
        if let Some(obj) = params.as_object() {
            let allowed: &[&str] = match name {
                "semicircle" => &["mean", "variance"],
                "bernoulli" => &[],
                "arcsine" | "uniform" => &["c"],
                "marchenko_pastur" => &["lambda"],
                _ => &[],
            };
            if let Some(k) = obj.keys().find(|k| !allowed.contains(&k.as_str())) {
                return Err(Error::Parse(format!("unknown parameter `{k}` for family `{name}`")));
            }
        }
        Ok(match name {
            "semicircle" => Family::Semicircle {
                mean: get("mean", Some(0.0))?,
                variance: get("variance", Some(1.0))?,
            },
            "bernoulli" => Family::Bernoulli,
            "arcsine" => Family::Arcsine { c: get("c", Some(2.0))? },
            "uniform" => Family::Uniform { c: get("c", Some(3f64.sqrt()))? },
            "marchenko_pastur" => Family::MarchenkoPastur { lambda: get("lambda", Some(1.0))? },
            other => return Err(Error::Parse(format!("unknown family `{other}`"))),
        })
    }

    pub fn params_json(&self) -> Value {
        match *self {
            Family::Semicircle { mean, variance } => json!({"mean": mean, "variance": variance}),
            Family::Bernoulli => json!({}),
            Family::Arcsine { c } | Family::Uniform { c } => json!({ "c": c }),
            Family::MarchenkoPastur { lambda } => json!({ "lambda": lambda }),
        }
    }
}

pub fn semicircle(mean: f64, variance: f64) -> Result<Measure1D> {
    semicircle_with_grid(mean, variance, DEFAULT_GRID_SIZE)
}

pub fn semicircle_with_grid(mean: f64, variance: f64, n: usize) -> Result<Measure1D> {
    if !(variance > 0.0 && variance.is_finite()) || !mean.is_finite() {
        return Err(Error::InvalidParameter(format!(
            "semicircle needs finite mean and positive variance, got ({mean}, {variance})"
        )));
    }
    check_grid_size(n)?;
    let r = variance.sqrt();
    let grid = chebyshev_grid(mean - 2.0 * r, mean + 2.0 * r, n);
    let mut density: Vec<f64> = grid
        .iter()
        .map(|&x| {
            let u = x - mean;
            ((2.0 * r - u) * (2.0 * r + u)).max(0.0).sqrt() / (2.0 * PI * variance)
        })
        .collect();
    density[0] = 0.0;
    density[n - 1] = 0.0;
    curvature_corrected(&grid, &mut density);
    let source = AnalyticCauchy::new(AnalyticLaw::Semicircle).affine(r, mean);
    Measure1D::assemble(grid, density, vec![], Some(source), 1e-4)
}

pub fn bernoulli() -> Measure1D {
    let atoms = vec![
        Atom { location: -1.0, mass: 0.5 },
        Atom { location: 1.0, mass: 0.5 },
    ];
    let source = AnalyticCauchy::new(AnalyticLaw::Atoms(atoms.clone()));
    Measure1D::assemble(vec![], vec![], atoms, Some(source), 1e-12).expect("valid atoms")
}

/// Point mass at `c`.
pub fn dirac(c: f64) -> Result<Measure1D> {
    Measure1D::from_parts(vec![], vec![], vec![Atom { location: c, mass: 1.0 }])
}

pub fn arcsine(c: f64) -> Result<Measure1D> {
    arcsine_with_grid(c, DEFAULT_GRID_SIZE)
}

pub fn arcsine_with_grid(c: f64, n: usize) -> Result<Measure1D> {
    if !(c > 0.0 && c.is_finite()) {
        return Err(Error::InvalidParameter(format!("arcsine needs c > 0, got {c}")));
    }
    check_grid_size(n)?;
    let grid = chebyshev_grid(-c, c, n);
    let mut density: Vec<f64> = grid
        .iter()
        .map(|&x| 1.0 / (PI * ((c - x) * (c + x)).sqrt()))
        .collect();
    // endpoint values chosen so the end cells carry their exact mass
    density[0] = 0.0;
    density[n - 1] = 0.0;
    curvature_corrected(&grid, &mut density);
    let cell_mass = |a: f64, b: f64| ((b / c).clamp(-1.0, 1.0).asin() - (a / c).clamp(-1.0, 1.0).asin()) / PI;
    let h0 = grid[1] - grid[0];
    density[0] = 2.0 * cell_mass(grid[0], grid[1]) / h0 - density[1];
    let hn = grid[n - 1] - grid[n - 2];
    density[n - 1] = 2.0 * cell_mass(grid[n - 2], grid[n - 1]) / hn - density[n - 2];
    let source = AnalyticCauchy::new(AnalyticLaw::Arcsine).affine(c, 0.0);
    Measure1D::assemble(grid, density, vec![], Some(source), 1e-3)
}

pub fn uniform(c: f64) -> Result<Measure1D> {
    uniform_with_grid(c, DEFAULT_GRID_SIZE)
}

pub fn uniform_with_grid(c: f64, n: usize) -> Result<Measure1D> {
    if !(c > 0.0 && c.is_finite()) {
        return Err(Error::InvalidParameter(format!("uniform needs c > 0, got {c}")));
    }
    check_grid_size(n)?;
    let grid = chebyshev_grid(-c, c, n);
    let density = vec![0.5 / c; n];
    let source = AnalyticCauchy::new(AnalyticLaw::Uniform).affine(c, 0.0);
    Measure1D::assemble(grid, density, vec![], Some(source), 1e-9)
}

/// Free Poisson law of rate `lambda`, translated to mean zero (variance `lambda`).
pub fn marchenko_pastur(lambda: f64) -> Result<Measure1D> {
    marchenko_pastur_with_grid(lambda, DEFAULT_GRID_SIZE)
}

pub fn marchenko_pastur_with_grid(lambda: f64, n: usize) -> Result<Measure1D> {
    if !(lambda > 0.0 && lambda.is_finite()) {
        return Err(Error::InvalidParameter(format!(
            "Marchenko-Pastur needs lambda > 0, got {lambda}"
        )));
    }
    check_grid_size(n)?;
    let sl = lambda.sqrt();
    let (lo, hi) = ((1.0 - sl).powi(2), (1.0 + sl).powi(2));
    let grid = chebyshev_grid(lo - lambda, hi - lambda, n);
    let mut density: Vec<f64> = grid
        .iter()
        .map(|&x| {
            let y = x + lambda;
            ((hi - y) * (y - lo)).max(0.0).sqrt() / (2.0 * PI * y)
        })
        .collect();
    density[n - 1] = 0.0;
    if (lambda - 1.0).abs() >= 1e-14 {
        density[0] = 0.0;
        curvature_corrected(&grid, &mut density);
    }
    if (lambda - 1.0).abs() < 1e-14 {
        // density ~ 1/(pi sqrt(y)) at the hard edge: give the first cell its exact mass
        let prim = |y: f64| {
            let u = y.max(0.0).sqrt();
            (0.5 * u * (4.0 - u * u).max(0.0).sqrt() + 2.0 * (u / 2.0).min(1.0).asin()) / PI
        };
        let h0 = grid[1] - grid[0];
        let m0 = prim(grid[1] + lambda) - prim(grid[0] + lambda);
        density[0] = 2.0 * m0 / h0 - density[1];
    } else {
        density[0] = 0.0;
    }
    let atoms = if lambda < 1.0 {
        vec![Atom { location: -lambda, mass: 1.0 - lambda }]
    } else {
        vec![]
    };
    let source = AnalyticCauchy::new(AnalyticLaw::MarchenkoPastur { lambda });
    Measure1D::assemble(grid, density, atoms, Some(source), 1e-3)
}

/// Shift interior node values by the local trapezoid defect so that cell
/// integrals of the linear interpolant become fourth-order accurate for
/// densities smooth inside their support.
fn curvature_corrected(grid: &[f64], f: &mut [f64]) {
    let n = grid.len();
    let orig = f.to_vec();
    for k in 1..n - 1 {
        let (h0, h1) = (grid[k] - grid[k - 1], grid[k + 1] - grid[k]);
        let d2 = 2.0 * ((orig[k + 1] - orig[k]) / h1 - (orig[k] - orig[k - 1]) / h0) / (h0 + h1);
        let c = d2 * (h0.powi(3) + h1.powi(3)) / (12.0 * (h0 + h1));
        f[k] = (orig[k] - c).max(0.0);
    }
}

fn check_grid_size(n: usize) -> Result<()> {
    if n < 3 {
        return Err(Error::InvalidParameter(format!("grid needs at least 3 nodes, got {n}")));
    }
    Ok(())
}

impl Measure1D {
    /// Build from raw parts, validating and renormalizing to unit mass.
    pub fn from_parts(grid: Vec<f64>, density: Vec<f64>, atoms: Vec<Atom>) -> Result<Self> {
        Self::assemble(grid, density, atoms, None, INPUT_MASS_TOL)
    }

    pub(crate) fn assemble(
        grid: Vec<f64>,
        mut density: Vec<f64>,
        mut atoms: Vec<Atom>,
        source: Option<AnalyticCauchy>,
        mass_tol: f64,
    ) -> Result<Self> {
        if grid.len() != density.len() {
            return Err(Error::InvalidMeasure(format!(
                "grid has {} nodes but density has {} values",
                grid.len(),
                density.len()
            )));
        }
        if grid.len() == 1 {
            return Err(Error::InvalidMeasure("a density needs at least two grid nodes".into()));
        }
        if grid.iter().any(|x| !x.is_finite()) || grid.windows(2).any(|w| w[1] <= w[0]) {
            return Err(Error::InvalidMeasure("grid must be finite and strictly increasing".into()));
        }
        if density.iter().any(|p| !p.is_finite() || *p < 0.0) {
            return Err(Error::InvalidMeasure("density must be finite and nonnegative".into()));
        }
        if atoms.iter().any(|a| !a.location.is_finite() || !(a.mass > 0.0) || !a.mass.is_finite()) {
            return Err(Error::InvalidMeasure("atoms need finite locations and positive mass".into()));
        }
        atoms.sort_by(|a, b| a.location.total_cmp(&b.location));
        if atoms.windows(2).any(|w| w[0].location == w[1].location) {
            return Err(Error::InvalidMeasure("atom locations must be distinct".into()));
        }
        let ac: f64 = trapezoid(&grid, &density);
        let total = ac + atoms.iter().map(|a| a.mass).sum::<f64>();
        if !(total > 0.0) || (total - 1.0).abs() > mass_tol {
            return Err(Error::InvalidMeasure(format!("total mass {total} is not 1")));
        }
        for p in density.iter_mut() {
            *p /= total;
        }
        for a in atoms.iter_mut() {
            a.mass /= total;
        }
        let mut lo = f64::INFINITY;
        let mut hi = f64::NEG_INFINITY;
        if let (Some(first), Some(last)) = (grid.first(), grid.last()) {
            lo = lo.min(*first);
            hi = hi.max(*last);
        }
        for a in &atoms {
            lo = lo.min(a.location);
            hi = hi.max(a.location);
        }
        if !lo.is_finite() {
            return Err(Error::InvalidMeasure("measure is empty".into()));
        }
        Ok(Measure1D { grid, density, atoms, support: (lo, hi), source })
    }

    pub fn grid(&self) -> &[f64] {
        &self.grid
    }

    pub fn density(&self) -> &[f64] {
        &self.density
    }

    pub fn atoms(&self) -> &[Atom] {
        &self.atoms
    }

    pub fn support(&self) -> (f64, f64) {
        self.support
    }

    pub fn is_atomless(&self) -> bool {
        self.atoms.is_empty()
    }

    pub fn max_atom_mass(&self) -> f64 {
        self.atoms.iter().map(|a| a.mass).fold(0.0, f64::max)
    }

    pub fn cauchy_source(&self) -> Option<&AnalyticCauchy> {
        self.source.as_ref()
    }

    pub(crate) fn with_source(mut self, source: Option<AnalyticCauchy>) -> Self {
        self.source = source;
        self
    }

    /// Drop the exact Cauchy transform, forcing grid quadrature everywhere.
    pub fn without_source(self) -> Self {
        self.with_source(None)
    }

    /// Total mass of the absolutely continuous part.
    pub fn continuous_mass(&self) -> f64 {
        trapezoid(&self.grid, &self.density)
    }

    pub fn total_mass(&self) -> f64 {
        self.continuous_mass() + self.atoms.iter().map(|a| a.mass).sum::<f64>()
    }

    /// Piecewise-linear density at `x` (zero off the grid).
    pub fn density_at(&self, x: f64) -> f64 {
        let g = &self.grid;
        if g.is_empty() || x < g[0] || x > g[g.len() - 1] {
            return 0.0;
        }
        let i = match g.partition_point(|&y| y <= x) {
            0 => 0,
            k if k >= g.len() => g.len() - 2,
            k => k - 1,
        };
        let (a, b) = (g[i], g[i + 1]);
        let t = (x - a) / (b - a);
        self.density[i] * (1.0 - t) + self.density[i + 1] * t
    }

    /// ∫ f dμ with `points` Gauss nodes per grid cell against the linear density.
    pub fn integrate<F: Fn(f64) -> f64>(&self, f: F, points: usize) -> f64 {
        let rule = Rule::new(points.max(1));
        let mut acc = 0.0;
        for i in 0..self.grid.len().saturating_sub(1) {
            let (a, b) = (self.grid[i], self.grid[i + 1]);
            let (pa, pb) = (self.density[i], self.density[i + 1]);
            if pa == 0.0 && pb == 0.0 {
                continue;
            }
            for (x, w) in rule.on(a, b) {
                let t = (x - a) / (b - a);
                acc += w * f(x) * (pa * (1.0 - t) + pb * t);
            }
        }
        acc + self.atoms.iter().map(|a| a.mass * f(a.location)).sum::<f64>()
    }

    /// k-th moment, exact for the piecewise-linear density.
    pub fn moment(&self, k: u32) -> f64 {
        if k == 0 {
            return self.total_mass();
        }
        self.integrate(|x| x.powi(k as i32), k as usize / 2 + 2)
    }

    pub fn mean(&self) -> f64 {
        self.moment(1)
    }

    pub fn variance(&self) -> f64 {
        let m = self.mean();
        self.integrate(|x| (x - m) * (x - m), 2).max(0.0)
    }

    /// Law of X + shift.
    pub fn translate(&self, shift: f64) -> Measure1D {
        let grid = self.grid.iter().map(|x| x + shift).collect();
        let atoms = self
            .atoms
            .iter()
            .map(|a| Atom { location: a.location + shift, mass: a.mass })
            .collect();
        Measure1D {
            grid,
            density: self.density.clone(),
            atoms,
            support: (self.support.0 + shift, self.support.1 + shift),
            source: self.source.as_ref().map(|s| s.affine(1.0, shift)),
        }
    }

    pub fn center(&self) -> Measure1D {
        self.translate(-self.mean())
    }

    /// Law of cX.
    pub fn dilate(&self, c: f64) -> Result<Measure1D> {
        if c == 0.0 || !c.is_finite() {
            return Err(Error::InvalidParameter(format!("dilation factor must be nonzero, got {c}")));
        }
        let mut grid: Vec<f64> = self.grid.iter().map(|x| c * x).collect();
        let mut density: Vec<f64> = self.density.iter().map(|p| p / c.abs()).collect();
        if c < 0.0 {
            grid.reverse();
            density.reverse();
        }
        let mut atoms: Vec<Atom> = self
            .atoms
            .iter()
            .map(|a| Atom { location: c * a.location, mass: a.mass })
            .collect();
        atoms.sort_by(|a, b| a.location.total_cmp(&b.location));
        let (s0, s1) = (c * self.support.0, c * self.support.1);
        Ok(Measure1D {
            grid,
            density,
            atoms,
            support: (s0.min(s1), s0.max(s1)),
            source: self.source.as_ref().map(|s| s.affine(c, 0.0)),
        })
    }

    /// L¹ distance between the absolutely continuous parts plus total variation of the atoms.
    pub fn l1_distance(&self, other: &Measure1D) -> f64 {
        let mut nodes: Vec<f64> = self.grid.iter().chain(other.grid.iter()).copied().collect();
        nodes.sort_by(f64::total_cmp);
        nodes.dedup();
        let mut acc = 0.0;
        for w in nodes.windows(2) {
            let (a, b) = (w[0], w[1]);
            // both densities are linear on (a, b); evaluate just inside to respect jumps
            let da = self.density_at_inner(a, b, true) - other.density_at_inner(a, b, true);
            let db = self.density_at_inner(a, b, false) - other.density_at_inner(a, b, false);
            acc += abs_linear_integral(da, db, b - a);
        }
        acc + atom_variation(&self.atoms, &other.atoms)
    }

    /// L¹ distance between the density and a reference density `f` supported on `[lo, hi]`.
    pub fn l1_to_density<F: Fn(f64) -> f64>(&self, f: F, lo: f64, hi: f64) -> f64 {
        let mut nodes: Vec<f64> = self.grid.clone();
        nodes.extend(chebyshev_grid(lo, hi, 2001));
        nodes.sort_by(f64::total_cmp);
        nodes.dedup();
        let rule = Rule::new(6);
        let mut acc = 0.0;
        for w in nodes.windows(2) {
            let (a, b) = (w[0], w[1]);
            for (x, wt) in rule.on(a, b) {
                let r = if x >= lo && x <= hi { f(x) } else { 0.0 };
                acc += wt * (self.density_at(x) - r).abs();
            }
        }
        acc + self.atoms.iter().map(|a| a.mass).sum::<f64>()
    }

    fn density_at_inner(&self, a: f64, b: f64, left: bool) -> f64 {
        let g = &self.grid;
        if g.is_empty() || b <= g[0] || a >= g[g.len() - 1] {
            return 0.0;
        }
        let mid = 0.5 * (a + b);
        let i = g.partition_point(|&y| y <= mid).clamp(1, g.len() - 1) - 1;
        let (x0, x1) = (g[i], g[i + 1]);
        let x = if left { a } else { b };
        let t = (x - x0) / (x1 - x0);
        self.density[i] * (1.0 - t) + self.density[i + 1] * t
    }

    /// Serialize in the grid form of the measure spec format.
    pub fn to_json(&self) -> Value {
        json!({
            "grid": self.grid,
            "density": self.density,
            "atoms": self.atoms.iter().map(|a| [a.location, a.mass]).collect::<Vec<_>>(),
        })
    }

    /// Parse either `{"family": .., "params": {..}}` or `{"grid": [..], "density": [..], "atoms": [[x, m], ..]}`.
    pub fn from_json(v: &Value, grid_size: usize) -> Result<Self> {
        let obj = v
            .as_object()
            .ok_or_else(|| Error::Parse("measure spec must be a JSON object".into()))?;
        if let Some(name) = obj.get("family") {
            if let Some(k) = obj.keys().find(|k| *k != "family" && *k != "params") {
                return Err(Error::Parse(format!("unknown key `{k}` in measure spec")));
            }
            let name = name
                .as_str()
                .ok_or_else(|| Error::Parse("`family` must be a string".into()))?;
            let params = obj.get("params").cloned().unwrap_or(json!({}));
            return Family::from_name(name, &params)?.build_with_grid(grid_size);
        }
        if let Some(k) = obj.keys().find(|k| !["grid", "density", "atoms"].contains(&k.as_str())) {
            return Err(Error::Parse(format!("unknown key `{k}` in measure spec")));
        }
        let nums = |key: &str| -> Result<Vec<f64>> {
            match obj.get(key) {
                None => Ok(vec![]),
                Some(Value::Array(xs)) => xs
                    .iter()
                    .map(|x| x.as_f64().ok_or_else(|| Error::Parse(format!("`{key}` must hold numbers"))))
                    .collect(),
                Some(_) => Err(Error::Parse(format!("`{key}` must be an array"))),
            }
        };
        let grid = nums("grid")?;
        let density = nums("density")?;
        let atoms = match obj.get("atoms") {
            None => vec![],
            Some(Value::Array(xs)) => xs
                .iter()
                .map(|pair| match pair.as_array().map(|p| p.as_slice()) {
                    Some([x, m]) => match (x.as_f64(), m.as_f64()) {
                        (Some(location), Some(mass)) => Ok(Atom { location, mass }),
                        _ => Err(Error::Parse("atom entries must be numbers".into())),
                    },
                    _ => Err(Error::Parse("atoms must be [location, mass] pairs".into())),
                })
                .collect::<Result<Vec<_>>>()?,
            Some(_) => return Err(Error::Parse("`atoms` must be an array".into())),
        };
        let mut m = Measure1D::from_parts(grid, density, atoms)?;
        if m.grid.is_empty() {
            let src = AnalyticCauchy::new(AnalyticLaw::Atoms(m.atoms.clone()));
            m = m.with_source(Some(src));
        }
        Ok(m)
    }

    pub(crate) fn shared(&self) -> Arc<Measure1D> {
        Arc::new(self.clone())
    }
}

fn trapezoid(xs: &[f64], ys: &[f64]) -> f64 {
    xs.windows(2)
        .zip(ys.windows(2))
        .map(|(x, y)| 0.5 * (x[1] - x[0]) * (y[0] + y[1]))
        .sum()
}

/// ∫₀ʰ |linear from da to db|.
fn abs_linear_integral(da: f64, db: f64, h: f64) -> f64 {
    if da * db >= 0.0 {
        0.5 * h * (da.abs() + db.abs())
    } else {
        0.5 * h * (da * da + db * db) / (da.abs() + db.abs())
    }
}

fn atom_variation(a: &[Atom], b: &[Atom]) -> f64 {
    let mut acc = 0.0;
    for x in a {
        let other = b.iter().find(|y| y.location == x.location).map_or(0.0, |y| y.mass);
        acc += (x.mass - other).abs();
    }
    for y in b {
        if !a.iter().any(|x| x.location == y.location) {
            acc += y.mass;
        }
    }
    acc
}
