//! Numeric cross-check: measure the decay of Z(n) = ∫ e^{-n H} dω over a box
//! by deterministic quadrature and fit F(n) = -ln Z(n) against
//! λ ln n − (m−1) ln ln n + c. The fitted slope is an independent estimate of
//! the learning coefficient produced by the exact chart analysis.

use crate::error::{Error, Result};
use crate::lattice::Rat;
use crate::poly::LaurentPolynomial;
use num_traits::ToPrimitive;
use serde::de::Error as _;
use serde::{Deserialize, Deserializer, Serialize, Serializer};

#[derive(Clone, Debug, PartialEq)]
pub struct QuadratureSpec {
    /// Per-variable [lo, hi]; lo must be >= 0 (positive-orthant integration).
    pub box_bounds: Vec<(Rat, Rat)>,
    pub points_per_axis: usize,
    /// Geometric refinement factor toward the lower endpoint, > 1.
    pub refine: f64,
    /// Strictly increasing, at least 4 values.
    pub n_values: Vec<u64>,
    pub digits: u32,
}

#[derive(Serialize, Deserialize)]
struct WireSpec {
    #[serde(rename = "box")]
    box_bounds: Vec<[String; 2]>,
    points_per_axis: usize,
    refine: f64,
    n: Vec<u64>,
    digits: u32,
}

impl Serialize for QuadratureSpec {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        WireSpec {
            box_bounds: self
                .box_bounds
                .iter()
                .map(|(lo, hi)| [lo.to_string(), hi.to_string()])
                .collect(),
            points_per_axis: self.points_per_axis,
            refine: self.refine,
            n: self.n_values.clone(),
            digits: self.digits,
        }
        .serialize(s)
    }
}

impl<'de> Deserialize<'de> for QuadratureSpec {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let w = WireSpec::deserialize(d)?;
        let mut box_bounds = Vec::new();
        for [lo, hi] in &w.box_bounds {
            let lo = lo.parse::<Rat>().map_err(D::Error::custom)?;
            let hi = hi.parse::<Rat>().map_err(D::Error::custom)?;
            box_bounds.push((lo, hi));
        }
        Ok(QuadratureSpec {
            box_bounds,
            points_per_axis: w.points_per_axis,
            refine: w.refine,
            n_values: w.n,
            digits: w.digits,
        })
    }
}

impl QuadratureSpec {
    /// Unit box defaults: dense grid in low dimension, coarser for d = 3 to
    /// keep the tensor grid affordable.
    pub fn default_for_dim(dim: usize) -> QuadratureSpec {
        let points_per_axis = if dim <= 2 { 256 } else { 128 };
        QuadratureSpec {
            box_bounds: vec![(Rat::from_integer(0.into()), Rat::from_integer(1.into())); dim],
            points_per_axis,
            refine: 1.1,
            n_values: vec![100, 1_000, 10_000, 100_000, 1_000_000],
            digits: 30,
        }
    }

    fn validate(&self) -> Result<()> {
        if self.box_bounds.is_empty() || self.box_bounds.len() > 3 {
            return Err(Error::OutOfRange(format!(
                "quadrature supports 1 to 3 variables, got {}",
                self.box_bounds.len()
            )));
        }
        for (lo, hi) in &self.box_bounds {
            if lo < &Rat::from_integer(0.into()) || hi <= lo {
                return Err(Error::OutOfRange(
                    "box bounds must satisfy 0 <= lo < hi".into(),
                ));
            }
        }
        if self.points_per_axis < 2 {
            return Err(Error::OutOfRange("points_per_axis must be >= 2".into()));
        }
        if self.refine <= 1.0 || !self.refine.is_finite() {
            return Err(Error::OutOfRange("refine factor must exceed 1".into()));
        }
        if self.n_values.len() < 4 || self.n_values.windows(2).any(|w| w[0] >= w[1]) {
            return Err(Error::OutOfRange(
                "n values must be strictly increasing with at least 4 entries".into(),
            ));
        }
        if self.n_values[0] == 0 {
            return Err(Error::OutOfRange("n values must be positive".into()));
        }
        Ok(())
    }

    /// Axis nodes: {lo} followed by lo + (hi-lo)·r^(j-(P-1)) for j = 0..P-1,
    /// so spacing shrinks geometrically toward lo where e^{-nH} concentrates.
    fn axis_nodes(&self, axis: usize) -> Vec<f64> {
        let (lo, hi) = &self.box_bounds[axis];
        let lo = lo.to_f64().unwrap();
        let hi = hi.to_f64().unwrap();
        let p = self.points_per_axis;
        let mut nodes = Vec::with_capacity(p + 1);
        nodes.push(lo);
        for j in 0..p {
            let t = self.refine.powi(j as i32 - (p as i32 - 1));
            nodes.push(lo + (hi - lo) * t);
        }
        nodes
    }
}

/// Trapezoid weights for a sorted 1-D node list.
fn trapezoid_weights(nodes: &[f64]) -> Vec<f64> {
    let m = nodes.len();
    let mut w = vec![0.0; m];
    for i in 0..m - 1 {
        let h = nodes[i + 1] - nodes[i];
        w[i] += h / 2.0;
        w[i + 1] += h / 2.0;
    }
    w
}

/// Polynomial flattened to f64 terms so the grid loop avoids bignum work.
struct CompiledPoly {
    terms: Vec<(f64, Vec<i32>)>,
}

impl CompiledPoly {
    fn new(h: &LaurentPolynomial) -> Result<CompiledPoly> {
        let mut terms = Vec::new();
        for (e, c) in h.terms() {
            let coeff = c
                .to_f64()
                .ok_or_else(|| Error::Quadrature("coefficient out of f64 range".into()))?;
            let mut exps = Vec::with_capacity(e.dim());
            for k in &e.0 {
                let k = k
                    .to_i32()
                    .ok_or_else(|| Error::Quadrature("exponent out of range".into()))?;
                if k < 0 {
                    return Err(Error::Quadrature(
                        "negative exponents are not integrable over a box touching 0".into(),
                    ));
                }
                exps.push(k);
            }
            terms.push((coeff, exps));
        }
        Ok(CompiledPoly { terms })
    }

    fn eval(&self, point: &[f64]) -> f64 {
        let mut total = 0.0;
        for (c, exps) in &self.terms {
            let mut t = *c;
            for (x, k) in point.iter().zip(exps) {
                t *= x.powi(*k);
            }
            total += t;
        }
        total
    }
}

/// Evaluate F(n) = -ln ∫ e^{-nH} over the box for every n in the spec.
/// H is sampled once on the tensor grid and reused across all n.
pub fn estimate_free_energy(
    h: &LaurentPolynomial,
    spec: &QuadratureSpec,
) -> Result<Vec<(u64, f64)>> {
    spec.validate()?;
    let dim = spec.box_bounds.len();
    if h.num_vars() != dim {
        return Err(Error::DimensionMismatch { expected: h.num_vars(), got: dim });
    }
    let compiled = CompiledPoly::new(h)?;
    let axes: Vec<Vec<f64>> = (0..dim).map(|i| spec.axis_nodes(i)).collect();
    let weights: Vec<Vec<f64>> = axes.iter().map(|a| trapezoid_weights(a)).collect();

    // Odometer over the tensor grid; store (weight, H) pairs.
    let total: usize = axes.iter().map(Vec::len).product();
    let mut samples = Vec::with_capacity(total);
    let mut idx = vec![0usize; dim];
    let mut point = vec![0.0; dim];
    for _ in 0..total {
        let mut w = 1.0;
        for a in 0..dim {
            point[a] = axes[a][idx[a]];
            w *= weights[a][idx[a]];
        }
        let hv = compiled.eval(&point);
        if hv < 0.0 {
            return Err(Error::Quadrature(format!(
                "H is negative ({hv:.6e}) at sample point {point:?}"
            )));
        }
        samples.push((w, hv));
        for a in (0..dim).rev() {
            idx[a] += 1;
            if idx[a] < axes[a].len() {
                break;
            }
            idx[a] = 0;
        }
    }

    let mut out = Vec::with_capacity(spec.n_values.len());
    for &n in &spec.n_values {
        let nf = n as f64;
        let z: f64 = samples.iter().map(|(w, hv)| w * (-nf * hv).exp()).sum();
        if !(z > 0.0) {
            return Err(Error::Quadrature(format!("Z({n}) underflowed to {z}")));
        }
        out.push((n, -z.ln()));
    }
    Ok(out)
}

#[derive(Clone, Debug, PartialEq)]
pub struct FitSummary {
    pub lambda_hat: f64,
    pub m_hat_minus_1: f64,
    pub residual_rms: f64,
}

/// Least-squares fit of F(n) ≈ λ ln n − (m−1) ln ln n + c over regressors
/// {ln n, ln ln n, 1}. Needs at least 4 points spanning 3 decades of n.
pub fn fit_lambda(points: &[(u64, f64)]) -> Result<FitSummary> {
    if points.len() < 4 {
        return Err(Error::IllConditioned(
            "fit needs at least 4 (n, F) points".into(),
        ));
    }
    let min_n = points.iter().map(|p| p.0).min().unwrap();
    let max_n = points.iter().map(|p| p.0).max().unwrap();
    if min_n < 3 {
        return Err(Error::OutOfRange(
            "fit requires n >= 3 so ln ln n is defined".into(),
        ));
    }
    if (max_n as f64) < (min_n as f64) * 1_000.0 {
        return Err(Error::IllConditioned(
            "n values must span at least 3 decades".into(),
        ));
    }

    // Normal equations for the 3-column design [ln n, ln ln n, 1].
    let mut ata = [[0.0f64; 3]; 3];
    let mut atb = [0.0f64; 3];
    let rows: Vec<([f64; 3], f64)> = points
        .iter()
        .map(|&(n, f)| {
            let ln_n = (n as f64).ln();
            ([ln_n, ln_n.ln(), 1.0], f)
        })
        .collect();
    for (x, y) in &rows {
        for i in 0..3 {
            for j in 0..3 {
                ata[i][j] += x[i] * x[j];
            }
            atb[i] += x[i] * y;
        }
    }
    let beta = solve3(ata, atb)
        .ok_or_else(|| Error::IllConditioned("singular normal equations".into()))?;

    let mut ss = 0.0;
    for (x, y) in &rows {
        let pred = beta[0] * x[0] + beta[1] * x[1] + beta[2] * x[2];
        ss += (y - pred) * (y - pred);
    }
    Ok(FitSummary {
        lambda_hat: beta[0],
        m_hat_minus_1: -beta[1],
        residual_rms: (ss / rows.len() as f64).sqrt(),
    })
}

fn solve3(mut a: [[f64; 3]; 3], mut b: [f64; 3]) -> Option<[f64; 3]> {
    for col in 0..3 {
        let pivot = (col..3).max_by(|&i, &j| {
            a[i][col].abs().partial_cmp(&a[j][col].abs()).unwrap()
        })?;
        if a[pivot][col].abs() < 1e-12 {
            return None;
        }
        a.swap(col, pivot);
        b.swap(col, pivot);
        for row in 0..3 {
            if row == col {
                continue;
            }
            let f = a[row][col] / a[col][col];
            for j in col..3 {
                a[row][j] -= f * a[col][j];
            }
            b[row] -= f * b[col];
        }
    }
    Some([b[0] / a[0][0], b[1] / a[1][1], b[2] / a[2][2]])
}

/// One-call oracle: quadrature plus fit.
pub fn verify_lambda(h: &LaurentPolynomial, spec: &QuadratureSpec) -> Result<(Vec<(u64, f64)>, FitSummary)> {
    let points = estimate_free_energy(h, spec)?;
    let fit = fit_lambda(&points)?;
    Ok((points, fit))
}
