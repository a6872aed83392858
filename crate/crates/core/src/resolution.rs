//! Resolution driver: apply monomial substitutions and translations to H,
//! extract monomial prefactors, track cumulative Jacobian exponents per
//! chart, and test the normal-crossing termination condition.

use crate::error::{Error, Result};
use crate::hilbert::triangulate;
use crate::lattice::{
    determinant, is_unimodular, smith_invariant_factors, Int, IntegerMatrix, LatticeVector, Rat,
};
use crate::poly::{newton_polytope, rat_pow, LaurentPolynomial};
use num_traits::{One, Signed, ToPrimitive, Zero};
use serde::{Deserialize, Serialize};
use std::collections::BTreeMap;

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum ResolutionStep {
    /// x_j -> prod_i u_i^(matrix[i][j]). Square matrices must be unimodular;
    /// a non-square matrix is a parametrization/projection and invalidates
    /// Jacobian bookkeeping for the chart.
    Monomial {
        matrix: IntegerMatrix,
        new_vars: Vec<String>,
    },
    /// var -> var + offset (recentering the chart origin).
    Translate { var: String, offset: Rat },
}

/// One chart of a resolution in progress. The exact invariant maintained by
/// `apply_step`/`resolve` is
///   H(g(u)) = prod_i u_i^(prefactor_i) * unit_factor(u) * current_poly(u)
/// with `jacobian` the exponent vector of the cumulative Jacobian monomial
/// (valid only while `jacobian_valid`).
#[derive(Clone, Debug, PartialEq)]
pub struct ChartState {
    pub current_poly: LaurentPolynomial,
    pub prefactor: LatticeVector,
    pub jacobian: LatticeVector,
    pub jacobian_valid: bool,
    pub unit_factor: LaurentPolynomial,
    pub step_log: Vec<ResolutionStep>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct ResolutionTrace {
    pub charts: Vec<ChartState>,
    pub complete: bool,
    pub warnings: Vec<String>,
}

#[derive(Clone, Debug, Default, PartialEq)]
pub struct Script {
    pub steps: Vec<ResolutionStep>,
    /// Optional Jacobian exponents present before the first step (used by
    /// model charts whose measure carries a known monomial density, e.g. the
    /// radial chart of a regular model where dV = r^(d-1) dr dOmega).
    pub initial_jacobian: BTreeMap<String, u32>,
}

impl ChartState {
    pub fn new(h: &LaurentPolynomial, initial_jacobian: &BTreeMap<String, u32>) -> Result<Self> {
        let dim = h.num_vars();
        let mut jac = LatticeVector::zeros(dim);
        for (var, e) in initial_jacobian {
            let Some(idx) = h.vars().iter().position(|v| v == var) else {
                return Err(Error::UnknownVariable(var.clone()));
            };
            jac.0[idx] = Int::from(*e);
        }
        Ok(ChartState {
            current_poly: h.clone(),
            prefactor: LatticeVector::zeros(dim),
            jacobian: jac,
            jacobian_valid: true,
            unit_factor: LaurentPolynomial::constant(h.vars().to_vec(), Rat::one()),
            step_log: Vec::new(),
        })
    }

    pub fn vars(&self) -> &[String] {
        self.current_poly.vars()
    }
}

/// Split f into (coordinatewise-minimum exponents, cofactor); the cofactor
/// touches exponent 0 in every variable.
pub fn extract_monomial_factor(
    f: &LaurentPolynomial,
) -> Result<(LatticeVector, LaurentPolynomial)> {
    if f.is_zero() {
        return Err(Error::ZeroPolynomial);
    }
    let n = f.num_vars();
    let support = f.support();
    let mins = LatticeVector(
        (0..n)
            .map(|i| support.iter().map(|e| e.0[i].clone()).min().unwrap())
            .collect(),
    );
    let cofactor = f.mul_monomial(&mins.neg(), &Rat::one());
    Ok((mins, cofactor))
}

#[derive(Clone, Debug)]
pub struct NormalCrossing {
    pub ok: bool,
    /// Informational only: approximate real-zero candidates of the residual
    /// found by sign sampling on [-1,1]^d; exactness not claimed.
    pub diagnostics: Vec<String>,
}

pub fn is_normal_crossing(state: &ChartState) -> NormalCrossing {
    let residual = &state.current_poly;
    let ok = !residual.is_zero() && !residual.constant_term().is_zero();
    let mut diagnostics = Vec::new();
    let d = residual.num_vars();
    if !residual.is_zero() && d <= 4 {
        let origin_sign = residual.constant_term();
        let steps = 5usize;
        let mut idx = vec![0usize; d];
        loop {
            let point: Vec<f64> = idx
                .iter()
                .map(|&i| -1.0 + 2.0 * i as f64 / (steps - 1) as f64)
                .collect();
            let v = residual.evaluate_f64(&point);
            let flip = if origin_sign.is_zero() {
                v == 0.0
            } else if origin_sign.is_positive() {
                v <= 0.0
            } else {
                v >= 0.0
            };
            if flip && diagnostics.len() < 8 {
                diagnostics.push(format!(
                    "residual sign change or zero near ({})",
                    point
                        .iter()
                        .map(|x| format!("{x:.2}"))
                        .collect::<Vec<_>>()
                        .join(", ")
                ));
            }
            let mut i = 0;
            loop {
                if i == d {
                    return NormalCrossing { ok, diagnostics };
                }
                idx[i] += 1;
                if idx[i] < steps {
                    break;
                }
                idx[i] = 0;
                i += 1;
            }
        }
    }
    NormalCrossing { ok, diagnostics }
}

/// Apply one step, maintaining the chart invariant exactly. Monomial steps
/// transform prefactor exponents by A and Jacobian exponents by
/// h -> A h + (rowsums(A) - 1); translations absorb the translated
/// variable's prefactor power into the unit factor (valid only when the
/// offset is nonzero).
pub fn apply_step(state: &ChartState, step: &ResolutionStep) -> Result<ChartState> {
    let mut next = state.clone();
    match step {
        ResolutionStep::Monomial { matrix, new_vars } => {
            if matrix.is_square() {
                let det = determinant(matrix)?;
                if !det.abs().is_one() {
                    return Err(Error::NotUnimodular { det: det.to_string() });
                }
            }
            next.current_poly = state.current_poly.substitute_monomial(matrix, new_vars)?;
            next.unit_factor = state.unit_factor.substitute_monomial(matrix, new_vars)?;
            next.prefactor = matrix.mul_vec(&state.prefactor);
            if matrix.is_square() && state.jacobian_valid {
                let mut h = matrix.mul_vec(&state.jacobian);
                for i in 0..matrix.rows {
                    let rowsum: Int = (0..matrix.cols).map(|j| matrix[(i, j)].clone()).sum();
                    h.0[i] += rowsum - Int::one();
                }
                next.jacobian = h;
            } else {
                next.jacobian = LatticeVector::zeros(matrix.rows);
                next.jacobian_valid = false;
            }
        }
        ResolutionStep::Translate { var, offset } => {
            let Some(idx) = state.vars().iter().position(|v| v == var) else {
                return Err(Error::UnknownVariable(var.clone()));
            };
            let k = state.prefactor.0[idx].clone();
            if offset.is_zero() {
                if k.is_positive() {
                    return Err(Error::ChartDecomposition { var: var.clone() });
                }
                // identity move; still logged
            } else {
                next.current_poly = state.current_poly.translate(var, offset)?;
                next.unit_factor = state.unit_factor.translate(var, offset)?;
                if k.is_positive() {
                    // u^k becomes the unit (u + offset)^k at the new origin
                    let vars = state.vars().to_vec();
                    let mut shifted = LaurentPolynomial::monomial(
                        vars.clone(),
                        LatticeVector::unit(vars.len(), idx),
                        Rat::one(),
                    );
                    shifted = shifted.add(&LaurentPolynomial::constant(vars, offset.clone()));
                    next.unit_factor = next
                        .unit_factor
                        .multiply(&shifted.pow(k.to_u32().expect("desk-scale exponent")));
                    next.prefactor.0[idx] = Int::zero();
                } else if k.is_negative() {
                    return Err(Error::LaurentTranslation { var: var.clone() });
                }
                // The translated variable's Jacobian factor (u+offset)^h is a
                // unit at the new origin; it shifts only constants, not poles.
                next.jacobian.0[idx] = Int::zero();
            }
        }
    }
    next.step_log.push(step.clone());
    Ok(next)
}

fn pull_monomial_factor(state: &mut ChartState) -> Result<()> {
    let (m, cof) = extract_monomial_factor(&state.current_poly)?;
    state.prefactor = state.prefactor.add(&m);
    state.current_poly = cof;
    if state.prefactor.0.iter().any(|e| e.is_negative()) {
        return Err(Error::IncompleteResolution(
            "script produced a negative prefactor exponent".into(),
        ));
    }
    Ok(())
}

/// Run a script against H: extract the monomial content, apply each step
/// followed by another extraction, and report the terminal chart.
pub fn resolve(h: &LaurentPolynomial, script: &Script) -> Result<ResolutionTrace> {
    if h.is_zero() {
        return Err(Error::ZeroPolynomial);
    }
    if h.support().iter().any(|e| e.0.iter().any(|k| k.is_negative())) {
        return Err(Error::OutOfRange(
            "input must be a polynomial with nonnegative exponents".into(),
        ));
    }
    let mut warnings = Vec::new();
    if let Some(p) = negative_sample(h) {
        warnings.push(format!(
            "H takes a negative value near ({p}); a Kullback distance should be nonnegative"
        ));
    }
    let mut state = ChartState::new(h, &script.initial_jacobian)?;
    pull_monomial_factor(&mut state)?;
    for step in &script.steps {
        state = apply_step(&state, step)?;
        pull_monomial_factor(&mut state)?;
    }
    let nc = is_normal_crossing(&state);
    Ok(ResolutionTrace {
        complete: nc.ok,
        charts: vec![state],
        warnings,
    })
}

/// Sample H over a small grid on [0,1]^d; Some(point) when a clearly
/// negative value shows up (warning only, inputs may be truncations).
fn negative_sample(h: &LaurentPolynomial) -> Option<String> {
    let d = h.num_vars();
    if d > 6 {
        return None;
    }
    let steps = 4usize;
    let mut idx = vec![0usize; d];
    loop {
        let point: Vec<f64> = idx.iter().map(|&i| i as f64 / (steps - 1) as f64).collect();
        if h.evaluate_f64(&point) < -1e-9 {
            return Some(
                point
                    .iter()
                    .map(|x| format!("{x:.2}"))
                    .collect::<Vec<_>>()
                    .join(", "),
            );
        }
        let mut i = 0;
        loop {
            if i == d {
                return None;
            }
            idx[i] += 1;
            if idx[i] < steps {
                break;
            }
            idx[i] = 0;
            i += 1;
        }
    }
}

/// Evaluate the composed forward coordinate map of a step list: a point in
/// terminal chart coordinates is mapped to original coordinates.
pub fn forward_point(
    original_vars: &[String],
    steps: &[ResolutionStep],
    point: &[Rat],
) -> Result<Vec<Rat>> {
    // Variable lists per stage (before step i).
    let mut stage_vars: Vec<Vec<String>> = vec![original_vars.to_vec()];
    for s in steps {
        let prev = stage_vars.last().unwrap();
        match s {
            ResolutionStep::Monomial { new_vars, .. } => stage_vars.push(new_vars.clone()),
            ResolutionStep::Translate { .. } => stage_vars.push(prev.clone()),
        }
    }
    let mut p = point.to_vec();
    for (i, step) in steps.iter().enumerate().rev() {
        match step {
            ResolutionStep::Monomial { matrix, .. } => {
                let mut out = Vec::with_capacity(matrix.cols);
                for j in 0..matrix.cols {
                    let mut v = Rat::one();
                    for (row, coord) in p.iter().enumerate() {
                        v *= rat_pow(coord, &matrix[(row, j)])?;
                    }
                    out.push(v);
                }
                p = out;
            }
            ResolutionStep::Translate { var, offset } => {
                let Some(idx) = stage_vars[i].iter().position(|v| v == var) else {
                    return Err(Error::UnknownVariable(var.clone()));
                };
                p[idx] += offset.clone();
            }
        }
    }
    Ok(p)
}

/// Propose a unimodular monomial map from the support-cone geometry: the
/// cone's own rays when it is regular, else the rays of a regular piece of
/// its placing triangulation; ray sets of lower dimension are completed to
/// a lattice basis when possible.
pub fn suggest_map(h: &LaurentPolynomial) -> Result<Option<IntegerMatrix>> {
    if h.is_zero() {
        return Err(Error::ZeroPolynomial);
    }
    let n = h.num_vars();
    let sigma = newton_polytope(h)?.support_cone;
    if sigma.generators().is_empty() {
        // constant H: identity chart
        return Ok(Some(IntegerMatrix::identity(n)));
    }
    if !sigma.is_pointed() {
        return Ok(None);
    }
    if sigma.is_regular()? {
        if let Some(m) = complete_to_basis(&sigma.extreme_rays(), n) {
            return Ok(Some(m));
        }
    }
    for piece in triangulate(&sigma)? {
        if piece.is_regular()? {
            if let Some(m) = complete_to_basis(&piece.extreme_rays(), n) {
                return Ok(Some(m));
            }
        }
    }
    Ok(None)
}

/// Columns = the given rays, extended greedily by unit vectors to an n x n
/// matrix with |det| = 1 (None when the rays don't extend to a basis).
fn complete_to_basis(rays: &[LatticeVector], n: usize) -> Option<IntegerMatrix> {
    if rays.len() > n {
        return None;
    }
    let mut rows: Vec<LatticeVector> = rays.to_vec();
    for i in 0..n {
        if rows.len() == n {
            break;
        }
        let mut trial = rows.clone();
        trial.push(LatticeVector::unit(n, i));
        let f = smith_invariant_factors(&IntegerMatrix::from_rows(trial.clone()));
        if f.len() == trial.len() && f.iter().all(|v| v.is_one()) {
            rows = trial;
        }
    }
    if rows.len() != n {
        return None;
    }
    let m = IntegerMatrix::from_cols(rows);
    if is_unimodular(&m).ok()? {
        Some(m)
    } else {
        None
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct RegularityReport {
    pub ambient_dim: usize,
    pub cone_dim: usize,
    pub simplicial: bool,
    pub regular: bool,
    /// Lattice index of the ray sublattice inside the saturation of its span
    /// (product of Smith invariant factors); 1 for regular cones.
    pub index: String,
    pub message: String,
}

/// Report whether the support cone of H is simplicial and unimodular, i.e.
/// whether a single monomial chart already gives a nonsingular
/// parametrization; otherwise report the lattice index as a measure of the
/// singularity.
pub fn support_regularity_check(h: &LaurentPolynomial) -> Result<RegularityReport> {
    if h.is_zero() {
        return Err(Error::ZeroPolynomial);
    }
    let n = h.num_vars();
    let sigma = newton_polytope(h)?.support_cone;
    if !sigma.is_pointed() {
        return Err(Error::NotPointed);
    }
    let rays = sigma.extreme_rays();
    let dim = sigma.dim();
    let simplicial = rays.len() == dim;
    let factors = if rays.is_empty() {
        vec![]
    } else {
        smith_invariant_factors(&IntegerMatrix::from_rows(rays.clone()))
    };
    let index: Int = factors.iter().fold(Int::one(), |a, b| a * b);
    let regular = simplicial && index.is_one();
    let message = if regular && dim < n {
        format!("support cone is regular on its {dim}-dimensional span (index 1); the monomial parametrization is nonsingular there")
    } else if regular {
        "support cone is regular; the monomial parametrization is nonsingular".to_string()
    } else if !simplicial {
        format!("support cone is not simplicial ({} extreme rays, dimension {dim})", rays.len())
    } else {
        format!("support cone is simplicial but singular: lattice index {index}")
    };
    Ok(RegularityReport {
        ambient_dim: n,
        cone_dim: dim,
        simplicial,
        regular,
        index: index.to_string(),
        message,
    })
}

// ---- script JSON ------------------------------------------------------------

#[derive(Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case")]
enum WireStep {
    Monomial {
        matrix: Vec<Vec<i64>>,
        new_vars: Vec<String>,
    },
    Translate {
        var: String,
        offset: String,
    },
}

#[derive(Serialize, Deserialize)]
#[serde(untagged)]
enum WireScript {
    Steps(Vec<WireStep>),
    Full {
        steps: Vec<WireStep>,
        #[serde(default)]
        initial_jacobian: BTreeMap<String, u32>,
    },
}

fn step_from_wire(w: WireStep) -> Result<ResolutionStep> {
    Ok(match w {
        WireStep::Monomial { matrix, new_vars } => {
            let rows: Vec<LatticeVector> =
                matrix.iter().map(|r| LatticeVector::from_i64(r)).collect();
            if rows.is_empty() {
                return Err(Error::EmptyInput("monomial step matrix".into()));
            }
            ResolutionStep::Monomial {
                matrix: IntegerMatrix::from_rows(rows),
                new_vars,
            }
        }
        WireStep::Translate { var, offset } => {
            let offset: Rat = offset.parse().map_err(|_| Error::Parse {
                position: 0,
                message: format!("invalid rational offset `{offset}`"),
            })?;
            ResolutionStep::Translate { var, offset }
        }
    })
}

/// Parse a script file: either a bare JSON array of steps or an object
/// {"steps": [...], "initial_jacobian": {"r": 2}}.
pub fn parse_script(text: &str) -> Result<Script> {
    let wire: WireScript = serde_json::from_str(text)?;
    let (steps, initial_jacobian) = match wire {
        WireScript::Steps(s) => (s, BTreeMap::new()),
        WireScript::Full { steps, initial_jacobian } => (steps, initial_jacobian),
    };
    Ok(Script {
        steps: steps.into_iter().map(step_from_wire).collect::<Result<_>>()?,
        initial_jacobian,
    })
}
