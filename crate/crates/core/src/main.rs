use std::collections::BTreeMap;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use serde_json::{json, Value};
use toric_rlct::cone::{cone_isomorphism, Cone};
use toric_rlct::hilbert::hilbert_basis;
use toric_rlct::lattice::{IntegerMatrix, LatticeVector, Rat};
use toric_rlct::poly::{newton_polytope, parse, toric_ideal_basis, LaurentPolynomial};
use toric_rlct::resolution::{
    is_normal_crossing, parse_script, resolve, suggest_map, ResolutionStep, ResolutionTrace,
    Script,
};
use toric_rlct::rlct::{aggregate, chart_poles, learning_curve, stochastic_complexity_bound, RlctReport};
use toric_rlct::verify::{estimate_free_energy, fit_lambda, QuadratureSpec};
use toric_rlct::{Error, Result};

#[derive(Parser)]
#[command(name = "toric-rlct", about = "Toric resolution toolkit for learning coefficients")]
struct Cli {
    /// Variable order, e.g. --vars a,b1,b2
    #[arg(long, global = true, value_delimiter = ',')]
    vars: Option<Vec<String>>,
    /// Emit JSON (default)
    #[arg(long, global = true)]
    json: bool,
    /// Emit human-readable text instead of JSON
    #[arg(long, global = true)]
    text: bool,
    /// Write output to a file instead of stdout
    #[arg(long, global = true)]
    output: Option<PathBuf>,
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Hilbert basis of a pointed cone (cone JSON file or literal)
    Hilbert { cone: String },
    /// Dual description (rays and lines) of a cone
    Dual { cone: String },
    /// Newton polytope vertices and support cone of a polynomial
    Newton { poly: String },
    /// Initial form of a polynomial for a weight vector
    Initial {
        poly: String,
        /// Comma-separated rational weights, e.g. --weight 1,1/2
        #[arg(long, value_delimiter = ',')]
        weight: Vec<String>,
    },
    /// Binomial generators of the lattice kernel of an exponent matrix
    ToricIdeal { matrix: String },
    /// Run a resolution script and print the full chart trace
    Resolve {
        poly: String,
        #[arg(long)]
        script: PathBuf,
    },
    /// Learning coefficient and multiplicity from a resolved polynomial
    Rlct {
        poly: String,
        #[arg(long)]
        script: Option<PathBuf>,
        /// Parameter-space dimension for the d/2 bound (defaults to #vars)
        #[arg(long)]
        dim: Option<usize>,
    },
    /// Learning-curve and complexity-bound samples from an rlct report
    Curve {
        report: String,
        #[arg(long, value_delimiter = ',')]
        n: Vec<u64>,
    },
    /// Unimodular isomorphism between two cones, if one exists
    ConeIso { first: String, second: String },
    /// Numeric quadrature estimate of the learning coefficient
    Verify {
        poly: String,
        #[arg(long)]
        spec: Option<PathBuf>,
        /// Exact lambda ("3/4") to compare the fit against
        #[arg(long)]
        expected: Option<String>,
        #[arg(long, default_value_t = 0.08)]
        tolerance: f64,
    },
}

fn exit_code(e: &Error) -> u8 {
    match e {
        Error::Parse { .. } | Error::Json(_) | Error::UnknownVariable(_) | Error::Io(_) => 2,
        Error::IncompleteResolution(_)
        | Error::ChartDecomposition { .. }
        | Error::OddPrefactor { .. }
        | Error::JacobianUnavailable
        | Error::NotUnimodular { .. } => 4,
        _ => 3,
    }
}

/// CLI inputs are a file path or an inline literal.
fn read_input(s: &str) -> Result<String> {
    if Path::new(s).is_file() {
        Ok(std::fs::read_to_string(s)?.trim().to_string())
    } else {
        Ok(s.to_string())
    }
}

fn parse_poly(s: &str, vars: &Option<Vec<String>>) -> Result<LaurentPolynomial> {
    let text = read_input(s)?;
    parse(&text, vars.as_deref())
}

fn parse_cone(s: &str) -> Result<Cone> {
    let text = read_input(s)?;
    Ok(serde_json::from_str(&text)?)
}

fn parse_rat(s: &str) -> Result<Rat> {
    s.trim().parse::<Rat>().map_err(|_| Error::Parse {
        position: 0,
        message: format!("invalid rational '{s}'"),
    })
}

fn vec_json(v: &LatticeVector) -> Value {
    Value::Array(v.0.iter().map(|x| json!(x.to_string().parse::<i64>().ok())).collect())
}

fn vecs_json(vs: &[LatticeVector]) -> Value {
    Value::Array(vs.iter().map(vec_json).collect())
}

fn trace_json(t: &ResolutionTrace) -> Value {
    let charts: Vec<Value> = t
        .charts
        .iter()
        .map(|c| {
            json!({
                "vars": c.vars(),
                "prefactor": vec_json(&c.prefactor),
                "jacobian": vec_json(&c.jacobian),
                "jacobian_valid": c.jacobian_valid,
                "unit_factor": c.unit_factor.to_string(),
                "residual": c.current_poly.to_string(),
                "normal_crossing": is_normal_crossing(c).ok,
            })
        })
        .collect();
    json!({ "complete": t.complete, "warnings": t.warnings, "charts": charts })
}

fn run(cli: &Cli) -> Result<String> {
    let text_mode = cli.text && !cli.json;
    match &cli.cmd {
        Cmd::Hilbert { cone } => {
            let c = parse_cone(cone)?;
            let hb = hilbert_basis(&c)?;
            if text_mode {
                Ok(hb
                    .elements
                    .iter()
                    .map(|v| format!("{:?}", v.0.iter().map(|x| x.to_string()).collect::<Vec<_>>()))
                    .collect::<Vec<_>>()
                    .join("\n"))
            } else {
                Ok(json!({
                    "ambient_dim": c.ambient_dim(),
                    "elements": vecs_json(&hb.elements),
                })
                .to_string())
            }
        }
        Cmd::Dual { cone } => {
            let c = parse_cone(cone)?;
            let d = c.dual_description();
            Ok(json!({
                "rays": vecs_json(&d.rays),
                "lines": vecs_json(&d.lines),
            })
            .to_string())
        }
        Cmd::Newton { poly } => {
            let f = parse_poly(poly, &cli.vars)?;
            let np = newton_polytope(&f)?;
            Ok(json!({
                "vertices": vecs_json(&np.vertices),
                "support_cone": serde_json::to_value(&np.support_cone)?,
            })
            .to_string())
        }
        Cmd::Initial { poly, weight } => {
            let f = parse_poly(poly, &cli.vars)?;
            let w: Vec<Rat> = weight.iter().map(|s| parse_rat(s)).collect::<Result<_>>()?;
            let init = f.initial_form(&w)?;
            if text_mode {
                Ok(init.to_string())
            } else {
                Ok(json!({ "initial": init.to_string() }).to_string())
            }
        }
        Cmd::ToricIdeal { matrix } => {
            let text = read_input(matrix)?;
            let rows: Vec<Vec<i64>> = serde_json::from_str(&text)?;
            if rows.is_empty() || rows.iter().any(|r| r.len() != rows[0].len()) {
                return Err(Error::EmptyInput("exponent matrix must be rectangular and nonempty".into()));
            }
            let refs: Vec<&[i64]> = rows.iter().map(|r| r.as_slice()).collect();
            let m = IntegerMatrix::from_i64_rows(&refs);
            let basis = toric_ideal_basis(&m);
            let strings: Vec<String> = basis.iter().map(|b| b.to_string()).collect();
            if text_mode {
                Ok(strings.join("\n"))
            } else {
                Ok(json!({ "binomials": strings }).to_string())
            }
        }
        Cmd::Resolve { poly, script } => {
            let f = parse_poly(poly, &cli.vars)?;
            let s = parse_script(&std::fs::read_to_string(script)?)?;
            let trace = resolve(&f, &s)?;
            Ok(trace_json(&trace).to_string())
        }
        Cmd::Rlct { poly, script, dim } => {
            let f = parse_poly(poly, &cli.vars)?;
            let (trace, note) = resolve_for_rlct(&f, script)?;
            if !trace.complete {
                return Err(Error::IncompleteResolution(format!(
                    "no normal-crossing resolution reached; supply --script. Diagnostics: {}",
                    trace.warnings.join("; ")
                )));
            }
            let spectra: Vec<_> = trace
                .charts
                .iter()
                .map(chart_poles)
                .collect::<Result<_>>()?;
            let d = dim.unwrap_or(f.num_vars());
            let report = aggregate(&spectra)?.with_bound_check(d);
            let mut v = report.to_json();
            if let Some(n) = note {
                v["note"] = json!(n);
            }
            if text_mode {
                Ok(format!(
                    "lambda1 = {}\nm1 = {}{}",
                    report
                        .lambda1
                        .as_ref()
                        .map(|l| l.to_string())
                        .unwrap_or_else(|| "none (no singularity)".into()),
                    report.m1,
                    v.get("note").and_then(Value::as_str).map(|n| format!("\nnote: {n}")).unwrap_or_default(),
                ))
            } else {
                Ok(v.to_string())
            }
        }
        Cmd::Curve { report, n } => {
            let text = read_input(report)?;
            let v: Value = serde_json::from_str(&text)?;
            let r = RlctReport::from_json(&v)?;
            let mut rows = Vec::new();
            for &nv in n {
                let k = learning_curve(&r, nv)?;
                let g = stochastic_complexity_bound(&r, nv)?;
                rows.push(format!("{nv},{k},{g}"));
            }
            Ok(rows.join("\n"))
        }
        Cmd::ConeIso { first, second } => {
            let a = parse_cone(first)?;
            let b = parse_cone(second)?;
            match cone_isomorphism(&a, &b)? {
                Some(m) => {
                    let rows: Vec<Vec<String>> = (0..m.rows)
                        .map(|i| (0..m.cols).map(|j| m[(i, j)].to_string()).collect())
                        .collect();
                    Ok(json!({ "isomorphic": true, "matrix": rows }).to_string())
                }
                None => Ok(json!({ "isomorphic": false }).to_string()),
            }
        }
        Cmd::Verify { poly, spec, expected, tolerance } => {
            let f = parse_poly(poly, &cli.vars)?;
            let q = match spec {
                Some(p) => serde_json::from_str(&std::fs::read_to_string(p)?)?,
                None => QuadratureSpec::default_for_dim(f.num_vars()),
            };
            let points = estimate_free_energy(&f, &q)?;
            // A vanishing Kullback distance has no decay to fit.
            let flat = points.iter().all(|(_, fv)| fv.abs() < 1e-9);
            let (summary, no_singularity) = if flat {
                (None, true)
            } else {
                (Some(fit_lambda(&points)?), false)
            };
            let lambda_hat = summary.as_ref().map(|s| s.lambda_hat).unwrap_or(0.0);
            if let Some(exp) = expected {
                let target = parse_rat(exp)?;
                let target = num_traits::ToPrimitive::to_f64(&target).unwrap();
                if (lambda_hat - target).abs() > *tolerance {
                    eprintln!(
                        "verification mismatch: lambda_hat {lambda_hat} vs expected {target} (tolerance {tolerance})"
                    );
                    std::process::exit(5);
                }
            }
            if text_mode {
                let mut out: Vec<String> =
                    points.iter().map(|(n, fv)| format!("{n},{fv}")).collect();
                out.push(format!(
                    "fit: lambda_hat={lambda_hat} m_hat_minus_1={} residual_rms={}{}",
                    summary.as_ref().map(|s| s.m_hat_minus_1).unwrap_or(0.0),
                    summary.as_ref().map(|s| s.residual_rms).unwrap_or(0.0),
                    if no_singularity { " (no singularity)" } else { "" },
                ));
                Ok(out.join("\n"))
            } else {
                Ok(json!({
                    "points": points.iter().map(|(n, fv)| json!([n, fv])).collect::<Vec<_>>(),
                    "lambda_hat": lambda_hat,
                    "m_hat_minus_1": summary.as_ref().map(|s| s.m_hat_minus_1).unwrap_or(0.0),
                    "residual_rms": summary.as_ref().map(|s| s.residual_rms).unwrap_or(0.0),
                    "no_singularity": no_singularity,
                })
                .to_string())
            }
        }
    }
}

/// Resolve with the given script; without one, try the bare polynomial and
/// then a single support-cone monomial chart from suggest_map.
fn resolve_for_rlct(
    f: &LaurentPolynomial,
    script: &Option<PathBuf>,
) -> Result<(ResolutionTrace, Option<String>)> {
    if let Some(path) = script {
        let s = parse_script(&std::fs::read_to_string(path)?)?;
        let trace = resolve(f, &s)?;
        return Ok((trace, None));
    }
    let empty = Script { steps: vec![], initial_jacobian: BTreeMap::new() };
    match resolve(f, &empty) {
        Ok(t) if t.complete => return Ok((t, None)),
        _ => {}
    }
    if let Some(m) = suggest_map(f)? {
        let new_vars: Vec<String> = (1..=m.cols).map(|i| format!("u{i}")).collect();
        let s = Script {
            steps: vec![ResolutionStep::Monomial { matrix: m, new_vars }],
            initial_jacobian: BTreeMap::new(),
        };
        let trace = resolve(f, &s)?;
        if trace.complete {
            return Ok((
                trace,
                Some(
                    "resolved with an automatically suggested support-cone chart; \
                     chart-based multiplicity can exceed the model's true m1 \
                     (regular quadratic models need a radial chart for m1 = 1)"
                        .into(),
                ),
            ));
        }
        return Ok((trace, None));
    }
    Ok((resolve(f, &empty)?, None))
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(&cli) {
        Ok(out) => {
            if let Some(path) = &cli.output {
                if let Err(e) = std::fs::write(path, format!("{out}\n")) {
                    eprintln!("error: {e}");
                    return ExitCode::from(2);
                }
            } else {
                println!("{out}");
            }
            ExitCode::SUCCESS
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(exit_code(&e))
        }
    }
}
