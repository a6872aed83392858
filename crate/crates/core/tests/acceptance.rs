//! One test per release criterion; each prints a pass line on success
//! (visible with `cargo test -- --nocapture`).

use std::collections::{BTreeMap, BTreeSet, VecDeque};
use std::process::Command;

use num_traits::{One, Signed, ToPrimitive, Zero};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use toric_rlct::cone::{cone_isomorphism, dual_cone, Cone};
use toric_rlct::hilbert::hilbert_basis;
use toric_rlct::lattice::{determinant, rat, IntegerMatrix, LatticeVector, Rat};
use toric_rlct::poly::{
    convex_hull_vertices, newton_polytope, parse, toric_ideal_basis, LaurentPolynomial,
};
use toric_rlct::resolution::{extract_monomial_factor, parse_script, resolve};
use toric_rlct::rlct::{aggregate, chart_poles, RlctReport};

fn bin() -> &'static str {
    env!("CARGO_BIN_EXE_toric-rlct")
}

fn fixture(name: &str) -> String {
    format!("{}/fixtures/{}", env!("CARGO_MANIFEST_DIR"), name)
}

fn run_cli(args: &[&str]) -> (i32, String, String) {
    let out = Command::new(bin()).args(args).output().expect("spawn cli");
    (
        out.status.code().unwrap_or(-1),
        String::from_utf8_lossy(&out.stdout).trim().to_string(),
        String::from_utf8_lossy(&out.stderr).trim().to_string(),
    )
}

fn report_for(poly_fixture: &str, script_fixture: &str, vars: Option<&[&str]>) -> RlctReport {
    let text = std::fs::read_to_string(fixture(poly_fixture)).unwrap();
    let order: Option<Vec<String>> =
        vars.map(|v| v.iter().map(|s| s.to_string()).collect());
    let h = parse(text.trim(), order.as_deref()).unwrap();
    let script = parse_script(&std::fs::read_to_string(fixture(script_fixture)).unwrap()).unwrap();
    let trace = resolve(&h, &script).unwrap();
    assert!(trace.complete, "fixture {poly_fixture} must resolve completely");
    let spectra: Vec<_> = trace.charts.iter().map(|c| chart_poles(c).unwrap()).collect();
    aggregate(&spectra).unwrap()
}

#[test]
fn criterion_01_application_b_end_to_end() {
    let started = std::time::Instant::now();
    let (code, out, err) = run_cli(&[
        "--vars",
        "a,b1,b2",
        "rlct",
        &fixture("app_b_poly.txt"),
        "--script",
        &fixture("app_b_script.json"),
    ]);
    assert_eq!(code, 0, "stderr: {err}");
    let v: serde_json::Value = serde_json::from_str(&out).unwrap();
    assert_eq!(v["lambda1"], "3/4");
    assert_eq!(v["m1"], 1);

    std::fs::write("/tmp/acceptance_app_b_report.json", &out).unwrap();
    let (code, out, _) = run_cli(&[
        "curve",
        "/tmp/acceptance_app_b_report.json",
        "--n",
        "10,100",
    ]);
    assert_eq!(code, 0);
    let rows: Vec<&str> = out.lines().collect();
    assert_eq!(rows.len(), 2);
    assert!(rows[0].starts_with("10,0.075,"), "row {}", rows[0]);
    assert!(rows[1].starts_with("100,0.0075,"), "row {}", rows[1]);
    assert!(started.elapsed().as_secs() < 1);
    println!("criterion 1 (application B end-to-end): pass");
}

#[test]
fn criterion_02_application_a_structural_match() {
    let started = std::time::Instant::now();
    let text = std::fs::read_to_string(fixture("app_a_poly.txt")).unwrap();
    let h = parse(text.trim(), None).unwrap();
    let script =
        parse_script(&std::fs::read_to_string(fixture("app_a_script.json")).unwrap()).unwrap();

    // Stage 1, first map: the substituted polynomial before factoring.
    let (matrix, new_vars) = match &script.steps[0] {
        toric_rlct::resolution::ResolutionStep::Monomial { matrix, new_vars } => {
            (matrix.clone(), new_vars.clone())
        }
        _ => panic!("first step must be monomial"),
    };
    let intermediate = h.substitute_monomial(&matrix, &new_vars).unwrap();
    assert_eq!(
        intermediate.to_string(),
        "u1^2*u2^4 + 2*u1^3*u2^4*u3 + u1^4*u2^4*u3^2 + 3*u1^6*u2^6*u3^4"
    );

    let (k, cofactor) = extract_monomial_factor(&intermediate).unwrap();
    let prefactor = LaurentPolynomial::monomial(new_vars.clone(), k, Rat::one());
    assert_eq!(prefactor.to_string(), "u1^2*u2^4");
    assert_eq!(
        cofactor.to_string(),
        "1 + 2*u1*u3 + u1^2*u3^2 + 3*u1^4*u2^2*u3^4"
    );

    // Stage 1 in full leaves the c1^2 prefactor on the chart.
    let trace = resolve(&h, &script).unwrap();
    let chart = &trace.charts[0];
    assert_eq!(chart.vars(), ["c1", "b1", "d1"]);
    assert_eq!(chart.prefactor, LatticeVector::from_i64(&[2, 0, 0]));

    // Stage 2: fresh coordinates for the residual factor, terminal unit.
    let text2 = std::fs::read_to_string(fixture("app_a_stage2_poly.txt")).unwrap();
    let order: Vec<String> = ["b", "d", "e"].iter().map(|s| s.to_string()).collect();
    let h2 = parse(text2.trim(), Some(&order)).unwrap();
    let script2 =
        parse_script(&std::fs::read_to_string(fixture("app_a_stage2_script.json")).unwrap())
            .unwrap();
    let trace2 = resolve(&h2, &script2).unwrap();
    assert!(trace2.complete);
    let chart2 = &trace2.charts[0];
    assert_eq!(chart2.current_poly.to_string(), "1 + 3*s1^4*s2^10");
    assert_eq!(chart2.prefactor, LatticeVector::from_i64(&[2, 0]));
    let stage2_prefactor = LaurentPolynomial::monomial(
        chart2.vars().to_vec(),
        chart2.prefactor.clone(),
        Rat::one(),
    );
    assert_eq!(stage2_prefactor.to_string(), "s1^2");
    assert!(started.elapsed().as_secs() < 1);
    println!("criterion 2 (application A structural match): pass");
}

#[test]
fn criterion_03_application_b_hilbert_basis() {
    let (code, out, err) = run_cli(&["hilbert", &fixture("app_b_cone.json")]);
    assert_eq!(code, 0, "stderr: {err}");
    let v: serde_json::Value = serde_json::from_str(&out).unwrap();
    assert_eq!(v["elements"], serde_json::json!([[0, 0, 1], [1, 1, 1], [1, 2, 0]]));
    println!("criterion 3 (application B Hilbert basis): pass");
}

fn to_i64_vec(v: &LatticeVector) -> Vec<i64> {
    v.0.iter().map(|x| x.to_i64().unwrap()).collect()
}

fn dot(a: &[i64], b: &[i64]) -> i64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

/// Brute-force Hilbert-basis oracle: enumerate all cone lattice points up to
/// the claimed maximal grading, take the additively irreducible ones, and
/// independently check the claimed basis generates everything enumerated.
fn hilbert_oracle_check(c: &Cone, claimed: &[LatticeVector]) -> bool {
    let n = c.ambient_dim();
    let dd = c.dual_description();
    let rays: Vec<Vec<i64>> = dd.rays.iter().map(to_i64_vec).collect();
    let lines: Vec<Vec<i64>> = dd.lines.iter().map(to_i64_vec).collect();
    let mut w = vec![0i64; n];
    for r in &rays {
        for i in 0..n {
            w[i] += r[i];
        }
    }
    let contains = |x: &[i64]| {
        rays.iter().all(|r| dot(r, x) >= 0) && lines.iter().all(|l| dot(l, x) == 0)
    };
    let gens: Vec<Vec<i64>> = c.generators().iter().map(to_i64_vec).collect();
    let claimed_i: BTreeSet<Vec<i64>> = claimed.iter().map(to_i64_vec).collect();
    let dmax = claimed_i.iter().map(|x| dot(&w, x)).max().unwrap_or(0);
    assert!(gens.iter().all(|g| dot(&w, g) > 0), "grading must be positive");

    // Coordinate bounds: any cone point z with w.z <= dmax is a nonnegative
    // combination of generators, so |z_i| <= dmax * max_g |g_i| / (w.g).
    let mut bounds = vec![0i64; n];
    for i in 0..n {
        let mut b = 0f64;
        for g in &gens {
            b = b.max(dmax as f64 * g[i].abs() as f64 / dot(&w, g) as f64);
        }
        bounds[i] = b.ceil() as i64;
    }
    let volume: f64 = bounds.iter().map(|b| (2 * b + 1) as f64).product();
    if volume > 2.5e6 {
        return false; // enumeration too large; caller resamples
    }

    let mut graded: BTreeSet<Vec<i64>> = BTreeSet::new();
    let mut x = bounds.iter().map(|b| -b).collect::<Vec<i64>>();
    loop {
        let wx = dot(&w, &x);
        if wx > 0 && wx <= dmax && contains(&x) {
            graded.insert(x.clone());
        }
        let mut axis = n;
        for i in (0..n).rev() {
            if x[i] < bounds[i] {
                axis = i;
                break;
            }
            x[i] = -bounds[i];
        }
        if axis == n {
            break;
        }
        x[axis] += 1;
    }

    // Irreducibles: no splitting x = y + (x - y) into nonzero cone points.
    let irreducible: BTreeSet<Vec<i64>> = graded
        .iter()
        .filter(|x| {
            !graded.iter().any(|y| {
                dot(&w, y) < dot(&w, x) && {
                    let diff: Vec<i64> = x.iter().zip(y.iter()).map(|(a, b)| a - b).collect();
                    diff.iter().any(|&d| d != 0) && contains(&diff)
                }
            })
        })
        .cloned()
        .collect();
    assert_eq!(irreducible, claimed_i, "irreducible set mismatch for cone {c:?}");

    // Generation: breadth-first closure of sums of claimed basis elements.
    let mut reachable: BTreeSet<Vec<i64>> = BTreeSet::new();
    let mut queue: VecDeque<Vec<i64>> = VecDeque::new();
    queue.push_back(vec![0; n]);
    while let Some(p) = queue.pop_front() {
        for h in &claimed_i {
            let s: Vec<i64> = p.iter().zip(h.iter()).map(|(a, b)| a + b).collect();
            if dot(&w, &s) <= dmax && reachable.insert(s.clone()) {
                queue.push_back(s);
            }
        }
    }
    for g in &graded {
        assert!(reachable.contains(g), "point {g:?} not generated by claimed basis");
    }
    true
}

#[test]
fn criterion_04_hilbert_basis_oracle_equivalence() {
    let started = std::time::Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(4004);
    let mut checked = 0;
    while checked < 50 {
        let dim = rng.gen_range(2..=4usize);
        let count = rng.gen_range(dim..=dim + 2);
        let gens: Vec<LatticeVector> = (0..count)
            .map(|_| {
                LatticeVector::from_i64(
                    &(0..dim).map(|_| rng.gen_range(-4..=4i64)).collect::<Vec<_>>(),
                )
            })
            .filter(|v| !v.is_zero())
            .collect();
        if gens.is_empty() {
            continue;
        }
        let c = match Cone::new(dim, gens) {
            Ok(c) => c,
            Err(_) => continue,
        };
        if !c.is_pointed() || c.dim() == 0 {
            continue;
        }
        let hb = hilbert_basis(&c).unwrap();
        if hilbert_oracle_check(&c, &hb.elements) {
            checked += 1;
        }
    }
    assert!(started.elapsed().as_secs() < 60);
    println!("criterion 4 (Hilbert basis oracle equivalence, 50 cones): pass");
}

#[test]
fn criterion_05_duality_involution() {
    let mut rng = ChaCha8Rng::seed_from_u64(5005);
    let mut checked = 0;
    while checked < 100 {
        let dim = rng.gen_range(2..=4usize);
        let count = rng.gen_range(dim..=dim + 3);
        let gens: Vec<LatticeVector> = (0..count)
            .map(|_| {
                LatticeVector::from_i64(
                    &(0..dim).map(|_| rng.gen_range(-5..=5i64)).collect::<Vec<_>>(),
                )
            })
            .filter(|v| !v.is_zero())
            .collect();
        if gens.is_empty() {
            continue;
        }
        let c = match Cone::new(dim, gens) {
            Ok(c) => c,
            Err(_) => continue,
        };
        if !c.is_pointed() || c.dim() != dim {
            continue;
        }
        let dd = dual_cone(&dual_cone(&c));
        let a: BTreeSet<_> = c.extreme_rays().into_iter().collect();
        let b: BTreeSet<_> = dd.extreme_rays().into_iter().collect();
        assert_eq!(a, b, "dual-dual mismatch for {c:?}");
        checked += 1;
    }
    println!("criterion 5 (duality involution, 100 cones): pass");
}

fn random_poly(rng: &mut ChaCha8Rng, vars: &[String]) -> LaurentPolynomial {
    let mut terms = BTreeMap::new();
    for _ in 0..rng.gen_range(2..=5usize) {
        let e = LatticeVector::from_i64(
            &(0..vars.len()).map(|_| rng.gen_range(0..=5i64)).collect::<Vec<_>>(),
        );
        let c = rat(rng.gen_range(1..=9), rng.gen_range(1..=4));
        let c = if rng.gen_bool(0.5) { -c } else { c };
        terms.insert(e, c);
    }
    LaurentPolynomial::from_terms(vars.to_vec(), terms)
}

#[test]
fn criterion_06_minkowski_product_law() {
    let mut rng = ChaCha8Rng::seed_from_u64(6006);
    let mut checked = 0;
    while checked < 100 {
        let nv = rng.gen_range(2..=3usize);
        let vars: Vec<String> = (1..=nv).map(|i| format!("x{i}")).collect();
        let f = random_poly(&mut rng, &vars);
        let g = random_poly(&mut rng, &vars);
        if f.is_zero() || g.is_zero() {
            continue;
        }
        let product = f.multiply(&g);
        if product.is_zero() {
            continue;
        }
        let vf = newton_polytope(&f).unwrap().vertices;
        let vg = newton_polytope(&g).unwrap().vertices;
        let mut sums = Vec::new();
        for a in &vf {
            for b in &vg {
                sums.push(a.add(b));
            }
        }
        let expected: BTreeSet<_> = convex_hull_vertices(&sums).into_iter().collect();
        let got: BTreeSet<_> =
            newton_polytope(&product).unwrap().vertices.into_iter().collect();
        assert_eq!(got, expected, "Minkowski law failed for {f} and {g}");
        checked += 1;
    }
    println!("criterion 6 (Minkowski product law, 100 pairs): pass");
}

fn random_unimodular(rng: &mut ChaCha8Rng, n: usize) -> IntegerMatrix {
    loop {
        let mut m = IntegerMatrix::identity(n);
        for _ in 0..rng.gen_range(3..=8usize) {
            let i = rng.gen_range(0..n);
            let mut j = rng.gen_range(0..n);
            while j == i {
                j = rng.gen_range(0..n);
            }
            let s: i64 = if rng.gen_bool(0.5) { 1 } else { -1 };
            for col in 0..n {
                let add = m[(j, col)].clone() * s;
                m[(i, col)] += add;
            }
        }
        let small = (0..n).all(|i| (0..n).all(|j| m[(i, j)].abs().to_i64().unwrap_or(99) <= 6));
        if small {
            return m;
        }
    }
}

/// Determinant of a small matrix of Laurent polynomials by permutation
/// expansion.
fn laurent_det(entries: &[Vec<LaurentPolynomial>], vars: &[String]) -> LaurentPolynomial {
    let n = entries.len();
    let mut total = LaurentPolynomial::zero(vars.to_vec());
    let mut perm: Vec<usize> = (0..n).collect();
    loop {
        let mut sign = 1i64;
        for i in 0..n {
            for j in i + 1..n {
                if perm[i] > perm[j] {
                    sign = -sign;
                }
            }
        }
        let mut term = LaurentPolynomial::constant(vars.to_vec(), rat(sign, 1));
        for (i, &p) in perm.iter().enumerate() {
            term = term.multiply(&entries[i][p]);
        }
        total = total.add(&term);
        // next permutation in lexicographic order
        let mut k = n as i64 - 2;
        while k >= 0 && perm[k as usize] >= perm[k as usize + 1] {
            k -= 1;
        }
        if k < 0 {
            break;
        }
        let k = k as usize;
        let mut l = n - 1;
        while perm[l] <= perm[k] {
            l -= 1;
        }
        perm.swap(k, l);
        perm[k + 1..].reverse();
    }
    total
}

#[test]
fn criterion_07_jacobian_formula() {
    let mut rng = ChaCha8Rng::seed_from_u64(7007);
    for _ in 0..50 {
        let n = rng.gen_range(2..=4usize);
        let a = random_unimodular(&mut rng, n);
        let vars: Vec<String> = (1..=n).map(|i| format!("u{i}")).collect();
        // x_j = prod_i u_i^(a[i][j]); d x_j / d u_i = a[i][j] * u^(col_j - e_i)
        let mut entries = vec![vec![LaurentPolynomial::zero(vars.clone()); n]; n];
        for j in 0..n {
            let col = a.col(j);
            for i in 0..n {
                let mut e = col.clone();
                e.0[i] -= 1;
                let coeff = Rat::from_integer(a[(i, j)].clone());
                if !coeff.is_zero() {
                    entries[i][j] = LaurentPolynomial::monomial(vars.clone(), e, coeff);
                }
            }
        }
        let symbolic = laurent_det(&entries, &vars);

        let det = determinant(&a).unwrap();
        let rowsum_minus_1 = LatticeVector::new(
            (0..n)
                .map(|i| (0..n).fold(num_bigint::BigInt::from(-1), |s, j| s + &a[(i, j)]))
                .collect(),
        );
        let closed_form = LaurentPolynomial::monomial(
            vars.clone(),
            rowsum_minus_1,
            Rat::from_integer(det),
        );
        assert_eq!(symbolic, closed_form, "Jacobian mismatch for {a:?}");
    }
    println!("criterion 7 (Jacobian closed form, 50 maps): pass");
}

#[test]
fn criterion_08_regular_model_fixture() {
    for d in 1..=5usize {
        let report = report_for(
            "regular_model_poly.txt",
            &format!("regular_model_d{d}_script.json"),
            None,
        );
        assert_eq!(report.lambda1, Some(rat(d as i64, 2)), "d = {d}");
        assert_eq!(report.m1, 1, "d = {d}");
    }
    println!("criterion 8 (regular model radial chart, d = 1..5): pass");
}

#[test]
fn criterion_09_half_dimension_bound_on_fixtures() {
    // (poly fixture, script fixture, vars, parameter dimension d)
    let cases: [(&str, &str, Option<&[&str]>, usize); 9] = [
        ("app_b_poly.txt", "app_b_script.json", Some(&["a", "b1", "b2"]), 3),
        ("app_c_k1n1m1_poly.txt", "app_c_k1n1m1_script.json", None, 1),
        ("app_c_k2n2m1_poly.txt", "app_c_k2n2m1_script.json", None, 4),
        ("app_c_k2n1m2_poly.txt", "app_c_k2n1m2_script.json", None, 2),
        ("regular_model_poly.txt", "regular_model_d1_script.json", None, 1),
        ("regular_model_poly.txt", "regular_model_d2_script.json", None, 2),
        ("regular_model_poly.txt", "regular_model_d3_script.json", None, 3),
        ("regular_model_poly.txt", "regular_model_d4_script.json", None, 4),
        ("regular_model_poly.txt", "regular_model_d5_script.json", None, 5),
    ];
    for (poly, script, vars, d) in cases {
        let report = report_for(poly, script, vars).with_bound_check(d);
        assert_eq!(report.bound_d_over_2, Some(true), "gate fired on {poly} with {script}");
    }
    println!("criterion 9 (lambda1 <= d/2 on all fixtures): pass");
}

#[test]
fn criterion_10_application_c_bound() {
    // (K, N, M, poly fixture, script fixture)
    let cases = [
        (1i64, 1i64, 1i64, "app_c_k1n1m1_poly.txt", "app_c_k1n1m1_script.json"),
        (2, 2, 1, "app_c_k2n2m1_poly.txt", "app_c_k2n2m1_script.json"),
        (2, 1, 2, "app_c_k2n1m2_poly.txt", "app_c_k2n1m2_script.json"),
    ];
    for (k, n, m, poly, script) in cases {
        let report = report_for(poly, script, None);
        let lambda = report.lambda1.clone().unwrap();
        let bound = rat(k, 2) * Rat::from_integer(n.min(m + 1).into());
        assert!(
            lambda <= bound,
            "(K,N,M)=({k},{n},{m}): lambda {lambda} exceeds bound {bound}"
        );
        // The projective chart realizes lambda = KN/2.
        assert_eq!(lambda, rat(k * n, 2));
        assert_eq!(report.m1, 1);
    }
    println!("criterion 10 (application C projective-chart bound): pass");
}

#[test]
fn criterion_11_numeric_oracle_agreement() {
    let started = std::time::Instant::now();
    let (code, out, err) = run_cli(&[
        "verify",
        "u1^2*u2^4",
        "--spec",
        &fixture("verify_spec_2d.json"),
        "--expected",
        "1/4",
        "--tolerance",
        "0.05",
    ]);
    assert_eq!(code, 0, "2d verify failed: {err}");
    let v: serde_json::Value = serde_json::from_str(&out).unwrap();
    let lambda_hat = v["lambda_hat"].as_f64().unwrap();
    assert!((lambda_hat - 0.25).abs() <= 0.05, "lambda_hat {lambda_hat}");
    assert!(started.elapsed().as_secs() < 60);

    let started = std::time::Instant::now();
    let (code, out, err) = run_cli(&[
        "--vars",
        "a,b1,b2",
        "verify",
        &fixture("app_b_poly.txt"),
        "--spec",
        &fixture("verify_spec_3d.json"),
        "--expected",
        "3/4",
        "--tolerance",
        "0.08",
    ]);
    assert_eq!(code, 0, "3d verify failed: {err}");
    let v: serde_json::Value = serde_json::from_str(&out).unwrap();
    let lambda_hat = v["lambda_hat"].as_f64().unwrap();
    assert!((lambda_hat - 0.75).abs() <= 0.08, "lambda_hat {lambda_hat}");
    assert!(started.elapsed().as_secs() < 60);
    println!("criterion 11 (numeric oracle agreement): pass");
}

#[test]
fn criterion_12_toric_ideal_kernel() {
    let m = IntegerMatrix::from_i64_rows(&[&[2, 1, 0], &[0, 1, 2]]);
    let basis = toric_ideal_basis(&m);
    let strings: Vec<String> = basis.iter().map(|b| b.to_string()).collect();
    assert_eq!(strings, ["-t2^2 + t1*t3"]);

    let m = IntegerMatrix::from_i64_rows(&[&[1, 1]]);
    let basis = toric_ideal_basis(&m);
    let strings: Vec<String> = basis.iter().map(|b| b.to_string()).collect();
    assert_eq!(strings, ["-t2 + t1"]);
    println!("criterion 12 (toric ideal kernel binomials): pass");
}

#[test]
fn criterion_13_cone_isomorphism() {
    let c1 = Cone::from_i64(2, &[&[1, 0], &[0, 1]]);
    let c2 = Cone::from_i64(2, &[&[1, 0], &[1, 1]]);
    let witness = cone_isomorphism(&c1, &c2).unwrap().expect("must be isomorphic");
    let det = determinant(&witness).unwrap();
    assert!(det.abs().is_one(), "witness determinant {det}");
    let images: BTreeSet<LatticeVector> = c1
        .extreme_rays()
        .iter()
        .map(|r| witness.mul_vec(r).primitive().unwrap())
        .collect();
    let targets: BTreeSet<LatticeVector> = c2.extreme_rays().into_iter().collect();
    assert_eq!(images, targets);

    let c3 = Cone::from_i64(2, &[&[0, 1], &[2, -1]]);
    assert!(cone_isomorphism(&c1, &c3).unwrap().is_none());
    println!("criterion 13 (cone isomorphism witness and refusal): pass");
}
