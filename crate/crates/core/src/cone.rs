//! Rational polyhedral cones: construction, dual cones via the double
//! description method, pointedness/regularity tests, fans, and unimodular
//! cone isomorphism.

use crate::error::{Error, Result};
use crate::lattice::{
    determinant, integer_kernel, inverse_rational, rank,
    saturate_and_extend, smith_invariant_factors, IntegerMatrix, LatticeVector, Rat,
};
use num_traits::{One, Signed, Zero};
use once_cell::sync::OnceCell;
use serde::de::Error as _;
use serde::{Deserialize, Deserializer, Serialize, Serializer};
use std::collections::BTreeSet;
use std::fmt;

/// A finitely generated rational polyhedral cone, stored by primitive,
/// deduplicated, lexicographically sorted generators. The cone `{0}` is
/// represented by an empty generator list.
pub struct Cone {
    ambient_dim: usize,
    generators: Vec<LatticeVector>,
    dual: OnceCell<DualDescription>,
}

/// Extreme rays and lineality basis of a cone computed by double description.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct DualDescription {
    pub rays: Vec<LatticeVector>,
    pub lines: Vec<LatticeVector>,
}

impl Clone for Cone {
    fn clone(&self) -> Self {
        Cone {
            ambient_dim: self.ambient_dim,
            generators: self.generators.clone(),
            dual: OnceCell::new(),
        }
    }
}

impl PartialEq for Cone {
    fn eq(&self, other: &Self) -> bool {
        self.ambient_dim == other.ambient_dim && self.generators == other.generators
    }
}
impl Eq for Cone {}

impl fmt::Debug for Cone {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Con{:?} in Z^{}", self.generators, self.ambient_dim)
    }
}

impl Cone {
    pub fn new(ambient_dim: usize, generators: Vec<LatticeVector>) -> Result<Cone> {
        let mut gens = Vec::new();
        for g in generators {
            if g.dim() != ambient_dim {
                return Err(Error::DimensionMismatch {
                    expected: ambient_dim,
                    got: g.dim(),
                });
            }
            gens.push(g.primitive()?);
        }
        gens.sort();
        gens.dedup();
        Ok(Cone {
            ambient_dim,
            generators: gens,
            dual: OnceCell::new(),
        })
    }

    pub fn from_i64(ambient_dim: usize, generators: &[&[i64]]) -> Cone {
        Cone::new(
            ambient_dim,
            generators.iter().map(|g| LatticeVector::from_i64(g)).collect(),
        )
        .expect("invalid cone literal")
    }

    pub fn orthant(n: usize) -> Cone {
        Cone::new(n, (0..n).map(|i| LatticeVector::unit(n, i)).collect()).unwrap()
    }

    pub fn ambient_dim(&self) -> usize {
        self.ambient_dim
    }

    pub fn generators(&self) -> &[LatticeVector] {
        &self.generators
    }

    /// Facet normals (rays) and lineality basis (lines) of the dual cone,
    /// computed once and cached.
    pub fn dual_description(&self) -> &DualDescription {
        self.dual.get_or_init(|| {
            let (rays, lines) = halfspace_solution(self.ambient_dim, &self.generators);
            DualDescription { rays, lines }
        })
    }

    /// Exact membership of a lattice point via the H-representation.
    pub fn contains(&self, v: &LatticeVector) -> bool {
        assert_eq!(v.dim(), self.ambient_dim);
        let dd = self.dual_description();
        dd.rays.iter().all(|r| !r.dot(v).is_negative())
            && dd.lines.iter().all(|l| l.dot(v).is_zero())
    }

    /// Membership of a rational point (used for Newton-polytope vertex tests).
    pub fn contains_rational(&self, v: &[Rat]) -> bool {
        assert_eq!(v.len(), self.ambient_dim);
        let pair = |n: &LatticeVector| -> Rat {
            n.0.iter()
                .zip(v)
                .map(|(a, b)| Rat::from(a.clone()) * b)
                .sum()
        };
        let dd = self.dual_description();
        dd.rays.iter().all(|r| !pair(r).is_negative())
            && dd.lines.iter().all(|l| pair(l).is_zero())
    }

    /// True iff the cone contains no line.
    pub fn is_pointed(&self) -> bool {
        let dd = self.dual_description();
        let mut rows = dd.rays.clone();
        rows.extend(dd.lines.clone());
        if rows.is_empty() {
            return self.ambient_dim == 0;
        }
        rank(&IntegerMatrix::from_rows(rows)) == self.ambient_dim
    }

    /// Dimension of the linear span of the cone.
    pub fn dim(&self) -> usize {
        if self.generators.is_empty() {
            return 0;
        }
        rank(&IntegerMatrix::from_rows(self.generators.clone()))
    }

    /// Extreme rays of a pointed cone: the generator list pruned of every
    /// ray lying in the cone of the others.
    pub fn extreme_rays(&self) -> Vec<LatticeVector> {
        let mut kept = self.generators.clone();
        let mut i = 0;
        while i < kept.len() {
            let mut others = kept.clone();
            let g = others.remove(i);
            let sub = Cone::new(self.ambient_dim, others).unwrap();
            if sub.contains(&g) {
                kept.remove(i);
            } else {
                i += 1;
            }
        }
        kept
    }

    /// True iff the cone is simplicial and its extreme rays extend to a
    /// lattice basis (all Smith invariant factors 1).
    pub fn is_regular(&self) -> Result<bool> {
        if !self.is_pointed() {
            return Err(Error::NotPointed);
        }
        let rays = self.extreme_rays();
        if rays.is_empty() {
            return Ok(true); // the zero cone's chart is a torus point
        }
        let m = IntegerMatrix::from_rows(rays.clone());
        let factors = smith_invariant_factors(&m);
        Ok(factors.len() == rays.len() && factors.iter().all(|f| f.is_one()))
    }
}

/// The dual cone `{y : <y,x> >= 0 for all x in c}`, presented by generators
/// (extreme rays plus +/- a lineality basis when c is not full-dimensional).
pub fn dual_cone(c: &Cone) -> Cone {
    let dd = c.dual_description();
    let mut gens = dd.rays.clone();
    for l in &dd.lines {
        gens.push(l.clone());
        gens.push(l.neg());
    }
    Cone::new(c.ambient_dim(), gens).unwrap()
}

pub fn is_pointed(c: &Cone) -> bool {
    c.is_pointed()
}

pub fn is_regular(c: &Cone) -> Result<bool> {
    c.is_regular()
}

/// Solve `{x : <a,x> >= 0 for all a in constraints}` by incremental double
/// description, returning (extreme rays, lineality basis).
fn halfspace_solution(
    dim: usize,
    constraints: &[LatticeVector],
) -> (Vec<LatticeVector>, Vec<LatticeVector>) {
    let mut lines: Vec<LatticeVector> = (0..dim).map(|i| LatticeVector::unit(dim, i)).collect();
    let mut rays: Vec<LatticeVector> = Vec::new();
    let mut processed: Vec<LatticeVector> = Vec::new();

    for a in constraints {
        if a.is_zero() {
            continue;
        }
        if let Some(idx) = lines.iter().position(|l| !l.dot(a).is_zero()) {
            // A line pairs nonzero: it leaves the lineality space and becomes
            // a ray, after being used to zero the pairing of everything else.
            let mut pivot = lines.remove(idx);
            if pivot.dot(a).is_negative() {
                pivot = pivot.neg();
            }
            let pa = pivot.dot(a);
            for l in lines.iter_mut() {
                let la = l.dot(a);
                if !la.is_zero() {
                    *l = l.scale(&pa).sub(&pivot.scale(&la)).primitive().unwrap();
                }
            }
            for r in rays.iter_mut() {
                let ra = r.dot(a);
                if !ra.is_zero() {
                    *r = r.scale(&pa).sub(&pivot.scale(&ra)).primitive().unwrap();
                }
            }
            rays.push(pivot);
        } else {
            let mut pos = Vec::new();
            let mut zero = Vec::new();
            let mut neg = Vec::new();
            for r in rays.drain(..) {
                let d = r.dot(a);
                if d.is_zero() {
                    zero.push(r);
                } else if d.is_positive() {
                    pos.push(r);
                } else {
                    neg.push(r);
                }
            }
            let tight = |r: &LatticeVector| -> BTreeSet<usize> {
                processed
                    .iter()
                    .enumerate()
                    .filter(|(_, c)| c.dot(r).is_zero())
                    .map(|(i, _)| i)
                    .collect()
            };
            let mut new_rays = Vec::new();
            for p in &pos {
                let zp = tight(p);
                for n in &neg {
                    let common: BTreeSet<usize> = zp.intersection(&tight(n)).cloned().collect();
                    // Combinatorial adjacency: no third ray is tight on all
                    // constraints tight at both p and n.
                    let adjacent = pos
                        .iter()
                        .chain(&neg)
                        .chain(&zero)
                        .filter(|r| *r != p && *r != n)
                        .all(|r| !common.is_subset(&tight(r)));
                    if adjacent {
                        let combo = n.scale(&p.dot(a)).sub(&p.scale(&n.dot(a)));
                        new_rays.push(combo.primitive().unwrap());
                    }
                }
            }
            rays = pos;
            rays.extend(zero);
            rays.extend(new_rays);
        }
        rays.sort();
        rays.dedup();
        processed.push(a.clone());
    }
    rays.sort();
    lines.sort();
    (rays, lines)
}

/// Cone cut out by explicit inequality normals (used for intersections).
pub fn cone_from_halfspaces(dim: usize, normals: &[LatticeVector]) -> Cone {
    let (rays, lines) = halfspace_solution(dim, normals);
    let mut gens = rays;
    for l in lines {
        gens.push(l.neg());
        gens.push(l);
    }
    Cone::new(dim, gens).unwrap()
}

/// Intersection of two cones via their H-representations.
pub fn intersect(a: &Cone, b: &Cone) -> Cone {
    assert_eq!(a.ambient_dim(), b.ambient_dim());
    let mut normals = Vec::new();
    for c in [a, b] {
        let dd = c.dual_description();
        normals.extend(dd.rays.iter().cloned());
        for l in &dd.lines {
            normals.push(l.clone());
            normals.push(l.neg());
        }
    }
    cone_from_halfspaces(a.ambient_dim(), &normals)
}

/// Is `face` a face of the pointed cone `c`? Uses the supporting functional
/// w = sum of the dual generators vanishing on `face`; `face` is a face iff
/// it equals the minimal face `c ∩ {w = 0}` containing it.
pub fn is_face_of(c: &Cone, face: &Cone) -> bool {
    if !face.generators().iter().all(|g| c.contains(g)) {
        return false;
    }
    let dd = c.dual_description();
    let mut normals = dd.rays.clone();
    for l in &dd.lines {
        normals.push(l.clone());
        normals.push(l.neg());
    }
    let vanishing: Vec<&LatticeVector> = normals
        .iter()
        .filter(|n| face.generators().iter().all(|g| n.dot(g).is_zero()))
        .collect();
    let mut w = LatticeVector::zeros(c.ambient_dim());
    for n in vanishing {
        w = w.add(n);
    }
    // Minimal face containing `face` is spanned by the extreme rays of c
    // killed by w; all of them must already lie in `face`.
    c.extreme_rays()
        .iter()
        .filter(|r| w.dot(r).is_zero())
        .all(|r| face.contains(r))
}

/// A collection of cones sharing an ambient dimension.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Fan {
    pub cones: Vec<Cone>,
}

#[derive(Clone, Debug, Serialize)]
pub struct FanReport {
    pub valid: bool,
    /// Indices of the first offending cone pair, if any.
    pub offending: Option<(usize, usize)>,
    pub message: String,
}

/// Check that all member cones are pointed and every pairwise intersection
/// is a face of both cones.
pub fn fan_validate(f: &Fan) -> FanReport {
    if f.cones.is_empty() {
        return FanReport {
            valid: true,
            offending: None,
            message: "empty fan".into(),
        };
    }
    let dim = f.cones[0].ambient_dim();
    for (i, c) in f.cones.iter().enumerate() {
        if c.ambient_dim() != dim {
            return FanReport {
                valid: false,
                offending: Some((0, i)),
                message: format!("cone {i} has mismatched ambient dimension"),
            };
        }
        if !c.is_pointed() {
            return FanReport {
                valid: false,
                offending: Some((i, i)),
                message: format!("cone {i} is not pointed"),
            };
        }
    }
    for i in 0..f.cones.len() {
        for j in i + 1..f.cones.len() {
            let meet = intersect(&f.cones[i], &f.cones[j]);
            if !is_face_of(&f.cones[i], &meet) {
                return FanReport {
                    valid: false,
                    offending: Some((i, j)),
                    message: format!(
                        "intersection of cones {i} and {j} is not a face of cone {i}"
                    ),
                };
            }
            if !is_face_of(&f.cones[j], &meet) {
                return FanReport {
                    valid: false,
                    offending: Some((i, j)),
                    message: format!(
                        "intersection of cones {i} and {j} is not a face of cone {j}"
                    ),
                };
            }
        }
    }
    FanReport {
        valid: true,
        offending: None,
        message: format!("{} cones, all pairwise intersections are faces", f.cones.len()),
    }
}

/// Search for a unimodular L with L(c1) = c2 (extreme rays mapped onto
/// extreme rays). Lower-dimensional cones are first projected to their
/// saturated linear spans.
pub fn cone_isomorphism(c1: &Cone, c2: &Cone) -> Result<Option<IntegerMatrix>> {
    if c1.ambient_dim() != c2.ambient_dim() {
        return Err(Error::DimensionMismatch {
            expected: c1.ambient_dim(),
            got: c2.ambient_dim(),
        });
    }
    if !c1.is_pointed() || !c2.is_pointed() {
        return Err(Error::NotPointed);
    }
    let n = c1.ambient_dim();
    let (d1, d2) = (c1.dim(), c2.dim());
    if d1 != d2 {
        return Ok(None);
    }
    if d1 < n {
        // Project both cones onto saturated span coordinates, solve there,
        // and lift the witness by acting as the identity on the complements.
        let (p1, u1) = span_projection(c1);
        let (p2, u2) = span_projection(c2);
        let Some(lk) = cone_isomorphism(&p1, &p2)? else {
            return Ok(None);
        };
        // L = U2^{-1} * diag(Lk, I) * U1
        let mut block = IntegerMatrix::identity(n);
        for i in 0..d1 {
            for j in 0..d1 {
                block[(i, j)] = lk[(i, j)].clone();
            }
        }
        let u2_inv = integer_inverse(&u2).expect("unimodular basis matrix");
        let l = u2_inv.mul(&block.mul(&u1));
        return Ok(Some(l));
    }
    let rays1 = c1.extreme_rays();
    let rays2 = c2.extreme_rays();
    if rays1.len() != rays2.len() {
        return Ok(None);
    }
    // Pick n linearly independent rays of c1 as the solving basis.
    let mut basis_idx: Vec<usize> = Vec::new();
    for (i, r) in rays1.iter().enumerate() {
        let mut trial: Vec<LatticeVector> = basis_idx.iter().map(|&k| rays1[k].clone()).collect();
        trial.push(r.clone());
        if rank(&IntegerMatrix::from_rows(trial)) == basis_idx.len() + 1 {
            basis_idx.push(i);
        }
        if basis_idx.len() == n {
            break;
        }
    }
    assert_eq!(basis_idx.len(), n, "full-dimensional cone must contain n independent rays");
    let b = IntegerMatrix::from_cols(basis_idx.iter().map(|&k| rays1[k].clone()).collect());
    let b_inv = inverse_rational(&b).expect("independent columns");
    let ray_set2: BTreeSet<LatticeVector> = rays2.iter().cloned().collect();

    let mut assignment = vec![0usize; n];
    let mut used = vec![false; rays2.len()];
    fn search(
        pos: usize,
        n: usize,
        rays1: &[LatticeVector],
        rays2: &[LatticeVector],
        b_inv: &[Vec<Rat>],
        ray_set2: &BTreeSet<LatticeVector>,
        assignment: &mut [usize],
        used: &mut [bool],
    ) -> Option<IntegerMatrix> {
        if pos == n {
            let t = IntegerMatrix::from_cols(
                assignment.iter().map(|&k| rays2[k].clone()).collect(),
            );
            // L = T * B^{-1}; must be integral with |det| = 1.
            let mut l = IntegerMatrix::zeros(n, n);
            for i in 0..n {
                for j in 0..n {
                    let mut s = Rat::zero();
                    for k in 0..n {
                        s += Rat::from(t[(i, k)].clone()) * &b_inv[k][j];
                    }
                    if !s.is_integer() {
                        return None;
                    }
                    l[(i, j)] = s.to_integer();
                }
            }
            if !determinant(&l).unwrap().abs().is_one() {
                return None;
            }
            let image: BTreeSet<LatticeVector> = rays1
                .iter()
                .map(|r| l.mul_vec(r).primitive().unwrap())
                .collect();
            if &image == ray_set2 {
                return Some(l);
            }
            return None;
        }
        for k in 0..rays2.len() {
            if used[k] {
                continue;
            }
            used[k] = true;
            assignment[pos] = k;
            let hit = search(pos + 1, n, rays1, rays2, b_inv, ray_set2, assignment, used);
            used[k] = false;
            if hit.is_some() {
                return hit;
            }
        }
        None
    }
    Ok(search(
        0,
        n,
        &rays1,
        &rays2,
        &b_inv,
        &ray_set2,
        &mut assignment,
        &mut used,
    ))
}

/// Project a lower-dimensional cone into Z^d coordinates on its saturated
/// span. Returns (projected cone, the unimodular row-basis matrix U whose
/// first d rows span the saturation).
pub(crate) fn span_projection(c: &Cone) -> (Cone, IntegerMatrix) {
    let n = c.ambient_dim();
    let d = c.dim();
    let gens = IntegerMatrix::from_rows(c.generators().to_vec());
    let perp = integer_kernel(&gens);
    let span_basis = if perp.is_empty() {
        (0..n).map(|i| LatticeVector::unit(n, i)).collect()
    } else {
        integer_kernel(&IntegerMatrix::from_rows(perp))
    };
    let u = saturate_and_extend(&IntegerMatrix::from_rows(span_basis));
    let u_inv = integer_inverse(&u).expect("unimodular basis matrix");
    // Coordinates of x in the U-basis are rows of U^{-T} applied... x = U^T c
    // with c = (U^T)^{-1} x = (U^{-1})^T x.
    let coord = u_inv.transpose();
    let projected: Vec<LatticeVector> = c
        .generators()
        .iter()
        .map(|g| {
            let full = coord.mul_vec(g);
            debug_assert!(full.0[d..].iter().all(|e| e.is_zero()));
            LatticeVector(full.0[..d].to_vec())
        })
        .collect();
    (Cone::new(d, projected).unwrap(), u)
}

/// Exact integral inverse of a unimodular matrix.
pub fn integer_inverse(a: &IntegerMatrix) -> Option<IntegerMatrix> {
    let inv = inverse_rational(a)?;
    let n = a.rows;
    let mut m = IntegerMatrix::zeros(n, n);
    for i in 0..n {
        for j in 0..n {
            if !inv[i][j].is_integer() {
                return None;
            }
            m[(i, j)] = inv[i][j].to_integer();
        }
    }
    Some(m)
}

/// Monomial generators of the chart coordinate ring R_sigma: the minimal
/// generating set of dual_cone(c) ∩ Z^n. When c is lower-dimensional the
/// dual has lineality and the result includes +/- a lineality lattice basis.
pub fn chart_ring_generators(c: &Cone) -> Result<Vec<LatticeVector>> {
    if !c.is_pointed() {
        return Err(Error::NotPointed);
    }
    let n = c.ambient_dim();
    let dd = c.dual_description();
    if dd.lines.is_empty() {
        let hb = crate::hilbert::hilbert_basis(&dual_cone(c))?;
        return Ok(hb.elements);
    }
    // Saturated lineality lattice of the dual: the integer kernel of the
    // generator matrix of c.
    let gens = IntegerMatrix::from_rows(c.generators().to_vec());
    let lin_basis = if c.generators().is_empty() {
        (0..n).map(|i| LatticeVector::unit(n, i)).collect::<Vec<_>>()
    } else {
        integer_kernel(&gens)
    };
    let k = lin_basis.len();
    let u = saturate_and_extend(&IntegerMatrix::from_rows(lin_basis.clone()));
    let u_inv = integer_inverse(&u).expect("unimodular basis matrix");
    let coord = u_inv.transpose(); // x -> coefficients over the rows of u
    let quotient_dim = n - k;
    let mut out: Vec<LatticeVector> = Vec::new();
    if quotient_dim > 0 {
        let projected: Vec<LatticeVector> = dd
            .rays
            .iter()
            .map(|r| {
                let full = coord.mul_vec(r);
                LatticeVector(full.0[k..].to_vec())
            })
            .filter(|v| !v.is_zero())
            .collect();
        let image = Cone::new(quotient_dim, projected)?;
        let hb = crate::hilbert::hilbert_basis(&image)?;
        for e in hb.elements {
            // Lift through the complement rows of u; any integral lift lies
            // in the dual because the dual contains its whole lineality space.
            let mut lift = LatticeVector::zeros(n);
            for (j, coeff) in e.0.iter().enumerate() {
                lift = lift.add(&u.row(k + j).scale(coeff));
            }
            out.push(lift);
        }
    }
    for l in &lin_basis {
        out.push(l.clone());
        out.push(l.neg());
    }
    out.sort();
    out.dedup();
    Ok(out)
}

// ---- JSON wire format ----------------------------------------------------

impl Serialize for Cone {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        use serde::ser::Error as _;
        use serde::ser::SerializeStruct;
        let mut gens: Vec<Vec<i64>> = Vec::new();
        for g in &self.generators {
            let mut row = Vec::new();
            for e in &g.0 {
                row.push(
                    i64::try_from(e.clone())
                        .map_err(|_| S::Error::custom("cone generator exceeds i64"))?,
                );
            }
            gens.push(row);
        }
        let mut st = s.serialize_struct("Cone", 2)?;
        st.serialize_field("ambient_dim", &self.ambient_dim)?;
        st.serialize_field("generators", &gens)?;
        st.end()
    }
}

impl<'de> Deserialize<'de> for Cone {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        #[derive(Deserialize)]
        struct Wire {
            ambient_dim: usize,
            generators: Vec<Vec<i64>>,
        }
        let w = Wire::deserialize(d)?;
        let gens = w
            .generators
            .iter()
            .map(|g| LatticeVector::from_i64(g))
            .collect();
        Cone::new(w.ambient_dim, gens).map_err(|e| D::Error::custom(e.to_string()))
    }
}

impl Serialize for Fan {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        use serde::ser::SerializeStruct;
        let mut st = s.serialize_struct("Fan", 1)?;
        st.serialize_field("cones", &self.cones)?;
        st.end()
    }
}

impl<'de> Deserialize<'de> for Fan {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        #[derive(Deserialize)]
        struct Wire {
            cones: Vec<Cone>,
        }
        Ok(Fan { cones: Wire::deserialize(d)?.cones })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lattice::Int;

    fn lv(v: &[i64]) -> LatticeVector {
        LatticeVector::from_i64(v)
    }

    #[test]
    fn dual_orthant_self_dual() {
        let c = Cone::orthant(2);
        assert_eq!(dual_cone(&c), c);
    }

    #[test]
    fn dual_a1_cone() {
        let c = Cone::from_i64(2, &[&[0, 1], &[2, -1]]);
        let d = dual_cone(&c);
        assert_eq!(d.generators(), &[lv(&[1, 0]), lv(&[1, 2])]);
    }

    #[test]
    fn dual_support_cone_3d() {
        // Support cone of the two-layer perceptron Kullback polynomial.
        let c = Cone::from_i64(3, &[&[2, 2, 0], &[1, 1, 1], &[0, 0, 2], &[2, 4, 0]]);
        let d = dual_cone(&c);
        let expect = Cone::from_i64(3, &[&[-1, 1, 0], &[2, -1, 0], &[0, 0, 1]]);
        assert_eq!(d, expect);
    }

    #[test]
    fn dual_pairings_nonnegative() {
        let c = Cone::from_i64(3, &[&[1, 2, 0], &[0, 1, 3], &[2, 0, 1]]);
        let d = dual_cone(&c);
        for g in c.generators() {
            for h in d.generators() {
                assert!(!g.dot(h).is_negative());
            }
        }
    }

    #[test]
    fn pointedness() {
        assert!(Cone::orthant(2).is_pointed());
        assert!(!Cone::from_i64(1, &[&[1], &[-1]]).is_pointed());
        assert!(Cone::from_i64(3, &[&[0, 0, 2], &[1, 2, 0], &[1, 1, 1]]).is_pointed());
    }

    #[test]
    fn regularity() {
        assert!(Cone::orthant(2).is_regular().unwrap());
        assert!(!Cone::from_i64(2, &[&[0, 1], &[2, -1]]).is_regular().unwrap());
        assert!(Cone::from_i64(3, &[&[0, 0, 1], &[1, 1, 1], &[1, 2, 0]])
            .is_regular()
            .unwrap());
        assert!(Cone::from_i64(1, &[&[1], &[-1]]).is_regular().is_err());
    }

    #[test]
    fn extreme_ray_pruning() {
        let c = Cone::from_i64(2, &[&[1, 0], &[1, 1], &[0, 1]]);
        assert_eq!(c.extreme_rays(), vec![lv(&[0, 1]), lv(&[1, 0])]);
        let c = Cone::from_i64(3, &[&[2, 2, 0], &[1, 1, 1], &[0, 0, 2], &[2, 4, 0]]);
        assert_eq!(
            c.extreme_rays(),
            vec![lv(&[0, 0, 1]), lv(&[1, 1, 0]), lv(&[1, 2, 0])]
        );
    }

    #[test]
    fn membership_h_v_consistency() {
        use rand::{Rng, SeedableRng};
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(3);
        for _ in 0..40 {
            let dim = rng.gen_range(2..=4);
            let gens: Vec<LatticeVector> = (0..rng.gen_range(2..=5))
                .map(|_| {
                    LatticeVector((0..dim).map(|_| Int::from(rng.gen_range(-4..=4i64))).collect())
                })
                .filter(|v: &LatticeVector| !v.is_zero())
                .collect();
            if gens.is_empty() {
                continue;
            }
            let c = Cone::new(dim, gens.clone()).unwrap();
            // Random nonnegative combinations must be members.
            for _ in 0..5 {
                let mut p = LatticeVector::zeros(dim);
                for g in &gens {
                    p = p.add(&g.scale(&Int::from(rng.gen_range(0..=3i64))));
                }
                assert!(c.contains(&p));
            }
        }
    }

    #[test]
    fn fan_single_cone_valid() {
        let f = Fan { cones: vec![Cone::orthant(2)] };
        assert!(fan_validate(&f).valid);
    }

    #[test]
    fn fan_overlap_invalid() {
        let f = Fan {
            cones: vec![Cone::orthant(2), Cone::from_i64(2, &[&[1, 0], &[1, 1]])],
        };
        let r = fan_validate(&f);
        assert!(!r.valid);
        assert_eq!(r.offending, Some((0, 1)));
    }

    #[test]
    fn fan_quadrants_valid() {
        let f = Fan {
            cones: vec![
                Cone::from_i64(2, &[&[1, 0], &[0, 1]]),
                Cone::from_i64(2, &[&[0, 1], &[-1, 0]]),
                Cone::from_i64(2, &[&[-1, 0], &[0, -1]]),
                Cone::from_i64(2, &[&[0, -1], &[1, 0]]),
            ],
        };
        assert!(fan_validate(&f).valid);
    }

    #[test]
    fn iso_identity() {
        let c = Cone::orthant(2);
        let l = cone_isomorphism(&c, &c).unwrap().unwrap();
        let rays: BTreeSet<_> = c
            .extreme_rays()
            .iter()
            .map(|r| l.mul_vec(r).primitive().unwrap())
            .collect();
        assert_eq!(rays, c.extreme_rays().into_iter().collect());
    }

    #[test]
    fn iso_shear() {
        let c1 = Cone::orthant(2);
        let c2 = Cone::from_i64(2, &[&[1, 0], &[1, 1]]);
        let l = cone_isomorphism(&c1, &c2).unwrap().unwrap();
        assert!(determinant(&l).unwrap().abs().is_one());
        let image: BTreeSet<_> = c1
            .extreme_rays()
            .iter()
            .map(|r| l.mul_vec(r).primitive().unwrap())
            .collect();
        assert_eq!(image, c2.extreme_rays().into_iter().collect());
    }

    #[test]
    fn iso_absent_for_singular_target() {
        let c1 = Cone::orthant(2);
        let c2 = Cone::from_i64(2, &[&[0, 1], &[2, -1]]);
        assert!(cone_isomorphism(&c1, &c2).unwrap().is_none());
    }

    #[test]
    fn cone_json_roundtrip() {
        let c = Cone::from_i64(3, &[&[0, 0, 2], &[1, 2, 0], &[1, 1, 1]]);
        let s = serde_json::to_string(&c).unwrap();
        let back: Cone = serde_json::from_str(&s).unwrap();
        assert_eq!(back, c);
        assert!(s.contains("\"ambient_dim\":3"));
    }
}
