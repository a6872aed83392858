//! Hilbert bases of pointed rational cones: placing triangulation,
//! fundamental-parallelepiped enumeration, and reduction to the minimal
//! generating set of the monoid sigma ∩ Z^n.

use crate::cone::{span_projection, Cone};
use crate::error::{Error, Result};
use crate::lattice::{
    hermite_normal_form, inverse_rational, rank, Int, IntegerMatrix, LatticeVector, Rat,
};
use num_traits::{Signed, ToPrimitive, Zero};
use std::collections::BTreeSet;

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct HilbertBasis {
    pub cone: Cone,
    pub elements: Vec<LatticeVector>,
}

/// Placing triangulation: cones with pairwise disjoint interiors covering c,
/// each spanned by a subset of c's stored generators, taken in descending
/// lexicographic order.
pub fn triangulate(c: &Cone) -> Result<Vec<Cone>> {
    if !c.is_pointed() {
        return Err(Error::NotPointed);
    }
    let n = c.ambient_dim();
    let d = c.dim();
    if d == 0 {
        return Ok(vec![c.clone()]);
    }
    let mut order: Vec<LatticeVector> = c.generators().to_vec();
    order.sort();
    order.reverse();

    // Initial simplex: first d generators of full rank, in placing order.
    let mut simplex = Vec::new();
    let mut rest = Vec::new();
    for g in order {
        if simplex.len() < d {
            let mut trial = simplex.clone();
            trial.push(g.clone());
            if rank(&IntegerMatrix::from_rows(trial)) == simplex.len() + 1 {
                simplex.push(g);
                continue;
            }
        }
        rest.push(g);
    }
    let mut simplices: Vec<Vec<LatticeVector>> = vec![{
        let mut s = simplex.clone();
        s.sort();
        s
    }];
    let mut hull_gens = simplex;

    for v in rest {
        let hull = Cone::new(n, hull_gens.clone())?;
        if hull.contains(&v) {
            continue;
        }
        let visible: Vec<LatticeVector> = hull
            .dual_description()
            .rays
            .iter()
            .filter(|w| w.dot(&v).is_negative())
            .cloned()
            .collect();
        let mut fresh = Vec::new();
        for w in &visible {
            for s in &simplices {
                let facet: Vec<LatticeVector> =
                    s.iter().filter(|r| w.dot(r).is_zero()).cloned().collect();
                if facet.len() == d - 1 {
                    let mut t = facet;
                    t.push(v.clone());
                    t.sort();
                    debug_assert_eq!(rank(&IntegerMatrix::from_rows(t.clone())), d);
                    fresh.push(t);
                }
            }
        }
        simplices.extend(fresh);
        simplices.sort();
        simplices.dedup();
        hull_gens.push(v);
    }
    simplices
        .into_iter()
        .map(|s| Cone::new(n, s))
        .collect()
}

/// Lattice points of the half-open parallelepiped {sum l_i v_i : 0 <= l_i < 1}
/// spanned by the columns of a full-rank square matrix: one representative
/// per coset of the column lattice, canonicalized through V^{-1}.
fn parallelepiped_points(v_cols: &[LatticeVector]) -> Vec<LatticeVector> {
    let n = v_cols.len();
    let v = IntegerMatrix::from_cols(v_cols.to_vec());
    let v_inv = inverse_rational(&v).expect("simplex generators are independent");
    let (h, _) = hermite_normal_form(&v.transpose());
    let bounds: Vec<i64> = (0..n)
        .map(|i| h[(i, i)].to_i64().expect("desk-scale determinant"))
        .collect();
    let mut out = Vec::new();
    let mut rep = vec![0i64; n];
    loop {
        let y = LatticeVector::from_i64(&rep);
        // lambda = V^{-1} y; canonical point is V * frac(lambda) = y - V*floor(lambda)
        let mut shift = LatticeVector::zeros(n);
        for (j, col) in v_cols.iter().enumerate() {
            let mut lam = Rat::zero();
            for k in 0..n {
                lam += &v_inv[j][k] * Rat::from(y.0[k].clone());
            }
            shift = shift.add(&col.scale(&lam.floor().to_integer()));
        }
        let x = y.sub(&shift);
        if !x.is_zero() {
            out.push(x);
        }
        // increment mixed-radix counter
        let mut i = 0;
        loop {
            if i == n {
                out.sort();
                out.dedup();
                return out;
            }
            rep[i] += 1;
            if rep[i] < bounds[i] {
                break;
            }
            rep[i] = 0;
            i += 1;
        }
    }
}

/// Degree functional that is strictly positive on c \ {0}: the sum of the
/// dual cone's extreme rays.
pub(crate) fn grading(c: &Cone) -> LatticeVector {
    let mut w = LatticeVector::zeros(c.ambient_dim());
    for r in &c.dual_description().rays {
        w = w.add(r);
    }
    w
}

/// Minimal generating set of the monoid c ∩ Z^n for a pointed cone.
pub fn hilbert_basis(c: &Cone) -> Result<HilbertBasis> {
    if !c.is_pointed() {
        return Err(Error::NotPointed);
    }
    let n = c.ambient_dim();
    if c.generators().is_empty() {
        return Ok(HilbertBasis { cone: c.clone(), elements: vec![] });
    }
    let d = c.dim();
    if d < n {
        // Work in saturated span coordinates, where the cone is full
        // dimensional, then lift back (a unimodular monoid isomorphism).
        let (proj, u) = span_projection(c);
        let hb = hilbert_basis(&proj)?;
        let mut elements: Vec<LatticeVector> = hb
            .elements
            .iter()
            .map(|e| {
                let mut lift = LatticeVector::zeros(n);
                for (j, coeff) in e.0.iter().enumerate() {
                    lift = lift.add(&u.row(j).scale(coeff));
                }
                lift
            })
            .collect();
        elements.sort();
        return Ok(HilbertBasis { cone: c.clone(), elements });
    }

    let mut candidates: BTreeSet<LatticeVector> = BTreeSet::new();
    for g in c.generators() {
        candidates.insert(g.clone());
    }
    for piece in triangulate(c)? {
        for p in parallelepiped_points(piece.generators()) {
            candidates.insert(p);
        }
    }

    let w = grading(c);
    let mut ordered: Vec<LatticeVector> = candidates.into_iter().collect();
    ordered.sort_by(|a, b| w.dot(a).cmp(&w.dot(b)).then_with(|| a.cmp(b)));
    let mut basis: Vec<LatticeVector> = Vec::new();
    for x in ordered {
        let reducible = basis.iter().any(|y| c.contains(&x.sub(y)));
        if !reducible {
            basis.push(x);
        }
    }
    basis.sort();
    Ok(HilbertBasis { cone: c.clone(), elements: basis })
}

/// Express v as a nonnegative-integer combination of the Hilbert basis, or
/// return None when v lies outside the monoid.
pub fn monoid_membership(
    c: &Cone,
    v: &LatticeVector,
) -> Result<Option<Vec<(LatticeVector, Int)>>> {
    let hb = hilbert_basis(c)?;
    Ok(decompose(&hb, v))
}

/// Decomposition over a precomputed basis; any valid certificate.
pub fn decompose(hb: &HilbertBasis, v: &LatticeVector) -> Option<Vec<(LatticeVector, Int)>> {
    let c = &hb.cone;
    if !c.contains(v) {
        return None;
    }
    if v.is_zero() {
        return Some(vec![]);
    }
    let w = grading(c);
    let mut order: Vec<&LatticeVector> = hb.elements.iter().collect();
    order.sort_by(|a, b| w.dot(b).cmp(&w.dot(a)).then_with(|| a.cmp(b)));

    fn go(
        c: &Cone,
        order: &[&LatticeVector],
        i: usize,
        t: &LatticeVector,
        acc: &mut Vec<(LatticeVector, Int)>,
    ) -> bool {
        if t.is_zero() {
            return true;
        }
        if i == order.len() {
            return false;
        }
        let b = order[i];
        // Multiplicities of b leaving the remainder in the cone form an
        // interval [0, max]; search high to low.
        let mut max = Int::zero();
        let mut probe = t.sub(b);
        while c.contains(&probe) {
            max += 1;
            probe = probe.sub(b);
        }
        let mut m = max.clone();
        loop {
            let rem = t.sub(&b.scale(&m));
            if go(c, order, i + 1, &rem, acc) {
                if !m.is_zero() {
                    acc.push((b.clone(), m));
                }
                return true;
            }
            if m.is_zero() {
                return false;
            }
            m -= 1;
        }
    }

    let mut acc = Vec::new();
    if go(c, &order, 0, v, &mut acc) {
        acc.reverse();
        Some(acc)
    } else {
        None
    }
}
