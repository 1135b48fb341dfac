//! Cell attachment: freely adjoining a generator `y` with `d(y) = z`.

use std::collections::{BTreeMap, BTreeSet, HashMap};

use super::{BasisRef, Degree, DgaError, DgaPresentation, Element, SparseVec};
use crate::matrix::RingMatrix;

fn check_cycle(a: &DgaPresentation, z: &Element, n: Degree) -> Result<(), DgaError> {
    a.check_element(z)?;
    if z.degree != n - 1 {
        return Err(DgaError::Dimension { degree: n - 1, expected: a.basis_size(n - 1), got: z.coords.len() });
    }
    if a.window().contains(z.degree - 1) && !a.is_cycle(z)? {
        return Err(DgaError::NotACycle);
    }
    Ok(())
}

/// Free graded-commutative extension `A[y]`, `|y| = n`, `d(y) = z`.
///
/// For odd `n` this is exactly `A + A*y`. For even `n` powers `y^j` are kept
/// while `j*|n| <= span`; products beyond that are recorded as clipped. Basis
/// elements `u*y^j` (`j >= 1`) need `d(u)`, so `u` ranges over degrees above
/// the window minimum.
pub fn adjoin_cell(a: &DgaPresentation, name: &str, n: Degree, z: &Element) -> Result<DgaPresentation, DgaError> {
    if n == 0 {
        return Err(DgaError::ZeroDegreeGenerator(name.to_string()));
    }
    check_cycle(a, z, n)?;
    let ring = a.ring();
    let w = a.window();
    let odd = n.rem_euclid(2) == 1;
    let max_power: i64 = if odd { 1 } else { w.span() / n.abs() };

    // B-basis in degree k: (power j, A-basis ref), grouped by j ascending.
    let mut layout: BTreeMap<Degree, Vec<(i64, BasisRef)>> = BTreeMap::new();
    for k in w.degrees() {
        let mut list = Vec::new();
        for j in 0..=max_power {
            let src = k - j * n;
            if !w.contains(src) || (j > 0 && src <= w.min()) {
                continue;
            }
            for i in 0..a.basis_size(src) {
                list.push((j, (src, i)));
            }
        }
        if !list.is_empty() {
            layout.insert(k, list);
        }
    }
    let position: HashMap<(i64, BasisRef), (Degree, usize)> = layout
        .iter()
        .flat_map(|(&k, v)| v.iter().enumerate().map(move |(idx, key)| (*key, (k, idx))))
        .collect();
    let size = |k: Degree| layout.get(&k).map_or(0, |v| v.len());

    let label = |j: i64, u: BasisRef| -> String {
        let base = &a.labels(u.0)[u.1];
        let ypart = if j == 1 { name.to_string() } else { format!("{name}^{j}") };
        match (j, base.as_str()) {
            (0, _) => base.clone(),
            (_, "1") => ypart,
            _ => format!("{base}*{ypart}"),
        }
    };
    let basis: BTreeMap<Degree, Vec<String>> =
        layout.iter().map(|(&k, v)| (k, v.iter().map(|&(j, u)| label(j, u)).collect())).collect();

    // Embed an A-element of degree m times y^j into B coordinates.
    let embed = |e: &Element, j: i64, out: &mut Vec<crate::padic::PAdicInt>| -> Result<(), DgaError> {
        for (i, c) in e.coords.iter().enumerate() {
            if c.is_zero() {
                continue;
            }
            let (_, idx) = position
                .get(&(j, (e.degree, i)))
                .ok_or_else(|| DgaError::Truncation(label(j, (e.degree, i))))?;
            out[*idx] += *c;
        }
        Ok(())
    };

    let mut differential = BTreeMap::new();
    for k in w.min() + 1..=w.max() {
        let mut cols = Vec::with_capacity(size(k));
        for &(j, u) in layout.get(&k).map_or(&[][..], |v| v.as_slice()) {
            let mut col = vec![ring.zero(); size(k - 1)];
            let ue = a.basis_element(u.0, u.1);
            if w.contains(u.0 - 1) {
                embed(&a.differential(&ue)?, j, &mut col)?;
            }
            if j > 0 {
                let uz = a.multiply(&ue, z)?;
                let coeff = if u.0.rem_euclid(2) == 1 { -ring.reduce(j) } else { ring.reduce(j) };
                embed(&uz.scale(coeff), j - 1, &mut col)?;
            }
            cols.push(col);
        }
        differential.insert(k, RingMatrix::from_columns(ring, size(k - 1), &cols));
    }

    let mut product = BTreeMap::new();
    let mut clipped = BTreeSet::new();
    for (&ka, la) in &layout {
        for (&kb, lb) in &layout {
            let target = ka + kb;
            if !w.contains(target) {
                continue;
            }
            for (ia, &(ja, u)) in la.iter().enumerate() {
                for (ib, &(jb, v)) in lb.iter().enumerate() {
                    let key = (ka, ia, kb, ib);
                    let jt = ja + jb;
                    if odd && jt > 1 {
                        continue;
                    }
                    if jt > max_power || !w.contains(u.0 + v.0) {
                        clipped.insert(key);
                        continue;
                    }
                    let uv = match a.basis_product(u, v) {
                        Ok(s) => s,
                        Err(_) => {
                            clipped.insert(key);
                            continue;
                        }
                    };
                    // u y^ja v y^jb = (-1)^{ja*n*|v|} u v y^{ja+jb}
                    let negative = (ja * n * v.0).rem_euclid(2) == 1;
                    let mut res: SparseVec = Vec::new();
                    let mut ok = true;
                    for (idx, c) in uv {
                        match position.get(&(jt, (u.0 + v.0, idx))) {
                            Some(&(_, t)) => res.push((t, if negative { -c } else { c })),
                            None => ok = false,
                        }
                    }
                    if !ok {
                        clipped.insert(key);
                    } else if !res.is_empty() {
                        product.insert(key, res);
                    }
                }
            }
        }
    }

    let unit = position[&(0, (0, a.unit_index()))].1;
    let b = DgaPresentation::from_parts(ring, w, basis, differential, product, unit, BTreeSet::new(), clipped)?;
    for k in w.min() + 2..=w.max() {
        if !b.differential[&(k - 1)].mul(&b.differential[&k])?.is_zero() {
            return Err(DgaError::DSquared(k));
        }
    }
    Ok(b)
}

/// Chain-level cell: a new basis element `y` of degree `n` with `d(y) = z`.
/// Products of `y` with anything other than the unit are not modeled.
pub fn attach_chain_cell(
    a: &DgaPresentation,
    label: &str,
    n: Degree,
    z: &Element,
) -> Result<(DgaPresentation, BasisRef), DgaError> {
    if !a.window().contains(n) {
        return Err(DgaError::WindowClip { degree: n, min: a.window().min(), max: a.window().max() });
    }
    if n == 0 {
        return Err(DgaError::ZeroDegreeGenerator(label.to_string()));
    }
    check_cycle(a, z, n)?;
    let ring = a.ring();
    let mut b = a.clone();
    let idx = b.basis_size(n);
    b.basis.entry(n).or_default().push(label.to_string());
    if let Some(d) = b.differential.get(&n) {
        let mut cols: Vec<Vec<_>> = (0..d.cols()).map(|j| d.column(j)).collect();
        cols.push(z.coords.clone());
        b.differential.insert(n, RingMatrix::from_columns(ring, d.rows(), &cols));
    }
    if let Some(d) = b.differential.get(&(n + 1)) {
        let zero_row = RingMatrix::zeros(ring, 1, d.cols());
        b.differential.insert(n + 1, d.vstack(&zero_row));
    }
    b.chain_cells.insert((n, idx));
    Ok((b, (n, idx)))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dga::{build_free_cdga, check_dga_axioms, DegreeWindow, Expression, FreeCdgaSpec, GeneratorSpec};
    use crate::homology::{FactorOrder, HomologyTable};
    use crate::padic::Ring;

    fn trivial(p: u64, n: u32, w: DegreeWindow) -> DgaPresentation {
        build_free_cdga(&FreeCdgaSpec::default(), Ring::new(p, n).unwrap(), w).unwrap()
    }

    #[test]
    fn adjoin_polynomial_cycle() {
        let w = DegreeWindow::new(-2, 8).unwrap();
        let a = trivial(3, 2, w);
        let z = a.zero(1);
        let b = adjoin_cell(&a, "y", 2, &z).unwrap();
        assert_eq!(b.labels(2), ["y"]);
        assert_eq!(b.labels(8), ["y^4"]);
        assert!(check_dga_axioms(&b).is_empty());
        let spec = FreeCdgaSpec::new(vec![GeneratorSpec::new("y", 2, false, Expression::zero())]);
        let direct = build_free_cdga(&spec, a.ring(), w).unwrap();
        assert_eq!(b.basis, direct.basis);
        assert_eq!(b.product, direct.product);
    }

    /// H_3 = Z/9 on a; adjoining y with d(y) = 3a leaves Z/3.
    #[test]
    fn adjoin_kills_p_multiple() {
        let ring = Ring::new(3, 4).unwrap();
        let w = DegreeWindow::new(-1, 12).unwrap();
        let spec = FreeCdgaSpec::new(vec![
            GeneratorSpec::new("a", 3, false, Expression::zero()),
            GeneratorSpec::new("t", 4, false, Expression::parse("9*a").unwrap()),
        ]);
        let d = build_free_cdga(&spec, ring, w).unwrap();
        let before = HomologyTable::new(&d);
        assert_eq!(before.group(3).unwrap().orders(), vec![FactorOrder::Torsion(2)]);
        let a3 = d.basis_element(3, 0).scale(ring.reduce(3));
        let e = adjoin_cell(&d, "y", 4, &a3).unwrap();
        assert!(check_dga_axioms(&e).is_empty());
        let after = HomologyTable::new(&e);
        assert_eq!(after.group(3).unwrap().orders(), vec![FactorOrder::Torsion(1)]);
        assert_eq!(after.group(2).unwrap().orders(), before.group(2).unwrap().orders());
    }

    #[test]
    fn acyclic_pair_keeps_lower_homology() {
        let ring = Ring::new(3, 3).unwrap();
        let w = DegreeWindow::new(-1, 14).unwrap();
        let spec = FreeCdgaSpec::new(vec![
            GeneratorSpec::new("a", 3, false, Expression::zero()),
            GeneratorSpec::new("t", 4, false, Expression::parse("3*a").unwrap()),
        ]);
        let d = build_free_cdga(&spec, ring, w).unwrap();
        // w5 closed, then y6 with d = w5: an acyclic pair in degrees 5, 6
        let with_w = adjoin_cell(&d, "w", 5, &d.zero(4)).unwrap();
        let (deg, idx) = with_w.find_label("w").unwrap();
        let z = with_w.basis_element(deg, idx);
        let pair = adjoin_cell(&with_w, "v", 6, &z).unwrap();
        assert!(check_dga_axioms(&pair).is_empty());
        let h0 = HomologyTable::new(&d);
        let h1 = HomologyTable::new(&pair);
        for k in w.inner_degrees().filter(|k| *k < 5) {
            assert_eq!(h0.group(k).unwrap().orders(), h1.group(k).unwrap().orders(), "degree {k}");
        }
    }

    #[test]
    fn rejects_non_cycles() {
        let ring = Ring::new(3, 3).unwrap();
        let w = DegreeWindow::new(-1, 10).unwrap();
        let spec = FreeCdgaSpec::new(vec![
            GeneratorSpec::new("a", 3, false, Expression::zero()),
            GeneratorSpec::new("t", 4, false, Expression::parse("3*a").unwrap()),
        ]);
        let d = build_free_cdga(&spec, ring, w).unwrap();
        let t = d.basis_element(4, 0);
        assert_eq!(adjoin_cell(&d, "y", 5, &t), Err(DgaError::NotACycle));
        assert!(matches!(attach_chain_cell(&d, "y", 5, &t), Err(DgaError::NotACycle)));
    }

    #[test]
    fn chain_cell_products_are_unmodeled() {
        let ring = Ring::new(3, 3).unwrap();
        let w = DegreeWindow::new(-1, 10).unwrap();
        let spec = FreeCdgaSpec::new(vec![
            GeneratorSpec::new("a", 3, false, Expression::zero()),
            GeneratorSpec::new("t", 4, false, Expression::parse("3*a").unwrap()),
        ]);
        let d = build_free_cdga(&spec, ring, w).unwrap();
        let (b, y) = attach_chain_cell(&d, "y", 4, &d.basis_element(3, 0)).unwrap();
        let ye = b.basis_element(y.0, y.1);
        assert_eq!(b.multiply(&b.unit(), &ye).unwrap(), ye);
        assert!(matches!(b.multiply(&ye, &b.basis_element(3, 0)), Err(DgaError::ClippedProduct { .. })));
        let h = HomologyTable::new(&b);
        assert!(h.group(3).unwrap().orders().is_empty());
        let report = check_dga_axioms(&b);
        assert!(report.is_empty());
        assert!(report.skipped > 0);
    }
}
