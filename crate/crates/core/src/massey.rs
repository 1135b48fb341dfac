//! Triple Massey products.
//!
//! Conventions: for cycles `a, b, c` pick `u, v` with
//! `d(u) = (-1)^(1+|a|) a*b` and `d(v) = (-1)^(1+|b|) b*c`; the bracket
//! contains `[(-1)^(1+|u|) u*c + (-1)^(1+|a|) a*v]`, well defined modulo
//! `alpha * H_{|b|+|c|+1} + gamma * H_{|a|+|b|+1}`.

use std::fmt;

use thiserror::Error;

use crate::dga::{build_test_dga_c, format_element, Degree, DegreeWindow, DgaError, DgaPresentation, Element};
use crate::homology::{HomologyClass, HomologyError, HomologyGroup, HomologyTable};
use crate::matrix::{smith_normal_form, solve_linear, MatrixError, RingMatrix};
use crate::padic::Ring;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Side {
    Left,
    Right,
}

impl fmt::Display for Side {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Side::Left => "alpha*beta",
            Side::Right => "beta*gamma",
        })
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum MasseyError {
    #[error("bracket undefined: {side} is nonzero in homology (degree {degree})")]
    Undefined { side: Side, degree: Degree },
    #[error("no witness for {side} in degree {degree} although the product is null-homologous (precision or window too small)")]
    WitnessSolve { side: Side, degree: Degree },
    #[error("degree {degree} needed by the bracket is outside the inner window")]
    Window { degree: Degree },
    #[error("i + j must be nonzero")]
    ZeroIndexSum,
    #[error("stored witness fails d(u) = (-1)^(1+|a|) a*b")]
    BadWitness,
    #[error(transparent)]
    Homology(#[from] HomologyError),
    #[error(transparent)]
    Dga(#[from] DgaError),
    #[error(transparent)]
    Matrix(#[from] MatrixError),
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct MasseyResult {
    pub degree: Degree,
    pub representative: HomologyClass,
    /// Nonzero generators of the indeterminacy subgroup.
    pub indeterminacy_generators: Vec<HomologyClass>,
    pub witnesses: (Element, Element),
    /// The chain `(-1)^(1+|u|) u*c + (-1)^(1+|a|) a*v`.
    pub chain: Element,
}

fn sign(k: Degree, e: &Element) -> Element {
    if k.rem_euclid(2) == 1 {
        e.neg()
    } else {
        e.clone()
    }
}

fn inner(dga: &DgaPresentation, n: Degree) -> Result<(), MasseyError> {
    if dga.window().contains_inner(n) {
        Ok(())
    } else {
        Err(MasseyError::Window { degree: n })
    }
}

/// Some `w` with `d(w) = target`, distinguishing an undefined bracket from a
/// failed solve.
fn witness(table: &HomologyTable, target: &Element, side: Side) -> Result<Element, MasseyError> {
    let dga = table.dga();
    let n = target.degree + 1;
    inner(dga, target.degree)?;
    if !dga.window().contains(n) {
        return Err(MasseyError::Window { degree: n });
    }
    let d = dga.differential_matrix(n).ok_or(MasseyError::Window { degree: n })?;
    match solve_linear(d, &target.coords)? {
        Some(w) => Ok(Element { degree: n, coords: w }),
        None => {
            if table.class_of(target)?.is_zero() {
                Err(MasseyError::WitnessSolve { side, degree: target.degree })
            } else {
                Err(MasseyError::Undefined { side, degree: target.degree })
            }
        }
    }
}

/// Bracket from chosen witnesses; `u` and `v` are checked exactly.
pub fn massey_with_witnesses(
    table: &HomologyTable,
    a: &Element,
    b: &Element,
    c: &Element,
    u: &Element,
    v: &Element,
) -> Result<MasseyResult, MasseyError> {
    let dga = table.dga();
    let ab = sign(1 + a.degree, &dga.multiply(a, b)?);
    let bc = sign(1 + b.degree, &dga.multiply(b, c)?);
    if dga.differential(u)? != ab || dga.differential(v)? != bc {
        return Err(MasseyError::BadWitness);
    }
    let degree = a.degree + b.degree + c.degree + 1;
    inner(dga, degree)?;
    let chain = sign(1 + u.degree, &dga.multiply(u, c)?).add(&sign(1 + a.degree, &dga.multiply(a, v)?));
    let representative = table.class_of(&chain)?;
    let indeterminacy_generators = indeterminacy_chains(table, a, c, b.degree)?;
    Ok(MasseyResult { degree, representative, indeterminacy_generators, witnesses: (u.clone(), v.clone()), chain })
}

/// Bracket of cycles, with SNF-canonical witnesses.
pub fn massey_of_cycles(
    table: &HomologyTable,
    a: &Element,
    b: &Element,
    c: &Element,
) -> Result<MasseyResult, MasseyError> {
    let dga = table.dga();
    for n in [a.degree, b.degree, c.degree] {
        inner(dga, n)?;
    }
    let ab = sign(1 + a.degree, &dga.multiply(a, b)?);
    let bc = sign(1 + b.degree, &dga.multiply(b, c)?);
    let u = witness(table, &ab, Side::Left)?;
    let v = witness(table, &bc, Side::Right)?;
    massey_with_witnesses(table, a, b, c, &u, &v)
}

/// `<alpha, beta, gamma>` with chain representatives from the cycle section.
pub fn triple_massey(
    table: &HomologyTable,
    alpha: &HomologyClass,
    beta: &HomologyClass,
    gamma: &HomologyClass,
) -> Result<MasseyResult, MasseyError> {
    let a = table.section(alpha)?;
    let b = table.section(beta)?;
    let c = table.section(gamma)?;
    massey_of_cycles(table, &a, &b, &c)
}

fn indeterminacy_chains(
    table: &HomologyTable,
    a: &Element,
    c: &Element,
    beta_degree: Degree,
) -> Result<Vec<HomologyClass>, MasseyError> {
    let dga = table.dga();
    let right = beta_degree + c.degree + 1;
    let left = a.degree + beta_degree + 1;
    inner(dga, right)?;
    inner(dga, left)?;
    let mut out = Vec::new();
    let h_right = table.group(right)?;
    for f in h_right.factors() {
        out.push(table.class_of(&dga.multiply(a, &f.representative)?)?);
    }
    let h_left = table.group(left)?;
    for f in h_left.factors() {
        out.push(table.class_of(&dga.multiply(&f.representative, c)?)?);
    }
    out.retain(|g| !g.is_zero());
    Ok(out)
}

/// Generators of `alpha * H_{|b|+|c|+1} + gamma * H_{|a|+|b|+1}`.
pub fn indeterminacy(
    table: &HomologyTable,
    alpha: &HomologyClass,
    gamma: &HomologyClass,
    beta_degree: Degree,
) -> Result<Vec<HomologyClass>, MasseyError> {
    let a = table.section(alpha)?;
    let c = table.section(gamma)?;
    indeterminacy_chains(table, &a, &c, beta_degree)
}

/// `[gens | p^e_k relations]` in class coordinates.
fn span_matrix(group: &HomologyGroup, gens: &[HomologyClass]) -> RingMatrix {
    let ring = group.ring();
    let k = group.factors().len();
    let mut cols: Vec<Vec<_>> = gens.iter().map(|g| g.coords.clone()).collect();
    for (j, f) in group.factors().iter().enumerate() {
        if let crate::homology::FactorOrder::Torsion(e) = f.order {
            let mut col = vec![ring.zero(); k];
            col[j] = ring.p_pow(e);
            cols.push(col);
        }
    }
    RingMatrix::from_columns(ring, k, &cols)
}

/// log_p of the order of the subgroup generated by `gens`.
pub fn subgroup_log_size(group: &HomologyGroup, gens: &[HomologyClass]) -> u32 {
    let n = group.ring().precision();
    let relations: u32 = group
        .factors()
        .iter()
        .map(|f| match f.order {
            crate::homology::FactorOrder::Torsion(e) => n - e,
            crate::homology::FactorOrder::Free => 0,
        })
        .sum();
    smith_normal_form(&span_matrix(group, gens)).image_log_size() - relations
}

/// Whether `x` lies in `base + span(gens)`.
pub fn in_coset(
    group: &HomologyGroup,
    base: &HomologyClass,
    gens: &[HomologyClass],
    x: &HomologyClass,
) -> Result<bool, MasseyError> {
    let diff = x.sub(base);
    Ok(solve_linear(&span_matrix(group, gens), &diff.coords)?.is_some())
}

/// `gamma_m = [-m e x^(m-1)]` in the test dga.
pub fn gamma_chain(c: &DgaPresentation, m: i64) -> Result<Element, MasseyError> {
    let q = 2 * c.ring().prime() as i64 - 2;
    let n = q * m - 1;
    let (deg, idx) = c.find_label(&e_x_label(m - 1)).ok_or(MasseyError::Window { degree: n })?;
    debug_assert_eq!(deg, n);
    Ok(c.basis_element(deg, idx).scale(c.ring().reduce(-m)))
}

fn e_x_label(k: i64) -> String {
    match k {
        0 => "e".to_string(),
        1 => "e*x".to_string(),
        _ => format!("e*x^{k}"),
    }
}

/// `p * [1]`, with chain `p * 1`.
pub fn p_unit(dga: &DgaPresentation) -> Element {
    dga.unit().scale(dga.ring().reduce(dga.ring().prime() as i64))
}

/// Largest `M` with every bracket `|i|, |j| <= M` inside the inner window.
pub fn max_index_for_window(p: u64, window: DegreeWindow) -> i64 {
    let q = 2 * p as i64 - 2;
    let mut m = 0;
    loop {
        let next = m + 1;
        let extremes = [q * 2 * next - 1, q * 2 * next, -q * 2 * next - 1, -q * 2 * next];
        if extremes.iter().all(|&n| window.contains_inner(n)) {
            m = next;
        } else {
            return m;
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, serde::Serialize)]
pub struct RelationRow {
    pub i: i64,
    pub j: i64,
    pub expected: String,
    pub computed: String,
    pub indeterminacy_size: u64,
    pub ok: bool,
}

#[derive(Debug, Clone, PartialEq, Eq, Default, serde::Serialize)]
pub struct RelationReport {
    pub rows: Vec<RelationRow>,
}

impl RelationReport {
    pub fn all_ok(&self) -> bool {
        self.rows.iter().all(|r| r.ok)
    }

    pub fn row(&self, i: i64, j: i64) -> Option<&RelationRow> {
        self.rows.iter().find(|r| r.i == i && r.j == j)
    }
}

impl fmt::Display for RelationReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let we = self.rows.iter().map(|r| r.expected.len()).max().unwrap_or(0).max(18);
        let wc = self.rows.iter().map(|r| r.computed.len()).max().unwrap_or(0).max(8);
        writeln!(f, "{:>3} | {:>3} | {:<we$} | {:<wc$} | indet size | status", "i", "j", "expected γ_{i+j}", "computed")?;
        for r in &self.rows {
            let status = if r.ok { "OK" } else { "FAIL" };
            writeln!(
                f,
                "{:>3} | {:>3} | {:<we$} | {:<wc$} | {:>10} | {status}",
                r.i, r.j, r.expected, r.computed, r.indeterminacy_size
            )?;
        }
        Ok(())
    }
}

/// `<gamma_i, p, gamma_j>` on the test dga, with the checked relation.
pub fn bracket_in_c(table: &HomologyTable, i: i64, j: i64) -> Result<(MasseyResult, HomologyClass), MasseyError> {
    if i + j == 0 {
        return Err(MasseyError::ZeroIndexSum);
    }
    let c = table.dga();
    let a = gamma_chain(c, i)?;
    let cc = gamma_chain(c, j)?;
    let res = massey_of_cycles(table, &a, &p_unit(c), &cc)?;
    let expected = table.class_of(&gamma_chain(c, i + j)?)?;
    Ok((res, expected))
}

pub fn verify_massey_relations_c(
    p: u64,
    precision: u32,
    window: DegreeWindow,
    max_index: i64,
) -> Result<RelationReport, MasseyError> {
    let c = build_test_dga_c(Ring::new(p, precision).map_err(DgaError::from)?, window)?;
    let table = HomologyTable::new(&c);
    let mut rows = Vec::new();
    for i in -max_index..=max_index {
        for j in -max_index..=max_index {
            if i == 0 || j == 0 || i + j == 0 {
                continue;
            }
            let (res, expected) = bracket_in_c(&table, i, j)?;
            let group = table.group(res.degree)?;
            let indet = subgroup_log_size(&group, &res.indeterminacy_generators);
            let computed = format_element(&c, &table.section(&res.representative)?);
            rows.push(RelationRow {
                i,
                j,
                expected: format_element(&c, &gamma_chain(&c, i + j)?),
                computed,
                indeterminacy_size: p.pow(indet),
                ok: res.representative == expected && indet == 0,
            });
        }
    }
    Ok(RelationReport { rows })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dga::{adjoin_cell, build_free_cdga, Expression, FreeCdgaSpec, GeneratorSpec};

    fn c(p: u64, n: u32, lo: i64, hi: i64) -> DgaPresentation {
        build_test_dga_c(Ring::new(p, n).unwrap(), DegreeWindow::new(lo, hi).unwrap()).unwrap()
    }

    #[test]
    fn gamma_one_squared() {
        let c = c(3, 4, -30, 30);
        let table = HomologyTable::new(&c);
        let (res, expected) = bracket_in_c(&table, 1, 1).unwrap();
        assert_eq!(res.representative, expected);
        assert!(res.indeterminacy_generators.is_empty());
        let x = c.basis_element(4, 0);
        assert_eq!(res.witnesses, (x.neg(), x.clone()));
        assert_eq!(format_element(&c, &res.chain), "-2*e*x");
    }

    #[test]
    fn class_level_api_uses_section() {
        let c = c(3, 4, -30, 30);
        let table = HomologyTable::new(&c);
        let g1 = table.class_of(&gamma_chain(&c, 1).unwrap()).unwrap();
        let beta = table.class_of(&p_unit(&c)).unwrap();
        assert_eq!(table.section(&g1).unwrap(), c.basis_element(3, 0).neg());
        assert_eq!(table.section(&beta).unwrap(), p_unit(&c));
        let res = triple_massey(&table, &g1, &beta, &g1).unwrap();
        let g2 = table.class_of(&gamma_chain(&c, 2).unwrap()).unwrap();
        assert_eq!(res.representative, g2);
    }

    #[test]
    fn merging_instance() {
        let c = c(3, 4, -30, 30);
        let table = HomologyTable::new(&c);
        let (res, expected) = bracket_in_c(&table, 2, -1).unwrap();
        assert_eq!(res.representative, expected);
        assert_eq!(expected, table.class_of(&c.basis_element(3, 0).neg()).unwrap());
    }

    #[test]
    fn zero_outer_argument() {
        let c = c(3, 4, -30, 30);
        let table = HomologyTable::new(&c);
        let zero = c.zero(3);
        let res = massey_of_cycles(&table, &zero, &p_unit(&c), &gamma_chain(&c, 1).unwrap()).unwrap();
        assert!(res.witnesses.0.is_zero());
        let group = table.group(res.degree).unwrap();
        assert!(in_coset(&group, &group.zero_class(), &res.indeterminacy_generators, &res.representative).unwrap());
    }

    #[test]
    fn undefined_bracket() {
        // <[e], [e], ...> needs [e]*[1] = [e] null-homologous: it is not.
        let c = c(3, 4, -30, 30);
        let table = HomologyTable::new(&c);
        let e = c.basis_element(3, 0);
        let err = massey_of_cycles(&table, &e, &c.unit(), &e).unwrap_err();
        assert_eq!(err, MasseyError::Undefined { side: Side::Left, degree: 3 });
        assert!(matches!(bracket_in_c(&table, 1, -1), Err(MasseyError::ZeroIndexSum)));
    }

    #[test]
    fn witness_independence() {
        // v is shifted by the closed generator w, so the class moves by a*w
        let ring = Ring::new(3, 4).unwrap();
        let c0 = build_test_dga_c(ring, DegreeWindow::new(-20, 20).unwrap()).unwrap();
        let d = adjoin_cell(&c0, "w", 8, &c0.zero(7)).unwrap();
        let table = HomologyTable::new(&d);
        let e = d.find_label("e").unwrap();
        let ex = d.find_label("e*x").unwrap();
        let a = d.basis_element(e.0, e.1).neg();
        let cc = d.basis_element(ex.0, ex.1).scale(ring.reduce(-2));
        let b = p_unit(&d);
        let base = massey_of_cycles(&table, &a, &b, &cc).unwrap();
        let (u, v) = base.witnesses.clone();
        let w = d.find_label("w").unwrap();
        let v2 = v.add(&d.basis_element(w.0, w.1));
        let other = massey_with_witnesses(&table, &a, &b, &cc, &u, &v2).unwrap();
        assert_ne!(other.representative, base.representative);
        let group = table.group(base.degree).unwrap();
        assert!(in_coset(&group, &base.representative, &base.indeterminacy_generators, &other.representative).unwrap());
        let x2 = d.find_label("x^2").unwrap();
        let bad = v.add(&d.basis_element(x2.0, x2.1));
        assert_eq!(massey_with_witnesses(&table, &a, &b, &cc, &u, &bad), Err(MasseyError::BadWitness));
    }

    #[test]
    fn table_for_small_indices() {
        let report = verify_massey_relations_c(3, 4, DegreeWindow::new(-40, 40).unwrap(), 3).unwrap();
        assert!(report.all_ok(), "{report}");
        assert_eq!(report.row(2, -1).unwrap().computed, "-e");
        assert_eq!(report.row(1, 1).unwrap().computed, "-2*e*x");
        let report = verify_massey_relations_c(5, 3, DegreeWindow::new(-40, 40).unwrap(), 2).unwrap();
        assert!(report.all_ok(), "{report}");
    }

    #[test]
    fn window_index_bound() {
        assert_eq!(max_index_for_window(3, DegreeWindow::new(-40, 40).unwrap()), 4);
        assert_eq!(max_index_for_window(5, DegreeWindow::new(-40, 40).unwrap()), 2);
    }

    /// A closed generator `w` in degree 8 (= (2p-2)*2) gives H_8 a class and
    /// gamma_1 * w a chance to be nonzero.
    #[test]
    fn indeterminacy_after_adjoining_a_class() {
        let ring = Ring::new(3, 4).unwrap();
        let w = DegreeWindow::new(-20, 20).unwrap();
        let c = build_test_dga_c(ring, w).unwrap();
        let table = HomologyTable::new(&c);
        let (res, _) = bracket_in_c(&table, 1, 2).unwrap();
        assert!(res.indeterminacy_generators.is_empty());

        let d = adjoin_cell(&c, "w", 8, &c.zero(7)).unwrap();
        let table = HomologyTable::new(&d);
        let a = d.basis_element(3, d.labels(3).iter().position(|l| l == "e").unwrap()).neg();
        let (xe_deg, xe_idx) = d.find_label("e*x").unwrap();
        let cc = d.basis_element(xe_deg, xe_idx).scale(ring.reduce(-2));
        let res = massey_of_cycles(&table, &a, &p_unit(&d), &cc).unwrap();
        let group = table.group(res.degree).unwrap();
        assert!(subgroup_log_size(&group, &res.indeterminacy_generators) > 0);
    }

    #[test]
    fn additivity_in_outer_argument() {
        let ring = Ring::new(3, 3).unwrap();
        let spec = FreeCdgaSpec::new(vec![
            GeneratorSpec::new("a", 3, false, Expression::zero()),
            GeneratorSpec::new("b", 3, false, Expression::zero()),
            GeneratorSpec::new("s", 4, false, Expression::parse("3*a").unwrap()),
            GeneratorSpec::new("t", 4, false, Expression::parse("3*b").unwrap()),
        ]);
        let d = build_free_cdga(&spec, ring, DegreeWindow::new(-1, 12).unwrap()).unwrap();
        let table = HomologyTable::new(&d);
        let (a, b) = (d.basis_element(3, 0), d.basis_element(3, 1));
        let pu = p_unit(&d);
        let sum = massey_of_cycles(&table, &a.add(&b), &pu, &a).unwrap();
        let left = massey_of_cycles(&table, &a, &pu, &a).unwrap();
        let right = massey_of_cycles(&table, &b, &pu, &a).unwrap();
        let group = table.group(sum.degree).unwrap();
        let mut gens = sum.indeterminacy_generators.clone();
        gens.extend(left.indeterminacy_generators.iter().cloned());
        gens.extend(right.indeterminacy_generators.iter().cloned());
        let combined = left.representative.add(&right.representative);
        assert!(in_coset(&group, &combined, &gens, &sum.representative).unwrap());
    }
}
