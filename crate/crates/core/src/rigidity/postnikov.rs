//! Replacing `D` by a presentation whose degree 0 is spanned by the unit.
//!
//! Kill positive homology with chain cells (`i: D -> P`), factor `i` through
//! `D''` = `D` plus acyclic pairs with `pbar: D'' -> P` onto, and pull back
//! along the inclusion `h: Q -> P` of `Q = P_{<0} + Z_p 1`. Cells are
//! chain-level only, so products in positive degrees of the result are not
//! modeled.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use thiserror::Error;

use crate::dga::{attach_chain_cell, Degree, DegreeWindow, DgaError, DgaPresentation};
use crate::homology::{homology_group, FactorOrder, HomologyError, HomologyTable};
use crate::matrix::{smith_normal_form, MatrixError, RingMatrix};
use crate::padic::PAdicInt;

use super::morphism::{check_chain_map, check_homology_iso_on, DgaMorphism, Sweep};

#[derive(Debug, Error)]
pub enum PostnikovError {
    #[error("cell budget of {0} exhausted while killing positive homology")]
    CellBudget(usize),
    #[error("H_0 is {0}, not free of rank 1 on the unit")]
    DegreeZeroHomology(String),
    #[error("d is nonzero on degree 0, so truncating at degree 0 changes H_-1")]
    DegreeZeroDifferential,
    #[error("pbar is not onto in degree {0}")]
    NotOnto(Degree),
    #[error("kernel of pbar is not closed under d in degree {0}")]
    KernelNotClosed(Degree),
    #[error(transparent)]
    Homology(#[from] HomologyError),
    #[error(transparent)]
    Dga(#[from] DgaError),
    #[error(transparent)]
    Matrix(#[from] MatrixError),
}

#[derive(Debug, Clone, serde::Serialize)]
pub struct PostnikovCertificate {
    pub degree0_is_unit: bool,
    /// `H_k(P) = 0` for `1 <= k <= max - 2`.
    pub killed: Sweep,
    /// `D -> D''` induces an isomorphism.
    pub extension_iso: Sweep,
    /// The projection `D' -> D''` commutes with `d`.
    pub projection_chain_map: Sweep,
    /// The projection is an isomorphism on `H_n`, `n <= 0`.
    pub nonpositive_iso: Sweep,
    /// `H_n(D') = 0` for `1 <= n <= max - 3`.
    pub positive_vanishing: Sweep,
    /// The projection is an isomorphism on `H_n`, `1 <= n <= max - 3`.
    pub positive_matches_input: Sweep,
}

impl PostnikovCertificate {
    pub fn sweeps(&self) -> [&Sweep; 6] {
        [
            &self.killed,
            &self.extension_iso,
            &self.projection_chain_map,
            &self.nonpositive_iso,
            &self.positive_vanishing,
            &self.positive_matches_input,
        ]
    }

    pub fn passed(&self) -> bool {
        self.degree0_is_unit && self.sweeps().iter().all(|s| s.passed())
    }
}

impl fmt::Display for PostnikovCertificate {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let status = if self.degree0_is_unit { "PASS" } else { "FAIL" };
        writeln!(f, "STEP degree-0-is-unit: {status}")?;
        for s in self.sweeps() {
            writeln!(f, "{s}")?;
        }
        Ok(())
    }
}

#[derive(Debug, Clone)]
pub struct PostnikovResult {
    /// `D'` cut down to `[min, max - 2]`, the range where its homology is
    /// certified to match; degree 0 is spanned by the unit.
    pub normalized: DgaPresentation,
    /// `D'` on the full window.
    pub pullback: DgaPresentation,
    pub killing: DgaPresentation,
    pub extension: DgaPresentation,
    pub projection: DgaMorphism,
    pub certificate: PostnikovCertificate,
    pub log: Vec<String>,
}

/// Attach chain cells in ascending degree until `H_k = 0` for `1 <= k <= max - 2`.
pub fn kill_positive_homology(
    d: &DgaPresentation,
    budget: usize,
) -> Result<(DgaPresentation, DgaMorphism, Vec<String>), PostnikovError> {
    let mut p = d.clone();
    let mut cells = 0;
    let mut log = Vec::new();
    for k in 1..=d.window().max() - 2 {
        let g = homology_group(&p, k)?;
        for (j, f) in g.factors().iter().enumerate() {
            if cells == budget {
                return Err(PostnikovError::CellBudget(budget));
            }
            cells += 1;
            let label = format!("kill{}_{j}", k + 1);
            p = attach_chain_cell(&p, &label, k + 1, &f.representative)?.0;
            log.push(format!("kill: degree {} cell {label} bounds a generator of H_{k} = {}", k + 1, g.describe()));
        }
    }
    let i = DgaMorphism::inclusion(d, &p)?;
    Ok((p, i, log))
}

/// `D -> D'' -> P`: for each cell `c` of `P` not in `D`, a pair `d(s) = t`
/// with `pbar(s) = c`, `pbar(t) = d(c)`.
pub fn factor_mono_epi(
    d: &DgaPresentation,
    p: &DgaPresentation,
) -> Result<(DgaPresentation, DgaMorphism, DgaMorphism), PostnikovError> {
    let ring = d.ring();
    let mut dd = d.clone();
    let mut extra: BTreeMap<Degree, Vec<Vec<PAdicInt>>> = BTreeMap::new();
    for n in d.window().degrees() {
        for idx in d.basis_size(n)..p.basis_size(n) {
            let c = p.basis_element(n, idx);
            let dc = p.differential(&c)?;
            let zero = dd.zero(n - 2);
            let (next, t) = attach_chain_cell(&dd, &format!("t{n}_{idx}"), n - 1, &zero)?;
            let tz = next.basis_element(t.0, t.1);
            dd = attach_chain_cell(&next, &format!("s{n}_{idx}"), n, &tz)?.0;
            extra.entry(n - 1).or_default().push(dc.coords);
            extra.entry(n).or_default().push(c.coords);
        }
    }
    let mut per_degree = BTreeMap::new();
    for n in d.window().degrees() {
        let rows = p.basis_size(n);
        let mut cols: Vec<Vec<PAdicInt>> = (0..d.basis_size(n))
            .map(|j| {
                let mut v = vec![ring.zero(); rows];
                v[j] = ring.one();
                v
            })
            .collect();
        cols.extend(extra.remove(&n).unwrap_or_default());
        per_degree.insert(n, RingMatrix::from_columns(ring, rows, &cols));
    }
    let pbar = DgaMorphism::new(&dd, p, per_degree)?;
    let j = DgaMorphism::inclusion(d, &dd)?;
    Ok((dd, j, pbar))
}

/// `h: Q -> P` is a quasi-isomorphism in degrees `<= 0` exactly when `H_0`
/// is free on the unit and `d` vanishes on degree 0.
pub fn check_truncation(d: &DgaPresentation) -> Result<(), PostnikovError> {
    if d.differential_matrix(0).is_some_and(|m| !m.is_zero()) {
        return Err(PostnikovError::DegreeZeroDifferential);
    }
    let table = HomologyTable::new(d);
    let h0 = table.group(0)?;
    let on_unit = h0.orders() == [FactorOrder::Free] && table.class_of(&d.unit())?.coords[0].is_unit();
    if !on_unit {
        return Err(PostnikovError::DegreeZeroHomology(h0.describe()));
    }
    Ok(())
}

/// `D' = D'' x_P Q`: `ker pbar` in positive degrees, the unit in degree 0,
/// `D` below. Returns `D'` and its projection to `D''`.
pub fn pullback(
    d: &DgaPresentation,
    dd: &DgaPresentation,
    pbar: &DgaMorphism,
) -> Result<(DgaPresentation, DgaMorphism), PostnikovError> {
    let ring = d.ring();
    let w = d.window();
    let mut basis = BTreeMap::new();
    let mut kernels: BTreeMap<Degree, Vec<Vec<PAdicInt>>> = BTreeMap::new();
    let mut v_inv: BTreeMap<Degree, (RingMatrix, usize)> = BTreeMap::new();
    for n in w.degrees().filter(|&n| n > 0) {
        let snf = smith_normal_form(pbar.matrix(n));
        if snf.rank() < pbar.matrix(n).rows() || snf.diagonal_exponents.iter().any(|&e| e > 0) {
            return Err(PostnikovError::NotOnto(n));
        }
        let k = snf.free_kernel_columns();
        basis.insert(n, (0..k.len()).map(|j| format!("k{n}_{j}")).collect::<Vec<_>>());
        kernels.insert(n, k);
        v_inv.insert(n, (snf.v_inv.clone(), snf.rank()));
    }
    basis.insert(0, vec![d.labels(0)[d.unit_index()].clone()]);
    for n in w.degrees().filter(|&n| n < 0) {
        basis.insert(n, d.labels(n).to_vec());
    }

    let mut differential = BTreeMap::new();
    for n in w.min() + 1..=w.max() {
        if n < 0 {
            differential.insert(n, d.differential_matrix(n).expect("d_n").clone());
            continue;
        }
        if n == 0 {
            continue;
        }
        let d_n = dd.differential_matrix(n).expect("d_n");
        let mut cols = Vec::new();
        for kcol in &kernels[&n] {
            let y = d_n.apply(kcol)?;
            if n == 1 {
                if y.iter().any(|c| !c.is_zero()) {
                    return Err(PostnikovError::KernelNotClosed(n));
                }
                cols.push(vec![ring.zero()]);
                continue;
            }
            let (vi, rank) = &v_inv[&(n - 1)];
            let coords = vi.apply(&y)?;
            if coords[..*rank].iter().any(|c| !c.is_zero()) {
                return Err(PostnikovError::KernelNotClosed(n));
            }
            cols.push(coords[*rank..].to_vec());
        }
        let rows = basis.get(&(n - 1)).map_or(0, |v: &Vec<String>| v.len());
        differential.insert(n, RingMatrix::from_columns(ring, rows, &cols));
    }

    let negative = |&(da, _, db, _): &(Degree, usize, Degree, usize)| da < 0 && db < 0;
    let product = d.product.iter().filter(|(k, _)| negative(k)).map(|(k, v)| (*k, v.clone())).collect();
    let clipped: BTreeSet<_> = d.clipped.iter().copied().filter(negative).collect();
    let chain_cells: BTreeSet<_> =
        basis.iter().filter(|(&n, _)| n > 0).flat_map(|(&n, v)| (0..v.len()).map(move |j| (n, j))).collect();
    let normalized = DgaPresentation::from_parts(ring, w, basis, differential, product, 0, chain_cells, clipped)?;

    let mut per_degree = BTreeMap::new();
    for n in w.degrees() {
        let rows = dd.basis_size(n);
        let m = if n > 0 {
            RingMatrix::from_columns(ring, rows, &kernels[&n])
        } else if n == 0 {
            RingMatrix::from_columns(ring, rows, &[dd.unit().coords])
        } else {
            RingMatrix::identity(ring, rows)
        };
        per_degree.insert(n, m);
    }
    let projection = DgaMorphism::new(&normalized, dd, per_degree)?;
    Ok((normalized, projection))
}

/// The same presentation on `[min, max]`; products leaving it are clipped by the window.
fn restrict_top(d: &DgaPresentation, max: Degree) -> Result<DgaPresentation, PostnikovError> {
    let w = DegreeWindow::new(d.window().min(), max)?;
    let basis = d.basis.iter().filter(|(&n, _)| n <= max).map(|(&n, v)| (n, v.clone())).collect();
    let differential = d.differential.iter().filter(|(&n, _)| n <= max).map(|(&n, m)| (n, m.clone())).collect();
    let inside = |&(da, _, db, _): &(Degree, usize, Degree, usize)| da <= max && db <= max && da + db <= max;
    let product = d.product.iter().filter(|(k, _)| inside(k)).map(|(k, v)| (*k, v.clone())).collect();
    let clipped = d.clipped.iter().copied().filter(inside).collect();
    let cells = d.chain_cells.iter().copied().filter(|&(n, _)| n <= max).collect();
    Ok(DgaPresentation::from_parts(d.ring(), w, basis, differential, product, d.unit_index(), cells, clipped)?)
}

/// Run the whole construction and certify what can be certified at chain level.
pub fn normalize_degree_zero(d: &DgaPresentation, budget: usize) -> Result<PostnikovResult, PostnikovError> {
    check_truncation(d)?;
    let (p, _, mut log) = kill_positive_homology(d, budget)?;
    let (dd, j, pbar) = factor_mono_epi(d, &p)?;
    log.push(format!(
        "factor: {} acyclic pairs, pbar onto",
        (dd.total_dimension() - d.total_dimension()) / 2
    ));
    let (normalized, projection) = pullback(d, &dd, &pbar)?;

    let top = d.window().max() - 3;
    let mut killed = Sweep::new("killed-positive-homology");
    for k in 1..=d.window().max() - 2 {
        killed.checked += 1;
        match homology_group(&p, k) {
            Ok(g) if g.is_trivial() => {}
            Ok(g) => killed.failures.push(format!("H_{k}(P) = {}", g.describe())),
            Err(e) => killed.failures.push(format!("H_{k}(P): {e}")),
        }
    }
    let mut positive_vanishing = Sweep::new("positive-homology-vanishes");
    let table = HomologyTable::new(&normalized);
    for n in 1..=top {
        positive_vanishing.checked += 1;
        match table.group(n) {
            Ok(g) if g.is_trivial() => {}
            Ok(g) => positive_vanishing.failures.push(format!("H_{n}(D') = {}", g.describe())),
            Err(e) => positive_vanishing.failures.push(format!("H_{n}(D'): {e}")),
        }
    }
    let certificate = PostnikovCertificate {
        degree0_is_unit: normalized.basis_size(0) == 1,
        killed,
        extension_iso: check_homology_iso_on(&j, |_| true, "extension-iso"),
        projection_chain_map: check_chain_map(&projection),
        nonpositive_iso: check_homology_iso_on(&projection, |n| n <= 0, "nonpositive-homology-iso"),
        positive_vanishing,
        positive_matches_input: check_homology_iso_on(
            &projection,
            |n| (1..=top).contains(&n),
            "positive-homology-matches-input",
        ),
    };
    let cut = restrict_top(&normalized, d.window().max() - 2)?;
    Ok(PostnikovResult { normalized: cut, pullback: normalized, killing: p, extension: dd, projection, certificate, log })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dga::{build_test_dga_c, DegreeWindow};
    use crate::padic::Ring;

    fn c() -> DgaPresentation {
        build_test_dga_c(Ring::new(3, 4).unwrap(), DegreeWindow::new(-16, 16).unwrap()).unwrap()
    }

    #[test]
    fn killing_cells_clear_positive_homology() {
        let c = c();
        let (p, i, log) = kill_positive_homology(&c, 100).unwrap();
        assert!(!log.is_empty());
        for k in 1..=14 {
            assert!(homology_group(&p, k).unwrap().is_trivial(), "H_{k}");
        }
        assert!(check_chain_map(&i).passed());
    }

    #[test]
    fn pbar_is_an_onto_chain_map() {
        let c = c();
        let (p, _, _) = kill_positive_homology(&c, 100).unwrap();
        let (_, j, pbar) = factor_mono_epi(&c, &p).unwrap();
        assert!(check_chain_map(&pbar).passed());
        assert!(check_chain_map(&j).passed());
    }

    #[test]
    fn normalized_keeps_homology_but_not_vanishing() {
        let r = normalize_degree_zero(&c(), 100).unwrap();
        let cert = &r.certificate;
        assert!(cert.degree0_is_unit);
        assert!(cert.killed.passed(), "{}", cert.killed);
        assert!(cert.extension_iso.passed(), "{}", cert.extension_iso);
        assert!(cert.projection_chain_map.passed());
        assert!(cert.nonpositive_iso.passed(), "{}", cert.nonpositive_iso);
        assert!(cert.positive_matches_input.passed(), "{}", cert.positive_matches_input);
        // H_3 = Z/3 survives: the pullback is quasi-isomorphic to D
        assert!(!cert.positive_vanishing.passed());
        assert!(cert.positive_vanishing.failures[0].starts_with("H_3(D') = Z/3"));
    }

    #[test]
    fn budget_is_enforced() {
        assert!(matches!(kill_positive_homology(&c(), 1), Err(PostnikovError::CellBudget(1))));
    }
}
