//! Graded-commutative dgas presented on a finite window of degrees.
//!
//! Grading is homological: `d` lowers degree by one. A presentation stores,
//! per degree, an ordered basis, the differential matrix `C_n -> C_{n-1}`,
//! and structure constants for products of basis elements.

mod axioms;
mod cells;
mod free;
mod io;

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use thiserror::Error;

use crate::matrix::{MatrixError, RingMatrix};
use crate::padic::{PAdicInt, PadicError, Ring};

pub use axioms::{check_associativity, check_dga_axioms, AxiomReport, Violation};
pub use cells::{adjoin_cell, attach_chain_cell};
pub use free::{
    build_free_cdga, build_test_dga_c, nu_max_for_window, required_precision_for_c, test_dga_spec,
    Expression, FreeCdgaSpec, GeneratorSpec, Monomial, Term,
};
pub use io::{parse_dga, parse_free_presentation, parse_input, serialize_dga, serialize_free_presentation};

pub type Degree = i64;

/// A basis element: (degree, index within that degree).
pub type BasisRef = (Degree, usize);

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum DgaError {
    #[error("degree window must satisfy min <= 0 < max, got [{min}, {max}]")]
    InvalidWindow { min: Degree, max: Degree },
    #[error("degree {degree} lies outside the window [{min}, {max}] (window clip)")]
    WindowClip { degree: Degree, min: Degree, max: Degree },
    #[error("product of {a:?} and {b:?} is not modeled in this presentation (clipped)")]
    ClippedProduct { a: BasisRef, b: BasisRef },
    #[error("element of degree {degree} has {got} coordinates, basis has {expected}")]
    Dimension { degree: Degree, expected: usize, got: usize },
    #[error("invertible generator {0} must have even degree")]
    InvertibleOdd(String),
    #[error("generator {0} must have nonzero degree")]
    ZeroDegreeGenerator(String),
    #[error("unknown generator {0}")]
    UnknownGenerator(String),
    #[error("duplicate generator {0}")]
    DuplicateGenerator(String),
    #[error("differential of {name} has a term of degree {got}, expected {expected}")]
    DifferentialDegree { name: String, expected: Degree, got: Degree },
    #[error("negative exponent on non-invertible generator {0}")]
    NegativeExponent(String),
    #[error("differential leaves the truncated basis at monomial {0}")]
    Truncation(String),
    #[error("d^2 != 0 in degree {0}")]
    DSquared(Degree),
    #[error("element is not a cycle")]
    NotACycle,
    #[error("precision too small: need N >= {required}, got {got}")]
    PrecisionTooSmall { required: u32, got: u32 },
    #[error("basis change is not allowed here: {0}")]
    BasisChange(String),
    #[error("axiom check failed: {0}")]
    Axioms(String),
    #[error("parse error: {0}")]
    Parse(String),
    #[error(transparent)]
    Matrix(#[from] MatrixError),
    #[error(transparent)]
    Ring(#[from] PadicError),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct DegreeWindow {
    min: Degree,
    max: Degree,
}

impl DegreeWindow {
    pub fn new(min: Degree, max: Degree) -> Result<Self, DgaError> {
        if min > 0 || max <= 0 {
            return Err(DgaError::InvalidWindow { min, max });
        }
        Ok(DegreeWindow { min, max })
    }

    pub fn min(&self) -> Degree {
        self.min
    }

    pub fn max(&self) -> Degree {
        self.max
    }

    pub fn contains(&self, n: Degree) -> bool {
        self.min <= n && n <= self.max
    }

    /// Degrees where homology is certified: both neighbours are in the window.
    pub fn contains_inner(&self, n: Degree) -> bool {
        self.min < n && n < self.max
    }

    pub fn span(&self) -> Degree {
        self.max - self.min
    }

    pub fn degrees(&self) -> impl Iterator<Item = Degree> {
        self.min..=self.max
    }

    pub fn inner_degrees(&self) -> impl Iterator<Item = Degree> {
        self.min + 1..self.max
    }

    fn clip(&self, n: Degree) -> DgaError {
        DgaError::WindowClip { degree: n, min: self.min, max: self.max }
    }
}

impl fmt::Display for DegreeWindow {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "[{}, {}]", self.min, self.max)
    }
}

/// A homogeneous element: coordinates over the basis of one degree.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Element {
    pub degree: Degree,
    pub coords: Vec<PAdicInt>,
}

impl Element {
    pub fn zero(ring: Ring, degree: Degree, dim: usize) -> Self {
        Element { degree, coords: vec![ring.zero(); dim] }
    }

    pub fn is_zero(&self) -> bool {
        self.coords.iter().all(|c| c.is_zero())
    }

    pub fn scale(&self, s: PAdicInt) -> Element {
        Element { degree: self.degree, coords: self.coords.iter().map(|c| *c * s).collect() }
    }

    pub fn neg(&self) -> Element {
        Element { degree: self.degree, coords: self.coords.iter().map(|c| -*c).collect() }
    }

    pub fn add(&self, other: &Element) -> Element {
        assert_eq!(self.degree, other.degree, "adding elements of different degrees");
        Element {
            degree: self.degree,
            coords: self.coords.iter().zip(&other.coords).map(|(a, b)| *a + *b).collect(),
        }
    }

    pub fn sub(&self, other: &Element) -> Element {
        self.add(&other.neg())
    }

    fn nonzero(&self) -> impl Iterator<Item = (usize, PAdicInt)> + '_ {
        self.coords.iter().copied().enumerate().filter(|(_, c)| !c.is_zero())
    }
}

/// Sparse coordinates over a basis: (index, coefficient), nonzero coefficients only.
pub type SparseVec = Vec<(usize, PAdicInt)>;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DgaPresentation {
    pub(crate) ring: Ring,
    pub(crate) window: DegreeWindow,
    pub(crate) basis: BTreeMap<Degree, Vec<String>>,
    /// `d_n : C_n -> C_{n-1}` for every `n` in `(min, max]`.
    pub(crate) differential: BTreeMap<Degree, RingMatrix>,
    /// Nonzero products of basis pairs whose degree sum is in the window.
    pub(crate) product: BTreeMap<(Degree, usize, Degree, usize), SparseVec>,
    pub(crate) unit: usize,
    /// Basis elements attached as chain-level cells only: their products with
    /// anything but the unit are not modeled.
    pub(crate) chain_cells: BTreeSet<BasisRef>,
    /// In-window basis pairs whose product is not modeled.
    pub(crate) clipped: BTreeSet<(Degree, usize, Degree, usize)>,
}

impl DgaPresentation {
    /// Assemble a presentation from raw parts; shapes are validated but the
    /// dga axioms are not (see [`check_dga_axioms`]).
    #[allow(clippy::too_many_arguments)]
    pub fn from_parts(
        ring: Ring,
        window: DegreeWindow,
        basis: BTreeMap<Degree, Vec<String>>,
        differential: BTreeMap<Degree, RingMatrix>,
        product: BTreeMap<(Degree, usize, Degree, usize), SparseVec>,
        unit: usize,
        chain_cells: BTreeSet<BasisRef>,
        clipped: BTreeSet<(Degree, usize, Degree, usize)>,
    ) -> Result<Self, DgaError> {
        let mut basis: BTreeMap<Degree, Vec<String>> =
            basis.into_iter().filter(|(_, v)| !v.is_empty()).collect();
        for &n in basis.keys() {
            if !window.contains(n) {
                return Err(window.clip(n));
            }
        }
        let unit_dim = basis.get(&0).map_or(0, |v| v.len());
        if unit >= unit_dim {
            return Err(DgaError::Parse(format!("unit index {unit} out of range in degree 0")));
        }
        basis.entry(0).or_default();
        let size = |n: Degree| basis.get(&n).map_or(0, |v| v.len());
        let mut diffs = BTreeMap::new();
        for n in window.min + 1..=window.max {
            let (rows, cols) = (size(n - 1), size(n));
            let m = match differential.get(&n) {
                Some(m) => {
                    if m.rows() != rows || m.cols() != cols {
                        return Err(DgaError::Parse(format!(
                            "differential in degree {n} is {}x{}, basis requires {rows}x{cols}",
                            m.rows(),
                            m.cols()
                        )));
                    }
                    ring.check_same(&m.ring())?;
                    m.clone()
                }
                None => RingMatrix::zeros(ring, rows, cols),
            };
            diffs.insert(n, m);
        }
        for (&(da, ia, db, ib), res) in &product {
            let target = da + db;
            if ia >= size(da) || ib >= size(db) || !window.contains(target) {
                return Err(DgaError::Parse(format!("product entry ({da},{ia})*({db},{ib}) out of range")));
            }
            for (k, c) in res {
                if *k >= size(target) {
                    return Err(DgaError::Parse(format!(
                        "product ({da},{ia})*({db},{ib}) has index {k} beyond degree {target}"
                    )));
                }
                ring.check_same(&c.ring())?;
            }
        }
        let product = product
            .into_iter()
            .map(|(k, v)| (k, v.into_iter().filter(|(_, c)| !c.is_zero()).collect::<SparseVec>()))
            .filter(|(_, v)| !v.is_empty())
            .collect();
        Ok(DgaPresentation { ring, window, basis, differential: diffs, product, unit, chain_cells, clipped })
    }

    pub fn ring(&self) -> Ring {
        self.ring
    }

    pub fn window(&self) -> DegreeWindow {
        self.window
    }

    pub fn unit_index(&self) -> usize {
        self.unit
    }

    pub fn basis_size(&self, n: Degree) -> usize {
        self.basis.get(&n).map_or(0, |v| v.len())
    }

    pub fn labels(&self, n: Degree) -> &[String] {
        self.basis.get(&n).map_or(&[], |v| v.as_slice())
    }

    pub fn total_dimension(&self) -> usize {
        self.basis.values().map(|v| v.len()).sum()
    }

    /// Degrees with a nonempty basis.
    pub fn nonempty_degrees(&self) -> impl Iterator<Item = Degree> + '_ {
        self.basis.iter().filter(|(_, v)| !v.is_empty()).map(|(n, _)| *n)
    }

    pub fn basis_refs(&self) -> impl Iterator<Item = BasisRef> + '_ {
        self.basis.iter().flat_map(|(&n, v)| (0..v.len()).map(move |i| (n, i)))
    }

    pub fn find_label(&self, label: &str) -> Option<BasisRef> {
        self.basis_refs().find(|&(n, i)| self.basis[&n][i] == label)
    }

    pub fn is_chain_cell(&self, b: BasisRef) -> bool {
        self.chain_cells.contains(&b)
    }

    pub fn chain_cells(&self) -> &BTreeSet<BasisRef> {
        &self.chain_cells
    }

    pub fn clipped_pairs(&self) -> &BTreeSet<(Degree, usize, Degree, usize)> {
        &self.clipped
    }

    /// The stored `d_n`, for `n` in `(min, max]`.
    pub fn differential_matrix(&self, n: Degree) -> Option<&RingMatrix> {
        self.differential.get(&n)
    }

    pub fn zero(&self, n: Degree) -> Element {
        Element::zero(self.ring, n, self.basis_size(n))
    }

    pub fn basis_element(&self, n: Degree, i: usize) -> Element {
        let mut e = self.zero(n);
        e.coords[i] = self.ring.one();
        e
    }

    pub fn unit(&self) -> Element {
        self.basis_element(0, self.unit)
    }

    pub fn element(&self, n: Degree, ints: &[i64]) -> Result<Element, DgaError> {
        let e = Element { degree: n, coords: ints.iter().map(|&k| self.ring.reduce(k)).collect() };
        self.check_element(&e)?;
        Ok(e)
    }

    pub fn check_element(&self, e: &Element) -> Result<(), DgaError> {
        if !self.window.contains(e.degree) {
            return Err(self.window.clip(e.degree));
        }
        let expected = self.basis_size(e.degree);
        if e.coords.len() != expected {
            return Err(DgaError::Dimension { degree: e.degree, expected, got: e.coords.len() });
        }
        Ok(())
    }

    /// Product of two basis elements.
    pub fn basis_product(&self, a: BasisRef, b: BasisRef) -> Result<SparseVec, DgaError> {
        let target = a.0 + b.0;
        if !self.window.contains(target) {
            return Err(self.window.clip(target));
        }
        if a == (0, self.unit) {
            return Ok(vec![(b.1, self.ring.one())]);
        }
        if b == (0, self.unit) {
            return Ok(vec![(a.1, self.ring.one())]);
        }
        let key = (a.0, a.1, b.0, b.1);
        if self.chain_cells.contains(&a) || self.chain_cells.contains(&b) || self.clipped.contains(&key) {
            return Err(DgaError::ClippedProduct { a, b });
        }
        Ok(self.product.get(&key).cloned().unwrap_or_default())
    }

    pub fn multiply(&self, u: &Element, v: &Element) -> Result<Element, DgaError> {
        self.check_element(u)?;
        self.check_element(v)?;
        let target = u.degree + v.degree;
        if !self.window.contains(target) {
            return Err(self.window.clip(target));
        }
        let mut out = self.zero(target);
        for (i, a) in u.nonzero() {
            for (j, b) in v.nonzero() {
                for (k, c) in self.basis_product((u.degree, i), (v.degree, j))? {
                    out.coords[k] += a * b * c;
                }
            }
        }
        Ok(out)
    }

    pub fn differential(&self, u: &Element) -> Result<Element, DgaError> {
        self.check_element(u)?;
        let d = self.differential.get(&u.degree).ok_or_else(|| self.window.clip(u.degree - 1))?;
        Ok(Element { degree: u.degree - 1, coords: d.apply(&u.coords)? })
    }

    pub fn is_cycle(&self, u: &Element) -> Result<bool, DgaError> {
        Ok(self.differential(u)?.is_zero())
    }

    /// Matrix of left multiplication by `u`, from degree `n` to `|u| + n`.
    pub fn left_multiplication(&self, u: &Element, n: Degree) -> Result<RingMatrix, DgaError> {
        let cols: Result<Vec<_>, _> = (0..self.basis_size(n))
            .map(|j| self.multiply(u, &self.basis_element(n, j)).map(|e| e.coords))
            .collect();
        Ok(RingMatrix::from_columns(self.ring, self.basis_size(u.degree + n), &cols?))
    }

    /// Rewrite the presentation in a new basis. `changes[n] = (T, T^-1)` where
    /// column `j` of `T` gives the new basis vector `j` in old coordinates.
    /// Degrees not listed keep their basis. The unit must be kept fixed.
    pub fn change_basis(
        &self,
        changes: &BTreeMap<Degree, (RingMatrix, RingMatrix)>,
    ) -> Result<DgaPresentation, DgaError> {
        if !self.chain_cells.is_empty() || !self.clipped.is_empty() {
            return Err(DgaError::BasisChange("presentation has unmodeled products".into()));
        }
        let ring = self.ring;
        for (&n, (t, ti)) in changes {
            let dim = self.basis_size(n);
            if t.rows() != dim || t.cols() != dim || ti.rows() != dim || ti.cols() != dim {
                return Err(DgaError::BasisChange(format!("wrong shape in degree {n}")));
            }
            if t.mul(ti)? != RingMatrix::identity(ring, dim) {
                return Err(DgaError::BasisChange(format!("matrices in degree {n} are not inverse")));
            }
            if n == 0 && t.column(self.unit) != self.unit().coords {
                return Err(DgaError::BasisChange("unit basis vector must be fixed".into()));
            }
        }
        let fwd = |n: Degree| changes.get(&n).map(|(t, _)| t.clone());
        let back = |n: Degree| changes.get(&n).map(|(_, ti)| ti.clone());

        let mut basis = BTreeMap::new();
        for (&n, labels) in &self.basis {
            let new_labels = match changes.get(&n) {
                None => labels.clone(),
                Some((t, _)) => (0..labels.len())
                    .map(|j| {
                        let terms: Vec<(usize, PAdicInt)> =
                            (0..labels.len()).map(|i| (i, t.get(i, j))).filter(|(_, c)| !c.is_zero()).collect();
                        if terms.len() == 1 && terms[0].1 == ring.one() {
                            labels[terms[0].0].clone()
                        } else {
                            let s: Vec<String> = terms
                                .iter()
                                .map(|(i, c)| match c.signed() {
                                    1 => labels[*i].clone(),
                                    -1 => format!("-{}", labels[*i]),
                                    k => format!("{k}*{}", labels[*i]),
                                })
                                .collect();
                            format!("({})", s.join(" + "))
                        }
                    })
                    .collect(),
            };
            basis.insert(n, new_labels);
        }

        let mut differential = BTreeMap::new();
        for (&n, d) in &self.differential {
            let mut m = d.clone();
            if let Some(t) = fwd(n) {
                m = m.mul(&t)?;
            }
            if let Some(ti) = back(n - 1) {
                m = ti.mul(&m)?;
            }
            differential.insert(n, m);
        }

        let to_new = |n: Degree, e: &Element| -> Result<Vec<PAdicInt>, DgaError> {
            Ok(match back(n) {
                Some(ti) => ti.apply(&e.coords)?,
                None => e.coords.clone(),
            })
        };
        let from_new = |n: Degree, j: usize| -> Element {
            match fwd(n) {
                Some(t) => Element { degree: n, coords: t.column(j) },
                None => self.basis_element(n, j),
            }
        };
        let mut product = BTreeMap::new();
        let degrees: Vec<Degree> = self.nonempty_degrees().collect();
        for &da in &degrees {
            for &db in &degrees {
                if !self.window.contains(da + db) {
                    continue;
                }
                for i in 0..self.basis_size(da) {
                    let u = from_new(da, i);
                    for j in 0..self.basis_size(db) {
                        let v = from_new(db, j);
                        let w = self.multiply(&u, &v)?;
                        let coords = to_new(da + db, &w)?;
                        let sparse: SparseVec =
                            coords.into_iter().enumerate().filter(|(_, c)| !c.is_zero()).collect();
                        if !sparse.is_empty() {
                            product.insert((da, i, db, j), sparse);
                        }
                    }
                }
            }
        }
        DgaPresentation::from_parts(
            ring,
            self.window,
            basis,
            differential,
            product,
            self.unit,
            BTreeSet::new(),
            BTreeSet::new(),
        )
    }
}

/// Element of the form `sum c_i * label_i`, for reports.
pub fn format_element(a: &DgaPresentation, e: &Element) -> String {
    let terms: Vec<String> = e
        .coords
        .iter()
        .enumerate()
        .filter(|(_, c)| !c.is_zero())
        .map(|(i, c)| {
            let label = &a.labels(e.degree)[i];
            match c.signed() {
                1 => label.clone(),
                -1 => format!("-{label}"),
                k => format!("{k}*{label}"),
            }
        })
        .collect();
    if terms.is_empty() {
        "0".to_string()
    } else {
        terms.join(" + ").replace("+ -", "- ")
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn window_validation() {
        assert!(DegreeWindow::new(-3, 3).is_ok());
        assert!(DegreeWindow::new(0, 1).is_ok());
        assert!(DegreeWindow::new(1, 3).is_err());
        assert!(DegreeWindow::new(-3, 0).is_err());
        let w = DegreeWindow::new(-2, 2).unwrap();
        assert_eq!(w.inner_degrees().collect::<Vec<_>>(), vec![-1, 0, 1]);
    }

    #[test]
    fn c_multiplication_examples() {
        let ring = Ring::new(3, 4).unwrap();
        let c = build_test_dga_c(ring, DegreeWindow::new(-30, 30).unwrap()).unwrap();
        let e = c.basis_element(3, 0);
        let x = c.basis_element(4, 0);
        let ex_inv = c.basis_element(-1, 0);
        assert_eq!(c.labels(-1), ["e*x^-1"]);
        assert!(c.multiply(&e, &e).unwrap().is_zero());
        assert_eq!(c.multiply(&x, &ex_inv).unwrap(), e);
        assert_eq!(c.multiply(&ex_inv, &x).unwrap(), e);
        assert_eq!(c.multiply(&c.unit(), &x).unwrap(), x);
        let far = c.basis_element(28, 0);
        assert!(matches!(c.multiply(&far, &x), Err(DgaError::WindowClip { degree: 32, .. })));
    }

    #[test]
    fn c_differential_examples() {
        let ring = Ring::new(3, 4).unwrap();
        let c = build_test_dga_c(ring, DegreeWindow::new(-30, 30).unwrap()).unwrap();
        assert!(c.differential(&c.unit()).unwrap().is_zero());
        let x3 = c.basis_element(12, 0);
        let dx3 = c.differential(&x3).unwrap();
        assert_eq!(c.labels(11), ["e*x^2"]);
        assert_eq!(dx3.coords[0].signed(), 9);
        assert_eq!(dx3.coords[0].valuation(), 2);
        for n in c.nonempty_degrees().filter(|n| n.rem_euclid(4) == 3) {
            let ex = c.basis_element(n, 0);
            assert!(c.differential(&ex).unwrap().is_zero(), "d(e x^m) != 0 in degree {n}");
        }
        let bottom = c.basis_element(-32 + 4, 0);
        assert!(c.differential(&bottom).is_ok());
    }

    #[test]
    fn change_basis_round_trip() {
        let ring = Ring::new(3, 3).unwrap();
        let c = build_test_dga_c(ring, DegreeWindow::new(-12, 12).unwrap()).unwrap();
        let mut changes = BTreeMap::new();
        let t = RingMatrix::from_ints(ring, 1, 1, &[2]).unwrap();
        let ti = RingMatrix::new(ring, 1, 1, vec![ring.reduce(2).inverse().unwrap()]).unwrap();
        changes.insert(4, (t.clone(), ti.clone()));
        let c2 = c.change_basis(&changes).unwrap();
        assert!(check_dga_axioms(&c2).is_empty());
        // d(2x) = 6e, so d_4 becomes [6].
        assert_eq!(c2.differential_matrix(4).unwrap().get(0, 0).signed(), 6);
        let mut back = BTreeMap::new();
        back.insert(4, (ti, t));
        let c3 = c2.change_basis(&back).unwrap();
        assert_eq!(c3.differential, c.differential);
        assert_eq!(c3.product, c.product);
    }
}
