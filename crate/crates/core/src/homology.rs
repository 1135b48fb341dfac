//! Degreewise homology as a sum of cyclic p-groups, with representative
//! cycles and coordinates for classes.
//!
//! The complex is read as the reduction of a complex of free `Z_p`-modules:
//! the kernel of `d_n` is spanned by the SNF columns with a zero diagonal
//! entry. Elements such as `p^(N-1) * x` with `d(x) = p * e` are cycles mod
//! `p^N` only because of truncation and are not counted.

use std::cell::RefCell;
use std::collections::BTreeMap;
use std::fmt;
use std::rc::Rc;

use thiserror::Error;

use crate::dga::{build_test_dga_c, Degree, DegreeWindow, DgaError, DgaPresentation, Element};
use crate::matrix::{smith_normal_form, MatrixError, RingMatrix};
use crate::padic::{nu, PAdicInt, Ring};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum HomologyError {
    #[error("degree {degree} is not in the inner window ({min}, {max}): homology is not certified there")]
    BoundaryDegree { degree: Degree, min: Degree, max: Degree },
    #[error("precision insufficient in degree {degree}: boundaries leave the cycle space mod p^N; increase N")]
    PrecisionSaturated { degree: Degree },
    #[error("element of degree {degree} is not a cycle")]
    NotACycle { degree: Degree },
    #[error("class has degree {got}, group has degree {expected}")]
    DegreeMismatch { expected: Degree, got: Degree },
    #[error(transparent)]
    Dga(#[from] DgaError),
    #[error(transparent)]
    Matrix(#[from] MatrixError),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum FactorOrder {
    /// `Z/p^e`, `e >= 1`.
    Torsion(u32),
    Free,
}

impl FactorOrder {
    /// log_p of the factor's size over `Z/p^N` (a free factor counts as `N`).
    pub fn log_size(&self, precision: u32) -> u32 {
        match self {
            FactorOrder::Torsion(e) => *e,
            FactorOrder::Free => precision,
        }
    }
}

/// Order of a single class: least `k` with `p^k c = 0`, or free.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
pub enum ClassOrder {
    Exponent(u32),
    Free,
}

/// `"0"`, `"Z/9"`, `"Z_3"`, `"Z/3 + Z/27"`.
pub fn describe_orders(p: u64, orders: &[FactorOrder]) -> String {
    if orders.is_empty() {
        return "0".to_string();
    }
    orders
        .iter()
        .map(|o| match o {
            FactorOrder::Torsion(e) => format!("Z/{}", p.pow(*e)),
            FactorOrder::Free => format!("Z_{p}"),
        })
        .collect::<Vec<_>>()
        .join(" + ")
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Factor {
    pub order: FactorOrder,
    pub representative: Element,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct HomologyGroup {
    degree: Degree,
    ring: Ring,
    factors: Vec<Factor>,
    /// Chain coordinates -> class coordinates (before reduction).
    projection: RingMatrix,
}

/// A class, with coordinate `k` reduced mod `p^e_k` on torsion factors.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct HomologyClass {
    pub degree: Degree,
    pub coords: Vec<PAdicInt>,
    pub orders: Vec<FactorOrder>,
}

/// Torsion coordinates use the symmetric lift, so `-1` stays `-1` and the
/// section of `[-e]` is `-e` rather than `(p-1) e`.
fn reduce_mod(c: PAdicInt, order: FactorOrder) -> PAdicInt {
    match order {
        FactorOrder::Free => c,
        FactorOrder::Torsion(e) => {
            let q = c.ring().prime().pow(e);
            let r = (c.residue() % q) as i64;
            c.ring().reduce(if r > (q / 2) as i64 { r - q as i64 } else { r })
        }
    }
}

impl HomologyClass {
    fn new(degree: Degree, coords: Vec<PAdicInt>, orders: Vec<FactorOrder>) -> Self {
        let coords = coords.into_iter().zip(&orders).map(|(c, o)| reduce_mod(c, *o)).collect();
        HomologyClass { degree, coords, orders }
    }

    pub fn is_zero(&self) -> bool {
        self.coords.iter().all(|c| c.is_zero())
    }

    pub fn add(&self, other: &HomologyClass) -> HomologyClass {
        assert_eq!(self.orders, other.orders, "adding classes of different groups");
        let coords = self.coords.iter().zip(&other.coords).map(|(a, b)| *a + *b).collect();
        HomologyClass::new(self.degree, coords, self.orders.clone())
    }

    pub fn neg(&self) -> HomologyClass {
        HomologyClass::new(self.degree, self.coords.iter().map(|c| -*c).collect(), self.orders.clone())
    }

    pub fn sub(&self, other: &HomologyClass) -> HomologyClass {
        self.add(&other.neg())
    }

    pub fn scale(&self, s: PAdicInt) -> HomologyClass {
        HomologyClass::new(self.degree, self.coords.iter().map(|c| *c * s).collect(), self.orders.clone())
    }

    /// Least `k` with `p^k * self = 0`, or free.
    pub fn order(&self) -> ClassOrder {
        let mut k = 0;
        for (c, o) in self.coords.iter().zip(&self.orders) {
            if c.is_zero() {
                continue;
            }
            match o {
                FactorOrder::Free => return ClassOrder::Free,
                FactorOrder::Torsion(e) => k = k.max(e - c.valuation().min(*e)),
            }
        }
        ClassOrder::Exponent(k)
    }
}

pub fn order_of(c: &HomologyClass) -> ClassOrder {
    c.order()
}

impl fmt::Display for HomologyClass {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let parts: Vec<String> = self.coords.iter().map(|c| c.signed().to_string()).collect();
        write!(f, "({})", parts.join(", "))
    }
}

fn check_inner(dga: &DgaPresentation, n: Degree) -> Result<(), HomologyError> {
    let w = dga.window();
    if !w.contains_inner(n) {
        return Err(HomologyError::BoundaryDegree { degree: n, min: w.min(), max: w.max() });
    }
    Ok(())
}

/// `ker d_n / im d_{n+1}` as a sum of cyclic groups, torsion by increasing
/// order, then free factors.
pub fn homology_group(dga: &DgaPresentation, n: Degree) -> Result<HomologyGroup, HomologyError> {
    check_inner(dga, n)?;
    let ring = dga.ring();
    let dim = dga.basis_size(n);
    let d_n = dga.differential_matrix(n).expect("inner degree has d_n");
    let d_up = dga.differential_matrix(n + 1).expect("inner degree has d_n+1");

    let snf = smith_normal_form(d_n);
    let r = snf.rank();
    let k = dim - r;

    // Kernel coordinates of boundaries: rows r.. of V^-1 * d_{n+1}. A pivot
    // with exponent e fixes the kernel lift only mod p^(N-e), so boundaries
    // may carry pivot components divisible by p^(N-e); those are
    // truncation-only cycles and are dropped. Anything coarser means N is too small.
    let coords = snf.v_inv.mul(d_up)?;
    let mut image = RingMatrix::zeros(ring, k, d_up.cols());
    for j in 0..d_up.cols() {
        for i in 0..dim {
            let c = coords.get(i, j);
            if i < r {
                if c.valuation() < ring.precision() - snf.diagonal_exponents[i] {
                    return Err(HomologyError::PrecisionSaturated { degree: n });
                }
            } else {
                image.set(i - r, j, c);
            }
        }
    }

    let b = smith_normal_form(&image);
    let mut kernel_to_chain = RingMatrix::zeros(ring, dim, k);
    for j in 0..k {
        for i in 0..dim {
            kernel_to_chain.set(i, j, snf.v.get(i, r + j));
        }
    }
    let reps = kernel_to_chain.mul(&b.u_inv)?;

    let mut factors = Vec::new();
    let mut rows = Vec::new();
    for j in 0..k {
        let order = match b.diagonal_exponents.get(j) {
            Some(0) => continue,
            Some(&e) => FactorOrder::Torsion(e),
            None => FactorOrder::Free,
        };
        factors.push(Factor { order, representative: Element { degree: n, coords: reps.column(j) } });
        rows.push(j);
    }

    // chain z -> V^-1 z -> kernel part -> U_B (kernel part) -> selected rows
    let mut projection = RingMatrix::zeros(ring, rows.len(), dim);
    for (out, &j) in rows.iter().enumerate() {
        for c in 0..dim {
            let mut acc = ring.zero();
            for t in 0..k {
                acc += b.u.get(j, t) * snf.v_inv.get(r + t, c);
            }
            projection.set(out, c, acc);
        }
    }
    Ok(HomologyGroup { degree: n, ring, factors, projection })
}

impl HomologyGroup {
    pub fn degree(&self) -> Degree {
        self.degree
    }

    pub fn ring(&self) -> Ring {
        self.ring
    }

    pub fn factors(&self) -> &[Factor] {
        &self.factors
    }

    pub fn orders(&self) -> Vec<FactorOrder> {
        self.factors.iter().map(|f| f.order).collect()
    }

    pub fn is_trivial(&self) -> bool {
        self.factors.is_empty()
    }

    /// log_p of the group's size over `Z/p^N`, free factors counting `N`.
    pub fn log_size(&self) -> u32 {
        self.factors.iter().map(|f| f.order.log_size(self.ring.precision())).sum()
    }

    pub fn describe(&self) -> String {
        describe_orders(self.ring.prime(), &self.orders())
    }

    pub fn zero_class(&self) -> HomologyClass {
        HomologyClass::new(self.degree, vec![self.ring.zero(); self.factors.len()], self.orders())
    }

    /// The class of the `j`-th factor's representative.
    pub fn generator(&self, j: usize) -> HomologyClass {
        let mut c = self.zero_class();
        c.coords[j] = self.ring.one();
        c
    }

    pub fn class_from_coords(&self, coords: &[i64]) -> HomologyClass {
        let coords = coords.iter().map(|&c| self.ring.reduce(c)).collect();
        HomologyClass::new(self.degree, coords, self.orders())
    }

    /// Class of a cycle. Components along truncation-only cycles are dropped.
    pub fn class_of(&self, dga: &DgaPresentation, z: &Element) -> Result<HomologyClass, HomologyError> {
        if z.degree != self.degree {
            return Err(HomologyError::DegreeMismatch { expected: self.degree, got: z.degree });
        }
        if !dga.is_cycle(z)? {
            return Err(HomologyError::NotACycle { degree: z.degree });
        }
        let coords = self.projection.apply(&z.coords)?;
        Ok(HomologyClass::new(self.degree, coords, self.orders()))
    }

    /// The additive section: `sum c_k * representative_k`.
    pub fn section(&self, c: &HomologyClass) -> Result<Element, HomologyError> {
        if c.degree != self.degree {
            return Err(HomologyError::DegreeMismatch { expected: self.degree, got: c.degree });
        }
        let dim = self.projection.cols();
        let mut out = Element::zero(self.ring, self.degree, dim);
        for (coef, f) in c.coords.iter().zip(&self.factors) {
            out = out.add(&f.representative.scale(*coef));
        }
        Ok(out)
    }
}

/// `cycle_section(G)` as a closure over the stored representatives.
pub fn cycle_section(g: &HomologyGroup) -> impl Fn(&HomologyClass) -> Result<Element, HomologyError> + '_ {
    move |c| g.section(c)
}

pub fn class_of(dga: &DgaPresentation, z: &Element) -> Result<HomologyClass, HomologyError> {
    homology_group(dga, z.degree)?.class_of(dga, z)
}

/// Per-degree homology computed on demand and cached.
pub struct HomologyTable<'a> {
    dga: &'a DgaPresentation,
    cache: RefCell<BTreeMap<Degree, Rc<HomologyGroup>>>,
}

impl<'a> HomologyTable<'a> {
    pub fn new(dga: &'a DgaPresentation) -> Self {
        HomologyTable { dga, cache: RefCell::new(BTreeMap::new()) }
    }

    pub fn dga(&self) -> &'a DgaPresentation {
        self.dga
    }

    pub fn group(&self, n: Degree) -> Result<Rc<HomologyGroup>, HomologyError> {
        if let Some(g) = self.cache.borrow().get(&n) {
            return Ok(g.clone());
        }
        let g = Rc::new(homology_group(self.dga, n)?);
        self.cache.borrow_mut().insert(n, g.clone());
        Ok(g)
    }

    pub fn class_of(&self, z: &Element) -> Result<HomologyClass, HomologyError> {
        self.group(z.degree)?.class_of(self.dga, z)
    }

    pub fn section(&self, c: &HomologyClass) -> Result<Element, HomologyError> {
        self.group(c.degree)?.section(c)
    }
}

/// Closed form for the test dga: `Z/p^(nu(m)+1)` in degree `(2p-2)m - 1`,
/// `m != 0`; free in degrees 0 and -1; zero otherwise.
pub fn expected_homology_of_c(p: u64, n: Degree) -> Vec<FactorOrder> {
    let q = 2 * p as i64 - 2;
    if n == 0 || n == -1 {
        return vec![FactorOrder::Free];
    }
    if (n + 1).rem_euclid(q) == 0 {
        let m = (n + 1) / q;
        return vec![FactorOrder::Torsion(nu(m, p) + 1)];
    }
    Vec::new()
}

#[derive(Debug, Clone, PartialEq, Eq, serde::Serialize)]
pub struct TableRow {
    pub degree: Degree,
    pub expected: String,
    pub computed: String,
    pub ok: bool,
}

#[derive(Debug, Clone, PartialEq, Eq, Default, serde::Serialize)]
pub struct TableReport {
    pub rows: Vec<TableRow>,
}

impl TableReport {
    pub fn all_ok(&self) -> bool {
        self.rows.iter().all(|r| r.ok)
    }

    pub fn row(&self, degree: Degree) -> Option<&TableRow> {
        self.rows.iter().find(|r| r.degree == degree)
    }

    pub fn failures(&self) -> impl Iterator<Item = &TableRow> {
        self.rows.iter().filter(|r| !r.ok)
    }
}

impl fmt::Display for TableReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let we = self.rows.iter().map(|r| r.expected.len()).max().unwrap_or(0).max(8);
        let wc = self.rows.iter().map(|r| r.computed.len()).max().unwrap_or(0).max(8);
        writeln!(f, "{:>5} | {:<we$} | {:<wc$} | status", "deg", "expected", "computed")?;
        for r in &self.rows {
            let status = if r.ok { "OK" } else { "FAIL" };
            writeln!(f, "{:>5} | {:<we$} | {:<wc$} | {status}", r.degree, r.expected, r.computed)?;
        }
        Ok(())
    }
}

/// Compare the computed homology of `dga` with `expected` on every inner degree.
pub fn compare_homology(dga: &DgaPresentation, expected: impl Fn(Degree) -> Vec<FactorOrder>) -> TableReport {
    let p = dga.ring().prime();
    let rows = dga
        .window()
        .inner_degrees()
        .map(|n| {
            let want = expected(n);
            let (computed, ok) = match homology_group(dga, n) {
                Ok(g) => (g.describe(), g.orders() == want),
                Err(e) => (format!("error: {e}"), false),
            };
            TableRow { degree: n, expected: describe_orders(p, &want), computed, ok }
        })
        .collect();
    TableReport { rows }
}

pub fn verify_homology_of_c(p: u64, precision: u32, window: DegreeWindow) -> Result<TableReport, HomologyError> {
    let c = build_test_dga_c(Ring::new(p, precision).map_err(DgaError::from)?, window)?;
    Ok(compare_homology(&c, |n| expected_homology_of_c(p, n)))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dga::{build_free_cdga, Expression, FreeCdgaSpec, GeneratorSpec};
    use crate::matrix::solve_linear;

    fn c(p: u64, n: u32, lo: i64, hi: i64) -> DgaPresentation {
        build_test_dga_c(Ring::new(p, n).unwrap(), DegreeWindow::new(lo, hi).unwrap()).unwrap()
    }

    #[test]
    fn groups_of_c() {
        let c = c(3, 4, -30, 30);
        let h3 = homology_group(&c, 3).unwrap();
        assert_eq!(h3.orders(), vec![FactorOrder::Torsion(1)]);
        assert_eq!(h3.class_of(&c, &c.basis_element(3, 0)).unwrap(), h3.generator(0));
        let h11 = homology_group(&c, 11).unwrap();
        assert_eq!(h11.orders(), vec![FactorOrder::Torsion(2)]);
        assert!(homology_group(&c, 1).unwrap().is_trivial());
        assert_eq!(homology_group(&c, 0).unwrap().orders(), vec![FactorOrder::Free]);
        assert_eq!(homology_group(&c, -1).unwrap().orders(), vec![FactorOrder::Free]);
        assert!(homology_group(&c, 4).unwrap().is_trivial());
        assert!(matches!(homology_group(&c, 30), Err(HomologyError::BoundaryDegree { .. })));
    }

    #[test]
    fn class_examples() {
        let c = c(3, 4, -30, 30);
        let ring = c.ring();
        let h3 = homology_group(&c, 3).unwrap();
        let dx = c.differential(&c.basis_element(4, 0)).unwrap();
        assert!(h3.class_of(&c, &dx).unwrap().is_zero());
        assert_eq!(order_of(&h3.class_of(&c, &c.basis_element(3, 0)).unwrap().neg()), ClassOrder::Exponent(1));

        let h11 = homology_group(&c, 11).unwrap();
        let gamma3 = h11.class_of(&c, &c.basis_element(11, 0).scale(ring.reduce(-3))).unwrap();
        assert_eq!(order_of(&gamma3), ClassOrder::Exponent(1));
        assert_eq!(gamma3, h11.generator(0).scale(ring.reduce(-3)));
        assert_eq!(order_of(&h11.class_of(&c, &c.basis_element(11, 0)).unwrap()), ClassOrder::Exponent(2));
        assert_eq!(order_of(&h11.zero_class()), ClassOrder::Exponent(0));

        assert!(matches!(h3.class_of(&c, &c.basis_element(4, 0)), Err(HomologyError::DegreeMismatch { .. })));
        let h4 = homology_group(&c, 4).unwrap();
        assert!(matches!(h4.class_of(&c, &c.basis_element(4, 0)), Err(HomologyError::NotACycle { .. })));
    }

    #[test]
    fn gamma_m_has_order_p() {
        let c = c(3, 4, -40, 40);
        let table = HomologyTable::new(&c);
        for m in (-9..=10).filter(|m| *m != 0) {
            let n = 4 * m - 1;
            let (deg, idx) = (n, 0);
            let z = c.basis_element(deg, idx).scale(c.ring().reduce(-m));
            assert_eq!(table.class_of(&z).unwrap().order(), ClassOrder::Exponent(1), "m = {m}");
        }
    }

    #[test]
    fn section_is_additive_up_to_boundaries() {
        let c = c(3, 4, -30, 30);
        let h = homology_group(&c, 11).unwrap();
        let s = cycle_section(&h);
        assert!(s(&h.zero_class()).unwrap().is_zero());
        let d12 = c.differential_matrix(12).unwrap();
        for a in 0..9 {
            for b in 0..9 {
                let (ca, cb) = (h.class_from_coords(&[a]), h.class_from_coords(&[b]));
                let diff = s(&ca).unwrap().add(&s(&cb).unwrap()).sub(&s(&ca.add(&cb)).unwrap());
                assert!(solve_linear(d12, &diff.coords).unwrap().is_some(), "{a} + {b}");
                let z = s(&ca).unwrap();
                assert!(c.is_cycle(&z).unwrap());
                assert_eq!(h.class_of(&c, &z).unwrap(), ca);
            }
        }
    }

    #[test]
    fn table_matches_closed_form() {
        let report = verify_homology_of_c(3, 4, DegreeWindow::new(-30, 30).unwrap()).unwrap();
        assert!(report.all_ok(), "{report}");
        assert_eq!(report.row(23).unwrap().computed, "Z/9");
        let report = verify_homology_of_c(5, 3, DegreeWindow::new(-20, 20).unwrap()).unwrap();
        assert!(report.all_ok(), "{report}");
        assert_eq!(report.row(7).unwrap().computed, "Z/5");
        assert_eq!(report.row(8).unwrap().computed, "0");
        assert!(report.to_string().contains("    7 | Z/5"));
    }

    #[test]
    fn two_generators_in_one_degree() {
        // a, b in degree 3 with d(s) = 3a + 9b, d(t) = 9b: Z/3 + Z/9 in degree 3
        let ring = Ring::new(3, 4).unwrap();
        let w = DegreeWindow::new(-1, 6).unwrap();
        let spec = FreeCdgaSpec::new(vec![
            GeneratorSpec::new("a", 3, false, Expression::zero()),
            GeneratorSpec::new("b", 3, false, Expression::zero()),
            GeneratorSpec::new("s", 4, false, Expression::parse("3*a + 9*b").unwrap()),
            GeneratorSpec::new("t", 4, false, Expression::parse("9*b").unwrap()),
        ]);
        let d = build_free_cdga(&spec, ring, w).unwrap();
        let h = homology_group(&d, 3).unwrap();
        assert_eq!(h.orders(), vec![FactorOrder::Torsion(1), FactorOrder::Torsion(2)]);
        assert_eq!(h.log_size(), 3);
        for f in h.factors() {
            assert!(d.is_cycle(&f.representative).unwrap());
        }
    }
}
