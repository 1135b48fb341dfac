use std::fmt;

use super::{BasisRef, DgaError, DgaPresentation, Element};

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Violation {
    /// `d(d(b)) != 0` for basis element `b`.
    DSquared { element: BasisRef },
    Leibniz { a: BasisRef, b: BasisRef },
    Commutativity { a: BasisRef, b: BasisRef },
    Unit { element: BasisRef },
    Associativity { a: BasisRef, b: BasisRef, c: BasisRef },
}

impl Violation {
    pub fn degree(&self) -> i64 {
        match self {
            Violation::DSquared { element } | Violation::Unit { element } => element.0,
            Violation::Leibniz { a, b } | Violation::Commutativity { a, b } => a.0 + b.0,
            Violation::Associativity { a, b, c } => a.0 + b.0 + c.0,
        }
    }
}

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct AxiomReport {
    pub violations: Vec<Violation>,
    /// Instances skipped because they involve clipped products.
    pub skipped: usize,
    pub checked: usize,
}

impl AxiomReport {
    pub fn is_empty(&self) -> bool {
        self.violations.is_empty()
    }

    pub fn summary(&self, dga: &DgaPresentation) -> String {
        match self.violations.first() {
            None => format!("all {} axiom instances hold ({} skipped as clipped)", self.checked, self.skipped),
            Some(v) => format!("{} violation(s), first: {}", self.violations.len(), v.describe(dga)),
        }
    }
}

impl Violation {
    pub fn describe(&self, dga: &DgaPresentation) -> String {
        let name = |b: &BasisRef| dga.labels(b.0)[b.1].clone();
        match self {
            Violation::DSquared { element } => {
                format!("d^2 != 0 in degree {} on {}", element.0, name(element))
            }
            Violation::Leibniz { a, b } => format!("Leibniz fails at pair ({}, {})", name(a), name(b)),
            Violation::Commutativity { a, b } => {
                format!("graded commutativity fails at pair ({}, {})", name(a), name(b))
            }
            Violation::Unit { element } => format!("unit law fails on {}", name(element)),
            Violation::Associativity { a, b, c } => {
                format!("associativity fails at ({}, {}, {})", name(a), name(b), name(c))
            }
        }
    }
}

impl fmt::Display for AxiomReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} violations, {} checked, {} skipped", self.violations.len(), self.checked, self.skipped)
    }
}

fn sign(n: i64) -> bool {
    n.rem_euclid(2) == 1
}

/// Quantified sweep of `d^2 = 0`, Leibniz, graded commutativity and the unit
/// law over every in-window basis element and pair.
pub fn check_dga_axioms(dga: &DgaPresentation) -> AxiomReport {
    let mut report = AxiomReport::default();
    let w = dga.window();
    let refs: Vec<BasisRef> = dga.basis_refs().collect();

    for &b in &refs {
        if !w.contains(b.0 - 2) {
            continue;
        }
        report.checked += 1;
        let e = dga.basis_element(b.0, b.1);
        let dd = dga.differential(&e).and_then(|d| dga.differential(&d));
        if !dd.map(|x| x.is_zero()).unwrap_or(true) {
            report.violations.push(Violation::DSquared { element: b });
        }
    }

    let unit = dga.unit();
    for &b in &refs {
        let e = dga.basis_element(b.0, b.1);
        report.checked += 1;
        let left = dga.multiply(&unit, &e);
        let right = dga.multiply(&e, &unit);
        if left.as_ref() != Ok(&e) || right.as_ref() != Ok(&e) {
            report.violations.push(Violation::Unit { element: b });
        }
    }

    for &a in &refs {
        for &b in &refs {
            if !w.contains(a.0 + b.0) {
                continue;
            }
            let ea = dga.basis_element(a.0, a.1);
            let eb = dga.basis_element(b.0, b.1);

            match (dga.multiply(&ea, &eb), dga.multiply(&eb, &ea)) {
                (Ok(ab), Ok(ba)) => {
                    report.checked += 1;
                    let ba = if sign(a.0 * b.0) { ba.neg() } else { ba };
                    if ab != ba {
                        report.violations.push(Violation::Commutativity { a, b });
                    }
                }
                _ => report.skipped += 1,
            }

            if !w.contains(a.0 + b.0 - 1) || !w.contains(a.0 - 1) || !w.contains(b.0 - 1) {
                continue;
            }
            match leibniz_holds(dga, &ea, &eb) {
                Ok(true) => report.checked += 1,
                Ok(false) => {
                    report.checked += 1;
                    report.violations.push(Violation::Leibniz { a, b });
                }
                Err(_) => report.skipped += 1,
            }
        }
    }
    report
}

fn leibniz_holds(dga: &DgaPresentation, a: &Element, b: &Element) -> Result<bool, DgaError> {
    let lhs = dga.differential(&dga.multiply(a, b)?)?;
    let da_b = dga.multiply(&dga.differential(a)?, b)?;
    let a_db = dga.multiply(a, &dga.differential(b)?)?;
    let rhs = if sign(a.degree) { da_b.sub(&a_db) } else { da_b.add(&a_db) };
    Ok(lhs == rhs)
}

/// Associativity sweep over all basis triples with every partial product in
/// the window. Quadratic in pairs, so kept separate from the main check.
pub fn check_associativity(dga: &DgaPresentation) -> AxiomReport {
    let mut report = AxiomReport::default();
    let w = dga.window();
    let refs: Vec<BasisRef> = dga.basis_refs().collect();
    for &a in &refs {
        for &b in &refs {
            if !w.contains(a.0 + b.0) {
                continue;
            }
            for &c in &refs {
                if !w.contains(b.0 + c.0) || !w.contains(a.0 + b.0 + c.0) {
                    continue;
                }
                let (ea, eb, ec) = (
                    dga.basis_element(a.0, a.1),
                    dga.basis_element(b.0, b.1),
                    dga.basis_element(c.0, c.1),
                );
                let left = dga.multiply(&ea, &eb).and_then(|ab| dga.multiply(&ab, &ec));
                let right = dga.multiply(&eb, &ec).and_then(|bc| dga.multiply(&ea, &bc));
                match (left, right) {
                    (Ok(l), Ok(r)) => {
                        report.checked += 1;
                        if l != r {
                            report.violations.push(Violation::Associativity { a, b, c });
                        }
                    }
                    _ => report.skipped += 1,
                }
            }
        }
    }
    report
}
