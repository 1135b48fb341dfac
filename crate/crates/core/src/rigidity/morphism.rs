//! Maps of presentations and their certification.

use std::collections::BTreeMap;
use std::fmt;

use serde::Serialize;

use crate::dga::{format_element, Degree, DgaError, DgaPresentation, Element};
use crate::homology::HomologyTable;
use crate::massey::subgroup_log_size;
use crate::matrix::RingMatrix;

/// A degreewise linear map; `per_degree[n]` is `target_dim(n) x source_dim(n)`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DgaMorphism {
    pub source: DgaPresentation,
    pub target: DgaPresentation,
    pub per_degree: BTreeMap<Degree, RingMatrix>,
    /// Images of named generators, for maps out of free presentations.
    pub generator_images: Option<BTreeMap<String, Element>>,
}

impl DgaMorphism {
    pub fn new(
        source: &DgaPresentation,
        target: &DgaPresentation,
        per_degree: BTreeMap<Degree, RingMatrix>,
    ) -> Result<Self, DgaError> {
        source.ring().check_same(&target.ring())?;
        if source.window() != target.window() {
            return Err(DgaError::Parse(format!(
                "source window {} differs from target window {}",
                source.window(),
                target.window()
            )));
        }
        let ring = source.ring();
        let mut full = BTreeMap::new();
        for n in source.window().degrees() {
            let (rows, cols) = (target.basis_size(n), source.basis_size(n));
            let m = match per_degree.get(&n) {
                Some(m) if m.rows() == rows && m.cols() == cols => m.clone(),
                Some(m) => {
                    return Err(DgaError::Parse(format!(
                        "map in degree {n} is {}x{}, expected {rows}x{cols}",
                        m.rows(),
                        m.cols()
                    )))
                }
                None => RingMatrix::zeros(ring, rows, cols),
            };
            full.insert(n, m);
        }
        Ok(DgaMorphism { source: source.clone(), target: target.clone(), per_degree: full, generator_images: None })
    }

    pub fn identity(dga: &DgaPresentation) -> Self {
        let per_degree = dga.window().degrees().map(|n| (n, RingMatrix::identity(dga.ring(), dga.basis_size(n)))).collect();
        DgaMorphism::new(dga, dga, per_degree).expect("identity shapes")
    }

    /// The map sending source basis vector `j` of each degree to target basis
    /// vector `j`: target bases extend source bases.
    pub fn inclusion(source: &DgaPresentation, target: &DgaPresentation) -> Result<Self, DgaError> {
        let ring = source.ring();
        let mut per_degree = BTreeMap::new();
        for n in source.window().degrees() {
            let (rows, cols) = (target.basis_size(n), source.basis_size(n));
            if rows < cols {
                return Err(DgaError::Parse(format!("degree {n}: target smaller than source")));
            }
            let mut m = RingMatrix::zeros(ring, rows, cols);
            for j in 0..cols {
                m.set(j, j, ring.one());
            }
            per_degree.insert(n, m);
        }
        DgaMorphism::new(source, target, per_degree)
    }

    pub fn matrix(&self, n: Degree) -> &RingMatrix {
        &self.per_degree[&n]
    }

    pub fn apply(&self, e: &Element) -> Result<Element, DgaError> {
        self.source.check_element(e)?;
        Ok(Element { degree: e.degree, coords: self.per_degree[&e.degree].apply(&e.coords)? })
    }

    pub fn scale(&self, s: crate::padic::PAdicInt) -> Self {
        let mut out = self.clone();
        for m in out.per_degree.values_mut() {
            *m = m.scale(s);
        }
        out
    }
}

/// One quantified sweep: how many instances were checked, skipped as
/// unmodeled, and which failed.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Sweep {
    pub name: String,
    pub checked: usize,
    pub skipped: usize,
    pub failures: Vec<String>,
}

impl Sweep {
    pub(crate) fn new(name: &str) -> Self {
        Sweep { name: name.to_string(), checked: 0, skipped: 0, failures: Vec::new() }
    }

    /// Certified: nothing failed and nothing was left unchecked.
    pub fn passed(&self) -> bool {
        self.failures.is_empty() && self.skipped == 0
    }

    pub fn detail(&self) -> String {
        if let Some(first) = self.failures.first() {
            let more = self.failures.len() - 1;
            if more > 0 {
                format!("{first} (+{more} more)")
            } else {
                first.clone()
            }
        } else if self.skipped > 0 {
            format!("{} checked, {} instances not modeled", self.checked, self.skipped)
        } else {
            format!("{} instances checked", self.checked)
        }
    }
}

impl fmt::Display for Sweep {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let status = if self.passed() { "PASS" } else { "FAIL" };
        write!(f, "STEP {}: {status} — {}", self.name, self.detail())
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct CertReport {
    pub chain_map: Sweep,
    pub multiplicativity: Sweep,
    pub homology_iso: Sweep,
}

impl CertReport {
    pub fn passed(&self) -> bool {
        self.chain_map.passed() && self.multiplicativity.passed() && self.homology_iso.passed()
    }

    pub fn sweeps(&self) -> [&Sweep; 3] {
        [&self.chain_map, &self.multiplicativity, &self.homology_iso]
    }
}

impl fmt::Display for CertReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for s in self.sweeps() {
            writeln!(f, "{s}")?;
        }
        Ok(())
    }
}

/// `phi d = d phi` in every degree `n` in `(min, max]`.
pub fn check_chain_map(phi: &DgaMorphism) -> Sweep {
    let mut sweep = Sweep::new("chain-map");
    let (s, t) = (&phi.source, &phi.target);
    for n in s.window().min() + 1..=s.window().max() {
        sweep.checked += 1;
        let left = phi.matrix(n - 1).mul(s.differential_matrix(n).expect("d_n"));
        let right = t.differential_matrix(n).expect("d_n").mul(phi.matrix(n));
        if left.is_err() || left != right {
            sweep.failures.push(format!("degree {n}: phi d != d phi"));
        }
    }
    sweep
}

/// `phi(1) = 1` and `phi(u v) = phi(u) phi(v)` on every basis pair whose
/// product lies in the window.
pub fn check_multiplicativity(phi: &DgaMorphism) -> Sweep {
    let mut sweep = Sweep::new("multiplicativity");
    let (s, t) = (&phi.source, &phi.target);
    sweep.checked += 1;
    if phi.apply(&s.unit()).ok() != Some(t.unit()) {
        sweep.failures.push("phi(1) != 1".to_string());
    }
    let refs: Vec<_> = s.basis_refs().collect();
    let images: BTreeMap<_, _> =
        refs.iter().map(|&(n, i)| ((n, i), phi.apply(&s.basis_element(n, i)).expect("basis element"))).collect();
    for &a in &refs {
        for &b in &refs {
            if !s.window().contains(a.0 + b.0) {
                continue;
            }
            let uv = match s.multiply(&s.basis_element(a.0, a.1), &s.basis_element(b.0, b.1)) {
                Ok(uv) => uv,
                Err(_) => {
                    sweep.skipped += 1;
                    continue;
                }
            };
            let lhs = phi.apply(&uv).expect("product in window");
            match t.multiply(&images[&a], &images[&b]) {
                Ok(rhs) => {
                    sweep.checked += 1;
                    if lhs != rhs {
                        sweep.failures.push(format!(
                            "pair ({}, {}) in degree {}: phi(uv) = {}, phi(u)phi(v) = {}",
                            s.labels(a.0)[a.1],
                            s.labels(b.0)[b.1],
                            a.0 + b.0,
                            format_element(t, &lhs),
                            format_element(t, &rhs)
                        ));
                    }
                }
                Err(_) => {
                    sweep.skipped += 1;
                    sweep.failures.push(format!(
                        "pair ({}, {}): product of images not modeled in target",
                        s.labels(a.0)[a.1],
                        s.labels(b.0)[b.1]
                    ));
                }
            }
        }
    }
    sweep
}

/// The induced map is an isomorphism in every inner degree: both groups
/// have the same size and the images of the source generators span.
pub fn check_homology_iso(phi: &DgaMorphism) -> Sweep {
    check_homology_iso_on(phi, |_| true, "homology-iso")
}

pub fn check_homology_iso_on(phi: &DgaMorphism, degrees: impl Fn(Degree) -> bool, name: &str) -> Sweep {
    let mut sweep = Sweep::new(name);
    let hs = HomologyTable::new(&phi.source);
    let ht = HomologyTable::new(&phi.target);
    for n in phi.source.window().inner_degrees().filter(|n| degrees(*n)) {
        sweep.checked += 1;
        let result = (|| -> Result<Option<String>, String> {
            let gs = hs.group(n).map_err(|e| e.to_string())?;
            let gt = ht.group(n).map_err(|e| e.to_string())?;
            let mut images = Vec::new();
            for f in gs.factors() {
                let im = phi.apply(&f.representative).map_err(|e| e.to_string())?;
                images.push(ht.class_of(&im).map_err(|e| e.to_string())?);
            }
            let spanned = subgroup_log_size(&gt, &images);
            if gs.log_size() == gt.log_size() && spanned == gt.log_size() {
                Ok(None)
            } else {
                Ok(Some(format!(
                    "degree {n}: source {}, target {}, image has order p^{spanned}",
                    gs.describe(),
                    gt.describe()
                )))
            }
        })();
        match result {
            Ok(None) => {}
            Ok(Some(msg)) => sweep.failures.push(msg),
            Err(e) => sweep.failures.push(format!("degree {n}: {e}")),
        }
    }
    sweep
}

pub fn check_morphism(phi: &DgaMorphism) -> CertReport {
    CertReport {
        chain_map: check_chain_map(phi),
        multiplicativity: check_multiplicativity(phi),
        homology_iso: check_homology_iso(phi),
    }
}
