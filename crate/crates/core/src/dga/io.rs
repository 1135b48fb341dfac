//! TOML interchange: full presentations and the generator shorthand.

use std::collections::{BTreeMap, BTreeSet};

use serde::{Deserialize, Serialize};

use super::{
    build_free_cdga, check_dga_axioms, Degree, DegreeWindow, DgaError, DgaPresentation, Expression, FreeCdgaSpec,
    GeneratorSpec, SparseVec,
};
use crate::matrix::RingMatrix;
use crate::padic::Ring;

#[derive(Serialize, Deserialize)]
struct WindowFile {
    min: Degree,
    max: Degree,
}

#[derive(Serialize, Deserialize)]
struct UnitFile {
    degree: Degree,
    idx: usize,
}

#[derive(Serialize, Deserialize)]
struct BasisFile {
    degree: Degree,
    labels: Vec<String>,
}

#[derive(Serialize, Deserialize)]
struct DifferentialFile {
    degree: Degree,
    /// Rows of `d_n`, signed residues.
    matrix: Vec<Vec<i64>>,
}

#[derive(Serialize, Deserialize)]
struct TermFile {
    idx: usize,
    coeff: i64,
}

#[derive(Serialize, Deserialize)]
struct ProductFile {
    deg_a: Degree,
    idx_a: usize,
    deg_b: Degree,
    idx_b: usize,
    result: Vec<TermFile>,
}

#[derive(Serialize, Deserialize)]
struct DgaFile {
    prime: u64,
    precision: u32,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    chain_cells: Vec<(Degree, usize)>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    clipped: Vec<(Degree, usize, Degree, usize)>,
    window: WindowFile,
    unit: UnitFile,
    basis: Vec<BasisFile>,
    #[serde(default)]
    differential: Vec<DifferentialFile>,
    #[serde(default)]
    product: Vec<ProductFile>,
}

#[derive(Serialize, Deserialize)]
struct GeneratorFile {
    name: String,
    degree: Degree,
    #[serde(default)]
    invertible: bool,
}

#[derive(Serialize, Deserialize)]
struct DifferentialExprFile {
    name: String,
    expression: String,
}

#[derive(Serialize, Deserialize)]
struct FreeFile {
    prime: u64,
    precision: u32,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    square_zero: Vec<String>,
    window: WindowFile,
    generators: Vec<GeneratorFile>,
    #[serde(default)]
    differentials: Vec<DifferentialExprFile>,
}

fn parse_err(e: impl std::fmt::Display) -> DgaError {
    DgaError::Parse(e.to_string())
}

pub fn serialize_dga(dga: &DgaPresentation) -> String {
    let ring = dga.ring();
    let file = DgaFile {
        prime: ring.prime(),
        precision: ring.precision(),
        chain_cells: dga.chain_cells.iter().copied().collect(),
        clipped: dga.clipped.iter().copied().collect(),
        window: WindowFile { min: dga.window.min(), max: dga.window.max() },
        unit: UnitFile { degree: 0, idx: dga.unit },
        basis: dga
            .basis
            .iter()
            .filter(|(_, v)| !v.is_empty())
            .map(|(&degree, labels)| BasisFile { degree, labels: labels.clone() })
            .collect(),
        differential: dga
            .differential
            .iter()
            .filter(|(_, m)| !m.is_zero())
            .map(|(&degree, m)| DifferentialFile { degree, matrix: m.to_signed_rows() })
            .collect(),
        product: dga
            .product
            .iter()
            .map(|(&(deg_a, idx_a, deg_b, idx_b), res)| ProductFile {
                deg_a,
                idx_a,
                deg_b,
                idx_b,
                result: res.iter().map(|(idx, c)| TermFile { idx: *idx, coeff: c.signed() }).collect(),
            })
            .collect(),
    };
    toml::to_string(&file).expect("presentation serializes")
}

/// Parse a full presentation and validate the dga axioms on it.
pub fn parse_dga(text: &str) -> Result<DgaPresentation, DgaError> {
    let file: DgaFile = toml::from_str(text).map_err(parse_err)?;
    let ring = Ring::new(file.prime, file.precision)?;
    let window = DegreeWindow::new(file.window.min, file.window.max)?;
    if file.unit.degree != 0 {
        return Err(DgaError::Parse(format!("unit must have degree 0, got {}", file.unit.degree)));
    }
    let mut basis = BTreeMap::new();
    for b in file.basis {
        if basis.insert(b.degree, b.labels).is_some() {
            return Err(DgaError::Parse(format!("basis for degree {} given twice", b.degree)));
        }
    }
    let size = |n: Degree| basis.get(&n).map_or(0, |v: &Vec<String>| v.len());
    let mut differential = BTreeMap::new();
    for d in file.differential {
        let (rows, cols) = (size(d.degree - 1), size(d.degree));
        if d.matrix.len() != rows || d.matrix.iter().any(|r| r.len() != cols) {
            return Err(DgaError::Parse(format!("differential in degree {} must be {rows}x{cols}", d.degree)));
        }
        let flat: Vec<i64> = d.matrix.concat();
        differential.insert(d.degree, RingMatrix::from_ints(ring, rows, cols, &flat)?);
    }
    let mut product = BTreeMap::new();
    for p in file.product {
        let res: SparseVec = p.result.iter().map(|t| (t.idx, ring.reduce(t.coeff))).collect();
        product.insert((p.deg_a, p.idx_a, p.deg_b, p.idx_b), res);
    }
    let chain_cells: BTreeSet<_> = file.chain_cells.into_iter().collect();
    for &(n, i) in &chain_cells {
        if i >= size(n) {
            return Err(DgaError::Parse(format!("chain cell ({n},{i}) out of range")));
        }
    }
    let dga = DgaPresentation::from_parts(
        ring,
        window,
        basis,
        differential,
        product,
        file.unit.idx,
        chain_cells,
        file.clipped.into_iter().collect(),
    )?;
    let report = check_dga_axioms(&dga);
    if !report.is_empty() {
        return Err(DgaError::Axioms(report.summary(&dga)));
    }
    Ok(dga)
}

pub fn serialize_free_presentation(spec: &FreeCdgaSpec, ring: Ring, window: DegreeWindow) -> String {
    let file = FreeFile {
        prime: ring.prime(),
        precision: ring.precision(),
        square_zero: spec.square_zero.iter().cloned().collect(),
        window: WindowFile { min: window.min(), max: window.max() },
        generators: spec
            .generators
            .iter()
            .map(|g| GeneratorFile { name: g.name.clone(), degree: g.degree, invertible: g.invertible })
            .collect(),
        differentials: spec
            .generators
            .iter()
            .filter(|g| !g.differential.0.is_empty())
            .map(|g| DifferentialExprFile { name: g.name.clone(), expression: g.differential.to_string() })
            .collect(),
    };
    toml::to_string(&file).expect("presentation serializes")
}

pub fn parse_free_presentation(text: &str) -> Result<(FreeCdgaSpec, Ring, DegreeWindow), DgaError> {
    let file: FreeFile = toml::from_str(text).map_err(parse_err)?;
    let ring = Ring::new(file.prime, file.precision)?;
    let window = DegreeWindow::new(file.window.min, file.window.max)?;
    let mut diffs = BTreeMap::new();
    for d in file.differentials {
        if diffs.insert(d.name.clone(), Expression::parse(&d.expression)?).is_some() {
            return Err(DgaError::Parse(format!("differential of {} given twice", d.name)));
        }
    }
    let mut generators = Vec::new();
    for g in file.generators {
        let d = diffs.remove(&g.name).unwrap_or_default();
        generators.push(GeneratorSpec::new(&g.name, g.degree, g.invertible, d));
    }
    if let Some(name) = diffs.keys().next() {
        return Err(DgaError::UnknownGenerator(name.clone()));
    }
    let spec = FreeCdgaSpec { generators, square_zero: file.square_zero.into_iter().collect() };
    Ok((spec, ring, window))
}

/// Read either format: the shorthand is recognised by its `generators` table.
pub fn parse_input(text: &str) -> Result<DgaPresentation, DgaError> {
    let value: toml::Table = text.parse().map_err(parse_err)?;
    if value.contains_key("generators") {
        let (spec, ring, window) = parse_free_presentation(text)?;
        let dga = build_free_cdga(&spec, ring, window)?;
        let report = check_dga_axioms(&dga);
        if !report.is_empty() {
            return Err(DgaError::Axioms(report.summary(&dga)));
        }
        Ok(dga)
    } else {
        parse_dga(text)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dga::{build_test_dga_c, test_dga_spec};

    #[test]
    fn round_trip_test_dga() {
        let ring = Ring::new(3, 3).unwrap();
        let c = build_test_dga_c(ring, DegreeWindow::new(-12, 12).unwrap()).unwrap();
        let text = serialize_dga(&c);
        let back = parse_dga(&text).unwrap();
        assert_eq!(back, c);
        assert_eq!(serialize_dga(&back), text);
    }

    #[test]
    fn shorthand_round_trip() {
        let ring = Ring::new(5, 3).unwrap();
        let w = DegreeWindow::new(-20, 20).unwrap();
        let text = serialize_free_presentation(&test_dga_spec(5), ring, w);
        assert!(text.contains("expression = \"5*e\""));
        let parsed = parse_input(&text).unwrap();
        assert_eq!(parsed, build_test_dga_c(ring, w).unwrap());
    }

    #[test]
    fn rejects_d_squared_naming_degree() {
        // d(t) = a, d(a) = 1
        let text = r#"
prime = 3
precision = 2
[window]
min = -1
max = 3
[unit]
degree = 0
idx = 0
[[basis]]
degree = 0
labels = ["1"]
[[basis]]
degree = 1
labels = ["a"]
[[basis]]
degree = 2
labels = ["t"]
[[differential]]
degree = 1
matrix = [[1]]
[[differential]]
degree = 2
matrix = [[1]]
"#;
        let err = parse_dga(text).unwrap_err();
        let msg = err.to_string();
        assert!(matches!(err, DgaError::Axioms(_)), "{msg}");
        assert!(msg.contains("degree 2"), "{msg}");
    }

    #[test]
    fn rejects_malformed() {
        assert!(matches!(parse_input("prime = "), Err(DgaError::Parse(_))));
        let bad_prime = "prime = 4\nprecision = 2\n[window]\nmin = -1\nmax = 1\n[[generators]]\nname = \"x\"\ndegree = 2\n";
        assert!(matches!(parse_input(bad_prime), Err(DgaError::Ring(_))));
        let unknown = "prime = 3\nprecision = 2\n[window]\nmin = -1\nmax = 1\n[[generators]]\nname = \"x\"\ndegree = 2\n[[differentials]]\nname = \"y\"\nexpression = \"0\"\n";
        assert!(matches!(parse_input(unknown), Err(DgaError::UnknownGenerator(_))));
    }
}
