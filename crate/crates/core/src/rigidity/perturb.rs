//! Seeded disguises of the test dga that keep its quasi-isomorphism type.

use std::collections::BTreeMap;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::dga::{
    build_free_cdga, required_precision_for_c, test_dga_spec, Degree, DegreeWindow, DgaError, DgaPresentation,
    Expression, GeneratorSpec,
};
use crate::matrix::RingMatrix;
use crate::padic::{PAdicInt, Ring};

/// At most this many acyclic pairs; each one multiplies the basis size.
const MAX_CELL_PAIRS: usize = 2;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Perturbation {
    pub dga: DgaPresentation,
    /// One line per applied move.
    pub log: Vec<String>,
}

enum Move {
    Rescale,
    Shear,
}

/// Cell degrees whose pair `(w, y)` never lands a monomial in degree 0, so
/// the degree-0 part stays spanned by the unit.
fn cell_degrees(p: u64, window: DegreeWindow) -> Vec<Degree> {
    let q = 2 * p as i64 - 2;
    (2..=window.max() - 2).filter(|n| ![0, 1, q - 1].contains(&n.rem_euclid(q))).collect()
}

fn random_unit(rng: &mut ChaCha8Rng, ring: Ring) -> PAdicInt {
    loop {
        let c = ring.from_residue(rng.gen_range(1..ring.modulus()));
        if c.is_unit() {
            return c;
        }
    }
}

/// Start from the test dga and apply `budget` seeded moves: acyclic pairs
/// `d(y) = w` in positive degrees (square-zero), unit rescalings of basis
/// vectors, and unit-triangular changes within a degree.
pub fn perturb_dga(
    p: u64,
    precision: u32,
    window: DegreeWindow,
    seed: u64,
    budget: usize,
) -> Result<Perturbation, DgaError> {
    let ring = Ring::new(p, precision)?;
    let required = required_precision_for_c(p, window);
    if precision < required {
        return Err(DgaError::PrecisionTooSmall { required, got: precision });
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut spec = test_dga_spec(p);
    let mut log = Vec::new();
    let mut moves = Vec::new();
    let candidates = cell_degrees(p, window);
    let mut pairs = 0;
    for _ in 0..budget {
        match rng.gen_range(0..3) {
            0 if pairs < MAX_CELL_PAIRS && !candidates.is_empty() => {
                pairs += 1;
                let n = candidates[rng.gen_range(0..candidates.len())];
                let (w, y) = (format!("w{pairs}"), format!("y{pairs}"));
                spec.generators.push(GeneratorSpec::new(&w, n, false, Expression::zero()));
                spec.generators.push(GeneratorSpec::new(&y, n + 1, false, Expression::term(1, &[(&w, 1)])));
                spec.square_zero.insert(w.clone());
                spec.square_zero.insert(y.clone());
                log.push(format!("acyclic pair {w} (degree {n}), {y} (degree {}), d({y}) = {w}", n + 1));
            }
            2 => moves.push(Move::Shear),
            _ => moves.push(Move::Rescale),
        }
    }
    let dga = build_free_cdga(&spec, ring, window)?;
    if moves.is_empty() {
        return Ok(Perturbation { dga, log });
    }

    let mut changes: BTreeMap<Degree, (RingMatrix, RingMatrix)> = BTreeMap::new();
    let degrees: Vec<Degree> = dga.nonempty_degrees().collect();
    let movable: Vec<(Degree, usize)> = dga.basis_refs().filter(|&r| r != (0, dga.unit_index())).collect();
    let wide: Vec<Degree> = degrees.iter().copied().filter(|&n| dga.basis_size(n) >= 2).collect();
    for mv in moves {
        let (n, t, ti, line) = match mv {
            Move::Shear if !wide.is_empty() => {
                let n = wide[rng.gen_range(0..wide.len())];
                let dim = dga.basis_size(n);
                let mut i = rng.gen_range(0..dim);
                let mut j = rng.gen_range(0..dim - 1);
                if j >= i {
                    j += 1;
                }
                // the unit vector itself never moves
                if n == 0 && j == dga.unit_index() {
                    std::mem::swap(&mut i, &mut j);
                }
                let c = ring.reduce(rng.gen_range(1..p as i64 * 3));
                let mut t = RingMatrix::identity(ring, dim);
                let mut ti = RingMatrix::identity(ring, dim);
                t.set(i, j, c);
                ti.set(i, j, -c);
                let line = format!("degree {n}: basis vector {j} += {} * basis vector {i}", c.signed());
                (n, t, ti, line)
            }
            _ => {
                let (n, i) = movable[rng.gen_range(0..movable.len())];
                let dim = dga.basis_size(n);
                let c = random_unit(&mut rng, ring);
                let mut t = RingMatrix::identity(ring, dim);
                let mut ti = RingMatrix::identity(ring, dim);
                t.set(i, i, c);
                ti.set(i, i, c.inverse().expect("unit"));
                let line = format!("degree {n}: basis vector {i} scaled by {}", c.signed());
                (n, t, ti, line)
            }
        };
        let entry = changes
            .entry(n)
            .or_insert_with(|| (RingMatrix::identity(ring, t.rows()), RingMatrix::identity(ring, t.rows())));
        entry.0 = entry.0.mul(&t)?;
        entry.1 = ti.mul(&entry.1)?;
        log.push(line);
    }
    let dga = dga.change_basis(&changes)?;
    Ok(Perturbation { dga, log })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dga::{build_test_dga_c, check_dga_axioms};
    use crate::homology::{compare_homology, expected_homology_of_c};

    fn w() -> DegreeWindow {
        DegreeWindow::new(-24, 24).unwrap()
    }

    #[test]
    fn zero_budget_is_the_test_dga() {
        let out = perturb_dga(3, 4, w(), 0, 0).unwrap();
        assert_eq!(out.dga, build_test_dga_c(Ring::new(3, 4).unwrap(), w()).unwrap());
        assert!(out.log.is_empty());
    }

    #[test]
    fn deterministic_and_seed_dependent() {
        let a = perturb_dga(3, 4, w(), 7, 10).unwrap();
        let b = perturb_dga(3, 4, w(), 7, 10).unwrap();
        assert_eq!(a, b);
        let c = perturb_dga(3, 4, w(), 8, 10).unwrap();
        assert_ne!(a.log, c.log);
    }

    #[test]
    fn perturbations_keep_axioms_and_homology() {
        for seed in 0..6 {
            let out = perturb_dga(3, 4, w(), seed, 8).unwrap();
            assert!(check_dga_axioms(&out.dga).is_empty(), "seed {seed}");
            assert_eq!(out.dga.basis_size(0), 1);
            let report = compare_homology(&out.dga, |n| expected_homology_of_c(3, n));
            assert!(report.all_ok(), "seed {seed}\n{report}");
        }
    }

    #[test]
    fn cell_degrees_avoid_degree_zero() {
        let w = DegreeWindow::new(-40, 40).unwrap();
        assert!(cell_degrees(3, w).iter().all(|n| n % 4 == 2));
        assert!(cell_degrees(5, w).iter().all(|n| ![0, 1, 7].contains(&(n % 8))));
    }
}
