//! Free graded-commutative dgas from generators and differentials.

use std::collections::{BTreeMap, BTreeSet, HashMap};
use std::fmt;

use serde::{Deserialize, Serialize};

use super::{Degree, DegreeWindow, DgaError, DgaPresentation, SparseVec};
use crate::matrix::RingMatrix;
use crate::padic::{nu, PAdicInt, Ring};

/// `coeff * g1^e1 * g2^e2 * ...`
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Term {
    pub coeff: i64,
    pub factors: Vec<(String, i64)>,
}

/// A formal sum of monomials with integer coefficients.
#[derive(Debug, Clone, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct Expression(pub Vec<Term>);

impl Expression {
    pub fn zero() -> Self {
        Expression(Vec::new())
    }

    pub fn term(coeff: i64, factors: &[(&str, i64)]) -> Self {
        Expression(vec![Term { coeff, factors: factors.iter().map(|(g, e)| (g.to_string(), *e)).collect() }])
    }

    /// Parse `"3*e"`, `"2*e*x^-1 - x^2"`, `"0"`.
    pub fn parse(s: &str) -> Result<Self, DgaError> {
        let s: String = s.chars().filter(|c| !c.is_whitespace()).collect();
        if s.is_empty() || s == "0" {
            return Ok(Expression::zero());
        }
        let mut pieces: Vec<(bool, String)> = Vec::new();
        let mut current = String::new();
        let mut negative = false;
        let mut prev: Option<char> = None;
        for ch in s.chars() {
            if (ch == '+' || ch == '-') && prev.is_some() && prev != Some('^') && prev != Some('*') {
                pieces.push((negative, std::mem::take(&mut current)));
                negative = ch == '-';
            } else if (ch == '+' || ch == '-') && prev.is_none() {
                negative = ch == '-';
            } else {
                current.push(ch);
            }
            prev = Some(ch);
        }
        pieces.push((negative, current));

        let mut terms = Vec::new();
        for (neg, piece) in pieces {
            if piece.is_empty() {
                return Err(DgaError::Parse(format!("empty term in expression {s:?}")));
            }
            let mut coeff: i64 = if neg { -1 } else { 1 };
            let mut factors = Vec::new();
            for f in piece.split('*') {
                if let Ok(k) = f.parse::<i64>() {
                    coeff *= k;
                    continue;
                }
                let (name, exp) = match f.split_once('^') {
                    Some((n, e)) => (
                        n,
                        e.parse::<i64>().map_err(|_| DgaError::Parse(format!("bad exponent in {f:?}")))?,
                    ),
                    None => (f, 1),
                };
                if name.is_empty() || !name.chars().all(|c| c.is_alphanumeric() || c == '_') {
                    return Err(DgaError::Parse(format!("bad factor {f:?}")));
                }
                factors.push((name.to_string(), exp));
            }
            terms.push(Term { coeff, factors });
        }
        Ok(Expression(terms))
    }
}

impl fmt::Display for Expression {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.0.is_empty() {
            return write!(f, "0");
        }
        let parts: Vec<String> = self
            .0
            .iter()
            .map(|t| {
                let mut s = t.coeff.to_string();
                for (g, e) in &t.factors {
                    if *e == 1 {
                        s.push_str(&format!("*{g}"));
                    } else {
                        s.push_str(&format!("*{g}^{e}"));
                    }
                }
                s
            })
            .collect();
        write!(f, "{}", parts.join(" + "))
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct GeneratorSpec {
    pub name: String,
    pub degree: Degree,
    pub invertible: bool,
    pub differential: Expression,
}

impl GeneratorSpec {
    pub fn new(name: &str, degree: Degree, invertible: bool, differential: Expression) -> Self {
        GeneratorSpec { name: name.to_string(), degree, invertible, differential }
    }
}

/// Generators plus an optional square-zero group: products of two or more
/// generators from that group vanish (a dg-ideal when the group is closed
/// under `d`, as for acyclic cell pairs).
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct FreeCdgaSpec {
    pub generators: Vec<GeneratorSpec>,
    pub square_zero: BTreeSet<String>,
}

impl FreeCdgaSpec {
    pub fn new(generators: Vec<GeneratorSpec>) -> Self {
        FreeCdgaSpec { generators, square_zero: BTreeSet::new() }
    }
}

/// Exponent vector over the generators sorted by name.
pub type Monomial = Vec<i64>;

type Poly = BTreeMap<Monomial, PAdicInt>;

struct Generators {
    names: Vec<String>,
    degrees: Vec<Degree>,
    invertible: Vec<bool>,
    square_zero: Vec<bool>,
    bounds: Vec<(i64, i64)>,
}

impl Generators {
    fn is_odd(&self, i: usize) -> bool {
        self.degrees[i].rem_euclid(2) == 1
    }

    fn degree(&self, m: &Monomial) -> Degree {
        m.iter().zip(&self.degrees).map(|(e, d)| e * d).sum()
    }

    fn label(&self, m: &Monomial) -> String {
        let parts: Vec<String> = m
            .iter()
            .enumerate()
            .filter(|(_, e)| **e != 0)
            .map(|(i, e)| if *e == 1 { self.names[i].clone() } else { format!("{}^{}", self.names[i], e) })
            .collect();
        if parts.is_empty() {
            "1".to_string()
        } else {
            parts.join("*")
        }
    }

    fn in_bounds(&self, m: &Monomial) -> bool {
        m.iter().zip(&self.bounds).all(|(e, (lo, hi))| lo <= e && e <= hi)
    }

    /// Product of monomials with its Koszul sign, or `None` if it vanishes.
    fn mul(&self, a: &Monomial, b: &Monomial) -> Option<(bool, Monomial)> {
        let mut negative = false;
        let mut out = Vec::with_capacity(a.len());
        let mut sz = 0;
        for i in 0..a.len() {
            let e = a[i] + b[i];
            if self.is_odd(i) && e > 1 {
                return None;
            }
            if self.square_zero[i] {
                sz += e;
            }
            out.push(e);
        }
        if sz > 1 {
            return None;
        }
        // move each odd factor of b left past the odd factors of a with larger index
        for j in 0..b.len() {
            if b[j] == 0 || !self.is_odd(j) {
                continue;
            }
            let passes = (j + 1..a.len()).filter(|&i| a[i] != 0 && self.is_odd(i)).count();
            if passes % 2 == 1 {
                negative = !negative;
            }
        }
        Some((negative, out))
    }

    fn poly_mul(&self, a: &Poly, b: &Poly) -> Poly {
        let mut out = Poly::new();
        for (ma, ca) in a {
            for (mb, cb) in b {
                if let Some((neg, m)) = self.mul(ma, mb) {
                    let c = *ca * *cb;
                    let entry = out.entry(m).or_insert(c.ring().zero());
                    if neg {
                        *entry -= c;
                    } else {
                        *entry += c;
                    }
                }
            }
        }
        out.retain(|_, c| !c.is_zero());
        out
    }

    fn mono_poly(&self, m: Monomial, c: PAdicInt) -> Poly {
        let mut p = Poly::new();
        if !c.is_zero() {
            p.insert(m, c);
        }
        p
    }

    /// Leibniz expansion of `d` on a monomial, given `d` of each generator.
    fn d_monomial(&self, m: &Monomial, d_gens: &[Poly], ring: Ring) -> Poly {
        let k = m.len();
        let mut out = Poly::new();
        let mut prefix = vec![0; k];
        for i in 0..k {
            let a = m[i];
            if a != 0 {
                let mut suffix = vec![0; k];
                suffix[i + 1..].copy_from_slice(&m[i + 1..]);
                let mut power = vec![0; k];
                power[i] = a - 1;
                // d(g^a) = a g^(a-1) d(g); for odd g, a = 1
                let coeff = if self.is_odd(i) { ring.one() } else { ring.reduce(a) };
                let dg = self.poly_mul(&self.mono_poly(power, coeff), &d_gens[i]);
                let prefix_degree = self.degree(&prefix);
                let sign = if prefix_degree.rem_euclid(2) == 1 { -ring.one() } else { ring.one() };
                let term = self.poly_mul(
                    &self.poly_mul(&self.mono_poly(prefix.clone(), sign), &dg),
                    &self.mono_poly(suffix, ring.one()),
                );
                for (mono, c) in term {
                    *out.entry(mono).or_insert(ring.zero()) += c;
                }
            }
            prefix[i] = a;
        }
        out.retain(|_, c| !c.is_zero());
        out
    }
}

fn enumerate(gens: &Generators, window: DegreeWindow) -> BTreeMap<Degree, Vec<Monomial>> {
    let k = gens.names.len();
    let mut out: BTreeMap<Degree, Vec<Monomial>> = BTreeMap::new();
    let mut current = vec![0; k];
    fn rec(
        gens: &Generators,
        window: DegreeWindow,
        i: usize,
        sz: i64,
        current: &mut Vec<i64>,
        out: &mut BTreeMap<Degree, Vec<Monomial>>,
    ) {
        if i == current.len() {
            let n = gens.degree(current);
            if window.contains(n) {
                out.entry(n).or_default().push(current.clone());
            }
            return;
        }
        let (lo, hi) = gens.bounds[i];
        for e in lo..=hi {
            let sz2 = if gens.square_zero[i] { sz + e } else { sz };
            if sz2 > 1 {
                break;
            }
            current[i] = e;
            rec(gens, window, i + 1, sz2, current, out);
        }
        current[i] = 0;
    }
    rec(gens, window, 0, 0, &mut current, &mut out);
    for v in out.values_mut() {
        v.sort();
    }
    out
}

/// Build the free graded-commutative dga on `spec` over `ring`, truncated to
/// `window`. Exponents of even generators are bounded by `|e * deg| <= span`;
/// products beyond that bound are recorded as clipped.
pub fn build_free_cdga(
    spec: &FreeCdgaSpec,
    ring: Ring,
    window: DegreeWindow,
) -> Result<DgaPresentation, DgaError> {
    let mut sorted = spec.generators.clone();
    sorted.sort_by(|a, b| a.name.cmp(&b.name));
    for w in sorted.windows(2) {
        if w[0].name == w[1].name {
            return Err(DgaError::DuplicateGenerator(w[0].name.clone()));
        }
    }
    for g in &sorted {
        if g.degree == 0 {
            return Err(DgaError::ZeroDegreeGenerator(g.name.clone()));
        }
        if g.invertible && g.degree.rem_euclid(2) == 1 {
            return Err(DgaError::InvertibleOdd(g.name.clone()));
        }
    }
    for name in &spec.square_zero {
        if !sorted.iter().any(|g| &g.name == name) {
            return Err(DgaError::UnknownGenerator(name.clone()));
        }
    }
    let span = window.span();
    let gens = Generators {
        names: sorted.iter().map(|g| g.name.clone()).collect(),
        degrees: sorted.iter().map(|g| g.degree).collect(),
        invertible: sorted.iter().map(|g| g.invertible).collect(),
        square_zero: sorted.iter().map(|g| spec.square_zero.contains(&g.name)).collect(),
        bounds: sorted
            .iter()
            .map(|g| {
                let b = span / g.degree.abs();
                if g.degree.rem_euclid(2) == 1 {
                    (0, 1)
                } else if g.invertible {
                    (-b, b)
                } else {
                    (0, b)
                }
            })
            .collect(),
    };
    let index: HashMap<&str, usize> = gens.names.iter().enumerate().map(|(i, n)| (n.as_str(), i)).collect();

    let mut d_gens = Vec::with_capacity(sorted.len());
    for g in &sorted {
        let mut poly = Poly::new();
        for term in &g.differential.0 {
            let mut m = vec![0; sorted.len()];
            for (name, e) in &term.factors {
                let i = *index.get(name.as_str()).ok_or_else(|| DgaError::UnknownGenerator(name.clone()))?;
                m[i] += e;
            }
            for (i, e) in m.iter().enumerate() {
                if *e < 0 && !gens.invertible[i] {
                    return Err(DgaError::NegativeExponent(gens.names[i].clone()));
                }
            }
            let deg = gens.degree(&m);
            if deg != g.degree - 1 {
                return Err(DgaError::DifferentialDegree { name: g.name.clone(), expected: g.degree - 1, got: deg });
            }
            // normalise the term through multiplication by 1 to apply odd-square vanishing
            let unit = vec![0; sorted.len()];
            if let Some((_, m)) = gens.mul(&unit, &m) {
                *poly.entry(m).or_insert(ring.zero()) += ring.reduce(term.coeff);
            }
        }
        poly.retain(|_, c| !c.is_zero());
        d_gens.push(poly);
    }

    let monos = enumerate(&gens, window);
    let position: HashMap<&Monomial, usize> =
        monos.values().flat_map(|v| v.iter().enumerate().map(|(i, m)| (m, i))).collect();

    let mut basis: BTreeMap<Degree, Vec<String>> =
        monos.iter().map(|(n, v)| (*n, v.iter().map(|m| gens.label(m)).collect())).collect();
    basis.entry(0).or_default();
    let size = |n: Degree| monos.get(&n).map_or(0, |v| v.len());

    let mut differential = BTreeMap::new();
    for n in window.min() + 1..=window.max() {
        let mut mat = RingMatrix::zeros(ring, size(n - 1), size(n));
        if let Some(list) = monos.get(&n) {
            for (j, m) in list.iter().enumerate() {
                for (target, c) in gens.d_monomial(m, &d_gens, ring) {
                    let i = position
                        .get(&target)
                        .filter(|_| gens.in_bounds(&target))
                        .ok_or_else(|| DgaError::Truncation(gens.label(&target)))?;
                    mat.set(*i, j, mat.get(*i, j) + c);
                }
            }
        }
        differential.insert(n, mat);
    }

    let mut product = BTreeMap::new();
    let mut clipped = BTreeSet::new();
    for (&da, la) in &monos {
        for (&db, lb) in &monos {
            if !window.contains(da + db) {
                continue;
            }
            for (i, ma) in la.iter().enumerate() {
                for (j, mb) in lb.iter().enumerate() {
                    let Some((neg, m)) = gens.mul(ma, mb) else { continue };
                    match position.get(&m).filter(|_| gens.in_bounds(&m)) {
                        Some(&k) => {
                            let c = if neg { -ring.one() } else { ring.one() };
                            product.insert((da, i, db, j), vec![(k, c)] as SparseVec);
                        }
                        None => {
                            clipped.insert((da, i, db, j));
                        }
                    }
                }
            }
        }
    }

    let zero_mono = vec![0; sorted.len()];
    let unit = monos.get(&0).and_then(|v| v.iter().position(|m| *m == zero_mono)).unwrap_or(0);
    if size(0) == 0 {
        basis.insert(0, vec!["1".to_string()]);
    }

    let dga = DgaPresentation::from_parts(ring, window, basis, differential, product, unit, BTreeSet::new(), clipped)?;
    for n in window.min() + 2..=window.max() {
        let dn = &dga.differential[&n];
        let dn1 = &dga.differential[&(n - 1)];
        if !dn1.mul(dn)?.is_zero() {
            return Err(DgaError::DSquared(n));
        }
    }
    Ok(dga)
}

/// Largest `nu(m)` over `m != 0` with `(2p-2)m - 1` in the window.
pub fn nu_max_for_window(p: u64, window: DegreeWindow) -> u32 {
    let q = 2 * p as i64 - 2;
    (window.min()..=window.max())
        .filter(|n| (n + 1).rem_euclid(q) == 0 && n + 1 != 0)
        .map(|n| nu((n + 1) / q, p))
        .max()
        .unwrap_or(0)
}

pub fn required_precision_for_c(p: u64, window: DegreeWindow) -> u32 {
    nu_max_for_window(p, window) + 2
}

pub fn test_dga_spec(p: u64) -> FreeCdgaSpec {
    let q = 2 * p as i64 - 2;
    FreeCdgaSpec::new(vec![
        GeneratorSpec::new("x", q, true, Expression::term(p as i64, &[("e", 1)])),
        GeneratorSpec::new("e", q - 1, false, Expression::zero()),
    ])
}

/// `C = Z_p[x, x^-1] (x) Lambda(e)` with `|x| = 2p-2`, `|e| = 2p-3`, `d(x) = p e`.
pub fn build_test_dga_c(ring: Ring, window: DegreeWindow) -> Result<DgaPresentation, DgaError> {
    let required = required_precision_for_c(ring.prime(), window);
    if ring.precision() < required {
        return Err(DgaError::PrecisionTooSmall { required, got: ring.precision() });
    }
    build_free_cdga(&test_dga_spec(ring.prime()), ring, window)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dga::check_dga_axioms;

    fn ring(p: u64, n: u32) -> Ring {
        Ring::new(p, n).unwrap()
    }

    #[test]
    fn expression_parsing() {
        let e = Expression::parse("3*e").unwrap();
        assert_eq!(e, Expression::term(3, &[("e", 1)]));
        let e = Expression::parse("2*e*x^-1 - x^2").unwrap();
        assert_eq!(e.0.len(), 2);
        assert_eq!(e.0[0].factors, vec![("e".to_string(), 1), ("x".to_string(), -1)]);
        assert_eq!(e.0[1].coeff, -1);
        assert_eq!(Expression::parse("0").unwrap(), Expression::zero());
        assert_eq!(Expression::parse("-4").unwrap().0[0].coeff, -4);
        assert!(Expression::parse("3*").is_err());
        assert!(Expression::parse("x^a").is_err());
    }

    #[test]
    fn free_cdga_example() {
        let spec = FreeCdgaSpec::new(vec![
            GeneratorSpec::new("x", 4, true, Expression::parse("3*e").unwrap()),
            GeneratorSpec::new("e", 3, false, Expression::zero()),
        ]);
        let a = build_free_cdga(&spec, ring(3, 4), DegreeWindow::new(-30, 30).unwrap()).unwrap();
        assert_eq!(a.labels(11), ["e*x^2"]);
        assert_eq!(a.labels(8), ["x^2"]);
        assert_eq!(a.differential_matrix(8).unwrap().get(0, 0).signed(), 6);
    }

    #[test]
    fn empty_generators_give_ground_ring() {
        let a = build_free_cdga(&FreeCdgaSpec::default(), ring(3, 2), DegreeWindow::new(-5, 5).unwrap()).unwrap();
        assert_eq!(a.total_dimension(), 1);
        assert_eq!(a.labels(0), ["1"]);
        assert!(check_dga_axioms(&a).is_empty());
    }

    #[test]
    fn polynomial_generator() {
        let spec = FreeCdgaSpec::new(vec![GeneratorSpec::new("y", 2, false, Expression::zero())]);
        let a = build_free_cdga(&spec, ring(3, 2), DegreeWindow::new(-3, 9).unwrap()).unwrap();
        for k in 0..=4 {
            assert_eq!(a.labels(2 * k), [if k == 0 { "1".to_string() } else if k == 1 { "y".into() } else { format!("y^{k}") }]);
        }
        assert_eq!(a.basis_size(1), 0);
        assert!(a.differential.values().all(|m| m.is_zero()));
        assert!(check_dga_axioms(&a).is_empty());
    }

    #[test]
    fn rejects_bad_generators() {
        let w = DegreeWindow::new(-5, 5).unwrap();
        let odd_inv = FreeCdgaSpec::new(vec![GeneratorSpec::new("z", 3, true, Expression::zero())]);
        assert_eq!(build_free_cdga(&odd_inv, ring(3, 2), w), Err(DgaError::InvertibleOdd("z".into())));
        let bad_deg = FreeCdgaSpec::new(vec![
            GeneratorSpec::new("x", 4, false, Expression::parse("e").unwrap()),
            GeneratorSpec::new("e", 2, false, Expression::zero()),
        ]);
        assert!(matches!(build_free_cdga(&bad_deg, ring(3, 2), w), Err(DgaError::DifferentialDegree { .. })));
        // d(x) = e, d(e) = y: d^2(x) = y != 0
        let not_square_zero = FreeCdgaSpec::new(vec![
            GeneratorSpec::new("x", 4, false, Expression::parse("e").unwrap()),
            GeneratorSpec::new("e", 3, false, Expression::parse("y").unwrap()),
            GeneratorSpec::new("y", 2, false, Expression::zero()),
        ]);
        assert_eq!(build_free_cdga(&not_square_zero, ring(3, 2), w), Err(DgaError::DSquared(4)));
    }

    #[test]
    fn test_dga_c_bases() {
        let w = DegreeWindow::new(-30, 30).unwrap();
        let c3 = build_test_dga_c(ring(3, 4), w).unwrap();
        assert_eq!(c3.labels(4), ["x"]);
        assert_eq!(c3.labels(3), ["e"]);
        assert_eq!(c3.differential_matrix(4).unwrap().get(0, 0).signed(), 3);
        assert_eq!(c3.labels(11), ["e*x^2"]);
        assert_eq!(c3.labels(-1), ["e*x^-1"]);
        for n in w.degrees() {
            assert!(c3.basis_size(n) <= 1);
        }
        let c5 = build_test_dga_c(ring(5, 3), w).unwrap();
        assert_eq!(c5.labels(8), ["x"]);
        assert_eq!(c5.labels(15), ["e*x"]);
        assert_eq!(c5.differential_matrix(16).unwrap().get(0, 0).signed(), 10);
    }

    #[test]
    fn precision_rule() {
        let w = DegreeWindow::new(-40, 40).unwrap();
        assert_eq!(nu_max_for_window(3, w), 2);
        assert_eq!(required_precision_for_c(3, w), 4);
        assert_eq!(
            build_test_dga_c(ring(3, 2), w),
            Err(DgaError::PrecisionTooSmall { required: 4, got: 2 })
        );
        assert_eq!(required_precision_for_c(5, w), 3);
    }

    /// Independent expansion: write a monomial as a word of single generators
    /// and apply the Leibniz rule letter by letter, multiplying words by
    /// concatenation and sorting with explicit transposition signs.
    fn d_word_oracle(word: &[(usize, bool)], dg: &dyn Fn(usize) -> Vec<(i64, Vec<(usize, bool)>)>) -> BTreeMap<Vec<usize>, i64> {
        // word: (generator index, is_odd)
        let mut out: BTreeMap<Vec<usize>, i64> = BTreeMap::new();
        let mut prefix_odd = 0;
        for (pos, &(g, odd)) in word.iter().enumerate() {
            for (c, repl) in dg(g) {
                let mut w: Vec<(usize, bool)> = word[..pos].to_vec();
                w.extend(repl);
                w.extend_from_slice(&word[pos + 1..]);
                let sign = if prefix_odd % 2 == 1 { -1 } else { 1 };
                // bubble sort with signs
                let mut sgn = sign * c;
                let mut w2 = w.clone();
                for i in 0..w2.len() {
                    for j in 0..w2.len() - 1 - i {
                        if w2[j].0 > w2[j + 1].0 {
                            if w2[j].1 && w2[j + 1].1 {
                                sgn = -sgn;
                            }
                            w2.swap(j, j + 1);
                        }
                    }
                }
                let repeated_odd = w2.windows(2).any(|p| p[0] == p[1] && p[0].1);
                if !repeated_odd {
                    *out.entry(w2.iter().map(|x| x.0).collect()).or_insert(0) += sgn;
                }
            }
            if odd {
                prefix_odd += 1;
            }
        }
        out.retain(|_, c| *c != 0);
        out
    }

    #[test]
    fn leibniz_matches_word_expansion() {
        // a odd, b even with d(b) = a*c, c even closed, f even with d(f) = 2a
        let r = ring(3, 3);
        let spec = FreeCdgaSpec::new(vec![
            GeneratorSpec::new("a", 3, false, Expression::zero()),
            GeneratorSpec::new("b", 6, false, Expression::parse("a*c").unwrap()),
            GeneratorSpec::new("c", 2, false, Expression::zero()),
            GeneratorSpec::new("f", 4, false, Expression::parse("2*a").unwrap()),
        ]);
        let w = DegreeWindow::new(-1, 20).unwrap();
        let dga = build_free_cdga(&spec, r, w).unwrap();
        assert!(check_dga_axioms(&dga).is_empty());
        let odd = [true, false, false, false];
        let dg = |g: usize| -> Vec<(i64, Vec<(usize, bool)>)> {
            match g {
                1 => vec![(1, vec![(0, true), (2, false)])],
                3 => vec![(2, vec![(0, true)])],
                _ => vec![],
            }
        };
        let names = ["a", "b", "c", "f"];
        // all words of length <= 3 in sorted order
        let mut words: Vec<Vec<usize>> = vec![];
        for i in 0..4 {
            words.push(vec![i]);
            for j in i..4 {
                words.push(vec![i, j]);
                for k in j..4 {
                    words.push(vec![i, j, k]);
                }
            }
        }
        for word in words {
            let letters: Vec<(usize, bool)> = word.iter().map(|&g| (g, odd[g])).collect();
            if letters.windows(2).any(|p| p[0] == p[1] && p[0].1) {
                continue;
            }
            let mut exps = [0i64; 4];
            for &g in &word {
                exps[g] += 1;
            }
            let label: Vec<String> = (0..4)
                .filter(|&i| exps[i] > 0)
                .map(|i| if exps[i] == 1 { names[i].to_string() } else { format!("{}^{}", names[i], exps[i]) })
                .collect();
            let label = label.join("*");
            let Some((n, idx)) = dga.find_label(&label) else { continue };
            if !w.contains(n - 1) {
                continue;
            }
            let got = dga.differential(&dga.basis_element(n, idx)).unwrap();
            let expected = d_word_oracle(&letters, &dg);
            let mut exp_el = dga.zero(n - 1);
            for (w2, c) in expected {
                let mut e = [0i64; 4];
                for g in w2 {
                    e[g] += 1;
                }
                let l: Vec<String> = (0..4)
                    .filter(|&i| e[i] > 0)
                    .map(|i| if e[i] == 1 { names[i].to_string() } else { format!("{}^{}", names[i], e[i]) })
                    .collect();
                let (m, k) = dga.find_label(&l.join("*")).expect("term in basis");
                assert_eq!(m, n - 1);
                exp_el.coords[k] += r.reduce(c);
            }
            assert_eq!(got, exp_el, "d({label})");
        }
    }
}
