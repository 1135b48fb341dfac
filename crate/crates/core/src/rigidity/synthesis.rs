//! Building a quasi-isomorphism `C -> D` from the homology and Massey data
//! of `D` alone.
//!
//! With `q = 2p - 2`: pick `a` (degree `q-1`) with `[-a]` of order `p` and
//! `b` with `d(b) = p a`; symmetrically `abar`, `bbar` in degrees `-q-1`,
//! `-q` with `d(bbar) = -p abar`. The brackets `<alpha_1, p, alpha_{i-1}>`
//! certify `alpha_i = [-i a b^(i-1)]`; `theta = b bbar` lies in degree 0 and
//! `<alpha_2, p, alpha_{-1}> = theta [-a]` shows it is a unit. Then
//! `e -> a`, `x -> b`, `x^-1 -> theta^-1 bbar` is multiplicative.

use std::collections::BTreeMap;
use std::fmt;

use serde::Serialize;

use crate::dga::{build_test_dga_c, format_element, Degree, DgaPresentation, Element};
use crate::homology::{describe_orders, expected_homology_of_c, ClassOrder, HomologyClass, HomologyTable};
use crate::massey::{massey_with_witnesses, p_unit, MasseyError};
use crate::matrix::{solve_linear, RingMatrix};
use crate::padic::{PAdicInt, Ring};

use super::morphism::{check_morphism, CertReport, DgaMorphism};

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub enum SynthesisFailure {
    WindowTooSmall { needed_min: Degree, needed_max: Degree },
    NotNormalized { degree_zero_dim: usize },
    HomologyMismatch { degree: Degree, expected: String, computed: String },
    NoOrderPGenerator { degree: Degree },
    WitnessSolve { equation: String, degree: Degree },
    CycleIdentity(String),
    ThetaNotUnit { theta: i64 },
    MasseyRelation { i: i64, j: i64 },
    MergingB(String),
    Certification(String),
    Internal(String),
}

impl fmt::Display for SynthesisFailure {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            SynthesisFailure::WindowTooSmall { needed_min, needed_max } => {
                write!(f, "window too small: must contain [{needed_min}, {needed_max}]")
            }
            SynthesisFailure::NotNormalized { degree_zero_dim } => {
                write!(f, "input not normalized: degree 0 has dimension {degree_zero_dim}, expected the unit only")
            }
            SynthesisFailure::HomologyMismatch { degree, expected, computed } => {
                write!(f, "homology mismatch at degree {degree}: expected {expected}, computed {computed}")
            }
            SynthesisFailure::NoOrderPGenerator { degree } => write!(f, "no order-p generator in degree {degree}"),
            SynthesisFailure::WitnessSolve { equation, degree } => {
                write!(f, "witness solve failure for {equation} in degree {degree}")
            }
            SynthesisFailure::CycleIdentity(s) => write!(f, "cycle identity fails: {s}"),
            SynthesisFailure::ThetaNotUnit { theta } => write!(f, "theta = {theta} is not a unit"),
            SynthesisFailure::MasseyRelation { i, j } => write!(f, "Massey relation failure at ({i}, {j})"),
            SynthesisFailure::MergingB(s) => write!(f, "merging identity fails: {s}"),
            SynthesisFailure::Certification(s) => write!(f, "certification failure: {s}"),
            SynthesisFailure::Internal(s) => write!(f, "{s}"),
        }
    }
}

impl From<MasseyError> for SynthesisFailure {
    fn from(e: MasseyError) -> Self {
        SynthesisFailure::Internal(e.to_string())
    }
}

macro_rules! internal {
    ($e:expr) => {
        $e.map_err(|e| SynthesisFailure::Internal(e.to_string()))
    };
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct StepRecord {
    pub name: String,
    pub passed: bool,
    pub detail: String,
}

impl fmt::Display for StepRecord {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let status = if self.passed { "PASS" } else { "FAIL" };
        write!(f, "STEP {}: {status} — {}", self.name, self.detail)
    }
}

/// The chains the proof picks, after normalization.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ChosenChains {
    pub a: Element,
    pub b: Element,
    pub a_bar: Element,
    pub b_bar: Element,
    /// `b * bbar` before the final rescaling.
    pub theta: PAdicInt,
    /// `<alpha_2, p, alpha_{-1}> = theta [-a] = [-a]` held as classes.
    pub merging_identity: bool,
}

#[derive(Debug, Clone)]
pub struct SynthesisReport {
    pub failure: Option<SynthesisFailure>,
    pub morphism: Option<DgaMorphism>,
    pub chains: Option<ChosenChains>,
    pub steps: Vec<StepRecord>,
    pub certificate: Option<CertReport>,
    /// Verified bracket ranges: `alpha_i` for `1 <= i <= .0`, `alpha_{-i}` for `1 <= i <= .1`.
    pub verified_range: (i64, i64),
}

impl SynthesisReport {
    pub fn success(&self) -> bool {
        self.failure.is_none()
    }

    pub fn theta(&self) -> Option<PAdicInt> {
        self.chains.as_ref().map(|c| c.theta)
    }

    /// Structured mirror of the text report.
    pub fn machine(&self, target: &DgaPresentation) -> MachineReport {
        let fmt_e = |e: &Element| format_element(target, e);
        MachineReport {
            status: if self.success() { "success".into() } else { "failure".into() },
            reason: self.failure.as_ref().map(|f| f.to_string()),
            steps: self.steps.clone(),
            chains: self.chains.as_ref().map(|c| MachineChains {
                a: fmt_e(&c.a),
                b: fmt_e(&c.b),
                a_bar: fmt_e(&c.a_bar),
                b_bar: fmt_e(&c.b_bar),
                theta: c.theta.signed(),
                theta_valuation: c.theta.valuation(),
                merging_identity: c.merging_identity,
            }),
            generator_images: self.morphism.as_ref().and_then(|m| m.generator_images.as_ref()).map(|g| {
                g.iter().map(|(k, v)| (k.clone(), fmt_e(v))).collect()
            }),
            certificate: self.certificate.clone(),
            verified_range: self.verified_range,
        }
    }

    pub fn render(&self, target: &DgaPresentation) -> String {
        let mut out = String::new();
        for s in &self.steps {
            out.push_str(&format!("{s}\n"));
        }
        if let Some(c) = &self.chains {
            out.push_str(&format!(
                "theta = {} (valuation {})\n",
                c.theta.signed(),
                c.theta.valuation()
            ));
        }
        if let Some(g) = self.morphism.as_ref().and_then(|m| m.generator_images.as_ref()) {
            for (name, img) in g {
                out.push_str(&format!("phi({name}) = {}\n", format_element(target, img)));
            }
        }
        match &self.failure {
            None => out.push_str("RESULT: certified quasi-isomorphism C -> D\n"),
            Some(f) => out.push_str(&format!("RESULT: failure — {f}\n")),
        }
        out
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct MachineChains {
    pub a: String,
    pub b: String,
    pub a_bar: String,
    pub b_bar: String,
    pub theta: i64,
    pub theta_valuation: u32,
    pub merging_identity: bool,
}

#[derive(Debug, Clone, Serialize)]
pub struct MachineReport {
    pub status: String,
    pub reason: Option<String>,
    pub steps: Vec<StepRecord>,
    pub chains: Option<MachineChains>,
    pub generator_images: Option<BTreeMap<String, String>>,
    pub certificate: Option<CertReport>,
    pub verified_range: (i64, i64),
}

struct Run<'a> {
    d: &'a DgaPresentation,
    table: HomologyTable<'a>,
    ring: Ring,
    q: i64,
    steps: Vec<StepRecord>,
    range: (i64, i64),
}

impl<'a> Run<'a> {
    fn pass(&mut self, name: &str, detail: String) {
        self.steps.push(StepRecord { name: name.into(), passed: true, detail });
    }

    fn fmt(&self, e: &Element) -> String {
        format_element(self.d, e)
    }

    fn mul(&self, u: &Element, v: &Element) -> Result<Element, SynthesisFailure> {
        internal!(self.d.multiply(u, v))
    }

    fn class(&self, z: &Element) -> Result<HomologyClass, SynthesisFailure> {
        internal!(self.table.class_of(z))
    }

    /// Solve `d(w) = target`.
    fn solve(&self, target: &Element, equation: &str) -> Result<Element, SynthesisFailure> {
        let n = target.degree + 1;
        let fail = || SynthesisFailure::WitnessSolve { equation: equation.into(), degree: n };
        let d = self.d.differential_matrix(n).ok_or_else(fail)?;
        let w = internal!(solve_linear(d, &target.coords))?.ok_or_else(fail)?;
        Ok(Element { degree: n, coords: w })
    }

    fn pow(&self, b: &Element, k: i64) -> Result<Element, SynthesisFailure> {
        let mut acc = self.d.unit();
        for _ in 0..k {
            acc = self.mul(&acc, b)?;
        }
        Ok(acc)
    }

    fn homology_table(&mut self) -> Result<(), SynthesisFailure> {
        let p = self.ring.prime();
        let mut degrees: Vec<Degree> = self.d.window().inner_degrees().collect();
        degrees.sort_by_key(|n| (n.abs(), *n < 0));
        for &n in &degrees {
            let expected = expected_homology_of_c(p, n);
            let computed = match self.table.group(n) {
                Ok(g) => g.orders(),
                Err(e) => {
                    return Err(SynthesisFailure::HomologyMismatch {
                        degree: n,
                        expected: describe_orders(p, &expected),
                        computed: format!("error ({e})"),
                    })
                }
            };
            if computed != expected {
                return Err(SynthesisFailure::HomologyMismatch {
                    degree: n,
                    expected: describe_orders(p, &expected),
                    computed: describe_orders(p, &computed),
                });
            }
        }
        self.pass("homology-table", format!("{} inner degrees match the closed form", degrees.len()));
        Ok(())
    }

    /// Representative `r` of the order-p generator in degree `n`.
    fn order_p_generator(&self, n: Degree) -> Result<Element, SynthesisFailure> {
        let g = internal!(self.table.group(n))?;
        match g.factors() {
            [f] if f.order == crate::homology::FactorOrder::Torsion(1) => Ok(f.representative.clone()),
            _ => Err(SynthesisFailure::NoOrderPGenerator { degree: n }),
        }
    }

    fn is_order_p(&self, c: &HomologyClass) -> bool {
        c.order() == ClassOrder::Exponent(1)
    }

    /// `alpha_i = <alpha_1, p, alpha_{i-1}>` with witnesses `(-step, step^(i-1))`,
    /// for `A_i = sign * i * first * step^(i-1)`, as far as the window allows.
    fn induction(
        &self,
        first: &Element,
        step: &Element,
        sign: i64,
        direction: i64,
    ) -> Result<i64, SynthesisFailure> {
        let w = self.d.window();
        let pu = p_unit(self.d);
        let chain = |i: i64, power: &Element| -> Result<Element, SynthesisFailure> {
            Ok(self.mul(first, power)?.scale(self.ring.reduce(sign * i)))
        };
        let a1 = chain(1, &self.d.unit())?;
        if !self.is_order_p(&self.class(&a1)?) {
            return Err(SynthesisFailure::NoOrderPGenerator { degree: a1.degree });
        }
        let mut prev = a1.clone();
        let mut power = step.clone();
        let mut i = 1;
        while w.contains_inner(direction * self.q * (i + 1) - 1) && w.contains(power.degree) {
            i += 1;
            let ai = chain(i, &power)?;
            let res = massey_with_witnesses(&self.table, &a1, &pu, &prev, &step.neg(), &power)
                .map_err(|_| SynthesisFailure::MasseyRelation { i: direction, j: direction * (i - 1) })?;
            let class = self.class(&ai)?;
            if res.representative != class {
                return Err(SynthesisFailure::MasseyRelation { i: direction, j: direction * (i - 1) });
            }
            if !self.is_order_p(&class) {
                return Err(SynthesisFailure::NoOrderPGenerator { degree: ai.degree });
            }
            prev = ai;
            if !w.contains(power.degree + step.degree) {
                break;
            }
            power = self.mul(&power, step)?;
        }
        Ok(i)
    }

    /// `<alpha_2, p, alpha_{-1}>` with witnesses `u = -b^2`, `v = bbar`.
    fn merging_bracket(
        &self,
        a: &Element,
        b: &Element,
        a_bar: &Element,
        b_bar: &Element,
    ) -> Result<HomologyClass, SynthesisFailure> {
        let a2 = self.mul(a, b)?.scale(self.ring.reduce(-2));
        let u = self.pow(b, 2)?.neg();
        let res = massey_with_witnesses(&self.table, &a2, &p_unit(self.d), a_bar, &u, b_bar)
            .map_err(|_| SynthesisFailure::MasseyRelation { i: 2, j: -1 })?;
        Ok(res.representative)
    }
}

/// Lift the exact identity `a bbar = abar b` through truncation: when
/// `a bbar - abar b = p^(N-1) w`, shift `bbar` by `p^(N-1) t` with
/// `d(t) = 0` and `a t = -w` mod `p`.
fn correct_identity(
    run: &Run,
    a: &Element,
    b: &Element,
    a_bar: &Element,
    b_bar: &Element,
) -> Result<(Element, bool), SynthesisFailure> {
    let ring = run.ring;
    let n = ring.precision();
    let diff = run.mul(a, b_bar)?.sub(&run.mul(a_bar, b)?);
    if !diff.scale(ring.reduce(ring.prime() as i64)).is_zero() {
        return Err(SynthesisFailure::CycleIdentity(format!(
            "p (a bbar - abar b) = p ({}) is nonzero",
            run.fmt(&diff)
        )));
    }
    if diff.is_zero() {
        return Ok((b_bar.clone(), false));
    }
    let residue = Ring::new(ring.prime(), 1).expect("prime already validated");
    let w: Vec<PAdicInt> =
        diff.coords.iter().map(|c| c.div_p_pow(n - 1).expect("p-torsion").truncate(residue)).collect();
    let deg = b_bar.degree;
    let d = run.d.differential_matrix(deg).expect("inner degree");
    let la = internal!(run.d.left_multiplication(a, deg))?;
    let system = d.vstack(&la).truncate(residue);
    let mut rhs = vec![residue.zero(); d.rows()];
    rhs.extend(w.iter().map(|c| -*c));
    let t = internal!(solve_linear(&system, &rhs))?.ok_or_else(|| {
        SynthesisFailure::CycleIdentity(format!(
            "a bbar - abar b = {} cannot be absorbed into bbar",
            run.fmt(&diff)
        ))
    })?;
    let shift = Element { degree: deg, coords: t.iter().map(|c| ring.reduce(c.signed()) * ring.p_pow(n - 1)).collect() };
    Ok((b_bar.add(&shift), true))
}

/// `phi(e x^k) = a b^k` (with `bbar` for negative `k`), `phi(x^k) = b^k`.
fn build_phi(run: &Run, c: &DgaPresentation, chains: &ChosenChains) -> Result<DgaMorphism, SynthesisFailure> {
    let w = c.window();
    let q = run.q;
    let mut per_degree = BTreeMap::new();
    for n in w.degrees() {
        let (k, with_e) = if n.rem_euclid(q) == 0 {
            (n.div_euclid(q), false)
        } else if n.rem_euclid(q) == q - 1 {
            ((n - (q - 1)).div_euclid(q), true)
        } else {
            continue;
        };
        if c.basis_size(n) != 1 {
            continue;
        }
        let mut img = if with_e { chains.a.clone() } else { run.d.unit() };
        let factor = if k >= 0 { &chains.b } else { &chains.b_bar };
        for _ in 0..k.abs() {
            img = run.mul(&img, factor)?;
        }
        per_degree.insert(n, RingMatrix::from_columns(run.ring, run.d.basis_size(n), &[img.coords]));
    }
    let mut phi = internal!(DgaMorphism::new(c, run.d, per_degree))?;
    let mut gens = BTreeMap::new();
    gens.insert("e".to_string(), chains.a.clone());
    gens.insert("x".to_string(), chains.b.clone());
    gens.insert("x^-1".to_string(), chains.b_bar.clone());
    phi.generator_images = Some(gens);
    Ok(phi)
}

fn run_steps(run: &mut Run) -> Result<(DgaMorphism, ChosenChains, CertReport), (SynthesisFailure, Option<ChosenChains>)> {
    let plain = |e: SynthesisFailure| (e, None);
    let (q, ring) = (run.q, run.ring);
    let w = run.d.window();
    let (needed_min, needed_max) = (-2 * q - 1, 2 * q + 1);
    if w.min() > needed_min || w.max() < needed_max {
        return Err(plain(SynthesisFailure::WindowTooSmall { needed_min, needed_max }));
    }
    if run.d.basis_size(0) != 1 {
        return Err(plain(SynthesisFailure::NotNormalized { degree_zero_dim: run.d.basis_size(0) }));
    }
    run.homology_table().map_err(plain)?;

    let p_int = ring.reduce(ring.prime() as i64);
    let a = run.order_p_generator(q - 1).map_err(plain)?.neg();
    let b = run.solve(&a.scale(p_int), "d(b) = p a").map_err(plain)?;
    run.pass("alpha-1", format!("a = {}, b = {}", run.fmt(&a), run.fmt(&b)));

    let a_bar0 = run.order_p_generator(-q - 1).map_err(plain)?;
    let b_bar0 = run.solve(&a_bar0.scale(-p_int), "d(bbar) = -p abar").map_err(plain)?;

    let top = run.induction(&a, &b, -1, 1).map_err(plain)?;
    run.pass("nonnegative-part", format!("alpha_i = <alpha_1, p, alpha_(i-1)> = [-i a b^(i-1)] of order p for 1 <= i <= {top}"));

    // alpha_{-1} is fixed by <alpha_2, p, alpha_{-1}> = alpha_1 = [-a]; a
    // generator of the right group is only determined up to a unit.
    let lambda = run.merging_bracket(&a, &b, &a_bar0, &b_bar0).map_err(plain)?.coords[0];
    let (a_bar, b_bar) = match lambda.inverse() {
        Some(inv) => (a_bar0.scale(inv), b_bar0.scale(inv)),
        None => (a_bar0, b_bar0),
    };
    let bottom = run.induction(&a_bar, &b_bar, 1, -1).map_err(plain)?;
    run.range = (top, bottom);
    run.pass(
        "nonpositive-part",
        format!(
            "abar = {}, bbar = {}; alpha_-i = [i abar bbar^(i-1)] of order p for 1 <= i <= {bottom}",
            run.fmt(&a_bar),
            run.fmt(&b_bar)
        ),
    );

    let (b_bar, corrected) = correct_identity(run, &a, &b, &a_bar, &b_bar).map_err(plain)?;
    let theta_elem = run.mul(&b, &b_bar).map_err(plain)?;
    let theta = theta_elem.coords[run.d.unit_index()];
    if run.mul(&a, &b_bar).map_err(plain)? != run.mul(&a_bar, &b).map_err(plain)? {
        return Err(plain(SynthesisFailure::CycleIdentity("a bbar != abar b after correction".into())));
    }
    run.pass(
        "merging-A",
        format!(
            "theta = b bbar = {}; a bbar = abar b holds exactly{}",
            theta.signed(),
            if corrected { " after a p^(N-1) correction of bbar" } else { "" }
        ),
    );

    let bracket = run.merging_bracket(&a, &b, &a_bar, &b_bar).map_err(plain)?;
    let minus_a = run.class(&a.neg()).map_err(plain)?;
    let mut chains =
        ChosenChains { a: a.clone(), b: b.clone(), a_bar: a_bar.clone(), b_bar: b_bar.clone(), theta, merging_identity: false };
    if bracket != minus_a.scale(theta) {
        return Err((SynthesisFailure::MasseyRelation { i: 2, j: -1 }, Some(chains)));
    }
    if !theta.is_unit() {
        return Err((SynthesisFailure::ThetaNotUnit { theta: theta.signed() }, Some(chains)));
    }
    if minus_a.scale(theta) != minus_a {
        return Err((SynthesisFailure::MergingB("theta [-a] != [-a]".into()), Some(chains)));
    }
    chains.merging_identity = true;
    let inv = theta.inverse().expect("unit");
    chains.a_bar = a_bar.scale(inv);
    chains.b_bar = b_bar.scale(inv);
    let one = run.mul(&b, &chains.b_bar).map_err(plain)?;
    if one != run.d.unit() {
        return Err((SynthesisFailure::MergingB("b bbar != 1 after rescaling".into()), Some(chains)));
    }
    run.pass(
        "merging-B",
        format!("<alpha_2, p, alpha_-1> = theta [-a] = [-a], theta valuation {}; bbar rescaled by theta^-1", theta.valuation()),
    );

    let c = build_test_dga_c(ring, w).map_err(|e| (SynthesisFailure::Internal(e.to_string()), Some(chains.clone())))?;
    let phi = build_phi(run, &c, &chains).map_err(|e| (e, Some(chains.clone())))?;
    let cert = check_morphism(&phi);
    for s in cert.sweeps() {
        run.steps.push(StepRecord { name: format!("certify {}", s.name), passed: s.passed(), detail: s.detail() });
    }
    if !cert.passed() {
        let first = cert.sweeps().iter().find(|s| !s.passed()).map(|s| format!("{}: {}", s.name, s.detail()));
        return Err((SynthesisFailure::Certification(first.unwrap_or_default()), Some(chains)));
    }
    Ok((phi, chains, cert))
}

/// Run the construction on a normalized `D` (degree 0 spanned by the unit).
/// Success means the map passed all three certification sweeps.
pub fn synthesize_qiso(d: &DgaPresentation) -> SynthesisReport {
    let ring = d.ring();
    let mut run = Run {
        d,
        table: HomologyTable::new(d),
        ring,
        q: 2 * ring.prime() as i64 - 2,
        steps: Vec::new(),
        range: (0, 0),
    };
    match run_steps(&mut run) {
        Ok((phi, chains, cert)) => SynthesisReport {
            failure: None,
            morphism: Some(phi),
            chains: Some(chains),
            steps: run.steps,
            certificate: Some(cert),
            verified_range: run.range,
        },
        Err((failure, chains)) => {
            let mut steps = run.steps;
            steps.push(StepRecord { name: "synthesis".into(), passed: false, detail: failure.to_string() });
            SynthesisReport { failure: Some(failure), morphism: None, chains, steps, certificate: None, verified_range: run.range }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dga::{build_free_cdga, DegreeWindow, Expression, FreeCdgaSpec, GeneratorSpec};

    #[test]
    fn recognizes_the_test_dga() {
        let c = build_test_dga_c(Ring::new(3, 4).unwrap(), DegreeWindow::new(-24, 24).unwrap()).unwrap();
        let report = synthesize_qiso(&c);
        assert!(report.success(), "{}", report.render(&c));
        let chains = report.chains.unwrap();
        assert_eq!(format_element(&c, &chains.a), "-e");
        assert_eq!(format_element(&c, &chains.b), "-x");
        assert_eq!(chains.theta.signed(), 1);
        assert!(report.certificate.unwrap().passed());
        assert_eq!(report.verified_range, (6, 5));
    }

    #[test]
    fn corrupted_differential_is_rejected() {
        let ring = Ring::new(3, 4).unwrap();
        let spec = FreeCdgaSpec::new(vec![
            GeneratorSpec::new("x", 4, true, Expression::parse("9*e").unwrap()),
            GeneratorSpec::new("e", 3, false, Expression::zero()),
        ]);
        let d = build_free_cdga(&spec, ring, DegreeWindow::new(-24, 24).unwrap()).unwrap();
        let report = synthesize_qiso(&d);
        assert_eq!(
            report.failure.unwrap().to_string(),
            "homology mismatch at degree 3: expected Z/3, computed Z/9"
        );
        assert!(report.steps.last().unwrap().to_string().starts_with("STEP synthesis: FAIL — homology mismatch"));
    }

    #[test]
    fn small_window_is_rejected() {
        let c = build_test_dga_c(Ring::new(3, 3).unwrap(), DegreeWindow::new(-6, 6).unwrap()).unwrap();
        assert!(matches!(synthesize_qiso(&c).failure, Some(SynthesisFailure::WindowTooSmall { .. })));
    }
}
