//! Generator matrices of U_q(sl3) in the Gelfand-Zetlin basis at generic q.

use std::collections::BTreeMap;
use std::fmt;
use std::sync::Arc;

use rayon::prelude::*;
use serde::Serialize;

use crate::error::{QgzError, Result};
use crate::gzbasis::{Basis, GZPattern, RepLabel};
use crate::linalg::SparseMatrix;
use crate::qarith::{q_int, Jet, QParam, QPoint, C64};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Generator {
    H1,
    H2,
    E1,
    F1,
    E2,
    F2,
}

impl Generator {
    pub const ALL: [Generator; 6] = [
        Generator::H1,
        Generator::H2,
        Generator::E1,
        Generator::F1,
        Generator::E2,
        Generator::F2,
    ];

    pub fn name(&self) -> &'static str {
        match self {
            Generator::H1 => "h1",
            Generator::H2 => "h2",
            Generator::E1 => "e1",
            Generator::F1 => "f1",
            Generator::E2 => "e2",
            Generator::F2 => "f2",
        }
    }

    pub fn is_diagonal(&self) -> bool {
        matches!(self, Generator::H1 | Generator::H2)
    }

    /// Shift of the pyramid coordinates `(x, y)` from source to target.
    pub fn root_vector(&self) -> (i64, i64) {
        match self {
            Generator::H1 | Generator::H2 => (0, 0),
            Generator::E1 => (2, 0),
            Generator::F1 => (-2, 0),
            Generator::E2 => (-1, 3),
            Generator::F2 => (1, -3),
        }
    }
}

impl fmt::Display for Generator {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum Factor {
    P1,
    P2,
    P3,
}

/// Which entry of the second row changes: `p12` or `p22`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum Slot {
    S12,
    S22,
}

/// `prod sqrt([num]) / prod sqrt([den])`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Radical {
    pub num: Vec<i64>,
    pub den: Vec<i64>,
}

impl Radical {
    pub fn args(&self) -> impl Iterator<Item = i64> + '_ {
        self.num.iter().chain(self.den.iter()).copied()
    }

    pub fn eval(&self, point: &QPoint) -> Result<C64> {
        if self.num.contains(&0) {
            return Ok(C64::new(0.0, 0.0));
        }
        if self.args().any(|a| a < 0) {
            return Err(QgzError::Precondition(format!(
                "negative q-number in {self:?}"
            )));
        }
        let mut v = C64::new(1.0, 0.0);
        for &a in &self.num {
            v *= point.sqrt_q_int(a);
        }
        for &a in &self.den {
            let s = point.sqrt_q_int(a);
            if s == C64::new(0.0, 0.0) {
                return Err(QgzError::DivisionByZero(format!(
                    "[{a}] vanishes in {self:?}"
                )));
            }
            v /= s;
        }
        Ok(v)
    }
}

/// One off-diagonal matrix element of a raising or lowering generator.
#[derive(Clone, Debug, PartialEq)]
pub struct Move {
    pub target: GZPattern,
    pub radical: Radical,
}

fn p_args(which: Factor, slot: Slot, p: &GZPattern) -> Vec<i64> {
    let l = &p.label;
    let (p12, p22, p11) = (p.p12, p.p22, p.p11);
    match (which, slot) {
        (Factor::P1, Slot::S12) => vec![l.p13 - p12 + 1, p12 - l.p23 - 1, p12 - l.p33 - 1],
        (Factor::P1, Slot::S22) => vec![l.p13 - p22 + 1, l.p23 - p22 + 1, p22 - l.p33 - 1],
        (Factor::P2, Slot::S12) => vec![p12 - p11],
        (Factor::P2, Slot::S22) => vec![p11 - p22],
        (Factor::P3, Slot::S12) => vec![p12 - p22, p12 - p22 - 1],
        (Factor::P3, Slot::S22) => vec![p12 - p22, p12 - p22 + 1],
    }
}

/// The product of q-integers making up `P1`, `P2` or `P3` for a slot.
pub fn coefficient_p(which: Factor, slot: Slot, p: &GZPattern, q: &QParam) -> Jet {
    p_args(which, slot, p)
        .into_iter()
        .fold(Jet::one(), |acc, n| acc * q_int(n, q))
}

/// `P1 P2 / P3` at `p` for a slot, as a radical.
fn f2_radical(slot: Slot, p: &GZPattern) -> Radical {
    let mut num = p_args(Factor::P1, slot, p);
    num.extend(p_args(Factor::P2, slot, p));
    Radical {
        num,
        den: p_args(Factor::P3, slot, p),
    }
}

/// Eigenvalue of a Cartan generator on a state.
pub fn weight(gen: Generator, p: &GZPattern) -> i64 {
    let l = &p.label;
    match gen {
        Generator::H1 => 2 * p.p11 - p.p12 - p.p22 - 1,
        Generator::H2 => 2 * (p.p12 + p.p22) - p.p11 - (l.p13 + l.p23 + l.p33) - 1,
        _ => panic!("{gen} is not diagonal"),
    }
}

/// Nonzero-candidate targets of a raising or lowering generator on `p`.
/// Entries of e equal the entries of f with source and target swapped.
pub fn moves(gen: Generator, p: &GZPattern) -> Vec<Move> {
    let mut out = Vec::with_capacity(2);
    let mut push = |target: GZPattern, radical: Radical| {
        if target.is_valid() {
            out.push(Move { target, radical });
        }
    };
    match gen {
        Generator::E1 => {
            let t = p.with_row2(p.p12, p.p22, p.p11 + 1);
            push(
                t,
                Radical {
                    num: vec![p.p12 - p.p11, p.p11 - p.p22],
                    den: vec![],
                },
            );
        }
        Generator::F1 => {
            let t = p.with_row2(p.p12, p.p22, p.p11 - 1);
            push(
                t,
                Radical {
                    num: vec![p.p12 - p.p11 + 1, p.p11 - p.p22 - 1],
                    den: vec![],
                },
            );
        }
        Generator::F2 => {
            let t = p.with_row2(p.p12 - 1, p.p22, p.p11);
            push(t, f2_radical(Slot::S12, p));
            let t = p.with_row2(p.p12, p.p22 - 1, p.p11);
            push(t, f2_radical(Slot::S22, p));
        }
        Generator::E2 => {
            let t = p.with_row2(p.p12 + 1, p.p22, p.p11);
            push(t, f2_radical(Slot::S12, &t));
            let t = p.with_row2(p.p12, p.p22 + 1, p.p11);
            push(t, f2_radical(Slot::S22, &t));
        }
        Generator::H1 | Generator::H2 => {}
    }
    out
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum OperatorTag {
    Generator(Generator),
    Casimir,
}

impl fmt::Display for OperatorTag {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            OperatorTag::Generator(g) => write!(f, "{g}"),
            OperatorTag::Casimir => f.write_str("casimir"),
        }
    }
}

/// A generator or Casimir matrix over an ordered basis; columns are sources.
#[derive(Clone, Debug)]
pub struct SparseOperator {
    pub label: RepLabel,
    pub basis: Arc<Basis>,
    pub tag: OperatorTag,
    pub matrix: SparseMatrix,
}

/// Builds `gen` at an arbitrary evaluation point on the plain GZ basis.
pub fn build_matrix_at(gen: Generator, basis: &Basis, point: &QPoint) -> Result<SparseMatrix> {
    if gen.is_diagonal() {
        return Ok(SparseMatrix::diagonal(
            basis
                .states()
                .iter()
                .map(|s| C64::new(weight(gen, &s.pattern) as f64, 0.0)),
        ));
    }
    let cols: Result<Vec<BTreeMap<usize, C64>>> = basis
        .states()
        .par_iter()
        .map(|s| {
            let mut col = BTreeMap::new();
            for mv in moves(gen, &s.pattern) {
                let v = mv.radical.eval(point)?;
                if v != C64::new(0.0, 0.0) {
                    let row = basis
                        .index_of(mv.target.key())
                        .expect("valid target is in basis");
                    col.insert(row, v);
                }
            }
            Ok(col)
        })
        .collect();
    Ok(SparseMatrix::from_columns(cols?))
}

pub fn build_operator(gen: Generator, label: &RepLabel, q: &QParam) -> Result<SparseOperator> {
    if let QParam::Root(_) = q {
        return Err(QgzError::Precondition(
            "root-of-unity operators are built by the regularization".into(),
        ));
    }
    let basis = Arc::new(Basis::unprimed(label));
    let matrix = build_matrix_at(gen, &basis, &q.point())?;
    Ok(SparseOperator {
        label: *label,
        basis,
        tag: OperatorTag::Generator(gen),
        matrix,
    })
}

/// The six generator matrices over one basis.
#[derive(Clone, Debug)]
pub struct GeneratorSet {
    pub h1: SparseMatrix,
    pub h2: SparseMatrix,
    pub e1: SparseMatrix,
    pub f1: SparseMatrix,
    pub e2: SparseMatrix,
    pub f2: SparseMatrix,
}

impl GeneratorSet {
    pub fn build(basis: &Basis, point: &QPoint) -> Result<Self> {
        Ok(Self {
            h1: build_matrix_at(Generator::H1, basis, point)?,
            h2: build_matrix_at(Generator::H2, basis, point)?,
            e1: build_matrix_at(Generator::E1, basis, point)?,
            f1: build_matrix_at(Generator::F1, basis, point)?,
            e2: build_matrix_at(Generator::E2, basis, point)?,
            f2: build_matrix_at(Generator::F2, basis, point)?,
        })
    }

    pub fn get(&self, gen: Generator) -> &SparseMatrix {
        match gen {
            Generator::H1 => &self.h1,
            Generator::H2 => &self.h2,
            Generator::E1 => &self.e1,
            Generator::F1 => &self.f1,
            Generator::E2 => &self.e2,
            Generator::F2 => &self.f2,
        }
    }

    pub fn dim(&self) -> usize {
        self.h1.dim()
    }

    /// `e3 = e1 e2 - q^-1 e2 e1`.
    pub fn e3(&self, q: C64) -> SparseMatrix {
        self.e1
            .matmul(&self.e2)
            .axpy(-q.inv(), &self.e2.matmul(&self.e1))
    }

    /// `f3 = f2 f1 - q f1 f2`.
    pub fn f3(&self, q: C64) -> SparseMatrix {
        self.f2.matmul(&self.f1).axpy(-q, &self.f1.matmul(&self.f2))
    }
}

/// Function of an integer-diagonal matrix, applied entrywise on the diagonal.
fn diag_map(h: &SparseMatrix, f: impl Fn(i64) -> C64) -> SparseMatrix {
    SparseMatrix::diagonal(
        h.diagonal_values()
            .into_iter()
            .map(|v| f(v.re.round() as i64)),
    )
}

/// `C = (q - q^-1)^2 f1 e1 + q^(h1+1) + q^(-h1-1)`.
pub fn casimir_matrix(set: &GeneratorSet, point: &QPoint) -> SparseMatrix {
    let q = point.q();
    let s = (q - q.inv()) * (q - q.inv());
    let k = diag_map(&set.h1, |h| point.pow(h + 1) + point.pow(-h - 1));
    set.f1.matmul(&set.e1).scale(s).add(&k)
}

pub fn casimir_sl2(label: &RepLabel, q: &QParam) -> Result<SparseOperator> {
    if let QParam::Root(_) = q {
        return Err(QgzError::Precondition(
            "use the regularized Casimir at a root".into(),
        ));
    }
    let basis = Arc::new(Basis::unprimed(label));
    let point = q.point();
    let set = GeneratorSet::build(&basis, &point)?;
    Ok(SparseOperator {
        label: *label,
        basis,
        tag: OperatorTag::Casimir,
        matrix: casimir_matrix(&set, &point),
    })
}

/// Per-relation residual max-norms.
#[derive(Clone, Debug, Serialize)]
#[serde(rename_all = "camelCase")]
pub struct RelationReport {
    pub residuals: BTreeMap<String, f64>,
    pub tolerance: f64,
    pub passed: bool,
}

impl RelationReport {
    pub fn new(residuals: BTreeMap<String, f64>, tolerance: f64) -> Self {
        let passed = residuals.values().all(|&r| r.is_finite() && r < tolerance);
        Self {
            residuals,
            tolerance,
            passed,
        }
    }

    pub fn max_residual(&self) -> f64 {
        self.residuals.values().copied().fold(0.0, f64::max)
    }
}

/// Residuals of the defining relations of U_q(sl3) at `point`.
pub fn relation_residuals(set: &GeneratorSet, point: &QPoint) -> BTreeMap<String, f64> {
    let q = point.q();
    let a = [[2.0, -1.0], [-1.0, 2.0]];
    let hs = [&set.h1, &set.h2];
    let es = [&set.e1, &set.e2];
    let fs = [&set.f1, &set.f2];
    let mut out = BTreeMap::new();
    for i in 0..2 {
        for j in 0..2 {
            let aij = C64::new(a[i][j], 0.0);
            let r = hs[i].commutator(es[j]).axpy(-aij, es[j]).max_abs();
            out.insert(format!("[h{},e{}]", i + 1, j + 1), r);
            let r = hs[i].commutator(fs[j]).axpy(aij, fs[j]).max_abs();
            out.insert(format!("[h{},f{}]", i + 1, j + 1), r);
            let mut c = es[i].commutator(fs[j]);
            if i == j {
                let qh = diag_map(hs[i], |h| (point.pow(h) - point.pow(-h)) / (q - q.inv()));
                c = c.sub(&qh);
            }
            out.insert(format!("[e{},f{}]", i + 1, j + 1), c.max_abs());
        }
    }
    let q2 = q + q.inv();
    for (name, x, y) in [
        ("serre e1e1e2", es[0], es[1]),
        ("serre e2e2e1", es[1], es[0]),
        ("serre f1f1f2", fs[0], fs[1]),
        ("serre f2f2f1", fs[1], fs[0]),
    ] {
        let xx = x.matmul(x);
        let r = xx
            .matmul(y)
            .axpy(-q2, &x.matmul(y).matmul(x))
            .add(&y.matmul(&xx));
        out.insert(name.to_string(), r.max_abs());
    }
    out
}

pub const GENERIC_TOL: f64 = 1e-9;

pub fn verify_generic(label: &RepLabel, q: &QParam) -> Result<RelationReport> {
    if let QParam::Root(_) = q {
        return Err(QgzError::Precondition(
            "verify_generic needs a generic q".into(),
        ));
    }
    let basis = Basis::unprimed(label);
    let point = q.point();
    let set = GeneratorSet::build(&basis, &point)?;
    Ok(RelationReport::new(
        relation_residuals(&set, &point),
        GENERIC_TOL,
    ))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::gzbasis::coordinates;
    use proptest::prelude::*;

    fn label(a: i64, b: i64, c: i64) -> RepLabel {
        RepLabel::new(a, b, c).unwrap()
    }

    fn generic() -> QParam {
        QParam::default_generic()
    }

    fn qi(n: i64) -> C64 {
        generic().point().q_int(n)
    }

    #[test]
    fn p_factor_examples() {
        let q = generic();
        let lab = label(4, 2, 0);
        let p = lab.pattern(3, 2, 3).unwrap();
        assert_eq!(
            coefficient_p(Factor::P2, Slot::S12, &p, &q).value,
            C64::new(0.0, 0.0)
        );
        let p = lab.pattern(4, 1, 2).unwrap();
        let v = coefficient_p(Factor::P3, Slot::S12, &p, &q).value;
        assert!((v - qi(3) * qi(2)).norm() < 1e-14);
        let p = lab.pattern(4, 2, 3).unwrap();
        let v = coefficient_p(Factor::P1, Slot::S22, &p, &q).value;
        assert!((v - qi(3) * qi(1) * qi(1)).norm() < 1e-14);
    }

    #[test]
    fn operator_examples() {
        let q = generic();
        let lab = label(4, 2, 0);
        let h1 = build_operator(Generator::H1, &lab, &q).unwrap();
        let hw = h1.basis.index_of((4, 2, 4)).unwrap();
        assert_eq!(h1.matrix.get(hw, hw), C64::new(1.0, 0.0));
        assert_eq!(h1.matrix.nnz(), 8);

        let e1 = build_operator(Generator::E1, &lab, &q).unwrap();
        assert!(e1.matrix.column(hw).is_empty());

        let lab = label(8, 4, 0);
        let f1 = build_operator(Generator::F1, &lab, &q).unwrap();
        let s = f1.basis.index_of((8, 4, 8)).unwrap();
        let t = f1.basis.index_of((8, 4, 7)).unwrap();
        let v = f1.matrix.get(t, s);
        assert!((v * v - qi(1) * qi(3)).norm() < 1e-14);
        let p = generic().point();
        assert!((v - p.sqrt_q_int(1) * p.sqrt_q_int(3)).norm() < 1e-14);
        assert_eq!(f1.matrix.column(s).len(), 1);
    }

    #[test]
    fn root_builds_are_rejected() {
        let q = QParam::root(3, 1).unwrap();
        assert!(build_operator(Generator::E1, &label(4, 2, 0), &q).is_err());
    }

    #[test]
    fn relation_examples() {
        let q = generic();
        let r = verify_generic(&label(6, 3, 0), &q).unwrap();
        assert!(r.residuals["[e1,f2]"] < 1e-12);
        assert!(r.residuals["[e1,f1]"] < 1e-9);
        assert!(r.passed, "{r:?}");
        let r = verify_generic(&label(5, 2, 0), &q).unwrap();
        assert!(r.residuals["serre e1e1e2"] < 1e-9);
    }

    #[test]
    fn broken_coefficient_is_detected() {
        let q = generic();
        let basis = Basis::unprimed(&label(4, 2, 0));
        let point = q.point();
        let mut set = GeneratorSet::build(&basis, &point).unwrap();
        let (r, c, v) = set.f2.entries()[0];
        set.f2.set(r, c, -v);
        let rep = RelationReport::new(relation_residuals(&set, &point), GENERIC_TOL);
        assert!(!rep.passed);
    }

    #[test]
    fn casimir_examples() {
        let q = generic();
        let z = q.q();
        let c = casimir_sl2(&label(2, 1, 0), &q).unwrap();
        assert!((c.matrix.get(0, 0) - (z + z.inv())).norm() < 1e-12);

        let lab = label(4, 2, 0);
        let c = casimir_sl2(&lab, &q).unwrap();
        for (i, s) in c.basis.states().iter().enumerate() {
            let d = s.pattern.family_dim();
            let expect = z.powi(d as i32) + z.powi(-d as i32);
            assert!((c.matrix.get(i, i) - expect).norm() < 1e-10);
            if (s.pattern.p12, s.pattern.p22) == (4, 1) {
                assert!((c.matrix.get(i, i) - (z.powi(3) + z.powi(-3))).norm() < 1e-10);
            }
        }
        assert_eq!(c.matrix.nnz(), 8);
        let set = GeneratorSet::build(&c.basis, &q.point()).unwrap();
        for g in [&set.e1, &set.f1, &set.h1] {
            assert!(c.matrix.commutator(g).max_abs() < 1e-9);
        }
    }

    #[test]
    fn generic_relations_hold_up_to_dimension_343() {
        let q = generic();
        for lab in crate::gzbasis::labels_up_to(7) {
            let r = verify_generic(&lab, &q).unwrap();
            assert!(r.passed, "{lab}: {:?}", r.residuals);
        }
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(40))]

        #[test]
        fn weights_shift_by_root_vectors(a in 1i64..=5, b in 1i64..=5) {
            let lab = label(a + b, b, 0);
            let basis = Basis::unprimed(&lab);
            for g in [Generator::E1, Generator::F1, Generator::E2, Generator::F2] {
                let m = build_matrix_at(g, &basis, &generic().point()).unwrap();
                for (r, c, _) in m.entries() {
                    let (s, t) = (coordinates(basis.pattern(c)), coordinates(basis.pattern(r)));
                    prop_assert_eq!((t.x - s.x, t.y - s.y), g.root_vector());
                }
            }
        }

        #[test]
        fn e_is_transpose_of_f(a in 1i64..=5, b in 1i64..=5, t in 0.05f64..0.45) {
            prop_assume!(QParam::generic(t).is_ok());
            let lab = label(a + b, b, 0);
            let basis = Basis::unprimed(&lab);
            let point = QPoint::Circle { angle: t };
            for (e, f) in [(Generator::E1, Generator::F1), (Generator::E2, Generator::F2)] {
                let me = build_matrix_at(e, &basis, &point).unwrap();
                let mf = build_matrix_at(f, &basis, &point).unwrap();
                prop_assert_eq!(me.nnz(), mf.nnz());
                for (r, c, v) in me.entries() {
                    prop_assert!((mf.get(c, r) - v).norm() < 1e-13);
                }
            }
        }

        #[test]
        fn casimir_is_block_scalar(a in 1i64..=5, b in 1i64..=5) {
            let lab = label(a + b, b, 0);
            let c = casimir_sl2(&lab, &generic()).unwrap();
            let mut seen: BTreeMap<(i64, i64), C64> = BTreeMap::new();
            for (r, col, v) in c.matrix.entries() {
                if r != col {
                    prop_assert!(v.norm() < 1e-10);
                    continue;
                }
                let p = c.basis.pattern(r);
                let e = seen.entry((p.p12, p.p22)).or_insert(v);
                prop_assert!((*e - v).norm() < 1e-10);
            }
        }
    }
}
