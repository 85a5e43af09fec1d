//! Regularization at an odd root of unity.
//!
//! Each S1-pair `(A, B)` with `p12 - p22 > l` is replaced by
//! `A' = sqrt([l]) A` and `B' = c A + (tau / sqrt([l])) B`, where
//! `c = sqrt([l-1]) / (sqrt([l+1]) sqrt([l]))` and `tau` is a fourth root of
//! unity fixed per pair so that every matrix element has a finite limit.
//! Limits are taken in closed form with [`RootSum`]; [`limit_oracle`]
//! recomputes them numerically along `q = zeta e^eps`.

use std::collections::{BTreeMap, VecDeque};
use std::sync::Arc;

use log::debug;
use rayon::prelude::*;
use serde::Serialize;

use crate::error::{QgzError, Result};
use crate::gzbasis::{
    enumerate_basis, in_teepee, s1_transform, Basis, BasisState, GZPattern, RepLabel,
};
use crate::linalg::SparseMatrix;
use crate::qarith::{quarter_phase, QParam, QPoint, RootOfUnity, RootSum, RootTerm, C64, I};
use crate::repgeneric::{
    build_matrix_at, casimir_matrix, moves, relation_residuals, weight, Generator, GeneratorSet,
    OperatorTag, Radical, RelationReport, SparseOperator,
};

const ZERO: C64 = C64::new(0.0, 0.0);
const ONE: C64 = C64::new(1.0, 0.0);

pub const ROOT_TOL: f64 = 1e-8;
pub const ORACLE_TOL: f64 = 1e-6;

/// Default `eps` schedule of the oracle. Entries expand in powers of `sqrt(eps)`.
pub const DEFAULT_EPS: [f64; 5] = [1e-3, 1e-4, 1e-5, 1e-6, 1e-7];

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "camelCase")]
pub struct Pair {
    pub a: usize,
    pub b: usize,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Role {
    Plain,
    A(usize),
    B(usize),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "camelCase")]
pub struct TeepeeCensus {
    pub teepee: usize,
    pub pairs: usize,
    pub primed: usize,
    pub self_paired: usize,
}

/// The basis after mixing: same patterns and order, primed flags on pair members.
#[derive(Clone, Debug)]
pub struct MixedBasis {
    pub label: RepLabel,
    pub l: u32,
    pub basis: Arc<Basis>,
    pub pairs: Vec<Pair>,
    pub self_paired: Vec<usize>,
    pub teepee: Vec<usize>,
    roles: Vec<Role>,
}

impl MixedBasis {
    pub fn role(&self, i: usize) -> Role {
        self.roles[i]
    }

    pub fn len(&self) -> usize {
        self.basis.len()
    }

    pub fn is_empty(&self) -> bool {
        self.basis.is_empty()
    }

    pub fn census(&self) -> TeepeeCensus {
        TeepeeCensus {
            teepee: self.teepee.len(),
            pairs: self.pairs.len(),
            primed: 2 * self.pairs.len(),
            self_paired: self.self_paired.len(),
        }
    }
}

pub fn check_label(label: &RepLabel, l: u32) -> Result<()> {
    label.with_root_order(l).map(|_| ())
}

pub fn build_mixed_basis(label: &RepLabel, l: u32) -> Result<MixedBasis> {
    check_label(label, l)?;
    let patterns = enumerate_basis(label);
    let plain = Basis::new(
        *label,
        patterns
            .iter()
            .map(|&pattern| BasisState {
                pattern,
                primed: false,
            })
            .collect(),
    );
    let mut roles = vec![Role::Plain; patterns.len()];
    let mut pairs = Vec::new();
    let mut self_paired = Vec::new();
    let mut teepee = Vec::new();
    for (i, p) in patterns.iter().enumerate() {
        if !in_teepee(p, l) {
            continue;
        }
        teepee.push(i);
        let d = p.family_dim();
        if d == l as i64 {
            self_paired.push(i);
        } else if d > l as i64 {
            let b = plain
                .index_of(s1_transform(p, l).key())
                .expect("S1 image of a teepee state is valid");
            roles[i] = Role::A(pairs.len());
            roles[b] = Role::B(pairs.len());
            pairs.push(Pair { a: i, b });
        }
    }
    let states = patterns
        .iter()
        .zip(&roles)
        .map(|(&pattern, r)| BasisState {
            pattern,
            primed: *r != Role::Plain,
        })
        .collect();
    Ok(MixedBasis {
        label: *label,
        l,
        basis: Arc::new(Basis::new(*label, states)),
        pairs,
        self_paired,
        teepee,
        roles,
    })
}

pub fn is_integrable(label: &RepLabel, l: u32) -> Result<bool> {
    Ok(build_mixed_basis(label, l)?.pairs.is_empty())
}

/// `[[sqrt([l]), 0], [c, 1/sqrt([l])]]` at a point where `[l]` does not vanish.
pub fn mixing_matrix_at(l: u32, point: &QPoint) -> Result<[[C64; 2]; 2]> {
    let l = l as i64;
    let s = point.sqrt_q_int(l);
    if s == ZERO || matches!(point, QPoint::Root(_)) {
        return Err(QgzError::Precondition(
            "the mixing matrix diverges at the root".into(),
        ));
    }
    let c = point.sqrt_q_int(l - 1) / (point.sqrt_q_int(l + 1) * s);
    Ok([[s, ZERO], [c, s.inv()]])
}

pub fn mixing_matrix(l: u32, q: &QParam) -> Result<[[C64; 2]; 2]> {
    mixing_matrix_at(l, &q.point())
}

fn radical_term(r: &Radical, root: &RootOfUnity) -> Option<RootTerm> {
    if r.num.contains(&0) {
        return None;
    }
    let mut t = RootTerm::one();
    for &a in &r.num {
        t = t * RootTerm::sqrt_q_int(a, root);
    }
    for &a in &r.den {
        t = t * RootTerm::sqrt_q_int(a, root).inv();
    }
    Some(t)
}

/// Generic matrix elements out of old state `j` as root expansions.
fn symbolic_moves(
    gen: Generator,
    mb: &MixedBasis,
    j: usize,
    root: &RootOfUnity,
) -> Vec<(usize, RootTerm)> {
    moves(gen, mb.basis.pattern(j))
        .iter()
        .filter_map(|mv| {
            let t = mb.basis.index_of(mv.target.key())?;
            radical_term(&mv.radical, root).map(|x| (t, x))
        })
        .collect()
}

/// `sqrt([l-1]) / (sqrt([l+1]) sqrt([l]))`.
fn c_term(root: &RootOfUnity) -> RootTerm {
    let l = root.l() as i64;
    RootTerm::sqrt_q_int(l - 1, root)
        * RootTerm::sqrt_q_int(l + 1, root).inv()
        * RootTerm::lambda_power(-1)
}

/// Old-basis components of a new basis vector.
fn new_to_old(
    mb: &MixedBasis,
    phases: &[C64],
    root: &RootOfUnity,
    s: usize,
) -> Vec<(usize, RootTerm)> {
    match mb.role(s) {
        Role::Plain => vec![(s, RootTerm::one())],
        Role::A(_) => vec![(s, RootTerm::lambda_power(1))],
        Role::B(p) => vec![
            (mb.pairs[p].a, c_term(root)),
            (s, RootTerm::lambda_power(-1).scale(phases[p])),
        ],
    }
}

/// New-basis components of an old basis vector.
fn old_to_new(
    mb: &MixedBasis,
    phases: &[C64],
    root: &RootOfUnity,
    t: usize,
) -> Vec<(usize, RootTerm)> {
    match mb.role(t) {
        Role::Plain => vec![(t, RootTerm::one())],
        Role::A(_) => vec![(t, RootTerm::lambda_power(-1))],
        Role::B(p) => {
            let inv = phases[p].inv();
            vec![
                (t, RootTerm::lambda_power(1).scale(inv)),
                (mb.pairs[p].a, c_term(root).scale(-inv)),
            ]
        }
    }
}

/// Fixes the per-pair phases from the finiteness conditions of the leading divergences.
pub fn fix_pair_phases(mb: &MixedBasis, root: &RootOfUnity) -> Result<Vec<C64>> {
    let n = mb.pairs.len();
    let mut anchors: Vec<(usize, C64)> = Vec::new();
    // (s, t, rho) meaning tau_s = rho * tau_t
    let mut edges: Vec<(usize, usize, C64)> = Vec::new();
    let c = c_term(root);
    let lam_m = RootTerm::lambda_power(-1);
    let same_order = |x: &RootTerm, y: &RootTerm| x.half_order == y.half_order;
    for gen in [Generator::E1, Generator::F1, Generator::E2, Generator::F2] {
        let table: Vec<Vec<(usize, RootTerm)>> = (0..mb.len())
            .map(|j| symbolic_moves(gen, mb, j, root))
            .collect();
        let find = |j: usize, t: usize| table[j].iter().find(|(k, _)| *k == t).map(|(_, x)| *x);
        for (j, moves_j) in table.iter().enumerate() {
            for &(t, x) in moves_j {
                match (mb.role(j), mb.role(t)) {
                    (Role::Plain, Role::A(pt)) => {
                        if let Some(y) = find(j, mb.pairs[pt].b) {
                            let (t1, t2) = (x * lam_m, c * y);
                            if same_order(&t1, &t2) && t1.half_order < 0 {
                                anchors.push((pt, t2.coeff.value / t1.coeff.value));
                            }
                        }
                    }
                    (Role::A(ps), Role::Plain) => {
                        if let Some(y) = find(mb.pairs[ps].b, t) {
                            let (t1, t2) = (c * x, y * lam_m);
                            if same_order(&t1, &t2) && t1.half_order < 0 {
                                anchors.push((ps, -t1.coeff.value / t2.coeff.value));
                            }
                        }
                    }
                    (Role::A(ps), Role::A(pt)) => {
                        if let Some(y) = find(mb.pairs[ps].b, mb.pairs[pt].b) {
                            if same_order(&x, &y) && x.half_order <= 1 {
                                edges.push((ps, pt, x.coeff.value / y.coeff.value));
                            }
                        }
                    }
                    _ => {}
                }
            }
        }
    }

    let mut tau: Vec<Option<C64>> = vec![None; n];
    let mut adj: Vec<Vec<(usize, C64)>> = vec![Vec::new(); n];
    for &(s, t, rho) in &edges {
        adj[t].push((s, rho));
        adj[s].push((t, rho.inv()));
    }
    let assign = |tau: &mut Vec<Option<C64>>, p: usize, v: C64| -> Result<bool> {
        let v = snap_phase(v)?;
        match tau[p] {
            Some(old) if (old - v).norm() > 1e-6 => {
                Err(QgzError::GaugeConflict(format!("pair {p}: {old} vs {v}")))
            }
            Some(_) => Ok(false),
            None => {
                tau[p] = Some(v);
                Ok(true)
            }
        }
    };
    let mut queue = VecDeque::new();
    for &(p, v) in &anchors {
        if assign(&mut tau, p, v)? {
            queue.push_back(p);
        }
    }
    let mut next_free = 0;
    loop {
        while let Some(p) = queue.pop_front() {
            let v = tau[p].expect("queued pairs are assigned");
            for &(q, rho) in &adj[p] {
                if assign(&mut tau, q, rho * v)? {
                    queue.push_back(q);
                }
            }
        }
        while next_free < n && tau[next_free].is_some() {
            next_free += 1;
        }
        if next_free == n {
            break;
        }
        debug!("pair {next_free} of {} has a free phase; using 1", mb.label);
        tau[next_free] = Some(ONE);
        queue.push_back(next_free);
    }
    Ok(tau.into_iter().map(|t| t.unwrap_or(ONE)).collect())
}

fn snap_phase(v: C64) -> Result<C64> {
    if (v.norm() - 1.0).abs() > 1e-6 {
        return Err(QgzError::GaugeConflict(format!(
            "required pair phase {v} is not unimodular"
        )));
    }
    let k = (v.arg() / std::f64::consts::FRAC_PI_2).round() as i64;
    let snapped = quarter_phase(k);
    Ok(if (snapped - v).norm() < 1e-6 {
        snapped
    } else {
        v
    })
}

/// Closed-form column `s` of the regularized `gen`.
fn regularized_column(
    gen: Generator,
    mb: &MixedBasis,
    phases: &[C64],
    root: &RootOfUnity,
    s: usize,
) -> Result<BTreeMap<usize, C64>> {
    let mut sums: BTreeMap<usize, RootSum> = BTreeMap::new();
    for (j, alpha) in new_to_old(mb, phases, root, s) {
        for (t, beta) in symbolic_moves(gen, mb, j, root) {
            for (u, gamma) in old_to_new(mb, phases, root, t) {
                sums.entry(u).or_default().push(alpha * beta * gamma);
            }
        }
    }
    let mut col = BTreeMap::new();
    for (u, sum) in sums {
        let v = sum.limit(root).map_err(|e| {
            QgzError::Divergent(format!(
                "{gen} {} <- {}: {e}",
                mb.basis.pattern(u),
                mb.basis.pattern(s)
            ))
        })?;
        if v != ZERO {
            col.insert(u, v);
        }
    }
    Ok(col)
}

/// The regularized representation at `q = zeta`.
#[derive(Clone, Debug)]
pub struct RegularizedRep {
    pub label: RepLabel,
    pub root: RootOfUnity,
    pub mixed: MixedBasis,
    pub phases: Vec<C64>,
    pub ops: GeneratorSet,
}

impl RegularizedRep {
    pub fn build(label: &RepLabel, root: RootOfUnity) -> Result<Self> {
        let mixed = build_mixed_basis(label, root.l())?;
        let phases = fix_pair_phases(&mixed, &root)?;
        let build = |gen: Generator| -> Result<SparseMatrix> {
            if gen.is_diagonal() {
                return Ok(SparseMatrix::diagonal(
                    mixed
                        .basis
                        .states()
                        .iter()
                        .map(|s| C64::new(weight(gen, &s.pattern) as f64, 0.0)),
                ));
            }
            let cols: Result<Vec<_>> = (0..mixed.len())
                .into_par_iter()
                .map(|s| regularized_column(gen, &mixed, &phases, &root, s))
                .collect();
            Ok(SparseMatrix::from_columns(cols?))
        };
        let ops = GeneratorSet {
            h1: build(Generator::H1)?,
            h2: build(Generator::H2)?,
            e1: build(Generator::E1)?,
            f1: build(Generator::F1)?,
            e2: build(Generator::E2)?,
            f2: build(Generator::F2)?,
        };
        for g in Generator::ALL {
            if !ops.get(g).is_finite() {
                return Err(QgzError::Divergent(format!(
                    "non-finite entry in regularized {g}"
                )));
            }
        }
        Ok(Self {
            label: *label,
            root,
            mixed,
            phases,
            ops,
        })
    }

    pub fn basis(&self) -> &Arc<Basis> {
        &self.mixed.basis
    }

    pub fn point(&self) -> QPoint {
        QPoint::Root(self.root)
    }

    pub fn operator(&self, gen: Generator) -> SparseOperator {
        SparseOperator {
            label: self.label,
            basis: self.mixed.basis.clone(),
            tag: OperatorTag::Generator(gen),
            matrix: self.ops.get(gen).clone(),
        }
    }

    pub fn casimir(&self) -> SparseOperator {
        SparseOperator {
            label: self.label,
            basis: self.mixed.basis.clone(),
            tag: OperatorTag::Casimir,
            matrix: casimir_matrix(&self.ops, &self.point()),
        }
    }
}

pub fn regularized_operator(
    gen: Generator,
    label: &RepLabel,
    root: RootOfUnity,
) -> Result<SparseOperator> {
    Ok(RegularizedRep::build(label, root)?.operator(gen))
}

/// Column `s` of regularized `e1` or `f1` written out case by case, with the
/// shortcut terms onto and off the primed range and the derivative cross terms
/// `K [d] / (2 a)`, `K = sqrt([l-1]) / sqrt([l+1])`.
pub fn sl2_closed_form_column(
    gen: Generator,
    mb: &MixedBasis,
    phases: &[C64],
    root: &RootOfUnity,
    s: usize,
) -> BTreeMap<usize, C64> {
    let up = match gen {
        Generator::E1 => true,
        Generator::F1 => false,
        _ => panic!("closed form covers e1 and f1 only"),
    };
    let z = QPoint::Root(*root);
    let l = root.l() as i64;
    let p = *mb.basis.pattern(s);
    let step = if up { 1 } else { -1 };
    let mut out = BTreeMap::new();
    // generic sl(2) coefficient between p11 = k and k + step in family (p12, p22)
    let coeff = |p12: i64, p22: i64, k: i64| -> C64 {
        if up {
            z.sqrt_q_int(p12 - k) * z.sqrt_q_int(k - p22)
        } else {
            z.sqrt_q_int(p12 - k + 1) * z.sqrt_q_int(k - p22 - 1)
        }
    };
    let target = |q: &GZPattern, k: i64| mb.basis.index_of((q.p12, q.p22, k + step));
    let k_const = z.sqrt_q_int(l - 1) / z.sqrt_q_int(l + 1);
    let d = p.family_dim();
    let t = target(&p, p.p11);
    match (mb.role(s), t.map(|t| mb.role(t))) {
        (_, None) if !matches!(mb.role(s), Role::B(_)) => {}
        (Role::Plain, Some(Role::A(_))) => {
            out.insert(t.unwrap(), z.sqrt_q_int(d - l));
        }
        (Role::Plain, _) => {
            out.insert(t.unwrap(), coeff(p.p12, p.p22, p.p11));
        }
        (Role::A(_), Some(Role::A(_))) => {
            out.insert(t.unwrap(), coeff(p.p12, p.p22, p.p11));
        }
        (Role::A(_), _) => {}
        (Role::B(ps), tr) => {
            let a = *mb.basis.pattern(mb.pairs[ps].a);
            let da = a.family_dim();
            if let Some(Role::B(pt)) = tr {
                let b = coeff(p.p12, p.p22, p.p11);
                out.insert(t.unwrap(), phases[ps] / phases[pt] * b);
                let aa = coeff(a.p12, a.p22, a.p11);
                out.insert(mb.pairs[pt].a, k_const * z.q_int(da) / (2.0 * aa));
            } else {
                let u = target(&a, a.p11).expect("A family continues past the primed range");
                out.insert(u, k_const * z.sqrt_q_int(da - l));
            }
        }
    }
    out.retain(|_, v| *v != ZERO);
    out
}

/// Relation residuals and nilpotency at the root.
#[derive(Clone, Debug, Serialize)]
#[serde(rename_all = "camelCase")]
pub struct RootReport {
    pub relations: RelationReport,
    pub nilpotency: BTreeMap<String, f64>,
    pub cartan_order: f64,
    pub tolerance: f64,
    pub passed: bool,
}

pub fn verify_root(rep: &RegularizedRep) -> RootReport {
    let point = rep.point();
    let relations = RelationReport::new(relation_residuals(&rep.ops, &point), ROOT_TOL);
    let l = rep.root.l();
    let q = point.q();
    let mut nilpotency = BTreeMap::new();
    let e3 = rep.ops.e3(q);
    let f3 = rep.ops.f3(q);
    for (name, m) in [
        ("e1", &rep.ops.e1),
        ("e2", &rep.ops.e2),
        ("e3", &e3),
        ("f1", &rep.ops.f1),
        ("f2", &rep.ops.f2),
        ("f3", &f3),
    ] {
        nilpotency.insert(format!("{name}^{l}"), m.pow(l).max_abs());
    }
    let cartan_order = [&rep.ops.h1, &rep.ops.h2]
        .iter()
        .flat_map(|h| h.diagonal_values())
        .map(|h| (point.pow(2 * l as i64 * h.re.round() as i64) - ONE).norm())
        .fold(0.0, f64::max);
    let passed =
        relations.passed && nilpotency.values().all(|&v| v < ROOT_TOL) && cartan_order < ROOT_TOL;
    RootReport {
        relations,
        nilpotency,
        cartan_order,
        tolerance: ROOT_TOL,
        passed,
    }
}

/// Polynomial extrapolation to `h = 0` (Neville).
pub fn extrapolate_to_zero(h: &[f64], v: &[C64]) -> C64 {
    let mut p = v.to_vec();
    let n = p.len();
    for m in 1..n {
        for i in 0..n - m {
            p[i] = (p[i + 1] * h[i] - p[i] * h[i + m]) / (h[i] - h[i + m]);
        }
    }
    p[0]
}

/// Regularized operator recomputed numerically: generic matrices at
/// `q = zeta e^eps`, conjugated by the pair mixing, extrapolated in `sqrt(eps)`.
#[derive(Clone, Debug)]
pub struct OracleResult {
    pub matrix: SparseMatrix,
    /// Largest change when the coarsest `eps` is dropped.
    pub max_error_estimate: f64,
}

pub fn limit_oracle(
    gen: Generator,
    mb: &MixedBasis,
    phases: &[C64],
    root: &RootOfUnity,
    eps: &[f64],
) -> Result<OracleResult> {
    if eps.len() < 3
        || eps
            .windows(2)
            .any(|w| w[0].partial_cmp(&w[1]) != Some(std::cmp::Ordering::Greater))
        || eps.iter().any(|&e| e <= 0.0)
    {
        return Err(QgzError::InvalidParameter(
            "eps schedule must be positive, strictly decreasing, length >= 3".into(),
        ));
    }
    let n = mb.len();
    let mut samples: BTreeMap<(usize, usize), Vec<C64>> = BTreeMap::new();
    for (k, &e) in eps.iter().enumerate() {
        let point = QPoint::near_root(*root, e);
        let x = build_matrix_at(gen, &mb.basis, &point)?;
        let [[sl, _], [c, _]] = mixing_matrix_at(root.l(), &point)?;
        let mut s_mat = SparseMatrix::identity(n);
        let mut s_inv = SparseMatrix::identity(n);
        for (pi, pair) in mb.pairs.iter().enumerate() {
            let tau = phases[pi];
            s_mat.set(pair.a, pair.a, sl);
            s_mat.set(pair.a, pair.b, c);
            s_mat.set(pair.b, pair.b, tau / sl);
            s_inv.set(pair.a, pair.a, sl.inv());
            s_inv.set(pair.b, pair.b, sl / tau);
            s_inv.set(pair.a, pair.b, -c / tau);
        }
        let conj = s_inv.matmul(&x).matmul(&s_mat);
        for (r, col, v) in conj.entries() {
            samples
                .entry((r, col))
                .or_insert_with(|| vec![ZERO; eps.len()])[k] = v;
        }
    }
    let h: Vec<f64> = eps.iter().map(|e| e.sqrt()).collect();
    let mut matrix = SparseMatrix::zeros(n);
    let mut worst = 0.0f64;
    for ((r, c), vals) in samples {
        let full = extrapolate_to_zero(&h, &vals);
        let coarse = extrapolate_to_zero(&h[1..], &vals[1..]);
        let err = (full - coarse).norm();
        if err.is_nan() || err > 1e-5 * full.norm().max(1.0) {
            return Err(QgzError::NonConvergent(format!(
                "{gen} {} <- {}: {full} vs {coarse}",
                mb.basis.pattern(r),
                mb.basis.pattern(c)
            )));
        }
        worst = worst.max(err);
        matrix.set(r, c, full);
    }
    Ok(OracleResult {
        matrix,
        max_error_estimate: worst,
    })
}

/// Largest entrywise difference over the union of supports.
pub fn max_difference(a: &SparseMatrix, b: &SparseMatrix) -> f64 {
    a.sub(b).max_abs()
}

#[derive(Clone, Debug, Serialize)]
#[serde(rename_all = "camelCase")]
pub struct OracleComparison {
    pub generator: Generator,
    pub max_difference: f64,
    pub max_error_estimate: f64,
    pub passed: bool,
}

pub fn compare_with_oracle(rep: &RegularizedRep, eps: &[f64]) -> Result<Vec<OracleComparison>> {
    Generator::ALL
        .par_iter()
        .map(|&g| {
            let o = limit_oracle(g, &rep.mixed, &rep.phases, &rep.root, eps)?;
            let diff = max_difference(rep.ops.get(g), &o.matrix);
            Ok(OracleComparison {
                generator: g,
                max_difference: diff,
                max_error_estimate: o.max_error_estimate,
                passed: diff < ORACLE_TOL,
            })
        })
        .collect()
}

#[derive(Clone, Debug, Serialize)]
#[serde(rename_all = "camelCase")]
pub struct PairBlock {
    pub a: GZPattern,
    pub b: GZPattern,
    pub diagonal: [C64; 2],
    pub expected_diagonal: C64,
    /// `A'` component of `C B'`.
    pub off_diagonal: C64,
    /// `B'` component of `C A'`.
    pub reverse: C64,
    /// `i (zeta - zeta^-1)^2 [p12 - p22]`.
    pub expected_off_diagonal: C64,
    pub phase: C64,
    pub nondiagonalizable: bool,
}

#[derive(Clone, Debug, Serialize)]
#[serde(rename_all = "camelCase")]
pub struct CasimirReport {
    pub blocks: Vec<PairBlock>,
    pub max_other_off_diagonal: f64,
    pub max_diagonal_deviation: f64,
    pub passed: bool,
}

pub fn casimir_structure(rep: &RegularizedRep) -> CasimirReport {
    let c = rep.casimir().matrix;
    let z = rep.point();
    let mb = &rep.mixed;
    let value = |d: i64| z.pow(d) + z.pow(-d);
    let mut blocks = Vec::new();
    let mut in_block = std::collections::HashSet::new();
    for pair in &mb.pairs {
        let (a, b) = (*mb.basis.pattern(pair.a), *mb.basis.pattern(pair.b));
        let d = a.family_dim();
        let off = c.get(pair.a, pair.b);
        let expected_off = I * (z.q() - z.q().inv()).powi(2) * z.q_int(d);
        let phase = off / expected_off;
        in_block.insert((pair.a, pair.b));
        in_block.insert((pair.b, pair.a));
        blocks.push(PairBlock {
            a,
            b,
            diagonal: [c.get(pair.a, pair.a), c.get(pair.b, pair.b)],
            expected_diagonal: value(d),
            off_diagonal: off,
            reverse: c.get(pair.b, pair.a),
            expected_off_diagonal: expected_off,
            phase,
            nondiagonalizable: off.norm() > 1e-8,
        });
    }
    let mut other = 0.0f64;
    let mut dev = 0.0f64;
    for (r, col, v) in c.entries() {
        if r == col {
            dev = dev.max((v - value(mb.basis.pattern(r).family_dim())).norm());
        } else if !in_block.contains(&(r, col)) {
            other = other.max(v.norm());
        }
    }
    let blocks_ok = blocks.iter().all(|b| {
        b.nondiagonalizable
            && b.reverse.norm() < 1e-10
            && (b.phase.norm() - 1.0).abs() < 1e-8
            && (b.diagonal[0] - b.expected_diagonal).norm() < 1e-10
            && (b.diagonal[1] - b.expected_diagonal).norm() < 1e-10
    });
    CasimirReport {
        passed: blocks_ok && other < 1e-10 && dev < 1e-10,
        blocks,
        max_other_off_diagonal: other,
        max_diagonal_deviation: dev,
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum BoundaryClass {
    LeftRoof,
    RightRoof,
    FrontEntrance,
    BackEntrance,
    LDimensional,
}

impl BoundaryClass {
    pub const ALL: [BoundaryClass; 5] = [
        BoundaryClass::LeftRoof,
        BoundaryClass::RightRoof,
        BoundaryClass::FrontEntrance,
        BoundaryClass::BackEntrance,
        BoundaryClass::LDimensional,
    ];

    pub fn contains(&self, p: &GZPattern, l: u32) -> bool {
        let l = l as i64;
        let lab = &p.label;
        match self {
            BoundaryClass::LeftRoof => p.p22 == lab.p13 - l,
            BoundaryClass::RightRoof => p.p12 == lab.p33 + l + 1,
            BoundaryClass::FrontEntrance => p.p22 == p.p11 - l,
            BoundaryClass::BackEntrance => p.p12 == p.p11 + l - 1,
            BoundaryClass::LDimensional => p.p12 - p.p22 == l,
        }
    }

    /// Argument of the q-number that vanishes on the class.
    pub fn vanishing_factor(&self, p: &GZPattern) -> i64 {
        let lab = &p.label;
        match self {
            BoundaryClass::LeftRoof => lab.p13 - p.p22,
            BoundaryClass::RightRoof => p.p12 - lab.p33 - 1,
            BoundaryClass::FrontEntrance => p.p11 - p.p22,
            BoundaryClass::BackEntrance => p.p12 - p.p11 + 1,
            BoundaryClass::LDimensional => p.p12 - p.p22,
        }
    }
}

#[derive(Clone, Debug, Default, Serialize)]
#[serde(rename_all = "camelCase")]
pub struct ClassAudit {
    pub states: usize,
    pub crossings: usize,
    pub non_finite: usize,
    pub missing_factor: usize,
}

#[derive(Clone, Debug, Serialize)]
#[serde(rename_all = "camelCase")]
pub struct BoundaryReport {
    pub classes: BTreeMap<BoundaryClass, ClassAudit>,
    pub interior: usize,
    pub unexplained_crossings: usize,
    pub passed: bool,
}

/// Audits every generator entry that enters or leaves the teepee, or that
/// lands on an l-dimensional family, for finiteness and for the vanishing
/// q-number that keeps it finite.
pub fn boundary_audit(rep: &RegularizedRep) -> BoundaryReport {
    let mb = &rep.mixed;
    let l = mb.l;
    let root = &rep.root;
    let mut classes: BTreeMap<BoundaryClass, ClassAudit> = BoundaryClass::ALL
        .iter()
        .map(|&c| (c, ClassAudit::default()))
        .collect();
    let in_tp: Vec<bool> = (0..mb.len())
        .map(|i| in_teepee(mb.basis.pattern(i), l))
        .collect();
    let mut interior = 0;
    for &i in &mb.teepee {
        let p = mb.basis.pattern(i);
        let mut any = false;
        for c in BoundaryClass::ALL {
            if c.contains(p, l) {
                classes.get_mut(&c).unwrap().states += 1;
                any = true;
            }
        }
        if !any {
            interior += 1;
        }
    }
    let mut unexplained = 0;
    for gen in [Generator::E1, Generator::F1, Generator::E2, Generator::F2] {
        let m = rep.ops.get(gen);
        for j in 0..mb.len() {
            for mv in moves(gen, mb.basis.pattern(j)) {
                let t = mb.basis.index_of(mv.target.key()).expect("valid target");
                let finite = [m.get(t, j), m.get(j, t)]
                    .iter()
                    .all(|v| v.re.is_finite() && v.im.is_finite());
                let (pj, pt) = (mb.basis.pattern(j), mb.basis.pattern(t));
                let dl = |p: &GZPattern| p.family_dim() == l as i64;
                let teepee_cross = in_tp[j] != in_tp[t];
                let ldim_cross = dl(pj) != dl(pt);
                if !teepee_cross && !ldim_cross {
                    continue;
                }
                let mut explained = false;
                for (s, other) in [(pj, pt), (pt, pj)] {
                    let si = mb.basis.index_of(s.key()).unwrap();
                    let oi = mb.basis.index_of(other.key()).unwrap();
                    for c in BoundaryClass::ALL {
                        let relevant = match c {
                            BoundaryClass::LDimensional => ldim_cross && dl(s),
                            _ => teepee_cross && in_tp[si] && !in_tp[oi],
                        };
                        if !relevant || !c.contains(s, l) {
                            continue;
                        }
                        let f = c.vanishing_factor(s);
                        let vanishes = QPoint::Root(*root).q_int(f) == ZERO;
                        let present = mv.radical.args().any(|a| a == f);
                        let audit = classes.get_mut(&c).unwrap();
                        audit.crossings += 1;
                        if !finite {
                            audit.non_finite += 1;
                        }
                        if vanishes && present {
                            explained = true;
                        } else {
                            audit.missing_factor += 1;
                        }
                    }
                }
                if !explained {
                    unexplained += 1;
                }
            }
        }
    }
    let passed = unexplained == 0 && classes.values().all(|a| a.non_finite == 0);
    BoundaryReport {
        classes,
        interior,
        unexplained_crossings: unexplained,
        passed,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::qarith::QParam;

    fn label(a: i64, b: i64, c: i64) -> RepLabel {
        RepLabel::new(a, b, c).unwrap()
    }

    fn root(l: u32, m: u32) -> RootOfUnity {
        RootOfUnity::new(l, m).unwrap()
    }

    #[test]
    fn census_examples() {
        let mb = build_mixed_basis(&label(5, 2, 0), 3).unwrap();
        assert_eq!(
            mb.census(),
            TeepeeCensus {
                teepee: 10,
                pairs: 2,
                primed: 4,
                self_paired: 6
            }
        );
        let mb = build_mixed_basis(&label(8, 4, 0), 5).unwrap();
        assert_eq!(
            mb.census(),
            TeepeeCensus {
                teepee: 37,
                pairs: 11,
                primed: 22,
                self_paired: 15
            }
        );
        let mb = build_mixed_basis(&label(4, 2, 0), 3).unwrap();
        assert_eq!(mb.pairs.len(), 0);
        assert_eq!(mb.len(), 8);
    }

    #[test]
    fn mixed_basis_invariants() {
        for l in [3u32, 5] {
            for lab in crate::gzbasis::labels_up_to(l as i64) {
                let mb = build_mixed_basis(&lab, l).unwrap();
                assert_eq!(mb.len(), lab.dimension());
                let mut seen = std::collections::HashSet::new();
                for p in &mb.pairs {
                    assert!(seen.insert(p.a) && seen.insert(p.b));
                    let (a, b) = (mb.basis.pattern(p.a), mb.basis.pattern(p.b));
                    assert!(a.family_dim() > l as i64);
                    assert_eq!(s1_transform(a, l), *b);
                    assert!(in_teepee(a, l) && in_teepee(b, l));
                }
                let primed = mb.basis.states().iter().filter(|s| s.primed).count();
                assert_eq!(primed, 2 * mb.pairs.len());
                assert_eq!(mb.teepee.len(), primed + mb.self_paired.len());
            }
        }
    }

    #[test]
    fn integrability_examples() {
        assert!(is_integrable(&label(4, 2, 0), 3).unwrap());
        assert!(!is_integrable(&label(5, 2, 0), 3).unwrap());
        assert!(is_integrable(&label(6, 3, 0), 5).unwrap());
        for l in [3u32, 5, 7] {
            for lab in crate::gzbasis::labels_up_to(l as i64) {
                assert_eq!(
                    is_integrable(&lab, l).unwrap(),
                    lab.theta_pairing() < l as i64,
                    "{lab}"
                );
            }
        }
    }

    #[test]
    fn mixing_matrix_examples() {
        let q = QParam::default_generic();
        let m = mixing_matrix(3, &q).unwrap();
        let det = m[0][0] * m[1][1] - m[0][1] * m[1][0];
        assert!((det - ONE).norm() < 1e-14);
        assert_eq!(m[0][1], ZERO);
        let p = q.point();
        let expect = p.q_int(2) / (p.q_int(4) * p.q_int(3));
        assert!((m[1][0] * m[1][0] - expect).norm() < 1e-13);
        assert!(mixing_matrix(3, &QParam::root(3, 1).unwrap()).is_err());
    }

    #[test]
    fn neville_recovers_polynomials() {
        let h = [0.5, 0.25, 0.125, 0.0625];
        let v: Vec<C64> = h
            .iter()
            .map(|&x| C64::new(2.0 - x + 3.0 * x * x * x, x))
            .collect();
        assert!((extrapolate_to_zero(&h, &v) - C64::new(2.0, 0.0)).norm() < 1e-12);
    }

    #[test]
    fn sl2_shortcut_terms() {
        let r = root(3, 1);
        let rep = RegularizedRep::build(&label(5, 2, 0), r).unwrap();
        let b = rep.basis();
        let idx = |k: (i64, i64, i64)| b.index_of(k).unwrap();
        let z = rep.point();
        // f1 |5,1,5> -> sqrt([1]) |5,1,4>'
        let v = rep.ops.f1.get(idx((5, 1, 4)), idx((5, 1, 5)));
        assert!((v - z.sqrt_q_int(1)).norm() < 1e-12, "{v}");
        // e1 |5,1,4>' = 0 and f1 |5,1,3>' = 0
        assert!(rep.ops.e1.column(idx((5, 1, 4))).is_empty());
        assert!(rep.ops.f1.column(idx((5, 1, 3))).is_empty());
    }

    #[test]
    fn closed_form_sl2_columns_match_general_limits() {
        for (l, m) in [(3u32, 1u32), (3, 2), (5, 1), (5, 2)] {
            for lab in crate::gzbasis::labels_up_to(l as i64) {
                let rep = RegularizedRep::build(&lab, root(l, m)).unwrap();
                for gen in [Generator::E1, Generator::F1] {
                    for s in 0..rep.mixed.len() {
                        let cf = sl2_closed_form_column(gen, &rep.mixed, &rep.phases, &rep.root, s);
                        let general = rep.ops.get(gen).column(s);
                        let keys: std::collections::BTreeSet<_> =
                            cf.keys().chain(general.keys()).collect();
                        for k in keys {
                            let a = cf.get(k).copied().unwrap_or_default();
                            let g = general.get(k).copied().unwrap_or_default();
                            assert!(
                                (a - g).norm() < 1e-10,
                                "{lab} l={l} m={m} {gen} col {s} row {k}: {a} vs {g}"
                            );
                        }
                    }
                }
            }
        }
    }

    #[test]
    fn regularized_reps_satisfy_relations() {
        for (lab, l) in [(label(5, 2, 0), 3u32), (label(8, 4, 0), 5)] {
            for m in [1, root(l, 1).alternate().m()] {
                let rep = RegularizedRep::build(&lab, root(l, m)).unwrap();
                let r = verify_root(&rep);
                assert!(r.passed, "{lab} l={l} m={m}: {r:?}");
            }
        }
    }

    #[test]
    fn casimir_blocks_on_520() {
        let rep = RegularizedRep::build(&label(5, 2, 0), root(3, 1)).unwrap();
        let c = casimir_structure(&rep);
        assert!(c.passed, "{c:?}");
        assert_eq!(c.blocks.len(), 2);
        for b in &c.blocks {
            assert!((b.diagonal[0] - C64::new(-1.0, 0.0)).norm() < 1e-10);
            assert!((b.off_diagonal.norm() - 3.0).abs() < 1e-10);
        }
    }

    #[test]
    fn oracle_matches_on_520() {
        let rep = RegularizedRep::build(&label(5, 2, 0), root(3, 1)).unwrap();
        for c in compare_with_oracle(&rep, &DEFAULT_EPS).unwrap() {
            assert!(c.passed, "{c:?}");
        }
    }

    #[test]
    fn oracle_matches_on_840() {
        let rep = RegularizedRep::build(&label(8, 4, 0), root(5, 1)).unwrap();
        let cmp = compare_with_oracle(&rep, &DEFAULT_EPS).unwrap();
        assert_eq!(cmp.len(), 6);
        for c in cmp {
            assert!(c.passed, "{c:?}");
        }
    }

    #[test]
    fn boundary_crossings_carry_vanishing_factors() {
        for l in [3u32, 5] {
            for lab in crate::gzbasis::labels_up_to(l as i64) {
                let rep = RegularizedRep::build(&lab, root(l, 1)).unwrap();
                let b = boundary_audit(&rep);
                assert!(b.passed, "{lab} l={l}: {b:?}");
            }
        }
        let rep = RegularizedRep::build(&label(5, 2, 0), root(3, 1)).unwrap();
        let b = boundary_audit(&rep);
        assert!(b.classes.values().map(|a| a.crossings).sum::<usize>() > 0);
    }

    #[test]
    fn oracle_rejects_bad_schedule() {
        let mb = build_mixed_basis(&label(5, 2, 0), 3).unwrap();
        let r = root(3, 1);
        assert!(limit_oracle(Generator::E1, &mb, &[ONE, ONE], &r, &[1e-3, 1e-2, 1e-4]).is_err());
    }
}
