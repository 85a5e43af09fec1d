//! Reducibility of the regularized representations: the S2 subrepresentation,
//! the quotient, sl(2) slices, and flat representations.

use std::collections::{BTreeMap, BTreeSet, HashSet};
use std::sync::Arc;

use serde::Serialize;

use crate::error::{QgzError, Result};
use crate::gzbasis::{
    coordinates, dimension, enumerate_basis, in_teepee, s2_source_label, Basis, GZPattern,
    PatternKey, RepLabel,
};
use crate::linalg::SparseMatrix;
use crate::qarith::{QParam, QPoint, RootOfUnity, C64};
use crate::repgeneric::{moves, Generator, GeneratorSet};
use crate::rootlimit::{casimir_structure, RegularizedRep, TeepeeCensus};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum Classification {
    ClassicalLike,
    Irreducible,
    SplitsInTwo,
}

pub fn classify(label: &RepLabel, l: u32) -> Result<Classification> {
    label.with_root_order(l)?;
    let l = l as i64;
    Ok(if label.p13 - label.p33 <= l {
        Classification::ClassicalLike
    } else if label.p23 == label.p13 - l || label.p23 == label.p33 + l {
        Classification::Irreducible
    } else {
        Classification::SplitsInTwo
    })
}

fn require_split(label: &RepLabel, l: u32) -> Result<RepLabel> {
    if classify(label, l)? != Classification::SplitsInTwo {
        return Err(QgzError::Precondition(format!(
            "{label} does not split at l = {l}"
        )));
    }
    Ok(s2_source_label(label, l).expect("split labels have an S2 source"))
}

/// Indices of the S2-embedded patterns of `(p33+l, p23, p13-l)`.
pub fn subrep_image(label: &RepLabel, l: u32) -> Result<Vec<usize>> {
    let src = require_split(label, l)?;
    Ok(enumerate_basis(label)
        .iter()
        .enumerate()
        .filter(|(_, p)| src.contains(p.p12, p.p22, p.p11))
        .map(|(i, _)| i)
        .collect())
}

fn complement(n: usize, idx: &[usize]) -> Vec<usize> {
    let set: HashSet<usize> = idx.iter().copied().collect();
    (0..n).filter(|i| !set.contains(i)).collect()
}

/// Entries connecting the image with its complement.
#[derive(Clone, Debug, Serialize)]
#[serde(rename_all = "camelCase")]
pub struct DecouplingReport {
    pub coupling_entries: usize,
    /// Generic moves across the split, all of which must carry a vanishing factor.
    pub generic_crossings: usize,
    pub crossings_without_vanishing_factor: usize,
    pub image_primed: usize,
    pub quotient_primed: usize,
    pub passed: bool,
}

pub fn decoupling(rep: &RegularizedRep, image: &[usize]) -> DecouplingReport {
    let set: HashSet<usize> = image.iter().copied().collect();
    let mut coupling = 0;
    for g in Generator::ALL {
        for (r, c, v) in rep.ops.get(g).entries() {
            if set.contains(&r) != set.contains(&c) && v != C64::new(0.0, 0.0) {
                coupling += 1;
            }
        }
    }
    let lab = &rep.label;
    let l = rep.root.l() as i64;
    let z = QPoint::Root(rep.root);
    let mut crossings = 0;
    let mut unexplained = 0;
    let basis = rep.basis();
    for g in [Generator::E1, Generator::F1, Generator::E2, Generator::F2] {
        for j in 0..basis.len() {
            for mv in moves(g, basis.pattern(j)) {
                let t = basis.index_of(mv.target.key()).unwrap();
                if set.contains(&j) == set.contains(&t) {
                    continue;
                }
                crossings += 1;
                let named: Vec<i64> = [basis.pattern(j), basis.pattern(t)]
                    .iter()
                    .flat_map(|p| {
                        [
                            p.p12 - lab.p33,
                            p.p12 - lab.p33 - 1,
                            lab.p13 - p.p22,
                            lab.p13 - p.p22 + 1,
                        ]
                    })
                    .filter(|a| a % l == 0 && z.q_int(*a) == C64::new(0.0, 0.0))
                    .collect();
                if !mv.radical.num.iter().any(|a| named.contains(a)) {
                    unexplained += 1;
                }
            }
        }
    }
    let primed: HashSet<usize> = rep.mixed.pairs.iter().flat_map(|p| [p.a, p.b]).collect();
    let image_primed = image.iter().filter(|i| primed.contains(i)).count();
    DecouplingReport {
        coupling_entries: coupling,
        generic_crossings: crossings,
        crossings_without_vanishing_factor: unexplained,
        image_primed,
        quotient_primed: primed.len() - image_primed,
        passed: coupling == 0 && unexplained == 0 && image_primed == 0,
    }
}

/// Operators restricted to the complement of the S2 image.
#[derive(Clone, Debug)]
pub struct QuotientRep {
    pub indices: Vec<usize>,
    pub basis: Arc<Basis>,
    pub ops: GeneratorSet,
}

pub fn quotient_rep(rep: &RegularizedRep) -> Result<QuotientRep> {
    let image = subrep_image(&rep.label, rep.root.l())?;
    let indices = complement(rep.mixed.len(), &image);
    let states = indices.iter().map(|&i| rep.basis().states()[i]).collect();
    let r = |m: &SparseMatrix| m.restrict(&indices);
    let o = &rep.ops;
    Ok(QuotientRep {
        basis: Arc::new(Basis::new(rep.label, states)),
        ops: GeneratorSet {
            h1: r(&o.h1),
            h2: r(&o.h2),
            e1: r(&o.e1),
            f1: r(&o.f1),
            e2: r(&o.e2),
            f2: r(&o.f2),
        },
        indices,
    })
}

/// Slice of constant `y`, compared with an sl(2) tensor product.
#[derive(Clone, Debug, Serialize)]
#[serde(rename_all = "camelCase")]
pub struct SliceReport {
    pub y: i64,
    pub h1_weights: Vec<i64>,
    /// `2 j1`, `2 j2`.
    pub two_j: Option<(i64, i64)>,
    pub tensor_weights: Vec<i64>,
    pub regime: &'static str,
    pub regime_error: Option<String>,
    /// Sizes of the e1/f1-connected blocks on the slice.
    pub block_sizes: Vec<usize>,
    pub passed: bool,
}

fn tensor_character(two_j1: i64, two_j2: i64) -> Vec<i64> {
    let mut out: Vec<i64> = (0..=two_j1)
        .flat_map(|a| (0..=two_j2).map(move |b| (2 * a - two_j1) + (2 * b - two_j2)))
        .collect();
    out.sort();
    out
}

fn components(indices: &[usize], e: &SparseMatrix, f: &SparseMatrix) -> Vec<usize> {
    let pos: BTreeMap<usize, usize> = indices.iter().enumerate().map(|(i, &k)| (k, i)).collect();
    let mut parent: Vec<usize> = (0..indices.len()).collect();
    fn find(p: &mut [usize], x: usize) -> usize {
        let mut r = x;
        while p[r] != r {
            r = p[r];
        }
        p[x] = r;
        r
    }
    for m in [e, f] {
        for (r, c, v) in m.entries() {
            if v == C64::new(0.0, 0.0) {
                continue;
            }
            if let (Some(&a), Some(&b)) = (pos.get(&r), pos.get(&c)) {
                let (ra, rb) = (find(&mut parent, a), find(&mut parent, b));
                parent[ra] = rb;
            }
        }
    }
    let mut sizes: BTreeMap<usize, usize> = BTreeMap::new();
    for i in 0..indices.len() {
        *sizes.entry(find(&mut parent, i)).or_default() += 1;
    }
    let mut out: Vec<usize> = sizes.into_values().collect();
    out.sort_unstable_by(|a, b| b.cmp(a));
    out
}

/// All `y` values occurring in the label, descending.
pub fn slice_values(label: &RepLabel) -> Vec<i64> {
    let ys: BTreeSet<i64> = enumerate_basis(label)
        .iter()
        .map(|p| coordinates(p).y)
        .collect();
    ys.into_iter().rev().collect()
}

/// Checks one slice with generic operators, or with the regularized ones when `rep` is given.
pub fn sl2_slice_check(
    label: &RepLabel,
    y: i64,
    rep: Option<&RegularizedRep>,
) -> Result<SliceReport> {
    let generic;
    let (basis, ops): (&Basis, &GeneratorSet) = match rep {
        Some(r) => (r.basis(), &r.ops),
        None => {
            let b = Basis::unprimed(label);
            let s = GeneratorSet::build(&b, &QParam::default_generic().point())?;
            generic = (b, s);
            (&generic.0, &generic.1)
        }
    };
    let idx: Vec<usize> = (0..basis.len())
        .filter(|&i| coordinates(basis.pattern(i)).y == y)
        .collect();
    if idx.is_empty() {
        return Err(QgzError::Precondition(format!(
            "y = {y} does not occur in {label}"
        )));
    }
    let diag = ops.h1.diagonal_values();
    let mut weights: Vec<i64> = idx.iter().map(|&i| diag[i].re.round() as i64).collect();
    weights.sort();

    let (p13, p23, p33) = (label.p13, label.p23, label.p33);
    let (regime, two_j1, num) = if y >= p13 - 2 * p23 + p33 + 2 {
        ("upper", p13 - p23 - 1, p13 + p23 - 2 * p33 - 1 - y)
    } else {
        ("lower", p23 - p33 - 1, y - (-2 * p13 + p23 + p33 + 5))
    };
    let (two_j, regime_error) = if num < 0 || num % 3 != 0 {
        (
            None,
            Some(format!("2 j2 = {num}/3 is not a non-negative integer")),
        )
    } else {
        (Some((two_j1, num / 3)), None)
    };
    let tensor_weights = two_j
        .map(|(a, b)| tensor_character(a, b))
        .unwrap_or_default();
    let passed = regime_error.is_none() && tensor_weights == weights;
    Ok(SliceReport {
        y,
        h1_weights: weights,
        two_j,
        tensor_weights,
        regime,
        regime_error,
        block_sizes: components(&idx, &ops.e1, &ops.f1),
        passed,
    })
}

#[derive(Clone, Debug, Serialize)]
#[serde(rename_all = "camelCase")]
pub struct FlatReport {
    pub teepee_line: usize,
    pub teepee_is_single_line: bool,
    pub flat_irreducible: bool,
    pub flat_states: usize,
    pub states_satisfy_flat_condition: bool,
    pub multiplicity_free: bool,
    pub barred_label: (i64, i64, i64),
    pub d0: usize,
    pub corners: [usize; 3],
    pub d1: usize,
    pub hexagon: usize,
    /// States that meet the written hexagon inequalities while lying in a corner.
    pub hexagon_corner_overlap: usize,
    pub relabeling_bijective: bool,
    pub passed: bool,
}

pub fn flat_analysis(label: &RepLabel, l: u32) -> Result<FlatReport> {
    label.with_root_order(l)?;
    let li = l as i64;
    if label.p13 - label.p33 != li + 1 {
        return Err(QgzError::Precondition(format!(
            "{label} is not flat at l = {l}"
        )));
    }
    let (p13, p23, p33) = (label.p13, label.p23, label.p33);
    let all = enumerate_basis(label);
    let teepee: Vec<&GZPattern> = all.iter().filter(|p| in_teepee(p, l)).collect();
    let teepee_is_single_line =
        teepee.len() == l as usize && teepee.iter().all(|p| p.p12 == p13 && p.p22 == p33 + 1);

    let flat_irreducible = p23 == p13 - 1 || p23 == p13 - li;
    let states: Vec<GZPattern> = if flat_irreducible {
        all.clone()
    } else {
        let image: HashSet<usize> = subrep_image(label, l)?.into_iter().collect();
        all.iter()
            .enumerate()
            .filter(|(i, _)| !image.contains(i))
            .map(|(_, p)| *p)
            .collect()
    };
    let satisfies = states
        .iter()
        .all(|p| p.p12 == p13 || (p.p22 == p33 + 1 && p.p22 == p13 - li));
    let by_condition = all
        .iter()
        .filter(|p| p.p12 == p13 || (p.p22 == p33 + 1 && p.p22 == p13 - li))
        .count();
    let weights: HashSet<(i64, i64)> = states
        .iter()
        .map(|p| {
            let c = coordinates(p);
            (c.x, c.y)
        })
        .collect();

    let (b13, b23) = (p23 + li, p13 - li);
    let d0 = dimension(&RepLabel {
        p13: b13,
        p23: b23,
        p33: b23 - 1,
        l: None,
    });
    let s = b13 - b23 - li;
    let d1 = (s * (s + 1) / 2) as usize;
    let model: Vec<(i64, i64)> = (b23 + 1..=b13)
        .flat_map(|a| (b23 + 1..=a).map(move |b| (a, b)))
        .collect();
    let left = |&(a, b): &(i64, i64)| a > b23 + li && b > b23 + li;
    let right = |&(a, b): &(i64, i64)| a > b23 + li && a - li >= b && b > b23;
    let bottom = |&(a, _): &(i64, i64)| b13 - li >= a && a > b23;
    let written_hexagon = |&(a, b): &(i64, i64)| a >= b && b > a - li && b23 + li >= b && b > b23;
    let corners = [
        model.iter().filter(|s| left(s)).count(),
        model.iter().filter(|s| right(s)).count(),
        model.iter().filter(|s| bottom(s)).count(),
    ];
    let in_corner = |s: &(i64, i64)| left(s) || right(s) || bottom(s);
    let hexagon: HashSet<(i64, i64)> = model.iter().filter(|s| !in_corner(s)).copied().collect();
    let overlap = model
        .iter()
        .filter(|s| in_corner(s) && written_hexagon(s))
        .count();

    let mut image: HashSet<PatternKey> = HashSet::new();
    let mut bijective = true;
    for p in &states {
        let (a, b, c) = if p.p22 == p13 - li {
            (p.p12, p.p22, p.p11)
        } else if p.p12 == p13 {
            (p.p22 + li, p.p12 - li, p.p11)
        } else {
            bijective = false;
            continue;
        };
        if b != b23 || !hexagon.contains(&(a, c)) || !image.insert((a, b, c)) {
            bijective = false;
        }
    }
    bijective &= image.len() == hexagon.len();

    let passed = teepee_is_single_line
        && satisfies
        && by_condition == states.len()
        && weights.len() == states.len()
        && corners.iter().all(|&c| c == d1)
        && hexagon.len() == d0 - 3 * d1
        && hexagon.len() == states.len()
        && bijective;
    Ok(FlatReport {
        teepee_line: teepee.len(),
        teepee_is_single_line,
        flat_irreducible,
        flat_states: states.len(),
        states_satisfy_flat_condition: satisfies && by_condition == states.len(),
        multiplicity_free: weights.len() == states.len(),
        barred_label: (b13, b23, b23 - 1),
        d0,
        corners,
        d1,
        hexagon: hexagon.len(),
        hexagon_corner_overlap: overlap,
        relabeling_bijective: bijective,
        passed,
    })
}

#[derive(Clone, Debug, Serialize)]
#[serde(rename_all = "camelCase")]
pub struct MaxCharacterization {
    pub image_max_range: (i64, i64),
    pub quotient_max_range: (i64, i64),
    /// `max(p12-p33, p13-p22+1) <= l` selects exactly the S2 image.
    pub at_most_l_matches: bool,
    /// `max(p12-p33, p13-p22+1) >= l` selects exactly the S2 image.
    pub at_least_l_matches: bool,
    pub matched: &'static str,
}

pub fn max_characterization_check(label: &RepLabel, l: u32) -> Result<MaxCharacterization> {
    let image: HashSet<usize> = subrep_image(label, l)?.into_iter().collect();
    let li = l as i64;
    let all = enumerate_basis(label);
    let mx = |p: &GZPattern| (p.p12 - label.p33).max(label.p13 - p.p22 + 1);
    let range = |inside: bool| {
        let v: Vec<i64> = all
            .iter()
            .enumerate()
            .filter(|(i, _)| image.contains(i) == inside)
            .map(|(_, p)| mx(p))
            .collect();
        (
            v.iter().copied().min().unwrap_or(0),
            v.iter().copied().max().unwrap_or(0),
        )
    };
    let le = all
        .iter()
        .enumerate()
        .all(|(i, p)| (mx(p) <= li) == image.contains(&i));
    let ge = all
        .iter()
        .enumerate()
        .all(|(i, p)| (mx(p) >= li) == image.contains(&i));
    let matched = match (le, ge) {
        (true, false) => "at_most_l",
        (false, true) => "at_least_l",
        (true, true) => "both",
        (false, false) => {
            return Err(QgzError::Precondition(format!(
                "neither threshold direction reproduces the S2 image of {label} at l = {l}"
            )))
        }
    };
    Ok(MaxCharacterization {
        image_max_range: range(true),
        quotient_max_range: range(false),
        at_most_l_matches: le,
        at_least_l_matches: ge,
        matched,
    })
}

#[derive(Clone, Debug, Serialize)]
#[serde(rename_all = "camelCase")]
pub struct CasimirSummary {
    pub jordan_blocks: usize,
    pub phases: Vec<C64>,
    pub max_other_off_diagonal: f64,
    pub passed: bool,
}

#[derive(Clone, Debug, Serialize)]
#[serde(rename_all = "camelCase")]
pub struct StructureReport {
    pub label: RepLabel,
    pub l: Option<u32>,
    pub m: Option<u32>,
    pub dimension: usize,
    pub classification: Option<Classification>,
    pub integrable: bool,
    pub irreducible: bool,
    pub subrep_dimension: Option<usize>,
    pub quotient_dimension: Option<usize>,
    pub census: Option<TeepeeCensus>,
    pub casimir: Option<CasimirSummary>,
    pub slices: Vec<SliceReport>,
    pub decoupling: Option<DecouplingReport>,
    pub flat: Option<FlatReport>,
    pub max_characterization: Option<MaxCharacterization>,
    pub passed: bool,
}

/// Full structural analysis, at generic q when `root` is `None`.
pub fn analyze(label: &RepLabel, root: Option<RootOfUnity>) -> Result<StructureReport> {
    let dim = dimension(label);
    let Some(root) = root else {
        let slices = slice_values(label)
            .into_iter()
            .map(|y| sl2_slice_check(label, y, None))
            .collect::<Result<Vec<_>>>()?;
        let passed = slices.iter().all(|s| s.passed);
        return Ok(StructureReport {
            label: *label,
            l: None,
            m: None,
            dimension: dim,
            classification: None,
            integrable: true,
            irreducible: true,
            subrep_dimension: None,
            quotient_dimension: None,
            census: None,
            casimir: None,
            slices,
            decoupling: None,
            flat: None,
            max_characterization: None,
            passed,
        });
    };
    let l = root.l();
    let class = classify(label, l)?;
    let rep = RegularizedRep::build(label, root)?;
    let cas = casimir_structure(&rep);
    let slices = slice_values(label)
        .into_iter()
        .map(|y| sl2_slice_check(label, y, Some(&rep)))
        .collect::<Result<Vec<_>>>()?;
    let (sub, quot, dec, maxc) = if class == Classification::SplitsInTwo {
        let image = subrep_image(label, l)?;
        let dec = decoupling(&rep, &image);
        let maxc = max_characterization_check(label, l)?;
        (
            Some(image.len()),
            Some(dim - image.len()),
            Some(dec),
            Some(maxc),
        )
    } else {
        (None, None, None, None)
    };
    let flat = if label.p13 - label.p33 == l as i64 + 1 {
        Some(flat_analysis(label, l)?)
    } else {
        None
    };
    let casimir = CasimirSummary {
        jordan_blocks: cas.blocks.iter().filter(|b| b.nondiagonalizable).count(),
        phases: cas.blocks.iter().map(|b| b.phase).collect(),
        max_other_off_diagonal: cas.max_other_off_diagonal,
        passed: cas.passed,
    };
    let passed = casimir.passed
        && slices.iter().all(|s| s.passed)
        && dec.as_ref().is_none_or(|d| d.passed)
        && flat.as_ref().is_none_or(|f| f.passed);
    Ok(StructureReport {
        label: *label,
        l: Some(l),
        m: Some(root.m()),
        dimension: dim,
        classification: Some(class),
        integrable: rep.mixed.pairs.is_empty(),
        irreducible: class != Classification::SplitsInTwo,
        subrep_dimension: sub,
        quotient_dimension: quot,
        census: Some(rep.mixed.census()),
        casimir: Some(casimir),
        slices,
        decoupling: dec,
        flat,
        max_characterization: maxc,
        passed,
    })
}
