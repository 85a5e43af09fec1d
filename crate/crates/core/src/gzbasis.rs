//! Gelfand-Zetlin patterns for sl(3) and their combinatorics.

use std::collections::HashMap;
use std::fmt;

use serde::{Serialize, Serializer};

use crate::error::{QgzError, Result};

/// Top row `(p13, p23, p33)` of a pattern, optionally with the root order `l`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct RepLabel {
    pub p13: i64,
    pub p23: i64,
    pub p33: i64,
    pub l: Option<u32>,
}

/// Serialized as `[p13, p23, p33]`.
impl Serialize for RepLabel {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        [self.p13, self.p23, self.p33].serialize(s)
    }
}

impl RepLabel {
    pub fn new(p13: i64, p23: i64, p33: i64) -> Result<Self> {
        if !(p13 > p23 && p23 > p33) {
            return Err(QgzError::InvalidLabel(format!(
                "({p13},{p23},{p33}) must satisfy p13 > p23 > p33"
            )));
        }
        Ok(Self {
            p13,
            p23,
            p33,
            l: None,
        })
    }

    pub fn with_root_order(mut self, l: u32) -> Result<Self> {
        if l <= 2 || l.is_multiple_of(2) {
            return Err(QgzError::InvalidRoot(format!(
                "l = {l} must be odd and > 2"
            )));
        }
        if self.p13 - self.p23 > l as i64 || self.p23 - self.p33 > l as i64 {
            return Err(QgzError::InvalidLabel(format!(
                "{self} needs p13-p23 <= {l} and p23-p33 <= {l}"
            )));
        }
        self.l = Some(l);
        Ok(self)
    }

    /// Same representation with `p33 = 0`.
    pub fn normalized(&self) -> Self {
        Self {
            p13: self.p13 - self.p33,
            p23: self.p23 - self.p33,
            p33: 0,
            l: self.l,
        }
    }

    pub fn lambda1(&self) -> i64 {
        self.p13 - self.p23 - 1
    }

    pub fn lambda2(&self) -> i64 {
        self.p23 - self.p33 - 1
    }

    /// `<lambda, theta>`.
    pub fn theta_pairing(&self) -> i64 {
        self.lambda1() + self.lambda2()
    }

    /// `<lambda + rho, theta>`.
    pub fn rho_theta_pairing(&self) -> i64 {
        self.theta_pairing() + 2
    }

    pub fn dimension(&self) -> usize {
        dimension(self)
    }

    pub fn contains(&self, p12: i64, p22: i64, p11: i64) -> bool {
        self.p13 >= p12
            && p12 > self.p23
            && self.p23 >= p22
            && p22 > self.p33
            && p12 >= p11
            && p11 > p22
    }

    pub fn pattern(&self, p12: i64, p22: i64, p11: i64) -> Option<GZPattern> {
        self.contains(p12, p22, p11).then_some(GZPattern {
            label: *self,
            p12,
            p22,
            p11,
        })
    }
}

impl fmt::Display for RepLabel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({},{},{})", self.p13, self.p23, self.p33)
    }
}

pub type PatternKey = (i64, i64, i64);

/// One Gelfand-Zetlin state `(p12, p22, p11)` of a labeled representation.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize)]
#[serde(rename_all = "camelCase")]
pub struct GZPattern {
    #[serde(skip)]
    pub label: RepLabel,
    pub p12: i64,
    pub p22: i64,
    pub p11: i64,
}

impl GZPattern {
    pub fn key(&self) -> PatternKey {
        (self.p12, self.p22, self.p11)
    }

    pub fn is_valid(&self) -> bool {
        self.label.contains(self.p12, self.p22, self.p11)
    }

    /// `p12 - p22`, the dimension of the sl(2) family holding this state.
    pub fn family_dim(&self) -> i64 {
        self.p12 - self.p22
    }

    pub fn with_row2(&self, p12: i64, p22: i64, p11: i64) -> GZPattern {
        GZPattern {
            label: self.label,
            p12,
            p22,
            p11,
        }
    }

    pub fn coordinates(&self) -> Coordinates {
        coordinates(self)
    }
}

impl fmt::Display for GZPattern {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({},{},{})", self.p12, self.p22, self.p11)
    }
}

/// A basis vector; `primed` marks members of a mixed S1-pair.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "camelCase")]
pub struct BasisState {
    pub pattern: GZPattern,
    pub primed: bool,
}

/// Ordered basis with a lookup table.
#[derive(Clone, Debug)]
pub struct Basis {
    label: RepLabel,
    states: Vec<BasisState>,
    index: HashMap<PatternKey, usize>,
}

impl Basis {
    pub fn new(label: RepLabel, states: Vec<BasisState>) -> Self {
        let index = states
            .iter()
            .enumerate()
            .map(|(i, s)| (s.pattern.key(), i))
            .collect();
        Self {
            label,
            states,
            index,
        }
    }

    pub fn unprimed(label: &RepLabel) -> Self {
        let states = enumerate_basis(label)
            .into_iter()
            .map(|pattern| BasisState {
                pattern,
                primed: false,
            })
            .collect();
        Self::new(*label, states)
    }

    pub fn label(&self) -> &RepLabel {
        &self.label
    }

    pub fn states(&self) -> &[BasisState] {
        &self.states
    }

    pub fn len(&self) -> usize {
        self.states.len()
    }

    pub fn is_empty(&self) -> bool {
        self.states.is_empty()
    }

    pub fn pattern(&self, i: usize) -> &GZPattern {
        &self.states[i].pattern
    }

    pub fn index_of(&self, key: PatternKey) -> Option<usize> {
        self.index.get(&key).copied()
    }
}

/// `(p13-p23)(p23-p33)(p13-p33)/2`.
pub fn dimension(label: &RepLabel) -> usize {
    let a = label.p13 - label.p23;
    let b = label.p23 - label.p33;
    (a * b * (a + b) / 2) as usize
}

/// All patterns of the label, ascending in `(p12, p22, p11)`.
pub fn enumerate_basis(label: &RepLabel) -> Vec<GZPattern> {
    let mut out = Vec::with_capacity(dimension(label));
    for p12 in label.p23 + 1..=label.p13 {
        for p22 in label.p33 + 1..=label.p23 {
            for p11 in p22 + 1..=p12 {
                out.push(GZPattern {
                    label: *label,
                    p12,
                    p22,
                    p11,
                });
            }
        }
    }
    out
}

/// Pyramid coordinates of a state.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize)]
#[serde(rename_all = "camelCase")]
pub struct Coordinates {
    pub x: i64,
    pub y: i64,
    pub z: i64,
}

pub fn coordinates(p: &GZPattern) -> Coordinates {
    let l = &p.label;
    Coordinates {
        x: 2 * p.p11 - (p.p12 + p.p22) - 1,
        y: 3 * (p.p12 + p.p22) - 2 * (l.p13 + l.p23 + l.p33) - 1,
        z: (l.p13 - p.p12).min(l.p23 - l.p33 - 1),
    }
}

/// `(p12, p22, p11) -> (p22 + l, p12 - l, p11)`, unchecked.
pub fn s1_transform(p: &GZPattern, l: u32) -> GZPattern {
    let l = l as i64;
    p.with_row2(p.p22 + l, p.p12 - l, p.p11)
}

/// True iff the S1 image of a valid pattern is valid as well.
pub fn in_teepee(p: &GZPattern, l: u32) -> bool {
    p.is_valid() && s1_transform(p, l).is_valid()
}

/// Label `(p33 + l, p23, p13 - l)` whose patterns embed into `label` under S2.
pub fn s2_source_label(label: &RepLabel, l: u32) -> Option<RepLabel> {
    let l = l as i64;
    (label.p33 + l > label.p23 && label.p23 > label.p13 - l).then(|| RepLabel {
        p13: label.p33 + l,
        p23: label.p23,
        p33: label.p13 - l,
        l: None,
    })
}

/// All labels with `p33 = 0` and both differences in `1..=max_diff`.
pub fn labels_up_to(max_diff: i64) -> Vec<RepLabel> {
    let mut out = Vec::new();
    for b in 1..=max_diff {
        for a in 1..=max_diff {
            out.push(RepLabel {
                p13: a + b,
                p23: b,
                p33: 0,
                l: None,
            });
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn label(a: i64, b: i64, c: i64) -> RepLabel {
        RepLabel::new(a, b, c).unwrap()
    }

    #[test]
    fn dimension_examples() {
        assert_eq!(dimension(&label(2, 1, 0)), 1);
        assert_eq!(dimension(&label(5, 2, 0)), 15);
        assert_eq!(dimension(&label(8, 4, 0)), 64);
    }

    #[test]
    fn enumeration_examples() {
        let b = enumerate_basis(&label(2, 1, 0));
        assert_eq!(
            b.iter().map(|p| p.key()).collect::<Vec<_>>(),
            vec![(2, 1, 2)]
        );
        assert_eq!(enumerate_basis(&label(4, 2, 0)).len(), 8);
        assert_eq!(enumerate_basis(&label(6, 3, 0)).len(), 27);
        let keys: Vec<_> = enumerate_basis(&label(5, 2, 0))
            .iter()
            .map(|p| p.key())
            .collect();
        let mut sorted = keys.clone();
        sorted.sort();
        assert_eq!(keys, sorted);
    }

    #[test]
    fn label_validation() {
        assert!(RepLabel::new(2, 2, 0).is_err());
        assert!(RepLabel::new(1, 2, 0).is_err());
        assert!(label(5, 1, 0).with_root_order(3).is_err());
        assert!(label(5, 2, 0).with_root_order(3).is_ok());
        assert!(label(5, 2, 0).with_root_order(4).is_err());
        assert_eq!(label(7, 4, 2).normalized(), label(5, 2, 0));
    }

    #[test]
    fn coordinate_examples() {
        let p = label(4, 2, 0).pattern(4, 2, 4).unwrap();
        assert_eq!(coordinates(&p), Coordinates { x: 1, y: 5, z: 0 });
        let p = label(8, 4, 0).pattern(8, 4, 8).unwrap();
        assert_eq!(coordinates(&p), Coordinates { x: 3, y: 11, z: 0 });
    }

    #[test]
    fn s1_examples() {
        let p = label(5, 2, 0).pattern(5, 1, 3).unwrap();
        assert_eq!(s1_transform(&p, 3).key(), (4, 2, 3));
        let p = label(8, 4, 0).pattern(8, 1, 5).unwrap();
        assert_eq!(s1_transform(&p, 5).key(), (6, 3, 5));
        let p = label(5, 2, 0).pattern(4, 1, 2).unwrap();
        assert_eq!(s1_transform(&p, 3), p);
    }

    #[test]
    fn teepee_examples() {
        let l520 = label(5, 2, 0);
        assert!(in_teepee(&l520.pattern(5, 1, 3).unwrap(), 3));
        assert!(in_teepee(&l520.pattern(5, 2, 5).unwrap(), 3));
        assert!(!in_teepee(&label(8, 4, 0).pattern(5, 4, 5).unwrap(), 5));
    }

    #[test]
    fn s2_examples() {
        let src = s2_source_label(&label(4, 2, 0), 3).unwrap();
        assert_eq!((src.p13, src.p23, src.p33), (3, 2, 1));
        assert!(s2_source_label(&label(5, 2, 0), 3).is_none());
        let src = s2_source_label(&label(6, 3, 0), 5).unwrap();
        assert_eq!((src.p13, src.p23, src.p33), (5, 3, 1));
    }

    #[test]
    fn enumeration_matches_dimension_formula() {
        for lab in labels_up_to(7) {
            let n = enumerate_basis(&lab).len();
            assert_eq!(n, dimension(&lab), "{lab}");
        }
    }

    #[test]
    fn pairs_exist_iff_non_integrable() {
        for l in [3u32, 5, 7] {
            for lab in labels_up_to(l as i64) {
                let has_pair = enumerate_basis(&lab)
                    .iter()
                    .any(|p| in_teepee(p, l) && p.family_dim() > l as i64);
                assert_eq!(has_pair, lab.theta_pairing() >= l as i64, "{lab} l={l}");
            }
        }
    }

    proptest! {
        #[test]
        fn teepee_is_s1_stable(a in 1i64..=7, b in 1i64..=7, li in 0usize..3) {
            let l = [3u32, 5, 7][li];
            let lab = label(a + b, b, 0);
            for p in enumerate_basis(&lab) {
                let z = coordinates(&p).z;
                prop_assert!(z >= 0 && z <= a.min(b - 1));
                if in_teepee(&p, l) {
                    let s = s1_transform(&p, l);
                    prop_assert!(in_teepee(&s, l));
                    prop_assert_eq!(s1_transform(&s, l), p);
                }
            }
        }

        #[test]
        fn coordinates_ignore_offset(a in 1i64..=6, b in 1i64..=6, shift in -3i64..3) {
            let lab = label(a + b + shift, b + shift, shift);
            for p in enumerate_basis(&lab) {
                let c = coordinates(&p);
                prop_assert_eq!(c.x, 2 * p.p11 - p.p12 - p.p22 - 1);
                let n = lab.normalized();
                let q = n.pattern(p.p12 - shift, p.p22 - shift, p.p11 - shift).unwrap();
                prop_assert_eq!(coordinates(&q), c);
            }
        }
    }
}
