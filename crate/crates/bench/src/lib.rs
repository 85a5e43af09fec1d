//! Shared inputs for the criterion benchmarks.

use qgz3_core::{RepLabel, RootOfUnity};

/// Labels paired with a root order, from small to the largest acceptance case.
pub fn root_cases() -> Vec<(RepLabel, RootOfUnity)> {
    [
        ((5, 2, 0), 3),
        ((6, 3, 0), 5),
        ((8, 4, 0), 5),
        ((10, 5, 0), 5),
    ]
    .into_iter()
    .map(|((a, b, c), l)| {
        let label = RepLabel::new(a, b, c)
            .and_then(|x| x.with_root_order(l))
            .unwrap();
        (label, RootOfUnity::new(l, 1).unwrap())
    })
    .collect()
}

pub fn generic_labels() -> Vec<RepLabel> {
    [(5, 2, 0), (8, 4, 0), (14, 7, 0)]
        .into_iter()
        .map(|(a, b, c)| RepLabel::new(a, b, c).unwrap())
        .collect()
}
