//! Shared fixtures for unit tests: the 13-row comparison dataset and the
//! 21-week scaled time-series snapshot.

use crate::model::{validate_dataset, PartnerDataset, RawDataset};

pub const HALD_X: [[f64; 13]; 4] = [
    [
        7.0, 1.0, 11.0, 11.0, 7.0, 11.0, 3.0, 1.0, 2.0, 21.0, 1.0, 11.0, 10.0,
    ],
    [
        26.0, 29.0, 56.0, 31.0, 52.0, 55.0, 71.0, 31.0, 54.0, 47.0, 40.0, 66.0, 68.0,
    ],
    [
        6.0, 15.0, 8.0, 8.0, 6.0, 9.0, 17.0, 22.0, 18.0, 4.0, 23.0, 9.0, 8.0,
    ],
    [
        60.0, 52.0, 20.0, 47.0, 33.0, 22.0, 6.0, 44.0, 22.0, 26.0, 34.0, 12.0, 12.0,
    ],
];

pub const HALD_Y: [f64; 13] = [
    78.5, 74.3, 104.3, 87.6, 95.9, 109.2, 102.7, 72.5, 93.1, 115.9, 83.8, 113.3, 109.4,
];

pub fn hald_columns() -> Vec<Vec<f64>> {
    HALD_X.iter().map(|c| c.to_vec()).collect()
}

pub fn hald_dataset() -> PartnerDataset {
    let raw = RawDataset {
        dates: (1..=13).map(|w| w.to_string()).collect(),
        partner_names: vec!["x1".into(), "x2".into(), "x3".into(), "x4".into()],
        cells: (0..13)
            .map(|r| (0..4).map(|c| Some(HALD_X[c][r])).collect())
            .collect(),
        outcome: HALD_Y.iter().map(|v| Some(*v)).collect(),
    };
    validate_dataset(raw).unwrap()
}

/// 21 weekly rows, 5 partner columns plus the outcome, scaled/normalized.
pub const TABLE1: [(&str, [f64; 6]); 21] = [
    ("6/1/2020", [1.713, -0.677, 0.100, -0.458, 1.109, 0.520]),
    ("6/8/2020", [1.995, -0.973, 0.210, -0.471, 1.172, 0.607]),
    ("6/15/2020", [2.145, -0.811, 0.147, -0.398, 0.977, 0.667]),
    ("6/22/2020", [2.276, -0.940, -0.031, -0.292, 0.839, 0.636]),
    (
        "6/29/2020",
        [-0.973, -0.973, -0.973, -0.973, -0.973, -0.773],
    ),
    ("7/6/2020", [-0.973, -0.973, -0.836, -0.973, -0.973, -1.176]),
    ("7/13/2020", [1.168, -0.818, 0.272, 0.153, 1.704, 0.073]),
    ("7/20/2020", [1.216, 0.260, 0.498, 1.489, 1.115, 1.072]),
    ("7/27/2020", [1.882, -0.486, 0.133, 0.871, 1.244, 1.168]),
    ("8/3/2020", [3.301, -0.756, -0.001, 0.494, 1.825, 1.582]),
    ("8/10/2020", [4.677, -0.268, 0.433, 0.576, 1.578, 2.320]),
    ("8/17/2020", [1.693, -0.407, 0.289, 1.078, 1.360, 1.724]),
    (
        "8/24/2020",
        [-0.973, -0.787, -0.970, -0.973, -0.973, -0.412],
    ),
    ("8/31/2020", [1.027, -0.604, 1.502, 0.662, 0.645, 0.653]),
    ("9/7/2020", [1.241, -0.569, 1.727, 2.068, 0.710, 1.503]),
    ("9/14/2020", [0.699, -0.544, 1.749, 2.437, 0.544, 1.696]),
    (
        "9/21/2020",
        [-0.973, -0.973, -0.973, -0.973, -0.973, -0.500],
    ),
    (
        "9/28/2020",
        [-0.851, -0.973, -0.645, -0.973, -0.973, -0.969],
    ),
    ("10/5/2020", [0.147, -0.593, -0.204, 1.071, 0.061, -0.282]),
    ("10/12/2020", [0.540, 0.011, -0.849, 1.178, 0.234, 0.079]),
    ("10/19/2020", [0.715, 0.602, -0.664, 0.817, 0.417, 0.398]),
];

pub fn table1_dataset() -> PartnerDataset {
    let raw = RawDataset {
        dates: TABLE1.iter().map(|(d, _)| d.to_string()).collect(),
        partner_names: vec![
            "Partner A".into(),
            "Partner B".into(),
            "Partner C".into(),
            "Partner D".into(),
            "Partner E".into(),
        ],
        cells: TABLE1
            .iter()
            .map(|(_, row)| row[..5].iter().map(|v| Some(*v)).collect())
            .collect(),
        outcome: TABLE1.iter().map(|(_, row)| Some(row[5])).collect(),
    };
    validate_dataset(raw).unwrap()
}
