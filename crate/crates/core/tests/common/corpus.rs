//! Hand-labelled synthetic rasters for the bar counter. Every case is drawn
//! on a 101x101 node-grid raster of a 100x100 domain; labels are the number
//! of straight bars a person counts in the drawing.

use topoforge::analysis::Canvas;
use topoforge::image::DesignImage;
use topoforge::scenario::{Load, Scenario, Split, VolumeFraction};

pub struct Case {
    pub name: &'static str,
    pub design: DesignImage,
    pub scenario: Scenario,
    pub total: usize,
    /// (clamped, loaded, internal) when the drawing makes the types obvious.
    pub types: Option<(usize, usize, usize)>,
}

pub const N: usize = 100;
const W: f64 = 4.0;

pub fn scenario(fixed: &[(usize, usize)], loads: &[(usize, usize)]) -> Scenario {
    Scenario {
        nx: N,
        ny: N,
        fixed_nodes: fixed.to_vec(),
        loads: loads.iter().map(|&(i, j)| Load::new(i, j, 270.0)).collect(),
        volfrac: VolumeFraction::Uniform(0.3),
        complexity: 1,
        split: Split::Train,
        seed: 0,
    }
}

pub fn left_edge(from: usize, to: usize) -> Vec<(usize, usize)> {
    (from..=to).map(|j| (0, j)).collect()
}

fn free() -> Scenario {
    // supports and load far from any drawing
    scenario(&[(N, 0)], &[(N, 1)])
}

fn draw(bars: &[((f64, f64), (f64, f64))], width: f64) -> DesignImage {
    let mut c = Canvas::new(N + 1, N + 1);
    for &(a, b) in bars {
        c.segment(a, b, width);
    }
    c.to_image()
}

fn case(
    name: &'static str,
    bars: &[((f64, f64), (f64, f64))],
    scenario: Scenario,
    total: usize,
    types: Option<(usize, usize, usize)>,
) -> Case {
    case_w(name, bars, W, scenario, total, types)
}

fn case_w(
    name: &'static str,
    bars: &[((f64, f64), (f64, f64))],
    width: f64,
    scenario: Scenario,
    total: usize,
    types: Option<(usize, usize, usize)>,
) -> Case {
    Case {
        name,
        design: draw(bars, width),
        scenario,
        total,
        types,
    }
}

pub fn single_bar() -> Case {
    case(
        "single_bar",
        &[((0.0, 50.0), (100.0, 50.0))],
        scenario(&left_edge(0, N), &[(N, 50)]),
        1,
        Some((0, 1, 0)),
    )
}

pub fn plus_sign() -> Case {
    case(
        "plus_sign",
        &[((20.0, 50.0), (80.0, 50.0)), ((50.0, 20.0), (50.0, 80.0))],
        free(),
        4,
        Some((0, 0, 4)),
    )
}

const FIG9_A: (f64, f64) = (30.0, 20.0);
const FIG9_B: (f64, f64) = (30.0, 80.0);
const FIG9_C: (f64, f64) = (55.0, 50.0);
const FIG9_D: (f64, f64) = (75.0, 25.0);
const FIG9_E: (f64, f64) = (75.0, 75.0);
const FIG9_BARS: [((f64, f64), (f64, f64)); 13] = [
    ((0.0, 5.0), FIG9_A),
    ((0.0, 40.0), FIG9_A),
    ((0.0, 60.0), FIG9_B),
    ((0.0, 95.0), FIG9_B),
    ((0.0, 50.0), FIG9_C),
    (FIG9_D, (100.0, 15.0)),
    (FIG9_E, (100.0, 85.0)),
    (FIG9_A, FIG9_C),
    (FIG9_B, FIG9_C),
    (FIG9_A, FIG9_D),
    (FIG9_B, FIG9_E),
    (FIG9_C, FIG9_D),
    (FIG9_C, FIG9_E),
];

/// Cantilever truss with 5 clamped, 2 loaded and 6 internal bars.
pub fn reference_truss() -> Case {
    case(
        "reference_truss",
        &FIG9_BARS,
        scenario(&left_edge(0, N), &[(N, 15), (N, 85)]),
        13,
        Some((5, 2, 6)),
    )
}

pub fn all() -> Vec<Case> {
    let fixed = left_edge(0, N);
    let mut v = vec![single_bar(), plus_sign(), reference_truss()];
    v.push(case(
        "diagonal_bar",
        &[((0.0, 10.0), (100.0, 90.0))],
        scenario(&fixed, &[(N, 90)]),
        1,
        Some((0, 1, 0)),
    ));
    v.push(case(
        "a_frame",
        &[((0.0, 15.0), (50.0, 50.0)), ((0.0, 85.0), (50.0, 50.0)), ((50.0, 50.0), (100.0, 50.0))],
        scenario(&fixed, &[(N, 50)]),
        3,
        Some((2, 1, 0)),
    ));
    v.push(case(
        "v_into_load",
        &[((0.0, 10.0), (100.0, 50.0)), ((0.0, 90.0), (100.0, 50.0))],
        scenario(&fixed, &[(N, 50)]),
        2,
        Some((0, 2, 0)),
    ));
    v.push(case(
        "t_shape",
        &[((0.0, 30.0), (100.0, 30.0)), ((50.0, 30.0), (50.0, 90.0))],
        scenario(&fixed, &[(N, 30)]),
        3,
        Some((1, 1, 1)),
    ));
    v.push(case(
        "x_cross",
        &[((10.0, 10.0), (90.0, 90.0)), ((10.0, 90.0), (90.0, 10.0))],
        free(),
        4,
        Some((0, 0, 4)),
    ));
    v.push(case(
        "y_star",
        &[((50.0, 50.0), (50.0, 10.0)), ((50.0, 50.0), (15.0, 80.0)), ((50.0, 50.0), (85.0, 80.0))],
        free(),
        3,
        Some((0, 0, 3)),
    ));
    v.push(case(
        "five_star",
        &[
            ((50.0, 50.0), (50.0, 8.0)),
            ((50.0, 50.0), (90.0, 37.0)),
            ((50.0, 50.0), (75.0, 84.0)),
            ((50.0, 50.0), (25.0, 84.0)),
            ((50.0, 50.0), (10.0, 37.0)),
        ],
        free(),
        5,
        Some((0, 0, 5)),
    ));
    v.push(case(
        "k_brace",
        &[((0.0, 50.0), (60.0, 50.0)), ((60.0, 50.0), (95.0, 15.0)), ((60.0, 50.0), (95.0, 85.0))],
        scenario(&fixed, &[(N, 15), (N, 85)]),
        3,
        Some((1, 2, 0)),
    ));
    v.push(case(
        "ladder_two_rungs",
        &[
            ((0.0, 30.0), (100.0, 30.0)),
            ((0.0, 70.0), (100.0, 70.0)),
            ((35.0, 30.0), (35.0, 70.0)),
            ((70.0, 30.0), (70.0, 70.0)),
        ],
        scenario(&fixed, &[(N, 30)]),
        8,
        None,
    ));
    v.push(case(
        "warren_truss",
        &[
            ((0.0, 30.0), (100.0, 30.0)),
            ((0.0, 30.0), (25.0, 75.0)),
            ((25.0, 75.0), (50.0, 30.0)),
            ((50.0, 30.0), (75.0, 75.0)),
            ((75.0, 75.0), (100.0, 30.0)),
        ],
        scenario(&fixed, &[(N, 30)]),
        6,
        None,
    ));
    v.push(case(
        "double_cantilever",
        &[((0.0, 25.0), (100.0, 25.0)), ((0.0, 75.0), (100.0, 75.0))],
        scenario(&fixed, &[(N, 25), (N, 75)]),
        2,
        Some((0, 2, 0)),
    ));
    v.push(case(
        "bridge_arch_posts",
        &[
            ((5.0, 90.0), (95.0, 90.0)),
            ((5.0, 90.0), (50.0, 30.0)),
            ((95.0, 90.0), (50.0, 30.0)),
            ((50.0, 30.0), (50.0, 90.0)),
        ],
        free(),
        5,
        None,
    ));
    v.push(case(
        "triangle_braced",
        &[
            ((0.0, 10.0), (90.0, 50.0)),
            ((0.0, 90.0), (90.0, 50.0)),
            ((0.0, 50.0), (90.0, 50.0)),
        ],
        scenario(&fixed, &[(90, 50)]),
        3,
        Some((0, 3, 0)),
    ));
    v.push(case(
        "fan_three_supports",
        &[
            ((0.0, 10.0), (70.0, 50.0)),
            ((0.0, 50.0), (70.0, 50.0)),
            ((0.0, 90.0), (70.0, 50.0)),
            ((70.0, 50.0), (100.0, 50.0)),
        ],
        scenario(&fixed, &[(N, 50)]),
        4,
        Some((3, 1, 0)),
    ));
    v.push(case(
        "h_frame",
        &[((20.0, 10.0), (20.0, 90.0)), ((80.0, 10.0), (80.0, 90.0)), ((20.0, 50.0), (80.0, 50.0))],
        free(),
        5,
        Some((0, 0, 5)),
    ));
    v.push(case(
        "comb_three_teeth",
        &[
            ((10.0, 20.0), (90.0, 20.0)),
            ((20.0, 20.0), (20.0, 80.0)),
            ((50.0, 20.0), (50.0, 80.0)),
            ((80.0, 20.0), (80.0, 80.0)),
        ],
        free(),
        7,
        None,
    ));
    v.push(case(
        "asterisk_four_lines",
        &[((50.0, 10.0), (50.0, 90.0)), ((10.0, 50.0), (90.0, 50.0)), ((15.0, 15.0), (85.0, 85.0))],
        free(),
        6,
        None,
    ));
    v.push(case(
        "pratt_panel",
        &[
            ((0.0, 20.0), (100.0, 20.0)),
            ((0.0, 80.0), (100.0, 80.0)),
            ((50.0, 20.0), (50.0, 80.0)),
            ((0.0, 80.0), (50.0, 20.0)),
            ((50.0, 20.0), (100.0, 80.0)),
        ],
        scenario(&fixed, &[(N, 80)]),
        7,
        None,
    ));
    v.push(case(
        "short_stub_bar",
        &[((0.0, 50.0), (40.0, 50.0))],
        scenario(&fixed, &[(40, 50)]),
        1,
        Some((0, 1, 0)),
    ));
    v.push(case_w(
        "wide_bar",
        &[((0.0, 50.0), (100.0, 50.0))],
        10.0,
        scenario(&fixed, &[(N, 50)]),
        1,
        None,
    ));
    v.push(case(
        "arrowhead",
        &[((20.0, 50.0), (90.0, 50.0)), ((90.0, 50.0), (60.0, 20.0)), ((90.0, 50.0), (60.0, 80.0))],
        free(),
        3,
        Some((0, 0, 3)),
    ));
    v.push(case(
        "inverted_y_loaded",
        &[((0.0, 20.0), (50.0, 50.0)), ((0.0, 80.0), (50.0, 50.0)), ((50.0, 50.0), (50.0, 100.0))],
        scenario(&fixed, &[(50, N)]),
        3,
        Some((2, 1, 0)),
    ));
    v.push(case(
        "zigzag_chain",
        &[
            ((0.0, 50.0), (25.0, 20.0)),
            ((25.0, 20.0), (50.0, 80.0)),
            ((50.0, 80.0), (75.0, 20.0)),
            ((75.0, 20.0), (100.0, 50.0)),
        ],
        scenario(&fixed, &[(N, 50)]),
        4,
        None,
    ));
    v.push(case(
        "l_bracket",
        &[((0.0, 20.0), (70.0, 20.0)), ((70.0, 20.0), (70.0, 100.0))],
        scenario(&fixed, &[(70, N)]),
        2,
        None,
    ));
    v.push(case(
        "closed_triangle",
        &[((20.0, 80.0), (80.0, 80.0)), ((80.0, 80.0), (50.0, 20.0)), ((50.0, 20.0), (20.0, 80.0))],
        free(),
        3,
        None,
    ));
    v.push(case(
        "braced_square",
        &[
            ((20.0, 20.0), (80.0, 20.0)),
            ((80.0, 20.0), (80.0, 80.0)),
            ((80.0, 80.0), (20.0, 80.0)),
            ((20.0, 80.0), (20.0, 20.0)),
            ((20.0, 20.0), (80.0, 80.0)),
        ],
        free(),
        5,
        None,
    ));
    v.push(case(
        "two_loads_tree",
        &[
            ((0.0, 50.0), (40.0, 50.0)),
            ((40.0, 50.0), (100.0, 15.0)),
            ((40.0, 50.0), (100.0, 85.0)),
            ((40.0, 50.0), (100.0, 50.0)),
        ],
        scenario(&fixed, &[(N, 15), (N, 50), (N, 85)]),
        4,
        Some((1, 3, 0)),
    ));
    v.push(case(
        "interior_load_bridge",
        &[
            ((0.0, 20.0), (50.0, 60.0)),
            ((0.0, 90.0), (50.0, 60.0)),
            ((50.0, 60.0), (50.0, 40.0)),
        ],
        scenario(&fixed, &[(50, 40)]),
        3,
        Some((2, 1, 0)),
    ));
    v.push(case(
        "double_x",
        &[
            ((5.0, 20.0), (50.0, 80.0)),
            ((5.0, 80.0), (50.0, 20.0)),
            ((50.0, 20.0), (95.0, 80.0)),
            ((50.0, 80.0), (95.0, 20.0)),
            ((50.0, 20.0), (50.0, 80.0)),
        ],
        free(),
        9,
        None,
    ));
    v.push(case_w(
        "reference_truss_w6",
        &FIG9_BARS,
        6.0,
        scenario(&fixed, &[(N, 15), (N, 85)]),
        13,
        Some((5, 2, 6)),
    ));
    v.push(case_w(
        "a_frame_w3",
        &[((0.0, 15.0), (50.0, 50.0)), ((0.0, 85.0), (50.0, 50.0)), ((50.0, 50.0), (100.0, 50.0))],
        3.0,
        scenario(&fixed, &[(N, 50)]),
        3,
        Some((2, 1, 0)),
    ));
    v.push(case(
        "two_bay_cantilever",
        &[
            ((0.0, 20.0), (50.0, 30.0)),
            ((50.0, 30.0), (100.0, 50.0)),
            ((0.0, 80.0), (50.0, 70.0)),
            ((50.0, 70.0), (100.0, 50.0)),
            ((50.0, 30.0), (50.0, 70.0)),
            ((0.0, 80.0), (50.0, 30.0)),
        ],
        scenario(&fixed, &[(N, 50)]),
        6,
        None,
    ));
    v.push(case_w(
        "y_star_w6",
        &[((50.0, 50.0), (50.0, 10.0)), ((50.0, 50.0), (15.0, 80.0)), ((50.0, 50.0), (85.0, 80.0))],
        6.0,
        free(),
        3,
        Some((0, 0, 3)),
    ));
    v.push(case(
        "x_cross_supported",
        &[((0.0, 10.0), (100.0, 90.0)), ((0.0, 90.0), (100.0, 10.0))],
        scenario(&fixed, &[(N, 10), (N, 90)]),
        4,
        Some((2, 2, 0)),
    ));
    v.push(case_w(
        "thin_diagonal",
        &[((0.0, 30.0), (100.0, 70.0))],
        2.0,
        scenario(&fixed, &[(N, 70)]),
        1,
        Some((0, 1, 0)),
    ));
    v
}
