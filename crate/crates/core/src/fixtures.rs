//! The worked seven-column example used throughout the tests.

use crate::assembler::ProblemInstance;
use crate::dioph::Alphabet;
use crate::intlin::IntMatrix;
use crate::spheredec::RealMatrix;

pub struct Example {
    pub instance: ProblemInstance,
    /// The planted solution.
    pub x_a: IntMatrix,
}

#[rustfmt::skip]
const Y: [f64; 28] = [
     0.5,  3.7, -0.8,  3.3,  0.3, -3.5, -3.5,
     1.8,  5.8, -0.5, -0.4, -1.3, -2.7, -2.7,
    -2.2, -3.1,  2.6,  0.5, -0.4,  1.3,  1.3,
     0.8,  3.5, -1.1,  2.5,  0.3, -3.0, -3.0,
];

#[rustfmt::skip]
const G: [f64; 12] = [
     0.5,  0.3,  3.5,
     1.8, -1.3,  2.7,
    -2.2, -0.4, -1.3,
     0.8,  0.3,  3.0,
];

pub const A_ROWS: [[i64; 7]; 4] = [
    [8, 2, 10, 0, 12, 2, 0],
    [4, 6, 9, 1, 14, 5, 2],
    [2, 0, 1, 1, 0, 1, 0],
    [2, 1, 3, 0, 4, 0, 1],
];

pub const X_A_ROWS: [[i64; 7]; 3] = [
    [1, 1, -1, -1, 0, 0, 0],
    [0, -1, -1, 1, 1, 0, 0],
    [0, 1, 0, 1, 0, -1, -1],
];

/// `S = {-1, 0, 1}`, `K = 4`, `N = 3`, `d0 = 0.5`.
pub fn example1() -> Example {
    let instance = ProblemInstance::new(
        RealMatrix::from_row_slice(4, 7, &Y),
        RealMatrix::from_row_slice(4, 3, &G),
        IntMatrix::from_rows(&A_ROWS).expect("static data"),
        Alphabet::range(-1, 1).expect("static data"),
        4,
        3,
        Some(0.5),
    )
    .expect("static data is consistent");
    Example {
        instance,
        x_a: IntMatrix::from_rows(&X_A_ROWS).expect("static data"),
    }
}
