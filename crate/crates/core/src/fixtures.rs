//! ARM big.LITTLE platform data and the reference tasksets.
//!
//! The same data ships as JSON under `fixtures/` at the repository root;
//! integration tests check that both copies agree.

use crate::model::{Platform, PowerModel, ProcessorType, TaskSpec};

/// Cortex-A15 operating points: (normalized speed, measured power mW).
pub const BIG_MEASURED: [(f64, f64); 9] = [
    (0.5, 327.0),
    (0.5625, 392.0),
    (0.625, 472.0),
    (0.6875, 562.0),
    (0.75, 661.0),
    (0.8125, 742.0),
    (0.875, 874.0),
    (0.9375, 1019.0),
    (1.0, 1142.0),
];

/// Cortex-A7 operating points. 250 MHz / 1600 MHz = 0.15625 (printed as 0.1563).
pub const LITTLE_MEASURED: [(f64, f64); 5] = [
    (0.15625, 32.0),
    (0.1875, 42.0),
    (0.25, 64.0),
    (0.3125, 92.0),
    (0.375, 134.0),
];

pub const BIG_POWER: PowerModel = PowerModel {
    alpha: 1063.9,
    beta: 2.2,
    p_static: 95.9075,
};

pub const LITTLE_POWER: PowerModel = PowerModel {
    alpha: 1103.17,
    beta: 2.3034,
    p_static: 18.3549,
};

pub const BIG_IDLE: f64 = 70.0;
pub const LITTLE_IDLE: f64 = 12.0;
pub const F_MAX_HZ: f64 = 1.6e9;

pub fn big_core(cores: usize) -> ProcessorType {
    ProcessorType {
        name: "big".into(),
        cores,
        speeds: BIG_MEASURED.iter().map(|p| p.0).collect(),
        power: BIG_POWER,
        p_idle: BIG_IDLE,
    }
}

pub fn little_core(cores: usize) -> ProcessorType {
    ProcessorType {
        name: "LITTLE".into(),
        cores,
        speeds: LITTLE_MEASURED.iter().map(|p| p.0).collect(),
        power: LITTLE_POWER,
        p_idle: LITTLE_IDLE,
    }
}

/// big cores are type 1, LITTLE cores type 2. Tasksets are given as
/// minimum execution times, so `f_max` is left at 1.
pub fn big_little(big: usize, little: usize) -> Platform {
    Platform::new([big_core(big), little_core(little)], 1.0).expect("fixture platform is valid")
}

/// Implicit-deadline tasksets `(D, [(x, p)])` evaluated on 2 big + 6 LITTLE.
pub const IMPLICIT_TASKSETS: [(f64, &[(f64, f64)]); 16] = [
    (0.50, &[(1.0, 5.0), (1.0, 10.0), (4.0, 20.0)]),
    (0.75, &[(1.0, 5.0), (1.0, 10.0), (5.0, 20.0), (4.0, 20.0)]),
    (1.00, &[(1.0, 5.0), (1.0, 10.0), (7.0, 20.0), (7.0, 20.0)]),
    (1.25, &[(1.0, 5.0), (1.0, 10.0), (6.0, 20.0), (6.0, 20.0), (7.0, 20.0)]),
    (1.50, &[(1.0, 5.0), (3.0, 10.0), (6.0, 20.0), (7.0, 20.0), (7.0, 20.0)]),
    (
        1.75,
        &[(1.0, 5.0), (2.0, 10.0), (6.0, 20.0), (7.0, 20.0), (7.0, 20.0), (7.0, 20.0)],
    ),
    (
        2.00,
        &[
            (1.0, 5.0),
            (3.0, 10.0),
            (7.0, 20.0),
            (7.0, 20.0),
            (7.0, 20.0),
            (7.0, 20.0),
            (2.0, 20.0),
        ],
    ),
    (
        2.25,
        &[
            (1.0, 5.0),
            (3.5, 10.0),
            (3.5, 10.0),
            (6.0, 20.0),
            (7.0, 20.0),
            (7.0, 20.0),
            (7.0, 20.0),
        ],
    ),
    (
        2.50,
        &[
            (1.0, 5.0),
            (3.0, 10.0),
            (3.0, 10.0),
            (3.0, 10.0),
            (7.0, 20.0),
            (7.0, 20.0),
            (7.0, 20.0),
            (7.0, 20.0),
        ],
    ),
    (
        2.75,
        &[
            (1.0, 5.0),
            (3.5, 10.0),
            (3.5, 10.0),
            (3.0, 10.0),
            (7.0, 20.0),
            (7.0, 20.0),
            (7.0, 20.0),
            (7.0, 20.0),
            (3.0, 20.0),
        ],
    ),
    (
        3.00,
        &[
            (1.0, 5.0),
            (3.0, 10.0),
            (3.0, 10.0),
            (3.0, 10.0),
            (3.0, 10.0),
            (7.0, 20.0),
            (7.0, 20.0),
            (7.0, 20.0),
            (7.0, 20.0),
            (4.0, 20.0),
        ],
    ),
    (
        3.25,
        &[
            (1.0, 5.0),
            (3.5, 10.0),
            (3.5, 10.0),
            (3.5, 10.0),
            (3.5, 10.0),
            (7.0, 20.0),
            (7.0, 20.0),
            (7.0, 20.0),
            (7.0, 20.0),
            (5.0, 20.0),
        ],
    ),
    (
        3.50,
        &[
            (1.0, 5.0),
            (3.5, 10.0),
            (3.5, 10.0),
            (3.0, 10.0),
            (3.0, 10.0),
            (7.0, 20.0),
            (7.0, 20.0),
            (7.0, 20.0),
            (7.0, 20.0),
            (7.0, 20.0),
            (5.0, 20.0),
        ],
    ),
    (
        3.75,
        &[
            (1.0, 5.0),
            (3.5, 10.0),
            (3.5, 10.0),
            (3.0, 10.0),
            (3.0, 10.0),
            (7.5, 20.0),
            (7.5, 20.0),
            (7.5, 20.0),
            (7.5, 20.0),
            (7.5, 20.0),
            (7.5, 20.0),
        ],
    ),
    (
        4.00,
        &[
            (1.0, 5.0),
            (3.5, 10.0),
            (3.5, 10.0),
            (3.0, 10.0),
            (3.0, 10.0),
            (7.5, 20.0),
            (7.5, 20.0),
            (7.5, 20.0),
            (7.5, 20.0),
            (7.5, 20.0),
            (7.5, 20.0),
            (5.0, 20.0),
        ],
    ),
    (
        4.25,
        &[
            (1.0, 5.0),
            (3.75, 10.0),
            (3.75, 10.0),
            (3.75, 10.0),
            (3.75, 10.0),
            (7.5, 20.0),
            (7.5, 20.0),
            (7.5, 20.0),
            (7.5, 20.0),
            (7.5, 20.0),
            (7.5, 20.0),
            (6.0, 20.0),
        ],
    ),
];

/// Constrained-deadline tasksets `(D, [(x, d, p)])` evaluated on 1 big + 1 LITTLE.
pub const CONSTRAINED_TASKSETS: [(f64, &[(f64, f64, f64)]); 10] = [
    (0.250, &[(0.9375, 5.0, 10.0), (0.625, 10.0, 10.0)]),
    (0.375, &[(1.5625, 5.0, 10.0), (0.625, 10.0, 10.0)]),
    (0.500, &[(1.875, 5.0, 10.0), (1.25, 10.0, 10.0)]),
    (0.625, &[(1.875, 5.0, 10.0), (1.0, 5.0, 10.0), (0.5, 10.0, 10.0)]),
    (0.750, &[(1.875, 5.0, 10.0), (1.625, 5.0, 10.0), (0.5, 10.0, 10.0)]),
    (0.875, &[(1.875, 5.0, 40.0), (1.75, 5.0, 40.0), (6.0, 40.0, 40.0)]),
    (
        1.000,
        &[(1.875, 5.0, 40.0), (1.875, 5.0, 40.0), (0.5, 5.0, 40.0), (6.0, 40.0, 40.0)],
    ),
    (
        1.125,
        &[
            (1.875, 5.0, 40.0),
            (1.5, 5.0, 40.0),
            (1.3125, 5.0, 40.0),
            (6.0, 40.0, 40.0),
            (1.5, 40.0, 40.0),
        ],
    ),
    (
        1.250,
        &[
            (1.875, 5.0, 40.0),
            (1.875, 5.0, 40.0),
            (1.5625, 5.0, 40.0),
            (6.0, 40.0, 40.0),
            (1.5, 40.0, 40.0),
        ],
    ),
    (
        1.375,
        &[
            (1.875, 5.0, 40.0),
            (1.875, 5.0, 40.0),
            (1.875, 5.0, 40.0),
            (6.0, 40.0, 40.0),
            (4.0, 40.0, 40.0),
        ],
    ),
];

/// Per-interval workloads `(omega^1, omega^2)` for tasks T1..T5 used to
/// illustrate the ordering algorithm on a 2 + 2 core platform.
pub const ORDERING_EXAMPLE: [(f64, f64); 5] = [(0.3, 0.7), (0.6, 0.4), (0.2, 0.4), (0.5, 0.0), (0.0, 0.5)];

pub fn implicit_taskset(index: usize) -> (f64, Vec<TaskSpec>) {
    let (d, tasks) = IMPLICIT_TASKSETS[index];
    let set = tasks
        .iter()
        .enumerate()
        .map(|(i, &(x, p))| TaskSpec::implicit(format!("T{}", i + 1), x, p))
        .collect();
    (d, set)
}

pub fn constrained_taskset(index: usize) -> (f64, Vec<TaskSpec>) {
    let (d, tasks) = CONSTRAINED_TASKSETS[index];
    let set = tasks
        .iter()
        .enumerate()
        .map(|(i, &(x, dl, p))| TaskSpec::periodic(format!("T{}", i + 1), x, dl, p))
        .collect();
    (d, set)
}
