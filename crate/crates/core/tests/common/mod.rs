#![allow(dead_code)]

use hess_core::cycle::{synthesize_test_cycle, DriveCycle, VehicleParams};
use hess_core::fis::{MfGenome, GENOME_LEN};
use rand::Rng;

/// Fronts by repeated peeling: a member belongs to the current front when no
/// other remaining member is at least as good in both objectives and
/// strictly better in one.
pub fn brute_force_fronts(objs: &[[f64; 2]]) -> Vec<Vec<usize>> {
    let beats = |a: [f64; 2], b: [f64; 2]| {
        (a[0] > b[0] && a[1] >= b[1]) || (a[0] >= b[0] && a[1] > b[1])
    };
    let mut left: Vec<usize> = (0..objs.len()).collect();
    let mut fronts = Vec::new();
    while !left.is_empty() {
        let front: Vec<usize> = left
            .iter()
            .copied()
            .filter(|&i| !left.iter().any(|&j| beats(objs[j], objs[i])))
            .collect();
        left.retain(|i| !front.contains(i));
        fronts.push(front);
    }
    fronts
}

pub fn random_genome<R: Rng>(rng: &mut R) -> MfGenome {
    MfGenome::new((0..GENOME_LEN).map(|_| rng.gen()).collect()).unwrap()
}

pub fn desk_lap() -> DriveCycle {
    synthesize_test_cycle(300.0, 55.0, 7, 1.0, &VehicleParams::default()).unwrap()
}
