use fockforge::density_phase::{build_phase_hd, FermiParams};
use fockforge::lattice::{BoundaryMode, GridSpec};

fn main() {
    let grid = GridSpec::new(1, 2.0 * std::f64::consts::PI, 8, BoundaryMode::Wrap).unwrap();
    let params = FermiParams { k_f: 1.5 * grid.momentum_step(), mass: 1.0, n_particles: 3, grid };
    let phase = build_phase_hd(&params).unwrap();
    println!("defined {} undefined {}", phase.defined_count(), phase.undefined_count());
    for row in phase.rows() {
        if row.q[0].abs() <= 4 {
            println!("q={:+} w1={:.6} w2={:.6} rad={:.6} u0={:?} {:?}", row.q[0], row.w1, row.w2, row.radicand, row.u0, row.undefined_reason);
        }
    }
}
