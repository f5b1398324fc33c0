use fockforge::density_phase::{
    build_conjugates, build_phase_hd, verify_canonical_commutator, verify_conjecture,
    ConjugateForm, DensityPhaseContext, FermiParams, PhaseFunctional,
};
use fockforge::fock::{SparseOperator, SpinCounts, Statistics};
use fockforge::lattice::{tuple1, BoundaryMode, GridSpec, Spin};
use num_complex::Complex64;

fn home_restricted_canonical(ctx: &DensityPhaseContext, forms: &[ConjugateForm], orders: &[u32]) {
    let home = ctx.home_dim();
    let identity = SparseOperator::identity(ctx.tower().space());
    for &form in forms {
        let mut per_qk: std::collections::BTreeMap<(i32, i32), Vec<f64>> = Default::default();
        for &order in orders {
            let set = build_conjugates(ctx, form, order).unwrap();
            for q in [-1i32, 1] {
                let x = set.get(&tuple1(q)).unwrap();
                for k in [-1i32, 0, 1] {
                    let rho = ctx.density_op(&tuple1(k), Spin::Up).unwrap();
                    let mut comm = x.evaluated.commutator(&rho).unwrap();
                    if k == -q {
                        comm = comm.sub(&identity.scaled(Complex64::new(0.0, 1.0))).unwrap();
                    }
                    let dev = comm.restrict_columns(0, home).operator_norm();
                    per_qk.entry((q, k)).or_default().push(dev);
                }
            }
        }
        for ((q, k), devs) in per_qk {
            let mono = fockforge::density_phase::non_increasing(&devs);
            println!("  home-restricted {form} q={q:+} k={k:+}: {devs:.4?} mono={mono}");
        }
    }
}

fn main() {
    let grid = GridSpec::new(1, 2.0 * std::f64::consts::PI, 1, BoundaryMode::Wrap).unwrap();

    for counts in [SpinCounts::new(2, 0), SpinCounts::new(1, 1)] {
        println!("=== canonical, home ({}, {}) ===", counts.up, counts.down);
        let params = FermiParams {
            k_f: 0.5 * grid.momentum_step(),
            mass: 1.0,
            n_particles: counts.up,
            grid,
        };
        let phase = build_phase_hd(&params).unwrap();
        println!(
            "phase: defined {} undefined {}",
            phase.defined_count(),
            phase.undefined_count()
        );
        let ctx = DensityPhaseContext::new(&grid, Statistics::Fermi, counts, Spin::Up, 1, phase).unwrap();
        home_restricted_canonical(&ctx, &[ConjugateForm::Field, ConjugateForm::Current], &[1, 2, 3, 4]);
        let rows =
            verify_canonical_commutator(&ctx, &[ConjugateForm::Field, ConjugateForm::Current], &[1, 2, 3, 4])
                .unwrap();
        for form in [ConjugateForm::Field, ConjugateForm::Current] {
            for q in [-1i32, 1] {
                for k in [-1i32, 0, 1] {
                    let devs: Vec<f64> = rows
                        .iter()
                        .filter(|r| r.form == form && r.q == tuple1(q) && r.k == tuple1(k) && !r.other_spin)
                        .map(|r| r.deviation)
                        .collect();
                    let mono = fockforge::density_phase::non_increasing(&devs);
                    println!("{form} q={q:+} k={k:+}: {devs:.4?} mono={mono}");
                }
            }
        }
    }

    println!("=== conjecture N=1 n_max=1 ===");
    let params = FermiParams { k_f: 0.5 * grid.momentum_step(), mass: 1.0, n_particles: 1, grid };
    let phase = build_phase_hd(&params).unwrap();
    println!("phase defined {} undefined {}", phase.defined_count(), phase.undefined_count());
    let ctx =
        DensityPhaseContext::new(&grid, Statistics::Fermi, SpinCounts::new(1, 0), Spin::Up, 1, phase)
            .unwrap();
    for form in [ConjugateForm::Current, ConjugateForm::Field] {
        let report = verify_conjecture(
            &ctx,
            form,
            &[tuple1(0), tuple1(1), tuple1(-1)],
            &[1, 2, 3, 4],
            None,
        )
        .unwrap();
        for verdict in &report.verdicts {
            println!(
                "{form} k={:?}: {:.6?} mono={}",
                verdict.k[0], verdict.residuals, verdict.non_increasing
            );
        }
    }
}
