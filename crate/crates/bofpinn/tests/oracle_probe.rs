// scratch measurement of the exact-component loss floor (temporary)
use bofpinn::fracops::{GlOrder, Grid1D};
use bofpinn::problems::benchmarks;
use bofpinn::surrogate::*;

#[test]
fn probe_exact_component_floor() {
    let problem = benchmarks::manufactured_cross(1.5, 50);
    for n in [64usize, 257] {
        let grid = Grid1D::new(0.0, 1.0, n).unwrap();
        let sets = TrainingSets::build(
            &problem, grid, (0.0, problem.t_end), 24,
            XiStrategy::GaussTensor { n_per_axis: 8 }, 42,
        ).unwrap();
        let exact = ExactComponents::manufactured_cross();
        let ic = IcTargets::from_exact(&exact, &sets);
        let t0 = std::time::Instant::now();
        let parts = evaluate_parts(
            &ComponentSource::Exact(&exact), &problem, &sets, GlOrder::Second, ic,
        ).unwrap();
        println!(
            "n={n}: w={:.3e} ic={:.3e} bc={:.3e} bo={:.3e} g={:.3e} sum4={:.3e} ({:?})",
            parts.w, parts.ic, parts.bc, parts.bo, parts.g,
            parts.w + parts.ic + parts.bc + parts.bo, t0.elapsed()
        );
    }
}
