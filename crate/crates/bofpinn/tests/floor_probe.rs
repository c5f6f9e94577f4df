// Scratch measurement of GL truncation scales (temporary; deleted later).
use bofpinn::fracops::*;

#[test]
fn probe_gl_convergence_and_floors() {
    for &alpha in &[1.2f64, 1.5, 1.8] {
        for (order, name) in [(GlOrder::Second, "2nd"), (GlOrder::First, "1st")] {
            let mut errs = Vec::new();
            for &n in &[64usize, 128, 256, 512] {
                let grid = Grid1D::new(0.0, 1.0, n).unwrap();
                let f: Vec<f64> = grid
                    .nodes()
                    .iter()
                    .map(|&x| x.powi(3) * (1.0 - x).powi(3))
                    .collect();
                let out = shifted_gl_apply(grid, &f, alpha, order).unwrap();
                let oracle = AnalyticFracOracle::with_default_terms(FracBasis::CubicBump, alpha).unwrap();
                let mut max_err: f64 = 0.0;
                let mut l2_err = 0.0;
                for (i, &x) in grid.interior_nodes().iter().enumerate() {
                    let e = (out[i] - oracle.eval(x).unwrap()).abs();
                    max_err = max_err.max(e);
                    l2_err += e * e;
                }
                l2_err = (l2_err * grid.dx()).sqrt();
                errs.push((n, max_err, l2_err));
            }
            let slope = ((errs[0].1 / errs[3].1).ln()) / ((512.0f64 / 64.0).ln());
            println!("alpha={alpha} {name}: slope={slope:.3} errs={errs:?}");
        }
    }

    // Scale of the epsilon_1 floor at n_x = 256 for the manufactured problem:
    // mean-residual = (L_exact - L_GL)(100 sin(t/2+pi/4) x^3(1-x)^3), plus the
    // mode parts on sin(k pi x).
    let n = 257usize;
    let grid = Grid1D::new(0.0, 1.0, n).unwrap();
    let bump: Vec<f64> = grid.nodes().iter().map(|&x| x.powi(3) * (1.0 - x).powi(3)).collect();
    let out = shifted_gl_apply(grid, &bump, 1.5, GlOrder::Second).unwrap();
    let oracle = AnalyticFracOracle::with_default_terms(FracBasis::CubicBump, 1.5).unwrap();
    let mut mse = 0.0;
    let mut maxe: f64 = 0.0;
    for (i, &x) in grid.interior_nodes().iter().enumerate() {
        let e = 100.0 * (out[i] - oracle.eval(x).unwrap());
        mse += e * e;
        maxe = maxe.max(e.abs());
    }
    mse /= (n - 1) as f64;
    println!("bump x100 at n=257: pointwise max={maxe:.3e}, mse={mse:.3e}");

    for k in [1u32, 2] {
        let f: Vec<f64> = grid
            .nodes()
            .iter()
            .map(|&x| (k as f64 * std::f64::consts::PI * x).sin())
            .collect();
        let mut f = f;
        f[0] = 0.0;
        *f.last_mut().unwrap() = 0.0;
        let out = shifted_gl_apply(grid, &f, 1.5, GlOrder::Second).unwrap();
        let oracle = AnalyticFracOracle::with_default_terms(FracBasis::Sine(k), 1.5).unwrap();
        let mut mse = 0.0;
        let mut maxe: f64 = 0.0;
        for (i, &x) in grid.interior_nodes().iter().enumerate() {
            let e = out[i] - oracle.eval(x).unwrap();
            mse += e * e;
            maxe = maxe.max(e.abs());
        }
        mse /= (n - 1) as f64;
        println!("sin({k}pix) at n=257: pointwise max={maxe:.3e}, mse={mse:.3e}");
    }

    // Appendix D fPINN floor at N=512: residual of the exact solution at t=0,
    // amplitude 100 e^{-t} <= 100.
    let n = 512usize;
    let grid = Grid1D::new(0.0, 1.0, n).unwrap();
    let bump: Vec<f64> = grid.nodes().iter().map(|&x| x.powi(3) * (1.0 - x).powi(3)).collect();
    for (order, name) in [(GlOrder::Second, "2nd"), (GlOrder::First, "1st")] {
        let out = shifted_gl_apply(grid, &bump, 1.5, order).unwrap();
        let oracle = AnalyticFracOracle::with_default_terms(FracBasis::CubicBump, 1.5).unwrap();
        let mut mse = 0.0;
        for (i, &x) in grid.interior_nodes().iter().enumerate() {
            let e = 100.0 * (out[i] - oracle.eval(x).unwrap());
            mse += e * e;
        }
        mse /= (n - 1) as f64;
        println!("appD {name} floor at N=512: residual mse={mse:.3e}");
    }
}
